//! Synthetic technical-drawing datasets and detector/recognizer scoring.
//!
//! The generator composes vector [`Scene`]s for three image types, renders
//! them to grayscale, and writes annotated datasets. The evaluation side
//! scores external predictions with mAP at IoU 0.5, detection rate and
//! character error rate.

pub mod alphabet;
pub mod compose;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod geom;
pub mod predictions;
pub mod raster;
pub mod scene;
pub mod synth;

pub use compose::{
    compose_type1, compose_type2, compose_type3, derive_image_seed, Composer, ComposerConfig,
};
pub use dataset::{
    crop_boxes, generate_dataset, read_ground_truth, read_manifest, read_recognizer_labels,
    regenerate, verify_dataset, write_dataset, write_recognizer_set, DatasetManifest, GroundTruth,
    Mix, Sample,
};
pub use error::{Error, Result};
pub use eval::{
    cer, detection_rate, evaluate, iou, levenshtein, match_detections, EvalOptions, EvalReport,
    Percent,
};
pub use geom::{BBox, Point, Rect};
pub use predictions::{read_predictions, write_predictions, Prediction, PredictionSet};
pub use raster::{augment, render, AugmentParams, AugmentRanges, RasterImage};
pub use scene::{
    canvas_size_for, validate_scene, ClassLabel, ImageType, LabeledObject, Orientation, Primitive,
    Scene,
};
