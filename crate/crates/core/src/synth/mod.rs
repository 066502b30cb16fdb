//! Domain knowledge of technical drawings: parts, annotations, background.

mod annotate;
mod distractor;
mod grammar;
mod part;

pub use annotate::{
    leader, make_dimension, make_tolerance_frame, ARROW_LENGTH, BOX_PAD, MAX_DIMENSION_LENGTH,
};
pub use distractor::{
    distractor_library, extent, load_crop_dir, make_distractor, DistractorEntry, DistractorKind,
    RasterCrop, SCALE_RANGE, VARIANTS_PER_KIND,
};
pub use grammar::{sample_tolerance_value, DimensionTextGrammar};
pub use part::{
    dash_dot, generate_part, Drilling, FeatureAnchor, OutlineSegment, PartOutline, MIN_PART_REGION,
};
