//! On-disk datasets.
//!
//! Detection layout:
//!
//! ```text
//! <out>/images/000000.png
//! <out>/labels/000000.txt
//! <out>/annotations.json
//! <out>/manifest.json
//! ```
//!
//! Recognizer layout replaces `labels/` and `annotations.json` with a single
//! `labels.tsv` mapping image file name to transcript.

pub mod coco;
pub mod manifest;
mod read;
mod write;

use std::io::Cursor;

use image::codecs::png::{CompressionType, FilterType, PngEncoder};
use image::{ExtendedColorType, ImageEncoder};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::compose::Composer;
use crate::error::{Error, Result};
use crate::geom::BBox;
use crate::raster::{augment, render, sample_augment, AugmentParams, RasterImage};
use crate::scene::{ImageType, Scene};

pub use coco::{CocoAnnotation, CocoCategory, CocoFile, CocoImage};
pub use manifest::{
    ClassEntry, DatasetKind, DatasetManifest, FileRecord, ImageRecord, MANIFEST_FORMAT,
};
pub use read::{
    read_ground_truth, read_manifest, read_recognizer_labels, regenerate, verify_dataset,
    GroundTruth, GtImage, Mismatch,
};
pub use write::{generate_dataset, label_lines, write_dataset, write_recognizer_set};

pub const IMAGES_DIR: &str = "images";
pub const LABELS_DIR: &str = "labels";
pub const ANNOTATIONS_FILE: &str = "annotations.json";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const RECOGNIZER_LABELS_FILE: &str = "labels.tsv";
pub const DEFAULT_RECOGNIZER_COUNT: usize = 30_000;
pub const GENERATOR_VERSION: &str = concat!("techdraw-core ", env!("CARGO_PKG_VERSION"));

/// Fractions of part drawings (type 1) and clutter sheets (type 2).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mix {
    pub part: f64,
    pub clutter: f64,
}

impl Default for Mix {
    fn default() -> Self {
        Mix {
            part: 0.7,
            clutter: 0.3,
        }
    }
}

impl Mix {
    pub fn new(part: f64, clutter: f64) -> Result<Self> {
        let m = Mix { part, clutter };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |f: f64| f.is_finite() && (0.0..=1.0).contains(&f);
        if !ok(self.part) || !ok(self.clutter) || ((self.part + self.clutter) - 1.0).abs() > 1e-9 {
            return Err(Error::domain(format!(
                "mix fractions {} + {} must be in [0, 1] and sum to 1",
                self.part, self.clutter
            )));
        }
        Ok(())
    }

    /// Largest-remainder split of `n` images; ties go to the part drawings.
    pub fn counts(&self, n: usize) -> (usize, usize) {
        let exact = [self.part * n as f64, self.clutter * n as f64];
        let mut c = [exact[0].floor() as usize, exact[1].floor() as usize];
        let mut left = n.saturating_sub(c[0] + c[1]);
        let mut order = [0usize, 1];
        order.sort_by(|&a, &b| {
            (exact[b] - exact[b].floor()).total_cmp(&(exact[a] - exact[a].floor()))
        });
        for &i in order.iter().cycle() {
            if left == 0 {
                break;
            }
            c[i] += 1;
            left -= 1;
        }
        (c[0], c[1])
    }

    /// Image type of each index: part drawings first, then clutter sheets.
    pub fn plan(&self, n: usize) -> Vec<ImageType> {
        let (p, c) = self.counts(n);
        std::iter::repeat_n(ImageType::Part, p)
            .chain(std::iter::repeat_n(ImageType::Clutter, c))
            .collect()
    }
}

/// A rendered scene with the augmentation applied to it, if any.
#[derive(Debug, Clone)]
pub struct Sample {
    pub index: u64,
    pub seed: u64,
    pub scene: Scene,
    pub image: RasterImage,
    pub augment: Option<AugmentParams>,
}

pub fn produce_sample(
    composer: &Composer,
    index: u64,
    image_type: ImageType,
    seed: u64,
) -> Result<Sample> {
    let scene = composer.compose(image_type, seed)?;
    let mut image = render(&scene)?;
    let cfg = composer.config();
    let wants = match image_type {
        ImageType::Part => cfg.augment_part,
        ImageType::Clutter => cfg.augment_clutter,
        ImageType::Characters => false,
    };
    let params = wants.then(|| sample_augment(seed, &cfg.augment));
    if let Some(p) = &params {
        image = augment(&image, p)?;
    }
    Ok(Sample {
        index,
        seed,
        scene,
        image,
        augment: params,
    })
}

/// Lossless grayscale PNG with fixed encoder settings.
pub fn encode_png(img: &RasterImage) -> Result<Vec<u8>> {
    let mut buf = Cursor::new(Vec::new());
    PngEncoder::new_with_quality(&mut buf, CompressionType::Fast, FilterType::Adaptive)
        .write_image(&img.pixels, img.width, img.height, ExtendedColorType::L8)
        .map_err(|source| Error::Image {
            path: "<memory>".into(),
            source,
        })?;
    Ok(buf.into_inner())
}

pub fn decode_png(bytes: &[u8], path: &std::path::Path) -> Result<RasterImage> {
    let img = image::load_from_memory(bytes)
        .map_err(|source| Error::Image {
            path: path.to_path_buf(),
            source,
        })?
        .into_luma8();
    let (w, h) = img.dimensions();
    RasterImage::from_pixels(w, h, img.into_raw())
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn image_file_name(index: u64) -> String {
    format!("{index:06}.png")
}

/// Cuts each box out of `img`. Boxes are rounded to whole pixels and clipped
/// to the image; a box with no pixels inside yields an error entry.
pub fn crop_boxes(img: &RasterImage, boxes: &[BBox]) -> Vec<Result<RasterImage>> {
    boxes.iter().map(|b| crop_box(img, b)).collect()
}

fn crop_box(img: &RasterImage, b: &BBox) -> Result<RasterImage> {
    let x0 = b.x.round().max(0.0);
    let y0 = b.y.round().max(0.0);
    let x1 = (b.x + b.w).round().min(img.width as f64);
    let y1 = (b.y + b.h).round().min(img.height as f64);
    if !(x1 > x0 && y1 > y0) {
        return Err(Error::domain(format!(
            "box [{}, {}, {}, {}] lies outside the {}x{} image",
            b.x, b.y, b.w, b.h, img.width, img.height
        )));
    }
    let (x0, y0, x1, y1) = (x0 as usize, y0 as usize, x1 as usize, y1 as usize);
    let w = img.width as usize;
    let mut pixels = Vec::with_capacity((x1 - x0) * (y1 - y0));
    for y in y0..y1 {
        pixels.extend_from_slice(&img.pixels[y * w + x0..y * w + x1]);
    }
    RasterImage::from_pixels((x1 - x0) as u32, (y1 - y0) as u32, pixels)
}
