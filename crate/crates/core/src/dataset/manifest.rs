use serde::{Deserialize, Serialize};

use super::Mix;
use crate::compose::ComposerConfig;
use crate::raster::AugmentParams;
use crate::scene::ImageType;

pub const MANIFEST_FORMAT: &str = "techdraw-dataset/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetKind {
    Detection,
    Recognizer,
}

/// Reproducibility record written beside every dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub format: String,
    pub generator_version: String,
    pub kind: DatasetKind,
    pub master_seed: u64,
    pub config: ComposerConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mix: Option<Mix>,
    pub classes: Vec<ClassEntry>,
    /// Sorted by index; indices are `0..images.len()`.
    pub images: Vec<ImageRecord>,
    /// Annotation and label files with their digests.
    pub files: Vec<FileRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassEntry {
    pub id: u32,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageRecord {
    pub index: u64,
    pub image_type: ImageType,
    pub seed: u64,
    pub file_name: String,
    pub width: u32,
    pub height: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub augment: Option<AugmentParams>,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileRecord {
    pub path: String,
    pub sha256: String,
}

impl DatasetManifest {
    pub fn count(&self, t: ImageType) -> usize {
        self.images.iter().filter(|r| r.image_type == t).count()
    }

    pub fn check_indices(&self) -> bool {
        self.images
            .iter()
            .enumerate()
            .all(|(i, r)| r.index == i as u64)
    }
}
