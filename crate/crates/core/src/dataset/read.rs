use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{de::DeserializeOwned, Deserialize, Serialize};

use super::coco::CocoFile;
use super::manifest::{DatasetKind, DatasetManifest};
use super::write::label_lines;
use super::{
    encode_png, produce_sample, sha256_hex, ANNOTATIONS_FILE, IMAGES_DIR, LABELS_DIR,
    MANIFEST_FILE, RECOGNIZER_LABELS_FILE,
};
use crate::compose::{derive_image_seed, Composer};
use crate::error::{Error, Result};
use crate::scene::LabeledObject;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GtImage {
    pub file_name: String,
    pub width: u32,
    pub height: u32,
    pub objects: Vec<LabeledObject>,
}

/// Ground truth keyed by image file name, in file order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub images: Vec<GtImage>,
}

impl GroundTruth {
    pub fn get(&self, file_name: &str) -> Option<&GtImage> {
        self.images.iter().find(|g| g.file_name == file_name)
    }

    pub fn object_count(&self) -> usize {
        self.images.iter().map(|g| g.objects.len()).sum()
    }
}

/// A file whose digest differs from the manifest, or which is missing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mismatch {
    pub path: String,
    pub expected: String,
    pub actual: Option<String>,
}

impl std::fmt::Display for Mismatch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.actual {
            Some(a) => write!(
                f,
                "{}: expected sha256 {}, found {}",
                self.path, self.expected, a
            ),
            None => write!(f, "{}: missing", self.path),
        }
    }
}

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let bytes = read_bytes(path)?;
    serde_json::from_slice(&bytes).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_manifest(dir: &Path) -> Result<DatasetManifest> {
    let m: DatasetManifest = read_json(&dir.join(MANIFEST_FILE))?;
    if !m.check_indices() {
        return Err(Error::Validation(format!(
            "{}: image records are not indexed 0..{}",
            dir.join(MANIFEST_FILE).display(),
            m.images.len()
        )));
    }
    Ok(m)
}

/// Reads an annotation file, or the one inside a dataset directory.
pub fn read_ground_truth(path: &Path) -> Result<GroundTruth> {
    let file: PathBuf = if path.is_dir() {
        path.join(ANNOTATIONS_FILE)
    } else {
        path.to_path_buf()
    };
    let coco: CocoFile = read_json(&file)?;
    let mut images: Vec<GtImage> = coco
        .images
        .iter()
        .map(|i| GtImage {
            file_name: i.file_name.clone(),
            width: i.width,
            height: i.height,
            objects: Vec::new(),
        })
        .collect();
    let slot: BTreeMap<u64, usize> = coco
        .images
        .iter()
        .enumerate()
        .map(|(k, i)| (i.id, k))
        .collect();
    if slot.len() != images.len() {
        return Err(Error::Validation(format!(
            "{}: duplicate image ids",
            file.display()
        )));
    }
    for a in &coco.annotations {
        let k = *slot.get(&a.image_id).ok_or_else(|| {
            Error::Validation(format!(
                "{}: annotation {} names unknown image {}",
                file.display(),
                a.id,
                a.image_id
            ))
        })?;
        let o = a.to_object().ok_or_else(|| {
            Error::Validation(format!(
                "{}: annotation {} has class {} or box {:?} out of range",
                file.display(),
                a.id,
                a.category_id,
                a.bbox
            ))
        })?;
        images[k].objects.push(o);
    }
    Ok(GroundTruth { images })
}

/// Reads `labels.tsv` from a recognizer set directory or the file itself.
pub fn read_recognizer_labels(path: &Path) -> Result<BTreeMap<String, String>> {
    let file: PathBuf = if path.is_dir() {
        path.join(RECOGNIZER_LABELS_FILE)
    } else {
        path.to_path_buf()
    };
    let text = fs::read_to_string(&file).map_err(|e| Error::io(&file, e))?;
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let parse = |message: String| Error::Parse {
            path: file.clone(),
            line: i + 1,
            message,
        };
        if line.is_empty() {
            continue;
        }
        let (name, transcript) = line
            .split_once('\t')
            .ok_or_else(|| parse("expected file name and transcript separated by a tab".into()))?;
        if out
            .insert(name.to_string(), transcript.to_string())
            .is_some()
        {
            return Err(parse(format!("duplicate file name {name}")));
        }
    }
    Ok(out)
}

/// Re-hashes every file listed in the manifest.
pub fn verify_dataset(dir: &Path) -> Result<Vec<Mismatch>> {
    let m = read_manifest(dir)?;
    let listed = m
        .images
        .iter()
        .map(|r| (format!("{IMAGES_DIR}/{}", r.file_name), &r.sha256))
        .chain(m.files.iter().map(|f| (f.path.clone(), &f.sha256)));
    let mut out = Vec::new();
    for (rel, expected) in listed {
        let actual = fs::read(dir.join(&rel)).ok().map(|b| sha256_hex(&b));
        if actual.as_ref() != Some(expected) {
            out.push(Mismatch {
                path: rel,
                expected: expected.clone(),
                actual,
            });
        }
    }
    Ok(out)
}

/// Rebuilds every image from the manifest's seed and config snapshot and
/// compares digests, without touching the files on disk.
pub fn regenerate(dir: &Path, workers: usize) -> Result<Vec<Mismatch>> {
    let m = read_manifest(dir)?;
    let composer = Composer::new(m.config.clone())?;
    let labels: HashSet<&str> = m.files.iter().map(|f| f.path.as_str()).collect();
    let label_digest: BTreeMap<&str, &str> = m
        .files
        .iter()
        .map(|f| (f.path.as_str(), f.sha256.as_str()))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::domain(format!("cannot start worker pool: {e}")))?;
    let per_image: Vec<Vec<Mismatch>> = pool.install(|| {
        m.images
            .par_iter()
            .map(|r| -> Result<Vec<Mismatch>> {
                let mut out = Vec::new();
                let seed = derive_image_seed(m.master_seed, r.index);
                if seed != r.seed {
                    return Err(Error::Validation(format!(
                        "image {} records seed {} but the master seed derives {seed}",
                        r.index, r.seed
                    )));
                }
                let s = produce_sample(&composer, r.index, r.image_type, seed)?;
                let digest = sha256_hex(&encode_png(&s.image)?);
                if digest != r.sha256 {
                    out.push(Mismatch {
                        path: format!("{IMAGES_DIR}/{}", r.file_name),
                        expected: r.sha256.clone(),
                        actual: Some(digest),
                    });
                }
                let rel = format!("{LABELS_DIR}/{:06}.txt", r.index);
                if m.kind == DatasetKind::Detection && labels.contains(rel.as_str()) {
                    let digest = sha256_hex(label_lines(&s.scene.labeled_objects).as_bytes());
                    if digest != label_digest[rel.as_str()] {
                        out.push(Mismatch {
                            path: rel.clone(),
                            expected: label_digest[rel.as_str()].to_string(),
                            actual: Some(digest),
                        });
                    }
                }
                Ok(out)
            })
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(per_image.into_iter().flatten().collect())
}
