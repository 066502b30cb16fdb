use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use super::coco::{categories, CocoAnnotation, CocoFile, CocoImage, CocoInfo};
use super::manifest::{
    ClassEntry, DatasetKind, DatasetManifest, FileRecord, ImageRecord, MANIFEST_FORMAT,
};
use super::{
    encode_png, image_file_name, produce_sample, sha256_hex, Mix, Sample, ANNOTATIONS_FILE,
    GENERATOR_VERSION, IMAGES_DIR, LABELS_DIR, MANIFEST_FILE, RECOGNIZER_LABELS_FILE,
};
use crate::compose::{derive_image_seed, Composer, ComposerConfig};
use crate::error::{Error, Result};
use crate::scene::{ClassLabel, ImageType, LabeledObject};

/// Everything one image contributes to the dataset files.
struct Emitted {
    record: ImageRecord,
    objects: Vec<LabeledObject>,
    label_file: Option<FileRecord>,
}

fn prepare_dir(out: &Path, with_labels: bool) -> Result<()> {
    if out.join(MANIFEST_FILE).exists() {
        return Err(Error::Validation(format!(
            "{} already holds a dataset; refusing to overwrite",
            out.display()
        )));
    }
    for d in [Some(IMAGES_DIR), with_labels.then_some(LABELS_DIR)]
        .into_iter()
        .flatten()
    {
        let p = out.join(d);
        fs::create_dir_all(&p).map_err(|e| Error::io(&p, e))?;
    }
    Ok(())
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<String> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })?;
    bytes.push(b'\n');
    write_file(path, &bytes)?;
    Ok(sha256_hex(&bytes))
}

/// One ground-truth line per object: `class_id x y w h transcript`.
pub fn label_lines(objects: &[LabeledObject]) -> String {
    objects
        .iter()
        .map(|o| {
            let b = &o.bbox;
            format!(
                "{} {} {} {} {} {}\n",
                o.class.id(),
                b.x,
                b.y,
                b.w,
                b.h,
                o.transcript
            )
        })
        .collect()
}

fn emit(out: &Path, s: &Sample, with_labels: bool) -> Result<Emitted> {
    let file_name = image_file_name(s.index);
    let bytes = encode_png(&s.image)?;
    write_file(&out.join(IMAGES_DIR).join(&file_name), &bytes)?;
    let label_file = if with_labels {
        let rel = format!("{LABELS_DIR}/{:06}.txt", s.index);
        let text = label_lines(&s.scene.labeled_objects);
        write_file(&out.join(&rel), text.as_bytes())?;
        Some(FileRecord {
            path: rel,
            sha256: sha256_hex(text.as_bytes()),
        })
    } else {
        None
    };
    Ok(Emitted {
        record: ImageRecord {
            index: s.index,
            image_type: s.scene.image_type,
            seed: s.seed,
            file_name,
            width: s.image.width,
            height: s.image.height,
            augment: s.augment,
            sha256: sha256_hex(&bytes),
        },
        objects: s.scene.labeled_objects.clone(),
        label_file,
    })
}

fn class_table() -> Vec<ClassEntry> {
    ClassLabel::ALL
        .iter()
        .map(|c| ClassEntry {
            id: c.id(),
            name: c.name().to_string(),
        })
        .collect()
}

fn finish_detection(
    out: &Path,
    cfg: &ComposerConfig,
    mix: Mix,
    emitted: Vec<Emitted>,
) -> Result<DatasetManifest> {
    let mut coco = CocoFile {
        info: CocoInfo {
            description: "synthetic technical drawings".to_string(),
            version: GENERATOR_VERSION.to_string(),
        },
        images: Vec::with_capacity(emitted.len()),
        annotations: Vec::new(),
        categories: categories(),
    };
    let mut images = Vec::with_capacity(emitted.len());
    let mut files = Vec::with_capacity(emitted.len() + 1);
    for e in emitted {
        let r = &e.record;
        coco.images.push(CocoImage {
            id: r.index,
            file_name: r.file_name.clone(),
            width: r.width,
            height: r.height,
        });
        for o in &e.objects {
            let id = coco.annotations.len() as u64 + 1;
            coco.annotations
                .push(CocoAnnotation::from_object(id, r.index, o));
        }
        files.extend(e.label_file);
        images.push(e.record);
    }
    let digest = write_json(&out.join(ANNOTATIONS_FILE), &coco)?;
    files.insert(
        0,
        FileRecord {
            path: ANNOTATIONS_FILE.to_string(),
            sha256: digest,
        },
    );
    let manifest = DatasetManifest {
        format: MANIFEST_FORMAT.to_string(),
        generator_version: GENERATOR_VERSION.to_string(),
        kind: DatasetKind::Detection,
        master_seed: cfg.seed,
        config: cfg.clone(),
        mix: Some(mix),
        classes: class_table(),
        images,
        files,
    };
    write_json(&out.join(MANIFEST_FILE), &manifest)?;
    Ok(manifest)
}

/// Persists already produced samples. Their indices must run from 0 and
/// their types must follow `mix.plan(samples.len())`.
pub fn write_dataset(
    samples: &[Sample],
    cfg: &ComposerConfig,
    mix: Mix,
    out: &Path,
) -> Result<DatasetManifest> {
    mix.validate()?;
    let plan = mix.plan(samples.len());
    for (i, (s, t)) in samples.iter().zip(&plan).enumerate() {
        if s.index != i as u64 || s.scene.image_type != *t {
            return Err(Error::Validation(format!(
                "sample {i} (index {}, type {}) does not follow the mix plan (type {})",
                s.index,
                s.scene.image_type.number(),
                t.number()
            )));
        }
    }
    prepare_dir(out, true)?;
    let emitted = samples
        .iter()
        .map(|s| emit(out, s, true))
        .collect::<Result<Vec<_>>>()?;
    finish_detection(out, cfg, mix, emitted)
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    if workers == 0 {
        return Err(Error::domain("worker count must be positive"));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::domain(format!("cannot start worker pool: {e}")))
}

fn run_indexed<T: Send>(
    workers: usize,
    n: usize,
    f: impl Fn(u64) -> Result<T> + Sync + Send,
) -> Result<Vec<T>> {
    pool(workers)?.install(|| (0..n as u64).into_par_iter().map(f).collect())
}

/// Generates `n` detection images from the composer's master seed and writes
/// them to `out`. Output bytes do not depend on `workers`.
pub fn generate_dataset(
    composer: &Composer,
    n: usize,
    mix: Mix,
    workers: usize,
    out: &Path,
) -> Result<DatasetManifest> {
    mix.validate()?;
    let master = composer.config().seed;
    let plan = mix.plan(n);
    prepare_dir(out, true)?;
    log::info!("generating {n} images into {}", out.display());
    let emitted = run_indexed(workers, n, |i| {
        let sample = produce_sample(composer, i, plan[i as usize], derive_image_seed(master, i))?;
        emit(out, &sample, true)
    })?;
    finish_detection(out, composer.config(), mix, emitted)
}

/// Writes `n` character crops and `labels.tsv` (`file_name<TAB>transcript`).
pub fn write_recognizer_set(
    composer: &Composer,
    n: usize,
    workers: usize,
    out: &Path,
) -> Result<DatasetManifest> {
    if n == 0 {
        return Err(Error::domain("recognizer set needs at least one image"));
    }
    let master = composer.config().seed;
    prepare_dir(out, false)?;
    let emitted = run_indexed(workers, n, |i| {
        let sample = produce_sample(
            composer,
            i,
            ImageType::Characters,
            derive_image_seed(master, i),
        )?;
        emit(out, &sample, false)
    })?;
    let mut tsv = String::new();
    let mut images = Vec::with_capacity(n);
    for e in emitted {
        let text = e
            .objects
            .first()
            .map(|o| o.transcript.as_str())
            .unwrap_or_default();
        tsv.push_str(&format!("{}\t{}\n", e.record.file_name, text));
        images.push(e.record);
    }
    let tsv_path: PathBuf = out.join(RECOGNIZER_LABELS_FILE);
    write_file(&tsv_path, tsv.as_bytes())?;
    let manifest = DatasetManifest {
        format: MANIFEST_FORMAT.to_string(),
        generator_version: GENERATOR_VERSION.to_string(),
        kind: DatasetKind::Recognizer,
        master_seed: master,
        config: composer.config().clone(),
        mix: None,
        classes: class_table(),
        images,
        files: vec![FileRecord {
            path: RECOGNIZER_LABELS_FILE.to_string(),
            sha256: sha256_hex(tsv.as_bytes()),
        }],
    };
    write_json(&out.join(MANIFEST_FILE), &manifest)?;
    Ok(manifest)
}
