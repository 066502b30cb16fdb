//! Independent reference implementations used to cross-check the metrics.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use techdraw_core::dataset::{GroundTruth, GtImage};
use techdraw_core::{BBox, ClassLabel, LabeledObject, Orientation, Prediction, PredictionSet};

pub fn iou(a: &BBox, b: &BBox) -> f64 {
    let w = (a.x + a.w).min(b.x + b.w) - a.x.max(b.x);
    let h = (a.y + a.h).min(b.y + b.h) - a.y.max(b.y);
    let inter = if w > 0.0 && h > 0.0 { w * h } else { 0.0 };
    inter / (a.w * a.h + b.w * b.h - inter)
}

/// Full DP table edit distance.
pub fn edit_distance(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut d = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for (i, row) in d.iter_mut().enumerate() {
        row[0] = i;
    }
    d[0] = (0..=b.len()).collect();
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let sub = d[i - 1][j - 1] + usize::from(a[i - 1] != b[j - 1]);
            d[i][j] = sub.min(d[i - 1][j] + 1).min(d[i][j - 1] + 1);
        }
    }
    d[a.len()][b.len()]
}

/// AP from every prefix of the ranking: at each new recall level take the
/// best precision reached at that recall or beyond.
pub fn ap(ranked_tp: &[bool], positives: usize) -> Option<f64> {
    if positives == 0 {
        return None;
    }
    let points: Vec<(f64, f64)> = (1..=ranked_tp.len())
        .map(|k| {
            let tp = ranked_tp[..k].iter().filter(|&&t| t).count() as f64;
            (tp / positives as f64, tp / k as f64)
        })
        .collect();
    let mut levels: Vec<f64> = points.iter().map(|p| p.0).collect();
    levels.dedup();
    let mut area = 0.0;
    let mut prev = 0.0;
    for r in levels {
        let best = points
            .iter()
            .filter(|p| p.0 >= r)
            .map(|p| p.1)
            .fold(0.0, f64::max);
        area += (r - prev) * best;
        prev = r;
    }
    Some(area)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub ap: [Option<f64>; 3],
    pub map: f64,
    pub detected: usize,
    pub total: usize,
    pub edits: usize,
    pub chars: usize,
}

/// Straightforward evaluation: rank all predictions of a class once, then
/// walk the ranking and let each prediction take its best free box.
pub fn evaluate(gt: &GroundTruth, preds: &PredictionSet, threshold: f64) -> OracleReport {
    let mut aps = [None; 3];
    let mut detected = 0;
    let (mut edits, mut chars) = (0, 0);
    for (ci, class) in ClassLabel::ALL.into_iter().enumerate() {
        let mut taken: Vec<Vec<bool>> = gt
            .images
            .iter()
            .map(|g| vec![false; g.objects.len()])
            .collect();
        let mut ranking: Vec<usize> = (0..preds.records.len())
            .filter(|&i| preds.records[i].class == class)
            .collect();
        ranking.sort_by(|&a, &b| {
            let (ca, cb) = (preds.records[a].confidence, preds.records[b].confidence);
            cb.partial_cmp(&ca).unwrap().then(a.cmp(&b))
        });
        let mut tps = Vec::new();
        for &i in &ranking {
            let p = &preds.records[i];
            let gi = gt
                .images
                .iter()
                .position(|g| g.file_name == p.image)
                .unwrap();
            let img = &gt.images[gi];
            let mut best: Option<(usize, f64)> = None;
            for (k, o) in img.objects.iter().enumerate() {
                if o.class != class || taken[gi][k] {
                    continue;
                }
                let v = iou(&p.bbox, &o.bbox);
                if best.is_none_or(|(_, b)| v > b) {
                    best = Some((k, v));
                }
            }
            let hit = matches!(best, Some((_, v)) if v >= threshold);
            if let (true, Some((k, _))) = (hit, best) {
                taken[gi][k] = true;
                detected += 1;
                if let Some(h) = &p.transcript {
                    edits += edit_distance(&img.objects[k].transcript, h);
                    chars += img.objects[k].transcript.chars().count();
                }
            }
            tps.push(hit);
        }
        let positives = gt
            .images
            .iter()
            .flat_map(|g| &g.objects)
            .filter(|o| o.class == class)
            .count();
        aps[ci] = ap(&tps, positives);
    }
    let defined: Vec<f64> = aps.iter().flatten().copied().collect();
    OracleReport {
        ap: aps,
        map: defined.iter().sum::<f64>() / defined.len() as f64,
        detected,
        total: gt.images.iter().map(|g| g.objects.len()).sum(),
        edits,
        chars,
    }
}

const TEXT: [&str; 6] = ["12", "4,5", "\u{2205}20", "30H7", "0,1", "8"];

fn small_box(rng: &mut ChaCha8Rng) -> BBox {
    BBox::new(
        rng.random_range(0..6) as f64 * 4.0,
        rng.random_range(0..6) as f64 * 4.0,
        rng.random_range(1..5) as f64 * 4.0,
        rng.random_range(1..5) as f64 * 4.0,
    )
    .unwrap()
}

/// Up to 4 images with up to 5 boxes each; predictions often copy or jitter
/// ground truth and reuse confidences so ties and near misses occur.
pub fn micro_instance(seed: u64) -> (GroundTruth, PredictionSet) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_images = rng.random_range(1..=4);
    let mut gt = GroundTruth::default();
    let mut preds = Vec::new();
    for i in 0..n_images {
        let name = format!("{i:06}.png");
        let objects: Vec<LabeledObject> = (0..rng.random_range(0..=5))
            .map(|_| {
                let class = ClassLabel::ALL[rng.random_range(0..3)];
                LabeledObject {
                    class,
                    bbox: small_box(&mut rng),
                    transcript: TEXT[rng.random_range(0..TEXT.len())].to_string(),
                    orientation: if class == ClassLabel::DimensionVertical {
                        Orientation::Vertical
                    } else {
                        Orientation::Horizontal
                    },
                }
            })
            .collect();
        for _ in 0..rng.random_range(0..=5) {
            let copy = !objects.is_empty() && rng.random_bool(0.6);
            let (class, bbox, transcript) = if copy {
                let o = &objects[rng.random_range(0..objects.len())];
                let mut b = o.bbox;
                if rng.random_bool(0.5) {
                    b.x += rng.random_range(-3..=3) as f64;
                    b.w += rng.random_range(0..=4) as f64;
                }
                let class = if rng.random_bool(0.85) {
                    o.class
                } else {
                    ClassLabel::ALL[rng.random_range(0..3)]
                };
                (class, b, o.transcript.clone())
            } else {
                (
                    ClassLabel::ALL[rng.random_range(0..3)],
                    small_box(&mut rng),
                    TEXT[rng.random_range(0..TEXT.len())].to_string(),
                )
            };
            let transcript = match rng.random_range(0..3) {
                0 => None,
                1 => Some(transcript),
                _ => Some(TEXT[rng.random_range(0..TEXT.len())].to_string()),
            };
            preds.push(Prediction {
                image: name.clone(),
                class,
                bbox,
                confidence: rng.random_range(1..=5) as f64 / 5.0,
                transcript,
            });
        }
        gt.images.push(GtImage {
            file_name: name,
            width: 100,
            height: 100,
            objects,
        });
    }
    (gt, PredictionSet::new(preds).unwrap())
}

/// Random pair over the recognizer alphabet, lengths 0 to 6.
pub fn random_pair(rng: &mut ChaCha8Rng) -> (String, String) {
    let glyphs = techdraw_core::alphabet::ALPHABET;
    let mut s = |min: usize| -> String {
        let n = rng.random_range(min..=6);
        (0..n).map(|_| glyphs[rng.random_range(0..4)]).collect()
    };
    (s(1), s(0))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
