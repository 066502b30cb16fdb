//! Detection and recognition scores: IoU matching, per-class AP, mAP,
//! detection rate and character error rate.

use std::fmt;

use serde::{Deserialize, Serialize, Serializer};

use crate::dataset::GroundTruth;
use crate::error::{Error, Result};
use crate::geom::BBox;
use crate::predictions::PredictionSet;
use crate::scene::ClassLabel;

pub const DEFAULT_IOU_THRESHOLD: f64 = 0.5;

pub fn iou(a: &BBox, b: &BBox) -> f64 {
    let inter = a.intersection_area(b);
    let union = a.area() + b.area() - inter;
    if union <= 0.0 {
        return 0.0;
    }
    (inter / union).clamp(0.0, 1.0)
}

/// Outcome of matching one image's predictions of one class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchResult {
    /// Ground truth claimed by each prediction, in input order.
    pub prediction: Vec<Option<usize>>,
    pub ground_truth: Vec<bool>,
}

impl MatchResult {
    pub fn true_positives(&self) -> usize {
        self.prediction.iter().filter(|m| m.is_some()).count()
    }
}

/// Indices sorted by descending confidence; equal confidences keep input order.
fn ranked(confidences: impl Iterator<Item = f64>) -> Vec<usize> {
    let conf: Vec<f64> = confidences.collect();
    let mut order: Vec<usize> = (0..conf.len()).collect();
    order.sort_by(|&a, &b| conf[b].total_cmp(&conf[a]));
    order
}

/// Greedy matching: each prediction, best first, claims the unmatched ground
/// truth of highest IoU if that IoU reaches `threshold`.
pub fn match_detections(preds: &[(BBox, f64)], gts: &[BBox], threshold: f64) -> MatchResult {
    let mut prediction = vec![None; preds.len()];
    let mut ground_truth = vec![false; gts.len()];
    for i in ranked(preds.iter().map(|p| p.1)) {
        let mut best: Option<(usize, f64)> = None;
        for (g, gt) in gts.iter().enumerate() {
            if ground_truth[g] {
                continue;
            }
            let v = iou(&preds[i].0, gt);
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((g, v));
            }
        }
        if let Some((g, v)) = best {
            if v >= threshold {
                prediction[i] = Some(g);
                ground_truth[g] = true;
            }
        }
    }
    MatchResult {
        prediction,
        ground_truth,
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Interpolation {
    /// Area under the precision envelope at every recall step.
    #[default]
    AllPoints,
    /// Mean envelope precision at recall 0, 0.1, ..., 1.
    ElevenPoint,
}

/// A prediction of one class after matching, in dataset input order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scored {
    pub confidence: f64,
    pub true_positive: bool,
}

/// AP for one class, `None` when the class has no ground truth.
pub fn average_precision(
    scored: &[Scored],
    ground_truths: usize,
    interp: Interpolation,
) -> Option<f64> {
    if ground_truths == 0 {
        return None;
    }
    let mut recall = Vec::with_capacity(scored.len());
    let mut precision = Vec::with_capacity(scored.len());
    let mut tp = 0usize;
    for (k, i) in ranked(scored.iter().map(|s| s.confidence))
        .into_iter()
        .enumerate()
    {
        tp += scored[i].true_positive as usize;
        recall.push(tp as f64 / ground_truths as f64);
        precision.push(tp as f64 / (k + 1) as f64);
    }
    for k in (0..precision.len().saturating_sub(1)).rev() {
        precision[k] = precision[k].max(precision[k + 1]);
    }
    Some(match interp {
        Interpolation::AllPoints => {
            let mut area = 0.0;
            let mut prev = 0.0;
            for (r, p) in recall.iter().zip(&precision) {
                area += (r - prev) * p;
                prev = *r;
            }
            area
        }
        Interpolation::ElevenPoint => {
            (0..=10)
                .map(|t| {
                    let t = t as f64 / 10.0;
                    recall
                        .iter()
                        .position(|&r| r >= t - 1e-12)
                        .map_or(0.0, |k| precision[k])
                })
                .sum::<f64>()
                / 11.0
        }
    })
}

/// Unweighted mean over the defined APs.
pub fn mean_ap(aps: &[Option<f64>]) -> Result<f64> {
    let defined: Vec<f64> = aps.iter().flatten().copied().collect();
    if defined.is_empty() {
        return Err(Error::Evaluation(
            "no class has ground truth; mAP is undefined".into(),
        ));
    }
    if defined.len() < aps.len() {
        log::warn!("mAP averages {} of {} classes", defined.len(), aps.len());
    }
    Ok(defined.iter().sum::<f64>() / defined.len() as f64)
}

/// A percentage held as whole hundredths, rounded half up.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Percent(pub i64);

impl Percent {
    /// `100 * num / den` rounded half up to hundredths.
    pub fn from_ratio(num: i64, den: u64) -> Result<Self> {
        if den == 0 {
            return Err(Error::domain("percentage of an empty total"));
        }
        let den = den as i128;
        let scaled = 2 * 10_000 * num as i128 + den;
        Ok(Percent(scaled.div_euclid(2 * den) as i64))
    }

    pub fn from_fraction(f: f64) -> Self {
        Percent((f * 10_000.0 + 0.5).floor() as i64)
    }

    pub fn hundredths(self) -> i64 {
        self.0
    }

    pub fn value(self) -> f64 {
        self.0 as f64 / 100.0
    }
}

impl fmt::Display for Percent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let a = self.0.unsigned_abs();
        write!(f, "{sign}{}.{:02}%", a / 100, a % 100)
    }
}

impl Serialize for Percent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_f64(self.value())
    }
}

pub fn detection_rate(detected: usize, total: usize) -> Result<Percent> {
    if total == 0 {
        return Err(Error::domain(
            "detection rate needs at least one ground-truth object",
        ));
    }
    if detected > total {
        return Err(Error::domain(format!(
            "detected {detected} exceeds total {total}"
        )));
    }
    Percent::from_ratio(detected as i64, total as u64)
}

/// Unit-cost edit distance over characters.
pub fn levenshtein(reference: &str, hypothesis: &str) -> usize {
    let a: Vec<char> = reference.chars().collect();
    let b: Vec<char> = hypothesis.chars().collect();
    let mut row: Vec<usize> = (0..=b.len()).collect();
    for (i, ca) in a.iter().enumerate() {
        let mut diag = row[0];
        row[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let next = (diag + (ca != cb) as usize)
                .min(row[j] + 1)
                .min(row[j + 1] + 1);
            diag = row[j + 1];
            row[j + 1] = next;
        }
    }
    row[b.len()]
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CerMode {
    /// Total edits over total reference characters.
    #[default]
    Corpus,
    /// Mean of the per-pair rates.
    PerString,
}

/// Pooled edit statistics of (reference, hypothesis) pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CerStats {
    pub pairs: usize,
    pub edits: usize,
    pub reference_chars: usize,
    pub cer: f64,
    /// `1 - CER` as a percentage.
    pub correct: Percent,
}

pub fn cer_stats<S: AsRef<str>, T: AsRef<str>>(
    pairs: &[(S, T)],
    mode: CerMode,
) -> Result<CerStats> {
    if pairs.is_empty() {
        return Err(Error::domain("CER of no pairs is undefined"));
    }
    let mut edits = 0;
    let mut chars = 0;
    let mut rate_sum = 0.0;
    for (i, (r, h)) in pairs.iter().enumerate() {
        let (r, h) = (r.as_ref(), h.as_ref());
        let n = r.chars().count();
        if n == 0 {
            return Err(Error::domain(format!(
                "pair {i} has an empty reference (hypothesis {h:?})"
            )));
        }
        let e = levenshtein(r, h);
        edits += e;
        chars += n;
        rate_sum += e as f64 / n as f64;
    }
    let (cer, correct) = match mode {
        CerMode::Corpus => (
            edits as f64 / chars as f64,
            Percent::from_ratio(chars as i64 - edits as i64, chars as u64)?,
        ),
        CerMode::PerString => {
            let c = rate_sum / pairs.len() as f64;
            (c, Percent::from_fraction(1.0 - c))
        }
    };
    Ok(CerStats {
        pairs: pairs.len(),
        edits,
        reference_chars: chars,
        cer,
        correct,
    })
}

pub fn cer<S: AsRef<str>, T: AsRef<str>>(pairs: &[(S, T)], mode: CerMode) -> Result<f64> {
    cer_stats(pairs, mode).map(|s| s.cer)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalOptions {
    pub iou_threshold: f64,
    pub interpolation: Interpolation,
    pub cer_mode: CerMode,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            iou_threshold: DEFAULT_IOU_THRESHOLD,
            interpolation: Interpolation::AllPoints,
            cer_mode: CerMode::Corpus,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassScore {
    pub class: ClassLabel,
    pub ground_truths: usize,
    pub predictions: usize,
    pub true_positives: usize,
    pub ap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub options: EvalOptions,
    pub images: usize,
    pub per_class: Vec<ClassScore>,
    pub map: f64,
    pub total: usize,
    pub detected: usize,
    pub detection_rate: Percent,
    /// `None` when no matched prediction carried a transcript.
    pub recognition: Option<CerStats>,
    pub warnings: Vec<String>,
}

impl EvalReport {
    pub fn cer(&self) -> Option<f64> {
        self.recognition.map(|r| r.cer)
    }

    pub fn correct_recognition(&self) -> Option<Percent> {
        self.recognition.map(|r| r.correct)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    /// Plain-text table with one row for `model`, plus per-class AP.
    pub fn to_table(&self, model: &str) -> String {
        let na = || "n/a".to_string();
        let crr = self
            .correct_recognition()
            .map_or_else(na, |p| p.to_string());
        let head = [
            "Model",
            "No. of objects",
            "Detected",
            "Detection rate",
            "Correct text recognition",
        ];
        let row = [
            model.to_string(),
            self.total.to_string(),
            self.detected.to_string(),
            self.detection_rate.to_string(),
            crr,
        ];
        let widths: Vec<usize> = head
            .iter()
            .zip(&row)
            .map(|(h, r)| h.chars().count().max(r.chars().count()))
            .collect();
        let line = |cells: &[String]| {
            cells
                .iter()
                .zip(&widths)
                .map(|(c, w)| format!("{c:<w$}"))
                .collect::<Vec<_>>()
                .join("  ")
                .trim_end()
                .to_string()
        };
        let mut s = String::new();
        s.push_str(&line(&head.map(String::from)));
        s.push('\n');
        s.push_str(&line(&row));
        s.push_str("\n\nNote: Correct text recognition results from: 1-CER\n\n");
        for c in &self.per_class {
            let ap = c.ap.map_or_else(na, |v| format!("{v:.4}"));
            s.push_str(&format!(
                "AP@{} {:<30} {ap}\n",
                self.options.iou_threshold,
                c.class.name()
            ));
        }
        s.push_str(&format!(
            "mAP@{} {:.4}\n",
            self.options.iou_threshold, self.map
        ));
        let cer = self.cer().map_or_else(na, |v| format!("{v:.4}"));
        s.push_str(&format!("CER {cer}\n"));
        for w in &self.warnings {
            s.push_str(&format!("warning: {w}\n"));
        }
        s
    }
}

/// Scores `preds` against `gt`, matching per image and class.
pub fn evaluate(gt: &GroundTruth, preds: &PredictionSet, opts: &EvalOptions) -> Result<EvalReport> {
    let unknown = preds.unknown_images(gt);
    if !unknown.is_empty() {
        return Err(Error::Evaluation(format!(
            "predictions reference images missing from the ground truth: {}",
            unknown.join(", ")
        )));
    }
    let mut by_image: std::collections::HashMap<&str, Vec<usize>> =
        std::collections::HashMap::new();
    for (i, p) in preds.records.iter().enumerate() {
        by_image.entry(p.image.as_str()).or_default().push(i);
    }

    let mut tp = vec![false; preds.len()];
    let mut pairs: Vec<(&str, &str)> = Vec::new();
    let mut warnings = Vec::new();
    let mut detected = 0;
    for img in &gt.images {
        let mine = by_image
            .get(img.file_name.as_str())
            .map_or(&[][..], Vec::as_slice);
        for class in ClassLabel::ALL {
            let gi: Vec<usize> = (0..img.objects.len())
                .filter(|&g| img.objects[g].class == class)
                .collect();
            let pi: Vec<usize> = mine
                .iter()
                .copied()
                .filter(|&p| preds.records[p].class == class)
                .collect();
            let gts: Vec<BBox> = gi.iter().map(|&g| img.objects[g].bbox).collect();
            let ps: Vec<(BBox, f64)> = pi
                .iter()
                .map(|&p| (preds.records[p].bbox, preds.records[p].confidence))
                .collect();
            let m = match_detections(&ps, &gts, opts.iou_threshold);
            for (k, g) in m.prediction.iter().enumerate() {
                let Some(g) = g else { continue };
                let p = &preds.records[pi[k]];
                tp[pi[k]] = true;
                detected += 1;
                let reference = img.objects[gi[*g]].transcript.as_str();
                if let Some(h) = &p.transcript {
                    if reference.is_empty() {
                        warnings.push(format!(
                            "{}: ground truth without transcript skipped for CER",
                            img.file_name
                        ));
                    } else {
                        pairs.push((reference, h.as_str()));
                    }
                }
            }
        }
    }

    let mut per_class = Vec::new();
    for class in ClassLabel::ALL {
        let ground_truths = gt
            .images
            .iter()
            .flat_map(|g| &g.objects)
            .filter(|o| o.class == class)
            .count();
        let scored: Vec<Scored> = preds
            .records
            .iter()
            .zip(&tp)
            .filter(|(p, _)| p.class == class)
            .map(|(p, &t)| Scored {
                confidence: p.confidence,
                true_positive: t,
            })
            .collect();
        let ap = average_precision(&scored, ground_truths, opts.interpolation);
        if ap.is_none() {
            warnings.push(format!(
                "class \"{}\" has no ground truth; excluded from mAP",
                class.name()
            ));
        }
        per_class.push(ClassScore {
            class,
            ground_truths,
            predictions: scored.len(),
            true_positives: scored.iter().filter(|s| s.true_positive).count(),
            ap,
        });
    }
    let map = mean_ap(&per_class.iter().map(|c| c.ap).collect::<Vec<_>>())?;
    let total = gt.object_count();
    let recognition = if pairs.is_empty() {
        None
    } else {
        Some(cer_stats(&pairs, opts.cer_mode)?)
    };
    Ok(EvalReport {
        options: *opts,
        images: gt.images.len(),
        per_class,
        map,
        total,
        detected,
        detection_rate: detection_rate(detected, total)?,
        recognition,
        warnings,
    })
}
