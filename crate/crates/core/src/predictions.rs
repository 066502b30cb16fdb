//! Detector output exchanged with external models.
//!
//! ```text
//! # techdraw-predictions v1
//! <image>\t<class_id>\t<x>\t<y>\t<w>\t<h>\t<confidence>[\t<transcript>]
//! ```
//!
//! `image` is the file name as listed in the ground truth. Lines that are
//! empty or start with `#` after the header are ignored. A file with no
//! content at all is an empty prediction set.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::GroundTruth;
use crate::error::{Error, Result};
use crate::geom::BBox;
use crate::scene::ClassLabel;

pub const PREDICTIONS_HEADER: &str = "# techdraw-predictions v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub image: String,
    pub class: ClassLabel,
    pub bbox: BBox,
    pub confidence: f64,
    pub transcript: Option<String>,
}

/// Predictions in input order; the order breaks confidence ties.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PredictionSet {
    pub records: Vec<Prediction>,
}

impl PredictionSet {
    pub fn new(records: Vec<Prediction>) -> Result<Self> {
        for (i, p) in records.iter().enumerate() {
            check(p).map_err(|m| Error::Validation(format!("prediction {}: {m}", i + 1)))?;
        }
        Ok(PredictionSet { records })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Image names that the ground truth does not contain, sorted.
    pub fn unknown_images(&self, gt: &GroundTruth) -> Vec<String> {
        let known: BTreeSet<&str> = gt.images.iter().map(|g| g.file_name.as_str()).collect();
        let unknown: BTreeSet<&str> = self
            .records
            .iter()
            .map(|p| p.image.as_str())
            .filter(|n| !known.contains(n))
            .collect();
        unknown.into_iter().map(String::from).collect()
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{PREDICTIONS_HEADER}\n");
        for p in &self.records {
            let b = &p.bbox;
            s.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\t{}\t{}",
                p.image,
                p.class.id(),
                b.x,
                b.y,
                b.w,
                b.h,
                p.confidence
            ));
            if let Some(t) = &p.transcript {
                s.push('\t');
                s.push_str(t);
            }
            s.push('\n');
        }
        s
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let parse_err = |line: usize, message: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        match lines.by_ref().find(|(_, l)| !l.trim().is_empty()) {
            None => return Ok(PredictionSet::default()),
            Some((_, l)) if l.trim_end() == PREDICTIONS_HEADER => {}
            Some((i, l)) => {
                return Err(parse_err(
                    i + 1,
                    format!("expected header `{PREDICTIONS_HEADER}`, found `{l}`"),
                ))
            }
        }
        let mut records = Vec::new();
        for (i, line) in lines {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            match parse_line(line) {
                Ok(p) => records.push(p),
                Err(LineError::Syntax(m)) => return Err(parse_err(i + 1, m)),
                Err(LineError::Invalid(m)) => {
                    return Err(Error::Validation(format!(
                        "{}:{}: {m}",
                        path.display(),
                        i + 1
                    )))
                }
            }
        }
        Ok(PredictionSet { records })
    }
}

enum LineError {
    Syntax(String),
    Invalid(String),
}

fn parse_line(line: &str) -> std::result::Result<Prediction, LineError> {
    use LineError::{Invalid, Syntax};
    let f: Vec<&str> = line.split('\t').collect();
    if !(7..=8).contains(&f.len()) {
        return Err(Syntax(format!(
            "expected 7 or 8 tab-separated fields, found {}",
            f.len()
        )));
    }
    if f[0].is_empty() {
        return Err(Syntax("image name is empty".into()));
    }
    let num = |k: usize, what: &str| {
        f[k].trim()
            .parse::<f64>()
            .map_err(|_| Syntax(format!("{what} `{}` is not a number", f[k])))
    };
    let id: i64 = f[1]
        .trim()
        .parse()
        .map_err(|_| Syntax(format!("class id `{}` is not an integer", f[1])))?;
    let class = u32::try_from(id)
        .ok()
        .and_then(ClassLabel::from_id)
        .ok_or_else(|| Invalid(format!("class id must be 1, 2 or 3, found {id}")))?;
    let p = Prediction {
        image: f[0].to_string(),
        class,
        bbox: BBox {
            x: num(2, "x")?,
            y: num(3, "y")?,
            w: num(4, "w")?,
            h: num(5, "h")?,
        },
        confidence: num(6, "confidence")?,
        transcript: f.get(7).filter(|t| !t.is_empty()).map(|t| t.to_string()),
    };
    check(&p).map_err(Invalid)?;
    Ok(p)
}

fn check(p: &Prediction) -> std::result::Result<(), String> {
    let b = &p.bbox;
    if !(b.x.is_finite() && b.y.is_finite() && b.w.is_finite() && b.h.is_finite())
        || b.w <= 0.0
        || b.h <= 0.0
    {
        return Err(format!(
            "box [{}, {}, {}, {}] needs finite values and w, h > 0",
            b.x, b.y, b.w, b.h
        ));
    }
    if !(0.0..=1.0).contains(&p.confidence) {
        return Err(format!("confidence {} is outside [0, 1]", p.confidence));
    }
    Ok(())
}

pub fn read_predictions(path: &Path) -> Result<PredictionSet> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    PredictionSet::parse(&text, path)
}

pub fn write_predictions(set: &PredictionSet, path: &Path) -> Result<()> {
    fs::write(path, set.to_text()).map_err(|e| Error::io(path, e))
}
