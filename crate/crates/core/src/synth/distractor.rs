//! Unlabeled background elements for clutter images.
//!
//! Every kind is a parametric routine producing primitives only. A directory
//! of raster crops can stand in for or supplement the procedural library.

use std::f64::consts::{FRAC_PI_4, PI};
use std::fmt;
use std::path::Path;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::part::dash_dot;
use crate::alphabet::{ALPHABET, FIT_LETTERS};
use crate::error::{Error, Result};
use crate::geom::{Point, Rect};
use crate::scene::{Orientation, Primitive};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistractorKind {
    Bearing,
    Hatching,
    Thread,
    Drilling,
    TextBox,
    SectionLines,
}

impl DistractorKind {
    pub const ALL: [DistractorKind; 6] = [
        DistractorKind::Bearing,
        DistractorKind::Hatching,
        DistractorKind::Thread,
        DistractorKind::Drilling,
        DistractorKind::TextBox,
        DistractorKind::SectionLines,
    ];

    fn salt(self) -> u64 {
        0x5851_F42D_4C95_7F2D_u64.wrapping_mul(self as u64 + 1)
    }
}

impl fmt::Display for DistractorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Number of parameterizations per kind in [`distractor_library`].
pub const VARIANTS_PER_KIND: u64 = 26;

pub const SCALE_RANGE: (f64, f64) = (0.5, 2.0);

/// One entry of the procedural library.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DistractorEntry {
    pub kind: DistractorKind,
    pub variant: u64,
}

/// The enumerable procedural library: 6 kinds × 26 variants.
pub fn distractor_library() -> Vec<DistractorEntry> {
    DistractorKind::ALL
        .iter()
        .flat_map(|&kind| {
            (0..VARIANTS_PER_KIND).map(move |variant| DistractorEntry { kind, variant })
        })
        .collect()
}

/// Primitives for one element, translated so its extent starts at the origin.
pub fn make_distractor(kind: DistractorKind, seed: u64, scale: f64) -> Result<Vec<Primitive>> {
    if !(SCALE_RANGE.0..=SCALE_RANGE.1).contains(&scale) {
        return Err(Error::domain(format!(
            "distractor scale {scale} outside [{}, {}]",
            SCALE_RANGE.0, SCALE_RANGE.1
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ kind.salt());
    let mut prims = match kind {
        DistractorKind::Bearing => bearing(&mut rng, scale),
        DistractorKind::Hatching => hatching(&mut rng, scale),
        DistractorKind::Thread => thread(&mut rng, scale),
        DistractorKind::Drilling => drilling(&mut rng, scale),
        DistractorKind::TextBox => text_box(&mut rng, scale),
        DistractorKind::SectionLines => section_lines(&mut rng, scale),
    };
    let ext = extent(&prims);
    prims.iter_mut().for_each(|p| p.translate(-ext.x0, -ext.y0));
    Ok(prims)
}

pub fn extent(prims: &[Primitive]) -> Rect {
    prims.iter().fold(Rect::EMPTY, |r, p| r.union(&p.extent()))
}

fn circle(center: Point, radius: f64, width: f64) -> Primitive {
    Primitive::Circle {
        center,
        radius,
        width,
    }
}

fn rect_lines(x0: f64, y0: f64, x1: f64, y1: f64, width: f64) -> Vec<Primitive> {
    let p = Point::new;
    vec![
        Primitive::line(p(x0, y0), p(x1, y0), width),
        Primitive::line(p(x1, y0), p(x1, y1), width),
        Primitive::line(p(x1, y1), p(x0, y1), width),
        Primitive::line(p(x0, y1), p(x0, y0), width),
    ]
}

fn bearing(rng: &mut ChaCha8Rng, s: f64) -> Vec<Primitive> {
    let c = Point::new(0.0, 0.0);
    let outer = rng.random_range(35.0..=80.0) * s;
    let inner = outer * rng.random_range(0.45..=0.6);
    let mut out = Vec::new();
    if rng.random_bool(0.6) {
        // front view: rings, races and a ball set
        let ring = outer - inner;
        out.push(circle(c, outer, 1.8));
        out.push(circle(c, inner, 1.8));
        out.push(circle(c, outer - 0.2 * ring, 1.0));
        out.push(circle(c, inner + 0.2 * ring, 1.0));
        let balls: usize = rng.random_range(7..=12);
        let mid = (outer + inner) / 2.0;
        let br = (ring * 0.3).min(PI * mid / balls as f64 * 0.8);
        let phase = rng.random_range(0.0..PI);
        for i in 0..balls {
            let a = phase + 2.0 * PI * i as f64 / balls as f64;
            out.push(circle(Point::new(mid * a.cos(), mid * a.sin()), br, 1.2));
        }
        out.extend(dash_dot(
            Point::new(-outer - 8.0, 0.0),
            Point::new(outer + 8.0, 0.0),
        ));
        out.extend(dash_dot(
            Point::new(0.0, -outer - 8.0),
            Point::new(0.0, outer + 8.0),
        ));
    } else {
        // simplified section: two boxes with crossed diagonals
        let w = (outer - inner) * rng.random_range(0.8..=1.4);
        for (y0, y1) in [(-outer, -inner), (inner, outer)] {
            out.extend(rect_lines(0.0, y0, w, y1, 1.8));
            out.push(Primitive::line(Point::new(0.0, y0), Point::new(w, y1), 1.0));
            out.push(Primitive::line(Point::new(w, y0), Point::new(0.0, y1), 1.0));
        }
        out.extend(dash_dot(Point::new(-10.0, 0.0), Point::new(w + 10.0, 0.0)));
    }
    out
}

fn hatching(rng: &mut ChaCha8Rng, s: f64) -> Vec<Primitive> {
    let w = rng.random_range(60.0..=200.0) * s;
    let h = rng.random_range(40.0..=160.0) * s;
    let polygon = if rng.random_bool(0.5) {
        vec![
            Point::new(0.0, 0.0),
            Point::new(w, 0.0),
            Point::new(w, h),
            Point::new(0.0, h),
        ]
    } else {
        // convex polygon around an ellipse
        let n: usize = rng.random_range(5..=7);
        let phase = rng.random_range(0.0..PI);
        (0..n)
            .map(|i| {
                let a = phase + 2.0 * PI * i as f64 / n as f64;
                Point::new(w / 2.0 * (1.0 + a.cos()), h / 2.0 * (1.0 + a.sin()))
            })
            .collect()
    };
    vec![Primitive::Hatch {
        polygon,
        angle: FRAC_PI_4,
        spacing: rng.random_range(5.0..=10.0),
        width: 1.0,
    }]
}

fn thread(rng: &mut ChaCha8Rng, s: f64) -> Vec<Primitive> {
    let len = rng.random_range(80.0..=220.0) * s;
    let dia = rng.random_range(24.0..=70.0) * s;
    let minor = dia * 0.12;
    let vertical = rng.random_bool(0.5);
    let p = |u: f64, v: f64| {
        if vertical {
            Point::new(v, u)
        } else {
            Point::new(u, v)
        }
    };
    let mut out = Vec::new();
    if rng.random_bool(0.7) {
        // side view: major lines, thin minor lines, thread end
        out.push(Primitive::line(p(0.0, 0.0), p(len, 0.0), 1.8));
        out.push(Primitive::line(p(0.0, dia), p(len, dia), 1.8));
        let run = len * rng.random_range(0.5..=0.9);
        out.push(Primitive::line(p(0.0, minor), p(run, minor), 0.8));
        out.push(Primitive::line(
            p(0.0, dia - minor),
            p(run, dia - minor),
            0.8,
        ));
        out.push(Primitive::line(p(run, 0.0), p(run, dia), 1.8));
        out.push(Primitive::line(p(0.0, 0.0), p(0.0, dia), 1.8));
        out.extend(dash_dot(p(-8.0, dia / 2.0), p(len + 8.0, dia / 2.0)));
    } else {
        // end view: full minor circle, three-quarter major arc
        let c = Point::new(0.0, 0.0);
        out.push(circle(c, dia / 2.0 - minor, 1.8));
        let start = rng.random_range(0.0..2.0 * PI);
        out.push(Primitive::Arc {
            center: c,
            radius: dia / 2.0,
            start,
            end: start + 1.5 * PI,
            width: 0.8,
        });
    }
    out
}

fn drilling(rng: &mut ChaCha8Rng, s: f64) -> Vec<Primitive> {
    let r = rng.random_range(6.0..=30.0) * s;
    let c = Point::new(0.0, 0.0);
    let mut out = Vec::new();
    if rng.random_bool(0.6) {
        out.push(circle(c, r, 1.6));
        if rng.random_bool(0.4) {
            out.push(circle(c, r * rng.random_range(1.4..=1.9), 1.6));
        }
        out.extend(dash_dot(
            Point::new(-r - 8.0, 0.0),
            Point::new(r + 8.0, 0.0),
        ));
        out.extend(dash_dot(
            Point::new(0.0, -r - 8.0),
            Point::new(0.0, r + 8.0),
        ));
    } else {
        // blind hole in section with a 118° drill point
        let depth = r * rng.random_range(2.0..=5.0);
        let tip = r / (59.0f64.to_radians()).tan();
        let p = Point::new;
        out.push(Primitive::line(p(-r, 0.0), p(-r, depth), 1.4));
        out.push(Primitive::line(p(r, 0.0), p(r, depth), 1.4));
        out.push(Primitive::line(p(-r, depth), p(0.0, depth + tip), 1.4));
        out.push(Primitive::line(p(r, depth), p(0.0, depth + tip), 1.4));
        out.extend(dash_dot(p(0.0, -8.0), p(0.0, depth + tip + 8.0)));
    }
    out
}

fn random_word(rng: &mut ChaCha8Rng, lo: usize, hi: usize) -> String {
    let n = rng.random_range(lo..=hi);
    (0..n).map(|_| *ALPHABET.choose(rng).unwrap()).collect()
}

fn text_box(rng: &mut ChaCha8Rng, s: f64) -> Vec<Primitive> {
    let rows: usize = rng.random_range(2..=4);
    let cols: usize = rng.random_range(2..=3);
    let glyph_h = (rng.random_range(9.0..=13.0) * s).max(crate::raster::font::MIN_GLYPH_HEIGHT);
    let pad = glyph_h * 0.5;
    let words: Vec<String> = (0..rows * cols).map(|_| random_word(rng, 2, 6)).collect();
    let col_w: Vec<f64> = (0..cols)
        .map(|c| {
            (0..rows)
                .map(|r| {
                    crate::raster::font::text_advance(&words[r * cols + c], glyph_h).unwrap_or(0.0)
                })
                .fold(0.0, f64::max)
                + 2.0 * pad
        })
        .collect();
    let row_h = glyph_h + 2.0 * pad;
    let total_w: f64 = col_w.iter().sum();
    let total_h = row_h * rows as f64;
    let mut out = rect_lines(0.0, 0.0, total_w, total_h, 1.8);
    for r in 1..rows {
        let y = row_h * r as f64;
        out.push(Primitive::line(
            Point::new(0.0, y),
            Point::new(total_w, y),
            0.9,
        ));
    }
    let mut x = 0.0;
    for (c, w) in col_w.iter().enumerate() {
        if c > 0 {
            out.push(Primitive::line(
                Point::new(x, 0.0),
                Point::new(x, total_h),
                0.9,
            ));
        }
        for r in 0..rows {
            out.push(Primitive::Text {
                text: words[r * cols + c].clone(),
                anchor: Point::new(x + pad, row_h * r as f64 + pad),
                orientation: Orientation::Horizontal,
                height: glyph_h,
                width: 1.2,
            });
        }
        x += w;
    }
    out
}

fn section_lines(rng: &mut ChaCha8Rng, s: f64) -> Vec<Primitive> {
    let len = rng.random_range(120.0..=300.0) * s;
    let vertical = rng.random_bool(0.5);
    let p = |u: f64, v: f64| {
        if vertical {
            Point::new(v, u)
        } else {
            Point::new(u, v)
        }
    };
    let mut out = dash_dot(p(0.0, 0.0), p(len, 0.0));
    let stub = 14.0;
    out.push(Primitive::line(p(0.0, 0.0), p(stub, 0.0), 2.4));
    out.push(Primitive::line(p(len - stub, 0.0), p(len, 0.0), 2.4));
    let side = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    let letter = FIT_LETTERS.choose(rng).unwrap().to_string();
    let glyph_h = 14.0;
    for u in [stub / 2.0, len - stub / 2.0] {
        let from = p(u, 0.0);
        let to = p(u, side * 24.0);
        out.push(Primitive::line(from, to, 1.0));
        out.push(Primitive::Arrow {
            tip: to,
            direction: (to.y - from.y).atan2(to.x - from.x),
            length: 8.0,
        });
        let t = p(u + 6.0, side * 12.0 - glyph_h / 2.0);
        out.push(Primitive::Text {
            text: letter.clone(),
            anchor: t,
            orientation: Orientation::Horizontal,
            height: glyph_h,
            width: 1.4,
        });
    }
    out
}

/// A user-supplied grayscale crop used as a background element at its
/// native pixel size.
#[derive(Debug, Clone, PartialEq)]
pub struct RasterCrop {
    pub name: String,
    pub width: u32,
    pub height: u32,
    pub pixels: Vec<u8>,
}

impl RasterCrop {
    pub fn primitive(&self, origin: Point) -> Primitive {
        Primitive::Bitmap {
            origin,
            width: self.width,
            height: self.height,
            pixels: self.pixels.clone(),
        }
    }
}

/// Loads every decodable image in `dir` (non-recursive), sorted by file name.
pub fn load_crop_dir(dir: &Path) -> Result<Vec<RasterCrop>> {
    let mut names: Vec<_> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.is_file())
        .collect();
    names.sort();
    let mut out = Vec::new();
    for path in names {
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase)
            .unwrap_or_default();
        if !matches!(ext.as_str(), "png" | "bmp" | "jpg" | "jpeg") {
            continue;
        }
        let img = image::open(&path)
            .map_err(|source| Error::Image {
                path: path.clone(),
                source,
            })?
            .into_luma8();
        out.push(RasterCrop {
            name: path.file_name().unwrap().to_string_lossy().into_owned(),
            width: img.width(),
            height: img.height(),
            pixels: img.into_raw(),
        });
    }
    Ok(out)
}
