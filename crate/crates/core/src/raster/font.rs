//! Single-stroke technical lettering for the drawing alphabet.
//!
//! Glyphs are polylines in em units: cap height is 1.0, `v` grows downward
//! from the cap line to the baseline at `v = 1`. Vertical text is the exact
//! quarter-turn `(x, y) -> (y, -x)` of horizontal text, so it reads bottom to
//! top with the baseline on the right.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::alphabet;
use crate::error::{Error, Result};
use crate::geom::{Point, Rect};
use crate::scene::Orientation;

/// Gap between consecutive glyphs, in em units.
pub const GLYPH_SPACING: f64 = 0.18;

/// Smallest glyph height the font is legible at.
pub const MIN_GLYPH_HEIGHT: f64 = 8.0;

/// A polyline; consecutive points are joined by straight strokes.
pub type Stroke = Vec<Point>;

#[derive(Debug, Clone)]
struct GlyphDef {
    width: f64,
    strokes: Vec<Stroke>,
}

fn p(x: f64, y: f64) -> Point {
    Point::new(x, y)
}

/// Elliptical arc from `a0` to `a1` (radians, counter-clockwise as seen on
/// screen, so `y = cy - ry * sin`).
fn arc(cx: f64, cy: f64, rx: f64, ry: f64, a0: f64, a1: f64) -> Stroke {
    let n = ((a1 - a0).abs() / (PI / 16.0)).ceil().max(2.0) as usize;
    (0..=n)
        .map(|i| {
            let a = a0 + (a1 - a0) * i as f64 / n as f64;
            p(cx + rx * a.cos(), cy - ry * a.sin())
        })
        .collect()
}

fn deg(d: f64) -> f64 {
    d * PI / 180.0
}

fn glyph_table() -> &'static HashMap<char, GlyphDef> {
    static TABLE: OnceLock<HashMap<char, GlyphDef>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = HashMap::new();
        let mut add = |c: char, width: f64, strokes: Vec<Stroke>| {
            t.insert(c, GlyphDef { width, strokes });
        };
        add('0', 0.6, vec![arc(0.3, 0.5, 0.3, 0.5, 0.0, 2.0 * PI)]);
        add(
            '1',
            0.6,
            vec![vec![p(0.12, 0.22), p(0.38, 0.0), p(0.38, 1.0)]],
        );
        {
            let mut s = arc(0.3, 0.28, 0.28, 0.28, deg(160.0), deg(-35.0));
            s.extend([p(0.0, 1.0), p(0.6, 1.0)]);
            add('2', 0.6, vec![s]);
        }
        {
            let mut s = arc(0.3, 0.25, 0.26, 0.25, deg(150.0), deg(-90.0));
            s.extend(
                arc(0.3, 0.73, 0.3, 0.27, deg(90.0), deg(-150.0))
                    .into_iter()
                    .skip(1),
            );
            add('3', 0.6, vec![s]);
        }
        add(
            '4',
            0.6,
            vec![vec![p(0.45, 1.0), p(0.45, 0.0), p(0.0, 0.7), p(0.6, 0.7)]],
        );
        {
            let mut s = vec![p(0.55, 0.0), p(0.08, 0.0), p(0.04, 0.46)];
            s.extend(
                arc(0.3, 0.68, 0.3, 0.32, deg(135.0), deg(-145.0))
                    .into_iter()
                    .skip(1),
            );
            add('5', 0.6, vec![s]);
        }
        add(
            '6',
            0.6,
            vec![
                vec![p(0.5, 0.0), p(0.06, 0.58)],
                arc(0.3, 0.7, 0.3, 0.3, 0.0, 2.0 * PI),
            ],
        );
        add('7', 0.6, vec![vec![p(0.0, 0.0), p(0.6, 0.0), p(0.18, 1.0)]]);
        add(
            '8',
            0.6,
            vec![
                arc(0.3, 0.24, 0.25, 0.24, 0.0, 2.0 * PI),
                arc(0.3, 0.74, 0.3, 0.26, 0.0, 2.0 * PI),
            ],
        );
        add(
            '9',
            0.6,
            vec![
                arc(0.3, 0.3, 0.3, 0.3, 0.0, 2.0 * PI),
                vec![p(0.6, 0.3), p(0.14, 1.0)],
            ],
        );
        add('.', 0.2, vec![vec![p(0.1, 0.94), p(0.1, 1.0)]]);
        add(
            ',',
            0.2,
            vec![vec![p(0.12, 0.92), p(0.12, 1.0), p(0.03, 1.18)]],
        );
        add(
            'F',
            0.52,
            vec![
                vec![p(0.52, 0.0), p(0.0, 0.0), p(0.0, 1.0)],
                vec![p(0.0, 0.48), p(0.4, 0.48)],
            ],
        );
        {
            let mut s = arc(0.3, 0.5, 0.3, 0.5, deg(40.0), deg(340.0));
            s.extend([p(0.6, 0.56), p(0.34, 0.56)]);
            add('G', 0.6, vec![s]);
        }
        add(
            'H',
            0.6,
            vec![
                vec![p(0.0, 0.0), p(0.0, 1.0)],
                vec![p(0.6, 0.0), p(0.6, 1.0)],
                vec![p(0.0, 0.5), p(0.6, 0.5)],
            ],
        );
        add(
            'K',
            0.6,
            vec![
                vec![p(0.0, 0.0), p(0.0, 1.0)],
                vec![p(0.6, 0.0), p(0.0, 0.62)],
                vec![p(0.2, 0.44), p(0.6, 1.0)],
            ],
        );
        add(
            'M',
            0.7,
            vec![vec![
                p(0.0, 1.0),
                p(0.0, 0.0),
                p(0.35, 0.62),
                p(0.7, 0.0),
                p(0.7, 1.0),
            ]],
        );
        add(
            '+',
            0.6,
            vec![
                vec![p(0.3, 0.22), p(0.3, 0.78)],
                vec![p(0.02, 0.5), p(0.58, 0.5)],
            ],
        );
        add('-', 0.5, vec![vec![p(0.05, 0.5), p(0.45, 0.5)]]);
        add(
            '∓',
            0.6,
            vec![
                vec![p(0.04, 0.18), p(0.56, 0.18)],
                vec![p(0.04, 0.64), p(0.56, 0.64)],
                vec![p(0.3, 0.38), p(0.3, 0.9)],
            ],
        );
        add(
            '±',
            0.6,
            vec![
                vec![p(0.3, 0.1), p(0.3, 0.62)],
                vec![p(0.04, 0.36), p(0.56, 0.36)],
                vec![p(0.04, 0.84), p(0.56, 0.84)],
            ],
        );
        add(
            '∅',
            0.7,
            vec![
                arc(0.35, 0.5, 0.32, 0.32, 0.0, 2.0 * PI),
                vec![p(0.02, 1.0), p(0.68, 0.0)],
            ],
        );
        t
    })
}

fn glyph(c: char) -> Result<&'static GlyphDef> {
    glyph_table()
        .get(&c)
        .ok_or_else(|| Error::domain(format!("no stroke glyph for {c:?}")))
}

/// True for every glyph the font can draw: the alphabet plus `±`.
pub fn has_glyph(c: char) -> bool {
    glyph_table().contains_key(&c)
}

/// Quarter-turn used for vertical text.
pub fn rotate_quarter(q: Point) -> Point {
    Point::new(q.y, -q.x)
}

/// General rotation by `angle` radians in the same handedness as
/// [`rotate_quarter`] (which equals `rotate(q, -PI / 2)`).
pub fn rotate(q: Point, angle: f64) -> Point {
    let (s, c) = angle.sin_cos();
    Point::new(q.x * c - q.y * s, q.x * s + q.y * c)
}

fn orient(q: Point, orientation: Orientation) -> Point {
    match orientation {
        Orientation::Horizontal => q,
        Orientation::Vertical => rotate_quarter(q),
    }
}

/// Strokes of one alphabet glyph scaled to `height` pixels, relative to the
/// glyph origin (cap-line left corner before rotation).
pub fn rasterize_glyph(code: char, height: f64, orientation: Orientation) -> Result<Vec<Stroke>> {
    if !alphabet::contains(code) {
        return Err(Error::domain(format!("{code:?} is not in the alphabet")));
    }
    if height.is_nan() || height < MIN_GLYPH_HEIGHT {
        return Err(Error::domain(format!(
            "glyph height {height} below minimum {MIN_GLYPH_HEIGHT}"
        )));
    }
    let g = glyph(code)?;
    Ok(g.strokes
        .iter()
        .map(|s| {
            s.iter()
                .map(|q| orient(Point::new(q.x * height, q.y * height), orientation))
                .collect()
        })
        .collect())
}

/// Length of `text` along its reading direction.
pub fn text_advance(text: &str, height: f64) -> Result<f64> {
    let mut len = 0.0;
    for (i, c) in text.chars().enumerate() {
        if i > 0 {
            len += GLYPH_SPACING;
        }
        len += glyph(c)?.width;
    }
    Ok(len * height)
}

/// Strokes of a full text run in scene coordinates. `anchor` is the cap-line
/// start of the first glyph; for vertical text that corner ends up at the
/// bottom-left of the run.
pub fn layout_text(
    text: &str,
    height: f64,
    orientation: Orientation,
    anchor: Point,
) -> Result<Vec<Stroke>> {
    let mut out = Vec::new();
    let mut pen = 0.0;
    for c in text.chars() {
        let g = glyph(c)?;
        for s in &g.strokes {
            out.push(
                s.iter()
                    .map(|q| {
                        let r = orient(Point::new((pen + q.x) * height, q.y * height), orientation);
                        Point::new(anchor.x + r.x, anchor.y + r.y)
                    })
                    .collect(),
            );
        }
        pen += g.width + GLYPH_SPACING;
    }
    Ok(out)
}

/// Outer edge of the ink of a text run drawn with stroke width `stroke`.
pub fn text_ink_rect(
    text: &str,
    height: f64,
    stroke: f64,
    orientation: Orientation,
    anchor: Point,
) -> Result<Rect> {
    let mut r = Rect::EMPTY;
    for s in layout_text(text, height, orientation, anchor)? {
        for q in s {
            r.include(q);
        }
    }
    Ok(r.inflate(stroke / 2.0))
}
