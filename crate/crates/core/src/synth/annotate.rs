//! Dimension and feature-control-frame annotations.

use rand::Rng;

use super::part::FeatureAnchor;
use crate::alphabet::{self, FIT_LETTERS};
use crate::error::{Error, Result};
use crate::geom::{Point, Rect};
use crate::raster::font;
use crate::scene::{ClassLabel, LabeledObject, Orientation, Primitive};

pub const MAX_DIMENSION_LENGTH: f64 = 300.0;
pub const ARROW_LENGTH: f64 = 8.0;

/// Gap between ink and the labeled box on every side.
pub const BOX_PAD: f64 = 1.0;

const LINE_WIDTH: f64 = 1.0;

fn text_rect(text: &str, height: f64, stroke: f64, o: Orientation, anchor: Point) -> Result<Rect> {
    font::text_ink_rect(text, height, stroke, o, anchor)
}

fn labeled(
    class: ClassLabel,
    ink: Rect,
    transcript: String,
    orientation: Orientation,
) -> Result<LabeledObject> {
    let bbox = ink
        .inflate(BOX_PAD)
        .to_bbox()
        .ok_or_else(|| Error::domain("annotation has no ink"))?;
    Ok(LabeledObject {
        class,
        bbox,
        transcript,
        orientation,
    })
}

fn side_of(component: f64, rng: &mut impl Rng) -> f64 {
    if component > 0.0 {
        1.0
    } else if component < 0.0 {
        -1.0
    } else if rng.random_bool(0.5) {
        1.0
    } else {
        -1.0
    }
}

/// Builds a dimension of `length` pixels measured from `anchor`.
///
/// Extension lines leave the feature along the anchor normal's component
/// perpendicular to the measured direction; the text sits above (horizontal)
/// or left of (vertical) the dimension line and is the only labeled ink.
pub fn make_dimension(
    anchor: &FeatureAnchor,
    orientation: Orientation,
    length: f64,
    text: &str,
    rng: &mut impl Rng,
) -> Result<(Vec<Primitive>, LabeledObject)> {
    if !(0.0..=MAX_DIMENSION_LENGTH).contains(&length) {
        return Err(Error::domain(format!(
            "dimension length {length} outside [0, {MAX_DIMENSION_LENGTH}]"
        )));
    }
    alphabet::check_text(text)?;

    let glyph_h = rng.random_range(18.0..=24.0);
    let stroke = rng.random_range(1.6..=2.2);
    let offset = rng.random_range(25.0..=60.0);
    let forward = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    let advance = font::text_advance(text, glyph_h)?;
    let gap = 3.0 + stroke / 2.0;

    // Work in a frame where the dimension is horizontal: `along` is the
    // measured axis, `across` points away from the feature.
    let (along, across, a0) = match orientation {
        Orientation::Horizontal => (
            Point::new(forward, 0.0),
            Point::new(0.0, side_of(anchor.normal.y, rng)),
            anchor.at,
        ),
        Orientation::Vertical => (
            Point::new(0.0, -forward),
            Point::new(side_of(anchor.normal.x, rng), 0.0),
            anchor.at,
        ),
    };
    let at = |s: f64, t: f64| {
        Point::new(
            a0.x + along.x * s + across.x * t,
            a0.y + along.y * s + across.y * t,
        )
    };

    let mut prims = Vec::new();
    for s in [0.0, length] {
        prims.push(Primitive::line(at(s, 2.0), at(s, offset + 3.0), LINE_WIDTH));
    }
    let dir = |from: Point, to: Point| (to.y - from.y).atan2(to.x - from.x);
    if length >= 2.0 * ARROW_LENGTH + 4.0 {
        prims.push(Primitive::line(
            at(0.0, offset),
            at(length, offset),
            LINE_WIDTH,
        ));
        prims.push(Primitive::Arrow {
            tip: at(0.0, offset),
            direction: dir(at(1.0, offset), at(0.0, offset)),
            length: ARROW_LENGTH,
        });
        prims.push(Primitive::Arrow {
            tip: at(length, offset),
            direction: dir(at(length - 1.0, offset), at(length, offset)),
            length: ARROW_LENGTH,
        });
    } else {
        // short dimension: arrows outside pointing in
        let tail = ARROW_LENGTH + 6.0;
        prims.push(Primitive::line(
            at(-tail, offset),
            at(length + tail, offset),
            LINE_WIDTH,
        ));
        prims.push(Primitive::Arrow {
            tip: at(0.0, offset),
            direction: dir(at(-1.0, offset), at(0.0, offset)),
            length: ARROW_LENGTH,
        });
        prims.push(Primitive::Arrow {
            tip: at(length, offset),
            direction: dir(at(length + 1.0, offset), at(length, offset)),
            length: ARROW_LENGTH,
        });
    }

    let line_at = at(length / 2.0, offset);
    let text_anchor = match orientation {
        // cap line above the dimension line, centered on it
        Orientation::Horizontal => Point::new(line_at.x - advance / 2.0, line_at.y - gap - glyph_h),
        // baseline faces the line on its right; run reads upward
        Orientation::Vertical => Point::new(line_at.x - gap - glyph_h, line_at.y + advance / 2.0),
    };
    let ink = text_rect(text, glyph_h, stroke, orientation, text_anchor)?;
    prims.push(Primitive::Text {
        text: text.to_string(),
        anchor: text_anchor,
        orientation,
        height: glyph_h,
        width: stroke,
    });
    let obj = labeled(
        ClassLabel::dimension(orientation),
        ink,
        text.to_string(),
        orientation,
    )?;
    Ok((prims, obj))
}

/// Builds a three-cell feature control frame (type | value | datum) whose
/// first corner is `anchor`: top-left for horizontal frames, bottom-left for
/// vertical ones.
pub fn make_tolerance_frame(
    anchor: Point,
    orientation: Orientation,
    symbol: char,
    value: &str,
    datum: char,
    rng: &mut impl Rng,
) -> Result<(Vec<Primitive>, LabeledObject)> {
    if !alphabet::contains(symbol) {
        return Err(Error::domain(format!(
            "type glyph {symbol:?} is not in the alphabet"
        )));
    }
    alphabet::check_text(value)?;
    if !FIT_LETTERS.contains(&datum) {
        return Err(Error::domain(format!(
            "datum {datum:?} must be one of {FIT_LETTERS:?}"
        )));
    }

    let glyph_h = rng.random_range(12.5..=15.5);
    let stroke = rng.random_range(1.4..=1.9);
    let margin = rng.random_range(4.0..=5.5);
    let frame_w = 1.4;
    let cell_h = glyph_h + 2.0 * margin;
    let square = cell_h * rng.random_range(1.05..=1.3);

    let cells: [(String, f64); 3] = [
        (symbol.to_string(), square),
        (
            value.to_string(),
            font::text_advance(value, glyph_h)? + 2.0 * margin + 2.0,
        ),
        (datum.to_string(), square),
    ];
    let total_w: f64 = cells.iter().map(|c| c.1).sum();

    // local frame: u along the frame, v down across it; mapped like text
    let map = |u: f64, v: f64| match orientation {
        Orientation::Horizontal => Point::new(anchor.x + u, anchor.y + v),
        Orientation::Vertical => {
            let r = font::rotate_quarter(Point::new(u, v));
            Point::new(anchor.x + r.x, anchor.y + r.y)
        }
    };

    let mut prims = vec![
        Primitive::line(map(0.0, 0.0), map(total_w, 0.0), frame_w),
        Primitive::line(map(total_w, 0.0), map(total_w, cell_h), frame_w),
        Primitive::line(map(total_w, cell_h), map(0.0, cell_h), frame_w),
        Primitive::line(map(0.0, cell_h), map(0.0, 0.0), frame_w),
    ];
    let mut ink = Rect::EMPTY;
    for q in [map(0.0, 0.0), map(total_w, cell_h)] {
        ink.include(q);
    }
    let mut ink = ink.inflate(frame_w / 2.0);

    let mut u = 0.0;
    for (i, (text, w)) in cells.iter().enumerate() {
        if i > 0 {
            prims.push(Primitive::line(map(u, 0.0), map(u, cell_h), frame_w));
        }
        let adv = font::text_advance(text, glyph_h)?;
        let ta = map(u + (w - adv) / 2.0, margin);
        ink = ink.union(&text_rect(text, glyph_h, stroke, orientation, ta)?);
        prims.push(Primitive::Text {
            text: text.clone(),
            anchor: ta,
            orientation,
            height: glyph_h,
            width: stroke,
        });
        u += w;
    }
    let transcript = format!("{symbol}{value}{datum}");
    let obj = labeled(
        ClassLabel::FormPositionTolerance,
        ink,
        transcript,
        orientation,
    )?;
    Ok((prims, obj))
}

/// Leader from a frame edge to the toleranced feature, ending in an arrow.
pub fn leader(from: Point, to: Point) -> Vec<Primitive> {
    let d = (to.y - from.y).atan2(to.x - from.x);
    if from.dist(to) < ARROW_LENGTH * 1.5 {
        return Vec::new();
    }
    vec![
        Primitive::line(from, to, LINE_WIDTH),
        Primitive::Arrow {
            tip: to,
            direction: d,
            length: ARROW_LENGTH,
        },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn anchor() -> FeatureAnchor {
        FeatureAnchor {
            at: Point::new(600.0, 800.0),
            normal: Point::new(0.0, -1.0),
        }
    }

    #[test]
    fn horizontal_dimension_class() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (prims, obj) =
            make_dimension(&anchor(), Orientation::Horizontal, 120.0, "45,5", &mut rng).unwrap();
        assert_eq!(obj.class, ClassLabel::DimensionHorizontal);
        assert_eq!(obj.orientation, Orientation::Horizontal);
        assert_eq!(obj.transcript, "45,5");
        let arrows = prims
            .iter()
            .filter(|p| matches!(p, Primitive::Arrow { .. }))
            .count();
        let texts: Vec<_> = prims
            .iter()
            .filter_map(|p| match p {
                Primitive::Text { orientation, .. } => Some(*orientation),
                _ => None,
            })
            .collect();
        assert_eq!(arrows, 2);
        assert_eq!(texts, [Orientation::Horizontal]);
        // extension lines + dimension line
        assert!(
            prims
                .iter()
                .filter(|p| matches!(p, Primitive::Line { .. }))
                .count()
                >= 3
        );
    }

    #[test]
    fn zero_length_vertical_dimension_still_draws() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (prims, obj) =
            make_dimension(&anchor(), Orientation::Vertical, 0.0, "8", &mut rng).unwrap();
        assert_eq!(obj.class, ClassLabel::DimensionVertical);
        assert_eq!(
            prims
                .iter()
                .filter(|p| matches!(p, Primitive::Arrow { .. }))
                .count(),
            2
        );
        assert!(prims.iter().any(|p| matches!(
            p,
            Primitive::Text {
                orientation: Orientation::Vertical,
                ..
            }
        )));
    }

    #[test]
    fn dimension_domain_errors() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!(make_dimension(&anchor(), Orientation::Horizontal, 350.0, "12", &mut rng).is_err());
        assert!(make_dimension(&anchor(), Orientation::Horizontal, -1.0, "12", &mut rng).is_err());
        assert!(make_dimension(&anchor(), Orientation::Horizontal, 10.0, "1Z", &mut rng).is_err());
    }

    #[test]
    fn frame_transcript_concatenates_cells() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let (prims, obj) = make_tolerance_frame(
            Point::new(50.0, 50.0),
            Orientation::Horizontal,
            '∅',
            "0,1",
            'H',
            &mut rng,
        )
        .unwrap();
        assert_eq!(obj.transcript, "∅0,1H");
        assert_eq!(obj.class, ClassLabel::FormPositionTolerance);
        // 4 border lines + 2 dividers + 3 texts
        assert_eq!(prims.len(), 9);
    }

    #[test]
    fn frame_domain_errors() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = Point::new(50.0, 50.0);
        assert!(
            make_tolerance_frame(a, Orientation::Horizontal, '∅', "0.1Z", 'H', &mut rng).is_err()
        );
        assert!(
            make_tolerance_frame(a, Orientation::Horizontal, '∅', "0,1", '5', &mut rng).is_err()
        );
        assert!(
            make_tolerance_frame(a, Orientation::Horizontal, 'Z', "0,1", 'H', &mut rng).is_err()
        );
    }

    #[test]
    fn vertical_frame_is_rotated_horizontal_frame() {
        let a = Point::new(300.0, 300.0);
        let (_, h) = make_tolerance_frame(
            a,
            Orientation::Horizontal,
            '+',
            "0,05",
            'K',
            &mut ChaCha8Rng::seed_from_u64(6),
        )
        .unwrap();
        let (_, v) = make_tolerance_frame(
            a,
            Orientation::Vertical,
            '+',
            "0,05",
            'K',
            &mut ChaCha8Rng::seed_from_u64(6),
        )
        .unwrap();
        assert!((h.bbox.w - v.bbox.h).abs() < 1e-9);
        assert!((h.bbox.h - v.bbox.w).abs() < 1e-9);
        assert!(v.bbox.bottom() <= a.y + 3.0 && v.bbox.x >= a.x - 3.0);
    }
}
