//! Vector scenes: drawing primitives plus the labeled objects that form the
//! ground truth, before anything is rasterized.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::alphabet;
use crate::error::{Error, Result};
use crate::geom::{BBox, Point, Rect};
use crate::raster::font;

pub const MIN_DRAWING_WIDTH: u32 = 1200;
pub const MAX_DRAWING_WIDTH: u32 = 1500;
pub const CHARACTER_WIDTH: u32 = 50;
pub const CHARACTER_HEIGHT: u32 = 35;

/// Detector classes. Ids are 1-based and stable across every file format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ClassLabel {
    #[serde(rename = "dimensions horizontal")]
    DimensionHorizontal,
    #[serde(rename = "dimensions vertical")]
    DimensionVertical,
    #[serde(rename = "shape and position tolerances")]
    FormPositionTolerance,
}

impl ClassLabel {
    pub const ALL: [ClassLabel; 3] = [
        ClassLabel::DimensionHorizontal,
        ClassLabel::DimensionVertical,
        ClassLabel::FormPositionTolerance,
    ];

    pub fn id(self) -> u32 {
        match self {
            ClassLabel::DimensionHorizontal => 1,
            ClassLabel::DimensionVertical => 2,
            ClassLabel::FormPositionTolerance => 3,
        }
    }

    pub fn from_id(id: u32) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.id() == id)
    }

    pub fn name(self) -> &'static str {
        match self {
            ClassLabel::DimensionHorizontal => "dimensions horizontal",
            ClassLabel::DimensionVertical => "dimensions vertical",
            ClassLabel::FormPositionTolerance => "shape and position tolerances",
        }
    }

    pub fn dimension(orientation: Orientation) -> Self {
        match orientation {
            Orientation::Horizontal => ClassLabel::DimensionHorizontal,
            Orientation::Vertical => ClassLabel::DimensionVertical,
        }
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Text direction: horizontal is 0°, vertical is 90° reading bottom to top.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Horizontal,
    Vertical,
}

/// The three generated image families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum ImageType {
    /// A part drawing carrying its dimensions and tolerances.
    Part = 1,
    /// Labeled objects scattered over unlabeled background elements.
    Clutter = 2,
    /// A 50×35 character-sequence crop for recognizer training.
    Characters = 3,
}

impl ImageType {
    pub fn number(self) -> u8 {
        self as u8
    }
}

impl From<ImageType> for u8 {
    fn from(t: ImageType) -> u8 {
        t as u8
    }
}

impl TryFrom<u8> for ImageType {
    type Error = String;

    fn try_from(v: u8) -> std::result::Result<Self, String> {
        match v {
            1 => Ok(ImageType::Part),
            2 => Ok(ImageType::Clutter),
            3 => Ok(ImageType::Characters),
            _ => Err(format!("image type must be 1, 2 or 3, got {v}")),
        }
    }
}

impl fmt::Display for ImageType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Primitive {
    Line {
        p1: Point,
        p2: Point,
        width: f64,
    },
    Circle {
        center: Point,
        radius: f64,
        width: f64,
    },
    /// Counter-clockwise (on screen) from `start` to `end`, radians.
    Arc {
        center: Point,
        radius: f64,
        start: f64,
        end: f64,
        width: f64,
    },
    /// Outlined polygon filled with parallel lines.
    Hatch {
        polygon: Vec<Point>,
        angle: f64,
        spacing: f64,
        width: f64,
    },
    Text {
        text: String,
        anchor: Point,
        orientation: Orientation,
        height: f64,
        width: f64,
    },
    /// Filled triangle pointing along `direction` (radians) with its tip at `tip`.
    Arrow {
        tip: Point,
        direction: f64,
        length: f64,
    },
    /// Grayscale raster pasted with darken blending; used for user-supplied
    /// background crops.
    Bitmap {
        origin: Point,
        width: u32,
        height: u32,
        pixels: Vec<u8>,
    },
}

/// Half-width to length ratio of arrowheads.
pub const ARROW_ASPECT: f64 = 1.0 / 3.0;

impl Primitive {
    pub fn line(p1: Point, p2: Point, width: f64) -> Self {
        Primitive::Line { p1, p2, width }
    }

    /// Arrowhead triangle corners: tip, then the two base corners.
    pub fn arrow_corners(tip: Point, direction: f64, length: f64) -> [Point; 3] {
        let (s, c) = direction.sin_cos();
        let base = Point::new(tip.x - c * length, tip.y - s * length);
        let half = length * ARROW_ASPECT;
        [
            tip,
            Point::new(base.x - s * half, base.y + c * half),
            Point::new(base.x + s * half, base.y - c * half),
        ]
    }

    /// Ink extent including stroke width. Text that cannot be laid out yields
    /// an empty rect; [`validate_scene`] reports it separately.
    pub fn extent(&self) -> Rect {
        let mut r = Rect::EMPTY;
        match self {
            Primitive::Line { p1, p2, width } => {
                r.include(*p1);
                r.include(*p2);
                r.inflate(width / 2.0)
            }
            Primitive::Circle {
                center,
                radius,
                width,
            }
            | Primitive::Arc {
                center,
                radius,
                width,
                ..
            } => Rect::new(
                center.x - radius,
                center.y - radius,
                center.x + radius,
                center.y + radius,
            )
            .inflate(width / 2.0),
            Primitive::Hatch { polygon, width, .. } => {
                polygon.iter().for_each(|q| r.include(*q));
                r.inflate(width / 2.0)
            }
            Primitive::Text {
                text,
                anchor,
                orientation,
                height,
                width,
            } => font::text_ink_rect(text, *height, *width, *orientation, *anchor)
                .unwrap_or(Rect::EMPTY),
            Primitive::Arrow {
                tip,
                direction,
                length,
            } => {
                Self::arrow_corners(*tip, *direction, *length)
                    .iter()
                    .for_each(|q| r.include(*q));
                r
            }
            Primitive::Bitmap {
                origin,
                width,
                height,
                ..
            } => Rect::new(
                origin.x,
                origin.y,
                origin.x + *width as f64,
                origin.y + *height as f64,
            ),
        }
    }

    pub fn translate(&mut self, dx: f64, dy: f64) {
        match self {
            Primitive::Line { p1, p2, .. } => {
                *p1 = p1.offset(dx, dy);
                *p2 = p2.offset(dx, dy);
            }
            Primitive::Circle { center, .. } | Primitive::Arc { center, .. } => {
                *center = center.offset(dx, dy)
            }
            Primitive::Hatch { polygon, .. } => {
                polygon.iter_mut().for_each(|q| *q = q.offset(dx, dy))
            }
            Primitive::Text { anchor, .. } => *anchor = anchor.offset(dx, dy),
            Primitive::Arrow { tip, .. } => *tip = tip.offset(dx, dy),
            Primitive::Bitmap { origin, .. } => *origin = origin.offset(dx, dy),
        }
    }

    fn check(&self) -> std::result::Result<(), String> {
        let finite = |pts: &[Point]| pts.iter().all(|q| q.is_finite());
        let positive = |v: f64, what: &str| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(format!("{what} must be positive, got {v}"))
            }
        };
        match self {
            Primitive::Line { p1, p2, width } => {
                if !finite(&[*p1, *p2]) {
                    return Err("non-finite line endpoint".into());
                }
                positive(*width, "stroke width")
            }
            Primitive::Circle {
                center,
                radius,
                width,
            } => {
                if !center.is_finite() {
                    return Err("non-finite circle center".into());
                }
                positive(*radius, "radius")?;
                positive(*width, "stroke width")
            }
            Primitive::Arc {
                center,
                radius,
                start,
                end,
                width,
            } => {
                if !center.is_finite() || !start.is_finite() || !end.is_finite() {
                    return Err("non-finite arc parameter".into());
                }
                positive(*radius, "radius")?;
                positive(*width, "stroke width")
            }
            Primitive::Hatch {
                polygon,
                angle,
                spacing,
                width,
            } => {
                if polygon.len() < 3 || !finite(polygon) || !angle.is_finite() {
                    return Err("hatch needs a finite polygon of at least 3 vertices".into());
                }
                positive(*spacing, "hatch spacing")?;
                positive(*width, "stroke width")
            }
            Primitive::Text {
                text,
                anchor,
                height,
                width,
                ..
            } => {
                if !anchor.is_finite() {
                    return Err("non-finite text anchor".into());
                }
                if text.is_empty() {
                    return Err("empty text run".into());
                }
                if let Some(c) = text.chars().find(|&c| !font::has_glyph(c)) {
                    return Err(format!("text glyph {c:?} has no stroke definition"));
                }
                if height.is_nan() || *height < font::MIN_GLYPH_HEIGHT {
                    return Err(format!(
                        "glyph height {height} below {}",
                        font::MIN_GLYPH_HEIGHT
                    ));
                }
                positive(*width, "stroke width")
            }
            Primitive::Arrow {
                tip,
                direction,
                length,
            } => {
                if !tip.is_finite() || !direction.is_finite() {
                    return Err("non-finite arrow".into());
                }
                positive(*length, "arrow length")
            }
            Primitive::Bitmap {
                origin,
                width,
                height,
                pixels,
            } => {
                if !origin.is_finite() {
                    return Err("non-finite bitmap origin".into());
                }
                if pixels.len() != (*width as usize) * (*height as usize) {
                    return Err(format!(
                        "bitmap buffer holds {} bytes, expected {width}x{height}",
                        pixels.len()
                    ));
                }
                Ok(())
            }
        }
    }
}

/// One annotated detection target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledObject {
    pub class: ClassLabel,
    pub bbox: BBox,
    pub transcript: String,
    pub orientation: Orientation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub width: u32,
    pub height: u32,
    pub image_type: ImageType,
    pub seed: u64,
    pub primitives: Vec<Primitive>,
    pub labeled_objects: Vec<LabeledObject>,
    /// Extents of unlabeled background elements, in placement order.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub background_extents: Vec<Rect>,
}

impl Scene {
    pub fn blank(width: u32, height: u32, image_type: ImageType, seed: u64) -> Self {
        Scene {
            width,
            height,
            image_type,
            seed,
            primitives: Vec::new(),
            labeled_objects: Vec::new(),
            background_extents: Vec::new(),
        }
    }
}

/// Canvas for a drawing `width`: height follows the 1:√2 sheet format,
/// rounded half-up.
pub fn canvas_size_for(width: u32) -> Result<(u32, u32)> {
    if !(MIN_DRAWING_WIDTH..=MAX_DRAWING_WIDTH).contains(&width) {
        return Err(Error::domain(format!(
            "drawing width {width} outside [{MIN_DRAWING_WIDTH}, {MAX_DRAWING_WIDTH}]"
        )));
    }
    Ok((width, sqrt2_height(width)))
}

fn sqrt2_height(width: u32) -> u32 {
    (width as f64 * std::f64::consts::SQRT_2 + 0.5).floor() as u32
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subject {
    Canvas,
    Object(usize),
    Primitive(usize),
}

impl fmt::Display for Subject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Subject::Canvas => f.write_str("canvas"),
            Subject::Object(i) => write!(f, "object {i}"),
            Subject::Primitive(i) => write!(f, "primitive {i}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Invariant {
    CanvasSize,
    BBoxShape,
    BBoxInBounds,
    Transcript,
    ClassOrientation,
    PrimitiveShape,
}

impl fmt::Display for Invariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Invariant::CanvasSize => "canvas size",
            Invariant::BBoxShape => "bbox shape",
            Invariant::BBoxInBounds => "bbox in bounds",
            Invariant::Transcript => "transcript alphabet",
            Invariant::ClassOrientation => "class/orientation coupling",
            Invariant::PrimitiveShape => "primitive shape",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub subject: Subject,
    pub invariant: Invariant,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} violates {}: {}",
            self.subject, self.invariant, self.detail
        )
    }
}

/// Every broken scene invariant; empty when the scene is well formed.
pub fn validate_scene(scene: &Scene) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |subject, invariant, detail: String| {
        out.push(Violation {
            subject,
            invariant,
            detail,
        })
    };
    let (w, h) = (scene.width, scene.height);
    match scene.image_type {
        ImageType::Part | ImageType::Clutter => {
            if !(MIN_DRAWING_WIDTH..=MAX_DRAWING_WIDTH).contains(&w) {
                push(
                    Subject::Canvas,
                    Invariant::CanvasSize,
                    format!("width {w} outside [{MIN_DRAWING_WIDTH}, {MAX_DRAWING_WIDTH}]"),
                );
            } else if h.abs_diff(sqrt2_height(w)) > 1 {
                push(
                    Subject::Canvas,
                    Invariant::CanvasSize,
                    format!("height {h} is not width·√2 = {}", sqrt2_height(w)),
                );
            }
        }
        ImageType::Characters => {
            if (w, h) != (CHARACTER_WIDTH, CHARACTER_HEIGHT) {
                push(
                    Subject::Canvas,
                    Invariant::CanvasSize,
                    format!(
                        "character image is {w}x{h}, expected {CHARACTER_WIDTH}x{CHARACTER_HEIGHT}"
                    ),
                );
            }
        }
    }

    for (i, o) in scene.labeled_objects.iter().enumerate() {
        let s = Subject::Object(i);
        if !o.bbox.is_well_formed() {
            push(s, Invariant::BBoxShape, format!("{:?}", o.bbox));
        } else if !o.bbox.inside_canvas(w as f64, h as f64) {
            push(
                s,
                Invariant::BBoxInBounds,
                format!("{:?} not inside {w}x{h}", o.bbox),
            );
        }
        if let Err(e) = alphabet::check_text(&o.transcript) {
            push(s, Invariant::Transcript, e.to_string());
        }
        let coupled = match o.class {
            ClassLabel::DimensionHorizontal => o.orientation == Orientation::Horizontal,
            ClassLabel::DimensionVertical => o.orientation == Orientation::Vertical,
            ClassLabel::FormPositionTolerance => true,
        };
        if !coupled {
            push(
                s,
                Invariant::ClassOrientation,
                format!("{} with {:?} text", o.class, o.orientation),
            );
        }
    }

    for (i, p) in scene.primitives.iter().enumerate() {
        if let Err(detail) = p.check() {
            push(Subject::Primitive(i), Invariant::PrimitiveShape, detail);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canvas_examples() {
        // 1200·√2 = 1697.06, 1500·√2 = 2121.32
        assert_eq!(canvas_size_for(1200).unwrap(), (1200, 1697));
        assert_eq!(canvas_size_for(1500).unwrap(), (1500, 2121));
        assert!(canvas_size_for(1000).is_err());
        assert!(canvas_size_for(1501).is_err());
    }

    #[test]
    fn canvas_ratio_band_holds_for_every_width() {
        for w in MIN_DRAWING_WIDTH..=MAX_DRAWING_WIDTH {
            let (_, h) = canvas_size_for(w).unwrap();
            let wf = w as f64;
            let r = h as f64 / wf;
            assert!((r - std::f64::consts::SQRT_2).abs() <= 2.0 / wf, "{w}");
        }
    }

    #[test]
    fn class_names_and_ids() {
        let names: Vec<_> = ClassLabel::ALL
            .iter()
            .map(|c| serde_json::to_string(c).unwrap())
            .collect();
        assert_eq!(
            names,
            [
                "\"dimensions horizontal\"",
                "\"dimensions vertical\"",
                "\"shape and position tolerances\""
            ]
        );
        for c in ClassLabel::ALL {
            assert_eq!(ClassLabel::from_id(c.id()), Some(c));
        }
        assert_eq!(ClassLabel::from_id(4), None);
    }

    fn object(x: f64, y: f64) -> LabeledObject {
        LabeledObject {
            class: ClassLabel::DimensionHorizontal,
            bbox: BBox::new(x, y, 45.0, 25.0).unwrap(),
            transcript: "45,5".into(),
            orientation: Orientation::Horizontal,
        }
    }

    #[test]
    fn validate_well_formed_scene() {
        let mut s = Scene::blank(1200, 1697, ImageType::Part, 1);
        s.labeled_objects.push(object(100.0, 100.0));
        s.primitives.push(Primitive::line(
            Point::new(0.0, 0.0),
            Point::new(5.0, 5.0),
            2.0,
        ));
        assert!(validate_scene(&s).is_empty());
    }

    #[test]
    fn validate_flags_out_of_bounds_bbox() {
        let mut s = Scene::blank(1200, 1697, ImageType::Part, 1);
        s.labeled_objects.push(object(1180.0, 100.0));
        let v = validate_scene(&s);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].invariant, Invariant::BBoxInBounds);
        assert_eq!(v[0].subject, Subject::Object(0));
    }

    #[test]
    fn validate_flags_character_canvas() {
        let s = Scene::blank(51, 35, ImageType::Characters, 1);
        let v = validate_scene(&s);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].invariant, Invariant::CanvasSize);
    }

    #[test]
    fn validate_flags_coupling_and_alphabet() {
        let mut s = Scene::blank(1200, 1697, ImageType::Clutter, 1);
        let mut o = object(10.0, 10.0);
        o.orientation = Orientation::Vertical;
        o.transcript = "4Z".into();
        s.labeled_objects.push(o);
        let kinds: Vec<_> = validate_scene(&s)
            .into_iter()
            .map(|v| v.invariant)
            .collect();
        assert_eq!(kinds, [Invariant::Transcript, Invariant::ClassOrientation]);
    }

    #[test]
    fn validate_flags_bad_primitives() {
        let mut s = Scene::blank(1200, 1697, ImageType::Part, 1);
        s.primitives.push(Primitive::Hatch {
            polygon: vec![Point::new(0., 0.), Point::new(10., 0.), Point::new(0., 10.)],
            angle: 0.7,
            spacing: 0.0,
            width: 1.0,
        });
        s.primitives.push(Primitive::line(
            Point::new(f64::NAN, 0.0),
            Point::new(1.0, 1.0),
            1.0,
        ));
        let v = validate_scene(&s);
        assert_eq!(v.len(), 2);
        assert!(v.iter().all(|v| v.invariant == Invariant::PrimitiveShape));
    }

    #[test]
    fn image_type_serializes_as_number() {
        assert_eq!(serde_json::to_string(&ImageType::Clutter).unwrap(), "2");
        assert!(serde_json::from_str::<ImageType>("4").is_err());
    }
}
