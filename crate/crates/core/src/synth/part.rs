//! Procedural part geometry: stepped shafts and plates with drillings.
//!
//! Shafts are stepped profiles mirrored about a horizontal axis, drawn as a
//! half section with the upper half of one step hatched. Plates are
//! rectangles with optional filleted corners and drilling patterns mirrored
//! about the vertical center line.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{segment_distance, segments_intersect, BBox, Point, Rect};
use crate::scene::Primitive;

pub const MIN_PART_REGION: f64 = 300.0;

const OUTLINE_WIDTH: f64 = 2.0;
const THIN_WIDTH: f64 = 0.8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum OutlineSegment {
    Line(Point, Point),
    /// Counter-clockwise on screen from `start` to `end` (radians).
    Arc {
        center: Point,
        radius: f64,
        start: f64,
        end: f64,
    },
}

impl OutlineSegment {
    fn point_at(center: Point, radius: f64, a: f64) -> Point {
        Point::new(center.x + radius * a.cos(), center.y - radius * a.sin())
    }

    pub fn start(&self) -> Point {
        match self {
            OutlineSegment::Line(a, _) => *a,
            OutlineSegment::Arc {
                center,
                radius,
                start,
                ..
            } => Self::point_at(*center, *radius, *start),
        }
    }

    pub fn end(&self) -> Point {
        match self {
            OutlineSegment::Line(_, b) => *b,
            OutlineSegment::Arc {
                center,
                radius,
                end,
                ..
            } => Self::point_at(*center, *radius, *end),
        }
    }

    /// Polyline approximation with chords of at most ~2 px.
    pub fn flatten(&self) -> Vec<Point> {
        match self {
            OutlineSegment::Line(a, b) => vec![*a, *b],
            OutlineSegment::Arc {
                center,
                radius,
                start,
                end,
            } => {
                let n = (((end - start).abs() * radius) / 2.0).ceil().max(2.0) as usize;
                (0..=n)
                    .map(|i| {
                        Self::point_at(
                            *center,
                            *radius,
                            start + (end - start) * i as f64 / n as f64,
                        )
                    })
                    .collect()
            }
        }
    }

    pub fn distance(&self, p: Point) -> f64 {
        match self {
            OutlineSegment::Line(a, b) => segment_distance(p, *a, *b),
            OutlineSegment::Arc { .. } => self
                .flatten()
                .windows(2)
                .map(|w| segment_distance(p, w[0], w[1]))
                .fold(f64::INFINITY, f64::min),
        }
    }
}

/// A point where a dimension or tolerance can attach, with the outward
/// direction of the surface there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureAnchor {
    pub at: Point,
    pub normal: Point,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Drilling {
    pub center: Point,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartOutline {
    /// Closed loop: each segment ends where the next begins.
    pub outline: Vec<OutlineSegment>,
    pub anchors: Vec<FeatureAnchor>,
    pub drillings: Vec<Drilling>,
    pub hatches: Vec<Vec<Point>>,
    pub center_lines: Vec<(Point, Point)>,
}

impl PartOutline {
    pub fn bounds(&self) -> Rect {
        let mut r = Rect::EMPTY;
        for s in &self.outline {
            s.flatten().into_iter().for_each(|p| r.include(p));
        }
        r
    }

    pub fn is_closed(&self) -> bool {
        let n = self.outline.len();
        n >= 3
            && (0..n).all(|i| {
                self.outline[i]
                    .end()
                    .dist(self.outline[(i + 1) % n].start())
                    < 1e-6
            })
    }

    /// No two non-adjacent outline pieces touch.
    pub fn is_simple(&self) -> bool {
        let pieces: Vec<(Point, Point)> = self
            .outline
            .iter()
            .flat_map(|s| {
                let f = s.flatten();
                f.windows(2).map(|w| (w[0], w[1])).collect::<Vec<_>>()
            })
            .collect();
        let n = pieces.len();
        for i in 0..n {
            for j in i + 2..n {
                if i == 0 && j == n - 1 {
                    continue;
                }
                let (a, b) = pieces[i];
                let (c, d) = pieces[j];
                if segments_intersect(a, b, c, d) {
                    return false;
                }
            }
        }
        true
    }

    /// Distance from `p` to the outline or the nearest drilling circle.
    pub fn feature_distance(&self, p: Point) -> f64 {
        let outline = self
            .outline
            .iter()
            .map(|s| s.distance(p))
            .fold(f64::INFINITY, f64::min);
        self.drillings
            .iter()
            .map(|d| (p.dist(d.center) - d.radius).abs())
            .fold(outline, f64::min)
    }

    pub fn primitives(&self) -> Vec<Primitive> {
        let mut out = Vec::new();
        for h in &self.hatches {
            out.push(Primitive::Hatch {
                polygon: h.clone(),
                angle: FRAC_PI_4,
                spacing: 7.0,
                width: THIN_WIDTH,
            });
        }
        for s in &self.outline {
            out.push(match s {
                OutlineSegment::Line(a, b) => Primitive::line(*a, *b, OUTLINE_WIDTH),
                OutlineSegment::Arc {
                    center,
                    radius,
                    start,
                    end,
                } => Primitive::Arc {
                    center: *center,
                    radius: *radius,
                    start: *start,
                    end: *end,
                    width: OUTLINE_WIDTH,
                },
            });
        }
        for d in &self.drillings {
            out.push(Primitive::Circle {
                center: d.center,
                radius: d.radius,
                width: 1.6,
            });
            let e = d.radius + 6.0;
            out.extend(dash_dot(d.center.offset(-e, 0.0), d.center.offset(e, 0.0)));
            out.extend(dash_dot(d.center.offset(0.0, -e), d.center.offset(0.0, e)));
        }
        for (a, b) in &self.center_lines {
            out.extend(dash_dot(*a, *b));
        }
        out
    }
}

/// Long-dash/dot center line pattern.
pub fn dash_dot(a: Point, b: Point) -> Vec<Primitive> {
    let len = a.dist(b);
    if len < 1e-9 {
        return Vec::new();
    }
    let (ux, uy) = ((b.x - a.x) / len, (b.y - a.y) / len);
    let at = |t: f64| Point::new(a.x + ux * t, a.y + uy * t);
    let mut out = Vec::new();
    let mut t = 0.0;
    while t < len {
        let dash_end = (t + 18.0).min(len);
        out.push(Primitive::line(at(t), at(dash_end), THIN_WIDTH));
        let dot = dash_end + 3.0;
        if dot + 1.0 < len {
            out.push(Primitive::line(at(dot), at(dot + 1.0), THIN_WIDTH));
        }
        t = dash_end + 7.0;
    }
    out
}

/// Random part fitted inside `region`.
pub fn generate_part(seed: u64, region: BBox) -> Result<PartOutline> {
    if !region.is_well_formed() || region.w < MIN_PART_REGION || region.h < MIN_PART_REGION {
        return Err(Error::domain(format!(
            "part region {:.0}x{:.0} smaller than {MIN_PART_REGION}x{MIN_PART_REGION}",
            region.w, region.h
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let part = if rng.random_bool(0.6) {
        shaft(&mut rng, region)
    } else {
        plate(&mut rng, region)
    };
    Ok(part)
}

fn polygon_outline(pts: &[Point]) -> Vec<OutlineSegment> {
    (0..pts.len())
        .map(|i| OutlineSegment::Line(pts[i], pts[(i + 1) % pts.len()]))
        .collect()
}

fn shaft(rng: &mut ChaCha8Rng, region: BBox) -> PartOutline {
    let steps: usize = rng.random_range(3..=6);
    let length = region.w * rng.random_range(0.8..=1.0);
    let x0 = region.x + (region.w - length) / 2.0;
    let cy = region.y + region.h / 2.0;
    let max_r = (region.h / 2.0).min(length * 0.3);

    let weights: Vec<f64> = (0..steps).map(|_| rng.random_range(0.5..1.5)).collect();
    let total: f64 = weights.iter().sum();
    let mut xs = vec![x0];
    for w in &weights {
        xs.push(xs.last().unwrap() + length * w / total);
    }
    *xs.last_mut().unwrap() = x0 + length;

    let mut radii: Vec<f64> = Vec::with_capacity(steps);
    for _ in 0..steps {
        let mut r = rng.random_range(0.3 * max_r..=max_r);
        if let Some(&prev) = radii.last() {
            if (r - prev).abs() < 12.0 {
                r = if prev + 12.0 <= max_r {
                    prev + 12.0
                } else {
                    prev - 12.0
                };
            }
        }
        radii.push(r);
    }

    // top profile left to right, then bottom profile back; step edges fall
    // between consecutive points
    let mut pts = Vec::with_capacity(4 * steps);
    for i in 0..steps {
        pts.push(Point::new(xs[i], cy - radii[i]));
        pts.push(Point::new(xs[i + 1], cy - radii[i]));
    }
    for i in (0..steps).rev() {
        pts.push(Point::new(xs[i + 1], cy + radii[i]));
        pts.push(Point::new(xs[i], cy + radii[i]));
    }

    let mut anchors = Vec::new();
    let up = Point::new(0.0, -1.0);
    let down = Point::new(0.0, 1.0);
    for i in 0..steps {
        let mid = (xs[i] + xs[i + 1]) / 2.0;
        anchors.push(FeatureAnchor {
            at: Point::new(mid, cy - radii[i]),
            normal: up,
        });
        anchors.push(FeatureAnchor {
            at: Point::new(mid, cy + radii[i]),
            normal: down,
        });
        if i + 1 < steps {
            let (ra, rb) = (radii[i], radii[i + 1]);
            let normal = if rb > ra {
                Point::new(-1.0, 0.0)
            } else {
                Point::new(1.0, 0.0)
            };
            anchors.push(FeatureAnchor {
                at: Point::new(xs[i + 1], cy - (ra + rb) / 2.0),
                normal,
            });
        }
    }
    anchors.push(FeatureAnchor {
        at: Point::new(xs[0], cy),
        normal: Point::new(-1.0, 0.0),
    });
    anchors.push(FeatureAnchor {
        at: Point::new(xs[steps], cy),
        normal: Point::new(1.0, 0.0),
    });

    let hatched = rng.random_range(0..steps);
    let hatches = vec![vec![
        Point::new(xs[hatched], cy - radii[hatched]),
        Point::new(xs[hatched + 1], cy - radii[hatched]),
        Point::new(xs[hatched + 1], cy),
        Point::new(xs[hatched], cy),
    ]];

    let mut drillings = Vec::new();
    if rng.random_bool(0.4) {
        let i = rng.random_range(0..steps);
        let span = xs[i + 1] - xs[i];
        let r = (radii[i] * 0.35).min(span * 0.3);
        if r >= 4.0 {
            let c = Point::new((xs[i] + xs[i + 1]) / 2.0, cy + radii[i] / 2.0);
            drillings.push(Drilling {
                center: c,
                radius: r,
            });
            anchors.push(FeatureAnchor {
                at: c.offset(r, 0.0),
                normal: Point::new(1.0, 0.0),
            });
        }
    }

    PartOutline {
        outline: polygon_outline(&pts),
        anchors,
        drillings,
        hatches,
        center_lines: vec![(
            Point::new(x0 - 12.0, cy),
            Point::new(x0 + length + 12.0, cy),
        )],
    }
}

fn plate(rng: &mut ChaCha8Rng, region: BBox) -> PartOutline {
    let w = region.w * rng.random_range(0.7..=1.0);
    let h = region.h * rng.random_range(0.6..=1.0);
    let x0 = region.x + (region.w - w) / 2.0;
    let y0 = region.y + (region.h - h) / 2.0;
    let (x1, y1) = (x0 + w, y0 + h);
    let fillet = if rng.random_bool(0.5) {
        rng.random_range(6.0..=0.1 * w.min(h))
    } else {
        0.0
    };

    let outline = if fillet > 0.0 {
        let f = fillet;
        let arc = |cx: f64, cy: f64, start: f64| OutlineSegment::Arc {
            center: Point::new(cx, cy),
            radius: f,
            start,
            end: start + FRAC_PI_2,
        };
        // counter-clockwise on screen starting at the top edge's right end
        vec![
            OutlineSegment::Line(Point::new(x1 - f, y0), Point::new(x0 + f, y0)),
            arc(x0 + f, y0 + f, FRAC_PI_2),
            OutlineSegment::Line(Point::new(x0, y0 + f), Point::new(x0, y1 - f)),
            arc(x0 + f, y1 - f, PI),
            OutlineSegment::Line(Point::new(x0 + f, y1), Point::new(x1 - f, y1)),
            arc(x1 - f, y1 - f, 1.5 * PI),
            OutlineSegment::Line(Point::new(x1, y1 - f), Point::new(x1, y0 + f)),
            arc(x1 - f, y0 + f, 0.0),
        ]
    } else {
        polygon_outline(&[
            Point::new(x0, y0),
            Point::new(x1, y0),
            Point::new(x1, y1),
            Point::new(x0, y1),
        ])
    };

    let mut anchors = Vec::new();
    for t in [1.0 / 3.0, 2.0 / 3.0] {
        anchors.push(FeatureAnchor {
            at: Point::new(x0 + w * t, y0),
            normal: Point::new(0.0, -1.0),
        });
        anchors.push(FeatureAnchor {
            at: Point::new(x0 + w * t, y1),
            normal: Point::new(0.0, 1.0),
        });
        anchors.push(FeatureAnchor {
            at: Point::new(x0, y0 + h * t),
            normal: Point::new(-1.0, 0.0),
        });
        anchors.push(FeatureAnchor {
            at: Point::new(x1, y0 + h * t),
            normal: Point::new(1.0, 0.0),
        });
    }

    // drillings on the left half, mirrored about the vertical center line
    let cx = (x0 + x1) / 2.0;
    let margin = 12.0 + fillet;
    let pairs: usize = rng.random_range(2..=3);
    let mut drillings: Vec<Drilling> = Vec::new();
    for _ in 0..pairs * 20 {
        if drillings.len() >= pairs * 2 {
            break;
        }
        let r = rng.random_range(8.0..=(0.06 * w.min(h) + 10.0));
        let lo_x = x0 + margin + r;
        let hi_x = cx - r - 10.0;
        let lo_y = y0 + margin + r;
        let hi_y = y1 - margin - r;
        if lo_x >= hi_x || lo_y >= hi_y {
            continue;
        }
        let c = Point::new(rng.random_range(lo_x..hi_x), rng.random_range(lo_y..hi_y));
        let mirrored = Point::new(2.0 * cx - c.x, c.y);
        let clear = drillings.iter().all(|d| {
            d.center.dist(c) > d.radius + r + 10.0 && d.center.dist(mirrored) > d.radius + r + 10.0
        });
        if clear {
            drillings.push(Drilling {
                center: c,
                radius: r,
            });
            drillings.push(Drilling {
                center: mirrored,
                radius: r,
            });
        }
    }
    for d in &drillings {
        anchors.push(FeatureAnchor {
            at: d.center.offset(0.0, -d.radius),
            normal: Point::new(0.0, -1.0),
        });
        anchors.push(FeatureAnchor {
            at: d.center.offset(d.radius, 0.0),
            normal: Point::new(1.0, 0.0),
        });
    }

    let mut hatches = Vec::new();
    if rng.random_bool(0.5) {
        // hatched web band across the lower part of the plate
        let band = h * rng.random_range(0.08..0.15);
        let top = y1 - margin - band;
        let clear = drillings.iter().all(|d| d.center.y + d.radius + 4.0 < top);
        if clear {
            hatches.push(vec![
                Point::new(x0 + margin, top),
                Point::new(x1 - margin, top),
                Point::new(x1 - margin, top + band),
                Point::new(x0 + margin, top + band),
            ]);
        }
    }

    PartOutline {
        outline,
        anchors,
        drillings,
        hatches,
        center_lines: vec![(Point::new(cx, y0 - 12.0), Point::new(cx, y1 + 12.0))],
    }
}
