//! Anti-aliased coverage rasterization with darken compositing.
//!
//! Coverage of a pixel is estimated from the distance between its center
//! and the ideal shape, with a one-pixel linear ramp. Ink composites as
//! `min(current, 255·(1 − coverage))`, so drawing order never matters.

use std::f64::consts::PI;

use crate::geom::{segment_distance, Point};

pub(crate) struct Canvas<'a> {
    pub width: usize,
    pub height: usize,
    pub pixels: &'a mut [u8],
}

impl Canvas<'_> {
    #[inline]
    fn ink(&mut self, x: usize, y: usize, coverage: f64) {
        if coverage <= 0.0 {
            return;
        }
        let v = (255.0 * (1.0 - coverage.min(1.0))).round() as u8;
        let px = &mut self.pixels[y * self.width + x];
        if v < *px {
            *px = v;
        }
    }

    fn rows(&self, y0: f64, y1: f64) -> std::ops::Range<usize> {
        let lo = y0.floor().max(0.0) as usize;
        let hi = (y1.ceil().max(0.0) as usize).min(self.height);
        lo..hi.max(lo)
    }

    fn cols(&self, x0: f64, x1: f64) -> std::ops::Range<usize> {
        let lo = x0.floor().max(0.0) as usize;
        let hi = (x1.ceil().max(0.0) as usize).min(self.width);
        lo..hi.max(lo)
    }

    /// Round-capped thick segment.
    pub fn segment(&mut self, a: Point, b: Point, width: f64) {
        let r = width / 2.0;
        let reach = r + 0.5;
        let (dx, dy) = (b.x - a.x, b.y - a.y);
        for y in self.rows(a.y.min(b.y) - reach, a.y.max(b.y) + reach) {
            let yc = y as f64 + 0.5;
            // Any point within `reach` of the segment has some parameter t
            // with |y(t) - yc| <= reach; bound x over that t interval.
            let (t0, t1) = if dy.abs() < 1e-12 {
                if (a.y - yc).abs() > reach {
                    continue;
                }
                (0.0, 1.0)
            } else {
                let u = (yc - reach - a.y) / dy;
                let v = (yc + reach - a.y) / dy;
                let (lo, hi) = if u < v { (u, v) } else { (v, u) };
                let (lo, hi) = (lo.max(0.0), hi.min(1.0));
                if lo > hi {
                    continue;
                }
                (lo, hi)
            };
            let xa = a.x + dx * t0;
            let xb = a.x + dx * t1;
            for x in self.cols(xa.min(xb) - reach, xa.max(xb) + reach) {
                let c = Point::new(x as f64 + 0.5, yc);
                let cov = reach - segment_distance(c, a, b);
                self.ink(x, y, cov);
            }
        }
    }

    pub fn polyline(&mut self, pts: &[Point], width: f64) {
        if pts.len() == 1 {
            self.segment(pts[0], pts[0], width);
        }
        for w in pts.windows(2) {
            self.segment(w[0], w[1], width);
        }
    }

    pub fn arc(&mut self, center: Point, radius: f64, start: f64, end: f64, width: f64) {
        let sweep = end - start;
        // ~3 px chords keep the polygonal error well under a tenth of a pixel
        let n = ((sweep.abs() * radius / 3.0).ceil() as usize).clamp(8, 4096);
        let pts: Vec<Point> = (0..=n)
            .map(|i| {
                let a = start + sweep * i as f64 / n as f64;
                Point::new(center.x + radius * a.cos(), center.y - radius * a.sin())
            })
            .collect();
        self.polyline(&pts, width);
    }

    pub fn circle(&mut self, center: Point, radius: f64, width: f64) {
        self.arc(center, radius, 0.0, 2.0 * PI, width);
    }

    /// Filled triangle with anti-aliased edges.
    pub fn triangle(&mut self, t: [Point; 3]) {
        // orient counter-clockwise in math sense so edge normals point outward
        let area = (t[1].x - t[0].x) * (t[2].y - t[0].y) - (t[1].y - t[0].y) * (t[2].x - t[0].x);
        if area.abs() < 1e-12 {
            return;
        }
        let tri = if area > 0.0 { t } else { [t[0], t[2], t[1]] };
        let edges: Vec<(Point, f64, f64)> = (0..3)
            .map(|i| {
                let (p, q) = (tri[i], tri[(i + 1) % 3]);
                let (ex, ey) = (q.x - p.x, q.y - p.y);
                let len = ex.hypot(ey);
                // outward normal for a positively oriented triangle
                (p, ey / len, -ex / len)
            })
            .collect();
        let (mut x0, mut y0, mut x1, mut y1) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
        for q in tri {
            x0 = x0.min(q.x);
            y0 = y0.min(q.y);
            x1 = x1.max(q.x);
            y1 = y1.max(q.y);
        }
        for y in self.rows(y0 - 1.0, y1 + 1.0) {
            for x in self.cols(x0 - 1.0, x1 + 1.0) {
                let c = Point::new(x as f64 + 0.5, y as f64 + 0.5);
                let sd = edges
                    .iter()
                    .map(|(p, nx, ny)| (c.x - p.x) * nx + (c.y - p.y) * ny)
                    .fold(f64::MIN, f64::max);
                self.ink(x, y, 0.5 - sd);
            }
        }
    }

    /// Parallel lines at `angle` (radians, counter-clockwise on screen),
    /// clipped to the polygon interior with the even-odd rule.
    pub fn hatch_lines(&mut self, polygon: &[Point], angle: f64, spacing: f64, width: f64) {
        let (s, c) = angle.sin_cos();
        let dir = (c, -s);
        let normal = (s, c);
        let proj = |q: &Point, v: (f64, f64)| q.x * v.0 + q.y * v.1;
        let (lo, hi) = polygon.iter().fold((f64::MAX, f64::MIN), |(lo, hi), q| {
            let v = proj(q, normal);
            (lo.min(v), hi.max(v))
        });
        let k0 = (lo / spacing).ceil() as i64;
        let k1 = (hi / spacing).floor() as i64;
        let mut ts = Vec::new();
        for k in k0..=k1 {
            let off = k as f64 * spacing;
            ts.clear();
            for i in 0..polygon.len() {
                let (p, q) = (polygon[i], polygon[(i + 1) % polygon.len()]);
                let (sp, sq) = (proj(&p, normal) - off, proj(&q, normal) - off);
                if (sp > 0.0) != (sq > 0.0) {
                    let f = sp / (sp - sq);
                    let hit = Point::new(p.x + (q.x - p.x) * f, p.y + (q.y - p.y) * f);
                    ts.push(proj(&hit, dir));
                }
            }
            ts.sort_by(f64::total_cmp);
            for pair in ts.chunks_exact(2) {
                let at =
                    |t: f64| Point::new(normal.0 * off + dir.0 * t, normal.1 * off + dir.1 * t);
                self.segment(at(pair[0]), at(pair[1]), width);
            }
        }
    }

    pub fn bitmap(&mut self, origin: Point, w: u32, h: u32, src: &[u8]) {
        let ox = origin.x.round() as i64;
        let oy = origin.y.round() as i64;
        for sy in 0..h as i64 {
            let y = oy + sy;
            if y < 0 || y >= self.height as i64 {
                continue;
            }
            for sx in 0..w as i64 {
                let x = ox + sx;
                if x < 0 || x >= self.width as i64 {
                    continue;
                }
                let v = src[(sy * w as i64 + sx) as usize];
                let px = &mut self.pixels[y as usize * self.width + x as usize];
                if v < *px {
                    *px = v;
                }
            }
        }
    }
}
