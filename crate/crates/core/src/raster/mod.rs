//! Scene rendering to 8-bit grayscale and photometric augmentation.

mod augment;
mod draw;
pub mod font;

pub use augment::{augment, sample_augment, AugmentParams, AugmentRanges};
pub use font::rasterize_glyph;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Point;
use crate::scene::{validate_scene, Primitive, Scene};
use draw::Canvas;

pub const WHITE: u8 = 255;

/// Row-major luminance buffer; 0 is black ink, 255 is white paper.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RasterImage {
    pub width: u32,
    pub height: u32,
    pub pixels: Vec<u8>,
}

impl RasterImage {
    pub fn blank(width: u32, height: u32) -> Self {
        RasterImage {
            width,
            height,
            pixels: vec![WHITE; width as usize * height as usize],
        }
    }

    pub fn from_pixels(width: u32, height: u32, pixels: Vec<u8>) -> Result<Self> {
        if pixels.len() != width as usize * height as usize {
            return Err(Error::domain(format!(
                "buffer of {} bytes does not match {width}x{height}",
                pixels.len()
            )));
        }
        Ok(RasterImage {
            width,
            height,
            pixels,
        })
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> u8 {
        self.pixels[y as usize * self.width as usize + x as usize]
    }

    pub fn mean(&self) -> f64 {
        if self.pixels.is_empty() {
            return 0.0;
        }
        self.pixels.iter().map(|&v| v as f64).sum::<f64>() / self.pixels.len() as f64
    }

    pub fn std_dev(&self) -> f64 {
        let m = self.mean();
        let n = self.pixels.len().max(1) as f64;
        (self
            .pixels
            .iter()
            .map(|&v| (v as f64 - m).powi(2))
            .sum::<f64>()
            / n)
            .sqrt()
    }

    fn canvas(&mut self) -> Canvas<'_> {
        Canvas {
            width: self.width as usize,
            height: self.height as usize,
            pixels: &mut self.pixels,
        }
    }

    /// Draws one primitive onto the image.
    pub fn draw(&mut self, p: &Primitive) -> Result<()> {
        let mut c = self.canvas();
        match p {
            Primitive::Line { p1, p2, width } => c.segment(*p1, *p2, *width),
            Primitive::Circle {
                center,
                radius,
                width,
            } => c.circle(*center, *radius, *width),
            Primitive::Arc {
                center,
                radius,
                start,
                end,
                width,
            } => c.arc(*center, *radius, *start, *end, *width),
            Primitive::Hatch {
                polygon,
                angle,
                spacing,
                width,
            } => {
                let mut closed: Vec<Point> = polygon.clone();
                closed.push(polygon[0]);
                c.polyline(&closed, *width);
                c.hatch_lines(polygon, *angle, *spacing, *width * 0.75);
            }
            Primitive::Text {
                text,
                anchor,
                orientation,
                height,
                width,
            } => {
                for s in font::layout_text(text, *height, *orientation, *anchor)? {
                    c.polyline(&s, *width);
                }
            }
            Primitive::Arrow {
                tip,
                direction,
                length,
            } => c.triangle(Primitive::arrow_corners(*tip, *direction, *length)),
            Primitive::Bitmap {
                origin,
                width,
                height,
                pixels,
            } => c.bitmap(*origin, *width, *height, pixels),
        }
        Ok(())
    }
}

/// Rasterizes a valid scene on white paper.
pub fn render(scene: &Scene) -> Result<RasterImage> {
    let violations = validate_scene(scene);
    if !violations.is_empty() {
        return Err(Error::InvalidScene(violations));
    }
    let mut img = RasterImage::blank(scene.width, scene.height);
    for p in &scene.primitives {
        img.draw(p)?;
    }
    Ok(img)
}
