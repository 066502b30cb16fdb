//! Photometric augmentation: sharpness, contrast and brightness.
//!
//! Each factor follows the usual image-enhancement convention where 1.0 is
//! the identity:
//! - sharpness blends the image with its 3×3 box blur, `blur + s·(in − blur)`;
//! - contrast scales around mid-gray, `128 + c·(in − 128)`;
//! - brightness scales luminance, `b·in`.
//!
//! They are applied in that order, each rounded half away from zero and
//! clamped to `[0, 255]`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::RasterImage;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AugmentParams {
    pub sharpness: f64,
    pub contrast: f64,
    pub brightness: f64,
}

impl AugmentParams {
    pub const IDENTITY: AugmentParams = AugmentParams {
        sharpness: 1.0,
        contrast: 1.0,
        brightness: 1.0,
    };

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("sharpness", self.sharpness),
            ("contrast", self.contrast),
            ("brightness", self.brightness),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::domain(format!(
                    "{name} factor must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }
}

impl Default for AugmentParams {
    fn default() -> Self {
        Self::IDENTITY
    }
}

/// Inclusive sampling ranges for [`AugmentParams`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AugmentRanges {
    pub sharpness: (f64, f64),
    pub contrast: (f64, f64),
    pub brightness: (f64, f64),
}

impl Default for AugmentRanges {
    fn default() -> Self {
        AugmentRanges {
            sharpness: (0.5, 1.5),
            contrast: (0.7, 1.3),
            brightness: (0.7, 1.3),
        }
    }
}

impl AugmentRanges {
    pub fn validate(&self) -> Result<()> {
        for (name, (lo, hi)) in [
            ("sharpness", self.sharpness),
            ("contrast", self.contrast),
            ("brightness", self.brightness),
        ] {
            if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && lo <= hi) {
                return Err(Error::domain(format!(
                    "{name} range [{lo}, {hi}] must be positive and non-empty"
                )));
            }
        }
        Ok(())
    }
}

const AUGMENT_STREAM: u64 = 0xA076_1D64_78BD_642F;

/// Per-image factors, drawn from a stream separate from scene composition so
/// changing the ranges never perturbs geometry.
pub fn sample_augment(image_seed: u64, ranges: &AugmentRanges) -> AugmentParams {
    let mut rng = ChaCha8Rng::seed_from_u64(image_seed ^ AUGMENT_STREAM);
    let mut draw = |(lo, hi): (f64, f64)| {
        if lo == hi {
            lo
        } else {
            rng.random_range(lo..=hi)
        }
    };
    AugmentParams {
        sharpness: draw(ranges.sharpness),
        contrast: draw(ranges.contrast),
        brightness: draw(ranges.brightness),
    }
}

#[inline]
fn to_u8(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

fn sharpen(img: &RasterImage, s: f64) -> Vec<u8> {
    let (w, h) = (img.width as usize, img.height as usize);
    let src = &img.pixels;
    // horizontal 3-tap sums with edge clamping
    let mut row_sum = vec![0u16; w * h];
    for y in 0..h {
        let r = &src[y * w..(y + 1) * w];
        for x in 0..w {
            let l = r[x.saturating_sub(1)] as u16;
            let rr = r[(x + 1).min(w - 1)] as u16;
            row_sum[y * w + x] = l + r[x] as u16 + rr;
        }
    }
    let mut out = vec![0u8; w * h];
    for y in 0..h {
        let up = y.saturating_sub(1) * w;
        let mid = y * w;
        let down = (y + 1).min(h - 1) * w;
        for x in 0..w {
            let sum9 = (row_sum[up + x] + row_sum[mid + x] + row_sum[down + x]) as f64;
            let v = src[mid + x] as f64;
            let blur = sum9 / 9.0;
            out[mid + x] = to_u8(blur + s * (v - blur));
        }
    }
    out
}

/// Applies `p` to `img`. Output size equals input size; identity factors
/// return the input bytes unchanged.
pub fn augment(img: &RasterImage, p: &AugmentParams) -> Result<RasterImage> {
    p.validate()?;
    let mut pixels = if p.sharpness != 1.0 && img.width > 0 && img.height > 0 {
        sharpen(img, p.sharpness)
    } else {
        img.pixels.clone()
    };
    if p.contrast != 1.0 || p.brightness != 1.0 {
        let mut lut = [0u8; 256];
        for (v, slot) in lut.iter_mut().enumerate() {
            let c = to_u8(128.0 + p.contrast * (v as f64 - 128.0));
            *slot = to_u8(p.brightness * c as f64);
        }
        pixels.iter_mut().for_each(|v| *v = lut[*v as usize]);
    }
    Ok(RasterImage {
        width: img.width,
        height: img.height,
        pixels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gradient() -> RasterImage {
        let (w, h) = (16u32, 9u32);
        let pixels = (0..w * h).map(|i| ((i * 37) % 256) as u8).collect();
        RasterImage::from_pixels(w, h, pixels).unwrap()
    }

    #[test]
    fn identity_is_byte_exact() {
        let img = gradient();
        assert_eq!(augment(&img, &AugmentParams::IDENTITY).unwrap(), img);
    }

    #[test]
    fn rejects_non_positive_factors() {
        let img = gradient();
        for p in [
            AugmentParams {
                sharpness: 0.0,
                ..AugmentParams::IDENTITY
            },
            AugmentParams {
                contrast: -1.0,
                ..AugmentParams::IDENTITY
            },
            AugmentParams {
                brightness: f64::NAN,
                ..AugmentParams::IDENTITY
            },
        ] {
            assert!(augment(&img, &p).is_err());
        }
    }

    #[test]
    fn contrast_matches_reference_formula() {
        let img = gradient();
        let p = AugmentParams {
            contrast: 0.7,
            ..AugmentParams::IDENTITY
        };
        let out = augment(&img, &p).unwrap();
        for (i, o) in img.pixels.iter().zip(&out.pixels) {
            let expect = (128.0 + 0.7 * (*i as f64 - 128.0))
                .round()
                .clamp(0.0, 255.0) as u8;
            assert_eq!(*o, expect);
        }
        assert!(out.std_dev() < img.std_dev());
    }

    #[test]
    fn sharpening_constant_image_is_noop() {
        let img = RasterImage::from_pixels(5, 4, vec![200; 20]).unwrap();
        let p = AugmentParams {
            sharpness: 1.5,
            ..AugmentParams::IDENTITY
        };
        assert_eq!(augment(&img, &p).unwrap(), img);
    }

    #[test]
    fn sampled_params_stay_in_range() {
        let r = AugmentRanges::default();
        for seed in 0..200 {
            let p = sample_augment(seed, &r);
            assert!((0.5..=1.5).contains(&p.sharpness));
            assert!((0.7..=1.3).contains(&p.contrast));
            assert!((0.7..=1.3).contains(&p.brightness));
            assert_eq!(p, sample_augment(seed, &r));
        }
    }
}
