//! Scene composition for the three image types.
//!
//! Every scene is a pure function of `(image_seed, config)`; per-image seeds
//! come from [`derive_image_seed`] so images can be produced in any order.

use std::path::PathBuf;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::alphabet::{self, ALPHABET, DIAMETER, FIT_LETTERS, MINUS_PLUS};
use crate::error::{Error, Result};
use crate::geom::{BBox, Point, Rect};
use crate::raster::{font, AugmentRanges};
use crate::scene::{
    canvas_size_for, ClassLabel, ImageType, LabeledObject, Orientation, Primitive, Scene,
    CHARACTER_HEIGHT, CHARACTER_WIDTH, MAX_DRAWING_WIDTH, MIN_DRAWING_WIDTH,
};
use crate::synth::{
    distractor_library, extent, generate_part, leader, load_crop_dir, make_dimension,
    make_distractor, make_tolerance_frame, sample_tolerance_value, DimensionTextGrammar,
    DistractorEntry, FeatureAnchor, RasterCrop, MAX_DIMENSION_LENGTH, MIN_PART_REGION, SCALE_RANGE,
};

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of image `index`: the `(index + 1)`-th output of a SplitMix64
/// generator seeded with `master_seed`, i.e.
/// `mix64(master_seed + (index + 1) · 0x9E3779B97F4A7C15)` in wrapping
/// arithmetic. Injective in each argument with the other fixed.
pub fn derive_image_seed(master_seed: u64, image_index: u64) -> u64 {
    mix64(master_seed.wrapping_add(GOLDEN_GAMMA.wrapping_mul(image_index.wrapping_add(1))))
}

/// Glyphs standing in for the tolerance type symbol in the first frame cell.
pub const TOLERANCE_TYPE_GLYPHS: [char; 4] = [DIAMETER, '+', '-', MINUS_PLUS];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ComposerConfig {
    pub seed: u64,
    pub width_range: (u32, u32),
    pub part_objects: (usize, usize),
    pub clutter_objects: usize,
    pub clutter_distractors: (usize, usize),
    pub dimension_length: (f64, f64),
    /// Probability that a placed object is a tolerance frame.
    pub tolerance_fraction: f64,
    pub grammar: DimensionTextGrammar,
    pub augment: AugmentRanges,
    pub augment_part: bool,
    pub augment_clutter: bool,
    /// Largest fraction of a labeled box that other annotations may cover.
    pub max_occlusion: f64,
    /// Placement attempts per object.
    pub retry_budget: usize,
    /// Directory of raster crops added to the background library.
    pub crop_dir: Option<PathBuf>,
}

impl Default for ComposerConfig {
    fn default() -> Self {
        ComposerConfig {
            seed: 0,
            width_range: (MIN_DRAWING_WIDTH, MAX_DRAWING_WIDTH),
            part_objects: (10, 16),
            clutter_objects: 40,
            clutter_distractors: (20, 60),
            dimension_length: (0.0, MAX_DIMENSION_LENGTH),
            tolerance_fraction: 0.25,
            grammar: DimensionTextGrammar::default(),
            augment: AugmentRanges::default(),
            augment_part: true,
            augment_clutter: false,
            max_occlusion: 0.2,
            retry_budget: 100,
            crop_dir: None,
        }
    }
}

impl ComposerConfig {
    pub fn validate(&self) -> Result<()> {
        let (wl, wh) = self.width_range;
        if wl > wh || wl < MIN_DRAWING_WIDTH || wh > MAX_DRAWING_WIDTH {
            return Err(Error::domain(format!(
                "width range [{wl}, {wh}] must be non-empty and within [{MIN_DRAWING_WIDTH}, {MAX_DRAWING_WIDTH}]"
            )));
        }
        let (ol, oh) = self.part_objects;
        if ol == 0 || ol > oh {
            return Err(Error::domain(format!(
                "part object range [{ol}, {oh}] must be positive and non-empty"
            )));
        }
        if self.clutter_objects == 0 {
            return Err(Error::domain("clutter object count must be positive"));
        }
        let (dl, dh) = self.clutter_distractors;
        if dl > dh {
            return Err(Error::domain(format!(
                "distractor range [{dl}, {dh}] is empty"
            )));
        }
        let (ll, lh) = self.dimension_length;
        if !(ll >= 0.0 && ll <= lh && lh <= MAX_DIMENSION_LENGTH) {
            return Err(Error::domain(format!(
                "dimension length range [{ll}, {lh}] must lie within [0, {MAX_DIMENSION_LENGTH}]"
            )));
        }
        if !(0.0..=1.0).contains(&self.tolerance_fraction) {
            return Err(Error::domain("tolerance fraction must be in [0, 1]"));
        }
        if !(0.0..=1.0).contains(&self.max_occlusion) {
            return Err(Error::domain("max occlusion must be in [0, 1]"));
        }
        if self.retry_budget == 0 {
            return Err(Error::domain("retry budget must be positive"));
        }
        self.grammar.validate()?;
        self.augment.validate()
    }
}

/// Placement bookkeeping for the labeled objects of one scene.
struct Placed {
    boxes: Vec<BBox>,
    ink: Vec<Vec<Rect>>,
}

impl Placed {
    fn new() -> Self {
        Placed {
            boxes: Vec::new(),
            ink: Vec::new(),
        }
    }

    fn covered(bbox: &BBox, ink: &[Rect]) -> f64 {
        let r = bbox.rect();
        ink.iter().map(|e| e.intersection_area(&r)).sum::<f64>() / bbox.area()
    }

    /// Accepts a candidate whose ink stays on the canvas, whose box overlaps
    /// no other labeled box, and which neither covers nor is covered by more
    /// than `max_occlusion` of any labeled box.
    fn admits(
        &self,
        canvas: &Rect,
        prims: &[Primitive],
        obj: &LabeledObject,
        max_occlusion: f64,
    ) -> Option<Vec<Rect>> {
        let ink: Vec<Rect> = prims.iter().map(Primitive::extent).collect();
        if ink.iter().any(|e| !canvas.contains_rect(e)) || !canvas.contains_rect(&obj.bbox.rect()) {
            return None;
        }
        let own = obj.bbox.rect().inflate(2.0);
        for (b, other) in self.boxes.iter().zip(&self.ink) {
            if own.overlaps(&b.rect())
                || Self::covered(b, &ink) > max_occlusion
                || Self::covered(&obj.bbox, other) > max_occlusion
            {
                return None;
            }
        }
        Some(ink)
    }

    fn push(&mut self, bbox: BBox, ink: Vec<Rect>) {
        self.boxes.push(bbox);
        self.ink.push(ink);
    }
}

/// Scene factory holding a validated config and any loaded raster crops.
#[derive(Debug, Clone)]
pub struct Composer {
    cfg: ComposerConfig,
    crops: Vec<RasterCrop>,
    library: Vec<DistractorEntry>,
}

impl Composer {
    pub fn new(cfg: ComposerConfig) -> Result<Self> {
        cfg.validate()?;
        let crops = match &cfg.crop_dir {
            Some(dir) => load_crop_dir(dir)?,
            None => Vec::new(),
        };
        Ok(Composer {
            cfg,
            crops,
            library: distractor_library(),
        })
    }

    pub fn with_crops(mut self, crops: Vec<RasterCrop>) -> Self {
        self.crops = crops;
        self
    }

    pub fn config(&self) -> &ComposerConfig {
        &self.cfg
    }

    pub fn crops(&self) -> &[RasterCrop] {
        &self.crops
    }

    pub fn compose(&self, image_type: ImageType, image_seed: u64) -> Result<Scene> {
        match image_type {
            ImageType::Part => self.part(image_seed),
            ImageType::Clutter => self.clutter(image_seed),
            ImageType::Characters => Ok(self.characters(image_seed)),
        }
    }

    fn canvas(&self, rng: &mut ChaCha8Rng, image_type: ImageType, seed: u64) -> Result<Scene> {
        let (lo, hi) = self.cfg.width_range;
        let (w, h) = canvas_size_for(rng.random_range(lo..=hi))?;
        Ok(Scene::blank(w, h, image_type, seed))
    }

    fn dimension_length(&self, rng: &mut ChaCha8Rng) -> f64 {
        let (lo, hi) = self.cfg.dimension_length;
        if lo == hi {
            lo
        } else {
            rng.random_range(lo..=hi)
        }
    }

    fn orientation(rng: &mut ChaCha8Rng) -> Orientation {
        if rng.random_bool(0.5) {
            Orientation::Horizontal
        } else {
            Orientation::Vertical
        }
    }

    /// A tolerance frame centered `reach` pixels out from `anchor`, with a
    /// leader back to it.
    fn frame_near(
        &self,
        rng: &mut ChaCha8Rng,
        anchor: &FeatureAnchor,
        reach: f64,
    ) -> Result<(Vec<Primitive>, LabeledObject)> {
        let symbol = *TOLERANCE_TYPE_GLYPHS.choose(rng).unwrap();
        let value = sample_tolerance_value(rng);
        let datum = *FIT_LETTERS.choose(rng).unwrap();
        let orientation = Self::orientation(rng);
        let (mut prims, mut obj) = make_tolerance_frame(
            Point::new(0.0, 0.0),
            orientation,
            symbol,
            &value,
            datum,
            rng,
        )?;
        let b = obj.bbox;
        let half = (b.w * anchor.normal.x.abs() + b.h * anchor.normal.y.abs()) / 2.0;
        let lateral = rng.random_range(-0.4..=0.4);
        let center = Point::new(
            anchor.at.x + anchor.normal.x * (reach + half) + anchor.normal.y.abs() * lateral * b.w,
            anchor.at.y + anchor.normal.y * (reach + half) + anchor.normal.x.abs() * lateral * b.h,
        );
        let (dx, dy) = (center.x - (b.x + b.w / 2.0), center.y - (b.y + b.h / 2.0));
        prims.iter_mut().for_each(|p| p.translate(dx, dy));
        obj.bbox.x += dx;
        obj.bbox.y += dy;
        let r = obj.bbox.rect();
        let from = Point::new(anchor.at.x.clamp(r.x0, r.x1), anchor.at.y.clamp(r.y0, r.y1));
        prims.extend(leader(from, anchor.at));
        Ok((prims, obj))
    }

    fn part(&self, seed: u64) -> Result<Scene> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut scene = self.canvas(&mut rng, ImageType::Part, seed)?;
        let (w, h) = (scene.width as f64, scene.height as f64);

        let rw = (w * rng.random_range(0.35..=0.6)).max(MIN_PART_REGION);
        let rh = (h * rng.random_range(0.2..=0.45)).max(MIN_PART_REGION);
        let margin = 60.0;
        let region = BBox::new(
            rng.random_range(margin..=w - rw - margin),
            rng.random_range(margin..=h - rh - margin),
            rw,
            rh,
        )?;
        let part = generate_part(rng.random(), region)?;
        scene.primitives = part.primitives();

        let (lo, hi) = self.cfg.part_objects;
        let wanted = rng.random_range(lo..=hi);
        let canvas = Rect::new(1.0, 1.0, w - 1.0, h - 1.0);
        let mut placed = Placed::new();
        for k in 0..wanted {
            let mut done = false;
            for _ in 0..self.cfg.retry_budget {
                let anchor = *part.anchors.choose(&mut rng).unwrap();
                let (prims, obj) = if rng.random_bool(self.cfg.tolerance_fraction) {
                    let reach = rng.random_range(30.0..=90.0);
                    self.frame_near(&mut rng, &anchor, reach)?
                } else {
                    let o = Self::orientation(&mut rng);
                    let len = self.dimension_length(&mut rng);
                    let text = self.cfg.grammar.sample(&mut rng);
                    make_dimension(&anchor, o, len, &text, &mut rng)?
                };
                if let Some(ink) = placed.admits(&canvas, &prims, &obj, self.cfg.max_occlusion) {
                    placed.push(obj.bbox, ink);
                    scene.primitives.extend(prims);
                    scene.labeled_objects.push(obj);
                    done = true;
                    break;
                }
            }
            if !done {
                return Err(Error::Composition {
                    seed,
                    message: format!(
                        "object {k} of {wanted} not placed within {} attempts",
                        self.cfg.retry_budget
                    ),
                });
            }
        }
        Ok(scene)
    }

    fn clutter(&self, seed: u64) -> Result<Scene> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut scene = self.canvas(&mut rng, ImageType::Clutter, seed)?;
        let (w, h) = (scene.width as f64, scene.height as f64);

        let (dl, dh) = self.cfg.clutter_distractors;
        let count = rng.random_range(dl..=dh);
        let sources = self.library.len() + self.crops.len();
        for _ in 0..count {
            let pick = rng.random_range(0..sources);
            let mut prims = if pick < self.library.len() {
                let e = self.library[pick];
                let scale = rng.random_range(SCALE_RANGE.0..=SCALE_RANGE.1);
                make_distractor(e.kind, e.variant, scale)?
            } else {
                vec![self.crops[pick - self.library.len()].primitive(Point::new(0.0, 0.0))]
            };
            let ext = extent(&prims);
            let x = rng.random_range(0.0..=(w - ext.width()).max(0.0));
            let y = rng.random_range(0.0..=(h - ext.height()).max(0.0));
            prims.iter_mut().for_each(|p| p.translate(x, y));
            scene.background_extents.push(ext.translate(x, y));
            scene.primitives.extend(prims);
        }

        let canvas = Rect::new(1.0, 1.0, w - 1.0, h - 1.0);
        let mut placed = Placed::new();
        let normals = [
            Point::new(0.0, -1.0),
            Point::new(0.0, 1.0),
            Point::new(-1.0, 0.0),
            Point::new(1.0, 0.0),
        ];
        for k in 0..self.cfg.clutter_objects {
            let mut done = false;
            for _ in 0..self.cfg.retry_budget {
                let anchor = FeatureAnchor {
                    at: Point::new(rng.random_range(0.0..w), rng.random_range(0.0..h)),
                    normal: *normals.choose(&mut rng).unwrap(),
                };
                let (prims, obj) = if rng.random_bool(self.cfg.tolerance_fraction) {
                    let reach = rng.random_range(20.0..=80.0);
                    self.frame_near(&mut rng, &anchor, reach)?
                } else {
                    let o = Self::orientation(&mut rng);
                    let len = self.dimension_length(&mut rng);
                    let text = self.cfg.grammar.sample(&mut rng);
                    make_dimension(&anchor, o, len, &text, &mut rng)?
                };
                if let Some(ink) = placed.admits(&canvas, &prims, &obj, self.cfg.max_occlusion) {
                    placed.push(obj.bbox, ink);
                    scene.primitives.extend(prims);
                    scene.labeled_objects.push(obj);
                    done = true;
                    break;
                }
            }
            if !done {
                return Err(Error::Composition {
                    seed,
                    message: format!(
                        "object {k} of {} not placed within {} attempts",
                        self.cfg.clutter_objects, self.cfg.retry_budget
                    ),
                });
            }
        }
        Ok(scene)
    }

    fn characters(&self, seed: u64) -> Scene {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut scene = Scene::blank(
            CHARACTER_WIDTH,
            CHARACTER_HEIGHT,
            ImageType::Characters,
            seed,
        );
        let n = rng.random_range(2..=4);
        let text: String = (0..n)
            .map(|_| *ALPHABET.choose(&mut rng).unwrap())
            .collect();
        let stroke = rng.random_range(1.2..=1.8);
        let (cw, ch) = (CHARACTER_WIDTH as f64, CHARACTER_HEIGHT as f64);
        // largest glyph height whose ink fits with a 2 px border
        let em = font::text_advance(&text, 1.0).expect("alphabet glyphs");
        let fit = ((cw - 4.0 - stroke) / em).min((ch - 4.0 - stroke) / 1.2);
        let glyph_h = rng
            .random_range(11.0..=18.0f64)
            .min(fit)
            .max(font::MIN_GLYPH_HEIGHT);

        let ink0 = font::text_ink_rect(
            &text,
            glyph_h,
            stroke,
            Orientation::Horizontal,
            Point::new(0.0, 0.0),
        )
        .expect("alphabet glyphs");
        let slack_x = (cw - 2.0 - ink0.width()).max(0.0);
        let slack_y = (ch - 2.0 - ink0.height()).max(0.0);
        let ox = 1.0 + rng.random_range(0.0..=slack_x) - ink0.x0;
        let oy = 1.0 + rng.random_range(0.0..=slack_y) - ink0.y0;
        let anchor = Point::new(ox, oy);
        let ink = ink0.translate(ox, oy);
        let bbox = Rect::new(
            ink.x0.max(0.0),
            ink.y0.max(0.0),
            ink.x1.min(cw),
            ink.y1.min(ch),
        )
        .to_bbox()
        .expect("text has ink");
        debug_assert!(alphabet::check_text(&text).is_ok());
        scene.primitives.push(Primitive::Text {
            text: text.clone(),
            anchor,
            orientation: Orientation::Horizontal,
            height: glyph_h,
            width: stroke,
        });
        scene.labeled_objects.push(LabeledObject {
            class: ClassLabel::DimensionHorizontal,
            bbox,
            transcript: text,
            orientation: Orientation::Horizontal,
        });
        scene
    }
}

pub fn compose_type1(image_seed: u64, cfg: &ComposerConfig) -> Result<Scene> {
    Composer::new(cfg.clone())?.compose(ImageType::Part, image_seed)
}

pub fn compose_type2(image_seed: u64, cfg: &ComposerConfig) -> Result<Scene> {
    Composer::new(cfg.clone())?.compose(ImageType::Clutter, image_seed)
}

pub fn compose_type3(image_seed: u64, cfg: &ComposerConfig) -> Result<Scene> {
    Composer::new(cfg.clone())?.compose(ImageType::Characters, image_seed)
}
