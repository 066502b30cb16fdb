use std::collections::BTreeSet;

use techdraw_core::alphabet::{self, ALPHABET};
use techdraw_core::scene::{CHARACTER_HEIGHT, CHARACTER_WIDTH};
use techdraw_core::*;

fn cfg() -> ComposerConfig {
    ComposerConfig::default()
}

/// Box size in the text-aligned frame: vertical objects swap w and h.
fn aligned(o: &LabeledObject) -> (f64, f64) {
    match o.orientation {
        Orientation::Horizontal => (o.bbox.w, o.bbox.h),
        Orientation::Vertical => (o.bbox.h, o.bbox.w),
    }
}

/// Kolmogorov-Smirnov distance between integer samples and the uniform
/// distribution over `lo..=hi`.
fn ks_uniform_int(samples: &mut [u32], lo: u32, hi: u32) -> f64 {
    samples.sort_unstable();
    let n = samples.len() as f64;
    let span = (hi - lo + 1) as f64;
    let cdf = |v: u32| ((v - lo + 1) as f64 / span).clamp(0.0, 1.0);
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < samples.len() {
        let v = samples[i];
        let j = samples.partition_point(|&x| x <= v);
        let below = i as f64 / n;
        let upto = j as f64 / n;
        let prev = if v == lo { 0.0 } else { cdf(v - 1) };
        d = d.max((upto - cdf(v)).abs()).max((below - prev).abs());
        i = j;
    }
    d
}

#[test]
fn part_drawings_satisfy_counts_and_sizes() {
    let c = cfg();
    let mut widths = Vec::new();
    let (mut dim, mut tol) = ((0.0, 0.0, 0usize), (0.0, 0.0, 0usize));
    for i in 0..400 {
        let s = compose_type1(derive_image_seed(21, i), &c).unwrap();
        assert!((10..=16).contains(&s.labeled_objects.len()));
        assert!((1200..=1500).contains(&s.width));
        assert!((s.height as f64 - s.width as f64 * 2f64.sqrt()).abs() <= 1.0);
        assert!(validate_scene(&s).is_empty());
        for o in &s.labeled_objects {
            assert!(o.bbox.inside_canvas(s.width as f64, s.height as f64));
            let (w, h) = aligned(o);
            let acc = if o.class == ClassLabel::FormPositionTolerance {
                &mut tol
            } else {
                &mut dim
            };
            acc.0 += w;
            acc.1 += h;
            acc.2 += 1;
        }
        widths.push(s.width);
    }
    let within = |v: f64, target: f64| (v - target).abs() <= 0.2 * target;
    let (dw, dh) = (dim.0 / dim.2 as f64, dim.1 / dim.2 as f64);
    let (tw, th) = (tol.0 / tol.2 as f64, tol.1 / tol.2 as f64);
    assert!(
        within(dw, 45.0) && within(dh, 25.0),
        "dimension mean {dw:.1}x{dh:.1}"
    );
    assert!(
        within(tw, 100.0) && within(th, 25.0),
        "tolerance mean {tw:.1}x{th:.1}"
    );
    let d = ks_uniform_int(&mut widths, 1200, 1500);
    assert!(d < 0.08, "KS distance {d}");
}

#[test]
fn widths_follow_uniform_distribution() {
    let c = cfg();
    let mut widths: Vec<u32> = (0..1000)
        .map(|i| compose_type1(derive_image_seed(1000, i), &c).unwrap().width)
        .collect();
    let d = ks_uniform_int(&mut widths, 1200, 1500);
    assert!(d < 0.05, "KS distance {d}");
}

#[test]
fn composition_is_deterministic() {
    let c = Composer::new(cfg()).unwrap();
    for t in [ImageType::Part, ImageType::Clutter, ImageType::Characters] {
        for seed in [0, 1, u64::MAX] {
            let a = serde_json::to_vec(&c.compose(t, seed).unwrap()).unwrap();
            let b = serde_json::to_vec(&c.compose(t, seed).unwrap()).unwrap();
            assert_eq!(a, b);
        }
    }
}

#[test]
fn scenes_survive_json_round_trip() {
    let c = Composer::new(cfg()).unwrap();
    for t in [ImageType::Part, ImageType::Clutter, ImageType::Characters] {
        let s = c.compose(t, 42).unwrap();
        let back: Scene = serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
        assert_eq!(back, s);
    }
}

#[test]
fn clutter_sheets_hold_forty_objects() {
    let c = cfg();
    let mut overlapping = 0;
    let (mut h, mut v) = (0usize, 0usize);
    for i in 0..300 {
        let s = compose_type2(derive_image_seed(3, i), &c).unwrap();
        assert_eq!(s.labeled_objects.len(), 40);
        assert!(validate_scene(&s).is_empty());
        let e = &s.background_extents;
        if (0..e.len()).any(|a| (a + 1..e.len()).any(|b| e[a].overlaps(&e[b]))) {
            overlapping += 1;
        }
        for o in &s.labeled_objects {
            match o.orientation {
                Orientation::Horizontal => h += 1,
                Orientation::Vertical => v += 1,
            }
        }
    }
    assert!(overlapping >= 1);
    let n = (h + v) as f64;
    assert!(
        h as f64 / n > 0.25 && v as f64 / n > 0.25,
        "{h} horizontal, {v} vertical"
    );
}

#[test]
fn orientation_mix_over_many_clutter_sheets() {
    let c = cfg();
    let (mut h, mut n) = (0usize, 0usize);
    for i in 0..1000 {
        let s = compose_type2(derive_image_seed(8, i), &c).unwrap();
        h += s
            .labeled_objects
            .iter()
            .filter(|o| o.orientation == Orientation::Horizontal)
            .count();
        n += s.labeled_objects.len();
    }
    let f = h as f64 / n as f64;
    assert!(f > 0.25 && f < 0.75, "horizontal fraction {f}");
}

#[test]
fn distractors_add_no_annotations() {
    let seed = derive_image_seed(4, 4);
    for range in [(0, 0), (20, 20), (60, 60)] {
        let c = ComposerConfig {
            clutter_distractors: range,
            ..cfg()
        };
        let s = compose_type2(seed, &c).unwrap();
        assert_eq!(s.labeled_objects.len(), 40);
        assert_eq!(s.background_extents.len(), range.0);
    }
}

#[test]
fn labeled_boxes_are_not_heavily_occluded() {
    let c = cfg();
    for i in 0..50 {
        let s = compose_type2(derive_image_seed(5, i), &c).unwrap();
        for (a, oa) in s.labeled_objects.iter().enumerate() {
            for ob in &s.labeled_objects[a + 1..] {
                assert!(
                    oa.bbox.intersection_area(&ob.bbox) <= 0.2 * oa.bbox.area().min(ob.bbox.area())
                );
            }
        }
    }
}

#[test]
fn character_samples_cover_the_alphabet() {
    let c = cfg();
    let mut seen = BTreeSet::new();
    for i in 0..10_000 {
        let s = compose_type3(derive_image_seed(77, i), &c).unwrap();
        assert_eq!((s.width, s.height), (CHARACTER_WIDTH, CHARACTER_HEIGHT));
        assert_eq!(s.labeled_objects.len(), 1);
        assert_eq!(
            s.primitives
                .iter()
                .filter(|p| matches!(p, Primitive::Text { .. }))
                .count(),
            1
        );
        let t = &s.labeled_objects[0].transcript;
        assert!((2..=4).contains(&t.chars().count()), "{t}");
        assert!(t.chars().all(alphabet::contains));
        seen.extend(t.chars());
    }
    assert_eq!(
        seen.len(),
        ALPHABET.len(),
        "missing {:?}",
        ALPHABET
            .iter()
            .filter(|g| !seen.contains(g))
            .collect::<Vec<_>>()
    );
}

#[test]
fn image_seeds_do_not_collide() {
    let mut rng = 0x1234_5678_9abc_def0u64;
    let mut next = || {
        rng = rng
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        rng
    };
    for _ in 0..1_000_000 {
        let s = next();
        let i = next() >> 20;
        assert_ne!(derive_image_seed(s, 0), derive_image_seed(s, 1));
        assert_ne!(
            derive_image_seed(s, i),
            derive_image_seed(s.wrapping_add(1), i)
        );
        assert_eq!(derive_image_seed(s, i), derive_image_seed(s, i));
    }
}

#[test]
fn invalid_configs_are_rejected() {
    let bad = [
        ComposerConfig {
            width_range: (1100, 1500),
            ..cfg()
        },
        ComposerConfig {
            part_objects: (16, 10),
            ..cfg()
        },
        ComposerConfig {
            clutter_objects: 0,
            ..cfg()
        },
        ComposerConfig {
            dimension_length: (0.0, 400.0),
            ..cfg()
        },
        ComposerConfig {
            max_occlusion: 1.5,
            ..cfg()
        },
    ];
    for c in bad {
        assert!(matches!(Composer::new(c), Err(Error::Domain(_))));
    }
}
