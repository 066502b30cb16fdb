mod common;

use common::oracle;
use proptest::prelude::*;
use techdraw_core::eval::{average_precision, cer_stats, CerMode, Interpolation, Scored};
use techdraw_core::*;

/// Returns whether the instance had a partial AP, so the corpus is known to
/// exercise more than the trivial cases.
fn check_instance(seed: u64) -> bool {
    let (gt, preds) = oracle::micro_instance(seed);
    let want = oracle::evaluate(&gt, &preds, 0.5);
    if want.total == 0 {
        assert!(evaluate(&gt, &preds, &EvalOptions::default()).is_err());
        return false;
    }
    let got = evaluate(&gt, &preds, &EvalOptions::default()).unwrap();
    for (c, w) in got.per_class.iter().zip(want.ap) {
        match (c.ap, w) {
            (Some(a), Some(b)) => assert!((a - b).abs() <= 1e-9, "seed {seed}: AP {a} vs {b}"),
            (a, b) => assert_eq!(a, b, "seed {seed}"),
        }
    }
    assert!((got.map - want.map).abs() <= 1e-9, "seed {seed}");
    assert_eq!(got.detected, want.detected, "seed {seed}");
    assert_eq!(got.total, want.total);
    match got.recognition {
        Some(r) => assert_eq!(
            (r.edits, r.reference_chars),
            (want.edits, want.chars),
            "seed {seed}"
        ),
        None => assert_eq!(want.chars, 0),
    }
    want.ap.iter().flatten().any(|&a| a > 0.0 && a < 1.0)
}

#[test]
fn evaluate_matches_brute_force_oracle() {
    let partial = (0..500).filter(|&seed| check_instance(seed)).count();
    assert!(partial > 100, "only {partial} instances with partial AP");
}

#[test]
fn levenshtein_matches_dp_oracle() {
    let mut rng = oracle::rng(99);
    for _ in 0..2000 {
        let (a, b) = oracle::random_pair(&mut rng);
        assert_eq!(levenshtein(&a, &b), oracle::edit_distance(&a, &b));
    }
}

#[test]
fn perfect_predictions_score_one() {
    let (gt, _) = oracle::micro_instance(4);
    let preds = PredictionSet::new(
        gt.images
            .iter()
            .flat_map(|g| {
                g.objects.iter().map(|o| Prediction {
                    image: g.file_name.clone(),
                    class: o.class,
                    bbox: o.bbox,
                    confidence: 1.0,
                    transcript: Some(o.transcript.clone()),
                })
            })
            .collect(),
    )
    .unwrap();
    let r = evaluate(&gt, &preds, &EvalOptions::default()).unwrap();
    assert_eq!(r.map, 1.0);
    assert_eq!(r.detection_rate.to_string(), "100.00%");
    assert_eq!(r.cer(), Some(0.0));

    let none = evaluate(&gt, &PredictionSet::default(), &EvalOptions::default()).unwrap();
    assert_eq!(none.map, 0.0);
    assert_eq!(none.detection_rate.to_string(), "0.00%");
    assert!(none.cer().is_none());
    assert!(none.to_table("x").contains("n/a"));
}

#[test]
fn unknown_images_are_rejected() {
    let (gt, _) = oracle::micro_instance(1);
    let preds = PredictionSet::new(vec![Prediction {
        image: "nope.png".into(),
        class: ClassLabel::DimensionHorizontal,
        bbox: BBox::new(0.0, 0.0, 1.0, 1.0).unwrap(),
        confidence: 0.5,
        transcript: None,
    }])
    .unwrap();
    match evaluate(&gt, &preds, &EvalOptions::default()) {
        Err(Error::Evaluation(m)) => assert!(m.contains("nope.png")),
        other => panic!("{other:?}"),
    }
}

fn bbox() -> impl Strategy<Value = BBox> {
    (-50.0..50.0f64, -50.0..50.0f64, 0.5..60.0f64, 0.5..60.0f64)
        .prop_map(|(x, y, w, h)| BBox::new(x, y, w, h).unwrap())
}

fn scored() -> impl Strategy<Value = Vec<Scored>> {
    prop::collection::vec((0.0..=1.0f64, any::<bool>()), 0..20).prop_map(|v| {
        v.into_iter()
            .map(|(confidence, true_positive)| Scored {
                confidence,
                true_positive,
            })
            .collect()
    })
}

proptest! {
    #[test]
    fn iou_is_symmetric_and_bounded(a in bbox(), b in bbox()) {
        let v = iou(&a, &b);
        prop_assert!((0.0..=1.0).contains(&v));
        prop_assert_eq!(v, iou(&b, &a));
        prop_assert!((iou(&a, &a) - 1.0).abs() < 1e-12);
        prop_assert!((v - oracle::iou(&a, &b)).abs() < 1e-9);
    }

    #[test]
    fn matching_claims_each_gt_once(
        preds in prop::collection::vec((bbox(), 0.0..=1.0f64), 0..8),
        gts in prop::collection::vec(bbox(), 0..8),
    ) {
        let m = match_detections(&preds, &gts, 0.5);
        let mut claimed: Vec<usize> = m.prediction.iter().flatten().copied().collect();
        let n = claimed.len();
        claimed.sort();
        claimed.dedup();
        prop_assert_eq!(claimed.len(), n);
        prop_assert_eq!(m.ground_truth.iter().filter(|&&g| g).count(), n);
        for (p, g) in m.prediction.iter().enumerate() {
            if let Some(g) = g {
                prop_assert!(iou(&preds[p].0, &gts[*g]) >= 0.5);
            }
        }
    }

    #[test]
    fn ap_ignores_gt_order(
        preds in prop::collection::vec((bbox(), 0.0..=1.0f64), 0..8),
        gts in prop::collection::vec(bbox(), 1..8),
        rot in 0usize..8,
    ) {
        let ap_for = |gts: &[BBox]| {
            let m = match_detections(&preds, gts, 0.5);
            let s: Vec<Scored> = preds.iter().zip(&m.prediction)
                .map(|((_, c), g)| Scored { confidence: *c, true_positive: g.is_some() })
                .collect();
            average_precision(&s, gts.len(), Interpolation::AllPoints).unwrap()
        };
        let mut rotated = gts.clone();
        let k = rot % rotated.len();
        rotated.rotate_left(k);
        let mut reversed = gts.clone();
        reversed.reverse();
        let a = ap_for(&gts);
        prop_assert!((a - ap_for(&rotated)).abs() < 1e-12);
        prop_assert!((a - ap_for(&reversed)).abs() < 1e-12);
    }

    #[test]
    fn ap_matches_prefix_oracle(s in scored(), extra in 0usize..5) {
        let positives = s.iter().filter(|x| x.true_positive).count() + extra;
        let mut order: Vec<usize> = (0..s.len()).collect();
        order.sort_by(|&a, &b| s[b].confidence.total_cmp(&s[a].confidence));
        let ranked: Vec<bool> = order.iter().map(|&i| s[i].true_positive).collect();
        let got = average_precision(&s, positives, Interpolation::AllPoints);
        let want = oracle::ap(&ranked, positives);
        match (got, want) {
            (Some(a), Some(b)) => prop_assert!((a - b).abs() < 1e-9),
            (a, b) => prop_assert_eq!(a, b),
        }
    }

    #[test]
    fn ap_is_permutation_invariant_without_ties(s in scored(), extra in 1usize..5, seed in any::<u64>()) {
        let mut s = s;
        for (k, x) in s.iter_mut().enumerate() {
            x.confidence = (x.confidence + k as f64 * 1e-6).min(1.0 + k as f64);
        }
        let positives = s.iter().filter(|x| x.true_positive).count() + extra;
        let a = average_precision(&s, positives, Interpolation::AllPoints).unwrap();
        let mut t = s.clone();
        let n = t.len().max(1);
        t.rotate_left((seed as usize) % n);
        t.reverse();
        let b = average_precision(&t, positives, Interpolation::AllPoints).unwrap();
        prop_assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn low_confidence_false_positive_never_raises_ap(s in scored(), extra in 1usize..5) {
        let positives = s.iter().filter(|x| x.true_positive).count() + extra;
        let before = average_precision(&s, positives, Interpolation::AllPoints).unwrap();
        let floor = s.iter().map(|x| x.confidence).fold(1.0, f64::min);
        let mut t = s.clone();
        t.push(Scored { confidence: floor / 2.0, true_positive: false });
        let after = average_precision(&t, positives, Interpolation::AllPoints).unwrap();
        prop_assert!(after <= before + 1e-12);
    }

    #[test]
    fn eleven_point_stays_in_unit_interval(s in scored(), extra in 1usize..5) {
        let positives = s.iter().filter(|x| x.true_positive).count() + extra;
        let v = average_precision(&s, positives, Interpolation::ElevenPoint).unwrap();
        prop_assert!((0.0..=1.0).contains(&v));
    }

    #[test]
    fn detection_rate_is_monotone(total in 1usize..5000, a in 0usize..5000, b in 0usize..5000) {
        let (lo, hi) = (a.min(b).min(total), a.max(b).min(total));
        prop_assert!(detection_rate(lo, total).unwrap() <= detection_rate(hi, total).unwrap());
        let exact = 100.0 * lo as f64 / total as f64;
        prop_assert!((detection_rate(lo, total).unwrap().value() - exact).abs() <= 0.005 + 1e-9);
    }

    #[test]
    fn cer_of_identity_is_zero(s in "[0-9.,FGHKM+\\-\u{2213}\u{2205}]{1,8}") {
        prop_assert_eq!(cer(&[(s.as_str(), s.as_str())], CerMode::Corpus).unwrap(), 0.0);
        prop_assert_eq!(levenshtein(&s, &s), 0);
    }

    #[test]
    fn cer_ignores_pair_order(
        pairs in prop::collection::vec(("[0-9,]{1,5}", "[0-9,]{0,5}"), 1..10),
    ) {
        let mut rev = pairs.clone();
        rev.reverse();
        let a = cer_stats(&pairs, CerMode::Corpus).unwrap();
        let b = cer_stats(&rev, CerMode::Corpus).unwrap();
        prop_assert_eq!(a.cer, b.cer);
        prop_assert!((a.correct.value() + a.cer * 100.0 - 100.0).abs() <= 0.005 + 1e-9);
    }
}
