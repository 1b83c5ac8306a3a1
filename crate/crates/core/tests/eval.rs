use framepick::eval::{evaluate, f1_score, match_peaks, score, Scores};
use framepick::Peak;
use proptest::prelude::*;

fn peak(mz: f64, score: f64) -> Peak {
    Peak { bin: 0, mz, score }
}

fn peaks(mzs: &[f64]) -> Vec<Peak> {
    mzs.iter().map(|&m| peak(m, 1.0)).collect()
}

#[test]
fn hand_example_with_miss_and_false_hit() {
    let reference = peaks(&[1000.0, 2000.0, 3000.0, 4000.0]);
    let detected = vec![
        peak(1004.0, 2.0),
        peak(2030.0, 1.0),
        peak(2500.0, 5.0),
        peak(3990.0, 0.5),
    ];
    let m = match_peaks(&detected, &reference, 0.01).unwrap();
    let s = Scores::from_matching(&m);
    assert_eq!((s.n_correct, s.n_false), (2, 2));
    assert_eq!(s.sensitivity, 0.5);
    assert_eq!(s.fdr, 0.5);
    assert_eq!(s.f1, 0.5);
    assert_eq!(m.unmatched_reference, vec![1, 2]);
}

#[test]
fn higher_scores_claim_first() {
    // both detections fit the single reference; the stronger one wins even
    // though the weaker one is closer
    let reference = peaks(&[500.0]);
    let detected = vec![peak(500.1, 1.0), peak(503.0, 9.0)];
    let m = match_peaks(&detected, &reference, 0.01).unwrap();
    assert_eq!(m.pairs, vec![(1, 0)]);
}

#[test]
fn nearest_reference_is_taken() {
    let reference = peaks(&[100.0, 101.0]);
    let m = match_peaks(&[peak(100.8, 1.0)], &reference, 0.01).unwrap();
    assert_eq!(m.pairs, vec![(0, 1)]);
}

#[test]
fn pooled_and_mean_differ() {
    let runs = vec![
        (peaks(&[100.0]), peaks(&[100.0])),
        (vec![], peaks(&[100.0, 200.0, 300.0])),
    ];
    let r = evaluate(&runs, 0.01).unwrap();
    assert_eq!(r.sensitivity, 0.25);
    assert_eq!(r.fdr, 0.0);
    assert_eq!(r.mean_sensitivity, 0.5);
    assert!((r.f1 - f1_score(0.25, 0.0)).abs() < 1e-15);
    assert_eq!(r.mean_f1, 0.5);
}

fn mz_list(max: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(500.0f64..5000.0, 0..max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn f1_is_the_harmonic_mean(s in 1e-6f64..1.0, fdr in 0.0f64..0.999_999) {
        let p = 1.0 - fdr;
        let f = f1_score(s, fdr);
        prop_assert!((f - 2.0 / (1.0 / p + 1.0 / s)).abs() <= 1e-12);
        // swapping precision and sensitivity leaves F1 unchanged
        prop_assert!((f - f1_score(p, 1.0 - s)).abs() <= 1e-12);
        prop_assert!(f <= s.max(p) + 1e-15 && f >= s.min(p) - 1e-15);
    }

    #[test]
    fn matching_is_one_to_one_within_tolerance(det in mz_list(30), refs in mz_list(30), tol in 1e-4f64..0.05) {
        let d: Vec<Peak> = det.iter().enumerate().map(|(i, &m)| peak(m, i as f64)).collect();
        let r = peaks(&refs);
        let m = match_peaks(&d, &r, tol).unwrap();
        let mut seen_d = vec![false; d.len()];
        let mut seen_r = vec![false; r.len()];
        for &(a, b) in &m.pairs {
            prop_assert!(!seen_d[a] && !seen_r[b]);
            seen_d[a] = true;
            seen_r[b] = true;
            prop_assert!((d[a].mz - r[b].mz).abs() <= tol * r[b].mz);
        }
        prop_assert_eq!(m.pairs.len() + m.unmatched_detected.len(), d.len());
        prop_assert_eq!(m.pairs.len() + m.unmatched_reference.len(), r.len());
        // an unmatched detection has no free reference in reach
        for &a in &m.unmatched_detected {
            for (b, p) in r.iter().enumerate() {
                prop_assert!(seen_r[b] || (d[a].mz - p.mz).abs() > tol * p.mz);
            }
        }
    }

    #[test]
    fn separated_references_count_covered_ones(
        base in prop::collection::vec(0usize..40, 0..15),
        jitter in prop::collection::vec(-0.009f64..0.009, 15),
        extra in mz_list(10),
    ) {
        // references at least 5% apart cannot compete for one detection
        let mut bins = base.clone();
        bins.sort_unstable();
        bins.dedup();
        let refs: Vec<f64> = bins.iter().map(|&b| 1000.0 * 1.05f64.powi(b as i32)).collect();
        let mut det: Vec<f64> = refs.iter().zip(&jitter).map(|(m, j)| m * (1.0 + j)).collect();
        det.extend(extra);
        let covered = refs
            .iter()
            .filter(|&&r| det.iter().any(|&d| (d - r).abs() <= 0.01 * r))
            .count();
        let m = match_peaks(&peaks(&det), &peaks(&refs), 0.01).unwrap();
        prop_assert_eq!(m.pairs.len(), covered);
    }

    #[test]
    fn spurious_peaks_never_help(det in mz_list(20), refs in mz_list(20), spurious in 10_000.0f64..20_000.0) {
        let refs = peaks(&refs);
        let base = Scores::from_matching(&match_peaks(&peaks(&det), &refs, 0.01).unwrap());
        let mut more = det.clone();
        more.push(spurious);
        let after = Scores::from_matching(&match_peaks(&peaks(&more), &refs, 0.01).unwrap());
        prop_assert!(after.sensitivity <= base.sensitivity);
        prop_assert!(after.fdr >= base.fdr);
    }

    #[test]
    fn reference_order_does_not_matter(det in mz_list(20), refs in mz_list(20), rot in 0usize..20) {
        let d = peaks(&det);
        let r = peaks(&refs);
        let mut shuffled = r.clone();
        if !shuffled.is_empty() {
            let k = rot % shuffled.len();
            shuffled.rotate_left(k);
            shuffled.reverse();
        }
        let a = Scores::from_matching(&match_peaks(&d, &r, 0.01).unwrap());
        let b = Scores::from_matching(&match_peaks(&d, &shuffled, 0.01).unwrap());
        prop_assert_eq!(a, b);
    }

    #[test]
    fn counts_formula(n_ref in 0usize..50, n_det in 0usize..50, frac in 0.0f64..1.0) {
        let n_correct = ((n_ref.min(n_det) as f64) * frac) as usize;
        let s = score(n_ref, n_det, n_correct);
        if n_ref > 0 {
            prop_assert_eq!(s.sensitivity, n_correct as f64 / n_ref as f64);
        }
        if n_det > 0 {
            prop_assert_eq!(s.fdr, (n_det - n_correct) as f64 / n_det as f64);
        }
        prop_assert!((0.0..=1.0).contains(&s.f1));
    }
}
