use cpree_core::background::{BackgroundLaw, InitLaw};
use cpree_core::dynamics::{boundary_stats, max_separated};
use cpree_core::estimators::{
    check_orthant_inequalities, estimate_agreement_cover, estimate_fstc, estimate_survival, fstc_event, scan_critical,
    FstcVariant,
};
use cpree_core::{EventLog, LatticeBox, Params};
use proptest::prelude::*;

fn pool(threads: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap()
}

#[test]
fn estimates_do_not_depend_on_worker_count() {
    let params = Params::new(1, 1.0, 1.2, 0.4, 0.6).unwrap();
    let law = InitLaw::new(BackgroundLaw::Stationary, vec![vec![0]]);
    let run = || estimate_survival(&params, &law, LatticeBox::closed(10), 5.0, 300, 77).unwrap();
    let one = pool(1).install(run);
    let many = pool(8).install(run);
    assert_eq!(one, many);
    let other_seed = estimate_survival(&params, &law, LatticeBox::closed(10), 5.0, 300, 78).unwrap();
    assert_ne!(one.config_digest, "");
    assert_eq!(one.config_digest, other_seed.config_digest);
}

#[test]
fn agreement_cover_is_monotone_and_high_late() {
    let params = Params::new(1, 2.0, 1.0, 1.0, 0.5).unwrap();
    let est = estimate_agreement_cover(&params, &[1.0, 2.0, 4.0, 8.0], 10.0, LatticeBox::closed(40), 1_000, 5).unwrap();
    assert!(est.windows(2).all(|w| w[0].1.value <= w[1].1.value));
    assert!(est[3].1.value > 0.9, "{}", est[3].1.value);
}

#[test]
fn critical_scan_is_monotone_in_p() {
    let params = Params::new(1, 2.0, 3.0, 0.3, 0.5).unwrap();
    let grid: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
    let law = InitLaw::new(BackgroundLaw::Stationary, vec![vec![0]]);
    let scan = scan_critical(&params, &grid, &law, LatticeBox::closed(15), 15.0, 400, 0.5, 1).unwrap();
    assert!(scan.estimates.windows(2).all(|w| w[0].value <= w[1].value));
    if let Some(pc) = scan.pseudo_critical {
        assert!((0.0..=1.0).contains(&pc));
    }
    let flat = Params::new(1, 2.0, 0.8, 0.8, 0.5).unwrap();
    let scan = scan_critical(&flat, &grid, &law, LatticeBox::closed(15), 10.0, 200, 0.5, 1).unwrap();
    assert!(scan.p_invariant && scan.pseudo_critical.is_none());
    assert!(scan.estimates.windows(2).all(|w| w[0].value == w[1].value));
}

#[test]
fn orthant_inequalities_hold_at_desk_scale() {
    let params = Params::new(1, 1.0, 1.0, 0.5, 0.5).unwrap();
    let report = check_orthant_inequalities(&params, 2, 8, 8.0, &[1, 2, 4], &[1, 2], 2_000, 3).unwrap();
    assert_eq!(report.rows.len(), 5);
    assert!(report.all_hold(), "{:#?}", report.rows);
}

#[test]
fn fstc_probabilities_are_proportions() {
    let params = Params::new(1, 2.0, 0.3, 0.2, 0.5).unwrap();
    for variant in [FstcVariant::Fstc1, FstcVariant::Fstc2, FstcVariant::Fstc3] {
        let e = estimate_fstc(&params, 1, 4, 3.0, variant, 100, 2).unwrap();
        assert!((0.0..=1.0).contains(&e.value));
    }
    assert!(estimate_fstc(&params, 4, 4, 3.0, FstcVariant::Fstc1, 10, 2).is_err());
}

fn brute_max_separated(times: &[f64]) -> usize {
    let n = times.len();
    (0u32..1 << n)
        .filter(|mask| {
            let chosen: Vec<f64> = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| times[i]).collect();
            chosen.iter().enumerate().all(|(i, a)| chosen[i + 1..].iter().all(|b| (a - b).abs() >= 1.0))
        })
        .map(|mask| mask.count_ones() as usize)
        .max()
        .unwrap_or(0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn greedy_separation_is_optimal(mut times in prop::collection::vec(0.0f64..6.0, 0..12)) {
        times.sort_by(f64::total_cmp);
        prop_assert_eq!(max_separated(&times), brute_max_separated(&times));
    }

    #[test]
    fn fstc1_grows_with_l(seed in any::<u64>(), l in 3u32..6) {
        let params = Params::new(1, 2.0, 0.4, 0.2, 0.5).unwrap();
        let (t, n) = (2.0, 1);
        let (w_small, h) = FstcVariant::Fstc1.window(1, n, l, t);
        let (w_big, _) = FstcVariant::Fstc1.window(1, n, l + 1, t);
        let small = EventLog::build(params, LatticeBox::closed(w_small), h, seed).unwrap();
        let big = EventLog::build(params, LatticeBox::closed(w_big), h, seed).unwrap();
        let a = fstc_event(&small, n, l, t, FstcVariant::Fstc1).unwrap();
        let b = fstc_event(&big, n, l + 1, t, FstcVariant::Fstc1).unwrap();
        prop_assert!(a.is_none() || b.is_some());
    }

    #[test]
    fn boundary_counts_are_ordered(seed in any::<u64>()) {
        let params = Params::new(2, 1.0, 0.5, 0.3, 0.5).unwrap();
        let log = EventLog::build(params, LatticeBox::closed(4), 3.0, seed).unwrap();
        let stats = boundary_stats(&log, &[vec![0, 0]], 4, 3.0).unwrap();
        prop_assert!(stats.n_plus_count <= stats.n_count);
        let per_line: usize = stats.side_points.values().map(|v| max_separated(v)).sum();
        prop_assert_eq!(per_line, stats.n_count);
    }
}
