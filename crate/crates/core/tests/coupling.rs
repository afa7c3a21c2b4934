use forest_fire::discrete::{mark_site, DiscreteFFP};
use forest_fire::harness::{coupled_run, limit_for_regime, limit_trajectory, run_marks};
use forest_fire::metrics::{delta_interval, uniform_grid, IntervalOrEmpty};
use forest_fire::scales::{box_half_width, compute_scales, pi_for_regime, Regime, Thresholds};

#[test]
fn matches_reproduce_the_marks() {
    let lambda = (-5.0f64).exp();
    let regime = Regime::Intermediate(0.5);
    let pi = pi_for_regime(lambda, &regime, &Thresholds::default()).unwrap();
    let run = coupled_run(lambda, pi, &regime, 1.5, 2.0, &uniform_grid(2.0, 16), 0.0, 3, 2).unwrap();
    let s = compute_scales(lambda, pi).unwrap();
    let h = box_half_width(&s, 1.5).unwrap();
    assert_eq!(run.marks, run_marks(3, 2, 1.5, 2.0).unwrap());
    assert_eq!(run.matches.len(), run.marks.len());
    for (m, &(site, raw)) in run.marks.iter().zip(&run.matches) {
        assert_eq!(site, mark_site(&s, h, m.x));
        assert!((raw / s.a - m.t).abs() < 1e-12);
    }
}

#[test]
fn early_cluster_is_microscopic_in_both() {
    // at t = 0.5 the cluster holds about λ^{-1/2} sites, well below m
    // once λ is small; the bound is asymptotic so only a majority is asked
    let lambda = (-10.0f64).exp();
    let regime = Regime::Fast;
    let pi = pi_for_regime(lambda, &regime, &Thresholds::default()).unwrap();
    let s = compute_scales(lambda, pi).unwrap();
    let mut close = 0;
    for run in 0..40 {
        let c = coupled_run(lambda, pi, &regime, 0.3, 1.0, &[0.0, 0.5], 0.0, 8, run).unwrap();
        if c.samples[1].delta <= 2.0 * s.m as f64 / s.n as f64 {
            close += 1;
        }
    }
    assert!(close >= 24, "{close}");
}

#[test]
fn slow_regime_engine_runs() {
    // ratio n/(aπ) ≈ 100 needs a small λ
    let lambda = (-12.0f64).exp();
    let regime = Regime::Slow(0.2);
    let pi = pi_for_regime(lambda, &regime, &Thresholds::default()).unwrap();
    let c = coupled_run(lambda, pi, &regime, 0.5, 2.0, &uniform_grid(2.0, 32), 0.0, 1, 0).unwrap();
    assert!(c.d_t.is_finite());
    let marks = run_marks(1, 0, 1.0, 2.0).unwrap();
    let lp = limit_for_regime(&regime, 1.0, 2.0, &marks).unwrap();
    let tr = limit_trajectory(lp.as_ref(), 0.0, &[0.0, 0.5, 1.5]).unwrap();
    assert_eq!(tr.intervals[0], IntervalOrEmpty::point(0.0));
    assert!(lp.query(0.0, 1.5).unwrap().d.contains(0.0));
}

#[test]
fn discrete_with_no_marks_fills_the_box() {
    let lambda = (-5.0f64).exp();
    let mut p = DiscreteFFP::with_marks(lambda, 3.0, 1.0, 2, 0, &[]).unwrap();
    p.advance_to(1.5).unwrap();
    let o = p.observables(0.0).unwrap();
    let full = IntervalOrEmpty::Closed { lo: -(p.half_width() as f64) / p.scales().n as f64, hi: p.half_width() as f64 / p.scales().n as f64 };
    assert!(delta_interval(&o.d, &full) < 0.1);
}
