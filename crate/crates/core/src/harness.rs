//! Monte Carlo drivers: coupled discrete/limit runs, cluster-size laws,
//! barrier heights and front statistics.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::discrete::{site_clock, DiscreteFFP, EngineConfig, EventKind, InitialConfig, MatchSource, SiteState};
use crate::discrete::Engine;
use crate::error::{param, Error, Result};
use crate::limit::{
    sample_cluster_length_inf, simulate_alffp_p, simulate_lffp_0, simulate_lffp_inf, LimitProcess,
};
use crate::metrics::{d_t, delta_interval, delta_t, IntervalOrEmpty, Trajectory};
use crate::propagation::{run_propagation_tagged, suggested_radius};
use crate::rng::{poisson_rectangle, tag, Mark, RngStream};
use crate::scales::{box_half_width, classify_regime, compute_scales, Regime, Thresholds};
use crate::stats::{
    chi_square_poisson, correlation, gamma2_cdf, ks_critical_1pct, ks_statistic, median, variance,
    ChiSquare, Estimate, Proportion,
};

/// Run `f(0..runs)` on `jobs` workers (0 = all cores), keeping run order.
pub fn par_runs<T, F>(jobs: usize, runs: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Resource(format!("thread pool: {e}")))?;
    pool.install(|| (0..runs as u64).into_par_iter().map(&f).collect())
}

/// Marks of run `run` on `[-A, A] × [0, T]`.
pub fn run_marks(seed: u64, run: u64, big_a: f64, horizon: f64) -> Result<Vec<Mark>> {
    let mut s = RngStream::tagged(seed, &[tag::MARKS, run]);
    poisson_rectangle(&mut s, -big_a, big_a, 0.0, horizon)
}

/// Limit engine matching a regime.
pub fn limit_for_regime(
    regime: &Regime,
    big_a: f64,
    horizon: f64,
    marks: &[Mark],
) -> Result<Box<dyn LimitProcess + Send + Sync>> {
    regime.validate()?;
    Ok(match *regime {
        Regime::Fast => Box::new(simulate_lffp_0(big_a, horizon, marks)?),
        Regime::Intermediate(p) => Box::new(simulate_alffp_p(p, big_a, horizon, marks)?),
        Regime::Slow(z0) => Box::new(simulate_lffp_inf(z0, big_a, horizon, marks)?),
    })
}

/// Sample `D` and the value at `x` on a grid.
pub fn limit_trajectory(lp: &dyn LimitProcess, x: f64, grid: &[f64]) -> Result<Trajectory> {
    let mut values = Vec::with_capacity(grid.len());
    let mut intervals = Vec::with_capacity(grid.len());
    for &t in grid {
        let q = lp.query(x, t)?;
        values.push(q.value);
        intervals.push(q.d);
    }
    Trajectory::new(grid.to_vec(), values, intervals)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoupledSample {
    pub t: f64,
    pub d_discrete: IntervalOrEmpty,
    pub z_discrete: f64,
    pub w_discrete: f64,
    pub d_limit: IntervalOrEmpty,
    pub value_limit: f64,
    pub delta: f64,
    pub value_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoupledRun {
    pub lambda: f64,
    pub pi: f64,
    pub regime: Regime,
    #[serde(rename = "A")]
    pub big_a: f64,
    #[serde(rename = "T")]
    pub horizon: f64,
    pub x: f64,
    pub seed: u64,
    pub run: u64,
    pub marks: Vec<Mark>,
    /// Site and raw time of each discrete match, one per mark.
    pub matches: Vec<(i64, f64)>,
    pub samples: Vec<CoupledSample>,
    pub d_t: f64,
    pub delta_t: f64,
}

/// Drive a discrete process and the limit process of `regime` with the
/// same marks and compare them at `x` on `grid`.
#[allow(clippy::too_many_arguments)]
pub fn coupled_run(
    lambda: f64,
    pi: f64,
    regime: &Regime,
    big_a: f64,
    horizon: f64,
    grid: &[f64],
    x: f64,
    seed: u64,
    run: u64,
) -> Result<CoupledRun> {
    let (found, ratio, _) = classify_regime(lambda, pi, &Thresholds::default())?;
    if !found.same_kind(regime) {
        return param(format!(
            "(lambda, pi) = ({lambda}, {pi}) has ratio {ratio} and lies in {found:?}, not {regime:?}"
        ));
    }
    if !(x.abs() <= big_a) {
        return param(format!("x = {x} outside [-A, A]"));
    }
    if grid.iter().any(|&t| !(0.0..=horizon).contains(&t)) {
        return param("grid must lie in [0, T]");
    }
    let marks = run_marks(seed, run, big_a, horizon)?;
    let mut disc = DiscreteFFP::with_marks(lambda, pi, big_a, seed, run, &marks)?;
    let s = *disc.scales();
    let h = disc.half_width();
    let matches = marks
        .iter()
        .map(|m| (crate::discrete::mark_site(&s, h, m.x), s.a * m.t))
        .collect();
    let lp = limit_for_regime(regime, big_a, horizon, &marks)?;
    let lim = limit_trajectory(lp.as_ref(), x, grid)?;
    let mut values = Vec::with_capacity(grid.len());
    let mut intervals = Vec::with_capacity(grid.len());
    let mut samples = Vec::with_capacity(grid.len());
    for (i, &t) in grid.iter().enumerate() {
        disc.advance_to(t)?;
        let obs = disc.observables(x)?;
        values.push(obs.z);
        intervals.push(obs.d);
        samples.push(CoupledSample {
            t,
            d_discrete: obs.d,
            z_discrete: obs.z,
            w_discrete: obs.w,
            d_limit: lim.intervals[i],
            value_limit: lim.values[i],
            delta: delta_interval(&obs.d, &lim.intervals[i]),
            value_gap: (obs.z - lim.values[i]).abs(),
        });
    }
    let dis = Trajectory::new(grid.to_vec(), values, intervals)?;
    Ok(CoupledRun {
        lambda,
        pi,
        regime: *regime,
        big_a,
        horizon,
        x,
        seed,
        run,
        marks,
        matches,
        samples,
        d_t: d_t(&dis, &lim, horizon)?,
        delta_t: delta_t(&dis, &lim, horizon)?,
    })
}

/// Normalized histogram on `[lo, hi]`; out-of-range values go to the end bins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub fractions: Vec<f64>,
}

impl Histogram {
    pub fn new(values: &[f64], lo: f64, hi: f64, bins: usize) -> Self {
        let edges = (0..=bins).map(|i| lo + (hi - lo) * i as f64 / bins as f64).collect();
        let mut counts = vec![0u64; bins];
        for &v in values {
            let k = (((v - lo) / (hi - lo)) * bins as f64).floor();
            counts[(k.max(0.0) as usize).min(bins - 1)] += 1;
        }
        let n = values.len().max(1) as f64;
        Self { edges, fractions: counts.iter().map(|&c| c as f64 / n).collect() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailRow {
    pub b: f64,
    pub proportion: Proportion,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterDistResult {
    pub lambda: f64,
    pub pi: f64,
    pub t: f64,
    #[serde(rename = "A")]
    pub big_a: f64,
    pub runs: usize,
    pub seed: u64,
    pub n_lambda: u64,
    pub sizes: Vec<u64>,
    pub w: Vec<f64>,
    pub z: Vec<f64>,
    pub occupied: Proportion,
    /// `P[|C| ∈ [λ^{−a}, λ^{−b}]]`.
    pub interval: Proportion,
    /// `P[|C| ≥ B n_λ]` for each `B`.
    pub tail: Vec<TailRow>,
    /// `|C| / n_λ`.
    pub rescaled: Estimate,
    pub w_hist: Histogram,
    pub z_hist: Histogram,
}

impl ClusterDistResult {
    /// KS distance of `|C|/n_λ` to Γ(2, t − z0).
    pub fn ks_gamma(&self, z0: f64) -> Result<f64> {
        if !(self.t > z0) {
            return param("need t > z0");
        }
        let n = self.n_lambda as f64;
        let xs: Vec<f64> = self.sizes.iter().map(|&c| c as f64 / n).collect();
        ks_statistic(&xs, |x| gamma2_cdf(self.t - z0, x))
    }
}

/// Size of the cluster of site 0 at macroscopic time `t` over independent
/// runs of the `(λ, π, A)` process.
#[allow(clippy::too_many_arguments)]
pub fn cluster_dist_experiment(
    lambda: f64,
    pi: f64,
    t: f64,
    a_exp: f64,
    b_exp: f64,
    bs: &[f64],
    runs: usize,
    big_a: f64,
    seed: u64,
    jobs: usize,
) -> Result<ClusterDistResult> {
    if !(0.0 < a_exp && a_exp < b_exp && b_exp < 1.0) {
        return param(format!("need 0 < a < b < 1, got a = {a_exp}, b = {b_exp}"));
    }
    if bs.iter().any(|&b| !(b > 0.0)) {
        return param("B values must be positive");
    }
    if runs == 0 {
        return param("need at least one run");
    }
    if !(t >= 0.0) {
        return param("t must be nonnegative");
    }
    let s = compute_scales(lambda, pi)?;
    box_half_width(&s, big_a)?;
    let per_run = par_runs(jobs, runs, |run| {
        let mut p = DiscreteFFP::build(lambda, pi, big_a, seed, run, MatchSource::Poisson, false)?;
        p.advance_to(t)?;
        let obs = p.observables(0.0)?;
        let size = obs.cluster.map_or(0, |(l, r)| (r - l + 1) as u64);
        Ok((size, obs.w, obs.z))
    })?;
    let sizes: Vec<u64> = per_run.iter().map(|r| r.0).collect();
    let w: Vec<f64> = per_run.iter().map(|r| r.1).collect();
    let z: Vec<f64> = per_run.iter().map(|r| r.2).collect();
    let n = runs as u64;
    let count = |f: &dyn Fn(u64) -> bool| sizes.iter().filter(|&&c| f(c)).count() as u64;
    let (lo, hi) = (lambda.powf(-a_exp), lambda.powf(-b_exp));
    let nl = s.n as f64;
    let tail = bs
        .iter()
        .map(|&b| TailRow {
            b,
            proportion: Proportion::new(count(&|c| c as f64 >= b * nl), n),
            bound: 2.0 * (-b / 8.0).exp(),
        })
        .collect();
    let rescaled: Vec<f64> = sizes.iter().map(|&c| c as f64 / nl).collect();
    Ok(ClusterDistResult {
        lambda,
        pi,
        t,
        big_a,
        runs,
        seed,
        n_lambda: s.n,
        occupied: Proportion::new(count(&|c| c >= 1), n),
        interval: Proportion::new(count(&|c| c as f64 >= lo && c as f64 <= hi), n),
        tail,
        rescaled: Estimate::of(&rescaled),
        w_hist: Histogram::new(&w, 0.0, 1.0, 20),
        z_hist: Histogram::new(&z, 0.0, 1.0, 20),
        sizes,
        w,
        z,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitTailResult {
    #[serde(rename = "A")]
    pub big_a: f64,
    pub t: f64,
    pub runs: usize,
    pub seed: u64,
    pub lengths: Vec<f64>,
    pub tail: Vec<TailRow>,
}

/// `P[|D_t(0)| ≥ B]` for the instantaneous-fire limit process.
pub fn lffp0_tail_experiment(big_a: f64, t: f64, bs: &[f64], runs: usize, seed: u64, jobs: usize) -> Result<LimitTailResult> {
    if runs == 0 || !(t > 0.0) || !(big_a > 0.0) {
        return param("need runs >= 1, t > 0 and A > 0");
    }
    let lengths = par_runs(jobs, runs, |run| {
        let marks = run_marks(seed, run, big_a, t)?;
        let st = simulate_lffp_0(big_a, t, &marks)?;
        let (l, r) = st.cluster(0.0, t);
        Ok(r - l)
    })?;
    let tail = bs
        .iter()
        .map(|&b| TailRow {
            b,
            proportion: Proportion::new(lengths.iter().filter(|&&v| v >= b).count() as u64, runs as u64),
            bound: 2.0 * (-b / 8.0).exp(),
        })
        .collect();
    Ok(LimitTailResult { big_a, t, runs, seed, lengths, tail })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaTest {
    pub z0: f64,
    pub t: f64,
    pub runs: usize,
    pub seed: u64,
    pub rate: f64,
    pub ks: f64,
    pub critical: f64,
    pub pass: bool,
    pub mean: Estimate,
}

/// KS test of exact slow-regime cluster lengths against Γ(2, t − z0).
pub fn gamma_test(z0: f64, t: f64, runs: usize, seed: u64) -> Result<GammaTest> {
    let xs = sample_cluster_length_inf(z0, t, runs, seed)?;
    let rate = t - z0;
    let ks = ks_statistic(&xs, |x| gamma2_cdf(rate, x))?;
    let critical = ks_critical_1pct(runs);
    Ok(GammaTest { z0, t, runs, seed, rate, ks, critical, pass: ks < critical, mean: Estimate::of(&xs) })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BarrierResult {
    pub lambda: f64,
    pub pi: f64,
    pub t0: f64,
    pub t1: f64,
    #[serde(rename = "A")]
    pub big_a: f64,
    pub runs: usize,
    pub seed: u64,
    /// `Θ` per run, in macroscopic time.
    pub theta: Vec<f64>,
    /// `|C^P|` per run.
    pub destroyed: Vec<u64>,
    pub estimate: Estimate,
}

fn state_before(engine_init: SiteState, log: &[(f64, SiteState)], t: f64) -> SiteState {
    let k = log.partition_point(|e| e.0 < t);
    if k == 0 {
        engine_init
    } else {
        log[k - 1].1
    }
}

/// One run of the barrier scenario; returns `(Θ, |C^P|)`.
#[allow(clippy::too_many_arguments)]
pub fn barrier_run(lambda: f64, pi: f64, t0: f64, t1: f64, big_a: f64, seed: u64, run: u64) -> Result<(f64, u64)> {
    let s = compute_scales(lambda, pi)?;
    let h = box_half_width(&s, big_a)?;
    let a = s.a;
    let mut cfg = EngineConfig::new(h, pi, lambda, seed);
    cfg.run_tag = run;
    cfg.record_transitions = true;
    let mut scheduled = vec![(0, a * t1)];
    if t0 > 0.0 {
        cfg.initial = InitialConfig::Occupied;
        scheduled.push((0, a * t0));
    }
    cfg.matches = MatchSource::Scheduled(scheduled);
    let init = if t0 > 0.0 { SiteState::Occupied } else { SiteState::Vacant };
    let mut engine = Engine::new(cfg)?;
    let r1 = a * t1;
    engine.advance_raw(r1);
    if engine.state(0) != SiteState::Burning {
        return Ok((0.0, 0));
    }
    // regrow for up to 3 macroscopic units, extending until the zone is full
    let mut until = r1 + 3.0 * a;
    loop {
        engine.advance_raw(until);
        let log = engine.transitions().unwrap_or_default();
        let mut per_site: Vec<Vec<(f64, SiteState)>> = vec![Vec::new(); (2 * h + 1) as usize];
        for tr in log {
            per_site[(tr.site + h) as usize].push((tr.time, tr.to));
        }
        let site_log = |i: i64| &per_site[(i + h) as usize];
        // destroyed component: follow the propagation clocks outward
        let mut lo = 0;
        let mut hi = 0;
        for dir in [-1i64, 1] {
            let mut site = 0i64;
            let mut time = r1;
            loop {
                let mut clock = site_clock(seed, run, site, EventKind::Propagate, pi);
                time = clock.next_after(time);
                let next = site + dir;
                if next.abs() > h || state_before(init, site_log(next), time) != SiteState::Occupied {
                    break;
                }
                site = next;
            }
            if dir < 0 {
                lo = site;
            } else {
                hi = site;
            }
        }
        let mut regrown = Some(r1);
        for i in lo..=hi {
            let l = site_log(i);
            let burnt = l.iter().position(|e| e.0 >= r1 && e.1 == SiteState::Vacant);
            let back = burnt.and_then(|k| l[k..].iter().find(|e| e.1 == SiteState::Occupied));
            regrown = match (regrown, back) {
                (Some(r), Some(e)) => Some(r.max(e.0)),
                _ => None,
            };
        }
        if let Some(r) = regrown {
            return Ok(((r - r1) / a, (hi - lo + 1) as u64));
        }
        if until > r1 + 50.0 * a {
            return Err(Error::Runtime("destroyed component never regrew".into()));
        }
        until += 3.0 * a;
    }
}

/// Delay until the zone destroyed by a match at the origin at time `t1`
/// is fully occupied again.
#[allow(clippy::too_many_arguments)]
pub fn barrier_height_experiment(
    lambda: f64,
    pi: f64,
    regime: &Regime,
    t0: f64,
    t1: f64,
    runs: usize,
    big_a: f64,
    seed: u64,
    jobs: usize,
) -> Result<BarrierResult> {
    if !(t0 == 0.0 || t0 > 1.0) {
        return param(format!("t0 must be 0 or exceed 1, got {t0}"));
    }
    if !(t0 < t1 && t1 < t0 + 1.0) {
        return param(format!("need t0 < t1 < t0 + 1, got t0 = {t0}, t1 = {t1}"));
    }
    if runs == 0 {
        return param("need at least one run");
    }
    let (found, _, _) = classify_regime(lambda, pi, &Thresholds::default())?;
    if !found.same_kind(regime) {
        return param(format!("(lambda, pi) lies in {found:?}, not {regime:?}"));
    }
    let out = par_runs(jobs, runs, |run| barrier_run(lambda, pi, t0, t1, big_a, seed, run))?;
    let theta: Vec<f64> = out.iter().map(|r| r.0).collect();
    Ok(BarrierResult {
        lambda,
        pi,
        t0,
        t1,
        big_a,
        runs,
        seed,
        estimate: Estimate::of(&theta),
        destroyed: out.iter().map(|r| r.1).collect(),
        theta,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontRow {
    /// Raw time.
    pub t: f64,
    pub mean_plus: Estimate,
    pub var_plus: f64,
    pub mean_minus: Estimate,
    pub var_minus: f64,
    pub correlation: f64,
    /// Increments of `i^+` since the previous horizon against Poisson(π Δt).
    pub gof: Option<ChiSquare>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontStats {
    pub pi: f64,
    pub runs: usize,
    pub seed: u64,
    pub rows: Vec<FrontRow>,
    pub truncated_runs: usize,
}

/// Front positions of the propagation process at raw `horizons`.
pub fn front_statistics(pi: f64, horizons: &[f64], runs: usize, seed: u64, jobs: usize) -> Result<FrontStats> {
    if !(pi >= 1.0) {
        return param(format!("pi must be at least 1, got {pi}"));
    }
    if runs < 2 || horizons.is_empty() || horizons.windows(2).any(|w| !(w[0] < w[1])) || !(horizons[0] > 0.0) {
        return param("need runs >= 2 and increasing positive horizons");
    }
    let tmax = *horizons.last().expect("nonempty");
    let radius = suggested_radius(pi, tmax);
    let per_run = par_runs(jobs, runs, |run| {
        let r = run_propagation_tagged(pi, tmax, 1.0, radius, seed, run)?;
        let plus: Vec<f64> = horizons.iter().map(|&t| r.i_plus(t) as f64).collect();
        let minus: Vec<f64> = horizons.iter().map(|&t| -r.i_minus(t) as f64).collect();
        Ok((plus, minus, r.truncated))
    })?;
    let mut rows = Vec::new();
    for (k, &t) in horizons.iter().enumerate() {
        let plus: Vec<f64> = per_run.iter().map(|r| r.0[k]).collect();
        let minus: Vec<f64> = per_run.iter().map(|r| r.1[k]).collect();
        let prev = if k == 0 { 0.0 } else { horizons[k - 1] };
        let inc: Vec<u64> = per_run
            .iter()
            .map(|r| (r.0[k] - if k == 0 { 0.0 } else { r.0[k - 1] }) as u64)
            .collect();
        rows.push(FrontRow {
            t,
            mean_plus: Estimate::of(&plus),
            var_plus: variance(&plus),
            mean_minus: Estimate::of(&minus),
            var_minus: variance(&minus),
            correlation: correlation(&plus, &minus),
            gof: chi_square_poisson(&inc, pi * (t - prev)).ok(),
        });
    }
    Ok(FrontStats { pi, runs, seed, rows, truncated_runs: per_run.iter().filter(|r| r.2).count() })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparkResult {
    pub pi: f64,
    pub radius: i64,
    pub runs: usize,
    pub seed: u64,
    pub fraction: Proportion,
}

/// Fraction of burnt sites that stay vacant from their extinction until
/// the fire has moved one site further out.
pub fn spark_fraction_experiment(pi: f64, radius: i64, runs: usize, seed: u64, jobs: usize) -> Result<SparkResult> {
    if !(pi > 0.0) || radius < 2 || runs == 0 {
        return param("need pi > 0, radius >= 2 and runs >= 1");
    }
    let r = radius as f64;
    let t_raw = (r + 6.0 * r.sqrt()) / pi;
    let counts = par_runs(jobs, runs, |run| {
        let p = run_propagation_tagged(pi, t_raw, 1.0, radius, seed, run)?;
        Ok(p.no_spark_count())
    })?;
    let ok = counts.iter().map(|c| c.0).sum();
    let total = counts.iter().map(|c| c.1).sum();
    Ok(SparkResult { pi, radius, runs, seed, fraction: Proportion::new(ok, total) })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineGapRow {
    pub p: f64,
    /// Per mark set, `∫ δ(D^p, D^0)` at `x`.
    pub gaps: Vec<f64>,
    pub mean: Estimate,
    pub median: f64,
}

/// Distance between the interval trajectories of the finite-speed and
/// instantaneous engines on shared mark sets.
#[allow(clippy::too_many_arguments)]
pub fn limit_engine_gap(
    ps: &[f64],
    sets: usize,
    big_a: f64,
    horizon: f64,
    grid: &[f64],
    x: f64,
    seed: u64,
    jobs: usize,
) -> Result<Vec<EngineGapRow>> {
    if sets == 0 || ps.iter().any(|&p| !(p > 0.0)) {
        return param("need sets >= 1 and positive p values");
    }
    let per_set = par_runs(jobs, sets, |set| {
        let marks = run_marks(seed, set, big_a, horizon)?;
        let zero = simulate_lffp_0(big_a, horizon, &marks)?;
        let base = limit_trajectory(&zero, x, grid)?;
        ps.iter()
            .map(|&p| {
                let st = simulate_alffp_p(p, big_a, horizon, &marks)?;
                delta_t(&limit_trajectory(&st, x, grid)?, &base, horizon)
            })
            .collect::<Result<Vec<f64>>>()
    })?;
    Ok(ps
        .iter()
        .enumerate()
        .map(|(k, &p)| {
            let gaps: Vec<f64> = per_set.iter().map(|g| g[k]).collect();
            EngineGapRow { p, mean: Estimate::of(&gaps), median: median(&gaps), gaps }
        })
        .collect())
}

/// Median `d_T` of `runs` coupled runs.
#[allow(clippy::too_many_arguments)]
pub fn coupled_median(
    lambda: f64,
    pi: f64,
    regime: &Regime,
    big_a: f64,
    horizon: f64,
    grid: &[f64],
    runs: usize,
    seed: u64,
    jobs: usize,
) -> Result<(f64, Vec<f64>)> {
    let d = par_runs(jobs, runs, |run| Ok(coupled_run(lambda, pi, regime, big_a, horizon, grid, 0.0, seed, run)?.d_t))?;
    Ok((median(&d), d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::uniform_grid;
    use crate::scales::pi_for_regime;

    #[test]
    fn runs_keep_order_across_jobs() {
        let a = par_runs(1, 20, |r| Ok(r * r)).unwrap();
        let b = par_runs(4, 20, |r| Ok(r * r)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a[5], 25);
    }

    #[test]
    fn coupled_run_reproducible_and_consistent() {
        let lambda = (-4.0f64).exp();
        let regime = Regime::Intermediate(1.0);
        let pi = pi_for_regime(lambda, &regime, &Thresholds::default()).unwrap();
        let grid = uniform_grid(2.0, 64);
        let a = coupled_run(lambda, pi, &regime, 1.0, 2.0, &grid, 0.0, 5, 0).unwrap();
        let b = coupled_run(lambda, pi, &regime, 1.0, 2.0, &grid, 0.0, 5, 0).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.matches.len(), a.marks.len());
        let s = compute_scales(lambda, pi).unwrap();
        for (m, &(site, raw)) in a.marks.iter().zip(&a.matches) {
            assert!((raw / s.a - m.t).abs() < 1e-12);
            let h = box_half_width(&s, 1.0).unwrap();
            if site.abs() < h {
                assert!(site as f64 / s.n as f64 <= m.x && m.x < (site + 1) as f64 / s.n as f64);
            }
        }
        assert!(a.samples.iter().all(|s| s.delta >= 0.0 && s.value_gap <= 1.0));
    }

    #[test]
    fn coupled_run_rejects_wrong_regime() {
        let lambda = (-4.0f64).exp();
        let pi = pi_for_regime(lambda, &Regime::Intermediate(1.0), &Thresholds::default()).unwrap();
        let grid = uniform_grid(1.0, 8);
        assert!(coupled_run(lambda, pi, &Regime::Fast, 1.0, 1.0, &grid, 0.0, 1, 0).is_err());
    }

    #[test]
    fn empty_box_at_time_zero() {
        let r = cluster_dist_experiment(0.01, 2.0, 0.0, 0.2, 0.8, &[1.0], 20, 2.0, 3, 2).unwrap();
        assert_eq!(r.occupied.successes, 0);
        assert!((r.w_hist.fractions.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cluster_dist_bad_exponents() {
        assert!(cluster_dist_experiment(0.01, 2.0, 1.0, 0.5, 0.4, &[1.0], 5, 2.0, 3, 1).is_err());
    }

    #[test]
    fn barrier_hypotheses() {
        let lambda = (-6.0f64).exp();
        let pi = pi_for_regime(lambda, &Regime::Fast, &Thresholds::default()).unwrap();
        assert!(barrier_height_experiment(lambda, pi, &Regime::Fast, 0.5, 0.8, 2, 1.0, 1, 1).is_err());
        assert!(barrier_height_experiment(lambda, pi, &Regime::Fast, 0.0, 1.2, 2, 1.0, 1, 1).is_err());
        let r = barrier_height_experiment(lambda, pi, &Regime::Fast, 0.0, 0.5, 8, 1.0, 1, 2).unwrap();
        assert!(r.theta.iter().all(|&t| (0.0..3.0).contains(&t)));
        let r2 = barrier_height_experiment(lambda, pi, &Regime::Fast, 1.5, 2.0, 4, 1.0, 1, 2).unwrap();
        assert!(r2.destroyed.iter().any(|&c| c > 0));
    }

    #[test]
    fn gamma_test_passes_on_exact_samples() {
        let g = gamma_test(0.5, 2.0, 10_000, 7).unwrap();
        assert!(g.pass, "{g:?}");
    }

    #[test]
    fn front_stats_small() {
        let f = front_statistics(10.0, &[0.5, 1.0], 200, 1, 2).unwrap();
        assert_eq!(f.rows.len(), 2);
        let r = &f.rows[1];
        assert!((r.mean_plus.mean - 10.0).abs() < 4.0 * r.mean_plus.std_error.max(0.1));
    }
}
