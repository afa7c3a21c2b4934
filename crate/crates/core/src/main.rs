use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use forest_fire::discrete::{DiscreteFFP, SiteState};
use forest_fire::harness::{
    barrier_height_experiment, cluster_dist_experiment, coupled_run, front_statistics, gamma_test, run_marks,
};
use forest_fire::io::{fmt_f, interval_cols, open_output, resolve_output, write_csv, write_json, Meta};
use forest_fire::limit::{simulate_alffp_p, simulate_lffp_0, simulate_lffp_inf, LimitProcess};
use forest_fire::metrics::uniform_grid;
use forest_fire::propagation::{run_propagation, suggested_radius};
use forest_fire::scales::{classify_regime, compute_scales, pi_for_regime, Regime, Thresholds};
use forest_fire::{Error, Result};

#[derive(Parser, Debug)]
#[command(name = "forest-fire", version, about = "One-dimensional forest-fire simulations")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug)]
struct Common {
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    /// Output file; defaults to $FOREST_FIRE_OUT/<command>.<ext>, else stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Read and report times in raw units.
    #[arg(long, global = true)]
    raw_time: bool,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug, Clone)]
struct RegimeArgs {
    /// Speed parameter of the intermediate regime.
    #[arg(long, conflicts_with_all = ["z0", "fast"])]
    p: Option<f64>,
    /// Exponent of the slow regime.
    #[arg(long, conflicts_with = "fast")]
    z0: Option<f64>,
    /// Fast regime.
    #[arg(long)]
    fast: bool,
}

impl RegimeArgs {
    fn target(&self) -> Option<Regime> {
        match (self.p, self.z0, self.fast) {
            (Some(p), _, _) => Some(Regime::Intermediate(p)),
            (_, Some(z0), _) => Some(Regime::Slow(z0)),
            (_, _, true) => Some(Regime::Fast),
            _ => None,
        }
    }

    /// `(π, regime)` from an explicit `π` and/or a regime flag.
    fn resolve(&self, lambda: f64, pi: Option<f64>) -> Result<(f64, Regime)> {
        let th = Thresholds::default();
        match (pi, self.target()) {
            (Some(pi), Some(r)) => Ok((pi, r)),
            (Some(pi), None) => Ok((pi, classify_regime(lambda, pi, &th)?.0)),
            (None, Some(r)) => Ok((pi_for_regime(lambda, &r, &th)?, r)),
            (None, None) => Err(Error::Param("give --pi or one of --p, --z0, --fast".into())),
        }
    }
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Print the scales and regime of (lambda, pi).
    Scales {
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        pi: Option<f64>,
    },
    /// Run the discrete process and report observables at sample times.
    SimulateDiscrete {
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        pi: f64,
        #[arg(long = "A", default_value_t = 2.0)]
        big_a: f64,
        #[arg(long = "T", default_value_t = 2.0)]
        horizon: f64,
        /// Number of sample times.
        #[arg(long, default_value_t = 20)]
        samples: usize,
        #[arg(long, default_value_t = 0.0)]
        x: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run a limit process and print its event log or queries.
    SimulateLimit {
        #[arg(long, required_unless_present = "z0", conflicts_with = "z0")]
        p: Option<f64>,
        #[arg(long)]
        z0: Option<f64>,
        #[arg(long = "A", default_value_t = 2.0)]
        big_a: f64,
        #[arg(long = "T", default_value_t = 3.0)]
        horizon: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Print `D`, value and `H` at `x` on a grid instead of the events.
        #[arg(long)]
        queries: Option<usize>,
        #[arg(long, default_value_t = 0.0)]
        x: f64,
    },
    /// Front positions of the propagation process.
    Propagation {
        #[arg(long)]
        pi: f64,
        /// Horizon (macroscopic unless --raw-time).
        #[arg(long = "T")]
        horizon: f64,
        /// Needed to convert macroscopic times.
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        radius: Option<i64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Coupled discrete and limit runs on shared marks.
    Couple {
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        pi: Option<f64>,
        #[command(flatten)]
        regime: RegimeArgs,
        #[arg(long = "A", default_value_t = 2.0)]
        big_a: f64,
        #[arg(long = "T", default_value_t = 2.0)]
        horizon: f64,
        #[arg(long, default_value_t = 512)]
        grid: usize,
        #[arg(long, default_value_t = 0.0)]
        x: f64,
        #[arg(long, default_value_t = 1)]
        runs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// One row per run instead of one per grid point.
        #[arg(long)]
        summary: bool,
    },
    /// Distribution of the cluster of the origin.
    ClusterDist {
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        pi: f64,
        #[arg(long)]
        t: f64,
        #[arg(long, default_value_t = 0.25)]
        a: f64,
        #[arg(long, default_value_t = 0.75)]
        b: f64,
        #[arg(long = "B", value_delimiter = ',', default_values_t = vec![1.0, 2.0, 4.0])]
        bs: Vec<f64>,
        #[arg(long = "A", default_value_t = 8.0)]
        big_a: f64,
        #[arg(long, default_value_t = 100)]
        runs: usize,
        /// Also report the KS distance to Γ(2, t − z0).
        #[arg(long)]
        z0: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// KS test of exact slow-regime cluster lengths against Γ(2, t − z0).
    GammaTest {
        #[arg(long)]
        z0: f64,
        #[arg(long)]
        t: f64,
        #[arg(long, default_value_t = 10_000)]
        runs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Regeneration delay after a match at the origin.
    Barrier {
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        pi: Option<f64>,
        #[command(flatten)]
        regime: RegimeArgs,
        #[arg(long, default_value_t = 0.0)]
        t0: f64,
        #[arg(long)]
        t1: f64,
        #[arg(long = "A", default_value_t = 4.0)]
        big_a: f64,
        #[arg(long, default_value_t = 100)]
        runs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Mean, variance and Poisson fit of the propagation fronts.
    Fronts {
        #[arg(long)]
        pi: f64,
        /// Horizons (macroscopic unless --raw-time).
        #[arg(long, value_delimiter = ',', required = true)]
        horizons: Vec<f64>,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long, default_value_t = 1000)]
        runs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// Conversion between macroscopic and displayed/entered times.
#[derive(Clone, Copy)]
struct Clock {
    a: f64,
    raw: bool,
}

impl Clock {
    fn input(&self, t: f64) -> f64 {
        if self.raw { t / self.a } else { t }
    }
    fn show(&self, t: f64) -> String {
        fmt_f(if self.raw { t * self.a } else { t })
    }
}

/// Raw time from user input for the propagation commands.
fn raw_from(t: f64, lambda: Option<f64>, raw: bool) -> Result<f64> {
    if raw {
        return Ok(t);
    }
    match lambda {
        Some(l) => Ok(t * compute_scales(l, 1.0)?.a),
        None => Err(Error::Param("macroscopic times need --lambda (or pass --raw-time)".into())),
    }
}

struct Emitter<'a> {
    common: &'a Common,
    name: &'static str,
}

impl Emitter<'_> {
    fn target(&self) -> Option<PathBuf> {
        let ext = match self.common.format {
            Format::Csv => "csv",
            Format::Json => "json",
        };
        resolve_output(self.common.out.as_deref(), &format!("{}.{ext}", self.name))
    }

    fn emit<T: serde::Serialize>(&self, meta: &Meta, header: &[&str], rows: &[Vec<String>], json: &T) -> Result<()> {
        let w = open_output(self.target().as_deref())?;
        match self.common.format {
            Format::Csv => write_csv(w, meta, header, rows),
            Format::Json => write_json(w, meta, json),
        }
    }
}

fn state_counts(states: &[SiteState]) -> [usize; 3] {
    let mut c = [0; 3];
    for &s in states {
        c[s as usize] += 1;
    }
    c
}

fn run(cli: Cli) -> Result<()> {
    let common = &cli.common;
    let em = |name| Emitter { common, name };
    match cli.cmd {
        Cmd::Scales { lambda, pi } => {
            let s = compute_scales(lambda, pi.unwrap_or(1.0))?;
            let mut meta = Meta::new("scales");
            meta.push("lambda", fmt_f(lambda));
            let mut rows = vec![
                ("a", fmt_f(s.a)),
                ("n", s.n.to_string()),
                ("m", s.m.to_string()),
                ("eps", fmt_f(s.eps)),
                ("outside_asymptotic_range", s.outside_asymptotic_range.to_string()),
            ];
            if let Some(pi) = pi {
                let (regime, _, _) = classify_regime(lambda, pi, &Thresholds::default())?;
                meta.push("pi", fmt_f(pi));
                rows.push(("ratio", fmt_f(s.ratio)));
                rows.push(("zeta", fmt_f(s.zeta)));
                rows.push(("regime", format!("{regime:?}")));
            }
            match common.format {
                Format::Json => em("scales").emit(&meta, &[], &[], &serde_json::json!({ "scales": s })),
                Format::Csv => {
                    let rows: Vec<Vec<String>> = rows.into_iter().map(|(k, v)| vec![k.to_string(), v]).collect();
                    em("scales").emit(&meta, &["key", "value"], &rows, &())
                }
            }
        }
        Cmd::SimulateDiscrete { lambda, pi, big_a, horizon, samples, x, seed } => {
            let mut p = DiscreteFFP::new(lambda, pi, big_a, seed)?;
            let clock = Clock { a: p.scales().a, raw: common.raw_time };
            let horizon = clock.input(horizon);
            if horizon <= 0.0 || horizon.is_nan() || samples == 0 {
                return Err(Error::Param("need T > 0 and samples >= 1".into()));
            }
            let mut meta = Meta::new("simulate-discrete");
            meta.push("lambda", fmt_f(lambda)).push("pi", fmt_f(pi)).push("A", fmt_f(big_a));
            meta.push("T", fmt_f(horizon)).push("x", fmt_f(x)).push("seed", seed);
            meta.push("half_width", p.half_width()).push("time_unit", if clock.raw { "raw" } else { "macroscopic" });
            let mut rows = Vec::new();
            let mut snaps = Vec::new();
            for k in 1..=samples {
                let t = horizon * k as f64 / samples as f64;
                p.advance_to(t)?;
                let obs = p.observables(x)?;
                let c = state_counts(&p.engine().states());
                let [lo, hi] = interval_cols(&obs.d);
                rows.push(vec![
                    clock.show(t),
                    p.engine().event_count().to_string(),
                    c[0].to_string(),
                    c[1].to_string(),
                    c[2].to_string(),
                    lo,
                    hi,
                    fmt_f(obs.k),
                    fmt_f(obs.z),
                    fmt_f(obs.w),
                ]);
                if common.format == Format::Json {
                    snaps.push(p.snapshot());
                }
            }
            let header = ["t", "events", "vacant", "occupied", "burning", "d_lo", "d_hi", "k", "z", "w"];
            em("simulate-discrete").emit(&meta, &header, &rows, &snaps)
        }
        Cmd::SimulateLimit { p, z0, big_a, horizon, seed, queries, x } => {
            let marks = run_marks(seed, 0, big_a, horizon)?;
            let mut meta = Meta::new("simulate-limit");
            let lp: Box<dyn LimitProcess> = match (p, z0) {
                (Some(0.0), _) => Box::new(simulate_lffp_0(big_a, horizon, &marks)?),
                (Some(p), _) => Box::new(simulate_alffp_p(p, big_a, horizon, &marks)?),
                (None, Some(z0)) => Box::new(simulate_lffp_inf(z0, big_a, horizon, &marks)?),
                (None, None) => return Err(Error::Param("give --p or --z0".into())),
            };
            if let Some(p) = p {
                meta.push("p", fmt_f(p));
            }
            if let Some(z0) = z0 {
                meta.push("z0", fmt_f(z0));
            }
            meta.push("A", fmt_f(big_a)).push("T", fmt_f(horizon)).push("seed", seed).push("marks", marks.len());
            if let Some(k) = queries {
                if k == 0 {
                    return Err(Error::Param("need at least one query time".into()));
                }
                meta.push("x", fmt_f(x));
                let mut out = Vec::new();
                let mut rows = Vec::new();
                for t in uniform_grid(horizon, k) {
                    let q = lp.query(x, t)?;
                    let [lo, hi] = interval_cols(&q.d);
                    rows.push(vec![fmt_f(t), fmt_f(q.value), fmt_f(q.h), lo, hi]);
                    out.push(q);
                }
                return em("simulate-limit").emit(&meta, &["t", "value", "h", "d_lo", "d_hi"], &rows, &out);
            }
            let rows: Vec<Vec<String>> = lp
                .events()
                .iter()
                .map(|e| {
                    let fronts: Vec<String> = e.fronts.iter().map(|f| f.to_string()).collect();
                    let (elo, ehi) = e.extent.map_or((String::new(), String::new()), |(l, r)| (fmt_f(l), fmt_f(r)));
                    vec![
                        fmt_f(e.time),
                        format!("{:?}", e.kind),
                        fmt_f(e.x),
                        fronts.join(" "),
                        e.mark.map_or(String::new(), |m| m.to_string()),
                        e.outcome.map_or(String::new(), |o| format!("{o:?}")),
                        e.cause.map_or(String::new(), |c| format!("{c:?}")),
                        elo,
                        ehi,
                    ]
                })
                .collect();
            let header = ["time", "kind", "x", "fronts", "mark", "outcome", "cause", "extent_lo", "extent_hi"];
            em("simulate-limit").emit(&meta, &header, &rows, &lp.events())
        }
        Cmd::Propagation { pi, horizon, lambda, radius, seed } => {
            let raw = raw_from(horizon, lambda, common.raw_time)?;
            let radius = radius.unwrap_or_else(|| suggested_radius(pi, raw));
            let r = run_propagation(pi, raw, 1.0, radius, seed)?;
            let a = match (common.raw_time, lambda) {
                (false, Some(l)) => compute_scales(l, 1.0)?.a,
                _ => 1.0,
            };
            let mut meta = Meta::new("propagation");
            meta.push("pi", fmt_f(pi)).push("T_raw", fmt_f(raw)).push("radius", radius).push("seed", seed);
            let (ok, total) = r.no_spark_count();
            meta.push("no_spark_sites", ok).push("examined_sites", total).push("truncated", r.truncated);
            meta.push("time_unit", if common.raw_time { "raw" } else { "macroscopic" });
            let mut moves: Vec<(f64, &str)> = r.right_advances.iter().map(|&t| (t, "right")).collect();
            moves.extend(r.left_advances.iter().map(|&t| (t, "left")));
            moves.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(b.1)));
            let rows: Vec<Vec<String>> = moves
                .iter()
                .map(|&(t, side)| {
                    vec![fmt_f(t / a), side.to_string(), r.i_plus(t).to_string(), r.i_minus(t).to_string()]
                })
                .collect();
            em("propagation").emit(&meta, &["t", "front", "i_plus", "i_minus"], &rows, &r)
        }
        Cmd::Couple { lambda, pi, regime, big_a, horizon, grid, x, runs, seed, summary } => {
            let (pi, regime) = regime.resolve(lambda, pi)?;
            let a = compute_scales(lambda, pi)?.a;
            let clock = Clock { a, raw: common.raw_time };
            let horizon = clock.input(horizon);
            if grid == 0 || runs == 0 {
                return Err(Error::Param("need grid >= 1 and runs >= 1".into()));
            }
            let g = uniform_grid(horizon, grid);
            let out = forest_fire::harness::par_runs(common.jobs, runs, |run| {
                coupled_run(lambda, pi, &regime, big_a, horizon, &g, x, seed, run)
            })?;
            let mut meta = Meta::new("couple");
            meta.push("lambda", fmt_f(lambda)).push("pi", fmt_f(pi)).push("regime", format!("{regime:?}"));
            meta.push("A", fmt_f(big_a)).push("T", fmt_f(horizon)).push("grid", grid).push("x", fmt_f(x));
            meta.push("runs", runs).push("seed", seed);
            if summary {
                let rows: Vec<Vec<String>> = out
                    .iter()
                    .map(|c| vec![c.run.to_string(), c.marks.len().to_string(), fmt_f(c.d_t), fmt_f(c.delta_t)])
                    .collect();
                return em("couple").emit(&meta, &["run", "marks", "d_T", "delta_T"], &rows, &out);
            }
            let mut rows = Vec::new();
            for c in &out {
                for s in &c.samples {
                    let [dl, dh] = interval_cols(&s.d_discrete);
                    let [ll, lh] = interval_cols(&s.d_limit);
                    rows.push(vec![
                        c.run.to_string(),
                        clock.show(s.t),
                        dl,
                        dh,
                        fmt_f(s.z_discrete),
                        fmt_f(s.w_discrete),
                        ll,
                        lh,
                        fmt_f(s.value_limit),
                        fmt_f(s.delta),
                        fmt_f(s.value_gap),
                    ]);
                }
            }
            let header = [
                "run", "t", "disc_lo", "disc_hi", "disc_z", "disc_w", "lim_lo", "lim_hi", "lim_value", "delta",
                "value_gap",
            ];
            em("couple").emit(&meta, &header, &rows, &out)
        }
        Cmd::ClusterDist { lambda, pi, t, a, b, bs, big_a, runs, z0, seed } => {
            let clock = Clock { a: compute_scales(lambda, pi)?.a, raw: common.raw_time };
            let t = clock.input(t);
            let r = cluster_dist_experiment(lambda, pi, t, a, b, &bs, runs, big_a, seed, common.jobs)?;
            let mut meta = Meta::new("cluster-dist");
            meta.push("lambda", fmt_f(lambda)).push("pi", fmt_f(pi)).push("t", fmt_f(t)).push("a", fmt_f(a));
            meta.push("b", fmt_f(b)).push("A", fmt_f(big_a)).push("runs", runs).push("seed", seed);
            meta.push("n_lambda", r.n_lambda);
            let p = &r.interval;
            meta.push("p_interval", format!("{} [{}, {}]", fmt_f(p.estimate), fmt_f(p.lo), fmt_f(p.hi)));
            for row in &r.tail {
                let p = &row.proportion;
                meta.push(
                    &format!("p_tail_B{}", fmt_f(row.b)),
                    format!("{} [{}, {}] bound {}", fmt_f(p.estimate), fmt_f(p.lo), fmt_f(p.hi), fmt_f(row.bound)),
                );
            }
            meta.push("mean_rescaled", format!("{} se {}", fmt_f(r.rescaled.mean), fmt_f(r.rescaled.std_error)));
            if let Some(z0) = z0 {
                meta.push("z0", fmt_f(z0)).push("ks_gamma", fmt_f(r.ks_gamma(z0)?));
            }
            let nl = r.n_lambda as f64;
            let rows: Vec<Vec<String>> = (0..runs)
                .map(|i| {
                    vec![
                        i.to_string(),
                        r.sizes[i].to_string(),
                        fmt_f(r.sizes[i] as f64 / nl),
                        fmt_f(r.w[i]),
                        fmt_f(r.z[i]),
                    ]
                })
                .collect();
            em("cluster-dist").emit(&meta, &["run", "size", "rescaled", "w", "z"], &rows, &r)
        }
        Cmd::GammaTest { z0, t, runs, seed } => {
            let g = gamma_test(z0, t, runs, seed)?;
            let mut meta = Meta::new("gamma-test");
            meta.push("z0", fmt_f(z0)).push("t", fmt_f(t)).push("runs", runs).push("seed", seed);
            let rows = vec![
                vec!["rate".to_string(), fmt_f(g.rate)],
                vec!["ks".to_string(), fmt_f(g.ks)],
                vec!["critical_1pct".to_string(), fmt_f(g.critical)],
                vec!["mean".to_string(), fmt_f(g.mean.mean)],
                vec!["result".to_string(), if g.pass { "PASS" } else { "FAIL" }.to_string()],
            ];
            em("gamma-test").emit(&meta, &["key", "value"], &rows, &g)
        }
        Cmd::Barrier { lambda, pi, regime, t0, t1, big_a, runs, seed } => {
            let (pi, regime) = regime.resolve(lambda, pi)?;
            let clock = Clock { a: compute_scales(lambda, pi)?.a, raw: common.raw_time };
            let (t0, t1) = (clock.input(t0), clock.input(t1));
            let r = barrier_height_experiment(lambda, pi, &regime, t0, t1, runs, big_a, seed, common.jobs)?;
            let mut meta = Meta::new("barrier");
            meta.push("lambda", fmt_f(lambda)).push("pi", fmt_f(pi)).push("regime", format!("{regime:?}"));
            meta.push("t0", fmt_f(t0)).push("t1", fmt_f(t1)).push("A", fmt_f(big_a)).push("runs", runs);
            meta.push("seed", seed);
            meta.push("theta_mean", format!("{} se {}", fmt_f(r.estimate.mean), fmt_f(r.estimate.std_error)));
            let rows: Vec<Vec<String>> = (0..runs)
                .map(|i| vec![i.to_string(), clock.show(r.theta[i]), r.destroyed[i].to_string()])
                .collect();
            em("barrier").emit(&meta, &["run", "theta", "destroyed"], &rows, &r)
        }
        Cmd::Fronts { pi, horizons, lambda, runs, seed } => {
            let raw: Vec<f64> = horizons.iter().map(|&t| raw_from(t, lambda, common.raw_time)).collect::<Result<_>>()?;
            let f = front_statistics(pi, &raw, runs, seed, common.jobs)?;
            let mut meta = Meta::new("fronts");
            meta.push("pi", fmt_f(pi)).push("runs", runs).push("seed", seed).push("truncated_runs", f.truncated_runs);
            let rows: Vec<Vec<String>> = f
                .rows
                .iter()
                .map(|r| {
                    let (chi, dof, pv) = r.gof.map_or((String::new(), String::new(), String::new()), |g| {
                        (fmt_f(g.statistic), g.dof.to_string(), fmt_f(g.p_value))
                    });
                    vec![
                        fmt_f(r.t),
                        fmt_f(r.mean_plus.mean),
                        fmt_f(r.mean_plus.std_error),
                        fmt_f(r.var_plus),
                        fmt_f(r.mean_minus.mean),
                        fmt_f(r.mean_minus.std_error),
                        fmt_f(r.var_minus),
                        fmt_f(r.correlation),
                        chi,
                        dof,
                        pv,
                    ]
                })
                .collect();
            let header = [
                "t_raw", "mean_plus", "se_plus", "var_plus", "mean_minus", "se_minus", "var_minus", "corr", "chi2",
                "dof", "p_value",
            ];
            em("fronts").emit(&meta, &header, &rows, &f)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
