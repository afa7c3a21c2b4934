//! Seedable randomness: exponential clocks, Poisson clocks on the half line
//! and Poisson point processes on space-time rectangles.
//!
//! Every stream is keyed by `(master_seed, stream_id)` through SHA-256, so
//! any number of independent streams can be created without coordination.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{param, Result};

/// Purpose tags mixed into stream ids.
pub mod tag {
    pub const MARKS: u64 = 1;
    pub const SEED_CLOCK: u64 = 2;
    pub const MATCH_CLOCK: u64 = 3;
    pub const PROPAGATE_CLOCK: u64 = 4;
    pub const RUN: u64 = 5;
    pub const SAMPLER: u64 = 6;
}

/// A point of the match process in macroscopic coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mark {
    pub x: f64,
    pub t: f64,
}

fn hash_words(words: &[u64]) -> [u8; 32] {
    let mut h = Sha256::new();
    for w in words {
        h.update(w.to_le_bytes());
    }
    h.finalize().into()
}

/// Combine tags into a single stream id.
pub fn stream_id(tags: &[u64]) -> u64 {
    let d = hash_words(tags);
    u64::from_le_bytes(d[..8].try_into().expect("8 bytes"))
}

/// Derive the 256-bit generator key of `(master_seed, stream_id)`.
pub fn derive_key(master_seed: u64, stream_id: u64) -> [u8; 32] {
    hash_words(&[master_seed, stream_id])
}

/// `-ln(u)/rate` for `u` in (0,1].
pub fn exp_from_uniform(u: f64, rate: f64) -> f64 {
    -u.ln() / rate
}

/// A deterministic stream of random numbers.
#[derive(Debug, Clone)]
pub struct RngStream {
    master_seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        Self {
            master_seed,
            stream_id,
            rng: ChaCha8Rng::from_seed(derive_key(master_seed, stream_id)),
        }
    }

    /// Stream whose id is the hash of `tags`.
    pub fn tagged(master_seed: u64, tags: &[u64]) -> Self {
        Self::new(master_seed, stream_id(tags))
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Uniform on [0,1).
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// Uniform on (0,1].
    pub fn uniform_open01(&mut self) -> f64 {
        1.0 - self.rng.random::<f64>()
    }

    pub fn uniform_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn exp_sample(&mut self, rate: f64) -> Result<f64> {
        if !(rate > 0.0 && rate.is_finite()) {
            return param(format!("exponential rate must be positive, got {rate}"));
        }
        Ok(exp_from_uniform(self.uniform_open01(), rate))
    }

    /// Poisson count with the given mean (0 when the mean is 0).
    pub fn poisson_count(&mut self, mean: f64) -> u64 {
        poisson_count(&mut self.rng, mean)
    }
}

fn poisson_count<R: Rng>(rng: &mut R, mean: f64) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    let d = Poisson::new(mean).expect("finite positive mean");
    d.sample(rng) as u64
}

/// Poisson point process of unit intensity on `[x_lo,x_hi] × [t_lo,t_hi]`,
/// sorted by time.
pub fn poisson_rectangle(
    stream: &mut RngStream,
    x_lo: f64,
    x_hi: f64,
    t_lo: f64,
    t_hi: f64,
) -> Result<Vec<Mark>> {
    if !(x_lo < x_hi && t_lo < t_hi) || ![x_lo, x_hi, t_lo, t_hi].iter().all(|v| v.is_finite()) {
        return param(format!(
            "degenerate rectangle [{x_lo},{x_hi}]x[{t_lo},{t_hi}]"
        ));
    }
    let count = stream.poisson_count((x_hi - x_lo) * (t_hi - t_lo));
    let mut marks: Vec<Mark> = (0..count)
        .map(|_| {
            let x = stream.uniform_range(x_lo, x_hi);
            let t = stream.uniform_range(t_lo, t_hi);
            Mark { x, t }
        })
        .collect();
    marks.sort_by(|a, b| a.t.total_cmp(&b.t).then(a.x.total_cmp(&b.x)));
    Ok(marks)
}

const CELL_MEAN: f64 = 16.0;

/// A homogeneous Poisson process on `[0, ∞)` whose arrivals are a pure
/// function of its key.
///
/// The half line is cut into cells holding `CELL_MEAN` arrivals on average;
/// each cell is generated from its own ChaCha stream, so the first arrival
/// after any time is found without generating the arrivals before it.
#[derive(Debug, Clone)]
pub struct PoissonClock {
    key: [u8; 32],
    rate: f64,
    cell: f64,
    loaded: Option<u64>,
    arrivals: Vec<f64>,
}

impl PoissonClock {
    pub fn new(master_seed: u64, stream_id: u64, rate: f64) -> Self {
        let cell = if rate > 0.0 { CELL_MEAN / rate } else { f64::INFINITY };
        Self {
            key: derive_key(master_seed, stream_id),
            rate,
            cell,
            loaded: None,
            arrivals: Vec::new(),
        }
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    fn load(&mut self, k: u64) {
        if self.loaded == Some(k) {
            return;
        }
        let mut rng = ChaCha8Rng::from_seed(self.key);
        rng.set_stream(k);
        let count = poisson_count(&mut rng, CELL_MEAN);
        let base = k as f64 * self.cell;
        self.arrivals.clear();
        for _ in 0..count {
            let u: f64 = rng.random();
            self.arrivals.push(base + u * self.cell);
        }
        self.arrivals.sort_by(f64::total_cmp);
        self.loaded = Some(k);
    }

    /// First arrival strictly after `t` (`+∞` for a zero-rate clock).
    pub fn next_after(&mut self, t: f64) -> f64 {
        if self.rate <= 0.0 {
            return f64::INFINITY;
        }
        let mut k = if t <= 0.0 { 0 } else { (t / self.cell).floor() as u64 };
        loop {
            self.load(k);
            let i = self.arrivals.partition_point(|&a| a <= t);
            if i < self.arrivals.len() {
                return self.arrivals[i];
            }
            k += 1;
        }
    }

    /// All arrivals in `(0, horizon]`, generated independently of any
    /// lookups already made on this clock.
    pub fn arrivals_until(&self, horizon: f64) -> Vec<f64> {
        let mut c = self.clone();
        let mut out = Vec::new();
        let mut t = 0.0;
        loop {
            let a = c.next_after(t);
            if a > horizon {
                return out;
            }
            out.push(a);
            t = a;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inversion_formula() {
        assert!((exp_from_uniform((-2.0f64).exp(), 1.0) - 2.0).abs() < 1e-12);
        assert!((exp_from_uniform((-2.0f64).exp(), 4.0) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn exp_rejects_bad_rate() {
        let mut s = RngStream::new(1, 2);
        assert!(s.exp_sample(0.0).is_err());
        assert!(s.exp_sample(-1.0).is_err());
    }

    #[test]
    fn exp_mean_and_variance() {
        let mut s = RngStream::new(11, 0);
        let n = 100_000;
        let xs: Vec<f64> = (0..n).map(|_| s.exp_sample(2.0).unwrap()).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((mean - 0.5).abs() < 0.01, "mean {mean}");
        // Var(s^2) ~ (mu4 - sigma^4)/n, mu4 = 9/16 for rate 2
        let sd_var = ((9.0 / 16.0 - 1.0 / 16.0) / n as f64).sqrt();
        assert!((var - 0.25).abs() < 3.0 * sd_var, "var {var}");
    }

    #[test]
    fn streams_reproducible_and_distinct() {
        let mut a = RngStream::new(5, 9);
        let mut b = RngStream::new(5, 9);
        let mut c = RngStream::new(5, 10);
        let va: Vec<f64> = (0..8).map(|_| a.uniform()).collect();
        let vb: Vec<f64> = (0..8).map(|_| b.uniform()).collect();
        let vc: Vec<f64> = (0..8).map(|_| c.uniform()).collect();
        assert_eq!(va, vb);
        assert!(va.iter().zip(&vc).all(|(x, y)| x != y));
    }

    #[test]
    fn rectangle_rejects_degenerate() {
        let mut s = RngStream::new(1, 1);
        assert!(poisson_rectangle(&mut s, 1.0, 1.0, 0.0, 1.0).is_err());
        assert!(poisson_rectangle(&mut s, 0.0, 1.0, 2.0, 2.0).is_err());
    }

    #[test]
    fn rectangle_mean_count_and_order() {
        let reps = 10_000;
        let mut total = 0usize;
        for r in 0..reps {
            let mut s = RngStream::new(3, r);
            let m = poisson_rectangle(&mut s, -2.0, 2.0, 0.0, 3.0).unwrap();
            assert!(m.windows(2).all(|w| w[0].t < w[1].t));
            assert!(m.iter().all(|p| (-2.0..=2.0).contains(&p.x) && (0.0..=3.0).contains(&p.t)));
            total += m.len();
        }
        let mean = total as f64 / reps as f64;
        assert!((mean - 12.0).abs() < 0.35, "mean count {mean}");
    }

    #[test]
    fn rectangle_disjoint_counts_uncorrelated() {
        let reps = 4000;
        let (mut xs, mut ys) = (Vec::new(), Vec::new());
        for r in 0..reps {
            let mut s = RngStream::new(17, r);
            let m = poisson_rectangle(&mut s, 0.0, 2.0, 0.0, 2.0).unwrap();
            xs.push(m.iter().filter(|p| p.x < 1.0).count() as f64);
            ys.push(m.iter().filter(|p| p.x >= 1.0).count() as f64);
        }
        let corr = crate::stats::correlation(&xs, &ys);
        assert!(corr.abs() < 3.0 / (reps as f64).sqrt(), "corr {corr}");
    }

    #[test]
    fn clock_lookup_matches_full_path() {
        let mut c = PoissonClock::new(1, 2, 3.0);
        let path = c.arrivals_until(40.0);
        assert!(path.windows(2).all(|w| w[0] < w[1]));
        for probe in [0.0, 0.3, 5.5, 17.2, 39.0] {
            let want = path.iter().copied().find(|&a| a > probe).unwrap();
            assert_eq!(c.next_after(probe), want);
        }
        // rate check: ~120 arrivals on [0,40]
        let mean = (0..200)
            .map(|s| PoissonClock::new(s, 0, 3.0).arrivals_until(40.0).len() as f64)
            .sum::<f64>()
            / 200.0;
        assert!((mean - 120.0).abs() < 3.0 * (120.0f64 / 200.0).sqrt(), "mean {mean}");
    }

    #[test]
    fn clock_gaps_are_exponential() {
        let mut c = PoissonClock::new(8, 8, 2.0);
        let path = c.arrivals_until(20_000.0);
        let gaps: Vec<f64> = path.windows(2).map(|w| w[1] - w[0]).collect();
        let mean = gaps.iter().sum::<f64>() / gaps.len() as f64;
        assert!((mean - 0.5).abs() < 3.0 * 0.5 / (gaps.len() as f64).sqrt());
        let ks = crate::stats::ks_statistic(&gaps, |x| 1.0 - (-2.0 * x).exp()).unwrap();
        assert!(ks < 1.628 / (gaps.len() as f64).sqrt(), "ks {ks}");
        assert_eq!(c.next_after(-1.0), path[0]);
        assert_eq!(PoissonClock::new(1, 1, 0.0).next_after(0.0), f64::INFINITY);
    }
}
