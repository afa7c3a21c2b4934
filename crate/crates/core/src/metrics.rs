//! Interval distance, trajectory distances and space-time cones.

use serde::{Deserialize, Serialize};

use crate::error::{param, Result};

/// Tolerance used by cone membership tests.
pub const CONE_TOL: f64 = 1e-9;

/// A closed bounded interval or the empty set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum IntervalOrEmpty {
    Empty,
    Closed { lo: f64, hi: f64 },
}

impl IntervalOrEmpty {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo <= hi) {
            return param(format!("interval bounds out of order: [{lo},{hi}]"));
        }
        Ok(IntervalOrEmpty::Closed { lo, hi })
    }

    pub fn point(x: f64) -> Self {
        IntervalOrEmpty::Closed { lo: x, hi: x }
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, IntervalOrEmpty::Empty)
    }

    pub fn len(&self) -> f64 {
        match *self {
            IntervalOrEmpty::Empty => 0.0,
            IntervalOrEmpty::Closed { lo, hi } => hi - lo,
        }
    }

    pub fn bounds(&self) -> Option<(f64, f64)> {
        match *self {
            IntervalOrEmpty::Empty => None,
            IntervalOrEmpty::Closed { lo, hi } => Some((lo, hi)),
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.bounds().is_some_and(|(lo, hi)| lo <= x && x <= hi)
    }
}

/// `δ([a,b],[c,d]) = |a−c| + |b−d|`, `δ([a,b],∅) = |b−a|`, `δ(∅,∅) = 0`.
pub fn delta_interval(i: &IntervalOrEmpty, j: &IntervalOrEmpty) -> f64 {
    match (i.bounds(), j.bounds()) {
        (Some((a, b)), Some((c, d))) => (a - c).abs() + (b - d).abs(),
        (Some((a, b)), None) | (None, Some((a, b))) => (b - a).abs(),
        (None, None) => 0.0,
    }
}

/// A path `t ↦ (value, interval)` sampled on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub intervals: Vec<IntervalOrEmpty>,
}

impl Trajectory {
    pub fn new(times: Vec<f64>, values: Vec<f64>, intervals: Vec<IntervalOrEmpty>) -> Result<Self> {
        if values.len() != times.len() || intervals.len() != times.len() {
            return param("trajectory columns have different lengths");
        }
        Ok(Self { times, values, intervals })
    }
}

/// `k` equally spaced points `0, T/k, …, (k−1)T/k`.
pub fn uniform_grid(horizon: f64, k: usize) -> Vec<f64> {
    (0..k).map(|i| horizon * i as f64 / k as f64).collect()
}

fn left_weights(times: &[f64], horizon: f64) -> Result<Vec<f64>> {
    if times.is_empty() || times[0] != 0.0 {
        return param("grid must start at 0");
    }
    if times.windows(2).any(|w| !(w[0] < w[1])) {
        return param("grid must be strictly increasing");
    }
    if *times.last().expect("nonempty") > horizon {
        return param("grid exceeds the horizon");
    }
    Ok((0..times.len())
        .map(|i| times.get(i + 1).copied().unwrap_or(horizon) - times[i])
        .collect())
}

fn check_same_grid(a: &Trajectory, b: &Trajectory) -> Result<()> {
    if a.times != b.times {
        return param("trajectories sampled on different grids");
    }
    Ok(())
}

/// Left-Riemann approximation of `∫₀ᵀ |x−y| + δ(I,J) dt`.
pub fn d_t(a: &Trajectory, b: &Trajectory, horizon: f64) -> Result<f64> {
    check_same_grid(a, b)?;
    let w = left_weights(&a.times, horizon)?;
    Ok((0..w.len())
        .map(|i| {
            w[i] * ((a.values[i] - b.values[i]).abs()
                + delta_interval(&a.intervals[i], &b.intervals[i]))
        })
        .sum())
}

/// Interval part of [`d_t`].
pub fn delta_t(a: &Trajectory, b: &Trajectory, horizon: f64) -> Result<f64> {
    check_same_grid(a, b)?;
    let w = left_weights(&a.times, horizon)?;
    Ok((0..w.len())
        .map(|i| w[i] * delta_interval(&a.intervals[i], &b.intervals[i]))
        .sum())
}

/// Left-Riemann integral of a sampled scalar path.
pub fn integrate_left(times: &[f64], values: &[f64], horizon: f64) -> Result<f64> {
    if times.len() != values.len() {
        return param("grid and values have different lengths");
    }
    let w = left_weights(times, horizon)?;
    Ok(w.iter().zip(values).map(|(w, v)| w * v).sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConeDir {
    /// `Λ^p_(x,t) = {(x+z, t−p|z|)}`.
    Past,
    /// `V^p_(x,t) = {(x+z, t+p|z|)}`.
    Future,
}

/// Whether `query = (y,s)` lies on the boundary of the slope-`p` cone
/// with apex `(x,t)`.
pub fn cone_contains(p: f64, apex: (f64, f64), query: (f64, f64), dir: ConeDir) -> bool {
    let (x, t) = apex;
    let (y, s) = query;
    let expected = match dir {
        ConeDir::Past => t - p * (y - x).abs(),
        ConeDir::Future => t + p * (y - x).abs(),
    };
    (s - expected).abs() <= CONE_TOL && s >= -CONE_TOL
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn iv(lo: f64, hi: f64) -> IntervalOrEmpty {
        IntervalOrEmpty::new(lo, hi).unwrap()
    }

    #[test]
    fn delta_examples() {
        assert_eq!(delta_interval(&iv(0.0, 1.0), &iv(0.0, 1.0)), 0.0);
        assert_eq!(delta_interval(&iv(1.0, 3.0), &IntervalOrEmpty::Empty), 2.0);
        assert_eq!(delta_interval(&iv(0.0, 2.0), &iv(1.0, 5.0)), 4.0);
        assert_eq!(delta_interval(&IntervalOrEmpty::Empty, &IntervalOrEmpty::Empty), 0.0);
        assert!(IntervalOrEmpty::new(2.0, 1.0).is_err());
    }

    fn traj(values: Vec<f64>, ivs: Vec<IntervalOrEmpty>, horizon: f64) -> Trajectory {
        let k = values.len();
        Trajectory::new(uniform_grid(horizon, k), values, ivs).unwrap()
    }

    #[test]
    fn d_t_examples() {
        let k = 512;
        let a = traj(vec![0.0; k], vec![iv(0.0, 1.0); k], 2.0);
        assert_eq!(d_t(&a, &a, 2.0).unwrap(), 0.0);
        let b = traj(vec![1.0; k], vec![iv(0.0, 1.0); k], 2.0);
        assert!((d_t(&a, &b, 2.0).unwrap() - 2.0).abs() < 1e-12);
        let grid = uniform_grid(2.0, k);
        let ivs: Vec<_> = grid
            .iter()
            .map(|&t| if t >= 1.0 { iv(3.0, 4.0) } else { iv(0.0, 1.0) })
            .collect();
        let c = traj(vec![0.0; k], ivs, 2.0);
        assert!((delta_t(&a, &c, 2.0).unwrap() - 6.0).abs() < 1e-12);
        let ivs: Vec<_> = grid
            .iter()
            .map(|&t| if t >= 1.0 { iv(0.0, 4.0) } else { iv(0.0, 1.0) })
            .collect();
        let c = traj(vec![0.0; k], ivs, 2.0);
        assert!((d_t(&a, &c, 2.0).unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn d_t_rejects_mismatch() {
        let a = traj(vec![0.0; 4], vec![IntervalOrEmpty::Empty; 4], 1.0);
        let b = traj(vec![0.0; 5], vec![IntervalOrEmpty::Empty; 5], 1.0);
        assert!(d_t(&a, &b, 1.0).is_err());
        let bad = Trajectory::new(vec![0.0, 0.5, 0.4], vec![0.0; 3], vec![IntervalOrEmpty::Empty; 3]).unwrap();
        assert!(d_t(&bad, &bad, 1.0).is_err());
    }

    #[test]
    fn d_t_additive_over_windows() {
        let k = 64;
        let grid = uniform_grid(2.0, k);
        let a = traj(grid.iter().map(|t| t.sin()).collect(), vec![iv(0.0, 1.0); k], 2.0);
        let b = traj(grid.iter().map(|t| t.cos()).collect(), vec![iv(0.5, 1.0); k], 2.0);
        let whole = d_t(&a, &b, 2.0).unwrap();
        let split = |lo: usize, hi: usize, end: f64| {
            let base = grid[lo];
            let times: Vec<f64> = grid[lo..hi].iter().map(|t| t - base).collect();
            let ta = Trajectory::new(times.clone(), a.values[lo..hi].to_vec(), a.intervals[lo..hi].to_vec()).unwrap();
            let tb = Trajectory::new(times, b.values[lo..hi].to_vec(), b.intervals[lo..hi].to_vec()).unwrap();
            d_t(&ta, &tb, end - base).unwrap()
        };
        let parts = split(0, 32, 1.0) + split(32, 64, 2.0);
        assert!((whole - parts).abs() < 1e-12);
    }

    #[test]
    fn cone_examples() {
        assert!(cone_contains(1.0, (0.0, 5.0), (2.0, 3.0), ConeDir::Past));
        assert!(cone_contains(0.0, (0.0, 5.0), (7.0, 5.0), ConeDir::Past));
        assert!(cone_contains(0.0, (0.0, 5.0), (7.0, 5.0), ConeDir::Future));
        assert!(!cone_contains(2.0, (0.0, 5.0), (1.0, 4.0), ConeDir::Past));
        assert!(!cone_contains(1.0, (0.0, 1.0), (3.0, -2.0), ConeDir::Past));
    }

    fn arb_interval() -> impl Strategy<Value = IntervalOrEmpty> {
        (-10.0f64..10.0, 0.0f64..5.0).prop_map(|(lo, w)| IntervalOrEmpty::Closed { lo, hi: lo + w })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]
        #[test]
        fn delta_is_a_metric(i in arb_interval(), j in arb_interval(), k in arb_interval()) {
            let dij = delta_interval(&i, &j);
            prop_assert!(dij >= 0.0);
            prop_assert_eq!(dij, delta_interval(&j, &i));
            prop_assert_eq!(delta_interval(&i, &i), 0.0);
            if dij == 0.0 { prop_assert_eq!(i, j); }
            prop_assert!(dij <= delta_interval(&i, &k) + delta_interval(&k, &j) + 1e-12);
        }
    }

    proptest! {
        #[test]
        fn cone_duality(p in 0.0f64..5.0, x in -5.0f64..5.0, t in 0.0f64..10.0, y in -5.0f64..5.0, on in any::<bool>(), off in 0.01f64..1.0) {
            let s = if on { t - p * (y - x).abs() } else { t - p * (y - x).abs() + off };
            let past = cone_contains(p, (x, t), (y, s), ConeDir::Past);
            let future = cone_contains(p, (y, s), (x, t), ConeDir::Future);
            if s >= 0.0 { prop_assert_eq!(past, future); }
        }
    }
}
