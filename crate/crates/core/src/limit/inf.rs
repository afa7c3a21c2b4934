use serde::{Deserialize, Serialize};

use super::{event_order, validate_marks, LimitEvent, LimitEventKind, LimitProcess, MarkOutcome};
use crate::error::{param, Result};
use crate::rng::{Mark, RngStream};

/// Effect of one mark in the slow regime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Feature {
    pub x: f64,
    pub tau: f64,
    pub permanent: bool,
}

impl Feature {
    /// `Y` contributed at time `t`.
    pub fn value(&self, t: f64) -> f64 {
        if t < self.tau {
            0.0
        } else if self.permanent {
            1.0
        } else if t < 2.0 * self.tau {
            2.0 * self.tau - t
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitStateInf {
    pub z0: f64,
    #[serde(rename = "A")]
    pub big_a: f64,
    #[serde(rename = "T")]
    pub horizon: f64,
    pub marks: Vec<Mark>,
    pub features: Vec<Feature>,
    pub events: Vec<LimitEvent>,
}

impl LimitStateInf {
    pub fn y(&self, x: f64, t: f64) -> f64 {
        self.features
            .iter()
            .filter(|f| f.x == x)
            .map(|f| f.value(t))
            .fold(0.0, f64::max)
    }

    /// Features with `Y > 0` at time `t`.
    pub fn active(&self, t: f64) -> impl Iterator<Item = &Feature> {
        self.features.iter().filter(move |f| f.value(t) > 0.0)
    }
}

impl LimitProcess for LimitStateInf {
    fn half_width(&self) -> f64 {
        self.big_a
    }
    fn horizon(&self) -> f64 {
        self.horizon
    }
    fn value(&self, x: f64, t: f64) -> f64 {
        self.y(x, t)
    }
    fn barrier_height(&self, _x: f64, _t: f64) -> f64 {
        0.0
    }
    fn cluster(&self, x: f64, t: f64) -> (f64, f64) {
        if t < 1.0 {
            return (x, x);
        }
        let mut l = -self.big_a;
        let mut r = self.big_a;
        for f in self.active(t) {
            if f.x <= x {
                l = l.max(f.x);
            }
            if f.x >= x {
                r = r.min(f.x);
            }
        }
        (l, r)
    }
    fn events(&self) -> &[LimitEvent] {
        &self.events
    }
}

/// Build the slow-regime process from its marks.
pub fn simulate_lffp_inf(z0: f64, big_a: f64, horizon: f64, marks: &[Mark]) -> Result<LimitStateInf> {
    if !(0.0..=1.0).contains(&z0) {
        return param(format!("z0 must lie in [0,1], got {z0}"));
    }
    validate_marks(marks, big_a, horizon)?;
    let mut features = Vec::with_capacity(marks.len());
    let mut events = Vec::new();
    for (k, m) in marks.iter().enumerate() {
        let permanent = m.t >= z0;
        features.push(Feature { x: m.x, tau: m.t, permanent });
        let mut ev = LimitEvent::new(m.t, LimitEventKind::MarkArrival, m.x);
        ev.mark = Some(k);
        ev.outcome = Some(if permanent { MarkOutcome::Permanent } else { MarkOutcome::Temporary });
        events.push(ev);
        if !permanent && m.t > 0.0 && 2.0 * m.t <= horizon {
            events.push(LimitEvent::new(2.0 * m.t, LimitEventKind::BarrierExpiry, m.x));
        }
    }
    events.sort_by(|a, b| event_order((a.time, a.kind, a.x), (b.time, b.kind, b.x)));
    Ok(LimitStateInf { z0, big_a, horizon, marks: marks.to_vec(), features, events })
}

/// Exact samples of `|D_t(0)|` on the whole line for `t > 2 z0`: the sum
/// of the distances from 0 to the nearest permanent marks on each side,
/// both exponential with rate `t − z0`.
pub fn sample_cluster_length_inf(z0: f64, t: f64, runs: usize, seed: u64) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&z0) {
        return param(format!("z0 must lie in [0,1], got {z0}"));
    }
    if !(t > 2.0 * z0) || !(t >= 1.0) {
        return param(format!("need t > 2 z0 and t >= 1, got t = {t}, z0 = {z0}"));
    }
    if runs == 0 {
        return param("need at least one run");
    }
    let rate = t - z0;
    let mut s = RngStream::tagged(seed, &[crate::rng::tag::SAMPLER, 1]);
    (0..runs)
        .map(|_| Ok(s.exp_sample(rate)? + s.exp_sample(rate)?))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{gamma2_cdf, ks_critical_1pct, ks_statistic, mean};

    #[test]
    fn temporary_and_permanent() {
        let st = simulate_lffp_inf(0.6, 1.0, 3.0, &[Mark { x: 0.3, t: 0.4 }, Mark { x: -0.2, t: 0.7 }]).unwrap();
        assert!((st.y(0.3, 0.5) - 0.3).abs() < 1e-12);
        assert_eq!(st.y(0.3, 0.8), 0.0);
        assert_eq!(st.y(-0.2, 0.69), 0.0);
        for t in [0.7, 1.0, 2.9] {
            assert_eq!(st.y(-0.2, t), 1.0);
        }
        assert_eq!(st.y(0.0, 1.0), 0.0);
        assert_eq!(st.cluster(0.0, 0.5), (0.0, 0.0));
        assert_eq!(st.cluster(0.0, 1.5), (-0.2, 1.0));
        assert_eq!(st.events.len(), 3);
        assert_eq!(st.events[1].kind, LimitEventKind::MarkArrival);
        assert_eq!(st.events[2].kind, LimitEventKind::BarrierExpiry);
    }

    #[test]
    fn z0_zero_all_permanent() {
        let marks = [Mark { x: 0.1, t: 0.01 }, Mark { x: 0.5, t: 0.3 }];
        let st = simulate_lffp_inf(0.0, 1.0, 2.0, &marks).unwrap();
        assert!(st.features.iter().all(|f| f.permanent));
    }

    #[test]
    fn nearest_permanent_features() {
        let marks = [Mark { x: -0.4, t: 0.6 }, Mark { x: 0.9, t: 0.8 }];
        let st = simulate_lffp_inf(0.5, 2.0, 2.0, &marks).unwrap();
        let q = st.query(0.0, 2.0).unwrap();
        assert_eq!(q.d.bounds(), Some((-0.4, 0.9)));
        assert_eq!(st.query(0.0, 0.5).unwrap().d.bounds(), Some((0.0, 0.0)));
    }

    #[test]
    fn sampler_law() {
        assert!(sample_cluster_length_inf(0.5, 1.0, 10, 0).is_err());
        let xs = sample_cluster_length_inf(0.5, 2.0, 10_000, 7).unwrap();
        assert!((mean(&xs) - 4.0 / 3.0).abs() < 3.0 * (2.0f64).sqrt() / 1.5 / 100.0);
        let ks = ks_statistic(&xs, |x| gamma2_cdf(1.5, x)).unwrap();
        assert!(ks < ks_critical_1pct(xs.len()));
        assert_eq!(xs, sample_cluster_length_inf(0.5, 2.0, 10_000, 7).unwrap());
        let far = sample_cluster_length_inf(0.0, 1000.0, 100, 1).unwrap();
        assert!(mean(&far) < 0.01);
    }
}
