//! The propagation process: every site occupied, site 0 set on fire at
//! time 0, seeds at rate 1 and no matches.

use serde::{Deserialize, Serialize};

use crate::discrete::{Engine, EngineConfig, InitialConfig, MatchSource, SiteState};
use crate::error::{param, Result};

/// Interior re-burn of a site that had already burnt once.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spark {
    pub site: i64,
    pub start: f64,
    pub end: Option<f64>,
}

/// Record of one propagation run; all times are raw.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropagationRun {
    pub pi: f64,
    pub horizon: f64,
    pub box_radius: i64,
    pub seed: u64,
    /// Times at which the right front `i_t^+` moved one site.
    pub right_advances: Vec<f64>,
    /// Times at which the left front `i_t^-` moved one site.
    pub left_advances: Vec<f64>,
    /// First burning time of each site, indexed from `-box_radius`.
    pub burn_times: Vec<Option<f64>>,
    pub sparks: Vec<Spark>,
    /// First extinction time of each site.
    pub extinguish_times: Vec<Option<f64>>,
    /// First reseeding after the first extinction.
    pub reseed_times: Vec<Option<f64>>,
    pub truncated: bool,
}

/// `π t + 10 √(π t)` sites plus a margin.
pub fn suggested_radius(pi: f64, t_raw: f64) -> i64 {
    let m = pi * t_raw;
    (m + 10.0 * m.sqrt()).ceil() as i64 + 2
}

impl PropagationRun {
    fn idx(&self, site: i64) -> usize {
        (site + self.box_radius) as usize
    }

    pub fn burn_time(&self, site: i64) -> Option<f64> {
        if site.abs() > self.box_radius {
            return None;
        }
        self.burn_times[self.idx(site)]
    }

    pub fn i_plus(&self, t: f64) -> i64 {
        self.right_advances.partition_point(|&a| a <= t) as i64
    }

    pub fn i_minus(&self, t: f64) -> i64 {
        -(self.left_advances.partition_point(|&a| a <= t) as i64)
    }

    /// Sites `i` (away from the ignition point) for which the site stays
    /// vacant from its first extinction until its outer neighbour's first
    /// extinction; returns `(count satisfying, sites examined)`.
    pub fn no_spark_count(&self) -> (u64, u64) {
        let mut ok = 0;
        let mut total = 0;
        for site in -self.box_radius..=self.box_radius {
            if site == 0 {
                continue;
            }
            let outer = site + site.signum();
            if outer.abs() > self.box_radius {
                continue;
            }
            let (Some(e_i), Some(e_next)) =
                (self.extinguish_times[self.idx(site)], self.extinguish_times[self.idx(outer)])
            else {
                continue;
            };
            if e_next <= e_i {
                continue;
            }
            total += 1;
            match self.reseed_times[self.idx(site)] {
                Some(r) if r < e_next => {}
                _ => ok += 1,
            }
        }
        (ok, total)
    }
}

pub fn run_propagation(pi: f64, t_macro: f64, a: f64, box_radius: i64, seed: u64) -> Result<PropagationRun> {
    run_propagation_tagged(pi, t_macro, a, box_radius, seed, 0)
}

pub fn run_propagation_tagged(
    pi: f64,
    t_macro: f64,
    a: f64,
    box_radius: i64,
    seed: u64,
    run_tag: u64,
) -> Result<PropagationRun> {
    if !(pi > 0.0) || !(t_macro >= 0.0) || !(a > 0.0) {
        return param("propagation run needs pi > 0, t >= 0 and a > 0");
    }
    if box_radius < 1 {
        return param("box radius must be at least 1");
    }
    let horizon = a * t_macro;
    let size = (2 * box_radius + 1) as usize;
    let mut states = vec![SiteState::Occupied; size];
    states[box_radius as usize] = SiteState::Burning;
    let mut cfg = EngineConfig::new(box_radius, pi, 0.0, seed);
    cfg.initial = InitialConfig::States(states);
    cfg.matches = MatchSource::Disabled;
    cfg.record_transitions = true;
    cfg.run_tag = run_tag;
    let mut engine = Engine::new(cfg)?;
    engine.advance_raw(horizon);
    let log = engine.take_transitions().unwrap_or_default();

    let mut run = PropagationRun {
        pi,
        horizon,
        box_radius,
        seed,
        right_advances: Vec::new(),
        left_advances: Vec::new(),
        burn_times: vec![None; size],
        sparks: Vec::new(),
        extinguish_times: vec![None; size],
        reseed_times: vec![None; size],
        truncated: false,
    };
    run.burn_times[box_radius as usize] = Some(0.0);
    let (mut ip, mut im) = (0i64, 0i64);
    let mut open_spark: Vec<Option<usize>> = vec![None; size];
    for tr in &log {
        let k = run.idx(tr.site);
        match tr.to {
            SiteState::Burning => {
                if tr.site > ip {
                    ip = tr.site;
                    run.right_advances.push(tr.time);
                } else if tr.site < im {
                    im = tr.site;
                    run.left_advances.push(tr.time);
                }
                if run.burn_times[k].is_none() {
                    run.burn_times[k] = Some(tr.time);
                } else {
                    open_spark[k] = Some(run.sparks.len());
                    run.sparks.push(Spark { site: tr.site, start: tr.time, end: None });
                }
            }
            SiteState::Vacant => {
                if run.extinguish_times[k].is_none() {
                    run.extinguish_times[k] = Some(tr.time);
                }
                if let Some(s) = open_spark[k].take() {
                    run.sparks[s].end = Some(tr.time);
                }
            }
            SiteState::Occupied => {
                if run.extinguish_times[k].is_some() && run.reseed_times[k].is_none() {
                    run.reseed_times[k] = Some(tr.time);
                }
            }
        }
    }
    run.truncated = ip >= box_radius || im <= -box_radius;
    Ok(run)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn starts_at_origin() {
        let r = run_propagation(5.0, 1.0, 1.0, suggested_radius(5.0, 1.0), 1).unwrap();
        assert_eq!((r.i_plus(0.0), r.i_minus(0.0)), (0, 0));
        assert!(!r.truncated);
        assert_eq!(r.burn_time(0), Some(0.0));
    }

    #[test]
    fn fronts_are_monotone_and_consistent() {
        let r = run_propagation(8.0, 3.0, 1.0, suggested_radius(8.0, 3.0), 2).unwrap();
        assert!(r.right_advances.windows(2).all(|w| w[0] <= w[1]));
        for (k, &t) in r.right_advances.iter().enumerate() {
            assert_eq!(r.burn_time(k as i64 + 1), Some(t));
        }
        for (k, &t) in r.left_advances.iter().enumerate() {
            assert_eq!(r.burn_time(-(k as i64) - 1), Some(t));
        }
        // the first step of both fronts is the extinction of site 0
        assert_eq!(r.right_advances[0], r.left_advances[0]);
        for s in &r.sparks {
            assert!(s.site.abs() < r.box_radius);
            assert!(s.site < r.i_plus(s.start) && s.site > r.i_minus(s.start));
        }
    }

    #[test]
    fn small_box_truncates() {
        let r = run_propagation(50.0, 2.0, 1.0, 10, 3).unwrap();
        assert!(r.truncated);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(run_propagation(0.0, 1.0, 1.0, 10, 0).is_err());
        assert!(run_propagation(1.0, 1.0, 1.0, 0, 0).is_err());
    }

    #[test]
    fn deterministic() {
        let a = run_propagation(9.0, 5.0, 1.0, 100, 4).unwrap();
        let b = run_propagation(9.0, 5.0, 1.0, 100, 4).unwrap();
        assert_eq!(a, b);
    }
}
