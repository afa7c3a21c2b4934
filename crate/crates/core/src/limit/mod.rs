//! Exact simulation of the scaling-limit processes on `[-A, A] × [0, T]`.
//!
//! [`LimitStateP`] covers the finite propagation speed `p > 0` and the
//! instantaneous case `p = 0`; [`LimitStateInf`] covers the slow regime.

mod inf;
mod p;

pub use inf::{sample_cluster_length_inf, simulate_lffp_inf, Feature, LimitStateInf};
pub use p::{simulate_alffp_p, simulate_lffp_0, Barrier, BurnRecord, Front, LimitStateP};

use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::metrics::IntervalOrEmpty;
use crate::rng::Mark;

/// Events closer than this are treated as simultaneous.
pub const TIE_TOL: f64 = 1e-12;

/// Event kinds in tie-breaking order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum LimitEventKind {
    FrontMeetsFront,
    FrontStopped,
    BarrierExpiry,
    MarkArrival,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MarkOutcome {
    /// Fell on a macroscopic zone and started a fire.
    Macroscopic,
    /// Fell on a microscopic zone and raised a barrier.
    Microscopic,
    /// Fell on an existing barrier.
    Ignored,
    /// Slow regime, before `z0`.
    Temporary,
    /// Slow regime, from `z0` on.
    Permanent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopCause {
    Barrier,
    Microscopic,
    Edge,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitEvent {
    pub time: f64,
    pub kind: LimitEventKind,
    pub x: f64,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub fronts: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub mark: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub outcome: Option<MarkOutcome>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub cause: Option<StopCause>,
    /// Zone burnt at once by an instantaneous fire.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub extent: Option<(f64, f64)>,
}

impl LimitEvent {
    pub(crate) fn new(time: f64, kind: LimitEventKind, x: f64) -> Self {
        Self { time, kind, x, fronts: Vec::new(), mark: None, outcome: None, cause: None, extent: None }
    }
}

/// Order of two candidate events under the tie rules.
pub(crate) fn event_order(a: (f64, LimitEventKind, f64), b: (f64, LimitEventKind, f64)) -> std::cmp::Ordering {
    if (a.0 - b.0).abs() > TIE_TOL {
        return a.0.total_cmp(&b.0);
    }
    a.1.cmp(&b.1).then(a.2.total_cmp(&b.2))
}

/// Value of the local state at `(x, t)` together with the cluster.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitQuery {
    pub x: f64,
    pub t: f64,
    /// `Z_t(x)`, or `Y_t(x)` in the slow regime.
    pub value: f64,
    pub h: f64,
    pub d: IntervalOrEmpty,
}

/// Common query interface of the limit processes.
pub trait LimitProcess {
    fn half_width(&self) -> f64;
    fn horizon(&self) -> f64;
    fn value(&self, x: f64, t: f64) -> f64;
    fn barrier_height(&self, x: f64, t: f64) -> f64;
    fn cluster(&self, x: f64, t: f64) -> (f64, f64);
    fn events(&self) -> &[LimitEvent];

    fn query(&self, x: f64, t: f64) -> Result<LimitQuery> {
        let a = self.half_width();
        if !(x >= -a && x <= a) || !(t >= 0.0 && t <= self.horizon()) {
            return param(format!("query ({x}, {t}) outside [-{a},{a}]x[0,{}]", self.horizon()));
        }
        let (lo, hi) = self.cluster(x, t);
        Ok(LimitQuery {
            x,
            t,
            value: self.value(x, t),
            h: self.barrier_height(x, t),
            d: IntervalOrEmpty::Closed { lo, hi },
        })
    }
}

/// Check that marks are time-sorted and inside the box.
pub fn validate_marks(marks: &[Mark], big_a: f64, horizon: f64) -> Result<()> {
    if !(big_a > 0.0 && big_a.is_finite()) || !(horizon >= 0.0 && horizon.is_finite()) {
        return param("need A > 0 and a finite horizon T >= 0");
    }
    for (k, m) in marks.iter().enumerate() {
        if !(m.x >= -big_a && m.x <= big_a && m.t >= 0.0 && m.t <= horizon) {
            return param(format!("mark {k} at ({}, {}) lies outside the box", m.x, m.t));
        }
        if k > 0 && marks[k - 1].t > m.t {
            return param(format!("marks are not sorted by time at index {k}"));
        }
    }
    Ok(())
}
