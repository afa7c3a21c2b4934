use serde::{Deserialize, Serialize};

use super::{event_order, validate_marks, LimitEvent, LimitEventKind, LimitProcess, MarkOutcome, StopCause};
use crate::error::{param, Result};
use crate::metrics::{cone_contains, ConeDir};
use crate::rng::Mark;

/// A zone burnt by a fire: points `y ∈ [lo, hi]` were crossed at time
/// `t_ref + slope·|y − x_ref|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BurnRecord {
    pub lo: f64,
    pub hi: f64,
    pub t_ref: f64,
    pub x_ref: f64,
    pub slope: f64,
}

impl BurnRecord {
    fn c(&self, y: f64) -> f64 {
        self.t_ref + self.slope * (y - self.x_ref).abs()
    }

    pub fn crossing(&self, y: f64) -> Option<f64> {
        (y >= self.lo && y <= self.hi).then(|| self.c(y))
    }

    /// Sub-intervals whose crossing time lies in `(t−1, t]`, or `(t−1, t)`
    /// when `strict`.
    fn recent(&self, t: f64, strict: bool) -> [Option<(f64, f64)>; 2] {
        let pieces = [
            (self.lo, self.hi.min(self.x_ref), -1.0),
            (self.lo.max(self.x_ref), self.hi, 1.0),
        ];
        pieces.map(|(ya, yb, side)| {
            if ya > yb {
                return None;
            }
            let (ca, cb) = (self.c(ya), self.c(yb));
            let (cmin, cmax) = (ca.min(cb), ca.max(cb));
            let below_top = if strict { cmin < t } else { cmin <= t };
            if !(cmax > t - 1.0 && below_top) {
                return None;
            }
            if self.slope == 0.0 {
                return Some((ya, yb));
            }
            let inv = |c: f64| self.x_ref + side * (c - self.t_ref) / self.slope;
            let (y1, y2) = (inv(cmin.max(t - 1.0)), inv(cmax.min(t)));
            Some((y1.min(y2).max(ya), y1.max(y2).min(yb)))
        })
    }
}

/// Barrier left by a microscopic fire: `H = expiry − t` on `[created, expiry)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Barrier {
    pub x: f64,
    pub created: f64,
    pub expiry: f64,
}

impl Barrier {
    fn active(&self, t: f64, strict: bool) -> bool {
        let started = if strict { self.created < t } else { self.created <= t };
        started && t < self.expiry
    }
}

/// A fire front started by the mark `origin`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Front {
    pub origin: Mark,
    pub dir: i8,
    pub alive: bool,
    /// Current position, or where the front stopped.
    pub pos: f64,
    pub record: usize,
}

/// Evolved state of the limit process with propagation speed `1/p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitStateP {
    pub p: f64,
    #[serde(rename = "A")]
    pub big_a: f64,
    #[serde(rename = "T")]
    pub horizon: f64,
    pub marks: Vec<Mark>,
    pub records: Vec<BurnRecord>,
    pub barriers: Vec<Barrier>,
    pub fronts: Vec<Front>,
    pub events: Vec<LimitEvent>,
}

struct Candidate {
    time: f64,
    kind: LimitEventKind,
    x: f64,
    fronts: Vec<usize>,
    cause: Option<StopCause>,
    index: usize,
}

impl LimitStateP {
    fn empty(p: f64, big_a: f64, horizon: f64, marks: &[Mark]) -> Self {
        Self {
            p,
            big_a,
            horizon,
            marks: marks.to_vec(),
            records: Vec::new(),
            barriers: Vec::new(),
            fronts: Vec::new(),
            events: Vec::new(),
        }
    }

    /// Last reset time of `x` at or before `t` (strictly before when `strict`).
    pub fn reset_time(&self, x: f64, t: f64, strict: bool) -> f64 {
        self.records
            .iter()
            .filter_map(|r| r.crossing(x))
            .filter(|&c| if strict { c < t } else { c <= t })
            .fold(0.0, f64::max)
    }

    pub fn z(&self, x: f64, t: f64) -> f64 {
        (t - self.reset_time(x, t, false)).min(1.0)
    }

    /// `Z_{t−}(x)`.
    pub fn z_left(&self, x: f64, t: f64) -> f64 {
        (t - self.reset_time(x, t, true)).min(1.0)
    }

    fn h_impl(&self, x: f64, t: f64, strict: bool) -> f64 {
        self.barriers
            .iter()
            .filter(|b| b.x == x && b.active(t, strict))
            .map(|b| b.expiry - t)
            .fold(0.0, f64::max)
    }

    pub fn h(&self, x: f64, t: f64) -> f64 {
        self.h_impl(x, t, false)
    }

    /// `H_{t−}(x)`.
    pub fn h_left(&self, x: f64, t: f64) -> f64 {
        self.h_impl(x, t, true)
    }

    /// `sup{y ≤ x : Z<1 or H>0}` (`dir = -1`) or `inf{y ≥ x : …}` (`dir = 1`).
    fn micro_edge(&self, x: f64, t: f64, strict: bool, dir: f64) -> Option<f64> {
        if t < 1.0 {
            return Some(x);
        }
        let mut best: Option<f64> = None;
        let mut take = |y: f64| {
            best = Some(match best {
                Some(b) if dir < 0.0 => b.max(y),
                Some(b) => b.min(y),
                None => y,
            })
        };
        for r in &self.records {
            for (a, b) in r.recent(t, strict).into_iter().flatten() {
                if dir < 0.0 && a <= x {
                    take(b.min(x));
                } else if dir > 0.0 && b >= x {
                    take(a.max(x));
                }
            }
        }
        for bar in &self.barriers {
            if bar.active(t, strict) && (bar.x - x) * dir >= 0.0 {
                take(bar.x);
            }
        }
        best
    }

    fn cluster_impl(&self, x: f64, t: f64, strict: bool) -> (f64, f64) {
        let l = self.micro_edge(x, t, strict, -1.0).map_or(-self.big_a, |v| v.max(-self.big_a));
        let r = self.micro_edge(x, t, strict, 1.0).map_or(self.big_a, |v| v.min(self.big_a));
        (l, r)
    }

    /// `D_{t−}(x)`.
    pub fn cluster_left(&self, x: f64, t: f64) -> (f64, f64) {
        self.cluster_impl(x, t, true)
    }

    /// Distance along the path of a fire from `origin` heading `dir`,
    /// currently at `y_start`, to the first point where it must stop;
    /// `exclude` is the fire's own record.
    fn first_block(
        &self,
        origin: Mark,
        dir: f64,
        y_start: f64,
        u_max: f64,
        exclude: Option<usize>,
    ) -> Option<(f64, StopCause)> {
        let p = self.p;
        let base = (y_start - origin.x).abs();
        let v = |u: f64| origin.t + p * (base + u);
        if v(0.0) < 1.0 {
            return Some((0.0, StopCause::Microscopic));
        }
        let mut best: Option<(f64, StopCause)> = None;
        let take = |u: f64, cause: StopCause, best: &mut Option<(f64, StopCause)>| {
            if u <= u_max && best.is_none_or(|(b, _)| u < b) {
                *best = Some((u, cause));
            }
        };
        take((self.big_a - dir * y_start).max(0.0), StopCause::Edge, &mut best);
        for b in &self.barriers {
            let d = (b.x - y_start) * dir;
            if d >= 0.0 {
                let vb = v(d);
                if b.created < vb && vb < b.expiry {
                    take(d, StopCause::Barrier, &mut best);
                }
            }
        }
        for (ri, r) in self.records.iter().enumerate() {
            if Some(ri) == exclude {
                continue;
            }
            let (ua, ub) = if dir > 0.0 {
                (r.lo - y_start, r.hi - y_start)
            } else {
                (y_start - r.hi, y_start - r.lo)
            };
            let limit = best.map_or(u_max, |(b, _)| b.min(u_max));
            let (ua, ub) = (ua.max(0.0), ub.min(limit));
            if ua > ub {
                continue;
            }
            let uref = (r.x_ref - y_start) * dir;
            let pieces: &[(f64, f64)] = if ua < uref && uref < ub {
                &[(ua, uref), (uref, ub)]
            } else {
                &[(ua, ub)]
            };
            let g = |u: f64| v(u) - r.c(y_start + dir * u);
            for &(pa, pb) in pieces {
                let (ga, gb) = (g(pa), g(pb));
                let hit = if ga > 0.0 && ga < 1.0 {
                    Some(pa)
                } else if pb > pa && ga >= 1.0 && gb < 1.0 {
                    Some(pa + (ga - 1.0) / (ga - gb) * (pb - pa))
                } else if pb > pa && ga <= 0.0 && gb > 0.0 {
                    Some(pa + (-ga) / (gb - ga) * (pb - pa))
                } else {
                    None
                };
                if let Some(u) = hit {
                    take(u, StopCause::Microscopic, &mut best);
                    break;
                }
            }
        }
        best
    }

    fn advance_fronts(&mut self, t: f64) {
        let (p, a) = (self.p, self.big_a);
        for f in self.fronts.iter_mut().filter(|f| f.alive) {
            let pos = (f.origin.x + f.dir as f64 * (t - f.origin.t) / p).clamp(-a, a);
            f.pos = pos;
            let r = &mut self.records[f.record];
            if f.dir > 0 {
                r.hi = r.hi.max(pos);
            } else {
                r.lo = r.lo.min(pos);
            }
        }
    }

    fn stop_front(&mut self, fi: usize, x: f64) {
        let f = &mut self.fronts[fi];
        f.alive = false;
        f.pos = x;
        let r = &mut self.records[f.record];
        if f.dir > 0 {
            r.hi = x.max(r.lo);
        } else {
            r.lo = x.min(r.hi);
        }
    }

    /// Whether every point of the cone segment joining `query` to `apex`
    /// has `Z = 1` and `H = 0` just before the fire would get there.
    pub fn segment_clear(&self, apex: (f64, f64), query: (f64, f64)) -> bool {
        if !cone_contains(self.p, apex, query, ConeDir::Past) {
            return false;
        }
        let (x, t) = apex;
        let (y, s) = query;
        if self.p == 0.0 {
            let (l, r) = self.cluster_left(y, s);
            return self.z_left(y, s) >= 1.0 && self.h_left(y, s) == 0.0 && l < x && x < r
                || x == y && self.z_left(y, s) >= 1.0 && self.h_left(y, s) == 0.0;
        }
        let dir = if x >= y { 1.0 } else { -1.0 };
        let _ = t;
        self.first_block(Mark { x: y, t: s }, dir, y, (x - y).abs(), None).is_none()
    }

    /// Number of fires through `(x, t)`, rebuilt from the marks.
    pub fn fire_count(&self, x: f64, t: f64) -> usize {
        self.marks
            .iter()
            .filter(|m| m.t <= t && self.segment_clear((x, t), (m.x, m.t)))
            .count()
    }

    /// Whether a `FrontStopped` event sits on a stopping point.
    pub fn stop_is_valid(&self, ev: &LimitEvent) -> bool {
        if ev.kind != LimitEventKind::FrontStopped {
            return true;
        }
        let Some(&fi) = ev.fronts.first() else {
            return false;
        };
        let f = &self.fronts[fi];
        let (x, t) = (ev.x, ev.time);
        match ev.cause {
            Some(StopCause::Edge) => (x.abs() - self.big_a).abs() < 1e-9,
            Some(StopCause::Barrier) => self
                .barriers
                .iter()
                .any(|b| (b.x - x).abs() < 1e-12 && b.created < t && t < b.expiry + 1e-12),
            Some(StopCause::Microscopic) => {
                let eta = 1e-9;
                let beyond = x + f.dir as f64 * eta;
                let at_edge = self.records.iter().enumerate().any(|(ri, r)| {
                    ri != f.record
                        && r.crossing(x).is_some_and(|c| t - c > -1e-9 && t - c <= 1.0 + 1e-9)
                });
                t < 1.0 || at_edge || self.z_left(beyond, t + self.p * eta) < 1.0
            }
            None => false,
        }
    }
}

impl LimitProcess for LimitStateP {
    fn half_width(&self) -> f64 {
        self.big_a
    }
    fn horizon(&self) -> f64 {
        self.horizon
    }
    fn value(&self, x: f64, t: f64) -> f64 {
        self.z(x, t)
    }
    fn barrier_height(&self, x: f64, t: f64) -> f64 {
        self.h(x, t)
    }
    fn cluster(&self, x: f64, t: f64) -> (f64, f64) {
        self.cluster_impl(x, t, false)
    }
    fn events(&self) -> &[LimitEvent] {
        &self.events
    }
}

fn consider(best: &mut Option<Candidate>, c: Candidate) {
    let better = match best {
        None => true,
        Some(b) => event_order((c.time, c.kind, c.x), (b.time, b.kind, b.x)).is_lt(),
    };
    if better {
        *best = Some(c);
    }
}

/// Handle a mark with the fire rule of speed `p`; returns its outcome.
fn mark_outcome(st: &LimitStateP, m: Mark) -> (MarkOutcome, f64) {
    let z = st.z_left(m.x, m.t);
    if z < 1.0 {
        (MarkOutcome::Microscopic, z)
    } else if st.h_left(m.x, m.t) > 0.0 {
        (MarkOutcome::Ignored, z)
    } else {
        (MarkOutcome::Macroscopic, z)
    }
}

/// Simulate the limit process with fronts of speed `1/p` on `[-A, A]`
/// up to time `T`, processing every event in chronological order.
pub fn simulate_alffp_p(p: f64, big_a: f64, horizon: f64, marks: &[Mark]) -> Result<LimitStateP> {
    if !(p > 0.0 && p.is_finite()) {
        return param(format!("p must be positive, got {p}"));
    }
    validate_marks(marks, big_a, horizon)?;
    let mut st = LimitStateP::empty(p, big_a, horizon, marks);
    let mut expiry_logged: Vec<bool> = Vec::new();
    let mut next_mark = 0usize;
    loop {
        let mut best: Option<Candidate> = None;
        for (fi, f) in st.fronts.iter().enumerate().filter(|(_, f)| f.alive) {
            let dir = f.dir as f64;
            if let Some((u, cause)) = st.first_block(f.origin, dir, f.pos, f64::INFINITY, Some(f.record)) {
                let time = f.origin.t + p * ((f.pos - f.origin.x).abs() + u);
                let x = (f.pos + dir * u).clamp(-big_a, big_a);
                consider(
                    &mut best,
                    Candidate { time, kind: LimitEventKind::FrontStopped, x, fronts: vec![fi], cause: Some(cause), index: 0 },
                );
            }
        }
        for (fi, f) in st.fronts.iter().enumerate().filter(|(_, f)| f.alive && f.dir > 0) {
            for (gi, g) in st.fronts.iter().enumerate().filter(|(_, g)| g.alive && g.dir < 0) {
                if g.pos > f.pos {
                    let x = 0.5 * (f.pos + g.pos);
                    let time = f.origin.t + p * (x - f.origin.x).abs();
                    consider(
                        &mut best,
                        Candidate { time, kind: LimitEventKind::FrontMeetsFront, x, fronts: vec![fi, gi], cause: None, index: 0 },
                    );
                }
            }
        }
        for (bi, b) in st.barriers.iter().enumerate() {
            if !expiry_logged[bi] && b.expiry <= horizon {
                consider(
                    &mut best,
                    Candidate { time: b.expiry, kind: LimitEventKind::BarrierExpiry, x: b.x, fronts: vec![], cause: None, index: bi },
                );
            }
        }
        if let Some(m) = marks.get(next_mark) {
            consider(
                &mut best,
                Candidate { time: m.t, kind: LimitEventKind::MarkArrival, x: m.x, fronts: vec![], cause: None, index: next_mark },
            );
        }
        let Some(c) = best else { break };
        if c.time > horizon {
            break;
        }
        st.advance_fronts(c.time);
        let mut ev = LimitEvent::new(c.time, c.kind, c.x);
        match c.kind {
            LimitEventKind::FrontStopped => {
                st.stop_front(c.fronts[0], c.x);
                ev.fronts = c.fronts;
                ev.cause = c.cause;
            }
            LimitEventKind::FrontMeetsFront => {
                for &fi in &c.fronts {
                    st.stop_front(fi, c.x);
                }
                ev.fronts = c.fronts;
            }
            LimitEventKind::BarrierExpiry => {
                expiry_logged[c.index] = true;
            }
            LimitEventKind::MarkArrival => {
                let m = marks[c.index];
                next_mark += 1;
                let (outcome, z) = mark_outcome(&st, m);
                match outcome {
                    MarkOutcome::Microscopic => {
                        st.barriers.push(Barrier { x: m.x, created: m.t, expiry: m.t + z });
                        expiry_logged.push(false);
                    }
                    MarkOutcome::Macroscopic => {
                        for dir in [-1i8, 1] {
                            st.records.push(BurnRecord { lo: m.x, hi: m.x, t_ref: m.t, x_ref: m.x, slope: p });
                            ev.fronts.push(st.fronts.len());
                            st.fronts.push(Front { origin: m, dir, alive: true, pos: m.x, record: st.records.len() - 1 });
                        }
                    }
                    _ => {}
                }
                ev.mark = Some(c.index);
                ev.outcome = Some(outcome);
            }
        }
        st.events.push(ev);
    }
    st.advance_fronts(horizon);
    Ok(st)
}

/// Simulate the limit process with instantaneous fires.
pub fn simulate_lffp_0(big_a: f64, horizon: f64, marks: &[Mark]) -> Result<LimitStateP> {
    validate_marks(marks, big_a, horizon)?;
    let mut st = LimitStateP::empty(0.0, big_a, horizon, marks);
    let mut pending: Vec<(f64, f64)> = Vec::new();
    let flush = |st: &mut LimitStateP, pending: &mut Vec<(f64, f64)>, until: f64| {
        pending.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        let k = pending.partition_point(|e| e.0 <= until);
        for (time, x) in pending.drain(..k) {
            st.events.push(LimitEvent::new(time, LimitEventKind::BarrierExpiry, x));
        }
    };
    for (k, &m) in marks.iter().enumerate() {
        // expiries strictly before the mark come first; equal times go
        // before the mark by the tie order
        flush(&mut st, &mut pending, m.t);
        let (outcome, z) = mark_outcome(&st, m);
        let mut ev = LimitEvent::new(m.t, LimitEventKind::MarkArrival, m.x);
        match outcome {
            MarkOutcome::Microscopic => {
                st.barriers.push(Barrier { x: m.x, created: m.t, expiry: m.t + z });
                if m.t + z <= horizon {
                    pending.push((m.t + z, m.x));
                }
            }
            MarkOutcome::Macroscopic => {
                let (l, r) = st.cluster_left(m.x, m.t);
                st.records.push(BurnRecord { lo: l, hi: r, t_ref: m.t, x_ref: m.x, slope: 0.0 });
                ev.extent = Some((l, r));
            }
            _ => {}
        }
        ev.mark = Some(k);
        ev.outcome = Some(outcome);
        st.events.push(ev);
    }
    flush(&mut st, &mut pending, horizon);
    Ok(st)
}
