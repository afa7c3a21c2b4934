//! Event-driven simulation of the forest-fire process on a finite box.
//!
//! Each site carries three Poisson clocks (seed at rate 1, match at rate
//! `λ`, propagation at rate `π`). A clock's next arrival is pushed on the
//! queue only while the site is in the state where that clock acts, and it
//! is looked up on the clock's fixed Poisson path, so the trajectory is the
//! one obtained by replaying every arrival of every clock.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::metrics::IntervalOrEmpty;
use crate::rng::{stream_id, tag, Mark, PoissonClock};
use crate::scales::{box_half_width, compute_scales, Scales};

pub const DEFAULT_MEMORY_CAP: u64 = 1 << 30;

#[repr(u8)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SiteState {
    Vacant = 0,
    Occupied = 1,
    Burning = 2,
}

impl SiteState {
    fn from_u8(v: u8) -> Self {
        match v {
            0 => SiteState::Vacant,
            1 => SiteState::Occupied,
            _ => SiteState::Burning,
        }
    }
}

/// Clock kinds, ordered by tie-breaking priority.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EventKind {
    Propagate = 0,
    Match = 1,
    Seed = 2,
}

impl EventKind {
    fn tag(self) -> u64 {
        match self {
            EventKind::Seed => tag::SEED_CLOCK,
            EventKind::Match => tag::MATCH_CLOCK,
            EventKind::Propagate => tag::PROPAGATE_CLOCK,
        }
    }
}

/// The Poisson clock of `kind` at `site`, shared by the engine and by any
/// reference replay.
pub fn site_clock(seed: u64, run_tag: u64, site: i64, kind: EventKind, rate: f64) -> PoissonClock {
    PoissonClock::new(seed, stream_id(&[run_tag, kind.tag(), site as u64]), rate)
}

/// A state change, in raw time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub time: f64,
    pub site: i64,
    pub from: SiteState,
    pub to: SiteState,
    pub cause: EventKind,
}

#[derive(Debug, Clone, Copy)]
struct Pending {
    time: f64,
    site: i64,
    kind: EventKind,
    epoch: u32,
    unconditional: bool,
}

impl PartialEq for Pending {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Pending {}
impl PartialOrd for Pending {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Pending {
    // reversed: BinaryHeap is a max-heap
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then(other.site.cmp(&self.site))
            .then(other.kind.cmp(&self.kind))
    }
}

/// Where match events come from.
#[derive(Debug, Clone, PartialEq)]
pub enum MatchSource {
    /// Independent Poisson clocks of the configured rate at every site.
    Poisson,
    /// Explicit `(site, raw time)` list.
    Scheduled(Vec<(i64, f64)>),
    Disabled,
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialConfig {
    Vacant,
    Occupied,
    /// One state per site, from `-half_width` to `half_width`.
    States(Vec<SiteState>),
}

#[derive(Debug, Clone)]
pub struct EngineConfig {
    pub half_width: i64,
    pub pi: f64,
    pub match_rate: f64,
    pub matches: MatchSource,
    pub initial: InitialConfig,
    pub seed: u64,
    pub run_tag: u64,
    pub record_transitions: bool,
    pub memory_cap: u64,
}

impl EngineConfig {
    pub fn new(half_width: i64, pi: f64, match_rate: f64, seed: u64) -> Self {
        Self {
            half_width,
            pi,
            match_rate,
            matches: MatchSource::Poisson,
            initial: InitialConfig::Vacant,
            seed,
            run_tag: 0,
            record_transitions: false,
            memory_cap: DEFAULT_MEMORY_CAP,
        }
    }
}

/// Raw-time engine on the sites `-h..=h`; sites `±(h+1)` are permanently
/// vacant.
#[derive(Debug, Clone)]
pub struct Engine {
    half: i64,
    pi: f64,
    match_rate: f64,
    poisson_matches: bool,
    seed: u64,
    run_tag: u64,
    eta: Vec<u8>,
    epoch: Vec<u32>,
    clocks: [Vec<Option<PoissonClock>>; 3],
    queue: BinaryHeap<Pending>,
    now: f64,
    event_count: u64,
    burning: usize,
    transitions: Option<Vec<Transition>>,
}

impl Engine {
    pub fn new(cfg: EngineConfig) -> Result<Self> {
        if cfg.half_width < 0 {
            return param("box half-width must be nonnegative");
        }
        if !(cfg.pi > 0.0 && cfg.pi.is_finite()) {
            return param(format!("pi must be positive, got {}", cfg.pi));
        }
        if !(cfg.match_rate >= 0.0 && cfg.match_rate.is_finite()) {
            return param("match rate must be nonnegative");
        }
        let size = 2 * cfg.half_width as u64 + 1;
        if size > cfg.memory_cap {
            return Err(Error::Resource(format!(
                "box of {size} sites exceeds the cap of {} sites",
                cfg.memory_cap
            )));
        }
        let size = size as usize;
        let eta: Vec<u8> = match &cfg.initial {
            InitialConfig::Vacant => vec![SiteState::Vacant as u8; size],
            InitialConfig::Occupied => vec![SiteState::Occupied as u8; size],
            InitialConfig::States(s) => {
                if s.len() != size {
                    return param("initial configuration has the wrong length");
                }
                s.iter().map(|&x| x as u8).collect()
            }
        };
        let mut e = Engine {
            half: cfg.half_width,
            pi: cfg.pi,
            match_rate: cfg.match_rate,
            poisson_matches: matches!(cfg.matches, MatchSource::Poisson),
            seed: cfg.seed,
            run_tag: cfg.run_tag,
            burning: eta.iter().filter(|&&v| v == SiteState::Burning as u8).count(),
            eta,
            epoch: vec![0; size],
            clocks: [vec![None; size], vec![None; size], vec![None; size]],
            queue: BinaryHeap::new(),
            now: 0.0,
            event_count: 0,
            transitions: cfg.record_transitions.then(Vec::new),
        };
        if let MatchSource::Scheduled(list) = &cfg.matches {
            for &(site, time) in list {
                if site.abs() > e.half || !(time >= 0.0) {
                    return param(format!("scheduled match ({site}, {time}) outside the box"));
                }
                e.queue.push(Pending { time, site, kind: EventKind::Match, epoch: 0, unconditional: true });
            }
        }
        for site in -e.half..=e.half {
            e.arm(site, 0.0);
        }
        Ok(e)
    }

    fn idx(&self, site: i64) -> usize {
        (site + self.half) as usize
    }

    pub fn half_width(&self) -> i64 {
        self.half
    }

    pub fn now(&self) -> f64 {
        self.now
    }

    pub fn event_count(&self) -> u64 {
        self.event_count
    }

    pub fn burning_count(&self) -> usize {
        self.burning
    }

    pub fn transitions(&self) -> Option<&[Transition]> {
        self.transitions.as_deref()
    }

    pub fn take_transitions(&mut self) -> Option<Vec<Transition>> {
        self.transitions.take()
    }

    /// State of `site`; sites outside the box read as vacant.
    pub fn state(&self, site: i64) -> SiteState {
        if site.abs() > self.half {
            SiteState::Vacant
        } else {
            SiteState::from_u8(self.eta[self.idx(site)])
        }
    }

    pub fn states(&self) -> Vec<SiteState> {
        self.eta.iter().map(|&v| SiteState::from_u8(v)).collect()
    }

    fn rate(&self, kind: EventKind) -> f64 {
        match kind {
            EventKind::Seed => 1.0,
            EventKind::Match => self.match_rate,
            EventKind::Propagate => self.pi,
        }
    }

    fn schedule(&mut self, site: i64, kind: EventKind, after: f64) {
        let i = self.idx(site);
        let rate = self.rate(kind);
        let (seed, run_tag) = (self.seed, self.run_tag);
        let clock = self.clocks[kind as usize][i]
            .get_or_insert_with(|| site_clock(seed, run_tag, site, kind, rate));
        let time = clock.next_after(after);
        if time.is_finite() {
            let epoch = self.epoch[i];
            self.queue.push(Pending { time, site, kind, epoch, unconditional: false });
        }
    }

    /// Schedule the clock that acts on the current state of `site`.
    fn arm(&mut self, site: i64, after: f64) {
        match self.state(site) {
            SiteState::Vacant => self.schedule(site, EventKind::Seed, after),
            SiteState::Occupied => {
                if self.poisson_matches {
                    self.schedule(site, EventKind::Match, after)
                }
            }
            SiteState::Burning => self.schedule(site, EventKind::Propagate, after),
        }
    }

    fn set(&mut self, site: i64, to: SiteState, cause: EventKind) {
        let i = self.idx(site);
        let from = SiteState::from_u8(self.eta[i]);
        self.eta[i] = to as u8;
        self.epoch[i] = self.epoch[i].wrapping_add(1);
        if from == SiteState::Burning {
            self.burning -= 1;
        }
        if to == SiteState::Burning {
            self.burning += 1;
        }
        if let Some(log) = self.transitions.as_mut() {
            log.push(Transition { time: self.now, site, from, to, cause });
        }
        self.arm(site, self.now);
    }

    /// Time of the next pending event, if any.
    pub fn peek_time(&self) -> Option<f64> {
        self.queue.peek().map(|p| p.time)
    }

    /// Process the next pending event. Returns false when none is left.
    pub fn step(&mut self) -> bool {
        let Some(ev) = self.queue.pop() else {
            return false;
        };
        self.now = self.now.max(ev.time);
        let i = self.idx(ev.site);
        if !ev.unconditional && ev.epoch != self.epoch[i] {
            return true;
        }
        self.event_count += 1;
        let state = self.state(ev.site);
        match (ev.kind, state) {
            (EventKind::Seed, SiteState::Vacant) => self.set(ev.site, SiteState::Occupied, ev.kind),
            (EventKind::Match, SiteState::Occupied) => self.set(ev.site, SiteState::Burning, ev.kind),
            (EventKind::Propagate, SiteState::Burning) => {
                self.set(ev.site, SiteState::Vacant, ev.kind);
                for nb in [ev.site - 1, ev.site + 1] {
                    if nb.abs() <= self.half && self.state(nb) == SiteState::Occupied {
                        self.set(nb, SiteState::Burning, ev.kind);
                    }
                }
            }
            _ => {}
        }
        true
    }

    /// Process every event with raw time `≤ t`.
    pub fn advance_raw(&mut self, t: f64) {
        while let Some(next) = self.peek_time() {
            if next > t {
                break;
            }
            self.step();
        }
        self.now = self.now.max(t);
    }

    /// Force `site` to burn now if it is occupied.
    pub fn ignite(&mut self, site: i64) -> bool {
        if self.state(site) == SiteState::Occupied {
            self.set(site, SiteState::Burning, EventKind::Match);
            true
        } else {
            false
        }
    }

    /// Maximal occupied run containing `site`, clipped to the box.
    pub fn cluster(&self, site: i64) -> Option<(i64, i64)> {
        if self.state(site) != SiteState::Occupied {
            return None;
        }
        let mut l = site;
        while l > -self.half && self.state(l - 1) == SiteState::Occupied {
            l -= 1;
        }
        let mut r = site;
        while r < self.half && self.state(r + 1) == SiteState::Occupied {
            r += 1;
        }
        Some((l, r))
    }

    /// Occupied count and size of `[lo, hi] ∩ box`.
    pub fn occupied_in(&self, lo: i64, hi: i64) -> (u64, u64) {
        let lo = lo.max(-self.half);
        let hi = hi.min(self.half);
        if lo > hi {
            return (0, 0);
        }
        let occ = (lo..=hi).filter(|&i| self.state(i) == SiteState::Occupied).count() as u64;
        (occ, (hi - lo + 1) as u64)
    }
}

/// Rescaled observables around a macroscopic point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusterObservables {
    pub cluster: Option<(i64, i64)>,
    pub d: IntervalOrEmpty,
    pub k: f64,
    pub z: f64,
    pub w: f64,
}

/// `min(−ln(1−K)/ln(1/λ), 1)`.
pub fn z_from_k(k: f64, a: f64) -> f64 {
    if k >= 1.0 {
        1.0
    } else {
        (-(1.0 - k).ln() / a).min(1.0)
    }
}

/// Run-length encoded configuration with its metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub version: String,
    pub lambda: f64,
    pub pi: f64,
    #[serde(rename = "A")]
    pub big_a: f64,
    pub half_width: i64,
    pub seed: u64,
    pub t: f64,
    pub t_raw: f64,
    /// `(state, run length)` pairs from site `-half_width` upward; states
    /// are 0 vacant, 1 occupied, 2 burning.
    pub runs: Vec<(u8, u64)>,
}

impl Snapshot {
    pub fn decode(&self) -> Vec<SiteState> {
        self.runs
            .iter()
            .flat_map(|&(s, n)| std::iter::repeat_n(SiteState::from_u8(s), n as usize))
            .collect()
    }
}

pub fn rle(states: &[SiteState]) -> Vec<(u8, u64)> {
    let mut out: Vec<(u8, u64)> = Vec::new();
    for &s in states {
        match out.last_mut() {
            Some((v, n)) if *v == s as u8 => *n += 1,
            _ => out.push((s as u8, 1)),
        }
    }
    out
}

/// The `(λ, π, A)` process in macroscopic units.
#[derive(Debug, Clone)]
pub struct DiscreteFFP {
    scales: Scales,
    big_a: f64,
    seed: u64,
    engine: Engine,
}

impl DiscreteFFP {
    /// Fresh process with Poisson matches at rate `λ`.
    pub fn new(lambda: f64, pi: f64, big_a: f64, seed: u64) -> Result<Self> {
        Self::build(lambda, pi, big_a, seed, 0, MatchSource::Poisson, false)
    }

    /// Fresh process whose matches are the images of `marks` under
    /// `(x, t) ↦ (⌊n x⌋, a t)`; sites falling outside the box are clamped
    /// to its edge.
    pub fn with_marks(lambda: f64, pi: f64, big_a: f64, seed: u64, run_tag: u64, marks: &[Mark]) -> Result<Self> {
        let s = compute_scales(lambda, pi)?;
        let h = box_half_width(&s, big_a)?;
        let list = marks.iter().map(|m| (mark_site(&s, h, m.x), s.a * m.t)).collect();
        Self::build(lambda, pi, big_a, seed, run_tag, MatchSource::Scheduled(list), false)
    }

    pub fn build(
        lambda: f64,
        pi: f64,
        big_a: f64,
        seed: u64,
        run_tag: u64,
        matches: MatchSource,
        record_transitions: bool,
    ) -> Result<Self> {
        let scales = compute_scales(lambda, pi)?;
        let h = box_half_width(&scales, big_a)?;
        let mut cfg = EngineConfig::new(h, pi, lambda, seed);
        cfg.matches = matches;
        cfg.run_tag = run_tag;
        cfg.record_transitions = record_transitions;
        Ok(Self { scales, big_a, seed, engine: Engine::new(cfg)? })
    }

    pub fn scales(&self) -> &Scales {
        &self.scales
    }

    pub fn engine(&self) -> &Engine {
        &self.engine
    }

    pub fn engine_mut(&mut self) -> &mut Engine {
        &mut self.engine
    }

    pub fn half_width(&self) -> i64 {
        self.engine.half
    }

    /// Current macroscopic time.
    pub fn now(&self) -> f64 {
        self.engine.now / self.scales.a
    }

    pub fn advance_to(&mut self, t: f64) -> Result<()> {
        if !(t >= self.now() - 1e-12) {
            return param(format!("cannot go back in time from {} to {t}", self.now()));
        }
        self.engine.advance_raw(self.scales.a * t);
        Ok(())
    }

    pub fn site_of(&self, x: f64) -> i64 {
        (self.scales.n as f64 * x).floor() as i64
    }

    pub fn observables(&self, x: f64) -> Result<ClusterObservables> {
        let i = self.site_of(x);
        if i.abs() > self.engine.half {
            return param(format!("x = {x} lies outside the box"));
        }
        let n = self.scales.n as f64;
        let cluster = self.engine.cluster(i);
        let d = match cluster {
            Some((l, r)) => IntervalOrEmpty::Closed { lo: l as f64 / n, hi: r as f64 / n },
            None => IntervalOrEmpty::Empty,
        };
        let m = self.scales.m as i64;
        let (occ, size) = self.engine.occupied_in(i - m, i + m);
        let k = occ as f64 / size as f64;
        let z = z_from_k(k, self.scales.a);
        let w = match cluster {
            Some((l, r)) => ((r - l + 1) as f64).ln() / self.scales.a,
            None => 0.0,
        }
        .min(1.0);
        Ok(ClusterObservables { cluster, d, k, z, w })
    }

    pub fn cluster_size_at_origin(&mut self, t: f64) -> Result<u64> {
        self.advance_to(t)?;
        Ok(self.engine.cluster(0).map_or(0, |(l, r)| (r - l + 1) as u64))
    }

    pub fn snapshot(&self) -> Snapshot {
        Snapshot {
            version: crate::VERSION.to_string(),
            lambda: self.scales.lambda,
            pi: self.scales.pi,
            big_a: self.big_a,
            half_width: self.engine.half,
            seed: self.seed,
            t: self.now(),
            t_raw: self.engine.now,
            runs: rle(&self.engine.states()),
        }
    }
}

/// Site receiving the match of a mark at `x`.
pub fn mark_site(s: &Scales, half: i64, x: f64) -> i64 {
    ((s.n as f64 * x).floor() as i64).clamp(-half, half)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fresh_process() {
        let p = DiscreteFFP::new(0.01, 2.0, 1.0, 3).unwrap();
        assert_eq!(p.engine().states().len(), 43);
        assert_eq!(p.engine().burning_count(), 0);
        assert!(p.engine().states().iter().all(|&s| s == SiteState::Vacant));
    }

    #[test]
    fn first_event_reproducible() {
        let mut a = DiscreteFFP::new(0.05, 3.0, 2.0, 77).unwrap();
        let mut b = DiscreteFFP::new(0.05, 3.0, 2.0, 77).unwrap();
        assert_eq!(a.engine().peek_time(), b.engine().peek_time());
        a.engine_mut().step();
        b.engine_mut().step();
        assert_eq!(a.engine().states(), b.engine().states());
    }

    #[test]
    fn memory_cap() {
        let mut cfg = EngineConfig::new(100, 1.0, 0.1, 0);
        cfg.memory_cap = 150;
        assert!(matches!(Engine::new(cfg), Err(Error::Resource(_))));
    }

    #[test]
    fn no_events_no_change() {
        let mut p = DiscreteFFP::new(0.01, 2.0, 1.0, 5).unwrap();
        let first = p.engine().peek_time().unwrap();
        let before = p.engine().states();
        p.engine_mut().advance_raw(first * 0.5);
        assert_eq!(before, p.engine().states());
    }

    #[test]
    fn isolated_burning_tree() {
        let mut states = vec![SiteState::Vacant; 5];
        states[2] = SiteState::Occupied;
        let mut cfg = EngineConfig::new(2, 5.0, 0.0, 1);
        cfg.initial = InitialConfig::States(states);
        cfg.matches = MatchSource::Scheduled(vec![(0, 0.001)]);
        cfg.record_transitions = true;
        let mut e = Engine::new(cfg).unwrap();
        e.advance_raw(0.001);
        assert_eq!(e.state(0), SiteState::Burning);
        while e.state(0) == SiteState::Burning {
            e.step();
        }
        let log = e.transitions().unwrap();
        let t = log.iter().find(|tr| tr.to == SiteState::Vacant).unwrap();
        assert_eq!((t.site, t.cause), (0, EventKind::Propagate));
        assert!(log.iter().filter(|tr| tr.time == t.time).all(|tr| tr.site == 0));
    }

    #[test]
    fn segment_burn_time() {
        let len = 20i64;
        let pi = 4.0;
        let runs = 1000;
        let mut total = 0.0;
        for seed in 0..runs {
            let mut states = vec![SiteState::Vacant; (2 * len + 1) as usize];
            for s in states.iter_mut().skip(len as usize).take(len as usize) {
                *s = SiteState::Occupied;
            }
            let mut cfg = EngineConfig::new(len, pi, 0.0, seed);
            cfg.initial = InitialConfig::States(states);
            cfg.matches = MatchSource::Disabled;
            cfg.record_transitions = true;
            let mut e = Engine::new(cfg).unwrap();
            assert!(e.ignite(0));
            let mut last = 0.0;
            let mut burns = vec![0u32; len as usize];
            while e.burning_count() > 0 {
                e.step();
            }
            for tr in e.transitions().unwrap() {
                if tr.to == SiteState::Burning && (0..len).contains(&tr.site) {
                    burns[tr.site as usize] += 1;
                }
                if tr.to == SiteState::Vacant && tr.site == len - 1 && last == 0.0 {
                    last = tr.time;
                }
            }
            // sparks need a reseed in between, so each site burns at least once
            assert!(burns.iter().all(|&b| b >= 1));
            total += last;
        }
        let mean = total / runs as f64;
        let l = len as f64;
        let band = 3.0 * (l / (pi * pi) / runs as f64).sqrt();
        assert!((mean - l / pi).abs() < band, "mean {mean}");
    }

    #[test]
    fn observables_window() {
        // λ = 0.01: n = 21, m = 4
        let mut states = vec![SiteState::Vacant; 43];
        for i in -4..=4i64 {
            states[(i + 21) as usize] = SiteState::Occupied;
        }
        states[(2 + 21) as usize] = SiteState::Vacant;
        let mut p = DiscreteFFP::new(0.01, 2.0, 1.0, 0).unwrap();
        let mut cfg = EngineConfig::new(21, 2.0, 0.01, 0);
        cfg.initial = InitialConfig::States(states.clone());
        p.engine = Engine::new(cfg).unwrap();
        let o = p.observables(0.0).unwrap();
        assert!((o.k - 8.0 / 9.0).abs() < 1e-12);
        assert!((o.z - 0.47712125471966244).abs() < 1e-5);
        assert_eq!(o.cluster, Some((-4, 1)));
        assert_eq!(o.d, IntervalOrEmpty::Closed { lo: -4.0 / 21.0, hi: 1.0 / 21.0 });
        assert!((o.w - (6.0f64).ln() / 0.01f64.recip().ln()).abs() < 1e-12);

        states[(2 + 21) as usize] = SiteState::Occupied;
        let mut cfg = EngineConfig::new(21, 2.0, 0.01, 0);
        cfg.initial = InitialConfig::States(states);
        p.engine = Engine::new(cfg).unwrap();
        let o = p.observables(0.0).unwrap();
        assert_eq!((o.k, o.z), (1.0, 1.0));

        let o = p.observables(0.5).unwrap();
        assert_eq!(o.cluster, None);
        assert_eq!(o.d, IntervalOrEmpty::Empty);
        assert_eq!(o.w, 0.0);
        assert!(p.observables(1.5).is_err());
    }

    #[test]
    fn edge_window_is_clipped() {
        let mut cfg = EngineConfig::new(21, 2.0, 0.01, 0);
        cfg.initial = InitialConfig::Occupied;
        let mut p = DiscreteFFP::new(0.01, 2.0, 1.0, 0).unwrap();
        p.engine = Engine::new(cfg).unwrap();
        let o = p.observables(1.0).unwrap();
        assert_eq!(o.k, 1.0);
        assert_eq!(o.cluster, Some((-21, 21)));
    }

    #[test]
    fn snapshot_roundtrip() {
        let mut p = DiscreteFFP::new(0.05, 2.0, 2.0, 9).unwrap();
        p.advance_to(1.5).unwrap();
        let s = p.snapshot();
        assert_eq!(s.decode(), p.engine().states());
        let text = serde_json::to_string(&s).unwrap();
        let back: Snapshot = serde_json::from_str(&text).unwrap();
        assert_eq!(back, s);
        assert!(p.advance_to(1.0).is_err());
    }

    #[test]
    fn empty_at_time_zero() {
        let mut p = DiscreteFFP::new(0.01, 5.0, 1.0, 1).unwrap();
        assert_eq!(p.cluster_size_at_origin(0.0).unwrap(), 0);
    }

    #[test]
    fn occupation_without_matches() {
        // no matches: occupied at rescaled time t with probability 1 - λ^t
        let lambda: f64 = 0.01;
        let t = 0.5;
        let mut occ = 0u64;
        let mut total = 0u64;
        for seed in 0..20 {
            let mut p = DiscreteFFP::build(lambda, 2.0, 5.0, seed, 0, MatchSource::Disabled, false).unwrap();
            p.advance_to(t).unwrap();
            let (o, n) = p.engine().occupied_in(-p.half_width(), p.half_width());
            occ += o;
            total += n;
        }
        let q = 1.0 - lambda.powf(t);
        let frac = occ as f64 / total as f64;
        let sd = (q * (1.0 - q) / total as f64).sqrt();
        assert!((frac - q).abs() < 3.0 * sd, "{frac} vs {q}");
    }

    #[test]
    fn coupled_matches_reproduce_marks() {
        let s = compute_scales(0.01, 3.0).unwrap();
        let marks = vec![Mark { x: -0.5, t: 0.2 }, Mark { x: 0.3, t: 0.9 }, Mark { x: -1.0, t: 1.1 }];
        let h = box_half_width(&s, 1.0).unwrap();
        let sites: Vec<i64> = marks.iter().map(|m| mark_site(&s, h, m.x)).collect();
        assert_eq!(sites, vec![-11, 6, -21]);
        assert!(DiscreteFFP::with_marks(0.01, 3.0, 1.0, 1, 0, &marks).is_ok());
    }
}
