//! Diagonal structure of the torus under the gcd of the extents.
//!
//! With d = gcd(N_1, ..., N_n), the cells split into d classes by
//! coordinate sum mod d. A moving particle advances one class per step, so
//! the co-moving label `phi = (class - t) mod d` is constant while the
//! particle keeps moving and drops by one exactly when it is delayed. The
//! occupancy pattern of the phi classes is what certifies free movement:
//! a blocker sits either one class ahead of the blocked particle or on the
//! same class (having advanced during an earlier sub-step of the same
//! step), so once every occupied class holds a single particle and has a
//! vacant successor, no particle can ever be blocked again, whatever the
//! types do.

use crate::buslaev::{limit_cycle, CycleBudget};
use crate::dynamics::{ObserverFlow, StepObserver, StepStats, Trajectory};
use crate::lattice::{CellIndex, Configuration, LatticeShape};

/// Greatest common divisor of the lattice extents.
pub fn gcd_all(shape: &LatticeShape) -> u32 {
    shape.gcd()
}

/// Diagonal class of a cell: coordinate sum mod d.
pub fn diagonal_index(cell: &CellIndex, d: u32) -> u32 {
    debug_assert!(d >= 1);
    let sum: u64 = cell.coords().iter().map(|&c| c as u64).sum();
    (sum % d as u64) as u32
}

/// Co-moving diagonal label `(diagonal_index - t) mod d`, in `0..d`.
pub fn phi(cell: &CellIndex, t: u64, d: u32) -> u32 {
    debug_assert!(d >= 1);
    let k = diagonal_index(cell, d);
    let shift = (t % d as u64) as u32;
    (k + d - shift) % d
}

/// Per-particle phi values and the occupancy indicator over the d classes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiagonalProfile {
    pub d: u32,
    pub t: u64,
    /// phi per particle, indexed by id - 1.
    pub phi: Vec<u32>,
    /// occupied[a] is true iff some particle has phi = a.
    pub occupied: Vec<bool>,
}

impl DiagonalProfile {
    fn from_phases(d: u32, t: u64, phases: Vec<u32>) -> Self {
        let mut occupied = vec![false; d as usize];
        for &p in &phases {
            occupied[p as usize] = true;
        }
        Self {
            d,
            t,
            phi: phases,
            occupied,
        }
    }

}

/// Profile of a configuration at time `t`.
pub fn profile(config: &Configuration, t: u64) -> DiagonalProfile {
    let d = config.shape().gcd();
    let phases = config
        .particles()
        .map(|p| phi(&p.cell, t, d))
        .collect();
    DiagonalProfile::from_phases(d, t, phases)
}

/// Maximal cyclic run of zeros in an occupancy vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ZeroCluster {
    pub start: u32,
    pub length: u32,
}

/// Maximal cyclic runs of zeros (vacant classes), by ascending start. The
/// all-zero vector yields a single cluster of length d anchored at 0; the
/// all-one vector yields none.
pub fn zero_clusters(x: &[bool]) -> Vec<ZeroCluster> {
    let d = x.len();
    debug_assert!(d >= 1);
    let ones = x.iter().filter(|&&b| b).count();
    if ones == 0 {
        return vec![ZeroCluster {
            start: 0,
            length: d as u32,
        }];
    }
    if ones == d {
        return Vec::new();
    }
    let mut out = Vec::new();
    for s in 0..d {
        if !x[s] && x[(s + d - 1) % d] {
            let mut length = 1u32;
            while !x[(s + length as usize) % d] {
                length += 1;
            }
            out.push(ZeroCluster {
                start: s as u32,
                length,
            });
        }
    }
    out
}

/// Transition rule for one particle's phi across one step: unchanged when
/// the particle moved, decremented by one (mod d) when it was delayed.
pub fn check_phase_rule(
    before: (&CellIndex, u64),
    moved: bool,
    after: (&CellIndex, u64),
    d: u32,
) -> bool {
    let prev = phi(before.0, before.1, d);
    let next = phi(after.0, after.1, d);
    let expected = if moved { prev } else { (prev + d - 1) % d };
    next == expected
}

/// Zero-cluster evolution across one observed step: the count of clusters
/// of length >= 2 never grows, and every such cluster keeps a left limit it
/// already had (the 1 just before the run stays in place).
pub fn check_cluster_monotonicity(x_t: &[bool], x_t1: &[bool]) -> bool {
    debug_assert_eq!(x_t.len(), x_t1.len());
    let wide = |x: &[bool]| -> Vec<ZeroCluster> {
        zero_clusters(x)
            .into_iter()
            .filter(|c| c.length >= 2)
            .collect()
    };
    let before = wide(x_t);
    let after = wide(x_t1);
    after.len() <= before.len()
        && after
            .iter()
            .all(|c1| before.iter().any(|c0| c0.start == c1.start))
}

/// Why a certificate does not hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CertificateViolation {
    /// Two or more particles share the diagonal class.
    SharedDiagonal { diagonal: u32 },
    /// An occupied class whose successor class is also occupied.
    OccupiedSuccessor { diagonal: u32, successor: u32 },
}

/// Sufficient condition for permanent free movement: every occupied class
/// holds exactly one particle and its successor class is vacant. Both
/// halves matter — a blocker reaches a particle's target cell either from
/// the successor class or from the particle's own class via an earlier
/// sub-step.
///
/// Sufficient but not necessary: under the frozen (q = 0) dynamics,
/// geometries exist that never delay anyone yet keep two particles on one
/// class, which is why deterministic detection also accepts the cycle
/// criterion (see [`detect_free_movement`]).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FreeMovementCertificate {
    pub holds: bool,
    pub witness: Option<CertificateViolation>,
}

/// Evaluates the strict certificate on a profile. With d = 1 and m >= 1 the
/// successor of the single class is itself, so the certificate fails.
pub fn certificate(profile: &DiagonalProfile) -> FreeMovementCertificate {
    let d = profile.d as usize;
    let mut counts = vec![0u32; d];
    for &p in &profile.phi {
        counts[p as usize] += 1;
    }
    for (a, &c) in counts.iter().enumerate() {
        if c >= 2 {
            return FreeMovementCertificate {
                holds: false,
                witness: Some(CertificateViolation::SharedDiagonal { diagonal: a as u32 }),
            };
        }
    }
    for (a, &c) in counts.iter().enumerate() {
        let succ = (a + 1) % d;
        if c >= 1 && counts[succ] >= 1 {
            return FreeMovementCertificate {
                holds: false,
                witness: Some(CertificateViolation::OccupiedSuccessor {
                    diagonal: a as u32,
                    successor: succ as u32,
                }),
            };
        }
    }
    FreeMovementCertificate {
        holds: true,
        witness: None,
    }
}

/// Incremental phi bookkeeping along a trajectory. Movement flags alone
/// determine the evolution, so no configuration snapshots are needed.
#[derive(Debug, Clone)]
pub struct PhaseTracker {
    d: u32,
    phases: Vec<u32>,
    counts: Vec<u32>,
}

impl PhaseTracker {
    pub fn new(config: &Configuration) -> Self {
        let d = config.shape().gcd();
        let phases: Vec<u32> = config.particles().map(|p| phi(&p.cell, 0, d)).collect();
        let mut counts = vec![0u32; d as usize];
        for &p in &phases {
            counts[p as usize] += 1;
        }
        Self { d, phases, counts }
    }

    /// Applies one step's movement flags: delayed particles drop one class.
    pub fn advance(&mut self, moved: &[bool]) {
        debug_assert_eq!(moved.len(), self.phases.len());
        for (i, &did_move) in moved.iter().enumerate() {
            if !did_move {
                let old = self.phases[i];
                let new = (old + self.d - 1) % self.d;
                self.counts[old as usize] -= 1;
                self.counts[new as usize] += 1;
                self.phases[i] = new;
            }
        }
    }

    pub fn phases(&self) -> &[u32] {
        &self.phases
    }

    pub fn profile(&self, t: u64) -> DiagonalProfile {
        DiagonalProfile::from_phases(self.d, t, self.phases.clone())
    }

    /// The certificate: single occupancy everywhere plus vacant successors.
    pub fn certificate_holds(&self) -> bool {
        let d = self.d as usize;
        self.counts.iter().all(|&c| c <= 1)
            && (0..d).all(|a| !(self.counts[a] >= 1 && self.counts[(a + 1) % d] >= 1))
    }
}

/// How a free-movement onset was established.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OnsetConfirmation {
    /// Deterministic replay found a recurrent cycle with every step at
    /// velocity 1 (q = 0 only). Pins the onset exactly.
    CycleAnalysis,
    /// The certificate held; free movement may have started earlier.
    Certificate,
}

/// Earliest established free-movement time plus the individual detector
/// onsets and the last observed delay.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OnsetReport {
    pub onset: u64,
    pub confirmation: OnsetConfirmation,
    pub certificate_onset: Option<u64>,
    pub cycle_onset: Option<u64>,
    /// Latest observed step in which some particle was delayed.
    pub last_delay: Option<u64>,
}

/// Scans a trajectory for free movement with the default replay budget.
pub fn detect_free_movement(traj: &Trajectory) -> Option<OnsetReport> {
    detect_free_movement_with(traj, &CycleBudget::default())
}

/// Reports the earliest time the certificate holds along the observed
/// steps; for q = 0 the deterministic dynamics are additionally replayed to
/// a recurrence, which decides free movement exactly (states that share a
/// diagonal class but never delay are free without ever certifying) and
/// yields the exact onset, last delay + 1.
pub fn detect_free_movement_with(traj: &Trajectory, budget: &CycleBudget) -> Option<OnsetReport> {
    let m = traj.initial.len();
    if m == 0 {
        return None;
    }
    let mut tracker = PhaseTracker::new(&traj.initial);
    let mut certificate_onset = tracker.certificate_holds().then_some(0);
    let mut last_delay = None;
    for stats in &traj.stats {
        if (stats.moved_count as usize) < m {
            last_delay = Some(stats.t);
        }
        tracker.advance(&stats.moved);
        if certificate_onset.is_none() && tracker.certificate_holds() {
            certificate_onset = Some(stats.t + 1);
        }
    }
    let mut cycle_onset = None;
    if traj.policy.is_deterministic() {
        if let Ok(cycle) = limit_cycle(&traj.initial, budget) {
            if cycle.is_free_movement() {
                cycle_onset = Some(cycle.free_onset());
                last_delay = cycle.last_delay;
            }
        }
    }
    let (onset, confirmation) = match (cycle_onset, certificate_onset) {
        (Some(t), _) => (t, OnsetConfirmation::CycleAnalysis),
        (None, Some(t)) => (t, OnsetConfirmation::Certificate),
        (None, None) => return None,
    };
    Some(OnsetReport {
        onset,
        confirmation,
        certificate_onset,
        cycle_onset,
        last_delay,
    })
}

/// Observer that stops a run as soon as the certificate holds, recording
/// the onset.
#[derive(Debug)]
pub struct CertificateObserver {
    tracker: Option<PhaseTracker>,
    pub onset: Option<u64>,
}

impl CertificateObserver {
    pub fn new() -> Self {
        Self {
            tracker: None,
            onset: None,
        }
    }
}

impl Default for CertificateObserver {
    fn default() -> Self {
        Self::new()
    }
}

impl StepObserver for CertificateObserver {
    fn on_start(&mut self, config: &Configuration) {
        let tracker = PhaseTracker::new(config);
        if tracker.certificate_holds() {
            self.onset = Some(0);
        }
        self.tracker = Some(tracker);
    }

    fn on_step(&mut self, t: u64, _config: &Configuration, stats: &StepStats) -> ObserverFlow {
        if self.onset.is_some() {
            return ObserverFlow::Stop;
        }
        let tracker = self.tracker.as_mut().expect("on_start ran");
        tracker.advance(&stats.moved);
        if tracker.certificate_holds() {
            self.onset = Some(t + 1);
            ObserverFlow::Stop
        } else {
            ObserverFlow::Continue
        }
    }
}

/// Observer asserting the phase rule and cluster monotonicity on every
/// transition, against phases recomputed from the raw cells.
#[derive(Debug, Default)]
pub struct InvariantObserver {
    d: u32,
    prev_phases: Vec<u32>,
    prev_occupied: Vec<bool>,
    pub transitions: u64,
    pub phase_rule_failures: u64,
    pub cluster_failures: u64,
}

impl InvariantObserver {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn all_passed(&self) -> bool {
        self.phase_rule_failures == 0 && self.cluster_failures == 0
    }

    fn occupied_of(&self, phases: &[u32]) -> Vec<bool> {
        let mut occ = vec![false; self.d as usize];
        for &p in phases {
            occ[p as usize] = true;
        }
        occ
    }
}

impl StepObserver for InvariantObserver {
    fn on_start(&mut self, config: &Configuration) {
        self.d = config.shape().gcd();
        self.prev_phases = config.particles().map(|p| phi(&p.cell, 0, self.d)).collect();
        self.prev_occupied = self.occupied_of(&self.prev_phases.clone());
    }

    fn on_step(&mut self, t: u64, config: &Configuration, stats: &StepStats) -> ObserverFlow {
        let phases: Vec<u32> = config
            .particles()
            .map(|p| phi(&p.cell, t + 1, self.d))
            .collect();
        for (i, &next) in phases.iter().enumerate() {
            let prev = self.prev_phases[i];
            let expected = if stats.moved[i] {
                prev
            } else {
                (prev + self.d - 1) % self.d
            };
            if next != expected {
                self.phase_rule_failures += 1;
            }
            self.transitions += 1;
        }
        let occupied = self.occupied_of(&phases);
        if !check_cluster_monotonicity(&self.prev_occupied, &occupied) {
            self.cluster_failures += 1;
        }
        self.prev_phases = phases;
        self.prev_occupied = occupied;
        ObserverFlow::Continue
    }
}
