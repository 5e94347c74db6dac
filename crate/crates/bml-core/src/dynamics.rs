//! The update rule. One time step runs n sequential per-type sub-steps
//! (types in ascending order), each a synchronous single-lane move along
//! the type's axis, and then reassigns particle types with probability q.
//!
//! Within a sub-step every type-i particle whose target cell is vacant *at
//! the start of the sub-step* relocates; all such moves commit together, so
//! a particle directly behind another of the same type stays blocked even
//! when the front one moves away. This is the single-lane traffic rule
//! applied per contour.

use rand::Rng;
use thiserror::Error;

use crate::lattice::{Configuration, ParticleType};

/// Stochastic type-switching policy applied after the movement sub-steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwitchPolicy {
    q: f64,
    redraw: RedrawRule,
}

/// Distribution of the redrawn type when a particle switches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RedrawRule {
    /// Uniform over the n-1 types other than the current one (default).
    #[default]
    OtherTypes,
    /// Uniform over all n types; the draw may land on the current type.
    AllTypes,
}

#[derive(Debug, Error, PartialEq)]
pub enum DynamicsError {
    #[error("switch probability {q} outside [0, 1)")]
    BadProbability { q: f64 },
    #[error("the dynamics need at least one particle")]
    EmptyConfiguration,
    #[error("velocity window {start}..{end} empty or outside the {len} recorded steps")]
    BadWindow {
        start: usize,
        end: usize,
        len: usize,
    },
}

impl SwitchPolicy {
    pub fn new(q: f64) -> Result<Self, DynamicsError> {
        Self::with_rule(q, RedrawRule::OtherTypes)
    }

    pub fn with_rule(q: f64, redraw: RedrawRule) -> Result<Self, DynamicsError> {
        if !(0.0..1.0).contains(&q) {
            return Err(DynamicsError::BadProbability { q });
        }
        Ok(Self { q, redraw })
    }

    /// The deterministic q = 0 policy.
    pub fn frozen() -> Self {
        Self {
            q: 0.0,
            redraw: RedrawRule::OtherTypes,
        }
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn redraw_rule(&self) -> RedrawRule {
        self.redraw
    }

    pub fn is_deterministic(&self) -> bool {
        self.q == 0.0
    }

    fn redraw_type<R: Rng>(&self, current: u8, n: usize, rng: &mut R) -> u8 {
        match self.redraw {
            RedrawRule::OtherTypes => {
                let k = rng.gen_range(0..n as u32 - 1) as u8 + 1;
                if k >= current {
                    k + 1
                } else {
                    k
                }
            }
            RedrawRule::AllTypes => rng.gen_range(0..n as u32) as u8 + 1,
        }
    }
}

/// Per-step movement record.
#[derive(Debug, Clone, PartialEq)]
pub struct StepStats {
    /// Time index of the step that produced these stats (state t -> t+1).
    pub t: u64,
    /// Which particles moved, indexed by id - 1.
    pub moved: Vec<bool>,
    pub moved_count: u32,
    pub type_changes: u32,
    /// moved_count / m, in [0, 1].
    pub velocity_instant: f64,
}

/// One synchronous sub-step for the given type; other types stay put.
/// Returns the successor configuration and the per-particle moved flags.
pub fn substep(config: &Configuration, ptype: ParticleType) -> (Configuration, Vec<bool>) {
    let mut next = config.clone();
    let mut moved = vec![false; config.len()];
    substep_in_place(&mut next, ptype.get(), &mut moved);
    (next, moved)
}

pub(crate) fn substep_in_place(
    config: &mut Configuration,
    type_value: u8,
    moved: &mut [bool],
) -> u32 {
    let axis = type_value as usize - 1;
    let m = config.len();
    // Pass 1: pick movers against the occupancy at sub-step start. Two
    // same-type particles never share a target, and no target is another
    // mover's source (targets are vacant), so the commit below is
    // order-free.
    let mut movers: Vec<(u32, u32)> = Vec::new();
    for i in 0..m {
        let id = i as u32 + 1;
        if config.type_of(id) != type_value {
            continue;
        }
        let from = config.cell_of(id);
        let to = config.shape().advance(from, axis);
        if config.is_vacant(to) {
            movers.push((id, to));
        }
    }
    // Pass 2: commit all moves.
    for &(id, _) in &movers {
        let from = config.cell_of(id);
        config.clear_cell(from);
    }
    for &(id, to) in &movers {
        config.set_cell(to, id);
        moved[id as usize - 1] = true;
    }
    // Exclusivity after every sub-step. Full revalidation is quadratic-ish
    // in lattice size, so cap it to small lattices; the per-move asserts in
    // set_cell cover the rest.
    #[cfg(debug_assertions)]
    if config.shape().cell_count() <= 4096 {
        debug_assert!(crate::lattice::validate_structure(config).is_ok());
    }
    movers.len() as u32
}

/// One full time step: movement sub-steps for types 1..=n in order, then
/// type reassignment.
///
/// RNG draws follow a fixed order so replays are bit-exact: particles in
/// ascending id order, one switch draw each (`gen::<f64>() < q`), then one
/// type draw for each particle that switches. With q = 0, or with n = 1
/// (where switching is a no-op), no draws are consumed at all.
pub fn step<R: Rng>(
    config: &Configuration,
    policy: &SwitchPolicy,
    t: u64,
    rng: &mut R,
) -> Result<(Configuration, StepStats), DynamicsError> {
    if config.is_empty() {
        return Err(DynamicsError::EmptyConfiguration);
    }
    let mut next = config.clone();
    let stats = step_in_place(&mut next, policy, t, rng);
    Ok((next, stats))
}

pub(crate) fn step_in_place<R: Rng>(
    config: &mut Configuration,
    policy: &SwitchPolicy,
    t: u64,
    rng: &mut R,
) -> StepStats {
    let m = config.len();
    let n = config.shape().axes();
    let mut moved = vec![false; m];
    let mut moved_count = 0u32;
    for type_value in 1..=n as u8 {
        moved_count += substep_in_place(config, type_value, &mut moved);
    }
    let mut type_changes = 0u32;
    if policy.q > 0.0 && n > 1 {
        for i in 0..m {
            if rng.gen::<f64>() < policy.q {
                let id = i as u32 + 1;
                let old = config.type_of(id);
                let new = policy.redraw_type(old, n, rng);
                if new != old {
                    config.set_type(id, new);
                    type_changes += 1;
                }
            }
        }
    }
    StepStats {
        t,
        moved,
        moved_count,
        type_changes,
        velocity_instant: moved_count as f64 / m as f64,
    }
}

/// Movement-only step for the deterministic q = 0 system.
pub(crate) fn step_deterministic_in_place(config: &mut Configuration, t: u64) -> StepStats {
    let m = config.len();
    let n = config.shape().axes();
    let mut moved = vec![false; m];
    let mut moved_count = 0u32;
    for type_value in 1..=n as u8 {
        moved_count += substep_in_place(config, type_value, &mut moved);
    }
    StepStats {
        t,
        moved,
        moved_count,
        type_changes: 0,
        velocity_instant: moved_count as f64 / m as f64,
    }
}

/// Observer decision after seeing a step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObserverFlow {
    Continue,
    Stop,
}

/// Hook invoked synchronously on the advancing thread.
pub trait StepObserver {
    fn on_start(&mut self, _config: &Configuration) {}

    /// Called after step `t`; `config` is the state at time `t + 1`.
    fn on_step(&mut self, _t: u64, _config: &Configuration, _stats: &StepStats) -> ObserverFlow {
        ObserverFlow::Continue
    }
}

#[derive(Debug, Clone)]
pub struct SimOptions {
    pub max_steps: u64,
    /// Retain a snapshot every this many steps (time 0 is always retained
    /// when set).
    pub snapshot_stride: Option<u64>,
    /// Seed label recorded into the trajectory for replay bookkeeping.
    pub seed: Option<u64>,
}

impl SimOptions {
    pub fn steps(max_steps: u64) -> Self {
        Self {
            max_steps,
            snapshot_stride: None,
            seed: None,
        }
    }
}

/// A finished run: the initial state, per-step stats, optional snapshots,
/// and the final state. Replaying `initial` with the same policy and seed
/// reproduces `stats` bit for bit.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub initial: Configuration,
    pub policy: SwitchPolicy,
    pub stats: Vec<StepStats>,
    pub snapshots: Vec<(u64, Configuration)>,
    pub final_state: Configuration,
    pub seed: Option<u64>,
    pub stopped_by_observer: bool,
}

impl Trajectory {
    pub fn steps_run(&self) -> u64 {
        self.stats.len() as u64
    }
}

/// Runs up to `opts.max_steps` steps, or fewer if an observer stops the
/// run. Observers see each completed step in order.
pub fn simulate<R: Rng>(
    initial: &Configuration,
    policy: &SwitchPolicy,
    opts: &SimOptions,
    rng: &mut R,
    observers: &mut [&mut dyn StepObserver],
) -> Result<Trajectory, DynamicsError> {
    if initial.is_empty() {
        return Err(DynamicsError::EmptyConfiguration);
    }
    let mut state = initial.clone();
    let mut stats = Vec::new();
    let mut snapshots = Vec::new();
    if opts.snapshot_stride.is_some() {
        snapshots.push((0, state.clone()));
    }
    for obs in observers.iter_mut() {
        obs.on_start(&state);
    }
    let mut stopped = false;
    for t in 0..opts.max_steps {
        let step_stats = step_in_place(&mut state, policy, t, rng);
        if let Some(stride) = opts.snapshot_stride {
            if stride > 0 && (t + 1) % stride == 0 {
                snapshots.push((t + 1, state.clone()));
            }
        }
        let mut flow = ObserverFlow::Continue;
        for obs in observers.iter_mut() {
            if obs.on_step(t, &state, &step_stats) == ObserverFlow::Stop {
                flow = ObserverFlow::Stop;
            }
        }
        stats.push(step_stats);
        if flow == ObserverFlow::Stop {
            stopped = true;
            break;
        }
    }
    Ok(Trajectory {
        initial: initial.clone(),
        policy: *policy,
        stats,
        snapshots,
        final_state: state,
        seed: opts.seed,
        stopped_by_observer: stopped,
    })
}

/// Arithmetic mean of `velocity_instant` over `window` (step indices).
pub fn mean_velocity(traj: &Trajectory, window: std::ops::Range<usize>) -> Result<f64, DynamicsError> {
    if window.is_empty() || window.end > traj.stats.len() {
        return Err(DynamicsError::BadWindow {
            start: window.start,
            end: window.end,
            len: traj.stats.len(),
        });
    }
    let len = window.len();
    let sum: f64 = traj.stats[window].iter().map(|s| s.velocity_instant).sum();
    Ok(sum / len as f64)
}
