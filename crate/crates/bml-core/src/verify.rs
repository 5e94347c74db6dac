//! Verifier for the gcd-based self-organization condition: with
//! m <= d/2 particles, d = gcd of the extents, every initial state must
//! reach free movement.
//!
//! For q = 0 every initial configuration is enumerated and simulated to a
//! recurrence, which decides free movement exactly. For q > 0 each initial
//! configuration is run under several independent switch-sequence streams
//! and every realization must reach the free-movement certificate within
//! the step horizon; that is a statistical proxy, not an exhaustive proof,
//! and the report says so.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::buslaev::{limit_cycle, CycleBudget, CycleError};
use crate::diagonal::PhaseTracker;
use crate::dynamics::{step_in_place, SwitchPolicy};
use crate::generate::{enumerate_configurations, EnumerationBudget, GenerateError};
use crate::lattice::{Configuration, ConfigurationRecord, LatticeShape};
use crate::rng::derive_rng;

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub policy: SwitchPolicy,
    pub enumeration: EnumerationBudget,
    pub cycle: CycleBudget,
    /// Step horizon per stochastic realization (q > 0 only).
    pub max_steps: u64,
    /// Independent switch-sequence streams per initial state (q > 0 only).
    pub switch_samples: u32,
    pub master_seed: u64,
    /// Verify beyond m <= d/2 for exploration; failures are then
    /// informational rather than falsifications.
    pub override_hypothesis: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            policy: SwitchPolicy::frozen(),
            enumeration: EnumerationBudget::default(),
            cycle: CycleBudget::default(),
            max_steps: 10_000,
            switch_samples: 16,
            master_seed: 0,
            override_hypothesis: false,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum VerifyError {
    #[error("hypothesis not met: m = {m} exceeds d/2 = {d}/2 (pass the override to explore anyway)")]
    HypothesisNotMet { m: u64, d: u32 },
    #[error("verification needs at least one particle")]
    NoParticles,
    #[error(transparent)]
    Generate(#[from] GenerateError),
    #[error(transparent)]
    Cycle(#[from] CycleError),
}

/// One non-free trajectory, reported verbatim.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    pub state: ConfigurationRecord,
    /// Index of the failing switch-sequence stream (q > 0 only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub switch_sample: Option<u32>,
    pub detail: String,
}

pub const VERIFY_SCHEMA: &str = "bml.verify.v1";

/// Machine-readable verification outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub schema: String,
    pub shape: String,
    pub m: u64,
    pub d: u32,
    pub q: f64,
    /// "exhaustive" for q = 0, "stochastic-sampled" for q > 0.
    pub mode: String,
    pub hypothesis_met: bool,
    pub states_enumerated: u64,
    /// Trajectories run: states for q = 0, states x samples for q > 0.
    pub realizations: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub switch_samples: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_steps: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub master_seed: Option<u64>,
    pub all_free: bool,
    pub free_count: u64,
    /// Onset statistics over the free realizations.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_onset: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_onset: Option<f64>,
    /// Initial state attaining the maximal onset.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst_state: Option<ConfigurationRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Counterexample>,
}

struct Outcome {
    /// (onset, state index, sample index) of the slowest free realization.
    worst: Option<(u64, u64, u32)>,
    onset_sum: u128,
    free: u64,
    total: u64,
    /// (state index, sample index, detail) of the first failure.
    failure: Option<(u64, u32, String)>,
}

impl Outcome {
    fn empty() -> Self {
        Self {
            worst: None,
            onset_sum: 0,
            free: 0,
            total: 0,
            failure: None,
        }
    }

    fn free_run(idx: u64, sample: u32, onset: u64) -> Self {
        Self {
            worst: Some((onset, idx, sample)),
            onset_sum: onset as u128,
            free: 1,
            total: 1,
            failure: None,
        }
    }

    fn failed_run(idx: u64, sample: u32, detail: String) -> Self {
        Self {
            worst: None,
            onset_sum: 0,
            free: 0,
            total: 1,
            failure: Some((idx, sample, detail)),
        }
    }

    fn merge(mut self, other: Self) -> Self {
        // Higher onset wins; ties break toward the earliest enumeration
        // index, so the outcome does not depend on work scheduling.
        self.worst = match (self.worst, other.worst) {
            (Some(a), Some(b)) => {
                let pick_b = b.0 > a.0 || (b.0 == a.0 && (b.1, b.2) < (a.1, a.2));
                Some(if pick_b { b } else { a })
            }
            (a, b) => a.or(b),
        };
        self.onset_sum += other.onset_sum;
        self.free += other.free;
        self.total += other.total;
        self.failure = match (self.failure.take(), other.failure) {
            (Some(a), Some(b)) => Some(if (b.0, b.1) < (a.0, a.1) { b } else { a }),
            (a, b) => a.or(b),
        };
        self
    }
}

/// Checks that every initial configuration of `m` particles reaches free
/// movement, exactly for q = 0 and over sampled switch sequences for q > 0.
///
/// Initial states are distributed over a worker pool; the reduction picks
/// maxima and counterexamples by canonical enumeration order, so the report
/// is identical for any worker count.
pub fn verify_self_organization(
    shape: &LatticeShape,
    m: usize,
    options: &VerifyOptions,
) -> Result<VerificationReport, VerifyError> {
    if m == 0 {
        return Err(VerifyError::NoParticles);
    }
    let d = shape.gcd();
    let hypothesis_met = 2 * m as u64 <= d as u64;
    if !hypothesis_met && !options.override_hypothesis {
        return Err(VerifyError::HypothesisNotMet { m: m as u64, d });
    }
    let en = enumerate_configurations(shape, m, &options.enumeration)?;
    let states = en.total();
    let q = options.policy.q();
    let stochastic = q > 0.0;

    let outcome = (0..states)
        .into_par_iter()
        .try_fold(Outcome::empty, |acc, idx| {
            let cfg = en.get(idx);
            let run = if stochastic {
                verify_state_stochastic(&cfg, idx, options)
            } else {
                verify_state_deterministic(&cfg, idx, options)?
            };
            Ok::<_, VerifyError>(acc.merge(run))
        })
        .try_reduce(Outcome::empty, |a, b| Ok(a.merge(b)))?;

    let counterexample = outcome.failure.as_ref().map(|(idx, sample, detail)| {
        Counterexample {
            state: en.get(*idx).to_record(),
            switch_sample: stochastic.then_some(*sample),
            detail: detail.clone(),
        }
    });
    let all_free = counterexample.is_none();
    let (max_onset, worst_state) = match outcome.worst {
        Some((onset, idx, _)) => (Some(onset), Some(en.get(idx).to_record())),
        None => (None, None),
    };
    let mean_onset = (outcome.free > 0).then(|| outcome.onset_sum as f64 / outcome.free as f64);

    Ok(VerificationReport {
        schema: VERIFY_SCHEMA.to_string(),
        shape: shape.to_string(),
        m: m as u64,
        d,
        q,
        mode: if stochastic {
            "stochastic-sampled".to_string()
        } else {
            "exhaustive".to_string()
        },
        hypothesis_met,
        states_enumerated: states,
        realizations: outcome.total,
        switch_samples: stochastic.then_some(options.switch_samples),
        max_steps: stochastic.then_some(options.max_steps),
        master_seed: stochastic.then_some(options.master_seed),
        all_free,
        free_count: outcome.free,
        max_onset,
        mean_onset,
        worst_state,
        counterexample,
    })
}

fn verify_state_deterministic(
    cfg: &Configuration,
    idx: u64,
    options: &VerifyOptions,
) -> Result<Outcome, VerifyError> {
    let lc = limit_cycle(cfg, &options.cycle)?;
    if lc.is_free_movement() {
        Ok(Outcome::free_run(idx, 0, lc.free_onset()))
    } else {
        Ok(Outcome::failed_run(
            idx,
            0,
            format!(
                "cycle of period {} with mean velocity {} (transient {})",
                lc.period, lc.mean_velocity, lc.transient
            ),
        ))
    }
}

fn verify_state_stochastic(cfg: &Configuration, idx: u64, options: &VerifyOptions) -> Outcome {
    let mut acc = Outcome::empty();
    for sample in 0..options.switch_samples {
        let mut rng = derive_rng(options.master_seed, idx, sample as u64);
        let mut state = cfg.clone();
        let mut tracker = PhaseTracker::new(&state);
        let mut onset = tracker.certificate_holds().then_some(0u64);
        let mut t = 0u64;
        while onset.is_none() && t < options.max_steps {
            let stats = step_in_place(&mut state, &options.policy, t, &mut rng);
            tracker.advance(&stats.moved);
            t += 1;
            if tracker.certificate_holds() {
                onset = Some(t);
            }
        }
        let run = match onset {
            Some(at) => Outcome::free_run(idx, sample, at),
            None => Outcome::failed_run(
                idx,
                sample,
                format!("no free-movement onset within {} steps", options.max_steps),
            ),
        };
        acc = acc.merge(run);
    }
    acc
}
