//! Velocity spectra of the deterministic system over initial-state
//! ensembles: the set of long-run mean velocities with multiplicities,
//! plus a catalog of the distinct attractors reached.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::buslaev::{limit_cycle, CycleBudget, CycleError, Velocity};
use crate::generate::{
    enumerate_configurations, random_configuration_with, EnumerationBudget, GenerateError,
};
use crate::lattice::{ConfigurationRecord, LatticeShape};
use crate::rng::derive_rng;

/// How initial states are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumMode {
    /// Every configuration of m particles, within the enumeration budget.
    Exhaustive,
    /// `samples` random configurations from the derived seed streams.
    Sampled { seed: u64, samples: u64 },
}

/// One distinct attractor, keyed by its minimal cycle state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttractorEntry {
    pub state: ConfigurationRecord,
    pub period: u64,
    pub mean_velocity: Velocity,
    /// Number of examined initial states that end in this attractor.
    pub basin_size: u64,
}

/// Exhaustive or sampled velocity spectrum.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpectrumReport {
    pub shape: LatticeShape,
    pub m: usize,
    pub mode: SpectrumMode,
    pub states_examined: u64,
    /// Distinct mean velocities with multiplicities, ascending.
    pub velocities: Vec<(Velocity, u64)>,
    /// Distinct attractors, ordered by canonical minimal state.
    pub attractors: Vec<AttractorEntry>,
}

impl SpectrumReport {
    /// Self-organization holds exactly when the spectrum is the single
    /// point {1}.
    pub fn self_organized(&self) -> bool {
        self.velocities.len() == 1 && self.velocities[0].0 == Velocity::from_integer(1)
    }

    pub fn velocity_set(&self) -> Vec<Velocity> {
        self.velocities.iter().map(|&(v, _)| v).collect()
    }

    /// Display form of the velocity value set, e.g. `{2/3, 1}`.
    pub fn velocity_set_string(&self) -> String {
        let values: Vec<String> = self
            .velocities
            .iter()
            .map(|(v, _)| v.to_string())
            .collect();
        format!("{{{}}}", values.join(", "))
    }

    pub fn to_record(&self) -> SpectrumRecord {
        SpectrumRecord {
            schema: SPECTRUM_SCHEMA.to_string(),
            shape: self.shape.to_string(),
            m: self.m as u64,
            mode: match self.mode {
                SpectrumMode::Exhaustive => "exhaustive".to_string(),
                SpectrumMode::Sampled { .. } => "sampled".to_string(),
            },
            seed: match self.mode {
                SpectrumMode::Exhaustive => None,
                SpectrumMode::Sampled { seed, .. } => Some(seed),
            },
            states_examined: self.states_examined,
            self_organized: self.self_organized(),
            velocities: self
                .velocities
                .iter()
                .map(|(v, count)| VelocityCount {
                    velocity: v.to_string(),
                    count: *count,
                })
                .collect(),
            attractors: self
                .attractors
                .iter()
                .map(|a| AttractorRecord {
                    state: a.state.clone(),
                    period: a.period,
                    mean_velocity: a.mean_velocity.to_string(),
                    basin_size: a.basin_size,
                })
                .collect(),
        }
    }
}

pub const SPECTRUM_SCHEMA: &str = "bml.spectrum.v1";

/// Serialized spectrum report. Velocities are exact rational strings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpectrumRecord {
    pub schema: String,
    pub shape: String,
    pub m: u64,
    pub mode: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub states_examined: u64,
    pub self_organized: bool,
    pub velocities: Vec<VelocityCount>,
    pub attractors: Vec<AttractorRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VelocityCount {
    pub velocity: String,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttractorRecord {
    pub state: ConfigurationRecord,
    pub period: u64,
    pub mean_velocity: String,
    pub basin_size: u64,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SpectrumError {
    #[error(transparent)]
    Generate(#[from] GenerateError),
    #[error(transparent)]
    Cycle(#[from] CycleError),
    #[error("the spectrum needs at least one particle")]
    NoParticles,
}

#[derive(Default)]
struct Accumulator {
    velocities: BTreeMap<Velocity, u64>,
    attractors: BTreeMap<Vec<u8>, AttractorEntry>,
    examined: u64,
}

impl Accumulator {
    fn add(&mut self, key: Vec<u8>, entry: AttractorEntry) {
        *self.velocities.entry(entry.mean_velocity).or_insert(0) += 1;
        self.attractors
            .entry(key)
            .and_modify(|e| e.basin_size += entry.basin_size)
            .or_insert(entry);
        self.examined += 1;
    }

    fn merge(mut self, other: Self) -> Self {
        for (v, count) in other.velocities {
            *self.velocities.entry(v).or_insert(0) += count;
        }
        for (key, entry) in other.attractors {
            self.attractors
                .entry(key)
                .and_modify(|e| e.basin_size += entry.basin_size)
                .or_insert(entry);
        }
        self.examined += other.examined;
        self
    }
}

/// Runs limit-cycle analysis over every enumerated or sampled initial
/// state of `m` particles on `shape` (q = 0 dynamics).
///
/// States are processed in parallel; the reduction is a commutative merge
/// into ordered maps, so the report is identical for any worker count.
pub fn spectrum(
    shape: &LatticeShape,
    m: usize,
    mode: SpectrumMode,
    enum_budget: &EnumerationBudget,
    cycle_budget: &CycleBudget,
) -> Result<SpectrumReport, SpectrumError> {
    if m == 0 {
        return Err(SpectrumError::NoParticles);
    }
    let acc = match mode {
        SpectrumMode::Exhaustive => {
            let en = enumerate_configurations(shape, m, enum_budget)?;
            (0..en.total())
                .into_par_iter()
                .try_fold(Accumulator::default, |mut acc, idx| {
                    let cfg = en.get(idx);
                    let lc = limit_cycle(&cfg, cycle_budget)?;
                    acc.add(
                        lc.min_state.state_key(),
                        AttractorEntry {
                            state: lc.min_state.to_record(),
                            period: lc.period,
                            mean_velocity: lc.mean_velocity,
                            basin_size: 1,
                        },
                    );
                    Ok::<_, SpectrumError>(acc)
                })
                .try_reduce(Accumulator::default, |a, b| Ok(a.merge(b)))?
        }
        SpectrumMode::Sampled { seed, samples } => (0..samples)
            .into_par_iter()
            .try_fold(Accumulator::default, |mut acc, idx| {
                let mut rng = derive_rng(seed, crate::rng::STREAM_INITIAL_STATE, idx);
                let cfg = random_configuration_with(shape, m, &mut rng)?;
                let lc = limit_cycle(&cfg, cycle_budget)?;
                acc.add(
                    lc.min_state.state_key(),
                    AttractorEntry {
                        state: lc.min_state.to_record(),
                        period: lc.period,
                        mean_velocity: lc.mean_velocity,
                        basin_size: 1,
                    },
                );
                Ok::<_, SpectrumError>(acc)
            })
            .try_reduce(Accumulator::default, |a, b| Ok(a.merge(b)))?,
    };
    Ok(SpectrumReport {
        shape: shape.clone(),
        m,
        mode,
        states_examined: acc.examined,
        velocities: acc.velocities.into_iter().collect(),
        attractors: acc.attractors.into_values().collect(),
    })
}
