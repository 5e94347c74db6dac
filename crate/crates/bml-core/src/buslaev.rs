//! The deterministic (q = 0) system viewed as a network of closed
//! one-dimensional contours sharing cells as nodes.
//!
//! A type-i contour is a cyclic row of cells along axis i with the other
//! coordinates fixed; type-i particles travel on type-i contours and every
//! cell is the meeting node of exactly n contours, one per type. Conflicts
//! at nodes are resolved by the sub-step ordering (lower types move first),
//! so no extra data structure is needed here; this module adds contour
//! enumeration and limit-cycle analysis of the deterministic step map.

use std::collections::hash_map::Entry;
use std::collections::HashMap;

use num_rational::Ratio;
use thiserror::Error;

use crate::dynamics::step_deterministic_in_place;
use crate::lattice::{CellIndex, Configuration, LatticeShape, ParticleType};

/// Exact rational velocity: moves per cycle step.
pub type Velocity = Ratio<u64>;

/// One closed contour: the cyclic row of cells along the movement axis of
/// `ctype`, with all other coordinates pinned to `anchor`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Contour {
    pub ctype: ParticleType,
    /// Off-axis coordinates in ascending axis order (n - 1 entries).
    pub anchor: Vec<u32>,
    /// Cells in increasing axis coordinate.
    pub cells: Vec<CellIndex>,
}

impl Contour {
    fn new(shape: &LatticeShape, ctype: ParticleType, anchor: Vec<u32>) -> Self {
        let axis = ctype.axis();
        let cells = (0..shape.extent(axis))
            .map(|x| {
                let mut coords = Vec::with_capacity(shape.axes());
                let mut a = anchor.iter();
                for j in 0..shape.axes() {
                    coords.push(if j == axis { x } else { *a.next().unwrap() });
                }
                CellIndex(coords)
            })
            .collect();
        Self {
            ctype,
            anchor,
            cells,
        }
    }
}

/// All contours of all types; for each type i there is one contour per
/// assignment of the off-axis coordinates, so prod_{j != i} N_j of them.
/// Output order: type-major, then anchors in odometer order with the first
/// off-axis coordinate fastest-varying.
pub fn contours(shape: &LatticeShape) -> Vec<Contour> {
    let n = shape.axes();
    let mut out = Vec::new();
    for type_value in 1..=n as u8 {
        let ctype = ParticleType::new(type_value).unwrap();
        let axis = ctype.axis();
        let off_dims: Vec<u32> = (0..n)
            .filter(|&j| j != axis)
            .map(|j| shape.extent(j))
            .collect();
        let count: u64 = off_dims.iter().map(|&d| d as u64).product();
        for rank in 0..count {
            let mut anchor = Vec::with_capacity(off_dims.len());
            let mut r = rank;
            for &d in &off_dims {
                anchor.push((r % d as u64) as u32);
                r /= d as u64;
            }
            out.push(Contour::new(shape, ctype, anchor));
        }
    }
    out
}

/// The n contours meeting at one cell, one per type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeMembership {
    pub cell: CellIndex,
    pub contours: Vec<Contour>,
}

pub fn node_membership(cell: &CellIndex, shape: &LatticeShape) -> NodeMembership {
    debug_assert!(shape.contains(cell.coords()));
    let n = shape.axes();
    let contours = (1..=n as u8)
        .map(|type_value| {
            let ctype = ParticleType::new(type_value).unwrap();
            let axis = ctype.axis();
            let anchor: Vec<u32> = cell
                .coords()
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != axis)
                .map(|(_, &c)| c)
                .collect();
            Contour::new(shape, ctype, anchor)
        })
        .collect();
    NodeMembership {
        cell: cell.clone(),
        contours,
    }
}

/// Cap on the state-hash table used by cycle detection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CycleBudget {
    pub max_states: u64,
}

impl Default for CycleBudget {
    fn default() -> Self {
        Self {
            max_states: 1_000_000,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CycleError {
    #[error("cycle detection needs at least one particle")]
    EmptyConfiguration,
    #[error("visited {visited} states without recurrence, over the budget of {budget}")]
    BudgetExceeded { visited: u64, budget: u64 },
}

/// A detected attractor of the deterministic step map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LimitCycle {
    /// Steps before the first state of the cycle is reached.
    pub transient: u64,
    pub period: u64,
    /// Moves per particle over one period, indexed by id - 1.
    pub moves_in_cycle: Vec<u64>,
    pub per_particle_velocity: Vec<Velocity>,
    pub mean_velocity: Velocity,
    /// Latest step with a delayed particle, observed up to recurrence.
    pub last_delay: Option<u64>,
    /// Lexicographically minimal cycle state (by canonical state key);
    /// the attractor's identity.
    pub min_state: Configuration,
}

impl LimitCycle {
    /// True when every particle moves at every cycle step.
    pub fn is_free_movement(&self) -> bool {
        self.mean_velocity == Velocity::from_integer(1)
    }

    /// First time from which no delay ever happens again. Meaningful only
    /// when [`is_free_movement`](Self::is_free_movement) returns true.
    pub fn free_onset(&self) -> u64 {
        self.last_delay.map_or(0, |t| t + 1)
    }
}

/// Advances the deterministic step map from `initial`, hashing canonical
/// states with their times until the first recurrence, then re-traverses
/// one full period to accumulate per-particle move counts.
pub fn limit_cycle(initial: &Configuration, budget: &CycleBudget) -> Result<LimitCycle, CycleError> {
    if initial.is_empty() {
        return Err(CycleError::EmptyConfiguration);
    }
    let m = initial.len();
    let mut seen: HashMap<Vec<u8>, u64> = HashMap::new();
    seen.insert(initial.state_key(), 0);
    let mut state = initial.clone();
    let mut last_delay = None;
    let mut t = 0u64;
    let (transient, period) = loop {
        if seen.len() as u64 > budget.max_states {
            return Err(CycleError::BudgetExceeded {
                visited: seen.len() as u64,
                budget: budget.max_states,
            });
        }
        let stats = step_deterministic_in_place(&mut state, t);
        if (stats.moved_count as usize) < m {
            last_delay = Some(t);
        }
        t += 1;
        match seen.entry(state.state_key()) {
            Entry::Occupied(e) => break (*e.get(), t - *e.get()),
            Entry::Vacant(v) => {
                v.insert(t);
            }
        }
    };

    let mut cycle_state = initial.clone();
    for t in 0..transient {
        step_deterministic_in_place(&mut cycle_state, t);
    }
    let entry_key = cycle_state.state_key();
    let mut min_key = entry_key.clone();
    let mut min_state = cycle_state.clone();
    let mut moves = vec![0u64; m];
    for k in 0..period {
        let stats = step_deterministic_in_place(&mut cycle_state, transient + k);
        for (i, &mv) in stats.moved.iter().enumerate() {
            if mv {
                moves[i] += 1;
            }
        }
        if k + 1 < period {
            let key = cycle_state.state_key();
            if key < min_key {
                min_key = key;
                min_state = cycle_state.clone();
            }
        }
    }
    debug_assert_eq!(cycle_state.state_key(), entry_key);

    let per_particle_velocity: Vec<Velocity> =
        moves.iter().map(|&mv| Velocity::new(mv, period)).collect();
    let total: u64 = moves.iter().sum();
    let mean_velocity = Velocity::new(total, m as u64 * period);
    Ok(LimitCycle {
        transient,
        period,
        moves_in_cycle: moves,
        per_particle_velocity,
        mean_velocity,
        last_delay,
        min_state,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{enumerate_configurations, random_configuration, EnumerationBudget};
    use crate::lattice::validate_structure;
    use std::collections::HashSet;

    fn shape(dims: &[u32]) -> LatticeShape {
        LatticeShape::new(dims.to_vec()).unwrap()
    }

    fn t(v: u8) -> ParticleType {
        ParticleType::new(v).unwrap()
    }

    #[test]
    fn contour_counts() {
        let all = contours(&shape(&[4, 4]));
        assert_eq!(all.iter().filter(|c| c.ctype == t(1)).count(), 4);
        assert_eq!(all.iter().filter(|c| c.ctype == t(2)).count(), 4);

        let all = contours(&shape(&[2, 2, 2]));
        assert_eq!(all.len(), 12);
        for ty in 1..=3u8 {
            assert_eq!(all.iter().filter(|c| c.ctype == t(ty)).count(), 4);
        }

        assert_eq!(contours(&shape(&[3])).len(), 1);
    }

    #[test]
    fn contours_partition_the_lattice_per_type() {
        let s = shape(&[3, 4, 2]);
        let all = contours(&s);
        for ty in 1..=3u8 {
            let mut cells = HashSet::new();
            for c in all.iter().filter(|c| c.ctype == t(ty)) {
                assert_eq!(c.cells.len(), s.extent(ty as usize - 1) as usize);
                for cell in &c.cells {
                    assert!(cells.insert(s.linearize(cell.coords())));
                }
            }
            assert_eq!(cells.len() as u64, s.cell_count());
        }
    }

    #[test]
    fn node_membership_example() {
        let s = shape(&[4, 4]);
        let nm = node_membership(&CellIndex(vec![1, 2]), &s);
        assert_eq!(nm.contours.len(), 2);
        assert_eq!(nm.contours[0].ctype, t(1));
        assert_eq!(nm.contours[0].anchor, vec![2]);
        assert_eq!(nm.contours[1].ctype, t(2));
        assert_eq!(nm.contours[1].anchor, vec![1]);
        assert!(nm.contours[0]
            .cells
            .iter()
            .any(|c| c.coords() == [1, 2]));
        assert!(nm.contours[1]
            .cells
            .iter()
            .any(|c| c.coords() == [1, 2]));
    }

    #[test]
    fn cells_on_the_same_axis_share_the_contour() {
        let s = shape(&[4, 4]);
        let a = node_membership(&CellIndex(vec![0, 2]), &s);
        let b = node_membership(&CellIndex(vec![3, 2]), &s);
        assert_eq!(a.contours[0], b.contours[0]);
        assert_ne!(a.contours[1], b.contours[1]);
    }

    #[test]
    fn lone_particle_cycles_its_contour() {
        let cfg = Configuration::new(shape(&[4, 4]), vec![(CellIndex(vec![0, 0]), t(1))]).unwrap();
        let lc = limit_cycle(&cfg, &CycleBudget::default()).unwrap();
        assert_eq!(lc.transient, 0);
        assert_eq!(lc.period, 4);
        assert_eq!(lc.per_particle_velocity, vec![Velocity::from_integer(1)]);
        assert!(lc.is_free_movement());
        assert_eq!(lc.free_onset(), 0);
    }

    #[test]
    fn full_lattice_is_a_fixed_point() {
        let s = shape(&[2, 2]);
        let parts = (0..4)
            .map(|lin| (CellIndex(s.coords(lin)), t(1)))
            .collect();
        let cfg = Configuration::new(s, parts).unwrap();
        let lc = limit_cycle(&cfg, &CycleBudget::default()).unwrap();
        assert_eq!(lc.transient, 0);
        assert_eq!(lc.period, 1);
        assert!(lc
            .per_particle_velocity
            .iter()
            .all(|v| *v == Velocity::from_integer(0)));
        assert!(!lc.is_free_movement());
    }

    #[test]
    fn budget_exceeded_is_reported() {
        let cfg = random_configuration(&shape(&[6, 6]), 12, 3).unwrap();
        let err = limit_cycle(&cfg, &CycleBudget { max_states: 2 }).unwrap_err();
        assert!(matches!(err, CycleError::BudgetExceeded { budget: 2, .. }));
    }

    #[test]
    fn detection_is_deterministic() {
        let cfg = random_configuration(&shape(&[4, 4]), 6, 11).unwrap();
        let a = limit_cycle(&cfg, &CycleBudget::default()).unwrap();
        let b = limit_cycle(&cfg, &CycleBudget::default()).unwrap();
        assert_eq!(a.transient, b.transient);
        assert_eq!(a.period, b.period);
        assert_eq!(a.min_state, b.min_state);
    }

    #[test]
    fn cycle_state_returns_after_exactly_one_period() {
        for seed in 0..20u64 {
            let cfg = random_configuration(&shape(&[3, 3]), 4, seed).unwrap();
            let lc = limit_cycle(&cfg, &CycleBudget::default()).unwrap();
            let start_key = lc.min_state.state_key();
            let mut state = lc.min_state.clone();
            for k in 0..lc.period {
                step_deterministic_in_place(&mut state, k);
                if k + 1 < lc.period {
                    assert_ne!(state.state_key(), start_key, "period not minimal");
                }
            }
            assert_eq!(state.state_key(), start_key);
            validate_structure(&state).unwrap();
        }
    }

    #[test]
    fn three_particles_on_the_smallest_torus() {
        // Brute force over all 32 initial states of 3 particles on (2,2):
        // with a single vacancy nobody reaches velocity 1, and a fully
        // occupied same-type row jams its pair for good. Values pinned
        // from the first verified run.
        let en = enumerate_configurations(&shape(&[2, 2]), 3, &EnumerationBudget::default())
            .unwrap();
        assert_eq!(en.total(), 32);
        let mut velocities: Vec<Velocity> = Vec::new();
        let mut attractors = HashSet::new();
        for cfg in en.iter() {
            let lc = limit_cycle(&cfg, &CycleBudget::default()).unwrap();
            velocities.push(lc.mean_velocity);
            attractors.insert(lc.min_state.state_key());
        }
        let count = |num: u64, den: u64| {
            velocities
                .iter()
                .filter(|&&v| v == Velocity::new(num, den))
                .count()
        };
        assert_eq!(count(0, 1), 8);
        assert_eq!(count(1, 3), 8);
        assert_eq!(count(1, 2), 16);
        assert_eq!(attractors.len(), 16);
    }
}
