//! Construction of initial configurations: seeded random draws and
//! exhaustive enumeration of all position subsets times type assignments.

use rand::Rng;
use thiserror::Error;

use crate::lattice::{Configuration, LatticeShape};
use crate::rng::master_rng;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GenerateError {
    #[error("particle count {m} outside the supported range 1..={cells}")]
    CountOutOfRange { m: u64, cells: u64 },
    #[error("enumerating would need {required} configurations, over the budget of {budget}")]
    BudgetExceeded { required: u128, budget: u64 },
}

/// Uniform random configuration: `m` distinct cells without replacement,
/// each particle's type uniform over `1..=n`. Deterministic in `seed`.
///
/// Draw order is fixed: `m` position draws (partial Fisher-Yates over the
/// flat cell range), then one type draw per particle in ascending id order.
/// Ids are assigned in ascending flat-cell order. `m = cell_count` is
/// allowed and forces every cell occupied (only the types are random).
pub fn random_configuration(
    shape: &LatticeShape,
    m: usize,
    seed: u64,
) -> Result<Configuration, GenerateError> {
    random_configuration_with(shape, m, &mut master_rng(seed))
}

/// [`random_configuration`] drawing from a caller-provided stream.
pub fn random_configuration_with(
    shape: &LatticeShape,
    m: usize,
    rng: &mut crate::rng::SimRng,
) -> Result<Configuration, GenerateError> {
    let cells = shape.cell_count();
    if m == 0 || m as u64 > cells {
        return Err(GenerateError::CountOutOfRange { m: m as u64, cells });
    }
    let mut pool: Vec<u32> = (0..cells as u32).collect();
    for i in 0..m {
        let j = i + rng.gen_range(0..(cells as usize - i) as u32) as usize;
        pool.swap(i, j);
    }
    let mut chosen = pool[..m].to_vec();
    chosen.sort_unstable();
    let n = shape.axes() as u32;
    let types: Vec<u8> = (0..m).map(|_| rng.gen_range(0..n) as u8 + 1).collect();
    let mut occupancy = vec![0u32; cells as usize];
    for (i, &cell) in chosen.iter().enumerate() {
        occupancy[cell as usize] = i as u32 + 1;
    }
    Ok(Configuration::from_raw_parts(
        shape.clone(),
        chosen,
        types,
        occupancy,
    ))
}

/// Cap on how many configurations an exhaustive enumeration may span.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumerationBudget {
    pub max_states: u64,
}

impl Default for EnumerationBudget {
    fn default() -> Self {
        Self {
            max_states: 2_000_000,
        }
    }
}

fn checked_binomial(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul((n - i) as u128)?;
        acc /= (i + 1) as u128;
    }
    Some(acc)
}

/// The full family of configurations of `m` particles on `shape`: every
/// m-subset of cells crossed with every type assignment, each exactly once.
///
/// Index order is canonical: position subsets in ascending lexicographic
/// order of their sorted flat cells, and for each subset the type odometer
/// with the last particle's type fastest-varying. [`get`](Self::get) unranks
/// an index directly, so enumeration parallelizes over index ranges without
/// changing the order.
#[derive(Debug, Clone)]
pub struct ConfigurationEnumeration {
    shape: LatticeShape,
    m: usize,
    type_count: u64,
    total: u64,
}

pub fn enumerate_configurations(
    shape: &LatticeShape,
    m: usize,
    budget: &EnumerationBudget,
) -> Result<ConfigurationEnumeration, GenerateError> {
    let cells = shape.cell_count();
    if m as u64 > cells {
        return Err(GenerateError::CountOutOfRange { m: m as u64, cells });
    }
    let over = |required: u128| GenerateError::BudgetExceeded {
        required,
        budget: budget.max_states,
    };
    let combos = checked_binomial(cells, m as u64).ok_or_else(|| over(u128::MAX))?;
    let type_count = (shape.axes() as u128)
        .checked_pow(m as u32)
        .ok_or_else(|| over(u128::MAX))?;
    let required = combos.checked_mul(type_count).ok_or_else(|| over(u128::MAX))?;
    if required > budget.max_states as u128 {
        return Err(over(required));
    }
    Ok(ConfigurationEnumeration {
        shape: shape.clone(),
        m,
        type_count: type_count as u64,
        total: required as u64,
    })
}

impl ConfigurationEnumeration {
    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn shape(&self) -> &LatticeShape {
        &self.shape
    }

    pub fn particle_count(&self) -> usize {
        self.m
    }

    /// Configuration at enumeration index `index < total()`.
    pub fn get(&self, index: u64) -> Configuration {
        debug_assert!(index < self.total);
        let combo_rank = index / self.type_count;
        let mut type_rank = index % self.type_count;
        let cells = self.unrank_combination(combo_rank);
        let n = self.shape.axes() as u64;
        let mut types = vec![0u8; self.m];
        for slot in types.iter_mut().rev() {
            *slot = (type_rank % n) as u8 + 1;
            type_rank /= n;
        }
        let mut occupancy = vec![0u32; self.shape.cell_count() as usize];
        for (i, &cell) in cells.iter().enumerate() {
            occupancy[cell as usize] = i as u32 + 1;
        }
        Configuration::from_raw_parts(self.shape.clone(), cells, types, occupancy)
    }

    pub fn iter(&self) -> impl Iterator<Item = Configuration> + '_ {
        (0..self.total).map(|i| self.get(i))
    }

    /// Lexicographic unranking of an m-subset of the flat cell range.
    fn unrank_combination(&self, rank: u64) -> Vec<u32> {
        let cells = self.shape.cell_count();
        let mut out = Vec::with_capacity(self.m);
        let mut rank = rank as u128;
        let mut candidate = 0u64;
        let mut remaining = self.m as u64;
        while remaining > 0 {
            let with_candidate =
                checked_binomial(cells - candidate - 1, remaining - 1).expect("within budget");
            if rank < with_candidate {
                out.push(candidate as u32);
                remaining -= 1;
            } else {
                rank -= with_candidate;
            }
            candidate += 1;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{validate, validate_structure};
    use std::collections::HashSet;

    fn shape(dims: &[u32]) -> LatticeShape {
        LatticeShape::new(dims.to_vec()).unwrap()
    }

    #[test]
    fn enumeration_counts() {
        let budget = EnumerationBudget::default();
        assert_eq!(
            enumerate_configurations(&shape(&[2, 2]), 1, &budget).unwrap().total(),
            8
        );
        assert_eq!(
            enumerate_configurations(&shape(&[4, 4]), 2, &budget).unwrap().total(),
            480
        );
        assert_eq!(
            enumerate_configurations(&shape(&[2, 2]), 4, &budget).unwrap().total(),
            16
        );
    }

    #[test]
    fn enumeration_is_pairwise_distinct_and_valid() {
        let budget = EnumerationBudget::default();
        let en = enumerate_configurations(&shape(&[4, 4]), 2, &budget).unwrap();
        let mut seen = HashSet::new();
        for cfg in en.iter() {
            validate(&cfg).unwrap();
            let labeled: Vec<(u32, u8)> = cfg
                .particles()
                .map(|p| (cfg.cell_of(p.id), p.ptype.get()))
                .collect();
            assert!(seen.insert(labeled));
        }
        assert_eq!(seen.len(), 480);
    }

    #[test]
    fn budget_exceeded_reports_required_count() {
        let err = enumerate_configurations(
            &shape(&[4, 4]),
            8,
            &EnumerationBudget { max_states: 1000 },
        )
        .unwrap_err();
        assert_eq!(
            err,
            GenerateError::BudgetExceeded {
                required: 12870 * 256,
                budget: 1000
            }
        );
    }

    #[test]
    fn random_configuration_is_deterministic() {
        let s = shape(&[4, 4]);
        let a = random_configuration(&s, 5, 42).unwrap();
        let b = random_configuration(&s, 5, 42).unwrap();
        assert_eq!(a, b);
        let c = random_configuration(&s, 5, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn random_configuration_single_vacancy() {
        let s = shape(&[2, 3]);
        let cfg = random_configuration(&s, 5, 7).unwrap();
        assert_eq!(cfg.len(), 5);
        let vacant: Vec<u32> = (0..6).filter(|&c| cfg.is_vacant(c)).collect();
        assert_eq!(vacant.len(), 1);
        validate(&cfg).unwrap();
    }

    #[test]
    fn random_configuration_bounds() {
        let s = shape(&[2, 2]);
        assert!(matches!(
            random_configuration(&s, 0, 1),
            Err(GenerateError::CountOutOfRange { .. })
        ));
        assert!(matches!(
            random_configuration(&s, 5, 1),
            Err(GenerateError::CountOutOfRange { .. })
        ));
        // The full lattice is constructible; only types vary.
        let full = random_configuration(&s, 4, 1).unwrap();
        assert_eq!(full.len(), 4);
        assert_eq!(validate_structure(&full), Ok(()));
    }

    #[test]
    fn random_type_frequencies_match_uniform_draws() {
        // Binomial oracle: over K = draws * m type assignments with p = 1/n,
        // each per-type count stays within 3 sigma of K/n.
        let s = shape(&[4, 4]);
        let n = 2u64;
        let m = 3usize;
        let draws = 10_000u64;
        let mut counts = vec![0u64; n as usize];
        for seed in 0..draws {
            let cfg = random_configuration(&s, m, seed).unwrap();
            for p in cfg.particles() {
                counts[p.ptype.get() as usize - 1] += 1;
            }
        }
        let k = draws * m as u64;
        let p = 1.0 / n as f64;
        let mean = k as f64 * p;
        let sigma = (k as f64 * p * (1.0 - p)).sqrt();
        for &c in &counts {
            assert!(
                (c as f64 - mean).abs() < 3.0 * sigma,
                "type count {c} outside {mean} +- 3*{sigma}"
            );
        }
    }

    #[test]
    fn validate_accepts_random_configurations() {
        for seed in 0..50 {
            let cfg = random_configuration(&shape(&[3, 4]), 6, seed).unwrap();
            validate(&cfg).unwrap();
        }
    }
}
