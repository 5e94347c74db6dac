//! Toroidal lattice, cells, particles, and configurations.
//!
//! Cells are addressed either by per-axis coordinates (axis `j` in
//! `0..N_j`) or by a flat index with the first coordinate fastest-varying:
//! `lin = x_1 + N_1 * (x_2 + N_2 * (x_3 + ...))`. The flat form backs the
//! O(1) occupancy index used by the stepping engine.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Dimensions `(N_1, ..., N_n)` of the periodic lattice.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LatticeShape {
    dims: Vec<u32>,
    strides: Vec<u32>,
    cell_count: u64,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ShapeError {
    #[error("shape needs at least one dimension")]
    Empty,
    #[error("axis {axis} has zero extent")]
    ZeroExtent { axis: usize },
    #[error("{n} axes exceed the supported maximum of 255")]
    TooManyAxes { n: usize },
    #[error("lattice of {cells} cells exceeds the supported maximum of {max}")]
    TooLarge { cells: u128, max: u64 },
    #[error("cannot parse shape {input:?}: expected 'x'-separated positive integers, e.g. \"4x4\"")]
    Parse { input: String },
}

impl LatticeShape {
    /// Maximum supported cell count (flat indices are `u32`).
    pub const MAX_CELLS: u64 = u32::MAX as u64;

    pub fn new(dims: Vec<u32>) -> Result<Self, ShapeError> {
        if dims.is_empty() {
            return Err(ShapeError::Empty);
        }
        if dims.len() > 255 {
            return Err(ShapeError::TooManyAxes { n: dims.len() });
        }
        if let Some(axis) = dims.iter().position(|&d| d == 0) {
            return Err(ShapeError::ZeroExtent { axis });
        }
        let cells: u128 = dims.iter().map(|&d| d as u128).product();
        if cells > Self::MAX_CELLS as u128 {
            return Err(ShapeError::TooLarge {
                cells,
                max: Self::MAX_CELLS,
            });
        }
        let mut strides = Vec::with_capacity(dims.len());
        let mut stride = 1u64;
        for &d in &dims {
            strides.push(stride as u32);
            stride *= d as u64;
        }
        Ok(Self {
            dims,
            strides,
            cell_count: cells as u64,
        })
    }

    /// Number of axes `n`.
    pub fn axes(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[u32] {
        &self.dims
    }

    pub fn extent(&self, axis: usize) -> u32 {
        self.dims[axis]
    }

    pub fn cell_count(&self) -> u64 {
        self.cell_count
    }

    /// Greatest common divisor of all extents.
    pub fn gcd(&self) -> u32 {
        self.dims.iter().copied().fold(0, num_integer::gcd)
    }

    /// Least common multiple of all extents (used for observation horizons).
    pub fn lcm(&self) -> u64 {
        self.dims
            .iter()
            .map(|&d| d as u64)
            .fold(1u64, num_integer::lcm)
    }

    pub fn contains(&self, coords: &[u32]) -> bool {
        coords.len() == self.dims.len() && coords.iter().zip(&self.dims).all(|(&c, &d)| c < d)
    }

    /// Flat index of a cell; the first coordinate varies fastest.
    pub fn linearize(&self, coords: &[u32]) -> u32 {
        debug_assert!(self.contains(coords));
        coords
            .iter()
            .zip(&self.strides)
            .map(|(&c, &s)| c * s)
            .sum()
    }

    pub fn coords(&self, lin: u32) -> Vec<u32> {
        debug_assert!((lin as u64) < self.cell_count);
        self.dims
            .iter()
            .zip(&self.strides)
            .map(|(&d, &s)| (lin / s) % d)
            .collect()
    }

    /// Flat index of the cell one step ahead along `axis`, wrapping around.
    pub fn advance(&self, lin: u32, axis: usize) -> u32 {
        let d = self.dims[axis];
        let s = self.strides[axis];
        let x = (lin / s) % d;
        if x + 1 == d {
            lin - (d - 1) * s
        } else {
            lin + s
        }
    }

    /// Coordinate sum of a flat index, for diagonal classification.
    pub fn coordinate_sum(&self, lin: u32) -> u64 {
        self.dims
            .iter()
            .zip(&self.strides)
            .map(|(&d, &s)| ((lin / s) % d) as u64)
            .sum()
    }
}

impl fmt::Display for LatticeShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for d in &self.dims {
            if !first {
                write!(f, "x")?;
            }
            write!(f, "{d}")?;
            first = false;
        }
        Ok(())
    }
}

impl FromStr for LatticeShape {
    type Err = ShapeError;

    /// Parses the `"N1xN2x...xNn"` grammar, lowercase 'x' separators.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parse = || -> Option<Vec<u32>> {
            if s.is_empty() {
                return None;
            }
            s.split('x')
                .map(|part| {
                    let v: u32 = part.parse().ok()?;
                    (v > 0).then_some(v)
                })
                .collect()
        };
        let dims = parse().ok_or_else(|| ShapeError::Parse {
            input: s.to_string(),
        })?;
        Self::new(dims)
    }
}

/// Coordinates of one cell, one entry per axis.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CellIndex(pub Vec<u32>);

impl CellIndex {
    pub fn coords(&self) -> &[u32] {
        &self.0
    }
}

impl fmt::Display for CellIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl From<Vec<u32>> for CellIndex {
    fn from(coords: Vec<u32>) -> Self {
        Self(coords)
    }
}

/// Particle type `i` in `1..=n`: the particle moves along axis `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParticleType(u8);

impl ParticleType {
    /// `value` is the 1-based type number.
    pub fn new(value: u8) -> Option<Self> {
        (value >= 1).then_some(Self(value))
    }

    pub fn get(self) -> u8 {
        self.0
    }

    /// 0-based axis index the type moves along.
    pub fn axis(self) -> usize {
        self.0 as usize - 1
    }
}

impl fmt::Display for ParticleType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Snapshot view of one particle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Particle {
    pub id: u32,
    pub cell: CellIndex,
    pub ptype: ParticleType,
}

/// One step ahead of `cell` along the movement axis of `ptype`, wrapping
/// around the torus.
pub fn neighbor(cell: &CellIndex, ptype: ParticleType, shape: &LatticeShape) -> CellIndex {
    debug_assert!(shape.contains(cell.coords()));
    debug_assert!(ptype.axis() < shape.axes());
    let mut coords = cell.0.clone();
    let axis = ptype.axis();
    coords[axis] = (coords[axis] + 1) % shape.extent(axis);
    CellIndex(coords)
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ValidationError {
    #[error("particle {id}: {coords} has coordinate {value} on axis {axis}, outside 0..{extent}")]
    CoordinateOutOfRange {
        id: u32,
        coords: String,
        axis: usize,
        value: u32,
        extent: u32,
    },
    #[error("particle {id}: type {value} outside 1..={n}")]
    TypeOutOfRange { id: u32, value: u8, n: usize },
    #[error("particle ids must be exactly 1..={m}, found id {found}")]
    BadParticleId { m: usize, found: u32 },
    #[error("particles {first} and {second} both occupy cell {cell}")]
    DuplicateCell { first: u32, second: u32, cell: String },
    #[error("occupancy index disagrees with the particle list at cell {cell}")]
    InconsistentOccupancy { cell: String },
    #[error("particle count {m} outside the dynamics range 1..{cells}")]
    CountOutOfRange { m: u64, cells: u64 },
}

/// Full system state: particle positions and types plus an occupancy index
/// mapping each cell to the particle id sitting there (0 = vacant).
///
/// Particle ids are `1..=m` and never change over a trajectory. Values are
/// immutable snapshots from the caller's perspective; the stepping engine
/// builds successors rather than mutating shared state.
#[derive(Debug, Clone)]
pub struct Configuration {
    shape: LatticeShape,
    /// Flat cell per particle, index = id - 1.
    cells: Vec<u32>,
    /// 1-based type per particle, index = id - 1.
    types: Vec<u8>,
    /// Cell -> particle id, 0 = vacant.
    occupancy: Vec<u32>,
}

impl PartialEq for Configuration {
    fn eq(&self, other: &Self) -> bool {
        self.shape == other.shape && self.cells == other.cells && self.types == other.types
    }
}

impl Eq for Configuration {}

impl Configuration {
    /// Builds a configuration from `(cell, type)` pairs; ids are assigned
    /// `1..=m` in the order given. Rejects structurally broken input.
    pub fn new(
        shape: LatticeShape,
        particles: Vec<(CellIndex, ParticleType)>,
    ) -> Result<Self, ValidationError> {
        let mut cells = Vec::with_capacity(particles.len());
        let mut types = Vec::with_capacity(particles.len());
        let mut occupancy = vec![0u32; shape.cell_count() as usize];
        for (i, (cell, ptype)) in particles.into_iter().enumerate() {
            let id = i as u32 + 1;
            for (axis, (&value, &extent)) in cell.coords().iter().zip(shape.dims()).enumerate() {
                if value >= extent {
                    return Err(ValidationError::CoordinateOutOfRange {
                        id,
                        coords: cell.to_string(),
                        axis,
                        value,
                        extent,
                    });
                }
            }
            if cell.coords().len() != shape.axes() || ptype.axis() >= shape.axes() {
                return Err(ValidationError::TypeOutOfRange {
                    id,
                    value: ptype.get(),
                    n: shape.axes(),
                });
            }
            let lin = shape.linearize(cell.coords());
            if occupancy[lin as usize] != 0 {
                return Err(ValidationError::DuplicateCell {
                    first: occupancy[lin as usize],
                    second: id,
                    cell: cell.to_string(),
                });
            }
            occupancy[lin as usize] = id;
            cells.push(lin);
            types.push(ptype.get());
        }
        Ok(Self {
            shape,
            cells,
            types,
            occupancy,
        })
    }

    /// Assembles a configuration from pre-built parts without checking them.
    /// Callers feeding external data should run [`validate`] afterwards.
    pub fn from_raw_parts(
        shape: LatticeShape,
        cells: Vec<u32>,
        types: Vec<u8>,
        occupancy: Vec<u32>,
    ) -> Self {
        Self {
            shape,
            cells,
            types,
            occupancy,
        }
    }

    pub fn shape(&self) -> &LatticeShape {
        &self.shape
    }

    /// Number of particles `m`.
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Flat cell of particle `id`.
    pub fn cell_of(&self, id: u32) -> u32 {
        self.cells[id as usize - 1]
    }

    /// 1-based type of particle `id`.
    pub fn type_of(&self, id: u32) -> u8 {
        self.types[id as usize - 1]
    }

    /// Particle id occupying the flat cell, if any.
    pub fn occupant(&self, lin: u32) -> Option<u32> {
        match self.occupancy[lin as usize] {
            0 => None,
            id => Some(id),
        }
    }

    pub fn is_vacant(&self, lin: u32) -> bool {
        self.occupancy[lin as usize] == 0
    }

    pub fn particle(&self, id: u32) -> Particle {
        let i = id as usize - 1;
        Particle {
            id,
            cell: CellIndex(self.shape.coords(self.cells[i])),
            ptype: ParticleType(self.types[i]),
        }
    }

    pub fn particles(&self) -> impl Iterator<Item = Particle> + '_ {
        (1..=self.cells.len() as u32).map(|id| self.particle(id))
    }

    pub(crate) fn clear_cell(&mut self, lin: u32) {
        self.occupancy[lin as usize] = 0;
    }

    pub(crate) fn set_cell(&mut self, lin: u32, id: u32) {
        debug_assert_eq!(self.occupancy[lin as usize], 0);
        self.occupancy[lin as usize] = id;
        self.cells[id as usize - 1] = lin;
    }

    pub(crate) fn set_type(&mut self, id: u32, value: u8) {
        self.types[id as usize - 1] = value;
    }

    /// Canonical id-free state key: one byte per cell, 0 for vacant, the
    /// particle type otherwise. Two configurations with the same key evolve
    /// identically under the deterministic dynamics.
    pub fn state_key(&self) -> Vec<u8> {
        let mut key = vec![0u8; self.occupancy.len()];
        for (i, &cell) in self.cells.iter().enumerate() {
            key[cell as usize] = self.types[i];
        }
        key
    }

    /// Serializable record form (see [`ConfigurationRecord`]).
    pub fn to_record(&self) -> ConfigurationRecord {
        ConfigurationRecord {
            shape: self.shape.to_string(),
            particles: self
                .particles()
                .map(|p| ParticleRecord {
                    id: p.id,
                    coords: p.cell.0,
                    ptype: p.ptype.get(),
                })
                .collect(),
        }
    }
}

/// Checks every configuration invariant, reporting the first violation:
/// coordinate and type ranges, particle ids, cell exclusivity, occupancy
/// consistency, and finally the dynamics particle-count bound
/// `1 <= m < cell_count`. Pure lattice utilities accept configurations that
/// fail only the count bound (the empty and the completely full lattice).
pub fn validate(config: &Configuration) -> Result<(), ValidationError> {
    validate_structure(config)?;
    let m = config.len() as u64;
    let cells = config.shape().cell_count();
    if m == 0 || m >= cells {
        return Err(ValidationError::CountOutOfRange { m, cells });
    }
    Ok(())
}

/// Structural subset of [`validate`]: everything except the count bound.
pub fn validate_structure(config: &Configuration) -> Result<(), ValidationError> {
    let shape = &config.shape;
    let n = shape.axes();
    let m = config.cells.len();
    if config.types.len() != m {
        return Err(ValidationError::BadParticleId {
            m,
            found: config.types.len() as u32,
        });
    }
    if config.occupancy.len() != shape.cell_count() as usize {
        return Err(ValidationError::InconsistentOccupancy {
            cell: "<occupancy length>".to_string(),
        });
    }
    let mut seen = vec![0u32; shape.cell_count() as usize];
    for (i, (&cell, &ptype)) in config.cells.iter().zip(&config.types).enumerate() {
        let id = i as u32 + 1;
        if cell as u64 >= shape.cell_count() {
            return Err(ValidationError::CoordinateOutOfRange {
                id,
                coords: format!("<flat {cell}>"),
                axis: 0,
                value: cell,
                extent: shape.cell_count() as u32,
            });
        }
        if ptype == 0 || ptype as usize > n {
            return Err(ValidationError::TypeOutOfRange {
                id,
                value: ptype,
                n,
            });
        }
        if seen[cell as usize] != 0 {
            return Err(ValidationError::DuplicateCell {
                first: seen[cell as usize],
                second: id,
                cell: CellIndex(shape.coords(cell)).to_string(),
            });
        }
        seen[cell as usize] = id;
    }
    for (lin, (&expected, &actual)) in seen.iter().zip(&config.occupancy).enumerate() {
        if expected != actual {
            return Err(ValidationError::InconsistentOccupancy {
                cell: CellIndex(shape.coords(lin as u32)).to_string(),
            });
        }
    }
    Ok(())
}

/// Per-particle record of the serialized configuration schema.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParticleRecord {
    pub id: u32,
    pub coords: Vec<u32>,
    #[serde(rename = "type")]
    pub ptype: u8,
}

/// Serialized form of a [`Configuration`]: the shape string plus one record
/// per particle, ordered by id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfigurationRecord {
    pub shape: String,
    pub particles: Vec<ParticleRecord>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RecordError {
    #[error(transparent)]
    Shape(#[from] ShapeError),
    #[error(transparent)]
    Validation(#[from] ValidationError),
    #[error("particle records must be sorted by id starting at 1, found id {found} at position {position}")]
    UnsortedIds { found: u32, position: usize },
}

impl ConfigurationRecord {
    /// Rebuilds the configuration, checking structural validity.
    pub fn to_configuration(&self) -> Result<Configuration, RecordError> {
        let shape: LatticeShape = self.shape.parse()?;
        for (i, p) in self.particles.iter().enumerate() {
            if p.id != i as u32 + 1 {
                return Err(RecordError::UnsortedIds {
                    found: p.id,
                    position: i,
                });
            }
        }
        let particles = self
            .particles
            .iter()
            .map(|p| {
                let ptype = ParticleType::new(p.ptype).ok_or(ValidationError::TypeOutOfRange {
                    id: p.id,
                    value: p.ptype,
                    n: shape.axes(),
                })?;
                if !shape.contains(&p.coords) {
                    let (axis, value, extent) = p
                        .coords
                        .iter()
                        .zip(shape.dims())
                        .enumerate()
                        .find(|(_, (c, d))| c >= d)
                        .map(|(a, (&c, &d))| (a, c, d))
                        .unwrap_or((0, p.coords.len() as u32, shape.axes() as u32));
                    return Err(ValidationError::CoordinateOutOfRange {
                        id: p.id,
                        coords: CellIndex(p.coords.clone()).to_string(),
                        axis,
                        value,
                        extent,
                    });
                }
                Ok((CellIndex(p.coords.clone()), ptype))
            })
            .collect::<Result<Vec<_>, ValidationError>>()?;
        Ok(Configuration::new(shape, particles)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shape(dims: &[u32]) -> LatticeShape {
        LatticeShape::new(dims.to_vec()).unwrap()
    }

    fn t(v: u8) -> ParticleType {
        ParticleType::new(v).unwrap()
    }

    #[test]
    fn shape_parse_and_display() {
        let s: LatticeShape = "4x4".parse().unwrap();
        assert_eq!(s.dims(), &[4, 4]);
        assert_eq!(s.to_string(), "4x4");
        let s: LatticeShape = "2x2x2".parse().unwrap();
        assert_eq!(s.cell_count(), 8);
        assert!("".parse::<LatticeShape>().is_err());
        assert!("4X4".parse::<LatticeShape>().is_err());
        assert!("4x0".parse::<LatticeShape>().is_err());
        assert!("-4x4".parse::<LatticeShape>().is_err());
    }

    #[test]
    fn gcd_and_lcm() {
        assert_eq!(shape(&[6, 4]).gcd(), 2);
        assert_eq!(shape(&[5, 5, 5]).gcd(), 5);
        assert_eq!(shape(&[7]).gcd(), 7);
        assert_eq!(shape(&[6, 4]).lcm(), 12);
    }

    #[test]
    fn neighbor_examples() {
        let s44 = shape(&[4, 4]);
        assert_eq!(
            neighbor(&CellIndex(vec![0, 0]), t(1), &s44),
            CellIndex(vec![1, 0])
        );
        assert_eq!(
            neighbor(&CellIndex(vec![3, 2]), t(1), &s44),
            CellIndex(vec![0, 2])
        );
        let s222 = shape(&[2, 2, 2]);
        assert_eq!(
            neighbor(&CellIndex(vec![1, 1, 1]), t(3), &s222),
            CellIndex(vec![1, 1, 0])
        );
    }

    #[test]
    fn linearize_first_coordinate_fastest() {
        let s = shape(&[4, 3]);
        assert_eq!(s.linearize(&[1, 0]), 1);
        assert_eq!(s.linearize(&[0, 1]), 4);
        assert_eq!(s.coords(7), vec![3, 1]);
        let s = shape(&[2, 2, 2]);
        assert_eq!(s.linearize(&[0, 0, 1]), 4);
    }

    #[test]
    fn advance_wraps() {
        let s = shape(&[4, 4]);
        let lin = s.linearize(&[3, 2]);
        assert_eq!(s.coords(s.advance(lin, 0)), vec![0, 2]);
        // Extent-1 axis: advancing returns the same cell.
        let s = shape(&[4, 1]);
        let lin = s.linearize(&[2, 0]);
        assert_eq!(s.advance(lin, 1), lin);
    }

    #[test]
    fn validate_accepts_two_particle_state() {
        let cfg = Configuration::new(
            shape(&[4, 4]),
            vec![
                (CellIndex(vec![0, 0]), t(1)),
                (CellIndex(vec![1, 2]), t(2)),
            ],
        )
        .unwrap();
        assert_eq!(validate(&cfg), Ok(()));
    }

    #[test]
    fn duplicate_cell_rejected() {
        let err = Configuration::new(
            shape(&[4, 4]),
            vec![
                (CellIndex(vec![0, 0]), t(1)),
                (CellIndex(vec![0, 0]), t(2)),
            ],
        )
        .unwrap_err();
        assert!(matches!(err, ValidationError::DuplicateCell { first: 1, second: 2, .. }));
    }

    #[test]
    fn full_lattice_fails_count_bound_but_is_structurally_sound() {
        let s = shape(&[2, 2]);
        let particles = (0..4)
            .map(|lin| (CellIndex(s.coords(lin)), t(1)))
            .collect();
        let cfg = Configuration::new(s, particles).unwrap();
        assert_eq!(validate_structure(&cfg), Ok(()));
        assert_eq!(
            validate(&cfg),
            Err(ValidationError::CountOutOfRange { m: 4, cells: 4 })
        );
    }

    #[test]
    fn empty_config_fails_count_bound() {
        let cfg = Configuration::new(shape(&[2, 2]), vec![]).unwrap();
        assert_eq!(
            validate(&cfg),
            Err(ValidationError::CountOutOfRange { m: 0, cells: 4 })
        );
    }

    #[test]
    fn out_of_range_coordinate_rejected() {
        let err = Configuration::new(shape(&[4, 4]), vec![(CellIndex(vec![4, 0]), t(1))])
            .unwrap_err();
        assert!(matches!(err, ValidationError::CoordinateOutOfRange { axis: 0, value: 4, .. }));
    }

    #[test]
    fn inconsistent_occupancy_detected() {
        let s = shape(&[2, 2]);
        // Occupancy claims cell 3 instead of cell 0.
        let mut occupancy = vec![0u32; 4];
        occupancy[3] = 1;
        let cfg = Configuration::from_raw_parts(s, vec![0], vec![1], occupancy);
        assert!(matches!(
            validate_structure(&cfg),
            Err(ValidationError::InconsistentOccupancy { .. })
        ));
    }

    #[test]
    fn record_round_trip() {
        let cfg = Configuration::new(
            shape(&[4, 4]),
            vec![
                (CellIndex(vec![0, 0]), t(1)),
                (CellIndex(vec![1, 2]), t(2)),
            ],
        )
        .unwrap();
        let rec = cfg.to_record();
        assert_eq!(rec.shape, "4x4");
        assert_eq!(rec.particles[1].coords, vec![1, 2]);
        assert_eq!(rec.to_configuration().unwrap(), cfg);
    }

    #[test]
    fn state_key_is_id_free() {
        let s = shape(&[2, 2]);
        let a = Configuration::new(
            s.clone(),
            vec![
                (CellIndex(vec![0, 0]), t(1)),
                (CellIndex(vec![1, 1]), t(2)),
            ],
        )
        .unwrap();
        let b = Configuration::new(
            s,
            vec![
                (CellIndex(vec![1, 1]), t(2)),
                (CellIndex(vec![0, 0]), t(1)),
            ],
        )
        .unwrap();
        assert_eq!(a.state_key(), b.state_key());
        assert_ne!(a, b);
    }
}
