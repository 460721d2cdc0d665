//! Builders that compile shapes, images, and formulas into tile systems.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::geometry::{AxisDirection, Vec3};

pub mod film;
pub mod polycube;
pub mod sat3;
pub mod sheet;
pub mod vertex;

pub use film::generate_film;
pub use polycube::{compile_polycube, outline_embedding, DeterminismReport};
pub use vertex::{classify_vertex, protocol_for, Protocol, VertexClass, VertexKind};

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum GeneratorError {
    #[error("shape has no cells")]
    EmptyPolycube,
    #[error("shape is not face-connected")]
    DisconnectedPolycube,
    #[error("point {point} touches no cell of the shape")]
    ExteriorPoint { point: Vec3 },
    #[error("point {point} is buried inside the shape")]
    InteriorPoint { point: Vec3 },
    #[error("corner admits more than one fold, cannot assemble deterministically: {points:?}")]
    Reconfigurable { points: Vec<Vec3> },
    #[error("perspective {perspective} out of range ({available} available)")]
    InvalidPerspective { perspective: usize, available: usize },
    #[error("face scale {face_scale} too small, need at least 2")]
    FaceScaleTooSmall { face_scale: i64 },
    #[error("sheet size {n} unsupported, only 4 is implemented")]
    UnsupportedN { n: u32 },
    #[error("malformed formula: {reason}")]
    MalformedFormula { reason: String },
}

/// Face-connected set of unit cells, each named by its min corner.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Polycube {
    cells: BTreeSet<Vec3>,
}

impl Polycube {
    pub fn new<I: IntoIterator<Item = Vec3>>(cells: I) -> Result<Polycube, GeneratorError> {
        let cells: BTreeSet<Vec3> = cells.into_iter().collect();
        if cells.is_empty() {
            return Err(GeneratorError::EmptyPolycube);
        }
        let start = *cells.iter().next().unwrap();
        let mut seen = BTreeSet::new();
        seen.insert(start);
        let mut queue = vec![start];
        while let Some(c) = queue.pop() {
            for d in AxisDirection::ALL {
                let n = c + d.vec();
                if cells.contains(&n) && seen.insert(n) {
                    queue.push(n);
                }
            }
        }
        if seen.len() != cells.len() {
            return Err(GeneratorError::DisconnectedPolycube);
        }
        Ok(Polycube { cells })
    }

    pub fn contains(&self, cell: Vec3) -> bool {
        self.cells.contains(&cell)
    }

    pub fn cells(&self) -> impl Iterator<Item = Vec3> + '_ {
        self.cells.iter().copied()
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    /// Outward surface squares as (cell, outward direction) pairs.
    pub fn surface_faces(&self) -> Vec<(Vec3, AxisDirection)> {
        let mut out = Vec::new();
        for &c in &self.cells {
            for d in AxisDirection::ALL {
                if !self.contains(c + d.vec()) {
                    out.push((c, d));
                }
            }
        }
        out
    }

    /// Every lattice point incident to at least one cell.
    pub fn lattice_points(&self) -> BTreeSet<Vec3> {
        let mut out = BTreeSet::new();
        for &c in &self.cells {
            for dx in 0..2 {
                for dy in 0..2 {
                    for dz in 0..2 {
                        out.insert(c + crate::geometry::v3(dx, dy, dz));
                    }
                }
            }
        }
        out
    }
}
