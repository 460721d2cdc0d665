//! Core library for a tile self-assembly model in which bonds may be
//! rigid (coplanar) or flexible (free to fold by +-90 degrees).
//!
//! An assembly is an abstract bond graph of unit square tiles; a
//! configuration assigns each flexible bond a fold state (straight, up or
//! down), and an embedding realizes a configuration as placements of unit
//! squares on the faces of the cubic lattice. The crate provides:
//!
//! * exact integer geometry for placements and fold classification,
//! * enumeration and verification of configuration spaces,
//! * stochastic growth dynamics (attachment at bond-maximal sites),
//! * compilers that emit tile systems for target shapes (polycube shells,
//!   pixel films, folding sheets, and a satisfiability-driven machine),
//! * plain-text file formats plus OBJ/JSON export.

pub mod rng;
pub mod geometry;
pub mod assembly;
pub mod configspace;
pub mod dynamics;
pub mod generators;
pub mod io;
pub mod corpus;

pub use assembly::{Assembly, Bond, FtamSystem, TileType};
pub use configspace::{Configuration, Embedding, FrontierSite};
pub use geometry::{AxisDirection, BondOrientation, Glue, Placement, RelativeOrientation, Side, Vec3};
