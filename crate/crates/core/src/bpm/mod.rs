//! Scalar paraxial beam propagation through multicore fiber cross-sections.

pub mod analysis;
pub mod coupled_mode;
pub mod export;
pub mod field;
pub mod geometry;
pub mod grid;
pub mod modes;
pub mod propagate;

pub use field::{core_powers, launch_mode, ComplexField, ModeLaunch};
pub use geometry::{build_index_map, FiberCrossSection, IndexMap, Lattice, Trench};
pub use grid::BpmGrid;
pub use propagate::{propagate, Propagation, Propagator};
