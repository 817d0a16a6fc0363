//! Refinement patterns for h-adaptive geometric meshes.
//!
//! A refinement pattern partitions a master element into sons once; any mesh
//! element of that type can then be divided by it. Patterns live in a
//! [`PatternDb`] together with the patterns they induce on their sides and
//! their permuted variants, and the tools in [`reftools`] pick patterns that
//! keep the mesh conforming.

pub mod affine;
pub mod check;
pub mod io;
pub mod mesh;
pub mod pattern;
pub mod patterndb;
pub mod quadrature;
pub mod reftools;
pub mod samples;
pub mod topology;

pub use affine::{AffineError, AffineTransform};
pub use io::{export_vtk, read_mesh, write_mesh, IoError};
pub use mesh::{GeoElement, GeoMesh, MeshError, SideRef};
pub use pattern::{parse_pattern, PatternError, RefinementPattern};
pub use patterndb::{PatternDb, PatternRef};
pub use topology::ElementType;
