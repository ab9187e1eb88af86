//! P1 discretization of H¹₀ on uniform interval and rectangle meshes.

mod assembly;
mod function;
pub mod linalg;
mod mesh;
pub mod quadrature;

pub use assembly::{assemble, AssembledOperators, ElementTable};
pub use function::FeFunction;
pub use mesh::{build_interval_mesh, build_rect_mesh, Mesh, MeshShape, Point};
