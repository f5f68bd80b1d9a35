//! Nonconforming space-time virtual element method for the heat equation
//! `c_H u_t - nu u_xx = f` on prismatic meshes with hanging nodes and
//! variable polynomial degrees.

pub mod adaptivity;
pub mod analysis;
pub mod assembly;
pub mod error;
pub mod local_vem;
pub mod mesh;
pub mod polybasis;

pub use error::{Result, StvemError};
