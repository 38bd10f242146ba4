//! Controlled GKSL dynamics of the two-qubit systems.

mod expm;
mod propagate;
mod superop;
mod system;

pub use expm::expm;
pub use propagate::{propagate, propagate_batch, propagate_trajectory, rk4_reference};
pub use superop::{liouvillian_parts, unvec, vec_of, LiouvillianParts, Superoperator, VEC_DIM};
pub use system::{build_system, dissipator_apply, SystemOperators, SystemSpec, SystemVariant};
