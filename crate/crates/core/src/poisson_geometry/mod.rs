//! Poisson bivectors, 1-forms and linear contravariant connections.

mod connection;
mod kahler;
mod lie;
mod structure;

pub use connection::{
    association_residual, conn_analyze, conn_apply, conn_symmetrize, conn_tensors, curvature, is_zero3,
    nonzero_entries3, poisson_residual, torsion, transpose, zero_tensor3, Connection, ConnectionReport,
    ConnectionTensors, Tensor3, Tensor4,
};
pub use kahler::{kahler_connection, KahlerData};
pub use lie::{lie_poisson_connection_solve, LieAlgebraData, LieConnectionOutcome, ObstructionCertificate};
pub use structure::{
    bivector_pair, koszul_bracket, poisson_bracket, sharp, validate_poisson, OneForm, PoissonReport, PoissonStructure,
    PolyVectorField,
};
