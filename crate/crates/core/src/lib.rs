//! Formal symplectic groupoids of polynomial Poisson structures via exact
//! Fedosov-type recursions on truncated fibre series.

#![allow(clippy::needless_range_loop)]

pub mod error;
pub mod fedosov_solver;
pub mod groupoid_builder;
pub mod nonlinear_connections;
pub mod poisson_geometry;
pub mod series_core;

pub use error::{Error, Result};
pub use fedosov_solver::{FundamentalSolution, SolveOptions};
pub use groupoid_builder::{GroupoidMaps, PQTensors};
pub use nonlinear_connections::{HamiltonianElement, NonlinearConnection};
pub use poisson_geometry::{Connection, KahlerData, LieAlgebraData, PoissonStructure};
pub use series_core::{BasePolynomial, FibreMap, FibreSeries, MultiIndex, PartialKind, Scalar, SeriesMatrix};
