//! Exact scalars, base polynomials and truncated fibre series.

mod fibre_map;
mod index;
pub mod linsolve;
mod matrix;
mod poly;
mod scalar;
mod series;

pub use fibre_map::FibreMap;
pub use index::{monomials_of_degree, MultiIndex};
pub use matrix::SeriesMatrix;
pub use poly::BasePolynomial;
pub use scalar::Scalar;
pub use series::{FibreSeries, PartialKind};
