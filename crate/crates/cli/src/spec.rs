//! Problem documents: the JSON schema and its translation into core objects.

use std::collections::BTreeMap;
use std::sync::Arc;

use fedosov_core::groupoid_builder::PQTensors;
use fedosov_core::poisson_geometry::{
    kahler_connection, lie_poisson_connection_solve, zero_tensor3, Connection, KahlerData, LieAlgebraData,
    LieConnectionOutcome, ObstructionCertificate, PoissonStructure, Tensor3,
};
use fedosov_core::{BasePolynomial, Scalar};
use serde::Deserialize;

use crate::expr::parse_expression;
use crate::CliError;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    #[default]
    Rational,
    Gaussian,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ConnectionSpec {
    /// `gamma[i][j][k] = Γ^{ij}_k`; `dagger` defaults to the connection itself.
    Christoffel {
        gamma: Vec<Vec<Vec<String>>>,
        #[serde(default)]
        dagger: Option<Vec<Vec<Vec<String>>>>,
    },
    /// `metric[l][k] = g^{l̄k}`; coordinates must list the holomorphic ones first.
    Kahler { metric: Vec<Vec<String>>, holomorphic: Vec<String>, antiholomorphic: Vec<String> },
    /// `structure_constants[i][j][k] = c^{ij}_k`.
    LiePoisson { structure_constants: Vec<Vec<Vec<String>>> },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum PqSpec {
    /// `"half"` or `"kahler"`.
    Named(String),
    Explicit {
        p: Vec<Vec<String>>,
        q: Vec<Vec<String>>,
    },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    #[serde(default)]
    pub dim: Option<usize>,
    pub coordinates: Vec<String>,
    #[serde(default)]
    pub field: Field,
    #[serde(default)]
    pub poisson: Option<Vec<Vec<String>>>,
    #[serde(default)]
    pub connection: Option<ConnectionSpec>,
    #[serde(default)]
    pub pq: Option<PqSpec>,
    #[serde(default)]
    pub order: Option<u32>,
    #[serde(default)]
    pub functions: BTreeMap<String, String>,
}

impl ProblemSpec {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Spec(format!("malformed spec document: {e}")))
    }
}

#[derive(Clone, Debug)]
pub enum Geometry {
    Pair {
        connection: Connection,
        dagger: Connection,
    },
    /// The Lie-Poisson connection system has no solution.
    Infeasible(Box<ObstructionCertificate>),
    /// A connection could not be built, e.g. the Kähler metric fails Jacobi.
    Unavailable(String),
}

#[derive(Clone, Debug)]
pub struct Problem {
    pub names: Vec<String>,
    pub field: Field,
    pub poisson: Arc<PoissonStructure>,
    pub geometry: Geometry,
    pub kahler: Option<KahlerData>,
    pub pq: PQTensors,
    /// Whether `pq` came from the Kähler projectors.
    pub kahler_pq: bool,
    pub order: Option<u32>,
    pub functions: Vec<(String, BasePolynomial)>,
}

struct Ctx<'a> {
    names: &'a [String],
    complex: bool,
}

impl Ctx<'_> {
    fn poly(&self, text: &str, what: &str) -> Result<BasePolynomial, CliError> {
        parse_expression(text, self.names, self.complex)
            .map_err(|source| CliError::Parse { context: format!("{what}: `{text}`"), source })
    }

    fn constant(&self, text: &str, what: &str) -> Result<Scalar, CliError> {
        self.poly(text, what)?
            .as_constant()
            .ok_or_else(|| CliError::Spec(format!("{what} must be a constant, got `{text}`")))
    }

    fn matrix(&self, m: &[Vec<String>], n: usize, what: &str) -> Result<Vec<Vec<BasePolynomial>>, CliError> {
        check_len(m.len(), n, what)?;
        m.iter()
            .enumerate()
            .map(|(i, row)| {
                check_len(row.len(), n, what)?;
                row.iter().enumerate().map(|(j, t)| self.poly(t, &format!("{what}[{}][{}]", i + 1, j + 1))).collect()
            })
            .collect()
    }

    fn tensor3(&self, t: &[Vec<Vec<String>>], n: usize, what: &str) -> Result<Tensor3, CliError> {
        check_len(t.len(), n, what)?;
        let mut out = zero_tensor3(n);
        for (i, plane) in t.iter().enumerate() {
            check_len(plane.len(), n, what)?;
            for (j, row) in plane.iter().enumerate() {
                check_len(row.len(), n, what)?;
                for (k, e) in row.iter().enumerate() {
                    out[i][j][k] = self.poly(e, &format!("{what}[{}][{}][{}]", i + 1, j + 1, k + 1))?;
                }
            }
        }
        Ok(out)
    }
}

fn check_len(got: usize, expected: usize, what: &str) -> Result<(), CliError> {
    if got != expected {
        return Err(CliError::Spec(format!("{what}: expected {expected} entries, got {got}")));
    }
    Ok(())
}

fn check_names(names: &[String]) -> Result<(), CliError> {
    for (i, n) in names.iter().enumerate() {
        let mut chars = n.chars();
        let ok = chars.next().is_some_and(|c| c.is_ascii_alphabetic())
            && chars.all(|c| c.is_ascii_alphanumeric() || c == '_');
        if !ok || n == "I" {
            return Err(CliError::Spec(format!("invalid coordinate name `{n}`")));
        }
        if names[..i].contains(n) {
            return Err(CliError::Spec(format!("duplicate coordinate name `{n}`")));
        }
    }
    Ok(())
}

impl Problem {
    pub fn from_spec(spec: &ProblemSpec) -> Result<Self, CliError> {
        let names = spec.coordinates.clone();
        check_names(&names)?;
        let n = names.len();
        if n == 0 {
            return Err(CliError::Spec("at least one coordinate is required".into()));
        }
        if let Some(d) = spec.dim {
            check_len(n, d, "coordinates")?;
        }
        let ctx = Ctx { names: &names, complex: spec.field == Field::Gaussian };
        let declared = spec.poisson.as_ref().map(|m| ctx.matrix(m, n, "poisson")).transpose()?;
        let new_poisson = |m: Vec<Vec<BasePolynomial>>| {
            PoissonStructure::new(m).map(Arc::new).map_err(|e| CliError::Spec(format!("poisson: {e}")))
        };

        let mut kahler = None;
        let (poisson, geometry) = match &spec.connection {
            None | Some(ConnectionSpec::Christoffel { .. }) => {
                let pi = new_poisson(declared.clone().ok_or_else(|| {
                    CliError::Spec("`poisson` is required unless the connection determines it".into())
                })?)?;
                let (gamma, dagger) = match &spec.connection {
                    Some(ConnectionSpec::Christoffel { gamma, dagger }) => {
                        let g = ctx.tensor3(gamma, n, "gamma")?;
                        let d = match dagger {
                            Some(d) => ctx.tensor3(d, n, "dagger")?,
                            None => g.clone(),
                        };
                        (g, d)
                    }
                    _ => (zero_tensor3(n), zero_tensor3(n)),
                };
                let connection = Connection::new(pi.clone(), gamma)?;
                let dagger = Connection::new(pi.clone(), dagger)?;
                (pi, Geometry::Pair { connection, dagger })
            }
            Some(ConnectionSpec::Kahler { metric, holomorphic, antiholomorphic }) => {
                let m = holomorphic.len();
                if antiholomorphic.len() != m || 2 * m != n {
                    return Err(CliError::Spec("the holomorphic split must halve the coordinates".into()));
                }
                let ordered: Vec<String> = holomorphic.iter().chain(antiholomorphic).cloned().collect();
                if ordered != names {
                    return Err(CliError::Spec(
                        "coordinates must list the holomorphic coordinates first, then their conjugates".into(),
                    ));
                }
                let g = ctx.matrix(metric, m, "metric")?;
                let k = KahlerData::new(g)?;
                let pi = Arc::new(k.poisson());
                let geometry = match kahler_connection(&k) {
                    Ok((_, c)) => Geometry::Pair { connection: c.clone(), dagger: c },
                    Err(e) => Geometry::Unavailable(format!("Kähler connection: {e}")),
                };
                kahler = Some(k);
                (pi, geometry)
            }
            Some(ConnectionSpec::LiePoisson { structure_constants }) => {
                check_len(structure_constants.len(), n, "structure_constants")?;
                let mut c = vec![vec![vec![Scalar::zero(); n]; n]; n];
                for (i, plane) in structure_constants.iter().enumerate() {
                    check_len(plane.len(), n, "structure_constants")?;
                    for (j, row) in plane.iter().enumerate() {
                        check_len(row.len(), n, "structure_constants")?;
                        for (k, e) in row.iter().enumerate() {
                            let what = format!("structure_constants[{}][{}][{}]", i + 1, j + 1, k + 1);
                            c[i][j][k] = ctx.constant(e, &what)?;
                        }
                    }
                }
                let lie =
                    LieAlgebraData::new(c).map_err(|e| CliError::Validation(format!("structure constants: {e}")))?;
                let pi = Arc::new(lie.poisson());
                let geometry = match lie_poisson_connection_solve(&lie)? {
                    LieConnectionOutcome::Feasible(c) => Geometry::Pair { connection: c.clone(), dagger: c },
                    LieConnectionOutcome::Infeasible(cert) => Geometry::Infeasible(Box::new(cert)),
                };
                (pi, geometry)
            }
        };
        if let Some(d) = &declared {
            if d.as_slice() != poisson.entries() {
                return Err(CliError::Spec("`poisson` disagrees with the structure implied by the connection".into()));
            }
        }

        let (pq, kahler_pq) = match &spec.pq {
            None => (PQTensors::half_identity(n), false),
            Some(PqSpec::Named(s)) if s == "half" => (PQTensors::half_identity(n), false),
            Some(PqSpec::Named(s)) if s == "kahler" => {
                let k =
                    kahler.as_ref().ok_or_else(|| CliError::Spec("`pq: kahler` needs a Kähler connection".into()))?;
                (PQTensors::kahler(k), true)
            }
            Some(PqSpec::Named(s)) => return Err(CliError::Spec(format!("unknown pq choice `{s}`"))),
            Some(PqSpec::Explicit { p, q }) => {
                (PQTensors::new(ctx.matrix(p, n, "pq.p")?, ctx.matrix(q, n, "pq.q")?)?, false)
            }
        };

        let functions = spec
            .functions
            .iter()
            .map(|(name, text)| Ok((name.clone(), ctx.poly(text, &format!("function `{name}`"))?)))
            .collect::<Result<Vec<_>, CliError>>()?;

        Ok(Self { names, field: spec.field, poisson, geometry, kahler, pq, kahler_pq, order: spec.order, functions })
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }
}
