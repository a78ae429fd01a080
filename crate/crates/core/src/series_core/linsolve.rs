//! Exact sparse Gauss-Jordan elimination over [`Scalar`].
//!
//! Free variables are set to zero. When the system is inconsistent the
//! solver returns a certificate `y` with `yᵀA = 0` and `yᵀb ≠ 0`, together
//! with the pivot trail that produced it, so the failure can be replayed.

use std::collections::BTreeMap;

use super::scalar::Scalar;

type SparseRow = BTreeMap<usize, Scalar>;

/// A linear system `A·z = b` with sparse rows.
#[derive(Clone, Debug, Default)]
pub struct LinearSystem {
    ncols: usize,
    rows: Vec<SparseRow>,
    rhs: Vec<Scalar>,
}

/// One elimination step: `row` was normalised on `col`.
#[derive(Clone, Debug, PartialEq)]
pub struct PivotStep {
    pub row: usize,
    pub col: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InconsistencyCertificate {
    /// Nonzero multipliers `(original row, y_row)`.
    pub multipliers: Vec<(usize, Scalar)>,
    /// `yᵀb`, nonzero by construction.
    pub value: Scalar,
    /// Index of the row that reduced to `0 = value`.
    pub row: usize,
    pub pivot_trail: Vec<PivotStep>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LinearSolution {
    Solved { values: Vec<Scalar>, pivots: Vec<PivotStep>, free: Vec<usize> },
    Inconsistent(InconsistencyCertificate),
}

impl LinearSystem {
    pub fn new(ncols: usize) -> Self {
        Self { ncols, rows: Vec::new(), rhs: Vec::new() }
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    /// Adds the equation `Σ coeff·z[col] = rhs`. Repeated columns accumulate.
    pub fn push_row<I: IntoIterator<Item = (usize, Scalar)>>(&mut self, entries: I, rhs: Scalar) {
        let mut row = SparseRow::new();
        for (col, c) in entries {
            assert!(col < self.ncols, "column {col} out of range");
            let e = row.entry(col).or_insert_with(Scalar::zero);
            *e += &c;
        }
        row.retain(|_, c| !c.is_zero());
        self.rows.push(row);
        self.rhs.push(rhs);
    }

    /// Evaluates `A·z − b` row by row.
    pub fn residual(&self, z: &[Scalar]) -> Vec<Scalar> {
        self.rows
            .iter()
            .zip(&self.rhs)
            .map(|(row, b)| {
                let mut acc = -b;
                for (col, c) in row {
                    acc += &(c * &z[*col]);
                }
                acc
            })
            .collect()
    }

    pub fn solve(&self) -> LinearSolution {
        self.solve_inner(true)
    }

    /// Like [`solve`](Self::solve) but skips bookkeeping of row combinations;
    /// an inconsistent result then carries an empty multiplier list.
    pub fn solve_fast(&self) -> LinearSolution {
        self.solve_inner(false)
    }

    fn solve_inner(&self, track: bool) -> LinearSolution {
        let m = self.rows.len();
        let mut rows = self.rows.clone();
        let mut rhs = self.rhs.clone();
        // combination of original rows that each working row represents
        let mut combos: Vec<SparseRow> =
            if track { (0..m).map(|r| SparseRow::from([(r, Scalar::one())])).collect() } else { Vec::new() };
        let mut pivot_of_row: Vec<Option<usize>> = vec![None; m];
        let mut trail = Vec::new();

        for col in 0..self.ncols {
            let pick = (0..m)
                .filter(|&r| pivot_of_row[r].is_none() && rows[r].contains_key(&col))
                .min_by_key(|&r| rows[r].len());
            let Some(p) = pick else { continue };
            let inv = rows[p][&col].inv().expect("nonzero pivot");
            scale_row(&mut rows[p], &inv);
            rhs[p] = &rhs[p] * &inv;
            if track {
                scale_row(&mut combos[p], &inv);
            }
            pivot_of_row[p] = Some(col);
            trail.push(PivotStep { row: p, col });

            let prow = rows[p].clone();
            let prhs = rhs[p].clone();
            let pcombo = if track { combos[p].clone() } else { SparseRow::new() };
            for r in 0..m {
                if r == p {
                    continue;
                }
                let Some(f) = rows[r].get(&col).cloned() else { continue };
                axpy(&mut rows[r], &-&f, &prow);
                rhs[r] = &rhs[r] - &(&f * &prhs);
                if track {
                    axpy(&mut combos[r], &-&f, &pcombo);
                }
            }
        }

        for r in 0..m {
            if pivot_of_row[r].is_none() && rows[r].is_empty() && !rhs[r].is_zero() {
                let multipliers =
                    if track { combos[r].iter().map(|(k, v)| (*k, v.clone())).collect() } else { Vec::new() };
                return LinearSolution::Inconsistent(InconsistencyCertificate {
                    multipliers,
                    value: rhs[r].clone(),
                    row: r,
                    pivot_trail: trail,
                });
            }
        }

        let mut values = vec![Scalar::zero(); self.ncols];
        let mut is_pivot = vec![false; self.ncols];
        for (r, pc) in pivot_of_row.iter().enumerate() {
            if let Some(c) = pc {
                values[*c] = rhs[r].clone();
                is_pivot[*c] = true;
            }
        }
        let free = (0..self.ncols).filter(|c| !is_pivot[*c]).collect();
        LinearSolution::Solved { values, pivots: trail, free }
    }
}

impl InconsistencyCertificate {
    /// Replays the certificate against `sys`: `yᵀA` must vanish and `yᵀb`
    /// must equal the recorded nonzero value.
    pub fn verify(&self, sys: &LinearSystem) -> bool {
        if self.value.is_zero() || self.multipliers.is_empty() {
            return false;
        }
        let mut combo = SparseRow::new();
        let mut value = Scalar::zero();
        for (r, y) in &self.multipliers {
            axpy(&mut combo, y, &sys.rows[*r]);
            value += &(y * &sys.rhs[*r]);
        }
        combo.is_empty() && value == self.value
    }
}

fn scale_row(row: &mut SparseRow, f: &Scalar) {
    for v in row.values_mut() {
        *v = &*v * f;
    }
}

/// `row += f * other`
fn axpy(row: &mut SparseRow, f: &Scalar, other: &SparseRow) {
    for (c, v) in other {
        let e = row.entry(*c).or_insert_with(Scalar::zero);
        *e += &(f * v);
        if e.is_zero() {
            row.remove(c);
        }
    }
}

/// Inverse of a dense square matrix, `None` if singular.
pub fn invert_matrix(m: &[Vec<Scalar>]) -> Option<Vec<Vec<Scalar>>> {
    let n = m.len();
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        let mut sys = LinearSystem::new(n);
        for (i, row) in m.iter().enumerate() {
            assert_eq!(row.len(), n, "matrix is not square");
            let rhs = if i == j { Scalar::one() } else { Scalar::zero() };
            sys.push_row(row.iter().cloned().enumerate(), rhs);
        }
        match sys.solve_fast() {
            LinearSolution::Solved { values, free, .. } if free.is_empty() => cols.push(values),
            _ => return None,
        }
    }
    Some((0..n).map(|i| (0..n).map(|j| cols[j][i].clone()).collect()).collect())
}
