//! Dense reference solver.
//!
//! Assembles the whole block system `b = A u + e` with its block-diagonal
//! weight `U` (`cov(e)⁻¹ = UᵀU`) and solves the generalized least-squares
//! problem `min ‖U(Au − b)‖₂` in one shot. This path shares no numerical
//! code with the incremental engine: weights, factorizations and solves all
//! go through `nalgebra`.

use std::ops::Range;

use nalgebra::{DMatrix, DVector};

use crate::covariance::{Covariance, CovarianceRepr};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::model::StepInput;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EquationKind {
    Evolution,
    Observation,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowBlock {
    pub step: usize,
    pub kind: EquationKind,
    /// Rows of `A` and `b`.
    pub rows: Range<usize>,
    /// Rows of `U`.
    pub weight_rows: Range<usize>,
}

/// The assembled system `b = A u + e` with `cov(e)⁻¹ = UᵀU`.
#[derive(Debug, Clone)]
pub struct AssembledSystem {
    pub a: Matrix,
    pub b: Vec<f64>,
    /// Block-diagonal weight `U`.
    pub weight: Matrix,
    /// Columns of each step's state.
    pub col_offsets: Vec<Range<usize>>,
    /// Equation blocks in assembly order: `o₀`, then `c₁, o₁, c₂, o₂, …`.
    pub row_offsets: Vec<RowBlock>,
}

/// Generalized least-squares solution split by step.
#[derive(Debug, Clone)]
pub struct GlsSolution {
    pub estimates: Vec<Vec<f64>>,
    /// Diagonal blocks of `(AᵀUᵀUA)⁻¹`.
    pub covariances: Vec<Matrix>,
}

fn to_na(m: &Matrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(m.rows(), m.cols(), m.as_slice())
}

fn from_na(m: &DMatrix<f64>) -> Matrix {
    let mut out = Matrix::zeros(m.nrows(), m.ncols());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out[(i, j)] = m[(i, j)];
        }
    }
    out
}

/// Inverse factor of a covariance computed from its raw representation.
fn weight_of(cov: &Covariance) -> Result<DMatrix<f64>> {
    let upper_chol = |m: DMatrix<f64>| -> Result<DMatrix<f64>> {
        let l = m
            .cholesky()
            .ok_or_else(|| Error::InvalidCovariance("not positive definite".into()))?
            .l();
        Ok(l.transpose())
    };
    match cov.repr() {
        CovarianceRepr::Explicit(c) => {
            let inv = to_na(c)
                .try_inverse()
                .ok_or_else(|| Error::InvalidCovariance("singular covariance".into()))?;
            // Symmetrize away roundoff from the explicit inverse.
            upper_chol((&inv + inv.transpose()) * 0.5)
        }
        CovarianceRepr::Inverse(ci) => upper_chol(to_na(ci)),
        CovarianceRepr::InverseFactor(w) => Ok(to_na(w)),
        CovarianceRepr::DiagonalWeights(w) => {
            Ok(DMatrix::from_diagonal(&DVector::from_column_slice(w)))
        }
    }
}

fn dims_of(steps: &[StepInput]) -> Result<Vec<usize>> {
    steps
        .iter()
        .enumerate()
        .map(|(i, s)| {
            if i == 0 && s.evolution.is_some() {
                return Err(Error::EvolveBeforeObserve);
            }
            if i > 0 && s.evolution.is_none() {
                return Err(Error::Scenario(format!("step {i} has no evolution")));
            }
            s.state_dim()
                .ok_or_else(|| Error::Scenario(format!("step {i} has no dimension")))
        })
        .collect()
}

/// Lays out `A`, `b` and `U` for the given steps.
pub fn assemble(steps: &[StepInput]) -> Result<AssembledSystem> {
    if steps.is_empty() {
        return Err(Error::NoSteps);
    }
    let dims = dims_of(steps)?;
    let mut col_offsets = Vec::with_capacity(dims.len());
    let mut total_cols = 0;
    for &n in &dims {
        col_offsets.push(total_cols..total_cols + n);
        total_cols += n;
    }

    // Equation blocks: (step, kind, coefficient blocks, rhs, weight).
    struct Block {
        step: usize,
        kind: EquationKind,
        coeffs: Vec<(usize, DMatrix<f64>)>,
        rhs: Vec<f64>,
        weight: DMatrix<f64>,
    }
    let mut blocks = Vec::new();
    for (i, s) in steps.iter().enumerate() {
        if let Some(e) = &s.evolution {
            let ell = e.f.rows();
            let mismatch = |context: &str, expected, found| Error::DimensionMismatch {
                context: format!("step {i}: {context}"),
                expected,
                found,
            };
            if e.f.cols() != dims[i - 1] {
                return Err(mismatch("F columns", dims[i - 1], e.f.cols()));
            }
            if e.c.len() != ell {
                return Err(mismatch("c length", ell, e.c.len()));
            }
            if e.k.dim() != ell {
                return Err(mismatch("K dimension", ell, e.k.dim()));
            }
            let h = match &e.h {
                Some(h) => {
                    if h.rows() != ell || h.cols() != e.dim {
                        return Err(mismatch("H shape", ell * e.dim, h.rows() * h.cols()));
                    }
                    to_na(h)
                }
                None if ell <= e.dim => DMatrix::identity(ell, e.dim),
                None => {
                    return Err(Error::MissingEvolutionMatrix {
                        rows: ell,
                        n_new: e.dim,
                    })
                }
            };
            blocks.push(Block {
                step: i,
                kind: EquationKind::Evolution,
                coeffs: vec![(i - 1, -to_na(&e.f)), (i, h)],
                rhs: e.c.clone(),
                weight: weight_of(&e.k)?,
            });
        }
        if let Some(o) = &s.observation {
            let m = o.g.rows();
            if o.g.cols() != dims[i] {
                return Err(Error::DimensionMismatch {
                    context: format!("step {i}: G columns"),
                    expected: dims[i],
                    found: o.g.cols(),
                });
            }
            if o.o.len() != m || o.c.dim() != m {
                return Err(Error::DimensionMismatch {
                    context: format!("step {i}: observation length"),
                    expected: m,
                    found: o.o.len(),
                });
            }
            blocks.push(Block {
                step: i,
                kind: EquationKind::Observation,
                coeffs: vec![(i, to_na(&o.g))],
                rhs: o.o.clone(),
                weight: weight_of(&o.c)?,
            });
        }
    }

    let total_rows: usize = blocks.iter().map(|b| b.rhs.len()).sum();
    let total_wrows: usize = blocks.iter().map(|b| b.weight.nrows()).sum();
    let mut a = Matrix::zeros(total_rows, total_cols);
    let mut b = Vec::with_capacity(total_rows);
    let mut weight = Matrix::zeros(total_wrows, total_rows);
    let mut row_offsets = Vec::with_capacity(blocks.len());
    let (mut r0, mut w0) = (0, 0);
    for blk in &blocks {
        let m = blk.rhs.len();
        for (step, coeff) in &blk.coeffs {
            let c0 = col_offsets[*step].start;
            for i in 0..coeff.nrows() {
                for j in 0..coeff.ncols() {
                    a[(r0 + i, c0 + j)] = coeff[(i, j)];
                }
            }
        }
        b.extend_from_slice(&blk.rhs);
        let wr = blk.weight.nrows();
        for i in 0..wr {
            for j in 0..m {
                weight[(w0 + i, r0 + j)] = blk.weight[(i, j)];
            }
        }
        row_offsets.push(RowBlock {
            step: blk.step,
            kind: blk.kind,
            rows: r0..r0 + m,
            weight_rows: w0..w0 + wr,
        });
        r0 += m;
        w0 += wr;
    }

    Ok(AssembledSystem {
        a,
        b,
        weight,
        col_offsets,
        row_offsets,
    })
}

/// Numerical rank of a matrix from its singular values.
fn numerical_rank(m: &DMatrix<f64>) -> usize {
    let sv = m.singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let tol = max * (m.nrows().max(m.ncols()) as f64) * f64::EPSILON;
    sv.iter().filter(|&&s| s > tol).count()
}

/// 2-norm condition number of the weighted coefficient matrix `U·A`
/// (infinite when it is rank deficient).
pub fn condition_number(sys: &AssembledSystem) -> f64 {
    let ua = to_na(&sys.weight) * to_na(&sys.a);
    if ua.nrows() < ua.ncols() {
        return f64::INFINITY;
    }
    let sv = ua.singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    max / min
}

/// Solves the weighted least-squares problem by a dense QR factorization of
/// `U·A`; covariance blocks come from the explicit inverse of the Gram matrix.
pub fn solve_gls(sys: &AssembledSystem) -> Result<GlsSolution> {
    let ua = to_na(&sys.weight) * to_na(&sys.a);
    let ub = to_na(&sys.weight) * DVector::from_column_slice(&sys.b);
    let cols = ua.ncols();
    if ua.nrows() < cols {
        return Err(Error::Unobservable {
            rank: ua.nrows(),
            cols,
        });
    }
    let rank = numerical_rank(&ua);
    if rank < cols {
        return Err(Error::Unobservable { rank, cols });
    }

    let qr = ua.clone().qr();
    let qtb = qr.q().transpose() * &ub;
    let u = qr
        .r()
        .solve_upper_triangular(&qtb)
        .ok_or(Error::Unobservable { rank, cols })?;

    let gram = ua.transpose() * &ua;
    let inv = gram
        .cholesky()
        .ok_or(Error::Unobservable { rank, cols })?
        .inverse();

    let estimates = sys
        .col_offsets
        .iter()
        .map(|r| u.as_slice()[r.clone()].to_vec())
        .collect();
    let covariances = sys
        .col_offsets
        .iter()
        .map(|r| {
            from_na(
                &inv.view((r.start, r.start), (r.len(), r.len()))
                    .into_owned(),
            )
        })
        .collect();
    Ok(GlsSolution {
        estimates,
        covariances,
    })
}

/// Convenience: assemble and solve.
pub fn solve_steps(steps: &[StepInput]) -> Result<GlsSolution> {
    solve_gls(&assemble(steps)?)
}
