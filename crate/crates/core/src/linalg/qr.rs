use super::Matrix;
use crate::error::{Error, Result};

/// Output of [`triangularize`].
#[derive(Debug, Clone)]
pub struct Triangularized {
    /// First `min(p, q)` rows of `Tᵀ·stacked`; upper triangular (trapezoidal
    /// when the stack is flat).
    pub r_top: Matrix,
    /// Rows of `Tᵀ·stacked` below row `q` when `p > q`. These are zero.
    pub r_residual: Matrix,
    /// `Tᵀ·companion` for each companion, all `p` rows.
    pub companions: Vec<Matrix>,
    /// `Tᵀ·rhs`, all `p` entries.
    pub rhs: Vec<f64>,
}

/// Orthogonally reduces `stacked` (p x q) to upper-triangular form with
/// Householder reflections, applying the same reflections to every
/// companion block and to `rhs`.
///
/// The orthogonal factor is applied and discarded; it is never formed.
/// Diagonal signs are not normalized.
pub fn triangularize(
    mut stacked: Matrix,
    mut companions: Vec<Matrix>,
    mut rhs: Vec<f64>,
) -> Result<Triangularized> {
    let (p, q) = stacked.shape();
    if p == 0 || q == 0 {
        return Err(Error::Contract(format!(
            "triangularize needs a nonempty block, got {p}x{q}"
        )));
    }
    for (i, c) in companions.iter().enumerate() {
        if c.rows() != p {
            return Err(Error::DimensionMismatch {
                context: format!("triangularize companion {i} rows"),
                expected: p,
                found: c.rows(),
            });
        }
    }
    if rhs.len() != p {
        return Err(Error::DimensionMismatch {
            context: "triangularize right-hand side length".into(),
            expected: p,
            found: rhs.len(),
        });
    }

    let mut v = vec![0.0; p];
    let steps = q.min(p.saturating_sub(1));
    for j in 0..steps {
        let len = p - j;
        let mut sq = 0.0;
        for i in 0..len {
            v[i] = stacked[(j + i, j)];
            sq += v[i] * v[i];
        }
        let tail = sq - v[0] * v[0];
        if tail == 0.0 {
            // Column is already reduced below the diagonal.
            continue;
        }
        let norm = sq.sqrt();
        let alpha = if v[0] > 0.0 { -norm } else { norm };
        v[0] -= alpha;
        let vv = tail + v[0] * v[0];
        let beta = 2.0 / vv;
        let v = &v[..len];

        reflect_columns(&mut stacked, j, j + 1, v, beta);
        for c in companions.iter_mut() {
            reflect_columns(c, j, 0, v, beta);
        }
        let w: f64 = v.iter().zip(&rhs[j..]).map(|(a, b)| a * b).sum();
        for (r, vi) in rhs[j..].iter_mut().zip(v) {
            *r -= beta * vi * w;
        }

        stacked[(j, j)] = alpha;
        for i in j + 1..p {
            stacked[(i, j)] = 0.0;
        }
    }

    let top = p.min(q);
    Ok(Triangularized {
        r_top: stacked.row_block(0..top),
        r_residual: stacked.row_block(top..p),
        companions,
        rhs,
    })
}

/// Applies `I - beta v vᵀ` to rows `first_row..` and columns `first_col..`
/// of `m`.
fn reflect_columns(m: &mut Matrix, first_row: usize, first_col: usize, v: &[f64], beta: f64) {
    let cols = m.cols();
    if first_col >= cols {
        return;
    }
    let mut w = vec![0.0; cols - first_col];
    for (i, &vi) in v.iter().enumerate() {
        if vi == 0.0 {
            continue;
        }
        let row = &m.row(first_row + i)[first_col..];
        for (wk, &a) in w.iter_mut().zip(row) {
            *wk += vi * a;
        }
    }
    for (i, &vi) in v.iter().enumerate() {
        let s = beta * vi;
        if s == 0.0 {
            continue;
        }
        let row = &mut m.row_mut(first_row + i)[first_col..];
        for (a, wk) in row.iter_mut().zip(&w) {
            *a -= s * wk;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: &Matrix, b: &Matrix) -> f64 {
        a.sub(b).frobenius_norm() / b.frobenius_norm().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn identity_is_sign_diagonal() {
        let t = triangularize(Matrix::identity(2), vec![], vec![1.0, 2.0]).unwrap();
        let d = t.r_top.diagonal();
        assert_eq!(
            d.iter().map(|x| x.abs()).collect::<Vec<_>>(),
            vec![1.0, 1.0]
        );
        assert_eq!(t.r_top[(0, 1)], 0.0);
        assert_eq!(
            t.rhs.iter().map(|x| x.abs()).collect::<Vec<_>>(),
            vec![1.0, 2.0]
        );
    }

    #[test]
    fn two_by_one_column() {
        let stacked = Matrix::from_rows(&[[3.0], [4.0]]).unwrap();
        let t = triangularize(stacked, vec![], vec![3.0, 4.0]).unwrap();
        assert!((t.r_top[(0, 0)].abs() - 5.0).abs() < 1e-15);
        assert!((t.rhs[0].abs() - 5.0).abs() < 1e-15);
        assert!(t.rhs[1].abs() < 1e-15);
        assert_eq!(t.r_residual.shape(), (1, 1));
        assert_eq!(t.r_residual[(0, 0)], 0.0);
        // Same sign for the column and the parallel right-hand side.
        assert!(t.r_top[(0, 0)] * t.rhs[0] > 0.0);
    }

    #[test]
    fn tall_with_companion_preserves_gram() {
        let stacked = Matrix::from_rows(&[
            [0.3, -1.2, 2.0],
            [1.1, 0.4, -0.7],
            [-0.5, 0.9, 0.2],
            [2.2, -0.1, 1.3],
            [0.6, 1.7, -0.8],
        ])
        .unwrap();
        let comp =
            Matrix::from_rows(&[[1.0, 0.5], [-0.2, 0.3], [0.7, -1.1], [0.0, 2.0], [1.4, 0.1]])
                .unwrap();
        let t = triangularize(stacked.clone(), vec![comp.clone()], vec![1.0; 5]).unwrap();
        assert!(t.r_top.is_upper_triangular());
        assert!(rel(&t.r_top.gram(), &stacked.gram()) < 1e-12);
        assert!(rel(&t.companions[0].gram(), &comp.gram()) < 1e-12);
        // Cross Gram stackedᵀ·comp is preserved as well.
        let full = Matrix::vstack(&t.r_top, &t.r_residual).unwrap();
        let cross = full.transpose().matmul(&t.companions[0]).unwrap();
        let expected = stacked.transpose().matmul(&comp).unwrap();
        assert!(rel(&cross, &expected) < 1e-12);
        assert!((super::super::norm(&t.rhs) - 5f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn flat_block_is_trapezoidal() {
        let stacked = Matrix::from_rows(&[[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]]).unwrap();
        let t = triangularize(stacked.clone(), vec![], vec![0.0, 1.0]).unwrap();
        assert_eq!(t.r_top.shape(), (2, 3));
        assert_eq!(t.r_top[(1, 0)], 0.0);
        assert_eq!(t.r_residual.rows(), 0);
        assert!(rel(&t.r_top.gram(), &stacked.gram()) < 1e-12);
    }

    #[test]
    fn dimension_errors() {
        let s = Matrix::identity(2);
        assert!(triangularize(s.clone(), vec![], vec![1.0]).is_err());
        assert!(triangularize(s.clone(), vec![Matrix::zeros(3, 1)], vec![1.0, 1.0]).is_err());
        assert!(triangularize(Matrix::zeros(0, 2), vec![], vec![]).is_err());
    }
}
