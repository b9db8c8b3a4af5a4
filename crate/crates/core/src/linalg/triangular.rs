use super::Matrix;
use crate::error::{Error, Result};

/// Upper-triangular Cholesky factor `U` with `UᵀU = spd`.
///
/// Only the upper triangle of `spd` is read.
pub fn cholesky_upper(spd: &Matrix) -> Result<Matrix> {
    if !spd.is_square() {
        return Err(Error::DimensionMismatch {
            context: "cholesky of non-square matrix".into(),
            expected: spd.rows(),
            found: spd.cols(),
        });
    }
    let n = spd.rows();
    let mut u = Matrix::zeros(n, n);
    for i in 0..n {
        let mut d = spd[(i, i)];
        for k in 0..i {
            d -= u[(k, i)] * u[(k, i)];
        }
        // Pivots lost to cancellation count as zero.
        if !d.is_finite() || d <= n as f64 * f64::EPSILON * spd[(i, i)].abs() {
            return Err(Error::NotPositiveDefinite { pivot: i });
        }
        let d = d.sqrt();
        u[(i, i)] = d;
        for j in i + 1..n {
            let mut s = spd[(i, j)];
            for k in 0..i {
                s -= u[(k, i)] * u[(k, j)];
            }
            u[(i, j)] = s / d;
        }
    }
    Ok(u)
}

fn check_square_rhs(u: &Matrix, len: usize) -> Result<()> {
    if !u.is_square() {
        return Err(Error::DimensionMismatch {
            context: "triangular solve with non-square factor".into(),
            expected: u.rows(),
            found: u.cols(),
        });
    }
    if u.rows() != len {
        return Err(Error::DimensionMismatch {
            context: "triangular solve right-hand side".into(),
            expected: u.rows(),
            found: len,
        });
    }
    Ok(())
}

/// Solves `U x = rhs` by back substitution.
pub fn solve_upper_triangular(u: &Matrix, rhs: &[f64]) -> Result<Vec<f64>> {
    check_square_rhs(u, rhs.len())?;
    let n = u.rows();
    let mut x = rhs.to_vec();
    for i in (0..n).rev() {
        let d = u[(i, i)];
        if d == 0.0 {
            return Err(Error::Singular { index: i });
        }
        let row = u.row(i);
        let s: f64 = row[i + 1..]
            .iter()
            .zip(&x[i + 1..])
            .map(|(a, b)| a * b)
            .sum();
        x[i] = (x[i] - s) / d;
    }
    Ok(x)
}

/// Solves `Uᵀ z = rhs` by forward substitution.
pub fn solve_upper_transposed(u: &Matrix, rhs: &[f64]) -> Result<Vec<f64>> {
    check_square_rhs(u, rhs.len())?;
    let n = u.rows();
    let mut z = rhs.to_vec();
    for i in 0..n {
        let d = u[(i, i)];
        if d == 0.0 {
            return Err(Error::Singular { index: i });
        }
        z[i] /= d;
        let zi = z[i];
        let row = u.row(i);
        for j in i + 1..n {
            z[j] -= row[j] * zi;
        }
    }
    Ok(z)
}

/// Solves `Uᵀ X = B` column by column.
pub fn solve_upper_transposed_matrix(u: &Matrix, b: &Matrix) -> Result<Matrix> {
    check_square_rhs(u, b.rows())?;
    let n = u.rows();
    let mut x = b.clone();
    for i in 0..n {
        let d = u[(i, i)];
        if d == 0.0 {
            return Err(Error::Singular { index: i });
        }
        for v in x.row_mut(i) {
            *v /= d;
        }
        let cols = x.cols();
        let (done, rest) = x.as_mut_slice().split_at_mut((i + 1) * cols);
        let xi = &done[i * cols..];
        for j in i + 1..n {
            let uij = u[(i, j)];
            if uij != 0.0 {
                let row = &mut rest[(j - i - 1) * cols..(j - i) * cols];
                for (r, v) in row.iter_mut().zip(xi) {
                    *r -= uij * v;
                }
            }
        }
    }
    Ok(x)
}

/// Solves `U X = B` column by column.
pub fn solve_upper_triangular_matrix(u: &Matrix, b: &Matrix) -> Result<Matrix> {
    check_square_rhs(u, b.rows())?;
    let n = u.rows();
    let mut x = b.clone();
    for i in (0..n).rev() {
        let d = u[(i, i)];
        if d == 0.0 {
            return Err(Error::Singular { index: i });
        }
        for k in i + 1..n {
            let uik = u[(i, k)];
            if uik == 0.0 {
                continue;
            }
            let (head, tail) = split_rows(&mut x, i, k);
            for (a, b) in head.iter_mut().zip(tail.iter()) {
                *a -= uik * b;
            }
        }
        for a in x.row_mut(i) {
            *a /= d;
        }
    }
    Ok(x)
}

/// Borrows row `i` mutably and row `k > i` immutably.
fn split_rows(m: &mut Matrix, i: usize, k: usize) -> (&mut [f64], &[f64]) {
    debug_assert!(i < k);
    let cols = m.cols();
    let (a, b) = m.as_mut_slice().split_at_mut(k * cols);
    (&mut a[i * cols..(i + 1) * cols], &b[..cols])
}

/// Explicit inverse of a nonsingular upper-triangular matrix.
pub fn invert_upper_triangular(u: &Matrix) -> Result<Matrix> {
    solve_upper_triangular_matrix(u, &Matrix::identity(u.rows()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cholesky_identity_and_diagonal() {
        assert_eq!(
            cholesky_upper(&Matrix::identity(3)).unwrap(),
            Matrix::identity(3)
        );
        let u = cholesky_upper(&Matrix::from_diagonal(&[4.0, 9.0])).unwrap();
        assert_eq!(u, Matrix::from_diagonal(&[2.0, 3.0]));
    }

    #[test]
    fn cholesky_reconstructs() {
        let a = Matrix::from_rows(&[[2.0, 1.0], [1.0, 2.0]]).unwrap();
        let u = cholesky_upper(&a).unwrap();
        assert!(u.is_upper_triangular());
        assert!(u.gram().sub(&a).max_abs() < 1e-14);
    }

    #[test]
    fn cholesky_names_failing_pivot() {
        let a = Matrix::from_rows(&[[1.0, 2.0], [2.0, 1.0]]).unwrap();
        match cholesky_upper(&a) {
            Err(Error::NotPositiveDefinite { pivot }) => assert_eq!(pivot, 1),
            other => panic!("unexpected {other:?}"),
        }
        assert!(cholesky_upper(&Matrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn transposed_matrix_solve() {
        let u = Matrix::from_rows(&[[2.0, 1.0, -1.0], [0.0, 4.0, 0.5], [0.0, 0.0, 3.0]]).unwrap();
        let b = Matrix::from_rows(&[[1.0, 0.0], [2.0, 1.0], [-1.0, 3.0]]).unwrap();
        let x = solve_upper_transposed_matrix(&u, &b).unwrap();
        assert!(u.transpose().matmul(&x).unwrap().sub(&b).max_abs() < 1e-14);
        let col = solve_upper_transposed(&u, &[1.0, 2.0, -1.0]).unwrap();
        for (i, v) in col.iter().enumerate() {
            assert_eq!(x[(i, 0)], *v);
        }
    }

    #[test]
    fn back_substitution() {
        assert_eq!(
            solve_upper_triangular(&Matrix::identity(2), &[7.0, 8.0]).unwrap(),
            vec![7.0, 8.0]
        );
        let u = Matrix::from_rows(&[[2.0, 1.0], [0.0, 4.0]]).unwrap();
        assert_eq!(
            solve_upper_triangular(&u, &[4.0, 8.0]).unwrap(),
            vec![1.0, 2.0]
        );
        let z = solve_upper_transposed(&u, &[2.0, 9.0]).unwrap();
        assert_eq!(u.transpose().mul_vec(&z).unwrap(), vec![2.0, 9.0]);
    }

    #[test]
    fn zero_pivot_reports_index() {
        let u = Matrix::from_rows(&[[1.0, 1.0], [0.0, 0.0]]).unwrap();
        match solve_upper_triangular(&u, &[1.0, 1.0]) {
            Err(Error::Singular { index }) => assert_eq!(index, 1),
            other => panic!("unexpected {other:?}"),
        }
        assert!(solve_upper_triangular(&u, &[1.0]).is_err());
    }

    #[test]
    fn matrix_solve_and_inverse() {
        let u = Matrix::from_rows(&[[2.0, -1.0, 0.5], [0.0, 3.0, 1.0], [0.0, 0.0, 0.5]]).unwrap();
        let inv = invert_upper_triangular(&u).unwrap();
        let prod = u.matmul(&inv).unwrap();
        assert!(prod.sub(&Matrix::identity(3)).max_abs() < 1e-15);
        assert!(inv.is_upper_triangular());
    }
}
