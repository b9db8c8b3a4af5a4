//! Input covariance matrices.
//!
//! A covariance `C` is never used explicitly. The engine only needs to multiply
//! by an inverse factor `W` with `C = (WᵀW)⁻¹`, and [`Covariance::weigh_matrix`]
//! / [`Covariance::weigh_vector`] do exactly that for each supported
//! representation. `W` is only defined up to a left orthogonal factor, so
//! weighed results from different representations of the same `C` agree in
//! their Gram matrices, not entry by entry.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    cholesky_upper, invert_upper_triangular, solve_upper_transposed, solve_upper_transposed_matrix,
    Matrix,
};

/// Serialized form of a covariance: `{"type": ..., "data": ...}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "data")]
pub enum CovarianceRepr {
    /// The covariance matrix `C` itself.
    #[serde(rename = "C")]
    Explicit(Matrix),
    /// An inverse factor `W` with `WᵀW = C⁻¹`.
    #[serde(rename = "W")]
    InverseFactor(Matrix),
    /// The inverse covariance `C⁻¹`.
    #[serde(rename = "C_inverse")]
    Inverse(Matrix),
    /// Inverse standard deviations `w`, `W = diag(w)`.
    #[serde(rename = "w")]
    DiagonalWeights(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CovarianceKind {
    Explicit,
    InverseFactor,
    Inverse,
    DiagonalWeights,
}

#[derive(Debug, Clone)]
enum Factor {
    /// `C = UᵀU`, `W = U⁻ᵀ`; weighing solves `Uᵀ X = A`.
    CholeskyOfC(Matrix),
    /// Weighing multiplies by this matrix.
    Multiply(Matrix),
    Diagonal(Vec<f64>),
}

/// A validated, immutable covariance matrix.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "CovarianceRepr", into = "CovarianceRepr")]
pub struct Covariance {
    repr: CovarianceRepr,
    factor: Factor,
    dim: usize,
}

impl PartialEq for Covariance {
    fn eq(&self, other: &Self) -> bool {
        self.repr == other.repr
    }
}

fn check_symmetric(m: &Matrix, what: &str) -> Result<()> {
    if !m.is_square() {
        return Err(Error::InvalidCovariance(format!(
            "{what} must be square, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    if !m.is_finite() {
        return Err(Error::NonFinite("covariance data"));
    }
    let tol = 1e-12 * m.max_abs();
    for i in 0..m.rows() {
        for j in i + 1..m.cols() {
            if (m[(i, j)] - m[(j, i)]).abs() > tol {
                return Err(Error::InvalidCovariance(format!(
                    "{what} is not symmetric at ({i}, {j})"
                )));
            }
        }
    }
    Ok(())
}

fn not_spd(what: &str, e: Error) -> Error {
    match e {
        Error::NotPositiveDefinite { pivot } => {
            Error::InvalidCovariance(format!("{what} is not positive definite (pivot {pivot})"))
        }
        e => e,
    }
}

impl Covariance {
    pub fn new(repr: CovarianceRepr) -> Result<Self> {
        let (factor, dim) = match &repr {
            CovarianceRepr::Explicit(c) => {
                check_symmetric(c, "C")?;
                let u = cholesky_upper(c).map_err(|e| not_spd("C", e))?;
                (Factor::CholeskyOfC(u), c.rows())
            }
            CovarianceRepr::Inverse(ci) => {
                check_symmetric(ci, "C_inverse")?;
                let u = cholesky_upper(ci).map_err(|e| not_spd("C_inverse", e))?;
                (Factor::Multiply(u), ci.rows())
            }
            CovarianceRepr::InverseFactor(w) => {
                if !w.is_finite() {
                    return Err(Error::NonFinite("covariance data"));
                }
                if w.rows() < w.cols() || w.cols() == 0 {
                    return Err(Error::InvalidCovariance(format!(
                        "inverse factor must be square or tall, got {}x{}",
                        w.rows(),
                        w.cols()
                    )));
                }
                cholesky_upper(&w.gram()).map_err(|e| not_spd("WᵀW", e))?;
                (Factor::Multiply(w.clone()), w.cols())
            }
            CovarianceRepr::DiagonalWeights(w) => {
                if w.is_empty() {
                    return Err(Error::InvalidCovariance("empty weight vector".into()));
                }
                if let Some(j) = w.iter().position(|x| !(x.is_finite() && *x > 0.0)) {
                    return Err(Error::InvalidCovariance(format!(
                        "weight {j} must be finite and positive, got {}",
                        w[j]
                    )));
                }
                (Factor::Diagonal(w.clone()), w.len())
            }
        };
        Ok(Self { repr, factor, dim })
    }

    pub fn explicit(c: Matrix) -> Result<Self> {
        Self::new(CovarianceRepr::Explicit(c))
    }

    pub fn inverse_factor(w: Matrix) -> Result<Self> {
        Self::new(CovarianceRepr::InverseFactor(w))
    }

    pub fn inverse(c_inv: Matrix) -> Result<Self> {
        Self::new(CovarianceRepr::Inverse(c_inv))
    }

    pub fn diagonal_weights(w: Vec<f64>) -> Result<Self> {
        Self::new(CovarianceRepr::DiagonalWeights(w))
    }

    /// Independent components with the given standard deviations.
    pub fn from_std_devs(sigma: &[f64]) -> Result<Self> {
        Self::diagonal_weights(sigma.iter().map(|s| 1.0 / s).collect())
    }

    /// `sigma² I` of dimension `n`.
    pub fn isotropic(n: usize, sigma: f64) -> Result<Self> {
        Self::from_std_devs(&vec![sigma; n])
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal_weights(vec![1.0; n]).expect("unit weights are valid")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> CovarianceKind {
        match self.repr {
            CovarianceRepr::Explicit(_) => CovarianceKind::Explicit,
            CovarianceRepr::InverseFactor(_) => CovarianceKind::InverseFactor,
            CovarianceRepr::Inverse(_) => CovarianceKind::Inverse,
            CovarianceRepr::DiagonalWeights(_) => CovarianceKind::DiagonalWeights,
        }
    }

    pub fn repr(&self) -> &CovarianceRepr {
        &self.repr
    }

    /// Number of rows produced by weighing (the row count of `W`).
    pub fn weighed_rows(&self) -> usize {
        match &self.factor {
            Factor::Multiply(w) => w.rows(),
            _ => self.dim,
        }
    }

    /// `W · a`.
    pub fn weigh_matrix(&self, a: &Matrix) -> Result<Matrix> {
        if a.rows() != self.dim {
            return Err(Error::DimensionMismatch {
                context: "weigh matrix rows".into(),
                expected: self.dim,
                found: a.rows(),
            });
        }
        match &self.factor {
            Factor::CholeskyOfC(u) => solve_upper_transposed_matrix(u, a),
            Factor::Multiply(w) => w.matmul(a),
            Factor::Diagonal(w) => {
                let mut out = a.clone();
                for (i, wi) in w.iter().enumerate() {
                    for x in out.row_mut(i) {
                        *x *= wi;
                    }
                }
                Ok(out)
            }
        }
    }

    /// `W · v`.
    pub fn weigh_vector(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch {
                context: "weigh vector length".into(),
                expected: self.dim,
                found: v.len(),
            });
        }
        match &self.factor {
            Factor::CholeskyOfC(u) => solve_upper_transposed(u, v),
            Factor::Multiply(w) => w.mul_vec(v),
            Factor::Diagonal(w) => Ok(v.iter().zip(w).map(|(x, wi)| x * wi).collect()),
        }
    }

    /// Explicit inverse factor `W` with `WᵀW = C⁻¹`.
    ///
    /// Lower triangular for the `C` kind, upper triangular for `C_inverse`,
    /// diagonal for weights, and the stored matrix for the `W` kind.
    pub fn to_inverse_factor(&self) -> Matrix {
        match &self.factor {
            Factor::CholeskyOfC(u) => invert_upper_triangular(u)
                .expect("Cholesky factor has a positive diagonal")
                .transpose(),
            Factor::Multiply(w) => w.clone(),
            Factor::Diagonal(w) => Matrix::from_diagonal(w),
        }
    }
}

impl TryFrom<CovarianceRepr> for Covariance {
    type Error = Error;

    fn try_from(repr: CovarianceRepr) -> Result<Self> {
        Covariance::new(repr)
    }
}

impl From<Covariance> for CovarianceRepr {
    fn from(c: Covariance) -> Self {
        c.repr
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: &Matrix, b: &Matrix) -> f64 {
        a.sub(b).frobenius_norm() / b.frobenius_norm()
    }

    #[test]
    fn diagonal_weighing() {
        let c = Covariance::diagonal_weights(vec![10.0, 10.0]).unwrap();
        assert_eq!(
            c.weigh_matrix(&Matrix::identity(2)).unwrap(),
            Matrix::from_diagonal(&[10.0, 10.0])
        );
        let c = Covariance::diagonal_weights(vec![2.0]).unwrap();
        assert_eq!(c.weigh_vector(&[3.0]).unwrap(), vec![6.0]);
        let c = Covariance::diagonal_weights(vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(
            c.to_inverse_factor(),
            Matrix::from_diagonal(&[1.0, 2.0, 3.0])
        );
    }

    #[test]
    fn unit_explicit_covariance_is_unit_weight() {
        let c = Covariance::explicit(Matrix::identity(3)).unwrap();
        let a = Matrix::from_rows(&[[1.0, -2.0], [0.5, 3.0], [4.0, 0.0]]).unwrap();
        let wa = c.weigh_matrix(&a).unwrap();
        assert!(rel(&wa.gram(), &a.gram()) < 1e-15);
        let v = c.weigh_vector(&[1.0, 1.0, 0.0]).unwrap();
        assert!((crate::linalg::norm(&v) - 2f64.sqrt()).abs() < 1e-15);
        let w = Covariance::explicit(Matrix::identity(4))
            .unwrap()
            .to_inverse_factor();
        assert_eq!(
            w.diagonal().iter().map(|x| x.abs()).collect::<Vec<_>>(),
            vec![1.0; 4]
        );
    }

    #[test]
    fn explicit_diagonal_inverts() {
        let c = Covariance::explicit(Matrix::from_diagonal(&[4.0, 0.25])).unwrap();
        let r = c.weigh_matrix(&Matrix::identity(2)).unwrap();
        assert!(rel(&r.gram(), &Matrix::from_diagonal(&[0.25, 4.0])) < 1e-12);
    }

    #[test]
    fn explicit_factor_reconstructs_inverse() {
        let c_mat =
            Matrix::from_rows(&[[4.0, 1.0, 0.5], [1.0, 3.0, -0.2], [0.5, -0.2, 2.0]]).unwrap();
        let c = Covariance::explicit(c_mat.clone()).unwrap();
        let w = c.to_inverse_factor();
        assert!(w.transpose().is_upper_triangular());
        let a = Matrix::from_rows(&[[1.0, 2.0], [0.0, -1.0], [3.0, 0.5]]).unwrap();
        assert!(rel(&c.weigh_matrix(&a).unwrap(), &w.matmul(&a).unwrap()) < 1e-14);
        let prod = w.gram().matmul(&c_mat).unwrap();
        assert!(prod.sub(&Matrix::identity(3)).max_abs() < 1e-12);
    }

    #[test]
    fn rejects_invalid_data() {
        assert!(
            Covariance::explicit(Matrix::from_rows(&[[1.0, 2.0], [2.0, 1.0]]).unwrap()).is_err()
        );
        assert!(
            Covariance::explicit(Matrix::from_rows(&[[1.0, 0.5], [0.0, 1.0]]).unwrap()).is_err()
        );
        assert!(Covariance::inverse(Matrix::zeros(2, 2)).is_err());
        assert!(Covariance::inverse_factor(Matrix::from_rows(&[[1.0, 1.0]]).unwrap()).is_err());
        assert!(
            Covariance::inverse_factor(Matrix::from_rows(&[[1.0, 1.0], [1.0, 1.0]]).unwrap())
                .is_err()
        );
        assert!(Covariance::diagonal_weights(vec![1.0, 0.0]).is_err());
        assert!(Covariance::diagonal_weights(vec![]).is_err());
        let c = Covariance::identity(2);
        assert!(c.weigh_matrix(&Matrix::identity(3)).is_err());
        assert!(c.weigh_vector(&[1.0]).is_err());
    }

    #[test]
    fn json_form() {
        let c: Covariance = serde_json::from_str(r#"{"type":"w","data":[2.0,4.0]}"#).unwrap();
        assert_eq!(c.kind(), CovarianceKind::DiagonalWeights);
        let c: Covariance =
            serde_json::from_str(r#"{"type":"C_inverse","data":[[4.0,0.0],[0.0,1.0]]}"#).unwrap();
        assert_eq!(c.kind(), CovarianceKind::Inverse);
        assert_eq!(c.dim(), 2);
        let s = serde_json::to_string(&c).unwrap();
        assert_eq!(s, r#"{"type":"C_inverse","data":[[4.0,0.0],[0.0,1.0]]}"#);
        assert!(serde_json::from_str::<Covariance>(r#"{"type":"C","data":[[-1.0]]}"#).is_err());
        assert!(serde_json::from_str::<Covariance>(r#"{"type":"K","data":[1.0]}"#).is_err());
    }
}
