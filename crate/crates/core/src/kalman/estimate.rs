use crate::linalg::{solve_upper_transposed, Matrix};

/// A state estimate together with the inverse factor `W` of its covariance,
/// `cov = (WᵀW)⁻¹`.
///
/// Unobservable states are reported with an all-NaN state vector and a
/// diagonal NaN factor.
#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    pub state: Vec<f64>,
    pub cov_factor: Matrix,
}

impl Estimate {
    pub fn unobservable(n: usize) -> Self {
        Self {
            state: vec![f64::NAN; n],
            cov_factor: Matrix::from_diagonal(&vec![f64::NAN; n]),
        }
    }

    pub fn dim(&self) -> usize {
        self.state.len()
    }

    pub fn is_observable(&self) -> bool {
        self.state.iter().all(|x| x.is_finite())
    }

    /// Explicit covariance `(WᵀW)⁻¹`.
    pub fn covariance(&self) -> Matrix {
        let n = self.dim();
        if !self.is_observable() {
            return Matrix::from_diagonal(&vec![f64::NAN; n]);
        }
        // cov = W⁻¹W⁻ᵀ = ZᵀZ with the columns of Z solving Wᵀz = eⱼ.
        let mut z = Matrix::zeros(n, n);
        for j in 0..n {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            match solve_upper_transposed(&self.cov_factor, &e) {
                Ok(col) => {
                    for (i, v) in col.into_iter().enumerate() {
                        z[(i, j)] = v;
                    }
                }
                Err(_) => return Matrix::from_diagonal(&vec![f64::NAN; n]),
            }
        }
        z.gram()
    }

    /// Variance of the linear functional `aᵀu`.
    pub fn variance_of(&self, a: &[f64]) -> f64 {
        if !self.is_observable() {
            return f64::NAN;
        }
        match solve_upper_transposed(&self.cov_factor, a) {
            Ok(z) => z.iter().map(|x| x * x).sum(),
            Err(_) => f64::NAN,
        }
    }

    /// Standard deviation of each component.
    pub fn std_devs(&self) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|j| {
                let mut e = vec![0.0; n];
                e[j] = 1.0;
                self.variance_of(&e).sqrt()
            })
            .collect()
    }
}
