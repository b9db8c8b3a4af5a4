use super::{back_substitute, Estimate, Kalman};
use crate::error::{Error, Result};
use crate::linalg::{solve_upper_triangular, triangularize, Matrix};

impl Kalman {
    /// Smooths all retained steps.
    ///
    /// Estimates come from back substitution through the sealed rows, bottom
    /// up. Covariances come from an upward sweep over copies of the sealed
    /// blocks: for each step the pair `[R_{i,i+1}; S_{i+1}]` is
    /// triangularized together with `[R_{i,i}; 0]`, and the rows left in the
    /// second block column form `S_i`, the inverse factor of `cov(û_{i|k})`.
    /// The stored factorization is not modified, so smoothing can be
    /// repeated after more steps.
    pub fn smooth(&mut self) -> Result<()> {
        let pending = self.pending.as_ref().ok_or(Error::NoSteps)?;
        let (r_tilde, y_tilde) = pending
            .observed
            .as_ref()
            .ok_or(Error::NotObserved(pending.index))?;
        let latest = back_substitute(r_tilde, y_tilde, pending.dim);

        // `next` holds the smoothed estimate of step i+1 and its factor
        // while the chain of square diagonal blocks is unbroken.
        let mut next: Option<(Vec<f64>, Matrix)> = latest
            .is_observable()
            .then(|| (latest.state.clone(), latest.cov_factor.clone()));

        let generation = self.generation;
        for step in self.sealed.iter_mut().rev() {
            let est = match next.take() {
                Some((x_next, s_next)) if step.r_diag.is_square() => {
                    smooth_step(&step.r_diag, &step.r_sup, &step.y, &x_next, &s_next)?
                }
                _ => None,
            };
            let est = match est {
                Some(e) => {
                    next = Some((e.state.clone(), e.cov_factor.clone()));
                    e
                }
                None => Estimate::unobservable(step.dim),
            };
            step.smoothed = Some((generation, est));
        }
        Ok(())
    }
}

/// One upward step of the smoother. Returns `None` when the diagonal block is
/// singular.
fn smooth_step(
    r_diag: &Matrix,
    r_sup: &Matrix,
    y: &[f64],
    x_next: &[f64],
    s_next: &Matrix,
) -> Result<Option<Estimate>> {
    let n = r_diag.cols();
    let coupling = r_sup.mul_vec(x_next)?;
    let rhs: Vec<f64> = y.iter().zip(&coupling).map(|(a, b)| a - b).collect();
    let state = match solve_upper_triangular(r_diag, &rhs) {
        Ok(x) if x.iter().all(|v| v.is_finite()) => x,
        Ok(_) | Err(Error::Singular { .. }) => return Ok(None),
        Err(e) => return Err(e),
    };

    let n_next = s_next.rows();
    let stacked = Matrix::vstack(r_sup, s_next)?;
    let companion = Matrix::vstack(r_diag, &Matrix::zeros(n_next, n))?;
    let rows = stacked.rows();
    let t = triangularize(stacked, vec![companion], vec![0.0; rows])?;
    let s = t.companions[0].row_block(n_next..rows);
    let factor = triangularize(s, Vec::new(), vec![0.0; n])?.r_top;
    if factor.diagonal().contains(&0.0) {
        return Ok(None);
    }
    Ok(Some(Estimate {
        state,
        cov_factor: factor,
    }))
}
