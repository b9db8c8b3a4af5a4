//! Dense linear algebra kernel: matrix storage, Householder triangularization
//! of stacked blocks, Cholesky factorization and triangular solves.

mod matrix;
mod qr;
mod triangular;

pub use matrix::{norm, Matrix};
pub use qr::{triangularize, Triangularized};
pub use triangular::{
    cholesky_upper, invert_upper_triangular, solve_upper_transposed, solve_upper_transposed_matrix,
    solve_upper_triangular, solve_upper_triangular_matrix,
};
