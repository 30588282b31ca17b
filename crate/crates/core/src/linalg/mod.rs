//! Small dense kernels sized for desk-scale problems (dimension ≲ 16).

mod eigen;
mod matrix;
mod nnls;
mod qp;
mod search;
mod svd;
mod wolfe;

pub use eigen::symmetric_eigenvalues;
pub use matrix::{add, axpy, dot, lstsq, norm2, solve, sub, Matrix};
pub(crate) use matrix::parse_numbers;
pub use nnls::nnls;
pub use qp::project_polyhedron;
pub use search::compass_on_sphere;
pub use svd::{sigma_min, singular_values};
pub use wolfe::min_norm_point;
