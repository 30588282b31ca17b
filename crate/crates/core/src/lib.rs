pub mod calculus;
pub mod cli;
pub mod convexity;
pub mod error;
pub mod evidence;
pub mod expr;
pub mod ext;
pub mod geneq;
pub mod linalg;
pub mod mappings;
pub mod moduli;
pub mod rates;
mod rng;
pub mod spaces;

pub use error::{Error, Result};
pub use evidence::Evidence;
