//! Norms, closed-set descriptors and exact distance oracles.

mod norm;
mod set;
mod sphere;
pub mod template;

pub use norm::{Norm, NormKind};
pub use set::SetDescriptor;
pub use sphere::unit_sphere_samples;
pub(crate) use sphere::{angle_point, random_direction};
pub use template::{parse_set_template, SetTemplate};
