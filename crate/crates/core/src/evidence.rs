use serde::{Deserialize, Serialize};

/// How a reported number was obtained.
///
/// `Structural` values come from exact formulas (singular values, generator
/// minima, facet offsets). `Sampled` values are extrema over finitely many
/// points and are one-sided: sampled infima overestimate and sampled suprema
/// underestimate the true value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Evidence {
    Structural,
    Sampled,
}

impl Evidence {
    /// `Structural` only when both inputs are.
    pub fn and(self, other: Evidence) -> Evidence {
        if self == Evidence::Structural && other == Evidence::Structural {
            Evidence::Structural
        } else {
            Evidence::Sampled
        }
    }
}
