//! Formal Gevrey analysis of nonlinear totally characteristic PDEs
//!
//! ```text
//! C(x; t∂_t, x∂_x) u = a(x) t + R₂(t, x, {(t∂_t)^j ∂_x^α u})
//! ```
//!
//! The crate builds the Newton polygon of the linear part at `x = 0`, checks
//! the non-resonance, Poincaré and regular-singularity conditions, computes
//! the Gevrey indices `(s₀, σ₀)` and `s₁`, solves for the unique formal
//! solution with exact rational arithmetic, and fits the coefficient growth
//! of the result.

pub mod analysis;
pub mod equation;
pub mod error;
pub mod estimator;
pub mod fixtures;
pub mod series;
pub mod solver;

pub use error::{Error, Result};

/// Serializes a [`series::Rat`] as `"p/q"` or `"p"`.
pub mod serde_rat {
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    use crate::series::rat::{fmt_rat, parse_rat, Rat};

    pub fn serialize<S: Serializer>(r: &Rat, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_rat(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rat, D::Error> {
        let s = String::deserialize(d)?;
        parse_rat(&s).ok_or_else(|| D::Error::custom(format!("`{s}` is not a rational")))
    }

    pub mod option {
        use super::*;

        pub fn serialize<S: Serializer>(r: &Option<Rat>, s: S) -> Result<S::Ok, S::Error> {
            match r {
                Some(r) => s.serialize_some(&fmt_rat(r)),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rat>, D::Error> {
            Option::<String>::deserialize(d)?
                .map(|s| parse_rat(&s).ok_or_else(|| D::Error::custom(format!("`{s}` is not a rational"))))
                .transpose()
        }
    }
}
