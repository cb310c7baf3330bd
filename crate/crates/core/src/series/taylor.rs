//! Polynomials in `(t, z)` with coefficients in `ℚ[[x]]`, used for the
//! nonlinear part `R₂(t, x, z)` and its valuations.

use std::collections::BTreeMap;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::rat::Rat;
use super::uni::UniSeries;
use crate::equation::{IndexPair, MultiIndex};
use crate::error::Result;

/// `val(f)` of a series in `(t, z)`: a finite order or `∞`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Valuation {
    Finite(usize),
    Infinite,
}

impl Valuation {
    pub fn finite(self) -> Option<usize> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinite => None,
        }
    }
}

impl std::fmt::Display for Valuation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinite => write!(f, "inf"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TaylorPoly {
    pub terms: BTreeMap<(usize, MultiIndex), UniSeries>,
}

impl TaylorPoly {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, i: usize, nu: MultiIndex, coeff: UniSeries) {
        self.terms.insert((i, nu), coeff);
    }

    /// `∂_{z_{j,α}}`.
    pub fn dz(&self, pair: IndexPair) -> TaylorPoly {
        let mut out = TaylorPoly::new();
        for ((i, nu), c) in &self.terms {
            let e = nu.get(pair);
            if e == 0 {
                continue;
            }
            let key = (*i, nu.minus_unit(pair));
            let term = c.scale(&Rat::from_integer(e.into()));
            let merged = match out.terms.remove(&key) {
                Some(prev) => &prev + &term,
                None => term,
            };
            out.terms.insert(key, merged);
        }
        out
    }

    /// `∂_x^μ` of every coefficient.
    pub fn dx(&self, mu: usize) -> Result<TaylorPoly> {
        let mut out = TaylorPoly::new();
        for (k, c) in &self.terms {
            out.terms.insert(k.clone(), c.dx(mu)?);
        }
        Ok(out)
    }

    /// `min{i + |ν| : coefficient ≠ 0}`, the coefficient evaluated at `x = 0`
    /// when `at_x_zero`.
    pub fn valuation(&self, at_x_zero: bool) -> Valuation {
        valuation2(self, at_x_zero)
    }
}

pub fn valuation2(f: &TaylorPoly, at_x_zero: bool) -> Valuation {
    f.terms
        .iter()
        .filter(|(_, c)| if at_x_zero { !c.at_zero().is_zero() } else { !c.is_zero() })
        .map(|((i, nu), _)| i + nu.degree())
        .min()
        .map_or(Valuation::Infinite, Valuation::Finite)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::rat::int;

    fn z(j: usize, alpha: usize, power: usize) -> MultiIndex {
        MultiIndex::from_pairs([(IndexPair::new(j, alpha), power)])
    }

    #[test]
    fn e62_valuation() {
        let mut r2 = TaylorPoly::new();
        r2.insert(1, z(0, 2, 1), UniSeries::monomial(int(1), 3, 10));
        let v = r2.dz(IndexPair::new(0, 2)).dx(3).unwrap().valuation(true);
        assert_eq!(v, Valuation::Finite(1));
        let v2 = r2.dz(IndexPair::new(0, 2)).dx(2).unwrap().valuation(true);
        assert_eq!(v2, Valuation::Infinite);
    }

    #[test]
    fn zero_is_infinite() {
        assert_eq!(TaylorPoly::new().valuation(false), Valuation::Infinite);
        assert!(Valuation::Finite(100) < Valuation::Infinite);
    }

    #[test]
    fn e27_shape() {
        for (mu, i, n) in [(0usize, 1usize, 1usize), (2, 0, 3), (1, 2, 2)] {
            let mut r2 = TaylorPoly::new();
            r2.insert(i, z(1, 2, n), UniSeries::monomial(int(1), mu, 8));
            let v = r2.dz(IndexPair::new(1, 2)).dx(mu).unwrap().valuation(true);
            assert_eq!(v, Valuation::Finite(i + n - 1));
        }
    }
}
