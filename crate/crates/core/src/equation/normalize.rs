use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::{Basis, EquationSpec, IndexPair, LinearTerm};
use crate::error::{Error, Result};
use crate::series::rat::{falling, Rat};
use crate::series::taylor::TaylorPoly;
use crate::series::UniSeries;

/// Stirling number of the second kind `S(n, k)`.
pub fn stirling2(n: usize, k: usize) -> BigInt {
    let mut row = vec![BigInt::one()];
    for i in 1..=n {
        let mut next = vec![BigInt::zero(); i + 1];
        for (kk, slot) in next.iter_mut().enumerate().skip(1) {
            let stay = if kk < row.len() { &row[kk] * BigInt::from(kk) } else { BigInt::zero() };
            *slot = stay + &row[kk - 1];
        }
        row = next;
    }
    row.get(k).cloned().unwrap_or_default()
}

/// The equation rewritten as `C(x; λ, ρ) = λ^m - Σ c_{j,α}(x) λ^j [ρ]_α`.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalizedEquation {
    pub spec: EquationSpec,
    /// `b_{j,α}` in the `∂_x` basis.
    pub b: BTreeMap<IndexPair, UniSeries>,
    /// `c_{j,α} = x^{-α} b_{j,α}`, including `c_{m,0} = -1`.
    pub c: BTreeMap<IndexPair, UniSeries>,
    pub lambda0: BTreeSet<IndexPair>,
    pub lambda1: BTreeSet<IndexPair>,
    pub lambda_all: BTreeSet<IndexPair>,
    /// Zero order of `c` on `Λ₁`, of `c - c(0)` on `Λ₀ \ {(m,0)}`.
    pub p: BTreeMap<IndexPair, usize>,
    pub warnings: Vec<String>,
}

pub fn normalize(spec: &EquationSpec) -> Result<NormalizedEquation> {
    spec.validate()?;
    let m = spec.m;
    let mut b: BTreeMap<IndexPair, UniSeries> = BTreeMap::new();
    let mut push = |pair: IndexPair, s: UniSeries| {
        let merged = match b.remove(&pair) {
            Some(prev) => &prev + &s,
            None => s,
        };
        b.insert(pair, merged);
    };
    for LinearTerm { pair, basis, series } in &spec.linear {
        match basis {
            Basis::Dx => push(*pair, series.clone()),
            Basis::Euler => {
                // (x∂_x)^α = Σ_β S(α,β) x^β ∂_x^β
                for beta in 0..=pair.alpha {
                    let s = stirling2(pair.alpha, beta);
                    if s.is_zero() {
                        continue;
                    }
                    push(IndexPair::new(pair.j, beta), series.scale_int(&s).mul_x_pow(beta));
                }
            }
        }
    }

    let mut warnings = Vec::new();
    let mut c = BTreeMap::new();
    let mut kept_b = BTreeMap::new();
    for (pair, bs) in b {
        if bs.is_zero() {
            warnings.push(format!(
                "b{pair} vanishes through x^{}; the term is treated as zero",
                bs.trunc()
            ));
            continue;
        }
        let v = bs.valuation().expect("nonzero series has a valuation");
        if v < pair.alpha {
            return Err(Error::A3Violation { pair, valuation: v });
        }
        let cs = bs.div_x_pow(pair.alpha)?;
        kept_b.insert(pair, bs);
        c.insert(pair, cs);
    }
    c.insert(IndexPair::new(m, 0), UniSeries::constant(-Rat::one(), spec.trunc_x));

    let mut lambda0 = BTreeSet::new();
    let mut lambda1 = BTreeSet::new();
    let mut p = BTreeMap::new();
    for (pair, cs) in &c {
        if !cs.at_zero().is_zero() {
            lambda0.insert(*pair);
            if pair.j != m {
                let mut shifted = cs.clone();
                shifted.set(0, Rat::zero());
                if let Some(v) = shifted.valuation() {
                    p.insert(*pair, v);
                }
            }
        } else {
            lambda1.insert(*pair);
            p.insert(*pair, cs.valuation().expect("nonzero"));
        }
    }
    let lambda_all = c.keys().copied().filter(|q| q.j != m).collect();

    Ok(NormalizedEquation {
        spec: spec.clone(),
        b: kept_b,
        c,
        lambda0,
        lambda1,
        lambda_all,
        p,
        warnings,
    })
}

impl NormalizedEquation {
    pub fn m(&self) -> usize {
        self.spec.m
    }

    /// `c_{j,α}(0)`, zero for absent pairs.
    pub fn c0(&self, pair: IndexPair) -> Rat {
        self.c.get(&pair).map(|s| s.at_zero().clone()).unwrap_or_else(Rat::zero)
    }

    /// Linear terms other than `(m,0)`.
    pub fn linear_c(&self) -> impl Iterator<Item = (IndexPair, &UniSeries)> {
        let m = self.m();
        self.c.iter().filter(move |(p, _)| p.j != m).map(|(p, s)| (*p, s))
    }

    /// `L(k, l) = k^m - Σ c_{j,α}(0) k^j [l]_α`.
    pub fn eval_l(&self, k: usize, l: usize) -> Rat {
        let kb = BigInt::from(k);
        let mut acc = Rat::from_integer(num_traits::pow(kb.clone(), self.m()));
        for (pair, cs) in self.linear_c() {
            let c0 = cs.at_zero();
            if c0.is_zero() {
                continue;
            }
            let f = falling(l, pair.alpha);
            if f.is_zero() {
                continue;
            }
            acc -= c0 * Rat::from_integer(num_traits::pow(kb.clone(), pair.j) * f);
        }
        acc
    }

    /// `C(x; k, x∂_x) w = k^m w - Σ c_{j,α}(x) k^j [x∂_x]_α w`.
    pub fn apply_c(&self, k: usize, w: &UniSeries) -> UniSeries {
        let kb = BigInt::from(k);
        let mut acc = w.scale_int(&num_traits::pow(kb.clone(), self.m()));
        for (pair, cs) in self.linear_c() {
            let term = cs
                .mul(&w.falling_op(pair.alpha))
                .scale_int(&num_traits::pow(kb.clone(), pair.j));
            acc = &acc - &term;
        }
        acc
    }

    /// Smallest trusted order among the `c_{j,α}`.
    pub fn c_trunc(&self) -> usize {
        self.linear_c().map(|(_, s)| s.trunc()).min().unwrap_or(usize::MAX)
    }

    /// The same equation with every linear term in the `∂_x` basis.
    pub fn to_canonical_spec(&self) -> EquationSpec {
        let mut spec = self.spec.clone();
        spec.linear = self
            .b
            .iter()
            .map(|(pair, s)| LinearTerm {
                pair: *pair,
                basis: Basis::Dx,
                series: s.truncate(spec.trunc_x),
            })
            .collect();
        spec
    }

    pub fn r2(&self) -> TaylorPoly {
        self.spec.r2()
    }
}
