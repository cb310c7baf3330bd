//! Truncated univariate power series with exact rational coefficients.
//!
//! A `UniSeries` stores the coefficients of `x^0 ..= x^trunc`. Everything at
//! or above `trunc + 1` is unknown, and every operation returns the largest
//! order it can still vouch for.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use super::rat::{falling, fmt_rat, parse_rat, Rat};
use crate::error::{Error, Result};

/// Convolutions at or above this length are split across threads.
const PAR_MUL_THRESHOLD: usize = 48;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct UniSeries {
    coeffs: Vec<Rat>,
}

/// Outcome of a coefficient-wise comparison `f << g` on a common range.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dominance {
    pub holds: bool,
    /// Last order that was compared.
    pub order: usize,
    /// First order where the comparison failed.
    pub witness: Option<usize>,
}

impl UniSeries {
    pub fn zero(trunc: usize) -> Self {
        Self {
            coeffs: vec![Rat::zero(); trunc + 1],
        }
    }

    pub fn one(trunc: usize) -> Self {
        Self::constant(Rat::one(), trunc)
    }

    pub fn constant(c: Rat, trunc: usize) -> Self {
        let mut s = Self::zero(trunc);
        s.coeffs[0] = c;
        s
    }

    pub fn monomial(c: Rat, power: usize, trunc: usize) -> Self {
        let mut s = Self::zero(trunc);
        if power <= trunc {
            s.coeffs[power] = c;
        }
        s
    }

    /// Builds from an explicit coefficient list; `trunc = coeffs.len() - 1`.
    pub fn from_coeffs(coeffs: Vec<Rat>) -> Self {
        assert!(!coeffs.is_empty(), "a series needs at least one trusted coefficient");
        Self { coeffs }
    }

    pub fn from_fn(trunc: usize, f: impl FnMut(usize) -> Rat) -> Self {
        Self {
            coeffs: (0..=trunc).map(f).collect(),
        }
    }

    pub fn from_ints(coeffs: &[i64]) -> Self {
        Self::from_coeffs(coeffs.iter().map(|&c| Rat::from_integer(c.into())).collect())
    }

    /// Zero-pads a polynomial's coefficient list out to `trunc`.
    pub fn from_poly(poly: &[Rat], trunc: usize) -> Self {
        Self::from_fn(trunc, |l| poly.get(l).cloned().unwrap_or_else(Rat::zero))
    }

    /// `1/(1-x) = 1 + x + x^2 + ...`
    pub fn geometric(trunc: usize) -> Self {
        Self::from_fn(trunc, |_| Rat::one())
    }

    pub fn trunc(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Rat> {
        self.coeffs
    }

    /// Coefficient of `x^l`. Panics beyond the trusted order.
    pub fn coeff(&self, l: usize) -> &Rat {
        assert!(
            l <= self.trunc(),
            "coefficient x^{l} requested but series is only trusted to x^{}",
            self.trunc()
        );
        &self.coeffs[l]
    }

    pub fn get(&self, l: usize) -> Option<&Rat> {
        self.coeffs.get(l)
    }

    pub fn set(&mut self, l: usize, value: Rat) {
        self.coeffs[l] = value;
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    /// Index of the first nonzero coefficient; `None` when zero to truncation.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    /// `f >> 0`: every trusted coefficient is nonnegative.
    pub fn is_nonneg(&self) -> bool {
        self.coeffs.iter().all(|c| !c.is_negative())
    }

    /// Keeps only the coefficients up to `trunc` (never extends).
    pub fn truncate(&self, trunc: usize) -> Self {
        let t = trunc.min(self.trunc());
        Self {
            coeffs: self.coeffs[..=t].to_vec(),
        }
    }

    pub fn scale(&self, c: &Rat) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
        }
    }

    pub fn scale_int(&self, c: &BigInt) -> Self {
        let c = Rat::from_integer(c.clone());
        self.scale(&c)
    }

    /// Cauchy product, trusted to `min(f.trunc, g.trunc)`.
    pub fn mul(&self, other: &Self) -> Self {
        let t = self.trunc().min(other.trunc());
        let a = &self.coeffs;
        let b = &other.coeffs;
        let coef = |l: usize| -> Rat {
            let mut acc = Rat::zero();
            for i in 0..=l {
                if a[i].is_zero() || b[l - i].is_zero() {
                    continue;
                }
                acc += &a[i] * &b[l - i];
            }
            acc
        };
        let coeffs = if t + 1 >= PAR_MUL_THRESHOLD {
            (0..=t).into_par_iter().map(coef).collect()
        } else {
            (0..=t).map(coef).collect()
        };
        Self { coeffs }
    }

    pub fn pow(&self, e: usize) -> Self {
        let mut acc = Self::one(self.trunc());
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// `x^k f`, trusted to `trunc + k`.
    pub fn mul_x_pow(&self, k: usize) -> Self {
        let mut coeffs = vec![Rat::zero(); k];
        coeffs.extend(self.coeffs.iter().cloned());
        Self { coeffs }
    }

    /// `x^{-k} f`; the first `k` coefficients must vanish. Trusted to `trunc - k`.
    pub fn div_x_pow(&self, k: usize) -> Result<Self> {
        if k > self.trunc() {
            return Err(Error::TruncationExhausted {
                requested: k,
                available: self.trunc(),
            });
        }
        if let Some(v) = self.valuation() {
            if v < k {
                return Err(Error::Domain(format!(
                    "cannot divide by x^{k}: series has valuation {v}"
                )));
            }
        }
        Ok(Self {
            coeffs: self.coeffs[k..].to_vec(),
        })
    }

    /// `∂_x^order f`, trusted to `trunc - order`.
    pub fn dx(&self, order: usize) -> Result<Self> {
        if order > self.trunc() {
            return Err(Error::TruncationExhausted {
                requested: order,
                available: self.trunc(),
            });
        }
        Ok(Self::from_fn(self.trunc() - order, |l| {
            &self.coeffs[l + order] * Rat::from_integer(falling(l + order, order))
        }))
    }

    /// `[x∂_x]_α f = (x∂_x)(x∂_x - 1)⋯(x∂_x - α + 1) f`: scales `f_l` by `[l]_α`.
    pub fn falling_op(&self, alpha: usize) -> Self {
        Self {
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(l, c)| {
                    if c.is_zero() {
                        c.clone()
                    } else {
                        c * Rat::from_integer(falling(l, alpha))
                    }
                })
                .collect(),
        }
    }

    /// The Euler operator `x∂_x`.
    pub fn euler(&self) -> Self {
        self.falling_op(1)
    }

    /// `|f|`: coefficient-wise absolute value.
    pub fn majorant_abs(&self) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| c.abs()).collect(),
        }
    }

    /// Checks `other << self`, i.e. `self_l >= other_l` on the common range.
    pub fn dominance(&self, other: &Self) -> Dominance {
        let order = self.trunc().min(other.trunc());
        let witness = (0..=order).find(|&l| self.coeffs[l] < other.coeffs[l]);
        Dominance {
            holds: witness.is_none(),
            order,
            witness,
        }
    }

    pub fn dominates(&self, other: &Self) -> bool {
        self.dominance(other).holds
    }

    /// Evaluates the constant term.
    pub fn at_zero(&self) -> &Rat {
        &self.coeffs[0]
    }

    /// Coefficients as decimal strings (`"p/q"` or integers).
    pub fn to_literal(&self) -> Vec<String> {
        self.coeffs.iter().map(fmt_rat).collect()
    }

    pub fn from_literal(items: &[impl AsRef<str>]) -> Result<Self> {
        if items.is_empty() {
            return Err(Error::Domain("empty series literal".into()));
        }
        let coeffs = items
            .iter()
            .enumerate()
            .map(|(l, s)| {
                parse_rat(s.as_ref()).ok_or_else(|| {
                    Error::Domain(format!("coefficient {l}: `{}` is not a rational", s.as_ref()))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { coeffs })
    }
}

impl fmt::Debug for UniSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for UniSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (l, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match l {
                0 => write!(f, "{}", fmt_rat(c))?,
                1 => write!(f, "({})x", fmt_rat(c))?,
                _ => write!(f, "({})x^{l}", fmt_rat(c))?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, " + O(x^{})", self.trunc() + 1)
    }
}

impl Add for &UniSeries {
    type Output = UniSeries;

    fn add(self, rhs: &UniSeries) -> UniSeries {
        let t = self.trunc().min(rhs.trunc());
        UniSeries::from_fn(t, |l| &self.coeffs[l] + &rhs.coeffs[l])
    }
}

impl Sub for &UniSeries {
    type Output = UniSeries;

    fn sub(self, rhs: &UniSeries) -> UniSeries {
        let t = self.trunc().min(rhs.trunc());
        UniSeries::from_fn(t, |l| &self.coeffs[l] - &rhs.coeffs[l])
    }
}

impl Mul for &UniSeries {
    type Output = UniSeries;

    fn mul(self, rhs: &UniSeries) -> UniSeries {
        UniSeries::mul(self, rhs)
    }
}

impl Neg for &UniSeries {
    type Output = UniSeries;

    fn neg(self) -> UniSeries {
        UniSeries {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}
