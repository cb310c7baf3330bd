//! Formal Borel operators `B_σ^(m)` and the Nagumo-type estimates built on them.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::rat::{factorial, ln_abs, rat, Rat};
use super::uni::UniSeries;
use crate::error::{Error, Result};

/// A Gevrey order `(s, σ)` with both components at least 1.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GevreyOrder {
    #[serde(with = "crate::serde_rat")]
    pub s: Rat,
    #[serde(with = "crate::serde_rat")]
    pub sigma: Rat,
}

impl GevreyOrder {
    pub fn new(s: Rat, sigma: Rat) -> Result<Self> {
        if s < Rat::one() || sigma < Rat::one() {
            return Err(Error::Domain(format!(
                "Gevrey order needs s >= 1 and sigma >= 1, got ({s}, {sigma})"
            )));
        }
        Ok(Self { s, sigma })
    }
}

fn integer_excess(sigma: &Rat) -> Result<u32> {
    if *sigma < Rat::one() {
        return Err(Error::Domain(format!("sigma = {sigma} < 1")));
    }
    let e = sigma - Rat::one();
    if !e.is_integer() {
        return Err(Error::Domain(format!(
            "exact Borel weights need sigma - 1 integral, got sigma = {sigma}"
        )));
    }
    e.to_integer()
        .to_u32()
        .ok_or_else(|| Error::Domain(format!("sigma = {sigma} too large")))
}

/// `B_σ^(m)[f]`: coefficient `j` becomes `f_j / [j-m]_+!^(σ-1)`. Requires `σ - 1 ∈ ℕ`.
pub fn borel_m(f: &UniSeries, sigma: &Rat, m: usize) -> Result<UniSeries> {
    let e = integer_excess(sigma)?;
    if e == 0 {
        return Ok(f.clone());
    }
    let mut weight = BigInt::one();
    Ok(UniSeries::from_fn(f.trunc(), |j| {
        if j > m {
            weight *= BigInt::from(j - m);
        }
        let c = f.coeff(j);
        if c.is_zero() {
            Rat::zero()
        } else {
            c / Rat::from_integer(num_traits::pow(weight.clone(), e as usize))
        }
    }))
}

/// `ln |B_σ^(m)[f]_j|` for real `σ ≥ 1`; `None` marks a zero coefficient.
pub fn borel_m_log(f: &UniSeries, sigma: f64, m: usize) -> Result<Vec<Option<f64>>> {
    if sigma.is_nan() || sigma < 1.0 {
        return Err(Error::Domain(format!("sigma = {sigma} < 1")));
    }
    let mut ln_fact = 0.0;
    Ok((0..=f.trunc())
        .map(|j| {
            if j > m {
                ln_fact += ((j - m) as f64).ln();
            }
            let c = f.coeff(j);
            (!c.is_zero()).then(|| ln_abs(c) - (sigma - 1.0) * ln_fact)
        })
        .collect())
}

/// Coefficients of `C / (R - x)^a` through `trunc`.
pub fn pole_series(c: &Rat, r: &Rat, a: &Rat, trunc: usize) -> UniSeries {
    // [x^j] (R-x)^{-a} = a(a+1)...(a+j-1) / (j! R^{a+j})
    let ra = rat_pow(r, a);
    let mut acc = c / ra;
    UniSeries::from_fn(trunc, |j| {
        if j > 0 {
            acc = &acc * (a + Rat::from_integer((j - 1).into())) / (Rat::from_integer(j.into()) * r);
        }
        acc.clone()
    })
}

/// `r^a` for integral `a`.
fn rat_pow(r: &Rat, a: &Rat) -> Rat {
    assert!(a.is_integer() && !a.is_negative(), "pole order must be a nonnegative integer");
    let n = a.to_integer().to_usize().expect("pole order fits usize");
    num_traits::pow(r.clone(), n)
}

/// Rational lower bound for `e`.
pub fn e_lower() -> Rat {
    rat(2_718_281_828, 1_000_000_000)
}

/// Outcome of checking both Nagumo estimates on one series.
#[derive(Clone, Debug, PartialEq)]
pub struct NagumoReport {
    /// Smallest `C` with `B_σ^(m)[|f|] << C/(R-x)^a` on the trusted range.
    pub c: Rat,
    pub first: bool,
    pub second: bool,
    pub order: usize,
}

/// Checks `B^(m-1)[∂|f|] << aC/(R-x)^(a+1)` and
/// `B^(m)[∂|f|] << (a+σ)^σ e^σ C/(R-x)^(a+σ)` with `C` fitted from `f`.
pub fn check_nagumo(f: &UniSeries, sigma: &Rat, m: usize, a: usize, r: &Rat) -> Result<NagumoReport> {
    if m == 0 {
        return Err(Error::Domain("Nagumo estimate needs m >= 1".into()));
    }
    let s = integer_excess(sigma)? as usize + 1;
    let af = Rat::from_integer(a.into());
    let abs = f.majorant_abs();
    let b = borel_m(&abs, sigma, m)?;
    let unit = pole_series(&Rat::one(), r, &af, f.trunc());
    let c = (0..=f.trunc())
        .map(|j| b.coeff(j) / unit.coeff(j))
        .fold(Rat::zero(), |acc, v| if v > acc { v } else { acc });
    let d = abs.dx(1)?;
    let order = d.trunc();

    let lhs1 = borel_m(&d, sigma, m - 1)?;
    let rhs1 = pole_series(&(&af * &c), r, &(&af + Rat::one()), order);

    let lhs2 = borel_m(&d, sigma, m)?;
    let sf = Rat::from_integer(s.into());
    let k = num_traits::pow(&af + &sf, s) * num_traits::pow(e_lower(), s);
    let rhs2 = pole_series(&(k * &c), r, &(&af + &sf), order);

    Ok(NagumoReport {
        c,
        first: rhs1.dominates(&lhs1),
        second: rhs2.dominates(&lhs2),
        order,
    })
}

/// Checks, for `1 ≤ μ ≤ m` and `1 ≤ k ≤ k_max`,
/// `B^(m-μ)[∂^μ|f|] << (a)_μ C/(R-x)^(a+μ)` and
/// `B^(m-μ)[∂^(k+μ)|f|] << (a)_μ A_{μ,k} C/(R-x)^(a+μ+kσ)` with
/// `A_{μ,k} = e^{kσ} Π_{h≤k} (a+μ+hσ)^σ`. Returns the first failing `(μ, k)`
/// (`k = 0` for the first family).
pub fn check_nagumo_higher(
    f: &UniSeries,
    sigma: &Rat,
    m: usize,
    a: usize,
    r: &Rat,
    k_max: usize,
) -> Result<Option<(usize, usize)>> {
    let s = integer_excess(sigma)? as usize + 1;
    let af = Rat::from_integer(a.into());
    let abs = f.majorant_abs();
    let b = borel_m(&abs, sigma, m)?;
    let unit = pole_series(&Rat::one(), r, &af, f.trunc());
    let c = (0..=f.trunc())
        .map(|j| b.coeff(j) / unit.coeff(j))
        .fold(Rat::zero(), |acc, v| if v > acc { v } else { acc });
    for mu in 1..=m {
        let rising: Rat = (0..mu).map(|i| &af + Rat::from_integer(i.into())).product();
        let base = &af + Rat::from_integer(mu.into());
        let d = abs.dx(mu)?;
        let lhs = borel_m(&d, sigma, m - mu)?;
        let rhs = pole_series(&(&rising * &c), r, &base, d.trunc());
        if !rhs.dominates(&lhs) {
            return Ok(Some((mu, 0)));
        }
        let mut amk = Rat::one();
        for k in 1..=k_max {
            let Ok(d) = abs.dx(mu + k) else { break };
            amk *= num_traits::pow(e_lower(), s) * num_traits::pow(&base + Rat::from_integer((k * s).into()), s);
            let lhs = borel_m(&d, sigma, m - mu)?;
            let order = &base + Rat::from_integer((k * s).into());
            let rhs = pole_series(&(&rising * &amk * &c), r, &order, d.trunc());
            if !rhs.dominates(&lhs) {
                return Ok(Some((mu, k)));
            }
        }
    }
    Ok(None)
}

/// `(j-m)_+!` as an exact integer, for callers that need the raw weight.
pub fn shifted_factorial(j: usize, m: usize) -> BigInt {
    factorial(j.saturating_sub(m))
}
