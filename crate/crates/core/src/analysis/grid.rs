//! Exact grid checks of the polygon inequalities.
//!
//! Each comparison is first made in log space; only near-ties fall back to
//! big-integer arithmetic, so every verdict is exact.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use super::polygon::NewtonPolygon;
use crate::equation::{im_pairs, IndexPair};
use crate::series::rat::{falling, Rat};

const LOG_TIE: f64 = 1e-9;

fn big(n: usize) -> BigInt {
    BigInt::from(n)
}

fn ln(n: usize) -> f64 {
    (n as f64).ln()
}

/// Decides `lhs ≤ rhs` given float logs and an exact fallback.
fn le_exact(lhs_ln: f64, rhs_ln: f64, exact: impl FnOnce() -> (BigInt, BigInt)) -> bool {
    let scale = 1.0 + lhs_ln.abs().max(rhs_ln.abs());
    if lhs_ln < rhs_ln - LOG_TIE * scale {
        true
    } else if lhs_ln > rhs_ln + LOG_TIE * scale {
        false
    } else {
        let (a, b) = exact();
        a <= b
    }
}

/// First `(k, l)` violating `k^j l^α ≤ φ(k,l)`, for a pair inside `N₀`.
pub fn phi_bound_inside(poly: &NewtonPolygon, pair: IndexPair, kmax: usize, lmax: usize) -> Option<(usize, usize)> {
    (1..=kmax)
        .into_par_iter()
        .find_map_first(|k| {
            (0..=lmax).find(|&l| {
                if l == 0 {
                    let lhs = if pair.alpha == 0 { num_traits::pow(big(k), pair.j) } else { BigInt::zero() };
                    return lhs > poly.phi(k, 0);
                }
                let lhs_ln = pair.j as f64 * ln(k) + pair.alpha as f64 * ln(l);
                !le_exact(lhs_ln, poly.ln_phi(k, l), || {
                    (num_traits::pow(big(k), pair.j) * num_traits::pow(big(l), pair.alpha), poly.phi(k, l))
                })
            })
            .map(|l| (k, l))
        })
}

/// First `(k, l)` with `l ≥ p` violating
/// `k^j (l-p)^α / φ(k,l) ≤ ([l]_p)^{σ-1}`.
pub fn phi_bound_outside(
    poly: &NewtonPolygon,
    pair: IndexPair,
    p: usize,
    sigma: &Rat,
    kmax: usize,
    lmax: usize,
) -> Option<(usize, usize)> {
    let e = sigma - Rat::one();
    assert!(!e.is_negative(), "sigma must be at least 1");
    let (a, b) = (e.numer().to_usize().expect("small"), e.denom().to_usize().expect("small"));
    (1..=kmax)
        .into_par_iter()
        .find_map_first(|k| {
            (p..=lmax)
                .find(|&l| {
                    if l == p && pair.alpha > 0 {
                        return false;
                    }
                    let base_ln = pair.j as f64 * ln(k) + pair.alpha as f64 * ln(l - p);
                    let fall_ln: f64 = (l - p + 1..=l).map(ln).sum();
                    let lhs_ln = b as f64 * base_ln;
                    let rhs_ln = b as f64 * poly.ln_phi(k, l) + a as f64 * fall_ln;
                    !le_exact(lhs_ln, rhs_ln, || {
                        let base = num_traits::pow(big(k), pair.j) * num_traits::pow(big(l - p), pair.alpha);
                        (
                            num_traits::pow(base, b),
                            num_traits::pow(poly.phi(k, l), b) * num_traits::pow(falling(l, p), a),
                        )
                    })
                })
                .map(|l| (k, l))
        })
}

#[derive(Clone, Debug, Serialize)]
pub struct PhiBoundViolation {
    pub pair: IndexPair,
    pub p: Option<usize>,
    pub k: usize,
    pub l: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct PhiBoundReport {
    pub inside_pairs: usize,
    pub outside_checks: usize,
    pub violations: Vec<PhiBoundViolation>,
}

/// Both parts over every pair of `I_m`, with `σ = 1 + d/p` for `p ∈ ps`.
pub fn phi_bound_suite(poly: &NewtonPolygon, ps: &[usize], kmax: usize, lmax: usize) -> PhiBoundReport {
    let m = poly.m();
    let mut rep = PhiBoundReport { inside_pairs: 0, outside_checks: 0, violations: Vec::new() };
    for pair in im_pairs(m) {
        let d = poly.distance_d(pair).expect("j < m");
        if !d.is_positive() {
            rep.inside_pairs += 1;
            if let Some((k, l)) = phi_bound_inside(poly, pair, kmax, lmax) {
                rep.violations.push(PhiBoundViolation { pair, p: None, k, l });
            }
        } else {
            for &p in ps {
                rep.outside_checks += 1;
                let sigma = Rat::one() + &d / Rat::from_integer(big(p));
                if let Some((k, l)) = phi_bound_outside(poly, pair, p, &sigma, kmax, lmax) {
                    rep.violations.push(PhiBoundViolation { pair, p: Some(p), k, l });
                }
            }
        }
    }
    rep
}

/// `⌊l^h⌋` for rational `h ≥ 0`, exactly.
pub fn floor_pow(l: usize, h: &Rat) -> BigInt {
    let (a, b) = (h.numer().to_u32().expect("small"), h.denom().to_u32().expect("small"));
    let target = num_traits::pow(big(l), a as usize);
    let mut k = target.nth_root(b);
    while num_traits::pow(&k + BigInt::one(), b as usize) <= target {
        k += 1;
    }
    while num_traits::pow(k.clone(), b as usize) > target {
        k -= 1;
    }
    k
}

fn ln_big(n: &BigInt) -> f64 {
    crate::series::rat::ln_abs_int(n)
}

/// `max_l (Σ_r k^{a_r} l^{b_r}) / (k^{a_d} l^{b_d})` along `k = ⌊l^h⌋`, `1 ≤ l ≤ lmax`.
pub fn dominance_ratio(terms: &[(usize, usize)], dominant: usize, h: &Rat, lmax: usize) -> f64 {
    (1..=lmax)
        .map(|l| {
            let k = floor_pow(l, h);
            let lk = ln_big(&k);
            let ll = ln(l);
            let (ad, bd) = terms[dominant];
            let base = ad as f64 * lk + bd as f64 * ll;
            terms
                .iter()
                .map(|&(a, b)| (a as f64 * lk + b as f64 * ll - base).exp())
                .sum::<f64>()
        })
        .fold(0.0, f64::max)
}

/// Constant `3·2^{a}` that bounds the three-term ratios.
pub fn three_term_constant(a_dom: usize) -> f64 {
    3.0 * 2f64.powi(a_dom as i32)
}

/// Three terms with `a₃<a₂<a₁`, `b₁<b₂<b₃`, `h₁>h₂`; the first, `k^{a₁}l^{b₁}`, dominates at `k=⌊l^{h₁}⌋`.
pub fn three_term_ratio_outer(a: [usize; 3], b: [usize; 3], lmax: usize) -> Option<f64> {
    if !(a[2] < a[1] && a[1] < a[0] && b[0] < b[1] && b[1] < b[2]) {
        return None;
    }
    let h1 = Rat::new(big(b[1] - b[0]), big(a[0] - a[1]));
    let h2 = Rat::new(big(b[2] - b[1]), big(a[1] - a[2]));
    (h1 > h2).then(|| dominance_ratio(&[(a[0], b[0]), (a[1], b[1]), (a[2], b[2])], 0, &h1, lmax))
}

/// Three terms with `a₂<a₁<a₀`, `b₀<b₁<b₂`, `h₀>h₁`; the middle one, `k^{a₁}l^{b₁}`, dominates at `k=⌊l^{h₁}⌋`.
pub fn three_term_ratio_middle(a: [usize; 3], b: [usize; 3], lmax: usize) -> Option<f64> {
    if !(a[2] < a[1] && a[1] < a[0] && b[0] < b[1] && b[1] < b[2]) {
        return None;
    }
    let h0 = Rat::new(big(b[1] - b[0]), big(a[0] - a[1]));
    let h1 = Rat::new(big(b[2] - b[1]), big(a[1] - a[2]));
    (h0 > h1).then(|| dominance_ratio(&[(a[0], b[0]), (a[1], b[1]), (a[2], b[2])], 1, &h1, lmax))
}

/// `max_l φ(k,l) / (k^{m_i} l^{n_i})` along `k = ⌊l^{s_i}⌋` for vertex `i` (1-based).
pub fn vertex_dominance_ratio(poly: &NewtonPolygon, i: usize, lmax: usize) -> f64 {
    let s = poly.slope(i).expect("finite slope for i >= 1");
    let terms: Vec<(usize, usize)> = poly.vertices.clone();
    dominance_ratio(&terms, i - 1, &s, lmax)
}
