use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;

use super::polygon::NewtonPolygon;
use crate::equation::{IndexPair, MultiIndex, NormalizedEquation};
use crate::error::{Error, Result};
use crate::series::rat::{fmt_rat, Rat};
use crate::series::taylor::Valuation;

fn r(n: usize) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// `σ₀` and the pairs of `Λ₁` attaining it.
#[derive(Clone, Debug, PartialEq)]
pub struct Sigma0 {
    pub value: Rat,
    pub attained_by: Vec<IndexPair>,
    /// `d_{j,α}` for every pair of `Λ₁`.
    pub d: Vec<(IndexPair, Rat)>,
}

pub fn sigma0(norm: &NormalizedEquation, poly: &NewtonPolygon) -> Sigma0 {
    let mut best = Rat::one();
    let mut attained_by = Vec::new();
    let mut d = Vec::new();
    for q in &norm.lambda1 {
        let dq = poly.distance_d(*q).expect("pairs of I_m have j < m");
        let pq = r(norm.p[q]);
        let v = (&pq + &dq) / &pq;
        d.push((*q, dq));
        if v > best {
            best = v;
            attained_by = vec![*q];
        } else if v == best && best > Rat::one() {
            attained_by.push(*q);
        }
    }
    Sigma0 { value: best, attained_by, d }
}

/// Condition (R): every pair of `Λ₁` lies in `N₀`.
pub fn is_regular_singular(norm: &NormalizedEquation, poly: &NewtonPolygon) -> bool {
    norm.lambda1.iter().all(|q| poly.contains(*q))
}

/// The term and order attaining `s₀` (or `s₁`).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct S0Attribution {
    pub mu: usize,
    pub i: usize,
    pub nu: MultiIndex,
    pub pair: IndexPair,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IndexValue {
    pub value: Rat,
    pub attained_by: Option<S0Attribution>,
}

/// Range of `μ` scanned for the `sup` and whether data ran out first.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MuScan {
    pub max_mu: usize,
    pub truncation_limited: bool,
}

/// `μ` range: `0 ≤ μ < m` on `I_m`; every order the data reaches otherwise.
pub fn mu_scan(norm: &NormalizedEquation) -> MuScan {
    let spec = &norm.spec;
    let m = spec.m;
    let data_top = spec.trunc_x;
    if spec.index_set.is_im() {
        MuScan {
            max_mu: (m - 1).min(data_top),
            truncation_limited: m - 1 > data_top,
        }
    } else {
        let live_at_top = spec
            .nonlinear
            .iter()
            .any(|(k, a)| k.nu().degree() >= 1 && a.get(a.trunc()).is_some_and(|c| !c.is_zero()) && a.trunc() == data_top);
        MuScan {
            max_mu: data_top,
            truncation_limited: live_at_top,
        }
    }
}

fn numerator_f(j: usize, alpha: usize, mu: usize, m: usize, sigma0: &Rat) -> Rat {
    // j + μ + σ₀(α - μ) - m
    r(j) + r(mu) + sigma0 * (r(alpha) - r(mu)) - r(m)
}

fn numerator_g(j: usize, alpha: usize, mu: usize, m: usize, sigma0: &Rat) -> Rat {
    // j + max{α, μ + σ₀(α - μ)} - m
    let alt = r(mu) + sigma0 * (r(alpha) - r(mu));
    let inner = if alt > r(alpha) { alt } else { r(alpha) };
    r(j) + inner - r(m)
}

/// `L_{μ,j,α} = val((∂_{z_{j,α}} ∂_x^μ R₂)(t,0,z))`.
pub fn l_valuation(norm: &NormalizedEquation, mu: usize, pair: IndexPair) -> Result<Valuation> {
    Ok(norm.r2().dz(pair).dx(mu)?.valuation(true))
}

fn finish(best: Rat, arg: Option<S0Attribution>) -> IndexValue {
    if best > Rat::zero() {
        IndexValue { value: Rat::one() + best, attained_by: arg }
    } else {
        IndexValue { value: Rat::one(), attained_by: None }
    }
}

/// `s₀` from the valuations `L_{μ,j,α}` of `R₂`.
pub fn s0_valuation_route(norm: &NormalizedEquation, sigma0: &Rat) -> Result<IndexValue> {
    let spec = &norm.spec;
    let m = spec.m;
    let im = spec.index_set.is_im();
    let pairs = spec.index_set.pairs(m);
    let scan = mu_scan(norm);
    let r2 = norm.r2();
    let mut best = Rat::zero();
    let mut arg = None;
    for mu in 0..=scan.max_mu {
        if im && mu >= m {
            break;
        }
        let d = r2.dx(mu)?;
        for &pair in &pairs {
            let v = match d.dz(pair).valuation(true) {
                Valuation::Finite(v) => v,
                Valuation::Infinite => continue,
            };
            let num = if im {
                numerator_f(pair.j, pair.alpha, mu, m, sigma0)
            } else {
                numerator_g(pair.j, pair.alpha, mu, m, sigma0)
            };
            if v == 0 {
                return Err(Error::Invariant(format!("R2 has a term of degree < 2 at {pair}")));
            }
            let val = num / r(v);
            if val > best {
                best = val;
                // the attaining term: smallest i + |ν| among contributors
                let term = spec
                    .nonlinear
                    .iter()
                    .filter(|(k, a)| k.nu().get(pair) > 0 && a.get(mu).is_some_and(|c| !c.is_zero()))
                    .min_by_key(|(k, _)| k.i() + k.nu().degree())
                    .map(|(k, _)| (k.i(), k.nu().clone()))
                    .expect("finite valuation has a contributing term");
                arg = Some(S0Attribution { mu, i: term.0, nu: term.1, pair });
            }
        }
    }
    Ok(finish(best, arg))
}

/// `s₀` from `J_μ`, `K_ν` and `m_{ν,μ}` read directly off the term table.
pub fn s0_term_route(norm: &NormalizedEquation, sigma0: &Rat) -> IndexValue {
    let spec = &norm.spec;
    let m = spec.m;
    let scan = mu_scan(norm);
    let mut best = Rat::zero();
    let mut arg = None;
    let top = if spec.index_set.is_im() { scan.max_mu.min(m - 1) } else { scan.max_mu };
    for mu in 0..=top {
        for (key, a) in &spec.nonlinear {
            let deg = key.nu().degree();
            if deg == 0 || a.get(mu).is_none_or(|c| c.is_zero()) {
                continue;
            }
            let (mut m_nu, mut at) = (None::<Rat>, None);
            for q in key.nu().support() {
                let v = r(q.j) + numerator_g(0, q.alpha, mu, 0, sigma0);
                if m_nu.as_ref().is_none_or(|b| v > *b) {
                    m_nu = Some(v);
                    at = Some(q);
                }
            }
            let val = (m_nu.expect("nonempty support") - r(m)) / r(key.i() + deg - 1);
            if val > best {
                best = val;
                arg = Some(S0Attribution {
                    mu,
                    i: key.i(),
                    nu: key.nu().clone(),
                    pair: at.expect("nonempty support"),
                });
            }
        }
    }
    finish(best, arg)
}

/// `s₁`: orders `μ ≤ M = max α` over pairs with `α ≥ μ`.
pub fn s1(norm: &NormalizedEquation, sigma0: &Rat) -> Result<IndexValue> {
    let spec = &norm.spec;
    let m = spec.m;
    let pairs = spec.index_set.pairs(m);
    let big_m = pairs.iter().map(|p| p.alpha).max().unwrap_or(0);
    let r2 = norm.r2();
    let mut best = Rat::zero();
    let mut arg = None;
    for mu in 0..=big_m.min(spec.trunc_x) {
        let d = r2.dx(mu)?;
        for &pair in pairs.iter().filter(|p| p.alpha >= mu) {
            let Valuation::Finite(v) = d.dz(pair).valuation(true) else { continue };
            let val = numerator_f(pair.j, pair.alpha, mu, m, sigma0) / r(v);
            if val > best {
                best = val;
                let term = spec
                    .nonlinear
                    .iter()
                    .filter(|(k, a)| k.nu().get(pair) > 0 && a.get(mu).is_some_and(|c| !c.is_zero()))
                    .min_by_key(|(k, _)| k.i() + k.nu().degree())
                    .map(|(k, _)| (k.i(), k.nu().clone()))
                    .expect("finite valuation has a contributing term");
                arg = Some(S0Attribution { mu, i: term.0, nu: term.1, pair });
            }
        }
    }
    Ok(finish(best, arg))
}

/// All indices with both `s₀` routes.
#[derive(Clone, Debug, PartialEq)]
pub struct IndexResult {
    pub sigma0: Sigma0,
    pub s0: IndexValue,
    pub s0_alt: IndexValue,
    pub s1: IndexValue,
    pub mu_scan: MuScan,
}

impl IndexResult {
    pub fn s0_equals_s1(&self) -> bool {
        self.s0.value == self.s1.value
    }
}

pub fn compute_indices(norm: &NormalizedEquation, poly: &NewtonPolygon) -> Result<IndexResult> {
    let sig = sigma0(norm, poly);
    let s0 = s0_valuation_route(norm, &sig.value)?;
    let s0_alt = s0_term_route(norm, &sig.value);
    if s0.value != s0_alt.value {
        return Err(Error::Invariant(format!(
            "s0 routes disagree: {} from valuations, {} from J_mu/m_nu_mu",
            fmt_rat(&s0.value),
            fmt_rat(&s0_alt.value)
        )));
    }
    let s1 = s1(norm, &sig.value)?;
    Ok(IndexResult {
        sigma0: sig,
        s0,
        s0_alt,
        s1,
        mu_scan: mu_scan(norm),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::build_polygon;
    use crate::equation::{im_pairs, normalize};
    use crate::fixtures::{e27_convergent_in_t, example_e27, random_spec};
    use crate::series::rat::{int, rat};

    fn indices_of(spec: &crate::equation::EquationSpec) -> IndexResult {
        let n = normalize(spec).unwrap();
        let poly = build_polygon(&n.lambda0, n.m());
        compute_indices(&n, &poly).unwrap()
    }

    #[test]
    fn e27_grid() {
        for mu in 0..=6 {
            for pair in im_pairs(4) {
                for n in 1..=3usize {
                    for i in 0..=3usize {
                        if i + n < 2 {
                            continue;
                        }
                        let f = example_e27(mu, i, pair.j, pair.alpha, n).unwrap();
                        let ix = indices_of(&f.spec);
                        assert_eq!(ix.sigma0.value, int(2));
                        assert_eq!(ix.s0.value, f.expected.s0, "{}", f.name);
                        assert_eq!(ix.s0.value == int(1), e27_convergent_in_t(mu, pair.j, pair.alpha), "{}", f.name);
                    }
                }
            }
        }
    }

    #[test]
    fn routes_agree_and_regular_singular_iff_on_random_specs() {
        for seed in 0..200 {
            let spec = random_spec(seed);
            let n = normalize(&spec).unwrap();
            let poly = build_polygon(&n.lambda0, n.m());
            let ix = compute_indices(&n, &poly).unwrap();
            assert_eq!(ix.s0.value, ix.s0_alt.value, "seed {seed}");
            assert_eq!(ix.sigma0.value == int(1), is_regular_singular(&n, &poly), "seed {seed}");
            assert!(ix.s1.value <= ix.s0.value, "seed {seed}");
        }
    }

    #[test]
    fn sigma0_attribution() {
        let f = crate::fixtures::model_e58(&crate::fixtures::ModelSetting::C.params(), 12).unwrap();
        let ix = indices_of(&f.spec);
        assert_eq!(ix.sigma0.value, rat(4, 3));
        assert_eq!(ix.sigma0.attained_by, vec![IndexPair::new(1, 2)]);
        let att = ix.s0.attained_by.unwrap();
        assert_eq!((att.mu, att.i, att.pair), (1, 2, IndexPair::new(1, 2)));
    }
}
