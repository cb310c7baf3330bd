//! Built-in example equations with their expected indices and, where one
//! exists, a closed-form coefficient oracle.

mod model;
mod random;
mod verify;

pub use model::{model_e58, model_e58_degenerate, ModelOracle, ModelParams, ModelSetting, Rung};
pub use random::random_spec;
pub use verify::{verify_all, VerifyRow};

use num_traits::One;
use serde::Serialize;

use crate::equation::{Basis, EquationSpec, IndexPair, IndexSet, MultiIndex};
use crate::error::{Error, Result};
use crate::series::rat::{factorial, int, rat, Rat};
use crate::series::UniSeries;

/// Where an expected value comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// Stated in the source example.
    Stated,
    /// Follows from a short hand computation on the stated data.
    Computed,
    /// Synthetic data with no external reference.
    Synthetic,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Expected {
    pub vertices: Option<Vec<(usize, usize)>>,
    #[serde(with = "crate::serde_rat")]
    pub sigma0: Rat,
    #[serde(with = "crate::serde_rat")]
    pub s0: Rat,
    #[serde(with = "crate::serde_rat::option")]
    pub s1: Option<Rat>,
    pub n_holds: bool,
    pub gp_holds: bool,
    pub r_holds: bool,
    pub provenance: Provenance,
}

/// Exact coefficient information known in closed form.
#[derive(Clone, Debug)]
pub enum Oracle {
    /// `u₁(x) = Σ_{l≥1} (l-1)! x^l`.
    FactorialRow,
    /// Minorant chain of the model equation.
    Model(Box<ModelOracle>),
}

impl Oracle {
    /// Row `k = 1` up to `x^trunc`, when the oracle determines it exactly.
    pub fn first_row(&self, trunc: usize) -> Option<UniSeries> {
        match self {
            Oracle::FactorialRow => Some(UniSeries::from_fn(trunc, |l| {
                if l == 0 {
                    Rat::default()
                } else {
                    Rat::from_integer(factorial(l - 1))
                }
            })),
            Oracle::Model(o) => Some(o.first_row(trunc)),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Fixture {
    pub name: String,
    pub spec: EquationSpec,
    pub expected: Expected,
    pub oracle: Option<Oracle>,
}

/// `((t∂_t)⁴+(x∂_x)²)u = a(x)t + x(t∂_t)²(x∂_x)²u + x^μ t^i ((t∂_t)^j ∂_x^α u)^n`
/// with `a(x) = 1/(1-x)`.
pub fn example_e27(mu: usize, i: usize, j: usize, alpha: usize, n: usize) -> Result<Fixture> {
    example_e27_with(mu, i, j, alpha, n, e27_trunc(mu))
}

/// Smallest truncation that keeps every index decision inside trusted data.
fn e27_trunc(mu: usize) -> usize {
    (mu + 2).max(8)
}

pub fn example_e27_with(mu: usize, i: usize, j: usize, alpha: usize, n: usize, trunc: usize) -> Result<Fixture> {
    let pair = IndexPair::new(j, alpha);
    if !pair.in_im(4) {
        return Err(Error::invalid("(j,alpha)", format!("{pair} is not in I_4")));
    }
    if n == 0 || i + n < 2 {
        return Err(Error::invalid("(i,n)", "need n >= 1 and i + n >= 2"));
    }
    if mu > trunc {
        return Err(Error::invalid("mu", format!("x^{mu} exceeds trunc_x = {trunc}")));
    }
    let mut spec = EquationSpec::new(4, trunc).with_a(UniSeries::geometric(trunc));
    spec.add_linear(IndexPair::new(0, 2), Basis::Euler, UniSeries::constant(int(-1), trunc));
    spec.add_linear(IndexPair::new(2, 2), Basis::Euler, UniSeries::monomial(int(1), 1, trunc));
    spec.add_nonlinear(i, MultiIndex::from_pairs([(pair, n)]), UniSeries::monomial(int(1), mu, trunc))?;
    let num = j as i64 + 2 * alpha as i64 - mu as i64 - 4;
    let s0 = Rat::one() + rat(num.max(0), (i + n - 1) as i64);
    Ok(Fixture {
        name: format!("e27(mu={mu},i={i},j={j},alpha={alpha},n={n})"),
        spec,
        expected: Expected {
            vertices: Some(vec![(4, 0), (0, 2)]),
            sigma0: int(2),
            s0,
            s1: None,
            n_holds: true,
            gp_holds: true,
            r_holds: false,
            provenance: Provenance::Stated,
        },
        oracle: None,
    })
}

/// Parameters for which the `example_e27` solution lies in `G_{(1,2)}`, i.e. `s₀ = 1`.
pub fn e27_convergent_in_t(mu: usize, j: usize, alpha: usize) -> bool {
    match mu {
        0 => j + alpha <= 2 || (j, alpha) == (2, 1) || (j, alpha) == (3, 0),
        1 => alpha <= 1 || (j, alpha) == (0, 2) || (j, alpha) == (1, 2),
        2 => alpha <= 2 || (j, alpha) == (0, 3),
        3 => alpha <= 3,
        _ => true,
    }
}

/// `t∂_t u = xt + x(x∂_x)u + t x³ ∂_x² u`.
pub fn example_e62() -> Fixture {
    example_e62_with(60)
}

pub fn example_e62_with(trunc: usize) -> Fixture {
    let mut spec = EquationSpec::new(1, trunc)
        .with_a(UniSeries::monomial(int(1), 1, trunc))
        .with_index_set(IndexSet::Explicit([IndexPair::new(0, 2)].into_iter().collect()));
    spec.add_linear(IndexPair::new(0, 1), Basis::Euler, UniSeries::monomial(int(1), 1, trunc));
    spec.add_nonlinear(
        1,
        MultiIndex::unit(IndexPair::new(0, 2)),
        UniSeries::monomial(int(1), 3, trunc),
    )
    .expect("degree 2");
    Fixture {
        name: "e62".into(),
        spec,
        expected: Expected {
            vertices: Some(vec![(1, 0)]),
            sigma0: int(2),
            s0: int(2),
            s1: Some(int(1)),
            n_holds: true,
            gp_holds: true,
            r_holds: false,
            provenance: Provenance::Stated,
        },
        oracle: Some(Oracle::FactorialRow),
    }
}

/// `u_{k,l}/l! ≤ 2^{k-1} binom(l+2k-2, l)`, the exact bound for the `example_e62` solution.
pub fn e62_bound(k: usize, l: usize) -> Rat {
    use crate::series::rat::binomial;
    assert!(k >= 1);
    Rat::from_integer(num_traits::pow(num_bigint::BigInt::from(2), k - 1) * binomial(l + 2 * k - 2, l))
}

/// Every fixture with fixed parameters, in a stable order.
pub fn catalog() -> Vec<Fixture> {
    let mut out = vec![
        example_e27(0, 1, 3, 1, 1).expect("valid"),
        example_e27(2, 1, 0, 3, 1).expect("valid"),
        example_e27(1, 0, 1, 2, 2).expect("valid"),
        example_e62(),
    ];
    for s in ModelSetting::ALL {
        out.push(model_e58(&s.params(), 30).expect("valid setting"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::analyze;
    use crate::equation::normalize;

    #[test]
    fn e27_examples() {
        for (mu, i, j, a, n, s0) in [(4, 1, 3, 1, 1, int(1)), (0, 1, 3, 1, 1, int(2)), (2, 1, 0, 3, 1, int(1))] {
            let f = example_e27(mu, i, j, a, n).unwrap();
            assert_eq!(f.expected.s0, s0);
            let an = analyze(&normalize(&f.spec).unwrap(), 20).unwrap();
            assert_eq!(an.indices.sigma0.value, int(2));
            assert_eq!(an.indices.s0.value, s0, "{}", f.name);
        }
        assert!(example_e27(0, 1, 4, 1, 1).is_err());
        assert!(example_e27(0, 1, 0, 1, 0).is_err());
        assert!(example_e27(0, 0, 0, 1, 1).is_err());
    }

    #[test]
    fn e62_indices() {
        let f = example_e62();
        let an = analyze(&normalize(&f.spec).unwrap(), 20).unwrap();
        assert_eq!(an.indices.sigma0.value, int(2));
        assert_eq!(an.indices.s0.value, int(2));
        assert_eq!(an.indices.s1.value, int(1));
        assert!(!an.regular);
        assert_eq!(an.polygon.vertices, vec![(1, 0)]);
    }

    #[test]
    fn catalog_matches_analysis() {
        for f in catalog() {
            let norm = normalize(&f.spec).unwrap();
            let an = analyze(&norm, 30).unwrap();
            let e = &f.expected;
            assert_eq!(an.indices.sigma0.value, e.sigma0, "{}", f.name);
            assert_eq!(an.indices.s0.value, e.s0, "{}", f.name);
            if let Some(s1) = &e.s1 {
                assert_eq!(&an.indices.s1.value, s1, "{}", f.name);
            }
            if let Some(v) = &e.vertices {
                assert_eq!(&an.polygon.vertices, v, "{}", f.name);
            }
            assert_eq!(an.n.holds(), e.n_holds, "{}", f.name);
            assert_eq!(an.gp.holds(), e.gp_holds, "{}", f.name);
            assert_eq!(an.regular, e.r_holds, "{}", f.name);
        }
    }

    #[test]
    fn e62_bound_values() {
        assert_eq!(e62_bound(1, 5), int(1));
        assert_eq!(e62_bound(2, 1), int(2 * 3));
    }
}
