use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::{Expected, Fixture, Oracle, Provenance};
use crate::analysis::build_polygon;
use crate::equation::{Basis, EquationSpec, IndexPair, MultiIndex};
use crate::error::{Error, Result};
use crate::series::rat::{falling, int, uint, Rat};
use crate::series::UniSeries;

/// Data of the model equation
/// `L(t∂_t,x∂_x)u = A x^m t + B x^p (t∂_t)^h [x∂_x]_β u + C t^q x^μ (t∂_t)^j ∂_x^α u`,
/// with `L(λ,ρ) = λ^m + Σ e_{j,α} λ^j [ρ]_α` from `l_data`.
///
/// With `power_variant` the linear operator is `(x∂_x)^β` and the source is `A x t`.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams {
    pub m: usize,
    pub l_data: Vec<(IndexPair, Rat)>,
    pub a: Rat,
    pub b: Rat,
    pub c: Rat,
    pub p: usize,
    pub q: usize,
    pub mu: usize,
    pub h: usize,
    pub beta: usize,
    pub j: usize,
    pub alpha: usize,
    pub power_variant: bool,
}

/// The three parameter settings used by the test suite.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelSetting {
    A,
    B,
    C,
}

impl ModelSetting {
    pub const ALL: [ModelSetting; 3] = [ModelSetting::A, ModelSetting::B, ModelSetting::C];

    pub fn params(self) -> ModelParams {
        let base = ModelParams {
            m: 1,
            l_data: Vec::new(),
            a: int(1),
            b: int(1),
            c: int(1),
            p: 1,
            q: 1,
            mu: 0,
            h: 0,
            beta: 1,
            j: 0,
            alpha: 1,
            power_variant: false,
        };
        match self {
            ModelSetting::A => base,
            ModelSetting::B => ModelParams {
                m: 2,
                l_data: vec![(IndexPair::new(0, 1), int(1))],
                h: 1,
                beta: 1,
                j: 0,
                alpha: 2,
                ..base
            },
            ModelSetting::C => ModelParams {
                m: 3,
                l_data: vec![(IndexPair::new(1, 1), int(2)), (IndexPair::new(0, 2), int(1))],
                p: 2,
                q: 2,
                mu: 1,
                h: 1,
                beta: 2,
                j: 1,
                alpha: 2,
                ..base
            },
        }
    }
}

impl ModelParams {
    fn lambda0(&self) -> std::collections::BTreeSet<IndexPair> {
        self.l_data
            .iter()
            .filter(|(_, e)| !e.is_zero())
            .map(|(q, _)| *q)
            .chain(std::iter::once(IndexPair::new(self.m, 0)))
            .collect()
    }

    /// `d_{h,β}`.
    pub fn d(&self) -> Rat {
        build_polygon(&self.lambda0(), self.m)
            .distance_d(IndexPair::new(self.h, self.beta))
            .expect("h < m")
    }

    pub fn sigma0_star(&self) -> Rat {
        Rat::one() + self.d() / uint(self.p)
    }

    pub fn s0_star(&self) -> Rat {
        let num = uint(self.j + self.alpha) + self.d() / uint(self.p) * (uint(self.alpha) - uint(self.mu))
            - uint(self.m);
        let v = num / uint(self.q);
        Rat::one() + if v.is_positive() { v } else { Rat::zero() }
    }

    /// Checks the hypotheses h₁ to h₄ plus nonnegative `e_{j,α}`; `allow_zero_c` relaxes `C > 0`.
    pub fn validate(&self, allow_zero_c: bool) -> Result<()> {
        let c_ok = if allow_zero_c { !self.c.is_negative() } else { self.c.is_positive() };
        if !(self.a.is_positive() && self.b.is_positive() && c_ok) {
            return Err(Error::hypothesis("h1", "A > 0, B > 0 and C > 0 are required"));
        }
        if self.p < 1 || self.q < 1 || self.mu >= self.m {
            return Err(Error::hypothesis("h2", "need p >= 1, q >= 1 and mu < m"));
        }
        for (q, e) in &self.l_data {
            if !q.in_im(self.m) {
                return Err(Error::invalid("l_data", format!("{q} is not in I_{}", self.m)));
            }
            if e.is_negative() {
                return Err(Error::hypothesis("c2", format!("coefficient of {q} in L must be >= 0")));
            }
        }
        let hb = IndexPair::new(self.h, self.beta);
        if !hb.in_im(self.m) || !self.d().is_positive() {
            return Err(Error::hypothesis("h3", format!("{hb} must lie in I_m outside N_0")));
        }
        let ja = IndexPair::new(self.j, self.alpha);
        if !ja.in_im(self.m) || self.alpha <= self.mu {
            return Err(Error::hypothesis("h4", format!("{ja} must lie in I_m with alpha > mu")));
        }
        Ok(())
    }

    /// `L(k, n)`.
    pub fn eval_l(&self, k: usize, n: usize) -> Rat {
        let kb = BigInt::from(k);
        let mut v = Rat::from_integer(num_traits::pow(kb.clone(), self.m));
        for (q, e) in &self.l_data {
            v += e * Rat::from_integer(num_traits::pow(kb.clone(), q.j) * falling(n, q.alpha));
        }
        v
    }

    fn beta_factor(&self, n: usize) -> Rat {
        if self.power_variant {
            Rat::from_integer(num_traits::pow(BigInt::from(n), self.beta))
        } else {
            Rat::from_integer(falling(n, self.beta))
        }
    }

    fn d0(&self) -> usize {
        if self.power_variant {
            1
        } else {
            self.m
        }
    }

    pub fn to_spec(&self, trunc: usize) -> EquationSpec {
        let mut spec = EquationSpec::new(self.m, trunc)
            .with_a(UniSeries::monomial(self.a.clone(), self.d0(), trunc));
        for (q, e) in &self.l_data {
            spec.add_linear(*q, Basis::Dx, UniSeries::monomial(-e.clone(), q.alpha, trunc));
        }
        let hb = IndexPair::new(self.h, self.beta);
        if self.power_variant {
            spec.add_linear(hb, Basis::Euler, UniSeries::monomial(self.b.clone(), self.p, trunc));
        } else {
            spec.add_linear(hb, Basis::Dx, UniSeries::monomial(self.b.clone(), self.p + self.beta, trunc));
        }
        spec.add_nonlinear(
            self.q,
            MultiIndex::unit(IndexPair::new(self.j, self.alpha)),
            UniSeries::monomial(self.c.clone(), self.mu, trunc),
        )
        .expect("q >= 1 so the degree is at least 2");
        spec
    }
}

/// One step of the minorant chain: `w_k = Σ_l A_{k,lp+d_k} x^{lp+d_k}` at `t^{kq+1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Rung {
    pub k: usize,
    /// `l_{k-1}`; `None` for `k = 0`.
    pub l_prev: Option<usize>,
    pub d: usize,
    pub kk: Rat,
}

#[derive(Clone, Debug)]
pub struct ModelOracle {
    pub params: ModelParams,
}

impl ModelOracle {
    pub fn new(params: ModelParams) -> Self {
        Self { params }
    }

    /// `A_{k,lp+d}` given `K_k` and `d_k`.
    fn chain_coeff(&self, kk: &Rat, k: usize, d: usize, l: usize) -> Rat {
        let pr = &self.params;
        let lam = k * pr.q + 1;
        let mut v = kk.clone();
        for r in 0..l {
            v *= &pr.b;
            v *= Rat::from_integer(num_traits::pow(BigInt::from(lam), pr.h));
            v *= pr.beta_factor(r * pr.p + d);
        }
        for r in 0..=l {
            v /= pr.eval_l(lam, r * pr.p + d);
        }
        v
    }

    /// Rungs `0..=kmax` with `(l_{k-1}, d_k, K_k)`.
    pub fn rungs(&self, kmax: usize) -> Vec<Rung> {
        let pr = &self.params;
        let target = pr.m + pr.alpha - pr.mu;
        let mut out = vec![Rung { k: 0, l_prev: None, d: pr.d0(), kk: pr.a.clone() }];
        for k in 1..=kmax {
            let prev = out.last().expect("nonempty").clone();
            let l = if prev.d >= target { 0 } else { (target - prev.d).div_ceil(pr.p) };
            let d = l * pr.p + prev.d + pr.mu - pr.alpha;
            let lam = Rat::from_integer(num_traits::pow(BigInt::from((k - 1) * pr.q + 1), pr.j));
            let kk = &pr.c * lam * self.chain_coeff(&prev.kk, k - 1, prev.d, l);
            out.push(Rung { k, l_prev: Some(l), d, kk });
        }
        out
    }

    /// `A_{k,lp+d_k}` for `l ≤ lmax`, indexed `[k][l]`, with the x-exponents.
    pub fn table(&self, kmax: usize, lmax: usize) -> Vec<Vec<(usize, Rat)>> {
        let p = self.params.p;
        self.rungs(kmax)
            .iter()
            .map(|r| (0..=lmax).map(|l| (l * p + r.d, self.chain_coeff(&r.kk, r.k, r.d, l))).collect())
            .collect()
    }

    /// The t-exponent `kq + 1` of rung `k`.
    pub fn t_exponent(&self, k: usize) -> usize {
        k * self.params.q + 1
    }

    /// Exact first row `u₁`.
    pub fn first_row(&self, trunc: usize) -> UniSeries {
        let pr = &self.params;
        let mut row = UniSeries::zero(trunc);
        let a = pr.a.clone();
        let mut l = 0;
        while l * pr.p + pr.d0() <= trunc {
            row.set(l * pr.p + pr.d0(), self.chain_coeff(&a, 0, pr.d0(), l));
            l += 1;
        }
        row
    }

    /// `0 ≤ l_{k-1} ≤ α` and `m ≤ d_k ≤ m+p` for `1 ≤ k ≤ kmax`.
    pub fn ladder_bounds_hold(&self, kmax: usize) -> bool {
        let pr = &self.params;
        self.rungs(kmax).iter().skip(1).all(|r| {
            r.l_prev.is_some_and(|l| l <= pr.alpha) && pr.m <= r.d && r.d <= pr.m + pr.p
        })
    }
}

/// Model fixture; the spec is truncated at `trunc`.
pub fn model_e58(params: &ModelParams, trunc: usize) -> Result<Fixture> {
    params.validate(false)?;
    Ok(build(params, trunc))
}

/// The same family with `C = 0`, where the solution reduces to `u₁(x) t`.
pub fn model_e58_degenerate(params: &ModelParams, trunc: usize) -> Result<Fixture> {
    let params = ModelParams { c: Rat::zero(), ..params.clone() };
    params.validate(true)?;
    let mut f = build(&params, trunc);
    f.name.push_str("-c0");
    f.expected.s0 = Rat::one();
    Ok(f)
}

fn build(params: &ModelParams, trunc: usize) -> Fixture {
    let name = format!(
        "{}(m={},p={},q={},mu={},h={},beta={},j={},alpha={})",
        if params.power_variant { "e58-power" } else { "e58" },
        params.m,
        params.p,
        params.q,
        params.mu,
        params.h,
        params.beta,
        params.j,
        params.alpha
    );
    Fixture {
        name,
        spec: params.to_spec(trunc),
        expected: Expected {
            vertices: None,
            sigma0: params.sigma0_star(),
            s0: params.s0_star(),
            s1: None,
            n_holds: true,
            gp_holds: true,
            r_holds: false,
            provenance: Provenance::Stated,
        },
        oracle: Some(Oracle::Model(Box::new(ModelOracle::new(params.clone())))),
    }
}
