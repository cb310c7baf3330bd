//! Empirical Gevrey orders from coefficient growth.
//!
//! All fits are ordinary least squares in log space. The Stirling main term
//! `log l!` carries the order; a linear term absorbs the radius and a
//! constant absorbs the scale. The first 20% of each window is dropped.

use nalgebra::{DMatrix, DVector};
use num_traits::Zero;
use serde::Serialize;

use crate::fixtures::e62_bound;
use crate::series::rat::{ln_abs, Rat};
use crate::series::BiSeries;

/// Minimum number of nonzero points for any fit.
pub const MIN_POINTS: usize = 8;
/// Fraction of each window dropped at the low end.
pub const BURN_IN: f64 = 0.2;
/// Default radius probe.
pub const DEFAULT_RHO: f64 = 0.5;

fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for i in 1..=n {
        acc += (i as f64).ln();
        out.push(acc);
    }
    out
}

fn burn_start(lo: usize, hi: usize) -> usize {
    lo + ((hi - lo) as f64 * BURN_IN).floor() as usize
}

/// Least squares `y ≈ X β`; returns `β`, the standard errors and the RMS residual.
fn ols(x: &DMatrix<f64>, y: &DVector<f64>) -> Option<(DVector<f64>, DVector<f64>, f64)> {
    let (n, p) = x.shape();
    if n <= p {
        return None;
    }
    let xtx = x.transpose() * x;
    let inv = xtx.try_inverse()?;
    let beta = &inv * x.transpose() * y;
    let res = y - x * &beta;
    let rss = res.norm_squared();
    let s2 = rss / (n - p) as f64;
    let se = DVector::from_iterator(p, (0..p).map(|i| (s2 * inv[(i, i)]).max(0.0).sqrt()));
    Some((beta, se, (rss / n as f64).sqrt()))
}

/// Fit of `log|c_n| ≈ e·g(n) + b·n + c` over a window; `e` is the growth exponent.
#[derive(Clone, Debug, Serialize)]
pub struct Fit {
    pub exponent: f64,
    pub stderr: f64,
    pub window: (usize, usize),
    pub points: usize,
    pub rms_residual: f64,
}

fn fit_points(points: &[(usize, f64, f64)]) -> Option<Fit> {
    fit_points_with(points, false)
}

/// With `log_term`, a `log n` column absorbs polynomial prefactors.
fn fit_points_with(points: &[(usize, f64, f64)], log_term: bool) -> Option<Fit> {
    // (index, regressor g(n), log value)
    if points.len() < MIN_POINTS {
        return None;
    }
    let n = points.len();
    let cols = if log_term { 4 } else { 3 };
    let x = DMatrix::from_fn(n, cols, |r, c| match c {
        0 => points[r].1,
        1 => points[r].0 as f64,
        2 if log_term => (points[r].0 as f64).ln(),
        _ => 1.0,
    });
    let y = DVector::from_iterator(n, points.iter().map(|p| p.2));
    let (beta, se, rms) = ols(&x, &y)?;
    Some(Fit {
        exponent: beta[0],
        stderr: se[0],
        window: (points[0].0, points[n - 1].0),
        points: n,
        rms_residual: rms,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct RowFit {
    pub k: usize,
    pub sigma_hat: f64,
    pub fit: Fit,
}

#[derive(Clone, Debug, Serialize)]
pub struct SigmaFit {
    pub rows: Vec<RowFit>,
    /// Rows with too few nonzero coefficients.
    pub skipped: Vec<usize>,
    pub sigma_hat: Option<f64>,
    pub stderr: Option<f64>,
    /// `max - min` of the per-row estimates.
    pub spread: Option<f64>,
    /// `σ̂ < 1`: the rows look convergent in `x`.
    pub convergent: bool,
}

/// Fit of a single coefficient sequence `c_0, c_1, ...` against `log l!`,
/// with `l` and `log l` as nuisance terms.
pub fn fit_sequence(coeffs: &[Rat]) -> Option<Fit> {
    let hi = coeffs.len().checked_sub(1)?;
    let lo = burn_start(0, hi);
    let lf = ln_factorials(hi);
    let pts: Vec<(usize, f64, f64)> = (lo..=hi)
        .filter(|&l| !coeffs[l].is_zero())
        .map(|l| (l, lf[l], ln_abs(&coeffs[l])))
        .collect();
    fit_points_with(&pts, true)
}

/// Per-row fit of `log|u_{k,l}| ≈ (σ-1) log l! + b l + c log l + d`.
pub fn fit_sigma(u: &BiSeries, k_rows: &[usize]) -> SigmaFit {
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for &k in k_rows {
        if k > u.trunc_t() {
            skipped.push(k);
            continue;
        }
        match fit_sequence(u.row(k).coeffs()) {
            Some(fit) => rows.push(RowFit { k, sigma_hat: 1.0 + fit.exponent, fit }),
            None => skipped.push(k),
        }
    }
    let (sigma_hat, stderr, spread) = if rows.is_empty() {
        (None, None, None)
    } else {
        let n = rows.len() as f64;
        let mean = rows.iter().map(|r| r.sigma_hat).sum::<f64>() / n;
        let se = (rows.iter().map(|r| r.fit.stderr.powi(2)).sum::<f64>()).sqrt() / n;
        let max = rows.iter().map(|r| r.sigma_hat).fold(f64::MIN, f64::max);
        let min = rows.iter().map(|r| r.sigma_hat).fold(f64::MAX, f64::min);
        (Some(mean), Some(se), Some(max - min))
    };
    SigmaFit {
        convergent: sigma_hat.is_some_and(|s| s < 1.0),
        rows,
        skipped,
        sigma_hat,
        stderr,
        spread,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SMode {
    /// `M_k = max_l |u_{k,l}| ρ^l / l!^{σ-1}`, fitted against `log k!`.
    NormalizedRows,
    /// Each column `l` fitted against `log k!`; estimates averaged.
    Columns,
}

#[derive(Clone, Debug, Serialize)]
pub struct SFit {
    pub mode: SMode,
    pub s_hat: Option<f64>,
    pub stderr: Option<f64>,
    pub fits: Vec<Fit>,
}

/// Growth in `t` after removing the `x`-direction order `sigma`.
pub fn fit_s(u: &BiSeries, sigma: f64, rho: f64, mode: SMode) -> SFit {
    let kt = u.trunc_t();
    let lf_x = ln_factorials(u.trunc_x());
    let lf_t = ln_factorials(kt);
    let fits: Vec<Fit> = match mode {
        SMode::NormalizedRows => {
            let lo = burn_start(1, kt);
            let pts: Vec<(usize, f64, f64)> = (lo..=kt)
                .filter_map(|k| {
                    u.row(k)
                        .coeffs()
                        .iter()
                        .enumerate()
                        .filter(|(_, c)| !c.is_zero())
                        .map(|(l, c)| ln_abs(c) + l as f64 * rho.ln() - (sigma - 1.0) * lf_x[l])
                        .reduce(f64::max)
                        .map(|m| (k, lf_t[k], m))
                })
                .collect();
            fit_points(&pts).into_iter().collect()
        }
        SMode::Columns => {
            let lmax = u.row_truncs().into_iter().min().unwrap_or(0);
            let lo = burn_start(1, kt);
            (0..=lmax)
                .filter_map(|l| {
                    let pts: Vec<(usize, f64, f64)> = (lo..=kt)
                        .filter_map(|k| u.get(k, l).filter(|c| !c.is_zero()).map(|c| (k, lf_t[k], ln_abs(c))))
                        .collect();
                    fit_points(&pts)
                })
                .collect()
        }
    };
    if fits.is_empty() {
        return SFit { mode, s_hat: None, stderr: None, fits };
    }
    let n = fits.len() as f64;
    let s_hat = 1.0 + fits.iter().map(|f| f.exponent).sum::<f64>() / n;
    let se = fits.iter().map(|f| f.stderr.powi(2)).sum::<f64>().sqrt() / n;
    SFit { mode, s_hat: Some(s_hat), stderr: Some(se), fits }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Consistent,
    Inconsistent,
    Inconclusive,
}

/// Threshold on the superexponential growth exponent `γ`.
pub const GROWTH_TOL: f64 = 0.05;

/// Superexponential excess in one direction, `γ̂` with its standard error.
#[derive(Clone, Debug, Serialize)]
pub struct Growth {
    pub growth: f64,
    pub stderr: f64,
    pub window: (usize, usize),
    pub points: usize,
}

impl Growth {
    fn from_fit(f: &Fit) -> Self {
        Growth { growth: f.exponent, stderr: f.stderr, window: f.window, points: f.points }
    }

    fn lower(&self) -> f64 {
        self.growth - 2.0 * self.stderr
    }

    fn upper(&self) -> f64 {
        self.growth + 2.0 * self.stderr
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Membership {
    pub verdict: Verdict,
    /// `γ̂` of the deciding direction (the larger lower bound).
    pub growth: f64,
    pub stderr: f64,
    /// Distance of the 2σ interval from the threshold, positive when decisive.
    pub margin: f64,
    /// Pooled excess over `l!^{σ-1}` in the lowest rows; `None` when no row is long enough.
    pub x_growth: Option<Growth>,
    /// Excess of `M_k = max_l |u_{k,l}| ρ^l / l!^{σ-1}` over `k!^{s-1}`;
    /// `None` when there are too few rows.
    pub t_growth: Option<Growth>,
}

/// Rows entering the within-row test. Higher rows carry polynomial prefactors
/// of growing degree whose pre-asymptotic curvature biases `γ̂` upward.
pub const X_PROBE_ROWS: usize = 2;

/// Fits over the lowest `X_PROBE_ROWS` usable rows sharing one `l log l`
/// coefficient, each row with its own `l`, `log l` and constant terms.
fn pooled_row_growth(u: &BiSeries, sigma: f64) -> Option<Fit> {
    let lf = ln_factorials(u.rows().iter().map(|r| r.trunc()).max().unwrap_or(0));
    let mut blocks: Vec<Vec<(usize, f64)>> = Vec::new();
    for k in 1..=u.trunc_t() {
        let row = u.row(k);
        let lo = burn_start(0, row.trunc()).max(1);
        let pts: Vec<(usize, f64)> = (lo..=row.trunc())
            .filter(|&l| !row.coeff(l).is_zero())
            .map(|l| (l, ln_abs(row.coeff(l)) - (sigma - 1.0) * lf[l]))
            .collect();
        if pts.len() >= MIN_POINTS {
            blocks.push(pts);
            if blocks.len() == X_PROBE_ROWS {
                break;
            }
        }
    }
    let n: usize = blocks.iter().map(Vec::len).sum();
    let p = 1 + 3 * blocks.len();
    if blocks.is_empty() || n <= p {
        return None;
    }
    let mut x = DMatrix::zeros(n, p);
    let mut y = DVector::zeros(n);
    let mut r = 0;
    for (b, pts) in blocks.iter().enumerate() {
        for &(l, v) in pts {
            let lf64 = l as f64;
            x[(r, 0)] = lf64 * lf64.ln();
            x[(r, 1 + 3 * b)] = lf64;
            x[(r, 2 + 3 * b)] = lf64.ln();
            x[(r, 3 + 3 * b)] = 1.0;
            y[r] = v;
            r += 1;
        }
    }
    let (beta, se, rms) = ols(&x, &y)?;
    let lo = blocks.iter().map(|b| b[0].0).min().unwrap_or(0);
    let hi = blocks.iter().map(|b| b[b.len() - 1].0).max().unwrap_or(0);
    Some(Fit { exponent: beta[0], stderr: se[0], window: (lo, hi), points: n, rms_residual: rms })
}

/// Fit of `log M_k - (s-1) log k!` against `k log k`.
fn row_sup_growth(u: &BiSeries, s: f64, sigma: f64, rho: f64) -> Option<Fit> {
    let kt = u.trunc_t();
    let lmax = u.rows().iter().skip(1).map(|r| r.trunc()).min()?;
    let lf = ln_factorials(lmax.max(kt));
    let sup: Vec<(usize, f64)> = (1..=kt)
        .filter_map(|k| {
            (0..=lmax)
                .filter_map(|l| {
                    let c = u.get(k, l)?;
                    (!c.is_zero()).then(|| ln_abs(c) + l as f64 * rho.ln() - (sigma - 1.0) * lf[l])
                })
                .reduce(f64::max)
                .map(|m| (k, m - (s - 1.0) * lf[k]))
        })
        .collect();
    let first = sup.first()?.0;
    let lo = burn_start(first, kt);
    let pts: Vec<(usize, f64, f64)> = sup
        .iter()
        .filter(|(k, _)| *k >= lo)
        .map(|&(k, v)| (k, k as f64 * (k as f64).ln(), v))
        .collect();
    fit_points_with(&pts, true)
}

/// Membership proxy for `u ∈ G_{(s,σ)}` with radius probe `ρ`.
///
/// Two directions are tested separately. Within rows, the pooled excess of
/// `log|u_{k,l}|` over `(σ-1) log l!`; across rows, the excess of the row
/// suprema over `(s-1) log k!`. Polynomial and geometric factors are nuisance
/// terms in both fits.
pub fn membership_test(u: &BiSeries, s: &Rat, sigma: &Rat, rho: f64) -> Membership {
    let (s, sigma) = (crate::series::rat::to_f64(s), crate::series::rat::to_f64(sigma));
    if u.is_zero() {
        return Membership {
            verdict: Verdict::Consistent,
            growth: 0.0,
            stderr: 0.0,
            margin: f64::INFINITY,
            x_growth: None,
            t_growth: None,
        };
    }
    let x_growth = pooled_row_growth(u, sigma).map(|f| Growth::from_fit(&f));
    let t_growth = row_sup_growth(u, s, sigma, rho).map(|f| Growth::from_fit(&f));
    let measured: Vec<&Growth> = x_growth.iter().chain(t_growth.iter()).collect();
    let worst = measured.iter().copied().max_by(|a, b| a.lower().total_cmp(&b.lower()));
    let (verdict, margin) = match worst {
        Some(w) if w.lower() > GROWTH_TOL => (Verdict::Inconsistent, w.lower() - GROWTH_TOL),
        _ if measured.len() == 2 && measured.iter().all(|g| g.upper() <= GROWTH_TOL) => {
            let m = measured.iter().map(|g| GROWTH_TOL - g.upper()).fold(f64::INFINITY, f64::min);
            (Verdict::Consistent, m)
        }
        _ => (Verdict::Inconclusive, 0.0),
    };
    let (growth, stderr) = worst.map_or((f64::NAN, f64::NAN), |w| (w.growth, w.stderr));
    Membership { verdict, growth, stderr, margin, x_growth, t_growth }
}

#[derive(Clone, Debug, Serialize)]
pub struct GridPoint {
    pub s: String,
    pub sigma: String,
    pub membership: Membership,
}

/// `membership_test` over `(s0 + i·ds, σ0 + j·dσ)` for `|i|, |j| ≤ steps`, dropping points below 1.
pub fn membership_grid(u: &BiSeries, s0: &Rat, sigma0: &Rat, ds: &Rat, dsigma: &Rat, steps: i64, rho: f64) -> Vec<GridPoint> {
    let one = Rat::from_integer(1.into());
    let mut out = Vec::new();
    for i in -steps..=steps {
        for j in -steps..=steps {
            let s = s0 + ds * Rat::from_integer(i.into());
            let sg = sigma0 + dsigma * Rat::from_integer(j.into());
            if s < one || sg < one {
                continue;
            }
            out.push(GridPoint {
                s: crate::series::rat::fmt_rat(&s),
                sigma: crate::series::rat::fmt_rat(&sg),
                membership: membership_test(u, &s, &sg, rho),
            });
        }
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundCheck {
    /// `(k, passed)` for `k = 0..=k_max`.
    pub per_k: Vec<(usize, bool)>,
    pub witness: Option<(usize, usize)>,
}

impl BoundCheck {
    pub fn passed(&self) -> bool {
        self.witness.is_none()
    }
}

/// `u_{k,l}/l! ≤ 2^{k-1} binom(l+2k-2, l)` on every trusted `(k,l)`, exactly.
pub fn verify_bound_e64(u: &BiSeries, k_max: usize) -> BoundCheck {
    let mut per_k = Vec::new();
    let mut witness = None;
    for k in 0..=k_max.min(u.trunc_t()) {
        let row = u.row(k);
        let bad = if k == 0 {
            row.coeffs().iter().position(|c| !c.is_zero())
        } else {
            (0..=row.trunc()).find(|&l| {
                let lhs = row.coeff(l) / Rat::from_integer(crate::series::rat::factorial(l));
                lhs > e62_bound(k, l)
            })
        };
        per_k.push((k, bad.is_none()));
        if witness.is_none() {
            witness = bad.map(|l| (k, l));
        }
    }
    BoundCheck { per_k, witness }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::rat::{factorial, int, rat};
    use crate::series::UniSeries;

    fn planted(kt: usize, lx: usize, a: i64, b: i64, r: Rat) -> BiSeries {
        BiSeries::from_fn(kt, lx, |k, l| {
            if k == 0 {
                return Rat::zero();
            }
            let mut v = Rat::from_integer(num_traits::pow(factorial(k), a as usize) * num_traits::pow(factorial(l), b as usize));
            for _ in 0..k + l {
                v *= &r;
            }
            v
        })
    }

    #[test]
    fn planted_recovery() {
        let u = planted(40, 40, 1, 2, rat(1, 3));
        let sf = fit_sigma(&u, &[1, 5, 10]);
        assert!((sf.sigma_hat.unwrap() - 3.0).abs() < 0.05, "{sf:?}");
        let s = fit_s(&u, 3.0, DEFAULT_RHO, SMode::NormalizedRows);
        assert!((s.s_hat.unwrap() - 2.0).abs() < 0.05, "{s:?}");
        let s = fit_s(&u, 3.0, DEFAULT_RHO, SMode::Columns);
        assert!((s.s_hat.unwrap() - 2.0).abs() < 0.05, "{s:?}");
    }

    #[test]
    fn factorial_row_sigma_two() {
        let row = UniSeries::from_fn(80, |l| if l == 0 { Rat::zero() } else { Rat::from_integer(factorial(l - 1)) });
        let f = fit_sequence(row.coeffs()).unwrap();
        assert!((1.0 + f.exponent - 2.0).abs() < 0.1, "{f:?}");
    }

    #[test]
    fn polynomial_row_skipped_and_convergent_flag() {
        let u = BiSeries::from_rows(vec![
            UniSeries::zero(40),
            UniSeries::from_ints(&[1, 2, 3]).truncate(40),
            UniSeries::from_fn(40, |l| Rat::new(1.into(), factorial(l))),
        ]);
        let sf = fit_sigma(&u, &[1, 2]);
        assert_eq!(sf.skipped, vec![1]);
        assert!(sf.convergent);
        assert!(sf.sigma_hat.unwrap().abs() < 0.05);
    }

    #[test]
    fn t_factorial_gives_s_two() {
        let u = BiSeries::from_fn(40, 0, |k, _| if k == 0 { Rat::zero() } else { Rat::from_integer(factorial(k)) });
        let s = fit_s(&u, 1.0, DEFAULT_RHO, SMode::NormalizedRows);
        assert!((s.s_hat.unwrap() - 2.0).abs() < 0.05);
    }

    #[test]
    fn membership_basics() {
        let z = BiSeries::zero(5, 5);
        assert_eq!(membership_test(&z, &int(1), &int(1), 0.5).verdict, Verdict::Consistent);
        let u = planted(10, 60, 0, 1, int(1));
        assert_eq!(membership_test(&u, &int(1), &int(2), 0.5).verdict, Verdict::Consistent);
        let m = membership_test(&u, &int(1), &rat(3, 2), 0.5);
        assert_eq!(m.verdict, Verdict::Inconsistent);
        assert!(m.margin > 0.0);
    }

    #[test]
    fn model_membership_at_and_below_the_index() {
        use crate::equation::normalize;
        use crate::fixtures::{model_e58, ModelSetting};
        use crate::solver::solve_formal;
        let f = model_e58(&ModelSetting::A.params(), 70).unwrap();
        let norm = normalize(&f.spec).unwrap();
        let u = solve_formal(&norm, 14, 50).unwrap();
        assert_eq!(membership_test(&u, &int(2), &int(2), 0.5).verdict, Verdict::Consistent);
        let m = membership_test(&u, &rat(3, 2), &int(2), 0.5);
        assert_eq!(m.verdict, Verdict::Inconsistent, "{m:?}");
        assert!(m.t_growth.unwrap().growth > 0.2);
        let short = solve_formal(&norm, 6, 50).unwrap();
        let m = membership_test(&short, &int(2), &int(2), 0.5);
        assert_eq!(m.verdict, Verdict::Inconclusive);
        assert!(m.t_growth.is_none());
    }

    #[test]
    fn bound_check_detects_violation() {
        let mut u = BiSeries::zero(2, 5);
        let mut row = UniSeries::zero(5);
        row.set(3, int(1000));
        u.set_row(2, row);
        let b = verify_bound_e64(&u, 2);
        assert_eq!(b.witness, Some((2, 3)));
        assert_eq!(verify_bound_e64(&BiSeries::zero(3, 5), 3).witness, None);
    }
}
