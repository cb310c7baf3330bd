//! Characteristic polynomials on the polygon edges and the (GP) test.
//!
//! Roots are located numerically for the report. The verdict itself is exact:
//! a Sturm count on `[0, ∞)` for the finite edges and a rational-root search
//! over `ℕ*` for the last edge.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use super::polygon::NewtonPolygon;
use crate::equation::NormalizedEquation;
use crate::series::rat::{fmt_rat, to_f64, Rat};

/// A root with an error radius from the Newton–Kantorovich style estimate.
#[derive(Clone, Debug, Serialize)]
pub struct Root {
    pub re: f64,
    pub im: f64,
    pub radius: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CharPoly {
    pub edge: usize,
    /// Coefficients of `X^0, X^1, ...`.
    #[serde(serialize_with = "ser_rats")]
    pub coeffs: Vec<Rat>,
    pub roots: Vec<Root>,
}

fn ser_rats<S: serde::Serializer>(v: &[Rat], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(fmt_rat))
}

impl CharPoly {
    pub fn degree(&self) -> usize {
        self.coeffs.iter().rposition(|c| !c.is_zero()).unwrap_or(0)
    }
}

/// `P_i` for edge `i ∈ 1..=p`.
pub fn char_poly(norm: &NormalizedEquation, poly: &NewtonPolygon, i: usize) -> CharPoly {
    let p = poly.p();
    assert!((1..=p).contains(&i), "edge {i} out of range 1..={p}");
    let coeffs = if i < p {
        let lo = poly.vertices[i].0;
        let mut c = vec![Rat::zero(); poly.vertices[i - 1].0 - lo + 1];
        for q in &norm.lambda0 {
            if poly.edges_through(*q).contains(&i) {
                c[q.j - lo] += norm.c0(*q);
            }
        }
        c
    } else {
        let mp = poly.vertices[p - 1].0;
        if mp == 0 {
            vec![Rat::one()]
        } else {
            let mut c = vec![Rat::zero(); mp + 1];
            for q in &norm.lambda0 {
                if poly.edges_through(*q).contains(&p) {
                    c[q.j] += norm.c0(*q);
                }
            }
            c
        }
    };
    let roots = find_roots(&coeffs);
    CharPoly { edge: i, coeffs, roots }
}

fn horner(c: &[f64], z: Complex64) -> (Complex64, Complex64, f64) {
    // value, derivative, and Σ|a_i||z|^i for the rounding bound
    let mut v = Complex64::zero();
    let mut d = Complex64::zero();
    let mut mag = 0.0;
    let az = z.norm();
    for a in c.iter().rev() {
        d = d * z + v;
        v = v * z + a;
        mag = mag * az + a.abs();
    }
    (v, d, mag)
}

/// Simultaneous Aberth iteration, used when the Schur iteration stalls.
fn aberth(c: &[f64]) -> Vec<Complex64> {
    let deg = c.len() - 1;
    let lead = c[deg];
    let radius = 1.0 + c[..deg].iter().map(|a| (a / lead).abs()).fold(0.0, f64::max);
    let mut z: Vec<Complex64> = (0..deg)
        .map(|k| Complex64::from_polar(radius * 0.5, 0.4 + std::f64::consts::TAU * k as f64 / deg as f64))
        .collect();
    for _ in 0..500 {
        let mut moved = 0.0f64;
        for k in 0..deg {
            let (v, d, _) = horner(c, z[k]);
            if v.norm() == 0.0 {
                continue;
            }
            let ratio = v / d;
            let repel: Complex64 = (0..deg).filter(|&i| i != k).map(|i| (z[k] - z[i]).inv()).sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repel);
            z[k] -= step;
            moved = moved.max(step.norm() / (1.0 + z[k].norm()));
        }
        if moved < 1e-15 {
            break;
        }
    }
    z
}

/// Companion-matrix eigenvalues, one Newton step, and an error radius each.
pub fn find_roots(coeffs: &[Rat]) -> Vec<Root> {
    let deg = coeffs.iter().rposition(|c| !c.is_zero()).unwrap_or(0);
    if deg == 0 {
        return Vec::new();
    }
    let c: Vec<f64> = coeffs[..=deg].iter().map(to_f64).collect();
    let lead = c[deg];
    let mut comp = DMatrix::<f64>::zeros(deg, deg);
    for r in 1..deg {
        comp[(r, r - 1)] = 1.0;
    }
    for r in 0..deg {
        comp[(r, deg - 1)] = -c[r] / lead;
    }
    let eig = match comp.try_schur(f64::EPSILON, 2000) {
        Some(schur) => schur.complex_eigenvalues().iter().copied().collect(),
        None => aberth(&c),
    };
    let n = deg as f64;
    let u = f64::EPSILON / 2.0;
    let gamma = 2.0 * n * u / (1.0 - 2.0 * n * u);
    eig.into_iter()
        .map(|z0| {
            let (v, d, _) = horner(&c, z0);
            let z = if d.norm() > 0.0 { z0 - v / d } else { z0 };
            let (v, d, mag) = horner(&c, z);
            let radius = if d.norm() > 0.0 {
                n * (v.norm() + gamma * mag) / d.norm()
            } else {
                f64::INFINITY
            };
            Root { re: z.re, im: z.im, radius }
        })
        .collect()
}

/// How a (GP) verdict relates to the floating-point root picture.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GpVerdict {
    Holds,
    /// A root of `P_edge` lies in the forbidden set.
    Fails { edge: usize, root: String },
}

#[derive(Clone, Debug, Serialize)]
pub struct GpReport {
    pub verdict: GpVerdict,
    pub polys: Vec<CharPoly>,
    /// Edges whose float roots came within 10 error radii of the forbidden set.
    pub borderline_edges: Vec<usize>,
}

impl GpReport {
    pub fn holds(&self) -> bool {
        self.verdict == GpVerdict::Holds
    }
}

fn trim(p: &[Rat]) -> Vec<Rat> {
    let end = p.iter().rposition(|c| !c.is_zero()).map_or(0, |i| i + 1);
    p[..end].to_vec()
}

fn poly_rem(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    let mut r = trim(a);
    let b = trim(b);
    let db = b.len() - 1;
    while r.len() > db && !r.is_empty() {
        let shift = r.len() - 1 - db;
        let f = r.last().expect("nonempty") / b.last().expect("nonempty");
        for (i, bc) in b.iter().enumerate() {
            r[i + shift] -= &f * bc;
        }
        r = trim(&r);
    }
    r
}

fn eval(p: &[Rat], x: &Rat) -> Rat {
    p.iter().rev().fold(Rat::zero(), |acc, c| acc * x + c)
}

fn derivative(p: &[Rat]) -> Vec<Rat> {
    p.iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c * Rat::from_integer(BigInt::from(i)))
        .collect()
}

fn sign_changes(signs: impl Iterator<Item = i8>) -> usize {
    let mut last = 0i8;
    let mut n = 0;
    for s in signs.filter(|&s| s != 0) {
        if last != 0 && s != last {
            n += 1;
        }
        last = s;
    }
    n
}

fn sgn(r: &Rat) -> i8 {
    if r.is_positive() {
        1
    } else if r.is_negative() {
        -1
    } else {
        0
    }
}

/// Number of distinct real roots in `(0, ∞)` by Sturm's theorem.
pub fn positive_real_roots(p: &[Rat]) -> usize {
    let p = trim(p);
    if p.len() <= 1 {
        return 0;
    }
    let mut seq = vec![p.clone(), derivative(&p)];
    while trim(seq.last().expect("nonempty")).len() > 1 {
        let n = seq.len();
        let r = poly_rem(&seq[n - 2], &seq[n - 1]);
        if r.is_empty() {
            break;
        }
        seq.push(r.into_iter().map(|c| -c).collect());
    }
    let seq: Vec<Vec<Rat>> = seq.into_iter().map(|s| trim(&s)).filter(|s| !s.is_empty()).collect();
    // at 0+: sign of the lowest nonzero coefficient; at ∞: sign of the leading one
    let at_zero = sign_changes(seq.iter().map(|s| {
        let v = &s[0];
        if !v.is_zero() {
            sgn(v)
        } else {
            s.iter().find(|c| !c.is_zero()).map_or(0, sgn)
        }
    }));
    let at_inf = sign_changes(seq.iter().map(|s| sgn(s.last().expect("nonempty"))));
    at_zero.saturating_sub(at_inf)
}

/// Positive integer roots of `p`, by testing every candidate below the Cauchy bound.
pub fn positive_integer_roots(p: &[Rat]) -> Vec<u64> {
    let p = trim(p);
    if p.len() <= 1 {
        return Vec::new();
    }
    let lead = p.last().expect("nonempty").abs();
    let bound = p[..p.len() - 1]
        .iter()
        .map(|c| c.abs() / &lead)
        .fold(Rat::zero(), |a, b| if b > a { b } else { a })
        + Rat::one();
    let top = bound.ceil().to_integer().to_u64().unwrap_or(u64::MAX).min(1 << 20);
    (1..=top)
        .filter(|&n| eval(&p, &Rat::from_integer(BigInt::from(n))).is_zero())
        .collect()
}

fn float_borderline(cp: &CharPoly, last: bool) -> bool {
    cp.roots.iter().any(|r| {
        let dist = if last {
            let n = r.re.round().max(1.0);
            ((r.re - n).powi(2) + r.im.powi(2)).sqrt()
        } else if r.re >= 0.0 {
            r.im.abs()
        } else {
            (r.re * r.re + r.im * r.im).sqrt()
        };
        dist.is_nan() || dist <= 10.0 * r.radius
    })
}

pub fn check_gp(norm: &NormalizedEquation, poly: &NewtonPolygon) -> GpReport {
    let p = poly.p();
    let polys: Vec<CharPoly> = (1..=p).map(|i| char_poly(norm, poly, i)).collect();
    let mut verdict = GpVerdict::Holds;
    let mut borderline_edges = Vec::new();
    for cp in &polys {
        let last = cp.edge == p;
        if float_borderline(cp, last) {
            borderline_edges.push(cp.edge);
        }
        if verdict != GpVerdict::Holds {
            continue;
        }
        if last {
            if let Some(n) = positive_integer_roots(&cp.coeffs).first() {
                verdict = GpVerdict::Fails { edge: cp.edge, root: n.to_string() };
            }
        } else {
            let at_zero = cp.coeffs.first().is_some_and(Zero::is_zero);
            if at_zero {
                verdict = GpVerdict::Fails { edge: cp.edge, root: "0".into() };
            } else if positive_real_roots(&cp.coeffs) > 0 {
                let r = cp
                    .roots
                    .iter()
                    .filter(|r| r.re >= 0.0)
                    .min_by(|a, b| a.im.abs().total_cmp(&b.im.abs()))
                    .map(|r| format!("{:.6}", r.re))
                    .unwrap_or_else(|| "positive real".into());
                verdict = GpVerdict::Fails { edge: cp.edge, root: r };
            }
        }
    }
    GpReport { verdict, polys, borderline_edges }
}

/// Coefficients as strings, lowest degree first.
pub fn coeff_strings(cp: &CharPoly) -> Vec<String> {
    cp.coeffs.iter().map(fmt_rat).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::build_polygon;
    use crate::equation::{normalize, Basis, EquationSpec, IndexPair};
    use crate::series::rat::{int, rat};
    use crate::series::UniSeries;

    fn e27() -> NormalizedEquation {
        let mut s = EquationSpec::new(4, 8);
        s.add_linear(IndexPair::new(0, 2), Basis::Euler, UniSeries::constant(int(-1), 8));
        s.add_linear(IndexPair::new(2, 2), Basis::Euler, UniSeries::monomial(int(1), 1, 8));
        normalize(&s).unwrap()
    }

    #[test]
    fn e27_poincare() {
        let n = e27();
        let poly = build_polygon(&n.lambda0, 4);
        let p1 = char_poly(&n, &poly, 1);
        assert_eq!(p1.coeffs, vec![int(-1), int(0), int(0), int(0), int(-1)]);
        assert_eq!(p1.roots.len(), 4);
        for r in &p1.roots {
            assert!((r.re.abs() - 0.5f64.sqrt()).abs() < 1e-12);
            assert!(r.radius < 1e-12);
        }
        let p2 = char_poly(&n, &poly, 2);
        assert_eq!(p2.coeffs, vec![int(1)]);
        let rep = check_gp(&n, &poly);
        assert!(rep.holds());
        assert!(rep.borderline_edges.is_empty());
    }

    #[test]
    fn last_edge_integer_root_fails() {
        // L(λ,ρ) = λ - 2: P_1(X) = -X + 2
        let mut s = EquationSpec::new(1, 4);
        s.add_linear(IndexPair::new(0, 0), Basis::Dx, UniSeries::constant(int(2), 4));
        let n = normalize(&s).unwrap();
        let poly = build_polygon(&n.lambda0, 1);
        assert_eq!(poly.p(), 1);
        let rep = check_gp(&n, &poly);
        assert_eq!(rep.verdict, GpVerdict::Fails { edge: 1, root: "2".into() });
        assert_eq!(rep.borderline_edges, vec![1]);
    }

    #[test]
    fn single_vertex_holds() {
        let s = EquationSpec::new(3, 4);
        let n = normalize(&s).unwrap();
        let poly = build_polygon(&n.lambda0, 3);
        let rep = check_gp(&n, &poly);
        assert!(rep.holds());
        assert_eq!(rep.polys[0].coeffs, vec![int(0), int(0), int(0), int(-1)]);
    }

    #[test]
    fn finite_edge_positive_root_fails() {
        // edge from (2,0) to (0,1) with c_{0,1}(0) = 1: P_1 = -X^2 + 1, root 1
        let mut s = EquationSpec::new(2, 4);
        s.add_linear(IndexPair::new(0, 1), Basis::Dx, UniSeries::monomial(int(1), 1, 4));
        let n = normalize(&s).unwrap();
        let poly = build_polygon(&n.lambda0, 2);
        let rep = check_gp(&n, &poly);
        assert!(matches!(rep.verdict, GpVerdict::Fails { edge: 1, .. }));
    }

    #[test]
    fn sturm_counts() {
        // (X-1)(X-2)(X+3)
        let p = vec![int(6), int(-7), int(0), int(1)];
        assert_eq!(positive_real_roots(&p), 2);
        assert_eq!(positive_integer_roots(&p), vec![1, 2]);
        // X^2 + 1
        assert_eq!(positive_real_roots(&[int(1), int(0), int(1)]), 0);
        // X - 1/2
        assert_eq!(positive_real_roots(&[rat(-1, 2), int(1)]), 1);
        assert!(positive_integer_roots(&[rat(-1, 2), int(1)]).is_empty());
    }
}
