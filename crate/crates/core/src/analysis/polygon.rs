use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::equation::IndexPair;
use crate::error::{Error, Result};
use crate::series::rat::{fmt_rat, Rat};

/// Newton polygon at `x = 0`: the convex hull of the quadrants
/// `{x ≤ j, y ≤ α}` over `Λ₀`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NewtonPolygon {
    /// `(m_i, n_i)`, starting at `(m, 0)`, `m_i` decreasing, `n_i` increasing.
    pub vertices: Vec<(usize, usize)>,
    /// `s_i` for the finite edges `i = 1 ..= p-1`, strictly decreasing.
    pub slopes: Vec<Rat>,
}

fn r(n: usize) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Upper concave chain from `(m, 0)` over the points of `Λ₀`.
pub fn build_polygon(lambda0: &BTreeSet<IndexPair>, m: usize) -> NewtonPolygon {
    let mut vertices = vec![(m, 0usize)];
    let mut slopes = Vec::new();
    loop {
        let (mi, ni) = *vertices.last().expect("nonempty");
        let mut best: Option<(Rat, usize, usize)> = None;
        for q in lambda0 {
            if q.alpha <= ni || q.j >= mi {
                continue;
            }
            let s = Rat::new((q.alpha - ni).into(), (mi - q.j).into());
            let better = match &best {
                None => true,
                // ties go to the farther point so collinear points stay on the edge
                Some((bs, bj, _)) => s > *bs || (s == *bs && q.j < *bj),
            };
            if better {
                best = Some((s, q.j, q.alpha));
            }
        }
        match best {
            Some((s, j, a)) => {
                slopes.push(s);
                vertices.push((j, a));
            }
            None => break,
        }
    }
    NewtonPolygon { vertices, slopes }
}

impl NewtonPolygon {
    pub fn m(&self) -> usize {
        self.vertices[0].0
    }

    /// Number of vertices `p`.
    pub fn p(&self) -> usize {
        self.vertices.len()
    }

    /// `s_i` with `s_0 = ∞` (`None`) and `s_p = 0`.
    pub fn slope(&self, i: usize) -> Option<Rat> {
        match i {
            0 => None,
            i if i >= self.p() => Some(Rat::zero()),
            i => Some(self.slopes[i - 1].clone()),
        }
    }

    /// Height of the boundary above abscissa `j ≤ m`.
    pub fn height(&self, j: usize) -> Result<Rat> {
        if j > self.m() {
            return Err(Error::Domain(format!("abscissa {j} exceeds m = {}", self.m())));
        }
        let (mp, np) = *self.vertices.last().expect("nonempty");
        if j <= mp {
            return Ok(r(np));
        }
        for (i, w) in self.vertices.windows(2).enumerate() {
            let ((mi, ni), (mn, _)) = (w[0], w[1]);
            if mn <= j && j <= mi {
                return Ok(r(ni) + &self.slopes[i] * r(mi - j));
            }
        }
        unreachable!("abscissa {j} not covered by the polygon")
    }

    /// `d_{j,α} = α - height(j)`; `≤ 0` exactly on `N₀`.
    pub fn distance_d(&self, point: IndexPair) -> Result<Rat> {
        Ok(r(point.alpha) - self.height(point.j)?)
    }

    pub fn contains(&self, point: IndexPair) -> bool {
        self.distance_d(point).map(|d| d <= Rat::zero()).unwrap_or(false)
    }

    /// Edge index `1 ..= p` of the boundary pieces through `point`: finite
    /// edges `Γ_i` (`i < p`) and the horizontal ray `Γ_p`.
    pub fn edges_through(&self, point: IndexPair) -> Vec<usize> {
        let mut out = Vec::new();
        if !matches!(self.distance_d(point), Ok(d) if d.is_zero()) {
            return out;
        }
        for (i, w) in self.vertices.windows(2).enumerate() {
            if w[1].0 <= point.j && point.j <= w[0].0 {
                out.push(i + 1);
            }
        }
        let (mp, np) = *self.vertices.last().expect("nonempty");
        if point.j <= mp && point.alpha == np {
            out.push(self.p());
        }
        out
    }

    /// `φ(k,l) = Σ k^{m_i} l^{n_i}`.
    pub fn phi(&self, k: usize, l: usize) -> BigInt {
        let (kb, lb) = (BigInt::from(k), BigInt::from(l));
        self.vertices
            .iter()
            .map(|&(mi, ni)| num_traits::pow(kb.clone(), mi) * num_traits::pow(lb.clone(), ni))
            .sum()
    }

    pub fn phi_rat(&self, k: usize, l: usize) -> Rat {
        Rat::from_integer(self.phi(k, l))
    }

    /// `ln φ(k,l)` in floating point.
    pub fn ln_phi(&self, k: usize, l: usize) -> f64 {
        let terms: Vec<f64> = self
            .vertices
            .iter()
            .map(|&(mi, ni)| {
                if ni > 0 && l == 0 {
                    f64::NEG_INFINITY
                } else {
                    mi as f64 * (k as f64).ln() + ni as f64 * (l.max(1) as f64).ln()
                }
            })
            .collect();
        let mx = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        mx + terms.iter().map(|t| (t - mx).exp()).sum::<f64>().ln()
    }

    pub fn vertex_strings(&self) -> Vec<[usize; 2]> {
        self.vertices.iter().map(|&(a, b)| [a, b]).collect()
    }

    pub fn slope_strings(&self) -> Vec<String> {
        self.slopes.iter().map(fmt_rat).collect()
    }
}

/// Serializable view of a polygon.
#[derive(Clone, Debug, Serialize)]
pub struct PolygonReport {
    pub vertices: Vec<[usize; 2]>,
    pub slopes: Vec<String>,
}

impl From<&NewtonPolygon> for PolygonReport {
    fn from(p: &NewtonPolygon) -> Self {
        Self {
            vertices: p.vertex_strings(),
            slopes: p.slope_strings(),
        }
    }
}

/// `q ∈ N₀(S)` decided from pairs of points of `S` (hull oracle).
pub fn in_hull_oracle(points: &[IndexPair], q: (Rat, Rat)) -> bool {
    // some convex combination of at most two points dominates q
    let one = Rat::one();
    for a in points {
        for b in points {
            // t·a + (1-t)·b ≥ q in both coordinates, t ∈ [0,1]
            let mut lo = Rat::zero();
            let mut hi = one.clone();
            let mut ok = true;
            for (ca, cb, cq) in [(r(a.j), r(b.j), q.0.clone()), (r(a.alpha), r(b.alpha), q.1.clone())] {
                // t(ca - cb) ≥ cq - cb
                let coef = &ca - &cb;
                let rhs = &cq - &cb;
                if coef.is_zero() {
                    if rhs > Rat::zero() {
                        ok = false;
                    }
                } else if coef > Rat::zero() {
                    let t = rhs / coef;
                    if t > lo {
                        lo = t;
                    }
                } else {
                    let t = rhs / coef;
                    if t < hi {
                        hi = t;
                    }
                }
            }
            if ok && lo <= hi {
                return true;
            }
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::rat::{int, rat};
    use rand::{Rng, SeedableRng};

    fn set(pts: &[(usize, usize)]) -> BTreeSet<IndexPair> {
        pts.iter().map(|&(j, a)| IndexPair::new(j, a)).collect()
    }

    #[test]
    fn spec_examples() {
        let p = build_polygon(&set(&[(3, 0)]), 3);
        assert_eq!(p.vertices, vec![(3, 0)]);
        assert_eq!(p.p(), 1);

        let p = build_polygon(&set(&[(4, 0), (0, 2), (0, 1)]), 4);
        assert_eq!(p.vertices, vec![(4, 0), (0, 2)]);
        assert_eq!(p.slopes, vec![rat(1, 2)]);
        assert_eq!(p.distance_d(IndexPair::new(2, 2)).unwrap(), int(1));
        assert_eq!(p.distance_d(IndexPair::new(4, 0)).unwrap(), int(0));
        assert_eq!(p.distance_d(IndexPair::new(0, 3)).unwrap(), int(1));
        assert!(p.distance_d(IndexPair::new(5, 0)).is_err());
        assert_eq!(p.phi(2, 3), BigInt::from(25));

        let p = build_polygon(&set(&[(3, 0), (2, 1), (0, 2)]), 3);
        assert_eq!(p.vertices, vec![(3, 0), (2, 1), (0, 2)]);
        assert_eq!(p.slopes, vec![int(1), rat(1, 2)]);
        assert_eq!(p.phi(1, 1), BigInt::from(3));
        assert_eq!(build_polygon(&set(&[(3, 0)]), 3).phi(5, 0), BigInt::from(125));
    }

    #[test]
    fn collinear_point_lies_on_edge() {
        let p = build_polygon(&set(&[(4, 0), (2, 1), (0, 2)]), 4);
        assert_eq!(p.vertices, vec![(4, 0), (0, 2)]);
        assert_eq!(p.edges_through(IndexPair::new(2, 1)), vec![1]);
        assert_eq!(p.edges_through(IndexPair::new(0, 2)), vec![1, 2]);
    }

    fn oracle_vertices(pts: &[IndexPair]) -> Vec<(usize, usize)> {
        let mut v: Vec<(usize, usize)> = pts
            .iter()
            .filter(|q| {
                let others: Vec<IndexPair> = pts.iter().copied().filter(|o| o != *q).collect();
                !in_hull_oracle(&others, (r(q.j), r(q.alpha)))
            })
            .map(|q| (q.j, q.alpha))
            .collect();
        v.sort_by_key(|a| std::cmp::Reverse(a.0));
        v
    }

    fn check(m: usize, chosen: &[IndexPair]) {
        let mut s: BTreeSet<IndexPair> = chosen.iter().copied().collect();
        s.insert(IndexPair::new(m, 0));
        let pts: Vec<IndexPair> = s.iter().copied().collect();
        let poly = build_polygon(&s, m);
        assert_eq!(poly.vertices, oracle_vertices(&pts), "m = {m}, points {pts:?}");
        for w in poly.slopes.windows(2) {
            assert!(w[0] > w[1]);
        }
        for q in &pts {
            assert!(poly.contains(*q));
        }
        // boundary agrees with the oracle on a half-integer raster
        for j2 in 0..=2 * m {
            let j = rat(j2 as i64, 2);
            for a2 in 0..=14i64 {
                let a = rat(a2, 2);
                let inside_oracle = in_hull_oracle(&pts, (j.clone(), a.clone()));
                let h = if j2 % 2 == 0 {
                    poly.height(j2 / 2).unwrap()
                } else {
                    (poly.height(j2 / 2).unwrap() + poly.height(j2 / 2 + 1).unwrap()) / int(2)
                };
                assert_eq!(a <= h, inside_oracle, "m={m} pts={pts:?} q=({j},{a})");
            }
        }
    }

    #[test]
    fn matches_hull_oracle_small_subsets() {
        for m in 1..=6usize {
            let cand: Vec<IndexPair> =
                (0..m).flat_map(|j| (0..=6).map(move |a| IndexPair::new(j, a))).collect();
            for (x, a) in cand.iter().enumerate() {
                check(m, &[*a]);
                for b in &cand[x + 1..] {
                    check(m, &[*a, *b]);
                }
            }
            if m <= 3 {
                for x in 0..cand.len() {
                    for y in x + 1..cand.len() {
                        for z in y + 1..cand.len() {
                            check(m, &[cand[x], cand[y], cand[z]]);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn matches_hull_oracle_random() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1500 {
            let m = rng.random_range(1..=6usize);
            let n = rng.random_range(1..=8usize);
            let pts: Vec<IndexPair> = (0..n)
                .map(|_| IndexPair::new(rng.random_range(0..m), rng.random_range(0..=6)))
                .collect();
            check(m, &pts);
        }
    }
}
