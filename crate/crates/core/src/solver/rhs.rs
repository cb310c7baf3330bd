use std::collections::HashMap;

use num_bigint::BigInt;

use crate::equation::{IndexPair, NormalizedEquation};
use crate::error::{Error, Result};
use crate::series::UniSeries;

/// `Some(a + b)` with `None` as a structural zero.
fn add_opt(acc: Option<UniSeries>, term: UniSeries) -> Option<UniSeries> {
    Some(match acc {
        None => term,
        Some(a) => &a + &term,
    })
}

/// `κ^j ∂_x^α u_κ`.
fn leaf_value(rows: &[UniSeries], pair: IndexPair, kappa: usize) -> Result<UniSeries> {
    let row = &rows[kappa];
    let d = row.dx(pair.alpha).map_err(|_| Error::TruncationExhausted {
        requested: pair.alpha,
        available: row.trunc(),
    })?;
    Ok(d.scale_int(&num_traits::pow(BigInt::from(kappa), pair.j)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Node {
    /// `Z_{j,α}(t) = Σ_κ κ^j ∂_x^α u_κ t^κ`.
    Leaf(IndexPair),
    /// Product of two nodes.
    Prod(usize, usize),
}

struct Monomial {
    i: usize,
    /// Node holding `Π Z^ν`; `None` when `ν = 0`.
    node: Option<usize>,
    degree: usize,
    coeff: UniSeries,
}

/// Right-hand sides by incremental substitution: every power `Z^e` and every
/// prefix product of a monomial is a node whose `t`-coefficients are cached.
pub struct RhsEngine {
    nodes: Vec<Node>,
    min_deg: Vec<usize>,
    ids: HashMap<Node, usize>,
    memo: Vec<HashMap<usize, Option<UniSeries>>>,
    monomials: Vec<Monomial>,
    a: UniSeries,
}

impl RhsEngine {
    pub fn new(norm: &NormalizedEquation) -> Self {
        let mut eng = Self {
            nodes: Vec::new(),
            min_deg: Vec::new(),
            ids: HashMap::new(),
            memo: Vec::new(),
            monomials: Vec::new(),
            a: norm.spec.a.clone(),
        };
        for (key, coeff) in &norm.spec.nonlinear {
            if coeff.is_zero() {
                continue;
            }
            let mut node = None;
            for (pair, e) in key.nu().iter() {
                let leaf = eng.intern(Node::Leaf(pair));
                let mut pw = leaf;
                for _ in 1..e {
                    pw = eng.intern(Node::Prod(pw, leaf));
                }
                node = Some(match node {
                    None => pw,
                    Some(prev) => eng.intern(Node::Prod(prev, pw)),
                });
            }
            eng.monomials.push(Monomial {
                i: key.i(),
                node,
                degree: key.nu().degree(),
                coeff: coeff.clone(),
            });
        }
        eng
    }

    fn intern(&mut self, n: Node) -> usize {
        if let Some(&id) = self.ids.get(&n) {
            return id;
        }
        let md = match n {
            Node::Leaf(_) => 1,
            Node::Prod(a, b) => self.min_deg[a] + self.min_deg[b],
        };
        let id = self.nodes.len();
        self.nodes.push(n);
        self.min_deg.push(md);
        self.memo.push(HashMap::new());
        self.ids.insert(n, id);
        id
    }

    /// `[t^d]` of node `id`; needs rows `< d` except for bare leaves.
    fn get(&mut self, id: usize, d: usize, rows: &[UniSeries]) -> Result<Option<UniSeries>> {
        if d < self.min_deg[id] {
            return Ok(None);
        }
        if let Some(v) = self.memo[id].get(&d) {
            return Ok(v.clone());
        }
        let v = match self.nodes[id] {
            Node::Leaf(pair) => Some(leaf_value(rows, pair, d)?),
            Node::Prod(a, b) => {
                let (ma, mb) = (self.min_deg[a], self.min_deg[b]);
                let mut acc = None;
                for d1 in ma..=d - mb {
                    let (Some(x), Some(y)) = (self.get(a, d1, rows)?, self.get(b, d - d1, rows)?) else {
                        continue;
                    };
                    acc = add_opt(acc, x.mul(&y));
                }
                acc
            }
        };
        self.memo[id].insert(d, v.clone());
        Ok(v)
    }

    /// `f_k`, given rows `0..k`; `None` when it vanishes structurally.
    pub fn rhs(&mut self, k: usize, rows: &[UniSeries]) -> Result<Option<UniSeries>> {
        assert!(rows.len() >= k, "rows 0..k must be known");
        let mut acc = if k == 1 { Some(self.a.clone()) } else { None };
        for idx in 0..self.monomials.len() {
            let (i, node, degree) = {
                let m = &self.monomials[idx];
                (m.i, m.node, m.degree)
            };
            if k < i + degree {
                continue;
            }
            let term = match node {
                None => (k == i).then(|| self.monomials[idx].coeff.clone()),
                Some(id) => self.get(id, k - i, rows)?.map(|p| self.monomials[idx].coeff.mul(&p)),
            };
            if let Some(t) = term {
                acc = add_opt(acc, t);
            }
        }
        Ok(acc)
    }
}

fn compositions(total: usize, parts: usize, f: &mut impl FnMut(&[usize]) -> Result<()>) -> Result<()> {
    fn rec(left: usize, parts: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize]) -> Result<()>) -> Result<()> {
        if parts == 0 {
            return if left == 0 { f(cur) } else { Ok(()) };
        }
        for first in 1..=left + 1 - parts {
            cur.push(first);
            rec(left - first, parts - 1, cur, f)?;
            cur.pop();
        }
        Ok(())
    }
    if total < parts {
        return Ok(());
    }
    rec(total, parts, &mut Vec::with_capacity(parts), f)
}

/// `f_k` by enumerating every ordered composition of `k - i` over the
/// factors of each monomial.
pub fn build_rhs_enumerated(norm: &NormalizedEquation, rows: &[UniSeries], k: usize) -> Result<Option<UniSeries>> {
    let mut acc = if k == 1 { Some(norm.spec.a.clone()) } else { None };
    for (key, coeff) in &norm.spec.nonlinear {
        if coeff.is_zero() || k < key.i() + key.nu().degree() {
            continue;
        }
        let factors = key.nu().factors();
        if factors.is_empty() {
            if k == key.i() {
                acc = add_opt(acc, coeff.clone());
            }
            continue;
        }
        let mut sum: Option<UniSeries> = None;
        compositions(k - key.i(), factors.len(), &mut |parts| {
            let mut prod: Option<UniSeries> = None;
            for (pair, &kappa) in factors.iter().zip(parts) {
                let v = leaf_value(rows, *pair, kappa)?;
                prod = Some(match prod {
                    None => v,
                    Some(p) => p.mul(&v),
                });
            }
            sum = add_opt(sum.take(), prod.expect("at least one factor"));
            Ok(())
        })?;
        if let Some(s) = sum {
            acc = add_opt(acc, coeff.mul(&s));
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn composition_count() {
        let mut n = 0;
        compositions(6, 3, &mut |_| {
            n += 1;
            Ok(())
        })
        .unwrap();
        assert_eq!(n, 10);
    }
}
