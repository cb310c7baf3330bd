//! Equation data: index pairs, the linear part, the nonlinear Taylor terms,
//! and the normalized form `C(x; t∂_t, x∂_x)`.

mod normalize;
mod parse;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::taylor::TaylorPoly;
use crate::series::UniSeries;

pub use normalize::{normalize, stirling2, NormalizedEquation};
pub use parse::{parse_spec, spec_to_toml};

/// `(j, α)`: the orders of `(t∂_t)^j ∂_x^α`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct IndexPair {
    pub j: usize,
    pub alpha: usize,
}

impl IndexPair {
    pub const fn new(j: usize, alpha: usize) -> Self {
        Self { j, alpha }
    }

    /// Membership in `I_m = {j + α ≤ m, j < m}`.
    pub fn in_im(self, m: usize) -> bool {
        self.j < m && self.j + self.alpha <= m
    }
}

impl fmt::Display for IndexPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.j, self.alpha)
    }
}

/// All pairs of `I_m`, ordered.
pub fn im_pairs(m: usize) -> Vec<IndexPair> {
    (0..m)
        .flat_map(|j| (0..=m - j).map(move |a| IndexPair::new(j, a)))
        .collect()
}

/// A multi-index `ν = {ν_{j,α}}` stored sparsely (zero entries omitted).
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiIndex(BTreeMap<IndexPair, usize>);

impl MultiIndex {
    pub fn from_pairs(pairs: impl IntoIterator<Item = (IndexPair, usize)>) -> Self {
        let mut map = BTreeMap::new();
        for (p, e) in pairs {
            if e > 0 {
                *map.entry(p).or_insert(0) += e;
            }
        }
        Self(map)
    }

    pub fn unit(pair: IndexPair) -> Self {
        Self::from_pairs([(pair, 1)])
    }

    pub fn get(&self, pair: IndexPair) -> usize {
        self.0.get(&pair).copied().unwrap_or(0)
    }

    /// `|ν|`.
    pub fn degree(&self) -> usize {
        self.0.values().sum()
    }

    /// `ν - e_{pair}`; `pair` must be in the support.
    pub fn minus_unit(&self, pair: IndexPair) -> Self {
        let mut map = self.0.clone();
        match map.get_mut(&pair) {
            Some(1) => {
                map.remove(&pair);
            }
            Some(e) => *e -= 1,
            None => panic!("{pair} not in the support of the multi-index"),
        }
        Self(map)
    }

    pub fn iter(&self) -> impl Iterator<Item = (IndexPair, usize)> + '_ {
        self.0.iter().map(|(p, e)| (*p, *e))
    }

    pub fn support(&self) -> impl Iterator<Item = IndexPair> + '_ {
        self.0.keys().copied()
    }

    /// Each pair repeated according to its power, in pair order.
    pub fn factors(&self) -> Vec<IndexPair> {
        self.iter().flat_map(|(p, e)| std::iter::repeat_n(p, e)).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self
            .iter()
            .map(|(p, e)| if e == 1 { format!("z{p}") } else { format!("z{p}^{e}") })
            .collect();
        write!(f, "{}", parts.join("·"))
    }
}

#[derive(Serialize, Deserialize)]
struct NuEntry {
    j: usize,
    alpha: usize,
    power: usize,
}

impl Serialize for MultiIndex {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let v: Vec<NuEntry> = self
            .iter()
            .map(|(p, e)| NuEntry { j: p.j, alpha: p.alpha, power: e })
            .collect();
        v.serialize(s)
    }
}

impl<'de> Deserialize<'de> for MultiIndex {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<NuEntry>::deserialize(d)?;
        Ok(Self::from_pairs(v.into_iter().map(|e| (IndexPair::new(e.j, e.alpha), e.power))))
    }
}

/// The index set `M` of the nonlinear arguments.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndexSet {
    Im,
    Explicit(BTreeSet<IndexPair>),
}

impl IndexSet {
    pub fn contains(&self, pair: IndexPair, m: usize) -> bool {
        match self {
            IndexSet::Im => pair.in_im(m),
            IndexSet::Explicit(s) => s.contains(&pair),
        }
    }

    pub fn pairs(&self, m: usize) -> Vec<IndexPair> {
        match self {
            IndexSet::Im => im_pairs(m),
            IndexSet::Explicit(s) => s.iter().copied().collect(),
        }
    }

    pub fn is_im(&self) -> bool {
        matches!(self, IndexSet::Im)
    }
}

/// How a linear term's `x`-operator is written.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    /// `b(x) (t∂_t)^j ∂_x^α`
    Dx,
    /// `h(x) (t∂_t)^j (x∂_x)^α`
    Euler,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearTerm {
    pub pair: IndexPair,
    pub basis: Basis,
    pub series: UniSeries,
}

/// `(i, ν)` with `i + |ν| ≥ 2`; smaller keys cannot be constructed.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NonlinearKey {
    i: usize,
    nu: MultiIndex,
}

impl NonlinearKey {
    pub fn new(i: usize, nu: MultiIndex) -> Result<Self> {
        if i + nu.degree() < 2 {
            return Err(Error::invalid(
                "nonlinear",
                format!("term t^{i}·{nu} has i+|nu| = {} < 2", i + nu.degree()),
            ));
        }
        Ok(Self { i, nu })
    }

    pub fn i(&self) -> usize {
        self.i
    }

    pub fn nu(&self) -> &MultiIndex {
        &self.nu
    }
}

/// A full equation. Series are trusted to `trunc_x`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquationSpec {
    pub m: usize,
    pub index_set: IndexSet,
    pub a: UniSeries,
    pub linear: Vec<LinearTerm>,
    pub nonlinear: BTreeMap<NonlinearKey, UniSeries>,
    pub trunc_x: usize,
}

impl EquationSpec {
    /// An equation `(t∂_t)^m u = 0·t` ready to be filled in.
    pub fn new(m: usize, trunc_x: usize) -> Self {
        Self {
            m,
            index_set: IndexSet::Im,
            a: UniSeries::zero(trunc_x),
            linear: Vec::new(),
            nonlinear: BTreeMap::new(),
            trunc_x,
        }
    }

    /// Zero-pads (or truncates) a coefficient list to `trunc_x`.
    pub fn pad(&self, poly: &[crate::series::Rat]) -> UniSeries {
        UniSeries::from_poly(poly, self.trunc_x)
    }

    pub fn with_a(mut self, a: UniSeries) -> Self {
        self.a = a;
        self
    }

    pub fn with_index_set(mut self, set: IndexSet) -> Self {
        self.index_set = set;
        self
    }

    pub fn add_linear(&mut self, pair: IndexPair, basis: Basis, series: UniSeries) {
        self.linear.push(LinearTerm { pair, basis, series });
    }

    pub fn add_nonlinear(&mut self, i: usize, nu: MultiIndex, series: UniSeries) -> Result<()> {
        let key = NonlinearKey::new(i, nu)?;
        let merged = match self.nonlinear.remove(&key) {
            Some(prev) => &prev + &series,
            None => series,
        };
        self.nonlinear.insert(key, merged);
        Ok(())
    }

    /// Checks the structural constraints that do not need normalization.
    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::invalid("m", "m must be positive"));
        }
        for (idx, t) in self.linear.iter().enumerate() {
            if !t.pair.in_im(self.m) {
                return Err(Error::invalid(
                    format!("linear[{idx}]"),
                    format!("{} is not in I_{}", t.pair, self.m),
                ));
            }
        }
        for key in self.nonlinear.keys() {
            for p in key.nu.support() {
                if !self.index_set.contains(p, self.m) {
                    return Err(Error::invalid(
                        "nonlinear",
                        format!("term t^{}·{} uses {p}, which is outside the index set", key.i, key.nu),
                    ));
                }
            }
        }
        Ok(())
    }

    /// `R₂(t, x, z)` as a polynomial in `(t, z)`.
    pub fn r2(&self) -> TaylorPoly {
        let mut r = TaylorPoly::new();
        for (k, c) in &self.nonlinear {
            r.insert(k.i, k.nu.clone(), c.clone());
        }
        r
    }

    /// Largest `α` among the pairs used by nonlinear terms.
    pub fn max_nonlinear_alpha(&self) -> usize {
        self.nonlinear
            .keys()
            .flat_map(|k| k.nu.support())
            .map(|p| p.alpha)
            .max()
            .unwrap_or(0)
    }
}
