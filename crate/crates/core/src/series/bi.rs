//! Truncated bivariate series `Σ u_{k,l} t^k x^l`, stored row by row in `t`.
//!
//! Row `k` is a [`UniSeries`] in `x` with its own trusted order, so the
//! trusted region is a staircase rather than a rectangle.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use super::rat::Rat;
use super::uni::UniSeries;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BiSeries {
    rows: Vec<UniSeries>,
}

impl BiSeries {
    pub fn zero(trunc_t: usize, trunc_x: usize) -> Self {
        Self {
            rows: vec![UniSeries::zero(trunc_x); trunc_t + 1],
        }
    }

    /// Rows `0 ..= rows.len()-1`; the t-truncation is `rows.len() - 1`.
    pub fn from_rows(rows: Vec<UniSeries>) -> Self {
        assert!(!rows.is_empty(), "a bivariate series needs at least row 0");
        Self { rows }
    }

    pub fn from_fn(trunc_t: usize, trunc_x: usize, mut f: impl FnMut(usize, usize) -> Rat) -> Self {
        Self {
            rows: (0..=trunc_t)
                .map(|k| UniSeries::from_fn(trunc_x, |l| f(k, l)))
                .collect(),
        }
    }

    /// `t^k · g(x)`, rows `0..=trunc_t`, all trusted to `g.trunc()`.
    pub fn t_monomial(k: usize, g: &UniSeries, trunc_t: usize) -> Self {
        let mut s = Self::zero(trunc_t, g.trunc());
        if k <= trunc_t {
            s.rows[k] = g.clone();
        }
        s
    }

    pub fn trunc_t(&self) -> usize {
        self.rows.len() - 1
    }

    /// Largest trusted x-order over all rows.
    pub fn trunc_x(&self) -> usize {
        self.rows.iter().map(UniSeries::trunc).max().unwrap_or(0)
    }

    /// Trusted x-order of each row.
    pub fn row_truncs(&self) -> Vec<usize> {
        self.rows.iter().map(UniSeries::trunc).collect()
    }

    pub fn rows(&self) -> &[UniSeries] {
        &self.rows
    }

    pub fn row(&self, k: usize) -> &UniSeries {
        &self.rows[k]
    }

    pub fn set_row(&mut self, k: usize, row: UniSeries) {
        self.rows[k] = row;
    }

    pub fn is_trusted(&self, k: usize, l: usize) -> bool {
        k < self.rows.len() && l <= self.rows[k].trunc()
    }

    pub fn get(&self, k: usize, l: usize) -> Option<&Rat> {
        self.rows.get(k).and_then(|r| r.get(l))
    }

    /// Iterates over trusted `(k, l, value)` in `(k, l)` order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &Rat)> {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(k, r)| r.coeffs().iter().enumerate().map(move |(l, c)| (k, l, c)))
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().all(UniSeries::is_zero)
    }

    pub fn is_nonneg(&self) -> bool {
        self.rows.iter().all(UniSeries::is_nonneg)
    }

    /// Restricts to `k ≤ trunc_t` and `l ≤ trunc_x` (never extends).
    pub fn truncate(&self, trunc_t: usize, trunc_x: usize) -> Self {
        let kt = trunc_t.min(self.trunc_t());
        Self {
            rows: self.rows[..=kt].iter().map(|r| r.truncate(trunc_x)).collect(),
        }
    }

    fn zip(&self, other: &Self, f: impl Fn(&UniSeries, &UniSeries) -> UniSeries) -> Self {
        let kt = self.trunc_t().min(other.trunc_t());
        Self {
            rows: (0..=kt).map(|k| f(&self.rows[k], &other.rows[k])).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a - b)
    }

    pub fn scale(&self, c: &Rat) -> Self {
        self.map_rows(|_, r| r.scale(c))
    }

    pub fn map_rows(&self, mut f: impl FnMut(usize, &UniSeries) -> UniSeries) -> Self {
        Self {
            rows: self.rows.iter().enumerate().map(|(k, r)| f(k, r)).collect(),
        }
    }

    /// Product with a series in `x` alone.
    pub fn mul_x_series(&self, g: &UniSeries) -> Self {
        self.map_rows(|_, r| r.mul(g))
    }

    /// `t^i · self`, keeping the t-truncation.
    pub fn shift_t(&self, i: usize) -> Self {
        let kt = self.trunc_t();
        let tx = self.trunc_x();
        Self {
            rows: (0..=kt)
                .map(|k| if k < i { UniSeries::zero(tx) } else { self.rows[k - i].clone() })
                .collect(),
        }
    }

    /// Cauchy product in both variables. Row `k` is trusted to the minimum
    /// trust of the rows that feed it.
    pub fn mul(&self, other: &Self) -> Self {
        let kt = self.trunc_t().min(other.trunc_t());
        let rows = (0..=kt)
            .map(|k| {
                let t = (0..=k)
                    .map(|i| self.rows[i].trunc().min(other.rows[k - i].trunc()))
                    .min()
                    .unwrap_or(0);
                let mut acc = UniSeries::zero(t);
                for i in 0..=k {
                    let (a, b) = (&self.rows[i], &other.rows[k - i]);
                    if a.is_zero() || b.is_zero() {
                        continue;
                    }
                    acc = &acc + &a.truncate(t).mul(&b.truncate(t));
                }
                acc
            })
            .collect();
        Self { rows }
    }

    /// `∂_x^α` applied to every row. Rows whose trust would become negative
    /// end the series.
    pub fn dx(&self, alpha: usize) -> Result<Self> {
        let mut rows = Vec::with_capacity(self.rows.len());
        for r in &self.rows {
            match r.dx(alpha) {
                Ok(d) => rows.push(d),
                Err(e) if rows.is_empty() => return Err(e),
                Err(_) => break,
            }
        }
        Ok(Self { rows })
    }

    /// `(t∂_t)^j`: row `k` scaled by `k^j`.
    pub fn theta_t(&self, j: usize) -> Self {
        self.map_rows(|k, r| r.scale_int(&num_traits::pow(BigInt::from(k), j)))
    }

    /// `(x∂_x)^α` applied to every row.
    pub fn theta_x(&self, alpha: usize) -> Self {
        self.map_rows(|_, r| {
            let mut r = r.clone();
            for _ in 0..alpha {
                r = r.euler();
            }
            r
        })
    }

    /// CSV with header `k,l,numerator,denominator`, one line per trusted entry.
    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "k,l,numerator,denominator")?;
        let mut line = String::new();
        for (k, l, c) in self.entries() {
            line.clear();
            let _ = write!(line, "{k},{l},{},{}", c.numer(), c.denom());
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("CSV is ASCII")
    }

    /// Reads the format produced by [`write_csv`](Self::write_csv). Each row
    /// must list `l = 0, 1, ...` without gaps.
    pub fn read_csv(r: impl BufRead) -> Result<Self> {
        let mut rows: Vec<Vec<Rat>> = Vec::new();
        let perr = |line: usize, field: &str, message: String| Error::Parse {
            line,
            field: field.to_string(),
            message,
        };
        for (idx, line) in r.lines().enumerate() {
            let n = idx + 1;
            let line = line.map_err(|e| perr(n, "csv", e.to_string()))?;
            let line = line.trim();
            if idx == 0 {
                if line != "k,l,numerator,denominator" {
                    return Err(perr(n, "header", format!("unexpected header `{line}`")));
                }
                continue;
            }
            if line.is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split(',').collect();
            if parts.len() != 4 {
                return Err(perr(n, "row", format!("expected 4 fields, got {}", parts.len())));
            }
            let k: usize = parts[0].parse().map_err(|_| perr(n, "k", parts[0].into()))?;
            let l: usize = parts[1].parse().map_err(|_| perr(n, "l", parts[1].into()))?;
            let num: BigInt = parts[2].parse().map_err(|_| perr(n, "numerator", parts[2].into()))?;
            let den: BigInt = parts[3].parse().map_err(|_| perr(n, "denominator", parts[3].into()))?;
            if !den.is_positive() {
                return Err(perr(n, "denominator", "must be positive".into()));
            }
            if k > rows.len() {
                return Err(perr(n, "k", format!("row {k} appears before row {}", rows.len())));
            }
            if k == rows.len() {
                rows.push(Vec::new());
            }
            let row = &mut rows[k];
            if l != row.len() {
                return Err(perr(n, "l", format!("expected l = {} in row {k}, got {l}", row.len())));
            }
            row.push(Rat::new(num, den));
        }
        if rows.is_empty() {
            return Err(perr(1, "csv", "no coefficients".into()));
        }
        Ok(Self {
            rows: rows.into_iter().map(UniSeries::from_coeffs).collect(),
        })
    }

    /// Largest `|u_{k,l}|` in row `k`, zero for an empty row.
    pub fn row_max_abs(&self, k: usize) -> Rat {
        self.rows[k]
            .coeffs()
            .iter()
            .map(|c| c.abs())
            .fold(Rat::zero(), |a, b| if b > a { b } else { a })
    }
}
