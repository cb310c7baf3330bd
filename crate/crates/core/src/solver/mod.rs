//! Exact formal solution `u = Σ_{k≥1} u_k(x) t^k`.
//!
//! Row `k` solves `C(x; k, x∂_x) u_k = f_k`, where `f_k` is the `t^k`
//! coefficient of `a(x)t + R₂` evaluated on the rows already known.
//! Rows are computed to a working order that decreases with `k`, so that
//! every output row is trusted up to the requested `x`-order whenever the
//! data allow it.

mod residual;
mod rhs;

pub use residual::{residual, residual_is_zero};
pub use rhs::{build_rhs_enumerated, RhsEngine};

use num_bigint::BigInt;
use num_traits::Zero;

use crate::equation::NormalizedEquation;
use crate::error::{Error, Result};
use crate::series::rat::{falling, Rat};
use crate::series::{BiSeries, UniSeries};

/// The unique `w` with `C(x; k, x∂_x) w = g`, trusted to `min(g.trunc, c_trunc)`.
pub fn solve_linear_step(norm: &NormalizedEquation, k: usize, g: &UniSeries) -> Result<UniSeries> {
    let trunc = g.trunc().min(norm.c_trunc());
    let kb = BigInt::from(k);
    // nonzero c_{j,α,r} for r ≥ 1, premultiplied by k^j
    let tails: Vec<(usize, Vec<(usize, Rat)>)> = norm
        .linear_c()
        .map(|(pair, c)| {
            let kj = Rat::from_integer(num_traits::pow(kb.clone(), pair.j));
            let nz = (1..=trunc.min(c.trunc()))
                .filter(|&r| !c.coeff(r).is_zero())
                .map(|r| (r, c.coeff(r) * &kj))
                .collect();
            (pair.alpha, nz)
        })
        .filter(|(_, nz): &(usize, Vec<_>)| !nz.is_empty())
        .collect();
    let mut w: Vec<Rat> = Vec::with_capacity(trunc + 1);
    for l in 0..=trunc {
        let mut rhs = g.coeff(l).clone();
        for (alpha, nz) in &tails {
            for (r, c) in nz {
                if *r > l {
                    break;
                }
                let prev = &w[l - r];
                if prev.is_zero() {
                    continue;
                }
                let f = falling(l - r, *alpha);
                if !f.is_zero() {
                    rhs += c * prev * Rat::from_integer(f);
                }
            }
        }
        let lkl = norm.eval_l(k, l);
        if lkl.is_zero() {
            return Err(Error::Resonance { k, l });
        }
        w.push(rhs / lkl);
    }
    Ok(UniSeries::from_coeffs(w))
}

/// Working `x`-order of row `k` for a solve to `(kt, lx)`.
pub fn working_order(norm: &NormalizedEquation, k: usize, kt: usize, lx: usize) -> usize {
    lx + (kt - k) * norm.spec.max_nonlinear_alpha()
}

/// Incremental solver state; rows `0..=k` are final once computed.
pub struct SolveState<'a> {
    norm: &'a NormalizedEquation,
    kt: usize,
    lx: usize,
    rows: Vec<UniSeries>,
    engine: RhsEngine,
}

impl<'a> SolveState<'a> {
    pub fn new(norm: &'a NormalizedEquation, kt: usize, lx: usize) -> Self {
        let top = working_order(norm, 0, kt, lx);
        Self {
            norm,
            kt,
            lx,
            rows: vec![UniSeries::zero(top)],
            engine: RhsEngine::new(norm),
        }
    }

    /// Rows computed so far, at their working order.
    pub fn rows(&self) -> &[UniSeries] {
        &self.rows
    }

    /// Index of the next row to compute.
    pub fn next_k(&self) -> usize {
        self.rows.len()
    }

    /// `f_k` for the next row, before truncation to the working order.
    pub fn rhs(&mut self) -> Result<Option<UniSeries>> {
        let k = self.next_k();
        self.engine.rhs(k, &self.rows)
    }

    pub fn step(&mut self) -> Result<()> {
        let k = self.next_k();
        assert!(k <= self.kt, "all rows already computed");
        let w = working_order(self.norm, k, self.kt, self.lx);
        let g = match self.rhs()? {
            Some(f) => f.truncate(w),
            None => UniSeries::zero(w),
        };
        let row = solve_linear_step(self.norm, k, &g)?;
        self.rows.push(row);
        Ok(())
    }

    /// Output rows capped at `lx`.
    pub fn finish(self) -> BiSeries {
        let lx = self.lx;
        BiSeries::from_rows(self.rows.into_iter().map(|r| r.truncate(lx)).collect())
    }
}

/// Rows `0..=kt`, each trusted to `lx` unless the data run out first.
pub fn solve_formal(norm: &NormalizedEquation, kt: usize, lx: usize) -> Result<BiSeries> {
    let mut st = SolveState::new(norm, kt, lx);
    for _ in 1..=kt {
        st.step()?;
    }
    Ok(st.finish())
}

/// Smallest row trust, i.e. the trusted rectangle is `[0,kt] × [0, result]`.
pub fn trusted_x(u: &BiSeries) -> usize {
    u.row_truncs().into_iter().min().unwrap_or(0)
}
