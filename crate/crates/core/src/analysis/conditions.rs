use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use super::charpoly::GpReport;
use super::polygon::NewtonPolygon;
use crate::equation::NormalizedEquation;
use crate::series::rat::{fmt_rat, Rat};

/// Verdict for the non-resonance condition `L(k,l) ≠ 0` on `ℕ* × ℕ`.
#[derive(Clone, Debug, Serialize)]
pub struct NReport {
    /// Every `L(k,l)` with `1 ≤ k ≤ K`, `0 ≤ l ≤ K` was checked exactly.
    pub verified_on_grid: usize,
    /// All `c_{j,α}(0) ≤ 0`, so `L(k,l) ≥ k^m ≥ 1` everywhere.
    pub exact_cert: bool,
    /// (GP) holds, which controls `L` away from a finite set.
    pub asymptotic_cert: bool,
    /// First zero of `L` found on the grid.
    pub witness: Option<(usize, usize)>,
    /// `min L(k,l)/φ(k,l)` over the grid, as `"p/q"`.
    pub c0_grid: String,
    pub status: String,
}

impl NReport {
    pub fn holds(&self) -> bool {
        self.witness.is_none()
    }
}

/// Per-row result: first zero of `L`, and the row minimum of `L/φ`.
type RowScan = (Option<(usize, usize)>, Option<Rat>);

pub fn check_n(norm: &NormalizedEquation, poly: &NewtonPolygon, grid: usize, gp: &GpReport) -> NReport {
    let exact_cert = norm.linear_c().all(|(_, c)| !c.at_zero().is_positive());
    let k_max = grid.max(1);
    // rows in parallel, reduced in grid order
    let rows: Vec<RowScan> = (1..=k_max)
        .into_par_iter()
        .map(|k| {
            let mut wit = None;
            let mut min: Option<Rat> = None;
            for l in 0..=k_max {
                let lv = norm.eval_l(k, l);
                if lv.is_zero() && wit.is_none() {
                    wit = Some((k, l));
                }
                let ratio = lv.abs() / poly.phi_rat(k, l);
                if min.as_ref().is_none_or(|m| ratio < *m) {
                    min = Some(ratio);
                }
            }
            (wit, min)
        })
        .collect();
    let witness = rows.iter().find_map(|r| r.0);
    let c0 = rows
        .iter()
        .filter_map(|r| r.1.clone())
        .reduce(|a, b| if b < a { b } else { a })
        .unwrap_or_default();
    let asymptotic_cert = gp.holds();
    let status = match (witness, exact_cert, asymptotic_cert) {
        (Some((k, l)), _, _) => format!("fails: L({k},{l}) = 0"),
        (None, true, _) => "proved: every c_{j,alpha}(0) <= 0, so L(k,l) >= k^m".into(),
        (None, false, true) => format!(
            "checked exactly for k <= {k_max}, l <= {k_max}; (GP) bounds |L| below by c*phi outside a finite set"
        ),
        (None, false, false) => format!("checked exactly for k <= {k_max}, l <= {k_max} only"),
    };
    NReport {
        verified_on_grid: k_max,
        exact_cert,
        asymptotic_cert,
        witness,
        c0_grid: fmt_rat(&c0),
        status,
    }
}
