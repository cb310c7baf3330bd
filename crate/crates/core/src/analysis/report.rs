use serde::Serialize;

use super::charpoly::{check_gp, CharPoly, GpReport, GpVerdict};
use super::conditions::{check_n, NReport};
use super::grid::{phi_bound_suite, PhiBoundReport};
use super::indices::{compute_indices, is_regular_singular, IndexResult, MuScan, S0Attribution};
use super::polygon::{build_polygon, NewtonPolygon, PolygonReport};
use crate::equation::{IndexPair, IndexSet, NormalizedEquation};
use crate::error::Result;
use crate::series::rat::fmt_rat;

/// Full analysis of one normalized equation.
#[derive(Clone, Debug)]
pub struct Analysis {
    pub polygon: NewtonPolygon,
    pub gp: GpReport,
    pub n: NReport,
    pub regular: bool,
    pub indices: IndexResult,
}

impl Analysis {
    /// (N) and (GP) both hold.
    pub fn conditions_hold(&self) -> bool {
        self.n.holds() && self.gp.holds()
    }
}

pub fn analyze(norm: &NormalizedEquation, grid_n: usize) -> Result<Analysis> {
    let polygon = build_polygon(&norm.lambda0, norm.m());
    let gp = check_gp(norm, &polygon);
    let n = check_n(norm, &polygon, grid_n, &gp);
    let regular = is_regular_singular(norm, &polygon);
    let indices = compute_indices(norm, &polygon)?;
    Ok(Analysis { polygon, gp, n, regular, indices })
}

#[derive(Clone, Debug, Serialize)]
pub struct PairValue {
    pub pair: IndexPair,
    pub value: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct GpSection {
    pub holds: bool,
    pub verdict: GpVerdict,
    pub status: String,
    pub polynomials: Vec<CharPoly>,
    pub borderline_edges: Vec<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RSection {
    pub holds: bool,
    pub outside_n0: Vec<IndexPair>,
}

#[derive(Clone, Debug, Serialize)]
pub struct IndexSection {
    pub sigma0: String,
    pub sigma0_attained_by: Vec<IndexPair>,
    pub d: Vec<PairValue>,
    pub s0: String,
    pub s0_attribution: Option<S0Attribution>,
    pub s0_term_route: String,
    pub s1: String,
    pub s1_attribution: Option<S0Attribution>,
    pub s0_equals_s1: bool,
    pub mu_scan: MuScan,
}

/// JSON document written by `analyze`. Rationals are strings `"p/q"`.
#[derive(Clone, Debug, Serialize)]
pub struct AnalysisReport {
    pub schema: u32,
    pub m: usize,
    pub index_set: String,
    pub trunc_x: usize,
    pub lambda0: Vec<IndexPair>,
    pub lambda1: Vec<IndexPair>,
    pub p: Vec<PairValue>,
    pub polygon: PolygonReport,
    pub n: NReport,
    pub gp: GpSection,
    pub r: RSection,
    pub indices: IndexSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi_bounds: Option<PhiBoundReport>,
    pub warnings: Vec<String>,
    pub notes: Vec<String>,
}

pub const REPORT_SCHEMA: u32 = 1;

impl Analysis {
    pub fn report(&self, norm: &NormalizedEquation) -> AnalysisReport {
        let ix = &self.indices;
        let gp_status = match &self.gp.verdict {
            GpVerdict::Holds => "decided exactly: Sturm count on (0,inf) for finite edges, integer root search for the last edge".to_string(),
            GpVerdict::Fails { edge, root } => format!("fails exactly: P_{edge} vanishes at {root}"),
        };
        let mut notes = vec![
            "nonlinear part is a finite list of Taylor terms".to_string(),
            format!("coefficients are trusted up to x^{}", norm.spec.trunc_x),
        ];
        if ix.mu_scan.truncation_limited {
            notes.push(format!(
                "s0 is truncation-limited: a nonlinear coefficient is nonzero at x^{}",
                norm.spec.trunc_x
            ));
        }
        if !self.gp.borderline_edges.is_empty() {
            notes.push("float roots near the forbidden set; the verdict above is exact".to_string());
        }
        AnalysisReport {
            schema: REPORT_SCHEMA,
            m: norm.m(),
            index_set: match &norm.spec.index_set {
                IndexSet::Im => "Im".into(),
                IndexSet::Explicit(s) => s.iter().map(|q| q.to_string()).collect::<Vec<_>>().join(" "),
            },
            trunc_x: norm.spec.trunc_x,
            lambda0: norm.lambda0.iter().copied().collect(),
            lambda1: norm.lambda1.iter().copied().collect(),
            p: norm.p.iter().map(|(q, v)| PairValue { pair: *q, value: v.to_string() }).collect(),
            polygon: PolygonReport::from(&self.polygon),
            n: self.n.clone(),
            gp: GpSection {
                holds: self.gp.holds(),
                verdict: self.gp.verdict.clone(),
                status: gp_status,
                polynomials: self.gp.polys.clone(),
                borderline_edges: self.gp.borderline_edges.clone(),
            },
            r: RSection {
                holds: self.regular,
                outside_n0: norm.lambda1.iter().copied().filter(|q| !self.polygon.contains(*q)).collect(),
            },
            indices: IndexSection {
                sigma0: fmt_rat(&ix.sigma0.value),
                sigma0_attained_by: ix.sigma0.attained_by.clone(),
                d: ix.sigma0.d.iter().map(|(q, d)| PairValue { pair: *q, value: fmt_rat(d) }).collect(),
                s0: fmt_rat(&ix.s0.value),
                s0_attribution: ix.s0.attained_by.clone(),
                s0_term_route: fmt_rat(&ix.s0_alt.value),
                s1: fmt_rat(&ix.s1.value),
                s1_attribution: ix.s1.attained_by.clone(),
                s0_equals_s1: ix.s0_equals_s1(),
                mu_scan: ix.mu_scan.clone(),
            },
            phi_bounds: None,
            warnings: norm.warnings.clone(),
            notes,
        }
    }

    /// Adds the grid check of the polygon inequalities to a report.
    pub fn with_phi_bounds(&self, mut rep: AnalysisReport, kmax: usize) -> AnalysisReport {
        rep.phi_bounds = Some(phi_bound_suite(&self.polygon, &[1, 2, 3], kmax, kmax));
        rep
    }
}
