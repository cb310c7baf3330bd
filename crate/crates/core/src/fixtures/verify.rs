use serde::Serialize;

use super::{catalog, Fixture, Oracle, Provenance};
use crate::analysis::analyze;
use crate::equation::normalize;
use crate::estimator::verify_bound_e64;
use crate::solver::solve_formal;

#[derive(Clone, Debug, Serialize)]
pub struct VerifyRow {
    pub fixture: String,
    pub check: String,
    pub expected: String,
    pub actual: String,
    pub passed: bool,
    pub provenance: Provenance,
}

struct Rows<'a> {
    fixture: &'a Fixture,
    out: Vec<VerifyRow>,
}

impl Rows<'_> {
    fn push(&mut self, check: &str, expected: impl ToString, actual: impl ToString, provenance: Provenance) {
        let (expected, actual) = (expected.to_string(), actual.to_string());
        self.out.push(VerifyRow {
            fixture: self.fixture.name.clone(),
            check: check.into(),
            passed: expected == actual,
            expected,
            actual,
            provenance,
        });
    }

    fn fail(&mut self, check: &str, err: impl ToString) {
        self.out.push(VerifyRow {
            fixture: self.fixture.name.clone(),
            check: check.into(),
            expected: "ok".into(),
            actual: err.to_string(),
            passed: false,
            provenance: Provenance::Computed,
        });
    }
}

const ORACLE_KT: usize = 4;
const ORACLE_LX: usize = 12;

fn verify_one(f: &Fixture, grid_n: usize) -> Vec<VerifyRow> {
    let mut rows = Rows { fixture: f, out: Vec::new() };
    let prov = f.expected.provenance;
    let norm = match normalize(&f.spec) {
        Ok(n) => n,
        Err(e) => {
            rows.fail("normalize", e);
            return rows.out;
        }
    };
    match analyze(&norm, grid_n) {
        Ok(an) => {
            let e = &f.expected;
            if let Some(v) = &e.vertices {
                rows.push("vertices", format!("{v:?}"), format!("{:?}", an.polygon.vertices), prov);
            }
            rows.push("sigma0", &e.sigma0, &an.indices.sigma0.value, prov);
            rows.push("s0", &e.s0, &an.indices.s0.value, prov);
            rows.push("s0 routes agree", true, an.indices.s0.value == an.indices.s0_alt.value, Provenance::Computed);
            if let Some(s1) = &e.s1 {
                rows.push("s1", s1, &an.indices.s1.value, prov);
            }
            rows.push("N", e.n_holds, an.n.holds(), prov);
            rows.push("GP", e.gp_holds, an.gp.holds(), prov);
            rows.push("R", e.r_holds, an.regular, prov);
        }
        Err(e) => rows.fail("analyze", e),
    }
    let Some(oracle) = &f.oracle else {
        return rows.out;
    };
    let kt = match oracle {
        Oracle::Model(o) => o.t_exponent(3),
        Oracle::FactorialRow => ORACLE_KT,
    };
    let u = match solve_formal(&norm, kt, ORACLE_LX) {
        Ok(u) => u,
        Err(e) => {
            rows.fail("solve", e);
            return rows.out;
        }
    };
    if let Some(row1) = oracle.first_row(ORACLE_LX) {
        let ok = u.row(1) == &row1;
        rows.push("row 1 equals oracle", true, ok, Provenance::Computed);
    }
    match oracle {
        Oracle::FactorialRow => {
            let b = verify_bound_e64(&u, kt);
            rows.push("coefficient bound", true, b.passed(), Provenance::Stated);
        }
        Oracle::Model(o) => {
            let ok = o.table(3, ORACLE_LX).iter().enumerate().all(|(k, rung)| {
                let row = u.row(o.t_exponent(k));
                rung.iter()
                    .filter(|(x, _)| *x <= ORACLE_LX)
                    .all(|(x, a)| row.get(*x).is_some_and(|v| v >= a))
            });
            rows.push("dominates minorant chain", true, ok, Provenance::Computed);
            rows.push("ladder bounds", true, o.ladder_bounds_hold(50), Provenance::Computed);
        }
    }
    rows.out
}

/// Runs every catalog fixture through analysis and, where an oracle exists,
/// the solver.
pub fn verify_all(grid_n: usize) -> Vec<VerifyRow> {
    catalog().iter().flat_map(|f| verify_one(f, grid_n)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_verifies() {
        let rows = verify_all(20);
        assert!(rows.len() > 30);
        for r in &rows {
            assert!(r.passed, "{r:?}");
        }
        assert!(rows.iter().any(|r| r.check == "dominates minorant chain"));
        assert!(rows.iter().any(|r| r.check == "coefficient bound"));
    }
}
