use crate::equation::{Basis, EquationSpec};
use crate::error::Result;
use crate::series::BiSeries;

/// `(t∂_t)^m u - a t - Σ linear - Σ a_{i,ν} t^i Π ((t∂_t)^j ∂_x^α u)^ν`,
/// substituted directly from the spec terms. The result's rows carry the
/// trust that survives the derivatives.
pub fn residual(spec: &EquationSpec, u: &BiSeries) -> Result<BiSeries> {
    let kt = u.trunc_t();
    let mut acc = u.theta_t(spec.m);
    acc = acc.sub(&BiSeries::t_monomial(1, &spec.a, kt));
    for term in &spec.linear {
        let op = match term.basis {
            Basis::Dx => u.dx(term.pair.alpha)?,
            Basis::Euler => u.theta_x(term.pair.alpha),
        };
        acc = acc.sub(&op.theta_t(term.pair.j).mul_x_series(&term.series));
    }
    for (key, coeff) in &spec.nonlinear {
        let mut prod = BiSeries::t_monomial(0, coeff, kt);
        for pair in key.nu().factors() {
            prod = prod.mul(&u.dx(pair.alpha)?.theta_t(pair.j));
        }
        acc = acc.sub(&prod.shift_t(key.i()));
    }
    Ok(acc)
}

/// Residual vanishes on its whole trusted region.
pub fn residual_is_zero(spec: &EquationSpec, u: &BiSeries) -> Result<bool> {
    Ok(residual(spec, u)?.is_zero())
}
