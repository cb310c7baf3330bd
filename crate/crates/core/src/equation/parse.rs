//! TOML spec files.
//!
//! ```toml
//! m = 1
//! trunc_x = 60
//! index_set = [[0, 2]]          # or "Im" (default)
//! a = ["0", "1"]                # coefficients of x^0, x^1, ...
//!
//! [[linear]]                    # b(x) (t∂_t)^j ∂_x^α  or  h(x) (t∂_t)^j (x∂_x)^α
//! j = 0
//! alpha = 1
//! basis = "euler"               # "dx" | "euler"
//! series = ["0", "1"]
//!
//! [[nonlinear]]                 # a_{i,ν}(x) t^i Π ((t∂_t)^j ∂_x^α u)^power
//! i = 1
//! nu = [{ j = 0, alpha = 2, power = 1 }]
//! series = ["0", "0", "0", "1"]
//! ```
//!
//! Coefficients are strings `"p/q"` or integers. Lists shorter than
//! `trunc_x + 1` are zero-padded.

use std::collections::BTreeSet;
use std::ops::Range;

use serde::Deserialize;
use toml::Spanned;

use super::{Basis, EquationSpec, IndexPair, IndexSet, MultiIndex};
use crate::error::{Error, Result};
use crate::series::rat::{fmt_rat, parse_rat, Rat};
use crate::series::UniSeries;

#[derive(Deserialize)]
#[serde(untagged)]
enum RawCoeff {
    Int(i64),
    Str(String),
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawIndexSet {
    Named(String),
    List(Vec<[usize; 2]>),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNu {
    j: usize,
    alpha: usize,
    power: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLinear {
    j: usize,
    alpha: usize,
    #[serde(default)]
    basis: Option<Spanned<String>>,
    series: Spanned<Vec<Spanned<RawCoeff>>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNonlinear {
    i: usize,
    #[serde(default)]
    nu: Vec<RawNu>,
    series: Spanned<Vec<Spanned<RawCoeff>>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    m: Spanned<usize>,
    trunc_x: Spanned<usize>,
    #[serde(default)]
    index_set: Option<Spanned<RawIndexSet>>,
    a: Spanned<Vec<Spanned<RawCoeff>>>,
    #[serde(default)]
    linear: Vec<Spanned<RawLinear>>,
    #[serde(default)]
    nonlinear: Vec<Spanned<RawNonlinear>>,
}

fn line_of(src: &str, span: Range<usize>) -> usize {
    src[..span.start.min(src.len())].matches('\n').count() + 1
}

struct Ctx<'a> {
    src: &'a str,
    trunc_x: usize,
}

impl Ctx<'_> {
    fn err(&self, span: Range<usize>, field: impl Into<String>, message: impl Into<String>) -> Error {
        Error::Parse {
            line: line_of(self.src, span),
            field: field.into(),
            message: message.into(),
        }
    }

    fn series(&self, raw: &Spanned<Vec<Spanned<RawCoeff>>>, field: &str) -> Result<UniSeries> {
        let items = raw.get_ref();
        if items.len() > self.trunc_x + 1 {
            return Err(self.err(
                raw.span(),
                field,
                format!("{} coefficients given but trunc_x = {}", items.len(), self.trunc_x),
            ));
        }
        let mut coeffs = Vec::with_capacity(items.len());
        for (l, c) in items.iter().enumerate() {
            let v = match c.get_ref() {
                RawCoeff::Int(n) => Rat::from_integer((*n).into()),
                RawCoeff::Str(s) => parse_rat(s).ok_or_else(|| {
                    self.err(c.span(), format!("{field}[{l}]"), format!("`{s}` is not a rational"))
                })?,
            };
            coeffs.push(v);
        }
        Ok(UniSeries::from_poly(&coeffs, self.trunc_x))
    }
}

/// Parses and validates a spec file. Errors carry the line and field.
pub fn parse_spec(src: &str) -> Result<EquationSpec> {
    let raw: RawSpec = toml::from_str(src).map_err(|e| Error::Parse {
        line: e.span().map_or(1, |s| line_of(src, s)),
        field: "toml".into(),
        message: e.message().trim().to_string(),
    })?;
    let ctx = Ctx {
        src,
        trunc_x: *raw.trunc_x.get_ref(),
    };
    let m = *raw.m.get_ref();
    if m == 0 {
        return Err(ctx.err(raw.m.span(), "m", "m must be positive"));
    }
    let mut spec = EquationSpec::new(m, ctx.trunc_x);
    spec.a = ctx.series(&raw.a, "a")?;

    if let Some(set) = &raw.index_set {
        spec.index_set = match set.get_ref() {
            RawIndexSet::Named(n) if n == "Im" => IndexSet::Im,
            RawIndexSet::Named(n) => {
                return Err(ctx.err(set.span(), "index_set", format!("expected \"Im\" or a list of pairs, got `{n}`")))
            }
            RawIndexSet::List(v) => {
                IndexSet::Explicit(v.iter().map(|[j, a]| IndexPair::new(*j, *a)).collect::<BTreeSet<_>>())
            }
        };
    }

    for (idx, lt) in raw.linear.iter().enumerate() {
        let field = format!("linear[{idx}]");
        let t = lt.get_ref();
        let pair = IndexPair::new(t.j, t.alpha);
        if !pair.in_im(m) {
            return Err(ctx.err(lt.span(), field, format!("{pair} is not in I_{m}")));
        }
        let basis = match &t.basis {
            None => Basis::Dx,
            Some(b) => match b.get_ref().as_str() {
                "dx" => Basis::Dx,
                "euler" => Basis::Euler,
                other => {
                    return Err(ctx.err(
                        b.span(),
                        format!("{field}.basis"),
                        format!("expected \"dx\" or \"euler\", got `{other}`"),
                    ))
                }
            },
        };
        let series = ctx.series(&t.series, &format!("{field}.series"))?;
        spec.add_linear(pair, basis, series);
    }

    for (idx, nt) in raw.nonlinear.iter().enumerate() {
        let field = format!("nonlinear[{idx}]");
        let t = nt.get_ref();
        let nu = MultiIndex::from_pairs(t.nu.iter().map(|e| (IndexPair::new(e.j, e.alpha), e.power)));
        for p in nu.support() {
            if !spec.index_set.contains(p, m) {
                return Err(ctx.err(nt.span(), format!("{field}.nu"), format!("{p} is outside the index set")));
            }
        }
        let series = ctx.series(&t.series, &format!("{field}.series"))?;
        spec.add_nonlinear(t.i, nu, series).map_err(|e| match e {
            Error::InvalidSpec { message, .. } => ctx.err(nt.span(), field.clone(), message),
            other => other,
        })?;
    }
    spec.validate()?;
    Ok(spec)
}

fn series_literal(s: &UniSeries) -> String {
    // trailing zeros are implied by padding
    let coeffs = s.coeffs();
    let end = coeffs.iter().rposition(|c| *c != Rat::from_integer(0.into())).map_or(0, |i| i + 1);
    let items: Vec<String> = coeffs[..end].iter().map(|c| format!("\"{}\"", fmt_rat(c))).collect();
    format!("[{}]", items.join(", "))
}

/// Renders a spec in the format accepted by [`parse_spec`].
pub fn spec_to_toml(spec: &EquationSpec) -> String {
    let mut out = format!("m = {}\ntrunc_x = {}\n", spec.m, spec.trunc_x);
    if let IndexSet::Explicit(set) = &spec.index_set {
        let items: Vec<String> = set.iter().map(|p| format!("[{}, {}]", p.j, p.alpha)).collect();
        out += &format!("index_set = [{}]\n", items.join(", "));
    }
    out += &format!("a = {}\n", series_literal(&spec.a));
    for t in &spec.linear {
        let basis = match t.basis {
            Basis::Dx => "dx",
            Basis::Euler => "euler",
        };
        out += &format!(
            "\n[[linear]]\nj = {}\nalpha = {}\nbasis = \"{basis}\"\nseries = {}\n",
            t.pair.j,
            t.pair.alpha,
            series_literal(&t.series)
        );
    }
    for (k, s) in &spec.nonlinear {
        let nu: Vec<String> = k
            .nu()
            .iter()
            .map(|(p, e)| format!("{{ j = {}, alpha = {}, power = {e} }}", p.j, p.alpha))
            .collect();
        out += &format!(
            "\n[[nonlinear]]\ni = {}\nnu = [{}]\nseries = {}\n",
            k.i(),
            nu.join(", "),
            series_literal(s)
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::rat::int;

    const E62: &str = r#"
m = 1
trunc_x = 12
index_set = [[0, 2]]
a = ["0", "1"]

[[linear]]
j = 0
alpha = 1
basis = "euler"
series = [0, 1]

[[nonlinear]]
i = 1
nu = [{ j = 0, alpha = 2, power = 1 }]
series = ["0", "0", "0", "1"]
"#;

    #[test]
    fn parses_e62() {
        let s = parse_spec(E62).unwrap();
        assert_eq!(s.m, 1);
        assert_eq!(s.a, UniSeries::monomial(int(1), 1, 12));
        assert_eq!(s.linear.len(), 1);
        assert_eq!(s.linear[0].basis, Basis::Euler);
        assert_eq!(s.nonlinear.len(), 1);
        let back = parse_spec(&spec_to_toml(&s)).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn reports_line_and_field() {
        let bad = E62.replace("series = [0, 1]", "series = [0, \"x/2\"]");
        match parse_spec(&bad).unwrap_err() {
            Error::Parse { line, field, .. } => {
                assert_eq!(line, 11);
                assert_eq!(field, "linear[0].series[1]");
            }
            e => panic!("unexpected {e:?}"),
        }
        let bad = E62.replace("alpha = 1\n", "alpha = 3\n");
        assert!(matches!(parse_spec(&bad), Err(Error::Parse { line: 7, .. })));
        let bad = E62.replace("alpha = 2, power", "alpha = 3, power");
        assert!(matches!(parse_spec(&bad), Err(Error::Parse { ref field, .. }) if field == "nonlinear[0].nu"));
        let bad = E62.replace("m = 1", "m = \"one\"");
        assert!(matches!(parse_spec(&bad), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn rejects_low_degree_term() {
        let bad = E62.replace("i = 1", "i = 0");
        assert!(matches!(parse_spec(&bad), Err(Error::Parse { ref field, .. }) if field == "nonlinear[0]"));
    }
}
