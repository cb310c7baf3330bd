use std::fs;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gevrey_core::analysis::{analyze, build_polygon, render_svg, Analysis, GpVerdict};
use gevrey_core::equation::{normalize, parse_spec, EquationSpec, NormalizedEquation};
use gevrey_core::estimator::{self, fit_s, fit_sigma, membership_grid, membership_test, SMode, DEFAULT_RHO};
use gevrey_core::fixtures::verify_all;
use gevrey_core::series::rat::{fmt_rat, parse_rat, Rat};
use gevrey_core::series::BiSeries;
use gevrey_core::solver::{residual, solve_formal, trusted_x};
use gevrey_core::Error;
use serde_json::json;

#[derive(Parser)]
#[command(name = "gevrey", version, about = "Newton polygon, Gevrey indices and formal solutions for totally characteristic PDEs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Newton polygon, conditions and indices as a JSON report.
    Analyze {
        spec: PathBuf,
        #[command(flatten)]
        grid: GridArg,
        /// Write the report here instead of stdout.
        #[arg(long)]
        json: Option<PathBuf>,
        /// Also write the polygon as SVG.
        #[arg(long)]
        svg: Option<PathBuf>,
        /// Also check the phi bounds on the polygon up to this k = l.
        #[arg(long)]
        phi_bounds: Option<usize>,
    },
    /// Formal solution coefficients as CSV.
    Solve {
        spec: PathBuf,
        #[command(flatten)]
        size: SizeArgs,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Load coefficients from this CSV instead of solving.
        #[arg(long)]
        coeffs: Option<PathBuf>,
        /// Substitute back into the equation and fail unless the residual vanishes.
        #[arg(long)]
        residual_check: bool,
    },
    /// Empirical Gevrey orders and membership verdicts.
    Estimate {
        spec: PathBuf,
        #[command(flatten)]
        size: SizeArgs,
        #[command(flatten)]
        grid: GridArg,
        #[arg(long)]
        coeffs: Option<PathBuf>,
        /// Membership test at this `s` (needs `--sigma`).
        #[arg(long, requires = "sigma")]
        s: Option<String>,
        #[arg(long, requires = "s")]
        sigma: Option<String>,
        /// Scan `Δs,Δσ[,steps]` around the predicted index; CSV verdict table.
        #[arg(long = "grid")]
        scan: Option<String>,
        #[arg(long, default_value_t = DEFAULT_RHO)]
        rho: f64,
        /// CSV table destination (grid scan only).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Runs the built-in examples against their expected values.
    Verify {
        #[command(flatten)]
        grid: GridArg,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Newton polygon as SVG.
    Plot {
        spec: PathBuf,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
}

#[derive(Args)]
struct SizeArgs {
    /// Highest t-degree.
    #[arg(long, default_value_t = 8)]
    kt: usize,
    /// Highest x-degree.
    #[arg(long, default_value_t = 20)]
    lx: usize,
}

#[derive(Args)]
struct GridArg {
    /// Side of the exact (N) check grid.
    #[arg(long = "grid-n", default_value_t = 40)]
    grid_n: usize,
}

enum Failure {
    Condition(String),
    Input(String),
    Invariant(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Condition(_) => 1,
            Failure::Input(_) => 2,
            Failure::Invariant(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Condition(m) | Failure::Input(m) | Failure::Invariant(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Resonance { .. } => Failure::Condition(e.to_string()),
            Error::Invariant(_) => Failure::Invariant(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

fn io_err(path: &Path, e: io::Error) -> Failure {
    Failure::Input(format!("{}: {e}", path.display()))
}

type Outcome = Result<(), Failure>;

fn load_spec(path: &Path) -> Result<(EquationSpec, NormalizedEquation), Failure> {
    let src = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let spec = parse_spec(&src).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    let norm = normalize(&spec)?;
    Ok((spec, norm))
}

fn emit(path: Option<&Path>, body: &str) -> Outcome {
    match path {
        Some(p) => fs::write(p, body).map_err(|e| io_err(p, e)),
        None => io::stdout()
            .write_all(body.as_bytes())
            .map_err(|e| Failure::Input(format!("stdout: {e}"))),
    }
}

fn to_json<T: serde::Serialize>(v: &T) -> Result<String, Failure> {
    serde_json::to_string_pretty(v)
        .map(|s| s + "\n")
        .map_err(|e| Failure::Invariant(format!("serialization: {e}")))
}

fn condition_failure(an: &Analysis) -> Option<String> {
    if let Some((k, l)) = an.n.witness {
        return Some(format!("condition N fails: L({k},{l}) = 0"));
    }
    if let GpVerdict::Fails { edge, root } = &an.gp.verdict {
        return Some(format!("condition GP fails on edge {edge}: root {root}"));
    }
    None
}

fn cmd_analyze(spec: &Path, grid_n: usize, json: Option<&Path>, svg: Option<&Path>, phi_bounds: Option<usize>) -> Outcome {
    let (_, norm) = load_spec(spec)?;
    let an = analyze(&norm, grid_n)?;
    let mut rep = an.report(&norm);
    if let Some(k) = phi_bounds {
        rep = an.with_phi_bounds(rep, k);
    }
    emit(json, &to_json(&rep)?)?;
    if let Some(p) = svg {
        emit(Some(p), &render_svg(&norm, &an.polygon))?;
    }
    match condition_failure(&an) {
        Some(m) => Err(Failure::Condition(m)),
        None => Ok(()),
    }
}

fn load_coeffs(path: &Path) -> Result<BiSeries, Failure> {
    let f = fs::File::open(path).map_err(|e| io_err(path, e))?;
    BiSeries::read_csv(BufReader::new(f)).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn coefficients(norm: &NormalizedEquation, size: &SizeArgs, coeffs: Option<&Path>) -> Result<BiSeries, Failure> {
    match coeffs {
        Some(p) => load_coeffs(p),
        None => {
            let u = solve_formal(norm, size.kt, size.lx)?;
            let got = trusted_x(&u);
            if got < size.lx {
                return Err(Failure::Input(format!(
                    "--lx {}: truncation exhausted, the spec's trunc_x = {} supports x-order {got} at --kt {}",
                    size.lx, norm.spec.trunc_x, size.kt
                )));
            }
            Ok(u)
        }
    }
}

fn cmd_solve(spec: &Path, size: &SizeArgs, out: Option<&Path>, coeffs: Option<&Path>, check: bool) -> Outcome {
    let (spec, norm) = load_spec(spec)?;
    let u = coefficients(&norm, size, coeffs)?;
    if coeffs.is_none() || out.is_some() {
        emit(out, &u.to_csv_string())?;
    }
    eprintln!("trusted rectangle: k <= {}, l <= {}", u.trunc_t(), trusted_x(&u));
    if check {
        let r = residual(&spec, &u)?;
        if let Some((k, l, v)) = r.entries().find(|(_, _, v)| **v != Rat::default()) {
            return Err(Failure::Invariant(format!("residual nonzero at t^{k} x^{l}: {}", fmt_rat(v))));
        }
        eprintln!("residual check passed");
    }
    Ok(())
}

fn parse_rat_arg(field: &str, s: &str) -> Result<Rat, Failure> {
    parse_rat(s.trim()).ok_or_else(|| Failure::Input(format!("--{field}: `{s}` is not a rational")))
}

struct Scan {
    ds: Rat,
    dsigma: Rat,
    steps: i64,
}

fn parse_scan(s: &str) -> Result<Scan, Failure> {
    let parts: Vec<&str> = s.split(',').collect();
    if !(2..=3).contains(&parts.len()) {
        return Err(Failure::Input(format!("--grid: expected `ds,dsigma[,steps]`, got `{s}`")));
    }
    let steps = match parts.get(2) {
        Some(p) => p
            .trim()
            .parse()
            .map_err(|_| Failure::Input(format!("--grid: steps `{p}` is not an integer")))?,
        None => 2,
    };
    Ok(Scan { ds: parse_rat_arg("grid", parts[0])?, dsigma: parse_rat_arg("grid", parts[1])?, steps })
}

#[allow(clippy::too_many_arguments)]
fn cmd_estimate(
    spec: &Path,
    size: &SizeArgs,
    grid_n: usize,
    coeffs: Option<&Path>,
    point: Option<(&str, &str)>,
    scan: Option<&str>,
    rho: f64,
    out: Option<&Path>,
    json: Option<&Path>,
) -> Outcome {
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(Failure::Input(format!("--rho: {rho} is not in (0, 1]")));
    }
    let (_, norm) = load_spec(spec)?;
    let an = analyze(&norm, grid_n)?;
    let (s0, sigma0) = (an.indices.s0.value.clone(), an.indices.sigma0.value.clone());
    let u = coefficients(&norm, size, coeffs)?;
    let rows: Vec<usize> = (1..=u.trunc_t()).collect();
    let sf = fit_sigma(&u, &rows);
    let sigma_for_s = sf.sigma_hat.unwrap_or(1.0).max(1.0);
    let s_rows = fit_s(&u, sigma_for_s, rho, SMode::NormalizedRows);
    let s_cols = fit_s(&u, sigma_for_s, rho, SMode::Columns);
    let predicted = membership_test(&u, &s0, &sigma0, rho);
    let mut summary = json!({
        "predicted": { "s0": fmt_rat(&s0), "sigma0": fmt_rat(&sigma0), "s1": fmt_rat(&an.indices.s1.value) },
        "fitted": {
            "sigma_hat": sf.sigma_hat,
            "sigma_stderr": sf.stderr,
            "sigma_spread": sf.spread,
            "sigma_hat_per_row": sf.rows.iter().map(|r| json!([r.k, r.sigma_hat])).collect::<Vec<_>>(),
            "convergent_in_x": sf.convergent,
            "s_hat_rows": s_rows.s_hat,
            "s_hat_columns": s_cols.s_hat,
        },
        "membership_at_predicted": predicted,
        "rho": rho,
        "growth_tolerance": estimator::GROWTH_TOL,
    });
    if let Some((s, sigma)) = point {
        let (s, sigma) = (parse_rat_arg("s", s)?, parse_rat_arg("sigma", sigma)?);
        let m = membership_test(&u, &s, &sigma, rho);
        summary["membership_at_requested"] = json!({ "s": fmt_rat(&s), "sigma": fmt_rat(&sigma), "result": m });
    }
    if let Some(scan) = scan {
        let sc = parse_scan(scan)?;
        let grid = membership_grid(&u, &s0, &sigma0, &sc.ds, &sc.dsigma, sc.steps, rho);
        let mut csv = String::from("s,sigma,verdict,growth,stderr,margin\n");
        for p in &grid {
            let m = &p.membership;
            csv.push_str(&format!(
                "{},{},{},{:.6},{:.6},{:.6}\n",
                p.s,
                p.sigma,
                serde_json::to_value(m.verdict).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default(),
                m.growth,
                m.stderr,
                m.margin
            ));
        }
        emit(out, &csv)?;
        if let Some(j) = json {
            emit(Some(j), &to_json(&summary)?)?;
        }
        return Ok(());
    }
    emit(json, &to_json(&summary)?)
}

fn cmd_verify(grid_n: usize, json: Option<&Path>) -> Outcome {
    let rows = verify_all(grid_n);
    let failed = rows.iter().filter(|r| !r.passed).count();
    match json {
        Some(p) => emit(Some(p), &to_json(&rows)?)?,
        None => {
            let mut out = String::new();
            for r in &rows {
                let tag = serde_json::to_value(r.provenance).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
                out.push_str(&format!(
                    "{} {:<44} {:<26} expected {:<22} got {:<22} [{tag}]\n",
                    if r.passed { "PASS" } else { "FAIL" },
                    r.fixture,
                    r.check,
                    r.expected,
                    r.actual
                ));
            }
            out.push_str(&format!("{} of {} checks passed\n", rows.len() - failed, rows.len()));
            emit(None, &out)?;
        }
    }
    if failed > 0 {
        return Err(Failure::Invariant(format!("{failed} fixture checks failed")));
    }
    Ok(())
}

fn cmd_plot(spec: &Path, svg: Option<&Path>) -> Outcome {
    let (_, norm) = load_spec(spec)?;
    let poly = build_polygon(&norm.lambda0, norm.m());
    emit(svg, &render_svg(&norm, &poly))
}

fn init_threads() -> Outcome {
    let Ok(v) = std::env::var("GEVREY_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .map_err(|_| Failure::Input(format!("GEVREY_THREADS: `{v}` is not a non-negative integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Invariant(format!("thread pool: {e}")))
}

fn run(cli: Cli) -> Outcome {
    init_threads()?;
    match cli.command {
        Command::Analyze { spec, grid, json, svg, phi_bounds } => {
            cmd_analyze(&spec, grid.grid_n, json.as_deref(), svg.as_deref(), phi_bounds)
        }
        Command::Solve { spec, size, out, coeffs, residual_check } => {
            cmd_solve(&spec, &size, out.as_deref(), coeffs.as_deref(), residual_check)
        }
        Command::Estimate { spec, size, grid, coeffs, s, sigma, scan, rho, out, json } => cmd_estimate(
            &spec,
            &size,
            grid.grid_n,
            coeffs.as_deref(),
            s.as_deref().zip(sigma.as_deref()),
            scan.as_deref(),
            rho,
            out.as_deref(),
            json.as_deref(),
        ),
        Command::Verify { grid, json } => cmd_verify(grid.grid_n, json.as_deref()),
        Command::Plot { spec, svg } => cmd_plot(&spec, svg.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
