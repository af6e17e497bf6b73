//! Command-line front end: argument parsing and command orchestration.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::foliation::{
    classify_holonomy, holonomy_continuation, leaf_tangency, leaf_through, modular_period_ode,
    numeric_rank, stratification, FoliationReport, HolonomyCase, Integrator, Leaf,
    DEFAULT_FOLIATION_TOL,
};
use crate::invariants::{equivalent, modular_period, InvariantRecord};
use crate::io::report;
use crate::io::{parse_structure, Overrides, Problem};
use crate::normalize::{normalize, NormalForm};
use crate::poisson::{jacobiator, linear_part, transform, PoissonStructure};
use crate::sampling;
use crate::spectral::{bruno_omega, check_nonresonance, default_tolerance, eigen_continuation};

#[derive(Debug, Parser)]
#[command(
    name = "semilocal-poisson",
    version,
    about = "Normal forms, invariants and foliations of Poisson structures vanishing on a circle"
)]
pub struct Cli {
    #[command(flatten)]
    pub opts: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct GlobalOpts {
    /// Truncation order N of the series.
    #[arg(long, global = true, value_name = "N")]
    pub order: Option<usize>,
    /// Number of grid points M on the circle (a power of two).
    #[arg(long, global = true, value_name = "M")]
    pub grid: Option<usize>,
    /// Largest accepted Jacobiator norm.
    #[arg(long, global = true, value_name = "TOL")]
    pub tol_jacobi: Option<f64>,
    /// Smallest accepted small divisor.
    #[arg(long, global = true, value_name = "TOL")]
    pub tol_resonance: Option<f64>,
    /// Use the literal Bruno sum over multi-indices with all entries positive.
    #[arg(long, global = true)]
    pub paper_literal_bruno: bool,
    /// Also report the closure defect of the literal circle reparametrization.
    #[arg(long, global = true)]
    pub paper_literal_chi: bool,
    /// Write leaf samples or the Bruno table to this CSV file.
    #[arg(long, global = true, value_name = "PATH")]
    pub csv: Option<PathBuf>,
    /// Seed for the randomized self-test.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Parse a problem and check the Jacobi identity and the linear part.
    Validate { file: PathBuf },
    /// Eigenvalues along the circle, eigenbundle monodromy, resonances and the Bruno sums.
    Spectrum {
        file: PathBuf,
        /// Degree bound of the resonance search.
        #[arg(long, default_value_t = 8)]
        degree: u32,
        /// Number of dyadic levels of the Bruno sum.
        #[arg(long, default_value_t = 10)]
        bruno_levels: u32,
    },
    /// Compute the normal form and the normalizing chain.
    Normalize { file: PathBuf },
    /// Normal form invariants: mu, a, monodromy and the modular period.
    Invariants { file: PathBuf },
    /// Decide whether two problems are equivalent.
    Equiv {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
    },
    /// Symplectic foliation of the normal form on the positive orthant.
    Foliation { file: PathBuf },
    /// Sample the leaf through (0, x0), with x0 given as comma-separated values.
    Leaf {
        file: PathBuf,
        #[arg(allow_hyphen_values = true)]
        x0: String,
        #[arg(long, default_value_t = 16)]
        samples: usize,
    },
    /// Numerical cross-checks by integration.
    Oracle {
        file: PathBuf,
        #[arg(long, default_value_t = 20)]
        samples: usize,
    },
    /// Randomized round trip: transform random normal forms and recover them.
    Selftest {
        #[arg(long, default_value_t = 5)]
        cases: usize,
    },
}

/// Result of a command: the report and the process exit code.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Value,
    pub exit_code: i32,
}

impl Outcome {
    pub fn render(&self) -> String {
        report::render(&self.report)
    }
}

impl GlobalOpts {
    fn overrides(&self) -> Overrides {
        Overrides {
            order: self.order,
            grid: self.grid,
            tol_jacobi: self.tol_jacobi,
            tol_resonance: self.tol_resonance,
            paper_literal_bruno: self.paper_literal_bruno,
            paper_literal_chi: self.paper_literal_chi,
        }
    }
}

fn load(path: &Path, opts: &GlobalOpts) -> Result<Problem> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Schema(format!("cannot read {}: {e}", path.display())))?;
    parse_structure(&text, &opts.overrides())
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Validate { .. } => "validate",
        Command::Spectrum { .. } => "spectrum",
        Command::Normalize { .. } => "normalize",
        Command::Invariants { .. } => "invariants",
        Command::Equiv { .. } => "equiv",
        Command::Foliation { .. } => "foliation",
        Command::Leaf { .. } => "leaf",
        Command::Oracle { .. } => "oracle",
        Command::Selftest { .. } => "selftest",
    }
}

/// Runs a parsed command; errors become a report with the error's exit code.
pub fn run_command(cli: &Cli) -> Outcome {
    let name = command_name(&cli.command);
    match dispatch(cli) {
        Ok((mut body, exit_code)) => {
            body["command"] = json!(name);
            body["status"] = json!(if exit_code == 0 { "ok" } else { "failed" });
            Outcome {
                report: body,
                exit_code,
            }
        }
        Err(e) => Outcome {
            report: json!({
                "command": name,
                "status": "error",
                "error": {"kind": e.kind(), "message": e.to_string(), "exit_code": e.exit_code()},
            }),
            exit_code: e.exit_code(),
        },
    }
}

/// Parses arguments and runs; usage errors print to stderr and give code 2.
pub fn run<I, T>(args: I) -> (String, i32)
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => {
            let out = run_command(&cli);
            (out.render(), out.exit_code)
        }
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            (e.render().to_string(), code)
        }
    }
}

fn dispatch(cli: &Cli) -> Result<(Value, i32)> {
    let opts = &cli.opts;
    match &cli.command {
        Command::Validate { file } => validate(&load(file, opts)?).map(ok),
        Command::Spectrum {
            file,
            degree,
            bruno_levels,
        } => spectrum(&load(file, opts)?, *degree, *bruno_levels, opts.csv.as_deref()).map(ok),
        Command::Normalize { file } => {
            let nf = run_normalize(&load(file, opts)?)?;
            Ok(ok(json!({
                "normal_form": report::normal_form(&nf),
                "warnings": report::warnings(&nf.warnings),
            })))
        }
        Command::Invariants { file } => {
            let nf = run_normalize(&load(file, opts)?)?;
            let rec = InvariantRecord::from_normal_form(&nf)?;
            Ok(ok(json!({
                "invariants": report::record(&rec),
                "modular_period": modular_period(&rec)?,
                "warnings": report::warnings(&nf.warnings),
            })))
        }
        Command::Equiv { a, b, tol } => {
            let na = run_normalize(&load(a, opts)?)?;
            let nb = run_normalize(&load(b, opts)?)?;
            let (ra, rb) = (
                InvariantRecord::from_normal_form(&na)?,
                InvariantRecord::from_normal_form(&nb)?,
            );
            let e = equivalent(&ra, &rb, *tol);
            let summary = match (&e.permutation, &e.failing) {
                (Some(p), _) => format!("equivalent, permutation {}", report::permutation_notation(p)),
                (None, Some(f)) => format!("not equivalent, {} differs", serde_json::to_value(f).unwrap_or_default().as_str().unwrap_or("invariant")),
                (None, None) => "not equivalent".to_string(),
            };
            let mut warnings = na.warnings.clone();
            warnings.extend(nb.warnings.iter().cloned());
            Ok(ok(json!({
                "summary": summary,
                "equivalent": e.equivalent,
                "permutation": e.permutation.as_ref().map(|p| p.iter().map(|i| i + 1).collect::<Vec<_>>()),
                "failing": e.failing,
                "tolerance": tol,
                "first": report::record(&ra),
                "second": report::record(&rb),
                "warnings": report::warnings(&warnings),
            })))
        }
        Command::Foliation { file } => {
            let nf = run_normalize(&load(file, opts)?)?;
            let fol = classify_holonomy(&nf.mu, &nf.a, DEFAULT_FOLIATION_TOL)?;
            let mut warnings = nf.warnings.clone();
            warnings.extend(fol.warnings.iter().cloned());
            Ok(ok(json!({
                "foliation": report::foliation(&fol),
                "summary": report::foliation_summary(&fol),
                "mu": nf.mu,
                "a": nf.a_rows(),
                "covered": nf.covered,
                "strata": stratification(&nf.mu, &nf.a),
                "warnings": report::warnings(&warnings),
            })))
        }
        Command::Leaf { file, x0, samples } => {
            let x0 = parse_point(x0)?;
            leaf(&load(file, opts)?, &x0, *samples, opts.csv.as_deref()).map(ok)
        }
        Command::Oracle { file, samples } => oracle(&load(file, opts)?, *samples),
        Command::Selftest { cases } => selftest(opts, *cases),
    }
}

fn ok(v: Value) -> (Value, i32) {
    (v, 0)
}

fn parse_point(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| Error::Schema(format!("'{v}' in x0 is not a number")))
        })
        .collect()
}

fn run_normalize(pr: &Problem) -> Result<NormalForm> {
    normalize(&pr.structure, &pr.config)
}

fn validate(pr: &Problem) -> Result<Value> {
    let p = &pr.structure;
    let jac = jacobiator(p);
    let tol = &pr.config.tol;
    let mut warnings = Vec::new();
    let tail = p.tail_energy();
    if tail > 1e-10 {
        warnings.push(crate::normalize::Warning::new(
            "tail-energy",
            "coefficients are not resolved by the grid",
            tail,
        ));
    }
    let lp = linear_part(p, tol.structural)?;
    let poisson = jac.norm <= tol.jacobi;
    Ok(json!({
        "n": p.nvars(),
        "order": p.order(),
        "grid": p.grid(),
        "poisson": poisson,
        "jacobi_norm": jac.norm,
        "jacobi_tolerance": tol.jacobi,
        "max_constant_term": p.max_constant_term(),
        "tail_energy": tail,
        "linear_part": {
            "max_u": lp.max_u,
            "dual_of_nonresonant": lp.dual_of_nonresonant,
            "has_higher_order": lp.has_higher_order,
        },
        "warnings": report::warnings(&warnings),
    }))
    .and_then(|v| {
        if poisson {
            Ok(v)
        } else {
            Err(Error::NotPoisson {
                norm: jac.norm,
                tol: tol.jacobi,
            })
        }
    })
}

fn spectrum(pr: &Problem, degree: u32, levels: u32, csv: Option<&Path>) -> Result<Value> {
    let lp = linear_part(&pr.structure, pr.config.tol.structural)?;
    let spec = eigen_continuation(&lp.h, pr.config.tol.spectral)?;
    let tol = pr.config.tol.resonance.unwrap_or_else(|| default_tolerance(&spec.lambda));
    let nr = check_nonresonance(&spec.lambda, degree, tol);
    let bruno = bruno_omega(&spec.lambda, levels, tol, pr.flags.paper_literal_bruno);
    let mut warnings = Vec::new();
    if nr.min_gap < crate::spectral::SMALL_DIVISOR && nr.is_ok() {
        warnings.push(crate::normalize::Warning::new(
            "small-divisor",
            "a resonance gap is small but above tolerance",
            nr.min_gap,
        ));
    }
    let bruno_value = match &bruno {
        Ok(b) => {
            if let Some(path) = csv {
                let (h, d) = report::bruno_table(b);
                report::write_csv(path, &h, &d)?;
            }
            json!(b)
        }
        Err(e) => json!({"error": e.to_string()}),
    };
    Ok(json!({
        "lambda": spec.lambda,
        "monodromy": spec.monodromy,
        "trivial_bundles": spec.is_trivial(),
        "min_gap": spec.min_gap,
        "k": {"min": spec.k.min(), "max": spec.k.max(), "mean": spec.k.mean()},
        "nonresonance": nr,
        "bruno": bruno_value,
        "csv": csv.map(|p| p.display().to_string()),
        "warnings": report::warnings(&warnings),
    }))
}

/// Deterministic parameter samples: the circle parameter sweeps `[0, 2π)`
/// and the others fill `[-1, 1]` along a Kronecker sequence.
pub fn leaf_parameters(leaf: &Leaf, count: usize) -> Vec<Vec<f64>> {
    let alphas = [2f64.sqrt(), 3f64.sqrt(), 5f64.sqrt(), 7f64.sqrt(), 11f64.sqrt(), 13f64.sqrt()];
    (0..count)
        .map(|k| {
            let s = k as f64 + 0.5;
            (0..leaf.dim())
                .map(|j| {
                    if j == 0 {
                        2.0 * std::f64::consts::PI * s / count as f64
                    } else {
                        2.0 * (s * alphas[(j - 1) % alphas.len()]).fract() - 1.0
                    }
                })
                .collect()
        })
        .collect()
}

fn normal_structure(nf: &NormalForm) -> Result<PoissonStructure> {
    PoissonStructure::normal_form(&nf.mu, &nf.a, nf.structure.order(), nf.structure.grid())
}

fn leaf(pr: &Problem, x0: &[f64], samples: usize, csv: Option<&Path>) -> Result<Value> {
    let nf = run_normalize(pr)?;
    let fol = classify_holonomy(&nf.mu, &nf.a, DEFAULT_FOLIATION_TOL)?;
    let leaf = leaf_through(x0, &fol)?;
    let params = leaf_parameters(&leaf, samples);
    let tangency = leaf_tangency(&normal_structure(&nf)?, &leaf, &params);
    let (header, data) = report::leaf_table(&leaf, &params);
    let table = if let Some(path) = csv {
        report::write_csv(path, &header, &data)?;
        json!({"csv": path.display().to_string(), "rows": data.len()})
    } else {
        json!({"header": header, "rows": data})
    };
    Ok(json!({
        "x0": x0,
        "case": report::case_label(fol.case),
        "leaf_dim": leaf.dim(),
        "leaf_space": fol.leaf_space,
        "directions": report::matrix_rows(leaf.directions()),
        "holonomy_endpoint": leaf.holonomy_endpoint(),
        "tangency": tangency,
        "samples": table,
        "warnings": report::warnings(&fol.warnings),
    }))
}

fn holonomy_check(q: &PoissonStructure, fol: &FoliationReport, x0: &[f64], integrator: &Integrator) -> Result<Value> {
    let leaf = leaf_through(x0, fol)?;
    let predicted = leaf.holonomy_endpoint().expect("case with holonomy");
    let integrated = holonomy_continuation(q, fol, x0, integrator)?;
    let rel = predicted
        .iter()
        .zip(&integrated)
        .fold(0.0f64, |m, (p, i)| m.max((p - i).abs() / p.abs()));
    Ok(json!({"x0": x0, "predicted": predicted, "integrated": integrated, "relative_error": rel}))
}

fn oracle(pr: &Problem, samples: usize) -> Result<(Value, i32)> {
    let nf = run_normalize(pr)?;
    let rec = InvariantRecord::from_normal_form(&nf)?;
    let integrator = Integrator::default();
    let period_ode = modular_period_ode(&pr.structure, &integrator)?;
    let period_rel = (period_ode - rec.base_period).abs() / rec.base_period.abs();

    let q = normal_structure(&nf)?;
    let fol = classify_holonomy(&nf.mu, &nf.a, DEFAULT_FOLIATION_TOL)?;
    let x0 = vec![1.0; nf.n];
    let leaf = leaf_through(&x0, &fol)?;
    let params = leaf_parameters(&leaf, samples);
    let tangency = leaf_tangency(&q, &leaf, &params);
    let ev = q.evaluator();
    let ranks: Vec<usize> = params
        .iter()
        .map(|t| {
            let (theta, x) = leaf.eval(t);
            numeric_rank(&ev, theta, &x, 1e-9)
        })
        .collect();
    let holonomy = match fol.case {
        HolonomyCase::MuInImage => Some(holonomy_check(&q, &fol, &x0, &integrator)?),
        HolonomyCase::MuNotInImage => None,
    };
    let holonomy_ok = holonomy
        .as_ref()
        .is_none_or(|h| h["relative_error"].as_f64().is_some_and(|e| e < 1e-6));
    let pass = period_rel < 1e-6
        && tangency.max_residual < 1e-8
        && ranks.iter().all(|&r| r == fol.leaf_dim)
        && holonomy_ok;
    Ok((
        json!({
            "modular_period": {"integrated": period_ode, "predicted": rec.base_period, "relative_error": period_rel},
            "tangency": tangency,
            "ranks": {"predicted": fol.leaf_dim, "observed_min": ranks.iter().min(), "observed_max": ranks.iter().max()},
            "holonomy": holonomy,
            "pass": pass,
            "warnings": report::warnings(&nf.warnings),
        }),
        if pass { 0 } else { 1 },
    ))
}

fn selftest(opts: &GlobalOpts, cases: usize) -> Result<(Value, i32)> {
    let mut rng = sampling::rng(opts.seed);
    let order = opts.order.unwrap_or(4);
    let grid = opts.grid.unwrap_or(128);
    let mut results = Vec::new();
    let mut all = true;
    for case in 0..cases {
        let n = 2 + case % 2;
        let mu = sampling::nonresonant_mu(&mut rng, n);
        let a = sampling::skew(&mut rng, n, 5.0);
        let phi = sampling::fibered_diffeo(&mut rng, n, order, grid, 0.3);
        let p0 = PoissonStructure::normal_form(&mu, &a, order, grid)?;
        let p = transform(&p0, &phi)?;
        let entry = match normalize(&p, &Default::default()) {
            Ok(nf) => {
                let mu_err = mu.iter().zip(&nf.mu).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
                let a_err = a.iter().zip(&nf.a).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
                let pass = mu_err < 1e-8 && a_err < 1e-7 && nf.diagnostics.jacobi_residual < 1e-9;
                all &= pass;
                json!({"n": n, "mu": mu, "mu_error": mu_err, "a_error": a_err,
                       "jacobi": nf.diagnostics.jacobi_residual, "pass": pass})
            }
            Err(e) => {
                all = false;
                json!({"n": n, "mu": mu, "error": e.to_string(), "pass": false})
            }
        };
        results.push(entry);
    }
    Ok((
        json!({"seed": opts.seed, "order": order, "grid": grid, "cases": results, "pass": all}),
        if all { 0 } else { 1 },
    ))
}
