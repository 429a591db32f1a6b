//! Subcommand runners. Each returns its tables and writes them under the
//! output directory.

use std::path::{Path, PathBuf};

use gs_operators::bounds::{order_sweep, Verifier};
use gs_operators::function::{FnIntegrand, Growth};
use gs_operators::{
    apply_base, apply_bezier, Catalogue, Error, MomentRequest, Mu4Form, OperatorParams,
    TestFunction, Theorem,
};
use log::{info, warn};
use rayon::prelude::*;

use crate::config::{sample_cells, ExperimentConfig};
use crate::output::{num, write_csv, write_plot_data, Table};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Eval,
    Moments,
    Verify,
    Order,
    Catalogue,
}

/// What a run produced.
#[derive(Debug, Clone, Default)]
pub struct RunOutcome {
    pub files: Vec<PathBuf>,
    pub tables: Vec<(String, Table)>,
    /// Complete reports whose error exceeded the bound.
    pub violations: usize,
    pub summary: String,
}

impl RunOutcome {
    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|(n, _)| n == name).map(|(_, t)| t)
    }
}

pub fn run(cmd: Command, cfg: &ExperimentConfig, out_dir: &Path) -> Result<RunOutcome, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.output.workers)
        .build()
        .map_err(|e| CliError::Config(format!("cannot build worker pool: {e}")))?;
    let catalogue = Catalogue::builtin();
    let hash = cfg.hash();
    let mut out = pool.install(|| match cmd {
        Command::Eval => eval(cfg, &catalogue),
        Command::Moments => moments(cfg),
        Command::Verify => verify(cfg, &catalogue),
        Command::Order => order(cfg, &catalogue),
        Command::Catalogue => Ok(listing(&catalogue)),
    })?;
    for (name, table) in &out.tables {
        let path = if name.ends_with(".dat") {
            write_plot_data(out_dir, name, &hash, table)?
        } else {
            write_csv(out_dir, name, &hash, table)?
        };
        out.files.push(path);
    }
    Ok(out)
}

/// Valid `(params, x)` pairs in grid order; invalid combinations are logged
/// and skipped.
fn param_cells(cfg: &ExperimentConfig, alphas: &[f64]) -> Vec<(OperatorParams, f64)> {
    let g = &cfg.grid;
    let mut cells = Vec::new();
    for &n in &g.n {
        for &m in &g.m {
            for &c in &g.c {
                for &alpha in alphas {
                    let p = match OperatorParams::new(n, m, c, alpha) {
                        Ok(p) => p,
                        Err(e) => {
                            info!("skipping n={n} m={m} c={c} alpha={alpha}: {e}");
                            continue;
                        }
                    };
                    for &x in &g.x {
                        if p.c.contains(x) {
                            cells.push((p, x));
                        } else {
                            info!("skipping x={x} outside the domain for c={c}");
                        }
                    }
                }
            }
        }
    }
    cells
}

fn functions<'a>(cfg: &ExperimentConfig, catalogue: &'a Catalogue) -> Result<Vec<&'a TestFunction>, CliError> {
    cfg.grid
        .functions
        .iter()
        .map(|id| catalogue.get(id).map_err(|e| CliError::Config(e.to_string())))
        .collect()
}

fn integrable(f: &TestFunction, p: &OperatorParams) -> bool {
    match p.check_growth(f.growth.order) {
        Ok(()) => true,
        Err(e) => {
            info!("skipping {} at n={} m={} c={}: {e}", f.id, p.n, p.m, p.c);
            false
        }
    }
}

fn param_columns(p: &OperatorParams) -> [String; 4] {
    [p.n.to_string(), p.m.to_string(), p.c.to_string(), num(p.alpha.value())]
}

fn first_error<T>(results: Vec<Result<T, Error>>) -> Result<Vec<T>, CliError> {
    results.into_iter().collect::<Result<Vec<_>, _>>().map_err(CliError::Numerical)
}

fn eval(cfg: &ExperimentConfig, catalogue: &Catalogue) -> Result<RunOutcome, CliError> {
    let fs = functions(cfg, catalogue)?;
    let mut cells = Vec::new();
    for f in &fs {
        for (p, x) in param_cells(cfg, &cfg.grid.alpha) {
            if integrable(f, &p) {
                cells.push((*f, p, x));
            }
        }
    }
    let cells = sample_cells(cells, &cfg.grid);
    let (q, t) = (&cfg.quadrature, &cfg.truncation);
    let rows = first_error(
        cells
            .par_iter()
            .map(|&(f, p, x)| {
                let base = apply_base(&p.base(), f, x, q, t)?;
                let bez = apply_bezier(&p, f, x, q, t)?;
                let target = f.eval(x);
                let mut row = vec![f.id.clone()];
                row.extend(param_columns(&p));
                row.extend([
                    num(x),
                    num(base.value),
                    num(base.error),
                    num(bez.value),
                    num(bez.error),
                    num(target),
                    num((base.value - target).abs()),
                    num((bez.value - target).abs()),
                    num((base.value - bez.value).abs()),
                ]);
                Ok(row)
            })
            .collect(),
    )?;
    let mut table = Table::new(vec![
        "function",
        "n",
        "m",
        "c",
        "alpha",
        "x",
        "base_value",
        "base_error",
        "bezier_value",
        "bezier_error",
        "target",
        "base_gap",
        "bezier_gap",
        "reduction_gap",
    ]);
    table.rows = rows;
    Ok(RunOutcome {
        summary: format!("{} rows", table.rows.len()),
        tables: vec![("eval.csv".into(), table)],
        ..Default::default()
    })
}

/// Relative agreement required between closed forms and quadrature.
pub const MOMENT_REL_TOL: f64 = 1e-7;
/// Absolute agreement accepted for moments near zero.
pub const MOMENT_ABS_TOL: f64 = 1e-9;

fn moments(cfg: &ExperimentConfig) -> Result<RunOutcome, CliError> {
    let cells = sample_cells(param_cells(cfg, &[1.0]), &cfg.grid);
    let mut jobs = Vec::new();
    for &(p, x) in &cells {
        for &k in &cfg.moments.orders {
            jobs.push((p, x, k, false));
            if k >= 2 {
                jobs.push((p, x, k, true));
            }
        }
    }
    let form = cfg.moments.mu4_form;
    let (q, t) = (&cfg.quadrature, &cfg.truncation);
    let rows: Vec<Option<Vec<String>>> = first_error(
        jobs.par_iter()
            .map(|&(p, x, k, central)| {
                let req = MomentRequest {
                    order: k,
                    central,
                    params: p,
                    x,
                };
                let closed = match req.evaluate(form) {
                    Ok(v) => v,
                    Err(Error::Domain(msg)) | Err(Error::InvalidParams(msg)) => {
                        info!("no closed form at n={} m={} c={} order {k}: {msg}", p.n, p.m, p.c);
                        return Ok(None);
                    }
                    Err(e) => return Err(e),
                };
                if p.check_growth(k as f64).is_err() {
                    info!("moment {k} not integrable at n={} m={} c={}", p.n, p.m, p.c);
                    return Ok(None);
                }
                let shift = if central { x } else { 0.0 };
                let integrand = FnIntegrand::new(
                    move |s: f64| (s - shift).powi(k as i32),
                    Growth {
                        order: k as f64,
                        constant: (2.0 * (1.0 + shift)).powi(k as i32),
                    },
                );
                let quad = apply_base(&p, &integrand, x, q, t)?;
                let gap = (quad.value - closed).abs();
                let rel = if closed != 0.0 { gap / closed.abs() } else { gap };
                let agrees = gap <= (MOMENT_REL_TOL * closed.abs()).max(MOMENT_ABS_TOL);
                let flag = if agrees {
                    ""
                } else if central && k == 4 && form == Mu4Form::AsPrinted && p.c.c() != 0 {
                    "printed_mu4_mismatch"
                } else {
                    "mismatch"
                };
                Ok(Some(vec![
                    p.n.to_string(),
                    p.m.to_string(),
                    p.c.to_string(),
                    num(x),
                    if central { "central" } else { "raw" }.to_string(),
                    k.to_string(),
                    num(closed),
                    num(quad.value),
                    num(quad.error),
                    num(gap),
                    num(rel),
                    flag.to_string(),
                ]))
            })
            .collect(),
    )?;
    let mut table = Table::new(vec![
        "n",
        "m",
        "c",
        "x",
        "kind",
        "order",
        "closed_form",
        "quadrature",
        "quadrature_error",
        "abs_gap",
        "rel_gap",
        "flag",
    ]);
    table.rows = rows.into_iter().flatten().collect();
    let flagged = table.rows.iter().filter(|r| !r[11].is_empty()).count();
    Ok(RunOutcome {
        summary: format!("{} rows, {flagged} flagged", table.rows.len()),
        tables: vec![("moments.csv".into(), table)],
        ..Default::default()
    })
}

fn verify(cfg: &ExperimentConfig, catalogue: &Catalogue) -> Result<RunOutcome, CliError> {
    let fs = functions(cfg, catalogue)?;
    let cells = sample_cells(param_cells(cfg, &cfg.grid.alpha), &cfg.grid);
    let mut table = Table::new(vec![
        "theorem",
        "function",
        "n",
        "m",
        "c",
        "alpha",
        "x",
        "operator_value",
        "target",
        "empirical_error",
        "tolerance",
        "bound_value",
        "ratio",
        "complete",
        "satisfied",
        "components",
    ]);
    let mut summary = Table::new(vec![
        "theorem",
        "function",
        "cells",
        "satisfied",
        "violated",
        "incomplete",
        "worst_ratio",
    ]);
    let mut violations = 0;
    for &th in &cfg.verify.theorems {
        for f in &fs {
            if !f.has_class(th.required_class()) {
                info!("skipping {} for {}: lacks the {} class", f.id, th.tag(), th.required_class());
                continue;
            }
            let v = Verifier::new(f, th, cfg.verify.bounds, cfg.quadrature, cfg.truncation)
                .map_err(CliError::Numerical)?;
            let needs_interior = matches!(th, Theorem::Lipschitz | Theorem::BoundedVariation);
            let mine: Vec<_> = cells
                .iter()
                .filter(|(p, x)| integrable(f, p) && !(needs_interior && *x == 0.0))
                .collect();
            let reports = first_error(mine.par_iter().map(|(p, x)| v.cell(p, *x)).collect())?;
            let (mut ok, mut bad, mut partial, mut worst) = (0usize, 0usize, 0usize, 0.0f64);
            for r in &reports {
                if !r.complete {
                    partial += 1;
                } else if r.satisfied {
                    ok += 1;
                    worst = worst.max(r.ratio());
                } else {
                    bad += 1;
                    worst = worst.max(r.ratio());
                }
                let comps: Vec<String> = r.components.iter().map(|c| format!("{}={}", c.name, num(c.value))).collect();
                let mut row = vec![th.tag().to_string(), f.id.clone()];
                row.extend(param_columns(&r.params));
                row.extend([
                    num(r.x),
                    num(r.operator_value),
                    num(r.target),
                    num(r.empirical_error),
                    num(r.tolerance),
                    num(r.bound_value),
                    num(r.ratio()),
                    r.complete.to_string(),
                    r.satisfied.to_string(),
                    comps.join(";"),
                ]);
                table.push(row);
            }
            if bad > 0 {
                warn!("{}: {} violation(s) for {}", th.tag(), bad, f.id);
            }
            violations += bad;
            summary.push(vec![
                th.tag().to_string(),
                f.id.clone(),
                reports.len().to_string(),
                ok.to_string(),
                bad.to_string(),
                partial.to_string(),
                num(worst),
            ]);
        }
    }
    let text = summary
        .rows
        .iter()
        .map(|r| format!("{:<18} {:<16} cells={:<5} violated={:<3} incomplete={:<4} worst_ratio={}", r[0], r[1], r[2], r[4], r[5], r[6]))
        .collect::<Vec<_>>()
        .join("\n");
    Ok(RunOutcome {
        tables: vec![("verify.csv".into(), table), ("verify_summary.csv".into(), summary)],
        violations,
        summary: text,
        ..Default::default()
    })
}

fn order(cfg: &ExperimentConfig, catalogue: &Catalogue) -> Result<RunOutcome, CliError> {
    let fs = functions(cfg, catalogue)?;
    let ns = &cfg.order.n;
    let first = *ns.first().ok_or_else(|| CliError::Config("order.n is empty".into()))?;
    let mut jobs = Vec::new();
    for f in &fs {
        for &m in &cfg.grid.m {
            for &c in &cfg.grid.c {
                for &alpha in &cfg.grid.alpha {
                    let Ok(p) = OperatorParams::new(first, m, c, alpha) else {
                        info!("skipping m={m} c={c} alpha={alpha} at n={first}");
                        continue;
                    };
                    if !integrable(f, &p) {
                        continue;
                    }
                    for &x in &cfg.grid.x {
                        if p.c.contains(x) {
                            jobs.push((*f, p, x));
                        }
                    }
                }
            }
        }
    }
    let (q, t) = (&cfg.quadrature, &cfg.truncation);
    let results = first_error(
        jobs.par_iter()
            .map(|&(f, p, x)| order_sweep(&p, f, x, ns, q, t).map(|(errs, fit)| (f, p, x, errs, fit)))
            .collect(),
    )?;
    let mut fits = Table::new(vec![
        "function",
        "m",
        "c",
        "alpha",
        "x",
        "status",
        "slope",
        "intercept",
        "r_squared",
        "points",
    ]);
    let mut plot = Table::new(vec!["function", "m", "c", "alpha", "x", "n", "log_n", "log_error"]);
    for (f, p, x, errs, fit) in results {
        let key = [f.id.clone(), p.m.to_string(), p.c.to_string(), num(p.alpha.value()), num(x)];
        let mut row = key.to_vec();
        match fit {
            Ok(fit) => row.extend([
                "fit".to_string(),
                num(fit.fitted_slope),
                num(fit.intercept),
                num(fit.r_squared),
                ns.len().to_string(),
            ]),
            Err(Error::DegenerateFit(msg)) => {
                info!("{} at x={x}: {msg}", f.id);
                row.extend(["floor".to_string(), "nan".into(), "nan".into(), "nan".into(), ns.len().to_string()]);
            }
            Err(e) => return Err(CliError::Numerical(e)),
        }
        fits.push(row);
        for (&n, &e) in ns.iter().zip(&errs) {
            let mut r = key.to_vec();
            r.extend([n.to_string(), num((n as f64).ln()), num(e.ln())]);
            plot.push(r);
        }
    }
    Ok(RunOutcome {
        summary: format!("{} fits", fits.rows.len()),
        tables: vec![("order.csv".into(), fits), ("order_plot.dat".into(), plot)],
        ..Default::default()
    })
}

fn listing(catalogue: &Catalogue) -> RunOutcome {
    let mut table = Table::new(vec![
        "id",
        "formula",
        "growth_order",
        "growth_constant",
        "classes",
        "support_end",
        "description",
    ]);
    for f in &catalogue.functions {
        let classes: Vec<&str> = f.classes.iter().map(|c| c.tag()).collect();
        table.push(vec![
            f.id.clone(),
            f.formula.kind().to_string(),
            num(f.growth.order),
            num(f.growth.constant),
            classes.join(";"),
            f.support_end().map(num).unwrap_or_default(),
            f.description.clone(),
        ]);
    }
    let summary = table
        .rows
        .iter()
        .map(|r| format!("{:<16} {:<32} {}", r[0], r[4], r[6]))
        .collect::<Vec<_>>()
        .join("\n");
    RunOutcome {
        summary,
        tables: vec![("catalogue.csv".into(), table)],
        ..Default::default()
    }
}
