//! Batch harness: runs the full pipeline on instance files and serializes
//! bound reports as CSV, JSON, or an aligned text table.

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::admm::{solve, AdmmConfig, DataScaling, Polytope, RankMode};
use crate::bounds::{integerized, lower_bound, round_solution};
use crate::error::{Error, Result};
use crate::qap::{parse_qaplib_file, QapInstance};
use crate::relaxation::{build_basis, build_gangster, build_objective, BasisVariant};

/// Output format for reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
    Human,
}

/// Harness configuration covering solver and reporting choices.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub tol: f64,
    pub max_iters: usize,
    /// Penalty override; default n/3.
    pub beta: Option<f64>,
    pub gamma: f64,
    pub polytope: Polytope,
    pub rank_mode: RankMode,
    pub basis: BasisVariant,
    pub scaling: DataScaling,
    pub time_limit: Option<Duration>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let admm = AdmmConfig::default();
        Self {
            tol: admm.tol,
            max_iters: admm.max_iters,
            beta: admm.beta,
            gamma: admm.gamma,
            polytope: admm.polytope,
            rank_mode: admm.rank_mode,
            basis: BasisVariant::DenseQr,
            scaling: admm.scaling,
            time_limit: admm.time_limit,
        }
    }
}

impl RunConfig {
    pub fn admm_config(&self) -> AdmmConfig {
        AdmmConfig {
            beta: self.beta,
            gamma: self.gamma,
            tol: self.tol,
            max_iters: self.max_iters,
            polytope: self.polytope,
            rank_mode: self.rank_mode,
            scaling: self.scaling,
            progress_every: 0,
            time_limit: self.time_limit,
        }
    }
}

/// One row of the output table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub name: String,
    pub n: usize,
    /// Raw certified bound g(𝒫_𝒵(Z)).
    pub lb_real: f64,
    /// ceil(lb_real − 1e-6) for integer-data instances, else lb_real.
    pub lb_int: f64,
    pub ub: f64,
    /// 100·(UB−LB)/max(1, |opt or UB|), LB taken as lb_int.
    pub gap_pct: f64,
    pub iters: usize,
    pub converged: bool,
    pub seconds: f64,
    pub tol: f64,
    pub polytope: String,
    pub rank_mode: String,
    pub basis: String,
    /// 100·(LB − bundle)/opt when a reference row is available.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub pct_impr: Option<f64>,
}

/// A known optimal value and external baseline bound for one instance,
/// joined from a reference CSV with columns name,opt,bundle.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReferenceRow {
    pub name: String,
    pub opt: f64,
    pub bundle: f64,
}

/// Loads a reference CSV (name,opt,bundle header row required).
pub fn load_reference(path: &Path) -> Result<Vec<ReferenceRow>> {
    let mut rdr = csv::Reader::from_path(path)
        .map_err(|e| Error::Parse(format!("reference file {}: {e}", path.display())))?;
    let mut rows = Vec::new();
    for rec in rdr.deserialize() {
        let row: ReferenceRow =
            rec.map_err(|e| Error::Parse(format!("reference file {}: {e}", path.display())))?;
        rows.push(row);
    }
    Ok(rows)
}

/// Runs the full pipeline on one already-parsed instance.
pub fn run_parsed(inst: &QapInstance, config: &RunConfig, reference: &[ReferenceRow]) -> Result<BoundReport> {
    run_parsed_detailed(inst, config, reference).map(|(report, _)| report)
}

/// Like [`run_parsed`] but also returns the rounded permutation image.
pub fn run_parsed_detailed(
    inst: &QapInstance,
    config: &RunConfig,
    reference: &[ReferenceRow],
) -> Result<(BoundReport, Vec<usize>)> {
    let start = Instant::now();
    let n = inst.order();
    let lq = build_objective(inst);
    let basis = build_basis(n, config.basis)?;
    let j = build_gangster(n)?;
    let state = solve(&lq, &basis, &j, &config.admm_config(), None)?;
    let cert = lower_bound(&state, &basis, &lq, &j)?;
    let rounded = round_solution(&state, inst)?;

    let lb_real = cert.lower_bound;
    let lb_int = if inst.is_integer_data() {
        integerized(lb_real)
    } else {
        lb_real
    };
    let ub = rounded.upper_bound;
    let reference_row = reference.iter().find(|r| r.name == inst.name());
    let denom = reference_row
        .map(|r| r.opt.abs())
        .unwrap_or_else(|| ub.abs())
        .max(1.0);
    let gap_pct = 100.0 * (ub - lb_int) / denom;
    let pct_impr = reference_row.map(|r| 100.0 * (lb_int - r.bundle) / r.opt.abs().max(1.0));

    let report = BoundReport {
        name: inst.name().to_string(),
        n,
        lb_real,
        lb_int,
        ub,
        gap_pct,
        iters: state.iter,
        converged: state.converged,
        seconds: start.elapsed().as_secs_f64(),
        tol: config.tol,
        polytope: config.polytope.to_string(),
        rank_mode: config.rank_mode.to_string(),
        basis: config.basis.to_string(),
        pct_impr,
    };
    Ok((report, rounded.perm.image().to_vec()))
}

/// Parses and runs one instance file.
pub fn run_instance(path: &Path, config: &RunConfig, reference: &[ReferenceRow]) -> Result<BoundReport> {
    let inst = parse_qaplib_file(path)?;
    run_parsed(&inst, config, reference)
}

/// Runs every .dat file in a directory, in parallel, rows name-sorted.
/// Per-instance failures are returned alongside successes so the batch
/// continues.
pub fn run_batch(
    dir: &Path,
    config: &RunConfig,
    reference: &[ReferenceRow],
) -> Result<(Vec<BoundReport>, Vec<(PathBuf, Error)>)> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.extension().map(|x| x == "dat").unwrap_or(false))
        .collect();
    files.sort();
    let results: Vec<(PathBuf, Result<BoundReport>)> = files
        .into_par_iter()
        .map(|p| {
            let r = run_instance(&p, config, reference);
            (p, r)
        })
        .collect();
    let mut reports = Vec::new();
    let mut failures = Vec::new();
    for (path, res) in results {
        match res {
            Ok(rep) => reports.push(rep),
            Err(e) => failures.push((path, e)),
        }
    }
    reports.sort_by(|a, b| a.name.cmp(&b.name));
    Ok((reports, failures))
}

/// Serializes reports as CSV with the fixed column schema.
pub fn to_csv(reports: &[BoundReport]) -> Result<String> {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    for r in reports {
        wtr.serialize(r)
            .map_err(|e| Error::Parse(format!("csv serialization: {e}")))?;
    }
    let bytes = wtr
        .into_inner()
        .map_err(|e| Error::Parse(format!("csv flush: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Error::Parse(format!("csv utf8: {e}")))
}

/// Parses CSV produced by [`to_csv`].
pub fn from_csv(text: &str) -> Result<Vec<BoundReport>> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let mut out = Vec::new();
    for rec in rdr.deserialize() {
        out.push(rec.map_err(|e| Error::Parse(format!("csv parse: {e}")))?);
    }
    Ok(out)
}

/// Serializes reports as pretty JSON.
pub fn to_json(reports: &[BoundReport]) -> Result<String> {
    serde_json::to_string_pretty(reports).map_err(|e| Error::Parse(format!("json: {e}")))
}

/// Renders an aligned text table.
pub fn to_table(reports: &[BoundReport]) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<10} {:>4} {:>14} {:>10} {:>10} {:>8} {:>8} {:>5} {:>9}\n",
        "name", "n", "lb_real", "lb_int", "ub", "gap%", "iters", "conv", "seconds"
    ));
    for r in reports {
        out.push_str(&format!(
            "{:<10} {:>4} {:>14.4} {:>10} {:>10} {:>8.2} {:>8} {:>5} {:>9.2}\n",
            r.name, r.n, r.lb_real, r.lb_int, r.ub, r.gap_pct, r.iters, r.converged, r.seconds
        ));
    }
    out
}
