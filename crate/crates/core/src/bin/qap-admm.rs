//! Command-line harness: solve individual instance files or a directory
//! batch and emit bound reports.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};

use qap_admm::admm::{Polytope, RankMode};
use qap_admm::relaxation::BasisVariant;
use qap_admm::report::{
    load_reference, run_batch, run_instance, to_csv, to_json, to_table, BoundReport, OutputFormat,
    ReferenceRow, RunConfig,
};

#[derive(Parser)]
#[command(name = "qap-admm", version, about = "Certified QAP bounds via an ADMM SDP solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one or more instance files.
    Solve {
        /// QAPLIB-format .dat files.
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        #[command(flatten)]
        opts: SolveOpts,
    },
    /// Solve every .dat file in a directory.
    Batch {
        dir: PathBuf,
        #[command(flatten)]
        opts: SolveOpts,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum PolytopeArg {
    P1,
    P2,
}

#[derive(Clone, Copy, ValueEnum)]
enum BasisArg {
    Dense,
    Sparse,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
    Human,
}

#[derive(Args)]
struct SolveOpts {
    /// Stopping tolerance on the max ADMM residual.
    #[arg(long, default_value_t = 1e-5)]
    tol: f64,
    #[arg(long, default_value_t = 50_000)]
    max_iters: usize,
    /// Penalty parameter; defaults to n/3.
    #[arg(long)]
    beta: Option<f64>,
    /// Dual step scale in (0, 1.618035].
    #[arg(long, default_value_t = 1.618)]
    gamma: f64,
    /// Polyhedral Y-step: p1 = gangster manifold, p2 = with [0,1] box.
    #[arg(long, value_enum, default_value_t = PolytopeArg::P2)]
    polytope: PolytopeArg,
    /// R-step rank: "full" or "low" (rank 1) or "low:R".
    #[arg(long, default_value = "full")]
    rank: String,
    #[arg(long, value_enum, default_value_t = BasisArg::Dense)]
    basis: BasisArg,
    #[arg(long, value_enum, default_value_t = FormatArg::Human)]
    format: FormatArg,
    /// Per-instance wall-clock limit in seconds.
    #[arg(long)]
    time_limit: Option<f64>,
    /// CSV with columns name,opt,bundle adding gap and improvement columns.
    #[arg(long)]
    reference: Option<PathBuf>,
}

fn parse_rank(s: &str) -> Result<RankMode, String> {
    match s {
        "full" => Ok(RankMode::Full),
        "low" => Ok(RankMode::Low(1)),
        other => {
            if let Some(r) = other.strip_prefix("low:") {
                let r: usize = r
                    .parse()
                    .map_err(|_| format!("invalid rank bound in --rank {other:?}"))?;
                if r == 0 {
                    return Err("rank bound must be at least 1".into());
                }
                Ok(RankMode::Low(r))
            } else {
                Err(format!("--rank must be full, low, or low:R, got {other:?}"))
            }
        }
    }
}

fn build_config(opts: &SolveOpts) -> Result<(RunConfig, OutputFormat, Vec<ReferenceRow>), String> {
    let rank_mode = parse_rank(&opts.rank)?;
    let config = RunConfig {
        tol: opts.tol,
        max_iters: opts.max_iters,
        beta: opts.beta,
        gamma: opts.gamma,
        polytope: match opts.polytope {
            PolytopeArg::P1 => Polytope::GangsterManifold,
            PolytopeArg::P2 => Polytope::GangsterBox,
        },
        rank_mode,
        basis: match opts.basis {
            BasisArg::Dense => BasisVariant::DenseQr,
            BasisArg::Sparse => BasisVariant::SparseKronecker,
        },
        time_limit: opts.time_limit.map(Duration::from_secs_f64),
        ..RunConfig::default()
    };
    config.admm_config().validate().map_err(|e| e.to_string())?;
    let format = match opts.format {
        FormatArg::Csv => OutputFormat::Csv,
        FormatArg::Json => OutputFormat::Json,
        FormatArg::Human => OutputFormat::Human,
    };
    let reference = match &opts.reference {
        Some(path) => load_reference(path).map_err(|e| e.to_string())?,
        None => Vec::new(),
    };
    Ok((config, format, reference))
}

fn emit(reports: &[BoundReport], format: OutputFormat) -> Result<(), String> {
    let text = match format {
        OutputFormat::Csv => to_csv(reports).map_err(|e| e.to_string())?,
        OutputFormat::Json => to_json(reports).map_err(|e| e.to_string())?,
        OutputFormat::Human => to_table(reports),
    };
    print!("{text}");
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (paths, opts, is_batch) = match &cli.command {
        Command::Solve { paths, opts } => (paths.clone(), opts, false),
        Command::Batch { dir, opts } => (vec![dir.clone()], opts, true),
    };
    let (config, format, reference) = match build_config(opts) {
        Ok(v) => v,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };

    let mut reports = Vec::new();
    let mut had_failure = false;
    if is_batch {
        match run_batch(&paths[0], &config, &reference) {
            Ok((rows, failures)) => {
                if rows.is_empty() && failures.is_empty() {
                    eprintln!("warning: no .dat files found in {}", paths[0].display());
                }
                for (path, err) in failures {
                    eprintln!("error: {}: {err}", path.display());
                    had_failure = true;
                }
                reports = rows;
            }
            Err(e) => {
                eprintln!("error: {}: {e}", paths[0].display());
                return ExitCode::from(1);
            }
        }
    } else {
        for path in &paths {
            match run_instance(path, &config, &reference) {
                Ok(rep) => reports.push(rep),
                Err(e) => {
                    eprintln!("error: {}: {e}", path.display());
                    had_failure = true;
                }
            }
        }
        reports.sort_by(|a, b| a.name.cmp(&b.name));
    }

    if let Err(msg) = emit(&reports, format) {
        eprintln!("error: {msg}");
        return ExitCode::from(1);
    }
    if had_failure {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}
