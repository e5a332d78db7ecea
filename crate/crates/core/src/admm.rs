//! Three-block ADMM on the splitting Y = V̂RV̂ᵀ: PSD-cone R-step (optionally
//! rank-restricted), closed-form polyhedral Y-step, dual Z-ascent.

use std::time::{Duration, Instant};

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::linalg::{eig_sym, fro_norm, project_psd, project_rank_r_psd};
use crate::relaxation::{GangsterIndexSet, LiftedBasis, LiftedObjective};

/// Polyhedral constraint set for the Y-step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Polytope {
    /// P1: the gangster manifold {Y : 𝒢_J(Y) = E₀₀} alone.
    GangsterManifold,
    /// P2: the manifold intersected with the [0,1] box on the complement.
    GangsterBox,
}

impl std::fmt::Display for Polytope {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Polytope::GangsterManifold => "p1",
            Polytope::GangsterBox => "p2",
        })
    }
}

/// Rank restriction for the R-step projection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankMode {
    Full,
    Low(usize),
}

impl std::fmt::Display for RankMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RankMode::Full => f.write_str("full"),
            RankMode::Low(r) => write!(f, "low:{r}"),
        }
    }
}

/// Internal rescaling of the objective before iterating.
///
/// Normalizing ‖L_Q‖_F to 2(n²+1) makes the fixed β = n/3 effective across
/// instances whose raw data magnitudes differ by orders of magnitude; by the
/// scaling equivariance of the updates this is a change of effective penalty
/// only, and bounds are reported in original units.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DataScaling {
    None,
    #[default]
    NormalizedObjective,
}

/// Solver parameters.
#[derive(Debug, Clone)]
pub struct AdmmConfig {
    /// Penalty β; `None` resolves to n/3 at solve time.
    pub beta: Option<f64>,
    /// Dual step scale γ ∈ (0, (1+√5)/2].
    pub gamma: f64,
    /// Stopping tolerance on max(primal, dual) residual.
    pub tol: f64,
    pub max_iters: usize,
    pub polytope: Polytope,
    pub rank_mode: RankMode,
    pub scaling: DataScaling,
    /// Progress callback cadence in iterations; 0 disables.
    pub progress_every: usize,
    pub time_limit: Option<Duration>,
}

impl Default for AdmmConfig {
    fn default() -> Self {
        Self {
            beta: None,
            gamma: 1.618,
            tol: 1e-5,
            max_iters: 50_000,
            polytope: Polytope::GangsterBox,
            rank_mode: RankMode::Full,
            scaling: DataScaling::default(),
            progress_every: 0,
            time_limit: None,
        }
    }
}

impl AdmmConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(b) = self.beta {
            if !(b > 0.0) {
                return Err(Error::Config(format!("beta must be positive, got {b}")));
            }
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.618035) {
            return Err(Error::Config(format!(
                "gamma must lie in (0, 1.618035], got {}",
                self.gamma
            )));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Config(format!("tol must be positive, got {}", self.tol)));
        }
        if let RankMode::Low(r) = self.rank_mode {
            if r == 0 {
                return Err(Error::Config("rank bound must be at least 1".into()));
            }
        }
        Ok(())
    }
}

/// Snapshot handed to the progress callback.
#[derive(Debug, Clone, Copy)]
pub struct Progress {
    pub iter: usize,
    /// ⟨L_Q, Y⟩ in original (unscaled) units.
    pub objective: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
}

/// Final iterate and run statistics.
#[derive(Debug, Clone)]
pub struct AdmmState {
    /// Reduced primal variable, PSD, order (n−1)²+1.
    pub r: Array2<f64>,
    /// Lifted primal variable, order n²+1.
    pub y: Array2<f64>,
    /// Dual variable for the scaled objective; divide by `scale` for
    /// original units.
    pub z: Array2<f64>,
    pub iter: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    /// ⟨L_Q, Y⟩ per iteration, original units.
    pub objective_trace: Vec<f64>,
    pub converged: bool,
    /// Multiplier s with L_scaled = s·L_Q used inside the iteration.
    pub scale: f64,
    /// Effective β used (for the scaled objective).
    pub beta: f64,
}

/// R-step: project V̂ᵀ(Y + Z/β)V̂ onto the PSD cone, rank-restricted in
/// low-rank mode.
pub fn update_r(
    y: &Array2<f64>,
    z: &Array2<f64>,
    basis: &LiftedBasis,
    beta: f64,
    rank_mode: RankMode,
) -> Result<Array2<f64>> {
    let arg = y + &z.mapv(|v| v / beta);
    let w = basis.vhat().t().dot(&arg).dot(basis.vhat());
    match rank_mode {
        RankMode::Full => project_psd(&w),
        RankMode::Low(r) => project_rank_r_psd(&w, r),
    }
}

/// Y-step: with T = V̂R₊V̂ᵀ − (L_Q+Z)/β, returns E₀₀ + 𝒢_{J^c}(T), clamped
/// to [0,1] on the complement for the box polytope.
pub fn update_y(
    vrv: &Array2<f64>,
    z: &Array2<f64>,
    lq_dense: &Array2<f64>,
    j: &GangsterIndexSet,
    beta: f64,
    polytope: Polytope,
) -> Array2<f64> {
    let big = j.lifted_order();
    let mut y = Array2::zeros((big, big));
    for a in 0..big {
        for b in 0..big {
            if j.contains(a, b) {
                if a == 0 && b == 0 {
                    y[[a, b]] = 1.0;
                }
            } else {
                let t = vrv[[a, b]] - (lq_dense[[a, b]] + z[[a, b]]) / beta;
                y[[a, b]] = match polytope {
                    Polytope::GangsterManifold => t,
                    Polytope::GangsterBox => t.clamp(0.0, 1.0),
                };
            }
        }
    }
    y
}

/// Z-step: Z + γβ(Y₊ − V̂R₊V̂ᵀ).
pub fn update_z(
    z: &Array2<f64>,
    y_next: &Array2<f64>,
    vrv: &Array2<f64>,
    beta: f64,
    gamma: f64,
) -> Array2<f64> {
    let step = gamma * beta;
    let mut out = z.clone();
    out.zip_mut_with(&(y_next - vrv), |acc, &d| *acc += step * d);
    out
}

/// Initial R: the strictly feasible blkdiag(2, I/(n−1)) in the orthonormal
/// face coordinates, whose lifting satisfies the gangster constraints.
pub fn initial_r(n: usize) -> Array2<f64> {
    let red = (n - 1) * (n - 1) + 1;
    let mut r = Array2::zeros((red, red));
    r[[0, 0]] = 2.0;
    for k in 1..red {
        r[[k, k]] = 1.0 / (n as f64 - 1.0);
    }
    r
}

fn check_feasibility(
    y: &Array2<f64>,
    r: &Array2<f64>,
    j: &GangsterIndexSet,
    polytope: Polytope,
) -> Result<()> {
    let big = j.lifted_order();
    for a in 0..big {
        for b in 0..big {
            let v = y[[a, b]];
            if j.contains(a, b) {
                let expect = if a == 0 && b == 0 { 1.0 } else { 0.0 };
                if v != expect {
                    return Err(Error::Numerical(format!(
                        "gangster constraint violated at ({a},{b}): {v}"
                    )));
                }
            } else if polytope == Polytope::GangsterBox && !(-1e-15..=1.0 + 1e-15).contains(&v) {
                return Err(Error::Numerical(format!(
                    "box constraint violated at ({a},{b}): {v}"
                )));
            }
        }
    }
    let eig = eig_sym(r)?;
    let floor = -1e-9 * (1.0 + eig.spectral_norm());
    if eig.values[0] < floor {
        return Err(Error::Numerical(format!(
            "R-step produced an indefinite iterate: lambda_min = {:.3e}",
            eig.values[0]
        )));
    }
    Ok(())
}

/// Runs the ADMM iteration to the configured tolerance.
///
/// A non-converged return (iteration cap or time limit) is not an error:
/// the dual iterate still certifies a bound by weak duality. Divergence
/// (residual above 1e8) is.
pub fn solve(
    lq: &LiftedObjective,
    basis: &LiftedBasis,
    j: &GangsterIndexSet,
    config: &AdmmConfig,
    mut progress: Option<&mut dyn FnMut(&Progress)>,
) -> Result<AdmmState> {
    config.validate()?;
    let n = lq.order();
    if basis.order() != n || j.order() != n {
        return Err(Error::Dimension("solver inputs built for different orders".into()));
    }
    let big = lq.lifted_order();

    let lq_raw = lq.assemble();
    let raw_norm = fro_norm(&lq_raw);
    let scale = match config.scaling {
        DataScaling::None => 1.0,
        DataScaling::NormalizedObjective => {
            if raw_norm > 0.0 {
                2.0 * big as f64 / raw_norm
            } else {
                1.0
            }
        }
    };
    let lq_dense = lq_raw.mapv(|v| v * scale);
    let beta = config.beta.unwrap_or(n as f64 / 3.0);

    let r0 = initial_r(n);
    let mut y = basis.vhat().dot(&r0).dot(&basis.vhat().t());
    let mut z = Array2::zeros((big, big));
    let mut r = r0;

    let start = Instant::now();
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iter = 0usize;
    let mut primal = f64::INFINITY;
    let mut dual = f64::INFINITY;

    while iter < config.max_iters {
        iter += 1;
        r = update_r(&y, &z, basis, beta, config.rank_mode)?;
        let vrv = basis.vhat().dot(&r).dot(&basis.vhat().t());
        let y_next = update_y(&vrv, &z, &lq_dense, j, beta, config.polytope);
        let z_next = update_z(&z, &y_next, &vrv, beta, config.gamma);

        primal = fro_norm(&(&y_next - &vrv)) / (1.0 + fro_norm(&y_next));
        dual = beta * fro_norm(&(&y_next - &y)) / (1.0 + fro_norm(&z_next));
        y = y_next;
        z = z_next;

        let objective = lq_raw.iter().zip(y.iter()).map(|(a, b)| a * b).sum::<f64>();
        trace.push(objective);

        let residual = primal.max(dual);
        if !residual.is_finite() || residual > 1e8 {
            return Err(Error::Divergence(residual));
        }
        if cfg!(debug_assertions) || iter % 100 == 0 {
            check_feasibility(&y, &r, j, config.polytope)?;
        }
        if let Some(cb) = progress.as_deref_mut() {
            if config.progress_every > 0 && iter % config.progress_every == 0 {
                cb(&Progress {
                    iter,
                    objective,
                    primal_residual: primal,
                    dual_residual: dual,
                });
            }
        }
        if residual <= config.tol {
            converged = true;
            break;
        }
        if let Some(limit) = config.time_limit {
            if start.elapsed() >= limit {
                break;
            }
        }
    }

    Ok(AdmmState {
        r,
        y,
        z,
        iter,
        primal_residual: primal,
        dual_residual: dual,
        objective_trace: trace,
        converged,
        scale,
        beta,
    })
}
