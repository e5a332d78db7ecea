//! Certified lower bounds from the dual iterate and heuristic upper bounds
//! from eigenvector rounding.
//!
//! The lower bound is the dual function g evaluated at the projection of
//! the final Z onto the dual cone 𝒵 = {Z : V̂ᵀZV̂ ⪯ 0}; weak duality makes
//! it valid at any iterate, converged or not.

use ndarray::{s, Array1, Array2};

use crate::admm::AdmmState;
use crate::assign::max_assignment;
use crate::error::{Error, Result};
use crate::linalg::{eig_sym, fro_norm, orthonormal_complement, project_nsd};
use crate::qap::{Permutation, QapInstance};
use crate::relaxation::{GangsterIndexSet, LiftedBasis, LiftedObjective};

/// A dual-cone member together with its certified bound.
#[derive(Debug, Clone)]
pub struct DualCertificate {
    /// Projection of the solver's dual iterate onto 𝒵, original units.
    pub z_proj: Array2<f64>,
    /// g(z_proj): a valid lower bound on the QAP optimum.
    pub lower_bound: f64,
    /// λ_max(V̂ᵀ z_proj V̂), for audit; at most ~1e-9 by construction.
    pub cone_violation: f64,
}

/// A permutation rounded from the solver's primal iterate.
#[derive(Debug, Clone)]
pub struct RoundedSolution {
    /// Matrix reshaped from the leading eigenpair of Y.
    pub x_out: Array2<f64>,
    pub perm: Permutation,
    /// objective(inst, perm); an upper bound on the optimum.
    pub upper_bound: f64,
}

/// Frobenius-nearest point of 𝒵: express Z in the orthogonal frame
/// [V̂, V̂⊥], replace the leading block by its NSD projection, map back.
pub fn project_dual_cone(z: &Array2<f64>, basis: &LiftedBasis) -> Result<Array2<f64>> {
    let vhat = basis.vhat();
    let m = vhat.ncols();
    let big = vhat.nrows();
    if z.nrows() != big || z.ncols() != big {
        return Err(Error::Dimension(format!(
            "dual matrix is {}x{}, expected {big}x{big}",
            z.nrows(),
            z.ncols()
        )));
    }
    let gram = vhat.t().dot(vhat);
    if fro_norm(&(&gram - &Array2::<f64>::eye(m))) > 1e-10 * m as f64 {
        return Err(Error::Numerical("basis columns are not orthonormal".into()));
    }
    let comp = orthonormal_complement(vhat)?;
    let mut vbar = Array2::zeros((big, big));
    vbar.slice_mut(s![.., ..m]).assign(vhat);
    vbar.slice_mut(s![.., m..]).assign(&comp);

    let mut w = vbar.t().dot(z).dot(&vbar);
    let w11 = w.slice(s![..m, ..m]).to_owned();
    let w11_nsd = project_nsd(&w11)?;
    w.slice_mut(s![..m, ..m]).assign(&w11_nsd);
    Ok(vbar.dot(&w).dot(&vbar.t()))
}

/// Closed-form dual function over the gangster/box polytope:
/// with M = L_Q + Z, the minimizing Y puts 1 at (0,0), 1 on complement
/// entries where M is negative, 0 elsewhere.
pub fn dual_value(z: &Array2<f64>, lq_dense: &Array2<f64>, j: &GangsterIndexSet) -> f64 {
    let big = j.lifted_order();
    let mut g = lq_dense[[0, 0]] + z[[0, 0]];
    for a in 0..big {
        let d = lq_dense[[a, a]] + z[[a, a]];
        if a >= 1 && !j.contains(a, a) && d < 0.0 {
            g += d;
        }
        for b in (a + 1)..big {
            if !j.contains(a, b) {
                let m = lq_dense[[a, b]] + z[[a, b]];
                if m < 0.0 {
                    g += 2.0 * m;
                }
            }
        }
    }
    g
}

/// Certified lower bound from a completed (or truncated) solve.
pub fn lower_bound(
    state: &AdmmState,
    basis: &LiftedBasis,
    lq: &LiftedObjective,
    j: &GangsterIndexSet,
) -> Result<DualCertificate> {
    // the solver iterates on scale·L_Q; its dual divides back
    let z_orig = state.z.mapv(|v| v / state.scale);
    let z_proj = project_dual_cone(&z_orig, basis)?;
    let lq_dense = lq.assemble();
    let g = dual_value(&z_proj, &lq_dense, j);
    let reduced = basis.vhat().t().dot(&z_proj).dot(basis.vhat());
    let eig = eig_sym(&reduced)?;
    let cone_violation = eig.values[eig.values.len() - 1];
    if !g.is_finite() {
        return Err(Error::Numerical("dual bound is not finite".into()));
    }
    Ok(DualCertificate {
        z_proj,
        lower_bound: g,
        cone_violation,
    })
}

/// Integer strengthening of a real lower bound for integer-data instances:
/// the optimum is an integer, so any real bound rounds up (with a small
/// guard against floating-point overshoot).
pub fn integerized(lower_bound: f64) -> f64 {
    (lower_bound - 1e-6).ceil()
}

/// Reshapes the leading eigenpair of Y into an n×n matrix: first column of
/// λvvᵀ, minus the homogenization entry, unstacked columnwise.
pub fn extract_x_out(y: &Array2<f64>, n: usize) -> Result<Array2<f64>> {
    let big = n * n + 1;
    if y.nrows() != big || y.ncols() != big {
        return Err(Error::Dimension(format!(
            "primal matrix is {}x{}, expected {big}x{big}",
            y.nrows(),
            y.ncols()
        )));
    }
    let eig = eig_sym(y)?;
    let (lam, v) = eig.leading();
    if lam <= 0.0 {
        return Err(Error::Numerical(format!(
            "leading eigenvalue {lam:.3e} is not positive; solve degenerate"
        )));
    }
    let col: Array1<f64> = v.mapv(|x| lam * v[0] * x);
    let mut x_out = Array2::zeros((n, n));
    for jj in 0..n {
        for i in 0..n {
            x_out[[i, jj]] = col[1 + jj * n + i];
        }
    }
    Ok(x_out)
}

/// Maximizes ⟨X_out, X⟩ over permutation matrices by exact assignment.
pub fn round_to_permutation(x_out: &Array2<f64>) -> Result<Permutation> {
    Ok(max_assignment(x_out)?.1)
}

/// Objective value of the rounded permutation.
pub fn upper_bound(inst: &QapInstance, perm: &Permutation) -> Result<f64> {
    inst.objective(perm)
}

/// Full rounding pipeline from a solver state.
pub fn round_solution(state: &AdmmState, inst: &QapInstance) -> Result<RoundedSolution> {
    let x_out = extract_x_out(&state.y, inst.order())?;
    let perm = round_to_permutation(&x_out)?;
    let ub = upper_bound(inst, &perm)?;
    Ok(RoundedSolution {
        x_out,
        perm,
        upper_bound: ub,
    })
}
