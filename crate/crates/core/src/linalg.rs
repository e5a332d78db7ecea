//! Dense symmetric eigendecomposition and the cone projections built on it.
//!
//! Everything here is pure: inputs are borrowed, outputs are fresh arrays,
//! and no global state is touched, so calls are safe from any thread.

use ndarray::{Array1, Array2, ShapeBuilder};

use crate::error::{Error, Result};

/// Relative cutoff below which eigenvalues are treated as zero inside
/// projections, measured against the spectral norm of the input.
const EIG_ZERO_REL: f64 = 1e-12;

/// Full spectral decomposition of a symmetric matrix.
///
/// `values` ascend; column j of `vectors` is the eigenvector for
/// `values[j]`.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub values: Array1<f64>,
    pub vectors: Array2<f64>,
}

impl EigenDecomposition {
    /// Spectral norm of the decomposed matrix.
    pub fn spectral_norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
    }

    /// Largest eigenvalue with its eigenvector.
    pub fn leading(&self) -> (f64, Array1<f64>) {
        let j = self.values.len() - 1;
        (self.values[j], self.vectors.column(j).to_owned())
    }
}

fn symmetrized_colmajor(w: &Array2<f64>) -> Vec<f64> {
    let n = w.nrows();
    let mut buf = vec![0.0; n * n];
    for j in 0..n {
        for i in 0..n {
            buf[j * n + i] = 0.5 * (w[[i, j]] + w[[j, i]]);
        }
    }
    buf
}

/// Symmetric eigendecomposition via LAPACK divide and conquer.
///
/// The input is symmetrized as (W+Wᵀ)/2 before factoring; ADMM arithmetic
/// drifts symmetry at machine precision.
pub fn eig_sym(w: &Array2<f64>) -> Result<EigenDecomposition> {
    let n = w.nrows();
    if w.ncols() != n {
        return Err(Error::Dimension(format!(
            "eig_sym requires a square matrix, got {}x{}",
            n,
            w.ncols()
        )));
    }
    if w.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("eig_sym input has non-finite entries".into()));
    }
    let mut a = symmetrized_colmajor(w);
    let mut values = vec![0.0; n];
    let ni = n as i32;
    let mut info = 0;

    let mut work_query = [0.0];
    let mut iwork_query = [0];
    unsafe {
        lapack::dsyevd(
            b'V',
            b'L',
            ni,
            &mut a,
            ni,
            &mut values,
            &mut work_query,
            -1,
            &mut iwork_query,
            -1,
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Numerical(format!("dsyevd workspace query failed: info = {info}")));
    }
    let lwork = work_query[0] as usize;
    let liwork = iwork_query[0] as usize;
    let mut work = vec![0.0; lwork.max(1)];
    let mut iwork = vec![0; liwork.max(1)];
    unsafe {
        lapack::dsyevd(
            b'V',
            b'L',
            ni,
            &mut a,
            ni,
            &mut values,
            &mut work,
            lwork as i32,
            &mut iwork,
            liwork as i32,
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Numerical(format!("dsyevd failed to converge: info = {info}")));
    }
    let vectors = Array2::from_shape_vec((n, n).f(), a).expect("lapack buffer shape");
    Ok(EigenDecomposition {
        values: Array1::from_vec(values),
        vectors,
    })
}

/// Reassembles Σ f(λᵢ) qᵢqᵢᵀ for the eigenpairs selected by `keep`.
fn reassemble(
    eig: &EigenDecomposition,
    mut keep: impl FnMut(usize, f64) -> Option<f64>,
) -> Array2<f64> {
    let n = eig.vectors.nrows();
    let kept: Vec<(usize, f64)> = eig
        .values
        .iter()
        .enumerate()
        .filter_map(|(j, &lam)| keep(j, lam).map(|v| (j, v)))
        .collect();
    if kept.is_empty() {
        return Array2::zeros((n, n));
    }
    let mut scaled = Array2::zeros((n, kept.len()));
    let mut cols = Array2::zeros((n, kept.len()));
    for (k, &(j, lam)) in kept.iter().enumerate() {
        let q = eig.vectors.column(j);
        cols.column_mut(k).assign(&q);
        scaled.column_mut(k).assign(&q.mapv(|v| v * lam));
    }
    let out = scaled.dot(&cols.t());
    // exact symmetry keeps downstream eig inputs clean
    let mut sym = out.clone();
    sym.zip_mut_with(&out.t(), |a, &b| *a = 0.5 * (*a + b));
    sym
}

/// Projection onto the PSD cone: keep strictly positive eigenpairs.
pub fn project_psd(w: &Array2<f64>) -> Result<Array2<f64>> {
    let eig = eig_sym(w)?;
    let cut = EIG_ZERO_REL * eig.spectral_norm();
    Ok(reassemble(&eig, |_, lam| (lam > cut).then_some(lam)))
}

/// Projection onto the NSD cone, the Moreau complement of [`project_psd`].
pub fn project_nsd(w: &Array2<f64>) -> Result<Array2<f64>> {
    let eig = eig_sym(w)?;
    let cut = EIG_ZERO_REL * eig.spectral_norm();
    Ok(reassemble(&eig, |_, lam| (lam < -cut).then_some(lam)))
}

/// Projection onto PSD matrices of rank at most `r`: the top min(r, #positive)
/// eigenpairs, or the zero matrix when no eigenvalue is positive.
pub fn project_rank_r_psd(w: &Array2<f64>, r: usize) -> Result<Array2<f64>> {
    let n = w.nrows();
    if r == 0 {
        return Err(Error::Config("rank bound r must be at least 1".into()));
    }
    if r >= n {
        return project_psd(w);
    }
    if let Some(pairs) = top_eigenpairs(w, r, 1e-8)? {
        let m = pairs.values.len();
        let cut = EIG_ZERO_REL * pairs.spectral_norm();
        let mut out = Array2::zeros((n, n));
        for j in 0..m {
            let lam = pairs.values[j];
            if lam > cut {
                let q = pairs.vectors.column(j);
                for a in 0..n {
                    for b in 0..n {
                        out[[a, b]] += lam * q[a] * q[b];
                    }
                }
            }
        }
        return Ok(out);
    }
    // subspace iteration stalled (clustered spectrum); full factorization
    let eig = eig_sym(w)?;
    let cut = EIG_ZERO_REL * eig.spectral_norm();
    let n_eigs = eig.values.len();
    let first_kept = n_eigs - r;
    Ok(reassemble(&eig, |j, lam| {
        (j >= first_kept && lam > cut).then_some(lam)
    }))
}

/// Top-`r` algebraic eigenpairs by shifted subspace iteration.
///
/// Returns `None` when the iteration fails to reach the requested residual,
/// letting the caller fall back to a full factorization. Deterministic: the
/// starting block is built from coordinate vectors at the largest diagonal
/// entries.
pub fn top_eigenpairs(w: &Array2<f64>, r: usize, rel_tol: f64) -> Result<Option<EigenDecomposition>> {
    let n = w.nrows();
    if w.ncols() != n {
        return Err(Error::Dimension("top_eigenpairs requires a square matrix".into()));
    }
    if r >= n {
        return Ok(Some(eig_sym(w)?));
    }
    // Gershgorin shift makes the matrix PSD so the algebraically largest
    // eigenvalues are also largest in magnitude.
    let mut shift = 0.0f64;
    for i in 0..n {
        let mut row = 0.0;
        for j in 0..n {
            if i != j {
                row += w[[i, j]].abs();
            }
        }
        shift = shift.max(row - w[[i, i]]);
    }
    let shift = shift.max(0.0) + 1.0;
    let mut ws = w.clone();
    for i in 0..n {
        ws[[i, i]] += shift;
    }
    let scale = ws
        .iter()
        .fold(0.0f64, |acc, v| acc.max(v.abs()))
        .max(1.0);

    // block width r+2 speeds separation of the wanted r pairs
    let b = (r + 2).min(n);
    let mut diag_order: Vec<usize> = (0..n).collect();
    diag_order.sort_by(|&i, &j| {
        ws[[j, j]]
            .partial_cmp(&ws[[i, i]])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(i.cmp(&j))
    });
    let mut q = Array2::zeros((n, b));
    for (k, &i) in diag_order.iter().take(b).enumerate() {
        q[[i, k]] = 1.0;
    }
    // deterministic dense perturbation avoids starting orthogonal to a target
    for k in 0..b {
        for i in 0..n {
            q[[i, k]] += 1e-3 * ((1 + i + 7 * k) as f64 / (n * b + i + k + 1) as f64);
        }
    }

    for _ in 0..2000 {
        let z = ws.dot(&q);
        let qz = orthonormalize(&z)?;
        if qz.ncols() < b {
            return Ok(None);
        }
        // Rayleigh-Ritz on the current subspace
        let small = qz.t().dot(&ws).dot(&qz);
        let eig = eig_sym(&small)?;
        let ritz = qz.dot(&eig.vectors);
        // residual check on the top r pairs
        let mut worst = 0.0f64;
        for k in 0..r {
            let j = b - 1 - k;
            let v = ritz.column(j);
            let lam = eig.values[j];
            let res = (&ws.dot(&v) - &v.mapv(|x| x * lam))
                .iter()
                .map(|x| x * x)
                .sum::<f64>()
                .sqrt();
            worst = worst.max(res);
        }
        q = ritz.clone();
        if worst <= rel_tol * scale {
            let mut values = Array1::zeros(r);
            let mut vectors = Array2::zeros((n, r));
            for k in 0..r {
                let j = b - r + k;
                values[k] = eig.values[j] - shift;
                vectors.column_mut(k).assign(&ritz.column(j));
            }
            return Ok(Some(EigenDecomposition { values, vectors }));
        }
    }
    Ok(None)
}

/// Orthonormal basis for the column span of `m` via LAPACK QR.
///
/// Unpivoted: trailing columns dependent on earlier ones (R-diagonal below
/// 1e-12 of the largest) are dropped, so inputs whose leading columns are
/// independent yield exactly their rank.
pub fn orthonormalize(m: &Array2<f64>) -> Result<Array2<f64>> {
    let rows = m.nrows();
    let cols = m.ncols();
    if cols == 0 || rows == 0 {
        return Ok(Array2::zeros((rows, 0)));
    }
    if cols > rows {
        return Err(Error::Dimension(format!(
            "orthonormalize expects a tall matrix, got {rows}x{cols}"
        )));
    }
    let mut a = vec![0.0; rows * cols];
    for j in 0..cols {
        for i in 0..rows {
            a[j * rows + i] = m[[i, j]];
        }
    }
    let mut tau = vec![0.0; cols];
    let mut info = 0;
    let (ri, ci) = (rows as i32, cols as i32);

    let mut wq = [0.0];
    unsafe { lapack::dgeqrf(ri, ci, &mut a, ri, &mut tau, &mut wq, -1, &mut info) };
    if info != 0 {
        return Err(Error::Numerical(format!("dgeqrf workspace query failed: info = {info}")));
    }
    let lwork = (wq[0] as usize).max(1);
    let mut work = vec![0.0; lwork];
    unsafe { lapack::dgeqrf(ri, ci, &mut a, ri, &mut tau, &mut work, lwork as i32, &mut info) };
    if info != 0 {
        return Err(Error::Numerical(format!("dgeqrf failed: info = {info}")));
    }

    let max_rdiag = (0..cols).fold(0.0f64, |acc, j| acc.max(a[j * rows + j].abs()));
    let rank = (0..cols)
        .take_while(|&j| a[j * rows + j].abs() > 1e-12 * max_rdiag.max(1e-300))
        .count();

    let mut wq = [0.0];
    unsafe { lapack::dorgqr(ri, ci, ci, &mut a, ri, &tau, &mut wq, -1, &mut info) };
    if info != 0 {
        return Err(Error::Numerical(format!("dorgqr workspace query failed: info = {info}")));
    }
    let lwork = (wq[0] as usize).max(1);
    let mut work = vec![0.0; lwork];
    unsafe { lapack::dorgqr(ri, ci, ci, &mut a, ri, &tau, &mut work, lwork as i32, &mut info) };
    if info != 0 {
        return Err(Error::Numerical(format!("dorgqr failed: info = {info}")));
    }

    let full = Array2::from_shape_vec((rows, cols).f(), a).expect("lapack buffer shape");
    Ok(full.slice(ndarray::s![.., ..rank]).to_owned())
}

/// Orthonormal basis of the orthogonal complement of range(q), where q has
/// orthonormal columns: the eigenvectors of I − qqᵀ with eigenvalue near 1.
pub fn orthonormal_complement(q: &Array2<f64>) -> Result<Array2<f64>> {
    let n = q.nrows();
    let k = q.ncols();
    let mut proj = Array2::<f64>::eye(n);
    proj = proj - q.dot(&q.t());
    let eig = eig_sym(&proj)?;
    let mut out = Array2::zeros((n, n - k));
    let mut col = 0;
    for j in (0..n).rev() {
        if eig.values[j] > 0.5 {
            if col == n - k {
                return Err(Error::Numerical(
                    "complement dimension exceeds expectation; input not orthonormal".into(),
                ));
            }
            out.column_mut(col).assign(&eig.vectors.column(j));
            col += 1;
        }
    }
    if col != n - k {
        return Err(Error::Numerical(format!(
            "complement rank {col} differs from expected {}",
            n - k
        )));
    }
    Ok(out)
}

/// Frobenius norm.
pub fn fro_norm(m: &Array2<f64>) -> f64 {
    m.iter().map(|v| v * v).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_sym(n: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
        let mut m = Array2::zeros((n, n));
        for i in 0..n {
            for j in 0..=i {
                let v: f64 = rng.gen_range(-1.0..1.0);
                m[[i, j]] = v;
                m[[j, i]] = v;
            }
        }
        m
    }

    #[test]
    fn eig_diag() {
        let eig = eig_sym(&array![[3.0, 0.0], [0.0, 1.0]]).unwrap();
        assert!((eig.values[0] - 1.0).abs() < 1e-12);
        assert!((eig.values[1] - 3.0).abs() < 1e-12);
        assert!(eig.vectors.column(1)[0].abs() > 0.999);
    }

    #[test]
    fn eig_off_diagonal() {
        let eig = eig_sym(&array![[0.0, 1.0], [1.0, 0.0]]).unwrap();
        assert!((eig.values[0] + 1.0).abs() < 1e-12);
        assert!((eig.values[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eig_reconstruction_and_orthogonality() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let w = random_sym(50, &mut rng);
        let eig = eig_sym(&w).unwrap();
        let recon = eig
            .vectors
            .dot(&Array2::from_diag(&eig.values))
            .dot(&eig.vectors.t());
        assert!(fro_norm(&(&recon - &w)) <= 1e-9 * (1.0 + fro_norm(&w)));
        let gram = eig.vectors.t().dot(&eig.vectors);
        assert!(fro_norm(&(&gram - &Array2::<f64>::eye(50))) <= 1e-10 * 50.0);
    }

    #[test]
    fn eig_rejects_nonfinite() {
        assert!(eig_sym(&array![[f64::NAN, 0.0], [0.0, 1.0]]).is_err());
    }

    #[test]
    fn psd_nsd_diag() {
        let w = array![[2.0, 0.0], [0.0, -3.0]];
        let p = project_psd(&w).unwrap();
        let m = project_nsd(&w).unwrap();
        assert!(fro_norm(&(&p - &array![[2.0, 0.0], [0.0, 0.0]])) < 1e-12);
        assert!(fro_norm(&(&m - &array![[0.0, 0.0], [0.0, -3.0]])) < 1e-12);
    }

    #[test]
    fn psd_fixed_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = random_sym(8, &mut rng);
        let psd = m.dot(&m.t());
        let p = project_psd(&psd).unwrap();
        assert!(fro_norm(&(&p - &psd)) <= 1e-10 * (1.0 + fro_norm(&psd)));
        let nsd = -&psd;
        let q = project_nsd(&nsd).unwrap();
        assert!(fro_norm(&(&q - &nsd)) <= 1e-10 * (1.0 + fro_norm(&nsd)));
    }

    #[test]
    fn moreau_and_complementarity() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let w = random_sym(12, &mut rng);
            let p = project_psd(&w).unwrap();
            let m = project_nsd(&w).unwrap();
            let nf = fro_norm(&w);
            assert!(fro_norm(&(&(&p + &m) - &w)) <= 1e-9 * nf);
            let inner: f64 = p.iter().zip(m.iter()).map(|(a, b)| a * b).sum();
            assert!(inner.abs() <= 1e-9 * nf * nf);
        }
    }

    #[test]
    fn nsd_mirror_of_psd() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let w = random_sym(9, &mut rng);
        let lhs = project_nsd(&w).unwrap();
        let rhs = -project_psd(&(-&w)).unwrap();
        assert!(fro_norm(&(&lhs - &rhs)) <= 1e-12 * (1.0 + fro_norm(&w)));
    }

    #[test]
    fn psd_projection_optimality() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let w = random_sym(6, &mut rng);
        let p = project_psd(&w).unwrap();
        let base = fro_norm(&(&w - &p));
        for _ in 0..100 {
            let s = random_sym(6, &mut rng);
            let s_psd = s.dot(&s.t());
            assert!(base <= fro_norm(&(&w - &s_psd)) + 1e-12);
        }
    }

    #[test]
    fn rank_one_projection() {
        let w = Array2::from_diag(&array![5.0, 2.0, -1.0]);
        let p = project_rank_r_psd(&w, 1).unwrap();
        assert!(fro_norm(&(&p - &Array2::from_diag(&array![5.0, 0.0, 0.0]))) < 1e-8);
    }

    #[test]
    fn rank_projection_negative_spectrum_gives_zero() {
        let w = Array2::from_diag(&array![-1.0, -2.0, -3.0]);
        let p = project_rank_r_psd(&w, 1).unwrap();
        assert!(fro_norm(&p) < 1e-10);
    }

    #[test]
    fn rank_projection_full_rank_matches_psd() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..100 {
            let w = random_sym(7, &mut rng);
            let a = project_rank_r_psd(&w, 7).unwrap();
            let b = project_psd(&w).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn rank_projection_matches_truncated_full_eig() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for trial in 0..20 {
            let w = random_sym(15, &mut rng);
            let r = 1 + trial % 3;
            let fast = project_rank_r_psd(&w, r).unwrap();
            let eig = eig_sym(&w).unwrap();
            let mut slow = Array2::zeros((15, 15));
            for k in 0..r {
                let j = 14 - k;
                if eig.values[j] > 0.0 {
                    let q = eig.vectors.column(j);
                    for a in 0..15 {
                        for b in 0..15 {
                            slow[[a, b]] += eig.values[j] * q[a] * q[b];
                        }
                    }
                }
            }
            assert!(
                fro_norm(&(&fast - &slow)) <= 1e-6 * (1.0 + fro_norm(&slow)),
                "trial {trial} r={r}"
            );
        }
    }

    #[test]
    fn orthonormalize_spans_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let mut m = Array2::zeros((10, 4));
        for v in m.iter_mut() {
            *v = rng.gen_range(-1.0..1.0);
        }
        let q = orthonormalize(&m).unwrap();
        assert_eq!(q.ncols(), 4);
        let gram = q.t().dot(&q);
        assert!(fro_norm(&(&gram - &Array2::<f64>::eye(4))) < 1e-12);
        // projector fixes the original columns
        let proj = q.dot(&q.t()).dot(&m);
        assert!(fro_norm(&(&proj - &m)) < 1e-10);
    }

    #[test]
    fn orthonormalize_drops_dependent_columns() {
        let mut m = Array2::zeros((5, 3));
        for i in 0..5 {
            m[[i, 0]] = (i + 1) as f64;
            m[[i, 1]] = if i == 0 { 1.0 } else { 0.0 };
            m[[i, 2]] = 2.0 * (i + 1) as f64;
        }
        let q = orthonormalize(&m).unwrap();
        assert_eq!(q.ncols(), 2);
    }

    #[test]
    fn complement_is_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        let mut m = Array2::zeros((9, 3));
        for v in m.iter_mut() {
            *v = rng.gen_range(-1.0..1.0);
        }
        let q = orthonormalize(&m).unwrap();
        let c = orthonormal_complement(&q).unwrap();
        assert_eq!(c.ncols(), 6);
        assert!(fro_norm(&q.t().dot(&c)) < 1e-9);
        let gram = c.t().dot(&c);
        assert!(fro_norm(&(&gram - &Array2::<f64>::eye(6))) < 1e-9);
    }

    #[test]
    fn top_eigenpairs_match_full() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let w = random_sym(20, &mut rng);
        let full = eig_sym(&w).unwrap();
        let top = top_eigenpairs(&w, 2, 1e-10).unwrap().expect("converged");
        for k in 0..2 {
            assert!(
                (top.values[k] - full.values[18 + k]).abs() < 1e-7,
                "{} vs {}",
                top.values[k],
                full.values[18 + k]
            );
        }
    }
}
