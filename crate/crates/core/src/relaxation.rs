//! Constant objects of the facially reduced relaxation: the lifted objective
//! L_Q, the face basis V̂ (dense or Kronecker-structured), the gangster index
//! set J with its coordinate projection, and strictly feasible points.
//!
//! Lifted coordinates are 0-based over order n²+1: index 0 is the
//! homogenization coordinate and entry X[i][j] of an n×n matrix lands at
//! 1 + j·n + i (columnwise vectorization).

use ndarray::{linalg::kron, s, Array1, Array2, ShapeBuilder};

use crate::error::{Error, Result};
use crate::linalg::{eig_sym, orthonormal_complement, orthonormalize};
use crate::qap::QapInstance;

/// Lifted position of X[i][j] under columnwise vectorization.
pub fn lifted_index(n: usize, i: usize, j: usize) -> usize {
    1 + j * n + i
}

/// The (n²+1)-order objective matrix [[0, −vec(C)ᵀ], [−vec(C), B⊗A]].
#[derive(Debug, Clone)]
pub struct LiftedObjective {
    n: usize,
    c_vec: Array1<f64>,
    kron_ba: Array2<f64>,
}

impl LiftedObjective {
    pub fn order(&self) -> usize {
        self.n
    }

    pub fn lifted_order(&self) -> usize {
        self.n * self.n + 1
    }

    /// vec(C), columnwise.
    pub fn c_vec(&self) -> &Array1<f64> {
        &self.c_vec
    }

    /// B⊗A.
    pub fn kron(&self) -> &Array2<f64> {
        &self.kron_ba
    }

    /// Dense (n²+1)×(n²+1) form.
    pub fn assemble(&self) -> Array2<f64> {
        let nn = self.n * self.n;
        let mut lq = Array2::zeros((nn + 1, nn + 1));
        for k in 0..nn {
            lq[[0, 1 + k]] = -self.c_vec[k];
            lq[[1 + k, 0]] = -self.c_vec[k];
        }
        lq.slice_mut(s![1.., 1..]).assign(&self.kron_ba);
        lq
    }
}

/// Builds L_Q from an instance.
pub fn build_objective(inst: &QapInstance) -> LiftedObjective {
    let n = inst.order();
    let c = inst.linear_costs();
    let mut c_vec = Array1::zeros(n * n);
    for j in 0..n {
        for i in 0..n {
            c_vec[j * n + i] = c[[i, j]];
        }
    }
    LiftedObjective {
        n,
        c_vec,
        kron_ba: kron(inst.distances(), inst.flows()),
    }
}

/// Choice of construction for the face basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisVariant {
    /// V from QR of [I_{n−1}; −eᵀ]; the reference construction.
    DenseQr,
    /// V assembled from ⌊log₂ n⌋ Kronecker-structured sign blocks plus a
    /// dense completion block, enabling the structured congruence product.
    SparseKronecker,
}

impl std::fmt::Display for BasisVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BasisVariant::DenseQr => "dense",
            BasisVariant::SparseKronecker => "sparse",
        })
    }
}

/// Factors of the Kronecker-structured V: unscaled sign columns and the
/// diagonal scaling applied last.
#[derive(Debug, Clone)]
pub struct SparseFactors {
    /// n×(n−1) unscaled columns: ±1 sign patterns for the Kronecker blocks,
    /// unit columns for the completion block.
    pub vbar: Array2<f64>,
    /// Diagonal scaling D with V = vbar·D.
    pub dscale: Array1<f64>,
}

/// The orthonormal face basis V̂ = [[α, 0], [αe/n, V⊗V]] with α = 1/√2.
#[derive(Debug, Clone)]
pub struct LiftedBasis {
    n: usize,
    variant: BasisVariant,
    vhat: Array2<f64>,
    inner_v: Array2<f64>,
    sparse: Option<SparseFactors>,
}

impl LiftedBasis {
    pub fn order(&self) -> usize {
        self.n
    }

    pub fn variant(&self) -> BasisVariant {
        self.variant
    }

    /// (n²+1)×((n−1)²+1) matrix with orthonormal columns.
    pub fn vhat(&self) -> &Array2<f64> {
        &self.vhat
    }

    /// The inner n×(n−1) V with VᵀV = I and Vᵀe = 0.
    pub fn inner_v(&self) -> &Array2<f64> {
        &self.inner_v
    }

    pub fn sparse_factors(&self) -> Option<&SparseFactors> {
        self.sparse.as_ref()
    }

    /// Column count of V̂.
    pub fn reduced_order(&self) -> usize {
        (self.n - 1) * (self.n - 1) + 1
    }

    pub fn lifted_order(&self) -> usize {
        self.n * self.n + 1
    }
}

fn assemble_vhat(n: usize, inner_v: &Array2<f64>) -> Array2<f64> {
    let nn = n * n;
    let m = (n - 1) * (n - 1) + 1;
    let mut vhat = Array2::zeros((nn + 1, m));
    let alpha = 1.0 / 2.0f64.sqrt();
    vhat[[0, 0]] = alpha;
    for i in 0..nn {
        vhat[[1 + i, 0]] = alpha / n as f64;
    }
    let k = kron(inner_v, inner_v);
    vhat.slice_mut(s![1.., 1..]).assign(&k);
    vhat
}

/// Builds V̂ for the requested variant.
pub fn build_basis(n: usize, variant: BasisVariant) -> Result<LiftedBasis> {
    if n < 2 {
        return Err(Error::Dimension(format!("basis order n = {n} must be at least 2")));
    }
    let (inner_v, sparse) = match variant {
        BasisVariant::DenseQr => {
            let mut v0 = Array2::zeros((n, n - 1));
            for j in 0..n - 1 {
                v0[[j, j]] = 1.0;
                v0[[n - 1, j]] = -1.0;
            }
            let q = orthonormalize(&v0)?;
            if q.ncols() != n - 1 {
                return Err(Error::Numerical("basis column rank loss".into()));
            }
            (q, None)
        }
        BasisVariant::SparseKronecker => {
            let factors = sparse_inner_factors(n)?;
            let mut v = factors.vbar.clone();
            for j in 0..n - 1 {
                let d = factors.dscale[j];
                v.column_mut(j).mapv_inplace(|x| x * d);
            }
            (v, Some(factors))
        }
    };
    let vhat = assemble_vhat(n, &inner_v);
    Ok(LiftedBasis {
        n,
        variant,
        vhat,
        inner_v,
        sparse,
    })
}

/// Kronecker-block columns for the inner V: block k contributes
/// ⌊n/2ᵏ⌋ columns of the form I⊗[e; −e] padded with zero rows, scaled by
/// 1/√(2ᵏ); a dense completion block fills the remaining directions of e⊥.
fn sparse_inner_factors(n: usize) -> Result<SparseFactors> {
    let mut vbar = Array2::zeros((n, n - 1));
    let mut dscale = Array1::zeros(n - 1);
    let mut col = 0;
    let mut k = 1usize;
    while (1usize << k) <= n {
        let half = 1usize << (k - 1);
        let len = 1usize << k;
        let blocks = n / len;
        let scale = 1.0 / (len as f64).sqrt();
        for b in 0..blocks {
            let base = b * len;
            for r in 0..half {
                vbar[[base + r, col]] = 1.0;
                vbar[[base + half + r, col]] = -1.0;
            }
            dscale[col] = scale;
            col += 1;
        }
        k += 1;
    }
    if col < n - 1 {
        // span so far: assembled columns plus e; complete to all of ℝⁿ
        let mut partial = Array2::zeros((n, col + 1));
        for i in 0..n {
            partial[[i, 0]] = 1.0 / (n as f64).sqrt();
        }
        for j in 0..col {
            let d = dscale[j];
            for i in 0..n {
                partial[[i, 1 + j]] = vbar[[i, j]] * d;
            }
        }
        let completion = orthonormal_complement(&partial)?;
        if completion.ncols() != n - 1 - col {
            return Err(Error::Numerical("sparse basis completion rank mismatch".into()));
        }
        for j in 0..completion.ncols() {
            vbar.column_mut(col + j).assign(&completion.column(j));
            dscale[col + j] = 1.0;
        }
    }
    Ok(SparseFactors { vbar, dscale })
}

fn vec_colmajor(m: &Array2<f64>) -> Array1<f64> {
    let (r, c) = m.dim();
    let mut v = Array1::zeros(r * c);
    for j in 0..c {
        for i in 0..r {
            v[j * r + i] = m[[i, j]];
        }
    }
    v
}

fn unvec_colmajor(v: &Array1<f64>, r: usize, c: usize) -> Array2<f64> {
    Array2::from_shape_vec((r, c).f(), v.to_vec()).expect("length checked by caller")
}

/// Computes V̂ᵀ M V̂ x blockwise without materializing V̂ᵀMV̂, using the
/// Kronecker identity (V⊗V)vec(X) = vec(VXVᵀ) and the delayed diagonal
/// scaling of the sparse factors.
pub fn structured_congruence_apply(
    basis: &LiftedBasis,
    m: &Array2<f64>,
    x: &Array1<f64>,
) -> Result<Array1<f64>> {
    let factors = basis.sparse_factors().ok_or_else(|| {
        Error::Config("structured congruence requires the sparse-Kronecker basis".into())
    })?;
    let n = basis.order();
    let nn = n * n;
    let red = basis.reduced_order();
    if m.nrows() != nn + 1 || m.ncols() != nn + 1 {
        return Err(Error::Dimension(format!(
            "matrix order {} does not match lifted order {}",
            m.nrows(),
            nn + 1
        )));
    }
    if x.len() != red {
        return Err(Error::Dimension(format!(
            "vector length {} does not match reduced order {red}",
            x.len()
        )));
    }

    let alpha = 1.0 / 2.0f64.sqrt();
    let vscale = alpha / n as f64;
    let rho = m[[0, 0]];
    let w = m.slice(s![1.., 0]).to_owned();
    let wbar = m.slice(s![1.., 1..]);

    let x0 = x[0];
    let xr = x.slice(s![1..]).to_owned();

    // s = (V⊗V) x̄ = vec(V X̄ Vᵀ), V = vbar·D applied with delayed scaling
    let xm = unvec_colmajor(&xr, n - 1, n - 1);
    let mut scaled = xm.clone();
    for i in 0..n - 1 {
        for j in 0..n - 1 {
            scaled[[i, j]] *= factors.dscale[i] * factors.dscale[j];
        }
    }
    let s_mat = factors.vbar.dot(&scaled).dot(&factors.vbar.t());
    let s_vec = vec_colmajor(&s_mat);

    let wbar_s = wbar.dot(&s_vec);
    let wbar_v_sum: Array1<f64> = wbar.sum_axis(ndarray::Axis(1)) * vscale;
    let w_sum: f64 = w.sum();

    let vt_wbar_v = wbar_v_sum.sum() * vscale;
    let scalar = alpha * alpha * rho + 2.0 * alpha * vscale * w_sum + vt_wbar_v;

    let w_dot_s: f64 = w.iter().zip(s_vec.iter()).map(|(a, b)| a * b).sum();
    let top = scalar * x0 + alpha * w_dot_s + vscale * wbar_s.sum();

    // bottom = (V⊗V)ᵀ g = vec(Vᵀ G V)
    let g = &w.mapv(|v| v * alpha * x0) + &wbar_v_sum.mapv(|v| v * x0) + &wbar_s;
    let g_mat = unvec_colmajor(&g, n, n);
    let mut bottom_mat = factors.vbar.t().dot(&g_mat).dot(&factors.vbar);
    for i in 0..n - 1 {
        for j in 0..n - 1 {
            bottom_mat[[i, j]] *= factors.dscale[i] * factors.dscale[j];
        }
    }
    let bottom = vec_colmajor(&bottom_mat);

    let mut out = Array1::zeros(red);
    out[0] = top;
    out.slice_mut(s![1..]).assign(&bottom);
    Ok(out)
}

/// The gangster index set J over the lifted order, stored on the upper
/// triangle with a full symmetric bitmap for O(1) membership.
#[derive(Debug, Clone)]
pub struct GangsterIndexSet {
    n: usize,
    entries: Vec<(usize, usize)>,
    mask: Vec<bool>,
}

impl GangsterIndexSet {
    pub fn order(&self) -> usize {
        self.n
    }

    pub fn lifted_order(&self) -> usize {
        self.n * self.n + 1
    }

    /// Upper-triangle entries, sorted, i ≤ j.
    pub fn entries(&self) -> &[(usize, usize)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Symmetric membership: true for (i,j) or its mirror.
    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.mask[i * self.lifted_order() + j]
    }
}

/// Builds J: (0,0), the off-diagonal entries of the n diagonal blocks, and
/// the diagonal entries of the off-diagonal blocks except the last block
/// column and except block (n−2, n−1) in 1-based block labels.
pub fn build_gangster(n: usize) -> Result<GangsterIndexSet> {
    if n < 3 {
        return Err(Error::Config(format!(
            "gangster set requires n >= 3 (block exclusion rule), got {n}"
        )));
    }
    let big = n * n + 1;
    let mut entries = vec![(0usize, 0usize)];
    for b in 0..n {
        for r in 0..n {
            for s in (r + 1)..n {
                entries.push((lifted_index(n, r, b), lifted_index(n, s, b)));
            }
        }
    }
    for bi in 0..n {
        for bj in (bi + 1)..n {
            if bj == n - 1 {
                continue;
            }
            if (bi, bj) == (n - 3, n - 2) {
                continue;
            }
            for r in 0..n {
                entries.push((lifted_index(n, r, bi), lifted_index(n, r, bj)));
            }
        }
    }
    entries.sort_unstable();
    let mut mask = vec![false; big * big];
    for &(i, j) in &entries {
        mask[i * big + j] = true;
        mask[j * big + i] = true;
    }
    Ok(GangsterIndexSet { n, entries, mask })
}

/// Coordinate projection 𝒢_J: keeps entries indexed by J (and mirrors),
/// zeroes all others.
pub fn gangster_apply(j: &GangsterIndexSet, y: &Array2<f64>) -> Result<Array2<f64>> {
    let big = j.lifted_order();
    if y.nrows() != big || y.ncols() != big {
        return Err(Error::Dimension(format!(
            "gangster operand is {}x{}, expected {big}x{big}",
            y.nrows(),
            y.ncols()
        )));
    }
    let mut out = Array2::zeros((big, big));
    for &(r, c) in j.entries() {
        out[[r, c]] = y[[r, c]];
        out[[c, r]] = y[[c, r]];
    }
    Ok(out)
}

/// Strictly feasible primal and dual points.
#[derive(Debug, Clone)]
pub struct FeasiblePoints {
    /// Positive definite ((n−1)²+1)-order matrix with 𝒢_J(V̂R̂V̂ᵀ) = E₀₀.
    pub r_hat: Array2<f64>,
    /// Lifted matrix −M·blkdiag(n, I⊗(I−E)).
    pub y_hat: Array2<f64>,
    /// Dual slack L_Q − 𝒢_J(Ŷ) with V̂ᵀẐV̂ ≻ 0.
    pub z_hat: Array2<f64>,
    /// The scalar found by doubling until the dual slack is positive
    /// definite on the face.
    pub m: f64,
}

/// Builds the strictly feasible pair of the two lemmas, doubling M from 1
/// until λ_min(V̂ᵀẐV̂) > 0.
pub fn feasible_points(
    n: usize,
    basis: &LiftedBasis,
    j: &GangsterIndexSet,
    lq: &LiftedObjective,
) -> Result<FeasiblePoints> {
    if basis.order() != n || j.order() != n || lq.order() != n {
        return Err(Error::Dimension("feasible_points inputs built for different orders".into()));
    }
    let red = basis.reduced_order();
    let big = basis.lifted_order();

    // R̂ in the orthonormal-V̂ coordinates: blkdiag(2, I/(n−1))
    let mut r_hat = Array2::zeros((red, red));
    r_hat[[0, 0]] = 2.0;
    for k in 1..red {
        r_hat[[k, k]] = 1.0 / (n as f64 - 1.0);
    }

    // blkdiag(n, I⊗(I−E)): diagonal blocks of ones off the diagonal, negated
    let mut shape = Array2::zeros((big, big));
    shape[[0, 0]] = n as f64;
    for b in 0..n {
        for r in 0..n {
            for s in 0..n {
                if r != s {
                    shape[[lifted_index(n, r, b), lifted_index(n, s, b)]] = -1.0;
                }
            }
        }
    }

    let lq_dense = lq.assemble();
    let mut m = 1.0f64;
    for _ in 0..60 {
        let y_hat = shape.mapv(|v| -m * v);
        let z_hat = &lq_dense - &gangster_apply(j, &y_hat)?;
        let reduced = basis.vhat().t().dot(&z_hat).dot(basis.vhat());
        let eig = eig_sym(&reduced)?;
        if eig.values[0] > 0.0 {
            return Ok(FeasiblePoints {
                r_hat,
                y_hat,
                z_hat,
                m,
            });
        }
        m *= 2.0;
    }
    Err(Error::Numerical(
        "no M within 60 doublings makes the dual slack positive definite; basis or gangster set inconsistent".into(),
    ))
}
