//! QAP instances: QAPLIB ingestion, objective evaluation, and a brute-force
//! oracle for small orders.
//!
//! An instance is the triple (A, B, C) of the trace formulation
//! `min ⟨A X B − 2C, X⟩` over permutation matrices X, with A (flows) and
//! B (distances) symmetric.

use ndarray::Array2;

use crate::error::{Error, Result};

/// Maximum order accepted by [`brute_force_opt`]; n! enumeration beyond this
/// is pointless.
pub const BRUTE_FORCE_MAX_N: usize = 10;

/// A permutation of {0, …, n−1}, stored as its image vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    image: Vec<usize>,
}

impl Permutation {
    /// Builds a permutation from an image vector, verifying bijectivity.
    pub fn from_image(image: Vec<usize>) -> Result<Self> {
        let n = image.len();
        let mut seen = vec![false; n];
        for &v in &image {
            if v >= n || seen[v] {
                return Err(Error::Dimension(format!(
                    "image {image:?} is not a bijection on 0..{n}"
                )));
            }
            seen[v] = true;
        }
        Ok(Self { image })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            image: (0..n).collect(),
        }
    }

    pub fn order(&self) -> usize {
        self.image.len()
    }

    /// Image of index `i`.
    pub fn apply(&self, i: usize) -> usize {
        self.image[i]
    }

    pub fn image(&self) -> &[usize] {
        &self.image
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.image.len()];
        for (i, &v) in self.image.iter().enumerate() {
            inv[v] = i;
        }
        Self { image: inv }
    }

    /// Composition `self ∘ other`: i ↦ self(other(i)).
    pub fn compose(&self, other: &Permutation) -> Self {
        Self {
            image: other.image.iter().map(|&i| self.image[i]).collect(),
        }
    }

    /// The 0/1 permutation matrix X with X[i, p(i)] = 1.
    pub fn matrix(&self) -> Array2<f64> {
        let n = self.image.len();
        let mut x = Array2::zeros((n, n));
        for (i, &v) in self.image.iter().enumerate() {
            x[[i, v]] = 1.0;
        }
        x
    }
}

/// A quadratic assignment instance in trace form.
///
/// Immutable after construction; all operations on it are pure.
#[derive(Debug, Clone)]
pub struct QapInstance {
    n: usize,
    a: Array2<f64>,
    b: Array2<f64>,
    c: Array2<f64>,
    name: String,
}

fn max_abs(m: &Array2<f64>) -> f64 {
    m.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
}

fn asymmetry(m: &Array2<f64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((m[[i, j]] - m[[j, i]]).abs());
        }
    }
    worst
}

fn symmetrize(m: &mut Array2<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (m[[i, j]] + m[[j, i]]);
            m[[i, j]] = v;
            m[[j, i]] = v;
        }
    }
}

impl QapInstance {
    /// Builds an instance, symmetrizing A and B.
    ///
    /// When C = 0 and at least one of A, B is exactly symmetric, the
    /// objective is invariant under symmetrization and arbitrary asymmetry
    /// is tolerated. Otherwise the raw asymmetry must stay below
    /// `1e-12 · max|entry|`.
    pub fn new(
        name: impl Into<String>,
        mut a: Array2<f64>,
        mut b: Array2<f64>,
        c: Array2<f64>,
    ) -> Result<Self> {
        let n = a.nrows();
        if n < 2 {
            return Err(Error::Dimension(format!("order n = {n} must be at least 2")));
        }
        for (label, m) in [("A", &a), ("B", &b), ("C", &c)] {
            if m.nrows() != n || m.ncols() != n {
                return Err(Error::Dimension(format!(
                    "matrix {label} is {}x{}, expected {n}x{n}",
                    m.nrows(),
                    m.ncols()
                )));
            }
            if m.iter().any(|v| !v.is_finite()) {
                return Err(Error::Numerical(format!("matrix {label} has non-finite entries")));
            }
        }
        let c_is_zero = c.iter().all(|&v| v == 0.0);
        let lenient = c_is_zero && (asymmetry(&a) == 0.0 || asymmetry(&b) == 0.0);
        if !lenient {
            for (label, m) in [("A", &a), ("B", &b)] {
                let tol = 1e-12 * max_abs(m);
                if asymmetry(m) > tol {
                    return Err(Error::Numerical(format!(
                        "matrix {label} asymmetry {:.3e} exceeds {:.3e}",
                        asymmetry(m),
                        tol
                    )));
                }
            }
        }
        symmetrize(&mut a);
        symmetrize(&mut b);
        Ok(Self {
            n,
            a,
            b,
            c,
            name: name.into(),
        })
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn flows(&self) -> &Array2<f64> {
        &self.a
    }

    pub fn distances(&self) -> &Array2<f64> {
        &self.b
    }

    pub fn linear_costs(&self) -> &Array2<f64> {
        &self.c
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// True when every entry of A, B, C is an integer.
    pub fn is_integer_data(&self) -> bool {
        self.a
            .iter()
            .chain(self.b.iter())
            .chain(self.c.iter())
            .all(|v| v.fract() == 0.0)
    }

    /// The same instance with A and B exchanged (QAPLIB files do not label
    /// which matrix is which; the objective value set is invariant under
    /// the swap, only optimal permutations invert).
    pub fn swapped(&self) -> Self {
        Self {
            n: self.n,
            a: self.b.clone(),
            b: self.a.clone(),
            c: self.c.clone(),
            name: self.name.clone(),
        }
    }

    /// Objective ⟨A X B − 2C, X⟩ evaluated in O(n²) as
    /// Σᵢⱼ A[i][j]·B[p(i)][p(j)] − 2·Σᵢ C[i][p(i)].
    pub fn objective(&self, p: &Permutation) -> Result<f64> {
        if p.order() != self.n {
            return Err(Error::Dimension(format!(
                "permutation order {} does not match instance order {}",
                p.order(),
                self.n
            )));
        }
        let mut quad = 0.0;
        for i in 0..self.n {
            let pi = p.apply(i);
            for j in 0..self.n {
                quad += self.a[[i, j]] * self.b[[pi, p.apply(j)]];
            }
        }
        let lin: f64 = (0..self.n).map(|i| self.c[[i, p.apply(i)]]).sum();
        Ok(quad - 2.0 * lin)
    }
}

/// Exact minimum over all n! permutations; ties broken by lexicographically
/// smallest image. Guarded to n ≤ 10.
pub fn brute_force_opt(inst: &QapInstance) -> Result<(f64, Permutation)> {
    let n = inst.order();
    if n > BRUTE_FORCE_MAX_N {
        return Err(Error::Config(format!(
            "brute force enumeration limited to n <= {BRUTE_FORCE_MAX_N}, got {n}"
        )));
    }
    let mut image: Vec<usize> = (0..n).collect();
    let mut best_val = f64::INFINITY;
    let mut best: Vec<usize> = image.clone();
    loop {
        let p = Permutation {
            image: image.clone(),
        };
        let v = inst.objective(&p)?;
        // strict improvement keeps the lexicographically first optimum
        if v < best_val {
            best_val = v;
            best = image.clone();
        }
        if !next_permutation(&mut image) {
            break;
        }
    }
    Ok((best_val, Permutation { image: best }))
}

/// Advances `v` to the next permutation in lexicographic order; false once
/// the last one has been visited.
fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Parses the QAPLIB plain-text format: an integer n followed by 2n²
/// whitespace-separated numbers (matrix A then matrix B, row-major).
/// C is absent in this format and set to zero.
pub fn parse_qaplib(text: &str, name: impl Into<String>) -> Result<QapInstance> {
    let mut tokens = text.split_whitespace();
    let n: usize = tokens
        .next()
        .ok_or_else(|| Error::Parse("empty input".into()))?
        .parse()
        .map_err(|_| Error::Parse("first token is not an integer order".into()))?;
    if n <= 1 {
        return Err(Error::Parse(format!("order n = {n} must be at least 2")));
    }
    let mut values = Vec::with_capacity(2 * n * n);
    for tok in tokens.by_ref() {
        if values.len() == 2 * n * n {
            return Err(Error::Parse(format!(
                "trailing content after {} matrix entries: {tok:?}",
                2 * n * n
            )));
        }
        let v: f64 = tok
            .parse()
            .map_err(|_| Error::Parse(format!("non-numeric token {tok:?}")))?;
        values.push(v);
    }
    if values.len() != 2 * n * n {
        return Err(Error::Parse(format!(
            "truncated stream: expected {} matrix entries, found {}",
            2 * n * n,
            values.len()
        )));
    }
    let a = Array2::from_shape_vec((n, n), values[..n * n].to_vec()).expect("shape checked");
    let b = Array2::from_shape_vec((n, n), values[n * n..].to_vec()).expect("shape checked");
    QapInstance::new(name, a, b, Array2::zeros((n, n)))
}

/// Reads a QAPLIB file, deriving the instance name from the file stem.
pub fn parse_qaplib_file(path: &std::path::Path) -> Result<QapInstance> {
    let text = std::fs::read_to_string(path)?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "unnamed".into());
    parse_qaplib(&text, name)
}

/// Parses a QAPLIB solution file: one line `n value`, then n permutation
/// indices (1-based in files, 0-based here).
pub fn parse_solution(text: &str) -> Result<(f64, Permutation)> {
    let mut tokens = text.split_whitespace();
    let n: usize = tokens
        .next()
        .ok_or_else(|| Error::Parse("empty solution file".into()))?
        .parse()
        .map_err(|_| Error::Parse("solution file order is not an integer".into()))?;
    let value: f64 = tokens
        .next()
        .ok_or_else(|| Error::Parse("solution file missing optimal value".into()))?
        .parse()
        .map_err(|_| Error::Parse("solution file value is not numeric".into()))?;
    let mut image = Vec::with_capacity(n);
    for _ in 0..n {
        let idx: usize = tokens
            .next()
            .ok_or_else(|| Error::Parse("solution file permutation truncated".into()))?
            .parse()
            .map_err(|_| Error::Parse("solution file permutation entry not an integer".into()))?;
        if idx == 0 {
            return Err(Error::Parse("solution file permutation must be 1-based".into()));
        }
        image.push(idx - 1);
    }
    Ok((value, Permutation::from_image(image)?))
}
