//! Dense complex linear algebra on multipartite Hilbert spaces.
//!
//! Subsystems are ordered most-significant first: the basis index of
//! `|i_1 ... i_N>` is `sum_k i_k * prod_{m>k} d_m`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type ComplexMatrix = DMatrix<C64>;

/// Absolute Hermiticity tolerance, scaled by `max(1, max |entry|)`.
pub const TAU_HERM: f64 = 1e-12;
/// Absolute trace tolerance.
pub const TAU_TRACE: f64 = 1e-12;
/// Positivity tolerance, scaled by the trace.
pub const TAU_PSD: f64 = 1e-10;
/// Eigenvalue tolerance, relative to the spectral norm.
pub const TAU_EIG: f64 = 1e-10;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn real(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Largest entrywise deviation `|m - m^dagger|`.
pub fn hermiticity_deviation(m: &ComplexMatrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    let n = m.nrows();
    let mut dev = 0.0f64;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

pub fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Max-norm of `a - b`. Panics on shape mismatch.
pub fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "max_abs_diff on different shapes");
    a.iter()
        .zip(b.iter())
        .fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

fn check_hermitian(m: &ComplexMatrix) -> Result<()> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    let deviation = hermiticity_deviation(m);
    if deviation > TAU_HERM * max_abs(m).max(1.0) {
        return Err(Error::NotHermitian { deviation });
    }
    Ok(())
}

fn check_dims(dims: &[usize], size: usize) -> Result<()> {
    if let Some(&d) = dims.iter().find(|&&d| d < 2) {
        return Err(Error::InvalidDimension(d));
    }
    if dims.iter().product::<usize>() != size || dims.is_empty() {
        return Err(Error::DimsMismatch {
            dims: dims.to_vec(),
            size,
        });
    }
    Ok(())
}

/// Real eigenvalues of a Hermitian matrix in ascending order.
pub fn eigenvalues_hermitian(m: &ComplexMatrix) -> Result<Vec<f64>> {
    check_hermitian(m)?;
    // Symmetrize away round-off before handing the matrix to the solver.
    let h = (m + m.adjoint()).scale(0.5);
    let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    Ok(ev)
}

pub fn min_eigenvalue_hermitian(m: &ComplexMatrix) -> Result<f64> {
    Ok(eigenvalues_hermitian(m)?[0])
}

/// Componentwise (Schur) product.
pub fn hadamard(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    if a.shape() != b.shape() {
        return Err(Error::ShapeMismatch {
            left: a.shape(),
            right: b.shape(),
        });
    }
    Ok(a.component_mul(b))
}

/// Hermitian operator on a tensor product of subsystems.
///
/// `normalized` records unit trace and `positive` records a verified (or
/// constructed) positive semidefinite operator; both are explicit and never
/// set implicitly by arithmetic that could break them.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
    dims: Vec<usize>,
    normalized: bool,
    positive: bool,
}

impl DensityMatrix {
    /// Hermitian operator with no normalization or positivity claims.
    pub fn operator(matrix: ComplexMatrix, dims: Vec<usize>) -> Result<Self> {
        check_hermitian(&matrix)?;
        check_dims(&dims, matrix.nrows())?;
        Ok(Self {
            matrix,
            dims,
            normalized: false,
            positive: false,
        })
    }

    /// Checks unit trace and positivity, then flags the operator as a state.
    pub fn state(matrix: ComplexMatrix, dims: Vec<usize>) -> Result<Self> {
        Self::operator(matrix, dims)?.into_state()
    }

    /// Rank-one projector `|psi><psi|` (not renormalized).
    pub fn pure(psi: &[C64], dims: Vec<usize>) -> Result<Self> {
        let v = nalgebra::DVector::from_column_slice(psi);
        let matrix = &v * v.adjoint();
        let mut out = Self::operator(matrix, dims)?;
        out.positive = true;
        out.normalized = (out.trace() - 1.0).abs() <= TAU_TRACE;
        Ok(out)
    }

    pub fn maximally_mixed(dims: Vec<usize>) -> Result<Self> {
        let d: usize = dims.iter().product();
        Self::from_diagonal(&vec![1.0 / d as f64; d], dims)
    }

    /// Diagonal operator; flagged positive when every entry is nonnegative.
    pub fn from_diagonal(entries: &[f64], dims: Vec<usize>) -> Result<Self> {
        let d = entries.len();
        let mut matrix = ComplexMatrix::zeros(d, d);
        for (i, &e) in entries.iter().enumerate() {
            matrix[(i, i)] = real(e);
        }
        let mut out = Self::operator(matrix, dims)?;
        out.positive = entries.iter().all(|&e| e >= 0.0);
        out.normalized = (out.trace() - 1.0).abs() <= TAU_TRACE;
        Ok(out)
    }

    /// Verifies trace and positivity and flags the operator accordingly.
    pub fn into_state(mut self) -> Result<Self> {
        let trace = self.trace();
        if (trace - 1.0).abs() > TAU_TRACE {
            return Err(Error::NotNormalized { trace });
        }
        let min_eigenvalue = self.min_eigenvalue();
        if min_eigenvalue < -TAU_PSD * trace.abs().max(1.0) {
            return Err(Error::NotPositive { min_eigenvalue });
        }
        self.normalized = true;
        self.positive = true;
        Ok(self)
    }

    pub(crate) fn from_parts_unchecked(
        matrix: ComplexMatrix,
        dims: Vec<usize>,
        normalized: bool,
        positive: bool,
    ) -> Self {
        debug_assert_eq!(dims.iter().product::<usize>(), matrix.nrows());
        Self {
            matrix,
            dims,
            normalized,
            positive,
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn num_subsystems(&self) -> usize {
        self.dims.len()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn is_positive(&self) -> bool {
        self.positive
    }

    /// True when both unit trace and positivity are flagged.
    pub fn is_state(&self) -> bool {
        self.normalized && self.positive
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        eigenvalues_hermitian(&self.matrix).expect("DensityMatrix is Hermitian by construction")
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// `factor * self`. Positivity survives a nonnegative factor; the result
    /// is never flagged normalized unless the factor is exactly one.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            matrix: self.matrix.scale(factor),
            dims: self.dims.clone(),
            normalized: self.normalized && factor == 1.0,
            positive: self.positive && factor >= 0.0,
        }
    }

    /// Divides by the trace.
    pub fn normalize(&self) -> Result<Self> {
        let trace = self.trace();
        if trace.abs() <= TAU_TRACE {
            return Err(Error::ZeroTrace { trace });
        }
        Ok(Self {
            matrix: self.matrix.unscale(trace),
            dims: self.dims.clone(),
            normalized: true,
            positive: self.positive && trace > 0.0,
        })
    }

    fn check_subsystem(&self, index: usize) -> Result<()> {
        if index >= self.dims.len() {
            return Err(Error::SubsystemOutOfRange {
                index,
                len: self.dims.len(),
            });
        }
        Ok(())
    }
}

/// Kronecker product; dims concatenate.
pub fn tensor(a: &DensityMatrix, b: &DensityMatrix) -> DensityMatrix {
    let mut dims = a.dims.clone();
    dims.extend_from_slice(&b.dims);
    DensityMatrix {
        matrix: a.matrix.kronecker(&b.matrix),
        dims,
        normalized: a.normalized && b.normalized,
        positive: a.positive && b.positive,
    }
}

/// Tensor product of a nonempty sequence of factors.
pub fn tensor_all<'a, I>(factors: I) -> Option<DensityMatrix>
where
    I: IntoIterator<Item = &'a DensityMatrix>,
{
    let mut iter = factors.into_iter();
    let first = iter.next()?.clone();
    Some(iter.fold(first, |acc, f| tensor(&acc, f)))
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

/// Transposes the listed tensor factors. Positivity is not preserved in
/// general, so the result only keeps the normalization flag.
pub fn partial_transpose(rho: &DensityMatrix, subsystems: &[usize]) -> Result<DensityMatrix> {
    for &k in subsystems {
        rho.check_subsystem(k)?;
    }
    let mut set: Vec<usize> = subsystems.to_vec();
    set.sort_unstable();
    set.dedup();

    let n = rho.dim();
    let st = strides(&rho.dims);
    let mut out = ComplexMatrix::zeros(n, n);
    for r in 0..n {
        for col in 0..n {
            let (mut nr, mut nc) = (r as isize, col as isize);
            for &k in &set {
                let dr = ((r / st[k]) % rho.dims[k]) as isize;
                let dc = ((col / st[k]) % rho.dims[k]) as isize;
                let s = st[k] as isize;
                nr += (dc - dr) * s;
                nc += (dr - dc) * s;
            }
            out[(nr as usize, nc as usize)] = rho.matrix[(r, col)];
        }
    }
    Ok(DensityMatrix {
        matrix: out,
        dims: rho.dims.clone(),
        normalized: rho.normalized,
        positive: false,
    })
}

/// Traces out the listed subsystems; at least one must remain.
pub fn partial_trace(rho: &DensityMatrix, discard: &[usize]) -> Result<DensityMatrix> {
    for &k in discard {
        rho.check_subsystem(k)?;
    }
    let discarded: Vec<bool> = (0..rho.dims.len()).map(|k| discard.contains(&k)).collect();
    if discarded.iter().all(|&d| d) {
        return Err(Error::TraceOutAll);
    }
    let kept_dims: Vec<usize> = rho
        .dims
        .iter()
        .zip(&discarded)
        .filter(|(_, &d)| !d)
        .map(|(&d, _)| d)
        .collect();
    let kept_total: usize = kept_dims.iter().product();
    let disc_total = rho.dim() / kept_total;

    // Split every full index into (kept index, discarded index).
    let st = strides(&rho.dims);
    let mut groups: Vec<Vec<(usize, usize)>> = vec![Vec::with_capacity(kept_total); disc_total];
    for full in 0..rho.dim() {
        let (mut ki, mut di) = (0usize, 0usize);
        for (k, &d) in rho.dims.iter().enumerate() {
            let digit = (full / st[k]) % d;
            if discarded[k] {
                di = di * d + digit;
            } else {
                ki = ki * d + digit;
            }
        }
        groups[di].push((ki, full));
    }

    let mut out = ComplexMatrix::zeros(kept_total, kept_total);
    for group in &groups {
        for &(ki, r) in group {
            for &(kj, col) in group {
                out[(ki, kj)] += rho.matrix[(r, col)];
            }
        }
    }
    Ok(DensityMatrix {
        matrix: out,
        dims: kept_dims,
        normalized: rho.normalized,
        positive: rho.positive,
    })
}

/// Reorders subsystems: output position `q` holds input subsystem `perm[q]`.
pub fn permute_subsystems(rho: &DensityMatrix, perm: &[usize]) -> Result<DensityMatrix> {
    let n_sub = rho.dims.len();
    let mut seen = vec![false; n_sub];
    if perm.len() != n_sub
        || perm
            .iter()
            .any(|&p| p >= n_sub || std::mem::replace(&mut seen[p], true))
    {
        return Err(Error::MalformedPermutation(perm.to_vec()));
    }
    let in_st = strides(&rho.dims);
    let out_dims: Vec<usize> = perm.iter().map(|&p| rho.dims[p]).collect();
    let out_st = strides(&out_dims);

    let index_map: Vec<usize> = (0..rho.dim())
        .map(|full| {
            perm.iter()
                .enumerate()
                .map(|(q, &p)| ((full / in_st[p]) % rho.dims[p]) * out_st[q])
                .sum()
        })
        .collect();

    let n = rho.dim();
    let mut out = ComplexMatrix::zeros(n, n);
    for r in 0..n {
        for col in 0..n {
            out[(index_map[r], index_map[col])] = rho.matrix[(r, col)];
        }
    }
    Ok(DensityMatrix {
        matrix: out,
        dims: out_dims,
        normalized: rho.normalized,
        positive: rho.positive,
    })
}

/// Inverse of a subsystem permutation.
pub fn inverse_permutation(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (q, &p) in perm.iter().enumerate() {
        inv[p] = q;
    }
    inv
}

/// Wire format `{ "dims": [..], "re": [[..]], "im": [[..]] }`, row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityMatrixJson {
    pub dims: Vec<usize>,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl From<&DensityMatrix> for DensityMatrixJson {
    fn from(rho: &DensityMatrix) -> Self {
        let n = rho.dim();
        let rows = |f: fn(&C64) -> f64| -> Vec<Vec<f64>> {
            (0..n)
                .map(|i| (0..n).map(|j| f(&rho.matrix[(i, j)])).collect())
                .collect()
        };
        Self {
            dims: rho.dims.clone(),
            re: rows(|z| z.re),
            im: rows(|z| z.im),
        }
    }
}

impl TryFrom<DensityMatrixJson> for DensityMatrix {
    type Error = Error;

    /// Imports as a Hermitian operator; the normalized flag is set when the
    /// trace is one, positivity is left unclaimed.
    fn try_from(j: DensityMatrixJson) -> Result<Self> {
        let n = j.re.len();
        if j.im.len() != n || j.re.iter().chain(&j.im).any(|row| row.len() != n) {
            return Err(Error::Json("re/im must be square arrays of equal size".into()));
        }
        let matrix = ComplexMatrix::from_fn(n, n, |r, col| c(j.re[r][col], j.im[r][col]));
        let mut rho = DensityMatrix::operator(matrix, j.dims)?;
        rho.normalized = (rho.trace() - 1.0).abs() <= TAU_TRACE;
        Ok(rho)
    }
}

impl DensityMatrix {
    pub fn to_json(&self) -> String {
        serde_json::to_string(&DensityMatrixJson::from(self)).expect("plain data serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let j: DensityMatrixJson = serde_json::from_str(s)?;
        j.try_into()
    }
}
