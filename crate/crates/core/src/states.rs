//! GHZ and isotropic GHZ states, X-form states, partitions, and product-form
//! convex sums used for exact work on spaces too large to materialize.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    self, c, max_abs, real, ComplexMatrix, DensityMatrix, DensityMatrixJson, C64, TAU_HERM,
    TAU_TRACE,
};

/// Off-X entries below this magnitude count as zero.
pub const TAU_X: f64 = 1e-12;

/// Largest dense dimension [`ProductFormState::to_dense`] will build.
pub const DENSE_LIMIT: usize = 4096;

/// `(|0...0> + |1...1>)/sqrt(2)` on `n_qubits` qubits.
pub fn ghz_vector(n_qubits: usize) -> Result<Vec<C64>> {
    if n_qubits < 2 {
        return Err(Error::TooFewQubits {
            got: n_qubits,
            min: 2,
        });
    }
    let d = 1usize << n_qubits;
    let mut v = vec![C64::default(); d];
    v[0] = real(std::f64::consts::FRAC_1_SQRT_2);
    v[d - 1] = real(std::f64::consts::FRAC_1_SQRT_2);
    Ok(v)
}

/// Lower end of the valid mixing range, `-1/(2^N - 1)`.
pub fn isotropic_p_min(n_qubits: usize) -> f64 {
    -1.0 / (((1u64 << n_qubits) - 1) as f64)
}

pub(crate) fn check_isotropic(n_qubits: usize, p: f64) -> Result<()> {
    if n_qubits < 2 {
        return Err(Error::TooFewQubits {
            got: n_qubits,
            min: 2,
        });
    }
    let lo = isotropic_p_min(n_qubits);
    if !(lo..=1.0).contains(&p) {
        return Err(Error::ParameterOutOfRange { p, lo, n_qubits });
    }
    Ok(())
}

/// N-qubit X-form state stored by its diagonal and anti-diagonal.
///
/// For `i = 1..n` with `n = 2^(N-1)`: `a_i = rho[i-1, i-1]`,
/// `b_i = rho[2^N - i, 2^N - i]` and `z_i = rho[i-1, 2^N - i]`.
#[derive(Clone, Debug, PartialEq)]
pub struct XFormState {
    n_qubits: usize,
    a: Vec<f64>,
    b: Vec<f64>,
    z: Vec<C64>,
}

impl XFormState {
    /// Validates lengths, nonnegative diagonals and `|z_i|^2 <= a_i b_i`.
    pub fn new(n_qubits: usize, a: Vec<f64>, b: Vec<f64>, z: Vec<C64>) -> Result<Self> {
        if n_qubits < 1 {
            return Err(Error::TooFewQubits { got: 0, min: 1 });
        }
        let n = 1usize << (n_qubits - 1);
        if a.len() != n || b.len() != n || z.len() != n {
            return Err(Error::InvalidXForm(format!(
                "expected {n} entries in a, b and z, got {}, {}, {}",
                a.len(),
                b.len(),
                z.len()
            )));
        }
        let scale = a.iter().chain(&b).fold(1.0f64, |m, v| m.max(v.abs()));
        let tol = TAU_X * scale;
        for i in 0..n {
            if a[i] < -tol || b[i] < -tol {
                return Err(Error::InvalidXForm(format!(
                    "negative diagonal at block {}",
                    i + 1
                )));
            }
            if z[i].norm_sqr() > a[i].max(0.0) * b[i].max(0.0) + tol * scale {
                return Err(Error::InvalidXForm(format!(
                    "block {} violates |z|^2 <= a b",
                    i + 1
                )));
            }
        }
        Ok(Self { n_qubits, a, b, z })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// Number of 2x2 X-blocks, `2^(N-1)`.
    pub fn blocks(&self) -> usize {
        self.a.len()
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn z(&self) -> &[C64] {
        &self.z
    }

    pub fn trace(&self) -> f64 {
        self.a.iter().chain(&self.b).sum()
    }

    pub(crate) fn from_parts_unchecked(
        n_qubits: usize,
        a: Vec<f64>,
        b: Vec<f64>,
        z: Vec<C64>,
    ) -> Self {
        Self { n_qubits, a, b, z }
    }
}

/// `p |GHZ_N><GHZ_N| + (1 - p) 1/2^N` in X-form.
pub fn isotropic_ghz(n_qubits: usize, p: f64) -> Result<XFormState> {
    check_isotropic(n_qubits, p)?;
    let n = 1usize << (n_qubits - 1);
    let noise = (1.0 - p) / (1u64 << n_qubits) as f64;
    let mut a = vec![noise; n];
    a[0] += p / 2.0;
    let b = a.clone();
    let mut z = vec![C64::default(); n];
    z[0] = real(p / 2.0);
    Ok(XFormState { n_qubits, a, b, z })
}

/// Dense `2^N x 2^N` matrix of an X-form state on `N` qubits.
pub fn xform_to_dense(x: &XFormState) -> DensityMatrix {
    let d = 1usize << x.n_qubits;
    let mut m = ComplexMatrix::zeros(d, d);
    for i in 0..x.blocks() {
        let j = d - 1 - i;
        m[(i, i)] = real(x.a[i]);
        m[(j, j)] = real(x.b[i]);
        m[(i, j)] = x.z[i];
        m[(j, i)] = x.z[i].conj();
    }
    let normalized = (x.trace() - 1.0).abs() <= TAU_TRACE;
    // Each 2x2 block is PSD by the constructor invariants.
    DensityMatrix::from_parts_unchecked(m, vec![2; x.n_qubits], normalized, true)
}

/// Extracts `(a, b, z)`; fails when an entry off the diagonal and anti-diagonal
/// exceeds [`TAU_X`].
pub fn xform_from_dense(rho: &DensityMatrix) -> Result<XFormState> {
    let d = rho.dim();
    if !d.is_power_of_two() || d < 2 {
        return Err(Error::InvalidXForm(format!("dimension {d} is not 2^N")));
    }
    let m = rho.matrix();
    for r in 0..d {
        for col in 0..d {
            if r == col || r + col == d - 1 {
                continue;
            }
            let magnitude = m[(r, col)].norm();
            if magnitude >= TAU_X {
                return Err(Error::NotXForm {
                    row: r,
                    col,
                    magnitude,
                });
            }
        }
    }
    let n_qubits = d.trailing_zeros() as usize;
    let n = d / 2;
    let a = (0..n).map(|i| m[(i, i)].re).collect();
    let b = (0..n).map(|i| m[(d - 1 - i, d - 1 - i)].re).collect();
    let z = (0..n).map(|i| m[(i, d - 1 - i)]).collect();
    XFormState::new(n_qubits, a, b, z)
}

/// Disjoint nonempty blocks of zero-based party indices covering `0..n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Partition {
    blocks: Vec<Vec<usize>>,
}

impl Partition {
    pub fn new(n_parties: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = vec![false; n_parties];
        for block in &blocks {
            if block.is_empty() {
                return Err(Error::InvalidPartition("empty block".into()));
            }
            for &p in block {
                if p >= n_parties {
                    return Err(Error::InvalidPartition(format!(
                        "party {p} out of range for {n_parties} parties"
                    )));
                }
                if std::mem::replace(&mut seen[p], true) {
                    return Err(Error::InvalidPartition(format!("party {p} repeated")));
                }
            }
        }
        if let Some(missing) = seen.iter().position(|&s| !s) {
            return Err(Error::InvalidPartition(format!("party {missing} missing")));
        }
        let mut blocks = blocks;
        for block in &mut blocks {
            block.sort_unstable();
        }
        Ok(Self { blocks })
    }

    /// `block | rest`.
    pub fn bipartition(n_parties: usize, block: &[usize]) -> Result<Self> {
        let rest: Vec<usize> = (0..n_parties).filter(|p| !block.contains(p)).collect();
        Self::new(n_parties, vec![block.to_vec(), rest])
    }

    /// Every bipartition once; the block holding party 0 is listed first.
    pub fn all_bipartitions(n_parties: usize) -> Vec<Self> {
        (1..(1usize << (n_parties - 1)))
            .map(|mask| {
                // Bit k of mask decides whether party k+1 joins party 0.
                let first: Vec<usize> = std::iter::once(0)
                    .chain((1..n_parties).filter(|&p| mask & (1 << (p - 1)) == 0))
                    .collect();
                Self::bipartition(n_parties, &first).expect("constructed partition is valid")
            })
            .collect()
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn n_parties(&self) -> usize {
        self.blocks.iter().map(Vec::len).sum()
    }

    /// Label like `1|23` with one-based parties.
    pub fn label(&self) -> String {
        self.blocks
            .iter()
            .map(|b| b.iter().map(|p| (p + 1).to_string()).collect::<String>())
            .collect::<Vec<_>>()
            .join("|")
    }
}

/// One weighted product `w * (f_1 (x) f_2 (x) ...)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductTerm {
    pub weight: f64,
    pub factors: Vec<DensityMatrix>,
}

/// Convex sum of tensor products of small factors over a fixed ordering of
/// subsystems. Factors of every term concatenate to `global_dims`. Terms are
/// never merged.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductFormState {
    global_dims: Vec<usize>,
    terms: Vec<ProductTerm>,
}

/// Result of a probabilistic local projection.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectionOutcome {
    pub state: ProductFormState,
    /// Total weight surviving the projection, before renormalization.
    pub probability: f64,
}

impl ProductFormState {
    pub fn new(global_dims: Vec<usize>, terms: Vec<ProductTerm>) -> Result<Self> {
        for (t, term) in terms.iter().enumerate() {
            let dims: Vec<usize> = term
                .factors
                .iter()
                .flat_map(|f| f.dims().iter().copied())
                .collect();
            if dims != global_dims {
                return Err(Error::InvalidLayout(format!(
                    "term {t} has dims {dims:?}, expected {global_dims:?}"
                )));
            }
            if !(term.weight >= 0.0) {
                return Err(Error::InvalidLayout(format!(
                    "term {t} has negative weight {}",
                    term.weight
                )));
            }
        }
        Ok(Self { global_dims, terms })
    }

    /// Single-term product of the given factors with weight one.
    pub fn product(factors: Vec<DensityMatrix>) -> Self {
        let global_dims = factors.iter().flat_map(|f| f.dims().to_vec()).collect();
        Self {
            global_dims,
            terms: vec![ProductTerm {
                weight: 1.0,
                factors,
            }],
        }
    }

    pub fn global_dims(&self) -> &[usize] {
        &self.global_dims
    }

    pub fn terms(&self) -> &[ProductTerm] {
        &self.terms
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn total_dim(&self) -> usize {
        self.global_dims.iter().product()
    }

    /// Sum of weights times factor traces.
    pub fn trace(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| t.weight * t.factors.iter().map(DensityMatrix::trace).product::<f64>())
            .sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.trace() - 1.0).abs() <= TAU_TRACE
            && self
                .terms
                .iter()
                .all(|t| t.factors.iter().all(DensityMatrix::is_normalized))
    }

    /// `sum_t w_t (x)_f f`, limited to [`DENSE_LIMIT`].
    pub fn to_dense(&self) -> Result<DensityMatrix> {
        let dim = self.total_dim();
        if dim > DENSE_LIMIT {
            return Err(Error::TooLarge {
                dim,
                limit: DENSE_LIMIT,
            });
        }
        let mut m = ComplexMatrix::zeros(dim, dim);
        let mut positive = true;
        for term in &self.terms {
            let t = linalg::tensor_all(&term.factors).ok_or_else(|| {
                Error::InvalidLayout("term without factors".into())
            })?;
            positive &= t.is_positive();
            m += t.matrix().scale(term.weight);
        }
        let normalized = (m.trace().re - 1.0).abs() <= TAU_TRACE;
        Ok(DensityMatrix::from_parts_unchecked(
            m,
            self.global_dims.clone(),
            normalized,
            positive,
        ))
    }

    /// Maps a global subsystem to `(factor index, local subsystem)`.
    fn locate(&self, term: &ProductTerm, subsystem: usize) -> Result<(usize, usize)> {
        let mut offset = 0;
        for (fi, f) in term.factors.iter().enumerate() {
            let n = f.num_subsystems();
            if subsystem < offset + n {
                return Ok((fi, subsystem - offset));
            }
            offset += n;
        }
        Err(Error::SubsystemOutOfRange {
            index: subsystem,
            len: self.global_dims.len(),
        })
    }

    /// Applies `K rho K^dagger` with `K` (shape `d_out x d_in`) on one global
    /// subsystem of every term. Factors are renormalized and their traces
    /// absorbed into the weights; terms that vanish are dropped. The overall
    /// trace is not restored.
    pub fn apply_local(&self, subsystem: usize, kraus: &ComplexMatrix) -> Result<Self> {
        if subsystem >= self.global_dims.len() {
            return Err(Error::SubsystemOutOfRange {
                index: subsystem,
                len: self.global_dims.len(),
            });
        }
        if kraus.ncols() != self.global_dims[subsystem] {
            return Err(Error::ShapeMismatch {
                left: kraus.shape(),
                right: (self.global_dims[subsystem], self.global_dims[subsystem]),
            });
        }
        let mut global_dims = self.global_dims.clone();
        global_dims[subsystem] = kraus.nrows();

        let mut terms = Vec::with_capacity(self.terms.len());
        for term in &self.terms {
            let (fi, local) = self.locate(term, subsystem)?;
            let factor = &term.factors[fi];
            let mapped = local_map(factor, local, kraus)?;
            let tr = mapped.trace();
            let before = factor.trace();
            if tr.abs() <= TAU_TRACE * before.abs().max(1.0) {
                continue;
            }
            let mut factors = term.factors.clone();
            factors[fi] = mapped.normalize()?;
            terms.push(ProductTerm {
                weight: term.weight * tr / before,
                factors,
            });
        }
        Ok(Self { global_dims, terms })
    }

    fn scale_weights(&mut self, factor: f64) {
        for t in &mut self.terms {
            t.weight *= factor;
        }
    }
}

/// `(I (x) K (x) I) rho (I (x) K^dagger (x) I)` on one local subsystem.
fn local_map(rho: &DensityMatrix, local: usize, kraus: &ComplexMatrix) -> Result<DensityMatrix> {
    let dims = rho.dims();
    let before: usize = dims[..local].iter().product();
    let after: usize = dims[local + 1..].iter().product();
    let full = ComplexMatrix::identity(before, before)
        .kronecker(kraus)
        .kronecker(&ComplexMatrix::identity(after, after));
    let m = &full * rho.matrix() * full.adjoint();
    let mut new_dims = dims.to_vec();
    new_dims[local] = kraus.nrows();
    if new_dims[local] < 2 {
        return Err(Error::InvalidDimension(new_dims[local]));
    }
    Ok(DensityMatrix::from_parts_unchecked(
        m,
        new_dims,
        false,
        rho.is_positive(),
    ))
}

/// All pairwise products of terms; weights multiply.
pub fn product_form_tensor(a: &ProductFormState, b: &ProductFormState) -> ProductFormState {
    let mut global_dims = a.global_dims.clone();
    global_dims.extend_from_slice(&b.global_dims);
    let terms = a
        .terms
        .iter()
        .flat_map(|ta| {
            b.terms.iter().map(move |tb| ProductTerm {
                weight: ta.weight * tb.weight,
                factors: ta.factors.iter().chain(&tb.factors).cloned().collect(),
            })
        })
        .collect();
    ProductFormState { global_dims, terms }
}

fn check_projector(p: &ComplexMatrix) -> Result<()> {
    if !p.is_square() {
        return Err(Error::NotSquare {
            rows: p.nrows(),
            cols: p.ncols(),
        });
    }
    let scale = max_abs(p).max(1.0);
    let herm = linalg::hermiticity_deviation(p);
    let idem = linalg::max_abs_diff(&(p * p), p);
    if herm > TAU_HERM * scale || idem > TAU_HERM * scale * p.nrows() as f64 {
        return Err(Error::NotProjector);
    }
    Ok(())
}

/// Projects one global subsystem with `P` in every term and renormalizes.
/// The returned probability is the surviving weight relative to the input
/// trace.
pub fn product_form_project(
    s: &ProductFormState,
    subsystem: usize,
    projector: &ComplexMatrix,
) -> Result<ProjectionOutcome> {
    check_projector(projector)?;
    let before = s.trace();
    let mut state = s.apply_local(subsystem, projector)?;
    let after = state.trace();
    if state.terms.is_empty() || after <= TAU_TRACE * before.abs().max(1.0) {
        return Err(Error::ZeroProbability);
    }
    state.scale_weights(1.0 / after);
    Ok(ProjectionOutcome {
        state,
        probability: after / before,
    })
}

/// Traces out global subsystems term by term. Fully discarded factors
/// contribute their trace to the weight.
pub fn product_form_partial_trace(s: &ProductFormState, discard: &[usize]) -> Result<ProductFormState> {
    let n = s.global_dims.len();
    if let Some(&bad) = discard.iter().find(|&&k| k >= n) {
        return Err(Error::SubsystemOutOfRange { index: bad, len: n });
    }
    if (0..n).all(|k| discard.contains(&k)) {
        return Err(Error::TraceOutAll);
    }
    let global_dims = (0..n)
        .filter(|k| !discard.contains(k))
        .map(|k| s.global_dims[k])
        .collect();
    let mut terms = Vec::with_capacity(s.terms.len());
    for term in &s.terms {
        let mut weight = term.weight;
        let mut factors = Vec::new();
        let mut offset = 0;
        for f in &term.factors {
            let local: Vec<usize> = (0..f.num_subsystems())
                .filter(|l| discard.contains(&(offset + l)))
                .collect();
            offset += f.num_subsystems();
            if local.len() == f.num_subsystems() {
                weight *= f.trace();
            } else if local.is_empty() {
                factors.push(f.clone());
            } else {
                factors.push(linalg::partial_trace(f, &local)?);
            }
        }
        terms.push(ProductTerm { weight, factors });
    }
    Ok(ProductFormState { global_dims, terms })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProductTermJson {
    pub weight: f64,
    pub factors: Vec<DensityMatrixJson>,
}

/// Wire format `{ "global_dims": [..], "terms": [ { "weight", "factors" } ] }`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProductFormJson {
    pub global_dims: Vec<usize>,
    pub terms: Vec<ProductTermJson>,
}

impl ProductFormState {
    pub fn to_json(&self) -> String {
        let j = ProductFormJson {
            global_dims: self.global_dims.clone(),
            terms: self
                .terms
                .iter()
                .map(|t| ProductTermJson {
                    weight: t.weight,
                    factors: t.factors.iter().map(DensityMatrixJson::from).collect(),
                })
                .collect(),
        };
        serde_json::to_string(&j).expect("plain data serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let j: ProductFormJson = serde_json::from_str(s)?;
        let terms = j
            .terms
            .into_iter()
            .map(|t| {
                Ok(ProductTerm {
                    weight: t.weight,
                    factors: t
                        .factors
                        .into_iter()
                        .map(DensityMatrix::try_from)
                        .collect::<Result<_>>()?,
                })
            })
            .collect::<Result<_>>()?;
        Self::new(j.global_dims, terms)
    }
}

/// Projector onto the span of the given computational basis levels.
pub fn level_projector(dim: usize, levels: &[usize]) -> ComplexMatrix {
    let mut p = ComplexMatrix::zeros(dim, dim);
    for &l in levels {
        p[(l, l)] = real(1.0);
    }
    p
}

/// Isometry `d_in -> d_out` sending `|k>` to `|offset + k>`.
pub fn level_embedding(d_in: usize, d_out: usize, offset: usize) -> ComplexMatrix {
    let mut v = ComplexMatrix::zeros(d_out, d_in);
    for k in 0..d_in {
        v[(offset + k, k)] = c(1.0, 0.0);
    }
    v
}
