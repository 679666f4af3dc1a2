//! PPT-entangled two-qutrit states, PPT-triangle and wedge states, the
//! three-qutrit GME witness `W3`, and a product-form simulation of the
//! three-copy LOCC reduction from a biseparable, PPT-across-every-cut source.
//!
//! Triangle states use the subsystem order `A2 A3 B1 B3 C1 C2`; party 1 holds
//! `B1 C1`, party 2 holds `A2 C2` and party 3 holds `A3 B3`. Wedge states use
//! `A2 A3 B1 B3`.
//!
//! `W3` evaluated on the triangle projection gives
//! `3/(N_x N_y N_z) (xy + x/z + yz - 1)`. The same witness with its parties
//! reversed and levels 1 and 2 swapped on every qutrit, still a GME witness
//! since that is a party relabelling plus a local unitary, gives
//! `3/(N_x N_y N_z) (xy + z/x + yz - 1)`, the form that detects
//! `(1, y, y)` for `y < sqrt(2) - 1`. [`witness_trace_triangle`] uses the
//! latter; the wedge uses the unmodified witness.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, partial_transpose, real, ComplexMatrix, DensityMatrix};
use crate::states::{
    level_embedding, level_projector, product_form_partial_trace, product_form_project,
    product_form_tensor, Partition, ProductFormState, ProductTerm,
};

/// Local dimension of every source subsystem: `|0>` flag plus three levels.
pub const FLAG_DIM: usize = 4;
/// Subsystems per source copy: three per party.
pub const SOURCE_SITES: usize = 9;

fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveParameter { name, value })
    }
}

/// `N_p = 3 (1 + p + 1/p)`.
pub fn ppt_normalization(p: f64) -> f64 {
    3.0 * (1.0 + p + 1.0 / p)
}

fn pair(a: usize, b: usize) -> usize {
    3 * a + b
}

/// `N_p rho^PPT(p)`: the coherent `|00>+|11>+|22>` block plus `p` on
/// `|01>, |12>, |20>` and `1/p` on `|02>, |10>, |21>`.
pub fn qutrit_ppt_unnormalized(p: f64) -> Result<DensityMatrix> {
    check_positive("p", p)?;
    let mut m = ComplexMatrix::zeros(9, 9);
    for a in 0..3 {
        for b in 0..3 {
            m[(pair(a, a), pair(b, b))] = real(1.0);
        }
    }
    for (a, b) in [(0, 1), (1, 2), (2, 0)] {
        m[(pair(a, b), pair(a, b))] = real(p);
    }
    for (a, b) in [(0, 2), (1, 0), (2, 1)] {
        m[(pair(a, b), pair(a, b))] = real(1.0 / p);
    }
    Ok(DensityMatrix::from_parts_unchecked(m, vec![3, 3], false, true))
}

#[derive(Clone, Debug, PartialEq)]
pub struct QutritPPTState {
    pub p: f64,
    pub state: DensityMatrix,
}

impl QutritPPTState {
    pub fn normalization(&self) -> f64 {
        ppt_normalization(self.p)
    }

    /// Ascending spectrum of the partial transpose on the second qutrit.
    pub fn pt_spectrum(&self) -> Vec<f64> {
        partial_transpose(&self.state, &[1])
            .expect("two subsystems")
            .eigenvalues()
    }

    pub fn pt_min_eigenvalue(&self) -> f64 {
        self.pt_spectrum()[0]
    }
}

pub fn qutrit_ppt_state(p: f64) -> Result<QutritPPTState> {
    let m = qutrit_ppt_unnormalized(p)?.into_matrix();
    let state = DensityMatrix::from_parts_unchecked(
        m.unscale(ppt_normalization(p)),
        vec![3, 3],
        true,
        true,
    );
    Ok(QutritPPTState { p, state })
}

/// Qutrit `rho` embedded into levels `1..=3` of each four-level subsystem.
fn lift(rho: &DensityMatrix) -> DensityMatrix {
    let v = level_embedding(3, FLAG_DIM, 1);
    let n = rho.num_subsystems();
    let mut full = v.clone();
    for _ in 1..n {
        full = full.kronecker(&v);
    }
    DensityMatrix::from_parts_unchecked(
        &full * rho.matrix() * full.adjoint(),
        vec![FLAG_DIM; n],
        rho.is_normalized(),
        rho.is_positive(),
    )
}

/// `rho^PPT(x)_{A2A3} (x) rho^PPT(y)_{B1B3} (x) rho^PPT(z)_{C1C2}`.
pub fn triangle_state(x: f64, y: f64, z: f64) -> Result<ProductFormState> {
    check_positive("x", x)?;
    check_positive("y", y)?;
    check_positive("z", z)?;
    Ok(ProductFormState::product(vec![
        qutrit_ppt_state(x)?.state,
        qutrit_ppt_state(y)?.state,
        qutrit_ppt_state(z)?.state,
    ]))
}

/// Zero-based party holding each triangle subsystem `A2 A3 B1 B3 C1 C2`.
pub const TRIANGLE_PARTIES: [usize; 6] = [1, 2, 0, 2, 0, 1];

/// `rho^PPT(x)_{A2A3} (x) rho^PPT(y)_{B1B3}`.
pub fn wedge_state(x: f64, y: f64) -> Result<ProductFormState> {
    check_positive("x", x)?;
    check_positive("y", y)?;
    Ok(ProductFormState::product(vec![
        qutrit_ppt_state(x)?.state,
        qutrit_ppt_state(y)?.state,
    ]))
}

/// `V^dagger rho V` on three qutrits, before and after renormalization.
#[derive(Clone, Debug, PartialEq)]
pub struct SubspaceProjection {
    pub unnormalized: DensityMatrix,
    pub probability: f64,
    pub state: DensityMatrix,
}

fn project_with(dense: &DensityMatrix, site_of: impl Fn(usize, usize, usize) -> usize) -> Result<SubspaceProjection> {
    // V is a 0/1 column selector, so V^dagger rho V just picks entries.
    let sites: Vec<usize> = (0..27).map(|d| site_of(d / 9, (d / 3) % 3, d % 3)).collect();
    let src = dense.matrix();
    let m = ComplexMatrix::from_fn(27, 27, |r, c| src[(sites[r], sites[c])]);
    let unnormalized = DensityMatrix::from_parts_unchecked(m, vec![3, 3, 3], false, dense.is_positive());
    let probability = unnormalized.trace();
    if probability <= linalg::TAU_TRACE {
        return Err(Error::ZeroProbability);
    }
    let state = unnormalized.normalize()?;
    Ok(SubspaceProjection {
        unnormalized,
        probability,
        state,
    })
}

fn digits(d: &[usize]) -> usize {
    d.iter().fold(0, |acc, &x| 3 * acc + x)
}

fn check_qutrits(s: &ProductFormState, n: usize) -> Result<()> {
    if s.global_dims() != vec![3; n].as_slice() {
        return Err(Error::InvalidLayout(format!(
            "expected {n} qutrits, got dims {:?}",
            s.global_dims()
        )));
    }
    Ok(())
}

/// Projection onto `|ii>_{B1C1} |jj>_{A2C2} |kk>_{A3B3} -> |ijk>`.
pub fn project_triangle_to_d(s: &ProductFormState) -> Result<SubspaceProjection> {
    check_qutrits(s, 6)?;
    project_with(&s.to_dense()?, |i, j, k| digits(&[j, k, i, k, i, j]))
}

/// Projection onto `|i>_{B1} |j>_{A2} |kk>_{A3B3} -> |ijk>`.
pub fn project_wedge_to_d(s: &ProductFormState) -> Result<SubspaceProjection> {
    check_qutrits(s, 4)?;
    project_with(&s.to_dense()?, |i, j, k| digits(&[j, k, i, k]))
}

/// Basis labels of the twelve diagonal projectors of `W3`.
pub const W3_DIAGONAL: [&str; 12] = [
    "000", "001", "011", "020", "101", "111", "112", "122", "200", "212", "220", "222",
];

#[derive(Clone, Debug, PartialEq)]
pub struct WitnessW3 {
    matrix: DensityMatrix,
}

impl WitnessW3 {
    pub fn matrix(&self) -> &DensityMatrix {
        &self.matrix
    }

    /// `Re Tr[W rho]` for any three-qutrit operator.
    pub fn expectation(&self, rho: &DensityMatrix) -> Result<f64> {
        if rho.dims() != [3, 3, 3] {
            return Err(Error::DimsMismatch {
                dims: rho.dims().to_vec(),
                size: 27,
            });
        }
        Ok((self.matrix.matrix() * rho.matrix()).trace().re)
    }
}

fn label_index(s: &str) -> usize {
    s.bytes().fold(0, |acc, b| 3 * acc + usize::from(b - b'0'))
}

/// Twelve diagonal projectors minus `|aaa><bbb|` for `a != b`.
pub fn witness_w3() -> WitnessW3 {
    let mut m = ComplexMatrix::zeros(27, 27);
    for l in W3_DIAGONAL {
        m[(label_index(l), label_index(l))] = real(1.0);
    }
    for a in ["000", "111", "222"] {
        for b in ["000", "111", "222"] {
            if a != b {
                m[(label_index(a), label_index(b))] = real(-1.0);
            }
        }
    }
    WitnessW3 {
        matrix: DensityMatrix::from_parts_unchecked(m, vec![3, 3, 3], false, false),
    }
}

/// `W3` with the party order reversed and levels 1, 2 swapped on each qutrit.
pub fn witness_w3_mirrored() -> WitnessW3 {
    let w = witness_w3();
    let swap = |d: usize| [0, 2, 1][d];
    let map = |idx: usize| {
        let (a, b, c) = (idx / 9, (idx / 3) % 3, idx % 3);
        9 * swap(c) + 3 * swap(b) + swap(a)
    };
    let src = w.matrix.matrix();
    let mut m = ComplexMatrix::zeros(27, 27);
    for r in 0..27 {
        for c in 0..27 {
            m[(map(r), map(c))] = src[(r, c)];
        }
    }
    WitnessW3 {
        matrix: DensityMatrix::from_parts_unchecked(m, vec![3, 3, 3], false, false),
    }
}

/// `3/(N_x N_y N_z) (xy + z/x + yz - 1)`: the mirrored witness on the
/// unnormalized triangle projection.
pub fn witness_trace_triangle(x: f64, y: f64, z: f64) -> Result<f64> {
    check_positive("x", x)?;
    check_positive("y", y)?;
    check_positive("z", z)?;
    let n = ppt_normalization(x) * ppt_normalization(y) * ppt_normalization(z);
    Ok(3.0 / n * (x * y + z / x + y * z - 1.0))
}

/// `3/(N_x N_y N_z) (xy + x/z + yz - 1)`: the unmodified witness on the
/// unnormalized triangle projection.
pub fn witness_trace_triangle_unmirrored(x: f64, y: f64, z: f64) -> Result<f64> {
    check_positive("x", x)?;
    check_positive("y", y)?;
    check_positive("z", z)?;
    let n = ppt_normalization(x) * ppt_normalization(y) * ppt_normalization(z);
    Ok(3.0 / n * (x * y + x / z + y * z - 1.0))
}

/// Dense counterpart of [`witness_trace_triangle`].
pub fn witness_trace_triangle_dense(x: f64, y: f64, z: f64) -> Result<f64> {
    let proj = project_triangle_to_d(&triangle_state(x, y, z)?)?;
    witness_w3_mirrored().expectation(&proj.unnormalized)
}

/// `3/(N_x N_y) (x + y + xy - 1)`.
pub fn witness_trace_wedge(x: f64, y: f64) -> Result<f64> {
    check_positive("x", x)?;
    check_positive("y", y)?;
    Ok(3.0 / (ppt_normalization(x) * ppt_normalization(y)) * (x + y + x * y - 1.0))
}

/// Dense counterpart of [`witness_trace_wedge`].
pub fn witness_trace_wedge_dense(x: f64, y: f64) -> Result<f64> {
    let proj = project_wedge_to_d(&wedge_state(x, y)?)?;
    witness_w3().expectation(&proj.unnormalized)
}

/// Party owning source site `s`.
///
/// Sites are grouped by slot `n = s / 3`: the slot holds party `n`'s
/// subsystem first, then the other two parties in increasing order.
pub fn source_party(site: usize) -> usize {
    let slot = site / 3;
    match site % 3 {
        0 => slot,
        r => (0..3).filter(|&q| q != slot).nth(r - 1).expect("two others"),
    }
}

/// Validates a probability vector of length three.
pub fn check_probabilities(probs: &[f64]) -> Result<()> {
    let sum: f64 = probs.iter().sum();
    if probs.len() != 3
        || probs.iter().any(|p| !(p.is_finite() && *p >= 0.0))
        || (sum - 1.0).abs() > 1e-12
    {
        return Err(Error::InvalidProbabilities(probs.to_vec()));
    }
    Ok(())
}

fn flag_state() -> DensityMatrix {
    DensityMatrix::from_diagonal(&[1.0, 0.0, 0.0, 0.0], vec![FLAG_DIM]).expect("diagonal state")
}

fn single_mixed() -> DensityMatrix {
    DensityMatrix::from_diagonal(&[0.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], vec![FLAG_DIM])
        .expect("diagonal state")
}

/// `sum_i p_i rho_{A_i^(i)} (x) rho^PPT_{A_j^(i) A_k^(i)} (x) |0><0|^(rest)`
/// over nine four-level sites (see [`source_party`]); the pair parameters
/// are `x, y, z` for `i = 1, 2, 3`. `rho_{A_i^(i)}` is maximally mixed on the
/// non-flag levels. Terms with `p_i = 0` are omitted.
pub fn biseparable_source_state(
    p1: f64,
    p2: f64,
    p3: f64,
    x: f64,
    y: f64,
    z: f64,
) -> Result<ProductFormState> {
    let probs = [p1, p2, p3];
    check_probabilities(&probs)?;
    let params = [x, y, z];
    for (name, v) in ["x", "y", "z"].into_iter().zip(params) {
        check_positive(name, v)?;
    }
    let mut terms = Vec::new();
    for (i, (&w, &param)) in probs.iter().zip(&params).enumerate() {
        if w == 0.0 {
            continue;
        }
        let mut factors = Vec::new();
        for slot in 0..3 {
            if slot == i {
                factors.push(single_mixed());
                factors.push(lift(&qutrit_ppt_state(param)?.state));
            } else {
                factors.extend(std::iter::repeat_with(flag_state).take(3));
            }
        }
        terms.push(ProductTerm { weight: w, factors });
    }
    ProductFormState::new(vec![FLAG_DIM; SOURCE_SITES], terms)
}

/// Minimum over terms and factors of the partial-transpose minimum
/// eigenvalue across `block | rest`, where `parties[s]` owns global site `s`.
/// A nonnegative value certifies that the state is PPT across the cut.
pub fn product_form_pt_min(s: &ProductFormState, parties: &[usize], block: &[usize]) -> Result<f64> {
    if parties.len() != s.global_dims().len() {
        return Err(Error::InvalidLayout(format!(
            "{} party labels for {} sites",
            parties.len(),
            s.global_dims().len()
        )));
    }
    let mut min = f64::INFINITY;
    for term in s.terms() {
        if term.weight == 0.0 {
            continue;
        }
        let mut offset = 0;
        for f in &term.factors {
            let n = f.num_subsystems();
            let local: Vec<usize> = (0..n)
                .filter(|&l| block.contains(&parties[offset + l]))
                .collect();
            offset += n;
            let m = if local.is_empty() || local.len() == n {
                // Full transpose preserves the spectrum.
                f.min_eigenvalue()
            } else {
                partial_transpose(f, &local)?.min_eigenvalue()
            };
            min = min.min(m);
        }
    }
    Ok(min)
}

/// PPT certificate of a source copy across each single-party cut.
pub fn source_ppt_certificate(s: &ProductFormState) -> Result<Vec<(Partition, f64)>> {
    let parties: Vec<usize> = (0..SOURCE_SITES).map(source_party).collect();
    (0..3)
        .map(|k| {
            let cut = Partition::bipartition(3, &[k])?;
            let v = product_form_pt_min(s, &parties, &[k])?;
            Ok((cut, v))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct LoccOutcome {
    /// Six qutrits in triangle order `A2 A3 B1 B3 C1 C2`.
    pub state: ProductFormState,
    /// Product of the three projection probabilities.
    pub success_probability: f64,
    pub step_probabilities: [f64; 3],
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LoccReport {
    pub p: [f64; 3],
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub success_probability: f64,
    pub max_deviation_from_triangle: f64,
    pub witness: f64,
    pub gme_detected: bool,
}

/// Three-copy reduction: copy `c` projects its slot-`c` own site onto the
/// non-flag levels, keeps that slot's pair, discards everything else and
/// compresses the kept sites to qutrits.
pub fn simulate_locc_triangle(copies: &[ProductFormState; 3]) -> Result<LoccOutcome> {
    for c in copies {
        if c.global_dims() != [FLAG_DIM; SOURCE_SITES] {
            return Err(Error::InvalidLayout(format!(
                "source copy has dims {:?}",
                c.global_dims()
            )));
        }
    }
    let joint = product_form_tensor(&product_form_tensor(&copies[0], &copies[1]), &copies[2]);
    let off_flag = level_projector(FLAG_DIM, &[1, 2, 3]);
    let mut state = joint;
    let mut step_probabilities = [0.0; 3];
    let mut keep = Vec::new();
    for (c, prob) in step_probabilities.iter_mut().enumerate() {
        let own = c * SOURCE_SITES + 3 * c;
        let out = product_form_project(&state, own, &off_flag)?;
        *prob = out.probability;
        state = out.state;
        keep.extend([own + 1, own + 2]);
    }
    let discard: Vec<usize> = (0..3 * SOURCE_SITES).filter(|s| !keep.contains(s)).collect();
    let mut reduced = product_form_partial_trace(&state, &discard)?;
    let compress = level_embedding(3, FLAG_DIM, 1).adjoint();
    for site in 0..keep.len() {
        reduced = reduced.apply_local(site, &compress)?;
    }
    Ok(LoccOutcome {
        state: reduced,
        success_probability: step_probabilities.iter().product(),
        step_probabilities,
    })
}

/// Builds three source copies, runs the reduction, compares it with the
/// directly constructed triangle state and evaluates the witness.
pub fn locc_demo(p: [f64; 3], x: f64, y: f64, z: f64) -> Result<LoccReport> {
    let source = biseparable_source_state(p[0], p[1], p[2], x, y, z)?;
    let outcome = simulate_locc_triangle(&[source.clone(), source.clone(), source])?;
    let got = outcome.state.to_dense()?;
    let want = triangle_state(x, y, z)?.to_dense()?;
    let proj = project_triangle_to_d(&outcome.state)?;
    let witness = witness_w3_mirrored().expectation(&proj.unnormalized)?;
    Ok(LoccReport {
        p,
        x,
        y,
        z,
        success_probability: outcome.success_probability,
        max_deviation_from_triangle: linalg::max_abs_diff(got.matrix(), want.matrix()),
        witness,
        gme_detected: witness < 0.0,
    })
}
