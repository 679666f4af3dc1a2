//! Partition separability of isotropic GHZ states via the partial transpose,
//! and an explicit biseparable decomposition of two copies of the
//! three-qubit isotropic GHZ state.
//!
//! Six-qubit basis states are labelled `m = 1..=64`, the decimal value of the
//! bit string `a1 b1 a2 b2 a3 b3` plus one; qubit order is
//! `A1 B1 A2 B2 A3 B3`, so party `k` owns qubits `2k` and `2k + 1`.
//!
//! The tabulated list of `Gamma_1` tuples contains `gamma(11,12,31,31)`, which
//! repeats an index. [`gamma_big_1`] replaces it with the unique single-index
//! edit that both forms a valid rectangle and makes the decomposition
//! identity exact; the edit found is `gamma(11,12,31,32)` and is reported
//! through [`gamma1_corrections`].

use std::sync::OnceLock;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{
    self, c, partial_transpose, permute_subsystems, real, ComplexMatrix, DensityMatrix, C64,
    TAU_TRACE,
};
use crate::states::{isotropic_ghz, xform_to_dense, Partition};

/// Absolute entrywise tolerance for the decomposition identity.
pub const TAU_DECOMP: f64 = 1e-10;

const QUBITS: usize = 6;
const DIM: usize = 64;

/// `Gamma_1` tuples exactly as tabulated, including the defective one.
pub const GAMMA1_TABULATED: [[usize; 4]; 24] = [
    [2, 10, 36, 44],
    [2, 12, 34, 44],
    [33, 37, 50, 54],
    [3, 7, 20, 24],
    [3, 8, 19, 24],
    [5, 7, 45, 47],
    [5, 15, 37, 47],
    [9, 10, 29, 30],
    [9, 14, 25, 30],
    [18, 20, 58, 60],
    [18, 28, 50, 60],
    [41, 45, 58, 62],
    [41, 46, 57, 62],
    [21, 29, 55, 63],
    [21, 31, 53, 63],
    [35, 36, 55, 56],
    [35, 40, 51, 56],
    [6, 8, 46, 48],
    [6, 14, 40, 48],
    [11, 12, 31, 31],
    [11, 15, 28, 32],
    [17, 19, 57, 59],
    [17, 25, 51, 59],
    [33, 34, 53, 54],
];

pub const GAMMA2_TUPLES: [[usize; 4]; 12] = [
    [1, 2, 21, 22],
    [1, 5, 18, 22],
    [1, 6, 17, 22],
    [1, 3, 41, 43],
    [1, 9, 35, 43],
    [1, 11, 33, 43],
    [22, 24, 62, 64],
    [22, 30, 56, 64],
    [22, 32, 54, 64],
    [43, 44, 63, 64],
    [43, 47, 60, 64],
    [43, 48, 59, 64],
];

/// Product labels of the sixteen terms of the four-qubit state `sigma`.
pub const SIGMA_TERMS: [&str; 16] = [
    "++++", "+-+-", "-+-+", "----", "+r+l", "+l+r", "-r-l", "-l-r", "r+l+", "r-l-", "l+r+",
    "l-r-", "rrll", "rllr", "lrrl", "llrr",
];

/// Diagonal index classes of `64 (1-2p)^2 rho_diag`, one-based.
pub const DIAG_CLASSES: [&[usize]; 4] = [
    &[1, 22, 43, 64],
    &[
        2, 3, 5, 6, 9, 11, 17, 18, 21, 24, 30, 32, 33, 35, 41, 44, 47, 48, 54, 56, 59, 60, 62, 63,
    ],
    &[4, 13, 16, 23, 26, 27, 38, 39, 42, 49, 52, 61],
    &[
        7, 8, 10, 12, 14, 15, 19, 20, 25, 28, 29, 31, 34, 36, 37, 40, 45, 46, 50, 51, 53, 55, 57,
        58,
    ],
];

/// `(1-p)^2`, `1 - 10p/3 + 7p^2/3`, `1 - 2p - 13p^2/3`, `1 - 6p + 31p^2/3`.
pub const DIAG_CLASS_POLYNOMIALS: [Quadratic; 4] = [
    Quadratic::new(1.0, -2.0, 1.0),
    Quadratic::new(1.0, -10.0 / 3.0, 7.0 / 3.0),
    Quadratic::new(1.0, -2.0, -13.0 / 3.0),
    Quadratic::new(1.0, -6.0, 31.0 / 3.0),
];

/// Single-qubit states `|+>, |->, |r>, |l>`.
pub fn basis_ket(label: char) -> Option<[C64; 2]> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Some(match label {
        '+' => [real(s), real(s)],
        '-' => [real(s), real(-s)],
        'r' => [real(s), c(0.0, -s)],
        'l' => [real(s), c(0.0, s)],
        _ => return None,
    })
}

fn product_ket(labels: &str) -> Vec<C64> {
    labels.chars().fold(vec![real(1.0)], |acc, ch| {
        let k = basis_ket(ch).expect("known single-qubit label");
        acc.iter()
            .flat_map(|a| k.iter().map(move |b| a * b))
            .collect()
    })
}

/// Uniform mixture of product projectors.
fn product_mixture(labels: &[&str]) -> ComplexMatrix {
    let d = 1usize << labels[0].len();
    let mut m = ComplexMatrix::zeros(d, d);
    for l in labels {
        let v = nalgebra::DVector::from_vec(product_ket(l));
        m += &v * v.adjoint();
    }
    m.unscale(labels.len() as f64)
}

/// `1/4 (|++><++| + |--><--| + |rl><rl| + |lr><lr|)`.
pub fn gamma_base() -> DensityMatrix {
    let m = product_mixture(&["++", "--", "rl", "lr"]);
    DensityMatrix::from_parts_unchecked(m, vec![2, 2], true, true)
}

fn party_mask(party: usize) -> usize {
    0b11 << (4 - 2 * party)
}

fn touched_parties(diff: usize) -> Vec<usize> {
    (0..3).filter(|&q| diff & party_mask(q) != 0).collect()
}

/// Four one-based basis labels `m1..m4` receiving `|00>, |01>, |10>, |11>`.
///
/// They must form a rectangle `|i i'>, |i j'>, |j i'>, |j j'>` where the
/// unprimed labels live on one side `C` of a single-party bipartition and the
/// primed labels on the other side `D`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EmbeddingSpec {
    indices: [usize; 4],
    cut: Partition,
}

impl EmbeddingSpec {
    pub fn new(m1: usize, m2: usize, m3: usize, m4: usize) -> Result<Self> {
        Self::from_array([m1, m2, m3, m4])
    }

    pub fn from_array(indices: [usize; 4]) -> Result<Self> {
        let violation = Error::RectangleViolation { indices };
        if indices.iter().any(|&m| m == 0 || m > DIM) {
            return Err(violation);
        }
        for i in 0..4 {
            if indices[i + 1..].contains(&indices[i]) {
                return Err(violation);
            }
        }
        let b = indices.map(|m| m - 1);
        // m1 -> m2 changes the D side, m1 -> m3 the C side.
        let d_side = b[0] ^ b[1];
        let c_side = b[0] ^ b[2];
        if b[3] != b[0] ^ d_side ^ c_side {
            return Err(violation);
        }
        let pd = touched_parties(d_side);
        let pc = touched_parties(c_side);
        if pd.is_empty() || pc.is_empty() || pd.iter().any(|q| pc.contains(q)) {
            return Err(violation);
        }
        let block = if pc.len() == 1 { pc } else { pd };
        if block.len() != 1 {
            return Err(violation);
        }
        let cut = Partition::bipartition(3, &block)?;
        Ok(Self { indices, cut })
    }

    pub fn indices(&self) -> [usize; 4] {
        self.indices
    }

    /// Single-party bipartition across which the embedded state is separable.
    pub fn cut(&self) -> &Partition {
        &self.cut
    }
}

/// `V gamma V^dagger` with `V |ab> = |m_(2a+b+1)>`.
pub fn embed_gamma(spec: &EmbeddingSpec) -> DensityMatrix {
    let g = gamma_base();
    let mut m = ComplexMatrix::zeros(DIM, DIM);
    for (r, &mr) in spec.indices.iter().enumerate() {
        for (s, &ms) in spec.indices.iter().enumerate() {
            m[(mr - 1, ms - 1)] = g.matrix()[(r, s)];
        }
    }
    DensityMatrix::from_parts_unchecked(m, vec![2; QUBITS], true, true)
}

fn average(specs: &[EmbeddingSpec]) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(DIM, DIM);
    for s in specs {
        m += embed_gamma(s).matrix();
    }
    m.unscale(specs.len() as f64)
}

fn specs_of(tuples: &[[usize; 4]]) -> Result<Vec<EmbeddingSpec>> {
    tuples.iter().map(|&t| EmbeddingSpec::from_array(t)).collect()
}

fn six_qubit_state(m: ComplexMatrix) -> DensityMatrix {
    DensityMatrix::from_parts_unchecked(m, vec![2; QUBITS], true, true)
}

/// `Gamma_1` from the tabulated tuples; fails on the defective tuple.
pub fn gamma_big_1_tabulated() -> Result<DensityMatrix> {
    Ok(six_qubit_state(average(&specs_of(&GAMMA1_TABULATED)?)))
}

/// Replacement of a tabulated tuple by a corrected one.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TupleCorrection {
    /// Zero-based position in the tabulated list.
    pub term: usize,
    pub tabulated: [usize; 4],
    pub corrected: [usize; 4],
}

impl std::fmt::Display for TupleCorrection {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let [a, b, c, d] = self.tabulated;
        let [e, g, h, i] = self.corrected;
        write!(
            f,
            "Gamma1 term {}: gamma({a},{b},{c},{d}) -> gamma({e},{g},{h},{i})",
            self.term + 1
        )
    }
}

struct Gamma1 {
    specs: Vec<EmbeddingSpec>,
    corrections: Vec<TupleCorrection>,
}

/// Grid on which a candidate correction must make the identity exact.
const CORRECTION_PROBES: [f64; 3] = [0.1, 0.2, 0.3];

fn resolve_gamma1() -> Result<Gamma1> {
    let parsed: Vec<Result<EmbeddingSpec>> = GAMMA1_TABULATED
        .iter()
        .map(|&t| EmbeddingSpec::from_array(t))
        .collect();
    let bad: Vec<usize> = (0..parsed.len()).filter(|&i| parsed[i].is_err()).collect();
    let good: Vec<EmbeddingSpec> = parsed.iter().filter_map(|r| r.clone().ok()).collect();
    match bad.as_slice() {
        [] => Ok(Gamma1 {
            specs: good,
            corrections: Vec::new(),
        }),
        &[term] => {
            let tabulated = GAMMA1_TABULATED[term];
            let mut accepted = Vec::new();
            for pos in 0..4 {
                for value in 1..=DIM {
                    let mut t = tabulated;
                    t[pos] = value;
                    let Ok(spec) = EmbeddingSpec::from_array(t) else {
                        continue;
                    };
                    let mut specs = good.clone();
                    specs.insert(term, spec);
                    let g1 = average(&specs);
                    let exact = CORRECTION_PROBES
                        .iter()
                        .all(|&p| residual_for(p, &g1).is_ok_and(|r| r <= TAU_DECOMP));
                    if exact {
                        accepted.push(specs);
                    }
                }
            }
            if accepted.len() != 1 {
                return Err(Error::RectangleViolation { indices: tabulated });
            }
            let specs = accepted.pop().expect("one candidate");
            let corrected = specs[term].indices();
            Ok(Gamma1 {
                specs,
                corrections: vec![TupleCorrection {
                    term,
                    tabulated,
                    corrected,
                }],
            })
        }
        _ => Err(Error::RectangleViolation {
            indices: GAMMA1_TABULATED[bad[1]],
        }),
    }
}

fn gamma1() -> Result<&'static Gamma1> {
    static CELL: OnceLock<Result<Gamma1>> = OnceLock::new();
    CELL.get_or_init(resolve_gamma1).as_ref().map_err(Clone::clone)
}

/// Embeddings making up `Gamma_1` after correction, in tabulated order.
pub fn gamma1_specs() -> Result<&'static [EmbeddingSpec]> {
    Ok(&gamma1()?.specs)
}

/// Corrections applied to the tabulated `Gamma_1` list.
pub fn gamma1_corrections() -> Result<&'static [TupleCorrection]> {
    Ok(&gamma1()?.corrections)
}

/// `1/24` times the sum of the 24 embedded `gamma` terms.
pub fn gamma_big_1() -> Result<DensityMatrix> {
    Ok(six_qubit_state(average(gamma1_specs()?)))
}

pub fn gamma2_specs() -> Result<Vec<EmbeddingSpec>> {
    specs_of(&GAMMA2_TUPLES)
}

/// `1/12` times the sum of the 12 embedded `gamma` terms.
pub fn gamma_big_2() -> Result<DensityMatrix> {
    Ok(six_qubit_state(average(&gamma2_specs()?)))
}

/// The sixteen-term four-qubit state `sigma`.
pub fn sigma_small() -> DensityMatrix {
    let m = product_mixture(&SIGMA_TERMS);
    DensityMatrix::from_parts_unchecked(m, vec![2; 4], true, true)
}

/// Isometry `U_k` (64 x 16) for zero-based party `k`.
///
/// Sigma's qubits `(a, b, x, y)` land on `A_k = a`, `B_k = b`, and on
/// `A_m = x`, `B_m = y` for both other parties `m`.
pub fn sigma_isometry(party: usize) -> ComplexMatrix {
    assert!(party < 3, "party index {party} out of range");
    let mut u = ComplexMatrix::zeros(DIM, 16);
    for s in 0..16 {
        let own = s >> 2;
        let other = s & 0b11;
        let out = (0..3)
            .map(|q| (if q == party { own } else { other }) << (4 - 2 * q))
            .sum::<usize>();
        u[(out, s)] = real(1.0);
    }
    u
}

/// `U_k sigma U_k^dagger`, separable across `k | rest`.
pub fn sigma_term(party: usize) -> DensityMatrix {
    let u = sigma_isometry(party);
    six_qubit_state(&u * sigma_small().matrix() * u.adjoint())
}

/// `1/3 sum_k U_k sigma U_k^dagger`.
pub fn sigma_big() -> DensityMatrix {
    let mut m = ComplexMatrix::zeros(DIM, DIM);
    for k in 0..3 {
        m += sigma_term(k).matrix();
    }
    six_qubit_state(m.unscale(3.0))
}

fn gamma2_matrix() -> &'static ComplexMatrix {
    static CELL: OnceLock<ComplexMatrix> = OnceLock::new();
    CELL.get_or_init(|| average(&gamma2_specs().expect("tabulated Gamma2 tuples are rectangles")))
}

fn sigma_matrix() -> &'static ComplexMatrix {
    static CELL: OnceLock<ComplexMatrix> = OnceLock::new();
    CELL.get_or_init(|| sigma_big().into_matrix())
}

/// Zero-based class index of the one-based label `m`.
pub fn diag_class(m: usize) -> Option<usize> {
    DIAG_CLASSES.iter().position(|cls| cls.contains(&m))
}

/// Diagonal of `64 (1-2p)^2 rho_diag`, indexed by `m - 1`.
pub fn rho_diag_numerators(p: f64) -> Vec<f64> {
    (1..=DIM)
        .map(|m| DIAG_CLASS_POLYNOMIALS[diag_class(m).expect("classes cover 1..=64")].eval(p))
        .collect()
}

fn singular(p: f64) -> bool {
    (1.0 - 2.0 * p).powi(2) <= f64::EPSILON
}

/// `rho_diag` from the closed-form class polynomials.
///
/// At `p = 1/2` the normalization `(1-2p)^2` vanishes; the numerators divided
/// by 64 are returned instead and the result is flagged unnormalized.
pub fn rho_diag_closed_form(p: f64) -> DensityMatrix {
    let scale = if singular(p) {
        64.0
    } else {
        64.0 * (1.0 - 2.0 * p).powi(2)
    };
    let entries: Vec<f64> = rho_diag_numerators(p).iter().map(|v| v / scale).collect();
    let mut m = ComplexMatrix::zeros(DIM, DIM);
    for (i, &e) in entries.iter().enumerate() {
        m[(i, i)] = real(e);
    }
    let trace: f64 = entries.iter().sum();
    let normalized = !singular(p) && (trace - 1.0).abs() <= TAU_TRACE;
    let positive = entries.iter().all(|&e| e >= 0.0);
    DensityMatrix::from_parts_unchecked(m, vec![2; QUBITS], normalized, positive)
}

/// `rho_3(p) (x) rho_3(p)` reordered to `A1 B1 A2 B2 A3 B3`.
pub fn two_copy_target(p: f64) -> Result<DensityMatrix> {
    let rho = xform_to_dense(&isotropic_ghz(3, p)?);
    permute_subsystems(&linalg::tensor(&rho, &rho), &[0, 3, 1, 4, 2, 5])
}

/// `(1-2p)^2`, `p(3-7p)`, `p(1-p)`, `4p^2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GroupWeights {
    pub diagonal: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub sigma: f64,
}

impl GroupWeights {
    pub fn at(p: f64) -> Self {
        Self {
            diagonal: (1.0 - 2.0 * p).powi(2),
            gamma1: p * (3.0 - 7.0 * p),
            gamma2: p * (1.0 - p),
            sigma: 4.0 * p * p,
        }
    }

    fn all_nonnegative(&self) -> bool {
        [self.diagonal, self.gamma1, self.gamma2, self.sigma]
            .iter()
            .all(|&w| w >= 0.0)
    }
}

fn residual_for(p: f64, gamma1: &ComplexMatrix) -> Result<f64> {
    let w = GroupWeights::at(p);
    let mut sum = gamma1 * real(w.gamma1) + gamma2_matrix() * real(w.gamma2);
    sum += sigma_matrix() * real(w.sigma);
    for (i, v) in rho_diag_numerators(p).iter().enumerate() {
        sum[(i, i)] += real(v / 64.0);
    }
    Ok(linalg::max_abs_diff(&sum, two_copy_target(p)?.matrix()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ComponentGroup {
    Diagonal,
    Gamma1,
    Gamma2,
    Sigma,
}

/// One weighted term; `partition` is `None` for the diagonal component.
#[derive(Clone, Debug, PartialEq)]
pub struct Component {
    pub group: ComponentGroup,
    pub weight: f64,
    pub partition: Option<Partition>,
    pub state: DensityMatrix,
}

#[derive(Clone, Debug)]
pub struct BisepDecomposition {
    p: f64,
    components: Vec<Component>,
    target: DensityMatrix,
    corrections: Vec<TupleCorrection>,
}

/// `rho_3(p)^(x2) = (1-2p)^2 rho_diag + p(3-7p) Gamma_1 + p(1-p) Gamma_2 + 4p^2 Sigma`,
/// expanded into its 40 individually separable or diagonal terms.
///
/// At `p = 1/2` the diagonal term keeps weight 1 with the unnormalized
/// numerator matrix, so the identity still holds.
pub fn two_copy_decomposition(p: f64) -> Result<BisepDecomposition> {
    let target = two_copy_target(p)?;
    let w = GroupWeights::at(p);
    let g1 = gamma1()?;
    let mut components = Vec::with_capacity(40);
    components.push(Component {
        group: ComponentGroup::Diagonal,
        weight: if singular(p) { 1.0 } else { w.diagonal },
        partition: None,
        state: rho_diag_closed_form(p),
    });
    let embedded = |group, weight, specs: &[EmbeddingSpec]| -> Vec<Component> {
        specs
            .iter()
            .map(|s| Component {
                group,
                weight,
                partition: Some(s.cut().clone()),
                state: embed_gamma(s),
            })
            .collect()
    };
    components.extend(embedded(ComponentGroup::Gamma1, w.gamma1 / 24.0, &g1.specs));
    components.extend(embedded(ComponentGroup::Gamma2, w.gamma2 / 12.0, &gamma2_specs()?));
    for k in 0..3 {
        components.push(Component {
            group: ComponentGroup::Sigma,
            weight: w.sigma / 3.0,
            partition: Some(Partition::bipartition(3, &[k])?),
            state: sigma_term(k),
        });
    }
    Ok(BisepDecomposition {
        p,
        components,
        target,
        corrections: g1.corrections.clone(),
    })
}

impl BisepDecomposition {
    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn target(&self) -> &DensityMatrix {
        &self.target
    }

    pub fn corrections(&self) -> &[TupleCorrection] {
        &self.corrections
    }

    pub fn reconstruction(&self) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(DIM, DIM);
        for comp in &self.components {
            m += comp.state.matrix() * real(comp.weight);
        }
        m
    }

    /// `max |sum_i w_i rho_i - target|`.
    pub fn residual_max(&self) -> f64 {
        linalg::max_abs_diff(&self.reconstruction(), self.target.matrix())
    }

    pub fn weights(&self) -> GroupWeights {
        GroupWeights::at(self.p)
    }

    /// Smallest diagonal entry of the diagonal component.
    pub fn diag_min(&self) -> f64 {
        let d = self.components[0].state.matrix();
        (0..DIM).map(|i| d[(i, i)].re).fold(f64::INFINITY, f64::min)
    }

    /// All weights nonnegative and the diagonal component entrywise nonnegative.
    pub fn valid(&self) -> bool {
        self.weights().all_nonnegative() && self.diag_min() >= -TAU_DECOMP
    }

    pub fn report(&self) -> VerificationReport {
        VerificationReport {
            p: self.p,
            residual_max: self.residual_max(),
            weights: self.weights(),
            diag_min: self.diag_min(),
            valid: self.valid(),
            gamma1_correction_applied: if self.corrections.is_empty() {
                None
            } else {
                Some(
                    self.corrections
                        .iter()
                        .map(ToString::to_string)
                        .collect::<Vec<_>>()
                        .join("; "),
                )
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub p: f64,
    pub residual_max: f64,
    pub weights: GroupWeights,
    pub diag_min: f64,
    pub valid: bool,
    pub gamma1_correction_applied: Option<String>,
}

/// Minimum eigenvalue of the component's partial transpose across its
/// declared cut; `None` for the diagonal component.
pub fn component_pt_min(component: &Component) -> Result<Option<f64>> {
    let Some(cut) = &component.partition else {
        return Ok(None);
    };
    let qubits: Vec<usize> = cut.blocks()[0]
        .iter()
        .flat_map(|&q| [2 * q, 2 * q + 1])
        .collect();
    Ok(Some(partial_transpose(&component.state, &qubits)?.min_eigenvalue()))
}

/// `c0 + c1 p + c2 p^2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quadratic {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
}

impl Quadratic {
    pub const fn new(c0: f64, c1: f64, c2: f64) -> Self {
        Self { c0, c1, c2 }
    }

    pub fn eval(&self, p: f64) -> f64 {
        self.c0 + p * (self.c1 + p * self.c2)
    }

    /// Real roots, computed without cancellation.
    pub fn roots(&self) -> Vec<f64> {
        let (a, b, c0) = (self.c2, self.c1, self.c0);
        if a == 0.0 {
            return if b == 0.0 { vec![] } else { vec![-c0 / b] };
        }
        let disc = b * b - 4.0 * a * c0;
        if disc < 0.0 {
            return vec![];
        }
        let q = -0.5 * (b + b.signum() * disc.sqrt());
        if q == 0.0 {
            return vec![0.0];
        }
        vec![q / a, c0 / q]
    }
}

/// Every polynomial that must be nonnegative for the decomposition to be a
/// convex combination of states.
pub fn validity_conditions() -> Vec<Quadratic> {
    let mut v = vec![
        Quadratic::new(1.0, -4.0, 4.0),
        Quadratic::new(0.0, 3.0, -7.0),
        Quadratic::new(0.0, 1.0, -1.0),
        Quadratic::new(0.0, 0.0, 4.0),
    ];
    v.extend(DIAG_CLASS_POLYNOMIALS);
    v
}

/// Closed interval `[p_lo, p_hi]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ValidityInterval {
    pub p_lo: f64,
    pub p_hi: f64,
}

/// Maximal closed intervals on which every condition holds. Endpoints are
/// polynomial roots.
pub fn feasible_intervals(conditions: &[Quadratic]) -> Vec<ValidityInterval> {
    let feasible = |p: f64| conditions.iter().all(|q| q.eval(p) >= 0.0);
    let mut cuts: Vec<f64> = conditions.iter().flat_map(Quadratic::roots).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut edges = vec![f64::NEG_INFINITY];
    edges.extend(&cuts);
    edges.push(f64::INFINITY);
    let probe = |lo: f64, hi: f64| match (lo.is_finite(), hi.is_finite()) {
        (true, true) => 0.5 * (lo + hi),
        (false, true) => hi - 1.0,
        (true, false) => lo + 1.0,
        (false, false) => 0.0,
    };
    let mut out: Vec<ValidityInterval> = Vec::new();
    for pair in edges.windows(2) {
        let (lo, hi) = (pair[0], pair[1]);
        if !feasible(probe(lo, hi)) {
            continue;
        }
        match out.last_mut() {
            Some(last) if last.p_hi == lo => last.p_hi = hi,
            _ => out.push(ValidityInterval { p_lo: lo, p_hi: hi }),
        }
    }
    // Isolated feasible points have zero length and are dropped.
    out
}

/// The range of `p` on which [`two_copy_decomposition`] is valid.
pub fn bisep_validity_interval() -> ValidityInterval {
    let v = feasible_intervals(&validity_conditions());
    assert_eq!(v.len(), 1, "validity set is a single interval");
    v[0]
}

/// `1 / (1 + 2^(N-1))`.
pub fn ppt_crit(n_qubits: usize) -> Result<f64> {
    if n_qubits < 2 {
        return Err(Error::TooFewQubits {
            got: n_qubits,
            min: 2,
        });
    }
    Ok(1.0 / (1.0 + (1u64 << (n_qubits - 1)) as f64))
}

/// `(1-p)/2^N - p/2`, the only eigenvalue of the partial transpose of
/// `rho_N(p)` that can be negative.
pub fn flagged_pt_eigenvalue(n_qubits: usize, p: f64) -> f64 {
    (1.0 - p) / (1u64 << n_qubits) as f64 - p / 2.0
}

fn check_cut(n_qubits: usize, cut: &Partition) -> Result<()> {
    if cut.n_parties() != n_qubits || cut.blocks().len() != 2 {
        return Err(Error::InvalidPartition(format!(
            "expected a bipartition of {n_qubits} parties, got {}",
            cut.label()
        )));
    }
    Ok(())
}

/// Ascending spectrum of the partial transpose of dense `rho_N(p)` across
/// `cut`, transposing the first block.
pub fn pt_spectrum_isotropic(n_qubits: usize, p: f64, cut: &Partition) -> Result<Vec<f64>> {
    check_cut(n_qubits, cut)?;
    let rho = xform_to_dense(&isotropic_ghz(n_qubits, p)?);
    Ok(partial_transpose(&rho, &cut.blocks()[0])?.eigenvalues())
}

pub fn pt_min_eig_isotropic(n_qubits: usize, p: f64, cut: &Partition) -> Result<f64> {
    Ok(pt_spectrum_isotropic(n_qubits, p, cut)?[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gme::k_copy_threshold;

    const EPS: f64 = 1e-12;

    #[test]
    fn gamma_base_entries() {
        let g = gamma_base();
        for i in 0..4 {
            assert!((g.matrix()[(i, i)].re - 0.25).abs() < EPS);
        }
        // |++>, |--> contribute 1/4 each to (0,3); |rl>, |lr> contribute -(-1)/4.
        assert!((g.matrix()[(0, 3)].re - 0.25).abs() < EPS);
        assert!(g.matrix()[(1, 2)].norm() < EPS);
        let pt = partial_transpose(&g, &[1]).unwrap();
        assert!(pt.min_eigenvalue() > -1e-12);
    }

    #[test]
    fn embedding_example() {
        let spec = EmbeddingSpec::new(1, 2, 21, 22).unwrap();
        assert_eq!(spec.cut().label(), "3|12");
        let e = embed_gamma(&spec);
        let m = e.matrix();
        let expected = [(0, 0), (0, 21), (21, 0), (21, 21), (1, 1), (20, 20)];
        for i in 0..DIM {
            for j in 0..DIM {
                let want = if expected.contains(&(i, j)) { 0.25 } else { 0.0 };
                assert!((m[(i, j)] - real(want)).norm() < EPS, "entry ({i},{j})");
            }
        }
    }

    #[test]
    fn rectangle_violations() {
        assert!(matches!(
            EmbeddingSpec::new(11, 12, 31, 31),
            Err(Error::RectangleViolation { .. })
        ));
        assert!(EmbeddingSpec::new(1, 2, 3, 4).is_err());
        assert!(EmbeddingSpec::new(0, 2, 21, 22).is_err());
        assert!(gamma_big_1_tabulated().is_err());
    }

    #[test]
    fn gamma1_correction_is_found() {
        let fixes = gamma1_corrections().unwrap();
        assert_eq!(fixes.len(), 1);
        assert_eq!(fixes[0].tabulated, [11, 12, 31, 31]);
        assert_eq!(fixes[0].corrected, [11, 12, 31, 32]);
        let g1 = gamma_big_1().unwrap();
        assert!((g1.trace() - 1.0).abs() < EPS);
        assert!(g1.matrix()[(0, 0)].norm() < EPS);
    }

    #[test]
    fn sigma_support() {
        let s = sigma_small();
        assert!((s.trace() - 1.0).abs() < EPS);
        assert!((sigma_big().trace() - 1.0).abs() < EPS);
        // First term: A2 = A3 and B2 = B3 on its support.
        let t = sigma_term(0);
        for i in 0..DIM {
            if t.matrix()[(i, i)].re > EPS {
                let (a2, b2, a3, b3) = ((i >> 3) & 1, (i >> 2) & 1, (i >> 1) & 1, i & 1);
                assert_eq!((a2, b2), (a3, b3));
            }
        }
    }

    #[test]
    fn diag_classes_partition_labels() {
        let mut all: Vec<usize> = DIAG_CLASSES.iter().flat_map(|c| c.iter().copied()).collect();
        all.sort_unstable();
        assert_eq!(all, (1..=64).collect::<Vec<_>>());
        assert_eq!(DIAG_CLASSES.map(<[usize]>::len), [4, 24, 12, 24]);
    }

    #[test]
    fn rho_diag_examples() {
        let d0 = rho_diag_closed_form(0.0);
        assert!((d0.matrix()[(0, 0)].re - 1.0 / 64.0).abs() < EPS);
        let d = rho_diag_closed_form(0.2);
        let want = (1.0 - 0.4 - 13.0 / 3.0 * 0.04) / (64.0 * 0.36);
        assert!((d.matrix()[(3, 3)].re - want).abs() < EPS);
        assert!((want - 0.018519).abs() < 1e-6);
        for p in [0.0, 0.1, 0.25] {
            assert!((rho_diag_closed_form(p).trace() - 1.0).abs() < EPS);
        }
        assert!(!rho_diag_closed_form(0.5).is_normalized());
    }

    #[test]
    fn decomposition_identity_and_validity() {
        for p in [0.0, 0.1, 0.2, 0.3] {
            let d = two_copy_decomposition(p).unwrap();
            assert!(d.residual_max() <= TAU_DECOMP, "p = {p}");
        }
        assert!(two_copy_decomposition(0.25).unwrap().valid());
        assert!(!two_copy_decomposition(0.35).unwrap().valid());
        let half = two_copy_decomposition(0.5).unwrap();
        assert!(half.residual_max() <= TAU_DECOMP);
        assert!(!half.valid());
    }

    #[test]
    fn components_are_ppt_across_their_cuts() {
        let d = two_copy_decomposition(0.2).unwrap();
        assert_eq!(d.components().len(), 40);
        for comp in d.components() {
            if let Some(min) = component_pt_min(comp).unwrap() {
                assert!(min >= -1e-10, "{:?}", comp.group);
            }
        }
    }

    #[test]
    fn validity_interval_endpoints() {
        let v = bisep_validity_interval();
        assert_eq!(v.p_lo, 0.0);
        let root = (-3.0 + 4.0 * 3f64.sqrt()) / 13.0;
        assert!((v.p_hi - root).abs() < EPS);
        let p2 = k_copy_threshold(3, 2).unwrap().p_threshold;
        assert!((v.p_hi - p2).abs() < EPS);
        assert!(DIAG_CLASS_POLYNOMIALS[1].eval(3.0 / 7.0).abs() < EPS);
    }

    #[test]
    fn quadratic_roots() {
        let mut r = Quadratic::new(-3.0, 6.0, 13.0).roots();
        r.sort_by(f64::total_cmp);
        assert!((r[1] - (-3.0 + 4.0 * 3f64.sqrt()) / 13.0).abs() < EPS);
        assert!(Quadratic::new(1.0, 0.0, 1.0).roots().is_empty());
        assert_eq!(Quadratic::new(2.0, -4.0, 0.0).roots(), vec![0.5]);
    }

    #[test]
    fn ppt_crit_values() {
        assert!((ppt_crit(3).unwrap() - 0.2).abs() < EPS);
        assert!((ppt_crit(2).unwrap() - 1.0 / 3.0).abs() < EPS);
        assert!((ppt_crit(4).unwrap() - 1.0 / 9.0).abs() < EPS);
        assert!(ppt_crit(1).is_err());
    }

    #[test]
    fn pt_min_examples() {
        let cut = Partition::bipartition(3, &[0]).unwrap();
        assert!(pt_min_eig_isotropic(3, 0.2, &cut).unwrap().abs() < 1e-10);
        for cut in Partition::all_bipartitions(3) {
            assert!(pt_min_eig_isotropic(3, 0.5, &cut).unwrap() < 0.0);
        }
        let cut = Partition::bipartition(4, &[0, 1]).unwrap();
        assert!(pt_min_eig_isotropic(4, 0.05, &cut).unwrap() >= -1e-10);
        let bad = Partition::new(3, vec![vec![0], vec![1], vec![2]]).unwrap();
        assert!(pt_min_eig_isotropic(3, 0.5, &bad).is_err());
    }
}
