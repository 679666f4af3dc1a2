//! GM concurrence of X-form states, the Hadamard-product map, and the
//! single-copy, k-copy and partition-separability thresholds for isotropic
//! GHZ states.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, DensityMatrix, C64, TAU_TRACE};
use crate::separability::ppt_crit;
use crate::states::{check_isotropic, isotropic_ghz, XFormState};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdKind {
    SingleCopy,
    KCopy,
    PartitionSeparability,
}

impl ThresholdKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ThresholdKind::SingleCopy => "single_copy",
            ThresholdKind::KCopy => "k_copy",
            ThresholdKind::PartitionSeparability => "partition_separability",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThresholdReport {
    pub n_qubits: usize,
    /// Copy count; `None` for the partition-separability value (`k -> inf`).
    pub k: Option<usize>,
    pub p_threshold: f64,
    pub kind: ThresholdKind,
}

/// Per-index terms `|z_i| - sum_{j != i} sqrt(a_j b_j)` of the GM concurrence.
pub fn concurrence_terms(x: &XFormState) -> Vec<f64> {
    let roots: Vec<f64> = x
        .a()
        .iter()
        .zip(x.b())
        .map(|(a, b)| (a * b).max(0.0).sqrt())
        .collect();
    let total: f64 = roots.iter().sum();
    x.z()
        .iter()
        .zip(&roots)
        .map(|(z, r)| z.norm() - (total - r))
        .collect()
}

/// `2 max{0, max_i(|z_i| - sum_{j != i} sqrt(a_j b_j))}`.
///
/// Positive values certify GME; zero is inconclusive.
pub fn gm_concurrence_xform(x: &XFormState) -> f64 {
    let best = concurrence_terms(x)
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max);
    2.0 * best.max(0.0)
}

/// Closed form `max{0, |p| - (1 - p)(1 - 2^(1-N))}` for isotropic GHZ states.
pub fn gm_concurrence_isotropic(n_qubits: usize, p: f64) -> Result<f64> {
    check_isotropic(n_qubits, p)?;
    let tail = 1.0 - 2f64.powi(1 - n_qubits as i32);
    Ok((p.abs() - (1.0 - p) * tail).max(0.0))
}

fn half_dim(n_qubits: usize) -> Result<f64> {
    if n_qubits < 2 {
        return Err(Error::TooFewQubits {
            got: n_qubits,
            min: 2,
        });
    }
    Ok((1u64 << (n_qubits - 1)) as f64)
}

/// `(2^(N-1) - 1) / (2^N - 1)`.
pub fn single_copy_threshold(n_qubits: usize) -> Result<ThresholdReport> {
    let h = half_dim(n_qubits)?;
    Ok(ThresholdReport {
        n_qubits,
        k: Some(1),
        p_threshold: (h - 1.0) / (2.0 * h - 1.0),
        kind: ThresholdKind::SingleCopy,
    })
}

/// `r / (2^(N-1) + r)` with `r = (2^(N-1) - 1)^(1/k)`.
pub fn k_copy_threshold(n_qubits: usize, k: usize) -> Result<ThresholdReport> {
    let h = half_dim(n_qubits)?;
    if k == 0 {
        return Err(Error::ZeroCopies);
    }
    let r = if k == 1 {
        h - 1.0
    } else {
        (h - 1.0).powf(1.0 / k as f64)
    };
    Ok(ThresholdReport {
        n_qubits,
        k: Some(k),
        p_threshold: r / (h + r),
        kind: ThresholdKind::KCopy,
    })
}

/// `1 / (1 + 2^(N-1))`, the limit of the k-copy thresholds.
pub fn partition_threshold(n_qubits: usize) -> Result<ThresholdReport> {
    Ok(ThresholdReport {
        n_qubits,
        k: None,
        p_threshold: ppt_crit(n_qubits)?,
        kind: ThresholdKind::PartitionSeparability,
    })
}

/// `rho o sigma / Tr(rho o sigma)`.
pub fn hadamard_map(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<DensityMatrix> {
    if rho.dims() != sigma.dims() {
        return Err(Error::ShapeMismatch {
            left: (rho.dim(), rho.dim()),
            right: (sigma.dim(), sigma.dim()),
        });
    }
    let product = linalg::hadamard(rho.matrix(), sigma.matrix())?;
    let trace = product.trace().re;
    if trace <= TAU_TRACE {
        return Err(Error::ZeroTrace { trace });
    }
    let out = DensityMatrix::operator(product.unscale(trace), rho.dims().to_vec())?;
    if rho.is_positive() && sigma.is_positive() {
        // Schur product theorem.
        out.into_state()
    } else {
        out.normalize()
    }
}

/// Componentwise product of two X-form states on the same number of qubits,
/// renormalized. Equals `hadamard_map` on the dense matrices.
pub fn hadamard_xform(x: &XFormState, y: &XFormState) -> Result<XFormState> {
    if x.n_qubits() != y.n_qubits() {
        return Err(Error::ShapeMismatch {
            left: (x.blocks(), x.blocks()),
            right: (y.blocks(), y.blocks()),
        });
    }
    let a: Vec<f64> = x.a().iter().zip(y.a()).map(|(p, q)| p * q).collect();
    let b: Vec<f64> = x.b().iter().zip(y.b()).map(|(p, q)| p * q).collect();
    let z: Vec<C64> = x.z().iter().zip(y.z()).map(|(p, q)| p * q).collect();
    renormalized(x.n_qubits(), a, b, z)
}

fn renormalized(n_qubits: usize, a: Vec<f64>, b: Vec<f64>, z: Vec<C64>) -> Result<XFormState> {
    let trace: f64 = a.iter().chain(&b).sum();
    if trace <= 0.0 || !trace.is_finite() {
        return Err(Error::ZeroTrace { trace });
    }
    Ok(XFormState::from_parts_unchecked(
        n_qubits,
        a.into_iter().map(|v| v / trace).collect(),
        b.into_iter().map(|v| v / trace).collect(),
        z.into_iter().map(|v| v / trace).collect(),
    ))
}

/// `k` copies folded together by `k - 1` Hadamard-product maps: componentwise
/// `k`-th powers of `(a, b, z)`, renormalized.
pub fn iterated_hadamard(x: &XFormState, k: usize) -> Result<XFormState> {
    if k == 0 {
        return Err(Error::ZeroCopies);
    }
    if k == 1 {
        return Ok(x.clone());
    }
    let kk = k as i32;
    renormalized(
        x.n_qubits(),
        x.a().iter().map(|v| v.powi(kk)).collect(),
        x.b().iter().map(|v| v.powi(kk)).collect(),
        x.z().iter().map(|v| v.powi(kk)).collect(),
    )
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ActivationReport {
    pub n_qubits: usize,
    pub p: f64,
    pub k_max: usize,
    /// Smallest `k <= k_max` with `p > p_GME^(k)(N)`: an upper bound on the
    /// number of copies needed.
    pub copies: Option<usize>,
    /// `p <= p_crit(N)`: separable across a fixed partition, so no number of
    /// copies activates GME.
    pub partition_separable: bool,
}

/// Classifies `rho_N(p)` by the copy count at which the Hadamard-map
/// criterion first certifies GME. Comparisons are strict and carry no
/// tolerance band.
pub fn activation_classification(n_qubits: usize, p: f64, k_max: usize) -> Result<ActivationReport> {
    check_isotropic(n_qubits, p)?;
    if k_max == 0 {
        return Err(Error::ZeroCopies);
    }
    let partition_separable = p <= ppt_crit(n_qubits)?;
    let mut copies = None;
    if !partition_separable {
        for k in 1..=k_max {
            if p > k_copy_threshold(n_qubits, k)?.p_threshold {
                copies = Some(k);
                break;
            }
        }
    }
    Ok(ActivationReport {
        n_qubits,
        p,
        k_max,
        copies,
        partition_separable,
    })
}

/// GM concurrence of `k` Hadamard-folded copies of `rho_N(p)`.
pub fn k_copy_concurrence(n_qubits: usize, p: f64, k: usize) -> Result<f64> {
    Ok(gm_concurrence_xform(&iterated_hadamard(
        &isotropic_ghz(n_qubits, p)?,
        k,
    )?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::real;
    use crate::states::xform_to_dense;

    #[test]
    fn concurrence_examples() {
        assert!((gm_concurrence_xform(&isotropic_ghz(3, 1.0).unwrap()) - 1.0).abs() < 1e-15);
        assert_eq!(gm_concurrence_xform(&isotropic_ghz(3, 0.0).unwrap()), 0.0);
        assert!((gm_concurrence_xform(&isotropic_ghz(3, 0.6).unwrap()) - 0.3).abs() < 1e-12);
    }

    #[test]
    fn closed_form_examples() {
        assert!(gm_concurrence_isotropic(3, 3.0 / 7.0).unwrap().abs() < 1e-15);
        assert_eq!(gm_concurrence_isotropic(3, 1.0).unwrap(), 1.0);
        assert!((gm_concurrence_isotropic(4, 0.5).unwrap() - 0.0625).abs() < 1e-15);
        assert!(gm_concurrence_isotropic(3, 2.0).is_err());
    }

    #[test]
    fn threshold_examples() {
        assert!((single_copy_threshold(3).unwrap().p_threshold - 3.0 / 7.0).abs() < 1e-15);
        assert!((single_copy_threshold(2).unwrap().p_threshold - 1.0 / 3.0).abs() < 1e-15);
        let s3 = 3f64.sqrt();
        assert!((k_copy_threshold(3, 2).unwrap().p_threshold - s3 / (4.0 + s3)).abs() < 1e-15);
        let s7 = 7f64.sqrt();
        assert!((k_copy_threshold(4, 2).unwrap().p_threshold - s7 / (8.0 + s7)).abs() < 1e-15);
        assert!(k_copy_threshold(3, 0).is_err());
        assert!(single_copy_threshold(1).is_err());
    }

    #[test]
    fn k_equal_one_reproduces_single_copy_exactly() {
        for n in 2..=20 {
            assert_eq!(
                k_copy_threshold(n, 1).unwrap().p_threshold,
                single_copy_threshold(n).unwrap().p_threshold
            );
        }
    }

    #[test]
    fn single_copy_threshold_rises_to_one_half() {
        let values: Vec<f64> = (2..=20)
            .map(|n| single_copy_threshold(n).unwrap().p_threshold)
            .collect();
        assert!(values.windows(2).all(|w| w[1] > w[0]));
        assert!((values.last().unwrap() - 0.5).abs() < 1e-3);
        assert!(values.iter().all(|&v| v < 0.5));
    }

    #[test]
    fn hadamard_map_examples() {
        let mm = DensityMatrix::maximally_mixed(vec![2, 2]).unwrap();
        let out = hadamard_map(&mm, &mm).unwrap();
        assert!(linalg::max_abs_diff(out.matrix(), mm.matrix()) < 1e-15);

        let d1 = DensityMatrix::from_diagonal(&[0.1, 0.2, 0.3, 0.4], vec![2, 2]).unwrap();
        let d2 = DensityMatrix::from_diagonal(&[0.4, 0.3, 0.2, 0.1], vec![2, 2]).unwrap();
        let out = hadamard_map(&d1, &d2).unwrap();
        let norm = 0.04 + 0.06 + 0.06 + 0.04;
        for (i, v) in [0.04, 0.06, 0.06, 0.04].iter().enumerate() {
            assert!((out.matrix()[(i, i)].re - v / norm).abs() < 1e-15);
        }

        let rho = xform_to_dense(&isotropic_ghz(3, 0.4).unwrap());
        let sq = hadamard_map(&rho, &rho).unwrap();
        let x = crate::states::xform_from_dense(&sq).unwrap();
        let tr: f64 = (0..8).map(|i| rho.matrix()[(i, i)].re.powi(2)).sum();
        assert!((x.z()[0].re - 0.04 / tr).abs() < 1e-14);
    }

    #[test]
    fn hadamard_map_zero_trace() {
        let a = DensityMatrix::from_diagonal(&[1.0, 0.0], vec![2]).unwrap();
        let b = DensityMatrix::from_diagonal(&[0.0, 1.0], vec![2]).unwrap();
        assert!(matches!(hadamard_map(&a, &b), Err(Error::ZeroTrace { .. })));
    }

    #[test]
    fn iterated_hadamard_identity_and_errors() {
        let x = isotropic_ghz(3, 0.37).unwrap();
        assert_eq!(iterated_hadamard(&x, 1).unwrap(), x);
        assert!(matches!(iterated_hadamard(&x, 0), Err(Error::ZeroCopies)));
        let zero = XFormState::from_parts_unchecked(
            2,
            vec![0.0, 0.0],
            vec![0.0, 0.0],
            vec![real(0.0), real(0.0)],
        );
        assert!(matches!(iterated_hadamard(&zero, 2), Err(Error::ZeroTrace { .. })));
    }

    #[test]
    fn pure_ghz_is_a_fixed_point() {
        let x = isotropic_ghz(4, 1.0).unwrap();
        for k in 1..=6 {
            let y = iterated_hadamard(&x, k).unwrap();
            assert!((gm_concurrence_xform(&y) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn three_copy_threshold_scan() {
        let t = k_copy_threshold(3, 3).unwrap().p_threshold;
        assert!((t - 0.2650).abs() < 1e-4);
        assert!(k_copy_concurrence(3, t + 1e-6, 3).unwrap() > 0.0);
        assert_eq!(k_copy_concurrence(3, t - 1e-6, 3).unwrap(), 0.0);
    }

    #[test]
    fn activation_examples() {
        assert_eq!(activation_classification(3, 0.45, 5).unwrap().copies, Some(1));
        assert_eq!(activation_classification(3, 0.35, 5).unwrap().copies, Some(2));
        let sep = activation_classification(3, 0.15, 100).unwrap();
        assert!(sep.partition_separable);
        assert_eq!(sep.copies, None);
        let far = activation_classification(3, 0.2001, 3).unwrap();
        assert!(!far.partition_separable);
        assert_eq!(far.copies, None);
    }

    #[test]
    fn partition_threshold_report() {
        let r = partition_threshold(3).unwrap();
        assert_eq!(r.k, None);
        assert_eq!(r.kind, ThresholdKind::PartitionSeparability);
        assert!((r.p_threshold - 0.2).abs() < 1e-15);
    }
}
