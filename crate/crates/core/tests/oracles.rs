//! Library results checked against independent, deliberately naive
//! reimplementations.

use approx::assert_abs_diff_eq;
use gme_core::boundent::{
    self, qutrit_ppt_state, triangle_state, witness_trace_triangle, witness_trace_wedge,
    witness_w3, witness_w3_mirrored,
};
use gme_core::gme::{gm_concurrence_xform, hadamard_map, hadamard_xform, k_copy_threshold};
use gme_core::linalg::{c, max_abs_diff, partial_transpose, real, ComplexMatrix, DensityMatrix, C64};
use gme_core::separability::{self, two_copy_target};
use gme_core::states::{isotropic_ghz, xform_to_dense, Partition, XFormState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn bits(i: usize, n: usize) -> Vec<usize> {
    (0..n).map(|q| (i >> (n - 1 - q)) & 1).collect()
}

fn from_bits(b: &[usize]) -> usize {
    b.iter().fold(0, |acc, &x| 2 * acc + x)
}

/// Partial transpose on qubits by swapping row/column bits one entry at a time.
fn naive_pt(m: &ComplexMatrix, n: usize, qubits: &[usize]) -> ComplexMatrix {
    let d = 1 << n;
    let mut out = ComplexMatrix::zeros(d, d);
    for r in 0..d {
        for col in 0..d {
            let (mut rb, mut cb) = (bits(r, n), bits(col, n));
            for &q in qubits {
                std::mem::swap(&mut rb[q], &mut cb[q]);
            }
            out[(from_bits(&rb), from_bits(&cb))] = m[(r, col)];
        }
    }
    out
}

fn random_xform(rng: &mut ChaCha8Rng, n: usize) -> XFormState {
    let blocks = 1 << (n - 1);
    let a: Vec<f64> = (0..blocks).map(|_| rng.gen_range(0.01..1.0)).collect();
    let b: Vec<f64> = (0..blocks).map(|_| rng.gen_range(0.01..1.0)).collect();
    let z: Vec<C64> = a
        .iter()
        .zip(&b)
        .map(|(x, y)| {
            let r = (x * y).sqrt() * rng.gen_range(0.0..1.0);
            let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            c(r * phi.cos(), r * phi.sin())
        })
        .collect();
    let t: f64 = a.iter().chain(&b).sum();
    XFormState::new(
        n,
        a.iter().map(|v| v / t).collect(),
        b.iter().map(|v| v / t).collect(),
        z.iter().map(|v| v / t).collect(),
    )
    .unwrap()
}

#[test]
fn partial_transpose_matches_bit_swapping() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for n in 2..=4 {
        let x = random_xform(&mut rng, n);
        let rho = xform_to_dense(&x);
        for cut in Partition::all_bipartitions(n) {
            let lib = partial_transpose(&rho, &cut.blocks()[0]).unwrap();
            let naive = naive_pt(rho.matrix(), n, &cut.blocks()[0]);
            assert!(max_abs_diff(lib.matrix(), &naive) < 1e-15);
        }
    }
}

/// Direct formula: 2 max(0, max_i |z_i| - sum_{j != i} sqrt(a_j b_j)) read
/// off the dense matrix.
fn naive_concurrence(rho: &ComplexMatrix, n: usize) -> f64 {
    let d = 1 << n;
    let mut best: f64 = 0.0;
    for i in 0..d / 2 {
        let zi = rho[(i, d - 1 - i)].norm();
        let rest: f64 = (0..d / 2)
            .filter(|&j| j != i)
            .map(|j| (rho[(j, j)].re * rho[(d - 1 - j, d - 1 - j)].re).sqrt())
            .sum();
        best = best.max(zi - rest);
    }
    2.0 * best
}

#[test]
fn concurrence_matches_dense_reading() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let n = rng.gen_range(2..=5);
        let x = random_xform(&mut rng, n);
        let dense = xform_to_dense(&x);
        assert_abs_diff_eq!(
            gm_concurrence_xform(&x),
            naive_concurrence(dense.matrix(), n),
            epsilon = 1e-14
        );
    }
}

#[test]
fn hadamard_xform_matches_dense_map() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for n in 2..=4 {
        let (x, y) = (random_xform(&mut rng, n), random_xform(&mut rng, n));
        let dense = hadamard_map(&xform_to_dense(&x), &xform_to_dense(&y)).unwrap();
        let compact = xform_to_dense(&hadamard_xform(&x, &y).unwrap());
        assert!(max_abs_diff(dense.matrix(), compact.matrix()) < 1e-15);
    }
}

#[test]
fn two_copy_target_matches_index_formula() {
    let p = 0.17;
    let rho = xform_to_dense(&isotropic_ghz(3, p).unwrap());
    let target = two_copy_target(p).unwrap();
    for r in 0..64 {
        for col in 0..64 {
            // Bits a1 b1 a2 b2 a3 b3: copy one holds the a's, copy two the b's.
            let (rb, cb) = (bits(r, 6), bits(col, 6));
            let ra = from_bits(&[rb[0], rb[2], rb[4]]);
            let rbb = from_bits(&[rb[1], rb[3], rb[5]]);
            let ca = from_bits(&[cb[0], cb[2], cb[4]]);
            let cbb = from_bits(&[cb[1], cb[3], cb[5]]);
            let want = rho.matrix()[(ra, ca)] * rho.matrix()[(rbb, cbb)];
            assert!((target.matrix()[(r, col)] - want).norm() < 1e-16);
        }
    }
}

#[test]
fn ppt_family_against_entry_formula() {
    for p in [0.05, 0.7, 3.0] {
        let s = qutrit_ppt_state(p).unwrap();
        let norm = 3.0 * (1.0 + p + 1.0 / p);
        for a in 0..3 {
            for b in 0..3 {
                for a2 in 0..3 {
                    for b2 in 0..3 {
                        let mut want = 0.0;
                        if a == b && a2 == b2 {
                            want += 1.0;
                        }
                        if (a, b) == (a2, b2) {
                            if (b + 3 - a) % 3 == 1 {
                                want += p;
                            } else if (b + 3 - a) % 3 == 2 {
                                want += 1.0 / p;
                            }
                        }
                        let got = s.state.matrix()[(3 * a + b, 3 * a2 + b2)];
                        assert!((got - real(want / norm)).norm() < 1e-15);
                    }
                }
            }
        }
    }
}

/// Triangle projection built entry by entry from the three pair matrices.
fn naive_triangle_projection(x: f64, y: f64, z: f64) -> DensityMatrix {
    let (rx, ry, rz) = (
        qutrit_ppt_state(x).unwrap().state,
        qutrit_ppt_state(y).unwrap().state,
        qutrit_ppt_state(z).unwrap().state,
    );
    let m = ComplexMatrix::from_fn(27, 27, |r, col| {
        let (i, j, k) = (r / 9, (r / 3) % 3, r % 3);
        let (i2, j2, k2) = (col / 9, (col / 3) % 3, col % 3);
        rx.matrix()[(3 * j + k, 3 * j2 + k2)]
            * ry.matrix()[(3 * i + k, 3 * i2 + k2)]
            * rz.matrix()[(3 * i + j, 3 * i2 + j2)]
    });
    DensityMatrix::operator(m, vec![3, 3, 3]).unwrap()
}

#[test]
fn triangle_projection_matches_entry_formula() {
    let (x, y, z) = (0.8, 1.7, 0.45);
    let lib = boundent::project_triangle_to_d(&triangle_state(x, y, z).unwrap()).unwrap();
    let naive = naive_triangle_projection(x, y, z);
    assert!(max_abs_diff(lib.unnormalized.matrix(), naive.matrix()) < 1e-16);
    let w = witness_w3_mirrored().expectation(&naive).unwrap();
    assert_abs_diff_eq!(w, witness_trace_triangle(x, y, z).unwrap(), epsilon = 1e-14);
}

#[test]
fn wedge_trace_matches_entry_formula() {
    let (x, y) = (0.6, 2.2);
    let (rx, ry) = (
        qutrit_ppt_state(x).unwrap().state,
        qutrit_ppt_state(y).unwrap().state,
    );
    let m = ComplexMatrix::from_fn(27, 27, |r, col| {
        let (i, j, k) = (r / 9, (r / 3) % 3, r % 3);
        let (i2, j2, k2) = (col / 9, (col / 3) % 3, col % 3);
        rx.matrix()[(3 * j + k, 3 * j2 + k2)] * ry.matrix()[(3 * i + k, 3 * i2 + k2)]
    });
    let d = DensityMatrix::operator(m, vec![3, 3, 3]).unwrap();
    let w = witness_w3().expectation(&d).unwrap();
    assert_abs_diff_eq!(w, witness_trace_wedge(x, y).unwrap(), epsilon = 1e-14);
}

fn random_ket(rng: &mut ChaCha8Rng, d: usize) -> Vec<C64> {
    let v: Vec<C64> = (0..d)
        .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / norm).collect()
}

/// `|a>_k (x) |bc>_rest` reordered so party `k` sits at its position.
fn product_across_cut(rng: &mut ChaCha8Rng, party: usize) -> Vec<C64> {
    let a = random_ket(rng, 3);
    let bc = random_ket(rng, 9);
    let mut psi = vec![C64::default(); 27];
    for (ia, va) in a.iter().enumerate() {
        for (ibc, vbc) in bc.iter().enumerate() {
            let (u, v) = (ibc / 3, ibc % 3);
            let idx = match party {
                0 => [ia, u, v],
                1 => [u, ia, v],
                _ => [u, v, ia],
            };
            psi[9 * idx[0] + 3 * idx[1] + idx[2]] = va * vbc;
        }
    }
    psi
}

#[test]
fn witness_is_nonnegative_on_random_cut_products() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for w in [witness_w3(), witness_w3_mirrored()] {
        for party in 0..3 {
            for _ in 0..100 {
                let psi = product_across_cut(&mut rng, party);
                let rho = DensityMatrix::pure(&psi, vec![3, 3, 3]).unwrap();
                assert!(w.expectation(&rho).unwrap() >= -1e-12);
            }
        }
    }
}

#[test]
fn every_bipartition_gives_same_ppt_sign() {
    for n in 2..=5 {
        let crit = separability::ppt_crit(n).unwrap();
        for p in [crit - 0.05, crit + 0.05, 0.9] {
            let signs: Vec<bool> = Partition::all_bipartitions(n)
                .iter()
                .map(|cut| separability::pt_min_eig_isotropic(n, p, cut).unwrap() < -1e-12)
                .collect();
            assert!(signs.iter().all(|&s| s == (p > crit)), "N = {n}, p = {p}");
        }
    }
}

#[test]
fn validity_endpoint_equals_two_copy_threshold() {
    let v = separability::bisep_validity_interval();
    let p2 = k_copy_threshold(3, 2).unwrap().p_threshold;
    assert_abs_diff_eq!(v.p_hi, p2, epsilon = 1e-12);
}
