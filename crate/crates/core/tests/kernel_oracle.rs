//! Krylov cosine and the Chebyshev-type recursion against the dense kernel
//! spectrum.

use cwave_core::fem::{build_kinetic_dae, make_disc_mesh};
use cwave_core::integrators::krylov_cos_apply;
use cwave_core::linalg::vector::norm2;
use cwave_core::oracle::{chebyshev_closed_form, chebyshev_recursion, dense_cos_ker, KernelSpectrum};
use cwave_core::{OperatorToolkit, SemiDiscreteDae, SparseMatrix};
use rand::rngs::SmallRng;
use rand::{Rng, SeedableRng};

fn spd(rng: &mut SmallRng, n: usize, shift: f64) -> SparseMatrix {
    let g: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (0..n).map(|k| g[k][i] * g[k][j]).sum::<f64>() / n as f64 + if i == j { shift } else { 0.0 })
                .collect()
        })
        .collect();
    SparseMatrix::from_dense(&rows).unwrap()
}

fn random_system(seed: u64) -> SemiDiscreteDae {
    let mut rng = SmallRng::seed_from_u64(seed);
    let n = rng.random_range(3..=12);
    let m = rng.random_range(0..n.min(5));
    let mass = spd(&mut rng, n, 0.5);
    let stiff = spd(&mut rng, n, 0.2);
    let mut t = Vec::new();
    for i in 0..m {
        t.push((i, i, 1.0));
        for j in m..n {
            if rng.random_bool(0.5) {
                t.push((i, j, rng.random_range(-1.0..1.0)));
            }
        }
    }
    let b = SparseMatrix::from_triplets(m, n, &t).unwrap();
    SemiDiscreteDae::builder(mass, stiff).homogeneous_constraint(b).build().unwrap()
}

#[test]
fn full_krylov_space_matches_dense_cosine() {
    for seed in 0..20 {
        let sys = random_system(seed);
        let tk = OperatorToolkit::new(&sys).unwrap();
        let spec = KernelSpectrum::new(&sys).unwrap();
        let z = spec.kernel_basis();
        let r = sys.n() - sys.m();
        for tau in [0.3, 1.0, 2.5] {
            let dense = spec.cos(tau);
            let mut rng = SmallRng::seed_from_u64(1000 + seed);
            let coeffs: Vec<f64> = (0..r).map(|_| rng.random_range(-1.0..1.0)).collect();
            let x0 = z.mul_vec(&coeffs);
            let kry = krylov_cos_apply(&tk, &x0, tau, r).unwrap();
            let expect = dense.mul_vec(&x0);
            let err = kry.iter().zip(&expect).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(err <= 1e-10 * norm2(&x0).max(1.0), "seed {seed}, tau {tau}: {err:e}");
        }
    }
}

#[test]
fn chebyshev_recursion_matches_closed_form() {
    for seed in 0..5 {
        let sys = random_system(100 + seed);
        let spec = KernelSpectrum::new(&sys).unwrap();
        let z = spec.kernel_basis();
        let tau = 0.4;
        let xs = chebyshev_recursion(&spec, tau, 8);
        for (k, xk) in xs.iter().enumerate() {
            let closed = chebyshev_closed_form(&spec, tau, k);
            let (a, b) = (xk.matmul(z), closed.matmul(z));
            assert!(a.max_abs_diff(&b) <= 1e-10, "k = {k}: {:e}", a.max_abs_diff(&b));
        }
        // the recursion itself, on kernel vectors, from plain cosines
        let c = |t: f64| spec.cos(t).matmul(z);
        assert!(xs[2].matmul(z).max_abs_diff(&z.combine(1.0, &c(2.0 * tau), 2.0)) <= 1e-10);
    }
}

#[test]
fn zero_step_gives_identity_on_kernel() {
    let sys = random_system(7);
    let spec = KernelSpectrum::new(&sys).unwrap();
    let z = spec.kernel_basis();
    let p = dense_cos_ker(&sys, 0.0).unwrap();
    assert!(p.matmul(z).max_abs_diff(z) < 1e-12);
}

#[test]
fn disc_benchmark_kernel_is_elliptic() {
    let sys = build_kinetic_dae(&make_disc_mesh(1).unwrap()).unwrap();
    let spec = KernelSpectrum::new(&sys).unwrap();
    assert_eq!(spec.eigenvalues().len(), 61);
    assert!(spec.eigenvalues().iter().all(|&l| l > 0.0));
}

#[test]
fn oracle_rejects_large_systems() {
    let n = 201;
    let sys = SemiDiscreteDae::builder(SparseMatrix::identity(n), SparseMatrix::identity(n)).build().unwrap();
    assert!(KernelSpectrum::new(&sys).is_err());
}
