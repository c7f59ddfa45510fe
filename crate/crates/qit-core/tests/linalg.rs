mod common;

use common::close;
use proptest::prelude::*;
use qit_core::linalg::{
    apply_matrix_function, c, diag, dominated, eig_hermitian, eigh, generalized_inverse, identity, ket,
    kron, max_abs, max_entangled_vector, orthogonal, partial_trace, partial_transpose, pinch, proj, psd_sqrt,
    real_matrix, schmidt_decompose, support_projector, tr, CMat, Sampler, CLUSTER_REL,
};
use qit_core::states::{choi_of_channel, Channel};
use qit_core::Error;

fn config() -> ProptestConfig {
    ProptestConfig { cases: 32, ..ProptestConfig::default() }
}

fn rtol(m: &CMat) -> f64 {
    1e-10 * max_abs(m).max(1.0)
}

/// Random Hermitian matrix with a prescribed number of distinct eigenvalues.
fn hermitian_with_levels(s: &mut Sampler, d: usize, levels: usize) -> CMat {
    let u = s.haar_unitary(d).unwrap();
    let vals: Vec<f64> = (0..d).map(|i| (i % levels) as f64 - 1.0).collect();
    &u * diag(&vals) * u.adjoint()
}

/// Real roots of `x³ + a x² + b x + c` with three real roots, by bisection
/// between the critical points.
fn cubic_roots(a: f64, b: f64, c0: f64) -> [f64; 3] {
    let f = |x: f64| ((x + a) * x + b) * x + c0;
    let disc = (a * a - 3.0 * b).max(0.0).sqrt();
    let (lo, hi) = ((-a - disc) / 3.0, (-a + disc) / 3.0);
    let root = |mut l: f64, mut r: f64| {
        for _ in 0..200 {
            let m = 0.5 * (l + r);
            if (f(l) <= 0.0) == (f(m) <= 0.0) {
                l = m;
            } else {
                r = m;
            }
        }
        0.5 * (l + r)
    };
    [root(lo - 10.0, lo), root(lo, hi), root(hi, hi + 10.0)]
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn identity_function_restricts_to_support(seed in 0u64..10_000, d in 2usize..6, rank in 1usize..6) {
        let m = Sampler::new(seed).density(d, rank.min(d)).unwrap();
        let f = apply_matrix_function(&m, |t| t).unwrap();
        prop_assert!(close(&f, &m, rtol(&m)));
    }

    #[test]
    fn unitary_covariance(seed in 0u64..10_000, d in 2usize..6) {
        let mut s = Sampler::new(seed);
        let m = s.full_density(d).unwrap();
        let u = s.haar_unitary(d).unwrap();
        let rotated = &u * &m * u.adjoint();
        for f in [|t: f64| t.ln(), |t: f64| t.powf(0.3), |t: f64| 1.0 / t] {
            let lhs = apply_matrix_function(&rotated, f).unwrap();
            let rhs = &u * apply_matrix_function(&m, f).unwrap() * u.adjoint();
            prop_assert!(close(&lhs, &rhs, 1e-8 * max_abs(&rhs).max(1.0)));
        }
    }

    #[test]
    fn polar_trick(seed in 0u64..10_000, r in 2usize..5, k in 2usize..5) {
        let mut s = Sampler::new(seed);
        let l = s.gaussian_matrix(r, k);
        let f = |t: f64| t.powf(0.7) + 0.5 * t;
        let lhs = &l * apply_matrix_function(&(l.adjoint() * &l), f).unwrap();
        let rhs = apply_matrix_function(&(&l * l.adjoint()), f).unwrap() * &l;
        prop_assert!(close(&lhs, &rhs, 1e-9 * max_abs(&lhs).max(1.0)));
    }

    #[test]
    fn pinching_identities(seed in 0u64..10_000, d in 2usize..6, levels in 1usize..4) {
        let mut s = Sampler::new(seed);
        let h = hermitian_with_levels(&mut s, d, levels);
        let m = s.gaussian_matrix(d, d);
        let m = &m + m.adjoint();
        let once = pinch(&h, &m, CLUSTER_REL).unwrap();
        let twice = pinch(&h, &once, CLUSTER_REL).unwrap();
        prop_assert!(close(&once, &twice, 1e-10));
        prop_assert!(((&once * &h).trace() - (&m * &h).trace()).norm() < 1e-10);
        prop_assert!(close(&pinch(&h, &h, CLUSTER_REL).unwrap(), &h, 1e-10));
        // pinching inequality P_H(M) ≥ M/k on psd M
        let rho = s.full_density(d).unwrap();
        let k = levels.min(d) as f64;
        let gap = pinch(&h, &rho, CLUSTER_REL).unwrap() - rho.unscale(k);
        prop_assert!(eigh(&gap).lambda_min() >= -1e-10);
    }

    #[test]
    fn operator_jensen_for_square_root(seed in 0u64..10_000, d in 2usize..6, levels in 2usize..4) {
        let mut s = Sampler::new(seed);
        let h = hermitian_with_levels(&mut s, d, levels);
        let m = s.full_density(d).unwrap();
        let lhs = psd_sqrt(&pinch(&h, &m, CLUSTER_REL).unwrap());
        let rhs = pinch(&h, &psd_sqrt(&m), CLUSTER_REL).unwrap();
        prop_assert!(eigh(&(lhs - rhs)).lambda_min() >= -1e-10);
    }

    #[test]
    fn eigensystems_reconstruct(seed in 0u64..10_000, d in 1usize..7) {
        let mut s = Sampler::new(seed);
        let g = s.gaussian_matrix(d, d);
        let h = &g + g.adjoint();
        let es = eig_hermitian(&h).unwrap();
        prop_assert!(es.values.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(close(&es.reconstruct(), &h, 1e-10 * max_abs(&h).max(1.0)));
        prop_assert!(close(&(es.vectors.adjoint() * &es.vectors), &identity(d), 1e-10));
    }

    #[test]
    fn generalized_inverse_and_supports(seed in 0u64..10_000, d in 2usize..6, rank in 1usize..6) {
        let mut s = Sampler::new(seed);
        let m = s.density(d, rank.min(d)).unwrap();
        let inv = generalized_inverse(&m).unwrap();
        prop_assert!(close(&(&m * &inv * &m), &m, 1e-9));
        let other = s.density(d, 1).unwrap();
        prop_assert!(dominated(&m, &(&m + &other)).unwrap());
        let p = support_projector(&m);
        prop_assert!(close(&(&p * &p), &p, 1e-10));
        prop_assert!((tr(&p) - rank.min(d) as f64).abs() < 1e-9);
    }

    #[test]
    fn partial_operations(seed in 0u64..10_000, da in 1usize..4, db in 1usize..4) {
        let mut s = Sampler::new(seed);
        let a = s.full_density(da).unwrap();
        let b = s.gaussian_matrix(db, db);
        let b = &b * b.adjoint();
        let ab = kron(&a, &b);
        prop_assert!(close(&partial_trace(&ab, &[da, db], &[0]).unwrap(), &a.scale(tr(&b)), 1e-10 * tr(&b).max(1.0)));
        let m = s.full_density(da * db).unwrap();
        prop_assert!((tr(&partial_trace(&m, &[da, db], &[1]).unwrap()) - 1.0).abs() < 1e-12);
        let pt = partial_transpose(&m, &[da, db], 1).unwrap();
        prop_assert!(close(&partial_transpose(&pt, &[da, db], 1).unwrap(), &m, 0.0));
    }

    #[test]
    fn schmidt_coefficients_are_reduced_eigenvalues(seed in 0u64..10_000, da in 1usize..4, db in 1usize..4) {
        let v = Sampler::new(seed).pure_vector(da * db).unwrap();
        let (coeffs, left, right) = schmidt_decompose(&v, (da, db)).unwrap();
        prop_assert!(coeffs.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!((coeffs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let k = coeffs.len();
        prop_assert!(close(&(left.adjoint() * &left), &identity(k), 1e-10));
        prop_assert!(close(&(right.adjoint() * &right), &identity(k), 1e-10));
        let mut red = eigh(&partial_trace(&proj(&v), &[da, db], &[0]).unwrap()).values;
        red.reverse();
        for (x, y) in coeffs.iter().zip(&red) {
            prop_assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn samples_are_valid(seed in 0u64..10_000) {
        let mut s = Sampler::new(seed);
        let u = s.haar_unitary(3).unwrap();
        prop_assert!(close(&(u.adjoint() * &u), &identity(3), 1e-12));
        let rho = s.density(4, 2).unwrap();
        prop_assert!((tr(&rho) - 1.0).abs() < 1e-12 && eigh(&rho).rank() == 2 && eigh(&rho).lambda_min() >= -1e-12);
        let ch = Channel::new(s.cptp_kraus(2, 3, 2).unwrap()).unwrap();
        let choi = choi_of_channel(&ch);
        // TP: tr_out γ = id_in
        let marg = partial_trace(&choi.matrix, &[2, 3], &[0]).unwrap();
        prop_assert!(close(&marg, &identity(2), 1e-10));
        let mut t = Sampler::new(seed);
        prop_assert_eq!(t.haar_unitary(3).unwrap(), u);
    }
}

#[test]
fn eigenvalue_examples() {
    assert_eq!(eig_hermitian(&identity(3)).unwrap().values, vec![1.0, 1.0, 1.0]);
    let x = real_matrix(&[&[0.0, 1.0], &[1.0, 0.0]]);
    let v = eig_hermitian(&x).unwrap().values;
    assert!((v[0] + 1.0).abs() < 1e-15 && (v[1] - 1.0).abs() < 1e-15);
    let rho = real_matrix(&[&[5.0, 5.0, 2.0], &[5.0, 5.0, 2.0], &[2.0, 2.0, 2.0]]).unscale(12.0);
    // characteristic polynomial x³ − e1 x² + e2 x − e3
    let e1 = tr(&rho);
    let e2 = 0.5 * (e1 * e1 - tr(&(&rho * &rho)));
    let e3 = rho.determinant().re;
    let roots = cubic_roots(-e1, e2, -e3);
    let got = eig_hermitian(&rho).unwrap().values;
    for (a, b) in got.iter().zip(roots) {
        assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    }
    let mut bad = identity(2);
    bad[(0, 1)] = c(1.0, 0.0);
    assert!(matches!(eig_hermitian(&bad), Err(Error::NonHermitian { .. })));
}

#[test]
fn matrix_function_examples() {
    let half = diag(&[0.5, 0.5]);
    assert!(close(&apply_matrix_function(&half, f64::log2).unwrap(), &diag(&[-1.0, -1.0]), 1e-15));
    let p = proj(&ket(3, 1));
    assert!(close(&apply_matrix_function(&p, f64::sqrt).unwrap(), &p, 1e-15));
    assert!(close(&apply_matrix_function(&diag(&[2.0, 0.0]), |t| 1.0 / t).unwrap(), &diag(&[0.5, 0.0]), 1e-15));
    assert!(close(&generalized_inverse(&diag(&[2.0, 0.0])).unwrap(), &diag(&[0.5, 0.0]), 1e-15));
    assert!(matches!(apply_matrix_function(&diag(&[1.0, -0.5]), f64::sqrt), Err(Error::NotPsd { .. })));
    assert!(orthogonal(&proj(&ket(2, 0)), &proj(&ket(2, 1))).unwrap());
}

#[test]
fn entangled_examples() {
    let psi = max_entangled_vector(2).unscale(2f64.sqrt());
    let rho = proj(&psi);
    assert!(close(&partial_trace(&rho, &[2, 2], &[0]).unwrap(), &diag(&[0.5, 0.5]), 1e-15));
    let pt = partial_transpose(&rho, &[2, 2], 1).unwrap();
    assert!((eigh(&pt).lambda_min() + 0.5).abs() < 1e-12);
    // normalized ψ against the unnormalized |φ⟩ = |01⟩ − |10⟩ gives −2/d
    let phi = kron_vec(&ket(2, 0), &ket(2, 1)) - kron_vec(&ket(2, 1), &ket(2, 0));
    let w = (phi.adjoint() * partial_transpose(&rho, &[2, 2], 1).unwrap() * &phi)[(0, 0)];
    assert!((w.re + 1.0).abs() < 1e-12);
    let (coeffs, _, _) = schmidt_decompose(&psi, (2, 2)).unwrap();
    assert!((coeffs[0] - 0.5).abs() < 1e-12 && (coeffs[1] - 0.5).abs() < 1e-12);
    let prod = kron_vec(&ket(2, 0), &ket(3, 2)).scale(2.0);
    let (coeffs, _, _) = schmidt_decompose(&prod, (2, 3)).unwrap();
    assert!((coeffs[0] - 4.0).abs() < 1e-12 && coeffs[1..].iter().all(|&x| x.abs() < 1e-12));
}

#[test]
fn pinching_examples() {
    let z = diag(&[1.0, -1.0]);
    let x = real_matrix(&[&[0.0, 1.0], &[1.0, 0.0]]);
    assert!(close(&pinch(&z, &z, CLUSTER_REL).unwrap(), &z, 0.0));
    assert!(close(&pinch(&z, &x, CLUSTER_REL).unwrap(), &CMat::zeros(2, 2), 0.0));
}

fn kron_vec(a: &qit_core::linalg::CVec, b: &qit_core::linalg::CVec) -> qit_core::linalg::CVec {
    qit_core::linalg::kron_vec(a, b)
}
