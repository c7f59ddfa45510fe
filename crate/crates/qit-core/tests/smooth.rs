mod common;

use common::{cut, mixed_tripartite, random_bp};
use proptest::prelude::*;
use qit_core::divergences::{divergence, max_divergence, Family};
use qit_core::entropies::{max_entropy, min_entropy, renyi_entropy, Bipartite};
use qit_core::linalg::{diag, eigh, identity, kron, proj, tr, CMat, Sampler};
use qit_core::smooth::{
    aep_rates, chain_rule_g, classical_smooth_max_entropy, classical_smooth_min_entropy, g, iid_bipartite,
    iid_smooth_bracket, iid_surprisal_cut, smooth_max_divergence, smooth_max_entropy, smooth_min_entropy,
    smoothing_operator, AepOptions, GForm, SmoothingParameter,
};
use qit_core::states::{cq_state, purification_vector, Channel};
use qit_core::{Base, Error};

fn hmin(bp: &Bipartite, eps: f64) -> f64 {
    smooth_min_entropy(bp, eps, Base::Two).unwrap().value
}

fn hmax(bp: &Bipartite, eps: f64) -> f64 {
    smooth_max_entropy(bp, eps, Base::Two).unwrap().value
}

fn config() -> ProptestConfig {
    ProptestConfig { cases: 8, ..ProptestConfig::default() }
}

/// `ρ̃ ≤ M` up to `tol`.
fn below(rho: &CMat, m: &CMat, tol: f64) -> bool {
    eigh(&(m - rho)).lambda_min() >= -tol
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn ball_monotonicity(seed in 0u64..10_000) {
        let bp = random_bp(&mut Sampler::new(seed), 2, 2, 2);
        let mut last_min = f64::NEG_INFINITY;
        let mut last_max = f64::INFINITY;
        for &eps in &[0.0, 0.05, 0.1, 0.2] {
            let a = hmin(&bp, eps);
            let b = hmax(&bp, eps);
            prop_assert!(a >= last_min - 1e-7 && b <= last_max + 1e-7, "eps {eps}: {a} {b}");
            last_min = a;
            last_max = b;
        }
    }

    #[test]
    fn witnesses_lie_in_the_ball(seed in 0u64..10_000, eps in 0.02f64..0.3) {
        let bp = random_bp(&mut Sampler::new(seed), 2, 2, 3);
        let res = smooth_min_entropy(&bp, eps, Base::Two).unwrap();
        prop_assert!(res.witness.distance <= eps + 1e-6);
        prop_assert!(tr(&res.witness.state) <= 1.0 + 1e-8);
        let direct = min_entropy(&Bipartite::new(res.witness.state.clone(), 2, 2).unwrap(), Base::Two).unwrap();
        prop_assert!(direct.value >= res.value - 1e-6, "{} < {}", direct.value, res.value);
        let mx = smooth_max_entropy(&bp, eps, Base::Two).unwrap();
        prop_assert!(mx.witness.distance <= eps + 1e-6);
    }

    #[test]
    fn smooth_duality_with_enlarged_purification(seed in 0u64..10_000) {
        let mut s = Sampler::new(seed);
        let bp = random_bp(&mut s, 2, 2, 4);
        let (psi, r) = purification_vector(&bp.rho).unwrap();
        // Spread the purifying system over a larger space with a random isometry.
        let v = s.haar_isometry(r, r + 1).unwrap();
        let psi2 = kron(&identity(4), &v) * &psi;
        let abc = proj(&psi2);
        let ac = qit_core::linalg::partial_trace(&abc, &[2, 2, r + 1], &[0, 2]).unwrap();
        let ac = Bipartite::new(ac, 2, r + 1).unwrap();
        let res = hmax(&bp, 0.1) + hmin(&ac, 0.1);
        prop_assert!(res.abs() <= 1e-6, "residual {res}");
    }

    #[test]
    fn isometry_invariance(seed in 0u64..10_000) {
        let mut s = Sampler::new(seed);
        let bp = random_bp(&mut s, 2, 2, 2);
        let u = s.haar_isometry(2, 3).unwrap();
        let w = s.haar_isometry(2, 3).unwrap();
        let k = kron(&u, &w);
        let big = Bipartite::new(&k * &bp.rho * k.adjoint(), 3, 3).unwrap();
        let a = hmin(&bp, 0.1);
        let b = hmin(&big, 0.1);
        prop_assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        let c = hmax(&bp, 0.1);
        let d = hmax(&big, 0.1);
        prop_assert!((c - d).abs() < 1e-6, "{c} vs {d}");
    }

    #[test]
    fn data_processing(seed in 0u64..10_000) {
        let mut s = Sampler::new(seed);
        let bp = random_bp(&mut s, 2, 2, 3);
        let ch = Channel::random(&mut s, 2, 2, 2).unwrap();
        let out = Bipartite::new(ch.apply_on(&bp.rho, &[2, 2], 1).unwrap(), 2, 2).unwrap();
        let u = s.haar_unitary(2).unwrap();
        let k = kron(&u, &identity(2));
        let mix = bp.rho.scale(0.5) + (&k * &bp.rho * k.adjoint()).scale(0.5);
        let unital = Bipartite::new(mix, 2, 2).unwrap();
        for eps in [0.05, 0.15] {
            prop_assert!(hmin(&out, eps) >= hmin(&bp, eps) - 1e-6);
            prop_assert!(hmax(&out, eps) >= hmax(&bp, eps) - 1e-6);
            prop_assert!(hmin(&unital, eps) >= hmin(&bp, eps) - 1e-6);
            prop_assert!(hmax(&unital, eps) >= hmax(&bp, eps) - 1e-6);
        }
    }

    #[test]
    fn function_of_a_register_is_easier_to_guess(seed in 0u64..10_000) {
        let mut s = Sampler::new(seed);
        let w = s.simplex(3);
        let cond: Vec<CMat> = (0..3).map(|_| s.full_density(2).unwrap()).collect();
        let xb = cq_state(&w, &cond).unwrap();
        let x = cut(&xb, &["X"], &["E"]);
        // Z = f(X) merges the last two values.
        let zc = vec![cond[0].clone(), (cond[1].scale(w[1]) + cond[2].scale(w[2])).unscale(w[1] + w[2])];
        let zb = cq_state(&[w[0], w[1] + w[2]], &zc).unwrap();
        let z = cut(&zb, &["X"], &["E"]);
        for eps in [0.05, 0.15] {
            prop_assert!(hmin(&z, eps) <= hmin(&x, eps) + 1e-6);
            prop_assert!(hmax(&z, eps) <= hmax(&x, eps) + 1e-6);
        }
    }

    #[test]
    fn min_below_max_up_to_the_angle_term(seed in 0u64..10_000, eps in 0.02f64..0.3) {
        let bp = random_bp(&mut Sampler::new(seed), 2, 2, 3);
        let phi = eps.asin();
        let bridge = -2.0 * (2.0 * phi).cos().log2();
        prop_assert!(hmin(&bp, eps) <= hmax(&bp, eps) + bridge + 1e-6);
    }

    #[test]
    fn classical_forms_match_the_programs(seed in 0u64..10_000, eps in 0.02f64..0.4) {
        let p = Sampler::new(seed).simplex(3);
        let bp = Bipartite::new(diag(&p), 3, 1).unwrap();
        let a = classical_smooth_min_entropy(&p, eps, Base::Two).unwrap();
        prop_assert!((a - hmin(&bp, eps)).abs() < 1e-6);
        let b = classical_smooth_max_entropy(&p, eps, Base::Two).unwrap();
        prop_assert!((b - hmax(&bp, eps)).abs() < 1e-6);
    }

    #[test]
    fn lemma_g_postconditions(seed in 0u64..10_000) {
        let mut s = Sampler::new(seed);
        let rho = s.full_density(2).unwrap();
        let sigma = s.full_density(2).unwrap();
        let lambda = max_divergence(&rho, &sigma, Base::Two).unwrap() - 0.5;
        let lg = smoothing_operator(&rho, &sigma, lambda, Base::Two).unwrap();
        prop_assert!(below(&lg.witness.state, &sigma.scale(2f64.powf(lambda)), 1e-10));
        prop_assert!(lg.witness.distance <= lg.distance_bound + 1e-9);
        prop_assert!(lg.trace_sigma_plus > 0.0);
    }

    #[test]
    fn smooth_divergence_bounds(seed in 0u64..10_000) {
        let mut s = Sampler::new(seed);
        let rho = s.full_density(2).unwrap();
        let sigma = s.full_density(2).unwrap();
        for eps in [0.05, 0.2] {
            let sd = smooth_max_divergence(&rho, &sigma, eps, Base::Two).unwrap();
            prop_assert!(sd.witness.distance <= eps + 1e-6);
            let lg = sd.lemma_g.as_ref().unwrap();
            prop_assert!(lg.witness.distance <= eps + 1e-6);
            prop_assert!(lg.lambda >= sd.value - 1e-7, "G value {} below optimum {}", lg.lambda, sd.value);
            for alpha in [1.25, 1.5, 2.0] {
                let dt = divergence(&rho, &sigma, Family::Minimal, alpha, Base::Two).unwrap();
                prop_assert!(sd.value <= dt + g(eps, GForm::Exact, Base::Two) / (alpha - 1.0) + 1e-7);
            }
        }
    }
}

#[test]
fn maximally_mixed_qubit_equality() {
    let bp = Bipartite::new(diag(&[0.5, 0.5]), 2, 1).unwrap();
    for eps in [0.05f64, 0.1, 0.2] {
        let want = 1.0 - (1.0 - eps * eps).log2();
        assert!((hmin(&bp, eps) - want).abs() < 1e-5);
    }
    assert!((hmin(&bp, 0.1) - 1.014500).abs() < 1e-6);
}

#[test]
fn classical_example_against_diagonal_program() {
    let p = [0.5, 0.25, 0.25];
    let bp = Bipartite::new(diag(&p), 3, 1).unwrap();
    let sdp = hmin(&bp, 0.2);
    assert!(sdp >= 1.0 - 1e-9);
    let cl = classical_smooth_min_entropy(&p, 0.2, Base::Two).unwrap();
    assert!((sdp - cl).abs() < 1e-6, "{sdp} vs {cl}");
}

#[test]
fn zero_smoothing_reduces_to_unsmoothed() {
    let mut s = Sampler::new(41);
    let bp = random_bp(&mut s, 2, 2, 4);
    assert_eq!(hmin(&bp, 0.0), min_entropy(&bp, Base::Two).unwrap().value);
    assert!((hmax(&bp, 0.0) - max_entropy(&bp, Base::Two).unwrap().value).abs() < 1e-7);
    let rho = s.full_density(3).unwrap();
    let sigma = s.full_density(3).unwrap();
    let d0 = smooth_max_divergence(&rho, &sigma, 0.0, Base::Two).unwrap().value;
    assert_eq!(d0, max_divergence(&rho, &sigma, Base::Two).unwrap());
}

#[test]
fn pure_product_state() {
    let v = kron(&proj(&qit_core::linalg::ket(2, 0)), &proj(&qit_core::linalg::ket(2, 1)));
    let bp = Bipartite::new(v, 2, 2).unwrap();
    assert!(hmax(&bp, 0.0).abs() < 1e-7);
    for eps in [0.1f64, 0.3, 0.6] {
        let h = hmax(&bp, eps);
        assert!(h <= 1e-7 && h >= (1.0 - eps * eps).log2() - 1e-6, "{eps}: {h}");
    }
}

#[test]
fn commuting_pair_positive_part() {
    let rho = diag(&[0.6, 0.3, 0.1]);
    let sigma = diag(&[0.2, 0.3, 0.5]);
    let lambda = 1.0; // bits
    let lg = smoothing_operator(&rho, &sigma, lambda, Base::Two).unwrap();
    let want: f64 = [0.6 - 0.4, 0.3 - 0.6, 0.1 - 1.0].iter().map(|x: &f64| x.max(0.0)).sum();
    assert!((lg.trace_sigma_plus - want).abs() < 1e-12);
}

#[test]
fn lambda_above_dmax_is_rejected() {
    let rho = diag(&[0.6, 0.4]);
    let sigma = diag(&[0.5, 0.5]);
    let d = max_divergence(&rho, &sigma, Base::Two).unwrap();
    assert!(matches!(smoothing_operator(&rho, &sigma, d + 0.01, Base::Two), Err(Error::LambdaTooLarge { .. })));
}

#[test]
fn eps_limits() {
    assert!(matches!(SmoothingParameter::new(1.0), Err(Error::EpsTooLarge { .. })));
    assert!(SmoothingParameter::new(0.5).unwrap().check_against(0.2).is_err());
    let bp = Bipartite::new(diag(&[0.5, 0.5]), 2, 1).unwrap();
    assert!(matches!(smooth_min_entropy(&bp, 1.2, Base::Two), Err(Error::EpsTooLarge { .. })));
    assert!(g(0.1, GForm::Loose, Base::Two) >= g(0.1, GForm::Exact, Base::Two));
}

#[test]
fn smooth_chain_rules() {
    let (e, e1, e2) = (0.2, 0.05, 0.05);
    let gd = chain_rule_g(e, e1, e2, Base::Two).unwrap();
    for seed in 0..3u64 {
        let mut s = Sampler::new(500 + seed);
        let m = s.density(8, 2).unwrap();
        let rho = qit_core::states::DensityOperator::new(m, vec![2, 2, 2], vec!["A".into(), "B".into(), "C".into()])
            .unwrap();
        let ab_c = cut(&rho, &["A", "B"], &["C"]);
        let a_bc = cut(&rho, &["A"], &["B", "C"]);
        let b_c = cut(&rho, &["B"], &["C"]);
        let tol = 1e-6;
        assert!(hmin(&ab_c, e) >= hmin(&a_bc, e1) + hmin(&b_c, e2) - gd - tol);
        assert!(hmin(&ab_c, e1) <= hmin(&a_bc, e) + hmax(&b_c, e2) + 2.0 * gd + tol);
        assert!(hmin(&ab_c, e1) <= hmax(&a_bc, e2) + hmin(&b_c, e) + 3.0 * gd + tol);
        assert!(hmax(&ab_c, e) <= hmax(&a_bc, e1) + hmax(&b_c, e2) + gd + tol);
        assert!(hmax(&ab_c, e1) >= hmin(&a_bc, e2) + hmax(&b_c, e) - 2.0 * gd - tol);
        assert!(hmax(&ab_c, e1) >= hmax(&a_bc, e) + hmin(&b_c, e2) - 3.0 * gd - tol);
    }
    let _ = mixed_tripartite;
}

#[test]
fn bernoulli_aep() {
    let p = [0.2, 0.8];
    assert!((renyi_entropy(&p, 1.0, Base::Two).unwrap() - 0.721928).abs() < 1e-6);
    assert!((renyi_entropy(&p, f64::INFINITY, Base::Two).unwrap() - 0.321928).abs() < 1e-6);
    assert!((renyi_entropy(&p, 0.5, Base::Two).unwrap() - 1.8f64.log2()).abs() < 1e-9);
    let h = 0.7219280948873623;
    let mut last = (f64::INFINITY, f64::INFINITY);
    for n in [50, 150, 1250] {
        let (lo, hi) = iid_smooth_bracket(&p, n, 0.05, Base::Two).unwrap();
        let (clo, chi) = iid_surprisal_cut(&p, n, 0.05, Base::Two).unwrap();
        assert!(lo < h && h < hi && clo < h && h < chi);
        assert!(hi - lo < last.0 && chi - clo < last.1);
        last = (hi - lo, chi - clo);
    }
    assert!(last.1 <= 0.08, "cut bracket {}", last.1);
    let bp = Bipartite::new(diag(&p), 2, 1).unwrap();
    let rows = aep_rates(&bp, 0.05, &[50, 150, 1250], Base::Two, &AepOptions::default()).unwrap();
    for r in &rows {
        let ex = r.exact.unwrap();
        assert!(r.lower_bound <= ex + 1e-9 && ex <= r.upper_bound + 1e-9, "{r:?}");
        assert!(r.lower_bound < h && h < r.upper_bound);
    }
    assert!(rows.windows(2).all(|w| w[1].upper_bound - w[1].lower_bound < w[0].upper_bound - w[0].lower_bound));
}

#[test]
fn two_copies_of_a_pure_state() {
    let mut s = Sampler::new(77);
    let v = s.pure_vector(4).unwrap();
    let bp = Bipartite::new(proj(&v), 2, 2).unwrap();
    let two = iid_bipartite(&bp, 2).unwrap();
    let one = min_entropy(&bp, Base::Two).unwrap().value;
    let both = min_entropy(&two, Base::Two).unwrap().value;
    assert!((both - 2.0 * one).abs() < 1e-7, "{both} vs {}", 2.0 * one);
    let one = max_entropy(&bp, Base::Two).unwrap().value;
    let both = max_entropy(&two, Base::Two).unwrap().value;
    assert!((both - 2.0 * one).abs() < 1e-7);
    let rows = aep_rates(&bp, 0.1, &[1, 2], Base::Two, &AepOptions::default()).unwrap();
    for r in &rows {
        let ex = r.exact.expect("small enough for the program");
        assert!(r.lower_bound <= ex + 1e-7 && ex <= r.upper_bound + 1e-7, "{r:?}");
    }
}
