use proptest::prelude::*;
use qit_core::divergences::{
    classical_renyi, classical_variance, divergence, divergence_variance, max_divergence, nussbaum_szkola,
    pinched_divergence, umegaki, Family, RenyiOrder,
};
use qit_core::linalg::{diag, eigh, kron, psd_power, real_matrix, tr, CMat, Sampler};
use qit_core::metrics::fidelity;
use qit_core::states::Channel;
use qit_core::Base;

fn config() -> ProptestConfig {
    ProptestConfig { cases: 32, ..ProptestConfig::default() }
}

fn figure_pair() -> (CMat, CMat) {
    let rho = real_matrix(&[&[5.0, 5.0, 2.0], &[5.0, 5.0, 2.0], &[2.0, 2.0, 2.0]]).unscale(12.0);
    let sigma = diag(&[5.0, 2.0, 1.0]).unscale(8.0);
    (rho, sigma)
}

fn d(rho: &CMat, sigma: &CMat, fam: Family, a: f64) -> f64 {
    divergence(rho, sigma, fam, a, Base::Two).unwrap()
}

/// Orders where each family is expected to be finite and well behaved.
const GRID: [f64; 10] = [0.2, 0.5, 0.8, 0.95, 1.0, 1.05, 1.3, 1.7, 2.0, 3.0];

#[test]
fn figure_ordering_on_grid() {
    let (rho, sigma) = figure_pair();
    let grid: Vec<f64> = (1..=9).map(|k| k as f64 / 10.0).chain((11..=20).map(|k| k as f64 / 10.0)).collect();
    for a in grid {
        let (m, p, x) = (d(&rho, &sigma, Family::Minimal, a), d(&rho, &sigma, Family::Petz, a), d(&rho, &sigma, Family::Maximal, a));
        assert!(m <= p + 1e-10 && p <= x + 1e-10, "α = {a}: {m} {p} {x}");
    }
}

#[test]
fn fixed_examples() {
    let (rho, sigma) = figure_pair();
    for fam in [Family::Minimal, Family::Petz, Family::Maximal] {
        for a in [0.3, 0.7, 1.0, 1.5, 2.0] {
            assert!(d(&rho, &rho, fam, a).abs() < 1e-10);
        }
    }
    let f = fidelity(&rho, &sigma).unwrap();
    assert!((d(&rho, &sigma, Family::Minimal, 0.5) + f.log2()).abs() < 1e-10);
    let p = [0.5, 0.5];
    let q = [0.75, 0.25];
    // max log-ratio: log2(0.5 / 0.25)
    assert!((max_divergence(&diag(&p), &diag(&q), Base::Two).unwrap() - 1.0).abs() < 1e-12);
    assert!((classical_renyi(&p, &q, f64::INFINITY, Base::Two).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn variance_examples() {
    let (rho, _) = figure_pair();
    assert!(divergence_variance(&rho, &rho, Base::Two).unwrap().abs() < 1e-10);

    let p = [0.5, 0.5];
    let q = [0.75, 0.25];
    let llr: Vec<f64> = p.iter().zip(&q).map(|(a, b)| f64::log2(a / b)).collect();
    let mean: f64 = llr.iter().zip(&p).map(|(l, w)| l * w).sum();
    let var: f64 = llr.iter().zip(&p).map(|(l, w)| w * (l - mean).powi(2)).sum();
    assert!((classical_variance(&p, &q, Base::Two).unwrap() - var).abs() < 1e-12);
    assert!((divergence_variance(&diag(&p), &diag(&q), Base::Two).unwrap() - var).abs() < 1e-12);
}

#[test]
fn tangent_slope_matches_variance() {
    let rho = real_matrix(&[&[0.5, 0.5], &[0.5, 0.5]]);
    let sigma = diag(&[0.01, 0.99]);
    let v = divergence_variance(&rho, &sigma, Base::E).unwrap();
    let h = 1e-3;
    let slope = (d(&rho, &sigma, Family::Minimal, 1.0 + h) - d(&rho, &sigma, Family::Minimal, 1.0 - h)) / (2.0 * h);
    let expected = v / (2.0 * std::f64::consts::LN_2);
    assert!((slope - expected).abs() < 1e-4, "{slope} vs {expected}");
}

#[test]
fn taylor_remainder_is_quadratic() {
    // K fitted once on this instance over |α − 1| ≤ 0.2 (0.0212) and pinned
    const K: f64 = 0.025;
    let (rho, sigma) = figure_pair();
    let d1 = umegaki(&rho, &sigma, Base::Two).unwrap();
    let v = divergence_variance(&rho, &sigma, Base::E).unwrap();
    let mut worst: f64 = 0.0;
    for k in 1..=40 {
        let a = 0.8 + 0.01 * k as f64;
        if (a - 1.0).abs() < 1e-9 {
            continue;
        }
        let rem = d(&rho, &sigma, Family::Petz, a) - d1 - (a - 1.0) * v / (2.0 * std::f64::consts::LN_2);
        worst = worst.max(rem.abs() / (a - 1.0).powi(2));
    }
    assert!(worst <= K, "fitted constant {worst}");
}

#[test]
fn nussbaum_szkola_examples() {
    let mut s = Sampler::new(7);
    let rho = s.full_density(2).unwrap();
    let sigma = s.full_density(2).unwrap();
    let (p, q) = nussbaum_szkola(&rho, &sigma).unwrap();
    assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12 && (q.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    for a in [0.3, 0.7, 1.0, 1.5, 2.0] {
        let c = classical_renyi(&p, &q, a, Base::Two).unwrap();
        assert!((c - d(&rho, &sigma, Family::Petz, a)).abs() < 1e-9);
    }
    // commuting inputs: mass only on pairs sharing an eigenvector, marginals are the spectra
    let (p, q) = nussbaum_szkola(&diag(&[0.7, 0.3]), &diag(&[0.4, 0.6])).unwrap();
    let support = |v: &[f64]| v.iter().filter(|x| x.abs() > 1e-15).count();
    assert_eq!((support(&p), support(&q)), (2, 2));
    let mut pv: Vec<f64> = p.iter().copied().filter(|x| x.abs() > 1e-15).collect();
    let mut qv: Vec<f64> = q.iter().copied().filter(|x| x.abs() > 1e-15).collect();
    pv.sort_by(f64::total_cmp);
    qv.sort_by(f64::total_cmp);
    assert!((pv[0] - 0.3).abs() < 1e-15 && (pv[1] - 0.7).abs() < 1e-15);
    assert!((qv[0] - 0.4).abs() < 1e-15 && (qv[1] - 0.6).abs() < 1e-15);
    for (x, y) in p.iter().zip(&q) {
        assert_eq!(x.abs() > 1e-15, y.abs() > 1e-15);
    }
}

#[test]
fn pinched_divergence_examples() {
    let mut s = Sampler::new(8);
    let rho = s.full_density(2).unwrap();
    let sigma = s.full_density(2).unwrap();
    let dmax = max_divergence(&rho, &sigma, Base::Two).unwrap();
    for n in [1, 2, 3] {
        let pd = pinched_divergence(&rho, &sigma, f64::INFINITY, n, Base::Two).unwrap();
        let spec = (pd.spec_size as f64).log2() / n as f64;
        assert!(pd.value <= dmax + 1e-10 && dmax <= pd.value + spec + 1e-10);
    }
    let dt = d(&rho, &sigma, Family::Minimal, 2.0);
    let mut last = f64::NEG_INFINITY;
    for n in [1, 2, 4, 8] {
        let pd = pinched_divergence(&rho, &sigma, 2.0, n, Base::Two).unwrap();
        assert!(pd.value >= last - 1e-12 && pd.value <= dt + 1e-10);
        assert!(pd.value >= dt - 2.0 * (pd.spec_size as f64).log2() / n as f64 - 1e-10);
        last = pd.value;
    }
}

#[test]
fn dpi_flags() {
    assert!(RenyiOrder::minimal(0.5).unwrap().dpi_valid());
    assert!(!RenyiOrder::minimal(0.4).unwrap().dpi_valid());
    assert!(RenyiOrder::petz(2.0).unwrap().dpi_valid());
    assert!(!RenyiOrder::petz(2.5).unwrap().dpi_valid());
}

/// `tr(A^α K B^{1−α} K†)`.
fn lieb_functional(a: &CMat, b: &CMat, k: &CMat, alpha: f64) -> f64 {
    tr(&(psd_power(a, alpha) * k * psd_power(b, 1.0 - alpha) * k.adjoint()))
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn monotone_in_alpha(seed in 0u64..10_000, dim in 2usize..4) {
        let mut s = Sampler::new(seed);
        let rho = s.full_density(dim).unwrap();
        let sigma = s.full_density(dim).unwrap();
        for fam in [Family::Minimal, Family::Petz, Family::Maximal] {
            let vals: Vec<f64> = GRID.iter().map(|&a| d(&rho, &sigma, fam, a)).collect();
            prop_assert!(vals.windows(2).all(|w| w[0] <= w[1] + 1e-9), "{:?} {:?}", fam, vals);
        }
        let top = d(&rho, &sigma, Family::Minimal, 50.0);
        prop_assert!(top <= max_divergence(&rho, &sigma, Base::Two).unwrap() + 1e-9);
    }

    #[test]
    fn minimal_below_petz(seed in 0u64..10_000, dim in 2usize..4, a in 0.05f64..4.0) {
        let mut s = Sampler::new(seed);
        let rho = s.full_density(dim).unwrap();
        let sigma = s.full_density(dim).unwrap();
        prop_assert!(d(&rho, &sigma, Family::Minimal, a) <= d(&rho, &sigma, Family::Petz, a) + 1e-9);
    }

    #[test]
    fn data_processing(seed in 0u64..10_000, din in 2usize..4, dout in 1usize..4, a in 0.5f64..4.0, b in 0.05f64..2.0) {
        let mut s = Sampler::new(seed);
        let rho = s.full_density(din).unwrap();
        let sigma = s.full_density(din).unwrap();
        let ch = Channel::random(&mut s, din, dout, 2usize.max(din.div_ceil(dout))).unwrap();
        let (fr, fs) = (ch.apply(&rho).unwrap(), ch.apply(&sigma).unwrap());
        prop_assert!(d(&fr, &fs, Family::Minimal, a) <= d(&rho, &sigma, Family::Minimal, a) + 1e-8);
        prop_assert!(d(&fr, &fs, Family::Petz, b) <= d(&rho, &sigma, Family::Petz, b) + 1e-8);
        prop_assert!(umegaki(&fr, &fs, Base::Two).unwrap() <= umegaki(&rho, &sigma, Base::Two).unwrap() + 1e-8);
    }

    #[test]
    fn additive_under_tensor_products(seed in 0u64..10_000, a in 0.3f64..3.0) {
        let mut s = Sampler::new(seed);
        let (rho, sigma) = (s.full_density(2).unwrap(), s.full_density(2).unwrap());
        let (tau, omega) = (s.full_density(2).unwrap(), s.full_density(2).unwrap());
        for fam in [Family::Minimal, Family::Petz, Family::Maximal] {
            let joint = d(&kron(&rho, &tau), &kron(&sigma, &omega), fam, a);
            let sum = d(&rho, &sigma, fam, a) + d(&tau, &omega, fam, a);
            prop_assert!((joint - sum).abs() < 1e-9, "{:?}", fam);
        }
        let joint = max_divergence(&kron(&rho, &tau), &kron(&sigma, &omega), Base::Two).unwrap();
        let sum = max_divergence(&rho, &sigma, Base::Two).unwrap() + max_divergence(&tau, &omega, Base::Two).unwrap();
        prop_assert!((joint - sum).abs() < 1e-9);
    }

    #[test]
    fn normalization_scaling(seed in 0u64..10_000, a in 0.1f64..3.0, x in 0.05f64..1.0, y in 0.05f64..5.0) {
        let mut s = Sampler::new(seed);
        let rho = s.full_density(3).unwrap();
        let sigma = s.full_density(3).unwrap();
        for fam in [Family::Minimal, Family::Petz, Family::Maximal] {
            let scaled = d(&rho.scale(x), &sigma.scale(y), fam, a);
            prop_assert!((scaled - d(&rho, &sigma, fam, a) - x.log2() + y.log2()).abs() < 1e-9);
        }
    }

    #[test]
    fn dominance(seed in 0u64..10_000, a in 0.5f64..4.0) {
        let mut s = Sampler::new(seed);
        let rho = s.full_density(3).unwrap();
        let sigma = s.full_density(3).unwrap();
        let bigger = &sigma + s.density(3, 1).unwrap().scale(s.uniform());
        prop_assert!(d(&rho, &sigma, Family::Minimal, a) >= d(&rho, &bigger, Family::Minimal, a) - 1e-9);
    }

    #[test]
    fn lieb_joint_concavity_and_ando_convexity(seed in 0u64..10_000, dim in 2usize..4, lo in 0.05f64..0.95, hi in 1.05f64..1.95, t in 0.0f64..1.0) {
        let mut s = Sampler::new(seed);
        let (a1, a2) = (s.full_density(dim).unwrap(), s.full_density(dim).unwrap());
        let (b1, b2) = (s.full_density(dim).unwrap(), s.full_density(dim).unwrap());
        let k = s.gaussian_matrix(dim, dim);
        let am = a1.scale(t) + a2.scale(1.0 - t);
        let bm = b1.scale(t) + b2.scale(1.0 - t);
        for (alpha, sign) in [(lo, 1.0), (hi, -1.0)] {
            let mixed = lieb_functional(&am, &bm, &k, alpha);
            let avg = t * lieb_functional(&a1, &b1, &k, alpha) + (1.0 - t) * lieb_functional(&a2, &b2, &k, alpha);
            prop_assert!(sign * (mixed - avg) >= -1e-9, "α = {}: {} vs {}", alpha, mixed, avg);
        }
    }

    #[test]
    fn relative_entropy_jointly_convex(seed in 0u64..10_000, dim in 2usize..4, t in 0.0f64..1.0) {
        let mut s = Sampler::new(seed);
        let (r1, r2) = (s.full_density(dim).unwrap(), s.full_density(dim).unwrap());
        let (s1, s2) = (s.full_density(dim).unwrap(), s.full_density(dim).unwrap());
        let mixed = umegaki(&(r1.scale(t) + r2.scale(1.0 - t)), &(s1.scale(t) + s2.scale(1.0 - t)), Base::Two).unwrap();
        let avg = t * umegaki(&r1, &s1, Base::Two).unwrap() + (1.0 - t) * umegaki(&r2, &s2, Base::Two).unwrap();
        prop_assert!(mixed <= avg + 1e-9);
    }

    #[test]
    fn support_conditions(seed in 0u64..10_000, a in 1.1f64..3.0, b in 0.1f64..0.9) {
        let mut s = Sampler::new(seed);
        let rho = s.full_density(3).unwrap();
        let sigma = s.density(3, 2).unwrap();
        prop_assert!(eigh(&sigma).rank() == 2);
        for fam in [Family::Minimal, Family::Petz] {
            prop_assert_eq!(d(&rho, &sigma, fam, a), f64::INFINITY);
            prop_assert!(d(&rho, &sigma, fam, b).is_finite());
        }
        prop_assert_eq!(umegaki(&rho, &sigma, Base::Two).unwrap(), f64::INFINITY);
    }
}
