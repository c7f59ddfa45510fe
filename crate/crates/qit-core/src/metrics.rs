//! Schatten norms, the positive-cone dual norm, generalized trace distance,
//! fidelity, generalized fidelity and purified distance.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{check_hermitian, check_psd_eig, eigh, psd_sqrt, tr, zeros, CMat};

/// Singular values, descending.
pub fn singular_values(l: &CMat) -> Vec<f64> {
    if l.nrows() == 0 || l.ncols() == 0 {
        return vec![];
    }
    let mut s: Vec<f64> = l.clone().singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Schatten `p`-norm `(Σ s_i^p)^{1/p}`; `p = ∞` gives the largest singular value.
/// Values of `p` in `(0, 1)` are computed as well, although they are not norms.
pub fn schatten_norm(l: &CMat, p: f64) -> Result<f64> {
    if p.is_nan() || p <= 0.0 {
        return Err(Error::Range(format!("Schatten index p = {p} must be positive")));
    }
    let s = singular_values(l);
    if p.is_infinite() {
        return Ok(s.first().copied().unwrap_or(0.0));
    }
    Ok(s.iter().map(|x| x.powf(p)).sum::<f64>().powf(1.0 / p))
}

/// Whether the Schatten index defines a norm.
pub fn schatten_is_norm(p: f64) -> bool {
    p >= 1.0
}

/// Trace norm of a Hermitian matrix from its eigenvalues.
fn hermitian_trace_norm(xi: &CMat) -> f64 {
    eigh(xi).values.iter().map(|l| l.abs()).sum()
}

/// Positive-cone dual norm `(‖ξ‖₁ + |tr ξ|)/2`.
pub fn dual_norm_plus(xi: &CMat) -> Result<f64> {
    check_hermitian(xi)?;
    Ok(0.5 * (hermitian_trace_norm(xi) + tr(xi).abs()))
}

fn check_state(m: &CMat) -> Result<()> {
    check_hermitian(m)?;
    check_psd_eig(&eigh(m))
}

fn same_size(a: &CMat, b: &CMat) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::DimensionMismatch(format!("{:?} vs {:?}", a.shape(), b.shape())));
    }
    Ok(())
}

/// Orders a pair of operators by their entries so that symmetric distances
/// evaluate identically in both argument orders.
fn ordered<'a>(a: &'a CMat, b: &'a CMat) -> (&'a CMat, &'a CMat) {
    for (x, y) in a.iter().zip(b.iter()) {
        match x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)) {
            std::cmp::Ordering::Less => return (a, b),
            std::cmp::Ordering::Greater => return (b, a),
            std::cmp::Ordering::Equal => {}
        }
    }
    (a, b)
}

/// Generalized trace distance `‖ρ − τ‖₊ = ½‖ρ − τ‖₁ + ½|tr(ρ − τ)|`.
pub fn trace_distance(rho: &CMat, tau: &CMat) -> Result<f64> {
    same_size(rho, tau)?;
    let (a, b) = ordered(rho, tau);
    dual_norm_plus(&(a - b))
}

/// `ρ̂ = ρ ⊕ (1 − tr ρ)`.
pub fn hat(rho: &CMat) -> CMat {
    let d = rho.nrows();
    let mut out = zeros(d + 1, d + 1);
    out.view_mut((0, 0), (d, d)).copy_from(rho);
    out[(d, d)].re = 1.0 - tr(rho);
    out
}

/// `½‖ρ̂ − τ̂‖₁`, equal to [`trace_distance`] for subnormalized inputs.
pub fn trace_distance_hat(rho: &CMat, tau: &CMat) -> Result<f64> {
    same_size(rho, tau)?;
    Ok(0.5 * hermitian_trace_norm(&(hat(rho) - hat(tau))))
}

/// `‖√ρ √τ‖₁` from singular values.
fn root_fidelity(rho: &CMat, tau: &CMat) -> f64 {
    let (rho, tau) = ordered(rho, tau);
    let p = psd_sqrt(rho) * psd_sqrt(tau);
    singular_values(&p).iter().sum()
}

/// Fidelity `F(ρ, τ) = ‖√ρ √τ‖₁²`.
pub fn fidelity(rho: &CMat, tau: &CMat) -> Result<f64> {
    same_size(rho, tau)?;
    check_state(rho)?;
    check_state(tau)?;
    Ok(root_fidelity(rho, tau).powi(2))
}

/// Generalized fidelity `(‖√ρ √τ‖₁ + √((1 − tr ρ)(1 − tr τ)))²`.
pub fn gen_fidelity(rho: &CMat, tau: &CMat) -> Result<f64> {
    same_size(rho, tau)?;
    check_state(rho)?;
    check_state(tau)?;
    let a = (1.0 - tr(rho)).max(0.0);
    let b = (1.0 - tr(tau)).max(0.0);
    Ok((root_fidelity(rho, tau) + (a * b).sqrt()).powi(2))
}

/// Generalized fidelity through the hat construction, `F(ρ̂, τ̂)`.
pub fn gen_fidelity_hat(rho: &CMat, tau: &CMat) -> Result<f64> {
    same_size(rho, tau)?;
    fidelity(&hat(rho), &hat(tau))
}

/// Purified distance `√(1 − F*(ρ, τ))`.
pub fn purified_distance(rho: &CMat, tau: &CMat) -> Result<f64> {
    let f = gen_fidelity(rho, tau)?;
    Ok(clamped_sqrt(1.0 - f))
}

/// `√x` after clamping tiny negatives (down to `−1e−12`) to zero.
pub fn clamped_sqrt(x: f64) -> f64 {
    if x < 0.0 && x >= -1e-12 {
        0.0
    } else {
        x.max(0.0).sqrt()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceKind {
    Trace,
    Purified,
    Fidelity,
    GenFidelity,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Distance {
    pub value: f64,
    pub kind: DistanceKind,
}

pub fn distance(kind: DistanceKind, rho: &CMat, tau: &CMat) -> Result<Distance> {
    let value = match kind {
        DistanceKind::Trace => trace_distance(rho, tau)?,
        DistanceKind::Purified => purified_distance(rho, tau)?,
        DistanceKind::Fidelity => fidelity(rho, tau)?,
        DistanceKind::GenFidelity => gen_fidelity(rho, tau)?,
    };
    Ok(Distance { value, kind })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{diag, identity, ket, proj, real_matrix, Sampler};

    #[test]
    fn schatten_examples() {
        for d in 1..5 {
            for p in [0.5, 1.0, 2.0, 3.5] {
                let n = schatten_norm(&identity(d), p).unwrap();
                assert!((n - (d as f64).powf(1.0 / p)).abs() < 1e-13);
            }
        }
        let x = real_matrix(&[&[0.0, 1.0], &[1.0, 0.0]]);
        assert!((schatten_norm(&x, f64::INFINITY).unwrap() - 1.0).abs() < 1e-15);
        let mut s = Sampler::new(1);
        let m = s.density(3, 2).unwrap().scale(0.8);
        assert!((schatten_norm(&m, 1.0).unwrap() - tr(&m)).abs() < 1e-14);
        assert!(schatten_norm(&m, 0.0).is_err());
    }

    #[test]
    fn dual_norm_examples() {
        let mut s = Sampler::new(2);
        let w = s.full_density(3).unwrap().scale(0.6);
        assert!((dual_norm_plus(&w).unwrap() - 0.6).abs() < 1e-14);
        assert!((dual_norm_plus(&diag(&[1.0, -1.0])).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(dual_norm_plus(&zeros(2, 2)).unwrap(), 0.0);
    }

    #[test]
    fn trace_distance_examples() {
        let mut s = Sampler::new(3);
        let rho = s.full_density(3).unwrap();
        assert!(trace_distance(&rho, &rho).unwrap().abs() < 1e-15);
        let mixed = identity(2).unscale(2.0);
        let pure = proj(&ket(2, 0));
        assert!((trace_distance(&mixed, &pure).unwrap() - 0.5).abs() < 1e-15);
        for t in [0.1, 0.35, 0.8] {
            let d = trace_distance(&rho, &rho.scale(1.0 - t)).unwrap();
            assert!((d - t).abs() < 1e-14);
            let dh = trace_distance_hat(&rho, &rho.scale(1.0 - t)).unwrap();
            assert!((dh - t).abs() < 1e-14);
        }
    }

    #[test]
    fn fidelity_examples() {
        let mut s = Sampler::new(4);
        let a = s.pure_vector(3).unwrap();
        let b = s.pure_vector(3).unwrap();
        let f = fidelity(&proj(&a), &proj(&b)).unwrap();
        assert!((f - a.dotc(&b).norm_sqr()).abs() < 1e-12);
        let rho = s.full_density(3).unwrap();
        assert!((fidelity(&rho, &rho).unwrap() - 1.0).abs() < 1e-12);
        let p = [0.2f64, 0.3, 0.5];
        let q = [0.6, 0.1, 0.3];
        let bc: f64 = p.iter().zip(&q).map(|(x, y)| (x * y).sqrt()).sum();
        assert!((fidelity(&diag(&p), &diag(&q)).unwrap() - bc * bc).abs() < 1e-14);
    }

    #[test]
    fn generalized_fidelity_matches_hat_form() {
        let mut s = Sampler::new(5);
        for _ in 0..10 {
            let r = s.full_density(3).unwrap().scale(s.uniform());
            let t = s.density(3, 2).unwrap().scale(s.uniform());
            let a = gen_fidelity(&r, &t).unwrap();
            let b = gen_fidelity_hat(&r, &t).unwrap();
            assert!((a - b).abs() < 1e-10, "{a} {b}");
        }
    }

    #[test]
    fn purified_distance_examples() {
        let mut s = Sampler::new(6);
        let rho = s.full_density(2).unwrap();
        assert!(purified_distance(&rho, &rho).unwrap() < 1e-7);
        let mixed = identity(2).unscale(2.0);
        let pure = proj(&ket(2, 0));
        let p = purified_distance(&mixed, &pure).unwrap();
        assert!((p - 0.5f64.sqrt()).abs() < 1e-14);
    }
}
