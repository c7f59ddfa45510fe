//! Smooth min- and max-entropies, the smooth max-divergence, explicit
//! smoothing constructions and finite-n AEP bounds.
//!
//! The ε-ball is taken in purified distance and contains subnormalized
//! states. Quantum values come from semidefinite programs over an extension
//! of the smoothed state to a rank-minimal purifying system; classical
//! (trivial side information) values have closed forms that are evaluated on
//! type classes, so iid sources with thousands of copies stay cheap.

use serde::Serialize;
use statrs::function::erf::erfc_inv;
use statrs::function::gamma::ln_gamma;

use crate::divergences::{divergence_variance, max_divergence};
use crate::entropies::{
    min_entropy, renyi_entropy, sandwiched_up, support_part, von_neumann, Bipartite, IterOptions, SdpCertificate,
};
use crate::error::{Error, Result};
use crate::linalg::{
    eigh, hermitize, identity, kron, partial_trace, permute_subsystems, proj, psd_power, tensor_power,
    tr, CMat, CVec,
};
use crate::metrics::purified_distance;
use crate::sdpsolve::{self, AffineMap, BlockKind, Relation, SdpProblem, Sense, SolveOptions, DEFAULT_MAX_PARAMS};
use crate::states::{purification_vector, TTOL};
use crate::units::Base;

/// Which form of `g(ε)` to use in the Rényi bounds on smooth quantities.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GForm {
    /// `−log(1 − √(1 − ε²))`.
    Exact,
    /// `log(2/ε²)`, an upper bound on the exact form.
    Loose,
}

/// A smoothing radius `ε ∈ [0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SmoothingParameter {
    epsilon: f64,
}

impl SmoothingParameter {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&epsilon) {
            return Err(Error::EpsTooLarge { eps: epsilon, bound: 1.0 });
        }
        Ok(SmoothingParameter { epsilon })
    }

    pub fn epsilon(self) -> f64 {
        self.epsilon
    }

    /// Fails unless `ε < √(tr ρ)`.
    pub fn check_against(self, trace: f64) -> Result<()> {
        let bound = trace.max(0.0).sqrt();
        if self.epsilon >= bound {
            return Err(Error::EpsTooLarge { eps: self.epsilon, bound });
        }
        Ok(())
    }

    pub fn g(self, form: GForm, base: Base) -> f64 {
        g(self.epsilon, form, base)
    }
}

/// `g(ε)`; infinite at `ε = 0`.
pub fn g(eps: f64, form: GForm, base: Base) -> f64 {
    let nats = match form {
        GForm::Exact => -(1.0 - (1.0 - eps * eps).sqrt()).ln(),
        GForm::Loose => (2.0 / (eps * eps)).ln(),
    };
    base.from_nats(nats)
}

/// `g(δ)` with `δ = ε − ε′ − 2ε″`, the correction term of the smooth chain rules.
pub fn chain_rule_g(eps: f64, eps1: f64, eps2: f64, base: Base) -> Result<f64> {
    let delta = eps - eps1 - 2.0 * eps2;
    if delta <= 0.0 {
        return Err(Error::Range(format!("need ε > ε′ + 2ε″, got δ = {delta}")));
    }
    Ok(g(delta, GForm::Exact, base))
}

/// `Φ⁻¹(p)` for the standard normal distribution.
pub fn normal_quantile(p: f64) -> f64 {
    -std::f64::consts::SQRT_2 * erfc_inv(2.0 * p)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Construction {
    Sdp,
    LemmaG,
    Analytic,
    Identity,
}

/// A state in the ε-ball around the input, with its purified distance.
#[derive(Clone, Debug, Serialize)]
pub struct SmoothingWitness {
    #[serde(with = "crate::io::cmat")]
    pub state: CMat,
    pub distance: f64,
    pub construction: Construction,
}

impl SmoothingWitness {
    fn new(state: CMat, reference: &CMat, construction: Construction) -> Result<Self> {
        let state = hermitize(&state);
        let distance = purified_distance(&state, reference)?;
        Ok(SmoothingWitness { state, distance, construction })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SmoothResult {
    pub value: f64,
    pub base: Base,
    pub epsilon: f64,
    pub witness: SmoothingWitness,
    /// Optimal `σ_B` of the min-entropy program (min-entropy only).
    #[serde(with = "crate::io::cmat_opt")]
    pub sigma_b: Option<CMat>,
    pub certificate: Option<SdpCertificate>,
}

fn require_normalized(t: f64) -> Result<()> {
    if (t - 1.0).abs() > TTOL {
        return Err(Error::InvalidState(format!("smoothing needs a normalized state, trace is {t}")));
    }
    Ok(())
}

/// Smooth min-entropy `max_{ρ̃ ∈ B^ε(ρ)} H_min(A|B)_ρ̃` of a normalized state.
pub fn smooth_min_entropy(bp: &Bipartite, eps: f64, base: Base) -> Result<SmoothResult> {
    smooth_min_entropy_capped(bp, eps, base, DEFAULT_MAX_PARAMS)
}

/// [`smooth_min_entropy`] with an explicit cap on the number of real SDP parameters.
pub fn smooth_min_entropy_capped(bp: &Bipartite, eps: f64, base: Base, max_params: usize) -> Result<SmoothResult> {
    Ok(smooth_min_program(bp, eps, base, max_params)?.0)
}

/// The min-entropy smoothing program; also returns the optimal extension
/// `ρ̃_ABC` on the rank-minimal purifying system `C` and its dimension.
fn smooth_min_program(bp: &Bipartite, eps: f64, base: Base, max_params: usize) -> Result<(SmoothResult, CMat, usize)> {
    let sp = SmoothingParameter::new(eps)?;
    let t = bp.trace();
    sp.check_against(t)?;
    require_normalized(t)?;
    let (psi, r) = purification_vector(&bp.rho)?;
    if eps == 0.0 {
        let h = min_entropy(bp, base)?;
        let res = SmoothResult {
            value: h.value,
            base,
            epsilon: eps,
            witness: SmoothingWitness::new(bp.rho.clone(), &bp.rho, Construction::Identity)?,
            sigma_b: h.sigma_b,
            certificate: h.certificate,
        };
        return Ok((res, proj(&psi), r));
    }
    // The optimum is attained on supp ρ_A ⊗ supp ρ_B, and the compressed
    // program is better conditioned.
    let (va, _) = support_part(&eigh(&bp.rho_a()));
    let (vb, _) = support_part(&eigh(&bp.rho_b()));
    let (ka, kb) = (va.ncols(), vb.ncols());
    let w = kron(&va, &vb);
    let lift = kron(&w, &identity(r));
    let psi_c: CVec = lift.adjoint() * &psi;
    let kab = ka * kb;
    let n = kab * r;
    let mut p = SdpProblem::new(Sense::Min);
    p.max_params = max_params;
    let s = p.add_block("sigma_B", kb, BlockKind::Hermitian);
    let x = p.add_block("rho_ABC", n, BlockKind::Hermitian);
    p.add_objective(s, identity(kb));
    p.add_constraint(
        "dominance",
        vec![(s, AffineMap::embed_right(ka, kb)), (x, AffineMap::trace_right(kab, r).scaled(-1.0))],
        Relation::Ge,
        CMat::zeros(kab, kab),
    );
    p.add_constraint("trace", vec![(x, AffineMap::trace(n))], Relation::Le, identity(1));
    p.add_constraint(
        "overlap",
        vec![(x, AffineMap::functional(&proj(&psi_c)))],
        Relation::Ge,
        identity(1).scale(1.0 - eps * eps),
    );
    let sol = sdpsolve::solve(&p, &SolveOptions::tight())?.require_optimal()?;
    if sol.primal_value <= 0.0 {
        return Err(Error::Solver { status: "optimal".into(), detail: "nonpositive trace of sigma".into() });
    }
    let ext = &lift * hermitize(&sol.primal[x]) * lift.adjoint();
    let state = partial_trace(&ext, &[bp.da * bp.db, r], &[0])?;
    let sigma_b = &vb * hermitize(&sol.primal[s]) * vb.adjoint();
    let res = SmoothResult {
        value: -base.log(sol.primal_value),
        base,
        epsilon: eps,
        witness: SmoothingWitness::new(hermitize(&state), &bp.rho, Construction::Sdp)?,
        sigma_b: Some(sigma_b),
        certificate: Some(SdpCertificate::from_solution(&sol, 0)),
    };
    Ok((res, ext, r))
}

/// Smooth max-entropy, computed as `−H_min^ε(A|C)` on the complementary cut
/// of a rank-minimal purification `ρ_ABC`.
pub fn smooth_max_entropy(bp: &Bipartite, eps: f64, base: Base) -> Result<SmoothResult> {
    smooth_max_entropy_capped(bp, eps, base, DEFAULT_MAX_PARAMS)
}

pub fn smooth_max_entropy_capped(bp: &Bipartite, eps: f64, base: Base, max_params: usize) -> Result<SmoothResult> {
    let sp = SmoothingParameter::new(eps)?;
    let t = bp.trace();
    sp.check_against(t)?;
    require_normalized(t)?;
    let (da, db) = (bp.da, bp.db);
    let (psi, r) = purification_vector(&bp.rho)?;
    let rho_ac = partial_trace(&proj(&psi), &[da, db, r], &[0, 2])?;
    let comp = Bipartite::new(hermitize(&rho_ac), da, r)?;
    let (inner, ext, r2) = smooth_min_program(&comp, eps, base, max_params)?;
    // ψ_ABC and the inner purification ψ'_ACB' both purify ρ_AC, so an
    // isometry V: B' → B with (1 ⊗ V)ψ' = ψ carries A⊗B' to A⊗B.
    let (psi2, _) = purification_vector(&comp.rho)?;
    let m = CMat::from_fn(da * r, db, |ac, b| {
        let (a, c) = (ac / r, ac % r);
        psi[(a * db + b) * r + c]
    });
    let m2 = CMat::from_fn(da * r, r2, |ac, b2| psi2[ac * r2 + b2]);
    let m2_pinv = m2.pseudo_inverse(1e-12).map_err(|e| Error::InvalidState(e.to_string()))?;
    let v = (m2_pinv * m).transpose();
    let lift = kron(&identity(da), &v);
    let state_ab2 = partial_trace(&ext, &[da, r, r2], &[0, 2])?;
    let state = &lift * state_ab2 * lift.adjoint();
    Ok(SmoothResult {
        value: -inner.value,
        base,
        epsilon: eps,
        witness: SmoothingWitness::new(state, &bp.rho, inner.witness.construction)?,
        sigma_b: None,
        certificate: inner.certificate,
    })
}

/// Smooth max-divergence `min_{ρ̃ ∈ B^ε(ρ)} D_max(ρ̃‖σ)` together with the
/// feasible value of the explicit `G`-construction for the same ε.
#[derive(Clone, Debug, Serialize)]
pub struct SmoothDivergence {
    pub value: f64,
    pub base: Base,
    pub epsilon: f64,
    pub witness: SmoothingWitness,
    pub certificate: Option<SdpCertificate>,
    /// Upper bound from the `G`-construction (absent when `ρ` is not
    /// dominated by `σ`).
    pub lemma_g: Option<LemmaG>,
}

pub fn smooth_max_divergence(rho: &CMat, sigma: &CMat, eps: f64, base: Base) -> Result<SmoothDivergence> {
    let sp = SmoothingParameter::new(eps)?;
    let t = tr(rho);
    sp.check_against(t)?;
    require_normalized(t)?;
    let dominated = crate::linalg::dominated(rho, sigma)?;
    let lemma_g = if dominated { Some(lemma_g_for_eps(rho, sigma, eps, base)?) } else { None };
    if eps == 0.0 {
        return Ok(SmoothDivergence {
            value: max_divergence(rho, sigma, base)?,
            base,
            epsilon: eps,
            witness: SmoothingWitness::new(rho.clone(), rho, Construction::Identity)?,
            certificate: None,
            lemma_g,
        });
    }
    let (psi, r) = purification_vector(rho)?;
    let (w, mu) = support_part(&eigh(sigma));
    let s = mu.len();
    let d = rho.nrows();
    // ψ' = (W† ⊗ 1)ψ: the component of the purification inside supp σ ⊗ R.
    let wr = kron(&w.adjoint(), &identity(r));
    let psi_s: CVec = &wr * &psi;
    if psi_s.norm_squared() < 1.0 - eps * eps + 1e-12 {
        return Ok(SmoothDivergence {
            value: f64::INFINITY,
            base,
            epsilon: eps,
            witness: SmoothingWitness::new(rho.clone(), rho, Construction::Identity)?,
            certificate: None,
            lemma_g,
        });
    }
    let n = s * r;
    let mut p = SdpProblem::new(Sense::Min);
    let tb = p.add_block("t", 1, BlockKind::Nonneg);
    let x = p.add_block("rho_AR", n, BlockKind::Hermitian);
    p.add_objective(tb, identity(1));
    let ks: Vec<CMat> = (0..s)
        .map(|k| {
            let mut col = CMat::zeros(s, 1);
            col[(k, 0)] = crate::linalg::cr(mu[k].sqrt());
            col
        })
        .collect();
    p.add_constraint(
        "dominance",
        vec![(tb, AffineMap::kraus(1.0, &ks)?), (x, AffineMap::trace_right(s, r).scaled(-1.0))],
        Relation::Ge,
        CMat::zeros(s, s),
    );
    p.add_constraint("trace", vec![(x, AffineMap::trace(n))], Relation::Le, identity(1));
    p.add_constraint(
        "overlap",
        vec![(x, AffineMap::functional(&proj(&psi_s)))],
        Relation::Ge,
        identity(1).scale(1.0 - eps * eps),
    );
    let sol = sdpsolve::solve(&p, &SolveOptions::tight())?.require_optimal()?;
    let smoothed_s = partial_trace(&sol.primal[x], &[s, r], &[0])?;
    let state = &w * smoothed_s * w.adjoint();
    debug_assert_eq!(state.nrows(), d);
    Ok(SmoothDivergence {
        value: base.log(sol.primal_value),
        base,
        epsilon: eps,
        witness: SmoothingWitness::new(state, rho, Construction::Sdp)?,
        certificate: Some(SdpCertificate::from_solution(&sol, 0)),
        lemma_g,
    })
}

/// The smoothing `ρ̃ = GρG†` with `G = Λ^{1/2}(Λ + Σ)^{−1/2}`, `Λ = exp(λ)σ`
/// and `Σ` the positive part of `ρ − Λ`.
#[derive(Clone, Debug, Serialize)]
pub struct LemmaG {
    /// `λ` in the requested base.
    pub lambda: f64,
    pub witness: SmoothingWitness,
    #[serde(with = "crate::io::cmat")]
    pub sigma_plus: CMat,
    pub trace_sigma_plus: f64,
    /// `√(2 tr Σ − (tr Σ)²)`.
    pub distance_bound: f64,
    #[serde(with = "crate::io::cmat")]
    pub g: CMat,
}

fn positive_part_trace(rho: &CMat, sigma: &CMat, lambda_nats: f64) -> f64 {
    let x = rho - sigma.scale(lambda_nats.exp());
    eigh(&x).values.iter().filter(|&&l| l > 0.0).sum()
}

fn distance_from_trace(s: f64) -> f64 {
    (2.0 * s - s * s).max(0.0).sqrt()
}

pub fn smoothing_operator(rho: &CMat, sigma: &CMat, lambda: f64, base: Base) -> Result<LemmaG> {
    let dmax = max_divergence(rho, sigma, base)?;
    if lambda > dmax + 1e-9 * dmax.abs().max(1.0) {
        return Err(Error::LambdaTooLarge { lambda, dmax });
    }
    let big_lambda = sigma.scale(base.exp(lambda));
    let x = rho - &big_lambda;
    let es = eigh(&x);
    let sigma_plus = es.apply_all(|l| l.max(0.0));
    let trace_sigma_plus = tr(&sigma_plus);
    let g = psd_power(&big_lambda, 0.5) * psd_power(&(&big_lambda + &sigma_plus), -0.5);
    let state = &g * rho * g.adjoint();
    Ok(LemmaG {
        lambda,
        witness: SmoothingWitness::new(state, rho, Construction::LemmaG)?,
        distance_bound: distance_from_trace(trace_sigma_plus),
        sigma_plus,
        trace_sigma_plus,
        g,
    })
}

/// Smallest `λ` whose `G`-construction distance bound is at most `ε`, by
/// bisection on the monotone map `λ ↦ tr Σ(λ)`.
fn lemma_g_for_eps(rho: &CMat, sigma: &CMat, eps: f64, base: Base) -> Result<LemmaG> {
    let hi0 = base.to_nats(max_divergence(rho, sigma, base)?);
    let within = |l: f64| distance_from_trace(positive_part_trace(rho, sigma, l)) <= eps;
    let mut hi = hi0;
    if eps > 0.0 {
        let mut lo = hi0 - 1.0;
        let mut steps = 0;
        while within(lo) && steps < 200 {
            hi = lo;
            lo -= 2f64.powi(steps.min(10));
            steps += 1;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if within(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
    }
    smoothing_operator(rho, sigma, base.from_nats(hi).min(base.from_nats(hi0)), base)
}

/// A classical distribution represented by groups of equiprobable outcomes:
/// group `k` has per-outcome probability `q_k` and total probability `P_k`.
/// All quantities are kept as natural logarithms, so sources like
/// Bernoulli⊗n with large `n` do not underflow.
#[derive(Clone, Debug)]
pub struct TypeClasses {
    log_q: Vec<f64>,
    log_mass: Vec<f64>,
}

impl TypeClasses {
    /// Each positive entry of a normalized weight vector is its own group.
    pub fn from_pmf(p: &[f64]) -> Result<Self> {
        check_pmf(p)?;
        let (log_q, log_mass) = p.iter().filter(|&&x| x > 0.0).map(|&x| (x.ln(), x.ln())).unzip();
        Ok(TypeClasses { log_q, log_mass })
    }

    /// The `n`-fold iid product of `p`, grouped by type (multinomial classes).
    pub fn iid(p: &[f64], n: usize) -> Result<Self> {
        check_pmf(p)?;
        let lp: Vec<f64> = p.iter().filter(|&&x| x > 0.0).map(|x| x.ln()).collect();
        let d = lp.len();
        let mut out = TypeClasses { log_q: vec![], log_mass: vec![] };
        let mut counts = vec![0usize; d];
        let ln_n_fact = ln_gamma(n as f64 + 1.0);
        fn rec(k: usize, left: usize, counts: &mut Vec<usize>, lp: &[f64], ln_n_fact: f64, out: &mut TypeClasses) {
            let d = counts.len();
            if k + 1 == d {
                counts[k] = left;
                let lq: f64 = counts.iter().zip(lp).map(|(&c, &l)| c as f64 * l).sum();
                let lm: f64 = ln_n_fact - counts.iter().map(|&c| ln_gamma(c as f64 + 1.0)).sum::<f64>();
                out.log_q.push(lq);
                out.log_mass.push(lm + lq);
                return;
            }
            for c in 0..=left {
                counts[k] = c;
                rec(k + 1, left - c, counts, lp, ln_n_fact, out);
            }
        }
        rec(0, n, &mut counts, &lp, ln_n_fact, &mut out);
        Ok(out)
    }

    pub fn groups(&self) -> usize {
        self.log_q.len()
    }

    fn log_q_max(&self) -> f64 {
        self.log_q.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    fn log_q_min(&self) -> f64 {
        self.log_q.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Total probability (should be 1 up to rounding).
    pub fn total(&self) -> f64 {
        self.log_mass.iter().map(|m| m.exp()).sum()
    }

    /// Largest root fidelity `Σ √(p̃ p)` over subnormalized `p̃ ≤ t`, attained
    /// by `p̃ = min(c·p, t)` with `c ≥ 1` filling the unit budget.
    fn capped_fidelity(&self, lt: f64) -> f64 {
        let mass_at = |lc: f64| -> f64 {
            self.log_q.iter().zip(&self.log_mass).map(|(&lq, &lm)| (lm + lc.min(lt - lq)).exp()).sum()
        };
        let all_capped: f64 = self.log_q.iter().zip(&self.log_mass).map(|(&lq, &lm)| (lm + lt - lq).exp()).sum();
        let lc = if all_capped <= 1.0 {
            f64::INFINITY
        } else {
            let (mut lo, mut hi) = (0.0, (lt - self.log_q_min()).max(0.0));
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if mass_at(mid) <= 1.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            lo
        };
        self.log_q
            .iter()
            .zip(&self.log_mass)
            .map(|(&lq, &lm)| (lm + 0.5 * lc.min(lt - lq)).exp())
            .sum()
    }

    /// Smooth min-entropy with trivial side information.
    pub fn smooth_min(&self, eps: f64, base: Base) -> Result<f64> {
        SmoothingParameter::new(eps)?;
        let top = self.log_q_max();
        if eps == 0.0 {
            return Ok(base.from_nats(-top));
        }
        let f = (1.0 - eps * eps).sqrt();
        let mut hi = top;
        let mut lo = self.log_q_min() + 2.0 * f.ln() - 1.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.capped_fidelity(mid) >= f {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(base.from_nats(-hi))
    }

    /// Smooth max-entropy with trivial side information.
    ///
    /// With `u = √p̃` the program is `min Σu` subject to `Σ u√p ≥ f` and
    /// `Σu² ≤ 1`. Either all weight sits on the most likely outcomes (when
    /// they carry probability at least `f²`), or the optimum has the form
    /// `u ∝ (√p − τ)_+` with both constraints tight.
    pub fn smooth_max(&self, eps: f64, base: Base) -> Result<f64> {
        SmoothingParameter::new(eps)?;
        let f2 = 1.0 - eps * eps;
        let top = self.log_q_max();
        let top_mass: f64 = self
            .log_q
            .iter()
            .zip(&self.log_mass)
            .filter(|(&lq, _)| lq >= top - 1e-12)
            .map(|(_, &lm)| lm.exp())
            .sum();
        if eps > 0.0 && top_mass >= f2 {
            return Ok(base.from_nats(f2.ln() - top));
        }
        // r_k = τ/√q_k, parametrized by ln τ.
        let stats = |lt: f64| -> (f64, f64, f64) {
            let mut a = 0.0;
            let mut b = 0.0;
            let mut terms = Vec::with_capacity(self.groups());
            for (&lq, &lm) in self.log_q.iter().zip(&self.log_mass) {
                let r = (lt - 0.5 * lq).exp();
                if r < 1.0 {
                    let w = 1.0 - r;
                    a += lm.exp() * w;
                    b += lm.exp() * w * w;
                    terms.push(lm - 0.5 * lq + w.ln());
                }
            }
            let mx = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let log_sum = mx + terms.iter().map(|t| (t - mx).exp()).sum::<f64>().ln();
            (a, b, log_sum)
        };
        let objective = |lt: f64| -> f64 {
            let (_, b, log_sum) = stats(lt);
            2.0 * log_sum - b.ln()
        };
        if eps == 0.0 {
            return Ok(base.from_nats(objective(f64::NEG_INFINITY)));
        }
        let f = f2.sqrt();
        let ratio = |lt: f64| {
            let (a, b, _) = stats(lt);
            a / b.sqrt()
        };
        let mut hi = 0.5 * top;
        let mut lo = 0.5 * self.log_q_min() - 40.0;
        if ratio(lo) < f {
            lo = f64::NEG_INFINITY;
        }
        if lo.is_finite() {
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if ratio(mid) >= f {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
        }
        Ok(base.from_nats(objective(lo)))
    }

    /// Surprisal values `−ln q` left after cutting probability `ε` from each
    /// end of the surprisal distribution: `(smallest, largest)` in the base.
    pub fn surprisal_cut(&self, eps: f64, base: Base) -> Result<(f64, f64)> {
        if !(0.0..0.5).contains(&eps) {
            return Err(Error::Range(format!("cut ε = {eps} must lie in [0, 1/2)")));
        }
        let mut idx: Vec<usize> = (0..self.groups()).collect();
        idx.sort_by(|&i, &j| self.log_q[j].total_cmp(&self.log_q[i]));
        let pick = |order: &mut dyn Iterator<Item = &usize>| -> f64 {
            let mut acc = 0.0;
            for &k in order {
                acc += self.log_mass[k].exp();
                if acc > eps {
                    return -self.log_q[k];
                }
            }
            f64::NAN
        };
        let lo = pick(&mut idx.iter());
        let hi = pick(&mut idx.iter().rev());
        Ok((base.from_nats(lo), base.from_nats(hi)))
    }
}

fn check_pmf(p: &[f64]) -> Result<()> {
    if p.is_empty() || p.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
        return Err(Error::InvalidState("weights must be finite and nonnegative".into()));
    }
    let t: f64 = p.iter().sum();
    if (t - 1.0).abs() > TTOL {
        return Err(Error::InvalidState(format!("weights sum to {t}")));
    }
    Ok(())
}

/// Smooth min-entropy of a classical distribution with trivial side information.
pub fn classical_smooth_min_entropy(p: &[f64], eps: f64, base: Base) -> Result<f64> {
    TypeClasses::from_pmf(p)?.smooth_min(eps, base)
}

/// Smooth max-entropy of a classical distribution with trivial side information.
pub fn classical_smooth_max_entropy(p: &[f64], eps: f64, base: Base) -> Result<f64> {
    TypeClasses::from_pmf(p)?.smooth_max(eps, base)
}

/// One row of a finite-n AEP table; every entry is per copy.
#[derive(Clone, Debug, Serialize)]
pub struct AepRow {
    pub n: usize,
    /// `max_α H̃↑_α − g(ε)/(n(α − 1))`.
    pub lower_bound: f64,
    /// `(1/n) H_min^ε(A^n|B^n)` when it can be evaluated.
    pub exact: Option<f64>,
    /// Converse bound through the min/max relation and the dual Rényi bound
    /// on the smooth max-entropy.
    pub upper_bound: f64,
    /// `H + √(V/n) Φ⁻¹(ε²)`.
    pub second_order_ref: f64,
}

/// Orders `α > 1` scanned by the AEP bounds.
pub const AEP_ALPHAS: [f64; 18] =
    [1.001, 1.002, 1.005, 1.01, 1.02, 1.03, 1.05, 1.075, 1.1, 1.15, 1.2, 1.3, 1.5, 1.75, 2.0, 3.0, 5.0, 10.0];

#[derive(Clone, Copy, Debug)]
pub struct AepOptions {
    /// Real-parameter cap for the exact smooth min-entropy program.
    pub max_params: usize,
    pub iter: IterOptions,
}

impl Default for AepOptions {
    fn default() -> Self {
        AepOptions { max_params: DEFAULT_MAX_PARAMS, iter: IterOptions::default() }
    }
}

/// Diagonal of `ρ` when it is diagonal and `B` is trivial.
fn classical_weights(bp: &Bipartite) -> Option<Vec<f64>> {
    if bp.db != 1 {
        return None;
    }
    let n = bp.rho.nrows();
    for i in 0..n {
        for j in 0..n {
            if i != j && bp.rho[(i, j)].norm() > crate::states::CTOL {
                return None;
            }
        }
    }
    Some((0..n).map(|i| bp.rho[(i, i)].re.max(0.0)).collect())
}

/// `ρ_AB^{⊗n}` ordered as `A^n ⊗ B^n`.
pub fn iid_bipartite(bp: &Bipartite, n: usize) -> Result<Bipartite> {
    let big = tensor_power(&bp.rho, n);
    let dims: Vec<usize> = (0..n).flat_map(|_| [bp.da, bp.db]).collect();
    let perm: Vec<usize> = (0..n).map(|k| 2 * k).chain((0..n).map(|k| 2 * k + 1)).collect();
    let m = permute_subsystems(&big, &dims, &perm)?;
    Ok(Bipartite { rho: m, da: bp.da.pow(n as u32), db: bp.db.pow(n as u32) })
}

pub fn aep_rates(bp: &Bipartite, eps: f64, n_list: &[usize], base: Base, opts: &AepOptions) -> Result<Vec<AepRow>> {
    let sp = SmoothingParameter::new(eps)?;
    if eps == 0.0 {
        return Err(Error::Range("the AEP bounds need ε > 0".into()));
    }
    require_normalized(bp.trace())?;
    if n_list.contains(&0) {
        return Err(Error::Range("n must be positive".into()));
    }
    let h = von_neumann(bp, base)?;
    let sigma = kron(&identity(bp.da), &bp.rho_b());
    let v = divergence_variance(&bp.rho, &sigma, base)?;
    let classical = classical_weights(bp);
    let up = |alpha: f64| -> Result<f64> {
        match &classical {
            Some(p) => renyi_entropy(p, alpha, base),
            None => Ok(sandwiched_up(bp, alpha, base, &opts.iter)?.value),
        }
    };
    let above: Vec<(f64, f64)> = AEP_ALPHAS.iter().map(|&a| Ok((a, up(a)?))).collect::<Result<_>>()?;
    let below: Vec<(f64, f64)> = AEP_ALPHAS
        .iter()
        .map(|&a| {
            let beta = a / (2.0 * a - 1.0);
            Ok((a, up(beta)?))
        })
        .collect::<Result<_>>()?;
    let g_eps = sp.g(GForm::Exact, base);
    let (w, _) = support_part(&eigh(&bp.rho));
    let rank = w.ncols();
    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let nf = n as f64;
        let lower_bound = above.iter().map(|&(a, hv)| hv - g_eps / (nf * (a - 1.0))).fold(f64::NEG_INFINITY, f64::max);
        let mut upper_bound = f64::INFINITY;
        let phi = eps.asin();
        for k in 1..40 {
            let e2 = (1.0 - eps) * k as f64 / 40.0;
            let angle = phi + e2.asin();
            if angle >= std::f64::consts::FRAC_PI_2 {
                continue;
            }
            let bridge = -2.0 * base.log(angle.cos());
            let g2 = g(e2, GForm::Exact, base);
            for &(a, hb) in &below {
                upper_bound = upper_bound.min(hb + g2 / (nf * (a - 1.0)) + bridge / nf);
            }
        }
        let exact = match &classical {
            Some(p) => Some(TypeClasses::iid(p, n)?.smooth_min(eps, base)? / nf),
            None => {
                let size = (bp.da * bp.db * rank).checked_pow(n as u32).unwrap_or(usize::MAX);
                if size.saturating_mul(size) + bp.db.pow(n as u32).pow(2) <= opts.max_params {
                    let big = iid_bipartite(bp, n)?;
                    Some(smooth_min_entropy_capped(&big, eps, base, opts.max_params)?.value / nf)
                } else {
                    None
                }
            }
        };
        let second_order_ref = h + (v / nf).sqrt() * normal_quantile(eps * eps);
        rows.push(AepRow { n, lower_bound, exact, upper_bound, second_order_ref });
    }
    Ok(rows)
}

/// Smooth entropies of `n` iid copies of a classical source, per copy:
/// `(H_min^ε/n, H_max^ε/n)`.
pub fn iid_smooth_bracket(p: &[f64], n: usize, eps: f64, base: Base) -> Result<(f64, f64)> {
    let tc = TypeClasses::iid(p, n)?;
    let nf = n as f64;
    Ok((tc.smooth_min(eps, base)? / nf, tc.smooth_max(eps, base)? / nf))
}

/// Per-copy surprisal bracket of `n` iid copies after cutting `ε` of
/// probability from each end.
pub fn iid_surprisal_cut(p: &[f64], n: usize, eps: f64, base: Base) -> Result<(f64, f64)> {
    let (lo, hi) = TypeClasses::iid(p, n)?.surprisal_cut(eps, base)?;
    Ok((lo / n as f64, hi / n as f64))
}

/// `g` restricted to a positive-part trace, exposed for checks of the
/// `G`-construction: `√(2s − s²)`.
pub fn lemma_g_distance_bound(trace_sigma_plus: f64) -> f64 {
    distance_from_trace(trace_sigma_plus)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropies::max_entropy;
    use crate::linalg::{diag, Sampler};

    #[test]
    fn eps_zero_matches_min_entropy() {
        let mut s = Sampler::new(3);
        let bp = Bipartite::new(s.full_density(4).unwrap(), 2, 2).unwrap();
        let a = smooth_min_entropy(&bp, 0.0, Base::Two).unwrap().value;
        let b = min_entropy(&bp, Base::Two).unwrap().value;
        assert_eq!(a, b);
    }

    #[test]
    fn maximally_mixed_qubit() {
        let bp = Bipartite::new(diag(&[0.5, 0.5]), 2, 1).unwrap();
        for eps in [0.05, 0.1, 0.2] {
            let want = 1.0 - (1.0f64 - eps * eps).log2();
            let sdp = smooth_min_entropy(&bp, eps, Base::Two).unwrap();
            assert!((sdp.value - want).abs() < 1e-6, "{eps}: {} vs {want}", sdp.value);
            assert!(sdp.witness.distance <= eps + 1e-6);
            let cl = classical_smooth_min_entropy(&[0.5, 0.5], eps, Base::Two).unwrap();
            assert!((cl - want).abs() < 1e-9);
        }
    }

    #[test]
    fn smooth_max_at_zero_is_max_entropy() {
        let mut s = Sampler::new(8);
        let bp = Bipartite::new(s.full_density(4).unwrap(), 2, 2).unwrap();
        let a = smooth_max_entropy(&bp, 0.0, Base::Two).unwrap().value;
        let b = max_entropy(&bp, Base::Two).unwrap().value;
        assert!((a - b).abs() < 1e-7, "{a} vs {b}");
    }

    #[test]
    fn classical_smooth_max_matches_sdp() {
        let p = [0.5, 0.25, 0.25];
        let bp = Bipartite::new(diag(&p), 3, 1).unwrap();
        for eps in [0.1, 0.2] {
            let sdp = smooth_max_entropy(&bp, eps, Base::Two).unwrap().value;
            let cl = classical_smooth_max_entropy(&p, eps, Base::Two).unwrap();
            assert!((sdp - cl).abs() < 1e-6, "{eps}: {sdp} vs {cl}");
        }
    }

    #[test]
    fn lemma_g_at_dmax_is_identity() {
        let mut s = Sampler::new(5);
        let rho = s.full_density(2).unwrap();
        let sigma = s.full_density(2).unwrap();
        let d = max_divergence(&rho, &sigma, Base::Two).unwrap();
        let lg = smoothing_operator(&rho, &sigma, d, Base::Two).unwrap();
        assert!(lg.trace_sigma_plus < 1e-9);
        assert!(lg.witness.distance < 1e-6);
        assert!(matches!(
            smoothing_operator(&rho, &sigma, d + 0.1, Base::Two),
            Err(Error::LambdaTooLarge { .. })
        ));
    }

    #[test]
    fn iid_types_sum_to_one() {
        let tc = TypeClasses::iid(&[0.2, 0.8], 1250).unwrap();
        assert_eq!(tc.groups(), 1251);
        assert!((tc.total() - 1.0).abs() < 1e-9);
        let tc3 = TypeClasses::iid(&[0.2, 0.3, 0.5], 7).unwrap();
        assert!((tc3.total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn quantile_values() {
        assert!(normal_quantile(0.5).abs() < 1e-15);
        assert!((normal_quantile(0.975) - 1.959963984540054).abs() < 1e-12);
    }
}
