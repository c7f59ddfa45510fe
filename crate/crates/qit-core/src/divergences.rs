//! Rényi divergences: classical, minimal (sandwiched), Petz, maximal, the
//! max-divergence and Umegaki's relative entropy, together with the
//! divergence variance, the Nussbaum–Szkoła distributions and the pinched
//! divergence of tensor powers.
//!
//! All routines accept positive semidefinite matrices of matching size. The
//! first argument may be subnormalized; the second need not be a state at all
//! (conditional entropies use `id ⊗ σ`). Values are returned in the requested
//! [`Base`]; support violations produce `+∞` rather than an error.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{
    check_hermitian, check_psd_eig, dominated, eigh, orthogonal, psd_power_es, tr, zeros, CMat,
    EigenSystem, CLUSTER_REL, KERNEL_REL,
};
use crate::metrics::singular_values;
use crate::units::Base;

/// Half-width of the band around `α = 1` where the first-order expansion
/// replaces the quotient `log Q / (α − 1)`.
pub const NEAR_ONE: f64 = 1e-4;

/// Largest pinched classical problem, `d^n`.
pub const PINCH_CAP: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Classical,
    Minimal,
    Petz,
    Maximal,
    Max,
    Umegaki,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Classical => "classical",
            Family::Minimal => "minimal",
            Family::Petz => "petz",
            Family::Maximal => "maximal",
            Family::Max => "max",
            Family::Umegaki => "umegaki",
        }
    }
}

impl std::str::FromStr for Family {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(match s {
            "classical" => Family::Classical,
            "minimal" | "sandwiched" => Family::Minimal,
            "petz" => Family::Petz,
            "maximal" => Family::Maximal,
            "max" => Family::Max,
            "umegaki" => Family::Umegaki,
            _ => return Err(format!("unknown divergence family '{s}'")),
        })
    }
}

/// An order `α ∈ [0, ∞]` together with the divergence family.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RenyiOrder {
    pub alpha: f64,
    pub family: Family,
}

impl RenyiOrder {
    /// Umegaki is pinned to `α = 1` and the max-divergence to `α = ∞`.
    pub fn new(family: Family, alpha: f64) -> Result<Self> {
        let alpha = match family {
            Family::Umegaki => 1.0,
            Family::Max => f64::INFINITY,
            _ => alpha,
        };
        if alpha.is_nan() || alpha < 0.0 {
            return Err(Error::Range(format!("order alpha = {alpha} must lie in [0, inf]")));
        }
        Ok(RenyiOrder { alpha, family })
    }

    pub fn minimal(alpha: f64) -> Result<Self> {
        Self::new(Family::Minimal, alpha)
    }

    pub fn petz(alpha: f64) -> Result<Self> {
        Self::new(Family::Petz, alpha)
    }

    pub fn maximal(alpha: f64) -> Result<Self> {
        Self::new(Family::Maximal, alpha)
    }

    /// Whether the data-processing inequality is known to hold at this order.
    pub fn dpi_valid(&self) -> bool {
        let a = self.alpha;
        match self.family {
            Family::Classical | Family::Umegaki | Family::Max => true,
            Family::Minimal => a >= 0.5,
            Family::Petz => a > 0.0 && a <= 2.0,
            Family::Maximal => a <= 2.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SupportCondition {
    /// `ρ ≪ σ`.
    Ok,
    /// `α < 1`, supports neither nested nor orthogonal; the value is finite.
    AlphaLt1NotPerp,
    /// Support condition fails; the value is `+∞`.
    Infinite,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DivergenceResult {
    pub value: f64,
    /// The trace functional `Q_α` (for `α = ∞`, the largest eigenvalue of
    /// `σ^{-1/2} ρ σ^{-1/2}`; for `α = 1`, `tr ρ`).
    pub q_functional: f64,
    pub support_condition: SupportCondition,
    pub order: RenyiOrder,
    pub base: Base,
}

impl DivergenceResult {
    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
    }
}

/// Nats-valued intermediate.
#[derive(Clone, Copy, Debug)]
struct Raw {
    value: f64,
    q: f64,
    cond: SupportCondition,
}

impl Raw {
    fn infinite(q: f64) -> Self {
        Raw { value: f64::INFINITY, q, cond: SupportCondition::Infinite }
    }
}

fn thr(v: &[f64]) -> f64 {
    KERNEL_REL * v.iter().fold(0.0f64, |a, &b| a.max(b.abs()))
}

fn check_classical_pair(p: &[f64], q: &[f64]) -> Result<()> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch(format!("{} vs {} outcomes", p.len(), q.len())));
    }
    for &x in p.iter().chain(q) {
        if !x.is_finite() {
            return Err(Error::NonFinite);
        }
        if x < -1e-12 {
            return Err(Error::InvalidState(format!("negative weight {x}")));
        }
    }
    if p.iter().all(|&x| x <= 0.0) {
        return Err(Error::InvalidState("first argument must be nonzero".into()));
    }
    Ok(())
}

/// Classical variance `Σ p (ln(p/q) − D)² / Σ p` in nats², on `supp p`.
/// Assumes `p ≪ q`.
fn classical_variance_nats(p: &[f64], q: &[f64]) -> f64 {
    let tp: f64 = p.iter().sum();
    let tp_thr = thr(p);
    let mut m = 0.0;
    let mut s2 = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        if a > tp_thr {
            let l = (a / b).ln();
            m += a * l;
            s2 += a * l * l;
        }
    }
    m /= tp;
    (s2 / tp - m * m).max(0.0)
}

fn classical_raw(p: &[f64], q: &[f64], alpha: f64) -> Raw {
    let tp: f64 = p.iter().sum();
    let (tp_thr, tq_thr) = (thr(p), thr(q));
    let mut dominated = true;
    let mut overlap = false;
    for (&a, &b) in p.iter().zip(q) {
        if a > tp_thr {
            if b > tq_thr {
                overlap = true;
            } else {
                dominated = false;
            }
        }
    }
    if alpha >= 1.0 && !dominated {
        return Raw::infinite(f64::INFINITY);
    }
    if !overlap {
        return Raw::infinite(0.0);
    }
    let cond = if dominated { SupportCondition::Ok } else { SupportCondition::AlphaLt1NotPerp };
    let pairs = || p.iter().zip(q).filter(|(&a, &b)| a > tp_thr && b > tq_thr);
    if alpha == 0.0 {
        let qq: f64 = pairs().map(|(_, &b)| b).sum();
        return Raw { value: -(qq / tp).ln(), q: qq, cond };
    }
    if alpha.is_infinite() {
        let r = pairs().map(|(&a, &b)| a / b).fold(0.0f64, f64::max);
        return Raw { value: r.ln(), q: r, cond };
    }
    let d1 = || pairs().map(|(&a, &b)| a * (a / b).ln()).sum::<f64>() / tp;
    if alpha == 1.0 {
        return Raw { value: d1(), q: tp, cond };
    }
    if (alpha - 1.0).abs() < NEAR_ONE {
        let v = classical_variance_nats(p, q);
        let value = d1() + 0.5 * (alpha - 1.0) * v;
        return Raw { value, q: tp * ((alpha - 1.0) * value).exp(), cond };
    }
    let qq: f64 = pairs().map(|(&a, &b)| (alpha * a.ln() + (1.0 - alpha) * b.ln()).exp()).sum();
    if qq <= 0.0 {
        return Raw::infinite(qq);
    }
    Raw { value: (qq / tp).ln() / (alpha - 1.0), q: qq, cond }
}

/// Classical Rényi divergence `D_α(p‖q) = log(Σ p^α q^{1−α} / Σ p)/(α − 1)`,
/// with the limits `α ∈ {0, 1, ∞}` and the support conventions of the
/// quantum families.
pub fn classical_renyi(p: &[f64], q: &[f64], alpha: f64, base: Base) -> Result<f64> {
    check_classical_pair(p, q)?;
    if alpha.is_nan() || alpha < 0.0 {
        return Err(Error::Range(format!("order alpha = {alpha} must lie in [0, inf]")));
    }
    Ok(base.from_nats(classical_raw(p, q, alpha).value))
}

/// Variance of the log-likelihood ratio under `p/Σp`, in squared base units.
/// `+∞` if `p` is not dominated by `q`.
pub fn classical_variance(p: &[f64], q: &[f64], base: Base) -> Result<f64> {
    check_classical_pair(p, q)?;
    if classical_raw(p, q, 1.0).cond != SupportCondition::Ok {
        return Ok(f64::INFINITY);
    }
    Ok(classical_variance_nats(p, q) * base.per_nat().powi(2))
}

struct Pair {
    rho: EigenSystem,
    sigma: EigenSystem,
    tr_rho: f64,
    dominated: bool,
    orthogonal: bool,
}

fn prepare(rho: &CMat, sigma: &CMat) -> Result<Pair> {
    if rho.shape() != sigma.shape() || rho.nrows() != rho.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "rho is {:?}, sigma is {:?}",
            rho.shape(),
            sigma.shape()
        )));
    }
    check_hermitian(rho)?;
    check_hermitian(sigma)?;
    let er = eigh(rho);
    let es = eigh(sigma);
    check_psd_eig(&er)?;
    check_psd_eig(&es)?;
    let tr_rho = tr(rho);
    if er.rank() == 0 || tr_rho <= 0.0 {
        return Err(Error::InvalidState("first argument must be nonzero".into()));
    }
    Ok(Pair {
        dominated: dominated(rho, sigma)?,
        orthogonal: orthogonal(rho, sigma)?,
        rho: er,
        sigma: es,
        tr_rho,
    })
}

/// Logarithm on the support, with kernel eigenvalues (and tiny negatives) dropped.
fn log_support(es: &EigenSystem) -> CMat {
    let t = es.threshold();
    let w: Vec<f64> = es.values.iter().map(|&l| if l > t { l.ln() } else { 0.0 }).collect();
    es.compose(&w)
}

fn positive_values(es: &EigenSystem) -> Vec<f64> {
    let t = es.threshold();
    es.values.iter().map(|&l| if l > t { l } else { 0.0 }).collect()
}

/// `tr ρ (log ρ − log σ) / tr ρ`, assuming `ρ ≪ σ`.
fn umegaki_nats(p: &Pair) -> f64 {
    let lr: f64 = positive_values(&p.rho).iter().filter(|&&l| l > 0.0).map(|&l| l * l.ln()).sum();
    let rho = p.rho.reconstruct();
    let cross = crate::linalg::tr_prod(&rho, &log_support(&p.sigma));
    (lr - cross) / p.tr_rho
}

/// `V(ρ/tr ρ ‖ σ)` in nats², assuming `ρ ≪ σ`.
fn variance_nats(p: &Pair) -> f64 {
    let rho = p.rho.reconstruct().unscale(p.tr_rho);
    let n = rho.nrows();
    // on the support of ρ, log(ρ/tr ρ) − D(ρ/tr ρ‖σ) = log ρ − D(ρ‖σ)
    let d = umegaki_nats(p);
    let mut x = log_support(&p.rho) - log_support(&p.sigma);
    for i in 0..n {
        x[(i, i)].re -= d;
    }
    let rx = &rho * &x;
    crate::linalg::tr_prod(&rx, &x).max(0.0)
}

/// `log λ_max(σ^{-1/2} ρ σ^{-1/2})` in nats, assuming `ρ ≪ σ`.
fn dmax_raw(p: &Pair) -> Raw {
    let s_inv_half = psd_power_es(&p.sigma, -0.5);
    let t = &s_inv_half * p.rho.reconstruct() * &s_inv_half;
    let lmax = eigh(&t).lambda_max();
    Raw { value: lmax.ln(), q: lmax, cond: SupportCondition::Ok }
}

fn near_one(p: &Pair, alpha: f64) -> Raw {
    let d = umegaki_nats(p);
    let value = d + 0.5 * (alpha - 1.0) * variance_nats(p);
    Raw { value, q: p.tr_rho * ((alpha - 1.0) * value).exp(), cond: SupportCondition::Ok }
}

fn from_q(q: f64, alpha: f64, tr_rho: f64, cond: SupportCondition) -> Raw {
    if q <= 0.0 {
        return Raw::infinite(q);
    }
    Raw { value: (q / tr_rho).ln() / (alpha - 1.0), q, cond }
}

fn minimal_raw(p: &Pair, alpha: f64, cond: SupportCondition) -> Raw {
    if alpha.is_infinite() {
        return dmax_raw(p);
    }
    if alpha == 1.0 {
        return Raw { value: umegaki_nats(p), q: p.tr_rho, cond };
    }
    if (alpha - 1.0).abs() < NEAR_ONE && cond == SupportCondition::Ok {
        return near_one(p, alpha);
    }
    // Q̃_α = ‖ρ^{1/2} σ^{(1−α)/2α}‖_{2α}^{2α}; at α = 1/2 this is ‖√ρ√σ‖₁.
    let c = (1.0 - alpha) / (2.0 * alpha);
    let m = psd_power_es(&p.rho, 0.5) * psd_power_es(&p.sigma, c);
    let s = singular_values(&m);
    let q: f64 = if alpha == 0.5 { s.iter().sum() } else { s.iter().map(|x| x.powf(2.0 * alpha)).sum() };
    from_q(q, alpha, p.tr_rho, cond)
}

fn petz_raw(p: &Pair, alpha: f64, cond: SupportCondition) -> Result<Raw> {
    if alpha.is_infinite() {
        return Err(Error::Range("the Petz divergence is not defined at alpha = inf".into()));
    }
    if alpha == 1.0 {
        return Ok(Raw { value: umegaki_nats(p), q: p.tr_rho, cond });
    }
    if (alpha - 1.0).abs() < NEAR_ONE && cond == SupportCondition::Ok {
        return Ok(near_one(p, alpha));
    }
    let q = if alpha == 0.0 {
        crate::linalg::tr_prod(&p.rho.support_projector(), &p.sigma.reconstruct())
    } else {
        let ra = psd_power_es(&p.rho, alpha);
        let sb = psd_power_es(&p.sigma, 1.0 - alpha);
        crate::linalg::tr_prod(&ra, &sb)
    };
    Ok(from_q(q, alpha, p.tr_rho, cond))
}

/// Classical pair `(P_i, Q_i) = (t_i w_i, w_i)` with `σ^{-1/2} ρ σ^{-1/2} =
/// Σ t_i |v_i⟩⟨v_i|` and `w_i = ⟨v_i|σ|v_i⟩`, restricted to the support of the
/// second argument. Requires the first argument to be dominated by the second.
fn geometric_pair(a: &EigenSystem, b: &EigenSystem) -> (Vec<f64>, Vec<f64>) {
    let t = b.threshold();
    let keep: Vec<usize> = (0..b.dim()).filter(|&k| b.values[k] > t).collect();
    let k = keep.len();
    let mut u = zeros(b.dim(), k);
    for (j, &i) in keep.iter().enumerate() {
        u.set_column(j, &b.vectors.column(i));
    }
    let a_mat = a.reconstruct();
    let a_s = u.adjoint() * a_mat * &u;
    let mut t_mat = a_s.clone();
    for i in 0..k {
        for j in 0..k {
            let s = (b.values[keep[i]] * b.values[keep[j]]).sqrt();
            t_mat[(i, j)] /= s;
        }
    }
    let et = eigh(&t_mat);
    let mut pp = Vec::with_capacity(k);
    let mut qq = Vec::with_capacity(k);
    for j in 0..k {
        let v = et.vectors.column(j);
        let w: f64 = (0..k).map(|i| v[i].norm_sqr() * b.values[keep[i]]).sum();
        pp.push(et.values[j].max(0.0) * w);
        qq.push(w);
    }
    (pp, qq)
}

fn maximal_raw(p: &Pair, alpha: f64, cond: SupportCondition) -> Result<Raw> {
    if p.dominated {
        let (pp, qq) = geometric_pair(&p.rho, &p.sigma);
        let mut r = classical_raw(&pp, &qq, alpha);
        // the reduction conserves tr ρ; keep the quantum value exactly
        if alpha.is_finite() && alpha != 1.0 && r.value.is_finite() && (alpha - 1.0).abs() >= NEAR_ONE {
            r = from_q(r.q, alpha, p.tr_rho, SupportCondition::Ok);
        }
        r.cond = SupportCondition::Ok;
        return Ok(r);
    }
    // α < 1 and ρ not dominated: use tr(σ #_α ρ) = tr(ρ #_{1−α} σ) when σ ≪ ρ.
    let sigma = p.sigma.reconstruct();
    let rho = p.rho.reconstruct();
    if !dominated(&sigma, &rho)? {
        return Err(Error::FunctionDomain(
            "maximal divergence for alpha < 1 needs one support to contain the other".into(),
        ));
    }
    let (pp, ww) = geometric_pair(&p.sigma, &p.rho);
    let beta = 1.0 - alpha;
    let pthr = thr(&pp);
    let q: f64 = pp
        .iter()
        .zip(&ww)
        .filter(|(&a, _)| a > pthr)
        .map(|(&a, &w)| (beta * a.ln() + alpha * w.ln()).exp())
        .sum();
    Ok(from_q(q, alpha, p.tr_rho, cond))
}

fn diagonal(m: &CMat) -> Result<Vec<f64>> {
    let n = m.nrows();
    let mut off = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                off = off.max(m[(i, j)].norm());
            }
        }
    }
    if off > crate::states::CTOL {
        return Err(Error::NotClassical { mass: off });
    }
    Ok((0..n).map(|i| m[(i, i)].re).collect())
}

fn raw_divergence(rho: &CMat, sigma: &CMat, order: RenyiOrder) -> Result<Raw> {
    let alpha = order.alpha;
    if order.family == Family::Classical {
        let p = diagonal(rho)?;
        let q = diagonal(sigma)?;
        check_classical_pair(&p, &q)?;
        return Ok(classical_raw(&p, &q, alpha));
    }
    let p = prepare(rho, sigma)?;
    if alpha >= 1.0 && !p.dominated {
        return Ok(Raw::infinite(f64::INFINITY));
    }
    if alpha < 1.0 && p.orthogonal {
        return Ok(Raw::infinite(0.0));
    }
    let cond = if p.dominated { SupportCondition::Ok } else { SupportCondition::AlphaLt1NotPerp };
    match order.family {
        Family::Umegaki => Ok(Raw { value: umegaki_nats(&p), q: p.tr_rho, cond }),
        Family::Max => Ok(dmax_raw(&p)),
        Family::Minimal => {
            if alpha == 0.0 {
                return Err(Error::Range(
                    "the minimal divergence is evaluated for alpha > 0 only".into(),
                ));
            }
            Ok(minimal_raw(&p, alpha, cond))
        }
        Family::Petz => petz_raw(&p, alpha, cond),
        Family::Maximal => maximal_raw(&p, alpha, cond),
        Family::Classical => unreachable!(),
    }
}

/// Rényi divergence of the given family and order.
pub fn renyi_divergence(rho: &CMat, sigma: &CMat, order: RenyiOrder, base: Base) -> Result<DivergenceResult> {
    let r = raw_divergence(rho, sigma, order)?;
    Ok(DivergenceResult {
        value: base.from_nats(r.value),
        q_functional: r.q,
        support_condition: r.cond,
        order,
        base,
    })
}

/// Shorthand returning only the value.
pub fn divergence(rho: &CMat, sigma: &CMat, family: Family, alpha: f64, base: Base) -> Result<f64> {
    Ok(renyi_divergence(rho, sigma, RenyiOrder::new(family, alpha)?, base)?.value)
}

/// Umegaki relative entropy `tr ρ(log ρ − log σ) / tr ρ`.
pub fn umegaki(rho: &CMat, sigma: &CMat, base: Base) -> Result<f64> {
    divergence(rho, sigma, Family::Umegaki, 1.0, base)
}

/// `D_max(ρ‖σ) = log λ_max(σ^{-1/2} ρ σ^{-1/2})`.
pub fn max_divergence(rho: &CMat, sigma: &CMat, base: Base) -> Result<f64> {
    divergence(rho, sigma, Family::Max, f64::INFINITY, base)
}

/// `V(ρ‖σ) = tr ρ (log ρ − log σ − D)²` for `ρ` rescaled to unit trace, in
/// squared base units. `+∞` when `ρ` is not dominated by `σ`.
pub fn divergence_variance(rho: &CMat, sigma: &CMat, base: Base) -> Result<f64> {
    let p = prepare(rho, sigma)?;
    if !p.dominated {
        return Ok(f64::INFINITY);
    }
    Ok(variance_nats(&p) * base.per_nat().powi(2))
}

/// Nussbaum–Szkoła distributions `P(x,y) = λ_x |⟨e_x|f_y⟩|²`,
/// `Q(x,y) = μ_y |⟨e_x|f_y⟩|²`, flattened as `x·d + y`.
pub fn nussbaum_szkola(rho: &CMat, sigma: &CMat) -> Result<(Vec<f64>, Vec<f64>)> {
    let p = prepare(rho, sigma)?;
    let d = rho.nrows();
    let lam = positive_values(&p.rho);
    let mu = positive_values(&p.sigma);
    let overlap = p.rho.vectors.adjoint() * &p.sigma.vectors;
    let mut pp = vec![0.0; d * d];
    let mut qq = vec![0.0; d * d];
    for x in 0..d {
        for y in 0..d {
            let o = overlap[(x, y)].norm_sqr();
            pp[x * d + y] = lam[x] * o;
            qq[x * d + y] = mu[y] * o;
        }
    }
    Ok((pp, qq))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PinchedDivergence {
    /// `(1/n) D_α(P_{σ^{⊗n}}(ρ^{⊗n}) ‖ σ^{⊗n})`.
    pub value: f64,
    /// `|spec(σ^{⊗n})|`.
    pub spec_size: usize,
    pub n: usize,
}

/// Classical pair of the pinched tensor power: eigenvalues of the pinched
/// blocks of `ρ^{⊗n}` against the matching eigenvalues of `σ^{⊗n}`.
pub fn pinched_distributions(rho: &CMat, sigma: &CMat, n: usize) -> Result<(Vec<f64>, Vec<f64>, usize)> {
    let p = prepare(rho, sigma)?;
    let d = rho.nrows();
    if n == 0 {
        return Err(Error::Range("number of copies must be positive".into()));
    }
    let total = (d as f64).powi(n as i32);
    if total > PINCH_CAP as f64 {
        return Err(Error::TooLarge(format!("d^n = {total} exceeds {PINCH_CAP}")));
    }
    let total = total as usize;
    // ρ in the eigenbasis of σ
    let rp = p.sigma.vectors.adjoint() * p.rho.reconstruct() * &p.sigma.vectors;
    let s = positive_values(&p.sigma);
    // clusters of σ's spectrum, so that equal eigenvalues multiply to equal products
    let gap = CLUSTER_REL * s.iter().fold(0.0f64, |a, &b| a.max(b)).max(1e-300);
    let mut rep = s.clone();
    for k in 1..d {
        if (rep[k] - rep[k - 1]).abs() <= gap {
            rep[k] = rep[k - 1];
        }
    }
    let mut prods: Vec<(f64, usize)> = (0..total)
        .map(|idx| {
            let digits = crate::linalg::multi_index(idx, &vec![d; n]);
            (digits.iter().map(|&i| rep[i]).product::<f64>(), idx)
        })
        .collect();
    prods.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let pmax = prods.last().map(|x| x.0).unwrap_or(0.0).max(1e-300);
    let pgap = CLUSTER_REL * pmax;
    let mut groups: Vec<(f64, Vec<usize>)> = Vec::new();
    for (v, idx) in prods {
        match groups.last_mut() {
            Some((gv, g)) if (v - *gv).abs() <= pgap => g.push(idx),
            _ => groups.push((v, vec![idx])),
        }
    }
    let dims = vec![d; n];
    let mut pp = Vec::with_capacity(total);
    let mut qq = Vec::with_capacity(total);
    for (sv, g) in &groups {
        let digits: Vec<Vec<usize>> = g.iter().map(|&i| crate::linalg::multi_index(i, &dims)).collect();
        let m = g.len();
        let mut b = zeros(m, m);
        for a in 0..m {
            for c in 0..m {
                let mut z = crate::linalg::cr(1.0);
                for t in 0..n {
                    z *= rp[(digits[a][t], digits[c][t])];
                }
                b[(a, c)] = z;
            }
        }
        for l in eigh(&b).values {
            pp.push(l.max(0.0));
            qq.push(*sv);
        }
    }
    Ok((pp, qq, groups.len()))
}

/// Per-copy pinched divergence `(1/n) D_α(P_{σ^{⊗n}}(ρ^{⊗n}) ‖ σ^{⊗n})`.
/// Pinching leaves `σ^{⊗n}` invariant, so by data processing the value never
/// exceeds `D̃_α` (for `α ≥ 1/2`), and it satisfies
/// `D̃_α − (2/n) log|spec(σ^{⊗n})| ≤ pinched ≤ D̃_α`.
pub fn pinched_divergence(rho: &CMat, sigma: &CMat, alpha: f64, n: usize, base: Base) -> Result<PinchedDivergence> {
    let (pp, qq, spec_size) = pinched_distributions(rho, sigma, n)?;
    let value = classical_renyi(&pp, &qq, alpha, base)? / n as f64;
    Ok(PinchedDivergence { value, spec_size, n })
}
