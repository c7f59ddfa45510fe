//! Applications: binary hypothesis testing, the tripartite entropic
//! uncertainty relation and randomness extraction with Toeplitz hashing.
//!
//! Finite-n quantities are computed exactly (dense trace norms and
//! semidefinite programs, or type-class sums when the two hypotheses commute);
//! exponents are evaluated from their single-letter formulas.

use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::divergences::{divergence, max_divergence, nussbaum_szkola, umegaki, divergence_variance, Family};
use crate::entropies::{conditional_renyi, min_entropy, Arrow, Bipartite, EntropyFamily, SdpCertificate};
use crate::error::{Error, Result};
use crate::linalg::{
    distinct_spectrum, eigh, hermitize, identity, kron, max_abs, partial_trace, tensor_power, tr, tr_prod, zeros,
    CMat, CLUSTER_REL, PTOL,
};
use crate::metrics::trace_distance;
use crate::sdpsolve::{self, AffineMap, BlockKind, Relation, SdpProblem, Sense, SolveOptions, DEFAULT_MAX_PARAMS};
use crate::smooth::{classical_smooth_min_entropy, normal_quantile, smooth_min_entropy};
use crate::states::{cq_split, measurement_channel, off_diagonal_mass, DensityOperator, Povm, CTOL};
use crate::units::Base;

/// Largest `d^n` for dense evaluation on `n` copies.
pub const DENSE_DIM_CAP: usize = 512;

/// Largest `d^n` for the non-commuting Neyman–Pearson SDP, whose Schur
/// complement grows like `(d^n)^4`.
pub const NP_SDP_DIM_CAP: usize = 32;

/// Largest number of type classes enumerated on the commuting path.
pub const TYPE_CAP: usize = 200_000;

/// Golden-section bracket width for the exponent optimizations.
const GOLDEN_TOL: f64 = 1e-10;

/// A test `0 ≤ T ≤ id` on `n` copies; `T` accepts the null hypothesis `ρ`.
#[derive(Clone, Debug, Serialize)]
pub struct HypothesisTest {
    #[serde(with = "crate::io::cmat")]
    pub effect: CMat,
    pub copies: usize,
}

impl HypothesisTest {
    pub fn new(effect: CMat, copies: usize) -> Result<Self> {
        let defect = crate::linalg::hermiticity_defect(&effect);
        if defect > crate::linalg::HTOL {
            return Err(Error::NonHermitian { defect });
        }
        let es = eigh(&effect);
        if es.lambda_min() < -PTOL {
            return Err(Error::NotPsd { min_eig: es.lambda_min() });
        }
        if es.lambda_max() > 1.0 + PTOL {
            return Err(Error::InvalidPovm(format!("test effect exceeds the identity ({})", es.lambda_max())));
        }
        Ok(HypothesisTest { effect: hermitize(&effect), copies })
    }

    /// Type-I error `tr ρ_n (id − T)`.
    pub fn alpha(&self, rho_n: &CMat) -> f64 {
        tr(rho_n) - tr_prod(rho_n, &self.effect)
    }

    /// Type-II error `tr σ_n T`.
    pub fn beta(&self, sigma_n: &CMat) -> f64 {
        tr_prod(sigma_n, &self.effect)
    }
}

/// Joint eigenvalues `(p, q)` of a commuting pair, or `None` when the pair
/// does not commute.
pub fn joint_spectrum(rho: &CMat, sigma: &CMat) -> Result<Option<(Vec<f64>, Vec<f64>)>> {
    if rho.shape() != sigma.shape() {
        return Err(Error::DimensionMismatch(format!("{:?} vs {:?}", rho.shape(), sigma.shape())));
    }
    let scale = 1.0f64.max(max_abs(rho)).max(max_abs(sigma));
    if max_abs(&(rho * sigma - sigma * rho)) > 1e-12 * scale {
        return Ok(None);
    }
    let mut p = Vec::new();
    let mut q = Vec::new();
    for (lambda, proj) in distinct_spectrum(rho, CLUSTER_REL)? {
        let es = eigh(&proj);
        let idx: Vec<usize> = (0..es.dim()).filter(|&k| es.values[k] > 0.5).collect();
        let v = CMat::from_fn(es.dim(), idx.len(), |i, j| es.vectors[(i, idx[j])]);
        let inner = eigh(&(v.adjoint() * sigma * &v));
        for &mu in &inner.values {
            p.push(lambda.max(0.0));
            q.push(mu.max(0.0));
        }
    }
    Ok(Some((p, q)))
}

/// Compositions of `n` into `d` nonnegative parts.
fn compositions(n: usize, d: usize) -> Vec<Vec<usize>> {
    fn rec(left: usize, slots: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if slots == 1 {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for k in 0..=left {
            cur.push(k);
            rec(left - k, slots - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if d > 0 {
        rec(n, d, &mut Vec::with_capacity(d), &mut out);
    }
    out
}

/// `ln C(n+d−1, d−1)`, the log of the number of types.
fn ln_type_count(n: usize, d: usize) -> f64 {
    if d == 0 {
        return 0.0;
    }
    ln_gamma((n + d) as f64) - ln_gamma((n + 1) as f64) - ln_gamma(d as f64)
}

/// One type class of `n` draws from a pair of distributions.
#[derive(Clone, Debug, Serialize)]
pub struct TypeClass {
    pub counts: Vec<usize>,
    /// Log of the number of sequences of this type.
    pub ln_size: f64,
    /// Log-probability of one sequence under each hypothesis (`−∞` if zero).
    pub ln_p: f64,
    pub ln_q: f64,
}

impl TypeClass {
    pub fn mass_p(&self) -> f64 {
        (self.ln_size + self.ln_p).exp()
    }

    pub fn mass_q(&self) -> f64 {
        (self.ln_size + self.ln_q).exp()
    }
}

fn ln_weight(p: f64, k: usize) -> f64 {
    if k == 0 {
        0.0
    } else if p <= 0.0 {
        f64::NEG_INFINITY
    } else {
        k as f64 * p.ln()
    }
}

/// All type classes of `n` draws, with the alphabet reduced to letters that
/// carry weight under either hypothesis.
pub fn type_classes(p: &[f64], q: &[f64], n: usize) -> Result<Vec<TypeClass>> {
    let keep: Vec<usize> = (0..p.len()).filter(|&i| p[i] > 0.0 || q[i] > 0.0).collect();
    let d = keep.len();
    if ln_type_count(n, d) > (TYPE_CAP as f64).ln() {
        return Err(Error::TooLarge(format!("{d} letters and n = {n} exceed {TYPE_CAP} type classes")));
    }
    let ln_n = ln_gamma((n + 1) as f64);
    Ok(compositions(n, d)
        .into_iter()
        .map(|counts| {
            let ln_size = ln_n - counts.iter().map(|&k| ln_gamma((k + 1) as f64)).sum::<f64>();
            let ln_p = counts.iter().zip(&keep).map(|(&k, &i)| ln_weight(p[i], k)).sum();
            let ln_q = counts.iter().zip(&keep).map(|(&k, &i)| ln_weight(q[i], k)).sum();
            TypeClass { counts, ln_size, ln_p, ln_q }
        })
        .collect())
}

fn check_pair(rho: &CMat, sigma: &CMat) -> Result<()> {
    for m in [rho, sigma] {
        DensityOperator::single(m.clone())?;
    }
    if rho.shape() != sigma.shape() {
        return Err(Error::DimensionMismatch(format!("{:?} vs {:?}", rho.shape(), sigma.shape())));
    }
    Ok(())
}

fn dense_dim(d: usize, n: usize) -> Result<usize> {
    let mut dim: usize = 1;
    for _ in 0..n {
        dim = dim.checked_mul(d).filter(|&x| x <= DENSE_DIM_CAP).ok_or_else(|| {
            Error::TooLarge(format!("{d}^{n} exceeds the dense cap {DENSE_DIM_CAP}"))
        })?;
    }
    Ok(dim)
}

/// Optimal average error `½(1 − Δ(ρ^{⊗n}, σ^{⊗n}))` for equal priors.
pub fn helstrom_error(rho: &CMat, sigma: &CMat, n: usize) -> Result<f64> {
    check_pair(rho, sigma)?;
    if let Some((p, q)) = joint_spectrum(rho, sigma)? {
        // ½ Σ_x min(p^n(x), q^n(x)) = ½(1 − Δ)
        let types = type_classes(&p, &q, n)?;
        let s: f64 = types.iter().map(|t| (t.ln_size + t.ln_p.min(t.ln_q)).exp()).sum();
        return Ok(0.5 * s);
    }
    dense_dim(rho.nrows(), n)?;
    let rn = tensor_power(rho, n);
    let sn = tensor_power(sigma, n);
    Ok(0.5 * (1.0 - trace_distance(&rn, &sn)?))
}

/// Optimal test on the commuting path: acceptance probability per type class.
#[derive(Clone, Debug, Serialize)]
pub struct TypeDecision {
    pub class: TypeClass,
    pub accept: f64,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TestWitness {
    Operator(HypothesisTest),
    Types(Vec<TypeDecision>),
}

#[derive(Clone, Debug, Serialize)]
pub struct NeymanPearson {
    /// `min tr ρ^{⊗n}(id − T)` subject to `tr σ^{⊗n} T ≤ ε`.
    pub alpha_star: f64,
    /// `tr σ^{⊗n} T` of the optimal test.
    pub beta: f64,
    pub epsilon: f64,
    pub copies: usize,
    pub test: TestWitness,
    pub certificate: SdpCertificate,
}

/// Neyman–Pearson problem on `n` copies, solved as a semidefinite program.
/// Commuting pairs reduce to a linear program over type classes.
pub fn neyman_pearson(rho: &CMat, sigma: &CMat, n: usize, eps: f64) -> Result<NeymanPearson> {
    check_pair(rho, sigma)?;
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::Range(format!("eps = {eps} must lie in [0, 1]")));
    }
    if let Some((p, q)) = joint_spectrum(rho, sigma)? {
        return neyman_pearson_types(&p, &q, n, eps);
    }
    let dim = dense_dim(rho.nrows(), n)?;
    if dim > NP_SDP_DIM_CAP {
        return Err(Error::TooLarge(format!(
            "{}^{n} exceeds the Neyman-Pearson SDP cap {NP_SDP_DIM_CAP} for non-commuting states",
            rho.nrows()
        )));
    }
    let rn = tensor_power(rho, n);
    let sn = tensor_power(sigma, n);
    let mut prob = SdpProblem::new(Sense::Max);
    prob.max_params = DEFAULT_MAX_PARAMS.max(2 * dim * dim);
    let t = prob.add_block("T", dim, BlockKind::Hermitian);
    let u = prob.add_block("id_minus_T", dim, BlockKind::Hermitian);
    prob.add_objective(t, rn.clone());
    prob.add_constraint(
        "beta",
        vec![(t, AffineMap::functional(&sn))],
        Relation::Le,
        identity(1).scale(eps),
    );
    prob.add_constraint(
        "operator_interval",
        vec![(t, AffineMap::identity(dim)), (u, AffineMap::identity(dim))],
        Relation::Eq,
        identity(dim),
    );
    let sol = sdpsolve::solve(&prob, &SolveOptions::tight())?.require_optimal()?;
    let effect = hermitize(&sol.primal[t]);
    let beta = tr_prod(&sn, &effect);
    Ok(NeymanPearson {
        alpha_star: (1.0 - sol.primal_value).max(0.0),
        beta,
        epsilon: eps,
        copies: n,
        test: TestWitness::Operator(HypothesisTest { effect, copies: n }),
        certificate: SdpCertificate::from_solution(&sol, 0),
    })
}

/// The commuting case: one acceptance variable `t_k ∈ [0, 1]` per type class,
/// maximize `Σ_k P_k t_k` subject to `Σ_k Q_k t_k ≤ ε`.
fn neyman_pearson_types(p: &[f64], q: &[f64], n: usize, eps: f64) -> Result<NeymanPearson> {
    let types = type_classes(p, q, n)?;
    let k = types.len();
    let pm: Vec<f64> = types.iter().map(TypeClass::mass_p).collect();
    let qm: Vec<f64> = types.iter().map(TypeClass::mass_q).collect();
    let mut prob = SdpProblem::new(Sense::Max);
    prob.max_params = DEFAULT_MAX_PARAMS.max(2 * k);
    let t = prob.add_block("t", k, BlockKind::Nonneg);
    let u = prob.add_block("one_minus_t", k, BlockKind::Nonneg);
    prob.add_objective(t, crate::linalg::diag(&pm));
    prob.add_constraint(
        "beta",
        vec![(t, AffineMap::functional(&crate::linalg::diag(&qm)))],
        Relation::Le,
        identity(1).scale(eps),
    );
    for j in 0..k {
        let pick = AffineMap::conjugation(crate::linalg::bra(k, j));
        prob.add_constraint(&format!("interval_{j}"), vec![(t, pick.clone()), (u, pick)], Relation::Eq, identity(1));
    }
    let sol = sdpsolve::solve(&prob, &SolveOptions::tight())?.require_optimal()?;
    let accept: Vec<f64> = (0..k).map(|j| sol.primal[t][(j, j)].re.clamp(0.0, 1.0)).collect();
    let beta = accept.iter().zip(&qm).map(|(a, q)| a * q).sum();
    Ok(NeymanPearson {
        alpha_star: (1.0 - sol.primal_value).max(0.0),
        beta,
        epsilon: eps,
        copies: n,
        test: TestWitness::Types(types.into_iter().zip(accept).map(|(class, accept)| TypeDecision { class, accept }).collect()),
        certificate: SdpCertificate::from_solution(&sol, 0),
    })
}

/// `log Q̄_s(ρ‖σ)` through the Nussbaum–Szkoła pair, continuous on `[0, 1]`.
struct PetzCurve {
    pairs: Vec<(f64, f64)>,
}

impl PetzCurve {
    fn new(rho: &CMat, sigma: &CMat) -> Result<Self> {
        let (p, q) = nussbaum_szkola(rho, sigma)?;
        let pairs = p.into_iter().zip(q).filter(|&(a, b)| a > 0.0 && b > 0.0).map(|(a, b)| (a.ln(), b.ln())).collect();
        Ok(PetzCurve { pairs })
    }

    /// Natural log of `Σ P^s Q^{1−s}`; `−∞` when the supports are orthogonal.
    fn ln_q(&self, s: f64) -> f64 {
        if self.pairs.is_empty() {
            return f64::NEG_INFINITY;
        }
        let terms: Vec<f64> = self.pairs.iter().map(|&(lp, lq)| s * lp + (1.0 - s) * lq).collect();
        let m = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        m + terms.iter().map(|t| (t - m).exp()).sum::<f64>().ln()
    }
}

/// Minimizer of a unimodal function on `[a, b]` by golden-section search.
fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while b - a > tol {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = f(x2);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Maximizer of `f` over `[a, b]`: a uniform grid locates the best cell, then
/// golden section refines within the neighbouring cells.
fn grid_golden_max(f: impl Fn(f64) -> f64, a: f64, b: f64, cells: usize) -> (f64, f64) {
    let h = (b - a) / cells as f64;
    let mut best = (a, f(a));
    for i in 1..=cells {
        let x = a + h * i as f64;
        let v = f(x);
        if v > best.1 {
            best = (x, v);
        }
    }
    let lo = (best.0 - h).max(a);
    let hi = (best.0 + h).min(b);
    let (x, v) = golden_min(|x| -f(x), lo, hi, GOLDEN_TOL);
    if -v > best.1 {
        (x, -v)
    } else {
        best
    }
}

/// Optimal exponent together with its optimizer.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Exponent {
    pub value: f64,
    pub base: Base,
    /// Optimal `s`.
    pub s: f64,
}

/// Chernoff distance `ξ_C = −min_{s∈[0,1]} log Q̄_s(ρ‖σ)`.
pub fn chernoff_distance(rho: &CMat, sigma: &CMat, base: Base) -> Result<Exponent> {
    check_pair(rho, sigma)?;
    let curve = PetzCurve::new(rho, sigma)?;
    if curve.pairs.is_empty() {
        return Ok(Exponent { value: f64::INFINITY, base, s: 0.5 });
    }
    let (mut s, mut v) = golden_min(|s| curve.ln_q(s), 0.0, 1.0, GOLDEN_TOL);
    for end in [0.0, 1.0] {
        let e = curve.ln_q(end);
        if e < v {
            (s, v) = (end, e);
        }
    }
    Ok(Exponent { value: base.from_nats(-v).max(0.0), base, s })
}

/// Hoeffding exponent `sup_{s∈(0,1)} (1−s)/s (D̄_s − R)` for `0 ≤ R < D(ρ‖σ)`.
pub fn hoeffding_exponent(rho: &CMat, sigma: &CMat, rate: f64, base: Base) -> Result<Exponent> {
    check_pair(rho, sigma)?;
    let d = umegaki(rho, sigma, base)?;
    if !(0.0..d).contains(&rate) {
        return Err(Error::Range(format!("rate {rate} must lie in [0, D) = [0, {d})")));
    }
    let curve = PetzCurve::new(rho, sigma)?;
    let r_nats = base.to_nats(rate);
    // (1−s)/s · (log Q̄_s/(s−1) − R) = −(log Q̄_s + (1−s)R)/s
    let f = |s: f64| -(curve.ln_q(s) + (1.0 - s) * r_nats) / s;
    let (s, v) = grid_golden_max(f, 1e-6, 1.0 - 1e-9, 400);
    Ok(Exponent { value: base.from_nats(v).max(0.0), base, s })
}

/// Strong converse exponent `sup_{s>1} (s−1)/s (R − D̃_s)` for `R > D(ρ‖σ)`,
/// evaluated in `u = 1 − 1/s ∈ (0, 1)` with the `u → 1` limit `R − D_max`.
pub fn strong_converse_exponent(rho: &CMat, sigma: &CMat, rate: f64, base: Base) -> Result<Exponent> {
    check_pair(rho, sigma)?;
    if !crate::linalg::dominated(rho, sigma)? {
        return Err(Error::Range("strong converse exponent needs supp ρ ⊆ supp σ".into()));
    }
    let d = umegaki(rho, sigma, base)?;
    if rate <= d {
        return Err(Error::Range(format!("rate {rate} must exceed D = {d}")));
    }
    let f = |u: f64| {
        let s = 1.0 / (1.0 - u);
        match divergence(rho, sigma, Family::Minimal, s, base) {
            Ok(v) => u * (rate - v),
            Err(_) => f64::NEG_INFINITY,
        }
    };
    let (u, v) = grid_golden_max(f, 1e-6, 0.999, 200);
    let limit = rate - max_divergence(rho, sigma, base)?;
    if limit > v {
        return Ok(Exponent { value: limit, base, s: f64::INFINITY });
    }
    Ok(Exponent { value: v.max(0.0), base, s: 1.0 / (1.0 - u) })
}

/// Second-order Stein reference `n·D + √(n·V)·Φ⁻¹(ε)`.
pub fn stein_second_order(rho: &CMat, sigma: &CMat, n: usize, eps: f64, base: Base) -> Result<f64> {
    check_pair(rho, sigma)?;
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Range(format!("eps = {eps} must lie in (0, 1)")));
    }
    let d = umegaki(rho, sigma, base)?;
    let v = divergence_variance(rho, sigma, base)?;
    let n = n as f64;
    let shift = if v == 0.0 { 0.0 } else { (n * v).sqrt() * normal_quantile(eps) };
    Ok(n * d + shift)
}

/// Outcome of the tripartite uncertainty relation check.
#[derive(Clone, Debug, Serialize)]
pub struct UrCheck {
    pub alpha: f64,
    pub beta: f64,
    /// `H̃↑_α(X|B) + H̃↑_β(Y|C)`.
    pub lhs: f64,
    /// `−log c` with `c = max_{x,y} |⟨φ_x|ϑ_y⟩|²`.
    pub rhs: f64,
    pub slack: f64,
    pub base: Base,
    pub h_xb: f64,
    pub h_yc: f64,
    pub overlap: f64,
}

/// `β` with `1/α + 1/β = 2`, for `α ∈ [1/2, ∞]`.
pub fn dual_order(alpha: f64) -> Result<f64> {
    if alpha.is_nan() || alpha < 0.5 {
        return Err(Error::Range(format!("alpha = {alpha} must be at least 1/2")));
    }
    Ok(if alpha.is_infinite() {
        0.5
    } else if alpha == 0.5 {
        f64::INFINITY
    } else {
        alpha / (2.0 * alpha - 1.0)
    })
}

/// Maximal overlap `max_{x,y} |⟨φ_x|ϑ_y⟩|²` of two orthonormal bases given as
/// the columns of unitaries.
pub fn basis_overlap(basis_x: &CMat, basis_y: &CMat) -> Result<f64> {
    for u in [basis_x, basis_y] {
        let d = u.nrows();
        let defect = max_abs(&(u.adjoint() * u - identity(d)));
        if u.ncols() != d || defect > 1e-10 {
            return Err(Error::BasisNotOrthonormal { defect });
        }
    }
    if basis_x.nrows() != basis_y.nrows() {
        return Err(Error::DimensionMismatch("bases act on different spaces".into()));
    }
    let g = basis_x.adjoint() * basis_y;
    Ok(g.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max))
}

/// Checks `H̃↑_α(X|B) + H̃↑_β(Y|C) ≥ −log c` for `ρ_ABC` with `A` measured in
/// the columns of `basis_x` or `basis_y`. The subsystems are taken in order.
pub fn ur_check(rho_abc: &DensityOperator, basis_x: &CMat, basis_y: &CMat, alpha: f64, base: Base) -> Result<UrCheck> {
    let dims = rho_abc.dims().to_vec();
    if dims.len() != 3 {
        return Err(Error::BadDims(format!("expected three subsystems, got {}", dims.len())));
    }
    let beta = dual_order(alpha)?;
    let c = basis_overlap(basis_x, basis_y)?;
    if basis_x.nrows() != dims[0] {
        return Err(Error::DimensionMismatch(format!("basis of size {} for A of size {}", basis_x.nrows(), dims[0])));
    }
    let measured = |u: &CMat, keep: usize| -> Result<Bipartite> {
        let ch = measurement_channel(&Povm::from_basis(u)?);
        let m = ch.apply_on(rho_abc.matrix(), &dims, 0)?;
        let two = partial_trace(&m, &dims, &[0, keep])?;
        Bipartite::new(hermitize(&two), dims[0], dims[keep])
    };
    let xb = measured(basis_x, 1)?;
    let yc = measured(basis_y, 2)?;
    let h_xb = conditional_renyi(&xb, EntropyFamily::Sandwiched, Arrow::Up, alpha, base)?.value;
    let h_yc = conditional_renyi(&yc, EntropyFamily::Sandwiched, Arrow::Up, beta, base)?.value;
    let lhs = h_xb + h_yc;
    let rhs = -base.log(c);
    Ok(UrCheck { alpha, beta, lhs, rhs, slack: lhs - rhs, base, h_xb, h_yc, overlap: c })
}

/// Toeplitz hashing `{0,1}^n → {0,1}^m`, `f_s(z) = T_s z` over GF(2) with
/// `(T_s)_{ij} = s_{i−j+n−1}` for a seed of `n + m − 1` bits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ToeplitzFamily {
    pub n_bits: usize,
    pub m_bits: usize,
}

/// Largest seed length enumerated exhaustively.
pub const MAX_SEED_BITS: usize = 20;

/// Exhaustive collision statistics of a hash family.
#[derive(Clone, Debug, Serialize)]
pub struct CollisionAudit {
    pub pairs: usize,
    pub seeds: usize,
    /// Number of colliding seeds required for probability exactly `2^{−m}`.
    pub expected: usize,
    pub min_collisions: usize,
    pub max_collisions: usize,
}

impl CollisionAudit {
    pub fn exact(&self) -> bool {
        self.min_collisions == self.expected && self.max_collisions == self.expected
    }
}

impl ToeplitzFamily {
    pub fn seed_bits(&self) -> usize {
        (self.n_bits + self.m_bits).saturating_sub(1)
    }

    pub fn seeds(&self) -> usize {
        1 << self.seed_bits()
    }

    pub fn inputs(&self) -> usize {
        1 << self.n_bits
    }

    pub fn outputs(&self) -> usize {
        1 << self.m_bits
    }

    /// Output bit `i` is the parity of row `i` of `T_s` against `z`.
    pub fn apply(&self, seed: usize, z: usize) -> usize {
        let n = self.n_bits;
        let mut out = 0;
        for i in 0..self.m_bits {
            let mut bit = 0;
            for j in 0..n {
                let s = (seed >> (i + n - 1 - j)) & 1;
                bit ^= s & (z >> j) & 1;
            }
            out |= bit << i;
        }
        out
    }

    /// Counts, for every pair `z ≠ z′`, the seeds on which they collide.
    pub fn audit(&self) -> CollisionAudit {
        let (n_in, n_seed) = (self.inputs(), self.seeds());
        let table: Vec<Vec<usize>> = (0..n_seed).map(|s| (0..n_in).map(|z| self.apply(s, z)).collect()).collect();
        let mut min_c = usize::MAX;
        let mut max_c = 0;
        let mut pairs = 0;
        for z in 0..n_in {
            for w in (z + 1)..n_in {
                let c = table.iter().filter(|row| row[z] == row[w]).count();
                min_c = min_c.min(c);
                max_c = max_c.max(c);
                pairs += 1;
            }
        }
        if pairs == 0 {
            min_c = 0;
        }
        CollisionAudit { pairs, seeds: n_seed, expected: n_seed >> self.m_bits, min_collisions: min_c, max_collisions: max_c }
    }
}

/// Builds the Toeplitz family and audits two-universality exhaustively.
pub fn toeplitz_family(n_bits: usize, m_bits: usize) -> Result<(ToeplitzFamily, CollisionAudit)> {
    if n_bits == 0 || m_bits > n_bits {
        return Err(Error::Range(format!("need 0 ≤ m ≤ n and n ≥ 1, got n = {n_bits}, m = {m_bits}")));
    }
    let fam = ToeplitzFamily { n_bits, m_bits };
    if fam.seed_bits() > MAX_SEED_BITS {
        return Err(Error::TooLarge(format!("seed of {} bits exceeds {MAX_SEED_BITS}", fam.seed_bits())));
    }
    let audit = fam.audit();
    if !audit.exact() {
        return Err(Error::InvalidState(format!(
            "family is not two-universal: {}..{} collisions, expected {}",
            audit.min_collisions, audit.max_collisions, audit.expected
        )));
    }
    Ok((fam, audit))
}

/// Largest side-information dimension for extraction.
pub const MAX_E_DIM: usize = 8;

/// Largest joint dimension `|F|·ℓ·d_E` for the explicit joint-state path.
pub const JOINT_DIM_CAP: usize = 1024;

/// A cq source `ρ_ZE` with `Z` of `n_bits` bits, hashed to `m_bits` bits.
#[derive(Clone, Debug, Serialize)]
pub struct ExtractorInstance {
    pub family: ToeplitzFamily,
    pub weights: Vec<f64>,
    #[serde(with = "crate::io::cmat_vec")]
    pub conditionals: Vec<CMat>,
    #[serde(with = "crate::io::cmat")]
    pub source: CMat,
}

impl ExtractorInstance {
    /// `source` has two subsystems, the first classical of size `2^n_bits`.
    pub fn new(source: &DensityOperator, m_bits: usize) -> Result<Self> {
        if source.dims().len() != 2 {
            return Err(Error::BadDims("source must be bipartite Z⊗E".into()));
        }
        let dz = source.dims()[0];
        let de = source.dims()[1];
        if !dz.is_power_of_two() || dz < 2 {
            return Err(Error::BadDims(format!("Z has dimension {dz}, not a power of two")));
        }
        if de > MAX_E_DIM {
            return Err(Error::TooLarge(format!("E of dimension {de} exceeds {MAX_E_DIM}")));
        }
        if !source.is_normalized() {
            return Err(Error::InvalidState("source must be normalized".into()));
        }
        let label = source.labels()[0].clone();
        let (weights, conditionals) = cq_split(source, &label)?;
        let (family, _) = toeplitz_family(dz.trailing_zeros() as usize, m_bits)?;
        Ok(ExtractorInstance { family, weights, conditionals, source: source.matrix().clone() })
    }

    pub fn e_dim(&self) -> usize {
        self.conditionals[0].nrows()
    }

    pub fn rho_e(&self) -> CMat {
        let de = self.e_dim();
        self.weights.iter().zip(&self.conditionals).fold(zeros(de, de), |acc, (w, c)| acc + c.scale(*w))
    }

    /// Blocks `ω_s = Σ_{z: f(z)=s} p_z ρ_E(z)` of `ρ̂_SE(f)` for one seed.
    fn output_blocks(&self, seed: usize) -> Vec<CMat> {
        let de = self.e_dim();
        let mut blocks = vec![zeros(de, de); self.family.outputs()];
        for (z, (w, c)) in self.weights.iter().zip(&self.conditionals).enumerate() {
            blocks[self.family.apply(seed, z)] += c.scale(*w);
        }
        blocks
    }

    /// `ρ̂_SE(f)` as a dense matrix on `S⊗E`.
    pub fn hashed_state(&self, seed: usize) -> CMat {
        let de = self.e_dim();
        let l = self.family.outputs();
        let mut m = zeros(l * de, l * de);
        for (s, b) in self.output_blocks(seed).iter().enumerate() {
            m.view_mut((s * de, s * de), (de, de)).copy_from(b);
        }
        m
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ExtractorReport {
    /// `Δ(S|EF) = Σ_f τ(f) Δ(ρ̂_SE(f), π_S ⊗ ρ_E)` with uniform `τ`.
    pub delta: f64,
    pub per_seed: Vec<f64>,
    /// `Δ(ρ_SEF, π_S ⊗ ρ_E ⊗ ρ_F)` of the explicit joint state, when small
    /// enough to build.
    pub joint_delta: Option<f64>,
    pub base: Base,
    /// `H̄↑_2(Z|E)`.
    pub h2: f64,
    pub h_min: f64,
    /// `exp(½(log ℓ − H̄↑_2))`.
    pub collision_bound: f64,
    /// `exp(½(log ℓ − H_min))`.
    pub min_entropy_bound: f64,
}

impl ExtractorReport {
    /// `collision_bound − delta`.
    pub fn margin(&self) -> f64 {
        self.collision_bound - self.delta
    }
}

/// Exact distance from uniform of the hashed output, by enumeration of all
/// seeds, with the leftover-hash bounds.
pub fn extractor_delta(inst: &ExtractorInstance, base: Base) -> Result<ExtractorReport> {
    let fam = inst.family;
    let de = inst.e_dim();
    let l = fam.outputs();
    let rho_e = inst.rho_e();
    let target_block = rho_e.unscale(l as f64);
    let mut per_seed = Vec::with_capacity(fam.seeds());
    for seed in 0..fam.seeds() {
        let mut d = 0.0;
        for b in inst.output_blocks(seed) {
            d += crate::metrics::schatten_norm(&(b - &target_block), 1.0)?;
        }
        per_seed.push(0.5 * d);
    }
    let delta = per_seed.iter().sum::<f64>() / fam.seeds() as f64;

    let joint_dim = fam.seeds() * l * de;
    let joint_delta = if joint_dim <= JOINT_DIM_CAP {
        let tau = 1.0 / fam.seeds() as f64;
        let block = l * de;
        let mut joint = zeros(joint_dim, joint_dim);
        for seed in 0..fam.seeds() {
            joint.view_mut((seed * block, seed * block), (block, block)).copy_from(&inst.hashed_state(seed).scale(tau));
        }
        let pi_s = identity(l).unscale(l as f64);
        let rho_f = identity(fam.seeds()).scale(tau);
        let ideal = kron(&rho_f, &kron(&pi_s, &rho_e));
        Some(trace_distance(&joint, &ideal)?)
    } else {
        None
    };

    let bp = Bipartite::new(inst.source.clone(), fam.inputs(), de)?;
    let h2 = conditional_renyi(&bp, EntropyFamily::Petz, Arrow::Up, 2.0, base)?.value;
    let h_min = min_entropy(&bp, base)?.value;
    let log_l = base.log(l as f64);
    Ok(ExtractorReport {
        delta,
        per_seed,
        joint_delta,
        base,
        h2,
        h_min,
        collision_bound: base.exp(0.5 * (log_l - h2)),
        min_entropy_bound: base.exp(0.5 * (log_l - h_min)),
    })
}

/// Bracket on the number of extractable bits.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ExtractableLength {
    /// `H_min^{(ε−δ)/2}(Z|E) − 2 log(1/δ)`.
    pub lower: f64,
    /// `H_min^{√(2ε−ε²)}(Z|E)`.
    pub upper: f64,
    pub base: Base,
}

fn smooth_min_cq(bp: &Bipartite, eps: f64, base: Base) -> Result<f64> {
    if bp.db == 1 {
        let p: Vec<f64> = (0..bp.da).map(|i| bp.rho[(i, i)].re).collect();
        return classical_smooth_min_entropy(&p, eps, base);
    }
    Ok(smooth_min_entropy(bp, eps, base)?.value)
}

/// Bounds on the extractable length at distance `ε` from a cq source.
pub fn extractable_length(rho_ze: &Bipartite, eps: f64, delta: f64, base: Base) -> Result<ExtractableLength> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Range(format!("eps = {eps} must lie in (0, 1)")));
    }
    if !(delta > 0.0 && delta < eps) {
        return Err(Error::Range(format!("delta = {delta} must lie in (0, eps)")));
    }
    let mass = off_diagonal_mass(&rho_ze.rho, &[rho_ze.da, rho_ze.db], 0);
    if mass > CTOL {
        return Err(Error::NotClassical { mass });
    }
    let lower = smooth_min_cq(rho_ze, 0.5 * (eps - delta), base)? - 2.0 * base.log(1.0 / delta);
    let upper = smooth_min_cq(rho_ze, (2.0 * eps - eps * eps).sqrt(), base)?;
    if lower > upper + 1e-9 {
        return Err(Error::InvalidState(format!("inverted bracket: {lower} > {upper}")));
    }
    Ok(ExtractableLength { lower, upper, base })
}
