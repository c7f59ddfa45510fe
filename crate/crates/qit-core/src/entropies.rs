//! Conditional Rényi entropies, conditional von Neumann entropy, min- and
//! max-entropy programs and the guessing probability.
//!
//! The four families are `H_α(A|B) = −D_α(ρ_AB ‖ I_A ⊗ σ_B)` with the Petz or
//! sandwiched (minimal) divergence, and `σ_B = ρ_B` (down arrow) or optimized
//! over states (up arrow).

use std::str::FromStr;

use serde::Serialize;

use crate::divergences::{renyi_divergence, Family, RenyiOrder};
use crate::error::{Error, Result};
use crate::linalg::{
    c, eigh, hermitize, identity, kron, partial_trace, psd_power_es, tr, zeros, CMat, EigenSystem, Sampler,
};
use crate::sdpsolve::{self, AffineMap, BlockKind, Relation, SdpProblem, SdpSolution, Sense, SolveOptions};
use crate::states::{cq_split, DensityOperator, TTOL};
use crate::units::Base;

/// A matrix on `A⊗B` together with the two dimensions.
#[derive(Clone, Debug)]
pub struct Bipartite {
    pub rho: CMat,
    pub da: usize,
    pub db: usize,
}

impl Bipartite {
    pub fn new(rho: CMat, da: usize, db: usize) -> Result<Self> {
        if rho.nrows() != da * db || rho.ncols() != da * db || da == 0 || db == 0 {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix for dimensions {da}·{db}",
                rho.nrows(),
                rho.ncols()
            )));
        }
        crate::linalg::check_hermitian(&rho)?;
        crate::linalg::check_psd_eig(&eigh(&rho))?;
        Ok(Bipartite { rho, da, db })
    }

    /// Cut of a labelled state; subsystems outside `a ∪ b` are traced out.
    pub fn from_state(rho: &DensityOperator, a: &[&str], b: &[&str]) -> Result<Self> {
        let (m, da, db) = rho.bipartite(a, b)?;
        Ok(Bipartite { rho: m, da, db })
    }

    pub fn rho_b(&self) -> CMat {
        partial_trace(&self.rho, &[self.da, self.db], &[1]).expect("dims checked")
    }

    pub fn rho_a(&self) -> CMat {
        partial_trace(&self.rho, &[self.da, self.db], &[0]).expect("dims checked")
    }

    pub fn trace(&self) -> f64 {
        tr(&self.rho)
    }

    fn require_normalized(&self) -> Result<()> {
        let t = self.trace();
        if (t - 1.0).abs() > TTOL {
            return Err(Error::InvalidState(format!("expected a normalized state, trace is {t}")));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EntropyFamily {
    Petz,
    Sandwiched,
}

impl EntropyFamily {
    pub fn name(self) -> &'static str {
        match self {
            EntropyFamily::Petz => "petz",
            EntropyFamily::Sandwiched => "sandwiched",
        }
    }

    fn divergence(self) -> Family {
        match self {
            EntropyFamily::Petz => Family::Petz,
            EntropyFamily::Sandwiched => Family::Minimal,
        }
    }
}

impl FromStr for EntropyFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "petz" => Ok(EntropyFamily::Petz),
            "sandwiched" | "minimal" => Ok(EntropyFamily::Sandwiched),
            _ => Err(Error::Parse(format!("unknown entropy family '{s}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Arrow {
    Up,
    Down,
}

impl Arrow {
    pub fn name(self) -> &'static str {
        match self {
            Arrow::Up => "up",
            Arrow::Down => "down",
        }
    }
}

impl FromStr for Arrow {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "up" => Ok(Arrow::Up),
            "down" => Ok(Arrow::Down),
            _ => Err(Error::Parse(format!("unknown arrow '{s}' (expected up or down)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    Sdp,
    Iterative,
}

/// Summary of an SDP solve backing a reported value.
#[derive(Clone, Debug, Serialize)]
pub struct SdpCertificate {
    pub status: String,
    pub primal_value: f64,
    pub dual_value: f64,
    pub duality_gap: f64,
    pub relative_gap: f64,
    pub iterations: usize,
    /// Dual operator of the defining constraint.
    #[serde(with = "crate::io::cmat_opt")]
    pub dual_witness: Option<CMat>,
}

impl SdpCertificate {
    pub(crate) fn from_solution(sol: &SdpSolution, constraint: usize) -> Self {
        SdpCertificate {
            status: sol.status.name().into(),
            primal_value: sol.primal_value,
            dual_value: sol.dual_value,
            duality_gap: sol.duality_gap,
            relative_gap: sol.relative_gap,
            iterations: sol.iterations,
            dual_witness: sol.dual.get(constraint).cloned(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EntropyResult {
    pub value: f64,
    pub base: Base,
    pub family: EntropyFamily,
    pub arrow: Arrow,
    pub alpha: f64,
    pub method: Method,
    /// Optimal (or evaluated) `σ_B`; re-evaluating the divergence against it
    /// reproduces `value` up to the reported residual.
    #[serde(with = "crate::io::cmat_opt")]
    pub sigma_b: Option<CMat>,
    pub certificate: Option<SdpCertificate>,
    /// Certified bound on the distance to the optimum (iterative path).
    pub residual: Option<f64>,
    /// Largest disagreement between restarts of the iterative path.
    pub restart_spread: Option<f64>,
}

impl EntropyResult {
    fn closed(value: f64, base: Base, family: EntropyFamily, arrow: Arrow, alpha: f64, sigma_b: Option<CMat>) -> Self {
        EntropyResult {
            value,
            base,
            family,
            arrow,
            alpha,
            method: Method::ClosedForm,
            sigma_b,
            certificate: None,
            residual: None,
            restart_spread: None,
        }
    }

    /// `true` when the iterative restarts disagree beyond `1e−6` in the base.
    pub fn restarts_disagree(&self) -> bool {
        self.restart_spread.is_some_and(|s| s > 1e-6)
    }
}

/// `−Σ λ log λ` over the positive entries.
fn shannon_nats(values: &[f64]) -> f64 {
    let t = crate::linalg::KERNEL_REL * values.iter().fold(0.0f64, |a, &b| a.max(b));
    values.iter().filter(|&&l| l > t).map(|&l| -l * l.ln()).sum()
}

/// Rényi entropy `log(Σ p^α)/(1 − α)` of a normalized weight vector, with the
/// limits `α ∈ {0, 1, ∞}`.
pub fn renyi_entropy(p: &[f64], alpha: f64, base: Base) -> Result<f64> {
    if alpha.is_nan() || alpha < 0.0 {
        return Err(Error::Range(format!("alpha = {alpha} must be nonnegative")));
    }
    let t = crate::linalg::KERNEL_REL * p.iter().fold(0.0f64, |a, &b| a.max(b));
    let pos = || p.iter().copied().filter(move |&x| x > t);
    let nats = if alpha == 0.0 {
        (pos().count() as f64).ln()
    } else if alpha == 1.0 {
        shannon_nats(p)
    } else if alpha.is_infinite() {
        -pos().fold(0.0f64, f64::max).ln()
    } else {
        let s: f64 = pos().map(|x| (alpha * x.ln()).exp()).sum();
        s.ln() / (1.0 - alpha)
    };
    Ok(base.from_nats(nats))
}

/// von Neumann entropy of a density matrix.
pub fn entropy(rho: &CMat, base: Base) -> f64 {
    base.from_nats(shannon_nats(&eigh(rho).values))
}

/// `H(A|B) = H(AB) − H(B)`.
pub fn von_neumann(bp: &Bipartite, base: Base) -> Result<f64> {
    bp.require_normalized()?;
    Ok(entropy(&bp.rho, base) - entropy(&bp.rho_b(), base))
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_nan() || alpha < 0.0 {
        return Err(Error::Range(format!("alpha = {alpha} must be nonnegative")));
    }
    Ok(())
}

/// Conditional Rényi entropy of the requested family, arrow and order.
pub fn conditional_renyi(
    bp: &Bipartite,
    family: EntropyFamily,
    arrow: Arrow,
    alpha: f64,
    base: Base,
) -> Result<EntropyResult> {
    check_alpha(alpha)?;
    bp.require_normalized()?;
    if family == EntropyFamily::Sandwiched && alpha == 0.0 {
        return Err(Error::Range("sandwiched entropies are evaluated for alpha > 0".into()));
    }
    if family == EntropyFamily::Petz && alpha.is_infinite() {
        return Err(Error::Range("Petz entropies are evaluated for finite alpha".into()));
    }
    if bp.db == 1 {
        let v = renyi_entropy(&eigh(&bp.rho).values, alpha, base)?;
        return Ok(EntropyResult::closed(v, base, family, arrow, alpha, Some(identity(1))));
    }
    if alpha == 1.0 {
        let v = von_neumann(bp, base)?;
        return Ok(EntropyResult::closed(v, base, family, arrow, alpha, Some(bp.rho_b())));
    }
    match (family, arrow) {
        (_, Arrow::Down) => {
            let rho_b = bp.rho_b();
            let sigma = kron(&identity(bp.da), &rho_b);
            let d = renyi_divergence(&bp.rho, &sigma, RenyiOrder::new(family.divergence(), alpha)?, base)?;
            Ok(EntropyResult::closed(-d.value, base, family, arrow, alpha, Some(rho_b)))
        }
        (EntropyFamily::Petz, Arrow::Up) => petz_up(bp, alpha, base),
        (EntropyFamily::Sandwiched, Arrow::Up) => {
            if alpha.is_infinite() {
                min_entropy(bp, base)
            } else if alpha == 0.5 {
                max_entropy(bp, base)
            } else {
                sandwiched_up(bp, alpha, base, &IterOptions::default())
            }
        }
    }
}

/// `(α/(1−α)) log tr((tr_A ρ^α)^{1/α})` with optimizer
/// `σ*_B ∝ (tr_A ρ^α)^{1/α}`; at `α = 0` the limit `log λ_max(tr_A Π_ρ)`.
fn petz_up(bp: &Bipartite, alpha: f64, base: Base) -> Result<EntropyResult> {
    let es = eigh(&bp.rho);
    let dims = [bp.da, bp.db];
    if alpha == 0.0 {
        let x = partial_trace(&es.support_projector(), &dims, &[1])?;
        let lmax = eigh(&x).lambda_max();
        return Ok(EntropyResult::closed(
            base.log(lmax),
            base,
            EntropyFamily::Petz,
            Arrow::Up,
            alpha,
            None,
        ));
    }
    let x = partial_trace(&psd_power_es(&es, alpha), &dims, &[1])?;
    let opt = psd_power_es(&eigh(&x), 1.0 / alpha);
    let t = tr(&opt);
    let value = alpha / (1.0 - alpha) * base.log(t);
    Ok(EntropyResult::closed(value, base, EntropyFamily::Petz, Arrow::Up, alpha, Some(opt.unscale(t))))
}

/// Min-entropy `−log min{tr σ_B : I_A ⊗ σ_B ⪰ ρ_AB}`; subnormalized input allowed.
pub fn min_entropy(bp: &Bipartite, base: Base) -> Result<EntropyResult> {
    let mut p = SdpProblem::new(Sense::Min);
    let s = p.add_block("sigma_B", bp.db, BlockKind::Hermitian);
    p.add_objective(s, identity(bp.db));
    p.add_constraint("dominance", vec![(s, AffineMap::embed_right(bp.da, bp.db))], Relation::Ge, bp.rho.clone());
    let sol = sdpsolve::solve(&p, &SolveOptions::tight())?.require_optimal()?;
    Ok(EntropyResult {
        value: -base.log(sol.primal_value),
        base,
        family: EntropyFamily::Sandwiched,
        arrow: Arrow::Up,
        alpha: f64::INFINITY,
        method: Method::Sdp,
        sigma_b: Some(hermitize(&sol.primal[0])),
        certificate: Some(SdpCertificate::from_solution(&sol, 0)),
        residual: None,
        restart_spread: None,
    })
}

/// Support isometry (columns) and positive eigenvalues of a PSD matrix.
pub(crate) fn support_part(es: &EigenSystem) -> (CMat, Vec<f64>) {
    let t = es.threshold();
    let idx: Vec<usize> = (0..es.dim()).filter(|&k| es.values[k] > t).collect();
    let n = es.dim();
    let v = CMat::from_fn(n, idx.len(), |i, j| es.vectors[(i, idx[j])]);
    (v, idx.iter().map(|&k| es.values[k]).collect())
}

/// Max-entropy `log max_σ F(ρ_AB, I_A ⊗ σ_B)` through the fidelity program
/// `max Re tr Z` over `[[Λ, Z], [Z†, V†(I⊗σ)V]] ⪰ 0`, where `ρ = VΛV†` is the
/// support decomposition. Subnormalized input allowed.
pub fn max_entropy(bp: &Bipartite, base: Base) -> Result<EntropyResult> {
    let (v, lam) = support_part(&eigh(&bp.rho));
    let r = lam.len();
    if r == 0 {
        return Err(Error::InvalidState("zero operator".into()));
    }
    let mut p = SdpProblem::new(Sense::Max);
    let m = p.add_block("M", 2 * r, BlockKind::Hermitian);
    let s = p.add_block("sigma_B", bp.db, BlockKind::Hermitian);
    let mut cost = zeros(2 * r, 2 * r);
    for k in 0..r {
        cost[(k, r + k)] = c(0.5, 0.0);
        cost[(r + k, k)] = c(0.5, 0.0);
    }
    p.add_objective(m, cost);
    let top = CMat::from_fn(r, 2 * r, |i, j| if i == j { c(1.0, 0.0) } else { c(0.0, 0.0) });
    let bottom = CMat::from_fn(r, 2 * r, |i, j| if j == r + i { c(1.0, 0.0) } else { c(0.0, 0.0) });
    p.add_constraint("rho", vec![(m, AffineMap::conjugation(top))], Relation::Eq, crate::linalg::diag(&lam));
    let compress = AffineMap::conjugation(v.adjoint()).after(&AffineMap::embed_right(bp.da, bp.db))?;
    p.add_constraint(
        "sigma",
        vec![(m, AffineMap::conjugation(bottom)), (s, compress.scaled(-1.0))],
        Relation::Eq,
        zeros(r, r),
    );
    p.add_constraint("normalization", vec![(s, AffineMap::trace(bp.db))], Relation::Eq, identity(1));
    let sol = sdpsolve::solve(&p, &SolveOptions::tight())?.require_optimal()?;
    let root_f = sol.primal_value;
    if root_f <= 0.0 {
        return Err(Error::Solver { status: "optimal".into(), detail: "nonpositive fidelity".into() });
    }
    Ok(EntropyResult {
        value: 2.0 * base.log(root_f),
        base,
        family: EntropyFamily::Sandwiched,
        arrow: Arrow::Up,
        alpha: 0.5,
        method: Method::Sdp,
        sigma_b: Some(hermitize(&sol.primal[1])),
        certificate: Some(SdpCertificate::from_solution(&sol, 1)),
        residual: None,
        restart_spread: None,
    })
}

/// Optimal guessing probability of a classical register and the measurement
/// achieving it.
#[derive(Clone, Debug, Serialize)]
pub struct Guessing {
    pub p_guess: f64,
    /// One effect on the side-information space per value of the register.
    #[serde(with = "crate::io::cmat_vec")]
    pub povm: Vec<CMat>,
    pub certificate: SdpCertificate,
}

/// `p_guess(X|B) = exp(−H_min(X|B))` for the classical subsystem `x` of
/// `rho`; every other subsystem is side information. The measurement is read
/// off the diagonal blocks of the dual witness.
pub fn guessing_probability(rho: &DensityOperator, x: &str) -> Result<Guessing> {
    cq_split(rho, x)?;
    let others: Vec<&str> = rho.labels().iter().map(String::as_str).filter(|l| *l != x).collect();
    let bp = Bipartite::from_state(rho, &[x], &others)?;
    let res = min_entropy(&bp, Base::E)?;
    let cert = res.certificate.expect("sdp path");
    let y = cert.dual_witness.clone().expect("dual witness");
    let db = bp.db;
    let mut povm: Vec<CMat> = (0..bp.da)
        .map(|k| hermitize(&y.view((k * db, k * db), (db, db)).into_owned()))
        .collect();
    let total = povm.iter().fold(zeros(db, db), |acc, e| acc + e);
    let rest = identity(db) - total;
    povm[0] += hermitize(&rest);
    Ok(Guessing { p_guess: cert.primal_value, povm, certificate: cert })
}

/// Settings for the iterative sandwiched up-arrow solver.
#[derive(Clone, Copy, Debug)]
pub struct IterOptions {
    pub restarts: usize,
    /// Target on the Frank–Wolfe gap (nats).
    pub tol: f64,
    /// Largest residual accepted before reporting non-convergence (nats).
    pub accept: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for IterOptions {
    fn default() -> Self {
        IterOptions { restarts: 5, tol: 1e-11, accept: 1e-6, max_iter: 400, seed: 0x5eed }
    }
}

/// `σ ↦ D̃_α(ρ ‖ I ⊗ σ)` in nats for normalized `ρ` on `A⊗B'` with `B'` the
/// support of `ρ_B`.
struct UpObjective {
    rho_half: CMat,
    da: usize,
    r: usize,
    alpha: f64,
}

/// A point `σ = exp(L)/tr exp(L)`, stored through the common eigenbasis.
struct Point {
    /// Eigenvalues of `L` (shifted so the largest is 0).
    l: Vec<f64>,
    /// Eigenvalues of `σ`.
    w: Vec<f64>,
    u: CMat,
    f: f64,
    /// Gradient of `f` with respect to `σ`.
    grad: CMat,
}

impl Point {
    fn sigma(&self) -> CMat {
        compose(&self.u, &self.w)
    }

    fn log(&self) -> CMat {
        compose(&self.u, &self.l)
    }

    /// `tr(σ G) − λ_min(G)`, an upper bound on `f − f*` when `f` is convex.
    fn fw_gap(&self) -> f64 {
        let lin: f64 = crate::linalg::tr_prod(&self.sigma(), &self.grad);
        lin - eigh(&self.grad).lambda_min()
    }

    /// Gradient with respect to `L`, in `L`'s eigenbasis.
    fn grad_log(&self) -> CMat {
        let r = self.w.len();
        let gp = self.u.adjoint() * &self.grad * &self.u;
        let mean: f64 = (0..r).map(|k| self.w[k] * gp[(k, k)].re).sum();
        let mut out = zeros(r, r);
        for k in 0..r {
            for j in 0..r {
                let dd = divided(self.l[k], self.l[j], self.w[k], self.w[j]);
                let mut g = gp[(k, j)];
                if k == j {
                    g -= c(mean, 0.0);
                }
                out[(k, j)] = g * dd;
            }
        }
        hermitize(&(&self.u * out * self.u.adjoint()))
    }
}

/// Divided difference of `exp` at `(a, b)` given `e^a`, `e^b` (normalized).
fn divided(a: f64, b: f64, ea: f64, eb: f64) -> f64 {
    let d = a - b;
    if d.abs() < 1e-9 {
        0.5 * (ea + eb)
    } else {
        (ea - eb) / d
    }
}

fn compose(u: &CMat, w: &[f64]) -> CMat {
    let mut s = u.clone();
    for (k, wk) in w.iter().enumerate() {
        s.column_mut(k).scale_mut(*wk);
    }
    hermitize(&(s * u.adjoint()))
}

impl UpObjective {
    fn at_log(&self, l: &CMat) -> Option<Point> {
        let es = eigh(l);
        let top = es.lambda_max();
        let l: Vec<f64> = es.values.iter().map(|x| x - top).collect();
        let e: Vec<f64> = l.iter().map(|x| x.exp()).collect();
        let z: f64 = e.iter().sum();
        let w: Vec<f64> = e.iter().map(|x| x / z).collect();
        let u = es.vectors;
        let (f, grad) = self.eval(&u, &w)?;
        Some(Point { l, w, u, f, grad })
    }

    fn eval(&self, u: &CMat, w: &[f64]) -> Option<(f64, CMat)> {
        let alpha = self.alpha;
        let cexp = (1.0 - alpha) / alpha;
        if w.iter().any(|&x| x <= 0.0) {
            return None;
        }
        let wc: Vec<f64> = w.iter().map(|x| x.powf(cexp)).collect();
        let om = kron(&identity(self.da), &compose(u, &wc));
        let a = hermitize(&(&self.rho_half * om * &self.rho_half));
        let ea = eigh(&a);
        let t = ea.threshold();
        let q: f64 = ea.values.iter().filter(|&&x| x > t).map(|x| x.powf(alpha)).sum();
        if !(q > 0.0) || !q.is_finite() {
            return None;
        }
        let f = q.ln() / (alpha - 1.0);
        let apow = psd_power_es(&ea, alpha - 1.0);
        let k = &self.rho_half * apow * &self.rho_half;
        let tb = partial_trace(&k, &[self.da, self.r], &[1]).ok()?;
        let tp = u.adjoint() * tb * u;
        let r = self.r;
        let mut gp = zeros(r, r);
        for i in 0..r {
            for j in 0..r {
                let dd = if (w[i] - w[j]).abs() <= 1e-10 * w[i].max(w[j]) {
                    cexp * (0.5 * (w[i] + w[j])).powf(cexp - 1.0)
                } else {
                    (wc[i] - wc[j]) / (w[i] - w[j])
                };
                gp[(i, j)] = tp[(i, j)] * dd;
            }
        }
        let scale = alpha / (q * (alpha - 1.0));
        let grad = hermitize(&(u * gp * u.adjoint()).scale(scale));
        Some((f, grad))
    }

    /// Suboptimality bound in nats from the Frank–Wolfe gap of `f`. For
    /// `α > 1` convexity holds for `Q = exp((α−1) f)` rather than for `f`.
    fn certified(&self, pt: &Point) -> f64 {
        let gap = pt.fw_gap().max(0.0);
        if self.alpha > 1.0 {
            let gq = (self.alpha - 1.0) * gap;
            if gq >= 1.0 {
                return f64::INFINITY;
            }
            -(1.0 - gq).ln() / (self.alpha - 1.0)
        } else {
            gap
        }
    }

    fn solve_from(&self, start: &CMat, opts: &IterOptions) -> Option<(Point, f64)> {
        let mut pt = self.at_log(start)?;
        // mirror descent until the gap is moderate
        let mut eta = 1.0;
        for _ in 0..opts.max_iter {
            if pt.fw_gap() <= 1e-6 {
                break;
            }
            let mut accepted = false;
            for _ in 0..40 {
                let trial = pt.log() - pt.grad.scale(eta);
                if let Some(np) = self.at_log(&trial) {
                    let dec = crate::linalg::tr_prod(&pt.grad, &(np.sigma() - pt.sigma()));
                    if np.f <= pt.f + 1e-4 * dec {
                        pt = np;
                        accepted = true;
                        eta *= 1.5;
                        break;
                    }
                }
                eta *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        let pt = self.bfgs(pt, opts);
        let res = self.certified(&pt);
        Some((pt, res))
    }

    /// Quasi-Newton polish in the real coordinates of `L`.
    fn bfgs(&self, mut pt: Point, opts: &IterOptions) -> Point {
        let r = self.r;
        let n = r * r;
        let mut x = coords(&pt.log());
        let mut g = coords(&pt.grad_log());
        let mut h = nalgebra::DMatrix::<f64>::identity(n, n);
        for _ in 0..opts.max_iter {
            if self.certified(&pt) <= opts.tol {
                break;
            }
            let gv = nalgebra::DVector::from_vec(g.clone());
            let mut d = -(&h * &gv);
            let mut slope = d.dot(&gv);
            if slope >= 0.0 {
                h = nalgebra::DMatrix::identity(n, n);
                d = -gv.clone();
                slope = d.dot(&gv);
            }
            if slope.abs() < 1e-300 {
                break;
            }
            let gnorm = gv.norm();
            let mut t = 1.0;
            let mut next = None;
            for _ in 0..60 {
                let xt: Vec<f64> = x.iter().zip(d.iter()).map(|(a, b)| a + t * b).collect();
                if let Some(np) = self.at_log(&from_coords(&xt, r)) {
                    // near the optimum f changes below rounding; accept on the gradient instead
                    let flat = np.f <= pt.f + 1e-14 * pt.f.abs().max(1.0);
                    let gn = coords(&np.grad_log());
                    let gn_norm = gn.iter().map(|v| v * v).sum::<f64>().sqrt();
                    if np.f <= pt.f + 1e-4 * t * slope || (flat && gn_norm < gnorm) {
                        next = Some((xt, np, gn));
                        break;
                    }
                }
                t *= 0.5;
            }
            let Some((xn, np, gn)) = next else { break };
            let s = nalgebra::DVector::from_iterator(n, xn.iter().zip(&x).map(|(a, b)| a - b));
            let y = nalgebra::DVector::from_iterator(n, gn.iter().zip(&g).map(|(a, b)| a - b));
            let sy = s.dot(&y);
            if sy > 1e-300 {
                let rho = 1.0 / sy;
                let hy = &h * &y;
                let yhy = y.dot(&hy);
                h += (&s * s.transpose()) * (rho * rho * yhy + rho) - (&hy * s.transpose() + &s * hy.transpose()) * rho;
            }
            let step = s.norm();
            x = xn;
            g = gn;
            pt = np;
            if step < 1e-15 {
                break;
            }
        }
        pt
    }
}

/// Orthonormal real coordinates of a Hermitian matrix.
fn coords(m: &CMat) -> Vec<f64> {
    let d = m.nrows();
    let s2 = std::f64::consts::SQRT_2;
    let mut out = Vec::with_capacity(d * d);
    for j in 0..d {
        out.push(m[(j, j)].re);
    }
    for j in 0..d {
        for k in (j + 1)..d {
            out.push(s2 * m[(j, k)].re);
            out.push(s2 * m[(j, k)].im);
        }
    }
    out
}

fn from_coords(x: &[f64], d: usize) -> CMat {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut m = zeros(d, d);
    for j in 0..d {
        m[(j, j)] = c(x[j], 0.0);
    }
    let mut p = d;
    for j in 0..d {
        for k in (j + 1)..d {
            let z = c(x[p] * h, x[p + 1] * h);
            m[(j, k)] = z;
            m[(k, j)] = z.conj();
            p += 2;
        }
    }
    m
}

/// Sandwiched up-arrow entropy by direct optimization over `σ_B`
/// (restricted to the support of `ρ_B`), for finite `α > 0`, `α ≠ 1`.
pub fn sandwiched_up(bp: &Bipartite, alpha: f64, base: Base, opts: &IterOptions) -> Result<EntropyResult> {
    check_alpha(alpha)?;
    if alpha == 0.0 || alpha == 1.0 || alpha.is_infinite() {
        return Err(Error::Range(format!("iterative solver needs finite alpha ∉ {{0, 1}}, got {alpha}")));
    }
    bp.require_normalized()?;
    let (v, _) = support_part(&eigh(&bp.rho_b()));
    let r = v.ncols();
    let lift = kron(&identity(bp.da), &v);
    let reduced = hermitize(&(lift.adjoint() * &bp.rho * &lift));
    let obj = UpObjective { rho_half: psd_power_es(&eigh(&reduced), 0.5), da: bp.da, r, alpha };
    let rho_b_red = hermitize(&(v.adjoint() * bp.rho_b() * &v));
    let mut starts = vec![crate::linalg::hermitian_fn(&rho_b_red, |x| x.max(1e-300).ln())];
    let mut sampler = Sampler::new(opts.seed ^ ((bp.da as u64) << 32 | r as u64));
    while starts.len() < opts.restarts.max(1) {
        let s = sampler.full_density(r)?;
        starts.push(crate::linalg::hermitian_fn(&s, |x| x.max(1e-300).ln()));
    }
    let mut runs: Vec<(Point, f64)> = starts.iter().filter_map(|s| obj.solve_from(s, opts)).collect();
    if runs.is_empty() {
        return Err(Error::NonConvergence { residual: f64::INFINITY });
    }
    runs.sort_by(|a, b| a.0.f.total_cmp(&b.0.f));
    let fs: Vec<f64> = runs.iter().filter(|(_, res)| *res <= opts.accept).map(|(p, _)| p.f).collect();
    let spread = match (fs.first(), fs.last()) {
        (Some(a), Some(b)) => b - a,
        _ => 0.0,
    };
    let (best, res) = runs.swap_remove(0);
    if !(res <= opts.accept) {
        return Err(Error::NonConvergence { residual: base.from_nats(res) });
    }
    let sigma = hermitize(&(&v * best.sigma() * v.adjoint()));
    Ok(EntropyResult {
        value: -base.from_nats(best.f),
        base,
        family: EntropyFamily::Sandwiched,
        arrow: Arrow::Up,
        alpha,
        method: Method::Iterative,
        sigma_b: Some(sigma),
        certificate: None,
        residual: Some(base.from_nats(res)),
        restart_spread: Some(base.from_nats(spread)),
    })
}

/// `−D_α(ρ_AB ‖ I ⊗ σ_B)` for a given `σ_B`: the value an up-arrow entropy
/// is at least as large as.
pub fn entropy_against(
    bp: &Bipartite,
    sigma_b: &CMat,
    family: EntropyFamily,
    alpha: f64,
    base: Base,
) -> Result<f64> {
    let sigma = kron(&identity(bp.da), sigma_b);
    let order = if alpha.is_infinite() {
        RenyiOrder::new(Family::Max, alpha)?
    } else {
        RenyiOrder::new(family.divergence(), alpha)?
    };
    Ok(-renyi_divergence(&bp.rho, &sigma, order, base)?.value)
}
