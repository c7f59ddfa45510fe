//! Real primal-dual interior-point method for block SDPs in standard form
//!
//! ```text
//!   min ⟨C, X⟩  s.t.  ⟨A_i, X⟩ = b_i,  X ∈ K
//!   max bᵀy     s.t.  C − Σ y_i A_i = S ∈ K
//! ```
//!
//! with `K` a product of PSD cones and nonnegative orthants. Search directions
//! use Nesterov–Todd scaling with a Mehrotra predictor-corrector.

use nalgebra::{DMatrix, DVector};

/// A cone in the product.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cone {
    Psd(usize),
    Lp(usize),
}

impl Cone {
    pub fn dim(self) -> usize {
        match self {
            Cone::Psd(n) | Cone::Lp(n) => n,
        }
    }
}

/// Block value: a symmetric matrix for PSD cones, a vector for orthants.
#[derive(Clone, Debug, PartialEq)]
pub enum Blk {
    S(DMatrix<f64>),
    L(DVector<f64>),
}

impl Blk {
    /// Strictly inside the cone (Cholesky succeeds / all entries positive).
    fn interior(&self) -> bool {
        match self {
            Blk::S(m) => m.clone().cholesky().is_some(),
            Blk::L(v) => v.iter().all(|&t| t > 0.0),
        }
    }

    fn zeros(c: Cone) -> Blk {
        match c {
            Cone::Psd(n) => Blk::S(DMatrix::zeros(n, n)),
            Cone::Lp(n) => Blk::L(DVector::zeros(n)),
        }
    }

    fn identity(c: Cone, t: f64) -> Blk {
        match c {
            Cone::Psd(n) => Blk::S(DMatrix::identity(n, n) * t),
            Cone::Lp(n) => Blk::L(DVector::from_element(n, t)),
        }
    }

    fn dot(&self, o: &Blk) -> f64 {
        match (self, o) {
            (Blk::S(a), Blk::S(b)) => a.dot(b),
            (Blk::L(a), Blk::L(b)) => a.dot(b),
            _ => unreachable!("block kinds differ"),
        }
    }

    fn norm(&self) -> f64 {
        match self {
            Blk::S(a) => a.norm(),
            Blk::L(a) => a.norm(),
        }
    }

    fn axpy(&mut self, t: f64, o: &Blk) {
        match (self, o) {
            (Blk::S(a), Blk::S(b)) => *a += b * t,
            (Blk::L(a), Blk::L(b)) => *a += b * t,
            _ => unreachable!("block kinds differ"),
        }
    }

    pub fn as_matrix(&self) -> Option<&DMatrix<f64>> {
        match self {
            Blk::S(a) => Some(a),
            Blk::L(_) => None,
        }
    }

    pub fn as_vector(&self) -> Option<&DVector<f64>> {
        match self {
            Blk::L(a) => Some(a),
            Blk::S(_) => None,
        }
    }
}

fn dot_all(a: &[Blk], b: &[Blk]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.dot(y)).sum()
}

fn norm_all(a: &[Blk]) -> f64 {
    a.iter().map(|x| x.norm().powi(2)).sum::<f64>().sqrt()
}

/// Nonzeros of one constraint row restricted to one block. PSD entries list
/// both `(r, c)` and `(c, r)` for off-diagonal positions; orthant entries use
/// `r == c`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Part {
    pub block: usize,
    pub entries: Vec<(usize, usize, f64)>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Row {
    pub parts: Vec<Part>,
}

#[derive(Clone, Debug)]
pub struct StdForm {
    pub cones: Vec<Cone>,
    pub c: Vec<Blk>,
    pub rows: Vec<Row>,
    pub b: DVector<f64>,
}

#[derive(Clone, Copy, Debug)]
pub struct Options {
    pub gap_tol: f64,
    pub feas_tol: f64,
    pub max_iter: usize,
}

/// Rounding usually stops progress a little short of very tight tolerances.
pub const STALL_SLACK: f64 = 100.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Optimal,
    /// Stalled, but every residual is within `STALL_SLACK` times its tolerance.
    NearOptimal,
    MaxIter,
    PrimalInfeasible,
    DualInfeasible,
}

#[derive(Clone, Debug)]
pub struct Iterate {
    pub x: Vec<Blk>,
    pub y: DVector<f64>,
    pub s: Vec<Blk>,
    pub pobj: f64,
    pub dobj: f64,
    pub rel_gap: f64,
    pub pinf: f64,
    pub dinf: f64,
    pub iterations: usize,
    pub outcome: Outcome,
}

impl StdForm {
    fn apply_a(&self, x: &[Blk]) -> DVector<f64> {
        DVector::from_iterator(
            self.rows.len(),
            self.rows.iter().map(|row| {
                row.parts
                    .iter()
                    .map(|p| match &x[p.block] {
                        Blk::S(m) => p.entries.iter().map(|&(r, c, v)| v * m[(r, c)]).sum::<f64>(),
                        Blk::L(l) => p.entries.iter().map(|&(r, _, v)| v * l[r]).sum::<f64>(),
                    })
                    .sum::<f64>()
            }),
        )
    }

    fn apply_at(&self, y: &DVector<f64>) -> Vec<Blk> {
        let mut out: Vec<Blk> = self.cones.iter().map(|&c| Blk::zeros(c)).collect();
        for (row, &yi) in self.rows.iter().zip(y.iter()) {
            if yi == 0.0 {
                continue;
            }
            for p in &row.parts {
                match &mut out[p.block] {
                    Blk::S(m) => {
                        for &(r, c, v) in &p.entries {
                            m[(r, c)] += yi * v;
                        }
                    }
                    Blk::L(l) => {
                        for &(r, _, v) in &p.entries {
                            l[r] += yi * v;
                        }
                    }
                }
            }
        }
        out
    }

    fn degree(&self) -> f64 {
        self.cones.iter().map(|c| c.dim()).sum::<usize>() as f64
    }
}

/// NT scaling of one block.
enum Scaling {
    S { g: DMatrix<f64>, w: DMatrix<f64>, lam: DVector<f64> },
    L { g: DVector<f64>, w: DVector<f64>, lam: DVector<f64> },
}

fn nt_scaling(x: &Blk, s: &Blk) -> Option<Scaling> {
    match (x, s) {
        (Blk::S(x), Blk::S(s)) => {
            let l = x.clone().cholesky()?.unpack();
            let r = s.clone().cholesky()?.unpack();
            let svd = (r.transpose() * &l).svd(true, true);
            let v = svd.v_t?.transpose();
            let sig = svd.singular_values;
            if sig.iter().any(|&t| t <= 0.0 || !t.is_finite()) {
                return None;
            }
            let mut g = l * v;
            for (k, &t) in sig.iter().enumerate() {
                g.column_mut(k).scale_mut(1.0 / t.sqrt());
            }
            let w = &g * g.transpose();
            Some(Scaling::S { g, w, lam: sig })
        }
        (Blk::L(x), Blk::L(s)) => {
            if x.iter().chain(s.iter()).any(|&t| t <= 0.0) {
                return None;
            }
            // W s W = x with W = √(x/s); G = W^{1/2}
            let w = x.component_div(s).map(f64::sqrt);
            let g = w.map(f64::sqrt);
            let lam = x.component_mul(s).map(f64::sqrt);
            Some(Scaling::L { g, w, lam })
        }
        _ => unreachable!(),
    }
}

impl Scaling {
    /// `W B W`.
    fn wbw(&self, b: &Blk) -> Blk {
        match (self, b) {
            (Scaling::S { w, .. }, Blk::S(b)) => Blk::S(w * b * w),
            (Scaling::L { w, .. }, Blk::L(b)) => Blk::L(w.component_mul(b).component_mul(w)),
            _ => unreachable!(),
        }
    }

    /// `G D Gᵀ`.
    fn g_d_gt(&self, d: &Blk) -> Blk {
        match (self, d) {
            (Scaling::S { g, .. }, Blk::S(d)) => Blk::S(g * d * g.transpose()),
            (Scaling::L { g, .. }, Blk::L(d)) => Blk::L(g.component_mul(d).component_mul(g)),
            _ => unreachable!(),
        }
    }

    /// `Gᵀ B G`.
    fn gt_b_g(&self, b: &Blk) -> Blk {
        match (self, b) {
            (Scaling::S { g, .. }, Blk::S(b)) => Blk::S(g.transpose() * b * g),
            (Scaling::L { g, .. }, Blk::L(b)) => Blk::L(g.component_mul(b).component_mul(g)),
            _ => unreachable!(),
        }
    }

    fn lam(&self) -> &DVector<f64> {
        match self {
            Scaling::S { lam, .. } | Scaling::L { lam, .. } => lam,
        }
    }

    /// Solve `Λ D + D Λ = 2R` for `D`.
    fn lyap(&self, r: &Blk) -> Blk {
        let lam = self.lam();
        match r {
            Blk::S(r) => {
                let n = lam.len();
                Blk::S(DMatrix::from_fn(n, n, |i, j| 2.0 * r[(i, j)] / (lam[i] + lam[j])))
            }
            Blk::L(r) => Blk::L(r.component_div(lam)),
        }
    }

    /// `−Λ²` plus the optional shift `σμ I` and corrector `−(ΔX̃ΔS̃ + ΔS̃ΔX̃)/2`.
    fn rhs(&self, sigma_mu: f64, corr: Option<(&Blk, &Blk)>) -> Blk {
        let lam = self.lam();
        match self {
            Scaling::S { .. } => {
                let n = lam.len();
                let mut r = DMatrix::from_fn(n, n, |i, j| if i == j { sigma_mu - lam[i] * lam[i] } else { 0.0 });
                if let Some((Blk::S(dx), Blk::S(ds))) = corr {
                    let p = dx * ds;
                    r -= (&p + p.transpose()) * 0.5;
                }
                Blk::S(r)
            }
            Scaling::L { .. } => {
                let mut r = lam.map(|l| sigma_mu - l * l);
                if let Some((Blk::L(dx), Blk::L(ds))) = corr {
                    r -= dx.component_mul(ds);
                }
                Blk::L(r)
            }
        }
    }

    /// Largest step `t ≤ ∞` keeping `Λ + t Δ` in the cone.
    fn max_step(&self, delta: &Blk) -> f64 {
        let lam = self.lam();
        let mn = match delta {
            Blk::S(d) => {
                let n = lam.len();
                let m = DMatrix::from_fn(n, n, |i, j| d[(i, j)] / (lam[i] * lam[j]).sqrt());
                let m = (&m + m.transpose()) * 0.5;
                m.symmetric_eigenvalues().min()
            }
            Blk::L(d) => d.component_div(lam).min(),
        };
        if mn >= 0.0 {
            f64::INFINITY
        } else {
            -1.0 / mn
        }
    }
}

/// Schur complement `M_ij = Σ_k ⟨A_ik, W_k A_jk W_k⟩`.
fn schur(p: &StdForm, sc: &[Scaling]) -> DMatrix<f64> {
    let m = p.rows.len();
    let mut out = DMatrix::zeros(m, m);
    // rows touching each block
    let mut by_block: Vec<Vec<(usize, &Part)>> = vec![Vec::new(); p.cones.len()];
    for (i, row) in p.rows.iter().enumerate() {
        for part in &row.parts {
            by_block[part.block].push((i, part));
        }
    }
    for (k, rows) in by_block.iter().enumerate() {
        match &sc[k] {
            Scaling::S { w, .. } => {
                let n = w.nrows();
                for (jj, &(j, pj)) in rows.iter().enumerate() {
                    let t = if pj.entries.len() <= n {
                        let mut t = DMatrix::zeros(n, n);
                        for &(r, c, v) in &pj.entries {
                            // t += v · W[:, r] W[c, :]
                            t.ger(v, &w.column(r), &w.column(c), 1.0);
                        }
                        t
                    } else {
                        let mut a = DMatrix::zeros(n, n);
                        for &(r, c, v) in &pj.entries {
                            a[(r, c)] += v;
                        }
                        w * a * w
                    };
                    for &(i, pi) in &rows[..=jj] {
                        let v: f64 = pi.entries.iter().map(|&(r, c, v)| v * t[(r, c)]).sum();
                        out[(i, j)] += v;
                        if i != j {
                            out[(j, i)] += v;
                        }
                    }
                }
            }
            Scaling::L { w, .. } => {
                for (jj, &(j, pj)) in rows.iter().enumerate() {
                    for &(i, pi) in &rows[..=jj] {
                        let mut v = 0.0;
                        for &(r, _, a) in &pi.entries {
                            for &(r2, _, b) in &pj.entries {
                                if r == r2 {
                                    v += a * b * w[r] * w[r];
                                }
                            }
                        }
                        out[(i, j)] += v;
                        if i != j {
                            out[(j, i)] += v;
                        }
                    }
                }
            }
        }
    }
    out
}

enum Factor {
    Chol(nalgebra::Cholesky<f64, nalgebra::Dyn>),
    Lu(nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>),
}

impl Factor {
    fn new(m: DMatrix<f64>) -> Factor {
        let scale = m.diagonal().iter().fold(0.0f64, |a, &b| a.max(b.abs())).max(1e-300);
        if let Some(c) = m.clone().cholesky() {
            return Factor::Chol(c);
        }
        let mut reg = m.clone();
        for i in 0..reg.nrows() {
            reg[(i, i)] += 1e-13 * scale;
        }
        if let Some(c) = reg.cholesky() {
            return Factor::Chol(c);
        }
        Factor::Lu(m.lu())
    }

    fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        match self {
            Factor::Chol(c) => c.solve(b),
            Factor::Lu(l) => l.solve(b).unwrap_or_else(|| DVector::zeros(b.len())),
        }
    }
}

struct Direction {
    dx: Vec<Blk>,
    dy: DVector<f64>,
    ds: Vec<Blk>,
    dx_t: Vec<Blk>,
    ds_t: Vec<Blk>,
}

fn direction(p: &StdForm, sc: &[Scaling], f: &Factor, rp: &DVector<f64>, rd: &[Blk], r: &[Blk]) -> Direction {
    let d: Vec<Blk> = sc.iter().zip(r).map(|(s, r)| s.lyap(r)).collect();
    let gdg: Vec<Blk> = sc.iter().zip(&d).map(|(s, d)| s.g_d_gt(d)).collect();
    let wrw: Vec<Blk> = sc.iter().zip(rd).map(|(s, r)| s.wbw(r)).collect();
    let rhs = rp - p.apply_a(&gdg) + p.apply_a(&wrw);
    let mut dy = f.solve(&rhs);
    // refine against the operator itself so that A dx = rp holds to working precision
    for _ in 0..2 {
        let wa: Vec<Blk> = sc.iter().zip(&p.apply_at(&dy)).map(|(s, a)| s.wbw(a)).collect();
        let res = &rhs - p.apply_a(&wa);
        if res.norm() <= 1e-15 * rhs.norm() {
            break;
        }
        dy += f.solve(&res);
    }
    let aty = p.apply_at(&dy);
    let ds: Vec<Blk> = rd
        .iter()
        .zip(&aty)
        .map(|(r, a)| {
            let mut t = r.clone();
            t.axpy(-1.0, a);
            t
        })
        .collect();
    let dx: Vec<Blk> = gdg
        .iter()
        .zip(sc.iter().zip(&ds))
        .map(|(g, (s, ds))| {
            let mut t = g.clone();
            t.axpy(-1.0, &s.wbw(ds));
            t
        })
        .collect();
    let ds_t: Vec<Blk> = sc.iter().zip(&ds).map(|(s, ds)| s.gt_b_g(ds)).collect();
    let dx_t: Vec<Blk> = d
        .iter()
        .zip(&ds_t)
        .map(|(d, st)| {
            let mut t = d.clone();
            t.axpy(-1.0, st);
            t
        })
        .collect();
    Direction { dx, dy, ds, dx_t, ds_t }
}

fn step_lengths(sc: &[Scaling], dir: &Direction, gamma: f64) -> (f64, f64) {
    let ap = sc.iter().zip(&dir.dx_t).map(|(s, d)| s.max_step(d)).fold(f64::INFINITY, f64::min);
    let ad = sc.iter().zip(&dir.ds_t).map(|(s, d)| s.max_step(d)).fold(f64::INFINITY, f64::min);
    ((gamma * ap).min(1.0), (gamma * ad).min(1.0))
}

fn symmetrize(b: &mut Blk) {
    if let Blk::S(m) = b {
        let t = (&*m + m.transpose()) * 0.5;
        *m = t;
    }
}

/// Solve a standard-form problem. Rows must be linearly independent.
pub fn solve(p: &StdForm, opts: &Options) -> Iterate {
    let n_deg = p.degree();
    let m = p.rows.len();
    let b_norm = p.b.norm();
    let c_norm = norm_all(&p.c);
    // initial point in the style of SDPT3: large multiples of the identity
    let row_norms: Vec<f64> = p
        .rows
        .iter()
        .map(|r| r.parts.iter().flat_map(|q| q.entries.iter()).map(|e| e.2 * e.2).sum::<f64>().sqrt())
        .collect();
    let mut x_scale: f64 = 10.0;
    let mut s_scale: f64 = 10.0f64.max(c_norm);
    for (k, c) in p.cones.iter().enumerate() {
        let n = (c.dim() as f64).sqrt();
        for (i, rn) in row_norms.iter().enumerate() {
            if p.rows[i].parts.iter().any(|q| q.block == k) {
                x_scale = x_scale.max(n * (1.0 + p.b[i].abs()) / (1.0 + rn));
                s_scale = s_scale.max(n * (1.0 + rn));
            }
        }
    }
    let mut x: Vec<Blk> = p.cones.iter().map(|&c| Blk::identity(c, x_scale)).collect();
    let mut s: Vec<Blk> = p.cones.iter().map(|&c| Blk::identity(c, s_scale)).collect();
    let mut y = DVector::zeros(m);

    let mut best: Option<Iterate> = None;
    let mut stall = 0;
    for it in 0..=opts.max_iter {
        let ax = p.apply_a(&x);
        let rp = &p.b - &ax;
        let aty = p.apply_at(&y);
        let rd: Vec<Blk> = p
            .c
            .iter()
            .zip(s.iter().zip(&aty))
            .map(|(c, (s, a))| {
                let mut t = c.clone();
                t.axpy(-1.0, s);
                t.axpy(-1.0, a);
                t
            })
            .collect();
        let pobj = dot_all(&p.c, &x);
        let dobj = p.b.dot(&y);
        let xs = dot_all(&x, &s);
        let mu = xs / n_deg;
        let pinf = rp.norm() / (1.0 + b_norm);
        let dinf = norm_all(&rd) / (1.0 + c_norm);
        let rel_gap = (pobj - dobj).abs().max(xs.abs()) / (1.0 + pobj.abs() + dobj.abs());
        let cur = Iterate {
            x: x.clone(),
            y: y.clone(),
            s: s.clone(),
            pobj,
            dobj,
            rel_gap,
            pinf,
            dinf,
            iterations: it,
            outcome: Outcome::MaxIter,
        };
        if std::env::var("QIT_IPM_TRACE").is_ok() {
            eprintln!("{it:3} pobj {pobj:+.10e} dobj {dobj:+.10e} gap {rel_gap:.2e} pinf {pinf:.2e} dinf {dinf:.2e} mu {mu:.2e}");
        }
        let merit = |t: &Iterate| t.rel_gap.max(t.pinf).max(t.dinf);
        if best.as_ref().map_or(true, |b| merit(&cur) <= merit(b)) {
            best = Some(cur.clone());
        }
        if rel_gap <= opts.gap_tol && pinf <= opts.feas_tol && dinf <= opts.feas_tol {
            return Iterate { outcome: Outcome::Optimal, ..cur };
        }
        // infeasibility heuristics: a diverging objective with the other side feasible
        let xn = norm_all(&x);
        let yn = y.norm();
        if dobj > 1e8 * (1.0 + c_norm) && dinf <= opts.feas_tol.sqrt() && yn > 1e8 {
            return Iterate { outcome: Outcome::PrimalInfeasible, ..cur };
        }
        if -pobj > 1e8 * (1.0 + b_norm) && pinf <= opts.feas_tol.sqrt() && xn > 1e8 {
            return Iterate { outcome: Outcome::DualInfeasible, ..cur };
        }
        if it == opts.max_iter {
            break;
        }
        let sc: Option<Vec<Scaling>> = x.iter().zip(&s).map(|(x, s)| nt_scaling(x, s)).collect();
        let Some(sc) = sc else { break };
        let f = Factor::new(schur(p, &sc));

        // predictor
        let r_aff: Vec<Blk> = sc.iter().map(|s| s.rhs(0.0, None)).collect();
        let aff = direction(p, &sc, &f, &rp, &rd, &r_aff);
        let (ap, ad) = step_lengths(&sc, &aff, 1.0);
        let mut xa = x.clone();
        let mut sa = s.clone();
        for k in 0..x.len() {
            xa[k].axpy(ap, &aff.dx[k]);
            sa[k].axpy(ad, &aff.ds[k]);
        }
        let mu_aff = dot_all(&xa, &sa) / n_deg;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

        // corrector
        let r_cor: Vec<Blk> = sc
            .iter()
            .zip(aff.dx_t.iter().zip(&aff.ds_t))
            .map(|(s, (dx, ds))| s.rhs(sigma * mu, Some((dx, ds))))
            .collect();
        let dir = direction(p, &sc, &f, &rp, &rd, &r_cor);
        let gamma = 0.9f64.max(1.0 - 10.0 * mu.min(1.0)).min(0.99);
        let (ap, ad) = step_lengths(&sc, &dir, gamma);
        if ap.max(ad) < 1e-10 {
            stall += 1;
            if stall > 3 {
                break;
            }
        } else {
            stall = 0;
        }
        // shorten the step if rounding left the cone interior
        let (mut ap, mut ad) = (ap, ad);
        let (mut xn, mut sn) = (x.clone(), s.clone());
        for _ in 0..30 {
            xn = x.clone();
            sn = s.clone();
            for k in 0..x.len() {
                xn[k].axpy(ap, &dir.dx[k]);
                sn[k].axpy(ad, &dir.ds[k]);
                symmetrize(&mut xn[k]);
                symmetrize(&mut sn[k]);
            }
            let ok_x = xn.iter().all(Blk::interior);
            let ok_s = sn.iter().all(Blk::interior);
            if ok_x && ok_s {
                break;
            }
            if !ok_x {
                ap *= 0.8;
            }
            if !ok_s {
                ad *= 0.8;
            }
        }
        x = xn;
        s = sn;
        y.axpy(ad, &dir.dy, 1.0);
    }
    let mut best = best.expect("at least one iterate");
    if best.rel_gap <= STALL_SLACK * opts.gap_tol
        && best.pinf <= STALL_SLACK * opts.feas_tol
        && best.dinf <= STALL_SLACK * opts.feas_tol
    {
        best.outcome = Outcome::NearOptimal;
    }
    best
}

/// Indices of a maximal linearly independent subset of the rows (pivoted
/// Cholesky on the Gram matrix), plus whether the dropped rows are consistent
/// with `b`.
pub fn independent_rows(p: &StdForm) -> (Vec<usize>, bool) {
    let m = p.rows.len();
    if m == 0 {
        return (vec![], true);
    }
    let dense: Vec<Vec<Blk>> = p
        .rows
        .iter()
        .map(|row| {
            let mut out: Vec<Blk> = p.cones.iter().map(|&c| Blk::zeros(c)).collect();
            for part in &row.parts {
                match &mut out[part.block] {
                    Blk::S(a) => part.entries.iter().for_each(|&(r, c, v)| a[(r, c)] += v),
                    Blk::L(a) => part.entries.iter().for_each(|&(r, _, v)| a[r] += v),
                }
            }
            out
        })
        .collect();
    let gram = DMatrix::from_fn(m, m, |i, j| dot_all(&dense[i], &dense[j]));
    let scale = gram.diagonal().iter().fold(0.0f64, |a, &b| a.max(b));
    if scale == 0.0 {
        return (vec![], p.b.norm() == 0.0);
    }
    // pivoted Cholesky
    let mut l = DMatrix::<f64>::zeros(m, m);
    let mut diag: Vec<f64> = (0..m).map(|i| gram[(i, i)]).collect();
    let mut used = vec![false; m];
    let mut piv = Vec::new();
    for k in 0..m {
        let (j, &dj) = diag
            .iter()
            .enumerate()
            .filter(|(i, _)| !used[*i])
            .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))
            .unwrap();
        if dj <= 1e-12 * scale {
            break;
        }
        used[j] = true;
        piv.push(j);
        let ljj = dj.sqrt();
        for i in 0..m {
            if used[i] && i != j {
                continue;
            }
            let mut v = gram[(i, j)];
            for t in 0..k {
                v -= l[(i, t)] * l[(j, t)];
            }
            l[(i, k)] = if i == j { ljj } else { v / ljj };
        }
        for i in 0..m {
            if !used[i] {
                diag[i] -= l[(i, k)] * l[(i, k)];
            }
        }
    }
    piv.sort_unstable();
    // consistency of dropped rows: b_i must equal the projection onto kept rows
    let k = piv.len();
    let gss = DMatrix::from_fn(k, k, |a, b| gram[(piv[a], piv[b])]);
    let bs = DVector::from_iterator(k, piv.iter().map(|&i| p.b[i]));
    let chol = gss.cholesky();
    let mut consistent = true;
    for i in 0..m {
        if piv.contains(&i) {
            continue;
        }
        let gis = DVector::from_iterator(k, piv.iter().map(|&j| gram[(i, j)]));
        let coef = match &chol {
            Some(c) => c.solve(&gis),
            None => DVector::zeros(k),
        };
        if (p.b[i] - coef.dot(&bs)).abs() > 1e-8 * (1.0 + p.b.amax()) {
            consistent = false;
        }
    }
    (piv, consistent)
}
