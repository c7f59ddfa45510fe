//! Small dense semidefinite programs over complex Hermitian blocks.
//!
//! A problem has matrix variables (Hermitian PSD blocks or nonnegative
//! vectors), a linear objective `Σ_k tr(C_k X_k)` and constraints of the form
//! `Σ_k L_k(X_k) {=, ⪯, ⪰} M`, where each `L_k(X) = Σ_t c_t K_t X K_t†` is a
//! Hermiticity-preserving map in Kraus form with real weights. Inequalities
//! get slack blocks, Hermitian blocks are embedded as real symmetric blocks of
//! twice the size, and the resulting standard-form problem is solved by the
//! interior-point method in [`ipm`].
//!
//! Dual witnesses are reported per constraint as Hermitian operators `Y` with
//! the convention that, for a minimization, the dual reads
//! `max Σ_j tr(M_j Y_j)` subject to `C_k − Σ_j L_{jk}†(Y_j) ⪰ 0`; for a
//! maximization it reads `min Σ_j tr(M_j Y_j)` subject to
//! `Σ_j L_{jk}†(Y_j) − C_k ⪰ 0`.

pub mod ipm;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{bra, c, cr, hermitize, identity, kron, zeros, CMat};

/// Default cap on the number of real parameters over all variable blocks.
pub const DEFAULT_MAX_PARAMS: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sense {
    Min,
    Max,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockKind {
    /// Complex Hermitian positive semidefinite matrix.
    Hermitian,
    /// Nonnegative vector, addressed as a diagonal matrix.
    Nonneg,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub name: String,
    pub dim: usize,
    pub kind: BlockKind,
}

impl Block {
    fn params(&self) -> usize {
        match self.kind {
            BlockKind::Hermitian => self.dim * self.dim,
            BlockKind::Nonneg => self.dim,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KrausTerm {
    pub coeff: f64,
    #[serde(with = "crate::io::cmat")]
    pub k: CMat,
}

/// `X ↦ Σ_t c_t K_t X K_t†`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineMap {
    pub dim_in: usize,
    pub dim_out: usize,
    pub terms: Vec<KrausTerm>,
}

impl AffineMap {
    pub fn kraus(coeff: f64, ks: &[CMat]) -> Result<Self> {
        let first = ks.first().ok_or_else(|| Error::InvalidChannel("empty Kraus list".into()))?;
        let (dim_out, dim_in) = first.shape();
        if ks.iter().any(|k| k.shape() != (dim_out, dim_in)) {
            return Err(Error::DimensionMismatch("Kraus operators differ in shape".into()));
        }
        Ok(AffineMap {
            dim_in,
            dim_out,
            terms: ks.iter().map(|k| KrausTerm { coeff, k: k.clone() }).collect(),
        })
    }

    pub fn identity(n: usize) -> Self {
        AffineMap { dim_in: n, dim_out: n, terms: vec![KrausTerm { coeff: 1.0, k: identity(n) }] }
    }

    /// `X ↦ K X K†`.
    pub fn conjugation(k: CMat) -> Self {
        let (dim_out, dim_in) = k.shape();
        AffineMap { dim_in, dim_out, terms: vec![KrausTerm { coeff: 1.0, k }] }
    }

    /// `X ↦ tr X` (1×1 output).
    pub fn trace(n: usize) -> Self {
        AffineMap {
            dim_in: n,
            dim_out: 1,
            terms: (0..n).map(|i| KrausTerm { coeff: 1.0, k: bra(n, i) }).collect(),
        }
    }

    /// `X ↦ tr(P X)` for Hermitian `P` (1×1 output).
    pub fn functional(p: &CMat) -> Self {
        let es = crate::linalg::eigh(p);
        let n = p.nrows();
        let mut terms = Vec::new();
        for (k, &l) in es.values.iter().enumerate() {
            if es.support[k] {
                let v = es.vectors.column(k);
                let mut row = zeros(1, n);
                for i in 0..n {
                    row[(0, i)] = v[i].conj();
                }
                terms.push(KrausTerm { coeff: l, k: row });
            }
        }
        if terms.is_empty() {
            terms.push(KrausTerm { coeff: 0.0, k: zeros(1, n) });
        }
        AffineMap { dim_in: n, dim_out: 1, terms }
    }

    /// `X_B ↦ id_A ⊗ X_B`.
    pub fn embed_right(da: usize, db: usize) -> Self {
        let ks: Vec<CMat> = (0..da).map(|a| kron(&crate::linalg::col(&crate::linalg::ket(da, a)), &identity(db))).collect();
        AffineMap::kraus(1.0, &ks).expect("nonempty")
    }

    /// `X_A ↦ X_A ⊗ id_B`.
    pub fn embed_left(da: usize, db: usize) -> Self {
        let ks: Vec<CMat> = (0..db).map(|b| kron(&identity(da), &crate::linalg::col(&crate::linalg::ket(db, b)))).collect();
        AffineMap::kraus(1.0, &ks).expect("nonempty")
    }

    /// Partial trace over the second factor of `A ⊗ B`.
    pub fn trace_right(da: usize, db: usize) -> Self {
        let ks: Vec<CMat> = (0..db).map(|b| kron(&identity(da), &bra(db, b))).collect();
        AffineMap::kraus(1.0, &ks).expect("nonempty")
    }

    /// Partial trace over the first factor of `A ⊗ B`.
    pub fn trace_left(da: usize, db: usize) -> Self {
        let ks: Vec<CMat> = (0..da).map(|a| kron(&bra(da, a), &identity(db))).collect();
        AffineMap::kraus(1.0, &ks).expect("nonempty")
    }

    pub fn scaled(mut self, t: f64) -> Self {
        for term in &mut self.terms {
            term.coeff *= t;
        }
        self
    }

    /// `self ∘ first`.
    pub fn after(&self, first: &AffineMap) -> Result<Self> {
        if first.dim_out != self.dim_in {
            return Err(Error::DimensionMismatch("map composition".into()));
        }
        let mut terms = Vec::new();
        for a in &self.terms {
            for b in &first.terms {
                terms.push(KrausTerm { coeff: a.coeff * b.coeff, k: &a.k * &b.k });
            }
        }
        Ok(AffineMap { dim_in: first.dim_in, dim_out: self.dim_out, terms })
    }

    pub fn apply(&self, x: &CMat) -> CMat {
        let mut out = zeros(self.dim_out, self.dim_out);
        for t in &self.terms {
            out += (&t.k * x * t.k.adjoint()).scale(t.coeff);
        }
        out
    }

    pub fn adjoint(&self, y: &CMat) -> CMat {
        let mut out = zeros(self.dim_in, self.dim_in);
        for t in &self.terms {
            out += (t.k.adjoint() * y * &t.k).scale(t.coeff);
        }
        out
    }

    /// `L†(E_jk)` for the matrix unit `E_jk = |j⟩⟨k|`.
    fn adjoint_unit(&self, j: usize, k: usize) -> CMat {
        let n = self.dim_in;
        let mut out = zeros(n, n);
        for t in &self.terms {
            // K† |j⟩⟨k| K = (row j of K)† (row k of K)
            for a in 0..n {
                let u = t.k[(j, a)].conj() * t.coeff;
                if u == c(0.0, 0.0) {
                    continue;
                }
                for b in 0..n {
                    out[(a, b)] += u * t.k[(k, b)];
                }
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Eq,
    Le,
    Ge,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub block: usize,
    pub map: AffineMap,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub name: String,
    pub terms: Vec<Term>,
    pub relation: Relation,
    #[serde(with = "crate::io::cmat")]
    pub rhs: CMat,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Objective {
    pub block: usize,
    #[serde(with = "crate::io::cmat")]
    pub cost: CMat,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SdpProblem {
    pub sense: Sense,
    pub blocks: Vec<Block>,
    pub objective: Vec<Objective>,
    pub constraints: Vec<Constraint>,
    #[serde(default = "default_cap")]
    pub max_params: usize,
}

fn default_cap() -> usize {
    DEFAULT_MAX_PARAMS
}

impl SdpProblem {
    pub fn new(sense: Sense) -> Self {
        SdpProblem { sense, blocks: vec![], objective: vec![], constraints: vec![], max_params: DEFAULT_MAX_PARAMS }
    }

    pub fn add_block(&mut self, name: &str, dim: usize, kind: BlockKind) -> usize {
        self.blocks.push(Block { name: name.into(), dim, kind });
        self.blocks.len() - 1
    }

    pub fn add_objective(&mut self, block: usize, cost: CMat) {
        self.objective.push(Objective { block, cost });
    }

    pub fn add_constraint(&mut self, name: &str, terms: Vec<(usize, AffineMap)>, relation: Relation, rhs: CMat) {
        self.constraints.push(Constraint {
            name: name.into(),
            terms: terms.into_iter().map(|(block, map)| Term { block, map }).collect(),
            relation,
            rhs,
        });
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("problem serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let p: SdpProblem = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let params: usize = self.blocks.iter().map(Block::params).sum();
        if params > self.max_params {
            return Err(Error::TooLarge(format!("{params} real parameters exceed the cap {}", self.max_params)));
        }
        for o in &self.objective {
            let b = self.blocks.get(o.block).ok_or_else(|| Error::BadDims(format!("no block {}", o.block)))?;
            if o.cost.shape() != (b.dim, b.dim) {
                return Err(Error::DimensionMismatch(format!("objective on block '{}'", b.name)));
            }
            crate::linalg::check_hermitian(&o.cost)?;
        }
        for con in &self.constraints {
            let d = con.rhs.nrows();
            if con.rhs.ncols() != d {
                return Err(Error::DimensionMismatch(format!("rhs of '{}' is not square", con.name)));
            }
            crate::linalg::check_hermitian(&con.rhs)?;
            for t in &con.terms {
                let b = self.blocks.get(t.block).ok_or_else(|| Error::BadDims(format!("no block {}", t.block)))?;
                if t.map.dim_in != b.dim || t.map.dim_out != d {
                    return Err(Error::DimensionMismatch(format!(
                        "constraint '{}': map {}→{} on block '{}' of size {} with rhs size {}",
                        con.name, t.map.dim_in, t.map.dim_out, b.name, b.dim, d
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub gap_tol: f64,
    pub feas_tol: f64,
    pub max_iter: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { gap_tol: 1e-8, feas_tol: 1e-8, max_iter: 200 }
    }
}

impl SolveOptions {
    /// Tighter settings used by the entropy routines.
    pub fn tight() -> Self {
        SolveOptions { gap_tol: 1e-10, feas_tol: 1e-10, max_iter: 200 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Optimal,
    MaxIter,
    Infeasible,
}

impl Status {
    pub fn name(self) -> &'static str {
        match self {
            Status::Optimal => "optimal",
            Status::MaxIter => "max_iter",
            Status::Infeasible => "infeasible",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SdpSolution {
    pub status: Status,
    pub primal_value: f64,
    pub dual_value: f64,
    /// `|primal − dual|`.
    pub duality_gap: f64,
    /// Relative gap used by the stopping rule.
    pub relative_gap: f64,
    pub primal_infeasibility: f64,
    pub dual_infeasibility: f64,
    /// `Σ_k tr(X_k S_k)`.
    pub complementarity: f64,
    pub iterations: usize,
    #[serde(with = "crate::io::cmat_vec")]
    pub primal: Vec<CMat>,
    /// One Hermitian operator per constraint.
    #[serde(with = "crate::io::cmat_vec")]
    pub dual: Vec<CMat>,
    /// Dual slack per variable block.
    #[serde(with = "crate::io::cmat_vec")]
    pub dual_slack: Vec<CMat>,
    pub detail: String,
}

impl SdpSolution {
    /// Fails unless the status is optimal.
    pub fn require_optimal(self) -> Result<Self> {
        if self.status == Status::Optimal {
            Ok(self)
        } else {
            Err(Error::Solver { status: self.status.name().into(), detail: self.detail.clone() })
        }
    }

    /// Two-sided bound `[lower, upper]` on the optimum.
    pub fn bounds(&self, sense: Sense) -> (f64, f64) {
        match sense {
            Sense::Min => (self.dual_value, self.primal_value),
            Sense::Max => (self.primal_value, self.dual_value),
        }
    }
}

/// Hermitian orthonormal basis of `d×d` matrices: `E_jj`, then for `j < k`
/// `(E_jk + E_kj)/√2` and `i(E_jk − E_kj)/√2`.
fn hermitian_basis(d: usize) -> Vec<(usize, usize, u8)> {
    let mut out = Vec::with_capacity(d * d);
    for j in 0..d {
        out.push((j, j, 0));
    }
    for j in 0..d {
        for k in (j + 1)..d {
            out.push((j, k, 1));
            out.push((j, k, 2));
        }
    }
    out
}

fn basis_matrix(d: usize, e: (usize, usize, u8)) -> CMat {
    let mut m = zeros(d, d);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    match e {
        (j, _, 0) => m[(j, j)] = cr(1.0),
        (j, k, 1) => {
            m[(j, k)] = cr(h);
            m[(k, j)] = cr(h);
        }
        (j, k, _) => {
            m[(j, k)] = c(0.0, h);
            m[(k, j)] = c(0.0, -h);
        }
    }
    m
}

fn map_adjoint_basis(map: &AffineMap, e: (usize, usize, u8)) -> CMat {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    match e {
        (j, _, 0) => map.adjoint_unit(j, j),
        (j, k, 1) => (map.adjoint_unit(j, k) + map.adjoint_unit(k, j)).scale(h),
        (j, k, _) => (map.adjoint_unit(j, k) - map.adjoint_unit(k, j)) * c(0.0, h),
    }
}

/// `[[Re A, −Im A], [Im A, Re A]]`.
fn realify(a: &CMat) -> DMatrix<f64> {
    let n = a.nrows();
    DMatrix::from_fn(2 * n, 2 * n, |i, j| {
        let z = a[(i % n, j % n)];
        match (i < n, j < n) {
            (true, true) | (false, false) => z.re,
            (false, true) => z.im,
            (true, false) => -z.im,
        }
    })
}

fn derealify(x: &DMatrix<f64>) -> CMat {
    let n = x.nrows() / 2;
    let mut out = zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            out[(i, j)] = c(
                0.5 * (x[(i, j)] + x[(i + n, j + n)]),
                0.5 * (x[(i + n, j)] - x[(i, j + n)]),
            );
        }
    }
    hermitize(&out)
}

fn part_entries(a: &CMat, kind: BlockKind) -> Vec<(usize, usize, f64)> {
    let scale = a.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    let cut = 1e-15 * scale.max(1e-300);
    match kind {
        BlockKind::Hermitian => {
            let r = realify(a);
            let mut out = Vec::new();
            for j in 0..r.ncols() {
                for i in 0..r.nrows() {
                    if r[(i, j)].abs() > cut {
                        out.push((i, j, 0.5 * r[(i, j)]));
                    }
                }
            }
            out
        }
        BlockKind::Nonneg => (0..a.nrows())
            .filter(|&i| a[(i, i)].re.abs() > cut)
            .map(|i| (i, i, a[(i, i)].re))
            .collect(),
    }
}

struct Lowered {
    std: ipm::StdForm,
    kinds: Vec<BlockKind>,
    /// (constraint, basis element) per row
    row_of: Vec<(usize, (usize, usize, u8))>,
    n_user: usize,
}

fn lower(p: &SdpProblem) -> Lowered {
    let mut kinds: Vec<BlockKind> = p.blocks.iter().map(|b| b.kind).collect();
    let mut cones: Vec<ipm::Cone> = p
        .blocks
        .iter()
        .map(|b| match b.kind {
            BlockKind::Hermitian => ipm::Cone::Psd(2 * b.dim),
            BlockKind::Nonneg => ipm::Cone::Lp(b.dim),
        })
        .collect();
    // slack blocks
    let mut slack_of: Vec<Option<(usize, f64)>> = Vec::new();
    for con in &p.constraints {
        let d = con.rhs.nrows();
        let sign = match con.relation {
            Relation::Eq => {
                slack_of.push(None);
                continue;
            }
            Relation::Le => 1.0,
            Relation::Ge => -1.0,
        };
        let kind = if d == 1 { BlockKind::Nonneg } else { BlockKind::Hermitian };
        kinds.push(kind);
        cones.push(match kind {
            BlockKind::Hermitian => ipm::Cone::Psd(2 * d),
            BlockKind::Nonneg => ipm::Cone::Lp(1),
        });
        slack_of.push(Some((cones.len() - 1, sign)));
    }
    let obj_sign = match p.sense {
        Sense::Min => 1.0,
        Sense::Max => -1.0,
    };
    let mut cmats: Vec<CMat> = cones
        .iter()
        .enumerate()
        .map(|(k, _)| {
            let d = if k < p.blocks.len() { p.blocks[k].dim } else { 0 };
            zeros(d, d)
        })
        .collect();
    for o in &p.objective {
        cmats[o.block] += o.cost.scale(obj_sign);
    }
    let c: Vec<ipm::Blk> = cones
        .iter()
        .enumerate()
        .map(|(k, &cone)| match cone {
            ipm::Cone::Psd(n) => {
                if k < p.blocks.len() {
                    ipm::Blk::S(realify(&cmats[k]) * 0.5)
                } else {
                    ipm::Blk::S(DMatrix::zeros(n, n))
                }
            }
            ipm::Cone::Lp(n) => {
                if k < p.blocks.len() {
                    ipm::Blk::L(DVector::from_iterator(n, (0..n).map(|i| cmats[k][(i, i)].re)))
                } else {
                    ipm::Blk::L(DVector::zeros(n))
                }
            }
        })
        .collect();
    let mut rows = Vec::new();
    let mut b = Vec::new();
    let mut row_of = Vec::new();
    for (ci, con) in p.constraints.iter().enumerate() {
        let d = con.rhs.nrows();
        for e in hermitian_basis(d) {
            let mut parts = Vec::new();
            for t in &con.terms {
                let a = map_adjoint_basis(&t.map, e);
                let entries = part_entries(&a, p.blocks[t.block].kind);
                if !entries.is_empty() {
                    parts.push(ipm::Part { block: t.block, entries });
                }
            }
            if let Some((sb, sign)) = slack_of[ci] {
                let a = basis_matrix(d, e).scale(sign);
                let kind = kinds[sb];
                parts.push(ipm::Part { block: sb, entries: part_entries(&a, kind) });
            }
            // merge parts on the same block
            parts.sort_by_key(|q| q.block);
            let mut merged: Vec<ipm::Part> = Vec::new();
            for q in parts {
                match merged.last_mut() {
                    Some(m) if m.block == q.block => m.entries.extend(q.entries),
                    _ => merged.push(q),
                }
            }
            for m in &mut merged {
                m.entries.sort_by(|x, y| (x.0, x.1).cmp(&(y.0, y.1)));
                let mut acc: Vec<(usize, usize, f64)> = Vec::new();
                for &(r, cc, v) in &m.entries {
                    match acc.last_mut() {
                        Some(l) if l.0 == r && l.1 == cc => l.2 += v,
                        _ => acc.push((r, cc, v)),
                    }
                }
                acc.retain(|x| x.2 != 0.0);
                m.entries = acc;
            }
            merged.retain(|m| !m.entries.is_empty());
            let rhs = crate::linalg::tr_prod(&basis_matrix(d, e), &con.rhs);
            rows.push(ipm::Row { parts: merged });
            b.push(rhs);
            row_of.push((ci, e));
        }
    }
    Lowered {
        std: ipm::StdForm { cones, c, rows, b: DVector::from_vec(b) },
        kinds,
        row_of,
        n_user: p.blocks.len(),
    }
}

fn block_to_complex(b: &ipm::Blk, kind: BlockKind) -> CMat {
    match (b, kind) {
        (ipm::Blk::S(m), BlockKind::Hermitian) => derealify(m),
        (ipm::Blk::L(v), _) => crate::linalg::diag(v.as_slice()),
        _ => unreachable!(),
    }
}

/// Solve an SDP. Solver failures are reported through [`SdpSolution::status`];
/// malformed problems are errors.
pub fn solve(p: &SdpProblem, opts: &SolveOptions) -> Result<SdpSolution> {
    p.validate()?;
    let low = lower(p);
    let (keep, consistent) = ipm::independent_rows(&low.std);
    let std = ipm::StdForm {
        cones: low.std.cones.clone(),
        c: low.std.c.clone(),
        rows: keep.iter().map(|&i| low.std.rows[i].clone()).collect(),
        b: DVector::from_iterator(keep.len(), keep.iter().map(|&i| low.std.b[i])),
    };
    let empty = || SdpSolution {
        status: Status::Infeasible,
        primal_value: f64::NAN,
        dual_value: f64::NAN,
        duality_gap: f64::NAN,
        relative_gap: f64::NAN,
        primal_infeasibility: f64::NAN,
        dual_infeasibility: f64::NAN,
        complementarity: f64::NAN,
        iterations: 0,
        primal: vec![],
        dual: vec![],
        dual_slack: vec![],
        detail: "linear constraints are inconsistent".into(),
    };
    if !consistent {
        return Ok(empty());
    }
    let it = ipm::solve(&std, &ipm::Options { gap_tol: opts.gap_tol, feas_tol: opts.feas_tol, max_iter: opts.max_iter });
    let mut y_full = vec![0.0; low.std.rows.len()];
    for (pos, &i) in keep.iter().enumerate() {
        y_full[i] = it.y[pos];
    }
    let sign = match p.sense {
        Sense::Min => 1.0,
        Sense::Max => -1.0,
    };
    let primal: Vec<CMat> = (0..low.n_user).map(|k| block_to_complex(&it.x[k], low.kinds[k])).collect();
    let dual_slack: Vec<CMat> = (0..low.n_user)
        .map(|k| {
            let s = block_to_complex(&it.s[k], low.kinds[k]);
            match low.kinds[k] {
                // the realified cost carries a factor 1/2
                BlockKind::Hermitian => s.scale(2.0 * sign),
                BlockKind::Nonneg => s.scale(sign),
            }
        })
        .collect();
    let mut dual: Vec<CMat> = p.constraints.iter().map(|con| zeros(con.rhs.nrows(), con.rhs.nrows())).collect();
    for (r, &(ci, e)) in low.row_of.iter().enumerate() {
        let d = p.constraints[ci].rhs.nrows();
        dual[ci] += basis_matrix(d, e).scale(y_full[r] * sign);
    }
    let primal_value: f64 = p.objective.iter().map(|o| crate::linalg::tr_prod(&o.cost, &primal[o.block])).sum();
    let dual_value = sign * it.dobj;
    let complementarity = ipm_dot(&it.x, &it.s);
    let (status, detail) = match it.outcome {
        ipm::Outcome::Optimal => (Status::Optimal, String::new()),
        ipm::Outcome::NearOptimal => (
            Status::Optimal,
            format!(
                "stalled after {} iterations within {}x tolerance: relative gap {:.2e}, primal infeasibility {:.2e}",
                it.iterations,
                ipm::STALL_SLACK,
                it.rel_gap,
                it.pinf
            ),
        ),
        ipm::Outcome::MaxIter => (
            Status::MaxIter,
            format!(
                "stopped after {} iterations: relative gap {:.2e}, primal infeasibility {:.2e}, dual infeasibility {:.2e}",
                it.iterations, it.rel_gap, it.pinf, it.dinf
            ),
        ),
        ipm::Outcome::PrimalInfeasible => (Status::Infeasible, "primal infeasible (diverging dual ray)".into()),
        ipm::Outcome::DualInfeasible => (Status::Infeasible, "dual infeasible (unbounded primal)".into()),
    };
    Ok(SdpSolution {
        status,
        primal_value,
        dual_value,
        duality_gap: (primal_value - dual_value).abs(),
        relative_gap: it.rel_gap,
        primal_infeasibility: it.pinf,
        dual_infeasibility: it.dinf,
        complementarity,
        iterations: it.iterations,
        primal,
        dual,
        dual_slack,
        detail,
    })
}

fn ipm_dot(x: &[ipm::Blk], s: &[ipm::Blk]) -> f64 {
    x.iter()
        .zip(s)
        .map(|(a, b)| match (a, b) {
            (ipm::Blk::S(a), ipm::Blk::S(b)) => a.dot(b),
            (ipm::Blk::L(a), ipm::Blk::L(b)) => a.dot(b),
            _ => 0.0,
        })
        .sum()
}
