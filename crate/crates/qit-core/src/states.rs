//! Density operators with labelled subsystems, channels in Kraus form, Choi
//! matrices, Stinespring dilations, POVMs and classical-quantum states.

use crate::error::{Error, Result};
use crate::linalg::{
    self, check_hermitian, check_psd_eig, cr, eigh, identity, kron, ket, partial_trace, permute_subsystems, proj, tr,
    zeros, CMat, CVec,
};

/// Trace normalization tolerance.
pub const TTOL: f64 = 1e-9;
/// Classicality tolerance on off-diagonal entries.
pub const CTOL: f64 = 1e-10;

/// Positive semidefinite operator with trace in `(0, 1]`, on labelled subsystems.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    matrix: CMat,
    dims: Vec<usize>,
    labels: Vec<String>,
    classical: Vec<bool>,
}

fn default_labels(n: usize) -> Vec<String> {
    (0..n)
        .map(|k| {
            if k < 26 {
                ((b'A' + k as u8) as char).to_string()
            } else {
                format!("S{k}")
            }
        })
        .collect()
}

impl DensityOperator {
    /// Validates hermiticity, positivity, trace and dimensions.
    pub fn new(matrix: CMat, dims: Vec<usize>, labels: Vec<String>) -> Result<Self> {
        if dims.is_empty() || dims.iter().any(|&d| d == 0) {
            return Err(Error::BadDims(format!("{dims:?}")));
        }
        if labels.len() != dims.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} labels for {} subsystems",
                labels.len(),
                dims.len()
            )));
        }
        let mut uniq = labels.clone();
        uniq.sort();
        uniq.dedup();
        if uniq.len() != labels.len() {
            return Err(Error::InvalidState(format!("duplicate labels in {labels:?}")));
        }
        let n: usize = dims.iter().product();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "matrix is {}x{}, dims {:?}",
                matrix.nrows(),
                matrix.ncols(),
                dims
            )));
        }
        check_hermitian(&matrix)?;
        let es = eigh(&matrix);
        check_psd_eig(&es)?;
        let t = tr(&matrix);
        if t <= 0.0 || t > 1.0 + TTOL {
            return Err(Error::InvalidState(format!("trace {t} outside (0, 1]")));
        }
        let k = dims.len();
        Ok(DensityOperator { matrix: linalg::hermitize(&matrix), dims, labels, classical: vec![false; k] })
    }

    /// Subsystems labelled `A`, `B`, `C`, ...
    pub fn from_matrix(matrix: CMat, dims: &[usize]) -> Result<Self> {
        Self::new(matrix, dims.to_vec(), default_labels(dims.len()))
    }

    /// Single system labelled `A`.
    pub fn single(matrix: CMat) -> Result<Self> {
        let d = matrix.nrows();
        Self::from_matrix(matrix, &[d])
    }

    pub fn pure(v: &CVec, dims: &[usize]) -> Result<Self> {
        let n = v.norm();
        if n == 0.0 {
            return Err(Error::InvalidState("zero vector".into()));
        }
        let u = v.unscale(n);
        Self::from_matrix(proj(&u), dims)
    }

    /// Classical state `Σ p_x |x⟩⟨x|` (marked classical).
    pub fn diag(p: &[f64]) -> Result<Self> {
        let s = Self::single(linalg::diag(p))?;
        s.with_classical(&["A"])
    }

    /// `id/d`.
    pub fn maximally_mixed(d: usize) -> Self {
        Self::single(identity(d).unscale(d as f64)).expect("maximally mixed state")
    }

    /// `|Ψ⟩⟨Ψ|/d` on `A⊗B` with `|Ψ⟩ = Σ_i |i⟩|i⟩`.
    pub fn max_entangled(d: usize) -> Self {
        let v = linalg::max_entangled_vector(d);
        Self::pure(&v, &[d, d]).expect("maximally entangled state")
    }

    /// Mark subsystems as classical after checking they are diagonal.
    pub fn with_classical(mut self, labels: &[&str]) -> Result<Self> {
        for l in labels {
            let k = self.index_of(l)?;
            let mass = off_diagonal_mass(&self.matrix, &self.dims, k);
            if mass > CTOL {
                return Err(Error::NotClassical { mass });
            }
            self.classical[k] = true;
        }
        Ok(self)
    }

    /// Replace the labels.
    pub fn relabel(mut self, labels: &[&str]) -> Result<Self> {
        if labels.len() != self.dims.len() {
            return Err(Error::DimensionMismatch("label count".into()));
        }
        let l: Vec<String> = labels.iter().map(|s| s.to_string()).collect();
        let mut u = l.clone();
        u.sort();
        u.dedup();
        if u.len() != l.len() {
            return Err(Error::InvalidState("duplicate labels".into()));
        }
        self.labels = l;
        Ok(self)
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMat {
        self.matrix
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn classical_mask(&self) -> &[bool] {
        &self.classical
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> f64 {
        tr(&self.matrix)
    }

    pub fn is_normalized(&self) -> bool {
        (self.trace() - 1.0).abs() <= TTOL
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::DimensionMismatch(format!("no subsystem labelled '{label}' in {:?}", self.labels)))
    }

    pub fn dim_of(&self, label: &str) -> Result<usize> {
        Ok(self.dims[self.index_of(label)?])
    }

    /// Reduced state on `keep`, with subsystems in the order given.
    pub fn marginal(&self, keep: &[&str]) -> Result<DensityOperator> {
        let idx: Vec<usize> = keep.iter().map(|l| self.index_of(l)).collect::<Result<_>>()?;
        let mut sorted = idx.clone();
        sorted.sort_unstable();
        let m = partial_trace(&self.matrix, &self.dims, &sorted)?;
        let sdims: Vec<usize> = sorted.iter().map(|&k| self.dims[k]).collect();
        let perm: Vec<usize> = idx.iter().map(|k| sorted.iter().position(|s| s == k).unwrap()).collect();
        let m = permute_subsystems(&m, &sdims, &perm)?;
        Ok(DensityOperator {
            matrix: m,
            dims: idx.iter().map(|&k| self.dims[k]).collect(),
            labels: idx.iter().map(|&k| self.labels[k].clone()).collect(),
            classical: idx.iter().map(|&k| self.classical[k]).collect(),
        })
    }

    /// Matrix on `A⊗B` for label groups `a` and `b` (everything else traced out),
    /// together with `(d_A, d_B)`.
    pub fn bipartite(&self, a: &[&str], b: &[&str]) -> Result<(CMat, usize, usize)> {
        if a.is_empty() {
            return Err(Error::DimensionMismatch("empty A part".into()));
        }
        let mut all: Vec<&str> = a.to_vec();
        all.extend_from_slice(b);
        let m = self.marginal(&all)?;
        let da: usize = m.dims[..a.len()].iter().product();
        let db: usize = m.dims[a.len()..].iter().product();
        Ok((m.matrix, da, db))
    }

    pub fn tensor(&self, other: &DensityOperator) -> Result<DensityOperator> {
        let mut labels = self.labels.clone();
        labels.extend(other.labels.iter().cloned());
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        let mut out = DensityOperator::new(kron(&self.matrix, &other.matrix), dims, labels)?;
        out.classical = self.classical.iter().chain(&other.classical).copied().collect();
        Ok(out)
    }

    /// Scale by `t` so that the result is subnormalized.
    pub fn scaled(&self, t: f64) -> Result<DensityOperator> {
        let mut out = DensityOperator::new(self.matrix.scale(t), self.dims.clone(), self.labels.clone())?;
        out.classical = self.classical.clone();
        Ok(out)
    }
}

/// Largest entry connecting different basis states of subsystem `k`.
pub fn off_diagonal_mass(m: &CMat, dims: &[usize], k: usize) -> f64 {
    let n = m.nrows();
    let stride: usize = dims[k + 1..].iter().product();
    let dk = dims[k];
    let mut mass: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            if (i / stride) % dk != (j / stride) % dk {
                mass = mass.max(m[(i, j)].norm());
            }
        }
    }
    mass
}

/// Trace-non-increasing completely positive map in Kraus form.
#[derive(Clone, Debug)]
pub struct Channel {
    kraus: Vec<CMat>,
    dim_in: usize,
    dim_out: usize,
    flags: ChannelFlags,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct ChannelFlags {
    pub trace_preserving: bool,
    pub trace_non_increasing: bool,
    pub unital: bool,
    pub sub_unital: bool,
}

fn loewner_flags(m: &CMat) -> (bool, bool) {
    // (m == id, m <= id)
    let d = m.nrows();
    let diff = identity(d) - m;
    let es = eigh(&diff);
    let eq = es.values.iter().all(|l| l.abs() <= TTOL);
    let le = es.lambda_min() >= -TTOL;
    (eq, le)
}

impl Channel {
    /// Build a channel from Kraus operators. The flags are computed, and the
    /// Kraus set is replaced by a minimal one from the Choi eigendecomposition.
    pub fn new(kraus: Vec<CMat>) -> Result<Self> {
        let first = kraus.first().ok_or_else(|| Error::InvalidChannel("no Kraus operators".into()))?;
        let (dim_out, dim_in) = first.shape();
        if kraus.iter().any(|k| k.shape() != (dim_out, dim_in)) {
            return Err(Error::InvalidChannel("Kraus operators differ in shape".into()));
        }
        if kraus.iter().any(|k| k.iter().any(|z| !z.re.is_finite() || !z.im.is_finite())) {
            return Err(Error::NonFinite);
        }
        let raw = Channel { kraus, dim_in, dim_out, flags: ChannelFlags::default() };
        let choi = choi_of_channel(&raw);
        let mut ch = channel_of_choi(&choi)?;
        ch.flags = compute_flags(&ch.kraus, dim_in, dim_out);
        if !ch.flags.trace_non_increasing {
            return Err(Error::InvalidChannel("sum of K^dagger K exceeds the identity".into()));
        }
        Ok(ch)
    }

    /// Keep the Kraus operators as given (flags still verified).
    pub fn from_kraus_unreduced(kraus: Vec<CMat>) -> Result<Self> {
        let first = kraus.first().ok_or_else(|| Error::InvalidChannel("no Kraus operators".into()))?;
        let (dim_out, dim_in) = first.shape();
        if kraus.iter().any(|k| k.shape() != (dim_out, dim_in)) {
            return Err(Error::InvalidChannel("Kraus operators differ in shape".into()));
        }
        let flags = compute_flags(&kraus, dim_in, dim_out);
        if !flags.trace_non_increasing {
            return Err(Error::InvalidChannel("sum of K^dagger K exceeds the identity".into()));
        }
        Ok(Channel { kraus, dim_in, dim_out, flags })
    }

    pub fn identity(d: usize) -> Self {
        Channel::from_kraus_unreduced(vec![identity(d)]).expect("identity channel")
    }

    pub fn unitary(u: CMat) -> Result<Self> {
        Channel::from_kraus_unreduced(vec![u])
    }

    /// `tr_B` as a channel `A⊗B → A`.
    pub fn partial_trace_second(da: usize, db: usize) -> Self {
        let ks = (0..db).map(|b| kron(&identity(da), &linalg::bra(db, b))).collect();
        Channel::from_kraus_unreduced(ks).expect("partial trace channel")
    }

    /// Completely depolarizing channel `ρ ↦ tr(ρ) id/d`.
    pub fn depolarizing_full(d: usize) -> Self {
        let mut ks = Vec::new();
        for i in 0..d {
            for j in 0..d {
                let mut k = zeros(d, d);
                k[(i, j)] = cr(1.0 / (d as f64).sqrt());
                ks.push(k);
            }
        }
        Channel::from_kraus_unreduced(ks).expect("depolarizing channel")
    }

    pub fn random(s: &mut linalg::Sampler, d_in: usize, d_out: usize, env: usize) -> Result<Self> {
        Channel::from_kraus_unreduced(s.cptp_kraus(d_in, d_out, env)?)
    }

    pub fn kraus(&self) -> &[CMat] {
        &self.kraus
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn flags(&self) -> ChannelFlags {
        self.flags
    }

    /// `Σ_k E_k ξ E_k†`.
    pub fn apply(&self, xi: &CMat) -> Result<CMat> {
        if xi.nrows() != self.dim_in || xi.ncols() != self.dim_in {
            return Err(Error::DimensionMismatch(format!(
                "channel input {} but operator is {}x{}",
                self.dim_in,
                xi.nrows(),
                xi.ncols()
            )));
        }
        let mut out = zeros(self.dim_out, self.dim_out);
        for k in &self.kraus {
            out += k * xi * k.adjoint();
        }
        Ok(out)
    }

    /// Adjoint map `Σ_k E_k† Y E_k`.
    pub fn apply_adjoint(&self, y: &CMat) -> Result<CMat> {
        if y.nrows() != self.dim_out {
            return Err(Error::DimensionMismatch("adjoint input size".into()));
        }
        let mut out = zeros(self.dim_in, self.dim_in);
        for k in &self.kraus {
            out += k.adjoint() * y * k;
        }
        Ok(out)
    }

    /// `id ⊗ ... ⊗ ℰ ⊗ ... ⊗ id` acting on subsystem `k` of an operator with the given dims.
    pub fn apply_on(&self, m: &CMat, dims: &[usize], k: usize) -> Result<CMat> {
        if k >= dims.len() || dims[k] != self.dim_in {
            return Err(Error::DimensionMismatch(format!(
                "channel input {} does not match subsystem {k} of {dims:?}",
                self.dim_in
            )));
        }
        let left: usize = dims[..k].iter().product();
        let right: usize = dims[k + 1..].iter().product();
        let n_out = left * self.dim_out * right;
        let mut out = zeros(n_out, n_out);
        for e in &self.kraus {
            let big = linalg::kron_all(&[identity(left), e.clone(), identity(right)]);
            out += &big * m * big.adjoint();
        }
        Ok(out)
    }

    /// Apply to the labelled subsystem of a state.
    pub fn apply_to(&self, rho: &DensityOperator, label: &str) -> Result<DensityOperator> {
        let k = rho.index_of(label)?;
        let m = self.apply_on(rho.matrix(), rho.dims(), k)?;
        let mut dims = rho.dims().to_vec();
        dims[k] = self.dim_out;
        DensityOperator::new(m, dims, rho.labels().to_vec())
    }

    /// Sequential composition: first `self`, then `next`.
    pub fn then(&self, next: &Channel) -> Result<Channel> {
        if next.dim_in != self.dim_out {
            return Err(Error::DimensionMismatch("composition".into()));
        }
        let mut ks = Vec::new();
        for b in &next.kraus {
            for a in &self.kraus {
                ks.push(b * a);
            }
        }
        Channel::new(ks)
    }
}

fn compute_flags(kraus: &[CMat], dim_in: usize, dim_out: usize) -> ChannelFlags {
    let mut s = zeros(dim_in, dim_in);
    let mut u = zeros(dim_out, dim_out);
    for k in kraus {
        s += k.adjoint() * k;
        u += k * k.adjoint();
    }
    let (tp, tni) = loewner_flags(&s);
    let (un, sub) = loewner_flags(&u);
    ChannelFlags { trace_preserving: tp, trace_non_increasing: tni, unital: un, sub_unital: sub }
}

/// Choi operator `γ = Σ_ij |i⟩⟨j| ⊗ ℰ(|i⟩⟨j|)` on `A'⊗B` (unnormalized).
#[derive(Clone, Debug)]
pub struct ChoiMatrix {
    pub matrix: CMat,
    pub dim_in: usize,
    pub dim_out: usize,
}

pub fn choi_of_channel(ch: &Channel) -> ChoiMatrix {
    let (di, dout) = (ch.dim_in, ch.dim_out);
    let mut g = zeros(di * dout, di * dout);
    for k in &ch.kraus {
        // vector (id ⊗ K)|Ψ⟩ has component (i, b) = K[b, i]
        let v = CVec::from_fn(di * dout, |r, _| k[(r % dout, r / dout)]);
        g += &v * v.adjoint();
    }
    ChoiMatrix { matrix: g, dim_in: di, dim_out: dout }
}

/// Minimal Kraus representation from a Choi operator.
pub fn channel_of_choi(choi: &ChoiMatrix) -> Result<Channel> {
    let (di, dout) = (choi.dim_in, choi.dim_out);
    if choi.matrix.nrows() != di * dout {
        return Err(Error::DimensionMismatch("Choi matrix size".into()));
    }
    check_hermitian(&choi.matrix)?;
    let es = eigh(&choi.matrix);
    let tol = linalg::PTOL * es.max_abs().max(1.0);
    if es.lambda_min() < -tol {
        return Err(Error::NotCp { min_eig: es.lambda_min() });
    }
    let thr = es.threshold().max(1e-14);
    let mut ks = Vec::new();
    for (k, &l) in es.values.iter().enumerate().rev() {
        if l > thr {
            let v = es.vectors.column(k);
            let s = l.sqrt();
            ks.push(CMat::from_fn(dout, di, |b, i| v[i * dout + b] * s));
        }
    }
    if ks.is_empty() {
        ks.push(zeros(dout, di));
    }
    let flags = compute_flags(&ks, di, dout);
    Ok(Channel { kraus: ks, dim_in: di, dim_out: dout, flags })
}

/// Stinespring operator `L = Σ_k E_k ⊗ |k⟩_env` (output ordered as `B⊗env`)
/// and the environment dimension.
pub fn stinespring(ch: &Channel) -> (CMat, usize) {
    let env = ch.kraus.len();
    let l = CMat::from_fn(ch.dim_out * env, ch.dim_in, |r, i| ch.kraus[r % env][(r / env, i)]);
    (l, env)
}

/// Finite POVM.
#[derive(Clone, Debug)]
pub struct Povm {
    effects: Vec<CMat>,
    labels: Vec<String>,
}

impl Povm {
    pub fn new(effects: Vec<CMat>) -> Result<Self> {
        let d = effects.first().map(|e| e.nrows()).ok_or_else(|| Error::InvalidPovm("no effects".into()))?;
        let mut sum = zeros(d, d);
        for e in &effects {
            check_hermitian(e)?;
            let es = eigh(e);
            if es.lambda_min() < -TTOL || es.lambda_max() > 1.0 + TTOL {
                return Err(Error::InvalidPovm("effect outside [0, id]".into()));
            }
            sum += e;
        }
        if linalg::max_abs(&(sum - identity(d))) > TTOL {
            return Err(Error::InvalidPovm("effects do not sum to the identity".into()));
        }
        let labels = (0..effects.len()).map(|i| i.to_string()).collect();
        Ok(Povm { effects, labels })
    }

    /// Rank-one projective measurement onto the columns of a unitary.
    pub fn from_basis(u: &CMat) -> Result<Self> {
        let d = u.nrows();
        let defect = linalg::max_abs(&(u.adjoint() * u - identity(d)));
        if u.ncols() != d || defect > 1e-10 {
            return Err(Error::BasisNotOrthonormal { defect });
        }
        Povm::new((0..d).map(|k| proj(&u.column(k).into_owned())).collect())
    }

    pub fn computational(d: usize) -> Self {
        Povm::from_basis(&identity(d)).expect("computational basis")
    }

    pub fn effects(&self) -> &[CMat] {
        &self.effects
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Born rule `tr(ρ M_x)` for every outcome.
    pub fn probabilities(&self, rho: &CMat) -> Vec<f64> {
        self.effects.iter().map(|e| linalg::tr_prod(rho, e)).collect()
    }
}

/// Measurement map `ρ ↦ Σ_x tr(ρ M_x) |x⟩⟨x|`.
pub fn measurement_channel(povm: &Povm) -> Channel {
    let d = povm.effects[0].nrows();
    let n = povm.effects.len();
    let mut ks = Vec::new();
    for (x, e) in povm.effects.iter().enumerate() {
        let es = eigh(e);
        for (k, &l) in es.values.iter().enumerate() {
            if l > 1e-15 {
                let v = es.vectors.column(k).into_owned();
                ks.push(ket(n, x) * v.adjoint().scale(l.sqrt()));
            }
        }
    }
    if ks.is_empty() {
        ks.push(zeros(n, d));
    }
    Channel::from_kraus_unreduced(ks).expect("measurement channel")
}

/// `Σ_x p_x |x⟩⟨x| ⊗ ρ̂(x)` on `X⊗E` with `X` marked classical.
pub fn cq_state(weights: &[f64], conditionals: &[CMat]) -> Result<DensityOperator> {
    if weights.len() != conditionals.len() || weights.is_empty() {
        return Err(Error::DimensionMismatch("weights and conditional states differ in length".into()));
    }
    if weights.iter().any(|&w| w < 0.0 || !w.is_finite()) {
        return Err(Error::InvalidState("negative weight".into()));
    }
    let s: f64 = weights.iter().sum();
    if s > 1.0 + TTOL {
        return Err(Error::InvalidState(format!("weights sum to {s}")));
    }
    let de = conditionals[0].nrows();
    let dx = weights.len();
    let mut m = zeros(dx * de, dx * de);
    for (x, (w, c)) in weights.iter().zip(conditionals).enumerate() {
        if c.nrows() != de {
            return Err(Error::DimensionMismatch("conditional states differ in size".into()));
        }
        if (tr(c) - 1.0).abs() > TTOL {
            return Err(Error::InvalidState("conditional state not normalized".into()));
        }
        m.view_mut((x * de, x * de), (de, de)).copy_from(&c.scale(*w));
    }
    DensityOperator::new(m, vec![dx, de], vec!["X".into(), "E".into()])?.with_classical(&["X"])
}

/// Inverse of [`cq_state`] for the labelled classical subsystem: weights and
/// normalized conditional states on the remaining subsystems (maximally mixed
/// where the weight vanishes).
pub fn cq_split(rho: &DensityOperator, classical: &str) -> Result<(Vec<f64>, Vec<CMat>)> {
    let k = rho.index_of(classical)?;
    let mass = off_diagonal_mass(rho.matrix(), rho.dims(), k);
    if mass > CTOL {
        return Err(Error::NotClassical { mass });
    }
    let mut order: Vec<usize> = vec![k];
    order.extend((0..rho.dims().len()).filter(|&j| j != k));
    let m = permute_subsystems(rho.matrix(), rho.dims(), &order)?;
    let dx = rho.dims()[k];
    let de = rho.dim() / dx;
    let mut w = Vec::with_capacity(dx);
    let mut cs = Vec::with_capacity(dx);
    for x in 0..dx {
        let block = m.view((x * de, x * de), (de, de)).into_owned();
        let p = tr(&block);
        w.push(p);
        if p > 0.0 {
            cs.push(block.unscale(p));
        } else {
            cs.push(identity(de).unscale(de as f64));
        }
    }
    Ok((w, cs))
}

/// Purification vector `Σ_k √λ_k |e_k⟩ ⊗ |k⟩` of a positive semidefinite matrix,
/// with the purifying dimension equal to the rank.
pub fn purification_vector(rho: &CMat) -> Result<(CVec, usize)> {
    check_hermitian(rho)?;
    let es = eigh(rho);
    check_psd_eig(&es)?;
    let d = rho.nrows();
    let thr = es.threshold();
    let keep: Vec<usize> = (0..d).rev().filter(|&k| es.values[k] > thr).collect();
    let r = keep.len().max(1);
    let mut v = CVec::zeros(d * r);
    for (pos, &k) in keep.iter().enumerate() {
        let s = es.values[k].sqrt();
        for i in 0..d {
            v[i * r + pos] = es.vectors[(i, k)] * s;
        }
    }
    Ok((v, r))
}

/// Rank-one state on `A⊗R` whose `A` marginal is `rho` (labels of `rho` plus `R`).
pub fn purify(rho: &DensityOperator) -> Result<DensityOperator> {
    let (v, r) = purification_vector(rho.matrix())?;
    let mut dims = rho.dims().to_vec();
    dims.push(r);
    let mut labels = rho.labels().to_vec();
    let mut name = "R".to_string();
    while labels.contains(&name) {
        name.push('\'');
    }
    labels.push(name);
    DensityOperator::new(proj(&v), dims, labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{real_matrix, Sampler};

    fn close(a: &CMat, b: &CMat, tol: f64) -> bool {
        (a - b).iter().all(|z| z.norm() <= tol)
    }

    #[test]
    fn purify_examples() {
        let p = purify(&DensityOperator::pure(&ket(2, 1), &[2]).unwrap()).unwrap();
        assert_eq!(p.dims(), &[2, 1]);
        let mm = purify(&DensityOperator::maximally_mixed(2)).unwrap();
        let me = DensityOperator::max_entangled(2);
        let f = linalg::tr_prod(mm.matrix(), me.matrix());
        assert!((f - 1.0).abs() < 1e-12);
        let mut s = Sampler::new(2);
        let rho = DensityOperator::single(s.density(4, 3).unwrap()).unwrap();
        let p = purify(&rho).unwrap();
        assert_eq!(p.dims(), &[4, 3]);
        assert!(close(p.marginal(&["A"]).unwrap().matrix(), rho.matrix(), 1e-12));
    }

    #[test]
    fn channel_basics() {
        let mut s = Sampler::new(4);
        let rho = s.full_density(2).unwrap();
        assert!(close(&Channel::identity(2).apply(&rho).unwrap(), &rho, 1e-15));
        let ch = Channel::random(&mut s, 2, 3, 2).unwrap();
        let out = ch.apply(&rho).unwrap();
        assert!((tr(&out) - 1.0).abs() < 1e-12);
        assert!(ch.flags().trace_preserving);
        let ab = kron(&rho, &s.full_density(3).unwrap());
        let pt = Channel::partial_trace_second(2, 3).apply(&ab).unwrap();
        assert!(close(&pt, &partial_trace(&ab, &[2, 3], &[0]).unwrap(), 1e-14));
    }

    #[test]
    fn choi_examples() {
        let g = choi_of_channel(&Channel::identity(2));
        assert!(close(&g.matrix, &proj(&linalg::max_entangled_vector(2)), 1e-15));
        let g = choi_of_channel(&Channel::depolarizing_full(2));
        assert!(close(&g.matrix, &identity(4).unscale(2.0), 1e-15));
        // transpose map: Choi is the swap operator
        let mut swap = zeros(4, 4);
        for i in 0..2 {
            for j in 0..2 {
                swap[(i * 2 + j, j * 2 + i)] = cr(1.0);
            }
        }
        let bad = ChoiMatrix { matrix: swap, dim_in: 2, dim_out: 2 };
        assert!(matches!(channel_of_choi(&bad), Err(Error::NotCp { .. })));
    }

    #[test]
    fn choi_roundtrip_and_flags() {
        let mut s = Sampler::new(8);
        let ch = Channel::random(&mut s, 3, 2, 3).unwrap();
        let back = channel_of_choi(&choi_of_channel(&ch)).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let mut e = zeros(3, 3);
                e[(i, j)] = cr(1.0);
                assert!(close(&ch.apply(&e).unwrap(), &back.apply(&e).unwrap(), 1e-12));
            }
        }
        let g = choi_of_channel(&ch);
        let tb = partial_trace(&g.matrix, &[3, 2], &[0]).unwrap();
        assert!(close(&tb, &identity(3), 1e-12));
    }

    #[test]
    fn stinespring_examples() {
        let mut s = Sampler::new(1);
        let u = s.haar_unitary(2).unwrap();
        let (l, env) = stinespring(&Channel::unitary(u.clone()).unwrap());
        assert_eq!(env, 1);
        assert!(close(&l, &u, 1e-15));
        let pr = proj(&ket(2, 0));
        let ch = Channel::from_kraus_unreduced(vec![pr.clone()]).unwrap();
        assert!(!ch.flags().trace_preserving && ch.flags().trace_non_increasing);
        let (l, _) = stinespring(&ch);
        assert!(close(&(l.adjoint() * &l), &pr, 1e-15));
        let povm = Povm::from_basis(&s.haar_unitary(2).unwrap()).unwrap();
        let (l, env) = stinespring(&measurement_channel(&povm));
        assert_eq!(env, 2);
        assert!(close(&(l.adjoint() * &l), &identity(2), 1e-12));
        // full-rank effects need one Kraus operator per eigenvector
        let povm = Povm::new(vec![diag2(0.3, 0.6), diag2(0.7, 0.4)]).unwrap();
        let (l, env) = stinespring(&measurement_channel(&povm));
        assert_eq!(env, 4);
        assert!(close(&(l.adjoint() * &l), &identity(2), 1e-12));
    }

    fn diag2(a: f64, b: f64) -> CMat {
        linalg::diag(&[a, b])
    }

    #[test]
    fn measurement_examples() {
        let p = [0.2, 0.5, 0.3];
        let m = measurement_channel(&Povm::computational(3));
        let out = m.apply(&linalg::diag(&p)).unwrap();
        assert!(close(&out, &linalg::diag(&p), 1e-15));
        let t = std::f64::consts::PI / 8.0;
        let u = real_matrix(&[&[t.cos(), -t.sin()], &[t.sin(), t.cos()]]);
        let povm = Povm::from_basis(&u).unwrap();
        let w = povm.probabilities(&proj(&ket(2, 0)));
        assert!((w[0] - t.cos().powi(2)).abs() < 1e-15 && (w[1] - t.sin().powi(2)).abs() < 1e-15);
        let ch = measurement_channel(&povm);
        assert!(ch.flags().unital);
    }

    #[test]
    fn cq_roundtrip() {
        let mut s = Sampler::new(12);
        let w = s.simplex(3);
        let cs: Vec<CMat> = (0..3).map(|_| s.full_density(2).unwrap()).collect();
        let rho = cq_state(&w, &cs).unwrap();
        let (w2, cs2) = cq_split(&rho, "X").unwrap();
        for k in 0..3 {
            assert!((w[k] - w2[k]).abs() < 1e-14);
            assert!(close(&cs[k], &cs2[k], 1e-14));
        }
        let single = cq_state(&[0.4], &[cs[0].clone()]).unwrap();
        assert!(close(single.matrix(), &cs[0].scale(0.4), 1e-15));
    }

    #[test]
    fn invalid_states_rejected() {
        assert!(DensityOperator::single(linalg::diag(&[0.7, 0.7])).is_err());
        assert!(DensityOperator::single(linalg::diag(&[1.2, -0.2])).is_err());
        let m = real_matrix(&[&[0.5, 0.5], &[0.5, 0.5]]);
        assert!(matches!(
            DensityOperator::single(m).unwrap().with_classical(&["A"]),
            Err(Error::NotClassical { .. })
        ));
    }

    #[test]
    fn marginal_reorders_by_label() {
        let mut s = Sampler::new(3);
        let a = s.full_density(2).unwrap();
        let b = s.full_density(3).unwrap();
        let st = DensityOperator::from_matrix(kron(&a, &b), &[2, 3]).unwrap();
        let ba = st.marginal(&["B", "A"]).unwrap();
        assert!(close(ba.matrix(), &kron(&b, &a), 1e-14));
        assert_eq!(ba.labels(), &["B".to_string(), "A".to_string()]);
    }
}
