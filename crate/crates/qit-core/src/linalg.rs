//! Dense complex linear algebra: Hermitian eigensystems, matrix functions on the
//! support, tensor products and partial operations, pinching, and seeded sampling.
//!
//! Matrices are `nalgebra::DMatrix<Complex<f64>>`. Tensor products use the
//! convention that the first factor is the most significant index, so the
//! basis vector `|a⟩⊗|b⟩` of `A⊗B` has index `a·d_B + b`.

use nalgebra::{Complex, DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

/// Absolute tolerance on `max |M − M†|` for Hermitian inputs.
pub const HTOL: f64 = 1e-10;
/// Eigenvalues at or below `KERNEL_REL · λ_max` are treated as kernel.
pub const KERNEL_REL: f64 = 1e-12;
/// Positivity tolerance, relative to `max(1, ‖M‖)`.
pub const PTOL: f64 = 1e-9;
/// Reconstruction / unitarity tolerance.
pub const RTOL: f64 = 1e-10;
/// Default relative gap for clustering eigenvalues when pinching.
pub const CLUSTER_REL: f64 = 1e-9;

pub fn c(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

pub fn cr(re: f64) -> C64 {
    Complex::new(re, 0.0)
}

pub fn identity(d: usize) -> CMat {
    CMat::identity(d, d)
}

pub fn zeros(r: usize, c: usize) -> CMat {
    CMat::zeros(r, c)
}

/// Real diagonal matrix.
pub fn diag(v: &[f64]) -> CMat {
    let mut m = zeros(v.len(), v.len());
    for (i, x) in v.iter().enumerate() {
        m[(i, i)] = cr(*x);
    }
    m
}

/// Build a real matrix from rows.
pub fn real_matrix(rows: &[&[f64]]) -> CMat {
    let r = rows.len();
    let c = if r == 0 { 0 } else { rows[0].len() };
    CMat::from_fn(r, c, |i, j| cr(rows[i][j]))
}

/// Standard basis vector `|i⟩` in dimension `d`.
pub fn ket(d: usize, i: usize) -> CVec {
    let mut v = CVec::zeros(d);
    v[i] = cr(1.0);
    v
}

/// `⟨i|` as a `1 × d` matrix.
pub fn bra(d: usize, i: usize) -> CMat {
    let mut m = zeros(1, d);
    m[(0, i)] = cr(1.0);
    m
}

/// Column vector as a `d × 1` matrix.
pub fn col(v: &CVec) -> CMat {
    CMat::from_fn(v.len(), 1, |i, _| v[i])
}

/// `|v⟩⟨v|`.
pub fn proj(v: &CVec) -> CMat {
    v * v.adjoint()
}

/// Unnormalized maximally entangled vector `Σ_i |i⟩|i⟩`.
pub fn max_entangled_vector(d: usize) -> CVec {
    let mut v = CVec::zeros(d * d);
    for i in 0..d {
        v[i * d + i] = cr(1.0);
    }
    v
}

pub fn trace(m: &CMat) -> C64 {
    m.diagonal().iter().sum()
}

/// Real part of the trace.
pub fn tr(m: &CMat) -> f64 {
    trace(m).re
}

/// `Re tr(A B)` without forming the product.
pub fn tr_prod(a: &CMat, b: &CMat) -> f64 {
    let n = a.nrows();
    let mut s = 0.0;
    for i in 0..n {
        for k in 0..a.ncols() {
            let x = a[(i, k)];
            let y = b[(k, i)];
            s += x.re * y.re - x.im * y.im;
        }
    }
    s
}

/// Largest absolute entry.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// `max |M − M†|` entrywise.
pub fn hermiticity_defect(m: &CMat) -> f64 {
    if m.nrows() != m.ncols() {
        return f64::INFINITY;
    }
    let n = m.nrows();
    let mut d: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            d = d.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    d
}

pub fn hermitize(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

pub fn check_hermitian(m: &CMat) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "expected a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    let d = hermiticity_defect(m);
    if d > HTOL {
        return Err(Error::NonHermitian { defect: d });
    }
    Ok(())
}

/// Spectral decomposition of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct EigenSystem {
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, in the order of `values`.
    pub vectors: CMat,
    /// `true` where `|λ|` exceeds the kernel threshold.
    pub support: Vec<bool>,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |a, &b| a.max(b.abs()))
    }

    pub fn lambda_max(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    pub fn lambda_min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn threshold(&self) -> f64 {
        KERNEL_REL * self.max_abs()
    }

    pub fn rank(&self) -> usize {
        self.support.iter().filter(|&&s| s).count()
    }

    /// `Σ w_k |e_k⟩⟨e_k|` for the given weights.
    pub fn compose(&self, w: &[f64]) -> CMat {
        let n = self.dim();
        let mut scaled = self.vectors.clone();
        for (k, wk) in w.iter().enumerate() {
            scaled.column_mut(k).scale_mut(*wk);
        }
        let mut out = &scaled * self.vectors.adjoint();
        // keep exact hermiticity
        for i in 0..n {
            out[(i, i)].im = 0.0;
            for j in (i + 1)..n {
                let z = (out[(i, j)] + out[(j, i)].conj()) * 0.5;
                out[(i, j)] = z;
                out[(j, i)] = z.conj();
            }
        }
        out
    }

    /// `Σ_{λ in support} f(λ) |e⟩⟨e|`.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> CMat {
        let w: Vec<f64> = self
            .values
            .iter()
            .zip(&self.support)
            .map(|(&l, &s)| if s { f(l) } else { 0.0 })
            .collect();
        self.compose(&w)
    }

    /// `Σ_k f(λ_k) |e_k⟩⟨e_k|` over every eigenvalue.
    pub fn apply_all(&self, f: impl Fn(f64) -> f64) -> CMat {
        let w: Vec<f64> = self.values.iter().map(|&l| f(l)).collect();
        self.compose(&w)
    }

    /// Projector onto the support.
    pub fn support_projector(&self) -> CMat {
        self.apply(|_| 1.0)
    }

    pub fn reconstruct(&self) -> CMat {
        self.compose(&self.values)
    }
}

fn canonical_phase(v: &mut CVec) {
    if let Some(z) = v.iter().find(|z| z.norm() > 1e-8).copied() {
        let ph = z.conj() / z.norm();
        for x in v.iter_mut() {
            *x *= ph;
        }
    }
}

/// Eigendecomposition of a matrix assumed Hermitian (it is symmetrized first).
pub fn eigh(m: &CMat) -> EigenSystem {
    let n = m.nrows();
    if n == 0 {
        return EigenSystem { values: vec![], vectors: zeros(0, 0), support: vec![] };
    }
    let h = hermitize(m);
    let se = h.symmetric_eigen();
    let mut cols: Vec<(f64, CVec)> = (0..n)
        .map(|k| {
            let mut v: CVec = se.eigenvectors.column(k).into_owned();
            canonical_phase(&mut v);
            (se.eigenvalues[k], v)
        })
        .collect();
    let scale = cols.iter().fold(0.0f64, |a, (l, _)| a.max(l.abs())).max(1e-300);
    cols.sort_by(|(la, va), (lb, vb)| {
        if (la - lb).abs() > 1e-14 * scale {
            return la.total_cmp(lb);
        }
        for (x, y) in va.iter().zip(vb.iter()) {
            let o = x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im));
            if (x - y).norm() > 1e-12 && o != std::cmp::Ordering::Equal {
                return o;
            }
        }
        std::cmp::Ordering::Equal
    });
    let values: Vec<f64> = cols.iter().map(|(l, _)| *l).collect();
    let mut vectors = zeros(n, n);
    for (k, (_, v)) in cols.iter().enumerate() {
        vectors.set_column(k, v);
    }
    let thr = KERNEL_REL * scale;
    let support = values.iter().map(|l| l.abs() > thr).collect();
    EigenSystem { values, vectors, support }
}

/// Checked eigendecomposition.
pub fn eig_hermitian(m: &CMat) -> Result<EigenSystem> {
    check_hermitian(m)?;
    Ok(eigh(m))
}

fn psd_tol(es: &EigenSystem) -> f64 {
    PTOL * es.max_abs().max(1.0)
}

/// Fails unless the eigenvalues are all `≥ −PTOL·max(1, ‖M‖)`.
pub fn check_psd_eig(es: &EigenSystem) -> Result<()> {
    let lmin = es.lambda_min();
    if lmin < -psd_tol(es) {
        return Err(Error::NotPsd { min_eig: lmin });
    }
    Ok(())
}

pub fn is_psd(m: &CMat) -> bool {
    check_hermitian(m).is_ok() && check_psd_eig(&eigh(m)).is_ok()
}

/// `f(M)` for positive semidefinite `M`, ignoring the kernel.
pub fn apply_matrix_function(m: &CMat, f: impl Fn(f64) -> f64) -> Result<CMat> {
    let es = eig_hermitian(m)?;
    check_psd_eig(&es)?;
    for (l, s) in es.values.iter().zip(&es.support) {
        if *s && !f(*l).is_finite() {
            return Err(Error::FunctionDomain(format!("f({l}) is not finite")));
        }
    }
    Ok(es.apply(f))
}

/// `M^p` on the support of a positive semidefinite matrix (negative eigenvalues
/// within tolerance are treated as kernel).
pub fn psd_power(m: &CMat, p: f64) -> CMat {
    let es = eigh(m);
    psd_power_es(&es, p)
}

pub fn psd_power_es(es: &EigenSystem, p: f64) -> CMat {
    let thr = es.threshold();
    let w: Vec<f64> = es.values.iter().map(|&l| if l > thr { l.powf(p) } else { 0.0 }).collect();
    es.compose(&w)
}

pub fn psd_sqrt(m: &CMat) -> CMat {
    psd_power(m, 0.5)
}

/// `f(H)` applied to every eigenvalue of a Hermitian matrix.
pub fn hermitian_fn(m: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    eigh(m).apply_all(f)
}

/// Moore-Penrose inverse of a Hermitian matrix.
pub fn generalized_inverse(m: &CMat) -> Result<CMat> {
    let es = eig_hermitian(m)?;
    Ok(es.apply(|l| 1.0 / l))
}

pub fn support_projector(m: &CMat) -> CMat {
    let es = eigh(m);
    let thr = es.threshold();
    let w: Vec<f64> = es.values.iter().map(|&l| if l > thr { 1.0 } else { 0.0 }).collect();
    es.compose(&w)
}

/// Support projector of a Hermitian matrix (eigenvalues with `|λ|` above the threshold).
pub fn hermitian_support(m: &CMat) -> CMat {
    eigh(m).support_projector()
}

/// `A ≪ B`: the kernel of `B` is contained in the kernel of `A`.
pub fn dominated(a: &CMat, b: &CMat) -> Result<bool> {
    check_hermitian(a)?;
    check_hermitian(b)?;
    let pb = hermitian_support(b);
    let k = identity(b.nrows()) - pb;
    let leak = (a * &k).norm();
    Ok(leak <= 1e-9 * a.norm().max(1e-300))
}

/// `A ⊥ B`: the supports are orthogonal.
pub fn orthogonal(a: &CMat, b: &CMat) -> Result<bool> {
    check_hermitian(a)?;
    check_hermitian(b)?;
    let pa = hermitian_support(a);
    let pb = hermitian_support(b);
    Ok((pa * pb).norm() <= 1e-9)
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn kron_all(ms: &[CMat]) -> CMat {
    let mut out = CMat::identity(1, 1);
    for m in ms {
        out = out.kronecker(m);
    }
    out
}

pub fn kron_vec(a: &CVec, b: &CVec) -> CVec {
    a.kronecker(b)
}

/// `M^{⊗n}`.
pub fn tensor_power(m: &CMat, n: usize) -> CMat {
    let mut out = CMat::identity(1, 1);
    for _ in 0..n {
        out = out.kronecker(m);
    }
    out
}

fn check_dims(m: &CMat, dims: &[usize]) -> Result<()> {
    let n: usize = dims.iter().product();
    if m.nrows() != n || m.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "matrix is {}x{} but subsystem dimensions {:?} multiply to {}",
            m.nrows(),
            m.ncols(),
            dims,
            n
        )));
    }
    Ok(())
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

/// Global index from a multi-index.
fn compose_index(digits: &[usize], st: &[usize]) -> usize {
    digits.iter().zip(st).map(|(d, s)| d * s).sum()
}

fn digits_of(mut idx: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for k in (0..dims.len()).rev() {
        out[k] = idx % dims[k];
        idx /= dims[k];
    }
    out
}

/// Partial trace keeping the subsystems listed in `keep` (in their original order).
pub fn partial_trace(m: &CMat, dims: &[usize], keep: &[usize]) -> Result<CMat> {
    check_dims(m, dims)?;
    let mut keep_sorted: Vec<usize> = keep.to_vec();
    keep_sorted.sort_unstable();
    keep_sorted.dedup();
    if keep_sorted.iter().any(|&k| k >= dims.len()) {
        return Err(Error::DimensionMismatch(format!("subsystem index out of range in {keep:?}")));
    }
    let traced: Vec<usize> = (0..dims.len()).filter(|k| !keep_sorted.contains(k)).collect();
    let kd: Vec<usize> = keep_sorted.iter().map(|&k| dims[k]).collect();
    let td: Vec<usize> = traced.iter().map(|&k| dims[k]).collect();
    let dk: usize = kd.iter().product();
    let dt: usize = td.iter().product();
    let st = strides(dims);
    let mut table = vec![0usize; dk * dt];
    for ik in 0..dk {
        let a = digits_of(ik, &kd);
        for t in 0..dt {
            let b = digits_of(t, &td);
            let mut g = 0;
            for (pos, &k) in keep_sorted.iter().enumerate() {
                g += a[pos] * st[k];
            }
            for (pos, &k) in traced.iter().enumerate() {
                g += b[pos] * st[k];
            }
            table[ik * dt + t] = g;
        }
    }
    let mut out = zeros(dk, dk);
    for i in 0..dk {
        for j in 0..dk {
            let mut s = cr(0.0);
            for t in 0..dt {
                s += m[(table[i * dt + t], table[j * dt + t])];
            }
            out[(i, j)] = s;
        }
    }
    Ok(out)
}

/// Reorder subsystems: output subsystem `k` is input subsystem `perm[k]`.
pub fn permute_subsystems(m: &CMat, dims: &[usize], perm: &[usize]) -> Result<CMat> {
    check_dims(m, dims)?;
    let mut seen = perm.to_vec();
    seen.sort_unstable();
    if seen != (0..dims.len()).collect::<Vec<_>>() {
        return Err(Error::DimensionMismatch(format!("{perm:?} is not a permutation")));
    }
    let map = permutation_map(dims, perm);
    let n = m.nrows();
    Ok(CMat::from_fn(n, n, |i, j| m[(map[i], map[j])]))
}

/// Permute the tensor factors of a vector.
pub fn permute_vector(v: &CVec, dims: &[usize], perm: &[usize]) -> CVec {
    let map = permutation_map(dims, perm);
    CVec::from_fn(v.len(), |i, _| v[map[i]])
}

fn permutation_map(dims: &[usize], perm: &[usize]) -> Vec<usize> {
    let new_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let st = strides(dims);
    let n: usize = dims.iter().product();
    (0..n)
        .map(|i| {
            let d = digits_of(i, &new_dims);
            let mut g = 0;
            for (pos, &p) in perm.iter().enumerate() {
                g += d[pos] * st[p];
            }
            g
        })
        .collect()
}

/// Partial transpose on subsystem `sys`.
pub fn partial_transpose(m: &CMat, dims: &[usize], sys: usize) -> Result<CMat> {
    check_dims(m, dims)?;
    if sys >= dims.len() {
        return Err(Error::DimensionMismatch(format!("no subsystem {sys}")));
    }
    let st = strides(dims);
    let n = m.nrows();
    let s = st[sys];
    let ds = dims[sys];
    Ok(CMat::from_fn(n, n, |i, j| {
        let di = (i / s) % ds;
        let dj = (j / s) % ds;
        let i2 = i - di * s + dj * s;
        let j2 = j - dj * s + di * s;
        m[(i2, j2)]
    }))
}

/// Schmidt decomposition of a bipartite vector: descending coefficients
/// `λ_k` (squared singular values, summing to `⟨v|v⟩`) and the two bases.
pub fn schmidt_decompose(v: &CVec, dims: (usize, usize)) -> Result<(Vec<f64>, CMat, CMat)> {
    let (da, db) = dims;
    if v.len() != da * db {
        return Err(Error::DimensionMismatch(format!(
            "vector of length {} does not match {da}x{db}",
            v.len()
        )));
    }
    let m = CMat::from_fn(da, db, |a, b| v[a * db + b]);
    let svd = m.svd(true, true);
    let u = svd.u.expect("svd u");
    let vt = svd.v_t.expect("svd v_t");
    let k = svd.singular_values.len();
    let mut idx: Vec<usize> = (0..k).collect();
    idx.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let coeffs: Vec<f64> = idx.iter().map(|&i| svd.singular_values[i].powi(2)).collect();
    let mut left = zeros(da, k);
    let mut right = zeros(db, k);
    for (pos, &i) in idx.iter().enumerate() {
        left.set_column(pos, &u.column(i));
        right.set_column(pos, &vt.row(i).transpose());
    }
    Ok((coeffs, left, right))
}

/// Distinct eigenvalues of `H` (single-linkage clusters with gap
/// `≤ cluster_rel·‖H‖`) and the matching spectral projectors.
pub fn distinct_spectrum(h: &CMat, cluster_rel: f64) -> Result<Vec<(f64, CMat)>> {
    let es = eig_hermitian(h)?;
    let n = es.dim();
    let gap = cluster_rel * es.max_abs().max(1e-300);
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for k in 0..n {
        match groups.last_mut() {
            Some(g) if es.values[k] - es.values[*g.last().unwrap()] <= gap => g.push(k),
            _ => groups.push(vec![k]),
        }
    }
    Ok(groups
        .into_iter()
        .map(|g| {
            let mean = g.iter().map(|&k| es.values[k]).sum::<f64>() / g.len() as f64;
            let mut p = zeros(n, n);
            for &k in &g {
                let v = es.vectors.column(k);
                p += &v * v.adjoint();
            }
            (mean, p)
        })
        .collect())
}

/// Pinching map `Σ_λ P_λ M P_λ` for the spectral projectors of `H`.
pub fn pinch(h: &CMat, m: &CMat, cluster_rel: f64) -> Result<CMat> {
    if m.nrows() != h.nrows() || m.ncols() != h.ncols() {
        return Err(Error::DimensionMismatch("pinch: H and M differ in size".into()));
    }
    let ps = distinct_spectrum(h, cluster_rel)?;
    let mut out = zeros(m.nrows(), m.ncols());
    for (_, p) in &ps {
        out += p * m * p;
    }
    Ok(out)
}

/// Seeded sampler. The generator is ChaCha20 seeded with `seed_from_u64`;
/// complex Gaussians are `(x + i y)/√2` with `x, y` drawn from the standard
/// normal distribution of `rand_distr`, real part first, filling matrices
/// column by column.
pub struct Sampler {
    rng: ChaCha20Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler { rng: ChaCha20Rng::seed_from_u64(seed) }
    }

    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn below(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }

    pub fn normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    pub fn complex_normal(&mut self) -> C64 {
        let x: f64 = self.normal();
        let y: f64 = self.normal();
        c(x, y) * std::f64::consts::FRAC_1_SQRT_2
    }

    pub fn gaussian_matrix(&mut self, r: usize, cols: usize) -> CMat {
        let mut m = zeros(r, cols);
        for j in 0..cols {
            for i in 0..r {
                m[(i, j)] = self.complex_normal();
            }
        }
        m
    }

    /// Haar-random isometry `d_in → d_out` (columns orthonormal).
    pub fn haar_isometry(&mut self, d_in: usize, d_out: usize) -> Result<CMat> {
        if d_in == 0 || d_in > d_out {
            return Err(Error::BadDims(format!("isometry {d_in} -> {d_out}")));
        }
        let z = self.gaussian_matrix(d_out, d_in);
        let qr = z.qr();
        let mut q = qr.q();
        let r = qr.r();
        for k in 0..d_in {
            let rk = r[(k, k)];
            let ph = if rk.norm() > 0.0 { rk / rk.norm() } else { cr(1.0) };
            let mut col = q.column_mut(k);
            col *= ph;
        }
        Ok(q)
    }

    pub fn haar_unitary(&mut self, d: usize) -> Result<CMat> {
        self.haar_isometry(d, d)
    }

    /// Uniformly random unit vector.
    pub fn pure_vector(&mut self, d: usize) -> Result<CVec> {
        if d == 0 {
            return Err(Error::BadDims("dimension 0".into()));
        }
        let g = self.gaussian_matrix(d, 1);
        let n = g.norm();
        Ok(CVec::from_fn(d, |i, _| g[(i, 0)] / n))
    }

    /// `GG†/tr(GG†)` with `G` a `d × rank` complex Gaussian matrix.
    pub fn density(&mut self, d: usize, rank: usize) -> Result<CMat> {
        if d == 0 || rank == 0 || rank > d {
            return Err(Error::BadDims(format!("density of dimension {d} and rank {rank}")));
        }
        let g = self.gaussian_matrix(d, rank);
        let m = &g * g.adjoint();
        let t = tr(&m);
        Ok(hermitize(&m.unscale(t)))
    }

    /// Full-rank random density matrix.
    pub fn full_density(&mut self, d: usize) -> Result<CMat> {
        self.density(d, d)
    }

    /// Random probability vector (normalized exponential weights).
    pub fn simplex(&mut self, d: usize) -> Vec<f64> {
        let w: Vec<f64> = (0..d).map(|_| -(1.0 - self.uniform()).ln()).collect();
        let s: f64 = w.iter().sum();
        w.into_iter().map(|x| x / s).collect()
    }

    /// Kraus operators of a random channel `d_in → d_out` obtained from a Haar
    /// isometry `d_in → d_out·env` followed by tracing out the environment.
    pub fn cptp_kraus(&mut self, d_in: usize, d_out: usize, env: usize) -> Result<Vec<CMat>> {
        if d_out * env < d_in {
            return Err(Error::BadDims(format!(
                "environment {env} too small for a channel {d_in} -> {d_out}"
            )));
        }
        let v = self.haar_isometry(d_in, d_out * env)?;
        Ok((0..env)
            .map(|e| CMat::from_fn(d_out, d_in, |i, j| v[(i * env + e, j)]))
            .collect())
    }
}

/// Ordered index list `0..n` split as digits; exposed for tensor-index bookkeeping.
pub fn multi_index(idx: usize, dims: &[usize]) -> Vec<usize> {
    digits_of(idx, dims)
}

pub fn flat_index(digits: &[usize], dims: &[usize]) -> usize {
    compose_index(digits, &strides(dims))
}
