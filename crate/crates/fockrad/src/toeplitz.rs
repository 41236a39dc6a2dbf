//! Multi-Toeplitz polynomial operators on `P_q ⊗ C^d`: assembly, positivity, factorization
//! `P = Θ^*Θ` with `Θ` multi-analytic, the explicit dilation built from the factor, and
//! the coefficient bounds that positivity forces.
//!
//! Labeling: the kernel block at `(β, γ)` is `A_σ` when `γ = βσ`, `A_0` on the diagonal and
//! `A_σ^*` when `β = γσ`. The factor `Θ` sends `e_x ⊗ h` to `Σ_δ e_{xδ} ⊗ Φ_δ h`, so
//! `A_σ = Σ_ε Φ_{σε}^* Φ_ε`.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{cholesky, eigh, eigvalsh, op_norm, CMatrix, SeededRng, C64};
use crate::radii;
use crate::tuple::OperatorTuple;
use crate::words::{fock_dim, FockBasis, Word};

/// Relative positivity tolerance on the smallest eigenvalue.
pub const POSITIVITY_TOL: f64 = 1e-10;
/// Relative reconstruction residual a factorization must reach.
pub const FACTOR_TOL: f64 = 1e-8;
/// Size of the assembled matrix used to seed the factorization.
const SEED_DIM: usize = 480;
const LM_MAX_ITER: usize = 400;

#[derive(Clone, Debug)]
pub struct MultiToeplitzPoly {
    n: usize,
    m: usize,
    d: usize,
    a0: CMatrix,
    coeffs: Vec<(Word, CMatrix)>,
    index: HashMap<Word, usize>,
}

fn graded(a: &Word, b: &Word) -> std::cmp::Ordering {
    a.len().cmp(&b.len()).then_with(|| a.cmp(b))
}

impl MultiToeplitzPoly {
    /// Coefficients live on words of length `1..=m-1`; missing words are zero.
    pub fn new(n: usize, m: usize, a0: CMatrix, coeffs: Vec<(Word, CMatrix)>) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::InvalidInput("n and m must be at least 1".into()));
        }
        if !a0.is_square() {
            return Err(Error::NotSquare { rows: a0.rows(), cols: a0.cols() });
        }
        let d = a0.rows();
        if d == 0 {
            return Err(Error::Shape("coefficient dimension must be positive".into()));
        }
        let defect = a0.hermitian_defect();
        if defect > 1e-10 * a0.frob_norm().max(1.0) {
            return Err(Error::NotHermitian { defect });
        }
        let a0 = a0.hermitian_part();
        let mut index = HashMap::new();
        let mut list = Vec::with_capacity(coeffs.len());
        for (w, a) in coeffs {
            if w.is_empty() || w.len() >= m {
                return Err(Error::InvalidInput(format!("coefficient word {w} must have length 1..={}", m - 1)));
            }
            if w.max_letter() as usize > n {
                return Err(Error::InvalidInput(format!("word {w} uses a generator beyond n = {n}")));
            }
            if a.rows() != d || a.cols() != d {
                return Err(Error::Shape(format!("coefficient {w} is {}x{}, expected {d}x{d}", a.rows(), a.cols())));
            }
            if !a.is_finite() {
                return Err(Error::NonFinite(format!("coefficient {w}")));
            }
            if index.insert(w.clone(), 0).is_some() {
                return Err(Error::InvalidInput(format!("coefficient {w} given twice")));
            }
            list.push((w, a));
        }
        list.sort_by(|a, b| graded(&a.0, &b.0));
        let index = list.iter().enumerate().map(|(i, (w, _))| (w.clone(), i)).collect();
        Ok(MultiToeplitzPoly { n, m, d, a0, coeffs: list, index })
    }

    /// Scalar polynomial `a_0 + Σ a_α` (with `d = 1`).
    pub fn scalar(n: usize, m: usize, a0: f64, coeffs: &[(Word, C64)]) -> Result<Self> {
        let list = coeffs.iter().map(|(w, z)| (w.clone(), CMatrix::scalar(1, *z))).collect();
        Self::new(n, m, CMatrix::scalar(1, C64::new(a0, 0.0)), list)
    }

    pub fn identity(n: usize, m: usize, d: usize) -> Self {
        Self::new(n, m, CMatrix::identity(d), Vec::new()).expect("identity is valid")
    }

    /// The kernel `ρ I` on the diagonal and `T_α` on words of length `1..=q`.
    pub fn from_tuple_kernel(t: &OperatorTuple, rho: f64, q: usize) -> Result<Self> {
        let basis = FockBasis::enumerate(t.n(), q)?;
        let coeffs = basis.words()[1..].iter().map(|w| (w.clone(), t.product(w))).collect();
        Self::new(t.n(), q + 1, CMatrix::scalar(t.dim(), C64::new(rho, 0.0)), coeffs)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn a0(&self) -> &CMatrix {
        &self.a0
    }

    pub fn coefficients(&self) -> &[(Word, CMatrix)] {
        &self.coeffs
    }

    pub fn coefficient(&self, w: &Word) -> Option<&CMatrix> {
        if w.is_empty() {
            return Some(&self.a0);
        }
        self.index.get(w).map(|&i| &self.coeffs[i].1)
    }

    /// Coefficients of the words of length exactly `k`, zero where absent.
    pub fn level(&self, k: usize) -> Result<Vec<CMatrix>> {
        let basis = FockBasis::enumerate(self.n, k)?;
        Ok(basis
            .words()
            .get(basis.level(k))
            .unwrap_or(&[])
            .iter()
            .map(|w| self.coefficient(w).cloned().unwrap_or_else(|| CMatrix::zeros(self.d, self.d)))
            .collect())
    }

    /// `(‖A_0‖_F² + Σ ‖A_α‖_F²)^{1/2}`.
    pub fn frob_norm(&self) -> f64 {
        let s: f64 = self.coeffs.iter().map(|(_, a)| a.frob_norm().powi(2)).sum();
        (s + self.a0.frob_norm().powi(2)).sqrt()
    }

    /// Relative Frobenius distance between two polynomials over all words.
    pub fn relative_distance(&self, other: &MultiToeplitzPoly) -> f64 {
        let mut s = self.a0.sub(&other.a0).frob_norm().powi(2);
        for (w, a) in &self.coeffs {
            let b = other.coefficient(w);
            s += match b {
                Some(b) => a.sub(b).frob_norm().powi(2),
                None => a.frob_norm().powi(2),
            };
        }
        for (w, b) in &other.coeffs {
            if self.coefficient(w).is_none() {
                s += b.frob_norm().powi(2);
            }
        }
        s.sqrt() / self.frob_norm().max(f64::MIN_POSITIVE)
    }

    /// Congruence `A ↦ C A C` applied to every coefficient.
    fn congruence(&self, c: &CMatrix) -> Self {
        let a0 = c.matmul(&self.a0).matmul(c).hermitian_part();
        let coeffs = self.coeffs.iter().map(|(w, a)| (w.clone(), c.matmul(a).matmul(c))).collect();
        Self::new(self.n, self.m, a0, coeffs).expect("congruence keeps the shape")
    }
}

/// Multi-analytic polynomial `Θ = Σ_δ R_δ ⊗ Φ_δ`, coefficients on words of length `≤ m-1`
/// stored in graded order.
#[derive(Clone, Debug)]
pub struct MAFactor {
    pub n: usize,
    pub m: usize,
    pub d: usize,
    basis: FockBasis,
    pub phi: Vec<CMatrix>,
}

impl MAFactor {
    pub fn new(n: usize, m: usize, phi: Vec<CMatrix>) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidInput("m must be at least 1".into()));
        }
        let basis = FockBasis::enumerate(n, m - 1)?;
        if phi.len() != basis.len() {
            return Err(Error::Shape(format!("factor needs {} coefficients, got {}", basis.len(), phi.len())));
        }
        let d = phi[0].rows();
        if phi.iter().any(|p| p.rows() != d || p.cols() != d) {
            return Err(Error::Shape("factor coefficients must share a square shape".into()));
        }
        Ok(MAFactor { n, m, d, basis, phi })
    }

    /// Standard Gaussian coefficients scaled by `scale`.
    pub fn random(rng: &mut SeededRng, n: usize, m: usize, d: usize, scale: f64) -> Result<Self> {
        let len = fock_dim(n, m - 1).unwrap_or(usize::MAX);
        let phi = (0..len).map(|_| crate::matrix::gaussian_matrix(rng, d, d).scale_real(scale)).collect();
        Self::new(n, m, phi)
    }

    pub fn words(&self) -> &[Word] {
        self.basis.words()
    }

    pub fn coefficient(&self, w: &Word) -> Option<&CMatrix> {
        self.basis.position(w).map(|p| &self.phi[p])
    }

    /// Position of `σε` from the positions of `σ` and `ε`, when it fits.
    fn concat_pos(&self, sigma: usize, eps: usize) -> Option<usize> {
        let mut p = sigma;
        for &l in self.basis.word(eps).letters() {
            p = self.basis.right_mul(l, p)?;
        }
        Some(p)
    }

    /// Coefficients of `Θ^*Θ`: `A_σ = Σ_ε Φ_{σε}^* Φ_ε`.
    pub fn multiply(&self) -> MultiToeplitzPoly {
        let len = self.basis.len();
        let mut a = vec![CMatrix::zeros(self.d, self.d); len];
        for (s, acc) in a.iter_mut().enumerate() {
            for e in 0..len {
                if let Some(se) = self.concat_pos(s, e) {
                    *acc = acc.add(&self.phi[se].adj_mul(&self.phi[e]));
                }
            }
        }
        let a0 = a[0].clone();
        let coeffs = self.basis.words()[1..].iter().cloned().zip(a.into_iter().skip(1)).collect();
        MultiToeplitzPoly::new(self.n, self.m, a0, coeffs).expect("product of a factor is a valid polynomial")
    }

    /// Left multiplication of every coefficient by `u`.
    fn left_mul(&mut self, u: &CMatrix) {
        for p in &mut self.phi {
            *p = u.matmul(p);
        }
    }
}

/// Hermitian matrix of the polynomial compressed to `P_q ⊗ C^d`, basis-major blocks.
pub fn assemble(p: &MultiToeplitzPoly, q: usize) -> Result<CMatrix> {
    if q + 1 < p.m {
        return Err(Error::InvalidInput(format!("q = {q} is below m - 1 = {}", p.m - 1)));
    }
    let basis = FockBasis::enumerate(p.n, q)?;
    let d = p.d;
    let dim = basis.len().checked_mul(d).unwrap_or(usize::MAX);
    let mut mat = CMatrix::try_zeros(dim, dim)?;
    for b in 0..basis.len() {
        mat.set_block(b * d, b * d, &p.a0);
    }
    for (w, a) in &p.coeffs {
        let adj = a.adjoint();
        for b in 0..basis.len() {
            if basis.word(b).len() + w.len() > q {
                break;
            }
            let mut g = b;
            for &l in w.letters() {
                g = basis.right_mul(l, g).expect("length checked");
            }
            mat.set_block(b * d, g * d, a);
            mat.set_block(g * d, b * d, &adj);
        }
    }
    Ok(mat)
}

#[derive(Clone, Debug, Serialize)]
pub struct Positivity {
    pub positive: bool,
    /// Smallest eigenvalue of the assembled matrix.
    pub margin: f64,
    pub q: usize,
    pub norm: f64,
}

pub fn is_positive(p: &MultiToeplitzPoly, q: usize) -> Result<Positivity> {
    let mat = assemble(p, q)?;
    let ev = eigvalsh(&mat);
    let margin = ev[0];
    let norm = ev[0].abs().max(ev[ev.len() - 1].abs());
    Ok(Positivity { positive: margin >= -POSITIVITY_TOL * norm.max(f64::MIN_POSITIVE), margin, q, norm })
}

#[derive(Clone, Debug)]
pub struct Factorization {
    pub factor: MAFactor,
    /// `‖Θ^*Θ − P‖ / ‖P‖` over all coefficients.
    pub residual: f64,
    pub iterations: usize,
    /// Truncation used to seed the refinement.
    pub seed_q: usize,
}

/// Writes `P = Θ^*Θ` with `Θ` multi-analytic of degree `≤ m-1`.
///
/// A reverse Cholesky factorization `M = X^*X` (X lower triangular in the graded order) of a
/// large compression gives, in its vacuum column, an approximation of the outer factor. The
/// coefficients are then refined by Levenberg–Marquardt on the reconstruction residual and
/// gauge-fixed so that `Φ_e ⪰ 0`.
pub fn fejer_factorize(p: &MultiToeplitzPoly, q: usize) -> Result<Factorization> {
    let pos = is_positive(p, q)?;
    if !pos.positive {
        return Err(Error::NotPositive { margin: pos.margin });
    }
    let scale = p.frob_norm();
    if scale == 0.0 {
        let phi = vec![CMatrix::zeros(p.d, p.d); fock_dim(p.n, p.m - 1).unwrap_or(1)];
        let factor = MAFactor::new(p.n, p.m, phi)?;
        return Ok(Factorization { factor, residual: 0.0, iterations: 0, seed_q: q });
    }
    let (mut factor, seed_q) = seed_factor(p)?;
    let iterations = refine(p, &mut factor);
    gauge_fix(&mut factor);
    let residual = factor.multiply().relative_distance(p);
    if residual > FACTOR_TOL || !residual.is_finite() {
        return Err(Error::Degenerate { residual });
    }
    Ok(Factorization { factor, residual, iterations, seed_q })
}

fn seed_factor(p: &MultiToeplitzPoly) -> Result<(MAFactor, usize)> {
    let mut q0 = p.m - 1;
    while q0 < p.m + 40 && fock_dim(p.n, q0 + 1).is_some_and(|s| s * p.d <= SEED_DIM) {
        q0 += 1;
    }
    let mat = assemble(p, q0)?;
    let dim = mat.rows();
    // Reverse the order so the ordinary Cholesky eliminates the longest words first.
    let rev = CMatrix::from_fn(dim, dim, |i, j| mat[(dim - 1 - i, dim - 1 - j)]);
    let norm = op_norm(&mat).max(f64::MIN_POSITIVE);
    let mut jitter = 1e-13 * norm;
    let l = loop {
        let mut shifted = rev.clone();
        shifted.add_diag(C64::new(jitter, 0.0));
        if let Some(l) = cholesky(&shifted) {
            break l;
        }
        jitter *= 10.0;
        if jitter > 1e-2 * norm {
            return Err(Error::NotPositive { margin: eigvalsh(&mat)[0] });
        }
    };
    // X[r, c] = conj(L[dim-1-c, dim-1-r]); the vacuum column holds the coefficients.
    let d = p.d;
    let len = fock_dim(p.n, p.m - 1).expect("fits");
    let phi = (0..len)
        .map(|w| CMatrix::from_fn(d, d, |a, b| l[(dim - 1 - b, dim - 1 - (w * d + a))].conj()))
        .collect();
    Ok((MAFactor::new(p.n, p.m, phi)?, q0))
}

/// Real residual vector of `Θ^*Θ − P` over all words of length `≤ m-1`.
fn residual_vec(p: &MultiToeplitzPoly, f: &MAFactor) -> DVector<f64> {
    let rec = f.multiply();
    let d = p.d;
    let len = f.basis.len();
    let mut out = DVector::zeros(2 * len * d * d);
    let zero = CMatrix::zeros(d, d);
    for (k, w) in f.basis.words().iter().enumerate() {
        let a = rec.coefficient(w).unwrap_or(&zero);
        let b = p.coefficient(w).unwrap_or(&zero);
        for i in 0..d {
            for j in 0..d {
                let z = a[(i, j)] - b[(i, j)];
                let idx = 2 * ((k * d + i) * d + j);
                out[idx] = z.re;
                out[idx + 1] = z.im;
            }
        }
    }
    out
}

/// Exact Jacobian of the bilinear residual in the real coordinates of the `Φ_δ`.
fn jacobian(f: &MAFactor) -> DMatrix<f64> {
    let d = f.d;
    let len = f.basis.len();
    let size = 2 * len * d * d;
    let mut jac = DMatrix::zeros(size, size);
    let mut put = |col: usize, sigma: usize, delta: &CMatrix| {
        for i in 0..d {
            for j in 0..d {
                let idx = 2 * ((sigma * d + i) * d + j);
                jac[(idx, col)] += delta[(i, j)].re;
                jac[(idx + 1, col)] += delta[(i, j)].im;
            }
        }
    };
    for tau in 0..len {
        let tw = f.basis.word(tau).clone();
        for a in 0..d {
            for b in 0..d {
                for (part, c) in [C64::new(1.0, 0.0), C64::new(0.0, 1.0)].into_iter().enumerate() {
                    let col = 2 * ((tau * d + a) * d + b) + part;
                    let mut dphi = CMatrix::zeros(d, d);
                    dphi[(a, b)] = c;
                    let dphi_adj = dphi.adjoint();
                    // Terms where τ = σε: ΔΦ_τ^* Φ_ε.
                    for cut in 0..=tw.len() {
                        let sigma = Word::new(tw.letters()[..cut].to_vec());
                        let eps = Word::new(tw.letters()[cut..].to_vec());
                        let s = f.basis.position(&sigma).expect("prefix is a basis word");
                        let e = f.basis.position(&eps).expect("suffix is a basis word");
                        put(col, s, &dphi_adj.matmul(&f.phi[e]));
                    }
                    // Terms where ε = τ: Φ_{στ}^* ΔΦ_τ.
                    for s in 0..len {
                        if let Some(st) = f.concat_pos(s, tau) {
                            put(col, s, &f.phi[st].adj_mul(&dphi));
                        }
                    }
                }
            }
        }
    }
    jac
}

fn params(f: &MAFactor) -> DVector<f64> {
    let d = f.d;
    let mut x = DVector::zeros(2 * f.phi.len() * d * d);
    for (k, m) in f.phi.iter().enumerate() {
        for i in 0..d {
            for j in 0..d {
                let idx = 2 * ((k * d + i) * d + j);
                x[idx] = m[(i, j)].re;
                x[idx + 1] = m[(i, j)].im;
            }
        }
    }
    x
}

fn set_params(f: &mut MAFactor, x: &DVector<f64>) {
    let d = f.d;
    for (k, m) in f.phi.iter_mut().enumerate() {
        for i in 0..d {
            for j in 0..d {
                let idx = 2 * ((k * d + i) * d + j);
                m[(i, j)] = C64::new(x[idx], x[idx + 1]);
            }
        }
    }
}

/// Levenberg–Marquardt on `‖Θ^*Θ − P‖²`; returns the number of accepted steps.
fn refine(p: &MultiToeplitzPoly, f: &mut MAFactor) -> usize {
    let scale = p.frob_norm();
    let target = (1e-15 * scale).powi(2);
    let mut x = params(f);
    let mut r = residual_vec(p, f);
    let mut cost = r.norm_squared();
    let mut mu = 1e-6 * scale;
    let mut accepted = 0;
    for _ in 0..LM_MAX_ITER {
        if cost <= target {
            break;
        }
        let jac = jacobian(f);
        let jt = jac.transpose();
        let jtj = &jt * &jac;
        let g = &jt * &r;
        let mut improved = false;
        while mu < 1e12 * scale.max(1.0) {
            let mut a = jtj.clone();
            for i in 0..a.nrows() {
                a[(i, i)] += mu;
            }
            let step = match a.cholesky() {
                Some(c) => c.solve(&g),
                None => {
                    mu *= 10.0;
                    continue;
                }
            };
            let xn = &x - &step;
            let mut trial = f.clone();
            set_params(&mut trial, &xn);
            let rn = residual_vec(p, &trial);
            let cn = rn.norm_squared();
            if cn < cost {
                *f = trial;
                x = xn;
                r = rn;
                let gain = cost - cn;
                cost = cn;
                mu = (mu / 3.0).max(1e-18 * scale);
                improved = gain > 1e-30 * scale * scale || cost <= target;
                accepted += 1;
                break;
            }
            mu *= 4.0;
        }
        if !improved {
            break;
        }
    }
    accepted
}

/// Left unitary gauge making `Φ_e` positive semidefinite.
fn gauge_fix(f: &mut MAFactor) {
    let svd = f.phi[0].to_nalgebra().svd(true, true);
    let (Some(u), Some(vt)) = (svd.u, svd.v_t) else { return };
    let w = CMatrix::from_nalgebra(&(u * vt));
    f.left_mul(&w.adjoint());
}

#[derive(Clone, Debug)]
pub struct Dilation {
    /// Isometry `C^d → P_{m-1} ⊗ C^d`, `V h = Σ_ε e_{ε̃} ⊗ Φ_ε h`.
    pub v: CMatrix,
    /// `max_γ ‖A_{γ̃} − V^*(R_γ ⊗ I)V‖` over nonempty `|γ| ≤ m-1`, where `R_γ e_x = e_{xγ}`.
    pub check: f64,
    /// `‖V^*V − I‖`.
    pub isometry_defect: f64,
    /// Whether the `(A_0 + εI)^{-1/2}` congruence was applied first.
    pub normalized: bool,
    pub epsilon: f64,
    pub factorization_residual: f64,
    /// The polynomial the dilation reproduces (after normalization).
    pub poly: MultiToeplitzPoly,
}

/// `(A_0 + εI)^{-1/2}`, with `ε = 1e-10 ‖A_0‖` only when `A_0` is singular.
fn normalizer(a0: &CMatrix) -> Result<(CMatrix, f64)> {
    let e = eigh(a0);
    let top = e.eigenvalues.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    if top == 0.0 {
        return Err(Error::NotPositive { margin: 0.0 });
    }
    if e.eigenvalues[0] < -POSITIVITY_TOL * top {
        return Err(Error::NotPositive { margin: e.eigenvalues[0] });
    }
    let eps = if e.eigenvalues[0] <= 1e-12 * top { 1e-10 * top } else { 0.0 };
    let d = a0.rows();
    let mut out = CMatrix::zeros(d, d);
    for k in 0..d {
        let v = e.vector(k);
        let s = 1.0 / (e.eigenvalues[k].max(0.0) + eps).sqrt();
        for i in 0..d {
            for j in 0..d {
                out[(i, j)] += v[i] * v[j].conj() * s;
            }
        }
    }
    Ok((out, eps))
}

pub fn build_dilation(p: &MultiToeplitzPoly, q: usize) -> Result<Dilation> {
    let d = p.d;
    let identity_defect = p.a0.sub(&CMatrix::identity(d)).max_abs();
    let (poly, normalized, epsilon) = if identity_defect > 1e-12 {
        let (c, eps) = normalizer(&p.a0)?;
        (p.congruence(&c), true, eps)
    } else {
        (p.clone(), false, 0.0)
    };
    let fz = fejer_factorize(&poly, q.max(poly.m - 1))?;
    let f = &fz.factor;
    let basis = &f.basis;
    let len = basis.len();
    let mut v = CMatrix::zeros(len * d, d);
    for (k, w) in basis.words().iter().enumerate() {
        let row = basis.position(&w.reverse()).expect("reversal stays in the basis");
        v.set_block(row * d, 0, &f.phi[k]);
    }
    let isometry_defect = op_norm(&v.adj_mul(&v).sub(&CMatrix::identity(d)));
    let zero = CMatrix::zeros(d, d);
    let mut check = 0.0f64;
    for gamma in basis.words().iter().skip(1) {
        let mut comp = CMatrix::zeros(d, d);
        for x in 0..len {
            let mut y = Some(x);
            for &l in gamma.letters() {
                y = y.and_then(|y| basis.right_mul(l, y));
            }
            if let Some(y) = y {
                let vy = v.submatrix(y * d, 0, d, d);
                let vx = v.submatrix(x * d, 0, d, d);
                comp = comp.add(&vy.adj_mul(&vx));
            }
        }
        let target = poly.coefficient(&gamma.reverse()).unwrap_or(&zero);
        check = check.max(op_norm(&target.sub(&comp)));
    }
    Ok(Dilation {
        v,
        check,
        isometry_defect,
        normalized,
        epsilon,
        factorization_residual: fz.residual,
        poly,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundRow {
    pub k: usize,
    /// `(Σ_{|α|=k} |a_α|²)^{1/2}`, or a lower bound for `w(A_α : |α| = k)` when `d > 1`.
    pub lhs: f64,
    /// Verified upper bound for the operator left side, when available.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lhs_upper: Option<f64>,
    /// `‖A_0‖ cos(π / ([(m-1)/k] + 2))`.
    pub rhs: f64,
    pub violated: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundReport {
    pub q: usize,
    pub margin: f64,
    pub rows: Vec<BoundRow>,
    pub violations: usize,
}

pub fn fejer_bound(a0_norm: f64, m: usize, k: usize) -> f64 {
    let j = (m - 1) / k;
    a0_norm * (std::f64::consts::PI / (j as f64 + 2.0)).cos()
}

/// Checks the coefficient inequalities for each degree `1..=m-1`; `q` defaults to `m + 2`.
pub fn coefficient_bound_check(p: &MultiToeplitzPoly, q: Option<usize>) -> Result<BoundReport> {
    let q = q.unwrap_or(p.m + 2);
    let pos = is_positive(p, q)?;
    if !pos.positive {
        return Err(Error::NotPositive { margin: pos.margin });
    }
    let a0_norm = op_norm(&p.a0);
    let ks: Vec<usize> = (1..p.m).collect();
    let rows = crate::par_map(&ks, |&k| -> Result<BoundRow> {
        let level = p.level(k)?;
        let rhs = fejer_bound(a0_norm, p.m, k);
        let (lhs, lhs_upper) = if p.d == 1 {
            (level.iter().map(|a| a[(0, 0)].norm_sqr()).sum::<f64>().sqrt(), None)
        } else {
            let t = OperatorTuple::new(level)?;
            let rep = radii::joint_numerical_radius_certified(&t, 40)?;
            (rep.value, rep.upper)
        };
        Ok(BoundRow { k, lhs, lhs_upper, rhs, violated: lhs > rhs + 1e-8 })
    });
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let violations = rows.iter().filter(|r| r.violated).count();
    Ok(BoundReport { q, margin: pos.margin, rows, violations })
}

/// Random positive polynomial `Θ^*Θ` from a Gaussian factor.
pub fn random_positive(rng: &mut SeededRng, n: usize, m: usize, d: usize) -> Result<MultiToeplitzPoly> {
    Ok(MAFactor::random(rng, n, m, d, 1.0)?.multiply())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::build_shifts;
    use crate::matrix::{kron, rng_from_seed};

    fn w(s: &str) -> Word {
        Word::parse(s).unwrap()
    }

    fn classical(a1: f64) -> MultiToeplitzPoly {
        MultiToeplitzPoly::scalar(1, 2, 1.0, &[(w("g1"), C64::new(a1, 0.0))]).unwrap()
    }

    /// Assembly from the creation operators: `I ⊗ A_0 + Σ (R-append_σ)^* ⊗ A_σ + h.c.`
    fn assemble_by_shifts(p: &MultiToeplitzPoly, q: usize) -> CMatrix {
        let f = build_shifts(p.n(), q).unwrap();
        let dim = f.basis.len();
        let mut m = kron(&CMatrix::identity(dim), p.a0());
        for (wd, a) in p.coefficients() {
            // e_x ↦ e_{xσ} is R_{i_k} ... R_{i_1} for σ = g_{i_1} ... g_{i_k}.
            let mut op = CMatrix::identity(dim);
            for &l in wd.letters() {
                op = f.r[l as usize - 1].matmul(&op);
            }
            let blk = kron(&op.adjoint(), a);
            m = m.add(&blk).add(&blk.adjoint());
        }
        m
    }

    #[test]
    fn identity_assembles_to_identity() {
        let p = MultiToeplitzPoly::identity(2, 3, 2);
        let m = assemble(&p, 3).unwrap();
        assert!(m.sub(&CMatrix::identity(m.rows())).max_abs() == 0.0);
    }

    #[test]
    fn classical_case_is_tridiagonal() {
        let m = assemble(&classical(0.5), 3).unwrap();
        for i in 0..4usize {
            for j in 0..4usize {
                let expect = if i == j { 1.0 } else if i.abs_diff(j) == 1 { 0.5 } else { 0.0 };
                assert_eq!(m[(i, j)], C64::new(expect, 0.0));
            }
        }
    }

    #[test]
    fn assembly_matches_creation_operators() {
        let mut rng = rng_from_seed(3);
        for (n, m, d) in [(2, 3, 1), (2, 3, 2), (3, 2, 2), (1, 4, 2)] {
            let coeffs = FockBasis::enumerate(n, m - 1).unwrap().words()[1..]
                .iter()
                .map(|wd| (wd.clone(), crate::matrix::gaussian_matrix(&mut rng, d, d)))
                .collect();
            let p = MultiToeplitzPoly::new(n, m, crate::matrix::random_hermitian(&mut rng, d), coeffs).unwrap();
            for q in m - 1..m + 2 {
                let a = assemble(&p, q).unwrap();
                let b = assemble_by_shifts(&p, q);
                assert!(a.sub(&b).max_abs() < 1e-14);
                assert!(a.hermitian_defect() == 0.0);
            }
        }
    }

    #[test]
    fn classical_positivity_threshold() {
        let bad = is_positive(&classical(0.6), 6).unwrap();
        assert!(!bad.positive);
        let edge = is_positive(&classical(0.5), 6).unwrap();
        assert!(edge.positive && edge.margin >= -1e-10);
        let id = is_positive(&MultiToeplitzPoly::identity(2, 3, 1), 3).unwrap();
        assert!(id.positive && (id.margin - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gram_built_polynomials_are_positive() {
        let mut rng = rng_from_seed(9);
        for _ in 0..5 {
            let p = random_positive(&mut rng, 2, 3, 2).unwrap();
            for q in [2, 3, 6] {
                assert!(is_positive(&p, q).unwrap().positive);
            }
        }
    }

    #[test]
    fn kernel_positivity_matches_a_q() {
        let mut rng = rng_from_seed(17);
        for _ in 0..4 {
            let t = OperatorTuple::new((0..2).map(|_| crate::matrix::gaussian_matrix(&mut rng, 2, 2)).collect())
                .unwrap();
            let q = 3;
            let row = op_norm(&t.row_gram()).sqrt();
            let w = radii::a_q_sequence(&t, row, q)[q - 1];
            for (s, expect) in [(1.0 + 1e-6, true), (1.0 - 1e-6, false)] {
                let p = MultiToeplitzPoly::from_tuple_kernel(&t.scaled_real(1.0 / (w * s)), 2.0, q).unwrap();
                assert_eq!(is_positive(&p, q).unwrap().margin >= 0.0, expect);
            }
        }
    }

    #[test]
    fn factor_of_classical_example() {
        let fz = fejer_factorize(&classical(0.5), 1).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!(fz.residual <= 1e-10, "{}", fz.residual);
        assert!((fz.factor.phi[0][(0, 0)] - C64::new(s, 0.0)).norm() < 1e-5);
        assert!((fz.factor.phi[1][(0, 0)].norm() - s).abs() < 1e-5);
    }

    #[test]
    fn factor_of_identity_is_vacuum() {
        let fz = fejer_factorize(&MultiToeplitzPoly::identity(2, 3, 2), 2).unwrap();
        assert!(fz.factor.phi[0].sub(&CMatrix::identity(2)).max_abs() < 1e-12);
        assert!(fz.factor.phi[1..].iter().all(|p| p.max_abs() < 1e-12));
    }

    #[test]
    fn round_trip_random_factors() {
        let mut rng = rng_from_seed(23);
        for (n, m, d) in [(1, 3, 1), (2, 2, 2), (2, 3, 1), (2, 4, 2), (3, 3, 1)] {
            let p = random_positive(&mut rng, n, m, d).unwrap();
            let fz = fejer_factorize(&p, m - 1).unwrap();
            assert!(fz.residual <= 1e-8, "{n} {m} {d}: {}", fz.residual);
            assert!(fz.factor.phi[0].hermitian_defect() < 1e-9);
            assert!(eigvalsh(&fz.factor.phi[0])[0] >= -1e-9);
        }
    }

    #[test]
    fn indefinite_input_is_rejected() {
        assert!(matches!(fejer_factorize(&classical(0.6), 4), Err(Error::NotPositive { .. })));
    }

    #[test]
    fn dilation_reproduces_coefficients() {
        let d0 = build_dilation(&MultiToeplitzPoly::identity(2, 3, 2), 2).unwrap();
        assert!(d0.v.submatrix(0, 0, 2, 2).sub(&CMatrix::identity(2)).max_abs() < 1e-12);
        assert!(d0.v.submatrix(2, 0, d0.v.rows() - 2, 2).max_abs() < 1e-12);
        let d1 = build_dilation(&classical(0.5), 1).unwrap();
        assert!(d1.check <= 1e-8 && d1.isometry_defect <= 1e-9);
        let mut rng = rng_from_seed(5);
        let p = random_positive(&mut rng, 2, 3, 1).unwrap();
        let dl = build_dilation(&p, 2).unwrap();
        assert!(dl.normalized);
        assert!(dl.check <= 1e-8, "{}", dl.check);
        assert!(dl.isometry_defect <= 1e-9, "{}", dl.isometry_defect);
    }

    #[test]
    fn dilation_against_explicit_append_operators() {
        let mut rng = rng_from_seed(41);
        let f = MAFactor::random(&mut rng, 2, 3, 2, 1.0).unwrap();
        let p = f.multiply();
        let dl = build_dilation(&p, 2).unwrap();
        let sh = build_shifts(2, 2).unwrap();
        for gamma in sh.basis.words().iter().skip(1) {
            let mut op = CMatrix::identity(sh.basis.len());
            for &l in gamma.letters() {
                op = sh.r[l as usize - 1].matmul(&op);
            }
            let comp = dl.v.adjoint().matmul(&kron(&op, &CMatrix::identity(2))).matmul(&dl.v);
            let target = dl.poly.coefficient(&gamma.reverse()).unwrap();
            assert!(comp.sub(target).max_abs() < 1e-8);
        }
    }

    #[test]
    fn classical_bound_is_attained() {
        let r = coefficient_bound_check(&classical(0.5), None).unwrap();
        assert_eq!(r.violations, 0);
        assert!((r.rows[0].lhs - 0.5).abs() < 1e-15 && (r.rows[0].rhs - 0.5).abs() < 1e-15);
        assert!(coefficient_bound_check(&classical(0.6), None).is_err());
        let z = coefficient_bound_check(&MultiToeplitzPoly::scalar(2, 3, 1.0, &[]).unwrap(), None).unwrap();
        assert_eq!(z.violations, 0);
    }
}
