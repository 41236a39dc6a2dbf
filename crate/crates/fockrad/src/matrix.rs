//! Dense complex matrices and the eigen/norm kernels used throughout.

use std::ops::{Index, IndexMut};

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type SeededRng = ChaCha8Rng;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Largest side length accepted by [`CMatrix::try_zeros`].
pub const MAX_DIM: usize = 2_000;

/// Relative residual guaranteed by [`hermitian_eig`].
pub const EIG_TOL: f64 = 1e-11;

const JACOBI_THRESHOLD: f64 = 1e-13;
const DENSE_EIG_LIMIT: usize = 96;

pub fn rng_from_seed(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl std::fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "CMatrix {}x{}", self.rows, self.cols)?;
        for i in 0..self.rows.min(8) {
            let row: Vec<String> = (0..self.cols.min(8))
                .map(|j| {
                    let z = self[(i, j)];
                    format!("{:+.4}{:+.4}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "  {}", row.join(" "))?;
        }
        Ok(())
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix { rows, cols, data: vec![ZERO; rows * cols] }
    }

    /// Like [`CMatrix::zeros`] but refuses shapes beyond [`MAX_DIM`].
    pub fn try_zeros(rows: usize, cols: usize) -> Result<Self> {
        let big = rows.max(cols);
        if big > MAX_DIM {
            return Err(Error::TooLarge { what: "matrix side", size: big, cap: MAX_DIM });
        }
        Ok(Self::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        CMatrix { rows, cols, data }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Self {
        assert_eq!(data.len(), rows * cols, "entry count must equal rows*cols");
        CMatrix { rows, cols, data }
    }

    pub fn from_real(rows: usize, cols: usize, vals: &[f64]) -> Self {
        assert_eq!(vals.len(), rows * cols);
        CMatrix { rows, cols, data: vals.iter().map(|&x| C64::new(x, 0.0)).collect() }
    }

    pub fn diag_real(vals: &[f64]) -> Self {
        let mut m = Self::zeros(vals.len(), vals.len());
        for (i, &v) in vals.iter().enumerate() {
            m[(i, i)] = C64::new(v, 0.0);
        }
        m
    }

    pub fn scalar(n: usize, z: C64) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = z;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(j, i)] = self[(i, j)].conj();
            }
        }
        m
    }

    pub fn conj(&self) -> Self {
        CMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z.conj()).collect() }
    }

    pub fn transpose(&self) -> Self {
        let mut m = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(j, i)] = self[(i, j)];
            }
        }
        m
    }

    pub fn matmul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        let oc = other.cols;
        for i in 0..self.rows {
            let orow = &mut out.data[i * oc..(i + 1) * oc];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let brow = &other.data[k * oc..(k + 1) * oc];
                for (o, b) in orow.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// `self · other^*`.
    pub fn mul_adj(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, other.cols, "mul_adj shape mismatch");
        let mut out = Self::zeros(self.rows, other.rows);
        for i in 0..self.rows {
            let a = self.row(i);
            for j in 0..other.rows {
                let b = other.row(j);
                let mut s = ZERO;
                for (x, y) in a.iter().zip(b) {
                    s += x * y.conj();
                }
                out[(i, j)] = s;
            }
        }
        out
    }

    /// `self^* · other`.
    pub fn adj_mul(&self, other: &CMatrix) -> CMatrix {
        self.adjoint().matmul(other)
    }

    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, x.len());
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn adj_matvec(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(self.rows, x.len());
        let mut out = vec![ZERO; self.cols];
        for (i, xi) in x.iter().enumerate() {
            if *xi == ZERO {
                continue;
            }
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += a.conj() * xi;
            }
        }
        out
    }

    pub fn add(&self, other: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, z: C64) -> CMatrix {
        CMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| a * z).collect() }
    }

    pub fn scale_real(&self, x: f64) -> CMatrix {
        self.scale(C64::new(x, 0.0))
    }

    /// `self += z · other`.
    pub fn axpy(&mut self, z: C64, other: &CMatrix) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        if z == ZERO {
            return;
        }
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += z * b;
        }
    }

    pub fn add_diag(&mut self, z: C64) {
        for i in 0..self.rows.min(self.cols) {
            self[(i, i)] += z;
        }
    }

    pub fn frob_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|z| *z == ZERO)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// `(A + A^*)/2`.
    pub fn hermitian_part(&self) -> CMatrix {
        assert!(self.is_square());
        CMatrix::from_fn(self.rows, self.cols, |i, j| (self[(i, j)] + self[(j, i)].conj()) * 0.5)
    }

    /// `Re(e^{iθ} A)`.
    pub fn rotated_real_part(&self, theta: f64) -> CMatrix {
        self.scale(C64::from_polar(1.0, theta)).hermitian_part()
    }

    /// Largest entrywise deviation from `A = A^*`.
    pub fn hermitian_defect(&self) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..self.rows {
            for j in i..self.cols {
                d = d.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        d
    }

    pub fn submatrix(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> CMatrix {
        CMatrix::from_fn(rows, cols, |i, j| self[(r0 + i, c0 + j)])
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, block: &CMatrix) {
        for i in 0..block.rows {
            for j in 0..block.cols {
                self[(r0 + i, c0 + j)] = block[(i, j)];
            }
        }
    }

    pub fn add_block(&mut self, r0: usize, c0: usize, block: &CMatrix) {
        for i in 0..block.rows {
            for j in 0..block.cols {
                self[(r0 + i, c0 + j)] += block[(i, j)];
            }
        }
    }

    pub fn leading(&self, k: usize) -> CMatrix {
        self.submatrix(0, 0, k, k)
    }

    pub fn to_nalgebra(&self) -> nalgebra::DMatrix<C64> {
        nalgebra::DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    pub fn from_nalgebra(m: &nalgebra::DMatrix<C64>) -> CMatrix {
        CMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
    }
}

/// Kronecker product; block `(i, j)` is `a_ij · B`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let mut out = CMatrix::zeros(a.rows * b.rows, a.cols * b.cols);
    for i in 0..a.rows {
        for j in 0..a.cols {
            let s = a[(i, j)];
            if s == ZERO {
                continue;
            }
            for k in 0..b.rows {
                for l in 0..b.cols {
                    out[(i * b.rows + k, j * b.cols + l)] = s * b[(k, l)];
                }
            }
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct EigResult {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal columns, paired with `eigenvalues`.
    pub eigenvectors: CMatrix,
}

impl EigResult {
    pub fn vector(&self, k: usize) -> Vec<C64> {
        self.eigenvectors.column(k)
    }
}

fn check_hermitian(a: &CMatrix) -> Result<()> {
    if !a.is_square() {
        return Err(Error::NotSquare { rows: a.rows, cols: a.cols });
    }
    let defect = a.hermitian_defect();
    let scale = a.frob_norm().max(f64::MIN_POSITIVE);
    if defect > 1e-12 * scale {
        return Err(Error::NotHermitian { defect });
    }
    Ok(())
}

/// Full eigendecomposition by cyclic complex Jacobi rotations.
pub fn hermitian_eig(a: &CMatrix) -> Result<EigResult> {
    check_hermitian(a)?;
    let n = a.rows;
    let mut m = a.hermitian_part();
    let mut v = CMatrix::identity(n);
    let threshold = JACOBI_THRESHOLD * a.frob_norm();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= threshold {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let beta = m[(p, q)];
                let b = beta.norm();
                if b == 0.0 || b < 1e-300 {
                    continue;
                }
                let phase = beta / b;
                let tau = (m[(q, q)].re - m[(p, p)].re) / (2.0 * b);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let t = if tau == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // W = [[c, s], [-s conj(phase), c conj(phase)]] acting on columns p, q.
                let w_pp = C64::new(c, 0.0);
                let w_pq = C64::new(s, 0.0);
                let w_qp = -phase.conj() * s;
                let w_qq = phase.conj() * c;
                for i in 0..n {
                    let mp = m[(i, p)];
                    let mq = m[(i, q)];
                    m[(i, p)] = mp * w_pp + mq * w_qp;
                    m[(i, q)] = mp * w_pq + mq * w_qq;
                }
                for j in 0..n {
                    let mp = m[(p, j)];
                    let mq = m[(q, j)];
                    m[(p, j)] = w_pp.conj() * mp + w_qp.conj() * mq;
                    m[(q, j)] = w_pq.conj() * mp + w_qq.conj() * mq;
                }
                m[(p, q)] = ZERO;
                m[(q, p)] = ZERO;
                m[(p, p)] = C64::new(m[(p, p)].re, 0.0);
                m[(q, q)] = C64::new(m[(q, q)].re, 0.0);
                for i in 0..n {
                    let vp = v[(i, p)];
                    let vq = v[(i, q)];
                    v[(i, p)] = vp * w_pp + vq * w_qp;
                    v[(i, q)] = vp * w_pq + vq * w_qq;
                }
            }
        }
    }
    let vals: Vec<f64> = (0..n).map(|i| m[(i, i)].re).collect();
    Ok(sorted_pairs(vals, &v))
}

fn sorted_pairs(vals: Vec<f64>, v: &CMatrix) -> EigResult {
    let n = vals.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
    let eigenvalues = order.iter().map(|&k| vals[k]).collect();
    let eigenvectors = CMatrix::from_fn(v.rows, n, |i, j| v[(i, order[j])]);
    EigResult { eigenvalues, eigenvectors }
}

/// Eigendecomposition through Householder tridiagonalization and implicit QR.
pub fn eigh(a: &CMatrix) -> EigResult {
    let na = a.hermitian_part().to_nalgebra();
    let se = na.symmetric_eigen();
    let vals: Vec<f64> = se.eigenvalues.iter().copied().collect();
    let v = CMatrix::from_nalgebra(&se.eigenvectors);
    sorted_pairs(vals, &v)
}

/// Ascending eigenvalues of the Hermitian part of `a`.
pub fn eigvalsh(a: &CMatrix) -> Vec<f64> {
    let na = a.hermitian_part().to_nalgebra();
    let mut vals: Vec<f64> = na.symmetric_eigenvalues().iter().copied().collect();
    vals.sort_by(f64::total_cmp);
    vals
}

pub fn min_eig(a: &CMatrix) -> Result<f64> {
    check_hermitian(a)?;
    Ok(extreme_eig(a, false).0)
}

pub fn max_eig(a: &CMatrix) -> Result<f64> {
    check_hermitian(a)?;
    Ok(extreme_eig(a, true).0)
}

/// Extreme eigenpair of the Hermitian part of `a`; dense for small sizes, Lanczos otherwise.
pub fn extreme_eig(a: &CMatrix, largest: bool) -> (f64, Vec<C64>) {
    let n = a.rows;
    if n == 0 {
        return (0.0, Vec::new());
    }
    if n <= DENSE_EIG_LIMIT {
        let e = eigh(a);
        let k = if largest { n - 1 } else { 0 };
        return (e.eigenvalues[k], e.vector(k));
    }
    let h = a.hermitian_part();
    let sign = if largest { 1.0 } else { -1.0 };
    let (lam, v) = lanczos_max(n, |x, y| {
        let r = h.matvec(x);
        for (yi, ri) in y.iter_mut().zip(r) {
            *yi = ri * sign;
        }
    });
    (lam * sign, v)
}

/// Largest singular value.
pub fn op_norm(a: &CMatrix) -> f64 {
    if a.rows == 0 || a.cols == 0 {
        return 0.0;
    }
    let g = if a.rows <= a.cols { a.mul_adj(a) } else { a.adj_mul(a) };
    extreme_eig(&g, true).0.max(0.0).sqrt()
}

/// Largest eigenpair of a Hermitian operator given by its action, via Lanczos with full
/// reorthogonalization. Deterministic: the start vector comes from a fixed seed.
pub fn lanczos_max(dim: usize, mut apply: impl FnMut(&[C64], &mut [C64])) -> (f64, Vec<C64>) {
    if dim == 0 {
        return (0.0, Vec::new());
    }
    let mut rng = rng_from_seed(0x1a2c_3e4f);
    let mut basis: Vec<Vec<C64>> = Vec::new();
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut q = random_unit_vector(&mut rng, dim);
    let mut w = vec![ZERO; dim];
    let mut best = (f64::NEG_INFINITY, Vec::new());
    let mut scale: f64 = 0.0;
    let mut last_check = 0usize;
    loop {
        apply(&q, &mut w);
        let alpha = dot(&q, &w).re;
        scale = scale.max(alpha.abs());
        basis.push(q.clone());
        alphas.push(alpha);
        for b in &basis {
            let c = dot(b, &w);
            for (wi, bi) in w.iter_mut().zip(b) {
                *wi -= c * bi;
            }
        }
        for b in &basis {
            let c = dot(b, &w);
            for (wi, bi) in w.iter_mut().zip(b) {
                *wi -= c * bi;
            }
        }
        let beta = norm(&w);
        scale = scale.max(beta);
        let k = basis.len();
        let done_dim = k >= dim;
        let check = done_dim || k - last_check >= 4 || k < 8;
        if check {
            last_check = k;
            let (lam, y) = tridiag_top(&alphas, &betas);
            let resid = beta * y[k - 1].abs();
            let v = combine(&basis, &y);
            best = (lam, v);
            if done_dim || resid <= 1e-14 * scale.max(lam.abs()).max(f64::MIN_POSITIVE) {
                return best;
            }
        }
        if beta <= 1e-13 * scale.max(f64::MIN_POSITIVE) {
            // Invariant subspace found; continue from a fresh orthogonal direction.
            let mut fresh = random_unit_vector(&mut rng, dim);
            for _ in 0..2 {
                for b in &basis {
                    let c = dot(b, &fresh);
                    for (fi, bi) in fresh.iter_mut().zip(b) {
                        *fi -= c * bi;
                    }
                }
            }
            let nf = norm(&fresh);
            if nf < 1e-8 {
                let (lam, y) = tridiag_top(&alphas, &betas);
                let _ = best;
                return (lam, combine(&basis, &y));
            }
            q = fresh.iter().map(|z| z / nf).collect();
            betas.push(0.0);
        } else {
            q = w.iter().map(|z| z / beta).collect();
            betas.push(beta);
        }
    }
}

fn tridiag_top(alphas: &[f64], betas: &[f64]) -> (f64, Vec<f64>) {
    let k = alphas.len();
    let mut t = nalgebra::DMatrix::<f64>::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alphas[i];
        if i + 1 < k {
            t[(i, i + 1)] = betas[i];
            t[(i + 1, i)] = betas[i];
        }
    }
    let se = t.symmetric_eigen();
    let mut top = 0;
    for i in 1..k {
        if se.eigenvalues[i] > se.eigenvalues[top] {
            top = i;
        }
    }
    let y = (0..k).map(|i| se.eigenvectors[(i, top)]).collect();
    (se.eigenvalues[top], y)
}

fn combine(basis: &[Vec<C64>], y: &[f64]) -> Vec<C64> {
    let dim = basis[0].len();
    let mut v = vec![ZERO; dim];
    for (b, &c) in basis.iter().zip(y) {
        for (vi, bi) in v.iter_mut().zip(b) {
            *vi += bi * c;
        }
    }
    let nv = norm(&v);
    v.iter().map(|z| z / nv).collect()
}

/// `⟨x, y⟩` conjugate-linear in the first slot.
pub fn dot(x: &[C64], y: &[C64]) -> C64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

pub fn norm(x: &[C64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn normalize(x: &mut [C64]) -> f64 {
    let n = norm(x);
    if n > 0.0 {
        for z in x.iter_mut() {
            *z /= n;
        }
    }
    n
}

/// Lower-triangular `L` with `A = L L^*`, or `None` if `A` is not numerically positive definite.
pub fn cholesky(a: &CMatrix) -> Option<CMatrix> {
    let n = a.rows;
    let mut l = CMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if !(d > 0.0) {
            return None;
        }
        let djj = d.sqrt();
        l[(j, j)] = C64::new(djj, 0.0);
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / djj;
        }
    }
    Some(l)
}

/// Solves `L X = B` for lower-triangular `L`.
pub fn solve_lower(l: &CMatrix, b: &CMatrix) -> CMatrix {
    let n = l.rows;
    let mut x = b.clone();
    for c in 0..b.cols {
        for i in 0..n {
            let mut s = x[(i, c)];
            for k in 0..i {
                s -= l[(i, k)] * x[(k, c)];
            }
            x[(i, c)] = s / l[(i, i)];
        }
    }
    x
}

/// Eigenvalues of a general square matrix, from a complex Schur form.
pub fn eigenvalues(a: &CMatrix) -> Vec<C64> {
    a.to_nalgebra().schur().eigenvalues().map(|v| v.iter().copied().collect()).unwrap_or_default()
}

/// Standard complex Gaussian entries (real and imaginary parts of variance 1/2).
pub fn gaussian_matrix(rng: &mut SeededRng, rows: usize, cols: usize) -> CMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re * s, im * s)
    })
}

pub fn random_unit_vector(rng: &mut SeededRng, dim: usize) -> Vec<C64> {
    let mut v: Vec<C64> = (0..dim)
        .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    normalize(&mut v);
    v
}

pub fn random_hermitian(rng: &mut SeededRng, n: usize) -> CMatrix {
    gaussian_matrix(rng, n, n).hermitian_part()
}

/// Haar-distributed unitary via Gram–Schmidt on a Gaussian matrix.
pub fn random_unitary(rng: &mut SeededRng, n: usize) -> CMatrix {
    let g = gaussian_matrix(rng, n, n);
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(n);
    for j in 0..n {
        let mut v = g.column(j);
        for _ in 0..2 {
            for c in &cols {
                let p = dot(c, &v);
                for (vi, ci) in v.iter_mut().zip(c) {
                    *vi -= p * ci;
                }
            }
        }
        normalize(&mut v);
        cols.push(v);
    }
    CMatrix::from_fn(n, n, |i, j| cols[j][i])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn residual(a: &CMatrix, e: &EigResult) -> f64 {
        let mut worst: f64 = 0.0;
        for k in 0..a.rows() {
            let v = e.vector(k);
            let av = a.matvec(&v);
            let r: f64 = av
                .iter()
                .zip(&v)
                .map(|(x, y)| (x - y * e.eigenvalues[k]).norm_sqr())
                .sum::<f64>()
                .sqrt();
            worst = worst.max(r);
        }
        worst
    }

    #[test]
    fn jacobi_examples() {
        let e = hermitian_eig(&CMatrix::diag_real(&[3.0, 1.0, 2.0])).unwrap();
        assert_eq!(e.eigenvalues, vec![1.0, 2.0, 3.0]);
        let x = CMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let e = hermitian_eig(&x).unwrap();
        assert!((e.eigenvalues[0] + 1.0).abs() < 1e-15 && (e.eigenvalues[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn jacobi_trace_and_residual() {
        let mut rng = rng_from_seed(11);
        let a = random_hermitian(&mut rng, 8);
        let e = hermitian_eig(&a).unwrap();
        let tr: f64 = (0..8).map(|i| a[(i, i)].re).sum();
        let s: f64 = e.eigenvalues.iter().sum();
        assert!((tr - s).abs() < 1e-10);
        assert!(residual(&a, &e) <= EIG_TOL * op_norm(&a));
        let v = &e.eigenvectors;
        let gram = v.adj_mul(v).sub(&CMatrix::identity(8));
        assert!(gram.frob_norm() < 1e-12);
    }

    #[test]
    fn jacobi_rejects_bad_input() {
        assert!(matches!(hermitian_eig(&CMatrix::zeros(2, 3)), Err(Error::NotSquare { .. })));
        let a = CMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        assert!(matches!(hermitian_eig(&a), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn jacobi_agrees_with_tridiagonal_route() {
        let mut rng = rng_from_seed(5);
        for n in [1, 2, 5, 13] {
            let a = random_hermitian(&mut rng, n);
            let j = hermitian_eig(&a).unwrap().eigenvalues;
            let t = eigvalsh(&a);
            for (x, y) in j.iter().zip(&t) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn op_norm_examples() {
        let a = CMatrix::from_real(2, 2, &[0.0, 0.0, 1.0, 0.0]);
        assert!((op_norm(&a) - 1.0).abs() < 1e-15);
        assert_eq!(op_norm(&CMatrix::zeros(3, 3)), 0.0);
    }

    #[test]
    fn op_norm_dominates_sampling() {
        let mut rng = rng_from_seed(3);
        let a = gaussian_matrix(&mut rng, 6, 4);
        let nrm = op_norm(&a);
        let mut best: f64 = 0.0;
        for _ in 0..10_000 {
            let x = random_unit_vector(&mut rng, 4);
            best = best.max(norm(&a.matvec(&x)));
        }
        assert!(best <= nrm + 1e-12);
        let sv = a.to_nalgebra().singular_values();
        assert!((nrm - sv.max()).abs() < 1e-12 * nrm);
    }

    #[test]
    fn kron_examples() {
        let mut rng = rng_from_seed(4);
        let a = gaussian_matrix(&mut rng, 3, 3);
        let b = gaussian_matrix(&mut rng, 2, 4);
        let k = kron(&a, &b);
        assert_eq!((k.rows(), k.cols()), (6, 12));
        let blk = kron(&CMatrix::identity(2), &a);
        let mut expect = CMatrix::zeros(6, 6);
        expect.set_block(0, 0, &a);
        expect.set_block(3, 3, &a);
        assert_eq!(blk, expect);
        let c = gaussian_matrix(&mut rng, 3, 3);
        let lhs = op_norm(&kron(&a, &c));
        assert!((lhs - op_norm(&a) * op_norm(&c)).abs() < 1e-9);
    }

    #[test]
    fn min_eig_examples() {
        assert!((min_eig(&CMatrix::identity(4)).unwrap() - 1.0).abs() < 1e-15);
        assert!((min_eig(&CMatrix::diag_real(&[-2.0, 5.0])).unwrap() + 2.0).abs() < 1e-15);
        let mut rng = rng_from_seed(8);
        let th = gaussian_matrix(&mut rng, 3, 7);
        let g = th.adj_mul(&th);
        assert!(min_eig(&g).unwrap() >= -1e-12 * op_norm(&g));
    }

    #[test]
    fn lanczos_matches_dense() {
        let mut rng = rng_from_seed(21);
        let a = random_hermitian(&mut rng, 150);
        let dense = eigvalsh(&a);
        let (top, v) = extreme_eig(&a, true);
        let (bottom, _) = extreme_eig(&a, false);
        assert!((top - dense[149]).abs() < 1e-9);
        assert!((bottom - dense[0]).abs() < 1e-9);
        let av = a.matvec(&v);
        let r: f64 = av.iter().zip(&v).map(|(x, y)| (x - y * top).norm_sqr()).sum::<f64>().sqrt();
        assert!(r < 1e-6);
    }

    #[test]
    fn lanczos_handles_invariant_start() {
        // Block-diagonal path graphs: Krylov spaces close up early.
        let mut a = CMatrix::zeros(120, 120);
        for blk in 0..40 {
            let o = blk * 3;
            a[(o, o + 1)] = ONE;
            a[(o + 1, o)] = ONE;
            a[(o + 1, o + 2)] = ONE;
            a[(o + 2, o + 1)] = ONE;
        }
        let (top, _) = extreme_eig(&a, true);
        assert!((top - 2f64.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn cholesky_roundtrip() {
        let mut rng = rng_from_seed(2);
        let g = gaussian_matrix(&mut rng, 5, 5);
        let mut a = g.mul_adj(&g);
        a.add_diag(ONE);
        let l = cholesky(&a).unwrap();
        assert!(l.mul_adj(&l).sub(&a).frob_norm() < 1e-12);
        assert!(cholesky(&CMatrix::diag_real(&[1.0, -1.0])).is_none());
        let b = gaussian_matrix(&mut rng, 5, 2);
        let x = solve_lower(&l, &b);
        assert!(l.matmul(&x).sub(&b).frob_norm() < 1e-12);
    }

    #[test]
    fn unitary_is_unitary() {
        let mut rng = rng_from_seed(9);
        let u = random_unitary(&mut rng, 6);
        assert!(u.adj_mul(&u).sub(&CMatrix::identity(6)).frob_norm() < 1e-13);
    }

    #[test]
    fn cap_rejects_huge() {
        assert!(CMatrix::try_zeros(2_001, 3).is_err());
        assert!(CMatrix::try_zeros(2_000, 3).is_ok());
    }
}
