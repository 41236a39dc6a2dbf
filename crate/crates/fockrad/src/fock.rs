//! Creation operators on truncated Fock spaces, the flip, symmetric compressions and
//! truncated Poisson kernels.

use crate::error::{Error, Result};
use crate::matrix::{eigh, CMatrix, C64, ONE};
use crate::tuple::OperatorTuple;
use crate::words::{FockBasis, Word};

/// Left and right creation operators on `P_q` (words of length at most `q`).
#[derive(Clone, Debug)]
pub struct TruncatedShiftFamily {
    pub n: usize,
    pub q: usize,
    pub basis: FockBasis,
    pub s: Vec<CMatrix>,
    pub r: Vec<CMatrix>,
    pub u: CMatrix,
}

impl TruncatedShiftFamily {
    pub fn left_tuple(&self) -> OperatorTuple {
        OperatorTuple::new(self.s.clone()).expect("creation operators share a shape")
    }

    pub fn right_tuple(&self) -> OperatorTuple {
        OperatorTuple::new(self.r.clone()).expect("creation operators share a shape")
    }
}

fn basis_for_matrices(n: usize, q: usize) -> Result<FockBasis> {
    let b = FockBasis::enumerate(n, q)?;
    CMatrix::try_zeros(b.len(), 1)?;
    Ok(b)
}

pub fn build_shifts(n: usize, q: usize) -> Result<TruncatedShiftFamily> {
    let basis = basis_for_matrices(n, q)?;
    let dim = basis.len();
    let mut s = vec![CMatrix::zeros(dim, dim); n];
    let mut r = vec![CMatrix::zeros(dim, dim); n];
    for p in 0..dim {
        for l in 1..=n as u16 {
            if let Some(t) = basis.left_mul(l, p) {
                s[l as usize - 1][(t, p)] = ONE;
            }
            if let Some(t) = basis.right_mul(l, p) {
                r[l as usize - 1][(t, p)] = ONE;
            }
        }
    }
    let u = flip_on(&basis);
    Ok(TruncatedShiftFamily { n, q, basis, s, r, u })
}

fn flip_on(basis: &FockBasis) -> CMatrix {
    let dim = basis.len();
    let mut u = CMatrix::zeros(dim, dim);
    for p in 0..dim {
        let t = basis.position(&basis.word(p).reverse()).expect("reversal preserves length");
        u[(t, p)] = ONE;
    }
    u
}

/// The permutation `e_α ↦ e_{α̃}` on `P_q`.
pub fn build_flip(n: usize, q: usize) -> Result<CMatrix> {
    Ok(flip_on(&basis_for_matrices(n, q)?))
}

/// The tuple `S^{(m)} = (S_1^{(m)}, ..., S_n^{(m)})` on `P_{m-1}`.
pub fn shift_tuple(n: usize, m: usize) -> Result<OperatorTuple> {
    if m == 0 {
        return Err(Error::InvalidInput("m must be at least 1".into()));
    }
    Ok(build_shifts(n, m - 1)?.left_tuple())
}

/// Projection `Π_k` onto words of length at most `k` inside `P_q`.
pub fn length_projection(basis: &FockBasis, k: usize) -> CMatrix {
    let diag: Vec<f64> = basis.words().iter().map(|w| if w.len() <= k { 1.0 } else { 0.0 }).collect();
    CMatrix::diag_real(&diag)
}

/// Compression of the left creations to the symmetric part of `P_q`.
#[derive(Clone, Debug)]
pub struct SymmetricCompression {
    pub n: usize,
    pub q: usize,
    /// Sorted representatives of the letter multisets, in graded order.
    pub monomials: Vec<Word>,
    /// Orthonormal basis of the symmetric subspace as columns in `P_q` coordinates.
    pub embed: CMatrix,
    /// Orthogonal projection of `P_q` onto the symmetric subspace.
    pub ps: CMatrix,
    /// `B_i` in the `embed` basis.
    pub b: Vec<CMatrix>,
}

impl SymmetricCompression {
    pub fn tuple(&self) -> OperatorTuple {
        OperatorTuple::new(self.b.clone()).expect("compressions share a shape")
    }
}

/// Nondecreasing letter sequences of length at most `q`, graded.
fn monomials(n: usize, q: usize) -> Vec<Word> {
    let mut out = vec![Word::empty()];
    let mut prev = vec![Word::empty()];
    for _ in 1..=q {
        let mut next = Vec::new();
        for w in &prev {
            let start = w.letters().last().copied().unwrap_or(1);
            for l in start..=n as u16 {
                next.push(w.push(l));
            }
        }
        out.extend(next.iter().cloned());
        prev = next;
    }
    out
}

fn multiplicities(w: &Word, n: usize) -> Vec<usize> {
    let mut c = vec![0usize; n];
    for &l in w.letters() {
        c[l as usize - 1] += 1;
    }
    c
}

/// Number of distinct orderings of the letters of `w`.
fn orbit_size(w: &Word, n: usize) -> f64 {
    let mut lg = ln_factorial(w.len());
    for c in multiplicities(w, n) {
        lg -= ln_factorial(c);
    }
    lg.exp().round()
}

fn ln_factorial(k: usize) -> f64 {
    (2..=k).map(|j| (j as f64).ln()).sum()
}

pub fn build_symmetric(n: usize, q: usize) -> Result<SymmetricCompression> {
    let basis = basis_for_matrices(n, q)?;
    let mons = monomials(n, q);
    let mon_index: std::collections::HashMap<Word, usize> =
        mons.iter().cloned().enumerate().map(|(i, w)| (w, i)).collect();
    let dim = basis.len();
    let ds = mons.len();
    let mut embed = CMatrix::zeros(dim, ds);
    for p in 0..dim {
        let w = basis.word(p);
        let mut sorted = w.letters().to_vec();
        sorted.sort_unstable();
        let j = mon_index[&Word::new(sorted)];
        embed[(p, j)] = C64::new(1.0 / orbit_size(w, n).sqrt(), 0.0);
    }
    let ps = embed.mul_adj(&embed);
    // S_i v_M = sqrt(c_M / c_{M+i}) v_{M+i}; c_M counts orderings of M.
    let mut b = vec![CMatrix::zeros(ds, ds); n];
    for (j, w) in mons.iter().enumerate() {
        if w.len() >= q {
            continue;
        }
        let mult = multiplicities(w, n);
        for i in 0..n {
            let mut letters = w.letters().to_vec();
            letters.push(i as u16 + 1);
            letters.sort_unstable();
            let t = mon_index[&Word::new(letters)];
            let weight = ((mult[i] + 1) as f64 / (w.len() + 1) as f64).sqrt();
            b[i][(t, j)] = C64::new(weight, 0.0);
        }
    }
    Ok(SymmetricCompression { n, q, monomials: mons, embed, ps, b })
}

/// The commuting tuple `B^{(m)}` on the symmetric part of `P_{m-1}`.
pub fn symmetric_tuple(n: usize, m: usize) -> Result<OperatorTuple> {
    if m == 0 {
        return Err(Error::InvalidInput("m must be at least 1".into()));
    }
    Ok(build_symmetric(n, m - 1)?.tuple())
}

/// Truncated Poisson kernel: blocks `r^{|α|} Δ_r T_α^*` for `|α| ≤ q`.
///
/// The column matrix `k` is materialized only while it stays small; `gram = K^*K` is always
/// available from the level recursion `Σ_{j ≤ q} r^{2j} Φ^j(Δ_r²)`, `Φ(X) = Σ T_i X T_i^*`.
#[derive(Clone, Debug)]
pub struct PoissonKernelTrunc {
    pub r: f64,
    pub q: usize,
    pub d: usize,
    pub delta: CMatrix,
    pub basis: Option<FockBasis>,
    pub k: Option<CMatrix>,
    pub gram: CMatrix,
    /// `r^{2(q+1)} / (1 - r^2)`, or the `C_0` certificate level when `r = 1`.
    pub tail_bound: f64,
    adj: Vec<CMatrix>,
}

const C0_LEVEL: f64 = 1e-8;
/// Entry budget for the explicit column matrix.
const KERNEL_ENTRIES: usize = 4_000_000;

pub fn build_poisson(t: &OperatorTuple, r: f64, q: usize) -> Result<PoissonKernelTrunc> {
    if !(r > 0.0 && r <= 1.0) {
        return Err(Error::InvalidInput(format!("Poisson parameter r = {r} must lie in (0, 1]")));
    }
    let n = t.n();
    let d = t.dim();
    let mut defect = t.row_gram().scale_real(-r * r);
    defect.add_diag(ONE);
    let e = eigh(&defect);
    let scale = 1.0f64.max(t.row_gram().max_abs());
    if e.eigenvalues[0] < -1e-12 * scale {
        return Err(Error::NotRowContraction { margin: e.eigenvalues[0] });
    }
    let tail_bound = if r < 1.0 {
        r.powi(2 * (q as i32 + 1)) / (1.0 - r * r)
    } else {
        let tail = crate::matrix::op_norm(&t.q_k(q)).sqrt();
        if tail >= C0_LEVEL {
            return Err(Error::InvalidInput(format!(
                "r = 1 needs a C_0 tuple; ||Q_q||^(1/2) = {tail:e}"
            )));
        }
        tail * tail
    };
    let sqrt_vals: Vec<f64> = e.eigenvalues.iter().map(|&l| l.max(0.0).sqrt()).collect();
    let v = &e.eigenvectors;
    let delta = v.matmul(&CMatrix::diag_real(&sqrt_vals)).mul_adj(v);
    let delta2 = delta.matmul(&delta);

    let mut gram = delta2.clone();
    let mut level = delta2;
    for j in 1..=q {
        level = t.apply_completely_positive(&level);
        if level.is_zero() {
            break;
        }
        gram = gram.add(&level.scale_real(r.powi(2 * j as i32)));
    }
    let gram = gram.hermitian_part();

    let adj: Vec<CMatrix> = t.mats().iter().map(|m| m.adjoint()).collect();
    let small = crate::words::fock_dim(n, q)
        .and_then(|len| len.checked_mul(d * d))
        .is_some_and(|entries| entries <= KERNEL_ENTRIES)
        && crate::words::fock_dim(n, q).is_some_and(|len| len <= crate::words::DEFAULT_BASIS_CAP);
    let (basis, k) = if small {
        let basis = FockBasis::enumerate(n, q)?;
        // T_{α g_i}^* = T_i^* T_α^*.
        let mut t_adj: Vec<CMatrix> = Vec::with_capacity(basis.len());
        t_adj.push(CMatrix::identity(d));
        for p in 1..basis.len() {
            let w = basis.word(p);
            let parent = basis.position(&Word::new(w.letters()[..w.len() - 1].to_vec())).unwrap();
            let last = *w.letters().last().unwrap() as usize - 1;
            t_adj.push(adj[last].matmul(&t_adj[parent]));
        }
        let mut k = CMatrix::zeros(basis.len() * d, d);
        for (p, ta) in t_adj.iter().enumerate() {
            let blk = delta.matmul(ta).scale_real(r.powi(basis.word(p).len() as i32));
            k.set_block(p * d, 0, &blk);
        }
        (Some(basis), Some(k))
    } else {
        (None, None)
    };
    Ok(PoissonKernelTrunc { r, q, d, delta, basis, k, gram, tail_bound, adj })
}

impl PoissonKernelTrunc {
    /// `‖K^*K − I‖`.
    pub fn defect(&self) -> f64 {
        let mut g = self.gram.clone();
        g.add_diag(-ONE);
        crate::matrix::op_norm(&g)
    }

    /// The same defect from the explicit column matrix, when it was built.
    pub fn dense_defect(&self) -> Option<f64> {
        let k = self.k.as_ref()?;
        let mut g = k.adj_mul(k);
        g.add_diag(-ONE);
        Some(crate::matrix::op_norm(&g))
    }

    /// The block `r^{|w|} Δ_r T_w^*`, for `|w| ≤ q`.
    pub fn block(&self, w: &Word) -> Option<CMatrix> {
        if w.len() > self.q || w.max_letter() as usize > self.adj.len() {
            return None;
        }
        if let (Some(b), Some(k)) = (&self.basis, &self.k) {
            let p = b.position(w)?;
            return Some(k.submatrix(p * self.d, 0, self.d, self.d));
        }
        let mut ta = CMatrix::identity(self.d);
        for &l in w.letters() {
            ta = self.adj[l as usize - 1].matmul(&ta);
        }
        Some(self.delta.matmul(&ta).scale_real(self.r.powi(w.len() as i32)))
    }

    /// Largest discrepancy in `K (r^{|α|} T_α^*) = (S_α^* ⊗ I) K` over the retained blocks.
    /// Needs the explicit matrix.
    pub fn intertwining_defect(&self, t: &OperatorTuple, alpha: &Word) -> Option<f64> {
        let basis = self.basis.as_ref()?;
        let k = self.k.as_ref()?;
        let d = self.d;
        let lhs_factor = t.product(alpha).adjoint().scale_real(self.r.powi(alpha.len() as i32));
        let mut worst: f64 = 0.0;
        for p in 0..basis.len() {
            let beta = basis.word(p);
            if beta.len() + alpha.len() > self.q {
                continue;
            }
            let lhs = k.submatrix(p * d, 0, d, d).matmul(&lhs_factor);
            let rhs = self.block(&alpha.concat(beta)).expect("retained word");
            worst = worst.max(lhs.sub(&rhs).max_abs());
        }
        Some(worst)
    }
}
