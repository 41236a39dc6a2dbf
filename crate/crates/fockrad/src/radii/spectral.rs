//! Spectral radii: single matrices by repeated squaring, tuples through the completely
//! positive map `X ↦ Σ T_i X T_i^*`.

use crate::matrix::{eigh, kron, op_norm, CMatrix, ZERO};
use crate::tuple::OperatorTuple;

/// Side length up to which the `d² × d²` matrix of the map is squared directly.
const SUPEROPERATOR_LIMIT: usize = 16;
const MAX_SQUARINGS: usize = 62;
const MAX_STEPS: usize = 400;

fn strictly_triangular(m: &CMatrix) -> bool {
    let d = m.rows();
    let lower = (0..d).all(|i| (i..d).all(|j| m[(i, j)] == ZERO));
    let upper = (0..d).all(|i| (0..=i).all(|j| m[(i, j)] == ZERO));
    lower || upper
}

/// `max |eig(M)|` as the limit of `‖M^{2^k}‖_F^{1/2^k}`, with the scale carried in logs.
pub fn matrix_spectral_radius(m: &CMatrix) -> f64 {
    if m.rows() == 0 || strictly_triangular(m) {
        return 0.0;
    }
    let f = m.frob_norm();
    if f == 0.0 {
        return 0.0;
    }
    let mut p = m.scale_real(1.0 / f);
    let mut log_scale = f.ln();
    let mut prev = f;
    for j in 1..=MAX_SQUARINGS {
        let sq = p.matmul(&p);
        let nf = sq.frob_norm();
        if nf == 0.0 {
            return 0.0;
        }
        log_scale = 2.0 * log_scale + nf.ln();
        p = sq.scale_real(1.0 / nf);
        let est = (log_scale / (1u64 << j) as f64).exp();
        if (est - prev).abs() <= 1e-15 * est {
            return est;
        }
        prev = est;
    }
    prev
}

/// Estimates `‖Q_k‖^{1/2k}` along the way; every entry is an upper bound for the joint
/// spectral radius and the sequence is nonincreasing.
#[derive(Clone, Debug)]
pub struct SpectralTrace {
    pub value: f64,
    pub history: Vec<f64>,
    /// Powers `k` matching `history`.
    pub ks: Vec<u64>,
    pub exact_zero: bool,
}

pub fn joint_spectral_radius(t: &OperatorTuple) -> SpectralTrace {
    if t.dim() <= SUPEROPERATOR_LIMIT {
        by_squaring(t)
    } else {
        by_recursion(t)
    }
}

fn push_running_min(tr: &mut SpectralTrace, k: u64, v: f64) {
    let v = tr.history.last().map_or(v, |&last| v.min(last));
    tr.history.push(v);
    tr.ks.push(k);
    tr.value = v;
}

fn by_squaring(t: &OperatorTuple) -> SpectralTrace {
    let d = t.dim();
    let mut tr = SpectralTrace { value: 0.0, history: Vec::new(), ks: Vec::new(), exact_zero: false };
    // Row-major vec(T X T^*) = (T ⊗ conj T) vec(X).
    let mut l = CMatrix::zeros(d * d, d * d);
    for m in t.mats() {
        l = l.add(&kron(m, &m.conj()));
    }
    let vec_i: Vec<_> = CMatrix::identity(d).data().to_vec();
    let f = l.frob_norm();
    if f == 0.0 {
        tr.exact_zero = true;
        tr.history.push(0.0);
        tr.ks.push(1);
        return tr;
    }
    let mut p = l.scale_real(1.0 / f);
    let mut log_scale = f.ln();
    // The map is nilpotent iff its (d²)-th power vanishes, so a stall before then proves nothing.
    let min_j = (usize::BITS - (d * d).saturating_sub(1).leading_zeros()) as usize;
    for j in 0..=MAX_SQUARINGS {
        let k = 1u64 << j;
        let q = CMatrix::from_vec(d, d, p.matvec(&vec_i));
        let nq = op_norm(&q);
        if nq == 0.0 {
            tr.exact_zero = true;
            push_running_min(&mut tr, k, 0.0);
            return tr;
        }
        let est = ((nq.ln() + log_scale) / (2.0 * k as f64)).exp();
        let prev = tr.value;
        push_running_min(&mut tr, k, est);
        if j > min_j && (prev - tr.value).abs() <= 1e-15 * tr.value {
            break;
        }
        if j == MAX_SQUARINGS {
            break;
        }
        let sq = p.matmul(&p);
        let nf = sq.frob_norm();
        if nf == 0.0 {
            tr.exact_zero = true;
            push_running_min(&mut tr, 2 * k, 0.0);
            return tr;
        }
        log_scale = 2.0 * log_scale + nf.ln();
        p = sq.scale_real(1.0 / nf);
    }
    tr
}

fn by_recursion(t: &OperatorTuple) -> SpectralTrace {
    let d = t.dim();
    let mut tr = SpectralTrace { value: 0.0, history: Vec::new(), ks: Vec::new(), exact_zero: false };
    let mut q = CMatrix::identity(d);
    let mut log_scale = 0.0;
    for k in 1..=MAX_STEPS as u64 {
        q = t.apply_completely_positive(&q);
        let nq = op_norm(&q);
        if nq == 0.0 || q.is_zero() {
            tr.exact_zero = true;
            push_running_min(&mut tr, k, 0.0);
            return tr;
        }
        log_scale += nq.ln();
        q = q.scale_real(1.0 / nq);
        let est = (log_scale / (2.0 * k as f64)).exp();
        let prev = tr.value;
        push_running_min(&mut tr, k, est);
        if k > 1 && (prev - tr.value).abs() < 1e-8 {
            break;
        }
    }
    // A stall can sit at a positive level right up to the nilpotency order (e.g. S_i^*).
    if jointly_nilpotent(t) {
        tr.exact_zero = true;
        tr.value = 0.0;
        tr.history.push(0.0);
        tr.ks.push((t.dim() as u64).max(tr.ks.last().map_or(0, |k| k + 1)));
    }
    tr
}

/// Whether all products of some length vanish. The chain `V_0 = C^d`, `V_{j+1} = Σ T_i V_j`
/// is nonincreasing, so it either reaches `{0}` or stops shrinking within `d` steps.
pub(crate) fn jointly_nilpotent(t: &OperatorTuple) -> bool {
    let d = t.dim();
    let mut proj = CMatrix::identity(d);
    let mut rank = d;
    loop {
        let e = eigh(&t.apply_completely_positive(&proj));
        let top = e.eigenvalues[d - 1];
        if top <= 0.0 {
            return true;
        }
        let next = e.eigenvalues.iter().filter(|&&l| l > 1e-12 * top).count();
        if next >= rank {
            return false;
        }
        let v = CMatrix::from_fn(d, next, |i, j| e.eigenvectors[(i, d - next + j)]);
        proj = v.mul_adj(&v);
        rank = next;
    }
}
