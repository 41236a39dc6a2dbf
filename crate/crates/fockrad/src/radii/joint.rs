//! Joint numerical radius through the operators `A_q` and the ρ-radius through `Γ_{ρ,r}`.
//!
//! `A_q` is the compression of `Σ R_i^* ⊗ T_i` to `P_q ⊗ H`, so `(A_q x)_α = Σ_i T_i x_{αg_i}`.
//! The gauge `e_α ⊗ h ↦ e^{i|α|θ} e_α ⊗ h` rotates `A_q` by `e^{-iθ}`, hence
//! `ω(A_q) = λ_max(Re A_q)`, and `λ I − Re A_q` is a tree operator with diagonal `λ I`
//! and edges `−T_i / 2`.

use super::tree::TreeOperator;
use crate::matrix::{cholesky, eigvalsh, CMatrix, C64};
use crate::tuple::OperatorTuple;

/// Whether `ω(A_q) < λ`.
fn below(edges: &TreeOperator, lambda: f64, q: usize) -> bool {
    let c = CMatrix::scalar(edges.dim(), C64::new(lambda, 0.0));
    edges.walk_with(&c, q, false).is_ok()
}

fn edge_operator(t: &OperatorTuple) -> TreeOperator {
    let d = t.dim();
    TreeOperator::new(CMatrix::identity(d), t.mats().iter().map(|m| m.scale_real(-0.5)).collect())
}

/// `ω(A_q)` for `q = 1..=q_max`.
pub fn a_q_sequence(t: &OperatorTuple, row: f64, q_max: usize) -> Vec<f64> {
    let op = edge_operator(t);
    let mut out = Vec::with_capacity(q_max);
    if row == 0.0 {
        return vec![0.0; q_max];
    }
    let mut lo = 0.5 * row * (1.0 - 1e-12);
    for q in 1..=q_max {
        let v = if q == 1 { 0.5 * row } else { bisect_level(&op, lo, row * (1.0 + 1e-12), q) };
        out.push(v);
        lo = v;
    }
    out
}

fn bisect_level(op: &TreeOperator, mut lo: f64, mut hi: f64, q: usize) -> f64 {
    // Invariant: ω(A_q) ≥ lo (up to rounding) and ω(A_q) < hi.
    let tol = 1e-15 * hi.max(f64::MIN_POSITIVE);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if below(op, mid, q) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Search for a verified upper bound on `w(T) = sup_q ω(A_q)`.
///
/// If `S ≻ 0` satisfies `λ I − ¼ Σ T_i S^{-1} T_i^* ⪰ S`, every Schur complement of
/// `λ I − Re A_q` dominates `S`, for all `q`, so `w(T) ≤ λ`. `S` is taken from the
/// complements at a slightly smaller level `λ_0`, run until they settle.
#[derive(Clone, Debug)]
pub struct UpperCertificate {
    pub upper: f64,
    /// Improved lower bound found on the way (a depth where the recursion broke).
    pub lower: f64,
    pub depth_used: usize,
}

pub fn certify_upper(t: &OperatorTuple, lower: f64, row: f64) -> Option<UpperCertificate> {
    if row == 0.0 {
        return Some(UpperCertificate { upper: 0.0, lower: 0.0, depth_used: 0 });
    }
    let op = edge_operator(t);
    let d = t.dim();
    let mut lower = lower;
    let mut gap = (1e-9 * row).max(4.0 * f64::EPSILON * row);
    let max_depth = 20_000usize.min(2_000_000 / (d * d * d * t.n()).max(1));
    while gap <= 2.0 * row {
        let lam_up = lower + gap;
        let lam0 = lower + 0.5 * gap;
        let mut cur = CMatrix::scalar(d, C64::new(lam0, 0.0));
        let mut broke = None;
        let mut settled = None;
        let mut base = op.clone();
        base.c = CMatrix::scalar(d, C64::new(lam0, 0.0));
        for j in 0..max_depth {
            if cholesky(&cur).is_none() {
                broke = Some(j);
                break;
            }
            let next = base.step_dense(&cur);
            let dec = eigvalsh(&cur.sub(&next));
            if dec[dec.len() - 1] <= 0.25 * gap {
                settled = Some((j, cur.clone()));
                break;
            }
            cur = next;
        }
        if broke.is_some() {
            // ω(A_j) ≥ λ_0 for the failing depth j.
            lower = lam0;
            gap *= 2.0;
            continue;
        }
        if let Some((j, s)) = settled {
            if cholesky(&s).is_some() {
                let mut up = op.clone();
                up.c = CMatrix::scalar(d, C64::new(lam_up, 0.0));
                let f = up.step_dense(&s);
                let z = f.sub(&s);
                let zmin = eigvalsh(&z)[0];
                let smin = eigvalsh(&s)[0];
                let noise = 1e-13 * lam_up;
                if zmin > noise && smin > noise {
                    return Some(UpperCertificate { upper: lam_up, lower, depth_used: j });
                }
            }
        }
        gap *= 2.0;
    }
    None
}

/// `Γ_{ρ,r}(T/t)` restricted to `P_q ⊗ H`, shifted by `shift`.
fn gamma_operator(t: &OperatorTuple, rho: f64, r: f64, scale_t: f64, shift: f64) -> TreeOperator {
    let s = r / scale_t;
    let mut c = t.row_gram().scale_real((rho - 2.0) * s * s);
    c.add_diag(C64::new(rho + shift, 0.0));
    let edges = t.mats().iter().map(|m| m.scale_real((1.0 - rho) * s)).collect();
    TreeOperator::new(c.hermitian_part(), edges)
}

/// Smallest eigenvalue among the Schur complements; negative iff `Γ` fails positivity.
pub fn gamma_margin(t: &OperatorTuple, rho: f64, r: f64, scale_t: f64, q: usize, shift: f64) -> f64 {
    match gamma_operator(t, rho, r, scale_t, shift).walk(q, true) {
        Ok(m) => m,
        Err((_, m)) => m.min(-f64::MIN_POSITIVE),
    }
}

pub const R_GRID: usize = 101;

/// Membership of `T/t` in the compressed class: `Γ_{ρ,r}(T/t) ⪰ −τ` on the `r` grid and
/// at a golden-section refinement around the worst grid point.
pub fn rho_member(t: &OperatorTuple, rho: f64, scale_t: f64, q: usize, tau: f64) -> bool {
    let grid: Vec<f64> = (0..R_GRID).map(|k| 0.01 + 0.99 * k as f64 / (R_GRID - 1) as f64).collect();
    // Cheap pass first: positivity only, top of the grid first since it usually binds.
    for &r in grid.iter().rev() {
        if gamma_operator(t, rho, r, scale_t, tau).walk(q, false).is_err() {
            return false;
        }
    }
    let margins: Vec<f64> = grid.iter().map(|&r| gamma_margin(t, rho, r, scale_t, q, tau)).collect();
    let mut k = 0;
    for i in 1..margins.len() {
        if margins[i] < margins[k] {
            k = i;
        }
    }
    let a = grid[k.saturating_sub(1)];
    let b = grid[(k + 1).min(grid.len() - 1)];
    let f = |r: f64| gamma_margin(t, rho, r, scale_t, q, tau);
    let (_, fmin) = golden_min(f, a, b, 1e-6);
    fmin >= 0.0
}

/// Golden-section search for a minimizer on `[a, b]`.
pub fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let fa = f(a);
    let fb = f(b);
    let mut best = (c, fc);
    for cand in [(d, fd), (a, fa), (b, fb)] {
        if cand.1 < best.1 {
            best = cand;
        }
    }
    best
}

/// Golden-section search for a maximizer on `[a, b]`.
pub fn golden_max(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> (f64, f64) {
    let (x, v) = golden_min(|x| -f(x), a, b, tol);
    (x, -v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{build_shifts, shift_tuple};
    use crate::matrix::{gaussian_matrix, kron, op_norm, rng_from_seed};
    use crate::radii::numerical_radius;

    /// Dense `A_q` assembled from truncated right creations.
    fn dense_a_q(t: &OperatorTuple, q: usize) -> CMatrix {
        let f = build_shifts(t.n(), q).unwrap();
        let dim = f.basis.len() * t.dim();
        let mut a = CMatrix::zeros(dim, dim);
        for (r, m) in f.r.iter().zip(t.mats()) {
            a = a.add(&kron(&r.adjoint(), m));
        }
        a
    }

    fn random_tuple(seed: u64, n: usize, d: usize) -> OperatorTuple {
        let mut rng = rng_from_seed(seed);
        OperatorTuple::new((0..n).map(|_| gaussian_matrix(&mut rng, d, d)).collect()).unwrap()
    }

    #[test]
    fn recursion_matches_dense_assembly() {
        for seed in 0..6 {
            let n = 1 + (seed as usize % 3);
            let d = 2 + (seed as usize % 2);
            let t = random_tuple(seed, n, d);
            let row = op_norm(&t.row_gram()).sqrt();
            let seq = a_q_sequence(&t, row, 3);
            for q in 1..=3 {
                let dense = numerical_radius(&dense_a_q(&t, q));
                assert!((seq[q - 1] - dense).abs() < 1e-8 * row, "q={q}: {} vs {dense}", seq[q - 1]);
            }
            assert!(seq.windows(2).all(|w| w[1] >= w[0] - 1e-14 * row));
        }
    }

    #[test]
    fn first_level_is_half_row_norm() {
        let t = random_tuple(3, 2, 3);
        let row = op_norm(&t.row_gram()).sqrt();
        let dense = numerical_radius(&dense_a_q(&t, 1));
        assert!((dense - 0.5 * row).abs() < 1e-9);
    }

    #[test]
    fn certificate_brackets_the_limit() {
        for seed in 10..14 {
            let t = random_tuple(seed, 2, 3);
            let row = op_norm(&t.row_gram()).sqrt();
            let seq = a_q_sequence(&t, row, 60);
            let lower = *seq.last().unwrap();
            let cert = certify_upper(&t, lower, row).expect("certificate");
            assert!(cert.upper >= lower);
            assert!(cert.upper <= row * (1.0 + 1e-12));
            let deeper = a_q_sequence(&t, row, 200);
            assert!(*deeper.last().unwrap() <= cert.upper);
            assert!(cert.upper - lower < 5e-3 * row, "{} {}", cert.upper, lower);
        }
    }

    #[test]
    fn nilpotent_shift_certificate_is_tight() {
        for m in 2..6 {
            let t = shift_tuple(2, m).unwrap();
            let seq = a_q_sequence(&t, 1.0, m);
            let exact = (std::f64::consts::PI / (m as f64 + 1.0)).cos();
            assert!((seq[m - 2] - exact).abs() < 1e-12);
            let cert = certify_upper(&t, seq[m - 1], 1.0).expect("certificate");
            assert!(cert.upper - exact < 1e-6, "m={m}: {}", cert.upper);
        }
    }

    #[test]
    fn golden_section_finds_parabola_vertex() {
        let (x, v) = golden_min(|x| (x - 0.3).powi(2) + 1.0, 0.0, 1.0, 1e-9);
        assert!((x - 0.3).abs() < 1e-6 && (v - 1.0).abs() < 1e-12);
    }
}
