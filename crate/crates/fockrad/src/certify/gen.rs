//! Random instance families for the suites.

use rand::Rng;

use crate::matrix::{gaussian_matrix, rng_from_seed, CMatrix, SeededRng, C64};
use crate::radii;
use crate::tuple::OperatorTuple;
use crate::words::Word;

/// A tuple that maps grade `j` to grade `j + 1` over `m` grades of size `d_block`, scaled to
/// row norm one. Every product of length `m` vanishes.
pub fn gen_nilpotent_contraction(n: usize, d_block: usize, m: usize, seed: u64) -> OperatorTuple {
    let mut rng = rng_from_seed(seed);
    nilpotent_graded(&mut rng, n, d_block, m)
}

pub(crate) fn nilpotent_graded(rng: &mut SeededRng, n: usize, d_block: usize, m: usize) -> OperatorTuple {
    assert!(m >= 2 && n >= 1 && d_block >= 1, "need m >= 2 and nonempty blocks");
    let d = m * d_block;
    let single_chain = n == 1 && d_block == 1;
    let mats: Vec<CMatrix> = (0..n)
        .map(|_| {
            let mut t = CMatrix::zeros(d, d);
            for j in 0..m - 1 {
                let blk = if single_chain {
                    CMatrix::identity(1)
                } else {
                    gaussian_matrix(rng, d_block, d_block)
                };
                t.set_block((j + 1) * d_block, j * d_block, &blk);
            }
            t
        })
        .collect();
    normalize_row(OperatorTuple::new(mats).expect("blocks share one size"), 1.0)
}

/// `t` rescaled so that its row norm is `target` (the zero tuple is returned unchanged).
pub(crate) fn normalize_row(t: OperatorTuple, target: f64) -> OperatorTuple {
    let row = radii::row_value(&t);
    if row == 0.0 {
        return t;
    }
    t.scaled_real(target / row)
}

pub(crate) fn generic(rng: &mut SeededRng, n: usize, d: usize) -> OperatorTuple {
    let scale = 0.2 + 1.8 * rng.random::<f64>();
    let mats = (0..n).map(|_| gaussian_matrix(rng, d, d).scale_real(scale / (d as f64).sqrt())).collect();
    OperatorTuple::new(mats).expect("square matrices of one size")
}

/// Random tuple scaled by `u / row_norm`, `u` uniform in `(0, 1]`.
pub(crate) fn row_contraction(rng: &mut SeededRng, n: usize, d: usize) -> OperatorTuple {
    let t = generic(rng, n, d);
    let u = 1.0 - rng.random::<f64>();
    normalize_row(t, u)
}

/// Polynomials without constant term in one graded nilpotent matrix `N` (`N^m = 0`), scaled
/// to a row contraction. The entries commute and all products of length `m` vanish.
pub(crate) fn commuting_nilpotent(rng: &mut SeededRng, n: usize, d_block: usize, m: usize) -> OperatorTuple {
    let base = nilpotent_graded(rng, 1, d_block, m);
    let nmat = base.get(0).clone();
    let mut powers = vec![nmat.clone()];
    for _ in 2..m {
        let next = powers.last().unwrap().matmul(&nmat);
        powers.push(next);
    }
    let mats = (0..n)
        .map(|_| {
            let mut t = CMatrix::zeros(nmat.rows(), nmat.cols());
            for p in &powers {
                t.axpy(gaussian_c64(rng), p);
            }
            t
        })
        .collect();
    let t = OperatorTuple::new(mats).expect("square matrices of one size");
    let u = 1.0 - rng.random::<f64>();
    normalize_row(t, u)
}

pub(crate) fn gaussian_c64(rng: &mut SeededRng) -> C64 {
    gaussian_matrix(rng, 1, 1)[(0, 0)]
}

pub(crate) fn pick(rng: &mut SeededRng, lo: usize, hi: usize) -> usize {
    rng.random_range(lo..=hi)
}

/// Gaussian coefficients on every word of length `min_deg..=deg`.
pub(crate) fn random_poly(rng: &mut SeededRng, n: usize, min_deg: usize, deg: usize) -> Vec<(Word, C64)> {
    crate::tuple::poly_words_up_to(n, deg)
        .into_iter()
        .filter(|w| w.len() >= min_deg)
        .map(|w| (w, gaussian_c64(rng)))
        .collect()
}

pub(crate) fn l2_coeffs(p: &[(Word, C64)]) -> f64 {
    p.iter().map(|(_, a)| a.norm_sqr()).sum::<f64>().sqrt()
}
