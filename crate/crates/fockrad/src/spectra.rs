//! Right spectrum membership, sampled joint numerical ranges, the inclusions between them
//! and the radius balls, and convexity of compressed numerical ranges.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::build_shifts;
use crate::matrix::{
    dot, eigh, gaussian_matrix, norm, normalize, random_unit_vector, rng_from_seed, CMatrix, SeededRng, C64,
};
use crate::radii;
use crate::toeplitz::{fejer_factorize, MultiToeplitzPoly};
use crate::tuple::OperatorTuple;
use crate::words::Word;

pub const DEFAULT_DELTA_FLOOR: f64 = 1e-10;
/// Slack for comparisons against a sampled range.
pub const RANGE_TOL: f64 = 1e-3;
/// Slack for the radius-ball inclusions.
pub const BALL_TOL: f64 = 1e-8;
const SWEEP_ANGLES: usize = 16;

#[derive(Clone, Debug, Serialize)]
pub struct Membership {
    pub member: bool,
    /// Smallest eigenvalue of `Σ (λ_i I − T_i)(λ_i I − T_i)^*`.
    pub margin: f64,
    /// Unit eigenvector for `margin`; `⟨T_i h, h⟩ ≈ λ_i` when the point is a member.
    #[serde(skip)]
    pub witness: Vec<C64>,
}

fn gram_at(t: &OperatorTuple, lambda: &[C64]) -> CMatrix {
    let d = t.dim();
    let mut g = CMatrix::zeros(d, d);
    for (m, &l) in t.mats().iter().zip(lambda) {
        let mut a = m.scale_real(-1.0);
        a.add_diag(l);
        g = g.add(&a.mul_adj(&a));
    }
    g.hermitian_part()
}

pub fn right_spectrum_member(t: &OperatorTuple, lambda: &[C64], delta_floor: f64) -> Result<Membership> {
    if lambda.len() != t.n() {
        return Err(Error::Shape(format!("point has {} components, tuple has {}", lambda.len(), t.n())));
    }
    let e = eigh(&gram_at(t, lambda));
    let margin = e.eigenvalues[0];
    Ok(Membership { member: margin < delta_floor, margin, witness: e.vector(0) })
}

#[derive(Clone, Debug, Serialize)]
pub struct RangeSample {
    pub points: Vec<Vec<C64>>,
    #[serde(skip)]
    pub vectors: Vec<Vec<C64>>,
    pub seed: u64,
}

/// `(⟨T_1 h, h⟩, ..., ⟨T_n h, h⟩)`.
pub fn range_point(t: &OperatorTuple, h: &[C64]) -> Vec<C64> {
    t.mats().iter().map(|m| dot(h, &m.matvec(h))).collect()
}

/// `count` points from uniformly random unit vectors, followed by boundary points from top
/// eigenvectors of `Re(e^{iθ} T_i)` and of real parts of random combinations.
pub fn sample_numerical_range(t: &OperatorTuple, count: usize, seed: u64) -> Result<RangeSample> {
    if count == 0 {
        return Err(Error::InvalidInput("sample count must be at least 1".into()));
    }
    let d = t.dim();
    let mut rng = rng_from_seed(seed);
    let mut vectors: Vec<Vec<C64>> = (0..count).map(|_| random_unit_vector(&mut rng, d)).collect();
    let mut mats: Vec<CMatrix> = Vec::new();
    for m in t.mats() {
        for k in 0..SWEEP_ANGLES {
            let th = 2.0 * std::f64::consts::PI * k as f64 / SWEEP_ANGLES as f64;
            mats.push(m.rotated_real_part(th));
        }
    }
    if t.n() > 1 {
        for _ in 0..SWEEP_ANGLES * t.n() {
            let lam = random_unit_vector(&mut rng, t.n());
            mats.push(t.combination(&lam).hermitian_part());
        }
    }
    vectors.extend(crate::par_map(&mats, |h| {
        let e = eigh(h);
        e.vector(e.eigenvalues.len() - 1)
    }));
    let points = crate::par_map(&vectors, |h| range_point(t, h));
    Ok(RangeSample { points, vectors, seed })
}

fn dist(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

fn l2(a: &[C64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

#[derive(Clone, Debug, Serialize)]
pub struct PointReport {
    pub lambda: Vec<C64>,
    pub member: bool,
    pub margin: f64,
    pub norm: f64,
    /// Distance to the sampled range (members only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dist_range: Option<f64>,
    /// `‖λ‖ − w_e`, `‖λ‖ − w`, `‖λ‖ − ‖[T]‖` (members only; positive means outside the ball).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub excess: Option<[f64; 3]>,
}

#[derive(Clone, Debug, Serialize)]
pub struct InclusionReport {
    pub points: Vec<PointReport>,
    pub euclidean_radius: f64,
    /// Upper bound used for `w`: a verified certificate when one exists, else the row norm.
    pub joint_numerical_upper: f64,
    pub row_norm: f64,
    pub members: usize,
    /// Ball inclusion failures and range failures that survived resampling.
    pub violations: Vec<String>,
    /// Range distances above tolerance at the first sample size only.
    pub sampling_shortfalls: usize,
}

pub fn inclusion_check(t: &OperatorTuple, grid: &[Vec<C64>], seed: u64) -> Result<InclusionReport> {
    let base = 2000;
    let sample = sample_numerical_range(t, base, seed)?;
    let memberships: Vec<Result<Membership>> =
        crate::par_map(grid, |l| right_spectrum_member(t, l, DEFAULT_DELTA_FLOOR));
    let memberships = memberships.into_iter().collect::<Result<Vec<_>>>()?;
    // Members seed the euclidean radius search: μ = conj(λ)/‖λ‖ attains |Σ μ_i λ_i| = ‖λ‖.
    let seeds: Vec<Vec<C64>> = grid
        .iter()
        .zip(&memberships)
        .filter(|(l, m)| m.member && l2(l) > 0.0)
        .map(|(l, _)| {
            let s = l2(l);
            l.iter().map(|z| z.conj() / s).collect()
        })
        .collect();
    let we = radii::euclidean_radius_with_seeds(t, &seeds).value;
    let row = radii::row_value(t);
    let w_up = radii::joint_numerical_radius_certified(t, 12)?.upper.unwrap_or(row).min(row);
    let mut violations = Vec::new();
    let mut shortfalls = 0;
    let mut big: Option<RangeSample> = None;
    let mut points = Vec::with_capacity(grid.len());
    for (lambda, m) in grid.iter().zip(memberships) {
        let nl = l2(lambda);
        let mut rep =
            PointReport { lambda: lambda.clone(), member: m.member, margin: m.margin, norm: nl, dist_range: None, excess: None };
        if m.member {
            let witness = range_point(t, &m.witness);
            let nearest = |s: &RangeSample| {
                s.points.iter().map(|p| dist(p, lambda)).fold(dist(&witness, lambda), f64::min)
            };
            let mut dr = nearest(&sample);
            if dr > RANGE_TOL {
                shortfalls += 1;
                let s = big.get_or_insert_with(|| {
                    sample_numerical_range(t, 10 * base, seed ^ 0x9e37_79b9).expect("count is positive")
                });
                dr = nearest(s);
                if dr > RANGE_TOL {
                    violations.push(format!("point {:?} is {dr:.3e} from the sampled range", lambda));
                }
            }
            let excess = [nl - we, nl - w_up, nl - row];
            for (name, e) in ["w_e", "w", "row norm"].iter().zip(excess) {
                if e > BALL_TOL {
                    violations.push(format!("point {:?} lies {e:.3e} outside the {name} ball", lambda));
                }
            }
            rep.dist_range = Some(dr);
            rep.excess = Some(excess);
        }
        points.push(rep);
    }
    if we > w_up + BALL_TOL {
        violations.push(format!("w_e = {we} exceeds the bound {w_up} on w"));
    }
    let members = points.iter().filter(|p| p.member).count();
    Ok(InclusionReport {
        points,
        euclidean_radius: we,
        joint_numerical_upper: w_up,
        row_norm: row,
        members,
        violations,
        sampling_shortfalls: shortfalls,
    })
}

/// A tuple with `λ` planted in its right spectrum: a common eigenvector `h_0` of the `T_i^*`
/// with eigenvalues `conj(λ_i)`, the rest random.
pub fn planted_spectrum_tuple(rng: &mut SeededRng, lambda: &[C64], d: usize) -> OperatorTuple {
    let h0 = random_unit_vector(rng, d);
    let proj = CMatrix::from_fn(d, d, |i, j| h0[i] * h0[j].conj());
    let mut comp = CMatrix::identity(d).sub(&proj);
    comp = comp.hermitian_part();
    let mats = lambda
        .iter()
        .map(|&l| {
            let r = gaussian_matrix(rng, d, d).scale_real(1.0 / (d as f64).sqrt());
            // T = (I − h_0 h_0^*) R + λ h_0 h_0^* gives T^* h_0 = conj(λ) h_0.
            comp.matmul(&r).add(&proj.scale(l))
        })
        .collect();
    OperatorTuple::new(mats).expect("square matrices of one size")
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvexityTrial {
    pub t: f64,
    pub target: Vec<C64>,
    pub optimizer_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub constructive_residual: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvexityReport {
    pub n: usize,
    pub m: usize,
    pub trials: Vec<ConvexityTrial>,
    /// Worst over trials of the best backend's residual.
    pub worst_residual: f64,
    pub worst_optimizer: f64,
    pub worst_constructive: f64,
}

/// `P_{P_m} f(S) |P_m` for a polynomial given by `(word, coefficient)` pairs.
pub fn compress_polynomial(f: &[(Word, C64)], n: usize, m: usize) -> Result<CMatrix> {
    for (w, _) in f {
        if w.max_letter() as usize > n {
            return Err(Error::InvalidInput(format!("word {w} uses a generator beyond n = {n}")));
        }
    }
    let sh = build_shifts(n, m)?;
    Ok(sh.left_tuple().eval_poly(f))
}

fn quadratic_values(xs: &[CMatrix], s: &[C64]) -> Vec<C64> {
    xs.iter().map(|x| dot(s, &x.matvec(s))).collect()
}

fn max_residual(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Gauss–Newton with minimum-norm steps for `⟨X_j s, s⟩ = z_j`, `‖s‖² = 1`.
fn solve_quadratic(xs: &[CMatrix], target: &[C64], start: &[C64]) -> (f64, Vec<C64>) {
    let dim = start.len();
    let k = xs.len();
    let mut s = start.to_vec();
    normalize(&mut s);
    let mut best = (max_residual(&quadratic_values(xs, &s), target), s.clone());
    for _ in 0..100 {
        let vals = quadratic_values(xs, &s);
        let res = max_residual(&vals, target);
        if res < best.0 {
            best = (res, s.clone());
        }
        if res < 1e-14 {
            break;
        }
        // Real equations: Re and Im of each value, then the norm.
        let rows = 2 * k + 1;
        let mut jac = nalgebra::DMatrix::<f64>::zeros(rows, 2 * dim);
        let mut r = nalgebra::DVector::<f64>::zeros(rows);
        for (j, x) in xs.iter().enumerate() {
            let xs_ = x.matvec(&s);
            let xas = x.adj_matvec(&s);
            // d⟨Xs,s⟩ = ⟨X ds, s⟩ + ⟨X s, ds⟩ = Σ_a ds_a conj(X^* s)_a + conj(ds_a) (Xs)_a.
            for a in 0..dim {
                let u = xas[a].conj();
                let v = xs_[a];
                // ds_a = 1: u + v; ds_a = i: i u − i v.
                let dre = u + v;
                let dim_ = C64::new(0.0, 1.0) * (u - v);
                jac[(2 * j, 2 * a)] = dre.re;
                jac[(2 * j + 1, 2 * a)] = dre.im;
                jac[(2 * j, 2 * a + 1)] = dim_.re;
                jac[(2 * j + 1, 2 * a + 1)] = dim_.im;
            }
            let e = vals[j] - target[j];
            r[2 * j] = e.re;
            r[2 * j + 1] = e.im;
        }
        for a in 0..dim {
            jac[(2 * k, 2 * a)] = 2.0 * s[a].re;
            jac[(2 * k, 2 * a + 1)] = 2.0 * s[a].im;
        }
        r[2 * k] = norm(&s).powi(2) - 1.0;
        let jjt = &jac * jac.transpose();
        let mut reg = jjt.clone();
        let tr = (0..rows).map(|i| jjt[(i, i)]).sum::<f64>() / rows as f64;
        for i in 0..rows {
            reg[(i, i)] += 1e-14 * tr.max(1e-300);
        }
        let Some(ch) = reg.cholesky() else { break };
        let y = ch.solve(&r);
        let step = jac.transpose() * y;
        let mut damp = 1.0;
        let mut moved = false;
        while damp > 1e-6 {
            let cand: Vec<C64> =
                (0..dim).map(|a| s[a] - C64::new(step[2 * a], step[2 * a + 1]) * damp).collect();
            let mut cn = cand.clone();
            normalize(&mut cn);
            let cres = max_residual(&quadratic_values(xs, &cn), target);
            if cres < res {
                s = cn;
                moved = true;
                break;
            }
            damp *= 0.5;
        }
        if !moved {
            break;
        }
    }
    let fin = max_residual(&quadratic_values(xs, &s), target);
    if fin < best.0 {
        best = (fin, s);
    }
    best
}

/// Autocorrelations `c_δ(s) = ⟨S_δ s, s⟩` of `s ∈ P_m` for `1 ≤ |δ| ≤ m`, as a scalar
/// multi-Toeplitz polynomial with constant term `‖s‖²`.
fn autocorrelation(s: &[C64], n: usize, m: usize) -> Result<MultiToeplitzPoly> {
    let sh = build_shifts(n, m)?;
    let words = sh.basis.words();
    let tup = sh.left_tuple();
    let coeffs = words[1..].iter().map(|w| (w.clone(), CMatrix::scalar(1, dot(s, &tup.product(w).matvec(s))))).collect();
    MultiToeplitzPoly::new(n, m + 1, CMatrix::scalar(1, C64::new(norm(s).powi(2), 0.0)), coeffs)
}

/// Factorization route: the convex combination of two autocorrelation sequences is a positive
/// polynomial whose factor `s` reproduces it.
fn constructive(n: usize, m: usize, p: &[C64], q: &[C64], t: f64, xs: &[CMatrix], target: &[C64]) -> Option<f64> {
    let ap = autocorrelation(p, n, m).ok()?;
    let aq = autocorrelation(q, n, m).ok()?;
    let coeffs = ap
        .coefficients()
        .iter()
        .map(|(w, a)| {
            let b = aq.coefficient(w).expect("same words");
            (w.clone(), a.scale_real(t).add(&b.scale_real(1.0 - t)))
        })
        .collect();
    let mix = MultiToeplitzPoly::new(n, m + 1, CMatrix::identity(1), coeffs).ok()?;
    let fz = fejer_factorize(&mix, m).ok()?;
    let s: Vec<C64> = fz.factor.phi.iter().map(|c| c[(0, 0)]).collect();
    Some(max_residual(&quadratic_values(xs, &s), target))
}

/// Searches, for random pairs of unit `p, q ∈ P_m` and `t ∈ (0,1)`, a unit `s` with
/// `⟨f_j s, s⟩ = t ⟨f_j p, p⟩ + (1−t) ⟨f_j q, q⟩` for every `j`.
pub fn compressed_range_convexity(
    f_coeffs: &[Vec<(Word, C64)>],
    n: usize,
    m: usize,
    trials: usize,
    seed: u64,
) -> Result<ConvexityReport> {
    if f_coeffs.is_empty() {
        return Err(Error::InvalidInput("at least one polynomial is required".into()));
    }
    let xs = f_coeffs.iter().map(|f| compress_polynomial(f, n, m)).collect::<Result<Vec<_>>>()?;
    let dim = xs[0].rows();
    let mut rng = rng_from_seed(seed);
    let setups: Vec<(Vec<C64>, Vec<C64>, f64, Vec<Vec<C64>>)> = (0..trials)
        .map(|_| {
            let p = random_unit_vector(&mut rng, dim);
            let q = random_unit_vector(&mut rng, dim);
            let t = rand::Rng::random_range(&mut rng, 0.05..0.95);
            let extra = (0..4).map(|_| random_unit_vector(&mut rng, dim)).collect();
            (p, q, t, extra)
        })
        .collect();
    let trials_out = crate::par_map(&setups, |(p, q, t, extra)| {
        let vp = quadratic_values(&xs, p);
        let vq = quadratic_values(&xs, q);
        let target: Vec<C64> = vp.iter().zip(&vq).map(|(a, b)| a * *t + b * (1.0 - t)).collect();
        let mut starts: Vec<Vec<C64>> = Vec::new();
        for k in 0..8 {
            let ph = C64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / 8.0);
            starts.push(p.iter().zip(q).map(|(a, b)| a * t.sqrt() + b * ph * (1.0 - t).sqrt()).collect());
        }
        starts.extend(extra.iter().cloned());
        let mut best = f64::INFINITY;
        for st in &starts {
            if norm(st) == 0.0 {
                continue;
            }
            best = best.min(solve_quadratic(&xs, &target, st).0);
            if best < 1e-12 {
                break;
            }
        }
        let cons = constructive(n, m, p, q, *t, &xs, &target);
        ConvexityTrial { t: *t, target, optimizer_residual: best, constructive_residual: cons }
    });
    let worst_optimizer = trials_out.iter().map(|t| t.optimizer_residual).fold(0.0, f64::max);
    let worst_constructive = trials_out
        .iter()
        .map(|t| t.constructive_residual.unwrap_or(f64::INFINITY))
        .fold(0.0, f64::max);
    let worst_residual = trials_out
        .iter()
        .map(|t| t.optimizer_residual.min(t.constructive_residual.unwrap_or(f64::INFINITY)))
        .fold(0.0, f64::max);
    Ok(ConvexityReport { n, m, trials: trials_out, worst_residual, worst_optimizer, worst_constructive })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::shift_tuple;
    use crate::matrix::{ONE, ZERO};

    #[test]
    fn jordan_block_membership() {
        let s = shift_tuple(1, 4).unwrap();
        assert!(right_spectrum_member(&s, &[ZERO], DEFAULT_DELTA_FLOOR).unwrap().member);
        assert!(!right_spectrum_member(&s, &[ONE], DEFAULT_DELTA_FLOOR).unwrap().member);
        let lam = [C64::new(0.3, 0.1), C64::new(-0.2, 0.5)];
        let t = OperatorTuple::scalars(&lam, 3);
        let m = right_spectrum_member(&t, &lam, DEFAULT_DELTA_FLOOR).unwrap();
        assert!(m.member && m.margin.abs() < 1e-15);
    }

    #[test]
    fn range_of_jordan_block_is_half_disc() {
        let s = shift_tuple(1, 2).unwrap();
        let r = sample_numerical_range(&s, 500, 1).unwrap();
        let top = r.points.iter().map(|p| p[0].norm()).fold(0.0, f64::max);
        assert!(top <= 0.5 + 1e-12 && top > 0.5 - 1e-9);
        let z = sample_numerical_range(&OperatorTuple::zero(2, 3), 10, 1).unwrap();
        assert!(z.points.iter().all(|p| p.iter().all(|c| *c == ZERO)));
    }

    #[test]
    fn diagonal_tuple_range_in_hull() {
        // Real diagonal pair: points are convex combinations of the diagonal entry pairs.
        let a = [0.0, 1.0, 0.0];
        let b = [0.0, 0.0, 1.0];
        let t = OperatorTuple::new(vec![CMatrix::diag_real(&a), CMatrix::diag_real(&b)]).unwrap();
        let r = sample_numerical_range(&t, 300, 4).unwrap();
        for p in &r.points {
            let (x, y) = (p[0], p[1]);
            assert!(x.im.abs() < 1e-14 && y.im.abs() < 1e-14);
            assert!(x.re >= -1e-14 && y.re >= -1e-14 && x.re + y.re <= 1.0 + 1e-14);
        }
        for h in &r.vectors {
            assert!((norm(h) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn planted_point_is_found_and_included() {
        let mut rng = rng_from_seed(12);
        let lam = vec![C64::new(0.2, -0.1), C64::new(0.05, 0.3)];
        let t = planted_spectrum_tuple(&mut rng, &lam, 4);
        let rep = inclusion_check(&t, &[lam.clone(), vec![ZERO, ZERO]], 3).unwrap();
        assert!(rep.points[0].member);
        assert!(rep.violations.is_empty(), "{:?}", rep.violations);
        assert!(rep.points[0].dist_range.unwrap() < 1e-6);
    }

    #[test]
    fn margin_is_lipschitz_in_lambda() {
        let mut rng = rng_from_seed(2);
        let t = OperatorTuple::new((0..2).map(|_| gaussian_matrix(&mut rng, 3, 3)).collect()).unwrap();
        let row = radii::row_value(&t);
        let l0 = random_unit_vector(&mut rng, 2);
        let mut dl = random_unit_vector(&mut rng, 2);
        let delta = 1e-3;
        dl.iter_mut().for_each(|z| *z *= delta);
        let l1: Vec<C64> = l0.iter().zip(&dl).map(|(a, b)| a + b).collect();
        let m0 = right_spectrum_member(&t, &l0, 0.0).unwrap().margin;
        let m1 = right_spectrum_member(&t, &l1, 0.0).unwrap().margin;
        assert!((m0 - m1).abs() <= 2.0 * delta * (1.0 + row) + delta * delta);
    }

    #[test]
    fn classical_numerical_range_is_convex() {
        let f = vec![vec![(Word::letter(1), ONE)]];
        let r = compressed_range_convexity(&f, 1, 3, 10, 7).unwrap();
        assert!(r.worst_optimizer <= 1e-6, "{}", r.worst_optimizer);
        assert!(r.worst_constructive <= 1e-6, "{}", r.worst_constructive);
    }

    #[test]
    fn constant_polynomials_give_a_point() {
        let f = vec![vec![(Word::empty(), C64::new(0.4, 0.2))], vec![(Word::empty(), ONE)]];
        let r = compressed_range_convexity(&f, 2, 2, 5, 1).unwrap();
        assert!(r.worst_residual <= 1e-12);
    }
}
