//! Operator radii of a tuple: row norm, e-norm, joint and e-spectral radii, the classical
//! and joint numerical radii, the euclidean radius and the ρ-radius.

pub mod joint;
pub mod sphere;
pub mod spectral;
pub mod tree;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{
    dot, eigh, extreme_eig, lanczos_max, norm, normalize, op_norm, random_unit_vector, rng_from_seed, CMatrix,
    C64, EIG_TOL, ZERO,
};
use crate::tuple::OperatorTuple;

pub use joint::{a_q_sequence, certify_upper, golden_max, golden_min, UpperCertificate};
pub use spectral::{joint_spectral_radius, matrix_spectral_radius};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadiusKind {
    RowNorm,
    ENorm,
    Spectral,
    ESpectral,
    Numerical,
    JointNumerical,
    Euclidean,
    Rho,
}

impl RadiusKind {
    pub const ALL: [RadiusKind; 7] = [
        RadiusKind::RowNorm,
        RadiusKind::ENorm,
        RadiusKind::Spectral,
        RadiusKind::ESpectral,
        RadiusKind::JointNumerical,
        RadiusKind::Euclidean,
        RadiusKind::Rho,
    ];

    pub fn parse(s: &str) -> Option<RadiusKind> {
        Some(match s {
            "row_norm" => RadiusKind::RowNorm,
            "e_norm" => RadiusKind::ENorm,
            "spectral" => RadiusKind::Spectral,
            "e_spectral" => RadiusKind::ESpectral,
            "numerical" => RadiusKind::Numerical,
            "joint_numerical" => RadiusKind::JointNumerical,
            "euclidean" => RadiusKind::Euclidean,
            "rho" => RadiusKind::Rho,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RadiusReport {
    pub value: f64,
    pub kind: RadiusKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    pub q_used: usize,
    pub history: Vec<f64>,
    pub tol: f64,
    /// Verified upper bound, when one was established.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub upper: Option<f64>,
    /// Independent estimate of the same quantity, when one is computed.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cross_check: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl RadiusReport {
    fn plain(kind: RadiusKind, value: f64, tol: f64) -> Self {
        RadiusReport {
            value,
            kind,
            rho: None,
            q_used: 0,
            history: vec![value],
            tol,
            upper: None,
            cross_check: None,
            notes: Vec::new(),
        }
    }
}

/// `‖Σ T_i T_i^*‖^{1/2}`.
pub fn row_norm(t: &OperatorTuple) -> RadiusReport {
    let v = row_value(t);
    RadiusReport::plain(RadiusKind::RowNorm, v, EIG_TOL * v.max(1e-300))
}

pub(crate) fn row_value(t: &OperatorTuple) -> f64 {
    extreme_eig(&t.row_gram(), true).0.max(0.0).sqrt()
}

/// Sparse triplet form of a tuple for matrix-free products on large spaces.
struct SparseTuple {
    d: usize,
    mats: Vec<Vec<(usize, usize, C64)>>,
}

const SPARSE_FROM: usize = 96;

impl SparseTuple {
    fn new(t: &OperatorTuple) -> Self {
        let d = t.dim();
        let mats = t
            .mats()
            .iter()
            .map(|m| {
                let mut v = Vec::new();
                for i in 0..d {
                    for j in 0..d {
                        if m[(i, j)] != ZERO {
                            v.push((i, j, m[(i, j)]));
                        }
                    }
                }
                v
            })
            .collect();
        SparseTuple { d, mats }
    }

    /// `y = Σ λ_i T_i x`.
    fn apply(&self, lambda: &[C64], x: &[C64], y: &mut [C64]) {
        y.iter_mut().for_each(|z| *z = ZERO);
        for (m, &l) in self.mats.iter().zip(lambda) {
            if l == ZERO {
                continue;
            }
            for &(i, j, a) in m {
                y[i] += l * a * x[j];
            }
        }
    }

    /// `y = Σ conj(λ_i) T_i^* x`.
    fn apply_adj(&self, lambda: &[C64], x: &[C64], y: &mut [C64]) {
        y.iter_mut().for_each(|z| *z = ZERO);
        for (m, &l) in self.mats.iter().zip(lambda) {
            if l == ZERO {
                continue;
            }
            for &(i, j, a) in m {
                y[j] += (l * a).conj() * x[i];
            }
        }
    }

    fn single(&self, i: usize, x: &[C64]) -> Vec<C64> {
        let mut y = vec![ZERO; self.d];
        for &(r, c, a) in &self.mats[i] {
            y[r] += a * x[c];
        }
        y
    }
}

/// Evaluates `Σ λ_i T_i` pieces on either a dense or a sparse route.
struct Combiner<'a> {
    t: &'a OperatorTuple,
    sparse: Option<SparseTuple>,
}

impl<'a> Combiner<'a> {
    fn new(t: &'a OperatorTuple) -> Self {
        let sparse = (t.dim() > SPARSE_FROM).then(|| SparseTuple::new(t));
        Combiner { t, sparse }
    }

    /// Top eigenpair of `Re Σ λ_i T_i`.
    fn top_real_part(&self, lambda: &[C64]) -> (f64, Vec<C64>) {
        match &self.sparse {
            None => extreme_eig(&self.t.combination(lambda).hermitian_part(), true),
            Some(sp) => {
                let mut tmp = vec![ZERO; sp.d];
                lanczos_max(sp.d, |x, y| {
                    sp.apply(lambda, x, y);
                    sp.apply_adj(lambda, x, &mut tmp);
                    for (a, b) in y.iter_mut().zip(&tmp) {
                        *a = (*a + b) * 0.5;
                    }
                })
            }
        }
    }

    /// Top singular triple `(σ, u, v)` of `Σ λ_i T_i`.
    fn top_singular(&self, lambda: &[C64]) -> (f64, Vec<C64>, Vec<C64>) {
        let (sig2, v, mv) = match &self.sparse {
            None => {
                let m = self.t.combination(lambda);
                let (s2, v) = extreme_eig(&m.adj_mul(&m), true);
                let mv = m.matvec(&v);
                (s2, v, mv)
            }
            Some(sp) => {
                let mut tmp = vec![ZERO; sp.d];
                let (s2, v) = lanczos_max(sp.d, |x, y| {
                    sp.apply(lambda, x, &mut tmp);
                    sp.apply_adj(lambda, &tmp, y);
                });
                let mut mv = vec![ZERO; sp.d];
                sp.apply(lambda, &v, &mut mv);
                (s2, v, mv)
            }
        };
        let sigma = norm(&mv);
        let _ = sig2;
        let u = if sigma > 0.0 { mv.iter().map(|z| z / sigma).collect() } else { v.clone() };
        (sigma, u, v)
    }

    /// `⟨T_i x, y⟩` for every `i`.
    fn coefficients(&self, x: &[C64], y: &[C64]) -> Vec<C64> {
        (0..self.t.n())
            .map(|i| match &self.sparse {
                None => dot(y, &self.t.get(i).matvec(x)),
                Some(sp) => dot(y, &sp.single(i, x)),
            })
            .collect()
    }
}

/// `sup_{‖λ‖=1} ‖Σ λ_i T_i‖`.
pub fn e_norm(t: &OperatorTuple) -> RadiusReport {
    e_norm_with_seeds(t, &[])
}

pub fn e_norm_with_seeds(t: &OperatorTuple, seeds: &[Vec<C64>]) -> RadiusReport {
    let comb = Combiner::new(t);
    let res = sphere::maximize_convex(t.n(), seeds, |l| {
        let (s, u, v) = comb.top_singular(l);
        let g = comb.coefficients(&v, &u).into_iter().map(|c| c.conj()).collect();
        (s, g)
    });
    let mut rep = RadiusReport::plain(RadiusKind::ENorm, res.value, 1e-9 * res.value.max(1e-300));
    rep.notes.push(format!("maximizer {}", fmt_point(&res.point)));
    rep
}

fn fmt_point(p: &[C64]) -> String {
    let parts: Vec<String> = p.iter().map(|z| format!("({:.6},{:.6})", z.re, z.im)).collect();
    parts.join(" ")
}

/// Joint spectral radius `lim ‖Q_k‖^{1/2k}`; `history` holds the upper estimates.
pub fn spectral_radius(t: &OperatorTuple) -> RadiusReport {
    let tr = joint_spectral_radius(t);
    let n = tr.history.len();
    let tol = if tr.exact_zero || n < 2 { 0.0 } else { tr.history[n - 2] - tr.history[n - 1] };
    let mut rep = RadiusReport::plain(RadiusKind::Spectral, tr.value, tol);
    rep.q_used = tr.ks.last().copied().unwrap_or(0) as usize;
    rep.history = tr.history;
    if tr.exact_zero {
        rep.notes.push("Q_k vanished exactly: nilpotent tuple".into());
    }
    rep
}

/// `sup_{‖λ‖=1} r(Σ λ_i T_i)`.
pub fn e_spectral_radius(t: &OperatorTuple) -> RadiusReport {
    let res = sphere::maximize_numeric(t.n(), &[], |l| matrix_spectral_radius(&t.combination(l)));
    let mut rep = RadiusReport::plain(RadiusKind::ESpectral, res.value, 1e-6 * res.value.max(1e-300));
    if res.value == 0.0 {
        rep.notes.push(
            "every combination is nilpotent at this truncation; infinite-dimensional values can differ".into(),
        );
    }
    rep
}

const THETA_GRID: usize = 256;

fn top_real_part_matrix(x: &CMatrix, theta: f64) -> f64 {
    extreme_eig(&x.rotated_real_part(theta), true).0
}

/// Classical numerical radius `max_θ λ_max(Re e^{iθ} X)`.
pub fn numerical_radius(x: &CMatrix) -> f64 {
    numerical_radius_report(x).value
}

pub fn numerical_radius_report(x: &CMatrix) -> RadiusReport {
    assert!(x.is_square(), "numerical radius needs a square matrix");
    if x.rows() == 0 || x.is_zero() {
        return RadiusReport::plain(RadiusKind::Numerical, 0.0, 0.0);
    }
    let step = 2.0 * std::f64::consts::PI / THETA_GRID as f64;
    let thetas: Vec<f64> = (0..THETA_GRID).map(|k| k as f64 * step).collect();
    let vals: Vec<f64> = crate::par_map(&thetas, |&th| top_real_part_matrix(x, th));
    let mut order: Vec<usize> = (0..THETA_GRID).collect();
    order.sort_by(|&a, &b| vals[b].total_cmp(&vals[a]));
    let mut best = vals[order[0]];
    for &k in order.iter().take(3) {
        let c = thetas[k];
        let (_, v) = golden_max(|th| top_real_part_matrix(x, th), c - step, c + step, 1e-8);
        best = best.max(v);
    }
    let mut rep = RadiusReport::plain(RadiusKind::Numerical, best, 1e-9 * op_norm(x));
    rep.history = vec![vals[order[0]], best];
    rep
}

/// `ω(A_q)` for `q = 1..=q_max`; the value is a lower bound for the joint numerical radius.
pub fn joint_numerical_radius(t: &OperatorTuple, q_max: usize) -> Result<RadiusReport> {
    if q_max == 0 {
        return Err(Error::InvalidInput("q_max must be at least 1".into()));
    }
    let row = row_value(t);
    let hist = a_q_sequence(t, row, q_max);
    let value = *hist.last().unwrap();
    let tol = if q_max >= 2 { hist[q_max - 1] - hist[q_max - 2] } else { value };
    let mut rep = RadiusReport::plain(RadiusKind::JointNumerical, value, tol);
    rep.q_used = q_max;
    rep.history = hist;
    Ok(rep)
}

/// [`joint_numerical_radius`] plus a verified upper bound when one can be found.
pub fn joint_numerical_radius_certified(t: &OperatorTuple, q_max: usize) -> Result<RadiusReport> {
    let mut rep = joint_numerical_radius(t, q_max)?;
    let row = row_value(t);
    if let Some(c) = certify_upper(t, rep.value, row) {
        rep.upper = Some(c.upper);
        rep.tol = c.upper - rep.value;
        if c.lower > rep.value {
            rep.notes.push(format!("deeper truncations exceed {:.17e}", c.lower));
        }
    } else {
        rep.notes.push("no upper certificate found".into());
    }
    Ok(rep)
}

/// `sup_{‖λ‖=1} ω(Σ λ_i T_i)`, with the direct form `sup_h (Σ |⟨T_i h, h⟩|²)^{1/2}`
/// computed independently as a cross-check.
pub fn euclidean_radius(t: &OperatorTuple) -> RadiusReport {
    euclidean_radius_with_seeds(t, &[])
}

pub fn euclidean_radius_with_seeds(t: &OperatorTuple, seeds: &[Vec<C64>]) -> RadiusReport {
    let (res, _) = euclidean_maximizer(t, seeds);
    let direct = euclidean_direct(t, 0x5eed);
    let mut rep = RadiusReport::plain(RadiusKind::Euclidean, res.value, (res.value - direct).abs());
    rep.cross_check = Some(direct);
    rep.notes.push(format!("maximizer {}", fmt_point(&res.point)));
    rep
}

/// The sphere maximizer for the euclidean radius and its top eigenvector.
pub fn euclidean_maximizer(t: &OperatorTuple, seeds: &[Vec<C64>]) -> (sphere::SphereMax, Vec<C64>) {
    let comb = Combiner::new(t);
    let res = sphere::maximize_convex(t.n(), seeds, |l| {
        let (v, h) = comb.top_real_part(l);
        let g = comb.coefficients(&h, &h).into_iter().map(|c| c.conj()).collect();
        (v, g)
    });
    let (_, h) = comb.top_real_part(&res.point);
    (res, h)
}

/// Multi-start Riemannian ascent of `Σ |⟨T_i h, h⟩|²` over unit `h`.
pub fn euclidean_direct(t: &OperatorTuple, seed: u64) -> f64 {
    let d = t.dim();
    let comb = Combiner::new(t);
    let mut rng = rng_from_seed(seed);
    let starts: Vec<Vec<C64>> = (0..16).map(|_| random_unit_vector(&mut rng, d)).collect();
    let objective = |h: &[C64]| -> f64 { comb.coefficients(h, h).iter().map(|c| c.norm_sqr()).sum() };
    let results = crate::par_map(&starts, |h0| {
        let mut h = h0.clone();
        let mut v = objective(&h);
        let mut step = 0.5;
        for _ in 0..3000 {
            let c = comb.coefficients(&h, &h);
            // Gradient: Σ conj(c_i) T_i h + c_i T_i^* h, projected to the tangent space.
            let mut g = vec![ZERO; d];
            for (i, ci) in c.iter().enumerate() {
                let th = match &comb.sparse {
                    None => t.get(i).matvec(&h),
                    Some(sp) => sp.single(i, &h),
                };
                let tah = t.get(i).adj_matvec(&h);
                for k in 0..d {
                    g[k] += ci.conj() * th[k] + ci * tah[k];
                }
            }
            let radial = dot(&h, &g);
            for (gk, hk) in g.iter_mut().zip(&h) {
                *gk -= hk * radial;
            }
            let gn = norm(&g);
            if gn < 1e-14 {
                break;
            }
            let mut moved = false;
            while step > 1e-14 {
                let mut cand: Vec<C64> = h.iter().zip(&g).map(|(a, b)| a + b * (step / gn)).collect();
                normalize(&mut cand);
                let cv = objective(&cand);
                if cv > v {
                    let gain = cv - v;
                    h = cand;
                    v = cv;
                    moved = true;
                    step *= 1.5;
                    if gain < 1e-16 * v {
                        step = 0.0;
                    }
                    break;
                }
                step *= 0.5;
            }
            if !moved || step == 0.0 {
                break;
            }
        }
        v
    });
    results.into_iter().fold(0.0, f64::max).sqrt()
}

/// Bracket and bisection for `ω_ρ` on the compressions `Γ^{(q)}_{ρ,r}`.
pub fn rho_radius(t: &OperatorTuple, rho: f64, q_max: usize) -> Result<RadiusReport> {
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::InvalidInput(format!("rho must be positive, got {rho}")));
    }
    if q_max == 0 {
        return Err(Error::InvalidInput("q_max must be at least 1".into()));
    }
    let row = row_value(t);
    let mut rep = RadiusReport::plain(RadiusKind::Rho, 0.0, 0.0);
    rep.rho = Some(rho);
    rep.q_used = q_max;
    if row == 0.0 {
        return Ok(rep);
    }
    let spectral = joint_spectral_radius(t).value;
    let lo_bracket = spectral.max(row / rho);
    let mut hi = row * 1f64.max(2.0 / rho - 1.0);
    let member = |s: f64| -> bool {
        if joint_spectral_radius(&t.scaled_real(1.0 / s)).value > 1.0 + 1e-10 {
            return false;
        }
        let sr = row / s;
        let scale = rho + (1.0 - rho).abs() * 2.0 * sr + (rho - 2.0).abs() * sr * sr;
        joint::rho_member(t, rho, s, q_max, 1e-10 * scale)
    };
    rep.history.clear();
    if member(lo_bracket) {
        rep.value = lo_bracket;
        rep.history.push(lo_bracket);
        rep.notes.push("lower bracket max(r, row/rho) is attained".into());
        return Ok(rep);
    }
    let mut expand = 0;
    while !member(hi) {
        hi *= 2.0;
        expand += 1;
        if expand > 60 {
            return Err(Error::InvalidInput("rho-radius bracket did not close".into()));
        }
    }
    if expand > 0 {
        rep.notes.push(format!("upper bracket doubled {expand} times"));
    }
    let mut lo = lo_bracket;
    while hi - lo > 1e-10 * hi {
        let mid = 0.5 * (lo + hi);
        if member(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
        rep.history.push(hi);
    }
    rep.value = hi;
    rep.tol = hi - lo;
    Ok(rep)
}

/// Every radius in [`RadiusKind::ALL`] (the classical numerical radius is included for `n = 1`).
pub fn all_radii(t: &OperatorTuple, q: usize, rho: f64) -> Result<Vec<RadiusReport>> {
    let mut out = Vec::new();
    for kind in RadiusKind::ALL {
        out.push(compute(t, kind, q, rho)?);
    }
    if t.n() == 1 {
        out.push(compute(t, RadiusKind::Numerical, q, rho)?);
    }
    Ok(out)
}

pub fn compute(t: &OperatorTuple, kind: RadiusKind, q: usize, rho: f64) -> Result<RadiusReport> {
    Ok(match kind {
        RadiusKind::RowNorm => row_norm(t),
        RadiusKind::ENorm => e_norm(t),
        RadiusKind::Spectral => spectral_radius(t),
        RadiusKind::ESpectral => e_spectral_radius(t),
        RadiusKind::Numerical => {
            if t.n() != 1 {
                return Err(Error::InvalidInput("the classical numerical radius needs n = 1".into()));
            }
            numerical_radius_report(t.get(0))
        }
        RadiusKind::JointNumerical => joint_numerical_radius_certified(t, q)?,
        RadiusKind::Euclidean => euclidean_radius(t),
        RadiusKind::Rho => rho_radius(t, rho, q)?,
    })
}

/// Eigen-decomposition based helper shared with other modules: top eigenvector of `Re(e^{iθ} X)`.
pub fn top_vector_real_part(x: &CMatrix, theta: f64) -> (f64, Vec<C64>) {
    let e = eigh(&x.rotated_real_part(theta));
    let k = e.eigenvalues.len() - 1;
    (e.eigenvalues[k], e.vector(k))
}

