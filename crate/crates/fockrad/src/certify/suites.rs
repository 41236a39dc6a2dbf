//! Trial bodies, one per registered suite.

use std::f64::consts::PI;

use rand::Rng;

use super::gen::{
    commuting_nilpotent, generic, l2_coeffs, nilpotent_graded, normalize_row, pick, random_poly,
    row_contraction,
};
use super::{Check, Quantity, Suite, TrialOutcome, APPROX_TOL};
use crate::error::{Error, Result};
use crate::fock::{build_poisson, shift_tuple, symmetric_tuple};
use crate::matrix::{op_norm, random_unit_vector, rng_from_seed, CMatrix, SeededRng, C64};
use crate::radii::{self, certify_upper, matrix_spectral_radius, numerical_radius_report};
use crate::spectra::{inclusion_check, planted_spectrum_tuple, RANGE_TOL};
use crate::toeplitz::{coefficient_bound_check, random_positive};
use crate::tuple::OperatorTuple;
use crate::words::{fock_dim, Word};

type Poly = Vec<(Word, C64)>;

/// Depth used for the ρ-radius bisections.
const RHO_Q: usize = 6;
/// Largest truncated Fock space used to approximate norms of `p(S)`.
const FOCK_DIM_CAP: usize = 130;

pub(super) fn trial(s: &Suite, index: usize, seed: u64) -> Result<TrialOutcome> {
    let mut rng = rng_from_seed(seed);
    let rng = &mut rng;
    match s.name.as_str() {
        "propri-sandwich" => propri_sandwich(s, rng),
        "enorm-sandwich" => enorm_sandwich(s, rng),
        "we-le-w" => we_le_w(s, rng),
        "power" => power(s, rng),
        "hdlh" => hdlh(s, rng, index == 0),
        "hdlh-poly" => hdlh_poly(s, rng),
        "von2" => von2(s, rng),
        "bks" => bks(s, rng),
        "schwarz" => schwarz(s, rng),
        "nilp-vn" => nilp_vn(s, rng, false, index == 0),
        "nilp-vn-comm" => nilp_vn(s, rng, true, false),
        "rho-consistency" => rho_consistency(s, rng),
        "epsi" => epsi(s, rng),
        "poisson-vn" => poisson_vn(s, rng),
        "fejer-bounds" => fejer_bounds(s, rng),
        "spectra-inclusion" => spectra_inclusion(s, rng, seed),
        other => Err(Error::UnknownSuite(other.to_string())),
    }
}

fn row_q(t: &OperatorTuple) -> Quantity {
    Quantity::exact(radii::row_value(t))
}

/// `ω(A_q)` as a lower estimate, bracketed above by a certificate or the row norm.
fn w_q(t: &OperatorTuple, q: usize) -> Result<Quantity> {
    let lower = radii::joint_numerical_radius(t, q)?.value;
    let row = radii::row_value(t);
    let up = certify_upper(t, lower, row).map_or(row, |c| c.upper.min(row));
    Ok(Quantity::truncated(lower, up))
}

/// `ω(A_q)` as a left side: only the lower estimate matters there.
fn w_lhs(t: &OperatorTuple, q: usize) -> Result<Quantity> {
    let lower = radii::joint_numerical_radius(t, q)?.value;
    Ok(Quantity::bracket(lower, lower, radii::row_value(t)))
}

/// Joint spectral radius: the estimate is an upper one, the largest single spectral
/// radius a lower bound.
fn spectral_q(t: &OperatorTuple) -> Quantity {
    let v = radii::spectral_radius(t).value;
    let lo = t.mats().iter().map(matrix_spectral_radius).fold(0.0, f64::max);
    Quantity::bracket(v, lo.min(v), v)
}

fn numrad_q(x: &CMatrix) -> Quantity {
    let r = numerical_radius_report(x);
    Quantity::bracket(r.value, r.value, r.value + r.tol)
}

fn draw_n_d(s: &Suite, rng: &mut SeededRng) -> (usize, usize) {
    (pick(rng, 1, s.n_max), pick(rng, 1, s.d_max))
}

/// `cos(π / ([(m−1)/k] + 2))`.
fn hdlh_bound(m: usize, k: usize) -> f64 {
    (PI / (((m - 1) / k) as f64 + 2.0)).cos()
}

/// Largest `q` with `dim P_q ≤ FOCK_DIM_CAP`, at least `min_q`.
fn fock_level(n: usize, min_q: usize) -> usize {
    let mut q = min_q;
    while fock_dim(n, q + 1).is_some_and(|d| d <= FOCK_DIM_CAP) {
        q += 1;
    }
    q
}

/// `‖[f_1(S), ..., f_k(S)]‖` from below, by compression to `P_q`; the declared gap is the
/// increment from `P_{q−1}`.
fn shift_row_norm(polys: &[Poly], n: usize) -> Result<Quantity> {
    let deg = polys.iter().flat_map(|p| p.iter().map(|(w, _)| w.len())).max().unwrap_or(0);
    let q = fock_level(n, deg.max(1) + 1);
    let at = |q: usize| -> Result<f64> {
        let s = shift_tuple(n, q + 1)?;
        let vals: Vec<CMatrix> = polys.iter().map(|p| s.eval_poly(p)).collect();
        Ok(radii::row_value(&OperatorTuple::new(vals)?))
    };
    let v = at(q)?;
    let prev = at(q - 1)?;
    Ok(Quantity::lower_only(v, (v - prev).max(0.0)))
}

fn eval_all(t: &OperatorTuple, polys: &[Poly]) -> Result<OperatorTuple> {
    OperatorTuple::new(polys.iter().map(|p| t.eval_poly(p)).collect())
}

fn propri_sandwich(s: &Suite, rng: &mut SeededRng) -> Result<TrialOutcome> {
    let (n, d) = draw_n_d(s, rng);
    let t = generic(rng, n, d);
    let row = row_q(&t);
    let w = w_q(&t, s.q)?;
    let checks = vec![
        Check::new("row/2 <= w", row.scale(0.5), w, APPROX_TOL),
        Check::new("w <= row", w, row, s.tolerance),
        Check::new("r <= w", spectral_q(&t), w, APPROX_TOL),
    ];
    Ok(TrialOutcome { instance: t, checks })
}

fn enorm_sandwich(s: &Suite, rng: &mut SeededRng) -> Result<TrialOutcome> {
    let (n, d) = draw_n_d(s, rng);
    let t = generic(rng, n, d);
    let row = row_q(&t);
    let e = radii::e_norm(&t).value;
    let eq = Quantity::bracket(e, e, row.est);
    let checks = vec![
        Check::new("row/sqrt(n) <= e_norm", row.scale(1.0 / (n as f64).sqrt()), eq, APPROX_TOL),
        Check::new("e_norm <= row", eq, row, s.tolerance),
    ];
    Ok(TrialOutcome { instance: t, checks })
}

fn we_le_w(s: &Suite, rng: &mut SeededRng) -> Result<TrialOutcome> {
    let (n, d) = draw_n_d(s, rng);
    let t = generic(rng, n, d);
    let row = row_q(&t);
    let w = w_q(&t, s.q)?;
    let we = radii::euclidean_maximizer(&t, &[]).0.value;
    let weq = Quantity::bracket(we, we, w.hi);
    let checks = vec![
        Check::new("w_e <= w", weq, w, APPROX_TOL),
        Check::new("row/(2 sqrt(n)) <= w_e", row.scale(0.5 / (n as f64).sqrt()), weq, APPROX_TOL),
        Check::new("w_e <= row", weq, row, s.tolerance),
    ];
    Ok(TrialOutcome { instance: t, checks })
}

fn power(s: &Suite, rng: &mut SeededRng) -> Result<TrialOutcome> {
    let (n, d) = draw_n_d(s, rng);
    let t = generic(rng, n, d);
    let w = w_q(&t, s.q)?;
    let k_max = if n == 3 { 3 } else { 4 };
    let mut checks = Vec::new();
    for k in 2..=k_max {
        let lhs = w_lhs(&t.products(k), s.q)?;
        let rhs = w.map(|x| x.powi(k as i32));
        checks.push(Check::new(format!("w(T_a:|a|={k}) <= w^{k}"), lhs, rhs, APPROX_TOL));
    }
    Ok(TrialOutcome { instance: t, checks })
}

fn hdlh(s: &Suite, rng: &mut SeededRng, extremal: bool) -> Result<TrialOutcome> {
    let n = pick(rng, 1, s.n_max);
    let m = pick(rng, 3, 5);
    let b = pick(rng, 1, s.d_max);
    let mut checks = Vec::new();
    if extremal {
        // The shift itself: the bound at k = 1 is attained.
        let t = shift_tuple(n, m)?;
        let w = w_lhs(&t, s.q)?;
        let bound = hdlh_bound(m, 1);
        checks.push(Check::new("w(S) <= cos(pi/(m+1))", w, Quantity::exact(bound), s.tolerance));
        checks.push(Check::new(
            "cos(pi/(m+1)) <= w(S)",
            Quantity::exact(bound),
            Quantity::exact(w.est),
            APPROX_TOL,
        ));
        return Ok(TrialOutcome { instance: t, checks });
    }
    let t = nilpotent_graded(rng, n, b, m);
    for k in 1..m {
        let tk = t.products(k);
        let bound = hdlh_bound(m, k);
        checks.push(Check::new(
            format!("w(T_a:|a|={k}) <= cos(pi/([{}/{k}]+2))", m - 1),
            w_lhs(&tk, s.q)?,
            Quantity::exact(bound),
            s.tolerance,
        ));
        let we = radii::euclidean_maximizer(&tk, &[]).0.value;
        let e = radii::e_norm(&tk).value;
        let rowk = radii::row_value(&tk);
        checks.push(Check::new(
            format!("w_e(T_a:|a|={k}) <= e_norm * cos"),
            Quantity::bracket(we, we, rowk),
            Quantity::bracket(e * bound, e * bound, rowk * bound),
            APPROX_TOL,
        ));
    }
    Ok(TrialOutcome { instance: t, checks })
}

/// `(Σ_{k=0}^{m−1} cos²(π / ([(m−1)/k] + 2)))^{1/2}`, the `k = 0` term being one.
fn w_vn_constant(m: usize) -> f64 {
    (1.0 + (1..m).map(|k| hdlh_bound(m, k).powi(2)).sum::<f64>()).sqrt()
}

fn hdlh_poly(s: &Suite, rng: &mut SeededRng) -> Result<TrialOutcome> {
    let n = pick(rng, 1, s.n_max);
    let m = pick(rng, 2, 5);
    let b = pick(rng, 1, s.d_max);
    let t = nilpotent_graded(rng, n, b, m);
    let p = random_poly(rng, n, 0, m - 1);
    let lhs = numrad_q(&t.eval_poly(&p));
    let rhs = Quantity::exact(w_vn_constant(m) * l2_coeffs(&p));
    let checks = vec![Check::new("w(p(T)) <= K ||p||_2", lhs, rhs, s.tolerance)];
    Ok(TrialOutcome { instance: t, checks })
}

fn von2(s: &Suite, rng: &mut SeededRng) -> Result<TrialOutcome> {
    let (n, d) = draw_n_d(s, rng);
    let t = generic(rng, n, d);
    let m = pick(rng, 1, 3);
    let p = random_poly(rng, n, 0, m);
    let norm2 = l2_coeffs(&p);
    let w = w_q(&t, s.q)?;
    // (1 − w^{2(m+1)}) / (1 − w²) = Σ_{j ≤ m} w^{2j}, nondecreasing in w.
    let rhs = w.map(|x| norm2 * (0..=m).map(|j| x.powi(2 * j as i32)).sum::<f64>().sqrt());
    let lhs = numrad_q(&t.eval_poly(&p));
    let checks = vec![Check::new("w(p(T)) <= ||p||_2 (sum w^2j)^(1/2)", lhs, rhs, APPROX_TOL)];
    Ok(TrialOutcome { instance: t, checks })
}

fn bks(s: &Suite, rng: &mut SeededRng) -> Result<TrialOutcome> {
    let (n, d) = draw_n_d(s, rng);
    let t0 = generic(rng, n, d);
    let w = w_q(&t0, s.q)?;
    let u = 1.0 - rng.random::<f64>();
    let t = t0.scaled_real(u / w.hi);
    let k = pick(rng, 1, 2);
    let polys: Vec<Poly> = (0..k).map(|_| random_poly(rng, n, 0, 2)).collect();
    let at_zero = polys
        .iter()
        .map(|p| p.iter().filter(|(w, _)| w.is_empty()).map(|(_, a)| a.norm_sqr()).sum::<f64>())
        .sum::<f64>()
        .sqrt();
    let rhs = shift_row_norm(&polys, n)?.map(|x| x + 2.0 * at_zero);
    let lhs = w_lhs(&eval_all(&t, &polys)?, s.q)?;
    let checks = vec![Check::new("w(F(T)) <= ||[F]|| + 2 |F(0)|", lhs, rhs, APPROX_TOL)];
    Ok(TrialOutcome { instance: t, checks })
}

fn schwarz(s: &Suite, rng: &mut SeededRng) -> Result<TrialOutcome> {
    let (n, d) = draw_n_d(s, rng);
    let t = row_contraction(rng, n, d);
    let k = pick(rng, 1, 2);
    let polys: Vec<Poly> = (0..k).map(|_| random_poly(rng, n, 1, 2)).collect();
    let f_norm = shift_row_norm(&polys, n)?;
    let ft = eval_all(&t, &polys)?;
    let checks = vec![
        Check::new("||[F(T)]|| <= ||[T]|| ||[F]||", row_q(&ft), row_q(&t).mul(f_norm), APPROX_TOL),
        Check::new("r(F(T)) <= r(T) ||[F]||", spectral_q(&ft), spectral_q(&t).mul(f_norm), APPROX_TOL),
    ];
    Ok(TrialOutcome { instance: t, checks })
}

fn nilp_vn(s: &Suite, rng: &mut SeededRng, commuting: bool, reference: bool) -> Result<TrialOutcome> {
    let n = pick(rng, 1, s.n_max);
    let m = pick(rng, 2, 4);
    let b = pick(rng, 1, s.d_max);
    let model = if commuting { symmetric_tuple(n, m)? } else { shift_tuple(n, m)? };
    let t = if reference {
        model.clone()
    } else if commuting {
        commuting_nilpotent(rng, n, b, m)
    } else {
        nilpotent_graded(rng, n, b, m)
    };
    let p = random_poly(rng, n, 0, m - 1);
    let p2 = random_poly(rng, n, 0, m - 1);
    let (pt, ps) = (t.eval_poly(&p), model.eval_poly(&p));
    let pair_t = eval_all(&t, &[p.clone(), p2.clone()])?;
    let pair_s = eval_all(&model, &[p, p2])?;
    let name = if commuting { "B" } else { "S" };
    let checks = vec![
        Check::new(format!("||p(T)|| <= ||p({name})||"), Quantity::exact(op_norm(&pt)), Quantity::exact(op_norm(&ps)), s.tolerance),
        Check::new(format!("w(p(T)) <= w(p({name}))"), numrad_q(&pt), numrad_q(&ps), s.tolerance),
        Check::new(format!("||[p1(T),p2(T)]|| <= ||[p1({name}),p2({name})]||"), row_q(&pair_t), row_q(&pair_s), s.tolerance),
    ];
    Ok(TrialOutcome { instance: t, checks })
}

fn rho_consistency(s: &Suite, rng: &mut SeededRng) -> Result<TrialOutcome> {
    let (n, d) = draw_n_d(s, rng);
    let t = generic(rng, n, d);
    let row = row_q(&t);
    let r = spectral_q(&t);
    let rhos = [0.5, 1.0, 2.0, 4.0];
    let omegas: Vec<Quantity> = rhos
        .iter()
        .map(|&rho| {
            let v = radii::rho_radius(&t, rho, RHO_Q)?.value;
            Ok(Quantity::bracket(v, v, row.est * 1f64.max(2.0 / rho - 1.0)))
        })
        .collect::<Result<_>>()?;
    let w = w_q(&t, RHO_Q)?;
    let mut checks = vec![
        Check::new("omega_1 <= row", omegas[1], row, 1e-5),
        Check::new("row <= omega_1", row, omegas[1], 1e-5),
        Check::new("omega_2 <= w", omegas[2], w, 1e-4),
        Check::new("w <= omega_2", Quantity::exact(w.est), omegas[2], 1e-4),
    ];
    for (i, &rho) in rhos.iter().enumerate() {
        checks.push(Check::new(format!("row <= {rho} omega_{rho}"), row, omegas[i].scale(rho), APPROX_TOL));
        checks.push(Check::new(format!("r <= omega_{rho}"), r, omegas[i], APPROX_TOL));
    }
    for i in 0..rhos.len() - 1 {
        let (a, b) = (rhos[i], rhos[i + 1]);
        checks.push(Check::new(format!("omega_{b} <= omega_{a}"), omegas[i + 1], omegas[i], APPROX_TOL));
        let c = 2.0 * b / a - 1.0;
        checks.push(Check::new(format!("omega_{a} <= {c} omega_{b}"), omegas[i], omegas[i + 1].scale(c), APPROX_TOL));
    }
    Ok(TrialOutcome { instance: t, checks })
}

/// `cos(π/N) + 3 [π cos⁴(π/(2N))]^{1/3} (ε/N)^{2/3}` with `N = [(m−1)/k] + 2`.
fn epsi_bound(m: usize, k: usize, eps: f64) -> f64 {
    let big_n = ((m - 1) / k) as f64 + 2.0;
    (PI / big_n).cos() + 3.0 * (PI * (PI / (2.0 * big_n)).cos().powi(4)).cbrt() * (eps / big_n).powf(2.0 / 3.0)
}

fn epsi(s: &Suite, rng: &mut SeededRng) -> Result<TrialOutcome> {
    let n = pick(rng, 1, s.n_max);
    let m = pick(rng, 2, 5);
    let b = pick(rng, 1, s.d_max);
    let base = nilpotent_graded(rng, n, b, m);
    let size = 0.3 * rng.random::<f64>();
    // A small block from the top grade back to grade zero breaks nilpotency.
    let mats: Vec<CMatrix> = base
        .mats()
        .iter()
        .map(|x| {
            let mut y = x.clone();
            let g = crate::matrix::gaussian_matrix(rng, b, b).scale_real(size);
            y.add_block(0, (m - 1) * b, &g);
            y
        })
        .collect();
    // u < 1 makes the row norm < 1, so Σ_k ‖Q_k‖^{1/2} converges.
    let u = 0.5 + 0.5 * rng.random::<f64>();
    let t = normalize_row(OperatorTuple::new(mats)?, u);
    let eps = op_norm(&t.q_k(m)).sqrt();
    let checks = vec![Check::new(
        "w <= cos(pi/(m+1)) + K(eps, m)",
        w_lhs(&t, s.q)?,
        Quantity::exact(epsi_bound(m, 1, eps)),
        s.tolerance,
    )];
    Ok(TrialOutcome { instance: t, checks })
}

fn poisson_vn(s: &Suite, rng: &mut SeededRng) -> Result<TrialOutcome> {
    let (n, d) = draw_n_d(s, rng);
    let t = row_contraction(rng, n, d);
    let p = random_poly(rng, n, 0, 2);
    let lhs = Quantity::exact(op_norm(&t.eval_poly(&p)));
    let rhs = shift_row_norm(std::slice::from_ref(&p), n)?;
    let r = 0.5 + 0.45 * rng.random::<f64>();
    let q = pick(rng, 4, 10);
    let kernel = build_poisson(&t, r, q)?;
    let checks = vec![
        Check::new("||p(T)|| <= ||p(S)||", lhs, rhs, APPROX_TOL),
        Check::new(
            "||K*K - I|| <= r^(2(q+1))/(1-r^2)",
            Quantity::exact(kernel.defect()),
            Quantity::exact(kernel.tail_bound),
            1e-10,
        ),
    ];
    Ok(TrialOutcome { instance: t, checks })
}

fn fejer_bounds(s: &Suite, rng: &mut SeededRng) -> Result<TrialOutcome> {
    let n = pick(rng, 1, s.n_max);
    let m = pick(rng, 2, 4);
    let d = pick(rng, 1, s.d_max);
    let p = random_positive(rng, n, m, d)?;
    let report = coefficient_bound_check(&p, None)?;
    let checks = report
        .rows
        .iter()
        .map(|row| {
            let lhs = Quantity::bracket(row.lhs, row.lhs, row.lhs_upper.unwrap_or(f64::INFINITY));
            Check::new(format!("level {} <= ||A_0|| cos", row.k), lhs, Quantity::exact(row.rhs), s.tolerance)
        })
        .collect();
    let mut mats = vec![p.a0().clone()];
    mats.extend(p.coefficients().iter().map(|(_, a)| a.clone()));
    Ok(TrialOutcome { instance: OperatorTuple::new(mats)?, checks })
}

fn spectra_inclusion(s: &Suite, rng: &mut SeededRng, seed: u64) -> Result<TrialOutcome> {
    let (n, d) = draw_n_d(s, rng);
    let dir = random_unit_vector(rng, n);
    let size = 0.9 * rng.random::<f64>();
    let lambda: Vec<C64> = dir.iter().map(|z| z * size).collect();
    let t0 = planted_spectrum_tuple(rng, &lambda, d);
    let row0 = radii::row_value(&t0);
    let scale = (1.0 - rng.random::<f64>()) / row0;
    let t = t0.scaled_real(scale);
    let mut grid = vec![lambda.iter().map(|z| z * scale).collect::<Vec<_>>()];
    for _ in 0..6 {
        let v = random_unit_vector(rng, n);
        let r = 1.2 * rng.random::<f64>();
        grid.push(v.iter().map(|z| z * r).collect());
    }
    // Eigenvalues of a single operator are right spectrum points when n = 1.
    if n == 1 {
        for z in crate::matrix::eigenvalues(t.get(0)) {
            grid.push(vec![z]);
        }
    }
    let rep = inclusion_check(&t, &grid, seed)?;
    let we = Quantity::bracket(rep.euclidean_radius, rep.euclidean_radius, rep.joint_numerical_upper);
    let w_up = Quantity::exact(rep.joint_numerical_upper);
    let row = Quantity::exact(rep.row_norm);
    let mut checks = vec![Check::new("w_e <= w", we, w_up, s.tolerance)];
    for p in rep.points.iter().filter(|p| p.member) {
        let nl = Quantity::exact(p.norm);
        checks.push(Check::new("|lambda| <= w_e", nl, we, s.tolerance));
        checks.push(Check::new("|lambda| <= w", nl, w_up, s.tolerance));
        checks.push(Check::new("|lambda| <= row", nl, row, s.tolerance));
        if let Some(dr) = p.dist_range {
            checks.push(Check::new(
                "dist(lambda, W(T)) <= range tol",
                Quantity::bracket(dr, 0.0, dr),
                Quantity::exact(RANGE_TOL),
                s.tolerance,
            ));
        }
    }
    Ok(TrialOutcome { instance: t, checks })
}
