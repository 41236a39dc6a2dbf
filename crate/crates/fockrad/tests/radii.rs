use std::f64::consts::PI;

use fockrad::fock::{shift_tuple, symmetric_tuple};
use fockrad::matrix::{
    dot, gaussian_matrix, normalize, op_norm, random_hermitian, random_unit_vector, random_unitary,
    rng_from_seed, eigvalsh, CMatrix, C64,
};
use fockrad::radii::{self, RadiusKind};
use fockrad::OperatorTuple;
use proptest::prelude::*;

fn random_tuple(seed: u64, n: usize, d: usize) -> OperatorTuple {
    let mut rng = rng_from_seed(seed);
    OperatorTuple::new((0..n).map(|_| gaussian_matrix(&mut rng, d, d)).collect()).unwrap()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

#[test]
fn row_norm_examples() {
    for (n, m) in [(1, 3), (2, 2), (3, 3)] {
        let s = shift_tuple(n, m).unwrap();
        assert!(close(radii::row_norm(&s).value, 1.0, 1e-12));
    }
    assert_eq!(radii::row_norm(&OperatorTuple::zero(3, 4)).value, 0.0);
    let lam = [C64::new(0.6, 0.0), C64::new(0.0, -0.8), C64::new(1.0, 1.0)];
    let t = OperatorTuple::scalars(&lam, 3);
    let l2 = (0.36f64 + 0.64 + 2.0).sqrt();
    assert!(close(radii::row_norm(&t).value, l2, 1e-12));
}

#[test]
fn e_norm_single_operator_is_operator_norm() {
    let t = random_tuple(5, 1, 4);
    assert!(close(radii::e_norm(&t).value, op_norm(t.get(0)), 1e-9));
}

#[test]
fn e_norm_of_shifts_and_their_adjoints() {
    for (n, m) in [(2, 2), (2, 3), (3, 2)] {
        let s = shift_tuple(n, m).unwrap();
        let a = radii::e_norm(&s).value;
        let b = radii::e_norm(&s.adjoint()).value;
        assert!(close(a, 1.0, 1e-9), "{a}");
        assert!(close(a, b, 1e-9));
    }
}

#[test]
fn e_norm_matches_a_brute_force_sphere_grid() {
    // λ = (cos a, e^{iφ} sin a) covers the unit sphere of C² up to a common phase.
    let t = random_tuple(11, 2, 3);
    let mut best: f64 = 0.0;
    for i in 0..721 {
        let phi = 2.0 * PI * i as f64 / 720.0;
        for j in 0..361 {
            let a = 0.5 * PI * j as f64 / 360.0;
            let l = [C64::new(a.cos(), 0.0), C64::from_polar(a.sin(), phi)];
            best = best.max(op_norm(&t.combination(&l)));
        }
    }
    let e = radii::e_norm(&t).value;
    assert!(e >= best - 1e-12, "{e} < grid {best}");
    assert!(e - best <= 1e-4, "{e} vs grid {best}");
}

#[test]
fn spectral_radius_examples() {
    for (n, m) in [(1, 4), (2, 3), (3, 2)] {
        let s = shift_tuple(n, m).unwrap();
        assert_eq!(radii::spectral_radius(&s).value, 0.0);
        assert_eq!(radii::e_spectral_radius(&s).value, 0.0);
        assert_eq!(radii::e_spectral_radius(&s.adjoint()).value, 0.0);
    }
    let lam = [C64::new(0.3, 0.4), C64::new(-0.5, 0.0)];
    let t = OperatorTuple::scalars(&lam, 2);
    let l2 = (0.25f64 + 0.25).sqrt();
    assert!(close(radii::spectral_radius(&t).value, l2, 1e-10));
    assert!(close(radii::e_spectral_radius(&t).value, l2, 1e-8));
    let h = radii::spectral_radius(&random_tuple(2, 2, 4)).history;
    assert!(h.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)));
}

#[test]
fn spectral_radius_of_one_matrix_matches_eigenvalues() {
    for seed in 0..5 {
        let t = random_tuple(100 + seed, 1, 5);
        let eig = fockrad::matrix::eigenvalues(t.get(0)).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(close(radii::spectral_radius(&t).value, eig, 1e-6 * eig.max(1.0)));
    }
}

#[test]
fn numerical_radius_of_shifts() {
    for m in 2..=12 {
        let s = shift_tuple(1, m).unwrap();
        let w = radii::numerical_radius(s.get(0));
        assert!(close(w, (PI / (m as f64 + 1.0)).cos(), 1e-9), "m={m}: {w}");
    }
    assert!(close(radii::numerical_radius(shift_tuple(1, 3).unwrap().get(0)), 0.70710678, 1e-8));
}

#[test]
fn numerical_radius_of_hermitian_is_largest_modulus_eigenvalue() {
    let mut rng = rng_from_seed(3);
    let a = random_hermitian(&mut rng, 6);
    let e = eigvalsh(&a);
    let want = e[0].abs().max(e[e.len() - 1].abs());
    assert!(close(radii::numerical_radius(&a), want, 1e-10));
}

/// Best `|⟨Xh,h⟩|` over random unit vectors, each of the ten best then polished by ascent.
fn sampled_numerical_radius(x: &CMatrix, samples: usize, seed: u64) -> f64 {
    let mut rng = rng_from_seed(seed);
    let d = x.rows();
    let val = |h: &[C64]| dot(h, &x.matvec(h)).norm();
    let mut top: Vec<(f64, Vec<C64>)> = Vec::new();
    for _ in 0..samples {
        let h = random_unit_vector(&mut rng, d);
        let v = val(&h);
        if top.len() < 10 || v > top[top.len() - 1].0 {
            top.push((v, h));
            top.sort_by(|a, b| b.0.total_cmp(&a.0));
            top.truncate(10);
        }
    }
    let mut best: f64 = top[0].0;
    for (mut v, mut h) in top {
        let mut step = 0.1;
        while step > 1e-13 {
            // Gradient of |⟨Xh,h⟩|²: conj(z) X h + z X^* h with z = ⟨Xh,h⟩.
            let z = dot(&h, &x.matvec(&h));
            let xh = x.matvec(&h);
            let xah = x.adj_matvec(&h);
            let g: Vec<C64> = (0..d).map(|k| z.conj() * xh[k] + z * xah[k]).collect();
            let mut cand: Vec<C64> = h.iter().zip(&g).map(|(a, b)| a + b * step).collect();
            normalize(&mut cand);
            let cv = val(&cand);
            if cv > v {
                v = cv;
                h = cand;
                step *= 1.5;
            } else {
                step *= 0.5;
            }
        }
        best = best.max(v);
    }
    best
}

#[test]
fn numerical_radius_against_sampling_oracle() {
    let mut rng = rng_from_seed(17);
    let x = gaussian_matrix(&mut rng, 6, 6);
    let w = radii::numerical_radius(&x);
    let oracle = sampled_numerical_radius(&x, 200_000, 5);
    assert!(oracle <= w + 1e-12, "oracle {oracle} above {w}");
    assert!(w - oracle <= 1e-5, "{w} vs oracle {oracle}");
}

#[test]
fn joint_numerical_radius_of_zero_and_shifts() {
    let z = radii::joint_numerical_radius(&OperatorTuple::zero(2, 3), 5).unwrap();
    assert!(z.history.iter().all(|&v| v == 0.0));
    for n in 1..=3 {
        for m in 2..=4 {
            let s = shift_tuple(n, m).unwrap();
            let rep = radii::joint_numerical_radius(&s, m + 2).unwrap();
            let exact = (PI / (m as f64 + 1.0)).cos();
            for q in (m - 1)..=(m + 2) {
                assert!(close(rep.history[q - 1], exact, 1e-9), "n={n} m={m} q={q}");
            }
            assert!(rep.history.windows(2).all(|w| w[1] >= w[0] - 1e-15));
        }
    }
    assert!(radii::joint_numerical_radius(&OperatorTuple::zero(1, 1), 0).is_err());
}

#[test]
fn single_operator_joint_radius_brackets_the_classical_one() {
    // For n = 1 the compressions are Toeplitz-like: ω(T) cos(π/(q+2)) ≤ ω(A_q) ≤ ω(T).
    let t = random_tuple(23, 1, 4);
    let w = radii::numerical_radius(t.get(0));
    for q in [10, 40, 400] {
        let a = radii::joint_numerical_radius(&t, q).unwrap().value;
        let lower = w * (PI / (q as f64 + 2.0)).cos();
        assert!(a <= w + 1e-10 && a >= lower - 1e-10, "q={q}: {lower} <= {a} <= {w}");
    }
    let a = radii::joint_numerical_radius(&t, 400).unwrap().value;
    assert!(w - a <= 1e-4);
    let cert = radii::joint_numerical_radius_certified(&t, 40).unwrap();
    assert!(cert.upper.unwrap() >= w - 1e-9);
}

#[test]
fn euclidean_radius_examples() {
    for n in 1..=3 {
        let s2 = shift_tuple(1, 2).unwrap().get(0).scale_real(1.0 / (n as f64).sqrt());
        let t = OperatorTuple::new(vec![s2; n]).unwrap();
        let rep = radii::euclidean_radius(&t);
        assert!(close(rep.value, 0.5, 1e-9), "n={n}: {}", rep.value);
        assert!(close(rep.cross_check.unwrap(), 0.5, 1e-6));
    }
    for (n, m) in [(2, 3), (3, 3), (2, 4)] {
        let s = shift_tuple(n, m).unwrap();
        assert!(close(radii::euclidean_radius(&s).value, (PI / (m as f64 + 1.0)).cos(), 1e-8));
    }
    let t = random_tuple(8, 1, 5);
    assert!(close(radii::euclidean_radius(&t).value, radii::numerical_radius(t.get(0)), 1e-9));
}

#[test]
fn symmetric_shift_radii() {
    for (n, m) in [(2, 3), (3, 4)] {
        let b = symmetric_tuple(n, m).unwrap();
        let exact = (PI / (m as f64 + 1.0)).cos();
        assert!(close(radii::joint_numerical_radius(&b, m + 1).unwrap().value, exact, 1e-6));
    }
}

#[test]
fn rho_radius_examples() {
    for seed in 0..4 {
        let t = random_tuple(300 + seed, 2, 3);
        let row = radii::row_norm(&t).value;
        let w1 = radii::rho_radius(&t, 1.0, 6).unwrap().value;
        assert!(close(w1, row, 1e-5 * row.max(1.0)), "{w1} vs {row}");
        let w2 = radii::rho_radius(&t, 2.0, 6).unwrap().value;
        let jnr = radii::joint_numerical_radius(&t, 6).unwrap().value;
        assert!(close(w2, jnr, 1e-4), "{w2} vs {jnr}");
    }
    let s = shift_tuple(2, 2).unwrap();
    for rho in [0.5, 1.0, 2.0, 4.0] {
        let v = radii::rho_radius(&s, rho, 6).unwrap().value;
        assert!(close(v, 1.0 / rho, 1e-4), "rho={rho}: {v}");
    }
    assert!(radii::rho_radius(&s, 0.0, 6).is_err());
    assert!(radii::rho_radius(&s, -1.0, 6).is_err());
}

#[test]
fn rho_radius_approaches_spectral_radius() {
    for seed in 0..3 {
        let t = random_tuple(400 + seed, 2, 3);
        let r = radii::spectral_radius(&t).value;
        let v = radii::rho_radius(&t, 1000.0, 6).unwrap().value;
        assert!(v >= r - 1e-9 && v - r <= 1e-2, "{v} vs {r}");
    }
}

#[test]
fn all_radii_reports_every_kind() {
    let t = random_tuple(1, 1, 3);
    let reps = radii::all_radii(&t, 4, 2.0).unwrap();
    assert_eq!(reps.len(), RadiusKind::ALL.len() + 1);
    assert!(reps.iter().any(|r| r.kind == RadiusKind::Numerical));
    let t2 = random_tuple(1, 2, 3);
    assert!(radii::compute(&t2, RadiusKind::Numerical, 4, 2.0).is_err());
}

fn tuple_strategy() -> impl Strategy<Value = (u64, usize, usize)> {
    (any::<u64>(), 1usize..=3, 1usize..=4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn homogeneity((seed, n, d) in tuple_strategy(), re in -3.0f64..3.0, im in -3.0f64..3.0) {
        let t = random_tuple(seed, n, d);
        let z = C64::new(re, im);
        let zt = t.scaled(z);
        let a = z.norm();
        let tol = 1e-9 * (1.0 + a) * radii::row_norm(&t).value.max(1.0);
        prop_assert!(close(radii::row_norm(&zt).value, a * radii::row_norm(&t).value, tol));
        let w = radii::joint_numerical_radius(&t, 6).unwrap().value;
        let wz = radii::joint_numerical_radius(&zt, 6).unwrap().value;
        prop_assert!(close(wz, a * w, tol));
        prop_assert!(close(radii::spectral_radius(&zt).value, a * radii::spectral_radius(&t).value, 1e-8 * (1.0 + a)));
    }

    #[test]
    fn unitary_invariance((seed, n, d) in tuple_strategy()) {
        let t = random_tuple(seed, n, d);
        let u = random_unitary(&mut rng_from_seed(seed ^ 1), d);
        let ut = t.conjugated(&u);
        prop_assert!(close(radii::row_norm(&ut).value, radii::row_norm(&t).value, 1e-9));
        let w = radii::joint_numerical_radius(&t, 6).unwrap().value;
        prop_assert!(close(radii::joint_numerical_radius(&ut, 6).unwrap().value, w, 1e-8));
        prop_assert!(close(radii::e_norm(&ut).value, radii::e_norm(&t).value, 1e-8));
    }

    #[test]
    fn sandwiches((seed, n, d) in tuple_strategy()) {
        let t = random_tuple(seed, n, d);
        let row = radii::row_norm(&t).value;
        let w = radii::joint_numerical_radius_certified(&t, 10).unwrap();
        let up = w.upper.unwrap_or(row);
        prop_assert!(w.value <= row + 1e-8);
        prop_assert!(0.5 * row <= w.value + 1e-12);
        prop_assert!(radii::spectral_radius(&t).value <= up + 1e-8);
        let e = radii::e_norm(&t).value;
        prop_assert!(row / (n as f64).sqrt() <= e + 1e-9 && e <= row + 1e-9);
        let we = radii::euclidean_radius(&t).value;
        prop_assert!(we <= up + 1e-6);
        prop_assert!(0.5 * e <= we + 1e-9 && we <= e + 1e-9);
        prop_assert!(row / (2.0 * (n as f64).sqrt()) <= we + 1e-9);
        prop_assert!(radii::e_spectral_radius(&t).value <= radii::spectral_radius(&t).value + 1e-6);
    }

    #[test]
    fn rho_radius_is_nonincreasing_in_rho(seed in any::<u64>()) {
        let t = random_tuple(seed, 2, 2);
        let vals: Vec<f64> = [0.5, 1.0, 2.0, 5.0].iter().map(|&r| radii::rho_radius(&t, r, 5).unwrap().value).collect();
        prop_assert!(vals.windows(2).all(|w| w[1] <= w[0] + 1e-6), "{vals:?}");
    }
}
