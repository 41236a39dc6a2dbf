//! Maximization over the unit sphere of `C^n`: a deterministic low-discrepancy grid picks
//! starting points for projected ascents.

use crate::matrix::{norm, normalize, C64};
use crate::par_map;

pub const GRID_POINTS: usize = 4096;
pub const STARTS: usize = 16;
const MAX_ASCENT: usize = 2000;

#[derive(Clone, Debug)]
pub struct SphereMax {
    pub value: f64,
    pub point: Vec<C64>,
}

/// Quasi-uniform points on the unit sphere of `C^n`: an additive recurrence in `[0,1)^{2n}`
/// pushed through Box–Muller and normalized, plus the coordinate axes.
pub fn sphere_grid(n: usize, count: usize) -> Vec<Vec<C64>> {
    let dim = 2 * n;
    let mut phi = 2.0f64;
    for _ in 0..64 {
        phi = (1.0 + phi).powf(1.0 / (dim as f64 + 1.0));
    }
    let alpha: Vec<f64> = (0..dim).map(|j| (1.0 / phi).powi(j as i32 + 1)).collect();
    let mut out = Vec::with_capacity(count + n);
    for i in 0..n {
        let mut e = vec![C64::new(0.0, 0.0); n];
        e[i] = C64::new(1.0, 0.0);
        out.push(e);
    }
    for k in 1..=count {
        let u: Vec<f64> = alpha.iter().map(|a| (0.5 + a * k as f64).fract()).collect();
        let mut p: Vec<C64> = (0..n)
            .map(|j| {
                let r = (-2.0 * u[2 * j].max(1e-300).ln()).sqrt();
                let t = 2.0 * std::f64::consts::PI * u[2 * j + 1];
                C64::new(r * t.cos(), r * t.sin())
            })
            .collect();
        if normalize(&mut p) > 0.0 {
            out.push(p);
        }
    }
    out
}

fn top_distinct(scored: &mut [(f64, Vec<C64>)], k: usize) -> Vec<(f64, Vec<C64>)> {
    scored.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut picked: Vec<(f64, Vec<C64>)> = Vec::new();
    for (v, p) in scored.iter() {
        if picked.len() >= k {
            break;
        }
        // Points differing by a phase give the same value for phase-invariant objectives.
        let close = picked.iter().any(|(_, q)| {
            let ip: C64 = q.iter().zip(p).map(|(a, b)| a.conj() * b).sum();
            ip.norm() > 1.0 - 1e-6
        });
        if !close {
            picked.push((*v, p.clone()));
        }
    }
    picked
}

/// Maximizes a convex, positively homogeneous objective whose value and real gradient
/// (as a vector of `C^n`) are returned by `f`. Each ascent step jumps to the normalized
/// gradient, which never decreases such an objective.
pub fn maximize_convex<F>(n: usize, extra_seeds: &[Vec<C64>], f: F) -> SphereMax
where
    F: Fn(&[C64]) -> (f64, Vec<C64>) + Sync + Send,
{
    let mut seeds = sphere_grid(n, GRID_POINTS);
    seeds.extend(extra_seeds.iter().cloned());
    let mut scored: Vec<(f64, Vec<C64>)> = par_map(&seeds, |p| (f(p).0, p.clone()));
    let starts = top_distinct(&mut scored, STARTS);
    let finals = par_map(&starts, |(v0, p0)| {
        let mut best = (*v0, p0.clone());
        let mut p = p0.clone();
        for _ in 0..MAX_ASCENT {
            let (v, g) = f(&p);
            if v > best.0 {
                best = (v, p.clone());
            }
            let mut next = g;
            if normalize(&mut next) == 0.0 {
                break;
            }
            let diff: f64 = norm(&next.iter().zip(&p).map(|(a, b)| a - b).collect::<Vec<_>>());
            p = next;
            if diff < 1e-13 {
                break;
            }
        }
        let (v, _) = f(&p);
        if v > best.0 {
            best = (v, p);
        }
        best
    });
    pick_best(finals)
}

/// Projected gradient ascent with finite-difference gradients and backtracking, for
/// objectives without a usable analytic gradient.
pub fn maximize_numeric<F>(n: usize, extra_seeds: &[Vec<C64>], f: F) -> SphereMax
where
    F: Fn(&[C64]) -> f64 + Sync + Send,
{
    let mut seeds = sphere_grid(n, GRID_POINTS);
    seeds.extend(extra_seeds.iter().cloned());
    let mut scored: Vec<(f64, Vec<C64>)> = par_map(&seeds, |p| (f(p), p.clone()));
    let starts = top_distinct(&mut scored, STARTS);
    let finals = par_map(&starts, |(v0, p0)| {
        let mut p = p0.clone();
        let mut v = *v0;
        let mut step = 0.1;
        for _ in 0..200 {
            let h = 1e-6;
            let mut g = vec![C64::new(0.0, 0.0); n];
            for j in 0..n {
                for (k, dir) in [C64::new(1.0, 0.0), C64::new(0.0, 1.0)].into_iter().enumerate() {
                    let mut pp = p.clone();
                    pp[j] += dir * h;
                    normalize(&mut pp);
                    let d = (f(&pp) - v) / h;
                    if k == 0 {
                        g[j].re = d;
                    } else {
                        g[j].im = d;
                    }
                }
            }
            // Project onto the tangent space at p.
            let radial: f64 = p.iter().zip(&g).map(|(a, b)| (a.conj() * b).re).sum();
            for (gj, pj) in g.iter_mut().zip(&p) {
                *gj -= pj * radial;
            }
            let gn = norm(&g);
            if gn < 1e-12 {
                break;
            }
            let mut improved = false;
            while step > 1e-12 {
                let mut cand: Vec<C64> = p.iter().zip(&g).map(|(a, b)| a + b * (step / gn)).collect();
                normalize(&mut cand);
                let cv = f(&cand);
                if cv > v {
                    p = cand;
                    v = cv;
                    improved = true;
                    step *= 1.5;
                    break;
                }
                step *= 0.5;
            }
            if !improved {
                break;
            }
        }
        (v, p)
    });
    pick_best(finals)
}

fn pick_best(finals: Vec<(f64, Vec<C64>)>) -> SphereMax {
    let mut best: Option<(f64, Vec<C64>)> = None;
    for (v, p) in finals {
        if best.as_ref().is_none_or(|b| v > b.0) {
            best = Some((v, p));
        }
    }
    let (value, point) = best.expect("at least one start");
    SphereMax { value, point }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_points_are_unit_and_spread() {
        let g = sphere_grid(2, 512);
        assert_eq!(g.len(), 514);
        for p in &g {
            assert!((norm(p) - 1.0).abs() < 1e-14);
        }
        // The first coordinate's modulus should cover [0, 1] fairly evenly.
        let mut hist = [0usize; 4];
        for p in &g {
            let x = p[0].norm_sqr();
            hist[((x * 4.0) as usize).min(3)] += 1;
        }
        assert!(hist.iter().all(|&h| h > 80), "{hist:?}");
    }

    #[test]
    fn linear_functional_maximum() {
        // f(λ) = |⟨c, λ⟩| is maximized at c/‖c‖ with value ‖c‖.
        let c = vec![C64::new(0.3, -1.0), C64::new(2.0, 0.5), C64::new(0.0, 0.7)];
        let res = maximize_convex(3, &[], |l| {
            let ip: C64 = c.iter().zip(l).map(|(a, b)| a.conj() * b).sum();
            let phase = if ip.norm() > 0.0 { ip.conj() / ip.norm() } else { C64::new(1.0, 0.0) };
            (ip.norm(), c.iter().map(|a| a * phase.conj()).collect())
        });
        assert!((res.value - norm(&c)).abs() < 1e-12);
        let num = maximize_numeric(3, &[], |l| {
            let ip: C64 = c.iter().zip(l).map(|(a, b)| a.conj() * b).sum();
            ip.norm()
        });
        assert!((num.value - norm(&c)).abs() < 1e-8);
    }
}
