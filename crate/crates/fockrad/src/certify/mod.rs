//! Randomized certification of the inequalities between the radii.
//!
//! Every trial draws an instance from a seed derived from `(suite seed, trial index)`, evaluates
//! a list of checks `lhs ≤ rhs`, and sorts each into pass, violation or inconclusive. Quantities
//! carry an estimate and a bracket `[lo, hi]`; a check fails only when the bracket of the left
//! side lies entirely above the bracket of the right side.

mod gen;
mod suites;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::TupleFile;
use crate::tuple::OperatorTuple;

pub use gen::gen_nilpotent_contraction;

/// Base slack for checks whose right side is computed by truncation or optimization.
pub const APPROX_TOL: f64 = 1e-6;
pub const DEFAULT_TOL: f64 = 1e-8;
/// Truncation depth for joint numerical radii inside the suites.
pub const DEFAULT_Q: usize = 12;

pub const SUITE_NAMES: [&str; 16] = [
    "propri-sandwich",
    "enorm-sandwich",
    "we-le-w",
    "power",
    "hdlh",
    "hdlh-poly",
    "von2",
    "bks",
    "schwarz",
    "nilp-vn",
    "nilp-vn-comm",
    "rho-consistency",
    "epsi",
    "poisson-vn",
    "fejer-bounds",
    "spectra-inclusion",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Structure {
    Generic,
    NilpotentGraded,
    Commuting,
    RowContraction,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Suite {
    pub name: String,
    pub structure: Structure,
    /// Largest number of operators drawn.
    pub n_max: usize,
    /// Largest dimension drawn (block size for graded families).
    pub d_max: usize,
    pub trials: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub q: usize,
}

impl Suite {
    /// The registered suite with its default instance family.
    pub fn named(name: &str) -> Result<Suite> {
        let (structure, n_max, d_max) = match name {
            "propri-sandwich" | "enorm-sandwich" | "we-le-w" => (Structure::Generic, 3, 5),
            "power" | "von2" | "bks" => (Structure::Generic, 3, 4),
            "hdlh" | "hdlh-poly" | "nilp-vn" | "epsi" => (Structure::NilpotentGraded, 3, 2),
            "nilp-vn-comm" => (Structure::Commuting, 3, 2),
            "schwarz" | "poisson-vn" => (Structure::RowContraction, 3, 4),
            "spectra-inclusion" => (Structure::RowContraction, 3, 5),
            "rho-consistency" => (Structure::Generic, 2, 3),
            "fejer-bounds" => (Structure::Generic, 2, 2),
            _ => return Err(Error::UnknownSuite(name.to_string())),
        };
        Ok(Suite {
            name: name.to_string(),
            structure,
            n_max,
            d_max,
            trials: 100,
            seed: 42,
            tolerance: DEFAULT_TOL,
            q: DEFAULT_Q,
        })
    }

    pub fn with_run(mut self, trials: usize, seed: u64) -> Self {
        self.trials = trials;
        self.seed = seed;
        self
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tolerance = tol;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidInput("a suite needs at least one trial".into()));
        }
        if !(self.tolerance > 0.0) || !self.tolerance.is_finite() {
            return Err(Error::InvalidInput(format!("tolerance must be positive, got {}", self.tolerance)));
        }
        if self.n_max == 0 || self.d_max == 0 || self.q == 0 {
            return Err(Error::InvalidInput("n_max, d_max and q must be positive".into()));
        }
        Ok(())
    }

    /// Seed of trial `i`, a SplitMix64 scramble of the suite seed and the index.
    pub fn trial_seed(&self, i: usize) -> u64 {
        let mut z = self.seed.wrapping_add((i as u64 + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15));
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
}

/// A computed quantity: `est` is the reported value, `[lo, hi]` a bracket for the exact one.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quantity {
    pub est: f64,
    pub lo: f64,
    pub hi: f64,
    /// Declared truncation gap; it widens the slack when this is a right side.
    pub gap: f64,
}

impl Quantity {
    pub fn exact(v: f64) -> Self {
        Quantity { est: v, lo: v, hi: v, gap: 0.0 }
    }

    pub fn bracket(est: f64, lo: f64, hi: f64) -> Self {
        Quantity { est, lo: lo.min(est), hi: hi.max(est), gap: 0.0 }
    }

    /// A lower estimate from a truncation together with a verified upper bound.
    pub fn truncated(est: f64, hi: f64) -> Self {
        let hi = hi.max(est);
        Quantity { est, lo: est, hi, gap: hi - est }
    }

    /// A lower estimate with no upper bound beyond the declared gap.
    pub fn lower_only(est: f64, gap: f64) -> Self {
        Quantity { est, lo: est, hi: f64::INFINITY, gap: gap.max(0.0) }
    }

    /// Image under a nondecreasing map.
    pub fn map(self, f: impl Fn(f64) -> f64) -> Self {
        let est = f(self.est);
        Quantity { est, lo: f(self.lo), hi: f(self.hi), gap: f(self.est + self.gap) - est }
    }

    pub fn scale(self, c: f64) -> Self {
        assert!(c > 0.0, "scale factors are positive");
        self.map(|x| c * x)
    }

    /// Product of two nonnegative quantities.
    pub fn mul(self, o: Quantity) -> Self {
        let hi = if self.hi == 0.0 || o.hi == 0.0 { 0.0 } else { self.hi * o.hi };
        let est = self.est * o.est;
        Quantity { est, lo: self.lo * o.lo, hi, gap: (self.est + self.gap) * (o.est + o.gap) - est }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Violation,
    Inconclusive,
}

/// One inequality `lhs ≤ rhs` with base slack `base`.
#[derive(Clone, Debug)]
pub struct Check {
    pub label: String,
    pub lhs: Quantity,
    pub rhs: Quantity,
    pub base: f64,
}

impl Check {
    pub fn new(label: impl Into<String>, lhs: Quantity, rhs: Quantity, base: f64) -> Self {
        Check { label: label.into(), lhs, rhs, base }
    }

    /// Total slack: base plus the declared truncation gap of the right side.
    pub fn tol(&self) -> f64 {
        self.base + self.rhs.gap
    }

    pub fn slack(&self) -> f64 {
        self.rhs.est + self.tol() - self.lhs.est
    }

    pub fn verdict(&self) -> Verdict {
        if self.lhs.est <= self.rhs.est + self.tol() {
            Verdict::Pass
        } else if self.lhs.lo > self.rhs.hi + self.base {
            Verdict::Violation
        } else {
            Verdict::Inconclusive
        }
    }
}

/// A check that did not pass, with everything needed to reproduce it.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Finding {
    pub trial: usize,
    pub seed: u64,
    pub digest: String,
    pub check: String,
    pub verdict: Verdict,
    pub lhs: f64,
    pub rhs: f64,
    pub tol: f64,
    pub slack: f64,
    pub instance: TupleFile,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CertReport {
    pub suite: String,
    pub trials: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub checks: usize,
    /// Smallest slack `rhs + tol − lhs` seen over all checks.
    pub min_slack: f64,
    /// Every check that did not pass: certain violations and inconclusive ones.
    pub violations: Vec<Finding>,
    pub status: Status,
}

impl CertReport {
    pub fn count(&self, v: Verdict) -> usize {
        self.violations.iter().filter(|f| f.verdict == v).count()
    }
}

/// Instance and checks produced by one trial.
#[derive(Clone, Debug)]
pub struct TrialOutcome {
    pub instance: OperatorTuple,
    pub checks: Vec<Check>,
}

/// Reruns a single trial of `s` from its seed.
pub fn run_trial(s: &Suite, trial: usize) -> Result<TrialOutcome> {
    s.validate()?;
    suites::trial(s, trial, s.trial_seed(trial))
}

pub fn run_suite(s: &Suite) -> Result<CertReport> {
    s.validate()?;
    let idx: Vec<usize> = (0..s.trials).collect();
    let outcomes = crate::par_map(&idx, |&i| suites::trial(s, i, s.trial_seed(i)));
    let mut checks = 0;
    let mut min_slack = f64::INFINITY;
    let mut violations = Vec::new();
    for (i, out) in outcomes.into_iter().enumerate() {
        let out = out?;
        let mut file = None;
        for c in &out.checks {
            checks += 1;
            min_slack = min_slack.min(c.slack());
            let verdict = c.verdict();
            if verdict == Verdict::Pass {
                continue;
            }
            let instance = file
                .get_or_insert_with(|| {
                    TupleFile::from_tuple(&out.instance, Some(s.name.clone()), Some(s.trial_seed(i)))
                })
                .clone();
            violations.push(Finding {
                trial: i,
                seed: s.trial_seed(i),
                digest: out.instance.digest(),
                check: c.label.clone(),
                verdict,
                lhs: c.lhs.est,
                rhs: c.rhs.est,
                tol: c.tol(),
                slack: c.slack(),
                instance,
            });
        }
    }
    let status = if violations.is_empty() {
        Status::Pass
    } else if violations.iter().any(|f| f.verdict == Verdict::Violation) {
        Status::Fail
    } else {
        Status::Inconclusive
    };
    Ok(CertReport {
        suite: s.name.clone(),
        trials: s.trials,
        seed: s.seed,
        tolerance: s.tolerance,
        checks,
        min_slack,
        violations,
        status,
    })
}

/// Runs `name`, or every registered suite for `"all"`.
pub fn run_named(name: &str, trials: usize, seed: u64, tolerance: f64) -> Result<Vec<CertReport>> {
    let names: Vec<&str> = if name == "all" { SUITE_NAMES.to_vec() } else { vec![name] };
    names
        .into_iter()
        .map(|n| run_suite(&Suite::named(n)?.with_run(trials, seed).with_tolerance(tolerance)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdicts_follow_the_brackets() {
        let c = Check::new("a", Quantity::exact(1.0), Quantity::exact(1.0 - 1e-9), 1e-8);
        assert_eq!(c.verdict(), Verdict::Pass);
        let c = Check::new("b", Quantity::exact(1.1), Quantity::exact(1.0), 1e-8);
        assert_eq!(c.verdict(), Verdict::Violation);
        // Only a lower estimate of the left side exceeds the bound: not certain.
        let c = Check::new("c", Quantity::bracket(1.1, 0.9, 1.2), Quantity::exact(1.0), 1e-8);
        assert_eq!(c.verdict(), Verdict::Inconclusive);
        // The truncation gap of the right side widens the slack.
        let c = Check::new("d", Quantity::exact(1.05), Quantity::truncated(1.0, 1.1), 1e-6);
        assert_eq!(c.verdict(), Verdict::Pass);
        assert!((c.tol() - (0.1 + 1e-6)).abs() < 1e-12);
    }

    #[test]
    fn unknown_suite_is_rejected() {
        assert!(matches!(Suite::named("nope"), Err(Error::UnknownSuite(_))));
        assert!(run_named("nope", 1, 0, 1e-8).is_err());
        for n in SUITE_NAMES {
            assert!(Suite::named(n).is_ok());
        }
    }

    #[test]
    fn degenerate_suites_are_rejected() {
        let s = Suite::named("power").unwrap();
        assert!(run_suite(&s.clone().with_run(0, 1)).is_err());
        assert!(run_suite(&s.with_tolerance(0.0)).is_err());
    }

    #[test]
    fn trial_seeds_are_distinct() {
        let s = Suite::named("power").unwrap();
        let seeds: std::collections::BTreeSet<u64> = (0..1000).map(|i| s.trial_seed(i)).collect();
        assert_eq!(seeds.len(), 1000);
    }
}
