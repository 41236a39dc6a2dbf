use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use fockrad::certify::{self, Status};
use fockrad::fock::{build_shifts, build_symmetric};
use fockrad::io::{fmt17, matrix_to_repr, parse_grid_str, parse_poly_str, parse_tuple, to_json, MatrixRepr, PolyFile};
use fockrad::radii::{self, RadiusKind};
use fockrad::spectra::inclusion_check;
use fockrad::toeplitz::{self, MultiToeplitzPoly};
use fockrad::{Error, Result};

const EXIT_VIOLATION: u8 = 2;
const EXIT_INCONCLUSIVE: u8 = 3;
const EXIT_INPUT: u8 = 4;

#[derive(Parser)]
#[command(name = "fockrad", version, about = "Joint operator radii, multi-Toeplitz factorization and inequality certification")]
struct Cli {
    /// Cap on worker threads for parallel sweeps.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Write the output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Radii of a tuple read from a JSON tuple file.
    Radii {
        #[arg(long)]
        input: PathBuf,
        /// A radius kind (row_norm, e_norm, spectral, e_spectral, numerical, joint_numerical,
        /// euclidean, rho) or `all`.
        #[arg(long, default_value = "all")]
        kind: String,
        #[arg(long, default_value_t = 6)]
        q: usize,
        #[arg(long, default_value_t = 2.0)]
        rho: f64,
    },
    /// Run certification suites.
    Certify {
        /// Suite name or `all`.
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Truncated creation operators, the flip and the symmetric compressions on P_q.
    Shifts {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        q: usize,
    },
    /// Multi-Toeplitz polynomial tools.
    Toeplitz {
        action: ToeplitzAction,
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 6)]
        q: usize,
    },
    /// Classify grid points against the right joint spectrum (CSV).
    Spectrum {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        grid: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ToeplitzAction {
    Check,
    Factor,
    Dilate,
    Bounds,
}

#[derive(Serialize)]
struct ShiftsOut {
    n: usize,
    q: usize,
    words: Vec<String>,
    #[serde(rename = "S")]
    s: Vec<MatrixRepr>,
    #[serde(rename = "R")]
    r: Vec<MatrixRepr>,
    #[serde(rename = "U")]
    u: MatrixRepr,
    symmetric_words: Vec<String>,
    /// Columns: orthonormal basis of the symmetric subspace in `words` coordinates.
    symmetric_embedding: MatrixRepr,
    #[serde(rename = "B")]
    b: Vec<MatrixRepr>,
}

#[derive(Serialize)]
struct FactorOut {
    words: Vec<String>,
    phi: Vec<MatrixRepr>,
    residual: f64,
    iterations: usize,
    seed_q: usize,
    product: PolyFile,
}

#[derive(Serialize)]
struct DilationOut {
    v: MatrixRepr,
    check: f64,
    isometry_defect: f64,
    normalized: bool,
    epsilon: f64,
    factorization_residual: f64,
}

fn read(path: &Path) -> Result<String> {
    Ok(std::fs::read_to_string(path)?)
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<u8> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(Error::InvalidInput("--threads must be at least 1".into()));
        }
        fockrad::set_threads(t);
    }
    let out = cli.out.as_deref();
    match &cli.cmd {
        Cmd::Radii { input, kind, q, rho } => {
            let t = parse_tuple(input)?;
            let reps = if kind == "all" {
                radii::all_radii(&t, *q, *rho)?
            } else {
                let k = RadiusKind::parse(kind)
                    .ok_or_else(|| Error::InvalidInput(format!("unknown radius kind `{kind}`")))?;
                vec![radii::compute(&t, k, *q, *rho)?]
            };
            emit(out, &to_json(&reps))?;
            Ok(0)
        }
        Cmd::Certify { suite, trials, seed, tol } => {
            let reports = certify::run_named(suite, *trials, *seed, *tol)?;
            emit(out, &to_json(&reports))?;
            let code = if reports.iter().any(|r| r.status == Status::Fail) {
                EXIT_VIOLATION
            } else if reports.iter().any(|r| r.status == Status::Inconclusive) {
                EXIT_INCONCLUSIVE
            } else {
                0
            };
            Ok(code)
        }
        Cmd::Shifts { n, q } => {
            let f = build_shifts(*n, *q)?;
            let sym = build_symmetric(*n, *q)?;
            let doc = ShiftsOut {
                n: *n,
                q: *q,
                words: f.basis.words().iter().map(|w| w.to_string()).collect(),
                s: f.s.iter().map(matrix_to_repr).collect(),
                r: f.r.iter().map(matrix_to_repr).collect(),
                u: matrix_to_repr(&f.u),
                symmetric_words: sym.monomials.iter().map(|w| w.to_string()).collect(),
                symmetric_embedding: matrix_to_repr(&sym.embed),
                b: sym.b.iter().map(matrix_to_repr).collect(),
            };
            emit(out, &to_json(&doc))?;
            Ok(0)
        }
        Cmd::Toeplitz { action, input, q } => {
            let p = parse_poly_str(&read(input)?)?;
            let text = toeplitz_action(*action, &p, *q)?;
            emit(out, &text)?;
            Ok(0)
        }
        Cmd::Spectrum { input, grid, seed } => {
            let t = parse_tuple(input)?;
            let g = parse_grid_str(&read(grid)?, t.n())?;
            let rep = inclusion_check(&t, &g, *seed)?;
            emit(out, &spectrum_csv(t.n(), &rep))?;
            Ok(if rep.violations.is_empty() { 0 } else { EXIT_VIOLATION })
        }
    }
}

fn toeplitz_action(action: ToeplitzAction, p: &MultiToeplitzPoly, q: usize) -> Result<String> {
    Ok(match action {
        ToeplitzAction::Check => to_json(&toeplitz::is_positive(p, q)?),
        ToeplitzAction::Factor => {
            let f = toeplitz::fejer_factorize(p, q)?;
            to_json(&FactorOut {
                words: f.factor.words().iter().map(|w| w.to_string()).collect(),
                phi: f.factor.phi.iter().map(matrix_to_repr).collect(),
                residual: f.residual,
                iterations: f.iterations,
                seed_q: f.seed_q,
                product: PolyFile::from_poly(&f.factor.multiply()),
            })
        }
        ToeplitzAction::Dilate => {
            let d = toeplitz::build_dilation(p, q)?;
            to_json(&DilationOut {
                v: matrix_to_repr(&d.v),
                check: d.check,
                isometry_defect: d.isometry_defect,
                normalized: d.normalized,
                epsilon: d.epsilon,
                factorization_residual: d.factorization_residual,
            })
        }
        ToeplitzAction::Bounds => to_json(&toeplitz::coefficient_bound_check(p, Some(q))?),
    })
}

fn spectrum_csv(n: usize, rep: &fockrad::spectra::InclusionReport) -> String {
    let mut head: Vec<String> = Vec::new();
    for i in 1..=n {
        head.push(format!("re{i}"));
        head.push(format!("im{i}"));
    }
    head.extend(
        ["member", "margin", "norm", "dist_range", "excess_we", "excess_w", "excess_row"].map(String::from),
    );
    let mut s = head.join(",");
    s.push('\n');
    let opt = |v: Option<f64>| v.map(fmt17).unwrap_or_default();
    for p in &rep.points {
        let mut cells: Vec<String> = Vec::new();
        for z in &p.lambda {
            cells.push(fmt17(z.re));
            cells.push(fmt17(z.im));
        }
        cells.push(p.member.to_string());
        cells.push(fmt17(p.margin));
        cells.push(fmt17(p.norm));
        cells.push(opt(p.dist_range));
        for k in 0..3 {
            cells.push(opt(p.excess.map(|e| e[k])));
        }
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_INPUT),
            };
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error[{}]: {e}", e.code());
            ExitCode::from(EXIT_INPUT)
        }
    }
}
