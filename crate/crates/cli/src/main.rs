//! Command-line front end: JSON in, JSON (plus CSV plot data) out.
//!
//! Exit codes are a stable contract:
//!   0  success
//!   2  resonance failure (report attached)
//!   3  nonexistence certified
//!   4  undecided at tolerance
//!   64 unreadable or malformed input
//!   65 precondition violated

use clap::{Parser, Subcommand};
use oscert::counterexample::{
    build_counterexample, explore_omega2, symmetry_and_open_question_report, CounterexampleBundle,
};
use oscert::oscillator::{
    attach_kernel, particular_solution, voc_oracle, Frequency, KernelCoeffs,
};
use oscert::positivity::{nonexistence_search, positive_solution, positivity_margin};
use oscert::trig::{certified_lower_bound, synthesize};
use oscert::{Error as CoreError, HarmonicSeries};
use serde::Serialize;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_OK: u8 = 0;
const EXIT_RESONANCE: u8 = 2;
const EXIT_NONEXISTENCE: u8 = 3;
const EXIT_UNDECIDED: u8 = 4;
const EXIT_PARSE: u8 = 64;
const EXIT_PRECONDITION: u8 = 65;

#[derive(Parser)]
#[command(
    name = "oscert",
    version,
    about = "Certified periodic solutions of u'' + omega^2 u = h on the circle"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for the canonical periodic particular solution of an input forcing.
    Solve {
        #[arg(long)]
        omega: f64,
        /// Path to the forcing as HarmonicSeries JSON.
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
        /// Grid for the omega = 1 variation-of-constants cross check.
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Certify existence (omega = 1) or decide via margin plus nonexistence
    /// search (integer omega >= 2).
    Certify {
        #[arg(long)]
        omega: f64,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        grid: Option<usize>,
        /// Positivity threshold on the margin.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Max-min kernel margin of the canonical particular solution.
    Margin {
        #[arg(long)]
        omega: f64,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Build and verify a counterexample bundle for integer omega >= 3.
    Counterexample {
        #[arg(long)]
        omega: u32,
        /// Mollifier half-width; the literal `default` selects pi/(4 omega).
        /// Omitted at omega = 3 the exact trigonometric variant is built.
        #[arg(long)]
        epsilon: Option<String>,
        #[arg(long)]
        grid: Option<usize>,
        /// Bundle JSON path; plot data lands next to it as .csv.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Randomized omega = 2 evidence gathering (no verdict).
    Explore {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        trials: u32,
        #[arg(long, default_value_t = 8)]
        degree: u32,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Re-verify a stored bundle and emit its symmetry report.
    Report {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_PARSE,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    ExitCode::from(run(cli.command))
}

fn fail(code: u8, message: &str) -> u8 {
    eprintln!("oscert: {message}");
    code
}

/// Default certificate grid: --grid beats RP_GRID_M beats the built-in value.
fn resolve_grid(flag: Option<usize>, fallback: usize) -> Result<usize, u8> {
    let value = match flag {
        Some(v) => v,
        None => match std::env::var("RP_GRID_M") {
            Ok(s) => s
                .parse::<usize>()
                .map_err(|_| fail(EXIT_PRECONDITION, &format!("RP_GRID_M is not an integer: {s}")))?,
            Err(_) => fallback,
        },
    };
    if value < 1024 {
        return Err(fail(EXIT_PRECONDITION, &format!("grid {value} below the minimum of 1024")));
    }
    Ok(value)
}

fn read_series(path: &Path) -> Result<HarmonicSeries, u8> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| fail(EXIT_PARSE, &format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| fail(EXIT_PARSE, &format!("malformed series in {}: {e}", path.display())))
}

/// Write atomically: temp file in the target directory, then rename.
fn write_text(path: &Path, text: &str) -> Result<(), u8> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, text)
        .and_then(|()| std::fs::rename(&tmp, path))
        .map_err(|e| fail(EXIT_PRECONDITION, &format!("cannot write {}: {e}", path.display())))
}

fn emit<T: Serialize>(output: Option<&Path>, value: &T) -> Result<(), u8> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable reports");
    text.push('\n');
    match output {
        Some(path) => write_text(path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn frequency(omega: f64) -> Result<Frequency, u8> {
    Frequency::new(omega).map_err(|e| fail(EXIT_PRECONDITION, &e.to_string()))
}

#[derive(Serialize)]
struct SolveOutput {
    omega: f64,
    solution: HarmonicSeries,
    /// Sup distance between the variation-of-constants grid and the spectral
    /// solution after kernel projection; only computed at omega = 1.
    #[serde(skip_serializing_if = "Option::is_none")]
    voc_projected_distance: Option<f64>,
}

#[derive(Serialize)]
struct ResonanceFailure {
    error: &'static str,
    report: oscert::oscillator::ResonanceReport,
}

fn run(command: Command) -> u8 {
    match dispatch(command) {
        Ok(code) => code,
        Err(code) => code,
    }
}

fn dispatch(command: Command) -> Result<u8, u8> {
    match command {
        Command::Solve { omega, input, output, grid } => {
            let m = resolve_grid(grid, 4096)?;
            let w = frequency(omega)?;
            let h = read_series(&input)?;
            let u_p = match particular_solution(&h, w) {
                Ok(u) => u,
                Err(CoreError::Resonant { report, .. }) => {
                    emit(output.as_deref(), &ResonanceFailure { error: "resonant", report })?;
                    return Ok(EXIT_RESONANCE);
                }
                Err(e) => return Err(fail(EXIT_PRECONDITION, &e.to_string())),
            };
            let voc_projected_distance = if (omega - 1.0).abs() <= 1e-12 {
                let voc = voc_oracle(|t| h.eval(t), KernelCoeffs::default(), m)
                    .map_err(|e| fail(EXIT_PRECONDITION, &e.to_string()))?;
                let spectral = synthesize(&u_p, m)
                    .map_err(|e| fail(EXIT_PRECONDITION, &e.to_string()))?;
                Some(projected_distance(&voc, &spectral))
            } else {
                None
            };
            emit(output.as_deref(), &SolveOutput { omega, solution: u_p, voc_projected_distance })?;
            Ok(EXIT_OK)
        }

        Command::Certify { omega, input, output, grid, tol } => {
            if tol <= 0.0 {
                return Err(fail(EXIT_PRECONDITION, "tolerance must be positive"));
            }
            let m = resolve_grid(grid, 4096)?;
            let w = frequency(omega)?;
            let Some(n) = w.as_integer() else {
                return Err(fail(EXIT_PRECONDITION, "certify needs an integer omega"));
            };
            let h = read_series(&input)?;
            if n == 1 {
                certify_omega1(&h, w, output.as_deref())
            } else {
                certify_higher(&h, w, m, tol, output.as_deref())
            }
        }

        Command::Margin { omega, input, output, grid } => {
            let m = resolve_grid(grid, 4096)?;
            let w = frequency(omega)?;
            let h = read_series(&input)?;
            let u_p = match particular_solution(&h, w) {
                Ok(u) => u,
                Err(CoreError::Resonant { report, .. }) => {
                    emit(output.as_deref(), &ResonanceFailure { error: "resonant", report })?;
                    return Ok(EXIT_RESONANCE);
                }
                Err(e) => return Err(fail(EXIT_PRECONDITION, &e.to_string())),
            };
            let report = positivity_margin(&u_p, w, m)
                .map_err(|e| fail(EXIT_PRECONDITION, &e.to_string()))?;
            emit(output.as_deref(), &report)?;
            Ok(EXIT_OK)
        }

        Command::Counterexample { omega, epsilon, grid, output } => {
            let m = resolve_grid(grid, 8192)?;
            let eps = match epsilon.as_deref() {
                None => None,
                Some("default") => Some(PI / (4.0 * omega.max(1) as f64)),
                Some(text) => Some(text.parse::<f64>().map_err(|_| {
                    fail(EXIT_PARSE, &format!("epsilon is neither a number nor `default`: {text}"))
                })?),
            };
            let bundle = match build_counterexample(omega, eps, m) {
                Ok(b) => b,
                Err(e @ (CoreError::OmegaBelowThree(_)
                | CoreError::EpsilonOutOfRange { .. }
                | CoreError::CoarseGrid(_))) => {
                    return Err(fail(EXIT_PRECONDITION, &e.to_string()))
                }
                Err(e) => return Err(fail(EXIT_PRECONDITION, &e.to_string())),
            };
            let w = Frequency::new(omega as f64).expect("omega >= 3");
            let u_p = particular_solution(&bundle.h, w)
                .map_err(|e| fail(EXIT_PRECONDITION, &e.to_string()))?;
            let margin = positivity_margin(&u_p, w, m)
                .map_err(|e| fail(EXIT_PRECONDITION, &e.to_string()))?;

            #[derive(Serialize)]
            struct CounterexampleOutput {
                bundle: CounterexampleBundle,
                margin: oscert::positivity::MarginReport,
            }
            if let Some(path) = &output {
                write_text(&path.with_extension("csv"), &bundle.u_star_csv())?;
            }
            emit(output.as_deref(), &CounterexampleOutput { bundle, margin })?;
            Ok(EXIT_OK)
        }

        Command::Explore { seed, trials, degree, output } => {
            let report = explore_omega2(seed, trials, degree)
                .map_err(|e| fail(EXIT_PRECONDITION, &e.to_string()))?;
            emit(output.as_deref(), &report)?;
            Ok(EXIT_OK)
        }

        Command::Report { input, output } => {
            let text = std::fs::read_to_string(&input)
                .map_err(|e| fail(EXIT_PARSE, &format!("cannot read {}: {e}", input.display())))?;
            let bundle: CounterexampleBundle = serde_json::from_str(&text)
                .map_err(|e| fail(EXIT_PARSE, &format!("malformed bundle: {e}")))?;
            bundle
                .verify()
                .map_err(|e| fail(EXIT_PRECONDITION, &format!("bundle failed re-verification: {e}")))?;
            let report = symmetry_and_open_question_report(&bundle)
                .map_err(|e| fail(EXIT_PRECONDITION, &e.to_string()))?;
            emit(output.as_deref(), &report)?;
            Ok(EXIT_OK)
        }
    }
}

fn certify_omega1(h: &HarmonicSeries, w: Frequency, output: Option<&Path>) -> Result<u8, u8> {
    #[derive(Serialize)]
    struct CertifyPositive {
        verdict: &'static str,
        result: oscert::positivity::PositiveSolutionResult,
    }
    match positive_solution(h, w) {
        Ok(result) => {
            emit(output, &CertifyPositive { verdict: "positive", result })?;
            Ok(EXIT_OK)
        }
        Err(CoreError::Resonant { report, .. }) => {
            emit(output, &ResonanceFailure { error: "resonant", report })?;
            Ok(EXIT_RESONANCE)
        }
        Err(e @ (CoreError::NegativeForcing(_) | CoreError::ZeroForcing)) => {
            Err(fail(EXIT_PRECONDITION, &e.to_string()))
        }
        Err(e) => {
            eprintln!("oscert: undecided: {e}");
            Ok(EXIT_UNDECIDED)
        }
    }
}

fn certify_higher(
    h: &HarmonicSeries,
    w: Frequency,
    m: usize,
    tol: f64,
    output: Option<&Path>,
) -> Result<u8, u8> {
    let u_p = match particular_solution(h, w) {
        Ok(u) => u,
        Err(CoreError::Resonant { report, .. }) => {
            emit(output, &ResonanceFailure { error: "resonant", report })?;
            return Ok(EXIT_RESONANCE);
        }
        Err(e) => return Err(fail(EXIT_PRECONDITION, &e.to_string())),
    };
    if let Some(cert) = nonexistence_search(&u_p, w).map_err(|e| fail(EXIT_PRECONDITION, &e.to_string()))? {
        #[derive(Serialize)]
        struct CertifyNonexistent {
            verdict: &'static str,
            certificate: oscert::positivity::NonexistenceCertificate,
        }
        emit(output, &CertifyNonexistent { verdict: "nonexistent", certificate: cert })?;
        return Ok(EXIT_NONEXISTENCE);
    }
    let margin = positivity_margin(&u_p, w, m).map_err(|e| fail(EXIT_PRECONDITION, &e.to_string()))?;
    if margin.margin > tol {
        let attached = attach_kernel(&u_p, w, margin.optimizer)
            .map_err(|e| fail(EXIT_PRECONDITION, &e.to_string()))?;
        for factor in [1usize, 4] {
            let cert = certified_lower_bound(&attached, m * factor)
                .map_err(|e| fail(EXIT_PRECONDITION, &e.to_string()))?;
            if cert.certified_lower_bound > 0.0 {
                #[derive(Serialize)]
                struct CertifyAttached {
                    verdict: &'static str,
                    margin: oscert::positivity::MarginReport,
                    solution: HarmonicSeries,
                    certificate: oscert::trig::BoundCertificate,
                }
                emit(
                    output,
                    &CertifyAttached {
                        verdict: "positive",
                        margin,
                        solution: attached,
                        certificate: cert,
                    },
                )?;
                return Ok(EXIT_OK);
            }
        }
    }
    #[derive(Serialize)]
    struct CertifyUndecided {
        verdict: &'static str,
        margin: oscert::positivity::MarginReport,
    }
    emit(output, &CertifyUndecided { verdict: "undecided", margin })?;
    Ok(EXIT_UNDECIDED)
}

/// Sup distance after removing the best kernel element from the difference.
fn projected_distance(a: &oscert::CircleGrid, b: &oscert::CircleGrid) -> f64 {
    let m = a.m();
    let diff: Vec<f64> = a.values().iter().zip(b.values()).map(|(x, y)| x - y).collect();
    let mut alpha = 0.0;
    let mut beta = 0.0;
    for (k, d) in diff.iter().enumerate() {
        let t = 2.0 * PI * k as f64 / m as f64;
        alpha += d * t.sin();
        beta += d * t.cos();
    }
    alpha *= 2.0 / m as f64;
    beta *= 2.0 / m as f64;
    diff.iter()
        .enumerate()
        .map(|(k, d)| {
            let t = 2.0 * PI * k as f64 / m as f64;
            (d - alpha * t.sin() - beta * t.cos()).abs()
        })
        .fold(0.0f64, f64::max)
}
