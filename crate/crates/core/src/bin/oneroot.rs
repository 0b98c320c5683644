use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use oneroot::convexroof::{
    closed_form, oracle_minimize, wootters_mixed_concurrence, OptimizerConfig,
};
use oneroot::families::{class_scan, traceable_qubits, ScanConfig, SCAN_HEADER};
use oneroot::grid::{BlochGrid, GridFrame};
use oneroot::io::{certificate_json, read_state, roof_json, round12, StateInput};
use oneroot::zeropolytope::certify_state;
use oneroot::{Error, Measure};

/// One-root certification and exact convex roofs for rank-2 states.
#[derive(Parser)]
#[command(name = "oneroot", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a measure on a pure state (or the mixed-state concurrence of a
    /// two-qubit density matrix).
    Measure {
        file: PathBuf,
        #[arg(long)]
        measure: Measure,
    },
    /// Certify the one-root property; exits 1 when the state is not one-root.
    Certify {
        file: PathBuf,
        #[arg(long)]
        measure: Measure,
    },
    /// Convex roof by closed form, oracle search, or both.
    Roof {
        file: PathBuf,
        #[arg(long)]
        measure: Measure,
        #[arg(long, value_enum, default_value_t = Method::Closed)]
        method: Method,
        #[command(flatten)]
        optimizer: OptimizerArgs,
    },
    /// Certify three-qubit marginals of four-qubit class generators (CSV).
    Scan {
        #[arg(long, value_delimiter = ',', default_value = "4,5,7,8")]
        classes: Vec<u8>,
        #[arg(long, default_value_t = 20)]
        draws: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Use the bare generators instead of a random SLOCC operator per draw.
        #[arg(long)]
        identity: bool,
        /// Also run the oracle on every one-root marginal.
        #[arg(long)]
        oracle: bool,
        #[arg(long, default_value_t = 64)]
        restarts: usize,
        #[arg(long, default_value_t = 4)]
        nu_max: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Measure values on a theta x phi grid of the range's Bloch sphere (CSV).
    BlochGrid {
        file: PathBuf,
        #[arg(long)]
        measure: Measure,
        #[arg(long, default_value_t = 37)]
        ntheta: usize,
        #[arg(long, default_value_t = 72)]
        nphi: usize,
        #[arg(long, value_enum, default_value_t = Frame::Basis)]
        frame: Frame,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Closed,
    Oracle,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum Frame {
    Basis,
    Root,
}

#[derive(Args)]
struct OptimizerArgs {
    #[arg(long, default_value_t = 64)]
    restarts: usize,
    #[arg(long, default_value_t = 4)]
    nu_max: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-10)]
    step_tol: f64,
    #[arg(long, default_value_t = 500)]
    max_iters: usize,
    #[arg(long, default_value_t = 1e-6)]
    fd_step: f64,
}

impl OptimizerArgs {
    fn config(&self) -> OptimizerConfig {
        OptimizerConfig {
            restarts: self.restarts,
            nu_max: self.nu_max,
            seed: self.seed,
            step_tol: self.step_tol,
            max_iters: self.max_iters,
            fd_step: self.fd_step,
            ..OptimizerConfig::default()
        }
    }
}

/// 0 success, 1 valid negative result, 2 bad input, 3 dimension mismatch,
/// 4 range with no usable roots, 5 other numerical failures.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::BadLength { .. }
        | Error::NotNormalized(_)
        | Error::ZeroVector
        | Error::InvalidDensityMatrix(_)
        | Error::NonOrthogonalBasis(_)
        | Error::InvalidBloch(_)
        | Error::RankTooHigh(_)
        | Error::UnknownMeasure(_)
        | Error::UnsupportedClass(_)
        | Error::BadClassParameters { .. }
        | Error::InvalidConfig(_)
        | Error::PreconditionViolated(_)
        | Error::DegenerateParameters(_) => 2,
        Error::DimensionMismatch(_)
        | Error::WrongQubitCount { .. }
        | Error::IndexOutOfRange { .. } => 3,
        Error::EntireRangeVanishes | Error::ZeroPolynomialIdentically => 4,
        _ => 5,
    }
}

fn explain(e: &Error) -> String {
    match e {
        Error::EntireRangeVanishes | Error::ZeroPolynomialIdentically => {
            format!("{e}: every state in the range has zero entanglement, so the roof is 0")
        }
        _ => e.to_string(),
    }
}

fn write_output(out: Option<&Path>, text: &str) -> Result<(), Error> {
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display()))),
        None => match std::io::stdout().lock().write_all(text.as_bytes()) {
            Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
                Err(Error::InvalidConfig(format!("stdout: {e}")))
            }
            _ => Ok(()),
        },
    }
}

/// Closed pipes (`| head`) are not an error worth reporting.
fn print_json(v: &Value) {
    let text = serde_json::to_string_pretty(v).expect("JSON values serialize");
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn cmd_measure(file: &Path, measure: Measure) -> Result<u8, Error> {
    let value = match read_state(file)? {
        StateInput::Pure(p) => measure.evaluate(&p)?,
        other => {
            if measure != Measure::Concurrence {
                return Err(Error::InvalidConfig(format!(
                    "{measure} of a mixed state needs `roof`; `measure` takes pure states"
                )));
            }
            let rho = match other {
                StateInput::Density(d) => d,
                StateInput::RankTwo(s) => s.density_matrix(),
                StateInput::Pure(_) => unreachable!(),
            };
            if rho.qubits() != 2 {
                return Err(Error::WrongQubitCount {
                    measure: measure.name(),
                    expected: 2,
                    got: rho.qubits(),
                });
            }
            wootters_mixed_concurrence(&rho)?
        }
    };
    let _ = writeln!(std::io::stdout().lock(), "{value:.12}");
    Ok(0)
}

fn cmd_certify(file: &Path, measure: Measure) -> Result<u8, Error> {
    let state = read_state(file)?.into_rank_two()?;
    let (_, cert) = certify_state(&state, measure)?;
    print_json(&certificate_json(&cert, Some(&state)));
    Ok(if cert.one_root { 0 } else { 1 })
}

fn cmd_roof(
    file: &Path,
    measure: Measure,
    method: Method,
    optimizer: &OptimizerArgs,
) -> Result<u8, Error> {
    let input = read_state(file)?;
    if let StateInput::Pure(p) = &input {
        let value = measure.evaluate(p)?;
        print_json(&json!({"measure": measure.name(), "method": "pure", "value": round12(value)}));
        return Ok(0);
    }
    let state = input.into_rank_two()?;
    let mut report = json!({"measure": measure.name()});
    let mut code = 0;

    let mut closed_value = None;
    if method != Method::Oracle {
        match certify_state(&state, measure) {
            Ok((_, cert)) if cert.one_root => {
                let res = closed_form(&state, &cert)?;
                closed_value = Some(res.value);
                report["closed_form"] = roof_json(&res, Some(&state));
            }
            Ok((_, cert)) => {
                eprintln!(
                    "not one-root ({} root clusters); the closed form does not apply",
                    cert.cluster_count()
                );
                report["certificate"] = certificate_json(&cert, Some(&state));
                code = 1;
            }
            Err(e @ (Error::EntireRangeVanishes | Error::ZeroPolynomialIdentically)) => {
                eprintln!("{}", explain(&e));
                closed_value = Some(0.0);
                report["closed_form"] =
                    json!({"value": 0.0, "method": "closed_form", "certificate": null});
            }
            Err(e) => return Err(e),
        }
    }
    if method != Method::Closed {
        let res = oracle_minimize(&state, measure, &optimizer.config())?;
        if let Some(c) = closed_value {
            report["abs_diff"] = json!(round12((c - res.value).abs()));
        }
        report["oracle"] = roof_json(&res, Some(&state));
    }
    if measure == Measure::Concurrence {
        report["wootters"] = json!(round12(wootters_mixed_concurrence(
            &state.density_matrix()
        )?));
    }
    print_json(&report);
    Ok(code)
}

#[allow(clippy::too_many_arguments)]
fn cmd_scan(
    classes: Vec<u8>,
    draws: usize,
    seed: u64,
    identity: bool,
    oracle: bool,
    restarts: usize,
    nu_max: usize,
    out: Option<&Path>,
) -> Result<u8, Error> {
    let config = ScanConfig {
        classes,
        draws,
        seed,
        identity,
        oracle: oracle.then(|| OptimizerConfig {
            restarts,
            nu_max,
            seed,
            ..OptimizerConfig::default()
        }),
    };
    let rows = class_scan(&config)?;
    let mut csv = String::from(SCAN_HEADER);
    csv.push('\n');
    for r in &rows {
        csv.push_str(&r.to_csv());
        csv.push('\n');
    }
    write_output(out, &csv)?;

    let mut failures = 0;
    for &mu in &config.classes {
        for k in 1..=4 {
            let group: Vec<_> = rows.iter().filter(|r| r.mu == mu && r.k == k).collect();
            let positive = group.iter().filter(|r| r.one_root).count();
            let expected = traceable_qubits(mu).contains(&k);
            let ok = group.iter().all(|r| r.matches_table());
            failures += usize::from(!ok);
            eprintln!(
                "mu={mu} k={k}: {positive}/{} one-root, expected {} [{}]",
                group.len(),
                if expected { "one-root" } else { "not one-root" },
                if ok { "pass" } else { "FAIL" }
            );
        }
    }
    eprintln!(
        "{}",
        if failures == 0 {
            "class table: pass"
        } else {
            "class table: FAIL"
        }
    );
    Ok(if failures == 0 { 0 } else { 1 })
}

fn cmd_bloch_grid(
    file: &Path,
    measure: Measure,
    ntheta: usize,
    nphi: usize,
    frame: Frame,
    out: Option<&Path>,
) -> Result<u8, Error> {
    let state = read_state(file)?.into_rank_two()?;
    let cert = match certify_state(&state, measure) {
        Ok((_, c)) => Some(c),
        Err(Error::EntireRangeVanishes | Error::ZeroPolynomialIdentically) => None,
        Err(e) => return Err(e),
    };
    let frame = match frame {
        Frame::Basis => GridFrame::Basis,
        Frame::Root => GridFrame::Root,
    };
    let grid = BlochGrid::compute(&state, measure, ntheta, nphi, frame, cert.as_ref())?;
    write_output(out, &grid.to_csv())?;
    Ok(0)
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Measure { file, measure } => cmd_measure(&file, measure),
        Command::Certify { file, measure } => cmd_certify(&file, measure),
        Command::Roof {
            file,
            measure,
            method,
            optimizer,
        } => cmd_roof(&file, measure, method, &optimizer),
        Command::Scan {
            classes,
            draws,
            seed,
            identity,
            oracle,
            restarts,
            nu_max,
            out,
        } => cmd_scan(
            classes,
            draws,
            seed,
            identity,
            oracle,
            restarts,
            nu_max,
            out.as_deref(),
        ),
        Command::BlochGrid {
            file,
            measure,
            ntheta,
            nphi,
            frame,
            out,
        } => cmd_bloch_grid(&file, measure, ntheta, nphi, frame, out.as_deref()),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", explain(&e));
            ExitCode::from(exit_code(&e))
        }
    }
}
