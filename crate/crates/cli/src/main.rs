// Copyright 2026 The qexpander Authors
// SPDX-License-Identifier: Apache-2.0

//! `qexpander`: gaps, decisions, protocol runs, reductions, base-expander
//! synthesis and thermalization from the command line.
//!
//! Machine output is pretty JSON on stdout; diagnostics go to stderr.
//! Exit codes: 0 NO / accept / success, 1 YES / reject, 2 input error,
//! 3 promise violated or non-convergence.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use qexpander::io;
use qexpander::protocol::{self, Shots};
use qexpander::reduction;
use qexpander::spectral::{self, Decision, IterativeOptions};
use qexpander::thermal::{self, EvolveOptions};
use qexpander::Error;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "qexpander", version, about = "Quantum expander channels: gaps, verification, reduction, thermalization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Dense,
    Iterative,
}

#[derive(Subcommand)]
enum Command {
    /// Spectral gap of a channel.
    Gap {
        instance: PathBuf,
        #[arg(long, value_enum, default_value = "dense")]
        method: Method,
        /// Relative Rayleigh-quotient tolerance (iterative only).
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Classify an instance as YES, NO or PROMISE_VIOLATED.
    Decide { instance: PathBuf },
    /// Simulate Arthur's protocol on a witness.
    Verify {
        instance: PathBuf,
        /// Witness file, or `auto` for the honest top singular direction.
        #[arg(long, default_value = "auto")]
        witness: String,
        /// Shots per Hadamard test, or `exact`. Defaults to
        /// ceil(100 / (alpha² - beta²)²).
        #[arg(long)]
        shots: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Build the reduced channel from a reduction spec.
    Reduce {
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Synthesize and certify a base expander.
    SynthExpander {
        #[arg(long)]
        qubits: usize,
        #[arg(long, default_value_t = 0.1)]
        target_kappa: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 8)]
        degree: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evolve a thermal model and check the decay bound.
    Thermalize {
        model: PathBuf,
        /// Density-matrix file, or `pure-zero`.
        #[arg(long, default_value = "pure-zero")]
        rho0: String,
        /// `auto[:n]`, `log:T:n`, `lin:T0:T1:n` or a comma-separated list.
        #[arg(long, default_value = "auto")]
        times: String,
        /// Write `t,residual,bound` rows here.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

enum Failure {
    Input(String),
    NonConvergence(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Synthesis { .. } => Failure::NonConvergence(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

fn in_file(path: &Path) -> impl FnOnce(Error) -> Failure + '_ {
    move |e| match Failure::from(e) {
        Failure::Input(m) => Failure::Input(format!("{}: {m}", path.display())),
        other => other,
    }
}

/// Successful output with its exit code.
struct Report {
    value: Value,
    code: u8,
}

impl Report {
    fn ok(value: Value) -> Self {
        Self { value, code: 0 }
    }
}

fn gap(instance: &Path, method: Method, tol: f64, seed: u64) -> Result<Report, Failure> {
    let loaded = io::load_channel(instance).map_err(in_file(instance))?;
    let report = match method {
        Method::Dense => spectral::spectral_gap_dense(&loaded.channel)?,
        Method::Iterative => {
            let opts = IterativeOptions {
                tol,
                seed,
                ..IterativeOptions::default()
            };
            spectral::spectral_gap_iterative(&loaded.channel, &opts)?
        }
    };
    let value = json!({
        "kappa": report.kappa,
        "gap": report.gap,
        "method": report.method,
        "residual": report.residual,
        "iterations": report.iterations,
        "converged": report.converged,
    });
    Ok(Report {
        value,
        code: if report.converged { 0 } else { 3 },
    })
}

fn decide(instance: &Path) -> Result<Report, Failure> {
    let inst = io::load_channel(instance)
        .and_then(|l| l.instance())
        .map_err(in_file(instance))?;
    let (decision, report) = spectral::decide(&inst)?;
    let code = match decision {
        Decision::No => 0,
        Decision::Yes => 1,
        Decision::PromiseViolated => 3,
    };
    Ok(Report {
        value: json!({
            "decision": decision,
            "kappa": report.kappa,
            "alpha": inst.alpha,
            "beta": inst.beta,
        }),
        code,
    })
}

fn parse_shots(s: &str) -> Result<Shots, Failure> {
    if s == "exact" {
        return Ok(Shots::Exact);
    }
    match s.parse::<u64>() {
        Ok(n) if n > 0 => Ok(Shots::PerPair(n)),
        _ => Err(Failure::Input(format!("--shots must be a positive integer or `exact`, got `{s}`"))),
    }
}

fn verify(instance: &Path, witness: &str, shots: Option<&str>, seed: u64) -> Result<Report, Failure> {
    let inst = io::load_channel(instance)
        .and_then(|l| l.instance())
        .map_err(in_file(instance))?;
    let psi = if witness == "auto" {
        protocol::merlin_witness(&inst.channel)?
    } else {
        let path = Path::new(witness);
        io::load_witness(path).map_err(in_file(path))?
    };
    let shots = match shots {
        Some(s) => parse_shots(s)?,
        None => Shots::PerPair(protocol::shots_for_separation(inst.alpha, inst.beta)),
    };
    let outcome = protocol::arthur_verify(&inst, &psi, shots, seed)?;
    let mut value = serde_json::to_value(&outcome).expect("outcome serializes");
    value["shots_per_pair"] = match shots {
        Shots::Exact => Value::Null,
        Shots::PerPair(n) => json!(n),
    };
    Ok(Report {
        code: if outcome.accepted { 0 } else { 1 },
        value,
    })
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn reduce(spec: &Path, out: &Path) -> Result<Report, Failure> {
    let spec = io::load_reduction_spec(spec).map_err(in_file(spec))?;
    let red = reduction::build_reduction(&spec)?;
    write_file(out, &io::serialize_channel(&red.channel, Some(red.alpha), Some(red.beta)))?;
    Ok(Report::ok(json!({
        "out": out.display().to_string(),
        "qubits": red.channel.qubits(),
        "degree": red.channel.kraus_count(),
        "base_degree": red.base_degree(),
        "kappa_f": spec.kappa_f,
        "alpha": red.alpha,
        "beta": red.beta,
    })))
}

fn synth_expander(qubits: usize, target_kappa: f64, seed: u64, degree: usize, out: Option<&Path>) -> Result<Report, Failure> {
    if qubits == 0 || qubits > 6 {
        return Err(Failure::Input(format!("--qubits must be in 1..=6, got {qubits}")));
    }
    let base = reduction::build_base_expander(qubits, target_kappa, degree, seed)?;
    if let Some(out) = out {
        write_file(out, &io::serialize_channel(&base.channel, None, None))?;
    }
    Ok(Report::ok(json!({
        "qubits": qubits,
        "kappa": base.kappa,
        "stage_kappa": base.stage_kappa,
        "power": base.power,
        "degree_per_stage": degree,
        "degree": base.channel.kraus_count(),
        "attempt": base.attempt,
        "seed": seed,
    })))
}

fn parse_times(spec: &str, auto_horizon: impl FnOnce() -> Result<f64, Failure>) -> Result<Vec<f64>, Failure> {
    let bad = || Failure::Input(format!("cannot parse --times `{spec}`"));
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
    let count = |s: &str| s.trim().parse::<usize>().ok().filter(|&n| n >= 1).ok_or_else(bad);
    let parts: Vec<&str> = spec.split(':').collect();
    let times = match parts.as_slice() {
        ["auto"] => thermal::sample_times(auto_horizon()?, 20),
        ["auto", n] => thermal::sample_times(auto_horizon()?, count(n)?),
        ["log", t, n] => thermal::sample_times(num(t)?, count(n)?),
        ["lin", t0, t1, n] => {
            let (t0, t1, n) = (num(t0)?, num(t1)?, count(n)?);
            (0..n)
                .map(|i| if n == 1 { t0 } else { t0 + (t1 - t0) * i as f64 / (n - 1) as f64 })
                .collect()
        }
        [list] => list.split(',').map(num).collect::<Result<_, _>>()?,
        _ => return Err(bad()),
    };
    if times.iter().any(|t| !t.is_finite() || *t < 0.0) || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Failure::Input(format!("--times `{spec}` must be nondecreasing and nonnegative")));
    }
    Ok(times)
}

fn thermalize(model_path: &Path, rho0: &str, times: &str, csv_out: Option<&Path>) -> Result<Report, Failure> {
    let model = io::load_model(model_path).map_err(in_file(model_path))?;
    let rho = if rho0 == "pure-zero" {
        thermal::pure_zero(model.dim())
    } else {
        let path = Path::new(rho0);
        io::load_density(path).map_err(in_file(path))?
    };
    thermal::check_density(&rho).map_err(|e| Failure::Input(format!("{rho0}: {e}")))?;
    let times = parse_times(times, || {
        // Long enough for the residual to fall below 1e-6 of its start.
        let kappa = spectral::spectral_gap_dense(model.channel())?.kappa;
        let rate = model.gamma() * (1.0 - kappa);
        Ok(if rate > 1e-9 { 20.0 / rate } else { 20.0 / model.gamma() })
    })?;
    let report = thermal::decay_bound_check(&model, &rho, &times, &EvolveOptions::default())?;
    if let Some(path) = csv_out {
        let fail = |e: csv::Error| Failure::Input(format!("{}: {e}", path.display()));
        let mut w = csv::Writer::from_path(path).map_err(fail)?;
        w.write_record(["t", "residual", "bound"]).map_err(fail)?;
        for p in &report.points {
            w.write_record([p.t.to_string(), p.residual.to_string(), p.bound.to_string()])
                .map_err(fail)?;
        }
        w.flush().map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    }
    Ok(Report {
        code: if report.holds { 0 } else { 3 },
        value: serde_json::to_value(&report).expect("report serializes"),
    })
}

fn run(cli: Cli) -> Result<Report, Failure> {
    match cli.command {
        Command::Gap {
            instance,
            method,
            tol,
            seed,
        } => gap(&instance, method, tol, seed),
        Command::Decide { instance } => decide(&instance),
        Command::Verify {
            instance,
            witness,
            shots,
            seed,
        } => verify(&instance, &witness, shots.as_deref(), seed),
        Command::Reduce { spec, out } => reduce(&spec, &out),
        Command::SynthExpander {
            qubits,
            target_kappa,
            seed,
            degree,
            out,
        } => synth_expander(qubits, target_kappa, seed, degree, out.as_deref()),
        Command::Thermalize { model, rho0, times, csv } => thermalize(&model, &rho0, &times, csv.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(report) => {
            println!("{}", serde_json::to_string_pretty(&report.value).expect("json output"));
            ExitCode::from(report.code)
        }
        Err(Failure::Input(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::NonConvergence(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
    }
}
