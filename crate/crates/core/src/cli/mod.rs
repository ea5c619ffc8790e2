//! Command-line front end for the `imlab` binary.
//!
//! Arguments are parsed with clap, then every numeric and state argument is
//! validated up front; all problems are reported together with exit code 2.
//! Exit codes: 0 success, 1 a verification reported violations, 2 configuration
//! error, 3 dimension cap exceeded.

mod state;

use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

pub use state::{parse_state, state_label};

use crate::error::{Error, Result};
use crate::imaginarity::{imag_distance, rei, rei_sequence};
use crate::matcore::{checked_dim, dim_cap, haar_orthogonal, tensor_power_with_cap, DensityMatrix, Seed};
use crate::protocols::{
    exact_erasure_ensemble, exhaustive_twirl, real_pauli_group, sampled_twirl, sigma_z_power, threshold_rate,
    Sampler, ThresholdResult, ThresholdSearch, UnitaryEnsemble,
};
use crate::report::{fmt_f64, to_json, write_text, Csv, RunManifest};
use crate::typicality::{typical_stats, typicality_row, TypicalityRow};
use crate::verify::{chernoff_experiment, converse_chain, run_suite, ChernoffModel, SuiteConfig, SuiteName};
use crate::CovariantUnitary;

pub const EXIT_OK: u8 = 0;
pub const EXIT_VIOLATIONS: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_RESOURCE: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "imlab", version, about = "Imaginarity resource-theory laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
struct Emit {
    /// Write the payload here (plus `<path>.manifest.json`) instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Relative entropy of imaginarity of one state.
    Rei {
        #[arg(long)]
        state: String,
        #[command(flatten)]
        emit: Emit,
    },
    /// `I_r(ρ^{⊗n})` and `I_r(ρ^{⊗n})/n` for n = 1..n-max.
    Regularize {
        #[arg(long)]
        state: String,
        #[arg(long = "n-max")]
        n_max: usize,
        #[command(flatten)]
        emit: Emit,
    },
    /// Twirl `ρ^{⊗n}`: sampled with `--N` members, or the full ensemble without it.
    Twirl {
        #[arg(long)]
        state: String,
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long = "N")]
        size: Option<usize>,
        /// real-pauli, haar-orthogonal, z-pair or exact-erasure.
        #[arg(long, default_value = "real-pauli")]
        ensemble: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        emit: Emit,
    },
    /// Smallest ensemble size reaching `imag_distance ≤ ε` on `ρ^{⊗n}`.
    Threshold {
        #[arg(long)]
        state: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        epsilon: f64,
        #[arg(long, default_value_t = 32)]
        trials: usize,
        #[arg(long, default_value_t = 0.5)]
        quantile: f64,
        #[arg(long, default_value = "real-pauli")]
        ensemble: String,
        /// sampled or exhaustive.
        #[arg(long, default_value = "sampled")]
        search: String,
        #[arg(long = "max-size")]
        max_size: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        emit: Emit,
    },
    /// Typical subspace of `ρ^{⊗n}` (`--state`) or typical set of `p` (`--probs`).
    Typical {
        #[arg(long)]
        state: Option<String>,
        /// Comma-separated distribution, classical mode.
        #[arg(long)]
        probs: Option<String>,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        delta: f64,
        #[command(flatten)]
        emit: Emit,
    },
    /// Random-grid verification suites.
    Verify {
        /// fannes, gentle, l4, l6, converse, concavity or all.
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value = "2,3,4,5,6")]
        dims: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        emit: Emit,
    },
    /// Operator Chernoff bound experiment.
    Chernoff {
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long = "N", default_value_t = 1000)]
        size: usize,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 0.2)]
        epsilon: f64,
        /// projector or haar-orthogonal.
        #[arg(long, default_value = "projector")]
        generator: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        emit: Emit,
    },
    /// Entropy chain of the converse bound for one state and ensemble.
    Converse {
        #[arg(long)]
        state: String,
        #[arg(long, default_value_t = 1)]
        n: usize,
        /// z-pair, real-pauli, exact-erasure or haar-orthogonal (with `--N`).
        #[arg(long, default_value = "z-pair")]
        ensemble: String,
        #[arg(long = "N")]
        size: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        emit: Emit,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Rei { .. } => "rei",
            Command::Regularize { .. } => "regularize",
            Command::Twirl { .. } => "twirl",
            Command::Threshold { .. } => "threshold",
            Command::Typical { .. } => "typical",
            Command::Verify { .. } => "verify",
            Command::Chernoff { .. } => "chernoff",
            Command::Converse { .. } => "converse",
        }
    }

    fn emit(&self) -> &Emit {
        match self {
            Command::Rei { emit, .. }
            | Command::Regularize { emit, .. }
            | Command::Twirl { emit, .. }
            | Command::Threshold { emit, .. }
            | Command::Typical { emit, .. }
            | Command::Verify { emit, .. }
            | Command::Chernoff { emit, .. }
            | Command::Converse { emit, .. } => emit,
        }
    }
}

/// Ensemble names accepted by `twirl`, `threshold` and `converse`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum EnsembleName {
    RealPauli,
    HaarOrthogonal,
    ZPair,
    ExactErasure,
}

impl EnsembleName {
    fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "real-pauli" => Self::RealPauli,
            "haar-orthogonal" => Self::HaarOrthogonal,
            "z-pair" => Self::ZPair,
            "exact-erasure" => Self::ExactErasure,
            other => {
                return Err(Error::Config(format!(
                    "unknown ensemble `{other}` (expected real-pauli, haar-orthogonal, z-pair or exact-erasure)"
                )))
            }
        })
    }

    /// Requirements on the single-copy dimension, checked before running.
    fn check(&self, d: usize, errors: &mut Vec<String>) {
        match self {
            Self::RealPauli => {
                if !d.is_power_of_two() || d < 2 {
                    errors.push(format!("--ensemble real-pauli needs a power-of-two state dimension, got {d}"));
                }
            }
            Self::ZPair => {
                if d != 2 {
                    errors.push(format!("--ensemble z-pair needs a qubit state, got dimension {d}"));
                }
            }
            Self::HaarOrthogonal | Self::ExactErasure => {}
        }
    }

    fn sampler(&self, rho: &DensityMatrix, n: usize) -> Result<Sampler> {
        Ok(match self {
            Self::RealPauli => Sampler::RealPauli,
            Self::HaarOrthogonal => Sampler::HaarOrthogonal,
            Self::ZPair => Sampler::Fixed(z_pair(n)?),
            Self::ExactErasure => {
                let power = tensor_power_with_cap(rho, n, dim_cap())?;
                Sampler::Fixed(exact_erasure_ensemble(&power)?)
            }
        })
    }
}

/// `{𝕀, σ_z^{⊗n}}` with equal weights.
fn z_pair(n: usize) -> Result<UnitaryEnsemble> {
    let z = sigma_z_power(n);
    UnitaryEnsemble::uniform(vec![CovariantUnitary::identity(z.dim()), z])
}

struct Outcome {
    csv: Csv,
    json: serde_json::Value,
    violations: bool,
    seeds: Vec<u64>,
}

/// Parse, validate, run and emit; returns the process exit code.
pub fn main_with_args(args: &[String]) -> u8 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let start = Instant::now();
    if let Err(errors) = validate(&cli.command) {
        eprintln!("configuration errors:");
        for e in &errors {
            eprintln!("  - {e}");
        }
        return EXIT_CONFIG;
    }
    let outcome = match execute(&cli.command) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code_for(&e);
        }
    };
    let emit = cli.command.emit();
    let payload = match emit.format {
        Format::Csv => outcome.csv.render(),
        Format::Json => match to_json(&outcome.json) {
            Ok(s) => s,
            Err(e) => {
                eprintln!("error: {e}");
                return EXIT_CONFIG;
            }
        },
    };
    match &emit.output {
        None => print!("{payload}"),
        Some(path) => {
            let manifest = RunManifest {
                command: cli.command.name().to_string(),
                argv: args.iter().skip(1).cloned().collect(),
                version: env!("CARGO_PKG_VERSION").to_string(),
                wall_time_ms: start.elapsed().as_millis(),
                seeds: outcome.seeds.clone(),
                output: path.display().to_string(),
            };
            let written = write_text(path, &payload)
                .and_then(|_| to_json(&manifest))
                .and_then(|m| write_text(&RunManifest::path_for(path), &m));
            if let Err(e) = written {
                eprintln!("error: {e}");
                return EXIT_CONFIG;
            }
        }
    }
    if outcome.violations {
        EXIT_VIOLATIONS
    } else {
        EXIT_OK
    }
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::ResourceLimit { .. } => EXIT_RESOURCE,
        _ => EXIT_CONFIG,
    }
}

fn parse_list<T: std::str::FromStr>(s: &str, flag: &str, errors: &mut Vec<String>) -> Vec<T> {
    let mut out = Vec::new();
    for part in s.split(',') {
        match part.trim().parse() {
            Ok(v) => out.push(v),
            Err(_) => {
                errors.push(format!("{flag}: `{}` is not a valid number", part.trim()));
                return Vec::new();
            }
        }
    }
    out
}

/// Collect every precondition violation before anything runs.
fn validate(cmd: &Command) -> std::result::Result<(), Vec<String>> {
    let mut errors = Vec::new();
    let state_dim = |spec: &str, errors: &mut Vec<String>| match parse_state(spec) {
        Ok(rho) => Some(rho.dim()),
        Err(e) => {
            errors.push(format!("--state: {e}"));
            None
        }
    };
    let positive = |v: usize, flag: &str, errors: &mut Vec<String>| {
        if v == 0 {
            errors.push(format!("{flag} must be at least 1"));
        }
    };
    match cmd {
        Command::Rei { state, .. } => {
            state_dim(state, &mut errors);
        }
        Command::Regularize { state, n_max, .. } => {
            state_dim(state, &mut errors);
            positive(*n_max, "--n-max", &mut errors);
        }
        Command::Twirl { state, n, size, ensemble, .. } => {
            positive(*n, "--n", &mut errors);
            if let Some(0) = size {
                errors.push("--N must be at least 1".into());
            }
            let name = EnsembleName::parse(ensemble).map_err(|e| errors.push(format!("--ensemble: {e}"))).ok();
            if name == Some(EnsembleName::HaarOrthogonal) && size.is_none() {
                errors.push("--ensemble haar-orthogonal needs --N (it has no finite member list)".into());
            }
            if let (Some(d), Some(name)) = (state_dim(state, &mut errors), name) {
                name.check(d, &mut errors);
            }
        }
        Command::Threshold { state, n, epsilon, trials, quantile, ensemble, search, max_size, .. } => {
            positive(*n, "--n", &mut errors);
            positive(*trials, "--trials", &mut errors);
            if !(*epsilon > 0.0 && *epsilon < 2.0) {
                errors.push(format!("--epsilon must lie in (0, 2), got {epsilon}"));
            }
            if !(*quantile > 0.0 && *quantile <= 1.0) {
                errors.push(format!("--quantile must lie in (0, 1], got {quantile}"));
            }
            if let Some(m) = max_size {
                if *m < 2 {
                    errors.push("--max-size must be at least 2".into());
                }
            }
            let name = EnsembleName::parse(ensemble).map_err(|e| errors.push(format!("--ensemble: {e}"))).ok();
            match search.as_str() {
                "sampled" => {}
                "exhaustive" => {
                    if name == Some(EnsembleName::HaarOrthogonal) {
                        errors.push("--search exhaustive needs a finite ensemble".into());
                    }
                }
                other => errors.push(format!("--search: unknown mode `{other}` (expected sampled or exhaustive)")),
            }
            if let (Some(d), Some(name)) = (state_dim(state, &mut errors), name) {
                name.check(d, &mut errors);
            }
        }
        Command::Typical { state, probs, n, delta, .. } => {
            positive(*n, "--n", &mut errors);
            if !(*delta > 0.0 && delta.is_finite()) {
                errors.push(format!("--delta must be positive, got {delta}"));
            }
            match (state, probs) {
                (Some(s), None) => {
                    state_dim(s, &mut errors);
                }
                (None, Some(p)) => {
                    let p: Vec<f64> = parse_list(p, "--probs", &mut errors);
                    if !p.is_empty() {
                        let s: f64 = p.iter().sum();
                        if p.iter().any(|&x| !(x >= 0.0)) || (s - 1.0).abs() > 1e-10 {
                            errors.push(format!("--probs must be a probability vector, sums to {s}"));
                        }
                    }
                }
                _ => errors.push("typical needs exactly one of --state or --probs".into()),
            }
        }
        Command::Verify { suite, samples, dims, .. } => {
            if let Err(e) = SuiteName::from_name(suite) {
                errors.push(format!("--suite: {e}"));
            }
            positive(*samples, "--samples", &mut errors);
            let dims: Vec<usize> = parse_list(dims, "--dims", &mut errors);
            if dims.iter().any(|&d| d < 2) {
                errors.push("--dims entries must be at least 2".into());
            }
        }
        Command::Chernoff { d, size, trials, epsilon, generator, .. } => {
            positive(*d, "--d", &mut errors);
            positive(*size, "--N", &mut errors);
            positive(*trials, "--trials", &mut errors);
            if !(*epsilon > 0.0 && *epsilon <= 1.0) {
                errors.push(format!("--epsilon must lie in (0, 1], got {epsilon}"));
            }
            if let Err(e) = ChernoffModel::from_name(generator) {
                errors.push(format!("--generator: {e}"));
            }
        }
        Command::Converse { state, n, ensemble, size, .. } => {
            positive(*n, "--n", &mut errors);
            let name = EnsembleName::parse(ensemble).map_err(|e| errors.push(format!("--ensemble: {e}"))).ok();
            match (name, size) {
                (Some(EnsembleName::HaarOrthogonal), None) => {
                    errors.push("--ensemble haar-orthogonal needs --N members".into())
                }
                (Some(EnsembleName::HaarOrthogonal), Some(0)) => errors.push("--N must be at least 1".into()),
                (Some(EnsembleName::HaarOrthogonal), Some(_)) => {}
                (Some(_), Some(_)) => errors.push("--N only applies to --ensemble haar-orthogonal".into()),
                _ => {}
            }
            if let (Some(d), Some(name)) = (state_dim(state, &mut errors), name) {
                name.check(d, &mut errors);
            }
        }
    }
    if errors.is_empty() {
        Ok(())
    } else {
        Err(errors)
    }
}

fn execute(cmd: &Command) -> Result<Outcome> {
    match cmd {
        Command::Rei { state, .. } => {
            let rho = parse_state(state)?;
            let (value, dist) = (rei(&rho), imag_distance(&rho));
            let label = state_label(state);
            let mut csv = Csv::new(&["state_label", "d", "rei", "imag_distance"]);
            csv.push(vec![label.clone(), rho.dim().to_string(), fmt_f64(value), fmt_f64(dist)]);
            let json = json!({ "state_label": label, "d": rho.dim(), "rei": value, "imag_distance": dist });
            Ok(Outcome { csv, json, violations: false, seeds: vec![] })
        }
        Command::Regularize { state, n_max, .. } => {
            let rho = parse_state(state)?;
            let seq = rei_sequence(&rho, *n_max, &state_label(state))?;
            let mut csv = Csv::new(&["n", "rei", "rei_per_copy"]);
            for p in &seq.values {
                csv.push(vec![p.n.to_string(), fmt_f64(p.rei), fmt_f64(p.rei_per_copy)]);
            }
            Ok(Outcome { csv, json: serde_json::to_value(&seq).expect("serialisable"), violations: false, seeds: vec![] })
        }
        Command::Twirl { state, n, size, ensemble, seed, .. } => {
            let rho = parse_state(state)?;
            let sampler = EnsembleName::parse(ensemble)?.sampler(&rho, *n)?;
            let (out, gap, mode) = match size {
                Some(size) => {
                    let (out, gap) = sampled_twirl(&rho, *n, *size, &sampler, Seed::new(*seed))?;
                    (out, gap, "sampled")
                }
                None => {
                    let (out, gap) = exhaustive_twirl(&rho, *n, &sampler)?;
                    (out, gap, "exhaustive")
                }
            };
            let members = size.map(|s| s.to_string()).unwrap_or_else(|| {
                sampler
                    .ensemble_for(out.dim())
                    .ok()
                    .and_then(|e| e.group_size())
                    .map(|s| s.to_string())
                    .unwrap_or_default()
            });
            let rei_out = rei(&out);
            let label = state_label(state);
            let mut csv = Csv::new(&["state_label", "n", "N", "ensemble", "mode", "imag_distance", "rei_output", "seed"]);
            csv.push(vec![
                label.clone(),
                n.to_string(),
                members.clone(),
                ensemble.clone(),
                mode.into(),
                fmt_f64(gap),
                fmt_f64(rei_out),
                seed.to_string(),
            ]);
            let json = json!({
                "state_label": label, "n": n, "N": members, "ensemble": ensemble, "mode": mode,
                "imag_distance": gap, "rei_output": rei_out, "seed": seed,
            });
            Ok(Outcome { csv, json, violations: false, seeds: vec![*seed] })
        }
        Command::Threshold { state, n, epsilon, trials, quantile, ensemble, search, max_size, seed, .. } => {
            let rho = parse_state(state)?;
            let sampler = EnsembleName::parse(ensemble)?.sampler(&rho, *n)?;
            let search = match search.as_str() {
                "exhaustive" => match ThresholdSearch::exhaustive() {
                    ThresholdSearch::Exhaustive { max_evaluations, .. } => {
                        ThresholdSearch::Exhaustive { max_size: *max_size, max_evaluations }
                    }
                    other => other,
                },
                _ => ThresholdSearch::Sampled { trials: *trials, quantile: *quantile, max_size: *max_size },
            };
            let result = threshold_rate(&rho, *n, *epsilon, &sampler, search, Seed::new(*seed))?;
            let label = state_label(state);
            let csv = threshold_csv(&[(label.clone(), result.clone())]);
            let mut json = serde_json::to_value(&result).expect("serialisable");
            json["state_label"] = json!(label);
            json["ensemble"] = json!(ensemble);
            Ok(Outcome { csv, json, violations: false, seeds: vec![*seed] })
        }
        Command::Typical { state, probs, n, delta, .. } => {
            if let Some(state) = state {
                let rho = parse_state(state)?;
                let row = typicality_row(&rho, *n, *delta)?;
                let mut csv = Csv::new(&TypicalityRow::CSV_HEADER.split(',').collect::<Vec<_>>());
                csv.push(row.csv_row().split(',').map(String::from).collect());
                return Ok(Outcome { csv, json: serde_json::to_value(&row).expect("serialisable"), violations: false, seeds: vec![] });
            }
            let probs: Vec<f64> = probs
                .as_deref()
                .unwrap_or_default()
                .split(',')
                .map(|s| s.trim().parse::<f64>().map_err(|e| Error::Config(e.to_string())))
                .collect::<Result<_>>()?;
            let set = typical_stats(&probs, *n, *delta)?;
            let mut csv = Csv::new(&["probs", "n", "delta", "member_count", "mass", "count_bound_log2"]);
            csv.push(vec![
                probs.iter().map(|p| fmt_f64(*p)).collect::<Vec<_>>().join(";"),
                n.to_string(),
                fmt_f64(*delta),
                set.member_count.clone(),
                fmt_f64(set.mass),
                fmt_f64(set.count_bound_log2()),
            ]);
            Ok(Outcome { csv, json: serde_json::to_value(&set).expect("serialisable"), violations: false, seeds: vec![] })
        }
        Command::Verify { suite, samples, dims, seed, .. } => {
            let mut errors = Vec::new();
            let dims: Vec<usize> = parse_list(dims, "--dims", &mut errors);
            let cfg = SuiteConfig { samples: *samples, dims, seed: *seed };
            let reports = run_suite(SuiteName::from_name(suite)?, &cfg)?;
            let mut csv = Csv::new(&["lemma_id", "samples", "violations", "worst_margin", "slack", "diagnostic_violations", "seed"]);
            for r in &reports {
                eprintln!("{}", r.summary_line());
                csv.push(vec![
                    r.lemma_id.clone(),
                    r.samples.to_string(),
                    r.violations.to_string(),
                    fmt_f64(r.worst_margin),
                    fmt_f64(r.slack),
                    r.diagnostic_violations.map(|v| v.to_string()).unwrap_or_default(),
                    r.seed.to_string(),
                ]);
            }
            let violations = reports.iter().any(|r| !r.passed());
            Ok(Outcome { csv, json: serde_json::to_value(&reports).expect("serialisable"), violations, seeds: vec![*seed] })
        }
        Command::Chernoff { d, size, trials, epsilon, generator, seed, .. } => {
            let model = ChernoffModel::from_name(generator)?;
            let r = chernoff_experiment(*d, *size, *trials, *epsilon, model, Seed::new(*seed))?;
            let mut csv = Csv::new(&[
                "generator", "d", "N", "mu", "epsilon", "trials", "empirical_failures", "lower_failures",
                "upper_failures", "frequency", "bound", "margin", "holds", "seed",
            ]);
            csv.push(vec![
                model.label().into(),
                d.to_string(),
                size.to_string(),
                fmt_f64(r.mu),
                fmt_f64(r.epsilon),
                trials.to_string(),
                r.empirical_failures.to_string(),
                r.lower_failures.to_string(),
                r.upper_failures.to_string(),
                fmt_f64(r.frequency()),
                fmt_f64(r.bound),
                fmt_f64(r.margin),
                r.holds().to_string(),
                seed.to_string(),
            ]);
            let mut json = serde_json::to_value(&r).expect("serialisable");
            json["holds"] = json!(r.holds());
            Ok(Outcome { csv, json, violations: !r.holds(), seeds: vec![*seed] })
        }
        Command::Converse { state, n, ensemble, size, seed, .. } => {
            let rho = parse_state(state)?;
            let dn = checked_dim(rho.dim(), *n, dim_cap())?;
            let ens = match EnsembleName::parse(ensemble)? {
                EnsembleName::ZPair => z_pair(*n)?,
                EnsembleName::RealPauli => real_pauli_group(dn.trailing_zeros() as usize)?,
                EnsembleName::ExactErasure => exact_erasure_ensemble(&tensor_power_with_cap(&rho, *n, dim_cap())?)?,
                EnsembleName::HaarOrthogonal => {
                    let base = Seed::new(*seed);
                    let members = (0..size.unwrap_or(1)).map(|k| haar_orthogonal(dn, base.derive(k as u64))).collect();
                    UnitaryEnsemble::uniform(members)?
                }
            };
            let r = converse_chain(&rho, &ens, *n)?;
            let mut csv = Csv::new(&["check", "lhs", "bound", "margin", "holds"]);
            for (name, c) in r.checks() {
                csv.push(vec![
                    name.into(),
                    fmt_f64(c.lhs),
                    fmt_f64(c.bound),
                    fmt_f64(c.margin()),
                    c.holds(crate::verify::DEFAULT_SLACK).to_string(),
                ]);
            }
            let mut json = serde_json::to_value(&r).expect("serialisable");
            json["state_label"] = json!(state_label(state));
            json["ensemble"] = json!(ensemble);
            json["holds"] = json!(r.holds());
            Ok(Outcome { csv, json, violations: !r.holds(), seeds: vec![*seed] })
        }
    }
}

fn threshold_csv(rows: &[(String, ThresholdResult)]) -> Csv {
    let mut csv = Csv::new(&ThresholdResult::CSV_HEADER.split(',').collect::<Vec<_>>());
    for (label, r) in rows {
        csv.push(r.csv_row(label).split(',').map(String::from).collect());
    }
    csv
}
