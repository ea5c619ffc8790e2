//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use imlab::imaginarity::{imag_distance, re_im_parts, rei, rei_sequence, theta_state};
use imlab::matcore::{
    relative_entropy, random_density, tensor_power, trace_norm, haar_orthogonal, DensityMatrix, Seed,
};
use imlab::protocols::{
    apply_ensemble, exact_erasure_ensemble, full_qubit_twirl, qubit_z_twirl, threshold_rate, Sampler,
    ThresholdSearch, UnitaryEnsemble,
};
use imlab::typicality::{typical_projector, typical_stats};
use imlab::verify::{
    chernoff_experiment, converse_chain, run_suite, ChernoffModel, SuiteConfig, SuiteName, DEFAULT_SLACK,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn dims_2_to_6(i: usize) -> usize {
    2 + i % 5
}

fn c1_rei_golden() -> Outcome {
    let plus = rei(&DensityMatrix::plus_i());
    let mut worst_real: f64 = 0.0;
    for k in 0..50 {
        let real = theta_state(&random_density(dims_2_to_6(k), Seed::new(1000 + k as u64)));
        worst_real = worst_real.max(rei(&real).abs());
    }
    worst_real = worst_real.max(rei(&DensityMatrix::diagonal(&[0.5, 0.3, 0.2]).unwrap()).abs());
    let mut worst_gap: f64 = 0.0;
    for k in 0..500 {
        let rho = random_density(dims_2_to_6(k), Seed::new(k as u64));
        let d = relative_entropy(&rho, &theta_state(&rho)).unwrap();
        worst_gap = worst_gap.max((rei(&rho) - d).abs());
    }
    outcome(
        (plus - 1.0).abs() <= 1e-9 && worst_real <= 1e-10 && worst_gap <= 1e-8,
        format!("rei(plus-i)={plus:.12}, max|rei(real)|={worst_real:.2e}, max|rei-D(rho||Theta rho)|={worst_gap:.2e}"),
    )
}

fn c2_full_twirl() -> Outcome {
    let ens = full_qubit_twirl();
    let half = DensityMatrix::maximally_mixed(2);
    let mut worst: f64 = 0.0;
    for k in 0..100 {
        let out = apply_ensemble(&random_density(2, Seed::new(k)), &ens).unwrap();
        worst = worst.max(trace_norm(&(out.matrix() - half.matrix())).unwrap());
    }
    outcome(worst <= 1e-12, format!("max ||twirl(rho) - I/2||_1 = {worst:.2e} over 100 states"))
}

fn suite_outcome(name: SuiteName, samples: usize) -> Outcome {
    let cfg = SuiteConfig { samples, dims: vec![2, 3, 4, 5, 6], seed: 2024 };
    let reports = run_suite(name, &cfg).unwrap();
    let r = &reports[0];
    outcome(r.passed() && r.samples == samples, r.summary_line())
}

fn c5_exact_erasure() -> Outcome {
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    for k in 0..100 {
        let rho = random_density(dims_2_to_6(k), Seed::with_stream(5, k as u64));
        // r from the singular values of Im ρ, independent of the canonical-form code
        let (_, im) = re_im_parts(&rho);
        let rank = im.svd(false, false).singular_values.iter().filter(|&&s| s > 1e-10).count();
        let expected = 1usize << (rank / 2);
        let ens = exact_erasure_ensemble(&rho).unwrap();
        let gap = imag_distance(&apply_ensemble(&rho, &ens).unwrap());
        worst = worst.max(gap);
        if ens.group_size() != Some(expected) || gap > 1e-10 {
            failures.push(k);
        }
    }
    outcome(failures.is_empty(), format!("size mismatches or gaps over 1e-10: {failures:?}; max gap {worst:.2e}"))
}

fn c6_typicality() -> Outcome {
    let rho = DensityMatrix::diagonal(&[0.75, 0.25]).unwrap();
    let tp = typical_projector(&rho, 4, 0.2).unwrap();
    let slack = tp.operator_bound_slack(&tensor_power(&rho, 4).unwrap());
    let classical = typical_stats(&[0.9, 0.1], 200, 0.1).unwrap();
    let golden = tp.dim == 4 && tp.mu == 0.421875 && slack >= -1e-9;
    outcome(
        golden && classical.mass >= 0.95,
        format!(
            "D={} mu={} op_slack={slack:.2e}; p=(0.9,0.1) n=200 delta=0.1 mass={} (need >= 0.95)",
            tp.dim, tp.mu, classical.mass
        ),
    )
}

fn c7_converse() -> Outcome {
    let tight = converse_chain(&DensityMatrix::plus_i(), &qubit_z_twirl(), 1).unwrap();
    let tight_ok = (tight.log2_size - 1.0).abs() <= 1e-9 && (tight.s_output - tight.n_s_rho - 1.0).abs() <= 1e-9;
    let mut failures = 0;
    let mut worst = f64::INFINITY;
    for k in 0..50u64 {
        let rho = random_density(2, Seed::with_stream(7, k));
        let members = (0..4).map(|j| haar_orthogonal(4, Seed::with_stream(70 + k, j))).collect();
        let ens = UnitaryEnsemble::uniform(members).unwrap();
        let r = converse_chain(&rho, &ens, 2).unwrap();
        worst = worst.min(r.worst_margin());
        failures += usize::from(!r.holds());
    }
    outcome(
        tight_ok && failures == 0,
        format!(
            "tight: log2N={} S(O(rho))-S(rho)={:.12}; random: {failures}/50 failures, worst margin {worst:.2e}",
            tight.log2_size,
            tight.s_output - tight.n_s_rho
        ),
    )
}

fn c8_regularization() -> Outcome {
    let seq = rei_sequence(&DensityMatrix::plus_i(), 6, "plus-i").unwrap();
    let per_copy_err = seq
        .values
        .iter()
        .map(|p| (p.rei_per_copy - 1.0 / p.n as f64).abs())
        .fold(0.0, f64::max);
    let mut worst = f64::NEG_INFINITY;
    for k in 0..200u64 {
        let rho = random_density(2, Seed::with_stream(8, k));
        for p in rei_sequence(&rho, 5, "random").unwrap().values {
            worst = worst.max(p.rei);
        }
    }
    outcome(
        per_copy_err <= 1e-9 && worst <= 1.0 + 1e-9,
        format!("max |per_copy - 1/n| = {per_copy_err:.2e}; max I_r(rho^n) over 200 qubits, n<=5: {worst:.12}"),
    )
}

fn c9_threshold() -> Outcome {
    let mut rates = Vec::new();
    let mut ok = true;
    for n in 1..=6 {
        let r = threshold_rate(
            &DensityMatrix::plus_i(),
            n,
            1e-6,
            &Sampler::RealPauli,
            ThresholdSearch::exhaustive(),
            Seed::new(9),
        )
        .unwrap();
        ok &= r.n_star <= 2 && !r.saturated && r.rate <= 1.0 / n as f64 + 1e-12;
        rates.push((r.n_star, r.rate));
    }
    let monotone = rates.windows(2).all(|w| w[1].1 <= w[0].1);
    outcome(ok && monotone, format!("(N*, rate) for n=1..6: {rates:?}"))
}

fn c10_chernoff() -> Outcome {
    let r = chernoff_experiment(2, 1000, 1000, 0.2, ChernoffModel::Projector, Seed::new(10)).unwrap();
    let limit = 1.8e-4 + 3.0 * (1.8e-4 * (1.0 - 1.8e-4) / 1000.0f64).sqrt();
    outcome(
        r.frequency() <= limit && r.holds(),
        format!("failures {}/{} (freq {}), bound {:.3e}, limit {limit:.3e}", r.empirical_failures, r.trials, r.frequency(), r.bound),
    )
}

fn c11_gentle() -> Outcome {
    let cfg = SuiteConfig { samples: 1, dims: vec![2], seed: 11 };
    let reports = run_suite(SuiteName::Gentle, &cfg).unwrap();
    let typical = &reports[0];
    outcome(
        typical.passed() && typical.slack == DEFAULT_SLACK,
        format!("{} (diagnostic = literal 2*sqrt(2)*eps bound, not gated)", typical.summary_line()),
    )
}

fn run_cli(args: &[&str], out: &Path) -> (Option<i32>, Vec<u8>) {
    let status = Command::new(env!("CARGO_BIN_EXE_imlab"))
        .args(args)
        .arg("--output")
        .arg(out)
        .stderr(std::process::Stdio::null())
        .status()
        .expect("binary runs");
    (status.code(), std::fs::read(out).unwrap_or_default())
}

fn c12_determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let commands: Vec<Vec<&str>> = vec![
        vec!["rei", "--state", "random(4,3)"],
        vec!["regularize", "--state", "plus-i", "--n-max", "4"],
        vec!["twirl", "--state", "random(2,5)", "--n", "3", "--N", "17", "--ensemble", "haar-orthogonal", "--seed", "5"],
        vec!["twirl", "--state", "random(2,5)", "--n", "3", "--N", "9", "--ensemble", "real-pauli", "--seed", "5"],
        vec!["threshold", "--state", "plus-i", "--n", "4", "--epsilon", "0.05", "--trials", "32", "--seed", "42", "--ensemble", "real-pauli"],
        vec!["typical", "--state", "random(2,1)", "--n", "6", "--delta", "0.2"],
        vec!["typical", "--probs", "0.9,0.1", "--n", "200", "--delta", "0.1"],
        vec!["verify", "--suite", "all", "--samples", "1000", "--dims", "2,3,4", "--seed", "7", "--format", "json"],
        vec!["chernoff", "--N", "200", "--trials", "200", "--generator", "haar-orthogonal", "--d", "3", "--seed", "4"],
        vec!["converse", "--state", "random(2,2)", "--n", "2", "--ensemble", "haar-orthogonal", "--N", "4", "--seed", "6"],
    ];
    let mut bad = Vec::new();
    for (i, args) in commands.iter().enumerate() {
        let a = run_cli(args, &dir.path().join(format!("{i}a")));
        let b = run_cli(args, &dir.path().join(format!("{i}b")));
        if a.0 != Some(0) || b.0 != Some(0) || a.1.is_empty() || a.1 != b.1 {
            bad.push(args[0]);
        }
    }
    outcome(bad.is_empty(), format!("{} commands re-run; mismatched or failed: {bad:?}", commands.len()))
}

fn main() {
    type Criterion = (usize, &'static str, Duration, fn() -> Outcome);
    let criteria: Vec<Criterion> = vec![
        (1, "REI golden values", Duration::from_secs(10), c1_rei_golden),
        (2, "qubit twirl flattens to I/2", Duration::from_secs(1), c2_full_twirl),
        (3, "S(Theta rho) >= S(rho), 1e4 states", Duration::from_secs(60), || suite_outcome(SuiteName::L4, 10_000)),
        (4, "Theta-entropy invariance under orthogonal O, 500 pairs", Duration::from_secs(30), || {
            suite_outcome(SuiteName::L6, 500)
        }),
        (5, "exact erasure", Duration::from_secs(60), c5_exact_erasure),
        (6, "typicality golden case", Duration::from_secs(60), c6_typicality),
        (7, "converse chain", Duration::from_secs(60), c7_converse),
        (8, "regularization trend", Duration::from_secs(60), c8_regularization),
        (9, "threshold consistency", Duration::from_secs(120), c9_threshold),
        (10, "operator Chernoff", Duration::from_secs(60), c10_chernoff),
        (11, "gentle measurement on the typicality grid", Duration::from_secs(60), c11_gentle),
        (12, "CLI determinism", Duration::from_secs(300), c12_determinism),
    ];
    let mut failed = Vec::new();
    for (id, name, limit, run) in criteria {
        let start = Instant::now();
        let out = run();
        let elapsed = start.elapsed();
        let pass = out.pass && elapsed <= limit;
        let timing = format!("{:.2}s/{}s", elapsed.as_secs_f64(), limit.as_secs());
        println!(
            "criterion {id:>2} {} {name}: {} [{timing}]",
            if pass { "PASS" } else { "FAIL" },
            out.detail
        );
        if !pass {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all 12 criteria passed");
    } else {
        println!("acceptance: {} of 12 criteria failed: {failed:?}", failed.len());
        std::process::exit(1);
    }
}
