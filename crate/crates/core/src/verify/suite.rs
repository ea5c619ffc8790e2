use rand::Rng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{
    check_fannes, check_gentle, check_l4, check_l6, concavity_step_check, converse_chain, LemmaReport, DEFAULT_SLACK,
};
use crate::error::{Error, Result};
use crate::matcore::random::{haar_orthogonal_from, random_density_from, random_pure_from};
use crate::matcore::{
    checked_dim, dim_cap, hermitian_eigen, tensor_power_with_cap, CMatrix, DensityMatrix, Seed,
};
use crate::protocols::UnitaryEnsemble;
use crate::typicality::typical_projector;

/// Slack for `S(Θ(ρ)) ≥ S(ρ)`.
pub const L4_SLACK: f64 = 1e-9;

const GENTLE_MAX_N: usize = 8;
const GENTLE_DELTAS: [f64; 3] = [0.1, 0.2, 0.3];
const GENTLE_RANDOM_STATES: u64 = 3;
const CONVERSE_ENSEMBLE_SIZE: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SuiteName {
    Fannes,
    Gentle,
    L4,
    L6,
    Converse,
    Concavity,
    All,
}

impl SuiteName {
    pub fn from_name(name: &str) -> Result<Self> {
        Ok(match name {
            "fannes" => Self::Fannes,
            "gentle" => Self::Gentle,
            "l4" => Self::L4,
            "l6" => Self::L6,
            "converse" => Self::Converse,
            "concavity" => Self::Concavity,
            "all" => Self::All,
            other => {
                return Err(Error::Config(format!(
                    "unknown suite `{other}` (expected fannes, gentle, l4, l6, converse, concavity or all)"
                )))
            }
        })
    }

    fn stream(&self) -> u64 {
        *self as u64 + 1
    }
}

/// Random grid shared by the suites: instance `i` has dimension `dims[i % len]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub samples: usize,
    pub dims: Vec<usize>,
    pub seed: u64,
}

impl SuiteConfig {
    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::Config("samples must be positive".into()));
        }
        if self.dims.is_empty() || self.dims.iter().any(|&d| d < 2) {
            return Err(Error::Config("dims must be a non-empty list of integers ≥ 2".into()));
        }
        Ok(())
    }

    fn dim(&self, i: usize) -> usize {
        self.dims[i % self.dims.len()]
    }

    fn rng(&self, suite: SuiteName, i: usize) -> ChaCha20Rng {
        Seed::with_stream(self.seed, suite.stream()).derive(i as u64).rng()
    }

    fn echo(&self) -> serde_json::Value {
        json!({ "samples": self.samples, "dims": self.dims })
    }
}

/// Pure for every third instance, Hilbert–Schmidt otherwise.
fn grid_state(d: usize, i: usize, rng: &mut ChaCha20Rng) -> DensityMatrix {
    if i.is_multiple_of(3) {
        random_pure_from(d, rng).density()
    } else {
        random_density_from(d, rng)
    }
}

pub fn run_suite(name: SuiteName, cfg: &SuiteConfig) -> Result<Vec<LemmaReport>> {
    cfg.validate()?;
    Ok(match name {
        SuiteName::Fannes => vec![fannes_suite(cfg)?],
        SuiteName::Gentle => gentle_suite(cfg)?,
        SuiteName::L4 => vec![l4_suite(cfg)],
        SuiteName::L6 => vec![l6_suite(cfg)?],
        SuiteName::Converse => vec![converse_suite(cfg)?],
        SuiteName::Concavity => vec![concavity_suite(cfg)?],
        SuiteName::All => {
            let mut out = vec![fannes_suite(cfg)?];
            out.extend(gentle_suite(cfg)?);
            out.push(l4_suite(cfg));
            out.push(l6_suite(cfg)?);
            out.push(converse_suite(cfg)?);
            out.push(concavity_suite(cfg)?);
            out
        }
    })
}

fn fannes_suite(cfg: &SuiteConfig) -> Result<LemmaReport> {
    let mut config = cfg.echo();
    config["eta_log_base"] = json!(2);
    config["eta_breakpoint"] = json!("1/e");
    let mut report = LemmaReport::new("fannes", DEFAULT_SLACK, cfg.seed, config);
    let checks: Vec<_> = (0..cfg.samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = cfg.rng(SuiteName::Fannes, i);
            let d = cfg.dim(i);
            let rho = grid_state(d, i, &mut rng);
            let other = random_density_from(d, &mut rng);
            // odd instances: a nearby σ, where the bound is tight-ish
            let sigma = if i % 2 == 1 {
                let t: f64 = rng.random_range(0.0..0.3);
                DensityMatrix::from_trusted(rho.matrix().scale(1.0 - t) + other.matrix().scale(t))
            } else {
                other
            };
            check_fannes(&rho, &sigma)
        })
        .collect();
    for ch in checks {
        report.record(&ch?);
    }
    Ok(report)
}

fn gentle_suite(cfg: &SuiteConfig) -> Result<Vec<LemmaReport>> {
    let mut states = vec![
        DensityMatrix::diagonal(&[0.75, 0.25])?,
        DensityMatrix::diagonal(&[0.9, 0.1])?,
        DensityMatrix::plus_i(),
    ];
    for k in 0..GENTLE_RANDOM_STATES {
        states.push(random_density_from(2, &mut Seed::with_stream(cfg.seed, 100).derive(k).rng()));
    }
    let cases: Vec<(usize, usize, f64)> = (0..states.len())
        .flat_map(|s| (1..=GENTLE_MAX_N).flat_map(move |n| GENTLE_DELTAS.map(move |delta| (s, n, delta))))
        .collect();
    let checks: Vec<_> = cases
        .par_iter()
        .map(|&(s, n, delta)| {
            let power = tensor_power_with_cap(&states[s], n, dim_cap())?;
            let tp = typical_projector(&states[s], n, delta)?;
            check_gentle(&power, &tp.projector)
        })
        .collect();
    let config = json!({
        "d": 2,
        "n_max": GENTLE_MAX_N,
        "deltas": GENTLE_DELTAS,
        "states": states.len(),
        "bound": "2*sqrt(2*eps)",
        "diagnostic_bound": "2*sqrt(2)*eps",
    });
    let mut typical = LemmaReport::new("gentle-typical", DEFAULT_SLACK, cfg.seed, config);
    let mut literal = 0;
    for g in checks {
        let g = g?;
        typical.record(&g.standard());
        literal += usize::from(!g.literal().holds(DEFAULT_SLACK));
    }
    typical.diagnostic_violations = Some(literal);

    let checks: Vec<_> = (0..cfg.samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = cfg.rng(SuiteName::Gentle, i);
            let d = cfg.dim(i);
            let rho = grid_state(d, i, &mut rng);
            let x = random_effect(&rho, &mut rng);
            check_gentle(&rho, &x)
        })
        .collect();
    let mut config = cfg.echo();
    config["bound"] = json!("2*sqrt(2*eps)");
    config["diagnostic_bound"] = json!("2*sqrt(2)*eps");
    let mut random = LemmaReport::new("gentle-random", DEFAULT_SLACK, cfg.seed, config);
    let mut literal = 0;
    for g in checks {
        let g = g?;
        random.record(&g.standard());
        literal += usize::from(!g.literal().holds(DEFAULT_SLACK));
    }
    random.diagnostic_violations = Some(literal);
    Ok(vec![typical, random])
}

/// Effect nearly aligned with `ρ`: eigenbasis of `ρ + t·τ` for a random `τ` and
/// small `t`, weight 1 on the upper half of the spectrum and random below.
fn random_effect(rho: &DensityMatrix, rng: &mut ChaCha20Rng) -> CMatrix {
    let d = rho.dim();
    let tau = random_density_from(d, rng);
    let t = 10f64.powf(-rng.random_range(1.0..4.0));
    let eig = hermitian_eigen(&(rho.matrix() + tau.matrix().scale(t)));
    let mut x = CMatrix::zeros(d, d);
    for j in 0..d {
        let w = if j < d.div_ceil(2) { 1.0 } else { rng.random_range(0.0..1.0) };
        let v = eig.vector(j);
        x += (&v * v.adjoint()).scale(w);
    }
    (&x + x.adjoint()).scale(0.5)
}

fn l4_suite(cfg: &SuiteConfig) -> LemmaReport {
    let mut report = LemmaReport::new("l4", L4_SLACK, cfg.seed, cfg.echo());
    let checks: Vec<_> = (0..cfg.samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = cfg.rng(SuiteName::L4, i);
            check_l4(&grid_state(cfg.dim(i), i, &mut rng))
        })
        .collect();
    for ch in &checks {
        report.record(ch);
    }
    report
}

fn l6_suite(cfg: &SuiteConfig) -> Result<LemmaReport> {
    let mut report = LemmaReport::new("l6", DEFAULT_SLACK, cfg.seed, cfg.echo());
    let checks: Vec<_> = (0..cfg.samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = cfg.rng(SuiteName::L6, i);
            let d = cfg.dim(i);
            let rho = grid_state(d, i, &mut rng);
            let o = haar_orthogonal_from(d, &mut rng);
            check_l6(&rho, &o.to_complex())
        })
        .collect();
    for ch in checks {
        report.record(&ch?);
    }
    Ok(report)
}

/// Random state and a weighted `CONVERSE_ENSEMBLE_SIZE`-member Haar-orthogonal
/// ensemble on `n = 2` copies, dropping to one copy when the cap forbids two.
fn converse_instance(cfg: &SuiteConfig, suite: SuiteName, i: usize) -> Result<(DensityMatrix, UnitaryEnsemble, usize)> {
    let mut rng = cfg.rng(suite, i);
    let d = cfg.dim(i);
    let rho = grid_state(d, i, &mut rng);
    let r = rho.rank();
    let fits = |n: usize| {
        checked_dim(d * r, n, dim_cap()).is_ok_and(|x| x.saturating_mul(CONVERSE_ENSEMBLE_SIZE) <= dim_cap())
    };
    let n = if fits(2) { 2 } else { 1 };
    let dn = d.pow(n as u32);
    let raw: Vec<f64> = (0..CONVERSE_ENSEMBLE_SIZE).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let members = raw
        .iter()
        .map(|w| (w / total, haar_orthogonal_from(dn, &mut rng)))
        .collect();
    Ok((rho, UnitaryEnsemble::explicit(members)?, n))
}

fn converse_suite(cfg: &SuiteConfig) -> Result<LemmaReport> {
    let mut config = cfg.echo();
    config["ensemble_size"] = json!(CONVERSE_ENSEMBLE_SIZE);
    let mut report = LemmaReport::new("converse", DEFAULT_SLACK, cfg.seed, config);
    let margins: Vec<_> = (0..cfg.samples)
        .into_par_iter()
        .map(|i| {
            let (rho, ens, n) = converse_instance(cfg, SuiteName::Converse, i)?;
            Ok(converse_chain(&rho, &ens, n)?.worst_margin())
        })
        .collect();
    for m in margins {
        report.record_margin(m?);
    }
    Ok(report)
}

fn concavity_suite(cfg: &SuiteConfig) -> Result<LemmaReport> {
    let mut config = cfg.echo();
    config["ensemble_size"] = json!(CONVERSE_ENSEMBLE_SIZE);
    let mut report = LemmaReport::new("concavity", DEFAULT_SLACK, cfg.seed, config);
    let margins: Vec<Result<f64>> = (0..cfg.samples)
        .into_par_iter()
        .map(|i| {
            let (rho, ens, n) = converse_instance(cfg, SuiteName::Concavity, i)?;
            let (a, b) = concavity_step_check(&rho, &ens, n)?;
            Ok(a.margin().min(b.margin()))
        })
        .collect();
    for m in margins {
        report.record_margin(m?);
    }
    Ok(report)
}
