use std::path::Path;

use crate::error::{Error, Result};
use crate::matcore::{read_matrix_file, random_density, DensityMatrix, Seed};

/// A `--state` value: `plus-i`, `maximally-mixed(d)`, `diag(p,…)`, `random(d,seed)`
/// or a path to a matrix JSON file.
pub fn parse_state(spec: &str) -> Result<DensityMatrix> {
    let spec = spec.trim();
    if spec == "plus-i" {
        return Ok(DensityMatrix::plus_i());
    }
    if let Some(args) = call_args(spec, "maximally-mixed") {
        let [d] = parse_ints::<1>(args, "maximally-mixed")?;
        if d == 0 {
            return Err(Error::Config("maximally-mixed needs d ≥ 1".into()));
        }
        return Ok(DensityMatrix::maximally_mixed(d as usize));
    }
    if let Some(args) = call_args(spec, "diag") {
        let probs = args
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Config(format!("diag(...) entries: {e}")))?;
        return DensityMatrix::diagonal(&probs);
    }
    if let Some(args) = call_args(spec, "random") {
        let [d, seed] = parse_ints::<2>(args, "random")?;
        if d == 0 {
            return Err(Error::Config("random needs d ≥ 1".into()));
        }
        return Ok(random_density(d as usize, Seed::new(seed)));
    }
    let path = Path::new(spec);
    if spec.ends_with(".json") || path.exists() {
        let m = read_matrix_file(path)?;
        return DensityMatrix::new(m);
    }
    Err(Error::Config(format!(
        "unknown state `{spec}` (expected plus-i, maximally-mixed(d), diag(p,…), random(d,seed) or a .json file)"
    )))
}

/// Label safe for a CSV cell.
pub fn state_label(spec: &str) -> String {
    spec.trim().replace(',', ";")
}

fn call_args<'a>(spec: &'a str, name: &str) -> Option<&'a str> {
    spec.strip_prefix(name)?.strip_prefix('(')?.strip_suffix(')')
}

fn parse_ints<const K: usize>(args: &str, name: &str) -> Result<[u64; K]> {
    let parts: Vec<&str> = args.split(',').map(str::trim).collect();
    if parts.len() != K {
        return Err(Error::Config(format!("{name}(...) takes {K} integer argument(s), got `{args}`")));
    }
    let mut out = [0u64; K];
    for (slot, p) in out.iter_mut().zip(parts) {
        *slot = p
            .parse()
            .map_err(|_| Error::Config(format!("{name}(...): `{p}` is not a non-negative integer")))?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins() {
        assert_eq!(parse_state("plus-i").unwrap(), DensityMatrix::plus_i());
        assert_eq!(parse_state("maximally-mixed(3)").unwrap().dim(), 3);
        assert_eq!(parse_state("diag(0.75, 0.25)").unwrap().eigenvalues(), vec![0.75, 0.25]);
        assert_eq!(parse_state("random(4,9)").unwrap(), random_density(4, Seed::new(9)));
        assert_eq!(state_label("diag(0.5,0.5)"), "diag(0.5;0.5)");
    }

    #[test]
    fn rejects() {
        assert!(matches!(parse_state("diag(0.5,0.6)"), Err(Error::InvalidState(_))));
        assert!(matches!(parse_state("random(2)"), Err(Error::Config(_))));
        assert!(matches!(parse_state("nonsense"), Err(Error::Config(_))));
        assert!(matches!(parse_state("/no/such/file.json"), Err(Error::Config(_))));
    }
}
