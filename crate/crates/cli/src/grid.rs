//! Parsers for the compact range syntaxes accepted on the command line.

use serde::{Deserialize, Serialize};

use crate::{CliError, CliResult};

/// `n` evenly spaced points from `start` to `end`, both included.
pub fn linspace(start: f64, end: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let step = (end - start) / (n - 1) as f64;
            (0..n)
                .map(|i| if i + 1 == n { end } else { start + step * i as f64 })
                .collect()
        }
    }
}

fn number(s: &str, what: &str) -> CliResult<f64> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| CliError::config(format!("{what}: {s:?} is not a number")))?;
    if !v.is_finite() {
        return Err(CliError::config(format!("{what}: {s:?} is not finite")));
    }
    Ok(v)
}

/// `a:b:n` (inclusive linspace) or a comma-separated list.
pub fn parse_grid(s: &str) -> CliResult<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [a, b, n] => {
            let n: usize = n
                .trim()
                .parse()
                .map_err(|_| CliError::config(format!("grid {s:?}: point count {n:?} is not an integer")))?;
            if n == 0 {
                return Err(CliError::config(format!("grid {s:?} has no points")));
            }
            Ok(linspace(number(a, "grid start")?, number(b, "grid end")?, n))
        }
        [_] => s
            .split(',')
            .filter(|t| !t.trim().is_empty())
            .map(|t| number(t, "grid value"))
            .collect(),
        _ => Err(CliError::config(format!("grid {s:?}: expected `start:end:count` or a comma list"))),
    }
}

/// Infection rates, either absolute or as multiples of the estimated
/// epidemic threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", content = "values", rename_all = "lowercase")]
pub enum BetaSpec {
    Absolute(Vec<f64>),
    Relative(Vec<f64>),
}

impl BetaSpec {
    /// Accepts `0.05`, `0.01,0.02`, `0.01:0.1:10`, `rel:1.0`, `rel:0.5,1,2`
    /// and `rel:0.5..2.0:7`.
    pub fn parse(s: &str) -> CliResult<Self> {
        match s.strip_prefix("rel:") {
            Some(rest) => {
                if let Some((range, n)) = rest.rsplit_once(':') {
                    let (a, b) = range
                        .split_once("..")
                        .ok_or_else(|| CliError::config(format!("β spec {s:?}: expected rel:start..end:count")))?;
                    Ok(BetaSpec::Relative(parse_grid(&format!("{a}:{b}:{n}"))?))
                } else {
                    Ok(BetaSpec::Relative(parse_grid(rest)?))
                }
            }
            None => Ok(BetaSpec::Absolute(parse_grid(s)?)),
        }
    }

    pub fn values(&self) -> &[f64] {
        match self {
            BetaSpec::Absolute(v) | BetaSpec::Relative(v) => v,
        }
    }

    pub fn is_relative(&self) -> bool {
        matches!(self, BetaSpec::Relative(_))
    }
}

impl std::fmt::Display for BetaSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let list: Vec<String> = self.values().iter().map(f64::to_string).collect();
        if self.is_relative() {
            write!(f, "rel:")?;
        }
        f.write_str(&list.join(","))
    }
}

/// `a..b` (inclusive), `a..=b`, a single seed, or a comma list.
pub fn parse_seeds(s: &str) -> CliResult<Vec<u64>> {
    let int = |t: &str| {
        t.trim()
            .parse::<u64>()
            .map_err(|_| CliError::config(format!("seed {t:?} is not a nonnegative integer")))
    };
    if let Some((a, b)) = s.split_once("..") {
        let (a, b) = (int(a)?, int(b.trim_start_matches('='))?);
        if b < a {
            return Err(CliError::config(format!("seed range {s:?} is empty")));
        }
        return Ok((a..=b).collect());
    }
    let seeds: Vec<u64> = s.split(',').filter(|t| !t.trim().is_empty()).map(int).collect::<CliResult<_>>()?;
    if seeds.is_empty() {
        return Err(CliError::config("no seeds given"));
    }
    Ok(seeds)
}

/// Comma-separated names, lowercased and trimmed.
pub fn parse_names(s: &str) -> Vec<String> {
    s.split(',')
        .map(|t| t.trim().to_ascii_lowercase())
        .filter(|t| !t.is_empty())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linspace_hits_both_ends() {
        let g = parse_grid("0.001:0.2:40").unwrap();
        assert_eq!(g.len(), 40);
        assert_eq!(g[0], 0.001);
        assert_eq!(g[39], 0.2);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn lists_and_singletons() {
        assert_eq!(parse_grid("0.1,0.2").unwrap(), vec![0.1, 0.2]);
        assert_eq!(parse_grid("0.3").unwrap(), vec![0.3]);
        assert!(parse_grid("a:b:c").is_err());
        assert!(parse_grid("1:2").is_err());
        assert!(parse_grid("0:1:0").is_err());
    }

    #[test]
    fn relative_beta() {
        assert_eq!(BetaSpec::parse("rel:1.0").unwrap(), BetaSpec::Relative(vec![1.0]));
        let r = BetaSpec::parse("rel:0.5..2.0:7").unwrap();
        assert!(r.is_relative());
        assert_eq!(r.values(), &[0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0]);
        assert_eq!(BetaSpec::parse("0.02,0.04").unwrap(), BetaSpec::Absolute(vec![0.02, 0.04]));
        assert!(BetaSpec::parse("rel:0.5-2:7").is_err());
    }

    #[test]
    fn seed_ranges_are_inclusive() {
        assert_eq!(parse_seeds("0..9").unwrap(), (0..10).collect::<Vec<_>>());
        assert_eq!(parse_seeds("2..=4").unwrap(), vec![2, 3, 4]);
        assert_eq!(parse_seeds("7").unwrap(), vec![7]);
        assert_eq!(parse_seeds("1,5").unwrap(), vec![1, 5]);
        assert!(parse_seeds("5..1").is_err());
        assert!(parse_seeds("-1").is_err());
    }
}
