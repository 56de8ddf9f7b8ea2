//! Experiment configuration files: JSON, or one `key = value` per line.

use bgw::bayes::PriorConfig;
use bgw::harness::{Estimator, ExperimentConfig};
use bgw::{BgwError, BgwParams, Result};

pub const DEFAULT_REPLICATIONS: usize = 200;

/// Parse a config file body. Text whose first non-blank character is `{`
/// is read as JSON.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    if text.trim_start().starts_with('{') {
        return serde_json::from_str(text).map_err(|e| BgwError::Data(format!("config JSON: {e}")));
    }
    parse_key_values(text)
}

/// Recognised keys: `params` (a,b1,b2,theta), `sizes`, `reps`, `seed`,
/// `estimator` (`mle` or `bayes`), and for Bayes `prior`, `c`, `iters`, `burnin`.
/// `#` starts a comment.
pub fn parse_key_values(text: &str) -> Result<ExperimentConfig> {
    let mut params = None;
    let mut sizes = None;
    let mut reps = DEFAULT_REPLICATIONS;
    let mut seed = 2024;
    let mut estimator = "mle".to_string();
    let mut prior = PriorConfig::uniform(1.5)?;
    let mut c = 0.5;
    let mut iters = 10_000;
    let mut burnin = 2_000;

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| BgwError::Data(format!("config line {}: expected key = value", lineno + 1)))?;
        let (key, value) = (key.trim(), value.trim());
        let bad = |what: &str| BgwError::Data(format!("config line {}: cannot parse {key} as {what}", lineno + 1));
        match key {
            "params" => params = Some(BgwParams::parse(value)?),
            "sizes" => {
                sizes = Some(
                    value
                        .split(',')
                        .map(|s| s.trim().parse::<usize>())
                        .collect::<std::result::Result<Vec<_>, _>>()
                        .map_err(|_| bad("a list of sample sizes"))?,
                )
            }
            "reps" => reps = value.parse().map_err(|_| bad("an integer"))?,
            "seed" => seed = value.parse().map_err(|_| bad("an integer"))?,
            "estimator" => estimator = value.to_ascii_lowercase(),
            "prior" => prior = PriorConfig::parse(value)?,
            "c" => c = value.parse().map_err(|_| bad("a number"))?,
            "iters" => iters = value.parse().map_err(|_| bad("an integer"))?,
            "burnin" => burnin = value.parse().map_err(|_| bad("an integer"))?,
            other => return Err(BgwError::Data(format!("config line {}: unknown key '{other}'", lineno + 1))),
        }
    }

    let estimator = match estimator.as_str() {
        "mle" => Estimator::Mle,
        "bayes" => Estimator::Bayes { prior, c, iterations: iters, burn_in: burnin },
        other => return Err(BgwError::Data(format!("unknown estimator '{other}'"))),
    };
    Ok(ExperimentConfig {
        true_params: params.ok_or_else(|| BgwError::Data("config lacks 'params'".into()))?,
        sample_sizes: sizes.unwrap_or_else(|| vec![10, 20, 30, 40]),
        replications: reps,
        estimator,
        master_seed: seed,
    })
}
