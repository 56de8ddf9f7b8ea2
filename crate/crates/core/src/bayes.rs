//! Posterior sampling under gamma priors on (a, b1, b2) and a beta prior on
//! θ, and Bayes estimates under general entropy loss.

use std::io::Write;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::data::BivariateSample;
use crate::distribution::{ln_one_minus_exp_neg, BgwParams};
use crate::error::{BgwError, Result};
use crate::mle::{fit_mle, FitOptions};
use crate::sampling::RngHandle;

/// Hyperparameters: Gamma(shape δ, rate ζ) on a, b1 and b2; Beta(δ4, ζ4) on θ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriorConfig {
    pub a: (f64, f64),
    pub b1: (f64, f64),
    pub b2: (f64, f64),
    pub theta: (f64, f64),
}

impl PriorConfig {
    /// From `[δ1, ζ1, δ2, ζ2, δ3, ζ3, δ4, ζ4]`.
    pub fn new(h: [f64; 8]) -> Result<Self> {
        if let Some(v) = h.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
            return Err(BgwError::InvalidParameter(format!(
                "prior hyperparameters must be > 0, got {v}"
            )));
        }
        Ok(Self {
            a: (h[0], h[1]),
            b1: (h[2], h[3]),
            b2: (h[4], h[5]),
            theta: (h[6], h[7]),
        })
    }

    /// Every hyperparameter equal to `v`.
    pub fn uniform(v: f64) -> Result<Self> {
        Self::new([v; 8])
    }

    /// Parse `"d1,z1,d2,z2,d3,z3,d4,z4"`.
    pub fn parse(s: &str) -> Result<Self> {
        let vals: Vec<f64> = s
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| BgwError::InvalidParameter(format!("cannot parse prior '{s}'")))?;
        let arr: [f64; 8] = vals.try_into().map_err(|_| {
            BgwError::InvalidParameter(format!("prior needs 8 comma-separated values, got '{s}'"))
        })?;
        Self::new(arr)
    }

    fn means(&self) -> [f64; 4] {
        [
            self.a.0 / self.a.1,
            self.b1.0 / self.b1.1,
            self.b2.0 / self.b2.1,
            self.theta.0 / (self.theta.0 + self.theta.1),
        ]
    }
}

fn ln_gamma_kernel(v: f64, (shape, rate): (f64, f64)) -> f64 {
    (shape - 1.0) * v.ln() - rate * v
}

fn ln_beta_kernel(t: f64, (d, z): (f64, f64)) -> f64 {
    let upper = if z == 1.0 { 0.0 } else { (z - 1.0) * (-t).ln_1p() };
    (d - 1.0) * t.ln() + upper
}

fn in_support(v: &[f64; 4]) -> bool {
    v[0] > 0.0 && v[1] > 0.0 && v[2] > 0.0 && v[3] > 0.0 && v[3] <= 1.0 && v.iter().all(|x| x.is_finite())
}

/// Sum over the data of the terms involving Z: −Z + (θ−2)ln(1−e^{−Z}) + ln(1−θe^{−Z}).
fn z_terms(v: &[f64; 4], data: &BivariateSample, include_linear: bool) -> f64 {
    let [a, b1, b2, t] = *v;
    let mut s = 0.0;
    for (x, y) in data.iter() {
        let z = b1 * x.powf(a) + b2 * y.powf(a);
        let lin = if include_linear { -z } else { 0.0 };
        s += lin + (t - 2.0) * ln_one_minus_exp_neg(z) + (-t * (-z).exp()).ln_1p();
    }
    s
}

/// Unnormalized log posterior at `(a, b1, b2, θ)`; −∞ outside the support.
pub fn log_posterior_kernel(v: [f64; 4], prior: &PriorConfig, data: &BivariateSample) -> f64 {
    if !in_support(&v) {
        return f64::NEG_INFINITY;
    }
    let p = BgwParams::from_array(v).expect("support checked");
    let ll = crate::mle::log_likelihood(&p, data);
    let r = ll
        + ln_gamma_kernel(v[0], prior.a)
        + ln_gamma_kernel(v[1], prior.b1)
        + ln_gamma_kernel(v[2], prior.b2)
        + ln_beta_kernel(v[3], prior.theta);
    if r.is_nan() {
        f64::NEG_INFINITY
    } else {
        r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Coordinate {
    A,
    B1,
    B2,
    Theta,
}

impl Coordinate {
    pub const ALL: [Coordinate; 4] = [Coordinate::A, Coordinate::B1, Coordinate::B2, Coordinate::Theta];

    fn index(self) -> usize {
        self as usize
    }
}

/// Log kernel of the full conditional of `which` at `value`, the other
/// coordinates taken from `rest`. Equal to [`log_posterior_kernel`] up to
/// terms that do not involve `which`.
pub fn log_full_conditional(
    which: Coordinate,
    value: f64,
    rest: [f64; 4],
    prior: &PriorConfig,
    data: &BivariateSample,
) -> f64 {
    let mut v = rest;
    v[which.index()] = value;
    if !in_support(&v) {
        return f64::NEG_INFINITY;
    }
    let n = data.len() as f64;
    let r = match which {
        Coordinate::A => {
            let (d, z) = prior.a;
            let logs: f64 = data.iter().map(|(x, y)| x.ln() + y.ln()).sum();
            (2.0 * n + d - 1.0) * value.ln() - z * value + (value - 1.0) * logs + z_terms(&v, data, true)
        }
        Coordinate::B1 => {
            let (d, z) = prior.b1;
            (n + d - 1.0) * value.ln() - z * value + z_terms(&v, data, true)
        }
        Coordinate::B2 => {
            let (d, z) = prior.b2;
            (n + d - 1.0) * value.ln() - z * value + z_terms(&v, data, true)
        }
        Coordinate::Theta => {
            let (d, z) = prior.theta;
            let upper = if z == 1.0 { 0.0 } else { (z - 1.0) * (-value).ln_1p() };
            (n + d - 1.0) * value.ln() + upper + z_terms(&v, data, false)
        }
    };
    if r.is_nan() {
        f64::NEG_INFINITY
    } else {
        r
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct McmcOptions {
    /// Total iterations recorded, burn-in included.
    pub iterations: usize,
    pub burn_in: usize,
    /// Random-walk standard deviations in (ln a, ln b1, ln b2, logit θ).
    pub proposal_scales: [f64; 4],
    /// Adapt the scales toward ~35% acceptance during burn-in.
    pub tune: bool,
    pub seed: u64,
    /// Starting point; defaults to the MLE, or the prior means if that fails.
    pub init: Option<BgwParams>,
}

impl Default for McmcOptions {
    fn default() -> Self {
        Self {
            iterations: 10_000,
            burn_in: 2_000,
            proposal_scales: [0.1; 4],
            tune: true,
            seed: 1,
            init: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Chain {
    pub a: Vec<f64>,
    pub b1: Vec<f64>,
    pub b2: Vec<f64>,
    pub theta: Vec<f64>,
    pub burn_in: usize,
    /// Post-burn-in acceptance rate per coordinate.
    pub acceptance_rates: [f64; 4],
    pub final_scales: [f64; 4],
    pub seed: u64,
    /// Set when some acceptance rate falls outside (0.1, 0.6).
    pub warning: Option<String>,
}

impl Chain {
    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn trace(&self, which: Coordinate) -> &[f64] {
        match which {
            Coordinate::A => &self.a,
            Coordinate::B1 => &self.b1,
            Coordinate::B2 => &self.b2,
            Coordinate::Theta => &self.theta,
        }
    }

    /// Header `iter,a,b1,b2,theta`, one row per iteration.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["iter", "a", "b1", "b2", "theta"])?;
        for i in 0..self.len() {
            w.write_record(&[
                (i + 1).to_string(),
                self.a[i].to_string(),
                self.b1[i].to_string(),
                self.b2[i].to_string(),
                self.theta[i].to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn to_unconstrained(v: f64, which: Coordinate) -> f64 {
    match which {
        Coordinate::Theta => {
            let t = v.clamp(1e-12, 1.0 - 1e-12);
            (t / (1.0 - t)).ln()
        }
        _ => v.ln(),
    }
}

fn from_unconstrained(u: f64, which: Coordinate) -> f64 {
    match which {
        Coordinate::Theta => 1.0 / (1.0 + (-u).exp()),
        _ => u.exp(),
    }
}

/// ln |d value / d u|.
fn ln_jacobian(v: f64, which: Coordinate) -> f64 {
    match which {
        Coordinate::Theta => v.ln() + (-v).ln_1p(),
        _ => v.ln(),
    }
}

const TUNE_BATCH: usize = 50;
const TARGET_ACCEPTANCE: f64 = 0.35;

/// Metropolis-within-Gibbs: each iteration updates the four coordinates in
/// turn with a Gaussian random walk in (ln a, ln b1, ln b2, logit θ).
pub fn run_mcmc(data: &BivariateSample, prior: &PriorConfig, opts: &McmcOptions) -> Result<Chain> {
    if opts.burn_in >= opts.iterations {
        return Err(BgwError::InvalidParameter(format!(
            "burn-in ({}) must be smaller than the number of iterations ({})",
            opts.burn_in, opts.iterations
        )));
    }
    if let Some(s) = opts.proposal_scales.iter().find(|s| !(**s > 0.0 && s.is_finite())) {
        return Err(BgwError::InvalidParameter(format!("proposal scales must be > 0, got {s}")));
    }
    let init = match opts.init {
        Some(p) => p,
        None => fit_mle(data, None, &FitOptions { seed: opts.seed, ..Default::default() })
            .map(|f| f.params)
            .or_else(|_| BgwParams::from_array(prior.means()))?,
    };
    let mut state = init.to_array();
    // The chain moves on the open interval; nudge a boundary start inside.
    state[3] = state[3].min(1.0 - 1e-9);
    if !log_posterior_kernel(state, prior, data).is_finite() {
        return Err(BgwError::Numerical("posterior is zero at the starting point".into()));
    }

    let mut rng = RngHandle::new(opts.seed);
    let mut scales = opts.proposal_scales;
    let t_total = opts.iterations;
    let mut traces: [Vec<f64>; 4] = std::array::from_fn(|_| Vec::with_capacity(t_total));
    let mut batch_accepts = [0usize; 4];
    let mut post_accepts = [0usize; 4];

    let mut current: [f64; 4] = std::array::from_fn(|k| {
        let c = Coordinate::ALL[k];
        log_full_conditional(c, state[k], state, prior, data) + ln_jacobian(state[k], c)
    });

    for it in 0..t_total {
        for (k, &which) in Coordinate::ALL.iter().enumerate() {
            // Other coordinates may have moved since this one was last
            // evaluated, so refresh its conditional at the current state.
            current[k] = log_full_conditional(which, state[k], state, prior, data) + ln_jacobian(state[k], which);
            let u = to_unconstrained(state[k], which);
            let step: f64 = rng.sample(StandardNormal);
            let proposal = from_unconstrained(u + scales[k] * step, which);
            let cand = log_full_conditional(which, proposal, state, prior, data);
            let cand = if cand.is_finite() { cand + ln_jacobian(proposal, which) } else { f64::NEG_INFINITY };
            let accept = cand.is_finite() && rng.random::<f64>().ln() < cand - current[k];
            if accept {
                state[k] = proposal;
                current[k] = cand;
                if it < opts.burn_in {
                    batch_accepts[k] += 1;
                } else {
                    post_accepts[k] += 1;
                }
            }
            traces[k].push(state[k]);
        }
        if opts.tune && it < opts.burn_in && (it + 1) % TUNE_BATCH == 0 {
            for k in 0..4 {
                let rate = batch_accepts[k] as f64 / TUNE_BATCH as f64;
                scales[k] *= (2.0 * (rate - TARGET_ACCEPTANCE)).exp();
                batch_accepts[k] = 0;
            }
        }
    }

    let kept = (t_total - opts.burn_in) as f64;
    let acceptance_rates: [f64; 4] = std::array::from_fn(|k| post_accepts[k] as f64 / kept);
    let warning = acceptance_rates
        .iter()
        .zip(["a", "b1", "b2", "theta"])
        .filter(|(r, _)| !(**r > 0.1 && **r < 0.6))
        .map(|(r, name)| format!("{name}: acceptance {r:.3} outside (0.1, 0.6)"))
        .reduce(|a, b| format!("{a}; {b}"));
    let [a, b1, b2, theta] = traces;
    Ok(Chain {
        a,
        b1,
        b2,
        theta,
        burn_in: opts.burn_in,
        acceptance_rates,
        final_scales: scales,
        seed: opts.seed,
        warning,
    })
}

/// [mean(v^{−c})]^{−1/c}, computed in log space.
fn general_entropy(draws: &[f64], c: f64) -> f64 {
    let logs: Vec<f64> = draws.iter().map(|v| -c * v.ln()).collect();
    let m = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mean = logs.iter().map(|l| (l - m).exp()).sum::<f64>() / draws.len() as f64;
    ((m + mean.ln()) / -c).exp()
}

/// Bayes estimate under general entropy loss with parameter `c`, from the
/// post-burn-in draws.
pub fn ge_estimate(chain: &Chain, c: f64) -> Result<[f64; 4]> {
    if c == 0.0 || !c.is_finite() {
        return Err(BgwError::InvalidParameter(format!("loss parameter c must be finite and non-zero, got {c}")));
    }
    if chain.burn_in >= chain.len() {
        return Err(BgwError::InvalidParameter("chain has no post-burn-in draws".into()));
    }
    Ok(std::array::from_fn(|k| {
        general_entropy(&chain.trace(Coordinate::ALL[k])[chain.burn_in..], c)
    }))
}

/// [`ge_estimate`] as parameters.
pub fn ge_estimate_params(chain: &Chain, c: f64) -> Result<BgwParams> {
    let mut v = ge_estimate(chain, c)?;
    v[3] = v[3].min(1.0);
    BgwParams::from_array(v)
}
