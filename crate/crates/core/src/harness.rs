//! Monte Carlo bias/MSE experiments and the real-data analysis pipeline.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bayes::{ge_estimate, run_mcmc, McmcOptions, PriorConfig};
use crate::data::BivariateSample;
use crate::distribution::BgwParams;
use crate::error::{BgwError, Result};
use crate::mle::{fit_ew, fit_mle, ks_test_ew, lr_test, EwFit, FitOptions, FitResult, KsTest, LrTest};
use crate::sampling::{sample_n, RngHandle};
use crate::stats::{describe, sample_dependence, Descriptives, SampleDependence};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Estimator {
    Mle,
    Bayes {
        prior: PriorConfig,
        c: f64,
        iterations: usize,
        burn_in: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub true_params: BgwParams,
    pub sample_sizes: Vec<usize>,
    pub replications: usize,
    pub estimator: Estimator,
    pub master_seed: u64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(BgwError::InvalidParameter("replications must be >= 1".into()));
        }
        if self.sample_sizes.is_empty() {
            return Err(BgwError::InvalidParameter("no sample sizes given".into()));
        }
        if let Some(n) = self.sample_sizes.iter().find(|n| **n < 5) {
            return Err(BgwError::InvalidParameter(format!("sample sizes must be >= 5, got {n}")));
        }
        if let Estimator::Bayes { c, iterations, burn_in, .. } = &self.estimator {
            if *c == 0.0 {
                return Err(BgwError::InvalidParameter("loss parameter c must be non-zero".into()));
            }
            if burn_in >= iterations {
                return Err(BgwError::InvalidParameter("burn-in must be below the iteration count".into()));
            }
        }
        Ok(())
    }
}

/// Bias and MSE of the four estimates at one sample size, over the
/// replications whose fit succeeded.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BiasMseRow {
    pub n: usize,
    pub bias: [f64; 4],
    pub mse: [f64; 4],
    pub succeeded: usize,
    pub failed: usize,
}

/// Worker count: `BGW_THREADS` if set to a positive integer, else rayon's default.
pub fn worker_count() -> Option<usize> {
    std::env::var("BGW_THREADS").ok()?.trim().parse().ok().filter(|n: &usize| *n > 0)
}

fn estimate_once(cfg: &ExperimentConfig, n: usize, mut rng: RngHandle) -> Option<[f64; 4]> {
    let data = sample_n(&cfg.true_params, n, &mut rng).ok()?;
    let fit_seed = rand::RngCore::next_u64(&mut rng);
    match &cfg.estimator {
        Estimator::Mle => {
            let fit = fit_mle(&data, None, &FitOptions { seed: fit_seed, ..Default::default() }).ok()?;
            fit.converged.then(|| fit.params.to_array())
        }
        Estimator::Bayes { prior, c, iterations, burn_in } => {
            let opts = McmcOptions {
                iterations: *iterations,
                burn_in: *burn_in,
                seed: fit_seed,
                ..Default::default()
            };
            let chain = run_mcmc(&data, prior, &opts).ok()?;
            ge_estimate(&chain, *c).ok()
        }
    }
}

fn summarize(n: usize, truth: [f64; 4], estimates: &[Option<[f64; 4]>]) -> BiasMseRow {
    let ok: Vec<[f64; 4]> = estimates.iter().flatten().copied().collect();
    let k = ok.len() as f64;
    let mut bias = [f64::NAN; 4];
    let mut mse = [f64::NAN; 4];
    if !ok.is_empty() {
        for j in 0..4 {
            bias[j] = ok.iter().map(|e| e[j] - truth[j]).sum::<f64>() / k;
            mse[j] = ok.iter().map(|e| (e[j] - truth[j]).powi(2)).sum::<f64>() / k;
        }
    }
    BiasMseRow {
        n,
        bias,
        mse,
        succeeded: ok.len(),
        failed: estimates.len() - ok.len(),
    }
}

/// Run every (sample size, replication) cell. Replication `r` at the
/// `i`-th sample size uses substream `i·2^32 + r` of the master seed, so
/// results do not depend on the number of workers.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<BiasMseRow>> {
    cfg.validate()?;
    let master = RngHandle::new(cfg.master_seed);
    let work = || -> Vec<BiasMseRow> {
        cfg.sample_sizes
            .iter()
            .enumerate()
            .map(|(i, &n)| {
                let estimates: Vec<Option<[f64; 4]>> = (0..cfg.replications as u64)
                    .into_par_iter()
                    .map(|r| estimate_once(cfg, n, master.substream(((i as u64) << 32) | r)))
                    .collect();
                summarize(n, cfg.true_params.to_array(), &estimates)
            })
            .collect()
    };
    match worker_count() {
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| BgwError::Numerical(format!("cannot start worker pool: {e}")))?;
            Ok(pool.install(work))
        }
        None => Ok(work()),
    }
}

pub fn write_rows_csv<W: Write>(rows: &[BiasMseRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "n", "bias_a", "bias_b1", "bias_b2", "bias_theta", "mse_a", "mse_b1", "mse_b2", "mse_theta", "succeeded",
        "failed",
    ])?;
    for r in rows {
        let mut rec = vec![r.n.to_string()];
        rec.extend(r.bias.iter().chain(&r.mse).map(|v| v.to_string()));
        rec.push(r.succeeded.to_string());
        rec.push(r.failed.to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarginalFit {
    pub fit: EwFit,
    pub ks: KsTest,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelFit {
    pub model: String,
    pub a: f64,
    pub b1: f64,
    pub b2: f64,
    pub theta: f64,
    pub loglik: f64,
    pub aic: f64,
    pub bic: f64,
    pub converged: bool,
}

impl ModelFit {
    fn from_fit(model: &str, f: &FitResult) -> Self {
        Self {
            model: model.to_string(),
            a: f.params.a(),
            b1: f.params.b1(),
            b2: f.params.b2(),
            theta: f.params.theta(),
            loglik: f.log_lik,
            aic: f.aic,
            bic: f.bic,
            converged: f.converged,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RealDataReport {
    pub n: usize,
    /// Factor applied to the data before any model fit.
    pub scale: f64,
    pub descriptives_x: Descriptives,
    pub descriptives_y: Descriptives,
    pub dependence: SampleDependence,
    pub marginal_x: MarginalFit,
    pub marginal_y: MarginalFit,
    pub models: Vec<ModelFit>,
    pub lrt_bge_vs_bgw: LrTest,
    pub lrt_bgr_vs_bgw: LrTest,
}

/// Descriptives and sample dependence on the raw data; EW marginal fits,
/// BGW / BGE / BGR fits and likelihood-ratio tests on the data times `scale`.
pub fn real_data_pipeline(raw: &BivariateSample, scale: f64, seed: u64) -> Result<RealDataReport> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(BgwError::InvalidParameter(format!("scale must be > 0, got {scale}")));
    }
    let data = raw.scaled(scale)?;
    let marginal = |v: Vec<f64>| -> Result<MarginalFit> {
        let fit = fit_ew(&v)?;
        let ks = ks_test_ew(&v, &fit.params)?;
        Ok(MarginalFit { fit, ks })
    };
    let opts = |fix_a| FitOptions { fix_a, seed, ..Default::default() };
    let bgw = fit_mle(&data, None, &opts(None))?;
    let bge = fit_mle(&data, None, &opts(Some(1.0)))?;
    let bgr = fit_mle(&data, None, &opts(Some(2.0)))?;
    Ok(RealDataReport {
        n: raw.len(),
        scale,
        descriptives_x: describe(&raw.xs())?,
        descriptives_y: describe(&raw.ys())?,
        dependence: sample_dependence(raw)?,
        marginal_x: marginal(data.xs())?,
        marginal_y: marginal(data.ys())?,
        lrt_bge_vs_bgw: lr_test(&bgw, &bge, 1)?,
        lrt_bgr_vs_bgw: lr_test(&bgw, &bgr, 1)?,
        models: vec![
            ModelFit::from_fit("BGW", &bgw),
            ModelFit::from_fit("BGE", &bge),
            ModelFit::from_fit("BGR", &bgr),
        ],
    })
}

pub fn real_data_pipeline_path<P: AsRef<Path>>(path: P, scale: f64, seed: u64) -> Result<RealDataReport> {
    real_data_pipeline(&BivariateSample::from_csv_path(path)?, scale, seed)
}
