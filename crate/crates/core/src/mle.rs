//! Maximum-likelihood estimation, information criteria, likelihood-ratio
//! tests and Kolmogorov–Smirnov checks of the EW marginals.

use rand_distr::{Distribution, Normal};
use serde::Serialize;

use crate::data::BivariateSample;
use crate::distribution::{ln_one_minus_exp_neg, BgwParams, EwParams};
use crate::error::{BgwError, Result};
use crate::optim::{bfgs, invert, nelder_mead, BfgsOptions, NelderMeadOptions};
use crate::sampling::RngHandle;
use crate::special::{chi_square_sf, kolmogorov_sf};

/// Lower end of the θ range searched by the optimizer.
pub const THETA_FLOOR: f64 = 1e-6;

/// Σ ln f(xᵢ, yᵢ). Returns −∞ when some density term underflows.
pub fn log_likelihood(p: &BgwParams, data: &BivariateSample) -> f64 {
    let mut ll = 0.0;
    for (x, y) in data.iter() {
        let v = p.ln_pdf_unchecked(x, y);
        if !v.is_finite() {
            return f64::NEG_INFINITY;
        }
        ll += v;
    }
    ll
}

/// Analytic gradient of [`log_likelihood`] in (a, b1, b2, θ).
pub fn score(p: &BgwParams, data: &BivariateSample) -> [f64; 4] {
    let (a, b1, b2, t) = (p.a(), p.b1(), p.b2(), p.theta());
    let mut g = [0.0; 4];
    for (x, y) in data.iter() {
        let (lx, ly) = (x.ln(), y.ln());
        let (xa, ya) = (x.powf(a), y.powf(a));
        let z = b1 * xa + b2 * ya;
        let e = (-z).exp();
        let e_over_1me = 1.0 / z.exp_m1();
        let e_over_1mte = e / (1.0 - t * e);
        let dz = -1.0 + (t - 2.0) * e_over_1me + t * e_over_1mte;
        g[0] += 2.0 / a + lx + ly + dz * (b1 * xa * lx + b2 * ya * ly);
        g[1] += 1.0 / b1 + dz * xa;
        g[2] += 1.0 / b2 + dz * ya;
        g[3] += 1.0 / t + ln_one_minus_exp_neg(z) - e_over_1mte;
    }
    g
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitOptions {
    /// Hold the shape at this value (1 for the exponential sub-model,
    /// 2 for the Rayleigh one).
    pub fix_a: Option<f64>,
    pub starts: usize,
    pub seed: u64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            fix_a: None,
            starts: 5,
            seed: 20_240_601,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub params: BgwParams,
    pub log_lik: f64,
    pub aic: f64,
    pub bic: f64,
    pub n_iter: usize,
    pub converged: bool,
    /// Norm of the log-likelihood gradient in the optimizer's coordinates.
    pub gradient_norm: f64,
    pub free_params: usize,
    /// θ ended within 1e-6 of 1 (independence).
    pub theta_at_boundary: bool,
}

/// Maps unconstrained coordinates to parameters: log for the shape and
/// rates, a scaled logistic for θ onto (THETA_FLOOR, 1).
#[derive(Debug, Clone, Copy)]
struct Coords {
    fixed_a: Option<f64>,
}

fn logistic(u: f64) -> f64 {
    1.0 / (1.0 + (-u).exp())
}

impl Coords {
    fn dim(&self) -> usize {
        if self.fixed_a.is_some() {
            3
        } else {
            4
        }
    }

    fn decode(&self, u: &[f64]) -> Option<BgwParams> {
        let (a, rest) = match self.fixed_a {
            Some(a) => (a, u),
            None => (u[0].exp(), &u[1..]),
        };
        let theta = THETA_FLOOR + (1.0 - THETA_FLOOR) * logistic(rest[2]);
        BgwParams::new(a, rest[0].exp(), rest[1].exp(), theta).ok()
    }

    fn encode(&self, p: &BgwParams) -> Vec<f64> {
        let s = ((p.theta() - THETA_FLOOR) / (1.0 - THETA_FLOOR)).clamp(1e-12, 1.0 - 1e-9);
        let mut u = Vec::with_capacity(4);
        if self.fixed_a.is_none() {
            u.push(p.a().ln());
        }
        u.extend([p.b1().ln(), p.b2().ln(), (s / (1.0 - s)).ln()]);
        u
    }

    /// Chain rule from the natural-parameter score.
    fn gradient(&self, p: &BgwParams, g: &[f64; 4], u: &[f64]) -> Vec<f64> {
        let s = logistic(u[u.len() - 1]);
        let dtheta = (1.0 - THETA_FLOOR) * s * (1.0 - s);
        let mut out = Vec::with_capacity(4);
        if self.fixed_a.is_none() {
            out.push(p.a() * g[0]);
        }
        out.extend([p.b1() * g[1], p.b2() * g[2], dtheta * g[3]]);
        out
    }
}

fn validate_for_fit(data: &BivariateSample) -> Result<()> {
    if data.len() < 5 {
        return Err(BgwError::Data(format!(
            "at least 5 pairs are needed to fit 4 parameters, got {}",
            data.len()
        )));
    }
    let all_same = |v: Vec<f64>| v.iter().all(|&t| t == v[0]);
    if all_same(data.xs()) || all_same(data.ys()) {
        return Err(BgwError::Data("degenerate data: a coordinate takes a single value".into()));
    }
    Ok(())
}

fn sd(v: &[f64]) -> f64 {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / v.len() as f64).sqrt()
}

/// Rates matching the mean of t^a in each coordinate.
fn rates_for_shape(data: &BivariateSample, a: f64) -> (f64, f64) {
    let n = data.len() as f64;
    let mx = data.iter().map(|(x, _)| x.powf(a)).sum::<f64>() / n;
    let my = data.iter().map(|(_, y)| y.powf(a)).sum::<f64>() / n;
    (1.0 / mx, 1.0 / my)
}

/// Weibull-style starting point: shape from the spread of log data.
pub fn heuristic_start(data: &BivariateSample, fix_a: Option<f64>) -> Result<BgwParams> {
    let a = match fix_a {
        Some(a) => a,
        None => {
            let lx: Vec<f64> = data.xs().iter().map(|v| v.ln()).collect();
            let ly: Vec<f64> = data.ys().iter().map(|v| v.ln()).collect();
            let spread = 0.5 * (sd(&lx) + sd(&ly));
            (std::f64::consts::PI / (6f64.sqrt() * spread)).clamp(0.05, 50.0)
        }
    };
    let (b1, b2) = rates_for_shape(data, a);
    BgwParams::new(a, b1, b2, 0.5)
}

fn fit_from(data: &BivariateSample, start: &BgwParams, coords: Coords) -> Option<(BgwParams, f64, usize, bool, f64)> {
    let n = data.len() as f64;
    let objective = |u: &[f64]| match coords.decode(u) {
        Some(p) => -log_likelihood(&p, data) / n,
        None => f64::INFINITY,
    };
    let u0 = coords.encode(start);
    let nm = nelder_mead(objective, &u0, &NelderMeadOptions::default());
    let fg = |u: &[f64]| match coords.decode(u) {
        Some(p) => {
            let ll = log_likelihood(&p, data);
            let g = coords.gradient(&p, &score(&p, data), u);
            (-ll / n, g.iter().map(|v| -v / n).collect())
        }
        None => (f64::INFINITY, vec![0.0; u.len()]),
    };
    let polished = bfgs(fg, &nm.x, &BfgsOptions::default());
    let best = if polished.fx <= nm.fx { &polished } else { &nm };
    let p = coords.decode(&best.x)?;
    let ll = log_likelihood(&p, data);
    if !ll.is_finite() {
        return None;
    }
    let gnorm = coords
        .gradient(&p, &score(&p, data), &best.x)
        .iter()
        .map(|v| v * v)
        .sum::<f64>()
        .sqrt();
    Some((p, ll, nm.iterations + polished.iterations, nm.converged || polished.converged, gnorm))
}

/// Multistart maximum-likelihood fit.
///
/// Each start runs Nelder–Mead in unconstrained coordinates followed by a
/// BFGS polish with the analytic score. The first start is `init` (or the
/// heuristic start); the others jitter its shape and θ.
pub fn fit_mle(data: &BivariateSample, init: Option<BgwParams>, opts: &FitOptions) -> Result<FitResult> {
    validate_for_fit(data)?;
    if let Some(a) = opts.fix_a {
        if !(a > 0.0 && a.is_finite()) {
            return Err(BgwError::InvalidParameter(format!("fixed shape must be > 0, got {a}")));
        }
    }
    let coords = Coords { fixed_a: opts.fix_a };
    let first = match init {
        Some(p) => {
            let a = opts.fix_a.unwrap_or(p.a());
            BgwParams::new(a, p.b1(), p.b2(), p.theta())?
        }
        None => heuristic_start(data, opts.fix_a)?,
    };
    let mut rng = RngHandle::new(opts.seed);
    let jitter = Normal::new(0.0, 0.5).expect("valid");
    let mut starts = vec![first];
    for k in 1..opts.starts.max(1) {
        let a = match opts.fix_a {
            Some(a) => a,
            None => first.a() * f64::exp(jitter.sample(&mut rng)),
        };
        let (b1, b2) = rates_for_shape(data, a);
        let theta = 0.05 + 0.9 * (k as f64 / opts.starts as f64);
        starts.push(BgwParams::new(a, b1, b2, theta)?);
    }

    let mut best: Option<(BgwParams, f64, usize, bool, f64)> = None;
    for s in &starts {
        if let Some(r) = fit_from(data, s, coords) {
            if best.as_ref().is_none_or(|b| r.1 > b.1) {
                best = Some(r);
            }
        }
    }
    let (params, log_lik, n_iter, opt_converged, gradient_norm) =
        best.ok_or_else(|| BgwError::Numerical("no start produced a finite likelihood".into()))?;
    let k = coords.dim();
    let n = data.len() as f64;
    Ok(FitResult {
        params,
        log_lik,
        aic: 2.0 * k as f64 - 2.0 * log_lik,
        bic: k as f64 * n.ln() - 2.0 * log_lik,
        n_iter,
        converged: opt_converged && gradient_norm < 1e-3,
        gradient_norm,
        free_params: k,
        theta_at_boundary: params.theta() > 1.0 - 1e-6,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LrTest {
    pub statistic: f64,
    pub df: u32,
    pub p_value: f64,
}

/// −2(LL_restricted − LL_full) against χ²(df).
pub fn lr_test(full: &FitResult, restricted: &FitResult, df: u32) -> Result<LrTest> {
    if df == 0 {
        return Err(BgwError::InvalidParameter("degrees of freedom must be >= 1".into()));
    }
    let statistic = -2.0 * (restricted.log_lik - full.log_lik);
    if statistic < 0.0 {
        return Err(BgwError::Numerical(format!(
            "negative likelihood-ratio statistic {statistic}: the full fit is worse than the restricted one"
        )));
    }
    Ok(LrTest {
        statistic,
        df,
        p_value: chi_square_sf(statistic, df),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KsTest {
    pub distance: f64,
    pub p_value: f64,
}

/// One-sample KS distance to EW(a, b, θ) with the asymptotic p-value.
pub fn ks_test_ew(data: &[f64], e: &EwParams) -> Result<KsTest> {
    if data.is_empty() {
        return Err(BgwError::Data("empty sample".into()));
    }
    if let Some(v) = data.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
        return Err(BgwError::Data(format!("observations must be finite and > 0, got {v}")));
    }
    let mut sorted = data.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &t) in sorted.iter().enumerate() {
        let f = e.cdf(t)?;
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    Ok(KsTest {
        distance: d,
        p_value: kolmogorov_sf(n.sqrt() * d),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EwFit {
    pub params: EwParams,
    pub log_lik: f64,
}

/// Maximum-likelihood EW(a, b, θ) fit with θ restricted to (0, 1].
pub fn fit_ew(data: &[f64]) -> Result<EwFit> {
    if data.len() < 3 {
        return Err(BgwError::Data("at least 3 observations are needed".into()));
    }
    if data.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(BgwError::Data("observations must be finite and > 0".into()));
    }
    let to_params = |u: &[f64]| {
        EwParams::new(u[0].exp(), u[1].exp(), THETA_FLOOR + (1.0 - THETA_FLOOR) * logistic(u[2])).ok()
    };
    let ll = |e: &EwParams| data.iter().map(|t| e.ln_pdf(*t).unwrap_or(f64::NEG_INFINITY)).sum::<f64>();
    let logs: Vec<f64> = data.iter().map(|v| v.ln()).collect();
    let mut best: Option<(EwParams, f64)> = None;
    let a0 = (std::f64::consts::PI / (6f64.sqrt() * sd(&logs))).clamp(0.05, 50.0);
    for &(a_mult, theta0) in &[(1.0, 0.5), (1.0, 0.95), (0.5, 0.5), (2.0, 0.2)] {
        let a = a0 * a_mult;
        let b = data.len() as f64 / data.iter().map(|t| t.powf(a)).sum::<f64>();
        let s: f64 = (theta0 - THETA_FLOOR) / (1.0 - THETA_FLOOR);
        let u0 = [a.ln(), b.ln(), (s / (1.0 - s)).ln()];
        let m = nelder_mead(
            |u| to_params(u).map_or(f64::INFINITY, |e| -ll(&e)),
            &u0,
            &NelderMeadOptions::default(),
        );
        if let Some(e) = to_params(&m.x) {
            let v = ll(&e);
            if v.is_finite() && best.is_none_or(|b| v > b.1) {
                best = Some((e, v));
            }
        }
    }
    let (params, log_lik) = best.ok_or_else(|| BgwError::Numerical("EW fit failed".into()))?;
    Ok(EwFit { params, log_lik })
}

/// Standard errors from the inverse observed information, the Hessian
/// being central differences of the analytic score. Not authoritative:
/// meaningless when θ sits on its upper bound.
pub fn standard_errors(p: &BgwParams, data: &BivariateSample) -> Result<[f64; 4]> {
    let base = p.to_array();
    let mut hess = vec![vec![0.0; 4]; 4];
    for j in 0..4 {
        let h = 1e-5 * base[j].abs().max(1e-3);
        let mut up = base;
        let mut dn = base;
        up[j] += h;
        dn[j] -= h;
        if j == 3 && up[3] > 1.0 {
            up[3] = 1.0;
        }
        let width = up[j] - dn[j];
        let gu = score(&BgwParams::from_array(up)?, data);
        let gd = score(&BgwParams::from_array(dn)?, data);
        for i in 0..4 {
            hess[i][j] = -(gu[i] - gd[i]) / width;
        }
    }
    for i in 0..4 {
        for j in 0..i {
            let m = 0.5 * (hess[i][j] + hess[j][i]);
            hess[i][j] = m;
            hess[j][i] = m;
        }
    }
    let cov = invert(&hess).ok_or_else(|| BgwError::Numerical("observed information is singular".into()))?;
    let mut se = [0.0; 4];
    for i in 0..4 {
        if cov[i][i].is_nan() || cov[i][i] <= 0.0 {
            return Err(BgwError::Numerical("observed information is not positive definite".into()));
        }
        se[i] = cov[i][i].sqrt();
    }
    Ok(se)
}
