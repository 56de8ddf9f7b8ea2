//! The BGW copula and its dependence measures.
//!
//! C(s,t) = s + t − {1 − (1−s^{1/θ})(1−t^{1/θ})}^θ on the unit square,
//! θ ∈ (0, 1], with θ = 1 the independence copula.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::distribution::BgwParams;
use crate::error::{BgwError, Result};
use crate::quad::{integrate_unit_square, GaussLegendre};
use crate::sampling::sample_pair;
use crate::special::{beta, digamma, gen_binom, sum_series_from, SeriesControl};
use crate::stats::kendall_tau_b;

/// Default control for the dependence series: terms decay like
/// `j^{-1-cθ}`, so a tail estimate is needed for small θ.
pub fn dependence_series_control() -> SeriesControl {
    SeriesControl::new(1e-13, 1_000_000)
        .expect("valid constants")
        .with_tail_extrapolation()
}

fn check_theta(theta: f64) -> Result<()> {
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(BgwError::InvalidParameter(format!("theta must lie in (0, 1], got {theta}")));
    }
    Ok(())
}

fn check_unit(name: &str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(BgwError::Domain(format!("{name} must lie in [0, 1], got {v}")));
    }
    Ok(())
}

/// C(s, t).
pub fn copula_cdf(theta: f64, s: f64, t: f64) -> Result<f64> {
    check_theta(theta)?;
    check_unit("s", s)?;
    check_unit("t", t)?;
    if s == 0.0 || t == 0.0 {
        return Ok(0.0);
    }
    if s == 1.0 {
        return Ok(t);
    }
    if t == 1.0 {
        return Ok(s);
    }
    Ok(s + t - (theta * ln_union(theta, s, t)).exp())
}

/// ln(u + v − uv) with u = s^{1/θ}, v = t^{1/θ}, safe when u, v underflow.
fn ln_union(theta: f64, s: f64, t: f64) -> f64 {
    let (lu, lv) = (s.ln() / theta, t.ln() / theta);
    let (hi, lo) = if lu >= lv { (lu, lv) } else { (lv, lu) };
    // u + v(1−u) = e^hi (1 + e^{lo−hi}(1 − e^hi))
    hi + ((lo - hi).exp() * -hi.exp_m1()).ln_1p()
}

/// ∂C/∂s = 1 − s^{1/θ−1}(1−t^{1/θ}){1−(1−s^{1/θ})(1−t^{1/θ})}^{θ−1}, for s, t in (0, 1).
pub fn copula_ds(theta: f64, s: f64, t: f64) -> Result<f64> {
    check_theta(theta)?;
    if !(s > 0.0 && s < 1.0 && t > 0.0 && t < 1.0) {
        return Err(BgwError::Domain(format!("(s, t) = ({s}, {t}) must lie in the open unit square")));
    }
    Ok(ds_unchecked(theta, s, t))
}

fn ds_unchecked(theta: f64, s: f64, t: f64) -> f64 {
    let ln_one_minus_v = (-(t.ln() / theta).exp()).ln_1p();
    let ln_prod = (1.0 / theta - 1.0) * s.ln() + ln_one_minus_v + (theta - 1.0) * ln_union(theta, s, t);
    1.0 - ln_prod.exp()
}

fn signed_binom(theta: f64, j: u64) -> f64 {
    let sign = if j.is_multiple_of(2) { 1.0 } else { -1.0 };
    sign * gen_binom(theta, j)
}

fn sum0<F: Fn(u64) -> f64>(term: F, ctrl: &SeriesControl) -> Result<f64> {
    Ok(sum_series_from(0, term, ctrl)?.value)
}

/// Spearman's ρ = 9 − 12θ² Σ_{j≥0} (−1)^j C(θ,j) B(θ,j+1)².
pub fn spearman_rho(theta: f64, ctrl: &SeriesControl) -> Result<f64> {
    check_theta(theta)?;
    if theta == 1.0 {
        return Ok(0.0);
    }
    let s = sum0(|j| signed_binom(theta, j) * beta(theta, j as f64 + 1.0).powi(2), ctrl)?;
    Ok(9.0 - 12.0 * theta * theta * s)
}

/// Spearman's footrule φ = 4 − 6θ Σ_{j≥0} C(θ,j)(−1)^j B(θ,2j+1).
pub fn footrule_phi(theta: f64, ctrl: &SeriesControl) -> Result<f64> {
    check_theta(theta)?;
    if theta == 1.0 {
        return Ok(0.0);
    }
    let s = sum0(|j| signed_binom(theta, j) * beta(theta, 2.0 * j as f64 + 1.0), ctrl)?;
    Ok(4.0 - 6.0 * theta * s)
}

/// Blest's measure 8 − 24θ² Σ_{j≥0} C(θ,j)(−1)^j B(θ,j+1)[B(θ,j+1) − B(2θ,j+1)].
pub fn blest_b(theta: f64, ctrl: &SeriesControl) -> Result<f64> {
    check_theta(theta)?;
    if theta == 1.0 {
        return Ok(0.0);
    }
    // The two products decay at different power-law rates; summed apart so
    // each tail estimate sees a single rate.
    let sq = sum0(|j| signed_binom(theta, j) * beta(theta, j as f64 + 1.0).powi(2), ctrl)?;
    let cross = sum0(
        |j| {
            let jf = j as f64 + 1.0;
            signed_binom(theta, j) * beta(theta, jf) * beta(2.0 * theta, jf)
        },
        ctrl,
    )?;
    Ok(8.0 - 24.0 * theta * theta * (sq - cross))
}

/// The closed form 1 + 4θB(2,2θ+1)(ψ(2) − ψ(2θ+1)) evaluated as written.
///
/// Known issue: this does not equal Kendall's τ of the copula. It returns
/// 5/6 at θ = 1 (independence, true τ = 0) and exactly 1 at θ = 1/2.
/// Use [`kendall_tau_quadrature`] for the value of τ.
pub fn kendall_tau_formula(theta: f64) -> Result<f64> {
    check_theta(theta)?;
    Ok(1.0 + 4.0 * theta * beta(2.0, 2.0 * theta + 1.0) * (digamma(2.0) - digamma(2.0 * theta + 1.0)))
}

/// Kendall's τ = 1 − 4∬ ∂C/∂s · ∂C/∂t ds dt by 2-D Gauss–Legendre quadrature.
pub fn kendall_tau_quadrature(theta: f64) -> Result<f64> {
    check_theta(theta)?;
    if theta == 1.0 {
        return Ok(0.0);
    }
    let rule = GaussLegendre::new(20);
    let v = integrate_unit_square(&rule, 30, |s, t| {
        ds_unchecked(theta, s, t) * ds_unchecked(theta, t, s)
    });
    Ok(1.0 - 4.0 * v)
}

/// Sample Kendall's τ (tau-b) of `n` simulated pairs.
pub fn kendall_tau_monte_carlo<R: rand::RngCore>(theta: f64, n: usize, rng: &mut R) -> Result<f64> {
    check_theta(theta)?;
    if n < 2 {
        return Err(BgwError::InvalidParameter("need at least two draws".into()));
    }
    // Rank statistics only depend on the copula; unit margins suffice.
    let p = BgwParams::new(1.0, 1.0, 1.0, theta)?;
    let (xs, ys): (Vec<f64>, Vec<f64>) = (0..n).map(|_| sample_pair(&p, rng)).unzip();
    kendall_tau_b(&xs, &ys)
}

/// Lower and upper tail dependence coefficients: (2 − 2^θ, 0).
pub fn tail_dependence(theta: f64) -> Result<(f64, f64)> {
    check_theta(theta)?;
    Ok((2.0 - 2f64.powf(theta), 0.0))
}

/// Regression dependence r = 6∬(∂C/∂s)² ds dt − 2 as the series
/// 4 + 6θ² Σ_{j≥0} (−1)^j [C(2θ−2,j) B(2−θ,j+1) B(θ,j+3) − 2 C(θ−1,j) B(1,j+1) B(θ,j+2)].
pub fn regression_dependence_r(theta: f64, ctrl: &SeriesControl) -> Result<f64> {
    check_theta(theta)?;
    if theta == 1.0 {
        return Ok(0.0);
    }
    let s = sum0(
        |j| {
            let jf = j as f64;
            signed_binom(2.0 * theta - 2.0, j) * beta(2.0 - theta, jf + 1.0) * beta(theta, jf + 3.0)
                - 2.0 * signed_binom(theta - 1.0, j) * beta(1.0, jf + 1.0) * beta(theta, jf + 2.0)
        },
        ctrl,
    )?;
    Ok(4.0 + 6.0 * theta * theta * s)
}

/// Series for r with C(θ−1, j) on both terms. Known issue:
/// it disagrees with 6∬(∂C/∂s)² − 2 for θ < 1; see [`regression_dependence_r`].
pub fn regression_dependence_r_naive(theta: f64, ctrl: &SeriesControl) -> Result<f64> {
    check_theta(theta)?;
    let s = sum0(
        |j| {
            let jf = j as f64;
            let c = signed_binom(theta - 1.0, j);
            c * (beta(2.0 - theta, jf + 1.0) * beta(theta, jf + 3.0)
                - 2.0 * beta(1.0, jf + 1.0) * beta(theta, jf + 2.0))
        },
        ctrl,
    )?;
    Ok(4.0 + 6.0 * theta * theta * s)
}

/// One row of the dependence sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DependenceRow {
    pub theta: f64,
    pub rho: f64,
    pub tau: f64,
    pub phi: f64,
    pub blest: f64,
    pub r: f64,
    pub tau_formula: f64,
}

pub fn dependence_row(theta: f64, ctrl: &SeriesControl) -> Result<DependenceRow> {
    Ok(DependenceRow {
        theta,
        rho: spearman_rho(theta, ctrl)?,
        tau: kendall_tau_quadrature(theta)?,
        phi: footrule_phi(theta, ctrl)?,
        blest: blest_b(theta, ctrl)?,
        r: regression_dependence_r(theta, ctrl)?,
        tau_formula: kendall_tau_formula(theta)?,
    })
}

/// Rows for θ = 0.01, 0.02, …, 1.00.
pub fn dependence_sweep(ctrl: &SeriesControl) -> Result<Vec<DependenceRow>> {
    (1..=100u32)
        .into_par_iter()
        .map(|i| dependence_row(i as f64 / 100.0, ctrl))
        .collect()
}

pub fn write_sweep_csv<W: Write>(rows: &[DependenceRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
