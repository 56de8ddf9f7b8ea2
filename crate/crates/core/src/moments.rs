//! Product moments, EW moments, correlation, and the law of `min(X, Y)`.

use crate::distribution::{BgwParams, EwParams, Margin};
use crate::error::{BgwError, Result};
use crate::special::{gamma, gen_binom, sum_series, sum_series_from, SeriesControl};

/// Series control used by default for moment sums: up to 10^6 terms with a
/// power-law tail estimate.
pub fn moment_series_control() -> SeriesControl {
    SeriesControl::new(1e-12, 1_000_000)
        .expect("valid constants")
        .with_tail_extrapolation()
}

fn check_order(name: &str, r: u32) -> Result<()> {
    if r == 0 {
        return Err(BgwError::InvalidParameter(format!("moment order {name} must be >= 1")));
    }
    Ok(())
}

/// Σ_{j≥1} C(θ,j)(−1)^{j+1} j^{−q}: the common mixing sum over `K`.
fn mixing_sum(theta: f64, q: f64, ctrl: &SeriesControl) -> Result<f64> {
    if theta == 1.0 {
        return Ok(1.0);
    }
    let sum = sum_series(
        |j| {
            let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
            sign * gen_binom(theta, j) * (j as f64).powf(-q)
        },
        ctrl,
    )?;
    Ok(sum.value)
}

/// E(X^r Y^s).
pub fn product_moment(p: &BgwParams, r: u32, s: u32, ctrl: &SeriesControl) -> Result<f64> {
    check_order("r", r)?;
    check_order("s", s)?;
    let (a, rf, sf) = (p.a(), r as f64, s as f64);
    let scale = gamma(1.0 + rf / a) * gamma(1.0 + sf / a)
        / (p.b1().powf(rf / a) * p.b2().powf(sf / a));
    Ok(scale * mixing_sum(p.theta(), (rf + sf) / a, ctrl)?)
}

/// E(T^r) for `T ~ EW(a, b, θ)`.
pub fn ew_moment(e: &EwParams, r: u32, ctrl: &SeriesControl) -> Result<f64> {
    check_order("r", r)?;
    let (a, b, theta, rf) = (e.a(), e.b(), e.theta(), r as f64);
    let lead = theta * gamma(1.0 + rf / a) / b.powf(rf / a);
    if theta == 1.0 {
        return Ok(lead);
    }
    let sum = sum_series_from(
        0,
        |j| {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            sign * gen_binom(theta - 1.0, j) / ((j + 1) as f64).powf(1.0 + rf / a)
        },
        ctrl,
    )?;
    Ok(lead * sum.value)
}

/// Pearson correlation of `X` and `Y`.
pub fn correlation(p: &BgwParams, ctrl: &SeriesControl) -> Result<f64> {
    if p.theta() == 1.0 {
        return Ok(0.0);
    }
    let (ex, ey) = (p.marginal(Margin::X), p.marginal(Margin::Y));
    let (mx, my) = (ew_moment(&ex, 1, ctrl)?, ew_moment(&ey, 1, ctrl)?);
    let vx = ew_moment(&ex, 2, ctrl)? - mx * mx;
    let vy = ew_moment(&ey, 2, ctrl)? - my * my;
    let cov = product_moment(p, 1, 1, ctrl)? - mx * my;
    Ok(cov / (vx * vy).sqrt())
}

/// `min(X, Y) ~ EW(a, b1 + b2, θ)`.
pub fn min_law(p: &BgwParams) -> EwParams {
    EwParams::new(p.a(), p.b1() + p.b2(), p.theta()).expect("sum of valid rates is valid")
}

/// P(X < Y) = b1 / (b1 + b2).
///
/// Given `K`, `X` and `Y` are independent Weibulls with rates `K·b1` and
/// `K·b2` and a common shape, so the ratio does not depend on `K`, `a`
/// or `θ`.
pub fn prob_x_less_y(p: &BgwParams) -> f64 {
    p.b1() / (p.b1() + p.b2())
}
