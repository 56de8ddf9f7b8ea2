//! Pointwise evaluation of the bivariate generalized Weibull law.
//!
//! With `Z = b1·x^a + b2·y^a` the joint survival function is
//! `S(x, y) = 1 − (1 − e^{−Z})^θ`. The marginals are exponentiated Weibull
//! `EW(a, b1, θ)` and `EW(a, b2, θ)`; `θ = 1` gives independent Weibulls,
//! `a = 1` the bivariate generalized exponential and `a = 2` the bivariate
//! generalized Rayleigh sub-models.
//!
//! Densities are assembled in log space. Near `Z = 0` the factor
//! `(1 − e^{−Z})^{θ−2}` blows up while `x^{a−1} y^{a−1} e^{−Z}` may vanish, so a
//! direct product would produce `inf · 0`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{BgwError, Result};
use crate::special::{gen_binom, ln_gamma, sum_series, SeriesControl};

/// ln(1 − e^{−z}) for z ≥ 0.
pub(crate) fn ln_one_minus_exp_neg(z: f64) -> f64 {
    if z < std::f64::consts::LN_2 {
        (-(-z).exp_m1()).ln()
    } else {
        (-(-z).exp()).ln_1p()
    }
}

/// (1 − e^{−z})^θ.
pub(crate) fn one_minus_exp_neg_pow(z: f64, theta: f64) -> f64 {
    if z == 0.0 {
        return 0.0;
    }
    (theta * ln_one_minus_exp_neg(z)).exp()
}

fn check_nonneg(name: &str, v: f64) -> Result<()> {
    if v >= 0.0 {
        Ok(())
    } else {
        Err(BgwError::Domain(format!("{name} must be >= 0, got {v}")))
    }
}

fn check_pos(name: &str, v: f64) -> Result<()> {
    if v > 0.0 {
        Ok(())
    } else {
        Err(BgwError::Domain(format!("{name} must be > 0, got {v}")))
    }
}

fn validate_shape_rate_theta(a: f64, rates: &[(&str, f64)], theta: f64) -> Result<()> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(BgwError::InvalidParameter(format!(
            "shape a must be > 0, got {a}"
        )));
    }
    for (name, b) in rates {
        if !(*b > 0.0 && b.is_finite()) {
            return Err(BgwError::InvalidParameter(format!(
                "rate {name} must be > 0, got {b}"
            )));
        }
    }
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(BgwError::InvalidParameter(format!(
            "theta must lie in (0, 1], got {theta}"
        )));
    }
    Ok(())
}

/// Parameters `(a, b1, b2, θ)` of the bivariate generalized Weibull law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct BgwParams {
    a: f64,
    b1: f64,
    b2: f64,
    theta: f64,
}

#[derive(Serialize, Deserialize)]
struct RawParams {
    a: f64,
    b1: f64,
    b2: f64,
    theta: f64,
}

impl TryFrom<RawParams> for BgwParams {
    type Error = BgwError;
    fn try_from(r: RawParams) -> Result<Self> {
        BgwParams::new(r.a, r.b1, r.b2, r.theta)
    }
}

impl From<BgwParams> for RawParams {
    fn from(p: BgwParams) -> Self {
        RawParams {
            a: p.a,
            b1: p.b1,
            b2: p.b2,
            theta: p.theta,
        }
    }
}

/// Exponentiated Weibull parameters: CDF `(1 − e^{−b t^a})^θ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EwParams {
    a: f64,
    b: f64,
    theta: f64,
}

/// Selects one coordinate of the pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Margin {
    X,
    Y,
}

impl BgwParams {
    pub fn new(a: f64, b1: f64, b2: f64, theta: f64) -> Result<Self> {
        validate_shape_rate_theta(a, &[("b1", b1), ("b2", b2)], theta)?;
        Ok(Self { a, b1, b2, theta })
    }

    /// Parse `"a,b1,b2,theta"`.
    pub fn parse(s: &str) -> Result<Self> {
        let v: Vec<f64> = s
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| BgwError::InvalidParameter(format!("cannot parse '{s}': {e}")))?;
        match v.as_slice() {
            [a, b1, b2, t] => Self::new(*a, *b1, *b2, *t),
            _ => Err(BgwError::InvalidParameter(format!(
                "expected four comma-separated values, got '{s}'"
            ))),
        }
    }

    pub fn from_array(v: [f64; 4]) -> Result<Self> {
        Self::new(v[0], v[1], v[2], v[3])
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.a, self.b1, self.b2, self.theta]
    }

    pub fn a(&self) -> f64 {
        self.a
    }
    pub fn b1(&self) -> f64 {
        self.b1
    }
    pub fn b2(&self) -> f64 {
        self.b2
    }
    pub fn theta(&self) -> f64 {
        self.theta
    }

    fn independent(&self) -> bool {
        self.theta == 1.0
    }

    /// `Z(x, y) = b1 x^a + b2 y^a`.
    pub fn z(&self, x: f64, y: f64) -> f64 {
        self.b1 * x.powf(self.a) + self.b2 * y.powf(self.a)
    }

    pub fn marginal(&self, which: Margin) -> EwParams {
        let b = match which {
            Margin::X => self.b1,
            Margin::Y => self.b2,
        };
        EwParams {
            a: self.a,
            b,
            theta: self.theta,
        }
    }

    /// Joint distribution function F(x, y).
    pub fn cdf(&self, x: f64, y: f64) -> Result<f64> {
        check_nonneg("x", x)?;
        check_nonneg("y", y)?;
        let ux = self.b1 * x.powf(self.a);
        let uy = self.b2 * y.powf(self.a);
        if self.independent() {
            return Ok((-(-ux).exp_m1()) * (-(-uy).exp_m1()));
        }
        let t = self.theta;
        let f = one_minus_exp_neg_pow(ux, t) + one_minus_exp_neg_pow(uy, t)
            - one_minus_exp_neg_pow(ux + uy, t);
        Ok(f.clamp(0.0, 1.0))
    }

    /// Joint survival function S(x, y) = P(X > x, Y > y).
    pub fn survival(&self, x: f64, y: f64) -> Result<f64> {
        check_nonneg("x", x)?;
        check_nonneg("y", y)?;
        let z = self.z(x, y);
        if self.independent() {
            return Ok((-z).exp());
        }
        if z == 0.0 {
            return Ok(1.0);
        }
        Ok(-(self.theta * ln_one_minus_exp_neg(z)).exp_m1())
    }

    fn ln_survival_at(&self, z: f64) -> f64 {
        if self.independent() {
            -z
        } else {
            (-(self.theta * ln_one_minus_exp_neg(z)).exp_m1()).ln()
        }
    }

    /// Log joint density without argument checks (x, y > 0 assumed).
    pub(crate) fn ln_pdf_unchecked(&self, x: f64, y: f64) -> f64 {
        let (a, t) = (self.a, self.theta);
        let z = self.z(x, y);
        let base = 2.0 * a.ln() + self.b1.ln() + self.b2.ln() + (a - 1.0) * (x.ln() + y.ln()) - z;
        if self.independent() {
            return base;
        }
        base + t.ln() + (t - 2.0) * ln_one_minus_exp_neg(z) + (-t * (-z).exp()).ln_1p()
    }

    pub fn ln_pdf(&self, x: f64, y: f64) -> Result<f64> {
        check_pos("x", x)?;
        check_pos("y", y)?;
        Ok(self.ln_pdf_unchecked(x, y))
    }

    /// Joint density f(x, y) = ∂²F/∂x∂y.
    pub fn pdf(&self, x: f64, y: f64) -> Result<f64> {
        self.ln_pdf(x, y).map(f64::exp)
    }

    /// Conditional density of Y at `y` given X = `given_x`.
    pub fn cond_pdf(&self, y: f64, given_x: f64) -> Result<f64> {
        check_pos("y", y)?;
        check_pos("given_x", given_x)?;
        let (a, t) = (self.a, self.theta);
        let uy = self.b2 * y.powf(a);
        let ux = self.b1 * given_x.powf(a);
        let z = ux + uy;
        let mut ln = a.ln() + self.b2.ln() + (a - 1.0) * y.ln() - uy;
        if !self.independent() {
            ln += (t - 2.0) * ln_one_minus_exp_neg(z) + (-t * (-z).exp()).ln_1p()
                - (t - 1.0) * ln_one_minus_exp_neg(ux);
        }
        Ok(ln.exp())
    }

    /// P(Y > y | X = given_x).
    pub fn cond_survival(&self, y: f64, given_x: f64) -> Result<f64> {
        check_nonneg("y", y)?;
        check_pos("given_x", given_x)?;
        let t = self.theta;
        let uy = self.b2 * y.powf(self.a);
        let ux = self.b1 * given_x.powf(self.a);
        if self.independent() {
            return Ok((-uy).exp());
        }
        let ln = -uy + (t - 1.0) * (ln_one_minus_exp_neg(ux + uy) - ln_one_minus_exp_neg(ux));
        Ok(ln.exp())
    }

    /// P(Y ≤ y | X = given_x).
    pub fn cond_cdf(&self, y: f64, given_x: f64) -> Result<f64> {
        let s = self.cond_survival(y, given_x)?;
        Ok(1.0 - s)
    }

    /// Regression function E(Y | X = x), via the exponentially weighted
    /// binomial series divided by the marginal density of X.
    pub fn regression(&self, x: f64, ctrl: &SeriesControl) -> Result<f64> {
        check_pos("x", x)?;
        let (a, t) = (self.a, self.theta);
        let ux = self.b1 * x.powf(a);
        let series = sum_series(
            |j| {
                let jf = j as f64;
                let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
                let c = gen_binom(t, j);
                if c == 0.0 {
                    return 0.0;
                }
                sign * c.signum() * (c.abs().ln() + (1.0 - 1.0 / a) * jf.ln() - jf * ux).exp()
            },
            ctrl,
        )?;
        let fx = self.marginal(Margin::X).pdf(x)?;
        let pref = a * self.b1 * ln_gamma(1.0 + 1.0 / a).exp() * x.powf(a - 1.0)
            / self.b2.powf(1.0 / a);
        Ok(pref * series.value / fx)
    }

    /// Basu bivariate hazard rate h = f / S.
    pub fn hazard(&self, x: f64, y: f64) -> Result<f64> {
        check_pos("x", x)?;
        check_pos("y", y)?;
        let z = self.z(x, y);
        Ok((self.ln_pdf_unchecked(x, y) - self.ln_survival_at(z)).exp())
    }

    /// Hazard gradient (η1, η2) = (−∂ ln S/∂x, −∂ ln S/∂y).
    pub fn hazard_gradient(&self, x: f64, y: f64) -> Result<(f64, f64)> {
        check_pos("x", x)?;
        check_pos("y", y)?;
        let (a, t) = (self.a, self.theta);
        let z = self.z(x, y);
        if self.independent() {
            return Ok((
                a * self.b1 * x.powf(a - 1.0),
                a * self.b2 * y.powf(a - 1.0),
            ));
        }
        // common factor θ a e^{−Z} (1 − e^{−Z})^{θ−1} / S
        let ln_common =
            t.ln() + a.ln() - z + (t - 1.0) * ln_one_minus_exp_neg(z) - self.ln_survival_at(z);
        let eta1 = (ln_common + self.b1.ln() + (a - 1.0) * x.ln()).exp();
        let eta2 = (ln_common + self.b2.ln() + (a - 1.0) * y.ln()).exp();
        Ok((eta1, eta2))
    }

    /// Holland–Wang local dependence δ(x, y) = ∂² ln f / ∂x∂y.
    pub fn local_dependence(&self, x: f64, y: f64) -> Result<f64> {
        check_pos("x", x)?;
        check_pos("y", y)?;
        if self.independent() {
            return Ok(0.0);
        }
        let (a, t) = (self.a, self.theta);
        let z = self.z(x, y);
        let w = (-z).exp();
        let one_minus_w = -(-z).exp_m1();
        let bracket = (2.0 - t) / (one_minus_w * one_minus_w) - t / ((1.0 - t * w).powi(2));
        let pref = a * a * self.b1 * self.b2 * x.powf(a - 1.0) * y.powf(a - 1.0) * w;
        Ok(pref * bracket)
    }
}

impl EwParams {
    pub fn new(a: f64, b: f64, theta: f64) -> Result<Self> {
        validate_shape_rate_theta(a, &[("b", b)], theta)?;
        Ok(Self { a, b, theta })
    }

    pub fn a(&self) -> f64 {
        self.a
    }
    pub fn b(&self) -> f64 {
        self.b
    }
    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn cdf(&self, t: f64) -> Result<f64> {
        check_nonneg("t", t)?;
        Ok(one_minus_exp_neg_pow(self.b * t.powf(self.a), self.theta))
    }

    pub fn survival(&self, t: f64) -> Result<f64> {
        check_nonneg("t", t)?;
        let u = self.b * t.powf(self.a);
        if u == 0.0 {
            return Ok(1.0);
        }
        Ok(-(self.theta * ln_one_minus_exp_neg(u)).exp_m1())
    }

    pub fn ln_pdf(&self, t: f64) -> Result<f64> {
        check_pos("t", t)?;
        let (a, th) = (self.a, self.theta);
        let u = self.b * t.powf(a);
        Ok(th.ln() + a.ln() + self.b.ln() + (a - 1.0) * t.ln() - u
            + (th - 1.0) * ln_one_minus_exp_neg(u))
    }

    /// Density θ a b t^{a−1} e^{−b t^a} (1 − e^{−b t^a})^{θ−1}.
    pub fn pdf(&self, t: f64) -> Result<f64> {
        self.ln_pdf(t).map(f64::exp)
    }

    /// Inverse CDF for `p` in [0, 1).
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&p) {
            return Err(BgwError::Domain(format!("probability must be in [0,1), got {p}")));
        }
        let w = (p.ln() / self.theta).exp();
        let neg_ln_q = if w < 0.5 {
            -(-w).ln_1p()
        } else {
            -(-(p.ln() / self.theta).exp_m1()).ln()
        };
        Ok((neg_ln_q / self.b).powf(1.0 / self.a))
    }
}

/// One row of a density grid dump.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridRow {
    pub x: f64,
    pub y: f64,
    pub cdf: f64,
    pub pdf: f64,
}

/// Evaluate F and f on a regular `steps × steps` grid over (0, x_max] × (0, y_max].
pub fn density_grid(p: &BgwParams, x_max: f64, y_max: f64, steps: usize) -> Result<Vec<GridRow>> {
    check_pos("x_max", x_max)?;
    check_pos("y_max", y_max)?;
    if steps == 0 {
        return Err(BgwError::InvalidParameter("grid needs at least one step".into()));
    }
    let mut rows = Vec::with_capacity(steps * steps);
    for i in 1..=steps {
        let x = x_max * i as f64 / steps as f64;
        for j in 1..=steps {
            let y = y_max * j as f64 / steps as f64;
            rows.push(GridRow {
                x,
                y,
                cdf: p.cdf(x, y)?,
                pdf: p.pdf(x, y)?,
            });
        }
    }
    Ok(rows)
}

/// Write grid rows as CSV with header `x,y,F,f`.
pub fn write_grid_csv<W: Write>(rows: &[GridRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x", "y", "F", "f"])?;
    for r in rows {
        w.write_record(&[
            r.x.to_string(),
            r.y.to_string(),
            r.cdf.to_string(),
            r.pdf.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
