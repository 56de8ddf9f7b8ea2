//! Test-side oracles written independently of the library's numerics:
//! double-exponential quadrature and Kolmogorov–Smirnov statistics.

#![allow(dead_code)]

use std::f64::consts::FRAC_PI_2;

/// Tanh-sinh quadrature on [lo, hi]. Endpoint singularities are tolerated
/// because nodes never touch the endpoints.
pub fn tanh_sinh<F: FnMut(f64) -> f64>(lo: f64, hi: f64, step: f64, mut f: F) -> f64 {
    let half = 0.5 * (hi - lo);
    let mut total = 0.0;
    let kmax = (4.0 / step).ceil() as i64;
    for k in -kmax..=kmax {
        let t = k as f64 * step;
        let u = FRAC_PI_2 * t.sinh();
        let c = u.cosh();
        // distance to the nearer endpoint, 1 - tanh|u|, without cancellation
        let e = (-2.0 * u.abs()).exp();
        let gap = half * 2.0 * e / (1.0 + e);
        let x = if u >= 0.0 { hi - gap } else { lo + gap };
        if x <= lo || x >= hi {
            continue;
        }
        let w = FRAC_PI_2 * t.cosh() / (c * c);
        let v = f(x);
        if v.is_finite() {
            total += w * v;
        }
    }
    total * half * step
}

/// Exp-sinh quadrature on (0, ∞): x = exp(π/2 · sinh t).
pub fn exp_sinh<F: FnMut(f64) -> f64>(step: f64, mut f: F) -> f64 {
    let mut total = 0.0;
    let kmax = (4.5 / step).ceil() as i64;
    for k in -kmax..=kmax {
        let t = k as f64 * step;
        let u = FRAC_PI_2 * t.sinh();
        if u > 700.0 {
            break;
        }
        let x = u.exp();
        if x == 0.0 {
            continue;
        }
        let w = x * FRAC_PI_2 * t.cosh();
        let v = f(x);
        if v.is_finite() {
            total += w * v;
        }
    }
    total * step
}

/// Kolmogorov survival function P(K > λ).
pub fn kolmogorov_tail(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut s = 0.0;
    for k in 1..200 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        s += if k % 2 == 1 { term } else { -term };
        if term < 1e-18 {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}

/// One-sample KS distance and asymptotic p-value.
pub fn ks_one_sample<F: Fn(f64) -> f64>(data: &[f64], cdf: F) -> (f64, f64) {
    let mut v = data.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let mut d: f64 = 0.0;
    for (i, x) in v.iter().enumerate() {
        let c = cdf(*x);
        d = d.max((i as f64 + 1.0) / n - c).max(c - i as f64 / n);
    }
    (d, kolmogorov_tail(n.sqrt() * d))
}

/// Two-sample KS distance and asymptotic p-value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> (f64, f64) {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let v = a[i].min(b[j]);
        while i < a.len() && a[i] <= v {
            i += 1;
        }
        while j < b.len() && b[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    let ne = na * nb / (na + nb);
    (d, kolmogorov_tail(ne.sqrt() * d))
}

/// |got − want| ≤ tol · max(1, |want|).
pub fn close(got: f64, want: f64, tol: f64) -> bool {
    (got - want).abs() <= tol * want.abs().max(1.0)
}
