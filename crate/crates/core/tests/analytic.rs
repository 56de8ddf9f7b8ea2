mod common;

use bgw::moments::{correlation, ew_moment, min_law, moment_series_control, prob_x_less_y, product_moment};
use bgw::special::{gen_binom, ln_gamma};
use bgw::{BgwParams, EwParams, Margin};
use common::{close, exp_sinh, tanh_sinh};

fn bgw(a: f64, b1: f64, b2: f64, t: f64) -> BgwParams {
    BgwParams::new(a, b1, b2, t).unwrap()
}

fn ew_cdf(a: f64, b: f64, t: f64, x: f64) -> f64 {
    (1.0 - (-b * x.powf(a)).exp()).powf(t)
}

/// Σ_{j≥1} C(θ,j)(−1)^{j+1} j^{−q} by the coefficient recurrence, long enough
/// for q ≥ 2 to reach ~1e-13.
fn mixing_sum_oracle(theta: f64, q: f64) -> f64 {
    let mut c = 1.0;
    let mut s = 0.0;
    for j in 1..=200_000u32 {
        let jf = j as f64;
        c *= (theta - jf + 1.0) / jf;
        let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
        s += sign * c * jf.powf(-q);
    }
    s
}

#[test]
fn density_integrates_to_one() {
    for p in [
        bgw(1.0, 0.5, 0.5, 0.5),
        bgw(2.0, 0.3, 0.17, 0.4),
        bgw(1.5, 1.0, 2.0, 0.8),
        bgw(3.0, 1.0, 1.0, 0.2),
    ] {
        let total = exp_sinh(0.03, |x| exp_sinh(0.03, |y| p.pdf(x, y).unwrap()));
        assert!((total - 1.0).abs() < 1e-4, "{p:?}: {total}");
    }
}

#[test]
fn density_integrates_to_one_on_bounded_box() {
    let p = bgw(1.0, 0.5, 0.5, 0.5);
    let total = tanh_sinh(0.0, 40.0, 0.02, |x| tanh_sinh(0.0, 40.0, 0.02, |y| p.pdf(x, y).unwrap()));
    assert!((total - 1.0).abs() < 1e-4, "{total}");
}

#[test]
fn cdf_examples() {
    assert_eq!(bgw(1.0, 0.5, 0.5, 0.5).cdf(0.0, 3.2).unwrap(), 0.0);
    let e = (1.0 - (-1.0f64).exp()).powi(2);
    assert!((bgw(1.0, 1.0, 1.0, 1.0).cdf(1.0, 1.0).unwrap() - e).abs() < 1e-15);
    assert!(bgw(1.0, 1.0, 1.0, 0.5).cdf(-1.0, 1.0).is_err());
}

#[test]
fn cdf_matches_closed_form_and_quadrature() {
    let p = bgw(2.0, 0.3, 0.17, 0.4);
    let (x, y) = (1.5, 2.0);
    let z = 0.3 * x * x + 0.17 * y * y;
    let closed = ew_cdf(2.0, 0.3, 0.4, x) + ew_cdf(2.0, 0.17, 0.4, y) - (1.0 - (-z).exp()).powf(0.4);
    let f = p.cdf(x, y).unwrap();
    assert!((f - closed).abs() < 1e-14);
    let quad = tanh_sinh(0.0, x, 0.02, |u| tanh_sinh(0.0, y, 0.02, |v| p.pdf(u, v).unwrap()));
    assert!((f - quad).abs() < 1e-5, "{f} vs {quad}");
}

#[test]
fn survival_examples_and_inclusion_exclusion() {
    let p = bgw(1.0, 1.0, 1.0, 1.0);
    assert_eq!(p.survival(0.0, 0.0).unwrap(), 1.0);
    assert!((p.survival(1.0, 1.0).unwrap() - (-2.0f64).exp()).abs() < 1e-15);

    let p = bgw(2.0, 0.3, 0.17, 0.4);
    let identity = |x: f64, y: f64| {
        let fx = p.marginal(Margin::X).cdf(x).unwrap();
        let fy = p.marginal(Margin::Y).cdf(y).unwrap();
        p.survival(x, y).unwrap() - (1.0 - fx - fy + p.cdf(x, y).unwrap())
    };
    assert!(identity(1.5, 2.0).abs() < 1e-14);
    for p in [bgw(2.0, 0.3, 0.17, 0.4), bgw(0.7, 1.2, 0.4, 0.1), bgw(1.0, 1.0, 2.0, 0.9)] {
        for i in 1..=12 {
            for j in 1..=12 {
                let (x, y) = (0.25 * i as f64, 0.3 * j as f64);
                let fx = p.marginal(Margin::X).cdf(x).unwrap();
                let fy = p.marginal(Margin::Y).cdf(y).unwrap();
                let lhs = p.survival(x, y).unwrap();
                let rhs = 1.0 - fx - fy + p.cdf(x, y).unwrap();
                assert!((lhs - rhs).abs() < 1e-12, "{p:?} ({x},{y})");
            }
        }
    }
}

#[test]
fn density_is_mixed_partial_of_cdf() {
    let h = 1e-4;
    for (p, x, y) in [
        (bgw(2.0, 0.3, 0.17, 0.4), 1.0, 1.0),
        (bgw(1.0, 1.0, 1.0, 0.5), 0.7, 1.3),
        (bgw(1.5, 0.8, 2.0, 0.2), 0.6, 0.9),
    ] {
        let c = |u: f64, v: f64| p.cdf(u, v).unwrap();
        let fd = (c(x + h, y + h) - c(x + h, y - h) - c(x - h, y + h) + c(x - h, y - h)) / (4.0 * h * h);
        let f = p.pdf(x, y).unwrap();
        assert!(((fd - f) / f).abs() < 1e-5, "{p:?}: {fd} vs {f}");
    }
}

#[test]
fn density_examples() {
    let f = bgw(1.0, 1.0, 1.0, 1.0).pdf(1.0, 1.0).unwrap();
    assert!((f - (-2.0f64).exp()).abs() < 1e-15);
    assert!(bgw(1.0, 1.0, 1.0, 0.5).pdf(0.0, 1.0).is_err());
    // far tail stays finite and positive
    let far = bgw(2.0, 1.0, 1.0, 0.5).pdf(20.0, 20.0).unwrap();
    assert!(far >= 0.0 && far.is_finite());
}

#[test]
fn marginals() {
    let p = bgw(2.0, 3.0, 5.0, 0.7);
    assert_eq!(p.marginal(Margin::X), EwParams::new(2.0, 3.0, 0.7).unwrap());
    assert_eq!(p.marginal(Margin::Y), EwParams::new(2.0, 5.0, 0.7).unwrap());
    let e = EwParams::new(1.0, 1.0, 1.0).unwrap();
    assert!((e.cdf(1.0).unwrap() - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
    // marginal of the joint law: F(x, ∞) = F_X(x)
    let q = bgw(1.3, 0.6, 1.1, 0.35);
    assert!((q.cdf(0.8, 1e6).unwrap() - q.marginal(Margin::X).cdf(0.8).unwrap()).abs() < 1e-14);
}

#[test]
fn conditional_laws() {
    let p = bgw(1.0, 1.0, 1.0, 0.5);
    let quad = tanh_sinh(0.0, 1.0, 0.01, |v| p.cond_pdf(v, 1.0).unwrap());
    assert!((p.cond_cdf(1.0, 1.0).unwrap() - quad).abs() < 1e-8);
    for y in [0.1, 0.5, 2.0, 5.0] {
        let s = p.cond_survival(y, 0.7).unwrap() + p.cond_cdf(y, 0.7).unwrap();
        assert!((s - 1.0).abs() < 1e-15);
    }
    // the conditional density of Y integrates to one
    let q = bgw(2.0, 0.3, 0.17, 0.4);
    assert!((exp_sinh(0.02, |v| q.cond_pdf(v, 1.2).unwrap()) - 1.0).abs() < 1e-8);
    // independence
    let ind = bgw(1.7, 0.9, 1.4, 1.0);
    let my = ind.marginal(Margin::Y);
    for (y, x) in [(0.3, 0.2), (1.0, 3.0), (2.5, 0.9)] {
        assert!((ind.cond_pdf(y, x).unwrap() - my.pdf(y).unwrap()).abs() < 1e-14);
    }
}

#[test]
fn positive_regression_dependence() {
    for p in [bgw(1.0, 1.0, 1.0, 0.5), bgw(2.0, 0.3, 0.17, 0.4), bgw(0.8, 2.0, 0.5, 0.1)] {
        for j in 1..=20 {
            let y = 0.2 * j as f64;
            let mut prev = 0.0;
            for i in 1..=40 {
                let s = p.cond_survival(y, 0.1 * i as f64).unwrap();
                assert!(s >= prev - 1e-14, "{p:?} y={y}");
                prev = s;
            }
        }
    }
}

#[test]
fn regression_function() {
    let ctrl = moment_series_control();
    let ind = bgw(2.0, 1.0, 3.0, 1.0);
    let mean = ln_gamma(1.5).exp() / 3.0f64.sqrt();
    for x in [0.2, 1.0, 4.0] {
        assert!((ind.regression(x, &ctrl).unwrap() - mean).abs() < 1e-12);
    }

    let (b1, b2, t) = (1.3, 0.7, 0.4);
    let bge = bgw(1.0, b1, b2, t);
    for x in [0.3, 1.0, 2.5] {
        let fx = bge.marginal(Margin::X).pdf(x).unwrap();
        let closed = b1 / (b2 * fx) * (1.0 - (1.0 - (-b1 * x).exp()).powf(t));
        let got = bge.regression(x, &ctrl).unwrap();
        assert!(((got - closed) / closed).abs() < 1e-8, "{got} vs {closed}");
    }

    for (p, x) in [(bgw(2.0, 1.0, 1.0, 0.5), 1.0), (bgw(1.5, 0.4, 2.0, 0.3), 0.6)] {
        let oracle = exp_sinh(0.02, |v| v * p.cond_pdf(v, x).unwrap());
        let got = p.regression(x, &ctrl).unwrap();
        assert!(((got - oracle) / oracle).abs() < 1e-7, "{got} vs {oracle}");
    }
}

#[test]
fn hazard_gradient_is_log_survival_slope() {
    let h = 1e-5;
    for (p, x, y) in [
        (bgw(2.0, 0.3, 0.17, 0.4), 1.0, 1.0),
        (bgw(1.0, 1.0, 1.0, 0.5), 0.5, 2.0),
        (bgw(0.8, 1.5, 0.6, 0.15), 1.2, 0.4),
    ] {
        let ln_s = |u: f64, v: f64| p.survival(u, v).unwrap().ln();
        let fd1 = -(ln_s(x + h, y) - ln_s(x - h, y)) / (2.0 * h);
        let fd2 = -(ln_s(x, y + h) - ln_s(x, y - h)) / (2.0 * h);
        let (e1, e2) = p.hazard_gradient(x, y).unwrap();
        assert!(close(e1, fd1, 1e-6) && close(e2, fd2, 1e-6), "{p:?}: ({e1},{e2}) vs ({fd1},{fd2})");
    }
}

#[test]
fn hazard_examples() {
    let unit = bgw(1.0, 1.0, 1.0, 1.0);
    assert_eq!(unit.hazard_gradient(2.0, 3.0).unwrap(), (1.0, 1.0));
    let ind = bgw(2.0, 0.5, 1.5, 1.0);
    let (e1, _) = ind.hazard_gradient(1.3, 0.4).unwrap();
    assert!((e1 - 2.0 * 0.5 * 1.3).abs() < 1e-14);
    let hx = ind.marginal(Margin::X).pdf(1.3).unwrap() / ind.marginal(Margin::X).survival(1.3).unwrap();
    let hy = ind.marginal(Margin::Y).pdf(0.4).unwrap() / ind.marginal(Margin::Y).survival(0.4).unwrap();
    assert!((ind.hazard(1.3, 0.4).unwrap() - hx * hy).abs() < 1e-13);
}

#[test]
fn hazard_gradient_decreases_in_other_coordinate() {
    for p in [bgw(2.0, 0.3, 0.17, 0.4), bgw(1.0, 1.0, 1.0, 0.5), bgw(0.6, 2.0, 1.0, 0.05)] {
        for i in 1..=15 {
            let x = 0.2 * i as f64;
            let mut prev = f64::INFINITY;
            for j in 1..=30 {
                let (e1, _) = p.hazard_gradient(x, 0.15 * j as f64).unwrap();
                assert!(e1 <= prev * (1.0 + 1e-13), "{p:?} x={x}");
                prev = e1;
            }
        }
    }
}

#[test]
fn diagonal_hazard_is_nonincreasing_for_exponential_shape() {
    // h(t,t) for a = 1
    for t in [0.2, 0.5, 0.9] {
        let p = bgw(1.0, 1.0, 1.5, t);
        let mut prev = f64::INFINITY;
        for k in 1..=60 {
            let v = 0.1 * k as f64;
            let h = p.hazard(v, v).unwrap();
            assert!(h <= prev * (1.0 + 1e-12), "θ={t} t={v}");
            prev = h;
        }
    }
}

#[test]
fn local_dependence_is_mixed_log_partial() {
    let h = 1e-4;
    for (p, x, y) in [
        (bgw(1.0, 1.0, 1.0, 0.5), 1.0, 1.0),
        (bgw(2.0, 0.3, 0.17, 0.4), 1.1, 0.8),
        (bgw(0.7, 1.0, 2.0, 0.2), 0.5, 0.6),
    ] {
        let l = |u: f64, v: f64| p.ln_pdf(u, v).unwrap();
        let fd = (l(x + h, y + h) - l(x + h, y - h) - l(x - h, y + h) + l(x - h, y - h)) / (4.0 * h * h);
        let d = p.local_dependence(x, y).unwrap();
        assert!(close(d, fd, 1e-5), "{p:?}: {d} vs {fd}");
    }
    assert_eq!(bgw(2.0, 1.0, 1.0, 1.0).local_dependence(0.4, 2.0).unwrap(), 0.0);
}

#[test]
fn local_dependence_nonnegative_on_grid() {
    for k in 1..=9 {
        let p = bgw(1.5, 1.0, 0.7, 0.1 * k as f64);
        for i in 1..=100 {
            for j in 1..=100 {
                let d = p.local_dependence(0.03 * i as f64, 0.03 * j as f64).unwrap();
                assert!(d >= 0.0, "{p:?}");
            }
        }
    }
}

#[test]
fn density_is_tp2_and_law_is_pqd() {
    for p in [bgw(2.0, 0.3, 0.17, 0.4), bgw(1.0, 1.0, 1.0, 0.1), bgw(0.8, 0.5, 2.0, 0.7)] {
        let grid: Vec<f64> = (1..=20).map(|i| 0.15 * i as f64).collect();
        let f: Vec<Vec<f64>> = grid
            .iter()
            .map(|&x| grid.iter().map(|&y| p.pdf(x, y).unwrap()).collect())
            .collect();
        for i1 in 0..20 {
            for i2 in i1 + 1..20 {
                for j1 in 0..20 {
                    for j2 in j1 + 1..20 {
                        let lhs = f[i1][j1] * f[i2][j2];
                        let rhs = f[i1][j2] * f[i2][j1];
                        assert!(lhs >= rhs * (1.0 - 1e-12), "{p:?}");
                    }
                }
            }
        }
        let (mx, my) = (p.marginal(Margin::X), p.marginal(Margin::Y));
        for &x in &grid {
            for &y in &grid {
                let fx = mx.cdf(x).unwrap();
                let fy = my.cdf(y).unwrap();
                assert!(p.cdf(x, y).unwrap() >= fx * fy - 1e-15);
                let sx = mx.survival(x).unwrap();
                let sy = my.survival(y).unwrap();
                assert!(p.survival(x, y).unwrap() >= sx * sy - 1e-15);
            }
        }
    }
}

#[test]
fn submodels_share_the_general_form() {
    let bge = bgw(1.0, 0.9, 1.7, 0.6);
    let (x, y) = (0.8, 1.1);
    let z = 0.9 * x + 1.7 * y;
    let f = (1.0 - (-0.9f64 * x).exp()).powf(0.6) + (1.0 - (-1.7f64 * y).exp()).powf(0.6)
        - (1.0 - (-z).exp()).powf(0.6);
    assert!((bge.cdf(x, y).unwrap() - f).abs() < 1e-15);
    let bgr = bgw(2.0, 0.9, 1.7, 0.6);
    let z = 0.9 * x * x + 1.7 * y * y;
    let f = (1.0 - (-0.9 * x * x).exp()).powf(0.6) + (1.0 - (-1.7 * y * y).exp()).powf(0.6)
        - (1.0 - (-z).exp()).powf(0.6);
    assert!((bgr.cdf(x, y).unwrap() - f).abs() < 1e-15);
}

#[test]
fn ew_moments() {
    let ctrl = moment_series_control();
    assert!((ew_moment(&EwParams::new(1.0, 1.0, 1.0).unwrap(), 1, &ctrl).unwrap() - 1.0).abs() < 1e-12);
    assert!((ew_moment(&EwParams::new(2.0, 1.0, 1.0).unwrap(), 2, &ctrl).unwrap() - 1.0).abs() < 1e-12);
    for (e, r) in [
        (EwParams::new(1.0, 1.0, 0.5).unwrap(), 1),
        (EwParams::new(2.0, 1.5, 0.3).unwrap(), 2),
        (EwParams::new(0.8, 0.7, 0.9).unwrap(), 1),
    ] {
        let oracle = exp_sinh(0.02, |t| t.powi(r as i32) * e.pdf(t).unwrap());
        let got = ew_moment(&e, r, &ctrl).unwrap();
        assert!(((got - oracle) / oracle).abs() < 1e-8, "{e:?} r={r}: {got} vs {oracle}");
    }
}

#[test]
fn product_moments() {
    let ctrl = moment_series_control();
    let ind = bgw(1.0, 2.0, 0.5, 1.0);
    assert!((product_moment(&ind, 1, 1, &ctrl).unwrap() - 1.0).abs() < 1e-12);

    // Rayleigh sub-model, r = s = 1
    let (b1, b2, t) = (0.6, 1.8, 0.45);
    let bgr = bgw(2.0, b1, b2, t);
    let want = std::f64::consts::PI / 4.0 * mixing_sum_oracle(t, 1.0) / (b1 * b2).sqrt();
    // the q = 1 oracle sum converges slowly; 2e5 terms leave ~1e-6
    assert!(((product_moment(&bgr, 1, 1, &ctrl).unwrap() - want) / want).abs() < 1e-5);

    // exponential sub-model: r! s! / (b1^r b2^s) Σ C(θ,j)(−1)^{j+1} j^{−(r+s)}
    for (r, s) in [(1u32, 1u32), (2, 1), (2, 3)] {
        let bge = bgw(1.0, b1, b2, t);
        let fact = |k: u32| (1..=k).product::<u32>() as f64;
        let want = fact(r) * fact(s) / (b1.powi(r as i32) * b2.powi(s as i32))
            * mixing_sum_oracle(t, (r + s) as f64);
        let got = product_moment(&bge, r, s, &ctrl).unwrap();
        assert!(((got - want) / want).abs() < 1e-12, "({r},{s}): {got} vs {want}");
    }

    // against 2-D quadrature
    let p = bgw(1.5, 0.8, 1.2, 0.35);
    let oracle = exp_sinh(0.03, |x| exp_sinh(0.03, |y| x * y * p.pdf(x, y).unwrap()));
    let got = product_moment(&p, 1, 1, &ctrl).unwrap();
    assert!(((got - oracle) / oracle).abs() < 1e-6, "{got} vs {oracle}");

    // covariance is nonnegative
    for t in [0.05, 0.3, 0.7, 1.0] {
        let p = bgw(1.2, 0.5, 2.0, t);
        let ex = ew_moment(&p.marginal(Margin::X), 1, &ctrl).unwrap();
        let ey = ew_moment(&p.marginal(Margin::Y), 1, &ctrl).unwrap();
        assert!(product_moment(&p, 1, 1, &ctrl).unwrap() >= ex * ey * (1.0 - 1e-10));
    }
}

#[test]
fn correlation_properties() {
    let ctrl = moment_series_control();
    assert_eq!(correlation(&bgw(1.3, 1.0, 2.0, 1.0), &ctrl).unwrap(), 0.0);
    for t in [0.1, 0.5, 0.9] {
        let r1 = correlation(&bgw(1.7, 0.4, 1.1, t), &ctrl).unwrap();
        let r2 = correlation(&bgw(1.7, 0.4 * 7.5, 1.1 * 7.5, t), &ctrl).unwrap();
        assert!((0.0..1.0).contains(&r1));
        assert!((r1 - r2).abs() < 1e-12);
    }
}

#[test]
fn min_law_projection() {
    assert_eq!(min_law(&bgw(2.0, 3.0, 5.0, 0.7)), EwParams::new(2.0, 8.0, 0.7).unwrap());
    // P(min > t) = S(t, t)
    let p = bgw(1.4, 0.6, 0.9, 0.3);
    let m = min_law(&p);
    for t in [0.1, 0.7, 2.0] {
        assert!((m.survival(t).unwrap() - p.survival(t, t).unwrap()).abs() < 1e-15);
    }
}

#[test]
fn binomial_coefficients_match_direct_product() {
    let mut direct = 1.0;
    for k in 0..25 {
        direct *= (0.3 - k as f64) / (k as f64 + 1.0);
    }
    assert!(((gen_binom(0.3, 25) - direct) / direct).abs() < 1e-12);
}

#[test]
fn stress_strength_by_quadrature() {
    // P(X < Y) = ∫ f_X(x) P(Y > x | X = x) dx
    for p in [bgw(1.0, 1.0, 2.0, 0.5), bgw(2.3, 0.4, 1.7, 0.15), bgw(0.9, 3.0, 1.0, 1.0)] {
        let mx = p.marginal(Margin::X);
        let q = exp_sinh(0.02, |x| mx.pdf(x).unwrap() * p.cond_survival(x, x).unwrap());
        assert!((q - prob_x_less_y(&p)).abs() < 1e-9, "{p:?}: {q}");
        assert!((q - p.b1() / (p.b1() + p.b2())).abs() < 1e-9);
    }
}
