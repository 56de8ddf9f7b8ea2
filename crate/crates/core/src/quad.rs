//! Gauss–Legendre quadrature on panels graded toward the interval ends.

use std::f64::consts::PI;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on [−1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let kf = k as f64;
                    let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                    p0 = p1;
                    p1 = p2;
                }
                if n == 1 {
                    p0 = 1.0;
                    p1 = x;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    /// ∫_lo^hi f.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, lo: f64, hi: f64, mut f: F) -> f64 {
        let (mid, half) = ((lo + hi) * 0.5, (hi - lo) * 0.5);
        let mut s = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            s += w * f(mid + half * x);
        }
        s * half
    }
}

/// Breakpoints on [0, 1] halving toward both ends `levels` times.
pub fn graded_unit_breaks(levels: u32) -> Vec<f64> {
    let mut left: Vec<f64> = (1..=levels).rev().map(|k| 0.5f64.powi(k as i32 + 1)).collect();
    let mut b = vec![0.0];
    b.append(&mut left);
    b.push(0.5);
    let right: Vec<f64> = (1..=levels).map(|k| 1.0 - 0.5f64.powi(k as i32 + 1)).collect();
    b.extend(right);
    b.push(1.0);
    b
}

/// ∫ f over the panels delimited by `breaks`.
pub fn integrate_panels<F: FnMut(f64) -> f64>(rule: &GaussLegendre, breaks: &[f64], mut f: F) -> f64 {
    breaks.windows(2).map(|w| rule.integrate(w[0], w[1], &mut f)).sum()
}

/// ∫∫ f(s, t) ds dt over the unit square, panels graded toward every edge
/// and, in `t`, toward the diagonal `t = s`.
pub fn integrate_unit_square<F: FnMut(f64, f64) -> f64>(rule: &GaussLegendre, levels: u32, mut f: F) -> f64 {
    let breaks = graded_unit_breaks(levels);
    integrate_panels(rule, &breaks, |s| {
        let below: Vec<f64> = breaks.iter().map(|b| b * s).collect();
        let above: Vec<f64> = breaks.iter().map(|b| s + b * (1.0 - s)).collect();
        integrate_panels(rule, &below, |t| f(s, t)) + integrate_panels(rule, &above, |t| f(s, t))
    })
}
