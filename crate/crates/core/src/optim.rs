//! Unconstrained minimizers: Nelder–Mead and BFGS.

/// Outcome of a minimization.
#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub fx: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMeadOptions {
    pub initial_step: f64,
    pub f_tol: f64,
    pub x_tol: f64,
    pub max_iter: usize,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            initial_step: 0.25,
            f_tol: 1e-11,
            x_tol: 1e-9,
            max_iter: 20_000,
        }
    }
}

/// Nelder–Mead with dimension-adaptive coefficients. Non-finite function
/// values are treated as +∞.
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(mut f: F, x0: &[f64], opts: &NelderMeadOptions) -> Minimum {
    let n = x0.len();
    let nf = n as f64;
    let (alpha, gamma, rho, sigma) = (1.0, 1.0 + 2.0 / nf, 0.75 - 1.0 / (2.0 * nf), 1.0 - 1.0 / nf);
    let mut eval = |x: &[f64]| {
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut simplex: Vec<Vec<f64>> = vec![x0.to_vec()];
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += opts.initial_step;
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| eval(v)).collect();

    let mut iter = 0;
    let mut converged = false;
    while iter < opts.max_iter {
        iter += 1;
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let spread = (values[n] - values[0]).abs();
        let size = simplex[1..]
            .iter()
            .flat_map(|v| v.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if values[0].is_finite() && spread <= opts.f_tol * (1.0 + values[0].abs()) && size <= opts.x_tol {
            converged = true;
            break;
        }

        let centroid: Vec<f64> = (0..n)
            .map(|k| simplex[..n].iter().map(|v| v[k]).sum::<f64>() / nf)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            centroid.iter().zip(&simplex[n]).map(|(c, w)| c + t * (c - w)).collect()
        };

        let xr = along(alpha);
        let fr = eval(&xr);
        if fr < values[0] {
            let xe = along(alpha * gamma);
            let fe = eval(&xe);
            if fe < fr {
                simplex[n] = xe;
                values[n] = fe;
            } else {
                simplex[n] = xr;
                values[n] = fr;
            }
            continue;
        }
        if fr < values[n - 1] {
            simplex[n] = xr;
            values[n] = fr;
            continue;
        }
        let (xc, fc) = if fr < values[n] {
            let xc = along(alpha * rho);
            let fc = eval(&xc);
            (xc, fc)
        } else {
            let xc = along(-rho);
            let fc = eval(&xc);
            (xc, fc)
        };
        if fc < values[n].min(fr) {
            simplex[n] = xc;
            values[n] = fc;
            continue;
        }
        for i in 1..=n {
            let shrunk: Vec<f64> = simplex[i]
                .iter()
                .zip(&simplex[0])
                .map(|(v, b)| b + sigma * (v - b))
                .collect();
            values[i] = eval(&shrunk);
            simplex[i] = shrunk;
        }
    }
    let best = (0..=n).min_by(|&i, &j| values[i].total_cmp(&values[j])).unwrap();
    Minimum {
        x: simplex[best].clone(),
        fx: values[best],
        iterations: iter,
        converged,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BfgsOptions {
    pub grad_tol: f64,
    pub max_iter: usize,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        Self {
            grad_tol: 1e-8,
            max_iter: 500,
        }
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// BFGS with backtracking (Armijo) line search. `fg` returns the value and
/// gradient; non-finite values reject the trial step.
pub fn bfgs<F: FnMut(&[f64]) -> (f64, Vec<f64>)>(mut fg: F, x0: &[f64], opts: &BfgsOptions) -> Minimum {
    let n = x0.len();
    let mut x = x0.to_vec();
    let (mut fx, mut g) = fg(&x);
    let mut h = identity(n);
    let mut iter = 0;
    let mut converged = fx.is_finite() && norm(&g) <= opts.grad_tol;
    while !converged && iter < opts.max_iter && fx.is_finite() {
        iter += 1;
        let mut d: Vec<f64> = (0..n).map(|i| -dot(&h[i], &g)).collect();
        let mut slope = dot(&g, &d);
        if slope >= 0.0 {
            h = identity(n);
            d = g.iter().map(|v| -v).collect();
            slope = dot(&g, &d);
        }
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let xt: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + step * b).collect();
            let (ft, gt) = fg(&xt);
            if ft.is_finite() && ft <= fx + 1e-4 * step * slope {
                accepted = Some((xt, ft, gt));
                break;
            }
            step *= 0.5;
        }
        let Some((xn, fnew, gn)) = accepted else { break };
        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * norm(&s) * norm(&y) {
            let hy: Vec<f64> = (0..n).map(|i| dot(&h[i], &y)).collect();
            let yhy = dot(&y, &hy);
            for i in 0..n {
                for j in 0..n {
                    h[i][j] += (sy + yhy) * s[i] * s[j] / (sy * sy) - (hy[i] * s[j] + s[i] * hy[j]) / sy;
                }
            }
        }
        let df = (fx - fnew).abs();
        x = xn;
        fx = fnew;
        g = gn;
        if norm(&g) <= opts.grad_tol || (df <= 1e-15 * (1.0 + fx.abs()) && norm(&s) < 1e-12) {
            converged = norm(&g) <= opts.grad_tol * 1e3;
            break;
        }
    }
    Minimum {
        x,
        fx,
        iterations: iter,
        converged,
    }
}

fn identity(n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

/// Invert a small dense matrix by Gauss–Jordan elimination with partial
/// pivoting. `None` when singular.
pub fn invert(m: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = m.len();
    let mut a: Vec<Vec<f64>> = m.to_vec();
    let mut inv = identity(n);
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        inv.swap(col, piv);
        let d = a[col][col];
        for k in 0..n {
            a[col][k] /= d;
            inv[col][k] /= d;
        }
        for r in 0..n {
            if r != col {
                let factor = a[r][col];
                for k in 0..n {
                    a[r][k] -= factor * a[col][k];
                    inv[r][k] -= factor * inv[col][k];
                }
            }
        }
    }
    Some(inv)
}
