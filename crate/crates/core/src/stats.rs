//! Descriptive statistics and sample dependence coefficients.

use serde::Serialize;

use crate::data::BivariateSample;
use crate::error::{BgwError, Result};

/// Summary of a univariate sample.
///
/// Quartiles use linear interpolation between order statistics (R's type 7).
/// `sd` divides by `n`; `skewness` is m3/m2^{3/2}; `kurtosis` is m4/m2^2
/// (not excess).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Descriptives {
    pub n: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub mean: f64,
    pub sd: f64,
    pub skewness: f64,
    pub kurtosis: f64,
}

/// Type-7 sample quantile of already sorted data.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn describe(xs: &[f64]) -> Result<Descriptives> {
    if xs.is_empty() {
        return Err(BgwError::Data("cannot describe an empty sample".into()));
    }
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = xs.len();
    let m = mean(xs);
    let central = |k: i32| xs.iter().map(|x| (x - m).powi(k)).sum::<f64>() / n as f64;
    let (m2, m3, m4) = (central(2), central(3), central(4));
    Ok(Descriptives {
        n,
        min: sorted[0],
        q1: quantile_sorted(&sorted, 0.25),
        median: quantile_sorted(&sorted, 0.5),
        q3: quantile_sorted(&sorted, 0.75),
        max: sorted[n - 1],
        mean: m,
        sd: m2.sqrt(),
        skewness: m3 / m2.powf(1.5),
        kurtosis: m4 / (m2 * m2),
    })
}

/// Ranks 1..n, ties receiving the average of the ranks they span.
pub fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&i, &j| xs[i].total_cmp(&xs[j]));
    let mut ranks = vec![0.0; xs.len()];
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && xs[idx[end]] == xs[idx[start]] {
            end += 1;
        }
        let avg = (start + end + 1) as f64 / 2.0;
        for &i in &idx[start..end] {
            ranks[i] = avg;
        }
        start = end;
    }
    ranks
}

fn check_paired(xs: &[f64], ys: &[f64]) -> Result<()> {
    if xs.len() != ys.len() {
        return Err(BgwError::Data(format!(
            "paired samples differ in length ({} vs {})",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 2 {
        return Err(BgwError::Data("need at least two pairs".into()));
    }
    Ok(())
}

pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    check_paired(xs, ys)?;
    let (mx, my) = (mean(xs), mean(ys));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(BgwError::Data("a coordinate is constant; correlation undefined".into()));
    }
    Ok(sxy / (sxx * syy).sqrt())
}

/// Pearson correlation of average ranks.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<f64> {
    check_paired(xs, ys)?;
    pearson(&average_ranks(xs), &average_ranks(ys))
}

/// Kendall's tau-b in O(n log n).
pub fn kendall_tau_b(xs: &[f64], ys: &[f64]) -> Result<f64> {
    check_paired(xs, ys)?;
    let n = xs.len();
    let mut pairs: Vec<(f64, f64)> = xs.iter().copied().zip(ys.iter().copied()).collect();
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0).then(p.1.total_cmp(&q.1)));

    let tie_count = |eq: &dyn Fn(usize, usize) -> bool| -> u64 {
        let mut total = 0u64;
        let mut run = 1u64;
        for i in 1..n {
            if eq(i - 1, i) {
                run += 1;
            } else {
                total += run * (run - 1) / 2;
                run = 1;
            }
        }
        total + run * (run - 1) / 2
    };
    let x_ties = tie_count(&|i, j| pairs[i].0 == pairs[j].0);
    let joint_ties = tie_count(&|i, j| pairs[i] == pairs[j]);

    let mut ys_sorted: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let mut buf = vec![0.0; n];
    let discordant = merge_count(&mut ys_sorted, &mut buf);
    let y_ties = tie_count(&|i, j| ys_sorted[i] == ys_sorted[j]);

    let total = (n as u64) * (n as u64 - 1) / 2;
    if x_ties == total || y_ties == total {
        return Err(BgwError::Data("a coordinate is constant; Kendall's tau undefined".into()));
    }
    let num = total as f64 - x_ties as f64 - y_ties as f64 + joint_ties as f64
        - 2.0 * discordant as f64;
    Ok(num / ((total - x_ties) as f64).sqrt() / ((total - y_ties) as f64).sqrt())
}

/// Sort `v` ascending, returning the number of strict inversions.
fn merge_count(v: &mut [f64], buf: &mut [f64]) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut count = {
        let (l, r) = v.split_at_mut(mid);
        let (bl, br) = buf.split_at_mut(mid);
        merge_count(l, bl) + merge_count(r, br)
    };
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if v[j] < v[i] {
            buf[k] = v[j];
            count += (mid - i) as u64;
            j += 1;
        } else {
            buf[k] = v[i];
            i += 1;
        }
        k += 1;
    }
    buf[k..k + mid - i].copy_from_slice(&v[i..mid]);
    k += mid - i;
    buf[k..n].copy_from_slice(&v[j..n]);
    v.copy_from_slice(&buf[..n]);
    count
}

/// Spearman's footrule 1 − 3Σ|R−S|/(n²−1).
pub fn footrule(xs: &[f64], ys: &[f64]) -> Result<f64> {
    check_paired(xs, ys)?;
    let n = xs.len() as f64;
    let (r, s) = (average_ranks(xs), average_ranks(ys));
    let d: f64 = r.iter().zip(&s).map(|(a, b)| (a - b).abs()).sum();
    Ok(1.0 - 3.0 * d / (n * n - 1.0))
}

/// Blest's coefficient in the symmetric-weight form
/// (2n+1)/(n−1) − 12/(n(n−1)(n+1)²)·Σ(n+1−R)²S.
pub fn blest(xs: &[f64], ys: &[f64]) -> Result<f64> {
    check_paired(xs, ys)?;
    let n = xs.len() as f64;
    let (r, s) = (average_ranks(xs), average_ranks(ys));
    let acc: f64 = r.iter().zip(&s).map(|(a, b)| (n + 1.0 - a).powi(2) * b).sum();
    Ok((2.0 * n + 1.0) / (n - 1.0) - 12.0 / (n * (n - 1.0) * (n + 1.0).powi(2)) * acc)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleDependence {
    pub pearson: f64,
    pub spearman: f64,
    pub kendall: f64,
    pub footrule: f64,
    pub blest: f64,
}

pub fn sample_dependence(data: &BivariateSample) -> Result<SampleDependence> {
    let (xs, ys) = (data.xs(), data.ys());
    Ok(SampleDependence {
        pearson: pearson(&xs, &ys)?,
        spearman: spearman(&xs, &ys)?,
        kendall: kendall_tau_b(&xs, &ys)?,
        footrule: footrule(&xs, &ys)?,
        blest: blest(&xs, &ys)?,
    })
}
