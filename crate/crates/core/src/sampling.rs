//! Exact simulation of BGW pairs.
//!
//! `K` is the index of the first success in independent trials whose `i`-th
//! success probability is `θ/i`; `X` and `Y` are the minima of `K` i.i.d.
//! Weibull draws with rates `b1` and `b2` respectively.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::data::BivariateSample;
use crate::distribution::BgwParams;
use crate::error::{BgwError, Result};
use crate::special::{ln_gamma, ln_gamma_ratio};

/// Seedable ChaCha8 stream. The same seed always yields the same stream;
/// [`RngHandle::substream`] derives independent streams from one seed.
#[derive(Debug, Clone)]
pub struct RngHandle {
    seed: u64,
    inner: ChaCha8Rng,
}

impl RngHandle {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Independent stream `index` under the same master seed.
    pub fn substream(&self, index: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(self.seed);
        inner.set_stream(index.wrapping_add(1));
        Self {
            seed: self.seed,
            inner,
        }
    }

    /// Uniform draw on (0, 1].
    pub fn uniform_open0(&mut self) -> f64 {
        1.0 - self.inner.random::<f64>()
    }
}

impl RngCore for RngHandle {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }
    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }
    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

/// Trials simulated one by one before switching to inversion of the
/// closed-form survival function of `K`.
const SEQUENTIAL_TRIALS: u64 = 64;

/// ln P(K > k) = ln Γ(k+1−θ) − ln Γ(1−θ) − ln Γ(k+1), for θ < 1.
fn ln_survival_k(theta: f64, k: f64) -> f64 {
    ln_gamma_ratio(k + 1.0, -theta) - ln_gamma(1.0 - theta)
}

/// Draw `K` as a real number (exact integer value while below 2^53).
///
/// Heavy tail: P(K > k) ~ k^{−θ}/Γ(1−θ), so for small θ the value can
/// exceed the `u64` range with non-negligible probability.
pub fn sample_k_real<R: RngCore>(theta: f64, rng: &mut R) -> f64 {
    if theta >= 1.0 {
        return 1.0;
    }
    let u = 1.0 - rng.random::<f64>();
    // Trial k succeeds w.p. θ/k given earlier failures; inverse-CDF form of
    // the same process: K is the first k with P(K > k) ≤ u.
    let mut surv = 1.0;
    for k in 1..=SEQUENTIAL_TRIALS {
        surv *= 1.0 - theta / k as f64;
        if surv <= u {
            return k as f64;
        }
    }
    let target = u.ln();
    let mut lo = SEQUENTIAL_TRIALS as f64; // ln S(lo) > target
    let mut hi = lo * 2.0;
    const EXACT_LIMIT: f64 = 4_503_599_627_370_496.0; // 2^52
    while ln_survival_k(theta, hi) > target {
        lo = hi;
        hi *= 2.0;
        if hi > EXACT_LIMIT {
            // Far tail: S(k) ≈ k^{−θ}/Γ(1−θ) to relative accuracy O(1/k).
            let k = ((-target - ln_gamma(1.0 - theta)) / theta).exp();
            return k.max(EXACT_LIMIT).ceil();
        }
    }
    while hi - lo > 1.0 {
        let mid = ((lo + hi) * 0.5).floor();
        if ln_survival_k(theta, mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// Draw the trial count `K`, saturating at `u64::MAX`.
pub fn sample_k<R: RngCore>(theta: f64, rng: &mut R) -> u64 {
    let k = sample_k_real(theta, rng);
    if k >= u64::MAX as f64 {
        u64::MAX
    } else {
        k as u64
    }
}

/// Inverse-transform Weibull draw with survival e^{−rate·t^a}.
fn weibull<R: RngCore>(a: f64, rate: f64, rng: &mut R) -> f64 {
    let e = -(1.0 - rng.random::<f64>()).ln();
    (e / rate).powf(1.0 / a).max(f64::MIN_POSITIVE)
}

/// One BGW pair.
///
/// The minimum of `K` i.i.d. `W(a, b)` variables is `W(a, K·b)`, so each
/// coordinate needs a single inverse-transform draw whatever the size of `K`.
pub fn sample_pair<R: RngCore>(p: &BgwParams, rng: &mut R) -> (f64, f64) {
    let k = sample_k_real(p.theta(), rng);
    let x = weibull(p.a(), k * p.b1(), rng);
    let y = weibull(p.a(), k * p.b2(), rng);
    (x, y)
}

/// The literal construction: simulate trials one by one and take the
/// minima of `K` Weibull draws. Gives up (returns `None`) once `K`
/// would exceed `cap`. Kept as a reference for [`sample_pair`].
pub fn sample_pair_by_minima<R: RngCore>(
    p: &BgwParams,
    cap: u64,
    rng: &mut R,
) -> Option<(f64, f64)> {
    let mut k = 1u64;
    loop {
        if rng.random::<f64>() < p.theta() / k as f64 {
            break;
        }
        k += 1;
        if k > cap {
            return None;
        }
    }
    let mut x = f64::INFINITY;
    let mut y = f64::INFINITY;
    for _ in 0..k {
        x = x.min(weibull(p.a(), p.b1(), rng));
        y = y.min(weibull(p.a(), p.b2(), rng));
    }
    Some((x, y))
}

/// `n` i.i.d. pairs.
pub fn sample_n<R: RngCore>(p: &BgwParams, n: usize, rng: &mut R) -> Result<BivariateSample> {
    if n == 0 {
        return Err(BgwError::InvalidParameter("sample size must be >= 1".into()));
    }
    let pairs = (0..n).map(|_| sample_pair(p, rng)).collect();
    BivariateSample::new(pairs)
}
