//! Random models for `pi_k`.
//!
//! The shift sample space is `{S(s_k^j, p_k#) : 0 <= j < p_k#}`: the coprime
//! counts of every translate of `s_k` over one period of the residue pattern.
//! Small `k` are enumerated exhaustively by sliding the window once around the
//! period. For larger `k` a shift `j` is drawn uniformly by drawing its residue
//! modulo each `p_i` independently (uniform on `Z/p_k#` by CRT), so no
//! primorial-sized integer is ever formed. Every sample has its own ChaCha
//! stream, keyed by the seed and the sample index, so results do not depend on
//! the thread schedule.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::analytic::{expected_pi_k, pnt_interval_estimate, EULER_GAMMA};
use crate::error::{Error, Result};
use crate::intervals::{interval_bounds, locate_interval, IntervalSet};
use crate::numerics::sum::CompensatedSum;
use crate::residue::primorial_u64;
use crate::sieve::PrimeTable;
use crate::stats::ScanSeries;

/// Exhaustive enumeration when `p_k# <= DEFAULT_EXHAUSTIVE_LIMIT`.
pub const DEFAULT_EXHAUSTIVE_LIMIT: u64 = 1_000_000_000;

pub const DEFAULT_SAMPLES: u64 = 100_000;

/// `e^gamma / 2`, mapping the sieve model onto the PNT scale.
pub fn mean_rescale() -> f64 {
    EULER_GAMMA.exp() / 2.0
}

/// `(e^gamma / 2)^2`.
pub fn variance_rescale() -> f64 {
    (2.0 * EULER_GAMMA).exp() / 4.0
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ShiftMode {
    Exhaustive,
    Sampled,
}

impl ShiftMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ShiftMode::Exhaustive => "exhaustive",
            ShiftMode::Sampled => "sampled",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ShiftOptions {
    /// Enumerate all shifts when `p_k#` is at most this.
    pub exhaustive_limit: u64,
    /// Draws in sampled mode.
    pub samples: u64,
    pub seed: u64,
}

impl Default for ShiftOptions {
    fn default() -> Self {
        ShiftOptions {
            exhaustive_limit: DEFAULT_EXHAUSTIVE_LIMIT,
            samples: DEFAULT_SAMPLES,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ShiftModelSummary {
    pub k: usize,
    pub mode: ShiftMode,
    pub samples: u64,
    /// `mu~_k`.
    pub mean: f64,
    /// `sigma~_k^2`: population variance when exhaustive, unbiased when sampled.
    pub variance: f64,
    pub rescaled_mean: f64,
    pub rescaled_variance: f64,
    pub seed: Option<u64>,
    /// Exact `sum_j S(s_k^j, p_k#)` over the samples.
    pub sum: u128,
    pub sum_sq: u128,
    /// Fourth central moment of the counts.
    pub fourth_moment: f64,
    pub min: u64,
    pub max: u64,
    /// `histogram[c]` = number of shifts with count `c`, for `c` in `0..=l_k`.
    pub histogram: Vec<u64>,
}

impl ShiftModelSummary {
    /// Standard error of `variance` from the fourth moment; 0 when exhaustive.
    pub fn variance_standard_error(&self) -> f64 {
        if self.mode == ShiftMode::Exhaustive {
            return 0.0;
        }
        let n = self.samples as f64;
        let s4 = self.variance * self.variance;
        ((self.fourth_moment - s4 * (n - 3.0) / (n - 1.0)) / n).max(0.0).sqrt()
    }

    pub fn rescaled_variance_standard_error(&self) -> f64 {
        variance_rescale() * self.variance_standard_error()
    }
}

/// Shift model with a single budget: exhaustive when
/// `p_k# <= budget`, otherwise `budget` sampled shifts.
pub fn shift_model(k: usize, table: &PrimeTable, budget: u64, seed: u64) -> Result<ShiftModelSummary> {
    shift_model_with(
        k,
        table,
        &ShiftOptions {
            exhaustive_limit: budget,
            samples: budget,
            seed,
        },
    )
}

pub fn shift_model_with(k: usize, table: &PrimeTable, opts: &ShiftOptions) -> Result<ShiftModelSummary> {
    if k == 0 {
        return Err(Error::domain("k must be at least 1"));
    }
    let (lo, hi) = interval_bounds(k, table)?;
    let length = (hi - lo) as usize;
    match primorial_u64(k, table)? {
        Some(period) if period <= opts.exhaustive_limit => exhaustive(k, lo, length, period, table),
        _ => sampled(k, lo, length, table, opts),
    }
}

fn exhaustive(k: usize, lo: u64, length: usize, period: u64, table: &PrimeTable) -> Result<ShiftModelSummary> {
    let primes = table.first(k)?;
    let p = period as usize;
    // bit set = divisible by some p_i
    let mut struck = vec![0u64; p.div_ceil(64)];
    for &q in primes {
        for n in (0..p).step_by(q as usize) {
            struck[n >> 6] |= 1 << (n & 63);
        }
    }
    let coprime = |n: usize| struck[n >> 6] >> (n & 63) & 1 == 0;
    let start = (lo % period) as usize;
    let mut count = (0..length).filter(|&t| coprime((start + t) % p)).count();
    let mut histogram = vec![0u64; length + 1];
    let (mut head, mut tail) = (start, (start + length) % p);
    for _ in 0..p {
        histogram[count] += 1;
        // slide: drop head, take tail
        count = count + coprime(tail) as usize - coprime(head) as usize;
        head = if head + 1 == p { 0 } else { head + 1 };
        tail = if tail + 1 == p { 0 } else { tail + 1 };
    }
    summarize(k, ShiftMode::Exhaustive, histogram, None)
}

fn sampled(k: usize, lo: u64, length: usize, table: &PrimeTable, opts: &ShiftOptions) -> Result<ShiftModelSummary> {
    if opts.samples < 2 {
        return Err(Error::domain("sampled shift model needs at least two samples"));
    }
    let primes = table.first(k)?;
    // offset of the first multiple of p_i in s_k^0
    let base: Vec<u64> = primes.iter().map(|&q| (q - lo % q) % q).collect();
    let counts: Vec<u32> = (0..opts.samples)
        .into_par_iter()
        .map_init(
            || vec![0u64; length.div_ceil(64)],
            |buf, s| {
                let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
                rng.set_stream(s);
                buf.fill(0);
                for (&q, &b) in primes.iter().zip(&base) {
                    // shifting by j moves the first multiple back by j mod q
                    let r = rng.random_range(0..q);
                    let mut t = ((b + q - r) % q) as usize;
                    while t < length {
                        buf[t >> 6] |= 1 << (t & 63);
                        t += q as usize;
                    }
                }
                let struck: u32 = buf.iter().map(|w| w.count_ones()).sum();
                length as u32 - struck
            },
        )
        .collect();
    let mut histogram = vec![0u64; length + 1];
    for c in counts {
        histogram[c as usize] += 1;
    }
    summarize(k, ShiftMode::Sampled, histogram, Some(opts.seed))
}

fn summarize(k: usize, mode: ShiftMode, histogram: Vec<u64>, seed: Option<u64>) -> Result<ShiftModelSummary> {
    let n: u64 = histogram.iter().sum();
    let (mut sum, mut sum_sq) = (0u128, 0u128);
    for (c, &h) in histogram.iter().enumerate() {
        sum += c as u128 * h as u128;
        sum_sq += (c * c) as u128 * h as u128;
    }
    let nn = n as u128;
    let mean = sum as f64 / n as f64;
    // n * sum_sq - sum^2 is exact; only the final division rounds
    let spread = (nn * sum_sq - sum * sum) as f64;
    let variance = match mode {
        ShiftMode::Exhaustive => spread / (n as f64 * n as f64),
        ShiftMode::Sampled => spread / (n as f64 * (n - 1) as f64),
    };
    let fourth_moment = histogram
        .iter()
        .enumerate()
        .map(|(c, &h)| h as f64 * (c as f64 - mean).powi(4))
        .collect::<CompensatedSum>()
        .value()
        / n as f64;
    let min = histogram.iter().position(|&h| h > 0).unwrap_or(0) as u64;
    let max = histogram.iter().rposition(|&h| h > 0).unwrap_or(0) as u64;
    Ok(ShiftModelSummary {
        k,
        mode,
        samples: n,
        mean,
        variance,
        rescaled_mean: mean_rescale() * mean,
        rescaled_variance: variance_rescale() * variance,
        seed,
        sum,
        sum_sq,
        fourth_moment,
        min,
        max,
        histogram,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReferenceKind {
    Binomial,
    Poisson,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReferenceDistribution {
    pub kind: ReferenceKind,
    /// `l_k` for the binomial; `None` for Poisson.
    pub trials: Option<u64>,
    /// `1 / log p_{k+1}^2`.
    pub success_p: f64,
    pub mean: f64,
    pub variance: f64,
}

impl ReferenceDistribution {
    /// `sigma_k(n) = sqrt(n p (1 - p))` for the first `n` trials.
    pub fn sigma_curve(&self, n: u64) -> f64 {
        let p = self.success_p;
        (n as f64 * p * (1.0 - p)).sqrt()
    }
}

/// `B(l_k, 1 / log p_{k+1}^2)`.
pub fn binomial_reference(k: usize, table: &PrimeTable) -> Result<ReferenceDistribution> {
    let (lo, hi) = interval_bounds(k, table)?;
    let l = hi - lo;
    let p = 1.0 / (hi as f64).ln();
    Ok(ReferenceDistribution {
        kind: ReferenceKind::Binomial,
        trials: Some(l),
        success_p: p,
        mean: l as f64 * p,
        variance: l as f64 * p * (1.0 - p),
    })
}

/// `Pois(l_k / log p_{k+1}^2)`.
pub fn poisson_reference(k: usize, table: &PrimeTable) -> Result<ReferenceDistribution> {
    let (_, hi) = interval_bounds(k, table)?;
    let m = pnt_interval_estimate(k, table)?;
    Ok(ReferenceDistribution {
        kind: ReferenceKind::Poisson,
        trials: None,
        success_p: 1.0 / (hi as f64).ln(),
        mean: m,
        variance: m,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VarianceRow {
    pub k: usize,
    pub mode: ShiftMode,
    pub rescaled_variance: f64,
    pub rescaled_variance_se: f64,
    pub binomial_variance: f64,
    pub poisson_variance: f64,
    /// `rescaled_variance + 3 se < binomial_variance`.
    pub below_binomial: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VarianceComparison {
    pub rows: Vec<VarianceRow>,
    /// `(k, model stdev / binomial stdev)`.
    pub series: ScanSeries,
    pub violations: Vec<usize>,
}

pub fn variance_comparison(ks: &[usize], table: &PrimeTable, opts: &ShiftOptions) -> Result<VarianceComparison> {
    let mut rows = Vec::with_capacity(ks.len());
    let mut series = ScanSeries::new("stdev ratio")
        .meta("seed", opts.seed)
        .meta("samples", opts.samples);
    let mut violations = Vec::new();
    for &k in ks {
        let m = shift_model_with(k, table, opts)?;
        let b = binomial_reference(k, table)?;
        let se = m.rescaled_variance_standard_error();
        let row = VarianceRow {
            k,
            mode: m.mode,
            rescaled_variance: m.rescaled_variance,
            rescaled_variance_se: se,
            binomial_variance: b.variance,
            poisson_variance: poisson_reference(k, table)?.variance,
            below_binomial: m.rescaled_variance + 3.0 * se < b.variance,
        };
        if !row.below_binomial {
            violations.push(k);
        }
        series.push(k as f64, (row.rescaled_variance / row.binomial_variance).sqrt())?;
        rows.push(row);
    }
    Ok(VarianceComparison {
        rows,
        series,
        violations,
    })
}

/// Mean and Poisson standard deviation of the interval-sum model at `x`:
/// `mu = sum_{j<k} l_j / log p_{j+1}^2 + (x - p_k^2) / l_k * l_k / log p_{k+1}^2`,
/// `sigma_bound = sqrt(mu)`.
pub fn sum_model_bounds(x: u64, set: &IntervalSet) -> Result<(f64, f64)> {
    let k = locate_interval(x, set)?;
    let mut mu = CompensatedSum::new();
    for r in &set.records()[..k - 1] {
        mu.add(r.pnt_estimate);
    }
    let r = set.record(k).expect("located");
    mu.add((x - r.lo()) as f64 / r.length as f64 * r.pnt_estimate);
    let mu = mu.value();
    Ok((mu, mu.sqrt()))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConjectureRow {
    pub k: usize,
    pub x: u64,
    pub pi_minus_li: f64,
    pub sqrt_li: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConjectureScan {
    pub rows: Vec<ConjectureRow>,
    /// `(x, pi(x) - li(x))`.
    pub series: ScanSeries,
    /// `k` where `|pi(x) - li(x)| >= sqrt(li(x))`.
    pub violations: Vec<usize>,
}

/// `|pi(x) - li(x)| < sqrt(li(x))` at every `x = p_{k+1}^2`.
pub fn conjecture_check(set: &IntervalSet) -> Result<ConjectureScan> {
    let mut rows = Vec::with_capacity(set.k_max());
    let mut series = ScanSeries::new("pi - li");
    let mut violations = Vec::new();
    for r in set.records() {
        let d = (crate::numerics::Dd::from_u64(r.pi_upper) - r.li_upper).to_f64();
        let row = ConjectureRow {
            k: r.k,
            x: r.hi(),
            pi_minus_li: d,
            sqrt_li: r.li_upper.to_f64().sqrt(),
        };
        if d.abs() >= row.sqrt_li {
            violations.push(r.k);
        }
        series.push(row.x as f64, d)?;
        rows.push(row);
    }
    Ok(ConjectureScan {
        rows,
        series,
        violations,
    })
}

/// Variance of `sum_k d_k` split into the diagonal and lagged cross terms:
/// `(0, sum d_k^2)` then `(j, 2 sum_k d_k d_{k+j})` for `j = 1..=max_lag`,
/// with `d` centered first.
pub fn covariance_terms(deviations: &[f64], max_lag: usize) -> Result<ScanSeries> {
    if deviations.len() <= max_lag {
        return Err(Error::domain(format!(
            "{} values cannot support lag {max_lag}",
            deviations.len()
        )));
    }
    let n = deviations.len();
    let mean = deviations.iter().copied().collect::<CompensatedSum>().value() / n as f64;
    let d: Vec<f64> = deviations.iter().map(|v| v - mean).collect();
    let mut out = ScanSeries::new("covariance terms").meta("max_lag", max_lag);
    for j in 0..=max_lag {
        let s: CompensatedSum = (0..n - j).map(|i| d[i] * d[i + j]).collect();
        out.push(j as f64, if j == 0 { s.value() } else { 2.0 * s.value() })?;
    }
    Ok(out)
}

/// `l_k prod (1 - 1/p)`, the exact mean of the exhaustive model.
pub fn model_mean(k: usize, table: &PrimeTable) -> Result<f64> {
    expected_pi_k(k, table)
}
