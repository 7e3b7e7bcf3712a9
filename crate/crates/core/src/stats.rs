//! Empirical analyses over interval data: Maier-window scans and `delta_lambda`,
//! `Phi(x)` against the interval lengths `l_g(x)`, moving averages, histograms
//! with moment fits, lag correlations and the normalized bias curves.

use std::collections::BTreeMap;

use crate::dataset::{Csv, Field};
use crate::error::{Error, Result};
use crate::intervals::{interval_bounds, IntervalSet};
use crate::numerics::sum::CompensatedSum;
use crate::numerics::Dd;
use crate::sieve::{sieve_window, PrimeTable};

/// A labelled `(x, value)` series; `x` strictly increasing, all values finite.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ScanSeries {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub metadata: BTreeMap<String, String>,
}

impl ScanSeries {
    pub fn new(label: impl Into<String>) -> Self {
        ScanSeries {
            label: label.into(),
            ..Default::default()
        }
    }

    pub fn push(&mut self, x: f64, value: f64) -> Result<()> {
        if !x.is_finite() || !value.is_finite() {
            return Err(Error::domain(format!(
                "{}: non-finite point ({x}, {value})",
                self.label
            )));
        }
        if let Some(&(last, _)) = self.points.last() {
            if x <= last {
                return Err(Error::domain(format!("{}: x not increasing at {x}", self.label)));
            }
        }
        self.points.push((x, value));
        Ok(())
    }

    pub fn meta(mut self, key: &str, value: impl ToString) -> Self {
        self.metadata.insert(key.to_string(), value.to_string());
        self
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.1)
    }

    /// Two-column CSV; `x` is written as an integer when `integer_x` is set.
    pub fn to_csv(&self, header: &str, integer_x: bool) -> Csv {
        let mut csv = Csv::new(header);
        for &(x, v) in &self.points {
            let xf = if integer_x {
                Field::Int(x as i64)
            } else {
                Field::Real(x)
            };
            csv.row(&[xf, Field::Real(v)]);
        }
        csv
    }
}

/// Moment fit: sample mean and unbiased standard deviation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianFit {
    pub mean: f64,
    pub stdev: f64,
    pub sample_count: usize,
}

impl GaussianFit {
    pub fn from_samples(samples: &[f64]) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::domain("a moment fit needs at least two samples"));
        }
        let n = samples.len() as f64;
        let mean = samples.iter().copied().collect::<CompensatedSum>().value() / n;
        let ss = samples
            .iter()
            .map(|x| (x - mean) * (x - mean))
            .collect::<CompensatedSum>()
            .value();
        Ok(GaussianFit {
            mean,
            stdev: (ss / (n - 1.0)).sqrt(),
            sample_count: samples.len(),
        })
    }

    pub fn density(&self, x: f64) -> f64 {
        let z = (x - self.mean) / self.stdev;
        (-0.5 * z * z).exp() / (self.stdev * (2.0 * std::f64::consts::PI).sqrt())
    }
}

/// `Phi(x) = (log x)^lambda`.
pub fn phi(x: f64, lambda: f64) -> f64 {
    x.ln().powf(lambda)
}

/// Ratios `[pi(x + Phi(x)) - pi(x)] / (log x)^(lambda - 1)` across `s_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct MaierScan {
    pub k: usize,
    pub lambda: f64,
    pub step: u64,
    /// Sampled every `step` integers.
    pub ratios: ScanSeries,
    /// `pi(x + Phi(x)) - pi(x)` for each point of `ratios`.
    pub counts: Vec<u64>,
    /// Extremes over every admissible integer `x`, not just the sampled ones.
    pub max_ratio: f64,
    pub min_ratio: f64,
    /// `pi_k / (l_k / log p_{k+1}^2)`.
    pub whole_interval_ratio: f64,
    pub phi_lo: f64,
    pub phi_hi: f64,
}

impl MaierScan {
    /// `max ratio - 1`.
    pub fn upper_deviation(&self) -> f64 {
        self.max_ratio - 1.0
    }

    /// `1 - min ratio`.
    pub fn lower_deviation(&self) -> f64 {
        1.0 - self.min_ratio
    }

    /// `max |ratio - 1|`.
    pub fn max_abs_deviation(&self) -> f64 {
        self.upper_deviation().max(self.lower_deviation())
    }

    /// The largest `delta` for which the ratio leaves `[1 - delta, 1 + delta]` on both sides.
    pub fn two_sided_deviation(&self) -> f64 {
        self.upper_deviation().min(self.lower_deviation())
    }
}

/// Scans `x` in `[p_k^2, p_{k+1}^2)` with `x + Phi(x) < p_{k+1}^2`; the window
/// `(x, x + Phi(x)]` therefore stays inside `s_k`. `step` defaults to `ceil(Phi(p_k^2) / 100)`.
pub fn maier_scan(k: usize, lambda: f64, step: Option<u64>, table: &PrimeTable) -> Result<MaierScan> {
    if lambda.is_nan() || lambda <= 1.0 || !lambda.is_finite() {
        return Err(Error::domain(format!("lambda must exceed 1, got {lambda}")));
    }
    let (lo, hi) = interval_bounds(k, table)?;
    let length = hi - lo;
    let phi_lo = phi(lo as f64, lambda);
    if phi_lo >= length as f64 {
        return Err(Error::domain(format!(
            "Phi(p_{k}^2) = {phi_lo:.1} does not fit in s_{k} of length {length}"
        )));
    }
    let step = step.unwrap_or((phi_lo / 100.0).ceil() as u64).max(1);
    let window = sieve_window(lo, hi - 1, table.first(k)?)?;
    let prefix = window.prefix_counts();
    // primes in (x, top] from the prefix over [lo, .)
    let count = |x: u64, top: u64| (prefix[(top - lo + 1) as usize] - prefix[(x - lo + 1) as usize]) as u64;

    let mut ratios = ScanSeries::new(format!("maier k={k}"))
        .meta("k", k)
        .meta("lambda", lambda)
        .meta("step", step);
    let mut counts = Vec::new();
    let (mut max_ratio, mut min_ratio) = (f64::NEG_INFINITY, f64::INFINITY);
    let mut x = lo;
    loop {
        let l = (x as f64).ln();
        let reach = x as f64 + l.powf(lambda);
        if reach >= hi as f64 {
            break;
        }
        let c = count(x, reach.floor() as u64);
        let r = c as f64 / l.powf(lambda - 1.0);
        max_ratio = max_ratio.max(r);
        min_ratio = min_ratio.min(r);
        if (x - lo) % step == 0 {
            ratios.push(x as f64, r)?;
            counts.push(c);
        }
        x += 1;
    }
    let pi_k = window.count();
    Ok(MaierScan {
        k,
        lambda,
        step,
        ratios,
        counts,
        max_ratio,
        min_ratio,
        whole_interval_ratio: pi_k as f64 / (length as f64 / (hi as f64).ln()),
        phi_lo,
        phi_hi: phi(hi as f64, lambda),
    })
}

/// `delta_lambda` from a set of scans.
#[derive(Clone, Debug, PartialEq)]
pub struct DeltaExtraction {
    /// `(k, max ratio - 1, 1 - min ratio)`.
    pub per_interval: Vec<(usize, f64, f64)>,
    /// `min_k min(max ratio - 1, 1 - min ratio)`.
    pub delta: f64,
    /// `min_k max |ratio - 1|`.
    pub delta_max_abs: f64,
}

pub fn extract_delta(scans: &[MaierScan]) -> Result<DeltaExtraction> {
    if scans.is_empty() {
        return Err(Error::domain("no scans to extract delta from"));
    }
    Ok(DeltaExtraction {
        per_interval: scans
            .iter()
            .map(|s| (s.k, s.upper_deviation(), s.lower_deviation()))
            .collect(),
        delta: scans
            .iter()
            .map(MaierScan::two_sided_deviation)
            .fold(f64::INFINITY, f64::min),
        delta_max_abs: scans
            .iter()
            .map(MaierScan::max_abs_deviation)
            .fold(f64::INFINITY, f64::min),
    })
}

/// `l_g(x) = 2 sqrt(x) g - g^2`, the length of `s_k` when `p_{k+1}^2 = x` and `g_k = g`.
pub fn gap_length(x: f64, g: f64) -> f64 {
    2.0 * x.sqrt() * g - g * g
}

/// For each gap class `g` seen among primes up to `sqrt(x_max)`, the point past
/// which `l_g(x) > Phi(x)` for good: `(g, crossing x)`.
pub fn phi_vs_lengths(x_max: u64, lambda: f64, table: &PrimeTable) -> Result<ScanSeries> {
    let root = crate::sieve::isqrt(x_max);
    if root > table.bound() || x_max < 9 {
        return Err(Error::domain(format!("x_max = {x_max} outside [9, table bound^2]")));
    }
    let m = table.count_le(root);
    let primes = table.first(m)?;
    let mut gaps: Vec<u64> = primes.windows(2).map(|w| w[1] - w[0]).collect();
    gaps.sort_unstable();
    gaps.dedup();
    let mut out = ScanSeries::new("phi crossing")
        .meta("lambda", lambda)
        .meta("x_max", x_max);
    for g in gaps {
        if let Some(x) = phi_crossing(g as f64, lambda, x_max as f64) {
            out.push(g as f64, x)?;
        }
    }
    Ok(out)
}

/// Last `x <= x_max` where `l_g(x) - Phi(x)` turns positive; `None` if it never does.
pub fn phi_crossing(g: f64, lambda: f64, x_max: f64) -> Option<f64> {
    let f = |x: f64| gap_length(x, g) - phi(x, lambda);
    let lo = ((g + 1.0) * (g + 1.0)).max(4.0);
    if lo >= x_max || f(x_max) <= 0.0 {
        return None;
    }
    // log grid for the last sign change, then bisection
    let n = 4000;
    let (a, b) = (lo.ln(), x_max.ln());
    let mut bracket = None;
    let mut prev = lo;
    for i in 1..=n {
        let x = (a + (b - a) * i as f64 / n as f64).exp();
        if f(prev) <= 0.0 && f(x) > 0.0 {
            bracket = Some((prev, x));
        }
        prev = x;
    }
    let (mut l, mut r) = bracket?;
    for _ in 0..200 {
        let mid = 0.5 * (l + r);
        if f(mid) > 0.0 {
            r = mid;
        } else {
            l = mid;
        }
        if r - l <= 1e-12 * r {
            break;
        }
    }
    Some(r)
}

/// Centered moving average over `run` values, windows shrinking at the ends.
pub fn moving_average(series: &[f64], run: usize) -> Result<Vec<f64>> {
    if series.is_empty() {
        return Err(Error::domain("moving average of an empty series"));
    }
    if run == 0 || run > series.len() {
        return Err(Error::domain(format!("run {run} outside 1..={}", series.len())));
    }
    let (left, right) = ((run - 1) / 2, run / 2);
    let mut prefix = vec![Dd::ZERO; series.len() + 1];
    for (i, &v) in series.iter().enumerate() {
        prefix[i + 1] = prefix[i] + v;
    }
    Ok((0..series.len())
        .map(|i| {
            let a = i.saturating_sub(left);
            let b = (i + right).min(series.len() - 1);
            ((prefix[b + 1] - prefix[a]) / (b + 1 - a) as f64).to_f64()
        })
        .collect())
}

/// Density histogram over `[min, max]` in `bins` equal bins, plus a moment fit.
pub fn empirical_pdf(samples: &[f64], bins: usize) -> Result<(ScanSeries, GaussianFit)> {
    if bins == 0 {
        return Err(Error::domain("histogram needs at least one bin"));
    }
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(Error::domain("histogram samples must be finite"));
    }
    let fit = GaussianFit::from_samples(samples)?;
    let (min, max) = samples
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    let mut hist = ScanSeries::new("pdf").meta("bins", bins).meta("samples", samples.len());
    if min == max {
        hist.push(min, 1.0)?;
        return Ok((hist, GaussianFit { stdev: 0.0, ..fit }));
    }
    let width = (max - min) / bins as f64;
    let mut counts = vec![0u64; bins];
    for &x in samples {
        let i = (((x - min) / width) as usize).min(bins - 1);
        counts[i] += 1;
    }
    let n = samples.len() as f64;
    for (i, &c) in counts.iter().enumerate() {
        hist.push(min + (i as f64 + 0.5) * width, c as f64 / (n * width))?;
    }
    Ok((hist, fit))
}

/// `sum_k d_k d_{k+j} / sum_k d_k^2` over `k` with both indices in range.
///
/// The denominator uses index `k` only (not a symmetric Pearson form). With
/// `block`, the sequence is cut into non-overlapping blocks and the series
/// holds one value per block, at lag `max_lag`.
pub fn lag_correlation(deviations: &[f64], max_lag: usize, block: Option<usize>) -> Result<ScanSeries> {
    match block {
        None => {
            if deviations.len() <= max_lag {
                return Err(Error::domain(format!(
                    "{} values cannot support lag {max_lag}",
                    deviations.len()
                )));
            }
            let mut out = ScanSeries::new("lag correlation")
                .meta("max_lag", max_lag)
                .meta("form", "asymmetric: denominator over leading index");
            for j in 0..=max_lag {
                out.push(j as f64, lagged_ratio(deviations, j)?)?;
            }
            Ok(out)
        }
        Some(b) => {
            if b <= max_lag {
                return Err(Error::domain(format!("block {b} cannot support lag {max_lag}")));
            }
            let mut out = ScanSeries::new("block lag correlation")
                .meta("block", b)
                .meta("lag", max_lag)
                .meta("form", "asymmetric: denominator over leading index");
            for (i, chunk) in deviations.chunks_exact(b).enumerate() {
                out.push(i as f64, lagged_ratio(chunk, max_lag)?)?;
            }
            if out.is_empty() {
                return Err(Error::domain(format!("fewer than {b} values for one block")));
            }
            Ok(out)
        }
    }
}

fn lagged_ratio(d: &[f64], j: usize) -> Result<f64> {
    let n = d.len() - j;
    let num: CompensatedSum = (0..n).map(|k| d[k] * d[k + j]).collect();
    let den: CompensatedSum = (0..n).map(|k| d[k] * d[k]).collect();
    if den.value() == 0.0 {
        return Err(Error::domain("correlation of an all-zero sequence"));
    }
    if j == 0 {
        return Ok(1.0);
    }
    Ok(num.value() / den.value())
}

/// One row of the bias curves, evaluated at `x = p_{k+1}^2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BiasRow {
    pub k: usize,
    pub x: u64,
    /// `pi(x) - li(x)`.
    pub a: f64,
    /// `sum_{j<=k} (l_j / log p_j^2 - li_j)`.
    pub b: f64,
    /// `sum_{j<=k} (l_j / log p_{j+1}^2 - li_j)`.
    pub c: f64,
    pub delta: f64,
}

impl BiasRow {
    pub fn a_norm(&self) -> f64 {
        self.a / self.delta
    }
    pub fn b_norm(&self) -> f64 {
        self.b / self.delta
    }
    pub fn c_norm(&self) -> f64 {
        self.c / self.delta
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BiasSeries {
    pub rows: Vec<BiasRow>,
    /// Moment fit of `a / Delta_k` over all rows.
    pub fit: GaussianFit,
}

impl BiasSeries {
    pub fn normalized(&self) -> ScanSeries {
        let mut s = ScanSeries::new("(pi - li) / Delta_k");
        for r in &self.rows {
            s.push(r.x as f64, r.a_norm()).expect("increasing x");
        }
        s
    }
}

pub fn bias_series(set: &IntervalSet) -> Result<BiasSeries> {
    if set.k_max() < 2 {
        return Err(Error::domain("bias series needs at least two intervals"));
    }
    let li4 = crate::analytic::li_dd(4.0)?;
    let mut upper = CompensatedSum::new();
    let mut lower = CompensatedSum::new();
    let mut rows = Vec::with_capacity(set.k_max());
    for r in set.records() {
        let l = r.length as f64;
        upper.add(l / (r.lo() as f64).ln());
        lower.add(r.pnt_estimate);
        let li_sum = r.li_upper - li4;
        let b = (Dd::from_f64(upper.value()) - li_sum).to_f64();
        let c = (Dd::from_f64(lower.value()) - li_sum).to_f64();
        rows.push(BiasRow {
            k: r.k,
            x: r.hi(),
            a: (Dd::from_u64(r.pi_upper) - r.li_upper).to_f64(),
            b,
            c,
            delta: 0.5 * (upper.value() - lower.value()),
        });
    }
    let norm: Vec<f64> = rows.iter().map(BiasRow::a_norm).collect();
    let fit = GaussianFit::from_samples(&norm)?;
    Ok(BiasSeries { rows, fit })
}

/// `pi_k - li_k` for every record, in order.
pub fn interval_deviations(set: &IntervalSet) -> Vec<f64> {
    set.records().iter().map(|r| r.pi_k as f64 - r.li_k).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intervals::build_intervals;
    use crate::sieve::{build_prime_table, count_primes_upto};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn series_invariants() {
        let mut s = ScanSeries::new("t");
        s.push(1.0, 2.0).unwrap();
        assert!(s.push(1.0, 3.0).is_err());
        assert!(s.push(2.0, f64::NAN).is_err());
        s.push(2.0, 0.5).unwrap();
        assert_eq!(s.to_csv("x,v", true).as_str(), "x,v\n1,2\n2,0.5\n");
    }

    #[test]
    fn maier_example_rows() {
        let t = build_prime_table(10_000).unwrap();
        let s = maier_scan(500, 3.0, None, &t).unwrap();
        assert_eq!(s.phi_lo.round(), 4380.0);
        assert_eq!(s.phi_hi.round(), 4384.0);
        let s750 = maier_scan(750, 3.0, None, &t).unwrap();
        assert_eq!(s750.phi_lo.round(), 5172.0);
        assert!((s750.phi_lo / 91152.0 - 0.057).abs() < 5e-4);
        assert_eq!(s.step, 44);
        // every sampled ratio lies inside the exact extremes
        for v in s.ratios.values() {
            assert!(s.min_ratio <= v && v <= s.max_ratio);
        }
        assert!(maier_scan(3, 3.0, None, &t).is_err());
        assert!(maier_scan(50, 0.5, None, &t).is_err());
    }

    #[test]
    fn maier_round_trip() {
        let t = build_prime_table(10_000).unwrap();
        let s = maier_scan(120, 2.5, Some(7), &t).unwrap();
        for (&(x, r), &c) in s.ratios.points.iter().zip(&s.counts) {
            let l = x.ln();
            assert_eq!((r * l.powf(1.5)).round() as u64, c);
            let top = (x + l.powf(2.5)).floor() as u64;
            let exact = count_primes_upto(top, &t).unwrap() - count_primes_upto(x as u64, &t).unwrap();
            assert_eq!(c, exact);
            assert!(top < t.p(121).unwrap().pow(2));
        }
    }

    #[test]
    fn crossing() {
        let t = build_prime_table(200_000).unwrap();
        let x2 = phi_crossing(2.0, 3.0, 1e10).unwrap();
        assert!((x2.ln().powi(3) - (4.0 * x2.sqrt() - 4.0)).abs() < 1e-6 * x2.sqrt());
        assert!((2e5..2.5e5).contains(&x2), "{x2}");
        let series = phi_vs_lengths(10_000_000_000, 3.0, &t).unwrap();
        assert_eq!(series.points[0].0, 1.0);
        // past the g = 2 crossing every interval with g_k >= 2 is longer than Phi
        let set = build_intervals(3000, &t).unwrap();
        for r in set.records() {
            let x = r.hi() as f64;
            assert_eq!(r.length as f64, gap_length(x, r.gap as f64));
            if x > x2 && r.gap >= 2 {
                assert!(phi(x, 3.0) < r.length as f64, "k = {}", r.k);
            }
        }
    }

    #[test]
    fn moving_averages() {
        let v: Vec<f64> = (0..50).map(|i| (i * i % 17) as f64).collect();
        assert_eq!(moving_average(&v, 1).unwrap(), v);
        assert!(moving_average(&[3.5; 20], 7).unwrap().iter().all(|&x| x == 3.5));
        let m = moving_average(&v, 5).unwrap();
        assert_eq!(m[10], (v[8] + v[9] + v[10] + v[11] + v[12]) / 5.0);
        assert_eq!(m[0], (v[0] + v[1] + v[2]) / 3.0);
        assert!(moving_average(&[], 1).is_err());
        assert!(moving_average(&v, 51).is_err());
    }

    #[test]
    fn pdf_and_fit() {
        let (h, f) = empirical_pdf(&[-1.0, 1.0], 4).unwrap();
        assert_eq!(f.mean, 0.0);
        assert_eq!(f.stdev, 2f64.sqrt());
        assert_eq!(h.len(), 4);
        let (h, f) = empirical_pdf(&[2.0; 10], 5).unwrap();
        assert_eq!((f.stdev, h.points.clone()), (0.0, vec![(2.0, 1.0)]));
        assert!(empirical_pdf(&[1.0], 3).is_err());

        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let xs: Vec<f64> = (0..20_000).map(|_| rng.sample(StandardNormal)).collect();
        let (h, f) = empirical_pdf(&xs, 60).unwrap();
        assert!(f.mean.abs() < 0.05 && (f.stdev - 1.0).abs() < 0.05);
        let width = h.points[1].0 - h.points[0].0;
        let total: f64 = h.values().sum::<f64>() * width;
        assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn correlations() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let xs: Vec<f64> = (0..10_000).map(|_| rng.sample(StandardNormal)).collect();
        let c = lag_correlation(&xs, 10, None).unwrap();
        assert_eq!(c.points[0], (0.0, 1.0));
        for &(_, v) in &c.points[1..] {
            assert!(v.abs() < 4.0 / (xs.len() as f64).sqrt());
        }
        let b = lag_correlation(&xs, 1, Some(1000)).unwrap();
        assert_eq!(b.len(), 10);
        assert!(lag_correlation(&xs[..3], 3, None).is_err());
        // alternating sequence is perfectly anti-correlated at lag 1
        let alt: Vec<f64> = (0..100).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        assert_eq!(lag_correlation(&alt, 1, None).unwrap().points[1].1, -1.0);
    }

    #[test]
    fn bias_curves() {
        let t = build_prime_table(100_000).unwrap();
        let set = build_intervals(1500, &t).unwrap();
        let bias = bias_series(&set).unwrap();
        let deltas = crate::analytic::delta_normalizer_series(1500, &t).unwrap();
        for (r, d) in bias.rows.iter().zip(&deltas) {
            assert!(r.c < 0.0 && 0.0 < r.b, "k = {}", r.k);
            assert!((r.delta - d).abs() < 1e-9 * d);
            assert!(r.a < 0.0);
            assert!(r.a.abs() < crate::analytic::li(r.x as f64).unwrap().sqrt());
            if r.k >= 100 {
                assert!((-1.2..=-0.8).contains(&r.c_norm()), "k = {}: {}", r.k, r.c_norm());
                assert!((0.8..=1.2).contains(&r.b_norm()));
            }
        }
        let row = bias.rows[0];
        assert_eq!(row.x, 9);
        assert!((row.a - (4.0 - crate::analytic::li(9.0).unwrap())).abs() < 1e-12);
    }
}
