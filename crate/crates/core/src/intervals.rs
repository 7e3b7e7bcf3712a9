//! The intervals `s_k = [p_k^2, p_{k+1}^2 - 1]` with exact prime counts.
//!
//! Every composite in `s_k` has a prime factor `<= p_k`, so sieving the
//! window by `P_k` alone leaves exactly the primes of `s_k`.

use rayon::prelude::*;

use crate::analytic::{li_dd, log_integral_between};
use crate::dataset::fmt_real;
use crate::error::{Error, Result};
use crate::numerics::Dd;
use crate::sieve::{checked_square, count_coprime, sieve_window_with, PrimeTable, SieveConfig};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntervalRecord {
    pub k: usize,
    pub p_k: u64,
    pub p_next: u64,
    /// `g_k = p_{k+1} - p_k`.
    pub gap: u64,
    /// `l_k = p_{k+1}^2 - p_k^2`.
    pub length: u64,
    pub pi_k: u64,
    pub li_k: f64,
    /// `l_k / log p_{k+1}^2`.
    pub pnt_estimate: f64,
    /// `pi(p_{k+1}^2)`.
    pub pi_upper: u64,
    /// `li(p_{k+1}^2)`, accumulated from `li(4)` and the `li_j` in double-double.
    pub li_upper: Dd,
}

impl IntervalRecord {
    pub const CSV_HEADER: &'static str = "k,p_k,p_next,gap,length,pi_k,li_k,pnt_estimate";

    pub fn lo(&self) -> u64 {
        self.p_k * self.p_k
    }

    /// Exclusive upper end, `p_{k+1}^2`.
    pub fn hi(&self) -> u64 {
        self.p_next * self.p_next
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.k,
            self.p_k,
            self.p_next,
            self.gap,
            self.length,
            self.pi_k,
            fmt_real(self.li_k),
            fmt_real(self.pnt_estimate)
        )
    }
}

/// Records for `k = 1..=k_max`, contiguous.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct IntervalSet {
    records: Vec<IntervalRecord>,
}

impl IntervalSet {
    /// Rebuilds a set from stored records, checking contiguity.
    pub fn from_records(records: Vec<IntervalRecord>) -> Result<Self> {
        for (i, r) in records.iter().enumerate() {
            if r.k != i + 1 {
                return Err(Error::domain(format!("record {} has k = {}", i + 1, r.k)));
            }
            if i > 0 && records[i - 1].p_next != r.p_k {
                return Err(Error::domain(format!("records {} and {} are not contiguous", i, i + 1)));
            }
        }
        Ok(IntervalSet { records })
    }

    pub fn k_max(&self) -> usize {
        self.records.len()
    }

    pub fn records(&self) -> &[IntervalRecord] {
        &self.records
    }

    /// Record `k` (1-based).
    pub fn record(&self, k: usize) -> Option<&IntervalRecord> {
        k.checked_sub(1).and_then(|i| self.records.get(i))
    }

    /// Exclusive upper end of the covered range.
    pub fn covered_hi(&self) -> u64 {
        self.records.last().map_or(4, IntervalRecord::hi)
    }

    /// Appends records up to `k_max`; a no-op if already there.
    pub fn extend_to(&mut self, k_max: usize, table: &PrimeTable, cfg: &SieveConfig) -> Result<()> {
        let start = self.records.len() + 1;
        if k_max < start {
            return Ok(());
        }
        table.p(k_max + 1)?;
        checked_square(table.p(k_max + 1)?)?;
        let raw: Vec<(IntervalRecord, Dd)> = (start..=k_max)
            .into_par_iter()
            .map(|k| raw_record(k, table, cfg))
            .collect::<Result<_>>()?;
        let (mut pi_acc, mut li_acc) = match self.records.last() {
            Some(r) => (r.pi_upper, r.li_upper),
            None => (2, li_dd(4.0)?),
        };
        self.records.reserve(raw.len());
        for (mut r, li) in raw {
            pi_acc += r.pi_k;
            li_acc += li;
            r.pi_upper = pi_acc;
            r.li_upper = li_acc;
            self.records.push(r);
        }
        Ok(())
    }
}

fn raw_record(k: usize, table: &PrimeTable, cfg: &SieveConfig) -> Result<(IntervalRecord, Dd)> {
    let (lo, hi) = interval_bounds(k, table)?;
    let p_k = table.p(k)?;
    let p_next = table.p(k + 1)?;
    let window = hi - lo;
    if window > cfg.max_window {
        return Err(Error::resource(format!(
            "s_{k} has {window} entries, above the window budget"
        )));
    }
    let pi_k = count_coprime(lo, hi - 1, table.first(k)?, cfg.segment_len);
    let li = log_integral_between(lo, hi);
    let rec = IntervalRecord {
        k,
        p_k,
        p_next,
        gap: p_next - p_k,
        length: window,
        pi_k,
        li_k: li.to_f64(),
        pnt_estimate: window as f64 / (hi as f64).ln(),
        pi_upper: 0,
        li_upper: Dd::ZERO,
    };
    Ok((rec, li))
}

/// `(p_k^2, p_{k+1}^2)`, the half-open span of `s_k`.
pub fn interval_bounds(k: usize, table: &PrimeTable) -> Result<(u64, u64)> {
    if k == 0 {
        return Err(Error::domain("interval index starts at 1"));
    }
    Ok((checked_square(table.p(k)?)?, checked_square(table.p(k + 1)?)?))
}

pub fn build_intervals(k_max: usize, table: &PrimeTable) -> Result<IntervalSet> {
    build_intervals_with(k_max, table, &SieveConfig::default())
}

pub fn build_intervals_with(k_max: usize, table: &PrimeTable, cfg: &SieveConfig) -> Result<IntervalSet> {
    if k_max == 0 {
        return Err(Error::domain("K_max must be at least 1"));
    }
    let mut set = IntervalSet::default();
    set.extend_to(k_max, table, cfg)?;
    Ok(set)
}

/// The `k` with `p_k^2 <= x < p_{k+1}^2`.
pub fn locate_interval(x: u64, set: &IntervalSet) -> Result<usize> {
    if x < 4 || x >= set.covered_hi() {
        return Err(Error::domain(format!(
            "x = {x} outside the covered range [4, {})",
            set.covered_hi()
        )));
    }
    let i = set.records.partition_point(|r| r.hi() <= x);
    Ok(i + 1)
}

/// `(pi(x) - pi(p_k^2), li(x) - li(p_k^2))` for `x` in `s_k`.
pub fn partial_counts(x: u64, set: &IntervalSet, table: &PrimeTable) -> Result<(u64, f64)> {
    let k = locate_interval(x, set)?;
    let lo = set.record(k).expect("located").lo();
    let pi = count_coprime(lo, x, table.first(k)?, crate::sieve::DEFAULT_SEGMENT_LEN);
    Ok((pi, log_integral_between(lo, x).to_f64()))
}

/// Consecutive prime gaps with both ends in `s_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct GapSeries {
    pub k: usize,
    /// `(p_i, g_i = p_{i+1} - p_i)`.
    pub gaps: Vec<(u64, u64)>,
    pub mean_gap: f64,
    /// `log p_{k+1}^2`.
    pub theoretical_mean: f64,
}

pub fn gap_series(k: usize, set: &IntervalSet, table: &PrimeTable) -> Result<GapSeries> {
    let r = set
        .record(k)
        .ok_or_else(|| Error::domain(format!("k = {k} outside 1..={}", set.k_max())))?;
    let w = sieve_window_with(r.lo(), r.hi() - 1, table.first(k)?, &SieveConfig::default())?;
    let primes: Vec<u64> = w.survivors().collect();
    let gaps: Vec<(u64, u64)> = primes.windows(2).map(|p| (p[0], p[1] - p[0])).collect();
    let mean_gap = if gaps.is_empty() {
        f64::NAN
    } else {
        gaps.iter().map(|g| g.1 as f64).sum::<f64>() / gaps.len() as f64
    };
    Ok(GapSeries {
        k,
        gaps,
        mean_gap,
        theoretical_mean: (r.hi() as f64).ln(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sieve::{build_prime_table, count_primes_upto};
    use proptest::prelude::*;

    fn trial_prime(n: u64) -> bool {
        n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
    }

    #[test]
    fn first_rows() {
        let t = build_prime_table(10_000).unwrap();
        let set = build_intervals(3, &t).unwrap();
        let r = set.record(1).unwrap();
        assert_eq!((r.p_k, r.p_next, r.gap, r.length, r.pi_k), (2, 3, 1, 5, 2));
        let r = set.record(3).unwrap();
        assert_eq!((r.p_k, r.p_next, r.length, r.pi_k), (5, 7, 24, 6));
        assert_eq!(set.records().iter().map(|r| r.pi_k).collect::<Vec<_>>(), vec![2, 5, 6]);
        assert_eq!(
            r.csv_row(),
            format!("3,5,7,2,24,6,{},{}", fmt_real(r.li_k), fmt_real(r.pnt_estimate))
        );
        assert!(build_intervals(0, &t).is_err());
    }

    #[test]
    fn example_table_row() {
        let t = build_prime_table(10_000).unwrap();
        let (lo, hi) = interval_bounds(1000, &t).unwrap();
        assert_eq!((t.p(1000).unwrap(), t.p(1001).unwrap()), (7919, 7927));
        assert_eq!(hi - lo, 126_768);
        let (lo, hi) = interval_bounds(500, &t).unwrap();
        assert_eq!(hi - lo, 71_520);
    }

    #[test]
    fn locate() {
        let t = build_prime_table(1000).unwrap();
        let set = build_intervals(10, &t).unwrap();
        assert_eq!(locate_interval(25, &set).unwrap(), 3);
        assert_eq!(locate_interval(48, &set).unwrap(), 3);
        assert_eq!(locate_interval(24, &set).unwrap(), 2);
        assert_eq!(locate_interval(4, &set).unwrap(), 1);
        assert!(locate_interval(3, &set).is_err());
        assert!(locate_interval(31 * 31, &set).is_err());
        assert_eq!(locate_interval(31 * 31 - 1, &set).unwrap(), 10);
    }

    #[test]
    fn partial() {
        let t = build_prime_table(1000).unwrap();
        let set = build_intervals(10, &t).unwrap();
        assert_eq!(partial_counts(25, &set, &t).unwrap(), (0, 0.0));
        assert_eq!(partial_counts(48, &set, &t).unwrap().0, 6);
        assert_eq!(partial_counts(30, &set, &t).unwrap().0, 1);
        let (pi, li) = partial_counts(48, &set, &t).unwrap();
        assert_eq!(pi, set.record(3).unwrap().pi_k);
        assert!(li > 0.0 && li < set.record(3).unwrap().li_k);
    }

    #[test]
    fn gaps() {
        let t = build_prime_table(10_000).unwrap();
        let set = build_intervals(500, &t).unwrap();
        let g = gap_series(3, &set, &t).unwrap();
        assert_eq!(g.gaps, vec![(29, 2), (31, 6), (37, 4), (41, 2), (43, 4)]);
        assert_eq!(gap_series(1, &set, &t).unwrap().gaps, vec![(5, 2)]);
        let g = gap_series(500, &set, &t).unwrap();
        assert!((g.theoretical_mean - 2.0 * 3581f64.ln()).abs() < 1e-12);
        assert!((g.mean_gap / g.theoretical_mean - 1.0).abs() < 0.02, "{}", g.mean_gap);
        assert!(gap_series(501, &set, &t).is_err());
    }

    #[test]
    fn identities_over_range() {
        let t = build_prime_table(100_000).unwrap();
        let set = build_intervals(1000, &t).unwrap();
        let mut len_sum = 0;
        for r in set.records() {
            assert_eq!(r.length, 2 * r.p_next * r.gap - r.gap * r.gap);
            assert!(r.pi_k >= 1);
            assert!(r.pnt_estimate < r.li_k && r.li_k < r.length as f64 / (r.lo() as f64).ln());
            len_sum += r.length;
            assert_eq!(len_sum, r.hi() - 4);
        }
        for k in [1, 2, 10, 99, 500, 1000] {
            let r = set.record(k).unwrap();
            assert_eq!(r.pi_upper, count_primes_upto(r.hi(), &t).unwrap());
        }
        let mean: f64 = (500..=1000)
            .map(|k| {
                let r = set.record(k).unwrap();
                r.pi_k as f64 / r.pnt_estimate
            })
            .sum::<f64>()
            / 501.0;
        assert!((0.95..=1.05).contains(&mean), "{mean}");
    }

    #[test]
    fn extend_matches_single_shot() {
        let t = build_prime_table(10_000).unwrap();
        let whole = build_intervals(300, &t).unwrap();
        let mut parts = build_intervals(70, &t).unwrap();
        parts.extend_to(150, &t, &SieveConfig::default()).unwrap();
        parts.extend_to(300, &t, &SieveConfig::default()).unwrap();
        assert_eq!(whole, parts);
        let rebuilt = IntervalSet::from_records(whole.records().to_vec()).unwrap();
        assert_eq!(rebuilt, whole);
        assert!(IntervalSet::from_records(whole.records()[1..].to_vec()).is_err());
    }

    #[test]
    fn small_segments_agree() {
        let t = build_prime_table(10_000).unwrap();
        let a = build_intervals(200, &t).unwrap();
        let b = build_intervals_with(200, &t, &SieveConfig::default().with_segment_len(64)).unwrap();
        assert_eq!(a, b);
    }

    proptest! {
        #[test]
        fn interval_counts_match_trial_division(k in 1usize..60) {
            let t = build_prime_table(1000).unwrap();
            let set = build_intervals(k, &t).unwrap();
            let r = set.record(k).unwrap();
            let brute = (r.lo()..r.hi()).filter(|&n| trial_prime(n)).count() as u64;
            prop_assert_eq!(r.pi_k, brute);
        }
    }
}
