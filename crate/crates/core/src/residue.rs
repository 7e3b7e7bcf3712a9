//! Residue patterns modulo primorials and the Legendre identity.
//!
//! `R_k(n) = prod_{i<=k} rho_i(n)` is 1 exactly when `n` is coprime to
//! `p_k#`, and `S(A, p_k#)` counts such `n` in a window `A`. The count can be
//! taken directly from a sieve or from inclusion–exclusion over the
//! squarefree divisors of `p_k#`:
//!
//! `S(A, p_k#) = sum_{d | p_k#} mu(d) (floor(hi/d) - floor((lo-1)/d))`.
//!
//! Divisors are enumerated depth-first in increasing prime order and a branch
//! is cut as soon as the partial product passes the admissibility bound, which
//! is what keeps the truncated sums polynomial in `k`.

use std::collections::BTreeSet;

use num_bigint::BigUint;

use crate::analytic::MertensTable;
use crate::error::{Error, Result};
use crate::intervals::interval_bounds;
use crate::numerics::sum::CompensatedSum;
use crate::sieve::{count_coprime, PrimeTable, SieveConfig};

/// Default cap on admissible inclusion–exclusion terms.
pub const DEFAULT_TERM_CAP: u64 = 1 << 27;

/// An inclusive window `[lo, hi]`, optionally remembering that it is `s_k^j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Window {
    pub lo: u64,
    pub hi: u64,
    pub shift: Option<(usize, u64)>,
}

impl Window {
    pub fn new(lo: u64, hi: u64) -> Result<Self> {
        if lo == 0 || hi < lo {
            return Err(Error::domain(format!("window needs 1 <= lo <= hi, got [{lo}, {hi}]")));
        }
        Ok(Window { lo, hi, shift: None })
    }

    /// `s_k^j = [p_k^2 + j, p_{k+1}^2 - 1 + j]` with `0 <= j < p_k#`.
    pub fn shifted(k: usize, j: u64, table: &PrimeTable) -> Result<Self> {
        let (lo, hi) = interval_bounds(k, table)?;
        if let Some(period) = primorial_u64(k, table)? {
            if j >= period {
                return Err(Error::domain(format!("shift {j} not below p_{k}# = {period}")));
            }
        }
        let over = || Error::resource(format!("s_{k}^{j} overflows 64 bits"));
        Ok(Window {
            lo: lo.checked_add(j).ok_or_else(over)?,
            hi: (hi - 1).checked_add(j).ok_or_else(over)?,
            shift: Some((k, j)),
        })
    }

    /// `s_k = s_k^0`.
    pub fn interval(k: usize, table: &PrimeTable) -> Result<Self> {
        Window::shifted(k, 0, table)
    }

    pub fn len(&self) -> u64 {
        self.hi - self.lo + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CountMethod {
    Direct,
    LegendreFull,
    LegendreTruncated,
}

impl CountMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            CountMethod::Direct => "direct",
            CountMethod::LegendreFull => "legendre_full",
            CountMethod::LegendreTruncated => "legendre_truncated",
        }
    }
}

/// `S(A, p_k#)` together with how it was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CoprimeCount {
    pub window: Window,
    pub k: usize,
    pub count: u64,
    pub method: CountMethod,
    /// Nonzero inclusion–exclusion terms; zero for the direct method.
    pub terms_evaluated: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimorialValue {
    pub k: usize,
    pub value: BigUint,
}

/// `p_k# = prod_{i<=k} p_i`; `p_0# = 1`.
pub fn primorial(k: usize, table: &PrimeTable) -> Result<PrimorialValue> {
    let value = table.first(k)?.iter().fold(BigUint::from(1u32), |acc, &p| acc * p);
    Ok(PrimorialValue { k, value })
}

/// `p_k#` when it is below `2^63`.
pub fn primorial_u64(k: usize, table: &PrimeTable) -> Result<Option<u64>> {
    let mut acc: u64 = 1;
    for &p in table.first(k)? {
        match acc.checked_mul(p) {
            Some(v) if v < 1 << 63 => acc = v,
            _ => return Ok(None),
        }
    }
    Ok(Some(acc))
}

/// `rho_i(n)`: `p_i` if it divides `n`, else 1.
pub fn rho(i: usize, n: u64, table: &PrimeTable) -> Result<u64> {
    if n == 0 {
        return Err(Error::domain("rho needs n >= 1"));
    }
    let p = table.p(i)?;
    Ok(if n.is_multiple_of(p) { p } else { 1 })
}

/// `R_k(n)`, the product of the primes `<= p_k` dividing `n`.
///
/// It divides `n`, so it always fits in a `u64`.
pub fn big_r(k: usize, n: u64, table: &PrimeTable) -> Result<u64> {
    if n == 0 {
        return Err(Error::domain("R_k needs n >= 1"));
    }
    Ok(table.first(k)?.iter().filter(|&&p| n.is_multiple_of(p)).product())
}

pub fn count_coprime_direct(window: Window, k: usize, table: &PrimeTable) -> Result<CoprimeCount> {
    count_coprime_direct_with(window, k, table, &SieveConfig::default())
}

pub fn count_coprime_direct_with(
    window: Window,
    k: usize,
    table: &PrimeTable,
    cfg: &SieveConfig,
) -> Result<CoprimeCount> {
    if k == 0 {
        return Err(Error::domain("k must be at least 1"));
    }
    if window.len() > cfg.max_window {
        return Err(Error::resource(format!(
            "window of {} entries exceeds the budget {}",
            window.len(),
            cfg.max_window
        )));
    }
    let count = count_coprime(window.lo, window.hi, table.first(k)?, cfg.segment_len);
    Ok(CoprimeCount {
        window,
        k,
        count,
        method: CountMethod::Direct,
        terms_evaluated: 0,
    })
}

pub fn count_coprime_legendre(
    window: Window,
    k: usize,
    table: &PrimeTable,
    truncate_below: Option<u64>,
) -> Result<CoprimeCount> {
    count_coprime_legendre_with(window, k, table, truncate_below, DEFAULT_TERM_CAP)
}

/// Inclusion–exclusion over squarefree `d | p_k#` with `d <= hi` (and
/// `d < truncate_below` when given); larger `d` contribute nothing or are dropped.
pub fn count_coprime_legendre_with(
    window: Window,
    k: usize,
    table: &PrimeTable,
    truncate_below: Option<u64>,
    term_cap: u64,
) -> Result<CoprimeCount> {
    if k == 0 {
        return Err(Error::domain("k must be at least 1"));
    }
    let primes = table.first(k)?;
    // admissible d satisfy d <= limit
    let limit = match truncate_below {
        Some(0) | Some(1) => 0,
        Some(t) => window.hi.min(t - 1),
        None => window.hi,
    };
    let mut walk = Walk {
        primes,
        limit,
        terms: 0,
        cap: term_cap,
    };
    let (lo1, hi) = (window.lo - 1, window.hi);
    let mut acc: i128 = 0;
    walk.visit(0, 1, 1, &mut |d, mu| acc += mu as i128 * (hi / d - lo1 / d) as i128)?;
    if acc < 0 {
        // truncation can overshoot; a count is never negative
        acc = 0;
    }
    Ok(CoprimeCount {
        window,
        k,
        count: acc as u64,
        method: if truncate_below.is_some() {
            CountMethod::LegendreTruncated
        } else {
            CountMethod::LegendreFull
        },
        terms_evaluated: walk.terms,
    })
}

struct Walk<'a> {
    primes: &'a [u64],
    limit: u64,
    terms: u64,
    cap: u64,
}

impl Walk<'_> {
    /// Visits `d` and every admissible multiple of `d` by primes from `start` on.
    fn visit(&mut self, start: usize, d: u64, mu: i8, f: &mut impl FnMut(u64, i8)) -> Result<()> {
        if d > self.limit {
            return Ok(());
        }
        self.terms += 1;
        if self.terms > self.cap {
            return Err(Error::resource(format!(
                "inclusion-exclusion exceeds {} admissible terms",
                self.cap
            )));
        }
        f(d, mu);
        for i in start..self.primes.len() {
            match d.checked_mul(self.primes[i]) {
                Some(next) if next <= self.limit => self.visit(i + 1, next, -mu, f)?,
                _ => break,
            }
        }
        Ok(())
    }
}

/// `|A| prod_{p in P_k} (1 - 1/p)`, the mean of `S(A, p_k#)` over all shifts of `A`.
pub fn expected_legendre(window_length: u64, k: usize, table: &PrimeTable) -> Result<f64> {
    if k == 0 {
        return Err(Error::domain("k must be at least 1"));
    }
    let m = MertensTable::new(table, k)?;
    Ok((m.product(k) * crate::numerics::Dd::from_u64(window_length)).to_f64())
}

/// The truncated Legendre sum in expectation form:
/// `l_k * sum_{d | p_k#, d < p_{k+1}^2} mu(d) / d`.
///
/// This is the average over all shifts `j` of the truncated floor sums on
/// `s_k^j`. On `s_k^0` itself truncation at `p_{k+1}^2` drops nothing, so the
/// floor form would just return `pi_k`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TruncatedEstimate {
    pub k: usize,
    pub value: f64,
    /// Admissible divisors, `d = 1` included.
    pub terms: u64,
}

pub fn truncated_legendre_estimate(k: usize, table: &PrimeTable) -> Result<TruncatedEstimate> {
    let (lo, hi) = interval_bounds(k, table)?;
    let primes = table.first(k)?;
    // tail[i] = sum_{j >= i} 1/p_j lets a whole row of leaves be added at once
    let mut tail = vec![0.0; primes.len() + 1];
    for i in (0..primes.len()).rev() {
        tail[i] = tail[i + 1] + 1.0 / primes[i] as f64;
    }
    let mut sum = CompensatedSum::new();
    let mut terms = 0u64;
    mobius_reciprocal_sum(primes, &tail, hi - 1, 0, 1, 1.0, &mut sum, &mut terms);
    Ok(TruncatedEstimate {
        k,
        value: (hi - lo) as f64 * sum.value(),
        terms,
    })
}

#[allow(clippy::too_many_arguments)]
fn mobius_reciprocal_sum(
    primes: &[u64],
    tail: &[f64],
    limit: u64,
    start: usize,
    d: u64,
    signed_recip: f64,
    sum: &mut CompensatedSum,
    terms: &mut u64,
) {
    sum.add(signed_recip);
    *terms += 1;
    // children d*p_i for i in [start, end)
    let end = start + primes[start..].partition_point(|&p| d.saturating_mul(p) <= limit);
    let mut i = start;
    while i < end {
        let next = d * primes[i];
        if i + 1 < end && next.saturating_mul(primes[i + 1]) <= limit {
            mobius_reciprocal_sum(
                primes,
                tail,
                limit,
                i + 1,
                next,
                -signed_recip / primes[i] as f64,
                sum,
                terms,
            );
            i += 1;
        } else {
            // no child from here on has grandchildren: add the remaining leaves in bulk
            sum.add(-signed_recip * (tail[i] - tail[end]));
            *terms += (end - i) as u64;
            break;
        }
    }
}

/// Per-`k` ratios against `l_k / log p_{k+1}^2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LegendreRow {
    pub k: usize,
    /// Full Legendre expectation, `l_k prod (1 - 1/p)`.
    pub ratio_full: f64,
    pub ratio_truncated: f64,
    /// `pi_k` itself.
    pub pi_ratio: f64,
    pub terms: u64,
}

pub fn legendre_scan(
    ks: std::ops::RangeInclusive<usize>,
    set: &crate::intervals::IntervalSet,
    table: &PrimeTable,
) -> Result<Vec<LegendreRow>> {
    use rayon::prelude::*;
    let ks: Vec<usize> = ks.collect();
    let mertens = MertensTable::new(table, ks.iter().copied().max().unwrap_or(0))?;
    ks.par_iter()
        .map(|&k| {
            let r = set
                .record(k)
                .ok_or_else(|| Error::domain(format!("k = {k} outside the interval set")))?;
            let est = truncated_legendre_estimate(k, table)?;
            let full = (mertens.product(k) * crate::numerics::Dd::from_u64(r.length)).to_f64();
            Ok(LegendreRow {
                k,
                ratio_full: full / r.pnt_estimate,
                ratio_truncated: est.value / r.pnt_estimate,
                pi_ratio: r.pi_k as f64 / r.pnt_estimate,
                terms: est.terms,
            })
        })
        .collect()
}

/// `(k, admissible terms below p_{k+1}^2, l_k)`.
pub fn term_scan(ks: std::ops::RangeInclusive<usize>, table: &PrimeTable) -> Result<Vec<(usize, BigUint, u64)>> {
    ks.map(|k| {
        let (lo, hi) = interval_bounds(k, table)?;
        Ok((k, legendre_term_count(k, Some(hi), table)?, hi - lo))
    })
    .collect()
}

/// Number of squarefree `d | p_k#` with `d < bound` (`d = 1` included);
/// `2^k` when `bound` is `None`.
pub fn legendre_term_count(k: usize, bound: Option<u64>, table: &PrimeTable) -> Result<BigUint> {
    let primes = table.first(k)?;
    let Some(bound) = bound else {
        return Ok(BigUint::from(1u32) << k);
    };
    if bound <= 1 {
        return Ok(BigUint::from(0u32));
    }
    Ok(BigUint::from(count_divisors_below(primes, bound - 1, 0, 1)))
}

fn count_divisors_below(primes: &[u64], limit: u64, start: usize, d: u64) -> u64 {
    let end = start + primes[start..].partition_point(|&p| d.saturating_mul(p) <= limit);
    let mut n = 1;
    for i in start..end {
        let next = d * primes[i];
        if i + 1 < end && next.saturating_mul(primes[i + 1]) <= limit {
            n += count_divisors_below(primes, limit, i + 1, next);
        } else {
            n += (end - i) as u64;
            break;
        }
    }
    n
}

/// 1-based offsets within `s_k` of the first multiple of `p_i`, over `k` in
/// `k_range` with `k > i`.
pub fn first_appearance_positions(
    i: usize,
    table: &PrimeTable,
    k_range: std::ops::RangeInclusive<usize>,
) -> Result<BTreeSet<u64>> {
    let p = table.p(i)?;
    let mut out = BTreeSet::new();
    for k in k_range.filter(|&k| k > i) {
        let q = table.p(k)? % p;
        let r = q * q % p;
        out.insert((p - r) % p + 1);
    }
    Ok(out)
}

/// Offsets allowed by `p_k^2 mod p_i` being a nonzero quadratic residue.
pub fn first_appearance_candidates(i: usize, table: &PrimeTable) -> Result<BTreeSet<u64>> {
    let p = table.p(i)?;
    Ok((1..p).map(|a| a * a % p).map(|r| (p - r) % p + 1).collect())
}
