//! Segmented sieve of Eratosthenes.
//!
//! Everything downstream rests on two primitives:
//!
//! * a [`PrimeTable`] holding every prime up to a bound, indexed **1-based**
//!   (`p_1 = 2`, `p_2 = 3`, `p_3 = 5`). Every formula in this crate uses that
//!   convention; an off-by-one here shifts every interval `s_k`.
//! * windowed striking of multiples of a prime set, either with *coprime*
//!   semantics (strike every multiple, so `n` survives iff no sieving prime
//!   divides it) or with *Eratosthenes* semantics (strike from `p^2` upwards,
//!   so the primes themselves survive).
//!
//! When the sieving set contains 2 the window is stored odds-only. Segments
//! are `segment_len` entries long (default 2^20) so the working set stays in
//! cache.

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Default number of entries per sieve segment.
pub const DEFAULT_SEGMENT_LEN: usize = 1 << 20;

/// Default cap on materialized window length (entries).
pub const DEFAULT_MAX_WINDOW: u64 = 1 << 32;

/// Default cap on the bound of a [`PrimeTable`].
pub const DEFAULT_MAX_TABLE_BOUND: u64 = 1 << 32;

/// Sieve tuning and memory budget.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SieveConfig {
    pub segment_len: usize,
    pub max_window: u64,
    pub max_table_bound: u64,
}

impl Default for SieveConfig {
    fn default() -> Self {
        Self {
            segment_len: DEFAULT_SEGMENT_LEN,
            max_window: DEFAULT_MAX_WINDOW,
            max_table_bound: DEFAULT_MAX_TABLE_BOUND,
        }
    }
}

impl SieveConfig {
    pub fn with_segment_len(mut self, segment_len: usize) -> Self {
        self.segment_len = segment_len.max(64);
        self
    }
}

/// All primes up to an inclusive bound.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimeTable {
    bound: u64,
    primes: Vec<u64>,
}

impl PrimeTable {
    pub fn bound(&self) -> u64 {
        self.bound
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    /// Number of primes held.
    pub fn len(&self) -> usize {
        self.primes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    /// `p_k`, 1-based.
    pub fn p(&self, k: usize) -> Result<u64> {
        if k == 0 {
            return Err(Error::domain("prime index is 1-based; k = 0 is invalid"));
        }
        self.primes.get(k - 1).copied().ok_or_else(|| {
            Error::domain(format!(
                "p_{k} requested but the table holds {} primes (bound {})",
                self.primes.len(),
                self.bound
            ))
        })
    }

    /// The first `k` primes, `P_k = {p_1, ..., p_k}`.
    pub fn first(&self, k: usize) -> Result<&[u64]> {
        if k > self.primes.len() {
            return Err(Error::domain(format!(
                "P_{k} requested but the table holds {} primes",
                self.primes.len()
            )));
        }
        Ok(&self.primes[..k])
    }

    /// Number of table primes `<= x`. Exact only for `x <= bound`.
    pub fn count_le(&self, x: u64) -> usize {
        self.primes.partition_point(|&p| p <= x)
    }

    /// Bound needed so that a table holds at least `count` primes.
    ///
    /// Uses `p_n < n (ln n + ln ln n)` for `n >= 6`.
    pub fn bound_for_count(count: usize) -> u64 {
        if count < 6 {
            return 13;
        }
        let n = count as f64;
        (n * (n.ln() + n.ln().ln())).ceil() as u64 + 1
    }
}

/// Builds the table of all primes `<= bound`.
pub fn build_prime_table(bound: u64) -> Result<PrimeTable> {
    build_prime_table_with(bound, &SieveConfig::default())
}

pub fn build_prime_table_with(bound: u64, cfg: &SieveConfig) -> Result<PrimeTable> {
    if bound < 2 {
        return Err(Error::domain(format!("prime table bound must be >= 2, got {bound}")));
    }
    if bound > cfg.max_table_bound {
        return Err(Error::resource(format!(
            "prime table bound {bound} exceeds the configured budget {}",
            cfg.max_table_bound
        )));
    }
    let base = small_primes(isqrt(bound));
    let odd_base = if base.is_empty() { &base[..] } else { &base[1..] };
    let mut primes = vec![2];
    if bound >= 3 {
        let plan = Plan::new(3, bound, odd_base, Marking::FromSquare, 2);
        plan.run(cfg.segment_len, |start, words, len| {
            for_each_clear(words, len, |i| primes.push(start + 2 * i as u64));
        });
    }
    Ok(PrimeTable { bound, primes })
}

/// Smallest table holding at least `count` primes.
pub fn build_prime_table_for_count(count: usize) -> Result<PrimeTable> {
    let table = build_prime_table(PrimeTable::bound_for_count(count))?;
    debug_assert!(table.len() >= count);
    Ok(table)
}

/// `p_k`, 1-based.
pub fn nth_prime(k: usize, table: &PrimeTable) -> Result<u64> {
    table.p(k)
}

/// Result of sieving `[lo, hi]` by a prime set with coprime semantics.
#[derive(Clone, Debug)]
pub struct SieveWindow {
    lo: u64,
    hi: u64,
    start: u64,
    stride: u64,
    len: usize,
    // set bit = struck
    struck: Vec<u64>,
}

impl SieveWindow {
    pub fn lo(&self) -> u64 {
        self.lo
    }

    pub fn hi(&self) -> u64 {
        self.hi
    }

    /// True iff `n` lies in the window and no sieving prime divides it.
    pub fn is_survivor(&self, n: u64) -> bool {
        if n < self.start || n > self.hi || !(n - self.start).is_multiple_of(self.stride) {
            return false;
        }
        let i = ((n - self.start) / self.stride) as usize;
        self.struck[i >> 6] >> (i & 63) & 1 == 0
    }

    pub fn survivors(&self) -> impl Iterator<Item = u64> + '_ {
        let mut out = Vec::new();
        for_each_clear(&self.struck, self.len, |i| {
            out.push(self.start + self.stride * i as u64)
        });
        out.into_iter()
    }

    pub fn count(&self) -> u64 {
        count_clear(&self.struck, self.len)
    }

    /// `prefix[i]` = survivors in `[lo, lo + i)`; length `hi - lo + 2`.
    pub fn prefix_counts(&self) -> Vec<u32> {
        let width = (self.hi - self.lo + 1) as usize;
        let mut prefix = vec![0u32; width + 1];
        let mut acc = 0u32;
        for off in 0..width {
            if self.is_survivor(self.lo + off as u64) {
                acc += 1;
            }
            prefix[off + 1] = acc;
        }
        prefix
    }
}

/// Sieves `[lo, hi]` by `sieve_primes`: `n` survives iff no listed prime divides it.
pub fn sieve_window(lo: u64, hi: u64, sieve_primes: &[u64]) -> Result<SieveWindow> {
    sieve_window_with(lo, hi, sieve_primes, &SieveConfig::default())
}

pub fn sieve_window_with(lo: u64, hi: u64, sieve_primes: &[u64], cfg: &SieveConfig) -> Result<SieveWindow> {
    if lo < 2 || hi < lo {
        return Err(Error::domain(format!(
            "sieve window needs 2 <= lo <= hi, got [{lo}, {hi}]"
        )));
    }
    check_prime_set(sieve_primes)?;
    let width = hi - lo + 1;
    if width > cfg.max_window {
        return Err(Error::resource(format!(
            "window of {width} entries exceeds the budget {}",
            cfg.max_window
        )));
    }
    let (stride, primes) = stride_for(sieve_primes);
    let start = if stride == 2 { lo | 1 } else { lo };
    let plan = Plan::new(start, hi, primes, Marking::Coprime, stride);
    let len = plan.len;
    let mut struck = vec![0u64; len.div_ceil(64)];
    plan.run(cfg.segment_len, |seg_start, words, seg_len| {
        let first = ((seg_start - start) / stride) as usize;
        copy_bits(words, seg_len, &mut struck, first);
    });
    Ok(SieveWindow {
        lo,
        hi,
        start,
        stride,
        len,
        struck,
    })
}

/// Number of `n` in `[lo, hi]` (with `lo >= 1`) divisible by no prime in `sieve_primes`.
///
/// Streams over segments; memory is `O(segment_len + |sieve_primes|)`.
pub fn count_coprime(lo: u64, hi: u64, sieve_primes: &[u64], segment_len: usize) -> u64 {
    if hi < lo {
        return 0;
    }
    debug_assert!(lo >= 1);
    let (stride, primes) = stride_for(sieve_primes);
    let start = if stride == 2 { lo | 1 } else { lo };
    if start > hi {
        return 0;
    }
    let plan = Plan::new(start, hi, primes, Marking::Coprime, stride);
    let mut total = 0;
    plan.run(segment_len, |_, words, len| total += count_clear(words, len));
    total
}

/// Exact `pi(x)`, sieving `[2, x]` with the table primes `<= sqrt(x)`.
pub fn count_primes_upto(x: u64, table: &PrimeTable) -> Result<u64> {
    count_primes_upto_with(x, table, DEFAULT_SEGMENT_LEN)
}

pub fn count_primes_upto_with(x: u64, table: &PrimeTable, segment_len: usize) -> Result<u64> {
    let root = isqrt(x);
    if root > table.bound() {
        return Err(Error::domain(format!(
            "pi({x}) needs primes up to {root} but the table stops at {}",
            table.bound()
        )));
    }
    if x < 2 {
        return Ok(0);
    }
    if x < 3 {
        return Ok(1);
    }
    let odd = &table.primes()[1..table.count_le(root).max(1)];
    // Chunks of whole segments are independent; the sum is order-free.
    let chunk_span = 2 * segment_len as u64 * 64;
    let chunks: Vec<(u64, u64)> = (0..)
        .map(|c| 3 + c * chunk_span)
        .take_while(|&lo| lo <= x)
        .map(|lo| (lo, (lo + chunk_span - 1).min(x)))
        .collect();
    let odd_count: u64 = chunks
        .par_iter()
        .map(|&(lo, hi)| {
            let plan = Plan::new(lo, hi, odd, Marking::FromSquare, 2);
            let mut c = 0;
            plan.run(segment_len, |_, words, len| c += count_clear(words, len));
            c
        })
        .sum();
    Ok(1 + odd_count)
}

/// Primes `<= n` by a plain byte sieve; used for base primes.
pub(crate) fn small_primes(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if composite[i] {
            continue;
        }
        out.push(i as u64);
        let mut j = i * i;
        while j <= n {
            composite[j] = true;
            j += i;
        }
    }
    out
}

/// Floor square root.
pub fn isqrt(n: u64) -> u64 {
    if n < 2 {
        return n;
    }
    let mut r = (n as f64).sqrt() as u64;
    while r.checked_mul(r).is_none_or(|sq| sq > n) {
        r -= 1;
    }
    while (r + 1).checked_mul(r + 1).is_some_and(|sq| sq <= n) {
        r += 1;
    }
    r
}

/// `p^2` with overflow detection.
pub fn checked_square(p: u64) -> Result<u64> {
    p.checked_mul(p)
        .ok_or_else(|| Error::resource(format!("{p}^2 overflows 64 bits")))
}

fn check_prime_set(primes: &[u64]) -> Result<()> {
    if primes.is_empty() {
        return Err(Error::domain("sieving prime set is empty"));
    }
    if primes.windows(2).any(|w| w[0] >= w[1]) || primes[0] < 2 {
        return Err(Error::domain("sieving primes must be sorted, distinct and >= 2"));
    }
    Ok(())
}

fn stride_for(primes: &[u64]) -> (u64, &[u64]) {
    match primes.first() {
        Some(2) => (2, &primes[1..]),
        _ => (1, primes),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Marking {
    /// Strike every multiple of `p` in the window.
    Coprime,
    /// Strike multiples of `p` from `p^2` on.
    FromSquare,
}

/// A window `start, start + stride, ..., <= hi` and the primes striking it.
/// With `stride == 2`, `start` is odd and every prime is odd.
struct Plan<'a> {
    start: u64,
    stride: u64,
    len: usize,
    primes: &'a [u64],
    // next index to strike, per prime
    next: Vec<u64>,
}

impl<'a> Plan<'a> {
    fn new(start: u64, hi: u64, primes: &'a [u64], marking: Marking, stride: u64) -> Self {
        let len = if hi < start {
            0
        } else {
            ((hi - start) / stride + 1) as usize
        };
        let end = start + stride * len as u64; // exclusive
        let mut next = Vec::with_capacity(primes.len());
        let mut used = 0;
        for &p in primes {
            let mut m = start.div_ceil(p) * p;
            if marking == Marking::FromSquare {
                match p.checked_mul(p) {
                    Some(sq) => m = m.max(sq),
                    None => break,
                }
                if m >= end {
                    break;
                }
            }
            if stride == 2 && m % 2 == 0 {
                m += p;
            }
            next.push((m - start) / stride);
            used += 1;
        }
        Plan {
            start,
            stride,
            len,
            primes: &primes[..used],
            next,
        }
    }

    /// Sieves segment by segment; `visit(first_value, words, seg_len)`.
    fn run<F: FnMut(u64, &[u64], usize)>(mut self, segment_len: usize, mut visit: F) {
        let stride = self.stride;
        let seg = segment_len.max(64);
        let mut words = vec![0u64; seg.div_ceil(64)];
        let mut base = 0usize;
        while base < self.len {
            let n = seg.min(self.len - base);
            let nw = n.div_ceil(64);
            words[..nw].iter_mut().for_each(|w| *w = 0);
            let limit = (base + n) as u64;
            for (next, &p) in self.next.iter_mut().zip(self.primes) {
                let mut i = *next;
                while i < limit {
                    let r = (i - base as u64) as usize;
                    words[r >> 6] |= 1u64 << (r & 63);
                    i += p;
                }
                *next = i;
            }
            visit(self.start + stride * base as u64, &words[..nw], n);
            base += n;
        }
    }
}

fn count_clear(words: &[u64], len: usize) -> u64 {
    let full = len / 64;
    let mut struck: u64 = words[..full].iter().map(|w| w.count_ones() as u64).sum();
    let rem = len % 64;
    if rem > 0 {
        struck += (words[full] & ((1u64 << rem) - 1)).count_ones() as u64;
    }
    len as u64 - struck
}

fn for_each_clear<F: FnMut(usize)>(words: &[u64], len: usize, mut f: F) {
    for (wi, &w) in words.iter().enumerate() {
        let mut clear = !w;
        while clear != 0 {
            let b = clear.trailing_zeros() as usize;
            let i = wi * 64 + b;
            if i >= len {
                return;
            }
            f(i);
            clear &= clear - 1;
        }
    }
}

fn copy_bits(src: &[u64], len: usize, dst: &mut [u64], offset: usize) {
    if offset.is_multiple_of(64) {
        let w0 = offset / 64;
        let nw = len.div_ceil(64);
        dst[w0..w0 + nw].copy_from_slice(&src[..nw]);
        return;
    }
    for i in 0..len {
        if src[i >> 6] >> (i & 63) & 1 == 1 {
            let j = offset + i;
            dst[j >> 6] |= 1u64 << (j & 63);
        }
    }
}
