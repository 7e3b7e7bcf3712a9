//! Closed-form and quadrature quantities: the offset logarithmic integral,
//! Mertens products with their explicit error bound, the probabilistic
//! estimators `~pi_k` and `~pi(x)`, relative-error bounds and the bias
//! normalizer `Delta_k`.
//!
//! `li(x) = int_2^x dt / log t` (so `li(2) = 0`). It is evaluated by adaptive
//! Gauss–Legendre quadrature in double-double arithmetic, split at powers of
//! ten, so values stay accurate well past the point where `f64` runs out of
//! absolute resolution.

use crate::error::{Error, Result};
use crate::intervals::{interval_bounds, locate_interval, IntervalSet};
use crate::numerics::quad::{integrate, Tolerance};
use crate::numerics::sum::CompensatedSum;
use crate::numerics::Dd;
use crate::sieve::{isqrt, PrimeTable};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `2 e^{-gamma}`, the limit of `~pi_k / (l_k / log p_{k+1}^2)`.
pub fn two_exp_neg_gamma() -> f64 {
    2.0 * (-EULER_GAMMA).exp()
}

/// Offset logarithmic integral `int_2^x dt / log t`.
pub fn li(x: f64) -> Result<f64> {
    li_dd(x).map(Dd::to_f64)
}

/// [`li`] in double-double precision.
pub fn li_dd(x: f64) -> Result<Dd> {
    if x.is_nan() || x < 2.0 || !x.is_finite() {
        return Err(Error::domain(format!(
            "li(x) is defined here for finite x >= 2, got {x}"
        )));
    }
    let mut acc = Dd::ZERO;
    let mut a = 2.0;
    let mut decade = 10f64;
    while a < x {
        let b = decade.min(x);
        acc += log_integral(Dd::from_f64(a), Dd::from_f64(b));
        a = b;
        decade *= 10.0;
    }
    Ok(acc)
}

/// `int_a^b dt / log t` for `1 < a <= b`.
pub fn log_integral(a: Dd, b: Dd) -> Dd {
    integrate(|t: Dd| t.ln().recip(), a, b, Tolerance::default()).value
}

/// `int_a^b dt / log t` between integers.
pub fn log_integral_between(a: u64, b: u64) -> Dd {
    log_integral(Dd::from_u64(a), Dd::from_u64(b))
}

/// `li_k = li(p_{k+1}^2) - li(p_k^2)`, integrated directly over `s_k`.
pub fn li_k(k: usize, table: &PrimeTable) -> Result<f64> {
    li_k_dd(k, table).map(Dd::to_f64)
}

pub fn li_k_dd(k: usize, table: &PrimeTable) -> Result<Dd> {
    let (lo, hi) = interval_bounds(k, table)?;
    Ok(log_integral_between(lo, hi))
}

/// The Mertens product over `P_k` with the explicit bound on its error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MertensEvaluation {
    pub k: usize,
    /// `prod_{p in P_k} (1 - 1/p)`.
    pub product: f64,
    pub gamma: f64,
    /// Bound on `|delta|` at `x = p_{k+1}^2 - 1`.
    pub delta_bound: f64,
    /// The point the bound is evaluated at.
    pub x: f64,
}

impl MertensEvaluation {
    /// `log(product * log(x) / 2) + gamma`, i.e. the realised `delta`.
    pub fn delta(&self) -> f64 {
        (self.product * self.x.ln() / 2.0).ln() + self.gamma
    }
}

/// Upper bound on `|delta|` in `prod_{p <= sqrt x} (1 - 1/p) = 2 e^{-gamma + delta} / log x`.
pub fn mertens_delta_bound(x: f64) -> f64 {
    let r = x.sqrt();
    4.0 / (r + 1.0).ln() + 2.0 / (r * r.ln()) + 1.0 / (2.0 * r)
}

/// Prefix Mertens products `prod_{j <= k} (1 - 1/p_j)` for `k = 0..=k_max`,
/// accumulated in double-double in prime order.
#[derive(Clone, Debug)]
pub struct MertensTable {
    prefix: Vec<Dd>,
}

impl MertensTable {
    pub fn new(table: &PrimeTable, k_max: usize) -> Result<Self> {
        let primes = table.first(k_max)?;
        let mut prefix = Vec::with_capacity(k_max + 1);
        let mut acc = Dd::ONE;
        prefix.push(acc);
        for &p in primes {
            acc *= Dd::from_u64(p - 1) / Dd::from_u64(p);
            prefix.push(acc);
        }
        Ok(MertensTable { prefix })
    }

    pub fn k_max(&self) -> usize {
        self.prefix.len() - 1
    }

    pub fn product(&self, k: usize) -> Dd {
        self.prefix[k]
    }
}

pub fn mertens_product(k: usize, table: &PrimeTable) -> Result<MertensEvaluation> {
    if k == 0 {
        return Err(Error::domain("Mertens product needs k >= 1"));
    }
    let product = MertensTable::new(table, k)?.product(k).to_f64();
    let next = table.p(k + 1)?;
    let x = (next as f64).powi(2) - 1.0;
    Ok(MertensEvaluation {
        k,
        product,
        gamma: EULER_GAMMA,
        delta_bound: mertens_delta_bound(x),
        x,
    })
}

/// `x * prod_{p <= sqrt x} (1 - 1/p)`: the estimate that ignores the interval structure.
pub fn naive_expected_pi(x: u64, table: &PrimeTable) -> Result<f64> {
    if x < 4 {
        return Err(Error::domain(format!("naive estimate needs x >= 4, got {x}")));
    }
    let root = isqrt(x);
    if root > table.bound() {
        return Err(Error::domain(format!(
            "naive estimate at {x} needs primes up to {root}; table stops at {}",
            table.bound()
        )));
    }
    let m = table.count_le(root);
    let product = MertensTable::new(table, m)?.product(m);
    Ok((product * Dd::from_u64(x)).to_f64())
}

/// `~pi_k = l_k * prod_{p in P_k} (1 - 1/p)`.
pub fn expected_pi_k(k: usize, table: &PrimeTable) -> Result<f64> {
    let (lo, hi) = interval_bounds(k, table)?;
    let product = MertensTable::new(table, k)?.product(k);
    Ok((product * Dd::from_u64(hi - lo)).to_f64())
}

/// `~pi(x) = sum_{j<k} ~pi_j + (x - p_k^2) / l_k * ~pi_k` with `p_k^2 <= x < p_{k+1}^2`.
///
/// The sum runs in increasing `j` in plain `f64`.
pub fn expected_pi_upto(x: u64, set: &IntervalSet, table: &PrimeTable) -> Result<f64> {
    let k = locate_interval(x, set)?;
    let mertens = MertensTable::new(table, k)?;
    let mut sum = 0.0;
    for j in 1..k {
        let r = set.record(j).expect("located interval implies earlier records");
        sum += (mertens.product(j) * Dd::from_u64(r.length)).to_f64();
    }
    let r = set.record(k).expect("located");
    let tilde = (mertens.product(k) * Dd::from_u64(r.length)).to_f64();
    Ok(sum + (x - r.p_k * r.p_k) as f64 / r.length as f64 * tilde)
}

/// `l_k / log p_{k+1}^2`.
pub fn pnt_interval_estimate(k: usize, table: &PrimeTable) -> Result<f64> {
    let (lo, hi) = interval_bounds(k, table)?;
    Ok((hi - lo) as f64 / (hi as f64).ln())
}

/// `l_k / log p_k^2`, the upper end of the `li_k` sandwich.
pub fn lower_log_estimate(k: usize, table: &PrimeTable) -> Result<f64> {
    let (lo, hi) = interval_bounds(k, table)?;
    Ok((hi - lo) as f64 / (lo as f64).ln())
}

/// `2 e^{-gamma} li(x)`, optionally minus 2 for the primes 2 and 3 that precede `s_1`.
pub fn mertens_li_estimate(x: f64, count_offset: bool) -> Result<f64> {
    let v = two_exp_neg_gamma() * li(x)?;
    Ok(if count_offset { v - 2.0 } else { v })
}

/// `Delta_k = 1/2 sum_{j<=k} (l_j / log p_j^2 - l_j / log p_{j+1}^2)`.
pub fn delta_normalizer(k: usize, table: &PrimeTable) -> Result<f64> {
    if k == 0 {
        return Err(Error::domain("Delta_k needs k >= 1"));
    }
    Ok(*delta_normalizer_series(k, table)?.last().expect("k >= 1"))
}

/// `[Delta_1, ..., Delta_{k_max}]` in one pass.
pub fn delta_normalizer_series(k_max: usize, table: &PrimeTable) -> Result<Vec<f64>> {
    let mut acc = CompensatedSum::new();
    let mut out = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        acc.add(0.5 * delta_increment(k, table)?);
        out.push(acc.value());
    }
    Ok(out)
}

fn delta_increment(k: usize, table: &PrimeTable) -> Result<f64> {
    Ok(lower_log_estimate(k, table)? - pnt_interval_estimate(k, table)?)
}

/// The four per-interval estimators side by side.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EstimatorBundle {
    pub k: usize,
    /// `l_k prod (1 - 1/p)`.
    pub tilde_pi_k: f64,
    /// `2 e^{-gamma} l_k / log p_{k+1}^2`.
    pub tilde_pi_k_asym: f64,
    /// `l_k / log p_{k+1}^2`.
    pub pnt_estimate: f64,
    /// `log 4 / log p_k^2`.
    pub eta_bound: f64,
    /// `log p_{k+1}^2 / log p_k^2 - 1`.
    pub eta: f64,
}

pub fn estimator_bundle(k: usize, table: &PrimeTable) -> Result<EstimatorBundle> {
    let (lo, hi) = interval_bounds(k, table)?;
    let pnt = pnt_interval_estimate(k, table)?;
    Ok(EstimatorBundle {
        k,
        tilde_pi_k: expected_pi_k(k, table)?,
        tilde_pi_k_asym: two_exp_neg_gamma() * pnt,
        pnt_estimate: pnt,
        eta_bound: eta_bound(lo),
        eta: (hi as f64).ln() / (lo as f64).ln() - 1.0,
    })
}

/// `log 4 / log p_k^2` for `p_k^2 = lo`.
pub fn eta_bound(lo: u64) -> f64 {
    4f64.ln() / (lo as f64).ln()
}
