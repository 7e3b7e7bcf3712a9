//! CSV emission for every figure dataset.
//!
//! Files carry a header row, LF line endings, and reals printed with 15
//! significant digits (C's `%.15g`), so outputs are byte-stable and can be
//! compared by checksum.

use std::fmt::Write as _;
use std::path::Path;

use num_bigint::BigUint;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::intervals::{GapSeries, IntervalRecord, IntervalSet};
use crate::numerics::Dd;
use crate::randmodel::{ConjectureScan, ReferenceDistribution, ShiftModelSummary};
use crate::residue::LegendreRow;
use crate::stats::{moving_average, BiasSeries, MaierScan, ScanSeries};

/// Bumped whenever a column layout changes.
pub const SCHEMA_VERSION: u32 = 1;

/// `%.15g`.
pub fn fmt_real(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{:.14e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if (-4..15).contains(&exp) {
        let decimals = (14 - exp) as usize;
        trim_zeros(format!("{:.*}", decimals, x))
    } else {
        let m = trim_zeros(mantissa.to_string());
        format!("{m}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    let t = s.trim_end_matches('0').trim_end_matches('.');
    t.to_string()
}

/// A CSV document built in memory.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(header: &str) -> Self {
        let mut text = String::with_capacity(1 << 12);
        text.push_str(header);
        text.push('\n');
        Csv { text }
    }

    pub fn row(&mut self, fields: &[Field]) {
        for (i, f) in fields.iter().enumerate() {
            if i > 0 {
                self.text.push(',');
            }
            match f {
                Field::Int(v) => write!(self.text, "{v}").unwrap(),
                Field::Uint(v) => write!(self.text, "{v}").unwrap(),
                Field::Real(v) => self.text.push_str(&fmt_real(*v)),
                Field::Text(s) => self.text.push_str(s),
            }
        }
        self.text.push('\n');
    }

    pub fn raw_row(&mut self, line: &str) {
        self.text.push_str(line);
        self.text.push('\n');
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }

    pub fn into_string(self) -> String {
        self.text
    }

    pub fn sha256(&self) -> String {
        sha256_hex(self.text.as_bytes())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Field {
    Int(i64),
    Uint(u64),
    Real(f64),
    Text(String),
}

impl From<u64> for Field {
    fn from(v: u64) -> Self {
        Field::Uint(v)
    }
}

impl From<usize> for Field {
    fn from(v: usize) -> Self {
        Field::Uint(v as u64)
    }
}

impl From<i64> for Field {
    fn from(v: i64) -> Self {
        Field::Int(v)
    }
}

impl From<f64> for Field {
    fn from(v: f64) -> Self {
        Field::Real(v)
    }
}

impl From<&str> for Field {
    fn from(v: &str) -> Self {
        Field::Text(v.to_string())
    }
}

pub fn intervals_csv(set: &IntervalSet) -> Csv {
    let mut csv = Csv::new(IntervalRecord::CSV_HEADER);
    for r in set.records() {
        csv.raw_row(&r.csv_row());
    }
    csv
}

/// `pi_k - li_k`, `pi(x) - li(x)` and `pi(x)` minus the Mertens-scaled `li`, at `x = p_{k+1}^2`.
pub fn deviations_csv(set: &IntervalSet, count_offset: bool) -> Csv {
    let mut csv = Csv::new("k,x,pi_k_minus_li_k,pi_minus_li,pi_minus_mertens_li");
    let scale = crate::analytic::two_exp_neg_gamma();
    let offset = if count_offset { 2.0 } else { 0.0 };
    for r in set.records() {
        let li = r.li_upper.to_f64();
        csv.row(&[
            r.k.into(),
            r.hi().into(),
            (r.pi_k as f64 - r.li_k).into(),
            (Dd::from_u64(r.pi_upper) - r.li_upper).to_f64().into(),
            (r.pi_upper as f64 - (scale * li - offset)).into(),
        ]);
    }
    csv
}

pub fn maier_csv(scan: &MaierScan) -> Csv {
    scan.ratios.to_csv("x,ratio", true)
}

pub fn gaps_csv(gaps: &GapSeries, run: usize) -> Result<Csv> {
    let g: Vec<f64> = gaps.gaps.iter().map(|&(_, g)| g as f64).collect();
    let avg = moving_average(&g, run.min(g.len()))?;
    let mut csv = Csv::new("p_i,g_i,movavg");
    for (&(p, g), m) in gaps.gaps.iter().zip(avg) {
        csv.row(&[p.into(), g.into(), m.into()]);
    }
    Ok(csv)
}

pub fn legendre_csv(rows: &[LegendreRow]) -> Csv {
    let mut csv = Csv::new("k,ratio_full,ratio_truncated,pi_ratio");
    for r in rows {
        csv.row(&[
            r.k.into(),
            r.ratio_full.into(),
            r.ratio_truncated.into(),
            r.pi_ratio.into(),
        ]);
    }
    csv
}

pub fn terms_csv(rows: &[(usize, BigUint, u64)]) -> Csv {
    let mut csv = Csv::new("k,terms,l_k");
    for (k, terms, l) in rows {
        csv.row(&[(*k).into(), Field::Text(terms.to_string()), (*l).into()]);
    }
    csv
}

pub fn model_csv(rows: &[(ShiftModelSummary, ReferenceDistribution, ReferenceDistribution)]) -> Csv {
    let mut csv = Csv::new("k,mode,samples,mean,variance,binom_var,pois_var,seed");
    for (m, b, p) in rows {
        let seed = m.seed.map(|s| s.to_string()).unwrap_or_default();
        csv.row(&[
            m.k.into(),
            m.mode.as_str().into(),
            m.samples.into(),
            m.mean.into(),
            m.variance.into(),
            b.variance.into(),
            p.variance.into(),
            Field::Text(seed),
        ]);
    }
    csv
}

pub fn pdf_csv(hist: &ScanSeries) -> Csv {
    hist.to_csv("bin_center,density", false)
}

pub fn bias_csv(bias: &BiasSeries) -> Csv {
    let mut csv = Csv::new("k,x,a,b,c,a_norm,b_norm,c_norm");
    for r in &bias.rows {
        csv.row(&[
            r.k.into(),
            r.x.into(),
            r.a.into(),
            r.b.into(),
            r.c.into(),
            r.a_norm().into(),
            r.b_norm().into(),
            r.c_norm().into(),
        ]);
    }
    csv
}

pub fn corr_csv(series: &ScanSeries) -> Csv {
    series.to_csv("lag_or_block,value", true)
}

pub fn conjecture_csv(scan: &ConjectureScan) -> Csv {
    let mut csv = Csv::new("k,x,pi_minus_li,sqrt_li");
    for r in &scan.rows {
        csv.row(&[r.k.into(), r.x.into(), r.pi_minus_li.into(), r.sqrt_li.into()]);
    }
    csv
}

/// Writes `csv` to `path` and returns its SHA-256.
pub fn write_csv(path: &Path, csv: &Csv) -> Result<String> {
    std::fs::write(path, csv.as_str()).map_err(|e| Error::io(path, e))?;
    Ok(csv.sha256())
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut s = String::with_capacity(64);
    for b in digest {
        write!(s, "{b:02x}").unwrap();
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn percent_g() {
        assert_eq!(fmt_real(0.0), "0");
        assert_eq!(fmt_real(6.4), "6.4");
        assert_eq!(fmt_real(1.0), "1");
        assert_eq!(fmt_real(-2.5), "-2.5");
        assert_eq!(fmt_real(1.0 / 3.0), "0.333333333333333");
        assert_eq!(fmt_real(2.0 / 3.0), "0.666666666666667");
        assert_eq!(fmt_real(123456789012345.0), "123456789012345");
        assert_eq!(fmt_real(1234567890123456.0), "1.23456789012346e+15");
        assert_eq!(fmt_real(1e-5), "1e-05");
        assert_eq!(fmt_real(0.0001), "0.0001");
        assert_eq!(fmt_real(5.120435724669805), "5.1204357246698");
        assert_eq!(fmt_real(-1.5e-7), "-1.5e-07");
        assert_eq!(fmt_real(1e100), "1e+100");
    }

    #[test]
    fn csv_layout() {
        let mut c = Csv::new("a,b,c");
        c.row(&[1u64.into(), (-2i64).into(), 0.5.into()]);
        assert_eq!(c.as_str(), "a,b,c\n1,-2,0.5\n");
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
