//! Interval checkpoints: one whitespace-separated line per record, reals as
//! raw `f64` bit patterns in hex so a resumed run continues bit-exactly.

use std::path::Path;

use sievelab::intervals::{IntervalRecord, IntervalSet};
use sievelab::numerics::Dd;
use sievelab::{Error, PrimeTable, Result};

const MAGIC: &str = "sievelab-intervals-checkpoint 1";

pub fn save(path: &Path, set: &IntervalSet) -> Result<()> {
    let mut text = String::with_capacity(set.k_max() * 120 + 64);
    text.push_str(MAGIC);
    text.push('\n');
    for r in set.records() {
        text.push_str(&format!(
            "{} {} {} {} {} {} {:016x} {:016x} {} {:016x} {:016x}\n",
            r.k,
            r.p_k,
            r.p_next,
            r.gap,
            r.length,
            r.pi_k,
            r.li_k.to_bits(),
            r.pnt_estimate.to_bits(),
            r.pi_upper,
            r.li_upper.hi.to_bits(),
            r.li_upper.lo.to_bits(),
        ));
    }
    // write-then-rename so an interrupted save leaves the old checkpoint intact
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, text).map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

/// Reads at most `kmax` records; later ones are ignored.
pub fn load(path: &Path, table: &PrimeTable, kmax: usize) -> Result<IntervalSet> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let bad = |line: usize| Error::Domain(format!("{}: malformed checkpoint at line {line}", path.display()));
    let mut lines = text.lines();
    if lines.next() != Some(MAGIC) {
        return Err(bad(1));
    }
    let mut records = Vec::new();
    for (i, line) in lines.take(kmax).enumerate() {
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 11 {
            return Err(bad(i + 2));
        }
        let int = |j: usize| f[j].parse::<u64>().map_err(|_| bad(i + 2));
        let real = |j: usize| {
            u64::from_str_radix(f[j], 16)
                .map(f64::from_bits)
                .map_err(|_| bad(i + 2))
        };
        let r = IntervalRecord {
            k: int(0)? as usize,
            p_k: int(1)?,
            p_next: int(2)?,
            gap: int(3)?,
            length: int(4)?,
            pi_k: int(5)?,
            li_k: real(6)?,
            pnt_estimate: real(7)?,
            pi_upper: int(8)?,
            li_upper: Dd::new(real(9)?, real(10)?),
        };
        if table.p(r.k).ok() != Some(r.p_k) || table.p(r.k + 1).ok() != Some(r.p_next) {
            return Err(Error::Domain(format!(
                "{}: record {} does not match the prime table",
                path.display(),
                r.k
            )));
        }
        records.push(r);
    }
    IntervalSet::from_records(records)
}
