use sievelab::analytic::li_k;
use sievelab::dataset::{self, Csv, Field};
use sievelab::intervals::{gap_series, IntervalSet};
use sievelab::randmodel::{
    binomial_reference, conjecture_check, covariance_terms, mean_rescale, poisson_reference, shift_model_with,
    ShiftOptions,
};
use sievelab::residue::{legendre_scan, term_scan};
use sievelab::sieve::{build_prime_table, build_prime_table_for_count, isqrt};
use sievelab::stats::{
    bias_series, empirical_pdf, extract_delta, interval_deviations, lag_correlation, maier_scan, phi_vs_lengths,
    ScanSeries,
};
use sievelab::{Error, PrimeTable, Result, SieveConfig};

use crate::checkpoint;
use crate::output::Output;
use crate::{Cli, Command, KmaxArgs};

pub fn run(cli: &Cli) -> Result<()> {
    let g = &cli.global;
    let cfg = SieveConfig::default().with_segment_len(g.segment_size);
    let mut out = Output::create(&g.out)?;
    let kmax = match &cli.command {
        Command::Intervals { k, count_offset } => {
            let (set, _) = intervals(k, &cfg)?;
            out.emit("intervals.csv", &dataset::intervals_csv(&set))?;
            out.emit("deviations.csv", &dataset::deviations_csv(&set, *count_offset))?;
            Some(k.kmax)
        }
        Command::Maier {
            ks,
            lambda,
            delta_band,
            step,
            xmax,
        } => {
            let kmax = ks.iter().copied().max().unwrap_or(1);
            let table = table_for(kmax + 1)?;
            let mut scans = Vec::with_capacity(ks.len());
            let mut summary = Csv::new("k,phi_lo,phi_hi,upper_dev,lower_dev,whole_ratio,in_band");
            for &k in ks {
                let s = maier_scan(k, *lambda, *step, &table)?;
                out.emit(&format!("maier_k{k}.csv"), &dataset::maier_csv(&s))?;
                let inside = s.ratios.values().filter(|r| (r - 1.0).abs() <= *delta_band).count();
                summary.row(&[
                    k.into(),
                    s.phi_lo.into(),
                    s.phi_hi.into(),
                    s.upper_deviation().into(),
                    s.lower_deviation().into(),
                    s.whole_interval_ratio.into(),
                    (inside as f64 / s.ratios.len() as f64).into(),
                ]);
                scans.push(s);
            }
            out.emit("maier_summary.csv", &summary)?;
            let d = extract_delta(&scans)?;
            let lengths_table = build_prime_table(isqrt(*xmax).max(table.bound()))?;
            let crossings = phi_vs_lengths(*xmax, *lambda, &lengths_table)?;
            out.emit("phi_crossings.csv", &crossings.to_csv("g,crossing_x", true))?;
            println!("delta_lambda {} max_abs {}", d.delta, d.delta_max_abs);
            Some(kmax as u64)
        }
        Command::Gaps { k, run } => {
            let table = table_for(k + 1)?;
            let set = sievelab::intervals::build_intervals_with(*k, &table, &cfg)?;
            let gaps = gap_series(*k, &set, &table)?;
            out.emit(&format!("gaps_k{k}.csv"), &dataset::gaps_csv(&gaps, *run)?)?;
            println!("mean_gap {} theoretical {}", gaps.mean_gap, gaps.theoretical_mean);
            Some(*k as u64)
        }
        Command::Legendre { kmin, kmax } => {
            let kmax = *kmax as usize;
            if *kmin == 0 || *kmin > kmax {
                return Err(Error::Domain(format!("need 1 <= kmin <= kmax, got {kmin}..{kmax}")));
            }
            let table = table_for(kmax + 1)?;
            let set = sievelab::intervals::build_intervals_with(kmax, &table, &cfg)?;
            let rows = legendre_scan(*kmin..=kmax, &set, &table)?;
            out.emit("legendre.csv", &dataset::legendre_csv(&rows))?;
            out.emit("terms.csv", &dataset::terms_csv(&term_scan(*kmin..=kmax, &table)?))?;
            Some(kmax as u64)
        }
        Command::Randmodel { ks, budget, samples } => {
            let kmax = ks.iter().copied().max().unwrap_or(1);
            let table = table_for(kmax + 1)?;
            let opts = ShiftOptions {
                exhaustive_limit: *budget,
                samples: *samples,
                seed: g.seed,
            };
            let mut rows = Vec::with_capacity(ks.len());
            for &k in ks {
                let m = shift_model_with(k, &table, &opts)?;
                out.emit(&format!("pdf_k{k}.csv"), &model_pdf(&m, li_k(k, &table)?)?)?;
                println!("k {k} mode {} mean {} variance {}", m.mode.as_str(), m.mean, m.variance);
                rows.push((m, binomial_reference(k, &table)?, poisson_reference(k, &table)?));
            }
            out.emit("model.csv", &dataset::model_csv(&rows))?;
            Some(kmax as u64)
        }
        Command::Bias { k, bins } => {
            let (set, _) = intervals(k, &cfg)?;
            let bias = bias_series(&set)?;
            out.emit("bias.csv", &dataset::bias_csv(&bias))?;
            let norm: Vec<f64> = bias.rows.iter().map(|r| r.a_norm()).collect();
            let (hist, fit) = empirical_pdf(&norm, *bins)?;
            out.emit("bias_pdf.csv", &dataset::pdf_csv(&hist))?;
            println!("fit mean {} stdev {} n {}", fit.mean, fit.stdev, fit.sample_count);
            Some(k.kmax)
        }
        Command::Corr { k, max_lag, block } => {
            let (set, _) = intervals(k, &cfg)?;
            let dev = interval_deviations(&set);
            out.emit(
                "corr.csv",
                &dataset::corr_csv(&lag_correlation(&dev, *max_lag, *block)?),
            )?;
            let cov = covariance_terms(&dev, *max_lag)?;
            out.emit("covariance.csv", &cov.to_csv("lag,value", true))?;
            Some(k.kmax)
        }
        Command::Conjecture { k } => {
            let (set, _) = intervals(k, &cfg)?;
            let scan = conjecture_check(&set)?;
            out.emit("conjecture.csv", &dataset::conjecture_csv(&scan))?;
            println!("violations {}", scan.violations.len());
            Some(k.kmax)
        }
    };
    out.finish(g.seed, kmax)
}

fn table_for(count: usize) -> Result<PrimeTable> {
    build_prime_table_for_count(count)
}

/// Builds (or resumes) the interval set in chunks, checkpointing after each.
fn intervals(args: &KmaxArgs, cfg: &SieveConfig) -> Result<(IntervalSet, PrimeTable)> {
    let kmax = args.kmax as usize;
    let table = table_for(kmax + 1)?;
    let mut set = match &args.checkpoint {
        Some(path) if path.exists() => checkpoint::load(path, &table, kmax)?,
        _ => IntervalSet::default(),
    };
    while set.k_max() < kmax {
        let next = (set.k_max() + args.chunk as usize).min(kmax);
        set.extend_to(next, &table, cfg)?;
        eprintln!("intervals: {next}/{kmax}");
        if let Some(path) = &args.checkpoint {
            checkpoint::save(path, &set)?;
        }
    }
    Ok((set, table))
}

/// Distribution of `(e^gamma / 2) S - li_k` over the shift sample space.
fn model_pdf(m: &sievelab::randmodel::ShiftModelSummary, li: f64) -> Result<Csv> {
    let scale = mean_rescale();
    let mut s = ScanSeries::new("model pdf");
    for (c, &h) in m.histogram.iter().enumerate().filter(|(_, &h)| h > 0) {
        s.push(scale * c as f64 - li, h as f64 / (m.samples as f64 * scale))?;
    }
    let mut csv = Csv::new("bin_center,density");
    for &(x, d) in &s.points {
        csv.row(&[Field::Real(x), Field::Real(d)]);
    }
    Ok(csv)
}
