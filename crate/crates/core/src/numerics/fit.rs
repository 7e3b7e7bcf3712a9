//! Least-squares fits used to characterise growth curves.

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct PolyFit {
    /// Coefficients in increasing degree.
    pub coeffs: Vec<f64>,
    pub r_squared: f64,
}

impl PolyFit {
    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }
}

/// Least-squares polynomial of the given degree.
#[allow(clippy::needless_range_loop)]
pub fn polyfit(xs: &[f64], ys: &[f64], degree: usize) -> Result<PolyFit> {
    let n = degree + 1;
    if xs.len() != ys.len() || xs.len() < n {
        return Err(Error::domain(format!(
            "polynomial fit of degree {degree} needs at least {n} paired points"
        )));
    }
    // scale abscissae to [-1, 1] for conditioning, then map back
    let (lo, hi) = xs
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    let mid = 0.5 * (lo + hi);
    let half = if hi > lo { 0.5 * (hi - lo) } else { 1.0 };
    let mut ata = vec![vec![0.0; n]; n];
    let mut aty = vec![0.0; n];
    for (&x, &y) in xs.iter().zip(ys) {
        let u = (x - mid) / half;
        let mut pows = vec![1.0; n];
        for j in 1..n {
            pows[j] = pows[j - 1] * u;
        }
        for i in 0..n {
            aty[i] += pows[i] * y;
            for j in 0..n {
                ata[i][j] += pows[i] * pows[j];
            }
        }
    }
    let scaled = solve(ata, aty)?;
    // expand sum c_j ((x - mid)/half)^j into powers of x
    let mut coeffs = vec![0.0; n];
    for (j, &c) in scaled.iter().enumerate() {
        let mut binom = 1.0;
        for i in 0..=j {
            // C(j, i) x^i (-mid)^(j-i) / half^j
            coeffs[i] += c * binom * (-mid).powi((j - i) as i32) / half.powi(j as i32);
            binom = binom * (j - i) as f64 / (i + 1) as f64;
        }
    }
    let mean = ys.iter().sum::<f64>() / ys.len() as f64;
    let fit = PolyFit { coeffs, r_squared: 0.0 };
    let ss_tot: f64 = ys.iter().map(|y| (y - mean).powi(2)).sum();
    let ss_res: f64 = xs.iter().zip(ys).map(|(&x, &y)| (y - fit.eval(x)).powi(2)).sum();
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Ok(PolyFit { r_squared, ..fit })
}

/// Fit of `y = a * x^b` by linear regression on logarithms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerLaw {
    pub prefactor: f64,
    pub exponent: f64,
    /// Coefficient of determination in log space.
    pub r_squared: f64,
}

pub fn power_law_fit(xs: &[f64], ys: &[f64]) -> Result<PowerLaw> {
    if xs.iter().chain(ys).any(|&v| v <= 0.0) {
        return Err(Error::domain("power-law fit needs positive data"));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let line = polyfit(&lx, &ly, 1)?;
    Ok(PowerLaw {
        prefactor: line.coeffs[0].exp(),
        exponent: line.coeffs[1],
        r_squared: line.r_squared,
    })
}

#[allow(clippy::needless_range_loop)]
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        if a[piv][col].abs() < 1e-300 {
            return Err(Error::domain("singular normal equations in polynomial fit"));
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for c in col..n {
                a[row][c] -= f * a[col][c];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|c| a[row][c] * x[c]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_exact_cubic() {
        let xs: Vec<f64> = (10..=60).map(f64::from).collect();
        let ys: Vec<f64> = xs
            .iter()
            .map(|x| 3.0 - 2.0 * x + 0.5 * x * x + 0.25 * x * x * x)
            .collect();
        let fit = polyfit(&xs, &ys, 3).unwrap();
        for (c, e) in fit.coeffs.iter().zip([3.0, -2.0, 0.5, 0.25]) {
            assert!((c - e).abs() < 1e-6, "{c} vs {e}");
        }
        assert!(fit.r_squared > 1.0 - 1e-12);
    }

    #[test]
    fn power_law_exponent() {
        let xs: Vec<f64> = (1..50).map(f64::from).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 7.0 * x.powf(2.5)).collect();
        let p = power_law_fit(&xs, &ys).unwrap();
        assert!((p.exponent - 2.5).abs() < 1e-10);
        assert!((p.prefactor - 7.0).abs() < 1e-8);
        assert!(power_law_fit(&[1.0, 0.0], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn too_few_points() {
        assert!(polyfit(&[1.0, 2.0], &[1.0, 2.0], 3).is_err());
    }
}
