//! Adaptive Gauss–Legendre quadrature in double-double precision.
//!
//! Each panel is integrated with an `N`-point Gauss–Legendre rule whose nodes
//! and weights are computed once by Newton iteration in double-double. A panel
//! is accepted when the rule applied to the whole panel and to its two halves
//! agree to within the tolerance; otherwise both halves are refined.

use std::sync::OnceLock;

use super::dd::Dd;

/// Nodes per panel.
pub const RULE_POINTS: usize = 20;

const MAX_DEPTH: u32 = 60;

/// Gauss–Legendre nodes on `[-1, 1]`; only the non-negative half is stored.
#[derive(Debug)]
pub struct GaussLegendre {
    nodes: Vec<Dd>,
    weights: Vec<Dd>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 2);
        let m = n.div_ceil(2);
        let mut nodes = Vec::with_capacity(m);
        let mut weights = Vec::with_capacity(m);
        for i in 0..m {
            let guess = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            // f64 Newton first, then polish in double-double
            let mut x = guess;
            for _ in 0..100 {
                let (p, dp) = legendre_f64(n, x);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-15 {
                    break;
                }
            }
            let mut xd = Dd::from_f64(x);
            for _ in 0..3 {
                let (p, dp) = legendre_dd(n, xd);
                if p.hi == 0.0 {
                    break;
                }
                xd -= p / dp;
            }
            if n % 2 == 1 && i == m - 1 {
                xd = Dd::ZERO;
            }
            let (_, dp) = legendre_dd(n, xd);
            let w = Dd::from_f64(2.0) / ((Dd::ONE - xd.sqr()) * dp.sqr());
            nodes.push(xd);
            weights.push(w);
        }
        GaussLegendre { nodes, weights }
    }

    pub fn points(&self) -> usize {
        let m = self.nodes.len();
        if self.nodes[m - 1].hi == 0.0 {
            2 * m - 1
        } else {
            2 * m
        }
    }

    /// Rule applied to `f` on `[a, b]`.
    pub fn apply<F: Fn(Dd) -> Dd>(&self, f: &F, a: Dd, b: Dd) -> Dd {
        let c = (a + b).mul_pow2(-1);
        let h = (b - a).mul_pow2(-1);
        let mut acc = Dd::ZERO;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            if x.hi == 0.0 {
                acc += *w * f(c);
            } else {
                let dx = h * *x;
                acc += *w * (f(c - dx) + f(c + dx));
            }
        }
        acc * h
    }
}

fn legendre_f64(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for j in 1..n {
        let j = j as f64;
        let p2 = ((2.0 * j + 1.0) * x * p1 - j * p0) / (j + 1.0);
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

fn legendre_dd(n: usize, x: Dd) -> (Dd, Dd) {
    let (mut p0, mut p1) = (Dd::ONE, x);
    for j in 1..n {
        let jf = j as f64;
        let p2 = (x * p1 * (2.0 * jf + 1.0) - p0 * jf) / (jf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    let dp = (x * p1 - p0) * n as f64 / (x.sqr() - Dd::ONE);
    (p1, dp)
}

/// The shared 20-point rule.
pub fn default_rule() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(RULE_POINTS))
}

/// Acceptance test for a panel: `|whole - halves| <= max(abs, rel * |halves|)`.
#[derive(Clone, Copy, Debug)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            abs: 1e-300,
            rel: 1e-29,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct QuadResult {
    pub value: Dd,
    /// Sum of accepted panel discrepancies; an over-estimate of the error.
    pub error: f64,
    pub panels: usize,
}

/// Adaptive integral of `f` over `[a, b]`.
pub fn integrate<F: Fn(Dd) -> Dd>(f: F, a: Dd, b: Dd, tol: Tolerance) -> QuadResult {
    let rule = default_rule();
    let mut out = QuadResult {
        value: Dd::ZERO,
        error: 0.0,
        panels: 0,
    };
    if a == b {
        return out;
    }
    let whole = rule.apply(&f, a, b);
    refine(rule, &f, a, b, whole, tol, 0, &mut out);
    out
}

#[allow(clippy::too_many_arguments)]
fn refine<F: Fn(Dd) -> Dd>(
    rule: &GaussLegendre,
    f: &F,
    a: Dd,
    b: Dd,
    whole: Dd,
    tol: Tolerance,
    depth: u32,
    out: &mut QuadResult,
) {
    let m = (a + b).mul_pow2(-1);
    let left = rule.apply(f, a, m);
    let right = rule.apply(f, m, b);
    let halves = left + right;
    let diff = (whole - halves).abs().to_f64();
    if diff <= tol.abs.max(tol.rel * halves.abs().to_f64()) || depth >= MAX_DEPTH {
        out.value += halves;
        out.error += diff;
        out.panels += 2;
        return;
    }
    refine(rule, f, a, m, left, tol, depth + 1, out);
    refine(rule, f, m, b, right, tol, depth + 1, out);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_two() {
        for n in [2, 5, 20, 21] {
            let r = GaussLegendre::new(n);
            assert_eq!(r.points(), n);
            let s = r.apply(&|_| Dd::ONE, Dd::from_f64(-1.0), Dd::ONE);
            assert!((s - Dd::from_f64(2.0)).abs().to_f64() < 1e-30, "n = {n}");
        }
    }

    #[test]
    fn exact_for_degree_2n_minus_1() {
        let r = default_rule();
        // int_{-1}^{1} x^38 dx = 2/39
        let s = r.apply(&|x: Dd| x.powi(38), Dd::from_f64(-1.0), Dd::ONE);
        let exact = Dd::from_f64(2.0) / Dd::from_f64(39.0);
        assert!(((s - exact) / exact).abs().to_f64() < 1e-29);
    }

    #[test]
    fn adaptive_exp_and_peaked_integrand() {
        let r = integrate(|x: Dd| x.exp(), Dd::ZERO, Dd::ONE, Tolerance::default());
        let exact = Dd::E - Dd::ONE;
        assert!(((r.value - exact) / exact).abs().to_f64() < 1e-30);
        // int_0^1 1/(1e-4 + x^2) = atan(1e2) / 1e-2
        let r = integrate(
            |x: Dd| (Dd::from_f64(1e-4) + x.sqr()).recip(),
            Dd::ZERO,
            Dd::ONE,
            Tolerance::default(),
        );
        let exact = 100f64.atan() * 100.0;
        assert!((r.value.to_f64() - exact).abs() < 1e-12 * exact);
        assert!(r.panels > 2);
    }
}
