//! Multi-indices, Gevrey index bookkeeping and the Gamma/Beta special
//! functions used by every growth estimate in the crate.
//!
//! `gamma_fn` returns exact factorials for small integers, a Lanczos
//! approximation up to `x = 30` and `exp(ln_gamma)` above that, where
//! `ln_gamma` switches to the asymptotic Stirling series.

use std::cmp::Ordering;
use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{QbnfError, Result};

/// Above this argument the Gamma function is evaluated through its logarithm.
pub const LOG_DOMAIN_THRESHOLD: f64 = 30.0;

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

const FACTORIALS: [u64; 21] = [
    1,
    1,
    2,
    6,
    24,
    120,
    720,
    5_040,
    40_320,
    362_880,
    3_628_800,
    39_916_800,
    479_001_600,
    6_227_020_800,
    87_178_291_200,
    1_307_674_368_000,
    20_922_789_888_000,
    355_687_428_096_000,
    6_402_373_705_728_000,
    121_645_100_408_832_000,
    2_432_902_008_176_640_000,
];

/// The Gevrey indices `(sigma, mu, lambda, rho, rho_bar)`.
///
/// `rho_bar` is always derived as `lambda * mu + sigma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GevreyIndices {
    sigma: f64,
    mu: f64,
    lambda: f64,
    rho: f64,
    rho_bar: f64,
}

impl GevreyIndices {
    pub fn new(sigma: f64, mu: f64, lambda: f64, rho: f64) -> Result<Self> {
        let mut violations = Vec::new();
        if !(sigma > 1.0) {
            violations.push(format!("sigma must be > 1 (got {sigma})"));
        }
        if !(rho >= sigma) {
            violations.push(format!(
                "rho must be >= sigma (got rho={rho}, sigma={sigma})"
            ));
        }
        if !(mu >= rho + 1.0) {
            violations.push(format!("mu must be >= rho + 1 (got mu={mu}, rho={rho})"));
        }
        if !(lambda >= rho + 1.0) {
            violations.push(format!(
                "lambda must be >= rho + 1 (got lambda={lambda}, rho={rho})"
            ));
        }
        if !violations.is_empty() {
            return Err(QbnfError::Configuration(violations.join("; ")));
        }
        Ok(Self {
            sigma,
            mu,
            lambda,
            rho,
            rho_bar: lambda * mu + sigma,
        })
    }

    /// Like [`GevreyIndices::new`] but also checks a caller-supplied `rho_bar`.
    pub fn with_rho_bar(sigma: f64, mu: f64, lambda: f64, rho: f64, rho_bar: f64) -> Result<Self> {
        let g = Self::new(sigma, mu, lambda, rho)?;
        if (g.rho_bar - rho_bar).abs() > 1e-12 * g.rho_bar.abs().max(1.0) {
            return Err(QbnfError::Configuration(format!(
                "rho_bar must equal lambda*mu + sigma = {} (got {rho_bar})",
                g.rho_bar
            )));
        }
        Ok(g)
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
    pub fn mu(&self) -> f64 {
        self.mu
    }
    pub fn lambda(&self) -> f64 {
        self.lambda
    }
    pub fn rho(&self) -> f64 {
        self.rho
    }
    pub fn rho_bar(&self) -> f64 {
        self.rho_bar
    }
}

/// A derivative / monomial multi-index `(g_1, ..., g_n)` of non-negative integers.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(entries: Vec<u32>) -> Self {
        Self(entries)
    }

    pub fn zero(n: usize) -> Self {
        Self(vec![0; n])
    }

    /// The unit vector `e_i` in `n` variables.
    pub fn unit(n: usize, i: usize) -> Self {
        let mut v = vec![0; n];
        v[i] = 1;
        Self(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    /// `|g| = g_1 + ... + g_n`.
    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&g| g == 0)
    }

    /// `g! = g_1! ... g_n!` in exact integer arithmetic; `None` on overflow.
    pub fn factorial(&self) -> Option<u64> {
        self.0.iter().try_fold(1u64, |acc, &g| {
            let f = factorial_exact(g)?;
            acc.checked_mul(f)
        })
    }

    /// `g!` as a float; exact while the integer product fits in 53 bits.
    pub fn factorial_f64(&self) -> f64 {
        match self.factorial() {
            Some(f) if f < (1u64 << 53) => f as f64,
            _ => self.0.iter().map(|&g| factorial_f64(g)).product(),
        }
    }

    /// Componentwise partial order `self <= other`.
    pub fn le(&self, other: &Self) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    pub fn partial_cmp_componentwise(&self, other: &Self) -> Option<Ordering> {
        match (self.le(other), other.le(self)) {
            (true, true) => Some(Ordering::Equal),
            (true, false) => Some(Ordering::Less),
            (false, true) => Some(Ordering::Greater),
            (false, false) => None,
        }
    }

    pub fn checked_sub(&self, other: &Self) -> Option<Self> {
        if !other.le(self) {
            return None;
        }
        Some(Self(
            self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect(),
        ))
    }

    pub fn add(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// Falling factorial `self! / (self - g)!` for `g <= self`, zero otherwise.
    pub fn falling_factorial(&self, g: &Self) -> f64 {
        if !g.le(self) {
            return 0.0;
        }
        self.0
            .iter()
            .zip(&g.0)
            .map(|(&b, &d)| ((b - d + 1)..=b).map(f64::from).product::<f64>())
            .product()
    }

    /// All multi-indices in `n` variables with `|g| <= max_order`, ordered by
    /// total order and then lexicographically.
    pub fn all_up_to(n: usize, max_order: u32) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        for order in 0..=max_order {
            out.extend(Self::all_of_order(n, order));
        }
        out
    }

    /// All multi-indices in `n` variables with `|g| = order`.
    pub fn all_of_order(n: usize, order: u32) -> Vec<MultiIndex> {
        fn rec(n: usize, remaining: u32, prefix: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
            if prefix.len() + 1 == n {
                prefix.push(remaining);
                out.push(MultiIndex(prefix.clone()));
                prefix.pop();
                return;
            }
            for g in (0..=remaining).rev() {
                prefix.push(g);
                rec(n, remaining - g, prefix, out);
                prefix.pop();
            }
        }
        let mut out = Vec::new();
        if n == 0 {
            if order == 0 {
                out.push(MultiIndex(Vec::new()));
            }
            return out;
        }
        rec(n, order, &mut Vec::with_capacity(n), &mut out);
        out
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|g| g.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

impl From<Vec<u32>> for MultiIndex {
    fn from(v: Vec<u32>) -> Self {
        Self(v)
    }
}

/// Exact `m!` for `m <= 20`.
pub fn factorial_exact(m: u32) -> Option<u64> {
    FACTORIALS.get(m as usize).copied()
}

/// `m!` as a float, exact up to `20!` and log-Gamma based beyond.
pub fn factorial_f64(m: u32) -> f64 {
    match factorial_exact(m) {
        Some(f) => f as f64,
        None => ln_gamma(f64::from(m) + 1.0).exp(),
    }
}

fn lanczos_gamma(x: f64) -> f64 {
    if x < 0.5 {
        return PI / ((PI * x).sin() * lanczos_gamma(1.0 - x));
    }
    let x = x - 1.0;
    let mut a = LANCZOS_COEFFS[0];
    let t = x + LANCZOS_G + 0.5;
    for (i, &c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * a
}

fn stirling_ln_gamma(x: f64) -> f64 {
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let series = inv
        * (1.0 / 12.0
            + inv2
                * (-1.0 / 360.0
                    + inv2 * (1.0 / 1260.0 + inv2 * (-1.0 / 1680.0 + inv2 * (1.0 / 1188.0)))));
    (x - 0.5) * x.ln() - x + 0.5 * (2.0 * PI).ln() + series
}

fn small_integer(x: f64) -> Option<u32> {
    if x.fract() == 0.0 && (1.0..=21.0).contains(&x) {
        Some(x as u32)
    } else {
        None
    }
}

/// `ln Gamma(x)` for `x > 0`. Never overflows for finite `x`.
pub fn ln_gamma(x: f64) -> f64 {
    if let Some(m) = small_integer(x) {
        return (FACTORIALS[(m - 1) as usize] as f64).ln();
    }
    if x < LOG_DOMAIN_THRESHOLD {
        lanczos_gamma(x).ln()
    } else {
        stirling_ln_gamma(x)
    }
}

/// `ln Gamma(x)` with domain checking.
pub fn ln_gamma_checked(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(QbnfError::Domain(format!("Gamma requires x > 0, got {x}")));
    }
    Ok(ln_gamma(x))
}

/// `Gamma(x)` for `x > 0`.
///
/// Errors on non-positive input and on overflow (x above roughly 171.6); use
/// [`ln_gamma`] for growth diagnostics.
pub fn gamma_fn(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(QbnfError::Domain(format!("Gamma requires x > 0, got {x}")));
    }
    if let Some(m) = small_integer(x) {
        return Ok(FACTORIALS[(m - 1) as usize] as f64);
    }
    let v = if x <= LOG_DOMAIN_THRESHOLD {
        lanczos_gamma(x)
    } else {
        stirling_ln_gamma(x).exp()
    };
    if !v.is_finite() {
        return Err(QbnfError::Numeric(format!(
            "Gamma({x}) overflows binary64; use ln_gamma"
        )));
    }
    Ok(v)
}

/// The clamped Gamma used in symbol estimates: `Gamma(x)` for `x >= 1`, `1` for `x <= 1`.
pub fn gamma_plus(x: f64) -> Result<f64> {
    if x <= 1.0 {
        Ok(1.0)
    } else {
        gamma_fn(x)
    }
}

/// `ln B(x, y)`.
pub fn ln_beta(x: f64, y: f64) -> Result<f64> {
    if !(x > 0.0 && y > 0.0) {
        return Err(QbnfError::Domain(format!(
            "Beta requires x, y > 0, got ({x}, {y})"
        )));
    }
    Ok(ln_gamma(x) + ln_gamma(y) - ln_gamma(x + y))
}

/// `B(x, y) = Gamma(x) Gamma(y) / Gamma(x + y)`, computed in the log domain.
pub fn beta_fn(x: f64, y: f64) -> Result<f64> {
    ln_beta(x, y).map(f64::exp)
}

/// Natural log of the binomial coefficient `C(a + b, a)`.
pub fn ln_binomial(a: u32, b: u32) -> f64 {
    ln_gamma(f64::from(a + b) + 1.0) - ln_gamma(f64::from(a) + 1.0) - ln_gamma(f64::from(b) + 1.0)
}

/// Outcome of checking `Gamma(x)Gamma(y) = Gamma(x+y)B(x,y)` and
/// `Gamma(x)Gamma(y) <= Gamma(x+y)/y` over a grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GammaBetaReport {
    pub points: usize,
    /// Largest relative error of the product identity.
    pub max_identity_rel_err: f64,
    /// Number of points where the inequality fails beyond rounding (1e-12 relative).
    pub inequality_violations: usize,
    /// Smallest relative slack `1 - lhs/rhs` of the inequality (negative on violation).
    pub min_inequality_slack: f64,
    pub worst_point: (f64, f64),
}

/// Relative rounding allowance used when counting inequality violations.
pub const LEMMA_ROUNDING_TOL: f64 = 1e-12;

pub fn check_gamma_beta_lemmas(grid: &[(f64, f64)]) -> Result<GammaBetaReport> {
    if grid.is_empty() {
        return Err(QbnfError::Input("grid is empty".into()));
    }
    let mut max_identity_rel_err: f64 = 0.0;
    let mut violations = 0;
    let mut min_slack = f64::INFINITY;
    let mut worst = grid[0];
    for &(x, y) in grid {
        if !(x >= 1.0 && y > 0.0) {
            return Err(QbnfError::Domain(format!(
                "lemma grid requires x >= 1, y > 0; got ({x}, {y})"
            )));
        }
        let lhs = gamma_fn(x)? * gamma_fn(y)?;
        let rhs_identity = gamma_fn(x + y)? * beta_fn(x, y)?;
        let rel = ((lhs - rhs_identity) / lhs).abs();
        max_identity_rel_err = max_identity_rel_err.max(rel);

        // Inequality in the log domain: ln lhs <= ln Gamma(x+y) - ln y.
        let ln_lhs = ln_gamma(x) + ln_gamma(y);
        let ln_rhs = ln_gamma(x + y) - y.ln();
        let slack = -(ln_lhs - ln_rhs).exp_m1();
        if slack < -LEMMA_ROUNDING_TOL {
            violations += 1;
        }
        if slack < min_slack {
            min_slack = slack;
            worst = (x, y);
        }
    }
    Ok(GammaBetaReport {
        points: grid.len(),
        max_identity_rel_err,
        inequality_violations: violations,
        min_inequality_slack: min_slack,
        worst_point: worst,
    })
}

/// One sample `(x1, y1, x2, y2, p, q)` of the binomial-Gamma inequality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BinomialGammaSample {
    pub x1: u32,
    pub y1: u32,
    pub x2: u32,
    pub y2: u32,
    pub p: f64,
    pub q: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BinomialGammaReport {
    /// Ratio lhs / (Gamma(...) B(p,q)^(1/3)) per sample, in input order.
    pub ratios: Vec<f64>,
    /// Smallest `M` making every sampled inequality hold.
    pub fitted_m: f64,
    pub worst_sample: BinomialGammaSample,
}

/// Evaluates both sides of
/// `C(x1+y1,x1)^(7/6) C(x2+y2,x2)^(7/6) Gamma(mu x1 + lambda x2 + p) Gamma(mu y1 + lambda y2 + q)
///  <= M Gamma(mu(x1+y1) + lambda(x2+y2) + p + q) B(p,q)^(1/3)`
/// and returns the smallest `M` consistent with the samples.
pub fn check_binomial_gamma_lemma(
    samples: &[BinomialGammaSample],
    mu: f64,
    lambda: f64,
) -> Result<BinomialGammaReport> {
    if samples.is_empty() {
        return Err(QbnfError::Input("no samples".into()));
    }
    if !(mu > 0.0 && lambda > 0.0) {
        return Err(QbnfError::Domain(format!(
            "mu and lambda must be positive (got {mu}, {lambda})"
        )));
    }
    let mut ratios = Vec::with_capacity(samples.len());
    let mut fitted = f64::NEG_INFINITY;
    let mut worst = samples[0];
    for s in samples {
        if !(s.p >= 1.0 && s.q >= 1.0) {
            return Err(QbnfError::Domain(format!(
                "p, q must be >= 1 (got {}, {})",
                s.p, s.q
            )));
        }
        let (x1, y1, x2, y2) = (
            f64::from(s.x1),
            f64::from(s.y1),
            f64::from(s.x2),
            f64::from(s.y2),
        );
        let ln_lhs = 7.0 / 6.0 * (ln_binomial(s.x1, s.y1) + ln_binomial(s.x2, s.y2))
            + ln_gamma(mu * x1 + lambda * x2 + s.p)
            + ln_gamma(mu * y1 + lambda * y2 + s.q);
        let ln_rhs =
            ln_gamma(mu * (x1 + y1) + lambda * (x2 + y2) + s.p + s.q) + ln_beta(s.p, s.q)? / 3.0;
        let ratio = (ln_lhs - ln_rhs).exp();
        if ratio > fitted {
            fitted = ratio;
            worst = *s;
        }
        ratios.push(ratio);
    }
    Ok(BinomialGammaReport {
        ratios,
        fitted_m: fitted,
        worst_sample: worst,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    /// sqrt(pi) via 2 * int_0^inf exp(-u^2) du, composite Simpson on [0, 10].
    fn gamma_half_by_quadrature() -> f64 {
        let n = 20_000;
        let h = 10.0 / n as f64;
        let f = |u: f64| (-u * u).exp();
        let mut s = f(0.0) + f(10.0);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(i as f64 * h);
        }
        2.0 * s * h / 3.0
    }

    #[test]
    fn gamma_examples() {
        assert_eq!(gamma_fn(1.0).unwrap(), 1.0);
        assert_eq!(gamma_fn(5.0).unwrap(), 24.0);
        let oracle = gamma_half_by_quadrature();
        assert!(rel(gamma_fn(0.5).unwrap(), oracle) < 1e-12);
        assert!(rel(gamma_fn(0.5).unwrap(), 1.772_453_850_905_516) < 1e-13);
    }

    #[test]
    fn gamma_rejects_non_positive() {
        assert!(matches!(gamma_fn(0.0), Err(QbnfError::Domain(_))));
        assert!(matches!(gamma_fn(-1.5), Err(QbnfError::Domain(_))));
        assert!(matches!(beta_fn(0.0, 1.0), Err(QbnfError::Domain(_))));
    }

    #[test]
    fn gamma_recurrence_on_sampled_range() {
        let mut x = 0.1;
        while x <= 50.0 {
            let lhs = gamma_fn(x + 1.0).unwrap();
            let rhs = x * gamma_fn(x).unwrap();
            assert!(rel(lhs, rhs) <= 1e-12, "x={x}: {lhs} vs {rhs}");
            x += 0.173;
        }
    }

    #[test]
    fn gamma_integers_are_exact_factorials() {
        let mut f: u64 = 1;
        for m in 1..=20u32 {
            assert_eq!(gamma_fn(f64::from(m)).unwrap(), f as f64);
            f *= u64::from(m);
        }
    }

    #[test]
    fn log_domain_matches_direct_across_threshold() {
        for &x in &[25.0, 29.9, 30.1, 45.5, 100.25] {
            let direct = gamma_fn(x).unwrap();
            assert!(rel(ln_gamma(x).exp(), direct) < 1e-13);
        }
        // Far beyond binary64 range the log stays finite.
        assert!(ln_gamma(1e4).is_finite());
        assert!(gamma_fn(200.0).is_err());
    }

    #[test]
    fn beta_examples() {
        assert!(rel(beta_fn(1.0, 1.0).unwrap(), 1.0) < 1e-15);
        // (x-1)!(y-1)!/(x+y-1)! = 1! 2! / 4! = 2/24.
        let exact = (1.0 * 2.0) / 24.0;
        assert!(rel(beta_fn(2.0, 3.0).unwrap(), exact) < 1e-14);
        for &y in &[1.0, 10.0, 1e3, 1e6] {
            assert!(beta_fn(1.0, y).unwrap() <= 1.0 / y * (1.0 + 1e-12));
        }
    }

    #[test]
    fn beta_symmetry() {
        for &(x, y) in &[(0.3, 7.0), (2.5, 11.25), (40.0, 0.01), (1.0, 3.0)] {
            assert!(rel(beta_fn(x, y).unwrap(), beta_fn(y, x).unwrap()) <= 1e-13);
        }
    }

    #[test]
    fn gamma_plus_clamps() {
        assert_eq!(gamma_plus(0.3).unwrap(), 1.0);
        assert_eq!(gamma_plus(1.0).unwrap(), 1.0);
        assert_eq!(gamma_plus(4.0).unwrap(), 6.0);
    }

    #[test]
    fn gamma_beta_lemma_examples() {
        let r = check_gamma_beta_lemmas(&[(1.0, 1.0)]).unwrap();
        assert!(r.max_identity_rel_err <= 1e-15);
        assert_eq!(r.inequality_violations, 0);
        assert!(r.min_inequality_slack.abs() < 1e-14);

        let r = check_gamma_beta_lemmas(&[(3.5, 0.25)]).unwrap();
        assert_eq!(r.inequality_violations, 0);
        assert!(r.min_inequality_slack > 0.0);

        let mut grid = Vec::new();
        for i in 0..10 {
            for j in 0..10 {
                let x = 10f64.powf(f64::from(i) / 9.0 * 1.5);
                let y = 10f64.powf(-2.0 + f64::from(j) / 9.0 * 3.5);
                grid.push((x, y));
            }
        }
        let r = check_gamma_beta_lemmas(&grid).unwrap();
        assert_eq!(r.points, 100);
        assert_eq!(r.inequality_violations, 0);
        assert!(r.max_identity_rel_err <= 1e-12);
    }

    #[test]
    fn gamma_beta_lemma_rejects_empty_grid() {
        assert!(matches!(
            check_gamma_beta_lemmas(&[]),
            Err(QbnfError::Input(_))
        ));
    }

    #[test]
    fn binomial_gamma_lemma_examples() {
        let s = BinomialGammaSample {
            x1: 0,
            y1: 0,
            x2: 0,
            y2: 0,
            p: 1.0,
            q: 1.0,
        };
        let r = check_binomial_gamma_lemma(&[s], 8.0, 8.0).unwrap();
        assert!(rel(r.fitted_m, 1.0) < 1e-14);

        let s = BinomialGammaSample {
            x1: 1,
            y1: 1,
            x2: 0,
            y2: 0,
            p: 1.0,
            q: 1.0,
        };
        let r = check_binomial_gamma_lemma(&[s], 8.0, 8.0).unwrap();
        // 2^(7/6) Gamma(9)^2 / (Gamma(18) * 1).
        let direct = 2f64.powf(7.0 / 6.0) * 40320.0 * 40320.0 / 355_687_428_096_000.0;
        assert!(rel(r.ratios[0], direct) < 1e-12);

        let mut grid = Vec::new();
        for x1 in 0..=4 {
            for y1 in 0..=4 {
                for x2 in 0..=2 {
                    for y2 in 0..=2 {
                        for p in 1..=6 {
                            for q in [1, 3, 6] {
                                grid.push(BinomialGammaSample {
                                    x1,
                                    y1,
                                    x2,
                                    y2,
                                    p: f64::from(p),
                                    q: f64::from(q),
                                });
                            }
                        }
                    }
                }
            }
        }
        let r = check_binomial_gamma_lemma(&grid, 8.0, 8.0).unwrap();
        assert!(r.fitted_m.is_finite() && r.fitted_m >= 1.0);
    }

    #[test]
    fn gevrey_indices_invariants() {
        let g = GevreyIndices::new(2.0, 3.0, 3.0, 2.0).unwrap();
        assert_eq!(g.rho_bar(), 11.0);
        assert!(GevreyIndices::new(1.0, 3.0, 3.0, 2.0).is_err());
        assert!(GevreyIndices::new(2.0, 2.5, 3.0, 2.0).is_err());
        assert!(GevreyIndices::new(2.0, 3.0, 3.0, 1.5).is_err());
        assert!(GevreyIndices::with_rho_bar(2.0, 3.0, 3.0, 2.0, 10.0).is_err());
        assert!(GevreyIndices::with_rho_bar(2.0, 3.0, 3.0, 2.0, 11.0).is_ok());
    }

    #[test]
    fn multi_index_basics() {
        let g = MultiIndex::new(vec![2, 0, 3]);
        assert_eq!(g.order(), 5);
        assert_eq!(g.factorial(), Some(12));
        assert_eq!(MultiIndex::new(vec![21]).factorial(), None);
        assert_eq!(MultiIndex::all_of_order(2, 2).len(), 3);
        assert_eq!(MultiIndex::all_up_to(3, 2).len(), 10);
        let b = MultiIndex::new(vec![3, 1]);
        assert_eq!(b.falling_factorial(&MultiIndex::new(vec![2, 1])), 6.0);
        assert_eq!(b.falling_factorial(&MultiIndex::new(vec![0, 2])), 0.0);
    }

    #[test]
    fn multi_index_partial_order_axioms() {
        for n in 1..=3 {
            let all = MultiIndex::all_up_to(n, 5);
            for a in &all {
                assert!(a.le(a));
                for b in &all {
                    if a.le(b) && b.le(a) {
                        assert_eq!(a, b);
                    }
                    if a.le(b) {
                        for c in &all {
                            if b.le(c) {
                                assert!(a.le(c));
                            }
                        }
                    }
                }
            }
        }
    }
}
