//! Approximation functions `Delta`, their validity conditions, the
//! supremum function `Gamma_s(eta)` and the constructive threshold bound
//! relating the two.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{QbnfError, Result};

/// Default lower endpoint of the validity integral.
pub const DEFAULT_LOWER_ENDPOINT: f64 = 0.01;
/// Upper end of the supremum search.
pub const SUP_SEARCH_CAP: f64 = 1e12;
/// Number of log-spaced scan points before refinement.
pub const SUP_SCAN_POINTS: usize = 640;
/// Default ratio for the geometric ladder `t_nu = kappa^nu T`.
pub const DEFAULT_KAPPA_RATIO: f64 = 2.0;

const SUP_SCAN_START: f64 = 1e-30;
const GOLDEN_MAX_ITERS: usize = 300;
// Panels of the validity integral are uniform in u = ln t.
const PANEL_WIDTH: f64 = 0.25;
const LN_T_MAX: f64 = 690.0;

/// Shape of a built-in approximation function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DeltaKind {
    /// `(1 + t)^exponent`.
    Polynomial { exponent: f64 },
    /// `exp(t^a / a)`.
    SubExponential { a: f64 },
    /// `exp(t^(1/sigma) / (1 + log^gamma(1 + t)))`.
    LogTempered { gamma: f64 },
    /// `(1 + t)^power * inner(t)`.
    ProductWithPower { power: f64, inner: Box<DeltaKind> },
}

impl DeltaKind {
    fn name(&self) -> &'static str {
        match self {
            DeltaKind::Polynomial { .. } => "polynomial",
            DeltaKind::SubExponential { .. } => "sub_exponential",
            DeltaKind::LogTempered { .. } => "log_tempered",
            DeltaKind::ProductWithPower { .. } => "product_with_power",
        }
    }

    fn check_params(&self) -> Result<()> {
        let bad = |msg: String| Err(QbnfError::Configuration(msg));
        match self {
            DeltaKind::Polynomial { exponent } if !(*exponent >= 0.0 && exponent.is_finite()) => {
                bad(format!("polynomial exponent must be >= 0, got {exponent}"))
            }
            DeltaKind::SubExponential { a } if !(*a > 0.0 && a.is_finite()) => {
                bad(format!("sub_exponential exponent a must be > 0, got {a}"))
            }
            DeltaKind::LogTempered { gamma } if !(*gamma > 0.0 && gamma.is_finite()) => {
                bad(format!("log_tempered gamma must be > 0, got {gamma}"))
            }
            DeltaKind::ProductWithPower { power, inner } => {
                if !(*power >= 0.0 && power.is_finite()) {
                    return bad(format!(
                        "product_with_power power must be >= 0, got {power}"
                    ));
                }
                inner.check_params()
            }
            _ => Ok(()),
        }
    }

    fn ln_eval(&self, t: f64, sigma: f64) -> f64 {
        match self {
            DeltaKind::Polynomial { exponent } => {
                if *exponent == 0.0 {
                    0.0
                } else {
                    exponent * t.ln_1p()
                }
            }
            DeltaKind::SubExponential { a } => t.powf(*a) / a,
            DeltaKind::LogTempered { gamma } => {
                t.powf(1.0 / sigma) / (1.0 + t.ln_1p().powf(*gamma))
            }
            DeltaKind::ProductWithPower { power, inner } => {
                let p = if *power == 0.0 {
                    0.0
                } else {
                    power * t.ln_1p()
                };
                p + inner.ln_eval(t, sigma)
            }
        }
    }

    /// Upper bound on `int_T^inf ln Delta(t) t^(-1-b) dt` for `T >= e`;
    /// `None` when the integral diverges.
    fn tail_bound(&self, t_lo: f64, b: f64, sigma: f64) -> Option<f64> {
        match self {
            DeltaKind::Polynomial { exponent } => Some(exponent * log_tail(t_lo, b)),
            DeltaKind::SubExponential { a } => {
                if *a < b {
                    Some(t_lo.powf(a - b) / (a * (b - a)))
                } else {
                    None
                }
            }
            DeltaKind::LogTempered { gamma } => {
                let e = 1.0 / sigma;
                if e < b {
                    Some(t_lo.powf(e - b) / (b - e))
                } else if e == b && *gamma > 1.0 {
                    Some(t_lo.ln().powf(1.0 - gamma) / (gamma - 1.0))
                } else {
                    None
                }
            }
            DeltaKind::ProductWithPower { power, inner } => {
                Some(power * log_tail(t_lo, b) + inner.tail_bound(t_lo, b, sigma)?)
            }
        }
    }

    fn family_violations(&self, sigma: f64, out: &mut Vec<String>) {
        match self {
            DeltaKind::Polynomial { exponent } if *exponent < 1.0 => out.push(format!(
                "polynomial rule: exponent n must satisfy n >= 1 (got {exponent})"
            )),
            DeltaKind::SubExponential { a } if !(*a < 1.0 / sigma) => out.push(format!(
                "sub_exponential rule: a must satisfy 0 < a < 1/sigma = {} (got a = {a})",
                1.0 / sigma
            )),
            DeltaKind::LogTempered { gamma } if !(*gamma > 1.0) => out.push(format!(
                "log_tempered rule: gamma must satisfy gamma > 1 (got {gamma})"
            )),
            DeltaKind::ProductWithPower { power, inner } => {
                if *power < 1.0 {
                    out.push(format!(
                        "product_with_power rule: power s must satisfy s >= 1 (got {power})"
                    ));
                }
                inner.family_violations(sigma, out);
            }
            _ => {}
        }
    }
}

/// `int_T^inf ln(1+t) t^(-1-b) dt <= T^-b (ln T / b + 1/b^2) + T^(-1-b)/(1+b)`.
fn log_tail(t_lo: f64, b: f64) -> f64 {
    t_lo.powf(-b) * (t_lo.ln() / b + 1.0 / (b * b)) + t_lo.powf(-1.0 - b) / (1.0 + b)
}

/// A built-in approximation function together with the `sigma` it is judged against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproximationFunction {
    kind: DeltaKind,
    sigma: f64,
}

impl ApproximationFunction {
    pub fn new(kind: DeltaKind, sigma: f64) -> Result<Self> {
        if !(sigma > 1.0 && sigma.is_finite()) {
            return Err(QbnfError::Configuration(format!(
                "sigma must be > 1, got {sigma}"
            )));
        }
        kind.check_params()?;
        Ok(Self { kind, sigma })
    }

    pub fn polynomial(exponent: f64, sigma: f64) -> Result<Self> {
        Self::new(DeltaKind::Polynomial { exponent }, sigma)
    }

    pub fn sub_exponential(a: f64, sigma: f64) -> Result<Self> {
        Self::new(DeltaKind::SubExponential { a }, sigma)
    }

    pub fn log_tempered(gamma: f64, sigma: f64) -> Result<Self> {
        Self::new(DeltaKind::LogTempered { gamma }, sigma)
    }

    pub fn with_power(&self, power: f64) -> Result<Self> {
        Self::new(
            DeltaKind::ProductWithPower {
                power,
                inner: Box::new(self.kind.clone()),
            },
            self.sigma,
        )
    }

    pub fn kind(&self) -> &DeltaKind {
        &self.kind
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// `ln Delta(t)`.
    pub fn ln_eval(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(QbnfError::Domain(format!("Delta requires t >= 0, got {t}")));
        }
        Ok(self.kind.ln_eval(t, self.sigma))
    }

    /// `Delta(t)`.
    pub fn evaluate(&self, t: f64) -> Result<f64> {
        self.ln_eval(t).map(f64::exp)
    }

    pub(crate) fn ln_eval_unchecked(&self, t: f64) -> f64 {
        self.kind.ln_eval(t, self.sigma)
    }

    /// Breaches of the family's parameter rules relative to `sigma`.
    pub fn family_violations(&self, sigma: f64) -> Vec<String> {
        let mut out = Vec::new();
        self.kind.family_violations(sigma, &mut out);
        out
    }
}

impl fmt::Display for ApproximationFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            DeltaKind::Polynomial { exponent } => write!(f, "(1+t)^{exponent}"),
            DeltaKind::SubExponential { a } => write!(f, "exp(t^{a}/{a})"),
            DeltaKind::LogTempered { gamma } => {
                write!(f, "exp(t^(1/{})/(1+log^{gamma}(1+t)))", self.sigma)
            }
            DeltaKind::ProductWithPower { power, inner } => {
                write!(f, "(1+t)^{power} * [{}]", inner.name())
            }
        }
    }
}

// 8-point Gauss-Legendre on [-1, 1].
const GL_NODES: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL_WEIGHTS: [f64; 4] = [
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

fn gauss_legendre(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let mut s = 0.0;
    for (x, w) in GL_NODES.iter().zip(GL_WEIGHTS.iter()) {
        s += w * (f(mid - half * x) + f(mid + half * x));
    }
    s * half
}

/// Cumulative table for `int_T^inf F(t) t^(-1-b) dt` with `F` a log-type
/// numerator, integrated in `u = ln t` with an analytic tail.
struct TailTable {
    integrand: Box<dyn Fn(f64) -> f64>,
    edges: Vec<f64>,
    /// `suffix[i] = int_{edges[i]}^{u_max} + tail`.
    suffix: Vec<f64>,
    tail: f64,
    quadrature: f64,
}

impl TailTable {
    /// `numerator` is evaluated at `t`; the table covers `[t_lo, inf)`.
    fn build(
        numerator: impl Fn(f64) -> f64 + 'static,
        b: f64,
        t_lo: f64,
        u_max: f64,
        tail: f64,
    ) -> Self {
        let integrand = move |u: f64| numerator(u.exp()) * (-b * u).exp();
        let u_lo = t_lo.ln();
        let panels = (((u_max - u_lo) / PANEL_WIDTH).ceil() as usize).max(1);
        let width = (u_max - u_lo) / panels as f64;
        let edges: Vec<f64> = (0..=panels).map(|i| u_lo + width * i as f64).collect();
        let mut suffix = vec![0.0; panels + 1];
        suffix[panels] = tail;
        for i in (0..panels).rev() {
            suffix[i] = suffix[i + 1] + gauss_legendre(&integrand, edges[i], edges[i + 1]);
        }
        let quadrature = suffix[0] - tail;
        TailTable {
            integrand: Box::new(integrand),
            edges,
            suffix,
            tail,
            quadrature,
        }
    }

    fn total(&self) -> f64 {
        self.suffix[0]
    }

    /// `int_T^inf` for `T` inside the table.
    fn from(&self, t: f64) -> f64 {
        let u = t.ln();
        if u <= self.edges[0] {
            return self.suffix[0];
        }
        let last = self.edges.len() - 1;
        if u >= self.edges[last] {
            return self.tail;
        }
        let i = match self.edges.binary_search_by(|e| e.partial_cmp(&u).unwrap()) {
            Ok(i) => return self.suffix[i],
            Err(i) => i - 1,
        };
        self.suffix[i + 1] + gauss_legendre(&self.integrand, u, self.edges[i + 1])
    }

    /// Smallest `T >= t_lo` with `int_T^inf <= target` (bisection in `ln T`).
    fn threshold(&self, target: f64) -> f64 {
        if self.suffix[0] <= target {
            return self.edges[0].exp();
        }
        let last = self.edges.len() - 1;
        if self.tail > target {
            return f64::INFINITY;
        }
        // First edge whose suffix is within target.
        let j = (0..=last)
            .find(|&j| self.suffix[j] <= target)
            .unwrap_or(last);
        let (mut lo, mut hi) = (self.edges[j - 1], self.edges[j]);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.from(mid.exp()) <= target {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo < 1e-15 * hi.abs().max(1.0) {
                break;
            }
        }
        hi.exp()
    }
}

/// Result of checking the monotone-ratio and integrability conditions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidityReport {
    /// `ln Delta(t) / t^(1/sigma)` is eventually non-increasing on the grid.
    pub monotone_ratio_ok: bool,
    /// Grid point where the ratio peaks.
    pub ratio_peak_t: f64,
    /// `Delta` itself is non-decreasing on the grid (spot check, not part of `valid`).
    pub nondecreasing_ok: bool,
    /// Quadrature part plus analytic tail bound.
    pub integral_value: f64,
    pub quadrature_part: f64,
    pub tail_bound: f64,
    pub integral_converges: bool,
    /// Violations of the built-in family's parameter rules.
    pub family_violations: Vec<String>,
    pub valid: bool,
    pub grid_used: String,
}

const VALIDITY_GRID_POINTS: usize = 2000;

/// Checks the eventual monotone decay of `ln Delta(t)/t^(1/sigma)` on a
/// geometric grid `[lower, grid_max]` and the convergence of
/// `int_lower^inf ln Delta(t) / t^(1+1/sigma) dt`.
pub fn check_validity(
    delta: &ApproximationFunction,
    sigma: f64,
    grid_max: f64,
    tail_tol: f64,
) -> Result<ValidityReport> {
    check_validity_from(delta, sigma, DEFAULT_LOWER_ENDPOINT, grid_max, tail_tol)
}

pub fn check_validity_from(
    delta: &ApproximationFunction,
    sigma: f64,
    lower: f64,
    grid_max: f64,
    tail_tol: f64,
) -> Result<ValidityReport> {
    if !(sigma > 1.0) {
        return Err(QbnfError::Configuration(format!(
            "sigma must be > 1, got {sigma}"
        )));
    }
    if !(lower > 0.0 && grid_max > lower) {
        return Err(QbnfError::Configuration(format!(
            "need grid_max > lower endpoint > 0 (got {grid_max}, {lower})"
        )));
    }
    let b = 1.0 / sigma;

    let ratio = |t: f64| delta.ln_eval_unchecked(t) / t.powf(b);
    let step = (grid_max / lower).ln() / (VALIDITY_GRID_POINTS - 1) as f64;
    let ratios: Vec<(f64, f64)> = (0..VALIDITY_GRID_POINTS)
        .map(|i| {
            let t = lower * (step * i as f64).exp();
            (t, ratio(t))
        })
        .collect();
    let (peak_idx, &(peak_t, peak_r)) =
        ratios
            .iter()
            .enumerate()
            .fold((0, &ratios[0]), |best, cur| {
                if cur.1 .1 > best.1 .1 {
                    cur
                } else {
                    best
                }
            });
    let decreasing_after_peak = ratios[peak_idx..]
        .windows(2)
        .all(|w| w[1].1 <= w[0].1 + 1e-12 * w[0].1.abs().max(1e-300));
    let last = ratios[ratios.len() - 1].1;
    let nondecreasing_ok = ratios
        .windows(2)
        .all(|w| delta.ln_eval_unchecked(w[1].0) >= delta.ln_eval_unchecked(w[0].0) - 1e-14);
    let monotone_ratio_ok =
        peak_idx + 1 < ratios.len() && decreasing_after_peak && (last < peak_r || peak_r == 0.0);

    // Quadrature up to grid_max, widened until the analytic tail is below tail_tol.
    let t_switch = grid_max.max(std::f64::consts::E * 2.0);
    let mut u_max = t_switch.ln().min(LN_T_MAX);
    let mut tail = delta.kind.tail_bound(u_max.exp(), b, delta.sigma);
    while let Some(tb) = tail {
        if tb <= tail_tol || u_max >= LN_T_MAX {
            break;
        }
        u_max = (u_max * 2.0).min(LN_T_MAX);
        tail = delta.kind.tail_bound(u_max.exp(), b, delta.sigma);
    }
    let (integral_value, quadrature_part, tail_bound, integral_converges) = match tail {
        Some(tb) => {
            let d = delta.clone();
            let table = TailTable::build(move |t| d.ln_eval_unchecked(t), b, lower, u_max, tb);
            let total = table.total();
            (
                total,
                table.quadrature,
                tb,
                total.is_finite() && total > 0.0,
            )
        }
        None => (f64::INFINITY, 0.0, f64::INFINITY, false),
    };

    let family_violations = delta.family_violations(sigma);
    let valid = monotone_ratio_ok && integral_converges && family_violations.is_empty();
    Ok(ValidityReport {
        monotone_ratio_ok,
        ratio_peak_t: peak_t,
        nondecreasing_ok,
        integral_value,
        quadrature_part,
        tail_bound,
        integral_converges,
        family_violations,
        valid,
        grid_used: format!(
            "geometric, {VALIDITY_GRID_POINTS} points on [{lower:e}, {grid_max:e}]; quadrature to t = {:e}",
            u_max.exp()
        ),
    })
}

/// `Gamma_s(eta)` with the point where it is attained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaSup {
    pub value: f64,
    pub ln_value: f64,
    pub argmax_t: f64,
}

/// `Gamma_s(eta) = sup_{t >= 0} (1+t)^s Delta(t) exp(-eta t^(1/sigma))`.
///
/// Coarse geometric scan over `[0, 1e12]` followed by golden-section
/// refinement of the best bracket, all in the log domain.
pub fn gamma_sup(delta: &ApproximationFunction, s: f64, eta: f64) -> Result<GammaSup> {
    if !(eta > 0.0) {
        return Err(QbnfError::Domain(format!("eta must be > 0, got {eta}")));
    }
    if !(s >= 0.0) {
        return Err(QbnfError::Domain(format!("s must be >= 0, got {s}")));
    }
    let b = 1.0 / delta.sigma;
    let g = |t: f64| {
        let p = if s == 0.0 { 0.0 } else { s * t.ln_1p() };
        p + delta.ln_eval_unchecked(t) - eta * t.powf(b)
    };

    let ratio = (SUP_SEARCH_CAP / SUP_SCAN_START).ln() / (SUP_SCAN_POINTS - 1) as f64;
    let mut ts = Vec::with_capacity(SUP_SCAN_POINTS + 1);
    ts.push(0.0);
    ts.extend((0..SUP_SCAN_POINTS).map(|i| SUP_SCAN_START * (ratio * i as f64).exp()));
    let vals: Vec<f64> = ts.iter().map(|&t| g(t)).collect();
    let mut best = 0;
    for (i, v) in vals.iter().enumerate() {
        if *v > vals[best] {
            best = i;
        }
    }
    if best == ts.len() - 1 {
        return Err(QbnfError::Numeric(format!(
            "supremum not attained below t = {SUP_SEARCH_CAP:e} (g = {} at the cap); \
             is Delta valid for sigma = {}?",
            vals[best], delta.sigma
        )));
    }

    // Golden section on the bracket around the best scan point.
    let lo_t = if best == 0 { 0.0 } else { ts[best - 1] };
    let hi_t = ts[best + 1];
    let (mut best_t, mut best_v) = (ts[best], vals[best]);
    let log_scale = lo_t > 0.0;
    let to_t = |x: f64| if log_scale { x.exp() } else { x };
    let (mut a, mut c) = if log_scale {
        (lo_t.ln(), hi_t.ln())
    } else {
        (lo_t, hi_t)
    };
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = c - inv_phi * (c - a);
    let mut x2 = a + inv_phi * (c - a);
    let mut f1 = g(to_t(x1));
    let mut f2 = g(to_t(x2));
    let mut converged = false;
    for _ in 0..GOLDEN_MAX_ITERS {
        if (c - a).abs() <= 1e-13 * (a.abs() + c.abs()).max(1e-12) {
            converged = true;
            break;
        }
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (c - a);
            f2 = g(to_t(x2));
        } else {
            c = x2;
            x2 = x1;
            f2 = f1;
            x1 = c - inv_phi * (c - a);
            f1 = g(to_t(x1));
        }
    }
    if !converged {
        return Err(QbnfError::Numeric(format!(
            "golden-section refinement did not converge in {GOLDEN_MAX_ITERS} iterations \
             (bracket [{}, {}] around t = {best_t})",
            to_t(a),
            to_t(c)
        )));
    }
    for (x, v) in [(x1, f1), (x2, f2)] {
        if v > best_v {
            best_v = v;
            best_t = to_t(x);
        }
    }
    Ok(GammaSup {
        value: best_v.exp(),
        ln_value: best_v,
        argmax_t: best_t,
    })
}

/// Report of the threshold bound `Gamma_s(eta) <= exp(eta T^(1/sigma))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdBoundReport {
    /// Smallest `T >= lower endpoint` with the scaled tail integral `<= eta`.
    pub threshold_t: f64,
    pub bound: f64,
    pub ln_bound: f64,
    pub gamma_sup: GammaSup,
    pub holds: bool,
    /// `(1/ln kappa) int_T^inf ln Delta / t^(1+1/sigma)`.
    pub a_part: f64,
    /// `(1/ln kappa) int_T^inf ln(1+t) / t^(1+1/sigma)`.
    pub c_part: f64,
    /// `a_part + s * c_part`, the alternative exponent `eta(s)`.
    pub eta_decomposed: f64,
    pub ln_bound_decomposed: f64,
}

/// Relative slack allowed when comparing `Gamma_s(eta)` with its bound.
pub const THRESHOLD_SLACK: f64 = 1e-9;

pub fn gamma_threshold_bound(
    delta: &ApproximationFunction,
    s: f64,
    eta: f64,
    kappa_ratio: f64,
) -> Result<ThresholdBoundReport> {
    gamma_threshold_bound_from(delta, s, eta, kappa_ratio, DEFAULT_LOWER_ENDPOINT)
}

pub fn gamma_threshold_bound_from(
    delta: &ApproximationFunction,
    s: f64,
    eta: f64,
    kappa_ratio: f64,
    lower: f64,
) -> Result<ThresholdBoundReport> {
    if !(kappa_ratio > 1.0 && kappa_ratio <= 2.0) {
        return Err(QbnfError::Domain(format!(
            "kappa ratio must lie in (1, 2], got {kappa_ratio}"
        )));
    }
    if !(eta > 0.0) {
        return Err(QbnfError::Domain(format!("eta must be > 0, got {eta}")));
    }
    let b = 1.0 / delta.sigma;
    let ln_kappa = kappa_ratio.ln();
    let t_tail = LN_T_MAX.exp();

    let inner_tail = delta
        .kind
        .tail_bound(t_tail, b, delta.sigma)
        .ok_or_else(|| {
            QbnfError::Validity(format!(
                "int ln Delta(t)/t^(1+1/sigma) diverges for {delta} at sigma = {}",
                delta.sigma
            ))
        })?;
    let log_tail_v = log_tail(t_tail, b);

    let d = delta.clone();
    let delta_s = TailTable::build(
        move |t| d.ln_eval_unchecked(t) + if s == 0.0 { 0.0 } else { s * t.ln_1p() },
        b,
        lower,
        LN_T_MAX,
        inner_tail + s * log_tail_v,
    );
    let threshold_t = delta_s.threshold(eta * ln_kappa);
    if !threshold_t.is_finite() {
        return Err(QbnfError::Numeric(format!(
            "no threshold T below {t_tail:e} for eta = {eta}"
        )));
    }

    let d = delta.clone();
    let a_table = TailTable::build(
        move |t| d.ln_eval_unchecked(t),
        b,
        lower,
        LN_T_MAX,
        inner_tail,
    );
    let c_table = TailTable::build(|t: f64| t.ln_1p(), b, lower, LN_T_MAX, log_tail_v);
    let a_part = a_table.from(threshold_t) / ln_kappa;
    let c_part = c_table.from(threshold_t) / ln_kappa;
    let eta_decomposed = a_part + s * c_part;

    let ln_bound = eta * threshold_t.powf(b);
    let sup = gamma_sup(delta, s, eta)?;
    let holds = sup.ln_value <= ln_bound + THRESHOLD_SLACK.ln_1p();
    Ok(ThresholdBoundReport {
        threshold_t,
        bound: ln_bound.exp(),
        ln_bound,
        gamma_sup: sup,
        holds,
        a_part,
        c_part,
        eta_decomposed,
        ln_bound_decomposed: eta_decomposed * threshold_t.powf(b),
    })
}
