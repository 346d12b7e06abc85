//! Small-divisor verification: lattice shells, divisor scans against an
//! approximation function, flagged action grids and finite-difference probes
//! of the inverse divisor.
//!
//! `|k|` is always the l1 norm and every claim is "verified up to radius K".

use std::fmt;
use std::ops::{Add, Neg};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::approximation::ApproximationFunction;
use crate::error::{QbnfError, Result};
use crate::gevrey::{factorial_f64, ln_gamma, MultiIndex};
use crate::jet::Jet;

/// Largest shell we are willing to materialise.
pub const MAX_SHELL_SIZE: u128 = 20_000_000;

/// An integer Fourier mode `k in Z^n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Mode(Vec<i64>);

impl Mode {
    pub fn new(k: Vec<i64>) -> Self {
        Self(k)
    }

    pub fn zero(n: usize) -> Self {
        Self(vec![0; n])
    }

    pub fn entries(&self) -> &[i64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&k| k == 0)
    }

    /// `|k| = |k_1| + ... + |k_n|`.
    pub fn l1(&self) -> u64 {
        self.0.iter().map(|k| k.unsigned_abs()).sum()
    }

    pub fn dot(&self, omega: &[f64]) -> f64 {
        self.0.iter().zip(omega).map(|(&k, &w)| k as f64 * w).sum()
    }

    /// `k^g = prod k_i^g_i` (exact for the small integers in play).
    pub fn pow(&self, g: &MultiIndex) -> f64 {
        self.0
            .iter()
            .zip(g.entries())
            .map(|(&k, &e)| (k as f64).powi(e as i32))
            .product()
    }
}

impl Add for &Mode {
    type Output = Mode;
    fn add(self, rhs: &Mode) -> Mode {
        Mode(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Neg for &Mode {
    type Output = Mode;
    fn neg(self) -> Mode {
        Mode(self.0.iter().map(|k| -k).collect())
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::error::fmt_mode(&self.0))
    }
}

impl From<Vec<i64>> for Mode {
    fn from(v: Vec<i64>) -> Self {
        Self(v)
    }
}

fn binom_u128(n: u128, k: u128) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul(n - i)? / (i + 1);
    }
    Some(acc)
}

/// Number of `k in Z^n` with `|k|_1 = m`: `sum_i 2^i C(n,i) C(m-1,i-1)`.
pub fn shell_size(n: usize, m: u64) -> Option<u128> {
    if m == 0 {
        return Some(1);
    }
    let (n, m) = (n as u128, u128::from(m));
    let mut total: u128 = 0;
    for i in 1..=n.min(m) {
        let term = binom_u128(n, i)?
            .checked_mul(binom_u128(m - 1, i - 1)?)?
            .checked_mul(1u128.checked_shl(i as u32)?)?;
        total = total.checked_add(term)?;
    }
    Some(total)
}

/// All `k in Z^n` with `|k|_1 = m`, each exactly once.
///
/// Order: first coordinate descending from `m` to `-m`, recursively.
pub fn enumerate_shell(n: usize, m: u64) -> Result<Vec<Mode>> {
    if n == 0 || m == 0 {
        return Err(QbnfError::Input(format!(
            "shell enumeration needs n >= 1 and m >= 1 (got n={n}, m={m})"
        )));
    }
    let size = shell_size(n, m)
        .filter(|&s| s <= MAX_SHELL_SIZE)
        .ok_or_else(|| {
            QbnfError::Size(format!(
                "shell |k| = {m} in dimension {n} exceeds {MAX_SHELL_SIZE} vectors"
            ))
        })?;
    let mut out = Vec::with_capacity(size as usize);
    let mut prefix = Vec::with_capacity(n);
    shell_rec(n, m as i64, &mut prefix, &mut out);
    Ok(out)
}

fn shell_rec(n: usize, remaining: i64, prefix: &mut Vec<i64>, out: &mut Vec<Mode>) {
    if prefix.len() + 1 == n {
        if remaining == 0 {
            prefix.push(0);
            out.push(Mode(prefix.clone()));
            prefix.pop();
        } else {
            for v in [remaining, -remaining] {
                prefix.push(v);
                out.push(Mode(prefix.clone()));
                prefix.pop();
            }
        }
        return;
    }
    for v in (-remaining..=remaining).rev() {
        prefix.push(v);
        shell_rec(n, remaining - v.abs(), prefix, out);
        prefix.pop();
    }
}

/// All nonzero modes with `|k|_1 <= radius`, shell by shell.
pub fn enumerate_ball(n: usize, radius: u64) -> Result<Vec<Mode>> {
    let mut out = Vec::new();
    for m in 1..=radius {
        out.extend(enumerate_shell(n, m)?);
    }
    Ok(out)
}

/// `|<k, omega>|` is treated as an exact resonance below this multiple of the
/// rounding level of the sum.
const RESONANCE_ULPS: f64 = 4.0;

pub(crate) fn is_resonant(k: &Mode, omega: &[f64], divisor: f64) -> bool {
    let scale: f64 = k
        .entries()
        .iter()
        .zip(omega)
        .map(|(&ki, &w)| (ki as f64 * w).abs())
        .sum();
    divisor <= RESONANCE_ULPS * f64::EPSILON * scale
}

/// Minimum over one shell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShellMinimum {
    pub m: u64,
    /// `min_{|k|=m} |<k, omega>|`.
    pub min_divisor: f64,
    /// `min_{|k|=m} |<k, omega>| * Delta(m)`.
    pub min_scaled: f64,
    pub argmin: Mode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivisorReport {
    pub k_radius: u64,
    pub shells: Vec<ShellMinimum>,
    /// Largest `kappa` for which `|<k,omega>| >= kappa / Delta(|k|)` holds up to the radius.
    pub kappa_max: f64,
    pub worst_k: Mode,
    pub worst_divisor: f64,
    pub kappa: f64,
    pub verdict: bool,
    /// `max_k ln(1/|<k,omega>|) / ln|k|` over `|k| >= 2`.
    pub diophantine_tau_fit: f64,
}

/// Scans every `0 < |k|_1 <= k_radius` and records the smallest scaled divisor.
pub fn scan_divisors(
    omega: &[f64],
    delta: &ApproximationFunction,
    k_radius: u64,
    kappa: f64,
) -> Result<DivisorReport> {
    if omega.is_empty() || omega.iter().all(|&w| w == 0.0) {
        return Err(QbnfError::Input("omega must be a non-zero vector".into()));
    }
    if omega.iter().any(|w| !w.is_finite()) {
        return Err(QbnfError::Input("omega has non-finite entries".into()));
    }
    if k_radius == 0 {
        return Err(QbnfError::Input("scan radius K must be >= 1".into()));
    }
    let n = omega.len();
    let mut shells = Vec::with_capacity(k_radius as usize);
    let mut kappa_max = f64::INFINITY;
    let mut worst_k = Mode::zero(n);
    let mut worst_divisor = f64::INFINITY;
    let mut tau: f64 = f64::NEG_INFINITY;
    for m in 1..=k_radius {
        let delta_m = delta.evaluate(m as f64)?;
        let mut best: Option<(f64, Mode)> = None;
        for k in enumerate_shell(n, m)? {
            let d = k.dot(omega).abs();
            if is_resonant(&k, omega, d) {
                return Err(QbnfError::Resonant { k: k.0 });
            }
            if m >= 2 {
                tau = tau.max((1.0 / d).ln() / (m as f64).ln());
            }
            if best.as_ref().is_none_or(|(bd, _)| d < *bd) {
                best = Some((d, k));
            }
        }
        let (d, k) = best.expect("shells are non-empty");
        let scaled = d * delta_m;
        if scaled < kappa_max {
            kappa_max = scaled;
            worst_k = k.clone();
            worst_divisor = d;
        }
        shells.push(ShellMinimum {
            m,
            min_divisor: d,
            min_scaled: scaled,
            argmin: k,
        });
    }
    Ok(DivisorReport {
        k_radius,
        shells,
        kappa_max,
        worst_k,
        worst_divisor,
        kappa,
        verdict: kappa_max >= kappa,
        diophantine_tau_fit: if tau.is_finite() { tau } else { 0.0 },
    })
}

/// One term `c(t) (I - I0)^e` of a frequency component, with `c(t)` an
/// ascending polynomial in `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyTerm {
    pub exponent: MultiIndex,
    pub t_coeffs: Vec<f64>,
}

impl FrequencyTerm {
    pub fn coefficient(&self, t: f64) -> f64 {
        self.t_coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FrequencyForm {
    Constant(Vec<f64>),
    /// One polynomial per component, in the offset `I - I0`.
    Polynomial(Vec<Vec<FrequencyTerm>>),
}

/// A frequency map `I -> omega(I; t)` about a base action.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencySpec {
    dimension: usize,
    form: FrequencyForm,
    base_action: Vec<f64>,
}

impl FrequencySpec {
    pub fn constant(omega: Vec<f64>) -> Result<Self> {
        let n = omega.len();
        Self::new(FrequencyForm::Constant(omega), vec![0.0; n])
    }

    pub fn new(form: FrequencyForm, base_action: Vec<f64>) -> Result<Self> {
        let n = base_action.len();
        if n == 0 {
            return Err(QbnfError::Input("dimension must be >= 1".into()));
        }
        match &form {
            FrequencyForm::Constant(w) if w.len() != n => {
                return Err(QbnfError::Shape(format!(
                    "constant frequency has {} entries, expected {n}",
                    w.len()
                )))
            }
            FrequencyForm::Polynomial(comps) => {
                if comps.len() != n {
                    return Err(QbnfError::Shape(format!(
                        "polynomial frequency has {} components, expected {n}",
                        comps.len()
                    )));
                }
                for term in comps.iter().flatten() {
                    if term.exponent.len() != n {
                        return Err(QbnfError::Shape(format!(
                            "frequency term exponent {} has wrong length (expected {n})",
                            term.exponent
                        )));
                    }
                }
            }
            _ => {}
        }
        Ok(Self {
            dimension: n,
            form,
            base_action,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn form(&self) -> &FrequencyForm {
        &self.form
    }

    pub fn base_action(&self) -> &[f64] {
        &self.base_action
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.form, FrequencyForm::Constant(_))
    }

    /// `omega(I; t)`.
    pub fn evaluate(&self, action: &[f64], t: f64) -> Result<Vec<f64>> {
        if action.len() != self.dimension {
            return Err(QbnfError::Shape(format!(
                "action has {} entries, expected {}",
                action.len(),
                self.dimension
            )));
        }
        Ok(match &self.form {
            FrequencyForm::Constant(w) => w.clone(),
            FrequencyForm::Polynomial(comps) => {
                let x: Vec<f64> = action
                    .iter()
                    .zip(&self.base_action)
                    .map(|(a, b)| a - b)
                    .collect();
                comps
                    .iter()
                    .map(|terms| {
                        terms
                            .iter()
                            .map(|term| {
                                let mono: f64 = term
                                    .exponent
                                    .entries()
                                    .iter()
                                    .zip(&x)
                                    .map(|(&e, &xi)| xi.powi(e as i32))
                                    .product();
                                term.coefficient(t) * mono
                            })
                            .sum()
                    })
                    .collect()
            }
        })
    }

    /// The components of `omega(I; t)` as jets about the base action.
    pub fn jets(&self, t: f64) -> Vec<Jet> {
        let n = self.dimension;
        match &self.form {
            FrequencyForm::Constant(w) => w
                .iter()
                .map(|&v| Jet::constant(n, Complex64::new(v, 0.0)))
                .collect(),
            FrequencyForm::Polynomial(comps) => comps
                .iter()
                .map(|terms| {
                    let mut j = Jet::zero(n);
                    for term in terms {
                        j.add_term(
                            term.exponent.clone(),
                            Complex64::new(term.coefficient(t), 0.0),
                        );
                    }
                    j
                })
                .collect(),
        }
    }
}

/// Actions flagged as belonging to the nonresonant set up to radius K.
///
/// The grid is a finite stand-in for a Cantor-like set and is labelled as such.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonresonantGrid {
    pub actions: Vec<Vec<f64>>,
    pub flags: Vec<bool>,
    /// `kappa_max` per action; `None` on exact resonance.
    pub kappa_max: Vec<Option<f64>>,
    pub t_value: f64,
    pub k_radius: u64,
    pub kappa: f64,
    pub representation: String,
}

pub fn mark_nonresonant_grid(
    freq: &FrequencySpec,
    delta: &ApproximationFunction,
    kappa: f64,
    k_radius: u64,
    actions: &[Vec<f64>],
    t: f64,
) -> Result<NonresonantGrid> {
    let mut flags = Vec::with_capacity(actions.len());
    let mut kmax = Vec::with_capacity(actions.len());
    for action in actions {
        let omega = freq.evaluate(action, t)?;
        match scan_divisors(&omega, delta, k_radius, kappa) {
            Ok(r) => {
                flags.push(r.verdict);
                kmax.push(Some(r.kappa_max));
            }
            Err(QbnfError::Resonant { .. }) => {
                flags.push(false);
                kmax.push(None);
            }
            Err(QbnfError::Input(_)) if omega.iter().all(|&w| w == 0.0) => {
                flags.push(false);
                kmax.push(None);
            }
            Err(e) => return Err(e),
        }
    }
    Ok(NonresonantGrid {
        actions: actions.to_vec(),
        flags,
        kappa_max: kmax,
        t_value: t,
        k_radius,
        kappa,
        representation: "finite action grid, divisor condition verified up to radius K".into(),
    })
}

/// Settings for [`divisor_derivative_probe`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeSettings {
    /// The constant `C_0` of the envelope.
    pub c0: f64,
    pub rho: f64,
    pub kappa: f64,
    /// Finite-difference step; `None` selects `1e-4 (1 + |I0|)`.
    pub step: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeEntry {
    pub alpha: MultiIndex,
    pub t_order: u32,
    /// Richardson-extrapolated derivative of `1/<omega(I;t), k>`.
    pub derivative: f64,
    pub envelope: f64,
    pub ratio: f64,
    /// Set when the two step sizes disagree beyond rounding expectations.
    pub warning: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerivativeProbe {
    pub k: Mode,
    pub divisor: f64,
    /// `|<omega,k>|^-1 <= Delta(|k|)/kappa` at the base point.
    pub base_bound_holds: bool,
    pub step: f64,
    pub entries: Vec<ProbeEntry>,
}

/// Order-by-order finite-difference magnitudes of `D_I^alpha D_t^delta <omega(I;t),k>^-1`
/// against the envelope
/// `C0^(|a|+d+1) a! d! max_j ((|a|+d-j)!^rho |k|^j Delta(|k|)^(j+1))`.
pub fn divisor_derivative_probe(
    freq: &FrequencySpec,
    delta: &ApproximationFunction,
    k: &Mode,
    orders: &[(MultiIndex, u32)],
    t: f64,
    settings: ProbeSettings,
) -> Result<DerivativeProbe> {
    let n = freq.dimension();
    if k.dim() != n {
        return Err(QbnfError::Shape(format!(
            "mode {k} has wrong dimension (expected {n})"
        )));
    }
    let base = freq.base_action().to_vec();
    let omega0 = freq.evaluate(&base, t)?;
    let divisor = k.dot(&omega0);
    if is_resonant(k, &omega0, divisor.abs()) {
        return Err(QbnfError::Resonant {
            k: k.entries().to_vec(),
        });
    }
    let k_norm = k.l1() as f64;
    let ln_delta_k = delta.ln_eval(k_norm)?;
    let base_bound_holds = 1.0 / divisor.abs() <= ln_delta_k.exp() / settings.kappa;
    let scale = 1.0 + base.iter().map(|v| v * v).sum::<f64>().sqrt();
    let step = settings.step.unwrap_or(1e-4 * scale);

    let g = |point: &[f64]| -> Result<f64> {
        let (action, tt) = point.split_at(n);
        Ok(1.0 / k.dot(&freq.evaluate(action, tt[0])?))
    };

    let mut entries = Vec::with_capacity(orders.len());
    for (alpha, t_order) in orders {
        if alpha.len() != n {
            return Err(QbnfError::Shape(format!(
                "derivative index {alpha} has wrong length (expected {n})"
            )));
        }
        let total = alpha.order() + t_order;
        if total > 3 {
            return Err(QbnfError::Input(format!(
                "probe supports |alpha| + delta <= 3 (got {total})"
            )));
        }
        let mut counts: Vec<u32> = alpha.entries().to_vec();
        counts.push(*t_order);

        let (derivative, warning) = if total == 0 {
            (1.0 / divisor, None)
        } else if freq.is_constant() {
            (0.0, None)
        } else {
            let mut point = base.clone();
            point.push(t);
            let coarse = mixed_central_difference(&g, &point, &counts, step)?;
            let fine = mixed_central_difference(&g, &point, &counts, step / 2.0)?;
            let extrap = (4.0 * fine - coarse) / 3.0;
            let spread = (fine - coarse).abs();
            let warning = if spread > 1e-2 * extrap.abs() + 1e-9 {
                Some(format!(
                    "Richardson disagreement {spread:e} at step {step:e}; step may be too small or too large"
                ))
            } else {
                None
            };
            (extrap, warning)
        };

        let envelope = lemma_envelope(
            settings.c0,
            settings.rho,
            alpha,
            *t_order,
            k_norm,
            ln_delta_k,
        );
        entries.push(ProbeEntry {
            alpha: alpha.clone(),
            t_order: *t_order,
            derivative,
            envelope,
            ratio: derivative.abs() / envelope,
            warning,
        });
    }
    Ok(DerivativeProbe {
        k: k.clone(),
        divisor,
        base_bound_holds,
        step,
        entries,
    })
}

fn lemma_envelope(
    c0: f64,
    rho: f64,
    alpha: &MultiIndex,
    t_order: u32,
    k_norm: f64,
    ln_delta: f64,
) -> f64 {
    let total = alpha.order() + t_order;
    let mut best = f64::NEG_INFINITY;
    for j in 0..=total {
        let v = rho * ln_gamma(f64::from(total - j) + 1.0)
            + f64::from(j) * k_norm.ln()
            + f64::from(j + 1) * ln_delta;
        best = best.max(v);
    }
    let ln_env = f64::from(total + 1) * c0.ln()
        + alpha.factorial_f64().ln()
        + factorial_f64(t_order).ln()
        + best;
    ln_env.exp()
}

/// Tensor-product central difference; variable `i` is differentiated
/// `counts[i]` times with half-step offsets `(d/2 - m) h`.
fn mixed_central_difference(
    g: &impl Fn(&[f64]) -> Result<f64>,
    point: &[f64],
    counts: &[u32],
    h: f64,
) -> Result<f64> {
    let stencils: Vec<Vec<(f64, f64)>> = counts
        .iter()
        .map(|&d| {
            (0..=d)
                .map(|m| {
                    let w = binomial_f(d, m) * if m % 2 == 0 { 1.0 } else { -1.0 };
                    (w, (f64::from(d) / 2.0 - f64::from(m)) * h)
                })
                .collect()
        })
        .collect();
    let mut total = 0.0;
    let mut idx = vec![0usize; counts.len()];
    let mut p = point.to_vec();
    loop {
        let mut w = 1.0;
        for (v, &i) in idx.iter().enumerate() {
            let (wi, off) = stencils[v][i];
            w *= wi;
            p[v] = point[v] + off;
        }
        total += w * g(&p)?;
        // odometer
        let mut v = 0;
        loop {
            if v == idx.len() {
                let order: u32 = counts.iter().sum();
                return Ok(total / h.powi(order as i32));
            }
            idx[v] += 1;
            if idx[v] < stencils[v].len() {
                break;
            }
            idx[v] = 0;
            v += 1;
        }
    }
}

fn binomial_f(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * f64::from(n - i) / f64::from(i + 1))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn box_filter(n: usize, m: u64) -> usize {
        let r = m as i64;
        let mut count = 0;
        let mut idx = vec![-r; n];
        loop {
            if idx.iter().map(|v| v.unsigned_abs()).sum::<u64>() == m {
                count += 1;
            }
            let mut v = 0;
            loop {
                if v == n {
                    return count;
                }
                idx[v] += 1;
                if idx[v] <= r {
                    break;
                }
                idx[v] = -r;
                v += 1;
            }
        }
    }

    #[test]
    fn shell_examples() {
        assert_eq!(
            enumerate_shell(1, 3).unwrap(),
            vec![Mode::new(vec![3]), Mode::new(vec![-3])]
        );
        let s: std::collections::BTreeSet<_> = enumerate_shell(2, 1).unwrap().into_iter().collect();
        let expect: std::collections::BTreeSet<_> = [[1, 0], [-1, 0], [0, 1], [0, -1]]
            .iter()
            .map(|v| Mode::new(v.to_vec()))
            .collect();
        assert_eq!(s, expect);
        assert_eq!(enumerate_shell(2, 4).unwrap().len(), box_filter(2, 4));
        assert_eq!(box_filter(2, 4), 16);
    }

    #[test]
    fn shell_counts_match_box_filter() {
        for n in 1..=3 {
            for m in 1..=8 {
                let shell = enumerate_shell(n, m).unwrap();
                assert_eq!(shell.len(), box_filter(n, m), "n={n} m={m}");
                assert_eq!(shell_size(n, m).unwrap() as usize, shell.len());
                let set: std::collections::BTreeSet<_> = shell.iter().cloned().collect();
                assert_eq!(set.len(), shell.len());
                assert!(shell.iter().all(|k| k.l1() == m));
            }
        }
    }

    #[test]
    fn shell_size_guard() {
        assert!(matches!(enumerate_shell(12, 60), Err(QbnfError::Size(_))));
    }

    #[test]
    fn resonant_omega_names_k() {
        let d = ApproximationFunction::polynomial(1.0, 2.0).unwrap();
        match scan_divisors(&[1.0, 1.0], &d, 5, 0.1) {
            Err(QbnfError::Resonant { k }) => assert_eq!(k, vec![1, -1]),
            other => panic!("expected resonance, got {other:?}"),
        }
    }

    #[test]
    fn kappa_max_monotone_in_radius() {
        let d = ApproximationFunction::polynomial(2.0, 2.0).unwrap();
        let omega = [1.0, 2f64.sqrt()];
        let mut prev = f64::INFINITY;
        for k in 1..=20 {
            let r = scan_divisors(&omega, &d, k, 0.0).unwrap();
            assert!(r.kappa_max <= prev);
            prev = r.kappa_max;
        }
    }

    #[test]
    fn stronger_delta_admits_larger_kappa() {
        let d1 = ApproximationFunction::polynomial(1.0, 2.0).unwrap();
        let d2 = ApproximationFunction::polynomial(2.0, 2.0).unwrap();
        let omega = [1.0, (1.0 + 5f64.sqrt()) / 2.0];
        let r1 = scan_divisors(&omega, &d1, 25, 0.0).unwrap();
        let r2 = scan_divisors(&omega, &d2, 25, 0.0).unwrap();
        assert!(r2.kappa_max >= r1.kappa_max);
    }

    #[test]
    fn sqrt2_shell_minima_reported() {
        let d = ApproximationFunction::polynomial(2.0, 2.0).unwrap();
        let r = scan_divisors(&[1.0, 2f64.sqrt()], &d, 20, 0.0).unwrap();
        assert_eq!(r.shells.len(), 20);
        // Record-small divisors only ever decrease along the running minimum.
        let mut running = f64::INFINITY;
        for s in &r.shells {
            running = running.min(s.min_divisor);
        }
        assert!(running < r.shells[0].min_divisor);
        assert!(r.diophantine_tau_fit > 0.0);
    }

    #[test]
    fn grid_flags_diagonal_resonance() {
        let d = ApproximationFunction::polynomial(2.0, 2.0).unwrap();
        let id = FrequencySpec::new(
            FrequencyForm::Polynomial(vec![
                vec![
                    FrequencyTerm {
                        exponent: MultiIndex::new(vec![0, 0]),
                        t_coeffs: vec![1.0],
                    },
                    FrequencyTerm {
                        exponent: MultiIndex::new(vec![1, 0]),
                        t_coeffs: vec![1.0],
                    },
                ],
                vec![
                    FrequencyTerm {
                        exponent: MultiIndex::new(vec![0, 0]),
                        t_coeffs: vec![1.0],
                    },
                    FrequencyTerm {
                        exponent: MultiIndex::new(vec![0, 1]),
                        t_coeffs: vec![1.0],
                    },
                ],
            ]),
            vec![1.0, 1.0],
        )
        .unwrap();
        let actions = vec![vec![1.5, 1.5], vec![1.5, 1.5 * 2f64.sqrt()], vec![2.0, 2.0]];
        let g = mark_nonresonant_grid(&id, &d, 1e-3, 10, &actions, 0.0).unwrap();
        assert_eq!(g.flags, vec![false, true, false]);
        assert!(g.kappa_max[0].is_none());
    }

    #[test]
    fn constant_frequency_grid_all_true() {
        let d = ApproximationFunction::polynomial(2.0, 2.0).unwrap();
        let f = FrequencySpec::constant(vec![1.0, (1.0 + 5f64.sqrt()) / 2.0]).unwrap();
        let actions = vec![vec![0.0, 0.0], vec![0.3, -0.2]];
        let g = mark_nonresonant_grid(&f, &d, 0.1, 12, &actions, 0.0).unwrap();
        assert!(g.flags.iter().all(|&f| f));
    }

    fn twist(base: Vec<f64>) -> FrequencySpec {
        // omega(I) = (1, I_1) written about base = (b1, b2).
        let b1 = base[0];
        FrequencySpec::new(
            FrequencyForm::Polynomial(vec![
                vec![FrequencyTerm {
                    exponent: MultiIndex::new(vec![0, 0]),
                    t_coeffs: vec![1.0],
                }],
                vec![
                    FrequencyTerm {
                        exponent: MultiIndex::new(vec![0, 0]),
                        t_coeffs: vec![b1],
                    },
                    FrequencyTerm {
                        exponent: MultiIndex::new(vec![1, 0]),
                        t_coeffs: vec![1.0],
                    },
                ],
            ]),
            base,
        )
        .unwrap()
    }

    #[test]
    fn probe_examples() {
        let d = ApproximationFunction::polynomial(1.0, 2.0).unwrap();
        let golden = (1.0 + 5f64.sqrt()) / 2.0;
        let f = twist(vec![golden, 0.0]);
        let k = Mode::new(vec![0, 1]);
        let settings = ProbeSettings {
            c0: 2.0,
            rho: 2.0,
            kappa: 0.1,
            step: None,
        };
        let probe = divisor_derivative_probe(
            &f,
            &d,
            &k,
            &[
                (MultiIndex::new(vec![0, 0]), 0),
                (MultiIndex::new(vec![1, 0]), 0),
            ],
            0.0,
            settings,
        )
        .unwrap();
        assert!(probe.base_bound_holds);
        assert!((probe.entries[0].derivative - 1.0 / golden).abs() < 1e-15);
        let exact = -1.0 / (golden * golden);
        assert!((probe.entries[1].derivative - exact).abs() < 1e-6);
        assert!(probe.entries[1].warning.is_none());

        let c = FrequencySpec::constant(vec![1.0, golden]).unwrap();
        let probe = divisor_derivative_probe(
            &c,
            &d,
            &Mode::new(vec![1, -1]),
            &[
                (MultiIndex::new(vec![2, 1]), 0),
                (MultiIndex::new(vec![0, 0]), 1),
            ],
            0.0,
            settings,
        )
        .unwrap();
        assert!(probe.entries.iter().all(|e| e.derivative == 0.0));
    }

    #[test]
    fn probe_second_order_and_time() {
        // omega_2 = I_1 + t about base (1.5, 0): d^2/dI1^2 (1/(I1+t)) = 2/(I1+t)^3.
        let base = vec![1.5, 0.0];
        let f = FrequencySpec::new(
            FrequencyForm::Polynomial(vec![
                vec![FrequencyTerm {
                    exponent: MultiIndex::new(vec![0, 0]),
                    t_coeffs: vec![1.0],
                }],
                vec![
                    FrequencyTerm {
                        exponent: MultiIndex::new(vec![0, 0]),
                        t_coeffs: vec![1.5, 1.0],
                    },
                    FrequencyTerm {
                        exponent: MultiIndex::new(vec![1, 0]),
                        t_coeffs: vec![1.0],
                    },
                ],
            ]),
            base,
        )
        .unwrap();
        let d = ApproximationFunction::polynomial(1.0, 2.0).unwrap();
        let settings = ProbeSettings {
            c0: 2.0,
            rho: 2.0,
            kappa: 0.1,
            step: Some(1e-3),
        };
        let t = 0.25;
        let probe = divisor_derivative_probe(
            &f,
            &d,
            &Mode::new(vec![0, 1]),
            &[
                (MultiIndex::new(vec![2, 0]), 0),
                (MultiIndex::new(vec![1, 0]), 1),
            ],
            t,
            settings,
        )
        .unwrap();
        let x = 1.5 + t;
        assert!((probe.entries[0].derivative - 2.0 / x.powi(3)).abs() < 1e-6);
        assert!((probe.entries[1].derivative - 2.0 / x.powi(3)).abs() < 1e-6);
        assert!(probe
            .entries
            .iter()
            .all(|e| e.ratio.is_finite() && e.ratio > 0.0));
    }
}
