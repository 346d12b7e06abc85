//! The homological equation `(1/i) L_omega u = f` on the torus, solved by
//! Fourier division, and sub-exponential decay fits of Fourier coefficients.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::approximation::ApproximationFunction;
use crate::error::{QbnfError, Result};
use crate::jet::Jet;
use crate::nonresonance::{is_resonant, Mode};
use crate::symbol::SymbolSlice;

/// The frequency used for division.
#[derive(Debug, Clone, PartialEq)]
pub enum DivisorFrequency {
    /// `omega` fixed; division acts on whole Taylor coefficients.
    Constant(Vec<f64>),
    /// `omega_i(I)` as jets about the base action; `<omega(I),k>^-1` is
    /// expanded as a truncated formal reciprocal.
    Taylor(Vec<Jet>),
}

impl DivisorFrequency {
    pub fn dim(&self) -> usize {
        match self {
            DivisorFrequency::Constant(w) => w.len(),
            DivisorFrequency::Taylor(j) => j.len(),
        }
    }

    /// `omega(I0)`.
    pub fn at_base(&self) -> Vec<f64> {
        match self {
            DivisorFrequency::Constant(w) => w.clone(),
            DivisorFrequency::Taylor(j) => j.iter().map(|c| c.constant_term().re).collect(),
        }
    }

    /// `<omega(I), k>` as a jet.
    pub fn divisor_jet(&self, k: &Mode) -> Jet {
        let n = self.dim();
        match self {
            DivisorFrequency::Constant(w) => Jet::constant(n, Complex64::new(k.dot(w), 0.0)),
            DivisorFrequency::Taylor(comps) => {
                let mut out = Jet::zero(n);
                for (&ki, c) in k.entries().iter().zip(comps) {
                    if ki != 0 {
                        out.add_scaled(c, Complex64::new(ki as f64, 0.0));
                    }
                }
                out
            }
        }
    }
}

/// Angles and action offsets on which residuals are sampled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticGrid {
    pub angles: Vec<Vec<f64>>,
    /// Offsets `I - I0`.
    pub offsets: Vec<Vec<f64>>,
}

impl DiagnosticGrid {
    /// A tensor grid of `points` equispaced angles per coordinate at `I = I0`.
    pub fn uniform(n: usize, points: usize) -> Self {
        let step = std::f64::consts::TAU / points as f64;
        let mut angles = vec![Vec::with_capacity(n)];
        for _ in 0..n {
            let mut next = Vec::with_capacity(angles.len() * points);
            for a in &angles {
                for i in 0..points {
                    let mut v = a.clone();
                    v.push(step * i as f64);
                    next.push(v);
                }
            }
            angles = next;
        }
        Self {
            angles,
            offsets: vec![vec![0.0; n]],
        }
    }

    /// Default resolution: 16 angles per coordinate in one dimension, 8 in
    /// two, 4 beyond.
    pub fn default_for(n: usize) -> Self {
        let points = match n {
            1 => 16,
            2 => 8,
            _ => 4,
        };
        Self::uniform(n, points)
    }

    pub fn with_offsets(mut self, offsets: Vec<Vec<f64>>) -> Self {
        self.offsets = offsets;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HomologicalSolution {
    /// Zero-mean solution.
    pub u: SymbolSlice,
    /// Angle average of the input, removed before solving.
    pub mean: Jet,
    pub worst_divisor: f64,
    pub worst_k: Option<Mode>,
    pub residual_sup: f64,
    /// Taylor mass dropped by the reciprocal expansion.
    pub taylor_clipped: f64,
    /// `min_k |<omega(I0),k>| / (l1 mass of the I-dependent part of <omega(I),k>)`.
    pub validity_radius: f64,
}

/// Solves `(1/i) L_omega u = f - <f>` mode by mode, `u_k = f_k / <omega, k>`.
///
/// Every active mode must satisfy `|<omega(I0),k>| >= kappa / Delta(|k|)`.
pub fn solve_homological(
    f: &SymbolSlice,
    omega: &DivisorFrequency,
    delta: &ApproximationFunction,
    kappa: f64,
    taylor_degree: u32,
) -> Result<HomologicalSolution> {
    let n = f.dim();
    if omega.dim() != n {
        return Err(QbnfError::Shape(format!(
            "frequency has {} components, slice dimension is {n}",
            omega.dim()
        )));
    }
    let base = omega.at_base();
    let mean = f.mean();
    let mut u = SymbolSlice::zero(n);
    let mut worst_divisor = f64::INFINITY;
    let mut worst_k = None;
    let mut taylor_clipped = 0.0;
    let mut validity_radius = f64::INFINITY;
    for (k, fk) in f.modes() {
        if k.is_zero() {
            continue;
        }
        let d0 = k.dot(&base);
        if is_resonant(k, &base, d0.abs()) {
            return Err(QbnfError::Resonant {
                k: k.entries().to_vec(),
            });
        }
        let threshold = kappa / delta.evaluate(k.l1() as f64)?;
        if d0.abs() < threshold {
            return Err(QbnfError::SmallDivisor {
                order: 0,
                k: k.entries().to_vec(),
                divisor: d0.abs(),
                threshold,
            });
        }
        if d0.abs() < worst_divisor {
            worst_divisor = d0.abs();
            worst_k = Some(k.clone());
        }
        let uk = match omega {
            DivisorFrequency::Constant(_) => fk.scaled(Complex64::new(1.0 / d0, 0.0)),
            DivisorFrequency::Taylor(_) => {
                let dj = omega.divisor_jet(k);
                let varying = dj.l1_norm() - dj.constant_term().norm();
                if varying > 0.0 {
                    validity_radius = validity_radius.min(d0.abs() / varying);
                }
                let recip = dj.reciprocal(taylor_degree)?;
                let (prod, lost) = fk.mul_truncated(&recip, taylor_degree);
                taylor_clipped += lost;
                prod
            }
        };
        u.add_jet(k.clone(), &uk);
    }
    let grid = DiagnosticGrid::default_for(n);
    let projected = f.without_mean();
    let residual = residual_sup(&u, &projected, omega, &grid, taylor_degree);
    Ok(HomologicalSolution {
        u,
        mean,
        worst_divisor,
        worst_k,
        residual_sup: residual,
        taylor_clipped,
        validity_radius,
    })
}

/// `(1/i) L_omega u` computed exactly per mode as `<omega, k> u_k`, with
/// products truncated at `taylor_degree`.
pub fn apply_lie_derivative(
    u: &SymbolSlice,
    omega: &DivisorFrequency,
    taylor_degree: u32,
) -> SymbolSlice {
    let mut out = SymbolSlice::zero(u.dim());
    for (k, uk) in u.modes() {
        let dj = omega.divisor_jet(k);
        out.add_jet(k.clone(), &uk.mul_truncated(&dj, taylor_degree).0);
    }
    out
}

/// `sup |(1/i) L_omega u - f|` over the grid.
pub fn residual_sup(
    u: &SymbolSlice,
    f: &SymbolSlice,
    omega: &DivisorFrequency,
    grid: &DiagnosticGrid,
    taylor_degree: u32,
) -> f64 {
    let r = apply_lie_derivative(u, omega, taylor_degree).sub(f);
    if r.is_zero() {
        return 0.0;
    }
    let mut worst: f64 = 0.0;
    for x in &grid.offsets {
        for phi in &grid.angles {
            worst = worst.max(r.evaluate(phi, x).norm());
        }
    }
    worst
}

/// Fit of `ln max_{|k|=m} |f_k| ~ c0 - c m^(1/sigma)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    /// `None` when the coefficients do not decay.
    pub sigma_hat: Option<f64>,
    pub c_hat: f64,
    /// Slope with the exponent pinned to `1/sigma` for the reference `sigma`.
    pub c_at_reference: f64,
    pub r_squared: f64,
    pub radius_used: u64,
    pub shells_used: usize,
    pub decaying: bool,
}

const DECAY_MIN_SHELL: u64 = 2;
const DECAY_MIN_SHELLS: usize = 4;
const EXPONENT_RANGE: (f64, f64) = (0.02, 2.0);
const EXPONENT_GRID: usize = 200;

/// Decay fit over the shell maxima of a slice.
pub fn fit_decay(f: &SymbolSlice, sigma: f64) -> Result<DecayFit> {
    fit_decay_shells(&f.shell_maxima(), sigma)
}

/// Decay fit over `(m, max |coeff|)` pairs; shells below `m = 2` and zero
/// maxima are ignored.
pub fn fit_decay_shells(shells: &[(u64, f64)], sigma: f64) -> Result<DecayFit> {
    if !(sigma > 0.0) {
        return Err(QbnfError::Domain(format!(
            "reference sigma must be > 0, got {sigma}"
        )));
    }
    let pts: Vec<(f64, f64)> = shells
        .iter()
        .filter(|(m, v)| *m >= DECAY_MIN_SHELL && *v > 0.0 && v.is_finite())
        .map(|&(m, v)| (m as f64, v.ln()))
        .collect();
    if pts.len() < DECAY_MIN_SHELLS {
        return Err(QbnfError::Fit(format!(
            "decay fit needs at least {DECAY_MIN_SHELLS} non-empty shells with |k| >= {DECAY_MIN_SHELL}, got {}",
            pts.len()
        )));
    }
    let radius_used = shells
        .iter()
        .filter(|(m, v)| *m >= DECAY_MIN_SHELL && *v > 0.0)
        .map(|(m, _)| *m)
        .max()
        .unwrap_or(0);

    let reference = line_fit(&pts, 1.0 / sigma);
    let sse = |e: f64| line_fit(&pts, e).sse;

    let (lo, hi) = EXPONENT_RANGE;
    let step = (hi - lo) / (EXPONENT_GRID - 1) as f64;
    let mut best = 0;
    let mut best_sse = f64::INFINITY;
    for i in 0..EXPONENT_GRID {
        let v = sse(lo + step * i as f64);
        if v < best_sse {
            best_sse = v;
            best = i;
        }
    }
    let mut a = lo + step * best.saturating_sub(1) as f64;
    let mut b = (lo + step * (best + 1) as f64).min(hi);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let (mut f1, mut f2) = (sse(x1), sse(x2));
    for _ in 0..200 {
        if b - a < 1e-12 {
            break;
        }
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = sse(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = sse(x2);
        }
    }
    let e = 0.5 * (a + b);
    let free = if sse(e) <= best_sse {
        line_fit(&pts, e)
    } else {
        line_fit(&pts, lo + step * best as f64)
    };
    let e = free.exponent;

    let y_scale = pts.iter().map(|p| p.1.abs()).fold(1.0, f64::max);
    let decaying = free.slope < -1e-9 * y_scale && reference.slope < -1e-9 * y_scale;
    Ok(DecayFit {
        sigma_hat: decaying.then(|| 1.0 / e),
        c_hat: -free.slope,
        c_at_reference: -reference.slope,
        r_squared: free.r_squared,
        radius_used,
        shells_used: pts.len(),
        decaying,
    })
}

struct LineFit {
    exponent: f64,
    slope: f64,
    sse: f64,
    r_squared: f64,
}

/// Least squares `y = c0 + slope * m^e`.
fn line_fit(pts: &[(f64, f64)], e: f64) -> LineFit {
    let n = pts.len() as f64;
    let xs: Vec<f64> = pts.iter().map(|p| p.0.powf(e)).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (x, p) in xs.iter().zip(pts) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (p.1 - my);
        syy += (p.1 - my) * (p.1 - my);
    }
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let sse = (syy - slope * sxy).max(0.0);
    let r_squared = if syy > 0.0 {
        (1.0 - sse / syy).clamp(0.0, 1.0)
    } else {
        1.0
    };
    LineFit {
        exponent: e,
        slope,
        sse,
        r_squared,
    }
}
