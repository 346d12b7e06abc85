//! The order-by-order normal form recursion: from input orders `p_j` build
//! the conjugator `a` and the action-only normal form `p^0` with
//! `p o a - a o p^0 = 0` through order `N`, then check that identity
//! independently and summarise growth.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::approximation::ApproximationFunction;
use crate::error::{QbnfError, Result};
use crate::gevrey::MultiIndex;
use crate::homological::{solve_homological, DivisorFrequency};
use crate::jet::Jet;
use crate::nonresonance::{FrequencySpec, Mode};
use crate::symbol::{AngleConvention, ClipStats, SymbolShape, SymbolSlice, TorusSymbol};

/// Tolerance for `grad K_0(I0)` against the supplied frequency.
pub const FREQUENCY_MATCH_TOL: f64 = 1e-10;

/// `F_{j1} = sum_{s=1}^{j-2} sum_{r+|g|=j-s} (1/g!) d_I^g p_r D_phi^g a_s`.
///
/// Needs `a_0..a_{j-2}`; zero for `j <= 2`.
pub fn f_j1(
    p_orders: &[SymbolSlice],
    a_orders: &[SymbolSlice],
    j: usize,
    radius: u64,
    degree: u32,
) -> Result<(SymbolSlice, ClipStats)> {
    let n = p_orders.first().map_or(1, SymbolSlice::dim);
    let mut out = SymbolSlice::zero(n);
    let mut clip = ClipStats::default();
    if j <= 2 {
        return Ok((out, clip));
    }
    if a_orders.len() < j - 1 {
        return Err(QbnfError::Sequencing(format!(
            "F_{j}1 needs a_1..a_{} but only {} conjugator orders exist",
            j - 2,
            a_orders.len().saturating_sub(1)
        )));
    }
    for s in 1..=j - 2 {
        let a_s = &a_orders[s];
        if a_s.is_zero() {
            continue;
        }
        for r in 0..=(j - s) {
            let Some(p_r) = p_orders.get(r) else { continue };
            if p_r.is_zero() {
                continue;
            }
            let g_order = (j - s - r) as u32;
            for g in MultiIndex::all_of_order(n, g_order) {
                let dp = p_r.deriv_action(&g);
                if dp.is_zero() {
                    continue;
                }
                let da = a_s.deriv_angle(&g, AngleConvention::D);
                if da.is_zero() {
                    continue;
                }
                let (prod, lost) = dp.mul_truncated(&da, radius, degree);
                clip.absorb(lost);
                out.add_scaled(&prod, Complex64::new(1.0 / g.factorial_f64(), 0.0));
            }
        }
    }
    Ok((out, clip))
}

/// `F_{j2} = sum_{s=1}^{j-2} a_s p^0_{j-s}`.
///
/// Needs `a_0..a_{j-2}` and `p^0_0..p^0_{j-1}`; zero for `j <= 2`.
pub fn f_j2(
    a_orders: &[SymbolSlice],
    p0_orders: &[SymbolSlice],
    j: usize,
    radius: u64,
    degree: u32,
) -> Result<(SymbolSlice, ClipStats)> {
    let n = a_orders.first().map_or(1, SymbolSlice::dim);
    let mut out = SymbolSlice::zero(n);
    let mut clip = ClipStats::default();
    if j <= 2 {
        return Ok((out, clip));
    }
    if a_orders.len() < j - 1 || p0_orders.len() < j {
        return Err(QbnfError::Sequencing(format!(
            "F_{j}2 needs a_1..a_{} and p0_2..p0_{} (have {} and {} orders)",
            j - 2,
            j - 1,
            a_orders.len(),
            p0_orders.len()
        )));
    }
    for s in 1..=j - 2 {
        let (prod, lost) = a_orders[s].mul_truncated(&p0_orders[j - s], radius, degree);
        clip.absorb(lost);
        out.add_scaled(&prod, Complex64::new(1.0, 0.0));
    }
    Ok((out, clip))
}

/// Diagnostics for one stage `j` of the recursion (which produces `a_{j-1}`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderStats {
    pub j: usize,
    pub worst_divisor: f64,
    pub worst_k: Option<Mode>,
    /// Grid sup of the homological residual for `a_{j-1}`.
    pub homological_residual: f64,
    pub f_norm: f64,
    pub a_norm: f64,
    /// l1 norm of `<F_{j2}>`; zero by construction.
    pub f2_mean: f64,
    pub clip: ClipStats,
}

/// Least-squares fit `ln ||a_j|| ~ rho_bar (j ln j - j) + j ln d + const`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthFit {
    pub d_hat: f64,
    pub rho_bar_hat: f64,
    pub intercept: f64,
    pub orders_used: (usize, usize),
    /// R squared of the fit.
    pub quality: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConjugacyCheck {
    /// l1 coefficient norm of `c_j` for `j = 0..=N`.
    pub norms: Vec<f64>,
    pub max_norm: f64,
    pub p_norm: f64,
    /// `max_norm / ||p||`.
    pub relative: f64,
    pub clip: ClipStats,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormalFormResult {
    /// `a_0 = 1`, orders `1..N-1` zero-mean.
    pub a: TorusSymbol,
    /// Mode-0 only.
    pub p0: TorusSymbol,
    pub conjugacy: ConjugacyCheck,
    pub growth_fit: Option<GrowthFit>,
    pub per_order: Vec<OrderStats>,
    /// `grad K_0(I0)`.
    pub frequency: Vec<f64>,
    /// Imaginary l1 mass of each `p^0_j`.
    pub p0_imag_mass: Vec<f64>,
    pub recursion_clip: ClipStats,
}

impl NormalFormResult {
    pub fn residual_norms(&self) -> &[f64] {
        &self.conjugacy.norms
    }
}

/// `grad K_0` as jets, one per action coordinate.
pub fn frequency_jets(p0: &SymbolSlice) -> Vec<Jet> {
    let n = p0.dim();
    let k0 = p0.mean();
    (0..n)
        .map(|i| k0.derivative(&MultiIndex::unit(n, i)))
        .collect()
}

/// Runs stages `j = 2..=h_order`.
///
/// `p_0` and `p_1` must be action-only; `grad p_0(I0)` must match
/// `freq(I0; t)` to [`FREQUENCY_MATCH_TOL`]. Division uses the exact
/// Taylor jets of `grad p_0`.
pub fn run_recursion(
    p: &TorusSymbol,
    freq: &FrequencySpec,
    delta: &ApproximationFunction,
    kappa: f64,
    h_order: usize,
) -> Result<NormalFormResult> {
    let n = p.dim();
    let in_shape = p.shape();
    let shape = SymbolShape::new(h_order, in_shape.fourier_radius, in_shape.taylor_degree);
    let (radius, degree) = (shape.fourier_radius, shape.taylor_degree);
    if freq.dimension() != n {
        return Err(QbnfError::Input(format!(
            "frequency dimension {} does not match symbol dimension {n}",
            freq.dimension()
        )));
    }
    if h_order < 1 {
        return Err(QbnfError::Input("h_order must be >= 1".into()));
    }
    let p_orders: Vec<SymbolSlice> = (0..=h_order).map(|j| p.order(j)).collect();
    if !p_orders[0].is_mode_zero_only() {
        return Err(QbnfError::Input(
            "p_0 must depend on the actions only (mode 0)".into(),
        ));
    }
    if !p_orders[1].is_mode_zero_only() {
        return Err(QbnfError::Input(
            "p_1 must depend on the actions only (mode 0)".into(),
        ));
    }

    let omega_jets = frequency_jets(&p_orders[0]);
    let frequency: Vec<f64> = omega_jets.iter().map(|j| j.constant_term().re).collect();
    let supplied = freq.evaluate(p.base_action(), p.t_value())?;
    let scale = supplied.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    for (i, (a, b)) in frequency.iter().zip(&supplied).enumerate() {
        if (a - b).abs() > FREQUENCY_MATCH_TOL * scale {
            return Err(QbnfError::Input(format!(
                "grad K_0(I0) = {frequency:?} disagrees with the supplied frequency {supplied:?} in component {i}"
            )));
        }
    }
    let omega = if omega_jets.iter().all(|j| j.degree() == 0) {
        DivisorFrequency::Constant(frequency.clone())
    } else {
        DivisorFrequency::Taylor(omega_jets)
    };

    let mut a_orders = vec![SymbolSlice::zero(n); h_order + 1];
    a_orders[0] = SymbolSlice::from_mean(Jet::constant(n, Complex64::new(1.0, 0.0)));
    let mut p0_orders = vec![SymbolSlice::zero(n); h_order + 1];
    p0_orders[0] = p_orders[0].clone();
    p0_orders[1] = p_orders[1].clone();

    let mut per_order = Vec::with_capacity(h_order.saturating_sub(1));
    let mut recursion_clip = ClipStats::default();
    for j in 2..=h_order {
        let (f1, c1) = f_j1(&p_orders, &a_orders[..j - 1], j, radius, degree)?;
        let (f2, c2) = f_j2(&a_orders[..j - 1], &p0_orders[..j], j, radius, degree)?;
        let mut clip = c1;
        clip.absorb(c2);

        let f2_mean = f2.mean().l1_norm();
        let mut pf1 = p_orders[j].clone();
        pf1.add_scaled(&f1, Complex64::new(1.0, 0.0));
        p0_orders[j] = pf1.angle_average();

        // f_j = p^0_j - p_j - F_j1 + F_j2, which is the zero-mean part of -(p_j + F_j).
        let mut fj = pf1.without_mean().scaled(Complex64::new(-1.0, 0.0));
        fj.add_scaled(&f2.without_mean(), Complex64::new(1.0, 0.0));
        clip.absorb(fj.clip_to(radius, degree));

        let sol = solve_homological(&fj, &omega, delta, kappa, degree).map_err(|e| match e {
            QbnfError::SmallDivisor {
                k,
                divisor,
                threshold,
                ..
            } => QbnfError::SmallDivisor {
                order: j,
                k,
                divisor,
                threshold,
            },
            other => other,
        })?;
        clip.taylor += sol.taylor_clipped;
        recursion_clip.absorb(clip);
        per_order.push(OrderStats {
            j,
            worst_divisor: sol.worst_divisor,
            worst_k: sol.worst_k.clone(),
            homological_residual: sol.residual_sup,
            f_norm: fj.l1_norm(),
            a_norm: sol.u.l1_norm(),
            f2_mean,
            clip,
        });
        a_orders[j - 1] = sol.u;
    }

    let mut a = TorusSymbol::zero(shape, p.base_action().to_vec(), p.t_value())?;
    let mut p0 = TorusSymbol::zero(shape, p.base_action().to_vec(), p.t_value())?;
    for j in 0..=h_order {
        a.set_order(j, a_orders[j].clone())?;
        p0.set_order(j, p0_orders[j].clone())?;
    }
    let p0_imag_mass = p0.orders().iter().map(SymbolSlice::imag_l1).collect();

    let mut result = NormalFormResult {
        a,
        p0,
        conjugacy: ConjugacyCheck {
            norms: Vec::new(),
            max_norm: 0.0,
            p_norm: 0.0,
            relative: 0.0,
            clip: ClipStats::default(),
        },
        growth_fit: None,
        per_order,
        frequency,
        p0_imag_mass,
        recursion_clip,
    };
    result.conjugacy = verify_conjugacy(p, &result)?;
    result.growth_fit = fit_growth(&result).ok();
    Ok(result)
}

/// Recomputes `c = p o a - a o p^0` from scratch with the Fourier radius
/// widened to `K * N` and reports per-order l1 norms.
pub fn verify_conjugacy(p: &TorusSymbol, result: &NormalFormResult) -> Result<ConjugacyCheck> {
    let shape = result.a.shape();
    let n_orders = shape.h_order;
    let wide = SymbolShape::new(
        n_orders,
        shape.fourier_radius.max(1) * (n_orders.max(1) as u64),
        shape.taylor_degree,
    );
    let p_trunc = truncate_orders(p, n_orders)?;
    let (pa, c1) = p_trunc.compose_with(&result.a, wide, AngleConvention::D)?;
    let (ap, c2) = result
        .a
        .compose_with(&result.p0, wide, AngleConvention::D)?;
    let c = pa.sub(&ap)?;
    let norms: Vec<f64> = (0..=n_orders).map(|j| c.order(j).l1_norm()).collect();
    let max_norm = norms.iter().copied().fold(0.0, f64::max);
    let p_norm = p_trunc.norms().total;
    let mut clip = c1;
    clip.absorb(c2);
    Ok(ConjugacyCheck {
        relative: if p_norm > 0.0 {
            max_norm / p_norm
        } else {
            max_norm
        },
        norms,
        max_norm,
        p_norm,
        clip,
    })
}

fn truncate_orders(p: &TorusSymbol, h_order: usize) -> Result<TorusSymbol> {
    let s = p.shape();
    let mut out = TorusSymbol::zero(
        SymbolShape::new(h_order, s.fourier_radius, s.taylor_degree),
        p.base_action().to_vec(),
        p.t_value(),
    )?;
    for j in 0..=h_order.min(s.h_order) {
        out.set_order(j, p.order(j))?;
    }
    Ok(out)
}

/// Growth fit over the nonzero conjugator orders `a_1, a_2, ...`.
pub fn fit_growth(result: &NormalFormResult) -> Result<GrowthFit> {
    let norms: Vec<(usize, f64)> = result
        .a
        .orders()
        .iter()
        .enumerate()
        .skip(1)
        .map(|(j, s)| (j, s.l1_norm()))
        .collect();
    fit_growth_norms(&norms)
}

const GROWTH_MIN_ORDERS: usize = 4;

/// Fits `ln v_j ~ rho_bar (j ln j - j) + j ln d + c` over `j >= 1`, `v_j > 0`.
pub fn fit_growth_norms(norms: &[(usize, f64)]) -> Result<GrowthFit> {
    let pts: Vec<(f64, f64)> = norms
        .iter()
        .filter(|(j, v)| *j >= 1 && *v > 0.0 && v.is_finite())
        .map(|&(j, v)| (j as f64, v.ln()))
        .collect();
    if pts.len() < GROWTH_MIN_ORDERS {
        return Err(QbnfError::Fit(format!(
            "growth fit needs at least {GROWTH_MIN_ORDERS} nonzero orders, got {}",
            pts.len()
        )));
    }
    let basis = |j: f64| [j * j.ln() - j, j, 1.0];
    let mut ata = [[0.0f64; 3]; 3];
    let mut aty = [0.0f64; 3];
    for &(j, y) in &pts {
        let b = basis(j);
        for r in 0..3 {
            for c in 0..3 {
                ata[r][c] += b[r] * b[c];
            }
            aty[r] += b[r] * y;
        }
    }
    let coef = solve3(ata, aty)
        .ok_or_else(|| QbnfError::Fit("growth fit normal equations are singular".into()))?;
    let mean = pts.iter().map(|p| p.1).sum::<f64>() / pts.len() as f64;
    let (mut sse, mut sst) = (0.0, 0.0);
    for &(j, y) in &pts {
        let b = basis(j);
        let fit = coef[0] * b[0] + coef[1] * b[1] + coef[2] * b[2];
        sse += (y - fit).powi(2);
        sst += (y - mean).powi(2);
    }
    let quality = if sst > 0.0 {
        (1.0 - sse / sst).clamp(0.0, 1.0)
    } else {
        1.0
    };
    let used: Vec<usize> = norms
        .iter()
        .filter(|(j, v)| *j >= 1 && *v > 0.0 && v.is_finite())
        .map(|p| p.0)
        .collect();
    Ok(GrowthFit {
        d_hat: coef[1].exp(),
        rho_bar_hat: coef[0],
        intercept: coef[2],
        orders_used: (used[0], used[used.len() - 1]),
        quality,
    })
}

fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..3 {
            let f = a[r][col] / a[col][col];
            for c in col..3 {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for r in (0..3).rev() {
        let s: f64 = (r + 1..3).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// One truncation choice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationChoice {
    pub j_used: usize,
    pub value: Complex64,
    /// `|p^0_J(I) h^J|`, the error proxy.
    pub last_term: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationEval {
    pub h: f64,
    /// `J = min(floor(eta h^(-1/rho_bar)), N)`.
    pub rule: TruncationChoice,
    /// `J` at the smallest nonzero term.
    pub smallest_term: TruncationChoice,
}

/// Evaluates `sum_{j <= J} p^0_j(I) h^j` under both truncation rules.
pub fn optimal_truncation_eval(
    p0: &TorusSymbol,
    action: &[f64],
    h: f64,
    eta: f64,
    rho_bar: f64,
) -> Result<TruncationEval> {
    if action.len() != p0.dim() {
        return Err(QbnfError::Shape(format!(
            "action has {} entries, expected {}",
            action.len(),
            p0.dim()
        )));
    }
    if !p0.orders().iter().all(SymbolSlice::is_mode_zero_only) {
        return Err(QbnfError::Input(
            "normal form must be action-only (mode 0)".into(),
        ));
    }
    let x: Vec<f64> = action
        .iter()
        .zip(p0.base_action())
        .map(|(a, b)| a - b)
        .collect();
    let phi = vec![0.0; p0.dim()];
    let terms: Vec<Complex64> = p0.orders().iter().map(|s| s.evaluate(&phi, &x)).collect();
    truncate_series(&terms, h, eta, rho_bar)
}

/// Both truncation rules on explicit coefficients `K_j`.
pub fn truncate_series(
    terms: &[Complex64],
    h: f64,
    eta: f64,
    rho_bar: f64,
) -> Result<TruncationEval> {
    if !(h > 0.0) {
        return Err(QbnfError::Domain(format!("h must be > 0, got {h}")));
    }
    if !(eta > 0.0) || !(rho_bar > 0.0) {
        return Err(QbnfError::Domain(format!(
            "eta and rho_bar must be > 0 (got {eta}, {rho_bar})"
        )));
    }
    if terms.is_empty() {
        return Err(QbnfError::Input("no orders to sum".into()));
    }
    let n = terms.len() - 1;
    let scaled: Vec<Complex64> = terms
        .iter()
        .enumerate()
        .map(|(j, c)| c * h.powi(j as i32))
        .collect();
    let choose = |j: usize| TruncationChoice {
        j_used: j,
        value: scaled[..=j].iter().sum(),
        last_term: scaled[j].norm(),
    };
    let raw = eta * h.powf(-1.0 / rho_bar);
    let j_rule = if raw >= n as f64 {
        n
    } else {
        raw.floor() as usize
    };
    let j_small = scaled
        .iter()
        .enumerate()
        .filter(|(_, c)| c.norm() > 0.0)
        .fold(None::<(usize, f64)>, |best, (j, c)| match best {
            Some((_, b)) if b <= c.norm() => best,
            _ => Some((j, c.norm())),
        })
        .map_or(0, |(j, _)| j);
    Ok(TruncationEval {
        h,
        rule: choose(j_rule),
        smallest_term: choose(j_small),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonresonance::FrequencySpec;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn mi(v: &[u32]) -> MultiIndex {
        MultiIndex::new(v.to_vec())
    }

    fn md(v: &[i64]) -> Mode {
        Mode::new(v.to_vec())
    }

    fn golden() -> f64 {
        (1.0 + 5f64.sqrt()) / 2.0
    }

    /// K_0 = I^2/2 about the golden mean, p_2 = cos(phi).
    fn golden_instance(n_orders: usize) -> (TorusSymbol, FrequencySpec) {
        let g = golden();
        let mut p = TorusSymbol::zero(SymbolShape::new(n_orders, 8, 2), vec![g], 0.0).unwrap();
        p.add_term(0, md(&[0]), mi(&[0]), c(g * g / 2.0)).unwrap();
        p.add_term(0, md(&[0]), mi(&[1]), c(g)).unwrap();
        p.add_term(0, md(&[0]), mi(&[2]), c(0.5)).unwrap();
        p.add_term(2, md(&[1]), mi(&[0]), c(0.5)).unwrap();
        p.add_term(2, md(&[-1]), mi(&[0]), c(0.5)).unwrap();
        (p, FrequencySpec::constant(vec![g]).unwrap())
    }

    fn delta() -> ApproximationFunction {
        ApproximationFunction::polynomial(2.0, 2.0).unwrap()
    }

    #[test]
    fn low_orders_of_f_vanish() {
        let (p, _) = golden_instance(6);
        let ps: Vec<_> = p.orders().to_vec();
        let a = vec![SymbolSlice::zero(1); 2];
        assert!(f_j1(&ps, &a, 2, 8, 2).unwrap().0.is_zero());
        assert!(f_j2(&a, &ps[..2], 2, 8, 2).unwrap().0.is_zero());
        assert!(matches!(
            f_j1(&ps, &a[..1], 4, 8, 2),
            Err(QbnfError::Sequencing(_))
        ));
        let zeros = vec![SymbolSlice::zero(1); 5];
        assert!(f_j1(&ps, &zeros, 5, 8, 2).unwrap().0.is_zero());
    }

    #[test]
    fn f3_hand_expansion() {
        // p_0 = I^2/2 about 0 (so d_I p_0 = x, d_I^2 p_0 = 1), p_1 = 0,
        // p_2 = b (constant), a_1 = e^{i phi}.
        let n = 1;
        let mut p0 = SymbolSlice::zero(n);
        p0.add_term(md(&[0]), mi(&[2]), c(0.5));
        let mut p2 = SymbolSlice::zero(n);
        p2.add_term(md(&[0]), mi(&[0]), c(0.75));
        let ps = vec![p0, SymbolSlice::zero(n), p2];
        let a1 = SymbolSlice::single(md(&[1]), Jet::constant(1, c(1.0)));
        let a = vec![SymbolSlice::from_mean(Jet::constant(1, c(1.0))), a1];
        let (f, _) = f_j1(&ps, &a, 3, 4, 2).unwrap();
        // s = 1, r + |g| = 2: r = 0, g = 2 gives (1/2) * 1 * 1^2; r = 2, g = 0 gives 0.75.
        assert_eq!(f.coeff(&md(&[1]), &mi(&[0])), c(0.5 + 0.75));
        assert_eq!(f.mode_count(), 1);

        let mut p0_2 = SymbolSlice::zero(n);
        p0_2.add_term(md(&[0]), mi(&[1]), c(2.0));
        let p0s = vec![SymbolSlice::zero(n), SymbolSlice::zero(n), p0_2];
        let (f2, _) = f_j2(&a, &p0s, 3, 4, 2).unwrap();
        assert_eq!(f2.coeff(&md(&[1]), &mi(&[1])), c(2.0));
        assert!(f2.mean().is_zero());
    }

    #[test]
    fn zero_perturbation_is_fixed_point() {
        let (mut p, freq) = golden_instance(5);
        p.set_order(2, SymbolSlice::zero(1)).unwrap();
        let r = run_recursion(&p, &freq, &delta(), 1e-3, 5).unwrap();
        assert_eq!(
            r.a,
            TorusSymbol::one(SymbolShape::new(5, 8, 2), vec![golden()], 0.0).unwrap()
        );
        assert_eq!(r.p0.orders(), p.orders());
        assert!(r.conjugacy.norms.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn golden_chain_is_conjugate() {
        let (p, freq) = golden_instance(6);
        let r = run_recursion(&p, &freq, &delta(), 1e-3, 6).unwrap();
        assert!(r.p0.order(2).is_zero());
        for j in 1..=5 {
            assert!(!r.a.order(j).is_zero(), "a_{j} vanished");
            assert!(r.a.order(j).mean().is_zero());
        }
        assert!(r.conjugacy.relative <= 1e-10, "{:?}", r.conjugacy);
        assert_eq!(r.conjugacy.clip.fourier, 0.0);
        assert_eq!(r.conjugacy.norms[0], 0.0);
        assert_eq!(r.conjugacy.norms[1], 0.0);
        assert!(r.p0.orders().iter().all(SymbolSlice::is_mode_zero_only));
        assert!(r.per_order.iter().all(|s| s.f2_mean == 0.0));
    }

    #[test]
    fn second_stage_matches_closed_form() {
        // a_1 solves (1/i) L_omega a_1 = p0_2 - p_2 = -cos(phi): a_1 = -cos(phi)/(omega k) per mode.
        let (p, freq) = golden_instance(2);
        let r = run_recursion(&p, &freq, &delta(), 1e-3, 2).unwrap();
        let g = golden();
        let a1 = r.a.order(1);
        assert!((a1.coeff(&md(&[1]), &mi(&[0])) - c(-0.5 / g)).norm() < 1e-15);
        assert!((a1.coeff(&md(&[-1]), &mi(&[0])) - c(0.5 / g)).norm() < 1e-15);
        // I-dependence of omega enters through the reciprocal expansion.
        assert!((a1.coeff(&md(&[1]), &mi(&[1])) - c(0.5 / (g * g))).norm() < 1e-15);
    }

    #[test]
    fn corrupted_conjugator_is_detected() {
        let (p, freq) = golden_instance(6);
        let mut r = run_recursion(&p, &freq, &delta(), 1e-3, 6).unwrap();
        let mut a2 = r.a.order(2);
        a2.add_term(md(&[1]), mi(&[0]), c(1e-3));
        r.a.set_order(2, a2).unwrap();
        let check = verify_conjugacy(&p, &r).unwrap();
        assert!(check.norms[2] < 1e-15, "{:?}", check.norms);
        // The corruption first appears at order 3 through (1/i) L_omega a_2.
        assert!(
            (check.norms[3] - 1e-3 * (golden() + 1.0)).abs() < 1e-12,
            "{:?}",
            check.norms
        );
    }

    #[test]
    fn frequency_mismatch_is_rejected() {
        let (p, _) = golden_instance(3);
        let wrong = FrequencySpec::constant(vec![1.5]).unwrap();
        assert!(matches!(
            run_recursion(&p, &wrong, &delta(), 1e-3, 3),
            Err(QbnfError::Input(_))
        ));
    }

    #[test]
    fn small_divisor_names_order() {
        let (p, freq) = golden_instance(4);
        match run_recursion(&p, &freq, &delta(), 10.0, 4) {
            Err(QbnfError::SmallDivisor { order, k, .. }) => {
                assert_eq!(order, 2);
                assert_eq!(k.len(), 1);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn growth_fit_synthetic() {
        use crate::gevrey::ln_gamma;
        let gam: Vec<(usize, f64)> = (1..=12)
            .map(|j| (j, ln_gamma(2.0 * j as f64).exp()))
            .collect();
        let fit = fit_growth_norms(&gam).unwrap();
        assert!((1.8..=2.2).contains(&fit.rho_bar_hat), "{fit:?}");

        let geo: Vec<(usize, f64)> = (1..=8).map(|j| (j, 2f64.powi(j as i32))).collect();
        let fit = fit_growth_norms(&geo).unwrap();
        assert!(fit.rho_bar_hat.abs() < 1e-9);
        assert!((fit.d_hat - 2.0).abs() < 0.2);

        let flat: Vec<(usize, f64)> = (1..=6).map(|j| (j, 3.0)).collect();
        let fit = fit_growth_norms(&flat).unwrap();
        assert!(fit.rho_bar_hat.abs() < 1e-9 && (fit.d_hat - 1.0).abs() < 1e-9);

        assert!(fit_growth_norms(&flat[..3]).is_err());
    }

    #[test]
    fn truncation_rules() {
        let fact: Vec<Complex64> = (0..=20u32)
            .map(|j| c(crate::gevrey::factorial_f64(j)))
            .collect();
        let ev = truncate_series(&fact, 0.1, 1.0, 2.0).unwrap();
        let brute = (0..=20usize)
            .min_by(|&a, &b| {
                (fact[a].re * 0.1f64.powi(a as i32))
                    .total_cmp(&(fact[b].re * 0.1f64.powi(b as i32)))
            })
            .unwrap();
        assert!(ev.smallest_term.j_used.abs_diff(brute) <= 1);
        assert_eq!(ev.rule.j_used, (0.1f64.powf(-0.5)).floor() as usize);

        let geo: Vec<Complex64> = (0..=6).map(|j| c(2f64.powi(j))).collect();
        let ev = truncate_series(&geo, 0.25, 100.0, 1.0).unwrap();
        assert_eq!(ev.smallest_term.j_used, 6);
        assert_eq!(ev.rule.j_used, 6);
        assert!((ev.smallest_term.last_term - 0.5f64.powi(6)).abs() < 1e-15);

        let ev = truncate_series(&geo, 50.0, 1.0, 1.0).unwrap();
        assert_eq!(ev.rule.j_used, 0);
        assert_eq!(ev.rule.value, c(1.0));
    }
}
