//! Truncated multivariate Taylor polynomials ("jets") in the action offset
//! `x = I - I0`, with complex coefficients stored sparsely by monomial.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{QbnfError, Result};
use crate::gevrey::MultiIndex;

/// A sparse polynomial `sum_beta c_beta x^beta` in `nvars` variables.
///
/// Exact zeros are never stored, so structural equality is value equality.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Jet {
    nvars: usize,
    coeffs: BTreeMap<MultiIndex, Complex64>,
}

impl Jet {
    pub fn zero(nvars: usize) -> Self {
        Self {
            nvars,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: Complex64) -> Self {
        let mut j = Self::zero(nvars);
        j.add_term(MultiIndex::zero(nvars), c);
        j
    }

    pub fn monomial(exponent: MultiIndex, c: Complex64) -> Self {
        let mut j = Self::zero(exponent.len());
        j.add_term(exponent, c);
        j
    }

    /// A real polynomial from `(exponent, coefficient)` pairs.
    pub fn from_real_terms(nvars: usize, terms: &[(MultiIndex, f64)]) -> Self {
        let mut j = Self::zero(nvars);
        for (e, c) in terms {
            j.add_term(e.clone(), Complex64::new(*c, 0.0));
        }
        j
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn get(&self, e: &MultiIndex) -> Complex64 {
        self.coeffs.get(e).copied().unwrap_or_default()
    }

    pub fn constant_term(&self) -> Complex64 {
        self.get(&MultiIndex::zero(self.nvars))
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Complex64)> {
        self.coeffs.iter()
    }

    /// Highest total degree present (0 for the zero jet).
    pub fn degree(&self) -> u32 {
        self.coeffs.keys().map(MultiIndex::order).max().unwrap_or(0)
    }

    pub fn add_term(&mut self, e: MultiIndex, c: Complex64) {
        debug_assert_eq!(e.len(), self.nvars);
        if c == Complex64::default() {
            return;
        }
        match self.coeffs.entry(e) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let v = *o.get() + c;
                if v == Complex64::default() {
                    o.remove();
                } else {
                    *o.get_mut() = v;
                }
            }
        }
    }

    /// `self += c * other`.
    pub fn add_scaled(&mut self, other: &Jet, c: Complex64) {
        for (e, v) in &other.coeffs {
            self.add_term(e.clone(), v * c);
        }
    }

    pub fn scaled(&self, c: Complex64) -> Jet {
        let mut out = Jet::zero(self.nvars);
        out.add_scaled(self, c);
        out
    }

    pub fn neg(&self) -> Jet {
        self.scaled(Complex64::new(-1.0, 0.0))
    }

    /// Drops monomials above `max_degree`; returns the l1 mass removed.
    pub fn truncate(&mut self, max_degree: u32) -> f64 {
        let mut clipped = 0.0;
        self.coeffs.retain(|e, c| {
            if e.order() > max_degree {
                clipped += c.norm();
                false
            } else {
                true
            }
        });
        clipped
    }

    /// Product truncated at `max_degree`, plus the l1 mass of discarded terms.
    pub fn mul_truncated(&self, other: &Jet, max_degree: u32) -> (Jet, f64) {
        let mut out = Jet::zero(self.nvars);
        let mut clipped = 0.0;
        for (ea, ca) in &self.coeffs {
            let da = ea.order();
            for (eb, cb) in &other.coeffs {
                let v = ca * cb;
                if da + eb.order() > max_degree {
                    clipped += v.norm();
                } else {
                    out.add_term(ea.add(eb), v);
                }
            }
        }
        (out, clipped)
    }

    /// Exact `d^g/dx^g`.
    pub fn derivative(&self, g: &MultiIndex) -> Jet {
        if g.is_zero() {
            return self.clone();
        }
        let mut out = Jet::zero(self.nvars);
        for (e, c) in &self.coeffs {
            if let Some(rest) = e.checked_sub(g) {
                out.add_term(rest, c * e.falling_factorial(g));
            }
        }
        out
    }

    /// Formal reciprocal truncated at `max_degree`.
    ///
    /// Writes `f = f0 (1 + g)` with `g(0) = 0` and sums the geometric series
    /// `(1/f0) sum_i (-g)^i`, which is exact modulo degree `max_degree + 1`.
    pub fn reciprocal(&self, max_degree: u32) -> Result<Jet> {
        let f0 = self.constant_term();
        if f0 == Complex64::default() {
            return Err(QbnfError::Domain(
                "reciprocal of a jet with zero constant term".into(),
            ));
        }
        let inv = if f0.im == 0.0 {
            Complex64::new(1.0 / f0.re, 0.0)
        } else {
            1.0 / f0
        };
        let mut minus_g = self.scaled(-inv);
        minus_g.add_term(MultiIndex::zero(self.nvars), Complex64::new(1.0, 0.0));
        minus_g.truncate(max_degree);
        let mut sum = Jet::constant(self.nvars, Complex64::new(1.0, 0.0));
        let mut power = sum.clone();
        for _ in 0..max_degree {
            power = power.mul_truncated(&minus_g, max_degree).0;
            if power.is_zero() {
                break;
            }
            sum.add_scaled(&power, Complex64::new(1.0, 0.0));
        }
        Ok(sum.scaled(inv))
    }

    /// Value at the offset `x`.
    pub fn evaluate(&self, x: &[f64]) -> Complex64 {
        self.coeffs
            .iter()
            .map(|(e, c)| {
                let m: f64 = e
                    .entries()
                    .iter()
                    .zip(x)
                    .map(|(&p, &xi)| xi.powi(p as i32))
                    .product();
                c * m
            })
            .sum()
    }

    /// Re-expands about a shifted centre: returns `q` with `q(y) = self(y + shift)`.
    pub fn shifted(&self, shift: &[f64]) -> Jet {
        let mut out = Jet::zero(self.nvars);
        for (beta, c) in &self.coeffs {
            for alpha in MultiIndex::all_up_to(self.nvars, beta.order()) {
                if !alpha.le(beta) {
                    continue;
                }
                let mut w = 1.0;
                for ((&b, &a), &s) in beta.entries().iter().zip(alpha.entries()).zip(shift) {
                    w *= binomial(b, a) * s.powi((b - a) as i32);
                }
                out.add_term(alpha, c * w);
            }
        }
        out
    }

    pub fn l1_norm(&self) -> f64 {
        self.coeffs
            .values()
            .map(|c| c.norm())
            .fold(0.0, |s, v| s + v)
    }

    pub fn imag_l1(&self) -> f64 {
        self.coeffs
            .values()
            .map(|c| c.im.abs())
            .fold(0.0, |s, v| s + v)
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * f64::from(n - i) / f64::from(i + 1))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn reciprocal_of_linear_is_geometric() {
        // 1/(a + x) = 1/a - x/a^2 + x^2/a^3 - ...
        let a = 1.618_033_988_749_895;
        let f = Jet::from_real_terms(
            1,
            &[
                (MultiIndex::new(vec![0]), a),
                (MultiIndex::new(vec![1]), 1.0),
            ],
        );
        let r = f.reciprocal(3).unwrap();
        for p in 0..=3u32 {
            let expect = (-1f64).powi(p as i32) / a.powi(p as i32 + 1);
            let got = r.get(&MultiIndex::new(vec![p]));
            assert!((got.re - expect).abs() < 1e-15 && got.im == 0.0);
        }
        let (prod, _) = f.mul_truncated(&r, 3);
        assert!((prod.constant_term() - c(1.0)).norm() < 1e-15);
        assert!(prod.terms().all(|(e, v)| e.is_zero() || v.norm() < 1e-15));
    }

    #[test]
    fn reciprocal_requires_constant_term() {
        let f = Jet::monomial(MultiIndex::new(vec![1]), c(1.0));
        assert!(f.reciprocal(2).is_err());
    }

    #[test]
    fn derivative_and_truncation() {
        let f = Jet::from_real_terms(
            2,
            &[
                (MultiIndex::new(vec![1, 1]), 1.0),
                (MultiIndex::new(vec![2, 0]), 3.0),
            ],
        );
        let d = f.derivative(&MultiIndex::new(vec![1, 1]));
        assert_eq!(d, Jet::constant(2, c(1.0)));
        let d = f.derivative(&MultiIndex::new(vec![1, 0]));
        assert_eq!(d.get(&MultiIndex::new(vec![1, 0])), c(6.0));
        let mut g = f.clone();
        assert_eq!(g.truncate(1), 4.0);
        assert!(g.is_zero());
    }

    #[test]
    fn shift_matches_pointwise_evaluation() {
        let f = Jet::from_real_terms(
            2,
            &[
                (MultiIndex::new(vec![0, 0]), 0.5),
                (MultiIndex::new(vec![2, 1]), -1.25),
                (MultiIndex::new(vec![0, 3]), 2.0),
            ],
        );
        let shift = [0.3, -0.7];
        let g = f.shifted(&shift);
        for y in [[0.0, 0.0], [0.1, 0.2], [-0.4, 0.9]] {
            let direct = f.evaluate(&[y[0] + shift[0], y[1] + shift[1]]);
            assert!((g.evaluate(&y) - direct).norm() < 1e-13);
        }
    }

    #[test]
    fn zero_entries_are_pruned() {
        let mut f = Jet::constant(1, c(2.0));
        f.add_term(MultiIndex::new(vec![0]), c(-2.0));
        assert!(f.is_zero());
        assert_eq!(f, Jet::zero(1));
    }
}
