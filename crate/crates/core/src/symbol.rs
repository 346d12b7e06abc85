//! Semiclassical symbols on `T^n x D`: truncated `h`-series whose orders are
//! Fourier series in the angles with Taylor-polynomial coefficients in the
//! action offset `I - I0`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{QbnfError, Result};
use crate::gevrey::MultiIndex;
use crate::jet::Jet;
use crate::nonresonance::Mode;

/// How an angle derivative acts on the Fourier mode `e^{i<k,phi>}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AngleConvention {
    /// `d_phi^g` multiplies by `(i k)^g`.
    Plain,
    /// `D_phi^g = (-i d_phi)^g` multiplies by `k^g`.
    D,
}

/// Truncation box of a symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolShape {
    /// Highest `h` power kept (`N`).
    pub h_order: usize,
    /// l1 radius of the Fourier ball (`K`).
    pub fourier_radius: u64,
    /// Highest total degree in `I - I0` (`M`).
    pub taylor_degree: u32,
}

impl SymbolShape {
    pub fn new(h_order: usize, fourier_radius: u64, taylor_degree: u32) -> Self {
        Self {
            h_order,
            fourier_radius,
            taylor_degree,
        }
    }

    pub fn union(self, other: Self) -> Self {
        Self {
            h_order: self.h_order.max(other.h_order),
            fourier_radius: self.fourier_radius.max(other.fourier_radius),
            taylor_degree: self.taylor_degree.max(other.taylor_degree),
        }
    }
}

/// l1 coefficient mass discarded by a truncation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ClipStats {
    /// Mass of products whose mode left the Fourier ball.
    pub fourier: f64,
    /// Mass of products whose Taylor degree exceeded the box.
    pub taylor: f64,
}

impl ClipStats {
    pub fn total(&self) -> f64 {
        self.fourier + self.taylor
    }

    pub fn absorb(&mut self, other: ClipStats) {
        self.fourier += other.fourier;
        self.taylor += other.taylor;
    }
}

/// One `h`-order: a sparse map from Fourier mode to Taylor jet.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolSlice {
    n: usize,
    modes: BTreeMap<Mode, Jet>,
}

impl SymbolSlice {
    pub fn zero(n: usize) -> Self {
        Self {
            n,
            modes: BTreeMap::new(),
        }
    }

    pub fn single(k: Mode, jet: Jet) -> Self {
        let mut s = Self::zero(k.dim());
        s.add_jet(k, &jet);
        s
    }

    /// A mode-0 slice holding `jet`.
    pub fn from_mean(jet: Jet) -> Self {
        Self::single(Mode::zero(jet.nvars()), jet)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn modes(&self) -> impl Iterator<Item = (&Mode, &Jet)> {
        self.modes.iter()
    }

    pub fn mode_count(&self) -> usize {
        self.modes.len()
    }

    pub fn get(&self, k: &Mode) -> Option<&Jet> {
        self.modes.get(k)
    }

    pub fn coeff(&self, k: &Mode, g: &MultiIndex) -> Complex64 {
        self.modes
            .get(k)
            .map_or_else(Complex64::default, |j| j.get(g))
    }

    pub fn add_term(&mut self, k: Mode, g: MultiIndex, c: Complex64) {
        let mut j = Jet::zero(self.n);
        j.add_term(g, c);
        self.add_jet(k, &j);
    }

    /// `self[k] += jet`, dropping the mode if it cancels.
    pub fn add_jet(&mut self, k: Mode, jet: &Jet) {
        self.add_jet_scaled(k, jet, Complex64::new(1.0, 0.0));
    }

    fn add_jet_scaled(&mut self, k: Mode, jet: &Jet, c: Complex64) {
        if jet.is_zero() {
            return;
        }
        let entry = self
            .modes
            .entry(k)
            .or_insert_with(|| Jet::zero(jet.nvars()));
        entry.add_scaled(jet, c);
        if entry.is_zero() {
            self.modes.retain(|_, j| !j.is_zero());
        }
    }

    /// `self += c * other`.
    pub fn add_scaled(&mut self, other: &SymbolSlice, c: Complex64) {
        for (k, j) in &other.modes {
            self.add_jet_scaled(k.clone(), j, c);
        }
    }

    pub fn scaled(&self, c: Complex64) -> SymbolSlice {
        let mut out = SymbolSlice::zero(self.n);
        out.add_scaled(self, c);
        out
    }

    pub fn sub(&self, other: &SymbolSlice) -> SymbolSlice {
        let mut out = self.clone();
        out.add_scaled(other, Complex64::new(-1.0, 0.0));
        out
    }

    /// The `k = 0` jet (the angle average).
    pub fn mean(&self) -> Jet {
        self.modes
            .get(&Mode::zero(self.n))
            .cloned()
            .unwrap_or_else(|| Jet::zero(self.n))
    }

    pub fn angle_average(&self) -> SymbolSlice {
        SymbolSlice::from_mean(self.mean()).with_dim(self.n)
    }

    fn with_dim(mut self, n: usize) -> Self {
        self.n = n;
        self
    }

    pub fn without_mean(&self) -> SymbolSlice {
        let mut out = self.clone();
        out.modes.remove(&Mode::zero(self.n));
        out
    }

    pub fn is_mode_zero_only(&self) -> bool {
        self.modes.keys().all(Mode::is_zero)
    }

    pub fn deriv_action(&self, g: &MultiIndex) -> SymbolSlice {
        let mut out = SymbolSlice::zero(self.n);
        for (k, j) in &self.modes {
            out.add_jet(k.clone(), &j.derivative(g));
        }
        out
    }

    pub fn deriv_angle(&self, g: &MultiIndex, convention: AngleConvention) -> SymbolSlice {
        if g.is_zero() {
            return self.clone();
        }
        let unit = match convention {
            AngleConvention::D => Complex64::new(1.0, 0.0),
            AngleConvention::Plain => Complex64::i().powu(g.order()),
        };
        let mut out = SymbolSlice::zero(self.n);
        for (k, j) in &self.modes {
            let factor = k.pow(g);
            if factor != 0.0 {
                out.add_jet_scaled(k.clone(), j, unit * factor);
            }
        }
        out
    }

    /// Pointwise product truncated to the ball `|k| <= radius` and degree `degree`.
    pub fn mul_truncated(
        &self,
        other: &SymbolSlice,
        radius: u64,
        degree: u32,
    ) -> (SymbolSlice, ClipStats) {
        let mut out = SymbolSlice::zero(self.n);
        let mut clip = ClipStats::default();
        for (ka, ja) in &self.modes {
            for (kb, jb) in &other.modes {
                let k = ka + kb;
                if k.l1() > radius {
                    clip.fourier += ja.mul_truncated(jb, u32::MAX).0.l1_norm();
                    continue;
                }
                let (prod, lost) = ja.mul_truncated(jb, degree);
                clip.taylor += lost;
                out.add_jet(k, &prod);
            }
        }
        (out, clip)
    }

    /// Drops everything outside the box, returning the discarded mass.
    pub fn clip_to(&mut self, radius: u64, degree: u32) -> ClipStats {
        let mut clip = ClipStats::default();
        self.modes.retain(|k, j| {
            if k.l1() > radius {
                clip.fourier += j.l1_norm();
                false
            } else {
                true
            }
        });
        for j in self.modes.values_mut() {
            clip.taylor += j.truncate(degree);
        }
        self.modes.retain(|_, j| !j.is_zero());
        clip
    }

    pub fn max_mode_norm(&self) -> u64 {
        self.modes.keys().map(Mode::l1).max().unwrap_or(0)
    }

    pub fn degree(&self) -> u32 {
        self.modes.values().map(Jet::degree).max().unwrap_or(0)
    }

    /// Sum of coefficient magnitudes.
    pub fn l1_norm(&self) -> f64 {
        self.modes
            .values()
            .map(Jet::l1_norm)
            .fold(0.0, |s, v| s + v)
    }

    pub fn imag_l1(&self) -> f64 {
        self.modes
            .values()
            .map(Jet::imag_l1)
            .fold(0.0, |s, v| s + v)
    }

    /// `(m, max_{|k|=m, g} |coeff|)` for every occupied shell, ascending in `m`.
    pub fn shell_maxima(&self) -> Vec<(u64, f64)> {
        let mut by_shell: BTreeMap<u64, f64> = BTreeMap::new();
        for (k, j) in &self.modes {
            let e = by_shell.entry(k.l1()).or_insert(0.0);
            *e = e.max(j.max_abs());
        }
        by_shell.into_iter().collect()
    }

    /// Value at angles `phi` and action offset `x = I - I0`.
    pub fn evaluate(&self, phi: &[f64], x: &[f64]) -> Complex64 {
        self.modes
            .iter()
            .map(|(k, j)| j.evaluate(x) * Complex64::from_polar(1.0, k.dot(phi)))
            .sum()
    }

    /// Largest `|c(k,g) - conj(c(-k,g))|`; zero exactly for real-valued slices.
    pub fn reality_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (k, j) in &self.modes {
            let mirror = self.modes.get(&-k);
            for (g, c) in j.terms() {
                let m = mirror.map_or_else(Complex64::default, |jm| jm.get(g));
                worst = worst.max((c - m.conj()).norm());
            }
            if mirror.is_none() && !j.is_zero() {
                worst = worst.max(j.max_abs());
            }
        }
        worst
    }
}

/// Per-order l1 coefficient norms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymbolNorm {
    pub per_order: Vec<f64>,
    pub total: f64,
}

/// `p(phi, I; t, h) = sum_{j <= N} h^j p_j(phi, I; t)` at a frozen `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusSymbol {
    n: usize,
    shape: SymbolShape,
    base_action: Vec<f64>,
    t_value: f64,
    orders: Vec<SymbolSlice>,
}

impl TorusSymbol {
    pub fn zero(shape: SymbolShape, base_action: Vec<f64>, t_value: f64) -> Result<Self> {
        let n = base_action.len();
        if n == 0 {
            return Err(QbnfError::Shape("torus dimension must be >= 1".into()));
        }
        if base_action.iter().any(|v| !v.is_finite()) || !t_value.is_finite() {
            return Err(QbnfError::Input("base action and t must be finite".into()));
        }
        Ok(Self {
            n,
            shape,
            base_action,
            t_value,
            orders: vec![SymbolSlice::zero(n); shape.h_order + 1],
        })
    }

    /// The unit symbol `1`.
    pub fn one(shape: SymbolShape, base_action: Vec<f64>, t_value: f64) -> Result<Self> {
        let mut s = Self::zero(shape, base_action, t_value)?;
        let n = s.n;
        s.add_term(
            0,
            Mode::zero(n),
            MultiIndex::zero(n),
            Complex64::new(1.0, 0.0),
        )?;
        Ok(s)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn shape(&self) -> SymbolShape {
        self.shape
    }

    pub fn base_action(&self) -> &[f64] {
        &self.base_action
    }

    pub fn t_value(&self) -> f64 {
        self.t_value
    }

    pub fn orders(&self) -> &[SymbolSlice] {
        &self.orders
    }

    /// Order `j`, or an empty slice beyond the truncation.
    pub fn order(&self, j: usize) -> SymbolSlice {
        self.orders
            .get(j)
            .cloned()
            .unwrap_or_else(|| SymbolSlice::zero(self.n))
    }

    pub fn order_ref(&self, j: usize) -> Option<&SymbolSlice> {
        self.orders.get(j)
    }

    pub fn is_zero(&self) -> bool {
        self.orders.iter().all(SymbolSlice::is_zero)
    }

    fn check_entry(&self, j: usize, k: &Mode, g: &MultiIndex) -> Result<()> {
        if k.dim() != self.n || g.len() != self.n {
            return Err(QbnfError::Shape(format!(
                "entry (j={j}, k={k}, gamma={g}) does not match dimension {}",
                self.n
            )));
        }
        if j > self.shape.h_order
            || k.l1() > self.shape.fourier_radius
            || g.order() > self.shape.taylor_degree
        {
            return Err(QbnfError::Shape(format!(
                "entry (j={j}, k={k}, gamma={g}) lies outside the truncation box (N={}, K={}, M={})",
                self.shape.h_order, self.shape.fourier_radius, self.shape.taylor_degree
            )));
        }
        Ok(())
    }

    pub fn add_term(&mut self, j: usize, k: Mode, g: MultiIndex, c: Complex64) -> Result<()> {
        self.check_entry(j, &k, &g)?;
        if !(c.re.is_finite() && c.im.is_finite()) {
            return Err(QbnfError::Input(format!(
                "non-finite coefficient at (j={j}, k={k}, gamma={g})"
            )));
        }
        self.orders[j].add_term(k, g, c);
        Ok(())
    }

    /// Replaces order `j`; everything must fit the box.
    pub fn set_order(&mut self, j: usize, slice: SymbolSlice) -> Result<()> {
        if slice.dim() != self.n {
            return Err(QbnfError::Shape(format!(
                "slice dimension {} does not match {}",
                slice.dim(),
                self.n
            )));
        }
        for (k, jet) in slice.modes() {
            for (g, _) in jet.terms() {
                self.check_entry(j, k, g)?;
            }
        }
        if j > self.shape.h_order {
            return Err(QbnfError::Shape(format!(
                "order {j} exceeds h_order {}",
                self.shape.h_order
            )));
        }
        self.orders[j] = slice;
        Ok(())
    }

    fn check_compatible(&self, other: &TorusSymbol) -> Result<()> {
        if self.n != other.n {
            return Err(QbnfError::Shape(format!(
                "dimension mismatch: {} vs {}",
                self.n, other.n
            )));
        }
        if self.base_action != other.base_action {
            return Err(QbnfError::Shape(format!(
                "base action mismatch: {:?} vs {:?}",
                self.base_action, other.base_action
            )));
        }
        if self.t_value != other.t_value {
            return Err(QbnfError::Shape(format!(
                "t mismatch: {} vs {}",
                self.t_value, other.t_value
            )));
        }
        Ok(())
    }

    fn widened(&self, shape: SymbolShape) -> TorusSymbol {
        let mut out = self.clone();
        out.shape = shape;
        out.orders
            .resize(shape.h_order + 1, SymbolSlice::zero(self.n));
        out
    }

    /// Coefficientwise sum on the union of both truncation boxes.
    pub fn add(&self, other: &TorusSymbol) -> Result<TorusSymbol> {
        self.combine(other, Complex64::new(1.0, 0.0))
    }

    pub fn sub(&self, other: &TorusSymbol) -> Result<TorusSymbol> {
        self.combine(other, Complex64::new(-1.0, 0.0))
    }

    fn combine(&self, other: &TorusSymbol, c: Complex64) -> Result<TorusSymbol> {
        self.check_compatible(other)?;
        let mut out = self.widened(self.shape.union(other.shape));
        for (j, slice) in other.orders.iter().enumerate() {
            out.orders[j].add_scaled(slice, c);
        }
        Ok(out)
    }

    pub fn scale(&self, c: Complex64) -> TorusSymbol {
        let mut out = self.clone();
        for s in &mut out.orders {
            *s = s.scaled(c);
        }
        out
    }

    pub fn deriv_action(&self, g: &MultiIndex) -> TorusSymbol {
        let mut out = self.clone();
        for s in &mut out.orders {
            *s = s.deriv_action(g);
        }
        out
    }

    pub fn deriv_angle(&self, g: &MultiIndex, convention: AngleConvention) -> TorusSymbol {
        let mut out = self.clone();
        for s in &mut out.orders {
            *s = s.deriv_angle(g, convention);
        }
        out
    }

    pub fn angle_average(&self) -> TorusSymbol {
        let mut out = self.clone();
        for s in &mut out.orders {
            *s = s.angle_average();
        }
        out
    }

    /// `p o q` on the union box with the `D` angle convention.
    pub fn compose(&self, other: &TorusSymbol) -> Result<(TorusSymbol, ClipStats)> {
        self.compose_with(other, self.shape.union(other.shape), AngleConvention::D)
    }

    /// `c_j = sum_{r+s+|g|=j} (1/g!) d_I^g p_r . D_phi^g q_s`, truncated to `shape`.
    pub fn compose_with(
        &self,
        other: &TorusSymbol,
        shape: SymbolShape,
        convention: AngleConvention,
    ) -> Result<(TorusSymbol, ClipStats)> {
        self.check_compatible(other)?;
        let mut out = TorusSymbol::zero(shape, self.base_action.clone(), self.t_value)?;
        let mut clip = ClipStats::default();
        let p_deg = self
            .orders
            .iter()
            .map(SymbolSlice::degree)
            .max()
            .unwrap_or(0);
        for j in 0..=shape.h_order {
            let mut acc = SymbolSlice::zero(self.n);
            for r in 0..=j.min(self.shape.h_order) {
                let p_r = &self.orders[r];
                if p_r.is_zero() {
                    continue;
                }
                for s in 0..=(j - r).min(other.shape.h_order) {
                    let q_s = &other.orders[s];
                    if q_s.is_zero() {
                        continue;
                    }
                    let g_order = (j - r - s) as u32;
                    if g_order > p_deg {
                        continue;
                    }
                    for g in MultiIndex::all_of_order(self.n, g_order) {
                        let dp = p_r.deriv_action(&g);
                        if dp.is_zero() {
                            continue;
                        }
                        let dq = q_s.deriv_angle(&g, convention);
                        if dq.is_zero() {
                            continue;
                        }
                        let (prod, lost) =
                            dp.mul_truncated(&dq, shape.fourier_radius, shape.taylor_degree);
                        clip.absorb(lost);
                        acc.add_scaled(&prod, Complex64::new(1.0 / g.factorial_f64(), 0.0));
                    }
                }
            }
            out.orders[j] = acc;
        }
        Ok((out, clip))
    }

    /// `sum_j h^j sum_k sum_g c (I - I0)^g e^{i<k,phi>}`.
    pub fn evaluate(&self, phi: &[f64], action: &[f64], h: f64) -> Result<Complex64> {
        if phi.len() != self.n || action.len() != self.n {
            return Err(QbnfError::Shape(format!(
                "evaluation point has wrong dimension (expected {})",
                self.n
            )));
        }
        let x: Vec<f64> = action
            .iter()
            .zip(&self.base_action)
            .map(|(a, b)| a - b)
            .collect();
        let mut total = Complex64::default();
        let mut hp = 1.0;
        for s in &self.orders {
            total += s.evaluate(phi, &x) * hp;
            hp *= h;
        }
        Ok(total)
    }

    pub fn norms(&self) -> SymbolNorm {
        let per_order: Vec<f64> = self.orders.iter().map(SymbolSlice::l1_norm).collect();
        let total = per_order.iter().fold(0.0, |s, v| s + v);
        SymbolNorm { per_order, total }
    }

    /// Exact reality test `c(j,-k,g) = conj c(j,k,g)`.
    pub fn is_real(&self) -> bool {
        self.orders.iter().all(|s| s.reality_defect() == 0.0)
    }

    pub fn reality_defect(&self) -> f64 {
        self.orders
            .iter()
            .map(SymbolSlice::reality_defect)
            .fold(0.0, f64::max)
    }

    /// The same symbol re-expanded about `new_base`; exact since every
    /// coefficient is a polynomial of degree at most `M`.
    pub fn recentered(&self, new_base: &[f64]) -> Result<TorusSymbol> {
        if new_base.len() != self.n {
            return Err(QbnfError::Shape(format!(
                "new base action has {} entries, expected {}",
                new_base.len(),
                self.n
            )));
        }
        let shift: Vec<f64> = new_base
            .iter()
            .zip(&self.base_action)
            .map(|(a, b)| a - b)
            .collect();
        let mut out = TorusSymbol::zero(self.shape, new_base.to_vec(), self.t_value)?;
        for (j, s) in self.orders.iter().enumerate() {
            let mut slice = SymbolSlice::zero(self.n);
            for (k, jet) in s.modes() {
                slice.add_jet(k.clone(), &jet.shifted(&shift));
            }
            out.orders[j] = slice;
        }
        Ok(out)
    }

    pub fn to_document(&self) -> SymbolDocument {
        let mut records = Vec::new();
        for (j, s) in self.orders.iter().enumerate() {
            for (k, jet) in s.modes() {
                for (g, c) in jet.terms() {
                    records.push(SymbolRecord {
                        j,
                        k: k.entries().to_vec(),
                        gamma: g.entries().to_vec(),
                        re: c.re,
                        im: c.im,
                    });
                }
            }
        }
        SymbolDocument {
            n: self.n,
            shape: self.shape,
            base_action: self.base_action.clone(),
            t_value: self.t_value,
            records,
        }
    }

    pub fn from_document(doc: &SymbolDocument) -> Result<TorusSymbol> {
        if doc.base_action.len() != doc.n {
            return Err(QbnfError::Shape(format!(
                "base_action has {} entries but n = {}",
                doc.base_action.len(),
                doc.n
            )));
        }
        let mut s = TorusSymbol::zero(doc.shape, doc.base_action.clone(), doc.t_value)?;
        for r in &doc.records {
            s.add_term(
                r.j,
                Mode::new(r.k.clone()),
                MultiIndex::new(r.gamma.clone()),
                Complex64::new(r.re, r.im),
            )?;
        }
        Ok(s)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document())
            .expect("symbol documents always serialize")
    }

    pub fn from_json(text: &str) -> Result<TorusSymbol> {
        let doc: SymbolDocument = serde_json::from_str(text)
            .map_err(|e| QbnfError::Input(format!("symbol JSON: {e}")))?;
        Self::from_document(&doc)
    }
}

/// One stored coefficient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymbolRecord {
    pub j: usize,
    pub k: Vec<i64>,
    pub gamma: Vec<u32>,
    pub re: f64,
    pub im: f64,
}

/// Flat serialized form of a [`TorusSymbol`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymbolDocument {
    pub n: usize,
    #[serde(flatten)]
    pub shape: SymbolShape,
    pub base_action: Vec<f64>,
    pub t_value: f64,
    pub records: Vec<SymbolRecord>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn mi(v: &[u32]) -> MultiIndex {
        MultiIndex::new(v.to_vec())
    }

    fn md(v: &[i64]) -> Mode {
        Mode::new(v.to_vec())
    }

    fn shape() -> SymbolShape {
        SymbolShape::new(3, 4, 2)
    }

    #[test]
    fn add_and_scale() {
        let mut p = TorusSymbol::zero(shape(), vec![0.5], 0.0).unwrap();
        p.add_term(1, md(&[2]), mi(&[1]), c(1.5, -0.5)).unwrap();
        let z = TorusSymbol::zero(shape(), vec![0.5], 0.0).unwrap();
        assert_eq!(p.add(&z).unwrap(), p);
        assert!(p.add(&p.scale(c(-1.0, 0.0))).unwrap().is_zero());
        let mut q = z.clone();
        q.add_term(1, md(&[2]), mi(&[1]), c(0.5, 2.0)).unwrap();
        let s = p.add(&q).unwrap();
        assert_eq!(s.order(1).coeff(&md(&[2]), &mi(&[1])), c(2.0, 1.5));
        let other_base = TorusSymbol::zero(shape(), vec![0.6], 0.0).unwrap();
        assert!(matches!(p.add(&other_base), Err(QbnfError::Shape(_))));
    }

    #[test]
    fn box_is_enforced() {
        let mut p = TorusSymbol::zero(shape(), vec![0.0], 0.0).unwrap();
        assert!(p.add_term(4, md(&[0]), mi(&[0]), c(1.0, 0.0)).is_err());
        assert!(p.add_term(0, md(&[5]), mi(&[0]), c(1.0, 0.0)).is_err());
        assert!(p.add_term(0, md(&[0]), mi(&[3]), c(1.0, 0.0)).is_err());
        assert!(p.add_term(0, md(&[0, 1]), mi(&[0]), c(1.0, 0.0)).is_err());
    }

    #[test]
    fn action_derivatives() {
        let sh = SymbolShape::new(0, 0, 2);
        let mut p = TorusSymbol::zero(sh, vec![0.0], 0.0).unwrap();
        p.add_term(0, md(&[0]), mi(&[2]), c(1.0, 0.0)).unwrap();
        assert_eq!(p.deriv_action(&mi(&[0])), p);
        let d = p.deriv_action(&mi(&[1]));
        assert_eq!(d.order(0).coeff(&md(&[0]), &mi(&[1])), c(2.0, 0.0));
        assert!(p.deriv_action(&mi(&[3])).is_zero());

        let mut q = TorusSymbol::zero(sh, vec![0.0, 0.0], 0.0).unwrap();
        q.add_term(0, md(&[0, 0]), mi(&[1, 1]), c(1.0, 0.0))
            .unwrap();
        let d = q.deriv_action(&mi(&[1, 1]));
        assert_eq!(d.order(0).coeff(&md(&[0, 0]), &mi(&[0, 0])), c(1.0, 0.0));
        assert_eq!(d.order(0).mode_count(), 1);
    }

    #[test]
    fn angle_derivative_conventions() {
        let mut p = TorusSymbol::zero(shape(), vec![0.0], 0.0).unwrap();
        p.add_term(0, md(&[2]), mi(&[0]), c(1.0, 0.0)).unwrap();
        let dd = p.deriv_angle(&mi(&[1]), AngleConvention::D);
        assert_eq!(dd.order(0).coeff(&md(&[2]), &mi(&[0])), c(2.0, 0.0));
        let dp = p.deriv_angle(&mi(&[1]), AngleConvention::Plain);
        assert_eq!(dp.order(0).coeff(&md(&[2]), &mi(&[0])), c(0.0, 2.0));
        assert_eq!(p.deriv_angle(&mi(&[0]), AngleConvention::Plain), p);
        // k^g exactly, for a mixed index in two variables.
        let mut q = TorusSymbol::zero(shape(), vec![0.0, 0.0], 0.0).unwrap();
        q.add_term(0, md(&[-3, 1]), mi(&[0, 0]), c(1.0, 0.0))
            .unwrap();
        let d = q.deriv_angle(&mi(&[3, 2]), AngleConvention::D);
        assert_eq!(d.order(0).coeff(&md(&[-3, 1]), &mi(&[0, 0])), c(-27.0, 0.0));
    }

    #[test]
    fn compose_with_unit_is_identity() {
        let mut p = TorusSymbol::zero(shape(), vec![0.3], 0.0).unwrap();
        p.add_term(0, md(&[0]), mi(&[2]), c(0.5, 0.0)).unwrap();
        p.add_term(1, md(&[1]), mi(&[1]), c(0.25, 0.5)).unwrap();
        p.add_term(2, md(&[-2]), mi(&[0]), c(-1.0, 0.0)).unwrap();
        let one = TorusSymbol::one(shape(), vec![0.3], 0.0).unwrap();
        assert_eq!(p.compose(&one).unwrap().0, p);
        assert_eq!(one.compose(&p).unwrap().0, p);
    }

    #[test]
    fn first_order_term_is_lie_derivative() {
        // p = K_0(I) = I^2/2 about I0, q = e^{i k phi}: order one is <dK_0, k> q.
        let i0 = 1.25;
        let sh = SymbolShape::new(1, 3, 2);
        let mut p = TorusSymbol::zero(sh, vec![i0], 0.0).unwrap();
        p.add_term(0, md(&[0]), mi(&[0]), c(i0 * i0 / 2.0, 0.0))
            .unwrap();
        p.add_term(0, md(&[0]), mi(&[1]), c(i0, 0.0)).unwrap();
        p.add_term(0, md(&[0]), mi(&[2]), c(0.5, 0.0)).unwrap();
        let mut q = TorusSymbol::zero(sh, vec![i0], 0.0).unwrap();
        q.add_term(0, md(&[3]), mi(&[0]), c(1.0, 0.0)).unwrap();
        let (r, clip) = p.compose(&q).unwrap();
        assert_eq!(clip.total(), 0.0);
        let o1 = r.order(1);
        assert_eq!(o1.coeff(&md(&[3]), &mi(&[0])), c(3.0 * i0, 0.0));
        assert_eq!(o1.coeff(&md(&[3]), &mi(&[1])), c(3.0, 0.0));
    }

    #[test]
    fn mode_zero_polynomials_multiply_pointwise() {
        let sh = SymbolShape::new(2, 0, 3);
        let mut p = TorusSymbol::zero(sh, vec![0.0], 0.0).unwrap();
        p.add_term(0, md(&[0]), mi(&[1]), c(2.0, 0.0)).unwrap();
        p.add_term(1, md(&[0]), mi(&[0]), c(1.0, 0.0)).unwrap();
        let mut q = TorusSymbol::zero(sh, vec![0.0], 0.0).unwrap();
        q.add_term(0, md(&[0]), mi(&[2]), c(1.0, 0.0)).unwrap();
        q.add_term(1, md(&[0]), mi(&[1]), c(-1.0, 0.0)).unwrap();
        let (r, _) = p.compose(&q).unwrap();
        // p q = 2x^3 - h x^2 - h^2 x.
        assert_eq!(r.order(0).coeff(&md(&[0]), &mi(&[3])), c(2.0, 0.0));
        assert_eq!(r.order(1).coeff(&md(&[0]), &mi(&[2])), c(-2.0 + 1.0, 0.0));
        assert_eq!(r.order(2).coeff(&md(&[0]), &mi(&[1])), c(-1.0, 0.0));
    }

    #[test]
    fn angle_average_keeps_mode_zero() {
        let mut p = TorusSymbol::zero(shape(), vec![0.0], 0.0).unwrap();
        p.add_term(0, md(&[0]), mi(&[1]), c(1.0, 0.0)).unwrap();
        p.add_term(0, md(&[1]), mi(&[0]), c(1.0, 0.0)).unwrap();
        let avg = p.angle_average();
        assert_eq!(avg.order(0).mode_count(), 1);
        assert_eq!(avg.angle_average(), avg);
        let mut q = TorusSymbol::zero(shape(), vec![0.0], 0.0).unwrap();
        q.add_term(2, md(&[-1]), mi(&[0]), c(1.0, 0.0)).unwrap();
        assert!(q.angle_average().is_zero());
    }

    #[test]
    fn evaluation_matches_direct_sum() {
        let mut p = TorusSymbol::zero(shape(), vec![0.5, -0.25], 0.0).unwrap();
        p.add_term(0, md(&[0, 0]), mi(&[0, 0]), c(2.0, 0.0))
            .unwrap();
        p.add_term(1, md(&[1, -1]), mi(&[1, 0]), c(0.5, 0.25))
            .unwrap();
        p.add_term(3, md(&[0, 2]), mi(&[0, 2]), c(-1.0, 0.0))
            .unwrap();
        let (phi, a, h) = ([0.7, -1.1], [0.9, 0.1], 0.2);
        let x = [a[0] - 0.5, a[1] + 0.25];
        let direct = c(2.0, 0.0)
            + c(0.5, 0.25) * x[0] * Complex64::from_polar(1.0, phi[0] - phi[1]) * h
            + c(-1.0, 0.0) * x[1] * x[1] * Complex64::from_polar(1.0, 2.0 * phi[1]) * h.powi(3);
        assert!((p.evaluate(&phi, &a, h).unwrap() - direct).norm() < 1e-15);
        assert_eq!(
            p.evaluate(&[0.0, 0.0], &[0.5, -0.25], 0.0).unwrap(),
            c(2.0, 0.0)
        );
    }

    #[test]
    fn norms_per_order() {
        let mut p = TorusSymbol::zero(shape(), vec![0.0], 0.0).unwrap();
        assert_eq!(p.norms().total, 0.0);
        p.add_term(2, md(&[1]), mi(&[0]), c(0.0, 3.0)).unwrap();
        let nm = p.norms();
        assert_eq!(nm.per_order[2], 3.0);
        assert_eq!(nm.total, 3.0);
    }

    #[test]
    fn reality_flag() {
        let mut p = TorusSymbol::zero(shape(), vec![0.0], 0.0).unwrap();
        p.add_term(1, md(&[1]), mi(&[0]), c(0.5, 0.25)).unwrap();
        assert!(!p.is_real());
        p.add_term(1, md(&[-1]), mi(&[0]), c(0.5, -0.25)).unwrap();
        assert!(p.is_real());
        assert!(p.scale(c(2.0, 0.0)).is_real());
    }

    #[test]
    fn recentering_preserves_values() {
        let mut p = TorusSymbol::zero(shape(), vec![1.0], 0.0).unwrap();
        p.add_term(0, md(&[0]), mi(&[2]), c(0.5, 0.0)).unwrap();
        p.add_term(2, md(&[1]), mi(&[1]), c(1.0, -1.0)).unwrap();
        let q = p.recentered(&[1.3]).unwrap();
        for a in [0.9, 1.3, 1.6] {
            let lhs = p.evaluate(&[0.4], &[a], 0.3).unwrap();
            let rhs = q.evaluate(&[0.4], &[a], 0.3).unwrap();
            assert!((lhs - rhs).norm() < 1e-14);
        }
    }

    #[test]
    fn json_round_trip_is_exact() {
        let mut p = TorusSymbol::zero(shape(), vec![(1.0 + 5f64.sqrt()) / 2.0], 0.125).unwrap();
        p.add_term(0, md(&[0]), mi(&[1]), c(0.1, 0.0)).unwrap();
        p.add_term(3, md(&[-4]), mi(&[2]), c(1.0 / 3.0, -2f64.sqrt()))
            .unwrap();
        let back = TorusSymbol::from_json(&p.to_json()).unwrap();
        assert_eq!(back, p);
    }
}
