//! Problem configuration: a TOML document describing the symbol, the
//! frequency map, the approximation function and the truncation box.

use std::fmt;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::approximation::{ApproximationFunction, DeltaKind};
use crate::error::{QbnfError, Result};
use crate::gevrey::{GevreyIndices, MultiIndex};
use crate::nonresonance::{FrequencyForm, FrequencySpec, FrequencyTerm, Mode};
use crate::symbol::{SymbolShape, TorusSymbol};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GevreyConfig {
    pub sigma: f64,
    pub mu: f64,
    pub lambda: f64,
    pub rho: f64,
    /// Overrides the derived `lambda * mu + sigma`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_bar: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case", deny_unknown_fields)]
pub enum FrequencyConfig {
    Constant {
        omega: Vec<f64>,
    },
    /// One list of `{ exponent, t_coeffs }` terms per component, in `I - I0`.
    Polynomial {
        components: Vec<Vec<FrequencyTerm>>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncationConfig {
    pub h_order: usize,
    pub fourier_radius: u64,
    pub taylor_degree: u32,
}

/// One coefficient `c (I - I0)^gamma e^{i<k,phi>} h^j`, either constant
/// (`coeff = [re, im]`) or polynomial in `t` (`t_coeffs`, ascending).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymbolTermConfig {
    pub j: usize,
    pub k: Vec<i64>,
    pub gamma: Vec<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeff: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_coeffs: Option<Vec<[f64; 2]>>,
}

impl SymbolTermConfig {
    pub fn coefficient(&self, t: f64) -> Complex64 {
        match (&self.coeff, &self.t_coeffs) {
            (Some(c), _) => Complex64::new(c[0], c[1]),
            (None, Some(poly)) => poly.iter().rev().fold(Complex64::default(), |acc, c| {
                acc * t + Complex64::new(c[0], c[1])
            }),
            (None, None) => Complex64::default(),
        }
    }
}

/// Action grid for the nonresonant-set scan and the per-action batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub actions: Vec<Vec<f64>>,
    /// Run the recursion at every flagged action.
    #[serde(default)]
    pub batch: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunFlags {
    pub validity: bool,
    pub nonresonance: bool,
    pub recursion: bool,
    pub decay_fit: bool,
    pub growth_fit: bool,
    /// Upper end of the validity grid.
    pub validity_grid_max: f64,
    pub tail_tol: f64,
    /// `h` values for the optimal-truncation evaluation at `I0`.
    pub truncation_h: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridConfig>,
}

impl Default for RunFlags {
    fn default() -> Self {
        Self {
            validity: true,
            nonresonance: true,
            recursion: true,
            decay_fit: true,
            growth_fit: true,
            validity_grid_max: 1e6,
            tail_tol: 1e-8,
            truncation_h: Vec::new(),
            grid: None,
        }
    }
}

fn default_eta() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub dimension: usize,
    pub kappa: f64,
    #[serde(default = "default_eta")]
    pub eta: f64,
    #[serde(default)]
    pub seed: u64,
    pub base_action: Vec<f64>,
    pub t_values: Vec<f64>,
    pub gevrey: GevreyConfig,
    pub delta: DeltaKind,
    pub frequency: FrequencyConfig,
    pub truncation: TruncationConfig,
    #[serde(default)]
    pub run: RunFlags,
    #[serde(default)]
    pub symbol_terms: Vec<SymbolTermConfig>,
}

/// A single failed constraint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub path: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

/// Reads and validates a configuration file.
pub fn parse_config(path: &Path) -> Result<ProblemConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| QbnfError::Io(format!("{}: {e}", path.display())))?;
    parse_config_str(&text)
}

pub fn parse_config_str(text: &str) -> Result<ProblemConfig> {
    let cfg: ProblemConfig =
        toml::from_str(text).map_err(|e| QbnfError::Configuration(format!("parse error: {e}")))?;
    let violations = cfg.violations();
    if violations.is_empty() {
        Ok(cfg)
    } else {
        let lines: Vec<String> = violations.iter().map(Violation::to_string).collect();
        Err(QbnfError::Configuration(lines.join("; ")))
    }
}

pub fn write_config(cfg: &ProblemConfig) -> Result<String> {
    toml::to_string(cfg).map_err(|e| QbnfError::Configuration(format!("serialize: {e}")))
}

impl ProblemConfig {
    pub fn shape(&self) -> SymbolShape {
        SymbolShape::new(
            self.truncation.h_order,
            self.truncation.fourier_radius,
            self.truncation.taylor_degree,
        )
    }

    pub fn gevrey_indices(&self) -> Result<GevreyIndices> {
        let g = &self.gevrey;
        match g.rho_bar {
            Some(rb) => GevreyIndices::with_rho_bar(g.sigma, g.mu, g.lambda, g.rho, rb),
            None => GevreyIndices::new(g.sigma, g.mu, g.lambda, g.rho),
        }
    }

    pub fn approximation(&self) -> Result<ApproximationFunction> {
        ApproximationFunction::new(self.delta.clone(), self.gevrey.sigma)
    }

    pub fn frequency_spec(&self) -> Result<FrequencySpec> {
        let form = match &self.frequency {
            FrequencyConfig::Constant { omega } => FrequencyForm::Constant(omega.clone()),
            FrequencyConfig::Polynomial { components } => {
                FrequencyForm::Polynomial(components.clone())
            }
        };
        FrequencySpec::new(form, self.base_action.clone())
    }

    /// The symbol with every coefficient evaluated at `t`.
    pub fn symbol_at(&self, t: f64) -> Result<TorusSymbol> {
        let mut s = TorusSymbol::zero(self.shape(), self.base_action.clone(), t)?;
        for term in &self.symbol_terms {
            s.add_term(
                term.j,
                Mode::new(term.k.clone()),
                MultiIndex::new(term.gamma.clone()),
                term.coefficient(t),
            )?;
        }
        Ok(s)
    }

    /// SHA-256 of the canonical serialization.
    pub fn content_hash(&self) -> Result<String> {
        let canonical = write_config(self)?;
        Ok(hex::encode(Sha256::digest(canonical.as_bytes())))
    }

    /// Every constraint violation, with its field path.
    pub fn violations(&self) -> Vec<Violation> {
        let mut v = Vec::new();
        let mut push = |path: &str, message: String| {
            v.push(Violation {
                path: path.to_string(),
                message,
            })
        };
        let n = self.dimension;
        if n == 0 {
            push("dimension", "must be >= 1".into());
        }
        if self.base_action.len() != n {
            push(
                "base_action",
                format!("has {} entries, expected {n}", self.base_action.len()),
            );
        }
        if self.base_action.iter().any(|x| !x.is_finite()) {
            push("base_action", "entries must be finite".into());
        }
        if self.t_values.is_empty() {
            push("t_values", "must list at least one t".into());
        }
        if self.t_values.iter().any(|x| !x.is_finite()) {
            push("t_values", "entries must be finite".into());
        }
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            push(
                "kappa",
                format!("must be a positive finite number, got {}", self.kappa),
            );
        }
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            push(
                "eta",
                format!("must be a positive finite number, got {}", self.eta),
            );
        }
        if let Err(e) = self.gevrey_indices() {
            push("gevrey", e.to_string());
        }
        match self.approximation() {
            Err(e) => push("delta", e.to_string()),
            Ok(d) => {
                for rule in d.family_violations(self.gevrey.sigma) {
                    push("delta", rule);
                }
            }
        }
        match &self.frequency {
            FrequencyConfig::Constant { omega } => {
                if omega.len() != n {
                    push(
                        "frequency.omega",
                        format!("has {} entries, expected {n}", omega.len()),
                    );
                }
                if omega.iter().any(|x| !x.is_finite()) {
                    push("frequency.omega", "entries must be finite".into());
                }
            }
            FrequencyConfig::Polynomial { components } => {
                if components.len() != n {
                    push(
                        "frequency.components",
                        format!("has {} components, expected {n}", components.len()),
                    );
                }
                for (i, comp) in components.iter().enumerate() {
                    for (t, term) in comp.iter().enumerate() {
                        if term.exponent.len() != n {
                            push(
                                &format!("frequency.components[{i}][{t}].exponent"),
                                format!("has {} entries, expected {n}", term.exponent.len()),
                            );
                        }
                    }
                }
            }
        }
        let tr = self.truncation;
        if tr.h_order < 1 {
            push("truncation.h_order", "must be >= 1".into());
        }
        if tr.fourier_radius < 1 {
            push("truncation.fourier_radius", "must be >= 1".into());
        }
        for (i, term) in self.symbol_terms.iter().enumerate() {
            let path = format!("symbol_terms[{i}]");
            if term.k.len() != n || term.gamma.len() != n {
                push(&path, format!("k and gamma must have {n} entries"));
                continue;
            }
            let kn: u64 = term.k.iter().map(|x| x.unsigned_abs()).sum();
            let gn: u32 = term.gamma.iter().sum();
            if term.j > tr.h_order {
                push(
                    &path,
                    format!("j = {} exceeds h_order N = {}", term.j, tr.h_order),
                );
            }
            if kn > tr.fourier_radius {
                push(
                    &path,
                    format!(
                        "|k|_1 = {kn} exceeds fourier_radius K = {}",
                        tr.fourier_radius
                    ),
                );
            }
            if gn > tr.taylor_degree {
                push(
                    &path,
                    format!(
                        "|gamma| = {gn} exceeds taylor_degree M = {}",
                        tr.taylor_degree
                    ),
                );
            }
            match (&term.coeff, &term.t_coeffs) {
                (Some(_), Some(_)) => push(&path, "give either coeff or t_coeffs, not both".into()),
                (None, None) => push(&path, "missing coeff or t_coeffs".into()),
                _ => {}
            }
            let finite = term
                .coeff
                .iter()
                .chain(term.t_coeffs.iter().flatten())
                .all(|c| c[0].is_finite() && c[1].is_finite());
            if !finite {
                push(&path, "coefficients must be finite".into());
            }
            if term.j == 0 && kn != 0 {
                push(&path, "order j = 0 must be mode 0 (action-only K_0)".into());
            }
            if term.j == 1 {
                let zero = term.coeff.is_none_or(|c| c == [0.0, 0.0])
                    && term.t_coeffs.iter().flatten().all(|c| *c == [0.0, 0.0]);
                if !zero {
                    push(&path, "order j = 1 terms must be absent or zero".into());
                }
            }
        }
        if let Some(grid) = &self.run.grid {
            for (i, a) in grid.actions.iter().enumerate() {
                if a.len() != n {
                    push(
                        &format!("run.grid.actions[{i}]"),
                        format!("has {} entries, expected {n}", a.len()),
                    );
                }
            }
        }
        if self.run.truncation_h.iter().any(|h| !(*h > 0.0)) {
            push("run.truncation_h", "every h must be > 0".into());
        }
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const MINIMAL: &str = r#"
dimension = 1
kappa = 0.01
base_action = [1.618033988749895]
t_values = [0.0]

[gevrey]
sigma = 2.0
mu = 4.0
lambda = 4.0
rho = 2.0

[delta]
kind = "polynomial"
exponent = 2.0

[frequency]
form = "constant"
omega = [1.618033988749895]

[truncation]
h_order = 4
fourier_radius = 6
taylor_degree = 0

[[symbol_terms]]
j = 0
k = [0]
gamma = [0]
coeff = [1.0, 0.0]

[[symbol_terms]]
j = 2
k = [1]
gamma = [0]
coeff = [0.5, 0.0]
"#;

    #[test]
    fn minimal_config_parses_and_round_trips() {
        let cfg = parse_config_str(MINIMAL).unwrap();
        assert_eq!(cfg.symbol_terms.len(), 2);
        assert_eq!(cfg.eta, 1.0);
        let text = write_config(&cfg).unwrap();
        assert_eq!(parse_config_str(&text).unwrap(), cfg);
    }

    #[test]
    fn sub_exponential_rule_is_named() {
        let text = MINIMAL.replace(
            "kind = \"polynomial\"\nexponent = 2.0",
            "kind = \"sub_exponential\"\na = 0.7",
        );
        let err = parse_config_str(&text).unwrap_err().to_string();
        assert!(err.contains("delta") && err.contains("1/sigma"), "{err}");
    }

    #[test]
    fn truncation_violation_is_reported() {
        let text = MINIMAL.replace("k = [1]", "k = [7]");
        let err = parse_config_str(&text).unwrap_err().to_string();
        assert!(
            err.contains("symbol_terms[1]") && err.contains("fourier_radius"),
            "{err}"
        );
    }

    #[test]
    fn parse_errors_carry_location() {
        let err = parse_config_str("dimension = \n").unwrap_err().to_string();
        assert!(err.contains("line 1"), "{err}");
    }

    #[test]
    fn t_polynomial_coefficients() {
        let term = SymbolTermConfig {
            j: 2,
            k: vec![1],
            gamma: vec![0],
            coeff: None,
            t_coeffs: Some(vec![[1.0, 0.0], [0.0, 2.0], [3.0, 0.0]]),
        };
        assert_eq!(term.coefficient(0.5), Complex64::new(1.75, 1.0));
    }
}
