//! End-to-end batch pipeline: validity, nonresonance, recursion and
//! diagnostics per `t`, assembled into a deterministic JSON report, plus
//! plot-data emission and seeded property suites.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use serde_json::Value;

use crate::approximation::{check_validity, ValidityReport};
use crate::config::ProblemConfig;
use crate::error::{QbnfError, Result};
use crate::homological::{fit_decay, DecayFit};
use crate::nonresonance::{mark_nonresonant_grid, scan_divisors, DivisorReport, NonresonantGrid};
use crate::qbnf::{
    optimal_truncation_eval, run_recursion, ConjugacyCheck, GrowthFit, NormalFormResult,
    OrderStats, TruncationEval,
};
use crate::symbol::{ClipStats, SymbolDocument, SymbolNorm};

pub const REPORT_SCHEMA_VERSION: &str = "qbnf-report/1";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
pub const DEFAULT_TOLERANCE: f64 = 1e-10;

/// What the pipeline should do beyond the configuration's own flags.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineOptions {
    /// Skip the recursion (validity and nonresonance only).
    pub check_only: bool,
    /// Relative residual tolerance `max_j ||c_j|| / ||p||`.
    pub tolerance: f64,
    pub full_coeffs: bool,
    pub seed: Option<u64>,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        Self {
            check_only: false,
            tolerance: DEFAULT_TOLERANCE,
            full_coeffs: false,
            seed: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageError {
    pub t: Option<f64>,
    pub stage: String,
    pub kind: String,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayEntry {
    /// Conjugator order `a_j`.
    pub order: usize,
    /// `(m, ln max_{|k|=m} |coeff|)`.
    pub profile: Vec<(u64, f64)>,
    pub fit: Option<DecayFit>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FullCoefficients {
    pub a: SymbolDocument,
    pub p0: SymbolDocument,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecursionSummary {
    pub frequency: Vec<f64>,
    pub p_norms: SymbolNorm,
    pub a_norms: SymbolNorm,
    pub p0_norms: SymbolNorm,
    pub conjugacy: ConjugacyCheck,
    pub recursion_clip: ClipStats,
    pub p0_imag_mass: Vec<f64>,
    pub per_order: Vec<OrderStats>,
    pub growth_fit: Option<GrowthFit>,
    pub growth_note: Option<String>,
    pub decay: Vec<DecayEntry>,
    pub truncation: Vec<TruncationEval>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub full: Option<FullCoefficients>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BatchEntry {
    pub action: Vec<f64>,
    pub flagged: bool,
    pub residual_relative: Option<f64>,
    /// `Re p^0_j(I)` for `j = 0..=N` at this action.
    pub p0_values: Vec<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridSummary {
    pub grid: NonresonantGrid,
    pub batch: Vec<BatchEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TRun {
    pub t: f64,
    pub frequency_at_base: Option<Vec<f64>>,
    pub divisors: Option<DivisorReport>,
    pub grid: Option<GridSummary>,
    pub recursion: Option<RecursionSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub schema_version: String,
    pub tool_version: String,
    pub config_hash: String,
    pub seed: u64,
    pub tolerance: f64,
    pub config: ProblemConfig,
    pub validity: Option<ValidityReport>,
    pub runs: Vec<TRun>,
    pub errors: Vec<StageError>,
    pub success: bool,
}

impl RunReport {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self)
            .map_err(|e| QbnfError::Io(format!("report serialization: {e}")))
    }
}

/// Runs every stage for every `t` (in parallel, one thread per `t`) and
/// assembles the report in `t_values` order.
pub fn run_pipeline(config: &ProblemConfig, options: PipelineOptions) -> Result<RunReport> {
    let violations = config.violations();
    if !violations.is_empty() {
        let lines: Vec<String> = violations.iter().map(ToString::to_string).collect();
        return Err(QbnfError::Configuration(lines.join("; ")));
    }
    let delta = config.approximation()?;
    let freq = config.frequency_spec()?;
    let gevrey = config.gevrey_indices()?;
    let mut errors = Vec::new();

    let validity = if config.run.validity {
        match check_validity(
            &delta,
            config.gevrey.sigma,
            config.run.validity_grid_max,
            config.run.tail_tol,
        ) {
            Ok(v) => Some(v),
            Err(e) => {
                errors.push(StageError {
                    t: None,
                    stage: "validity".into(),
                    kind: e.kind().into(),
                    detail: e.to_string(),
                });
                None
            }
        }
    } else {
        None
    };

    let outcomes: Vec<(TRun, Vec<StageError>)> = std::thread::scope(|scope| {
        let handles: Vec<_> = config
            .t_values
            .iter()
            .map(|&t| {
                let (delta, freq) = (&delta, &freq);
                scope.spawn(move || run_one_t(config, delta, freq, gevrey.rho_bar(), t, options))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("per-t worker panicked"))
            .collect()
    });

    let mut runs = Vec::with_capacity(outcomes.len());
    for (run, errs) in outcomes {
        runs.push(run);
        errors.extend(errs);
    }
    let residuals_ok = runs.iter().all(|r| {
        r.recursion
            .as_ref()
            .is_none_or(|s| s.conjugacy.relative <= options.tolerance)
    });
    Ok(RunReport {
        schema_version: REPORT_SCHEMA_VERSION.into(),
        tool_version: TOOL_VERSION.into(),
        config_hash: config.content_hash()?,
        seed: options.seed.unwrap_or(config.seed),
        tolerance: options.tolerance,
        config: config.clone(),
        validity,
        success: errors.is_empty() && residuals_ok,
        runs,
        errors,
    })
}

fn run_one_t(
    config: &ProblemConfig,
    delta: &crate::approximation::ApproximationFunction,
    freq: &crate::nonresonance::FrequencySpec,
    rho_bar: f64,
    t: f64,
    options: PipelineOptions,
) -> (TRun, Vec<StageError>) {
    let mut errors = Vec::new();
    let mut err = |stage: &str, e: QbnfError| {
        errors.push(StageError {
            t: Some(t),
            stage: stage.into(),
            kind: e.kind().into(),
            detail: e.to_string(),
        })
    };
    let mut run = TRun {
        t,
        frequency_at_base: None,
        divisors: None,
        grid: None,
        recursion: None,
    };
    let omega = match freq.evaluate(&config.base_action, t) {
        Ok(w) => w,
        Err(e) => {
            err("frequency", e);
            return (run, errors);
        }
    };
    run.frequency_at_base = Some(omega.clone());
    let radius = config.truncation.fourier_radius;

    if config.run.nonresonance {
        match scan_divisors(&omega, delta, radius, config.kappa) {
            Ok(r) => {
                if !r.verdict {
                    err(
                        "nonresonance",
                        QbnfError::SmallDivisor {
                            order: 0,
                            k: r.worst_k.entries().to_vec(),
                            divisor: r.worst_divisor,
                            threshold: config.kappa
                                / delta.evaluate(r.worst_k.l1() as f64).unwrap_or(1.0),
                        },
                    );
                }
                run.divisors = Some(r);
            }
            Err(e) => {
                err("nonresonance", e);
                return (run, errors);
            }
        }
    }

    if let Some(grid_cfg) = &config.run.grid {
        match mark_nonresonant_grid(freq, delta, config.kappa, radius, &grid_cfg.actions, t) {
            Ok(grid) => {
                let batch = if grid_cfg.batch && !options.check_only {
                    batch_over_grid(config, delta, freq, &grid, t)
                } else {
                    Vec::new()
                };
                run.grid = Some(GridSummary { grid, batch });
            }
            Err(e) => err("grid", e),
        }
    }

    if options.check_only || !config.run.recursion {
        return (run, errors);
    }
    let p = match config.symbol_at(t) {
        Ok(p) => p,
        Err(e) => {
            err("symbol", e);
            return (run, errors);
        }
    };
    let result = match run_recursion(&p, freq, delta, config.kappa, config.truncation.h_order) {
        Ok(r) => r,
        Err(e) => {
            err("recursion", e);
            return (run, errors);
        }
    };
    let mut truncation = Vec::new();
    for &h in &config.run.truncation_h {
        match optimal_truncation_eval(&result.p0, &config.base_action, h, config.eta, rho_bar) {
            Ok(ev) => truncation.push(ev),
            Err(e) => err("truncation", e),
        }
    }
    run.recursion = Some(summarize(
        config,
        &p,
        result,
        truncation,
        options.full_coeffs,
    ));
    (run, errors)
}

fn summarize(
    config: &ProblemConfig,
    p: &crate::symbol::TorusSymbol,
    result: NormalFormResult,
    truncation: Vec<TruncationEval>,
    full_coeffs: bool,
) -> RecursionSummary {
    let decay = if config.run.decay_fit {
        result
            .a
            .orders()
            .iter()
            .enumerate()
            .skip(1)
            .filter(|(_, s)| !s.is_zero())
            .map(|(j, s)| {
                let profile: Vec<(u64, f64)> = s
                    .shell_maxima()
                    .into_iter()
                    .map(|(m, v)| (m, v.ln()))
                    .collect();
                let (fit, note) = match fit_decay(s, config.gevrey.sigma) {
                    Ok(f) => (Some(f), None),
                    Err(e) => (None, Some(e.to_string())),
                };
                DecayEntry {
                    order: j,
                    profile,
                    fit,
                    note,
                }
            })
            .collect()
    } else {
        Vec::new()
    };
    let (growth_fit, growth_note) = if config.run.growth_fit {
        match crate::qbnf::fit_growth(&result) {
            Ok(g) => (Some(g), None),
            Err(e) => (None, Some(e.to_string())),
        }
    } else {
        (None, None)
    };
    RecursionSummary {
        frequency: result.frequency.clone(),
        p_norms: p.norms(),
        a_norms: result.a.norms(),
        p0_norms: result.p0.norms(),
        conjugacy: result.conjugacy.clone(),
        recursion_clip: result.recursion_clip,
        p0_imag_mass: result.p0_imag_mass.clone(),
        per_order: result.per_order.clone(),
        growth_fit,
        growth_note,
        decay,
        truncation,
        full: full_coeffs.then(|| FullCoefficients {
            a: result.a.to_document(),
            p0: result.p0.to_document(),
        }),
    }
}

/// Re-runs the recursion about every flagged action, re-expanding the
/// symbol there with the configured Taylor degree.
fn batch_over_grid(
    config: &ProblemConfig,
    delta: &crate::approximation::ApproximationFunction,
    freq: &crate::nonresonance::FrequencySpec,
    grid: &NonresonantGrid,
    t: f64,
) -> Vec<BatchEntry> {
    let base = match config.symbol_at(t) {
        Ok(p) => p,
        Err(e) => {
            return grid
                .actions
                .iter()
                .map(|a| BatchEntry {
                    action: a.clone(),
                    flagged: false,
                    residual_relative: None,
                    p0_values: Vec::new(),
                    error: Some(e.to_string()),
                })
                .collect()
        }
    };
    grid.actions
        .iter()
        .zip(&grid.flags)
        .map(|(action, &flagged)| {
            let mut entry = BatchEntry {
                action: action.clone(),
                flagged,
                residual_relative: None,
                p0_values: Vec::new(),
                error: None,
            };
            if !flagged {
                return entry;
            }
            let outcome = base.recentered(action).and_then(|p| {
                let local =
                    crate::nonresonance::FrequencySpec::constant(freq.evaluate(action, t)?)?;
                run_recursion(&p, &local, delta, config.kappa, config.truncation.h_order)
            });
            match outcome {
                Ok(r) => {
                    entry.residual_relative = Some(r.conjugacy.relative);
                    entry.p0_values =
                        r.p0.orders()
                            .iter()
                            .map(|s| s.mean().constant_term().re)
                            .collect();
                }
                Err(e) => entry.error = Some(e.to_string()),
            }
            entry
        })
        .collect()
}

/// Data series available to [`emit_plot_data`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotSeries {
    Decay,
    Growth,
    Divisors,
    Residuals,
}

impl FromStr for PlotSeries {
    type Err = QbnfError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "decay" => Ok(PlotSeries::Decay),
            "growth" => Ok(PlotSeries::Growth),
            "divisors" => Ok(PlotSeries::Divisors),
            "residuals" => Ok(PlotSeries::Residuals),
            other => Err(QbnfError::Selection(format!(
                "unknown series '{other}' (expected decay, growth, divisors or residuals)"
            ))),
        }
    }
}

impl fmt::Display for PlotSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PlotSeries::Decay => "decay",
            PlotSeries::Growth => "growth",
            PlotSeries::Divisors => "divisors",
            PlotSeries::Residuals => "residuals",
        })
    }
}

/// Two-column text `(x, y)` for one series, taken from the first `t` run
/// that carries it.
pub fn emit_plot_data(report: &Value, which: PlotSeries) -> Result<String> {
    let runs = report
        .get("runs")
        .and_then(Value::as_array)
        .ok_or_else(|| QbnfError::Selection("report has no runs".into()))?;
    let missing = || QbnfError::Selection(format!("series '{which}' is not present in the report"));
    for run in runs {
        let t = run.get("t").and_then(Value::as_f64).unwrap_or(f64::NAN);
        let rows: Option<(String, Vec<(f64, f64)>)> = match which {
            PlotSeries::Residuals => run
                .pointer("/recursion/conjugacy/norms")
                .and_then(Value::as_array)
                .map(|v| {
                    (
                        format!("# residuals t={t}: x = order j, y = l1 norm of c_j"),
                        v.iter()
                            .enumerate()
                            .map(|(j, y)| (j as f64, num(y)))
                            .collect(),
                    )
                }),
            PlotSeries::Growth => run
                .pointer("/recursion/a_norms/per_order")
                .and_then(Value::as_array)
                .map(|v| {
                    (
                        format!("# growth t={t}: x = order j, y = ln l1 norm of a_j"),
                        v.iter()
                            .enumerate()
                            .skip(1)
                            .filter(|(_, y)| num(y) > 0.0)
                            .map(|(j, y)| (j as f64, num(y).ln()))
                            .collect(),
                    )
                }),
            PlotSeries::Divisors => run
                .pointer("/divisors/shells")
                .and_then(Value::as_array)
                .map(|v| {
                    (
                        format!(
                            "# divisors t={t}: x = shell m = |k|_1, y = min |<k,omega>| * Delta(m)"
                        ),
                        v.iter()
                            .map(|s| (num(&s["m"]), num(&s["min_scaled"])))
                            .collect(),
                    )
                }),
            PlotSeries::Decay => run
                .pointer("/recursion/decay")
                .and_then(Value::as_array)
                .and_then(|v| v.last())
                .map(|entry| {
                    let order = entry["order"].as_u64().unwrap_or(0);
                    (
                        format!(
                            "# decay t={t}: x = shell m = |k|_1, y = ln max |coeff| of a_{order}"
                        ),
                        entry["profile"]
                            .as_array()
                            .map(|p| p.iter().map(|r| (num(&r[0]), num(&r[1]))).collect())
                            .unwrap_or_default(),
                    )
                }),
        };
        if let Some((header, rows)) = rows {
            let mut out = header;
            out.push('\n');
            for (x, y) in rows {
                out.push_str(&format!("{x} {y}\n"));
            }
            return Ok(out);
        }
    }
    Err(missing())
}

fn num(v: &Value) -> f64 {
    v.as_f64().unwrap_or(f64::NAN)
}

/// Outcome of one randomized property suite.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyOutcome {
    pub name: String,
    pub cases: usize,
    pub failures: usize,
    pub worst: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropsReport {
    pub seed: u64,
    pub suites: Vec<PropertyOutcome>,
    pub success: bool,
}

/// Seeded property suites over random small symbols.
pub fn run_props(seed: u64, cases: usize) -> Result<PropsReport> {
    crate::props::run(seed, cases)
}
