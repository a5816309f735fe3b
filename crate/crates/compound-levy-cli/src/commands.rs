//! The six CLI commands, as library functions returning the rendered output.
//!
//! Every command is deterministic given the config (and its seed). A command
//! succeeds only if all requested values were produced and the internal mass
//! checks passed; main translates errors into nonzero exit codes.

use compound_levy::compound::CompoundModel;
use compound_levy::QuantileError;
use serde_json::json;

use crate::config::{ConfigError, RunConfig, StudyKind};
use crate::montecarlo::{
    empirical_cdf, simulate_years, timing_study, truncation_study, SimulationError,
};
use crate::output::CsvTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug)]
pub enum CommandError {
    Config(ConfigError),
    Quantile(QuantileError),
    Simulation(SimulationError),
    /// The retained mixture mass failed the normalization check.
    MassCheck { detail: String },
}

impl std::fmt::Display for CommandError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CommandError::Config(e) => write!(f, "{e}"),
            CommandError::Quantile(e) => write!(f, "{e}"),
            CommandError::Simulation(e) => write!(f, "{e}"),
            CommandError::MassCheck { detail } => write!(f, "mass check failed: {detail}"),
        }
    }
}

impl std::error::Error for CommandError {}

impl From<ConfigError> for CommandError {
    fn from(e: ConfigError) -> Self {
        CommandError::Config(e)
    }
}

impl From<SimulationError> for CommandError {
    fn from(e: SimulationError) -> Self {
        CommandError::Simulation(e)
    }
}

/// Dropped mass beyond which a model is considered mis-truncated. Power-law
/// counting tails legitimately leave more behind than the exponential ones,
/// so this is looser than the defaults achieve in practice.
const MASS_TOLERANCE: f64 = 1e-6;

fn to_json_line(value: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn mass_check(model: &CompoundModel) -> Result<(), CommandError> {
    let dropped = model.dropped_mass();
    if !(dropped.is_finite() && dropped <= MASS_TOLERANCE) {
        return Err(CommandError::MassCheck {
            detail: format!("dropped mass {dropped} above {MASS_TOLERANCE}"),
        });
    }
    let window = model.bounds().n_upper - model.bounds().n_lower;
    if window <= 1_000_000 {
        let total = model.zero_prob() + model.retained_mass() + dropped;
        if (total - 1.0).abs() > 1e-9 {
            return Err(CommandError::MassCheck {
                detail: format!("atom + retained + dropped = {total}"),
            });
        }
    }
    Ok(())
}

/// Closed-form density and CDF over the grid.
pub fn cmd_eval(cfg: &RunConfig, format: OutputFormat) -> Result<String, CommandError> {
    let model = cfg.single_model()?;
    mass_check(&model)?;
    let grid = cfg.grid_points()?;
    let b = model.bounds();
    let rows: Vec<(f64, f64, f64)> =
        grid.iter().map(|&z| (z, model.density(z), model.cdf(z))).collect();
    match format {
        OutputFormat::Csv => {
            let mut t = CsvTable::new();
            t.meta_f64("zero_prob", model.zero_prob())
                .meta("n_lower", &b.n_lower.to_string())
                .meta("n_mode", &b.n_mode.to_string())
                .meta("n_upper", &b.n_upper.to_string())
                .header(&["z", "pdf", "cdf"]);
            for (z, pdf, cdf) in rows {
                t.row(&[z, pdf, cdf]);
            }
            Ok(t.finish())
        }
        OutputFormat::Json => Ok(to_json_line(&json!({
            "zero_prob": model.zero_prob(),
            "n_lower": b.n_lower,
            "n_mode": b.n_mode,
            "n_upper": b.n_upper,
            "rows": rows.iter().map(|&(z, pdf, cdf)| json!({
                "z": z, "pdf": pdf, "cdf": cdf
            })).collect::<Vec<_>>(),
        }))
        ),
    }
}

/// Value at risk at each requested level.
pub fn cmd_var(cfg: &RunConfig, format: OutputFormat) -> Result<String, CommandError> {
    let model = cfg.single_model()?;
    mass_check(&model)?;
    if cfg.quantiles.is_empty() {
        return Err(CommandError::Config(ConfigError::Missing { field: "quantiles".into() }));
    }
    let mut rows = Vec::new();
    for &q in &cfg.quantiles {
        let var = model.value_at_risk(q).map_err(CommandError::Quantile)?;
        rows.push((q, var));
    }
    match format {
        OutputFormat::Csv => {
            let mut t = CsvTable::new();
            t.header(&["q", "var"]);
            for (q, v) in rows {
                t.row(&[q, v]);
            }
            Ok(t.finish())
        }
        OutputFormat::Json => Ok(to_json_line(&json!({
            "rows": rows.iter().map(|&(q, v)| json!({"q": q, "var": v})).collect::<Vec<_>>(),
        }))
        ),
    }
}

/// Truncation window diagnostics.
pub fn cmd_truncate(cfg: &RunConfig, format: OutputFormat) -> Result<String, CommandError> {
    let model = cfg.single_model()?;
    mass_check(&model)?;
    let b = model.bounds();
    let dropped = model.dropped_mass();
    match format {
        OutputFormat::Json => Ok(to_json_line(&json!({
            "n_lower": b.n_lower,
            "n_mode": b.n_mode,
            "n_upper": b.n_upper,
            "threshold_log": b.threshold_log,
            "mass_dropped": dropped,
        }))
        ),
        OutputFormat::Csv => {
            let mut t = CsvTable::new();
            t.header(&["n_lower", "n_mode", "n_upper", "mass_dropped"]);
            t.row(&[b.n_lower as f64, b.n_mode as f64, b.n_upper as f64, dropped]);
            Ok(t.finish())
        }
    }
}

/// Monte Carlo empirical CDF next to the closed form.
pub fn cmd_simulate(cfg: &RunConfig, format: OutputFormat) -> Result<String, CommandError> {
    let model = cfg.single_model()?;
    mass_check(&model)?;
    let sim = cfg.simulation()?;
    let losses = simulate_years(&model, &sim)?;
    let emp = empirical_cdf(&losses, &sim)?;
    match format {
        OutputFormat::Csv => {
            let mut t = CsvTable::new();
            t.meta("years", &sim.years.to_string())
                .meta("block_size", &sim.block_size.to_string())
                .meta("seed", &sim.seed.to_string())
                .header(&["z", "cdf_closed_form", "cdf_empirical", "std_error"]);
            for (i, &z) in emp.grid.iter().enumerate() {
                t.row(&[z, model.cdf(z), emp.estimate[i], emp.std_error[i]]);
            }
            Ok(t.finish())
        }
        OutputFormat::Json => Ok(to_json_line(&json!({
            "years": sim.years,
            "block_size": sim.block_size,
            "seed": sim.seed,
            "rows": emp.grid.iter().enumerate().map(|(i, &z)| json!({
                "z": z,
                "cdf_closed_form": model.cdf(z),
                "cdf_empirical": emp.estimate[i],
                "std_error": emp.std_error[i],
            })).collect::<Vec<_>>(),
        }))
        ),
    }
}

/// Truncation-error curve or timing comparison, per `study` in the config.
pub fn cmd_study(cfg: &RunConfig, format: OutputFormat) -> Result<String, CommandError> {
    let model = cfg.single_model()?;
    mass_check(&model)?;
    let kind = cfg.study.unwrap_or(StudyKind::Truncation);
    match kind {
        StudyKind::Truncation => {
            let caps = match &cfg.caps {
                Some(c) => c.values()?,
                None => {
                    let b = model.bounds();
                    (1..=b.n_upper.min(1000)).collect()
                }
            };
            let grid = cfg.grid_points()?;
            let rows = truncation_study(&model, &caps, &grid);
            match format {
                OutputFormat::Csv => {
                    let mut t = CsvTable::new();
                    t.header(&["cap", "mse"]);
                    for (cap, mse) in rows {
                        t.row(&[cap as f64, mse]);
                    }
                    Ok(t.finish())
                }
                OutputFormat::Json => Ok(to_json_line(&json!({
                    "rows": rows.iter().map(|&(cap, mse)| json!({
                        "cap": cap, "mse": mse
                    })).collect::<Vec<_>>(),
                }))
                ),
            }
        }
        StudyKind::Timing => {
            let sim = cfg.simulation()?;
            let timing = timing_study(&model, &sim)?;
            match format {
                OutputFormat::Csv => {
                    let mut t = CsvTable::new();
                    t.header(&["closed_form_seconds", "monte_carlo_seconds", "ratio"]);
                    t.row(&[
                        timing.closed_form_seconds,
                        timing.monte_carlo_seconds,
                        timing.ratio(),
                    ]);
                    Ok(t.finish())
                }
                OutputFormat::Json => Ok(to_json_line(&json!({
                    "closed_form_seconds": timing.closed_form_seconds,
                    "monte_carlo_seconds": timing.monte_carlo_seconds,
                    "ratio": timing.ratio(),
                }))
                ),
            }
        }
    }
}

/// Institution-wide loss across all configured cells.
pub fn cmd_aggregate(cfg: &RunConfig, format: OutputFormat) -> Result<String, CommandError> {
    let agg = cfg.aggregate_model()?;
    let retained = agg.retained_weight();
    if 1.0 - retained > MASS_TOLERANCE {
        return Err(CommandError::MassCheck {
            detail: format!("aggregate retained weight {retained}"),
        });
    }
    let grid = cfg.grid_points()?;
    let rows: Vec<(f64, f64, f64)> =
        grid.iter().map(|&z| (z, agg.density(z), agg.cdf(z))).collect();
    let mut var_rows = Vec::new();
    for &q in &cfg.quantiles {
        let v = agg.value_at_risk(q).map_err(CommandError::Quantile)?;
        var_rows.push((q, v));
    }
    match format {
        OutputFormat::Csv => {
            let mut t = CsvTable::new();
            t.meta_f64("atom", agg.atom())
                .meta("components", &agg.component_count().to_string())
                .meta_f64("retained_weight", retained)
                .header(&["z", "pdf", "cdf"]);
            for (z, pdf, cdf) in rows {
                t.row(&[z, pdf, cdf]);
            }
            if !var_rows.is_empty() {
                t.blank().header(&["q", "var"]);
                for (q, v) in var_rows {
                    t.row(&[q, v]);
                }
            }
            Ok(t.finish())
        }
        OutputFormat::Json => Ok(to_json_line(&json!({
            "atom": agg.atom(),
            "components": agg.component_count(),
            "retained_weight": retained,
            "rows": rows.iter().map(|&(z, pdf, cdf)| json!({
                "z": z, "pdf": pdf, "cdf": cdf
            })).collect::<Vec<_>>(),
            "var": var_rows.iter().map(|&(q, v)| json!({
                "q": q, "var": v
            })).collect::<Vec<_>>(),
        }))
        ),
    }
}

/// Render one command against a parsed config.
pub fn run_command(
    name: &str,
    cfg: &RunConfig,
    format: OutputFormat,
) -> Result<String, CommandError> {
    match name {
        "eval" => cmd_eval(cfg, format),
        "var" => cmd_var(cfg, format),
        "truncate" => cmd_truncate(cfg, format),
        "simulate" => cmd_simulate(cfg, format),
        "study" => cmd_study(cfg, format),
        "aggregate" => cmd_aggregate(cfg, format),
        other => Err(CommandError::Config(ConfigError::Invalid {
            field: "command".into(),
            reason: format!("unknown command {other}"),
        })),
    }
}
