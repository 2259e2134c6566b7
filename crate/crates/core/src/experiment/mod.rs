//! Sweeps, power-law fits, CSV output and the validation suite.

pub mod config;
pub mod fit;
pub mod sweep;
pub mod validate;

pub use config::{Alpha, Mode, RunConfig};
pub use fit::{fit_in_window, fit_power_law, PowerLawFit};
pub use sweep::{sweep_setting1, sweep_setting2, sweep_size, Row, Table};
pub use validate::{run_validation, Check};

use crate::error::Result;

/// Monte Carlo samples per separation in `validate`.
pub const VALIDATE_SAMPLES: usize = 200_000;

/// One line of the fit summary; `fit` is `Err` with a reason when the
/// window holds too few usable points.
#[derive(Debug, Clone, PartialEq)]
pub struct FitLine {
    pub quantity: &'static str,
    pub fit: std::result::Result<PowerLawFit, String>,
}

impl std::fmt::Display for FitLine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.fit {
            Ok(fit) => write!(f, "{} {}", self.quantity, fit),
            Err(reason) => write!(f, "{} NA NA NA NA # {}", self.quantity, reason),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub table: Option<Table>,
    pub fits: Vec<FitLine>,
    pub checks: Vec<Check>,
}

/// Quantities fitted per mode: `(column, summary name, with_offset)`.
fn fit_plan(mode: Mode) -> &'static [(&'static str, &'static str, bool)] {
    match mode {
        Mode::Setting1 => &[
            ("E_B_opt", "E_B_abs", false),
            ("delta_S_M", "delta_S_M", false),
        ],
        Mode::SizeSweep => &[
            ("delta_E_N", "delta_E_N", false),
            ("E_B_abs", "E_B_abs", true),
            ("beta", "beta", false),
        ],
        Mode::Setting2 | Mode::Validate => &[],
    }
}

pub fn fits_for(table: &Table, mode: Mode, window: (f64, f64)) -> Result<Vec<FitLine>> {
    fit_plan(mode)
        .iter()
        .map(|&(column, quantity, with_offset)| {
            let series: Vec<_> = table
                .series(column)?
                .into_iter()
                .map(|(x, y)| (x, y.abs()))
                .collect();
            Ok(FitLine {
                quantity,
                fit: fit_in_window(&series, window, with_offset).map_err(|e| e.to_string()),
            })
        })
        .collect()
}

/// Runs the configured mode and saves the table when an output path is set.
pub fn run(config: &RunConfig) -> Result<RunOutput> {
    let table = match config.mode {
        Mode::Setting1 => sweep_setting1(config)?,
        Mode::Setting2 => sweep_setting2(config)?,
        Mode::SizeSweep => sweep_size(config)?,
        Mode::Validate => {
            let checks = sweep::ordered_map(&[0], config.threads, |_| {
                run_validation(config.seed, VALIDATE_SAMPLES)
            })?
            .remove(0);
            return Ok(RunOutput {
                table: None,
                fits: Vec::new(),
                checks,
            });
        }
    };
    if let Some(path) = &config.out {
        table.save(path)?;
    }
    let fits = fits_for(&table, config.mode, config.fit_window)?;
    Ok(RunOutput {
        table: Some(table),
        fits,
        checks: Vec::new(),
    })
}
