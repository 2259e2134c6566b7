//! Parameter sweeps over the two geometries and the chain length.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;

use crate::chain_model::ChainParams;
use crate::error::{Error, Result};
use crate::experiment::config::RunConfig;
use crate::qet_protocol::{run_setting2, Setting1};

pub const SETTING1_COLUMNS: &[&str] = &[
    "d",
    "E_B_opt",
    "E_N_before",
    "E_N_after",
    "delta_E_N",
    "S_M_before",
    "S_M_after",
    "delta_S_M",
];
pub const SETTING2_COLUMNS: &[&str] = &["ell", "delta_E_N", "E_B_abs", "ratio"];
pub const SIZE_COLUMNS: &[&str] = &["N", "delta_E_N", "E_B_abs", "beta"];

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    /// Grid coordinate: `d`, `ℓ` or `N`.
    pub key: usize,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: &'static [&'static str],
    pub rows: Vec<Row>,
}

impl Table {
    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| *c == name)
    }

    /// `(key, value)` pairs of one value column.
    pub fn series(&self, name: &str) -> Result<Vec<(f64, f64)>> {
        let idx = self
            .column_index(name)
            .filter(|&i| i > 0)
            .ok_or_else(|| Error::Config(format!("no value column `{name}`")))?;
        Ok(self
            .rows
            .iter()
            .map(|r| (r.key as f64, r.values[idx - 1]))
            .collect())
    }

    /// CSV with a header row; floats carry 12 significant digits.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(self.columns)?;
        for row in &self.rows {
            let mut record = vec![row.key.to_string()];
            record.extend(row.values.iter().map(|v| format!("{v:.11e}")));
            w.write_record(&record)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }
}

/// Evaluates `f` over `grid` on a pool of `threads` workers (0 = default),
/// keeping the grid order.
pub fn ordered_map<T, F>(grid: &[usize], threads: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    pool.install(|| grid.par_iter().map(|&k| f(k)).collect())
}

pub fn sweep_setting1(config: &RunConfig) -> Result<Table> {
    let setting = Setting1::new(&config.params()?)?;
    let grid: Vec<usize> = (0..=config.d_max).collect();
    let rows = ordered_map(&grid, config.threads, |d| {
        let r = setting.run(d)?;
        Ok(Row {
            key: d,
            values: vec![
                r.optimized_energy,
                r.e_n_before,
                r.e_n_after,
                r.delta_log_negativity,
                r.s_m_before,
                r.s_m_after,
                r.delta_mutual_information,
            ],
        })
    })?;
    Ok(Table {
        columns: SETTING1_COLUMNS,
        rows,
    })
}

pub fn sweep_setting2(config: &RunConfig) -> Result<Table> {
    let params = config.params()?;
    let (lo, hi) = config.ell_range();
    let grid: Vec<usize> = (lo..=hi).collect();
    let rows = ordered_map(&grid, config.threads, |ell| {
        let r = run_setting2(&params, ell)?;
        let e_abs = r.optimized_energy.abs();
        Ok(Row {
            key: ell,
            values: vec![
                r.delta_log_negativity,
                e_abs,
                e_abs / r.delta_log_negativity,
            ],
        })
    })?;
    Ok(Table {
        columns: SETTING2_COLUMNS,
        rows,
    })
}

/// One setting-2 run per chain length at the widest block, `ℓ = N/2 − 2`.
pub fn sweep_size(config: &RunConfig) -> Result<Table> {
    let rows = ordered_map(&config.n_list, config.threads, |n| {
        let params = ChainParams::new(n, config.alpha.value, config.omega)?;
        let r = run_setting2(&params, n / 2 - 2)?;
        let e_abs = r.optimized_energy.abs();
        Ok(Row {
            key: n,
            values: vec![
                r.delta_log_negativity,
                e_abs,
                e_abs / r.delta_log_negativity,
            ],
        })
    })?;
    Ok(Table {
        columns: SIZE_COLUMNS,
        rows,
    })
}
