//! Epsilon-sweep batches over seed sets, with per-cell CSV output and an
//! aggregate summary. Cells run in parallel; results and files are
//! deterministic regardless of the job count.

use std::path::Path;

use anyhow::{anyhow, Context, Result};
use rayon::prelude::*;

use kcoverage::simulator::{mw_to_dbm, run, Mode, SimConfig, TrajectoryLog};

use crate::output::{fmt_sig9, render_svg, write_csv};

/// A sweep: every epsilon crossed with every seed. Epsilon 0 runs the
/// benchmark (continuous-update) mode.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub epsilons: Vec<f64>,
    pub seeds: Vec<u64>,
    pub base: SimConfig,
}

impl SweepSpec {
    pub fn cell_config(&self, epsilon: f64, seed: u64) -> SimConfig {
        SimConfig {
            epsilon,
            seed,
            mode: if epsilon == 0.0 {
                Mode::Benchmark
            } else {
                self.base.mode
            },
            ..self.base.clone()
        }
    }
}

/// End-of-run aggregates for one (epsilon, seed) cell.
#[derive(Debug, Clone)]
pub struct SweepCellResult {
    pub epsilon: f64,
    pub seed: u64,
    pub final_h: f64,
    pub total_messages: u64,
    pub total_power_mw: f64,
}

impl SweepCellResult {
    pub fn from_log(epsilon: f64, seed: u64, log: &TrajectoryLog) -> Self {
        SweepCellResult {
            epsilon,
            seed,
            final_h: log.final_h(),
            total_messages: log.total_messages(),
            total_power_mw: log.total_power_mw(),
        }
    }
}

/// Per-epsilon aggregate row. Relative columns are None when the sweep has
/// no epsilon = 0 baseline.
#[derive(Debug, Clone)]
pub struct SummaryRow {
    pub epsilon: f64,
    pub mean_final_h: f64,
    pub mean_msgs: f64,
    pub mean_power_dbm: f64,
    pub msg_reduction_pct: Option<f64>,
    pub h_degradation_pct: Option<f64>,
}

pub fn cell_file_stem(epsilon: f64, seed: u64) -> String {
    format!("eps{epsilon}_seed{seed}")
}

/// Runs the whole sweep. `jobs` limits parallelism (None: all cores). Each
/// cell writes `eps{e}_seed{s}.csv` (and optionally `.svg`) under `out_dir`.
pub fn run_sweep(
    spec: &SweepSpec,
    jobs: Option<usize>,
    out_dir: &Path,
    svg: bool,
) -> Result<Vec<SweepCellResult>> {
    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("cannot create {}", out_dir.display()))?;
    let cells: Vec<(f64, u64)> = spec
        .epsilons
        .iter()
        .flat_map(|&e| spec.seeds.iter().map(move |&s| (e, s)))
        .collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .context("cannot build thread pool")?;
    let out_dir = out_dir.to_path_buf();
    pool.install(|| {
        cells
            .par_iter()
            .map(|&(epsilon, seed)| {
                let config = spec.cell_config(epsilon, seed);
                let log = run(&config).map_err(|e| anyhow!("eps {epsilon} seed {seed}: {e}"))?;
                let stem = cell_file_stem(epsilon, seed);
                write_csv(&log, &out_dir.join(format!("{stem}.csv")))?;
                if svg {
                    render_svg(&log, &config, &out_dir.join(format!("{stem}.svg")))?;
                }
                Ok(SweepCellResult::from_log(epsilon, seed, &log))
            })
            .collect::<Result<Vec<_>>>()
    })
}

/// Aggregates cell results per epsilon, preserving the sweep's epsilon
/// order. Relative columns compare against the epsilon = 0 rows; when those
/// are absent a warning goes to stderr and the columns stay empty.
pub fn summarize_sweep(epsilons: &[f64], results: &[SweepCellResult]) -> Vec<SummaryRow> {
    let aggregate = |eps: f64| -> Option<(f64, f64, f64)> {
        let cells: Vec<&SweepCellResult> = results.iter().filter(|c| c.epsilon == eps).collect();
        if cells.is_empty() {
            return None;
        }
        let count = cells.len() as f64;
        let mean_h = cells.iter().map(|c| c.final_h).sum::<f64>() / count;
        let mean_msgs = cells.iter().map(|c| c.total_messages as f64).sum::<f64>() / count;
        let mean_power_mw = cells.iter().map(|c| c.total_power_mw).sum::<f64>() / count;
        Some((mean_h, mean_msgs, mean_power_mw))
    };

    let baseline = aggregate(0.0);
    if baseline.is_none() {
        eprintln!("warning: no epsilon = 0 baseline in sweep; relative columns omitted");
    }
    epsilons
        .iter()
        .filter_map(|&eps| {
            let (mean_h, mean_msgs, mean_power_mw) = aggregate(eps)?;
            let (msg_reduction_pct, h_degradation_pct) = match baseline {
                Some((base_h, base_msgs, _)) if base_msgs > 0.0 && base_h > 0.0 => (
                    Some(100.0 * (1.0 - mean_msgs / base_msgs)),
                    Some(100.0 * (mean_h / base_h - 1.0)),
                ),
                _ => (None, None),
            };
            Some(SummaryRow {
                epsilon: eps,
                mean_final_h: mean_h,
                mean_msgs,
                mean_power_dbm: mw_to_dbm(mean_power_mw),
                msg_reduction_pct,
                h_degradation_pct,
            })
        })
        .collect()
}

pub fn write_summary_csv(rows: &[SummaryRow], path: &Path) -> Result<()> {
    let mut out = String::from(
        "epsilon,mean_final_H,mean_msgs,mean_power_dbm,msg_reduction_pct,H_degradation_pct\n",
    );
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.epsilon,
            fmt_sig9(r.mean_final_h),
            fmt_sig9(r.mean_msgs),
            fmt_sig9(r.mean_power_dbm),
            r.msg_reduction_pct.map(fmt_sig9).unwrap_or_default(),
            r.h_degradation_pct.map(fmt_sig9).unwrap_or_default(),
        ));
    }
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).ok();
    }
    std::fs::write(path, out).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}
