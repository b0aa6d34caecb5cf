use anyhow::Result;
use clap::Parser;

use kcov::config::{parse_config, Args, RunPlan};
use kcov::output::{render_svg, write_csv};
use kcov::sweep::{cell_file_stem, run_sweep, summarize_sweep, write_summary_csv, SweepCellResult};
use kcoverage::simulator::{mw_to_dbm, run};

fn main() -> Result<()> {
    let args = Args::parse();
    let (plan, out) = parse_config(&args)?;
    match plan {
        RunPlan::Single(config) => {
            let log = run(&config)?;
            let stem = cell_file_stem(config.epsilon, config.seed);
            let csv_path = out.out_dir.join(format!("{stem}.csv"));
            write_csv(&log, &csv_path)?;
            if out.svg {
                render_svg(&log, &config, &out.out_dir.join(format!("{stem}.svg")))?;
            }
            let result = SweepCellResult::from_log(config.epsilon, config.seed, &log);
            println!(
                "mode={} eps={} seed={} steps={} final_H={:.3} messages={} power_dbm={:.2} -> {}",
                config.mode.as_str(),
                config.epsilon,
                config.seed,
                config.steps,
                result.final_h,
                result.total_messages,
                mw_to_dbm(result.total_power_mw),
                csv_path.display()
            );
        }
        RunPlan::Sweep(spec) => {
            let results = run_sweep(&spec, out.jobs, &out.out_dir, out.svg)?;
            let rows = summarize_sweep(&spec.epsilons, &results);
            let summary_path = out.out_dir.join("summary.csv");
            write_summary_csv(&rows, &summary_path)?;
            for r in &rows {
                println!(
                    "eps={:<6} mean_final_H={:<14.3} mean_msgs={:<10.1} msg_reduction={}  H_degradation={}",
                    r.epsilon,
                    r.mean_final_h,
                    r.mean_msgs,
                    r.msg_reduction_pct
                        .map(|v| format!("{v:.1}%"))
                        .unwrap_or_else(|| "n/a".into()),
                    r.h_degradation_pct
                        .map(|v| format!("{v:.2}%"))
                        .unwrap_or_else(|| "n/a".into()),
                );
            }
            println!("summary -> {}", summary_path.display());
        }
    }
    Ok(())
}
