//! Budget sweep with early stopping, results CSV, and the three plot
//! emitters (success frontier, score heatmap, score-vs-runtime scatter).
//!
//! Run with: `cargo run --release --example budget_sweep [out_dir]`

use omc::harness::csvio::{results_csv, write_file};
use omc::harness::svg::{frontier_svg, heatmap_svg, scatter_svg};
use omc::harness::sweep::{frontier, run_benchmark_sweep, SweepSpec, SUCCESS_THRESHOLD};
use std::path::PathBuf;

fn main() {
    let out_dir =
        PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "omc-sweep".to_string()));
    std::fs::create_dir_all(&out_dir).unwrap();

    let mut spec = SweepSpec::new("mog_base", vec![2, 5], vec![200, 1000], 2);
    spec.oracle_cache = Some(out_dir.join("oracle-cache"));
    let rows = run_benchmark_sweep(&spec).unwrap();
    println!("sweep produced {} rows (early stopping skips solved budgets)", rows.len());

    write_file(&out_dir.join("results.csv"), &results_csv(&rows)).unwrap();
    write_file(&out_dir.join("frontier.svg"), &frontier_svg(&rows, SUCCESS_THRESHOLD)).unwrap();
    write_file(&out_dir.join("heatmap.svg"), &heatmap_svg(&rows)).unwrap();
    write_file(&out_dir.join("scatter.svg"), &scatter_svg(&rows)).unwrap();

    for (problem, dim, best) in frontier(&rows, SUCCESS_THRESHOLD) {
        match best {
            Some((seeds, score, runtime)) => println!(
                "{problem} D={dim}: first success at S={seeds} (mean C2ST {score:.3}, {runtime:.1}s)"
            ),
            None => println!("{problem} D={dim}: no budget reached the threshold"),
        }
    }
    println!("results and plots in {}", out_dir.display());
}
