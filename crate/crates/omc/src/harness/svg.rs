//! Self-contained SVG plots over sweep results: success frontier, score
//! heatmap, and score-vs-runtime scatter. No external assets; labeled axes;
//! values match the CSV rows exactly.

use crate::harness::csvio::ResultRow;
use crate::harness::sweep::{cell_means, frontier};
use std::fmt::Write as _;

const W: f64 = 640.0;
const H: f64 = 440.0;
const ML: f64 = 80.0; // margins
const MR: f64 = 30.0;
const MT: f64 = 46.0;
const MB: f64 = 64.0;

fn header(title: &str) -> String {
    let mut s = String::new();
    let _ = write!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n\
         <rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n\
         <text x=\"{:.1}\" y=\"26\" font-family=\"sans-serif\" font-size=\"16\" text-anchor=\"middle\">{title}</text>\n",
        W / 2.0
    );
    s
}

fn empty_plot(title: &str, notice: &str) -> String {
    let mut s = header(title);
    let _ = write!(
        s,
        "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\" fill=\"#888\">{notice}</text>\n</svg>\n",
        W / 2.0,
        H / 2.0
    );
    s
}

fn axis_labels(s: &mut String, x_label: &str, y_label: &str) {
    let _ = write!(
        s,
        "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">{x_label}</text>\n",
        ML + (W - ML - MR) / 2.0,
        H - 16.0
    );
    let _ = write!(
        s,
        "<text x=\"18\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 18 {:.1})\">{y_label}</text>\n",
        MT + (H - MT - MB) / 2.0,
        MT + (H - MT - MB) / 2.0
    );
}

fn frame(s: &mut String) {
    let _ = write!(
        s,
        "<rect x=\"{ML}\" y=\"{MT}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"none\" stroke=\"#333\"/>\n",
        W - ML - MR,
        H - MT - MB
    );
}

fn lin_map(v: f64, lo: f64, hi: f64, a: f64, b: f64) -> f64 {
    if (hi - lo).abs() < 1e-300 {
        return (a + b) / 2.0;
    }
    a + (v - lo) / (hi - lo) * (b - a)
}

/// Success frontier: minimum budget reaching the score threshold, by
/// dimension. Dimensions that never succeed are marked at the top.
pub fn frontier_svg(rows: &[ResultRow], threshold: f64) -> String {
    if rows.is_empty() {
        return empty_plot("Success frontier", "no results to plot");
    }
    let fr = frontier(rows, threshold);
    let dims: Vec<usize> = fr.iter().map(|(_, d, _)| *d).collect();
    let budgets: Vec<Option<usize>> = fr.iter().map(|(_, _, b)| b.map(|x| x.0)).collect();
    let max_budget =
        rows.iter().map(|r| r.seeds).max().unwrap_or(1).max(budgets.iter().flatten().copied().max().unwrap_or(1));
    let (dmin, dmax) = (
        *dims.iter().min().unwrap() as f64,
        *dims.iter().max().unwrap() as f64,
    );
    let mut s = header(&format!("Success frontier (mean C2ST <= {threshold})"));
    frame(&mut s);
    axis_labels(&mut s, "parameter dimension D", "minimum budget (seeds S)");

    // y ticks at powers covering the budget range
    let ymax = (max_budget as f64) * 1.15;
    for tick in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let v = tick * ymax;
        let y = lin_map(v, 0.0, ymax, H - MB, MT);
        let _ = write!(
            s,
            "<line x1=\"{ML}\" y1=\"{y:.1}\" x2=\"{:.1}\" y2=\"{y:.1}\" stroke=\"#ddd\"/>\n<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">{:.0}</text>\n",
            W - MR,
            ML - 6.0,
            y + 4.0,
            v
        );
    }
    let mut path = String::new();
    for (k, (dim, budget)) in dims.iter().zip(&budgets).enumerate() {
        let x = lin_map(*dim as f64, dmin, dmax.max(dmin + 1.0), ML + 20.0, W - MR - 20.0);
        let _ = write!(
            s,
            "<text x=\"{x:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">{dim}</text>\n",
            H - MB + 16.0
        );
        match budget {
            Some(b) => {
                let y = lin_map(*b as f64, 0.0, ymax, H - MB, MT);
                let _ = write!(
                    s,
                    "<circle cx=\"{x:.1}\" cy=\"{y:.1}\" r=\"4\" fill=\"#1f77b4\"/>\n<text x=\"{x:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"middle\">{b}</text>\n",
                    y - 8.0
                );
                let _ = write!(path, "{}{x:.1},{y:.1} ", if k == 0 { "M" } else { "L" });
            }
            None => {
                let _ = write!(
                    s,
                    "<text x=\"{x:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\" fill=\"#d62728\">none</text>\n",
                    MT + 14.0
                );
            }
        }
    }
    if path.contains('L') {
        let _ = write!(
            s,
            "<path d=\"{}\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\"/>\n",
            path.trim_end()
        );
    }
    s.push_str("</svg>\n");
    s
}

fn heat_color(score: f64) -> String {
    // 0.5 → white, 1.0 → saturated red
    let t = ((score - 0.5) / 0.5).clamp(0.0, 1.0);
    let g = (255.0 * (1.0 - t * 0.75)) as u8;
    let b = (255.0 * (1.0 - t)) as u8;
    format!("rgb(255,{g},{b})")
}

/// Heatmap of mean C2ST per (dim, seeds) cell; one cell per sweep pair.
pub fn heatmap_svg(rows: &[ResultRow]) -> String {
    if rows.is_empty() {
        return empty_plot("C2ST heatmap", "no results to plot");
    }
    let means = cell_means(rows);
    let mut dims: Vec<usize> = means.iter().map(|m| m.1).collect();
    dims.sort_unstable();
    dims.dedup();
    let mut seeds: Vec<usize> = means.iter().map(|m| m.2).collect();
    seeds.sort_unstable();
    seeds.dedup();

    let mut s = header("Mean C2ST by dimension and budget");
    axis_labels(&mut s, "parameter dimension D", "budget (seeds S)");
    let cw = (W - ML - MR) / dims.len() as f64;
    let ch = (H - MT - MB) / seeds.len() as f64;
    for (si, seed) in seeds.iter().enumerate() {
        // larger budgets on top
        let y = H - MB - (si as f64 + 1.0) * ch;
        let _ = write!(
            s,
            "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">{seed}</text>\n",
            ML - 6.0,
            y + ch / 2.0 + 4.0
        );
        for (di, dim) in dims.iter().enumerate() {
            let x = ML + di as f64 * cw;
            if si == 0 {
                let _ = write!(
                    s,
                    "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">{dim}</text>\n",
                    x + cw / 2.0,
                    H - MB + 16.0
                );
            }
            if let Some(cell) =
                means.iter().find(|(_, d, sd, ..)| *d == *dim && *sd == *seed)
            {
                let _ = write!(
                    s,
                    "<rect x=\"{x:.1}\" y=\"{y:.1}\" width=\"{cw:.1}\" height=\"{ch:.1}\" fill=\"{}\" stroke=\"#999\"/>\n<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">{:.3}</text>\n",
                    heat_color(cell.3),
                    x + cw / 2.0,
                    y + ch / 2.0 + 4.0,
                    cell.3
                );
            } else {
                let _ = write!(
                    s,
                    "<rect x=\"{x:.1}\" y=\"{y:.1}\" width=\"{cw:.1}\" height=\"{ch:.1}\" fill=\"#f4f4f4\" stroke=\"#999\"/>\n<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"10\" fill=\"#999\" text-anchor=\"middle\">skipped</text>\n",
                    x + cw / 2.0,
                    y + ch / 2.0 + 4.0
                );
            }
        }
    }
    frame(&mut s);
    s.push_str("</svg>\n");
    s
}

/// Scatter of C2ST against runtime, one point per result row.
pub fn scatter_svg(rows: &[ResultRow]) -> String {
    if rows.is_empty() {
        return empty_plot("C2ST vs runtime", "no results to plot");
    }
    let tmax = rows.iter().map(|r| r.runtime_seconds).fold(f64::MIN, f64::max) * 1.1 + 1e-9;
    let mut s = header("C2ST vs runtime");
    frame(&mut s);
    axis_labels(&mut s, "runtime (seconds)", "C2ST score");
    for tick in [0.5, 0.75, 1.0] {
        let y = lin_map(tick, 0.45, 1.0, H - MB, MT);
        let _ = write!(
            s,
            "<line x1=\"{ML}\" y1=\"{y:.1}\" x2=\"{:.1}\" y2=\"{y:.1}\" stroke=\"#ddd\"/>\n<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">{tick}</text>\n",
            W - MR,
            ML - 6.0,
            y + 4.0
        );
    }
    for frac in [0.0, 0.5, 1.0] {
        let v = frac * tmax;
        let x = lin_map(v, 0.0, tmax, ML, W - MR);
        let _ = write!(
            s,
            "<text x=\"{x:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">{v:.2}</text>\n",
            H - MB + 16.0
        );
    }
    for r in rows {
        let x = lin_map(r.runtime_seconds, 0.0, tmax, ML, W - MR);
        let y = lin_map(r.c2st.clamp(0.45, 1.0), 0.45, 1.0, H - MB, MT);
        let _ = write!(
            s,
            "<circle cx=\"{x:.1}\" cy=\"{y:.1}\" r=\"3.5\" fill=\"#1f77b4\" fill-opacity=\"0.7\"><title>{} D={} S={} rep={} c2st={:.3}</title></circle>\n",
            r.problem, r.dim, r.seeds, r.rep, r.c2st
        );
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(dim: usize, seeds: usize, c: f64) -> ResultRow {
        ResultRow {
            problem: "p".into(),
            method: "omc".into(),
            dim,
            seeds,
            rep: 0,
            master_seed: 0,
            c2st: c,
            runtime_seconds: 0.5,
            vectorized_calls: 1,
            instance_evaluations: 2,
        }
    }

    #[test]
    fn empty_rows_give_a_notice_plot() {
        for svg in [frontier_svg(&[], 0.75), heatmap_svg(&[]), scatter_svg(&[])] {
            assert!(svg.contains("no results to plot"));
            assert!(svg.starts_with("<svg"));
            assert!(svg.trim_end().ends_with("</svg>"));
        }
    }

    #[test]
    fn single_row_frontier_has_one_point() {
        let svg = frontier_svg(&[row(2, 100, 0.6)], 0.75);
        assert_eq!(svg.matches("<circle").count(), 1);
        assert!(svg.contains(">100<"));
    }

    #[test]
    fn frontier_picks_the_known_minimum() {
        let rows = vec![row(2, 100, 0.9), row(2, 1000, 0.6), row(2, 5000, 0.5)];
        let svg = frontier_svg(&rows, 0.75);
        assert!(svg.contains(">1000<"), "frontier should label the minimal budget");
    }

    #[test]
    fn heatmap_has_one_cell_per_pair() {
        let rows = vec![
            row(2, 100, 0.9),
            row(2, 1000, 0.6),
            row(10, 100, 0.95),
            row(10, 1000, 0.8),
        ];
        let svg = heatmap_svg(&rows);
        assert_eq!(svg.matches("stroke=\"#999\"").count(), 4, "cell count = |D| × |S|");
    }

    #[test]
    fn scatter_places_every_row() {
        let rows = vec![row(2, 100, 0.9), row(2, 1000, 0.6)];
        let svg = scatter_svg(&rows);
        assert_eq!(svg.matches("<circle").count(), 2);
    }
}
