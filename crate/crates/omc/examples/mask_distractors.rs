//! Detect uninformative output dimensions on the distractor benchmarks.
//!
//! The sensitivity stage estimates E‖∇_θ g_k‖ per output dimension from
//! prior and noise samples alone — no observed data — and masks off the
//! dimensions whose estimate does not clear the threshold.
//!
//! Run with: `cargo run --release --example mask_distractors`

use omc::sensitivity::{compute_mask, DEFAULT_THRESHOLD};
use omc::simulators::make_problem;

fn main() {
    for id in ["mog_base_dist", "mog_two_dist", "slcp_dist"] {
        let problem = make_problem(id, 2).unwrap();
        let mask = compute_mask(problem.sim(), 50, 50, DEFAULT_THRESHOLD, 0).unwrap();
        println!(
            "{id}: {} of {} output dimensions informative",
            mask.active_count(),
            mask.len()
        );
        let shown = mask.len().min(8);
        for k in 0..shown {
            println!(
                "  dim {k:2}: estimate {:10.4e}  {}",
                mask.estimates()[k],
                if mask.active()[k] { "informative" } else { "distractor" }
            );
        }
        if mask.len() > shown {
            let first_inactive = mask.active().iter().position(|a| !a);
            println!(
                "  ... remaining {} dims, first distractor at index {:?}",
                mask.len() - shown,
                first_inactive
            );
        }
    }

    // masks are stable across estimate sample counts
    let problem = make_problem("mog_base_dist", 2).unwrap();
    let coarse = compute_mask(problem.sim(), 10, 10, DEFAULT_THRESHOLD, 0).unwrap();
    let fine = compute_mask(problem.sim(), 50, 50, DEFAULT_THRESHOLD, 0).unwrap();
    println!(
        "mask stable between 10 and 50 samples: {}",
        coarse.active() == fine.active()
    );
}
