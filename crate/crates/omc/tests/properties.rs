//! Property tests over the core distance, optimizer, box and weighting
//! invariants.

use omc::core::{masked_sq_distance, NoiseDraw, OutputVector, ParamVector};
use omc::harness::config::ExperimentConfig;
use omc::optimize::{optimize_seed, OptimizerConfig};
use omc::posterior::effective_sample_size;
use omc::regions::{box_contains, box_density, jacobi_eigen, sample_box, Hyperbox};
use omc::sensitivity::Mask;
use omc::simulators::mog::{MogSimulator, MogVariant};
use omc::streams::{substream, StreamKind};
use proptest::prelude::*;

fn finite_vec(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-5.0f64..5.0, len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn masked_distance_nonnegative_and_identity(
        y in finite_vec(6),
        y_obs in finite_vec(6),
        active in prop::collection::vec(any::<bool>(), 6),
    ) {
        let d = masked_sq_distance(&y, &y_obs, &active);
        prop_assert!(d >= 0.0);
        let exact = active
            .iter()
            .enumerate()
            .all(|(k, a)| !a || (y[k] - y_obs[k]).abs() == 0.0);
        prop_assert_eq!(d == 0.0, exact);
    }

    #[test]
    fn masked_distance_monotone_in_the_mask(
        y in finite_vec(6),
        y_obs in finite_vec(6),
        active in prop::collection::vec(any::<bool>(), 6),
        extra in 0usize..6,
    ) {
        let base = masked_sq_distance(&y, &y_obs, &active);
        let mut wider = active.clone();
        wider[extra] = true;
        let d = masked_sq_distance(&y, &y_obs, &wider);
        prop_assert!(d >= base - 1e-15);
    }

    #[test]
    fn best_iterate_never_worse_than_start(
        theta0 in finite_vec(2),
        z in finite_vec(2),
        lr in 0.01f64..0.5,
        steps in 1usize..40,
    ) {
        let sim = MogSimulator::new(2, MogVariant::Base, 0);
        let u = NoiseDraw::new(z, vec![], vec![]);
        let y_obs = OutputVector::new(vec![0.0, 0.0]).unwrap();
        let mask = Mask::full(2);
        let theta0 = ParamVector::new(theta0).unwrap();
        let d0 = omc::core::masked_distance(&sim, &theta0, &u, &y_obs, &mask)
            .unwrap()
            .value();
        let cfg = OptimizerConfig { learning_rate: lr, steps, ..Default::default() };
        let rec = optimize_seed(&sim, &u, &y_obs, &mask, &theta0, &cfg, 0, 0);
        prop_assert!(rec.d_star <= d0 + 1e-12);
    }

    #[test]
    fn boxes_contain_their_center_and_their_samples(
        center in finite_vec(3),
        ext_neg in prop::collection::vec(0.05f64..1.5, 3),
        ext_pos in prop::collection::vec(0.05f64..1.5, 3),
        gram_seed in 0u64..500,
    ) {
        // random orthonormal frame from the eigenvectors of a random Gram matrix
        let mut rng = substream(gram_seed, StreamKind::Oracle, 3, 0);
        let mut j = omc::linalg::Mat::zeros(3, 3);
        for r in 0..3 {
            for c in 0..3 {
                j.set(r, c, omc::core::standard_normal(&mut rng));
            }
        }
        let (axes, _, converged) = jacobi_eigen(&j.gram());
        prop_assume!(converged);
        let b = Hyperbox::new(center.clone(), axes, ext_neg, ext_pos, false).unwrap();
        prop_assert!(box_contains(&b, &center));
        let density = 1.0 / b.volume();
        for _ in 0..5 {
            let s = sample_box(&b, &mut rng);
            prop_assert!(box_contains(&b, s.values()));
            let q = box_density(&b, s.values());
            prop_assert!((q - density).abs() <= 1e-9 * density);
        }
    }

    #[test]
    fn ess_bounded_by_count_and_scale_invariant(
        weights in prop::collection::vec(0.0f64..10.0, 1..40),
        scale in 0.1f64..100.0,
    ) {
        let ess = effective_sample_size(&weights);
        prop_assert!(ess >= 0.0);
        prop_assert!(ess <= weights.len() as f64 + 1e-9);
        let scaled: Vec<f64> = weights.iter().map(|w| w * scale).collect();
        let ess_scaled = effective_sample_size(&scaled);
        prop_assert!((ess - ess_scaled).abs() <= 1e-9 * ess.max(1.0));
    }

    #[test]
    fn epsilon_rule_fixed_roundtrips_through_config(
        eps in 1e-6f64..10.0,
        seeds in 1usize..50,
    ) {
        let mut cfg = ExperimentConfig::for_problem("mog_base", 1).unwrap();
        cfg.seeds = seeds;
        cfg.epsilon = omc::optimize::EpsilonRule::Fixed(eps);
        let text = cfg.to_json();
        let back: ExperimentConfig = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(cfg, back);
    }
}
