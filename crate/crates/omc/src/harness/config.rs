//! Experiment configuration: JSON-serializable, with per-problem defaults
//! and CLI overrides layered on top.

use crate::error::{Error, Result};
use crate::optimize::{EpsilonRule, OptimizerConfig};
use crate::regions::LineSearchParams;
use crate::sensitivity;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Sensitivity-stage settings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaskConfig {
    pub n_theta: usize,
    pub n_noise: usize,
    pub threshold: f64,
}

impl Default for MaskConfig {
    fn default() -> Self {
        Self {
            n_theta: sensitivity::DEFAULT_SENSITIVITY_SAMPLES,
            n_noise: sensitivity::DEFAULT_SENSITIVITY_SAMPLES,
            threshold: sensitivity::DEFAULT_THRESHOLD,
        }
    }
}

/// Candidate and final sample counts.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplingConfig {
    pub candidates: usize,
    pub final_samples: usize,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        Self { candidates: 2000, final_samples: 1000 }
    }
}

/// Full configuration of one inference run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub problem: String,
    pub dim: usize,
    pub seeds: usize,
    pub pcg_to_keep: f64,
    pub mask: MaskConfig,
    pub optimizer: OptimizerConfig,
    pub line_search: LineSearchParams,
    /// ε used to build the hyperboxes.
    pub epsilon: EpsilonRule,
    /// ε used in the weighting indicators; defaults to the region rule.
    pub weight_epsilon: Option<EpsilonRule>,
    pub sampling: SamplingConfig,
    pub repetitions: usize,
    pub master_seed: u64,
}

impl ExperimentConfig {
    /// Problem-family defaults. The optimizer and ε settings vary per
    /// problem within the method's documented ranges: enough Adam steps for
    /// the distance minima to actually be reached, and an ε matched to each
    /// problem's output noise scale so acceptance regions neither collapse
    /// nor swallow the prior.
    pub fn for_problem(problem: &str, dim: usize) -> Result<Self> {
        let mut cfg = Self {
            problem: problem.to_string(),
            dim,
            seeds: 1000,
            pcg_to_keep: 1.0,
            mask: MaskConfig::default(),
            optimizer: OptimizerConfig::default(),
            line_search: LineSearchParams::default(),
            epsilon: EpsilonRule::TwiceWorstAccepted,
            weight_epsilon: None,
            sampling: SamplingConfig::default(),
            repetitions: 5,
            master_seed: 0,
        };
        match problem {
            "mog_base" | "mog_base_dist" | "mog_two" | "mog_two_dist" => {
                cfg.optimizer.learning_rate = 0.05;
                cfg.optimizer.steps = 400;
                cfg.epsilon = EpsilonRule::Fixed(0.1);
                cfg.sampling.candidates = 2000.max(2000 * dim);
            }
            "slcp" | "slcp_dist" => {
                cfg.dim = 5;
                cfg.optimizer.learning_rate = 0.05;
                cfg.optimizer.steps = 400;
                cfg.epsilon = EpsilonRule::Fixed(0.1);
                cfg.sampling.candidates = 100_000;
            }
            "two_moons" => {
                cfg.dim = 2;
                cfg.optimizer.learning_rate = 0.01;
                cfg.optimizer.steps = 400;
                cfg.epsilon = EpsilonRule::Fixed(crate::simulators::two_moons::ABC_EPSILON);
                cfg.sampling.candidates = 20_000;
            }
            "img_pixel" => {
                cfg.dim = crate::simulators::image::IMAGE_DIM;
                cfg.seeds = 100;
                cfg.optimizer.learning_rate = 0.02;
                cfg.optimizer.steps = 200;
                cfg.epsilon = EpsilonRule::Fixed(1e-3);
                cfg.sampling.candidates = 2000;
            }
            "img_checker" => {
                cfg.dim = crate::simulators::image::IMAGE_DIM;
                cfg.seeds = 100;
                cfg.optimizer.learning_rate = 0.1;
                cfg.optimizer.steps = 400;
                cfg.epsilon = EpsilonRule::Fixed(1e-4);
                cfg.weight_epsilon = Some(EpsilonRule::Fixed(0.2));
                // fine short walk: tr(AᵀA) ≈ 7·10³ means per-axis jitter s
                // costs ≈ 2350·s² in output distance, so box extents must
                // stay a few thousandths for candidates to clear the
                // weighting indicators; near-null directions cap at the
                // walk length instead of the ε crossing
                cfg.line_search = LineSearchParams { step: 0.004, max_steps: 10, refinements: 1 };
                cfg.sampling.candidates = 20_000;
            }
            other => {
                return Err(Error::Config(format!("unknown problem id '{other}'")));
            }
        }
        Ok(cfg)
    }

    /// The ε rule governing the weighting indicators.
    pub fn weighting_rule(&self) -> EpsilonRule {
        self.weight_epsilon.unwrap_or(self.epsilon)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.pcg_to_keep > 0.0 && self.pcg_to_keep <= 1.0) {
            return Err(Error::Config("pcg_to_keep must lie in (0, 1]".into()));
        }
        if self.seeds < 1 {
            return Err(Error::Config("seeds must be at least 1".into()));
        }
        if self.sampling.final_samples < 1
            || self.sampling.candidates < self.sampling.final_samples
        {
            return Err(Error::Config(
                "need candidates >= final_samples >= 1".into(),
            ));
        }
        if self.repetitions < 1 {
            return Err(Error::Config("repetitions must be at least 1".into()));
        }
        if self.mask.n_theta < 1 || self.mask.n_noise < 1 {
            return Err(Error::Config("mask sample counts must be at least 1".into()));
        }
        if self.mask.threshold < 0.0 {
            return Err(Error::Config("mask threshold must be nonnegative".into()));
        }
        self.optimizer.validate()?;
        self.line_search.validate()?;
        self.epsilon.validate()?;
        if let Some(w) = &self.weight_epsilon {
            w.validate()?;
        }
        Ok(())
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: Self = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("cannot parse config JSON: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

/// Flag-style overrides applied on top of a base config (file or defaults).
#[derive(Clone, Debug, Default)]
pub struct ConfigOverrides {
    pub problem: Option<String>,
    pub dim: Option<usize>,
    pub seeds: Option<usize>,
    pub pcg: Option<f64>,
    /// "auto" selects the twice-worst rule; a number fixes ε.
    pub epsilon: Option<String>,
    pub candidates: Option<usize>,
    pub final_samples: Option<usize>,
    pub reps: Option<usize>,
    pub master_seed: Option<u64>,
}

impl ConfigOverrides {
    pub fn apply(&self, mut cfg: ExperimentConfig) -> Result<ExperimentConfig> {
        if let Some(p) = &self.problem {
            cfg.problem = p.clone();
        }
        if let Some(d) = self.dim {
            cfg.dim = d;
        }
        if let Some(s) = self.seeds {
            cfg.seeds = s;
        }
        if let Some(p) = self.pcg {
            cfg.pcg_to_keep = p;
        }
        if let Some(e) = &self.epsilon {
            cfg.epsilon = parse_epsilon(e)?;
        }
        if let Some(c) = self.candidates {
            cfg.sampling.candidates = c;
        }
        if let Some(m) = self.final_samples {
            cfg.sampling.final_samples = m;
        }
        if let Some(r) = self.reps {
            cfg.repetitions = r;
        }
        if let Some(s) = self.master_seed {
            cfg.master_seed = s;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

pub fn parse_epsilon(text: &str) -> Result<EpsilonRule> {
    if text == "auto" {
        return Ok(EpsilonRule::TwiceWorstAccepted);
    }
    let v: f64 = text
        .parse()
        .map_err(|_| Error::Config(format!("epsilon must be a number or 'auto', got '{text}'")))?;
    let rule = EpsilonRule::Fixed(v);
    rule.validate()?;
    Ok(rule)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate_for_every_problem() {
        for id in crate::simulators::PROBLEM_IDS {
            let cfg = ExperimentConfig::for_problem(id, 2).unwrap();
            cfg.validate().unwrap();
        }
    }

    #[test]
    fn json_roundtrip() {
        let cfg = ExperimentConfig::for_problem("mog_two", 2).unwrap();
        let text = cfg.to_json();
        let back: ExperimentConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn overrides_apply_and_validate() {
        let cfg = ExperimentConfig::for_problem("mog_base", 2).unwrap();
        let over = ConfigOverrides {
            seeds: Some(77),
            epsilon: Some("0.5".into()),
            ..Default::default()
        };
        let out = over.apply(cfg).unwrap();
        assert_eq!(out.seeds, 77);
        assert_eq!(out.epsilon, EpsilonRule::Fixed(0.5));

        let bad = ConfigOverrides { pcg: Some(1.5), ..Default::default() };
        assert!(bad.apply(ExperimentConfig::for_problem("mog_base", 2).unwrap()).is_err());
    }

    #[test]
    fn epsilon_parser() {
        assert_eq!(parse_epsilon("auto").unwrap(), EpsilonRule::TwiceWorstAccepted);
        assert_eq!(parse_epsilon("0.25").unwrap(), EpsilonRule::Fixed(0.25));
        assert!(parse_epsilon("-1").is_err());
        assert!(parse_epsilon("xyz").is_err());
    }
}
