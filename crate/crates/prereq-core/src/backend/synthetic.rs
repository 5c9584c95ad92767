//! Seeded synthetic capability oracle.
//!
//! Each model slot gets a [`CapabilityProfile`] describing how its success
//! probability decays as node complexity grows. Answers are drawn from a
//! per-model seeded RNG, so identical seeds and query order reproduce the
//! exact same answer stream — which is what makes threshold sweeps
//! comparable across configurations.

use std::collections::BTreeMap;
use std::sync::Mutex;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::backend::{
    render_mcq_prompt, BackendError, ModelSpec, QueryBackend, QueryContext, QueryRecord,
};
use crate::graph::McqTask;

/// Success model for one synthetic cascade slot.
///
/// The probability of answering a node correctly is
/// `clamp(base_success_prob * per_extra_tag_decay^extra_tags, 0, 1)` where
/// `extra_tags` counts the node's tags beyond its tree root's tag count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapabilityProfile {
    pub base_success_prob: f64,
    pub per_extra_tag_decay: f64,
    pub rng_seed: u64,
}

impl CapabilityProfile {
    pub fn new(base_success_prob: f64, per_extra_tag_decay: f64, rng_seed: u64) -> Self {
        CapabilityProfile {
            base_success_prob,
            per_extra_tag_decay,
            rng_seed,
        }
    }

    pub fn check(&self) -> Result<(), BackendError> {
        for (name, p) in [
            ("base_success_prob", self.base_success_prob),
            ("per_extra_tag_decay", self.per_extra_tag_decay),
        ] {
            if !(0.0..=1.0).contains(&p) || !p.is_finite() {
                return Err(BackendError::InvalidSpec {
                    message: format!("{name} {p} outside [0, 1]"),
                });
            }
        }
        Ok(())
    }

    pub fn success_probability(&self, extra_tags: usize) -> f64 {
        let p = self.base_success_prob * self.per_extra_tag_decay.powi(extra_tags as i32);
        p.clamp(0.0, 1.0)
    }
}

/// Draws one answer: the correct index with the profile's success
/// probability, otherwise a uniformly chosen wrong option.
pub fn synthetic_answer(
    profile: &CapabilityProfile,
    task: &McqTask,
    extra_tags: usize,
    rng: &mut ChaCha8Rng,
) -> u8 {
    let p = profile.success_probability(extra_tags);
    if rng.gen::<f64>() < p {
        return task.correct_idx;
    }
    let wrong_slot = rng.gen_range(0..3u8);
    // Skip over the correct index among the four options.
    if wrong_slot >= task.correct_idx {
        wrong_slot + 1
    } else {
        wrong_slot
    }
}

/// Synthetic provider holding one profile and RNG stream per model name.
pub struct SyntheticOracle {
    profiles: BTreeMap<String, CapabilityProfile>,
    rngs: Mutex<BTreeMap<String, ChaCha8Rng>>,
}

impl SyntheticOracle {
    pub fn new(profiles: BTreeMap<String, CapabilityProfile>) -> Result<Self, BackendError> {
        for profile in profiles.values() {
            profile.check()?;
        }
        Ok(SyntheticOracle {
            profiles,
            rngs: Mutex::new(BTreeMap::new()),
        })
    }

    pub fn single(model: &str, profile: CapabilityProfile) -> Result<Self, BackendError> {
        let mut map = BTreeMap::new();
        map.insert(model.to_string(), profile);
        SyntheticOracle::new(map)
    }
}

impl QueryBackend for SyntheticOracle {
    fn query_mcq(
        &self,
        spec: &ModelSpec,
        task: &McqTask,
        ctx: &QueryContext,
    ) -> Result<QueryRecord, BackendError> {
        let profile = self
            .profiles
            .get(&spec.name)
            .ok_or_else(|| BackendError::UnknownModel {
                model: spec.name.clone(),
            })?;
        let mut rngs = self.rngs.lock().expect("rng table");
        let rng = rngs
            .entry(spec.name.clone())
            .or_insert_with(|| ChaCha8Rng::seed_from_u64(profile.rng_seed));
        let idx = synthetic_answer(profile, task, ctx.extra_tag_count, rng);
        Ok(QueryRecord {
            model_name: spec.name.clone(),
            node_id: task.node_id.to_string(),
            prompt_text: render_mcq_prompt(task),
            raw_response: format!("{{\"correct_idx\": {idx}}}"),
            parsed_idx: Some(idx),
            parse_failure_reason: None,
            latency_ms: 0,
            attempt_no: ctx.attempt_no,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn task() -> McqTask {
        McqTask::new("n0", "q?", ["a", "b", "c", "d"], 2)
    }

    fn ctx() -> QueryContext {
        QueryContext {
            attempt_no: 1,
            extra_tag_count: 0,
        }
    }

    #[test]
    fn certain_profile_always_answers_correctly() {
        let oracle = SyntheticOracle::single("m", CapabilityProfile::new(1.0, 1.0, 9)).unwrap();
        let spec = ModelSpec::synthetic("m");
        for _ in 0..64 {
            let record = oracle.query_mcq(&spec, &task(), &ctx()).unwrap();
            assert_eq!(record.parsed_idx, Some(2));
        }
    }

    #[test]
    fn hopeless_profile_is_always_wrong_but_in_range() {
        let oracle = SyntheticOracle::single("m", CapabilityProfile::new(0.0, 1.0, 9)).unwrap();
        let spec = ModelSpec::synthetic("m");
        for _ in 0..64 {
            let record = oracle.query_mcq(&spec, &task(), &ctx()).unwrap();
            let idx = record.parsed_idx.unwrap();
            assert!(idx <= 3);
            assert_ne!(idx, 2);
        }
    }

    #[test]
    fn decay_applies_per_extra_tag() {
        let profile = CapabilityProfile::new(0.8, 0.5, 0);
        assert!((profile.success_probability(0) - 0.8).abs() < 1e-12);
        assert!((profile.success_probability(1) - 0.4).abs() < 1e-12);
        assert!((profile.success_probability(3) - 0.1).abs() < 1e-12);
    }

    #[test]
    fn monte_carlo_rate_matches_closed_form() {
        // 1000 root-level queries with base 0.7, decay 0.9: the decay does
        // not apply at extra_tags = 0, so the empirical rate estimates 0.7.
        let oracle = SyntheticOracle::single("m", CapabilityProfile::new(0.7, 0.9, 1234)).unwrap();
        let spec = ModelSpec::synthetic("m");
        let t = task();
        let mut hits = 0u32;
        for _ in 0..1000 {
            let record = oracle.query_mcq(&spec, &t, &ctx()).unwrap();
            if record.is_correct(t.correct_idx) {
                hits += 1;
            }
        }
        let rate = f64::from(hits) / 1000.0;
        assert!((rate - 0.7).abs() <= 0.05, "rate {rate} outside 0.7 ± 0.05");
    }

    #[test]
    fn identical_seeds_reproduce_the_answer_stream() {
        let draw = || {
            let oracle =
                SyntheticOracle::single("m", CapabilityProfile::new(0.5, 0.9, 77)).unwrap();
            let spec = ModelSpec::synthetic("m");
            (0..32)
                .map(|_| oracle.query_mcq(&spec, &task(), &ctx()).unwrap().parsed_idx)
                .collect::<Vec<_>>()
        };
        assert_eq!(draw(), draw());
    }

    #[test]
    fn out_of_range_probabilities_rejected() {
        assert!(CapabilityProfile::new(1.5, 1.0, 0).check().is_err());
        assert!(CapabilityProfile::new(0.5, -0.1, 0).check().is_err());
    }
}
