use alloc::collections::BTreeMap;
use alloc::string::String;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::forms::FormKind;

/// Difficulty band by number of valid derivation paths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tier {
    Small,
    Medium,
    Large,
}

impl Tier {
    pub const ALL: [Tier; 3] = [Tier::Small, Tier::Medium, Tier::Large];

    /// Inclusive solution-count band; `large_max` caps the open-ended tier.
    pub fn band(self, large_max: u32) -> (u32, u32) {
        match self {
            Tier::Small => (2, 4),
            Tier::Medium => (5, 7),
            Tier::Large => (8, large_max),
        }
    }

    pub fn for_count(n: usize, large_max: u32) -> Option<Tier> {
        Tier::ALL.into_iter().find(|t| {
            let (lo, hi) = t.band(large_max);
            (lo as usize..=hi as usize).contains(&n)
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Tier::Small => "small",
            Tier::Medium => "medium",
            Tier::Large => "large",
        }
    }
}

impl fmt::Display for Tier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl core::str::FromStr for Tier {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Tier::ALL
            .into_iter()
            .find(|t| t.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| alloc::format!("unknown tier `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DepthRange {
    pub min: u32,
    pub max: u32,
}

impl DepthRange {
    pub const fn new(min: u32, max: u32) -> Self {
        Self { min, max }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenerationConfig {
    pub seed: u64,
    /// Length of the initial backward chain.
    pub depth_range: DepthRange,
    /// Length of each sub-chain grown by a branch.
    pub branch_depth_range: DepthRange,
    pub tier: Tier,
    pub large_max: u32,
    pub form_weights: BTreeMap<FormKind, u32>,
    pub max_branch_attempts: u32,
    pub max_instance_attempts: u32,
    pub share_probability: f64,
    /// Branches that push the reuse ratio above this are retried.
    pub max_reuse_ratio: f64,
    /// DAGs with at most this many premises are cross-checked against
    /// minimal-support enumeration after every branch.
    pub oracle_premise_limit: usize,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            depth_range: DepthRange::new(5, 8),
            branch_depth_range: DepthRange::new(1, 5),
            tier: Tier::Small,
            large_max: 19,
            form_weights: FormKind::ALL
                .into_iter()
                .map(|k| (k, if k == FormKind::ModusPonens { 3 } else { 1 }))
                .collect(),
            max_branch_attempts: 8,
            max_instance_attempts: 64,
            share_probability: 0.15,
            max_reuse_ratio: 1.9,
            oracle_premise_limit: 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConfigError {
    #[error("depth ranges need 1 <= min <= max")]
    DepthRange,
    #[error("form weights leave no form applicable to an atomic node (MP, DS or DE)")]
    Weights,
    #[error("share_probability must lie in [0, 1]")]
    Probability,
    #[error("large_max must be at least 8")]
    LargeMax,
}

impl GenerationConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        for r in [self.depth_range, self.branch_depth_range] {
            if r.min < 1 || r.min > r.max {
                return Err(ConfigError::DepthRange);
            }
        }
        let always = [
            FormKind::ModusPonens,
            FormKind::DisjunctiveSyllogism,
            FormKind::DisjunctionElimination,
        ];
        if always.iter().all(|&k| self.weight(k) == 0) {
            return Err(ConfigError::Weights);
        }
        if !(0.0..=1.0).contains(&self.share_probability) {
            return Err(ConfigError::Probability);
        }
        if self.large_max < 8 {
            return Err(ConfigError::LargeMax);
        }
        Ok(())
    }

    pub fn band(&self) -> (u32, u32) {
        self.tier.band(self.large_max)
    }

    pub fn weight(&self, k: FormKind) -> u32 {
        self.form_weights.get(&k).copied().unwrap_or(0)
    }
}
