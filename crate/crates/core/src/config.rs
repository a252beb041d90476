//! Budgets and run configuration shared by the subdivision stages.

use serde::{Deserialize, Serialize};

use crate::interval::Extension;

/// Caps that turn the semi-algorithms into terminating procedures.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    /// Maximum number of halvings of the initial box along any path.
    pub max_depth: u32,
    /// Maximum number of boxes processed.
    pub max_boxes: usize,
    /// Highest software precision the ladder may reach.
    pub max_precision_bits: u32,
    /// Maximum contraction rounds in a refinement loop.
    pub max_iterations: u32,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { max_depth: 40, max_boxes: 1_000_000, max_precision_bits: 256, max_iterations: 200 }
    }
}

/// Which curve the pair defines: a general resultant, or a discriminant
/// with `Q = P_z`, where cusps can be recognized.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveMode {
    #[default]
    Resultant,
    Discriminant,
}

/// Settings for the isolation and topology stages.
#[derive(Clone, Debug, PartialEq)]
pub struct EngineConfig {
    pub budget: Budget,
    /// Relative ε-inflation applied before each Krawczyk acceptance test.
    pub inflation: f64,
    pub extension: Extension,
    /// Worker threads; `None` uses the global pool.
    pub jobs: Option<usize>,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig { budget: Budget::default(), inflation: 1e-2, extension: Extension::Centered, jobs: None }
    }
}

/// Runs `f` on a pool with `jobs` threads, or on the global pool.
pub fn with_jobs<R: Send>(jobs: Option<usize>, f: impl FnOnce() -> R + Send) -> R {
    match jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .expect("thread pool")
            .install(f),
        None => f(),
    }
}
