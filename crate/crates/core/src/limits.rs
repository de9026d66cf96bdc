use std::env;

/// Resource caps shared by every pipeline stage. Exceeding one is a hard error.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Limits {
    /// Upper bound on materialized cells: glued vertices, chart items, words.
    pub max_cells: usize,
    pub max_configs_per_type: usize,
    pub max_unfold_depth: usize,
    /// Consecutive unchanged depth increments required before a ball is accepted.
    pub stable_increments: usize,
    pub max_sweeps: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_cells: 20_000_000,
            max_configs_per_type: 1_000_000,
            max_unfold_depth: 512,
            stable_increments: 2,
            max_sweeps: 100_000,
        }
    }
}

impl Limits {
    pub const CELLS_VAR: &'static str = "SAWLAB_MAX_CELLS";

    /// Defaults, with `max_cells` taken from `SAWLAB_MAX_CELLS` when set.
    pub fn from_env() -> Self {
        let mut limits = Limits::default();
        if let Some(n) = env::var(Self::CELLS_VAR)
            .ok()
            .and_then(|v| v.trim().parse().ok())
        {
            limits.max_cells = n;
        }
        limits
    }
}
