use serde::{Deserialize, Serialize};

/// Environment variable overriding [`Budget::enumeration`].
pub const BUDGET_ENV: &str = "CYCLOCODE_BUDGET";

/// Work limits for the exhaustive parts of the pipeline. Anything that would
/// exceed one of these fails with [`crate::Error::Capacity`] instead of
/// falling back to sampling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    /// Words visited by a full enumeration of `[q]^n` or a weight slice.
    pub enumeration: u64,
    /// Membership tests for ball intersection counts.
    pub membership_tests: u64,
    /// Vertices in a class graph.
    pub max_vertices: usize,
    /// Vertices accepted by the exact maximum independent set search.
    pub exact_mis_vertices: usize,
    /// Elementary distance evaluations for verification and diagnostics.
    pub work: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            enumeration: 1 << 24,
            membership_tests: 100_000_000,
            max_vertices: 50_000,
            exact_mis_vertices: 40,
            work: 20_000_000_000,
        }
    }
}

impl Budget {
    /// Default budget with `CYCLOCODE_BUDGET` applied when it parses.
    pub fn from_env() -> Self {
        let mut budget = Budget::default();
        if let Some(value) = std::env::var(BUDGET_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<u64>().ok())
        {
            budget.enumeration = value;
        }
        budget
    }

    pub fn with_enumeration(mut self, enumeration: u64) -> Self {
        self.enumeration = enumeration;
        self
    }
}
