//! Benchmark fixtures shared by the criterion targets.

use pirsd_core::bounds::PirParameters;

/// Parameter grid used by the closed-form benchmarks.
pub fn grid() -> Vec<PirParameters> {
    (3..=10)
        .flat_map(|n| (2..=10).map(move |k| PirParameters::new(n, k).expect("positive")))
        .collect()
}
