//! (1+1) evolutionary algorithms minimizing linear pseudo-Boolean functions
//! whose number of relevant bits is unknown to the algorithm.
//!
//! The crate covers four mutation-rate regimes:
//!
//! * static rates ([`policies::RatePolicySpec::Constant`]),
//! * pre-committed schedules `p_t = c·α·ln(t)/t` ([`policies`]),
//! * the adaptive exponential-search estimator ([`adaptive`]),
//! * position-dependent rates for initial-segment uncertainty ([`isu`]),
//!
//! together with the numerics for the schedule constants α and β
//! ([`constants`]) and a seeded, parallel experiment harness ([`harness`]).
//!
//! Runtime is measured in fitness evaluations. The initial random point
//! costs one evaluation and every offspring costs one more.

pub mod adaptive;
pub mod constants;
pub mod engine;
pub mod error;
pub mod fitness;
pub mod harness;
pub mod isu;
pub mod policies;

pub use error::{Error, Result};

/// RNG used for every trial. ChaCha8 is portable across platforms and
/// versions, which keeps seeded results reproducible.
pub type TrialRng = rand_chacha::ChaCha8Rng;

/// Builds the trial RNG for a 64-bit seed.
pub fn trial_rng(seed: u64) -> TrialRng {
    use rand::SeedableRng;
    TrialRng::seed_from_u64(seed)
}
