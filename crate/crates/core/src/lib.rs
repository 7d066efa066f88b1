//! Loading schedules, exact exponent linear programs, concentration checks,
//! walk simulations and associativity certificates for nested quantum walks
//! that find constant-size sub-hypergraphs.

pub mod assoc;
pub mod cli_io;
pub mod complexity;
pub mod lp;
pub mod oracle;
pub mod pattern;
pub mod rational;
pub mod schedule_enum;
pub mod stats;
pub mod walk_sim;

/// Seed used by every randomized routine when none is supplied.
pub const DEFAULT_SEED: u64 = 0x5eed_2024;

/// Seed from `HYPERWALK_SEED` when set and parseable, otherwise [`DEFAULT_SEED`].
pub fn seed_from_env() -> u64 {
    std::env::var("HYPERWALK_SEED")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_SEED)
}
