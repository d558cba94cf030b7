//! Instance generator, check runner, and sweep driver around `ncjn-core`.
//!
//! The pipeline is: a seeded [`Instance`] (filtration descriptor, final
//! operator, parameter grids) is generated by a [`Profile`] or read from a
//! JSON file, the [`runner`] executes a selected set of check groups against
//! it, and every individual inequality or residual check lands in a
//! [`ReportRecord`]. Reports are written as CSV (with a `#`-comment header
//! and summary) or as a JSON mirror, always sorted by `(seed, check_id)` so
//! the bytes are independent of scheduling — only the trailing wall-time
//! column varies between runs.

pub mod instance;
pub mod report;
pub mod runner;
pub mod sweep;

pub use instance::{
    gen_instance, FiltrationSpec, Instance, Kind, OperatorData, Overrides, Params, Profile,
    ProjRule, Variant,
};
pub use report::{read_csv, sort_records, summarize, write_csv, write_json, ReportRecord, Status, Summary};
pub use runner::{run_instance, small_corner, CheckGroup, RunOptions, ALL_GROUPS};
pub use sweep::{run_sweep, SweepConfig};

// ─── seed mixing ──────────────────────────────────────────────────────────────

/// SplitMix64 finalizer: one deterministic, well-scrambled word per input.
pub(crate) fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Derive a sub-seed from the instance seed and a salt naming the consumer.
pub(crate) fn mix(seed: u64, salt: u64) -> u64 {
    splitmix(seed ^ splitmix(salt))
}

/// Salt built from a static tag and small indices (level, grid positions, …).
pub(crate) fn salt(tag: &str, parts: &[u64]) -> u64 {
    let mut h = 0xcbf29ce484222325u64;
    for b in tag.bytes() {
        h = (h ^ b as u64).wrapping_mul(0x100000001b3);
    }
    for &p in parts {
        h = splitmix(h ^ p);
    }
    h
}

/// `steps` evenly spaced points from 0 to `max` inclusive.
pub(crate) fn linspace(max: f64, steps: usize) -> Vec<f64> {
    assert!(steps >= 2, "grid needs at least two points");
    (0..steps).map(|i| max * i as f64 / (steps - 1) as f64).collect()
}
