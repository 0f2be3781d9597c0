//! IO companion for the rounding engine: JSON instance/report formats,
//! seeded random instance generation, brute-force oracles, and the selftest
//! harness behind the `matround` binary.

pub mod brute;
pub mod gen;
pub mod report;
pub mod schema;
pub mod selftest;

pub use matround_core as core;

/// Separation cap resolution: explicit flag, then the `MATROUND_SEP_CAP`
/// environment variable, then the library default.
pub fn resolve_sep_cap(flag: Option<usize>) -> usize {
    flag.or_else(|| {
        std::env::var("MATROUND_SEP_CAP").ok().and_then(|v| v.parse().ok())
    })
    .unwrap_or(matround_core::separation::DEFAULT_SEP_CAP)
}
