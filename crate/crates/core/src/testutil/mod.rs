//! Test-only numerical oracles, independent of the library code paths.

pub mod quad;
