//! Benchmark-only member: shared fixtures for the criterion benches.

use ascore_core::{generate_relationship, Family, GeneratedData, RelationshipSpec};

/// A reproducible bivariate Gaussian draw with true R² = 0.5.
pub fn gaussian_fixture(n: usize, seed: u64) -> GeneratedData {
    generate_relationship(&RelationshipSpec {
        family: Family::GaussianR2Half,
        n,
        noise_sigma: 0.0,
        seed,
        x_dim: 1,
    })
    .expect("fixture spec is valid")
}
