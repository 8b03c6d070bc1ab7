//! Fixtures shared by the benchmarks.

use conic_embed::generator::{generate_instance, GeneratedInstance};
use conic_embed::ConePartitionLabel;

/// `r` cones of dimension `n`, alternating interior and boundary labels so
/// both map families get exercised.
pub fn fixture(r: usize, n: usize, m: usize, seed: u64) -> GeneratedInstance {
    let labels: Vec<ConePartitionLabel> = (0..r)
        .map(|i| if i % 2 == 0 { ConePartitionLabel::B } else { ConePartitionLabel::R })
        .collect();
    generate_instance(&vec![n; r], &labels, m, seed).expect("benchmark fixture")
}
