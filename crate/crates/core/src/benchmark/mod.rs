//! MOSES-style benchmarking of generated sets against reference and
//! training sets.

pub mod error;
pub mod exact;
pub mod frechet;
pub mod metrics;
pub mod report;

pub use error::BenchmarkError;
pub use exact::{exact_sum, ExactSum};
pub use frechet::{frechet_descriptor_distance, frechet_distance, gaussian_fit};
pub use metrics::{
    cosine_counts, frag_scaf_similarity, internal_diversity, internal_diversity_brute, internal_diversity_fps, novelty_fraction,
    parse_batch, snn, snn_fps, uniqueness_at, validity, FragScaf, Parsed,
};
pub use report::{benchmark_report, BenchmarkContext, BenchmarkReport, BenchmarkTable};
