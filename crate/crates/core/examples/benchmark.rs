//! Distribution-learning metrics for language-model samples of two orders
//! against the bundled corpus.
//!
//!     cargo run --release --example benchmark

use molforge::benchmark::benchmark_report;
use molforge::data;
use molforge::generators::{lm_sample, lm_train, NgramConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let corpus: Vec<String> = data::lines(data::embedded(data::CORPUS).unwrap()).map(|(_, l)| l.split_whitespace().next().unwrap().to_string()).collect();
    let (train, reference) = corpus.split_at(800);
    let mut batches = Vec::new();
    for order in [3, 6] {
        let lm = lm_train(train, NgramConfig { order, ..NgramConfig::default() }).unwrap();
        let samples = lm_sample(&lm, 500, 1.0, 120, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        batches.push((format!("lm{order}"), samples));
    }
    batches.push(("held-out".to_string(), reference.to_vec()));
    let table = benchmark_report(&batches, reference, train, None);
    print!("{}", table.to_csv());
}
