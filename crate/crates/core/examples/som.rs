//! Self-organizing map over descriptor vectors: train on two labelled
//! classes, classify held-out molecules and refine weak neurons with ZOOM maps.
//!
//!     cargo run --release --example som

use molforge::data;
use molforge::molgraph::{descriptors, mol_from_smiles};
use molforge::scoring::{som_classify, som_train, zoom_refine, Scaler, SomConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    // label: aromatic vs. non-aromatic, a property the map has to discover from descriptors
    let mut vectors = Vec::new();
    let mut labels = Vec::new();
    for (_, line) in data::lines(data::embedded(data::CORPUS).unwrap()) {
        let Ok(m) = mol_from_smiles(line.split_whitespace().next().unwrap()) else { continue };
        let d = descriptors(&m).unwrap();
        labels.push(if d.aromatic_rings > 0 { "aromatic" } else { "aliphatic" }.to_string());
        vectors.push(d.to_vec());
    }
    let scaler = Scaler::fit(&vectors).unwrap();
    let scaled: Vec<Vec<f64>> = vectors.iter().map(|v| scaler.apply(v)).collect();
    let split = scaled.len() * 4 / 5;

    let cfg = SomConfig { width: 12, height: 12, epochs: 10, ..SomConfig::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let grid = som_train(&scaled[..split], &labels[..split], &cfg, &mut rng).unwrap();
    let accuracy = |g: &_| {
        let hits = (split..scaled.len()).filter(|&i| som_classify(g, &scaled[i]).unwrap().label.as_deref() == Some(&labels[i])).count();
        hits as f64 / (scaled.len() - split) as f64
    };
    println!("quantization error {:.3}", grid.quantization_error(&scaled[..split]));
    println!("held-out accuracy {:.3}", accuracy(&grid));

    let zoomed = zoom_refine(&grid, &scaled[..split], &labels[..split], 0.9, &cfg, &mut rng).unwrap();
    println!("held-out accuracy with zoom {:.3}", accuracy(&zoomed));
    let c = som_classify(&zoomed, &scaled[split]).unwrap();
    println!("first held-out molecule: {:?} (confidence {:.2}, depth {})", c.label, c.confidence, c.depth);
}
