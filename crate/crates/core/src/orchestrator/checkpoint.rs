//! On-disk checkpoints: one state file per model, the run store, and a
//! manifest of SHA-256 digests written last.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::error::OrchestratorError;

pub const CHECKPOINT_VERSION: u32 = 1;
const MODEL_HEADER: &str = "molforge-checkpoint";
pub const MANIFEST: &str = "manifest.json";
pub const STORE: &str = "store.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelEntry {
    pub id: String,
    pub kind: String,
    pub file: String,
    pub disabled: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: u32,
    pub epochs_completed: u32,
    pub seed: u64,
    pub config_sha256: String,
    pub models: Vec<ModelEntry>,
    /// File name to SHA-256 of its bytes.
    pub files: BTreeMap<String, String>,
    /// Seed of each model's stream for the next epoch.
    pub rng_streams: BTreeMap<String, u64>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Seed for `(master, label, epoch)`: the first 8 bytes of
/// `sha256(master_le || label || 0 || epoch_le)`.
pub fn derive_seed(master: u64, label: &str, epoch: u32) -> u64 {
    let mut h = Sha256::new();
    h.update(master.to_le_bytes());
    h.update(label.as_bytes());
    h.update([0u8]);
    h.update(epoch.to_le_bytes());
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().expect("digest is 32 bytes"))
}

pub fn model_file(id: &str) -> String {
    format!("model-{id}.ckpt")
}

pub fn encode_model(kind: &str, id: &str, payload: &str) -> String {
    format!("{MODEL_HEADER} {CHECKPOINT_VERSION}\nkind {kind}\nid {id}\n{payload}")
}

/// Splits a model file into `(kind, id, payload)`.
pub fn decode_model(text: &str) -> Result<(&str, &str, &str), OrchestratorError> {
    let bad = |m: &str| OrchestratorError::Checkpoint(format!("model file: {m}"));
    let mut parts = text.splitn(4, '\n');
    let header = parts.next().ok_or_else(|| bad("empty"))?;
    let version = header.strip_prefix(MODEL_HEADER).map(str::trim).ok_or_else(|| bad("missing header"))?;
    if version != CHECKPOINT_VERSION.to_string() {
        return Err(bad(&format!("unsupported version {version}")));
    }
    let kind = parts.next().and_then(|l| l.strip_prefix("kind ")).ok_or_else(|| bad("missing kind"))?;
    let id = parts.next().and_then(|l| l.strip_prefix("id ")).ok_or_else(|| bad("missing id"))?;
    let payload = parts.next().ok_or_else(|| bad("truncated"))?;
    Ok((kind, id, payload))
}

/// Writes through a temporary file and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), OrchestratorError> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes).map_err(|e| OrchestratorError::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| OrchestratorError::io(path, e))
}

/// Writes `files` then the manifest listing their digests.
pub fn write_checkpoint(dir: &Path, files: &[(String, String)], mut manifest: Manifest) -> Result<Manifest, OrchestratorError> {
    fs::create_dir_all(dir).map_err(|e| OrchestratorError::io(dir, e))?;
    manifest.files.clear();
    for (name, text) in files {
        write_atomic(&dir.join(name), text.as_bytes())?;
        manifest.files.insert(name.clone(), sha256_hex(text.as_bytes()));
    }
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    write_atomic(&dir.join(MANIFEST), json.as_bytes())?;
    Ok(manifest)
}

/// Reads the manifest and every listed file, checking version and digests.
pub fn read_checkpoint(dir: &Path) -> Result<(Manifest, BTreeMap<String, String>), OrchestratorError> {
    let path = dir.join(MANIFEST);
    let text = fs::read_to_string(&path).map_err(|e| OrchestratorError::io(&path, e))?;
    let manifest: Manifest =
        serde_json::from_str(&text).map_err(|e| OrchestratorError::Checkpoint(format!("integrity: unreadable manifest: {e}")))?;
    if manifest.version != CHECKPOINT_VERSION {
        return Err(OrchestratorError::Checkpoint(format!(
            "version mismatch: found {}, expected {CHECKPOINT_VERSION}",
            manifest.version
        )));
    }
    let mut files = BTreeMap::new();
    for (name, digest) in &manifest.files {
        let p = dir.join(name);
        let body = fs::read_to_string(&p).map_err(|e| OrchestratorError::io(&p, e))?;
        if &sha256_hex(body.as_bytes()) != digest {
            return Err(OrchestratorError::Checkpoint(format!("integrity: digest mismatch for {name}")));
        }
        files.insert(name.clone(), body);
    }
    if !files.contains_key(STORE) {
        return Err(OrchestratorError::Checkpoint(format!("integrity: {STORE} missing from manifest")));
    }
    for m in &manifest.models {
        if !files.contains_key(&m.file) {
            return Err(OrchestratorError::Checkpoint(format!("integrity: {} missing from manifest", m.file)));
        }
    }
    Ok((manifest, files))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn manifest() -> Manifest {
        Manifest {
            version: CHECKPOINT_VERSION,
            epochs_completed: 3,
            seed: 9,
            config_sha256: sha256_hex(b"{}"),
            models: vec![ModelEntry { id: "m".into(), kind: "ga".into(), file: model_file("m"), disabled: false }],
            files: BTreeMap::new(),
            rng_streams: BTreeMap::new(),
        }
    }

    #[test]
    fn model_file_round_trip() {
        let text = encode_model("ngram", "lm6", "{\"a\":\n1}");
        assert_eq!(decode_model(&text).unwrap(), ("ngram", "lm6", "{\"a\":\n1}"));
        assert!(decode_model("molforge-checkpoint 2\nkind x\nid y\n{}").is_err());
        assert!(decode_model("molforge-checkpoint 1\nkind x").is_err());
    }

    #[test]
    fn seeds_depend_on_every_part() {
        let s = derive_seed(1, "a", 1);
        assert_eq!(s, derive_seed(1, "a", 1));
        assert_ne!(s, derive_seed(2, "a", 1));
        assert_ne!(s, derive_seed(1, "b", 1));
        assert_ne!(s, derive_seed(1, "a", 2));
    }

    #[test]
    fn write_read_and_detect_corruption() {
        let dir = tempfile::tempdir().unwrap();
        let files = vec![(STORE.to_string(), "{}".to_string()), (model_file("m"), encode_model("ga", "m", "[]"))];
        let m = write_checkpoint(dir.path(), &files, manifest()).unwrap();
        let (back, read) = read_checkpoint(dir.path()).unwrap();
        assert_eq!(back, m);
        assert_eq!(read[STORE], "{}");

        fs::write(dir.path().join(model_file("m")), "tampered").unwrap();
        let err = read_checkpoint(dir.path()).unwrap_err().to_string();
        assert!(err.contains("integrity"), "{err}");

        fs::write(dir.path().join(MANIFEST), "{\"version\": 1, \"epochs").unwrap();
        assert!(read_checkpoint(dir.path()).unwrap_err().to_string().contains("integrity"));

        let mut old = m.clone();
        old.version = 0;
        fs::write(dir.path().join(MANIFEST), serde_json::to_string(&old).unwrap()).unwrap();
        assert!(read_checkpoint(dir.path()).unwrap_err().to_string().contains("version"));
    }
}
