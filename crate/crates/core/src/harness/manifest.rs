//! Run manifest: configuration echo, input hashes and per-experiment outcomes.

use std::fmt::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::Result;

/// SHA-256 of `blob <len>\0<bytes>`, the git object hash of a file.
pub fn blob_hash(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", bytes.len()).as_bytes());
    h.update(bytes);
    hex::encode(h.finalize())
}

pub fn file_hash(path: &Path) -> Result<String> {
    Ok(blob_hash(&std::fs::read(path)?))
}

#[derive(Debug, Clone, Default)]
pub struct Manifest {
    pub lines: Vec<(String, String)>,
}

impl Manifest {
    pub fn push(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.lines.push((key.into(), value.into()));
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.lines {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_git_object_hash() {
        // `git hash-object --object-format=sha256` of an empty file
        assert_eq!(
            blob_hash(b""),
            "473a0f4c3be8a93681a267e3b1e9a7dcda1185436fe141f7749120a303721813"
        );
    }
}
