//! On-disk layout `corpus/<lang>/<sha256(url)>.pdf`.

use std::io;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

pub fn sha256_hex(data: &[u8]) -> String {
    hex::encode(Sha256::digest(data))
}

pub fn corpus_path(root: &Path, lang: &str, url: &str) -> PathBuf {
    root.join("corpus").join(lang).join(format!("{}.pdf", sha256_hex(url.as_bytes())))
}

/// Writes via a temporary file and rename so readers never see a partial file.
pub fn write_atomic(path: &Path, data: &[u8]) -> io::Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    std::fs::write(&tmp, data)?;
    std::fs::rename(&tmp, path)
}
