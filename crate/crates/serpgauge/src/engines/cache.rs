//! Append-only on-disk store of result pages and fetched documents.
//!
//! ```text
//! <root>/serp/<engine_id>/<query_id>.json
//! <root>/pages/<sha256 of normalized url>.bin
//! <root>/pages/<sha256 of normalized url>.meta.json
//! ```
//!
//! Every file is written once through a temporary file and a no-clobber
//! link, so concurrent writers race safely and readers never see partial
//! content. A page's sidecar is written after its body and marks the entry
//! as complete.

use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serpgauge_core::serp::Serp;
use serpgauge_core::url::normalize_url;
use sha2::{Digest, Sha256};
use tempfile::NamedTempFile;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PageMeta {
    pub requested_url: String,
    pub final_url: String,
    /// Last HTTP status seen, absent when no response arrived.
    pub status: Option<u16>,
    pub retrieved_at: String,
    /// Set when the fetch failed; the body is then empty.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CachedPage {
    pub meta: PageMeta,
    pub body: Vec<u8>,
}

/// Whether a write created the entry or found it already present.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WriteOutcome {
    Created,
    Existing,
}

#[derive(Debug, Clone)]
pub struct Cache {
    root: PathBuf,
}

/// Content address of a URL: hex SHA-256 of its canonical form, or of the
/// raw string when it does not parse.
pub fn page_key(url: &str) -> String {
    let canonical = normalize_url(url).unwrap_or_else(|_| url.to_string());
    hex::encode(Sha256::digest(canonical.as_bytes()))
}

/// Pretty JSON with a trailing newline, in struct field order.
pub fn to_stable_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("in-memory serialization");
    bytes.push(b'\n');
    bytes
}

fn write_once(path: &Path, bytes: &[u8]) -> io::Result<WriteOutcome> {
    let dir = path.parent().expect("cache paths have a parent");
    std::fs::create_dir_all(dir)?;
    if path.exists() {
        return Ok(WriteOutcome::Existing);
    }
    let mut tmp = NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    match tmp.persist_noclobber(path) {
        Ok(_) => Ok(WriteOutcome::Created),
        Err(e) if e.error.kind() == io::ErrorKind::AlreadyExists => Ok(WriteOutcome::Existing),
        Err(e) => Err(e.error),
    }
}

fn read_optional(path: &Path) -> io::Result<Option<Vec<u8>>> {
    match std::fs::read(path) {
        Ok(b) => Ok(Some(b)),
        Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(e),
    }
}

fn invalid(path: &Path, e: serde_json::Error) -> io::Error {
    io::Error::new(
        io::ErrorKind::InvalidData,
        format!("{}: {e}", path.display()),
    )
}

impl Cache {
    pub fn new(root: impl Into<PathBuf>) -> Cache {
        Cache { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn serp_path(&self, engine_id: &str, query_id: &str) -> PathBuf {
        self.root
            .join("serp")
            .join(engine_id)
            .join(format!("{query_id}.json"))
    }

    pub fn page_paths(&self, url: &str) -> (PathBuf, PathBuf) {
        let key = page_key(url);
        let dir = self.root.join("pages");
        (
            dir.join(format!("{key}.bin")),
            dir.join(format!("{key}.meta.json")),
        )
    }

    pub fn has_serp(&self, engine_id: &str, query_id: &str) -> bool {
        self.serp_path(engine_id, query_id).is_file()
    }

    pub fn read_serp(&self, engine_id: &str, query_id: &str) -> io::Result<Option<Serp>> {
        let path = self.serp_path(engine_id, query_id);
        read_optional(&path)?
            .map(|b| serde_json::from_slice(&b).map_err(|e| invalid(&path, e)))
            .transpose()
    }

    pub fn write_serp(&self, serp: &Serp) -> io::Result<WriteOutcome> {
        write_once(
            &self.serp_path(&serp.engine_id, &serp.query_id),
            &to_stable_json(serp),
        )
    }

    pub fn has_page(&self, url: &str) -> bool {
        self.page_paths(url).1.is_file()
    }

    pub fn read_page(&self, url: &str) -> io::Result<Option<CachedPage>> {
        let (bin, meta_path) = self.page_paths(url);
        let Some(meta) = read_optional(&meta_path)? else {
            return Ok(None);
        };
        let meta: PageMeta = serde_json::from_slice(&meta).map_err(|e| invalid(&meta_path, e))?;
        let body = std::fs::read(&bin)?;
        Ok(Some(CachedPage { meta, body }))
    }

    pub fn write_page(&self, meta: &PageMeta, body: &[u8]) -> io::Result<WriteOutcome> {
        let (bin, meta_path) = self.page_paths(&meta.requested_url);
        if meta_path.exists() {
            return Ok(WriteOutcome::Existing);
        }
        write_once(&bin, body)?;
        write_once(&meta_path, &to_stable_json(meta))
    }
}
