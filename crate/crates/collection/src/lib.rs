//! Download-and-cache client for the public sparse-matrix collection.
//!
//! Names are resolved to `(group, name)` through the collection's CSV index.
//! Archives are fetched from `{base}/MM/{group}/{name}.tar.gz`, the `.mtx`
//! member is extracted to `cache_dir/group/name/name.mtx` and a sidecar JSON
//! records its SHA-256 and source URL. A valid cache hit does no network I/O.

mod index;

use std::collections::HashMap;
use std::fs::{self, File};
use std::io::{self, BufReader, Read, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use flate2::read::GzDecoder;
use lpu_core::matrix_market::{read_matrix_market_path, MarketError, MatrixMetadata};
use lpu_core::SparseMatrix;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use index::{CollectionIndex, IndexEntry};

pub const DEFAULT_BASE_URL: &str = "https://sparse.tamu.edu";
pub const CACHE_DIR_ENV: &str = "LPU_CACHE_DIR";
const INDEX_PATH: &str = "files/ssstats.csv";
const INDEX_FILE: &str = "ssstats.csv";

#[derive(Debug, Error)]
pub enum CollectionError {
    #[error("matrix '{0}' not found in the collection index")]
    NotFound(String),
    #[error("matrix name '{name}' is ambiguous: {candidates:?}")]
    Ambiguous { name: String, candidates: Vec<String> },
    #[error("network failure fetching {url}: {message}")]
    Network { url: String, message: String },
    #[error("offline mode: {0} is not cached")]
    Offline(String),
    #[error("checksum mismatch for {path}: expected {expected}, found {actual}")]
    ChecksumMismatch {
        path: PathBuf,
        expected: String,
        actual: String,
    },
    #[error("archive {0} has no {1} member")]
    MissingMtx(String, String),
    #[error("malformed collection index: {0}")]
    Index(String),
    #[error("cached matrix does not parse: {0}")]
    Parse(#[from] MarketError),
    #[error("invalid matrix reference: {0}")]
    InvalidRef(String),
    #[error("io error: {0}")]
    Io(#[from] io::Error),
    #[error("sidecar: {0}")]
    Sidecar(#[from] serde_json::Error),
}

impl CollectionError {
    pub fn is_network(&self) -> bool {
        matches!(self, CollectionError::Network { .. } | CollectionError::Offline(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MatrixRef {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
}

impl MatrixRef {
    pub fn new(name: impl Into<String>, group: Option<String>) -> Result<Self, CollectionError> {
        let name = name.into();
        if name.trim().is_empty() {
            return Err(CollectionError::InvalidRef("empty name".into()));
        }
        for part in std::iter::once(name.as_str()).chain(group.as_deref()) {
            if part.contains(['/', '\\']) || part == ".." || part == "." {
                return Err(CollectionError::InvalidRef(format!("bad path component '{part}'")));
            }
        }
        Ok(Self { name, group })
    }

    /// Parses `name` or `group/name`.
    pub fn parse(spec: &str) -> Result<Self, CollectionError> {
        match spec.split_once('/') {
            Some((g, n)) => Self::new(n, Some(g.to_string())),
            None => Self::new(spec, None),
        }
    }

    pub fn is_resolved(&self) -> bool {
        self.group.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub matrix_ref: MatrixRef,
    pub local_path: PathBuf,
    /// Hex SHA-256 of the extracted `.mtx` file.
    pub checksum: String,
    /// Seconds since the Unix epoch.
    pub fetched_at: u64,
    pub source_url: String,
}

impl CacheEntry {
    pub fn load(&self) -> Result<(SparseMatrix, MatrixMetadata), CollectionError> {
        Ok(read_matrix_market_path(&self.local_path)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FetchPolicy {
    /// Use a valid cache entry; a corrupt one is an error.
    #[default]
    CacheFirst,
    /// Download even if cached (repairs corrupt entries).
    Refetch,
}

pub struct Client {
    base_url: String,
    cache_dir: PathBuf,
    offline: bool,
    agent: ureq::Agent,
    locks: Mutex<HashMap<MatrixRef, Arc<Mutex<()>>>>,
}

/// `$LPU_CACHE_DIR`, else `$XDG_CACHE_HOME/lpu-matrices`, else
/// `~/.cache/lpu-matrices`, else `./lpu-matrices`.
pub fn default_cache_dir() -> PathBuf {
    if let Some(dir) = std::env::var_os(CACHE_DIR_ENV) {
        return dir.into();
    }
    if let Some(dir) = std::env::var_os("XDG_CACHE_HOME") {
        return PathBuf::from(dir).join("lpu-matrices");
    }
    if let Some(home) = std::env::var_os("HOME") {
        return PathBuf::from(home).join(".cache").join("lpu-matrices");
    }
    PathBuf::from("lpu-matrices")
}

fn sha256_file(path: &Path) -> Result<String, io::Error> {
    let mut file = File::open(path)?;
    let mut hasher = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = file.read(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex::encode(hasher.finalize()))
}

fn now_secs() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

impl Client {
    pub fn new(cache_dir: impl Into<PathBuf>) -> Self {
        // Proxy settings come from the standard environment variables.
        let agent = ureq::Agent::config_builder()
            .timeout_connect(Some(Duration::from_secs(30)))
            .build()
            .into();
        Self {
            base_url: DEFAULT_BASE_URL.into(),
            cache_dir: cache_dir.into(),
            offline: false,
            agent,
            locks: Mutex::new(HashMap::new()),
        }
    }

    pub fn from_env() -> Self {
        Self::new(default_cache_dir())
    }

    pub fn with_base_url(mut self, base: impl Into<String>) -> Self {
        self.base_url = base.into().trim_end_matches('/').to_string();
        self
    }

    pub fn offline(mut self, offline: bool) -> Self {
        self.offline = offline;
        self
    }

    pub fn cache_dir(&self) -> &Path {
        &self.cache_dir
    }

    fn download(&self, url: &str, dest: &Path) -> Result<u64, CollectionError> {
        if self.offline {
            return Err(CollectionError::Offline(url.to_string()));
        }
        let net = |e: ureq::Error| CollectionError::Network {
            url: url.to_string(),
            message: e.to_string(),
        };
        let response = self.agent.get(url).call().map_err(net)?;
        let mut reader = response.into_body().into_reader();
        if let Some(parent) = dest.parent() {
            fs::create_dir_all(parent)?;
        }
        let tmp = dest.with_extension("part");
        let mut out = File::create(&tmp)?;
        let copied = io::copy(&mut reader, &mut out).map_err(|e| CollectionError::Network {
            url: url.to_string(),
            message: e.to_string(),
        })?;
        out.sync_all()?;
        fs::rename(&tmp, dest)?;
        Ok(copied)
    }

    /// Cached index if present, otherwise downloaded and cached.
    pub fn index(&self) -> Result<CollectionIndex, CollectionError> {
        let path = self.cache_dir.join(INDEX_FILE);
        if !path.exists() {
            let url = format!("{}/{}", self.base_url, INDEX_PATH);
            self.download(&url, &path)?;
        }
        CollectionIndex::parse(&fs::read_to_string(&path)?)
    }

    /// Fills in the group from the index when absent.
    pub fn resolve(&self, matrix: &MatrixRef) -> Result<MatrixRef, CollectionError> {
        if matrix.is_resolved() {
            return Ok(matrix.clone());
        }
        Ok(self.index()?.resolve(&matrix.name)?.to_ref())
    }

    fn paths(&self, matrix: &MatrixRef) -> Result<(PathBuf, PathBuf), CollectionError> {
        let group = matrix
            .group
            .as_deref()
            .ok_or_else(|| CollectionError::InvalidRef(format!("'{}' has no group", matrix.name)))?;
        let dir = self.cache_dir.join(group).join(&matrix.name);
        Ok((
            dir.join(format!("{}.mtx", matrix.name)),
            dir.join(format!("{}.json", matrix.name)),
        ))
    }

    /// Validated cache entry for a resolved ref, `Ok(None)` if not cached.
    pub fn cached(&self, matrix: &MatrixRef) -> Result<Option<CacheEntry>, CollectionError> {
        let (mtx, sidecar) = self.paths(matrix)?;
        if !mtx.exists() || !sidecar.exists() {
            return Ok(None);
        }
        let entry: CacheEntry = serde_json::from_reader(BufReader::new(File::open(&sidecar)?))?;
        let actual = sha256_file(&mtx)?;
        if actual != entry.checksum {
            return Err(CollectionError::ChecksumMismatch {
                path: mtx,
                expected: entry.checksum,
                actual,
            });
        }
        Ok(Some(CacheEntry {
            local_path: mtx,
            ..entry
        }))
    }

    fn lock_for(&self, matrix: &MatrixRef) -> Arc<Mutex<()>> {
        let mut locks = self.locks.lock().unwrap_or_else(|e| e.into_inner());
        locks.entry(matrix.clone()).or_default().clone()
    }

    /// Resolves, then returns the cached entry or downloads, extracts,
    /// parses and records it.
    pub fn fetch(&self, matrix: &MatrixRef, policy: FetchPolicy) -> Result<CacheEntry, CollectionError> {
        let matrix = self.resolve(matrix)?;
        let lock = self.lock_for(&matrix);
        let _guard = lock.lock().unwrap_or_else(|e| e.into_inner());

        if policy == FetchPolicy::CacheFirst {
            if let Some(entry) = self.cached(&matrix)? {
                return Ok(entry);
            }
        }
        let group = matrix.group.as_deref().expect("resolved");
        let url = format!("{}/MM/{}/{}.tar.gz", self.base_url, group, matrix.name);
        let (mtx, sidecar) = self.paths(&matrix)?;
        let dir = mtx.parent().expect("cache path has a parent").to_path_buf();
        fs::create_dir_all(&dir)?;
        let archive = dir.join(format!("{}.tar.gz", matrix.name));
        self.download(&url, &archive)?;
        let extracted = extract_mtx(&archive, &matrix.name, &mtx);
        fs::remove_file(&archive)?;
        extracted?;
        read_matrix_market_path(&mtx)?;

        let entry = CacheEntry {
            matrix_ref: matrix.clone(),
            local_path: mtx.clone(),
            checksum: sha256_file(&mtx)?,
            fetched_at: now_secs(),
            source_url: url,
        };
        let mut out = File::create(&sidecar)?;
        serde_json::to_writer_pretty(&mut out, &entry)?;
        out.write_all(b"\n")?;
        Ok(entry)
    }
}

/// Copies the `{name}.mtx` member of a gzip'd tar archive to `dest`.
fn extract_mtx(archive: &Path, name: &str, dest: &Path) -> Result<(), CollectionError> {
    let wanted = format!("{name}.mtx");
    let mut tar = tar::Archive::new(GzDecoder::new(BufReader::new(File::open(archive)?)));
    for entry in tar.entries()? {
        let mut entry = entry?;
        let is_match = entry
            .path()?
            .file_name()
            .is_some_and(|f| f.to_string_lossy() == wanted);
        if is_match {
            let tmp = dest.with_extension("mtx.part");
            let mut out = File::create(&tmp)?;
            io::copy(&mut entry, &mut out)?;
            out.sync_all()?;
            fs::rename(&tmp, dest)?;
            return Ok(());
        }
    }
    Err(CollectionError::MissingMtx(archive.display().to_string(), wanted))
}
