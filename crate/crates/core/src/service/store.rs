//! Workspace storage behind a small interface.

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::RwLock;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StoredDoc {
    pub owner: String,
    /// The saved workspace document.
    pub bytes: Vec<u8>,
}

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("storage failure: {0}")]
    Io(#[from] std::io::Error),
    #[error("invalid workspace id {0:?}")]
    InvalidId(String),
}

pub trait WorkspaceStore: Send + Sync {
    fn get(&self, id: &str) -> Result<Option<StoredDoc>, StoreError>;
    fn put(&self, id: &str, doc: StoredDoc) -> Result<(), StoreError>;
    /// Ids owned by `owner`, sorted.
    fn list(&self, owner: &str) -> Result<Vec<String>, StoreError>;
}

#[derive(Debug, Default)]
pub struct MemoryStore {
    docs: RwLock<HashMap<String, StoredDoc>>,
}

impl WorkspaceStore for MemoryStore {
    fn get(&self, id: &str) -> Result<Option<StoredDoc>, StoreError> {
        Ok(self.docs.read().expect("store lock").get(id).cloned())
    }

    fn put(&self, id: &str, doc: StoredDoc) -> Result<(), StoreError> {
        self.docs.write().expect("store lock").insert(id.to_string(), doc);
        Ok(())
    }

    fn list(&self, owner: &str) -> Result<Vec<String>, StoreError> {
        let mut ids: Vec<String> =
            self.docs.read().expect("store lock").iter().filter(|(_, d)| d.owner == owner).map(|(k, _)| k.clone()).collect();
        ids.sort();
        Ok(ids)
    }
}

/// One `<id>.json` document and one `<id>.owner` file per workspace.
#[derive(Debug)]
pub struct FileStore {
    dir: PathBuf,
}

impl FileStore {
    pub fn open(dir: impl Into<PathBuf>) -> Result<FileStore, StoreError> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir)?;
        Ok(FileStore { dir })
    }

    fn paths(&self, id: &str) -> Result<(PathBuf, PathBuf), StoreError> {
        let id = uuid::Uuid::parse_str(id).map_err(|_| StoreError::InvalidId(id.into()))?.hyphenated().to_string();
        Ok((self.dir.join(format!("{id}.json")), self.dir.join(format!("{id}.owner"))))
    }
}

fn write_atomic(path: &std::path::Path, bytes: &[u8]) -> std::io::Result<()> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(tmp, path)
}

impl WorkspaceStore for FileStore {
    fn get(&self, id: &str) -> Result<Option<StoredDoc>, StoreError> {
        let Ok((doc, owner)) = self.paths(id) else { return Ok(None) };
        match (std::fs::read(&doc), std::fs::read_to_string(&owner)) {
            (Ok(bytes), Ok(owner)) => Ok(Some(StoredDoc { owner, bytes })),
            (Err(e), _) | (_, Err(e)) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            (Err(e), _) | (_, Err(e)) => Err(e.into()),
        }
    }

    fn put(&self, id: &str, doc: StoredDoc) -> Result<(), StoreError> {
        let (path, owner) = self.paths(id)?;
        write_atomic(&owner, doc.owner.as_bytes())?;
        write_atomic(&path, &doc.bytes)?;
        Ok(())
    }

    fn list(&self, owner: &str) -> Result<Vec<String>, StoreError> {
        let mut ids = Vec::new();
        for entry in std::fs::read_dir(&self.dir)? {
            let path = entry?.path();
            if path.extension().is_some_and(|e| e == "owner") && std::fs::read_to_string(&path)? == owner {
                if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                    ids.push(stem.to_string());
                }
            }
        }
        ids.sort();
        Ok(ids)
    }
}
