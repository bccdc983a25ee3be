//! Append-only, content-addressed response cache.
//!
//! Records live in memory behind a read-write lock and, when the cache is
//! backed by a directory, are appended as JSON lines to `completions.jsonl`
//! and `embeddings.jsonl`. Reopening the directory replays both files.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Mutex, RwLock};

use chrono::{DateTime, Utc};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionRecord {
    pub cache_key: String,
    pub model_id: String,
    pub response_text: String,
    pub created_at: DateTime<Utc>,
}

impl CompletionRecord {
    pub fn new(cache_key: String, model_id: &str, response_text: &str) -> Self {
        Self {
            cache_key,
            model_id: model_id.to_string(),
            response_text: response_text.to_string(),
            created_at: Utc::now(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingRecord {
    pub cache_key: String,
    pub model_id: String,
    pub vector: Vec<f64>,
    pub created_at: DateTime<Utc>,
}

impl EmbeddingRecord {
    pub fn new(cache_key: String, model_id: &str, vector: Vec<f64>) -> Self {
        Self {
            cache_key,
            model_id: model_id.to_string(),
            vector,
            created_at: Utc::now(),
        }
    }
}

trait Keyed {
    fn key(&self) -> &str;
}

impl Keyed for CompletionRecord {
    fn key(&self) -> &str {
        &self.cache_key
    }
}

impl Keyed for EmbeddingRecord {
    fn key(&self) -> &str {
        &self.cache_key
    }
}

struct RecordLog<R> {
    records: RwLock<HashMap<String, R>>,
    writer: Mutex<Option<File>>,
}

impl<R: Keyed + Clone + Serialize + DeserializeOwned> RecordLog<R> {
    fn in_memory() -> Self {
        Self {
            records: RwLock::new(HashMap::new()),
            writer: Mutex::new(None),
        }
    }

    fn open(path: &Path) -> io::Result<Self> {
        let mut records = HashMap::new();
        if path.exists() {
            for line in BufReader::new(File::open(path)?).lines() {
                let line = line?;
                // A torn final line from an interrupted write is skipped.
                if let Ok(record) = serde_json::from_str::<R>(&line) {
                    records.entry(record.key().to_string()).or_insert(record);
                }
            }
        }
        let mut file = OpenOptions::new().create(true).append(true).open(path)?;
        let ends_clean = std::fs::read(path)?.last().is_none_or(|b| *b == b'\n');
        if !ends_clean {
            file.write_all(b"\n")?;
        }
        Ok(Self {
            records: RwLock::new(records),
            writer: Mutex::new(Some(file)),
        })
    }

    fn get(&self, key: &str) -> Option<R> {
        self.records.read().expect("cache lock poisoned").get(key).cloned()
    }

    fn put(&self, record: R) -> io::Result<()> {
        let mut writer = self.writer.lock().expect("cache writer poisoned");
        {
            let mut records = self.records.write().expect("cache lock poisoned");
            if records.contains_key(record.key()) {
                return Ok(());
            }
            records.insert(record.key().to_string(), record.clone());
        }
        if let Some(file) = writer.as_mut() {
            let mut line = serde_json::to_string(&record).map_err(io::Error::other)?;
            line.push('\n');
            file.write_all(line.as_bytes())?;
            file.flush()?;
        }
        Ok(())
    }

    fn len(&self) -> usize {
        self.records.read().expect("cache lock poisoned").len()
    }
}

/// Completion and embedding records keyed by content hash.
pub struct ResponseCache {
    dir: Option<PathBuf>,
    completions: RecordLog<CompletionRecord>,
    embeddings: RecordLog<EmbeddingRecord>,
}

impl ResponseCache {
    pub fn in_memory() -> Self {
        Self {
            dir: None,
            completions: RecordLog::in_memory(),
            embeddings: RecordLog::in_memory(),
        }
    }

    /// Opens (creating if needed) a cache directory.
    pub fn open(dir: impl AsRef<Path>) -> io::Result<Self> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        Ok(Self {
            dir: Some(dir.to_path_buf()),
            completions: RecordLog::open(&dir.join("completions.jsonl"))?,
            embeddings: RecordLog::open(&dir.join("embeddings.jsonl"))?,
        })
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    pub fn completion(&self, key: &str) -> Option<CompletionRecord> {
        self.completions.get(key)
    }

    pub fn put_completion(&self, record: CompletionRecord) -> io::Result<()> {
        self.completions.put(record)
    }

    pub fn embedding(&self, key: &str) -> Option<EmbeddingRecord> {
        self.embeddings.get(key)
    }

    pub fn put_embedding(&self, record: EmbeddingRecord) -> io::Result<()> {
        self.embeddings.put(record)
    }

    pub fn completion_count(&self) -> usize {
        self.completions.len()
    }

    pub fn embedding_count(&self) -> usize {
        self.embeddings.len()
    }
}
