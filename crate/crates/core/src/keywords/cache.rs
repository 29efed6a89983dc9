//! Persistent keyword cache: one JSON record per line,
//! `{"hash": .., "instruction": .., "keywords": [..]}`. Later lines win.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{KeywordError, KeywordSet};

/// Hex SHA-256 of the raw instruction text.
pub fn instruction_hash(instruction: &str) -> String {
    hex::encode(Sha256::digest(instruction.as_bytes()).as_slice())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheRecord {
    pub hash: String,
    pub instruction: String,
    pub keywords: Vec<String>,
}

#[derive(Debug)]
pub struct KeywordCache {
    path: PathBuf,
    entries: HashMap<String, KeywordSet>,
}

impl KeywordCache {
    /// Open (or lazily create) the cache at `path`.
    pub fn open(path: impl Into<PathBuf>) -> Result<Self, KeywordError> {
        let path = path.into();
        let mut entries = HashMap::new();
        if path.exists() {
            let reader = BufReader::new(File::open(&path)?);
            for (i, line) in reader.lines().enumerate() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                let rec: CacheRecord = serde_json::from_str(&line)
                    .map_err(|e| KeywordError::CacheCorrupt { line: i + 1, message: e.to_string() })?;
                entries.insert(rec.hash, KeywordSet { instruction: rec.instruction, keywords: rec.keywords });
            }
        }
        Ok(Self { path, entries })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn lookup(&self, hash: &str) -> Option<&KeywordSet> {
        self.entries.get(hash)
    }

    pub fn lookup_instruction(&self, instruction: &str) -> Option<&KeywordSet> {
        self.lookup(&instruction_hash(instruction))
    }

    /// Append `set` to the file and make it the current value for its hash.
    pub fn store(&mut self, set: KeywordSet) -> Result<String, KeywordError> {
        let hash = instruction_hash(&set.instruction);
        let rec =
            CacheRecord { hash: hash.clone(), instruction: set.instruction.clone(), keywords: set.keywords.clone() };
        if let Some(dir) = self.path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        let mut f = OpenOptions::new().create(true).append(true).open(&self.path)?;
        let mut line = serde_json::to_string(&rec).expect("record serializes");
        line.push('\n');
        f.write_all(line.as_bytes())?;
        self.entries.insert(hash.clone(), set);
        Ok(hash)
    }
}
