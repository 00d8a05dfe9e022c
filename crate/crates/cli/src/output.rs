//! In-memory output staging with all-or-nothing writes.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use crate::RunError;

/// Files produced by a run, keyed by name relative to the output directory.
#[derive(Debug, Default, Clone, PartialEq)]
pub struct OutputSet {
    files: BTreeMap<String, Vec<u8>>,
}

impl OutputSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, name: impl Into<String>, contents: Vec<u8>) {
        self.files.insert(name.into(), contents);
    }

    /// Builds a CSV file from a header and rows.
    pub fn insert_csv<H, R>(&mut self, name: impl Into<String>, header: &[H], rows: R) -> Result<(), RunError>
    where
        H: AsRef<str>,
        R: IntoIterator<Item = Vec<String>>,
    {
        let mut w = csv::Writer::from_writer(Vec::new());
        let header: Vec<&str> = header.iter().map(|h| h.as_ref()).collect();
        w.write_record(&header).map_err(|e| RunError::io(e.to_string()))?;
        for row in rows {
            w.write_record(&row).map_err(|e| RunError::io(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| RunError::io(e.to_string()))?;
        self.insert(name, bytes);
        Ok(())
    }

    pub fn extend(&mut self, other: OutputSet) {
        self.files.extend(other.files);
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.files.keys().map(|s| s.as_str())
    }

    pub fn get(&self, name: &str) -> Option<&[u8]> {
        self.files.get(name).map(|v| v.as_slice())
    }

    pub fn len(&self) -> usize {
        self.files.len()
    }

    pub fn is_empty(&self) -> bool {
        self.files.is_empty()
    }

    /// Writes every file to a temporary name first and renames only after
    /// all writes succeeded; on failure the temporaries are removed.
    pub fn write_atomic(&self, dir: &Path) -> Result<Vec<PathBuf>, RunError> {
        fs::create_dir_all(dir).map_err(|e| RunError::io(format!("cannot create {}: {e}", dir.display())))?;
        let tag = std::process::id();
        let mut staged: Vec<(PathBuf, PathBuf)> = Vec::with_capacity(self.files.len());
        let cleanup = |staged: &[(PathBuf, PathBuf)]| {
            for (tmp, _) in staged {
                let _ = fs::remove_file(tmp);
            }
        };
        for (name, contents) in &self.files {
            let target = dir.join(name);
            let tmp = dir.join(format!(".{name}.tmp{tag}"));
            if let Err(e) = fs::write(&tmp, contents) {
                cleanup(&staged);
                let _ = fs::remove_file(&tmp);
                return Err(RunError::io(format!("cannot write {}: {e}", tmp.display())));
            }
            staged.push((tmp, target));
        }
        for (tmp, target) in &staged {
            fs::rename(tmp, target).map_err(|e| {
                cleanup(&staged);
                RunError::io(format!("cannot move {} into place: {e}", target.display()))
            })?;
        }
        Ok(staged.into_iter().map(|(_, t)| t).collect())
    }
}
