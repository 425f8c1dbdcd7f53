#![allow(dead_code)]

use std::path::{Path, PathBuf};

use value_lint::cli::{analyze, Input, RunConfig};
use value_lint::report::AnalysisReport;

pub const TIMESTAMP: &str = "2020-01-01T00:00:00Z";

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn config(root: &Path) -> RunConfig {
    let mut c = RunConfig::new(Input::SourceRoot(root.to_path_buf()));
    c.timestamp = Some(TIMESTAMP.to_string());
    c
}

pub fn analyze_dir(root: &Path) -> AnalysisReport {
    analyze(&config(root)).expect("analysis succeeds")
}

/// Copies a fixture tree into a fresh temporary directory.
pub fn copy_fixture(name: &str) -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let src = fixture(name);
    for entry in walkdir::WalkDir::new(&src) {
        let entry = entry.unwrap();
        let rel = entry.path().strip_prefix(&src).unwrap();
        let dst = dir.path().join(rel);
        if entry.file_type().is_dir() {
            std::fs::create_dir_all(&dst).unwrap();
        } else {
            std::fs::copy(entry.path(), &dst).unwrap();
        }
    }
    dir
}
