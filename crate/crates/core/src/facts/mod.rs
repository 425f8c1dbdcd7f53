//! Code elements and API-usage facts.
//!
//! Two front ends produce the same [`FactSet`]: the built-in extractor for a
//! Java-like source subset ([`extract_facts`]) and a JSON facts file for any
//! other language ([`ingest_facts_file`]).

mod java;
mod lexer;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};

use globset::{Glob, GlobSet, GlobSetBuilder};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_format_version, read_to_string, write_string, Error, Result};

pub const FACTS_FORMAT_VERSION: &str = "1";

/// 1-based, `end_col` is one past the last character.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SourceSpan {
    pub file: String,
    pub start_line: u32,
    pub start_col: u32,
    pub end_line: u32,
    pub end_col: u32,
}

impl SourceSpan {
    pub fn new(file: impl Into<String>, start: (u32, u32), end: (u32, u32)) -> Self {
        SourceSpan {
            file: file.into(),
            start_line: start.0,
            start_col: start.1,
            end_line: end.0,
            end_col: end.1,
        }
    }

    pub fn is_valid(&self) -> bool {
        self.start_line >= 1
            && self.start_col >= 1
            && self.end_line >= 1
            && self.end_col >= 1
            && (self.start_line, self.start_col) <= (self.end_line, self.end_col)
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.start_line, self.start_col)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ElementKind {
    Package,
    Class,
    Interface,
    Method,
    Field,
}

impl ElementKind {
    pub fn is_type(self) -> bool {
        matches!(self, ElementKind::Class | ElementKind::Interface)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeElement {
    pub kind: ElementKind,
    pub fq_name: String,
    pub span: SourceSpan,
    pub parent: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UsageKind {
    Import,
    Extend,
    Implement,
    Call,
    Instantiate,
    Reference,
    Annotation,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct UsageFact {
    pub element: String,
    pub api_name: String,
    pub usage_kind: UsageKind,
    pub span: SourceSpan,
}

/// Elements and facts of one analysis run, canonically ordered.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactSet {
    pub elements: Vec<CodeElement>,
    pub facts: Vec<UsageFact>,
}

impl FactSet {
    pub fn is_empty(&self) -> bool {
        self.elements.is_empty() && self.facts.is_empty()
    }

    /// Sorts elements by (file, span, name) and facts by (span, element,
    /// api name, kind); drops exact duplicate facts.
    pub fn canonicalize(&mut self) {
        self.elements
            .sort_by(|a, b| a.span.cmp(&b.span).then_with(|| a.fq_name.cmp(&b.fq_name)));
        self.facts.sort_by(|a, b| {
            a.span
                .cmp(&b.span)
                .then_with(|| a.element.cmp(&b.element))
                .then_with(|| a.api_name.cmp(&b.api_name))
                .then_with(|| a.usage_kind.cmp(&b.usage_kind))
        });
        self.facts.dedup();
    }

    pub fn element(&self, fq_name: &str) -> Option<&CodeElement> {
        self.elements.iter().find(|e| e.fq_name == fq_name)
    }

    /// Checks every structural invariant: unique names, resolvable and
    /// acyclic parents with consistent kinds, facts on declared elements,
    /// well-formed spans.
    pub fn validate(&self, origin: &str) -> Result<()> {
        let mut by_name: BTreeMap<&str, &CodeElement> = BTreeMap::new();
        for (i, e) in self.elements.iter().enumerate() {
            let ctx = || format!("element #{} ({})", i + 1, e.fq_name);
            if e.fq_name.is_empty() || e.fq_name.split('.').any(str::is_empty) {
                return Err(Error::validation(origin, ctx(), "malformed fq_name"));
            }
            if !e.span.is_valid() {
                return Err(Error::validation(origin, ctx(), "invalid span"));
            }
            if by_name.insert(&e.fq_name, e).is_some() {
                return Err(Error::validation(origin, ctx(), "duplicate fq_name"));
            }
        }
        for (i, e) in self.elements.iter().enumerate() {
            let ctx = || format!("element #{} ({})", i + 1, e.fq_name);
            if let Some(p) = &e.parent {
                let parent = by_name.get(p.as_str()).ok_or_else(|| {
                    Error::validation(origin, ctx(), format!("undeclared parent {p:?}"))
                })?;
                let ok = match e.kind {
                    ElementKind::Package => false,
                    ElementKind::Class | ElementKind::Interface => {
                        matches!(parent.kind, ElementKind::Package) || parent.kind.is_type()
                    }
                    ElementKind::Method | ElementKind::Field => parent.kind.is_type(),
                };
                if !ok {
                    return Err(Error::validation(
                        origin,
                        ctx(),
                        format!("{:?} cannot be contained in {:?} {p}", e.kind, parent.kind),
                    ));
                }
            }
            // Acyclic: walking up must terminate within |elements| steps.
            let mut seen = BTreeSet::new();
            let mut cur = e;
            while let Some(p) = &cur.parent {
                if !seen.insert(p.as_str()) {
                    return Err(Error::validation(origin, ctx(), "cyclic parent chain"));
                }
                cur = by_name[p.as_str()];
            }
        }
        for (i, f) in self.facts.iter().enumerate() {
            let ctx = || format!("fact #{} ({} -> {})", i + 1, f.element, f.api_name);
            if !by_name.contains_key(f.element.as_str()) {
                return Err(Error::validation(
                    origin,
                    ctx(),
                    format!("references undeclared element {:?}", f.element),
                ));
            }
            if f.api_name.is_empty() {
                return Err(Error::validation(origin, ctx(), "empty api_name"));
            }
            if !f.span.is_valid() {
                return Err(Error::validation(origin, ctx(), "invalid span"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagnosticLevel {
    Warning,
    Error,
}

/// Per-file problem that did not stop the run.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Diagnostic {
    pub level: DiagnosticLevel,
    pub file: String,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Extraction {
    pub facts: FactSet,
    pub diagnostics: Vec<Diagnostic>,
}

#[derive(Debug, Clone)]
pub struct ExtractConfig {
    pub include: Vec<String>,
    pub exclude: Vec<String>,
    /// Files larger than this many bytes are skipped with a warning.
    pub max_file_size: u64,
}

impl Default for ExtractConfig {
    fn default() -> Self {
        ExtractConfig {
            include: vec!["**/*.java".to_string()],
            exclude: Vec::new(),
            max_file_size: 1024 * 1024,
        }
    }
}

fn build_globset(patterns: &[String]) -> Result<GlobSet> {
    let mut b = GlobSetBuilder::new();
    for p in patterns {
        let g = Glob::new(p).map_err(|e| Error::Usage(format!("bad glob {p:?}: {e}")))?;
        b.add(g);
    }
    b.build()
        .map_err(|e| Error::Usage(format!("bad glob set: {e}")))
}

/// Relative `/`-separated path, used as the span file name.
fn relative_name(root: &Path, path: &Path) -> String {
    let rel = path.strip_prefix(root).unwrap_or(path);
    rel.components()
        .map(|c| c.as_os_str().to_string_lossy())
        .collect::<Vec<_>>()
        .join("/")
}

/// Walks `root` and extracts elements and usage facts from every matching
/// file. Per-file failures become diagnostics; the run continues.
pub fn extract_facts(root: &Path, config: &ExtractConfig) -> Result<Extraction> {
    if !root.is_dir() {
        return Err(Error::Usage(format!(
            "source root {} is not a directory",
            root.display()
        )));
    }
    let include = build_globset(&config.include)?;
    let exclude = build_globset(&config.exclude)?;
    let mut diagnostics = Vec::new();
    let mut files: Vec<(String, PathBuf)> = Vec::new();
    for entry in walkdir::WalkDir::new(root).sort_by_file_name() {
        let entry = match entry {
            Ok(e) => e,
            Err(e) => {
                let file = e
                    .path()
                    .map(|p| relative_name(root, p))
                    .unwrap_or_default();
                diagnostics.push(Diagnostic {
                    level: DiagnosticLevel::Error,
                    file,
                    message: e.to_string(),
                });
                continue;
            }
        };
        if !entry.file_type().is_file() {
            continue;
        }
        let rel = relative_name(root, entry.path());
        if !include.is_match(&rel) || exclude.is_match(&rel) {
            continue;
        }
        match entry.metadata() {
            Ok(m) if m.len() > config.max_file_size => {
                diagnostics.push(Diagnostic {
                    level: DiagnosticLevel::Warning,
                    file: rel,
                    message: format!(
                        "skipped: {} bytes exceeds the {} byte limit",
                        m.len(),
                        config.max_file_size
                    ),
                });
                continue;
            }
            _ => {}
        }
        files.push((rel, entry.into_path()));
    }
    files.sort();

    let parsed: Vec<std::result::Result<java::FileModel, Diagnostic>> = files
        .par_iter()
        .map(|(rel, path)| {
            let bytes = std::fs::read(path).map_err(|e| Diagnostic {
                level: DiagnosticLevel::Error,
                file: rel.clone(),
                message: format!("unreadable: {e}"),
            })?;
            let text = String::from_utf8(bytes).map_err(|_| Diagnostic {
                level: DiagnosticLevel::Error,
                file: rel.clone(),
                message: "unreadable: not valid UTF-8".to_string(),
            })?;
            Ok(java::parse_file(rel, &text))
        })
        .collect();

    let mut models = Vec::new();
    for p in parsed {
        match p {
            Ok(m) => models.push(m),
            Err(d) => diagnostics.push(d),
        }
    }
    let (mut facts, mut more) = java::link(models);
    diagnostics.append(&mut more);
    facts.canonicalize();
    diagnostics.sort();
    diagnostics.dedup();
    Ok(Extraction { facts, diagnostics })
}

/// Extracts from a single in-memory source file, named `file` in spans.
pub fn extract_source(file: &str, text: &str) -> Extraction {
    let (mut facts, diagnostics) = java::link(vec![java::parse_file(file, text)]);
    facts.canonicalize();
    Extraction { facts, diagnostics }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFactsFile {
    version: String,
    #[serde(default)]
    elements: Vec<RawElement>,
    #[serde(default)]
    facts: Vec<RawFact>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpan {
    start_line: u32,
    start_col: u32,
    end_line: u32,
    end_col: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawElement {
    kind: ElementKind,
    fq_name: String,
    #[serde(default)]
    parent: Option<String>,
    file: String,
    span: RawSpan,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFact {
    element: String,
    api_name: String,
    usage_kind: UsageKind,
    /// Defaults to the owning element's file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    file: Option<String>,
    span: RawSpan,
}

/// Parses a facts document. The result satisfies the same invariants as
/// [`extract_facts`] output.
pub fn parse_facts(text: &str, origin: &str) -> Result<FactSet> {
    let raw: RawFactsFile = serde_json::from_str(text).map_err(|e| Error::parse(origin, &e))?;
    check_format_version(origin, &raw.version, FACTS_FORMAT_VERSION)?;
    let to_span = |file: String, s: RawSpan| SourceSpan {
        file,
        start_line: s.start_line,
        start_col: s.start_col,
        end_line: s.end_line,
        end_col: s.end_col,
    };
    let files: BTreeMap<String, String> = raw
        .elements
        .iter()
        .map(|e| (e.fq_name.clone(), e.file.clone()))
        .collect();
    let elements = raw
        .elements
        .into_iter()
        .map(|e| CodeElement {
            kind: e.kind,
            fq_name: e.fq_name,
            parent: e.parent,
            span: to_span(e.file, e.span),
        })
        .collect();
    let mut facts = Vec::new();
    for (i, f) in raw.facts.into_iter().enumerate() {
        let file = match f.file.or_else(|| files.get(&f.element).cloned()) {
            Some(file) => file,
            None => {
                return Err(Error::validation(
                    origin,
                    format!("fact #{} ({} -> {})", i + 1, f.element, f.api_name),
                    format!("references undeclared element {:?}", f.element),
                ))
            }
        };
        facts.push(UsageFact {
            element: f.element,
            api_name: f.api_name,
            usage_kind: f.usage_kind,
            span: to_span(file, f.span),
        });
    }
    let mut set = FactSet { elements, facts };
    set.validate(origin)?;
    set.canonicalize();
    Ok(set)
}

pub fn ingest_facts_file(path: &Path) -> Result<FactSet> {
    let text = read_to_string(path)?;
    parse_facts(&text, &path.display().to_string())
}

/// Serializes a fact set in the facts-file format.
pub fn facts_to_json(set: &FactSet) -> String {
    let raw_span = |s: &SourceSpan| RawSpan {
        start_line: s.start_line,
        start_col: s.start_col,
        end_line: s.end_line,
        end_col: s.end_col,
    };
    let files: BTreeMap<&str, &str> = set
        .elements
        .iter()
        .map(|e| (e.fq_name.as_str(), e.span.file.as_str()))
        .collect();
    let raw = RawFactsFile {
        version: FACTS_FORMAT_VERSION.to_string(),
        elements: set
            .elements
            .iter()
            .map(|e| RawElement {
                kind: e.kind,
                fq_name: e.fq_name.clone(),
                parent: e.parent.clone(),
                file: e.span.file.clone(),
                span: raw_span(&e.span),
            })
            .collect(),
        facts: set
            .facts
            .iter()
            .map(|f| RawFact {
                element: f.element.clone(),
                api_name: f.api_name.clone(),
                usage_kind: f.usage_kind,
                file: (files.get(f.element.as_str()) != Some(&f.span.file.as_str()))
                    .then(|| f.span.file.clone()),
                span: raw_span(&f.span),
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&raw).expect("facts serialize");
    s.push('\n');
    s
}

pub fn save_facts(set: &FactSet, path: &Path) -> Result<()> {
    write_string(path, &facts_to_json(set))
}
