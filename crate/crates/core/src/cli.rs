//! Command-line front end.
//!
//! Exit codes: 0 when no smell reaches the `--fail-on` threshold, 1 when
//! one does, 2 on usage or processing errors.

use std::ffi::OsString;
use std::fmt;
use std::io::{IsTerminal, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::annotator::{annotate, emit_annotations, AnnotateOptions, AnnotationFormat, Annotations, Sidecar};
use crate::catalog::{load_catalog, Catalog};
use crate::error::{write_string, Error};
use crate::facts::{extract_facts, facts_to_json, ingest_facts_file, Diagnostic, DiagnosticLevel, ExtractConfig, FactSet};
use crate::inspector::{inspect, Policy, Severity};
use crate::recommender::{recommend, RuleSet};
use crate::report::{render_with, AnalysisReport, ReportFormat, TextOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FINDINGS: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

pub const NO_COLOR_ENV: &str = "VALUE_LINT_NO_COLOR";

/// Error tagged with the pipeline stage that produced it.
#[derive(Debug)]
pub struct StageError {
    pub stage: &'static str,
    pub error: Error,
}

impl fmt::Display for StageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.stage, self.error)
    }
}

impl std::error::Error for StageError {}

trait Stage<T> {
    fn stage(self, stage: &'static str) -> Result<T, StageError>;
}

impl<T> Stage<T> for crate::Result<T> {
    fn stage(self, stage: &'static str) -> Result<T, StageError> {
        self.map_err(|error| StageError { stage, error })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Input {
    SourceRoot(PathBuf),
    FactsFile(PathBuf),
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub input: Input,
    pub catalog_paths: Vec<PathBuf>,
    pub use_default_catalog: bool,
    pub policy_path: Option<PathBuf>,
    pub rules_path: Option<PathBuf>,
    pub use_default_rules: bool,
    pub format: ReportFormat,
    pub out: Option<PathBuf>,
    pub propagate_calls: bool,
    pub fail_on: Severity,
    /// Current UTC time when absent.
    pub timestamp: Option<String>,
    pub include_annotations: bool,
    pub extract: ExtractConfig,
}

impl RunConfig {
    pub fn new(input: Input) -> Self {
        RunConfig {
            input,
            catalog_paths: Vec::new(),
            use_default_catalog: true,
            policy_path: None,
            rules_path: None,
            use_default_rules: true,
            format: ReportFormat::Text,
            out: None,
            propagate_calls: false,
            fail_on: Severity::Error,
            timestamp: None,
            include_annotations: false,
            extract: ExtractConfig::default(),
        }
    }
}

/// Built-in catalog (unless disabled) merged with the given files.
pub fn load_catalog_set(paths: &[PathBuf], use_default: bool) -> crate::Result<Catalog> {
    let mut parts = Vec::new();
    if use_default {
        parts.push(Catalog::builtin());
    }
    let mut origin = String::from("<builtin catalog>");
    for p in paths {
        parts.push(load_catalog(p)?);
        origin = p.display().to_string();
    }
    match parts.len() {
        0 => Ok(Catalog::empty()),
        1 => Ok(parts.pop().expect("one catalog")),
        _ => Catalog::merge(parts, &origin),
    }
}

fn load_facts(input: &Input, extract: &ExtractConfig) -> Result<(FactSet, Vec<Diagnostic>), StageError> {
    match input {
        Input::SourceRoot(root) => {
            let e = extract_facts(root, extract).stage("extract")?;
            Ok((e.facts, e.diagnostics))
        }
        Input::FactsFile(path) => Ok((ingest_facts_file(path).stage("facts")?, Vec::new())),
    }
}

fn annotate_input(
    input: &Input,
    extract: &ExtractConfig,
    catalog: &Catalog,
    propagate_calls: bool,
) -> Result<(Annotations, Vec<Diagnostic>), StageError> {
    let (facts, diagnostics) = load_facts(input, extract)?;
    let annotations = annotate(&facts, catalog, AnnotateOptions { propagate_calls }).stage("annotate")?;
    Ok((annotations, diagnostics))
}

pub fn current_timestamp() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

/// Runs extraction, annotation, inspection and recommendation.
pub fn analyze(config: &RunConfig) -> Result<AnalysisReport, StageError> {
    let catalog = load_catalog_set(&config.catalog_paths, config.use_default_catalog).stage("catalog")?;
    let policy = match &config.policy_path {
        Some(p) => Policy::load(p).stage("policy")?,
        None => Policy::default(),
    };
    let mut rules = match &config.rules_path {
        Some(p) => RuleSet::load(p).stage("rules")?,
        None => RuleSet::default(),
    };
    if config.use_default_rules {
        rules = rules.then(RuleSet::builtin());
    }
    let (annotations, diagnostics) =
        annotate_input(&config.input, &config.extract, &catalog, config.propagate_calls)?;
    let inspection = inspect(&annotations, &policy, &catalog);
    let recommendations = recommend(&inspection.smells, &rules);
    let timestamp = config.timestamp.clone().unwrap_or_else(current_timestamp);
    let mut report = AnalysisReport::new(timestamp, catalog.version(), &annotations, inspection, recommendations)
        .with_diagnostics(diagnostics);
    if config.include_annotations {
        report = report.with_annotations(Sidecar::new(annotations, catalog.version()));
    }
    Ok(report)
}

/// Whether any smell is at or above `threshold`.
pub fn breaches(report: &AnalysisReport, threshold: Severity) -> bool {
    report.smells.iter().any(|s| s.severity >= threshold)
}

#[derive(Parser, Debug)]
#[command(name = "value-lint", version, about = "Human-value linter: annotate, inspect, recommend")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the full pipeline and write a report.
    Analyze(AnalyzeArgs),
    /// Emit value annotations for code elements without inspecting them.
    Annotate(AnnotateArgs),
    /// Dump extracted elements and usage facts as a facts file.
    Extract(ExtractArgs),
    /// Validate or query API catalogs.
    #[command(subcommand)]
    Catalog(CatalogCommand),
}

#[derive(Args, Debug)]
struct InputArgs {
    /// Source tree to scan.
    #[arg(required_unless_present = "facts", conflicts_with = "facts")]
    source_root: Option<PathBuf>,
    /// Facts file to use instead of scanning sources.
    #[arg(long)]
    facts: Option<PathBuf>,
    /// Glob of files to scan, relative to the source root (repeatable).
    #[arg(long = "include", value_name = "GLOB")]
    include: Vec<String>,
    /// Glob of files to skip (repeatable).
    #[arg(long = "exclude", value_name = "GLOB")]
    exclude: Vec<String>,
}

impl InputArgs {
    fn input(&self) -> Input {
        match (&self.source_root, &self.facts) {
            (_, Some(f)) => Input::FactsFile(f.clone()),
            (Some(r), None) => Input::SourceRoot(r.clone()),
            (None, None) => unreachable!("clap requires one input"),
        }
    }

    fn extract_config(&self) -> ExtractConfig {
        let mut c = ExtractConfig::default();
        if !self.include.is_empty() {
            c.include = self.include.clone();
        }
        c.exclude = self.exclude.clone();
        c
    }
}

#[derive(Args, Debug)]
struct CatalogArgs {
    /// Additional catalog file (repeatable).
    #[arg(long = "catalog", value_name = "PATH")]
    catalogs: Vec<PathBuf>,
    /// Do not load the built-in Android catalog.
    #[arg(long)]
    no_default_catalog: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Text,
    Json,
    Sarif,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SeverityArg {
    Info,
    Warning,
    Error,
}

impl From<SeverityArg> for Severity {
    fn from(s: SeverityArg) -> Self {
        match s {
            SeverityArg::Info => Severity::Info,
            SeverityArg::Warning => Severity::Warning,
            SeverityArg::Error => Severity::Error,
        }
    }
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    catalog: CatalogArgs,
    /// Policy file with required values and suppressions.
    #[arg(long)]
    policy: Option<PathBuf>,
    /// Recommendation rules file; takes precedence over the shipped rules.
    #[arg(long)]
    rules: Option<PathBuf>,
    /// Do not load the shipped recommendation rules.
    #[arg(long)]
    no_default_rules: bool,
    #[arg(long, value_enum, default_value = "text")]
    format: FormatArg,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Let methods inherit the direct profile of project methods they call.
    #[arg(long)]
    propagate_calls: bool,
    /// Lowest severity that makes the run exit with 1.
    #[arg(long, value_enum, default_value = "error")]
    fail_on: SeverityArg,
    /// Timestamp recorded in the report (default: now, UTC).
    #[arg(long)]
    timestamp: Option<String>,
    /// Embed the element annotations in the report.
    #[arg(long)]
    include_annotations: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum EmitArg {
    Sidecar,
    Inline,
}

#[derive(Args, Debug)]
struct AnnotateArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    catalog: CatalogArgs,
    #[arg(long)]
    propagate_calls: bool,
    /// Sidecar JSON or a preview patch of annotation comments.
    #[arg(long, value_enum, default_value = "sidecar")]
    emit: EmitArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ExtractArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum CatalogCommand {
    /// Check catalog files for schema and consistency errors.
    Validate {
        /// Catalog files; the built-in catalog when none are given.
        paths: Vec<PathBuf>,
    },
    /// Query the merged catalog.
    Query {
        #[command(flatten)]
        catalog: CatalogArgs,
        #[command(subcommand)]
        query: Query,
        #[arg(long, global = true)]
        json: bool,
    },
}

#[derive(Subcommand, Debug)]
enum Query {
    /// Pattern pairs with opposite signs on the same value.
    Conflicts,
    /// Every annotation and its profile.
    List,
    /// The annotation an API name resolves to.
    Match { name: String },
}

struct Io<'a> {
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
    color: bool,
}

impl Io<'_> {
    fn emit(&mut self, text: &str, path: Option<&Path>) -> Result<(), StageError> {
        match path {
            Some(p) => write_string(p, text).stage("output"),
            None => self
                .out
                .write_all(text.as_bytes())
                .map_err(|e| Error::io("<stdout>", e))
                .stage("output"),
        }
    }

    fn diagnostics(&mut self, diagnostics: &[Diagnostic]) {
        for d in diagnostics {
            let level = match d.level {
                DiagnosticLevel::Warning => "warning",
                DiagnosticLevel::Error => "error",
            };
            let _ = writeln!(self.err, "{level}: {}: {}", d.file, d.message);
        }
    }
}

/// Entry point for the binary.
pub fn main() -> i32 {
    let color = std::env::var_os(NO_COLOR_ENV).is_none() && std::io::stdout().is_terminal();
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    let mut out = stdout.lock();
    let mut err = stderr.lock();
    run_with(std::env::args_os(), &mut out, &mut err, color)
}

/// Runs the CLI with explicit arguments and streams; returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(args, out, err, false)
}

fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write, color: bool) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let mut io = Io { out, err, color };
    match dispatch(cli.command, &mut io) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(io.err, "error: {e}");
            EXIT_ERROR
        }
    }
}

fn dispatch(command: Command, io: &mut Io<'_>) -> Result<i32, StageError> {
    match command {
        Command::Analyze(a) => cmd_analyze(a, io),
        Command::Annotate(a) => cmd_annotate(a, io),
        Command::Extract(a) => {
            let (facts, diagnostics) = load_facts(&a.input.input(), &a.input.extract_config())?;
            io.diagnostics(&diagnostics);
            io.emit(&facts_to_json(&facts), a.out.as_deref())?;
            Ok(EXIT_OK)
        }
        Command::Catalog(CatalogCommand::Validate { paths }) => {
            let catalog = if paths.is_empty() {
                Catalog::builtin()
            } else {
                load_catalog_set(&paths, false).stage("catalog")?
            };
            let _ = writeln!(
                io.out,
                "ok: {} annotation(s), version {}",
                catalog.len(),
                catalog.version()
            );
            Ok(EXIT_OK)
        }
        Command::Catalog(CatalogCommand::Query { catalog, query, json }) => {
            let c = load_catalog_set(&catalog.catalogs, !catalog.no_default_catalog).stage("catalog")?;
            io.emit(&catalog_query(&c, &query, json), None)?;
            Ok(EXIT_OK)
        }
    }
}

fn cmd_analyze(a: AnalyzeArgs, io: &mut Io<'_>) -> Result<i32, StageError> {
    let mut config = RunConfig::new(a.input.input());
    config.extract = a.input.extract_config();
    config.catalog_paths = a.catalog.catalogs;
    config.use_default_catalog = !a.catalog.no_default_catalog;
    config.policy_path = a.policy;
    config.rules_path = a.rules;
    config.use_default_rules = !a.no_default_rules;
    config.format = match a.format {
        FormatArg::Text => ReportFormat::Text,
        FormatArg::Json => ReportFormat::Json,
        FormatArg::Sarif => ReportFormat::Sarif,
    };
    config.out = a.out;
    config.propagate_calls = a.propagate_calls;
    config.fail_on = a.fail_on.into();
    config.timestamp = a.timestamp;
    config.include_annotations = a.include_annotations;

    let report = analyze(&config)?;
    io.diagnostics(&report.diagnostics);
    let opts = TextOptions {
        color: io.color && config.out.is_none(),
    };
    io.emit(&render_with(&report, config.format, opts), config.out.as_deref())?;
    Ok(if breaches(&report, config.fail_on) {
        EXIT_FINDINGS
    } else {
        EXIT_OK
    })
}

fn cmd_annotate(a: AnnotateArgs, io: &mut Io<'_>) -> Result<i32, StageError> {
    let catalog = load_catalog_set(&a.catalog.catalogs, !a.catalog.no_default_catalog).stage("catalog")?;
    let input = a.input.input();
    let (annotations, diagnostics) =
        annotate_input(&input, &a.input.extract_config(), &catalog, a.propagate_calls)?;
    io.diagnostics(&diagnostics);
    let (format, root) = match a.emit {
        EmitArg::Sidecar => (AnnotationFormat::Sidecar, None),
        EmitArg::Inline => (
            AnnotationFormat::InlineSuggestions,
            match &input {
                Input::SourceRoot(r) => Some(r.as_path()),
                Input::FactsFile(_) => None,
            },
        ),
    };
    let text = emit_annotations(&annotations, format, catalog.version(), root);
    io.emit(&text, a.out.as_deref())?;
    Ok(EXIT_OK)
}

fn profile_text(a: &crate::catalog::ApiAnnotation) -> String {
    a.profile
        .iter()
        .map(|(v, r)| format!("{v}{}", r.symbol()))
        .collect::<Vec<_>>()
        .join(" ")
}

fn catalog_query(c: &Catalog, query: &Query, json: bool) -> String {
    use serde_json::json;
    let doc = match query {
        Query::Conflicts => {
            let pairs = c.conflicting_pairs();
            if !json {
                return pairs
                    .iter()
                    .map(|p| {
                        format!(
                            "{}\t{}\t{} ({})\n",
                            p.first.pattern,
                            p.second.pattern,
                            p.value,
                            p.value.canonical_name()
                        )
                    })
                    .collect();
            }
            json!(pairs
                .iter()
                .map(|p| json!({"first": p.first.pattern, "second": p.second.pattern, "value": p.value}))
                .collect::<Vec<_>>())
        }
        Query::List => {
            if !json {
                return c
                    .annotations()
                    .iter()
                    .map(|a| format!("{}\t{}\n", a.pattern, profile_text(a)))
                    .collect();
            }
            serde_json::from_str(&c.to_json()).expect("catalog json")
        }
        Query::Match { name } => {
            let hit = c.match_api(name);
            if !json {
                return match hit {
                    Some(a) => format!("{}\t{}\n", a.pattern, profile_text(a)),
                    None => "no match\n".to_string(),
                };
            }
            json!(hit.map(|a| json!({"pattern": a.pattern, "values": a.profile})))
        }
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("query json");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(args.iter().copied(), &mut out, &mut err);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run_str(&["value-lint"]).0, EXIT_ERROR);
        assert_eq!(run_str(&["value-lint", "analyze"]).0, EXIT_ERROR);
        assert_eq!(run_str(&["value-lint", "analyze", "x", "--format", "xml"]).0, EXIT_ERROR);
        assert_eq!(run_str(&["value-lint", "--help"]).0, EXIT_OK);
    }

    #[test]
    fn catalog_queries() {
        let (code, out, _) = run_str(&["value-lint", "catalog", "query", "conflicts"]);
        assert_eq!(code, 0);
        assert!(out
            .lines()
            .any(|l| l == "android.accessibilityservice\tandroid.security\tV7 (Security)"));
        assert_eq!(out.lines().count(), 4);
        let (_, out, _) = run_str(&["value-lint", "catalog", "query", "match", "android.nfc.tech.IsoDep"]);
        assert_eq!(out, "android.nfc\tV1? V7? V9+\n");
        let (_, out, _) = run_str(&["value-lint", "catalog", "query", "--json", "conflicts"]);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v.as_array().unwrap().len(), 4);
        assert_eq!(run_str(&["value-lint", "catalog", "validate"]).0, 0);
    }

    #[test]
    fn missing_catalog_reports_stage() {
        let (code, _, err) = run_str(&["value-lint", "catalog", "query", "--catalog", "/nonexistent/c.json", "list"]);
        assert_eq!(code, EXIT_ERROR);
        assert!(err.starts_with("error: catalog: "), "{err}");
    }
}
