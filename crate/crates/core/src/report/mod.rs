//! Analysis report and its renderings.

mod sarif;
mod text;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::annotator::{Annotations, Sidecar};
use crate::error::{Error, Result};
use crate::facts::Diagnostic;
use crate::inspector::{Inspection, SmellKind, ValueSmell};
use crate::recommender::Recommendation;

pub use sarif::{to_sarif, SARIF_SCHEMA_URI, SARIF_VERSION};
pub use text::TextOptions;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub tool_version: String,
    pub run_timestamp: String,
    pub catalog_version: String,
    /// Elements with at least one relevant value.
    pub annotated_count: usize,
    pub smell_counts: BTreeMap<SmellKind, usize>,
    pub suppressed_count: usize,
    pub smells: Vec<ValueSmell>,
    pub recommendations: Vec<Recommendation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub annotations: Option<Sidecar>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<Diagnostic>,
}

impl AnalysisReport {
    pub fn new(
        run_timestamp: impl Into<String>,
        catalog_version: &str,
        annotations: &Annotations,
        inspection: Inspection,
        recommendations: Vec<Recommendation>,
    ) -> AnalysisReport {
        let mut smell_counts: BTreeMap<SmellKind, usize> =
            SmellKind::ALL.iter().map(|k| (*k, 0)).collect();
        for s in &inspection.smells {
            *smell_counts.entry(s.kind).or_default() += 1;
        }
        AnalysisReport {
            tool_version: crate::TOOL_VERSION.to_string(),
            run_timestamp: run_timestamp.into(),
            catalog_version: catalog_version.to_string(),
            annotated_count: annotations
                .values()
                .filter(|a| !a.effective_profile.is_empty())
                .count(),
            smell_counts,
            suppressed_count: inspection.suppressed.len(),
            smells: inspection.smells,
            recommendations,
            annotations: None,
            diagnostics: Vec::new(),
        }
    }

    pub fn with_annotations(mut self, sidecar: Sidecar) -> Self {
        self.annotations = Some(sidecar);
        self
    }

    pub fn with_diagnostics(mut self, diagnostics: Vec<Diagnostic>) -> Self {
        self.diagnostics = diagnostics;
        self
    }

    pub fn count(&self, kind: SmellKind) -> usize {
        self.smell_counts.get(&kind).copied().unwrap_or(0)
    }

    /// Checks that counts agree with the smell list and that every
    /// recommendation points at an existing smell.
    pub fn validate(&self, origin: &str) -> Result<()> {
        for kind in SmellKind::ALL {
            let n = self.smells.iter().filter(|s| s.kind == kind).count();
            if self.count(kind) != n {
                return Err(Error::validation(
                    origin,
                    format!("smell_counts.{kind}"),
                    format!("count {} but {n} smells listed", self.count(kind)),
                ));
            }
        }
        for (i, r) in self.recommendations.iter().enumerate() {
            if r.smell >= self.smells.len() {
                return Err(Error::validation(
                    origin,
                    format!("recommendation #{}", i + 1),
                    format!("smell index {} out of range", r.smell),
                ));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn parse(text: &str, origin: &str) -> Result<AnalysisReport> {
        let r: AnalysisReport = serde_json::from_str(text).map_err(|e| Error::parse(origin, &e))?;
        r.validate(origin)?;
        Ok(r)
    }

    pub fn recommendations_for(&self, smell: usize) -> impl Iterator<Item = &Recommendation> {
        self.recommendations.iter().filter(move |r| r.smell == smell)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReportFormat {
    #[default]
    Text,
    Json,
    Sarif,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" => Ok(ReportFormat::Text),
            "json" => Ok(ReportFormat::Json),
            "sarif" => Ok(ReportFormat::Sarif),
            _ => Err(Error::Usage(format!(
                "unknown report format {s:?} (expected text, json or sarif)"
            ))),
        }
    }
}

impl fmt::Display for ReportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReportFormat::Text => "text",
            ReportFormat::Json => "json",
            ReportFormat::Sarif => "sarif",
        })
    }
}

pub fn render(report: &AnalysisReport, format: ReportFormat) -> String {
    render_with(report, format, TextOptions::default())
}

pub fn render_with(report: &AnalysisReport, format: ReportFormat, options: TextOptions) -> String {
    match format {
        ReportFormat::Text => text::render_text(report, options),
        ReportFormat::Json => report.to_json(),
        ReportFormat::Sarif => {
            let mut s = serde_json::to_string_pretty(&to_sarif(report)).expect("sarif serializes");
            s.push('\n');
            s
        }
    }
}
