//! SARIF 2.1.0 output: one run, one rule per smell kind, one result per
//! smell.

use serde_json::{json, Map, Value};

use super::AnalysisReport;
use crate::facts::SourceSpan;
use crate::inspector::{Severity, SmellKind};

pub const SARIF_VERSION: &str = "2.1.0";
pub const SARIF_SCHEMA_URI: &str = "https://json.schemastore.org/sarif-2.1.0.json";

fn level(sev: Severity) -> &'static str {
    match sev {
        Severity::Error => "error",
        Severity::Warning => "warning",
        Severity::Info => "note",
    }
}

/// Percent-encodes characters that may not appear in a relative URI path.
fn uri(path: &str) -> String {
    let mut out = String::new();
    for c in path.replace('\\', "/").chars() {
        if c.is_ascii_alphanumeric() || "/-._~!$&'()*+,;=:@".contains(c) {
            out.push(c);
        } else {
            let mut buf = [0u8; 4];
            for b in c.encode_utf8(&mut buf).bytes() {
                out.push_str(&format!("%{b:02X}"));
            }
        }
    }
    out
}

fn physical(span: &SourceSpan) -> Value {
    json!({
        "artifactLocation": { "uri": uri(&span.file) },
        "region": {
            "startLine": span.start_line,
            "startColumn": span.start_col,
            "endLine": span.end_line,
            "endColumn": span.end_col,
        }
    })
}

pub fn to_sarif(report: &AnalysisReport) -> Value {
    let rules: Vec<Value> = SmellKind::ALL
        .iter()
        .map(|k| {
            json!({
                "id": k.as_str(),
                "shortDescription": { "text": k.description() },
                "defaultConfiguration": { "level": level(k.severity()) },
            })
        })
        .collect();

    let results: Vec<Value> = report
        .smells
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let mut r = Map::new();
            r.insert("ruleId".into(), json!(s.kind.as_str()));
            let rule_index = SmellKind::ALL.iter().position(|k| *k == s.kind).unwrap_or(0);
            r.insert("ruleIndex".into(), json!(rule_index));
            r.insert("level".into(), json!(level(s.severity)));
            r.insert("message".into(), json!({ "text": s.message }));
            if let Some(loc) = &s.location {
                r.insert(
                    "locations".into(),
                    json!([{
                        "physicalLocation": physical(loc),
                        "logicalLocations": [{ "fullyQualifiedName": s.element }],
                    }]),
                );
            }
            if !s.evidence.is_empty() {
                let related: Vec<Value> = s
                    .evidence
                    .iter()
                    .enumerate()
                    .map(|(j, e)| {
                        json!({
                            "id": j,
                            "physicalLocation": physical(&e.span),
                            "message": { "text": format!("{} ({})", e.pattern, e.relation.display_sign()) },
                        })
                    })
                    .collect();
                r.insert("relatedLocations".into(), Value::Array(related));
            }
            let recs: Vec<&str> = report
                .recommendations_for(i)
                .map(|r| r.rendered_text.as_str())
                .collect();
            r.insert(
                "properties".into(),
                json!({
                    "element": s.element,
                    "values": s.values.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
                    "recommendations": recs,
                }),
            );
            Value::Object(r)
        })
        .collect();

    json!({
        "$schema": SARIF_SCHEMA_URI,
        "version": SARIF_VERSION,
        "runs": [{
            "tool": {
                "driver": {
                    "name": crate::TOOL_NAME,
                    "version": report.tool_version,
                    "rules": rules,
                }
            },
            "results": results,
            "properties": {
                "runTimestamp": report.run_timestamp,
                "catalogVersion": report.catalog_version,
                "annotatedCount": report.annotated_count,
                "suppressedCount": report.suppressed_count,
            }
        }]
    })
}
