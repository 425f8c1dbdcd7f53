use std::collections::BTreeMap;
use std::fmt::Write;

use super::AnalysisReport;
use crate::inspector::{Severity, SmellKind, ValueSmell, PROJECT_ELEMENT};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TextOptions {
    pub color: bool,
}

fn paint(on: bool, code: &str, s: &str) -> String {
    if on {
        format!("\x1b[{code}m{s}\x1b[0m")
    } else {
        s.to_string()
    }
}

fn severity_label(sev: Severity, color: bool) -> String {
    let code = match sev {
        Severity::Error => "1;31",
        Severity::Warning => "33",
        Severity::Info => "36",
    };
    paint(color, code, &sev.to_string())
}

fn indent(text: &str, prefix: &str) -> String {
    text.lines()
        .map(|l| format!("{prefix}{l}\n"))
        .collect()
}

/// (project-level, file) -> element -> indexed smells
type Groups<'a> = BTreeMap<(bool, String), BTreeMap<&'a str, Vec<(usize, &'a ValueSmell)>>>;

/// Smells grouped by file, then element.
pub(super) fn render_text(report: &AnalysisReport, opts: TextOptions) -> String {
    let mut groups: Groups<'_> = BTreeMap::new();
    for (i, s) in report.smells.iter().enumerate() {
        let file = match &s.location {
            Some(l) => (false, l.file.clone()),
            None => (true, PROJECT_ELEMENT.to_string()),
        };
        groups
            .entry(file)
            .or_default()
            .entry(s.element.as_str())
            .or_default()
            .push((i, s));
    }

    let mut out = String::new();
    let _ = writeln!(
        out,
        "{} {} (catalog {}, {})",
        crate::TOOL_NAME,
        report.tool_version,
        report.catalog_version,
        report.run_timestamp
    );
    for d in &report.diagnostics {
        let _ = writeln!(out, "{:?}: {}: {}", d.level, d.file, d.message);
    }
    for ((_, file), elements) in &groups {
        let _ = writeln!(out, "\n{}", paint(opts.color, "1", file));
        for (element, smells) in elements {
            let at = smells[0]
                .1
                .location
                .as_ref()
                .map(|l| format!(" ({}:{})", l.start_line, l.start_col))
                .unwrap_or_default();
            if *element != PROJECT_ELEMENT {
                let _ = writeln!(out, "  {element}{at}");
            }
            for (i, s) in smells {
                let values = s.values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", ");
                let _ = writeln!(
                    out,
                    "    {} {} [{values}]: {}",
                    severity_label(s.severity, opts.color),
                    s.kind,
                    s.message
                );
                for e in &s.evidence {
                    let _ = writeln!(
                        out,
                        "      at {}:{}:{} {} ({})",
                        e.span.file,
                        e.span.start_line,
                        e.span.start_col,
                        e.pattern,
                        e.relation.display_sign()
                    );
                }
                for r in report.recommendations_for(*i) {
                    out.push_str(&indent(&r.rendered_text, "      > "));
                }
            }
        }
    }

    let total: usize = report.smell_counts.values().sum();
    let _ = writeln!(
        out,
        "\n{} annotated element(s), {total} smell(s), {} suppressed",
        report.annotated_count, report.suppressed_count
    );
    for kind in SmellKind::ALL {
        let n = report.count(kind);
        if n > 0 {
            let _ = writeln!(out, "  {kind}: {n}");
        }
    }
    out
}
