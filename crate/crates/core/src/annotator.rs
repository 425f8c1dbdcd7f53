//! Value annotation of code elements.
//!
//! An element's direct profile collects the catalog profiles of every API it
//! interacts with; its effective profile additionally absorbs the direct
//! profiles of everything it contains (method → class → package).

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::catalog::Catalog;
use crate::error::{check_format_version, read_to_string, Error, Result};
use crate::facts::{ElementKind, FactSet, SourceSpan, UsageFact, UsageKind};
use crate::value_model::{AggregateProfile, StateKind, ValueId};

pub const SIDECAR_FORMAT_VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContributingFact {
    pub fact: UsageFact,
    /// Catalog pattern matched by `fact.api_name`.
    pub pattern: String,
    /// Set when the fact belongs to a callee and reached this element
    /// through call propagation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub via_call: Option<UsageFact>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotatedElement {
    pub element: String,
    pub kind: ElementKind,
    pub span: SourceSpan,
    pub parent: Option<String>,
    pub direct_profile: AggregateProfile,
    pub effective_profile: AggregateProfile,
    pub contributing_facts: Vec<ContributingFact>,
}

pub type Annotations = BTreeMap<String, AnnotatedElement>;

#[derive(Debug, Clone, Copy, Default)]
pub struct AnnotateOptions {
    /// Also absorb the direct profile of intra-project callees (depth 1).
    pub propagate_calls: bool,
}

/// Annotates every element of `facts` against `catalog`.
pub fn annotate(facts: &FactSet, catalog: &Catalog, options: AnnotateOptions) -> Result<Annotations> {
    facts.validate("facts")?;
    let mut out: Annotations = facts
        .elements
        .iter()
        .map(|e| {
            (
                e.fq_name.clone(),
                AnnotatedElement {
                    element: e.fq_name.clone(),
                    kind: e.kind,
                    span: e.span.clone(),
                    parent: e.parent.clone(),
                    direct_profile: AggregateProfile::new(),
                    effective_profile: AggregateProfile::new(),
                    contributing_facts: Vec::new(),
                },
            )
        })
        .collect();

    for fact in &facts.facts {
        let Some(api) = catalog.match_api(&fact.api_name) else {
            continue;
        };
        let el = out.get_mut(&fact.element).expect("validated");
        // evidence is keyed by pattern, so repeated use of one API counts once
        el.direct_profile.add_profile(&api.pattern, &api.profile);
        el.contributing_facts.push(ContributingFact {
            fact: fact.clone(),
            pattern: api.pattern.clone(),
            via_call: None,
        });
    }

    if options.propagate_calls {
        let snapshot: BTreeMap<String, (AggregateProfile, Vec<ContributingFact>)> = out
            .iter()
            .map(|(k, v)| (k.clone(), (v.direct_profile.clone(), v.contributing_facts.clone())))
            .collect();
        for fact in facts.facts.iter().filter(|f| f.usage_kind == UsageKind::Call) {
            if fact.api_name == fact.element {
                continue;
            }
            let Some((profile, contributing)) = snapshot.get(&fact.api_name) else {
                continue;
            };
            let el = out.get_mut(&fact.element).expect("validated");
            el.direct_profile.absorb(profile);
            for c in contributing.iter().filter(|c| c.via_call.is_none()) {
                el.contributing_facts.push(ContributingFact {
                    fact: c.fact.clone(),
                    pattern: c.pattern.clone(),
                    via_call: Some(fact.clone()),
                });
            }
        }
    }

    for el in out.values_mut() {
        el.contributing_facts.sort_by(|a, b| {
            (&a.fact, &a.pattern, &a.via_call).cmp(&(&b.fact, &b.pattern, &b.via_call))
        });
        el.contributing_facts.dedup();
    }

    // effective = own direct ∪ children's effective, computed leaves-first
    let mut children: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for e in &facts.elements {
        if let Some(p) = &e.parent {
            children.entry(p.as_str()).or_default().push(e.fq_name.as_str());
        }
    }
    let mut order: Vec<String> = Vec::with_capacity(out.len());
    let mut visited: BTreeSet<&str> = BTreeSet::new();
    for e in &facts.elements {
        post_order(e.fq_name.as_str(), &children, &mut visited, &mut order);
    }
    for name in order {
        let mut eff = out[&name].direct_profile.clone();
        if let Some(kids) = children.get(name.as_str()) {
            for k in kids {
                eff.absorb(&out[*k].effective_profile);
            }
        }
        out.get_mut(&name).expect("present").effective_profile = eff;
    }
    Ok(out)
}

fn post_order<'a>(
    node: &'a str,
    children: &BTreeMap<&'a str, Vec<&'a str>>,
    visited: &mut BTreeSet<&'a str>,
    order: &mut Vec<String>,
) {
    if !visited.insert(node) {
        return;
    }
    if let Some(kids) = children.get(node) {
        for k in kids {
            post_order(k, children, visited, order);
        }
    }
    order.push(node.to_string());
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sidecar {
    pub version: String,
    pub tool: String,
    pub catalog_version: String,
    pub annotations: Annotations,
}

impl Sidecar {
    pub fn new(annotations: Annotations, catalog_version: &str) -> Self {
        Sidecar {
            version: SIDECAR_FORMAT_VERSION.to_string(),
            tool: format!("{} {}", crate::TOOL_NAME, crate::TOOL_VERSION),
            catalog_version: catalog_version.to_string(),
            annotations,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("sidecar serializes");
        s.push('\n');
        s
    }

    pub fn parse(text: &str, origin: &str) -> Result<Sidecar> {
        let sc: Sidecar = serde_json::from_str(text).map_err(|e| Error::parse(origin, &e))?;
        check_format_version(origin, &sc.version, SIDECAR_FORMAT_VERSION)?;
        for (key, el) in &sc.annotations {
            if *key != el.element {
                return Err(Error::validation(
                    origin,
                    format!("annotation {key}"),
                    format!("key does not match element name {:?}", el.element),
                ));
            }
        }
        Ok(sc)
    }

    pub fn load(path: &Path) -> Result<Sidecar> {
        Sidecar::parse(&read_to_string(path)?, &path.display().to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnnotationFormat {
    Sidecar,
    InlineSuggestions,
}

/// Suggested annotation comment to insert above an element's declaration.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct InlineSuggestion {
    pub file: String,
    /// Line the comment goes above.
    pub line: u32,
    pub element: String,
    pub text: String,
}

/// `Self Direction(−), Security(−), ...` in value id order.
pub fn describe_profile(profile: &AggregateProfile) -> String {
    profile
        .iter()
        .filter(|(_, s)| s.kind() != StateKind::NonRelevant)
        .map(|(v, s)| format!("{}({})", v.canonical_name(), s.kind().display_sign()))
        .collect::<Vec<_>>()
        .join(", ")
}

/// One suggestion per annotated class, interface, method or field. Packages
/// have no single declaration site and are skipped.
pub fn inline_suggestions(annotations: &Annotations) -> Vec<InlineSuggestion> {
    let mut out: Vec<InlineSuggestion> = annotations
        .values()
        .filter(|a| a.kind != ElementKind::Package && !a.effective_profile.is_empty())
        .map(|a| InlineSuggestion {
            file: a.span.file.clone(),
            line: a.span.start_line,
            element: a.element.clone(),
            text: format!("// @ValueAnnotation({})", describe_profile(&a.effective_profile)),
        })
        .collect();
    out.sort();
    out
}

/// Patch preview in unified-diff form containing only comment insertions.
/// When `source_root` is given the inserted comment copies the indentation
/// of the line it precedes. Source files are never modified.
pub fn render_inline_preview(suggestions: &[InlineSuggestion], source_root: Option<&Path>) -> String {
    let mut out = String::new();
    let mut by_file: BTreeMap<&str, Vec<&InlineSuggestion>> = BTreeMap::new();
    for s in suggestions {
        by_file.entry(s.file.as_str()).or_default().push(s);
    }
    for (file, list) in by_file {
        let lines: Vec<String> = source_root
            .and_then(|r| std::fs::read_to_string(r.join(file)).ok())
            .map(|t| t.lines().map(str::to_string).collect())
            .unwrap_or_default();
        out.push_str(&format!("--- a/{file}\n+++ b/{file}\n"));
        let mut seen = BTreeSet::new();
        let mut shift = 0u32;
        for s in list {
            if !seen.insert((s.line, s.text.as_str())) {
                continue;
            }
            let indent: String = lines
                .get(s.line as usize - 1)
                .map(|l| l.chars().take_while(|c| c.is_whitespace()).collect())
                .unwrap_or_default();
            out.push_str(&format!(
                "@@ -{},0 +{},1 @@\n+{indent}{}\n",
                s.line - 1,
                s.line + shift,
                s.text
            ));
            shift += 1;
        }
    }
    out
}

pub fn emit_annotations(
    annotations: &Annotations,
    format: AnnotationFormat,
    catalog_version: &str,
    source_root: Option<&Path>,
) -> String {
    match format {
        AnnotationFormat::Sidecar => Sidecar::new(annotations.clone(), catalog_version).to_json(),
        AnnotationFormat::InlineSuggestions => {
            render_inline_preview(&inline_suggestions(annotations), source_root)
        }
    }
}

/// Values with a given state in a profile.
pub fn values_in_state(profile: &AggregateProfile, state: StateKind) -> Vec<ValueId> {
    profile
        .iter()
        .filter(|(_, s)| s.kind() == state)
        .map(|(v, _)| v)
        .collect()
}
