//! Value smell detection over annotated elements.
//!
//! Rules:
//!
//! | kind                  | severity | fires when                                                     |
//! |-----------------------|----------|----------------------------------------------------------------|
//! | `ValueTension`        | warning  | one API in an element's direct evidence is `+` and `-` on different values |
//! | `ValueConflict`       | error    | an effective value state is `Conflict`                         |
//! | `UnreviewedUnknown`   | info     | an effective value state is `Unknown`                          |
//! | `UnmitigatedNegative` | warning  | an effective value state is `Negative` and not suppressed      |
//! | `MissingValueSupport` | warning  | a policy-required value has no positive evidence anywhere      |
//!
//! Effective-state smells are reported where the state originates: an
//! element whose evidence for the value is identical to one of its
//! children's defers to that child, so a conflict inside a method is not
//! repeated on its class and package.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::annotator::{AnnotatedElement, Annotations, ContributingFact};
use crate::catalog::Catalog;
use crate::error::{check_format_version, read_to_string, write_string, Error, Result};
use crate::facts::SourceSpan;
use crate::is_segment_prefix;
use crate::value_model::{AggregateState, Relation, StateKind, ValueId, ValueProfile};

pub const POLICY_FORMAT_VERSION: &str = "1";

/// Element name used for project-level smells.
pub const PROJECT_ELEMENT: &str = "<project>";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SmellKind {
    ValueTension,
    ValueConflict,
    UnreviewedUnknown,
    UnmitigatedNegative,
    MissingValueSupport,
}

impl SmellKind {
    pub const ALL: [SmellKind; 5] = [
        SmellKind::ValueTension,
        SmellKind::ValueConflict,
        SmellKind::UnreviewedUnknown,
        SmellKind::UnmitigatedNegative,
        SmellKind::MissingValueSupport,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SmellKind::ValueTension => "ValueTension",
            SmellKind::ValueConflict => "ValueConflict",
            SmellKind::UnreviewedUnknown => "UnreviewedUnknown",
            SmellKind::UnmitigatedNegative => "UnmitigatedNegative",
            SmellKind::MissingValueSupport => "MissingValueSupport",
        }
    }

    pub fn severity(self) -> Severity {
        match self {
            SmellKind::ValueConflict => Severity::Error,
            SmellKind::UnreviewedUnknown => Severity::Info,
            SmellKind::ValueTension
            | SmellKind::UnmitigatedNegative
            | SmellKind::MissingValueSupport => Severity::Warning,
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            SmellKind::ValueTension => {
                "A single API is positive for some values and negative for others."
            }
            SmellKind::ValueConflict => {
                "Different APIs used by one element pull the same value in opposite directions."
            }
            SmellKind::UnreviewedUnknown => {
                "An API's relation to a value has not been established (±)."
            }
            SmellKind::UnmitigatedNegative => {
                "An element negatively affects a value and no justified suppression exists."
            }
            SmellKind::MissingValueSupport => {
                "A value required by the project policy is not positively supported anywhere."
            }
        }
    }
}

impl fmt::Display for SmellKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for SmellKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        SmellKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown smell kind {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Info,
    Warning,
    Error,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Info => "info",
            Severity::Warning => "warning",
            Severity::Error => "error",
        })
    }
}

impl std::str::FromStr for Severity {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "info" => Ok(Severity::Info),
            "warning" => Ok(Severity::Warning),
            "error" => Ok(Severity::Error),
            _ => Err(format!("unknown severity {s:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SmellEvidence {
    pub span: SourceSpan,
    pub pattern: String,
    pub relation: Relation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValueSmell {
    pub kind: SmellKind,
    pub element: String,
    pub values: Vec<ValueId>,
    pub severity: Severity,
    pub evidence: Vec<SmellEvidence>,
    /// Declaration of `element`; absent for project-level smells.
    pub location: Option<SourceSpan>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RequiredValue {
    pub value: ValueId,
    pub rationale: String,
}

/// Silences `UnmitigatedNegative` for one value. `element` is an element
/// name, a namespace glob ending in `.*` (or `*` alone), or an API pattern
/// that covers every negative source of the smell.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Suppression {
    pub element: String,
    pub value: ValueId,
    pub justification: String,
}

impl Suppression {
    fn matches(&self, smell: &ValueSmell) -> bool {
        if smell.kind != SmellKind::UnmitigatedNegative || !smell.values.contains(&self.value) {
            return false;
        }
        let target = self.element.as_str();
        if target == "*" || target == smell.element {
            return true;
        }
        if let Some(ns) = target.strip_suffix(".*") {
            if is_segment_prefix(ns, &smell.element) {
                return true;
            }
        }
        !smell.evidence.is_empty()
            && smell
                .evidence
                .iter()
                .all(|e| is_segment_prefix(target, &e.pattern))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Policy {
    #[serde(default)]
    pub required_values: Vec<RequiredValue>,
    #[serde(default)]
    pub suppressions: Vec<Suppression>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PolicyFile {
    version: String,
    #[serde(default)]
    required_values: Vec<RequiredValue>,
    #[serde(default)]
    suppressions: Vec<Suppression>,
}

impl Policy {
    pub fn parse(text: &str, origin: &str) -> Result<Policy> {
        let file: PolicyFile = serde_json::from_str(text).map_err(|e| Error::parse(origin, &e))?;
        check_format_version(origin, &file.version, POLICY_FORMAT_VERSION)?;
        for (i, s) in file.suppressions.iter().enumerate() {
            if s.justification.trim().is_empty() {
                return Err(Error::validation(
                    origin,
                    format!("suppression #{} ({} {})", i + 1, s.element, s.value),
                    "justification must not be empty",
                ));
            }
            if s.element.trim().is_empty() {
                return Err(Error::validation(
                    origin,
                    format!("suppression #{}", i + 1),
                    "element must not be empty",
                ));
            }
        }
        Ok(Policy {
            required_values: file.required_values,
            suppressions: file.suppressions,
        })
    }

    pub fn load(path: &Path) -> Result<Policy> {
        Policy::parse(&read_to_string(path)?, &path.display().to_string())
    }

    pub fn to_json(&self) -> String {
        let file = PolicyFile {
            version: POLICY_FORMAT_VERSION.to_string(),
            required_values: self.required_values.clone(),
            suppressions: self.suppressions.clone(),
        };
        let mut s = serde_json::to_string_pretty(&file).expect("policy serializes");
        s.push('\n');
        s
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_string(path, &self.to_json())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Inspection {
    pub smells: Vec<ValueSmell>,
    /// Smells removed by a policy suppression.
    pub suppressed: Vec<ValueSmell>,
}

fn relation_list(values: &[ValueId]) -> String {
    values
        .iter()
        .map(|v| v.canonical_name())
        .collect::<Vec<_>>()
        .join(", ")
}

/// Evidence spans: the call site for propagated facts, the fact itself
/// otherwise.
fn fact_span(c: &ContributingFact) -> &SourceSpan {
    c.via_call.as_ref().map_or(&c.fact.span, |call| &call.span)
}

/// Applies every rule and returns smells sorted by location, element, kind
/// and values.
pub fn inspect(annotated: &Annotations, policy: &Policy, catalog: &Catalog) -> Inspection {
    let mut children: BTreeMap<&str, Vec<&AnnotatedElement>> = BTreeMap::new();
    for a in annotated.values() {
        if let Some(p) = &a.parent {
            children.entry(p.as_str()).or_default().push(a);
        }
    }
    // contributing facts of each element's whole subtree
    let mut subtree: BTreeMap<&str, Vec<&ContributingFact>> = BTreeMap::new();
    for a in annotated.values() {
        let mut cur = Some(a);
        let mut guard = 0;
        while let Some(e) = cur {
            subtree
                .entry(e.element.as_str())
                .or_default()
                .extend(a.contributing_facts.iter());
            cur = e.parent.as_deref().and_then(|p| annotated.get(p));
            guard += 1;
            if guard > annotated.len() {
                break;
            }
        }
    }

    let mut smells = Vec::new();
    let mut suppressed = Vec::new();
    for a in annotated.values() {
        tension_smells(a, catalog, &mut smells);

        let kids = children.get(a.element.as_str()).map(Vec::as_slice).unwrap_or(&[]);
        let facts = subtree.get(a.element.as_str()).map(Vec::as_slice).unwrap_or(&[]);
        for (value, state) in a.effective_profile.iter() {
            let kind = match state.kind() {
                StateKind::Conflict => SmellKind::ValueConflict,
                StateKind::Unknown => SmellKind::UnreviewedUnknown,
                StateKind::Negative => SmellKind::UnmitigatedNegative,
                StateKind::Positive | StateKind::NonRelevant => continue,
            };
            let inherited = kids
                .iter()
                .any(|c| c.effective_profile.get(value).map(AggregateState::evidence) == Some(state.evidence()));
            if inherited {
                continue;
            }
            let smell = state_smell(a, value, state, kind, facts);
            if kind == SmellKind::UnmitigatedNegative
                && policy.suppressions.iter().any(|s| s.matches(&smell))
            {
                suppressed.push(smell);
            } else {
                smells.push(smell);
            }
        }
    }

    let mut required = BTreeMap::new();
    for r in &policy.required_values {
        required.entry(r.value).or_insert(r.rationale.as_str());
    }
    for (value, rationale) in required {
        let supported = annotated.values().any(|a| {
            a.direct_profile
                .get(value)
                .is_some_and(|s| s.has_relation(Relation::Positive))
        });
        if !supported {
            let why = if rationale.trim().is_empty() {
                String::new()
            } else {
                format!(" [rationale: {}]", rationale.trim())
            };
            smells.push(ValueSmell {
                kind: SmellKind::MissingValueSupport,
                element: PROJECT_ELEMENT.to_string(),
                values: vec![value],
                severity: SmellKind::MissingValueSupport.severity(),
                evidence: Vec::new(),
                location: None,
                message: format!(
                    "policy requires {} ({value}){why} but no code element has positive evidence for it",
                    value.canonical_name()
                ),
            });
        }
    }

    sort_smells(&mut smells);
    sort_smells(&mut suppressed);
    Inspection { smells, suppressed }
}

pub fn sort_smells(smells: &mut [ValueSmell]) {
    smells.sort_by(|a, b| {
        (a.location.is_none(), &a.location, &a.element, a.kind, &a.values, &a.evidence).cmp(&(
            b.location.is_none(),
            &b.location,
            &b.element,
            b.kind,
            &b.values,
            &b.evidence,
        ))
    });
}

fn tension_smells(a: &AnnotatedElement, catalog: &Catalog, out: &mut Vec<ValueSmell>) {
    let mut by_source: BTreeMap<&str, ValueProfile> = BTreeMap::new();
    for (value, state) in a.direct_profile.iter() {
        for ev in state.evidence() {
            let p = by_source.entry(ev.source.as_str()).or_default();
            p.set(value, ev.relation);
        }
    }
    for (pattern, evidence_profile) in by_source {
        let profile = catalog
            .get(pattern)
            .map_or(&evidence_profile, |api| &api.profile);
        let pos = profile.values_with(Relation::Positive);
        let neg = profile.values_with(Relation::Negative);
        if pos.is_empty() || neg.is_empty() {
            continue;
        }
        let mut values: Vec<ValueId> = pos.iter().chain(&neg).copied().collect();
        values.sort();
        let spans: BTreeSet<&SourceSpan> = a
            .contributing_facts
            .iter()
            .filter(|c| c.pattern == pattern)
            .map(fact_span)
            .collect();
        let evidence = spans
            .into_iter()
            .flat_map(|s| {
                [Relation::Positive, Relation::Negative].map(|relation| SmellEvidence {
                    span: s.clone(),
                    pattern: pattern.to_string(),
                    relation,
                })
            })
            .collect();
        out.push(ValueSmell {
            kind: SmellKind::ValueTension,
            element: a.element.clone(),
            values,
            severity: SmellKind::ValueTension.severity(),
            evidence,
            location: Some(a.span.clone()),
            message: format!(
                "{pattern} supports {} but works against {}",
                relation_list(&pos),
                relation_list(&neg)
            ),
        });
    }
}

fn state_smell(
    a: &AnnotatedElement,
    value: ValueId,
    state: &AggregateState,
    kind: SmellKind,
    facts: &[&ContributingFact],
) -> ValueSmell {
    let mut evidence: BTreeSet<SmellEvidence> = BTreeSet::new();
    for ev in state.evidence() {
        for c in facts.iter().filter(|c| c.pattern == ev.source) {
            evidence.insert(SmellEvidence {
                span: fact_span(c).clone(),
                pattern: ev.source.clone(),
                relation: ev.relation,
            });
        }
    }
    let name = value.canonical_name();
    let sources = |r: Relation| state.sources_with(r).collect::<Vec<_>>().join(", ");
    let message = match kind {
        SmellKind::ValueConflict => format!(
            "{name} ({value}) is supported by {} but undermined by {}",
            sources(Relation::Positive),
            sources(Relation::Negative)
        ),
        SmellKind::UnreviewedUnknown => {
            let mixed = state.has_relation(Relation::Positive) || state.has_relation(Relation::Negative);
            let mut m = format!(
                "relation of {} to {name} ({value}) is unknown",
                sources(Relation::Unknown)
            );
            if mixed {
                m.push_str("; signed evidence is also present, precedence needs review");
            }
            m
        }
        _ => format!(
            "{name} ({value}) is negatively affected by {}",
            sources(Relation::Negative)
        ),
    };
    ValueSmell {
        kind,
        element: a.element.clone(),
        values: vec![value],
        severity: kind.severity(),
        evidence: evidence.into_iter().collect(),
        location: Some(a.span.clone()),
        message,
    }
}
