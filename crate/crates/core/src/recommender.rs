//! Maps value smells to advice from a rule file.
//!
//! A rule matches a smell when its `kind` is equal, its optional `api` is a
//! segment prefix of some evidence pattern, and its optional `value` is one
//! of the smell's values. Among matching rules the most specific wins:
//! `api + value` over `value` over `api` over kind alone. Equal specificity
//! goes to the rule listed first. Smells no rule matches get a generic
//! review recommendation.
//!
//! `advice` and `fix_hint` may use the placeholders `{element}`, `{values}`
//! and `{api}`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::catalog::validate_pattern;
use crate::error::{check_format_version, read_to_string, write_string, Error, Result};
use crate::inspector::{SmellKind, ValueSmell};
use crate::is_segment_prefix;
use crate::value_model::ValueId;

pub const RULES_FORMAT_VERSION: &str = "1";

const BUILTIN_RULES: &str = include_str!("../data/rules.json");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleMatch {
    pub kind: SmellKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub api: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<ValueId>,
}

impl RuleMatch {
    pub fn specificity(&self) -> u8 {
        match (&self.api, &self.value) {
            (Some(_), Some(_)) => 3,
            (None, Some(_)) => 2,
            (Some(_), None) => 1,
            (None, None) => 0,
        }
    }

    pub fn matches(&self, smell: &ValueSmell) -> bool {
        self.kind == smell.kind
            && self.value.is_none_or(|v| smell.values.contains(&v))
            && self.api.as_deref().is_none_or(|api| {
                smell.evidence.iter().any(|e| is_segment_prefix(api, &e.pattern))
            })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecommendationRule {
    #[serde(rename = "match")]
    pub matcher: RuleMatch,
    pub advice: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fix_hint: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub references: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tradeoffs: Option<String>,
}

impl RecommendationRule {
    /// Kind-only rule used when nothing else matches.
    pub fn fallback(kind: SmellKind) -> Self {
        RecommendationRule {
            matcher: RuleMatch {
                kind,
                api: None,
                value: None,
            },
            advice: "Review the value impact of {element} on {values} and record the outcome in the project policy.".to_string(),
            fix_hint: None,
            references: Vec::new(),
            tradeoffs: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Recommendation {
    /// Index into the smell list passed to [`recommend`].
    pub smell: usize,
    pub rule: RecommendationRule,
    pub rendered_text: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RuleSet {
    pub rules: Vec<RecommendationRule>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RulesFile {
    version: String,
    rules: Vec<RecommendationRule>,
}

impl RuleSet {
    /// The three shipped rules.
    pub fn builtin() -> RuleSet {
        RuleSet::parse(BUILTIN_RULES, "<builtin rules>").expect("shipped rules are valid")
    }

    pub fn parse(text: &str, origin: &str) -> Result<RuleSet> {
        let file: RulesFile = serde_json::from_str(text).map_err(|e| Error::parse(origin, &e))?;
        check_format_version(origin, &file.version, RULES_FORMAT_VERSION)?;
        for (i, r) in file.rules.iter().enumerate() {
            let ctx = || format!("rule #{}", i + 1);
            if r.advice.trim().is_empty() {
                return Err(Error::validation(origin, ctx(), "advice must not be empty"));
            }
            if let Some(api) = &r.matcher.api {
                validate_pattern(api).map_err(|m| Error::validation(origin, ctx(), m))?;
            }
        }
        Ok(RuleSet { rules: file.rules })
    }

    pub fn load(path: &Path) -> Result<RuleSet> {
        RuleSet::parse(&read_to_string(path)?, &path.display().to_string())
    }

    pub fn to_json(&self) -> String {
        let file = RulesFile {
            version: RULES_FORMAT_VERSION.to_string(),
            rules: self.rules.clone(),
        };
        let mut s = serde_json::to_string_pretty(&file).expect("rules serialize");
        s.push('\n');
        s
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_string(path, &self.to_json())
    }

    /// `self` followed by `other`; earlier rules win ties.
    pub fn then(mut self, other: RuleSet) -> RuleSet {
        self.rules.extend(other.rules);
        self
    }

    /// Most specific matching rule, earliest on ties.
    pub fn best_match(&self, smell: &ValueSmell) -> Option<&RecommendationRule> {
        let mut best: Option<&RecommendationRule> = None;
        for r in self.rules.iter().filter(|r| r.matcher.matches(smell)) {
            if best.is_none_or(|b| r.matcher.specificity() > b.matcher.specificity()) {
                best = Some(r);
            }
        }
        best
    }
}

fn fill(template: &str, smell: &ValueSmell, api: &str) -> String {
    let values = smell
        .values
        .iter()
        .map(|v| format!("{} ({v})", v.canonical_name()))
        .collect::<Vec<_>>()
        .join(", ");
    template
        .replace("{element}", &smell.element)
        .replace("{values}", &values)
        .replace("{api}", api)
}

pub fn render_recommendation(smell: &ValueSmell, rule: &RecommendationRule) -> String {
    let api = rule
        .matcher
        .api
        .clone()
        .or_else(|| smell.evidence.first().map(|e| e.pattern.clone()))
        .unwrap_or_default();
    let mut text = fill(&rule.advice, smell, &api);
    if let Some(h) = &rule.fix_hint {
        text.push_str("\nFix: ");
        text.push_str(&fill(h, smell, &api));
    }
    if let Some(t) = &rule.tradeoffs {
        text.push_str("\nTrade-off: ");
        text.push_str(t);
    }
    if !rule.references.is_empty() {
        text.push_str("\nSee: ");
        text.push_str(&rule.references.join(", "));
    }
    text
}

/// One recommendation per smell, in smell order.
pub fn recommend(smells: &[ValueSmell], rules: &RuleSet) -> Vec<Recommendation> {
    smells
        .iter()
        .enumerate()
        .map(|(i, smell)| {
            let rule = rules
                .best_match(smell)
                .cloned()
                .unwrap_or_else(|| RecommendationRule::fallback(smell.kind));
            Recommendation {
                smell: i,
                rendered_text: render_recommendation(smell, &rule),
                rule,
            }
        })
        .collect()
}
