//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use common::*;
use value_lint::annotator::{annotate, AnnotateOptions, Annotations, Sidecar};
use value_lint::catalog::{load_catalog, ApiAnnotation, Catalog};
use value_lint::cli::analyze;
use value_lint::facts::{CodeElement, ElementKind, FactSet, SourceSpan, UsageFact, UsageKind};
use value_lint::inspector::{inspect, Policy, RequiredValue, Severity, SmellKind, Suppression, ValueSmell};
use value_lint::recommender::RuleSet;
use value_lint::report::{render, AnalysisReport, ReportFormat};
use value_lint::value_model::{derive_state, merge_profiles, Relation, StateKind, ValueId, ValueProfile};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn within(elapsed: Duration, limit: Duration, what: &str) -> Result<(), String> {
    if elapsed < limit {
        Ok(())
    } else {
        Err(format!("{what} took {elapsed:?}, limit {limit:?}"))
    }
}

// Criterion 1 -------------------------------------------------------------

/// Table of API relevance to V1..V12, one string per row: `+`, `-`, `?`
/// or `.` (not relevant).
const TABLE: [(&str, &str); 9] = [
    ("android.accessibilityservice", "-.....-...++"),
    ("android.animation", "..?........."),
    ("android.app.admin", "....+.+....."),
    ("android.app.role", "+...+.+....."),
    ("android.icu.lang", "..........++"),
    ("android.icu.media", "???........?"),
    ("android.mtp", "?..........."),
    ("android.nfc", "?.....?.+..."),
    ("android.security", "......+....."),
];

fn table_relation(c: u8) -> Relation {
    match c {
        b'+' => Relation::Positive,
        b'-' => Relation::Negative,
        b'?' => Relation::Unknown,
        b'.' => Relation::NonRelevant,
        _ => unreachable!(),
    }
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let catalog = load_catalog(&Path::new(env!("CARGO_MANIFEST_DIR")).join("data/default_catalog.json"))
        .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure!(catalog == Catalog::builtin(), "data file and built-in catalog differ");
    ensure!(catalog.len() == 9, "expected 9 annotations, found {}", catalog.len());
    let mut cells = 0;
    for (pattern, row) in TABLE {
        let api = catalog.get(pattern).ok_or(format!("missing {pattern}"))?;
        for (i, c) in row.bytes().enumerate() {
            let v = ValueId::from_number(i as u8 + 1).unwrap();
            let got = api.profile.get(v);
            ensure!(got == table_relation(c), "{pattern} {v}: expected {:?}, got {got:?}", table_relation(c));
            cells += 1;
        }
    }
    ensure!(cells == 108, "checked {cells} cells");
    within(elapsed, Duration::from_secs(1), "catalog load")?;
    Ok(format!("108 cells match, loaded in {elapsed:?}"))
}

// Criterion 2 -------------------------------------------------------------

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut c = config(&fixture("figure2"));
    c.include_annotations = true;
    let report = analyze(&c).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let sidecar = report.annotations.as_ref().ok_or("no annotations")?;
    let class = sidecar
        .annotations
        .get("NotificationService")
        .ok_or("NotificationService not annotated")?;
    let expected = vec![
        (ValueId::V1, StateKind::Negative),
        (ValueId::V7, StateKind::Negative),
        (ValueId::V11, StateKind::Positive),
        (ValueId::V12, StateKind::Positive),
    ];
    ensure!(class.direct_profile.states() == expected, "direct profile {:?}", class.direct_profile.states());
    ensure!(
        class.effective_profile.states() == expected,
        "effective profile {:?}",
        class.effective_profile.states()
    );
    let tensions = report.count(SmellKind::ValueTension);
    ensure!(tensions == 1, "{tensions} ValueTension smells");
    within(elapsed, Duration::from_secs(1), "analysis")?;
    Ok(format!("class profile {{V1:-, V7:-, V11:+, V12:+}}, 1 ValueTension, {elapsed:?}"))
}

// Criterion 3 -------------------------------------------------------------

fn criterion_3() -> Outcome {
    let mut c = config(&fixture("conflict"));
    c.include_annotations = true;
    let report = analyze(&c).map_err(|e| e.to_string())?;
    let class = &report.annotations.as_ref().unwrap().annotations["com.example.secure.SecureInputService"];
    let state = class.effective_profile.state(ValueId::V7);
    ensure!(state == StateKind::Conflict, "V7 state {state:?}");
    let conflicts: Vec<(usize, &ValueSmell)> = report
        .smells
        .iter()
        .enumerate()
        .filter(|(_, s)| s.kind == SmellKind::ValueConflict)
        .collect();
    ensure!(conflicts.len() == 1, "{} ValueConflict smells", conflicts.len());
    let (i, smell) = conflicts[0];
    ensure!(smell.severity == Severity::Error, "severity {:?}", smell.severity);
    ensure!(smell.values == [ValueId::V7], "values {:?}", smell.values);
    let clause = "improves security but reduces accessibility";
    let ok = report
        .recommendations_for(i)
        .any(|r| r.rule.tradeoffs.as_deref().is_some_and(|t| t.contains(clause)));
    ensure!(ok, "no recommendation with the tradeoff clause");
    Ok("V7 Conflict, 1 ValueConflict(error), tradeoff clause present".into())
}

// Criterion 4 -------------------------------------------------------------

fn criterion_4() -> Outcome {
    let dir = copy_fixture("unicode");
    let mut c = config(dir.path());
    c.policy_path = Some(fixture("unicode-policy.json"));
    let before = analyze(&c).map_err(|e| e.to_string())?;
    let missing: Vec<(usize, &ValueSmell)> = before
        .smells
        .iter()
        .enumerate()
        .filter(|(_, s)| s.kind == SmellKind::MissingValueSupport)
        .collect();
    ensure!(missing.len() == 1, "{} MissingValueSupport smells", missing.len());
    ensure!(missing[0].1.values == [ValueId::V12], "values {:?}", missing[0].1.values);
    let rec = before.recommendations_for(missing[0].0).next().ok_or("no recommendation")?;
    ensure!(
        rec.rendered_text.contains("Unicode") && rec.rendered_text.contains("android.icu"),
        "recommendation {:?}",
        rec.rendered_text
    );

    let file = dir.path().join("com/example/chat/MessageFormatter.java");
    let src = std::fs::read_to_string(&file).unwrap();
    std::fs::write(
        &file,
        src.replacen("import java.util.Locale;", "import java.util.Locale;\nimport android.icu.lang.UCharacter;", 1),
    )
    .unwrap();
    let after = analyze(&c).map_err(|e| e.to_string())?;
    let n = after.count(SmellKind::MissingValueSupport);
    ensure!(n == 0, "{n} MissingValueSupport smells after adding the import");
    Ok("fires without i18n usage, silenced by android.icu.lang import".into())
}

// Criterion 5 -------------------------------------------------------------

fn expected_state(rs: &BTreeSet<Relation>) -> StateKind {
    let pos = rs.contains(&Relation::Positive);
    let neg = rs.contains(&Relation::Negative);
    if pos && neg {
        StateKind::Conflict
    } else if rs.contains(&Relation::Unknown) {
        StateKind::Unknown
    } else if pos {
        StateKind::Positive
    } else if neg {
        StateKind::Negative
    } else {
        StateKind::NonRelevant
    }
}

const RELATIONS: [Relation; 4] = [
    Relation::Positive,
    Relation::Negative,
    Relation::Unknown,
    Relation::NonRelevant,
];

fn random_profile(rng: &mut ChaCha8Rng) -> ValueProfile {
    let mut p = ValueProfile::new();
    for v in ValueId::ALL {
        if rng.gen_bool(0.3) {
            p.set(v, RELATIONS[rng.gen_range(0..3)]);
        }
    }
    p
}

fn criterion_5() -> Outcome {
    let mut subsets = 0;
    for mask in 1u8..16 {
        let set: BTreeSet<Relation> = (0..4).filter(|b| mask & (1 << b) != 0).map(|b| RELATIONS[b]).collect();
        let mut list: Vec<Relation> = set.iter().copied().collect();
        for _ in 0..2 {
            let got = derive_state(list.iter().copied());
            ensure!(got == expected_state(&set), "derive_state({list:?}) = {got:?}");
            list.reverse();
        }
        subsets += 1;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0005);
    let cases = 1200;
    for case in 0..cases {
        let n = rng.gen_range(1..=6);
        let profiles: Vec<ValueProfile> = (0..n).map(|_| random_profile(&mut rng)).collect();
        let ids: Vec<String> = (0..n).map(|i| format!("s{}", rng.gen_range(0..=i))).collect();
        let base = merge_profiles(&profiles, &ids).map_err(|e| e.to_string())?;
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        let p2: Vec<ValueProfile> = order.iter().map(|&i| profiles[i].clone()).collect();
        let i2: Vec<String> = order.iter().map(|&i| ids[i].clone()).collect();
        let shuffled = merge_profiles(&p2, &i2).map_err(|e| e.to_string())?;
        ensure!(base == shuffled, "case {case}: permutation changed the merge");
        for v in ValueId::ALL {
            let rels: BTreeSet<Relation> = profiles.iter().map(|p| p.get(v)).collect();
            ensure!(base.state(v) == expected_state(&rels), "case {case}: state of {v}");
        }
    }
    Ok(format!("{subsets} subsets exhaustive, {cases} seeded permutation cases"))
}

// Criterion 6 -------------------------------------------------------------

const PATTERN_POOL: [&str; 6] = ["x", "x.a", "x.a.b", "y", "y.c", "z.q"];
const API_POOL: [&str; 10] = [
    "x", "x.a", "x.a.b", "x.a.b.C", "x.ab", "x.Q", "y.c.D", "y.D", "z.q.R", "w.W",
];
const KINDS: [UsageKind; 6] = [
    UsageKind::Import,
    UsageKind::Extend,
    UsageKind::Implement,
    UsageKind::Instantiate,
    UsageKind::Reference,
    UsageKind::Annotation,
];

struct Instance {
    facts: FactSet,
    catalog: Catalog,
    policy: Policy,
}

fn random_instance(rng: &mut ChaCha8Rng) -> Instance {
    let span = |line: u32| SourceSpan::new("F.java", (line, 1), (line, 4));
    let mut elements: Vec<CodeElement> = Vec::new();
    for i in 0..rng.gen_range(1..=10u32) {
        let types: Vec<&CodeElement> = elements.iter().filter(|e| e.kind.is_type()).collect();
        let packages: Vec<&CodeElement> = elements.iter().filter(|e| e.kind == ElementKind::Package).collect();
        let kind = match rng.gen_range(0..5) {
            0 => ElementKind::Package,
            1 => ElementKind::Class,
            2 => ElementKind::Interface,
            3 if !types.is_empty() => ElementKind::Method,
            4 if !types.is_empty() => ElementKind::Field,
            _ => ElementKind::Class,
        };
        let parent = match kind {
            ElementKind::Package => None,
            ElementKind::Method | ElementKind::Field => Some(types[rng.gen_range(0..types.len())]),
            _ => {
                let mut candidates: Vec<Option<&CodeElement>> = vec![None];
                candidates.extend(types.iter().chain(&packages).map(|e| Some(*e)));
                candidates[rng.gen_range(0..candidates.len())]
            }
        };
        let fq_name = match parent {
            Some(p) => format!("{}.e{i}", p.fq_name),
            None => format!("e{i}"),
        };
        let parent = parent.map(|p| p.fq_name.clone());
        elements.push(CodeElement {
            kind,
            fq_name,
            span: span(i + 1),
            parent,
        });
    }
    let facts = (0..rng.gen_range(0..=20u32))
        .map(|j| UsageFact {
            element: elements[rng.gen_range(0..elements.len())].fq_name.clone(),
            api_name: API_POOL[rng.gen_range(0..API_POOL.len())].to_string(),
            usage_kind: KINDS[rng.gen_range(0..KINDS.len())],
            span: span(100 + j),
        })
        .collect();
    let mut facts = FactSet { elements, facts };
    facts.canonicalize();

    let mut pool = PATTERN_POOL.to_vec();
    pool.shuffle(rng);
    let annotations = pool[..rng.gen_range(0..=5)]
        .iter()
        .map(|p| {
            let mut profile = ValueProfile::new();
            for v in &ValueId::ALL[..4] {
                if rng.gen_bool(0.5) {
                    profile.set(*v, RELATIONS[rng.gen_range(0..3)]);
                }
            }
            ApiAnnotation::new(*p, profile)
        })
        .collect();
    let catalog = Catalog::new("oracle", annotations).unwrap();

    let mut policy = Policy::default();
    for _ in 0..rng.gen_range(0..=2) {
        policy.required_values.push(RequiredValue {
            value: ValueId::ALL[rng.gen_range(0..4)],
            rationale: "r".into(),
        });
    }
    for _ in 0..rng.gen_range(0..=2) {
        policy.suppressions.push(Suppression {
            element: facts.elements[rng.gen_range(0..facts.elements.len())].fq_name.clone(),
            value: ValueId::ALL[rng.gen_range(0..4)],
            justification: "j".into(),
        });
    }
    Instance { facts, catalog, policy }
}

type EvidenceSet = BTreeSet<(String, Relation)>;
type ProfileSets = BTreeMap<ValueId, EvidenceSet>;
type SmellKey = (SmellKind, String, Vec<ValueId>, Severity, BTreeSet<(SourceSpan, String, Relation)>);

struct Expected {
    direct: BTreeMap<String, ProfileSets>,
    effective: BTreeMap<String, ProfileSets>,
    smells: Vec<SmellKey>,
    suppressed: usize,
}

fn oracle(inst: &Instance) -> Expected {
    let patterns: Vec<&ApiAnnotation> = inst.catalog.annotations().iter().collect();
    let matched = |api: &str| -> Option<&ApiAnnotation> {
        patterns
            .iter()
            .filter(|a| api == a.pattern || api.starts_with(&format!("{}.", a.pattern)))
            .max_by_key(|a| a.pattern.len())
            .copied()
    };
    let parent_of: BTreeMap<&str, Option<&str>> = inst
        .facts
        .elements
        .iter()
        .map(|e| (e.fq_name.as_str(), e.parent.as_deref()))
        .collect();
    let within = |d: &str, e: &str| {
        let mut cur = Some(d);
        while let Some(c) = cur {
            if c == e {
                return true;
            }
            cur = parent_of[c];
        }
        false
    };

    let mut direct: BTreeMap<String, ProfileSets> = BTreeMap::new();
    for e in &inst.facts.elements {
        let mut p = ProfileSets::new();
        for f in inst.facts.facts.iter().filter(|f| f.element == e.fq_name) {
            if let Some(a) = matched(&f.api_name) {
                for (v, r) in a.profile.iter() {
                    p.entry(v).or_default().insert((a.pattern.clone(), r));
                }
            }
        }
        direct.insert(e.fq_name.clone(), p);
    }
    let mut effective: BTreeMap<String, ProfileSets> = BTreeMap::new();
    for e in &inst.facts.elements {
        let mut p = ProfileSets::new();
        for d in inst.facts.elements.iter().filter(|d| within(&d.fq_name, &e.fq_name)) {
            for (v, ev) in &direct[&d.fq_name] {
                p.entry(*v).or_default().extend(ev.iter().cloned());
            }
        }
        effective.insert(e.fq_name.clone(), p);
    }

    let mut smells = Vec::new();
    let mut suppressed = 0;
    for e in &inst.facts.elements {
        let name = &e.fq_name;
        let own_facts: Vec<(&UsageFact, &ApiAnnotation)> = inst
            .facts
            .facts
            .iter()
            .filter(|f| &f.element == name)
            .filter_map(|f| matched(&f.api_name).map(|a| (f, a)))
            .collect();
        let tense: BTreeSet<&str> = own_facts.iter().map(|(_, a)| a.pattern.as_str()).collect();
        for pattern in tense {
            let a = inst.catalog.get(pattern).unwrap();
            let pos = a.profile.values_with(Relation::Positive);
            let neg = a.profile.values_with(Relation::Negative);
            if pos.is_empty() || neg.is_empty() {
                continue;
            }
            let mut values: Vec<ValueId> = pos.into_iter().chain(neg).collect();
            values.sort();
            let ev = own_facts
                .iter()
                .filter(|(_, a)| a.pattern == pattern)
                .flat_map(|(f, _)| {
                    [Relation::Positive, Relation::Negative].map(|r| (f.span.clone(), pattern.to_string(), r))
                })
                .collect();
            smells.push((SmellKind::ValueTension, name.clone(), values, Severity::Warning, ev));
        }

        let children: Vec<&str> = inst
            .facts
            .elements
            .iter()
            .filter(|c| c.parent.as_deref() == Some(name.as_str()))
            .map(|c| c.fq_name.as_str())
            .collect();
        for (v, ev) in &effective[name] {
            let rels: BTreeSet<Relation> = ev.iter().map(|(_, r)| *r).collect();
            let (kind, sev) = match expected_state(&rels) {
                StateKind::Conflict => (SmellKind::ValueConflict, Severity::Error),
                StateKind::Unknown => (SmellKind::UnreviewedUnknown, Severity::Info),
                StateKind::Negative => (SmellKind::UnmitigatedNegative, Severity::Warning),
                _ => continue,
            };
            if children.iter().any(|c| effective[*c].get(v) == Some(ev)) {
                continue;
            }
            if kind == SmellKind::UnmitigatedNegative
                && inst.policy.suppressions.iter().any(|s| &s.element == name && s.value == *v)
            {
                suppressed += 1;
                continue;
            }
            let mut spans = BTreeSet::new();
            for (pattern, r) in ev {
                for f in inst.facts.facts.iter().filter(|f| within(&f.element, name)) {
                    if matched(&f.api_name).is_some_and(|a| &a.pattern == pattern) {
                        spans.insert((f.span.clone(), pattern.clone(), *r));
                    }
                }
            }
            smells.push((kind, name.clone(), vec![*v], sev, spans));
        }
    }
    let required: BTreeSet<ValueId> = inst.policy.required_values.iter().map(|r| r.value).collect();
    for v in required {
        let supported = direct
            .values()
            .any(|p| p.get(&v).is_some_and(|ev| ev.iter().any(|(_, r)| *r == Relation::Positive)));
        if !supported {
            smells.push((
                SmellKind::MissingValueSupport,
                "<project>".into(),
                vec![v],
                Severity::Warning,
                BTreeSet::new(),
            ));
        }
    }
    smells.sort();
    Expected {
        direct,
        effective,
        smells,
        suppressed,
    }
}

fn profile_sets(a: &Annotations, direct: bool) -> BTreeMap<String, ProfileSets> {
    a.values()
        .map(|el| {
            let p = if direct { &el.direct_profile } else { &el.effective_profile };
            let sets = p
                .iter()
                .map(|(v, s)| {
                    (
                        v,
                        s.evidence().iter().map(|e| (e.source.clone(), e.relation)).collect(),
                    )
                })
                .collect();
            (el.element.clone(), sets)
        })
        .collect()
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0_0ac1e);
    let cases = 600;
    let mut nonempty = 0;
    for case in 0..cases {
        let inst = random_instance(&mut rng);
        let want = oracle(&inst);
        let ann = annotate(&inst.facts, &inst.catalog, AnnotateOptions::default()).map_err(|e| format!("case {case}: {e}"))?;
        ensure!(profile_sets(&ann, true) == want.direct, "case {case}: direct profiles differ");
        ensure!(profile_sets(&ann, false) == want.effective, "case {case}: effective profiles differ");
        let got = inspect(&ann, &inst.policy, &inst.catalog);
        let mut keys: Vec<SmellKey> = got
            .smells
            .iter()
            .map(|s| {
                (
                    s.kind,
                    s.element.clone(),
                    s.values.clone(),
                    s.severity,
                    s.evidence.iter().map(|e| (e.span.clone(), e.pattern.clone(), e.relation)).collect(),
                )
            })
            .collect();
        keys.sort();
        ensure!(keys == want.smells, "case {case}: smells differ\n got {keys:?}\nwant {:?}", want.smells);
        ensure!(got.suppressed.len() == want.suppressed, "case {case}: suppressed count differs");
        if !keys.is_empty() {
            nonempty += 1;
        }
    }
    Ok(format!("{cases} random instances, {nonempty} with smells, 0 mismatches"))
}

// Criterion 7 -------------------------------------------------------------

fn sarif_validator() -> jsonschema::Validator {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/sarif-schema-2.1.0.json");
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::validator_for(&schema).expect("schema compiles")
}

fn fixture_reports() -> Vec<(&'static str, AnalysisReport)> {
    let mut out = Vec::new();
    for name in ["figure2", "conflict", "unicode"] {
        let mut c = config(&fixture(name));
        c.include_annotations = true;
        if name == "unicode" {
            c.policy_path = Some(fixture("unicode-policy.json"));
        }
        out.push((name, analyze(&c).unwrap()));
    }
    let empty = tempfile::tempdir().unwrap();
    out.push(("empty", analyze_dir(empty.path())));
    out
}

fn criterion_7() -> Outcome {
    let mut checked = 0;
    for catalog in [Catalog::builtin(), Catalog::empty()] {
        let text = catalog.to_json();
        let back = Catalog::parse(&text, "rt").map_err(|e| e.to_string())?;
        ensure!(back == catalog && back.to_json() == text, "catalog round trip");
        checked += 1;
    }
    let policy_text = std::fs::read_to_string(fixture("unicode-policy.json")).unwrap();
    let policy = Policy::parse(&policy_text, "policy").map_err(|e| e.to_string())?;
    ensure!(Policy::parse(&policy.to_json(), "rt").ok() == Some(policy.clone()), "policy round trip");
    ensure!(policy.to_json() == policy_text, "policy file is not in canonical form");
    let rules = RuleSet::builtin();
    ensure!(RuleSet::parse(&rules.to_json(), "rt").ok() == Some(rules.clone()), "rules round trip");
    checked += 2;

    let validator = sarif_validator();
    for (name, report) in fixture_reports() {
        let blank = Sidecar::new(Default::default(), "");
        let sidecar: &Sidecar = report.annotations.as_ref().unwrap_or(&blank);
        let sc_text = sidecar.to_json();
        let sc_back = Sidecar::parse(&sc_text, "rt").map_err(|e| e.to_string())?;
        ensure!(&sc_back == sidecar && sc_back.to_json() == sc_text, "{name}: sidecar round trip");

        let json = render(&report, ReportFormat::Json);
        let back = AnalysisReport::parse(&json, "rt").map_err(|e| format!("{name}: {e}"))?;
        ensure!(back == report, "{name}: report round trip");
        ensure!(render(&back, ReportFormat::Json) == json, "{name}: report re-render");

        let sarif: Value = serde_json::from_str(&render(&report, ReportFormat::Sarif)).unwrap();
        let errors: Vec<String> = validator.iter_errors(&sarif).map(|e| e.to_string()).collect();
        ensure!(errors.is_empty(), "{name}: SARIF schema errors: {errors:?}");
        let mut broken = sarif.clone();
        broken["runs"][0]["tool"]["driver"]["rules"][0]["defaultConfiguration"]["level"] = "severe".into();
        ensure!(!validator.is_valid(&broken), "{name}: validator accepted an invalid level");
        let results = sarif["runs"][0]["results"].as_array().unwrap();
        ensure!(results.len() == report.smells.len(), "{name}: result count");
        if name == "figure2" {
            let tension: Vec<&Value> = results.iter().filter(|r| r["ruleId"] == "ValueTension").collect();
            ensure!(tension.len() == 1, "figure2: {} ValueTension results", tension.len());
            ensure!(tension[0]["level"] == "warning", "figure2: level {}", tension[0]["level"]);
            ensure!(
                tension[0]["locations"].as_array().map(Vec::len) == Some(1),
                "figure2: physical locations"
            );
        }
        if name == "empty" {
            ensure!(report.smells.is_empty() && report.recommendations.is_empty(), "empty report has smells");
            ensure!(report.smell_counts.values().all(|n| *n == 0), "empty report has counts");
        }
        checked += 3;
    }
    Ok(format!("{checked} round trips, SARIF valid for 4 reports"))
}

// Criterion 8 -------------------------------------------------------------

const CORPUS_APIS: [&str; 10] = [
    "android.accessibilityservice.AccessibilityService",
    "android.animation.ValueAnimator",
    "android.app.admin.DevicePolicyManager",
    "android.app.role.RoleManager",
    "android.icu.lang.UCharacter",
    "android.icu.media.Ringtone",
    "android.mtp.MtpDevice",
    "android.nfc.NfcAdapter",
    "android.security.KeyChain",
    "android.util.Log",
];

fn write_corpus(root: &Path, files: usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(0xc0_0005);
    for i in 0..files {
        let pkg = format!("com.example.m{}", i % 7);
        let dir = root.join(pkg.replace('.', "/"));
        std::fs::create_dir_all(&dir).unwrap();
        let mut src = format!("package {pkg};\n\n");
        let mut used = Vec::new();
        for _ in 0..rng.gen_range(1..=4) {
            let api = CORPUS_APIS[rng.gen_range(0..CORPUS_APIS.len())];
            if !used.contains(&api) {
                used.push(api);
                src.push_str(&format!("import {api};\n"));
            }
        }
        src.push_str(&format!("\npublic class C{i} {{\n    private int count;\n\n"));
        for m in 0..rng.gen_range(1..=5) {
            let api = used[rng.gen_range(0..used.len())];
            let simple = api.rsplit('.').next().unwrap();
            src.push_str(&format!(
                "    public void m{m}({simple} arg) {{\n        // call {simple}\n        count += {m};\n        helper{m}(arg);\n    }}\n\n    private void helper{m}(Object o) {{\n    }}\n\n"
            ));
        }
        src.push_str("}\n");
        std::fs::write(dir.join(format!("C{i}.java")), src).unwrap();
    }
}

fn criterion_8() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    write_corpus(dir.path(), 100);
    let start = Instant::now();
    let mut outputs = Vec::new();
    for _ in 0..2 {
        let mut c = config(dir.path());
        c.propagate_calls = true;
        c.include_annotations = true;
        let report = analyze(&c).map_err(|e| e.to_string())?;
        outputs.push((render(&report, ReportFormat::Json), render(&report, ReportFormat::Sarif), report));
    }
    let elapsed = start.elapsed();
    ensure!(outputs[0].0 == outputs[1].0, "JSON reports differ");
    ensure!(outputs[0].1 == outputs[1].1, "SARIF reports differ");
    let report = &outputs[0].2;
    let classes = report
        .annotations
        .as_ref()
        .unwrap()
        .annotations
        .values()
        .filter(|a| a.kind == ElementKind::Class)
        .count();
    ensure!(classes == 100, "{classes} classes annotated");
    within(elapsed, Duration::from_secs(5), "two analyses")?;
    Ok(format!(
        "100 files, {} smells, byte-identical twice in {elapsed:?}",
        report.smells.len()
    ))
}

type Criterion = (u8, &'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 8] = [
        (1, "catalog table fidelity", criterion_1),
        (2, "NotificationService reproduction", criterion_2),
        (3, "accessibility vs security conflict", criterion_3),
        (4, "Unicode policy", criterion_4),
        (5, "state algebra properties", criterion_5),
        (6, "brute-force oracle equivalence", criterion_6),
        (7, "format round trips and SARIF schema", criterion_7),
        (8, "determinism and scale", criterion_8),
    ];
    let mut failed = 0;
    for (n, name, f) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("PASS criterion {n}: {name} ({detail})"),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {n}: {name}: {why}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 8 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
