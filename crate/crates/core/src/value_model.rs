//! The twelve Schwartz basic values, relation kinds, and the algebra used to
//! combine value profiles from several API annotations.
//!
//! Source-level data (catalog cells, per-API profiles) only ever carries the
//! four [`Relation`] kinds. Combining sources yields an [`AggregateState`],
//! which adds [`StateKind::Conflict`] for opposite-signed evidence on the
//! same value.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// One of the twelve basic values, `V1` through `V12`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ValueId {
    V1,
    V2,
    V3,
    V4,
    V5,
    V6,
    V7,
    V8,
    V9,
    V10,
    V11,
    V12,
}

impl ValueId {
    pub const ALL: [ValueId; 12] = [
        ValueId::V1,
        ValueId::V2,
        ValueId::V3,
        ValueId::V4,
        ValueId::V5,
        ValueId::V6,
        ValueId::V7,
        ValueId::V8,
        ValueId::V9,
        ValueId::V10,
        ValueId::V11,
        ValueId::V12,
    ];

    /// 1-based ordinal.
    pub fn number(self) -> u8 {
        self as u8 + 1
    }

    pub fn from_number(n: u8) -> Option<ValueId> {
        ValueId::ALL.get(usize::from(n).checked_sub(1)?).copied()
    }

    pub fn canonical_name(self) -> &'static str {
        match self {
            ValueId::V1 => "Self Direction",
            ValueId::V2 => "Stimulation",
            ValueId::V3 => "Hedonism",
            ValueId::V4 => "Achievement",
            ValueId::V5 => "Power",
            ValueId::V6 => "Face",
            ValueId::V7 => "Security",
            ValueId::V8 => "Tradition",
            ValueId::V9 => "Conformity",
            ValueId::V10 => "Humility",
            ValueId::V11 => "Benevolence",
            ValueId::V12 => "Universalism",
        }
    }

    pub fn from_canonical_name(name: &str) -> Option<ValueId> {
        ValueId::ALL
            .into_iter()
            .find(|v| v.canonical_name().eq_ignore_ascii_case(name.trim()))
    }
}

impl fmt::Display for ValueId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "V{}", self.number())
    }
}

impl FromStr for ValueId {
    type Err = String;

    /// Accepts `V7`, `v7`, or a canonical name such as `Security`.
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let t = s.trim();
        if let Some(digits) = t.strip_prefix('V').or_else(|| t.strip_prefix('v')) {
            if let Ok(n) = digits.parse::<u8>() {
                if let Some(v) = ValueId::from_number(n) {
                    return Ok(v);
                }
            }
        }
        ValueId::from_canonical_name(t).ok_or_else(|| format!("unknown value id {s:?}"))
    }
}

impl Serialize for ValueId {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ValueId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Relevance of a single source to a single value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Relation {
    Positive,
    Negative,
    /// Relevant, sign not established (`±`).
    Unknown,
    NonRelevant,
}

impl Relation {
    pub const ALL: [Relation; 4] = [
        Relation::Positive,
        Relation::Negative,
        Relation::Unknown,
        Relation::NonRelevant,
    ];

    /// File-format symbol: `+`, `-`, `?`; non-relevant is the empty string.
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Positive => "+",
            Relation::Negative => "-",
            Relation::Unknown => "?",
            Relation::NonRelevant => "",
        }
    }

    pub fn from_symbol(s: &str) -> Option<Relation> {
        match s {
            "+" => Some(Relation::Positive),
            "-" => Some(Relation::Negative),
            "?" => Some(Relation::Unknown),
            "" => Some(Relation::NonRelevant),
            _ => None,
        }
    }

    /// Typographic sign used in human-facing output.
    pub fn display_sign(self) -> &'static str {
        match self {
            Relation::Positive => "+",
            Relation::Negative => "\u{2212}",
            Relation::Unknown => "\u{b1}",
            Relation::NonRelevant => "",
        }
    }
}

impl Serialize for Relation {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.symbol())
    }
}

impl<'de> Deserialize<'de> for Relation {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Relation::from_symbol(&s)
            .ok_or_else(|| serde::de::Error::custom(format!("bad relation symbol {s:?}")))
    }
}

/// Combined state of a value across every source that touches it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateKind {
    NonRelevant,
    Positive,
    Negative,
    Unknown,
    Conflict,
}

impl StateKind {
    pub fn display_sign(self) -> &'static str {
        match self {
            StateKind::NonRelevant => "",
            StateKind::Positive => "+",
            StateKind::Negative => "\u{2212}",
            StateKind::Unknown => "\u{b1}",
            StateKind::Conflict => "+/\u{2212}",
        }
    }
}

impl fmt::Display for StateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            StateKind::NonRelevant => "non-relevant",
            StateKind::Positive => "positive",
            StateKind::Negative => "negative",
            StateKind::Unknown => "unknown",
            StateKind::Conflict => "conflict",
        };
        f.write_str(s)
    }
}

/// Precedence: Conflict > Unknown > Positive > Negative > NonRelevant.
///
/// Total over every multiset of relations; the empty multiset maps to
/// `NonRelevant`.
pub fn derive_state<I>(relations: I) -> StateKind
where
    I: IntoIterator<Item = Relation>,
{
    let (mut pos, mut neg, mut unk) = (false, false, false);
    for r in relations {
        match r {
            Relation::Positive => pos = true,
            Relation::Negative => neg = true,
            Relation::Unknown => unk = true,
            Relation::NonRelevant => {}
        }
    }
    if pos && neg {
        StateKind::Conflict
    } else if unk {
        StateKind::Unknown
    } else if pos {
        StateKind::Positive
    } else if neg {
        StateKind::Negative
    } else {
        StateKind::NonRelevant
    }
}

/// Sparse value → relation map. Never stores `NonRelevant`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "BTreeMap<ValueId, Relation>", into = "BTreeMap<ValueId, Relation>")]
pub struct ValueProfile {
    entries: BTreeMap<ValueId, Relation>,
}

impl ValueProfile {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, value: ValueId) -> Relation {
        self.entries
            .get(&value)
            .copied()
            .unwrap_or(Relation::NonRelevant)
    }

    /// Setting `NonRelevant` removes the entry.
    pub fn set(&mut self, value: ValueId, relation: Relation) {
        if relation == Relation::NonRelevant {
            self.entries.remove(&value);
        } else {
            self.entries.insert(value, relation);
        }
    }

    pub fn with(mut self, value: ValueId, relation: Relation) -> Self {
        self.set(value, relation);
        self
    }

    pub fn iter(&self) -> impl Iterator<Item = (ValueId, Relation)> + '_ {
        self.entries.iter().map(|(v, r)| (*v, *r))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Values carrying the given relation, in id order.
    pub fn values_with(&self, relation: Relation) -> Vec<ValueId> {
        self.iter()
            .filter(|(_, r)| *r == relation)
            .map(|(v, _)| v)
            .collect()
    }
}

impl FromIterator<(ValueId, Relation)> for ValueProfile {
    fn from_iter<T: IntoIterator<Item = (ValueId, Relation)>>(iter: T) -> Self {
        let mut p = ValueProfile::new();
        for (v, r) in iter {
            p.set(v, r);
        }
        p
    }
}

impl From<BTreeMap<ValueId, Relation>> for ValueProfile {
    fn from(map: BTreeMap<ValueId, Relation>) -> Self {
        map.into_iter().collect()
    }
}

impl From<ValueProfile> for BTreeMap<ValueId, Relation> {
    fn from(p: ValueProfile) -> Self {
        p.entries
    }
}

/// A single `(source, relation)` observation backing an aggregate state.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Evidence {
    pub source: String,
    pub relation: Relation,
}

impl Evidence {
    pub fn new(source: impl Into<String>, relation: Relation) -> Self {
        Evidence {
            source: source.into(),
            relation,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "AggregateStateRepr", into = "AggregateStateRepr")]
pub struct AggregateState {
    kind: StateKind,
    evidence: BTreeSet<Evidence>,
}

impl AggregateState {
    pub fn from_evidence(evidence: BTreeSet<Evidence>) -> Self {
        let evidence: BTreeSet<Evidence> = evidence
            .into_iter()
            .filter(|e| e.relation != Relation::NonRelevant)
            .collect();
        let kind = derive_state(evidence.iter().map(|e| e.relation));
        AggregateState { kind, evidence }
    }

    pub fn kind(&self) -> StateKind {
        self.kind
    }

    pub fn evidence(&self) -> &BTreeSet<Evidence> {
        &self.evidence
    }

    /// Sources contributing the given relation.
    pub fn sources_with(&self, relation: Relation) -> impl Iterator<Item = &str> {
        self.evidence
            .iter()
            .filter(move |e| e.relation == relation)
            .map(|e| e.source.as_str())
    }

    pub fn has_relation(&self, relation: Relation) -> bool {
        self.evidence.iter().any(|e| e.relation == relation)
    }
}

#[derive(Serialize, Deserialize)]
struct AggregateStateRepr {
    state: StateKind,
    evidence: Vec<Evidence>,
}

impl TryFrom<AggregateStateRepr> for AggregateState {
    type Error = String;

    fn try_from(repr: AggregateStateRepr) -> std::result::Result<Self, Self::Error> {
        let st = AggregateState::from_evidence(repr.evidence.into_iter().collect());
        if st.kind != repr.state {
            return Err(format!(
                "state {} does not follow from its evidence (expected {})",
                repr.state, st.kind
            ));
        }
        Ok(st)
    }
}

impl From<AggregateState> for AggregateStateRepr {
    fn from(st: AggregateState) -> Self {
        AggregateStateRepr {
            state: st.kind,
            evidence: st.evidence.into_iter().collect(),
        }
    }
}

/// Sparse value → aggregate state map. Values without evidence are absent
/// and read back as `NonRelevant`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "BTreeMap<ValueId, AggregateState>", into = "BTreeMap<ValueId, AggregateState>")]
pub struct AggregateProfile {
    entries: BTreeMap<ValueId, AggregateState>,
}

impl AggregateProfile {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn state(&self, value: ValueId) -> StateKind {
        self.entries
            .get(&value)
            .map_or(StateKind::NonRelevant, |s| s.kind)
    }

    pub fn get(&self, value: ValueId) -> Option<&AggregateState> {
        self.entries.get(&value)
    }

    pub fn iter(&self) -> impl Iterator<Item = (ValueId, &AggregateState)> {
        self.entries.iter().map(|(v, s)| (*v, s))
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Adds every non-neutral relation of `profile` as evidence from `source`.
    pub fn add_profile(&mut self, source: &str, profile: &ValueProfile) {
        for (value, relation) in profile.iter() {
            self.add(value, Evidence::new(source, relation));
        }
    }

    pub fn add(&mut self, value: ValueId, evidence: Evidence) {
        if evidence.relation == Relation::NonRelevant {
            return;
        }
        let entry = self
            .entries
            .entry(value)
            .or_insert_with(|| AggregateState::from_evidence(BTreeSet::new()));
        if entry.evidence.insert(evidence) {
            entry.kind = derive_state(entry.evidence.iter().map(|e| e.relation));
        }
    }

    /// Evidence union.
    pub fn absorb(&mut self, other: &AggregateProfile) {
        for (value, state) in other.iter() {
            for ev in &state.evidence {
                self.add(value, ev.clone());
            }
        }
    }

    /// Every `(value, evidence)` pair, flattened.
    pub fn evidence_set(&self) -> BTreeSet<(ValueId, Evidence)> {
        self.iter()
            .flat_map(|(v, s)| s.evidence.iter().map(move |e| (v, e.clone())))
            .collect()
    }

    /// `(value, state)` pairs in id order, skipping `NonRelevant`.
    pub fn states(&self) -> Vec<(ValueId, StateKind)> {
        self.iter().map(|(v, s)| (v, s.kind)).collect()
    }
}

impl From<BTreeMap<ValueId, AggregateState>> for AggregateProfile {
    fn from(map: BTreeMap<ValueId, AggregateState>) -> Self {
        let entries = map
            .into_iter()
            .filter(|(_, s)| !s.evidence.is_empty())
            .collect();
        AggregateProfile { entries }
    }
}

impl From<AggregateProfile> for BTreeMap<ValueId, AggregateState> {
    fn from(p: AggregateProfile) -> Self {
        p.entries
    }
}

/// Merges per-source profiles into one aggregate. `source_ids[i]` names the
/// origin of `profiles[i]`.
pub fn merge_profiles<S: AsRef<str>>(
    profiles: &[ValueProfile],
    source_ids: &[S],
) -> Result<AggregateProfile> {
    if profiles.len() != source_ids.len() {
        return Err(Error::Usage(format!(
            "merge_profiles: {} profiles but {} source ids",
            profiles.len(),
            source_ids.len()
        )));
    }
    let mut out = AggregateProfile::new();
    for (profile, source) in profiles.iter().zip(source_ids) {
        out.add_profile(source.as_ref(), profile);
    }
    Ok(out)
}

/// One row dimension of the value table (e.g. Self Direction / thought).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValueDimension {
    #[serde(skip)]
    pub value: Option<ValueId>,
    pub name: String,
    pub definition: String,
    pub items: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValueDefinition {
    pub id: ValueId,
    pub name: String,
    pub dimensions: Vec<ValueDimension>,
}

#[derive(Deserialize)]
struct ValueDefinitionsFile {
    version: String,
    values: Vec<ValueDefinition>,
}

const VALUES_JSON: &str = include_str!("../data/values.json");

/// Shipped definitions of all twelve values, in id order.
pub fn value_definitions() -> &'static [ValueDefinition] {
    static DEFS: OnceLock<Vec<ValueDefinition>> = OnceLock::new();
    DEFS.get_or_init(|| {
        parse_value_definitions(VALUES_JSON, "<builtin values.json>")
            .expect("shipped value definitions are valid")
    })
}

pub fn value_definition(id: ValueId) -> &'static ValueDefinition {
    &value_definitions()[usize::from(id.number() - 1)]
}

/// Parses and validates a value-definition document.
pub fn parse_value_definitions(text: &str, origin: &str) -> Result<Vec<ValueDefinition>> {
    let file: ValueDefinitionsFile =
        serde_json::from_str(text).map_err(|e| Error::parse(origin, &e))?;
    crate::error::check_format_version(origin, &file.version, "1")?;
    let mut defs = file.values;
    if defs.len() != ValueId::ALL.len() {
        return Err(Error::validation(
            origin,
            "values",
            format!("expected 12 values, found {}", defs.len()),
        ));
    }
    for (i, def) in defs.iter_mut().enumerate() {
        let ctx = format!("record #{} ({})", i + 1, def.id);
        if def.id != ValueId::ALL[i] {
            return Err(Error::validation(origin, ctx, "values must be listed V1..V12 in order"));
        }
        if def.name != def.id.canonical_name() {
            return Err(Error::validation(
                origin,
                ctx,
                format!("name {:?} does not match canonical {:?}", def.name, def.id.canonical_name()),
            ));
        }
        if def.dimensions.is_empty() {
            return Err(Error::validation(origin, ctx, "no dimensions"));
        }
        for dim in &mut def.dimensions {
            dim.value = Some(def.id);
        }
    }
    Ok(defs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ids_and_names_are_bijective() {
        let names: BTreeSet<_> = ValueId::ALL.iter().map(|v| v.canonical_name()).collect();
        assert_eq!(names.len(), 12);
        for v in ValueId::ALL {
            assert_eq!(ValueId::from_canonical_name(v.canonical_name()), Some(v));
            assert_eq!(v.to_string().parse::<ValueId>().unwrap(), v);
            assert_eq!(ValueId::from_number(v.number()), Some(v));
        }
        assert!("V13".parse::<ValueId>().is_err());
        assert!("V0".parse::<ValueId>().is_err());
        assert_eq!("universalism".parse::<ValueId>().unwrap(), ValueId::V12);
    }

    #[test]
    fn derive_state_examples() {
        use Relation::*;
        assert_eq!(derive_state([Positive]), StateKind::Positive);
        assert_eq!(derive_state([Positive, Negative]), StateKind::Conflict);
        assert_eq!(derive_state([Positive, Unknown, NonRelevant]), StateKind::Unknown);
        assert_eq!(derive_state([Negative, Unknown]), StateKind::Unknown);
        assert_eq!(derive_state([NonRelevant]), StateKind::NonRelevant);
        assert_eq!(derive_state([Negative, Negative]), StateKind::Negative);
    }

    #[test]
    fn conflict_requires_both_signs() {
        for mask in 1u8..16 {
            let rels: Vec<Relation> = Relation::ALL
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, r)| *r)
                .collect();
            let k = derive_state(rels.iter().copied());
            if k == StateKind::Conflict {
                assert!(rels.contains(&Relation::Positive) && rels.contains(&Relation::Negative));
            }
        }
    }

    #[test]
    fn profile_is_sparse() {
        let p = ValueProfile::new()
            .with(ValueId::V1, Relation::Negative)
            .with(ValueId::V2, Relation::NonRelevant);
        assert_eq!(p.len(), 1);
        let json = serde_json::to_string(&p).unwrap();
        assert_eq!(json, r#"{"V1":"-"}"#);
        let back: ValueProfile = serde_json::from_str(r#"{"V1":"-","V3":""}"#).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn merge_length_mismatch_is_usage_error() {
        let err = merge_profiles(&[ValueProfile::new()], &[] as &[&str]).unwrap_err();
        assert!(matches!(err, Error::Usage(_)));
    }

    #[test]
    fn merge_of_nothing_is_empty() {
        let agg = merge_profiles(&[], &[] as &[&str]).unwrap();
        assert!(agg.is_empty());
        for v in ValueId::ALL {
            assert_eq!(agg.state(v), StateKind::NonRelevant);
        }
    }

    #[test]
    fn aggregate_state_rejects_inconsistent_kind() {
        let bad = r#"{"V7":{"state":"positive","evidence":[{"source":"a","relation":"+"},{"source":"b","relation":"-"}]}}"#;
        assert!(serde_json::from_str::<AggregateProfile>(bad).is_err());
        let good = bad.replace("positive", "conflict");
        let agg: AggregateProfile = serde_json::from_str(&good).unwrap();
        assert_eq!(agg.state(ValueId::V7), StateKind::Conflict);
    }

    #[test]
    fn shipped_definitions_cover_table() {
        let defs = value_definitions();
        assert_eq!(defs.len(), 12);
        let dims: usize = defs.iter().map(|d| d.dimensions.len()).sum();
        assert_eq!(dims, 19);
        let v1 = value_definition(ValueId::V1);
        assert_eq!(v1.dimensions[0].name, "thought");
        assert_eq!(
            v1.dimensions[0].definition,
            "freedom to cultivate one's own ideas and abilities."
        );
        assert!(v1.dimensions[1].items.contains(&"privacy".to_string()));
        assert_eq!(value_definition(ValueId::V12).dimensions.len(), 3);
        for d in defs {
            for dim in &d.dimensions {
                assert_eq!(dim.value, Some(d.id));
            }
        }
    }

    fn arb_profile() -> impl Strategy<Value = ValueProfile> {
        proptest::collection::vec((0usize..12, 0usize..4), 0..8).prop_map(|cells| {
            cells
                .into_iter()
                .map(|(v, r)| (ValueId::ALL[v], Relation::ALL[r]))
                .collect()
        })
    }

    proptest! {
        #[test]
        fn merge_is_order_independent(
            profiles in proptest::collection::vec(arb_profile(), 0..6),
            seed in any::<u64>(),
        ) {
            let ids: Vec<String> = (0..profiles.len()).map(|i| format!("s{i}")).collect();
            let a = merge_profiles(&profiles, &ids).unwrap();
            let mut pairs: Vec<_> = profiles.iter().cloned().zip(ids.iter().cloned()).collect();
            // Deterministic shuffle from the seed.
            let n = pairs.len();
            let mut s = seed;
            for i in (1..n).rev() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                pairs.swap(i, (s >> 33) as usize % (i + 1));
            }
            let (ps, is): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
            prop_assert_eq!(a, merge_profiles(&ps, &is).unwrap());
        }

        #[test]
        fn merge_flattening_and_identity(
            left in proptest::collection::vec(arb_profile(), 0..4),
            right in proptest::collection::vec(arb_profile(), 0..4),
        ) {
            let lids: Vec<String> = (0..left.len()).map(|i| format!("l{i}")).collect();
            let rids: Vec<String> = (0..right.len()).map(|i| format!("r{i}")).collect();
            let mut grouped = merge_profiles(&left, &lids).unwrap();
            grouped.absorb(&merge_profiles(&right, &rids).unwrap());

            let all: Vec<_> = left.iter().chain(&right).cloned().collect();
            let all_ids: Vec<_> = lids.iter().chain(&rids).cloned().collect();
            let flat = merge_profiles(&all, &all_ids).unwrap();
            prop_assert_eq!(&grouped, &flat);

            let mut padded = all.clone();
            padded.push(ValueProfile::new());
            let mut padded_ids = all_ids.clone();
            padded_ids.push("empty".into());
            prop_assert_eq!(&flat, &merge_profiles(&padded, &padded_ids).unwrap());
        }
    }
}
