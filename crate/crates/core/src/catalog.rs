//! Catalog of value-annotated APIs.
//!
//! Each entry binds a dot-separated API name prefix to a [`ValueProfile`].
//! Lookups pick the longest matching prefix on whole-segment boundaries, so
//! `android.security` matches `android.security.KeyChain` but not
//! `android.securityx`.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{read_to_string, write_string, Error, Result};
use crate::trie::SegmentTrie;
use crate::value_model::{Relation, ValueId, ValueProfile};

const DEFAULT_CATALOG_JSON: &str = include_str!("../data/default_catalog.json");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApiAnnotation {
    pub pattern: String,
    pub description: String,
    pub profile: ValueProfile,
    pub provenance: String,
    pub notes: Option<String>,
}

impl ApiAnnotation {
    pub fn new(pattern: impl Into<String>, profile: ValueProfile) -> Self {
        ApiAnnotation {
            pattern: pattern.into(),
            description: String::new(),
            profile,
            provenance: String::new(),
            notes: None,
        }
    }
}

/// Validated, pattern-sorted collection of [`ApiAnnotation`]s.
#[derive(Debug, Clone)]
pub struct Catalog {
    version: String,
    annotations: Vec<ApiAnnotation>,
    index: SegmentTrie<usize>,
}

impl PartialEq for Catalog {
    fn eq(&self, other: &Self) -> bool {
        self.version == other.version && self.annotations == other.annotations
    }
}

impl Eq for Catalog {}

/// Two annotations with opposite signs on one value.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConflictingPair<'a> {
    pub first: &'a ApiAnnotation,
    pub second: &'a ApiAnnotation,
    pub value: ValueId,
}

pub fn validate_pattern(pattern: &str) -> std::result::Result<(), String> {
    if pattern.is_empty() {
        return Err("empty pattern".into());
    }
    if pattern.chars().any(char::is_whitespace) {
        return Err(format!("pattern {pattern:?} contains whitespace"));
    }
    if pattern.split('.').any(str::is_empty) {
        return Err(format!("pattern {pattern:?} has an empty segment"));
    }
    Ok(())
}

impl Catalog {
    /// Validates and canonically sorts `annotations`.
    pub fn new(version: impl Into<String>, annotations: Vec<ApiAnnotation>) -> Result<Catalog> {
        Self::build(version.into(), annotations, "<memory>")
    }

    pub fn empty() -> Catalog {
        Catalog {
            version: String::new(),
            annotations: Vec::new(),
            index: SegmentTrie::default(),
        }
    }

    /// The shipped Android catalog.
    pub fn builtin() -> Catalog {
        Catalog::parse(DEFAULT_CATALOG_JSON, "<builtin catalog>")
            .expect("shipped catalog is valid")
    }

    fn build(version: String, mut annotations: Vec<ApiAnnotation>, origin: &str) -> Result<Catalog> {
        for (i, a) in annotations.iter().enumerate() {
            validate_pattern(&a.pattern).map_err(|m| {
                Error::validation(origin, format!("annotation #{} ({})", i + 1, a.pattern), m)
            })?;
        }
        annotations.sort_by(|a, b| a.pattern.cmp(&b.pattern));
        let mut index = SegmentTrie::default();
        for (i, a) in annotations.iter().enumerate() {
            if index.insert(&a.pattern, i).is_some() {
                return Err(Error::validation(
                    origin,
                    format!("annotation {}", a.pattern),
                    "duplicate pattern",
                ));
            }
        }
        Ok(Catalog {
            version,
            annotations,
            index,
        })
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    pub fn annotations(&self) -> &[ApiAnnotation] {
        &self.annotations
    }

    pub fn len(&self) -> usize {
        self.annotations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.annotations.is_empty()
    }

    pub fn get(&self, pattern: &str) -> Option<&ApiAnnotation> {
        self.annotations
            .binary_search_by(|a| a.pattern.as_str().cmp(pattern))
            .ok()
            .map(|i| &self.annotations[i])
    }

    /// Longest pattern that is a whole-segment prefix of `qualified_name`.
    pub fn match_api(&self, qualified_name: &str) -> Option<&ApiAnnotation> {
        if qualified_name.is_empty() {
            return None;
        }
        self.index
            .longest_prefix(qualified_name)
            .map(|&i| &self.annotations[i])
    }

    /// Every pair of annotations with `+` and `-` on the same value, ordered
    /// by (first pattern, second pattern, value). `first` sorts before
    /// `second` by pattern.
    pub fn conflicting_pairs(&self) -> Vec<ConflictingPair<'_>> {
        let mut out = Vec::new();
        for (i, a) in self.annotations.iter().enumerate() {
            for b in &self.annotations[i + 1..] {
                for (value, ra) in a.profile.iter() {
                    let rb = b.profile.get(value);
                    let opposite = matches!(
                        (ra, rb),
                        (Relation::Positive, Relation::Negative)
                            | (Relation::Negative, Relation::Positive)
                    );
                    if opposite {
                        out.push(ConflictingPair {
                            first: a,
                            second: b,
                            value,
                        });
                    }
                }
            }
        }
        out
    }

    /// Parses and validates a catalog document.
    pub fn parse(text: &str, origin: &str) -> Result<Catalog> {
        let raw: RawCatalog = serde_json::from_str(text).map_err(|e| Error::parse(origin, &e))?;
        let mut annotations = Vec::with_capacity(raw.annotations.len());
        for (i, ra) in raw.annotations.into_iter().enumerate() {
            let ctx = format!("annotation #{} ({})", i + 1, ra.pattern);
            let mut profile = ValueProfile::new();
            for (key, sym) in &ra.values {
                let value = match key.parse::<ValueId>() {
                    Ok(v) if *key == v.to_string() => v,
                    _ => {
                        return Err(Error::validation(
                            origin,
                            ctx,
                            format!("unknown value id {key:?}"),
                        ))
                    }
                };
                let relation = sym
                    .as_str()
                    .and_then(Relation::from_symbol)
                    .filter(|r| *r != Relation::NonRelevant)
                    .ok_or_else(|| {
                        Error::validation(
                            origin,
                            ctx.clone(),
                            format!("bad relation symbol {sym} for {key}"),
                        )
                    })?;
                profile.set(value, relation);
            }
            annotations.push(ApiAnnotation {
                pattern: ra.pattern,
                description: ra.description,
                profile,
                provenance: ra.provenance,
                notes: ra.notes,
            });
        }
        Catalog::build(raw.version, annotations, origin)
    }

    pub fn to_json(&self) -> String {
        let raw = RawCatalog {
            version: self.version.clone(),
            annotations: self
                .annotations
                .iter()
                .map(|a| RawAnnotation {
                    pattern: a.pattern.clone(),
                    description: a.description.clone(),
                    provenance: a.provenance.clone(),
                    values: a
                        .profile
                        .iter()
                        .map(|(v, r)| (v.to_string(), serde_json::Value::from(r.symbol())))
                        .collect(),
                    notes: a.notes.clone(),
                })
                .collect(),
        };
        let mut s = serde_json::to_string_pretty(&raw).expect("catalog serializes");
        s.push('\n');
        s
    }

    /// Concatenates catalogs. Patterns must stay unique across inputs.
    pub fn merge(catalogs: Vec<Catalog>, origin: &str) -> Result<Catalog> {
        let versions: Vec<String> = catalogs
            .iter()
            .map(|c| c.version.clone())
            .filter(|v| !v.is_empty())
            .collect();
        let annotations = catalogs.into_iter().flat_map(|c| c.annotations).collect();
        Catalog::build(versions.join("+"), annotations, origin)
    }
}

/// Reads a catalog file.
pub fn load_catalog(path: &Path) -> Result<Catalog> {
    let text = read_to_string(path)?;
    Catalog::parse(&text, &path.display().to_string())
}

/// Reads several catalog files and merges them; a pattern appearing in more
/// than one file is an error naming the later file.
pub fn load_catalogs<P: AsRef<Path>>(paths: &[P]) -> Result<Catalog> {
    let mut merged = Catalog::empty();
    for p in paths {
        let c = load_catalog(p.as_ref())?;
        merged = Catalog::merge(vec![merged, c], &p.as_ref().display().to_string())?;
    }
    Ok(merged)
}

pub fn save_catalog(catalog: &Catalog, path: &Path) -> Result<()> {
    write_string(path, &catalog.to_json())
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCatalog {
    version: String,
    #[serde(default)]
    annotations: Vec<RawAnnotation>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAnnotation {
    pattern: String,
    #[serde(default)]
    description: String,
    #[serde(default)]
    provenance: String,
    #[serde(default)]
    values: ValueCells,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    notes: Option<String>,
}

/// Value cells in file order. Serializes as a JSON object; rejects repeated keys.
#[derive(Default)]
struct ValueCells(Vec<(String, serde_json::Value)>);

impl<'a> IntoIterator for &'a ValueCells {
    type Item = &'a (String, serde_json::Value);
    type IntoIter = std::slice::Iter<'a, (String, serde_json::Value)>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

impl FromIterator<(String, serde_json::Value)> for ValueCells {
    fn from_iter<T: IntoIterator<Item = (String, serde_json::Value)>>(iter: T) -> Self {
        ValueCells(iter.into_iter().collect())
    }
}

impl Serialize for ValueCells {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut m = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            m.serialize_entry(k, v)?;
        }
        m.end()
    }
}

impl<'de> Deserialize<'de> for ValueCells {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl<'de> serde::de::Visitor<'de> for V {
            type Value = ValueCells;
            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str("an object mapping value ids to relation symbols")
            }
            fn visit_map<A: serde::de::MapAccess<'de>>(
                self,
                mut map: A,
            ) -> std::result::Result<ValueCells, A::Error> {
                let mut seen = BTreeSet::new();
                let mut cells = Vec::new();
                while let Some((k, v)) = map.next_entry::<String, serde_json::Value>()? {
                    if !seen.insert(k.clone()) {
                        return Err(serde::de::Error::custom(format!("repeated value id {k:?}")));
                    }
                    cells.push((k, v));
                }
                Ok(ValueCells(cells))
            }
        }
        d.deserialize_map(V)
    }
}
