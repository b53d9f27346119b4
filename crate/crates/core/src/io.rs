//! Versioned JSON documents with named entities, and their binding to id-based values.
//!
//! A document may carry any of four sections. `acc` names components, points and
//! branches; `script`, `pencil` and `family` refer to those names, so they can live
//! in separate files and be bound against an ACC later.
//!
//! Names created by a script step: the exceptional component (default `E<n>`, counting
//! steps from 1), its new points `<E>.p<i>` and its branches `<E>.b<i>`, one per cluster.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::acc::{validate_acc, Acc, AccError, BranchId, ComponentId, PointId, RawAcc};
use crate::admissibility::{AdmissibilityError, VectorFamily};
use crate::blowup::{ResolutionTrace, SigmaProcessSpec};
use crate::rational::{format_rational, parse_rational, Rational};

pub const FORMAT_VERSION: u64 = 1;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum DocumentError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    SyntaxError {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unsupported format_version {0}")]
    UnsupportedVersion(u64),
    #[error("duplicate {category} name {name:?}")]
    DuplicateName {
        category: &'static str,
        name: String,
    },
    #[error("{path}: unknown name {name:?}")]
    UnknownReference { path: String, name: String },
    #[error("{path}: {value} is not an integer")]
    NonIntegerMultiplicity { path: String, value: String },
    #[error("{path}: {value} is negative")]
    NegativeMultiplicity { path: String, value: String },
    #[error("{path}: {value} is not an exact rational")]
    InvalidRational { path: String, value: String },
    #[error("{path}: missing entry")]
    MissingEntry { path: String },
    #[error("{path}: expected {expected} entries, found {found}")]
    DimensionMismatch {
        path: String,
        expected: usize,
        found: usize,
    },
    #[error("document has no {0} section")]
    MissingSection(&'static str),
}

impl DocumentError {
    pub fn kind(&self) -> &'static str {
        match self {
            DocumentError::SyntaxError { .. } => "SyntaxError",
            DocumentError::UnsupportedVersion(_) => "UnsupportedVersion",
            DocumentError::DuplicateName { .. } => "DuplicateName",
            DocumentError::UnknownReference { .. } => "UnknownReference",
            DocumentError::NonIntegerMultiplicity { .. } => "NonIntegerMultiplicity",
            DocumentError::NegativeMultiplicity { .. } => "NegativeMultiplicity",
            DocumentError::InvalidRational { .. } => "InvalidRational",
            DocumentError::MissingEntry { .. } => "MissingEntry",
            DocumentError::DimensionMismatch { .. } => "DimensionMismatch",
            DocumentError::MissingSection(_) => "MissingSection",
        }
    }
}

// On-disk shape. Numbers stay as JSON values until they are checked with a path.

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDocument {
    format_version: u64,
    acc: Option<RawAccSection>,
    script: Option<Vec<RawStep>>,
    pencil: Option<RawPencil>,
    family: Option<RawFamily>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAccSection {
    components: Vec<String>,
    points: Vec<String>,
    branches: Vec<BranchEntry>,
    #[serde(default)]
    mu: Vec<RawMu>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMu {
    pair: [String; 2],
    value: Value,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStep {
    point: String,
    clusters: Vec<Vec<String>>,
    nu: Option<BTreeMap<String, Value>>,
    exceptional: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPencil {
    fibers: Vec<Vec<String>>,
    multiplicities: Option<BTreeMap<String, Value>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFamily {
    dim: usize,
    vectors: BTreeMap<String, Vec<Value>>,
}

/// A parsed document. Serializing it gives the canonical text.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Document {
    pub format_version: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub acc: Option<AccSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub script: Option<Vec<ScriptStep>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pencil: Option<PencilSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilySection>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AccSection {
    pub components: Vec<String>,
    pub points: Vec<String>,
    pub branches: Vec<BranchEntry>,
    pub mu: Vec<MuEntry>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BranchEntry {
    pub name: String,
    pub component: String,
    pub point: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MuEntry {
    pub pair: [String; 2],
    pub value: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ScriptStep {
    pub point: String,
    pub clusters: Vec<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nu: Option<BTreeMap<String, u64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exceptional: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PencilSection {
    pub fibers: Vec<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub multiplicities: Option<BTreeMap<String, u64>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FamilySection {
    pub dim: usize,
    #[serde(serialize_with = "serialize_vectors")]
    pub vectors: BTreeMap<String, Vec<Rational>>,
}

fn serialize_vectors<S: serde::Serializer>(
    vectors: &BTreeMap<String, Vec<Rational>>,
    s: S,
) -> Result<S::Ok, S::Error> {
    let text: BTreeMap<&String, Vec<String>> = vectors
        .iter()
        .map(|(k, v)| (k, v.iter().map(format_rational).collect()))
        .collect();
    text.serialize(s)
}

fn value_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn parse_count(path: String, v: &Value) -> Result<u64, DocumentError> {
    let value = value_text(v);
    let exact = match v {
        Value::Number(n) => {
            if let Some(u) = n.as_u64() {
                return Ok(u);
            }
            if n.as_i64().is_some() {
                return Err(DocumentError::NegativeMultiplicity { path, value });
            }
            return Err(DocumentError::NonIntegerMultiplicity { path, value });
        }
        Value::String(s) => parse_rational(s),
        _ => None,
    };
    let Some(x) = exact else {
        return Err(DocumentError::InvalidRational { path, value });
    };
    if !x.is_integer() {
        return Err(DocumentError::NonIntegerMultiplicity { path, value });
    }
    if x < Rational::from_integer(0.into()) {
        return Err(DocumentError::NegativeMultiplicity { path, value });
    }
    x.to_integer()
        .try_into()
        .map_err(|_| DocumentError::InvalidRational { path, value })
}

fn parse_exact(path: String, v: &Value) -> Result<Rational, DocumentError> {
    let parsed = match v {
        Value::String(s) => parse_rational(s),
        Value::Number(n) if n.is_i64() || n.is_u64() => parse_rational(&n.to_string()),
        _ => None,
    };
    parsed.ok_or_else(|| DocumentError::InvalidRational {
        path,
        value: value_text(v),
    })
}

fn check_unique<'a>(
    category: &'static str,
    names: impl IntoIterator<Item = &'a String>,
) -> Result<(), DocumentError> {
    let mut seen = BTreeSet::new();
    for name in names {
        if !seen.insert(name) {
            return Err(DocumentError::DuplicateName {
                category,
                name: name.clone(),
            });
        }
    }
    Ok(())
}

fn lookup(
    names: &[String],
    name: &str,
    path: impl FnOnce() -> String,
) -> Result<usize, DocumentError> {
    names
        .iter()
        .position(|n| n == name)
        .ok_or_else(|| DocumentError::UnknownReference {
            path: path(),
            name: name.to_owned(),
        })
}

/// Parses UTF-8 JSON. Within the `acc` section every reference is checked; the other
/// sections are checked when bound.
pub fn parse_document(text: &[u8]) -> Result<Document, DocumentError> {
    let raw: RawDocument = serde_json::from_slice(text).map_err(|e| {
        let full = e.to_string();
        let suffix = format!(" at line {} column {}", e.line(), e.column());
        DocumentError::SyntaxError {
            line: e.line(),
            column: e.column(),
            message: full.strip_suffix(&suffix).unwrap_or(&full).to_owned(),
        }
    })?;
    if raw.format_version != FORMAT_VERSION {
        return Err(DocumentError::UnsupportedVersion(raw.format_version));
    }
    let acc = raw.acc.map(parse_acc_section).transpose()?;
    let script = raw
        .script
        .map(|steps| {
            steps
                .into_iter()
                .enumerate()
                .map(|(i, s)| {
                    let nu =
                        s.nu.map(|m| {
                            m.iter()
                                .map(|(k, v)| {
                                    Ok((k.clone(), parse_count(format!("script[{i}].nu.{k}"), v)?))
                                })
                                .collect::<Result<BTreeMap<_, _>, DocumentError>>()
                        })
                        .transpose()?;
                    Ok(ScriptStep {
                        point: s.point,
                        clusters: s.clusters,
                        nu,
                        exceptional: s.exceptional,
                    })
                })
                .collect::<Result<Vec<_>, DocumentError>>()
        })
        .transpose()?;
    let pencil = raw
        .pencil
        .map(|p| {
            let multiplicities = p
                .multiplicities
                .map(|m| {
                    m.iter()
                        .map(|(k, v)| {
                            Ok((
                                k.clone(),
                                parse_count(format!("pencil.multiplicities.{k}"), v)?,
                            ))
                        })
                        .collect::<Result<BTreeMap<_, _>, DocumentError>>()
                })
                .transpose()?;
            Ok::<_, DocumentError>(PencilSection {
                fibers: p.fibers,
                multiplicities,
            })
        })
        .transpose()?;
    let family = raw
        .family
        .map(|f| {
            let vectors = f
                .vectors
                .iter()
                .map(|(k, v)| {
                    let parsed = v
                        .iter()
                        .enumerate()
                        .map(|(i, x)| parse_exact(format!("family.vectors.{k}[{i}]"), x))
                        .collect::<Result<Vec<_>, _>>()?;
                    Ok((k.clone(), parsed))
                })
                .collect::<Result<BTreeMap<_, _>, DocumentError>>()?;
            Ok::<_, DocumentError>(FamilySection {
                dim: f.dim,
                vectors,
            })
        })
        .transpose()?;
    Ok(Document {
        format_version: raw.format_version,
        acc,
        script,
        pencil,
        family,
    })
}

fn parse_acc_section(raw: RawAccSection) -> Result<AccSection, DocumentError> {
    check_unique("component", &raw.components)?;
    check_unique("point", &raw.points)?;
    check_unique("branch", raw.branches.iter().map(|b| &b.name))?;
    let branch_names: Vec<String> = raw.branches.iter().map(|b| b.name.clone()).collect();
    for (i, b) in raw.branches.iter().enumerate() {
        lookup(&raw.components, &b.component, || {
            format!("acc.branches[{i}].component")
        })?;
        lookup(&raw.points, &b.point, || format!("acc.branches[{i}].point"))?;
    }
    let mut mu = Vec::with_capacity(raw.mu.len());
    for (i, entry) in raw.mu.iter().enumerate() {
        for (k, name) in entry.pair.iter().enumerate() {
            lookup(&branch_names, name, || format!("acc.mu[{i}].pair[{k}]"))?;
        }
        mu.push(MuEntry {
            pair: entry.pair.clone(),
            value: parse_count(format!("acc.mu[{i}].value"), &entry.value)?,
        });
    }
    Ok(AccSection {
        components: raw.components,
        points: raw.points,
        branches: raw.branches,
        mu,
    })
}

/// Canonical text: two-space indented JSON with a trailing newline.
pub fn emit_document(doc: &Document) -> String {
    let mut out = serde_json::to_string_pretty(doc).expect("documents always serialize");
    out.push('\n');
    out
}

impl Document {
    pub fn empty() -> Self {
        Document {
            format_version: FORMAT_VERSION,
            acc: None,
            script: None,
            pencil: None,
            family: None,
        }
    }
}

/// Names of the entities of one stage. Retired points lose their name.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Names {
    pub components: Vec<String>,
    pub points: BTreeMap<PointId, String>,
    pub branches: Vec<String>,
}

impl Names {
    /// `c<i>`, `p<i>`, `b<i>` for an ACC without a document.
    pub fn generic(acc: &Acc) -> Self {
        Names {
            components: acc.components().map(|c| c.to_string()).collect(),
            points: acc.points().iter().map(|&p| (p, p.to_string())).collect(),
            branches: acc.branches().map(|b| b.to_string()).collect(),
        }
    }

    pub fn component(&self, c: ComponentId) -> &str {
        &self.components[c.0]
    }

    pub fn point(&self, p: PointId) -> &str {
        self.points.get(&p).map(String::as_str).unwrap_or("?")
    }

    pub fn branch(&self, b: BranchId) -> &str {
        &self.branches[b.0]
    }

    fn point_id(&self, name: &str) -> Option<PointId> {
        self.points
            .iter()
            .find(|(_, n)| *n == name)
            .map(|(&p, _)| p)
    }

    fn branch_id(&self, name: &str) -> Option<BranchId> {
        self.branches.iter().position(|n| n == name).map(BranchId)
    }

    fn component_id(&self, name: &str) -> Option<ComponentId> {
        self.components
            .iter()
            .position(|n| n == name)
            .map(ComponentId)
    }

    /// Adds the names created by a σ-process with `clusters` clusters.
    fn blow_up(
        &mut self,
        point: PointId,
        exceptional: String,
        clusters: usize,
        next_point: usize,
    ) -> Result<(), DocumentError> {
        let new_points: Vec<String> = (1..=clusters)
            .map(|i| format!("{exceptional}.p{i}"))
            .collect();
        let new_branches: Vec<String> = (1..=clusters)
            .map(|i| format!("{exceptional}.b{i}"))
            .collect();
        if self.components.contains(&exceptional) {
            return Err(DocumentError::DuplicateName {
                category: "component",
                name: exceptional,
            });
        }
        if let Some(n) = new_points
            .iter()
            .find(|n| self.points.values().any(|p| p == *n))
        {
            return Err(DocumentError::DuplicateName {
                category: "point",
                name: n.clone(),
            });
        }
        if let Some(n) = new_branches.iter().find(|n| self.branches.contains(n)) {
            return Err(DocumentError::DuplicateName {
                category: "branch",
                name: n.clone(),
            });
        }
        self.points.remove(&point);
        self.components.push(exceptional);
        for (i, name) in new_points.into_iter().enumerate() {
            self.points.insert(PointId(next_point + i), name);
        }
        self.branches.extend(new_branches);
        Ok(())
    }

    /// Names for every stage of `trace`, using `E<n>` for the exceptional of step n.
    pub fn along_trace(&self, trace: &ResolutionTrace) -> Vec<Names> {
        let mut out = vec![self.clone()];
        for (l, step) in trace.steps().iter().enumerate() {
            let mut next = out[l].clone();
            let mut name = format!("E{}", l + 1);
            while next.components.contains(&name) {
                name.push('\'');
            }
            next.blow_up(
                step.spec.point,
                name,
                step.spec.clusters.len(),
                trace.stages()[l].next_point_id().0,
            )
            .expect("fresh names do not clash");
            out.push(next);
        }
        out
    }
}

/// Builds the ACC of a document's `acc` section.
pub fn bind_acc(doc: &Document) -> Result<Result<(Acc, Names), AccError>, DocumentError> {
    let section = doc
        .acc
        .as_ref()
        .ok_or(DocumentError::MissingSection("acc"))?;
    let branch_names: Vec<String> = section.branches.iter().map(|b| b.name.clone()).collect();
    let find =
        |names: &[String], n: &str| names.iter().position(|x| x == n).expect("checked on parse");
    let raw = RawAcc {
        components: section.components.len(),
        points: section.points.len(),
        attach: section
            .branches
            .iter()
            .map(|b| find(&section.points, &b.point))
            .collect(),
        owner: section
            .branches
            .iter()
            .map(|b| find(&section.components, &b.component))
            .collect(),
        mu: section
            .mu
            .iter()
            .map(|m| {
                (
                    find(&branch_names, &m.pair[0]),
                    find(&branch_names, &m.pair[1]),
                    m.value,
                )
            })
            .collect(),
    };
    Ok(validate_acc(&raw).map(|acc| {
        let names = Names {
            components: section.components.clone(),
            points: section
                .points
                .iter()
                .enumerate()
                .map(|(i, n)| (PointId(i), n.clone()))
                .collect(),
            branches: branch_names,
        };
        (acc, names)
    }))
}

/// Resolves names step by step; ids are assigned exactly as the σ-process will assign
/// them. Returns the specs and the names of every stage, starting with `names`.
pub fn bind_script(
    acc: &Acc,
    names: &Names,
    steps: &[ScriptStep],
) -> Result<(Vec<SigmaProcessSpec>, Vec<Names>), DocumentError> {
    let mut stages = vec![names.clone()];
    let mut names = names.clone();
    let mut next_point = acc.next_point_id().0;
    let mut specs = Vec::with_capacity(steps.len());
    for (i, step) in steps.iter().enumerate() {
        let point = names
            .point_id(&step.point)
            .ok_or_else(|| DocumentError::UnknownReference {
                path: format!("script[{i}].point"),
                name: step.point.clone(),
            })?;
        let mut clusters = Vec::with_capacity(step.clusters.len());
        for (k, cluster) in step.clusters.iter().enumerate() {
            let ids = cluster
                .iter()
                .enumerate()
                .map(|(m, n)| {
                    names
                        .branch_id(n)
                        .ok_or_else(|| DocumentError::UnknownReference {
                            path: format!("script[{i}].clusters[{k}][{m}]"),
                            name: n.clone(),
                        })
                })
                .collect::<Result<Vec<_>, _>>()?;
            clusters.push(ids);
        }
        let mut nu: BTreeMap<BranchId, u64> = clusters.iter().flatten().map(|&b| (b, 1)).collect();
        for (n, &value) in step.nu.iter().flatten() {
            let b = names
                .branch_id(n)
                .filter(|b| nu.contains_key(b))
                .ok_or_else(|| DocumentError::UnknownReference {
                    path: format!("script[{i}].nu"),
                    name: n.clone(),
                })?;
            nu.insert(b, value);
        }
        let exceptional = step
            .exceptional
            .clone()
            .unwrap_or_else(|| format!("E{}", i + 1));
        names.blow_up(point, exceptional, clusters.len(), next_point)?;
        next_point += clusters.len();
        specs.push(SigmaProcessSpec::new(point, clusters, nu));
        stages.push(names.clone());
    }
    Ok((specs, stages))
}

/// Fibers and multiplicities by component id. Missing multiplicities default to 1.
pub fn bind_pencil(
    names: &Names,
    section: &PencilSection,
) -> Result<(Vec<Vec<ComponentId>>, Vec<u64>), DocumentError> {
    let fibers = section
        .fibers
        .iter()
        .enumerate()
        .map(|(j, f)| {
            f.iter()
                .enumerate()
                .map(|(k, n)| {
                    names
                        .component_id(n)
                        .ok_or_else(|| DocumentError::UnknownReference {
                            path: format!("pencil.fibers[{j}][{k}]"),
                            name: n.clone(),
                        })
                })
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut mult = vec![1u64; names.components.len()];
    for (n, &m) in section.multiplicities.iter().flatten() {
        let c = names
            .component_id(n)
            .ok_or_else(|| DocumentError::UnknownReference {
                path: "pencil.multiplicities".into(),
                name: n.clone(),
            })?;
        mult[c.0] = m;
    }
    Ok((fibers, mult))
}

/// One vector per named component; every component of `names` needs one.
pub fn bind_family(names: &Names, section: &FamilySection) -> Result<VectorFamily, DocumentError> {
    for n in section.vectors.keys() {
        if names.component_id(n).is_none() {
            return Err(DocumentError::UnknownReference {
                path: "family.vectors".into(),
                name: n.clone(),
            });
        }
    }
    let vectors = names
        .components
        .iter()
        .map(|n| {
            let v = section
                .vectors
                .get(n)
                .ok_or_else(|| DocumentError::MissingEntry {
                    path: format!("family.vectors.{n}"),
                })?;
            if v.len() != section.dim {
                return Err(DocumentError::DimensionMismatch {
                    path: format!("family.vectors.{n}"),
                    expected: section.dim,
                    found: v.len(),
                });
            }
            Ok(v.clone())
        })
        .collect::<Result<Vec<_>, _>>()?;
    VectorFamily::new(section.dim, vectors).map_err(|e| match e {
        AdmissibilityError::ZeroDimension => DocumentError::DimensionMismatch {
            path: "family.dim".into(),
            expected: 1,
            found: 0,
        },
        _ => unreachable!("lengths checked above"),
    })
}

/// The `acc` section describing `acc` under `names`.
pub fn acc_section(acc: &Acc, names: &Names) -> AccSection {
    AccSection {
        components: names.components.clone(),
        points: acc
            .points()
            .iter()
            .map(|&p| names.point(p).to_owned())
            .collect(),
        branches: acc
            .branches()
            .map(|b| BranchEntry {
                name: names.branch(b).to_owned(),
                component: names.component(acc.owner(b)).to_owned(),
                point: names.point(acc.attach(b)).to_owned(),
            })
            .collect(),
        mu: acc
            .mu_entries()
            .map(|((a, b), value)| MuEntry {
                pair: [names.branch(a).to_owned(), names.branch(b).to_owned()],
                value,
            })
            .collect(),
    }
}

/// A script replaying `trace`, named after `stage_names` (from [`Names::along_trace`]).
pub fn script_section(trace: &ResolutionTrace, stage_names: &[Names]) -> Vec<ScriptStep> {
    trace
        .steps()
        .iter()
        .enumerate()
        .map(|(l, step)| {
            let names = &stage_names[l];
            let nu: BTreeMap<String, u64> = step
                .spec
                .nu
                .iter()
                .filter(|(_, &n)| n != 1)
                .map(|(&b, &n)| (names.branch(b).to_owned(), n))
                .collect();
            ScriptStep {
                point: names.point(step.spec.point).to_owned(),
                clusters: step
                    .spec
                    .clusters
                    .iter()
                    .map(|c| c.iter().map(|&b| names.branch(b).to_owned()).collect())
                    .collect(),
                nu: (!nu.is_empty()).then_some(nu),
                exceptional: Some(
                    stage_names[l + 1]
                        .component(step.created.exceptional)
                        .to_owned(),
                ),
            }
        })
        .collect()
}
