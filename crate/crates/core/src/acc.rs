//! The abstract curve combinatorics data model.
//!
//! An [`Acc`] records components, points and local branches together with the
//! attachment maps (branch → point, branch → component) and the intersection
//! multiplicity of every unordered branch pair. Identifiers are dense indices;
//! points are the only entities that can disappear (a σ-process retires the
//! point it blows up), so point ids may have gaps while component and branch
//! ids are always `0..n`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::Zero;
use serde::Serialize;

use crate::rational::{rational_sqrt, Rational};
use crate::union_find::DisjointSet;

macro_rules! id_type {
    ($(#[$meta:meta])* $name:ident, $prefix:literal) => {
        $(#[$meta])*
        #[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
        #[serde(transparent)]
        pub struct $name(pub usize);

        impl $name {
            pub fn index(self) -> usize {
                self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, concat!($prefix, "{}"), self.0)
            }
        }
    };
}

id_type!(
    /// Index of an irreducible component.
    ComponentId,
    "c"
);
id_type!(
    /// Index of a point. Retired points keep their id; it is never handed out again.
    PointId,
    "p"
);
id_type!(
    /// Index of a local branch.
    BranchId,
    "b"
);

/// Unvalidated tables, indices only.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RawAcc {
    pub components: usize,
    pub points: usize,
    /// `attach[b]` is the point carrying branch `b`.
    pub attach: Vec<usize>,
    /// `owner[b]` is the component owning branch `b`.
    pub owner: Vec<usize>,
    /// Unordered branch pairs with their multiplicity. Pairs not listed are 0.
    pub mu: Vec<(usize, usize, u64)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MapTarget {
    Point(PointId),
    Component(ComponentId),
}

impl fmt::Display for MapTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MapTarget::Point(p) => write!(f, "point {p}"),
            MapTarget::Component(c) => write!(f, "component {c}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PositivityReason {
    /// μ > 0 for branches at different points.
    DifferentPoints,
    /// μ > 0 for branches of the same component.
    SameComponent,
    /// μ = 0 for co-located branches of different components.
    MissingIntersection,
}

impl fmt::Display for PositivityReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PositivityReason::DifferentPoints => "positive multiplicity across different points",
            PositivityReason::SameComponent => "positive multiplicity within one component",
            PositivityReason::MissingIntersection => {
                "zero multiplicity for co-located branches of distinct components"
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum AccError {
    #[error("malformed tables: {0}")]
    Malformed(String),
    #[error("{0} owns no branch")]
    NonSurjectiveMap(MapTarget),
    #[error("branches {a} and {b} (mu = {mu}): {reason}")]
    PositivityViolation {
        a: BranchId,
        b: BranchId,
        mu: u64,
        reason: PositivityReason,
    },
    #[error("intersection of a component with itself requested ({0})")]
    SameComponent(ComponentId),
    #[error(
        "Bezout condition fails for {component}: d[{}]d[{}]/d[{}] = {first_value} but \
         d[{}]d[{}]/d[{}] = {second_value}",
        pair_label(*component, first.0), pair_label(*component, first.1), pair_label(first.0, first.1),
        pair_label(*component, second.0), pair_label(*component, second.1), pair_label(second.0, second.1)
    )]
    BezoutViolation {
        component: ComponentId,
        first: (ComponentId, ComponentId),
        second: (ComponentId, ComponentId),
        first_value: Box<Rational>,
        second_value: Box<Rational>,
    },
    #[error("components {0} and {1} do not intersect")]
    ZeroPairwiseIntersection(ComponentId, ComponentId),
    #[error("degree of {component} is not rational (d^2 = {degree_sq})")]
    IrrationalDegree {
        component: ComponentId,
        degree_sq: Box<Rational>,
    },
    #[error("degrees need at least 3 components, found {0}")]
    TooFewComponents(usize),
}

fn pair_label(a: ComponentId, b: ComponentId) -> String {
    format!("{},{}", a.0, b.0)
}

impl AccError {
    pub fn kind(&self) -> &'static str {
        match self {
            AccError::Malformed(_) => "MalformedTables",
            AccError::NonSurjectiveMap(_) => "NonSurjectiveMap",
            AccError::PositivityViolation { .. } => "PositivityViolation",
            AccError::SameComponent(_) => "SameComponent",
            AccError::BezoutViolation { .. } => "BezoutViolation",
            AccError::ZeroPairwiseIntersection(..) => "ZeroPairwiseIntersection",
            AccError::IrrationalDegree { .. } => "IrrationalDegree",
            AccError::TooFewComponents(_) => "TooFewComponents",
        }
    }
}

/// A validated ACC. Immutable once built.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Acc {
    n_components: usize,
    points: Vec<PointId>,
    next_point: usize,
    attach: Vec<PointId>,
    owner: Vec<ComponentId>,
    mu: BTreeMap<(BranchId, BranchId), u64>,
    at_point: BTreeMap<PointId, Vec<BranchId>>,
}

fn key(a: BranchId, b: BranchId) -> (BranchId, BranchId) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

impl Acc {
    /// Builds and validates. `points` lists the live points; `mu` holds positive entries only.
    pub(crate) fn from_parts(
        n_components: usize,
        points: Vec<PointId>,
        next_point: usize,
        attach: Vec<PointId>,
        owner: Vec<ComponentId>,
        mu: BTreeMap<(BranchId, BranchId), u64>,
    ) -> Result<Self, AccError> {
        if attach.len() != owner.len() {
            return Err(AccError::Malformed(format!(
                "{} attachments for {} owners",
                attach.len(),
                owner.len()
            )));
        }
        let live: BTreeSet<PointId> = points.iter().copied().collect();
        if live.len() != points.len() {
            return Err(AccError::Malformed("repeated point id".into()));
        }
        let mut at_point: BTreeMap<PointId, Vec<BranchId>> =
            live.iter().map(|&p| (p, Vec::new())).collect();
        let mut owned = vec![false; n_components];
        for (b, (&p, &c)) in attach.iter().zip(&owner).enumerate() {
            let list = at_point.get_mut(&p).ok_or_else(|| {
                AccError::Malformed(format!("branch b{b} attached to unknown point {p}"))
            })?;
            list.push(BranchId(b));
            if c.0 >= n_components {
                return Err(AccError::Malformed(format!(
                    "branch b{b} owned by unknown component {c}"
                )));
            }
            owned[c.0] = true;
        }
        if let Some((&p, _)) = at_point.iter().find(|(_, v)| v.is_empty()) {
            return Err(AccError::NonSurjectiveMap(MapTarget::Point(p)));
        }
        if let Some(c) = owned.iter().position(|o| !o) {
            return Err(AccError::NonSurjectiveMap(MapTarget::Component(
                ComponentId(c),
            )));
        }
        for (&(a, b), &m) in &mu {
            if a >= b || b.0 >= attach.len() {
                return Err(AccError::Malformed(format!(
                    "bad multiplicity key ({a}, {b})"
                )));
            }
            let reason = if attach[a.0] != attach[b.0] {
                Some(PositivityReason::DifferentPoints)
            } else if owner[a.0] == owner[b.0] {
                Some(PositivityReason::SameComponent)
            } else if m == 0 {
                Some(PositivityReason::MissingIntersection)
            } else {
                None
            };
            if let Some(reason) = reason {
                return Err(AccError::PositivityViolation {
                    a,
                    b,
                    mu: m,
                    reason,
                });
            }
        }
        for branches in at_point.values() {
            for (i, &a) in branches.iter().enumerate() {
                for &b in &branches[i + 1..] {
                    if owner[a.0] != owner[b.0] && !mu.contains_key(&(a, b)) {
                        return Err(AccError::PositivityViolation {
                            a,
                            b,
                            mu: 0,
                            reason: PositivityReason::MissingIntersection,
                        });
                    }
                }
            }
        }
        Ok(Acc {
            n_components,
            points: live.into_iter().collect(),
            next_point,
            attach,
            owner,
            mu,
            at_point,
        })
    }

    pub fn component_count(&self) -> usize {
        self.n_components
    }

    pub fn components(&self) -> impl Iterator<Item = ComponentId> + '_ {
        (0..self.n_components).map(ComponentId)
    }

    /// Live points in ascending id order.
    pub fn points(&self) -> &[PointId] {
        &self.points
    }

    pub fn has_point(&self, p: PointId) -> bool {
        self.at_point.contains_key(&p)
    }

    /// The id the next created point will receive.
    pub fn next_point_id(&self) -> PointId {
        PointId(self.next_point)
    }

    pub fn branch_count(&self) -> usize {
        self.attach.len()
    }

    pub fn branches(&self) -> impl Iterator<Item = BranchId> + '_ {
        (0..self.attach.len()).map(BranchId)
    }

    pub fn attach(&self, b: BranchId) -> PointId {
        self.attach[b.0]
    }

    pub fn owner(&self, b: BranchId) -> ComponentId {
        self.owner[b.0]
    }

    /// Branches at `p` in ascending id order; empty for unknown points.
    pub fn branches_at(&self, p: PointId) -> &[BranchId] {
        self.at_point.get(&p).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn branches_of(&self, c: ComponentId) -> Vec<BranchId> {
        self.branches().filter(|&b| self.owner(b) == c).collect()
    }

    pub fn mu(&self, a: BranchId, b: BranchId) -> u64 {
        self.mu.get(&key(a, b)).copied().unwrap_or(0)
    }

    /// Positive multiplicities, keyed by ordered pairs `(a, b)` with `a < b`.
    pub fn mu_entries(&self) -> impl Iterator<Item = ((BranchId, BranchId), u64)> + '_ {
        self.mu.iter().map(|(&k, &v)| (k, v))
    }

    /// All `d[i][j]` at once; the diagonal is 0.
    pub fn pairwise_table(&self) -> Vec<Vec<u64>> {
        let mut table = vec![vec![0u64; self.n_components]; self.n_components];
        for ((a, b), m) in self.mu_entries() {
            let (i, j) = (self.owner(a).0, self.owner(b).0);
            table[i][j] += m;
            table[j][i] += m;
        }
        table
    }

    pub(crate) fn raw_parts(&self) -> RawParts<'_> {
        (&self.points, &self.attach, &self.owner, &self.mu)
    }
}

pub(crate) type RawParts<'a> = (
    &'a [PointId],
    &'a [PointId],
    &'a [ComponentId],
    &'a BTreeMap<(BranchId, BranchId), u64>,
);

pub fn validate_acc(raw: &RawAcc) -> Result<Acc, AccError> {
    if raw.attach.len() != raw.owner.len() {
        return Err(AccError::Malformed(format!(
            "{} attachments for {} owners",
            raw.attach.len(),
            raw.owner.len()
        )));
    }
    let nb = raw.attach.len();
    if let Some(b) = raw.attach.iter().position(|&p| p >= raw.points) {
        return Err(AccError::Malformed(format!(
            "branch b{b} attached to point out of range"
        )));
    }
    if let Some(b) = raw.owner.iter().position(|&c| c >= raw.components) {
        return Err(AccError::Malformed(format!(
            "branch b{b} owned by component out of range"
        )));
    }
    let mut mu = BTreeMap::new();
    for &(a, b, m) in &raw.mu {
        if a >= nb || b >= nb {
            return Err(AccError::Malformed(format!(
                "multiplicity entry ({a}, {b}) out of range"
            )));
        }
        let (a, b) = (BranchId(a), BranchId(b));
        if a == b {
            if m > 0 {
                return Err(AccError::PositivityViolation {
                    a,
                    b,
                    mu: m,
                    reason: PositivityReason::SameComponent,
                });
            }
            continue;
        }
        if mu.insert(key(a, b), m).is_some() {
            return Err(AccError::Malformed(format!(
                "multiplicity of ({a}, {b}) listed twice"
            )));
        }
    }
    // Explicit zeros are fine where zero is required; elsewhere they surface as
    // missing intersections below.
    mu.retain(|_, m| *m > 0);
    Acc::from_parts(
        raw.components,
        (0..raw.points).map(PointId).collect(),
        raw.points,
        raw.attach.iter().map(|&p| PointId(p)).collect(),
        raw.owner.iter().map(|&c| ComponentId(c)).collect(),
        mu,
    )
}

/// `d[i][j]`: total multiplicity between branches of `i` and branches of `j`.
pub fn pairwise_intersection(acc: &Acc, i: ComponentId, j: ComponentId) -> Result<u64, AccError> {
    if i == j {
        return Err(AccError::SameComponent(i));
    }
    Ok(acc
        .mu_entries()
        .filter(|((a, b), _)| {
            let (oa, ob) = (acc.owner(*a), acc.owner(*b));
            (oa == i && ob == j) || (oa == j && ob == i)
        })
        .map(|(_, m)| m)
        .sum())
}

/// `μ(δ, j)`: multiplicity of branch `δ` against all branches of component `j`.
pub fn branch_component_multiplicity(acc: &Acc, branch: BranchId, j: ComponentId) -> u64 {
    acc.branches_at(acc.attach(branch))
        .iter()
        .filter(|&&b| acc.owner(b) == j)
        .map(|&b| acc.mu(branch, b))
        .sum()
}

/// Pairwise intersections and the degrees they imply.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DegreeData {
    pairwise: Vec<Vec<u64>>,
    degree_sq: Vec<Rational>,
    degree: Vec<Rational>,
}

impl DegreeData {
    /// Takes `degrees` at face value without checking them against the tables.
    /// Meant for exploring inconsistent inputs; [`compute_degrees`] is the checked route.
    pub fn with_assumed_degrees(acc: &Acc, degrees: Vec<Rational>) -> Self {
        assert_eq!(
            degrees.len(),
            acc.component_count(),
            "one degree per component"
        );
        DegreeData {
            pairwise: acc.pairwise_table(),
            degree_sq: degrees.iter().map(|d| d * d).collect(),
            degree: degrees,
        }
    }

    pub fn component_count(&self) -> usize {
        self.degree.len()
    }

    pub fn pairwise(&self, i: ComponentId, j: ComponentId) -> u64 {
        self.pairwise[i.0][j.0]
    }

    pub fn degree(&self, c: ComponentId) -> &Rational {
        &self.degree[c.0]
    }

    pub fn degree_sq(&self, c: ComponentId) -> &Rational {
        &self.degree_sq[c.0]
    }

    pub fn degrees(&self) -> &[Rational] {
        &self.degree
    }
}

/// Checks the Bézout condition and extracts the (rational) degree of each component.
pub fn compute_degrees(acc: &Acc) -> Result<DegreeData, AccError> {
    let n = acc.component_count();
    if n < 3 {
        return Err(AccError::TooFewComponents(n));
    }
    let table = acc.pairwise_table();
    for (j, row) in table.iter().enumerate() {
        for (k, &m) in row.iter().enumerate().skip(j + 1) {
            if m == 0 {
                return Err(AccError::ZeroPairwiseIntersection(
                    ComponentId(j),
                    ComponentId(k),
                ));
            }
        }
    }
    let quotient = |i: usize, j: usize, k: usize| {
        Rational::new((table[i][j] * table[i][k]).into(), table[j][k].into())
    };
    let mut degree_sq = Vec::with_capacity(n);
    let mut degree = Vec::with_capacity(n);
    for i in 0..n {
        let mut first: Option<((usize, usize), Rational)> = None;
        for j in (0..n).filter(|&j| j != i) {
            for k in (j + 1..n).filter(|&k| k != i) {
                let q = quotient(i, j, k);
                match &first {
                    None => first = Some(((j, k), q)),
                    Some((pair, q0)) if *q0 != q => {
                        return Err(AccError::BezoutViolation {
                            component: ComponentId(i),
                            first: (ComponentId(pair.0), ComponentId(pair.1)),
                            second: (ComponentId(j), ComponentId(k)),
                            first_value: Box::new(q0.clone()),
                            second_value: Box::new(q),
                        })
                    }
                    Some(_) => {}
                }
            }
        }
        let (_, sq) = first.expect("n >= 3 leaves at least one pair");
        let d = rational_sqrt(&sq).ok_or_else(|| AccError::IrrationalDegree {
            component: ComponentId(i),
            degree_sq: Box::new(sq.clone()),
        })?;
        debug_assert!(!d.is_zero());
        degree_sq.push(sq);
        degree.push(d);
    }
    Ok(DegreeData {
        pairwise: table,
        degree_sq,
        degree,
    })
}

/// Partitions `keep` by chains of intersecting components that stay inside `keep`.
/// Parts are sorted and ordered by their smallest member.
pub fn connected_components(acc: &Acc, keep: &[ComponentId]) -> Vec<Vec<ComponentId>> {
    let kept: BTreeSet<ComponentId> = keep.iter().copied().collect();
    let kept: Vec<ComponentId> = kept.into_iter().collect();
    let mut slot = vec![usize::MAX; acc.component_count()];
    for (i, c) in kept.iter().enumerate() {
        debug_assert!(c.0 < acc.component_count());
        slot[c.0] = i;
    }
    let mut ds = DisjointSet::new(kept.len());
    for ((a, b), _) in acc.mu_entries() {
        let (sa, sb) = (slot[acc.owner(a).0], slot[acc.owner(b).0]);
        if sa != usize::MAX && sb != usize::MAX {
            ds.union(sa, sb);
        }
    }
    ds.classes()
        .into_iter()
        .map(|class| class.into_iter().map(|i| kept[i]).collect())
        .collect()
}
