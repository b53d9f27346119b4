//! σ-processes, resolution scripts and a bounded search for resolutions.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::acc::{Acc, AccError, BranchId, ComponentId, PointId};
use crate::union_find::DisjointSet;

/// One blow-up: the point, how its branches split into infinitely near points,
/// and the multiplicity ν of every branch at the point.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SigmaProcessSpec {
    pub point: PointId,
    /// Each cluster becomes one new point, in this order. Branches inside a cluster are sorted.
    pub clusters: Vec<Vec<BranchId>>,
    pub nu: BTreeMap<BranchId, u64>,
}

impl SigmaProcessSpec {
    /// Structural constructor; nothing is checked until [`SigmaProcessSpec::check`].
    pub fn new(point: PointId, clusters: Vec<Vec<BranchId>>, nu: BTreeMap<BranchId, u64>) -> Self {
        let clusters = clusters
            .into_iter()
            .map(|mut c| {
                c.sort();
                c
            })
            .collect();
        SigmaProcessSpec {
            point,
            clusters,
            nu,
        }
    }

    /// Same as [`SigmaProcessSpec::new`] with ν = 1 on every listed branch.
    pub fn with_unit_nu(point: PointId, clusters: Vec<Vec<BranchId>>) -> Self {
        let nu = clusters.iter().flatten().map(|&b| (b, 1)).collect();
        Self::new(point, clusters, nu)
    }

    /// Builds and checks against `acc` in one go.
    pub fn checked(
        acc: &Acc,
        point: PointId,
        clusters: Vec<Vec<BranchId>>,
        nu: BTreeMap<BranchId, u64>,
    ) -> Result<Self, BlowupError> {
        let spec = Self::new(point, clusters, nu);
        spec.check(acc)?;
        Ok(spec)
    }

    pub fn nu(&self, b: BranchId) -> u64 {
        self.nu.get(&b).copied().unwrap_or(0)
    }

    /// `ν_i`: the sum of ν over the branches of component `c` at the blown-up point.
    pub fn component_nu(&self, acc: &Acc, c: ComponentId) -> u64 {
        self.nu
            .iter()
            .filter(|(&b, _)| acc.owner(b) == c)
            .map(|(_, &n)| n)
            .sum()
    }

    fn cluster_index(&self) -> BTreeMap<BranchId, usize> {
        self.clusters
            .iter()
            .enumerate()
            .flat_map(|(i, c)| c.iter().map(move |&b| (b, i)))
            .collect()
    }

    /// Checks the cluster and ν invariants against `acc`.
    pub fn check(&self, acc: &Acc) -> Result<(), BlowupError> {
        if !acc.has_point(self.point) {
            return Err(BlowupError::InvalidPoint(self.point));
        }
        let here = acc.branches_at(self.point);
        let listed: Vec<BranchId> = self.clusters.iter().flatten().copied().collect();
        let distinct: BTreeSet<BranchId> = listed.iter().copied().collect();
        if self.clusters.iter().any(Vec::is_empty)
            || distinct.len() != listed.len()
            || !distinct.iter().copied().eq(here.iter().copied())
        {
            return Err(BlowupError::InvalidClusters(self.point));
        }
        if !self.nu.keys().copied().eq(here.iter().copied()) {
            return Err(BlowupError::InvalidNu(self.point));
        }
        if let Some((&b, _)) = self.nu.iter().find(|(_, &n)| n == 0) {
            return Err(BlowupError::InvalidNu(acc.attach(b)));
        }
        let cluster = self.cluster_index();
        for (i, &a) in here.iter().enumerate() {
            for &b in &here[i + 1..] {
                if acc.owner(a) == acc.owner(b) {
                    continue;
                }
                let mu = acc.mu(a, b);
                let product = self.nu(a) * self.nu(b);
                let violation = PairViolation { a, b, mu, product };
                if cluster[&a] == cluster[&b] {
                    if mu <= product {
                        return Err(BlowupError::CohabitationViolation(violation));
                    }
                } else if mu != product {
                    return Err(BlowupError::SeparationViolation(violation));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PairViolation {
    pub a: BranchId,
    pub b: BranchId,
    pub mu: u64,
    pub product: u64,
}

impl fmt::Display for PairViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "branches {} and {}: mu = {}, nu*nu = {}",
            self.a, self.b, self.mu, self.product
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NcWitness {
    BranchCount { point: PointId, count: usize },
    Multiplicity { a: BranchId, b: BranchId, mu: u64 },
}

impl fmt::Display for NcWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NcWitness::BranchCount { point, count } => {
                write!(f, "point {point} carries {count} branches")
            }
            NcWitness::Multiplicity { a, b, mu } => {
                write!(f, "branches {a} and {b} meet with multiplicity {mu}")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum BlowupError {
    #[error("no live point {0}")]
    InvalidPoint(PointId),
    #[error("clusters at {0} do not partition its branches")]
    InvalidClusters(PointId),
    #[error("nu at {0} must give a positive value to exactly the branches of the point")]
    InvalidNu(PointId),
    #[error("separated {0}")]
    SeparationViolation(PairViolation),
    #[error("co-located {0}")]
    CohabitationViolation(PairViolation),
    #[error("step {step}: exceptional branch {branch} has nu = {nu}")]
    ExceptionalMultiplicityViolation {
        step: usize,
        branch: BranchId,
        nu: u64,
    },
    #[error("last stage is not normal crossing: {0}")]
    NotNormalCrossingAtEnd(NcWitness),
    #[error("step {index}: {source}")]
    Step {
        index: usize,
        #[source]
        source: Box<BlowupError>,
    },
    #[error("no resolution within {0} steps")]
    BudgetExhausted(usize),
    #[error("no resolution found")]
    Unsolvable,
    #[error("budget must be at least 1")]
    InvalidBudget,
    #[error(transparent)]
    Acc(#[from] AccError),
}

impl BlowupError {
    pub fn kind(&self) -> &'static str {
        match self {
            BlowupError::InvalidPoint(_) => "InvalidPoint",
            BlowupError::InvalidClusters(_) => "InvalidClusters",
            BlowupError::InvalidNu(_) => "InvalidNu",
            BlowupError::SeparationViolation(_) => "SeparationViolation",
            BlowupError::CohabitationViolation(_) => "CohabitationViolation",
            BlowupError::ExceptionalMultiplicityViolation { .. } => {
                "ExceptionalMultiplicityViolation"
            }
            BlowupError::NotNormalCrossingAtEnd(_) => "NotNormalCrossingAtEnd",
            BlowupError::Step { source, .. } => source.kind(),
            BlowupError::BudgetExhausted(_) => "BudgetExhausted",
            BlowupError::Unsolvable => "Unsolvable",
            BlowupError::InvalidBudget => "InvalidBudget",
            BlowupError::Acc(e) => e.kind(),
        }
    }
}

/// Ids created by one σ-process.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Created {
    pub exceptional: ComponentId,
    /// One per cluster, in cluster order.
    pub points: Vec<PointId>,
    /// The exceptional branch at each new point, in cluster order.
    pub branches: Vec<BranchId>,
}

pub fn apply_sigma_process(
    acc: &Acc,
    spec: &SigmaProcessSpec,
) -> Result<(Acc, Created), BlowupError> {
    spec.check(acc)?;
    let (points, attach, owner, mu) = acc.raw_parts();
    let exceptional = ComponentId(acc.component_count());
    let first_point = acc.next_point_id().0;
    let new_points: Vec<PointId> = (0..spec.clusters.len())
        .map(|i| PointId(first_point + i))
        .collect();
    let new_branches: Vec<BranchId> = (0..spec.clusters.len())
        .map(|i| BranchId(acc.branch_count() + i))
        .collect();

    let mut attach = attach.to_vec();
    let mut owner = owner.to_vec();
    let mut mu = mu.clone();
    for (i, cluster) in spec.clusters.iter().enumerate() {
        for &b in cluster {
            attach[b.0] = new_points[i];
            mu.insert((b, new_branches[i]), spec.nu(b));
        }
        attach.push(new_points[i]);
        owner.push(exceptional);
    }
    let here = acc.branches_at(spec.point);
    for (i, &a) in here.iter().enumerate() {
        for &b in &here[i + 1..] {
            if let Some(m) = mu.get_mut(&(a, b)) {
                // check() guarantees μ ≥ νν for every co-located pair
                *m -= spec.nu(a) * spec.nu(b);
                if *m == 0 {
                    mu.remove(&(a, b));
                }
            }
        }
    }
    let mut live: Vec<PointId> = points
        .iter()
        .copied()
        .filter(|&p| p != spec.point)
        .collect();
    live.extend(&new_points);
    let next = acc.next_point_id().0 + new_points.len();
    let blown = Acc::from_parts(acc.component_count() + 1, live, next, attach, owner, mu)?;
    Ok((
        blown,
        Created {
            exceptional,
            points: new_points,
            branches: new_branches,
        },
    ))
}

/// `Ok` when every point carries exactly two branches meeting with multiplicity at most 1.
pub fn check_normal_crossing(acc: &Acc) -> Result<(), NcWitness> {
    for &p in acc.points() {
        let here = acc.branches_at(p);
        if here.len() != 2 {
            return Err(NcWitness::BranchCount {
                point: p,
                count: here.len(),
            });
        }
        let mu = acc.mu(here[0], here[1]);
        if mu > 1 {
            return Err(NcWitness::Multiplicity {
                a: here[0],
                b: here[1],
                mu,
            });
        }
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Origin {
    Original,
    /// Created by the step with this index.
    Exceptional(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceStep {
    pub spec: SigmaProcessSpec,
    pub created: Created,
    /// `ν_i` for every component with a branch at the blown-up point.
    pub component_nu: BTreeMap<ComponentId, u64>,
}

/// `W₀ ← W₁ ← … ← Wₙ` together with the σ-processes between stages.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResolutionTrace {
    stages: Vec<Acc>,
    steps: Vec<TraceStep>,
    origin: Vec<Origin>,
}

impl ResolutionTrace {
    pub fn stages(&self) -> &[Acc] {
        &self.stages
    }

    pub fn steps(&self) -> &[TraceStep] {
        &self.steps
    }

    pub fn initial(&self) -> &Acc {
        &self.stages[0]
    }

    pub fn last(&self) -> &Acc {
        self.stages.last().expect("a trace has at least one stage")
    }

    pub fn origin(&self, c: ComponentId) -> Origin {
        self.origin[c.0]
    }

    pub fn original_count(&self) -> usize {
        self.initial().component_count()
    }

    pub fn is_original(&self, c: ComponentId) -> bool {
        c.0 < self.original_count()
    }

    pub fn specs(&self) -> Vec<SigmaProcessSpec> {
        self.steps.iter().map(|s| s.spec.clone()).collect()
    }
}

/// Replays `script` from `acc`, requiring ν = 1 on non-original branches and a
/// normal-crossing last stage.
pub fn validate_resolution_script(
    acc: &Acc,
    script: &[SigmaProcessSpec],
) -> Result<ResolutionTrace, BlowupError> {
    let original_branches = acc.branch_count();
    let mut stages = vec![acc.clone()];
    let mut steps = Vec::with_capacity(script.len());
    let mut origin = vec![Origin::Original; acc.component_count()];
    for (index, spec) in script.iter().enumerate() {
        let current = stages.last().expect("non-empty");
        let (next, created) =
            apply_sigma_process(current, spec).map_err(|e| BlowupError::Step {
                index,
                source: Box::new(e),
            })?;
        if let Some((&branch, &nu)) = spec
            .nu
            .iter()
            .find(|(b, &n)| b.0 >= original_branches && n != 1)
        {
            return Err(BlowupError::ExceptionalMultiplicityViolation {
                step: index,
                branch,
                nu,
            });
        }
        let component_nu = spec
            .nu
            .keys()
            .map(|&b| current.owner(b))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .map(|c| (c, spec.component_nu(current, c)))
            .collect();
        origin.push(Origin::Exceptional(index));
        steps.push(TraceStep {
            spec: spec.clone(),
            created,
            component_nu,
        });
        stages.push(next);
    }
    check_normal_crossing(stages.last().expect("non-empty"))
        .map_err(BlowupError::NotNormalCrossingAtEnd)?;
    Ok(ResolutionTrace {
        stages,
        steps,
        origin,
    })
}

/// Depth-first search for a resolution of at most `budget` steps.
///
/// At each stage the first point (by id) that is not normal crossing is blown up;
/// ν vectors are tried by increasing total then lexicographically, and the
/// cluster partition is the one forced by ν.
pub fn auto_resolve(acc: &Acc, budget: usize) -> Result<ResolutionTrace, BlowupError> {
    if budget == 0 {
        return Err(BlowupError::InvalidBudget);
    }
    let mut search = Search {
        original_branches: acc.branch_count(),
        script: Vec::new(),
        cutoff: false,
    };
    if search.run(acc, budget) {
        validate_resolution_script(acc, &search.script)
    } else if search.cutoff {
        Err(BlowupError::BudgetExhausted(budget))
    } else {
        Err(BlowupError::Unsolvable)
    }
}

struct Search {
    original_branches: usize,
    script: Vec<SigmaProcessSpec>,
    cutoff: bool,
}

impl Search {
    fn run(&mut self, stage: &Acc, budget: usize) -> bool {
        let point = match check_normal_crossing(stage) {
            Ok(()) => return true,
            Err(NcWitness::BranchCount { point, .. }) => point,
            Err(NcWitness::Multiplicity { a, .. }) => stage.attach(a),
        };
        if budget == 0 {
            self.cutoff = true;
            return false;
        }
        for spec in candidate_specs(stage, point, self.original_branches) {
            let Ok((next, _)) = apply_sigma_process(stage, &spec) else {
                continue;
            };
            self.script.push(spec);
            if self.run(&next, budget - 1) {
                return true;
            }
            self.script.pop();
        }
        false
    }
}

/// Valid specs at `point` in search order.
fn candidate_specs(acc: &Acc, point: PointId, original_branches: usize) -> Vec<SigmaProcessSpec> {
    let here = acc.branches_at(point);
    let bounds: Vec<u64> = here
        .iter()
        .map(|&b| {
            if b.0 >= original_branches {
                return 1;
            }
            here.iter()
                .filter(|&&o| acc.owner(o) != acc.owner(b))
                .map(|&o| acc.mu(b, o))
                .max()
                .unwrap_or(1)
                .max(1)
        })
        .collect();
    let mut vectors = Vec::new();
    let mut current = vec![1u64; here.len()];
    enumerate_bounded(&bounds, 0, &mut current, &mut vectors);
    vectors.sort_by(|x, y| {
        let (sx, sy): (u64, u64) = (x.iter().sum(), y.iter().sum());
        sx.cmp(&sy).then_with(|| x.cmp(y))
    });
    vectors
        .into_iter()
        .filter_map(|nu| forced_spec(acc, point, here, &nu))
        .collect()
}

fn enumerate_bounded(bounds: &[u64], i: usize, current: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
    if i == bounds.len() {
        out.push(current.clone());
        return;
    }
    for v in 1..=bounds[i] {
        current[i] = v;
        enumerate_bounded(bounds, i + 1, current, out);
    }
}

/// Pairs with μ > νν must share a cluster and pairs with μ = νν must not; the
/// finest partition meeting the first rule is used, if it also meets the second.
fn forced_spec(
    acc: &Acc,
    point: PointId,
    here: &[BranchId],
    nu: &[u64],
) -> Option<SigmaProcessSpec> {
    let mut ds = DisjointSet::new(here.len());
    for i in 0..here.len() {
        for j in i + 1..here.len() {
            if acc.owner(here[i]) == acc.owner(here[j]) {
                continue;
            }
            let mu = acc.mu(here[i], here[j]);
            let product = nu[i] * nu[j];
            if mu < product {
                return None;
            }
            if mu > product {
                ds.union(i, j);
            }
        }
    }
    let clusters: Vec<Vec<BranchId>> = ds
        .classes()
        .into_iter()
        .map(|class| class.into_iter().map(|i| here[i]).collect())
        .collect();
    let spec = SigmaProcessSpec::new(
        point,
        clusters,
        here.iter().copied().zip(nu.iter().copied()).collect(),
    );
    spec.check(acc).ok().map(|_| spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::acc::pairwise_intersection;
    use crate::fixtures;

    fn b(i: usize) -> BranchId {
        BranchId(i)
    }

    #[test]
    fn sixlines_single_blowup() {
        let six = fixtures::sixlines();
        let spec = SigmaProcessSpec::with_unit_nu(PointId(0), (0..6).map(|i| vec![b(i)]).collect());
        let (w, created) = apply_sigma_process(&six, &spec).unwrap();
        assert_eq!(w.component_count(), 7);
        assert_eq!(w.points().len(), 6);
        assert_eq!(w.branch_count(), 12);
        assert_eq!(created.exceptional, ComponentId(6));
        for i in 0..6 {
            for j in i + 1..6 {
                assert_eq!(w.mu(b(i), b(j)), 0);
            }
            assert_eq!(w.mu(b(i), created.branches[i]), 1);
        }
        assert_eq!(check_normal_crossing(&w), Ok(()));
    }

    #[test]
    fn conic_first_blowup() {
        let conic = fixtures::conic();
        let spec = SigmaProcessSpec::with_unit_nu(PointId(0), vec![vec![b(0), b(1)], vec![b(2)]]);
        let (w, created) = apply_sigma_process(&conic, &spec).unwrap();
        assert_eq!(w.mu(b(0), b(1)), 1);
        assert_eq!(w.mu(b(0), b(2)), 0);
        assert_eq!(w.mu(b(2), created.branches[1]), 1);
        assert_eq!(w.attach(b(0)), created.points[0]);
        assert!(!w.has_point(PointId(0)));
    }

    #[test]
    fn conic_cohabitation_violation() {
        let conic = fixtures::conic();
        let spec = SigmaProcessSpec::with_unit_nu(PointId(0), vec![vec![b(0), b(1), b(2)]]);
        assert_eq!(
            apply_sigma_process(&conic, &spec).unwrap_err(),
            BlowupError::CohabitationViolation(PairViolation {
                a: b(0),
                b: b(2),
                mu: 1,
                product: 1
            })
        );
    }

    #[test]
    fn malformed_specs() {
        let conic = fixtures::conic();
        let spec = SigmaProcessSpec::with_unit_nu(PointId(9), vec![vec![b(0)]]);
        assert_eq!(
            spec.check(&conic),
            Err(BlowupError::InvalidPoint(PointId(9)))
        );
        let spec = SigmaProcessSpec::with_unit_nu(PointId(0), vec![vec![b(0), b(1)]]);
        assert_eq!(
            spec.check(&conic),
            Err(BlowupError::InvalidClusters(PointId(0)))
        );
        let mut spec =
            SigmaProcessSpec::with_unit_nu(PointId(0), vec![vec![b(0), b(1)], vec![b(2)]]);
        spec.nu.insert(b(2), 0);
        assert_eq!(spec.check(&conic), Err(BlowupError::InvalidNu(PointId(0))));
        // separating the tangency: 2 != 1
        let spec =
            SigmaProcessSpec::with_unit_nu(PointId(0), vec![vec![b(0)], vec![b(1)], vec![b(2)]]);
        assert!(matches!(
            spec.check(&conic),
            Err(BlowupError::SeparationViolation(_))
        ));
    }

    #[test]
    fn conic_script_resolves() {
        let conic = fixtures::conic();
        let trace = validate_resolution_script(&conic, &fixtures::conic_script()).unwrap();
        assert_eq!(trace.steps().len(), 4);
        assert_eq!(trace.last().component_count(), 8);
        let exceptionals: Vec<_> = trace
            .steps()
            .iter()
            .map(|s| s.created.exceptional)
            .collect();
        assert_eq!(exceptionals, (4..8).map(ComponentId).collect::<Vec<_>>());
        assert_eq!(trace.origin(ComponentId(6)), Origin::Exceptional(2));
    }

    #[test]
    fn truncated_conic_script_is_not_normal_crossing() {
        let conic = fixtures::conic();
        let script = &fixtures::conic_script()[..2];
        assert!(matches!(
            validate_resolution_script(&conic, script),
            Err(BlowupError::NotNormalCrossingAtEnd(
                NcWitness::BranchCount { count: 3, .. }
            ))
        ));
    }

    #[test]
    fn exceptional_branches_need_unit_nu() {
        let raw = crate::acc::RawAcc {
            components: 1,
            points: 1,
            attach: vec![0],
            owner: vec![0],
            mu: vec![],
        };
        let acc = crate::acc::validate_acc(&raw).unwrap();
        let script = vec![
            SigmaProcessSpec::new(PointId(0), vec![vec![b(0)]], [(b(0), 2)].into()),
            SigmaProcessSpec::new(
                PointId(1),
                vec![vec![b(0)], vec![b(1)]],
                [(b(0), 1), (b(1), 2)].into(),
            ),
        ];
        assert_eq!(
            validate_resolution_script(&acc, &script).unwrap_err(),
            BlowupError::ExceptionalMultiplicityViolation {
                step: 1,
                branch: b(1),
                nu: 2
            }
        );
    }

    #[test]
    fn normal_crossing_witnesses() {
        assert_eq!(
            check_normal_crossing(&fixtures::sixlines()),
            Err(NcWitness::BranchCount {
                point: PointId(0),
                count: 6
            })
        );
    }

    #[test]
    fn auto_resolve_fixtures() {
        let six = fixtures::sixlines();
        let trace = auto_resolve(&six, 10).unwrap();
        assert_eq!(trace.steps().len(), 1);
        assert_eq!(trace.steps()[0].spec.clusters.len(), 6);

        let conic = fixtures::conic();
        let trace = auto_resolve(&conic, 10).unwrap();
        assert_eq!(trace.specs(), fixtures::conic_script());

        let resolved = trace.last().clone();
        let again = auto_resolve(&resolved, 1).unwrap();
        assert!(again.steps().is_empty());
    }

    #[test]
    fn auto_resolve_budget() {
        let conic = fixtures::conic();
        assert_eq!(
            auto_resolve(&conic, 3),
            Err(BlowupError::BudgetExhausted(3))
        );
        assert_eq!(auto_resolve(&conic, 0), Err(BlowupError::InvalidBudget));
    }

    #[test]
    fn conservation_along_conic_script() {
        let conic = fixtures::conic();
        let trace = validate_resolution_script(&conic, &fixtures::conic_script()).unwrap();
        for (l, step) in trace.steps().iter().enumerate() {
            let (before, after) = (&trace.stages()[l], &trace.stages()[l + 1]);
            for i in conic.components() {
                for j in conic.components().filter(|&j| j != i) {
                    let ni = step.component_nu.get(&i).copied().unwrap_or(0);
                    let nj = step.component_nu.get(&j).copied().unwrap_or(0);
                    assert_eq!(
                        pairwise_intersection(before, i, j).unwrap(),
                        ni * nj + pairwise_intersection(after, i, j).unwrap()
                    );
                }
            }
        }
    }
}
