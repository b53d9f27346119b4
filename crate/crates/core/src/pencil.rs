//! Combinatorial pencils: verification, refinement order, primitivity and the
//! primitive refinement read off the affine boxes of `Q`.

use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::hash::{Hash, Hasher};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::acc::{connected_components, Acc, BranchId, ComponentId, DegreeData, PointId};
use crate::admissibility::{
    family_from_pencil, transport_to_end, AdmissibilityError, VectorFamily,
};
use crate::blowup::{check_normal_crossing, NcWitness, ResolutionTrace};
use crate::rational::{gcd_u64, Rational};
use crate::spectra::{
    build_spectral_data, decompose_boxes, BoxDecomposition, SpectraError, SpectralData, VinbergType,
};

fn fingerprint(acc: &Acc) -> u64 {
    let mut h = DefaultHasher::new();
    acc.hash(&mut h);
    h.finish()
}

/// A verified combinatorial pencil. Fibers are sorted and ordered by their smallest component.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CombinatorialPencil {
    fibers: Vec<Vec<ComponentId>>,
    mult: Vec<u64>,
    fiber_degree: Rational,
    acc_fingerprint: u64,
}

impl CombinatorialPencil {
    pub fn fibers(&self) -> &[Vec<ComponentId>] {
        &self.fibers
    }

    pub fn multiplicities(&self) -> &[u64] {
        &self.mult
    }

    pub fn multiplicity(&self, c: ComponentId) -> u64 {
        self.mult[c.0]
    }

    pub fn fiber_degree(&self) -> &Rational {
        &self.fiber_degree
    }

    pub fn component_count(&self) -> usize {
        self.mult.len()
    }

    pub fn gcd(&self) -> u64 {
        gcd_u64(self.mult.iter().copied())
    }

    pub fn is_normalized(&self) -> bool {
        self.gcd() == 1
    }

    /// Index of the fiber containing `c`.
    pub fn fiber_of(&self, c: ComponentId) -> usize {
        self.fibers
            .iter()
            .position(|f| f.contains(&c))
            .expect("fibers cover every component")
    }

    /// Whether this pencil was verified against exactly `acc`.
    pub fn is_verified_for(&self, acc: &Acc) -> bool {
        self.acc_fingerprint == fingerprint(acc)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PointStatus {
    /// All branches belong to components of this fiber.
    SingleFiber(usize),
    /// `k_δ` for every branch at the point.
    BasePoint(BTreeMap<BranchId, u64>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasePointReport {
    pub points: Vec<(PointId, PointStatus)>,
}

impl BasePointReport {
    pub fn base_points(&self) -> impl Iterator<Item = (PointId, &BTreeMap<BranchId, u64>)> {
        self.points.iter().filter_map(|(p, s)| match s {
            PointStatus::BasePoint(k) => Some((*p, k)),
            PointStatus::SingleFiber(_) => None,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PrimitivityWitness {
    /// The fiber (by index) falls apart into these parts once trivial divisors are removed.
    DisconnectedFiber {
        fiber: usize,
        parts: Vec<Vec<ComponentId>>,
    },
    Gcd(u64),
}

impl fmt::Display for PrimitivityWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PrimitivityWitness::DisconnectedFiber { fiber, parts } => {
                write!(f, "fiber {fiber} splits into {} parts", parts.len())
            }
            PrimitivityWitness::Gcd(g) => write!(f, "multiplicities have gcd {g}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimitivityReport {
    pub primitive: bool,
    pub witness: Option<PrimitivityWitness>,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum PencilError {
    #[error("fibers do not partition the {0} components")]
    NotAPartition(usize),
    #[error("{found} multiplicities for {expected} components")]
    MultiplicityCount { expected: usize, found: usize },
    #[error("a pencil needs at least 3 fibers, found {0}")]
    TooFewFibers(usize),
    #[error("multiplicity of {0} must be positive")]
    NonPositiveMultiplicity(ComponentId),
    #[error("degree data covers {degrees} components, configuration has {components}")]
    DegreeMismatch { components: usize, degrees: usize },
    #[error("fiber {} has degree {}, fiber {} has degree {}", first.0, first.1, second.0, second.1)]
    FiberDegreeMismatch {
        first: Box<(usize, Rational)>,
        second: Box<(usize, Rational)>,
    },
    #[error("at {point}, branch {branch} sees fiber sums {sums:?}")]
    BasePointImbalance {
        point: PointId,
        branch: BranchId,
        /// `(fiber index, Σ m μ)` for every fiber not containing the branch's component.
        sums: Vec<(usize, u64)>,
    },
    #[error("pencils on {0} and {1} components")]
    ComponentSetMismatch(usize, usize),
    #[error("trace does not end in normal crossing: {0}")]
    NotResolved(NcWitness),
    #[error("trace does not start at the pencil's configuration")]
    TraceMismatch,
    #[error("box {index} is of type {kind}")]
    NonAffineBox { index: usize, kind: VinbergType },
    #[error("box {0} contains no original component")]
    EmptyFiber(usize),
    #[error("refined pencil fails verification: {0}")]
    RefinedPencilInvalid(Box<PencilError>),
    #[error("refined pencil does not refine the input")]
    NotARefinement,
    #[error("refined pencil is not primitive: {0}")]
    RefinedNotPrimitive(PrimitivityWitness),
    #[error(transparent)]
    Admissibility(#[from] AdmissibilityError),
    #[error(transparent)]
    Spectra(#[from] SpectraError),
}

impl PencilError {
    pub fn kind(&self) -> &'static str {
        match self {
            PencilError::NotAPartition(_) => "NotAPartition",
            PencilError::MultiplicityCount { .. } => "MultiplicityCount",
            PencilError::TooFewFibers(_) => "TooFewFibers",
            PencilError::NonPositiveMultiplicity(_) => "NonPositiveMultiplicity",
            PencilError::DegreeMismatch { .. } => "DegreeMismatch",
            PencilError::FiberDegreeMismatch { .. } => "FiberDegreeMismatch",
            PencilError::BasePointImbalance { .. } => "BasePointImbalance",
            PencilError::ComponentSetMismatch(..) => "ComponentSetMismatch",
            PencilError::NotResolved(_) => "NotResolved",
            PencilError::TraceMismatch => "TraceMismatch",
            PencilError::NonAffineBox { .. } => "NonAffineBox",
            PencilError::EmptyFiber(_) => "EmptyFiber",
            PencilError::RefinedPencilInvalid(_) => "RefinedPencilInvalid",
            PencilError::NotARefinement => "NotARefinement",
            PencilError::RefinedNotPrimitive(_) => "RefinedNotPrimitive",
            PencilError::Admissibility(e) => e.kind(),
            PencilError::Spectra(e) => e.kind(),
        }
    }
}

/// Checks equal fiber degrees and, at every point touching two or more fibers, that
/// each branch sees the same weighted sum `Σ m_φ(δ′) μ(δ, δ′)` from every other fiber.
pub fn verify_pencil(
    acc: &Acc,
    degrees: &DegreeData,
    fibers: &[Vec<ComponentId>],
    mult: &[u64],
) -> Result<(CombinatorialPencil, BasePointReport), PencilError> {
    let n = acc.component_count();
    if mult.len() != n {
        return Err(PencilError::MultiplicityCount {
            expected: n,
            found: mult.len(),
        });
    }
    if degrees.component_count() != n {
        return Err(PencilError::DegreeMismatch {
            components: n,
            degrees: degrees.component_count(),
        });
    }
    let mut fibers: Vec<Vec<ComponentId>> = fibers
        .iter()
        .map(|f| {
            let mut f = f.clone();
            f.sort();
            f
        })
        .collect();
    let listed: Vec<ComponentId> = fibers.iter().flatten().copied().collect();
    let distinct: BTreeSet<ComponentId> = listed.iter().copied().collect();
    if fibers.iter().any(Vec::is_empty)
        || distinct.len() != listed.len()
        || !distinct.iter().copied().eq(acc.components())
    {
        return Err(PencilError::NotAPartition(n));
    }
    fibers.sort();
    if fibers.len() < 3 {
        return Err(PencilError::TooFewFibers(fibers.len()));
    }
    if let Some(i) = mult.iter().position(|&m| m == 0) {
        return Err(PencilError::NonPositiveMultiplicity(ComponentId(i)));
    }
    let fiber_degrees: Vec<Rational> = fibers
        .iter()
        .map(|f| {
            f.iter()
                .map(|&c| Rational::from_integer(mult[c.0].into()) * degrees.degree(c))
                .sum()
        })
        .collect();
    if let Some(j) = fiber_degrees.iter().position(|d| *d != fiber_degrees[0]) {
        return Err(PencilError::FiberDegreeMismatch {
            first: Box::new((0, fiber_degrees[0].clone())),
            second: Box::new((j, fiber_degrees[j].clone())),
        });
    }
    let mut fiber_of = vec![0usize; n];
    for (j, f) in fibers.iter().enumerate() {
        for &c in f {
            fiber_of[c.0] = j;
        }
    }
    let mut points = Vec::with_capacity(acc.points().len());
    for &p in acc.points() {
        let here = acc.branches_at(p);
        let touched: BTreeSet<usize> = here.iter().map(|&b| fiber_of[acc.owner(b).0]).collect();
        if touched.len() == 1 {
            points.push((
                p,
                PointStatus::SingleFiber(*touched.first().expect("non-empty")),
            ));
            continue;
        }
        let mut k = BTreeMap::new();
        for &delta in here {
            let own = fiber_of[acc.owner(delta).0];
            let mut sums = vec![0u64; fibers.len()];
            for &other in here {
                sums[fiber_of[acc.owner(other).0]] +=
                    mult[acc.owner(other).0] * acc.mu(delta, other);
            }
            let foreign: Vec<(usize, u64)> = sums
                .into_iter()
                .enumerate()
                .filter(|&(j, _)| j != own)
                .collect();
            if foreign.iter().any(|&(_, s)| s != foreign[0].1) {
                return Err(PencilError::BasePointImbalance {
                    point: p,
                    branch: delta,
                    sums: foreign,
                });
            }
            k.insert(delta, foreign[0].1);
        }
        points.push((p, PointStatus::BasePoint(k)));
    }
    Ok((
        CombinatorialPencil {
            fibers,
            mult: mult.to_vec(),
            fiber_degree: fiber_degrees[0].clone(),
            acc_fingerprint: fingerprint(acc),
        },
        BasePointReport { points },
    ))
}

/// Every fiber of `fine` lies inside a fiber of `coarse`.
pub fn is_refinement(
    fine: &CombinatorialPencil,
    coarse: &CombinatorialPencil,
) -> Result<bool, PencilError> {
    if fine.component_count() != coarse.component_count() {
        return Err(PencilError::ComponentSetMismatch(
            fine.component_count(),
            coarse.component_count(),
        ));
    }
    Ok(fine.fibers.iter().all(|f| {
        let target = coarse.fiber_of(f[0]);
        f.iter().all(|&c| coarse.fiber_of(c) == target)
    }))
}

/// Each fiber stays connected on the last stage of `trace` once components with a
/// zero vector in `fam` are removed, and the multiplicities have gcd 1.
pub fn is_primitive(
    pencil: &CombinatorialPencil,
    trace: &ResolutionTrace,
    fam: &VectorFamily,
) -> Result<PrimitivityReport, PencilError> {
    let last = trace.last();
    check_normal_crossing(last).map_err(PencilError::NotResolved)?;
    if pencil.component_count() != trace.original_count() {
        return Err(PencilError::ComponentSetMismatch(
            pencil.component_count(),
            trace.original_count(),
        ));
    }
    if fam.len() != last.component_count() {
        return Err(AdmissibilityError::CoverageMismatch {
            components: last.component_count(),
            vectors: fam.len(),
        }
        .into());
    }
    let keep: Vec<ComponentId> = last.components().filter(|&c| !fam.is_zero(c)).collect();
    let parts = connected_components(last, &keep);
    let part_of = |c: ComponentId| parts.iter().position(|p| p.contains(&c));
    for (j, fiber) in pencil.fibers.iter().enumerate() {
        let touched: BTreeSet<Option<usize>> = fiber.iter().map(|&c| part_of(c)).collect();
        if touched.len() > 1 {
            let split = touched
                .into_iter()
                .map(|p| match p {
                    Some(p) => parts[p]
                        .iter()
                        .copied()
                        .filter(|c| fiber.contains(c))
                        .collect(),
                    None => fiber
                        .iter()
                        .copied()
                        .filter(|&c| part_of(c).is_none())
                        .collect(),
                })
                .collect();
            return Ok(PrimitivityReport {
                primitive: false,
                witness: Some(PrimitivityWitness::DisconnectedFiber {
                    fiber: j,
                    parts: split,
                }),
            });
        }
    }
    let g = pencil.gcd();
    Ok(if g == 1 {
        PrimitivityReport {
            primitive: true,
            witness: None,
        }
    } else {
        PrimitivityReport {
            primitive: false,
            witness: Some(PrimitivityWitness::Gcd(g)),
        }
    })
}

/// Everything computed on the way to a primitive refinement.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Refinement {
    pub pencil: CombinatorialPencil,
    pub base_points: BasePointReport,
    pub spectral: SpectralData,
    pub boxes: BoxDecomposition,
    /// `d̄·u_λ` for each box, with `u_λ` its primitive kernel generator.
    pub box_degrees: Vec<Rational>,
}

/// Splits `pencil` along the boxes of `Q`: each box meets the original components in
/// one new fiber, and the kernel generator of the box, divided by its degree and
/// scaled to coprime integers, gives the multiplicities.
pub fn primitive_refinement(
    acc: &Acc,
    degrees: &DegreeData,
    pencil: &CombinatorialPencil,
    trace: &ResolutionTrace,
) -> Result<Refinement, PencilError> {
    if trace.initial() != acc {
        return Err(PencilError::TraceMismatch);
    }
    let fam = transport_to_end(trace, &family_from_pencil(acc, pencil)?)?;
    let spectral = build_spectral_data(trace, degrees, &fam)?;
    let mut boxes = decompose_boxes(&spectral);
    boxes.classify()?;
    if let Some((index, b)) = boxes
        .boxes
        .iter()
        .enumerate()
        .find(|(_, b)| b.vinberg != Some(VinbergType::Aff))
    {
        return Err(PencilError::NonAffineBox {
            index,
            kind: b.vinberg.expect("classified"),
        });
    }

    let mut fibers = Vec::with_capacity(boxes.boxes.len());
    let mut weights = vec![Rational::zero(); acc.component_count()];
    let mut box_degrees = Vec::with_capacity(boxes.boxes.len());
    for (index, b) in boxes.boxes.iter().enumerate() {
        let u = b.kernel.as_ref().expect("affine boxes carry a kernel");
        let degree: Rational = b
            .indices
            .iter()
            .zip(u)
            .map(|(&i, x)| &spectral.dbar[i] * Rational::from_integer(x.clone()))
            .sum();
        let fiber: Vec<ComponentId> = b
            .members
            .iter()
            .copied()
            .filter(|&c| trace.is_original(c))
            .collect();
        if fiber.is_empty() || degree.is_zero() {
            return Err(PencilError::EmptyFiber(index));
        }
        for (&c, x) in b.members.iter().zip(u) {
            if trace.is_original(c) {
                weights[c.0] = Rational::from_integer(x.clone()) / &degree;
            }
        }
        fibers.push(fiber);
        box_degrees.push(degree);
    }
    let lcm = weights
        .iter()
        .fold(BigInt::one(), |acc, w| acc.lcm(w.denom()));
    let scaled: Vec<BigInt> = weights
        .iter()
        .map(|w| (w * Rational::from_integer(lcm.clone())).to_integer())
        .collect();
    let g = scaled.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    let mult: Vec<u64> = scaled
        .iter()
        .map(|x| (x / &g).to_u64().expect("multiplicities fit in u64"))
        .collect();

    let (refined, base_points) = verify_pencil(acc, degrees, &fibers, &mult)
        .map_err(|e| PencilError::RefinedPencilInvalid(Box::new(e)))?;
    if !is_refinement(&refined, pencil)? {
        return Err(PencilError::NotARefinement);
    }
    let refined_fam = transport_to_end(trace, &family_from_pencil(acc, &refined)?)?;
    let report = is_primitive(&refined, trace, &refined_fam)?;
    if let Some(w) = report.witness {
        return Err(PencilError::RefinedNotPrimitive(w));
    }
    Ok(Refinement {
        pencil: refined,
        base_points,
        spectral,
        boxes,
        box_degrees,
    })
}
