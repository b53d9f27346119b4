//! Admissible vector families: one rational vector per component such that every
//! branch sees its own component's vector parallel to the μ-weighted sum of its
//! neighbours' vectors.

use std::fmt;

use num_traits::Zero;

use crate::acc::{Acc, BranchId, ComponentId};
use crate::blowup::{check_normal_crossing, NcWitness, ResolutionTrace, SigmaProcessSpec};
use crate::linalg::{rank, Matrix};
use crate::pencil::CombinatorialPencil;
use crate::rational::Rational;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum AdmissibilityError {
    #[error("vectors of dimension {expected} and {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("family dimension must be at least 1")]
    ZeroDimension,
    #[error("family has {vectors} vectors for {components} components")]
    CoverageMismatch { components: usize, vectors: usize },
    #[error("pencil was not verified against this configuration")]
    UnverifiedPencil,
    #[error("trace does not end in normal crossing: {0}")]
    NotResolved(NcWitness),
}

impl AdmissibilityError {
    pub fn kind(&self) -> &'static str {
        match self {
            AdmissibilityError::DimensionMismatch { .. } => "DimensionMismatch",
            AdmissibilityError::ZeroDimension => "ZeroDimension",
            AdmissibilityError::CoverageMismatch { .. } => "CoverageMismatch",
            AdmissibilityError::UnverifiedPencil => "UnverifiedPencil",
            AdmissibilityError::NotResolved(_) => "NotResolved",
        }
    }
}

/// One vector in `ℚ^dim` per component, indexed by component id.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VectorFamily {
    dim: usize,
    vectors: Vec<Vec<Rational>>,
    from_pencil: bool,
}

impl VectorFamily {
    pub fn new(dim: usize, vectors: Vec<Vec<Rational>>) -> Result<Self, AdmissibilityError> {
        if dim == 0 {
            return Err(AdmissibilityError::ZeroDimension);
        }
        if let Some(v) = vectors.iter().find(|v| v.len() != dim) {
            return Err(AdmissibilityError::DimensionMismatch {
                expected: dim,
                found: v.len(),
            });
        }
        Ok(VectorFamily {
            dim,
            vectors,
            from_pencil: false,
        })
    }

    pub fn zero(dim: usize, components: usize) -> Self {
        VectorFamily {
            dim: dim.max(1),
            vectors: vec![vec![Rational::zero(); dim.max(1)]; components],
            from_pencil: false,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vector(&self, c: ComponentId) -> &[Rational] {
        &self.vectors[c.0]
    }

    pub fn vectors(&self) -> &[Vec<Rational>] {
        &self.vectors
    }

    pub fn is_zero(&self, c: ComponentId) -> bool {
        self.vectors[c.0].iter().all(Zero::is_zero)
    }

    /// Whether the family was produced by [`family_from_pencil`] (possibly transported since).
    pub fn from_pencil(&self) -> bool {
        self.from_pencil
    }

    pub fn is_spanning(&self) -> bool {
        !self.vectors.is_empty() && rank(&Matrix::from_rows(self.vectors.clone())) == self.dim
    }

    /// Replaces one vector; the family forgets its pencil origin.
    pub fn with_vector(
        mut self,
        c: ComponentId,
        v: Vec<Rational>,
    ) -> Result<Self, AdmissibilityError> {
        if v.len() != self.dim {
            return Err(AdmissibilityError::DimensionMismatch {
                expected: self.dim,
                found: v.len(),
            });
        }
        self.vectors[c.0] = v;
        self.from_pencil = false;
        Ok(self)
    }

    fn covers(&self, acc: &Acc) -> Result<(), AdmissibilityError> {
        if self.vectors.len() != acc.component_count() {
            return Err(AdmissibilityError::CoverageMismatch {
                components: acc.component_count(),
                vectors: self.vectors.len(),
            });
        }
        Ok(())
    }
}

fn add_scaled(acc: &mut [Rational], v: &[Rational], factor: &Rational) {
    for (a, x) in acc.iter_mut().zip(v) {
        *a += factor * x;
    }
}

/// `v_δ = Σ μ(δ, δ′) v_φ(δ′)` over the branches δ′ at the point of δ.
///
/// Panics if `fam` has no vector for some component at that point.
pub fn branch_vector(acc: &Acc, fam: &VectorFamily, delta: BranchId) -> Vec<Rational> {
    let mut out = vec![Rational::zero(); fam.dim()];
    for &other in acc.branches_at(acc.attach(delta)) {
        let mu = acc.mu(delta, other);
        if mu > 0 {
            add_scaled(
                &mut out,
                fam.vector(acc.owner(other)),
                &Rational::from_integer(mu.into()),
            );
        }
    }
    out
}

/// All 2×2 minors vanish. The zero vector is parallel to everything.
pub fn is_parallel(u: &[Rational], w: &[Rational]) -> Result<bool, AdmissibilityError> {
    if u.len() != w.len() {
        return Err(AdmissibilityError::DimensionMismatch {
            expected: u.len(),
            found: w.len(),
        });
    }
    for i in 0..u.len() {
        for j in i + 1..u.len() {
            if &u[i] * &w[j] != &u[j] * &w[i] {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdmissibilityReport {
    pub admissible: bool,
    /// First branch (by id) whose condition fails.
    pub witness: Option<BranchId>,
    pub spanning: bool,
}

pub fn is_admissible_family(
    acc: &Acc,
    fam: &VectorFamily,
) -> Result<AdmissibilityReport, AdmissibilityError> {
    fam.covers(acc)?;
    let witness = acc.branches().find(|&delta| {
        let v = branch_vector(acc, fam, delta);
        !is_parallel(fam.vector(acc.owner(delta)), &v).expect("same dimension")
    });
    Ok(AdmissibilityReport {
        admissible: witness.is_none(),
        witness,
        spanning: fam.is_spanning(),
    })
}

/// The family of a pencil with fibers `F₀, F₁, …, F_k` (in the pencil's canonical
/// order): `−m_i(1, …, 1)` on `F₀` and `m_i e_j` on `F_j`.
pub fn family_from_pencil(
    acc: &Acc,
    pencil: &CombinatorialPencil,
) -> Result<VectorFamily, AdmissibilityError> {
    if !pencil.is_verified_for(acc) {
        return Err(AdmissibilityError::UnverifiedPencil);
    }
    let dim = pencil.fibers().len() - 1;
    let mut vectors = vec![Vec::new(); acc.component_count()];
    for (j, fiber) in pencil.fibers().iter().enumerate() {
        for &c in fiber {
            let m = Rational::from_integer(pencil.multiplicity(c).into());
            vectors[c.0] = if j == 0 {
                vec![-m; dim]
            } else {
                let mut v = vec![Rational::zero(); dim];
                v[j - 1] = m;
                v
            };
        }
    }
    Ok(VectorFamily {
        dim,
        vectors,
        from_pencil: true,
    })
}

/// Extends a family on `before` across one σ-process: `v_E = Σ ν_δ v_φ(δ)` over the
/// branches at the blown-up point.
pub fn transport_family(
    before: &Acc,
    spec: &SigmaProcessSpec,
    fam: &VectorFamily,
) -> Result<VectorFamily, AdmissibilityError> {
    fam.covers(before)?;
    let mut v_e = vec![Rational::zero(); fam.dim()];
    for (&b, &nu) in &spec.nu {
        add_scaled(
            &mut v_e,
            fam.vector(before.owner(b)),
            &Rational::from_integer(nu.into()),
        );
    }
    let mut out = fam.clone();
    out.vectors.push(v_e);
    Ok(out)
}

/// The family at every stage of `trace`, starting with `fam` itself.
pub fn transport_along(
    trace: &ResolutionTrace,
    fam: &VectorFamily,
) -> Result<Vec<VectorFamily>, AdmissibilityError> {
    let mut out = vec![fam.clone()];
    for (l, step) in trace.steps().iter().enumerate() {
        let next = transport_family(&trace.stages()[l], &step.spec, &out[l])?;
        out.push(next);
    }
    Ok(out)
}

/// The family on the last stage of `trace`.
pub fn transport_to_end(
    trace: &ResolutionTrace,
    fam: &VectorFamily,
) -> Result<VectorFamily, AdmissibilityError> {
    Ok(transport_along(trace, fam)?
        .pop()
        .expect("at least one stage"))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DivisorClass {
    Original,
    /// Exceptional with a non-zero vector.
    Plain,
    /// Exceptional with a zero vector that is not dicritical.
    Trivial,
    /// Exceptional meeting two components with independent vectors.
    Dicritical,
}

impl DivisorClass {
    pub fn is_exceptional(self) -> bool {
        self != DivisorClass::Original
    }
}

impl fmt::Display for DivisorClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DivisorClass::Original => "original",
            DivisorClass::Plain => "plain",
            DivisorClass::Trivial => "trivial",
            DivisorClass::Dicritical => "dicritical",
        })
    }
}

/// Per-component classes on the last stage, plus whether each exceptional vector vanishes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DivisorClasses {
    pub classes: Vec<DivisorClass>,
    pub trivial: Vec<bool>,
}

impl DivisorClasses {
    pub fn class(&self, c: ComponentId) -> DivisorClass {
        self.classes[c.0]
    }

    pub fn is_trivial(&self, c: ComponentId) -> bool {
        self.trivial[c.0]
    }
}

/// Dicritical: among the components meeting E transversally, two carry independent vectors.
pub fn classify_divisors(
    trace: &ResolutionTrace,
    fam: &VectorFamily,
) -> Result<DivisorClasses, AdmissibilityError> {
    let last = trace.last();
    check_normal_crossing(last).map_err(AdmissibilityError::NotResolved)?;
    fam.covers(last)?;
    let mut classes = Vec::with_capacity(last.component_count());
    let mut trivial = Vec::with_capacity(last.component_count());
    for e in last.components() {
        let is_zero = fam.is_zero(e);
        trivial.push(is_zero);
        if trace.is_original(e) {
            classes.push(DivisorClass::Original);
            continue;
        }
        let neighbours: Vec<&[Rational]> = last
            .branches_of(e)
            .into_iter()
            .filter_map(|b| {
                let other = *last.branches_at(last.attach(b)).iter().find(|&&o| o != b)?;
                (last.mu(b, other) == 1).then(|| fam.vector(last.owner(other)))
            })
            .collect();
        let dicritical = neighbours.iter().enumerate().any(|(i, u)| {
            neighbours[i + 1..]
                .iter()
                .any(|w| !is_parallel(u, w).expect("same dimension"))
        });
        classes.push(if dicritical {
            DivisorClass::Dicritical
        } else if is_zero {
            DivisorClass::Trivial
        } else {
            DivisorClass::Plain
        });
    }
    Ok(DivisorClasses { classes, trivial })
}

/// The rational `t` with `w = t·u`, if there is one and `u` is non-zero.
pub fn multiple_of(u: &[Rational], w: &[Rational]) -> Option<Rational> {
    let i = u.iter().position(|x| !x.is_zero())?;
    let t = &w[i] / &u[i];
    u.iter().zip(w).all(|(a, b)| &t * a == *b).then_some(t)
}
