//! The incidence matrix `J`, degree matrix `D` and `Q = D − JJᵗ` of a resolution,
//! its decomposition into irreducible boxes and their Vinberg types.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::acc::{ComponentId, DegreeData, PointId};
use crate::admissibility::VectorFamily;
use crate::blowup::ResolutionTrace;
use crate::linalg::{inertia, kernel_basis, Matrix};
use crate::rational::Rational;
use crate::union_find::DisjointSet;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SpectraError {
    #[error("every component has a zero vector")]
    EmptyKeptSet,
    #[error("family covers {vectors} components, last stage has {components}")]
    CoverageMismatch { components: usize, vectors: usize },
    #[error("degree data covers {degrees} components, trace starts with {components}")]
    DegreeMismatch { components: usize, degrees: usize },
    #[error("matrix is not square and symmetric")]
    NotSymmetric,
    #[error("negative off-diagonal entry at ({0}, {1})")]
    NegativeOffDiagonal(usize, usize),
    #[error("matrix is reducible")]
    Reducible,
    #[error("affine box with kernel {0:?} that is not strictly positive")]
    ClassificationInconsistency(Vec<BigInt>),
}

impl SpectraError {
    pub fn kind(&self) -> &'static str {
        match self {
            SpectraError::EmptyKeptSet => "EmptyKeptSet",
            SpectraError::CoverageMismatch { .. } => "CoverageMismatch",
            SpectraError::DegreeMismatch { .. } => "DegreeMismatch",
            SpectraError::NotSymmetric => "NotSymmetric",
            SpectraError::NegativeOffDiagonal(..) => "NegativeOffDiagonal",
            SpectraError::Reducible => "Reducible",
            SpectraError::ClassificationInconsistency(_) => "ClassificationInconsistency",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpectralData {
    /// Components with a non-zero vector, by id (originals first, then exceptionals by step).
    pub kept: Vec<ComponentId>,
    /// The blown-up point of each step, one per column of `j`.
    pub points: Vec<PointId>,
    pub j: Matrix,
    /// Degree for originals, 0 for exceptionals; indexed like `kept`.
    pub dbar: Vec<Rational>,
    pub d: Matrix,
    pub q: Matrix,
}

pub fn build_spectral_data(
    trace: &ResolutionTrace,
    degrees: &DegreeData,
    fam: &VectorFamily,
) -> Result<SpectralData, SpectraError> {
    let last = trace.last();
    if fam.len() != last.component_count() {
        return Err(SpectraError::CoverageMismatch {
            components: last.component_count(),
            vectors: fam.len(),
        });
    }
    if degrees.component_count() != trace.original_count() {
        return Err(SpectraError::DegreeMismatch {
            components: trace.original_count(),
            degrees: degrees.component_count(),
        });
    }
    let kept: Vec<ComponentId> = last.components().filter(|&c| !fam.is_zero(c)).collect();
    if kept.is_empty() {
        return Err(SpectraError::EmptyKeptSet);
    }
    let steps = trace.steps();
    let mut j = Matrix::zeros(kept.len(), steps.len());
    for (row, &c) in kept.iter().enumerate() {
        for (col, step) in steps.iter().enumerate() {
            if step.created.exceptional == c {
                j.set(row, col, Rational::from_integer((-1).into()));
            } else if let Some(&nu) = step.component_nu.get(&c) {
                j.set(row, col, Rational::from_integer(nu.into()));
            }
        }
    }
    let dbar: Vec<Rational> = kept
        .iter()
        .map(|&c| {
            if trace.is_original(c) {
                degrees.degree(c).clone()
            } else {
                Rational::zero()
            }
        })
        .collect();
    let column = Matrix::with_shape(kept.len(), 1, dbar.clone());
    let d = column.mul(&column.transpose());
    let q = d.sub(&j.mul(&j.transpose()));
    Ok(SpectralData {
        kept,
        points: steps.iter().map(|s| s.spec.point).collect(),
        j,
        dbar,
        d,
        q,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum VinbergType {
    Fin,
    Aff,
    Ind,
}

impl fmt::Display for VinbergType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VinbergType::Fin => "Fin",
            VinbergType::Aff => "Aff",
            VinbergType::Ind => "Ind",
        })
    }
}

/// One irreducible block of `Q`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QBox {
    /// Positions in `SpectralData::kept`.
    pub indices: Vec<usize>,
    pub members: Vec<ComponentId>,
    pub q: Matrix,
    pub vinberg: Option<VinbergType>,
    /// Strictly positive primitive kernel generator, for affine boxes.
    pub kernel: Option<Vec<BigInt>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoxDecomposition {
    pub boxes: Vec<QBox>,
}

impl BoxDecomposition {
    pub fn is_classified(&self) -> bool {
        self.boxes.iter().all(|b| b.vinberg.is_some())
    }

    /// Fills in types and kernels of every box.
    pub fn classify(&mut self) -> Result<(), SpectraError> {
        for b in &mut self.boxes {
            let (kind, kernel) = vinberg_classify(&b.q)?;
            b.vinberg = Some(kind);
            b.kernel = kernel;
        }
        Ok(())
    }
}

/// Connected components of the graph on `kept` with an edge wherever `q_ij > 0`.
pub fn decompose_boxes(sd: &SpectralData) -> BoxDecomposition {
    let n = sd.kept.len();
    let mut ds = DisjointSet::new(n);
    for i in 0..n {
        for k in i + 1..n {
            if sd.q.get(i, k).is_positive() {
                ds.union(i, k);
            }
        }
    }
    BoxDecomposition {
        boxes: ds
            .classes()
            .into_iter()
            .map(|indices| QBox {
                members: indices.iter().map(|&i| sd.kept[i]).collect(),
                q: sd.q.principal_submatrix(&indices),
                indices,
                vinberg: None,
                kernel: None,
            })
            .collect(),
    }
}

/// Type of an irreducible symmetric matrix with non-negative off-diagonal entries,
/// read off the inertia of `−Q`: positive definite is Fin, positive semidefinite of
/// corank 1 is Aff, anything else Ind. Affine boxes come with their kernel generator.
pub fn vinberg_classify(q: &Matrix) -> Result<(VinbergType, Option<Vec<BigInt>>), SpectraError> {
    if !q.is_symmetric() {
        return Err(SpectraError::NotSymmetric);
    }
    let n = q.rows();
    for i in 0..n {
        for k in 0..n {
            if i != k && q.get(i, k).is_negative() {
                return Err(SpectraError::NegativeOffDiagonal(i, k));
            }
        }
    }
    let mut ds = DisjointSet::new(n);
    for i in 0..n {
        for k in i + 1..n {
            if q.get(i, k).is_positive() {
                ds.union(i, k);
            }
        }
    }
    if ds.classes().len() > 1 {
        return Err(SpectraError::Reducible);
    }
    let s = inertia(&q.neg());
    if s.negative > 0 || s.zero > 1 {
        return Ok((VinbergType::Ind, None));
    }
    if s.zero == 0 {
        return Ok((VinbergType::Fin, None));
    }
    let mut kernel = kernel_basis(q);
    debug_assert_eq!(kernel.len(), 1);
    let u = kernel.pop().expect("corank 1");
    if !u.iter().all(Signed::is_positive) {
        return Err(SpectraError::ClassificationInconsistency(u));
    }
    Ok((VinbergType::Aff, Some(u)))
}
