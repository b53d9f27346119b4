//! Small hand-built configurations used throughout the tests and the CLI examples.
//!
//! * CONIC: a conic (c0), its tangent lines at two points (c1 at PL, c2 at PR)
//!   and the chord through the tangency points (c3). The tangents meet at PA.
//! * SIXLINES: six concurrent lines.
//! * BITANGENT: three conics pairwise tangent at the same two points.
//! * BADTRIPLE: three components whose intersection numbers give d₀² = 1/2.

use crate::acc::{validate_acc, Acc, BranchId, ComponentId, PointId, RawAcc};
use crate::blowup::SigmaProcessSpec;

fn b(i: usize) -> BranchId {
    BranchId(i)
}

fn singletons(branches: &[usize]) -> Vec<Vec<BranchId>> {
    branches.iter().map(|&i| vec![b(i)]).collect()
}

/// Points PL = p0, PR = p1, PA = p2.
/// Branches: b0 conic, b1 c1, b2 c3 at PL; b3 conic, b4 c2, b5 c3 at PR; b6 c1, b7 c2 at PA.
pub fn conic_raw() -> RawAcc {
    RawAcc {
        components: 4,
        points: 3,
        attach: vec![0, 0, 0, 1, 1, 1, 2, 2],
        owner: vec![0, 1, 3, 0, 2, 3, 1, 2],
        mu: vec![
            (0, 1, 2),
            (0, 2, 1),
            (1, 2, 1),
            (3, 4, 2),
            (3, 5, 1),
            (4, 5, 1),
            (6, 7, 1),
        ],
    }
}

pub fn conic() -> Acc {
    validate_acc(&conic_raw()).expect("CONIC fixture is valid")
}

/// Blow up PL and PR keeping conic and tangent together, then separate the
/// three branches at each of the two new tangency points.
pub fn conic_script() -> Vec<SigmaProcessSpec> {
    vec![
        SigmaProcessSpec::with_unit_nu(PointId(0), vec![vec![b(0), b(1)], vec![b(2)]]),
        SigmaProcessSpec::with_unit_nu(PointId(1), vec![vec![b(3), b(4)], vec![b(5)]]),
        SigmaProcessSpec::with_unit_nu(PointId(3), singletons(&[0, 1, 8])),
        SigmaProcessSpec::with_unit_nu(PointId(5), singletons(&[3, 4, 10])),
    ]
}

/// Fibers {conic}, {c1, c2}, {c3} with the chord counted twice.
pub fn conic_pencil() -> (Vec<Vec<ComponentId>>, Vec<u64>) {
    (
        vec![
            vec![ComponentId(0)],
            vec![ComponentId(1), ComponentId(2)],
            vec![ComponentId(3)],
        ],
        vec![1, 1, 1, 2],
    )
}

pub fn sixlines_raw() -> RawAcc {
    let mut mu = Vec::new();
    for i in 0..6 {
        for j in i + 1..6 {
            mu.push((i, j, 1));
        }
    }
    RawAcc {
        components: 6,
        points: 1,
        attach: vec![0; 6],
        owner: (0..6).collect(),
        mu,
    }
}

pub fn sixlines() -> Acc {
    validate_acc(&sixlines_raw()).expect("SIXLINES fixture is valid")
}

pub fn sixlines_script() -> Vec<SigmaProcessSpec> {
    vec![SigmaProcessSpec::with_unit_nu(
        PointId(0),
        singletons(&[0, 1, 2, 3, 4, 5]),
    )]
}

/// Fibers {c0, c1}, {c2, c3}, {c4, c5}, all multiplicities 1.
pub fn sixlines_pencil() -> (Vec<Vec<ComponentId>>, Vec<u64>) {
    (
        (0..3)
            .map(|j| vec![ComponentId(2 * j), ComponentId(2 * j + 1)])
            .collect(),
        vec![1; 6],
    )
}

/// Branches b0..b2 at PL and b3..b5 at PR, conic `i` owning b`i` and b`i+3`.
pub fn bitangent_raw() -> RawAcc {
    RawAcc {
        components: 3,
        points: 2,
        attach: vec![0, 0, 0, 1, 1, 1],
        owner: vec![0, 1, 2, 0, 1, 2],
        mu: vec![
            (0, 1, 2),
            (0, 2, 2),
            (1, 2, 2),
            (3, 4, 2),
            (3, 5, 2),
            (4, 5, 2),
        ],
    }
}

pub fn bitangent() -> Acc {
    validate_acc(&bitangent_raw()).expect("BITANGENT fixture is valid")
}

pub fn bitangent_script() -> Vec<SigmaProcessSpec> {
    vec![
        SigmaProcessSpec::with_unit_nu(PointId(0), vec![vec![b(0), b(1), b(2)]]),
        SigmaProcessSpec::with_unit_nu(PointId(1), vec![vec![b(3), b(4), b(5)]]),
        SigmaProcessSpec::with_unit_nu(PointId(2), singletons(&[0, 1, 2, 6])),
        SigmaProcessSpec::with_unit_nu(PointId(3), singletons(&[3, 4, 5, 7])),
    ]
}

pub fn bitangent_pencil() -> (Vec<Vec<ComponentId>>, Vec<u64>) {
    ((0..3).map(|i| vec![ComponentId(i)]).collect(), vec![1; 3])
}

/// SIXLINES with μ = 2 inside the triples {c0, c2, c4} and {c1, c3, c5}. Violates
/// Bézout, yet with every degree taken to be 2 the fibers {c0, c1}, {c2, c3},
/// {c4, c5} still balance at the point.
pub fn sixlines_doubled_raw() -> RawAcc {
    let mut raw = sixlines_raw();
    for entry in raw.mu.iter_mut() {
        if entry.0 % 2 == entry.1 % 2 {
            entry.2 = 2;
        }
    }
    raw
}

/// d₀₁ = d₀₂ = 1 and d₁₂ = 2.
pub fn badtriple_raw() -> RawAcc {
    RawAcc {
        components: 3,
        points: 3,
        attach: vec![0, 0, 1, 1, 2, 2],
        owner: vec![0, 1, 0, 2, 1, 2],
        mu: vec![(0, 1, 1), (2, 3, 1), (4, 5, 2)],
    }
}
