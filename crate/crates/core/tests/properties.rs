mod common;

use acc_core::admissibility::{family_from_pencil, transport_to_end, VectorFamily};
use acc_core::blowup::{auto_resolve, check_normal_crossing, validate_resolution_script};
use acc_core::linalg::{inertia, kernel_basis, Matrix};
use acc_core::pencil::{primitive_refinement, verify_pencil};
use acc_core::rational::{rat, Rational};
use acc_core::spectra::{build_spectral_data, decompose_boxes};
use proptest::prelude::*;
use rand::Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn auto_resolution_replays(seed in any::<u64>(), template in 0usize..6) {
        let inst = common::random_instance(seed, template);
        let trace = auto_resolve(&inst.acc, 64).unwrap();
        prop_assert!(check_normal_crossing(trace.last()).is_ok());
        let replay = validate_resolution_script(&inst.acc, &trace.specs()).unwrap();
        prop_assert_eq!(replay, trace);
    }

    #[test]
    fn q_is_symmetric_with_non_negative_off_diagonal(seed in any::<u64>(), template in 0usize..6) {
        let inst = common::random_instance(seed, template);
        let mut rng = common::rng(seed ^ 0xf00d);
        let n = inst.acc.component_count();
        let vectors = (0..n).map(|_| vec![rat(rng.gen_range(-2..=2)), rat(rng.gen_range(-2..=2))]).collect();
        let fam = VectorFamily::new(2, vectors).unwrap();
        let last = transport_to_end(&inst.trace, &fam).unwrap();
        let Ok(sd) = build_spectral_data(&inst.trace, &inst.degrees, &last) else {
            return Ok(());
        };
        prop_assert!(sd.q.is_symmetric());
        for i in 0..sd.q.rows() {
            for j in 0..sd.q.cols() {
                prop_assert!(i == j || *sd.q.get(i, j) >= Rational::from_integer(0.into()));
            }
        }
        let boxes = decompose_boxes(&sd);
        let mut covered: Vec<usize> = boxes.boxes.iter().flat_map(|b| b.indices.clone()).collect();
        covered.sort();
        prop_assert_eq!(covered, (0..sd.kept.len()).collect::<Vec<_>>());
    }

    #[test]
    fn refinement_is_idempotent(seed in any::<u64>(), template in 0usize..5) {
        let inst = common::random_instance(seed, template);
        let (fibers, mult) = inst.pencil.clone().unwrap();
        let (pencil, _) = verify_pencil(&inst.acc, &inst.degrees, &fibers, &mult).unwrap();
        let once = primitive_refinement(&inst.acc, &inst.degrees, &pencil, &inst.trace).unwrap();
        let twice = primitive_refinement(&inst.acc, &inst.degrees, &once.pencil, &inst.trace).unwrap();
        prop_assert_eq!(&twice.pencil, &once.pencil);
        prop_assert!(once.pencil.fibers().len() >= pencil.fibers().len());
        let fam = family_from_pencil(&inst.acc, &once.pencil).unwrap();
        prop_assert!(fam.dim() + 1 == once.pencil.fibers().len());
    }

    #[test]
    fn kernel_vectors_are_annihilated(rows in prop::collection::vec(prop::collection::vec(-3i64..=3, 4), 1..5)) {
        let m = Matrix::from_rows(rows.iter().map(|r| r.iter().map(|&x| rat(x)).collect()).collect());
        for k in kernel_basis(&m) {
            let v: Vec<Rational> = k.into_iter().map(Rational::from_integer).collect();
            prop_assert!(m.mul_vec(&v).iter().all(|x| *x == Rational::from_integer(0.into())));
        }
        let gram = m.transpose().mul(&m);
        let i = inertia(&gram);
        prop_assert_eq!(i.negative, 0);
        prop_assert_eq!(i.zero, kernel_basis(&m).len());
    }
}
