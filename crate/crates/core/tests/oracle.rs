use saito_forge_core::family::{random_instance, DivisorInstance};
use saito_forge_core::oracle::{
    expected_multiplicity, freeness_probe, hilbert_function_quotient, jacobian_generators, point_support_check,
    resolution_check,
};
use saito_forge_core::{parse_poly, Field};

const FP: Field = Field::Prime(1009);

#[test]
fn multiplicities() {
    let got: Vec<i64> = (5..=10).map(expected_multiplicity).collect();
    assert_eq!(got, vec![12, 19, 27, 37, 48, 61]);
}

#[test]
fn family_hilbert_function_is_eventually_constant() {
    for d in 5..=10 {
        let inst = DivisorInstance::build(random_instance(d, 0, 0, 40 + d as u64, FP).unwrap()).unwrap();
        let v = d / 2;
        let rep = resolution_check(&inst.f, d, 3 * v + 3);
        assert!(rep.pass, "d={d} first mismatch {:?}", rep.first_mismatch);
        // A nonzero constant tail: the singular locus is a single point.
        let tail: Vec<usize> = rep.table.iter().rev().take(3).map(|r| r.computed).collect();
        assert!(tail.iter().all(|&h| h == expected_multiplicity(d) as usize));
        let ps = point_support_check(&inst.f, 3 * v + 2);
        assert!(ps.certified(), "d={d} {ps:?}");
    }
}

#[test]
fn smooth_quintic_has_finite_length_quotient() {
    let f = parse_poly("x^5 + y^5 + z^5", FP).unwrap();
    let gens = jacobian_generators(&f);
    assert_eq!(hilbert_function_quotient(&gens, 13), 0);
    assert!(!resolution_check(&f, 5, 9).pass);
    let probe = freeness_probe(&f, 9);
    assert!(!probe.found);
}

#[test]
fn cone_over_points_is_not_point_supported() {
    let f = parse_poly("x*y*z*(x + y + z)*(x - y)", FP).unwrap();
    let ps = point_support_check(&f, 8);
    assert!(!ps.certified());
}
