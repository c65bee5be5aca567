use proptest::prelude::*;
use saito_forge_core::family::{is_irreducible, legal_pairs, max_alpha_beta, random_instance, DivisorInstance};
use saito_forge_core::saito::{
    build_lemma_system, build_saito_matrix, check_eq3, check_eq4, explicit_ingredients, lemma_module_hilbert,
    lemma_module_series, lemma_syzygy_generator, second_column, solve_lemma_system, third_column, verify_saito,
    Ingredients, LemmaSystem, Route, RouteChoice,
};
use saito_forge_core::{Field, Poly, Var};

const FP: Field = Field::Prime(1009);

fn instance(d: u32, alpha: u32, beta: u32, seed: u64, field: Field) -> DivisorInstance {
    DivisorInstance::build(random_instance(d, alpha, beta, seed, field).unwrap()).unwrap()
}

fn euler(field: Field) -> [Poly; 3] {
    [Poly::var(field, Var::X), Poly::var(field, Var::Y), Poly::var(field, Var::Z)]
}

#[test]
fn legal_shapes_are_closed_downward() {
    for d in 5..=13 {
        let pairs = legal_pairs(d);
        assert!(pairs.contains(&(0, 0)));
        for &(a, b) in &pairs {
            assert!((a + b) as i64 <= max_alpha_beta(d));
            if a > 0 {
                assert!(pairs.contains(&(a - 1, b)));
            }
            if b > 0 {
                assert!(pairs.contains(&(a, b - 1)));
            }
        }
    }
    assert_eq!(legal_pairs(7), vec![(0, 0), (0, 1), (1, 0)]);
}

#[test]
fn family_invariants() {
    for d in 5..=13 {
        for (alpha, beta) in legal_pairs(d) {
            let inst = instance(d, alpha, beta, 17 * d as u64 + 3 * alpha as u64 + beta as u64, FP);
            assert!(inst.params.supports_disjoint(), "d={d} α={alpha} β={beta}");
            assert_eq!(inst.f.homogeneous_degree().unwrap(), Some(d));
            assert_eq!(inst.f.euler_check().unwrap(), FP.from_i64(d as i64));
            assert_eq!(inst.f.degree_in(Var::Z), 1);
            assert!(is_irreducible(&inst.f).unwrap());
        }
    }
}

#[test]
fn explicit_route_passes_on_every_odd_shape() {
    for d in [5, 7, 9, 11, 13] {
        for (alpha, beta) in legal_pairs(d) {
            let inst = instance(d, alpha, beta, 1000 + d as u64, FP);
            let sm = build_saito_matrix(&inst, RouteChoice::Auto).unwrap();
            let expected = if beta == 0 { Route::ExplicitBetaZero } else { Route::ExplicitOdd };
            assert_eq!(sm.route, expected);
            let v = inst.v();
            assert_eq!(sm.column_degrees(), [1, v, v]);
            assert_eq!(Poly::det3(&sm.normalized_rows()), inst.f);
        }
    }
}

#[test]
fn lemma_window() {
    for d in 5..=11 {
        for (alpha, beta) in legal_pairs(d) {
            let params = random_instance(d, alpha, beta, 77 + d as u64, FP).unwrap();
            let v = params.v();
            let sys = build_lemma_system(&params, &FP.one());
            let sol = solve_lemma_system(&sys).unwrap();
            assert_eq!(sol.kernel.len(), 1);
            let gen = lemma_syzygy_generator(&params);
            let homogeneous = LemmaSystem {
                rhs: [Poly::zero(FP), Poly::zero(FP)],
                ..sys.clone()
            };
            assert!(homogeneous.residual(&gen).iter().all(Poly::is_zero));
            for i in 2 * v - 1..=2 * v + 3 {
                assert_eq!(lemma_module_hilbert(&params, i), 0, "d={d} i={i}");
                assert_eq!(lemma_module_series(&params, i), 0);
            }
        }
    }
}

fn ingredient_names() -> Vec<&'static str> {
    vec!["g1", "g2", "g3", "w", "h1", "h2", "h3", "h4", "h5", "h6"]
}

fn ingredient_mut<'a>(ing: &'a mut Ingredients, name: &str) -> &'a mut Poly {
    match name {
        "g1" => &mut ing.g1,
        "g2" => &mut ing.g2,
        "g3" => &mut ing.g3,
        "w" => &mut ing.w,
        h => &mut ing.h[h[1..].parse::<usize>().unwrap() - 1],
    }
}

/// True when one of eq3, eq4 or the determinant check rejects the ingredients.
fn broken(inst: &DivisorInstance, ing: &Ingredients) -> bool {
    if !check_eq3(inst, ing).is_zero() {
        return true;
    }
    match check_eq4(inst, ing) {
        Ok(strata) if !strata.all_zero() => return true,
        Err(_) => return true,
        Ok(_) => {}
    }
    let c3 = third_column(&inst.params, ing).unwrap();
    let cols = [euler(inst.field()), second_column(&inst.params, ing), c3];
    let rows: [[Poly; 3]; 3] = std::array::from_fn(|i| std::array::from_fn(|j| cols[j][i].clone()));
    !verify_saito(&inst.f, &rows).pass
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn scalar_perturbation_is_detected(
        shape in 0usize..6,
        seed in 0u64..1_000_000,
        which in 0usize..10,
        c in 2i64..1009,
    ) {
        let (d, alpha, beta) = [(5, 0, 0), (7, 0, 1), (7, 1, 0), (9, 1, 1), (9, 0, 2), (11, 2, 1)][shape];
        let inst = instance(d, alpha, beta, seed, FP);
        let (clean, _) = explicit_ingredients(&inst).unwrap();
        prop_assert!(!broken(&inst, &clean));
        let name = ingredient_names()[which];
        let mut ing = clean.clone();
        let target = ingredient_mut(&mut ing, name);
        prop_assume!(!target.is_zero());
        *target = target.scale(&FP.from_i64(c));
        prop_assert!(broken(&inst, &ing), "scaling {} by {} went unnoticed", name, c);
    }
}
