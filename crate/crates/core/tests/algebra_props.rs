use proptest::prelude::*;
use symclass::catalog::numbered_cases;
use symclass::expr::number::rat;
use symclass::expr::{is_zero, ExactReal};
use symclass::gen::{element, potential, rng, PROPERTY_SEED};
use symclass::liealg::{ad_reflection, bracket, AlgebraElement, Reflection};
use symclass::symmetry::{is_symmetry, residual, residual_verbatim, Potential};
use symclass::Expr;

#[test]
fn reflections_are_involutive_automorphisms() {
    let mut r = rng(PROPERTY_SEED ^ 10);
    for _ in 0..30 {
        let a = element(&mut r);
        let b = element(&mut r);
        for w in [Reflection::X, Reflection::T] {
            assert!(ad_reflection(&ad_reflection(&a, w), w).equals(&a));
            let lhs = ad_reflection(&bracket(&a, &b), w);
            let rhs = bracket(&ad_reflection(&a, w), &ad_reflection(&b, w));
            assert!(lhs.equals(&rhs), "{w:?} on [{a}, {b}]");
        }
    }
}

#[test]
fn residual_is_linear_in_the_operator() {
    let mut r = rng(PROPERTY_SEED ^ 11);
    for _ in 0..30 {
        let v = Potential(potential(&mut r));
        let q1 = element(&mut r);
        let q2 = element(&mut r);
        let (a, b) = (Expr::frac(2, 3), Expr::int(-5));
        let combined = q1.scale(&a).add(&q2.scale(&b));
        let lhs = residual(&v, &combined);
        let rhs = a * residual(&v, &q1) + b * residual(&v, &q2);
        assert!(is_zero(&(lhs - rhs)).zero);
    }
}

#[test]
fn expanded_residual_matches_verbatim_condition() {
    let mut r = rng(PROPERTY_SEED ^ 12);
    for _ in 0..50 {
        let v = Potential(potential(&mut r));
        let q = element(&mut r);
        let d = residual(&v, &q) - residual_verbatim(&v, &q);
        assert!(is_zero(&d).zero, "V = {}, q = {q}", v.expr());
    }
}

// Brackets of symmetries of a fixed table instance are symmetries again.
#[test]
fn symmetries_of_table_instances_close() {
    for c in numbered_cases() {
        if c.potential.expr().has_opaque() {
            continue;
        }
        let values = c.params.iter().map(|p| (p.to_string(), ExactReal::rational(rat(3, 2)))).collect();
        let v = c.instantiate(&values);
        for a in &c.basis {
            for b in &c.basis {
                assert!(is_symmetry(&v, &bracket(a, b)).holds, "case {:?}: [{a}, {b}]", c.key());
            }
        }
    }
}

fn small_element() -> impl Strategy<Value = AlgebraElement> {
    let coeffs = prop::collection::vec(-4i64..=4, 9);
    coeffs.prop_map(|c| {
        let poly = |k: &[i64]| {
            Expr::sum(k.iter().enumerate().map(|(n, &a)| Expr::int(a) * Expr::t().pow(n as i64)).collect())
        };
        AlgebraElement::new(poly(&c[0..3]), poly(&c[3..6]), poly(&c[6..9])).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn polynomial_brackets_are_antisymmetric(a in small_element(), b in small_element()) {
        prop_assert!(bracket(&a, &b).add(&bracket(&b, &a)).is_zero());
    }

    #[test]
    fn quadratic_xi_closes(a in small_element(), b in small_element()) {
        // span{1, t, t^2} is a subalgebra of the D-channel
        let c = bracket(&AlgebraElement::d(a.xi.clone()), &AlgebraElement::d(b.xi.clone()));
        prop_assert!(is_zero(&c.xi.diff_n(symclass::expr::Var::T, 3)).zero);
        prop_assert!(c.chi.is_identically_zero() && c.lam.is_identically_zero());
    }
}
