use proptest::prelude::*;
use rand::Rng;
use symclass::catalog::get_case;
use symclass::classifier::{adversarial_set, classify, verify_witness, Status};
use symclass::equiv::EquivTransform;
use symclass::expr::number::rat;
use symclass::gen::{rng, Rng as ChaCha, PROPERTY_SEED};
use symclass::symmetry::Potential;
use symclass::{parse, Expr};

fn frac(r: &mut ChaCha, lo: i64, hi: i64) -> String {
    let n = r.gen_range(lo..=hi);
    let d = r.gen_range(1..=3);
    format!("({n}/{d})")
}

// Potentials inside the classifier grammar, tabulated or not.
fn in_grammar(r: &mut ChaCha) -> Potential {
    let text = match r.gen_range(0..5) {
        0 => format!("{}*x^2 + {}*x + {} + i*{}", frac(r, -3, 3), frac(r, -3, 3), frac(r, -3, 3), frac(r, -3, 3)),
        1 => format!("x^2 + {} + i*{} + ({} + i*{})*x^-2", frac(r, -2, 2), frac(r, 1, 1), frac(r, -3, 3), frac(r, 1, 3)),
        2 => format!("i*{}/(t - {})", frac(r, 1, 6), frac(r, -3, 3)),
        3 => {
            let (b, p) = (frac(r, -4, 4), r.gen_range(-2..=2));
            format!("(i/2)*(t + {b})/(t^2 + {p}*t + {})", p * p + r.gen_range(1..=4))
        }
        _ => format!("{}*t^2 + i*{}", frac(r, -2, 2), frac(r, -3, 3)),
    };
    Potential(parse(&text).unwrap())
}

fn grammar_preserving() -> Vec<(&'static str, EquivTransform)> {
    let t = Expr::t();
    vec![
        ("scaling", EquivTransform::scaling(&rat(4, 1))),
        ("space reflection", EquivTransform::space_reflection()),
        ("time reflection", EquivTransform::time_reflection()),
        ("time shift", EquivTransform::new(&t + Expr::one(), &t - Expr::one(), Expr::zero(), Expr::zero())),
        ("gauge", EquivTransform::new(t.clone(), t.clone(), Expr::zero(), t.pow(2)).with_sqrt(Expr::one())),
    ]
}

#[test]
fn classification_is_constant_on_orbits() {
    let mut r = rng(PROPERTY_SEED ^ 30);
    let mut matched = 0;
    for _ in 0..10 {
        let v = in_grammar(&mut r);
        let base = classify(&v);
        assert_ne!(base.status, Status::OutsideGrammar, "{v}: {:?}", base.reason);
        matched += base.is_matched() as usize;
        for (name, g) in grammar_preserving() {
            let w = g.apply_to_potential(&v);
            let c = classify(&w);
            assert_eq!((c.status, c.case), (base.status, base.case), "{v} under {name} gives {w}");
            assert_eq!(c.params, base.params, "{v} under {name}");
        }
    }
    assert!(matched >= 5);
}

#[test]
fn emitted_parameters_satisfy_constraints() {
    let mut r = rng(PROPERTY_SEED ^ 31);
    for _ in 0..60 {
        let v = in_grammar(&mut r);
        let c = classify(&v);
        if let (Status::Matched, Some((table, id))) = (c.status, c.case) {
            let case = get_case(table, id).unwrap();
            assert!(case.admissible(&c.params), "{v} -> {:?} {:?}", c.case, c.params);
            assert!(c.verified && verify_witness(&v, &c));
        }
    }
}

#[test]
fn adversarial_inputs_stay_unmatched() {
    let set = adversarial_set();
    assert_eq!(set.len(), 20);
    for text in set {
        let c = classify(&Potential::parse(text).unwrap());
        assert!(!c.is_matched(), "{text} matched {:?}", c.case);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    // Any extra gauge term in the witness must make verification fail.
    #[test]
    fn corrupted_witnesses_are_rejected(seed in any::<u64>(), k in 1i64..5) {
        let v = in_grammar(&mut rng(seed));
        let mut c = classify(&v);
        prop_assume!(c.is_matched());
        let g = c.witness.take().unwrap();
        let bump = EquivTransform::new(Expr::t(), Expr::t(), Expr::zero(), Expr::int(k) * Expr::t()).with_sqrt(Expr::one());
        c.witness = Some(bump.then(&g).unwrap_or(bump));
        prop_assert!(!verify_witness(&v, &c));
    }

    #[test]
    fn x_quadratics_are_never_outside(a in -3i64..3, b in -3i64..3, c in -3i64..3, w in -3i64..3) {
        let v = Potential(parse(&format!("{a}*x^2 + {b}*x + {c} + i*{w}")).unwrap());
        let r = classify(&v);
        prop_assert!(r.status != Status::OutsideGrammar);
        if r.is_matched() {
            prop_assert!(r.verified);
        }
    }
}
