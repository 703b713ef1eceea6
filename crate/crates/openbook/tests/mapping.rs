//! Invariant suite for monodromy words: the homology action is a determinant-1
//! monoid morphism, classification respects powers and conjugation, and the
//! action on curves is compatible with composition and preserves geometric
//! intersection numbers.

use num_traits::{One, ToPrimitive, Zero};
use proptest::prelude::*;

use openbook::mapping::{
    apply_word, classify, dilatation, homology_action, IntMatrix, Letter, MonodromyWord, NtType,
};
use openbook::surface::{Rat, Surface};

fn word(genus: u32, text: &str) -> MonodromyWord {
    MonodromyWord::parse(genus, text, 0).unwrap()
}

fn action(w: &MonodromyWord) -> IntMatrix {
    let s = Surface::build(w.genus()).unwrap();
    homology_action(&s, w, None).unwrap()
}

fn letter_strategy(genus: u32) -> impl Strategy<Value = Letter> {
    let families: Vec<String> = {
        let mut v = Vec::new();
        for i in 1..=genus {
            v.push(format!("a{i}"));
            v.push(format!("b{i}"));
        }
        v
    };
    (0..families.len(), prop_oneof![Just(1i64), Just(-1i64)])
        .prop_map(move |(i, p)| Letter::new(families[i].clone(), p))
}

fn word_strategy(genus: u32, max_len: usize) -> impl Strategy<Value = MonodromyWord> {
    (
        proptest::collection::vec(letter_strategy(genus), 0..=max_len),
        -2i64..=2,
    )
        .prop_map(move |(letters, k)| MonodromyWord::new(genus, letters, k).unwrap())
}

// ---------------------------------------------------------------------------
// Homology action
// ---------------------------------------------------------------------------

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn action_is_monoid_morphism_genus1(
        w1 in word_strategy(1, 6),
        w2 in word_strategy(1, 6),
    ) {
        let lhs = action(&w1.concat(&w2).unwrap());
        let rhs = action(&w1).mul(&action(&w2));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn action_is_monoid_morphism_genus2(
        w1 in word_strategy(2, 5),
        w2 in word_strategy(2, 5),
    ) {
        let lhs = action(&w1.concat(&w2).unwrap());
        let rhs = action(&w1).mul(&action(&w2));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn action_has_determinant_one(w in word_strategy(2, 6)) {
        prop_assert_eq!(action(&w).det(), 1);
    }

    #[test]
    fn inverse_word_gives_inverse_matrix(w in word_strategy(2, 6)) {
        let m = action(&w).mul(&action(&w.inverse()));
        prop_assert!(m.is_identity());
    }
}

// ---------------------------------------------------------------------------
// Classification laws
// ---------------------------------------------------------------------------

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 { a } else { gcd(b, a % b) }
}

#[test]
fn periodic_power_order_law() {
    // tau_a tau_b has order 6; tau_a tau_b tau_a has order 4.
    for (text, order) in [("a+ b+", 6u32), ("a+ b+ a+", 4u32)] {
        let w = word(1, text);
        for n in 1..=(2 * order as i64) {
            let c = classify(&w.power(n)).unwrap();
            let expected = order / gcd(n.unsigned_abs() as u32, order);
            match c.nt_type {
                NtType::Periodic { order: got } => assert_eq!(
                    got, expected,
                    "power {n} of order-{order} word should have order {expected}"
                ),
                other => panic!("power {n} of periodic word classified as {other:?}"),
            }
        }
    }
}

#[test]
fn dilatation_power_law() {
    let fig8 = word(1, "a+ b-");
    let base = dilatation(&fig8).unwrap();
    assert!((base - (3.0 + 5.0f64.sqrt()) / 2.0).abs() < 1e-12);
    for n in 2..=5 {
        let lam = dilatation(&fig8.power(n)).unwrap();
        let expected = base.powi(n as i32);
        assert!(
            ((lam - expected) / expected).abs() < 1e-9,
            "dilatation of power {n}: {lam} vs {expected}"
        );
    }
}

#[test]
fn trace_identities_for_powers() {
    // tr(M^n) follows the Chebyshev recursion t_{n+1} = tr·t_n − t_{n−1}.
    let m = action(&word(1, "a+ b-"));
    let tr = m.trace();
    let (mut prev, mut cur) = (2i128, tr);
    for n in 1..=8u32 {
        assert_eq!(m.pow(n).trace(), cur, "trace of power {n}");
        let next = tr * cur - prev;
        prev = cur;
        cur = next;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(80))]

    #[test]
    fn classification_is_conjugation_invariant(
        w in word_strategy(1, 5),
        u in word_strategy(1, 4),
    ) {
        let conj = u.concat(&w).unwrap().concat(&u.inverse()).unwrap();
        let cw = classify(&w).unwrap();
        let cc = classify(&conj).unwrap();
        prop_assert_eq!(cw.trace, cc.trace);
        match (&cw.nt_type, &cc.nt_type) {
            (NtType::Periodic { order: o1 }, NtType::Periodic { order: o2 }) => {
                prop_assert_eq!(o1, o2);
            }
            (NtType::Reducible, NtType::Reducible) => {}
            (
                NtType::PseudoAnosov { dilatation: d1, rotated: r1, .. },
                NtType::PseudoAnosov { dilatation: d2, rotated: r2, .. },
            ) => {
                prop_assert!((d1 - d2).abs() < 1e-9);
                prop_assert_eq!(r1, r2);
            }
            (a, b) => prop_assert!(false, "type changed under conjugation: {:?} vs {:?}", a, b),
        }
        // The fractional twist is a class invariant whenever defined.
        prop_assert_eq!(&cw.t_c, &cc.t_c);
        prop_assert_eq!(&cw.theta_turns, &cc.theta_turns);
    }

    #[test]
    fn boundary_twists_shift_fractional_twist(
        w in word_strategy(1, 5),
        extra in -3i64..=3,
    ) {
        let shifted = MonodromyWord::new(1, w.letters().to_vec(), w.boundary_twists() + extra).unwrap();
        let c0 = classify(&w).unwrap();
        let c1 = classify(&shifted).unwrap();
        match (&c0.t_c, &c1.t_c) {
            (Some(t0), Some(t1)) => {
                let expected = t0 + Rat::new(extra.into(), 1.into());
                prop_assert_eq!(t1, &expected);
                // θ_c depends only on the free class, not the boundary winding.
                prop_assert_eq!(&c0.theta_turns, &c1.theta_turns);
            }
            (None, None) => {}
            _ => prop_assert!(false, "adding boundary twists changed definedness"),
        }
    }

    #[test]
    fn twist_relation_holds_exactly(w in word_strategy(1, 6)) {
        let c = classify(&w).unwrap();
        if let (Some(t), Some(theta), Some(k)) = (&c.t_c, &c.theta_turns, c.winding) {
            // 2π t_c = θ_c + 2π k, in units of turns: t = θ + k.
            let expected = theta + Rat::new(k.into(), 1.into());
            prop_assert_eq!(t, &expected);
            prop_assert!(theta >= &Rat::zero() && theta < &Rat::one());
            // Integrality: unrotated pA ⇒ t ∈ ℤ; rotated ⇒ t ∈ ℤ + 1/2;
            // periodic of order d ⇒ d·θ ∈ ℤ.
            match &c.nt_type {
                NtType::PseudoAnosov { rotated, .. } => {
                    let double = t * Rat::new(2.into(), 1.into());
                    prop_assert!(double.is_integer());
                    prop_assert_eq!(*rotated, !t.is_integer());
                }
                NtType::Periodic { order } => {
                    let scaled = theta * Rat::new((*order as i64).into(), 1.into());
                    prop_assert!(scaled.is_integer());
                }
                NtType::Reducible => {}
            }
        } else {
            prop_assert!(matches!(c.nt_type, NtType::Reducible));
        }
    }

    #[test]
    fn periodic_t_c_matches_exponent_sum(w in word_strategy(1, 6)) {
        let c = classify(&w).unwrap();
        if let NtType::Periodic { .. } = c.nt_type {
            let expected = Rat::new(w.exponent_sum().into(), 12.into())
                + Rat::new(w.boundary_twists().into(), 1.into());
            prop_assert_eq!(c.t_c.as_ref().unwrap(), &expected);
        }
    }
}

// ---------------------------------------------------------------------------
// Action on curves
// ---------------------------------------------------------------------------

#[test]
fn apply_word_is_compatible_with_composition() {
    let s = Surface::build(1).unwrap();
    let probes: Vec<_> = ["a1", "b1"]
        .iter()
        .map(|n| s.named_curve(n).unwrap())
        .collect();
    let cases = [
        ("a+ b+", "b- a+"),
        ("a+ b-", "a+ b-"),
        ("b+ a-", "a+ a+"),
    ];
    for (t1, t2) in cases {
        let w1 = word(1, t1);
        let w2 = word(1, t2);
        let combined = w1.concat(&w2).unwrap();
        for c in &probes {
            let two_step = apply_word(&s, &w1, None, &apply_word(&s, &w2, None, c).unwrap()).unwrap();
            let one_step = apply_word(&s, &combined, None, c).unwrap();
            assert_eq!(s.homology_class(&two_step), s.homology_class(&one_step));
            for p in &probes {
                assert_eq!(
                    s.geometric_intersection(&two_step, p).unwrap(),
                    s.geometric_intersection(&one_step, p).unwrap(),
                    "words {t1} · {t2} on probe"
                );
            }
        }
    }
}

#[test]
fn apply_word_matches_homology_action() {
    // The curve-level image and the matrix-level image agree in homology.
    let s = Surface::build(2).unwrap();
    let words = ["a1+ b1+ a2-", "b2- a1+", "a2+ a2+ b2-"];
    for text in words {
        let w = word(2, text);
        let m = action(&w);
        for name in ["a1", "b1", "a2", "b2"] {
            let c = s.named_curve(name).unwrap();
            let img = apply_word(&s, &w, None, &c).unwrap();
            let got = s.homology_class(&img);
            let v: Vec<i128> = s.homology_class(&c).iter().map(|&x| x as i128).collect();
            let expected: Vec<i64> = m.mul_vec(&v).iter().map(|&x| x as i64).collect();
            assert_eq!(got, expected, "word {text} on {name}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(25))]

    #[test]
    fn apply_word_preserves_intersection_numbers(
        w in word_strategy(1, 3),
        (i, j) in (0usize..2, 0usize..2),
    ) {
        let s = Surface::build(1).unwrap();
        let names = ["a1", "b1"];
        let c = s.named_curve(names[i]).unwrap();
        let d = s.named_curve(names[j]).unwrap();
        let before = s.geometric_intersection(&c, &d).unwrap();
        let fc = apply_word(&s, &w, None, &c).unwrap();
        let fd = apply_word(&s, &w, None, &d).unwrap();
        let after = s.geometric_intersection(&fc, &fd).unwrap();
        prop_assert_eq!(before, after);
    }
}

#[test]
fn apply_word_preserves_arc_intersections() {
    // Arc/arc counts rel endpoints are preserved too, including words with
    // boundary twists (a homeomorphism of the pair).
    let s = Surface::build(1).unwrap();
    let arc0 = s.cut_arc_pushoff(0, Rat::new(3.into(), 4.into()), Rat::new(1.into(), 4.into()));
    let arc1 = s.cut_arc_pushoff(1, Rat::new(3.into(), 4.into()), Rat::new(1.into(), 4.into()));
    let before = s.geometric_intersection(&arc0, &arc1).unwrap();
    for (text, k) in [("a+ b+", 0), ("a+ b-", 1), ("b- b-", -1)] {
        let w = MonodromyWord::parse(1, text, k).unwrap();
        let f0 = apply_word(&s, &w, None, &arc0).unwrap();
        let f1 = apply_word(&s, &w, None, &arc1).unwrap();
        assert_eq!(
            s.geometric_intersection(&f0, &f1).unwrap(),
            before,
            "word {text} with {k} boundary twists"
        );
    }
}

#[test]
fn higher_genus_classification_contract() {
    // Identity words are exact at any genus; anything else is a typed refusal.
    let id = MonodromyWord::identity(3);
    let c = classify(&id).unwrap();
    assert!(c.is_identity_class());
    assert_eq!(c.action.dim(), 6);

    let hard = word(2, "a1+ b1-");
    assert!(matches!(classify(&hard), Err(openbook::Error::Unsupported(_))));
}

#[test]
fn trace_minus_three_interior_example() {
    // a^5 b: trace −3, the standard negative-trace pseudo-Anosov testbed.
    let w = word(1, "a+ a+ a+ a+ a+ b+");
    let c = classify(&w).unwrap();
    assert_eq!(c.trace, -3);
    match c.nt_type {
        NtType::PseudoAnosov { rotated, dilatation, .. } => {
            assert!(rotated);
            assert!((dilatation - (3.0 + 5.0f64.sqrt()) / 2.0).abs() < 1e-12);
        }
        other => panic!("expected pseudo-Anosov, got {other:?}"),
    }
    assert_eq!(c.t_c.as_ref().map(|t| t.to_f64().unwrap()), Some(0.5));
}
