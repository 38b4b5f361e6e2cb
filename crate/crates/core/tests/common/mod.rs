//! Generators shared by the property tests and the acceptance harness.
#![allow(dead_code)]

use goi_core::algebra::{Base, WAtom, Weight};
use goi_core::label::{Atom, Direction, Label, Mark};
use proptest::prelude::*;

pub fn arb_mark() -> impl Strategy<Value = Mark> {
    prop_oneof![
        Just(Mark::D),
        Just(Mark::Bang),
        Just(Mark::Quest),
        Just(Mark::R),
        Just(Mark::S),
        Just(Mark::W),
    ]
}

pub fn arb_direction() -> impl Strategy<Value = Direction> {
    prop_oneof![Just(Direction::Right), Just(Direction::Left)]
}

/// Labels over atoms `a`..`e`, every marker kind and nested over/underlines.
pub fn arb_label() -> impl Strategy<Value = Label> {
    let leaf = prop_oneof![
        3 => "[a-e]".prop_map(|n| Atom::Atomic(n)),
        2 => (arb_direction(), arb_mark()).prop_map(|(d, m)| Atom::Marker(d, m)),
    ];
    let atom = leaf.prop_recursive(3, 24, 4, |inner| {
        let seq = prop::collection::vec(inner, 0..4).prop_map(Label::new);
        prop_oneof![
            3 => "[a-e]".prop_map(|n| Atom::Atomic(n)),
            2 => (arb_direction(), arb_mark()).prop_map(|(d, m)| Atom::Marker(d, m)),
            1 => seq.clone().prop_map(Atom::Over),
            1 => seq.prop_map(Atom::Under),
        ]
    });
    prop::collection::vec(atom, 0..8).prop_map(Label::new)
}

pub fn arb_watom() -> impl Strategy<Value = WAtom> {
    let base = prop_oneof![
        Just(Base::P),
        Just(Base::Q),
        Just(Base::R),
        Just(Base::S),
        Just(Base::T),
        Just(Base::D),
    ];
    (base, any::<bool>(), 0usize..4).prop_map(|(base, starred, level)| WAtom { base, starred, level })
}

/// Weights, `0` included.
pub fn arb_weight() -> impl Strategy<Value = Weight> {
    prop_oneof![
        1 => Just(Weight::Zero),
        8 => prop::collection::vec(arb_watom(), 0..8).prop_map(Weight::Word),
    ]
}

/// One sample for the algebra laws: three weights, a label with a split
/// point and a starting level.
#[derive(Debug, Clone)]
pub struct LawCase {
    pub a: Weight,
    pub b: Weight,
    pub c: Weight,
    pub label: Label,
    pub split: usize,
    pub level: usize,
}

pub fn arb_law_case() -> impl Strategy<Value = LawCase> {
    (arb_weight(), arb_weight(), arb_weight(), arb_label(), any::<prop::sample::Index>(), 0usize..4).prop_map(
        |(a, b, c, label, i, level)| {
            let split = i.index(label.atoms.len() + 1);
            LawCase { a, b, c, label, split, level }
        },
    )
}

/// Checks associativity, unit and absorption, the involution laws and the
/// composite row of `lw` on one sample.
pub fn check_law_case(k: &LawCase) -> Result<(), String> {
    use goi_core::algebra::{compose, involute, lw};
    let (a, b, c) = (&k.a, &k.b, &k.c);
    let one = Weight::one();
    if compose(&compose(a, b), c) != compose(a, &compose(b, c)) {
        return Err(format!("associativity fails on {a}, {b}, {c}"));
    }
    if compose(&one, a) != *a || compose(a, &one) != *a {
        return Err(format!("unit fails on {a}"));
    }
    if !compose(&Weight::Zero, a).is_zero() || !compose(a, &Weight::Zero).is_zero() {
        return Err(format!("absorption fails on {a}"));
    }
    if involute(&compose(a, b)) != compose(&involute(b), &involute(a)) {
        return Err(format!("involution is not an anti-homomorphism on {a}, {b}"));
    }
    if involute(&involute(a)) != *a {
        return Err(format!("involution is not an involution on {a}"));
    }
    let alpha = Label::new(k.label.atoms[..k.split].to_vec());
    let beta = Label::new(k.label.atoms[k.split..].to_vec());
    let whole = lw(&k.label, k.level);
    let parts = lw(&alpha, k.level).and_then(|x| lw(&beta, x.out_level).map(|y| (x, y)));
    match (whole, parts) {
        (Ok(w), Ok((x, y))) => {
            if w.weight != compose(&x.weight, &y.weight) || w.out_level != y.out_level {
                return Err(format!("lw composite row fails on {alpha} | {beta} at {}", k.level));
            }
        }
        (Err(_), Err(_)) => {}
        (w, p) => return Err(format!("lw defined on only one side for {} at {}: {w:?} vs {p:?}", k.label, k.level)),
    }
    Ok(())
}
