//! End-to-end runs over the corpus: translations, cut elimination, export
//! and weight sets.

use goi_core::check::translation_for;
use goi_core::corpus;
use goi_core::net::{
    closed_cut_step, from_json, iso_check, translate_unlabelled, translate_with, validate, NodeKind, Translation,
};
use goi_core::paths::{check_invariance, weight_set, PathFilter};
use goi_core::rewrite::{reduce, Calculus, Configuration};

fn traces(calculus: Calculus) -> Vec<Vec<Configuration>> {
    corpus::corpus(6)
        .iter()
        .map(|t| {
            let start = Configuration::new(corpus::labelled(t));
            let mut cs = vec![start.clone()];
            cs.extend(reduce(&start, calculus, 10_000).unwrap().into_iter().map(|s| s.config));
            cs
        })
        .collect()
}

#[test]
fn every_reachable_net_validates() {
    // Atom levels match box depth only on initialised terms: after Beta the
    // labels still record the boxes the redex crossed.
    for calc in [Calculus::Lcf, Calculus::Lca] {
        let mode = translation_for(calc);
        for trace in traces(calc) {
            for (i, c) in trace.iter().enumerate() {
                let net = translate_with(&c.term, 0, mode).unwrap_or_else(|e| panic!("{}: {e}", c.term));
                let v = validate(&net, i == 0);
                assert!(v.is_empty(), "{mode} net of {}: {v:?}", c.term);
            }
        }
    }
}

#[test]
fn json_export_round_trips() {
    for trace in traces(Calculus::Lca) {
        for c in trace {
            for mode in [Translation::Cbv, Translation::Cbn] {
                let Ok(net) = translate_with(&c.term, 0, mode) else { continue };
                let back = from_json(&goi_core::net::to_json(&net)).unwrap();
                assert!(iso_check(&net, &back), "{}", c.term);
                assert_eq!(back, net);
            }
        }
    }
}

#[test]
fn closed_cut_steps_keep_nets_well_formed() {
    let mut fired = 0;
    for t in corpus::closed_terms(6) {
        let c = goi_core::term::compile(&t, goi_core::term::FreshSupply::new()).0;
        for mode in [Translation::Cbv, Translation::Cbn] {
            let net = translate_unlabelled(&c, mode).unwrap();
            for cut in net.cuts() {
                if let Ok(next) = closed_cut_step(&net, cut) {
                    fired += 1;
                    assert!(validate(&next, false).is_empty(), "{t} {mode}");
                }
            }
        }
    }
    assert!(fired > 20);
}

#[test]
fn weight_sets_grow_with_the_bound() {
    for t in corpus::closed_terms(5) {
        let net = translate_with(&corpus::labelled(&t), 0, Translation::Cbv).unwrap();
        let small = weight_set(&net, 12, PathFilter::Persistent);
        let large = weight_set(&net, 24, PathFilter::Persistent);
        assert!(small.weights.is_subset(&large.weights), "{t}");
    }
}

#[test]
fn identity_application_beta_is_invariant() {
    let t = goi_core::term::parse_lambda("(\\x.x) (\\y.y)").unwrap();
    let start = Configuration::new(corpus::labelled(&t));
    let trace = reduce(&start, Calculus::Lcf, 100).unwrap();
    assert_eq!(trace.len(), 2);
    let a = translate_with(&start.term, 0, Translation::Cbv).unwrap();
    let b = translate_with(&trace[0].config.term, 0, Translation::Cbv).unwrap();
    let r = check_invariance(&a, &b, Some(64));
    assert!(r.holds(), "{r:?}");
    assert!(!r.truncated);
}

#[test]
fn cbn_application_boxes_only_the_argument() {
    let t = goi_core::label::parse_labelled("((\\x.x^{d})^{a} (\\y.y^{e})^{b})^{c}").unwrap();
    let net = translate_with(&t, 0, Translation::Cbn).unwrap();
    assert_eq!(net.boxes.len(), 1);
    assert_eq!(net.count(NodeKind::BangDoor), 1);
    assert_eq!(net.cuts().len(), 1);
}
