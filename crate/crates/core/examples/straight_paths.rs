//! Straight paths from the interface of a net and their weights.
use goi_core::algebra::normalize;
use goi_core::label::parse_labelled;
use goi_core::net::{translate_cbv, Endpoint};
use goi_core::paths::{enumerate_straight, path_weight, weight_set, PathFilter};

fn main() {
    let t = parse_labelled("((\\x.x^{b})^{a} (\\y.y^{d})^{c})^{e}").unwrap();
    let net = translate_cbv(&t, 0).unwrap();
    let e = enumerate_straight(&net, 40, PathFilter::Persistent);
    // Complete paths: back at the interface with a non-zero weight.
    for p in e.paths.iter().filter(|p| !matches!(p.end(&net), Endpoint::Port { .. })) {
        let w = normalize(&path_weight(&net, p));
        if !w.is_zero() {
            println!("{} edges: {w}", p.steps.len());
        }
    }
    let ws = weight_set(&net, 40, PathFilter::Persistent);
    println!("{} persistent weights, truncated: {}", ws.weights.len(), ws.truncated);
}
