//! Call-by-value translation of a labelled term into a weighted net.
use goi_core::corpus::labelled;
use goi_core::net::{to_dot, translate_cbv, validate, NodeKind};
use goi_core::term::parse_lambda;

fn main() {
    let t = labelled(&parse_lambda("(\\x.\\y.x y) (\\x.x)").unwrap());
    let net = translate_cbv(&t, 0).unwrap();
    assert!(validate(&net, true).is_empty());
    println!(
        "{t}: {} edges, {} cut(s), {} boxes, {} derelictions",
        net.edges.len(),
        net.cuts().len(),
        net.boxes.len(),
        net.count(NodeKind::Derelict)
    );
    print!("{}", to_dot(&net));
}
