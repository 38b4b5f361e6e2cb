//! Call-by-name translation, exported as JSON and read back.
use goi_core::corpus::labelled;
use goi_core::net::{from_json, iso_check, to_json, translate_cbn};
use goi_core::term::parse_lambda;

fn main() {
    let t = labelled(&parse_lambda("(\\x.x x) (\\y.y)").unwrap());
    let net = translate_cbn(&t, 0).unwrap();
    let json = to_json(&net);
    let back = from_json(&json).unwrap();
    assert!(iso_check(&net, &back));
    println!("{t}: {} boxes, {} edges", net.boxes.len(), net.edges.len());
    println!("{json}");
}
