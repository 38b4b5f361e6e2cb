//! Compiles λ-terms into linear λc-terms and labels them.
use goi_core::label::initialize;
use goi_core::term::{check_linear, compile, parse_lambda, FreshSupply};

fn main() {
    for src in ["\\x.\\y.x", "(\\x.x x)(\\x.x z)", "\\x.x x x"] {
        let t = parse_lambda(src).expect("parses");
        let (c, supply) = compile(&t, FreshSupply::new());
        assert!(check_linear(&c).is_empty());
        let (labelled, _) = initialize(&c, supply);
        println!("{src}\n  compiled: {}\n  math:     {}\n  labelled: {labelled}", c, c.to_math());
    }
}
