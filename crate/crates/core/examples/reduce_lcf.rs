//! Reduces terms in the closed-function calculus and prints the traces.
use goi_core::corpus::labelled;
use goi_core::rewrite::{reduce, trace_records, Calculus, Configuration};
use goi_core::term::parse_lambda;

fn main() {
    for src in ["(\\x.x) (\\y.y)", "(\\x.\\y.x y) (\\x.x)", "(\\x.\\y.y) (\\z.z)"] {
        let start = Configuration::new(labelled(&parse_lambda(src).unwrap()));
        println!("{src}: {}", start.term);
        let trace = reduce(&start, Calculus::Lcf, 1000).unwrap();
        for r in trace_records(&trace, Calculus::Lcf) {
            println!("  {:>2} {:<5} {}", r.step, r.rule, r.term_printed);
            if !r.erased_labels.is_empty() {
                println!("     erased: {:?}", r.erased_labels);
            }
        }
    }
}
