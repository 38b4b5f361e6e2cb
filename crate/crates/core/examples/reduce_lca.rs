//! The closed-argument calculus: leftmost-outermost traces and confluence
//! by exhaustive search.
use goi_core::corpus::labelled;
use goi_core::rewrite::{explore, reduce, Calculus, Configuration};
use goi_core::term::parse_lambda;

fn main() {
    for src in ["(\\x.x) (\\y.y)", "(\\x.x) (\\x.x) (\\x.x)", "(\\f.\\x.f (f x)) (\\f.\\x.f (f x))"] {
        let start = Configuration::new(labelled(&parse_lambda(src).unwrap()));
        let trace = reduce(&start, Calculus::Lca, 10_000).unwrap();
        let rules: Vec<String> = trace.iter().map(|s| s.site.rule.to_string()).collect();
        let graph = explore(&start, Calculus::Lca, 10_000).unwrap();
        println!("{src}\n  {} steps: {}", trace.len(), rules.join(" "));
        println!("  graph: {} states, {} normal form(s)", graph.states.len(), graph.sink_terms().len());
    }
}
