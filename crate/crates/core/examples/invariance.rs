//! Compares weight sets of the nets along a reduction.
use goi_core::corpus::labelled;
use goi_core::net::{translate_with, Translation};
use goi_core::paths::check_invariance;
use goi_core::rewrite::{reduce, Calculus, Configuration};
use goi_core::term::parse_lambda;

fn main() {
    for (calc, mode) in [(Calculus::Lcf, Translation::Cbv), (Calculus::Lca, Translation::Cbn)] {
        let start = Configuration::new(labelled(&parse_lambda("(\\x.x) (\\x.x) (\\x.x)").unwrap()));
        let mut prev = translate_with(&start.term, 0, mode).unwrap();
        println!("{calc}/{mode}");
        for s in reduce(&start, calc, 1000).unwrap() {
            let next = translate_with(&s.config.term, 0, mode).unwrap();
            let r = check_invariance(&prev, &next, None);
            println!("  {:<5} bound {:>3}: {} common, holds {}", s.site.rule, r.bound, r.common_count, r.holds());
            prev = next;
        }
    }
}
