//! Closed cut elimination on unlabelled call-by-name nets, following a
//! closed-argument reduction: identity rules leave the net unchanged and
//! every other rule is one cut step.
use goi_core::check::is_identity_rule;
use goi_core::corpus::labelled;
use goi_core::net::{closed_cut_step, cut_kind, iso_check_mode, translate_unlabelled, IsoMode, Net, Translation};
use goi_core::rewrite::{reduce, Calculus, Configuration};
use goi_core::term::parse_lambda;

fn net_of(c: &Configuration) -> Net {
    translate_unlabelled(&c.term.unlabelled(), Translation::Cbn).unwrap()
}

fn main() {
    let src = "(\\x.\\y.x y) (\\x.x)";
    let start = Configuration::new(labelled(&parse_lambda(src).unwrap()));
    let mut net = net_of(&start);
    println!("{src}: {} nodes", net.nodes.len());
    for s in reduce(&start, Calculus::Lca, 1000).unwrap() {
        let target = net_of(&s.config);
        if is_identity_rule(s.site.rule) {
            println!("  {:<4} same net: {}", s.site.rule, iso_check_mode(&net, &target, IsoMode::Structural));
        } else {
            let (cut, next) = net
                .cuts()
                .into_iter()
                .find_map(|c| closed_cut_step(&net, c).ok().filter(|n| iso_check_mode(n, &target, IsoMode::Structural)).map(|n| (c, n)))
                .expect("some cut step matches");
            println!("  {:<4} {:?} cut", s.site.rule, cut_kind(&net, cut).unwrap());
            net = next;
        }
        println!("       {}", s.config.term.unlabelled());
    }
    // `(λx.x) y` has an open argument; the net can still fire its
    // multiplicative cut.
    for c in net.cuts() {
        let closed = closed_cut_step(&net, c).is_ok();
        println!("  left over: {:?} cut, fires: {closed}", cut_kind(&net, c).unwrap());
    }
}
