//! Label operations and Lévy's labelled β-reduction.
use goi_core::label::{bullet, f_multiplicative, parse_label, parse_labelled, reverse};
use goi_core::levy;

fn main() {
    let l = parse_label("D>.a.<!").unwrap();
    println!("reverse({l}) = {}", reverse(&l));
    let over = parse_label("^(a)._(b)").unwrap();
    println!("f({over}) = {}", f_multiplicative(&over));

    let t = parse_labelled("(\\x.x^{b})^{a}").unwrap();
    println!("c • {t} = {}", bullet(&parse_label("c").unwrap(), &t));

    let redex = parse_labelled("((\\x.x^{d})^{a} (\\y.y^{e})^{b})^{c}").unwrap();
    let (nf, steps) = levy::normalize(&redex, 100).unwrap();
    println!("{redex}\n  -> {nf} in {steps} step(s)");
}
