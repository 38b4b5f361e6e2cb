//! Translating labels into dynamic-algebra weights and reducing words.
use goi_core::algebra::{involute, lw, normalize, parse_weight};
use goi_core::label::parse_label;

fn main() {
    for (label, level) in [("^(D>.a.<!)", 0), ("_(!>.a.<D)", 1), ("a.?>.b", 2), ("R>.<S", 0)] {
        let l = parse_label(label).unwrap();
        let w = lw(&l, level).unwrap();
        println!("lw({l}, {level}) = {} at level {}; involution {}", w.weight, w.out_level, involute(&w.weight));
    }
    for word in ["q.d.d*.q*", "p.q*", "d.!(p*)", "t.!(p*)", "!(p).r*"] {
        let w = parse_weight(word).unwrap();
        println!("{w} reduces to {}", normalize(&w));
    }
}
