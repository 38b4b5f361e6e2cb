//! Enumeration of closed λ-terms, used as test and check corpus.

use crate::term::{compile, FreshSupply, LambdaTerm};
use crate::label::{initialize, LabelledTerm};

/// Binder introduced at nesting depth `d`.
pub fn binder_name(d: usize) -> String {
    const NAMES: [&str; 6] = ["x", "y", "z", "u", "v", "w"];
    if d < NAMES.len() {
        NAMES[d].to_string()
    } else {
        format!("{}{}", NAMES[d % NAMES.len()], d / NAMES.len())
    }
}

fn terms_of_size(n: usize, depth: usize) -> Vec<LambdaTerm> {
    let mut out = Vec::new();
    if n == 1 {
        out.extend((0..depth).map(|d| LambdaTerm::var(&binder_name(d))));
    }
    if n >= 2 {
        let x = binder_name(depth);
        out.extend(terms_of_size(n - 1, depth + 1).into_iter().map(|b| LambdaTerm::abs(&x, b)));
    }
    if n >= 3 {
        for k in 1..n - 1 {
            let fs = terms_of_size(k, depth);
            let args = terms_of_size(n - 1 - k, depth);
            for f in &fs {
                for a in &args {
                    out.push(LambdaTerm::app(f.clone(), a.clone()));
                }
            }
        }
    }
    out
}

/// All closed λ-terms of size (variable 1, abstraction 1 + body,
/// application 1 + both sides) at most `max_size`, in order of size.
pub fn closed_terms(max_size: usize) -> Vec<LambdaTerm> {
    (1..=max_size).flat_map(|n| terms_of_size(n, 0)).collect()
}

/// A few larger terms exercised alongside the enumeration.
pub fn named_terms() -> Vec<(&'static str, LambdaTerm)> {
    let p = |s: &str| crate::term::parse_lambda(s).expect("named corpus term parses");
    vec![
        ("I I I", p("(\\x.x) (\\x.x) (\\x.x)")),
        ("(\\x y.x y) I", p("(\\x.\\y.x y) (\\x.x)")),
        ("2 2", p("(\\f.\\x.f (f x)) (\\f.\\x.f (f x))")),
    ]
}

/// The enumeration plus the named terms.
pub fn corpus(max_size: usize) -> Vec<LambdaTerm> {
    let mut out = closed_terms(max_size);
    out.extend(named_terms().into_iter().map(|(_, t)| t));
    out
}

/// Compiles and labels a λ-term with fresh atoms.
pub fn labelled(t: &LambdaTerm) -> LabelledTerm {
    let (c, s) = compile(t, FreshSupply::new());
    initialize(&c, s).0
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent count of closed terms by size: m(n, k) terms of size n
    /// with k binders in scope.
    fn count(n: usize, k: usize) -> usize {
        let mut c = if n == 1 { k } else { 0 };
        if n >= 2 {
            c += count(n - 1, k + 1);
        }
        if n >= 3 {
            c += (1..n - 1).map(|i| count(i, k) * count(n - 1 - i, k)).sum::<usize>();
        }
        c
    }

    #[test]
    fn sizes_match_the_recurrence() {
        for n in 1..=7 {
            let got = terms_of_size(n, 0);
            assert_eq!(got.len(), count(n, 0));
            assert!(got.iter().all(|t| t.size() == n));
        }
        // Closed terms of size 2, 3, 4: λx.x; λx.λy.y, λx.λy.x; and so on.
        assert_eq!(terms_of_size(2, 0).len(), 1);
        assert_eq!(terms_of_size(3, 0).len(), 2);
    }

    #[test]
    fn enumerated_terms_are_closed_and_distinct() {
        let ts = closed_terms(7);
        assert!(ts.iter().all(|t| t.free_vars().is_empty()));
        let printed: std::collections::BTreeSet<String> = ts.iter().map(|t| t.to_string()).collect();
        assert_eq!(printed.len(), ts.len());
    }
}
