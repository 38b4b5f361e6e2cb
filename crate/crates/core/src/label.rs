//! Labels: atoms, over/underlined blocks and directed exponential markers,
//! together with the operations the labelled calculi need.
//!
//! Printed syntax (dotted concatenation):
//!
//! ```text
//! label ::= atom ('.' atom)*
//! atom  ::= name                 atomic label, [a-z][a-z0-9']*
//!         | '^(' label ')'       overline
//!         | '_(' label ')'       underline
//!         | K '>' | '<' K        right / left marker, K in D ! ? R S W P Q
//! ```

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::term::{parse_raw, Annotation, CTerm, FreshSupply, Name, ParseError, Term};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Direction {
    Right,
    Left,
}

impl Direction {
    pub fn flip(self) -> Self {
        match self {
            Direction::Right => Direction::Left,
            Direction::Left => Direction::Right,
        }
    }
}

/// Marker kinds. `P` and `Q` only occur in the output of
/// [`f_multiplicative`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Mark {
    D,
    Bang,
    Quest,
    R,
    S,
    W,
    P,
    Q,
}

impl Mark {
    fn symbol(self) -> char {
        match self {
            Mark::D => 'D',
            Mark::Bang => '!',
            Mark::Quest => '?',
            Mark::R => 'R',
            Mark::S => 'S',
            Mark::W => 'W',
            Mark::P => 'P',
            Mark::Q => 'Q',
        }
    }

    fn from_symbol(c: char) -> Option<Mark> {
        Some(match c {
            'D' => Mark::D,
            '!' => Mark::Bang,
            '?' => Mark::Quest,
            'R' => Mark::R,
            'S' => Mark::S,
            'W' => Mark::W,
            'P' => Mark::P,
            'Q' => Mark::Q,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Atom {
    Atomic(Name),
    Over(Label),
    Under(Label),
    Marker(Direction, Mark),
}

impl Atom {
    pub fn atomic(name: &str) -> Self {
        Atom::Atomic(name.to_string())
    }
    pub fn right(mark: Mark) -> Self {
        Atom::Marker(Direction::Right, mark)
    }
    pub fn left(mark: Mark) -> Self {
        Atom::Marker(Direction::Left, mark)
    }
}

/// A sequence of atoms. Labels attached to terms are never empty; empty
/// labels appear only as intermediate values (e.g. an empty marker prefix).
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Label {
    pub atoms: Vec<Atom>,
}

impl Label {
    pub fn new(atoms: Vec<Atom>) -> Self {
        Label { atoms }
    }

    pub fn atomic(name: &str) -> Self {
        Label::new(vec![Atom::atomic(name)])
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn concat(&self, other: &Label) -> Label {
        let mut atoms = self.atoms.clone();
        atoms.extend(other.atoms.iter().cloned());
        Label { atoms }
    }

    pub fn push(mut self, atom: Atom) -> Label {
        self.atoms.push(atom);
        self
    }

    pub fn over(self) -> Atom {
        Atom::Over(self)
    }

    pub fn under(self) -> Atom {
        Atom::Under(self)
    }

    /// Atomic names, in reading order, looking inside over/underlines.
    pub fn atomic_names(&self) -> Vec<&str> {
        fn go<'a>(l: &'a Label, out: &mut Vec<&'a str>) {
            for a in &l.atoms {
                match a {
                    Atom::Atomic(n) => out.push(n),
                    Atom::Over(inner) | Atom::Under(inner) => go(inner, out),
                    Atom::Marker(..) => {}
                }
            }
        }
        let mut out = Vec::new();
        go(self, &mut out);
        out
    }

    pub fn first_atomic(&self) -> Option<&str> {
        self.atomic_names().first().copied()
    }

    pub fn last_atomic(&self) -> Option<&str> {
        self.atomic_names().last().copied()
    }

    /// True if any marker of this kind occurs, at any depth.
    pub fn contains_mark(&self, mark: Mark) -> bool {
        self.atoms.iter().any(|a| match a {
            Atom::Marker(_, m) => *m == mark,
            Atom::Over(l) | Atom::Under(l) => l.contains_mark(mark),
            Atom::Atomic(_) => false,
        })
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Atomic(n) => f.write_str(n),
            Atom::Over(l) => write!(f, "^({l})"),
            Atom::Under(l) => write!(f, "_({l})"),
            Atom::Marker(Direction::Right, m) => write!(f, "{}>", m.symbol()),
            Atom::Marker(Direction::Left, m) => write!(f, "<{}", m.symbol()),
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.atoms.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

impl Annotation for Label {
    fn suffix(&self) -> Option<String> {
        Some(self.to_string())
    }
}

impl std::str::FromStr for Label {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_label(s)
    }
}

struct LabelParser {
    chars: Vec<char>,
    pos: usize,
}

impl LabelParser {
    fn err(&self, msg: &str) -> ParseError {
        ParseError { pos: self.pos, message: msg.to_string() }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn label(&mut self) -> Result<Label, ParseError> {
        let mut atoms = vec![self.atom()?];
        while self.peek() == Some('.') {
            self.pos += 1;
            atoms.push(self.atom()?);
        }
        Ok(Label { atoms })
    }

    fn bracketed(&mut self) -> Result<Label, ParseError> {
        self.pos += 1;
        if self.peek() != Some('(') {
            return Err(self.err("expected `(`"));
        }
        self.pos += 1;
        let inner = if self.peek() == Some(')') { Label::default() } else { self.label()? };
        if self.peek() != Some(')') {
            return Err(self.err("expected `)`"));
        }
        self.pos += 1;
        Ok(inner)
    }

    fn atom(&mut self) -> Result<Atom, ParseError> {
        match self.peek() {
            Some('^') => Ok(Atom::Over(self.bracketed()?)),
            Some('_') => Ok(Atom::Under(self.bracketed()?)),
            Some('<') => {
                self.pos += 1;
                let m = self.peek().and_then(Mark::from_symbol).ok_or_else(|| self.err("expected marker kind"))?;
                self.pos += 1;
                Ok(Atom::Marker(Direction::Left, m))
            }
            Some(c) if c.is_ascii_lowercase() => {
                let start = self.pos;
                while self
                    .peek()
                    .is_some_and(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '\'')
                {
                    self.pos += 1;
                }
                Ok(Atom::Atomic(self.chars[start..self.pos].iter().collect()))
            }
            Some(c) => match Mark::from_symbol(c) {
                Some(m) => {
                    self.pos += 1;
                    if self.peek() != Some('>') {
                        return Err(self.err("expected `>` after marker kind"));
                    }
                    self.pos += 1;
                    Ok(Atom::Marker(Direction::Right, m))
                }
                None => Err(self.err("unexpected character in label")),
            },
            None => Err(self.err("unexpected end of label")),
        }
    }
}

/// Parses the dotted label syntax described in the module documentation.
pub fn parse_label(text: &str) -> Result<Label, ParseError> {
    let mut p = LabelParser { chars: text.chars().filter(|c| !c.is_whitespace()).collect(), pos: 0 };
    let l = p.label()?;
    if p.pos != p.chars.len() {
        return Err(p.err("trailing input in label"));
    }
    Ok(l)
}

/// λc-terms whose variable, abstraction and application nodes carry labels.
pub type LabelledTerm = Term<Label>;

/// Parses a labelled term: the λc grammar where every variable, abstraction
/// and application is followed by `^{label}`, e.g. `((\x.x^{c})^{b} y^{d})^{a}`.
pub fn parse_labelled(text: &str) -> Result<LabelledTerm, ParseError> {
    let raw = parse_raw(text)?;
    let mut err: Option<ParseError> = None;
    let t = raw.map_labels(&mut |l| match l {
        Some((s, pos)) => match parse_label(s) {
            Ok(label) => label,
            Err(e) => {
                err.get_or_insert(ParseError { pos: pos + e.pos, message: e.message });
                Label::default()
            }
        },
        None => {
            err.get_or_insert(ParseError { pos: 0, message: "unlabelled node in labelled term".into() });
            Label::default()
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(t),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LabelError {
    #[error("variable {0} is not free in the term")]
    VariableNotFree(Name),
    #[error("variable {0} is free only as an erased or copied variable and has no label")]
    NoLabelledOccurrence(Name),
}

/// Labels every variable, abstraction and application node with a fresh,
/// distinct atom, in preorder.
pub fn initialize(term: &CTerm, mut supply: FreshSupply) -> (LabelledTerm, FreshSupply) {
    let t = term.map_labels(&mut |_| Label::atomic(&supply.atom()));
    (t, supply)
}

/// `prefix • term`: prepends to the label of the nearest labelled node,
/// looking through copies, erasures and substitution bodies.
pub fn bullet(prefix: &Label, term: &LabelledTerm) -> LabelledTerm {
    let mut t = term.clone();
    bullet_in_place(prefix, &mut t);
    t
}

pub fn bullet_in_place(prefix: &Label, term: &mut LabelledTerm) {
    if prefix.is_empty() {
        return;
    }
    match term {
        Term::Var { label, .. } | Term::Abs { label, .. } | Term::App { label, .. } => {
            *label = prefix.concat(label);
        }
        Term::Erase { body, .. } | Term::Copy { body, .. } | Term::Subst { body, .. } => {
            bullet_in_place(prefix, body)
        }
    }
}

fn reverse_atom(a: &Atom) -> Atom {
    match a {
        Atom::Atomic(n) => Atom::Atomic(n.clone()),
        Atom::Over(l) => Atom::Over(reverse(l)),
        Atom::Under(l) => Atom::Under(reverse(l)),
        Atom::Marker(d, m) => Atom::Marker(d.flip(), *m),
    }
}

/// `(·)^r`: reverses the order of atoms, flips every marker and distributes
/// through over/underlines.
pub fn reverse(label: &Label) -> Label {
    Label { atoms: label.atoms.iter().rev().map(reverse_atom).collect() }
}

/// External label of a term.
pub fn label_of(term: &LabelledTerm) -> &Label {
    match term {
        Term::Var { label, .. } | Term::Abs { label, .. } | Term::App { label, .. } => label,
        Term::Erase { body, .. } | Term::Copy { body, .. } | Term::Subst { body, .. } => {
            label_of(body)
        }
    }
}

/// Label on the unique free occurrence of `x`.
pub fn var_label(term: &LabelledTerm, x: &str) -> Result<Label, LabelError> {
    fn go(t: &LabelledTerm, x: &str) -> Option<Result<Label, LabelError>> {
        match t {
            Term::Var { name, label } => (name == x).then(|| Ok(label.clone())),
            Term::Abs { binder, body, .. } => {
                if binder == x {
                    None
                } else {
                    go(body, x)
                }
            }
            Term::App { fun, arg, .. } => go(fun, x).or_else(|| go(arg, x)),
            Term::Erase { binder, body } => {
                if binder == x {
                    Some(Err(LabelError::NoLabelledOccurrence(x.to_string())))
                } else {
                    go(body, x)
                }
            }
            Term::Copy { source, left, right, body } => {
                if source == x {
                    Some(Err(LabelError::NoLabelledOccurrence(x.to_string())))
                } else if left == x || right == x {
                    None
                } else {
                    go(body, x)
                }
            }
            Term::Subst { body, arg, target } => {
                let inner = if target == x { None } else { go(body, x) };
                inner.or_else(|| go(arg, x))
            }
        }
    }
    go(term, x).unwrap_or_else(|| Err(LabelError::VariableNotFree(x.to_string())))
}

/// Replaces overlines by `Q>…<Q` and underlines by `P>…<P`.
pub fn f_multiplicative(label: &Label) -> Label {
    let mut atoms = Vec::new();
    for a in &label.atoms {
        match a {
            Atom::Over(l) => {
                atoms.push(Atom::right(Mark::Q));
                atoms.extend(f_multiplicative(l).atoms);
                atoms.push(Atom::left(Mark::Q));
            }
            Atom::Under(l) => {
                atoms.push(Atom::right(Mark::P));
                atoms.extend(f_multiplicative(l).atoms);
                atoms.push(Atom::left(Mark::P));
            }
            other => atoms.push(other.clone()),
        }
    }
    Label { atoms }
}

/// Splits a label at its first top-level occurrence of `atom`, returning the
/// parts before and after it.
pub fn split_at_first(label: &Label, atom: &Atom) -> Option<(Label, Label)> {
    let i = label.atoms.iter().position(|a| a == atom)?;
    Some((Label::new(label.atoms[..i].to_vec()), Label::new(label.atoms[i + 1..].to_vec())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::{compile, parse_lambda};

    fn l(s: &str) -> Label {
        parse_label(s).unwrap()
    }

    #[test]
    fn label_round_trip() {
        for s in ["a", "a.b", "^(D>.a.<!)", "_(!>.a.<D).b", "c.^(D>.a.<!).d._(!>.a.<D).b", "W>.?>.<R.S>"] {
            assert_eq!(l(s).to_string(), s);
        }
        assert!(parse_label("a..b").is_err());
        assert!(parse_label("X>").is_err());
    }

    #[test]
    fn reverse_examples() {
        assert_eq!(reverse(&l("a")), l("a"));
        assert_eq!(reverse(&l("D>.a.<!")), l("!>.a.<D"));
        assert_eq!(reverse(&l("a.^(b.c).R>")), l("<R.^(c.b).a"));
    }

    #[test]
    fn bullet_examples() {
        let x = parse_labelled("x^{a}").unwrap();
        assert_eq!(bullet(&l("b"), &x), parse_labelled("x^{b.a}").unwrap());
        let e = parse_labelled("eps[y].x^{a}").unwrap();
        assert_eq!(bullet(&l("b"), &e), parse_labelled("eps[y].x^{b.a}").unwrap());
        let s = parse_labelled("x^{a}[y^{c}/x]").unwrap();
        assert_eq!(bullet(&l("b"), &s), parse_labelled("x^{b.a}[y^{c}/x]").unwrap());
    }

    #[test]
    fn label_of_and_var_label() {
        let t = parse_labelled("(x^{a} y^{b})^{c}").unwrap();
        assert_eq!(label_of(&t), &l("c"));
        assert_eq!(var_label(&t, "y").unwrap(), l("b"));
        assert_eq!(var_label(&t, "z"), Err(LabelError::VariableNotFree("z".into())));
        let s = parse_labelled("(x^{a} y^{b})^{c}[z^{d}/x]").unwrap();
        assert_eq!(var_label(&s, "z").unwrap(), l("d"));
        assert_eq!(var_label(&s, "x"), Err(LabelError::VariableNotFree("x".into())));
        assert_eq!(label_of(&s), &l("c"));
    }

    #[test]
    fn f_examples() {
        assert_eq!(f_multiplicative(&l("a")), l("a"));
        assert_eq!(f_multiplicative(&l("^(a)")), l("Q>.a.<Q"));
        assert_eq!(f_multiplicative(&l("_(a)")), l("P>.a.<P"));
    }

    #[test]
    fn initialize_labels_in_preorder() {
        let (t, _) = initialize(&crate::term::parse_cterm("\\x.x").unwrap(), FreshSupply::new());
        assert_eq!(t.to_string(), "(\\x.x^{b})^{a}");
        let src = parse_lambda("(\\x.x x)(\\x.x z)").unwrap();
        let (c, supply) = compile(&src, FreshSupply::new());
        let (t, _) = initialize(&c, supply);
        let mut atoms = Vec::new();
        t.map_labels(&mut |lab: &Label| atoms.push(lab.clone()));
        // Var, Abs and App nodes of the compiled term, counted by hand:
        // App(Abs(Copy(App(x', x''))), Abs(App(x, z))).
        assert_eq!(atoms.len(), 9);
        let distinct: std::collections::BTreeSet<_> = atoms.iter().collect();
        assert_eq!(distinct.len(), 9);
    }

    #[test]
    fn labelled_term_round_trip() {
        let s = "((\\x.x^{d})^{a} (\\y.y^{e})^{b})^{c}";
        let t = parse_labelled(s).unwrap();
        assert_eq!(t.to_string(), s);
        let s = "x^{c.^(D>.a.<!).d}[(\\y.y^{e})^{_(!>.a.<D).b}/x]";
        assert_eq!(parse_labelled(s).unwrap().to_string(), s);
    }
}
