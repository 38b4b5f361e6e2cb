//! Weights: words over the level-indexed constants `p, q, r, s, t, d` and
//! their stars, plus `0`. A constant at level `n` stands for `!^n(c)`.
//!
//! Words are compared syntactically. [`Normalizer`] implements the
//! annihilation and commutation equations, used only to decide whether a
//! path weight is `0`.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::label::{Atom, Direction, Label, Mark};
use crate::term::ParseError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Base {
    P,
    Q,
    R,
    S,
    T,
    D,
}

impl Base {
    pub fn symbol(self) -> char {
        match self {
            Base::P => 'p',
            Base::Q => 'q',
            Base::R => 'r',
            Base::S => 's',
            Base::T => 't',
            Base::D => 'd',
        }
    }

    fn from_symbol(c: char) -> Option<Base> {
        Some(match c {
            'p' => Base::P,
            'q' => Base::Q,
            'r' => Base::R,
            's' => Base::S,
            't' => Base::T,
            'd' => Base::D,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct WAtom {
    pub base: Base,
    pub starred: bool,
    pub level: usize,
}

impl WAtom {
    pub fn new(base: Base, level: usize) -> Self {
        WAtom { base, starred: false, level }
    }

    pub fn star(base: Base, level: usize) -> Self {
        WAtom { base, starred: true, level }
    }

    pub fn involute(self) -> Self {
        WAtom { starred: !self.starred, ..self }
    }
}

impl fmt::Display for WAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = format!("{}{}", self.base.symbol(), if self.starred { "*" } else { "" });
        match self.level {
            0 => f.write_str(&c),
            1 => write!(f, "!({c})"),
            n => write!(f, "!^{n}({c})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Weight {
    Zero,
    /// The empty word is `1`.
    Word(Vec<WAtom>),
}

impl Weight {
    pub fn one() -> Self {
        Weight::Word(Vec::new())
    }

    pub fn atom(a: WAtom) -> Self {
        Weight::Word(vec![a])
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Weight::Zero)
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Weight::Word(w) if w.is_empty())
    }

    pub fn atoms(&self) -> &[WAtom] {
        match self {
            Weight::Zero => &[],
            Weight::Word(w) => w,
        }
    }

    pub fn len(&self) -> usize {
        self.atoms().len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms().is_empty()
    }

    /// Left-to-right composition.
    pub fn compose(&self, other: &Weight) -> Weight {
        compose(self, other)
    }

    pub fn then(self, a: WAtom) -> Weight {
        match self {
            Weight::Zero => Weight::Zero,
            Weight::Word(mut w) => {
                w.push(a);
                Weight::Word(w)
            }
        }
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Weight::Zero => f.write_str("0"),
            Weight::Word(w) if w.is_empty() => f.write_str("1"),
            Weight::Word(w) => {
                for (i, a) in w.iter().enumerate() {
                    if i > 0 {
                        f.write_str(".")?;
                    }
                    write!(f, "{a}")?;
                }
                Ok(())
            }
        }
    }
}

pub fn compose(a: &Weight, b: &Weight) -> Weight {
    match (a, b) {
        (Weight::Word(x), Weight::Word(y)) => {
            let mut w = x.clone();
            w.extend_from_slice(y);
            Weight::Word(w)
        }
        _ => Weight::Zero,
    }
}

/// `(·)*`: reverses the word and flips every star; levels are kept.
pub fn involute(w: &Weight) -> Weight {
    match w {
        Weight::Zero => Weight::Zero,
        Weight::Word(x) => Weight::Word(x.iter().rev().map(|a| a.involute()).collect()),
    }
}

/// `!(·)`: raises every atom by one level.
pub fn bang(w: &Weight) -> Weight {
    bang_n(w, 1)
}

pub fn bang_n(w: &Weight, n: usize) -> Weight {
    match w {
        Weight::Zero => Weight::Zero,
        Weight::Word(x) => Weight::Word(x.iter().map(|a| WAtom { level: a.level + n, ..*a }).collect()),
    }
}

/// Syntactic equality; units are never stored and `0` is absorbing by
/// construction, so this is plain structural comparison.
pub fn weight_equal(a: &Weight, b: &Weight) -> bool {
    a == b
}

/// Parses the printed form: `1`, `0`, or dotted atoms such as
/// `q.d.!(q*).!^2(t)`.
pub fn parse_weight(text: &str) -> Result<Weight, ParseError> {
    let text: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    match text.as_str() {
        "0" => return Ok(Weight::Zero),
        "1" => return Ok(Weight::one()),
        _ => {}
    }
    let err = |pos: usize, m: &str| ParseError { pos, message: m.to_string() };
    let mut atoms = Vec::new();
    let mut offset = 0;
    for part in text.split('.') {
        let (level, inner) = if let Some(rest) = part.strip_prefix("!^") {
            let open = rest.find('(').ok_or_else(|| err(offset, "expected `(`"))?;
            let n: usize = rest[..open].parse().map_err(|_| err(offset, "bad level"))?;
            let inner = rest[open + 1..].strip_suffix(')').ok_or_else(|| err(offset, "expected `)`"))?;
            (n, inner)
        } else if let Some(rest) = part.strip_prefix("!(") {
            (1, rest.strip_suffix(')').ok_or_else(|| err(offset, "expected `)`"))?)
        } else {
            (0, part)
        };
        let mut chars = inner.chars();
        let base = chars.next().and_then(Base::from_symbol).ok_or_else(|| err(offset, "expected constant"))?;
        let starred = match chars.as_str() {
            "" => false,
            "*" => true,
            _ => return Err(err(offset, "unexpected characters after constant")),
        };
        atoms.push(WAtom { base, starred, level });
        offset += part.len() + 1;
    }
    Ok(Weight::Word(atoms))
}

impl std::str::FromStr for Weight {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_weight(s)
    }
}

// ---------------------------------------------------------------------------
// Labels to weights
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LevelledWeight {
    pub weight: Weight,
    pub out_level: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("marker {marker} needs a level of at least 1, found 0")]
    LevelUnderflow { marker: String },
    #[error("marker {0} only occurs in multiplicative projections")]
    ForeignMarker(String),
}

/// Translation from labels to weights, threading the current level.
pub fn lw(label: &Label, level: usize) -> Result<LevelledWeight, AlgebraError> {
    let mut weight = Weight::one();
    let mut n = level;
    for a in &label.atoms {
        let (w, out) = lw_atom(a, n)?;
        weight = compose(&weight, &w);
        n = out;
    }
    Ok(LevelledWeight { weight, out_level: n })
}

fn lw_atom(atom: &Atom, n: usize) -> Result<(Weight, usize), AlgebraError> {
    let underflow = || AlgebraError::LevelUnderflow { marker: atom.to_string() };
    Ok(match atom {
        Atom::Atomic(_) => (Weight::one(), n),
        Atom::Marker(dir, mark) => {
            let starred = *dir == Direction::Left;
            let fixed = |base| (Weight::atom(WAtom { base, starred, level: n }), n);
            match (dir, mark) {
                (_, Mark::R) => fixed(Base::R),
                (_, Mark::S) => fixed(Base::S),
                (_, Mark::D) => fixed(Base::D),
                (Direction::Right, Mark::Quest) => {
                    let m = n.checked_sub(1).ok_or_else(underflow)?;
                    (Weight::atom(WAtom::star(Base::T, m)), m)
                }
                (Direction::Left, Mark::Quest) => (Weight::atom(WAtom::new(Base::T, n)), n + 1),
                (Direction::Right, Mark::Bang) => (Weight::one(), n.checked_sub(1).ok_or_else(underflow)?),
                (Direction::Left, Mark::Bang) => (Weight::one(), n + 1),
                (_, Mark::W) => (Weight::Zero, n),
                (_, Mark::P | Mark::Q) => return Err(AlgebraError::ForeignMarker(atom.to_string())),
            }
        }
        Atom::Over(inner) | Atom::Under(inner) => {
            let base = if matches!(atom, Atom::Over(_)) { Base::Q } else { Base::P };
            let LevelledWeight { weight, out_level } = lw(inner, n)?;
            let w = compose(&Weight::atom(WAtom::new(base, n)), &weight);
            (w.then(WAtom::star(base, out_level)), out_level)
        }
    })
}

// ---------------------------------------------------------------------------
// Equational normalization
// ---------------------------------------------------------------------------

/// Incremental normal form of a word under the equations
///
/// ```text
/// x·x* = 1      p·q* = q·p* = r·s* = s·r* = 0
/// r·!(x) = !(x)·r   s·!(x) = !(x)·s   d·!(x) = x·d   t·!(x) = !!(x)·t
/// !(y)·r* = r*·!(y) !(y)·s* = s*·!(y) !(y)·d* = d*·y !(y)·t* = t*·!!(y)
/// ```
///
/// read left to right. Atoms are appended one at a time; once the word is
/// known to be `0` the normalizer stays dead.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Normalizer {
    word: Vec<WAtom>,
    dead: bool,
}

impl Normalizer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_zero(&self) -> bool {
        self.dead
    }

    /// The reduced word, or `Zero`.
    pub fn weight(&self) -> Weight {
        if self.dead {
            Weight::Zero
        } else {
            Weight::Word(self.word.clone())
        }
    }

    pub fn push_weight(&mut self, w: &Weight) -> bool {
        match w {
            Weight::Zero => self.dead = true,
            Weight::Word(atoms) => {
                for &a in atoms {
                    if !self.push(a) {
                        break;
                    }
                }
            }
        }
        !self.dead
    }

    /// Appends one atom; returns false once the word is `0`.
    pub fn push(&mut self, a: WAtom) -> bool {
        if self.dead {
            return false;
        }
        if !a.starred {
            self.word.push(a);
            return true;
        }
        // Move the starred atom leftwards past positive atoms for as long as
        // some equation applies; positives it passes are put back after it.
        let mut star = a;
        let mut passed: Vec<WAtom> = Vec::new();
        loop {
            let Some(&top) = self.word.last() else { break };
            if top.starred {
                break;
            }
            let (k, m) = (top.level, star.level);
            if k == m {
                if top.base == star.base {
                    self.word.pop();
                    for p in passed.into_iter().rev() {
                        self.word.push(p);
                    }
                    return true;
                }
                let pair = [top.base, star.base];
                if matches!(pair, [Base::P, Base::Q] | [Base::Q, Base::P] | [Base::R, Base::S] | [Base::S, Base::R]) {
                    self.dead = true;
                    return false;
                }
                break;
            }
            if k < m {
                // top is the constant, star is inside a !(·)
                match top.base {
                    Base::R | Base::S => {}
                    Base::D => star.level -= 1,
                    Base::T => star.level += 1,
                    Base::P | Base::Q => break,
                }
                self.word.pop();
                passed.push(top);
            } else {
                // star is the constant, top is inside a !(·)
                let mut moved = top;
                match star.base {
                    Base::R | Base::S => {}
                    Base::D => moved.level -= 1,
                    Base::T => moved.level += 1,
                    Base::P | Base::Q => break,
                }
                self.word.pop();
                passed.push(moved);
            }
        }
        self.word.push(star);
        for p in passed.into_iter().rev() {
            self.word.push(p);
        }
        true
    }
}

/// Normal form of a whole weight.
pub fn normalize(w: &Weight) -> Weight {
    let mut n = Normalizer::new();
    n.push_weight(w);
    n.weight()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::label::parse_label;

    fn w(s: &str) -> Weight {
        parse_weight(s).unwrap()
    }

    #[test]
    fn printing_and_parsing() {
        for s in ["1", "0", "q.d.!(q*)", "!^2(t*).p", "r*.s"] {
            assert_eq!(w(s).to_string(), s);
        }
        assert!(parse_weight("x").is_err());
    }

    #[test]
    fn composition_laws() {
        assert_eq!(compose(&Weight::one(), &w("q")), w("q"));
        assert_eq!(compose(&Weight::Zero, &w("q")), Weight::Zero);
        assert_eq!(compose(&w("q"), &w("d")), w("q.d"));
        assert!(weight_equal(&compose(&Weight::one(), &w("q")), &w("q")));
        assert!(!weight_equal(&w("q.p"), &w("p.q")));
        assert!(weight_equal(&compose(&Weight::Zero, &w("p")), &compose(&Weight::Zero, &w("q"))));
    }

    #[test]
    fn involution_and_bang() {
        assert_eq!(involute(&w("q.d")), w("d*.q*"));
        assert_eq!(involute(&w("!(p)")), w("!(p*)"));
        assert_eq!(bang(&w("p")), w("!(p)"));
        assert_eq!(bang(&Weight::one()), Weight::one());
        assert_eq!(bang(&w("q.d*")), w("!(q).!(d*)"));
    }

    #[test]
    fn lw_table() {
        let lv = |s: &str, n| lw(&parse_label(s).unwrap(), n).unwrap();
        assert_eq!(lv("a", 3), LevelledWeight { weight: Weight::one(), out_level: 3 });
        assert_eq!(lv("?>", 2), LevelledWeight { weight: w("!(t*)"), out_level: 1 });
        assert_eq!(lv("<?", 2), LevelledWeight { weight: w("!^2(t)"), out_level: 3 });
        assert_eq!(lv("^(D>.a.<!)", 0), LevelledWeight { weight: w("q.d.!(q*)"), out_level: 1 });
        assert_eq!(lv("_(R>).<S", 1), LevelledWeight { weight: w("!(p).!(r).!(p*).!(s*)"), out_level: 1 });
        assert_eq!(lv("a.W>.b", 0).weight, Weight::Zero);
        assert!(matches!(lw(&parse_label("!>").unwrap(), 0), Err(AlgebraError::LevelUnderflow { .. })));
        assert!(matches!(lw(&parse_label("Q>").unwrap(), 0), Err(AlgebraError::ForeignMarker(_))));
    }

    #[test]
    fn normalizer_equations() {
        assert_eq!(normalize(&w("q.q*")), Weight::one());
        assert_eq!(normalize(&w("p.q*")), Weight::Zero);
        assert_eq!(normalize(&w("r.s*")), Weight::Zero);
        // d·!(x*) = x*·d
        assert_eq!(normalize(&w("d.!(p*)")), w("p*.d"));
        // t·!(x*) = !!(x*)·t
        assert_eq!(normalize(&w("t.!(p*)")), w("!^2(p*).t"));
        // !(y)·d* = d*·y
        assert_eq!(normalize(&w("!(p).d*")), w("d*.p"));
        // !(y)·r* = r*·!(y)
        assert_eq!(normalize(&w("!(p).r*")), w("r*.!(p)"));
        assert_eq!(normalize(&w("q.d.d*.q*")), Weight::one());
        assert_eq!(normalize(&w("q.!(p).q*")), w("q.!(p).q*"));
        assert_eq!(normalize(&w("d.t*")), w("d.t*"));
    }
}
