//! Plain λ-terms, linear λc-terms with explicit substitution, copy and erase,
//! and the compilation from the former into the latter.
//!
//! Both the unlabelled and the labelled calculi share one syntax tree,
//! [`Term<L>`], parameterised by the annotation carried on variable,
//! abstraction and application nodes. Copy, erase and substitution nodes never
//! carry an annotation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Variable identifiers. Ordered lexicographically.
pub type Name = String;

/// Child index path from the root of a term.
pub type Position = Vec<usize>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at offset {pos}: {message}")]
pub struct ParseError {
    pub pos: usize,
    pub message: String,
}

impl ParseError {
    fn new(pos: usize, message: impl Into<String>) -> Self {
        ParseError { pos, message: message.into() }
    }
}

/// An ordinary λ-term.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LambdaTerm {
    Var(Name),
    Abs(Name, Box<LambdaTerm>),
    App(Box<LambdaTerm>, Box<LambdaTerm>),
}

impl LambdaTerm {
    pub fn var(name: &str) -> Self {
        LambdaTerm::Var(name.to_string())
    }

    pub fn abs(binder: &str, body: LambdaTerm) -> Self {
        LambdaTerm::Abs(binder.to_string(), Box::new(body))
    }

    pub fn app(fun: LambdaTerm, arg: LambdaTerm) -> Self {
        LambdaTerm::App(Box::new(fun), Box::new(arg))
    }

    /// Number of Var, Abs and App nodes.
    pub fn size(&self) -> usize {
        match self {
            LambdaTerm::Var(_) => 1,
            LambdaTerm::Abs(_, body) => 1 + body.size(),
            LambdaTerm::App(f, a) => 1 + f.size() + a.size(),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Name> {
        match self {
            LambdaTerm::Var(x) => BTreeSet::from([x.clone()]),
            LambdaTerm::Abs(x, body) => {
                let mut fv = body.free_vars();
                fv.remove(x);
                fv
            }
            LambdaTerm::App(f, a) => {
                let mut fv = f.free_vars();
                fv.extend(a.free_vars());
                fv
            }
        }
    }

    fn collect_names(&self, out: &mut BTreeSet<Name>) {
        match self {
            LambdaTerm::Var(x) => {
                out.insert(x.clone());
            }
            LambdaTerm::Abs(x, body) => {
                out.insert(x.clone());
                body.collect_names(out);
            }
            LambdaTerm::App(f, a) => {
                f.collect_names(out);
                a.collect_names(out);
            }
        }
    }

    /// Every identifier appearing in the term, bound or free.
    pub fn names(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.collect_names(&mut out);
        out
    }

    /// Embeds the term as a (possibly non-linear) unlabelled [`CTerm`].
    pub fn to_cterm(&self) -> CTerm {
        match self {
            LambdaTerm::Var(x) => Term::Var { name: x.clone(), label: () },
            LambdaTerm::Abs(x, body) => Term::Abs {
                binder: x.clone(),
                body: Box::new(body.to_cterm()),
                label: (),
            },
            LambdaTerm::App(f, a) => Term::App {
                fun: Box::new(f.to_cterm()),
                arg: Box::new(a.to_cterm()),
                label: (),
            },
        }
    }
}

impl fmt::Display for LambdaTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_cterm())
    }
}

/// A λc-term annotated with `L` on its variable, abstraction and application
/// nodes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Term<L> {
    Var { name: Name, label: L },
    Abs { binder: Name, body: Box<Term<L>>, label: L },
    App { fun: Box<Term<L>>, arg: Box<Term<L>>, label: L },
    /// `ε_x.M`
    Erase { binder: Name, body: Box<Term<L>> },
    /// `δ_x^{y,z}.M`
    Copy { source: Name, left: Name, right: Name, body: Box<Term<L>> },
    /// `M[N/x]`
    Subst { body: Box<Term<L>>, arg: Box<Term<L>>, target: Name },
}

/// Unlabelled λc-terms.
pub type CTerm = Term<()>;

impl CTerm {
    pub fn var(name: &str) -> Self {
        Term::Var { name: name.into(), label: () }
    }
    pub fn abs(binder: &str, body: CTerm) -> Self {
        Term::Abs { binder: binder.into(), body: Box::new(body), label: () }
    }
    pub fn app(fun: CTerm, arg: CTerm) -> Self {
        Term::App { fun: Box::new(fun), arg: Box::new(arg), label: () }
    }
}

impl<L> Term<L> {
    pub fn erase(binder: &str, body: Term<L>) -> Self {
        Term::Erase { binder: binder.into(), body: Box::new(body) }
    }

    pub fn copy(source: &str, left: &str, right: &str, body: Term<L>) -> Self {
        Term::Copy {
            source: source.into(),
            left: left.into(),
            right: right.into(),
            body: Box::new(body),
        }
    }

    pub fn subst(body: Term<L>, arg: Term<L>, target: &str) -> Self {
        Term::Subst { body: Box::new(body), arg: Box::new(arg), target: target.into() }
    }

    /// Free variables, following the variable-constraint table: erasure adds
    /// its binder, a copy removes its two targets and adds its source.
    pub fn free_vars(&self) -> BTreeSet<Name> {
        match self {
            Term::Var { name, .. } => BTreeSet::from([name.clone()]),
            Term::Abs { binder, body, .. } => {
                let mut fv = body.free_vars();
                fv.remove(binder);
                fv
            }
            Term::App { fun, arg, .. } => {
                let mut fv = fun.free_vars();
                fv.extend(arg.free_vars());
                fv
            }
            Term::Erase { binder, body } => {
                let mut fv = body.free_vars();
                fv.insert(binder.clone());
                fv
            }
            Term::Copy { source, left, right, body } => {
                let mut fv = body.free_vars();
                fv.remove(left);
                fv.remove(right);
                fv.insert(source.clone());
                fv
            }
            Term::Subst { body, arg, target } => {
                let mut fv = body.free_vars();
                fv.remove(target);
                fv.extend(arg.free_vars());
                fv
            }
        }
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// Depends only on the free-variable set, but avoids building it.
    pub fn has_free(&self, x: &str) -> bool {
        match self {
            Term::Var { name, .. } => name == x,
            Term::Abs { binder, body, .. } => binder != x && body.has_free(x),
            Term::App { fun, arg, .. } => fun.has_free(x) || arg.has_free(x),
            Term::Erase { binder, body } => binder == x || body.has_free(x),
            Term::Copy { source, left, right, body } => {
                source == x || (left != x && right != x && body.has_free(x))
            }
            Term::Subst { body, arg, target } => {
                (target != x && body.has_free(x)) || arg.has_free(x)
            }
        }
    }

    /// Number of nodes of every kind.
    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }

    pub fn children(&self) -> Vec<&Term<L>> {
        match self {
            Term::Var { .. } => vec![],
            Term::Abs { body, .. } | Term::Erase { body, .. } | Term::Copy { body, .. } => {
                vec![body]
            }
            Term::App { fun, arg, .. } => vec![fun, arg],
            Term::Subst { body, arg, .. } => vec![body, arg],
        }
    }

    fn child_mut(&mut self, index: usize) -> Option<&mut Term<L>> {
        match (self, index) {
            (Term::Abs { body, .. }, 0)
            | (Term::Erase { body, .. }, 0)
            | (Term::Copy { body, .. }, 0) => Some(body),
            (Term::App { fun, .. }, 0) => Some(fun),
            (Term::App { arg, .. }, 1) => Some(arg),
            (Term::Subst { body, .. }, 0) => Some(body),
            (Term::Subst { arg, .. }, 1) => Some(arg),
            _ => None,
        }
    }

    pub fn subterm(&self, pos: &[usize]) -> Option<&Term<L>> {
        match pos.split_first() {
            None => Some(self),
            Some((&i, rest)) => self.children().get(i).and_then(|c| c.subterm(rest)),
        }
    }

    pub fn subterm_mut(&mut self, pos: &[usize]) -> Option<&mut Term<L>> {
        match pos.split_first() {
            None => Some(self),
            Some((&i, rest)) => self.child_mut(i).and_then(|c| c.subterm_mut(rest)),
        }
    }

    /// Preorder list of every position in the term.
    pub fn positions(&self) -> Vec<Position> {
        fn go<L>(t: &Term<L>, here: &mut Position, out: &mut Vec<Position>) {
            out.push(here.clone());
            for (i, c) in t.children().into_iter().enumerate() {
                here.push(i);
                go(c, here, out);
                here.pop();
            }
        }
        let mut out = Vec::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }

    /// Annotation of the node, when it carries one.
    pub fn annotation(&self) -> Option<&L> {
        match self {
            Term::Var { label, .. } | Term::Abs { label, .. } | Term::App { label, .. } => {
                Some(label)
            }
            _ => None,
        }
    }

    pub fn map_labels<M>(&self, f: &mut impl FnMut(&L) -> M) -> Term<M> {
        match self {
            Term::Var { name, label } => Term::Var { name: name.clone(), label: f(label) },
            Term::Abs { binder, body, label } => {
                let label = f(label);
                Term::Abs { binder: binder.clone(), body: Box::new(body.map_labels(f)), label }
            }
            Term::App { fun, arg, label } => {
                let label = f(label);
                let fun = Box::new(fun.map_labels(f));
                Term::App { fun, arg: Box::new(arg.map_labels(f)), label }
            }
            Term::Erase { binder, body } => {
                Term::Erase { binder: binder.clone(), body: Box::new(body.map_labels(f)) }
            }
            Term::Copy { source, left, right, body } => Term::Copy {
                source: source.clone(),
                left: left.clone(),
                right: right.clone(),
                body: Box::new(body.map_labels(f)),
            },
            Term::Subst { body, arg, target } => Term::Subst {
                body: Box::new(body.map_labels(f)),
                arg: Box::new(arg.map_labels(f)),
                target: target.clone(),
            },
        }
    }

    /// Drops every annotation.
    pub fn unlabelled(&self) -> CTerm {
        self.map_labels(&mut |_| ())
    }

    fn collect_names(&self, out: &mut BTreeSet<Name>) {
        match self {
            Term::Var { name, .. } => {
                out.insert(name.clone());
            }
            Term::Abs { binder, .. } | Term::Erase { binder, .. } => {
                out.insert(binder.clone());
            }
            Term::Copy { source, left, right, .. } => {
                out.extend([source.clone(), left.clone(), right.clone()]);
            }
            Term::Subst { target, .. } => {
                out.insert(target.clone());
            }
            Term::App { .. } => {}
        }
        for c in self.children() {
            c.collect_names(out);
        }
    }

    pub fn names(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.collect_names(&mut out);
        out
    }
}

// ---------------------------------------------------------------------------
// Linearity
// ---------------------------------------------------------------------------

/// One breached variable constraint.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub position: Position,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "at {:?}: {}", self.position, self.message)
    }
}

/// Checks every node against its variable constraint. Returns the breaches
/// in preorder; an empty list means the term is linear.
pub fn check_linear<L>(term: &Term<L>) -> Vec<Violation> {
    fn go<L>(t: &Term<L>, here: &mut Position, out: &mut Vec<Violation>) -> BTreeSet<Name> {
        let mut child_fvs = Vec::new();
        for (i, c) in t.children().into_iter().enumerate() {
            here.push(i);
            child_fvs.push(go(c, here, out));
            here.pop();
        }
        let mut flag = |msg: String| out.push(Violation { position: here.clone(), message: msg });
        match t {
            Term::Var { name, .. } => BTreeSet::from([name.clone()]),
            Term::Abs { binder, .. } => {
                let mut fv = child_fvs.pop().unwrap();
                if !fv.remove(binder) {
                    flag(format!("abstraction binder {binder} does not occur in its body"));
                }
                fv
            }
            Term::App { .. } => {
                let arg = child_fvs.pop().unwrap();
                let mut fun = child_fvs.pop().unwrap();
                let shared: Vec<_> = fun.intersection(&arg).cloned().collect();
                if !shared.is_empty() {
                    flag(format!("function and argument share free variables {shared:?}"));
                }
                fun.extend(arg);
                fun
            }
            Term::Erase { binder, .. } => {
                let mut fv = child_fvs.pop().unwrap();
                if fv.contains(binder) {
                    flag(format!("erased variable {binder} occurs free in the body"));
                }
                fv.insert(binder.clone());
                fv
            }
            Term::Copy { source, left, right, .. } => {
                let mut fv = child_fvs.pop().unwrap();
                if fv.contains(source) {
                    flag(format!("copied variable {source} occurs free in the body"));
                }
                if left == right {
                    flag(format!("copy targets coincide ({left})"));
                }
                for y in [left, right] {
                    if !fv.contains(y) {
                        flag(format!("copy target {y} does not occur in the body"));
                    }
                }
                fv.remove(left);
                fv.remove(right);
                fv.insert(source.clone());
                fv
            }
            Term::Subst { target, .. } => {
                let arg = child_fvs.pop().unwrap();
                let mut body = child_fvs.pop().unwrap();
                if !body.remove(target) {
                    flag(format!("substituted variable {target} does not occur in the body"));
                }
                let shared: Vec<_> = body.intersection(&arg).cloned().collect();
                if !shared.is_empty() {
                    flag(format!("body and argument share free variables {shared:?}"));
                }
                body.extend(arg);
                body
            }
        }
    }
    let mut out = Vec::new();
    go(term, &mut Vec::new(), &mut out);
    out
}

// ---------------------------------------------------------------------------
// Fresh names and compilation
// ---------------------------------------------------------------------------

/// Source of identifiers that do not clash with anything already in use.
///
/// Variable variants are formed by appending primes to a base name; label
/// atoms are drawn from `a, b, …, z, a1, b1, …` using the counter.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FreshSupply {
    pub counter: usize,
    used: BTreeSet<Name>,
}

impl FreshSupply {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn avoiding<I: IntoIterator<Item = Name>>(names: I) -> Self {
        FreshSupply { counter: 0, used: names.into_iter().collect() }
    }

    pub fn reserve(&mut self, name: &str) {
        self.used.insert(name.to_string());
    }

    pub fn is_used(&self, name: &str) -> bool {
        self.used.contains(name)
    }

    /// `base'`, `base''`, … : the first one not yet used.
    pub fn variant(&mut self, base: &str) -> Name {
        let root = base.trim_end_matches('\'');
        let mut candidate = format!("{root}'");
        while self.used.contains(&candidate) {
            candidate.push('\'');
        }
        self.used.insert(candidate.clone());
        candidate
    }

    /// Next atom name. Atoms live in their own namespace, so only the
    /// counter matters.
    pub fn atom(&mut self) -> Name {
        let n = self.counter;
        self.counter += 1;
        let letter = (b'a' + (n % 26) as u8) as char;
        if n < 26 {
            letter.to_string()
        } else {
            format!("{letter}{}", n / 26)
        }
    }
}

fn count_free<L>(t: &Term<L>, x: &str) -> usize {
    match t {
        Term::Var { name, .. } => usize::from(name == x),
        Term::Abs { binder, body, .. } => {
            if binder == x {
                0
            } else {
                count_free(body, x)
            }
        }
        Term::Erase { binder, body } => usize::from(binder == x) + count_free(body, x),
        Term::Copy { source, left, right, body } => {
            let inner = if left == x || right == x { 0 } else { count_free(body, x) };
            usize::from(source == x) + inner
        }
        Term::Subst { body, arg, target } => {
            let inner = if target == x { 0 } else { count_free(body, x) };
            inner + count_free(arg, x)
        }
        Term::App { fun, arg, .. } => count_free(fun, x) + count_free(arg, x),
    }
}

/// Renames the free occurrences of `x` in left-to-right order to `fresh`.
fn rename_occurrences<L>(t: &mut Term<L>, x: &str, fresh: &mut std::slice::Iter<'_, Name>) {
    match t {
        Term::Var { name, .. } => {
            if name == x {
                *name = fresh.next().expect("occurrence count").clone();
            }
        }
        Term::Abs { binder, body, .. } => {
            if binder != x {
                rename_occurrences(body, x, fresh);
            }
        }
        Term::App { fun, arg, .. } => {
            rename_occurrences(fun, x, fresh);
            rename_occurrences(arg, x, fresh);
        }
        // Compiled terms only contain copies and erasures of their own
        // binders, never of an enclosing one, so `x` is not a source here.
        Term::Erase { body, .. } => rename_occurrences(body, x, fresh),
        Term::Copy { left, right, body, .. } => {
            if left != x && right != x {
                rename_occurrences(body, x, fresh);
            }
        }
        Term::Subst { body, arg, target } => {
            if target != x {
                rename_occurrences(body, x, fresh);
            }
            rename_occurrences(arg, x, fresh);
        }
    }
}

/// Makes `x` occur exactly once in `body` (or records it as erased).
fn linearise(x: &str, mut body: CTerm, fresh: &mut FreshSupply) -> CTerm {
    match count_free(&body, x) {
        0 => Term::erase(x, body),
        1 => body,
        n => {
            let copies: Vec<Name> = (0..n).map(|_| fresh.variant(x)).collect();
            rename_occurrences(&mut body, x, &mut copies.iter());
            // δ_x^{x1,c1}.δ_{c1}^{x2,c2}. … .δ_{c(n-2)}^{x(n-1),xn}
            let links: Vec<Name> = (0..n - 2).map(|_| fresh.variant(x)).collect();
            let mut sources = vec![x.to_string()];
            sources.extend(links.iter().cloned());
            let mut term = body;
            for i in (0..n - 1).rev() {
                let right = if i == n - 2 { copies[n - 1].clone() } else { links[i].clone() };
                term = Term::copy(&sources[i], &copies[i], &right, term);
            }
            term
        }
    }
}

fn compile_rec(term: &LambdaTerm, fresh: &mut FreshSupply) -> CTerm {
    match term {
        LambdaTerm::Var(x) => CTerm::var(x),
        LambdaTerm::App(f, a) => CTerm::app(compile_rec(f, fresh), compile_rec(a, fresh)),
        LambdaTerm::Abs(x, body) => {
            let body = compile_rec(body, fresh);
            CTerm::abs(x, linearise(x, body, fresh))
        }
    }
}

/// Compiles a λ-term into a linear λc-term. Duplicated variables get a
/// left-leaning chain of copies right under their binder; unused ones an
/// erasure. Free variables of the input occurring more than once are copied
/// at the root, in identifier order.
pub fn compile(term: &LambdaTerm, mut fresh: FreshSupply) -> (CTerm, FreshSupply) {
    for n in term.names() {
        fresh.reserve(&n);
    }
    let mut out = compile_rec(term, &mut fresh);
    for x in term.free_vars().iter().rev() {
        if count_free(&out, x) > 1 {
            out = linearise(x, out, &mut fresh);
        }
    }
    (out, fresh)
}

/// Forgets copies, erasures and explicit substitutions (substitutions are
/// carried out as meta-substitution), recovering an ordinary λ-term.
pub fn decompile<L>(term: &Term<L>) -> LambdaTerm {
    fn go<L>(t: &Term<L>, env: &BTreeMap<Name, Vec<LambdaTerm>>) -> LambdaTerm {
        match t {
            Term::Var { name, .. } => match env.get(name).and_then(|v| v.last()) {
                Some(replacement) => replacement.clone(),
                None => LambdaTerm::Var(name.clone()),
            },
            Term::Abs { binder, body, .. } => {
                let mut env = env.clone();
                env.remove(binder);
                LambdaTerm::abs(binder, go(body, &env))
            }
            Term::App { fun, arg, .. } => LambdaTerm::app(go(fun, env), go(arg, env)),
            Term::Erase { body, .. } => go(body, env),
            Term::Copy { source, left, right, body } => {
                let image = go(&Term::<()>::Var { name: source.clone(), label: () }, env);
                let mut env = env.clone();
                env.insert(left.clone(), vec![image.clone()]);
                env.insert(right.clone(), vec![image]);
                go(body, &env)
            }
            Term::Subst { body, arg, target } => {
                let image = go(arg, env);
                let mut env = env.clone();
                env.insert(target.clone(), vec![image]);
                go(body, &env)
            }
        }
    }
    go(term, &BTreeMap::new())
}

/// α-equivalence of λ-terms.
pub fn alpha_eq(a: &LambdaTerm, b: &LambdaTerm) -> bool {
    fn go<'a>(a: &'a LambdaTerm, b: &'a LambdaTerm, env: &mut Vec<(&'a str, &'a str)>) -> bool {
        match (a, b) {
            (LambdaTerm::Var(x), LambdaTerm::Var(y)) => {
                for &(bx, by) in env.iter().rev() {
                    if bx == x || by == y {
                        return bx == x && by == y;
                    }
                }
                x == y
            }
            (LambdaTerm::Abs(x, m), LambdaTerm::Abs(y, n)) => {
                env.push((x, y));
                let r = go(m, n, env);
                env.pop();
                r
            }
            (LambdaTerm::App(f, a), LambdaTerm::App(g, b)) => go(f, g, env) && go(a, b, env),
            _ => false,
        }
    }
    go(a, b, &mut Vec::new())
}

// ---------------------------------------------------------------------------
// Printing
// ---------------------------------------------------------------------------

/// How an annotation is rendered after its node.
pub trait Annotation {
    fn suffix(&self) -> Option<String>;
}

impl Annotation for () {
    fn suffix(&self) -> Option<String> {
        None
    }
}

impl Annotation for Option<String> {
    fn suffix(&self) -> Option<String> {
        self.clone()
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Prec {
    Top,
    AppFun,
    Atom,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Style {
    Ascii,
    Math,
}

fn math_name(name: &str) -> String {
    let root = name.trim_end_matches('\'');
    let primes = name.len() - root.len();
    let tail = match primes {
        0 => String::new(),
        1 => "′".into(),
        2 => "″".into(),
        3 => "‴".into(),
        n => "′".repeat(n),
    };
    format!("{root}{tail}")
}

fn render<L: Annotation>(t: &Term<L>, prec: Prec, style: Style, out: &mut String) {
    let name = |n: &str| match style {
        Style::Ascii => n.to_string(),
        Style::Math => math_name(n),
    };
    let suffix = |l: &L| l.suffix().map(|s| format!("^{{{s}}}"));
    match t {
        Term::Var { name: x, label } => {
            out.push_str(&name(x));
            if let Some(s) = suffix(label) {
                out.push_str(&s);
            }
        }
        Term::Abs { binder, body, label } => {
            let labelled = suffix(label);
            let paren = labelled.is_some() || prec > Prec::Top;
            if paren {
                out.push('(');
            }
            out.push_str(if style == Style::Ascii { "\\" } else { "λ" });
            out.push_str(&name(binder));
            out.push('.');
            render(body, Prec::Top, style, out);
            if paren {
                out.push(')');
            }
            if let Some(s) = labelled {
                out.push_str(&s);
            }
        }
        Term::App { fun, arg, label } => {
            let labelled = suffix(label);
            let paren = labelled.is_some() || prec == Prec::Atom;
            if paren {
                out.push('(');
            }
            render(fun, Prec::AppFun, style, out);
            if style == Style::Ascii {
                out.push(' ');
            }
            render(arg, Prec::Atom, style, out);
            if paren {
                out.push(')');
            }
            if let Some(s) = labelled {
                out.push_str(&s);
            }
        }
        Term::Erase { binder, body } => {
            if prec > Prec::Top {
                out.push('(');
            }
            match style {
                Style::Ascii => out.push_str(&format!("eps[{}].", name(binder))),
                Style::Math => out.push_str(&format!("ε_{}.", name(binder))),
            }
            render(body, Prec::Top, style, out);
            if prec > Prec::Top {
                out.push(')');
            }
        }
        Term::Copy { source, left, right, body } => {
            if prec > Prec::Top {
                out.push('(');
            }
            match style {
                Style::Ascii => out.push_str(&format!(
                    "copy[{}->{},{}].",
                    name(source),
                    name(left),
                    name(right)
                )),
                Style::Math => out.push_str(&format!(
                    "δ_{}^{{{},{}}}.",
                    name(source),
                    name(left),
                    name(right)
                )),
            }
            render(body, Prec::Top, style, out);
            if prec > Prec::Top {
                out.push(')');
            }
        }
        Term::Subst { body, arg, target } => {
            render(body, Prec::Atom, style, out);
            out.push('[');
            render(arg, Prec::Top, style, out);
            out.push('/');
            out.push_str(&name(target));
            out.push(']');
        }
    }
}

impl<L: Annotation> Term<L> {
    /// Mathematical rendering (`λ`, `ε_x.`, `δ_x^{y,z}.`, juxtaposition).
    pub fn to_math(&self) -> String {
        let mut s = String::new();
        render(self, Prec::Top, Style::Math, &mut s);
        s
    }
}

impl<L: Annotation> fmt::Display for Term<L> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        render(self, Prec::Top, Style::Ascii, &mut s);
        f.write_str(&s)
    }
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

/// A parsed term whose annotations are still raw `^{...}` texts with their
/// offsets.
pub type RawTerm = Term<Option<(String, usize)>>;

struct Parser<'a> {
    chars: Vec<char>,
    pos: usize,
    _src: &'a str,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Parser { chars: src.chars().collect(), pos: 0, _src: src }
    }

    fn skip_ws(&mut self) {
        while self.chars.get(self.pos).is_some_and(|c| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn looking_at(&mut self, s: &str) -> bool {
        self.skip_ws();
        let mut i = self.pos;
        for c in s.chars() {
            if self.chars.get(i) != Some(&c) {
                return false;
            }
            i += 1;
        }
        true
    }

    fn expect(&mut self, s: &str) -> Result<(), ParseError> {
        if self.looking_at(s) {
            self.pos += s.chars().count();
            Ok(())
        } else {
            Err(ParseError::new(self.pos, format!("expected `{s}`")))
        }
    }

    fn is_ident_start(c: char) -> bool {
        c.is_alphabetic() && c != 'λ' || c == '_'
    }

    fn is_ident_char(c: char) -> bool {
        c.is_alphanumeric() && c != 'λ' || c == '_' || c == '\''
    }

    fn ident(&mut self) -> Result<Name, ParseError> {
        self.skip_ws();
        let start = self.pos;
        match self.chars.get(self.pos) {
            Some(&c) if Self::is_ident_start(c) => {}
            _ => return Err(ParseError::new(start, "expected identifier")),
        }
        while self.chars.get(self.pos).is_some_and(|&c| Self::is_ident_char(c)) {
            self.pos += 1;
        }
        Ok(self.chars[start..self.pos].iter().collect())
    }

    fn at_keyword(&mut self, kw: &str) -> bool {
        if !self.looking_at(kw) {
            return false;
        }
        let mut i = self.pos + kw.chars().count();
        while self.chars.get(i).is_some_and(|c| c.is_whitespace()) {
            i += 1;
        }
        self.chars.get(i) == Some(&'[')
    }

    fn at_binder(&mut self) -> bool {
        matches!(self.peek(), Some('\\') | Some('λ')) || self.at_keyword("eps") || self.at_keyword("copy")
    }

    fn term(&mut self) -> Result<RawTerm, ParseError> {
        if self.at_binder() {
            return self.binder();
        }
        let mut acc = self.postfix()?;
        loop {
            if self.at_binder() {
                let arg = self.binder()?;
                return Ok(Term::App { fun: Box::new(acc), arg: Box::new(arg), label: None });
            }
            match self.peek() {
                Some(c) if c == '(' || Self::is_ident_start(c) => {
                    let arg = self.postfix()?;
                    acc = Term::App { fun: Box::new(acc), arg: Box::new(arg), label: None };
                }
                _ => return Ok(acc),
            }
        }
    }

    fn binder(&mut self) -> Result<RawTerm, ParseError> {
        if matches!(self.peek(), Some('\\') | Some('λ')) {
            self.pos += 1;
            let mut binders = vec![self.ident()?];
            while self.peek().is_some_and(Self::is_ident_start) {
                binders.push(self.ident()?);
            }
            self.expect(".")?;
            let mut body = self.term()?;
            for b in binders.into_iter().rev() {
                body = Term::Abs { binder: b, body: Box::new(body), label: None };
            }
            return Ok(body);
        }
        if self.at_keyword("eps") {
            self.expect("eps")?;
            self.expect("[")?;
            let x = self.ident()?;
            self.expect("]")?;
            self.expect(".")?;
            let body = self.term()?;
            return Ok(Term::Erase { binder: x, body: Box::new(body) });
        }
        self.expect("copy")?;
        self.expect("[")?;
        let source = self.ident()?;
        self.expect("->")?;
        let left = self.ident()?;
        self.expect(",")?;
        let right = self.ident()?;
        self.expect("]")?;
        self.expect(".")?;
        let body = self.term()?;
        Ok(Term::Copy { source, left, right, body: Box::new(body) })
    }

    fn primary(&mut self) -> Result<RawTerm, ParseError> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let t = self.term()?;
                self.expect(")")?;
                Ok(t)
            }
            Some(c) if Self::is_ident_start(c) => {
                let name = self.ident()?;
                Ok(Term::Var { name, label: None })
            }
            Some(c) => Err(ParseError::new(self.pos, format!("unexpected `{c}`"))),
            None => Err(ParseError::new(self.pos, "unexpected end of input")),
        }
    }

    fn postfix(&mut self) -> Result<RawTerm, ParseError> {
        let mut t = self.primary()?;
        loop {
            if self.looking_at("^{") {
                let start = self.pos;
                self.pos += 2;
                let text_start = self.pos;
                while self.chars.get(self.pos).is_some_and(|&c| c != '}') {
                    self.pos += 1;
                }
                if self.pos >= self.chars.len() {
                    return Err(ParseError::new(start, "unterminated label"));
                }
                let text: String = self.chars[text_start..self.pos].iter().collect();
                self.pos += 1;
                match &mut t {
                    Term::Var { label, .. } | Term::Abs { label, .. } | Term::App { label, .. } => {
                        if label.is_some() {
                            return Err(ParseError::new(start, "node already labelled"));
                        }
                        *label = Some((text, text_start));
                    }
                    _ => {
                        return Err(ParseError::new(
                            start,
                            "only variables, abstractions and applications carry labels",
                        ))
                    }
                }
            } else if self.peek() == Some('[') {
                self.pos += 1;
                let arg = self.term()?;
                self.expect("/")?;
                let target = self.ident()?;
                self.expect("]")?;
                t = Term::Subst { body: Box::new(t), arg: Box::new(arg), target };
            } else {
                return Ok(t);
            }
        }
    }
}

/// Parses the concrete λc grammar, keeping any `^{...}` annotations raw.
pub fn parse_raw(text: &str) -> Result<RawTerm, ParseError> {
    let mut p = Parser::new(text);
    let t = p.term()?;
    p.skip_ws();
    if p.pos != p.chars.len() {
        return Err(ParseError::new(p.pos, "trailing input"));
    }
    Ok(t)
}

/// Parses an unlabelled λc-term: `\x.M`, `M N`, `eps[x].M`,
/// `copy[x->y,z].M` and `M[N/x]`.
pub fn parse_cterm(text: &str) -> Result<CTerm, ParseError> {
    let raw = parse_raw(text)?;
    let mut err = None;
    let t = raw.map_labels(&mut |l| {
        if let Some((_, pos)) = l {
            err.get_or_insert(ParseError::new(*pos, "unexpected label on unlabelled term"));
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(t),
    }
}

/// Parses a plain λ-term (`\x.M`, juxtaposition; `λ` is also accepted).
pub fn parse_lambda(text: &str) -> Result<LambdaTerm, ParseError> {
    fn convert(t: &RawTerm) -> Result<LambdaTerm, ParseError> {
        if let Some(Some((_, pos))) = t.annotation() {
            return Err(ParseError::new(*pos, "labels are not part of plain λ-terms"));
        }
        match t {
            Term::Var { name, .. } => Ok(LambdaTerm::Var(name.clone())),
            Term::Abs { binder, body, .. } => Ok(LambdaTerm::abs(binder, convert(body)?)),
            Term::App { fun, arg, .. } => Ok(LambdaTerm::app(convert(fun)?, convert(arg)?)),
            _ => Err(ParseError::new(0, "copy, erase and substitution are not λ-term syntax")),
        }
    }
    convert(&parse_raw(text)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_identity_and_k() {
        assert_eq!(parse_lambda("\\x.x").unwrap(), LambdaTerm::abs("x", LambdaTerm::var("x")));
        assert_eq!(
            parse_lambda("\\x.\\y.x").unwrap(),
            LambdaTerm::abs("x", LambdaTerm::abs("y", LambdaTerm::var("x")))
        );
    }

    #[test]
    fn parse_self_application_example() {
        let t = parse_lambda("(\\x.x x)(\\x.x z)").unwrap();
        let expected = LambdaTerm::app(
            LambdaTerm::abs("x", LambdaTerm::app(LambdaTerm::var("x"), LambdaTerm::var("x"))),
            LambdaTerm::abs("x", LambdaTerm::app(LambdaTerm::var("x"), LambdaTerm::var("z"))),
        );
        assert_eq!(t, expected);
    }

    #[test]
    fn application_is_left_associative() {
        let t = parse_lambda("a b c").unwrap();
        let expected = LambdaTerm::app(
            LambdaTerm::app(LambdaTerm::var("a"), LambdaTerm::var("b")),
            LambdaTerm::var("c"),
        );
        assert_eq!(t, expected);
        assert_eq!(parse_lambda("λx y.x").unwrap(), parse_lambda("\\x.\\y.x").unwrap());
    }

    #[test]
    fn syntax_errors_carry_offsets() {
        let e = parse_lambda("\\x x").unwrap_err();
        assert_eq!(e.pos, 4);
        assert!(parse_lambda("(x").is_err());
        assert_eq!(parse_lambda("x )").unwrap_err().pos, 2);
    }

    #[test]
    fn free_vars_follow_the_table() {
        assert_eq!(CTerm::var("x").free_vars(), BTreeSet::from(["x".to_string()]));
        let e: CTerm = Term::erase("y", CTerm::var("x"));
        assert_eq!(e.free_vars(), BTreeSet::from(["x".to_string(), "y".to_string()]));
        assert!(CTerm::abs("x", CTerm::var("x")).free_vars().is_empty());
        let c: CTerm = Term::copy("x", "y", "z", CTerm::app(CTerm::var("y"), CTerm::var("z")));
        assert_eq!(c.free_vars(), BTreeSet::from(["x".to_string()]));
        assert!(c.has_free("x") && !c.has_free("y"));
    }

    #[test]
    fn compile_examples() {
        let k = parse_lambda("\\x.\\y.x").unwrap();
        let (c, _) = compile(&k, FreshSupply::new());
        assert_eq!(c.to_string(), "\\x.\\y.eps[y].x");
        assert_eq!(c.to_math(), "λx.λy.ε_y.x");

        let t = parse_lambda("(\\x.x x)(\\x.x z)").unwrap();
        let (c, _) = compile(&t, FreshSupply::new());
        assert_eq!(c.to_math(), "(λx.δ_x^{x′,x″}.x′x″)(λx.xz)");
        assert_eq!(c.to_string(), "(\\x.copy[x->x',x''].x' x'') (\\x.x z)");

        let i = parse_lambda("\\x.x").unwrap();
        assert_eq!(compile(&i, FreshSupply::new()).0, CTerm::abs("x", CTerm::var("x")));
    }

    #[test]
    fn compile_triple_occurrence_chain() {
        let t = parse_lambda("\\x.x x x").unwrap();
        let (c, _) = compile(&t, FreshSupply::new());
        assert_eq!(c.to_string(), "\\x.copy[x->x',x''''].copy[x''''->x'',x'''].x' x'' x'''");
        assert!(check_linear(&c).is_empty());
    }

    #[test]
    fn compile_open_duplicates_at_root() {
        let t = parse_lambda("y y").unwrap();
        let (c, _) = compile(&t, FreshSupply::new());
        assert!(check_linear(&c).is_empty());
        assert_eq!(c.free_vars(), t.free_vars());
    }

    #[test]
    fn compile_round_trips_through_decompile() {
        for src in ["\\x.\\y.x", "(\\x.x x)(\\x.x z)", "\\f.\\x.f (f x)", "\\x.\\x.x"] {
            let t = parse_lambda(src).unwrap();
            let (c, _) = compile(&t, FreshSupply::new());
            assert!(alpha_eq(&decompile(&c), &t), "{src}");
        }
    }

    #[test]
    fn linear_violations() {
        let ok = compile(&parse_lambda("\\x.\\y.x").unwrap(), FreshSupply::new()).0;
        assert!(check_linear(&ok).is_empty());
        let bad = CTerm::app(CTerm::var("x"), CTerm::var("x"));
        let v = check_linear(&bad);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].position, Vec::<usize>::new());
        let bad: CTerm = Term::copy("x", "y", "y", CTerm::var("y"));
        assert!(check_linear(&bad).iter().any(|v| v.message.contains("coincide")));
    }

    #[test]
    fn print_parse_round_trip() {
        for src in [
            "\\x.copy[x->x',x''].x' x''",
            "(x y)[\\z.z/x]",
            "\\x.eps[x].\\y.y",
            "x[y[\\u.u/y]/x]",
            "(\\x.x) (\\y.y) (\\z.z)",
            "x (y z)",
        ] {
            let t = parse_cterm(src).unwrap();
            assert_eq!(parse_cterm(&t.to_string()).unwrap(), t, "{src}");
        }
    }

    #[test]
    fn fresh_supply_skips_used() {
        let mut s = FreshSupply::avoiding(["x'".to_string(), "a".to_string()]);
        assert_eq!(s.variant("x"), "x''");
        assert_eq!(s.atom(), "a");
        s.counter = 27;
        assert_eq!(s.atom(), "b1");
    }
}
