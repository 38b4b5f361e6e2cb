//! Lévy's labelled λ-calculus with meta-level substitution. Serves as the
//! reference the explicit-substitution calculi are compared against.
//!
//! Terms are [`LabelledTerm`]s restricted to variables, abstractions and
//! applications.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use thiserror::Error;

use crate::label::{bullet, Label, LabelledTerm};
use crate::term::{FreshSupply, Name, Position, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LevyError {
    #[error("no β-redex at position {0:?}")]
    NoRedexAtPosition(Position),
    #[error("term contains copy, erase or substitution constructs")]
    NotPlain,
    #[error("reduction did not finish within {0} steps")]
    FuelExhausted(usize),
}

fn is_plain(t: &LabelledTerm) -> bool {
    match t {
        Term::Var { .. } => true,
        Term::Abs { body, .. } => is_plain(body),
        Term::App { fun, arg, .. } => is_plain(fun) && is_plain(arg),
        _ => false,
    }
}

/// Capture-avoiding `m[n/x]`. `x^α[N/x] = α • N`; other clauses push the
/// substitution through and keep labels.
pub fn meta_subst(m: &LabelledTerm, x: &str, n: &LabelledTerm) -> LabelledTerm {
    let fv_n = n.free_vars();
    let mut supply = FreshSupply::avoiding(m.names().into_iter().chain(n.names()));
    subst_rec(m, x, n, &fv_n, &mut supply)
}

fn subst_rec(
    m: &LabelledTerm,
    x: &str,
    n: &LabelledTerm,
    fv_n: &BTreeSet<Name>,
    supply: &mut FreshSupply,
) -> LabelledTerm {
    match m {
        Term::Var { name, label } => {
            if name == x {
                bullet(label, n)
            } else {
                m.clone()
            }
        }
        Term::App { fun, arg, label } => Term::App {
            fun: Box::new(subst_rec(fun, x, n, fv_n, supply)),
            arg: Box::new(subst_rec(arg, x, n, fv_n, supply)),
            label: label.clone(),
        },
        Term::Abs { binder, body, label } => {
            if binder == x || !body.has_free(x) {
                return m.clone();
            }
            if fv_n.contains(binder) {
                let fresh = supply.variant(binder);
                let renamed = rename(body, binder, &fresh);
                Term::Abs {
                    binder: fresh,
                    body: Box::new(subst_rec(&renamed, x, n, fv_n, supply)),
                    label: label.clone(),
                }
            } else {
                Term::Abs {
                    binder: binder.clone(),
                    body: Box::new(subst_rec(body, x, n, fv_n, supply)),
                    label: label.clone(),
                }
            }
        }
        _ => m.clone(),
    }
}

fn rename(t: &LabelledTerm, from: &str, to: &str) -> LabelledTerm {
    match t {
        Term::Var { name, label } if name == from => Term::Var { name: to.into(), label: label.clone() },
        Term::Var { .. } => t.clone(),
        Term::App { fun, arg, label } => Term::App {
            fun: Box::new(rename(fun, from, to)),
            arg: Box::new(rename(arg, from, to)),
            label: label.clone(),
        },
        Term::Abs { binder, body, label } => {
            if binder == from {
                t.clone()
            } else {
                Term::Abs { binder: binder.clone(), body: Box::new(rename(body, from, to)), label: label.clone() }
            }
        }
        _ => t.clone(),
    }
}

/// Positions of all β-redexes, in preorder.
pub fn redexes(term: &LabelledTerm) -> Vec<Position> {
    term.positions()
        .into_iter()
        .filter(|p| {
            matches!(term.subterm(p), Some(Term::App { fun, .. }) if matches!(**fun, Term::Abs { .. }))
        })
        .collect()
}

/// `((λx.M)^α N)^β → β·ᾱ • M[α̲ • N/x]` at `pos`.
pub fn levy_step(term: &LabelledTerm, pos: &[usize]) -> Result<LabelledTerm, LevyError> {
    if !is_plain(term) {
        return Err(LevyError::NotPlain);
    }
    let redex = term.subterm(pos).ok_or_else(|| LevyError::NoRedexAtPosition(pos.to_vec()))?;
    let (binder, body, alpha, arg, beta) = match redex {
        Term::App { fun, arg, label: beta } => match &**fun {
            Term::Abs { binder, body, label: alpha } => (binder, body, alpha, arg, beta),
            _ => return Err(LevyError::NoRedexAtPosition(pos.to_vec())),
        },
        _ => return Err(LevyError::NoRedexAtPosition(pos.to_vec())),
    };
    let arg = bullet(&Label::new(vec![alpha.clone().under()]), arg);
    let contracted = meta_subst(body, binder, &arg);
    let prefix = beta.clone().push(alpha.clone().over());
    let result = bullet(&prefix, &contracted);
    let mut out = term.clone();
    *out.subterm_mut(pos).expect("position checked") = result;
    Ok(out)
}

/// Leftmost-outermost reduction to normal form.
pub fn normalize(term: &LabelledTerm, fuel: usize) -> Result<(LabelledTerm, usize), LevyError> {
    let mut t = term.clone();
    for steps in 0..=fuel {
        match redexes(&t).first() {
            None => return Ok((t, steps)),
            Some(p) => {
                if steps == fuel {
                    break;
                }
                t = levy_step(&t, &p.clone())?;
            }
        }
    }
    Err(LevyError::FuelExhausted(fuel))
}

/// Renames bound variables to `v0, v1, …` by binding depth so that
/// α-equivalent terms become equal.
pub fn canonical(term: &LabelledTerm) -> LabelledTerm {
    fn go(t: &LabelledTerm, env: &BTreeMap<Name, Name>, depth: usize) -> LabelledTerm {
        match t {
            Term::Var { name, label } => Term::Var {
                name: env.get(name).cloned().unwrap_or_else(|| name.clone()),
                label: label.clone(),
            },
            Term::Abs { binder, body, label } => {
                let mut env = env.clone();
                let fresh = format!("v{depth}");
                env.insert(binder.clone(), fresh.clone());
                Term::Abs { binder: fresh, body: Box::new(go(body, &env, depth + 1)), label: label.clone() }
            }
            Term::App { fun, arg, label } => Term::App {
                fun: Box::new(go(fun, env, depth)),
                arg: Box::new(go(arg, env, depth)),
                label: label.clone(),
            },
            other => other.clone(),
        }
    }
    go(term, &BTreeMap::new(), 0)
}

/// Result of exploring every reduction sequence from a term.
#[derive(Debug, Clone)]
pub struct Exploration {
    pub states: usize,
    /// Normal forms reached, up to α-equivalence.
    pub normal_forms: BTreeSet<LabelledTerm>,
    pub exhausted: bool,
}

/// Breadth-first search over all reducts, visiting at most `fuel` distinct
/// terms.
pub fn explore(term: &LabelledTerm, fuel: usize) -> Result<Exploration, LevyError> {
    let start = canonical(term);
    let mut seen = BTreeSet::from([start.clone()]);
    let mut queue = VecDeque::from([start]);
    let mut normal_forms = BTreeSet::new();
    let mut exhausted = false;
    while let Some(t) = queue.pop_front() {
        let sites = redexes(&t);
        if sites.is_empty() {
            normal_forms.insert(t);
            continue;
        }
        for p in sites {
            let next = canonical(&levy_step(&t, &p)?);
            if seen.contains(&next) {
                continue;
            }
            if seen.len() >= fuel {
                exhausted = true;
                continue;
            }
            seen.insert(next.clone());
            queue.push_back(next);
        }
    }
    Ok(Exploration { states: seen.len(), normal_forms, exhausted })
}
