//! The two labelled closed-reduction calculi: closed functions (lcf) and
//! closed arguments (lca). Both act on configurations `(M, B)` where `B`
//! collects the terms thrown away by erasure.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::label::{bullet, label_of, reverse, Atom, Label, LabelledTerm, Mark};
use crate::term::{Position, Term};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Calculus {
    Lcf,
    Lca,
}

impl fmt::Display for Calculus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Calculus::Lcf => "lcf",
            Calculus::Lca => "lca",
        })
    }
}

impl FromStr for Calculus {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "lcf" => Ok(Calculus::Lcf),
            "lca" => Ok(Calculus::Lca),
            _ => Err(format!("unknown calculus `{s}` (expected lcf or lca)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Rule {
    Beta,
    Lam,
    App1,
    App2,
    Cpy1,
    Cpy2,
    Ers1,
    Ers2,
    Var,
    Cmp,
}

impl Rule {
    pub const ALL: [Rule; 10] = [
        Rule::Beta,
        Rule::Lam,
        Rule::App1,
        Rule::App2,
        Rule::Cpy1,
        Rule::Cpy2,
        Rule::Ers1,
        Rule::Ers2,
        Rule::Var,
        Rule::Cmp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Rule::Beta => "Beta",
            Rule::Lam => "Lam",
            Rule::App1 => "App1",
            Rule::App2 => "App2",
            Rule::Cpy1 => "Cpy1",
            Rule::Cpy2 => "Cpy2",
            Rule::Ers1 => "Ers1",
            Rule::Ers2 => "Ers2",
            Rule::Var => "Var",
            Rule::Cmp => "Cmp",
        }
    }

    pub fn is_sigma(self) -> bool {
        self != Rule::Beta
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RedexSite {
    pub position: Position,
    pub rule: Rule,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Configuration {
    pub term: LabelledTerm,
    pub erased: BTreeSet<LabelledTerm>,
}

impl Configuration {
    pub fn new(term: LabelledTerm) -> Self {
        Configuration { term, erased: BTreeSet::new() }
    }

    pub fn erased_labels(&self) -> Vec<String> {
        self.erased.iter().map(|t| label_of(t).to_string()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RewriteError {
    #[error("no subterm at position {0:?}")]
    NoSuchPosition(Position),
    #[error("{rule} does not match at {position:?}")]
    PatternMismatch { rule: Rule, position: Position },
    #[error("side condition of {rule} fails at {position:?}")]
    SideConditionViolated { rule: Rule, position: Position },
    #[error("{rule} is not a rule of {calculus}")]
    NotInCalculus { rule: Rule, calculus: Calculus },
    #[error("no normal form within {0} steps")]
    FuelExhausted(usize),
}

fn marker(mark: Mark) -> Label {
    Label::new(vec![Atom::right(mark)])
}

/// `→D·α·←!`, the block the lcf Beta rule wraps around the function label.
fn lcf_beta_block(alpha: &Label) -> Label {
    Label::new(vec![Atom::right(Mark::D)]).concat(alpha).push(Atom::left(Mark::Bang))
}

/// Which rule's left-hand side matches at this node, ignoring side
/// conditions on closedness.
fn shape(term: &LabelledTerm, calculus: Calculus) -> Option<Rule> {
    match term {
        Term::App { fun, .. } => matches!(**fun, Term::Abs { .. }).then_some(Rule::Beta),
        Term::Subst { body, target: x, .. } => match &**body {
            Term::Var { name, .. } => (name == x).then_some(Rule::Var),
            Term::Abs { .. } => Some(Rule::Lam),
            Term::App { fun, arg, .. } => {
                if fun.has_free(x) {
                    Some(Rule::App1)
                } else if arg.has_free(x) {
                    Some(Rule::App2)
                } else {
                    None
                }
            }
            Term::Copy { source, .. } => Some(if source == x { Rule::Cpy1 } else { Rule::Cpy2 }),
            Term::Erase { binder, .. } => Some(if binder == x { Rule::Ers1 } else { Rule::Ers2 }),
            Term::Subst { arg: p, .. } => {
                (calculus == Calculus::Lcf && p.has_free(x)).then_some(Rule::Cmp)
            }
        },
        _ => None,
    }
}

fn side_condition(term: &LabelledTerm, rule: Rule, calculus: Calculus) -> bool {
    match (calculus, rule, term) {
        (Calculus::Lcf, Rule::Beta, Term::App { fun, .. }) => fun.is_closed(),
        (Calculus::Lca, Rule::Beta, Term::App { arg, .. }) => arg.is_closed(),
        (Calculus::Lcf, Rule::Lam | Rule::Cpy1 | Rule::Ers1, Term::Subst { arg, .. }) => {
            arg.is_closed()
        }
        _ => true,
    }
}

/// Rewrites the node at the site, which must match the rule.
fn contract(
    node: &LabelledTerm,
    rule: Rule,
    calculus: Calculus,
    erased: &mut BTreeSet<LabelledTerm>,
) -> Option<LabelledTerm> {
    if rule == Rule::Beta {
        let Term::App { fun, arg: n, label: beta } = node else { return None };
        let Term::Abs { binder, body, label: alpha } = &**fun else { return None };
        let (outer, inner) = match calculus {
            Calculus::Lcf => {
                let block = lcf_beta_block(alpha);
                (
                    beta.clone().push(block.clone().over()),
                    Label::new(vec![reverse(&block).under()]),
                )
            }
            Calculus::Lca => (
                beta.clone().push(alpha.clone().over()),
                Label::new(vec![reverse(alpha).under(), Atom::left(Mark::Bang)]),
            ),
        };
        let s = Term::Subst { body: body.clone(), arg: Box::new(bullet(&inner, n)), target: binder.clone() };
        return Some(bullet(&outer, &s));
    }
    let Term::Subst { body, arg: n, target: x } = node else { return None };
    let subst = |m: &LabelledTerm, n: LabelledTerm, x: &str| Term::subst(m.clone(), n, x);
    let quest = marker(Mark::Quest);
    Some(match (rule, &**body) {
        (Rule::Var, Term::Var { label: alpha, .. }) => match calculus {
            Calculus::Lcf => bullet(alpha, n),
            Calculus::Lca => bullet(&alpha.clone().push(Atom::right(Mark::D)), n),
        },
        (Rule::Lam, Term::Abs { binder, body: m, label }) => {
            let n = match calculus {
                Calculus::Lcf => bullet(&quest, n),
                Calculus::Lca => (**n).clone(),
            };
            Term::Abs { binder: binder.clone(), body: Box::new(subst(m, n, x)), label: label.clone() }
        }
        (Rule::App1, Term::App { fun, arg, label }) => Term::App {
            fun: Box::new(subst(fun, (**n).clone(), x)),
            arg: arg.clone(),
            label: label.clone(),
        },
        (Rule::App2, Term::App { fun, arg, label }) => {
            let n = match calculus {
                Calculus::Lcf => (**n).clone(),
                Calculus::Lca => bullet(&quest, n),
            };
            Term::App { fun: fun.clone(), arg: Box::new(subst(arg, n, x)), label: label.clone() }
        }
        (Rule::Cpy1, Term::Copy { left, right, body: m, .. }) => {
            let inner = subst(m, bullet(&marker(Mark::R), n), left);
            Term::subst(inner, bullet(&marker(Mark::S), n), right)
        }
        (Rule::Cpy2, Term::Copy { source, left, right, body: m }) => Term::Copy {
            source: source.clone(),
            left: left.clone(),
            right: right.clone(),
            body: Box::new(subst(m, (**n).clone(), x)),
        },
        (Rule::Ers1, Term::Erase { body: m, .. }) => {
            erased.insert(bullet(&marker(Mark::W), n));
            (**m).clone()
        }
        (Rule::Ers2, Term::Erase { binder, body: m }) => {
            Term::Erase { binder: binder.clone(), body: Box::new(subst(m, (**n).clone(), x)) }
        }
        (Rule::Cmp, Term::Subst { body: m, arg: p, target: y }) => {
            Term::subst((**m).clone(), subst(p, (**n).clone(), x), y)
        }
        _ => return None,
    })
}

/// All redex sites, ordered by position (preorder, which is lexicographic)
/// and then by rule name.
pub fn find_redexes(config: &Configuration, calculus: Calculus) -> Vec<RedexSite> {
    let mut sites = Vec::new();
    for position in config.term.positions() {
        let node = config.term.subterm(&position).expect("enumerated position");
        if let Some(rule) = shape(node, calculus) {
            if side_condition(node, rule, calculus) {
                sites.push(RedexSite { position, rule });
            }
        }
    }
    sites.sort_by(|a, b| a.position.cmp(&b.position).then(a.rule.name().cmp(b.rule.name())));
    sites
}

/// Applies one rule at one site.
pub fn step(config: &Configuration, site: &RedexSite, calculus: Calculus) -> Result<Configuration, RewriteError> {
    if site.rule == Rule::Cmp && calculus == Calculus::Lca {
        return Err(RewriteError::NotInCalculus { rule: site.rule, calculus });
    }
    let node = config
        .term
        .subterm(&site.position)
        .ok_or_else(|| RewriteError::NoSuchPosition(site.position.clone()))?;
    let mismatch = || RewriteError::PatternMismatch { rule: site.rule, position: site.position.clone() };
    if shape(node, calculus) != Some(site.rule) {
        return Err(mismatch());
    }
    if !side_condition(node, site.rule, calculus) {
        return Err(RewriteError::SideConditionViolated { rule: site.rule, position: site.position.clone() });
    }
    let mut erased = config.erased.clone();
    let replacement = contract(node, site.rule, calculus, &mut erased).ok_or_else(mismatch)?;
    let mut term = config.term.clone();
    *term.subterm_mut(&site.position).expect("position checked") = replacement;
    Ok(Configuration { term, erased })
}

/// The lcf Beta rule at `site`.
pub fn beta_lcf(config: &Configuration, site: &RedexSite) -> Result<Configuration, RewriteError> {
    step(config, &RedexSite { position: site.position.clone(), rule: Rule::Beta }, Calculus::Lcf)
}

/// The lca Beta rule at `site`.
pub fn beta_lca(config: &Configuration, site: &RedexSite) -> Result<Configuration, RewriteError> {
    step(config, &RedexSite { position: site.position.clone(), rule: Rule::Beta }, Calculus::Lca)
}

/// Applies a σ-rule of the given calculus.
pub fn sigma_step(config: &Configuration, site: &RedexSite, calculus: Calculus) -> Result<Configuration, RewriteError> {
    if !site.rule.is_sigma() {
        return Err(RewriteError::PatternMismatch { rule: site.rule, position: site.position.clone() });
    }
    step(config, site, calculus)
}

/// Repeatedly applies the first σ-site until none is left.
pub fn normalize_sigma(config: &Configuration, calculus: Calculus, fuel: usize) -> Result<(Configuration, usize), RewriteError> {
    let mut c = config.clone();
    let mut steps = 0;
    loop {
        let site = find_redexes(&c, calculus).into_iter().find(|s| s.rule.is_sigma());
        match site {
            None => return Ok((c, steps)),
            Some(s) => {
                if steps == fuel {
                    return Err(RewriteError::FuelExhausted(fuel));
                }
                c = step(&c, &s, calculus)?;
                steps += 1;
            }
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceStep {
    pub site: RedexSite,
    pub config: Configuration,
}

/// Leftmost-outermost reduction to normal form, recording every step.
pub fn reduce(config: &Configuration, calculus: Calculus, fuel: usize) -> Result<Vec<TraceStep>, RewriteError> {
    let mut c = config.clone();
    let mut trace = Vec::new();
    while let Some(site) = find_redexes(&c, calculus).into_iter().next() {
        if trace.len() == fuel {
            return Err(RewriteError::FuelExhausted(fuel));
        }
        c = step(&c, &site, calculus)?;
        trace.push(TraceStep { site, config: c.clone() });
    }
    Ok(trace)
}

/// One JSON trace record.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct TraceRecord {
    pub step: usize,
    pub rule: String,
    pub position: Position,
    pub term_printed: String,
    pub erased_labels: Vec<String>,
    pub calculus: Calculus,
}

pub fn trace_records(trace: &[TraceStep], calculus: Calculus) -> Vec<TraceRecord> {
    trace
        .iter()
        .enumerate()
        .map(|(i, s)| TraceRecord {
            step: i + 1,
            rule: s.site.rule.name().to_string(),
            position: s.site.position.clone(),
            term_printed: s.config.term.to_string(),
            erased_labels: s.config.erased_labels(),
            calculus,
        })
        .collect()
}

/// The full reduction graph reachable from a configuration.
#[derive(Debug, Clone)]
pub struct ReductionGraph {
    pub states: Vec<Configuration>,
    /// `(from, site, to)` as indices into `states`.
    pub edges: Vec<(usize, RedexSite, usize)>,
    /// States with no outgoing step.
    pub sinks: Vec<usize>,
    /// True when the state budget ran out before the graph was complete.
    pub exhausted: bool,
}

impl ReductionGraph {
    /// Distinct normal-form terms among the sinks. The erased sets are not
    /// compared: the same discarded argument may sit in `B` at different
    /// stages of its own reduction.
    pub fn sink_terms(&self) -> BTreeSet<&LabelledTerm> {
        self.sinks.iter().map(|&i| &self.states[i].term).collect()
    }

    pub fn has_unique_sink(&self) -> bool {
        !self.exhausted && self.sink_terms().len() == 1
    }
}

/// Explores every reduction sequence, visiting at most `fuel` states.
pub fn explore(config: &Configuration, calculus: Calculus, fuel: usize) -> Result<ReductionGraph, RewriteError> {
    let mut index: BTreeMap<Configuration, usize> = BTreeMap::new();
    let mut states = vec![config.clone()];
    index.insert(config.clone(), 0);
    let mut queue = VecDeque::from([0usize]);
    let mut edges = Vec::new();
    let mut sinks = Vec::new();
    let mut exhausted = false;
    while let Some(i) = queue.pop_front() {
        let sites = find_redexes(&states[i], calculus);
        if sites.is_empty() {
            sinks.push(i);
            continue;
        }
        for site in sites {
            let next = step(&states[i], &site, calculus)?;
            let j = match index.get(&next) {
                Some(&j) => j,
                None => {
                    if states.len() >= fuel {
                        exhausted = true;
                        continue;
                    }
                    states.push(next.clone());
                    index.insert(next, states.len() - 1);
                    queue.push_back(states.len() - 1);
                    states.len() - 1
                }
            };
            edges.push((i, site, j));
        }
    }
    Ok(ReductionGraph { states, edges, sinks, exhausted })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::label::parse_labelled;
    use crate::term::check_linear;

    fn cfg(s: &str) -> Configuration {
        Configuration::new(parse_labelled(s).unwrap())
    }

    #[test]
    fn lcf_beta_and_var() {
        let c = cfg("((\\x.x^{d})^{a} (\\y.y^{e})^{b})^{c}");
        let sites = find_redexes(&c, Calculus::Lcf);
        assert_eq!(sites, vec![RedexSite { position: vec![], rule: Rule::Beta }]);
        let c1 = beta_lcf(&c, &sites[0]).unwrap();
        assert_eq!(
            c1.term,
            parse_labelled("x^{c.^(D>.a.<!).d}[(\\y.y^{e})^{_(!>.a.<D).b}/x]").unwrap()
        );
        let c2 = sigma_step(&c1, &RedexSite { position: vec![], rule: Rule::Var }, Calculus::Lcf).unwrap();
        assert_eq!(c2.term, parse_labelled("(\\y.y^{e})^{c.^(D>.a.<!).d._(!>.a.<D).b}").unwrap());
        assert_eq!(reduce(&c, Calculus::Lcf, 10).unwrap().len(), 2);
    }

    #[test]
    fn lca_beta_and_var() {
        let c = cfg("((\\x.x^{d})^{a} (\\y.y^{e})^{b})^{c}");
        let c1 = beta_lca(&c, &RedexSite { position: vec![], rule: Rule::Beta }).unwrap();
        assert_eq!(c1.term, parse_labelled("x^{c.^(a).d}[(\\y.y^{e})^{_(a).<!.b}/x]").unwrap());
        let (c2, n) = normalize_sigma(&c1, Calculus::Lca, 10).unwrap();
        assert_eq!(n, 1);
        assert_eq!(c2.term, parse_labelled("(\\y.y^{e})^{c.^(a).d.D>._(a).<!.b}").unwrap());
    }

    #[test]
    fn side_conditions() {
        let open_fun = cfg("((\\x.(x^{b} z^{c})^{d})^{a} (\\y.y^{e})^{f})^{g}");
        assert!(find_redexes(&open_fun, Calculus::Lcf).is_empty());
        let site = RedexSite { position: vec![], rule: Rule::Beta };
        assert!(matches!(beta_lcf(&open_fun, &site), Err(RewriteError::SideConditionViolated { .. })));
        assert_eq!(find_redexes(&open_fun, Calculus::Lca), vec![site.clone()]);
        let open_arg = cfg("((\\x.x^{b})^{a} z^{c})^{d}");
        assert!(matches!(beta_lca(&open_arg, &site), Err(RewriteError::SideConditionViolated { .. })));
        assert!(matches!(
            beta_lcf(&cfg("x^{a}"), &site),
            Err(RewriteError::PatternMismatch { .. })
        ));
    }

    #[test]
    fn erase_copy_and_lam_rules() {
        let c = cfg("(eps[x].y^{a})[(\\z.z^{b})^{c}/x]");
        let r = sigma_step(&c, &RedexSite { position: vec![], rule: Rule::Ers1 }, Calculus::Lcf).unwrap();
        assert_eq!(r.term, parse_labelled("y^{a}").unwrap());
        assert_eq!(r.erased_labels(), vec!["W>.c".to_string()]);

        let c = cfg("(copy[x->y,z].(y^{a} z^{b})^{c})[(\\u.u^{d})^{e}/x]");
        let r = sigma_step(&c, &RedexSite { position: vec![], rule: Rule::Cpy1 }, Calculus::Lcf).unwrap();
        assert_eq!(
            r.term,
            parse_labelled("(y^{a} z^{b})^{c}[(\\u.u^{d})^{R>.e}/y][(\\u.u^{d})^{S>.e}/z]").unwrap()
        );

        let c = cfg("(\\y.(y^{a} x^{f})^{g})^{b}[(\\u.u^{d})^{e}/x]");
        let r = sigma_step(&c, &RedexSite { position: vec![], rule: Rule::Lam }, Calculus::Lcf).unwrap();
        assert_eq!(r.term, parse_labelled("(\\y.(y^{a} x^{f})^{g}[(\\u.u^{d})^{?>.e}/x])^{b}").unwrap());
        let r = sigma_step(&c, &RedexSite { position: vec![], rule: Rule::Lam }, Calculus::Lca).unwrap();
        assert_eq!(r.term, parse_labelled("(\\y.(y^{a} x^{f})^{g}[(\\u.u^{d})^{e}/x])^{b}").unwrap());
    }

    #[test]
    fn app2_marker_only_in_lca() {
        let c = cfg("(f^{a} x^{b})^{c}[(\\u.u^{d})^{e}/x]");
        let s = RedexSite { position: vec![], rule: Rule::App2 };
        assert_eq!(find_redexes(&c, Calculus::Lcf), vec![s.clone()]);
        let r = sigma_step(&c, &s, Calculus::Lca).unwrap();
        assert_eq!(r.term, parse_labelled("(f^{a} x^{b}[(\\u.u^{d})^{?>.e}/x])^{c}").unwrap());
        let r = sigma_step(&c, &s, Calculus::Lcf).unwrap();
        assert_eq!(r.term, parse_labelled("(f^{a} x^{b}[(\\u.u^{d})^{e}/x])^{c}").unwrap());
    }

    #[test]
    fn cmp_only_in_lcf() {
        let c = cfg("y^{a}[x^{b}/y][(\\u.u^{c})^{d}/x]");
        let sites = find_redexes(&c, Calculus::Lcf);
        assert!(sites.contains(&RedexSite { position: vec![], rule: Rule::Cmp }));
        assert!(!find_redexes(&c, Calculus::Lca).iter().any(|s| s.rule == Rule::Cmp));
        let s = RedexSite { position: vec![], rule: Rule::Cmp };
        assert!(matches!(step(&c, &s, Calculus::Lca), Err(RewriteError::NotInCalculus { .. })));
        let r = step(&c, &s, Calculus::Lcf).unwrap();
        assert_eq!(r.term, parse_labelled("y^{a}[x^{b}[(\\u.u^{c})^{d}/x]/y]").unwrap());
        assert!(check_linear(&r.term).is_empty());
    }

    #[test]
    fn sigma_normal_input_is_fixpoint() {
        let c = cfg("(\\x.x^{b})^{a}");
        let (r, n) = normalize_sigma(&c, Calculus::Lcf, 5).unwrap();
        assert_eq!((r, n), (c, 0));
        let c = cfg("x^{a}[(\\y.y^{b})^{c}/x]");
        let (r, _) = normalize_sigma(&c, Calculus::Lcf, 5).unwrap();
        assert_eq!(r.term, parse_labelled("(\\y.y^{b})^{a.c}").unwrap());
    }
}
