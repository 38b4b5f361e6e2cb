//! Property suites run over the term corpus: termination and propagation of
//! substitutions, confluence, label shapes, weight-set invariance, the net
//! simulation and the end-to-end weight check.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::algebra::{lw, normalize};
use crate::corpus;
use crate::label::{label_of, reverse, Atom, Direction, Label, LabelledTerm, Mark};
use crate::net::{closed_cut_step, iso_check_mode, translate_unlabelled, translate_with, IsoMode, Translation};
use crate::paths::{check_invariance_with, InvarianceReport, default_bound, weight_prints, DEFAULT_STATE_BUDGET};
use crate::rewrite::{explore, find_redexes, normalize_sigma, reduce, Calculus, Configuration, Rule, TraceStep};
use crate::term::{check_linear, compile, FreshSupply, LambdaTerm, Term};

/// One counterexample found by a suite.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Failure {
    pub term: String,
    /// 1-based step in the term's trace, when the failure belongs to a step.
    pub step: Option<usize>,
    pub rule: Option<String>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    /// Number of individual checks performed.
    pub checked: usize,
    pub failures: Vec<Failure>,
    /// Checks that could not be decided (fuel or state budget exhausted).
    /// They count against the suite.
    pub undecided: Vec<Failure>,
}

impl SuiteReport {
    fn new(suite: &str) -> Self {
        SuiteReport { suite: suite.to_string(), checked: 0, failures: Vec::new(), undecided: Vec::new() }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.undecided.is_empty()
    }

    fn fail(&mut self, term: &str, step: Option<(usize, Rule)>, detail: impl Into<String>) {
        self.failures.push(Failure {
            term: term.to_string(),
            step: step.map(|s| s.0),
            rule: step.map(|s| s.1.to_string()),
            detail: detail.into(),
        });
    }

    fn undecided(&mut self, term: &str, step: Option<(usize, Rule)>, detail: impl Into<String>) {
        self.undecided.push(Failure {
            term: term.to_string(),
            step: step.map(|s| s.0),
            rule: step.map(|s| s.1.to_string()),
            detail: detail.into(),
        });
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {} checks, {} failures, {} undecided",
            self.suite,
            self.checked,
            self.failures.len(),
            self.undecided.len()
        )
    }
}

/// Parameters shared by the suites.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckConfig {
    pub corpus_max_size: usize,
    pub fuel: usize,
    /// Step bound for path walks; `None` uses four times the larger edge count.
    pub bound: Option<usize>,
    pub state_budget: usize,
    /// Translation used by the invariance suite; `None` pairs lcf with cbv
    /// and lca with cbn.
    pub translation: Option<Translation>,
    /// Extra terms checked alongside the corpus.
    pub extra: Vec<LambdaTerm>,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            corpus_max_size: 7,
            fuel: 10_000,
            bound: None,
            state_budget: DEFAULT_STATE_BUDGET,
            translation: None,
            extra: Vec::new(),
        }
    }
}

impl CheckConfig {
    pub fn terms(&self) -> Vec<LambdaTerm> {
        let mut ts = corpus::corpus(self.corpus_max_size);
        ts.extend(self.extra.iter().cloned());
        ts
    }
}

pub fn translation_for(calculus: Calculus) -> Translation {
    match calculus {
        Calculus::Lcf => Translation::Cbv,
        Calculus::Lca => Translation::Cbn,
    }
}

/// Every configuration of the leftmost-outermost trace, starting with the
/// initial one, or the error message when the fuel ran out.
fn trace_of(t: &LambdaTerm, calculus: Calculus, fuel: usize) -> (Configuration, Result<Vec<TraceStep>, String>) {
    let start = Configuration::new(corpus::labelled(t));
    let trace = reduce(&start, calculus, fuel).map_err(|e| e.to_string());
    (start, trace)
}

fn subterms(t: &LabelledTerm) -> Vec<&LabelledTerm> {
    t.positions().iter().map(|p| t.subterm(p).expect("enumerated position")).collect()
}

/// The two compilation examples print exactly as expected and every corpus
/// term compiles to a linear term.
pub fn compile_fidelity(cfg: &CheckConfig) -> SuiteReport {
    let mut r = SuiteReport::new("compile");
    let examples = [("\\x.\\y.x", "λx.λy.ε_y.x"), ("(\\x.x x)(\\x.x z)", "(λx.δ_x^{x′,x″}.x′x″)(λx.xz)")];
    for (src, want) in examples {
        r.checked += 1;
        match crate::term::parse_lambda(src) {
            Ok(t) => {
                let got = compile(&t, FreshSupply::new()).0.to_math();
                if got != want {
                    r.fail(src, None, format!("printed {got}, expected {want}"));
                }
            }
            Err(e) => r.fail(src, None, e.to_string()),
        }
    }
    for t in cfg.terms() {
        r.checked += 1;
        let c = compile(&t, FreshSupply::new()).0;
        let v = check_linear(&c);
        if !v.is_empty() {
            r.fail(&t.to_string(), None, format!("{} linearity violations, first: {}", v.len(), v[0]));
        }
    }
    r
}

/// σ-normalisation terminates within `10 × size²` steps from every
/// configuration of every trace.
pub fn sigma_termination(cfg: &CheckConfig, calculus: Calculus) -> SuiteReport {
    let mut r = SuiteReport::new(&format!("sigma-termination/{calculus}"));
    for t in cfg.terms() {
        let name = t.to_string();
        let (start, trace) = trace_of(&t, calculus, cfg.fuel);
        let trace = match trace {
            Ok(tr) => tr,
            Err(e) => {
                r.undecided(&name, None, e);
                continue;
            }
        };
        let configs = std::iter::once((0, &start)).chain(trace.iter().enumerate().map(|(i, s)| (i + 1, &s.config)));
        for (i, c) in configs {
            r.checked += 1;
            let size = c.term.size();
            if let Err(e) = normalize_sigma(c, calculus, 10 * size * size) {
                r.fail(&name, None, format!("configuration {i}: {e}"));
            }
        }
    }
    r
}

/// No σ-normal configuration of any trace contains a substitution whose
/// argument is closed.
pub fn propagation(cfg: &CheckConfig, calculus: Calculus) -> SuiteReport {
    let mut r = SuiteReport::new(&format!("propagation/{calculus}"));
    for t in cfg.terms() {
        let name = t.to_string();
        let (start, trace) = trace_of(&t, calculus, cfg.fuel);
        let Ok(trace) = trace else {
            r.undecided(&name, None, "fuel exhausted");
            continue;
        };
        let configs = std::iter::once(&start).chain(trace.iter().map(|s| &s.config));
        for (i, c) in configs.enumerate() {
            if find_redexes(c, calculus).iter().any(|s| s.rule.is_sigma()) {
                continue;
            }
            r.checked += 1;
            for s in subterms(&c.term) {
                if let Term::Subst { arg, .. } = s {
                    if arg.is_closed() {
                        r.fail(&name, None, format!("configuration {i}: closed substitution in σ-normal {}", c.term));
                        break;
                    }
                }
            }
        }
    }
    r
}

/// Every term's exhaustive reduction graph has exactly one normal form.
pub fn confluence(cfg: &CheckConfig, calculus: Calculus) -> SuiteReport {
    let mut r = SuiteReport::new(&format!("confluence/{calculus}"));
    for t in cfg.terms() {
        let name = t.to_string();
        r.checked += 1;
        match explore(&Configuration::new(corpus::labelled(&t)), calculus, cfg.fuel) {
            Err(e) => r.fail(&name, None, e.to_string()),
            Ok(g) if g.exhausted => r.undecided(&name, None, format!("more than {} states", cfg.fuel)),
            Ok(g) => {
                let sinks = g.sink_terms();
                if sinks.len() != 1 {
                    r.fail(&name, None, format!("{} distinct normal forms", sinks.len()));
                }
            }
        }
    }
    r
}

/// Syntactic class of a labelled construct.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Class {
    Var,
    Abs,
    App,
}

fn class_of(t: &LabelledTerm) -> Option<Class> {
    match t {
        Term::Var { .. } => Some(Class::Var),
        Term::Abs { .. } => Some(Class::Abs),
        Term::App { .. } => Some(Class::App),
        _ => None,
    }
}

fn own_label(t: &LabelledTerm) -> Option<&Label> {
    match t {
        Term::Var { label, .. } | Term::Abs { label, .. } | Term::App { label, .. } => Some(label),
        _ => None,
    }
}

fn is_right_marker(a: &Atom) -> bool {
    matches!(a, Atom::Marker(Direction::Right, _))
}

/// Length of the leading `ω · underline(α)` block: a run of right markers
/// followed by an underline. `None` when the label does not start that way.
fn omega_under(atoms: &[Atom]) -> Option<usize> {
    let omega = atoms.iter().take_while(|a| is_right_marker(a)).count();
    matches!(atoms.get(omega), Some(Atom::Under(_))).then_some(omega + 1)
}

/// Checks `ω · underline(α) · σ`.
fn lemma7_shape(l: &Label) -> bool {
    omega_under(&l.atoms).is_some()
}

/// Checks `ω · underline(α) · ←! · σ` with no `→D` in `ω`.
fn lemma_a1_shape(l: &Label) -> bool {
    let Some(n) = omega_under(&l.atoms) else { return false };
    let no_d = !l.atoms[..n - 1].contains(&Atom::right(Mark::D));
    no_d && l.atoms.get(n) == Some(&Atom::left(Mark::Bang))
}

/// Occurrences of variable atoms in `l`, at any nesting depth, whose suffix
/// in their own sequence is neither empty nor of shape `ω · underline(α) · σ`.
/// Underlined blocks carry a reversed history and are read through
/// [`reverse`].
fn corollary_violations(l: &Label, var_atoms: &BTreeSet<String>, out: &mut Vec<String>) {
    for (i, a) in l.atoms.iter().enumerate() {
        match a {
            Atom::Atomic(n) if var_atoms.contains(n) => {
                let rest = &l.atoms[i + 1..];
                if !rest.is_empty() && omega_under(rest).is_none() {
                    out.push(format!("{n} followed by {}", Label::new(rest.to_vec())));
                }
            }
            Atom::Over(inner) => corollary_violations(inner, var_atoms, out),
            Atom::Under(inner) => corollary_violations(&reverse(inner), var_atoms, out),
            _ => {}
        }
    }
}

/// The first and last atom lemmas, and the decomposition of substitution
/// argument labels, at every configuration of every trace.
pub fn label_lemmas(cfg: &CheckConfig, calculus: Calculus) -> SuiteReport {
    let mut r = SuiteReport::new(&format!("label-lemmas/{calculus}"));
    for t in cfg.terms() {
        let name = t.to_string();
        let (start, trace) = trace_of(&t, calculus, cfg.fuel);
        let Ok(trace) = trace else {
            r.undecided(&name, None, "fuel exhausted");
            continue;
        };
        // Initialisation atoms by syntactic class.
        let mut class: BTreeMap<String, Class> = BTreeMap::new();
        for s in subterms(&start.term) {
            if let (Some(c), Some(l)) = (class_of(s), own_label(s)) {
                if let Some(a) = l.first_atomic() {
                    class.insert(a.to_string(), c);
                }
            }
        }
        let var_atoms: BTreeSet<String> =
            class.iter().filter(|(_, &c)| c == Class::Var).map(|(a, _)| a.clone()).collect();
        let root = label_of(&start.term).first_atomic().map(str::to_string);

        for (i, s) in trace.iter().enumerate() {
            let at = Some((i + 1, s.site.rule));
            let term = &s.config.term;
            r.checked += 1;
            let first = label_of(term).first_atomic().map(str::to_string);
            if first != root {
                r.fail(&name, at, format!("external label {} does not start with {root:?}", label_of(term)));
            }
            for sub in subterms(term) {
                if let (Some(c), Some(l)) = (class_of(sub), own_label(sub)) {
                    r.checked += 1;
                    match l.last_atomic().and_then(|a| class.get(a)) {
                        Some(&k) if k == c => {}
                        _ => r.fail(&name, at, format!("label {l} of a {c:?} ends with an atom of another class")),
                    }
                    if calculus == Calculus::Lcf {
                        let mut bad = Vec::new();
                        corollary_violations(l, &var_atoms, &mut bad);
                        for b in bad {
                            r.fail(&name, at, format!("in {l}: {b}"));
                        }
                    }
                }
                if let Term::Subst { arg, .. } = sub {
                    r.checked += 1;
                    let l = label_of(arg);
                    let ok = match calculus {
                        Calculus::Lcf => lemma7_shape(l),
                        Calculus::Lca => lemma_a1_shape(l),
                    };
                    if !ok {
                        r.fail(&name, at, format!("substitution argument label {l} has the wrong shape"));
                    }
                }
            }
        }
    }
    r
}

/// The invariance report of one trace step.
#[derive(Debug, Clone, Serialize)]
pub struct StepReport {
    pub term: String,
    pub step: usize,
    pub rule: Rule,
    #[serde(flatten)]
    pub report: InvarianceReport,
}

/// Weight sets of the nets of consecutive trace configurations agree at the
/// bound.
pub fn invariance(cfg: &CheckConfig, calculus: Calculus) -> SuiteReport {
    invariance_steps(cfg, calculus).0
}

/// [`invariance`] together with the per-step reports.
pub fn invariance_steps(cfg: &CheckConfig, calculus: Calculus) -> (SuiteReport, Vec<StepReport>) {
    let mode = cfg.translation.unwrap_or(translation_for(calculus));
    let mut r = SuiteReport::new(&format!("invariance/{calculus}/{mode}"));
    let mut steps = Vec::new();
    for t in cfg.terms() {
        let name = t.to_string();
        let (start, trace) = trace_of(&t, calculus, cfg.fuel);
        let Ok(trace) = trace else {
            r.undecided(&name, None, "fuel exhausted");
            continue;
        };
        let mut prev = match translate_with(&start.term, 0, mode) {
            Ok(n) => n,
            Err(e) => {
                r.fail(&name, None, e.to_string());
                continue;
            }
        };
        for (i, s) in trace.iter().enumerate() {
            let at = Some((i + 1, s.site.rule));
            r.checked += 1;
            let next = match translate_with(&s.config.term, 0, mode) {
                Ok(n) => n,
                Err(e) => {
                    r.fail(&name, at, e.to_string());
                    break;
                }
            };
            let rep = check_invariance_with(&prev, &next, cfg.bound, cfg.state_budget);
            let diff = rep.left_only_count + rep.right_only_count;
            if diff > 0 {
                let sample = rep.left_only.first().or(rep.right_only.first()).cloned().unwrap_or_default();
                r.fail(
                    &name,
                    at,
                    format!(
                        "bound {}: {} weights only before, {} only after (e.g. {sample}){}",
                        rep.bound,
                        rep.left_only_count,
                        rep.right_only_count,
                        if rep.exhausted { ", state budget exhausted" } else { "" }
                    ),
                );
            } else if rep.exhausted {
                r.undecided(&name, at, format!("bound {}: state budget {} exhausted", rep.bound, cfg.state_budget));
            }
            steps.push(StepReport { term: name.clone(), step: i + 1, rule: s.site.rule, report: rep });
            prev = next;
        }
    }
    (r, steps)
}

/// Rules whose unlabelled nets coincide.
pub fn is_identity_rule(rule: Rule) -> bool {
    matches!(rule, Rule::App1 | Rule::Lam | Rule::Cpy2 | Rule::Ers2)
}

/// Every step of every unlabelled closed-argument reduction graph is matched
/// on call-by-name nets, either by isomorphism or by one closed cut step.
pub fn net_simulation(cfg: &CheckConfig) -> SuiteReport {
    let mut r = SuiteReport::new("net-simulation/lca/cbn");
    for t in cfg.terms() {
        let name = t.to_string();
        let g = match explore(&Configuration::new(corpus::labelled(&t)), Calculus::Lca, cfg.fuel) {
            Ok(g) => g,
            Err(e) => {
                r.fail(&name, None, e.to_string());
                continue;
            }
        };
        if g.exhausted {
            r.undecided(&name, None, "reduction graph too large");
        }
        let nets: Vec<_> = g.states.iter().map(|c| translate_unlabelled(&c.term.unlabelled(), Translation::Cbn)).collect();
        for (from, site, to) in &g.edges {
            r.checked += 1;
            let at = Some((*from, site.rule));
            let (Ok(a), Ok(b)) = (&nets[*from], &nets[*to]) else {
                r.fail(&name, at, "translation failed");
                continue;
            };
            let ok = if is_identity_rule(site.rule) {
                iso_check_mode(a, b, IsoMode::Structural)
            } else {
                a.cuts().into_iter().any(|c| {
                    closed_cut_step(a, c).map(|n| iso_check_mode(&n, b, IsoMode::Structural)).unwrap_or(false)
                })
            };
            if !ok {
                r.fail(
                    &name,
                    at,
                    format!("{} at {:?}: {} -> {}", site.rule, site.position, g.states[*from].term, g.states[*to].term),
                );
            }
        }
    }
    r
}

/// The weight of each normal form's external label is observable in the
/// initial net.
pub fn end_to_end(cfg: &CheckConfig, calculus: Calculus) -> SuiteReport {
    let mode = translation_for(calculus);
    let mut r = SuiteReport::new(&format!("end-to-end/{calculus}/{mode}"));
    for t in cfg.terms() {
        let name = t.to_string();
        let (start, trace) = trace_of(&t, calculus, cfg.fuel);
        let Ok(trace) = trace else {
            r.undecided(&name, None, "fuel exhausted");
            continue;
        };
        let last = trace.last().map_or(&start, |s| &s.config);
        r.checked += 1;
        let w = match lw(label_of(&last.term), 0) {
            Ok(w) => normalize(&w.weight),
            Err(e) => {
                r.fail(&name, None, e.to_string());
                continue;
            }
        };
        let net = match translate_with(&start.term, 0, mode) {
            Ok(n) => n,
            Err(e) => {
                r.fail(&name, None, e.to_string());
                continue;
            }
        };
        let bound = cfg.bound.unwrap_or_else(|| default_bound(&net, &net));
        let prints = weight_prints(&net, bound, cfg.state_budget);
        if !prints.contains(&w) {
            let detail = format!("weight {w} of {} not seen within bound {bound}", label_of(&last.term));
            if prints.exhausted {
                r.undecided(&name, None, detail + ", state budget exhausted");
            } else {
                r.fail(&name, None, detail);
            }
        }
    }
    r
}

/// The suites reachable from the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Invariance,
    Confluence,
    SigmaTermination,
    LabelLemmas,
    NetSimulation,
}

impl std::str::FromStr for Suite {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "invariance" => Suite::Invariance,
            "confluence" => Suite::Confluence,
            "sigma-termination" => Suite::SigmaTermination,
            "label-lemmas" => Suite::LabelLemmas,
            "net-simulation" => Suite::NetSimulation,
            _ => return Err(format!("unknown suite `{s}`")),
        })
    }
}

pub fn run_suite(suite: Suite, cfg: &CheckConfig, calculus: Calculus) -> SuiteReport {
    match suite {
        Suite::Invariance => invariance(cfg, calculus),
        Suite::Confluence => confluence(cfg, calculus),
        Suite::SigmaTermination => sigma_termination(cfg, calculus),
        Suite::LabelLemmas => label_lemmas(cfg, calculus),
        Suite::NetSimulation => net_simulation(cfg),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::label::parse_label;

    fn small() -> CheckConfig {
        CheckConfig { corpus_max_size: 4, ..CheckConfig::default() }
    }

    #[test]
    fn shapes() {
        assert!(lemma7_shape(&parse_label("_(a).b").unwrap()));
        assert!(lemma7_shape(&parse_label("R>.?>._(a)").unwrap()));
        assert!(!lemma7_shape(&parse_label("a._(b)").unwrap()));
        assert!(lemma_a1_shape(&parse_label("?>._(a).<!.b").unwrap()));
        assert!(!lemma_a1_shape(&parse_label("D>._(a).<!.b").unwrap()));
        assert!(!lemma_a1_shape(&parse_label("_(a).b").unwrap()));
    }

    #[test]
    fn small_corpus_suites_pass() {
        let cfg = small();
        assert!(compile_fidelity(&cfg).passed());
        for calc in [Calculus::Lcf, Calculus::Lca] {
            for r in [sigma_termination(&cfg, calc), propagation(&cfg, calc), confluence(&cfg, calc)] {
                assert!(r.passed(), "{r}: {:?}", r.failures);
                assert!(r.checked > 0);
            }
        }
    }
}
