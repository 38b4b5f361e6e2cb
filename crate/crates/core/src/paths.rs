//! Straight paths in weighted nets and their weight sets.
//!
//! A path starts at an interface edge (root or a free variable), moves from
//! edge to edge through nodes without bouncing back on the same port and
//! without crossing between the two premises of a binary node. The weight
//! of a path is the product of its edge weights, each read in the direction
//! of travel.

use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeSet, HashMap, HashSet};
use std::hash::{Hash, Hasher};

use serde::Serialize;

use crate::algebra::{compose, Normalizer, Weight};
use crate::net::{EdgeId, Endpoint, Net, NodeKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Step {
    pub edge: EdgeId,
    /// Travelling from `a` to `b`.
    pub forward: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Path {
    pub steps: Vec<Step>,
}

impl Path {
    pub fn start<'a>(&self, net: &'a Net) -> &'a Endpoint {
        let s = self.steps[0];
        let e = &net.edges[&s.edge];
        if s.forward {
            &e.a
        } else {
            &e.b
        }
    }

    pub fn end<'a>(&self, net: &'a Net) -> &'a Endpoint {
        let s = *self.steps.last().expect("non-empty path");
        let e = &net.edges[&s.edge];
        if s.forward {
            &e.b
        } else {
            &e.a
        }
    }

    pub fn reversed(&self) -> Path {
        Path { steps: self.steps.iter().rev().map(|s| Step { edge: s.edge, forward: !s.forward }).collect() }
    }
}

/// How paths are pruned while walking.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PathFilter {
    /// Keep only paths whose weight prefixes stay non-zero; weights are
    /// recorded in normal form.
    Persistent,
    /// Keep every straight path; weights are recorded as raw words.
    Static,
}

pub fn path_weight(net: &Net, path: &Path) -> Weight {
    path.steps.iter().fold(Weight::one(), |acc, s| {
        let e = &net.edges[&s.edge];
        let from = if s.forward { &e.a } else { &e.b };
        compose(&acc, &e.weight_from(from))
    })
}

/// Ports a straight path may leave by after entering `node` on `port`.
fn exits(kind: NodeKind, port: usize) -> &'static [usize] {
    match (kind.arity(), port) {
        (3, 0) => &[1, 2],
        (3, _) => &[0],
        (2, 0) => &[1],
        (2, _) => &[0],
        _ => &[],
    }
}

fn interface_starts(net: &Net) -> Vec<Step> {
    let mut out: Vec<(Endpoint, Step)> = Vec::new();
    for (&id, e) in &net.edges {
        if !matches!(e.a, Endpoint::Port { .. }) {
            out.push((e.a.clone(), Step { edge: id, forward: true }));
        }
        if !matches!(e.b, Endpoint::Port { .. }) {
            out.push((e.b.clone(), Step { edge: id, forward: false }));
        }
    }
    out.sort();
    out.into_iter().map(|(_, s)| s).collect()
}

struct Walker<'a> {
    net: &'a Net,
    ports: std::collections::BTreeMap<(usize, usize), EdgeId>,
    max_steps: usize,
    filter: PathFilter,
    truncated: bool,
    /// For weight sets only: the future of a walk depends on its last step,
    /// its reduced weight and the steps left, so each such state with at
    /// least as many steps left is explored once. Keyed by fingerprint.
    memo: Option<HashMap<(Step, u128), usize>>,
    budget: usize,
    exhausted: bool,
}

impl Walker<'_> {
    /// Walks every straight path extending `path`, calling `visit` with the
    /// path and the weight prefixes contributed by its last edge.
    fn walk(&mut self, path: &mut Vec<Step>, norm: Normalizer, raw: Weight, visit: &mut impl FnMut(&[Step], Vec<Weight>)) {
        if self.exhausted {
            return;
        }
        let last = *path.last().unwrap();
        let e = &self.net.edges[&last.edge];
        let (from, to) = if last.forward { (&e.a, &e.b) } else { (&e.b, &e.a) };
        let w = e.weight_from(from);
        let mut norm = norm;
        let mut raw = raw;
        let mut prefixes = Vec::new();
        let mut alive = true;
        match &w {
            Weight::Zero => {
                alive = false;
                if self.filter == PathFilter::Static {
                    raw = Weight::Zero;
                    prefixes.push(Weight::Zero);
                }
            }
            Weight::Word(atoms) => {
                for &a in atoms {
                    match self.filter {
                        PathFilter::Persistent => {
                            if !norm.push(a) {
                                alive = false;
                                break;
                            }
                            prefixes.push(norm.weight());
                        }
                        PathFilter::Static => {
                            raw = raw.then(a);
                            prefixes.push(raw.clone());
                        }
                    }
                }
            }
        }
        visit(path, prefixes);
        if !alive && self.filter == PathFilter::Persistent {
            return;
        }
        if let Some(memo) = &mut self.memo {
            let left = self.max_steps - path.len();
            let key = (last, fingerprint(&norm));
            match memo.get(&key) {
                Some(&seen) if seen >= left => return,
                _ => {
                    if memo.len() >= self.budget {
                        self.exhausted = true;
                        return;
                    }
                    memo.insert(key, left);
                }
            }
        }
        let Endpoint::Port { node, port } = to else { return };
        let kind = self.net.nodes[node].kind;
        let node = *node;
        for &out in exits(kind, *port) {
            let Some(&next) = self.ports.get(&(node, out)) else { continue };
            if path.len() >= self.max_steps {
                self.truncated = true;
                continue;
            }
            let ne = &self.net.edges[&next];
            let forward = ne.a == Endpoint::port(node, out);
            path.push(Step { edge: next, forward });
            self.walk(path, norm.clone(), raw.clone(), visit);
            path.pop();
        }
    }
}

/// 128-bit hash used to store large weight sets compactly.
fn fingerprint<T: Hash>(x: &T) -> u128 {
    let half = |salt: u8| {
        let mut h = DefaultHasher::new();
        salt.hash(&mut h);
        x.hash(&mut h);
        h.finish() as u128
    };
    (half(0) << 64) | half(1)
}

/// Fingerprint of a weight as stored in a [`PrintSet`].
pub fn weight_fingerprint(w: &Weight) -> u128 {
    fingerprint(w)
}

struct Outcome {
    truncated: bool,
    exhausted: bool,
    states: usize,
}

fn run(net: &Net, max_steps: usize, filter: PathFilter, budget: Option<usize>, visit: &mut impl FnMut(&[Step], Vec<Weight>)) -> Outcome {
    let memo = (budget.is_some() && filter == PathFilter::Persistent).then(HashMap::new);
    let mut w = Walker {
        net,
        ports: net.port_map(),
        max_steps,
        filter,
        truncated: false,
        memo,
        budget: budget.unwrap_or(usize::MAX),
        exhausted: false,
    };
    for s in interface_starts(net) {
        let mut path = vec![s];
        w.walk(&mut path, Normalizer::new(), Weight::one(), visit);
    }
    Outcome { truncated: w.truncated, exhausted: w.exhausted, states: w.memo.map_or(0, |m| m.len()) }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Enumeration {
    pub paths: Vec<Path>,
    /// Some path could still be extended when the step bound was hit.
    pub truncated: bool,
}

/// All straight paths of at most `max_steps` edges starting at the
/// interface, in depth-first order. Every prefix of a listed path is listed.
pub fn enumerate_straight(net: &Net, max_steps: usize, filter: PathFilter) -> Enumeration {
    let mut paths = Vec::new();
    let out = run(net, max_steps, filter, None, &mut |p, _| paths.push(Path { steps: p.to_vec() }));
    Enumeration { paths, truncated: out.truncated }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightSet {
    pub weights: BTreeSet<Weight>,
    pub truncated: bool,
}

/// Weights of all prefixes, down to single weight constants, of the
/// straight paths from the interface. Under the persistent filter, zero
/// weights are excluded and the rest are in normal form.
pub fn weight_set(net: &Net, max_steps: usize, filter: PathFilter) -> WeightSet {
    let mut weights = BTreeSet::from([Weight::one()]);
    let out = run(net, max_steps, filter, Some(usize::MAX), &mut |_, ws| weights.extend(ws));
    WeightSet { weights, truncated: out.truncated }
}

/// Walk states (last step, reduced weight) explored before a persistent
/// walk gives up, bounding time and memory on nets with exponential cycles.
pub const DEFAULT_STATE_BUDGET: usize = 250_000;

/// The persistent weight set stored as fingerprints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrintSet {
    pub prints: HashSet<u128>,
    pub truncated: bool,
    /// The state budget ran out; the set is incomplete even at this bound.
    pub exhausted: bool,
    pub states: usize,
}

impl PrintSet {
    pub fn contains(&self, w: &Weight) -> bool {
        self.prints.contains(&weight_fingerprint(w))
    }
}

pub fn weight_prints(net: &Net, max_steps: usize, budget: usize) -> PrintSet {
    let mut prints = HashSet::from([weight_fingerprint(&Weight::one())]);
    let out = run(net, max_steps, PathFilter::Persistent, Some(budget), &mut |_, ws| {
        prints.extend(ws.iter().map(weight_fingerprint))
    });
    PrintSet { prints, truncated: out.truncated, exhausted: out.exhausted, states: out.states }
}

/// Differences listed in a report; the counts are always complete.
pub const REPORT_LIMIT: usize = 64;

/// The smallest persistent weights of `net` whose fingerprint is in `wanted`.
fn weights_with_prints(net: &Net, max_steps: usize, budget: usize, wanted: &HashSet<u128>) -> Vec<String> {
    let mut found = BTreeSet::new();
    run(net, max_steps, PathFilter::Persistent, Some(budget), &mut |_, ws| {
        for w in ws {
            if wanted.contains(&weight_fingerprint(&w)) {
                found.insert(w);
                if found.len() > REPORT_LIMIT {
                    found.pop_last();
                }
            }
        }
    });
    found.iter().map(|w| w.to_string()).collect()
}

/// Default step bound: four times the edge count of the larger net.
pub fn default_bound(a: &Net, b: &Net) -> usize {
    4 * a.edges.len().max(b.edges.len())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InvarianceReport {
    pub bound: usize,
    /// At most [`REPORT_LIMIT`] of the weights only the left net has.
    pub left_only: Vec<String>,
    pub right_only: Vec<String>,
    pub left_only_count: usize,
    pub right_only_count: usize,
    pub common_count: usize,
    pub truncated: bool,
    pub exhausted: bool,
}

impl InvarianceReport {
    /// Equal sets, computed in full at the bound.
    pub fn holds(&self) -> bool {
        !self.exhausted && self.left_only_count == 0 && self.right_only_count == 0
    }
}

/// Compares the persistent weight sets of two nets under a common bound.
pub fn check_invariance(a: &Net, b: &Net, bound: Option<usize>) -> InvarianceReport {
    check_invariance_with(a, b, bound, DEFAULT_STATE_BUDGET)
}

/// Like [`check_invariance`] with an explicit state budget. When one side
/// exhausts the budget its partial set is still a subset of the full one,
/// so weights it has beyond the other, complete, side are genuine
/// differences and are reported; the report is then marked exhausted.
pub fn check_invariance_with(a: &Net, b: &Net, bound: Option<usize>, budget: usize) -> InvarianceReport {
    let bound = bound.unwrap_or_else(|| default_bound(a, b));
    let wa = weight_prints(a, bound, budget);
    let wb = weight_prints(b, bound, budget);
    // Only differences from a partial set into a complete one are certain.
    let certain = |x: &PrintSet, y: &PrintSet| -> HashSet<u128> {
        if y.exhausted {
            HashSet::new()
        } else {
            x.prints.difference(&y.prints).copied().collect()
        }
    };
    let lo = certain(&wa, &wb);
    let ro = certain(&wb, &wa);
    let side = |n: &Net, want: &HashSet<u128>| if want.is_empty() { Vec::new() } else { weights_with_prints(n, bound, budget, want) };
    InvarianceReport {
        bound,
        left_only: side(a, &lo),
        right_only: side(b, &ro),
        left_only_count: lo.len(),
        right_only_count: ro.len(),
        common_count: wa.prints.intersection(&wb.prints).count(),
        truncated: wa.truncated || wb.truncated,
        exhausted: wa.exhausted || wb.exhausted,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{involute, normalize, parse_weight};
    use crate::label::parse_labelled;
    use crate::net::{translate_cbn, translate_cbv};

    #[test]
    fn wire_has_weight_one() {
        let n = translate_cbv(&parse_labelled("x^{a}").unwrap(), 0).unwrap();
        let ws = weight_set(&n, 8, PathFilter::Persistent);
        assert_eq!(ws.weights, BTreeSet::from([Weight::one()]));
        let e = enumerate_straight(&n, 8, PathFilter::Static);
        // One path from the root and its reverse from the free end.
        assert_eq!(e.paths.len(), 2);
        assert_eq!(e.paths[0].reversed(), e.paths[1]);
    }

    #[test]
    fn identity_paths() {
        let n = translate_cbn(&parse_labelled("(\\x.x^{b})^{a}").unwrap(), 0).unwrap();
        let e = enumerate_straight(&n, 10, PathFilter::Persistent);
        assert!(!e.truncated);
        let weights: BTreeSet<String> = e.paths.iter().map(|p| normalize(&path_weight(&n, p)).to_string()).collect();
        // root -> par body -> dereliction -> variable -> par again.
        assert!(weights.contains("q*.d.p"), "{weights:?}");
    }

    #[test]
    fn twisting_is_not_straight() {
        // In the cbn tensor net, crossing from argument to result premise
        // directly would be a twist.
        let n = translate_cbn(&parse_labelled("(x^{a} y^{b})^{c}").unwrap(), 0).unwrap();
        let e = enumerate_straight(&n, 20, PathFilter::Static);
        for p in &e.paths {
            for w in p.steps.windows(2) {
                assert_ne!(w[0].edge, w[1].edge);
            }
        }
        assert!(!e.truncated);
    }

    #[test]
    fn reversal_closure_on_interface_paths() {
        let n = translate_cbv(&parse_labelled("(f^{a} (\\x.x^{c})^{b})^{d}").unwrap(), 0).unwrap();
        let e = enumerate_straight(&n, 20, PathFilter::Persistent);
        let complete: Vec<&Path> =
            e.paths.iter().filter(|p| !matches!(p.end(&n), Endpoint::Port { .. })).collect();
        assert!(!complete.is_empty());
        for p in complete {
            let r = p.reversed();
            assert!(e.paths.contains(&r));
            assert_eq!(normalize(&path_weight(&n, &r)), normalize(&involute(&path_weight(&n, p))));
        }
    }

    #[test]
    fn persistent_prunes_mismatches() {
        let n = translate_cbv(&parse_labelled("((\\x.x^{b})^{a} (\\y.y^{d})^{c})^{e}").unwrap(), 0).unwrap();
        let p = weight_set(&n, 40, PathFilter::Persistent);
        assert!(p.weights.iter().all(|w| !w.is_zero()));
        // Root through the beta cut into the function body.
        assert!(p.weights.contains(&normalize(&parse_weight("q.d.!(q*)").unwrap())));
        let s = weight_set(&n, 40, PathFilter::Static);
        assert!(s.weights.len() >= p.weights.len());
    }
}
