//! Weighted proof-nets with boxes, the call-by-value and call-by-name
//! translations of labelled λc-terms, closed cut elimination and
//! isomorphism.
//!
//! Port conventions: port 0 is always the conclusion (principal port).
//! Tensor: 1 = result side (`q`), 2 = argument side (`p`). Par: 1 = body
//! (`q`), 2 = bound variable (`p`). Fan: 1 = left copy (`r`), 2 = right copy
//! (`s`). Doors and derelictions: 0 = outside conclusion, 1 = premise.
//! Weaken has only port 0. An edge weight is read from endpoint `a` to `b`.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{compose, involute, lw, AlgebraError, Base, WAtom, Weight};
use crate::label::{label_of, split_at_first, Atom, Label, LabelledTerm, Mark};
use crate::term::{CTerm, Name, Term};

pub type NodeId = usize;
pub type EdgeId = usize;
pub type BoxId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NodeKind {
    Ax,
    Cut,
    Tensor,
    Par,
    Fan,
    BangDoor,
    WhyNotDoor,
    Derelict,
    Weaken,
}

impl NodeKind {
    pub fn arity(self) -> usize {
        match self {
            NodeKind::Tensor | NodeKind::Par | NodeKind::Fan => 3,
            NodeKind::Weaken => 1,
            _ => 2,
        }
    }

    pub fn is_door(self) -> bool {
        matches!(self, NodeKind::BangDoor | NodeKind::WhyNotDoor)
    }

    fn short(self) -> &'static str {
        match self {
            NodeKind::Ax => "ax",
            NodeKind::Cut => "cut",
            NodeKind::Tensor => "⊗",
            NodeKind::Par => "⅋",
            NodeKind::Fan => "fan",
            NodeKind::BangDoor => "!",
            NodeKind::WhyNotDoor => "?",
            NodeKind::Derelict => "D",
            NodeKind::Weaken => "W",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node {
    pub kind: NodeKind,
    /// Innermost box containing the node. Doors belong to their own box.
    pub in_box: Option<BoxId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Endpoint {
    Port { node: NodeId, port: usize },
    Root,
    Free(Name),
}

impl Endpoint {
    pub fn port(node: NodeId, port: usize) -> Self {
        Endpoint::Port { node, port }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub a: Endpoint,
    pub b: Endpoint,
    pub weight: Weight,
}

impl Edge {
    /// The weight read when leaving from `from`.
    pub fn weight_from(&self, from: &Endpoint) -> Weight {
        if *from == self.a {
            self.weight.clone()
        } else {
            involute(&self.weight)
        }
    }

    pub fn other(&self, from: &Endpoint) -> &Endpoint {
        if *from == self.a {
            &self.b
        } else {
            &self.a
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetBox {
    pub principal: NodeId,
    pub auxiliaries: Vec<NodeId>,
    pub parent: Option<BoxId>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Net {
    pub nodes: BTreeMap<NodeId, Node>,
    pub edges: BTreeMap<EdgeId, Edge>,
    pub boxes: BTreeMap<BoxId, NetBox>,
    next_id: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NetError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("copied variable {0} reaches the fan at different levels")]
    LevelMismatch(Name),
    #[error("term is not linear: {0}")]
    NotLinear(String),
    #[error("edge {0} is not a cut")]
    NotACut(EdgeId),
    #[error("box {0} has auxiliary doors")]
    NotClosed(BoxId),
    #[error("no edge {0}")]
    NoSuchEdge(EdgeId),
}

/// Which end of the translation a net came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Translation {
    Cbv,
    Cbn,
}

impl std::str::FromStr for Translation {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "cbv" => Ok(Translation::Cbv),
            "cbn" => Ok(Translation::Cbn),
            _ => Err(format!("unknown translation `{s}` (expected cbv or cbn)")),
        }
    }
}

impl std::fmt::Display for Translation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Translation::Cbv => "cbv",
            Translation::Cbn => "cbn",
        })
    }
}

impl Net {
    fn fresh(&mut self) -> usize {
        self.next_id += 1;
        self.next_id
    }

    pub fn add_node(&mut self, kind: NodeKind, in_box: Option<BoxId>) -> NodeId {
        let id = self.fresh();
        self.nodes.insert(id, Node { kind, in_box });
        id
    }

    pub fn add_edge(&mut self, a: Endpoint, b: Endpoint, weight: Weight) -> EdgeId {
        let id = self.fresh();
        self.edges.insert(id, Edge { a, b, weight });
        id
    }

    /// Creates a box with its principal door.
    pub fn add_box(&mut self, parent: Option<BoxId>) -> (BoxId, NodeId) {
        let id = self.fresh();
        let door = self.add_node(NodeKind::BangDoor, Some(id));
        self.boxes.insert(id, NetBox { principal: door, auxiliaries: Vec::new(), parent });
        (id, door)
    }

    pub fn add_aux_door(&mut self, b: BoxId) -> NodeId {
        let door = self.add_node(NodeKind::WhyNotDoor, Some(b));
        self.boxes.get_mut(&b).expect("box exists").auxiliaries.push(door);
        door
    }

    pub fn count(&self, kind: NodeKind) -> usize {
        self.nodes.values().filter(|n| n.kind == kind).count()
    }

    /// Map from every attached node port to its edge.
    pub fn port_map(&self) -> BTreeMap<(NodeId, usize), EdgeId> {
        let mut m = BTreeMap::new();
        for (&id, e) in &self.edges {
            for end in [&e.a, &e.b] {
                if let Endpoint::Port { node, port } = end {
                    m.insert((*node, *port), id);
                }
            }
        }
        m
    }

    pub fn box_depth(&self, b: Option<BoxId>) -> usize {
        let mut depth = 0;
        let mut cur = b;
        while let Some(id) = cur {
            depth += 1;
            cur = self.boxes.get(&id).and_then(|x| x.parent);
        }
        depth
    }

    /// The box an endpoint lives in: door conclusions sit outside their box.
    pub fn endpoint_box(&self, end: &Endpoint) -> Option<BoxId> {
        match end {
            Endpoint::Port { node, port } => {
                let n = &self.nodes[node];
                if n.kind.is_door() && *port == 0 {
                    n.in_box.and_then(|b| self.boxes[&b].parent)
                } else {
                    n.in_box
                }
            }
            _ => None,
        }
    }

    /// Box-nesting depth of an edge.
    pub fn edge_depth(&self, e: EdgeId) -> usize {
        let edge = &self.edges[&e];
        self.box_depth(self.endpoint_box(&edge.a))
    }

    /// Edges whose two ends are principal ports, plus edges touching an
    /// axiom or cut node.
    pub fn cuts(&self) -> Vec<EdgeId> {
        self.edges
            .iter()
            .filter(|(_, e)| match (&e.a, &e.b) {
                (Endpoint::Port { node: n1, port: 0 }, Endpoint::Port { node: n2, port: 0 }) => {
                    let (k1, k2) = (self.nodes[n1].kind, self.nodes[n2].kind);
                    !(k1 == NodeKind::WhyNotDoor && k2 == NodeKind::WhyNotDoor)
                        || matches!(k1, NodeKind::Ax | NodeKind::Cut)
                }
                (x, y) => [x, y].iter().any(|end| {
                    matches!(end, Endpoint::Port { node, .. } if matches!(self.nodes[node].kind, NodeKind::Ax | NodeKind::Cut))
                }),
            })
            .map(|(&id, _)| id)
            .collect()
    }

    /// Boxes contained in `b`, including `b`.
    fn box_subtree(&self, b: BoxId) -> BTreeSet<BoxId> {
        let mut out = BTreeSet::from([b]);
        loop {
            let more: Vec<BoxId> = self
                .boxes
                .iter()
                .filter(|(id, x)| !out.contains(id) && x.parent.is_some_and(|p| out.contains(&p)))
                .map(|(&id, _)| id)
                .collect();
            if more.is_empty() {
                return out;
            }
            out.extend(more);
        }
    }

    fn nodes_in(&self, boxes: &BTreeSet<BoxId>) -> BTreeSet<NodeId> {
        self.nodes
            .iter()
            .filter(|(_, n)| n.in_box.is_some_and(|b| boxes.contains(&b)))
            .map(|(&id, _)| id)
            .collect()
    }

    fn edge_at(&self, node: NodeId, port: usize) -> EdgeId {
        *self.port_map().get(&(node, port)).expect("port attached")
    }

    /// Replaces two edges meeting at `(node, p1)` / `(node, p2)` by one, and
    /// returns its id. The new edge runs from the far end of the first to the
    /// far end of the second.
    fn splice(&mut self, node: NodeId, p1: usize, p2: usize) -> EdgeId {
        let e1 = self.edge_at(node, p1);
        let e2 = self.edge_at(node, p2);
        let here1 = Endpoint::port(node, p1);
        let here2 = Endpoint::port(node, p2);
        let edge1 = self.edges.remove(&e1).unwrap();
        let edge2 = self.edges.remove(&e2).unwrap();
        let far1 = edge1.other(&here1).clone();
        let far2 = edge2.other(&here2).clone();
        let w = compose(&edge1.weight_from(&far1), &edge2.weight_from(&here2));
        self.add_edge(far1, far2, w)
    }

    /// Joins the far ends of `e1` (away from `end1`) and `e2` (away from
    /// `end2`) through the cut edge `cut`, read from `end1` to `end2`.
    fn join_through(&mut self, e1: EdgeId, end1: &Endpoint, cut: &Weight, e2: EdgeId, end2: &Endpoint) -> EdgeId {
        let edge1 = self.edges.remove(&e1).unwrap();
        let edge2 = self.edges.remove(&e2).unwrap();
        let far1 = edge1.other(end1).clone();
        let far2 = edge2.other(end2).clone();
        let w = compose(&compose(&edge1.weight_from(&far1), cut), &edge2.weight_from(end2));
        self.add_edge(far1, far2, w)
    }
}

// ---------------------------------------------------------------------------
// Translations
// ---------------------------------------------------------------------------

/// An edge under construction. Side `a` faces the root, side `b` the binder
/// of the variable (or the node the wire enters).
#[derive(Debug, Clone)]
struct Wire {
    a: Option<Endpoint>,
    b: Option<Endpoint>,
    weight: Weight,
}

#[derive(Debug, Clone)]
struct Frag {
    root: usize,
    /// Open wire of each free variable and the level at its open end.
    free: BTreeMap<Name, (usize, usize)>,
}

struct Builder {
    net: Net,
    wires: Vec<Wire>,
    forward: Vec<usize>,
    mode: Translation,
    /// Level at which each atomic label atom is read.
    known: BTreeMap<Name, usize>,
    recording: bool,
    final_pass: bool,
}

/// Walks a label from `level`, listing the level at which each atomic atom
/// is read.
fn atom_levels(atoms: &[Atom], mut level: usize, out: &mut Vec<(Name, usize)>) -> Option<usize> {
    for a in atoms {
        match a {
            Atom::Atomic(x) => out.push((x.clone(), level)),
            Atom::Over(l) | Atom::Under(l) => level = atom_levels(&l.atoms, level, out)?,
            Atom::Marker(..) => level = lw(&Label::new(vec![a.clone()]), level).ok()?.out_level,
        }
    }
    Some(level)
}

/// Level a label must start from so that its atoms sit where they were
/// seen elsewhere in the term.
fn infer_start(known: &BTreeMap<Name, usize>, label: &Label) -> Option<usize> {
    const BASE: usize = 1 << 20;
    let mut seen = Vec::new();
    atom_levels(&label.atoms, BASE, &mut seen);
    seen.into_iter()
        .find_map(|(a, at)| known.get(&a).map(|&l| (l + BASE).checked_sub(at)))
        .flatten()
}

impl Builder {
    fn wire(&mut self, a: Option<Endpoint>, b: Option<Endpoint>, weight: Weight) -> usize {
        self.wires.push(Wire { a, b, weight });
        self.forward.push(self.wires.len() - 1);
        self.wires.len() - 1
    }

    fn find(&self, mut w: usize) -> usize {
        while self.forward[w] != w {
            w = self.forward[w];
        }
        w
    }

    /// Attaches the root side of a wire, prefixing its weight.
    fn attach_a(&mut self, w: usize, end: Endpoint, prefix: Weight) {
        let w = self.find(w);
        let wire = &mut self.wires[w];
        wire.a = Some(end);
        wire.weight = compose(&prefix, &wire.weight);
    }

    /// Attaches the binder side of a wire, suffixing its weight.
    fn attach_b(&mut self, w: usize, end: Endpoint, suffix: Weight) {
        let w = self.find(w);
        let wire = &mut self.wires[w];
        wire.b = Some(end);
        wire.weight = compose(&wire.weight, &suffix);
    }

    /// Continues wire `first` (open binder side) with wire `second` (open
    /// root side).
    fn merge(&mut self, first: usize, second: usize, middle: Weight) {
        let (f, s) = (self.find(first), self.find(second));
        let second = self.wires[s].clone();
        let wire = &mut self.wires[f];
        wire.b = second.b;
        wire.weight = compose(&compose(&wire.weight, &middle), &second.weight);
        self.forward[s] = f;
    }

    fn lw(&mut self, label: &Label, level: usize) -> Result<(Weight, usize), NetError> {
        if self.recording {
            let mut seen = Vec::new();
            atom_levels(&label.atoms, level, &mut seen);
            for (a, l) in seen {
                self.known.entry(a).or_insert(l);
            }
        }
        let r = lw(label, level)?;
        Ok((r.weight, r.out_level))
    }

    fn union(a: BTreeMap<Name, (usize, usize)>, b: BTreeMap<Name, (usize, usize)>) -> Result<BTreeMap<Name, (usize, usize)>, NetError> {
        let mut out = a;
        for (k, v) in b {
            if out.insert(k.clone(), v).is_some() {
                return Err(NetError::NotLinear(format!("variable {k} occurs twice")));
            }
        }
        Ok(out)
    }

    /// Routes the listed free variables of a fragment out of box `bx`
    /// through fresh auxiliary doors.
    fn exit_box(&mut self, bx: BoxId, free: BTreeMap<Name, (usize, usize)>) -> Result<BTreeMap<Name, (usize, usize)>, NetError> {
        let mut out = BTreeMap::new();
        for (y, (w, k)) in free {
            let m = k.checked_sub(1).ok_or_else(|| AlgebraError::LevelUnderflow { marker: format!("?> (auxiliary door for {y})") })?;
            let q = self.net.add_aux_door(bx);
            self.attach_b(w, Endpoint::port(q, 1), Weight::atom(WAtom::star(Base::T, m)));
            let outer = self.wire(Some(Endpoint::port(q, 0)), None, Weight::one());
            out.insert(y, (outer, m));
        }
        Ok(out)
    }

    fn translate(&mut self, t: &LabelledTerm, level: usize, bx: Option<BoxId>) -> Result<Frag, NetError> {
        match t {
            Term::Var { name, label } => {
                let (w, o) = self.lw(label, level)?;
                match self.mode {
                    Translation::Cbv => {
                        let wire = self.wire(None, None, w);
                        Ok(Frag { root: wire, free: BTreeMap::from([(name.clone(), (wire, o))]) })
                    }
                    Translation::Cbn => {
                        let d = self.net.add_node(NodeKind::Derelict, bx);
                        let root = self.wire(None, Some(Endpoint::port(d, 1)), w.then(WAtom::new(Base::D, o)));
                        let x = self.wire(Some(Endpoint::port(d, 0)), None, Weight::one());
                        Ok(Frag { root, free: BTreeMap::from([(name.clone(), (x, o))]) })
                    }
                }
            }
            Term::Abs { binder, body, label } => {
                let (w, o) = self.lw(label, level)?;
                match self.mode {
                    Translation::Cbv => {
                        let (inner, door) = self.net.add_box(bx);
                        let par = self.net.add_node(NodeKind::Par, Some(inner));
                        self.net.add_edge(Endpoint::port(door, 1), Endpoint::port(par, 0), Weight::one());
                        let m = self.translate(body, o + 1, Some(inner))?;
                        self.attach_a(m.root, Endpoint::port(par, 1), Weight::atom(WAtom::star(Base::Q, o + 1)));
                        let mut free = m.free;
                        let (x, kx) = free
                            .remove(binder)
                            .ok_or_else(|| NetError::NotLinear(format!("binder {binder} unused")))?;
                        self.attach_b(x, Endpoint::port(par, 2), Weight::atom(WAtom::new(Base::P, kx)));
                        let free = self.exit_box(inner, free)?;
                        let root = self.wire(None, Some(Endpoint::port(door, 0)), w);
                        Ok(Frag { root, free })
                    }
                    Translation::Cbn => {
                        let par = self.net.add_node(NodeKind::Par, bx);
                        let m = self.translate(body, o, bx)?;
                        self.attach_a(m.root, Endpoint::port(par, 1), Weight::atom(WAtom::star(Base::Q, o)));
                        let mut free = m.free;
                        let (x, kx) = free
                            .remove(binder)
                            .ok_or_else(|| NetError::NotLinear(format!("binder {binder} unused")))?;
                        self.attach_b(x, Endpoint::port(par, 2), Weight::atom(WAtom::new(Base::P, kx)));
                        let root = self.wire(None, Some(Endpoint::port(par, 0)), w);
                        Ok(Frag { root, free })
                    }
                }
            }
            Term::App { fun, arg, label } => {
                let (w, o) = self.lw(label, level)?;
                let tensor = self.net.add_node(NodeKind::Tensor, bx);
                let root = self.wire(None, Some(Endpoint::port(tensor, 1)), w.then(WAtom::new(Base::Q, o)));
                match self.mode {
                    Translation::Cbv => {
                        let d = self.net.add_node(NodeKind::Derelict, bx);
                        self.net.add_edge(Endpoint::port(tensor, 0), Endpoint::port(d, 1), Weight::atom(WAtom::new(Base::D, o)));
                        let n = self.translate(arg, o, bx)?;
                        self.attach_a(n.root, Endpoint::port(tensor, 2), Weight::atom(WAtom::star(Base::P, o)));
                        let m = self.translate(fun, o, bx)?;
                        self.attach_a(m.root, Endpoint::port(d, 0), Weight::one());
                        Ok(Frag { root, free: Self::union(m.free, n.free)? })
                    }
                    Translation::Cbn => {
                        let m = self.translate(fun, o, bx)?;
                        self.attach_a(m.root, Endpoint::port(tensor, 0), Weight::one());
                        let (inner, door) = self.net.add_box(bx);
                        self.net.add_edge(Endpoint::port(tensor, 2), Endpoint::port(door, 0), Weight::atom(WAtom::star(Base::P, o)));
                        let n = self.translate(arg, o + 1, Some(inner))?;
                        self.attach_a(n.root, Endpoint::port(door, 1), Weight::one());
                        let nfree = self.exit_box(inner, n.free)?;
                        Ok(Frag { root, free: Self::union(m.free, nfree)? })
                    }
                }
            }
            Term::Copy { source, left, right, body } => {
                let m = self.translate(body, level, bx)?;
                let fan = self.net.add_node(NodeKind::Fan, bx);
                let mut free = m.free;
                let missing = |v: &str| NetError::NotLinear(format!("copy target {v} unused"));
                let (wy, ky) = free.remove(left).ok_or_else(|| missing(left))?;
                let (wz, kz) = free.remove(right).ok_or_else(|| missing(right))?;
                if ky != kz {
                    return Err(NetError::LevelMismatch(source.clone()));
                }
                self.attach_b(wy, Endpoint::port(fan, 1), Weight::atom(WAtom::new(Base::R, ky)));
                self.attach_b(wz, Endpoint::port(fan, 2), Weight::atom(WAtom::new(Base::S, kz)));
                let x = self.wire(Some(Endpoint::port(fan, 0)), None, Weight::one());
                free.insert(source.clone(), (x, ky));
                Ok(Frag { root: m.root, free })
            }
            Term::Erase { binder, body } => {
                let m = self.translate(body, level, bx)?;
                let weaken = self.net.add_node(NodeKind::Weaken, bx);
                // Paths stop at the weakening node; the wire itself stays 1
                // so an argument merged into it keeps its own weight.
                let x = self.wire(Some(Endpoint::port(weaken, 0)), None, Weight::one());
                // Under a binder this is the binder's level. Under a
                // substitution it is refined where the substitution is
                // translated.
                let mut free = m.free;
                free.insert(binder.clone(), (x, level));
                Ok(Frag { root: m.root, free })
            }
            Term::Subst { body, arg, target } => {
                let m = self.translate(body, level, bx)?;
                let mut free = m.free;
                let (wx, kx) = free
                    .remove(target)
                    .ok_or_else(|| NetError::NotLinear(format!("substituted variable {target} unused")))?;
                let erased = matches!(self.wires[self.find(wx)].a, Some(Endpoint::Port { node, .. }) if self.net.nodes[&node].kind == NodeKind::Weaken);
                let was_recording = self.recording;
                let kx = if !erased {
                    kx
                } else if self.final_pass {
                    infer_start(&self.known, label_of(arg)).unwrap_or(kx)
                } else {
                    // First pass: keep clear of underflow and do not trust
                    // levels seen inside the erased argument.
                    self.recording = false;
                    kx + 64
                };
                match self.mode {
                    Translation::Cbv => {
                        let n = self.translate(arg, kx, bx)?;
                        self.recording = was_recording;
                        self.merge(wx, n.root, Weight::one());
                        Ok(Frag { root: m.root, free: Self::union(free, n.free)? })
                    }
                    Translation::Cbn => {
                        // The part of the argument's label up to its first
                        // top-level `<!` describes the path to the box door.
                        let outer_label = label_of(arg).clone();
                        let (outside, inside) = split_at_first(&outer_label, &Atom::left(Mark::Bang))
                            .unwrap_or((Label::default(), outer_label.clone()));
                        let (w_out, o) = self.lw(&outside, kx)?;
                        let (inner, door) = self.net.add_box(bx);
                        let arg = with_external_label(arg, inside);
                        let n = self.translate(&arg, o + 1, Some(inner))?;
                        self.attach_a(n.root, Endpoint::port(door, 1), Weight::one());
                        self.attach_b(wx, Endpoint::port(door, 0), w_out);
                        self.recording = was_recording;
                        let nfree = self.exit_box(inner, n.free)?;
                        Ok(Frag { root: m.root, free: Self::union(free, nfree)? })
                    }
                }
            }
        }
    }

    fn finish(mut self, frag: Frag) -> Net {
        self.attach_a(frag.root, Endpoint::Root, Weight::one());
        for (x, (w, _)) in &frag.free {
            self.attach_b(*w, Endpoint::Free(x.clone()), Weight::one());
        }
        for i in 0..self.wires.len() {
            if self.forward[i] == i {
                let w = &self.wires[i];
                let a = w.a.clone().expect("wire root side attached");
                let b = w.b.clone().expect("wire binder side attached");
                self.net.add_edge(a, b, w.weight.clone());
            }
        }
        self.net
    }
}

fn with_external_label(t: &LabelledTerm, l: Label) -> LabelledTerm {
    let mut t = t.clone();
    let mut cur = &mut t;
    loop {
        match cur {
            Term::Var { label, .. } | Term::Abs { label, .. } | Term::App { label, .. } => {
                *label = l;
                return t;
            }
            Term::Erase { body, .. } | Term::Copy { body, .. } | Term::Subst { body, .. } => cur = body,
        }
    }
}

/// Two passes: the first records the level of every atomic atom outside
/// erased arguments, the second uses them to place erased arguments.
fn translate(t: &LabelledTerm, level: usize, mode: Translation) -> Result<Net, NetError> {
    let builder = |known: BTreeMap<Name, usize>, final_pass: bool| Builder {
        net: Net::default(),
        wires: Vec::new(),
        forward: Vec::new(),
        mode,
        known,
        recording: !final_pass,
        final_pass,
    };
    let mut first = builder(BTreeMap::new(), false);
    let _ = first.translate(t, level, None);
    let mut b = builder(first.known, true);
    let frag = b.translate(t, level, None)?;
    Ok(b.finish(frag))
}

/// Call-by-value translation: abstractions are boxes, applications cut a
/// dereliction against the function.
pub fn translate_cbv(t: &LabelledTerm, level: usize) -> Result<Net, NetError> {
    translate(t, level, Translation::Cbv)
}

/// Call-by-name translation: arguments and substituted terms are boxed,
/// variables are derelictions.
pub fn translate_cbn(t: &LabelledTerm, level: usize) -> Result<Net, NetError> {
    translate(t, level, Translation::Cbn)
}

pub fn translate_with(t: &LabelledTerm, level: usize, mode: Translation) -> Result<Net, NetError> {
    translate(t, level, mode)
}

/// Translation of an unlabelled term: every label is empty, so every
/// constant sits at the box depth of its edge (auxiliary `t` one level
/// further out).
pub fn translate_unlabelled(t: &CTerm, mode: Translation) -> Result<Net, NetError> {
    translate(&t.map_labels(&mut |_| Label::default()), 0, mode)
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NetViolation {
    pub message: String,
}

/// Checks the structural invariants. With `strict`, also requires every
/// weight constant to sit at its edge's box depth (`t` one level lower),
/// which holds for translations of unlabelled terms.
pub fn validate(net: &Net, strict: bool) -> Vec<NetViolation> {
    let mut out = Vec::new();
    let mut flag = |m: String| out.push(NetViolation { message: m });
    let mut seen: BTreeMap<(NodeId, usize), usize> = BTreeMap::new();
    let mut roots = 0;
    let mut frees = BTreeSet::new();
    for (id, e) in &net.edges {
        for end in [&e.a, &e.b] {
            match end {
                Endpoint::Port { node, port } => match net.nodes.get(node) {
                    None => flag(format!("edge {id} touches missing node {node}")),
                    Some(n) if *port >= n.kind.arity() => flag(format!("edge {id} uses port {port} of {:?} {node}", n.kind)),
                    Some(_) => *seen.entry((*node, *port)).or_default() += 1,
                },
                Endpoint::Root => roots += 1,
                Endpoint::Free(x) => {
                    if !frees.insert(x.clone()) {
                        flag(format!("free variable {x} has several interface edges"));
                    }
                }
            }
        }
    }
    if roots != 1 {
        flag(format!("{roots} root interface edges"));
    }
    for (&id, n) in &net.nodes {
        for p in 0..n.kind.arity() {
            match seen.get(&(id, p)).copied().unwrap_or(0) {
                1 => {}
                0 => flag(format!("port {p} of {:?} {id} is dangling", n.kind)),
                k => flag(format!("port {p} of {:?} {id} is attached {k} times", n.kind)),
            }
        }
        if let Some(b) = n.in_box {
            if !net.boxes.contains_key(&b) {
                flag(format!("node {id} lies in missing box {b}"));
            }
        }
        if n.kind.is_door() {
            let ok = n.in_box.and_then(|b| net.boxes.get(&b)).is_some_and(|bx| {
                if n.kind == NodeKind::BangDoor {
                    bx.principal == id
                } else {
                    bx.auxiliaries.contains(&id)
                }
            });
            if !ok {
                flag(format!("door {id} is not registered with its box"));
            }
        }
    }
    for (&b, bx) in &net.boxes {
        if net.nodes.get(&bx.principal).map(|n| (n.kind, n.in_box)) != Some((NodeKind::BangDoor, Some(b))) {
            flag(format!("box {b} has a bad principal door"));
        }
        for a in &bx.auxiliaries {
            if net.nodes.get(a).map(|n| (n.kind, n.in_box)) != Some((NodeKind::WhyNotDoor, Some(b))) {
                flag(format!("box {b} has a bad auxiliary door {a}"));
            }
        }
        let mut cur = bx.parent;
        let mut hops = 0;
        while let Some(p) = cur {
            hops += 1;
            if p == b || hops > net.boxes.len() {
                flag(format!("box {b} is nested in itself"));
                break;
            }
            cur = net.boxes.get(&p).and_then(|x| x.parent);
        }
    }
    if !out.is_empty() {
        return out;
    }
    for (&id, e) in &net.edges {
        let (ba, bb) = (net.endpoint_box(&e.a), net.endpoint_box(&e.b));
        let interface = |end: &Endpoint| !matches!(end, Endpoint::Port { .. });
        if ba != bb && !(interface(&e.a) && bb.is_none() || interface(&e.b) && ba.is_none()) {
            out.push(NetViolation { message: format!("edge {id} crosses a box boundary outside a door") });
            continue;
        }
        if strict {
            let depth = net.box_depth(ba.or(bb));
            for a in e.weight.atoms() {
                let expected = if a.base == Base::T { depth.checked_sub(1) } else { Some(depth) };
                if Some(a.level) != expected {
                    out.push(NetViolation { message: format!("edge {id} at depth {depth} carries {a}") });
                }
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Closed cut elimination
// ---------------------------------------------------------------------------

/// Kind of rewrite performed by [`closed_cut_step`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CutKind {
    Splice,
    Multiplicative,
    Dereliction,
    Contraction,
    Weakening,
    Commutative,
}

/// Classifies a cut edge without rewriting.
pub fn cut_kind(net: &Net, cut: EdgeId) -> Result<CutKind, NetError> {
    let e = net.edges.get(&cut).ok_or(NetError::NoSuchEdge(cut))?;
    for end in [&e.a, &e.b] {
        if let Endpoint::Port { node, .. } = end {
            if matches!(net.nodes[node].kind, NodeKind::Ax | NodeKind::Cut) {
                return Ok(CutKind::Splice);
            }
        }
    }
    let (Endpoint::Port { node: n1, port: 0 }, Endpoint::Port { node: n2, port: 0 }) = (&e.a, &e.b) else {
        return Err(NetError::NotACut(cut));
    };
    let kinds = (net.nodes[n1].kind, net.nodes[n2].kind);
    use NodeKind::*;
    let bang_and = |k: NodeKind| kinds == (BangDoor, k) || kinds == (k, BangDoor);
    Ok(if kinds == (Tensor, Par) || kinds == (Par, Tensor) {
        CutKind::Multiplicative
    } else if bang_and(Derelict) {
        CutKind::Dereliction
    } else if bang_and(Fan) {
        CutKind::Contraction
    } else if bang_and(Weaken) {
        CutKind::Weakening
    } else if bang_and(WhyNotDoor) {
        CutKind::Commutative
    } else {
        return Err(NetError::NotACut(cut));
    })
}

/// One step of closed cut elimination at the given cut edge.
pub fn closed_cut_step(net: &Net, cut: EdgeId) -> Result<Net, NetError> {
    let kind = cut_kind(net, cut)?;
    let mut g = net.clone();
    let e = g.edges[&cut].clone();
    if kind == CutKind::Splice {
        let node = [&e.a, &e.b]
            .into_iter()
            .find_map(|end| match end {
                Endpoint::Port { node, .. } if matches!(g.nodes[node].kind, NodeKind::Ax | NodeKind::Cut) => Some(*node),
                _ => None,
            })
            .expect("splice node");
        g.splice(node, 0, 1);
        g.nodes.remove(&node);
        return Ok(g);
    }
    let (Endpoint::Port { node: n1, .. }, Endpoint::Port { node: n2, .. }) = (&e.a, &e.b) else { unreachable!() };
    let (n1, n2) = (*n1, *n2);
    if kind == CutKind::Multiplicative {
        let (t, p) = if g.nodes[&n1].kind == NodeKind::Tensor { (n1, n2) } else { (n2, n1) };
        let w = e.weight_from(&Endpoint::port(t, 0));
        g.edges.remove(&cut);
        for port in [1, 2] {
            let et = g.edge_at(t, port);
            let ep = g.edge_at(p, port);
            g.join_through(et, &Endpoint::port(t, port), &w, ep, &Endpoint::port(p, port));
        }
        g.nodes.remove(&t);
        g.nodes.remove(&p);
        return Ok(g);
    }
    let (door, other) = if g.nodes[&n1].kind == NodeKind::BangDoor && kind != CutKind::Commutative || g.nodes[&n2].kind == NodeKind::WhyNotDoor {
        (n1, n2)
    } else {
        (n2, n1)
    };
    let bx = g.nodes[&door].in_box.expect("door has a box");
    if !g.boxes[&bx].auxiliaries.is_empty() {
        return Err(NetError::NotClosed(bx));
    }
    let w = e.weight_from(&Endpoint::port(other, 0));
    match kind {
        CutKind::Dereliction => {
            g.edges.remove(&cut);
            let outer = g.edge_at(other, 1);
            let inner = g.edge_at(door, 1);
            g.join_through(outer, &Endpoint::port(other, 1), &w, inner, &Endpoint::port(door, 1));
            g.nodes.remove(&other);
            g.nodes.remove(&door);
            let parent = g.boxes.remove(&bx).unwrap().parent;
            for n in g.nodes.values_mut() {
                if n.in_box == Some(bx) {
                    n.in_box = parent;
                }
            }
            for b in g.boxes.values_mut() {
                if b.parent == Some(bx) {
                    b.parent = parent;
                }
            }
        }
        CutKind::Weakening => {
            let boxes = g.box_subtree(bx);
            let nodes = g.nodes_in(&boxes);
            g.edges.retain(|_, ed| {
                ![&ed.a, &ed.b].iter().any(|end| matches!(end, Endpoint::Port { node, .. } if nodes.contains(node) || *node == other))
            });
            for n in nodes {
                g.nodes.remove(&n);
            }
            g.nodes.remove(&other);
            for b in boxes {
                g.boxes.remove(&b);
            }
        }
        CutKind::Contraction => {
            g.edges.remove(&cut);
            let copy_door = duplicate_box(&mut g, bx);
            let left = g.edge_at(other, 1);
            let right = g.edge_at(other, 2);
            let (l_far, r_far) = {
                let le = &g.edges[&left];
                let re = &g.edges[&right];
                (le.other(&Endpoint::port(other, 1)).clone(), re.other(&Endpoint::port(other, 2)).clone())
            };
            let wl = compose(&g.edges[&left].weight_from(&l_far), &w);
            let wr = compose(&g.edges[&right].weight_from(&r_far), &w);
            g.edges.remove(&left);
            g.edges.remove(&right);
            g.add_edge(l_far, Endpoint::port(door, 0), wl);
            g.add_edge(r_far, Endpoint::port(copy_door, 0), wr);
            g.nodes.remove(&other);
        }
        CutKind::Commutative => {
            let host = g.nodes[&other].in_box.expect("aux door has a box");
            g.edges.remove(&cut);
            let inner = g.edge_at(other, 1);
            let far = g.edges[&inner].other(&Endpoint::port(other, 1)).clone();
            let wi = compose(&g.edges[&inner].weight_from(&far), &w);
            g.edges.remove(&inner);
            g.add_edge(far, Endpoint::port(door, 0), wi);
            g.nodes.remove(&other);
            g.boxes.get_mut(&host).unwrap().auxiliaries.retain(|&a| a != other);
            g.boxes.get_mut(&bx).unwrap().parent = Some(host);
        }
        _ => unreachable!(),
    }
    Ok(g)
}

/// Copies box `bx` with all its contents; the copy's principal door is left
/// unattached on its conclusion. Returns the new principal door.
fn duplicate_box(g: &mut Net, bx: BoxId) -> NodeId {
    let boxes = g.box_subtree(bx);
    let nodes = g.nodes_in(&boxes);
    let mut box_map = BTreeMap::new();
    for &b in &boxes {
        let id = g.fresh();
        box_map.insert(b, id);
    }
    let mut node_map = BTreeMap::new();
    for &n in &nodes {
        let id = g.fresh();
        node_map.insert(n, id);
    }
    for (&old, &new) in &node_map {
        let n = g.nodes[&old].clone();
        g.nodes.insert(new, Node { kind: n.kind, in_box: n.in_box.map(|b| box_map[&b]) });
    }
    for (&old, &new) in &box_map {
        let b = g.boxes[&old].clone();
        g.boxes.insert(
            new,
            NetBox {
                principal: node_map[&b.principal],
                auxiliaries: b.auxiliaries.iter().map(|a| node_map[a]).collect(),
                parent: if old == bx { b.parent } else { b.parent.map(|p| box_map[&p]) },
            },
        );
    }
    let map_end = |end: &Endpoint| match end {
        Endpoint::Port { node, port } => node_map.get(node).map(|&n| Endpoint::port(n, *port)),
        _ => None,
    };
    let internal: Vec<Edge> = g
        .edges
        .values()
        .filter_map(|e| match (map_end(&e.a), map_end(&e.b)) {
            (Some(a), Some(b)) => Some(Edge { a, b, weight: e.weight.clone() }),
            _ => None,
        })
        .collect();
    for e in internal {
        g.add_edge(e.a, e.b, e.weight);
    }
    node_map[&g.boxes[&bx].principal]
}

// ---------------------------------------------------------------------------
// Isomorphism
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IsoMode {
    /// Kinds, ports, boxes and weights.
    Weighted,
    /// Weights ignored.
    Structural,
}

type CanonEnd = (usize, usize);

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct Canon {
    nodes: Vec<(NodeKind, Option<usize>)>,
    boxes: Vec<(usize, Vec<usize>, Option<usize>)>,
    edges: Vec<(CanonEnd, CanonEnd, String)>,
}

/// Numbers nodes in the order a breadth-first walk meets them. Interface
/// endpoints are `(0, i)`; node ports are `(k + 1, port)`.
fn canon_walk(net: &Net, starts: Vec<Endpoint>, order: &mut BTreeMap<NodeId, usize>, ports: &BTreeMap<(NodeId, usize), EdgeId>) {
    let mut queue: VecDeque<Endpoint> = starts.into();
    while let Some(from) = queue.pop_front() {
        let eid = match &from {
            Endpoint::Port { node, port } => ports.get(&(*node, *port)).copied(),
            other => net.edges.iter().find(|(_, e)| e.a == *other || e.b == *other).map(|(&id, _)| id),
        };
        let Some(eid) = eid else { continue };
        let to = net.edges[&eid].other(&from).clone();
        if let Endpoint::Port { node, .. } = to {
            if !order.contains_key(&node) {
                order.insert(node, order.len());
                for p in 0..net.nodes[&node].kind.arity() {
                    queue.push_back(Endpoint::port(node, p));
                }
            }
        }
    }
}

fn canonical_form(net: &Net, mode: IsoMode) -> Canon {
    let ports = net.port_map();
    let mut starts = vec![Endpoint::Root];
    let mut frees: Vec<Name> = net
        .edges
        .values()
        .flat_map(|e| [&e.a, &e.b])
        .filter_map(|end| match end {
            Endpoint::Free(x) => Some(x.clone()),
            _ => None,
        })
        .collect();
    frees.sort();
    starts.extend(frees.iter().cloned().map(Endpoint::Free));
    let mut order = BTreeMap::new();
    canon_walk(net, starts, &mut order, &ports);
    // Components not reachable from the interface: pick, repeatedly, the
    // start node giving the smallest encoding of its component.
    loop {
        let rest: Vec<NodeId> = net.nodes.keys().filter(|n| !order.contains_key(n)).copied().collect();
        if rest.is_empty() {
            break;
        }
        let mut best: Option<(Canon, BTreeMap<NodeId, usize>)> = None;
        for &n in &rest {
            let mut trial = order.clone();
            trial.insert(n, trial.len());
            let starts = (0..net.nodes[&n].kind.arity()).map(|p| Endpoint::port(n, p)).collect();
            canon_walk(net, starts, &mut trial, &ports);
            let enc = encode(net, &trial, &frees, mode);
            if best.as_ref().is_none_or(|(b, _)| enc < *b) {
                best = Some((enc, trial));
            }
        }
        order = best.unwrap().1;
    }
    encode(net, &order, &frees, mode)
}

fn encode(net: &Net, order: &BTreeMap<NodeId, usize>, frees: &[Name], mode: IsoMode) -> Canon {
    let box_key = |b: BoxId| order.get(&net.boxes[&b].principal).copied().unwrap_or(usize::MAX);
    let mut nodes: Vec<(usize, (NodeKind, Option<usize>))> = order
        .iter()
        .map(|(&n, &k)| (k, (net.nodes[&n].kind, net.nodes[&n].in_box.map(box_key))))
        .collect();
    nodes.sort();
    let mut boxes: Vec<(usize, Vec<usize>, Option<usize>)> = net
        .boxes
        .iter()
        .filter(|(_, b)| order.contains_key(&b.principal))
        .map(|(_, b)| {
            let mut aux: Vec<usize> = b.auxiliaries.iter().filter_map(|a| order.get(a).copied()).collect();
            aux.sort();
            (order[&b.principal], aux, b.parent.map(box_key))
        })
        .collect();
    boxes.sort();
    let end = |e: &Endpoint| -> CanonEnd {
        match e {
            Endpoint::Root => (0, 0),
            Endpoint::Free(x) => (0, 1 + frees.iter().position(|f| f == x).unwrap_or(usize::MAX - 1)),
            Endpoint::Port { node, port } => (1 + order.get(node).copied().unwrap_or(usize::MAX - 1), *port),
        }
    };
    let mut edges: Vec<(CanonEnd, CanonEnd, String)> = net
        .edges
        .values()
        .map(|e| {
            let (a, b) = (end(&e.a), end(&e.b));
            let w = |w: &Weight| match mode {
                IsoMode::Weighted => w.to_string(),
                IsoMode::Structural => String::new(),
            };
            if a <= b {
                (a, b, w(&e.weight))
            } else {
                (b, a, w(&involute(&e.weight)))
            }
        })
        .collect();
    edges.sort();
    Canon { nodes: nodes.into_iter().map(|(_, n)| n).collect(), boxes, edges }
}

/// True if the nets are equal up to renaming of nodes, edges and boxes.
pub fn iso_check(a: &Net, b: &Net) -> bool {
    iso_check_mode(a, b, IsoMode::Weighted)
}

pub fn iso_check_mode(a: &Net, b: &Net, mode: IsoMode) -> bool {
    a.nodes.len() == b.nodes.len()
        && a.edges.len() == b.edges.len()
        && a.boxes.len() == b.boxes.len()
        && canonical_form(a, mode) == canonical_form(b, mode)
}

// ---------------------------------------------------------------------------
// Export
// ---------------------------------------------------------------------------

pub fn to_json(net: &Net) -> String {
    serde_json::to_string_pretty(&NetJson::from(net)).expect("nets serialize")
}

pub fn from_json(text: &str) -> Result<Net, serde_json::Error> {
    let j: NetJson = serde_json::from_str(text)?;
    Ok(j.into())
}

/// Serialized form. Weights are stored in their printed syntax.
#[derive(Debug, Serialize, Deserialize)]
struct NetJson {
    nodes: Vec<NodeJson>,
    edges: Vec<EdgeJson>,
    boxes: Vec<BoxJson>,
}

#[derive(Debug, Serialize, Deserialize)]
struct NodeJson {
    id: NodeId,
    kind: NodeKind,
    #[serde(rename = "box")]
    in_box: Option<BoxId>,
}

#[derive(Debug, Serialize, Deserialize)]
struct EdgeJson {
    id: EdgeId,
    a: Endpoint,
    b: Endpoint,
    weight: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct BoxJson {
    id: BoxId,
    principal: NodeId,
    auxiliaries: Vec<NodeId>,
    parent: Option<BoxId>,
}

impl From<&Net> for NetJson {
    fn from(n: &Net) -> Self {
        NetJson {
            nodes: n.nodes.iter().map(|(&id, x)| NodeJson { id, kind: x.kind, in_box: x.in_box }).collect(),
            edges: n
                .edges
                .iter()
                .map(|(&id, e)| EdgeJson { id, a: e.a.clone(), b: e.b.clone(), weight: e.weight.to_string() })
                .collect(),
            boxes: n
                .boxes
                .iter()
                .map(|(&id, b)| BoxJson { id, principal: b.principal, auxiliaries: b.auxiliaries.clone(), parent: b.parent })
                .collect(),
        }
    }
}

impl From<NetJson> for Net {
    fn from(j: NetJson) -> Self {
        let mut net = Net::default();
        let mut max = 0;
        for n in j.nodes {
            max = max.max(n.id);
            net.nodes.insert(n.id, Node { kind: n.kind, in_box: n.in_box });
        }
        for e in j.edges {
            max = max.max(e.id);
            let weight = crate::algebra::parse_weight(&e.weight).unwrap_or(Weight::Zero);
            net.edges.insert(e.id, Edge { a: e.a, b: e.b, weight });
        }
        for b in j.boxes {
            max = max.max(b.id);
            net.boxes.insert(b.id, NetBox { principal: b.principal, auxiliaries: b.auxiliaries, parent: b.parent });
        }
        net.next_id = max;
        net
    }
}

/// Graphviz rendering: boxes become clusters, edges are labelled with
/// their weights.
pub fn to_dot(net: &Net) -> String {
    let mut s = String::from("digraph net {\n  node [shape=circle, fontsize=10];\n");
    fn emit_box(net: &Net, b: Option<BoxId>, indent: usize, s: &mut String) {
        let pad = "  ".repeat(indent);
        for (id, n) in net.nodes.iter().filter(|(_, n)| n.in_box == b) {
            let _ = writeln!(s, "{pad}n{id} [label=\"{}\"];", n.kind.short());
        }
        for (id, _) in net.boxes.iter().filter(|(_, x)| x.parent == b) {
            let _ = writeln!(s, "{pad}subgraph cluster_b{id} {{");
            let _ = writeln!(s, "{pad}  label=\"box {id}\";");
            emit_box(net, Some(*id), indent + 1, s);
            let _ = writeln!(s, "{pad}}}");
        }
    }
    emit_box(net, None, 1, &mut s);
    let name = |e: &Endpoint, s: &mut String| match e {
        Endpoint::Port { node, .. } => format!("n{node}"),
        Endpoint::Root => {
            if !s.contains("root [") {
                s.push_str("  root [shape=plaintext];\n");
            }
            "root".to_string()
        }
        Endpoint::Free(x) => {
            let id = format!("free_{}", x.replace('\'', "_p"));
            if !s.contains(&format!("{id} [")) {
                let _ = writeln!(s, "  {id} [shape=plaintext, label=\"{x}\"];");
            }
            id
        }
    };
    for e in net.edges.values() {
        let a = name(&e.a, &mut s);
        let b = name(&e.b, &mut s);
        let _ = writeln!(s, "  {a} -> {b} [label=\"{}\"];", e.weight);
    }
    s.push_str("}\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::label::{initialize, parse_labelled};
    use crate::term::{compile, parse_cterm, parse_lambda, FreshSupply};

    fn net(src: &str, mode: Translation) -> Net {
        translate_with(&parse_labelled(src).unwrap(), 0, mode).unwrap()
    }

    #[test]
    fn variable_is_a_wire() {
        let n = net("x^{a}", Translation::Cbv);
        assert!(n.nodes.is_empty());
        assert_eq!(n.edges.len(), 1);
        let e = n.edges.values().next().unwrap();
        assert_eq!((e.a.clone(), e.b.clone(), e.weight.clone()), (Endpoint::Root, Endpoint::Free("x".into()), Weight::one()));
        let n = net("x^{a}", Translation::Cbn);
        assert_eq!(n.count(NodeKind::Derelict), 1);
        assert!(validate(&n, true).is_empty());
    }

    #[test]
    fn cbv_counts_for_the_application_example() {
        // (λx.λy.xy)(λx.x): the outer application gives one tensor, one
        // dereliction and the only cut; each of the three abstractions is a
        // box; the inner application x y adds a second dereliction.
        let (c, s) = compile(&parse_lambda("(\\x.\\y.x y)(\\x.x)").unwrap(), FreshSupply::new());
        let (t, _) = initialize(&c, s);
        let n = translate_cbv(&t, 0).unwrap();
        assert!(validate(&n, true).is_empty(), "{:?}", validate(&n, true));
        assert_eq!(n.cuts().len(), 1);
        assert_eq!(n.boxes.len(), 3);
        assert_eq!(n.count(NodeKind::Derelict), 2);
        assert_eq!(n.count(NodeKind::WhyNotDoor), 1);
    }

    #[test]
    fn cbn_boxes_only_the_argument() {
        let n = net("((\\x.x^{d})^{a} (\\y.y^{e})^{b})^{c}", Translation::Cbn);
        assert_eq!(n.boxes.len(), 1);
        assert!(validate(&n, false).is_empty());
        let door = n.boxes.values().next().unwrap().principal;
        let inner_par = n
            .nodes
            .iter()
            .find(|(_, x)| x.kind == NodeKind::Par && x.in_box.is_some())
            .map(|(&id, _)| id)
            .unwrap();
        assert_eq!(n.box_depth(n.nodes[&inner_par].in_box), 1);
        assert_eq!(n.nodes[&door].in_box, n.nodes[&inner_par].in_box);
    }

    #[test]
    fn fan_premises_carry_r_and_s() {
        let n = net("(\\x.copy[x->y,z].(y^{a} z^{b})^{c})^{d}", Translation::Cbv);
        let fan = n.nodes.iter().find(|(_, x)| x.kind == NodeKind::Fan).map(|(&id, _)| id).unwrap();
        let ports = n.port_map();
        let left = &n.edges[&ports[&(fan, 1)]].weight;
        let right = &n.edges[&ports[&(fan, 2)]].weight;
        assert_eq!(left.atoms().last().unwrap().base, Base::R);
        assert_eq!(right.atoms().last().unwrap().base, Base::S);
    }

    #[test]
    fn validation_catches_dangling_and_levels() {
        let mut n = net("(\\x.x^{b})^{a}", Translation::Cbv);
        assert!(validate(&n, true).is_empty());
        let (&some_edge, _) = n.edges.iter().find(|(_, e)| matches!(e.a, Endpoint::Port { .. })).unwrap();
        let mut broken = n.clone();
        broken.edges.remove(&some_edge);
        assert!(!validate(&broken, false).is_empty());
        // A constant at the wrong level for its box depth.
        let inner = n.edges.iter().find(|(&id, _)| n.edge_depth(id) == 1).map(|(&id, _)| id).unwrap();
        n.edges.get_mut(&inner).unwrap().weight = Weight::atom(WAtom::new(Base::Q, 0));
        assert!(!validate(&n, true).is_empty());
        assert!(validate(&n, false).is_empty());
    }

    #[test]
    fn multiplicative_cut() {
        let n = net("((\\x.x^{d})^{a} (\\y.y^{e})^{b})^{c}", Translation::Cbn);
        let cuts = n.cuts();
        assert_eq!(cuts.len(), 1);
        assert_eq!(cut_kind(&n, cuts[0]).unwrap(), CutKind::Multiplicative);
        let m = closed_cut_step(&n, cuts[0]).unwrap();
        assert_eq!(m.nodes.len(), n.nodes.len() - 2);
        // The two premise pairs are now directly connected; one of them
        // forms a dereliction cut against the argument box.
        assert!(validate(&m, false).is_empty());
        assert_eq!(m.cuts().len(), 1);
        assert_eq!(cut_kind(&m, m.cuts()[0]).unwrap(), CutKind::Dereliction);
        let done = closed_cut_step(&m, m.cuts()[0]).unwrap();
        assert!(validate(&done, false).is_empty());
        assert!(done.boxes.is_empty());
        assert!(done.cuts().is_empty());
    }

    #[test]
    fn weakening_and_closedness() {
        let t = parse_cterm("(eps[x].\\y.y)[\\z.z/x]").unwrap();
        let n = translate_unlabelled(&t, Translation::Cbn).unwrap();
        let cut = n.cuts()[0];
        assert_eq!(cut_kind(&n, cut).unwrap(), CutKind::Weakening);
        let m = closed_cut_step(&n, cut).unwrap();
        assert!(m.boxes.is_empty());
        assert!(iso_check(&m, &translate_unlabelled(&parse_cterm("\\y.y").unwrap(), Translation::Cbn).unwrap()));

        let open = parse_cterm("(\\x.x w) (\\y.y)").unwrap();
        let n = translate_unlabelled(&open, Translation::Cbv).unwrap();
        let cut = n.cuts()[0];
        assert!(matches!(closed_cut_step(&n, cut), Err(NetError::NotClosed(_))));
    }

    #[test]
    fn contraction_duplicates_the_box() {
        let t = parse_cterm("(copy[x->y,z].y z)[\\u.u/x]").unwrap();
        let n = translate_unlabelled(&t, Translation::Cbn).unwrap();
        let cut = n.cuts()[0];
        assert_eq!(cut_kind(&n, cut).unwrap(), CutKind::Contraction);
        let m = closed_cut_step(&n, cut).unwrap();
        assert_eq!(m.boxes.len(), n.boxes.len() + 1);
        assert!(validate(&m, false).is_empty());
        assert!(iso_check_mode(
            &m,
            &translate_unlabelled(&parse_cterm("(y z)[\\u.u/y][\\u.u/z]").unwrap(), Translation::Cbn).unwrap(),
            IsoMode::Structural
        ));
    }

    #[test]
    fn iso_basics() {
        let a = net("((\\x.x^{d})^{a} (\\y.y^{e})^{b})^{c}", Translation::Cbv);
        assert!(iso_check(&a, &a));
        let b = from_json(&to_json(&a)).unwrap();
        assert!(iso_check(&a, &b));
        let mut renamed = Net::default();
        // Same net built in a different id order.
        let t = parse_labelled("((\\x.x^{d})^{a} (\\y.y^{e})^{b})^{c}").unwrap();
        let _ = renamed.add_node(NodeKind::Ax, None);
        let mut shifted = translate_cbv(&t, 0).unwrap();
        shifted.next_id += 100;
        let relabel: BTreeMap<usize, usize> = shifted.nodes.keys().map(|&k| (k, k + 1000)).collect();
        let nodes = shifted.nodes.iter().map(|(k, v)| (relabel[k], v.clone())).collect();
        let fix = |e: &Endpoint| match e {
            Endpoint::Port { node, port } => Endpoint::port(relabel[node], *port),
            o => o.clone(),
        };
        let edges = shifted.edges.values().enumerate().map(|(i, e)| (i, Edge { a: fix(&e.b), b: fix(&e.a), weight: involute(&e.weight) })).collect();
        let boxes = shifted
            .boxes
            .iter()
            .map(|(&k, b)| (k, NetBox { principal: relabel[&b.principal], auxiliaries: b.auxiliaries.iter().map(|a| relabel[a]).collect(), parent: b.parent }))
            .collect();
        let moved = Net { nodes, edges, boxes, next_id: 5000 };
        assert!(iso_check(&a, &moved));
        let tensor = net("(x^{a} y^{b})^{c}", Translation::Cbn);
        let par = net("(\\x.(x^{a} y^{b})^{c})^{d}", Translation::Cbn);
        assert!(!iso_check_mode(&tensor, &par, IsoMode::Structural));
    }

    #[test]
    fn dot_export_has_clusters() {
        let n = net("(\\x.x^{b})^{a}", Translation::Cbv);
        let dot = to_dot(&n);
        assert!(dot.contains("subgraph cluster_b"));
        assert!(dot.starts_with("digraph net {"));
        let wire = to_json(&net("x^{a}", Translation::Cbv));
        assert_eq!(serde_json::from_str::<serde_json::Value>(&wire).unwrap()["edges"].as_array().unwrap().len(), 1);
    }
}
