//! Port-graph IR for string diagrams.
//!
//! Terms are lowered into a graph whose nodes are generator boxes and
//! copy/discard dots; identities and symmetries disappear into the wiring and
//! unit wires vanish with flattening. [`normalize`] then brings the
//! feedback-free part into a canonical form in which equal morphisms of the
//! free Cartesian category produce identical graphs.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use super::object::{Factor, FlatType};
use super::term::MorphismTerm;
use super::DiagramError;

#[derive(Clone, Debug, Eq, Hash, Ord, PartialEq, PartialOrd)]
pub enum NodeKind {
    Generator(String),
    Copy,
    Discard,
    /// Holds the previous value of a feedback state wire.
    Delay,
    /// A feedback subterm kept as a black box.
    Opaque(String),
}

impl NodeKind {
    fn label(&self) -> String {
        match self {
            NodeKind::Generator(n) => n.clone(),
            NodeKind::Copy => "copy".into(),
            NodeKind::Discard => "discard".into(),
            NodeKind::Delay => "delay".into(),
            NodeKind::Opaque(t) => t.clone(),
        }
    }

    fn is_structural(&self) -> bool {
        matches!(self, NodeKind::Copy | NodeKind::Discard)
    }
}

#[derive(Clone, Debug, Eq, Hash, PartialEq)]
pub struct Node {
    pub kind: NodeKind,
    pub inputs: Vec<Factor>,
    pub outputs: Vec<Factor>,
}

#[derive(Clone, Copy, Debug, Eq, Hash, Ord, PartialEq, PartialOrd)]
pub enum Source {
    Input(usize),
    Node { node: usize, port: usize },
}

#[derive(Clone, Copy, Debug, Eq, Hash, Ord, PartialEq, PartialOrd)]
pub enum Target {
    Output(usize),
    Node { node: usize, port: usize },
}

#[derive(Clone, Debug, Eq, Hash, PartialEq)]
pub struct Wire {
    pub from: Source,
    pub to: Target,
    pub ty: Factor,
    /// Set on wires leaving a `Delay` node, i.e. wires that carry state back.
    pub feedback: bool,
}

#[derive(Clone, Debug, Eq, Hash, PartialEq)]
pub struct PortDiagram {
    pub nodes: Vec<Node>,
    /// Sorted by target; every target port has exactly one wire.
    pub wires: Vec<Wire>,
    pub inputs: Vec<Factor>,
    pub outputs: Vec<Factor>,
}

impl PortDiagram {
    pub fn has_feedback(&self) -> bool {
        self.wires.iter().any(|w| w.feedback)
            || self
                .nodes
                .iter()
                .any(|n| matches!(n.kind, NodeKind::Delay | NodeKind::Opaque(_)))
    }

    pub fn feedback_wires(&self) -> impl Iterator<Item = &Wire> {
        self.wires.iter().filter(|w| w.feedback)
    }

    pub fn count_nodes(&self, pred: impl Fn(&Node) -> bool) -> usize {
        self.nodes.iter().filter(|n| pred(n)).count()
    }

    /// Structural lowering: copy and discard nodes stay exactly as written in
    /// the term and feedback loops are expanded through `Delay` nodes.
    pub fn lower(term: &MorphismTerm) -> Result<PortDiagram, DiagramError> {
        lower_with(term, false)
    }

    /// Graphviz rendering; output is a pure function of the diagram.
    pub fn to_dot(&self) -> String {
        let mut s = String::new();
        s.push_str("digraph diagram {\n  rankdir=LR;\n  node [fontname=\"Helvetica\"];\n");
        s.push_str("  { rank=source;");
        for (i, f) in self.inputs.iter().enumerate() {
            let _ = write!(s, " in{i} [label=\"{f}\", shape=plaintext];");
        }
        s.push_str(" }\n  { rank=sink;");
        for (i, f) in self.outputs.iter().enumerate() {
            let _ = write!(s, " out{i} [label=\"{f}\", shape=plaintext];");
        }
        s.push_str(" }\n");
        for (i, n) in self.nodes.iter().enumerate() {
            let shape = match n.kind {
                NodeKind::Copy | NodeKind::Discard => "point",
                NodeKind::Delay => "diamond",
                _ => "box",
            };
            let label = n.kind.label().replace('"', "\\\"");
            let _ = writeln!(s, "  n{i} [label=\"{label}\", shape={shape}];");
        }
        for w in &self.wires {
            let from = match w.from {
                Source::Input(i) => format!("in{i}"),
                Source::Node { node, .. } => format!("n{node}"),
            };
            let to = match w.to {
                Target::Output(i) => format!("out{i}"),
                Target::Node { node, .. } => format!("n{node}"),
            };
            let style = if w.feedback { ", style=dashed" } else { "" };
            let _ = writeln!(s, "  {from} -> {to} [label=\"{}\"{style}];", w.ty);
        }
        s.push_str("}\n");
        s
    }
}

struct Builder {
    nodes: Vec<Node>,
    wires: Vec<Wire>,
    opaque_feedback: bool,
}

type Port = (Source, Factor);

impl Builder {
    fn node(&mut self, kind: NodeKind, inputs: Vec<Port>, outputs: Vec<Factor>) -> usize {
        let id = self.nodes.len();
        let in_tys = inputs.iter().map(|(_, t)| t.clone()).collect();
        for (port, (src, ty)) in inputs.into_iter().enumerate() {
            self.connect(src, Target::Node { node: id, port }, ty);
        }
        self.nodes.push(Node {
            kind,
            inputs: in_tys,
            outputs,
        });
        id
    }

    fn connect(&mut self, from: Source, to: Target, ty: Factor) {
        self.wires.push(Wire {
            from,
            to,
            ty,
            feedback: false,
        });
    }

    fn outputs_of(id: usize, tys: &[Factor]) -> Vec<Port> {
        tys.iter()
            .enumerate()
            .map(|(port, t)| (Source::Node { node: id, port }, t.clone()))
            .collect()
    }

    fn lower(&mut self, t: &MorphismTerm, inputs: Vec<Port>) -> Result<Vec<Port>, DiagramError> {
        Ok(match t {
            MorphismTerm::Gen(g) => {
                let cod = g.cod.flatten().0;
                let id = self.node(NodeKind::Generator(g.name.clone()), inputs, cod.clone());
                Self::outputs_of(id, &cod)
            }
            MorphismTerm::Id(_) => inputs,
            MorphismTerm::Compose(f, g) => {
                let mid = self.lower(f, inputs)?;
                self.lower(g, mid)?
            }
            MorphismTerm::Tensor(f, g) => {
                let k = f.dom()?.len();
                let mut inputs = inputs;
                let rest = inputs.split_off(k);
                let mut out = self.lower(f, inputs)?;
                out.extend(self.lower(g, rest)?);
                out
            }
            MorphismTerm::Symmetry(x, _) => {
                let k = x.flatten().len();
                let mut inputs = inputs;
                let mut rest = inputs.split_off(k);
                rest.extend(inputs);
                rest
            }
            MorphismTerm::Copy(_) => {
                let mut left = Vec::new();
                let mut right = Vec::new();
                for (src, ty) in inputs {
                    let id = self.node(NodeKind::Copy, vec![(src, ty.clone())], vec![ty.clone(), ty.clone()]);
                    left.push((Source::Node { node: id, port: 0 }, ty.clone()));
                    right.push((Source::Node { node: id, port: 1 }, ty));
                }
                left.extend(right);
                left
            }
            MorphismTerm::Discard(_) => {
                for port in inputs {
                    self.node(NodeKind::Discard, vec![port], vec![]);
                }
                vec![]
            }
            MorphismTerm::Feedback(s, body) => {
                let (_, cod) = t.infer_type()?;
                if self.opaque_feedback {
                    let id = self.node(NodeKind::Opaque(t.to_string()), inputs, cod.0.clone());
                    return Ok(Self::outputs_of(id, &cod.0));
                }
                let state = s.flatten();
                let (body_dom, _) = body.infer_type()?;
                let a = body_dom.len() - state.len();
                let mut delays = Vec::new();
                let mut inputs = inputs;
                for (j, sf) in state.factors().iter().enumerate() {
                    // the delay node's input is wired once the body is lowered
                    let id = self.nodes.len();
                    self.nodes.push(Node {
                        kind: NodeKind::Delay,
                        inputs: vec![sf.clone()],
                        outputs: vec![body_dom.factors()[a + j].clone()],
                    });
                    delays.push(id);
                    inputs.push((Source::Node { node: id, port: 0 }, body_dom.factors()[a + j].clone()));
                }
                let mut outs = self.lower(body, inputs)?;
                let state_outs = outs.split_off(outs.len() - state.len());
                for (d, (src, ty)) in delays.into_iter().zip(state_outs) {
                    self.connect(src, Target::Node { node: d, port: 0 }, ty);
                }
                outs
            }
        })
    }
}

fn lower_with(term: &MorphismTerm, opaque_feedback: bool) -> Result<PortDiagram, DiagramError> {
    let (dom, cod) = term.infer_type()?;
    let mut b = Builder {
        nodes: Vec::new(),
        wires: Vec::new(),
        opaque_feedback,
    };
    let inputs = dom
        .factors()
        .iter()
        .enumerate()
        .map(|(i, f)| (Source::Input(i), f.clone()))
        .collect();
    let outs = b.lower(term, inputs)?;
    for (j, (src, ty)) in outs.into_iter().enumerate() {
        b.connect(src, Target::Output(j), ty);
    }
    for w in &mut b.wires {
        if let Source::Node { node, .. } = w.from {
            w.feedback = b.nodes[node].kind == NodeKind::Delay;
        }
    }
    b.wires.sort_by_key(|w| w.to);
    Ok(PortDiagram {
        nodes: b.nodes,
        wires: b.wires,
        inputs: dom.0,
        outputs: cod.0,
    })
}

/// Lower `term` and bring it into canonical form.
///
/// Feedback subterms become opaque boxes labelled by their printed term.
pub fn normalize(term: &MorphismTerm) -> Result<PortDiagram, DiagramError> {
    canonical_form(&lower_with(term, true)?)
}

/// Whether two normalized, feedback-free diagrams denote the same morphism.
pub fn diagrams_equal(a: &PortDiagram, b: &PortDiagram) -> Result<bool, DiagramError> {
    if a.has_feedback() || b.has_feedback() {
        return Err(DiagramError::UnsupportedFeedbackEquality);
    }
    Ok(canonical_form(a)? == canonical_form(b)?)
}

#[derive(Clone, Copy, Debug, Eq, Hash, Ord, PartialEq, PartialOrd)]
enum CSrc {
    Input(usize),
    Node(usize, usize),
}

/// Canonical representative of a diagram modulo the Cartesian laws.
///
/// Copies are resolved into plain fan-out, discards into absence of use.
/// Generator nodes whose outputs are all unused are dropped (discard
/// naturality), identical generator applications are merged (copy
/// naturality), and the survivors are numbered by a key built level by level
/// from the canonical numbers of their inputs, with boundary ports pinned.
/// Fan-out is finally re-expressed as left-nested copy chains in canonical
/// consumer order and unused sources get a discard.
pub fn canonical_form(d: &PortDiagram) -> Result<PortDiagram, DiagramError> {
    if d.nodes.iter().any(|n| n.kind == NodeKind::Delay) {
        return Err(DiagramError::UnsupportedFeedbackEquality);
    }
    let src_of: HashMap<Target, Source> = d.wires.iter().map(|w| (w.to, w.from)).collect();
    let input_src = |node: usize, port: usize| -> Result<Source, DiagramError> {
        src_of
            .get(&Target::Node { node, port })
            .copied()
            .ok_or_else(|| DiagramError::MalformedDiagram(format!("node {node} port {port} is unwired")))
    };
    let resolve = |mut s: Source| -> Result<Source, DiagramError> {
        let mut steps = 0;
        while let Source::Node { node, .. } = s {
            if d.nodes[node].kind != NodeKind::Copy {
                break;
            }
            s = input_src(node, 0)?;
            steps += 1;
            if steps > d.nodes.len() {
                return Err(DiagramError::MalformedDiagram("copy cycle".into()));
            }
        }
        Ok(s)
    };

    // liveness from the output boundary
    let mut live = BTreeSet::new();
    let mut stack = Vec::new();
    for j in 0..d.outputs.len() {
        let s = src_of
            .get(&Target::Output(j))
            .copied()
            .ok_or_else(|| DiagramError::MalformedDiagram(format!("output {j} is unwired")))?;
        stack.push(resolve(s)?);
    }
    while let Some(s) = stack.pop() {
        if let Source::Node { node, .. } = s {
            if d.nodes[node].kind.is_structural() {
                return Err(DiagramError::MalformedDiagram("discard output used".into()));
            }
            if live.insert(node) {
                for port in 0..d.nodes[node].inputs.len() {
                    stack.push(resolve(input_src(node, port)?)?);
                }
            }
        }
    }

    // levels over the live generator nodes
    let mut level: HashMap<usize, usize> = HashMap::new();
    fn level_of(
        n: usize,
        d: &PortDiagram,
        level: &mut HashMap<usize, usize>,
        inputs: &dyn Fn(usize) -> Result<Vec<Source>, DiagramError>,
        depth: usize,
    ) -> Result<usize, DiagramError> {
        if let Some(&l) = level.get(&n) {
            return Ok(l);
        }
        if depth > d.nodes.len() {
            return Err(DiagramError::MalformedDiagram("cycle without feedback marking".into()));
        }
        let mut l = 0;
        for s in inputs(n)? {
            if let Source::Node { node, .. } = s {
                l = l.max(level_of(node, d, level, inputs, depth + 1)? + 1);
            }
        }
        level.insert(n, l);
        Ok(l)
    }
    let resolved_inputs = |n: usize| -> Result<Vec<Source>, DiagramError> {
        (0..d.nodes[n].inputs.len())
            .map(|p| input_src(n, p).and_then(resolve))
            .collect()
    };
    for &n in &live {
        level_of(n, d, &mut level, &resolved_inputs, 0)?;
    }
    let max_level = level.values().copied().max();

    // canonical numbering, merging identical applications
    type Key = (NodeKind, Vec<CSrc>, Vec<Factor>, Vec<Factor>);
    let mut cid_of: HashMap<usize, usize> = HashMap::new();
    let mut keys: Vec<Key> = Vec::new();
    for l in 0..=max_level.unwrap_or(0) {
        if max_level.is_none() {
            break;
        }
        let mut at_level: BTreeMap<Key, Vec<usize>> = BTreeMap::new();
        for (&n, &nl) in &level {
            if nl != l {
                continue;
            }
            let ins = resolved_inputs(n)?
                .into_iter()
                .map(|s| match s {
                    Source::Input(i) => CSrc::Input(i),
                    Source::Node { node, port } => CSrc::Node(cid_of[&node], port),
                })
                .collect();
            let node = &d.nodes[n];
            at_level
                .entry((node.kind.clone(), ins, node.inputs.clone(), node.outputs.clone()))
                .or_default()
                .push(n);
        }
        for (key, raws) in at_level {
            let cid = keys.len();
            for r in raws {
                cid_of.insert(r, cid);
            }
            keys.push(key);
        }
    }

    // consumers of every canonical source
    let mut consumers: BTreeMap<CSrc, Vec<Target>> = BTreeMap::new();
    for (cid, (_, ins, _, _)) in keys.iter().enumerate() {
        for (port, s) in ins.iter().enumerate() {
            consumers.entry(*s).or_default().push(Target::Node { node: cid, port });
        }
    }
    for j in 0..d.outputs.len() {
        let s = match resolve(src_of[&Target::Output(j)])? {
            Source::Input(i) => CSrc::Input(i),
            Source::Node { node, port } => CSrc::Node(cid_of[&node], port),
        };
        consumers.entry(s).or_default().push(Target::Output(j));
    }

    let mut nodes: Vec<Node> = keys
        .iter()
        .map(|(kind, _, ins, outs)| Node {
            kind: kind.clone(),
            inputs: ins.clone(),
            outputs: outs.clone(),
        })
        .collect();
    let mut wires = Vec::new();
    let mut sources: Vec<(CSrc, Factor)> = d
        .inputs
        .iter()
        .enumerate()
        .map(|(i, f)| (CSrc::Input(i), f.clone()))
        .collect();
    for (cid, (_, _, _, outs)) in keys.iter().enumerate() {
        sources.extend(outs.iter().enumerate().map(|(p, f)| (CSrc::Node(cid, p), f.clone())));
    }
    for (cs, ty) in sources {
        let mut cons = consumers.remove(&cs).unwrap_or_default();
        cons.sort();
        let mut cur = match cs {
            CSrc::Input(i) => Source::Input(i),
            CSrc::Node(n, p) => Source::Node { node: n, port: p },
        };
        let wire = |from, to| Wire {
            from,
            to,
            ty: ty.clone(),
            feedback: false,
        };
        match cons.len() {
            0 => {
                let id = nodes.len();
                nodes.push(Node {
                    kind: NodeKind::Discard,
                    inputs: vec![ty.clone()],
                    outputs: vec![],
                });
                wires.push(wire(cur, Target::Node { node: id, port: 0 }));
            }
            m => {
                for c in &cons[..m - 1] {
                    let id = nodes.len();
                    nodes.push(Node {
                        kind: NodeKind::Copy,
                        inputs: vec![ty.clone()],
                        outputs: vec![ty.clone(), ty.clone()],
                    });
                    wires.push(wire(cur, Target::Node { node: id, port: 0 }));
                    wires.push(wire(Source::Node { node: id, port: 0 }, *c));
                    cur = Source::Node { node: id, port: 1 };
                }
                wires.push(wire(cur, cons[m - 1]));
            }
        }
    }
    wires.sort_by_key(|w| w.to);
    Ok(PortDiagram {
        nodes,
        wires,
        inputs: d.inputs.clone(),
        outputs: d.outputs.clone(),
    })
}

/// Boundary types of a diagram, for diagnostics.
pub fn boundary(d: &PortDiagram) -> (FlatType, FlatType) {
    (FlatType(d.inputs.clone()), FlatType(d.outputs.clone()))
}
