//! The W-construction as a rewriting system on decorated trees.
//!
//! An element `[T; p_x; l_e]` is a tree with operad labels on its vertices
//! and exact rational lengths in `[0, 1]` on its inner edges. Normal forms
//! are reached by the rewrite rules
//!
//! * edge contraction: an inner edge of length 0 is contracted and the labels
//!   composed;
//! * unit contraction (`W`, `τW`): a vertex labelled by the operad unit is
//!   removed, the joined edge getting the maximum of the two lengths; a unit
//!   vertex on the root or a leaf edge simply disappears;
//! * reduction (`τW`, `τW'`): a leafless subtree hanging on an edge of length
//!   1 is replaced by the arity-zero point on that edge, and an arity-zero
//!   tree collapses to the corolla of the point.
//!
//! Every rule removes at least one vertex, so rewriting terminates; normal
//! forms are compared after canonicalisation with label transport. The
//! identity element is the unit corolla `η(1)`.

mod structure;
mod suites;
mod truncated;

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::{One, Zero};
use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::forest::{ForestError, RTree, Slot, VertexId};
use crate::freeop::{canonicalize_decorated, contract_labelled, DecoratedJson, FreeError, TreeTerm};
use crate::opcore::{point, Operad, OperadError};
use crate::perm::Perm;

pub use structure::{Factor, HeightedElement, NonUnitalRep};
pub use suites::{confluence_suite, lemma2_suite, ConfluenceFailure, ConfluenceReport, Lemma2Report};
pub use truncated::{validate_truncated, TruncationReport};

/// Exact edge length in `[0, 1]` (heights may exceed 1).
pub type Length = Ratio<i64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Kind {
    W,
    WPrime,
    TauW,
    TauWPrime,
}

impl Kind {
    pub const ALL: [Kind; 4] = [Kind::W, Kind::WPrime, Kind::TauW, Kind::TauWPrime];
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::W => "W",
            Kind::WPrime => "W'",
            Kind::TauW => "tauW",
            Kind::TauWPrime => "tauW'",
        })
    }
}

impl FromStr for Kind {
    type Err = WError;

    fn from_str(s: &str) -> Result<Self, WError> {
        match s.trim() {
            "W" | "w" => Ok(Kind::W),
            "W'" | "Wp" | "wp" | "W-prime" => Ok(Kind::WPrime),
            "tauW" | "tW" | "τW" => Ok(Kind::TauW),
            "tauW'" | "tauWp" | "tWp" | "τW'" => Ok(Kind::TauWPrime),
            other => Err(WError::Malformed(format!("unknown variant {other:?}"))),
        }
    }
}

/// Which relations are in force, and the optional arity bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Variant {
    pub kind: Kind,
    pub k: Option<usize>,
}

impl Variant {
    pub fn new(kind: Kind, k: Option<usize>) -> Self {
        Variant { kind, k }
    }

    pub fn has_unit_relation(&self) -> bool {
        matches!(self.kind, Kind::W | Kind::TauW)
    }

    pub fn is_tau(&self) -> bool {
        matches!(self.kind, Kind::TauW | Kind::TauWPrime)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.k {
            Some(k) => write!(f, "{}<={k}", self.kind),
            None => write!(f, "{}", self.kind),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WError {
    #[error(transparent)]
    Forest(#[from] ForestError),
    #[error(transparent)]
    Operad(#[from] OperadError),
    #[error(transparent)]
    Free(#[from] FreeError),
    #[error("length {value} of the edge below vertex {vertex} is outside [0, 1]")]
    LengthOutOfRange { vertex: VertexId, value: Length },
    #[error("{count} lengths for {vertices} vertices")]
    LengthCount { count: usize, vertices: usize },
    #[error("vertex {vertex} has {expected} ingoing edges but its label has arity {got}")]
    LabelArity { vertex: VertexId, expected: usize, got: usize },
    #[error("variants differ: {0} vs {1}")]
    VariantMismatch(Variant, Variant),
    #[error("variant {0} requires a unitary label operad")]
    NotUnitary(Variant),
    #[error("height coordinates need a variant without the unit relation, got {0}")]
    UnitRelation(Variant),
    #[error("truncation violation: {0}")]
    Truncation(String),
    #[error("composite arity {arity} exceeds the bound {k}")]
    ArityBound { arity: usize, k: usize },
    #[error("invalid heights: {0}")]
    Heights(String),
    #[error("cannot parse length {0:?}")]
    LengthSyntax(String),
    #[error("malformed element: {0}")]
    Malformed(String),
}

/// A decorated tree `[T; p_x; l_e]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WElement<E> {
    tree: RTree,
    labels: Vec<E>,
    /// Length of the outgoing edge of every vertex; `0` at the root.
    lengths: Vec<Length>,
    variant: Variant,
}

impl<E: Clone> WElement<E> {
    pub fn tree(&self) -> &RTree {
        &self.tree
    }

    pub fn labels(&self) -> &[E] {
        &self.labels
    }

    /// Per-vertex outgoing lengths (the root entry is 0 and carries no data).
    pub fn lengths(&self) -> &[Length] {
        &self.lengths
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn arity(&self) -> usize {
        self.tree.arity()
    }

    pub fn num_vertices(&self) -> usize {
        self.tree.num_vertices()
    }

    /// Inner edges (named by source vertex) with their lengths.
    pub fn inner_lengths(&self) -> impl Iterator<Item = (VertexId, Length)> + '_ {
        self.tree.inner_edges().map(|e| (e, self.lengths[e]))
    }

    pub(crate) fn from_parts(tree: RTree, labels: Vec<E>, lengths: Vec<Length>, variant: Variant) -> Self {
        let mut lengths = lengths;
        lengths[tree.root()] = Length::zero();
        WElement { tree, labels, lengths, variant }
    }

    pub(crate) fn with_variant(&self, variant: Variant) -> Self {
        WElement { variant, ..self.clone() }
    }
}

/// A single rewrite step.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Redex {
    /// Contract the inner edge below this vertex (length 0).
    Contract(VertexId),
    /// Remove this unit-labelled vertex.
    Unit(VertexId),
    /// Replace the leafless subtree above this vertex by the point.
    Reduce(VertexId),
    /// Collapse an arity-zero tree to the corolla of the point.
    Collapse,
}

pub fn parse_length(text: &str) -> Result<Length, WError> {
    let err = || WError::LengthSyntax(text.to_string());
    let t = text.trim();
    let value = match t.split_once('/') {
        Some((n, d)) => {
            let n: i64 = n.trim().parse().map_err(|_| err())?;
            let d: i64 = d.trim().parse().map_err(|_| err())?;
            if d == 0 {
                return Err(err());
            }
            Ratio::new(n, d)
        }
        None => Ratio::from_integer(t.parse().map_err(|_| err())?),
    };
    Ok(value)
}

/// `"p/q"` in lowest terms, always with a denominator.
pub fn format_length(l: &Length) -> String {
    format!("{}/{}", l.numer(), l.denom())
}

/// The W-construction of a label operad in a given variant.
#[derive(Clone, Debug)]
pub struct WCons<O: Operad> {
    pub op: O,
    pub variant: Variant,
    star: Option<O::Elem>,
}

impl<O: Operad> WCons<O> {
    pub fn new(op: O, variant: Variant) -> Result<Self, WError> {
        let star = point(&op).ok();
        if variant.is_tau() && star.is_none() {
            return Err(WError::NotUnitary(variant));
        }
        Ok(WCons { op, variant, star })
    }

    /// The same label operad in another variant.
    pub fn with_variant(&self, variant: Variant) -> Result<WCons<O>, WError>
    where
        O: Clone,
    {
        WCons::new(self.op.clone(), variant)
    }

    /// The arity-zero point of a unitary label operad.
    pub fn star(&self) -> Option<&O::Elem> {
        self.star.as_ref()
    }

    /// Builds a raw element, checking label arities, lengths, and (for
    /// truncated variants) the arity bound on every component.
    pub fn element(
        &self,
        tree: RTree,
        labels: Vec<O::Elem>,
        lengths: Vec<Length>,
    ) -> Result<WElement<O::Elem>, WError> {
        let n = tree.num_vertices();
        if labels.len() != n {
            return Err(FreeError::LabelCount { labels: labels.len(), vertices: n }.into());
        }
        if lengths.len() != n {
            return Err(WError::LengthCount { count: lengths.len(), vertices: n });
        }
        for v in 0..n {
            let got = self.op.arity(&labels[v]);
            if got != tree.vertex_arity(v) {
                return Err(WError::LabelArity { vertex: v, expected: tree.vertex_arity(v), got });
            }
            if v != tree.root() && (lengths[v] < Length::zero() || lengths[v] > Length::one()) {
                return Err(WError::LengthOutOfRange { vertex: v, value: lengths[v] });
            }
        }
        let w = WElement::from_parts(tree, labels, lengths, self.variant);
        if let Some(k) = self.variant.k {
            let rep = validate_truncated(&w, k);
            if !rep.passed {
                return Err(WError::Truncation(rep.summary()));
            }
        }
        Ok(w)
    }

    /// The corolla `η(p)`.
    pub fn eta(&self, p: O::Elem) -> WElement<O::Elem> {
        let tree = RTree::corolla(self.op.arity(&p));
        WElement::from_parts(tree, vec![p], vec![Length::zero()], self.variant)
    }

    /// The operad unit `η(1)`.
    pub fn identity(&self) -> WElement<O::Elem> {
        self.eta(self.op.unit())
    }

    fn check_variant(&self, w: &WElement<O::Elem>) -> Result<(), WError> {
        if w.variant != self.variant {
            Err(WError::VariantMismatch(self.variant, w.variant))
        } else {
            Ok(())
        }
    }

    /// Every applicable rewrite step.
    pub fn redexes(&self, w: &WElement<O::Elem>) -> Vec<Redex> {
        let t = &w.tree;
        let mut out = Vec::new();
        for e in t.inner_edges() {
            if w.lengths[e].is_zero() {
                out.push(Redex::Contract(e));
            }
        }
        if self.variant.has_unit_relation() {
            let unit = self.op.unit();
            for v in 0..t.num_vertices() {
                let removable = !(v == t.root() && matches!(t.children(v), [Slot::Leaf(_)]));
                if w.labels[v] == unit && removable {
                    out.push(Redex::Unit(v));
                }
            }
        }
        if self.variant.is_tau() {
            let counts = t.leaf_counts();
            for v in t.inner_edges() {
                if w.lengths[v].is_one() && counts[v] == 0 && t.vertex_arity(v) > 0 {
                    out.push(Redex::Reduce(v));
                }
            }
            if t.arity() == 0 && t.num_vertices() > 1 {
                out.push(Redex::Collapse);
            }
        }
        out
    }

    /// The redex chosen by the deterministic strategy: edge contraction
    /// (childless sources first, then deepest), then unit contraction, then
    /// the collapse of arity-zero trees, then reduction of maximal subtrees.
    pub fn preferred_redex(&self, w: &WElement<O::Elem>) -> Option<Redex> {
        let all = self.redexes(w);
        let t = &w.tree;
        let contract = all
            .iter()
            .filter_map(|r| match r {
                Redex::Contract(e) => Some(*e),
                _ => None,
            })
            .min_by_key(|&e| (t.vertex_arity(e) > 0, std::cmp::Reverse(t.depth(e)), e));
        if let Some(e) = contract {
            return Some(Redex::Contract(e));
        }
        if let Some(r) = all.iter().find(|r| matches!(r, Redex::Unit(_))) {
            return Some(*r);
        }
        if all.contains(&Redex::Collapse) {
            return Some(Redex::Collapse);
        }
        all.iter()
            .filter_map(|r| match r {
                Redex::Reduce(v) => Some(*v),
                _ => None,
            })
            .min_by_key(|&v| (t.depth(v), v))
            .map(Redex::Reduce)
    }

    /// Applies one rewrite step.
    pub fn apply(&self, w: &WElement<O::Elem>, redex: Redex) -> Result<WElement<O::Elem>, WError> {
        let t = &w.tree;
        match redex {
            Redex::Contract(e) => {
                let (tree, labels, remap) = contract_labelled(&self.op, t, &w.labels, e)?;
                let mut lengths = vec![Length::zero(); tree.num_vertices()];
                for (v, l) in w.lengths.iter().enumerate() {
                    if v != e {
                        lengths[remap[v]] = *l;
                    }
                }
                Ok(WElement::from_parts(tree, labels, lengths, w.variant))
            }
            Redex::Unit(v) => {
                let (tree, remap) = t.splice_unary(v)?;
                let mut labels: Vec<Option<O::Elem>> = vec![None; tree.num_vertices()];
                let mut lengths = vec![Length::zero(); tree.num_vertices()];
                for x in 0..t.num_vertices() {
                    if let Some(nx) = remap[x] {
                        labels[nx] = Some(w.labels[x].clone());
                        lengths[nx] = w.lengths[x];
                    }
                }
                if let (Some(_), Slot::Vertex(c)) = (t.parent(v), t.children(v)[0]) {
                    let nc = remap[c].expect("kept");
                    lengths[nc] = w.lengths[c].max(w.lengths[v]);
                }
                let labels = labels.into_iter().map(|l| l.expect("labelled")).collect();
                Ok(WElement::from_parts(tree, labels, lengths, w.variant))
            }
            Redex::Reduce(v) => {
                let star = self.star.clone().ok_or(WError::NotUnitary(self.variant))?;
                let (tree, remap) = t.prune_above(v)?;
                let mut labels: Vec<Option<O::Elem>> = vec![None; tree.num_vertices()];
                let mut lengths = vec![Length::zero(); tree.num_vertices()];
                for x in 0..t.num_vertices() {
                    if let Some(nx) = remap[x] {
                        labels[nx] = Some(w.labels[x].clone());
                        lengths[nx] = w.lengths[x];
                    }
                }
                labels[remap[v].expect("kept")] = Some(star);
                let labels = labels.into_iter().map(|l| l.expect("labelled")).collect();
                Ok(WElement::from_parts(tree, labels, lengths, w.variant))
            }
            Redex::Collapse => {
                let star = self.star.clone().ok_or(WError::NotUnitary(self.variant))?;
                Ok(self.eta(star))
            }
        }
    }

    /// Canonical representative of the same decorated tree.
    pub fn canonicalize(&self, w: &WElement<O::Elem>) -> WElement<O::Elem> {
        let (canon, labels, lengths) = canonicalize_decorated(&self.op, &w.tree, &w.labels, &w.lengths);
        WElement::from_parts(canon.tree, labels, lengths, w.variant)
    }

    fn precheck(&self, w: &WElement<O::Elem>) -> Result<(), WError> {
        self.check_variant(w)?;
        if let Some(k) = self.variant.k {
            let rep = validate_truncated(w, k);
            if !rep.passed {
                return Err(WError::Truncation(rep.summary()));
            }
        }
        Ok(())
    }

    /// Rewrites to the normal form with the deterministic strategy.
    pub fn normalize(&self, w: &WElement<O::Elem>) -> Result<WElement<O::Elem>, WError> {
        self.precheck(w)?;
        self.rewrite(w)
    }

    /// Normalises without checking the arity bound of truncated variants, so
    /// that intermediate stages of a retraction can be inspected.
    pub fn rewrite(&self, w: &WElement<O::Elem>) -> Result<WElement<O::Elem>, WError> {
        let mut cur = w.clone();
        while let Some(r) = self.preferred_redex(&cur) {
            cur = self.apply(&cur, r)?;
        }
        Ok(self.canonicalize(&cur))
    }

    /// Rewrites to the normal form choosing uniformly among all redexes.
    pub fn normalize_random(
        &self,
        w: &WElement<O::Elem>,
        rng: &mut dyn RngCore,
    ) -> Result<WElement<O::Elem>, WError> {
        self.precheck(w)?;
        let mut cur = w.clone();
        loop {
            let all = self.redexes(&cur);
            if all.is_empty() {
                break;
            }
            let r = all[rng.gen_range(0..all.len())];
            cur = self.apply(&cur, r)?;
        }
        Ok(self.canonicalize(&cur))
    }

    pub fn is_normal(&self, w: &WElement<O::Elem>) -> bool {
        self.redexes(w).is_empty()
    }

    /// Grafts `b` into leaf `i` of `a` with the given junction length, without
    /// normalising. Vertex `v` of `b` becomes `v + a.num_vertices()`.
    pub fn graft_raw(
        &self,
        a: &WElement<O::Elem>,
        i: usize,
        b: &WElement<O::Elem>,
        junction: Length,
    ) -> Result<WElement<O::Elem>, WError> {
        let tree = a.tree.graft(i, &b.tree)?;
        let offset = a.num_vertices();
        let mut labels = a.labels.clone();
        labels.extend(b.labels.iter().cloned());
        let mut lengths = a.lengths.clone();
        lengths.extend(b.lengths.iter().copied());
        lengths[offset + b.tree.root()] = junction;
        Ok(WElement::from_parts(tree, labels, lengths, a.variant))
    }

    /// Operadic composition: graft with junction length 1, then normalise.
    pub fn w_compose(
        &self,
        a: &WElement<O::Elem>,
        i: usize,
        b: &WElement<O::Elem>,
    ) -> Result<WElement<O::Elem>, WError> {
        self.check_variant(a)?;
        self.check_variant(b)?;
        if let Some(k) = self.variant.k {
            let arity = a.arity() + b.arity() - 1;
            if i >= 1 && i <= a.arity() && arity > k {
                return Err(WError::ArityBound { arity, k });
            }
        }
        let raw = self.graft_raw(a, i, b, Length::one())?;
        self.normalize(&raw)
    }

    /// The symmetric action: renames leaf `j` to `sigma(j)`.
    pub fn act(&self, sigma: &Perm, w: &WElement<O::Elem>) -> WElement<O::Elem> {
        WElement { tree: w.tree.relabel_leaves(sigma), ..w.clone() }
    }

    /// The augmentation: forget lengths and compose along the tree.
    pub fn epsilon(&self, w: &WElement<O::Elem>) -> Result<O::Elem, WError> {
        let term = TreeTerm { shape: w.tree.clone(), labels: w.labels.clone(), k: w.variant.k };
        Ok(term.evaluate(&self.op)?)
    }

    /// A random raw element with at most `max_vertices` vertices.
    ///
    /// Arity-one vertices carry the unit with probability 1/4 and lengths are
    /// 0 or 1 with probability 1/5 and 3/10, so that every rewrite rule
    /// fires regularly. Truncated variants only return valid elements.
    pub fn random_raw(
        &self,
        rng: &mut dyn RngCore,
        max_vertices: usize,
        max_vertex_arity: usize,
    ) -> WElement<O::Elem> {
        let amax = self.variant.k.map_or(max_vertex_arity, |k| k.min(max_vertex_arity));
        loop {
            let tree = RTree::random(rng, max_vertices, amax, 0.35);
            if self.variant.k.is_some_and(|k| tree.arity() > k) {
                continue;
            }
            let mut labels = Vec::with_capacity(tree.num_vertices());
            let mut ok = true;
            for v in 0..tree.num_vertices() {
                let r = tree.vertex_arity(v);
                if r == 1 && rng.gen_bool(0.25) {
                    labels.push(self.op.unit());
                } else if let Some(p) = self.op.sample(r, rng) {
                    labels.push(p);
                } else {
                    ok = false;
                    break;
                }
            }
            if !ok {
                continue;
            }
            let lengths = (0..tree.num_vertices()).map(|_| random_length(rng)).collect();
            if let Ok(w) = self.element(tree, labels, lengths) {
                return w;
            }
        }
    }

    pub fn to_json(&self, w: &WElement<O::Elem>) -> DecoratedJson {
        let mut json = DecoratedJson::from_labelled(&self.op, &w.tree, &w.labels);
        json.lengths = w
            .tree
            .inner_edges()
            .map(|e| (e.to_string(), format_length(&w.lengths[e])))
            .collect();
        json.variant = Some(w.variant.kind.to_string());
        json.k = w.variant.k;
        json
    }

    /// Parses a decorated tree; every inner edge needs a length. The element
    /// gets this construction's variant.
    pub fn from_json(&self, json: &DecoratedJson) -> Result<WElement<O::Elem>, WError> {
        let (tree, labels, ids) = json.parse_labelled(&self.op)?;
        let mut lengths = vec![Length::zero(); tree.num_vertices()];
        for e in tree.inner_edges() {
            let key = ids[e].to_string();
            let text = json
                .lengths
                .get(&key)
                .ok_or_else(|| WError::Malformed(format!("edge below vertex {key} has no length")))?;
            lengths[e] = parse_length(text)?;
        }
        let root_key = ids[tree.root()].to_string();
        if json.lengths.contains_key(&root_key) {
            return Err(WError::Malformed("the root edge carries no length".into()));
        }
        if json.lengths.len() != tree.num_vertices() - 1 {
            return Err(WError::Malformed("lengths given for unknown edges".into()));
        }
        self.element(tree, labels, lengths)
    }

    /// One-line rendering: `label(child, ..)` with `@length` on inner edges
    /// and `#j` for leaf `j`.
    pub fn to_text(&self, w: &WElement<O::Elem>) -> String {
        fn go<O: Operad>(wc: &WCons<O>, w: &WElement<O::Elem>, v: VertexId, out: &mut String) {
            out.push('[');
            out.push_str(&wc.op.display(&w.labels[v]));
            out.push(']');
            if v != w.tree.root() {
                out.push('@');
                out.push_str(&format_length(&w.lengths[v]));
            }
            let children = w.tree.children(v);
            if children.is_empty() {
                return;
            }
            out.push('(');
            for (idx, slot) in children.iter().enumerate() {
                if idx > 0 {
                    out.push_str(", ");
                }
                match *slot {
                    Slot::Leaf(j) => out.push_str(&format!("#{j}")),
                    Slot::Vertex(c) => go(wc, w, c, out),
                }
            }
            out.push(')');
        }
        let mut out = String::new();
        go(self, w, w.tree.root(), &mut out);
        out
    }

    /// Graphviz rendering: labels as vertex captions, lengths on inner edges.
    pub fn to_dot(&self, w: &WElement<O::Elem>) -> String {
        let mut out = String::from("digraph W {\n  rankdir=BT;\n  node [shape=ellipse];\n");
        let esc = |s: String| s.replace('\\', "\\\\").replace('"', "\\\"");
        for v in 0..w.num_vertices() {
            out.push_str(&format!("  v{v} [label=\"{}\"];\n", esc(self.op.display(&w.labels[v]))));
        }
        for v in 0..w.num_vertices() {
            for slot in w.tree.children(v) {
                match *slot {
                    Slot::Leaf(j) => {
                        out.push_str(&format!("  l{j} [shape=plaintext, label=\"{j}\"];\n"));
                        out.push_str(&format!("  l{j} -> v{v};\n"));
                    }
                    Slot::Vertex(c) => {
                        out.push_str(&format!(
                            "  v{c} -> v{v} [label=\"{}\"];\n",
                            format_length(&w.lengths[c])
                        ));
                    }
                }
            }
        }
        out.push_str(&format!("  root [shape=point];\n  v{} -> root;\n}}\n", w.tree.root()));
        out
    }
}

/// 0 w.p. 1/5, 1 w.p. 3/10, otherwise `a/d` with `d ∈ {2, 3, 4, 6, 12}`.
pub fn random_length(rng: &mut dyn RngCore) -> Length {
    let u: f64 = rng.gen();
    if u < 0.2 {
        Length::zero()
    } else if u < 0.5 {
        Length::one()
    } else {
        let d = [2i64, 3, 4, 6, 12][rng.gen_range(0..5)];
        Ratio::new(rng.gen_range(1..d), d)
    }
}
