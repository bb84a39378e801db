//! Free and truncated free operads: decorated trees and their evaluation.
//!
//! A [`TreeTerm`] is an element of the free operad on the underlying
//! symmetric sequence of a label operad `P`. [`TreeTerm::evaluate`] is the
//! treewise composite `λ: F(P) → P`. In the truncated setting it first
//! composes every arity-zero vertex into its parent and only then contracts
//! the remaining edges bottom up, so no intermediate composite exceeds the
//! arity bound.

use std::collections::{BTreeMap, BTreeSet};

use rand::RngCore;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::forest::{Canonical, ForestError, RTree, TreeJson, VertexId};
use crate::opcore::{Operad, OperadError};
use crate::perm::Perm;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FreeError {
    #[error(transparent)]
    Forest(#[from] ForestError),
    #[error(transparent)]
    Operad(#[from] OperadError),
    #[error("vertex {vertex} has {expected} ingoing edges but its label has arity {got}")]
    LabelArity { vertex: VertexId, expected: usize, got: usize },
    #[error("{labels} labels for {vertices} vertices")]
    LabelCount { labels: usize, vertices: usize },
    #[error("arity {arity} exceeds the truncation bound {k}")]
    Truncation { arity: usize, k: usize },
    #[error("vertex {vertex} has {arity} ingoing edges, above the truncation bound {k}")]
    VertexAboveBound { vertex: VertexId, arity: usize, k: usize },
    #[error("evaluation needs an intermediate composite of arity {arity} above the bound {k}")]
    IntermediateAboveBound { arity: usize, k: usize },
    #[error("truncation bounds differ: {0:?} vs {1:?}")]
    BoundMismatch(Option<usize>, Option<usize>),
    #[error("cannot parse label {0:?}")]
    Label(String),
    #[error("malformed decorated tree: {0}")]
    Malformed(String),
}

/// A decorated tree `[T; ξ_x]` with labels in a label operad.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeTerm<E> {
    pub shape: RTree,
    /// `labels[v]` decorates vertex `v`; input `j` of the label is the `j`-th
    /// ingoing edge of `v`.
    pub labels: Vec<E>,
    pub k: Option<usize>,
}

/// Contracts inner edge `e` of a labelled tree: the target's label becomes
/// `ξ_target ∘_{pos+1} ξ_e`.
pub(crate) fn contract_labelled<O: Operad>(
    op: &O,
    tree: &RTree,
    labels: &[O::Elem],
    e: VertexId,
) -> Result<(RTree, Vec<O::Elem>, Vec<VertexId>), FreeError> {
    let (target, pos) = tree.parent(e).ok_or(ForestError::NotInnerEdge(e))?;
    let composite = op.compose(&labels[target], pos + 1, &labels[e])?;
    let (t, merge) = tree.contract_edge(e)?;
    let mut out: Vec<Option<O::Elem>> = vec![None; t.num_vertices()];
    for (v, l) in labels.iter().enumerate() {
        if v != e && v != target {
            out[merge.remap[v]] = Some(l.clone());
        }
    }
    out[merge.target] = Some(composite);
    Ok((t, out.into_iter().map(|l| l.expect("every vertex labelled")).collect(), merge.remap))
}

/// The element a one-vertex labelled tree stands for: its label with inputs
/// renamed after the leaves they carry.
pub(crate) fn corolla_value<O: Operad>(op: &O, tree: &RTree, label: &O::Elem) -> O::Elem {
    debug_assert!(tree.is_corolla());
    let images = tree.leaf_order().iter().map(|j| j - 1).collect();
    op.act(&Perm::from_images(images).expect("leaves are a bijection"), label)
}

/// Canonical form of a labelled tree with an extra per-vertex key. Labels are
/// transported along the sibling reordering; extras move with their vertex.
pub(crate) fn canonicalize_decorated<O: Operad, X: Ord + Clone>(
    op: &O,
    tree: &RTree,
    labels: &[O::Elem],
    extras: &[X],
) -> (Canonical, Vec<O::Elem>, Vec<X>) {
    let moved = |v: VertexId, order: &[usize]| {
        let mut inv = vec![0; order.len()];
        for (s, &old) in order.iter().enumerate() {
            inv[old] = s;
        }
        op.act(&Perm::from_images(inv).expect("order is a permutation"), &labels[v])
    };
    let canon = tree.canonical_form_with(|v, order| (extras[v].clone(), moved(v, order)));
    let n = tree.num_vertices();
    let mut new_labels: Vec<Option<O::Elem>> = vec![None; n];
    let mut new_extras: Vec<Option<X>> = vec![None; n];
    for v in 0..n {
        new_labels[canon.old_to_new[v]] = Some(moved(v, &canon.orders[v]));
        new_extras[canon.old_to_new[v]] = Some(extras[v].clone());
    }
    let labels = new_labels.into_iter().map(|l| l.expect("bijection")).collect();
    let extras = new_extras.into_iter().map(|x| x.expect("bijection")).collect();
    (canon, labels, extras)
}

impl<E: Clone + Ord> TreeTerm<E> {
    pub fn new<O: Operad<Elem = E>>(
        op: &O,
        shape: RTree,
        labels: Vec<E>,
        k: Option<usize>,
    ) -> Result<Self, FreeError> {
        if labels.len() != shape.num_vertices() {
            return Err(FreeError::LabelCount { labels: labels.len(), vertices: shape.num_vertices() });
        }
        for (v, l) in labels.iter().enumerate() {
            let got = op.arity(l);
            if got != shape.vertex_arity(v) {
                return Err(FreeError::LabelArity { vertex: v, expected: shape.vertex_arity(v), got });
            }
        }
        let t = TreeTerm { shape, labels, k };
        t.check_truncated()?;
        Ok(t)
    }

    pub fn corolla<O: Operad<Elem = E>>(op: &O, p: E, k: Option<usize>) -> Result<Self, FreeError> {
        TreeTerm::new(op, RTree::corolla(op.arity(&p)), vec![p], k)
    }

    pub fn arity(&self) -> usize {
        self.shape.arity()
    }

    /// `arity ≤ k` and `r_x ≤ k` for every vertex.
    pub fn check_truncated(&self) -> Result<(), FreeError> {
        let Some(k) = self.k else { return Ok(()) };
        if self.arity() > k {
            return Err(FreeError::Truncation { arity: self.arity(), k });
        }
        for v in 0..self.shape.num_vertices() {
            let arity = self.shape.vertex_arity(v);
            if arity > k {
                return Err(FreeError::VertexAboveBound { vertex: v, arity, k });
            }
        }
        Ok(())
    }

    /// Grafting of decorated trees; vertex ids of `other` are offset by the
    /// vertex count of `self`.
    pub fn free_compose(&self, i: usize, other: &TreeTerm<E>) -> Result<Self, FreeError> {
        if self.k != other.k {
            return Err(FreeError::BoundMismatch(self.k, other.k));
        }
        if let Some(k) = self.k {
            let arity = self.arity() + other.arity() - 1;
            if i >= 1 && i <= self.arity() && arity > k {
                return Err(FreeError::Truncation { arity, k });
            }
        }
        let shape = self.shape.graft(i, &other.shape)?;
        let mut labels = self.labels.clone();
        labels.extend(other.labels.iter().cloned());
        Ok(TreeTerm { shape, labels, k: self.k })
    }

    /// Renames leaf `j` to `σ(j)`.
    pub fn symmetric_action(&self, sigma: &Perm) -> Self {
        TreeTerm { shape: self.shape.relabel_leaves(sigma), labels: self.labels.clone(), k: self.k }
    }

    pub fn canonical<O: Operad<Elem = E>>(&self, op: &O) -> (RTree, Vec<E>) {
        let unit = vec![(); self.labels.len()];
        let (canon, labels, _) = canonicalize_decorated(op, &self.shape, &self.labels, &unit);
        (canon.tree, labels)
    }

    pub fn canonical_eq<O: Operad<Elem = E>>(&self, op: &O, other: &TreeTerm<E>) -> bool {
        self.k == other.k && self.canonical(op) == other.canonical(op)
    }

    /// The treewise composite: arity-zero vertices first, then bottom up.
    pub fn evaluate<O: Operad<Elem = E>>(&self, op: &O) -> Result<E, FreeError> {
        self.check_truncated()?;
        let mut tree = self.shape.clone();
        let mut labels = self.labels.clone();
        let guard = |tree: &RTree, e: VertexId| -> Result<(), FreeError> {
            if let Some(k) = self.k {
                let (t, _) = tree.parent(e).expect("inner edge");
                let arity = tree.vertex_arity(t) + tree.vertex_arity(e) - 1;
                if arity > k {
                    return Err(FreeError::IntermediateAboveBound { arity, k });
                }
            }
            Ok(())
        };
        loop {
            let next = tree
                .preorder()
                .into_iter()
                .find(|&v| v != tree.root() && tree.vertex_arity(v) == 0);
            let Some(e) = next else { break };
            guard(&tree, e)?;
            let (t, l, _) = contract_labelled(op, &tree, &labels, e)?;
            tree = t;
            labels = l;
        }
        while !tree.is_corolla() {
            let e = tree
                .postorder()
                .into_iter()
                .find(|&v| v != tree.root())
                .expect("a non-corolla has an inner edge");
            guard(&tree, e)?;
            let (t, l, _) = contract_labelled(op, &tree, &labels, e)?;
            tree = t;
            labels = l;
        }
        Ok(corolla_value(op, &tree, &labels[tree.root()]))
    }

    /// Results of every complete contraction order whose intermediate vertex
    /// arities stay within the bound, with the number of such orders.
    pub fn all_contraction_results<O: Operad<Elem = E>>(
        &self,
        op: &O,
    ) -> Result<(BTreeSet<E>, usize), FreeError> {
        let mut results = BTreeSet::new();
        let mut orders = 0;
        self.explore(op, &self.shape, &self.labels, &mut results, &mut orders)?;
        Ok((results, orders))
    }

    fn explore<O: Operad<Elem = E>>(
        &self,
        op: &O,
        tree: &RTree,
        labels: &[E],
        results: &mut BTreeSet<E>,
        orders: &mut usize,
    ) -> Result<(), FreeError> {
        if tree.is_corolla() {
            results.insert(corolla_value(op, tree, &labels[tree.root()]));
            *orders += 1;
            return Ok(());
        }
        for e in tree.inner_edges().collect::<Vec<_>>() {
            let (t, _) = tree.parent(e).expect("inner edge");
            let arity = tree.vertex_arity(t) + tree.vertex_arity(e) - 1;
            if self.k.is_some_and(|k| arity > k) {
                continue;
            }
            let (nt, nl, _) = contract_labelled(op, tree, labels, e)?;
            self.explore(op, &nt, &nl, results, orders)?;
        }
        Ok(())
    }
}

/// A random term with at most `max_vertices` vertices whose vertex arities
/// are at most `max_vertex_arity`; when `k` is set the term is valid in the
/// truncated free operad.
pub fn random_term<O: Operad>(
    op: &O,
    rng: &mut dyn RngCore,
    max_vertices: usize,
    max_vertex_arity: usize,
    k: Option<usize>,
) -> TreeTerm<O::Elem> {
    let amax = k.map_or(max_vertex_arity, |k| k.min(max_vertex_arity));
    loop {
        let shape = RTree::random(rng, max_vertices, amax, 0.3);
        if k.is_some_and(|k| shape.arity() > k) {
            continue;
        }
        let labels: Option<Vec<O::Elem>> =
            (0..shape.num_vertices()).map(|v| op.sample(shape.vertex_arity(v), rng)).collect();
        if let Some(labels) = labels {
            return TreeTerm { shape, labels, k };
        }
    }
}

/// JSON schema for decorated trees: the tree schema plus labels keyed by
/// vertex id, lengths keyed by the source vertex of each inner edge (as
/// `"p/q"` strings), and the variant and bound.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecoratedJson {
    #[serde(flatten)]
    pub tree: TreeJson,
    pub labels: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub lengths: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variant: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
}

impl DecoratedJson {
    /// Parses tree and labels; returns the tree, labels, and the file id of
    /// every vertex.
    pub fn parse_labelled<O: Operad>(
        &self,
        op: &O,
    ) -> Result<(RTree, Vec<O::Elem>, Vec<usize>), FreeError> {
        let (tree, ids) = RTree::from_json(&self.tree)?;
        let mut labels = Vec::with_capacity(ids.len());
        for id in &ids {
            let text = self
                .labels
                .get(&id.to_string())
                .ok_or_else(|| FreeError::Malformed(format!("vertex {id} has no label")))?;
            labels.push(op.parse(text).ok_or_else(|| FreeError::Label(text.clone()))?);
        }
        if self.labels.len() != ids.len() {
            return Err(FreeError::Malformed("labels given for unknown vertices".into()));
        }
        Ok((tree, labels, ids))
    }

    pub fn from_labelled<O: Operad>(op: &O, tree: &RTree, labels: &[O::Elem]) -> DecoratedJson {
        DecoratedJson {
            tree: tree.to_json(),
            labels: labels.iter().enumerate().map(|(v, l)| (v.to_string(), op.display(l))).collect(),
            lengths: BTreeMap::new(),
            variant: None,
            k: None,
        }
    }
}

impl<E: Clone + Ord> TreeTerm<E> {
    pub fn from_json<O: Operad<Elem = E>>(op: &O, json: &DecoratedJson) -> Result<Self, FreeError> {
        let (tree, labels, _) = json.parse_labelled(op)?;
        TreeTerm::new(op, tree, labels, json.k)
    }

    pub fn to_json<O: Operad<Elem = E>>(&self, op: &O) -> DecoratedJson {
        let mut json = DecoratedJson::from_labelled(op, &self.shape, &self.labels);
        json.k = self.k;
        json
    }
}
