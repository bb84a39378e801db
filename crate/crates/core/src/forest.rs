//! Rooted r-trees with numbered leaves.
//!
//! An [`RTree`] has a distinguished root vertex (the source of the outgoing
//! edge), and every vertex lists its ingoing edges in a fixed order. Each
//! ingoing edge is either a numbered leaf or the outgoing edge of another
//! vertex; the latter are the *inner edges* of the tree. Since every non-root
//! vertex has exactly one outgoing edge, inner edges are identified with their
//! source vertex throughout the crate.
//!
//! The stored child order is a plane embedding. Trees are compared as abstract
//! (non-planar) trees through [`RTree::canonicalize`], and decorated structures
//! built on top of trees use [`RTree::canonical_form_with`] to transport their
//! decorations along the reordering.

use std::collections::{BTreeMap, HashSet};

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::perm::Perm;

pub type VertexId = usize;

/// An ingoing edge of a vertex: either leaf `j` (1-based) or the outgoing edge
/// of another vertex.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Slot {
    Leaf(usize),
    Vertex(VertexId),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ForestError {
    #[error("leaf index {index} out of range for a tree of arity {arity}")]
    LeafOutOfRange { index: usize, arity: usize },
    #[error("vertex {0} does not exist")]
    NoSuchVertex(VertexId),
    #[error("the outgoing edge of vertex {0} is the root edge, not an inner edge")]
    NotInnerEdge(VertexId),
    #[error("subtree above vertex {0} contains numbered leaves")]
    SubtreeHasLeaves(VertexId),
    #[error("malformed tree: {0}")]
    Malformed(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RTree {
    children: Vec<Vec<Slot>>,
    parent: Vec<Option<(VertexId, usize)>>,
    root: VertexId,
    arity: usize,
}

/// What happened to vertex ids during [`RTree::contract_edge`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Merge {
    /// Id of the fused vertex in the contracted tree.
    pub target: VertexId,
    /// 0-based position of the contracted edge in the target's ingoing list.
    pub position: usize,
    /// Number of ingoing edges the source vertex contributed.
    pub source_arity: usize,
    /// Old vertex id to new vertex id; the source maps to the fused vertex.
    pub remap: Vec<VertexId>,
}

/// Result of canonicalisation.
#[derive(Clone, Debug)]
pub struct Canonical {
    pub tree: RTree,
    /// Old vertex id to canonical vertex id.
    pub old_to_new: Vec<VertexId>,
    /// For every old vertex, the chosen order of its old child positions:
    /// canonical position `s` holds old position `orders[v][s]`.
    pub orders: Vec<Vec<usize>>,
}

impl Canonical {
    /// Permutation sending old child position to canonical position at `v`.
    pub fn position_perm(&self, v: VertexId) -> Perm {
        Perm::from_images(invert(&self.orders[v])).expect("orders are permutations")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum CanonKey<K> {
    Leaf(usize),
    Node(K, Vec<CanonKey<K>>),
}

/// Where an ingoing slot of a cut piece came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Boundary {
    /// An original leaf of the cut tree.
    Leaf(usize),
    /// A cut inner edge, named by its source vertex in the original tree.
    Cut(VertexId),
}

/// A component produced by [`RTree::cut_edges`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Piece {
    /// The component, leaves numbered in plane order.
    pub tree: RTree,
    /// Piece vertex id to original vertex id.
    pub vertices: Vec<VertexId>,
    /// Origin of every piece leaf (`boundary[j-1]` for leaf `j`).
    pub boundary: Vec<Boundary>,
    /// The cut edge this piece hangs from, `None` for the root piece.
    pub hangs_from: Option<VertexId>,
}

fn invert(order: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; order.len()];
    for (s, &old) in order.iter().enumerate() {
        inv[old] = s;
    }
    inv
}

impl RTree {
    /// Builds a tree from per-vertex ingoing lists, validating every invariant.
    pub fn new(children: Vec<Vec<Slot>>, root: VertexId) -> Result<Self, ForestError> {
        let n = children.len();
        if n == 0 {
            return Err(ForestError::Malformed("a tree needs at least one vertex".into()));
        }
        if root >= n {
            return Err(ForestError::NoSuchVertex(root));
        }
        let mut parent = vec![None; n];
        let mut leaves = Vec::new();
        for (v, slots) in children.iter().enumerate() {
            for (pos, slot) in slots.iter().enumerate() {
                match *slot {
                    Slot::Leaf(j) => leaves.push(j),
                    Slot::Vertex(c) => {
                        if c >= n {
                            return Err(ForestError::NoSuchVertex(c));
                        }
                        if c == root {
                            return Err(ForestError::Malformed("root vertex used as a child".into()));
                        }
                        if parent[c].is_some() {
                            return Err(ForestError::Malformed(format!(
                                "vertex {c} has two outgoing edges"
                            )));
                        }
                        parent[c] = Some((v, pos));
                    }
                }
            }
        }
        let arity = leaves.len();
        leaves.sort_unstable();
        if leaves.iter().enumerate().any(|(k, &j)| j != k + 1) {
            return Err(ForestError::Malformed(
                "leaf numbering is not a bijection onto 1..r".into(),
            ));
        }
        // Every non-root vertex has one parent; reachability rules out cycles.
        let mut seen = vec![false; n];
        let mut stack = vec![root];
        let mut count = 0;
        while let Some(v) = stack.pop() {
            if seen[v] {
                return Err(ForestError::Malformed("cycle detected".into()));
            }
            seen[v] = true;
            count += 1;
            for slot in &children[v] {
                if let Slot::Vertex(c) = slot {
                    stack.push(*c);
                }
            }
        }
        if count != n {
            return Err(ForestError::Malformed("tree is not connected".into()));
        }
        Ok(RTree { children, parent, root, arity })
    }

    fn from_parts_unchecked(children: Vec<Vec<Slot>>, root: VertexId) -> Self {
        let n = children.len();
        let mut parent = vec![None; n];
        let mut arity = 0;
        for (v, slots) in children.iter().enumerate() {
            for (pos, slot) in slots.iter().enumerate() {
                match *slot {
                    Slot::Leaf(_) => arity += 1,
                    Slot::Vertex(c) => parent[c] = Some((v, pos)),
                }
            }
        }
        debug_assert!(RTree::new(children.clone(), root).is_ok());
        RTree { children, parent, root, arity }
    }

    /// A single vertex with `r` leaves numbered `1..=r`.
    pub fn corolla(r: usize) -> Self {
        RTree::from_parts_unchecked(vec![(1..=r).map(Slot::Leaf).collect()], 0)
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn num_vertices(&self) -> usize {
        self.children.len()
    }

    pub fn root(&self) -> VertexId {
        self.root
    }

    pub fn children(&self, v: VertexId) -> &[Slot] {
        &self.children[v]
    }

    /// Number of ingoing edges `r_x` of vertex `v`.
    pub fn vertex_arity(&self, v: VertexId) -> usize {
        self.children[v].len()
    }

    /// Target vertex and 0-based position of the outgoing edge of `v`.
    pub fn parent(&self, v: VertexId) -> Option<(VertexId, usize)> {
        self.parent[v]
    }

    pub fn is_corolla(&self) -> bool {
        self.children.len() == 1
    }

    pub fn is_inner_edge(&self, e: VertexId) -> bool {
        e < self.num_vertices() && e != self.root
    }

    /// Inner edges, named by their source vertex.
    pub fn inner_edges(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.num_vertices()).filter(move |&v| v != self.root)
    }

    pub fn preorder(&self) -> Vec<VertexId> {
        self.preorder_from(self.root)
    }

    /// Vertices of the subtree above `v` (including `v`), in preorder.
    pub fn preorder_from(&self, v: VertexId) -> Vec<VertexId> {
        let mut out = Vec::new();
        let mut stack = vec![v];
        while let Some(x) = stack.pop() {
            out.push(x);
            for slot in self.children[x].iter().rev() {
                if let Slot::Vertex(c) = slot {
                    stack.push(*c);
                }
            }
        }
        out
    }

    pub fn postorder(&self) -> Vec<VertexId> {
        let mut pre = self.preorder();
        // Reversed preorder with reversed children is a valid bottom-up order.
        pre.reverse();
        pre
    }

    pub fn depth(&self, mut v: VertexId) -> usize {
        let mut d = 0;
        while let Some((p, _)) = self.parent[v] {
            v = p;
            d += 1;
        }
        d
    }

    /// Leaf numbers in plane (left-to-right) order.
    pub fn leaf_order(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.arity);
        self.collect_leaves(self.root, &mut out);
        out
    }

    fn collect_leaves(&self, v: VertexId, out: &mut Vec<usize>) {
        for slot in &self.children[v] {
            match *slot {
                Slot::Leaf(j) => out.push(j),
                Slot::Vertex(c) => self.collect_leaves(c, out),
            }
        }
    }

    /// Number of numbered leaves above `v`.
    pub fn leaves_above(&self, v: VertexId) -> usize {
        let mut out = Vec::new();
        self.collect_leaves(v, &mut out);
        out.len()
    }

    /// Whether the subtree above `v` has no numbered leaf, i.e. every chain of
    /// edges starting at `v` ends at a vertex without ingoing edges.
    pub fn is_leafless_above(&self, v: VertexId) -> bool {
        self.leaves_above(v) == 0
    }

    /// Non-root vertices whose subtree is leafless while their parent's is not.
    pub fn maximal_leafless_subtrees(&self) -> Vec<VertexId> {
        let counts = self.leaf_counts();
        self.preorder()
            .into_iter()
            .filter(|&v| match self.parent[v] {
                Some((p, _)) => counts[v] == 0 && counts[p] > 0,
                None => false,
            })
            .collect()
    }

    /// Leaves above each vertex.
    pub fn leaf_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_vertices()];
        for v in self.postorder() {
            counts[v] = self.children[v]
                .iter()
                .map(|s| match *s {
                    Slot::Leaf(_) => 1,
                    Slot::Vertex(c) => counts[c],
                })
                .sum();
        }
        counts
    }

    /// Renames leaf `j` to `σ(j)`.
    pub fn relabel_leaves(&self, sigma: &Perm) -> RTree {
        assert_eq!(sigma.len(), self.arity, "permutation size must equal arity");
        let children = self
            .children
            .iter()
            .map(|slots| {
                slots
                    .iter()
                    .map(|s| match *s {
                        Slot::Leaf(j) => Slot::Leaf(sigma.apply(j - 1) + 1),
                        v => v,
                    })
                    .collect()
            })
            .collect();
        RTree { children, parent: self.parent.clone(), root: self.root, arity: self.arity }
    }

    /// Plugs the outgoing edge of `other` into leaf `i` of `self`.
    ///
    /// Vertex ids of `self` are kept; vertex `v` of `other` becomes
    /// `v + self.num_vertices()`. Leaves of `other` occupy `i..i+arity(other)`
    /// and leaves of `self` above `i` shift by `arity(other) - 1`.
    pub fn graft(&self, i: usize, other: &RTree) -> Result<RTree, ForestError> {
        if i == 0 || i > self.arity {
            return Err(ForestError::LeafOutOfRange { index: i, arity: self.arity });
        }
        let offset = self.num_vertices();
        let n = other.arity;
        let mut children: Vec<Vec<Slot>> = self
            .children
            .iter()
            .map(|slots| {
                slots
                    .iter()
                    .map(|s| match *s {
                        Slot::Leaf(j) if j == i => Slot::Vertex(other.root + offset),
                        Slot::Leaf(j) if j > i => Slot::Leaf(j + n - 1),
                        s => s,
                    })
                    .collect()
            })
            .collect();
        children.extend(other.children.iter().map(|slots| {
            slots
                .iter()
                .map(|s| match *s {
                    Slot::Leaf(j) => Slot::Leaf(j + i - 1),
                    Slot::Vertex(c) => Slot::Vertex(c + offset),
                })
                .collect::<Vec<_>>()
        }));
        Ok(RTree::from_parts_unchecked(children, self.root))
    }

    /// Contracts the inner edge whose source is `e`.
    ///
    /// The source's ingoing edges replace `e` in the target's ingoing list at
    /// the position of `e`.
    pub fn contract_edge(&self, e: VertexId) -> Result<(RTree, Merge), ForestError> {
        if e >= self.num_vertices() {
            return Err(ForestError::NoSuchVertex(e));
        }
        let (target, position) = self.parent[e].ok_or(ForestError::NotInnerEdge(e))?;
        let remap: Vec<VertexId> = (0..self.num_vertices())
            .map(|v| match v.cmp(&e) {
                std::cmp::Ordering::Less => v,
                std::cmp::Ordering::Equal => {
                    if target < e {
                        target
                    } else {
                        target - 1
                    }
                }
                std::cmp::Ordering::Greater => v - 1,
            })
            .collect();
        let map_slot = |s: &Slot| match *s {
            Slot::Vertex(c) => Slot::Vertex(remap[c]),
            leaf => leaf,
        };
        let mut children = Vec::with_capacity(self.num_vertices() - 1);
        for (v, slots) in self.children.iter().enumerate() {
            if v == e {
                continue;
            }
            if v == target {
                let mut merged = Vec::with_capacity(slots.len() + self.children[e].len() - 1);
                merged.extend(slots[..position].iter().map(map_slot));
                merged.extend(self.children[e].iter().map(map_slot));
                merged.extend(slots[position + 1..].iter().map(map_slot));
                children.push(merged);
            } else {
                children.push(slots.iter().map(map_slot).collect());
            }
        }
        let tree = RTree::from_parts_unchecked(children, remap[self.root]);
        let merge = Merge {
            target: remap[target],
            position,
            source_arity: self.children[e].len(),
            remap,
        };
        Ok((tree, merge))
    }

    /// Removes everything strictly above `v`, which must carry no leaves.
    ///
    /// Returns the pruned tree and, for every old vertex, its new id (`None`
    /// for removed vertices).
    pub fn prune_above(&self, v: VertexId) -> Result<(RTree, Vec<Option<VertexId>>), ForestError> {
        if v >= self.num_vertices() {
            return Err(ForestError::NoSuchVertex(v));
        }
        if !self.is_leafless_above(v) {
            return Err(ForestError::SubtreeHasLeaves(v));
        }
        let removed: HashSet<VertexId> = self.preorder_from(v).into_iter().skip(1).collect();
        let mut remap = vec![None; self.num_vertices()];
        let mut next = 0;
        for (x, slot) in remap.iter_mut().enumerate() {
            if !removed.contains(&x) {
                *slot = Some(next);
                next += 1;
            }
        }
        let children = (0..self.num_vertices())
            .filter(|x| !removed.contains(x))
            .map(|x| {
                if x == v {
                    Vec::new()
                } else {
                    self.children[x]
                        .iter()
                        .map(|s| match *s {
                            Slot::Vertex(c) => Slot::Vertex(remap[c].expect("kept")),
                            leaf => leaf,
                        })
                        .collect()
                }
            })
            .collect();
        let root = remap[self.root].expect("root is never pruned");
        Ok((RTree::from_parts_unchecked(children, root), remap))
    }

    /// Removes a vertex with exactly one ingoing edge, joining that edge to its
    /// outgoing edge. A root whose only ingoing edge is a leaf cannot be
    /// removed (the tree would have no vertex left).
    ///
    /// Returns the new tree and, for every old vertex, its new id (`None` for
    /// the removed vertex).
    pub fn splice_unary(&self, v: VertexId) -> Result<(RTree, Vec<Option<VertexId>>), ForestError> {
        if v >= self.num_vertices() {
            return Err(ForestError::NoSuchVertex(v));
        }
        if self.children[v].len() != 1 {
            return Err(ForestError::Malformed(format!("vertex {v} is not unary")));
        }
        let up = self.children[v][0];
        let new_root = match (self.parent[v], up) {
            (None, Slot::Vertex(c)) => c,
            (None, Slot::Leaf(_)) => {
                return Err(ForestError::Malformed("cannot remove the only vertex".into()))
            }
            (Some(_), _) => self.root,
        };
        let remap: Vec<Option<VertexId>> = (0..self.num_vertices())
            .map(|x| match x.cmp(&v) {
                std::cmp::Ordering::Less => Some(x),
                std::cmp::Ordering::Equal => None,
                std::cmp::Ordering::Greater => Some(x - 1),
            })
            .collect();
        let map_slot = |s: Slot| match s {
            Slot::Vertex(c) if c == v => match up {
                Slot::Vertex(u) => Slot::Vertex(remap[u].expect("kept")),
                leaf => leaf,
            },
            Slot::Vertex(c) => Slot::Vertex(remap[c].expect("kept")),
            leaf => leaf,
        };
        let children = (0..self.num_vertices())
            .filter(|&x| x != v)
            .map(|x| self.children[x].iter().map(|&s| map_slot(s)).collect())
            .collect();
        let root = remap[new_root].expect("root kept");
        Ok((RTree::from_parts_unchecked(children, root), remap))
    }

    /// Canonical representative of the abstract (non-planar) tree.
    pub fn canonicalize(&self) -> RTree {
        self.canonical_form_with(|_, _| 0u8).tree
    }

    /// Canonicalises a decorated tree.
    ///
    /// `deco(v, order)` returns the decoration key of vertex `v` when its old
    /// child positions are listed in `order`; decorations that depend on the
    /// child order (operad labels) must transport themselves along it. Children
    /// are sorted by the keys of their subtrees; among identical leafless
    /// subtrees the order minimising the decoration key is chosen. Vertices are
    /// renumbered in preorder.
    pub fn canonical_form_with<K, F>(&self, mut deco: F) -> Canonical
    where
        K: Ord + Clone,
        F: FnMut(VertexId, &[usize]) -> K,
    {
        let n = self.num_vertices();
        let mut keys: Vec<Option<CanonKey<K>>> = vec![None; n];
        let mut orders: Vec<Vec<usize>> = vec![Vec::new(); n];
        for v in self.postorder() {
            let child_keys: Vec<CanonKey<K>> = self.children[v]
                .iter()
                .map(|s| match *s {
                    Slot::Leaf(j) => CanonKey::Leaf(j),
                    Slot::Vertex(c) => keys[c].clone().expect("postorder"),
                })
                .collect();
            let mut sorted: Vec<usize> = (0..child_keys.len()).collect();
            sorted.sort_by(|&a, &b| child_keys[a].cmp(&child_keys[b]));
            let mut groups: Vec<(usize, usize)> = Vec::new();
            let mut start = 0;
            for k in 1..=sorted.len() {
                if k == sorted.len() || child_keys[sorted[k]] != child_keys[sorted[start]] {
                    if k - start > 1 {
                        groups.push((start, k));
                    }
                    start = k;
                }
            }
            let (order, dkey) = if groups.is_empty() {
                let d = deco(v, &sorted);
                (sorted, d)
            } else {
                let mut best: Option<(K, Vec<usize>)> = None;
                for candidate in tie_orderings(&sorted, &groups) {
                    let d = deco(v, &candidate);
                    if best.as_ref().is_none_or(|(bk, _)| d < *bk) {
                        best = Some((d, candidate));
                    }
                }
                let (d, o) = best.expect("at least one ordering");
                (o, d)
            };
            let ordered_keys = order.iter().map(|&p| child_keys[p].clone()).collect();
            keys[v] = Some(CanonKey::Node(dkey, ordered_keys));
            orders[v] = order;
        }
        // Renumber in preorder along the chosen orders.
        let mut old_to_new = vec![usize::MAX; n];
        let mut visit = Vec::with_capacity(n);
        let mut stack = vec![self.root];
        while let Some(v) = stack.pop() {
            old_to_new[v] = visit.len();
            visit.push(v);
            for &pos in orders[v].iter().rev() {
                if let Slot::Vertex(c) = self.children[v][pos] {
                    stack.push(c);
                }
            }
        }
        let children = visit
            .iter()
            .map(|&v| {
                orders[v]
                    .iter()
                    .map(|&pos| match self.children[v][pos] {
                        Slot::Vertex(c) => Slot::Vertex(old_to_new[c]),
                        leaf => leaf,
                    })
                    .collect()
            })
            .collect();
        Canonical {
            tree: RTree::from_parts_unchecked(children, 0),
            old_to_new,
            orders,
        }
    }

    /// Cuts the given inner edges and returns the components.
    ///
    /// The root component comes first, then the others in preorder of their
    /// root vertices. Every component numbers its leaves in plane order and
    /// records whether each one is an original leaf or a cut edge.
    pub fn cut_edges(&self, edges: &[VertexId]) -> Result<Vec<Piece>, ForestError> {
        let cut: HashSet<VertexId> = edges.iter().copied().collect();
        for &e in &cut {
            if !self.is_inner_edge(e) {
                return Err(if e >= self.num_vertices() {
                    ForestError::NoSuchVertex(e)
                } else {
                    ForestError::NotInnerEdge(e)
                });
            }
        }
        let mut pieces = Vec::new();
        for top in self.preorder() {
            if top != self.root && !cut.contains(&top) {
                continue;
            }
            let mut vertices = Vec::new();
            let mut local = BTreeMap::new();
            let mut stack = vec![top];
            while let Some(v) = stack.pop() {
                local.insert(v, vertices.len());
                vertices.push(v);
                for slot in self.children[v].iter().rev() {
                    if let Slot::Vertex(c) = slot {
                        if !cut.contains(c) {
                            stack.push(*c);
                        }
                    }
                }
            }
            let mut boundary = Vec::new();
            let mut children = vec![Vec::new(); vertices.len()];
            // Plane order of leaves is the preorder traversal order of slots.
            self.fill_piece(top, &cut, &local, &mut children, &mut boundary);
            pieces.push(Piece {
                tree: RTree::from_parts_unchecked(children, 0),
                vertices,
                boundary,
                hangs_from: if top == self.root { None } else { Some(top) },
            });
        }
        Ok(pieces)
    }

    fn fill_piece(
        &self,
        v: VertexId,
        cut: &HashSet<VertexId>,
        local: &BTreeMap<VertexId, usize>,
        children: &mut [Vec<Slot>],
        boundary: &mut Vec<Boundary>,
    ) {
        let lv = local[&v];
        for slot in &self.children[v] {
            match *slot {
                Slot::Leaf(j) => {
                    boundary.push(Boundary::Leaf(j));
                    children[lv].push(Slot::Leaf(boundary.len()));
                }
                Slot::Vertex(c) if cut.contains(&c) => {
                    boundary.push(Boundary::Cut(c));
                    children[lv].push(Slot::Leaf(boundary.len()));
                }
                Slot::Vertex(c) => {
                    children[lv].push(Slot::Vertex(local[&c]));
                    self.fill_piece(c, cut, local, children, boundary);
                }
            }
        }
    }

    /// Reassembles the output of [`RTree::cut_edges`] by grafting every piece
    /// into the slot recorded for it.
    pub fn regraft(pieces: &[Piece]) -> Result<RTree, ForestError> {
        let root = pieces
            .iter()
            .position(|p| p.hangs_from.is_none())
            .ok_or_else(|| ForestError::Malformed("no root piece".into()))?;
        let (tree, leaves) = Self::regraft_from(pieces, root)?;
        let sigma = Perm::from_images(leaves.iter().map(|j| j - 1).collect())
            .ok_or_else(|| ForestError::Malformed("pieces do not cover the leaves".into()))?;
        Ok(tree.relabel_leaves(&sigma))
    }

    /// Returns the assembled tree (leaves in plane order) and the original leaf
    /// numbers in that order.
    fn regraft_from(pieces: &[Piece], at: usize) -> Result<(RTree, Vec<usize>), ForestError> {
        let piece = &pieces[at];
        let mut tree = piece.tree.clone();
        let mut labels: Vec<Vec<usize>> = Vec::with_capacity(piece.boundary.len());
        let mut subtrees = Vec::with_capacity(piece.boundary.len());
        for b in &piece.boundary {
            match *b {
                Boundary::Leaf(j) => {
                    labels.push(vec![j]);
                    subtrees.push(None);
                }
                Boundary::Cut(e) => {
                    let child = pieces
                        .iter()
                        .position(|p| p.hangs_from == Some(e))
                        .ok_or_else(|| ForestError::Malformed(format!("no piece hangs from {e}")))?;
                    let (sub, sub_labels) = Self::regraft_from(pieces, child)?;
                    labels.push(sub_labels);
                    subtrees.push(Some(sub));
                }
            }
        }
        for (idx, sub) in subtrees.iter().enumerate().rev() {
            if let Some(sub) = sub {
                tree = tree.graft(idx + 1, sub)?;
            }
        }
        Ok((tree, labels.into_iter().flatten().collect()))
    }

    pub fn to_json(&self) -> TreeJson {
        TreeJson {
            arity: self.arity,
            nodes: self
                .children
                .iter()
                .enumerate()
                .map(|(id, slots)| NodeJson {
                    id,
                    children: slots
                        .iter()
                        .map(|s| match *s {
                            Slot::Leaf(j) => ChildJson::Leaf { leaf: j },
                            Slot::Vertex(c) => ChildJson::Node(c),
                        })
                        .collect(),
                })
                .collect(),
            root: self.root,
        }
    }

    /// Parses the JSON tree schema; also returns the file id of every vertex.
    pub fn from_json(json: &TreeJson) -> Result<(RTree, Vec<usize>), ForestError> {
        let mut index = BTreeMap::new();
        for (k, node) in json.nodes.iter().enumerate() {
            if index.insert(node.id, k).is_some() {
                return Err(ForestError::Malformed(format!("duplicate node id {}", node.id)));
            }
        }
        let lookup = |id: usize| {
            index
                .get(&id)
                .copied()
                .ok_or_else(|| ForestError::Malformed(format!("unknown node id {id}")))
        };
        let mut children = Vec::with_capacity(json.nodes.len());
        for node in &json.nodes {
            let mut slots = Vec::with_capacity(node.children.len());
            for c in &node.children {
                slots.push(match *c {
                    ChildJson::Leaf { leaf } => Slot::Leaf(leaf),
                    ChildJson::Node(id) => Slot::Vertex(lookup(id)?),
                });
            }
            children.push(slots);
        }
        let tree = RTree::new(children, lookup(json.root)?)?;
        if tree.arity != json.arity {
            return Err(ForestError::Malformed(format!(
                "declared arity {} but the tree has {} leaves",
                json.arity, tree.arity
            )));
        }
        Ok((tree, json.nodes.iter().map(|n| n.id).collect()))
    }
}

impl RTree {
    /// A random tree with at most `max_vertices` vertices, each with at most
    /// `max_vertex_arity` ingoing edges, and randomly numbered leaves.
    ///
    /// `zero_weight` is the probability that a vertex gets no ingoing edges.
    pub fn random(
        rng: &mut dyn RngCore,
        max_vertices: usize,
        max_vertex_arity: usize,
        zero_weight: f64,
    ) -> RTree {
        let target = rng.gen_range(1..=max_vertices.max(1));
        let arity_of = |rng: &mut dyn RngCore| {
            if max_vertex_arity == 0 || rng.gen_bool(zero_weight) {
                0
            } else {
                rng.gen_range(1..=max_vertex_arity)
            }
        };
        let mut children: Vec<Vec<Option<VertexId>>> = vec![vec![None; arity_of(rng)]];
        let mut open: Vec<(VertexId, usize)> = (0..children[0].len()).map(|p| (0, p)).collect();
        while children.len() < target && !open.is_empty() {
            let (v, pos) = open.swap_remove(rng.gen_range(0..open.len()));
            let id = children.len();
            let a = arity_of(rng);
            children.push(vec![None; a]);
            children[v][pos] = Some(id);
            open.extend((0..a).map(|p| (id, p)));
        }
        let leaves = children.iter().flatten().filter(|s| s.is_none()).count();
        let mut numbers: Vec<usize> = (1..=leaves).collect();
        for k in (1..leaves).rev() {
            numbers.swap(k, rng.gen_range(0..=k));
        }
        let mut next = numbers.into_iter();
        let slots = children
            .into_iter()
            .map(|row| {
                row.into_iter()
                    .map(|s| match s {
                        Some(c) => Slot::Vertex(c),
                        None => Slot::Leaf(next.next().expect("one number per leaf")),
                    })
                    .collect()
            })
            .collect();
        RTree::from_parts_unchecked(slots, 0)
    }

    /// The same abstract tree with shuffled sibling orders and vertex ids.
    ///
    /// Returns the new tree, the old-to-new vertex map and, for every old
    /// vertex, the permutation sending old child positions to new ones.
    pub fn shuffled(&self, rng: &mut dyn RngCore) -> (RTree, Vec<VertexId>, Vec<Perm>) {
        let n = self.num_vertices();
        let mut ids: Vec<VertexId> = (0..n).collect();
        for k in (1..n).rev() {
            ids.swap(k, rng.gen_range(0..=k));
        }
        let mut perms = Vec::with_capacity(n);
        let mut children = vec![Vec::new(); n];
        for v in 0..n {
            let r = self.children[v].len();
            let mut images: Vec<usize> = (0..r).collect();
            for k in (1..r).rev() {
                images.swap(k, rng.gen_range(0..=k));
            }
            let perm = Perm::from_images(images).expect("shuffle is a bijection");
            let mut row = vec![Slot::Leaf(0); r];
            for (old, slot) in self.children[v].iter().enumerate() {
                row[perm.apply(old)] = match *slot {
                    Slot::Vertex(c) => Slot::Vertex(ids[c]),
                    leaf => leaf,
                };
            }
            children[ids[v]] = row;
            perms.push(perm);
        }
        (RTree::from_parts_unchecked(children, ids[self.root]), ids, perms)
    }
}

/// All orderings obtained from `sorted` by permuting within each tie group.
fn tie_orderings(sorted: &[usize], groups: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut out = vec![sorted.to_vec()];
    for &(a, b) in groups {
        let perms = Perm::all(b - a);
        let mut next = Vec::with_capacity(out.len() * perms.len());
        for base in &out {
            for p in &perms {
                let mut o = base.clone();
                for k in 0..(b - a) {
                    o[a + k] = base[a + p.apply(k)];
                }
                next.push(o);
            }
        }
        out = next;
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeJson {
    pub arity: usize,
    pub nodes: Vec<NodeJson>,
    pub root: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeJson {
    pub id: usize,
    pub children: Vec<ChildJson>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ChildJson {
    Node(usize),
    Leaf { leaf: usize },
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binary_over_ternary() -> RTree {
        RTree::corolla(2).graft(1, &RTree::corolla(3)).unwrap()
    }

    #[test]
    fn corolla_shapes() {
        let c0 = RTree::corolla(0);
        assert_eq!(c0.arity(), 0);
        assert_eq!(c0.num_vertices(), 1);
        assert_eq!(c0.vertex_arity(0), 0);
        let c3 = RTree::corolla(3);
        assert_eq!(c3.leaf_order(), vec![1, 2, 3]);
        assert_eq!(c3.inner_edges().count(), 0);
        assert_eq!(RTree::corolla(1).vertex_arity(0), 1);
    }

    #[test]
    fn graft_leaf_bookkeeping() {
        let t = binary_over_ternary();
        assert_eq!(t.arity(), 4);
        assert_eq!(t.inner_edges().count(), 1);
        // T's leaves are 1,2,3 and S's leaf 2 became 4.
        assert_eq!(t.children(0), &[Slot::Vertex(1), Slot::Leaf(4)]);
        assert_eq!(t.children(1), &[Slot::Leaf(1), Slot::Leaf(2), Slot::Leaf(3)]);
    }

    #[test]
    fn graft_with_arity_zero() {
        let chain = RTree::corolla(1).graft(1, &RTree::corolla(0)).unwrap();
        assert_eq!(chain.arity(), 0);
        assert_eq!(chain.vertex_arity(1), 0);
        let t = RTree::corolla(2).graft(2, &RTree::corolla(0)).unwrap();
        assert_eq!(t.arity(), 1);
        assert_eq!(t.children(0), &[Slot::Leaf(1), Slot::Vertex(1)]);
    }

    #[test]
    fn graft_out_of_range() {
        assert_eq!(
            RTree::corolla(2).graft(3, &RTree::corolla(1)),
            Err(ForestError::LeafOutOfRange { index: 3, arity: 2 })
        );
        assert!(RTree::corolla(2).graft(0, &RTree::corolla(1)).is_err());
    }

    #[test]
    fn contract_single_edge() {
        let (c, merge) = binary_over_ternary().contract_edge(1).unwrap();
        assert_eq!(c.canonicalize(), RTree::corolla(4));
        assert_eq!(merge.target, 0);
        assert_eq!(merge.position, 0);
        assert_eq!(merge.source_arity, 3);
    }

    #[test]
    fn contract_root_edge_is_an_error() {
        assert_eq!(
            binary_over_ternary().contract_edge(0).unwrap_err(),
            ForestError::NotInnerEdge(0)
        );
        assert!(RTree::corolla(2).contract_edge(5).is_err());
    }

    #[test]
    fn canonicalize_reorders_siblings() {
        let a = RTree::new(vec![vec![Slot::Leaf(2), Slot::Leaf(1)]], 0).unwrap();
        assert_eq!(a.canonicalize(), RTree::corolla(2));
        assert_eq!(RTree::corolla(3).canonicalize(), RTree::corolla(3));
    }

    #[test]
    fn cut_nothing_and_everything() {
        let t = binary_over_ternary();
        let none = t.cut_edges(&[]).unwrap();
        assert_eq!(none.len(), 1);
        assert_eq!(none[0].tree, t);
        let all = t.cut_edges(&[1]).unwrap();
        assert_eq!(all.len(), 2);
        assert_eq!(all[0].tree, RTree::corolla(2));
        assert_eq!(all[0].boundary, vec![Boundary::Cut(1), Boundary::Leaf(4)]);
        assert_eq!(all[1].tree, RTree::corolla(3));
        assert_eq!(all[1].hangs_from, Some(1));
        assert_eq!(RTree::regraft(&all).unwrap().canonicalize(), t.canonicalize());
    }

    #[test]
    fn maximal_leafless() {
        // root(leaf 1, a(), b(c())) : a and b are maximal, c is not.
        let t = RTree::new(
            vec![
                vec![Slot::Leaf(1), Slot::Vertex(1), Slot::Vertex(2)],
                vec![],
                vec![Slot::Vertex(3)],
                vec![],
            ],
            0,
        )
        .unwrap();
        assert_eq!(t.maximal_leafless_subtrees(), vec![1, 2]);
    }

    #[test]
    fn rejects_malformed() {
        assert!(RTree::new(vec![vec![Slot::Leaf(2)]], 0).is_err());
        assert!(RTree::new(vec![vec![Slot::Leaf(1), Slot::Leaf(1)]], 0).is_err());
        assert!(RTree::new(vec![vec![], vec![]], 0).is_err());
        assert!(RTree::new(vec![vec![Slot::Vertex(1)], vec![Slot::Vertex(0)]], 0).is_err());
    }

    #[test]
    fn splice_unary_vertices() {
        // root(a(leaf 1), leaf 2) with a unary.
        let t = RTree::new(vec![vec![Slot::Vertex(1), Slot::Leaf(2)], vec![Slot::Leaf(1)]], 0).unwrap();
        let (s, remap) = t.splice_unary(1).unwrap();
        assert_eq!(s, RTree::corolla(2));
        assert_eq!(remap, vec![Some(0), None]);
        // unary root over a binary vertex.
        let u = RTree::corolla(1).graft(1, &RTree::corolla(2)).unwrap();
        let (s, _) = u.splice_unary(0).unwrap();
        assert_eq!(s, RTree::corolla(2));
        assert!(RTree::corolla(1).splice_unary(0).is_err());
        assert!(RTree::corolla(2).splice_unary(0).is_err());
    }

    #[test]
    fn json_roundtrip() {
        let t = binary_over_ternary();
        let json = serde_json::to_string(&t.to_json()).unwrap();
        let parsed: TreeJson = serde_json::from_str(&json).unwrap();
        assert_eq!(RTree::from_json(&parsed).unwrap().0, t);
    }
}
