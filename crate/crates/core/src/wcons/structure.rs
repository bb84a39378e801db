use num_traits::{One, Zero};

use super::{Kind, Length, Variant, WCons, WElement, WError};
use crate::forest::{Boundary, VertexId};
use crate::opcore::Operad;
use crate::perm::Perm;

/// A piece of an element cut along its edges of length 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factor<E> {
    /// The piece; its leaves are numbered in plane order.
    pub element: WElement<E>,
    /// What each leaf of the piece was: an original leaf or a cut edge.
    pub boundary: Vec<Boundary>,
    /// The cut edge (named by its source vertex) this piece hangs from.
    pub hangs_from: Option<VertexId>,
}

/// An element in height coordinates: `h_root = 0`, `h_x = h_parent + l_x`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HeightedElement<E> {
    pub element: WElement<E>,
    pub heights: Vec<Length>,
}

/// A normal form of `W(P)` seen in `W'(N)`, `N` the non-unit elements.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NonUnitalRep<E> {
    /// The identity `η(1)`, matching the tree without vertices.
    Trivial,
    Tree(WElement<E>),
}

impl<O: Operad> WCons<O> {
    /// Whether no inner edge has length 1, i.e. the element is not a
    /// composite of smaller ones.
    pub fn is_generator(&self, w: &WElement<O::Elem>) -> bool {
        w.inner_lengths().all(|(_, l)| !l.is_one())
    }

    /// Cuts `w` along its inner edges of length 1; the root piece comes first.
    pub fn decompose(&self, w: &WElement<O::Elem>) -> Result<Vec<Factor<O::Elem>>, WError> {
        let cut: Vec<VertexId> = w.inner_lengths().filter(|(_, l)| l.is_one()).map(|(e, _)| e).collect();
        let pieces = w.tree().cut_edges(&cut)?;
        Ok(pieces
            .into_iter()
            .map(|piece| {
                let labels = piece.vertices.iter().map(|&v| w.labels()[v].clone()).collect();
                let lengths = piece.vertices.iter().map(|&v| w.lengths()[v]).collect();
                Factor {
                    element: WElement::from_parts(piece.tree, labels, lengths, w.variant()),
                    boundary: piece.boundary,
                    hangs_from: piece.hangs_from,
                }
            })
            .collect())
    }

    /// Grafts factors back together along edges of length 1 (no rewriting).
    pub fn recompose(&self, factors: &[Factor<O::Elem>]) -> Result<WElement<O::Elem>, WError> {
        let root = factors
            .iter()
            .position(|f| f.hangs_from.is_none())
            .ok_or_else(|| WError::Malformed("no root factor".into()))?;
        let (w, leaves) = self.assemble(factors, root, 0)?;
        let sigma = Perm::from_images(leaves.iter().map(|j| j - 1).collect())
            .ok_or_else(|| WError::Malformed("factors do not cover the leaves".into()))?;
        let tree = w.tree().relabel_leaves(&sigma);
        Ok(WElement::from_parts(tree, w.labels, w.lengths, w.variant))
    }

    fn assemble(
        &self,
        factors: &[Factor<O::Elem>],
        at: usize,
        depth: usize,
    ) -> Result<(WElement<O::Elem>, Vec<usize>), WError> {
        if depth > factors.len() {
            return Err(WError::Malformed("factors form a cycle".into()));
        }
        let f = &factors[at];
        let mut cur = f.element.clone();
        let mut leaves = Vec::with_capacity(f.boundary.len());
        let mut subs = Vec::new();
        for b in &f.boundary {
            match *b {
                Boundary::Leaf(j) => {
                    leaves.push(vec![j]);
                    subs.push(None);
                }
                Boundary::Cut(e) => {
                    let child = factors
                        .iter()
                        .position(|g| g.hangs_from == Some(e))
                        .ok_or_else(|| WError::Malformed(format!("no factor hangs from {e}")))?;
                    let (sub, sub_leaves) = self.assemble(factors, child, depth + 1)?;
                    leaves.push(sub_leaves);
                    subs.push(Some(sub));
                }
            }
        }
        for (idx, sub) in subs.iter().enumerate().rev() {
            if let Some(sub) = sub {
                cur = self.graft_raw(&cur, idx + 1, sub, Length::one())?;
            }
        }
        Ok((cur, leaves.into_iter().flatten().collect()))
    }

    /// Height coordinates; only meaningful without the unit relation.
    pub fn to_heights(&self, w: &WElement<O::Elem>) -> Result<HeightedElement<O::Elem>, WError> {
        if w.variant().has_unit_relation() {
            return Err(WError::UnitRelation(w.variant()));
        }
        let t = w.tree();
        let mut heights = vec![Length::zero(); t.num_vertices()];
        for v in t.preorder() {
            if let Some((p, _)) = t.parent(v) {
                heights[v] = heights[p] + w.lengths()[v];
            }
        }
        Ok(HeightedElement { element: w.clone(), heights })
    }

    /// Rebuilds lengths from heights on the tree and labels of `h.element`.
    pub fn from_heights(&self, h: &HeightedElement<O::Elem>) -> Result<WElement<O::Elem>, WError> {
        let w = &h.element;
        if w.variant().has_unit_relation() {
            return Err(WError::UnitRelation(w.variant()));
        }
        let t = w.tree();
        if h.heights.len() != t.num_vertices() {
            return Err(WError::Heights("one height per vertex is required".into()));
        }
        if !h.heights[t.root()].is_zero() {
            return Err(WError::Heights("the root has nonzero height".into()));
        }
        let mut lengths = vec![Length::zero(); t.num_vertices()];
        for v in 0..t.num_vertices() {
            if let Some((p, _)) = t.parent(v) {
                let l = h.heights[v] - h.heights[p];
                if l < Length::zero() || l > Length::one() {
                    return Err(WError::Heights(format!(
                        "vertex {v} sits {l} above its parent"
                    )));
                }
                lengths[v] = l;
            }
        }
        self.element(t.clone(), w.labels().to_vec(), lengths)
    }

    /// Sends a `W`-normal form to `W'` over the non-unit elements.
    pub fn to_nonunital(&self, w: &WElement<O::Elem>) -> Result<NonUnitalRep<O::Elem>, WError> {
        if w.variant().kind != Kind::W {
            return Err(WError::VariantMismatch(Variant::new(Kind::W, w.variant().k), w.variant()));
        }
        let unit = self.op.unit();
        if w.num_vertices() == 1 && w.labels()[0] == unit {
            return Ok(NonUnitalRep::Trivial);
        }
        if !self.is_normal(w) {
            return Err(WError::Malformed("element is not in normal form".into()));
        }
        Ok(NonUnitalRep::Tree(w.with_variant(Variant::new(Kind::WPrime, w.variant().k))))
    }

    /// Inverse of [`WCons::to_nonunital`]; `self` must be the `W` variant.
    pub fn from_nonunital(&self, rep: &NonUnitalRep<O::Elem>) -> Result<WElement<O::Elem>, WError> {
        if self.variant.kind != Kind::W {
            return Err(WError::VariantMismatch(Variant::new(Kind::W, self.variant.k), self.variant));
        }
        match rep {
            NonUnitalRep::Trivial => Ok(self.identity()),
            NonUnitalRep::Tree(x) => {
                let unit = self.op.unit();
                if x.labels().contains(&unit) {
                    return Err(WError::Malformed("unit label in a non-unital tree".into()));
                }
                Ok(x.with_variant(self.variant))
            }
        }
    }
}
