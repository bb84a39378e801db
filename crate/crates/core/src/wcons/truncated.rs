use serde::Serialize;

use super::WElement;
use crate::forest::{Slot, VertexId};

/// Outcome of the arity check for truncated variants.
#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct TruncationReport {
    pub k: usize,
    pub passed: bool,
    pub arity: usize,
    /// Largest arity of a composite of a connected set of vertices joined by
    /// edges of length less than 1.
    pub max_subset_arity: usize,
    /// Vertices of one such set of largest arity.
    pub witness: Vec<VertexId>,
}

impl TruncationReport {
    pub fn summary(&self) -> String {
        if self.arity > self.k {
            format!("tree arity {} exceeds {}", self.arity, self.k)
        } else if self.max_subset_arity > self.k {
            format!(
                "vertices {:?} compose to arity {} above {}",
                self.witness, self.max_subset_arity, self.k
            )
        } else {
            format!("valid for k = {}", self.k)
        }
    }
}

/// Checks that the whole tree and every connected set of vertices whose inner
/// edges have length less than 1 compose to arity at most `k`.
///
/// A connected set `S` composes to arity `1 + Σ_{v∈S} (r_v - 1)`; the maximum
/// is found by a bottom-up pass rooted at every vertex.
pub fn validate_truncated<E: Clone>(w: &WElement<E>, k: usize) -> TruncationReport {
    let t = w.tree();
    let n = t.num_vertices();
    let mut gain = vec![0i64; n];
    for v in t.postorder() {
        let mut g = t.vertex_arity(v) as i64 - 1;
        for slot in t.children(v) {
            if let Slot::Vertex(c) = *slot {
                if w.lengths()[c] < num_traits::One::one() {
                    g += gain[c].max(0);
                }
            }
        }
        gain[v] = g;
    }
    let best = (0..n).max_by_key(|&v| (gain[v], std::cmp::Reverse(v))).expect("nonempty tree");
    let mut witness = Vec::new();
    let mut stack = vec![best];
    while let Some(v) = stack.pop() {
        witness.push(v);
        for slot in t.children(v) {
            if let Slot::Vertex(c) = *slot {
                if w.lengths()[c] < num_traits::One::one() && gain[c] > 0 {
                    stack.push(c);
                }
            }
        }
    }
    witness.sort_unstable();
    let max_subset_arity = (1 + gain[best]).max(0) as usize;
    TruncationReport {
        k,
        passed: t.arity() <= k && max_subset_arity <= k,
        arity: t.arity(),
        max_subset_arity,
        witness,
    }
}
