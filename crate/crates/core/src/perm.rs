//! Permutations of `{0, .., r-1}`, stored as image vectors.
//!
//! The symmetric action used throughout the crate is *relabelling*: acting by
//! `σ` on an operation renames its input `j` to `σ(j)`. With this convention
//! `(σπ)·p = σ·(π·p)`.

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Perm(Vec<usize>);

impl Perm {
    pub fn identity(r: usize) -> Self {
        Perm((0..r).collect())
    }

    /// Builds a permutation from 0-based images; `None` if not a bijection.
    pub fn from_images(images: Vec<usize>) -> Option<Self> {
        let mut seen = vec![false; images.len()];
        for &x in &images {
            if x >= images.len() || seen[x] {
                return None;
            }
            seen[x] = true;
        }
        Some(Perm(images))
    }

    /// Builds a permutation from 1-based images, the form used in files.
    pub fn from_one_based(images: &[usize]) -> Option<Self> {
        if images.contains(&0) {
            return None;
        }
        Self::from_images(images.iter().map(|&x| x - 1).collect())
    }

    pub fn to_one_based(&self) -> Vec<usize> {
        self.0.iter().map(|&x| x + 1).collect()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn images(&self) -> &[usize] {
        &self.0
    }

    #[inline]
    pub fn apply(&self, j: usize) -> usize {
        self.0[j]
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &x)| i == x)
    }

    /// `self ∘ other`, i.e. `j ↦ self(other(j))`.
    pub fn compose(&self, other: &Perm) -> Perm {
        assert_eq!(self.len(), other.len(), "permutation sizes differ");
        Perm(other.0.iter().map(|&j| self.0[j]).collect())
    }

    pub fn inverse(&self) -> Perm {
        let mut inv = vec![0; self.len()];
        for (i, &x) in self.0.iter().enumerate() {
            inv[x] = i;
        }
        Perm(inv)
    }

    /// Lexicographic rank among all permutations of the same size.
    pub fn rank(&self) -> usize {
        let n = self.len();
        let mut rank = 0;
        for i in 0..n {
            let smaller = self.0[i + 1..].iter().filter(|&&x| x < self.0[i]).count();
            rank += smaller * factorial(n - 1 - i);
        }
        rank
    }

    pub fn unrank(n: usize, mut rank: usize) -> Perm {
        let mut pool: Vec<usize> = (0..n).collect();
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let f = factorial(n - 1 - i);
            out.push(pool.remove(rank / f));
            rank %= f;
        }
        Perm(out)
    }

    /// All permutations of size `n` in lexicographic order.
    pub fn all(n: usize) -> Vec<Perm> {
        (0..factorial(n)).map(|k| Perm::unrank(n, k)).collect()
    }

    pub fn transposition(n: usize, a: usize, b: usize) -> Perm {
        let mut v: Vec<usize> = (0..n).collect();
        v.swap(a, b);
        Perm(v)
    }
}

impl fmt::Display for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|x| (x + 1).to_string()).collect();
        write!(f, "[{}]", parts.join(" "))
    }
}

pub fn factorial(n: usize) -> usize {
    (1..=n).product()
}

/// The permutation `τ` with `(σ·p) ∘_i (π·q) = τ · (p ∘_{σ⁻¹(i)} q)`.
///
/// `p` has arity `m`, `q` arity `n`, `i` is 1-based. Returns the slot
/// `σ⁻¹(i)` (1-based) together with `τ ∈ Σ_{m+n-1}`.
pub fn composite_permutation(sigma: &Perm, i: usize, pi: &Perm) -> (usize, Perm) {
    let m = sigma.len();
    let n = pi.len();
    let i0 = i - 1;
    let src_slot = sigma.inverse().apply(i0);
    let total = m + n - 1;
    let mut tau = vec![usize::MAX; total];
    // Position of p-input j in `p ∘_{src_slot} q`, and of q-input t.
    let pos_in = |j: usize, slot: usize| if j < slot { j } else { j + n - 1 };
    for j in 0..m {
        if j == src_slot {
            continue;
        }
        let src = pos_in(j, src_slot);
        let tgt = pos_in(sigma.apply(j), i0);
        tau[src] = tgt;
    }
    for t in 0..n {
        tau[src_slot + t] = i0 + pi.apply(t);
    }
    (src_slot + 1, Perm(tau))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_unrank_roundtrip() {
        for n in 0..5 {
            for (k, p) in Perm::all(n).iter().enumerate() {
                assert_eq!(p.rank(), k);
            }
        }
    }

    #[test]
    fn compose_and_inverse() {
        for p in Perm::all(4) {
            assert!(p.compose(&p.inverse()).is_identity());
            assert!(p.inverse().compose(&p).is_identity());
        }
    }

    #[test]
    fn composite_permutation_trivial() {
        let (slot, tau) = composite_permutation(&Perm::identity(3), 2, &Perm::identity(2));
        assert_eq!(slot, 2);
        assert!(tau.is_identity());
    }

    #[test]
    fn from_images_rejects_non_bijections() {
        assert!(Perm::from_images(vec![0, 0]).is_none());
        assert!(Perm::from_one_based(&[0, 1]).is_none());
        assert!(Perm::from_one_based(&[2, 1]).is_some());
    }
}
