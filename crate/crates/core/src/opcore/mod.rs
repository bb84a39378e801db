//! Operads in sets.
//!
//! [`Operad`] is the interface every label operad implements: partial
//! compositions `p ∘_i q`, a unit in arity 1, and the relabelling action of
//! the symmetric groups. Symbolic operads ([`crate::bemonoid::ObM`], the
//! fixtures, [`Product`], [`Truncated`]) compute compositions on demand;
//! [`FiniteOperad`] stores explicit tables and is what the quotient machinery
//! ([`unitarize`]) works on.

mod axioms;
pub mod fixtures;
mod finite;
mod unitarize;

use std::fmt::Debug;
use std::hash::Hash;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::perm::Perm;

pub use axioms::{check_axioms, AxiomReport, Violation};
pub use finite::{FElem, FiniteOperad, OperadJson, OperadMorphism, SymmetricSequence};
pub use unitarize::{unitarize, FactorError, Unitarization, UnionFind};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OperadError {
    #[error("slot {slot} out of range for an operation of arity {arity}")]
    SlotOutOfRange { slot: usize, arity: usize },
    #[error("composite of arity {arity} exceeds the arity bound {bound}")]
    ArityBound { arity: usize, bound: usize },
    #[error("composition undefined: {0}")]
    Undefined(String),
    #[error("operad is not unitary (|P(0)| = {0})")]
    NotUnitary(usize),
    #[error("truncation bounds differ: {0:?} vs {1:?}")]
    BoundMismatch(Option<usize>, Option<usize>),
    #[error("invalid injection: {0}")]
    BadInjection(String),
    #[error("malformed operad: {0}")]
    Malformed(String),
}

pub trait Operad {
    type Elem: Clone + Eq + Ord + Hash + Debug;

    fn name(&self) -> String;

    fn arity(&self, p: &Self::Elem) -> usize;

    fn unit(&self) -> Self::Elem;

    /// Largest arity with a component, `None` when unbounded.
    fn bound(&self) -> Option<usize>;

    /// Partial composition `p ∘_i q`, with `i` 1-based.
    fn compose(&self, p: &Self::Elem, i: usize, q: &Self::Elem)
        -> Result<Self::Elem, OperadError>;

    /// Relabelling action: input `j` of `p` is renamed `σ(j)`.
    fn act(&self, sigma: &Perm, p: &Self::Elem) -> Self::Elem;

    /// All elements of the given arity (components are finite).
    fn elements(&self, arity: usize) -> Vec<Self::Elem>;

    fn sample(&self, arity: usize, rng: &mut dyn RngCore) -> Option<Self::Elem> {
        let all = self.elements(arity);
        if all.is_empty() {
            None
        } else {
            Some(all[rng.gen_range(0..all.len())].clone())
        }
    }

    fn display(&self, p: &Self::Elem) -> String {
        format!("{p:?}")
    }

    fn parse(&self, _text: &str) -> Option<Self::Elem> {
        None
    }
}

impl<O: Operad + ?Sized> Operad for &O {
    type Elem = O::Elem;

    fn name(&self) -> String {
        (**self).name()
    }
    fn arity(&self, p: &Self::Elem) -> usize {
        (**self).arity(p)
    }
    fn unit(&self) -> Self::Elem {
        (**self).unit()
    }
    fn bound(&self) -> Option<usize> {
        (**self).bound()
    }
    fn compose(
        &self,
        p: &Self::Elem,
        i: usize,
        q: &Self::Elem,
    ) -> Result<Self::Elem, OperadError> {
        (**self).compose(p, i, q)
    }
    fn act(&self, sigma: &Perm, p: &Self::Elem) -> Self::Elem {
        (**self).act(sigma, p)
    }
    fn elements(&self, arity: usize) -> Vec<Self::Elem> {
        (**self).elements(arity)
    }
    fn sample(&self, arity: usize, rng: &mut dyn RngCore) -> Option<Self::Elem> {
        (**self).sample(arity, rng)
    }
    fn display(&self, p: &Self::Elem) -> String {
        (**self).display(p)
    }
    fn parse(&self, text: &str) -> Option<Self::Elem> {
        (**self).parse(text)
    }
}

/// `P(0)` is a single point.
pub fn is_unitary<O: Operad>(op: &O) -> bool {
    op.elements(0).len() == 1
}

/// The unique arity-zero element of a unitary operad.
pub fn point<O: Operad>(op: &O) -> Result<O::Elem, OperadError> {
    let zero = op.elements(0);
    if zero.len() == 1 {
        Ok(zero.into_iter().next().expect("one element"))
    } else {
        Err(OperadError::NotUnitary(zero.len()))
    }
}

pub(crate) fn check_slot(arity: usize, i: usize) -> Result<(), OperadError> {
    if i == 0 || i > arity {
        Err(OperadError::SlotOutOfRange { slot: i, arity })
    } else {
        Ok(())
    }
}

pub(crate) fn check_bound(arity: usize, bound: Option<usize>) -> Result<(), OperadError> {
    match bound {
        Some(b) if arity > b => Err(OperadError::ArityBound { arity, bound: b }),
        _ => Ok(()),
    }
}

/// An injective map `u: {1..m} → {1..n}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Injection {
    n: usize,
    /// 1-based images `u(1), .., u(m)`.
    map: Vec<usize>,
}

impl Injection {
    pub fn new(n: usize, map: Vec<usize>) -> Result<Self, OperadError> {
        let mut seen = vec![false; n + 1];
        for &x in &map {
            if x == 0 || x > n {
                return Err(OperadError::BadInjection(format!("image {x} outside 1..{n}")));
            }
            if seen[x] {
                return Err(OperadError::BadInjection(format!("image {x} hit twice")));
            }
            seen[x] = true;
        }
        if map.is_empty() {
            return Err(OperadError::BadInjection("source must be nonempty".into()));
        }
        Ok(Injection { n, map })
    }

    pub fn identity(n: usize) -> Self {
        Injection { n, map: (1..=n).collect() }
    }

    pub fn source(&self) -> usize {
        self.map.len()
    }

    pub fn target(&self) -> usize {
        self.n
    }

    pub fn apply(&self, j: usize) -> usize {
        self.map[j - 1]
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Injection) -> Result<Injection, OperadError> {
        if other.n != self.map.len() {
            return Err(OperadError::BadInjection("injections are not composable".into()));
        }
        Ok(Injection { n: self.n, map: other.map.iter().map(|&j| self.map[j - 1]).collect() })
    }

    /// Every injection `{1..m} → {1..n}` for `1 ≤ m ≤ n`.
    pub fn all(n: usize) -> Vec<Injection> {
        let mut out = Vec::new();
        for m in 1..=n {
            let mut current = Vec::new();
            Self::extend(n, m, &mut current, &mut out);
        }
        out
    }

    fn extend(n: usize, m: usize, current: &mut Vec<usize>, out: &mut Vec<Injection>) {
        if current.len() == m {
            out.push(Injection { n, map: current.clone() });
            return;
        }
        for x in 1..=n {
            if !current.contains(&x) {
                current.push(x);
                Self::extend(n, m, current, out);
                current.pop();
            }
        }
    }
}

/// Restriction operator `u*: P(n) → P(m)` of a unitary operad.
///
/// Composes `p` with the arity-zero point at every input outside the image of
/// `u`; the surviving input `u(t)` becomes input `t`.
pub fn restriction<O: Operad>(op: &O, u: &Injection, p: &O::Elem) -> Result<O::Elem, OperadError> {
    let star = point(op)?;
    let n = op.arity(p);
    if n != u.target() {
        return Err(OperadError::BadInjection(format!(
            "injection targets {} inputs but the operation has arity {n}",
            u.target()
        )));
    }
    let mut acc = p.clone();
    for slot in (1..=n).rev() {
        if !u.map.contains(&slot) {
            acc = op.compose(&acc, slot, &star)?;
        }
    }
    let mut kept: Vec<usize> = u.map.clone();
    kept.sort_unstable();
    // Surviving position s holds old input kept[s]; rename it to u⁻¹(kept[s]).
    let images = kept
        .iter()
        .map(|v| u.map.iter().position(|x| x == v).expect("in image"))
        .collect();
    let sigma = Perm::from_images(images).expect("bijection");
    Ok(op.act(&sigma, &acc))
}

/// Arity-wise cartesian product of two operads.
#[derive(Clone, Debug)]
pub struct Product<A, B> {
    pub left: A,
    pub right: B,
}

impl<A: Operad, B: Operad> Product<A, B> {
    pub fn new(left: A, right: B) -> Self {
        Product { left, right }
    }
}

impl<A: Operad, B: Operad> Operad for Product<A, B> {
    type Elem = (A::Elem, B::Elem);

    fn name(&self) -> String {
        format!("{} x {}", self.left.name(), self.right.name())
    }
    fn arity(&self, p: &Self::Elem) -> usize {
        self.left.arity(&p.0)
    }
    fn unit(&self) -> Self::Elem {
        (self.left.unit(), self.right.unit())
    }
    fn bound(&self) -> Option<usize> {
        match (self.left.bound(), self.right.bound()) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }
    fn compose(
        &self,
        p: &Self::Elem,
        i: usize,
        q: &Self::Elem,
    ) -> Result<Self::Elem, OperadError> {
        Ok((self.left.compose(&p.0, i, &q.0)?, self.right.compose(&p.1, i, &q.1)?))
    }
    fn act(&self, sigma: &Perm, p: &Self::Elem) -> Self::Elem {
        (self.left.act(sigma, &p.0), self.right.act(sigma, &p.1))
    }
    fn elements(&self, arity: usize) -> Vec<Self::Elem> {
        let rs = self.right.elements(arity);
        self.left
            .elements(arity)
            .into_iter()
            .flat_map(|a| rs.iter().map(move |b| (a.clone(), b.clone())))
            .collect()
    }
    fn sample(&self, arity: usize, rng: &mut dyn RngCore) -> Option<Self::Elem> {
        Some((self.left.sample(arity, rng)?, self.right.sample(arity, rng)?))
    }
    fn display(&self, p: &Self::Elem) -> String {
        format!("({}, {})", self.left.display(&p.0), self.right.display(&p.1))
    }
    fn parse(&self, text: &str) -> Option<Self::Elem> {
        let inner = text.trim().strip_prefix('(')?.strip_suffix(')')?;
        let (a, b) = split_top_level(inner)?;
        Some((self.left.parse(a)?, self.right.parse(b)?))
    }
}

/// Splits `a, b` at the first comma outside brackets.
fn split_top_level(text: &str) -> Option<(&str, &str)> {
    let mut depth = 0i32;
    for (k, c) in text.char_indices() {
        match c {
            '(' | '[' => depth += 1,
            ')' | ']' => depth -= 1,
            ',' if depth == 0 => return Some((text[..k].trim(), text[k + 1..].trim())),
            _ => {}
        }
    }
    None
}

/// The `k`-truncation of a symbolic operad: components above `k` are dropped
/// and compositions leaving the bound are undefined.
#[derive(Clone, Debug)]
pub struct Truncated<O> {
    pub inner: O,
    pub k: usize,
}

impl<O: Operad> Truncated<O> {
    pub fn new(inner: O, k: usize) -> Self {
        Truncated { inner, k }
    }
}

impl<O: Operad> Operad for Truncated<O> {
    type Elem = O::Elem;

    fn name(&self) -> String {
        format!("{}<={}", self.inner.name(), self.k)
    }
    fn arity(&self, p: &Self::Elem) -> usize {
        self.inner.arity(p)
    }
    fn unit(&self) -> Self::Elem {
        self.inner.unit()
    }
    fn bound(&self) -> Option<usize> {
        Some(self.inner.bound().map_or(self.k, |b| b.min(self.k)))
    }
    fn compose(
        &self,
        p: &Self::Elem,
        i: usize,
        q: &Self::Elem,
    ) -> Result<Self::Elem, OperadError> {
        let (m, n) = (self.arity(p), self.arity(q));
        check_bound(m.max(n), self.bound())?;
        check_slot(m, i)?;
        check_bound(m + n - 1, self.bound())?;
        self.inner.compose(p, i, q)
    }
    fn act(&self, sigma: &Perm, p: &Self::Elem) -> Self::Elem {
        self.inner.act(sigma, p)
    }
    fn elements(&self, arity: usize) -> Vec<Self::Elem> {
        if arity > self.k {
            Vec::new()
        } else {
            self.inner.elements(arity)
        }
    }
    fn sample(&self, arity: usize, rng: &mut dyn RngCore) -> Option<Self::Elem> {
        if arity > self.k {
            None
        } else {
            self.inner.sample(arity, rng)
        }
    }
    fn display(&self, p: &Self::Elem) -> String {
        self.inner.display(p)
    }
    fn parse(&self, text: &str) -> Option<Self::Elem> {
        self.inner.parse(text).filter(|p| self.inner.arity(p) <= self.k)
    }
}
