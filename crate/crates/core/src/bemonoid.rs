//! The extended Barratt-Eccles operad.
//!
//! The object operad `Ob M` is generated by an associative product `μ` and an
//! idempotent constant `e`. Its elements are monomials
//! `e^{ε_0} x_{σ(1)} e^{ε_1} ⋯ x_{σ(r)} e^{ε_r}` with Boolean exponents, and
//! `Ob M(0) = {e}`. Each category `M(r)` has exactly one morphism between any
//! two objects, so its nerve is indiscrete: an `n`-simplex of `E(r)` is an
//! `(n+1)`-tuple of monomials of arity `r`, and the operad structure on every
//! simplicial level is componentwise.
//!
//! The non-unital subcollection drops the degeneracies of the vertex
//! `1 = x_1`, i.e. the constant tuples at `x_1`. It is closed under
//! composition because `p ∘_i q = x_1` forces `p = q = x_1` in `Ob M`.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, RngCore};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::opcore::{check_bound, check_slot, Operad, OperadError};
use crate::perm::Perm;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BemonoidError {
    #[error("slot {slot} out of range for arity {arity}")]
    SlotOutOfRange { slot: usize, arity: usize },
    #[error("index {index} out of range for a simplex of dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("simplex dimensions differ: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("components of a simplex must share one arity")]
    ArityMismatch,
    #[error("a simplex needs at least one component")]
    Empty,
    #[error("cannot parse monomial {0:?}")]
    Parse(String),
}

/// Substitutes the word `q` into variable `x_i` of the word `p`.
///
/// Words are 1-based variable sequences with one separator before, between
/// and after the variables; the separators around the substituted variable
/// are merged with `q`'s outer separators.
pub(crate) fn substitute<S: Copy>(
    pw: &[usize],
    ps: &[S],
    i: usize,
    qw: &[usize],
    qs: &[S],
    merge: impl Fn(S, S) -> S,
) -> (Vec<usize>, Vec<S>) {
    let n = qw.len();
    let k = pw.iter().position(|&v| v == i).expect("slot occurs in the word");
    let rename = |v: usize| if v < i { v } else { v + n - 1 };
    let mut word = Vec::with_capacity(pw.len() + n);
    let mut seps = Vec::with_capacity(ps.len() + n);
    word.extend(pw[..k].iter().map(|&v| rename(v)));
    seps.extend_from_slice(&ps[..k]);
    if n == 0 {
        seps.push(merge(merge(ps[k], qs[0]), ps[k + 1]));
    } else {
        seps.push(merge(ps[k], qs[0]));
        word.extend(qw.iter().map(|&t| i - 1 + t));
        seps.extend_from_slice(&qs[1..n]);
        seps.push(merge(qs[n], ps[k + 1]));
    }
    word.extend(pw[k + 1..].iter().map(|&v| rename(v)));
    seps.extend_from_slice(&ps[k + 2..]);
    (word, seps)
}

/// Renames variable `j` to `σ(j)` in a 1-based word.
pub(crate) fn relabel_word(sigma: &Perm, word: &[usize]) -> Vec<usize> {
    word.iter().map(|&v| sigma.apply(v - 1) + 1).collect()
}

pub(crate) fn random_perm_word(arity: usize, rng: &mut dyn RngCore) -> Vec<usize> {
    let mut word: Vec<usize> = (1..=arity).collect();
    for k in (1..arity).rev() {
        word.swap(k, rng.gen_range(0..=k));
    }
    word
}

/// Normal-form element of `Ob M(r)`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    /// `sigma.apply(k) + 1` is the variable at word position `k`.
    sigma: Perm,
    /// `ε_0, .., ε_r`.
    flags: Vec<bool>,
}

impl Monomial {
    pub fn new(sigma: Perm, flags: Vec<bool>) -> Result<Self, BemonoidError> {
        if flags.len() != sigma.len() + 1 {
            return Err(BemonoidError::Parse(format!(
                "{} flags for arity {}",
                flags.len(),
                sigma.len()
            )));
        }
        if sigma.is_empty() && !flags[0] {
            return Err(BemonoidError::Parse("arity 0 admits only e".into()));
        }
        Ok(Monomial { sigma, flags })
    }

    /// `x_1`, the operad unit.
    pub fn unit() -> Self {
        Monomial { sigma: Perm::identity(1), flags: vec![false, false] }
    }

    /// `e`, the unique arity-zero element.
    pub fn e() -> Self {
        Monomial { sigma: Perm::identity(0), flags: vec![true] }
    }

    /// `x_1 ⋯ x_r` with all flags off (`x_1` when `r = 1`).
    pub fn product(r: usize) -> Self {
        assert!(r >= 1, "use Monomial::e for arity 0");
        Monomial { sigma: Perm::identity(r), flags: vec![false; r + 1] }
    }

    pub fn arity(&self) -> usize {
        self.sigma.len()
    }

    pub fn sigma(&self) -> &Perm {
        &self.sigma
    }

    pub fn flags(&self) -> &[bool] {
        &self.flags
    }

    pub fn is_unit(&self) -> bool {
        self.arity() == 1 && !self.flags[0] && !self.flags[1]
    }

    fn word(&self) -> Vec<usize> {
        self.sigma.images().iter().map(|&x| x + 1).collect()
    }

    /// `self ∘_i q`: substitution followed by the Boolean merge of adjacent
    /// `e`-powers.
    pub fn compose(&self, i: usize, q: &Monomial) -> Result<Monomial, BemonoidError> {
        if i == 0 || i > self.arity() {
            return Err(BemonoidError::SlotOutOfRange { slot: i, arity: self.arity() });
        }
        let (word, flags) =
            substitute(&self.word(), &self.flags, i, &q.word(), &q.flags, |a, b| a || b);
        let sigma = Perm::from_images(word.iter().map(|v| v - 1).collect()).expect("bijection");
        Ok(Monomial { sigma, flags })
    }

    /// Relabelling action: variable `j` becomes `τ(j)`.
    pub fn act(&self, tau: &Perm) -> Monomial {
        Monomial { sigma: tau.compose(&self.sigma), flags: self.flags.clone() }
    }

    /// Long form, e.g. `e^1 x2 e^0 x1 e^1`.
    pub fn to_long_string(&self) -> String {
        let mut parts = vec![format!("e^{}", u8::from(self.flags[0]))];
        for (k, v) in self.word().iter().enumerate() {
            parts.push(format!("x{v}"));
            parts.push(format!("e^{}", u8::from(self.flags[k + 1])));
        }
        parts.join(" ")
    }
}

impl fmt::Display for Monomial {
    /// Compact form, e.g. `e x2 x1 e`; the arity-zero element prints as `e`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if self.flags[0] {
            parts.push("e".to_string());
        }
        for (k, v) in self.word().iter().enumerate() {
            parts.push(format!("x{v}"));
            if self.flags[k + 1] {
                parts.push("e".to_string());
            }
        }
        f.write_str(&parts.join(" "))
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Monomial({self})")
    }
}

impl FromStr for Monomial {
    type Err = BemonoidError;

    /// Accepts the long and compact forms, mixed freely; repeated `e`s merge
    /// and `1` alone denotes `x1`.
    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let err = || BemonoidError::Parse(text.to_string());
        if text.trim() == "1" {
            return Ok(Monomial::unit());
        }
        let mut word = Vec::new();
        let mut flags = vec![false];
        for tok in text.split_whitespace() {
            let last = flags.last_mut().expect("nonempty");
            match tok {
                "e" | "e^1" => *last = true,
                "e^0" => {}
                _ => {
                    let v: usize = tok.strip_prefix('x').and_then(|s| s.parse().ok()).ok_or_else(err)?;
                    if v == 0 {
                        return Err(err());
                    }
                    word.push(v - 1);
                    flags.push(false);
                }
            }
        }
        let sigma = Perm::from_images(word).ok_or_else(err)?;
        Monomial::new(sigma, flags).map_err(|_| err())
    }
}

impl Serialize for Monomial {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Monomial {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// All monomials of arity `r`: permutations in lexicographic order, flags in
/// binary order.
pub fn enumerate_obm(r: usize) -> Vec<Monomial> {
    if r == 0 {
        return vec![Monomial::e()];
    }
    let mut out = Vec::new();
    for sigma in Perm::all(r) {
        for code in 0u32..(1 << (r + 1)) {
            let flags = (0..=r).map(|b| code >> b & 1 == 1).collect();
            out.push(Monomial { sigma: sigma.clone(), flags });
        }
    }
    out
}

pub fn random_monomial(r: usize, rng: &mut dyn RngCore) -> Monomial {
    if r == 0 {
        return Monomial::e();
    }
    let word = random_perm_word(r, rng);
    let sigma = Perm::from_images(word.iter().map(|v| v - 1).collect()).expect("bijection");
    Monomial { sigma, flags: (0..=r).map(|_| rng.gen_bool(0.5)).collect() }
}

/// The object operad `Ob M`, optionally truncated.
#[derive(Clone, Debug, Default)]
pub struct ObM {
    bound: Option<usize>,
}

impl ObM {
    pub fn new() -> Self {
        ObM { bound: None }
    }

    pub fn truncated(k: usize) -> Self {
        ObM { bound: Some(k) }
    }
}

impl Operad for ObM {
    type Elem = Monomial;

    fn name(&self) -> String {
        match self.bound {
            Some(k) => format!("ObM<={k}"),
            None => "ObM".into(),
        }
    }
    fn arity(&self, p: &Monomial) -> usize {
        p.arity()
    }
    fn unit(&self) -> Monomial {
        Monomial::unit()
    }
    fn bound(&self) -> Option<usize> {
        self.bound
    }
    fn compose(&self, p: &Monomial, i: usize, q: &Monomial) -> Result<Monomial, OperadError> {
        check_bound(p.arity().max(q.arity()), self.bound)?;
        check_slot(p.arity(), i)?;
        check_bound(p.arity() + q.arity() - 1, self.bound)?;
        Ok(p.compose(i, q).expect("slot checked"))
    }
    fn act(&self, sigma: &Perm, p: &Monomial) -> Monomial {
        p.act(sigma)
    }
    fn elements(&self, arity: usize) -> Vec<Monomial> {
        if self.bound.is_some_and(|k| arity > k) {
            Vec::new()
        } else {
            enumerate_obm(arity)
        }
    }
    fn sample(&self, arity: usize, rng: &mut dyn RngCore) -> Option<Monomial> {
        if self.bound.is_some_and(|k| arity > k) {
            None
        } else {
            Some(random_monomial(arity, rng))
        }
    }
    fn display(&self, p: &Monomial) -> String {
        p.to_string()
    }
    fn parse(&self, text: &str) -> Option<Monomial> {
        text.parse().ok().filter(|p: &Monomial| self.bound.is_none_or(|k| p.arity() <= k))
    }
}

/// An `n`-simplex of `E(r)`: a tuple `(q_0, .., q_n)` of monomials of arity `r`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Monomial>", into = "Vec<Monomial>")]
pub struct NerveSimplex {
    comps: Vec<Monomial>,
}

impl TryFrom<Vec<Monomial>> for NerveSimplex {
    type Error = BemonoidError;

    fn try_from(comps: Vec<Monomial>) -> Result<Self, Self::Error> {
        NerveSimplex::new(comps)
    }
}

impl From<NerveSimplex> for Vec<Monomial> {
    fn from(s: NerveSimplex) -> Self {
        s.comps
    }
}

impl NerveSimplex {
    pub fn new(comps: Vec<Monomial>) -> Result<Self, BemonoidError> {
        let first = comps.first().ok_or(BemonoidError::Empty)?;
        if comps.iter().any(|q| q.arity() != first.arity()) {
            return Err(BemonoidError::ArityMismatch);
        }
        Ok(NerveSimplex { comps })
    }

    /// The constant simplex of dimension `n` at `q`.
    pub fn constant(q: Monomial, n: usize) -> Self {
        NerveSimplex { comps: vec![q; n + 1] }
    }

    pub fn arity(&self) -> usize {
        self.comps[0].arity()
    }

    pub fn dim(&self) -> usize {
        self.comps.len() - 1
    }

    pub fn components(&self) -> &[Monomial] {
        &self.comps
    }

    /// `d_i`: drops component `i`.
    pub fn face(&self, i: usize) -> Result<NerveSimplex, BemonoidError> {
        if i > self.dim() || self.dim() == 0 {
            return Err(BemonoidError::IndexOutOfRange { index: i, dim: self.dim() });
        }
        let mut comps = self.comps.clone();
        comps.remove(i);
        Ok(NerveSimplex { comps })
    }

    /// `s_i`: repeats component `i`.
    pub fn degeneracy(&self, i: usize) -> Result<NerveSimplex, BemonoidError> {
        if i > self.dim() {
            return Err(BemonoidError::IndexOutOfRange { index: i, dim: self.dim() });
        }
        let mut comps = self.comps.clone();
        comps.insert(i, self.comps[i].clone());
        Ok(NerveSimplex { comps })
    }

    /// Componentwise `∘_i`.
    pub fn compose(&self, i: usize, q: &NerveSimplex) -> Result<NerveSimplex, BemonoidError> {
        if self.dim() != q.dim() {
            return Err(BemonoidError::DimensionMismatch(self.dim(), q.dim()));
        }
        let comps = self
            .comps
            .iter()
            .zip(&q.comps)
            .map(|(a, b)| a.compose(i, b))
            .collect::<Result<_, _>>()?;
        Ok(NerveSimplex { comps })
    }

    pub fn act(&self, sigma: &Perm) -> NerveSimplex {
        NerveSimplex { comps: self.comps.iter().map(|q| q.act(sigma)).collect() }
    }

    /// False exactly for the degeneracies of the vertex `1 = x_1`.
    pub fn is_nonunital(&self) -> bool {
        !self.comps.iter().all(Monomial::is_unit)
    }
}

impl fmt::Display for NerveSimplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.comps.iter().map(|q| q.to_string()).collect();
        write!(f, "<{}>", parts.join(" | "))
    }
}

/// Parses `<a | b | c>` (or a bare monomial for dimension 0).
impl FromStr for NerveSimplex {
    type Err = BemonoidError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let t = text.trim();
        let inner = t.strip_prefix('<').and_then(|s| s.strip_suffix('>')).unwrap_or(t);
        let comps = inner.split('|').map(|s| s.trim().parse()).collect::<Result<Vec<_>, _>>()?;
        NerveSimplex::new(comps)
    }
}

/// Simplicial level `E_n` as an operad in sets.
#[derive(Clone, Debug)]
pub struct ELevel {
    pub n: usize,
    bound: Option<usize>,
}

impl ELevel {
    pub fn new(n: usize) -> Self {
        ELevel { n, bound: None }
    }

    pub fn truncated(n: usize, k: usize) -> Self {
        ELevel { n, bound: Some(k) }
    }
}

impl Operad for ELevel {
    type Elem = NerveSimplex;

    fn name(&self) -> String {
        format!("E_{}", self.n)
    }
    fn arity(&self, p: &NerveSimplex) -> usize {
        p.arity()
    }
    fn unit(&self) -> NerveSimplex {
        NerveSimplex::constant(Monomial::unit(), self.n)
    }
    fn bound(&self) -> Option<usize> {
        self.bound
    }
    fn compose(
        &self,
        p: &NerveSimplex,
        i: usize,
        q: &NerveSimplex,
    ) -> Result<NerveSimplex, OperadError> {
        check_bound(p.arity().max(q.arity()), self.bound)?;
        check_slot(p.arity(), i)?;
        check_bound(p.arity() + q.arity() - 1, self.bound)?;
        p.compose(i, q).map_err(|e| OperadError::Undefined(e.to_string()))
    }
    fn act(&self, sigma: &Perm, p: &NerveSimplex) -> NerveSimplex {
        p.act(sigma)
    }
    fn elements(&self, arity: usize) -> Vec<NerveSimplex> {
        if self.bound.is_some_and(|k| arity > k) {
            return Vec::new();
        }
        let base = enumerate_obm(arity);
        let mut out: Vec<Vec<Monomial>> = vec![Vec::new()];
        for _ in 0..=self.n {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    base.iter().map(move |q| {
                        let mut v = prefix.clone();
                        v.push(q.clone());
                        v
                    })
                })
                .collect();
        }
        out.into_iter().map(|comps| NerveSimplex { comps }).collect()
    }
    fn sample(&self, arity: usize, rng: &mut dyn RngCore) -> Option<NerveSimplex> {
        if self.bound.is_some_and(|k| arity > k) {
            return None;
        }
        Some(random_simplex(arity, self.n, rng))
    }
    fn display(&self, p: &NerveSimplex) -> String {
        p.to_string()
    }
    fn parse(&self, text: &str) -> Option<NerveSimplex> {
        text.parse().ok().filter(|s: &NerveSimplex| s.dim() == self.n)
    }
}

/// A random simplex; in arity 1 each component is `x_1` with probability 1/2
/// so that unit-adjacent tuples are well represented.
pub fn random_simplex(arity: usize, n: usize, rng: &mut dyn RngCore) -> NerveSimplex {
    let comps = (0..=n)
        .map(|_| {
            if arity == 1 && rng.gen_bool(0.5) {
                Monomial::unit()
            } else {
                random_monomial(arity, rng)
            }
        })
        .collect();
    NerveSimplex { comps }
}

/// Every factorisation `p ∘_i q = 1` with `(p, q) ≠ (1, 1)` among elements
/// of arity at most `max_arity`.
pub fn unit_factorizations<O: Operad>(op: &O, max_arity: usize) -> Vec<(O::Elem, usize, O::Elem)> {
    let unit = op.unit();
    let mut out = Vec::new();
    for m in 1..=max_arity.min(2) {
        let n = 2 - m;
        for p in op.elements(m) {
            for q in op.elements(n) {
                for i in 1..=m {
                    if op.compose(&p, i, &q).is_ok_and(|x| x == unit) && !(p == unit && q == unit) {
                        out.push((p.clone(), i, q.clone()));
                    }
                }
            }
        }
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct Lemma1Report {
    pub max_arity: usize,
    pub max_dim: usize,
    pub object_checks: u64,
    pub simplex_checks: u64,
    pub unit_factorization_checks: u64,
    pub violations: Vec<String>,
}

impl Lemma1Report {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Closure of the non-unital subcollection under composition: exhaustive on
/// monomials of arity at most `max_arity`, and on `samples` random pairs of
/// simplices of dimension at most `max_dim`. Also checks that `x_1` has no
/// non-trivial factorisation `p ∘_i q` with `p, q` of arity at most
/// `max_arity`.
pub fn verify_lemma1(
    max_arity: usize,
    max_dim: usize,
    samples: usize,
    rng: &mut dyn RngCore,
) -> Lemma1Report {
    let mut rep = Lemma1Report {
        max_arity,
        max_dim,
        object_checks: 0,
        simplex_checks: 0,
        unit_factorization_checks: 0,
        violations: Vec::new(),
    };
    let elems: Vec<Vec<Monomial>> = (0..=max_arity).map(enumerate_obm).collect();
    for m in 1..=max_arity {
        for n in 0..=max_arity {
            for p in &elems[m] {
                for q in &elems[n] {
                    for i in 1..=m {
                        let x = p.compose(i, q).expect("slot in range");
                        rep.unit_factorization_checks += 1;
                        if x.is_unit() && !(p.is_unit() && q.is_unit()) {
                            rep.violations.push(format!("unit factorisation: ({p}) o_{i} ({q}) = x1"));
                        }
                        if m + n - 1 <= max_arity && !p.is_unit() && !q.is_unit() {
                            rep.object_checks += 1;
                            if x.is_unit() {
                                rep.violations.push(format!("object level: ({p}) o_{i} ({q}) = x1"));
                            }
                        }
                    }
                }
            }
        }
    }
    let mut done = 0;
    while done < samples {
        let dim = rng.gen_range(0..=max_dim);
        let m = rng.gen_range(1..=max_arity);
        let n = rng.gen_range(0..=max_arity + 1 - m);
        let p = random_simplex(m, dim, rng);
        let q = random_simplex(n, dim, rng);
        if !p.is_nonunital() || !q.is_nonunital() {
            continue;
        }
        let i = rng.gen_range(1..=m);
        let x = p.compose(i, &q).expect("valid composite");
        rep.simplex_checks += 1;
        done += 1;
        if !x.is_nonunital() {
            rep.violations.push(format!("simplex level: {p} o_{i} {q} = {x}"));
        }
    }
    rep
}
