//! Small operads used as label operads and as test fixtures.

use std::fmt::Write as _;

use rand::{Rng, RngCore};

use super::{check_bound, check_slot, Operad, OperadError};
use crate::bemonoid::{relabel_word, substitute, random_perm_word};
use crate::perm::Perm;

/// The terminal operad: one point in every arity.
#[derive(Clone, Debug)]
pub struct Pt {
    bound: Option<usize>,
}

impl Pt {
    pub fn new(rmax: usize) -> Self {
        Pt { bound: Some(rmax) }
    }

    pub fn unbounded() -> Self {
        Pt { bound: None }
    }
}

impl Operad for Pt {
    /// The arity of the point.
    type Elem = usize;

    fn name(&self) -> String {
        "pt".into()
    }
    fn arity(&self, p: &usize) -> usize {
        *p
    }
    fn unit(&self) -> usize {
        1
    }
    fn bound(&self) -> Option<usize> {
        self.bound
    }
    fn compose(&self, p: &usize, i: usize, q: &usize) -> Result<usize, OperadError> {
        check_slot(*p, i)?;
        check_bound(p + q - 1, self.bound)?;
        Ok(p + q - 1)
    }
    fn act(&self, _sigma: &Perm, p: &usize) -> usize {
        *p
    }
    fn elements(&self, arity: usize) -> Vec<usize> {
        if self.bound.is_some_and(|b| arity > b) {
            Vec::new()
        } else {
            vec![arity]
        }
    }
    fn display(&self, p: &usize) -> String {
        format!("pt{p}")
    }
    fn parse(&self, text: &str) -> Option<usize> {
        text.trim().strip_prefix("pt")?.parse().ok()
    }
}

/// Flags combined by disjunction: `P(0) = {1}`, `P(r) = {0, 1}` for `r ≥ 1`,
/// unit `0`, trivial symmetric action. Unitary, and its unit has no
/// non-trivial factorisation.
#[derive(Clone, Debug)]
pub struct BoolOr {
    bound: Option<usize>,
}

impl BoolOr {
    pub fn unbounded() -> Self {
        BoolOr { bound: None }
    }

    pub fn bounded(rmax: usize) -> Self {
        BoolOr { bound: Some(rmax) }
    }
}

impl Operad for BoolOr {
    type Elem = (usize, bool);

    fn name(&self) -> String {
        "bool-or".into()
    }
    fn arity(&self, p: &Self::Elem) -> usize {
        p.0
    }
    fn unit(&self) -> Self::Elem {
        (1, false)
    }
    fn bound(&self) -> Option<usize> {
        self.bound
    }
    fn compose(
        &self,
        p: &Self::Elem,
        i: usize,
        q: &Self::Elem,
    ) -> Result<Self::Elem, OperadError> {
        check_slot(p.0, i)?;
        check_bound(p.0 + q.0 - 1, self.bound)?;
        Ok((p.0 + q.0 - 1, p.1 || q.1))
    }
    fn act(&self, _sigma: &Perm, p: &Self::Elem) -> Self::Elem {
        *p
    }
    fn elements(&self, arity: usize) -> Vec<Self::Elem> {
        if self.bound.is_some_and(|b| arity > b) {
            Vec::new()
        } else if arity == 0 {
            vec![(0, true)]
        } else {
            vec![(arity, false), (arity, true)]
        }
    }
    fn display(&self, p: &Self::Elem) -> String {
        format!("b{}:{}", p.0, u8::from(p.1))
    }
    fn parse(&self, text: &str) -> Option<Self::Elem> {
        let (r, f) = text.trim().strip_prefix('b')?.split_once(':')?;
        let r: usize = r.parse().ok()?;
        let f = match f {
            "0" => false,
            "1" => true,
            _ => return None,
        };
        if r == 0 && !f {
            return None;
        }
        Some((r, f))
    }
}

/// Flags combined by exclusive or: `P(r) = {0, 1}` in every arity. Not
/// unitary, and `1 ∘_1 1` is the unit in arity 1.
#[derive(Clone, Debug)]
pub struct Parity {
    bound: Option<usize>,
}

impl Parity {
    pub fn unbounded() -> Self {
        Parity { bound: None }
    }
}

impl Operad for Parity {
    type Elem = (usize, bool);

    fn name(&self) -> String {
        "parity".into()
    }
    fn arity(&self, p: &Self::Elem) -> usize {
        p.0
    }
    fn unit(&self) -> Self::Elem {
        (1, false)
    }
    fn bound(&self) -> Option<usize> {
        self.bound
    }
    fn compose(
        &self,
        p: &Self::Elem,
        i: usize,
        q: &Self::Elem,
    ) -> Result<Self::Elem, OperadError> {
        check_slot(p.0, i)?;
        check_bound(p.0 + q.0 - 1, self.bound)?;
        Ok((p.0 + q.0 - 1, p.1 ^ q.1))
    }
    fn act(&self, _sigma: &Perm, p: &Self::Elem) -> Self::Elem {
        *p
    }
    fn elements(&self, arity: usize) -> Vec<Self::Elem> {
        if self.bound.is_some_and(|b| arity > b) {
            Vec::new()
        } else {
            vec![(arity, false), (arity, true)]
        }
    }
    fn display(&self, p: &Self::Elem) -> String {
        format!("z{}:{}", p.0, u8::from(p.1))
    }
}

/// Words `c_0 x_σ(1) c_1 … x_σ(r) c_r` whose separators `c_k` are either empty
/// or an element of a finite semigroup `S`; adjacent separators multiply in
/// `S` under substitution. Arity-zero words are single elements of `S`.
///
/// With `S = {e}` this is the object operad of the extended Barratt-Eccles
/// operad; with a two-element band it is a non-unitary operad whose
/// unitarisation collapses the constants.
#[derive(Clone, Debug)]
pub struct ConstantWords {
    names: Vec<String>,
    /// `table[a][b] = a·b`, indices into `names`.
    table: Vec<Vec<usize>>,
    bound: Option<usize>,
}

/// Element of [`ConstantWords`]: 1-based variable word and separators, where
/// separator `0` is empty and `s ≥ 1` is constant `s - 1`.
pub type ConstantWord = (Vec<usize>, Vec<usize>);

impl ConstantWords {
    pub fn new(
        names: Vec<String>,
        table: Vec<Vec<usize>>,
        bound: Option<usize>,
    ) -> Result<Self, OperadError> {
        let s = names.len();
        if s == 0 || table.len() != s || table.iter().any(|row| row.len() != s) {
            return Err(OperadError::Malformed("semigroup table has the wrong shape".into()));
        }
        if table.iter().flatten().any(|&x| x >= s) {
            return Err(OperadError::Malformed("semigroup table leaves the set".into()));
        }
        for a in 0..s {
            for b in 0..s {
                for c in 0..s {
                    if table[table[a][b]][c] != table[a][table[b][c]] {
                        return Err(OperadError::Malformed("semigroup is not associative".into()));
                    }
                }
            }
        }
        Ok(ConstantWords { names, table, bound })
    }

    /// Two constants `a`, `b` with `st = s` (left-zero band).
    pub fn left_zero_band(bound: Option<usize>) -> Self {
        ConstantWords::new(vec!["a".into(), "b".into()], vec![vec![0, 0], vec![1, 1]], bound)
            .expect("left-zero band is a semigroup")
    }

    /// A single idempotent constant `e`.
    pub fn idempotent(bound: Option<usize>) -> Self {
        ConstantWords::new(vec!["e".into()], vec![vec![0]], bound).expect("trivial semigroup")
    }

    fn merge(&self, a: usize, b: usize) -> usize {
        match (a, b) {
            (0, x) | (x, 0) => x,
            (x, y) => self.table[x - 1][y - 1] + 1,
        }
    }

    pub fn constant(&self, name: &str) -> Option<ConstantWord> {
        let s = self.names.iter().position(|n| n == name)?;
        Some((Vec::new(), vec![s + 1]))
    }
}

impl Operad for ConstantWords {
    type Elem = ConstantWord;

    fn name(&self) -> String {
        format!("words[{}]", self.names.join(","))
    }
    fn arity(&self, p: &Self::Elem) -> usize {
        p.0.len()
    }
    fn unit(&self) -> Self::Elem {
        (vec![1], vec![0, 0])
    }
    fn bound(&self) -> Option<usize> {
        self.bound
    }
    fn compose(
        &self,
        p: &Self::Elem,
        i: usize,
        q: &Self::Elem,
    ) -> Result<Self::Elem, OperadError> {
        check_slot(p.0.len(), i)?;
        check_bound(p.0.len() + q.0.len() - 1, self.bound)?;
        Ok(substitute(&p.0, &p.1, i, &q.0, &q.1, |a, b| self.merge(a, b)))
    }
    fn act(&self, sigma: &Perm, p: &Self::Elem) -> Self::Elem {
        (relabel_word(sigma, &p.0), p.1.clone())
    }
    fn elements(&self, arity: usize) -> Vec<Self::Elem> {
        if self.bound.is_some_and(|b| arity > b) {
            return Vec::new();
        }
        let s = self.names.len();
        if arity == 0 {
            return (1..=s).map(|c| (Vec::new(), vec![c])).collect();
        }
        let mut out = Vec::new();
        for perm in Perm::all(arity) {
            let word: Vec<usize> = perm.images().iter().map(|x| x + 1).collect();
            let total = (s + 1).pow(arity as u32 + 1);
            for code in 0..total {
                let mut seps = Vec::with_capacity(arity + 1);
                let mut c = code;
                for _ in 0..=arity {
                    seps.push(c % (s + 1));
                    c /= s + 1;
                }
                out.push((word.clone(), seps));
            }
        }
        out
    }
    fn sample(&self, arity: usize, rng: &mut dyn RngCore) -> Option<Self::Elem> {
        if self.bound.is_some_and(|b| arity > b) {
            return None;
        }
        let s = self.names.len();
        if arity == 0 {
            return Some((Vec::new(), vec![rng.gen_range(1..=s)]));
        }
        let word = random_perm_word(arity, rng);
        let seps = (0..=arity).map(|_| rng.gen_range(0..=s)).collect();
        Some((word, seps))
    }
    fn display(&self, p: &Self::Elem) -> String {
        let mut out = String::new();
        let sep = |out: &mut String, c: usize| {
            if c > 0 {
                if !out.is_empty() {
                    out.push(' ');
                }
                out.push_str(&self.names[c - 1]);
            }
        };
        sep(&mut out, p.1[0]);
        for (k, v) in p.0.iter().enumerate() {
            if !out.is_empty() {
                out.push(' ');
            }
            let _ = write!(out, "x{v}");
            sep(&mut out, p.1[k + 1]);
        }
        out
    }
    fn parse(&self, text: &str) -> Option<Self::Elem> {
        let mut word = Vec::new();
        let mut seps = vec![0];
        for tok in text.split_whitespace() {
            if let Some(v) = tok.strip_prefix('x') {
                word.push(v.parse::<usize>().ok()?);
                seps.push(0);
            } else {
                let c = self.names.iter().position(|n| n == tok)? + 1;
                let last = seps.last_mut().expect("nonempty");
                *last = self.merge(*last, c);
            }
        }
        let mut sorted = word.clone();
        sorted.sort_unstable();
        if sorted.iter().enumerate().any(|(k, &v)| v != k + 1) {
            return None;
        }
        if word.is_empty() && seps[0] == 0 {
            return None;
        }
        Some((word, seps))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opcore::{check_axioms, is_unitary};

    #[test]
    fn fixtures_satisfy_axioms() {
        assert!(check_axioms(&Pt::new(3), 3).passed());
        assert!(check_axioms(&BoolOr::bounded(3), 3).passed());
        assert!(check_axioms(&Parity::unbounded(), 3).passed());
        assert!(check_axioms(&ConstantWords::left_zero_band(Some(2)), 2).passed());
    }

    #[test]
    fn unitary_predicate() {
        assert!(is_unitary(&Pt::new(2)));
        assert!(is_unitary(&BoolOr::unbounded()));
        assert!(!is_unitary(&ConstantWords::left_zero_band(None)));
    }

    #[test]
    fn band_word_composition() {
        let q = ConstantWords::left_zero_band(None);
        let m = q.parse("x1 x2").unwrap();
        let a = q.constant("a").unwrap();
        let b = q.constant("b").unwrap();
        let ma = q.compose(&m, 2, &a).unwrap();
        let mb = q.compose(&m, 2, &b).unwrap();
        assert_ne!(ma, mb);
        assert_eq!(q.display(&ma), "x1 a");
        // Left-zero: b·a = b.
        let ba = q.compose(&q.parse("b x1").unwrap(), 1, &a).unwrap();
        assert_eq!(q.display(&ba), "b");
    }

    #[test]
    fn parse_display_roundtrip() {
        let q = ConstantWords::left_zero_band(None);
        for r in 0..=2 {
            for p in q.elements(r) {
                assert_eq!(q.parse(&q.display(&p)), Some(p.clone()));
            }
        }
        let b = BoolOr::unbounded();
        for r in 0..=2 {
            for p in b.elements(r) {
                assert_eq!(b.parse(&b.display(&p)), Some(p));
            }
        }
    }
}
