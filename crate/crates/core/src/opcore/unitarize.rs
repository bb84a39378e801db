use std::collections::HashMap;

use thiserror::Error;

use super::{FElem, FiniteOperad, Operad, OperadMorphism};

#[derive(Clone, Debug)]
pub struct UnionFind {
    parent: Vec<u32>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind { parent: (0..n as u32).collect() }
    }

    pub fn find(&mut self, x: u32) -> u32 {
        let mut root = x;
        while self.parent[root as usize] != root {
            root = self.parent[root as usize];
        }
        let mut cur = x;
        while self.parent[cur as usize] != root {
            let next = self.parent[cur as usize];
            self.parent[cur as usize] = root;
            cur = next;
        }
        root
    }

    /// Merges the classes of `a` and `b`; the smaller root survives.
    /// Returns whether a merge happened.
    pub fn union(&mut self, a: u32, b: u32) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi as usize] = lo;
        true
    }
}

/// The unitarisation `τP` with the quotient morphism `P → τP`.
#[derive(Clone, Debug)]
pub struct Unitarization {
    pub operad: FiniteOperad,
    pub quotient: OperadMorphism,
    /// `members[r][c]`: elements of `P(r)` in class `c`, ascending.
    pub members: Vec<Vec<Vec<u32>>>,
}

/// Quotient of `P` by the smallest operadic congruence that identifies all of
/// `P(0)`.
///
/// Per-arity union-find seeded with the pairs `(p ∘_i e, p ∘_i e')`, closed
/// under composition and the symmetric actions by rescanning every table
/// entry until no merge occurs. Classes are numbered by their least element.
pub fn unitarize(p: &FiniteOperad) -> Unitarization {
    let rmax = p.rmax();
    let mut uf: Vec<UnionFind> = (0..=rmax).map(|r| UnionFind::new(p.size(r))).collect();
    let zero = p.size(0) as u32;
    for e in 1..zero {
        uf[0].union(0, e);
    }
    for m in 1..=rmax {
        for i in 1..=m {
            if let Some(table) = p.table(m, 0, i) {
                for x in 0..p.size(m) {
                    let row = &table[x * zero as usize..(x + 1) * zero as usize];
                    for &y in &row[1..] {
                        uf[m - 1].union(row[0], y);
                    }
                }
            }
        }
    }

    loop {
        let mut merged = false;
        for m in 1..=rmax {
            for n in 0..=(rmax + 1 - m) {
                let nq = p.size(n);
                for i in 1..=m {
                    let table = p.table(m, n, i).expect("total on the truncation domain");
                    for (slot, &v) in table.iter().enumerate() {
                        let (x, y) = ((slot / nq) as u32, (slot % nq) as u32);
                        let (rx, ry) = (uf[m].find(x), uf[n].find(y));
                        if (rx, ry) == (x, y) {
                            continue;
                        }
                        let w = table[rx as usize * nq + ry as usize];
                        merged |= uf[m + n - 1].union(v, w);
                    }
                }
            }
        }
        for r in 2..=rmax {
            let rows = p.action_rows(r);
            for row in rows {
                for x in 0..p.size(r) as u32 {
                    let rx = uf[r].find(x);
                    if rx != x {
                        merged |= uf[r].union(row[x as usize], row[rx as usize]);
                    }
                }
            }
        }
        if !merged {
            break;
        }
    }

    // Number the classes by least element.
    let mut class_of: Vec<Vec<u32>> = Vec::new();
    let mut members: Vec<Vec<Vec<u32>>> = Vec::new();
    for (r, u) in uf.iter_mut().enumerate() {
        let mut ids: HashMap<u32, u32> = HashMap::new();
        let mut row = Vec::with_capacity(p.size(r));
        let mut mem: Vec<Vec<u32>> = Vec::new();
        for x in 0..p.size(r) as u32 {
            let root = u.find(x);
            let next = ids.len() as u32;
            let c = *ids.entry(root).or_insert(next);
            if c as usize == mem.len() {
                mem.push(Vec::new());
            }
            mem[c as usize].push(x);
            row.push(c);
        }
        class_of.push(row);
        members.push(mem);
    }

    let names = members
        .iter()
        .enumerate()
        .map(|(r, mem)| {
            mem.iter()
                .map(|cls| {
                    let ns: Vec<&str> = cls.iter().map(|&x| p.names(r)[x as usize].as_str()).collect();
                    if ns.len() == 1 {
                        ns[0].to_string()
                    } else {
                        format!("[{}]", ns.join(" ~ "))
                    }
                })
                .collect()
        })
        .collect();
    let action = (0..=rmax)
        .map(|r| {
            p.action_rows(r)
                .iter()
                .map(|row| {
                    members[r].iter().map(|cls| class_of[r][row[cls[0] as usize] as usize]).collect()
                })
                .collect()
        })
        .collect();
    let mut compose = HashMap::new();
    for m in 1..=rmax {
        for n in 0..=(rmax + 1 - m) {
            let nq = p.size(n);
            for i in 1..=m {
                let table = p.table(m, n, i).expect("total");
                let mut out = Vec::with_capacity(members[m].len() * members[n].len());
                for cp in &members[m] {
                    for cq in &members[n] {
                        let v = table[cp[0] as usize * nq + cq[0] as usize];
                        out.push(class_of[m + n - 1][v as usize]);
                    }
                }
                compose.insert((m, n, i), out);
            }
        }
    }
    let unit = class_of[1][p.unit_index() as usize];
    let operad = FiniteOperad::from_tables(
        format!("tau({})", p.name()),
        names,
        action,
        unit,
        compose,
        p.k(),
    );
    Unitarization { operad, quotient: OperadMorphism { maps: class_of }, members }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FactorError {
    #[error("target operad is not unitary")]
    TargetNotUnitary,
    #[error("morphism separates {left} and {right}, which are identified in arity {arity}")]
    NotConstantOnClass { arity: usize, left: String, right: String },
    #[error("induced map is not an operad morphism: {0}")]
    NotMorphism(String),
}

impl Unitarization {
    /// Factors a morphism `f: P → U` with `U` unitary through the quotient
    /// map. The factorisation is unique because the quotient map is onto.
    pub fn factor_through(
        &self,
        source: &FiniteOperad,
        f: &OperadMorphism,
        target: &FiniteOperad,
    ) -> Result<OperadMorphism, FactorError> {
        if target.size(0) != 1 {
            return Err(FactorError::TargetNotUnitary);
        }
        let mut maps = Vec::new();
        for (r, classes) in self.members.iter().enumerate() {
            let mut row = Vec::new();
            for cls in classes {
                let image = f.maps[r][cls[0] as usize];
                if let Some(&other) = cls.iter().find(|&&x| f.maps[r][x as usize] != image) {
                    return Err(FactorError::NotConstantOnClass {
                        arity: r,
                        left: source.display(&FElem { arity: r, index: cls[0] }),
                        right: source.display(&FElem { arity: r, index: other }),
                    });
                }
                row.push(image);
            }
            maps.push(row);
        }
        let g = OperadMorphism { maps };
        g.check(&self.operad, target).map_err(FactorError::NotMorphism)?;
        Ok(g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bemonoid::ObM;
    use crate::opcore::fixtures::{BoolOr, ConstantWords, Parity};
    use crate::opcore::{check_axioms, is_unitary};

    #[test]
    fn union_find_keeps_least_root() {
        let mut uf = UnionFind::new(5);
        assert!(uf.union(3, 1));
        assert!(uf.union(4, 3));
        assert!(!uf.union(1, 4));
        assert_eq!(uf.find(4), 1);
    }

    #[test]
    fn unitary_operad_is_fixed() {
        let (p, _) = FiniteOperad::tabulate(&BoolOr::bounded(3), 3).unwrap();
        let u = unitarize(&p);
        assert!(u.operad.same_tables(&p));
        assert!(u.members.iter().flatten().all(|c| c.len() == 1));
    }

    #[test]
    fn band_constants_collapse() {
        let q = ConstantWords::left_zero_band(Some(2));
        let (p, _) = FiniteOperad::tabulate(&q, 2).unwrap();
        assert_eq!(p.size(0), 2);
        let u = unitarize(&p);
        assert!(is_unitary(&u.operad));
        assert!(check_axioms(&u.operad, 2).passed());
        assert_eq!((0..=2).map(|r| u.operad.size(r)).collect::<Vec<_>>(), vec![1, 4, 16]);
        let xa = p.find(1, "x1 a").unwrap();
        let xb = p.find(1, "x1 b").unwrap();
        assert_eq!(u.quotient.apply(xa), u.quotient.apply(xb));
        assert!(u.quotient.check(&p, &u.operad).is_ok());
    }

    fn fixtures() -> Vec<FiniteOperad> {
        vec![
            FiniteOperad::tabulate(&ConstantWords::left_zero_band(Some(3)), 3).unwrap().0,
            FiniteOperad::tabulate(&ConstantWords::idempotent(Some(3)), 3).unwrap().0,
            FiniteOperad::tabulate(&BoolOr::bounded(3), 3).unwrap().0,
            FiniteOperad::tabulate(&Parity::unbounded(), 3).unwrap().0,
            FiniteOperad::tabulate(&ObM::truncated(3), 3).unwrap().0,
        ]
    }

    #[test]
    fn truncation_commutes_with_unitarisation() {
        for p in fixtures() {
            for k in 2..=3 {
                let a = unitarize(&p).operad.truncate(k);
                let b = unitarize(&p.truncate(k)).operad;
                assert!(a.same_tables(&b), "{} at k = {k}", p.name());
            }
            if is_unitary(&p) {
                assert!(unitarize(&p).operad.truncate(1).same_tables(&unitarize(&p.truncate(1)).operad));
            }
        }
    }

    #[test]
    fn arity_one_truncation_cannot_identify_constants() {
        // Without binary operations no relation reaches arity 1.
        let (p, _) = FiniteOperad::tabulate(&ConstantWords::left_zero_band(Some(3)), 3).unwrap();
        let p1 = p.truncate(1);
        let (xa, xb) = (p1.find(1, "x1 a").unwrap(), p1.find(1, "x1 b").unwrap());
        let late = unitarize(&p1);
        assert_ne!(late.quotient.apply(xa), late.quotient.apply(xb));
        assert_eq!(late.operad.size(1), 9);
        let early = unitarize(&p);
        assert_eq!(early.quotient.apply(xa), early.quotient.apply(xb));
        assert_eq!(early.operad.truncate(1).size(1), 4);
    }
}
