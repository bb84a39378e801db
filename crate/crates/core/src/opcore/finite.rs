use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::{check_slot, Operad, OperadError};
use crate::perm::{factorial, Perm};

/// Element `index` of the component `P(arity)` of a [`FiniteOperad`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FElem {
    pub arity: usize,
    pub index: u32,
}

/// Finite sets `M(0), .., M(rmax)` with their symmetric-group actions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymmetricSequence {
    names: Vec<Vec<String>>,
    /// `action[r][rank(σ)][x] = σ·x`.
    action: Vec<Vec<Vec<u32>>>,
}

impl SymmetricSequence {
    pub fn rmax(&self) -> usize {
        self.names.len() - 1
    }

    pub fn size(&self, r: usize) -> usize {
        self.names.get(r).map_or(0, Vec::len)
    }

    pub fn name(&self, x: FElem) -> &str {
        &self.names[x.arity][x.index as usize]
    }

    pub fn act(&self, sigma: &Perm, x: FElem) -> FElem {
        FElem { arity: x.arity, index: self.action[x.arity][sigma.rank()][x.index as usize] }
    }

    /// Checks that every action table is a group action.
    pub fn check_group_action(&self) -> Result<(), String> {
        for r in 0..=self.rmax() {
            let perms = Perm::all(r);
            for (a, sa) in perms.iter().enumerate() {
                for (b, sb) in perms.iter().enumerate() {
                    let ab = sa.compose(sb).rank();
                    for x in 0..self.size(r) {
                        let lhs = self.action[r][ab][x];
                        let rhs = self.action[r][a][self.action[r][b][x] as usize];
                        if lhs != rhs {
                            return Err(format!(
                                "arity {r}: ({sa}{sb})·{} differs from {sa}·({sb}·{})",
                                self.names[r][x], self.names[r][x]
                            ));
                        }
                    }
                }
            }
            for x in 0..self.size(r) {
                if self.action[r][0][x] as usize != x {
                    return Err(format!("arity {r}: identity moves {}", self.names[r][x]));
                }
            }
        }
        Ok(())
    }
}

/// An operad given by explicit composition and action tables up to `rmax`.
///
/// `∘_i: P(m) × P(n) → P(m+n-1)` is stored whenever `m + n - 1 ≤ rmax`, which
/// is exactly the domain of a `rmax`-truncated operad.
#[derive(Clone, Debug)]
pub struct FiniteOperad {
    name: String,
    seq: SymmetricSequence,
    unit: u32,
    /// `(m, n, i) ↦` table indexed by `p * |P(n)| + q`.
    compose: HashMap<(usize, usize, usize), Vec<u32>>,
    k: Option<usize>,
}

impl FiniteOperad {
    /// Tabulates a symbolic operad up to arity `rmax`. Returns the table operad
    /// and the enumerated elements, indexed consistently with [`FElem`].
    pub fn tabulate<O: Operad>(
        op: &O,
        rmax: usize,
    ) -> Result<(FiniteOperad, Vec<Vec<O::Elem>>), OperadError> {
        let rmax = op.bound().map_or(rmax, |b| b.min(rmax));
        let elems: Vec<Vec<O::Elem>> = (0..=rmax).map(|r| op.elements(r)).collect();
        let index: Vec<HashMap<&O::Elem, u32>> = elems
            .iter()
            .map(|es| es.iter().enumerate().map(|(k, e)| (e, k as u32)).collect())
            .collect();
        let lookup = |r: usize, e: &O::Elem| -> Result<u32, OperadError> {
            index
                .get(r)
                .and_then(|m| m.get(e))
                .copied()
                .ok_or_else(|| OperadError::Undefined(format!("{} is not enumerated", op.display(e))))
        };
        let names = elems.iter().map(|es| es.iter().map(|e| op.display(e)).collect()).collect();
        let mut action = Vec::with_capacity(rmax + 1);
        for (r, es) in elems.iter().enumerate() {
            let mut rows = Vec::new();
            for sigma in Perm::all(r) {
                rows.push(es.iter().map(|e| lookup(r, &op.act(&sigma, e))).collect::<Result<Vec<_>, _>>()?);
            }
            action.push(rows);
        }
        let mut compose = HashMap::new();
        for m in 1..=rmax {
            for n in 0..=(rmax + 1 - m) {
                let target = m + n - 1;
                for i in 1..=m {
                    let mut table = Vec::with_capacity(elems[m].len() * elems[n].len());
                    for p in &elems[m] {
                        for q in &elems[n] {
                            table.push(lookup(target, &op.compose(p, i, q)?)?);
                        }
                    }
                    compose.insert((m, n, i), table);
                }
            }
        }
        let unit = lookup(1, &op.unit())?;
        let fin = FiniteOperad {
            name: op.name(),
            seq: SymmetricSequence { names, action },
            unit,
            compose,
            k: op.bound(),
        };
        Ok((fin, elems))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn set_name(&mut self, name: impl Into<String>) {
        self.name = name.into();
    }

    pub fn sequence(&self) -> &SymmetricSequence {
        &self.seq
    }

    pub fn rmax(&self) -> usize {
        self.seq.rmax()
    }

    /// Declared truncation bound, if any.
    pub fn k(&self) -> Option<usize> {
        self.k
    }

    pub fn size(&self, r: usize) -> usize {
        self.seq.size(r)
    }

    pub fn elem(&self, arity: usize, index: usize) -> FElem {
        assert!(index < self.size(arity), "element index out of range");
        FElem { arity, index: index as u32 }
    }

    pub fn find(&self, arity: usize, name: &str) -> Option<FElem> {
        let idx = self.seq.names.get(arity)?.iter().position(|n| n == name)?;
        Some(FElem { arity, index: idx as u32 })
    }

    /// Overwrites one composition entry; used to inject faults in tests.
    pub fn set_composite(&mut self, p: FElem, i: usize, q: FElem, result: u32) {
        let nq = self.size(q.arity);
        let table = self.compose.get_mut(&(p.arity, q.arity, i)).expect("entry in domain");
        table[p.index as usize * nq + q.index as usize] = result;
    }

    /// Drops the components above `k` and the compositions leaving the bound.
    pub fn truncate(&self, k: usize) -> FiniteOperad {
        if k >= self.rmax() {
            return FiniteOperad { k: Some(self.k.map_or(k, |b| b.min(k))), ..self.clone() };
        }
        let seq = SymmetricSequence {
            names: self.seq.names[..=k].to_vec(),
            action: self.seq.action[..=k].to_vec(),
        };
        let compose = self
            .compose
            .iter()
            .filter(|((m, n, _), _)| *m <= k && *n <= k && m + n - 1 <= k)
            .map(|(key, t)| (*key, t.clone()))
            .collect();
        FiniteOperad { name: format!("{}<={k}", self.name), seq, unit: self.unit, compose, k: Some(k) }
    }

    /// Arity-wise product; both factors must have the same bound.
    pub fn product(a: &FiniteOperad, b: &FiniteOperad) -> Result<FiniteOperad, OperadError> {
        if a.rmax() != b.rmax() || a.k != b.k {
            return Err(OperadError::BoundMismatch(
                a.k.or(Some(a.rmax())),
                b.k.or(Some(b.rmax())),
            ));
        }
        let rmax = a.rmax();
        let pair = |r: usize, x: u32, y: u32| x * b.size(r) as u32 + y;
        let mut names = Vec::new();
        let mut action = Vec::new();
        for r in 0..=rmax {
            let mut ns = Vec::new();
            for x in &a.seq.names[r] {
                for y in &b.seq.names[r] {
                    ns.push(format!("({x}, {y})"));
                }
            }
            names.push(ns);
            let rows = (0..factorial(r))
                .map(|s| {
                    let mut row = Vec::new();
                    for x in 0..a.size(r) {
                        for y in 0..b.size(r) {
                            row.push(pair(r, a.seq.action[r][s][x], b.seq.action[r][s][y]));
                        }
                    }
                    row
                })
                .collect();
            action.push(rows);
        }
        let mut compose = HashMap::new();
        for (&(m, n, i), ta) in &a.compose {
            let tb = &b.compose[&(m, n, i)];
            let t = m + n - 1;
            let (am, an, bm, bn) = (a.size(m), a.size(n), b.size(m), b.size(n));
            let mut table = vec![0; am * bm * an * bn];
            for x1 in 0..am {
                for y1 in 0..bm {
                    for x2 in 0..an {
                        for y2 in 0..bn {
                            let p = x1 * bm + y1;
                            let q = x2 * bn + y2;
                            table[p * an * bn + q] =
                                pair(t, ta[x1 * an + x2], tb[y1 * bn + y2]);
                        }
                    }
                }
            }
            compose.insert((m, n, i), table);
        }
        Ok(FiniteOperad {
            name: format!("{} x {}", a.name, b.name),
            seq: SymmetricSequence { names, action },
            unit: pair(1, a.unit, b.unit),
            compose,
            k: a.k,
        })
    }

    /// Equality of all tables, ignoring names.
    pub fn same_tables(&self, other: &FiniteOperad) -> bool {
        self.rmax() == other.rmax()
            && (0..=self.rmax()).all(|r| self.size(r) == other.size(r))
            && self.seq.action == other.seq.action
            && self.unit == other.unit
            && self.compose == other.compose
    }

    /// Builds an operad from explicit components and composition/action tables.
    pub(crate) fn from_tables(
        name: String,
        names: Vec<Vec<String>>,
        action: Vec<Vec<Vec<u32>>>,
        unit: u32,
        compose: HashMap<(usize, usize, usize), Vec<u32>>,
        k: Option<usize>,
    ) -> FiniteOperad {
        FiniteOperad { name, seq: SymmetricSequence { names, action }, unit, compose, k }
    }

    pub(crate) fn table(&self, m: usize, n: usize, i: usize) -> Option<&Vec<u32>> {
        self.compose.get(&(m, n, i))
    }

    pub(crate) fn action_rows(&self, r: usize) -> &Vec<Vec<u32>> {
        &self.seq.action[r]
    }

    pub(crate) fn unit_index(&self) -> u32 {
        self.unit
    }

    pub(crate) fn names(&self, r: usize) -> &[String] {
        &self.seq.names[r]
    }

    pub fn from_json(json: &OperadJson) -> Result<FiniteOperad, OperadError> {
        let bad = |msg: String| OperadError::Malformed(msg);
        let mut arities: Vec<usize> = Vec::new();
        for key in json.arity_sets.keys() {
            arities.push(key.parse().map_err(|_| bad(format!("arity key {key:?} is not a number")))?);
        }
        let rmax = *arities.iter().max().ok_or_else(|| bad("no arity sets".into()))?;
        let mut names = vec![Vec::new(); rmax + 1];
        for (key, elems) in &json.arity_sets {
            let r: usize = key.parse().expect("checked");
            let unique: HashSet<&String> = elems.iter().collect();
            if unique.len() != elems.len() {
                return Err(bad(format!("duplicate element in arity {r}")));
            }
            names[r] = elems.clone();
        }
        let rmax = match json.k {
            Some(k) if k < rmax => return Err(bad(format!("arity set {rmax} exceeds k = {k}"))),
            _ => rmax,
        };
        let idx = |r: usize, name: &str| -> Result<u32, OperadError> {
            names
                .get(r)
                .and_then(|ns| ns.iter().position(|n| n == name))
                .map(|p| p as u32)
                .ok_or_else(|| bad(format!("unknown element {name:?} in arity {r}")))
        };
        let unit = idx(1, &json.unit)?;

        let mut compose: HashMap<(usize, usize, usize), Vec<Option<u32>>> = HashMap::new();
        for m in 1..=rmax {
            for n in 0..=(rmax + 1 - m) {
                for i in 1..=m {
                    compose.insert((m, n, i), vec![None; names[m].len() * names[n].len()]);
                }
            }
        }
        for (m, i, p, n, q, res) in &json.compose {
            let (m, i, n) = (*m, *i, *n);
            check_slot(m, i)?;
            let cell = compose
                .get_mut(&(m, n, i))
                .ok_or_else(|| bad(format!("composition ({m}, {n}) lies outside arity {rmax}")))?;
            let slot = idx(m, p)? as usize * names[n].len() + idx(n, q)? as usize;
            let value = idx(m + n - 1, res)?;
            if cell[slot].is_some_and(|v| v != value) {
                return Err(bad(format!("conflicting entries for {p} o_{i} {q}")));
            }
            cell[slot] = Some(value);
        }
        let mut total = HashMap::new();
        for ((m, n, i), cells) in compose {
            let mut table = Vec::with_capacity(cells.len());
            for (slot, c) in cells.into_iter().enumerate() {
                let Some(v) = c else {
                    let nq = names[n].len();
                    return Err(bad(format!(
                        "missing composition {} o_{i} {}",
                        names[m][slot / nq],
                        names[n][slot % nq]
                    )));
                };
                table.push(v);
            }
            total.insert((m, n, i), table);
        }

        let mut action = Vec::new();
        for (r, rnames) in names.iter().enumerate() {
            let size = rnames.len();
            let nperm = factorial(r);
            let mut rows: Vec<Option<Vec<Option<u32>>>> = vec![None; nperm];
            for (ar, p, perm, res) in &json.action {
                if *ar != r {
                    continue;
                }
                let sigma = Perm::from_one_based(perm)
                    .filter(|s| s.len() == r)
                    .ok_or_else(|| bad(format!("invalid permutation {perm:?} in arity {r}")))?;
                let row = rows[sigma.rank()].get_or_insert_with(|| vec![None; size]);
                let slot = idx(r, p)? as usize;
                let value = idx(r, res)?;
                if row[slot].is_some_and(|v| v != value) {
                    return Err(bad(format!("conflicting action entries for {p}")));
                }
                row[slot] = Some(value);
            }
            let mut known: Vec<Option<Vec<u32>>> = vec![None; nperm];
            known[0] = Some((0..size as u32).collect());
            let any_given = rows.iter().any(Option::is_some);
            for (s, row) in rows.into_iter().enumerate() {
                if let Some(row) = row {
                    let full: Option<Vec<u32>> = row.into_iter().collect();
                    let full = full.ok_or_else(|| {
                        bad(format!("action of {} incomplete in arity {r}", Perm::unrank(r, s)))
                    })?;
                    known[s] = Some(full);
                }
            }
            if !any_given {
                for row in known.iter_mut() {
                    *row = Some((0..size as u32).collect());
                }
            }
            // Close the given permutations under composition.
            let perms = Perm::all(r);
            loop {
                let mut grew = false;
                for a in 0..nperm {
                    for b in 0..nperm {
                        let (Some(ra), Some(rb)) = (&known[a], &known[b]) else { continue };
                        let ab = perms[a].compose(&perms[b]).rank();
                        if known[ab].is_none() {
                            let row = rb.iter().map(|&x| ra[x as usize]).collect();
                            known[ab] = Some(row);
                            grew = true;
                        }
                    }
                }
                if !grew {
                    break;
                }
            }
            let full: Option<Vec<Vec<u32>>> = known.into_iter().collect();
            action.push(full.ok_or_else(|| {
                bad(format!("action entries in arity {r} do not generate the symmetric group"))
            })?);
        }

        let op = FiniteOperad {
            name: json.name.clone().unwrap_or_else(|| "fixture".into()),
            seq: SymmetricSequence { names, action },
            unit,
            compose: total,
            k: json.k,
        };
        op.seq.check_group_action().map_err(bad)?;
        Ok(op)
    }

    pub fn to_json(&self) -> OperadJson {
        let arity_sets = (0..=self.rmax())
            .map(|r| (r.to_string(), self.seq.names[r].clone()))
            .collect();
        let mut compose = Vec::new();
        let mut keys: Vec<_> = self.compose.keys().copied().collect();
        keys.sort_unstable();
        for (m, n, i) in keys {
            let table = &self.compose[&(m, n, i)];
            let nq = self.size(n);
            for (slot, &v) in table.iter().enumerate() {
                compose.push((
                    m,
                    i,
                    self.seq.names[m][slot / nq].clone(),
                    n,
                    self.seq.names[n][slot % nq].clone(),
                    self.seq.names[m + n - 1][v as usize].clone(),
                ));
            }
        }
        let mut action = Vec::new();
        for r in 2..=self.rmax() {
            for (s, sigma) in Perm::all(r).into_iter().enumerate().skip(1) {
                for (x, &y) in self.seq.action[r][s].iter().enumerate() {
                    action.push((
                        r,
                        self.seq.names[r][x].clone(),
                        sigma.to_one_based(),
                        self.seq.names[r][y as usize].clone(),
                    ));
                }
            }
        }
        OperadJson {
            name: Some(self.name.clone()),
            arity_sets,
            unit: self.seq.names[1][self.unit as usize].clone(),
            compose,
            action,
            k: self.k,
        }
    }
}

impl Operad for FiniteOperad {
    type Elem = FElem;

    fn name(&self) -> String {
        self.name.clone()
    }
    fn arity(&self, p: &FElem) -> usize {
        p.arity
    }
    fn unit(&self) -> FElem {
        FElem { arity: 1, index: self.unit }
    }
    fn bound(&self) -> Option<usize> {
        Some(self.rmax())
    }
    fn compose(&self, p: &FElem, i: usize, q: &FElem) -> Result<FElem, OperadError> {
        check_slot(p.arity, i)?;
        let t = p.arity + q.arity - 1;
        let table = self
            .compose
            .get(&(p.arity, q.arity, i))
            .ok_or(OperadError::ArityBound { arity: t, bound: self.rmax() })?;
        let index = table[p.index as usize * self.size(q.arity) + q.index as usize];
        Ok(FElem { arity: t, index })
    }
    fn act(&self, sigma: &Perm, p: &FElem) -> FElem {
        self.seq.act(sigma, *p)
    }
    fn elements(&self, arity: usize) -> Vec<FElem> {
        (0..self.size(arity) as u32).map(|index| FElem { arity, index }).collect()
    }
    fn display(&self, p: &FElem) -> String {
        self.seq.name(*p).to_string()
    }
    fn parse(&self, text: &str) -> Option<FElem> {
        let text = text.trim();
        let mut hits = (0..=self.rmax()).filter_map(|r| self.find(r, text));
        let first = hits.next()?;
        hits.next().is_none().then_some(first)
    }
}

/// JSON fixture schema for finite operads. Elements are referenced by name;
/// permutations are 1-based image lists. Arities without action entries get
/// the trivial action; otherwise the listed permutations must generate `Σ_r`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct OperadJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub arity_sets: BTreeMap<String, Vec<String>>,
    pub unit: String,
    /// `[m, i, p, n, q, p ∘_i q]`.
    pub compose: Vec<(usize, usize, String, usize, String, String)>,
    /// `[r, p, σ, σ·p]`.
    #[serde(default)]
    pub action: Vec<(usize, String, Vec<usize>, String)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
}

/// Arity-wise maps between two finite operads.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OperadMorphism {
    /// `maps[r][x]` is the image index of `x ∈ P(r)`.
    pub maps: Vec<Vec<u32>>,
}

impl OperadMorphism {
    /// Tabulates an elementwise map given on the elements of `src`.
    pub fn from_fn(
        src: &FiniteOperad,
        tgt: &FiniteOperad,
        mut f: impl FnMut(FElem) -> Option<FElem>,
    ) -> Result<OperadMorphism, OperadError> {
        let mut maps = Vec::new();
        for r in 0..=src.rmax() {
            let mut row = Vec::new();
            for x in src.elements(r) {
                let y = f(x).ok_or_else(|| {
                    OperadError::Undefined(format!("no image for {}", src.display(&x)))
                })?;
                if y.arity != r || y.index as usize >= tgt.size(r) {
                    return Err(OperadError::Undefined(format!(
                        "image of {} is not in arity {r} of the target",
                        src.display(&x)
                    )));
                }
                row.push(y.index);
            }
            maps.push(row);
        }
        Ok(OperadMorphism { maps })
    }

    pub fn apply(&self, x: FElem) -> FElem {
        FElem { arity: x.arity, index: self.maps[x.arity][x.index as usize] }
    }

    /// `self ∘ first`.
    pub fn after(&self, first: &OperadMorphism) -> OperadMorphism {
        let maps = first
            .maps
            .iter()
            .enumerate()
            .map(|(r, row)| row.iter().map(|&x| self.maps[r][x as usize]).collect())
            .collect();
        OperadMorphism { maps }
    }

    /// Checks compatibility with units, compositions and actions.
    pub fn check(&self, src: &FiniteOperad, tgt: &FiniteOperad) -> Result<(), String> {
        if self.maps.len() != src.rmax() + 1 || tgt.rmax() < src.rmax() {
            return Err("arity ranges do not match".into());
        }
        if self.apply(src.unit()) != tgt.unit() {
            return Err("unit is not preserved".into());
        }
        for (&(m, n, i), table) in &src.compose {
            let nq = src.size(n);
            for (slot, &v) in table.iter().enumerate() {
                let p = FElem { arity: m, index: (slot / nq) as u32 };
                let q = FElem { arity: n, index: (slot % nq) as u32 };
                let lhs = self.apply(FElem { arity: m + n - 1, index: v });
                let rhs = tgt
                    .compose(&self.apply(p), i, &self.apply(q))
                    .map_err(|e| e.to_string())?;
                if lhs != rhs {
                    return Err(format!(
                        "f({} o_{i} {}) differs from f({}) o_{i} f({})",
                        src.display(&p),
                        src.display(&q),
                        src.display(&p),
                        src.display(&q)
                    ));
                }
            }
        }
        for r in 0..=src.rmax() {
            for sigma in Perm::all(r) {
                for x in src.elements(r) {
                    if self.apply(src.act(&sigma, &x)) != tgt.act(&sigma, &self.apply(x)) {
                        return Err(format!("action of {sigma} on {} not preserved", src.display(&x)));
                    }
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opcore::check_axioms;
    use crate::opcore::fixtures::{BoolOr, ConstantWords, Pt};

    #[test]
    fn tabulate_sizes() {
        let (t, _) = FiniteOperad::tabulate(&ConstantWords::idempotent(None), 3).unwrap();
        assert_eq!((0..=3).map(|r| t.size(r)).collect::<Vec<_>>(), vec![1, 4, 16, 96]);
        assert!(t.sequence().check_group_action().is_ok());
    }

    #[test]
    fn truncation_domain() {
        let (t, _) = FiniteOperad::tabulate(&ConstantWords::idempotent(None), 3).unwrap();
        let t2 = t.truncate(2);
        assert!(t2.table(2, 2, 1).is_none());
        assert!(t2.table(2, 0, 1).is_some());
        assert!(t.truncate(3).same_tables(&t));
        assert!(t.truncate(3).truncate(2).same_tables(&t2));
    }

    #[test]
    fn product_cardinalities_and_projection() {
        let (a, _) = FiniteOperad::tabulate(&ConstantWords::idempotent(Some(2)), 2).unwrap();
        let (b, _) = FiniteOperad::tabulate(&BoolOr::bounded(2), 2).unwrap();
        let p = FiniteOperad::product(&a, &b).unwrap();
        for r in 0..=2 {
            assert_eq!(p.size(r), a.size(r) * b.size(r));
        }
        assert!(check_axioms(&p, 2).passed());
        let nb = |r: usize| b.size(r) as u32;
        let proj = OperadMorphism {
            maps: (0..=2).map(|r| (0..p.size(r) as u32).map(|x| x / nb(r)).collect()).collect(),
        };
        assert!(proj.check(&p, &a).is_ok());
        let (c, _) = FiniteOperad::tabulate(&BoolOr::bounded(3), 3).unwrap();
        assert!(matches!(FiniteOperad::product(&a, &c), Err(OperadError::BoundMismatch(..))));
    }

    #[test]
    fn product_with_point_is_isomorphic() {
        let (a, _) = FiniteOperad::tabulate(&BoolOr::bounded(3), 3).unwrap();
        let (pt, _) = FiniteOperad::tabulate(&Pt::new(3), 3).unwrap();
        let p = FiniteOperad::product(&a, &pt).unwrap();
        assert!(p.same_tables(&a));
    }

    #[test]
    fn json_roundtrip() {
        let (a, _) = FiniteOperad::tabulate(&ConstantWords::left_zero_band(Some(2)), 2).unwrap();
        let json = a.to_json();
        let text = serde_json::to_string(&json).unwrap();
        let back = FiniteOperad::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
        assert!(back.same_tables(&a));
    }

    #[test]
    fn json_rejects_missing_entries() {
        let (a, _) = FiniteOperad::tabulate(&BoolOr::bounded(2), 2).unwrap();
        let mut json = a.to_json();
        json.compose.pop();
        assert!(matches!(FiniteOperad::from_json(&json), Err(OperadError::Malformed(_))));
    }

    #[test]
    fn json_action_generated_by_transposition() {
        let (a, _) = FiniteOperad::tabulate(&ConstantWords::idempotent(Some(3)), 3).unwrap();
        let mut json = a.to_json();
        // Keep only the generators (1 2) and (1 2 3) in arity 3.
        json.action.retain(|(r, _, s, _)| *r < 3 || s == &vec![2, 1, 3] || s == &vec![2, 3, 1]);
        let back = FiniteOperad::from_json(&json).unwrap();
        assert!(back.same_tables(&a));
    }
}
