use std::collections::HashSet;

use serde::Serialize;

use super::{Operad, OperadError};
use crate::perm::{composite_permutation, Perm};

/// Violations kept verbatim in a report; the total is always counted.
const MAX_LISTED: usize = 200;

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct Violation {
    pub law: String,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct AxiomReport {
    pub operad: String,
    pub max_arity: usize,
    pub checks: u64,
    pub violation_count: u64,
    pub violations: Vec<Violation>,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.violation_count == 0
    }

    fn record(&mut self, law: &str, detail: String) {
        self.violation_count += 1;
        if self.violations.len() < MAX_LISTED {
            self.violations.push(Violation { law: law.into(), detail });
        }
    }
}

/// Exhaustively checks the operad axioms on all elements of arity at most
/// `max_arity`: unit laws, sequential and parallel associativity,
/// equivariance, group-action laws, and (for bounded operads) that `∘_i` is
/// defined exactly on the truncation domain.
///
/// Associativity and equivariance are compared only where every composite
/// involved is defined.
pub fn check_axioms<O: Operad>(op: &O, max_arity: usize) -> AxiomReport {
    let top = op.bound().map_or(max_arity, |b| b.min(max_arity));
    let elems: Vec<Vec<O::Elem>> = (0..=top).map(|r| op.elements(r)).collect();
    let listed: Vec<HashSet<&O::Elem>> = elems.iter().map(|es| es.iter().collect()).collect();
    let mut rep = AxiomReport {
        operad: op.name(),
        max_arity: top,
        checks: 0,
        violation_count: 0,
        violations: Vec::new(),
    };
    let show = |p: &O::Elem| op.display(p);
    let defined = |r: Result<O::Elem, OperadError>| match r {
        Ok(x) => Some(Ok(x)),
        Err(OperadError::ArityBound { .. }) => None,
        Err(e) => Some(Err(e)),
    };

    // Units and arities.
    let unit = op.unit();
    if op.arity(&unit) != 1 {
        rep.record("unit", "unit does not have arity 1".into());
    }
    for (r, es) in elems.iter().enumerate() {
        for p in es {
            rep.checks += 1;
            if op.arity(p) != r {
                rep.record("arity", format!("{} listed in arity {r}", show(p)));
            }
            match op.compose(&unit, 1, p) {
                Ok(x) if &x == p => {}
                other => rep.record("left unit", format!("1 o_1 {} = {other:?}", show(p))),
            }
            for i in 1..=r {
                match op.compose(p, i, &unit) {
                    Ok(x) if &x == p => {}
                    other => rep.record("right unit", format!("{} o_{i} 1 = {other:?}", show(p))),
                }
            }
        }
    }

    // Result arities and the truncation domain.
    for m in 1..=top {
        for n in 0..=top {
            let in_domain = op.bound().is_none_or(|k| m + n - 1 <= k);
            for p in &elems[m] {
                for q in &elems[n] {
                    for i in 1..=m {
                        rep.checks += 1;
                        match op.compose(p, i, q) {
                            Ok(x) if !in_domain => rep.record(
                                "truncation domain",
                                format!("{} o_{i} {} = {} is outside the bound", show(p), show(q), show(&x)),
                            ),
                            Ok(x) if op.arity(&x) != m + n - 1 => rep.record(
                                "arity",
                                format!("{} o_{i} {} has arity {}", show(p), show(q), op.arity(&x)),
                            ),
                            Ok(x) if m + n - 1 <= top && !listed[m + n - 1].contains(&x) => rep.record(
                                "closure",
                                format!("{} o_{i} {} = {} is not listed", show(p), show(q), show(&x)),
                            ),
                            Ok(_) => {}
                            Err(OperadError::ArityBound { .. }) if !in_domain => {}
                            Err(e) => rep.record(
                                "truncation domain",
                                format!("{} o_{i} {} failed: {e}", show(p), show(q)),
                            ),
                        }
                    }
                }
            }
        }
    }

    // Sequential associativity: (p o_i q) o_{i-1+j} r = p o_i (q o_j r).
    for m in 1..=top {
        for n in 1..=top {
            for l in 0..=top {
                if m + n + l < 2 || m + n + l - 2 > top {
                    continue;
                }
                for p in &elems[m] {
                    for q in &elems[n] {
                        for r in &elems[l] {
                            for i in 1..=m {
                                for j in 1..=n {
                                    rep.checks += 1;
                                    let lhs = defined(op.compose(p, i, q))
                                        .map(|pq| pq.and_then(|pq| op.compose(&pq, i - 1 + j, r)));
                                    let rhs = defined(op.compose(q, j, r))
                                        .map(|qr| qr.and_then(|qr| op.compose(p, i, &qr)));
                                    compare(&mut rep, "sequential associativity", lhs, rhs, || {
                                        format!("p={} i={i} q={} j={j} r={}", show(p), show(q), show(r))
                                    }, &show);
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    // Parallel associativity, i < j, q at j, r at i:
    // (p o_j q) o_i r = (p o_i r) o_{j+l-1} q.
    for m in 2..=top {
        for n in 0..=top {
            for l in 0..=top {
                if m + n + l < 2 || m + n + l - 2 > top {
                    continue;
                }
                for p in &elems[m] {
                    for q in &elems[n] {
                        for r in &elems[l] {
                            for i in 1..m {
                                for j in i + 1..=m {
                                    rep.checks += 1;
                                    let lhs = defined(op.compose(p, j, q))
                                        .map(|pq| pq.and_then(|pq| op.compose(&pq, i, r)));
                                    let rhs = defined(op.compose(p, i, r))
                                        .map(|pr| pr.and_then(|pr| op.compose(&pr, j + l - 1, q)));
                                    compare(&mut rep, "parallel associativity", lhs, rhs, || {
                                        format!("p={} i={i} r={} j={j} q={}", show(p), show(r), show(q))
                                    }, &show);
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    // Equivariance: (σ·p) o_i (π·q) = τ·(p o_{σ⁻¹(i)} q).
    for m in 1..=top {
        let sigmas = Perm::all(m);
        for n in 0..=top.min(top + 1 - m) {
            let pis = Perm::all(n);
            for p in &elems[m] {
                for q in &elems[n] {
                    for sigma in &sigmas {
                        let sp = op.act(sigma, p);
                        for pi in &pis {
                            let pq = op.act(pi, q);
                            for i in 1..=m {
                                rep.checks += 1;
                                let (slot, tau) = composite_permutation(sigma, i, pi);
                                let lhs = defined(op.compose(&sp, i, &pq));
                                let rhs = defined(op.compose(p, slot, q))
                                    .map(|x| x.map(|x| op.act(&tau, &x)));
                                compare(&mut rep, "equivariance", lhs, rhs, || {
                                    format!("p={} q={} i={i} sigma={sigma} pi={pi}", show(p), show(q))
                                }, &show);
                            }
                        }
                    }
                }
            }
        }
    }

    // Group action laws.
    for (r, es) in elems.iter().enumerate() {
        let perms = Perm::all(r);
        for p in es {
            rep.checks += 1;
            if op.act(&Perm::identity(r), p) != *p {
                rep.record("action identity", format!("id moves {}", show(p)));
            }
            for a in &perms {
                let ap = op.act(a, p);
                if op.arity(&ap) != r {
                    rep.record("action arity", format!("{a}·{} changes arity", show(p)));
                    continue;
                }
                for b in &perms {
                    rep.checks += 1;
                    let lhs = op.act(&a.compose(b), p);
                    let rhs = op.act(a, &op.act(b, p));
                    if lhs != rhs {
                        rep.record(
                            "action composition",
                            format!("({a}{b})·{} = {} but {a}·({b}·{}) = {}", show(p), show(&lhs), show(p), show(&rhs)),
                        );
                    }
                }
            }
        }
    }
    rep
}

type Side<E> = Option<Result<E, OperadError>>;

fn compare<E: PartialEq>(
    rep: &mut AxiomReport,
    law: &str,
    lhs: Side<E>,
    rhs: Side<E>,
    ctx: impl FnOnce() -> String,
    show: &impl Fn(&E) -> String,
) {
    match (lhs, rhs) {
        (Some(Ok(a)), Some(Ok(b))) => {
            if a != b {
                rep.record(law, format!("{}: {} vs {}", ctx(), show(&a), show(&b)));
            }
        }
        (Some(Err(OperadError::ArityBound { .. })), _)
        | (_, Some(Err(OperadError::ArityBound { .. })))
        | (None, _)
        | (_, None) => {}
        (Some(Err(e)), _) | (_, Some(Err(e))) => rep.record(law, format!("{}: {e}", ctx())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opcore::fixtures::{BoolOr, Pt};
    use crate::opcore::FiniteOperad;

    #[test]
    fn terminal_operad_passes() {
        let rep = check_axioms(&Pt::new(3), 3);
        assert!(rep.passed(), "{:?}", rep.violations);
        assert!(rep.checks > 0);
    }

    #[test]
    fn corrupted_entry_is_reported() {
        let (mut t, _) = FiniteOperad::tabulate(&BoolOr::bounded(3), 3).unwrap();
        let p = t.find(2, "b2:0").unwrap();
        let q = t.find(2, "b2:0").unwrap();
        // b2:0 o_1 b2:0 should be b3:0; force it to b3:1.
        let wrong = t.find(3, "b3:1").unwrap();
        t.set_composite(p, 1, q, wrong.index);
        let rep = check_axioms(&t, 3);
        assert!(!rep.passed());
        assert!(rep.violations.iter().any(|v| v.detail.contains("b2:0") && v.detail.contains("i=1")));
    }
}
