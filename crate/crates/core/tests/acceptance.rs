//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Built with `harness = false` so that the lines are always printed; the
//! process exits with status 1 if any criterion fails.

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use operadforge::bemonoid::{enumerate_obm, verify_lemma1, ELevel, Monomial, ObM};
use operadforge::freeop::random_term;
use operadforge::homotopy_lab::{
    check_endpoints, check_semigroup, element_heights, example_tree, find_tau_counterexample,
    homotopy_suite, truncated_suite, Time,
};
use operadforge::opcore::fixtures::{BoolOr, ConstantWords, Parity, Pt};
use operadforge::opcore::{
    check_axioms, is_unitary, unitarize, FiniteOperad, Operad, OperadError, OperadMorphism, Product, Truncated,
};
use operadforge::perm::Perm;
use operadforge::wcons::{confluence_suite, lemma2_suite, Kind, Length, Variant, WCons, WError};

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn l(n: i64, d: i64) -> Length {
    Length::new(n, d)
}

// Independent model of Ob M: words over `e` and `x_j`, composed by textual
// substitution with adjacent `e`s merged.

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
enum Tok {
    E,
    X(usize),
}

type Word = Vec<Tok>;

fn word_arity(w: &Word) -> usize {
    w.iter().filter(|t| matches!(t, Tok::X(_))).count()
}

fn merge_e(w: Word) -> Word {
    let mut out: Word = Vec::with_capacity(w.len());
    for t in w {
        if t == Tok::E && out.last() == Some(&Tok::E) {
            continue;
        }
        out.push(t);
    }
    out
}

fn word_compose(p: &Word, i: usize, q: &Word) -> Word {
    let n = word_arity(q);
    let mut out = Vec::new();
    for &t in p {
        match t {
            Tok::X(j) if j == i => out.extend(q.iter().map(|&s| match s {
                Tok::X(k) => Tok::X(k + i - 1),
                Tok::E => Tok::E,
            })),
            Tok::X(j) if j > i => out.push(Tok::X(j + n - 1)),
            other => out.push(other),
        }
    }
    merge_e(out)
}

fn word_act(sigma: &Perm, w: &Word) -> Word {
    w.iter()
        .map(|&t| match t {
            Tok::X(j) => Tok::X(sigma.apply(j - 1) + 1),
            Tok::E => Tok::E,
        })
        .collect()
}

fn word_text(w: &Word) -> String {
    w.iter()
        .map(|t| match t {
            Tok::E => "e".to_string(),
            Tok::X(j) => format!("x{j}"),
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// Closure of `{x1, e, x1 x2}` under composition and the symmetric actions,
/// restricted to arity at most `rmax`.
fn closure(rmax: usize) -> Vec<BTreeSet<Word>> {
    let mut sets: Vec<BTreeSet<Word>> = vec![BTreeSet::new(); rmax + 1];
    sets[1].insert(vec![Tok::X(1)]);
    sets[0].insert(vec![Tok::E]);
    sets[2].insert(vec![Tok::X(1), Tok::X(2)]);
    loop {
        let mut added = false;
        let snapshot = sets.clone();
        for m in 1..=rmax {
            for n in 0..=rmax + 1 - m {
                for p in &snapshot[m] {
                    for q in &snapshot[n] {
                        for i in 1..=m {
                            let x = word_compose(p, i, q);
                            added |= sets[m + n - 1].insert(x);
                        }
                    }
                }
            }
        }
        for r in 2..=rmax {
            for sigma in Perm::all(r) {
                for p in &snapshot[r] {
                    added |= sets[r].insert(word_act(&sigma, p));
                }
            }
        }
        if !added {
            return sets;
        }
    }
}

fn factorial(r: usize) -> usize {
    (1..=r).product()
}

fn criterion_1() -> Check {
    let oracle = closure(3);
    let mut counts = Vec::new();
    for r in 0..=3 {
        let ours: BTreeSet<String> = enumerate_obm(r).iter().map(Monomial::to_string).collect();
        let theirs: BTreeSet<String> = oracle[r].iter().map(word_text).collect();
        let expected = if r == 0 { 1 } else { factorial(r) << (r + 1) };
        ensure(ours.len() == expected, || format!("|Ob M({r})| = {} != {expected}", ours.len()))?;
        ensure(ours == theirs, || format!("arity {r} differs from the closure oracle"))?;
        counts.push(ours.len());
    }
    Ok(format!("sizes {counts:?}"))
}

fn criterion_2() -> Check {
    let obm = check_axioms(&ObM::truncated(3), 3);
    ensure(obm.passed(), || format!("Ob M<=3: {:?}", obm.violations.first()))?;
    let mut checks = obm.checks;
    let prod1 = check_axioms(&Product::new(ObM::truncated(2), BoolOr::bounded(2)), 2);
    ensure(prod1.passed(), || format!("Ob M<=2 x BoolOr: {:?}", prod1.violations.first()))?;
    let prod2 = check_axioms(&Product::new(ObM::truncated(2), Truncated::new(Parity::unbounded(), 2)), 2);
    ensure(prod2.passed(), || format!("Ob M<=2 x Parity: {:?}", prod2.violations.first()))?;
    checks += prod1.checks + prod2.checks;
    Ok(format!("{checks} checks, 0 violations"))
}

fn criterion_3() -> Check {
    let rep = verify_lemma1(3, 2, 10_000, &mut rng(3));
    ensure(rep.passed(), || format!("{:?}", rep.violations.first()))?;
    ensure(rep.simplex_checks == 10_000, || "simplex sample count".into())?;
    // Oracle: word substitution on the closure.
    let words = closure(4);
    let unit = vec![Tok::X(1)];
    let mut object = 0;
    let mut factor = 0;
    for m in 1..=3 {
        for n in 0..=3 {
            for p in &words[m] {
                for q in &words[n] {
                    for i in 1..=m {
                        let x = word_compose(p, i, q);
                        factor += 1;
                        ensure(x != unit || (*p == unit && *q == unit), || {
                            format!("{} o_{i} {} = x1", word_text(p), word_text(q))
                        })?;
                        if m + n - 1 <= 3 && *p != unit && *q != unit {
                            object += 1;
                            ensure(x != unit, || format!("{} o_{i} {} = x1", word_text(p), word_text(q)))?;
                        }
                    }
                }
            }
        }
    }
    Ok(format!(
        "{} object + {object} oracle object checks, {} simplex pairs, {factor} factorisations",
        rep.object_checks, rep.simplex_checks
    ))
}

fn criterion_4() -> Check {
    let mut r = rng(4);
    let mut total = 0;
    for kind in Kind::ALL {
        let wc = WCons::new(ObM::new(), Variant::new(kind, None)).map_err(|e| e.to_string())?;
        let rep = confluence_suite(&wc, 1000, 5, 7, &mut r).map_err(|e| e.to_string())?;
        ensure(rep.passed(), || {
            format!("{kind}: {} failures, {} not normal", rep.failures.len(), rep.not_normal)
        })?;
        total += rep.elements * (rep.orders + 1);
    }
    // Bit-identical serialised normal forms across orders.
    let wc = WCons::new(ObM::new(), Variant::new(Kind::TauW, None)).map_err(|e| e.to_string())?;
    for _ in 0..200 {
        let x = wc.random_raw(&mut r, 7, 3);
        let a = serde_json::to_string(&wc.to_json(&wc.normalize(&x).map_err(|e| e.to_string())?)).unwrap();
        let b = serde_json::to_string(&wc.to_json(&wc.normalize_random(&x, &mut r).map_err(|e| e.to_string())?))
            .unwrap();
        ensure(a == b, || format!("serialised forms differ: {a} vs {b}"))?;
    }
    Ok(format!("{total} normalisations over 4 variants"))
}

fn criterion_5() -> Check {
    let mut r = rng(5);
    let mut out = Vec::new();
    for n in [1, 2] {
        let wc = WCons::new(Product::new(ELevel::new(n), BoolOr::unbounded()), Variant::new(Kind::W, None))
            .map_err(|e| e.to_string())?;
        let rep = lemma2_suite(&wc, 1000, 7, &mut r).map_err(|e| e.to_string())?;
        ensure(rep.passed(), || format!("E_{n} x BoolOr: {:?}", rep.failures.first()))?;
        ensure(rep.samples == 1000, || "sample count".into())?;
        out.push(format!("E_{n}: {} identities", rep.trivial));
    }
    Ok(out.join(", "))
}

fn criterion_6() -> Check {
    fn section<O: Operad + Clone>(op: O, kind: Kind, rmax: usize) -> Result<usize, String> {
        let wc = WCons::new(op.clone(), Variant::new(kind, None)).map_err(|e| e.to_string())?;
        let mut n = 0;
        for r in 0..=rmax {
            for p in op.elements(r) {
                let back = wc.epsilon(&wc.eta(p.clone())).map_err(|e| e.to_string())?;
                ensure(back == p, || format!("epsilon(eta({})) = {}", op.display(&p), op.display(&back)))?;
                n += 1;
            }
        }
        Ok(n)
    }
    let mut n = section(ObM::new(), Kind::W, 3)?;
    n += section(BoolOr::unbounded(), Kind::TauW, 3)?;
    n += section(Parity::unbounded(), Kind::WPrime, 3)?;
    n += section(ConstantWords::left_zero_band(None), Kind::W, 2)?;
    n += section(Product::new(ELevel::new(1), BoolOr::unbounded()), Kind::W, 2)?;

    let mut r = rng(6);
    let mut pairs = 0;
    for kind in Kind::ALL {
        let wc = WCons::new(ObM::new(), Variant::new(kind, None)).map_err(|e| e.to_string())?;
        while pairs < 125 * (kind as usize + 1) {
            let a = wc.random_raw(&mut r, 4, 3);
            let b = wc.random_raw(&mut r, 4, 3);
            if a.arity() == 0 {
                continue;
            }
            let i = r.gen_range(1..=a.arity());
            let ab = wc.w_compose(&a, i, &b).map_err(|e| e.to_string())?;
            let lhs = wc.epsilon(&ab).map_err(|e| e.to_string())?;
            let ea = wc.epsilon(&a).map_err(|e| e.to_string())?;
            let eb = wc.epsilon(&b).map_err(|e| e.to_string())?;
            let rhs = ObM::new().compose(&ea, i, &eb).map_err(|e| e.to_string())?;
            ensure(lhs == rhs, || format!("epsilon not multiplicative: {lhs} vs {rhs}"))?;
            pairs += 1;
        }
    }
    Ok(format!("{n} sections, {pairs} composable pairs"))
}

fn criterion_7() -> Check {
    let mut r = rng(7);
    let mut samples = 0;
    for kind in [Kind::WPrime, Kind::TauWPrime] {
        let wc = WCons::new(ObM::new(), Variant::new(kind, None)).map_err(|e| e.to_string())?;
        for _ in 0..500 {
            let w = wc.random_raw(&mut r, 7, 3);
            let h = wc.to_heights(&w).map_err(|e| e.to_string())?;
            ensure(wc.from_heights(&h).map_err(|e| e.to_string())? == w, || "height round trip".into())?;
            let (zero, identity) = check_endpoints(&wc, &w).map_err(|e| e.to_string())?;
            ensure(zero && identity, || format!("endpoints fail on {}", wc.to_text(&w)))?;
            let s = Time::Finite(l(r.gen_range(0..9), 4));
            let t = if r.gen_bool(0.2) { Time::Infinity } else { Time::Finite(l(r.gen_range(0..9), 4)) };
            ensure(check_semigroup(&wc, s, t, &w).map_err(|e| e.to_string())?, || {
                format!("semigroup fails at s={s}, t={t} on {}", wc.to_text(&w))
            })?;
            samples += 1;
        }
    }
    let wc = WCons::new(ObM::new(), Variant::new(Kind::TauWPrime, None)).map_err(|e| e.to_string())?;
    let times = Time::standard_samples();
    ensure(times.len() == 7, || "seven standard times".into())?;
    let rep = homotopy_suite(&wc, 500, &times, 6, &mut r).map_err(|e| e.to_string())?;
    ensure(rep.passed(), || format!("{} failures, first {:?}", rep.failures.len(), rep.failures.first()))?;
    ensure(rep.pairs == 500, || "pair count".into())?;

    let (l1, l2, l3, l4, l5) = (l(1, 3), l(1, 4), l(1, 2), l(1, 2), l(2, 3));
    let wp = WCons::new(ObM::new(), Variant::new(Kind::WPrime, None)).map_err(|e| e.to_string())?;
    let tree = example_tree(&wp, [l1, l2, l3, l4, l5]).map_err(|e| e.to_string())?;
    let h = element_heights(&wp, &tree).map_err(|e| e.to_string())?;
    let expected = vec![Length::from_integer(0), l1, l2 + l4, l3 + l4, l4, l5];
    ensure(h == expected, || format!("example heights {h:?}"))?;
    Ok(format!(
        "{samples} round trips, {} pairs x {} times, {} checks, {} reduction pairs",
        rep.pairs,
        rep.times.len(),
        rep.checks,
        rep.reduction_pairs
    ))
}

fn criterion_8() -> Check {
    let wc = WCons::new(ObM::new(), Variant::new(Kind::TauWPrime, None)).map_err(|e| e.to_string())?;
    let none = find_tau_counterexample(&wc, 2).map_err(|e| e.to_string())?;
    ensure(none.is_none(), || "witness found with two vertices".into())?;
    let wit = find_tau_counterexample(&wc, 4).map_err(|e| e.to_string())?.ok_or("no witness within 4 vertices")?;
    ensure(wit.pair.left.num_vertices() <= 4, || "witness too large".into())?;
    ensure(wit.classical.0 != wit.classical.1, || "classical images agree".into())?;
    ensure(wit.rho.0 == wit.rho.1, || "height images differ".into())?;
    Ok(format!("t = {}: {} vs {}", wit.t, wc.to_text(&wit.pair.left), wc.to_text(&wit.pair.right)))
}

fn criterion_9() -> Check {
    // Composition guards on the truncated label operads.
    let full = ObM::new();
    let mut guards = 0;
    for k in [2, 3] {
        let op = ObM::truncated(k);
        let wrapped = Truncated::new(BoolOr::unbounded(), k);
        for m in 1..=k + 1 {
            for n in 0..=k + 1 {
                let p = full.elements(m).into_iter().last().unwrap();
                let q = full.elements(n).into_iter().last().unwrap();
                let allowed = m <= k && n <= k && m + n - 1 <= k;
                let got = op.compose(&p, 1, &q);
                ensure(got.is_ok() == allowed, || format!("k={k} m={m} n={n}: {got:?}"))?;
                if !allowed {
                    ensure(matches!(got, Err(OperadError::ArityBound { .. })), || "wrong error".into())?;
                }
                let got = wrapped.compose(&(m, false), 1, &(n, n == 0));
                ensure(got.is_ok() == allowed, || format!("wrapped k={k} m={m} n={n}"))?;
                guards += 2;
            }
        }
        // The same guard one level up.
        let wc = WCons::new(ObM::truncated(k), Variant::new(Kind::W, Some(k))).map_err(|e| e.to_string())?;
        for m in 1..=k {
            for n in 0..=k {
                let a = wc.eta(full.elements(m).into_iter().next().unwrap());
                let b = wc.eta(full.elements(n).into_iter().next().unwrap());
                let got = wc.w_compose(&a, 1, &b);
                let allowed = m + n - 1 <= k;
                ensure(got.is_ok() == allowed, || format!("w_compose k={k} m={m} n={n}"))?;
                if !allowed {
                    ensure(matches!(got, Err(WError::ArityBound { .. })), || "wrong error".into())?;
                }
                guards += 1;
            }
        }
    }

    // Zero-arity-first evaluation against every admissible order.
    let mut r = rng(9);
    let mut terms = 0;
    let mut orders = 0;
    for k in [2, 3] {
        for _ in 0..150 {
            let t = random_term(&ObM::truncated(k), &mut r, 6, 3, Some(k));
            let value = t.evaluate(&ObM::truncated(k)).map_err(|e| e.to_string())?;
            let (all, count) = t.all_contraction_results(&ObM::truncated(k)).map_err(|e| e.to_string())?;
            ensure(all.len() == 1 && all.contains(&value), || {
                format!("orders disagree: {all:?} vs {value}")
            })?;
            terms += 1;
            orders += count;
        }
    }

    let mut traces = 0;
    let mut longest = 0;
    for k in [2, 3] {
        let wc = WCons::new(ObM::truncated(k), Variant::new(Kind::W, Some(k))).map_err(|e| e.to_string())?;
        let rep = truncated_suite(&wc, 200, 7, &mut r).map_err(|e| e.to_string())?;
        ensure(rep.passed(), || format!("k={k}: {:?}", rep.failures.first()))?;
        traces += rep.samples;
        longest = longest.max(rep.longest_trace);
    }
    Ok(format!("{guards} guards, {terms} terms over {orders} orders, {traces} traces (longest {longest})"))
}

fn criterion_10() -> Check {
    let mut fixtures: Vec<FiniteOperad> = Vec::new();
    fixtures.push(FiniteOperad::tabulate(&BoolOr::bounded(3), 3).map_err(|e| e.to_string())?.0);
    fixtures.push(FiniteOperad::tabulate(&Parity::unbounded(), 3).map_err(|e| e.to_string())?.0);
    fixtures.push(FiniteOperad::tabulate(&Pt::new(3), 3).map_err(|e| e.to_string())?.0);
    fixtures.push(FiniteOperad::tabulate(&ObM::truncated(2), 2).map_err(|e| e.to_string())?.0);
    let band = FiniteOperad::tabulate(&ConstantWords::left_zero_band(Some(2)), 2).map_err(|e| e.to_string())?.0;
    fixtures.push(band.clone());
    let idem = FiniteOperad::tabulate(&ConstantWords::idempotent(Some(2)), 2).map_err(|e| e.to_string())?.0;
    fixtures.push(idem.clone());
    for p in &fixtures {
        let u = unitarize(p);
        let rep = check_axioms(&u.operad, u.operad.rmax());
        ensure(rep.passed(), || format!("tau({}) fails: {:?}", p.name(), rep.violations.first()))?;
        ensure(is_unitary(&u.operad), || format!("tau({}) is not unitary", p.name()))?;
        ensure(u.quotient.check(p, &u.operad).is_ok(), || "quotient is not a morphism".into())?;
        let uu = unitarize(&u.operad);
        ensure(uu.operad.same_tables(&u.operad), || format!("tau is not idempotent on {}", p.name()))?;
    }

    let u = unitarize(&band);
    let xa = band.find(1, "x1 a").ok_or("x1 a missing")?;
    let xb = band.find(1, "x1 b").ok_or("x1 b missing")?;
    ensure(xa != xb, || "fixture elements coincide".into())?;
    ensure(u.quotient.apply(xa) == u.quotient.apply(xb), || "x1 a and x1 b not identified".into())?;
    let sizes: Vec<usize> = (0..=2).map(|r| u.operad.size(r)).collect();

    // Spot check: the band words map to the idempotent words by renaming
    // both constants to e; that morphism factors through the quotient.
    let f = OperadMorphism::from_fn(&band, &idem, |x| {
        let name = band.display(&x).replace(['a', 'b'], "e");
        let words: Vec<&str> = name.split(' ').collect();
        let mut merged: Vec<&str> = Vec::new();
        for w in words {
            if w == "e" && merged.last() == Some(&"e") {
                continue;
            }
            merged.push(w);
        }
        idem.find(x.arity, &merged.join(" "))
    })
    .map_err(|e| e.to_string())?;
    f.check(&band, &idem)?;
    let g = u.factor_through(&band, &f, &idem).map_err(|e| e.to_string())?;
    ensure(g.after(&u.quotient) == f, || "factorisation does not reproduce f".into())?;
    ensure(u.factor_through(&band, &f, &band).is_err(), || "non-unitary target accepted".into())?;
    Ok(format!("{} fixtures, tau(Q) sizes {sizes:?}", fixtures.len()))
}

struct Criterion {
    id: usize,
    name: &'static str,
    limit: Option<Duration>,
    run: fn() -> Check,
}

fn main() {
    let criteria = [
        Criterion { id: 1, name: "enumeration", limit: Some(Duration::from_secs(5)), run: criterion_1 },
        Criterion { id: 2, name: "operad axioms", limit: Some(Duration::from_secs(30)), run: criterion_2 },
        Criterion { id: 3, name: "non-unital closure", limit: None, run: criterion_3 },
        Criterion { id: 4, name: "rewriting confluence", limit: None, run: criterion_4 },
        Criterion { id: 5, name: "unit elimination", limit: None, run: criterion_5 },
        Criterion { id: 6, name: "section and augmentation", limit: None, run: criterion_6 },
        Criterion { id: 7, name: "height homotopy", limit: None, run: criterion_7 },
        Criterion { id: 8, name: "classical clamp counterexample", limit: Some(Duration::from_secs(10)), run: criterion_8 },
        Criterion { id: 9, name: "truncated layer", limit: None, run: criterion_9 },
        Criterion { id: 10, name: "unitarization", limit: None, run: criterion_10 },
    ];
    let total_limit = Duration::from_secs(300);
    let start = Instant::now();
    let mut failed = 0;
    let mut summary: BTreeMap<usize, bool> = BTreeMap::new();
    for c in &criteria {
        let t0 = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(c.run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        let elapsed = t0.elapsed();
        let result = match (result, c.limit) {
            (Ok(_), Some(limit)) if elapsed > limit => {
                Err(format!("took {:.2}s, limit {}s", elapsed.as_secs_f64(), limit.as_secs()))
            }
            (r, _) => r,
        };
        let ok = result.is_ok();
        summary.insert(c.id, ok);
        if !ok {
            failed += 1;
        }
        let detail = result.unwrap_or_else(|e| e);
        println!(
            "criterion {:>2} {:<32} {} ({detail}; {:.2}s)",
            c.id,
            c.name,
            if ok { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        );
    }
    let total = start.elapsed();
    let in_time = total <= total_limit;
    println!(
        "total runtime {:.2}s {} (limit {}s)",
        total.as_secs_f64(),
        if in_time { "PASS" } else { "FAIL" },
        total_limit.as_secs()
    );
    println!("acceptance: {} of {} criteria passed", summary.values().filter(|&&ok| ok).count(), summary.len());
    if failed > 0 || !in_time {
        std::process::exit(1);
    }
}
