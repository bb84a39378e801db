use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use operadforge::bemonoid::{Monomial, ObM};
use operadforge::forest::RTree;
use operadforge::opcore::Operad;
use operadforge::perm::{factorial, Perm};
use operadforge::wcons::{format_length, parse_length, Kind, Length, Variant, WCons};

fn perm(n: usize) -> impl Strategy<Value = Perm> {
    (0..factorial(n)).prop_map(move |r| Perm::unrank(n, r))
}

fn monomial(max_arity: usize) -> impl Strategy<Value = Monomial> {
    (0..=max_arity)
        .prop_flat_map(|r| (perm(r), prop::collection::vec(any::<bool>(), r + 1)))
        .prop_filter_map("arity zero is the single word e", |(sigma, mut flags)| {
            if sigma.is_empty() {
                flags[0] = true;
            }
            Monomial::new(sigma, flags).ok()
        })
}

/// Textual substitution of `q` into input `i` of `p`, merging adjacent `e`s.
fn substitute(p: &str, i: usize, q: &str, q_arity: usize) -> String {
    let mut out: Vec<String> = Vec::new();
    let mut push = |tok: String| {
        if !(tok == "e" && out.last().is_some_and(|t| t == "e")) {
            out.push(tok);
        }
    };
    for tok in p.split_whitespace() {
        match tok.strip_prefix('x').map(|s| s.parse::<usize>().unwrap()) {
            Some(j) if j == i => {
                for t in q.split_whitespace() {
                    match t.strip_prefix('x').map(|s| s.parse::<usize>().unwrap()) {
                        Some(k) => push(format!("x{}", k + i - 1)),
                        None => push(t.to_string()),
                    }
                }
            }
            Some(j) if j > i => push(format!("x{}", j + q_arity - 1)),
            _ => push(tok.to_string()),
        }
    }
    out.join(" ")
}

proptest! {
    #[test]
    fn perm_group_laws((a, b, c) in (0usize..6).prop_flat_map(|n| (perm(n), perm(n), perm(n)))) {
        prop_assert_eq!(a.compose(&b).compose(&c), a.compose(&b.compose(&c)));
        prop_assert!(a.compose(&a.inverse()).is_identity());
        prop_assert_eq!(Perm::unrank(a.len(), a.rank()), a);
    }

    #[test]
    fn monomial_text_round_trip(p in monomial(5)) {
        prop_assert_eq!(p.to_string().parse::<Monomial>().unwrap(), p.clone());
        prop_assert_eq!(p.to_long_string().parse::<Monomial>().unwrap(), p);
    }

    #[test]
    fn monomial_composition_is_substitution(p in monomial(4), q in monomial(3), i in 1usize..=4) {
        prop_assume!(i <= p.arity());
        let x = p.compose(i, &q).unwrap();
        prop_assert_eq!(x.to_string(), substitute(&p.to_string(), i, &q.to_string(), q.arity()));
    }

    #[test]
    fn canonical_form_ignores_presentation(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = RTree::random(&mut rng, 9, 3, 0.3);
        let (s, _, _) = t.shuffled(&mut rng);
        prop_assert_eq!(t.canonicalize(), s.canonicalize());
        let mut order = t.leaf_order();
        order.sort_unstable();
        prop_assert_eq!(order, (1..=t.arity()).collect::<Vec<_>>());
    }

    #[test]
    fn grafting_adds_arities(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = RTree::random(&mut rng, 5, 3, 0.2);
        let b = RTree::random(&mut rng, 5, 3, 0.2);
        prop_assume!(a.arity() > 0);
        for i in 1..=a.arity() {
            let g = a.graft(i, &b).unwrap();
            prop_assert_eq!(g.arity(), a.arity() + b.arity() - 1);
            prop_assert_eq!(g.num_vertices(), a.num_vertices() + b.num_vertices());
        }
    }

    #[test]
    fn length_text_round_trip(n in 0i64..=60, d in 1i64..=60) {
        prop_assume!(n <= d);
        let l = Length::new(n, d);
        prop_assert_eq!(parse_length(&format_length(&l)).unwrap(), l);
    }

    #[test]
    fn normal_forms_are_stable(seed in any::<u64>(), kind in prop::sample::select(Kind::ALL.to_vec())) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let wc = WCons::new(ObM::new(), Variant::new(kind, None)).unwrap();
        let w = wc.random_raw(&mut rng, 7, 3);
        let n = wc.normalize(&w).unwrap();
        prop_assert!(wc.is_normal(&n));
        prop_assert_eq!(wc.normalize(&n).unwrap(), n.clone());
        prop_assert_eq!(wc.epsilon(&n).unwrap(), wc.epsilon(&w).unwrap());
        let sigma = Perm::unrank(n.arity(), seed as usize % factorial(n.arity()));
        let back = wc.act(&sigma.inverse(), &wc.act(&sigma, &n));
        prop_assert_eq!(back, n.clone());
        let moved = wc.epsilon(&wc.act(&sigma, &n)).unwrap();
        prop_assert_eq!(moved, ObM::new().act(&sigma, &wc.epsilon(&n).unwrap()));
    }
}
