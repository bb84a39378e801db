use rand::RngCore;
use serde::Serialize;

use super::{Kind, NonUnitalRep, Variant, WCons, WError};
use crate::bemonoid::unit_factorizations;
use crate::freeop::DecoratedJson;
use crate::opcore::Operad;

/// Raw element whose randomised normal forms disagree with the
/// deterministic one.
#[derive(Clone, Debug, Serialize)]
pub struct ConfluenceFailure {
    pub raw: DecoratedJson,
    pub deterministic: DecoratedJson,
    pub randomized: DecoratedJson,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConfluenceReport {
    pub variant: String,
    pub elements: usize,
    pub orders: usize,
    /// Normal forms that still admit a rewrite step.
    pub not_normal: usize,
    pub failures: Vec<ConfluenceFailure>,
}

impl ConfluenceReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.not_normal == 0
    }
}

/// Normalises `count` random raw elements deterministically and along
/// `orders` uniformly random rule orders each, comparing canonical forms.
pub fn confluence_suite<O: Operad>(
    wc: &WCons<O>,
    count: usize,
    orders: usize,
    max_vertices: usize,
    rng: &mut dyn RngCore,
) -> Result<ConfluenceReport, WError> {
    let mut rep = ConfluenceReport {
        variant: wc.variant.to_string(),
        elements: 0,
        orders,
        not_normal: 0,
        failures: Vec::new(),
    };
    for _ in 0..count {
        let x = wc.random_raw(rng, max_vertices, 3);
        let n = wc.normalize(&x)?;
        rep.elements += 1;
        if !wc.is_normal(&n) {
            rep.not_normal += 1;
        }
        for _ in 0..orders {
            let m = wc.normalize_random(&x, rng)?;
            if m != n {
                rep.failures.push(ConfluenceFailure {
                    raw: wc.to_json(&x),
                    deterministic: wc.to_json(&n),
                    randomized: wc.to_json(&m),
                });
            }
        }
    }
    Ok(rep)
}

#[derive(Clone, Debug, Serialize)]
pub struct Lemma2Report {
    pub operad: String,
    pub samples: usize,
    /// Normal forms equal to the identity, sent to the vertex-free tree.
    pub trivial: usize,
    /// Normal forms that still carry a unit-labelled vertex.
    pub unit_vertices_left: usize,
    /// Normal forms that are not normal once the unit relation is dropped.
    pub not_normal_without_units: usize,
    pub round_trip_failures: usize,
    /// Factorisations `p ∘_i q = 1` with `(p, q) ≠ (1, 1)`; when present the
    /// non-unit elements are not closed under composition.
    pub unit_factorizations: Vec<String>,
    pub failures: Vec<String>,
}

impl Lemma2Report {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Normalises random elements in `W` and moves them to `W'` over the
/// non-unit elements and back.
pub fn lemma2_suite<O: Operad + Clone>(
    wc: &WCons<O>,
    samples: usize,
    max_vertices: usize,
    rng: &mut dyn RngCore,
) -> Result<Lemma2Report, WError> {
    if wc.variant.kind != Kind::W {
        return Err(WError::VariantMismatch(Variant::new(Kind::W, wc.variant.k), wc.variant));
    }
    let prime = wc.with_variant(Variant::new(Kind::WPrime, wc.variant.k))?;
    let unit = wc.op.unit();
    let mut rep = Lemma2Report {
        operad: wc.op.name(),
        samples: 0,
        trivial: 0,
        unit_vertices_left: 0,
        not_normal_without_units: 0,
        round_trip_failures: 0,
        unit_factorizations: unit_factorizations(&wc.op, 2)
            .into_iter()
            .map(|(p, i, q)| format!("{} o_{i} {}", wc.op.display(&p), wc.op.display(&q)))
            .collect(),
        failures: Vec::new(),
    };
    for _ in 0..samples {
        let x = wc.normalize(&wc.random_raw(rng, max_vertices, 3))?;
        rep.samples += 1;
        let rep_x = wc.to_nonunital(&x)?;
        match &rep_x {
            NonUnitalRep::Trivial => rep.trivial += 1,
            NonUnitalRep::Tree(t) => {
                if t.labels().contains(&unit) {
                    rep.unit_vertices_left += 1;
                    rep.failures.push(format!("unit vertex left in {}", wc.to_text(&x)));
                }
                if !prime.is_normal(t) {
                    rep.not_normal_without_units += 1;
                    rep.failures.push(format!("not normal in W': {}", wc.to_text(&x)));
                }
            }
        }
        if wc.from_nonunital(&rep_x)? != x {
            rep.round_trip_failures += 1;
            rep.failures.push(format!("round trip changed {}", wc.to_text(&x)));
        }
    }
    Ok(rep)
}
