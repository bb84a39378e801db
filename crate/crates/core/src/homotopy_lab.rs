//! Homotopies on W-constructions: the height clamp `ρ_t`, the classical
//! length clamp, their compatibility with the identification relations, and
//! the two-step retraction of truncated elements.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};
use rand::{Rng, RngCore};
use serde::Serialize;
use thiserror::Error;

use crate::forest::{RTree, Slot, VertexId};
use crate::freeop::DecoratedJson;
use crate::opcore::Operad;
use crate::wcons::{
    format_length, parse_length, validate_truncated, Kind, Length, Redex, TruncationReport, Variant, WCons,
    WElement, WError,
};

/// A time parameter: a nonnegative rational or `∞` (no clamp).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Time {
    Finite(Length),
    Infinity,
}

impl Time {
    pub fn finite(n: i64, d: i64) -> Time {
        Time::Finite(Length::new(n, d))
    }

    fn cap(&self, h: Length) -> Length {
        match self {
            Time::Finite(t) => h.min(*t),
            Time::Infinity => h,
        }
    }

    /// The times used by the compatibility suites.
    pub fn standard_samples() -> Vec<Time> {
        vec![
            Time::finite(0, 1),
            Time::finite(1, 4),
            Time::finite(1, 2),
            Time::finite(3, 4),
            Time::finite(1, 1),
            Time::finite(2, 1),
            Time::Infinity,
        ]
    }
}

impl fmt::Display for Time {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Time::Finite(t) => f.write_str(&format_length(t)),
            Time::Infinity => f.write_str("inf"),
        }
    }
}

impl FromStr for Time {
    type Err = HomotopyError;

    fn from_str(s: &str) -> Result<Time, HomotopyError> {
        match s.trim() {
            "inf" | "infinity" | "∞" => Ok(Time::Infinity),
            other => {
                let t = parse_length(other)?;
                if t < Length::zero() {
                    return Err(HomotopyError::NegativeTime(other.to_string()));
                }
                Ok(Time::Finite(t))
            }
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HomotopyError {
    #[error(transparent)]
    W(#[from] WError),
    #[error("negative time {0}")]
    NegativeTime(String),
    #[error("relation pair is not equivalent: {0}")]
    NotEquivalent(String),
    #[error("the pair generator needs {0}")]
    Generator(String),
}

/// Heights of every vertex: `h_root = 0`, `h_x = h_parent + l_x`.
fn heights<E: Clone>(w: &WElement<E>) -> Vec<Length> {
    let t = w.tree();
    let mut h = vec![Length::zero(); t.num_vertices()];
    for v in t.preorder() {
        if let Some((p, _)) = t.parent(v) {
            h[v] = h[p] + w.lengths()[v];
        }
    }
    h
}

/// Lengths recovered from heights.
fn lengths_from<E: Clone>(w: &WElement<E>, h: &[Length]) -> Vec<Length> {
    let t = w.tree();
    (0..t.num_vertices())
        .map(|v| t.parent(v).map_or(Length::zero(), |(p, _)| h[v] - h[p]))
        .collect()
}

pub fn max_height<E: Clone>(w: &WElement<E>) -> Length {
    heights(w).into_iter().max().unwrap_or_else(Length::zero)
}

/// The height clamp without normalisation.
pub fn clamp_heights<O: Operad>(
    wc: &WCons<O>,
    t: Time,
    w: &WElement<O::Elem>,
) -> Result<WElement<O::Elem>, HomotopyError> {
    let h = wc.to_heights(w)?;
    let clamped: Vec<Length> = h.heights.iter().map(|&x| t.cap(x)).collect();
    Ok(relength(w, lengths_from(w, &clamped)))
}

fn relength<E: Clone>(w: &WElement<E>, lengths: Vec<Length>) -> WElement<E> {
    crate::wcons::WElement::from_parts(w.tree().clone(), w.labels().to_vec(), lengths, w.variant())
}

/// `ρ_t`: clamp heights at `t`, then normalise. Needs `W'` or `τW'`.
pub fn rho<O: Operad>(wc: &WCons<O>, t: Time, w: &WElement<O::Elem>) -> Result<WElement<O::Elem>, HomotopyError> {
    Ok(wc.normalize(&clamp_heights(wc, t, w)?)?)
}

/// The classical homotopy: clamp each length at `t`, then normalise.
pub fn classical_rho<O: Operad>(
    wc: &WCons<O>,
    t: Time,
    w: &WElement<O::Elem>,
) -> Result<WElement<O::Elem>, HomotopyError> {
    let lengths = w.lengths().iter().map(|&l| t.cap(l)).collect();
    Ok(wc.normalize(&relength(w, lengths))?)
}

/// Which homotopy a compatibility check runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Clamp {
    Height,
    Classical,
}

impl Clamp {
    pub fn run<O: Operad>(
        &self,
        wc: &WCons<O>,
        t: Time,
        w: &WElement<O::Elem>,
    ) -> Result<WElement<O::Elem>, HomotopyError> {
        match self {
            Clamp::Height => rho(wc, t, w),
            Clamp::Classical => classical_rho(wc, t, w),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PairKind {
    /// An inner edge of length 0 versus its contraction.
    Contraction,
    /// A leafless subtree on a length-1 edge versus the point on that edge.
    Reduction,
}

/// Two raw representatives of one class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelationPair<E> {
    pub kind: PairKind,
    pub left: WElement<E>,
    pub right: WElement<E>,
}

/// Grafts the point, at random lengths, onto every leaf of `w`.
fn cap_leaves<O: Operad>(
    wc: &WCons<O>,
    w: &WElement<O::Elem>,
    rng: &mut dyn RngCore,
) -> Result<WElement<O::Elem>, HomotopyError> {
    let star = wc.star().cloned().ok_or_else(|| HomotopyError::Generator("a unitary operad".into()))?;
    let point = wc.eta(star);
    let mut cur = w.clone();
    for j in (1..=w.arity()).rev() {
        cur = wc.graft_raw(&cur, j, &point, crate::wcons::random_length(rng))?;
    }
    Ok(cur)
}

/// A random relation pair: contraction pairs in every variant, and reduction
/// pairs (half of the time) in the `τ` variants.
pub fn random_pair<O: Operad>(
    wc: &WCons<O>,
    rng: &mut dyn RngCore,
    max_vertices: usize,
) -> Result<RelationPair<O::Elem>, HomotopyError> {
    let kind = if wc.variant.is_tau() && rng.gen_bool(0.5) {
        PairKind::Reduction
    } else {
        PairKind::Contraction
    };
    let pair = match kind {
        PairKind::Contraction => loop {
            let x = wc.random_raw(rng, max_vertices.max(2), 3);
            let edges: Vec<VertexId> = x.tree().inner_edges().collect();
            if edges.is_empty() {
                continue;
            }
            let e = edges[rng.gen_range(0..edges.len())];
            let mut lengths = x.lengths().to_vec();
            lengths[e] = Length::zero();
            let left = relength(&x, lengths);
            let right = wc.apply(&left, Redex::Contract(e))?;
            break RelationPair { kind, left, right };
        },
        PairKind::Reduction => {
            let base = loop {
                let x = wc.random_raw(rng, max_vertices.saturating_sub(2).max(1), 3);
                if x.arity() > 0 {
                    break x;
                }
            };
            let sub = loop {
                let y = wc.random_raw(rng, 2, 2);
                let s = cap_leaves(wc, &y, rng)?;
                if s.num_vertices() >= 2 {
                    break s;
                }
            };
            let star = wc.star().cloned().expect("checked by cap_leaves");
            let j = rng.gen_range(1..=base.arity());
            let left = wc.graft_raw(&base, j, &sub, Length::one())?;
            let right = wc.graft_raw(&base, j, &wc.eta(star), Length::one())?;
            RelationPair { kind, left, right }
        }
    };
    if wc.normalize(&pair.left)? != wc.normalize(&pair.right)? {
        return Err(HomotopyError::NotEquivalent(format!("{kind:?} pair")));
    }
    Ok(pair)
}

/// A pair whose images under a homotopy differ.
#[derive(Clone, Debug, Serialize)]
pub struct CompatFailure {
    pub kind: PairKind,
    pub clamp: Clamp,
    pub t: String,
    pub left: DecoratedJson,
    pub right: DecoratedJson,
    pub left_image: DecoratedJson,
    pub right_image: DecoratedJson,
}

/// Applies the homotopy at `t` to both sides of a pair; `None` when the
/// images agree.
pub fn check_relation_compat<O: Operad>(
    wc: &WCons<O>,
    clamp: Clamp,
    t: Time,
    pair: &RelationPair<O::Elem>,
) -> Result<Option<CompatFailure>, HomotopyError> {
    if wc.normalize(&pair.left)? != wc.normalize(&pair.right)? {
        return Err(HomotopyError::NotEquivalent(format!("{:?} pair", pair.kind)));
    }
    let a = clamp.run(wc, t, &pair.left)?;
    let b = clamp.run(wc, t, &pair.right)?;
    if a == b {
        return Ok(None);
    }
    Ok(Some(CompatFailure {
        kind: pair.kind,
        clamp,
        t: t.to_string(),
        left: wc.to_json(&pair.left),
        right: wc.to_json(&pair.right),
        left_image: wc.to_json(&a),
        right_image: wc.to_json(&b),
    }))
}

/// Heights of an element together with the midpoints between consecutive
/// heights; the images of both homotopies are piecewise constant between
/// these values.
pub fn breakpoints<E: Clone>(w: &WElement<E>) -> Vec<Time> {
    let hs: BTreeSet<Length> = heights(w).into_iter().chain(w.lengths().iter().copied()).collect();
    let hs: Vec<Length> = hs.into_iter().collect();
    let mut out: BTreeSet<Time> = hs.iter().map(|&h| Time::Finite(h)).collect();
    for pair in hs.windows(2) {
        out.insert(Time::Finite((pair[0] + pair[1]) / Length::from_integer(2)));
    }
    out.into_iter().collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct HomotopyReport {
    pub variant: String,
    pub times: Vec<String>,
    pub pairs: usize,
    pub reduction_pairs: usize,
    pub checks: usize,
    /// Failures of `ρ_t`; a passing report has none.
    pub failures: Vec<CompatFailure>,
    /// Failures of the classical clamp on the same pairs (first few kept).
    pub classical_failure_count: usize,
    pub classical_witnesses: Vec<CompatFailure>,
    /// `ρ_0 = η ∘ ε` on every sampled element.
    pub endpoint_zero: bool,
    /// `ρ_t` is the identity on normal forms for `t ≥` max height.
    pub endpoint_identity: bool,
    /// `ρ_s ∘ ρ_t = ρ_{min(s,t)}` on every sampled element.
    pub semigroup: bool,
}

impl HomotopyReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.endpoint_zero && self.endpoint_identity && self.semigroup
    }
}

const KEPT_WITNESSES: usize = 5;

/// Compatibility suite: `samples` random relation pairs, each checked at the
/// given times and at the breakpoints of both sides, for `ρ_t` and the
/// classical clamp; endpoint and semigroup laws on every sampled element.
pub fn homotopy_suite<O: Operad>(
    wc: &WCons<O>,
    samples: usize,
    times: &[Time],
    max_vertices: usize,
    rng: &mut dyn RngCore,
) -> Result<HomotopyReport, HomotopyError> {
    let mut rep = HomotopyReport {
        variant: wc.variant.to_string(),
        times: times.iter().map(Time::to_string).collect(),
        pairs: 0,
        reduction_pairs: 0,
        checks: 0,
        failures: Vec::new(),
        classical_failure_count: 0,
        classical_witnesses: Vec::new(),
        endpoint_zero: true,
        endpoint_identity: true,
        semigroup: true,
    };
    for _ in 0..samples {
        let pair = random_pair(wc, rng, max_vertices)?;
        rep.pairs += 1;
        if pair.kind == PairKind::Reduction {
            rep.reduction_pairs += 1;
        }
        let mut ts: BTreeSet<Time> = times.iter().copied().collect();
        ts.extend(breakpoints(&pair.left));
        ts.extend(breakpoints(&pair.right));
        for &t in &ts {
            rep.checks += 1;
            if let Some(f) = check_relation_compat(wc, Clamp::Height, t, &pair)? {
                rep.failures.push(f);
            }
            if let Some(f) = check_relation_compat(wc, Clamp::Classical, t, &pair)? {
                rep.classical_failure_count += 1;
                if rep.classical_witnesses.len() < KEPT_WITNESSES {
                    rep.classical_witnesses.push(f);
                }
            }
        }
        for w in [&pair.left, &pair.right] {
            let (zero, identity) = check_endpoints(wc, w)?;
            rep.endpoint_zero &= zero;
            rep.endpoint_identity &= identity;
            let s = *pick(&ts, rng);
            let t = *pick(&ts, rng);
            rep.semigroup &= check_semigroup(wc, s, t, w)?;
        }
    }
    Ok(rep)
}

fn pick<'a>(ts: &'a BTreeSet<Time>, rng: &mut dyn RngCore) -> &'a Time {
    ts.iter().nth(rng.gen_range(0..ts.len())).expect("nonempty")
}

/// `(ρ_0(w) = η(ε(w)), ρ_T(w) = normalize(w) for T = max height)`.
pub fn check_endpoints<O: Operad>(wc: &WCons<O>, w: &WElement<O::Elem>) -> Result<(bool, bool), HomotopyError> {
    let zero = rho(wc, Time::finite(0, 1), w)? == wc.normalize(&wc.eta(wc.epsilon(w)?))?;
    let n = wc.normalize(w)?;
    let top = rho(wc, Time::Finite(max_height(w)), w)? == n && rho(wc, Time::Finite(max_height(&n)), &n)? == n;
    Ok((zero, top))
}

/// `ρ_s(ρ_t(w)) = ρ_{min(s,t)}(w)`.
pub fn check_semigroup<O: Operad>(
    wc: &WCons<O>,
    s: Time,
    t: Time,
    w: &WElement<O::Elem>,
) -> Result<bool, HomotopyError> {
    Ok(rho(wc, s, &rho(wc, t, w)?)? == rho(wc, s.min(t), w)?)
}

/// A reduction pair on which the classical clamp breaks compatibility while
/// `ρ_t` does not.
#[derive(Clone, Debug)]
pub struct TauWitness<E> {
    pub pair: RelationPair<E>,
    pub t: Time,
    pub classical: (WElement<E>, WElement<E>),
    pub rho: (WElement<E>, WElement<E>),
}

/// All planar leafless tree shapes with exactly `n` vertices and vertex
/// arities at most 2.
fn leafless_shapes(n: usize) -> Vec<RTree> {
    fn build(n: usize) -> Vec<Vec<Vec<usize>>> {
        // Children lists in preorder numbering, root 0.
        if n == 0 {
            return Vec::new();
        }
        if n == 1 {
            return vec![vec![Vec::new()]];
        }
        let mut out = Vec::new();
        for a in build(n - 1) {
            out.push(graft_below(&a, None));
        }
        for left in 1..n - 1 {
            for a in build(left) {
                for b in build(n - 1 - left) {
                    out.push(graft_below(&a, Some(&b)));
                }
            }
        }
        out
    }
    fn graft_below(a: &[Vec<usize>], b: Option<&Vec<Vec<usize>>>) -> Vec<Vec<usize>> {
        let mut out = vec![vec![1]];
        out.extend(a.iter().map(|cs| cs.iter().map(|c| c + 1).collect()));
        if let Some(b) = b {
            let off = out.len();
            out[0].push(off);
            out.extend(b.iter().map(|cs| cs.iter().map(|c| c + off).collect()));
        }
        out
    }
    build(n)
        .into_iter()
        .map(|cs| {
            let children = cs.into_iter().map(|c| c.into_iter().map(Slot::Vertex).collect()).collect();
            RTree::new(children, 0).expect("well formed")
        })
        .collect()
}

/// Searches reduction pairs `base ∘_j S` vs `base ∘_j *` with a corolla base
/// of arity 1 or 2 and `S` leafless with at most `max_vertices - 1` vertices,
/// inner lengths in `{1/2, 1}`, over `t ∈ {1/4, 1/2, 3/4}`.
pub fn find_tau_counterexample<O: Operad>(
    wc: &WCons<O>,
    max_vertices: usize,
) -> Result<Option<TauWitness<O::Elem>>, HomotopyError> {
    let Some(star) = wc.star().cloned() else {
        return Err(HomotopyError::Generator("a unitary operad".into()));
    };
    let lengths = [Length::new(1, 2), Length::one()];
    let times = [Time::finite(1, 4), Time::finite(1, 2), Time::finite(3, 4)];
    for size in 2..max_vertices {
        for shape in leafless_shapes(size) {
            let per_vertex: Vec<Vec<O::Elem>> =
                (0..size).map(|v| wc.op.elements(shape.vertex_arity(v)).into_iter().take(2).collect()).collect();
            if per_vertex.iter().any(Vec::is_empty) {
                continue;
            }
            let inner: Vec<VertexId> = shape.inner_edges().collect();
            let label_choices: usize = per_vertex.iter().map(Vec::len).product();
            for lc in 0..label_choices {
                let mut rest = lc;
                let labels: Vec<O::Elem> = per_vertex
                    .iter()
                    .map(|ch| {
                        let x = ch[rest % ch.len()].clone();
                        rest /= ch.len();
                        x
                    })
                    .collect();
                for mask in 0..(1usize << inner.len()) {
                    let mut ls = vec![Length::zero(); size];
                    for (b, &e) in inner.iter().enumerate() {
                        ls[e] = lengths[(mask >> b) & 1];
                    }
                    let Ok(sub) = wc.element(shape.clone(), labels.clone(), ls) else { continue };
                    for base_arity in 1..=2 {
                        for p in wc.op.elements(base_arity).into_iter().take(2) {
                            let base = wc.eta(p);
                            for j in 1..=base_arity {
                                let left = wc.graft_raw(&base, j, &sub, Length::one())?;
                                let right = wc.graft_raw(&base, j, &wc.eta(star.clone()), Length::one())?;
                                let pair = RelationPair { kind: PairKind::Reduction, left, right };
                                for &t in &times {
                                    if check_relation_compat(wc, Clamp::Classical, t, &pair)?.is_some()
                                        && check_relation_compat(wc, Clamp::Height, t, &pair)?.is_none()
                                    {
                                        let classical = (
                                            classical_rho(wc, t, &pair.left)?,
                                            classical_rho(wc, t, &pair.right)?,
                                        );
                                        let rho_images = (rho(wc, t, &pair.left)?, rho(wc, t, &pair.right)?);
                                        return Ok(Some(TauWitness { pair, t, classical, rho: rho_images }));
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(None)
}

/// One stage of a retraction trace.
#[derive(Clone, Debug)]
pub struct TraceStep<E> {
    /// 0 for the input, then 1 or 2.
    pub phase: u8,
    pub t: Time,
    /// Root of the subtree being retracted in phase 1 (input vertex ids).
    pub target: Option<VertexId>,
    pub element: WElement<E>,
    pub report: TruncationReport,
}

#[derive(Clone, Debug)]
pub struct RetractionTrace<E> {
    /// Vertex sets of the maximal leafless subtrees retracted in phase 1.
    pub targets: Vec<Vec<VertexId>>,
    pub steps: Vec<TraceStep<E>>,
}

impl<E> RetractionTrace<E> {
    pub fn all_valid(&self) -> bool {
        self.steps.iter().all(|s| s.report.passed)
    }
}

/// Descending times covering the given heights, their midpoints, and 0.
fn descending_schedule(hs: impl IntoIterator<Item = Length>) -> Vec<Length> {
    let mut set: BTreeSet<Length> = hs.into_iter().collect();
    set.insert(Length::zero());
    let v: Vec<Length> = set.iter().copied().collect();
    for pair in v.windows(2) {
        set.insert((pair[0] + pair[1]) / Length::from_integer(2));
    }
    set.into_iter().rev().collect()
}

/// Retracts a truncated element onto `η(ε(w))` in two phases.
///
/// Phase 1 clamps, one at a time, each maximal leafless subtree relative to
/// the vertex it hangs from, until it is absorbed there; afterwards every
/// vertex has positive arity. Phase 2 clamps the heights of the whole tree.
/// Every stage is normalised and checked against the bound.
pub fn two_step_truncated_retraction<O: Operad>(
    wc: &WCons<O>,
    w: &WElement<O::Elem>,
) -> Result<RetractionTrace<O::Elem>, HomotopyError> {
    let k = wc.variant.k.ok_or_else(|| HomotopyError::Generator("a truncated variant".into()))?;
    let start = wc.normalize(w)?;
    let tree = start.tree().clone();
    let h = heights(&start);
    let roots = tree.maximal_leafless_subtrees();
    let targets: Vec<Vec<VertexId>> = roots.iter().map(|&v| tree.preorder_from(v)).collect();

    let mut steps = vec![TraceStep {
        phase: 0,
        t: Time::Infinity,
        target: None,
        report: validate_truncated(&start, k),
        element: start.clone(),
    }];
    let push = |steps: &mut Vec<TraceStep<O::Elem>>, phase, t, target, raw: &WElement<O::Elem>| {
        let element = wc.rewrite(raw)?;
        if steps.last().is_some_and(|s| s.element == element) {
            return Ok::<(), HomotopyError>(());
        }
        let report = validate_truncated(&element, k);
        steps.push(TraceStep { phase, t, target, element, report });
        Ok(())
    };

    let mut cur_h = h.clone();
    for (&v, members) in roots.iter().zip(&targets) {
        let base = tree.parent(v).expect("non-root").0;
        let rel: Vec<Length> = members.iter().map(|&x| h[x] - h[base]).collect();
        for t in descending_schedule(rel.iter().copied()) {
            for (&x, &r) in members.iter().zip(&rel) {
                cur_h[x] = h[base] + r.min(t);
            }
            let raw = relength(&start, lengths_from(&start, &cur_h));
            push(&mut steps, 1, Time::Finite(t), Some(v), &raw)?;
        }
    }

    let after = relength(&start, lengths_from(&start, &cur_h));
    for t in descending_schedule(cur_h.iter().copied()) {
        let clamped: Vec<Length> = cur_h.iter().map(|&x| x.min(t)).collect();
        let raw = relength(&after, lengths_from(&after, &clamped));
        push(&mut steps, 2, Time::Finite(t), None, &raw)?;
    }
    Ok(RetractionTrace { targets, steps })
}

#[derive(Clone, Debug, Serialize)]
pub struct TruncatedReport {
    pub variant: String,
    pub samples: usize,
    pub longest_trace: usize,
    pub invalid_intermediates: usize,
    pub wrong_endpoints: usize,
    pub failures: Vec<String>,
}

impl TruncatedReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Runs the two-phase retraction on random valid elements of a truncated
/// variant, checking every stage against the bound and the final stage
/// against `η(ε(w))`.
pub fn truncated_suite<O: Operad>(
    wc: &WCons<O>,
    samples: usize,
    max_vertices: usize,
    rng: &mut dyn RngCore,
) -> Result<TruncatedReport, HomotopyError> {
    let mut rep = TruncatedReport {
        variant: wc.variant.to_string(),
        samples: 0,
        longest_trace: 0,
        invalid_intermediates: 0,
        wrong_endpoints: 0,
        failures: Vec::new(),
    };
    for _ in 0..samples {
        let w = wc.random_raw(rng, max_vertices, 3);
        let trace = two_step_truncated_retraction(wc, &w)?;
        rep.samples += 1;
        rep.longest_trace = rep.longest_trace.max(trace.steps.len());
        for s in trace.steps.iter().filter(|s| !s.report.passed) {
            rep.invalid_intermediates += 1;
            rep.failures.push(format!(
                "{} at phase {} t={}: {}",
                wc.to_text(&w),
                s.phase,
                s.t,
                s.report.summary()
            ));
        }
        let last = &trace.steps.last().expect("nonempty trace").element;
        if *last != wc.normalize(&wc.eta(wc.epsilon(&w)?))? {
            rep.wrong_endpoints += 1;
            rep.failures.push(format!("{} retracts to {}", wc.to_text(&w), wc.to_text(last)));
        }
    }
    Ok(rep)
}

/// Stages of clamping the whole tree at once, for comparison with the
/// two-phase retraction.
pub fn one_step_trace<O: Operad>(
    wc: &WCons<O>,
    w: &WElement<O::Elem>,
) -> Result<Vec<(Time, WElement<O::Elem>, bool)>, HomotopyError> {
    let k = wc.variant.k.ok_or_else(|| HomotopyError::Generator("a truncated variant".into()))?;
    let start = wc.normalize(w)?;
    let h = heights(&start);
    let mut out = Vec::new();
    for t in descending_schedule(h.iter().copied()) {
        let clamped: Vec<Length> = h.iter().map(|&x| x.min(t)).collect();
        let element = wc.rewrite(&relength(&start, lengths_from(&start, &clamped)))?;
        let ok = validate_truncated(&element, k).passed;
        out.push((Time::Finite(t), element, ok));
    }
    Ok(out)
}

/// The six-vertex 3-tree used to illustrate heights: root `x0` with inputs
/// `leaf 1, x1, leaf 2, x4, x5`; `x4` carries `x2, x3`; `x5` carries leaf 3;
/// `x1, x2, x3` have arity 0. Vertex `xi` has id `i` and outgoing length
/// `lengths[i - 1]`. Labels are the first element of each arity.
pub fn example_tree<O: Operad>(wc: &WCons<O>, lengths: [Length; 5]) -> Result<WElement<O::Elem>, HomotopyError> {
    let tree = RTree::new(
        vec![
            vec![Slot::Leaf(1), Slot::Vertex(1), Slot::Leaf(2), Slot::Vertex(4), Slot::Vertex(5)],
            vec![],
            vec![],
            vec![],
            vec![Slot::Vertex(2), Slot::Vertex(3)],
            vec![Slot::Leaf(3)],
        ],
        0,
    )
    .map_err(WError::from)?;
    let mut labels = Vec::new();
    for v in 0..6 {
        let r = tree.vertex_arity(v);
        let p = if r == 1 {
            // A non-unit unary label when there is one.
            let unit = wc.op.unit();
            let es = wc.op.elements(1);
            es.iter().find(|p| **p != unit).cloned().unwrap_or(unit)
        } else {
            wc.op.elements(r).into_iter().next().ok_or_else(|| {
                HomotopyError::Generator(format!("an element of arity {r}"))
            })?
        };
        labels.push(p);
    }
    let mut ls = vec![Length::zero()];
    ls.extend(lengths);
    Ok(wc.element(tree, labels, ls)?)
}

/// Heights of an element, exposed for reports.
pub fn element_heights<O: Operad>(wc: &WCons<O>, w: &WElement<O::Elem>) -> Result<Vec<Length>, HomotopyError> {
    Ok(wc.to_heights(w)?.heights)
}

/// Whether the variant admits the height homotopy.
pub fn admits_heights(v: Variant) -> bool {
    matches!(v.kind, Kind::WPrime | Kind::TauWPrime)
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::bemonoid::{Monomial, ObM};

    fn l(n: i64, d: i64) -> Length {
        Length::new(n, d)
    }

    fn lab(kind: Kind, k: Option<usize>) -> WCons<ObM> {
        let op = k.map_or_else(ObM::new, ObM::truncated);
        WCons::new(op, Variant::new(kind, k)).unwrap()
    }

    #[test]
    fn time_parsing() {
        assert_eq!("inf".parse::<Time>().unwrap(), Time::Infinity);
        assert_eq!("3/4".parse::<Time>().unwrap(), Time::finite(3, 4));
        assert!("-1/2".parse::<Time>().is_err());
        assert!(Time::finite(100, 1) < Time::Infinity);
    }

    #[test]
    fn example_tree_heights_and_clamp() {
        let wc = lab(Kind::WPrime, None);
        let w = example_tree(&wc, [l(1, 3), l(1, 4), l(1, 2), l(1, 2), l(2, 3)]).unwrap();
        let h = element_heights(&wc, &w).unwrap();
        assert_eq!(h, vec![l(0, 1), l(1, 3), l(3, 4), l(1, 1), l(1, 2), l(2, 3)]);
        let c = clamp_heights(&wc, Time::finite(3, 4), &w).unwrap();
        assert_eq!(c.lengths()[3], l(1, 4));
        assert_eq!(c.lengths()[2], l(1, 4));
        let roots = w.tree().maximal_leafless_subtrees();
        let sets: Vec<Vec<usize>> = roots.iter().map(|&v| w.tree().preorder_from(v)).collect();
        assert_eq!(sets, vec![vec![1], vec![4, 2, 3]]);
    }

    #[test]
    fn reduction_pair_clamps_to_a_point() {
        let wc = lab(Kind::TauWPrime, None);
        let e = Monomial::e();
        // Base x1 x2 at slot 1 with a unary vertex at length 1/2; the
        // reducible subtree hangs at height 1/2.
        let base = wc.graft_raw(&wc.eta("x1 x2".parse().unwrap()), 1, &wc.eta("x1".parse().unwrap()), l(1, 2)).unwrap();
        let sub = wc.graft_raw(&wc.eta("x1 x2".parse().unwrap()), 2, &wc.eta(e.clone()), l(1, 2)).unwrap();
        let sub = wc.graft_raw(&sub, 1, &wc.eta(e.clone()), l(1, 1)).unwrap();
        let left = wc.graft_raw(&base, 1, &sub, Length::one()).unwrap();
        let right = wc.graft_raw(&base, 1, &wc.eta(e.clone()), Length::one()).unwrap();
        let pair = RelationPair { kind: PairKind::Reduction, left, right };
        let t = Time::finite(5, 4);
        assert!(check_relation_compat(&wc, Clamp::Height, t, &pair).unwrap().is_none());
        let img = rho(&wc, t, &pair.left).unwrap();
        let pt = img.labels().iter().position(|p| *p == e).unwrap();
        assert_eq!(img.lengths()[pt], l(3, 4));
    }

    #[test]
    fn random_pairs_are_equivalent_and_compatible() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for kind in [Kind::WPrime, Kind::TauWPrime] {
            let wc = lab(kind, None);
            let rep = homotopy_suite(&wc, 40, &Time::standard_samples(), 5, &mut rng).unwrap();
            assert!(rep.passed(), "{:?}", rep.failures.first());
            if kind == Kind::WPrime {
                assert_eq!(rep.classical_failure_count, 0);
            }
        }
    }

    #[test]
    fn counterexample_needs_three_vertices() {
        let wc = lab(Kind::TauWPrime, None);
        assert!(find_tau_counterexample(&wc, 2).unwrap().is_none());
        let wit = find_tau_counterexample(&wc, 4).unwrap().expect("witness");
        assert_ne!(wit.classical.0, wit.classical.1);
        assert_eq!(wit.rho.0, wit.rho.1);
        assert!(wit.pair.left.num_vertices() <= 4);
    }

    #[test]
    fn leafless_shape_counts() {
        // Planar trees with vertex arity at most 2 and no leaves: Motzkin numbers.
        let counts: Vec<usize> = (1..=5).map(|n| leafless_shapes(n).len()).collect();
        assert_eq!(counts, vec![1, 1, 2, 4, 9]);
    }

    #[test]
    fn truncated_suite_passes() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for k in [2, 3] {
            for kind in Kind::ALL {
                let rep = truncated_suite(&lab(kind, Some(k)), 30, 7, &mut rng).unwrap();
                assert!(rep.passed(), "{:?}", rep.failures);
            }
        }
    }

    #[test]
    fn two_step_retraction_stays_within_the_bound() {
        let wc = lab(Kind::TauWPrime, Some(2));
        // Root x1 x2; slot 1 carries e at length 1, slot 2 carries x1 x2 at length 1.
        let tree = RTree::new(
            vec![vec![Slot::Vertex(1), Slot::Vertex(2)], vec![], vec![Slot::Leaf(1), Slot::Leaf(2)]],
            0,
        )
        .unwrap();
        let x12: Monomial = "x1 x2".parse().unwrap();
        let w = wc.element(tree, vec![x12.clone(), Monomial::e(), x12], vec![l(0, 1), l(1, 1), l(1, 1)]).unwrap();
        let one = one_step_trace(&wc, &w).unwrap();
        assert!(one.iter().any(|(_, _, ok)| !ok));
        let trace = two_step_truncated_retraction(&wc, &w).unwrap();
        assert!(trace.all_valid());
        let last = &trace.steps.last().unwrap().element;
        assert_eq!(*last, wc.normalize(&wc.eta(wc.epsilon(&w).unwrap())).unwrap());
        let corolla = wc.eta(Monomial::product(2));
        assert_eq!(two_step_truncated_retraction(&wc, &corolla).unwrap().steps.len(), 1);
    }
}
