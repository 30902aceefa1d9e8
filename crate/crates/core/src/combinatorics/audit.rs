//! Exhaustive audit of the bad-index counting bound and tent-interior
//! goodness over all histories of all abstracts with s₁ = +1.
//!
//! Two engines are provided.
//!
//! * `Exhaustive` enumerates every history explicitly (with a resource cap)
//!   and evaluates ϖ per history. Simple, but the history count grows into
//!   the billions at n = 12.
//! * `StateSpace` explores the same set of histories through a memoized
//!   depth-first search over canonical quotient states. The key observation
//!   is that ϖ after step i, as well as every future labelling choice,
//!   depends on the history prefix only through a small typed multigraph:
//!   vertices are the alive particles (tagged / input / created), edges are
//!   the live momentum columns (input momentum ℓ ≤ m or fresh ℓ > m), plus
//!   the identity of the last creation pair (for the repeated-pair
//!   exclusion). Creations append a fresh edge to a new vertex; an
//!   annihilation of b into a cancels all (a,b) edges (the two column
//!   entries are opposite) and reattaches b's other edges to a. Dynamic
//!   programming over canonical states yields the exact maximum bad-index
//!   count and detects any reachable tent-interior ϖ = 0, while visiting
//!   each equivalence class once instead of each history.
//!
//! The two engines are cross-checked against each other on smaller sizes in
//! the test suite.

use std::collections::HashMap;

use crate::combinatorics::abstracts::{enumerate_abstracts, Abstract};
use crate::combinatorics::histories::{count_histories, enumerate_histories_capped};
use crate::combinatorics::tents::tent_decomposition;
use crate::combinatorics::wave::varpi_sequence;
use crate::error::CoreError;

/// Audit engine selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AuditEngine {
    /// Explicit history enumeration, failing beyond the given history cap.
    Exhaustive { cap: usize },
    /// Memoized canonical-state search (exact, no cap needed).
    StateSpace,
}

/// One audit violation (expected never to occur).
#[derive(Debug, Clone)]
pub struct AuditViolation {
    pub abstr: Abstract,
    pub kind: AuditViolationKind,
    pub detail: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AuditViolationKind {
    /// #{i : ϖ_i = 0} exceeded n/4 + 3m/4 for some history.
    CountingBound,
    /// ϖ_i = 0 strictly inside a tent for some history.
    TentInterior,
}

/// Per-abstract audit record.
#[derive(Debug, Clone)]
pub struct AbstractAuditRow {
    pub abstr: Abstract,
    pub history_count: u128,
    /// Maximum of #{i : ϖ_i = 0} over all histories (None when no history).
    pub max_bad: Option<u32>,
    /// The bound n/4 + 3m/4 (as an exact rational, times 4).
    pub bound_times_4: u32,
}

/// Full audit report.
#[derive(Debug, Clone)]
pub struct AuditReport {
    pub m0: usize,
    pub n_max: usize,
    pub rows: Vec<AbstractAuditRow>,
    pub violations: Vec<AuditViolation>,
    pub histories_total: u128,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Audits every abstract with s₁ = +1, any degree 0 ≤ m ≤ m₀, length ≤ n_max.
pub fn bad_index_audit(
    m0: usize,
    n_max: usize,
    engine: AuditEngine,
) -> Result<AuditReport, CoreError> {
    let mut rows = Vec::new();
    let mut violations = Vec::new();
    let mut histories_total: u128 = 0;
    for m in 0..=m0 {
        for a in enumerate_abstracts(m, m0, n_max) {
            if a.signs[0] != 1 {
                continue;
            }
            let bound_times_4 = (a.len() + 3 * m) as u32;
            let hist_count = count_histories(&a);
            histories_total += hist_count;
            if hist_count == 0 {
                // Vacuous: no history to audit. This also covers the one
                // abstract, (1,−1) at degree 0, that admits no tent
                // decomposition.
                rows.push(AbstractAuditRow {
                    abstr: a,
                    history_count: 0,
                    max_bad: None,
                    bound_times_4,
                });
                continue;
            }
            let max_bad = match engine {
                AuditEngine::Exhaustive { cap } => {
                    audit_abstract_exhaustive(&a, cap, &mut violations)?
                }
                AuditEngine::StateSpace => audit_abstract_states(&a, &mut violations)?,
            };
            if let Some(bad) = max_bad {
                if 4 * bad > bound_times_4 {
                    violations.push(AuditViolation {
                        abstr: a.clone(),
                        kind: AuditViolationKind::CountingBound,
                        detail: format!("max bad {} > ({} + 3*{})/4", bad, a.len(), m),
                    });
                }
            }
            rows.push(AbstractAuditRow {
                abstr: a,
                history_count: hist_count,
                max_bad,
                bound_times_4,
            });
        }
    }
    Ok(AuditReport {
        m0,
        n_max,
        rows,
        violations,
        histories_total,
    })
}

/// Explicit-enumeration audit of one abstract. Returns the max bad count.
fn audit_abstract_exhaustive(
    a: &Abstract,
    cap: usize,
    violations: &mut Vec<AuditViolation>,
) -> Result<Option<u32>, CoreError> {
    let interior = tent_decomposition(a)?.interior_indices(a.len());
    let mut max_bad: Option<u32> = None;
    for h in enumerate_histories_capped(a, cap)? {
        let varpi = varpi_sequence(&h);
        let bad = varpi.iter().filter(|&&x| x == 0).count() as u32;
        max_bad = Some(max_bad.map_or(bad, |b| b.max(bad)));
        for &i in &interior {
            // interior index i is 1-based; varpi[i-1] = ϖ_i.
            if varpi[i - 1] == 0 {
                violations.push(AuditViolation {
                    abstr: a.clone(),
                    kind: AuditViolationKind::TentInterior,
                    detail: format!("ϖ_{} = 0 inside a tent for history {:?}", i, h.collisions),
                });
            }
        }
    }
    Ok(max_bad)
}

// ---------------------------------------------------------------------------
// Canonical-state engine
// ---------------------------------------------------------------------------

const TAGGED: u8 = 0;
const INPUT: u8 = 1;
const CREATED: u8 = 2;

/// Quotient state: typed multigraph on alive particles.
#[derive(Debug, Clone, PartialEq, Eq)]
struct State {
    /// Vertex types; index 0 is always the tagged particle.
    types: Vec<u8>,
    /// Edge multiplicities per unordered pair (u < v): (input momenta, fresh momenta).
    edges: HashMap<(usize, usize), (u8, u8)>,
    /// Pair of the immediately preceding creation, when the next step is an
    /// annihilation subject to the repeated-pair exclusion.
    last_pair: Option<(usize, usize)>,
}

impl State {
    fn initial(m: usize) -> Self {
        let mut types = vec![TAGGED];
        types.extend(std::iter::repeat(INPUT).take(m));
        let mut edges = HashMap::new();
        for j in 1..=m {
            edges.insert((0, j), (1u8, 0u8));
        }
        State {
            types,
            edges,
            last_pair: None,
        }
    }

    fn edge(&self, u: usize, v: usize) -> (u8, u8) {
        let key = if u < v { (u, v) } else { (v, u) };
        self.edges.get(&key).copied().unwrap_or((0, 0))
    }

    fn add_edge(&mut self, u: usize, v: usize, kind: usize, delta: i8) {
        let key = if u < v { (u, v) } else { (v, u) };
        let e = self.edges.entry(key).or_insert((0, 0));
        let slot = if kind == 0 { &mut e.0 } else { &mut e.1 };
        *slot = (*slot as i8 + delta) as u8;
        if *e == (0, 0) {
            self.edges.remove(&key);
        }
    }

    /// ϖ of this state: a created particle is alive, or an input particle
    /// carries a fresh momentum.
    fn varpi(&self) -> u8 {
        if self.types.iter().any(|&t| t == CREATED) {
            return 1;
        }
        for (&(u, v), &(_, fresh)) in &self.edges {
            if fresh > 0 && (self.types[u] == INPUT || self.types[v] == INPUT) {
                return 1;
            }
        }
        0
    }

    /// Creation: new CREATED vertex linked to `a` by one fresh edge.
    fn create(&self, a: usize) -> State {
        let mut s = self.clone();
        s.types.push(CREATED);
        let b = s.types.len() - 1;
        s.add_edge(a, b, 1, 1);
        s.last_pair = Some((a, b));
        s
    }

    /// Annihilation of `b` into `a`: (a,b) edges cancel, b's other edges
    /// reattach to a, b is removed (indices above b shift down by one).
    fn annihilate(&self, a: usize, b: usize) -> State {
        debug_assert!(b != 0 && b != a);
        let mut types = Vec::with_capacity(self.types.len() - 1);
        let remap = |j: usize| if j < b { j } else { j - 1 };
        for (j, &t) in self.types.iter().enumerate() {
            if j != b {
                types.push(t);
            }
        }
        let mut s = State {
            types,
            edges: HashMap::new(),
            last_pair: None,
        };
        for (&(u, v), &(inp, fresh)) in &self.edges {
            if (u == a && v == b) || (u == b && v == a) {
                continue; // opposite column entries cancel
            }
            let (nu, nv) = (
                remap(if u == b { a } else { u }),
                remap(if v == b { a } else { v }),
            );
            if inp > 0 {
                s.add_edge(nu, nv, 0, inp as i8);
            }
            if fresh > 0 {
                s.add_edge(nu, nv, 1, fresh as i8);
            }
        }
        s
    }

    /// Canonical key: minimum packed encoding over permutations of the
    /// non-tagged vertices. At most 5 vertices are alive, so brute force.
    fn canonical_key(&self, keep_last_pair: bool) -> u128 {
        let nv = self.types.len();
        let mut perm: Vec<usize> = (0..nv).collect();
        let mut best: Option<u128> = None;
        permute_tail(&mut perm, 1, &mut |p| {
            let code = self.encode(p, keep_last_pair);
            best = Some(match best {
                None => code,
                Some(b) => b.min(code),
            });
        });
        best.unwrap()
    }

    fn encode(&self, perm: &[usize], keep_last_pair: bool) -> u128 {
        // perm maps new position -> old index.
        let nv = self.types.len();
        let mut inv = vec![0usize; nv];
        for (newpos, &old) in perm.iter().enumerate() {
            inv[old] = newpos;
        }
        let mut code: u128 = nv as u128;
        for &old in perm {
            let mut byte = self.types[old] as u128;
            if keep_last_pair {
                if let Some((a, b)) = self.last_pair {
                    if old == a {
                        byte |= 4;
                    }
                    if old == b {
                        byte |= 8;
                    }
                }
            }
            code = (code << 4) | byte;
        }
        for u in 0..nv {
            for v in (u + 1)..nv {
                let (inp, fresh) = self.edge(perm[u], perm[v]);
                code = (code << 8) | ((inp as u128) << 4) | fresh as u128;
            }
        }
        code
    }
}

/// Calls `f` for every permutation of `v[from..]` (Heap's algorithm).
fn permute_tail(v: &mut Vec<usize>, from: usize, f: &mut impl FnMut(&[usize])) {
    if from + 1 >= v.len() {
        f(v);
        return;
    }
    for i in from..v.len() {
        v.swap(from, i);
        permute_tail(v, from + 1, f);
        v.swap(from, i);
    }
}

/// State-space audit of one abstract: exact max bad count via DP, plus
/// tent-interior violation detection on reachable, completable states.
fn audit_abstract_states(
    a: &Abstract,
    violations: &mut Vec<AuditViolation>,
) -> Result<Option<u32>, CoreError> {
    let n = a.len();
    let interior = tent_decomposition(a)?.interior_indices(n);
    let is_interior = {
        let mut v = vec![false; n + 1];
        for &i in &interior {
            v[i] = true;
        }
        v
    };

    // memo: (step, canonical key) -> max future bad count, or None = dead end.
    let mut memo: HashMap<(usize, u128), Option<i64>> = HashMap::new();

    struct Ctx<'x> {
        a: &'x Abstract,
        is_interior: &'x [bool],
        memo: HashMap<(usize, u128), Option<i64>>,
        tent_bad: Vec<(usize, String)>,
    }

    /// Max of #{j in (i, n) : ϖ_j = 0} over completions from `state` after
    /// step i, or None when no completion exists.
    fn go(ctx: &mut Ctx, i: usize, state: &State) -> Option<i64> {
        let n = ctx.a.len();
        if i == n {
            debug_assert_eq!(state.types.len(), 1);
            return Some(0);
        }
        let sign = ctx.a.signs[i];
        // The last creation pair only constrains an immediate annihilation.
        let key = (i, state.canonical_key(sign == -1 && state.last_pair.is_some()));
        if let Some(&v) = ctx.memo.get(&key) {
            return v;
        }
        let nv = state.types.len();
        let mut best: Option<i64> = None;
        let mut consider = |ctx: &mut Ctx, next: State| {
            let step = i + 1;
            if let Some(future) = go(ctx, step, &next) {
                let here_bad = if step < n && next.varpi() == 0 { 1 } else { 0 };
                if here_bad == 1 && ctx.is_interior[step] {
                    ctx.tent_bad
                        .push((step, format!("state after step {step} is tent-interior bad")));
                }
                let total = here_bad + future;
                best = Some(best.map_or(total, |b: i64| b.max(total)));
            }
        };
        if sign == 1 {
            for cand in 0..nv {
                let next = state.create(cand);
                consider(ctx, next);
            }
        } else {
            for ca in 0..nv {
                for cb in 1..nv {
                    if cb == ca {
                        continue;
                    }
                    if state.last_pair == Some((ca, cb)) {
                        continue;
                    }
                    let next = state.annihilate(ca, cb);
                    consider(ctx, next);
                }
            }
        }
        ctx.memo.insert(key, best);
        best
    }

    let mut ctx = Ctx {
        a,
        is_interior: &is_interior,
        memo: std::mem::take(&mut memo),
        tent_bad: Vec::new(),
    };
    let init = State::initial(a.m);
    let max_bad = go(&mut ctx, 0, &init);
    // Deduplicate tent violations per index: memoization may surface the
    // same (index, class) more than once across contexts.
    ctx.tent_bad.sort();
    ctx.tent_bad.dedup();
    for (i, detail) in ctx.tent_bad {
        violations.push(AuditViolation {
            abstr: a.clone(),
            kind: AuditViolationKind::TentInterior,
            detail: format!("ϖ_{i} = 0: {detail}"),
        });
    }
    Ok(max_bad.map(|b| b as u32))
}
