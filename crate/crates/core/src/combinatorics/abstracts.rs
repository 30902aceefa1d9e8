//! Abstracts: ±1 collision-sign sequences with bounded partial sums.
//!
//! An abstract of degree `m` is a sequence (s_1,…,s_n) ∈ {±1}^n with
//! m + Σ s_i = 0 and 0 < m + Σ_{i≤j} s_i ≤ m₀ for every proper prefix j < n.
//! Admissible sets are closed under head-removal (s_2,…,s_n) and under
//! prepending −1 while the degree stays ≤ m₀.

use std::collections::BTreeSet;

/// A collision-sign sequence together with its degree and the complexity cap
/// it was validated against.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Abstract {
    /// Signs s_1..s_n, each ±1.
    pub signs: Vec<i8>,
    /// Degree m: number of background particles initially alive.
    pub m: usize,
    /// Complexity cap m₀ on the number of simultaneously alive background particles.
    pub m0: usize,
}

impl Abstract {
    /// Builds an abstract, returning `None` when the invariants fail.
    pub fn new(signs: Vec<i8>, m: usize, m0: usize) -> Option<Self> {
        if validate_abstract(&signs, m, m0) {
            Some(Abstract { signs, m, m0 })
        } else {
            None
        }
    }

    /// Sequence length n.
    pub fn len(&self) -> usize {
        self.signs.len()
    }

    /// True for the empty sequence (degree 0 only).
    pub fn is_empty(&self) -> bool {
        self.signs.is_empty()
    }

    /// Number of momentum variables S = (n+m)/2 = number of annihilations.
    pub fn num_momenta(&self) -> usize {
        (self.len() + self.m) / 2
    }
}

/// Checks the abstract invariants: total sum, proper-prefix window, parity.
pub fn validate_abstract(signs: &[i8], m: usize, m0: usize) -> bool {
    // The empty sequence is not an abstract.
    if signs.is_empty() || m > m0 {
        return false;
    }
    if signs.iter().any(|&s| s != 1 && s != -1) {
        return false;
    }
    let n = signs.len();
    let mut acc = m as i64;
    for (j, &s) in signs.iter().enumerate() {
        acc += s as i64;
        if j + 1 < n && !(acc > 0 && acc <= m0 as i64) {
            return false;
        }
    }
    acc == 0
}

/// Enumerates every valid abstract of degree `m` with length ≤ `max_len`,
/// in lexicographic order over sign sequences (−1 before +1).
pub fn enumerate_abstracts(m: usize, m0: usize, max_len: usize) -> Vec<Abstract> {
    let mut out = Vec::new();
    if m > m0 {
        return out;
    }
    let mut signs: Vec<i8> = Vec::new();
    // Depth-first over prefixes keeping the running count alive ∈ (0, m₀];
    // −1 is explored before +1 so the output is lexicographic.
    fn rec(signs: &mut Vec<i8>, alive: i64, m: usize, m0: usize, max_len: usize, out: &mut Vec<Abstract>) {
        if signs.len() >= max_len {
            return;
        }
        for s in [-1i8, 1] {
            let next = alive + s as i64;
            if s == -1 && next == 0 {
                // Complete abstract.
                signs.push(s);
                out.push(Abstract {
                    signs: signs.clone(),
                    m,
                    m0,
                });
                rec_continue_impossible(signs); // no continuation past a zero prefix
                signs.pop();
                continue;
            }
            if next > 0 && next <= m0 as i64 {
                signs.push(s);
                rec(signs, next, m, m0, max_len, out);
                signs.pop();
            }
        }
    }
    // A prefix that hits zero can only be a complete abstract, never extended:
    // the proper-prefix invariant forbids continuing. Kept as a named no-op for clarity.
    fn rec_continue_impossible(_signs: &mut [i8]) {}

    rec(&mut signs, m as i64, m, m0, max_len, &mut out);
    out.sort();
    out
}

/// An admissible set of abstracts, stored per degree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdmissibleSet {
    /// `by_degree[m]` holds the sign sequences of degree m.
    pub by_degree: Vec<BTreeSet<Vec<i8>>>,
    pub m0: usize,
}

impl AdmissibleSet {
    pub fn empty(m0: usize) -> Self {
        AdmissibleSet {
            by_degree: vec![BTreeSet::new(); m0 + 1],
            m0,
        }
    }

    pub fn contains(&self, signs: &[i8], m: usize) -> bool {
        m <= self.m0 && self.by_degree[m].contains(signs)
    }

    pub fn total_len(&self) -> usize {
        self.by_degree.iter().map(|s| s.len()).sum()
    }

    /// All members as `Abstract`s, ordered by (degree, signs).
    pub fn members(&self) -> Vec<Abstract> {
        let mut v = Vec::new();
        for (m, set) in self.by_degree.iter().enumerate() {
            for signs in set {
                v.push(Abstract {
                    signs: signs.clone(),
                    m,
                    m0: self.m0,
                });
            }
        }
        v
    }

    /// True iff the set is a fixed point of the two closure rules.
    pub fn is_admissible(&self) -> bool {
        for (m, set) in self.by_degree.iter().enumerate() {
            for signs in set {
                if !validate_abstract(signs, m, self.m0) {
                    return false;
                }
                if signs.len() >= 2 {
                    // Head removal: (s_2..s_n) has degree m + s_1.
                    let m_tail = (m as i64 + signs[0] as i64) as usize;
                    if !self.contains(&signs[1..], m_tail) {
                        return false;
                    }
                }
                // Prepending −1 raises the degree by 1; the rule only applies
                // when the result is itself an abstract (this needs m ≥ 1:
                // from degree 0 the prepended prefix count would hit zero).
                if m + 1 <= self.m0 {
                    let mut ext = Vec::with_capacity(signs.len() + 1);
                    ext.push(-1);
                    ext.extend_from_slice(signs);
                    if validate_abstract(&ext, m + 1, self.m0) && !self.contains(&ext, m + 1) {
                        return false;
                    }
                }
            }
        }
        true
    }
}

/// Smallest admissible set containing every abstract of length ≤ K.
///
/// Closure under head-removal and (−1)-prepending, saturated to a fixed point.
/// Every element has length ≤ K + m₀.
pub fn admissible_closure(m0: usize, k: usize) -> AdmissibleSet {
    let mut set = AdmissibleSet::empty(m0);
    let mut work: Vec<(Vec<i8>, usize)> = Vec::new();
    for m in 0..=m0 {
        for a in enumerate_abstracts(m, m0, k) {
            if set.by_degree[m].insert(a.signs.clone()) {
                work.push((a.signs, m));
            }
        }
    }
    while let Some((signs, m)) = work.pop() {
        if signs.len() >= 2 {
            let m_tail = (m as i64 + signs[0] as i64) as usize;
            let tail = signs[1..].to_vec();
            if !set.contains(&tail, m_tail) {
                set.by_degree[m_tail].insert(tail.clone());
                work.push((tail, m_tail));
            }
        }
        if m + 1 <= m0 {
            let mut ext = Vec::with_capacity(signs.len() + 1);
            ext.push(-1);
            ext.extend_from_slice(&signs);
            if validate_abstract(&ext, m + 1, m0) && !set.contains(&ext, m + 1) {
                set.by_degree[m + 1].insert(ext.clone());
                work.push((ext, m + 1));
            }
        }
    }
    set
}

/// Boundary ∂Ω_m = {(1,s_1..s_n) ∉ Ω_m : (s_1..s_n) ∈ Ω_{m+1}} for 0 ≤ m < m₀.
///
/// Returns `None` when `omega` is not admissible.
pub fn boundary(omega: &AdmissibleSet, m0: usize) -> Option<AdmissibleBoundary> {
    if omega.m0 != m0 || !omega.is_admissible() {
        return None;
    }
    let mut by_degree = vec![BTreeSet::new(); m0];
    for m in 0..m0 {
        for signs in &omega.by_degree[m + 1] {
            let mut ext = Vec::with_capacity(signs.len() + 1);
            ext.push(1);
            ext.extend_from_slice(signs);
            // The extension must be a valid abstract of degree m and must not
            // already belong to Ω_m.
            if validate_abstract(&ext, m, m0) && !omega.contains(&ext, m) {
                by_degree[m].insert(ext);
            }
        }
    }
    Some(AdmissibleBoundary { by_degree, m0 })
}

/// Boundary of an admissible set, per degree 0 ≤ m < m₀.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdmissibleBoundary {
    pub by_degree: Vec<BTreeSet<Vec<i8>>>,
    pub m0: usize,
}

impl AdmissibleBoundary {
    pub fn members(&self) -> Vec<Abstract> {
        let mut v = Vec::new();
        for (m, set) in self.by_degree.iter().enumerate() {
            for signs in set {
                v.push(Abstract {
                    signs: signs.clone(),
                    m,
                    m0: self.m0,
                });
            }
        }
        v
    }
}
