//! Remainder-term catalog for a truncated ansatz built on an admissible set.
//!
//! For 1 ≤ m < m₀ the remainder at level m is a sum over the boundary
//! abstracts ∂Ω_m, each entering with prefactor t_N·N^{−3/2}·N^{−(n−3)/2}
//! (n the abstract length), i.e. t_N·N^{−n/2}. At level m = 0 the remainder
//! sums over Ω₁-elements of length ≥ 3 prefixed by a creation, with
//! prefactor t_N·N^{−2}·N^{−(n−3)/2} — again t_N·N^{−L/2} in terms of the
//! listed (prefixed) length L = n+1 — plus, when m₀ ≥ 2, one fixed
//! double-self-interaction term of order t_N·N^{−2} (two contraction
//! diagrams). At m = m₀ the remainder vanishes identically.

use crate::combinatorics::abstracts::{boundary, validate_abstract, Abstract, AdmissibleSet};
use crate::combinatorics::histories::count_histories;

/// One catalog line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CatalogEntry {
    /// Cumulant level m of the remainder this term contributes to.
    pub m: usize,
    /// The contributing abstract; `None` for the fixed double-self-interaction
    /// term at m = 0.
    pub abstr: Option<Abstract>,
    /// Abstract length n (0 for the fixed term).
    pub length: usize,
    /// Number of histories (= drawn diagrams) of the abstract.
    pub history_count: u128,
    /// Exponent of N in the prefactor, times 2: the term carries t_N·N^{e/2}.
    pub n_power_times_2: i64,
}

/// Catalog of all remainder terms for levels 0 ≤ m ≤ m₀.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RemainderCatalog {
    pub m0: usize,
    pub entries: Vec<CatalogEntry>,
}

impl RemainderCatalog {
    pub fn entries_at_level(&self, m: usize) -> Vec<&CatalogEntry> {
        self.entries.iter().filter(|e| e.m == m).collect()
    }

    /// Total history (diagram) count at a level.
    pub fn diagram_count_at_level(&self, m: usize) -> u128 {
        self.entries_at_level(m).iter().map(|e| e.history_count).sum()
    }
}

/// Builds the remainder catalog of an admissible set.
///
/// Returns `None` when `omega` is not admissible (the boundary is undefined).
/// An empty Ω yields a catalog containing at most the fixed m = 0 term.
pub fn remainder_catalog(omega: &AdmissibleSet, m0: usize) -> Option<RemainderCatalog> {
    let bdry = boundary(omega, m0)?;
    let mut entries = Vec::new();

    // Level 0: creation-prefixed Ω₁ elements of length ≥ 3 …
    if m0 >= 1 {
        for signs in &omega.by_degree[1] {
            if signs.len() < 3 {
                continue;
            }
            let mut ext = Vec::with_capacity(signs.len() + 1);
            ext.push(1);
            ext.extend_from_slice(signs);
            if !validate_abstract(&ext, 0, m0) {
                continue;
            }
            let a = Abstract {
                signs: ext,
                m: 0,
                m0,
            };
            let len = a.len();
            entries.push(CatalogEntry {
                m: 0,
                history_count: count_histories(&a),
                n_power_times_2: -(len as i64),
                length: len,
                abstr: Some(a),
            });
        }
        // … plus the fixed double-self-interaction term when m₀ ≥ 2.
        // An empty Ω carries no ansatz and hence no remainder at all.
        if m0 >= 2 && omega.total_len() > 0 {
            entries.push(CatalogEntry {
                m: 0,
                abstr: None,
                length: 0,
                history_count: 2,
                n_power_times_2: -4,
            });
        }
    }

    // Levels 1 ≤ m < m₀: the boundary abstracts ∂Ω_m.
    for m in 1..m0 {
        for signs in &bdry.by_degree[m] {
            let a = Abstract {
                signs: signs.clone(),
                m,
                m0,
            };
            let len = a.len();
            entries.push(CatalogEntry {
                m,
                history_count: count_histories(&a),
                n_power_times_2: -(len as i64),
                length: len,
                abstr: Some(a),
            });
        }
    }

    // Level m₀ contributes nothing: no entries emitted.
    Some(RemainderCatalog { m0, entries })
}
