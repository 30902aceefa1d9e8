use std::collections::BTreeSet;

use kinlab_core::combinatorics::*;

fn abs(signs: &[i8], m: usize, m0: usize) -> Abstract {
    Abstract::new(signs.to_vec(), m, m0).expect("valid abstract")
}

// ---------------------------------------------------------------------------
// Abstracts
// ---------------------------------------------------------------------------

#[test]
fn validate_abstract_basics() {
    assert!(!validate_abstract(&[], 0, 1), "empty sequence is not an abstract");
    assert!(validate_abstract(&[1, -1], 0, 1));
    assert!(validate_abstract(&[-1], 1, 1));
    assert!(validate_abstract(&[-1, -1], 2, 2));
    assert!(!validate_abstract(&[-1, -1], 2, 1), "degree above cap");
    assert!(!validate_abstract(&[1, -1], 1, 2), "nonzero total");
    assert!(!validate_abstract(&[-1, 1], 1, 2), "prefix hits zero early");
    assert!(!validate_abstract(&[1, 1, -1, -1], 0, 1), "prefix exceeds cap");
    assert!(validate_abstract(&[1, 1, -1, -1], 0, 2));
}

#[test]
fn enumerate_abstracts_small_cases() {
    // Degree 0, cap 1, length ≤ 2: exactly (1,−1).
    let got = enumerate_abstracts(0, 1, 2);
    assert_eq!(got.len(), 1);
    assert_eq!(got[0].signs, vec![1, -1]);

    // Degree 1, cap 1, length ≤ 3: only (−1) — the candidate (1,−1,−1)
    // would push the intermediate particle count to 2 > m₀.
    let got = enumerate_abstracts(1, 1, 3);
    let signs: Vec<Vec<i8>> = got.iter().map(|a| a.signs.clone()).collect();
    assert_eq!(signs, vec![vec![-1]]);

    // Raising the cap to 2 admits (1,−1,−1).
    let got = enumerate_abstracts(1, 2, 3);
    let signs: Vec<Vec<i8>> = got.iter().map(|a| a.signs.clone()).collect();
    assert_eq!(signs, vec![vec![-1], vec![1, -1, -1]]);

    // Degree above the cap: nothing.
    assert!(enumerate_abstracts(3, 2, 6).is_empty());
}

#[test]
fn enumerate_abstracts_parity_and_validity() {
    for m0 in 1..=3 {
        for m in 0..=m0 {
            for a in enumerate_abstracts(m, m0, 9) {
                assert!(validate_abstract(&a.signs, m, m0));
                assert_eq!(a.len() % 2, m % 2, "length ≡ degree (mod 2)");
            }
        }
    }
}

#[test]
fn enumerate_abstracts_matches_filtered_bruteforce() {
    // Cross-check against filtering all ±1 sequences.
    let (m, m0, max_len) = (1, 2, 7);
    let fast: BTreeSet<Vec<i8>> = enumerate_abstracts(m, m0, max_len)
        .into_iter()
        .map(|a| a.signs)
        .collect();
    let mut brute = BTreeSet::new();
    for n in 1..=max_len {
        for mask in 0u32..(1 << n) {
            let signs: Vec<i8> = (0..n).map(|i| if mask >> i & 1 == 1 { 1 } else { -1 }).collect();
            if validate_abstract(&signs, m, m0) {
                brute.insert(signs);
            }
        }
    }
    assert_eq!(fast, brute);
}

// ---------------------------------------------------------------------------
// Admissible sets and boundary
// ---------------------------------------------------------------------------

#[test]
fn closure_contains_paper_example() {
    let omega = admissible_closure(2, 2);
    assert!(omega.contains(&[-1], 1));
    assert!(omega.contains(&[-1, -1], 2));
    assert!(omega.is_admissible());
}

#[test]
fn closure_of_empty_seed_is_empty() {
    let omega = admissible_closure(2, 0);
    assert_eq!(omega.total_len(), 0);
    assert!(omega.is_admissible());
}

#[test]
fn closure_m0_1_k3_structure() {
    let omega = admissible_closure(1, 3);
    assert!(omega.is_admissible());
    // With m₀ = 1 the particle count can never exceed one, which collapses
    // the closure to two elements.
    assert_eq!(
        omega.by_degree[0].iter().cloned().collect::<Vec<_>>(),
        vec![vec![1, -1]]
    );
    assert_eq!(
        omega.by_degree[1].iter().cloned().collect::<Vec<_>>(),
        vec![vec![-1]]
    );
    // Contains every abstract of length ≤ 3.
    for m in 0..=1 {
        for a in enumerate_abstracts(m, 1, 3) {
            assert!(omega.contains(&a.signs, m));
        }
    }
}

#[test]
fn closure_is_fixed_point_for_various_sizes() {
    for m0 in 1..=3 {
        for k in 1..=(3 * m0 + 2) {
            let omega = admissible_closure(m0, k);
            assert!(omega.is_admissible(), "m0={m0} k={k}");
            let max_len = omega.members().iter().map(|a| a.len()).max().unwrap_or(0);
            assert!(max_len <= k + m0, "m0={m0} k={k}: max member length {max_len}");
        }
    }
}

#[test]
fn boundary_of_tutorial_set() {
    // Ω = {(−1) at degree 1, (−1,−1) at degree 2} with m₀ = 2.
    let mut omega = AdmissibleSet::empty(2);
    omega.by_degree[1].insert(vec![-1]);
    omega.by_degree[2].insert(vec![-1, -1]);
    assert!(omega.is_admissible());

    let bdry = boundary(&omega, 2).expect("admissible");
    assert_eq!(
        bdry.by_degree[0].iter().cloned().collect::<Vec<_>>(),
        vec![vec![1, -1]]
    );
    assert_eq!(
        bdry.by_degree[1].iter().cloned().collect::<Vec<_>>(),
        vec![vec![1, -1, -1]]
    );
}

#[test]
fn boundary_rejects_non_admissible() {
    // {(−1,−1)} alone misses its tail (−1) at degree 1.
    let mut omega = AdmissibleSet::empty(2);
    omega.by_degree[2].insert(vec![-1, -1]);
    assert!(!omega.is_admissible());
    assert!(boundary(&omega, 2).is_none());
}

#[test]
fn boundary_lengths_of_default_closure() {
    for m0 in 1..=2usize {
        let k = default_closure_length(m0);
        let omega = admissible_closure(m0, k);
        let bdry = boundary(&omega, m0).expect("closure is admissible");
        for a in bdry.members() {
            assert!(
                a.len() >= k + 1 && a.len() <= k + m0 + 1,
                "boundary length {} outside [{}, {}]",
                a.len(),
                k + 1,
                k + m0 + 1
            );
        }
    }
}

// ---------------------------------------------------------------------------
// Histories
// ---------------------------------------------------------------------------

#[test]
fn history_counts_match_enumeration() {
    for m0 in 1..=3 {
        for m in 0..=m0 {
            for a in enumerate_abstracts(m, m0, 8) {
                let hists = enumerate_histories(&a).expect("under cap");
                assert_eq!(hists.len() as u128, count_histories(&a), "{:?}", a);
                for h in &hists {
                    assert!(h.is_valid(), "{:?}", h);
                }
                // All histories distinct.
                let set: BTreeSet<_> = hists.iter().map(|h| h.collisions.clone()).collect();
                assert_eq!(set.len(), hists.len());
            }
        }
    }
}

#[test]
fn history_examples() {
    // (−1) at degree 1: the single history (a,b) = (0,1).
    let a = abs(&[-1], 1, 1);
    let hists = enumerate_histories(&a).unwrap();
    assert_eq!(hists.len(), 1);
    assert_eq!(hists[0].collisions, vec![Collision { sign: -1, a: 0, b: 1 }]);

    // (1,−1) at degree 0: creation must pair with particle 1, and the
    // repeated-pair exclusion kills the only annihilation — no history.
    let a = abs(&[1, -1], 0, 1);
    assert_eq!(enumerate_histories(&a).unwrap().len(), 0);
    assert_eq!(count_histories(&a), 0);

    // (1,−1,−1) at degree 1: six histories.
    let a = abs(&[1, -1, -1], 1, 2);
    assert_eq!(count_histories(&a), 6);
}

#[test]
fn history_cap_is_enforced() {
    let a = abs(&[1, -1, -1], 1, 2);
    let err = enumerate_histories_capped(&a, 5).unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("resource limit"), "{msg}");
}

// ---------------------------------------------------------------------------
// Wave vectors and ϖ
// ---------------------------------------------------------------------------

#[test]
fn wave_table_invariants_exhaustive_small() {
    for m0 in 1..=3 {
        for m in 0..=m0 {
            for a in enumerate_abstracts(m, m0, 8) {
                for h in enumerate_histories(&a).unwrap() {
                    let t = wave_vector_table(&h);
                    assert!(t.conserves_momentum(), "{:?}", h.collisions);
                    assert!(t.has_zero_or_two_columns(), "{:?}", h.collisions);
                    // Dead particles carry zero wave vectors.
                    for i in 0..=a.len() {
                        for j in 0..=t.s {
                            if !h.alive_sets[i].contains(&j) {
                                assert!(t.coeffs[i][j].iter().all(|&c| c == 0));
                            }
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn varpi_matches_independent_oracle() {
    for m0 in 1..=3 {
        for m in 0..=m0 {
            for a in enumerate_abstracts(m, m0, 8) {
                for h in enumerate_histories(&a).unwrap() {
                    assert_eq!(varpi_sequence(&h), varpi_sequence_oracle(&h), "{:?}", h.collisions);
                }
            }
        }
    }
}

#[test]
fn varpi_tent_example() {
    // (1,−1,−1) at degree 1: ϖ₁ = ϖ₂ = 1 for every history.
    let a = abs(&[1, -1, -1], 1, 2);
    for h in enumerate_histories(&a).unwrap() {
        assert_eq!(varpi_sequence(&h), vec![1, 1], "{:?}", h.collisions);
    }
}

// ---------------------------------------------------------------------------
// Tents
// ---------------------------------------------------------------------------

#[test]
fn is_tent_basics() {
    assert!(is_tent(&[1, -1, -1]));
    assert!(!is_tent(&[1, -1]));
    assert!(!is_tent(&[-1]));
    assert!(is_tent(&[1, 1, -1, -1]), "excursion");
    assert!(is_tent(&[1, -1, 1, -1, -1]), "chain onto base");
    assert!(is_tent(&[1, -1, 1, 1, -1, -1]), "chain onto excursion");
    assert!(!is_tent(&[1, -1, 1, -1]), "chain onto bare (1,−1)");
    assert!(is_tent(&[1, 1, -1, 1, -1, -1]), "excursion with inner structure");
}

#[test]
fn tent_decomposition_blocks_are_tents() {
    for m0 in 1..=3 {
        for m in 0..=m0 {
            for a in enumerate_abstracts(m, m0, 10) {
                if a.signs == vec![1, -1] && m == 0 {
                    continue; // the one history-free, undecomposable abstract
                }
                let d = tent_decomposition(&a).expect("decomposable");
                // Blocks and down steps tile the index range exactly once.
                let mut covered = vec![0usize; a.len()];
                for t in &d.tents {
                    assert!(is_tent(&a.signs[t.start..=t.end]), "{:?} {:?}", a.signs, t);
                    let sum: i64 = a.signs[t.start..=t.end].iter().map(|&s| s as i64).sum();
                    assert_eq!(sum, -(t.tent_type as i64));
                    for i in t.start..=t.end {
                        covered[i] += 1;
                    }
                }
                for &i in &d.down_steps {
                    assert_eq!(a.signs[i], -1);
                    covered[i] += 1;
                }
                assert!(covered.iter().all(|&c| c == 1), "{:?}", a.signs);
            }
        }
    }
}

#[test]
fn tent_decomposition_extent_is_maximal_tent_prefix() {
    // Each parsed block is the unique tent starting at its position: no
    // shorter and no longer prefix of the remaining sequence is a tent.
    for m0 in 1..=2 {
        for m in 0..=m0 {
            for a in enumerate_abstracts(m, m0, 10) {
                if a.signs == vec![1, -1] && m == 0 {
                    continue;
                }
                let d = tent_decomposition(&a).unwrap();
                for t in &d.tents {
                    for end in t.start..a.len() {
                        let block = &a.signs[t.start..=end];
                        assert_eq!(
                            is_tent(block),
                            end == t.end,
                            "{:?}: block [{}, {}]",
                            a.signs,
                            t.start,
                            end
                        );
                    }
                }
            }
        }
    }
}

#[test]
fn tent_interior_indices_example() {
    // (1,1,-1,-1,-1): the excursion (1,1,−1,−1) is a type-0 tent, followed
    // by one down step. 1-based interior indices are {1,2,3}.
    let a = abs(&[1, 1, -1, -1, -1], 1, 3);
    let d = tent_decomposition(&a).unwrap();
    assert_eq!(d.tents.len(), 1);
    assert_eq!((d.tents[0].start, d.tents[0].end, d.tents[0].tent_type), (0, 3, 0));
    assert_eq!(d.down_steps, vec![4]);
    assert_eq!(d.interior_indices(a.len()), vec![1, 2, 3]);
}

#[test]
fn tent_decomposition_only_failure_is_bare_pair() {
    // The bare (1,−1) at degree 0 is the unique abstract (any m₀ ≤ 4,
    // length ≤ 10) without a tent decomposition; it has no history either.
    for m0 in 1..=4usize {
        for m in 0..=m0 {
            for a in enumerate_abstracts(m, m0, 10) {
                let d = tent_decomposition(&a);
                if a.signs == vec![1, -1] && m == 0 {
                    assert!(d.is_err());
                    assert_eq!(count_histories(&a), 0);
                } else {
                    assert!(d.is_ok(), "{:?} m={}", a.signs, m);
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Audit
// ---------------------------------------------------------------------------

#[test]
fn audit_engines_agree_small() {
    for (m0, n_max) in [(1, 9), (2, 8), (3, 7)] {
        let ex = bad_index_audit(m0, n_max, AuditEngine::Exhaustive { cap: 10_000_000 }).unwrap();
        let st = bad_index_audit(m0, n_max, AuditEngine::StateSpace).unwrap();
        assert_eq!(ex.rows.len(), st.rows.len());
        for (re, rs) in ex.rows.iter().zip(&st.rows) {
            assert_eq!(re.abstr, rs.abstr);
            assert_eq!(re.history_count, rs.history_count);
            assert_eq!(re.max_bad, rs.max_bad, "{:?}", re.abstr);
        }
        assert!(ex.passed(), "violations: {:?}", ex.violations);
        assert!(st.passed(), "violations: {:?}", st.violations);
    }
}

#[test]
fn audit_m0_2_n8_zero_violations() {
    let report = bad_index_audit(2, 8, AuditEngine::StateSpace).unwrap();
    assert!(report.passed(), "{:?}", report.violations);
    assert!(report.histories_total > 0);
}

#[test]
fn audit_single_tent_abstract() {
    // (1,−1,−1) at degree 1: bad count 0 ≤ (3 + 3)/4.
    let report = bad_index_audit(2, 3, AuditEngine::Exhaustive { cap: 1000 }).unwrap();
    let row = report
        .rows
        .iter()
        .find(|r| r.abstr.signs == vec![1, -1, -1])
        .expect("abstract present");
    assert_eq!(row.max_bad, Some(0));
    assert_eq!(row.bound_times_4, 6);
}

#[test]
fn audit_empty_set_passes() {
    // n_max = 0: no abstracts at all.
    let report = bad_index_audit(2, 0, AuditEngine::StateSpace).unwrap();
    assert!(report.rows.is_empty());
    assert!(report.passed());
}

#[test]
fn audit_respects_cap() {
    let err = bad_index_audit(2, 8, AuditEngine::Exhaustive { cap: 10 }).unwrap_err();
    assert!(err.to_string().contains("resource limit"));
}

// ---------------------------------------------------------------------------
// Remainder catalog
// ---------------------------------------------------------------------------

#[test]
fn catalog_tutorial_set_has_six_diagrams() {
    let mut omega = AdmissibleSet::empty(2);
    omega.by_degree[1].insert(vec![-1]);
    omega.by_degree[2].insert(vec![-1, -1]);
    let cat = remainder_catalog(&omega, 2).expect("admissible");

    // Level 1: exactly the boundary abstract (1,−1,−1) with six histories,
    // entering at order t_N·N^{−3/2}.
    let level1 = cat.entries_at_level(1);
    assert_eq!(level1.len(), 1);
    let e = level1[0];
    assert_eq!(e.abstr.as_ref().unwrap().signs, vec![1, -1, -1]);
    assert_eq!(e.history_count, 6);
    assert_eq!(e.n_power_times_2, -3);
    assert_eq!(cat.diagram_count_at_level(1), 6);

    // Level 2 = m₀: empty.
    assert!(cat.entries_at_level(2).is_empty());

    // Level 0: only the fixed double-self-interaction term (Ω₁ has no
    // element of length ≥ 3), of order t_N·N^{−2} with two diagrams.
    let level0 = cat.entries_at_level(0);
    assert_eq!(level0.len(), 1);
    assert!(level0[0].abstr.is_none());
    assert_eq!(level0[0].history_count, 2);
    assert_eq!(level0[0].n_power_times_2, -4);
}

#[test]
fn catalog_empty_set_is_empty() {
    let omega = AdmissibleSet::empty(2);
    let cat = remainder_catalog(&omega, 2).expect("empty set is admissible");
    assert!(cat.entries.is_empty());
}

#[test]
fn catalog_exponent_bookkeeping() {
    // Every abstract-backed entry carries t_N·N^{−L/2} with L its length.
    for m0 in 1..=3usize {
        let omega = admissible_closure(m0, 4);
        let cat = remainder_catalog(&omega, m0).expect("admissible");
        for e in &cat.entries {
            if let Some(a) = &e.abstr {
                assert_eq!(e.length, a.len());
                assert_eq!(e.n_power_times_2, -(a.len() as i64));
                assert!(e.m < m0 || m0 == 0);
            }
        }
    }
}

#[test]
#[ignore = "slow single-run check; exercised by the acceptance suite"]
fn audit_full_criterion_sizes() {
    let report = bad_index_audit(4, 12, AuditEngine::StateSpace).unwrap();
    assert!(report.passed(), "{:?}", report.violations);
}
