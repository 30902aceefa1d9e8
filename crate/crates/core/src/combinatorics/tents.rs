//! Tent decomposition of abstracts.
//!
//! A contiguous block is a tent when it is (1,−1,−1), or a sign-sum-0 block
//! with strictly positive proper prefix sums (an excursion, length ≥ 4 since
//! the bare (1,−1) is excluded), or (1,−1) prepended to a tent. Every
//! abstract starting with +1 decomposes uniquely into tents separated by
//! down steps; type-0 tents have sum 0, type-1 tents have sum −1.

use crate::combinatorics::abstracts::Abstract;
use crate::error::CoreError;

/// One tent block: inclusive index range (0-based) and type.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Tent {
    pub start: usize,
    pub end: usize,
    /// 0 when the sign-sum over the block is 0, 1 when it is −1.
    pub tent_type: u8,
}

/// Decomposition of an abstract into tents and down steps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TentDecomposition {
    pub tents: Vec<Tent>,
    /// Positions (0-based) outside every tent; each carries sign −1.
    pub down_steps: Vec<usize>,
}

impl TentDecomposition {
    /// Indices i (1-based collision indices) lying strictly inside a tent:
    /// start+1 ≤ i < end+1 in 1-based terms, i.e. α ≤ i < β of the block
    /// (α, β) written 1-based.
    pub fn interior_indices(&self, n: usize) -> Vec<usize> {
        let mut v = Vec::new();
        for t in &self.tents {
            // 1-based block is [t.start+1, t.end+1]; interior is α ≤ i < β.
            for i in (t.start + 1)..=(t.end) {
                if i < n {
                    v.push(i);
                }
            }
        }
        v
    }
}

/// Direct recursive tent test, following the definition verbatim.
pub fn is_tent(block: &[i8]) -> bool {
    let n = block.len();
    if n == 3 && block == [1, -1, -1] {
        return true;
    }
    if n >= 2 && block != [1, -1] {
        let sum: i64 = block.iter().map(|&s| s as i64).sum();
        if sum == 0 {
            let mut acc = 0i64;
            let mut ok = true;
            for &s in &block[..n - 1] {
                acc += s as i64;
                if acc <= 0 {
                    ok = false;
                    break;
                }
            }
            if ok {
                return true;
            }
        }
    }
    n >= 2 && block[0] == 1 && block[1] == -1 && is_tent(&block[2..])
}

/// Unique decomposition into tents separated by down steps.
///
/// Leading and interior down steps are allowed; a +1 position must open a
/// tent whose extent is forced: strip (1,−1) pairs until reaching either the
/// base (1,−1,−1) or an excursion opening (1,1,…) closed at its first return
/// to zero.
pub fn tent_decomposition(a: &Abstract) -> Result<TentDecomposition, CoreError> {
    let signs = &a.signs;
    let n = signs.len();
    let mut tents = Vec::new();
    let mut down_steps = Vec::new();
    let mut i = 0;
    while i < n {
        if signs[i] == -1 {
            down_steps.push(i);
            i += 1;
            continue;
        }
        let start = i;
        let mut p = i;
        let end = loop {
            // Base case (1,−1,−1).
            if p + 2 < n && signs[p] == 1 && signs[p + 1] == -1 && signs[p + 2] == -1 {
                break p + 2;
            }
            // Excursion opening: find the first return of the partial sum to 0.
            if p + 1 < n && signs[p] == 1 && signs[p + 1] == 1 {
                let mut acc = 0i64;
                let mut q = p;
                let ret = loop {
                    if q >= n {
                        return Err(CoreError::TentDecomposition {
                            position: start,
                            reason: "unclosed excursion".into(),
                        });
                    }
                    acc += signs[q] as i64;
                    if acc == 0 {
                        break q;
                    }
                    q += 1;
                };
                break ret;
            }
            // Chain step (1,−1) followed by more material.
            if p + 2 < n && signs[p] == 1 && signs[p + 1] == -1 {
                p += 2;
                continue;
            }
            return Err(CoreError::TentDecomposition {
                position: start,
                reason: "no tent extends from this +1".into(),
            });
        };
        let sum: i64 = signs[start..=end].iter().map(|&s| s as i64).sum();
        debug_assert!(sum == 0 || sum == -1);
        tents.push(Tent {
            start,
            end,
            tent_type: if sum == 0 { 0 } else { 1 },
        });
        i = end + 1;
    }
    Ok(TentDecomposition { tents, down_steps })
}
