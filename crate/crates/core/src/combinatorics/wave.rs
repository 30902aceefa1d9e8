//! Wave-vector bookkeeping for histories.
//!
//! After the i-th collision, particle j carries the wave vector
//! q_j^i = Σ_ℓ coeff[i][j][ℓ]·k_ℓ with coefficients in {−1, 0, +1}.
//! The m input momenta are k_1..k_m; each creation introduces one fresh
//! momentum, relabelled contiguously as k_{m+1}, k_{m+2}, … in creation order
//! (fresh momentum m+c is created together with particle label m+c, since
//! particle labels are likewise consecutive).

use crate::combinatorics::histories::History;

/// Signed coefficient tensor c with q_j^i = Σ_ℓ c[i][j][ℓ] k_ℓ.
///
/// The sign sequence σ and the 0/1 incidence indicator are stored fused as
/// one signed coefficient.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WaveVectorTable {
    /// Number of momentum variables S = (n+m)/2.
    pub s: usize,
    /// coeffs[i][j][ℓ] for 0 ≤ i ≤ n, 0 ≤ j ≤ S, 0 ≤ ℓ < S (momentum k_{ℓ+1}).
    pub coeffs: Vec<Vec<Vec<i8>>>,
}

/// Builds the wave-vector table of a history by the iterative construction:
/// creation subtracts the fresh momentum from a_i and assigns it to b_i;
/// annihilation adds row b_i into row a_i and zeroes row b_i.
pub fn wave_vector_table(h: &History) -> WaveVectorTable {
    let m = h.abstr.m;
    let n = h.abstr.len();
    let s = h.num_momenta();
    let mut coeffs = vec![vec![vec![0i8; s]; s + 1]; n + 1];
    // Step 0: tagged particle carries −Σ_{j≤m} k_j, particle j carries k_j.
    for l in 0..m {
        coeffs[0][0][l] = -1;
        coeffs[0][l + 1][l] = 1;
    }
    let mut fresh = m; // next fresh momentum index (1-based: k_{fresh+1})
    for i in 1..=n {
        coeffs[i] = coeffs[i - 1].clone();
        let c = h.collisions[i - 1];
        if c.sign == 1 {
            // Fresh momentum k_{fresh+1}; by construction b = fresh+1 as well.
            coeffs[i][c.a][fresh] -= 1;
            coeffs[i][c.b][fresh] += 1;
            fresh += 1;
        } else {
            for l in 0..s {
                coeffs[i][c.a][l] += coeffs[i][c.b][l];
                coeffs[i][c.b][l] = 0;
            }
        }
    }
    WaveVectorTable { s, coeffs }
}

impl WaveVectorTable {
    /// Exact momentum conservation: Σ_j coeffs[i][j][ℓ] = 0 for every (i, ℓ).
    pub fn conserves_momentum(&self) -> bool {
        self.coeffs.iter().all(|step| {
            (0..self.s).all(|l| step.iter().map(|row| row[l] as i64).sum::<i64>() == 0)
        })
    }

    /// Column structure: every (i, ℓ) column has 0 or 2 nonzero entries, and
    /// when 2 they are opposite and lie in {−1, +1}.
    pub fn has_zero_or_two_columns(&self) -> bool {
        self.coeffs.iter().all(|step| {
            (0..self.s).all(|l| {
                let nz: Vec<i8> = step.iter().map(|row| row[l]).filter(|&x| x != 0).collect();
                match nz.as_slice() {
                    [] => true,
                    [x, y] => (*x == 1 && *y == -1) || (*x == -1 && *y == 1),
                    _ => false,
                }
            })
        })
    }
}

/// ϖ_i for 1 ≤ i < n: 1 iff a created particle is alive after step i, or some
/// input-particle slot 1 ≤ j ≤ m carries a fresh momentum (ℓ > m); else 0.
pub fn varpi_sequence(h: &History) -> Vec<u8> {
    let table = wave_vector_table(h);
    varpi_from_table(h, &table)
}

/// ϖ evaluated from a precomputed table (shared by the audit paths).
pub fn varpi_from_table(h: &History, table: &WaveVectorTable) -> Vec<u8> {
    let m = h.abstr.m;
    let n = h.abstr.len();
    let s = table.s;
    let mut out = Vec::with_capacity(n.saturating_sub(1));
    for i in 1..n {
        let created_alive = h.alive_sets[i].iter().any(|&j| j > m);
        let modified_input = (1..=m)
            .any(|j| (m..s).any(|l| table.coeffs[i][j][l] != 0));
        out.push(u8::from(created_alive || modified_input));
    }
    out
}

/// Independent ϖ evaluator used as a cross-check oracle.
///
/// Instead of the incremental coefficient tensor it recomputes every q_j^i
/// from scratch as an integer vector in Z^S at each step, then reads off the
/// two conditions. Any bookkeeping bug in one path is unlikely to be mirrored
/// in the other.
pub fn varpi_sequence_oracle(h: &History) -> Vec<u8> {
    let m = h.abstr.m;
    let n = h.abstr.len();
    let s = h.num_momenta();
    let mut out = Vec::with_capacity(n.saturating_sub(1));
    for i in 1..n {
        // Recompute rows after step i by replaying collisions 1..=i.
        let mut rows = vec![vec![0i64; s]; s + 1];
        for l in 0..m {
            rows[0][l] = -1;
            rows[l + 1][l] = 1;
        }
        let mut fresh = m;
        for (step, c) in h.collisions[..i].iter().enumerate() {
            let _ = step;
            if c.sign == 1 {
                rows[c.a][fresh] -= 1;
                rows[c.b][fresh] += 1;
                fresh += 1;
            } else {
                let brow = rows[c.b].clone();
                for (x, y) in rows[c.a].iter_mut().zip(brow) {
                    *x += y;
                }
                rows[c.b] = vec![0; s];
            }
        }
        let created_alive = h.alive_sets[i].iter().any(|&j| j > m);
        let modified_input = (1..=m).any(|j| (m..s).any(|l| rows[j][l] != 0));
        out.push(u8::from(created_alive || modified_input));
    }
    out
}
