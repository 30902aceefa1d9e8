//! Simplex geometry: volumes via Gram determinants, normal directions and the
//! pyramid identity, common positive directions (Wendel), and the Monte Carlo
//! integrability-threshold scan for simplex-volume powers.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::CoreError;

/// Relative tolerance below which Gram determinants are declared degenerate.
pub const DEGENERACY_TOL: f64 = 1e-12;

// ---------------------------------------------------------------------------
// Small dense linear algebra
// ---------------------------------------------------------------------------

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Determinant of a small square matrix by LU with partial pivoting.
fn det(mut m: Vec<Vec<f64>>) -> f64 {
    let n = m.len();
    let mut sign = 1.0;
    let mut d = 1.0;
    for c in 0..n {
        let (p, _) = m
            .iter()
            .enumerate()
            .skip(c)
            .map(|(i, row)| (i, row[c].abs()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        if m[p][c] == 0.0 {
            return 0.0;
        }
        if p != c {
            m.swap(p, c);
            sign = -sign;
        }
        d *= m[c][c];
        for r in (c + 1)..n {
            let f = m[r][c] / m[c][c];
            for j in c..n {
                m[r][j] -= f * m[c][j];
            }
        }
    }
    sign * d
}

fn gram(vectors: &[Vec<f64>]) -> Vec<Vec<f64>> {
    vectors
        .iter()
        .map(|a| vectors.iter().map(|b| dot(a, b)).collect())
        .collect()
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

// ---------------------------------------------------------------------------
// Simplex volumes
// ---------------------------------------------------------------------------

/// n-dimensional Hausdorff measure of the simplex spanned by the vertices,
/// optionally adjoining the origin as an extra vertex.
///
/// With the origin: |conv(0, u₁..u_n)|ₙ = √det G(u₁..u_n) / n!.
/// Without: |conv(u₁..u_n)|_{n−1} = √det G(u₂−u₁,…) / (n−1)!.
/// Degenerate inputs yield 0.
pub fn simplex_volume(vertices: &[Vec<f64>], include_origin: bool) -> f64 {
    let vecs: Vec<Vec<f64>> = if include_origin {
        vertices.to_vec()
    } else {
        if vertices.len() < 2 {
            return if vertices.len() == 1 { 1.0 } else { 0.0 };
        }
        vertices[1..]
            .iter()
            .map(|u| u.iter().zip(&vertices[0]).map(|(a, b)| a - b).collect())
            .collect()
    };
    let n = vecs.len();
    if n == 0 {
        return 1.0; // 0-dimensional measure of a point
    }
    let g = det(gram(&vecs));
    if g <= 0.0 {
        return 0.0;
    }
    g.sqrt() / factorial(n)
}

/// Determinant-free oracle: recursive base × height.
///
/// Heights are computed by Gram–Schmidt projection, never through a
/// determinant, so agreement with `simplex_volume` is a genuine cross-check.
pub fn simplex_volume_oracle(vertices: &[Vec<f64>], include_origin: bool) -> f64 {
    let vecs: Vec<Vec<f64>> = if include_origin {
        vertices.to_vec()
    } else {
        if vertices.len() < 2 {
            return if vertices.len() == 1 { 1.0 } else { 0.0 };
        }
        vertices[1..]
            .iter()
            .map(|u| u.iter().zip(&vertices[0]).map(|(a, b)| a - b).collect())
            .collect()
    };
    // vol_n = vol_{n-1} × height_n / n, accumulated left to right with an
    // orthonormal basis of the span built incrementally.
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut vol = 1.0;
    for (i, v) in vecs.iter().enumerate() {
        let mut w = v.clone();
        for b in &basis {
            let c = dot(&w, b);
            for (x, y) in w.iter_mut().zip(b) {
                *x -= c * y;
            }
        }
        let h = norm(&w);
        if h == 0.0 {
            return 0.0;
        }
        vol *= h / (i as f64 + 1.0);
        for x in w.iter_mut() {
            *x /= h;
        }
        basis.push(w);
    }
    vol
}

// ---------------------------------------------------------------------------
// Normal direction and pyramid identity
// ---------------------------------------------------------------------------

/// Unit normal o to the affine hull of u₁..u_n, oriented so that all uᵢ·o
/// share the common positive value n·|conv(0,u..)|ₙ / |conv(u..)|_{n−1}.
pub fn normal_direction(vertices: &[Vec<f64>]) -> Result<Vec<f64>, CoreError> {
    let n = vertices.len();
    if n == 0 {
        return Err(CoreError::InvalidInput("empty vertex list".into()));
    }
    let d = vertices[0].len();
    if n > d {
        return Err(CoreError::InvalidInput(format!(
            "need d ≥ n, got n={n} vertices in dimension {d}"
        )));
    }
    // Orthonormal basis of span(u₂−u₁, …, u_n−u₁).
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let scale = vertices
        .iter()
        .map(|u| norm(u))
        .fold(0.0f64, f64::max)
        .max(1.0);
    for u in &vertices[1..] {
        let mut w: Vec<f64> = u.iter().zip(&vertices[0]).map(|(a, b)| a - b).collect();
        for b in &basis {
            let c = dot(&w, b);
            for (x, y) in w.iter_mut().zip(b) {
                *x -= c * y;
            }
        }
        let h = norm(&w);
        if h <= DEGENERACY_TOL * scale {
            return Err(CoreError::Degenerate(
                "vertices are affinely dependent".into(),
            ));
        }
        for x in w.iter_mut() {
            *x /= h;
        }
        basis.push(w);
    }
    // o ∝ u₁ − (projection of u₁ onto that span).
    let mut o = vertices[0].clone();
    for b in &basis {
        let c = dot(&vertices[0], b);
        for (x, y) in o.iter_mut().zip(b) {
            *x -= c * y;
        }
    }
    let h = norm(&o);
    if h <= DEGENERACY_TOL * scale {
        return Err(CoreError::Degenerate(
            "affine hull passes through the origin".into(),
        ));
    }
    for x in o.iter_mut() {
        *x /= h;
    }
    Ok(o)
}

/// Relative residual of the pyramid identity u₁·o = n·Vₙ/V_{n−1}.
pub fn pyramid_residual(vertices: &[Vec<f64>]) -> Result<f64, CoreError> {
    let n = vertices.len();
    let o = normal_direction(vertices)?;
    let lhs = dot(&vertices[0], &o);
    let vn = simplex_volume(vertices, true);
    let vn1 = simplex_volume(vertices, false);
    if vn1 == 0.0 {
        return Err(CoreError::Degenerate("zero base volume".into()));
    }
    let rhs = n as f64 * vn / vn1;
    Ok((lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(f64::MIN_POSITIVE))
}

// ---------------------------------------------------------------------------
// Common positive direction (Wendel)
// ---------------------------------------------------------------------------

/// Finds ν with ν·kⱼ > 0 for all j, or `None` when no such direction exists.
///
/// Computes the minimum-norm point z of conv{k̂₁,…,k̂ₙ} by the Gilbert /
/// Frank–Wolfe iteration; if |z| is bounded away from 0 then ν = z/|z|
/// satisfies ν·k̂ⱼ ≥ |z| for all j, and any returned ν is re-verified by
/// direct dot products (soundness by construction).
pub fn common_positive_direction(ks: &[Vec<f64>]) -> Option<Vec<f64>> {
    if ks.is_empty() {
        return None;
    }
    let hats: Vec<Vec<f64>> = ks
        .iter()
        .filter(|k| norm(k) > 0.0)
        .map(|k| {
            let h = norm(k);
            k.iter().map(|x| x / h).collect()
        })
        .collect();
    if hats.len() < ks.len() {
        return None; // a zero vector admits no strictly positive dot product
    }
    let mut z = hats[0].clone();
    let eps = 1e-12;
    for _ in 0..200_000 {
        // Most-violating vertex: minimizes z·k̂.
        let (_, kmin) = hats
            .iter()
            .map(|k| (dot(&z, k), k))
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .map(|(v, k)| (v, k.clone()))
            .unwrap();
        let zz = dot(&z, &z);
        let gap = zz - dot(&z, &kmin);
        if gap <= eps {
            break;
        }
        // Exact line search on the segment [z, k̂min].
        let diff: Vec<f64> = z.iter().zip(&kmin).map(|(a, b)| a - b).collect();
        let dd = dot(&diff, &diff);
        let t = (dot(&z, &diff) / dd).clamp(0.0, 1.0);
        for (zi, b) in z.iter_mut().zip(&kmin) {
            *zi = (1.0 - t) * *zi + t * b;
        }
        if norm(&z) < 1e-9 {
            return None;
        }
    }
    let nz = norm(&z);
    if nz < 1e-7 {
        return None;
    }
    let nu: Vec<f64> = z.iter().map(|x| x / nz).collect();
    // Soundness gate.
    if ks.iter().all(|k| dot(&nu, k) > 0.0) {
        Some(nu)
    } else {
        None
    }
}

/// Exact Wendel probability P(n, d) = 2^{−n+1} Σ_{j<d} C(n−1, j) that n
/// uniformly random directions admit a common positive direction.
pub fn wendel_probability(n: usize, d: usize) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let mut sum = 0.0;
    for j in 0..d.min(n) {
        sum += binomial(n - 1, j);
    }
    sum * 0.5f64.powi(n as i32 - 1)
}

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let mut v = 1.0;
    for i in 0..k {
        v *= (n - i) as f64 / (i + 1) as f64;
    }
    v
}

/// Rejection-sampling oracle: samples `tries` uniform directions and reports
/// whether any has strictly positive dot products with every kⱼ. Sound but
/// incomplete — used as a one-sided cross-check.
pub fn positive_direction_rejection_oracle(
    ks: &[Vec<f64>],
    tries: usize,
    rng: &mut ChaCha8Rng,
) -> Option<Vec<f64>> {
    if ks.is_empty() {
        return None;
    }
    let d = ks[0].len();
    for _ in 0..tries {
        let nu = random_unit_vector(d, rng);
        if ks.iter().all(|k| dot(&nu, k) > 0.0) {
            return Some(nu);
        }
    }
    None
}

pub fn random_unit_vector(d: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| standard_normal(rng)).collect();
        let n = norm(&v);
        if n > 1e-6 {
            return v.iter().map(|x| x / n).collect();
        }
    }
}

/// Standard normal by Box–Muller (deterministic given the RNG stream).
pub fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

// ---------------------------------------------------------------------------
// Integrability scan
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntegrabilityVerdict {
    Finite,
    Divergent,
    Inconclusive,
}

#[derive(Debug, Clone)]
pub struct IntegrabilityConfig {
    pub samples: usize,
    /// Coarse and fine cutoffs on the perpendicular heights.
    pub h_min_coarse: f64,
    pub h_min_fine: f64,
    pub seed: u64,
    /// Growth ratios delimiting the dead zone between verdicts.
    pub ratio_finite: f64,
    pub ratio_divergent: f64,
}

impl Default for IntegrabilityConfig {
    fn default() -> Self {
        IntegrabilityConfig {
            samples: 100_000,
            h_min_coarse: 1e-3,
            h_min_fine: 1e-6,
            seed: 0x5eed_0001,
            ratio_finite: 1.5,
            ratio_divergent: 2.5,
        }
    }
}

#[derive(Debug, Clone)]
pub struct IntegrabilityRow {
    pub s: f64,
    pub estimate_coarse: f64,
    pub estimate_fine: f64,
    pub growth_ratio: f64,
    pub verdict: IntegrabilityVerdict,
}

/// Γ(m/2) for integer m ≥ 1, exactly via the half-integer recurrence.
fn gamma_half(m: usize) -> f64 {
    assert!(m >= 1);
    if m % 2 == 0 {
        factorial(m / 2 - 1)
    } else {
        // Γ(1/2) = √π, Γ(x+1) = xΓ(x).
        let mut v = std::f64::consts::PI.sqrt();
        let mut x = 0.5;
        while (2.0 * x) as usize + 1 <= m {
            if ((2.0 * x) as usize) == m {
                break;
            }
            v *= x;
            x += 1.0;
        }
        v
    }
}

/// Surface area of the unit sphere S^m ⊂ ℝ^{m+1}.
fn sphere_area(m: usize) -> f64 {
    // |S^m| = 2 π^{(m+1)/2} / Γ((m+1)/2).
    2.0 * std::f64::consts::PI.powf((m as f64 + 1.0) / 2.0) / gamma_half(m + 1)
}

/// Volume of the unit ball in ℝ^j.
fn ball_volume(j: usize) -> f64 {
    if j == 0 {
        return 1.0;
    }
    std::f64::consts::PI.powf(j as f64 / 2.0) / gamma_half(j + 2)
}

/// Estimates ∫_{(B₁)^n} |conv(0,k₁..k_n)|^s dk with perpendicular heights
/// truncated below at h_min, by importance sampling.
///
/// The simplex volume factorizes as Π hᵢ / n! over the heights hᵢ of kᵢ
/// above span(k₁..k_{i−1}); each hᵢ is sampled with density ∝ h^{s+d−i} on
/// [h_min, 1] so the h-power of the integrand cancels exactly and the only
/// Monte Carlo randomness left is the ball indicator. Divergence at the
/// threshold shows up directly in the normalization constants' growth as
/// h_min → 0.
fn simplex_power_integral(
    n: usize,
    d: usize,
    s: f64,
    h_min: f64,
    samples: usize,
    seed: u64,
) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Per-step constants: Z_i = ∫_{h_min}^1 h^{a_i} dh with a_i = s + d − i,
    // times the angular area and the parallel-ball volume.
    let mut prefactor = factorial(n).powf(-s);
    let mut z = vec![0.0; n];
    for i in 1..=n {
        let j = i - 1; // dimension of the span of the predecessors
        let a = s + (d - j) as f64 - 1.0;
        z[i - 1] = if (a + 1.0).abs() < 1e-12 {
            (1.0 / h_min).ln()
        } else {
            (1.0 - h_min.powf(a + 1.0)) / (a + 1.0)
        };
        prefactor *= z[i - 1].abs() * sphere_area(d - j - 1) * ball_volume(j);
    }
    // Acceptance frequency of the joint ball indicator.
    let mut accepted = 0usize;
    for _ in 0..samples {
        let mut basis: Vec<Vec<f64>> = Vec::new();
        let mut ok = true;
        for i in 1..=n {
            let j = i - 1;
            let a = s + (d - j) as f64 - 1.0;
            // Draw h from density ∝ h^a on [h_min, 1] by inverse CDF.
            let u: f64 = rng.gen_range(0.0..1.0);
            let h = if (a + 1.0).abs() < 1e-12 {
                h_min.powf(1.0 - u)
            } else {
                let lo = h_min.powf(a + 1.0);
                (lo + u * (1.0 - lo)).powf(1.0 / (a + 1.0))
            };
            // Perpendicular direction uniform in the orthocomplement.
            let theta = random_unit_in_complement(d, &basis, &mut rng);
            // Parallel component uniform in the j-dimensional unit ball.
            let mut k: Vec<f64> = theta.iter().map(|x| x * h).collect();
            if j > 0 {
                let radius: f64 = rng.gen_range(0.0f64..1.0).powf(1.0 / j as f64);
                let coeffs = random_unit_coords(j, &mut rng);
                for (bvec, &c) in basis.iter().zip(&coeffs) {
                    for (kx, bx) in k.iter_mut().zip(bvec) {
                        *kx += radius * c * bx;
                    }
                }
            }
            if dot(&k, &k) > 1.0 {
                ok = false;
                break;
            }
            basis.push(theta);
        }
        if ok {
            accepted += 1;
        }
    }
    prefactor * accepted as f64 / samples as f64
}

fn random_unit_in_complement(d: usize, basis: &[Vec<f64>], rng: &mut ChaCha8Rng) -> Vec<f64> {
    loop {
        let mut v: Vec<f64> = (0..d).map(|_| standard_normal(rng)).collect();
        for b in basis {
            let c = dot(&v, b);
            for (x, y) in v.iter_mut().zip(b) {
                *x -= c * y;
            }
        }
        let n = norm(&v);
        if n > 1e-6 {
            return v.iter().map(|x| x / n).collect();
        }
    }
}

/// Uniform unit direction in ℝ^j, returned as coordinates; together with a
/// u^{1/j}-distributed radius this yields a uniform point in the unit ball.
fn random_unit_coords(j: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let dir = {
        loop {
            let v: Vec<f64> = (0..j).map(|_| standard_normal(rng)).collect();
            let n = norm(&v);
            if n > 1e-6 {
                break v.iter().map(|x| x / n).collect::<Vec<f64>>();
            }
        }
    };
    dir
}

/// Scans exponents s for integrability of |conv(0,k₁..k_n)|^s over the unit
/// polyball, comparing estimates at two height cutoffs.
pub fn integrability_scan(
    n: usize,
    d: usize,
    s_list: &[f64],
    cfg: &IntegrabilityConfig,
) -> Vec<IntegrabilityRow> {
    s_list
        .iter()
        .map(|&s| {
            let coarse =
                simplex_power_integral(n, d, s, cfg.h_min_coarse, cfg.samples, cfg.seed);
            let fine =
                simplex_power_integral(n, d, s, cfg.h_min_fine, cfg.samples, cfg.seed ^ 0x9e37);
            let ratio = fine / coarse;
            let verdict = if ratio < cfg.ratio_finite {
                IntegrabilityVerdict::Finite
            } else if ratio > cfg.ratio_divergent {
                IntegrabilityVerdict::Divergent
            } else {
                IntegrabilityVerdict::Inconclusive
            };
            IntegrabilityRow {
                s,
                estimate_coarse: coarse,
                estimate_fine: fine,
                growth_ratio: ratio,
                verdict,
            }
        })
        .collect()
}

/// Minimal space dimension required by the main theorem at complexity m₀.
pub fn d0_threshold(m0: usize) -> usize {
    assert!(m0 >= 1);
    match m0 {
        1 => 2,
        2 => 8,
        _ => 28 * m0 + 70,
    }
}
