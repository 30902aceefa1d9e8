//! Interaction-potential constants and limiting collision coefficients:
//! Λ_V, C_s^V, the Landau kernel B₀, the diffusion tensor A₀ = B₀ ∗ M, the
//! dispersion function with collective screening, and the Lenard–Balescu
//! kernel. Closed forms are cross-checked by δ-regularized brute force.

use crate::error::CoreError;
use crate::quad::{
    adaptive_simpson, composite_gauss, gauss_legendre, gauss_legendre_on, PolarQuadrature,
};

/// Radial Fourier profile of the interaction potential.
#[derive(Debug, Clone, PartialEq)]
pub enum FourierProfile {
    /// V̂(k) = amplitude · e^{−alpha |k|²}.
    Gaussian { amplitude: f64, alpha: f64 },
    Zero,
}

/// Interaction potential described by its radial, real, rapidly decaying
/// Fourier profile, with a wavenumber cutoff and quadrature resolution.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    pub d: usize,
    pub profile: FourierProfile,
    /// Wavenumber cutoff: the profile tail beyond k_max is below 10⁻¹² of peak.
    pub k_max: f64,
    /// Radial and angular node counts for k-quadratures.
    pub n_r: usize,
    pub n_theta: usize,
}

impl Potential {
    /// Default Gaussian profile V̂(k) = e^{−|k|²} with cutoff 8.
    pub fn default_gaussian(d: usize) -> Self {
        Potential {
            d,
            profile: FourierProfile::Gaussian {
                amplitude: 1.0,
                alpha: 1.0,
            },
            k_max: 8.0,
            n_r: 48,
            n_theta: 24,
        }
    }

    /// V̂(|k|).
    pub fn vhat(&self, r: f64) -> f64 {
        match self.profile {
            FourierProfile::Gaussian { amplitude, alpha } => amplitude * (-alpha * r * r).exp(),
            FourierProfile::Zero => 0.0,
        }
    }

    pub fn k_quadrature(&self) -> PolarQuadrature {
        PolarQuadrature::new(self.d, self.k_max, self.n_r, self.n_theta)
    }
}

/// Maxwellian M(v) = (β/2π)^{d/2} e^{−β|v|²/2}.
pub fn maxwellian(d: usize, beta: f64, v: &[f64]) -> f64 {
    let v2: f64 = v.iter().map(|x| x * x).sum();
    (beta / (2.0 * std::f64::consts::PI)).powf(d as f64 / 2.0) * (-0.5 * beta * v2).exp()
}

/// Volume of the unit ball in ℝ^n.
pub fn unit_ball_volume(n: usize) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let mut v = if n % 2 == 0 { 1.0 } else { 2.0 };
    let mut k = if n % 2 == 0 { 2 } else { 3 };
    while k <= n {
        v *= 2.0 * std::f64::consts::PI / k as f64;
        k += 2;
    }
    v
}

/// Surface area of the unit sphere S^{n−1} ⊂ ℝ^n.
pub fn unit_sphere_area(n: usize) -> f64 {
    n as f64 * unit_ball_volume(n)
}

/// d-dimensional radial integral ∫ f(|k|) dk = |S^{d−1}| ∫₀^∞ r^{d−1} f(r) dr,
/// truncated at k_max, with a one-level refinement check.
fn radial_integral(
    p: &Potential,
    mut f: impl FnMut(f64) -> f64,
    what: &str,
) -> Result<f64, CoreError> {
    let area = unit_sphere_area(p.d);
    let mut eval = |n: usize| -> f64 {
        let (xs, ws) = gauss_legendre_on(0.0, p.k_max, n);
        area * xs
            .iter()
            .zip(&ws)
            .map(|(&r, &w)| w * r.powi(p.d as i32 - 1) * f(r))
            .sum::<f64>()
    };
    let coarse = eval(p.n_r);
    let fine = eval(2 * p.n_r);
    let scale = fine.abs().max(1e-300);
    if (fine - coarse).abs() / scale > 1e-9 && fine.abs() > 1e-250 {
        return Err(CoreError::QuadratureNonConvergence {
            what: what.into(),
            achieved: (fine - coarse).abs() / scale,
            wanted: 1e-9,
        });
    }
    Ok(fine)
}

/// Λ_V = (ω_{d−1}/(d ω_d)) · π/(2π)^d · ∫ |k| V̂(k)² dk.
pub fn lambda_v(p: &Potential) -> Result<f64, CoreError> {
    let d = p.d;
    if d < 2 {
        return Err(CoreError::InvalidInput("lambda_v needs d ≥ 2".into()));
    }
    let pref = unit_ball_volume(d - 1) / (d as f64 * unit_ball_volume(d))
        * std::f64::consts::PI
        / (2.0 * std::f64::consts::PI).powi(d as i32);
    let integral = radial_integral(p, |r| r * p.vhat(r) * p.vhat(r), "lambda_v")?;
    Ok(pref * integral)
}

/// Independent oracle for Λ_V using adaptive Simpson on the radial reduction.
pub fn lambda_v_oracle(p: &Potential) -> Result<f64, CoreError> {
    let d = p.d;
    let pref = unit_ball_volume(d - 1) / (d as f64 * unit_ball_volume(d))
        * std::f64::consts::PI
        / (2.0 * std::f64::consts::PI).powi(d as i32)
        * unit_sphere_area(d);
    let mut f = |r: f64| r.powi(d as i32) * p.vhat(r) * p.vhat(r);
    Ok(pref * adaptive_simpson(&mut f, 0.0, p.k_max, 1e-13)?)
}

/// C_s^V = ∫ ⟨k⟩^s |k|^{1−s} V̂(k)² dk with ⟨k⟩ = (1+|k|²)^{1/2}.
pub fn c_s_constant(p: &Potential, s: usize) -> Result<f64, CoreError> {
    radial_integral(
        p,
        |r| {
            let jap = (1.0 + r * r).sqrt();
            jap.powi(s as i32) * r.powf(1.0 - s as f64) * p.vhat(r) * p.vhat(r)
        },
        "c_s_constant",
    )
}

/// Combined radial power r^{d−1} · r^{1−s}, finite at r = 0 for s ≤ d.
fn radial_power(d: usize, s: usize, r: f64) -> f64 {
    let e = d as f64 - s as f64;
    if r == 0.0 {
        if e > 0.0 {
            0.0
        } else if e == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        r.powf(e)
    }
}

/// Adaptive-Simpson oracle for C_s^V.
pub fn c_s_constant_oracle(p: &Potential, s: usize) -> Result<f64, CoreError> {
    let d = p.d;
    let mut f = |r: f64| {
        let jap = (1.0 + r * r).sqrt();
        radial_power(d, s, r) * jap.powi(s as i32) * p.vhat(r) * p.vhat(r)
    };
    Ok(unit_sphere_area(d) * adaptive_simpson(&mut f, 0.0, p.k_max, 1e-13)?)
}

/// The two κ-threshold constants: ∫|k|V̂ dk (linear in V̂) and ∫|k|V̂² dk
/// (quadratic). Both are exposed; see the module documentation.
pub fn kappa_threshold_linear(p: &Potential) -> Result<f64, CoreError> {
    radial_integral(p, |r| r * p.vhat(r), "kappa_threshold_linear")
}

pub fn kappa_threshold_quadratic(p: &Potential) -> Result<f64, CoreError> {
    c_s_constant(p, 0)
}

// ---------------------------------------------------------------------------
// Collision tensors
// ---------------------------------------------------------------------------

/// A d×d real symmetric collision tensor at a given velocity argument.
#[derive(Debug, Clone, PartialEq)]
pub struct CollisionTensor {
    pub at: Vec<f64>,
    pub value: Vec<Vec<f64>>,
}

impl CollisionTensor {
    pub fn d(&self) -> usize {
        self.value.len()
    }

    pub fn trace(&self) -> f64 {
        (0..self.d()).map(|i| self.value[i][i]).sum()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.value
            .iter()
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn max_asymmetry(&self) -> f64 {
        let d = self.d();
        let mut m = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                m = m.max((self.value[i][j] - self.value[j][i]).abs());
            }
        }
        m
    }

    /// Eigenvalues of the symmetric part, by cyclic Jacobi rotations.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let d = self.d();
        let mut a: Vec<Vec<f64>> = (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| 0.5 * (self.value[i][j] + self.value[j][i]))
                    .collect()
            })
            .collect();
        for _ in 0..100 {
            let mut off = 0.0;
            for i in 0..d {
                for j in (i + 1)..d {
                    off += a[i][j] * a[i][j];
                }
            }
            if off < 1e-30 {
                break;
            }
            for i in 0..d {
                for j in (i + 1)..d {
                    if a[i][j].abs() < 1e-300 {
                        continue;
                    }
                    let theta = 0.5 * (a[j][j] - a[i][i]) / a[i][j];
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..d {
                        let (aik, ajk) = (a[i][k], a[j][k]);
                        a[i][k] = c * aik - s * ajk;
                        a[j][k] = s * aik + c * ajk;
                    }
                    for k in 0..d {
                        let (aki, akj) = (a[k][i], a[k][j]);
                        a[k][i] = c * aki - s * akj;
                        a[k][j] = s * aki + c * akj;
                    }
                }
            }
        }
        let mut eigs: Vec<f64> = (0..d).map(|i| a[i][i]).collect();
        eigs.sort_by(f64::total_cmp);
        eigs
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }
}

/// Closed-form Landau kernel B₀(w) = (Λ_V/|w|)(Id − ŵ⊗ŵ).
pub fn landau_kernel(w: &[f64], p: &Potential) -> Result<CollisionTensor, CoreError> {
    let nw = w.iter().map(|x| x * x).sum::<f64>().sqrt();
    if nw == 0.0 {
        return Err(CoreError::InvalidInput(
            "landau kernel is singular at w = 0".into(),
        ));
    }
    let lam = lambda_v(p)?;
    let d = p.d;
    let mut value = vec![vec![0.0; d]; d];
    for (i, row) in value.iter_mut().enumerate() {
        for (j, x) in row.iter_mut().enumerate() {
            let delta = if i == j { 1.0 } else { 0.0 };
            *x = lam / nw * (delta - w[i] * w[j] / (nw * nw));
        }
    }
    Ok(CollisionTensor {
        at: w.to_vec(),
        value,
    })
}

/// Orthonormal frame whose last column is ŵ (Gram–Schmidt over coordinate
/// axes), returned as row vectors e₁..e_{d−1}, ŵ.
fn frame_with_last(w: &[f64]) -> Vec<Vec<f64>> {
    let d = w.len();
    let nw = w.iter().map(|x| x * x).sum::<f64>().sqrt();
    let what: Vec<f64> = w.iter().map(|x| x / nw).collect();
    let mut frame: Vec<Vec<f64>> = Vec::with_capacity(d);
    for axis in 0..d {
        if frame.len() == d - 1 {
            break;
        }
        let mut v = vec![0.0; d];
        v[axis] = 1.0;
        let c = v.iter().zip(&what).map(|(a, b)| a * b).sum::<f64>();
        for (x, y) in v.iter_mut().zip(&what) {
            *x -= c * y;
        }
        for b in &frame {
            let c: f64 = v.iter().zip(b).map(|(a, b)| a * b).sum();
            for (x, y) in v.iter_mut().zip(b) {
                *x -= c * y;
            }
        }
        let n: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-8 {
            for x in v.iter_mut() {
                *x /= n;
            }
            frame.push(v);
        }
    }
    frame.push(what);
    frame
}

/// ∫ (k⊗k) π V̂(k)² δ_reg(k·w) g(k) dk/(2π)^d with a Gaussian-regularized
/// δ of width `delta_reg`, evaluated in a w-adapted spherical frame whose
/// angular panels cluster on the ridge k·w ≈ 0 (a generic product rule
/// cannot resolve the ridge once the width is small).
fn regularized_plane_integral(
    w: &[f64],
    p: &Potential,
    delta_reg: f64,
    mut extra: impl FnMut(&[f64]) -> f64,
) -> Result<CollisionTensor, CoreError> {
    let nw = w.iter().map(|x| x * x).sum::<f64>().sqrt();
    if nw == 0.0 || delta_reg <= 0.0 {
        return Err(CoreError::InvalidInput(
            "regularized plane integral needs w ≠ 0 and δ_reg > 0".into(),
        ));
    }
    let d = p.d;
    if !(2..=3).contains(&d) {
        return Err(CoreError::InvalidInput(
            "regularized plane integral implemented for d ∈ {2,3}".into(),
        ));
    }
    let frame = frame_with_last(w);
    let pref = std::f64::consts::PI / (2.0 * std::f64::consts::PI).powi(d as i32);
    let gauss_delta = |x: f64| {
        (-0.5 * x * x / (delta_reg * delta_reg)).exp()
            / (delta_reg * (2.0 * std::f64::consts::PI).sqrt())
    };
    let (rs, wr) = gauss_legendre_on(0.0, p.k_max, p.n_r);
    let mut value = vec![vec![0.0; d]; d];
    let mut accumulate = |k: &[f64], wq: f64| {
        let r = k.iter().map(|x| x * x).sum::<f64>().sqrt();
        let v2 = p.vhat(r).powi(2);
        if v2 == 0.0 {
            return;
        }
        let kw: f64 = k.iter().zip(w).map(|(a, b)| a * b).sum();
        let f = pref * v2 * gauss_delta(kw) * extra(k) * wq;
        for i in 0..d {
            for j in 0..d {
                value[i][j] += f * k[i] * k[j];
            }
        }
    };
    for (&r, &wrad) in rs.iter().zip(&wr) {
        if r == 0.0 {
            continue;
        }
        // Angular ridge half-width in the polar variable, with a wide margin
        // (the Gaussian tail at 10σ is ~1e−22).
        let sigma = delta_reg / (r * nw);
        match d {
            2 => {
                // k = r(cos θ ŵ + sin θ e₁); ridges at θ = ±π/2. With the
                // half-width capped at π/2 the two windows tile the circle.
                let psi_max = (10.0 * sigma).min(std::f64::consts::FRAC_PI_2);
                for theta_c in [std::f64::consts::FRAC_PI_2, -std::f64::consts::FRAC_PI_2] {
                    let panels = [
                        -psi_max,
                        -0.25 * psi_max,
                        0.25 * psi_max,
                        psi_max,
                    ];
                    let (xs, ws) = gauss_legendre(20);
                    for pair in panels.windows(2) {
                        let mid = 0.5 * (pair[0] + pair[1]);
                        let half = 0.5 * (pair[1] - pair[0]);
                        for (&x, &wq) in xs.iter().zip(&ws) {
                            let th = theta_c + mid + half * x;
                            let k: Vec<f64> = (0..d)
                                .map(|i| r * (th.cos() * frame[1][i] + th.sin() * frame[0][i]))
                                .collect();
                            accumulate(&k, wrad * wq * half * r);
                        }
                    }
                }
            }
            3 => {
                // k = r(s cos φ e₁ + s sin φ e₂ + μ ŵ), s = √(1−μ²); the
                // ridge sits at μ = 0. Beyond the window the Gaussian tail
                // is negligible, so the |μ| > μ_max region is dropped.
                let mu_max = (10.0 * sigma).min(1.0);
                let panels = [-mu_max, -0.25 * mu_max, 0.25 * mu_max, mu_max];
                let (xs, ws) = gauss_legendre(20);
                let n_phi = 12usize;
                let dphi = 2.0 * std::f64::consts::PI / n_phi as f64;
                for pair in panels.windows(2) {
                    let mid = 0.5 * (pair[0] + pair[1]);
                    let half = 0.5 * (pair[1] - pair[0]);
                    for (&x, &wmu) in xs.iter().zip(&ws) {
                        let mu = mid + half * x;
                        let s = (1.0 - mu * mu).max(0.0).sqrt();
                        for q in 0..n_phi {
                            let ph = dphi * q as f64;
                            let k: Vec<f64> = (0..d)
                                .map(|i| {
                                    r * (s * ph.cos() * frame[0][i]
                                        + s * ph.sin() * frame[1][i]
                                        + mu * frame[2][i])
                                })
                                .collect();
                            accumulate(&k, wrad * wmu * half * dphi * r * r);
                        }
                    }
                }
            }
            _ => unreachable!(),
        }
    }
    Ok(CollisionTensor {
        at: w.to_vec(),
        value,
    })
}

/// Brute-force Landau kernel with a Gaussian-regularized δ(k·w):
/// ∫ (k⊗k) π V̂(k)² δ_reg(k·w) dk/(2π)^d. Converges to `landau_kernel` as
/// δ_reg → 0 and serves as its independent oracle.
pub fn landau_kernel_bruteforce(
    w: &[f64],
    p: &Potential,
    delta_reg: f64,
) -> Result<CollisionTensor, CoreError> {
    regularized_plane_integral(w, p, delta_reg, |_| 1.0)
}

/// Richardson extrapolation of the brute-force kernel over a geometric δ
/// ladder (second-order in δ², using the three smallest widths).
pub fn landau_kernel_extrapolated(
    w: &[f64],
    p: &Potential,
    deltas: &[f64],
) -> Result<CollisionTensor, CoreError> {
    if deltas.len() < 3 {
        return Err(CoreError::InvalidInput(
            "need at least three regularization widths".into(),
        ));
    }
    let mut ds: Vec<f64> = deltas.to_vec();
    ds.sort_by(f64::total_cmp);
    let (d0, d1, d2) = (ds[0], ds[1], ds[2]);
    let t0 = landau_kernel_bruteforce(w, p, d0)?;
    let t1 = landau_kernel_bruteforce(w, p, d1)?;
    let t2 = landau_kernel_bruteforce(w, p, d2)?;
    // The Gaussian regularization has an even error expansion in δ:
    // fit value = a + b δ² + c δ⁴ through the three widths and return a.
    let d = p.d;
    let mut value = vec![vec![0.0; d]; d];
    let x0 = d0 * d0;
    let x1 = d1 * d1;
    let x2 = d2 * d2;
    // Lagrange extrapolation to x = 0.
    let l0 = (x1 * x2) / ((x0 - x1) * (x0 - x2));
    let l1 = (x0 * x2) / ((x1 - x0) * (x1 - x2));
    let l2 = (x0 * x1) / ((x2 - x0) * (x2 - x1));
    for i in 0..d {
        for j in 0..d {
            value[i][j] = l0 * t0.value[i][j] + l1 * t1.value[i][j] + l2 * t2.value[i][j];
        }
    }
    Ok(CollisionTensor {
        at: w.to_vec(),
        value,
    })
}

/// Diffusion tensor A₀(v) = (B₀ ∗ M)(v), by polar quadrature centered at the
/// singular point of B₀ (the |u|^{−1} factor is integrable against r^{d−1}).
pub fn diffusion_tensor(v: &[f64], p: &Potential, beta: f64) -> Result<CollisionTensor, CoreError> {
    let d = p.d;
    let lam = lambda_v(p)?;
    let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let r_max = nv + 9.0 / beta.sqrt();
    let eval = |n_r: usize, n_a: usize| -> Vec<Vec<f64>> {
        let (rs, wr) = gauss_legendre_on(0.0, r_max, n_r);
        let mut value = vec![vec![0.0; d]; d];
        let mut add_dir = |r: f64, w: f64, u_hat: &[f64]| {
            // B₀(r·û) = (Λ_V/r)(Id − û⊗û); times M(v − r·û), times r^{d−1}.
            let shifted: Vec<f64> = v.iter().zip(u_hat).map(|(a, b)| a - r * b).collect();
            let m = maxwellian(d, beta, &shifted);
            let f = w * r.powi(d as i32 - 2) * lam * m;
            for i in 0..d {
                for j in 0..d {
                    let delta = if i == j { 1.0 } else { 0.0 };
                    value[i][j] += f * (delta - u_hat[i] * u_hat[j]);
                }
            }
        };
        match d {
            2 => {
                let dtheta = 2.0 * std::f64::consts::PI / n_a as f64;
                for (&r, &w) in rs.iter().zip(&wr) {
                    for t in 0..n_a {
                        let th = dtheta * t as f64;
                        add_dir(r, w * dtheta, &[th.cos(), th.sin()]);
                    }
                }
            }
            3 => {
                let (cs, wc) = gauss_legendre_on(-1.0, 1.0, n_a);
                let n_phi = 2 * n_a;
                let dphi = 2.0 * std::f64::consts::PI / n_phi as f64;
                for (&r, &w) in rs.iter().zip(&wr) {
                    for (&c, &vv) in cs.iter().zip(&wc) {
                        let s = (1.0 - c * c).max(0.0).sqrt();
                        for q in 0..n_phi {
                            let ph = dphi * q as f64;
                            add_dir(r, w * vv * dphi, &[s * ph.cos(), s * ph.sin(), c]);
                        }
                    }
                }
            }
            _ => unreachable!("diffusion tensor implemented for d ∈ {{2,3}}"),
        }
        value
    };
    if !(2..=3).contains(&d) {
        return Err(CoreError::InvalidInput(
            "diffusion tensor implemented for d ∈ {2,3}".into(),
        ));
    }
    let coarse = eval(p.n_r, p.n_theta);
    let fine = eval(p.n_r * 3 / 2, p.n_theta * 3 / 2);
    let scale = fine
        .iter()
        .flatten()
        .map(|x| x.abs())
        .fold(0.0f64, f64::max)
        .max(1e-300);
    let diff = coarse
        .iter()
        .flatten()
        .zip(fine.iter().flatten())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    if diff / scale > 1e-7 {
        return Err(CoreError::QuadratureNonConvergence {
            what: "diffusion tensor".into(),
            achieved: diff / scale,
            wanted: 1e-7,
        });
    }
    Ok(CollisionTensor {
        at: v.to_vec(),
        value: fine,
    })
}

/// Radial oracle for the isotropic value at the origin:
/// A₀(0) = Λ_V (1 − 1/d) (∫ M(u)|u|^{−1} du) · Id.
pub fn diffusion_tensor_origin_coefficient(p: &Potential, beta: f64) -> Result<f64, CoreError> {
    let d = p.d;
    let lam = lambda_v(p)?;
    let mut g = |r: f64| {
        let m = (beta / (2.0 * std::f64::consts::PI)).powf(d as f64 / 2.0)
            * (-0.5 * beta * r * r).exp();
        r.powi(d as i32 - 2) * m
    };
    let integral =
        unit_sphere_area(d) * adaptive_simpson(&mut g, 0.0, 12.0 / beta.sqrt(), 1e-12)?;
    Ok(lam * (1.0 - 1.0 / d as f64) * integral)
}

// ---------------------------------------------------------------------------
// Dispersion function and Lenard–Balescu kernel
// ---------------------------------------------------------------------------

/// 1-d Maxwellian marginal M₁(u) = √(β/2π) e^{−βu²/2}.
fn maxwell_1d(beta: f64, u: f64) -> f64 {
    (beta / (2.0 * std::f64::consts::PI)).sqrt() * (-0.5 * beta * u * u).exp()
}

/// Dispersion function ε(k, z) = 1 + V̂(k) ∫ M₁'(u)/(ζ − u − i0) du with
/// ζ = z/|k|, evaluated by Plemelj: principal value (singularity-subtracted)
/// plus iπ M₁'(ζ).
pub fn dispersion_function(
    k: &[f64],
    z: f64,
    p: &Potential,
    beta: f64,
) -> Result<(f64, f64), CoreError> {
    let nk = k.iter().map(|x| x * x).sum::<f64>().sqrt();
    if nk == 0.0 {
        return Err(CoreError::InvalidInput(
            "dispersion function is singular at k = 0".into(),
        ));
    }
    let zeta = z / nk;
    let vh = p.vhat(nk);
    if vh == 0.0 {
        return Ok((1.0, 0.0));
    }
    let m1p = |u: f64| -beta * u * maxwell_1d(beta, u);
    let u_half = 14.0 / beta.sqrt() + zeta.abs();
    let (a, b) = (zeta - u_half, zeta + u_half);
    // p.v. ∫ M₁'(u)/(ζ−u) du = ∫ (M₁'(u) − M₁'(ζ))/(ζ−u) du over the
    // symmetric window (the subtracted term integrates to zero there).
    let fz = m1p(zeta);
    let mut integrand = |u: f64| {
        let du = zeta - u;
        if du.abs() < 1e-9 {
            // Remove the 0/0 with the derivative of M₁' at ζ.
            beta * maxwell_1d(beta, zeta) * (beta * zeta * zeta - 1.0)
        } else {
            (m1p(u) - fz) / du
        }
    };
    let panels = [
        a,
        zeta - 1.0 / beta.sqrt(),
        zeta,
        zeta + 1.0 / beta.sqrt(),
        b,
    ];
    let pv = composite_gauss(&mut integrand, &panels, 64);
    Ok((1.0 + vh * pv, vh * std::f64::consts::PI * fz))
}

/// Contour-shifted oracle: ∫ M₁'(u)/(ζ − u − iη) du for a small η ladder,
/// Richardson-extrapolated to η → 0.
pub fn dispersion_function_oracle(
    k: &[f64],
    z: f64,
    p: &Potential,
    beta: f64,
) -> Result<(f64, f64), CoreError> {
    let nk = k.iter().map(|x| x * x).sum::<f64>().sqrt();
    if nk == 0.0 {
        return Err(CoreError::InvalidInput("k = 0".into()));
    }
    let zeta = z / nk;
    let vh = p.vhat(nk);
    if vh == 0.0 {
        return Ok((1.0, 0.0));
    }
    let m1p = |u: f64| -beta * u * maxwell_1d(beta, u);
    let u_half = 14.0 / beta.sqrt() + zeta.abs();
    let eval = |eta: f64| -> (f64, f64) {
        let mut re = |u: f64| {
            let du = zeta - u;
            m1p(u) * du / (du * du + eta * eta)
        };
        let mut im = |u: f64| {
            let du = zeta - u;
            m1p(u) * eta / (du * du + eta * eta)
        };
        // Geometric panel ladder away from ζ, so every panel sees the
        // Lorentzian at a resolved scale.
        let mut offsets = vec![0.0, eta];
        while *offsets.last().unwrap() < u_half {
            let next = offsets.last().unwrap() * 2.0;
            offsets.push(next.min(u_half));
        }
        let mut panels: Vec<f64> = offsets.iter().rev().map(|o| zeta - o).collect();
        panels.extend(offsets.iter().skip(1).map(|o| zeta + o));
        (
            composite_gauss(&mut re, &panels, 24),
            composite_gauss(&mut im, &panels, 24),
        )
    };
    // Poisson-kernel smoothing makes the error genuinely first order in η
    // (for both parts), so extrapolate with a degree-2 polynomial in η:
    // Lagrange weights to η = 0 on the 2:1 ladder are (1/3, −2, 8/3).
    let etas = [2e-2, 1e-2, 5e-3];
    let vals: Vec<(f64, f64)> = etas.iter().map(|&e| eval(e)).collect();
    let weights = [1.0 / 3.0, -2.0, 8.0 / 3.0];
    let re: f64 = weights.iter().zip(&vals).map(|(w, v)| w * v.0).sum();
    let im: f64 = weights.iter().zip(&vals).map(|(w, v)| w * v.1).sum();
    Ok((1.0 + vh * re, vh * im))
}

/// Lenard–Balescu kernel: δ-regularized ∫ (k⊗k) π V̂(k)² δ(k·w) / |ε(k,k·v)|²
/// dk/(2π)^d.
pub fn lenard_balescu_kernel(
    v: &[f64],
    w: &[f64],
    p: &Potential,
    beta: f64,
    delta_reg: f64,
    screening: bool,
) -> Result<CollisionTensor, CoreError> {
    let mut tensor = regularized_plane_integral(w, p, delta_reg, |k| {
        if !screening {
            return 1.0;
        }
        let kv: f64 = k.iter().zip(v).map(|(a, b)| a * b).sum();
        match dispersion_function(k, kv, p, beta) {
            Ok((er, ei)) => 1.0 / (er * er + ei * ei),
            Err(_) => 1.0,
        }
    })?;
    tensor.at = v.to_vec();
    Ok(tensor)
}
