//! Quadrature building blocks: Gauss–Legendre rules, composite panels, an
//! independent adaptive Simpson oracle, and polar/spherical product rules for
//! radial wavenumber integrals.

use crate::error::CoreError;

/// Gauss–Legendre nodes and weights on [−1, 1], by Newton iteration on the
/// Legendre polynomial (standard Golub–Welsch-free construction).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev-based initial guess.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut pp = 0.0;
        for _ in 0..100 {
            // Evaluate P_n(x) and P_n'(x) by recurrence.
            let mut p0 = 1.0;
            let mut p1 = x;
            for j in 2..=n {
                let jf = j as f64;
                let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pn1 = if n == 1 { 1.0 } else { p0 };
            pp = n as f64 * (x * pn - pn1) / (x * x - 1.0);
            let dx = pn / pp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * pp * pp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Gauss–Legendre rule mapped to [a, b].
pub fn gauss_legendre_on(a: f64, b: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    (
        x.iter().map(|&t| mid + half * t).collect(),
        w.iter().map(|&t| t * half).collect(),
    )
}

/// Integrates `f` over consecutive panels with an n-point Gauss rule each.
pub fn composite_gauss(f: &mut dyn FnMut(f64) -> f64, panels: &[f64], n: usize) -> f64 {
    let (xr, wr) = gauss_legendre(n);
    let mut total = 0.0;
    for pair in panels.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        for (&x, &w) in xr.iter().zip(&wr) {
            total += w * half * f(mid + half * x);
        }
    }
    total
}

/// Geometric panel ladder from `a` to `b` (both > 0) with `per_decade` panels
/// per decade, for integrands smooth on a log scale.
pub fn geometric_panels(a: f64, b: f64, per_decade: usize) -> Vec<f64> {
    assert!(a > 0.0 && b > a);
    let decades = (b / a).log10();
    let count = ((decades * per_decade as f64).ceil() as usize).max(1);
    let ratio = (b / a).powf(1.0 / count as f64);
    let mut v = Vec::with_capacity(count + 1);
    let mut x = a;
    for _ in 0..count {
        v.push(x);
        x *= ratio;
    }
    v.push(b);
    v
}

/// Adaptive Simpson quadrature — the deliberately independent oracle used to
/// cross-check the Gauss-panel evaluations.
pub fn adaptive_simpson(
    f: &mut dyn FnMut(f64) -> f64,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<f64, CoreError> {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    fn rec(
        f: &mut dyn FnMut(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: usize,
    ) -> Option<f64> {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let delta = left + right - whole;
        if delta.abs() <= 15.0 * tol {
            return Some(left + right + delta / 15.0);
        }
        if depth == 0 {
            return None;
        }
        let l = rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?;
        let r = rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?;
        Some(l + r)
    }
    let fa = f(a);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let fb = f(b);
    let whole = simpson(fa, fm, fb, a, b);
    rec(f, a, b, fa, fm, fb, whole, tol, 48).ok_or(CoreError::QuadratureNonConvergence {
        what: "adaptive Simpson".into(),
        achieved: f64::NAN,
        wanted: tol,
    })
}

/// A product quadrature over k ∈ ℝ^d (radial × angular), returning nodes and
/// weights that already include the volume element.
#[derive(Debug, Clone)]
pub struct PolarQuadrature {
    pub d: usize,
    /// (k, weight) pairs; Σ w f(k) ≈ ∫ f(k) dk over |k| ≤ k_max.
    pub nodes: Vec<(Vec<f64>, f64)>,
}

impl PolarQuadrature {
    /// Radial Gauss on (0, k_max] × uniform angles. Supports d ∈ {1, 2, 3}.
    ///
    /// d = 1 uses symmetric Gauss nodes on [−k_max, k_max]; d = 2 uses
    /// `n_theta` equispaced angles (trapezoid is spectrally accurate for
    /// periodic integrands); d = 3 adds a Gauss rule in cos θ.
    pub fn new(d: usize, k_max: f64, n_r: usize, n_theta: usize) -> Self {
        assert!(k_max > 0.0);
        let mut nodes = Vec::new();
        match d {
            1 => {
                let (xs, ws) = gauss_legendre_on(-k_max, k_max, 2 * n_r);
                for (&x, &w) in xs.iter().zip(&ws) {
                    nodes.push((vec![x], w));
                }
            }
            2 => {
                let (rs, wr) = gauss_legendre_on(0.0, k_max, n_r);
                let dtheta = 2.0 * std::f64::consts::PI / n_theta as f64;
                for (&r, &w) in rs.iter().zip(&wr) {
                    for t in 0..n_theta {
                        let th = dtheta * t as f64;
                        nodes.push((vec![r * th.cos(), r * th.sin()], w * r * dtheta));
                    }
                }
            }
            3 => {
                let (rs, wr) = gauss_legendre_on(0.0, k_max, n_r);
                let (cs, wc) = gauss_legendre_on(-1.0, 1.0, n_theta);
                let n_phi = 2 * n_theta;
                let dphi = 2.0 * std::f64::consts::PI / n_phi as f64;
                for (&r, &w) in rs.iter().zip(&wr) {
                    for (&c, &v) in cs.iter().zip(&wc) {
                        let s = (1.0 - c * c).max(0.0).sqrt();
                        for p in 0..n_phi {
                            let ph = dphi * p as f64;
                            nodes.push((
                                vec![r * s * ph.cos(), r * s * ph.sin(), r * c],
                                w * v * r * r * dphi,
                            ));
                        }
                    }
                }
            }
            _ => panic!("polar quadrature supports d ≤ 3, got {d}"),
        }
        PolarQuadrature { d, nodes }
    }

    /// Σ w f(k).
    pub fn integrate(&self, mut f: impl FnMut(&[f64]) -> f64) -> f64 {
        self.nodes.iter().map(|(k, w)| w * f(k)).sum()
    }
}
