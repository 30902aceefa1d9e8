use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use kinlab_core::landau::{FourierProfile, Potential};
use kinlab_core::quad::PolarQuadrature;
use kinlab_core::spectral::{
    airy_resolvent_norm, airy_scaling_fit, apply_s_minus, apply_s_plus,
    deformed_velocity_average, hat_apply, hat_apply_direct, resolvent_direct, resolvent_green,
    semigroup_step, sqrt_maxwellian_field, time_ladder, GridField, HatParams, ResolventParams,
    VelocityGrid,
};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn rel_field_diff(a: &GridField, b: &GridField) -> f64 {
    let mut d = a.clone();
    d.add_scaled(b, c(-1.0, 0.0));
    d.l2_norm() / b.l2_norm().max(1e-300)
}

/// A smooth, well-resolved random field: a few complex Gaussian bumps.
fn random_smooth_field(grids: Vec<VelocityGrid>, rng: &mut ChaCha8Rng) -> GridField {
    let n_axes: usize = grids.iter().map(|g| g.d).sum();
    let bumps: Vec<(f64, Vec<f64>, Complex64)> = (0..3)
        .map(|_| {
            let a: f64 = rng.gen_range(0.4..0.9);
            let center: Vec<f64> = (0..n_axes).map(|_| rng.gen_range(-1.2..1.2)).collect();
            let amp = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            (a, center, amp)
        })
        .collect();
    GridField::from_fn(grids, |v| {
        bumps
            .iter()
            .map(|(a, ctr, amp)| {
                let r2: f64 = v.iter().zip(ctr).map(|(x, y)| (x - y) * (x - y)).sum();
                amp * (-a * r2).exp()
            })
            .sum()
    })
}

// ---------------------------------------------------------------------------
// Semigroup
// ---------------------------------------------------------------------------

#[test]
fn semigroup_t_zero_is_identity() {
    let grid = VelocityGrid::new(1, 32, 6.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let f = random_smooth_field(vec![grid], &mut rng);
    let g = semigroup_step(&f, 0.0, &[0.7], 0.3);
    assert!(rel_field_diff(&g, &f) < 1e-14);
}

#[test]
fn semigroup_heat_gaussian_closed_form() {
    // k = 0: pure heat. e^{σtΔ} maps e^{−av²} to (1+4aσt)^{−1/2} e^{−a'v²}
    // with a' = a/(1+4aσt).
    let grid = VelocityGrid::new(1, 64, 8.0).unwrap();
    let a = 0.8;
    let f = GridField::from_fn(vec![grid], |v| c((-a * v[0] * v[0]).exp(), 0.0));
    let (t, sigma) = (0.7, 0.5);
    let g = semigroup_step(&f, t, &[0.0], sigma);
    let ap = a / (1.0 + 4.0 * a * sigma * t);
    let amp = (ap / a).sqrt();
    let want = GridField::from_fn(vec![grid], |v| c(amp * (-ap * v[0] * v[0]).exp(), 0.0));
    assert!(rel_field_diff(&g, &want) < 1e-10, "{}", rel_field_diff(&g, &want));
}

#[test]
fn semigroup_property() {
    for d in [1usize, 2] {
        let grid = VelocityGrid::new(d, 64, 10.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let f = random_smooth_field(vec![grid], &mut rng);
        let k: Vec<f64> = (0..d).map(|i| 0.8 - 0.3 * i as f64).collect();
        let sigma = 0.4;
        let (t1, t2) = (0.3, 0.55);
        let one = semigroup_step(&semigroup_step(&f, t1, &k, sigma), t2, &k, sigma);
        let two = semigroup_step(&f, t1 + t2, &k, sigma);
        assert!(
            rel_field_diff(&one, &two) < 1e-10,
            "d={d}: {}",
            rel_field_diff(&one, &two)
        );
    }
}

#[test]
fn semigroup_is_a_contraction() {
    let grid = VelocityGrid::new(2, 24, 6.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let f = random_smooth_field(vec![grid], &mut rng);
    let mut prev = f.l2_norm();
    for t in [0.2, 0.8, 2.0, 5.0] {
        let n = semigroup_step(&f, t, &[1.0, -0.5], 0.2).l2_norm();
        assert!(n <= prev * (1.0 + 1e-12), "t={t}");
        prev = n;
    }
}

// ---------------------------------------------------------------------------
// Resolvents
// ---------------------------------------------------------------------------

#[test]
fn resolvent_green_constant_k_zero() {
    let grid = VelocityGrid::new(1, 16, 6.0).unwrap();
    let f = GridField::from_fn(vec![grid], |_| c(1.0, 0.0));
    let omega = c(0.8, 0.3);
    let p = ResolventParams::new(omega, vec![0.0], 0.5).unwrap();
    let r = resolvent_green(&p, &f).unwrap();
    let want = 1.0 / omega;
    for v in &r.values {
        assert!((v - want).norm() < 1e-9, "{v} vs {want}");
    }
}

#[test]
fn resolvent_green_matches_direct_small_1d() {
    // 8-point one-dimensional grid.
    let grid = VelocityGrid::new(1, 8, 3.0).unwrap();
    // Band-limited data vanishing to second order at the periodic wrap.
    let f = GridField::from_fn(vec![grid], |v| {
        let th = std::f64::consts::PI * v[0] / 3.0;
        c((1.0 + th.cos()).powi(2), 0.0)
    });
    // Gentle transport and diffusion: on 8 points the heat kernel must not
    // wrap around the periodic box within the damping time.
    let p = ResolventParams::new(c(2.0, 0.4), vec![0.002], 0.02).unwrap();
    let green = resolvent_green(&p, &f).unwrap();
    let direct = resolvent_direct(&p, &f).unwrap();
    let diff = rel_field_diff(&green, &direct);
    assert!(diff < 1e-6, "green vs direct: {diff}");
}

#[test]
fn resolvent_green_matches_direct_pair_slots() {
    // Two one-dimensional slots with opposite wavenumbers, as in the pair
    // resolvent of the hat operator.
    let g0 = VelocityGrid::new(1, 64, 10.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let f = random_smooth_field(vec![g0, g0], &mut rng);
    let k = 0.4;
    let p = ResolventParams::new(c(0.9, -0.2), vec![-k, k], 0.2).unwrap();
    let green = resolvent_green(&p, &f).unwrap();
    let direct = resolvent_direct(&p, &f).unwrap();
    let diff = rel_field_diff(&green, &direct);
    assert!(diff < 1e-6, "green vs direct (pair): {diff}");
}

#[test]
fn resolvent_identity() {
    let grid = VelocityGrid::new(1, 64, 10.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let f = random_smooth_field(vec![grid], &mut rng);
    let (w1, w2) = (c(1.0, 0.2), c(2.5, -0.4));
    let p1 = ResolventParams::new(w1, vec![0.3], 0.2).unwrap();
    let p2 = ResolventParams::new(w2, vec![0.3], 0.2).unwrap();
    let r2f = resolvent_green(&p2, &f).unwrap();
    let lhs = {
        let mut x = resolvent_green(&p1, &r2f).unwrap();
        x.scale(w2 - w1);
        x
    };
    let mut rhs = resolvent_green(&p1, &f).unwrap();
    rhs.add_scaled(&r2f, c(-1.0, 0.0));
    let mut d = lhs.clone();
    d.add_scaled(&rhs, c(-1.0, 0.0));
    let rel = d.l2_norm() / rhs.l2_norm();
    assert!(rel < 1e-6, "resolvent identity residual {rel}");
}

#[test]
fn resolvent_direct_dissipativity() {
    // For x solving (ω + ikv − σΔ)x = f: Re⟨x,f⟩ = Reω‖x‖² + σ‖∇x‖².
    let grid = VelocityGrid::new(2, 16, 5.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let f = random_smooth_field(vec![grid], &mut rng);
    let p = ResolventParams::new(c(0.7, 0.5), vec![0.6, -0.2], 0.4).unwrap();
    let x = resolvent_direct(&p, &f).unwrap();
    let lhs = x.inner(&f).re;
    let rhs = p.omega.re * x.l2_norm().powi(2) + p.sigma * x.gradient_norm_sqr();
    assert!(
        (lhs - rhs).abs() < 1e-8 * rhs.abs().max(1.0),
        "{lhs} vs {rhs}"
    );
}

#[test]
fn resolvent_direct_rejects_oversized_grids() {
    let grid = VelocityGrid::new(2, 512, 6.0).unwrap();
    let f = GridField::zeros(vec![grid]);
    let p = ResolventParams::new(c(1.0, 0.0), vec![0.1, 0.0], 0.5).unwrap();
    assert!(resolvent_direct(&p, &f).is_err());
}

// ---------------------------------------------------------------------------
// Creation / annihilation
// ---------------------------------------------------------------------------

#[test]
fn s_operators_vanish_for_zero_potential() {
    let grid = VelocityGrid::new(1, 16, 6.0).unwrap();
    let mut p = Potential::default_gaussian(1);
    p.profile = FourierProfile::Zero;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let g0 = random_smooth_field(vec![grid], &mut rng);
    let h = apply_s_minus(&g0, &[0.5], &p, 1.0, &grid).unwrap();
    assert_eq!(h.l2_norm(), 0.0);
    let g1 = random_smooth_field(vec![grid, grid], &mut rng);
    let out = apply_s_plus(&[(vec![0.5], 1.0, g1)], &p, 1.0).unwrap();
    assert_eq!(out.l2_norm(), 0.0);
}

#[test]
fn s_operators_discrete_adjointness() {
    // ⟨h₀, Ŝ⁺g₁⟩ = Σ_k w/(2π)^d ⟨Ŝ⁻h₀(k), g₁(k)⟩ to 1e−10 relative.
    let d = 2;
    let grid = VelocityGrid::new(d, 12, 6.0).unwrap();
    let p = Potential::default_gaussian(d);
    let beta = 1.0;
    let kquad = PolarQuadrature::new(d, 3.0, 4, 6);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let h0 = random_smooth_field(vec![grid], &mut rng);
    let parts: Vec<(Vec<f64>, f64, GridField)> = kquad
        .nodes
        .iter()
        .map(|(k, w)| (k.clone(), *w, random_smooth_field(vec![grid, grid], &mut rng)))
        .collect();
    let lhs = h0.inner(&apply_s_plus(&parts, &p, beta).unwrap());
    let twopi_d = (2.0 * std::f64::consts::PI).powi(d as i32);
    let mut rhs = c(0.0, 0.0);
    for (k, w, g1) in &parts {
        let sm = apply_s_minus(&h0, k, &p, beta, &grid).unwrap();
        rhs += sm.inner(g1) * (w / twopi_d);
    }
    let rel = (lhs - rhs).norm() / rhs.norm();
    assert!(rel < 1e-10, "adjointness residual {rel}");
}

#[test]
fn s_plus_gaussian_closed_form() {
    // g₁ = e^{−|v₀|²} ⊗ √M(v₁): the v₁ integral is ∫M = 1 and the result is
    // (w/(2π)^d) V̂(k) · (−2 k·v₀) e^{−|v₀|²}.
    let d = 1;
    let grid = VelocityGrid::new(d, 48, 8.0).unwrap();
    let p = Potential::default_gaussian(d);
    let beta = 1.0;
    let k = vec![0.8];
    let sqm = sqrt_maxwellian_field(&grid, beta);
    let n1 = sqm.values.len();
    let mut g1 = GridField::zeros(vec![grid, grid]);
    let bump = GridField::from_fn(vec![grid], |v| c((-v[0] * v[0]).exp(), 0.0));
    for i0 in 0..n1 {
        for i1 in 0..n1 {
            g1.values[i0 * n1 + i1] = bump.values[i0] * sqm.values[i1].re;
        }
    }
    let w = 0.37;
    let out = apply_s_plus(&[(k.clone(), w, g1)], &p, beta).unwrap();
    let vh = p.vhat(0.8);
    let want = GridField::from_fn(vec![grid], |v| {
        c(
            w / (2.0 * std::f64::consts::PI) * vh * (-2.0 * k[0] * v[0]) * (-v[0] * v[0]).exp(),
            0.0,
        )
    });
    assert!(rel_field_diff(&out, &want) < 1e-8, "{}", rel_field_diff(&out, &want));
}

// ---------------------------------------------------------------------------
// Hat operator
// ---------------------------------------------------------------------------

fn hat_setup(d: usize, n_pts: usize) -> (VelocityGrid, Potential, PolarQuadrature, HatParams) {
    let grid = VelocityGrid::new(d, n_pts, 6.0).unwrap();
    let mut p = Potential::default_gaussian(d);
    p.k_max = 3.0;
    let kquad = PolarQuadrature::new(d, 3.0, 6, 8);
    let hp = HatParams {
        alpha: 0.4,
        t_n: 10.0,
        kappa: 1.0,
        big_n: 100.0,
        beta: 1.0,
        per_decade: 2,
        gauss_pts: 8,
    };
    (grid, p, kquad, hp)
}

#[test]
fn hat_vanishes_for_zero_potential() {
    let (grid, mut p, kquad, hp) = hat_setup(1, 16);
    p.profile = FourierProfile::Zero;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let g = random_smooth_field(vec![grid], &mut rng);
    let out = hat_apply(&g, &hp, &p, &kquad, &grid).unwrap();
    assert_eq!(out.l2_norm(), 0.0);
}

#[test]
fn hat_fast_path_matches_tensor_oracle() {
    // The separable evaluation must agree with the full (v₀,v₁) resolvent
    // evaluation of the definition.
    let (grid, p, _kq, hp) = hat_setup(1, 16);
    let kquad = PolarQuadrature::new(1, 3.0, 4, 1);
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let g = random_smooth_field(vec![grid], &mut rng);
    let fast = hat_apply(&g, &hp, &p, &kquad, &grid).unwrap();
    let slow = hat_apply_direct(&g, &hp, &p, &kquad, &grid).unwrap();
    let diff = rel_field_diff(&fast, &slow);
    assert!(diff < 1e-8, "fast vs tensor oracle: {diff}");
}

#[test]
fn hat_positivity_hundred_random_fields() {
    // Re⟨g, ◻g⟩ ≥ −1e−8 ‖∇g‖² across 100 random smooth fields.
    let (grid, p, kquad, hp) = hat_setup(2, 24);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = f64::INFINITY;
    for _ in 0..100 {
        let g = random_smooth_field(vec![grid], &mut rng);
        let boxed = hat_apply(&g, &hp, &p, &kquad, &grid).unwrap();
        let quad_form = g.inner(&boxed).re;
        let floor = g.gradient_norm_sqr();
        worst = worst.min(quad_form / floor);
        assert!(
            quad_form >= -1e-8 * floor,
            "positivity violated: {quad_form} with ‖∇g‖² = {floor}"
        );
    }
    assert!(worst.is_finite());
}

#[test]
fn hat_gradient_boundedness() {
    // Triangle-inequality bound with explicit constants from |k|-moments of
    // V̂² over the quadrature:
    //   ‖◻g‖ ≤ (Σ w V̂²|k|²/(2π)^d) (1/Reω) ‖∇²g‖
    //        + (Σ w V̂²|k|³ B_k/(2π)^d) ‖∇g‖,
    // with B_k = ∫ t e^{−tReω−σ|k|²t³/6} dt.
    let (grid, p, kquad, hp) = hat_setup(2, 24);
    let omega = hp.omega();
    let sigma = hp.sigma();
    let twopi_d = (2.0 * std::f64::consts::PI).powi(2);
    let ladder = time_ladder(omega.re, 0.0, 3, 12);
    let mut c2 = 0.0;
    let mut c1 = 0.0;
    for (k, w) in &kquad.nodes {
        let nk = k.iter().map(|x| x * x).sum::<f64>().sqrt();
        let vh2 = p.vhat(nk).powi(2);
        let bk: f64 = ladder
            .iter()
            .map(|&(t, wt)| wt * t * (-t * omega.re - sigma * nk * nk * t * t * t / 6.0).exp())
            .sum();
        c2 += w * vh2 * nk * nk / (twopi_d * omega.re);
        c1 += w * vh2 * nk * nk * nk * bk / twopi_d;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..5 {
        let g = random_smooth_field(vec![grid], &mut rng);
        let boxed = hat_apply(&g, &hp, &p, &kquad, &grid).unwrap();
        let lhs = boxed.l2_norm();
        let rhs = c2 * g.hessian_norm_sqr().sqrt() + c1 * g.gradient_norm_sqr().sqrt();
        assert!(lhs <= rhs * 1.05, "‖◻g‖ = {lhs} exceeds bound {rhs}");
    }
}

// ---------------------------------------------------------------------------
// Deformed velocity averages
// ---------------------------------------------------------------------------

#[test]
fn deformation_identity_1d_and_2d() {
    for (d, n_pts) in [(1usize, 32usize), (2, 24)] {
        let grid = VelocityGrid::new(d, n_pts, 6.0).unwrap();
        let mut k = vec![0.0; d];
        k[0] = 0.9;
        if d == 2 {
            k[1] = -0.4;
        }
        let (direct, deformed) =
            deformed_velocity_average(&k, 2.0, 2.0, 20.0, 1.0, &grid).unwrap();
        let rel = (direct - deformed).norm() / direct.norm();
        assert!(rel < 1e-6, "d={d}: {direct} vs {deformed} (rel {rel})");
    }
}

#[test]
fn deformation_bound_over_wavenumbers() {
    // |value|·|k| stays bounded on a logarithmic |k| grid, and the value
    // decays for large |k|.
    let grid = VelocityGrid::new(1, 48, 6.0).unwrap();
    let mut prods = Vec::new();
    let mut vals = Vec::new();
    for &ka in &[0.25, 0.5, 1.0, 2.0, 4.0] {
        let (direct, _) = deformed_velocity_average(&[ka], 2.0, 2.0, 20.0, 1.0, &grid).unwrap();
        prods.push(direct.norm() * ka);
        vals.push(direct.norm());
    }
    let cap = prods.iter().cloned().fold(0.0f64, f64::max);
    assert!(cap < 10.0, "|value|·|k| should stay O(1), got {cap}");
    assert!(
        vals.last().unwrap() < &(0.3 * vals[0]),
        "value must decay in |k|: {vals:?}"
    );
}

// ---------------------------------------------------------------------------
// Airy scaling
// ---------------------------------------------------------------------------

#[test]
fn airy_norm_large_eta_limit() {
    let eta = 100.0;
    let norm = airy_resolvent_norm(eta, 30.0, 2048).unwrap();
    assert!((eta * norm - 1.0).abs() < 0.03, "η‖R‖ = {}", eta * norm);
}

#[test]
fn airy_norm_small_eta_stable_under_domain_doubling() {
    let a = airy_resolvent_norm(1e-3, 30.0, 2048).unwrap();
    let b = airy_resolvent_norm(1e-3, 60.0, 4096).unwrap();
    assert!((a - b).abs() / b < 0.01, "{a} vs {b}");
    assert!(b.is_finite() && b > 0.0);
}

#[test]
fn airy_norm_monotone_in_eta() {
    let mut prev = f64::INFINITY;
    for eta in [1e-3, 1e-2, 0.1, 1.0, 10.0] {
        let n = airy_resolvent_norm(eta, 30.0, 2048).unwrap();
        assert!(n <= prev * (1.0 + 1e-4), "η={eta}: {n} after {prev}");
        prev = n;
    }
}

#[test]
fn airy_scaling_exponents() {
    // sup_ε ‖(ε + ik·v − (κ/N)Δ)⁻¹‖ ~ N^{1/3} |k|^{−2/3}.
    let n_list = [1e2, 1e3, 1e4, 1e5];
    let k_list = [0.5, 2.0, 8.0];
    let fit = airy_scaling_fit(&n_list, &k_list, 1.0).unwrap();
    assert!(
        (fit.exponent_n - 1.0 / 3.0).abs() < 0.05,
        "exponent_N = {}",
        fit.exponent_n
    );
    assert!(
        (fit.exponent_k + 2.0 / 3.0).abs() < 0.05,
        "exponent_k = {}",
        fit.exponent_k
    );
}

#[test]
fn airy_kappa_scaling() {
    // Doubling κ scales the saturated norm by 2^{−1/3}, within 2%.
    let fit1 = airy_scaling_fit(&[1e3, 1e4], &[1.0, 2.0], 1.0).unwrap();
    let fit2 = airy_scaling_fit(&[1e3, 1e4], &[1.0, 2.0], 2.0).unwrap();
    for (a, b) in fit1.norms.iter().zip(&fit2.norms) {
        let ratio = b.2 / a.2;
        let want = 2.0f64.powf(-1.0 / 3.0);
        assert!(
            (ratio - want).abs() / want < 0.02,
            "κ-scaling ratio {ratio} vs {want}"
        );
    }
}
