use kinlab_core::landau::{
    c_s_constant, c_s_constant_oracle, diffusion_tensor, diffusion_tensor_origin_coefficient,
    dispersion_function, dispersion_function_oracle, kappa_threshold_linear,
    kappa_threshold_quadratic, lambda_v, lambda_v_oracle, landau_kernel,
    landau_kernel_bruteforce, landau_kernel_extrapolated, lenard_balescu_kernel, maxwellian,
    unit_ball_volume, unit_sphere_area, CollisionTensor, FourierProfile, Potential,
};

const PI: f64 = std::f64::consts::PI;

fn rel_diff(a: &CollisionTensor, b: &CollisionTensor) -> f64 {
    let scale = a
        .value
        .iter()
        .flatten()
        .map(|x| x.abs())
        .fold(0.0f64, f64::max)
        .max(1e-300);
    a.value
        .iter()
        .flatten()
        .zip(b.value.iter().flatten())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0f64, f64::max)
        / scale
}

#[test]
fn sphere_and_ball_constants() {
    assert!((unit_ball_volume(2) - PI).abs() < 1e-14);
    assert!((unit_ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-14);
    assert!((unit_sphere_area(2) - 2.0 * PI).abs() < 1e-14);
    assert!((unit_sphere_area(3) - 4.0 * PI).abs() < 1e-14);
}

#[test]
fn maxwellian_normalization() {
    // Riemann sum of M over a wide box ≈ 1.
    let beta = 1.3;
    let h = 0.05;
    let n = 400i64;
    let mass: f64 = (-n..n)
        .flat_map(|i| (-n..n).map(move |j| (i, j)))
        .map(|(i, j)| h * h * maxwellian(2, beta, &[h * i as f64, h * j as f64]))
        .sum();
    assert!((mass - 1.0).abs() < 1e-8, "{mass}");
}

#[test]
fn lambda_v_closed_form_gaussian_d3() {
    // For V̂ = e^{−|k|²} in d = 3: Λ_V = ω₂ π/(2π)³ ∫ r³ e^{−2r²} dr · |S²|/|S²|
    // reduces to 1/(64π).
    let p = Potential::default_gaussian(3);
    let lam = lambda_v(&p).unwrap();
    let want = 1.0 / (64.0 * PI);
    assert!((lam - want).abs() / want < 1e-12, "{lam} vs {want}");
    let oracle = lambda_v_oracle(&p).unwrap();
    assert!((lam - oracle).abs() / want < 1e-10, "{lam} vs oracle {oracle}");
}

#[test]
fn lambda_v_matches_oracle_d2() {
    let mut p = Potential::default_gaussian(2);
    p.profile = FourierProfile::Gaussian {
        amplitude: 0.7,
        alpha: 2.0,
    };
    p.k_max = 6.0;
    let lam = lambda_v(&p).unwrap();
    let oracle = lambda_v_oracle(&p).unwrap();
    assert!((lam - oracle).abs() / oracle < 1e-10, "{lam} vs {oracle}");
    assert!(lam > 0.0);
}

#[test]
fn c_s_constants_match_oracle_and_decrease_with_narrow_potentials() {
    let p = Potential::default_gaussian(3);
    for s in 0..=3 {
        let a = c_s_constant(&p, s).unwrap();
        let b = c_s_constant_oracle(&p, s).unwrap();
        assert!((a - b).abs() / b < 1e-10, "s={s}: {a} vs {b}");
        assert!(a > 0.0);
    }
}

#[test]
fn kappa_thresholds_gaussian_closed_forms() {
    // ∫|k|V̂ dk = |S²| ∫ r³ e^{−r²} dr = 4π · 1/2 = 2π, and the quadratic
    // variant replaces V̂ by V̂²: 4π ∫ r³ e^{−2r²} dr = π/2.
    let p = Potential::default_gaussian(3);
    let lin = kappa_threshold_linear(&p).unwrap();
    let quad = kappa_threshold_quadratic(&p).unwrap();
    assert!((lin - 2.0 * PI).abs() / (2.0 * PI) < 1e-12, "{lin}");
    assert!((quad - PI / 2.0).abs() / (PI / 2.0) < 1e-12, "{quad}");
}

#[test]
fn landau_kernel_structure() {
    let p = Potential::default_gaussian(3);
    let w = vec![0.4, -1.1, 0.3];
    let b = landau_kernel(&w, &p).unwrap();
    // Symmetric, PSD, annihilates w, eigenvalues {0, Λ/|w|, Λ/|w|}.
    assert!(b.max_asymmetry() < 1e-15);
    let bw = b.apply(&w);
    let nw: f64 = w.iter().map(|x| x * x).sum::<f64>().sqrt();
    assert!(bw.iter().map(|x| x.abs()).fold(0.0f64, f64::max) < 1e-15);
    let eigs = b.eigenvalues();
    let lam = lambda_v(&p).unwrap();
    assert!(eigs[0].abs() < 1e-15);
    assert!((eigs[1] - lam / nw).abs() < 1e-14);
    assert!((eigs[2] - lam / nw).abs() < 1e-14);
    // Homogeneity of degree −1.
    let w2: Vec<f64> = w.iter().map(|x| 2.0 * x).collect();
    let b2 = landau_kernel(&w2, &p).unwrap();
    for i in 0..3 {
        for j in 0..3 {
            assert!((b2.value[i][j] - 0.5 * b.value[i][j]).abs() < 1e-15);
        }
    }
    assert!(landau_kernel(&[0.0, 0.0, 0.0], &p).is_err());
}

#[test]
fn landau_kernel_bruteforce_converges_to_closed_form_d3() {
    // Criterion check: closed form vs regularized brute force within 1% at
    // five relative velocities in d = 3.
    let p = Potential::default_gaussian(3);
    let ws = [
        vec![1.0, 0.0, 0.0],
        vec![0.3, 0.7, -0.2],
        vec![-1.5, 0.4, 0.9],
        vec![0.05, -0.12, 0.2],
        vec![2.5, 2.5, -1.0],
    ];
    let deltas = [0.1, 0.05, 0.025];
    for w in &ws {
        let exact = landau_kernel(w, &p).unwrap();
        let brute = landau_kernel_extrapolated(w, &p, &deltas).unwrap();
        let diff = rel_diff(&exact, &brute);
        assert!(diff < 0.01, "w={w:?}: relative deviation {diff}");
    }
}

#[test]
fn landau_kernel_bruteforce_regularization_ladder_is_monotone_in_accuracy() {
    let p = Potential::default_gaussian(3);
    let w = vec![0.6, -0.3, 0.8];
    let exact = landau_kernel(&w, &p).unwrap();
    let e1 = rel_diff(&exact, &landau_kernel_bruteforce(&w, &p, 0.4).unwrap());
    let e2 = rel_diff(&exact, &landau_kernel_bruteforce(&w, &p, 0.1).unwrap());
    assert!(e2 < e1, "shrinking the width must improve accuracy: {e1} vs {e2}");
    assert!(e2 < 0.05, "{e2}");
}

#[test]
fn landau_kernel_bruteforce_converges_d2() {
    let p = Potential::default_gaussian(2);
    let w = vec![0.8, -0.5];
    let exact = landau_kernel(&w, &p).unwrap();
    let brute = landau_kernel_extrapolated(&w, &p, &[0.1, 0.05, 0.025]).unwrap();
    let diff = rel_diff(&exact, &brute);
    assert!(diff < 0.01, "relative deviation {diff}");
}

#[test]
fn diffusion_tensor_origin_is_isotropic() {
    let p = Potential::default_gaussian(2);
    let beta = 1.0;
    let a0 = diffusion_tensor(&[0.0, 0.0], &p, beta).unwrap();
    let c = diffusion_tensor_origin_coefficient(&p, beta).unwrap();
    assert!(a0.max_asymmetry() < 1e-12);
    for i in 0..2 {
        for j in 0..2 {
            let want = if i == j { c } else { 0.0 };
            assert!(
                (a0.value[i][j] - want).abs() < 1e-8 * c,
                "A₀(0)[{i}][{j}] = {} vs {want}",
                a0.value[i][j]
            );
        }
    }
}

#[test]
fn diffusion_tensor_is_axisymmetric_and_positive() {
    let p = Potential::default_gaussian(2);
    let beta = 1.0;
    let v = vec![0.9, 0.0];
    let a = diffusion_tensor(&v, &p, beta).unwrap();
    // v along the first axis: the tensor must be diagonal in that frame and
    // strictly positive definite.
    assert!(a.value[0][1].abs() < 1e-9 * a.trace());
    assert!(a.min_eigenvalue() > 0.0);

    // Rotation equivariance: A₀(Rv) = R A₀(v) Rᵀ.
    let th = 0.7f64;
    let (c, s) = (th.cos(), th.sin());
    let rv = vec![c * v[0] - s * v[1], s * v[0] + c * v[1]];
    let ar = diffusion_tensor(&rv, &p, beta).unwrap();
    let rot = [[c, -s], [s, c]];
    let mut want = vec![vec![0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    want[i][j] += rot[i][k] * a.value[k][l] * rot[j][l];
                }
            }
        }
    }
    let scale = a.trace();
    for i in 0..2 {
        for j in 0..2 {
            assert!(
                (ar.value[i][j] - want[i][j]).abs() < 1e-6 * scale,
                "equivariance failure at [{i}][{j}]"
            );
        }
    }
}

#[test]
fn dispersion_function_matches_contour_oracle() {
    let p = Potential::default_gaussian(2);
    let beta = 1.0;
    for (k, z) in [
        (vec![1.0, 0.0], 0.3),
        (vec![0.5, 0.5], -0.4),
        (vec![2.0, -1.0], 1.5),
        (vec![0.2, 0.1], 0.0),
    ] {
        let (pr, pi) = dispersion_function(&k, z, &p, beta).unwrap();
        let (or, oi) = dispersion_function_oracle(&k, z, &p, beta).unwrap();
        assert!(
            (pr - or).abs() < 1e-4 && (pi - oi).abs() < 1e-4,
            "k={k:?} z={z}: ({pr},{pi}) vs oracle ({or},{oi})"
        );
    }
}

#[test]
fn dispersion_function_limits() {
    let beta = 1.0;
    // No potential: ε ≡ 1.
    let mut p = Potential::default_gaussian(2);
    p.profile = FourierProfile::Zero;
    assert_eq!(
        dispersion_function(&[1.0, 0.0], 0.5, &p, beta).unwrap(),
        (1.0, 0.0)
    );
    // At z = 0 the boundary term vanishes (M₁'(0) = 0) and the principal
    // value is strictly positive: ∫ M₁'(u)/(−u) du = ∫ β M₁ du = β·1 > 0,
    // so ε(k, 0) = 1 + β V̂(k) > 1.
    let p = Potential::default_gaussian(2);
    let (er, ei) = dispersion_function(&[1.0, 0.0], 0.0, &p, beta).unwrap();
    let want = 1.0 + beta * p.vhat(1.0);
    assert!((er - want).abs() < 1e-10, "{er} vs {want}");
    assert!(ei.abs() < 1e-15);
    // k = 0 is rejected.
    assert!(dispersion_function(&[0.0, 0.0], 0.1, &p, beta).is_err());
}

#[test]
fn lenard_balescu_reduces_to_landau_without_screening() {
    let mut p = Potential::default_gaussian(2);
    p.n_r = 32;
    let v = vec![0.2, -0.1];
    let w = vec![0.7, 0.4];
    let lb = lenard_balescu_kernel(&v, &w, &p, 1.0, 0.05, false).unwrap();
    let bf = landau_kernel_bruteforce(&w, &p, 0.05).unwrap();
    let mut lb_cmp = lb.clone();
    lb_cmp.at = w.clone();
    assert!(rel_diff(&lb_cmp, &bf) < 1e-12);
}

#[test]
fn lenard_balescu_screening_reduces_small_wavenumber_weight() {
    // With screening on, |ε|² ≥ 1 at z = 0-like arguments suppresses the
    // kernel relative to bare Landau; the effect is small for this weak
    // potential but strictly nonzero and sign-definite on the trace.
    let mut p = Potential::default_gaussian(2);
    p.n_r = 32;
    let v = vec![0.0, 0.0];
    let w = vec![0.7, 0.4];
    let bare = lenard_balescu_kernel(&v, &w, &p, 1.0, 0.05, false).unwrap();
    let scr = lenard_balescu_kernel(&v, &w, &p, 1.0, 0.05, true).unwrap();
    assert!(scr.max_asymmetry() < 1e-12);
    assert!(scr.trace() > 0.0);
    assert!(
        scr.trace() < bare.trace(),
        "screening at v = 0 must damp the collision rate: {} vs {}",
        scr.trace(),
        bare.trace()
    );
    // And the tensors stay within a modest factor of each other.
    assert!(scr.trace() > 0.2 * bare.trace());
}
