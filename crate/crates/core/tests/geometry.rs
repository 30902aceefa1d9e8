use kinlab_core::geometry::{
    common_positive_direction, d0_threshold, dot, integrability_scan, norm, normal_direction,
    positive_direction_rejection_oracle, pyramid_residual, random_unit_vector, simplex_volume,
    simplex_volume_oracle, standard_normal, wendel_probability, IntegrabilityConfig,
    IntegrabilityVerdict,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn gaussian_vertices(n: usize, d: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..d).map(|_| standard_normal(rng)).collect())
        .collect()
}

#[test]
fn volume_of_coordinate_simplex() {
    // conv(0, e₁, …, e_n) has volume 1/n!.
    for n in 1..=6 {
        let verts: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        let mut fact = 1.0;
        for k in 1..=n {
            fact *= k as f64;
        }
        let v = simplex_volume(&verts, true);
        assert!((v - 1.0 / fact).abs() < 1e-12, "n={n}: {v}");
    }
}

#[test]
fn volume_known_triangle() {
    // conv((1,0,0),(0,1,0),(0,0,1)) is an equilateral triangle of side √2,
    // area √3/2.
    let verts = vec![
        vec![1.0, 0.0, 0.0],
        vec![0.0, 1.0, 0.0],
        vec![0.0, 0.0, 1.0],
    ];
    let v = simplex_volume(&verts, false);
    assert!((v - 3.0f64.sqrt() / 2.0).abs() < 1e-12, "{v}");
}

#[test]
fn volume_matches_base_height_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for _ in 0..200 {
        let n = 1 + (standard_normal(&mut rng).abs() * 2.0) as usize % 5;
        let d = n + (standard_normal(&mut rng).abs() * 2.0) as usize % 3;
        let verts = gaussian_vertices(n, d, &mut rng);
        for include_origin in [true, false] {
            let a = simplex_volume(&verts, include_origin);
            let b = simplex_volume_oracle(&verts, include_origin);
            assert!(
                (a - b).abs() <= 1e-10 * a.abs().max(b.abs()).max(1e-30),
                "n={n} d={d} origin={include_origin}: {a} vs {b}"
            );
        }
    }
}

#[test]
fn volume_invariances() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for _ in 0..50 {
        let (n, d) = (4, 6);
        let verts = gaussian_vertices(n, d, &mut rng);
        let v = simplex_volume(&verts, true);

        // Scaling by λ multiplies the n-volume by λⁿ.
        let lam = 1.7;
        let scaled: Vec<Vec<f64>> = verts
            .iter()
            .map(|u| u.iter().map(|x| lam * x).collect())
            .collect();
        let vs = simplex_volume(&scaled, true);
        assert!((vs - lam.powi(n as i32) * v).abs() < 1e-10 * vs.max(1.0));

        // Permuting the vertices leaves the volume unchanged.
        let mut perm = verts.clone();
        perm.swap(0, 3);
        perm.swap(1, 2);
        assert!((simplex_volume(&perm, true) - v).abs() < 1e-12 * v.max(1.0));

        // Householder reflection is an isometry.
        let h = random_unit_vector(d, &mut rng);
        let reflected: Vec<Vec<f64>> = verts
            .iter()
            .map(|u| {
                let c = 2.0 * dot(u, &h);
                u.iter().zip(&h).map(|(x, y)| x - c * y).collect()
            })
            .collect();
        let vr = simplex_volume(&reflected, true);
        assert!((vr - v).abs() < 1e-10 * v.max(1.0), "{vr} vs {v}");
    }
}

#[test]
fn degenerate_simplices_report_zero_volume() {
    // Repeated vertex.
    let verts = vec![vec![1.0, 0.0], vec![1.0, 0.0]];
    assert_eq!(simplex_volume(&verts, true), 0.0);
    // Collinear with the origin.
    let verts = vec![vec![1.0, 1.0], vec![2.0, 2.0]];
    assert_eq!(simplex_volume(&verts, true), 0.0);
    // And the normal direction is unavailable for such configurations.
    assert!(normal_direction(&verts).is_err());
}

#[test]
fn pyramid_identity_thousand_random_simplices() {
    // u₁·o = n Vₙ / V_{n−1} to 1e−9 relative accuracy across 1000 random
    // simplices with n ≤ 6 vertices in dimension ≤ 8.
    let mut rng = ChaCha8Rng::seed_from_u64(0xBEEF);
    let mut worst = 0.0f64;
    let mut count = 0;
    while count < 1000 {
        let n = 1 + (rng_usize(&mut rng) % 6);
        let d = n + (rng_usize(&mut rng) % (9 - n));
        let verts = gaussian_vertices(n, d, &mut rng);
        match pyramid_residual(&verts) {
            Ok(r) => {
                worst = worst.max(r);
                count += 1;
            }
            Err(_) => continue, // degenerate draw; resample
        }
    }
    assert!(worst < 1e-9, "worst pyramid residual {worst:e}");
}

fn rng_usize(rng: &mut ChaCha8Rng) -> usize {
    use rand::Rng;
    rng.gen_range(0..usize::MAX / 2)
}

#[test]
fn normal_direction_has_equal_positive_dots() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..100 {
        let n = 2 + rng_usize(&mut rng) % 4;
        let d = n + rng_usize(&mut rng) % 3;
        let mut verts = gaussian_vertices(n, d, &mut rng);
        // Shift so the affine hull stays clear of the origin.
        for u in verts.iter_mut() {
            u[0] += 4.0;
        }
        let o = normal_direction(&verts).unwrap();
        assert!((norm(&o) - 1.0).abs() < 1e-12);
        let first = dot(&verts[0], &o);
        for u in &verts {
            assert!((dot(u, &o) - first).abs() < 1e-9 * first.abs().max(1.0));
        }
        assert!(first > 0.0, "orientation must make the common value positive");
    }
}

#[test]
fn common_positive_direction_obvious_cases() {
    // All vectors in an open half-space: a direction exists.
    let ks = vec![vec![1.0, 0.1], vec![1.0, -0.2], vec![0.8, 0.5]];
    let nu = common_positive_direction(&ks).expect("half-space family");
    assert!(ks.iter().all(|k| dot(&nu, k) > 0.0));

    // Antipodal pair: impossible.
    let ks = vec![vec![1.0, 0.0], vec![-1.0, 0.0]];
    assert!(common_positive_direction(&ks).is_none());

    // Origin strictly inside the convex hull of the directions: impossible.
    let ks = vec![
        vec![1.0, 0.0],
        vec![-0.5, 0.9],
        vec![-0.5, -0.9],
    ];
    assert!(common_positive_direction(&ks).is_none());

    // A zero vector can never have a strictly positive dot product.
    let ks = vec![vec![1.0, 0.0], vec![0.0, 0.0]];
    assert!(common_positive_direction(&ks).is_none());
}

#[test]
fn common_positive_direction_agrees_with_rejection_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut both = 0;
    for _ in 0..300 {
        let n = 2 + rng_usize(&mut rng) % 5;
        let d = 2 + rng_usize(&mut rng) % 3;
        let ks: Vec<Vec<f64>> = (0..n).map(|_| random_unit_vector(d, &mut rng)).collect();
        let fw = common_positive_direction(&ks);
        let oracle = positive_direction_rejection_oracle(&ks, 4000, &mut rng);
        // The oracle is one-sided: a hit certifies feasibility.
        if oracle.is_some() {
            assert!(
                fw.is_some(),
                "rejection sampling found a direction the solver missed: {ks:?}"
            );
            both += 1;
        }
        if let Some(nu) = &fw {
            assert!(ks.iter().all(|k| dot(nu, k) > 0.0), "unsound output");
        }
    }
    assert!(both > 50, "oracle should certify a healthy fraction of draws");
}

#[test]
fn wendel_closed_form_values() {
    // n ≤ d: always feasible.
    for d in 1..=6 {
        for n in 1..=d {
            assert!((wendel_probability(n, d) - 1.0).abs() < 1e-15);
        }
    }
    // Classical small cases.
    assert!((wendel_probability(3, 2) - 0.75).abs() < 1e-15);
    assert!((wendel_probability(4, 2) - 0.5).abs() < 1e-15);
    assert!((wendel_probability(4, 3) - 7.0 / 8.0).abs() < 1e-15);
    assert!((wendel_probability(5, 3) - 11.0 / 16.0).abs() < 1e-15);
}

#[test]
fn wendel_frequency_matches_probability() {
    // Empirical feasibility frequency over 10⁴ independent draws within 3σ
    // of the closed form.
    let trials = 10_000;
    for (n, d, seed) in [(3usize, 2usize, 1u64), (4, 3, 2), (5, 3, 3)] {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = wendel_probability(n, d);
        let mut hits = 0usize;
        for _ in 0..trials {
            let ks: Vec<Vec<f64>> = (0..n).map(|_| random_unit_vector(d, &mut rng)).collect();
            if common_positive_direction(&ks).is_some() {
                hits += 1;
            }
        }
        let freq = hits as f64 / trials as f64;
        let sigma = (p * (1.0 - p) / trials as f64).sqrt();
        assert!(
            (freq - p).abs() <= 3.0 * sigma,
            "(n,d)=({n},{d}): freq {freq} vs p {p} (3σ = {:.4})",
            3.0 * sigma
        );
    }
}

#[test]
fn integrability_verdicts_straddle_threshold() {
    // The simplex-power integral over the product of unit balls is finite
    // exactly for s > n − 1 − d; probe 0.2 on either side.
    let cfg = IntegrabilityConfig::default();
    for (n, d) in [(3usize, 4usize), (4, 5), (2, 2)] {
        let threshold = n as f64 - 1.0 - d as f64;
        let rows = integrability_scan(n, d, &[threshold + 0.2, threshold - 0.2], &cfg);
        assert_eq!(rows[0].verdict, IntegrabilityVerdict::Finite, "(n,d)=({n},{d}) above: ratio {}", rows[0].growth_ratio);
        assert_eq!(rows[1].verdict, IntegrabilityVerdict::Divergent, "(n,d)=({n},{d}) below: ratio {}", rows[1].growth_ratio);
        assert!(rows[0].estimate_fine.is_finite() && rows[0].estimate_fine > 0.0);
    }
}

#[test]
fn integrability_safely_inside_regime_is_stable() {
    // Far above the threshold the two cutoffs agree closely.
    let cfg = IntegrabilityConfig::default();
    let rows = integrability_scan(2, 2, &[0.0, 1.0], &cfg);
    for row in rows {
        assert_eq!(row.verdict, IntegrabilityVerdict::Finite);
        assert!((row.growth_ratio - 1.0).abs() < 0.1, "ratio {}", row.growth_ratio);
    }
}

#[test]
fn dimension_threshold_values() {
    assert_eq!(d0_threshold(1), 2);
    assert_eq!(d0_threshold(2), 8);
    assert_eq!(d0_threshold(3), 154);
    assert_eq!(d0_threshold(4), 182);
}
