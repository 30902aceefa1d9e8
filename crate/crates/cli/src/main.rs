//! kinlab: command-line driver for the kinetic-hierarchy laboratory.
//!
//! Subcommands cover diagram combinatorics, Landau coefficients, resolvent
//! oracles, the truncated-hierarchy experiment, the geometric lemmas, and
//! the acceptance audit. Every run writes a `manifest.json` into its output
//! directory, success or failure, so experiment provenance is always on disk.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use kinlab_cli::config::HierarchyRunConfig;
use kinlab_cli::persist::{resolve_out_dir, write_atomic, CsvTable, RunManifest};
use kinlab_cli::suite;
use kinlab_core::combinatorics::{
    admissible_closure, bad_index_audit, boundary, remainder_catalog, AuditEngine,
};
use kinlab_core::geometry::{
    integrability_scan, pyramid_residual, standard_normal, IntegrabilityConfig,
    IntegrabilityVerdict,
};
use kinlab_core::hierarchy::{
    convergence_study, default_initial_data, run_hierarchy, HierarchyConfig,
};
use kinlab_core::landau::{
    kappa_threshold_linear, kappa_threshold_quadratic, lambda_v, landau_kernel,
    landau_kernel_extrapolated, Potential,
};
use kinlab_core::spectral::{
    airy_scaling_fit, resolvent_direct, resolvent_green, GridField, ResolventParams,
    VelocityGrid,
};

#[derive(Parser)]
#[command(name = "kinlab", version, about = "Kinetic-hierarchy laboratory driver")]
struct Cli {
    /// Output directory (default: $KINLAB_OUT/<subcommand>, else ./kinlab-out/<subcommand>).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Global cap on worker threads. Orchestration is single-threaded and the
    /// numerical kernels run on one core; values > 1 are accepted but unused.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate and audit collision-sign diagrams.
    Diagrams(DiagramsArgs),
    /// Landau collision coefficients and kernel cross-checks.
    Landau(LandauArgs),
    /// Resolvent oracles and Airy-layer scaling.
    Resolvent(ResolventArgs),
    /// Truncated-hierarchy runs and the kinetic-limit convergence study.
    Hierarchy(HierarchyArgs),
    /// Simplex-volume identities and integrability scans.
    Geometry(GeometryArgs),
    /// Run the acceptance suite; exit 0 iff all requested checks pass.
    Audit(AuditArgs),
}

#[derive(Args)]
struct DiagramsArgs {
    /// Complexity cap m₀ on simultaneously alive background particles.
    #[arg(long, default_value_t = 2)]
    m0: usize,
    /// Length budget K of the generating set (closure members reach K + m₀).
    #[arg(long, default_value_t = 3)]
    max_len: usize,
    /// Print the admissible closure as JSON on stdout.
    #[arg(long)]
    enumerate: bool,
    /// Run the exhaustive bad-index audit over the closure and its histories.
    #[arg(long)]
    audit: bool,
}

#[derive(Args)]
struct LandauArgs {
    /// Space dimension of the kernel check.
    #[arg(long, default_value_t = 3)]
    d: usize,
    /// Number of sampled relative velocities w.
    #[arg(long, default_value_t = 5)]
    samples: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

#[derive(Args)]
struct ResolventArgs {
    /// Also fit the Airy-layer scaling exponents (slower).
    #[arg(long)]
    airy: bool,
    #[arg(long, default_value_t = 1.0)]
    kappa: f64,
}

#[derive(Args)]
struct HierarchyArgs {
    /// TOML run configuration; defaults are used when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Dotted-path overrides, e.g. --set potential.n_r=4 (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
    /// Integrate a single trajectory at this N instead of the full study.
    #[arg(long)]
    single: Option<f64>,
}

#[derive(Args)]
struct GeometryArgs {
    #[arg(long, default_value_t = 0xBEEF)]
    seed: u64,
    /// Random simplices for the pyramid-identity residual table.
    #[arg(long, default_value_t = 100)]
    simplices: usize,
    /// Monte-Carlo samples per integrability estimate.
    #[arg(long, default_value_t = 100_000)]
    mc_samples: usize,
}

#[derive(Args)]
struct AuditArgs {
    /// Combinatorial audits and closed-form checks only.
    #[arg(long)]
    quick: bool,
    /// Explicit criterion numbers (1–13) to run instead of the full suite.
    #[arg(long, value_delimiter = ',')]
    criteria: Vec<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads == 0 {
        eprintln!("error: --threads must be ≥ 1");
        return ExitCode::FAILURE;
    }
    let (name, config) = describe(&cli.command);
    let out_dir = match resolve_out_dir(cli.out.as_deref(), name) {
        Ok(d) => d,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::FAILURE;
        }
    };
    let mut manifest = RunManifest::new(name, config);
    let start = Instant::now();
    let run = match &cli.command {
        Command::Diagrams(a) => cmd_diagrams(a, &out_dir, &mut manifest),
        Command::Landau(a) => cmd_landau(a, &out_dir, &mut manifest),
        Command::Resolvent(a) => cmd_resolvent(a, &out_dir, &mut manifest),
        Command::Hierarchy(a) => cmd_hierarchy(a, &out_dir, &mut manifest),
        Command::Geometry(a) => cmd_geometry(a, &out_dir, &mut manifest),
        Command::Audit(a) => cmd_audit(a, &out_dir, &mut manifest),
    };
    let seconds = start.elapsed().as_secs_f64();
    manifest.success = run.is_ok();
    if let Err(e) = &run {
        manifest.error = Some(format!("{e:#}"));
    }
    manifest.stage("total", seconds, Vec::new());
    if let Err(e) = manifest.write(&out_dir) {
        eprintln!("error: {e:#}");
        return ExitCode::FAILURE;
    }
    match run {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

/// Subcommand name and config echo for the manifest.
fn describe(cmd: &Command) -> (&'static str, serde_json::Value) {
    use serde_json::json;
    match cmd {
        Command::Diagrams(a) => (
            "diagrams",
            json!({"m0": a.m0, "max_len": a.max_len, "enumerate": a.enumerate, "audit": a.audit}),
        ),
        Command::Landau(a) => (
            "landau",
            json!({"d": a.d, "samples": a.samples, "seed": a.seed}),
        ),
        Command::Resolvent(a) => ("resolvent", json!({"airy": a.airy, "kappa": a.kappa})),
        Command::Hierarchy(a) => (
            "hierarchy",
            json!({"config": a.config.as_ref().map(|p| p.display().to_string()),
                   "set": a.sets, "single": a.single}),
        ),
        Command::Geometry(a) => (
            "geometry",
            json!({"seed": a.seed, "simplices": a.simplices, "mc_samples": a.mc_samples}),
        ),
        Command::Audit(a) => ("audit", json!({"quick": a.quick, "criteria": a.criteria})),
    }
}

fn record_output(manifest: &mut RunManifest, path: &std::path::Path) {
    manifest.outputs.push(path.display().to_string());
}

// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct DiagramJson {
    signs: Vec<i8>,
    m: usize,
}

#[derive(Serialize)]
struct ClosureJson {
    m0: usize,
    max_len: usize,
    count: usize,
    abstracts: Vec<DiagramJson>,
    boundary: Vec<DiagramJson>,
    remainder_counts_by_level: Vec<u128>,
}

fn cmd_diagrams(
    a: &DiagramsArgs,
    out_dir: &std::path::Path,
    manifest: &mut RunManifest,
) -> Result<()> {
    anyhow::ensure!(a.m0 >= 1, "m0: must be ≥ 1");
    let t0 = Instant::now();
    let omega = admissible_closure(a.m0, a.max_len);
    let bdry = boundary(&omega, a.m0).context("closure unexpectedly not admissible")?;
    let cat = remainder_catalog(&omega, a.m0).context("closure rejected by the catalog")?;
    let payload = ClosureJson {
        m0: a.m0,
        max_len: a.max_len,
        count: omega.total_len(),
        abstracts: omega
            .members()
            .into_iter()
            .map(|ab| DiagramJson { signs: ab.signs, m: ab.m })
            .collect(),
        boundary: bdry
            .by_degree
            .iter()
            .enumerate()
            .flat_map(|(m, set)| set.iter().map(move |s| DiagramJson { signs: s.clone(), m }))
            .collect(),
        remainder_counts_by_level: (0..a.m0).map(|m| cat.diagram_count_at_level(m)).collect(),
    };
    let text = serde_json::to_string_pretty(&payload)?;
    if a.enumerate {
        println!("{text}");
    }
    let path = out_dir.join("closure.json");
    write_atomic(&path, text.as_bytes())?;
    record_output(manifest, &path);
    manifest.stage(
        "closure",
        t0.elapsed().as_secs_f64(),
        vec![("abstracts".into(), payload.count.to_string())],
    );

    if a.audit {
        let t1 = Instant::now();
        let report = bad_index_audit(a.m0, a.max_len, AuditEngine::StateSpace)
            .map_err(|e| anyhow::anyhow!("{e}"))?;
        let mut table =
            CsvTable::new(&["length", "degree", "histories", "max_bad", "bound_times_4"]);
        for row in &report.rows {
            table.push(vec![
                row.abstr.len() as f64,
                row.abstr.m as f64,
                row.history_count as f64,
                row.max_bad.map_or(-1.0, |b| b as f64),
                row.bound_times_4 as f64,
            ]);
        }
        let path = out_dir.join("audit.csv");
        table.write(&path)?;
        record_output(manifest, &path);
        manifest.stage(
            "audit",
            t1.elapsed().as_secs_f64(),
            vec![
                ("histories".into(), report.histories_total.to_string()),
                ("violations".into(), report.violations.len().to_string()),
            ],
        );
        anyhow::ensure!(
            report.passed(),
            "bad-index audit found {} violations",
            report.violations.len()
        );
        println!(
            "audit: {} histories, 0 violations",
            report.histories_total
        );
    }
    Ok(())
}

fn cmd_landau(
    a: &LandauArgs,
    out_dir: &std::path::Path,
    manifest: &mut RunManifest,
) -> Result<()> {
    let p = Potential::default_gaussian(a.d);
    let lam = lambda_v(&p).map_err(|e| anyhow::anyhow!("{e}"))?;
    let mut diagnostics = vec![("lambda_v".into(), format!("{lam}"))];
    if a.d == 2 {
        let lin = kappa_threshold_linear(&p).map_err(|e| anyhow::anyhow!("{e}"))?;
        let quad = kappa_threshold_quadratic(&p).map_err(|e| anyhow::anyhow!("{e}"))?;
        diagnostics.push(("kappa_threshold_linear".into(), format!("{lin}")));
        diagnostics.push(("kappa_threshold_quadratic".into(), format!("{quad}")));
    }

    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let mut table = CsvTable::new(&["sample", "norm_w", "rel_error"]);
    let mut worst = 0.0f64;
    for i in 0..a.samples {
        let w: Vec<f64> = (0..a.d)
            .map(|_| 0.3 + 1.7 * standard_normal(&mut rng).abs())
            .collect();
        let nw = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        let exact = landau_kernel(&w, &p).map_err(|e| anyhow::anyhow!("{e}"))?;
        let approx = landau_kernel_extrapolated(&w, &p, &[0.1, 0.05, 0.025])
            .map_err(|e| anyhow::anyhow!("{e}"))?;
        let mut num = 0.0f64;
        let mut den = 0.0f64;
        for r in 0..a.d {
            for c in 0..a.d {
                num = num.max((exact.value[r][c] - approx.value[r][c]).abs());
                den = den.max(exact.value[r][c].abs());
            }
        }
        let rel = num / den;
        worst = worst.max(rel);
        table.push(vec![i as f64, nw, rel]);
    }
    let path = out_dir.join("kernel_check.csv");
    table.write(&path)?;
    record_output(manifest, &path);
    diagnostics.push(("worst_rel_error".into(), format!("{worst}")));
    manifest.stage("kernel", t0.elapsed().as_secs_f64(), diagnostics);
    println!("landau: worst kernel extrapolation error {worst:.3e} over {} samples", a.samples);
    Ok(())
}

fn cmd_resolvent(
    a: &ResolventArgs,
    out_dir: &std::path::Path,
    manifest: &mut RunManifest,
) -> Result<()> {
    let t0 = Instant::now();
    let mut table = CsvTable::new(&["case", "unknowns", "rel_diff"]);

    let grid = VelocityGrid::new(1, 8, 3.0).map_err(|e| anyhow::anyhow!("{e}"))?;
    let f = GridField::from_fn(vec![grid], |v| {
        let th = std::f64::consts::PI * v[0] / 3.0;
        Complex64::new((1.0 + th.cos()).powi(2), 0.0)
    });
    let p = ResolventParams::new(Complex64::new(2.0, 0.4), vec![0.002], 0.02)
        .map_err(|e| anyhow::anyhow!("{e}"))?;
    let e1 = rel_field_diff(
        &resolvent_green(&p, &f).map_err(|e| anyhow::anyhow!("{e}"))?,
        &resolvent_direct(&p, &f).map_err(|e| anyhow::anyhow!("{e}"))?,
    );
    table.push(vec![1.0, f.values.len() as f64, e1]);

    let g0 = VelocityGrid::new(1, 64, 10.0).map_err(|e| anyhow::anyhow!("{e}"))?;
    let f2 = GridField::from_fn(vec![g0.clone(), g0], |v| {
        Complex64::new(
            (-0.5 * (v[0] * v[0] + v[1] * v[1])).exp() * (1.0 + 0.3 * v[0] - 0.2 * v[1]),
            0.1 * (-0.5 * (v[0] * v[0] + v[1] * v[1])).exp() * v[0] * v[1],
        )
    });
    let p2 = ResolventParams::new(Complex64::new(0.9, -0.2), vec![-0.4, 0.4], 0.2)
        .map_err(|e| anyhow::anyhow!("{e}"))?;
    let e2 = rel_field_diff(
        &resolvent_green(&p2, &f2).map_err(|e| anyhow::anyhow!("{e}"))?,
        &resolvent_direct(&p2, &f2).map_err(|e| anyhow::anyhow!("{e}"))?,
    );
    table.push(vec![2.0, f2.values.len() as f64, e2]);

    let path = out_dir.join("resolvent_check.csv");
    table.write(&path)?;
    record_output(manifest, &path);
    manifest.stage(
        "green_vs_direct",
        t0.elapsed().as_secs_f64(),
        vec![("worst_rel_diff".into(), format!("{}", e1.max(e2)))],
    );
    println!("resolvent: Green vs direct {:.3e} (1-d), {:.3e} (pair slots)", e1, e2);

    if a.airy {
        let t1 = Instant::now();
        let fit = airy_scaling_fit(&[1e2, 1e3, 1e4, 1e5], &[0.5, 2.0, 8.0], a.kappa)
            .map_err(|e| anyhow::anyhow!("{e}"))?;
        let mut t = CsvTable::new(&["exponent_n", "exponent_k"]);
        t.push(vec![fit.exponent_n, fit.exponent_k]);
        let path = out_dir.join("airy_fit.csv");
        t.write(&path)?;
        record_output(manifest, &path);
        manifest.stage(
            "airy",
            t1.elapsed().as_secs_f64(),
            vec![
                ("exponent_n".into(), format!("{}", fit.exponent_n)),
                ("exponent_k".into(), format!("{}", fit.exponent_k)),
            ],
        );
        println!(
            "airy: fitted exponents {:.4} in N, {:.4} in |k|",
            fit.exponent_n, fit.exponent_k
        );
    }
    Ok(())
}

fn rel_field_diff(a: &GridField, b: &GridField) -> f64 {
    let mut diff = a.clone();
    diff.add_scaled(b, Complex64::new(-1.0, 0.0));
    diff.l2_norm() / b.l2_norm().max(1e-300)
}

fn cmd_hierarchy(
    a: &HierarchyArgs,
    out_dir: &std::path::Path,
    manifest: &mut RunManifest,
) -> Result<()> {
    let cfg = HierarchyRunConfig::load(a.config.as_deref(), &a.sets)?;
    manifest.config = serde_json::to_value(&cfg)?;

    if let Some(big_n) = a.single {
        let t0 = Instant::now();
        let hcfg: HierarchyConfig = cfg.hierarchy_config(big_n).map_err(|e| anyhow::anyhow!("{e}"))?;
        let gdata = default_initial_data(&hcfg.g0_grid, hcfg.beta);
        let traj =
            run_hierarchy(&hcfg, &gdata, cfg.n_records).map_err(|e| anyhow::anyhow!("{e}"))?;
        let mut table = CsvTable::new(&["tau", "energy"]);
        for (t, e) in traj.taus.iter().zip(&traj.energies) {
            table.push(vec![*t, *e]);
        }
        let path = out_dir.join("energy.csv");
        table.write(&path)?;
        record_output(manifest, &path);
        manifest.stage(
            "single_run",
            t0.elapsed().as_secs_f64(),
            vec![
                ("big_n".into(), format!("{big_n}")),
                ("steps".into(), traj.n_steps.to_string()),
                ("dt".into(), format!("{}", traj.dt)),
            ],
        );
        println!(
            "hierarchy: N = {big_n}, {} steps, energy {} → {}",
            traj.n_steps,
            traj.energies.first().unwrap(),
            traj.energies.last().unwrap()
        );
        return Ok(());
    }

    let t0 = Instant::now();
    let make = |big_n: f64| cfg.hierarchy_config(big_n).expect("validated config");
    let study = convergence_study(&cfg.n_list, &make, cfg.n_records, cfg.fp_dtau)
        .map_err(|e| anyhow::anyhow!("{e}"))?;
    let mut table = CsvTable::new(&["big_n", "weighted_error", "tail_bound"]);
    for e in &study.entries {
        table.push(vec![e.big_n, e.weighted_error, e.tail_bound]);
    }
    let path = out_dir.join("convergence.csv");
    table.write(&path)?;
    record_output(manifest, &path);
    manifest.stage(
        "convergence_study",
        t0.elapsed().as_secs_f64(),
        vec![("fitted_rate".into(), format!("{}", study.rate))],
    );
    println!("hierarchy: fitted convergence rate {:.4} over N = {:?}", study.rate, cfg.n_list);
    Ok(())
}

fn cmd_geometry(
    a: &GeometryArgs,
    out_dir: &std::path::Path,
    manifest: &mut RunManifest,
) -> Result<()> {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let mut table = CsvTable::new(&["n", "d", "residual"]);
    let mut worst = 0.0f64;
    let mut done = 0usize;
    while done < a.simplices {
        let n = 2 + (done % 5); // 2..=6 vertices
        let d = n.max(2 + (done % 7)); // dimension ≥ n, up to 8
        let verts: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..d).map(|_| standard_normal(&mut rng)).collect())
            .collect();
        match pyramid_residual(&verts) {
            Ok(r) => {
                worst = worst.max(r);
                table.push(vec![n as f64, d as f64, r]);
                done += 1;
            }
            Err(_) => continue, // degenerate draw; resample
        }
    }
    let path = out_dir.join("pyramid.csv");
    table.write(&path)?;
    record_output(manifest, &path);
    manifest.stage(
        "pyramid",
        t0.elapsed().as_secs_f64(),
        vec![("worst_residual".into(), format!("{worst}"))],
    );

    let t1 = Instant::now();
    let mut cfg = IntegrabilityConfig::default();
    cfg.samples = a.mc_samples;
    cfg.seed = a.seed;
    let mut scan_table =
        CsvTable::new(&["n", "d", "s", "estimate_coarse", "estimate_fine", "verdict"]);
    for &(n, d) in &[(3usize, 4usize), (4, 5), (2, 2)] {
        let thr = n as f64 - 1.0 - d as f64;
        let rows = integrability_scan(n, d, &[thr + 0.2, thr - 0.2], &cfg);
        for row in rows {
            let v = match row.verdict {
                IntegrabilityVerdict::Finite => 1.0,
                IntegrabilityVerdict::Divergent => -1.0,
                IntegrabilityVerdict::Inconclusive => 0.0,
            };
            scan_table.push(vec![
                n as f64,
                d as f64,
                row.s,
                row.estimate_coarse,
                row.estimate_fine,
                v,
            ]);
        }
    }
    let path = out_dir.join("integrability.csv");
    scan_table.write(&path)?;
    record_output(manifest, &path);
    manifest.stage("integrability", t1.elapsed().as_secs_f64(), Vec::new());
    println!(
        "geometry: worst pyramid residual {worst:.3e} over {} simplices; integrability scan written",
        a.simplices
    );
    Ok(())
}

fn cmd_audit(
    a: &AuditArgs,
    out_dir: &std::path::Path,
    manifest: &mut RunManifest,
) -> Result<()> {
    let indices: Vec<usize> = if !a.criteria.is_empty() {
        for &i in &a.criteria {
            anyhow::ensure!((1..=13).contains(&i), "criterion {i}: must be in 1..=13");
        }
        a.criteria.clone()
    } else if a.quick {
        suite::QUICK.to_vec()
    } else {
        (1..=13).collect()
    };
    let outcomes = suite::run_suite(&indices);
    for o in &outcomes {
        manifest.stage(
            &format!("criterion_{}", o.index),
            o.seconds,
            vec![
                ("name".into(), o.name.into()),
                ("passed".into(), o.passed.to_string()),
                ("detail".into(), o.detail.clone()),
            ],
        );
    }
    let mut table = CsvTable::new(&["criterion", "passed", "seconds"]);
    for o in &outcomes {
        table.push(vec![o.index as f64, if o.passed { 1.0 } else { 0.0 }, o.seconds]);
    }
    let path = out_dir.join("verdicts.csv");
    table.write(&path)?;
    record_output(manifest, &path);
    let failed: Vec<usize> = outcomes.iter().filter(|o| !o.passed).map(|o| o.index).collect();
    anyhow::ensure!(failed.is_empty(), "failing criteria: {failed:?}");
    Ok(())
}
