//! Structured run configuration for the hierarchy experiment: a TOML file
//! with documented defaults, plus `--set key=value` dotted-path overrides.

use std::path::Path;

use anyhow::{Context, Result};
use kinlab_core::hierarchy::HierarchyConfig;
use kinlab_core::landau::{FourierProfile, Potential};
use kinlab_core::quad::PolarQuadrature;
use kinlab_core::spectral::VelocityGrid;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSpec {
    pub n_pts: usize,
    pub v_max: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { n_pts: 24, v_max: 6.0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PotentialSpec {
    /// Fourier profile amplitude · e^{−alpha |k|²}.
    pub amplitude: f64,
    pub alpha: f64,
    pub k_max: f64,
    /// Radial × angular wavenumber quadrature nodes.
    pub n_r: usize,
    pub n_theta: usize,
}

impl Default for PotentialSpec {
    fn default() -> Self {
        PotentialSpec {
            amplitude: 2.0,
            alpha: 4.0,
            k_max: 0.8,
            n_r: 2,
            n_theta: 8,
        }
    }
}

/// Full configuration of a hierarchy run / convergence study. Every field
/// has a documented default matching the built-in scenario.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HierarchyRunConfig {
    /// Particle numbers; the observation time scale is t_N = N.
    pub n_list: Vec<f64>,
    pub kappa: f64,
    pub beta: f64,
    pub tau_max: f64,
    pub cfl: f64,
    pub heat_batch: usize,
    /// Recorded time intervals (uniform in τ).
    pub n_records: usize,
    /// Time step of the Fokker–Planck reference solver.
    pub fp_dtau: f64,
    pub potential: PotentialSpec,
    /// Tagged-level velocity grid.
    pub g0: GridSpec,
    /// Pair-level v₁ axis along k̂ and transverse to it.
    pub par: GridSpec,
    pub perp: GridSpec,
}

impl Default for HierarchyRunConfig {
    fn default() -> Self {
        HierarchyRunConfig {
            n_list: vec![25.0, 50.0, 100.0, 200.0],
            kappa: 1.0,
            beta: 1.0,
            tau_max: 1.0,
            cfl: 0.25,
            heat_batch: 32,
            n_records: 16,
            fp_dtau: 5e-4,
            potential: PotentialSpec::default(),
            g0: GridSpec::default(),
            par: GridSpec { n_pts: 48, v_max: 4.8 },
            perp: GridSpec { n_pts: 8, v_max: 4.0 },
        }
    }
}

impl HierarchyRunConfig {
    /// Loads a TOML file (or the defaults when `path` is None) and applies
    /// `--set key=value` overrides by dotted path.
    pub fn load(path: Option<&Path>, sets: &[String]) -> Result<Self> {
        // Start from the fully serialized defaults so that partial nested
        // tables (file or --set) override only the named keys.
        let mut value =
            toml::Value::try_from(HierarchyRunConfig::default()).context("serializing defaults")?;
        if let Some(p) = path {
            let text = std::fs::read_to_string(p)
                .with_context(|| format!("reading config file {}", p.display()))?;
            let file: toml::Value = text
                .parse()
                .with_context(|| format!("parsing TOML in {}", p.display()))?;
            deep_merge(&mut value, file);
        }
        for s in sets {
            apply_set(&mut value, s)?;
        }
        let cfg: HierarchyRunConfig = value
            .try_into()
            .context("invalid hierarchy configuration")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_list.is_empty() {
            anyhow::bail!("n_list: need at least one particle number");
        }
        if self.n_records == 0 {
            anyhow::bail!("n_records: must be ≥ 1");
        }
        if !(self.fp_dtau > 0.0) {
            anyhow::bail!("fp_dtau: must be positive");
        }
        // Physical parameter ranges are checked by the core config.
        self.hierarchy_config(self.n_list[0])
            .map_err(|e| anyhow::anyhow!("{e}"))?;
        Ok(())
    }

    pub fn hierarchy_config(&self, big_n: f64) -> Result<HierarchyConfig, kinlab_core::CoreError> {
        let cfg = HierarchyConfig {
            m0: 1,
            big_n,
            t_n: big_n,
            kappa: self.kappa,
            beta: self.beta,
            tau_max: self.tau_max,
            cfl: self.cfl,
            heat_batch: self.heat_batch,
            energy_every: 1,
            potential: Potential {
                d: 2,
                profile: FourierProfile::Gaussian {
                    amplitude: self.potential.amplitude,
                    alpha: self.potential.alpha,
                },
                k_max: self.potential.k_max,
                n_r: self.potential.n_r,
                n_theta: self.potential.n_theta,
            },
            kquad: PolarQuadrature::new(
                2,
                self.potential.k_max,
                self.potential.n_r,
                self.potential.n_theta,
            ),
            g0_grid: VelocityGrid::new(2, self.g0.n_pts, self.g0.v_max)?,
            par_grid: VelocityGrid::new(1, self.par.n_pts, self.par.v_max)?,
            perp_grid: VelocityGrid::new(1, self.perp.n_pts, self.perp.v_max)?,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Overwrites `base` with `over` key-by-key, recursing into tables.
fn deep_merge(base: &mut toml::Value, over: toml::Value) {
    match (base, over) {
        (toml::Value::Table(b), toml::Value::Table(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) => deep_merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

/// Applies one `key.path=value` override into a TOML tree. Values parse as
/// TOML scalars/arrays, falling back to a bare string.
pub fn apply_set(root: &mut toml::Value, spec: &str) -> Result<()> {
    let (key, raw) = spec
        .split_once('=')
        .with_context(|| format!("--set {spec:?}: expected key=value"))?;
    let parsed: toml::Value = match format!("x = {raw}").parse::<toml::Value>() {
        Ok(toml::Value::Table(mut t)) => t.remove("x").unwrap(),
        _ => toml::Value::String(raw.to_string()),
    };
    let mut node = root;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let table = node
            .as_table_mut()
            .with_context(|| format!("--set {spec:?}: {part:?} is not a table"))?;
        if i + 1 == parts.len() {
            table.insert(part.to_string(), parsed);
            return Ok(());
        }
        node = table
            .entry(part.to_string())
            .or_insert(toml::Value::Table(toml::map::Map::new()));
    }
    unreachable!("empty key path");
}
