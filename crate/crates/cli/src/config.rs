//! Flag sets, the JSON config file that mirrors them, and the resolved
//! [`RunConfig`] embedded in every output.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use henon_core::resummation::LeroyOrder;
use henon_core::verify::Suite;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const DEFAULT_OUT_DIR: &str = "henon-out";

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RspeArgs {
    /// Highest β-order to generate.
    #[arg(long)]
    pub orders: Option<usize>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    F64,
    /// Refine in multiprecision after the double-precision solve.
    Mp,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResonanceArgs {
    /// Coupling; repeat for a grid.
    #[arg(long, allow_negative_numbers = true)]
    #[serde(default)]
    pub beta: Vec<f64>,
    /// Convergence tolerance on successive basis sizes.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Fix Im θ (for positive coupling) instead of scanning.
    #[arg(long, allow_negative_numbers = true)]
    pub theta: Option<f64>,
    /// Largest basis truncation tried.
    #[arg(long)]
    pub n_max: Option<usize>,
    #[arg(long, value_enum)]
    pub precision: Option<Precision>,
    /// Also track E along β = ρ e^{is}, s ∈ [0, π].
    #[arg(long)]
    pub continuation_rho: Option<f64>,
    #[arg(long)]
    pub continuation_steps: Option<usize>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResumArgs {
    /// Coefficient file written by `rspe`, or a JSON array of rationals.
    #[arg(long)]
    pub coeffs: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true)]
    #[serde(default)]
    pub beta: Vec<f64>,
    /// Borel–Leroy order: 1/2 sums the β-series, 1 the series in g = β².
    #[arg(long)]
    pub q: Option<LeroyOrder>,
    /// Number of coefficients fed to the Padé fit.
    #[arg(long)]
    pub terms: Option<usize>,
    #[arg(long)]
    pub l: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
    /// Quadrature tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyArgs {
    #[arg(long)]
    pub suite: Option<Suite>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Flip the sign of a₂ before the series checks.
    #[arg(long)]
    #[serde(default)]
    pub mutate_a2: bool,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RspeConfig {
    pub orders: usize,
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResonanceConfig {
    pub beta: Vec<f64>,
    pub tol: f64,
    pub theta: Option<f64>,
    pub n_max: usize,
    pub precision: Precision,
    pub continuation_rho: Option<f64>,
    pub continuation_steps: usize,
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResumConfig {
    pub coeffs: PathBuf,
    pub beta: Vec<f64>,
    pub q: LeroyOrder,
    pub terms: Option<usize>,
    pub l: Option<usize>,
    pub m: Option<usize>,
    pub tol: f64,
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    pub suite: Suite,
    pub seed: u64,
    pub mutate_a2: bool,
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum RunConfig {
    Rspe(RspeConfig),
    Resonance(ResonanceConfig),
    Resum(ResumConfig),
    Verify(VerifyConfig),
}

impl RunConfig {
    pub fn out_dir(&self) -> &Path {
        match self {
            RunConfig::Rspe(c) => &c.out_dir,
            RunConfig::Resonance(c) => &c.out_dir,
            RunConfig::Resum(c) => &c.out_dir,
            RunConfig::Verify(c) => &c.out_dir,
        }
    }
}

/// Overlays the flags given on the command line onto the config file. Unset
/// flags are `null`, empty lists or `false`.
pub fn merge<T: Serialize + DeserializeOwned>(flags: T, file: Option<&Path>, command: &str) -> Result<T> {
    let Some(path) = file else { return Ok(flags) };
    let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    let mut base: Value =
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
    let Some(obj) = base.as_object_mut() else {
        bail!("config {} must hold a JSON object", path.display());
    };
    if let Some(c) = obj.remove("command") {
        if c.as_str() != Some(command) {
            bail!("config {} is for command {c}, not {command}", path.display());
        }
    }
    let Value::Object(overlay) = serde_json::to_value(flags)? else { unreachable!() };
    for (k, v) in overlay {
        let unset = match &v {
            Value::Null | Value::Bool(false) => true,
            Value::Array(a) => a.is_empty(),
            _ => false,
        };
        if !unset {
            obj.insert(k, v);
        }
    }
    serde_json::from_value(base).with_context(|| format!("invalid config {}", path.display()))
}

fn out_dir(p: Option<PathBuf>) -> PathBuf {
    p.unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if !(v > 0.0 && v.is_finite()) {
        bail!("{name} must be positive, got {v}");
    }
    Ok(v)
}

fn nonempty(name: &str, v: Vec<f64>) -> Result<Vec<f64>> {
    if v.is_empty() {
        bail!("{name} grid is empty; pass --{name} at least once");
    }
    if let Some(x) = v.iter().find(|x| !x.is_finite()) {
        bail!("{name} grid holds a non-finite value {x}");
    }
    Ok(v)
}

impl RspeArgs {
    pub fn resolve(self) -> Result<RunConfig> {
        Ok(RunConfig::Rspe(RspeConfig {
            orders: self.orders.unwrap_or(henon_core::rspe::DEFAULT_BETA_ORDERS),
            out_dir: out_dir(self.out_dir),
        }))
    }
}

impl ResonanceArgs {
    pub fn resolve(self) -> Result<RunConfig> {
        let n_max = self.n_max.unwrap_or(60);
        if n_max < 3 {
            bail!("n_max must be at least 3, got {n_max}");
        }
        if let Some(t) = self.theta {
            if !(t > 0.0 && t < std::f64::consts::PI / 5.0) {
                bail!("theta must lie in (0, π/5), got {t}");
            }
        }
        if let Some(r) = self.continuation_rho {
            positive("continuation_rho", r)?;
        }
        let steps = self.continuation_steps.unwrap_or(64);
        if steps == 0 {
            bail!("continuation_steps must be positive");
        }
        Ok(RunConfig::Resonance(ResonanceConfig {
            beta: nonempty("beta", self.beta)?,
            tol: positive("tol", self.tol.unwrap_or(1e-8))?,
            theta: self.theta,
            n_max,
            precision: self.precision.unwrap_or(Precision::F64),
            continuation_rho: self.continuation_rho,
            continuation_steps: steps,
            out_dir: out_dir(self.out_dir),
        }))
    }
}

impl ResumArgs {
    pub fn resolve(self) -> Result<RunConfig> {
        let Some(coeffs) = self.coeffs else { bail!("--coeffs is required") };
        if self.l.is_some() != self.m.is_some() {
            bail!("--l and --m go together");
        }
        if self.terms == Some(0) {
            bail!("terms must be positive");
        }
        Ok(RunConfig::Resum(ResumConfig {
            coeffs,
            beta: nonempty("beta", self.beta)?,
            q: self.q.unwrap_or(LeroyOrder::Half),
            terms: self.terms,
            l: self.l,
            m: self.m,
            tol: positive("tol", self.tol.unwrap_or(1e-12))?,
            out_dir: out_dir(self.out_dir),
        }))
    }
}

impl VerifyArgs {
    pub fn resolve(self) -> Result<RunConfig> {
        let d = henon_core::verify::VerifyOptions::default();
        Ok(RunConfig::Verify(VerifyConfig {
            suite: self.suite.unwrap_or(Suite::Full),
            seed: self.seed.unwrap_or(d.seed),
            mutate_a2: self.mutate_a2,
            out_dir: out_dir(self.out_dir),
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn run_config_round_trips() {
        let configs = [
            RspeArgs { orders: Some(4), out_dir: None }.resolve().unwrap(),
            ResonanceArgs {
                beta: vec![0.1, -0.1],
                continuation_rho: Some(0.15),
                ..Default::default()
            }
            .resolve()
            .unwrap(),
            ResumArgs {
                coeffs: Some("series.json".into()),
                beta: vec![0.2],
                q: Some(LeroyOrder::One),
                ..Default::default()
            }
            .resolve()
            .unwrap(),
            VerifyArgs::default().resolve().unwrap(),
        ];
        for c in configs {
            let text = serde_json::to_string(&c).unwrap();
            let back: RunConfig = serde_json::from_str(&text).unwrap();
            assert_eq!(back, c);
        }
    }

    #[test]
    fn validation() {
        assert!(ResonanceArgs::default().resolve().is_err());
        let bad_tol = ResonanceArgs {
            beta: vec![0.1],
            tol: Some(-1.0),
            ..Default::default()
        };
        assert!(bad_tol.resolve().is_err());
        assert!(ResumArgs { beta: vec![0.1], ..Default::default() }.resolve().is_err());
    }
}
