//! Run configuration: defaults, an optional JSON file and command-line flags,
//! layered in that order.

use std::path::Path;

use anyhow::{anyhow, bail, Context};
use clap::{Args, ValueEnum};
use cqed_core::analysis::logspace;
use cqed_core::protocol::{JitterScope, LossScope};
use cqed_core::{NoiseParams, PhysicalParams, ScheduleOptions};
use serde::{Deserialize, Deserializer, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum LossScopeArg {
    AllSegments,
    CollisionOnly,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum JitterScopeArg {
    All,
    InteractionsOnly,
}

/// Fully resolved settings.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub omega_hz: f64,
    pub delta_over_omega: f64,
    #[serde(serialize_with = "serialize_tau")]
    pub tau_s: f64,
    pub epsilon: f64,
    pub n_traj: usize,
    pub seed: u64,
    pub fock_dim: usize,
    pub loss_scope: LossScopeArg,
    pub jitter_scope: JitterScopeArg,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            omega_hz: 50e3,
            delta_over_omega: 4.0,
            tau_s: 1e-3,
            epsilon: 0.03,
            n_traj: 2000,
            seed: 42,
            fock_dim: 3,
            loss_scope: LossScopeArg::AllSegments,
            jitter_scope: JitterScopeArg::All,
        }
    }
}

fn serialize_tau<S: serde::Serializer>(tau: &f64, s: S) -> Result<S::Ok, S::Error> {
    if tau.is_finite() {
        s.serialize_f64(*tau)
    } else {
        s.serialize_str("inf")
    }
}

/// The same fields as [`RunConfig`], all optional.
#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub omega_hz: Option<f64>,
    pub delta_over_omega: Option<f64>,
    #[serde(default, deserialize_with = "deserialize_tau")]
    pub tau_s: Option<f64>,
    pub epsilon: Option<f64>,
    pub n_traj: Option<usize>,
    pub seed: Option<u64>,
    pub fock_dim: Option<usize>,
    pub loss_scope: Option<LossScopeArg>,
    pub jitter_scope: Option<JitterScopeArg>,
}

fn deserialize_tau<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Tau {
        Number(f64),
        Text(String),
    }
    match Option::<Tau>::deserialize(d)? {
        None => Ok(None),
        Some(Tau::Number(x)) => Ok(Some(x)),
        Some(Tau::Text(s)) => parse_tau(&s).map(Some).map_err(serde::de::Error::custom),
    }
}

/// A lifetime in seconds, or `inf` for the lossless cavity.
pub fn parse_tau(s: &str) -> Result<f64, String> {
    // the std float grammar already accepts "inf"
    s.trim().parse::<f64>().map_err(|e| format!("invalid tau {:?}: {e}", s.trim()))
}

/// Flags shared by every subcommand.
#[derive(Args, Clone, Debug, Default)]
pub struct ConfigArgs {
    /// Vacuum Rabi frequency Ω/2π in Hz [default: 50000]
    #[arg(long, global = true)]
    pub omega_hz: Option<f64>,
    /// Cavity detuning δ in units of Ω [default: 4]
    #[arg(long, global = true)]
    pub delta_over_omega: Option<f64>,
    /// Photon lifetime in seconds, or "inf" [default: 0.001]
    #[arg(long, global = true, value_parser = parse_tau)]
    pub tau: Option<f64>,
    /// Relative timing/angle imprecision [default: 0.03]
    #[arg(long, global = true)]
    pub epsilon: Option<f64>,
    /// Trajectories per logical input [default: 2000]
    #[arg(long, global = true)]
    pub n_traj: Option<usize>,
    /// Root RNG seed [default: 42]
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Cavity Fock-space truncation [default: 3]
    #[arg(long, global = true)]
    pub fock_dim: Option<usize>,
    /// Segments during which the cavity leaks [default: all_segments]
    #[arg(long, global = true)]
    pub loss_scope: Option<LossScopeArg>,
    /// Segments that carry timing/angle errors [default: all]
    #[arg(long, global = true)]
    pub jitter_scope: Option<JitterScopeArg>,
    /// JSON file with any of the RunConfig fields
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<std::path::PathBuf>,
}

impl ConfigArgs {
    pub fn resolve(&self) -> anyhow::Result<RunConfig> {
        let file = match &self.config {
            Some(path) => load_file(path)?,
            None => FileConfig::default(),
        };
        let d = RunConfig::default();
        let cfg = RunConfig {
            omega_hz: self.omega_hz.or(file.omega_hz).unwrap_or(d.omega_hz),
            delta_over_omega: self.delta_over_omega.or(file.delta_over_omega).unwrap_or(d.delta_over_omega),
            tau_s: self.tau.or(file.tau_s).unwrap_or(d.tau_s),
            epsilon: self.epsilon.or(file.epsilon).unwrap_or(d.epsilon),
            n_traj: self.n_traj.or(file.n_traj).unwrap_or(d.n_traj),
            seed: self.seed.or(file.seed).unwrap_or(d.seed),
            fock_dim: self.fock_dim.or(file.fock_dim).unwrap_or(d.fock_dim),
            loss_scope: self.loss_scope.or(file.loss_scope).unwrap_or(d.loss_scope),
            jitter_scope: self.jitter_scope.or(file.jitter_scope).unwrap_or(d.jitter_scope),
        };
        cfg.physical()?;
        cfg.noise()?;
        Ok(cfg)
    }
}

fn load_file(path: &Path) -> anyhow::Result<FileConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
}

impl RunConfig {
    pub fn physical(&self) -> anyhow::Result<PhysicalParams> {
        let p = PhysicalParams::from_lab(self.omega_hz, self.delta_over_omega, self.fock_dim)?;
        p.check_dispersive()?;
        Ok(p)
    }

    pub fn noise(&self) -> anyhow::Result<NoiseParams> {
        Ok(NoiseParams::new(self.tau_s, self.epsilon, self.n_traj, self.seed)?)
    }

    pub fn schedule_options(&self) -> ScheduleOptions {
        ScheduleOptions {
            loss_scope: match self.loss_scope {
                LossScopeArg::AllSegments => LossScope::AllSegments,
                LossScopeArg::CollisionOnly => LossScope::CollisionOnly,
            },
            jitter_scope: match self.jitter_scope {
                JitterScopeArg::All => JitterScope::All,
                JitterScopeArg::InteractionsOnly => JitterScope::InteractionsOnly,
            },
            ..ScheduleOptions::default()
        }
    }
}

/// Which spacing a `start:stop:count` range uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Spacing {
    Linear,
    Log,
}

/// Comma-separated values, or `start:stop:count` (endpoints included).
pub fn parse_grid(spec: &str, spacing: Spacing, parse: fn(&str) -> Result<f64, String>) -> anyhow::Result<Vec<f64>> {
    let spec = spec.trim();
    let values = if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        let [start, stop, count] = parts[..] else {
            bail!("range {spec:?} must be start:stop:count");
        };
        let start = parse(start).map_err(|e| anyhow!(e))?;
        let stop = parse(stop).map_err(|e| anyhow!(e))?;
        let count: usize = count.trim().parse().with_context(|| format!("count in {spec:?}"))?;
        if count == 0 {
            bail!("range {spec:?} has no points");
        }
        if !(start.is_finite() && stop.is_finite()) {
            bail!("range {spec:?} needs finite endpoints");
        }
        match spacing {
            Spacing::Log => {
                if !(start > 0.0 && stop > 0.0) {
                    bail!("log-spaced range {spec:?} needs positive endpoints");
                }
                logspace(start, stop, count)
            }
            Spacing::Linear => (0..count)
                .map(|k| match count {
                    1 => start,
                    _ => start + (stop - start) * k as f64 / (count - 1) as f64,
                })
                .collect(),
        }
    } else {
        spec.split(',')
            .map(|s| parse(s).map_err(|e| anyhow!(e)))
            .collect::<anyhow::Result<Vec<f64>>>()?
    };
    if values.is_empty() {
        bail!("empty grid {spec:?}");
    }
    Ok(values)
}

pub fn parse_number(s: &str) -> Result<f64, String> {
    s.trim().parse::<f64>().map_err(|e| format!("invalid number {:?}: {e}", s.trim()))
}
