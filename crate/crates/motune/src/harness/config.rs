use serde::{Deserialize, Serialize};
use std::str::FromStr;

use crate::baselines::GridSpec;
use crate::benchmarks::VehicleConfig;
use crate::metaheuristics::{GaConfig, PsoConfig};
use crate::mobo::{Acquisition, BatchMode, CrashHandling, MoboConfig};

/// The evaluated optimizer variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    Tsemo1C,
    TsemoAC,
    Tsemo1Vdp,
    TsemoAVdp,
    Eim1Vdp,
    Nsga2,
    Mopso,
    Rand,
    Grid,
}

pub const VARIANT_NAMES: &[&str] = &[
    "TSEMO-1-C",
    "TSEMO-A-C",
    "TSEMO-1-VDP",
    "TSEMO-A-VDP",
    "EIM-1-VDP",
    "NSGA-II",
    "MOPSO",
    "Rand",
    "Grid",
];

impl Variant {
    pub fn name(&self) -> &'static str {
        match self {
            Variant::Tsemo1C => "TSEMO-1-C",
            Variant::TsemoAC => "TSEMO-A-C",
            Variant::Tsemo1Vdp => "TSEMO-1-VDP",
            Variant::TsemoAVdp => "TSEMO-A-VDP",
            Variant::Eim1Vdp => "EIM-1-VDP",
            Variant::Nsga2 => "NSGA-II",
            Variant::Mopso => "MOPSO",
            Variant::Rand => "Rand",
            Variant::Grid => "Grid",
        }
    }

    pub fn all() -> &'static [Variant] {
        &[
            Variant::Tsemo1C,
            Variant::TsemoAC,
            Variant::Tsemo1Vdp,
            Variant::TsemoAVdp,
            Variant::Eim1Vdp,
            Variant::Nsga2,
            Variant::Mopso,
            Variant::Rand,
            Variant::Grid,
        ]
    }

    /// Bayesian-optimization settings for the BO variants.
    pub fn mobo_config(&self, budget_steps: u64) -> Option<MoboConfig> {
        let (acquisition, batch_mode, crash_handling) = match self {
            Variant::Tsemo1C => (
                Acquisition::Tsemo,
                BatchMode::Constant(1),
                CrashHandling::ConstantPenalty,
            ),
            Variant::TsemoAC => (
                Acquisition::Tsemo,
                BatchMode::Adaptive,
                CrashHandling::ConstantPenalty,
            ),
            Variant::Tsemo1Vdp => (
                Acquisition::Tsemo,
                BatchMode::Constant(1),
                CrashHandling::VirtualDataPoints,
            ),
            Variant::TsemoAVdp => (
                Acquisition::Tsemo,
                BatchMode::Adaptive,
                CrashHandling::VirtualDataPoints,
            ),
            Variant::Eim1Vdp => (
                Acquisition::Eim,
                BatchMode::Constant(1),
                CrashHandling::VirtualDataPoints,
            ),
            _ => return None,
        };
        Some(MoboConfig {
            acquisition,
            batch_mode,
            crash_handling,
            budget_steps,
            ..MoboConfig::default()
        })
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let canon = s.to_ascii_uppercase();
        Variant::all()
            .iter()
            .find(|v| v.name().to_ascii_uppercase() == canon)
            .copied()
            .ok_or_else(|| format!("unknown variant '{s}', expected one of {VARIANT_NAMES:?}"))
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// One experiment: a variant on a problem over a set of seeds.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub problem: String,
    pub variant: Variant,
    pub budget_steps: u64,
    pub seeds: Vec<u64>,
    pub out_dir: std::path::PathBuf,
    /// Optional overrides loaded from a config file.
    #[serde(default)]
    pub overrides: Overrides,
}

impl ExperimentConfig {
    pub fn default_seeds() -> Vec<u64> {
        (0..10).collect()
    }
}

/// Tunables that a config file may override.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Overrides {
    pub mobo: Option<MoboPatch>,
    pub ga: Option<GaConfig>,
    pub pso: Option<PsoConfig>,
    pub grid: Option<GridSpec>,
    pub vehicle: Option<VehicleConfig>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct MoboPatch {
    pub n_init: Option<usize>,
    pub p_overhead_desired: Option<f64>,
    pub gamma_init: Option<f64>,
    pub gamma_step: Option<f64>,
    pub ga_population: Option<usize>,
    pub ga_generations: Option<usize>,
    pub rff_features: Option<usize>,
    pub gp_restarts: Option<usize>,
    pub gp_max_iters: Option<usize>,
}

impl MoboPatch {
    pub fn apply(&self, cfg: &mut MoboConfig) {
        if let Some(v) = self.n_init {
            cfg.n_init = v;
        }
        if let Some(v) = self.p_overhead_desired {
            cfg.p_overhead_desired = v;
        }
        if let Some(v) = self.gamma_init {
            cfg.gamma_init = v;
        }
        if let Some(v) = self.gamma_step {
            cfg.gamma_step = v;
        }
        if let Some(v) = self.ga_population {
            cfg.ga_population = v;
        }
        if let Some(v) = self.ga_generations {
            cfg.ga_generations = v;
        }
        if let Some(v) = self.rff_features {
            cfg.rff_features = v;
        }
        if let Some(v) = self.gp_restarts {
            cfg.gp_restarts = v;
        }
        if let Some(v) = self.gp_max_iters {
            cfg.gp_max_iters = v;
        }
    }
}

/// Structured-text experiment file: problem parameters and optimizer
/// overrides.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ExperimentFile {
    pub problem: Option<String>,
    pub variant: Option<String>,
    pub budget_steps: Option<u64>,
    pub seeds: Option<Vec<u64>>,
    #[serde(default)]
    pub overrides: Overrides,
}

impl ExperimentFile {
    pub fn load(path: &std::path::Path) -> Result<Self, super::HarnessError> {
        let text = std::fs::read_to_string(path)?;
        Ok(toml::from_str(&text)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn variant_names_round_trip() {
        for name in VARIANT_NAMES {
            let v: Variant = name.parse().unwrap();
            assert_eq!(&v.name(), name);
        }
        assert!("TSEMO-X".parse::<Variant>().is_err());
        // case-insensitive
        assert_eq!("mopso".parse::<Variant>().unwrap(), Variant::Mopso);
    }

    #[test]
    fn bo_variants_resolve_to_mobo_configs() {
        assert!(Variant::TsemoAVdp.mobo_config(100).is_some());
        assert!(Variant::Rand.mobo_config(100).is_none());
        let cfg = Variant::Tsemo1C.mobo_config(100).unwrap();
        assert_eq!(cfg.variant_name(), "TSEMO-1-C");
        let cfg = Variant::TsemoAVdp.mobo_config(100).unwrap();
        assert_eq!(cfg.variant_name(), "TSEMO-A-VDP");
    }

    #[test]
    fn experiment_file_parses_toml() {
        let text = r#"
            problem = "vehicle"
            variant = "TSEMO-A-VDP"
            budget_steps = 500000
            seeds = [0, 1, 2]

            [overrides.mobo]
            n_init = 7

            [overrides.vehicle]
            t_max = 60.0
            substeps = 2
            abort_elat = 5.0
            reference_point = [6.0, 1.8, 4.0]
            mean_steps_per_eval = 1100
            nominal_seconds_per_step = 3e-5

            [overrides.vehicle.track]
            straight_length = 150.0
            curve_radius = 25.0
            sample_spacing = 1.0
            v_straight = 14.0
            v_curve = 7.0

            [overrides.vehicle.controller]
            horizon = 30
            ts = 0.05
            wheelbase = 2.7
            a_min = -4.0
            a_max = 3.0
            omega_max = 0.5
            delta_max = 0.5
        "#;
        let file: ExperimentFile = toml::from_str(text).unwrap();
        assert_eq!(file.problem.as_deref(), Some("vehicle"));
        assert_eq!(file.overrides.mobo.unwrap().n_init, Some(7));
        let vehicle = file.overrides.vehicle.unwrap();
        assert_eq!(vehicle.controller.horizon, 30);
        assert_eq!(vehicle.track.straight_length, 150.0);
    }
}
