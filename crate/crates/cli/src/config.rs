//! TOML run configuration.

use std::path::PathBuf;

use dqd_core::dynamics::{default_dt, uniform_times};
use dqd_core::liouvillian::StateVector;
use dqd_core::model::{expand_r_symmetric, BathSpec, EngineParams, RSymmetricSpec, RateSet};
use dqd_core::steadystate::SteadyStateOptions;
use num_complex::Complex64;
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Steady,
    Evolve,
    Sweep,
    Spectrum,
    Transport,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Option<Mode>,
    pub engine: EngineConfig,
    /// Runs the mode once per value with φ^h = φ^c = φ; adds a leading
    /// `phi` column.
    pub phi_values: Option<Vec<f64>>,
    pub output: Option<PathBuf>,
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub initial: InitialConfig,
    pub time: Option<TimeConfig>,
    #[serde(default)]
    pub spectrum: SpectrumConfig,
    #[serde(default)]
    pub tolerances: ToleranceConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EngineConfig {
    /// |g^a_1|² = k^a/(1+r²), |g^a_2|² = r²k^a/(1+r²).
    RSymmetric {
        /// `[k_hot, k_cold]`.
        k: [f64; 2],
        r: f64,
        /// `[N_hot, N_cold]`.
        occupation: [f64; 2],
        #[serde(default)]
        phi: [f64; 2],
    },
    /// Fully symmetric engine given by its collective rates for dot 1.
    Collective {
        w1: f64,
        wbar1: f64,
        r: f64,
        #[serde(default)]
        phi: f64,
    },
    General {
        #[serde(default)]
        dot_energy: f64,
        hot: BathConfig,
        cold: BathConfig,
        /// |g^a_d| as `[[hot_1, hot_2], [cold_1, cold_2]]`.
        tunneling: [[f64; 2]; 2],
        #[serde(default)]
        phi: [f64; 2],
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum BathConfig {
    Thermal {
        temperature: f64,
        chemical_potential: f64,
    },
    Occupation {
        occupation: f64,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub axis: Vec<AxisConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisConfig {
    pub name: String,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

/// Sweepable parameters.
pub const AXIS_NAMES: [&str; 2] = ["phi_c", "phi_h"];

impl AxisConfig {
    pub fn values(&self) -> Vec<f64> {
        let n = self.count;
        (0..n)
            .map(|i| {
                if i + 1 == n {
                    self.max
                } else {
                    self.min + (self.max - self.min) * i as f64 / (n - 1) as f64
                }
            })
            .collect()
    }
}

/// Empty dots unless populations are given. ρ12 may be complex; the
/// empty/occupied coherences ρ01, ρ02 are `[re, im]` pairs and imply
/// ρ10, ρ20 by Hermiticity.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    pub rho00: Option<f64>,
    pub rho11: Option<f64>,
    pub rho22: Option<f64>,
    #[serde(default)]
    pub rho12_re: f64,
    #[serde(default)]
    pub rho12_im: f64,
    pub rho01: Option<[f64; 2]>,
    pub rho02: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeMethod {
    #[default]
    Spectral,
    Rk4,
    SymmetricR1,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    pub t_final: f64,
    pub interval: f64,
    #[serde(default)]
    pub method: TimeMethod,
    /// RK4 step; defaults to 0.01/max(W1+W2, W̄1+W̄2).
    pub dt: Option<f64>,
    /// Also integrate the empty/occupied coherences.
    #[serde(default)]
    pub full: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumMethod {
    #[default]
    Numeric,
    ClosedForm,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumConfig {
    #[serde(default)]
    pub method: SpectrumMethod,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceConfig {
    pub singular_relative: Option<f64>,
    pub symmetry_relative: Option<f64>,
    pub maximal_phi: Option<f64>,
}

impl ToleranceConfig {
    pub fn steady_options(&self) -> SteadyStateOptions {
        let d = SteadyStateOptions::default();
        SteadyStateOptions {
            singular_relative: self.singular_relative.unwrap_or(d.singular_relative),
            symmetry_relative: self.symmetry_relative.unwrap_or(d.symmetry_relative),
            maximal_phi: self.maximal_phi.unwrap_or(d.maximal_phi),
        }
    }
}

fn config_error(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| config_error(e.to_string()))
    }

    pub fn load(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_error(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Checks everything that does not need numerics.
    pub fn validate(&self, mode: Mode) -> Result<(), CliError> {
        if let Some(m) = self.mode {
            if m != mode {
                return Err(config_error(format!(
                    "config declares mode {m:?} but {mode:?} was requested"
                )));
            }
        }
        self.engine_at(None)?;
        if let Some(phis) = &self.phi_values {
            if phis.is_empty() {
                return Err(config_error("phi_values: must not be empty"));
            }
            for &p in phis {
                self.engine_at(Some(p))?;
            }
        }
        self.initial_state()?;
        for (name, v) in [
            (
                "tolerances.singular_relative",
                self.tolerances.singular_relative,
            ),
            (
                "tolerances.symmetry_relative",
                self.tolerances.symmetry_relative,
            ),
            ("tolerances.maximal_phi", self.tolerances.maximal_phi),
        ] {
            if let Some(x) = v {
                if !(x >= 0.0) || !x.is_finite() {
                    return Err(config_error(format!(
                        "{name}: must be finite and nonnegative"
                    )));
                }
            }
        }
        match mode {
            Mode::Sweep => {
                if self.phi_values.is_some() {
                    return Err(config_error("phi_values: not allowed in sweep mode"));
                }
                self.validate_sweep()?;
            }
            Mode::Evolve => self.validate_time()?,
            _ => {}
        }
        Ok(())
    }

    fn validate_sweep(&self) -> Result<(), CliError> {
        let sweep = self
            .sweep
            .as_ref()
            .ok_or_else(|| config_error("sweep: section is required in sweep mode"))?;
        if sweep.axis.is_empty() || sweep.axis.len() > 2 {
            return Err(config_error("sweep.axis: give one or two axes"));
        }
        for (i, ax) in sweep.axis.iter().enumerate() {
            if !AXIS_NAMES.contains(&ax.name.as_str()) {
                return Err(config_error(format!(
                    "sweep.axis[{i}].name: unknown parameter `{}` (expected one of {AXIS_NAMES:?})",
                    ax.name
                )));
            }
            if ax.count < 2 {
                return Err(config_error(format!(
                    "sweep.axis[{i}].count: must be at least 2, got {}",
                    ax.count
                )));
            }
            if !ax.min.is_finite() || !ax.max.is_finite() {
                return Err(config_error(format!(
                    "sweep.axis[{i}]: bounds must be finite"
                )));
            }
            if ax.min.abs().max(ax.max.abs()) > 1.0 {
                return Err(config_error(format!(
                    "sweep.axis[{i}]: interference parameters must lie in [-1, 1]"
                )));
            }
        }
        if sweep.axis.len() == 2 && sweep.axis[0].name == sweep.axis[1].name {
            return Err(config_error("sweep.axis: the two axes must differ"));
        }
        Ok(())
    }

    fn validate_time(&self) -> Result<(), CliError> {
        let t = self
            .time
            .as_ref()
            .ok_or_else(|| config_error("time: section is required in evolve mode"))?;
        if !(t.t_final >= 0.0) || !t.t_final.is_finite() {
            return Err(config_error("time.t_final: must be finite and nonnegative"));
        }
        if !(t.interval > 0.0) || !t.interval.is_finite() {
            return Err(config_error("time.interval: must be positive"));
        }
        if let Some(dt) = t.dt {
            if !(dt > 0.0) || !dt.is_finite() {
                return Err(config_error("time.dt: must be positive"));
            }
        }
        if t.method == TimeMethod::SymmetricR1 && t.full {
            return Err(config_error("time.full: not available with symmetric_r1"));
        }
        Ok(())
    }

    /// Physical parameters, with φ^h = φ^c = `phi` when given.
    pub fn engine_at(&self, phi: Option<f64>) -> Result<EngineParams, CliError> {
        let params = match &self.engine {
            EngineConfig::RSymmetric {
                k,
                r,
                occupation,
                phi: p,
            } => {
                let spec = RSymmetricSpec {
                    k: *k,
                    r: *r,
                    occupation: *occupation,
                    phi: phi.map_or(*p, |x| [x, x]),
                };
                expand_r_symmetric(&spec)
            }
            EngineConfig::Collective {
                w1,
                wbar1,
                r,
                phi: p,
            } => {
                if !(*w1 >= 0.0 && *wbar1 >= 0.0 && w1 + wbar1 > 0.0) {
                    return Err(config_error(
                        "engine: w1 and wbar1 must be nonnegative, not both zero",
                    ));
                }
                expand_r_symmetric(&RSymmetricSpec::from_collective_rates(
                    *w1,
                    *wbar1,
                    *r,
                    phi.unwrap_or(*p),
                ))
            }
            EngineConfig::General {
                dot_energy,
                hot,
                cold,
                tunneling,
                phi: p,
            } => {
                let bath = |b: &BathConfig| match *b {
                    BathConfig::Thermal {
                        temperature,
                        chemical_potential,
                    } => BathSpec::thermal(temperature, chemical_potential),
                    BathConfig::Occupation { occupation } => BathSpec::Occupation(occupation),
                };
                let params = EngineParams {
                    dot_energy: *dot_energy,
                    baths: [bath(hot), bath(cold)],
                    tunneling: *tunneling,
                    phi: phi.map_or(*p, |x| [x, x]),
                };
                params.validate().map(|_| params)
            }
        };
        params.map_err(|e| config_error(format!("engine: {e}")))
    }

    pub fn rates(params: &EngineParams) -> Result<RateSet, CliError> {
        RateSet::from_params(params).map_err(|e| config_error(format!("engine: {e}")))
    }

    pub fn initial_state(&self) -> Result<StateVector, CliError> {
        let c = &self.initial;
        let populations = [c.rho00, c.rho11, c.rho22];
        let mut s = match populations {
            [None, None, None] => StateVector::empty(),
            [Some(r00), Some(r11), Some(r22)] => {
                if (r00 + r11 + r22 - 1.0).abs() > 1e-9 {
                    return Err(config_error(format!(
                        "initial: populations sum to {}, not 1",
                        r00 + r11 + r22
                    )));
                }
                StateVector::new(r00, r11, r22, 0.0)
            }
            _ => {
                return Err(config_error(
                    "initial: give all of rho00, rho11, rho22 or none of them",
                ))
            }
        };
        s.rho12 = Complex64::new(c.rho12_re, c.rho12_im);
        s.rho21 = s.rho12.conj();
        if c.rho01.is_some() || c.rho02.is_some() {
            let z = |p: Option<[f64; 2]>| {
                p.map_or(Complex64::new(0.0, 0.0), |[re, im]| Complex64::new(re, im))
            };
            let (r01, r02) = (z(c.rho01), z(c.rho02));
            s.outer = Some([r01, r02, r01.conj(), r02.conj()]);
        }
        if s.min_eigenvalue() < -1e-9 {
            return Err(config_error(
                "initial: density matrix is not positive semidefinite",
            ));
        }
        Ok(s)
    }

    /// Sample times and the RK4 step for a given rate set.
    pub fn time_grid(&self, rates: &RateSet) -> (Vec<f64>, f64) {
        let t = self.time.as_ref().expect("validated");
        let count = (t.t_final / t.interval * (1.0 + 1e-12)).floor() as usize + 1;
        (
            uniform_times(t.interval, count),
            t.dt.unwrap_or_else(|| default_dt(rates)),
        )
    }
}
