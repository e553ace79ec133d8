//! Physical parameters, Fermi–Dirac occupations and transfer rates.
//!
//! Units follow ħ = k_B = 1. Energies, temperatures and chemical potentials
//! share one unit; rates are in the matching inverse-time unit. Tunneling
//! coefficients are stored as magnitudes |g^a_d|, with any relative phase
//! between the two dots absorbed into the interference parameter φ^a.
//!
//! Arrays indexed by bath use the order `[hot, cold]`; arrays indexed by dot
//! use `[dot 1, dot 2]`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Slack admitted on |φ| ≤ 1 so that exactly maximal interference is valid.
pub const PHI_TOLERANCE: f64 = 1e-12;

pub const HOT: usize = 0;
pub const COLD: usize = 1;

/// A fermionic reservoir, described either thermally or by the occupation it
/// induces at the dot energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BathSpec {
    Thermal {
        temperature: f64,
        chemical_potential: f64,
    },
    Occupation(f64),
}

impl BathSpec {
    pub fn thermal(temperature: f64, chemical_potential: f64) -> Self {
        BathSpec::Thermal {
            temperature,
            chemical_potential,
        }
    }

    /// Occupation of a level at `energy`.
    pub fn occupation_at(&self, energy: f64) -> Result<f64> {
        match *self {
            BathSpec::Thermal { .. } => fermi_dirac(energy, self),
            BathSpec::Occupation(n) => {
                if !(0.0..=1.0).contains(&n) {
                    return Err(Error::InvalidParameter {
                        name: "occupation",
                        reason: format!("{n} is outside [0, 1]"),
                    });
                }
                Ok(n)
            }
        }
    }

    pub fn chemical_potential(&self) -> Option<f64> {
        match *self {
            BathSpec::Thermal {
                chemical_potential, ..
            } => Some(chemical_potential),
            BathSpec::Occupation(_) => None,
        }
    }
}

/// Fermi–Dirac occupation `exp[-(E-μ)/T] / (1 + exp[-(E-μ)/T])`.
///
/// Evaluated so that neither branch exponentiates a positive argument, which
/// keeps it finite for arbitrarily large |E - μ| / T.
pub fn fermi_dirac(energy: f64, bath: &BathSpec) -> Result<f64> {
    let (temperature, mu) = match *bath {
        BathSpec::Thermal {
            temperature,
            chemical_potential,
        } => (temperature, chemical_potential),
        BathSpec::Occupation(_) => {
            return Err(Error::InvalidParameter {
                name: "bath",
                reason: "Fermi-Dirac evaluation needs a temperature and chemical potential".into(),
            })
        }
    };
    if !(temperature > 0.0) || !temperature.is_finite() {
        return Err(Error::InvalidParameter {
            name: "temperature",
            reason: format!("{temperature} must be positive and finite"),
        });
    }
    let x = (energy - mu) / temperature;
    if x >= 0.0 {
        let e = (-x).exp();
        Ok(e / (1.0 + e))
    } else {
        Ok(1.0 / (1.0 + x.exp()))
    }
}

/// Full physical specification of the engine.
#[derive(Debug, Clone, PartialEq)]
pub struct EngineParams {
    /// Common energy E of both dots.
    pub dot_energy: f64,
    /// `[hot, cold]`.
    pub baths: [BathSpec; 2],
    /// |g^a_d| indexed `[bath][dot]`.
    pub tunneling: [[f64; 2]; 2],
    /// Interference parameters `[φ^h, φ^c]`.
    pub phi: [f64; 2],
}

impl EngineParams {
    pub fn validate(&self) -> Result<()> {
        if !self.dot_energy.is_finite() {
            return Err(Error::InvalidParameter {
                name: "dot_energy",
                reason: "must be finite".into(),
            });
        }
        for bath in &self.baths {
            match *bath {
                BathSpec::Thermal {
                    temperature,
                    chemical_potential,
                } => {
                    if !(temperature > 0.0) || !temperature.is_finite() {
                        return Err(Error::InvalidParameter {
                            name: "temperature",
                            reason: format!("{temperature} must be positive and finite"),
                        });
                    }
                    if !chemical_potential.is_finite() {
                        return Err(Error::InvalidParameter {
                            name: "chemical_potential",
                            reason: "must be finite".into(),
                        });
                    }
                }
                BathSpec::Occupation(n) => {
                    if !(0.0..=1.0).contains(&n) {
                        return Err(Error::InvalidParameter {
                            name: "occupation",
                            reason: format!("{n} is outside [0, 1]"),
                        });
                    }
                }
            }
        }
        for g in self.tunneling.iter().flatten() {
            if !(*g >= 0.0) || !g.is_finite() {
                return Err(Error::InvalidParameter {
                    name: "tunneling",
                    reason: format!("{g} must be a finite nonnegative magnitude"),
                });
            }
        }
        for phi in &self.phi {
            if !(phi.abs() <= 1.0 + PHI_TOLERANCE) {
                return Err(Error::InvalidParameter {
                    name: "phi",
                    reason: format!("|{phi}| exceeds 1; the dissipation matrix would not be positive-semidefinite"),
                });
            }
        }
        Ok(())
    }

    /// Occupations `[N^h, N^c]` at the dot energy.
    pub fn occupations(&self) -> Result<[f64; 2]> {
        Ok([
            self.baths[HOT].occupation_at(self.dot_energy)?,
            self.baths[COLD].occupation_at(self.dot_energy)?,
        ])
    }

    /// Bias ΔN = N^h − N^c.
    pub fn bias(&self) -> Result<f64> {
        let n = self.occupations()?;
        Ok(n[HOT] - n[COLD])
    }

    /// |g^a_d|².
    pub fn coupling_sq(&self, bath: usize, dot: usize) -> f64 {
        let g = self.tunneling[bath][dot];
        g * g
    }

    /// `(μ_h, μ_c)` when both baths are specified thermally.
    pub fn chemical_potentials(&self) -> Option<(f64, f64)> {
        Some((
            self.baths[HOT].chemical_potential()?,
            self.baths[COLD].chemical_potential()?,
        ))
    }

    pub fn with_phi(&self, phi_hot: f64, phi_cold: f64) -> Self {
        EngineParams {
            phi: [phi_hot, phi_cold],
            ..self.clone()
        }
    }

    /// Replaces both baths by the given occupations.
    pub fn with_occupations(&self, n_hot: f64, n_cold: f64) -> Self {
        EngineParams {
            baths: [BathSpec::Occupation(n_hot), BathSpec::Occupation(n_cold)],
            ..self.clone()
        }
    }
}

/// Coupling configuration with the same dot-2/dot-1 tunneling ratio r for
/// both baths: |g^a_1|² = k^a/(1+r²), |g^a_2|² = r² k^a/(1+r²).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RSymmetricSpec {
    /// `[k^h, k^c]`.
    pub k: [f64; 2],
    pub r: f64,
    /// `[N^h, N^c]`.
    pub occupation: [f64; 2],
    /// `[φ^h, φ^c]`.
    pub phi: [f64; 2],
}

impl RSymmetricSpec {
    /// Fully symmetric single-effective-bath configuration with prescribed
    /// collective rates W_1 and W̄_1 (and hence W_2 = r²W_1, W̄_2 = r²W̄_1).
    /// Both baths carry equal occupation W_1/(W_1+W̄_1) and equal coupling.
    pub fn from_collective_rates(w1: f64, wbar1: f64, r: f64, phi: f64) -> Self {
        let total = w1 + wbar1;
        let k = total * (1.0 + r * r) / (4.0 * PI);
        let n = w1 / total;
        RSymmetricSpec {
            k: [k, k],
            r,
            occupation: [n, n],
            phi: [phi, phi],
        }
    }

    pub fn bias(&self) -> f64 {
        self.occupation[HOT] - self.occupation[COLD]
    }

    pub fn mean_occupation(&self) -> f64 {
        0.5 * (self.occupation[HOT] + self.occupation[COLD])
    }

    pub fn with_phi(&self, phi_hot: f64, phi_cold: f64) -> Self {
        RSymmetricSpec {
            phi: [phi_hot, phi_cold],
            ..*self
        }
    }

    /// Occupations N ± ΔN/2 around the current mean.
    pub fn with_bias(&self, delta_n: f64) -> Self {
        let n = self.mean_occupation();
        RSymmetricSpec {
            occupation: [n + 0.5 * delta_n, n - 0.5 * delta_n],
            ..*self
        }
    }
}

/// Expands an r-symmetric specification into full engine parameters with
/// occupation-parameterized baths and dot energy 0.
pub fn expand_r_symmetric(spec: &RSymmetricSpec) -> Result<EngineParams> {
    if !(spec.r > 0.0) || !spec.r.is_finite() {
        return Err(Error::InvalidParameter {
            name: "r",
            reason: format!("{} must be positive", spec.r),
        });
    }
    for k in &spec.k {
        if !(*k >= 0.0) || !k.is_finite() {
            return Err(Error::InvalidParameter {
                name: "k",
                reason: format!("{k} must be a finite nonnegative coupling scale"),
            });
        }
    }
    let r2 = spec.r * spec.r;
    let g = |k: f64| [(k / (1.0 + r2)).sqrt(), (r2 * k / (1.0 + r2)).sqrt()];
    let params = EngineParams {
        dot_energy: 0.0,
        baths: [
            BathSpec::Occupation(spec.occupation[HOT]),
            BathSpec::Occupation(spec.occupation[COLD]),
        ],
        tunneling: [g(spec.k[HOT]), g(spec.k[COLD])],
        phi: spec.phi,
    };
    params.validate()?;
    Ok(params)
}

/// Per-channel transfer rates and their collective sums.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateSet {
    /// w^a_{d+} (inflow into dot d from bath a), `[bath][dot]`.
    pub w_plus: [[f64; 2]; 2],
    /// w^a_{d−} (outflow from dot d into bath a), `[bath][dot]`.
    pub w_minus: [[f64; 2]; 2],
    /// `[φ^h, φ^c]`.
    pub phi: [f64; 2],
    /// W_d = Σ_a w^a_{d+}.
    pub w: [f64; 2],
    /// W̄_d = Σ_a w^a_{d−}.
    pub w_bar: [f64; 2],
    /// Φ = Σ_a φ^a √(w^a_{1+} w^a_{2+}).
    pub big_phi: f64,
    /// Φ̄ = Σ_a φ^a √(w^a_{1−} w^a_{2−}).
    pub big_phi_bar: f64,
}

impl RateSet {
    /// Rates from the physical parameters: w^a_{d±} = 2π|g^a_d|² N^a or (1−N^a).
    pub fn from_params(params: &EngineParams) -> Result<Self> {
        params.validate()?;
        let n = params.occupations()?;
        let mut w_plus = [[0.0; 2]; 2];
        let mut w_minus = [[0.0; 2]; 2];
        for a in 0..2 {
            for d in 0..2 {
                let gamma = 2.0 * PI * params.coupling_sq(a, d);
                w_plus[a][d] = gamma * n[a];
                w_minus[a][d] = gamma * (1.0 - n[a]);
            }
        }
        Ok(Self::from_channels_unchecked(w_plus, w_minus, params.phi))
    }

    /// Rates specified channel by channel, validated for sign and |φ^a| ≤ 1.
    pub fn from_channels(
        w_plus: [[f64; 2]; 2],
        w_minus: [[f64; 2]; 2],
        phi: [f64; 2],
    ) -> Result<Self> {
        for w in w_plus.iter().chain(w_minus.iter()).flatten() {
            if !(*w >= 0.0) || !w.is_finite() {
                return Err(Error::InvalidParameter {
                    name: "rate",
                    reason: format!("{w} must be finite and nonnegative"),
                });
            }
        }
        for p in &phi {
            if !(p.abs() <= 1.0 + PHI_TOLERANCE) {
                return Err(Error::InvalidParameter {
                    name: "phi",
                    reason: format!("|{p}| exceeds 1"),
                });
            }
        }
        Ok(Self::from_channels_unchecked(w_plus, w_minus, phi))
    }

    /// Same as [`RateSet::from_channels`] without validation; lets tests probe
    /// the unphysical region |φ| > 1.
    pub fn from_channels_unchecked(
        w_plus: [[f64; 2]; 2],
        w_minus: [[f64; 2]; 2],
        phi: [f64; 2],
    ) -> Self {
        let w = [w_plus[0][0] + w_plus[1][0], w_plus[0][1] + w_plus[1][1]];
        let w_bar = [w_minus[0][0] + w_minus[1][0], w_minus[0][1] + w_minus[1][1]];
        let big_phi = (0..2)
            .map(|a| phi[a] * (w_plus[a][0] * w_plus[a][1]).sqrt())
            .sum();
        let big_phi_bar = (0..2)
            .map(|a| phi[a] * (w_minus[a][0] * w_minus[a][1]).sqrt())
            .sum();
        RateSet {
            w_plus,
            w_minus,
            phi,
            w,
            w_bar,
            big_phi,
            big_phi_bar,
        }
    }

    /// φ^a √(w^a_{1+} w^a_{2+}).
    pub fn interference_in(&self, bath: usize) -> f64 {
        self.phi[bath] * (self.w_plus[bath][0] * self.w_plus[bath][1]).sqrt()
    }

    /// φ^a √(w^a_{1−} w^a_{2−}).
    pub fn interference_out(&self, bath: usize) -> f64 {
        self.phi[bath] * (self.w_minus[bath][0] * self.w_minus[bath][1]).sqrt()
    }

    /// W_1 + W̄_1 + W_2 + W̄_2, the natural rate scale.
    pub fn total_rate(&self) -> f64 {
        self.w[0] + self.w_bar[0] + self.w[1] + self.w_bar[1]
    }

    /// Detects the fully symmetric configuration at the level of the
    /// collective rates: W_2 = r²W_1, W̄_2 = r²W̄_1, Φ = rφW_1, Φ̄ = rφW̄_1.
    /// The reduced Liouvillian depends on the rates only through these sums.
    pub fn fully_symmetric(&self, rel_tol: f64) -> Option<FullySymmetric> {
        let scale = self.total_rate();
        let [w1, w2] = self.w;
        let [wb1, wb2] = self.w_bar;
        if !(scale > 0.0) || !(wb1 > 0.0) || !(w1 + wb1 > 0.0) {
            return None;
        }
        let r2 = (w2 + wb2) / (w1 + wb1);
        let r = r2.sqrt();
        let phi = self.big_phi_bar / (r * wb1);
        let tol = rel_tol * scale;
        let ok = (w2 - r2 * w1).abs() <= tol
            && (wb2 - r2 * wb1).abs() <= tol
            && (self.big_phi - r * phi * w1).abs() <= tol
            && (self.big_phi_bar - r * phi * wb1).abs() <= tol;
        ok.then_some(FullySymmetric {
            r,
            phi,
            w1,
            wbar1: wb1,
        })
    }
}

/// Collective description of the fully symmetric configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FullySymmetric {
    pub r: f64,
    pub phi: f64,
    pub w1: f64,
    pub wbar1: f64,
}

impl FullySymmetric {
    /// α = W_1 / (2W_1 + W̄_1).
    pub fn alpha(&self) -> f64 {
        self.w1 / (2.0 * self.w1 + self.wbar1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn fermi_dirac_symmetry_point() {
        for t in [0.1, 1.0, 37.0] {
            let n = fermi_dirac(2.5, &BathSpec::thermal(t, 2.5)).unwrap();
            assert_eq!(n, 0.5);
        }
    }

    #[test]
    fn fermi_dirac_closed_form() {
        let t = 0.7;
        let n = fermi_dirac(t * 3f64.ln(), &BathSpec::thermal(t, 0.0)).unwrap();
        assert_relative_eq!(n, 0.25, max_relative = 1e-15);
    }

    #[test]
    fn fermi_dirac_deep_tail_is_finite() {
        // 1/(1+e^700) evaluated at 50 digits
        let expected = 9.859_676_543_759_77e-305;
        let n = fermi_dirac(700.0, &BathSpec::thermal(1.0, 0.0)).unwrap();
        assert!(n.is_finite() && n > 0.0 && n <= 1e-300);
        assert_relative_eq!(n, expected, max_relative = 1e-12);
        let m = fermi_dirac(-700.0, &BathSpec::thermal(1.0, 0.0)).unwrap();
        assert_eq!(m, 1.0);
    }

    #[test]
    fn fermi_dirac_rejects_nonpositive_temperature() {
        assert!(fermi_dirac(0.0, &BathSpec::thermal(0.0, 0.0)).is_err());
        assert!(fermi_dirac(0.0, &BathSpec::thermal(-1.0, 0.0)).is_err());
    }

    #[test]
    fn unit_normalized_rates() {
        let g = (1.0 / (2.0 * PI)).sqrt();
        let params = EngineParams {
            dot_energy: 0.0,
            baths: [BathSpec::Occupation(0.2), BathSpec::Occupation(0.2)],
            tunneling: [[g, g], [g, g]],
            phi: [0.0, 0.0],
        };
        let rates = RateSet::from_params(&params).unwrap();
        assert_relative_eq!(rates.w_plus[0][0], 0.2, max_relative = 1e-15);
        assert_relative_eq!(rates.w_minus[0][0], 0.8, max_relative = 1e-15);
    }

    #[test]
    fn reference_r1_collective_rates() {
        for phi in [0.0, 0.3, -0.8, 1.0] {
            let spec = RSymmetricSpec::from_collective_rates(0.25, 0.75, 1.0, phi);
            let rates = RateSet::from_params(&expand_r_symmetric(&spec).unwrap()).unwrap();
            assert_relative_eq!(rates.w[0], 0.25, max_relative = 1e-14);
            assert_relative_eq!(rates.w_bar[0], 0.75, max_relative = 1e-14);
            assert_relative_eq!(rates.big_phi, phi * 0.25, epsilon = 1e-15);
            assert_relative_eq!(rates.big_phi_bar, phi * 0.75, epsilon = 1e-15);
        }
    }

    #[test]
    fn plane_r_symmetric_expansion() {
        let k = 8.0 * PI;
        let spec = RSymmetricSpec {
            k: [k, k],
            r: 4.0,
            occupation: [0.2, 0.1],
            phi: [0.0, 0.0],
        };
        let params = expand_r_symmetric(&spec).unwrap();
        assert_relative_eq!(
            params.coupling_sq(HOT, 0),
            8.0 * PI / 17.0,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            params.coupling_sq(COLD, 1),
            128.0 * PI / 17.0,
            max_relative = 1e-15
        );
        let rates = RateSet::from_params(&params).unwrap();
        assert_relative_eq!(
            rates.w_plus[HOT][0],
            2.0 * PI * (8.0 * PI / 17.0) * 0.2,
            max_relative = 1e-14
        );
        for a in 0..2 {
            assert_relative_eq!(
                rates.w_plus[a][1] / rates.w_plus[a][0],
                16.0,
                max_relative = 1e-14
            );
        }
        assert_relative_eq!(rates.w[1] / rates.w[0], 16.0, max_relative = 1e-14);
        assert_relative_eq!(rates.w_bar[1] / rates.w_bar[0], 16.0, max_relative = 1e-14);
    }

    #[test]
    fn r_one_equal_couplings() {
        let spec = RSymmetricSpec {
            k: [3.0, 3.0],
            r: 1.0,
            occupation: [0.3, 0.1],
            phi: [0.2, 0.2],
        };
        let p = expand_r_symmetric(&spec).unwrap();
        let g = p.coupling_sq(0, 0);
        for a in 0..2 {
            for d in 0..2 {
                assert_eq!(p.coupling_sq(a, d), g);
            }
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let spec = RSymmetricSpec {
            k: [1.0, 1.0],
            r: 0.0,
            occupation: [0.3, 0.1],
            phi: [0.0, 0.0],
        };
        assert!(expand_r_symmetric(&spec).is_err());
        let bad_phi = RSymmetricSpec {
            r: 1.0,
            phi: [1.0 + 1e-6, 0.0],
            ..spec
        };
        assert!(expand_r_symmetric(&bad_phi).is_err());
        let exact_one = RSymmetricSpec {
            r: 1.0,
            phi: [1.0, -1.0],
            ..spec
        };
        assert!(expand_r_symmetric(&exact_one).is_ok());
    }

    #[test]
    fn fully_symmetric_detection() {
        let spec = RSymmetricSpec {
            k: [2.0, 5.0],
            r: 4.0,
            occupation: [0.3, 0.1],
            phi: [0.6, 0.6],
        };
        let rates = RateSet::from_params(&expand_r_symmetric(&spec).unwrap()).unwrap();
        let fs = rates.fully_symmetric(1e-10).unwrap();
        assert_relative_eq!(fs.r, 4.0, max_relative = 1e-12);
        assert_relative_eq!(fs.phi, 0.6, max_relative = 1e-12);
        let broken =
            RateSet::from_params(&expand_r_symmetric(&spec.with_phi(0.6, 0.5)).unwrap()).unwrap();
        assert!(broken.fully_symmetric(1e-10).is_none());
    }
}
