//! Particle currents, their classical/quantum split, conductances, power
//! and efficiency, and the bias expansion of the relative quantum
//! conductance.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::liouvillian::StateVector;
use crate::model::{expand_r_symmetric, EngineParams, RSymmetricSpec, RateSet, COLD, HOT};
use crate::steadystate::{reduced_determinant, singular_tolerance, SteadyStateResult};

/// Step in ΔN for the central difference behind S¹.
pub const S1_BIAS_STEP: f64 = 1e-4;

/// J^a_d = w^a_{d+}ρ00 − w^a_{d−}ρdd − φ^a√(w^a_{1−}w^a_{2−})·(ρ12+ρ21)/2,
/// indexed `[bath][dot]`.
pub fn instantaneous_currents(rates: &RateSet, state: &StateVector) -> [[f64; 2]; 2] {
    let pops = [state.rho11, state.rho22];
    let coh = 0.5 * (state.rho12 + state.rho21).re;
    let mut j = [[0.0; 2]; 2];
    for a in 0..2 {
        for d in 0..2 {
            j[a][d] = rates.w_plus[a][d] * state.rho00
                - rates.w_minus[a][d] * pops[d]
                - rates.interference_out(a) * coh;
        }
    }
    j
}

/// |L0| = W1W̄2 + W̄1W2 + W̄1W̄2, the reduced determinant without interference.
pub fn incoherent_determinant(rates: &RateSet) -> f64 {
    let [w1, w2] = rates.w;
    let [wb1, wb2] = rates.w_bar;
    w1 * wb2 + wb1 * w2 + wb1 * wb2
}

/// Classical conductances J^cl_d/ΔN = (2π)²|g^h_d|²|g^c_d|²·W̄_{d'}/|L0|.
pub fn classical_conductances(rates: &RateSet, params: &EngineParams) -> [f64; 2] {
    let l0 = incoherent_determinant(rates);
    let pair =
        |d: usize| (2.0 * PI).powi(2) * params.coupling_sq(HOT, d) * params.coupling_sq(COLD, d);
    [pair(0) * rates.w_bar[1] / l0, pair(1) * rates.w_bar[0] / l0]
}

/// J^cl_d, the steady current with interference switched off.
pub fn classical_currents(rates: &RateSet, params: &EngineParams) -> Result<[f64; 2]> {
    let dn = params.bias()?;
    let s = classical_conductances(rates, params);
    Ok([s[0] * dn, s[1] * dn])
}

/// J^cl_d from the rates alone, (w^h_{d+}W̄_d − w^h_{d−}W_d)·W̄_{d'}/|L0|.
pub fn classical_currents_from_rates(rates: &RateSet) -> [f64; 2] {
    let l0 = incoherent_determinant(rates);
    let drive =
        |d: usize| rates.w_plus[HOT][d] * rates.w_bar[d] - rates.w_minus[HOT][d] * rates.w[d];
    [
        drive(0) * rates.w_bar[1] / l0,
        drive(1) * rates.w_bar[0] / l0,
    ]
}

/// Ψ_d = ∂J_d/∂ρ12 along the stationary population relations.
pub fn quantum_speed(rates: &RateSet) -> [f64; 2] {
    let l0 = incoherent_determinant(rates);
    let pb = rates.big_phi_bar;
    let [w1, w2] = rates.w;
    let [wb1, wb2] = rates.w_bar;
    let sum_bar = wb1 + wb2;
    let direct = rates.interference_out(HOT);
    let psi = |d: usize, w_self: f64, w_other: f64, wb_other: f64| {
        pb / l0
            * (rates.w_plus[HOT][d] * sum_bar
                + rates.w_minus[HOT][d] * (w_other + wb_other - w_self))
            - direct
    };
    [psi(0, w1, w2, wb2), psi(1, w2, w1, wb1)]
}

/// ρ12(∞)/ΔN from the coupling constants; independent of the generic
/// steady-state solver.
pub fn coherence_per_bias(rates: &RateSet, params: &EngineParams) -> Result<f64> {
    let det = reduced_determinant(rates);
    if det.abs() <= singular_tolerance(rates) {
        return Err(Error::Singular { det });
    }
    let [wb1, wb2] = rates.w_bar;
    let g = |a: usize, d: usize| params.tunneling[a][d];
    let gsq = |a: usize, d: usize| params.coupling_sq(a, d);
    let [phi_h, phi_c] = params.phi;
    let num = g(HOT, 0) * g(HOT, 1) * phi_h * (gsq(COLD, 1) * wb1 + gsq(COLD, 0) * wb2)
        - g(COLD, 0) * g(COLD, 1) * phi_c * (gsq(HOT, 1) * wb1 + gsq(HOT, 0) * wb2);
    Ok((2.0 * PI).powi(2) / det * num / (wb1 + wb2))
}

/// ρ12(∞) in closed form, proportional to ΔN.
pub fn steady_coherence(rates: &RateSet, params: &EngineParams) -> Result<f64> {
    Ok(coherence_per_bias(rates, params)? * params.bias()?)
}

/// Per-dot conductances split into classical and quantum parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Conductances {
    pub sigma_cl: [f64; 2],
    pub sigma_q: [f64; 2],
}

impl Conductances {
    pub fn total_classical(&self) -> f64 {
        self.sigma_cl[0] + self.sigma_cl[1]
    }

    pub fn total_quantum(&self) -> f64 {
        self.sigma_q[0] + self.sigma_q[1]
    }

    pub fn per_dot(&self, dot: usize) -> f64 {
        self.sigma_cl[dot] + self.sigma_q[dot]
    }

    /// σ^q_d / σ^cl_d.
    pub fn relative_quantum(&self) -> [f64; 2] {
        [
            self.sigma_q[0] / self.sigma_cl[0],
            self.sigma_q[1] / self.sigma_cl[1],
        ]
    }
}

/// σ_d = J_d(∞)/ΔN at finite bias, with σ^q_d = Ψ_d·ρ12(∞)/ΔN.
pub fn conductances(rates: &RateSet, params: &EngineParams) -> Result<Conductances> {
    if params.bias()? == 0.0 {
        return Err(Error::ZeroBias);
    }
    let c = coherence_per_bias(rates, params)?;
    let psi = quantum_speed(rates);
    Ok(Conductances {
        sigma_cl: classical_conductances(rates, params),
        sigma_q: [psi[0] * c, psi[1] * c],
    })
}

/// lim_{ΔN→0} of the total quantum conductance at the mean occupation
/// N = (N^h + N^c)/2, as a negative-definite square.
pub fn linear_response_sigma_q(params: &EngineParams) -> Result<f64> {
    let [nh, nc] = params.occupations()?;
    let n = 0.5 * (nh + nc);
    let nbar = 1.0 - n;
    let g = |a: usize, d: usize| params.tunneling[a][d];
    let gsq = |a: usize, d: usize| params.coupling_sq(a, d);
    let sum1 = gsq(HOT, 0) + gsq(COLD, 0);
    let sum2 = gsq(HOT, 1) + gsq(COLD, 1);
    let wb1 = 2.0 * PI * nbar * sum1;
    let wb2 = 2.0 * PI * nbar * sum2;
    let [phi_h, phi_c] = params.phi;
    let cross = g(HOT, 0) * g(HOT, 1) * phi_h + g(COLD, 0) * g(COLD, 1) * phi_c;
    let det_eq = (2.0 * PI).powi(2) * (1.0 + n) * nbar * (sum1 * sum2 - cross * cross);
    let scale = (2.0 * PI).powi(2) * (1.0 + n) * nbar * sum1 * sum2;
    if det_eq.abs() <= 1e-12 * scale {
        return Err(Error::Singular { det: det_eq });
    }
    let bracket = g(HOT, 0) * g(HOT, 1) * phi_h * (gsq(COLD, 1) * wb1 + gsq(COLD, 0) * wb2)
        - g(COLD, 0) * g(COLD, 1) * phi_c * (gsq(HOT, 1) * wb1 + gsq(HOT, 0) * wb2);
    Ok(-(2.0 * PI).powi(2) * bracket * bracket / (sum1 * sum2 * (wb1 + wb2) * det_eq))
}

/// P = (μc − μh)·Σ_d J_d, or `None` for occupation-only baths.
pub fn power(params: &EngineParams, currents: [f64; 2]) -> Option<f64> {
    let (mu_h, mu_c) = params.chemical_potentials()?;
    Some((mu_c - mu_h) * (currents[0] + currents[1]))
}

/// η = (μc − μh)/(E − μh), or `Ok(None)` for occupation-only baths.
pub fn efficiency(params: &EngineParams) -> Result<Option<f64>> {
    let Some((mu_h, mu_c)) = params.chemical_potentials() else {
        return Ok(None);
    };
    let gap = params.dot_energy - mu_h;
    if gap == 0.0 {
        return Err(Error::EfficiencyUndefined);
    }
    Ok(Some((mu_c - mu_h) / gap))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransportReport {
    /// J^a_d, `[bath][dot]`.
    pub j: [[f64; 2]; 2],
    pub j_cl: [f64; 2],
    pub j_q: [f64; 2],
    pub psi: [f64; 2],
    pub rho12_inf: f64,
    pub sigma_cl: [f64; 2],
    pub sigma_q: [f64; 2],
    pub delta_n: f64,
    /// Present only with thermal baths.
    pub power: Option<f64>,
    /// Q̇^h = (E − μh)·Σ_d J_d, present only with thermal baths.
    pub heat_hot: Option<f64>,
    pub efficiency: Option<f64>,
}

impl TransportReport {
    /// J_d(∞) = J^h_d.
    pub fn current(&self, dot: usize) -> f64 {
        self.j[HOT][dot]
    }

    pub fn total_current(&self) -> f64 {
        self.j[HOT][0] + self.j[HOT][1]
    }

    pub fn total_quantum_conductance(&self) -> f64 {
        self.sigma_q[0] + self.sigma_q[1]
    }

    pub fn total_quantum_speed(&self) -> f64 {
        self.psi[0] + self.psi[1]
    }
}

/// σ^q_d for a steady state: Ψ_d·ρ12(∞)/ΔN at finite bias, otherwise the
/// ΔN → 0 limit (on the maximal-interference family, Ψ_d/ΔN =
/// ±(1+r²)/r·σ^cl_d).
pub fn quantum_conductances(
    rates: &RateSet,
    params: &EngineParams,
    steady: &SteadyStateResult,
) -> Result<[f64; 2]> {
    let delta_n = params.bias()?;
    let psi = quantum_speed(rates);
    let rho12 = steady.state.rho12.re;
    if delta_n != 0.0 {
        return Ok([psi[0] * rho12 / delta_n, psi[1] * rho12 / delta_n]);
    }
    if let Some(family) = &steady.family {
        let sigma_cl = classical_conductances(rates, params);
        let f = family.branch.sign() * (1.0 + family.r * family.r) / family.r;
        return Ok([f * sigma_cl[0] * rho12, f * sigma_cl[1] * rho12]);
    }
    let c = coherence_per_bias(rates, params)?;
    Ok([psi[0] * c, psi[1] * c])
}

/// Assembles currents, their decomposition and conductances for a steady
/// state (the unique one, or a selected family member). At ΔN = 0 the
/// conductances are the analytic limits.
pub fn transport_report(
    rates: &RateSet,
    params: &EngineParams,
    steady: &SteadyStateResult,
) -> Result<TransportReport> {
    let delta_n = params.bias()?;
    let state = &steady.state;
    let j = instantaneous_currents(rates, state);
    let sigma_cl = classical_conductances(rates, params);
    let j_cl = [sigma_cl[0] * delta_n, sigma_cl[1] * delta_n];
    let psi = quantum_speed(rates);
    let rho12_inf = state.rho12.re;
    let j_q = [psi[0] * rho12_inf, psi[1] * rho12_inf];

    let sigma_q = quantum_conductances(rates, params, steady)?;

    let flow = [j[HOT][0], j[HOT][1]];
    let power = power(params, flow);
    let heat_hot = params
        .chemical_potentials()
        .map(|(mu_h, _)| (params.dot_energy - mu_h) * (flow[0] + flow[1]));
    let efficiency = efficiency(params)?;

    Ok(TransportReport {
        j,
        j_cl,
        j_q,
        psi,
        rho12_inf,
        sigma_cl,
        sigma_q,
        delta_n,
        power,
        heat_hot,
        efficiency,
    })
}

/// Relative quantum conductance σ^q_d/σ^cl_d = S⁰_d + S¹_d·ΔN + O(ΔN²) in
/// the r-symmetric configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResponseExpansion {
    pub s0: [f64; 2],
    pub s1: [f64; 2],
    /// Leading small-detuning form of S¹ (equal for both dots); absent at
    /// |φ^h| = 1.
    pub s1_small_detuning: Option<f64>,
}

/// 𝓛 = (k^h N̄^h + k^c N̄^c)(k^h Ñ^h + k^c Ñ^c)
///     − (k^h φ^h N̄^h + k^c φ^c N̄^c)(k^h φ^h Ñ^h + k^c φ^c Ñ^c),
/// with N̄ = 1 − N and Ñ = 1 + N.
fn script_l(spec: &RSymmetricSpec) -> f64 {
    let [kh, kc] = spec.k;
    let [nh, nc] = spec.occupation;
    let [ph, pc] = spec.phi;
    let (bh, bc) = (1.0 - nh, 1.0 - nc);
    let (th, tc) = (1.0 + nh, 1.0 + nc);
    (kh * bh + kc * bc) * (kh * th + kc * tc)
        - (kh * ph * bh + kc * pc * bc) * (kh * ph * th + kc * pc * tc)
}

/// 𝓛^eq = (1 − N²)[(k^h + k^c)² − (k^h φ^h + k^c φ^c)²] at the mean N.
fn script_l_eq(spec: &RSymmetricSpec) -> f64 {
    let [kh, kc] = spec.k;
    let [ph, pc] = spec.phi;
    let n = spec.mean_occupation();
    (1.0 - n * n) * ((kh + kc).powi(2) - (kh * ph + kc * pc).powi(2))
}

/// σ^cl_1 = 2π/(1+r²)·k^h k^c/(k^h Ñ^h + k^c Ñ^c); σ^cl_2 = r²σ^cl_1.
pub fn r_symmetric_classical_conductances(spec: &RSymmetricSpec) -> [f64; 2] {
    let [kh, kc] = spec.k;
    let [nh, nc] = spec.occupation;
    let r2 = spec.r * spec.r;
    let s1 = 2.0 * PI / (1.0 + r2) * kh * kc / (kh * (1.0 + nh) + kc * (1.0 + nc));
    [s1, r2 * s1]
}

/// σ^q_d/σ^cl_d at finite bias from the r-symmetric closed form.
pub fn nonlinear_ratio(spec: &RSymmetricSpec) -> Result<[f64; 2]> {
    let l = script_l(spec);
    let [kh, kc] = spec.k;
    let [nh, nc] = spec.occupation;
    let [ph, pc] = spec.phi;
    let (bh, bc) = (1.0 - nh, 1.0 - nc);
    let scale = (kh + kc).powi(2);
    if l.abs() <= 1e-12 * scale {
        return Err(Error::Singular { det: l });
    }
    let r2 = spec.r * spec.r;
    let common = 2.0 * (ph - pc) / l * kh * kc / (kh * bh + kc * bc);
    let ksum = kh + kc;
    let kn = kh * nh + kc * nc;
    let bracket = pc * (ksum - kn * nh) * bc - ph * (ksum - kn * nc) * bh;
    let bias_term = (ph * kh * bh + pc * kc * bc) * (nh - nc);
    let a = common * bracket;
    let b = common * bias_term;
    Ok([(r2 * a + b) / (1.0 + r2), (a + r2 * b) / (1.0 + r2)])
}

/// S⁰_1 = −r²/(1+r²)·2k^h k^c(1−N²)(φ^h−φ^c)²/𝓛^eq and S⁰_2 = S⁰_1/r².
pub fn linear_coefficients(spec: &RSymmetricSpec) -> Result<[f64; 2]> {
    let [kh, kc] = spec.k;
    let l_eq = script_l_eq(spec);
    let n = spec.mean_occupation();
    let scale = (1.0 - n * n) * (kh + kc).powi(2);
    if l_eq.abs() <= 1e-12 * scale {
        return Err(Error::Singular { det: l_eq });
    }
    let r2 = spec.r * spec.r;
    let dphi = spec.phi[HOT] - spec.phi[COLD];
    let base = -2.0 * kh * kc * (1.0 - n * n) * dphi * dphi / l_eq;
    Ok([r2 / (1.0 + r2) * base, base / (1.0 + r2)])
}

/// 2k^h k^c φΔφ / [(1−N²)(k^h+k^c)²(1−φ²)] with φ = φ^h, Δφ = φ^h − φ^c.
pub fn s1_small_detuning(spec: &RSymmetricSpec) -> Result<f64> {
    let [kh, kc] = spec.k;
    let phi = spec.phi[HOT];
    if (1.0 - phi * phi).abs() <= crate::model::PHI_TOLERANCE {
        return Err(Error::MaximalInterference);
    }
    let n = spec.mean_occupation();
    let dphi = spec.phi[HOT] - spec.phi[COLD];
    Ok(2.0 * kh * kc * phi * dphi / ((1.0 - n * n) * (kh + kc).powi(2) * (1.0 - phi * phi)))
}

/// S⁰ in closed form and S¹ as the symmetric derivative of the nonlinear
/// ratio in ΔN about ΔN = 0, at fixed mean occupation.
pub fn response_expansion(spec: &RSymmetricSpec) -> Result<ResponseExpansion> {
    expand_r_symmetric(spec)?;
    let s0 = linear_coefficients(spec)?;
    let h = S1_BIAS_STEP;
    let zero = spec.with_bias(0.0);
    let up = nonlinear_ratio(&zero.with_bias(h))?;
    let down = nonlinear_ratio(&zero.with_bias(-h))?;
    let s1 = [(up[0] - down[0]) / (2.0 * h), (up[1] - down[1]) / (2.0 * h)];
    Ok(ResponseExpansion {
        s0,
        s1,
        s1_small_detuning: s1_small_detuning(spec).ok(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::BathSpec;
    use crate::steadystate::solve_steady_state;
    use approx::assert_relative_eq;

    fn plane(phi_h: f64, phi_c: f64) -> RSymmetricSpec {
        RSymmetricSpec {
            k: [8.0 * PI, 8.0 * PI],
            r: 4.0,
            occupation: [0.2, 0.1],
            phi: [phi_h, phi_c],
        }
    }

    fn setup(spec: &RSymmetricSpec) -> (RateSet, EngineParams) {
        let params = expand_r_symmetric(spec).unwrap();
        (RateSet::from_params(&params).unwrap(), params)
    }

    fn asymmetric(phi: [f64; 2]) -> EngineParams {
        EngineParams {
            dot_energy: 1.0,
            baths: [BathSpec::thermal(2.0, 0.2), BathSpec::thermal(0.5, 0.4)],
            tunneling: [[0.7, 1.3], [0.4, 0.9]],
            phi,
        }
    }

    #[test]
    fn empty_state_currents_are_inflow() {
        let (rates, _) = setup(&plane(0.3, -0.2));
        let j = instantaneous_currents(&rates, &StateVector::empty());
        assert_eq!(j, rates.w_plus);
    }

    #[test]
    fn decomposition_and_balance() {
        for phi in [[0.3, -0.8], [0.9, 0.9], [-0.5, 0.7]] {
            let params = asymmetric(phi);
            let rates = RateSet::from_params(&params).unwrap();
            let ss = solve_steady_state(&rates, None).unwrap();
            let j = instantaneous_currents(&rates, &ss.state);
            let j_cl = classical_currents(&rates, &params).unwrap();
            let psi = quantum_speed(&rates);
            let rho12 = steady_coherence(&rates, &params).unwrap();
            assert_relative_eq!(rho12, ss.state.rho12.re, epsilon = 1e-12);
            for d in 0..2 {
                assert!((j[HOT][d] + j[COLD][d]).abs() < 1e-12);
                assert!((j[HOT][d] - j_cl[d] - psi[d] * rho12).abs() < 1e-12);
            }
            let alt = classical_currents_from_rates(&rates);
            assert_relative_eq!(alt[0], j_cl[0], epsilon = 1e-12);
            assert_relative_eq!(alt[1], j_cl[1], epsilon = 1e-12);
        }
    }

    #[test]
    fn quantum_speed_is_the_coherence_derivative() {
        let params = asymmetric([0.6, -0.3]);
        let rates = RateSet::from_params(&params).unwrap();
        let psi = quantum_speed(&rates);
        let [w1, w2] = rates.w;
        let [wb1, wb2] = rates.w_bar;
        let pb = rates.big_phi_bar;
        // populations slaved to a given ρ12 through the stationary population rows
        let state_for = |c: f64| {
            let r00 = (wb1 * wb2 + pb * c * (wb1 + wb2)) / incoherent_determinant(&rates);
            let r11 = (w1 * r00 - pb * c) / wb1;
            let r22 = (w2 * r00 - pb * c) / wb2;
            StateVector::new(r00, r11, r22, c)
        };
        let h = 1e-5;
        let jp = instantaneous_currents(&rates, &state_for(h));
        let jm = instantaneous_currents(&rates, &state_for(-h));
        for d in 0..2 {
            assert_relative_eq!(
                (jp[HOT][d] - jm[HOT][d]) / (2.0 * h),
                psi[d],
                epsilon = 1e-8
            );
        }
    }

    #[test]
    fn fully_symmetric_quantum_speed() {
        let spec = plane(0.7, 0.7);
        let (rates, params) = setup(&spec);
        let psi = quantum_speed(&rates);
        let j_cl = classical_currents(&rates, &params).unwrap();
        let f = 0.7 * (1.0 + 16.0) / 4.0;
        for d in 0..2 {
            assert_relative_eq!(psi[d], f * j_cl[d], max_relative = 1e-10);
        }
        let (eq_rates, _) = setup(&spec.with_bias(0.0));
        for p in quantum_speed(&eq_rates) {
            assert!(p.abs() < 1e-12);
        }
    }

    #[test]
    fn classical_r_symmetric_relations() {
        let spec = plane(0.2, -0.4);
        let (rates, params) = setup(&spec);
        let j = classical_currents(&rates, &params).unwrap();
        assert!(j[0] > 0.0 && j[1] > 0.0);
        assert_relative_eq!(j[1], 16.0 * j[0], max_relative = 1e-14);
        let closed = r_symmetric_classical_conductances(&spec);
        let s = classical_conductances(&rates, &params);
        assert_relative_eq!(closed[0], s[0], max_relative = 1e-13);
        assert_relative_eq!(closed[1], s[1], max_relative = 1e-13);
    }

    #[test]
    fn coherence_vanishes_on_diagonal_and_without_bias() {
        let (rates, params) = setup(&plane(0.4, 0.4));
        assert!(steady_coherence(&rates, &params).unwrap().abs() < 1e-15);
        let (rates, params) = setup(&plane(0.4, -0.1).with_bias(0.0));
        assert_eq!(steady_coherence(&rates, &params).unwrap(), 0.0);
    }

    #[test]
    fn zero_bias_is_rejected() {
        let (rates, params) = setup(&plane(0.4, -0.1).with_bias(0.0));
        assert_eq!(conductances(&rates, &params), Err(Error::ZeroBias));
    }

    #[test]
    fn nonlinear_ratio_matches_general_route() {
        for (ph, pc) in [
            (0.5, 0.0),
            (-0.9, 0.8),
            (0.95, 0.9),
            (0.3, 0.3),
            (1.0, -1.0),
        ] {
            let spec = plane(ph, pc);
            let (rates, params) = setup(&spec);
            let general = conductances(&rates, &params).unwrap().relative_quantum();
            let closed = nonlinear_ratio(&spec).unwrap();
            for d in 0..2 {
                assert!(
                    (general[d] - closed[d]).abs() < 1e-10 * general[d].abs().max(1.0),
                    "({ph}, {pc}) dot {d}: {} vs {}",
                    general[d],
                    closed[d]
                );
            }
        }
    }

    #[test]
    fn linear_limit_matches_general_route() {
        for phi in [[0.3, -0.8], [0.9, 0.9], [-0.5, 0.7]] {
            let params = asymmetric(phi);
            let [nh, nc] = params.occupations().unwrap();
            let n = 0.5 * (nh + nc);
            let eq = params.with_occupations(n, n);
            let rates = RateSet::from_params(&eq).unwrap();
            let psi = quantum_speed(&rates);
            let c = coherence_per_bias(&rates, &eq).unwrap();
            let limit = linear_response_sigma_q(&params).unwrap();
            assert_relative_eq!((psi[0] + psi[1]) * c, limit, max_relative = 1e-10);
            assert!(limit <= 0.0);
        }
    }

    #[test]
    fn linear_coefficients_match_zero_bias_ratio() {
        let spec = plane(0.6, -0.2).with_bias(0.0);
        let s0 = linear_coefficients(&spec).unwrap();
        let ratio = nonlinear_ratio(&spec).unwrap();
        assert_relative_eq!(s0[0], ratio[0], max_relative = 1e-12);
        assert_relative_eq!(s0[1], ratio[1], max_relative = 1e-12);
        assert_relative_eq!(s0[0], 16.0 * s0[1], max_relative = 1e-12);
        assert!(s0[0] < 0.0);
    }

    #[test]
    fn expansion_reproduces_finite_bias_ratio() {
        let spec = plane(0.5, 0.1);
        let ex = response_expansion(&spec).unwrap();
        let slope = |dn: f64| {
            let (rates, params) = setup(&spec.with_bias(dn));
            let r = conductances(&rates, &params).unwrap().relative_quantum();
            [(r[0] - ex.s0[0]) / dn, (r[1] - ex.s0[1]) / dn]
        };
        let (a, b) = (slope(1e-4), slope(2e-4));
        for d in 0..2 {
            // slope(h) = S1 + S2·h + O(h²); eliminate the S2 term
            let extrapolated = 2.0 * a[d] - b[d];
            assert_relative_eq!(extrapolated, ex.s1[d], max_relative = 1e-6);
        }
    }

    #[test]
    fn small_detuning_form_of_s1() {
        let phi = 0.5;
        let dphi = 1e-3;
        let spec = plane(phi, phi - dphi);
        let ex = response_expansion(&spec).unwrap();
        let approx = ex.s1_small_detuning.unwrap();
        for d in 0..2 {
            assert_relative_eq!(ex.s1[d], approx, max_relative = 1e-2);
        }
        assert_eq!(
            s1_small_detuning(&plane(1.0, 0.8)),
            Err(Error::MaximalInterference)
        );
    }

    #[test]
    fn efficiency_depends_only_on_chemical_potentials() {
        let a = efficiency(&asymmetric([0.1, 0.2])).unwrap().unwrap();
        let mut p = asymmetric([-0.7, 0.9]);
        p.tunneling = [[2.0, 0.1], [0.3, 0.3]];
        p.baths = [BathSpec::thermal(5.0, 0.2), BathSpec::thermal(0.1, 0.4)];
        assert_eq!(efficiency(&p).unwrap().unwrap(), a);
        assert_relative_eq!(a, 0.2 / 0.8, epsilon = 1e-15);
        p.dot_energy = 0.2;
        assert_eq!(efficiency(&p), Err(Error::EfficiencyUndefined));
    }

    #[test]
    fn report_at_equal_chemical_potentials() {
        let mut p = asymmetric([0.4, -0.4]);
        p.baths = [BathSpec::thermal(2.0, 0.3), BathSpec::thermal(0.5, 0.3)];
        let rates = RateSet::from_params(&p).unwrap();
        let ss = solve_steady_state(&rates, None).unwrap();
        let rep = transport_report(&rates, &p, &ss).unwrap();
        assert_eq!(rep.power, Some(0.0));
        assert_eq!(rep.efficiency, Some(0.0));
        let occ = plane(0.3, 0.1);
        let (rates, params) = setup(&occ);
        let ss = solve_steady_state(&rates, None).unwrap();
        let rep = transport_report(&rates, &params, &ss).unwrap();
        assert_eq!(rep.power, None);
        assert_eq!(rep.efficiency, None);
    }

    #[test]
    fn back_flow_near_anti_diagonal_corner() {
        let spec = plane(0.98, -0.98);
        let (rates, params) = setup(&spec);
        let ss = solve_steady_state(&rates, None).unwrap();
        let rep = transport_report(&rates, &params, &ss).unwrap();
        assert!(rep.current(0) < 0.0, "{}", rep.current(0));
    }
}
