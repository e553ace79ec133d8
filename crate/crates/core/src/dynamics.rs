//! Time evolution: spectral propagation, a fixed-step RK4 oracle and the
//! two-component closed form for the fully symmetric r = 1 engine.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use nalgebra::{Matrix5, SMatrix, SVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::liouvillian::{Liouvillian, StateVector};
use crate::model::RateSet;
use crate::spectral::numeric_eigensystem;
use crate::steadystate::SYMMETRY_RELATIVE_TOL;

/// dt·‖L‖∞ must stay below this for RK4.
pub const RK4_STABILITY_LIMIT: f64 = 0.5;

/// Below this reciprocal condition number the eigenvector basis is rejected.
pub const BASIS_RCOND_MIN: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Spectral,
    Rk4,
    SymmetricR1,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<StateVector>,
    pub method: Method,
    /// Integrator step, for RK4.
    pub step: Option<f64>,
    /// Hash of the generator's bit pattern.
    pub params_hash: u64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<&StateVector> {
        self.states.last()
    }

    pub fn max_trace_error(&self) -> f64 {
        self.states
            .iter()
            .map(|s| (s.trace() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    pub fn min_density_eigenvalue(&self) -> f64 {
        self.states
            .iter()
            .map(StateVector::min_eigenvalue)
            .fold(f64::INFINITY, f64::min)
    }

    /// Smallest distance in the (ρ12, ρ11) plane to `center = (ρ12, ρ11)`.
    pub fn min_distance(&self, center: (f64, f64)) -> f64 {
        self.states
            .iter()
            .map(|s| plane_distance(s, center))
            .fold(f64::INFINITY, f64::min)
    }

    /// Total time spent within `eps` of `center` in the (ρ12, ρ11) plane,
    /// each sample counting for the interval that follows it.
    pub fn dwell_time(&self, center: (f64, f64), eps: f64) -> f64 {
        self.times
            .windows(2)
            .zip(&self.states)
            .filter(|(_, s)| plane_distance(s, center) < eps)
            .map(|(w, _)| w[1] - w[0])
            .sum()
    }
}

fn plane_distance(s: &StateVector, (x, y): (f64, f64)) -> f64 {
    (s.rho12.re - x).hypot(s.rho11 - y)
}

fn params_hash(l: &Liouvillian) -> u64 {
    let mut h = DefaultHasher::new();
    for x in l.l5.iter() {
        x.to_bits().hash(&mut h);
    }
    for z in l.lower.iter() {
        z.re.to_bits().hash(&mut h);
        z.im.to_bits().hash(&mut h);
    }
    h.finish()
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(Error::InvalidParameter {
            name: "times",
            reason: "sample times must be finite and nonnegative".into(),
        });
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParameter {
            name: "times",
            reason: "sample times must be nondecreasing".into(),
        });
    }
    Ok(())
}

/// 0.01 / max(W1 + W2, W̄1 + W̄2).
pub fn default_dt(rates: &RateSet) -> f64 {
    let gain = rates.w[0] + rates.w[1];
    let loss = rates.w_bar[0] + rates.w_bar[1];
    0.01 / gain.max(loss)
}

/// `count` sample times 0, interval, 2·interval, …
pub fn uniform_times(interval: f64, count: usize) -> Vec<f64> {
    (0..count).map(|k| k as f64 * interval).collect()
}

/// P(t) = V·diag(e^{λt})·V⁻¹·P(0) on the 5×5 block. At the singular point
/// the eigenbasis already contains a two-dimensional null space, so the
/// initial state is projected onto the correct member of the family.
/// Tracked empty/occupied coherences are propagated by the exponential of
/// the decoupled 4×4 block.
pub fn evolve_spectral(
    l: &Liouvillian,
    initial: &StateVector,
    times: &[f64],
) -> Result<Trajectory> {
    check_times(times)?;
    let es = numeric_eigensystem(l)?;
    let mut v = Matrix5::<Complex64>::zeros();
    for (k, p) in es.pairs.iter().enumerate() {
        v.set_column(k, &p.vector);
    }
    let sv = v.singular_values();
    let rcond = sv.min() / sv.max();
    if !(rcond >= BASIS_RCOND_MIN) {
        return Err(Error::DefectiveBasis { rcond });
    }
    let chi = v
        .lu()
        .solve(&initial.to_vector5())
        .ok_or(Error::DefectiveBasis { rcond })?;
    let lambdas: Vec<Complex64> = es.eigenvalues();

    let states = times
        .iter()
        .map(|&t| {
            if t == 0.0 {
                return *initial;
            }
            let mut coeff = chi;
            for (c, lam) in coeff.iter_mut().zip(&lambdas) {
                *c *= (lam * t).exp();
            }
            let mut s = StateVector::from_vector5(&(v * coeff));
            if let Some(outer) = initial.outer {
                let x0 = nalgebra::Vector4::from(outer);
                let x = (l.lower * Complex64::new(t, 0.0)).exp() * x0;
                s.outer = Some([x[0], x[1], x[2], x[3]]);
            }
            s
        })
        .collect();

    Ok(Trajectory {
        times: times.to_vec(),
        states,
        method: Method::Spectral,
        step: None,
        params_hash: params_hash(l),
    })
}

fn rk4_step<const N: usize>(
    m: &SMatrix<Complex64, N, N>,
    x: &SVector<Complex64, N>,
    h: f64,
) -> SVector<Complex64, N> {
    let hc = Complex64::new(h, 0.0);
    let k1 = m * x;
    let k2 = m * (x + k1 * (hc * 0.5));
    let k3 = m * (x + k2 * (hc * 0.5));
    let k4 = m * (x + k3 * hc);
    let two = Complex64::new(2.0, 0.0);
    x + (k1 + k2 * two + k3 * two + k4) * (hc / 6.0)
}

/// One RK4 step of a linear system as a matrix,
/// I + hL + (hL)²/2 + (hL)³/6 + (hL)⁴/24.
fn rk4_map<const N: usize>(m: &SMatrix<Complex64, N, N>, h: f64) -> SMatrix<Complex64, N, N> {
    let a = m * Complex64::new(h, 0.0);
    let a2 = a * a;
    let a3 = a2 * a;
    let a4 = a3 * a;
    let c = |x: f64| Complex64::new(x, 0.0);
    SMatrix::<Complex64, N, N>::identity()
        + a
        + a2 * c(0.5)
        + a3 * c(1.0 / 6.0)
        + a4 * c(1.0 / 24.0)
}

fn stability_guard(norm: f64, dt: f64) -> Result<()> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidParameter {
            name: "dt",
            reason: format!("step must be positive and finite, got {dt}"),
        });
    }
    let product = dt * norm;
    if product >= RK4_STABILITY_LIMIT {
        return Err(Error::StepTooLarge { product });
    }
    Ok(())
}

/// Number of equal steps no longer than `dt` covering `span`.
fn step_count(span: f64, dt: f64) -> usize {
    if span <= 0.0 {
        0
    } else {
        (span / dt * (1.0 - 1e-12)).ceil().max(1.0) as usize
    }
}

fn l5_complex(l: &Liouvillian) -> SMatrix<Complex64, 5, 5> {
    l.l5.map(|x| Complex64::new(x, 0.0))
}

/// Fixed-step RK4 on the 5-vector from t = 0 to `t_final`, recording every
/// step. The step is shrunk so that an integer number of steps lands
/// exactly on `t_final`.
pub fn evolve_rk4(
    l: &Liouvillian,
    initial: &StateVector,
    t_final: f64,
    dt: f64,
) -> Result<Trajectory> {
    stability_guard(l.norm_inf(), dt)?;
    check_times(&[t_final])?;
    let n = step_count(t_final, dt);
    let h = if n == 0 { dt } else { t_final / n as f64 };
    let m = l5_complex(l);
    let mut x = initial.to_vector5();
    let mut times = Vec::with_capacity(n + 1);
    let mut states = Vec::with_capacity(n + 1);
    times.push(0.0);
    states.push(*initial);
    for k in 1..=n {
        x = rk4_step(&m, &x, h);
        times.push(k as f64 * h);
        states.push(StateVector::from_vector5(&x));
    }
    Ok(Trajectory {
        times,
        states,
        method: Method::Rk4,
        step: Some(h),
        params_hash: params_hash(l),
    })
}

/// RK4 sampled at the given times, stepping with at most `dt` between
/// consecutive samples. With `full` set, the 9-vector including the
/// empty/occupied coherences is integrated.
pub fn evolve_rk4_sampled(
    l: &Liouvillian,
    initial: &StateVector,
    times: &[f64],
    dt: f64,
    full: bool,
) -> Result<Trajectory> {
    check_times(times)?;
    let norm = if full {
        l.norm_inf_full()
    } else {
        l.norm_inf()
    };
    stability_guard(norm, dt)?;
    let mut states = Vec::with_capacity(times.len());
    let mut t_prev = 0.0;
    if full {
        let m = l.full();
        let mut x = initial.to_vector9();
        for &t in times {
            let n = step_count(t - t_prev, dt);
            let h = (t - t_prev) / n.max(1) as f64;
            for _ in 0..n {
                x = rk4_step(&m, &x, h);
            }
            states.push(if n == 0 && t == 0.0 {
                *initial
            } else {
                StateVector::from_vector9(&x)
            });
            t_prev = t;
        }
    } else {
        let m = l5_complex(l);
        let mut x = initial.to_vector5();
        for &t in times {
            let n = step_count(t - t_prev, dt);
            let h = (t - t_prev) / n.max(1) as f64;
            for _ in 0..n {
                x = rk4_step(&m, &x, h);
            }
            states.push(if n == 0 && t == 0.0 {
                *initial
            } else {
                StateVector::from_vector5(&x)
            });
            t_prev = t;
        }
    }
    Ok(Trajectory {
        times: times.to_vec(),
        states,
        method: Method::Rk4,
        step: Some(dt),
        params_hash: params_hash(l),
    })
}

/// The RK4 iterate after ⌈t/dt⌉ equal steps, applied by repeated squaring
/// of the one-step map. For a linear system this is the same iterate as
/// stepping, at logarithmic cost for long horizons.
pub fn rk4_advance(l: &Liouvillian, initial: &StateVector, t: f64, dt: f64) -> Result<StateVector> {
    stability_guard(l.norm_inf(), dt)?;
    check_times(&[t])?;
    let mut n = step_count(t, dt);
    if n == 0 {
        return Ok(*initial);
    }
    let mut base = rk4_map(&l5_complex(l), t / n as f64);
    let mut x = initial.to_vector5();
    while n > 0 {
        if n & 1 == 1 {
            x = base * x;
        }
        base = base * base;
        n >>= 1;
    }
    Ok(StateVector::from_vector5(&x))
}

/// Closed-form (ρ11(t), ρ12(t)) for the fully symmetric engine with r = 1,
/// valid for initial states with ρ11 = ρ22 and ρ12 = ρ21.
pub fn evolve_symmetric_r1(
    rates: &RateSet,
    phi: f64,
    rho11_0: f64,
    rho12_0: f64,
    times: &[f64],
) -> Result<Vec<(f64, f64)>> {
    check_times(times)?;
    let fs = rates
        .fully_symmetric(SYMMETRY_RELATIVE_TOL)
        .ok_or_else(|| Error::SymmetryViolated("rates are not fully symmetric".into()))?;
    if (fs.r - 1.0).abs() > 1e-12 {
        return Err(Error::SymmetryViolated(format!(
            "coupling ratio r = {} is not 1",
            fs.r
        )));
    }
    if (fs.phi - phi).abs() > 1e-12 {
        return Err(Error::SymmetryViolated(format!(
            "phi = {phi} does not match the rates (phi = {})",
            fs.phi
        )));
    }
    let (w1, wb1) = (fs.w1, fs.wbar1);
    let alpha = fs.alpha();
    let u1 = ((w1 + wb1).powi(2) - (1.0 - phi * phi) * (2.0 * w1 * wb1 + wb1 * wb1))
        .max(0.0)
        .sqrt();
    let l4 = -(w1 + wb1) + u1;
    let l5 = -(w1 + wb1) - u1;

    Ok(times
        .iter()
        .map(|&t| {
            let (e4, e5) = ((l4 * t).exp(), (l5 * t).exp());
            let (rp, rm) = (e4 + e5, e4 - e5);
            // U1 > 0 whenever W̄1 > 0; R− vanishes with it otherwise.
            let q = if u1 > 0.0 { rm / u1 } else { 0.0 };
            let a = [0.5 * (2.0 - rp + w1 * q), 0.5 * phi * (2.0 * w1 + wb1) * q];
            let m = [
                [0.5 * (rp - w1 * q), -0.5 * phi * wb1 * q],
                [-0.5 * phi * (2.0 * w1 + wb1) * q, 0.5 * (rp + w1 * q)],
            ];
            (
                alpha * a[0] + m[0][0] * rho11_0 + m[0][1] * rho12_0,
                alpha * a[1] + m[1][0] * rho11_0 + m[1][1] * rho12_0,
            )
        })
        .collect())
}

/// As [`evolve_symmetric_r1`], starting from a full state that must lie in
/// the symmetric subspace.
pub fn evolve_symmetric_r1_state(
    rates: &RateSet,
    phi: f64,
    initial: &StateVector,
    times: &[f64],
) -> Result<Trajectory> {
    if (initial.rho11 - initial.rho22).abs() > 1e-12 {
        return Err(Error::SymmetryViolated(format!(
            "rho11 - rho22 = {:e}",
            initial.rho11 - initial.rho22
        )));
    }
    if (initial.rho12 - initial.rho21).norm() > 1e-12 || initial.rho12.im.abs() > 1e-12 {
        return Err(Error::SymmetryViolated(
            "rho12 must equal rho21 and be real".into(),
        ));
    }
    let path = evolve_symmetric_r1(rates, phi, initial.rho11, initial.rho12.re, times)?;
    let states = path
        .iter()
        .map(|&(p, c)| StateVector::new(1.0 - 2.0 * p, p, p, c))
        .collect();
    let l = crate::liouvillian::build_liouvillian(rates, 0.0);
    Ok(Trajectory {
        times: times.to_vec(),
        states,
        method: Method::SymmetricR1,
        step: None,
        params_hash: params_hash(&l),
    })
}

/// Max-abs difference between two trajectories sampled at the same times.
pub fn max_trajectory_diff(a: &Trajectory, b: &Trajectory) -> f64 {
    a.states
        .iter()
        .zip(&b.states)
        .map(|(x, y)| {
            let mut d = (x.to_vector5() - y.to_vector5()).camax();
            if let (Some(p), Some(q)) = (x.outer, y.outer) {
                for (u, v) in p.iter().zip(q) {
                    d = d.max((u - v).norm());
                }
            }
            d
        })
        .fold(0.0, f64::max)
}
