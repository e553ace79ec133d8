//! Steady states of the reduced Liouvillian.
//!
//! Away from singular points the fixed point is unique and follows from a
//! 2×2 linear system for (ρ11, ρ22) after eliminating ρ00 by the trace and
//! ρ12 = ρ21 by the coherence equation. In the fully symmetric configuration
//! at |φ| = 1 that system degenerates: the dark-state population becomes a
//! second conserved quantity and the fixed points form a one-parameter
//! family labelled by its value I0.

use nalgebra::{Matrix2, Vector2};

use crate::error::{Error, Result};
use crate::liouvillian::StateVector;
use crate::model::{FullySymmetric, RateSet};

/// Relative singularity threshold: |det| ≤ 1e-10 (W1+W̄1+W2+W̄2)².
pub const SINGULAR_RELATIVE_TOL: f64 = 1e-10;

/// Relative tolerance on the collective-rate relations defining the fully
/// symmetric configuration.
pub const SYMMETRY_RELATIVE_TOL: f64 = 1e-9;

/// Minimum-eigenvalue floor used when deciding physical admissibility.
pub const POSITIVITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedSystem {
    pub lss: Matrix2<f64>,
    pub rhs: Vector2<f64>,
    pub det: f64,
}

/// The 2×2 system L_ss (ρ11, ρ22)ᵀ = rhs.
pub fn reduced_system(rates: &RateSet) -> ReducedSystem {
    let [w1, w2] = rates.w;
    let [wb1, wb2] = rates.w_bar;
    let (p, pb) = (rates.big_phi, rates.big_phi_bar);
    let sb = wb1 + wb2;
    let (c, q) = if sb > 0.0 {
        (pb * (2.0 * p + pb) / sb, 2.0 * p * pb / sb)
    } else {
        (0.0, 0.0)
    };
    let lss = Matrix2::new(w1 + wb1 - c, w1 - c, w2 - c, w2 + wb2 - c);
    let rhs = Vector2::new(w1 - q, w2 - q);
    ReducedSystem {
        lss,
        rhs,
        det: reduced_determinant(rates),
    }
}

/// |L_ss| = W1W̄2 + W̄1W2 + W̄1W̄2 − Φ̄(2Φ + Φ̄).
pub fn reduced_determinant(rates: &RateSet) -> f64 {
    let [w1, w2] = rates.w;
    let [wb1, wb2] = rates.w_bar;
    let (p, pb) = (rates.big_phi, rates.big_phi_bar);
    w1 * wb2 + wb1 * w2 + wb1 * wb2 - pb * (2.0 * p + pb)
}

/// Absolute threshold below which |L_ss| is treated as zero.
pub fn singular_tolerance(rates: &RateSet) -> f64 {
    SINGULAR_RELATIVE_TOL * rates.total_rate().powi(2)
}

/// 2Φ W̄1 W̄2 − Φ̄ (W1 W̄2 + W̄1 W2); vanishes exactly when the unique steady
/// state carries no coherence.
pub fn incoherent_condition_residual(rates: &RateSet) -> f64 {
    let [w1, w2] = rates.w;
    let [wb1, wb2] = rates.w_bar;
    2.0 * rates.big_phi * wb1 * wb2 - rates.big_phi_bar * (w1 * wb2 + wb1 * w2)
}

/// Which maximal-interference point: φ = +1 or φ = −1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Positive,
    Negative,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Positive => 1.0,
            Branch::Negative => -1.0,
        }
    }

    /// φ = 0 is never singular; ties resolve by the sign bit.
    pub fn of(phi: f64) -> Self {
        if phi.is_sign_negative() {
            Branch::Negative
        } else {
            Branch::Positive
        }
    }
}

/// r²ρ11 + ρ22 − sign·r(ρ12 + ρ21). For `Branch::Positive` this is
/// (1 + r²)⟨−|ρ|−⟩.
pub fn conserved_quantity(state: &StateVector, r: f64, branch: Branch) -> Result<f64> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::InvalidParameter {
            name: "r",
            reason: format!("{r} must be positive"),
        });
    }
    Ok(r * r * state.rho11 + state.rho22 - branch.sign() * r * (state.rho12 + state.rho21).re)
}

/// One-parameter family of fixed points at |φ| = 1 in the fully symmetric
/// configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyFamily {
    pub r: f64,
    pub branch: Branch,
    /// α = W1/(2W1 + W̄1).
    pub alpha: f64,
    /// Conserved quantity of the state that selected [`SteadyStateResult::state`].
    pub i0: f64,
}

impl SteadyFamily {
    /// Fixed point with conserved quantity `i0`.
    pub fn member(&self, i0: f64) -> StateVector {
        let (r, a, s) = (self.r, self.alpha, self.branch.sign());
        let abar = 1.0 - 2.0 * a;
        let r2 = r * r;
        let rho12 = s * r / (1.0 + r2) / (1.0 - a) * (a - i0 / (1.0 + r2));
        let rho11 = a - s * (r * abar - (1.0 - r2) / r * a) * rho12;
        let rho22 = a - s * (abar / r + (1.0 - r2) / r * a) * rho12;
        StateVector::new(1.0 - rho11 - rho22, rho11, rho22, rho12)
    }

    /// Interval of I0 whose fixed point is a positive-semidefinite density
    /// matrix, found by scanning and bisection. `None` if no member is
    /// physical.
    pub fn admissible_i0_range(&self) -> Option<(f64, f64)> {
        let ok = |i0: f64| self.member(i0).min_eigenvalue() >= -POSITIVITY_TOL;
        // I0 = (1 + r²)⟨−|ρ|−⟩ for the positive branch, so physical values
        // sit in [0, 1 + r²]; scan slightly wider.
        let span = 1.0 + self.r * self.r;
        let (lo, hi) = (-0.25 * span, 1.25 * span);
        let n = 4000;
        let grid: Vec<f64> = (0..=n)
            .map(|i| lo + (hi - lo) * i as f64 / n as f64)
            .collect();
        let first = grid.iter().position(|&x| ok(x))?;
        let last = grid.iter().rposition(|&x| ok(x))?;
        let refine = |mut good: f64, mut bad: f64| {
            for _ in 0..80 {
                let mid = 0.5 * (good + bad);
                if ok(mid) {
                    good = mid;
                } else {
                    bad = mid;
                }
            }
            good
        };
        let a = if first > 0 {
            refine(grid[first], grid[first - 1])
        } else {
            grid[0]
        };
        let b = if last < n {
            refine(grid[last], grid[last + 1])
        } else {
            grid[n]
        };
        Some((a, b))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyStateResult {
    /// The unique fixed point, or the family member selected by the initial
    /// state.
    pub state: StateVector,
    pub family: Option<SteadyFamily>,
    pub determinant: f64,
    /// 2-norm condition number of L_ss; large values announce a long-lived
    /// quasi-stationary transient. Infinite on the singular branch.
    pub condition_number: f64,
}

impl SteadyStateResult {
    pub fn is_singular(&self) -> bool {
        self.family.is_some()
    }

    pub fn conserved_i0(&self) -> Option<f64> {
        self.family.map(|f| f.i0)
    }
}

/// Thresholds used to classify the steady-state problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyStateOptions {
    /// |det| ≤ this × (total rate)² counts as singular.
    pub singular_relative: f64,
    /// Relative tolerance on the fully symmetric rate relations.
    pub symmetry_relative: f64,
    /// Allowed deviation of |φ| from 1 on the singular branch.
    pub maximal_phi: f64,
}

impl Default for SteadyStateOptions {
    fn default() -> Self {
        SteadyStateOptions {
            singular_relative: SINGULAR_RELATIVE_TOL,
            symmetry_relative: SYMMETRY_RELATIVE_TOL,
            maximal_phi: 1e-6,
        }
    }
}

/// Steady state of the reduced Liouvillian.
///
/// `initial` is ignored on the unique branch and required on the singular
/// branch, where it fixes I0.
pub fn solve_steady_state(
    rates: &RateSet,
    initial: Option<&StateVector>,
) -> Result<SteadyStateResult> {
    solve_steady_state_with(rates, initial, &SteadyStateOptions::default())
}

/// [`solve_steady_state`] with explicit thresholds.
pub fn solve_steady_state_with(
    rates: &RateSet,
    initial: Option<&StateVector>,
    opts: &SteadyStateOptions,
) -> Result<SteadyStateResult> {
    let det = reduced_determinant(rates);
    if det.abs() > opts.singular_relative * rates.total_rate().powi(2) {
        let [w1, w2] = rates.w;
        let [wb1, wb2] = rates.w_bar;
        let (p, pb) = (rates.big_phi, rates.big_phi_bar);
        let sb = wb1 + wb2;
        let rho11 = (w1 * wb2 - pb * (2.0 * p * wb2 + pb * (w1 - w2)) / sb) / det;
        let rho22 = (wb1 * w2 - pb * (2.0 * p * wb1 + pb * (w2 - w1)) / sb) / det;
        let rho12 = incoherent_condition_residual(rates) / (det * sb);
        let state = StateVector::new(1.0 - rho11 - rho22, rho11, rho22, rho12);
        return Ok(SteadyStateResult {
            state,
            family: None,
            determinant: det,
            condition_number: condition_number(&reduced_system(rates).lss),
        });
    }

    let fs = rates
        .fully_symmetric(opts.symmetry_relative)
        .filter(|fs| (fs.phi.abs() - 1.0).abs() <= opts.maximal_phi)
        .ok_or(Error::SingularUnclassified { det })?;
    let initial = initial.ok_or(Error::MissingInitialState)?;
    let branch = Branch::of(fs.phi);
    let i0 = conserved_quantity(initial, fs.r, branch)?;
    let family = SteadyFamily {
        r: fs.r,
        branch,
        alpha: fs.alpha(),
        i0,
    };
    Ok(SteadyStateResult {
        state: family.member(i0),
        family: Some(family),
        determinant: det,
        condition_number: f64::INFINITY,
    })
}

/// Fully symmetric rates at maximal interference, if that is what they are.
pub fn singular_family_params(rates: &RateSet) -> Option<FullySymmetric> {
    let opts = SteadyStateOptions::default();
    let fs = rates.fully_symmetric(opts.symmetry_relative)?;
    ((fs.phi.abs() - 1.0).abs() <= opts.maximal_phi).then_some(fs)
}

fn condition_number(m: &Matrix2<f64>) -> f64 {
    let sv = m.singular_values();
    let (max, min) = (sv.max(), sv.min());
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}
