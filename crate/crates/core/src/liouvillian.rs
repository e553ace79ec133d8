//! Dissipation matrices, the Liouville matrix and the dark-state basis.
//!
//! The density operator on the basis {|0⟩, |1⟩, |2⟩} is vectorized as
//! P = (ρ00, ρ11, ρ22, ρ12, ρ21 | ρ01, ρ02, ρ10, ρ20). The first five
//! components close under the dynamics and carry the whole steady-state
//! problem; the last four only dephase and decay.

use nalgebra::{Matrix3, Matrix4, Matrix5, SMatrix, SVector, SymmetricEigen, Vector5};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::RateSet;

pub type Vector9c = SVector<Complex64, 9>;
pub type Vector5c = SVector<Complex64, 5>;
pub type Matrix9c = SMatrix<Complex64, 9, 9>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Density-operator components in the vectorized ordering.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateVector {
    pub rho00: f64,
    pub rho11: f64,
    pub rho22: f64,
    pub rho12: Complex64,
    pub rho21: Complex64,
    /// (ρ01, ρ02, ρ10, ρ20), when tracked.
    pub outer: Option<[Complex64; 4]>,
}

impl StateVector {
    /// Both dots empty: ρ00 = 1.
    pub fn empty() -> Self {
        StateVector::new(1.0, 0.0, 0.0, 0.0)
    }

    /// Populations with a real, symmetric coherence ρ12 = ρ21.
    pub fn new(rho00: f64, rho11: f64, rho22: f64, rho12: f64) -> Self {
        StateVector {
            rho00,
            rho11,
            rho22,
            rho12: Complex64::new(rho12, 0.0),
            rho21: Complex64::new(rho12, 0.0),
            outer: None,
        }
    }

    pub fn with_outer(mut self, outer: [Complex64; 4]) -> Self {
        self.outer = Some(outer);
        self
    }

    pub fn trace(&self) -> f64 {
        self.rho00 + self.rho11 + self.rho22
    }

    pub fn to_vector5(&self) -> Vector5c {
        Vector5c::new(
            Complex64::new(self.rho00, 0.0),
            Complex64::new(self.rho11, 0.0),
            Complex64::new(self.rho22, 0.0),
            self.rho12,
            self.rho21,
        )
    }

    /// Real 5-vector, taking the real part of the coherences.
    pub fn to_real5(&self) -> Vector5<f64> {
        Vector5::new(
            self.rho00,
            self.rho11,
            self.rho22,
            self.rho12.re,
            self.rho21.re,
        )
    }

    /// Rebuilds a state from a 5-vector. Populations keep their real part.
    pub fn from_vector5(v: &Vector5c) -> Self {
        StateVector {
            rho00: v[0].re,
            rho11: v[1].re,
            rho22: v[2].re,
            rho12: v[3],
            rho21: v[4],
            outer: None,
        }
    }

    pub fn to_vector9(&self) -> Vector9c {
        let mut v = Vector9c::zeros();
        v.fixed_rows_mut::<5>(0).copy_from(&self.to_vector5());
        if let Some(outer) = self.outer {
            for (i, z) in outer.iter().enumerate() {
                v[5 + i] = *z;
            }
        }
        v
    }

    pub fn from_vector9(v: &Vector9c) -> Self {
        let head: Vector5c = v.fixed_rows::<5>(0).into_owned();
        StateVector::from_vector5(&head).with_outer([v[5], v[6], v[7], v[8]])
    }

    /// The 3×3 density matrix on {|0⟩, |1⟩, |2⟩}. Untracked empty/occupied
    /// coherences are taken as zero.
    pub fn density_matrix(&self) -> Matrix3<Complex64> {
        let [r01, r02, r10, r20] = self.outer.unwrap_or([ZERO; 4]);
        let re = |x: f64| Complex64::new(x, 0.0);
        Matrix3::new(
            re(self.rho00),
            r01,
            r02,
            r10,
            re(self.rho11),
            self.rho12,
            r20,
            self.rho21,
            re(self.rho22),
        )
    }

    /// Smallest eigenvalue of the Hermitian part of the density matrix.
    pub fn min_eigenvalue(&self) -> f64 {
        let m = self.density_matrix();
        let h = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
        SymmetricEigen::new(h).eigenvalues.min()
    }

    /// Largest violation of ρ_ji = conj(ρ_ij).
    pub fn hermiticity_error(&self) -> f64 {
        let mut err = (self.rho21 - self.rho12.conj()).norm();
        if let Some([r01, r02, r10, r20]) = self.outer {
            err = err
                .max((r10 - r01.conj()).norm())
                .max((r20 - r02.conj()).norm());
        }
        err
    }

    pub fn max_abs_diff(&self, other: &StateVector) -> f64 {
        (self.to_vector9() - other.to_vector9()).camax()
    }
}

/// Per-bath 4×4 dissipation matrices Γ^a, acting on the jump operators
/// (|1⟩⟨0|, |2⟩⟨0|, |0⟩⟨1|, |0⟩⟨2|).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DissipationMatrix {
    /// `[hot, cold]`.
    pub gamma: [Matrix4<f64>; 2],
}

/// Γ^a with the gain block (w_{1+}, w_{2+}) and loss block (w_{1−}, w_{2−}),
/// off-diagonals φ^a√(w_{1±}w_{2±}). No validation of |φ^a| is done here.
pub fn build_gamma(rates: &RateSet) -> DissipationMatrix {
    let gamma = [0, 1].map(|a| {
        let gain = rates.interference_in(a);
        let loss = rates.interference_out(a);
        let [wp1, wp2] = rates.w_plus[a];
        let [wm1, wm2] = rates.w_minus[a];
        Matrix4::new(
            wp1, gain, 0.0, 0.0, gain, wp2, 0.0, 0.0, 0.0, 0.0, wm1, loss, 0.0, 0.0, loss, wm2,
        )
    });
    DissipationMatrix { gamma }
}

impl DissipationMatrix {
    /// Smallest eigenvalue over both baths.
    pub fn min_eigenvalue(&self) -> f64 {
        self.gamma
            .iter()
            .map(|g| SymmetricEigen::new(*g).eigenvalues.min())
            .fold(f64::INFINITY, f64::min)
    }
}

/// Free-function form of [`DissipationMatrix::min_eigenvalue`].
pub fn gamma_min_eigenvalue(gamma: &DissipationMatrix) -> f64 {
    gamma.min_eigenvalue()
}

/// The generator ∂t P = L P, split into the closed 5×5 population/coherence
/// block and the decoupled 4×4 block of empty/occupied coherences.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Liouvillian {
    pub l5: Matrix5<f64>,
    /// Σ_a L^a_irr plus the ±iE modulation, on (ρ01, ρ02, ρ10, ρ20).
    pub lower: Matrix4<Complex64>,
}

/// Builds the Liouvillian as the sum of single-bath contributions.
pub fn build_liouvillian(rates: &RateSet, dot_energy: f64) -> Liouvillian {
    let mut l5 = Matrix5::zeros();
    let mut lower = Matrix4::<Complex64>::zeros();
    for a in 0..2 {
        let [wp1, wp2] = rates.w_plus[a];
        let [wm1, wm2] = rates.w_minus[a];
        let gain = rates.interference_in(a);
        let loss = rates.interference_out(a);
        // φ^a is real, so φ* = φ throughout.
        #[rustfmt::skip]
        let la = Matrix5::new(
            -(wp1 + wp2), wm1,         wm2,         loss,               loss,
            wp1,          -wm1,        0.0,         -0.5 * loss,        -0.5 * loss,
            wp2,          0.0,         -wm2,        -0.5 * loss,        -0.5 * loss,
            gain,         -0.5 * loss, -0.5 * loss, -0.5 * (wm1 + wm2), 0.0,
            gain,         -0.5 * loss, -0.5 * loss, 0.0,                -0.5 * (wm1 + wm2),
        );
        l5 += la;

        let d1 = -0.5 * (wp1 + wp2 + wm1);
        let d2 = -0.5 * (wp1 + wp2 + wm2);
        let c = -0.5 * loss;
        #[rustfmt::skip]
        let irr = Matrix4::new(
            d1,  c,   0.0, 0.0,
            c,   d2,  0.0, 0.0,
            0.0, 0.0, d1,  c,
            0.0, 0.0, c,   d2,
        );
        lower += irr.map(|x| Complex64::new(x, 0.0));
    }
    let ie = Complex64::new(0.0, dot_energy);
    lower[(0, 0)] += ie;
    lower[(1, 1)] += ie;
    lower[(2, 2)] -= ie;
    lower[(3, 3)] -= ie;
    Liouvillian { l5, lower }
}

impl Liouvillian {
    pub fn new(rates: &RateSet, dot_energy: f64) -> Self {
        build_liouvillian(rates, dot_energy)
    }

    /// Block-diagonal 9×9 operator L_tot.
    pub fn full(&self) -> Matrix9c {
        let mut m = Matrix9c::zeros();
        m.fixed_view_mut::<5, 5>(0, 0)
            .copy_from(&self.l5.map(|x| Complex64::new(x, 0.0)));
        m.fixed_view_mut::<4, 4>(5, 5).copy_from(&self.lower);
        m
    }

    /// Maximum absolute row sum of the 5×5 block.
    pub fn norm_inf(&self) -> f64 {
        self.l5
            .row_iter()
            .map(|row| row.iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Maximum absolute row sum of the full 9×9 operator.
    pub fn norm_inf_full(&self) -> f64 {
        let lower = self
            .lower
            .row_iter()
            .map(|row| row.iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max);
        self.norm_inf().max(lower)
    }

    /// L P for a 5-component state.
    pub fn apply5(&self, state: &StateVector) -> Vector5c {
        self.l5.map(|x| Complex64::new(x, 0.0)) * state.to_vector5()
    }

    /// Max-abs entry of L·P, the stationarity residual.
    pub fn residual(&self, state: &StateVector) -> f64 {
        self.apply5(state).camax()
    }
}

/// Populations and coherence in the rotated basis |0⟩,
/// |+⟩ = (|1⟩ + r|2⟩)/√(1+r²), |−⟩ = (r|1⟩ − |2⟩)/√(1+r²).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DarkBasisPopulations {
    pub empty: f64,
    pub bright: f64,
    pub dark: f64,
    /// ⟨+|ρ|−⟩.
    pub coherence: Complex64,
}

pub fn rotate_to_dark_basis(state: &StateVector, r: f64) -> Result<DarkBasisPopulations> {
    check_ratio(r)?;
    let n2 = 1.0 + r * r;
    let (r11, r22) = (state.rho11, state.rho22);
    let (r12, r21) = (state.rho12, state.rho21);
    let bright = (r11 + r * r * r22 + r * (r12 + r21).re) / n2;
    let dark = (r * r * r11 + r22 - r * (r12 + r21).re) / n2;
    let coherence = (Complex64::new(r * r11 - r * r22, 0.0) - r12 + r21 * (r * r)) / n2;
    Ok(DarkBasisPopulations {
        empty: state.rho00,
        bright,
        dark,
        coherence,
    })
}

impl DarkBasisPopulations {
    /// Inverse of [`rotate_to_dark_basis`].
    pub fn to_state(&self, r: f64) -> Result<StateVector> {
        check_ratio(r)?;
        let n2 = 1.0 + r * r;
        let (pp, mm) = (self.bright, self.dark);
        let pm = self.coherence;
        let mp = pm.conj();
        let rho11 = (pp + r * r * mm + r * (pm + mp).re) / n2;
        let rho22 = (r * r * pp + mm - r * (pm + mp).re) / n2;
        let rho12 = (Complex64::new(r * pp - r * mm, 0.0) - pm + mp * (r * r)) / n2;
        Ok(StateVector {
            rho00: self.empty,
            rho11,
            rho22,
            rho12,
            rho21: rho12.conj(),
            outer: None,
        })
    }
}

fn check_ratio(r: f64) -> Result<()> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::InvalidParameter {
            name: "r",
            reason: format!("{r} must be positive"),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{expand_r_symmetric, RSymmetricSpec};
    use approx::assert_relative_eq;

    fn reference_r1(phi: f64) -> RateSet {
        let spec = RSymmetricSpec::from_collective_rates(0.25, 0.75, 1.0, phi);
        RateSet::from_params(&expand_r_symmetric(&spec).unwrap()).unwrap()
    }

    fn channels(w_plus: [[f64; 2]; 2], w_minus: [[f64; 2]; 2], phi: [f64; 2]) -> RateSet {
        RateSet::from_channels_unchecked(w_plus, w_minus, phi)
    }

    #[test]
    fn gamma_without_interference_is_diagonal() {
        let rates = channels(
            [[0.1, 0.2], [0.3, 0.4]],
            [[0.5, 0.6], [0.7, 0.8]],
            [0.0, 0.0],
        );
        let g = build_gamma(&rates);
        assert_eq!(
            g.gamma[0],
            Matrix4::from_diagonal(&nalgebra::Vector4::new(0.1, 0.2, 0.5, 0.6))
        );
        assert_relative_eq!(g.min_eigenvalue(), 0.1, epsilon = 1e-15);
    }

    #[test]
    fn gamma_gain_block_off_diagonal() {
        let rates = channels(
            [[0.2, 0.8], [0.1, 0.1]],
            [[0.3, 0.3], [0.1, 0.1]],
            [0.5, 0.0],
        );
        let g = build_gamma(&rates);
        assert_relative_eq!(g.gamma[0][(0, 1)], 0.2, epsilon = 1e-15);
        assert_eq!(g.gamma[0], g.gamma[0].transpose());
    }

    #[test]
    fn maximal_interference_blocks_are_rank_one() {
        let w = 0.4;
        let rates = channels([[w, w], [w, w]], [[w, w], [w, w]], [1.0, -1.0]);
        let g = build_gamma(&rates);
        for m in g.gamma {
            let mut ev: Vec<f64> = SymmetricEigen::new(m.fixed_view::<2, 2>(0, 0).into_owned())
                .eigenvalues
                .iter()
                .copied()
                .collect();
            ev.sort_by(f64::total_cmp);
            assert_relative_eq!(ev[0], 0.0, epsilon = 1e-15);
            assert_relative_eq!(ev[1], 2.0 * w, epsilon = 1e-15);
        }
        assert!(g.min_eigenvalue().abs() < 1e-12);
    }

    #[test]
    fn gamma_negative_beyond_unit_interference() {
        let (w1, w2, phi) = (0.2, 0.8, 1.5);
        let rates = channels([[w1, w2], [w1, w2]], [[w1, w2], [w1, w2]], [phi, 0.0]);
        let expected = (w1 + w2) / 2.0 - ((w1 - w2).powi(2) / 4.0 + phi * phi * w1 * w2).sqrt();
        let got = gamma_min_eigenvalue(&build_gamma(&rates));
        assert!(got < 0.0);
        assert_relative_eq!(got, expected, epsilon = 1e-14);
    }

    #[test]
    fn reference_r1_first_row() {
        let l = build_liouvillian(&reference_r1(0.0), 0.0);
        let row: Vec<f64> = l.l5.row(0).iter().copied().collect();
        let expected = [-0.5, 0.75, 0.75, 0.0, 0.0];
        for (a, b) in row.iter().zip(expected) {
            assert_relative_eq!(*a, b, epsilon = 1e-14);
        }
    }

    #[test]
    fn population_columns_conserve_probability() {
        let rates = channels(
            [[0.1, 0.7], [0.3, 0.2]],
            [[0.9, 0.4], [0.6, 0.5]],
            [0.4, -0.7],
        );
        let l = build_liouvillian(&rates, 0.0);
        for c in 0..5 {
            let s: f64 = (0..3).map(|r| l.l5[(r, c)]).sum();
            assert!(s.abs() < 1e-15, "column {c} sums to {s}");
        }
        // exchanging ρ12 and ρ21 commutes with L for real φ
        let mut swapped = l.l5;
        swapped.swap_rows(3, 4);
        swapped.swap_columns(3, 4);
        assert_eq!(swapped, l.l5);
    }

    #[test]
    fn energy_block_modulation() {
        let rates = channels(
            [[0.1, 0.7], [0.3, 0.2]],
            [[0.9, 0.4], [0.6, 0.5]],
            [0.4, -0.7],
        );
        let a = build_liouvillian(&rates, 0.0);
        let b = build_liouvillian(&rates, 10.0);
        let shift: Vec<f64> = (0..4)
            .map(|i| (b.lower[(i, i)] - a.lower[(i, i)]).im)
            .collect();
        assert_eq!(shift, vec![10.0, 10.0, -10.0, -10.0]);
        assert_eq!(a.l5, b.l5);
    }

    #[test]
    fn dark_basis_projectors() {
        let bright = StateVector::new(0.0, 0.5, 0.5, 0.5);
        let dark = StateVector::new(0.0, 0.5, 0.5, -0.5);
        assert!(rotate_to_dark_basis(&bright, 1.0).unwrap().dark.abs() < 1e-15);
        assert_relative_eq!(
            rotate_to_dark_basis(&dark, 1.0).unwrap().dark,
            1.0,
            epsilon = 1e-15
        );
        let e = rotate_to_dark_basis(&StateVector::empty(), 3.0).unwrap();
        assert_eq!(e.dark, 0.0);
        assert_eq!(e.empty, 1.0);
        assert!(rotate_to_dark_basis(&bright, 0.0).is_err());
        assert!(rotate_to_dark_basis(&bright, -1.0).is_err());
    }

    #[test]
    fn dark_basis_round_trip() {
        let s = StateVector {
            rho00: 0.2,
            rho11: 0.5,
            rho22: 0.3,
            rho12: Complex64::new(0.1, -0.05),
            rho21: Complex64::new(0.1, 0.05),
            outer: None,
        };
        for r in [0.3, 1.0, 4.0] {
            let d = rotate_to_dark_basis(&s, r).unwrap();
            assert_relative_eq!(d.empty + d.bright + d.dark, 1.0, epsilon = 1e-15);
            let back = d.to_state(r).unwrap();
            assert!(back.max_abs_diff(&s) < 1e-14);
        }
    }

    #[test]
    fn density_matrix_positivity() {
        assert!(StateVector::new(0.2, 0.4, 0.4, 0.4).min_eigenvalue() > -1e-15);
        assert!(StateVector::new(0.2, 0.4, 0.4, 0.45).min_eigenvalue() < 0.0);
    }
}
