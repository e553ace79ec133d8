//! Eigensystem of the reduced Liouvillian.
//!
//! Two independent routes: closed forms in terms of the collective rates,
//! and a dense numerical decomposition (real Schur form for the eigenvalues,
//! SVD null spaces for the eigenvectors). The numerical route is the
//! reference; the closed forms are checked against it.

use nalgebra::{Matrix2, Matrix5, Schur};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::liouvillian::{Liouvillian, Vector5c};
use crate::model::RateSet;
use crate::steadystate::{reduced_determinant, singular_tolerance, solve_steady_state};

/// Two eigenvalues are treated as equal when |λi − λj| ≤ 1e-9·max(1, |λi|).
pub const DEGENERACY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    ClosedForm,
    Numeric,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenPair {
    pub value: Complex64,
    pub vector: Vector5c,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenSystem {
    /// Closed form: (λ1 = 0, λ2, λ3, λ4, λ5) with λ4 taking +U.
    /// Numeric: sorted by real part, largest first.
    pub pairs: Vec<EigenPair>,
    /// Some eigenvalue is repeated (λ2 = λ3 always is).
    pub degenerate: bool,
    /// A second zero eigenvalue (λ4 = 0) is present.
    pub singular: bool,
    pub method: Method,
}

impl EigenSystem {
    pub fn eigenvalues(&self) -> Vec<Complex64> {
        self.pairs.iter().map(|p| p.value).collect()
    }

    /// max_i ‖L v_i − λ_i v_i‖∞ / ‖v_i‖∞.
    pub fn max_residual(&self, l5: &Matrix5<f64>) -> f64 {
        let lc = l5.map(|x| Complex64::new(x, 0.0));
        self.pairs
            .iter()
            .map(|p| (lc * p.vector - p.vector * p.value).camax() / p.vector.camax())
            .fold(0.0, f64::max)
    }
}

pub fn degenerate(a: Complex64, b: Complex64) -> bool {
    (a - b).norm() <= DEGENERACY_TOL * a.norm().max(1.0)
}

/// (W1 + W̄1 + W2 + W̄2)² − 4|L_ss|, the discriminant under U. Nonnegative
/// for |φ^a| ≤ 1.
pub fn discriminant(rates: &RateSet) -> f64 {
    rates.total_rate().powi(2) - 4.0 * reduced_determinant(rates)
}

/// [0, λ2, λ3, λ4, λ5] with λ2 = λ3 = −(W̄1 + W̄2)/2 and λ4,5 = (−S ± U)/2.
pub fn closed_form_eigenvalues(rates: &RateSet) -> Result<[f64; 5]> {
    let s = rates.total_rate();
    let mut disc = discriminant(rates);
    if disc < 0.0 {
        if disc < -1e-14 * s * s {
            return Err(Error::ClosedFormUnavailable(
                "negative discriminant: lambda_4,5 are complex",
            ));
        }
        disc = 0.0;
    }
    let u = disc.sqrt();
    let l23 = -0.5 * (rates.w_bar[0] + rates.w_bar[1]);
    Ok([0.0, l23, l23, 0.5 * (-s + u), 0.5 * (-s - u)])
}

pub fn closed_form_eigensystem(rates: &RateSet) -> Result<EigenSystem> {
    let lambdas = closed_form_eigenvalues(rates)?;
    let [w1, w2] = rates.w;
    let [wb1, wb2] = rates.w_bar;
    let (p, pb) = (rates.big_phi, rates.big_phi_bar);
    let scale = rates.total_rate();
    let c = |x: f64| Complex64::new(x, 0.0);

    let singular = reduced_determinant(rates).abs() <= singular_tolerance(rates);
    let v1 = if singular {
        let fs = crate::steadystate::singular_family_params(rates).ok_or(
            Error::ClosedFormUnavailable("singular outside the fully symmetric configuration"),
        )?;
        let a = fs.alpha();
        Vector5c::new(c(1.0 - 2.0 * a), c(a), c(a), c(0.0), c(0.0))
    } else {
        solve_steady_state(rates, None)?.state.to_vector5()
    };

    let v2 = Vector5c::new(c(0.0), c(0.0), c(0.0), c(1.0), c(-1.0));

    let v3_coh = if pb != 0.0 {
        (wb2 - wb1) / (2.0 * pb)
    } else if (wb2 - wb1).abs() <= 1e-12 * scale {
        0.0
    } else {
        return Err(Error::ClosedFormUnavailable(
            "v3 needs a nonzero loss interference sum or equal loss rates",
        ));
    };
    let v3 = Vector5c::new(c(0.0), c(1.0), c(-1.0), c(v3_coh), c(v3_coh));

    let v45 = |lambda: f64| -> Result<Vector5c> {
        let den = 2.0 * lambda + wb1 + wb2;
        if den.abs() <= 1e-12 * scale {
            return Err(Error::ClosedFormUnavailable(
                "lambda_4 or lambda_5 coincides with lambda_2",
            ));
        }
        Ok(Vector5c::new(
            c(1.0),
            c(-(lambda + w2 + wb2 - w1) / den),
            c(-(lambda + w1 + wb1 - w2) / den),
            c((2.0 * p + pb) / den),
            c((2.0 * p + pb) / den),
        ))
    };
    let v4 = v45(lambdas[3])?;
    let v5 = v45(lambdas[4])?;

    let pairs = lambdas
        .iter()
        .zip([v1, v2, v3, v4, v5])
        .map(|(&l, v)| EigenPair {
            value: c(l),
            vector: v,
        })
        .collect();
    Ok(EigenSystem {
        pairs,
        degenerate: true,
        singular,
        method: Method::ClosedForm,
    })
}

/// Eigenvalues of the 5×5 block, sorted by real part (largest first).
pub fn numeric_eigenvalues(l: &Liouvillian) -> Vec<Complex64> {
    let mut ev: Vec<Complex64> = Schur::new(l.l5)
        .complex_eigenvalues()
        .iter()
        .copied()
        .collect();
    sort_by_real_desc(&mut ev);
    ev
}

fn sort_by_real_desc(ev: &mut [Complex64]) {
    ev.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));
}

/// Full numerical eigendecomposition of the 5×5 block. Repeated eigenvalues
/// get a basis of their null space, so semisimple degeneracies (including
/// the double zero at maximal interference) are handled; a genuinely
/// defective eigenvalue is an error.
pub fn numeric_eigensystem(l: &Liouvillian) -> Result<EigenSystem> {
    let ev = numeric_eigenvalues(l);
    let lc = l.l5.map(|x| Complex64::new(x, 0.0));
    let null_tol = 1e-9 * l.norm_inf().max(1.0);

    let mut pairs = Vec::with_capacity(5);
    let mut degenerate_any = false;
    let mut i = 0;
    while i < ev.len() {
        let mut j = i + 1;
        while j < ev.len() && degenerate(ev[i], ev[j]) {
            j += 1;
        }
        let m = j - i;
        degenerate_any |= m > 1;
        let center = ev[i..j].iter().sum::<Complex64>() / m as f64;
        let shifted = lc - nalgebra::Matrix5::<Complex64>::identity() * center;
        let svd = shifted.svd(false, true);
        let v_t = svd.v_t.expect("requested right singular vectors");
        let mut order: Vec<usize> = (0..5).collect();
        order.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
        let geometric = order
            .iter()
            .take_while(|&&k| svd.singular_values[k] <= null_tol)
            .count();
        if geometric < m {
            return Err(Error::DefectiveMatrix {
                eigenvalue: center,
                algebraic: m,
                geometric,
            });
        }
        for &k in order.iter().take(m) {
            let v: Vector5c = v_t.row(k).adjoint();
            pairs.push(EigenPair {
                value: if m > 1 { center } else { ev[i] },
                vector: normalize_phase(v),
            });
        }
        i = j;
    }

    let zero_tol = DEGENERACY_TOL * l.norm_inf().max(1.0);
    let zeros = pairs.iter().filter(|p| p.value.norm() <= zero_tol).count();
    Ok(EigenSystem {
        pairs,
        degenerate: degenerate_any,
        singular: zeros >= 2,
        method: Method::Numeric,
    })
}

/// Unit 2-norm, with the largest-magnitude component real and positive.
pub fn normalize_phase(v: Vector5c) -> Vector5c {
    let k = v.icamax();
    let phase = v[k] / v[k].norm();
    let w = v / phase;
    w / Complex64::new(w.norm(), 0.0)
}

/// Dimension of the numerical null space of the 5×5 block: singular values
/// at or below `rel_tol` times the largest.
pub fn nullspace_dimension(l: &Liouvillian, rel_tol: f64) -> usize {
    let sv = l.l5.singular_values();
    let max = sv.max();
    sv.iter().filter(|&&s| s <= rel_tol * max).count()
}

/// Eigenvalues of the decaying block acting on (ρ01, ρ02, ρ10, ρ20). The block
/// is a direct sum of two 2×2 blocks, each solved exactly.
pub fn lower_block_eigenvalues(l: &Liouvillian) -> [Complex64; 4] {
    let block = |o: usize| {
        let m = Matrix2::new(
            l.lower[(o, o)],
            l.lower[(o, o + 1)],
            l.lower[(o + 1, o)],
            l.lower[(o + 1, o + 1)],
        );
        let half_tr = (m[(0, 0)] + m[(1, 1)]) * 0.5;
        let half_diff = (m[(0, 0)] - m[(1, 1)]) * 0.5;
        let root = (half_diff * half_diff + m[(0, 1)] * m[(1, 0)]).sqrt();
        [half_tr + root, half_tr - root]
    };
    let [a, b] = block(0);
    let [c, d] = block(2);
    [a, b, c, d]
}

/// Slowest nonzero decay rate of the 5×5 block, min |Re λ| over eigenvalues
/// not numerically zero.
pub fn slowest_rate(l: &Liouvillian) -> f64 {
    let tol = DEGENERACY_TOL * l.norm_inf().max(1.0);
    let ev = numeric_eigenvalues(l);
    let mut rates: Vec<f64> = ev.iter().map(|z| -z.re).collect();
    rates.sort_by(f64::total_cmp);
    // λ1 = 0 always; skip exactly one zero
    rates
        .iter()
        .copied()
        .skip(1)
        .find(|r| *r > tol)
        .unwrap_or(0.0)
}

/// Matches two eigenvalue lists as multisets: every value in `a` is paired
/// greedily with its nearest unused value in `b`. Returns the largest
/// relative mismatch |a_i − b_j| / max(1, |a_i|).
pub fn multiset_mismatch(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for x in a {
        let (k, d) = b
            .iter()
            .enumerate()
            .filter(|(k, _)| !used[*k])
            .map(|(k, y)| (k, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .expect("lists of equal length");
        used[k] = true;
        worst = worst.max(d / x.norm().max(1.0));
    }
    worst
}
