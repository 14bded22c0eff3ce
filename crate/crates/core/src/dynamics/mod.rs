//! Per-mode evolution of the two-site density matrix under hopping plus
//! energy-conserving dephasing.
//!
//! Each momentum sector is a four-level system spanned by
//! `{|0>, a+|0>, b+|0>, a+b+|0>}` (indices 0..4). Starting from the product of
//! the two thermal single-site states, the master equation has a closed-form
//! solution: populations relax towards their mean with envelope
//! `exp(-lambda t) cos(2 g_k t)`, and the single-particle coherence follows the
//! matching sine. The [`lindblad`] submodule integrates the master equation
//! numerically and serves as an independent check of these formulas.

pub mod lindblad;

use nalgebra::{DMatrix, Matrix2, Matrix4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{occupation_fd, ModeSpec, ReservoirParams};

/// Which half of the bipartition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Half {
    A,
    B,
}

/// Indices of the ordered Fock basis of one mode.
pub const VACUUM: usize = 0;
pub const SITE_A: usize = 1;
pub const SITE_B: usize = 2;
pub const BOTH: usize = 3;

/// Expectation values that fix the density matrix of one mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeObservables {
    pub occ_a: f64,
    pub occ_b: f64,
    /// <a+ b>, purely imaginary.
    pub coherence_ab: Complex64,
}

#[inline]
fn envelope(mode: &ModeSpec, t: f64) -> f64 {
    if t == 0.0 {
        1.0
    } else {
        (-mode.dephasing * t).exp()
    }
}

/// <a+ a>_t.
pub fn occ_a(mode: &ModeSpec, n_a: f64, n_b: f64, t: f64) -> f64 {
    let phase = 2.0 * mode.coupling * t;
    0.5 * (n_a + n_b) + 0.5 * (n_a - n_b) * envelope(mode, t) * phase.cos()
}

/// <b+ b>_t.
pub fn occ_b(mode: &ModeSpec, n_a: f64, n_b: f64, t: f64) -> f64 {
    let phase = 2.0 * mode.coupling * t;
    0.5 * (n_a + n_b) - 0.5 * (n_a - n_b) * envelope(mode, t) * phase.cos()
}

/// <a+ b>_t = (i/2)(n_A - n_B) exp(-lambda t) sin(2 g_k t).
///
/// This sign corresponds to the inter-half hopping entering the mode
/// Hamiltonian as `-g_k (a+ b + b+ a)`, the chain's own sign for the bond
/// coupling; flipping g_k conjugates the coherence and nothing else.
pub fn coherence_ab(mode: &ModeSpec, n_a: f64, n_b: f64, t: f64) -> Complex64 {
    let phase = 2.0 * mode.coupling * t;
    Complex64::new(0.0, 0.5 * (n_a - n_b) * envelope(mode, t) * phase.sin())
}

pub fn observables(mode: &ModeSpec, n_a: f64, n_b: f64, t: f64) -> ModeObservables {
    ModeObservables {
        occ_a: occ_a(mode, n_a, n_b, t),
        occ_b: occ_b(mode, n_a, n_b, t),
        coherence_ab: coherence_ab(mode, n_a, n_b, t),
    }
}

/// Density matrix of one mode in the basis `{|0>, a+|0>, b+|0>, a+b+|0>}`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourLevelDensityMatrix(pub Matrix4<Complex64>);

impl FourLevelDensityMatrix {
    /// Thermal product state with site occupations `n_a`, `n_b`.
    pub fn product(n_a: f64, n_b: f64) -> Self {
        let (h_a, h_b) = (1.0 - n_a, 1.0 - n_b);
        let mut m = Matrix4::zeros();
        m[(VACUUM, VACUUM)] = Complex64::from(h_a * h_b);
        m[(SITE_A, SITE_A)] = Complex64::from(n_a * h_b);
        m[(SITE_B, SITE_B)] = Complex64::from(h_a * n_b);
        m[(BOTH, BOTH)] = Complex64::from(n_a * n_b);
        FourLevelDensityMatrix(m)
    }

    /// Assembles the matrix from occupations and the closed-form observables.
    pub fn from_occupations(mode: &ModeSpec, n_a: f64, n_b: f64, t: f64) -> Self {
        let obs = observables(mode, n_a, n_b, t);
        let both = n_a * n_b;
        let mut m = Matrix4::zeros();
        m[(VACUUM, VACUUM)] = Complex64::from((1.0 - n_a) * (1.0 - n_b));
        m[(SITE_A, SITE_A)] = Complex64::from(obs.occ_a - both);
        m[(SITE_B, SITE_B)] = Complex64::from(obs.occ_b - both);
        m[(BOTH, BOTH)] = Complex64::from(both);
        // tr(rho a+ b) = <b|rho|a>
        m[(SITE_B, SITE_A)] = obs.coherence_ab;
        m[(SITE_A, SITE_B)] = obs.coherence_ab.conj();
        FourLevelDensityMatrix(m)
    }

    pub fn matrix(&self) -> &Matrix4<Complex64> {
        &self.0
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    pub fn purity(&self) -> f64 {
        (self.0 * self.0).trace().re
    }

    /// Eigenvalues in ascending order (Hermitian part).
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&DMatrix::from_iterator(4, 4, self.0.iter().copied()))
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    pub fn hermiticity_defect(&self) -> f64 {
        (self.0 - self.0.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (self.0 - other.0).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Checks Hermiticity, unit trace and positivity within `tol`.
    pub fn validate(&self, tol: f64) -> Result<()> {
        let herm = self.hermiticity_defect();
        if herm > tol {
            return Err(Error::InvalidDensity(format!("hermiticity defect {herm:e}")));
        }
        let tr = self.trace();
        if (tr.re - 1.0).abs() > tol || tr.im.abs() > tol {
            return Err(Error::InvalidDensity(format!("trace {tr}")));
        }
        let min = self.min_eigenvalue();
        if min < -tol {
            return Err(Error::InvalidDensity(format!("eigenvalue {min:e}")));
        }
        Ok(())
    }

    /// Reduced state of one half, `diag(1 - occ, occ)` in `{|0>, |1>}`.
    pub fn partial_trace(&self, keep: Half) -> Matrix2<f64> {
        let d = |i: usize| self.0[(i, i)].re;
        match keep {
            Half::A => Matrix2::new(d(VACUUM) + d(SITE_B), 0.0, 0.0, d(SITE_A) + d(BOTH)),
            Half::B => Matrix2::new(d(VACUUM) + d(SITE_A), 0.0, 0.0, d(SITE_B) + d(BOTH)),
        }
    }
}

pub(crate) fn hermitian_eigenvalues(m: &DMatrix<Complex64>) -> Vec<f64> {
    let herm = (m + m.adjoint()) * Complex64::from(0.5);
    let mut eig: Vec<f64> = herm.symmetric_eigenvalues().iter().copied().collect();
    eig.sort_by(f64::total_cmp);
    eig
}

/// Closed-form density matrix of `mode` at time `t`, starting from the product
/// of thermal states set by `res_a` and `res_b`.
pub fn density_matrix(
    mode: &ModeSpec,
    res_a: &ReservoirParams,
    res_b: &ReservoirParams,
    t: f64,
) -> Result<FourLevelDensityMatrix> {
    let n_a = occupation_fd(mode.energy, res_a)?;
    let n_b = occupation_fd(mode.energy, res_b)?;
    Ok(FourLevelDensityMatrix::from_occupations(mode, n_a, n_b, t))
}

/// Reduced density matrix of one half.
pub fn reduced_density(
    which: Half,
    mode: &ModeSpec,
    res_a: &ReservoirParams,
    res_b: &ReservoirParams,
    t: f64,
) -> Result<Matrix2<f64>> {
    let n_a = occupation_fd(mode.energy, res_a)?;
    let n_b = occupation_fd(mode.energy, res_b)?;
    Ok(reduced_from_occupations(which, mode, n_a, n_b, t))
}

/// B's state is A's formula with n_A and n_B swapped.
pub fn reduced_from_occupations(which: Half, mode: &ModeSpec, n_a: f64, n_b: f64, t: f64) -> Matrix2<f64> {
    let occ = match which {
        Half::A => occ_a(mode, n_a, n_b, t),
        Half::B => occ_a(mode, n_b, n_a, t),
    };
    Matrix2::new(1.0 - occ, 0.0, 0.0, occ)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn mode(g_k: f64, lambda: f64) -> ModeSpec {
        ModeSpec::with_coupling(PI / 3.0, g_k, lambda).unwrap()
    }

    #[test]
    fn occupations_initial_and_flat() {
        let m = mode(0.7, 0.2);
        assert_abs_diff_eq!(occ_a(&m, 0.8, 0.1, 0.0), 0.8, epsilon = 1e-16);
        assert_abs_diff_eq!(occ_b(&m, 0.8, 0.1, 0.0), 0.1, epsilon = 1e-16);
        for t in [0.0, 0.4, 3.0, 17.0] {
            assert_abs_diff_eq!(occ_a(&m, 0.3, 0.3, t), 0.3, epsilon = 1e-16);
        }
    }

    #[test]
    fn full_swap_without_dephasing() {
        let m = mode(0.5, 0.0);
        let t = PI / (2.0 * 0.5);
        assert_abs_diff_eq!(occ_a(&m, 0.9, 0.2, t), 0.2, epsilon = 1e-15);
        assert_abs_diff_eq!(occ_b(&m, 0.9, 0.2, t), 0.9, epsilon = 1e-15);
    }

    #[test]
    fn conservation_example() {
        let m = mode(0.8, 0.2);
        let s = occ_a(&m, 0.65, 0.15, 1.7) + occ_b(&m, 0.65, 0.15, 1.7);
        assert_abs_diff_eq!(s, 0.8, epsilon = 1e-15);
    }

    #[test]
    fn strong_dephasing_drives_to_mean() {
        let m = mode(0.8, 1e6);
        assert_abs_diff_eq!(occ_b(&m, 0.9, 0.1, 0.3), 0.5, epsilon = 1e-15);
        assert_eq!(coherence_ab(&m, 0.9, 0.1, 0.3).norm(), 0.0);
    }

    #[test]
    fn coherence_cases() {
        let m = mode(0.5, 0.0);
        assert_eq!(coherence_ab(&m, 0.7, 0.2, 0.0), Complex64::new(0.0, 0.0));
        assert_eq!(coherence_ab(&mode(0.5, 0.3), 0.4, 0.4, 2.2).norm(), 0.0);
        // 2 g t = pi/2
        let c = coherence_ab(&m, 0.7, 0.2, PI / 2.0);
        assert_abs_diff_eq!(c.re, 0.0);
        assert_abs_diff_eq!(c.im, 0.25, epsilon = 1e-15);
    }

    #[test]
    fn initial_state_is_thermal_product() {
        let m = ModeSpec::new(1.1, 1.0, 0.3).unwrap();
        let ra = ReservoirParams::new(0.4, 0.5).unwrap();
        let rb = ReservoirParams::new(0.2, -0.3).unwrap();
        let rho = density_matrix(&m, &ra, &rb, 0.0).unwrap();
        let na = occupation_fd(m.energy, &ra).unwrap();
        let nb = occupation_fd(m.energy, &rb).unwrap();
        assert!(rho.max_abs_diff(&FourLevelDensityMatrix::product(na, nb)) < 1e-15);
    }

    #[test]
    fn pauli_blocked_mode_is_frozen() {
        let m = mode(1.0, 0.2);
        for t in [0.0, 0.5, 4.0] {
            let rho = FourLevelDensityMatrix::from_occupations(&m, 1.0, 1.0, t);
            let mut expect = Matrix4::zeros();
            expect[(BOTH, BOTH)] = Complex64::from(1.0);
            assert!(rho.max_abs_diff(&FourLevelDensityMatrix(expect)) < 1e-16);
        }
    }

    #[test]
    fn valid_state_at_reference_point() {
        let m = ModeSpec::with_coupling(PI / 2.0, 1.0, 0.1).unwrap();
        let ra = ReservoirParams::new(0.5, 0.3).unwrap();
        let rb = ReservoirParams::new(0.5, -0.3).unwrap();
        let rho = density_matrix(&m, &ra, &rb, 2.3).unwrap();
        assert_abs_diff_eq!(rho.trace().re, 1.0, epsilon = 1e-12);
        assert!(rho.min_eigenvalue() >= -1e-12);
        rho.validate(1e-12).unwrap();
    }

    #[test]
    fn reduced_matches_partial_trace() {
        let m = ModeSpec::new(0.9, 1.0, 0.25).unwrap();
        let ra = ReservoirParams::new(0.3, 0.1).unwrap();
        let rb = ReservoirParams::new(0.25, -0.4).unwrap();
        for t in [0.0, 0.7, 2.9] {
            let rho = density_matrix(&m, &ra, &rb, t).unwrap();
            for which in [Half::A, Half::B] {
                let direct = reduced_density(which, &m, &ra, &rb, t).unwrap();
                assert!((direct - rho.partial_trace(which)).abs().max() < 1e-12);
            }
        }
        let na = occupation_fd(m.energy, &ra).unwrap();
        assert_abs_diff_eq!(reduced_density(Half::A, &m, &ra, &rb, 0.0).unwrap()[(1, 1)], na);
    }

    #[test]
    fn corners_fixed_in_time() {
        let m = mode(1.3, 0.1);
        let r0 = FourLevelDensityMatrix::from_occupations(&m, 0.6, 0.25, 0.0);
        for t in [0.3, 1.0, 8.0] {
            let r = FourLevelDensityMatrix::from_occupations(&m, 0.6, 0.25, t);
            assert_eq!(r.0[(VACUUM, VACUUM)], r0.0[(VACUUM, VACUUM)]);
            assert_eq!(r.0[(BOTH, BOTH)], r0.0[(BOTH, BOTH)]);
        }
    }

    proptest! {
        #[test]
        fn per_mode_conservation(na in 0.0f64..=1.0, nb in 0.0f64..=1.0, g in 0.0f64..3.0,
                                 lambda in 0.0f64..2.0, t in 0.0f64..50.0) {
            let m = mode(g, lambda);
            let s = occ_a(&m, na, nb, t) + occ_b(&m, na, nb, t);
            prop_assert!((s - (na + nb)).abs() <= 1e-14);
        }

        #[test]
        fn coherence_envelope(na in 0.0f64..=1.0, nb in 0.0f64..=1.0, g in 0.0f64..3.0,
                              lambda in 0.0f64..2.0, t in 0.0f64..50.0) {
            let m = mode(g, lambda);
            let c = coherence_ab(&m, na, nb, t);
            prop_assert_eq!(c.re, 0.0);
            prop_assert!(c.norm() <= 0.5 * (na - nb).abs() * (-lambda * t).exp() + 1e-16);
        }

        #[test]
        fn positivity(na in 0.0f64..=1.0, nb in 0.0f64..=1.0, g in 0.0f64..3.0,
                      lambda in 0.0f64..2.0, t in 0.0f64..50.0) {
            let rho = FourLevelDensityMatrix::from_occupations(&mode(g, lambda), na, nb, t);
            prop_assert!(rho.min_eigenvalue() >= -1e-12);
            prop_assert!((rho.trace().re - 1.0).abs() < 1e-12);
        }
    }
}
