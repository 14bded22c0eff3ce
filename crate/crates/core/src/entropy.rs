//! Entropies of one momentum mode prepared slightly off equilibrium.
//!
//! The halves start at occupations `n +- dn/2`. Expanding the binary entropy
//! of each reduced state to second order in `dn` gives
//! `S_A = s0 + s1 dn + s2 dn^2` and `S_B = s0 - s1 dn + s2 dn^2`; the mutual
//! information and the total entropy follow in closed form. Exact values come
//! from the spectra of the reduced and joint density matrices.

use std::f64::consts::PI;

use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::{hermitian_eigenvalues, reduced_from_occupations, FourLevelDensityMatrix, Half};
use crate::error::{check_domain, Error, Result};
use crate::lattice::ModeSpec;

pub const PSD_TOLERANCE: f64 = 1e-12;

/// A mode whose halves sit at `n_eq + delta_n/2` and `n_eq - delta_n/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumModePrep {
    pub n_eq: f64,
    pub delta_n: f64,
    pub coupling: f64,
    pub dephasing: f64,
}

impl EquilibriumModePrep {
    pub fn new(n_eq: f64, delta_n: f64, coupling: f64, dephasing: f64) -> Result<Self> {
        let prep = EquilibriumModePrep {
            n_eq,
            delta_n,
            coupling,
            dephasing,
        };
        prep.validate()?;
        Ok(prep)
    }

    pub fn validate(&self) -> Result<()> {
        check_domain("n_eq", self.n_eq, "0 < n_eq < 1", self.n_eq > 0.0 && self.n_eq < 1.0)?;
        let (a, b) = self.occupations();
        check_domain(
            "delta_n",
            self.delta_n,
            "n_eq +- delta_n/2 within [0, 1]",
            (0.0..=1.0).contains(&a) && (0.0..=1.0).contains(&b),
        )?;
        check_domain(
            "lambda",
            self.dephasing,
            ">= 0",
            self.dephasing >= 0.0 && self.dephasing.is_finite(),
        )?;
        check_domain("g_k", self.coupling, "finite", self.coupling.is_finite())?;
        Ok(())
    }

    /// `(n_A, n_B)`.
    pub fn occupations(&self) -> (f64, f64) {
        (self.n_eq + 0.5 * self.delta_n, self.n_eq - 0.5 * self.delta_n)
    }

    /// Mode carrying this coupling; the band energy plays no role in entropies.
    pub fn mode(&self) -> Result<ModeSpec> {
        ModeSpec::with_coupling(0.5 * PI, self.coupling, self.dephasing)
    }

    fn damped(&self, t: f64) -> (f64, f64, f64) {
        let decay = (-2.0 * self.dephasing * t).exp();
        let phase = 2.0 * self.coupling * t;
        (decay, phase.cos(), phase.sin())
    }

    /// `dn^2 / (4 n (1 - n))`, the scale of every second-order term.
    fn curvature(&self) -> f64 {
        self.delta_n * self.delta_n / (4.0 * self.n_eq * (1.0 - self.n_eq))
    }
}

/// Second-order expansion coefficients of the reduced-state entropies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeEntropyBreakdown {
    pub s0: f64,
    pub s1: f64,
    pub s2: f64,
    pub delta_n: f64,
}

impl ModeEntropyBreakdown {
    pub fn s_a(&self) -> f64 {
        self.s0 + self.s1 * self.delta_n + self.s2 * self.delta_n * self.delta_n
    }

    pub fn s_b(&self) -> f64 {
        self.s0 - self.s1 * self.delta_n + self.s2 * self.delta_n * self.delta_n
    }
}

/// Binary entropy `-(1-n) ln(1-n) - n ln n` with `0 ln 0 = 0`.
pub fn binary_entropy(n: f64) -> f64 {
    xlnx_neg(n) + xlnx_neg(1.0 - n)
}

fn xlnx_neg(p: f64) -> f64 {
    if p <= 0.0 {
        0.0
    } else {
        -p * p.ln()
    }
}

/// `-sum p ln p` over the spectrum of a Hermitian density matrix of dimension 2 or 4.
pub fn von_neumann(rho: &DMatrix<Complex64>) -> Result<f64> {
    let dim = rho.nrows();
    if rho.ncols() != dim || !(dim == 2 || dim == 4) {
        return Err(Error::InvalidDensity(format!(
            "expected a 2x2 or 4x4 matrix, got {}x{}",
            dim,
            rho.ncols()
        )));
    }
    let herm = (rho - rho.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if herm > PSD_TOLERANCE {
        return Err(Error::InvalidDensity(format!("hermiticity defect {herm:e}")));
    }
    let trace = rho.trace();
    if (trace.re - 1.0).abs() > PSD_TOLERANCE || trace.im.abs() > PSD_TOLERANCE {
        return Err(Error::InvalidDensity(format!("trace {trace}")));
    }
    let spectrum = hermitian_eigenvalues(rho);
    entropy_of_spectrum(&spectrum)
}

fn entropy_of_spectrum(spectrum: &[f64]) -> Result<f64> {
    if let Some(p) = spectrum.iter().find(|p| **p < -PSD_TOLERANCE) {
        return Err(Error::InvalidDensity(format!("negative eigenvalue {p:e}")));
    }
    Ok(spectrum.iter().map(|p| xlnx_neg(*p)).sum())
}

pub fn von_neumann_mode(rho: &FourLevelDensityMatrix) -> Result<f64> {
    von_neumann(&DMatrix::from_iterator(4, 4, rho.0.iter().copied()))
}

/// Entropy of a real diagonalisable qubit state.
pub fn von_neumann_qubit(rho: &Matrix2<f64>) -> Result<f64> {
    von_neumann(&DMatrix::from_iterator(2, 2, rho.iter().map(|x| Complex64::from(*x))))
}

pub fn entropy_coeffs(prep: &EquilibriumModePrep, t: f64) -> Result<ModeEntropyBreakdown> {
    prep.validate()?;
    let n = prep.n_eq;
    let envelope = (-prep.dephasing * t).exp();
    let c = (2.0 * prep.coupling * t).cos();
    Ok(ModeEntropyBreakdown {
        s0: binary_entropy(n),
        s1: 0.5 * envelope * c * ((1.0 - n).ln() - n.ln()),
        s2: envelope * envelope * c * c / (8.0 * (n - 1.0) * n),
        delta_n: prep.delta_n,
    })
}

/// `I = e^{-2 lambda t} sin^2(2 g_k t) dn^2 / (4 n (1 - n))`.
pub fn mutual_information_mode(prep: &EquilibriumModePrep, t: f64) -> Result<f64> {
    prep.validate()?;
    let (decay, _, s) = prep.damped(t);
    Ok(decay * s * s * prep.curvature())
}

/// `Pi = (lambda / 2) e^{-2 lambda t} dn^2 / (n (1 - n))`.
pub fn entropy_production_mode(prep: &EquilibriumModePrep, t: f64) -> Result<f64> {
    prep.validate()?;
    if prep.dephasing == 0.0 || prep.delta_n == 0.0 {
        return Ok(0.0);
    }
    let (decay, _, _) = prep.damped(t);
    Ok(2.0 * prep.dephasing * decay * prep.curvature())
}

/// Expanded joint entropy `S_A + S_B - I = 2 s0 - e^{-2 lambda t} dn^2 / (4 n (1 - n))`.
pub fn total_entropy_mode(prep: &EquilibriumModePrep, t: f64) -> Result<f64> {
    prep.validate()?;
    let (decay, _, _) = prep.damped(t);
    Ok(2.0 * binary_entropy(prep.n_eq) - decay * prep.curvature())
}

/// Time derivative of the expanded `S_A + S_B`.
pub fn marginal_entropy_rate(prep: &EquilibriumModePrep, t: f64) -> Result<f64> {
    prep.validate()?;
    let (decay, c, _) = prep.damped(t);
    let four = (4.0 * prep.coupling * t).sin();
    Ok(prep.curvature() * decay * (2.0 * prep.dephasing * c * c + 2.0 * prep.coupling * four))
}

/// Time derivative of the mutual information.
pub fn mutual_information_rate(prep: &EquilibriumModePrep, t: f64) -> Result<f64> {
    prep.validate()?;
    let (decay, _, s) = prep.damped(t);
    let four = (4.0 * prep.coupling * t).sin();
    Ok(prep.curvature() * decay * (-2.0 * prep.dephasing * s * s + 2.0 * prep.coupling * four))
}

/// Entropies from the spectra of the reduced and joint states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExactEntropies {
    pub s_a: f64,
    pub s_b: f64,
    pub s_ab: f64,
}

impl ExactEntropies {
    pub fn mutual_information(&self) -> f64 {
        self.s_a + self.s_b - self.s_ab
    }
}

pub fn exact_entropies(prep: &EquilibriumModePrep, t: f64) -> Result<ExactEntropies> {
    prep.validate()?;
    let mode = prep.mode()?;
    let (n_a, n_b) = prep.occupations();
    let rho = FourLevelDensityMatrix::from_occupations(&mode, n_a, n_b, t);
    Ok(ExactEntropies {
        s_a: von_neumann_qubit(&reduced_from_occupations(Half::A, &mode, n_a, n_b, t))?,
        s_b: von_neumann_qubit(&reduced_from_occupations(Half::B, &mode, n_a, n_b, t))?,
        s_ab: von_neumann_mode(&rho)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::density_matrix;
    use crate::lattice::ReservoirParams;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn prep(n: f64, dn: f64, g: f64, lambda: f64) -> EquilibriumModePrep {
        EquilibriumModePrep::new(n, dn, g, lambda).unwrap()
    }

    #[test]
    fn von_neumann_basics() {
        let pure = Matrix2::new(1.0, 0.0, 0.0, 0.0);
        assert_eq!(von_neumann_qubit(&pure).unwrap(), 0.0);
        let mixed = Matrix2::new(0.5, 0.0, 0.0, 0.5);
        assert_abs_diff_eq!(von_neumann_qubit(&mixed).unwrap(), 2f64.ln(), epsilon = 1e-15);
        let bad = Matrix2::new(1.2, 0.0, 0.0, -0.2);
        assert!(matches!(von_neumann_qubit(&bad), Err(Error::InvalidDensity(_))));
        let three = DMatrix::<Complex64>::identity(3, 3) / Complex64::from(3.0);
        assert!(von_neumann(&three).is_err());
    }

    #[test]
    fn product_state_is_additive() {
        let mode = ModeSpec::new(1.0, 1.0, 0.2).unwrap();
        let ra = ReservoirParams::new(0.4, 0.3).unwrap();
        let rb = ReservoirParams::new(0.7, -0.5).unwrap();
        let rho = density_matrix(&mode, &ra, &rb, 0.0).unwrap();
        let na = crate::lattice::occupation_fd(mode.energy, &ra).unwrap();
        let nb = crate::lattice::occupation_fd(mode.energy, &rb).unwrap();
        assert_abs_diff_eq!(
            von_neumann_mode(&rho).unwrap(),
            binary_entropy(na) + binary_entropy(nb),
            epsilon = 1e-14
        );
    }

    #[test]
    fn half_filling_has_no_linear_term() {
        let p = prep(0.5, 0.1, 1.0, 0.2);
        for t in [0.0, 0.3, 2.0, 11.0] {
            assert_eq!(entropy_coeffs(&p, t).unwrap().s1, 0.0);
        }
    }

    #[test]
    fn damped_limit() {
        let p = prep(0.3, 0.05, 1.0, 0.4);
        let c = entropy_coeffs(&p, 200.0).unwrap();
        assert_abs_diff_eq!(c.s1, 0.0, epsilon = 1e-30);
        assert_abs_diff_eq!(c.s2, 0.0, epsilon = 1e-30);
        assert_abs_diff_eq!(c.s_a(), c.s0, epsilon = 1e-30);
        assert_abs_diff_eq!(total_entropy_mode(&p, 200.0).unwrap(), 2.0 * c.s0, epsilon = 1e-30);
    }

    #[test]
    fn expansion_residual_is_third_order() {
        let mut ratios = Vec::new();
        for dn in [0.1, 0.05, 0.025] {
            let p = prep(0.1, dn, 1.0, 0.2);
            let exact = exact_entropies(&p, 1.3).unwrap();
            let c = entropy_coeffs(&p, 1.3).unwrap();
            let r = (exact.s_a - c.s_a()).abs();
            ratios.push(r / dn.powi(3));
            assert!((exact.s_b - c.s_b()).abs() / dn.powi(3) < 10.0);
        }
        // the ratio approaches h'''(n) e^{-3 lambda t} cos^3 / 48
        assert!(ratios.iter().all(|r| *r > 0.1 && *r < 10.0), "{ratios:?}");
        assert!((ratios[2] / ratios[1] - 1.0).abs() < 0.1);
    }

    #[test]
    fn mutual_information_closed_form() {
        let p = prep(0.5, 0.1, 1.0, 0.2);
        assert_eq!(mutual_information_mode(&p, 0.0).unwrap(), 0.0);
        let closed = prep(0.3, 0.1, 0.8, 0.0);
        let t = PI / 2.0 / (2.0 * 0.8);
        assert_abs_diff_eq!(
            mutual_information_mode(&closed, t).unwrap(),
            0.01 / (4.0 * 0.3 * 0.7),
            epsilon = 1e-16
        );
        let exact = exact_entropies(&p, 0.7).unwrap();
        let approx = mutual_information_mode(&p, 0.7).unwrap();
        assert!((exact.mutual_information() - approx).abs() < 0.1f64.powi(3));
    }

    #[test]
    fn production_edge_cases() {
        assert_eq!(entropy_production_mode(&prep(0.4, 0.1, 1.0, 0.0), 3.0).unwrap(), 0.0);
        assert_eq!(entropy_production_mode(&prep(0.4, 0.0, 1.0, 0.3), 3.0).unwrap(), 0.0);
        for lambda in [0.0, 0.2] {
            let p = prep(0.4, 0.1, 1.0, lambda);
            let s0 = total_entropy_mode(&p, 0.0).unwrap();
            if lambda == 0.0 {
                assert_eq!(total_entropy_mode(&p, 7.3).unwrap(), s0);
            }
        }
    }

    #[test]
    fn production_is_derivative_of_total() {
        let p = prep(0.5, 0.1, 1.0, 0.2);
        let h = 1e-5;
        let fd = (total_entropy_mode(&p, 1.0 + h).unwrap() - total_entropy_mode(&p, 1.0 - h).unwrap()) / (2.0 * h);
        assert_abs_diff_eq!(fd, entropy_production_mode(&p, 1.0).unwrap(), epsilon = 1e-7);
    }

    #[test]
    fn rate_identity() {
        for (n, g, lambda) in [(0.5, 1.0, 0.2), (0.2, 0.6, 0.05), (0.8, 1.7, 0.9)] {
            let p = prep(n, 0.08, g, lambda);
            for t in [0.0, 0.4, 1.9, 6.0] {
                let pi = entropy_production_mode(&p, t).unwrap();
                let rhs = marginal_entropy_rate(&p, t).unwrap() - mutual_information_rate(&p, t).unwrap();
                assert_abs_diff_eq!(pi, rhs, epsilon = 1e-12);
                let h = 1e-5;
                let di = (mutual_information_mode(&p, t + h).unwrap()
                    - mutual_information_mode(&p, (t - h).max(0.0)).unwrap())
                    / (t + h - (t - h).max(0.0));
                if t > 0.0 {
                    assert_abs_diff_eq!(di, mutual_information_rate(&p, t).unwrap(), epsilon = 1e-8);
                }
            }
        }
    }

    #[test]
    fn exact_joint_entropy_under_dephasing() {
        let times: Vec<f64> = (0..=400).map(|i| 0.05 * i as f64).collect();
        let closed = prep(0.5, 0.1, 1.0, 0.0);
        let s0 = exact_entropies(&closed, 0.0).unwrap().s_ab;
        let open = prep(0.5, 0.1, 1.0, 0.2);
        let mut last = exact_entropies(&open, 0.0).unwrap().s_ab;
        for &t in &times {
            assert_abs_diff_eq!(exact_entropies(&closed, t).unwrap().s_ab, s0, epsilon = 1e-10);
            let now = exact_entropies(&open, t).unwrap().s_ab;
            assert!(now >= last - 1e-10);
            last = now;
        }
    }

    #[test]
    fn rejects_boundary_occupations() {
        assert!(EquilibriumModePrep::new(0.0, 0.0, 1.0, 0.1).is_err());
        assert!(EquilibriumModePrep::new(1.0, 0.0, 1.0, 0.1).is_err());
        assert!(EquilibriumModePrep::new(0.1, 0.3, 1.0, 0.1).is_err());
        assert!(EquilibriumModePrep::new(0.5, 0.1, 1.0, -0.1).is_err());
    }

    proptest! {
        #[test]
        fn subadditivity_and_positive_production(
            n in 0.05f64..0.95,
            frac in 0.0f64..1.0,
            g in 0.0f64..2.0,
            lambda in 0.0f64..1.0,
            t in 0.0f64..15.0,
        ) {
            let dn = frac * 2.0 * n.min(1.0 - n);
            let p = EquilibriumModePrep::new(n, dn, g, lambda).unwrap();
            let e = exact_entropies(&p, t).unwrap();
            prop_assert!(e.mutual_information() >= -1e-12);
            prop_assert!(entropy_production_mode(&p, t).unwrap() >= 0.0);
        }
    }
}
