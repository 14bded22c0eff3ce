//! Fixed-step RK4 integration of the single-mode master equation
//!
//! `d rho/dt = -i [H_k, rho] + lambda sum_s (L_s rho L_s - 1/2 {L_s^2, rho})`
//!
//! with `L_s = eta_s+ eta_s` the number operators of the normal modes
//! `eta_s = (a + s b)/sqrt(2)`. These commute with `H_k`, so the channel
//! removes coherence between normal modes while conserving energy and particle
//! number. Nothing here uses the closed-form solution.

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;

use super::{FourLevelDensityMatrix, BOTH, SITE_A, SITE_B};
use crate::error::{Error, Result};
use crate::lattice::{occupation_fd, ModeSpec, ReservoirParams};

type M4 = Matrix4<Complex64>;

/// Mode Hamiltonian `eps (n_a + n_b) - g_k (a+ b + b+ a)`.
pub fn hamiltonian(mode: &ModeSpec) -> M4 {
    let mut h = M4::zeros();
    h[(SITE_A, SITE_A)] = Complex64::from(mode.energy);
    h[(SITE_B, SITE_B)] = Complex64::from(mode.energy);
    h[(BOTH, BOTH)] = Complex64::from(2.0 * mode.energy);
    h[(SITE_A, SITE_B)] = Complex64::from(-mode.coupling);
    h[(SITE_B, SITE_A)] = Complex64::from(-mode.coupling);
    h
}

/// Number operator of the normal mode with parity `sign` (+1 or -1).
///
/// On the single-particle sector it projects onto `(|a> + sign |b>)/sqrt(2)`;
/// on the doubly occupied state it acts as the identity.
pub fn normal_mode_number(sign: f64) -> M4 {
    let v = Vector4::new(
        Complex64::from(0.0),
        Complex64::from(FRAC_1_SQRT_2),
        Complex64::from(sign * FRAC_1_SQRT_2),
        Complex64::from(0.0),
    );
    let mut l = v * v.adjoint();
    l[(BOTH, BOTH)] = Complex64::from(1.0);
    l
}

/// Right-hand side of the master equation.
pub struct Generator {
    hamiltonian: M4,
    jumps: [M4; 2],
    rate: f64,
}

impl Generator {
    pub fn new(mode: &ModeSpec) -> Self {
        Generator {
            hamiltonian: hamiltonian(mode),
            jumps: [normal_mode_number(1.0), normal_mode_number(-1.0)],
            rate: mode.dephasing,
        }
    }

    pub fn apply(&self, rho: &M4) -> M4 {
        let i = Complex64::i();
        let h = &self.hamiltonian;
        let mut out = (h * rho - rho * h) * (-i);
        if self.rate != 0.0 {
            let half = Complex64::from(0.5);
            let rate = Complex64::from(self.rate);
            for l in &self.jumps {
                let ldl = l.adjoint() * l;
                out += (l * rho * l.adjoint() - (ldl * rho + rho * ldl) * half) * rate;
            }
        }
        out
    }

    fn rk4_step(&self, rho: &M4, dt: f64) -> M4 {
        let h = Complex64::from(dt);
        let half = Complex64::from(0.5 * dt);
        let k1 = self.apply(rho);
        let k2 = self.apply(&(rho + k1 * half));
        let k3 = self.apply(&(rho + k2 * half));
        let k4 = self.apply(&(rho + k3 * h));
        rho + (k1 + k2 * Complex64::from(2.0) + k3 * Complex64::from(2.0) + k4) * (h / 6.0)
    }
}

fn initial_state(mode: &ModeSpec, res_a: &ReservoirParams, res_b: &ReservoirParams) -> Result<M4> {
    let n_a = occupation_fd(mode.energy, res_a)?;
    let n_b = occupation_fd(mode.energy, res_b)?;
    Ok(FourLevelDensityMatrix::product(n_a, n_b).0)
}

/// Integrates from the thermal product state to time `t` with steps no larger
/// than `dt_max`.
pub fn lindblad_oracle(
    mode: &ModeSpec,
    res_a: &ReservoirParams,
    res_b: &ReservoirParams,
    t: f64,
    dt_max: f64,
) -> Result<FourLevelDensityMatrix> {
    let mut out = lindblad_trajectory(mode, res_a, res_b, &[t], dt_max)?;
    Ok(out.pop().expect("one sample requested"))
}

/// Integrates once along increasing `times`, returning the state at each.
pub fn lindblad_trajectory(
    mode: &ModeSpec,
    res_a: &ReservoirParams,
    res_b: &ReservoirParams,
    times: &[f64],
    dt_max: f64,
) -> Result<Vec<FourLevelDensityMatrix>> {
    let rho0 = initial_state(mode, res_a, res_b)?;
    integrate(mode, rho0, times, dt_max)
}

/// Integrates an arbitrary initial state along increasing `times`.
pub fn integrate(mode: &ModeSpec, rho0: M4, times: &[f64], dt_max: f64) -> Result<Vec<FourLevelDensityMatrix>> {
    if !(dt_max > 0.0 && dt_max.is_finite()) {
        return Err(Error::StepFailure(format!(
            "dt_max must be positive and finite, got {dt_max}"
        )));
    }
    let generator = Generator::new(mode);
    let mut rho = rho0;
    let mut now = 0.0;
    let mut out = Vec::with_capacity(times.len());
    for &target in times {
        if !(target >= now && target.is_finite()) {
            return Err(Error::StepFailure(format!(
                "sample times must be finite and non-decreasing from 0 (got {target} after {now})"
            )));
        }
        let span = target - now;
        let steps = (span / dt_max).ceil() as usize;
        if steps > 0 {
            let dt = span / steps as f64;
            for _ in 0..steps {
                rho = generator.rk4_step(&rho, dt);
            }
        }
        now = target;
        // Entries of a density matrix are bounded by one; the trace alone is
        // conserved even by an unstable step.
        let tr = rho.trace();
        let largest = rho.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if !(tr.re.is_finite() && (tr.re - 1.0).abs() < 1e-6 && largest <= 1.0 + 1e-6) {
            return Err(Error::StepFailure(format!(
                "state left the physical set at t = {now} (trace {tr}, largest entry {largest:e})"
            )));
        }
        out.push(FourLevelDensityMatrix(rho));
    }
    Ok(out)
}
