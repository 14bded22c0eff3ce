//! Accumulated particle and heat transfer between the two halves.
//!
//! Every band functional has the form `(1/pi) int_0^pi w(k) D(k) dk` with the
//! relaxation factor `D(k) = e^{-lambda t} cos(2 g_k t) - 1` and a weight `w`
//! built from the reservoir occupation. Onsager coefficients differentiate the
//! weight analytically:
//!
//! ```text
//! J_Nmu = (1/2pi) int n h D          J_NT = J_Qmu = (1/2pi) int (e - mu) n h D
//! J_QT  = (1/2pi) int (e - mu)^2 n h D
//! ```
//!
//! where `h = 1 - n` for Fermi-Dirac reservoirs and `h = 1` for Boltzmann ones.
//! Heat is measured relative to the base chemical potential, so `mu` in
//! `Q = E - mu N` is held fixed when differentiating.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{check_domain, Error, Result};
use crate::lattice::{fermi, fermi_variance, ReservoirParams, Statistics, DEFAULT_BOLTZMANN_CAP};
use crate::quadrature::{integrate_band_with_breaks, QuadResult, QuadratureSpec};

/// Below this the oscillating part of the relaxation factor is dropped.
const NEGLIGIBLE_ENVELOPE: f64 = 1e-18;

/// Time at which band functionals are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Horizon {
    At(f64),
    /// The damped `t -> infinity` limit; requires `lambda > 0`.
    Equilibrium,
}

impl From<f64> for Horizon {
    fn from(t: f64) -> Self {
        Horizon::At(t)
    }
}

impl std::fmt::Display for Horizon {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Horizon::At(t) => write!(f, "t = {t}"),
            Horizon::Equilibrium => f.write_str("t -> inf"),
        }
    }
}

impl Horizon {
    /// `e^{-lambda t}`, zero at equilibrium.
    pub fn envelope(&self, dephasing: f64) -> Result<f64> {
        check_domain("lambda", dephasing, ">= 0", dephasing >= 0.0 && dephasing.is_finite())?;
        match *self {
            Horizon::At(t) => {
                check_domain("t", t, ">= 0", t >= 0.0 && t.is_finite())?;
                Ok((-dephasing * t).exp())
            }
            Horizon::Equilibrium if dephasing == 0.0 => Err(Error::UndampedEquilibrium),
            Horizon::Equilibrium => Ok(0.0),
        }
    }
}

/// The factor `e^{-lambda t} cos(2 g sin^2(k) t) - 1` at fixed time.
#[derive(Debug, Clone, Copy)]
pub struct Relaxation {
    envelope: f64,
    decay_m1: f64,
    /// g t, or zero once the oscillation is negligible.
    phase_rate: f64,
}

impl Relaxation {
    pub fn new(horizon: Horizon, dephasing: f64, g: f64) -> Result<Self> {
        let envelope = horizon.envelope(dephasing)?;
        check_domain("g", g, "finite", g.is_finite())?;
        Ok(match horizon {
            Horizon::At(t) if envelope >= NEGLIGIBLE_ENVELOPE => Relaxation {
                envelope,
                decay_m1: (-dephasing * t).exp_m1(),
                phase_rate: g * t,
            },
            _ => Relaxation {
                envelope: 0.0,
                decay_m1: -1.0,
                phase_rate: 0.0,
            },
        })
    }

    /// Evaluated as `expm1(-lambda t) - 2 e^{-lambda t} sin^2(g_k t)` so that
    /// it vanishes exactly at t = 0.
    #[inline]
    pub fn factor(&self, k: f64) -> f64 {
        let s = k.sin();
        let half_phase = (self.phase_rate * s * s).sin();
        self.decay_m1 - 2.0 * self.envelope * half_phase * half_phase
    }

    pub fn is_identically_zero(&self) -> bool {
        self.decay_m1 == 0.0 && self.phase_rate == 0.0
    }

    fn panels(&self, quad: &QuadratureSpec) -> usize {
        quad.panels_for(self.phase_rate, 1.0)
    }
}

/// Reservoir weights at band energy `e`.
#[derive(Debug, Clone, Copy)]
struct Kernel {
    res: ReservoirParams,
    stats: Statistics,
}

impl Kernel {
    fn new(res: &ReservoirParams, stats: Statistics) -> Result<Self> {
        res.validate()?;
        check_domain(
            "mu",
            res.chemical_potential,
            "finite",
            res.chemical_potential.is_finite(),
        )?;
        if stats == Statistics::Boltzmann {
            // the occupation is largest at the band bottom
            let peak = ((res.chemical_potential + 2.0) / res.temperature).exp();
            if peak.is_nan() || peak > DEFAULT_BOLTZMANN_CAP {
                return Err(Error::BoltzmannOverflow {
                    value: peak,
                    cap: DEFAULT_BOLTZMANN_CAP,
                });
            }
        }
        Ok(Kernel { res: *res, stats })
    }

    #[inline]
    fn reduced(&self, e: f64) -> f64 {
        (e - self.res.chemical_potential) / self.res.temperature
    }

    #[inline]
    fn occupation(&self, e: f64) -> f64 {
        let x = self.reduced(e);
        match self.stats {
            Statistics::FermiDirac => fermi(x),
            Statistics::Boltzmann => (-x).exp(),
        }
    }

    /// T times the mu-derivative of the occupation.
    #[inline]
    fn response(&self, e: f64) -> f64 {
        let x = self.reduced(e);
        match self.stats {
            Statistics::FermiDirac => fermi_variance(x),
            Statistics::Boltzmann => (-x).exp(),
        }
    }

    /// Panel breakpoints around the Fermi surface.
    fn breaks(&self) -> Vec<f64> {
        let mu = self.res.chemical_potential;
        if self.stats != Statistics::FermiDirac || mu.abs() >= 2.0 {
            return Vec::new();
        }
        let k_f = (-0.5 * mu).acos();
        let slope = 2.0 * k_f.sin();
        // thermal width in k, bounded where the band is flat
        let width = (self.res.temperature / slope.max(self.res.temperature.sqrt())).min(0.25);
        let mut out = vec![k_f];
        for m in [2.0, 8.0, 30.0] {
            out.push(k_f - m * width);
            out.push(k_f + m * width);
        }
        out
    }
}

fn band_functional<W>(weight: W, kernel: &Kernel, relax: &Relaxation, quad: &QuadratureSpec) -> Result<QuadResult>
where
    W: Fn(f64) -> f64 + Sync,
{
    if relax.is_identically_zero() {
        return Ok(QuadResult {
            value: 0.0,
            error: 0.0,
            panels: 0,
        });
    }
    let integrand = |k: f64| {
        let e = -2.0 * k.cos();
        weight(e) * relax.factor(k)
    };
    let r = integrate_band_with_breaks(integrand, &kernel.breaks(), relax.panels(quad), quad)?;
    Ok(QuadResult {
        value: r.value / PI,
        error: r.error / PI,
        panels: r.panels,
    })
}

/// Mean particle change `(1/pi) int n(e_k) (e^{-lambda t} cos(2 g_k t) - 1) dk`.
pub fn nbar(
    horizon: Horizon,
    res: &ReservoirParams,
    dephasing: f64,
    g: f64,
    quad: &QuadratureSpec,
    stats: Statistics,
) -> Result<QuadResult> {
    let kernel = Kernel::new(res, stats)?;
    let relax = Relaxation::new(horizon, dephasing, g)?;
    band_functional(|e| kernel.occupation(e), &kernel, &relax, quad)
}

/// Mean energy change, the band integral of `n(e_k) e_k` against the relaxation factor.
pub fn ebar(
    horizon: Horizon,
    res: &ReservoirParams,
    dephasing: f64,
    g: f64,
    quad: &QuadratureSpec,
    stats: Statistics,
) -> Result<QuadResult> {
    let kernel = Kernel::new(res, stats)?;
    let relax = Relaxation::new(horizon, dephasing, g)?;
    band_functional(|e| kernel.occupation(e) * e, &kernel, &relax, quad)
}

/// Mean heat change `ebar - mu nbar`.
pub fn qbar(
    horizon: Horizon,
    res: &ReservoirParams,
    dephasing: f64,
    g: f64,
    quad: &QuadratureSpec,
    stats: Statistics,
) -> Result<QuadResult> {
    let n = nbar(horizon, res, dephasing, g, quad, stats)?;
    let e = ebar(horizon, res, dephasing, g, quad, stats)?;
    Ok(QuadResult {
        value: e.value - res.chemical_potential * n.value,
        error: e.error + res.chemical_potential.abs() * n.error,
        panels: n.panels + e.panels,
    })
}

/// Parameters an [`OnsagerBlock`] was evaluated at.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvaluationPoint {
    pub temperature: f64,
    pub chemical_potential: f64,
    pub dephasing: f64,
    pub coupling: f64,
    pub horizon: Horizon,
}

/// Linear-response coefficients relating the accumulated particle and heat
/// transfer to the affinities `(dmu/T, dT/T^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OnsagerBlock {
    pub j_n_mu: f64,
    pub j_n_t: f64,
    pub j_q_mu: f64,
    pub j_q_t: f64,
    /// Quadrature error estimates in the order above.
    pub errors: [f64; 4],
    pub evaluated_at: EvaluationPoint,
}

impl OnsagerBlock {
    pub fn as_array(&self) -> [f64; 4] {
        [self.j_n_mu, self.j_n_t, self.j_q_mu, self.j_q_t]
    }
}

pub fn onsager(
    horizon: Horizon,
    res: &ReservoirParams,
    dephasing: f64,
    g: f64,
    quad: &QuadratureSpec,
    stats: Statistics,
) -> Result<OnsagerBlock> {
    let kernel = Kernel::new(res, stats)?;
    let relax = Relaxation::new(horizon, dephasing, g)?;
    let mu = res.chemical_potential;
    // (1/pi) int (e - mu)^p T dn/dmu D, halved below
    let moment = |p: i32| band_functional(|e| (e - mu).powi(p) * kernel.response(e), &kernel, &relax, quad);
    let m0 = moment(0)?;
    let m1 = moment(1)?;
    let m2 = moment(2)?;
    Ok(OnsagerBlock {
        j_n_mu: 0.5 * m0.value,
        j_n_t: 0.5 * m1.value,
        j_q_mu: 0.5 * m1.value,
        j_q_t: 0.5 * m2.value,
        errors: [0.5 * m0.error, 0.5 * m1.error, 0.5 * m1.error, 0.5 * m2.error],
        evaluated_at: EvaluationPoint {
            temperature: res.temperature,
            chemical_potential: mu,
            dephasing,
            coupling: g,
            horizon,
        },
    })
}

/// Particle and heat transferred out of half B into half A, per site.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Fluxes {
    pub j_particle: f64,
    pub j_heat: f64,
}

/// Onsager block applied to the affinities `(delta_mu / T, delta_t / T^2)`.
pub fn fluxes(block: &OnsagerBlock, delta_mu: f64, delta_t: f64) -> Fluxes {
    let t = block.evaluated_at.temperature;
    let a_mu = delta_mu / t;
    let a_t = delta_t / (t * t);
    Fluxes {
        j_particle: block.j_n_mu * a_mu + block.j_n_t * a_t,
        j_heat: block.j_q_mu * a_mu + block.j_q_t * a_t,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn res(t: f64, mu: f64) -> ReservoirParams {
        ReservoirParams::new(t, mu).unwrap()
    }

    fn tight() -> QuadratureSpec {
        QuadratureSpec {
            abs_tol: 1e-14,
            rel_tol: 1e-13,
            ..QuadratureSpec::default()
        }
    }

    /// Periodic trapezoid over [0, pi]; the integrands are even and
    /// 2pi-periodic in k, so this converges spectrally.
    fn trapezoid<F: Fn(f64) -> f64>(f: F, nodes: usize) -> f64 {
        let h = PI / nodes as f64;
        let mut s = 0.5 * (f(0.0) + f(PI));
        for i in 1..nodes {
            s += f(h * i as f64);
        }
        s * h / PI
    }

    fn fd(e: f64, r: &ReservoirParams) -> f64 {
        1.0 / (((e - r.chemical_potential) / r.temperature).exp() + 1.0)
    }

    fn relax_oracle(k: f64, lambda: f64, g: f64, t: f64) -> f64 {
        (-lambda * t).exp() * (2.0 * g * k.sin().powi(2) * t).cos() - 1.0
    }

    #[test]
    fn zero_at_initial_time() {
        let r = res(0.1, 0.3);
        let q = QuadratureSpec::default();
        for stats in [Statistics::FermiDirac, Statistics::Boltzmann] {
            let r = if stats == Statistics::Boltzmann {
                res(0.1, -3.0)
            } else {
                r
            };
            assert_eq!(nbar(Horizon::At(0.0), &r, 0.2, 1.0, &q, stats).unwrap().value, 0.0);
            assert_eq!(ebar(Horizon::At(0.0), &r, 0.2, 1.0, &q, stats).unwrap().value, 0.0);
            assert_eq!(qbar(Horizon::At(0.0), &r, 0.2, 1.0, &q, stats).unwrap().value, 0.0);
            let block = onsager(Horizon::At(0.0), &r, 0.2, 1.0, &q, stats).unwrap();
            assert_eq!(block.as_array(), [0.0; 4]);
        }
    }

    #[test]
    fn nbar_dense_grid_oracle() {
        let r = res(0.1, 0.0);
        let got = nbar(
            Horizon::At(2.0),
            &r,
            0.35,
            1.0,
            &QuadratureSpec::default(),
            Statistics::FermiDirac,
        )
        .unwrap();
        let oracle = trapezoid(|k| fd(-2.0 * k.cos(), &r) * relax_oracle(k, 0.35, 1.0, 2.0), 100_000);
        assert_abs_diff_eq!(got.value, oracle, epsilon = 1e-8);
    }

    #[test]
    fn ebar_dense_grid_oracle() {
        let r = res(0.1, -1.0);
        let got = ebar(
            Horizon::At(2.0),
            &r,
            0.35,
            1.0,
            &QuadratureSpec::default(),
            Statistics::FermiDirac,
        )
        .unwrap();
        let oracle = trapezoid(
            |k| {
                let e = -2.0 * k.cos();
                fd(e, &r) * e * relax_oracle(k, 0.35, 1.0, 2.0)
            },
            100_000,
        );
        assert_abs_diff_eq!(got.value, oracle, epsilon = 1e-8);
    }

    #[test]
    fn damped_limit_is_minus_band_filling() {
        let r = res(0.3, 0.4);
        let q = QuadratureSpec::default();
        let filling = trapezoid(|k| fd(-2.0 * k.cos(), &r), 20_000);
        let eq = nbar(Horizon::Equilibrium, &r, 0.1, 1.0, &q, Statistics::FermiDirac).unwrap();
        assert_abs_diff_eq!(eq.value, -filling, epsilon = 1e-11);
        let late = nbar(Horizon::At(2000.0), &r, 0.1, 1.0, &q, Statistics::FermiDirac).unwrap();
        assert_abs_diff_eq!(late.value, -filling, epsilon = 1e-11);
    }

    #[test]
    fn undamped_equilibrium_rejected() {
        let r = res(0.1, 0.0);
        let q = QuadratureSpec::default();
        assert_eq!(
            nbar(Horizon::Equilibrium, &r, 0.0, 1.0, &q, Statistics::FermiDirac).unwrap_err(),
            Error::UndampedEquilibrium
        );
        assert!(matches!(
            onsager(Horizon::Equilibrium, &r, 0.0, 1.0, &q, Statistics::FermiDirac),
            Err(Error::UndampedEquilibrium)
        ));
        assert!(nbar(Horizon::At(-1.0), &r, 0.1, 1.0, &q, Statistics::FermiDirac).is_err());
        assert!(nbar(Horizon::At(3.0), &r, 0.0, 1.0, &q, Statistics::FermiDirac).is_ok());
    }

    #[test]
    fn qbar_composition() {
        let q = QuadratureSpec::default();
        for mu in [0.0, -0.7, 1.3] {
            let r = res(0.2, mu);
            let n = nbar(Horizon::At(4.0), &r, 0.1, 1.0, &q, Statistics::FermiDirac)
                .unwrap()
                .value;
            let e = ebar(Horizon::At(4.0), &r, 0.1, 1.0, &q, Statistics::FermiDirac)
                .unwrap()
                .value;
            let h = qbar(Horizon::At(4.0), &r, 0.1, 1.0, &q, Statistics::FermiDirac)
                .unwrap()
                .value;
            assert_abs_diff_eq!(h + mu * n, e, epsilon = 1e-12);
            if mu == 0.0 {
                assert_eq!(h, e);
            }
        }
    }

    #[test]
    fn particle_hole_identities() {
        // n(e; -mu) = 1 - n(-e; mu) and k -> pi - k flips e while keeping D.
        let q = tight();
        let h = Horizon::At(3.3);
        for mu in [0.0, 0.6, 1.7] {
            let plus = res(0.15, mu);
            let minus = res(0.15, -mu);
            let stats = Statistics::FermiDirac;
            let mean_d = trapezoid(|k| relax_oracle(k, 0.2, 1.0, 3.3), 20_000);
            let n_p = nbar(h, &plus, 0.2, 1.0, &q, stats).unwrap().value;
            let n_m = nbar(h, &minus, 0.2, 1.0, &q, stats).unwrap().value;
            assert_abs_diff_eq!(n_p + n_m, mean_d, epsilon = 1e-11);
            let e_p = ebar(h, &plus, 0.2, 1.0, &q, stats).unwrap().value;
            let e_m = ebar(h, &minus, 0.2, 1.0, &q, stats).unwrap().value;
            assert_abs_diff_eq!(e_p, e_m, epsilon = 1e-11);
        }
    }

    #[test]
    fn kernel_derivative_matches_finite_difference() {
        let q = tight();
        let h = Horizon::At(3.0);
        let step = 1e-6;
        let nb = |mu: f64| {
            nbar(h, &res(0.1, mu), 0.05, 1.0, &q, Statistics::FermiDirac)
                .unwrap()
                .value
        };
        let fd_mu = (nb(step) - nb(-step)) / (2.0 * step);
        let block = onsager(h, &res(0.1, 0.0), 0.05, 1.0, &q, Statistics::FermiDirac).unwrap();
        assert_relative_eq!(2.0 * block.j_n_mu / 0.1, fd_mu, max_relative = 1e-6);

        // temperature and heat derivatives at a generic point
        let (t0, mu0) = (0.2, 0.45);
        let nt = |t: f64| {
            nbar(h, &res(t, mu0), 0.05, 1.0, &q, Statistics::FermiDirac)
                .unwrap()
                .value
        };
        let et = |t: f64| {
            ebar(h, &res(t, mu0), 0.05, 1.0, &q, Statistics::FermiDirac)
                .unwrap()
                .value
        };
        let em = |mu: f64| {
            ebar(h, &res(t0, mu), 0.05, 1.0, &q, Statistics::FermiDirac)
                .unwrap()
                .value
        };
        let nm = |mu: f64| {
            nbar(h, &res(t0, mu), 0.05, 1.0, &q, Statistics::FermiDirac)
                .unwrap()
                .value
        };
        let s = 1e-5;
        let dn_dt = (nt(t0 + s) - nt(t0 - s)) / (2.0 * s);
        let de_dt = (et(t0 + s) - et(t0 - s)) / (2.0 * s);
        let dq_dmu = (em(mu0 + s) - em(mu0 - s)) / (2.0 * s) - mu0 * (nm(mu0 + s) - nm(mu0 - s)) / (2.0 * s);
        let b = onsager(h, &res(t0, mu0), 0.05, 1.0, &q, Statistics::FermiDirac).unwrap();
        assert_relative_eq!(b.j_n_t, 0.5 * t0 * t0 * dn_dt, max_relative = 1e-6);
        assert_relative_eq!(b.j_q_mu, 0.5 * t0 * dq_dmu, max_relative = 1e-6);
        assert_relative_eq!(b.j_q_t, 0.5 * t0 * t0 * (de_dt - mu0 * dn_dt), max_relative = 1e-6);
    }

    #[test]
    fn boltzmann_kernel_derivative() {
        let q = tight();
        let h = Horizon::At(1.5);
        let nb = |mu: f64| {
            nbar(h, &res(0.1, mu), 0.3, 1.0, &q, Statistics::Boltzmann)
                .unwrap()
                .value
        };
        let s = 1e-6;
        let b = onsager(h, &res(0.1, -3.0), 0.3, 1.0, &q, Statistics::Boltzmann).unwrap();
        assert_relative_eq!(
            2.0 * b.j_n_mu / 0.1,
            (nb(-3.0 + s) - nb(-3.0 - s)) / (2.0 * s),
            max_relative = 1e-6
        );
    }

    #[test]
    fn boltzmann_overflow_rejected() {
        let q = QuadratureSpec::default();
        let r = res(0.001, 1.0);
        assert!(matches!(
            nbar(Horizon::At(1.0), &r, 0.1, 1.0, &q, Statistics::Boltzmann),
            Err(Error::BoltzmannOverflow { .. })
        ));
    }

    #[test]
    fn coefficient_parity() {
        let q = QuadratureSpec::default();
        for h in [Horizon::Equilibrium, Horizon::At(2.5)] {
            for mu in [0.3, 1.1, 1.95, 2.6] {
                let p = onsager(h, &res(0.1, mu), 0.05, 1.0, &q, Statistics::FermiDirac).unwrap();
                let m = onsager(h, &res(0.1, -mu), 0.05, 1.0, &q, Statistics::FermiDirac).unwrap();
                assert_abs_diff_eq!(p.j_n_mu, m.j_n_mu, epsilon = 1e-8);
                assert_abs_diff_eq!(p.j_q_t, m.j_q_t, epsilon = 1e-8);
                assert_abs_diff_eq!(p.j_n_t, -m.j_n_t, epsilon = 1e-8);
                assert_abs_diff_eq!(p.j_q_mu, -m.j_q_mu, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn suppressed_outside_band() {
        let q = QuadratureSpec::default();
        let block = |mu: f64| {
            onsager(
                Horizon::Equilibrium,
                &res(0.1, mu),
                0.05,
                1.0,
                &q,
                Statistics::FermiDirac,
            )
            .unwrap()
        };
        let mut peak = [0.0f64; 4];
        for i in 0..=80 {
            for (p, v) in peak.iter_mut().zip(block(0.05 * i as f64).as_array()) {
                *p = p.max(v.abs());
            }
        }
        for (o, p) in block(4.0).as_array().iter().zip(peak) {
            assert!(o.abs() < 1e-6 * p, "{o:e} vs peak {p:e}");
        }
    }

    #[test]
    fn late_time_independent_of_dephasing() {
        let q = QuadratureSpec::default();
        let r = res(0.1, 0.8);
        let slow = onsager(Horizon::At(1e4), &r, 0.05, 1.0, &q, Statistics::FermiDirac).unwrap();
        let fast = onsager(Horizon::At(1e3), &r, 0.5, 1.0, &q, Statistics::FermiDirac).unwrap();
        for (a, b) in slow.as_array().iter().zip(fast.as_array()) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-6);
        }
    }

    #[test]
    fn narrow_fermi_kernel_resolved() {
        // T = 0.005: n(1-n) is a few 1e-3 wide in k
        let r = res(0.005, 1.0);
        let got = onsager(
            Horizon::At(7.0),
            &r,
            0.05,
            1.0,
            &QuadratureSpec::default(),
            Statistics::FermiDirac,
        )
        .unwrap();
        let oracle = 0.5
            * trapezoid(
                |k| {
                    let x = (-2.0 * k.cos() - 1.0) / 0.005;
                    0.25 / (0.5 * x).cosh().powi(2) * relax_oracle(k, 0.05, 1.0, 7.0)
                },
                400_000,
            );
        assert_relative_eq!(got.j_n_mu, oracle, max_relative = 1e-8);
    }

    #[test]
    fn refining_rule_stays_within_estimate() {
        let r = res(0.1, 0.5);
        let coarse = QuadratureSpec::default().with_nodes(15);
        let fine = QuadratureSpec::default().with_nodes(31);
        for h in [Horizon::At(1.0), Horizon::At(12.0), Horizon::Equilibrium] {
            let a = onsager(h, &r, 0.05, 1.0, &coarse, Statistics::FermiDirac).unwrap();
            let b = onsager(h, &r, 0.05, 1.0, &fine, Statistics::FermiDirac).unwrap();
            for i in 0..4 {
                let diff = (a.as_array()[i] - b.as_array()[i]).abs();
                assert!(
                    diff <= a.errors[i] + b.errors[i] + 1e-15,
                    "{h}: {diff:e} vs {:e}",
                    a.errors[i]
                );
            }
        }
    }

    #[test]
    fn linear_response_matches_two_reservoir_transfer() {
        let q = tight();
        let h = Horizon::At(2.0);
        let (t0, mu0, lambda) = (0.2, 0.4, 0.1);
        let block = onsager(h, &res(t0, mu0), lambda, 1.0, &q, Statistics::FermiDirac).unwrap();
        for (dmu, dt) in [(1e-3, 0.0), (0.0, 1e-3), (1e-3, -5e-4)] {
            let a = res(t0 + 0.5 * dt, mu0 + 0.5 * dmu);
            let b = res(t0 - 0.5 * dt, mu0 - 0.5 * dmu);
            let direct =
                |f: fn(Horizon, &ReservoirParams, f64, f64, &QuadratureSpec, Statistics) -> Result<QuadResult>| {
                    0.5 * (f(h, &a, lambda, 1.0, &q, Statistics::FermiDirac).unwrap().value
                        - f(h, &b, lambda, 1.0, &q, Statistics::FermiDirac).unwrap().value)
                };
            let particles = direct(nbar);
            let heat = direct(ebar) - mu0 * particles;
            let linear = fluxes(&block, dmu, dt);
            // second-order terms cancel in the symmetric split
            assert_relative_eq!(linear.j_particle, particles, max_relative = 1e-5);
            assert_relative_eq!(linear.j_heat, heat, max_relative = 1e-5);
        }
        let zero = fluxes(&block, 0.0, 0.0);
        assert_eq!((zero.j_particle, zero.j_heat), (0.0, 0.0));
        let single = fluxes(&block, 0.01, 0.0);
        assert_eq!(single.j_particle, block.j_n_mu * 0.01 / t0);
    }
}
