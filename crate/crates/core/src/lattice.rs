//! Lattice conventions: units, band dispersion, effective inter-half coupling
//! and the equilibrium occupations of the two reservoirs.
//!
//! Everything inside the library works in units where the hopping amplitude,
//! Boltzmann's constant and the reduced Planck constant are all one. Physical
//! units only appear through [`UnitSystem`] at the reporting boundary.

use std::f64::consts::{LN_10, PI};

use serde::{Deserialize, Serialize};

use crate::error::{check_domain, Error, Result};

/// Boltzmann's constant in eV/K (CODATA 2018, exact).
pub const K_BOLTZMANN_EV_PER_K: f64 = 8.617_333_262e-5;

/// Default cap above which a Boltzmann occupation signals an invalid regime.
pub const DEFAULT_BOLTZMANN_CAP: f64 = 1e300;

/// Unit conventions. Internal computation always uses the natural system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitSystem {
    pub energy_scale_alpha: f64,
    pub k_boltzmann: f64,
    pub hbar: f64,
}

impl UnitSystem {
    pub const NATURAL: UnitSystem = UnitSystem {
        energy_scale_alpha: 1.0,
        k_boltzmann: 1.0,
        hbar: 1.0,
    };

    /// Hopping in eV, temperatures in kelvin.
    pub fn physical(alpha_ev: f64) -> UnitSystem {
        UnitSystem {
            energy_scale_alpha: alpha_ev,
            k_boltzmann: K_BOLTZMANN_EV_PER_K,
            hbar: 1.0,
        }
    }

    /// Thermal energy k_B T in this system's energy unit.
    pub fn thermal_energy(&self, temperature: f64) -> f64 {
        self.k_boltzmann * temperature
    }
}

impl Default for UnitSystem {
    fn default() -> Self {
        Self::NATURAL
    }
}

/// Occupation statistics used for the reservoirs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Statistics {
    #[serde(rename = "fd", alias = "FD", alias = "fermi-dirac")]
    FermiDirac,
    #[serde(rename = "boltzmann", alias = "Boltzmann", alias = "B")]
    Boltzmann,
}

impl std::fmt::Display for Statistics {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Statistics::FermiDirac => f.write_str("fd"),
            Statistics::Boltzmann => f.write_str("boltzmann"),
        }
    }
}

/// Temperature and chemical potential of one reservoir.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReservoirParams {
    pub temperature: f64,
    pub chemical_potential: f64,
}

impl ReservoirParams {
    pub fn new(temperature: f64, chemical_potential: f64) -> Result<Self> {
        let res = ReservoirParams {
            temperature,
            chemical_potential,
        };
        res.validate()?;
        Ok(res)
    }

    pub fn validate(&self) -> Result<()> {
        if self.temperature > 0.0 && self.temperature.is_finite() {
            Ok(())
        } else {
            Err(Error::NonPositiveTemperature(self.temperature))
        }
    }

    pub fn beta(&self) -> f64 {
        1.0 / self.temperature
    }
}

/// Two halves prepared around a common reservoir with small offsets:
/// A sits at (T + dT/2, mu + dmu/2), B at (T - dT/2, mu - dmu/2).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BipartitePreparation {
    pub base: ReservoirParams,
    pub delta_t: f64,
    pub delta_mu: f64,
}

/// Linear-response diagnostics for a [`BipartitePreparation`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearResponseCheck {
    pub relative_delta_t: f64,
    pub relative_delta_mu: f64,
    pub threshold: f64,
}

impl LinearResponseCheck {
    pub fn temperature_ok(&self) -> bool {
        self.relative_delta_t <= self.threshold
    }

    pub fn chemical_potential_ok(&self) -> bool {
        self.relative_delta_mu <= self.threshold
    }

    pub fn valid(&self) -> bool {
        self.temperature_ok() && self.chemical_potential_ok()
    }
}

impl BipartitePreparation {
    pub const DEFAULT_LINEAR_THRESHOLD: f64 = 0.05;

    pub fn new(base: ReservoirParams, delta_t: f64, delta_mu: f64) -> Result<Self> {
        let prep = BipartitePreparation {
            base,
            delta_t,
            delta_mu,
        };
        let (a, b) = prep.halves();
        a.validate()?;
        b.validate()?;
        Ok(prep)
    }

    /// Reservoirs of half A and half B.
    pub fn halves(&self) -> (ReservoirParams, ReservoirParams) {
        let a = ReservoirParams {
            temperature: self.base.temperature + 0.5 * self.delta_t,
            chemical_potential: self.base.chemical_potential + 0.5 * self.delta_mu,
        };
        let b = ReservoirParams {
            temperature: self.base.temperature - 0.5 * self.delta_t,
            chemical_potential: self.base.chemical_potential - 0.5 * self.delta_mu,
        };
        (a, b)
    }

    /// |dT/T| and |dmu/mu| against `threshold`. A nonzero dmu around mu = 0
    /// is reported as an infinite relative offset.
    pub fn linear_response(&self, threshold: f64) -> LinearResponseCheck {
        let relative_delta_t = (self.delta_t / self.base.temperature).abs();
        let relative_delta_mu = if self.delta_mu == 0.0 {
            0.0
        } else {
            (self.delta_mu / self.base.chemical_potential).abs()
        };
        LinearResponseCheck {
            relative_delta_t,
            relative_delta_mu,
            threshold,
        }
    }
}

/// One momentum sector of the coupled chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeSpec {
    pub momentum: f64,
    pub energy: f64,
    pub coupling: f64,
    pub dephasing: f64,
    pub bare_coupling: f64,
}

impl ModeSpec {
    /// Mode at momentum `k` with bare coupling `g` and dephasing rate `lambda`.
    pub fn new(momentum: f64, bare_coupling: f64, dephasing: f64) -> Result<Self> {
        check_domain("lambda", dephasing, ">= 0", dephasing >= 0.0)?;
        Ok(ModeSpec {
            momentum,
            energy: dispersion(momentum)?,
            coupling: effective_coupling(momentum, bare_coupling)?,
            dephasing,
            bare_coupling,
        })
    }

    /// Mode at momentum `k` whose effective coupling g_k is given directly.
    ///
    /// The single-mode figures are parameterised by g_k rather than the bare
    /// chain coupling, so `bare_coupling` simply mirrors `coupling` here.
    pub fn with_coupling(momentum: f64, coupling: f64, dephasing: f64) -> Result<Self> {
        check_domain("lambda", dephasing, ">= 0", dephasing >= 0.0)?;
        Ok(ModeSpec {
            momentum,
            energy: dispersion(momentum)?,
            coupling,
            dephasing,
            bare_coupling: coupling,
        })
    }
}

fn check_momentum(k: f64) -> Result<()> {
    if (0.0..=PI).contains(&k) {
        Ok(())
    } else {
        Err(Error::MomentumOutOfRange(k))
    }
}

/// Band energy -2 cos(k) of either half.
pub fn dispersion(k: f64) -> Result<f64> {
    check_momentum(k)?;
    Ok(-2.0 * k.cos())
}

/// Continuum-limit coupling g_k = g sin^2(k).
///
/// On the finite chain g_k = g sin(Nk) sin(k) with g = -2 g0 / (N + 1), and at
/// the allowed momenta k = j pi / (N + 1) one has sin(Nk) = +-sin(k). Only even
/// functions of g_k enter observables, so the magnitude is all that matters.
pub fn effective_coupling(k: f64, g: f64) -> Result<f64> {
    check_momentum(k)?;
    let s = k.sin();
    Ok(g * s * s)
}

/// Fermi-Dirac occupation 1 / (e^{(e - mu)/T} + 1).
pub fn occupation_fd(energy: f64, res: &ReservoirParams) -> Result<f64> {
    res.validate()?;
    Ok(fermi((energy - res.chemical_potential) / res.temperature))
}

/// Hole occupation 1 - n_FD, evaluated without cancellation.
pub fn hole_fd(energy: f64, res: &ReservoirParams) -> Result<f64> {
    res.validate()?;
    Ok(fermi(-(energy - res.chemical_potential) / res.temperature))
}

/// Logistic 1 / (e^x + 1), never exponentiating a large positive argument.
#[inline]
pub(crate) fn fermi(x: f64) -> f64 {
    if x > 0.0 {
        let e = (-x).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + x.exp())
    }
}

/// n (1 - n) for the logistic occupation at reduced energy x.
#[inline]
pub(crate) fn fermi_variance(x: f64) -> f64 {
    let c = (0.5 * x).cosh();
    0.25 / (c * c)
}

/// Boltzmann occupation e^{-(e - mu)/T}, capped at [`DEFAULT_BOLTZMANN_CAP`].
pub fn occupation_boltzmann(energy: f64, res: &ReservoirParams) -> Result<f64> {
    occupation_boltzmann_capped(energy, res, DEFAULT_BOLTZMANN_CAP)
}

pub fn occupation_boltzmann_capped(energy: f64, res: &ReservoirParams, cap: f64) -> Result<f64> {
    res.validate()?;
    let value = (-(energy - res.chemical_potential) / res.temperature).exp();
    if value > cap || !value.is_finite() {
        return Err(Error::BoltzmannOverflow { value, cap });
    }
    Ok(value)
}

/// Occupation under the requested statistics.
pub fn occupation(energy: f64, res: &ReservoirParams, stats: Statistics) -> Result<f64> {
    match stats {
        Statistics::FermiDirac => occupation_fd(energy, res),
        Statistics::Boltzmann => occupation_boltzmann(energy, res),
    }
}

/// Outcome of the Boltzmann-regime test at precision 10^-m.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoltzmannBound {
    /// Largest chemical potential for which |n_FD - n_B| < 10^-m at the band bottom.
    pub mu_bound: f64,
    pub satisfied: bool,
    /// m T ln(10) / 2, in internal energy units.
    pub gap: f64,
}

/// Boltzmann validity at precision 10^-m: mu < -m T ln(10)/2 - 2.
pub fn boltzmann_validity(m: f64, res: &ReservoirParams) -> Result<BoltzmannBound> {
    check_domain("m", m, "> 0", m > 0.0)?;
    res.validate()?;
    let gap = 0.5 * m * res.temperature * LN_10;
    let mu_bound = -gap - 2.0;
    Ok(BoltzmannBound {
        mu_bound,
        satisfied: res.chemical_potential < mu_bound,
        gap,
    })
}

/// E_gap = m k_B T ln(10) / 2 in the energy unit of `units` for a temperature
/// given in that system's temperature unit.
pub fn energy_gap(m: f64, temperature: f64, units: &UnitSystem) -> f64 {
    0.5 * m * units.thermal_energy(temperature) * LN_10
}
