//! Particle exchange between the halves and the exchange fluctuation theorem.
//!
//! A particle found in `A` at preparation ends up in `B` with weight
//! `n_A (1 - n_B) (1 - e^{-lambda t} cos(2 g_k t))`. The time and dephasing
//! factor is shared by both directions, so the log ratio of the two weights
//! depends on the reservoirs only.

use serde::{Deserialize, Serialize};

use crate::dynamics::{SITE_A, SITE_B};
use crate::error::{Error, Result};
use crate::lattice::{ModeSpec, ReservoirParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    #[serde(rename = "a_to_b")]
    AToB,
    #[serde(rename = "b_to_a")]
    BToA,
}

impl Direction {
    pub fn reverse(self) -> Direction {
        match self {
            Direction::AToB => Direction::BToA,
            Direction::BToA => Direction::AToB,
        }
    }

    /// Change in the particle number of `A`.
    pub fn delta_n_a(self) -> i8 {
        match self {
            Direction::AToB => -1,
            Direction::BToA => 1,
        }
    }
}

/// Thermodynamic forces between the reservoirs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Affinities {
    /// `beta_B - beta_A`
    pub f_h: f64,
    /// `beta_A mu_A - beta_B mu_B`
    pub f_m: f64,
}

pub fn affinities(res_a: &ReservoirParams, res_b: &ReservoirParams) -> Result<Affinities> {
    res_a.validate()?;
    res_b.validate()?;
    Ok(Affinities {
        f_h: res_b.beta() - res_a.beta(),
        f_m: res_a.beta() * res_a.chemical_potential - res_b.beta() * res_b.chemical_potential,
    })
}

/// One particle crossing in one mode, seen from half `A`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExchangeEvent {
    pub momentum: f64,
    pub energy: f64,
    pub delta_n_a: i8,
}

impl ExchangeEvent {
    pub fn new(mode: &ModeSpec, direction: Direction) -> Self {
        ExchangeEvent {
            momentum: mode.momentum,
            energy: mode.energy,
            delta_n_a: direction.delta_n_a(),
        }
    }

    pub fn direction(&self) -> Direction {
        if self.delta_n_a < 0 {
            Direction::AToB
        } else {
            Direction::BToA
        }
    }

    pub fn delta_n_b(&self) -> i8 {
        -self.delta_n_a
    }

    pub fn delta_e_a(&self) -> f64 {
        f64::from(self.delta_n_a) * self.energy
    }

    pub fn delta_e_b(&self) -> f64 {
        -self.delta_e_a()
    }
}

/// Which sign the right-hand side of the theorem carries.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FtConvention {
    /// `ln[P_{A->B} / P_{B->A}] = e_k F_H + F_M`, what the weights actually give.
    #[default]
    Algebraic,
    /// `ln[P_{A->B} / P_{B->A}] = dE_A F_H + dN_A F_M` with `dE_A = -e_k`, `dN_A = -1`.
    Printed,
}

impl FtConvention {
    fn rhs(self, event: &ExchangeEvent, aff: &Affinities) -> f64 {
        let printed = event.delta_e_a() * aff.f_h + f64::from(event.delta_n_a) * aff.f_m;
        match self {
            FtConvention::Algebraic => -printed,
            FtConvention::Printed => printed,
        }
    }
}

/// `1 - e^{-lambda t} cos(2 g_k t)`, in `[0, 2]`.
pub fn transfer_factor(mode: &ModeSpec, t: f64) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    1.0 - (-mode.dephasing * t).exp() * (2.0 * mode.coupling * t).cos()
}

/// Exchange weight; above 1 only when the transfer factor exceeds 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExchangeWeight {
    pub value: f64,
    pub transfer_factor: f64,
    /// False when the factor exceeds 1 and `value` is a transition weight
    /// rather than a bounded probability.
    pub is_probability: bool,
}

/// `ln(1 / (e^x + 1))`.
fn ln_fermi(x: f64) -> f64 {
    if x > 0.0 {
        -x - (-x).exp().ln_1p()
    } else {
        -x.exp().ln_1p()
    }
}

/// `(ln n, ln(1 - n))` for the Fermi-Dirac occupation of `energy`.
fn ln_occupations(energy: f64, res: &ReservoirParams) -> Result<(f64, f64)> {
    res.validate()?;
    let x = (energy - res.chemical_potential) / res.temperature;
    Ok((ln_fermi(x), ln_fermi(-x)))
}

fn check_time(t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain {
            name: "t",
            value: t,
            domain: ">= 0",
        })
    }
}

/// Log of the source occupation times the destination hole occupation.
fn ln_occupation_factor(
    direction: Direction,
    mode: &ModeSpec,
    res_a: &ReservoirParams,
    res_b: &ReservoirParams,
) -> Result<f64> {
    let (ln_na, ln_ha) = ln_occupations(mode.energy, res_a)?;
    let (ln_nb, ln_hb) = ln_occupations(mode.energy, res_b)?;
    Ok(match direction {
        Direction::AToB => ln_na + ln_hb,
        Direction::BToA => ln_nb + ln_ha,
    })
}

pub fn exchange_prob(
    direction: Direction,
    mode: &ModeSpec,
    res_a: &ReservoirParams,
    res_b: &ReservoirParams,
    t: f64,
) -> Result<ExchangeWeight> {
    check_time(t)?;
    let factor = transfer_factor(mode, t);
    let occ = ln_occupation_factor(direction, mode, res_a, res_b)?.exp();
    Ok(ExchangeWeight {
        value: occ * factor,
        transfer_factor: factor,
        is_probability: factor <= 1.0,
    })
}

/// Both sides of the single-mode theorem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FtCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
}

fn ln_weight(
    direction: Direction,
    mode: &ModeSpec,
    res_a: &ReservoirParams,
    res_b: &ReservoirParams,
    ln_factor: f64,
) -> Result<f64> {
    let ln_occ = ln_occupation_factor(direction, mode, res_a, res_b)?;
    if ln_occ == f64::NEG_INFINITY {
        return Err(Error::ZeroProbability(match direction {
            Direction::AToB => "A->B occupation factor underflows",
            Direction::BToA => "B->A occupation factor underflows",
        }));
    }
    Ok(ln_occ + ln_factor)
}

fn ln_transfer_factor(mode: &ModeSpec, t: f64) -> Result<f64> {
    check_time(t)?;
    let factor = transfer_factor(mode, t);
    if factor <= 0.0 {
        return Err(Error::ZeroProbability("no exchange at this time"));
    }
    Ok(factor.ln())
}

fn event_check(
    event: &ExchangeEvent,
    mode: &ModeSpec,
    res_a: &ReservoirParams,
    res_b: &ReservoirParams,
    ln_factor: f64,
    aff: &Affinities,
    convention: FtConvention,
) -> Result<(f64, f64)> {
    let forward = event.direction();
    let lhs = ln_weight(forward, mode, res_a, res_b, ln_factor)?
        - ln_weight(forward.reverse(), mode, res_a, res_b, ln_factor)?;
    Ok((lhs, convention.rhs(event, aff)))
}

/// `ln[P_{A->B} / P_{B->A}]` against the affinity side.
pub fn ft_log_ratio(
    mode: &ModeSpec,
    res_a: &ReservoirParams,
    res_b: &ReservoirParams,
    t: f64,
    convention: FtConvention,
) -> Result<FtCheck> {
    let ln_factor = ln_transfer_factor(mode, t)?;
    let aff = affinities(res_a, res_b)?;
    let event = ExchangeEvent::new(mode, Direction::AToB);
    let (lhs, rhs) = event_check(&event, mode, res_a, res_b, ln_factor, &aff, convention)?;
    Ok(FtCheck {
        lhs,
        rhs,
        residual: lhs - rhs,
    })
}

/// Composite event: one exchange per listed mode, in the given direction.
pub fn multi_mode_ft(
    modes: &[(ModeSpec, Direction)],
    res_a: &ReservoirParams,
    res_b: &ReservoirParams,
    t: f64,
    convention: FtConvention,
) -> Result<FtCheck> {
    check_time(t)?;
    let aff = affinities(res_a, res_b)?;
    let (mut lhs, mut rhs) = (0.0, 0.0);
    for (mode, direction) in modes {
        let ln_factor = ln_transfer_factor(mode, t)?;
        let event = ExchangeEvent::new(mode, *direction);
        let (l, r) = event_check(&event, mode, res_a, res_b, ln_factor, &aff, convention)?;
        lhs += l;
        rhs += r;
    }
    Ok(FtCheck {
        lhs,
        rhs,
        residual: lhs - rhs,
    })
}

/// Outcomes of the singly occupied sector after time `t`, as probabilities.
///
/// The exchange weights above are twice the transfer probabilities listed
/// here; a particle starting in one half crosses with probability
/// `(1 - e^{-lambda t} cos(2 g_k t)) / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SectorWeights {
    pub stay_a: f64,
    pub a_to_b: f64,
    pub stay_b: f64,
    pub b_to_a: f64,
}

impl SectorWeights {
    pub fn total(&self) -> f64 {
        self.stay_a + self.a_to_b + self.stay_b + self.b_to_a
    }

    /// Population of `a+|0>` at time `t`.
    pub fn site_a(&self) -> f64 {
        self.stay_a + self.b_to_a
    }

    /// Population of `b+|0>` at time `t`.
    pub fn site_b(&self) -> f64 {
        self.stay_b + self.a_to_b
    }

    /// Index pair of the density-matrix diagonal each population maps to.
    pub const SITES: [usize; 2] = [SITE_A, SITE_B];
}

pub fn sector_weights(
    mode: &ModeSpec,
    res_a: &ReservoirParams,
    res_b: &ReservoirParams,
    t: f64,
) -> Result<SectorWeights> {
    check_time(t)?;
    let cross = 0.5 * transfer_factor(mode, t);
    let from_a = ln_occupation_factor(Direction::AToB, mode, res_a, res_b)?.exp();
    let from_b = ln_occupation_factor(Direction::BToA, mode, res_a, res_b)?.exp();
    Ok(SectorWeights {
        stay_a: from_a * (1.0 - cross),
        a_to_b: from_a * cross,
        stay_b: from_b * (1.0 - cross),
        b_to_a: from_b * cross,
    })
}
