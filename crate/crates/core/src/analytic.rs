//! Closed forms for the band functionals.
//!
//! `omega(nu, x, y)` is the integral `(1/pi) int_0^pi cos^nu(z) e^{y cos z} cos(x sin^2 z) dz`,
//! expanded as a double series over Beta functions. With Boltzmann reservoirs
//! it gives the mean particle and energy changes exactly; with Fermi-Dirac
//! reservoirs a Jacobi-Anger expansion of the relaxation factor and a
//! Sommerfeld expansion of the occupation give low-temperature series.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{check_domain, Error, Result};
use crate::lattice::ReservoirParams;
use crate::quadrature::{integrate_panels, QuadratureSpec};
use crate::special::{bessel_i, bessel_j_tail_bound, SeriesResult, SpecialFnTable, MAX_VALIDATED_ARGUMENT};
use crate::transport::Horizon;

/// Past this the double series is not attempted.
const OMEGA_SERIES_LIMIT: f64 = 40.0;
const OMEGA_TERM_BUDGET: usize = 500;

/// Default truncation tolerance of the Bessel series.
pub const SOMMERFELD_TOL: f64 = 1e-13;
pub const DEFAULT_SOMMERFELD_TERMS: usize = 200;

/// `prod_{j=1}^{q} (2j - 1)/(2j) = B(1/2, q + 1/2) / pi`.
fn half_beta_ratio(q: usize) -> f64 {
    (1..=q).map(|j| (2 * j - 1) as f64 / (2 * j) as f64).product()
}

/// `omega_nu(x, y)` to absolute tolerance `tol`.
///
/// The reported `trunc_error_est` also covers rounding. When the series would
/// lose more than `tol` to cancellation the defining integral is used instead.
pub fn omega(nu: usize, x: f64, y: f64, tol: f64) -> Result<SeriesResult> {
    check_domain("tol", tol, "> 0", tol > 0.0)?;
    check_domain("x", x, "finite", x.is_finite())?;
    check_domain("y", y, "finite", y.is_finite())?;
    if x.abs() <= OMEGA_SERIES_LIMIT && y.abs() <= OMEGA_SERIES_LIMIT {
        let series = omega_series(nu, x, y, tol)?;
        if series.converged {
            return Ok(series);
        }
        let integral = omega_integral(nu, x, y, tol)?;
        return Ok(if integral.trunc_error_est < series.trunc_error_est {
            integral
        } else {
            series
        });
    }
    omega_integral(nu, x, y, tol)
}

fn omega_series(nu: usize, x: f64, y: f64, tol: f64) -> Result<SeriesResult> {
    let parity = nu % 2;
    // B(a, b) with a = 2n + 1/2 and b = p + m, p = (nu + parity + 1)/2
    let p = 0.5 * (nu + parity) as f64 + 0.5;
    let mut beta_n0 = PI * half_beta_ratio((nu + parity) / 2);
    let x2 = x * x;
    let y2 = y * y;
    let b0 = if parity == 1 { y } else { 1.0 };

    let mut value = 0.0;
    let mut abs_sum = 0.0;
    let mut inner_tails = 0.0;
    let mut a_n = 1.0;
    let mut prev_small = false;
    let mut prev_inner = f64::INFINITY;
    for n in 0..OMEGA_TERM_BUDGET {
        let a = 2.0 * n as f64 + 0.5;
        // inner sum over m is free of cancellation
        let mut b_m = b0;
        let mut beta = beta_n0;
        let mut inner = 0.0;
        let mut inner_tail = 0.0;
        for m in 0..OMEGA_TERM_BUDGET {
            let term = b_m * beta;
            inner += term;
            let d = (2 * m + parity) as f64;
            let ratio = y2 / ((d + 1.0) * (d + 2.0));
            if ratio < 0.5 {
                let tail = term.abs() * ratio / (1.0 - ratio);
                if tail <= 1e-17 * inner.abs() || term == 0.0 {
                    inner_tail = tail;
                    break;
                }
            }
            if m + 1 == OMEGA_TERM_BUDGET {
                return Err(Error::SeriesBudget {
                    terms: OMEGA_TERM_BUDGET,
                    bound: f64::INFINITY,
                });
            }
            let b = p + m as f64;
            beta *= b / (a + b);
            b_m *= y2 / ((d + 1.0) * (d + 2.0));
        }
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        let term = sign * a_n * inner / PI;
        value += term;
        abs_sum += term.abs();
        inner_tails += a_n * inner_tail / PI;
        // |inner| is non-increasing in n, so the outer tail is bounded by
        // |inner_n| times the remaining x^{2j}/(2j)! sum
        let rho = x2 / ((2.0 * n as f64 + 3.0) * (2.0 * n as f64 + 4.0));
        let next_a = a_n * x2 / ((2.0 * n as f64 + 1.0) * (2.0 * n as f64 + 2.0));
        let outer_tail = if rho < 1.0 {
            inner.abs().min(prev_inner) * next_a / (1.0 - rho) / PI
        } else {
            f64::INFINITY
        };
        prev_inner = inner.abs();
        let small = term.abs() < 0.1 * tol;
        if (small && prev_small && outer_tail <= tol) || x == 0.0 || next_a == 0.0 {
            let rounding = 8.0 * f64::EPSILON * abs_sum;
            let error = outer_tail + inner_tails + rounding;
            return Ok(SeriesResult {
                value,
                trunc_error_est: error,
                terms_used: n + 1,
                converged: error <= tol,
            });
        }
        prev_small = small;
        a_n = next_a;
        beta_n0 *= a * (a + 1.0) / ((a + p) * (a + p + 1.0));
    }
    Err(Error::SeriesBudget {
        terms: OMEGA_TERM_BUDGET,
        bound: f64::INFINITY,
    })
}

/// Gauss-Kronrod evaluation of the defining integral.
fn omega_integral(nu: usize, x: f64, y: f64, tol: f64) -> Result<SeriesResult> {
    // |integrand| <= e^{y cos z}, whose mean over the band is I_0(|y|)
    let scale = if y.abs() <= MAX_VALIDATED_ARGUMENT {
        bessel_i(0, y.abs())?
    } else {
        y.abs().exp()
    };
    let rounding = 64.0 * f64::EPSILON * scale;
    let quad = QuadratureSpec {
        abs_tol: tol.max(0.25 * rounding) * PI,
        rel_tol: 1e-15,
        ..QuadratureSpec::default()
    };
    let f = |z: f64| {
        let c = z.cos();
        let s = z.sin();
        c.powi(nu as i32) * (y * c).exp() * (x * s * s).cos()
    };
    let panels = quad.panels_for(x, 0.5);
    let r = integrate_panels(f, 0.0, PI, panels, &quad)?;
    let error = r.error / PI + rounding;
    Ok(SeriesResult {
        value: r.value / PI,
        trunc_error_est: error,
        terms_used: r.panels,
        converged: error <= tol,
    })
}

fn boltzmann_inputs(horizon: Horizon, res: &ReservoirParams, dephasing: f64, g: f64) -> Result<(f64, f64, f64, f64)> {
    res.validate()?;
    check_domain("g", g, "finite", g.is_finite())?;
    let envelope = horizon.envelope(dephasing)?;
    let beta = res.beta();
    let y = 2.0 * beta;
    if y > MAX_VALIDATED_ARGUMENT {
        return Err(Error::SpecialRange(format!(
            "2 beta = {y} (temperature {} too low)",
            res.temperature
        )));
    }
    let x = match horizon {
        Horizon::At(t) => 2.0 * g * t,
        Horizon::Equilibrium => 0.0,
    };
    Ok((envelope, (beta * res.chemical_potential).exp(), x, y))
}

/// Boltzmann-statistics mean particle change `e^{beta mu}(e^{-lambda t} omega_0(2gt, 2beta) - I_0(2beta))`.
pub fn nbar_boltzmann_closed(horizon: Horizon, res: &ReservoirParams, dephasing: f64, g: f64) -> Result<f64> {
    let (envelope, fugacity, x, y) = boltzmann_inputs(horizon, res, dephasing, g)?;
    let i0 = bessel_i(0, y)?;
    let oscillating = if envelope > 0.0 {
        let tol = (1e-13 / fugacity).max(1e-15 * i0);
        envelope * omega(0, x, y, tol)?.value
    } else {
        0.0
    };
    Ok(fugacity * (oscillating - i0))
}

/// Boltzmann-statistics mean energy change `-2 e^{beta mu}(e^{-lambda t} omega_1(2gt, 2beta) - I_1(2beta))`.
pub fn ebar_boltzmann_closed(horizon: Horizon, res: &ReservoirParams, dephasing: f64, g: f64) -> Result<f64> {
    let (envelope, fugacity, x, y) = boltzmann_inputs(horizon, res, dephasing, g)?;
    let i1 = bessel_i(1, y)?;
    let oscillating = if envelope > 0.0 {
        let tol = (1e-13 / fugacity).max(1e-15 * bessel_i(0, y)?);
        envelope * omega(1, x, y, tol)?.value
    } else {
        0.0
    };
    Ok(-2.0 * fugacity * (oscillating - i1))
}

/// Which low-temperature Fermi-Dirac series to evaluate.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SommerfeldForm {
    /// Jacobi-Anger expansion worked out term by term; reduces to the band
    /// integral as T -> 0.
    #[default]
    Rederived,
    /// Chebyshev-V coefficients, `1/(2 pi)` normalisation and `pi T^2 / 12`
    /// energy correction, kept for comparison. It does not vanish at t = 0 for
    /// the energy and is off by a factor two in its particle term.
    AsPrinted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Moment {
    Particles,
    Energy,
}

struct SommerfeldInputs {
    envelope: f64,
    time: f64,
    g: f64,
    mu: f64,
    temperature: f64,
}

impl SommerfeldInputs {
    fn new(horizon: Horizon, res: &ReservoirParams, dephasing: f64, g: f64) -> Result<Self> {
        res.validate()?;
        let mu = res.chemical_potential;
        check_domain("mu", mu, "|mu| < 2", mu.abs() < 2.0)?;
        check_domain("g", g, "finite", g.is_finite())?;
        let envelope = horizon.envelope(dephasing)?;
        let time = match horizon {
            Horizon::At(t) => t,
            Horizon::Equilibrium => 0.0,
        };
        Ok(SommerfeldInputs {
            envelope,
            time,
            g,
            mu,
            temperature: res.temperature,
        })
    }

    /// `phi(e) = 2 g t (1 - e^2/4)` and the relaxation factor `D = env cos(phi) - 1`,
    /// with `D'(e) = env sin(phi) g t e`.
    fn relaxation(&self, e: f64) -> (f64, f64, f64) {
        let gt = self.g * self.time;
        let phi = 2.0 * gt * (1.0 - 0.25 * e * e);
        let d = self.envelope * phi.cos() - 1.0;
        let dd = self.envelope * phi.sin() * gt * e;
        (phi, d, dd)
    }

    /// d/de [D / s] with s = sqrt(4 - e^2).
    fn particle_correction(&self) -> f64 {
        let e = self.mu;
        let s = (4.0 - e * e).sqrt();
        let (_, d, dd) = self.relaxation(e);
        dd / s + d * e / (s * s * s)
    }

    /// d/de [e D / s].
    fn energy_correction(&self) -> f64 {
        let e = self.mu;
        let s = (4.0 - e * e).sqrt();
        let (_, d, dd) = self.relaxation(e);
        d / s + e * dd / s + e * e * d / (s * s * s)
    }

    /// d/de [(env e cos(phi) - 1) / s], the printed energy bracket.
    fn printed_energy_correction(&self) -> f64 {
        let e = self.mu;
        let s = (4.0 - e * e).sqrt();
        let (phi, _, _) = self.relaxation(e);
        let gt = self.g * self.time;
        let num = self.envelope * e * phi.cos() - 1.0;
        let dnum = self.envelope * (phi.cos() + e * e * gt * phi.sin());
        dnum / s + num * e / (s * s * s)
    }
}

/// Partial sums `c0 + sum_{n=1}^{N} (-1)^n term(n)` of a Bessel series whose
/// n-th term is bounded by `coeff_bound (|J_{2n}| + |J_{2n-1}|)`.
fn bessel_series<F>(gt: f64, c0: f64, coeff_bound: f64, n_max: usize, tol: f64, term: F) -> Result<SeriesResult>
where
    F: Fn(usize) -> f64,
{
    let mut sum = c0;
    let mut prev_small = false;
    let mut prev_bound = f64::INFINITY;
    for n in 1..=n_max {
        let t = if n % 2 == 0 { term(n) } else { -term(n) };
        sum += t;
        // partial sums must stay inside the previous bracket
        if t.abs() > prev_bound * (1.0 + 1e-12) + 1e-300 {
            return Err(Error::SeriesBudget {
                terms: n,
                bound: prev_bound,
            });
        }
        let bound = coeff_bound * bessel_j_tail_bound(gt, 2 * n + 1);
        let small = t.abs() < 0.1 * tol;
        if small && prev_small && bound <= tol {
            return Ok(SeriesResult {
                value: sum,
                trunc_error_est: bound,
                terms_used: n + 1,
                converged: true,
            });
        }
        prev_small = small;
        prev_bound = bound;
    }
    Err(Error::SeriesBudget {
        terms: n_max,
        bound: prev_bound,
    })
}

fn sommerfeld(
    form: SommerfeldForm,
    moment: Moment,
    horizon: Horizon,
    res: &ReservoirParams,
    dephasing: f64,
    g: f64,
    n_max: usize,
) -> Result<SeriesResult> {
    let inp = SommerfeldInputs::new(horizon, res, dephasing, g)?;
    let gt = g * inp.time;
    let k_f = (-0.5 * inp.mu).acos();
    let t2 = inp.temperature * inp.temperature;

    let series = if inp.envelope > 0.0 {
        if gt.abs() > MAX_VALIDATED_ARGUMENT {
            return Err(Error::SpecialRange(format!("Bessel argument g t = {gt}")));
        }
        let table = SpecialFnTable::new(gt, -0.5 * inp.mu, 2 * n_max, 4 * n_max + 1)?;
        let (c, s) = (gt.cos(), gt.sin());
        let sin_m = |m: usize| (m as f64 * k_f).sin() / m as f64;
        let cheb = |m: usize| table.v(m) / m as f64;
        match (form, moment) {
            (SommerfeldForm::Rederived, Moment::Particles) => {
                bessel_series(gt, c * table.j(0) * k_f, 1.0, n_max, SOMMERFELD_TOL, |n| {
                    let (even, odd) = ((2 * n) as f64, (2 * n - 1) as f64);
                    c * table.j(2 * n) * (2.0 * even * k_f).sin() / even
                        - s * table.j(2 * n - 1) * (2.0 * odd * k_f).sin() / odd
                })?
            }
            (SommerfeldForm::Rederived, Moment::Energy) => {
                bessel_series(gt, c * table.j(0) * k_f.sin(), 2.0, n_max, SOMMERFELD_TOL, |n| {
                    c * table.j(2 * n) * (sin_m(4 * n + 1) + sin_m(4 * n - 1))
                        - s * table.j(2 * n - 1) * (sin_m(4 * n - 1) + sin_m(4 * n - 3))
                })?
            }
            // |V_m(x)| <= 2m + 1 bounds the printed coefficients by 5
            (SommerfeldForm::AsPrinted, Moment::Particles) => {
                bessel_series(gt, table.j(0) * k_f, 5.0, n_max, SOMMERFELD_TOL, |n| {
                    c * table.j(2 * n) * table.v(4 * n) / (2 * n) as f64
                        - s * table.j(2 * n - 1) * table.v(4 * n - 2) / (2 * n - 1) as f64
                })?
            }
            (SommerfeldForm::AsPrinted, Moment::Energy) => bessel_series(
                gt,
                table.j(0) * (1.0 - 0.25 * inp.mu * inp.mu).sqrt(),
                5.0,
                n_max,
                SOMMERFELD_TOL,
                |n| {
                    c * table.j(2 * n) * (cheb(4 * n + 1) + cheb(4 * n - 1))
                        + s * table.j(2 * n - 1) * (cheb(4 * n - 1) + cheb(4 * n - 3))
                },
            )?,
        }
    } else {
        SeriesResult {
            value: 0.0,
            trunc_error_est: 0.0,
            terms_used: 0,
            converged: true,
        }
    };

    let env = inp.envelope;
    let (value, scale) = match (form, moment) {
        (SommerfeldForm::Rederived, Moment::Particles) => (
            (env * series.value - k_f) / PI + PI * t2 / 6.0 * inp.particle_correction(),
            env / PI,
        ),
        (SommerfeldForm::Rederived, Moment::Energy) => (
            (-2.0 * env * series.value + 2.0 * k_f.sin()) / PI + PI * t2 / 6.0 * inp.energy_correction(),
            2.0 * env / PI,
        ),
        (SommerfeldForm::AsPrinted, Moment::Particles) => (
            (env * series.value - k_f + PI * PI * t2 / 6.0 * inp.particle_correction()) / (2.0 * PI),
            env / (2.0 * PI),
        ),
        (SommerfeldForm::AsPrinted, Moment::Energy) => (
            env * series.value / PI
                + (4.0 - inp.mu * inp.mu).sqrt() / (2.0 * PI)
                + PI * t2 / 12.0 * inp.printed_energy_correction(),
            env / PI,
        ),
    };
    Ok(SeriesResult {
        value,
        trunc_error_est: scale * series.trunc_error_est,
        terms_used: series.terms_used,
        converged: series.converged,
    })
}

/// Low-temperature Fermi-Dirac mean particle change (default series).
pub fn nbar_fd_sommerfeld(
    horizon: Horizon,
    res: &ReservoirParams,
    dephasing: f64,
    g: f64,
    n_max: usize,
) -> Result<SeriesResult> {
    sommerfeld(
        SommerfeldForm::Rederived,
        Moment::Particles,
        horizon,
        res,
        dephasing,
        g,
        n_max,
    )
}

/// Low-temperature Fermi-Dirac mean energy change (default series).
pub fn ebar_fd_sommerfeld(
    horizon: Horizon,
    res: &ReservoirParams,
    dephasing: f64,
    g: f64,
    n_max: usize,
) -> Result<SeriesResult> {
    sommerfeld(
        SommerfeldForm::Rederived,
        Moment::Energy,
        horizon,
        res,
        dephasing,
        g,
        n_max,
    )
}

pub fn nbar_fd_sommerfeld_with(
    form: SommerfeldForm,
    horizon: Horizon,
    res: &ReservoirParams,
    dephasing: f64,
    g: f64,
    n_max: usize,
) -> Result<SeriesResult> {
    sommerfeld(form, Moment::Particles, horizon, res, dephasing, g, n_max)
}

pub fn ebar_fd_sommerfeld_with(
    form: SommerfeldForm,
    horizon: Horizon,
    res: &ReservoirParams,
    dephasing: f64,
    g: f64,
    n_max: usize,
) -> Result<SeriesResult> {
    sommerfeld(form, Moment::Energy, horizon, res, dephasing, g, n_max)
}

/// Onsager coefficients of the Sommerfeld series, by central differences in
/// mu and T (steps `h_mu` and `h_t`).
pub fn onsager_sommerfeld(
    form: SommerfeldForm,
    horizon: Horizon,
    res: &ReservoirParams,
    dephasing: f64,
    g: f64,
    n_max: usize,
) -> Result<[f64; 4]> {
    let (temp, mu) = (res.temperature, res.chemical_potential);
    let h_mu = 1e-4;
    let h_t = 1e-4 * temp;
    let eval = |t: f64, m: f64| -> Result<(f64, f64)> {
        let r = ReservoirParams::new(t, m)?;
        Ok((
            nbar_fd_sommerfeld_with(form, horizon, &r, dephasing, g, n_max)?.value,
            ebar_fd_sommerfeld_with(form, horizon, &r, dephasing, g, n_max)?.value,
        ))
    };
    let (n_mp, e_mp) = eval(temp, mu + h_mu)?;
    let (n_mm, e_mm) = eval(temp, mu - h_mu)?;
    let (n_tp, e_tp) = eval(temp + h_t, mu)?;
    let (n_tm, e_tm) = eval(temp - h_t, mu)?;
    let dn_dmu = (n_mp - n_mm) / (2.0 * h_mu);
    let de_dmu = (e_mp - e_mm) / (2.0 * h_mu);
    let dn_dt = (n_tp - n_tm) / (2.0 * h_t);
    let de_dt = (e_tp - e_tm) / (2.0 * h_t);
    Ok([
        0.5 * temp * dn_dmu,
        0.5 * temp * temp * dn_dt,
        0.5 * temp * (de_dmu - mu * dn_dmu),
        0.5 * temp * temp * (de_dt - mu * dn_dt),
    ])
}
