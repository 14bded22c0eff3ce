//! Special functions used by the closed-form band integrals.
//!
//! Accuracy contract: Bessel functions of integer order n <= 60 and argument
//! |x| <= 100 are accurate to 1e-12 absolute (J) or 1e-13 relative (I). They
//! are computed by Miller's downward recurrence, normalised with the
//! Neumann-type sums `J_0 + 2 sum J_2k = 1` and `I_0 + 2 sum I_k = e^x`, which
//! also yields a whole table of orders at once.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{check_domain, Error, Result};

pub const MAX_VALIDATED_ORDER: usize = 60;
pub const MAX_VALIDATED_ARGUMENT: f64 = 100.0;

/// Outcome of a truncated series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesResult {
    pub value: f64,
    pub trunc_error_est: f64,
    pub terms_used: usize,
    pub converged: bool,
}

const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)]
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// ln Gamma(x) for x > 0 (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> Result<f64> {
    check_domain("x", x, "> 0", x > 0.0)?;
    if x < 0.5 {
        // reflection keeps the Lanczos sum in its accurate range
        let s = (PI * x).sin();
        return Ok(PI.ln() - s.ln() - ln_gamma(1.0 - x)?);
    }
    let z = x - 1.0;
    let mut acc = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    Ok(0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + acc.ln())
}

/// Euler beta function B(a, b) = Gamma(a) Gamma(b) / Gamma(a + b).
pub fn beta_fn(a: f64, b: f64) -> Result<f64> {
    check_domain("a", a, "> 0", a > 0.0)?;
    check_domain("b", b, "> 0", b > 0.0)?;
    Ok((ln_gamma(a)? + ln_gamma(b)? - ln_gamma(a + b)?).exp())
}

fn check_bessel_range(n: usize, x: f64) -> Result<()> {
    if n > MAX_VALIDATED_ORDER || x.is_nan() || x.abs() > MAX_VALIDATED_ARGUMENT {
        return Err(Error::SpecialRange(format!(
            "order {n}, argument {x} (validated: n <= {MAX_VALIDATED_ORDER}, |x| <= {MAX_VALIDATED_ARGUMENT})"
        )));
    }
    Ok(())
}

/// Bessel function of the first kind J_n(x).
pub fn bessel_j(n: usize, x: f64) -> Result<f64> {
    check_bessel_range(n, x)?;
    Ok(bessel_j_table(x, n)[n])
}

/// Modified Bessel function of the first kind I_n(y).
pub fn bessel_i(n: usize, y: f64) -> Result<f64> {
    check_bessel_range(n, y)?;
    Ok(bessel_i_table(y, n)[n])
}

fn miller_start(order: usize, x: f64) -> usize {
    let top = (order as f64).max(x.abs());
    let m = (top + 40.0 + (40.0 * top).sqrt()).ceil() as usize;
    m + (m % 2)
}

/// J_0(x) ..= J_max_order(x).
pub fn bessel_j_table(x: f64, max_order: usize) -> Vec<f64> {
    let mut out = vec![0.0; max_order + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let ax = x.abs();
    let start = miller_start(max_order, ax);
    let mut upper = 0.0;
    let mut current = 1e-300;
    let mut even_sum = 0.0;
    let mut scratch = vec![0.0; max_order + 1];
    for k in (1..=start).rev() {
        // J_{k-1} = (2k/x) J_k - J_{k+1}
        let lower = 2.0 * k as f64 / ax * current - upper;
        upper = current;
        current = lower;
        let order = k - 1;
        if order % 2 == 0 && order > 0 {
            even_sum += current;
        }
        if order <= max_order {
            scratch[order] = current;
        }
        if current.abs() > 1e250 {
            let s = 1e-250;
            current *= s;
            upper *= s;
            even_sum *= s;
            for v in scratch.iter_mut() {
                *v *= s;
            }
        }
    }
    let norm = current + 2.0 * even_sum;
    for (k, v) in out.iter_mut().enumerate() {
        let sign = if x < 0.0 && k % 2 == 1 { -1.0 } else { 1.0 };
        *v = sign * scratch[k] / norm;
    }
    out
}

/// I_0(y) ..= I_max_order(y).
pub fn bessel_i_table(y: f64, max_order: usize) -> Vec<f64> {
    let mut out = vec![0.0; max_order + 1];
    if y == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let ay = y.abs();
    let start = miller_start(max_order, ay) + (80.0 * ay).sqrt().ceil() as usize;
    let mut upper = 0.0;
    let mut current = 1e-300;
    let mut sum = 0.0;
    let mut scratch = vec![0.0; max_order + 1];
    for k in (1..=start).rev() {
        // I_{k-1} = (2k/y) I_k + I_{k+1}
        let lower = 2.0 * k as f64 / ay * current + upper;
        upper = current;
        current = lower;
        let order = k - 1;
        if order > 0 {
            sum += current;
        }
        if order <= max_order {
            scratch[order] = current;
        }
        if current > 1e250 {
            let s = 1e-250;
            current *= s;
            upper *= s;
            sum *= s;
            for v in scratch.iter_mut() {
                *v *= s;
            }
        }
    }
    // I_0 + 2 sum_{k>=1} I_k = e^y
    let norm = (current + 2.0 * sum) * (-ay).exp();
    for (k, v) in out.iter_mut().enumerate() {
        let sign = if y < 0.0 && k % 2 == 1 { -1.0 } else { 1.0 };
        *v = sign * scratch[k] / norm;
    }
    out
}

/// Third-kind Chebyshev polynomial V_n(x) = cos((n + 1/2) t) / cos(t/2), x = cos t.
pub fn chebyshev_v(n: usize, x: f64) -> Result<f64> {
    check_domain("x", x, "|x| <= 1", x.abs() <= 1.0)?;
    Ok(chebyshev_v_table(x, n)[n])
}

/// V_0(x) ..= V_max_degree(x) by V_{n+1} = 2x V_n - V_{n-1}.
pub fn chebyshev_v_table(x: f64, max_degree: usize) -> Vec<f64> {
    let mut v = Vec::with_capacity(max_degree + 1);
    v.push(1.0);
    if max_degree >= 1 {
        v.push(2.0 * x - 1.0);
    }
    for n in 1..max_degree {
        let next = 2.0 * x * v[n] - v[n - 1];
        v.push(next);
    }
    v
}

/// Upper bound on sum_{k >= k0} |J_k(z)| from |J_k(z)| <= (|z|/2)^k / k!.
pub fn bessel_j_tail_bound(z: f64, k0: usize) -> f64 {
    let half = 0.5 * z.abs();
    if half == 0.0 {
        return if k0 == 0 { 1.0 } else { 0.0 };
    }
    let ratio = half / (k0 as f64 + 1.0);
    if ratio >= 1.0 {
        return f64::INFINITY;
    }
    let log_first = k0 as f64 * half.ln() - ln_factorial(k0);
    log_first.exp() / (1.0 - ratio)
}

fn ln_factorial(n: usize) -> f64 {
    if n < 2 {
        0.0
    } else {
        ln_gamma(n as f64 + 1.0).expect("positive argument")
    }
}

/// Cached special-function values at fixed arguments.
#[derive(Debug, Clone)]
pub struct SpecialFnTable {
    pub bessel_arg: f64,
    pub chebyshev_arg: f64,
    j: Vec<f64>,
    i: Vec<f64>,
    v: Vec<f64>,
}

impl SpecialFnTable {
    /// Tables of J_n and I_n at `bessel_arg` for n <= `max_order`, and V_n at
    /// `chebyshev_arg` for n <= `max_degree`.
    pub fn new(bessel_arg: f64, chebyshev_arg: f64, max_order: usize, max_degree: usize) -> Result<Self> {
        if bessel_arg.is_nan() || bessel_arg.abs() > MAX_VALIDATED_ARGUMENT {
            return Err(Error::SpecialRange(format!("Bessel argument {bessel_arg}")));
        }
        check_domain("chebyshev_arg", chebyshev_arg, "|x| <= 1", chebyshev_arg.abs() <= 1.0)?;
        Ok(SpecialFnTable {
            bessel_arg,
            chebyshev_arg,
            j: bessel_j_table(bessel_arg, max_order),
            i: bessel_i_table(bessel_arg, max_order),
            v: chebyshev_v_table(chebyshev_arg, max_degree),
        })
    }

    pub fn j(&self, n: usize) -> f64 {
        self.j[n]
    }

    pub fn i(&self, n: usize) -> f64 {
        self.i[n]
    }

    pub fn v(&self, n: usize) -> f64 {
        self.v[n]
    }

    pub fn max_order(&self) -> usize {
        self.j.len() - 1
    }

    pub fn max_degree(&self) -> usize {
        self.v.len() - 1
    }
}
