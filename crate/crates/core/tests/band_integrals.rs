use dephase_core::analytic::{
    ebar_boltzmann_closed, ebar_fd_sommerfeld, nbar_boltzmann_closed, nbar_fd_sommerfeld, DEFAULT_SOMMERFELD_TERMS,
};
use dephase_core::transport::{ebar, fluxes, nbar, onsager};
use dephase_core::{Horizon, QuadratureSpec, ReservoirParams, Statistics};
use std::f64::consts::PI;

/// Midpoint rule with Neumaier summation over `[0, pi]`.
fn midpoint(f: impl Fn(f64) -> f64, nodes: usize) -> f64 {
    let h = PI / nodes as f64;
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for i in 0..nodes {
        let v = f((i as f64 + 0.5) * h);
        let s = sum + v;
        comp += if sum.abs() >= v.abs() {
            (sum - s) + v
        } else {
            (v - s) + sum
        };
        sum = s;
    }
    (sum + comp) * h
}

fn relaxation(k: f64, lambda: f64, g: f64, t: f64) -> f64 {
    let gk = g * k.sin().powi(2);
    (-lambda * t).exp() * (2.0 * gk * t).cos() - 1.0
}

#[test]
fn fd_moments_against_midpoint_rule() {
    let quad = QuadratureSpec::default();
    for (temp, mu, t) in [(0.2, 0.5, 3.0), (0.05, -1.2, 6.0), (1.0, 2.5, 1.0)] {
        let res = ReservoirParams::new(temp, mu).unwrap();
        let n = |k: f64| 1.0 / (((-2.0 * k.cos() - mu) / temp).exp() + 1.0);
        let on = midpoint(|k| n(k) * relaxation(k, 0.2, 1.0, t), 200_000) / PI;
        let oe = midpoint(|k| n(k) * -2.0 * k.cos() * relaxation(k, 0.2, 1.0, t), 200_000) / PI;
        let qn = nbar(Horizon::At(t), &res, 0.2, 1.0, &quad, Statistics::FermiDirac)
            .unwrap()
            .value;
        let qe = ebar(Horizon::At(t), &res, 0.2, 1.0, &quad, Statistics::FermiDirac)
            .unwrap()
            .value;
        assert!((qn - on).abs() < 1e-9, "{temp} {mu} {t}: {qn} {on}");
        assert!((qe - oe).abs() < 1e-9, "{temp} {mu} {t}: {qe} {oe}");
    }
}

#[test]
fn boltzmann_closed_forms_off_reference_point() {
    let quad = QuadratureSpec::default();
    for (temp, mu, lambda, g, t) in [(0.2, -2.5, 0.1, 0.7, 4.0), (0.5, -4.0, 1.0, 1.5, 0.3)] {
        let res = ReservoirParams::new(temp, mu).unwrap();
        let h = Horizon::At(t);
        let qn = nbar(h, &res, lambda, g, &quad, Statistics::Boltzmann).unwrap().value;
        let qe = ebar(h, &res, lambda, g, &quad, Statistics::Boltzmann).unwrap().value;
        let cn = nbar_boltzmann_closed(h, &res, lambda, g).unwrap();
        let ce = ebar_boltzmann_closed(h, &res, lambda, g).unwrap();
        assert!((qn - cn).abs() < 1e-8 * qn.abs().max(1e-3), "{qn} {cn}");
        assert!((qe - ce).abs() < 1e-8 * qe.abs().max(1e-3), "{qe} {ce}");
    }
}

#[test]
fn sommerfeld_close_at_low_temperature() {
    let quad = QuadratureSpec::default();
    for mu in [-1.0, -0.3, 0.4, 1.2] {
        let res = ReservoirParams::new(0.05, mu).unwrap();
        for t in [0.5, 2.0, 6.0] {
            let h = Horizon::At(t);
            let qn = nbar(h, &res, 0.35, 1.0, &quad, Statistics::FermiDirac).unwrap().value;
            let sn = nbar_fd_sommerfeld(h, &res, 0.35, 1.0, DEFAULT_SOMMERFELD_TERMS)
                .unwrap()
                .value;
            let qe = ebar(h, &res, 0.35, 1.0, &quad, Statistics::FermiDirac).unwrap().value;
            let se = ebar_fd_sommerfeld(h, &res, 0.35, 1.0, DEFAULT_SOMMERFELD_TERMS)
                .unwrap()
                .value;
            assert!((qn - sn).abs() < 2e-3 * qn.abs(), "N {mu} {t}: {qn} {sn}");
            assert!((qe - se).abs() < 2e-3 * qe.abs(), "E {mu} {t}: {qe} {se}");
        }
    }
}

#[test]
fn onsager_reciprocity_and_positivity() {
    let quad = QuadratureSpec::default();
    for mu in [-1.5, 0.0, 0.8] {
        let res = ReservoirParams::new(0.2, mu).unwrap();
        let b = onsager(Horizon::Equilibrium, &res, 0.1, 1.0, &quad, Statistics::FermiDirac).unwrap();
        assert_eq!(b.j_n_t, b.j_q_mu);
        // with D = -1 the block is minus a Gram matrix
        assert!(b.j_n_mu < 0.0 && b.j_q_t < 0.0);
        assert!(b.j_n_mu * b.j_q_t - b.j_n_t * b.j_q_mu >= -1e-14);
        let f = fluxes(&b, 0.01, 0.0);
        assert!((f.j_particle - b.j_n_mu * 0.01 / 0.2).abs() < 1e-15);
    }
}
