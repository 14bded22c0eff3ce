//! Scenario evaluation. Grid points are computed in parallel and collected
//! in grid order, so the tables do not depend on the thread count.

use std::path::PathBuf;

use dephase_core::analytic::{ebar_fd_sommerfeld_with, nbar_fd_sommerfeld_with, onsager_sommerfeld};
use dephase_core::entropy::{
    entropy_coeffs, entropy_production_mode, exact_entropies, mutual_information_mode, total_entropy_mode,
};
use dephase_core::transport::{ebar, fluxes, nbar, onsager, qbar};
use dephase_core::{EquilibriumModePrep, Horizon, ReservoirParams, Statistics};
use rayon::prelude::*;

use crate::config::{ScenarioConfig, ScenarioId};
use crate::error::{invalid, Result};
use crate::report::{Comparison, ComparisonReport};
use crate::table::{csv_writer, format_number, label, write_bytes, Table};

const T_COL: &str = "t[hbar/alpha]";
const MU_COL: &str = "mu[alpha]";
const ONSAGER_COLS: [&str; 4] = ["J_Nmu[1]", "J_NT[alpha]", "J_Qmu[alpha]", "J_QT[alpha^2]"];

#[derive(Debug, Clone, Default)]
pub struct ScenarioOutput {
    pub tables: Vec<Table>,
    pub reports: Vec<ComparisonReport>,
}

impl ScenarioOutput {
    /// Writes every table plus `<scenario>_report.csv` when reports exist.
    pub fn write(&self, cfg: &ScenarioConfig) -> Result<Vec<PathBuf>> {
        let dir = &cfg.output.path;
        let mut paths = Vec::new();
        for t in &self.tables {
            paths.push(t.write(dir, cfg.output.precision)?);
        }
        if !self.reports.is_empty() {
            let path = dir.join(format!("{}_report.csv", cfg.scenario));
            let mut w = csv_writer(Vec::new());
            w.write_record([
                "label",
                "max_abs_dev",
                "max_rel_dev",
                "worst_point",
                "tolerance",
                "pass",
            ])?;
            for r in &self.reports {
                let point: Vec<String> = r
                    .worst_point
                    .iter()
                    .map(|(k, v)| format!("{k}={}", format_number(*v, cfg.output.precision)))
                    .collect();
                w.write_record([
                    r.label.clone(),
                    format_number(r.max_abs_dev, cfg.output.precision),
                    format_number(r.max_rel_dev, cfg.output.precision),
                    point.join(";"),
                    format_number(r.tolerance, cfg.output.precision),
                    r.pass.to_string(),
                ])?;
            }
            let bytes = w
                .into_inner()
                .map_err(|e| crate::error::CliError::Csv(e.into_error().into()))?;
            write_bytes(&path, &bytes)?;
            paths.push(path);
        }
        Ok(paths)
    }
}

pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ScenarioOutput> {
    cfg.validate()?;
    match cfg.scenario {
        ScenarioId::Ons1 => ons1(cfg),
        ScenarioId::Onsevo1 => onsevo1(cfg),
        ScenarioId::Onsevo2 => onsevo2(cfg),
        ScenarioId::Entroevo => entropy_table(cfg, EntropyKind::Marginals),
        ScenarioId::Entroprod => entropy_table(cfg, EntropyKind::Production),
        ScenarioId::Mutint => entropy_table(cfg, EntropyKind::Mutual),
        ScenarioId::Onsteste1 => onsteste1(cfg),
        ScenarioId::Onsteste2 => onsteste2(cfg),
        ScenarioId::Custom => custom(cfg),
    }
}

fn rows<F>(points: &[f64], f: F) -> Result<Vec<Vec<f64>>>
where
    F: Fn(f64) -> Result<Vec<f64>> + Sync,
{
    points.par_iter().map(|&x| f(x)).collect()
}

fn with_fluxes(cfg: &ScenarioConfig) -> bool {
    cfg.physics.delta_mu != 0.0 || cfg.physics.delta_t != 0.0
}

fn header(first: &[&str], cfg: &ScenarioConfig) -> Vec<&'static str> {
    let mut h: Vec<&'static str> = Vec::new();
    for f in first {
        h.push(match *f {
            "t" => T_COL,
            "mu" => MU_COL,
            _ => unreachable!("unknown leading column"),
        });
    }
    h.extend(ONSAGER_COLS);
    if with_fluxes(cfg) {
        h.extend(["j_particle[1]", "j_heat[alpha]"]);
    }
    h
}

fn onsager_row(cfg: &ScenarioConfig, horizon: Horizon, temp: f64, mu: f64, lambda: f64) -> Result<Vec<f64>> {
    let p = &cfg.physics;
    let res = ReservoirParams::new(temp, mu)?;
    let block = onsager(horizon, &res, lambda, p.g, &cfg.grids.quadrature, p.statistics)?;
    let mut row = block.as_array().to_vec();
    if with_fluxes(cfg) {
        let f = fluxes(&block, p.delta_mu, p.delta_t);
        row.extend([f.j_particle, f.j_heat]);
    }
    Ok(row)
}

fn ons1(cfg: &ScenarioConfig) -> Result<ScenarioOutput> {
    let mus = cfg.grids.mu_points();
    let mut out = ScenarioOutput::default();
    for temp in cfg.physics.temperatures() {
        let mut table = Table::new(format!("ons1_T{}", label(temp)), &header(&["mu"], cfg));
        table.rows = rows(&mus, |mu| {
            let mut row = vec![mu];
            row.extend(onsager_row(cfg, Horizon::Equilibrium, temp, mu, cfg.physics.lambda)?);
            Ok(row)
        })?;
        out.tables.push(table);
    }
    Ok(out)
}

fn onsevo1(cfg: &ScenarioConfig) -> Result<ScenarioOutput> {
    let times = cfg.grids.t_points();
    let mut out = ScenarioOutput::default();
    for mu in cfg.physics.mus() {
        let mut table = Table::new(format!("onsevo1_mu{}", label(mu)), &header(&["t"], cfg));
        table.rows = rows(&times, |t| {
            let mut row = vec![t];
            row.extend(onsager_row(
                cfg,
                Horizon::At(t),
                cfg.physics.temperature,
                mu,
                cfg.physics.lambda,
            )?);
            Ok(row)
        })?;
        out.tables.push(table);
    }
    Ok(out)
}

fn onsevo2(cfg: &ScenarioConfig) -> Result<ScenarioOutput> {
    let times = cfg.grids.t_points();
    let p = &cfg.physics;
    let res = ReservoirParams::new(p.temperature, p.mu)?;
    let mut out = ScenarioOutput::default();
    for lambda in p.lambdas() {
        let mut table = Table::new(format!("onsevo2_lambda{}", label(lambda)), &[T_COL, ONSAGER_COLS[0]]);
        table.rows = rows(&times, |t| {
            let block = onsager(Horizon::At(t), &res, lambda, p.g, &cfg.grids.quadrature, p.statistics)?;
            Ok(vec![t, block.j_n_mu])
        })?;
        out.tables.push(table);
    }
    Ok(out)
}

#[derive(Clone, Copy)]
enum EntropyKind {
    Marginals,
    Production,
    Mutual,
}

fn entropy_table(cfg: &ScenarioConfig, kind: EntropyKind) -> Result<ScenarioOutput> {
    let times = cfg.grids.t_points();
    let p = &cfg.physics;
    let (stem, columns): (&str, &[&str]) = match kind {
        EntropyKind::Marginals => (
            "entroevo",
            &[
                T_COL,
                "S_A[k_B]",
                "S_B[k_B]",
                "S_A_exact[k_B]",
                "S_B_exact[k_B]",
                "S_A+S_B-I[k_B]",
            ],
        ),
        EntropyKind::Production => (
            "entroprod",
            &[T_COL, "S_AB[k_B]", "S_AB_exact[k_B]", "Pi[k_B alpha/hbar]"],
        ),
        EntropyKind::Mutual => ("mutint", &[T_COL, "I[k_B]", "I_exact[k_B]"]),
    };
    let mut out = ScenarioOutput::default();
    for lambda in p.lambdas() {
        let prep = EquilibriumModePrep::new(p.n_eq, p.delta_n, p.g, lambda)?;
        let mut table = Table::new(format!("{stem}_lambda{}", label(lambda)), columns);
        table.rows = rows(&times, |t| {
            let exact = exact_entropies(&prep, t)?;
            Ok(match kind {
                EntropyKind::Marginals => {
                    let c = entropy_coeffs(&prep, t)?;
                    vec![t, c.s_a(), c.s_b(), exact.s_a, exact.s_b, total_entropy_mode(&prep, t)?]
                }
                EntropyKind::Production => {
                    vec![
                        t,
                        total_entropy_mode(&prep, t)?,
                        exact.s_ab,
                        entropy_production_mode(&prep, t)?,
                    ]
                }
                EntropyKind::Mutual => vec![t, mutual_information_mode(&prep, t)?, exact.mutual_information()],
            })
        })?;
        out.tables.push(table);
    }
    Ok(out)
}

fn onsteste1(cfg: &ScenarioConfig) -> Result<ScenarioOutput> {
    let p = &cfg.physics;
    let mus = cfg.grids.mu_points();
    if let Some(mu) = mus.iter().find(|m| m.abs() >= 2.0) {
        return Err(invalid(
            "grids.mu",
            format!("the low-temperature series needs |mu| < 2, got {mu}"),
        ));
    }
    let mut out = ScenarioOutput::default();
    for temp in p.temperatures() {
        let mut h = vec![MU_COL];
        h.extend(ONSAGER_COLS);
        h.extend([
            "J_Nmu_series[1]",
            "J_NT_series[alpha]",
            "J_Qmu_series[alpha]",
            "J_QT_series[alpha^2]",
        ]);
        let mut table = Table::new(format!("onsteste1_T{}", label(temp)), &h);
        table.rows = rows(&mus, |mu| {
            let res = ReservoirParams::new(temp, mu)?;
            let numeric = onsager(
                Horizon::Equilibrium,
                &res,
                p.lambda,
                p.g,
                &cfg.grids.quadrature,
                Statistics::FermiDirac,
            )?;
            let series = onsager_sommerfeld(
                p.sommerfeld_form,
                Horizon::Equilibrium,
                &res,
                p.lambda,
                p.g,
                p.sommerfeld_terms,
            )?;
            let mut row = vec![mu];
            row.extend(numeric.as_array());
            row.extend(series);
            Ok(row)
        })?;
        for (i, name) in ONSAGER_COLS.iter().enumerate() {
            let mut one = Comparison::new(*name);
            for row in &table.rows {
                one.add(&[("mu", row[0])], row[1 + i], row[5 + i]);
            }
            out.reports.push(ComparisonReport {
                label: format!("{} T={}", name, label(temp)),
                ..one.finish(cfg.tolerance)
            });
        }
        out.tables.push(table);
    }
    Ok(out)
}

fn onsteste2(cfg: &ScenarioConfig) -> Result<ScenarioOutput> {
    let p = &cfg.physics;
    let times = cfg.grids.t_points();
    let mut out = ScenarioOutput::default();
    let mut n_cmp = Comparison::new(format!("Nbar T={}", label(p.temperature)));
    let mut e_cmp = Comparison::new(format!("Ebar T={}", label(p.temperature)));
    for mu in p.mus() {
        let res = ReservoirParams::new(p.temperature, mu)?;
        let mut table = Table::new(
            format!("onsteste2_mu{}", label(mu)),
            &[T_COL, "Nbar[1]", "Nbar_series[1]", "Ebar[alpha]", "Ebar_series[alpha]"],
        );
        table.rows = rows(&times, |t| {
            let h = Horizon::At(t);
            let quad = &cfg.grids.quadrature;
            let n = nbar(h, &res, p.lambda, p.g, quad, Statistics::FermiDirac)?.value;
            let e = ebar(h, &res, p.lambda, p.g, quad, Statistics::FermiDirac)?.value;
            let ns = nbar_fd_sommerfeld_with(p.sommerfeld_form, h, &res, p.lambda, p.g, p.sommerfeld_terms)?.value;
            let es = ebar_fd_sommerfeld_with(p.sommerfeld_form, h, &res, p.lambda, p.g, p.sommerfeld_terms)?.value;
            Ok(vec![t, n, ns, e, es])
        })?;
        for row in &table.rows {
            n_cmp.add(&[("mu", mu), ("t", row[0])], row[1], row[2]);
            e_cmp.add(&[("mu", mu), ("t", row[0])], row[3], row[4]);
        }
        out.tables.push(table);
    }
    out.reports.push(n_cmp.finish(cfg.tolerance));
    out.reports.push(e_cmp.finish(cfg.tolerance));
    Ok(out)
}

fn custom(cfg: &ScenarioConfig) -> Result<ScenarioOutput> {
    let p = &cfg.physics;
    let times = cfg.grids.t_points();
    let mus = match &cfg.grids.mu {
        Some(g) => g.points(),
        None => p.mus(),
    };
    let points: Vec<(f64, f64)> = mus.iter().flat_map(|&m| times.iter().map(move |&t| (m, t))).collect();
    let mut h = vec![MU_COL, T_COL, "Nbar[1]", "Ebar[alpha]", "Qbar[alpha]"];
    h.extend(header(&[], cfg));
    let mut table = Table::new("custom", &h);
    table.rows = points
        .par_iter()
        .map(|&(mu, t)| -> Result<Vec<f64>> {
            let res = ReservoirParams::new(p.temperature, mu)?;
            let hz = Horizon::At(t);
            let quad = &cfg.grids.quadrature;
            let mut row = vec![
                mu,
                t,
                nbar(hz, &res, p.lambda, p.g, quad, p.statistics)?.value,
                ebar(hz, &res, p.lambda, p.g, quad, p.statistics)?.value,
                qbar(hz, &res, p.lambda, p.g, quad, p.statistics)?.value,
            ];
            row.extend(onsager_row(cfg, hz, p.temperature, mu, p.lambda)?);
            Ok(row)
        })
        .collect::<Result<_>>()?;
    Ok(ScenarioOutput {
        tables: vec![table],
        reports: Vec::new(),
    })
}
