//! Execute a validated configuration and write its artifacts.

use crate::config::{
    EvolveConfig, Job, MapConfig, RunConfig, Shape, SolveConfig, SpectrumConfig, SweepConfig,
};
use crate::output::{float, header, Outputs};
use ringbdg::double_well::{solve_stationary, sweep_curves, DWellParams};
use ringbdg::ring_dynamics::{self, measure_growth_rate, prepare_uniform, seed_noise, RingGrid};
use ringbdg::spectra::{omega1, omega2, stability_map, stability_report};
use ringbdg::{CouplingSign, Execution, RingParams};
use serde_json::json;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Core(#[from] ringbdg::Error),
    #[error("{failed} of {total} computations failed: {first}")]
    Incomplete {
        failed: usize,
        total: usize,
        first: String,
    },
    #[error(transparent)]
    Io(#[from] anyhow::Error),
}

impl RunError {
    pub fn kind(&self) -> &'static str {
        use ringbdg::Error as E;
        match self {
            RunError::Core(e) => match e {
                E::InvalidParameter { .. } => "invalid_parameter",
                E::DeterminantCheck { .. } => "determinant_check",
                E::BlowUp { .. } => "blow_up",
                E::ModeNotTracked(_) => "mode_not_tracked",
                E::NoGrowthWindow { .. } => "no_growth_window",
                E::NotConverged { .. } => "not_converged",
                E::DomainTooSmall { .. } => "domain_too_small",
            },
            RunError::Incomplete { .. } => "incomplete",
            RunError::Io(_) => "io",
        }
    }
}

type Result<T> = std::result::Result<T, RunError>;

fn sign(s: i32) -> CouplingSign {
    CouplingSign::try_from(s).expect("validated")
}

pub fn execute(cfg: &RunConfig, out: &mut Outputs) -> Result<()> {
    match &cfg.job {
        Job::Spectrum(c) => spectrum(c, out),
        Job::StabilityMap(c) => map(c, out),
        Job::Evolve(c) => evolve(c, cfg.seed, out),
        Job::DwellSolve(c) => dwell_solve(c, out),
        Job::DwellSweep(c) => dwell_sweep(c, out),
    }
}

fn spectrum(c: &SpectrumConfig, out: &mut Outputs) -> Result<()> {
    let params = RingParams::from_epsilon(c.eps, c.kappa_mag, sign(c.kappa_sign))?;
    let report = stability_report(&params, c.parity, c.m_max)?;
    let rows = report.modes.iter().map(|f| {
        vec![
            f.m.to_string(),
            float(f.omega1.re),
            float(f.omega1.im),
            float(f.omega2.re),
            float(f.omega2.im),
            report.is_unstable_at(f.m).to_string(),
        ]
    });
    out.csv(
        "spectrum.csv",
        &header(&[
            "m",
            "re_omega1",
            "im_omega1",
            "re_omega2",
            "im_omega2",
            "unstable",
        ]),
        rows,
    )?;
    Ok(())
}

fn map(c: &MapConfig, out: &mut Outputs) -> Result<()> {
    let cells = stability_map(
        &c.eps_values(),
        &c.kappa_values(),
        sign(c.kappa_sign),
        c.parity,
        c.m_max,
        Execution::default(),
    )?;
    let rows = cells.iter().map(|cell| {
        vec![
            float(cell.eps),
            float(cell.kappa_mag),
            float(cell.max_growth),
            cell.m_star.unwrap_or(0).to_string(),
        ]
    });
    out.csv(
        "stability_map.csv",
        &header(&["eps", "kappa_mag", "max_growth", "m_star"]),
        rows,
    )?;
    Ok(())
}

fn evolve(c: &EvolveConfig, seed: u64, out: &mut Outputs) -> Result<()> {
    let gamma = c.eps / (c.n0 / std::f64::consts::TAU);
    let params = RingParams::new(c.kappa_mag, sign(c.kappa_sign), gamma, c.n0)?;
    let grid = RingGrid::new(c.n_points)?;
    let mut fields = prepare_uniform(&params, c.parity, grid);
    seed_noise(&mut fields, c.noise, seed)?;
    let config = ring_dynamics::EvolveConfig {
        dt: c.dt,
        n_steps: c.n_steps(),
        record_every: c.record_every,
        modes: c.modes.clone(),
    };
    let record = ring_dynamics::evolve(&mut fields, &params, &config)?;

    let mut cols = header(&["tau", "norm_u", "norm_d", "energy", "L_u", "L_d"]);
    for t in &record.modes {
        cols.push(format!("abs_alpha_{}_u", t.m));
        cols.push(format!("abs_alpha_{}_d", t.m));
    }
    let rows = (0..record.len()).map(|i| {
        let mut row = vec![
            float(record.times[i]),
            float(record.norm_u[i]),
            float(record.norm_d[i]),
            float(record.energy[i]),
            float(record.l_u[i]),
            float(record.l_d[i]),
        ];
        for t in &record.modes {
            row.push(float(t.abs_u[i]));
            row.push(float(t.abs_d[i]));
        }
        row
    });
    out.csv("evolve.csv", &cols, rows)?;

    let eps = params.epsilon();
    let rows = c.modes.iter().map(|&m| {
        let predicted = if m == 0 {
            0.0
        } else {
            omega1(m, eps)
                .im
                .max(omega2(m, eps, c.kappa_mag, c.parity, sign(c.kappa_sign)).im)
        };
        let mut row = vec![m.to_string(), float(predicted)];
        match measure_growth_rate(&record, m) {
            Ok(fit) => row.extend([
                float(fit.rate),
                float(fit.window.0),
                float(fit.window.1),
                float(fit.residual),
                fit.samples.to_string(),
            ]),
            Err(_) => row.extend(std::iter::repeat_n(String::new(), 5)),
        }
        row
    });
    out.csv(
        "growth.csv",
        &header(&[
            "m",
            "predicted_rate",
            "fitted_rate",
            "tau_start",
            "tau_end",
            "fit_residual",
            "samples",
        ]),
        rows,
    )?;
    Ok(())
}

fn dwell_solve(c: &SolveConfig, out: &mut Outputs) -> Result<()> {
    let (l, n) = (
        c.half_length.expect("resolved"),
        c.n_grid.expect("resolved"),
    );
    let hs = match c.shape {
        Shape::Quartic => c.h.to_vec(),
        Shape::Harmonic => vec![0.0],
    };
    let mut failures = Vec::new();
    let mut total = 0;
    for &h in &hs {
        for g in c.g_tilde.to_vec() {
            let params = match c.shape {
                Shape::Quartic => DWellParams::quartic(c.xi0, h, g)?.with_grid(l, n)?,
                Shape::Harmonic => DWellParams::harmonic(g, l, n)?,
            };
            for parity in c.parities.to_vec() {
                total += 1;
                let stem = match c.shape {
                    Shape::Quartic => format!("dwell_solve_h{h}_g{g}_{}", parity.label()),
                    Shape::Harmonic => format!("dwell_solve_harmonic_g{g}_{}", parity.label()),
                };
                let sol = match solve_stationary(&params, parity) {
                    Ok(s) => s,
                    Err(e) => {
                        failures.push(format!("{stem}: {e}"));
                        continue;
                    }
                };
                let rows = sol
                    .xi()
                    .into_iter()
                    .zip(&sol.phi)
                    .map(|(x, p)| vec![float(x), float(*p)]);
                out.csv(&format!("{stem}.csv"), &header(&["xi", "phi"]), rows)?;
                out.json(
                    &format!("{stem}.json"),
                    &json!({
                        "parity": parity,
                        "h": h,
                        "g_tilde": g,
                        "mu": sol.mu,
                        "energy": sol.energy,
                        "residual": sol.residual,
                        "iterations": sol.iterations,
                        "converged": sol.converged,
                        "half_length": sol.params.half_length,
                        "n_grid": sol.params.n_grid,
                        "center_density": sol.center_density(),
                        "sign_changes": sol.sign_changes(),
                    }),
                )?;
            }
        }
    }
    incomplete(failures, total)
}

fn dwell_sweep(c: &SweepConfig, out: &mut Outputs) -> Result<()> {
    let hs = c.h.to_vec();
    let base = DWellParams::quartic(c.xi0, hs[0], 0.0)?.with_grid(
        c.half_length.expect("resolved"),
        c.n_grid.expect("resolved"),
    )?;
    let curves = sweep_curves(&base, &hs, &c.g_values, Execution::default())?;
    let mut failures = Vec::new();
    let mut total = 0;
    for curve in &curves {
        let rows = curve.rows.iter().map(|r| {
            vec![
                float(r.g_tilde),
                float(r.e_s),
                float(r.e_a),
                float(r.delta_e),
                float(r.mu_s),
                float(r.mu_a),
                float(r.delta_mu),
            ]
        });
        out.csv(
            &format!("dwell_sweep_h{}.csv", curve.h),
            &header(&[
                "g_tilde", "E_S", "E_A", "delta_E", "mu_S", "mu_A", "delta_mu",
            ]),
            rows,
        )?;
        for r in &curve.rows {
            total += 1;
            if let Some(e) = &r.error {
                failures.push(format!("h={} g={}: {e}", curve.h, r.g_tilde));
            }
        }
    }
    incomplete(failures, total)
}

fn incomplete(failures: Vec<String>, total: usize) -> Result<()> {
    match failures.first() {
        None => Ok(()),
        Some(first) => Err(RunError::Incomplete {
            failed: failures.len(),
            total,
            first: first.clone(),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn any_failure_marks_run_incomplete() {
        assert!(incomplete(Vec::new(), 3).is_ok());
        let e = incomplete(vec!["g=1: boom".into(), "g=2: boom".into()], 5).unwrap_err();
        assert_eq!(e.kind(), "incomplete");
        assert_eq!(e.to_string(), "2 of 5 computations failed: g=1: boom");
    }

    #[test]
    fn core_errors_keep_their_kind() {
        let e = RunError::from(ringbdg::Error::BlowUp { tau: 1.0 });
        assert_eq!(e.kind(), "blow_up");
    }
}
