//! Mode dispatch.

use dqd_core::dynamics::{
    evolve_rk4_sampled, evolve_spectral, evolve_symmetric_r1_state, Trajectory,
};
use dqd_core::error::Error;
use dqd_core::liouvillian::{build_liouvillian, StateVector};
use dqd_core::model::{EngineParams, RateSet, HOT};
use dqd_core::spectral::{closed_form_eigensystem, normalize_phase, numeric_eigensystem};
use dqd_core::steadystate::{reduced_determinant, solve_steady_state_with, SteadyStateResult};
use dqd_core::transport::{
    classical_conductances, instantaneous_currents, quantum_conductances, quantum_speed,
    transport_report,
};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::config::{Mode, RunConfig, SpectrumMethod, TimeMethod};
use crate::table::{num, opt, Table};
use crate::CliError;

pub const SWEEP_COLUMNS: [&str; 13] = [
    "rho12_inf",
    "Psi_1",
    "Psi_2",
    "sigma_cl_1",
    "sigma_cl_2",
    "sigma_q_1",
    "sigma_q_2",
    "sigma_q_total",
    "J_1",
    "J_2",
    "det_Lss",
    "singular_flag",
    "i0",
];

/// A finished run: the table to write and, for partially failed sweeps,
/// the error that sets the exit status.
#[derive(Debug)]
pub struct Outcome {
    pub table: Table,
    pub failure: Option<CliError>,
}

pub fn run(mode: Mode, cfg: &RunConfig, threads: Option<usize>) -> Result<Outcome, CliError> {
    cfg.validate(mode)?;
    if mode == Mode::Sweep {
        return sweep(cfg, threads);
    }
    let table = match &cfg.phi_values {
        None => single(mode, cfg, &cfg.engine_at(None)?)?,
        Some(phis) => {
            let mut all = Table::default();
            for &p in phis {
                all.extend(single(mode, cfg, &cfg.engine_at(Some(p))?)?.with_leading("phi", p));
            }
            all
        }
    };
    Ok(Outcome {
        table,
        failure: None,
    })
}

fn single(mode: Mode, cfg: &RunConfig, params: &EngineParams) -> Result<Table, CliError> {
    let rates = RunConfig::rates(params)?;
    match mode {
        Mode::Steady => steady(cfg, &rates),
        Mode::Evolve => evolve(cfg, params, &rates),
        Mode::Spectrum => spectrum(cfg, params, &rates),
        Mode::Transport => transport(cfg, params, &rates),
        Mode::Sweep => unreachable!("handled by sweep"),
    }
}

fn solve(cfg: &RunConfig, rates: &RateSet) -> Result<SteadyStateResult, CliError> {
    let initial = cfg.initial_state()?;
    Ok(solve_steady_state_with(
        rates,
        Some(&initial),
        &cfg.tolerances.steady_options(),
    )?)
}

fn flag(ss: &SteadyStateResult) -> String {
    if ss.is_singular() { "1" } else { "0" }.to_string()
}

fn steady(cfg: &RunConfig, rates: &RateSet) -> Result<Table, CliError> {
    let ss = solve(cfg, rates)?;
    let s = &ss.state;
    let mut t = Table::new(&[
        "rho00",
        "rho11",
        "rho22",
        "rho12_re",
        "rho12_im",
        "det_Lss",
        "condition_number",
        "singular_flag",
        "i0",
    ]);
    t.push(vec![
        num(s.rho00),
        num(s.rho11),
        num(s.rho22),
        num(s.rho12.re),
        num(s.rho12.im),
        num(ss.determinant),
        num(ss.condition_number),
        flag(&ss),
        opt(ss.conserved_i0()),
    ]);
    Ok(t)
}

fn evolve(cfg: &RunConfig, params: &EngineParams, rates: &RateSet) -> Result<Table, CliError> {
    let time = cfg.time.as_ref().expect("validated");
    let mut initial = cfg.initial_state()?;
    if time.full && initial.outer.is_none() {
        initial.outer = Some([Complex64::new(0.0, 0.0); 4]);
    }
    let (times, dt) = cfg.time_grid(rates);
    let l = build_liouvillian(rates, params.dot_energy);
    let tr: Trajectory = match time.method {
        TimeMethod::Spectral => evolve_spectral(&l, &initial, &times)?,
        TimeMethod::Rk4 => evolve_rk4_sampled(&l, &initial, &times, dt, time.full)?,
        TimeMethod::SymmetricR1 => {
            if params.phi[0] != params.phi[1] {
                return Err(CliError::Config(
                    "time.method: symmetric_r1 needs equal interference for both baths".into(),
                ));
            }
            evolve_symmetric_r1_state(rates, params.phi[0], &initial, &times)?
        }
    };

    let mut header = vec!["t", "rho00", "rho11", "rho22", "rho12_re", "rho12_im"];
    if time.full {
        header.extend([
            "rho01_re", "rho01_im", "rho02_re", "rho02_im", "rho10_re", "rho10_im", "rho20_re",
            "rho20_im",
        ]);
    }
    let mut t = Table::new(&header);
    for (time_k, s) in tr.times.iter().zip(&tr.states) {
        let mut row = vec![
            num(*time_k),
            num(s.rho00),
            num(s.rho11),
            num(s.rho22),
            num(s.rho12.re),
            num(s.rho12.im),
        ];
        if time.full {
            let outer = s.outer.unwrap_or([Complex64::new(0.0, 0.0); 4]);
            for z in outer {
                row.push(num(z.re));
                row.push(num(z.im));
            }
        }
        t.push(row);
    }
    Ok(t)
}

const COMPONENTS: [&str; 5] = ["rho00", "rho11", "rho22", "rho12", "rho21"];

fn spectrum(cfg: &RunConfig, params: &EngineParams, rates: &RateSet) -> Result<Table, CliError> {
    let es = match cfg.spectrum.method {
        SpectrumMethod::Numeric => {
            numeric_eigensystem(&build_liouvillian(rates, params.dot_energy))?
        }
        SpectrumMethod::ClosedForm => closed_form_eigensystem(rates)?,
    };
    let mut header = vec!["index".to_string(), "lambda_re".into(), "lambda_im".into()];
    for c in COMPONENTS {
        header.push(format!("v_{c}_re"));
        header.push(format!("v_{c}_im"));
    }
    let mut t = Table::new(&header);
    for (k, p) in es.pairs.iter().enumerate() {
        let mut row = vec![(k + 1).to_string(), num(p.value.re), num(p.value.im)];
        for z in normalize_phase(p.vector).iter() {
            row.push(num(z.re));
            row.push(num(z.im));
        }
        t.push(row);
    }
    Ok(t)
}

fn transport(cfg: &RunConfig, params: &EngineParams, rates: &RateSet) -> Result<Table, CliError> {
    let ss = solve(cfg, rates)?;
    let rep = transport_report(rates, params, &ss)?;
    let mut t = Table::new(&[
        "delta_N",
        "J_h_1",
        "J_h_2",
        "J_c_1",
        "J_c_2",
        "J_cl_1",
        "J_cl_2",
        "J_q_1",
        "J_q_2",
        "Psi_1",
        "Psi_2",
        "rho12_inf",
        "sigma_cl_1",
        "sigma_cl_2",
        "sigma_q_1",
        "sigma_q_2",
        "sigma_q_total",
        "power",
        "heat_hot",
        "efficiency",
        "singular_flag",
        "i0",
    ]);
    t.push(vec![
        num(rep.delta_n),
        num(rep.j[0][0]),
        num(rep.j[0][1]),
        num(rep.j[1][0]),
        num(rep.j[1][1]),
        num(rep.j_cl[0]),
        num(rep.j_cl[1]),
        num(rep.j_q[0]),
        num(rep.j_q[1]),
        num(rep.psi[0]),
        num(rep.psi[1]),
        num(rep.rho12_inf),
        num(rep.sigma_cl[0]),
        num(rep.sigma_cl[1]),
        num(rep.sigma_q[0]),
        num(rep.sigma_q[1]),
        num(rep.total_quantum_conductance()),
        opt(rep.power),
        opt(rep.heat_hot),
        opt(rep.efficiency),
        flag(&ss),
        opt(ss.conserved_i0()),
    ]);
    Ok(t)
}

enum PointResult {
    Row(Vec<String>),
    /// Diagnostic row for a singular point outside the known family.
    Unclassified(Vec<String>),
}

fn sweep_point(
    cfg: &RunConfig,
    params: &EngineParams,
    initial: &StateVector,
) -> Result<PointResult, CliError> {
    let rates = RunConfig::rates(params)?;
    let opts = cfg.tolerances.steady_options();
    let det = reduced_determinant(&rates);
    let ss = match solve_steady_state_with(&rates, Some(initial), &opts) {
        Ok(ss) => ss,
        Err(Error::SingularUnclassified { det }) => {
            let mut row = vec![String::new(); SWEEP_COLUMNS.len()];
            row[10] = num(det);
            row[11] = "2".into();
            return Ok(PointResult::Unclassified(row));
        }
        Err(e) => return Err(e.into()),
    };
    let psi = quantum_speed(&rates);
    let sigma_cl = classical_conductances(&rates, params);
    let sigma_q = quantum_conductances(&rates, params, &ss)?;
    let j = instantaneous_currents(&rates, &ss.state);
    Ok(PointResult::Row(vec![
        num(ss.state.rho12.re),
        num(psi[0]),
        num(psi[1]),
        num(sigma_cl[0]),
        num(sigma_cl[1]),
        num(sigma_q[0]),
        num(sigma_q[1]),
        num(sigma_q[0] + sigma_q[1]),
        num(j[HOT][0]),
        num(j[HOT][1]),
        num(det),
        flag(&ss),
        opt(ss.conserved_i0()),
    ]))
}

fn sweep(cfg: &RunConfig, threads: Option<usize>) -> Result<Outcome, CliError> {
    let axes = &cfg.sweep.as_ref().expect("validated").axis;
    let base = cfg.engine_at(None)?;
    let initial = cfg.initial_state()?;

    // grid in row-major order, first axis outermost
    let mut grid: Vec<Vec<f64>> = vec![vec![]];
    for ax in axes {
        let values = ax.values();
        grid = grid
            .into_iter()
            .flat_map(|prefix| {
                values.iter().map(move |&v| {
                    let mut p = prefix.clone();
                    p.push(v);
                    p
                })
            })
            .collect();
    }

    let point_params = |coords: &[f64]| {
        let mut p = base.clone();
        for (ax, &v) in axes.iter().zip(coords) {
            match ax.name.as_str() {
                "phi_h" => p.phi[0] = v,
                "phi_c" => p.phi[1] = v,
                other => unreachable!("validated axis {other}"),
            }
        }
        p
    };
    let eval = || {
        grid.par_iter()
            .map(|coords| sweep_point(cfg, &point_params(coords), &initial))
            .collect::<Vec<_>>()
    };
    let results = match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Config(format!("--threads: {e}")))?
            .install(eval),
        None => eval(),
    };

    let mut header: Vec<&str> = axes.iter().map(|a| a.name.as_str()).collect();
    header.extend(SWEEP_COLUMNS);
    let mut table = Table::new(&header);
    let mut unclassified = 0usize;
    for (coords, res) in grid.iter().zip(results) {
        let (mut row, bad) = match res? {
            PointResult::Row(r) => (r, false),
            PointResult::Unclassified(r) => (r, true),
        };
        unclassified += bad as usize;
        let mut full: Vec<String> = coords.iter().map(|&v| num(v)).collect();
        full.append(&mut row);
        table.push(full);
    }
    let failure = (unclassified > 0).then(|| {
        CliError::Numerical(format!(
            "{unclassified} grid point(s) singular outside the fully symmetric |phi| = 1 configuration"
        ))
    });
    Ok(Outcome { table, failure })
}
