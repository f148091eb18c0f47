//! Experiment runners and CSV output.

use std::fmt;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::{plan_from_file, Diagnostic, Experiment, Plan, Scenario, EXIT_NUMERIC, EXIT_VALIDATION};
use crate::beamfocus::{narrowband_phases, upper_bound_solution, wideband_phases, Strategy};
use crate::channel::{build_subcarrier_channel, irs_pathloss, mimo_pathloss, pattern_factor};
use crate::error::{Error, Result};
use crate::geometry::{DistanceMode, IrsPanel};
use crate::linkmetrics::{
    energy_efficiency, irs_mimo_snr, irs_snr, mimo_snr, n_star, power_consumption, sum_rate, PowerModel,
};
use crate::powergain::{gain_from_phases, holographic_gains, narrowband_gains_discrete};

/// One CSV field.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(usize),
    Float(f64),
    Text(String),
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Int(v) => write!(f, "{v}"),
            // 17 significant digits round-trip every f64
            Cell::Float(v) => write!(f, "{v:.16e}"),
            Cell::Text(s) => f.write_str(s),
        }
    }
}

/// Header plus rows, in output order.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(|c| c.to_string())).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Directory the scenario's `output` path is resolved against.
    pub out_dir: PathBuf,
    /// Worker threads for sweep points; `None` uses all cores.
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub output: PathBuf,
    pub table: Table,
}

#[derive(Debug)]
pub enum RunError {
    Validation(Vec<Diagnostic>),
    /// A computation failed for a valid parameter set.
    Numeric { context: String, source: Error },
    Io { path: PathBuf, source: std::io::Error },
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Validation(_) => EXIT_VALIDATION,
            RunError::Numeric { .. } | RunError::Io { .. } => EXIT_NUMERIC,
        }
    }
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Validation(diags) => {
                write!(f, "{} validation error(s)", diags.len())?;
                for d in diags {
                    write!(f, "\n  {d}")?;
                }
                Ok(())
            }
            RunError::Numeric { context, source } => write!(f, "numeric failure: {source}\n  at {context}"),
            RunError::Io { path, source } => write!(f, "cannot write {}: {source}", path.display()),
        }
    }
}

impl std::error::Error for RunError {}

/// Validate, run and write the CSV for the scenario at `path`.
pub fn run_scenario(path: &Path, options: &RunOptions) -> std::result::Result<RunOutcome, RunError> {
    let plan = plan_from_file(path).map_err(RunError::Validation)?;
    let table = run_plan(&plan, options.threads)?;
    let output = options.out_dir.join(&plan.output);
    if let Some(parent) = output.parent() {
        std::fs::create_dir_all(parent).map_err(|source| RunError::Io {
            path: parent.to_path_buf(),
            source,
        })?;
    }
    std::fs::write(&output, table.to_csv()).map_err(|source| RunError::Io {
        path: output.clone(),
        source,
    })?;
    Ok(RunOutcome { output, table })
}

/// Evaluate every sweep point, rows kept in sweep order.
pub fn run_plan(plan: &Plan, threads: Option<usize>) -> std::result::Result<Table, RunError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| RunError::Numeric {
            context: "thread pool".into(),
            source: Error::InvalidArgument(e.to_string()),
        })?;
    let results: Vec<std::result::Result<Vec<Vec<Cell>>, RunError>> = pool.install(|| {
        plan.points
            .par_iter()
            .map(|point| {
                experiment_rows(&point.scenario).map_err(|source| RunError::Numeric {
                    context: match (&plan.sweep_parameter, point.value) {
                        (Some(p), Some(v)) => format!("{p} = {v}: {}", point.scenario.summary()),
                        _ => point.scenario.summary(),
                    },
                    source,
                })
            })
            .collect()
    });

    let mut header: Vec<String> = plan.sweep_parameter.iter().cloned().collect();
    header.extend(experiment_header(plan.experiment, &plan.strategies));
    let mut rows = Vec::new();
    for (point, result) in plan.points.iter().zip(results) {
        for row in result? {
            let mut full: Vec<Cell> = point.value.map(Cell::Float).into_iter().collect();
            full.extend(row);
            rows.push(full);
        }
    }
    Ok(Table { header, rows })
}

fn experiment_header(experiment: Experiment, strategies: &[Strategy]) -> Vec<String> {
    let fixed: &[&str] = match experiment {
        Experiment::GainProfile => &["subcarrier", "f_s_hz", "gain_exact", "gain_fresnel", "gain_holographic"],
        Experiment::Rates => &["strategy", "rate_bps"],
        Experiment::EnergyEfficiency => &[
            "n_star",
            "n_x",
            "n_y",
            "mimo_rate_bps",
            "mimo_power_w",
            "mimo_ee_bit_per_j",
            "irs_power_w",
        ],
    };
    let mut header: Vec<String> = fixed.iter().map(|s| s.to_string()).collect();
    match experiment {
        Experiment::GainProfile => header.extend(strategies.iter().map(|s| format!("gain_{s}"))),
        Experiment::Rates => {}
        Experiment::EnergyEfficiency => {
            for s in strategies {
                header.push(format!("irs_{s}_rate_bps"));
                header.push(format!("irs_{s}_ee_bit_per_j"));
            }
        }
    }
    header
}

fn experiment_rows(sc: &Scenario) -> Result<Vec<Vec<Cell>>> {
    match sc.experiment {
        Experiment::GainProfile => gain_profile(sc),
        Experiment::Rates => rates(sc),
        Experiment::EnergyEfficiency => energy_efficiency_point(sc),
    }
}

fn fixed_panel(sc: &Scenario) -> Result<IrsPanel> {
    let (n_x, n_y) = sc
        .panel
        .counts
        .ok_or_else(|| Error::InvalidConfig("panel element counts are required".into()))?;
    let (l_x, l_y) = sc.panel.element.dims(sc.rf.f_c);
    IrsPanel::new(n_x, n_y, l_x, l_y, sc.panel.indexing)
}

/// Normalized gain `|h_s^T b|^2 / N^2` per subcarrier for each strategy.
pub(crate) fn strategy_gains(sc: &Scenario, panel: &IrsPanel) -> Result<Vec<Vec<f64>>> {
    let channel = build_subcarrier_channel(panel, &sc.tx, &sc.rx, &sc.rf, sc.distance)?;
    let freqs = channel.freqs().to_vec();
    let n = panel.num_elements() as f64;
    sc.strategies
        .iter()
        .map(|strategy| match strategy {
            Strategy::Wideband => freqs
                .iter()
                .enumerate()
                .map(|(s, &f)| {
                    let b = wideband_phases(panel, &sc.tx, &sc.rx, sc.rf.f_c, f)?;
                    gain_from_phases(&channel.effective_column(s), b.as_slice())
                })
                .collect(),
            Strategy::Narrowband => {
                let b = narrowband_phases(panel, &sc.tx, &sc.rx, sc.rf.f_c)?;
                (0..freqs.len())
                    .map(|s| gain_from_phases(&channel.effective_column(s), b.as_slice()))
                    .collect()
            }
            Strategy::UpperBound => {
                let solution = upper_bound_solution(&channel)?;
                Ok(channel
                    .response(solution.b.as_slice())?
                    .iter()
                    .map(|h| h.norm_sqr() / (n * n))
                    .collect())
            }
        })
        .collect()
}

fn gain_profile(sc: &Scenario) -> Result<Vec<Vec<Cell>>> {
    let panel = fixed_panel(sc)?;
    let freqs = sc.rf.subcarrier_freqs();
    let exact = narrowband_gains_discrete(&panel, &sc.tx, &sc.rx, &freqs, DistanceMode::Exact)?;
    let fresnel = narrowband_gains_discrete(&panel, &sc.tx, &sc.rx, &freqs, DistanceMode::Fresnel)?;
    let holographic = holographic_gains(&panel, &sc.tx.to_spherical()?, &sc.rx.to_spherical()?, &freqs)?;
    let per_strategy = strategy_gains(sc, &panel)?;
    Ok((0..freqs.len())
        .map(|s| {
            let mut row = vec![
                Cell::Int(s),
                Cell::Float(freqs[s]),
                Cell::Float(exact[s]),
                Cell::Float(fresnel[s]),
                Cell::Float(holographic[s]),
            ];
            row.extend(per_strategy.iter().map(|g| Cell::Float(g[s])));
            row
        })
        .collect())
}

fn irs_pathlosses(sc: &Scenario, panel: &IrsPanel) -> Result<Vec<f64>> {
    let (tx, rx) = (sc.tx.to_spherical()?, sc.rx.to_spherical()?);
    sc.rf
        .subcarrier_freqs()
        .iter()
        .map(|&f| irs_pathloss(&sc.rf, &sc.absorption, panel, f, &tx, &rx))
        .collect()
}

fn rates(sc: &Scenario) -> Result<Vec<Vec<Cell>>> {
    let panel = fixed_panel(sc)?;
    let pathloss = irs_pathlosses(sc, &panel)?;
    let n = panel.num_elements() as f64;
    let gains = strategy_gains(sc, &panel)?;
    Ok(sc
        .strategies
        .iter()
        .zip(gains)
        .map(|(strategy, g)| {
            let snrs: Vec<f64> = g.iter().zip(&pathloss).map(|(&g, &pl)| irs_snr(&sc.rf, n, g, pl)).collect();
            vec![Cell::Text(strategy.name().into()), Cell::Float(sum_rate(&sc.rf, &snrs))]
        })
        .collect())
}

fn energy_efficiency_point(sc: &Scenario) -> Result<Vec<Vec<Cell>>> {
    let mimo = sc
        .mimo
        .ok_or_else(|| Error::InvalidConfig("energy_efficiency needs a [mimo] section".into()))?;
    let (tx, rx) = (sc.tx.to_spherical()?, sc.rx.to_spherical()?);
    let r_d = sc.tx.distance_to(&sc.rx);
    let factor = pattern_factor(tx.theta, rx.phi, rx.theta);
    let (l_x, l_y) = sc.panel.element.dims(sc.rf.f_c);
    let kappa = sc.absorption.kappa(sc.rf.f_c)?;
    let count = n_star(mimo.alpha, sc.rf.wavelength(), l_x, l_y, tx.r, rx.r, r_d, factor, kappa)?;
    let (n_x, n_y) = count.grid();
    let panel = IrsPanel::new(n_x, n_y, l_x, l_y, sc.panel.indexing)?;
    let power = PowerModel::new(mimo.p_ps, mimo.p_pa, sc.rf.p_t)?;
    let freqs = sc.rf.subcarrier_freqs();

    let (n_t, n_r) = (mimo.n_t as f64, mimo.n_r as f64);
    let mimo_snrs = freqs
        .iter()
        .map(|&f| Ok(mimo_snr(&sc.rf, n_t, n_r, mimo_pathloss(&sc.rf, &sc.absorption, f, r_d)?)))
        .collect::<Result<Vec<f64>>>()?;
    let mimo_rate = sum_rate(&sc.rf, &mimo_snrs);
    let mimo_power = power_consumption(&power, n_t, n_r);

    let (irs_t, irs_r) = (n_t / mimo.alpha, n_r / mimo.alpha);
    let irs_power = power_consumption(&power, irs_t, irs_r);
    let pathloss = irs_pathlosses(sc, &panel)?;
    let n = panel.num_elements() as f64;

    let mut row = vec![
        Cell::Float(count.real),
        Cell::Int(n_x),
        Cell::Int(n_y),
        Cell::Float(mimo_rate),
        Cell::Float(mimo_power),
        Cell::Float(energy_efficiency(mimo_rate, mimo_power)?),
        Cell::Float(irs_power),
    ];
    for gains in strategy_gains(sc, &panel)? {
        let snrs: Vec<f64> = gains
            .iter()
            .zip(&pathloss)
            .map(|(&g, &pl)| irs_mimo_snr(&sc.rf, irs_t, irs_r, n, g, pl))
            .collect();
        let rate = sum_rate(&sc.rf, &snrs);
        row.push(Cell::Float(rate));
        row.push(Cell::Float(energy_efficiency(rate, irs_power)?));
    }
    Ok(vec![row])
}
