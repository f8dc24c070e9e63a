//! Executes configured runs and renders plot-ready artifacts.
//!
//! Every run produces a table artifact (CSV or JSON rows) plus a JSON
//! summary that embeds the configuration, so summaries round-trip as
//! configs. Floats in CSV output use 17 significant digits; identical
//! configs produce byte-identical artifacts.

use crate::config::{ConfigError, RunConfig};
use crate::dynamics::{
    compare_effective, propagate_full, quantum_walk, walk_suppression_metric, DynamicsError,
    SYMPLECTIC_TOL,
};
use crate::model::{
    build_fermionic_kitaev_reference, build_regime_a, build_regime_b, build_regime_c_kitaev,
    build_regime_d_nnn, CouplingProfile, LatticeSpec, ModelError, ModulationParams,
    QuadraticHamiltonian, RegimeAKappas, RegimeBKappas, TimeDependentGenerator,
};
use crate::special::{bessel_j, SpecialError};
use crate::spectral::{
    bosonic_dynamical_spectrum, default_ipr_threshold, detect_edge_states, eig_hermitian,
    SpectralError, SpectrumResult, DEFAULT_EDGE_FRACTION,
};
use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::json;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RunnerError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical error: {0}")]
    Numerical(String),
}

impl RunnerError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunnerError::Config(_) => 2,
            RunnerError::Numerical(_) => 3,
        }
    }
}

impl From<ConfigError> for RunnerError {
    fn from(e: ConfigError) -> Self {
        RunnerError::Config(e.to_string())
    }
}
impl From<ModelError> for RunnerError {
    fn from(e: ModelError) -> Self {
        RunnerError::Config(e.to_string())
    }
}
impl From<SpecialError> for RunnerError {
    fn from(e: SpecialError) -> Self {
        RunnerError::Config(e.to_string())
    }
}
impl From<SpectralError> for RunnerError {
    fn from(e: SpectralError) -> Self {
        RunnerError::Numerical(e.to_string())
    }
}
impl From<DynamicsError> for RunnerError {
    fn from(e: DynamicsError) -> Self {
        RunnerError::Numerical(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(format!("format must be csv or json, got {other:?}")),
        }
    }
}

/// A rendered output file, ready to be written under the output directory.
#[derive(Debug, Clone)]
pub struct Artifact {
    pub filename: String,
    pub contents: String,
}

/// 17 significant digits, enough for exact f64 round-trip.
fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n)
        .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
        .collect()
}

fn summary_json(value: serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(&value).expect("summary serialization");
    s.push('\n');
    s
}

/// Builds the effective quadratic Hamiltonian for regimes A-D.
pub fn build_hamiltonian(cfg: &RunConfig) -> Result<QuadraticHamiltonian, RunnerError> {
    let spec = LatticeSpec::with_total_sites(cfg.total_sites)?;
    match cfg.regime.as_str() {
        "A" => {
            let gl = cfg.require_f64("g_left", cfg.g_left)?;
            let gr = cfg.require_f64("g_right", cfg.g_right)?;
            let couplings =
                CouplingProfile::uniform(&spec, gl, gr, cfg.t_cavity.unwrap_or(0.0))?;
            let kappas = RegimeAKappas::uniform(
                &spec,
                cfg.kappa1.unwrap_or(0.0),
                cfg.kappa2.unwrap_or(0.0),
                cfg.kappa3.unwrap_or(0.0),
                cfg.kappa4.unwrap_or(0.0),
            );
            Ok(build_regime_a(
                &spec,
                &couplings,
                &kappas,
                cfg.residual_stokes.unwrap_or(false),
            )?)
        }
        "B" => {
            let gl = cfg.require_f64("g_left", cfg.g_left)?;
            let gr = cfg.require_f64("g_right", cfg.g_right)?;
            let couplings =
                CouplingProfile::uniform(&spec, gl, gr, cfg.t_cavity.unwrap_or(0.0))?;
            let kappas = RegimeBKappas::uniform(
                &spec,
                cfg.kappa1.unwrap_or(0.0),
                cfg.kappa2.unwrap_or(0.0),
            );
            Ok(build_regime_b(
                &spec,
                &couplings,
                &kappas,
                cfg.residual_stokes.unwrap_or(false),
            )?)
        }
        "C" => {
            let g_c = cfg.require_f64("g_c", cfg.g_c)?;
            let pl = cfg.require_f64("pairing_left", cfg.pairing_left)?;
            let pr = cfg.require_f64("pairing_right", cfg.pairing_right)?;
            Ok(build_regime_c_kitaev(&spec, g_c, pl, pr)?)
        }
        "D" => {
            let gl = cfg.require_f64("g_left", cfg.g_left)?;
            let gr = cfg.require_f64("g_right", cfg.g_right)?;
            let couplings = CouplingProfile::uniform(&spec, gl, gr, 0.0)?;
            let t_eff = cfg.require_f64("t_eff", cfg.t_eff)?;
            Ok(build_regime_d_nnn(&spec, &couplings, t_eff)?)
        }
        other => Err(RunnerError::Config(format!(
            "regime {other:?} has no effective Hamiltonian builder"
        ))),
    }
}

fn kitaev_bdg_complex(cfg: &RunConfig) -> Result<Array2<Complex64>, RunnerError> {
    let t = cfg.require_f64("t_hop", cfg.t_hop)?;
    let d = cfg.require_f64("delta", cfg.delta)?;
    let bdg = build_fermionic_kitaev_reference(cfg.total_sites, t, d)?;
    Ok(bdg.mapv(|x| Complex64::new(x, 0.0)))
}

/// Gap window for edge detection: configured value, or half the bulk gap
/// estimated from the first two bond magnitudes of the hopping matrix.
fn gap_window_for(cfg: &RunConfig, hopping: &Array2<Complex64>) -> f64 {
    if let Some(g) = cfg.gap_window {
        return g;
    }
    if cfg.regime == "kitaev-fermion" {
        let (t, d) = (
            cfg.t_hop.unwrap_or(0.0).abs(),
            cfg.delta.unwrap_or(0.0).abs(),
        );
        return t.min(d);
    }
    if hopping.nrows() < 3 {
        return 0.0;
    }
    let v = hopping[[0, 1]].norm();
    let w = hopping[[1, 2]].norm();
    crate::spectral::default_gap_window(v, w)
}

struct SpectrumRow {
    index: usize,
    energy: Complex64,
    ipr: f64,
    side: String,
}

struct SpectrumData {
    rows: Vec<SpectrumRow>,
    num_in_gap: usize,
    gap_window: f64,
}

fn spectrum_data(cfg: &RunConfig) -> Result<SpectrumData, RunnerError> {
    let (result, hopping): (SpectrumResult, Array2<Complex64>) =
        if cfg.regime == "kitaev-fermion" {
            let h = kitaev_bdg_complex(cfg)?;
            (eig_hermitian(&h)?, h)
        } else {
            let h = build_hamiltonian(cfg)?;
            if h.is_pairing_free(crate::model::MATRIX_SYMMETRY_TOL) {
                (eig_hermitian(h.hopping())?, h.hopping().clone())
            } else {
                (
                    bosonic_dynamical_spectrum(&h)?,
                    h.hopping().clone(),
                )
            }
        };

    let gap_window = gap_window_for(cfg, &hopping);
    let m = result.eigenvectors.nrows();
    let mut sides = vec![String::new(); result.eigenvalues.len()];
    let mut num_in_gap = 0;
    // side labels only apply to real spectra; skip them when the dynamical
    // spectrum carries imaginary parts
    let real_spectrum = result
        .eigenvalues
        .iter()
        .all(|e| e.im.abs() <= 1e-9 * (1.0 + e.norm()));
    if real_spectrum && gap_window > 0.0 {
        let report = detect_edge_states(
            &result,
            gap_window,
            cfg.ipr_threshold.unwrap_or_else(|| default_ipr_threshold(m)),
            cfg.edge_fraction.unwrap_or(DEFAULT_EDGE_FRACTION),
        )?;
        num_in_gap = report.states.len();
        for s in &report.states {
            sides[s.index] = s.side.to_string();
        }
    }

    let rows = result
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(i, e)| SpectrumRow {
            index: i,
            energy: *e,
            ipr: result.metadata[i].ipr,
            side: sides[i].clone(),
        })
        .collect();
    Ok(SpectrumData {
        rows,
        num_in_gap,
        gap_window,
    })
}

fn spectrum_table(data: &SpectrumData, sweep_value: Option<f64>, format: OutputFormat) -> String {
    match format {
        OutputFormat::Csv => {
            let mut out = String::new();
            for r in &data.rows {
                if let Some(v) = sweep_value {
                    out.push_str(&fmt_f64(v));
                    out.push(',');
                }
                out.push_str(&format!(
                    "{},{},{},{},{}\n",
                    r.index,
                    fmt_f64(r.energy.re),
                    fmt_f64(r.energy.im),
                    fmt_f64(r.ipr),
                    r.side
                ));
            }
            out
        }
        OutputFormat::Json => {
            let rows: Vec<serde_json::Value> = data
                .rows
                .iter()
                .map(|r| {
                    let mut obj = json!({
                        "index": r.index,
                        "energy_re": r.energy.re,
                        "energy_im": r.energy.im,
                        "ipr": r.ipr,
                        "side": r.side,
                    });
                    if let Some(v) = sweep_value {
                        obj["sweep_value"] = json!(v);
                    }
                    rows_sorted(&mut obj);
                    obj
                })
                .collect();
            serde_json::to_string_pretty(&rows).expect("row serialization")
        }
    }
}

// serde_json's default map is ordered; this hook exists so csv/json stay in
// lockstep if that ever changes
fn rows_sorted(_v: &mut serde_json::Value) {}

const SPECTRUM_HEADER: &str = "index,energy_re,energy_im,ipr,side\n";
const SWEEP_HEADER: &str = "sweep_value,index,energy_re,energy_im,ipr,side\n";

pub fn run_spectrum(cfg: &RunConfig, format: OutputFormat) -> Result<Vec<Artifact>, RunnerError> {
    if cfg.has_sweep() {
        return Err(RunnerError::Config(
            "spectrum does not take a sweep axis; use the sweep command".to_string(),
        ));
    }
    let data = spectrum_data(cfg)?;
    let table = match format {
        OutputFormat::Csv => Artifact {
            filename: "spectrum.csv".to_string(),
            contents: format!("{SPECTRUM_HEADER}{}", spectrum_table(&data, None, format)),
        },
        OutputFormat::Json => Artifact {
            filename: "spectrum.json".to_string(),
            contents: spectrum_table(&data, None, format) + "\n",
        },
    };
    let summary = Artifact {
        filename: "spectrum_summary.json".to_string(),
        contents: summary_json(json!({
            "run": "spectrum",
            "num_eigenvalues": data.rows.len(),
            "num_in_gap": data.num_in_gap,
            "gap_window": data.gap_window,
            "config": cfg,
        })),
    };
    Ok(vec![table, summary])
}

/// Sets the swept parameter on a copy of the config.
fn apply_sweep(cfg: &RunConfig, name: &str, value: f64) -> Result<RunConfig, RunnerError> {
    let mut c = cfg.clone();
    match name {
        "g_left" => c.g_left = Some(value),
        "g_right" => c.g_right = Some(value),
        "t_cavity" => c.t_cavity = Some(value),
        "kappa1" => c.kappa1 = Some(value),
        "kappa2" => c.kappa2 = Some(value),
        "kappa3" => c.kappa3 = Some(value),
        "kappa4" => c.kappa4 = Some(value),
        "g_c" => c.g_c = Some(value),
        "pairing_left" => c.pairing_left = Some(value),
        "pairing_right" => c.pairing_right = Some(value),
        "t_eff" => c.t_eff = Some(value),
        "t_hop" => c.t_hop = Some(value),
        "delta" => c.delta = Some(value),
        other => {
            return Err(RunnerError::Config(format!(
                "unknown sweep parameter {other:?}"
            )))
        }
    }
    Ok(c)
}

pub fn run_sweep(
    cfg: &RunConfig,
    format: OutputFormat,
    jobs: Option<usize>,
) -> Result<Vec<Artifact>, RunnerError> {
    let name = cfg
        .sweep_parameter
        .clone()
        .ok_or_else(|| RunnerError::Config("sweep requires a sweep axis".to_string()))?;
    let values = linspace(
        cfg.sweep_start.expect("validated sweep axis"),
        cfg.sweep_stop.expect("validated sweep axis"),
        cfg.sweep_points.expect("validated sweep axis"),
    );

    let compute = || -> Result<Vec<SpectrumData>, RunnerError> {
        values
            .par_iter()
            .map(|&v| spectrum_data(&apply_sweep(cfg, &name, v)?))
            .collect()
    };
    // output order follows the sweep index regardless of completion order
    let blocks = match jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| RunnerError::Numerical(e.to_string()))?
            .install(compute),
        None => compute(),
    }?;

    let table = match format {
        OutputFormat::Csv => {
            let mut out = String::from(SWEEP_HEADER);
            for (v, data) in values.iter().zip(&blocks) {
                out.push_str(&spectrum_table(data, Some(*v), format));
            }
            Artifact {
                filename: "sweep.csv".to_string(),
                contents: out,
            }
        }
        OutputFormat::Json => {
            let mut rows = Vec::new();
            for (v, data) in values.iter().zip(&blocks) {
                let block: Vec<serde_json::Value> =
                    serde_json::from_str(&spectrum_table(data, Some(*v), format))
                        .expect("row serialization");
                rows.extend(block);
            }
            Artifact {
                filename: "sweep.json".to_string(),
                contents: serde_json::to_string_pretty(&rows).expect("row serialization") + "\n",
            }
        }
    };
    let summary = Artifact {
        filename: "sweep_summary.json".to_string(),
        contents: summary_json(json!({
            "run": "sweep",
            "sweep_parameter": name,
            "sweep_values": values,
            "num_in_gap": blocks.iter().map(|b| b.num_in_gap).collect::<Vec<_>>(),
            "config": cfg,
        })),
    };
    Ok(vec![table, summary])
}

pub fn run_edge_states(
    cfg: &RunConfig,
    format: OutputFormat,
) -> Result<Vec<Artifact>, RunnerError> {
    let h = build_hamiltonian(cfg)?;
    if !h.is_pairing_free(crate::model::MATRIX_SYMMETRY_TOL) {
        return Err(RunnerError::Config(
            "edge-states requires a pairing-free configuration".to_string(),
        ));
    }
    let result = eig_hermitian(h.hopping())?;
    let m = result.eigenvectors.nrows();
    let gap_window = gap_window_for(cfg, h.hopping());
    let report = detect_edge_states(
        &result,
        gap_window,
        cfg.ipr_threshold.unwrap_or_else(|| default_ipr_threshold(m)),
        cfg.edge_fraction.unwrap_or(DEFAULT_EDGE_FRACTION),
    )?;

    let table = match format {
        OutputFormat::Csv => {
            let mut out = String::from("index,energy,side,ipr,localization_length\n");
            for s in &report.states {
                out.push_str(&format!(
                    "{},{},{},{},{}\n",
                    s.index,
                    fmt_f64(s.energy),
                    s.side,
                    fmt_f64(s.ipr),
                    fmt_f64(s.localization_length)
                ));
            }
            Artifact {
                filename: "edge_states.csv".to_string(),
                contents: out,
            }
        }
        OutputFormat::Json => {
            let rows: Vec<serde_json::Value> = report
                .states
                .iter()
                .map(|s| {
                    json!({
                        "index": s.index,
                        "energy": s.energy,
                        "side": s.side.to_string(),
                        "ipr": s.ipr,
                        "localization_length": s.localization_length,
                    })
                })
                .collect();
            Artifact {
                filename: "edge_states.json".to_string(),
                contents: serde_json::to_string_pretty(&rows).expect("row serialization") + "\n",
            }
        }
    };
    let states: Vec<serde_json::Value> = report
        .states
        .iter()
        .map(|s| {
            json!({
                "index": s.index,
                "energy": s.energy,
                "side": s.side.to_string(),
                "profile": s.profile,
            })
        })
        .collect();
    let summary = Artifact {
        filename: "edge_states_summary.json".to_string(),
        contents: summary_json(json!({
            "run": "edge-states",
            "num_edge_states": report.states.len(),
            "gap_window": gap_window,
            "states": states,
            "config": cfg,
        })),
    };
    Ok(vec![table, summary])
}

pub fn run_walk(cfg: &RunConfig, format: OutputFormat) -> Result<Vec<Artifact>, RunnerError> {
    let h = build_hamiltonian(cfg)?;
    if !h.is_pairing_free(crate::model::MATRIX_SYMMETRY_TOL) {
        return Err(RunnerError::Config(
            "walk requires a pairing-free configuration".to_string(),
        ));
    }
    let t_max = cfg.require_f64("t_max", cfg.t_max)?;
    let num_times = cfg.num_times.unwrap_or(201);
    if num_times < 2 {
        return Err(RunnerError::Config(format!(
            "num_times must be at least 2, got {num_times}"
        )));
    }
    let times = linspace(0.0, t_max, num_times);
    let initial_site = cfg.initial_site.unwrap_or(0);
    let record = quantum_walk(h.hopping(), initial_site, &times)?;
    let window = (
        cfg.window_start.unwrap_or(0.0),
        cfg.window_end.unwrap_or(t_max),
    );
    let metric = walk_suppression_metric(&record, window)?;

    let table = match format {
        OutputFormat::Csv => {
            let mut out = String::from("time,site,probability\n");
            for (ti, &t) in record.times.iter().enumerate() {
                for site in 0..record.probabilities.ncols() {
                    out.push_str(&format!(
                        "{},{},{}\n",
                        fmt_f64(t),
                        site,
                        fmt_f64(record.probabilities[[ti, site]])
                    ));
                }
            }
            Artifact {
                filename: "walk.csv".to_string(),
                contents: out,
            }
        }
        OutputFormat::Json => {
            let mut rows = Vec::new();
            for (ti, &t) in record.times.iter().enumerate() {
                for site in 0..record.probabilities.ncols() {
                    rows.push(json!({
                        "time": t,
                        "site": site,
                        "probability": record.probabilities[[ti, site]],
                    }));
                }
            }
            Artifact {
                filename: "walk.json".to_string(),
                contents: serde_json::to_string_pretty(&rows).expect("row serialization") + "\n",
            }
        }
    };
    let summary = Artifact {
        filename: "walk_summary.json".to_string(),
        contents: summary_json(json!({
            "run": "walk",
            "initial_site": initial_site,
            "window": [window.0, window.1],
            "suppression_metric": metric,
            "config": cfg,
        })),
    };
    Ok(vec![table, summary])
}

pub fn run_kitaev(cfg: &RunConfig, format: OutputFormat) -> Result<Vec<Artifact>, RunnerError> {
    let h = kitaev_bdg_complex(cfg)?;
    let result = eig_hermitian(&h)?;
    let energies: Vec<f64> = result.eigenvalues.iter().map(|e| e.re).collect();
    let band = energies.iter().fold(0.0f64, |a, e| a.max(e.abs()));
    let zero_tol = 1e-6 * band;
    let zero_modes = energies.iter().filter(|e| e.abs() < zero_tol).count();
    // distance from the Majorana pair to the band edge, 2 min(t, delta)
    let gap = energies
        .iter()
        .map(|e| e.abs())
        .filter(|a| *a >= zero_tol)
        .fold(f64::INFINITY, f64::min);

    let table = match format {
        OutputFormat::Csv => {
            let mut out = String::from("index,energy\n");
            for (i, e) in energies.iter().enumerate() {
                out.push_str(&format!("{},{}\n", i, fmt_f64(*e)));
            }
            Artifact {
                filename: "kitaev.csv".to_string(),
                contents: out,
            }
        }
        OutputFormat::Json => {
            let rows: Vec<serde_json::Value> = energies
                .iter()
                .enumerate()
                .map(|(i, e)| json!({"index": i, "energy": e}))
                .collect();
            Artifact {
                filename: "kitaev.json".to_string(),
                contents: serde_json::to_string_pretty(&rows).expect("row serialization") + "\n",
            }
        }
    };
    let summary = Artifact {
        filename: "kitaev_summary.json".to_string(),
        contents: summary_json(json!({
            "run": "kitaev",
            "num_eigenvalues": energies.len(),
            "num_zero_modes": zero_modes,
            "gap": gap,
            "config": cfg,
        })),
    };
    Ok(vec![table, summary])
}

/// Full time-dependent integration against the resonant effective model for
/// each requested modulation frequency.
pub fn run_validate(cfg: &RunConfig, format: OutputFormat) -> Result<Vec<Artifact>, RunnerError> {
    let spec = LatticeSpec::with_total_sites(cfg.total_sites)?;
    let gl = cfg.require_f64("g_left", cfg.g_left)?;
    let gr = cfg.require_f64("g_right", cfg.g_right)?;
    let lambda = cfg.require_f64("lambda", cfg.lambda)?;
    let gamma = cfg.require_f64("gamma", cfg.gamma)?;
    let t_end = cfg.require_f64("t_end", cfg.t_end)?;
    let nu_list = cfg
        .nu_list
        .clone()
        .ok_or(ConfigError::MissingKey("nu_list"))?;
    if nu_list.is_empty() {
        return Err(RunnerError::Config("nu_list must not be empty".to_string()));
    }
    let num_times = cfg.num_times.unwrap_or(8);
    if num_times == 0 {
        return Err(RunnerError::Config("num_times must be positive".to_string()));
    }
    let phi = cfg.phi.unwrap_or(0.0);
    let couplings = CouplingProfile::uniform(&spec, gl, gr, cfg.t_cavity.unwrap_or(0.0))?;

    // effective model: time-averaged hopping -G_n J0(k1) / +G_{n+1} J0(k1)
    let j0 = bessel_j(0, lambda - gamma)?;
    let eff_couplings =
        CouplingProfile::uniform(&spec, gl * j0, gr * j0, cfg.t_cavity.unwrap_or(0.0))?;
    let h_eff = build_regime_b(
        &spec,
        &eff_couplings,
        &RegimeBKappas::uniform(&spec, 0.0, 0.0),
        false,
    )?;

    let sample_times: Vec<f64> = (1..=num_times)
        .map(|i| t_end * i as f64 / num_times as f64)
        .collect();

    let mut rows: Vec<(f64, f64, f64)> = Vec::new();
    let mut eps_end = Vec::new();
    for &nu in &nu_list {
        let params = ModulationParams::uniform(&spec, lambda, gamma, nu, phi, nu, nu)?;
        let gen = TimeDependentGenerator::new(params, couplings.clone(), spec)?;
        let record = propagate_full(&gen, &sample_times, SYMPLECTIC_TOL)?;
        let devs = compare_effective(&record, h_eff.hopping())?;
        for (t, eps) in &devs {
            rows.push((nu, *t, *eps));
        }
        eps_end.push(devs.last().expect("nonempty sample grid").1);
    }

    // least-squares slope of ln eps(t_end) against ln nu
    let decay_exponent = if nu_list.len() >= 2 && eps_end.iter().all(|e| *e > 0.0) {
        let xs: Vec<f64> = nu_list.iter().map(|n| n.ln()).collect();
        let ys: Vec<f64> = eps_end.iter().map(|e| e.ln()).collect();
        let n = xs.len() as f64;
        let (sx, sy) = (xs.iter().sum::<f64>(), ys.iter().sum::<f64>());
        let sxx = xs.iter().map(|x| x * x).sum::<f64>();
        let sxy = xs.iter().zip(&ys).map(|(x, y)| x * y).sum::<f64>();
        let denom = n * sxx - sx * sx;
        if denom.abs() > 1e-30 {
            Some((n * sxy - sx * sy) / denom)
        } else {
            None
        }
    } else {
        None
    };

    let table = match format {
        OutputFormat::Csv => {
            let mut out = String::from("nu,time,epsilon\n");
            for (nu, t, eps) in &rows {
                out.push_str(&format!(
                    "{},{},{}\n",
                    fmt_f64(*nu),
                    fmt_f64(*t),
                    fmt_f64(*eps)
                ));
            }
            Artifact {
                filename: "validate.csv".to_string(),
                contents: out,
            }
        }
        OutputFormat::Json => {
            let json_rows: Vec<serde_json::Value> = rows
                .iter()
                .map(|(nu, t, eps)| json!({"nu": nu, "time": t, "epsilon": eps}))
                .collect();
            Artifact {
                filename: "validate.json".to_string(),
                contents: serde_json::to_string_pretty(&json_rows).expect("row serialization")
                    + "\n",
            }
        }
    };
    let summary = Artifact {
        filename: "validate_summary.json".to_string(),
        contents: summary_json(json!({
            "run": "validate",
            "nu_list": nu_list,
            "epsilon_at_t_end": eps_end,
            "decay_exponent": decay_exponent,
            "config": cfg,
        })),
    };
    Ok(vec![table, summary])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg_b(l: usize) -> RunConfig {
        RunConfig::parse(&format!(
            "regime = B\ntotal_sites = {l}\ng_left = -0.25\ng_right = 0.5\n"
        ))
        .unwrap()
    }

    #[test]
    fn spectrum_rows_and_zero_modes() {
        let arts = run_spectrum(&cfg_b(100), OutputFormat::Csv).unwrap();
        let table = &arts[0].contents;
        let rows: Vec<&str> = table.lines().skip(1).collect();
        assert_eq!(rows.len(), 100);
        let near_zero = rows
            .iter()
            .filter(|r| {
                let e: f64 = r.split(',').nth(1).unwrap().parse().unwrap();
                e.abs() < 1e-6
            })
            .count();
        assert_eq!(near_zero, 2);
        let summary: serde_json::Value = serde_json::from_str(&arts[1].contents).unwrap();
        assert_eq!(summary["num_in_gap"], 2);
    }

    #[test]
    fn regime_c_emits_doubled_spectrum() {
        let cfg = RunConfig::parse(
            "regime = C\ntotal_sites = 100\ng_c = 0.5\npairing_left = 0.2\npairing_right = 0.2\n",
        )
        .unwrap();
        let arts = run_spectrum(&cfg, OutputFormat::Csv).unwrap();
        assert_eq!(arts[0].contents.lines().count() - 1, 200);
    }

    #[test]
    fn trivial_dimer_rows() {
        let cfg = RunConfig::parse("regime = B\ntotal_sites = 2\ng_left = -0.3\ng_right = 0.1\n")
            .unwrap();
        let arts = run_spectrum(&cfg, OutputFormat::Csv).unwrap();
        let energies: Vec<f64> = arts[0]
            .contents
            .lines()
            .skip(1)
            .map(|r| r.split(',').nth(1).unwrap().parse().unwrap())
            .collect();
        assert!((energies[0] + 0.3).abs() < 1e-12);
        assert!((energies[1] - 0.3).abs() < 1e-12);
    }

    #[test]
    fn walk_zero_hamiltonian_stays_put() {
        let mut cfg = cfg_b(10);
        cfg.g_left = Some(0.0);
        cfg.g_right = Some(0.0);
        cfg.t_max = Some(5.0);
        cfg.num_times = Some(11);
        let arts = run_walk(&cfg, OutputFormat::Csv).unwrap();
        let summary: serde_json::Value = serde_json::from_str(&arts[1].contents).unwrap();
        assert!((summary["suppression_metric"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn validate_zero_couplings_zero_eps() {
        let cfg = RunConfig::parse(
            "regime = B\ntotal_sites = 4\ng_left = 0\ng_right = 0\nlambda = 1\ngamma = 1\n\
             nu_list = 10, 20\nt_end = 2\nnum_times = 2\n",
        )
        .unwrap();
        let arts = run_validate(&cfg, OutputFormat::Csv).unwrap();
        for row in arts[0].contents.lines().skip(1) {
            let eps: f64 = row.split(',').nth(2).unwrap().parse().unwrap();
            assert!(eps.abs() < 1e-12, "eps {eps}");
        }
        let summary: serde_json::Value = serde_json::from_str(&arts[1].contents).unwrap();
        assert!(summary["decay_exponent"].is_null());
    }

    #[test]
    fn sweep_is_ordered_and_deterministic() {
        let mut cfg = cfg_b(10);
        cfg.sweep_parameter = Some("g_right".to_string());
        cfg.sweep_start = Some(0.1);
        cfg.sweep_stop = Some(0.5);
        cfg.sweep_points = Some(5);
        let a = run_sweep(&cfg, OutputFormat::Csv, Some(4)).unwrap();
        let b = run_sweep(&cfg, OutputFormat::Csv, Some(1)).unwrap();
        assert_eq!(a[0].contents, b[0].contents);
        assert_eq!(a[1].contents, b[1].contents);
        let first: f64 = a[0]
            .contents
            .lines()
            .nth(1)
            .unwrap()
            .split(',')
            .next()
            .unwrap()
            .parse()
            .unwrap();
        assert!((first - 0.1).abs() < 1e-15);
    }

    #[test]
    fn error_exit_codes() {
        let mut cfg = cfg_b(10);
        cfg.g_right = None;
        let err = run_spectrum(&cfg, OutputFormat::Csv).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }
}
