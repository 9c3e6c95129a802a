//! Subcommand implementations: single runs, sweeps, method comparisons and
//! the figure-reproduction recipes with their acceptance gates.

use crate::output::{csv, RunDir};
use crate::plot::{heatmap, line_plot, PlotOptions, Series};
use crate::recipe::{GateReport, RecipeFile};
use attostm_core::config::{RawConfig, RunConfig, SpectrumConfig};
use attostm_core::error::CoreError;
use attostm_core::flux::{
    self, direct_run, direct_spectrum, flux_balance, flux_spectrum, net_current, FluxOptions,
};
use attostm_core::junction::solve_initial_state;
use attostm_core::pulse::Waveform;
use attostm_core::saddle::{self, solve_saddles, travel_time_asymptotics};
use attostm_core::sfa::sfa_spectrum;
use attostm_core::tdse::{self, PropagateOptions};
use attostm_core::units;
use attostm_core::{JunctionConfig, Spectrum};
use serde_json::json;
use std::path::Path;
use std::time::Instant;

/// Command failure classified by exit code: 2 config, 3 solver, 4 gate.
#[derive(Debug)]
pub enum CmdError {
    Config(String),
    Solver(String),
    Gate(String),
}

impl CmdError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CmdError::Config(_) => 2,
            CmdError::Solver(_) => 3,
            CmdError::Gate(_) => 4,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CmdError::Config(m) | CmdError::Solver(m) | CmdError::Gate(m) => m,
        }
    }
}

impl From<CoreError> for CmdError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Config(_) | CoreError::Input(_) => CmdError::Config(e.to_string()),
            _ => CmdError::Solver(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CmdError {
    fn from(e: std::io::Error) -> Self {
        CmdError::Solver(format!("io error: {e}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ScanAxis {
    Field,
    Width,
    Cep,
    Duration,
    Energy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Method {
    Tdse,
    Flux,
    Sfa,
}

fn load(config: &Path) -> Result<(RawConfig, RunConfig), CmdError> {
    let text = std::fs::read_to_string(config)
        .map_err(|e| CmdError::Config(format!("cannot read {}: {e}", config.display())))?;
    let raw: RawConfig =
        toml::from_str(&text).map_err(|e| CmdError::Config(format!("{}: {e}", config.display())))?;
    let cfg = RunConfig::from_raw(&raw)?;
    Ok((raw, cfg))
}

fn spectrum_svg(spectra: &[&Spectrum], title: &str) -> String {
    let series: Vec<Series> = spectra
        .iter()
        .map(|s| Series {
            label: s.method.clone(),
            xs: s.energies.iter().map(|&e| units::au_to_ev(e)).collect(),
            ys: s.values.clone(),
        })
        .collect();
    line_plot(
        &series,
        &PlotOptions {
            title: title.to_string(),
            x_label: "energy (eV)".into(),
            y_label: "log10 probability density".into(),
            log_y: true,
            ..Default::default()
        },
    )
}

/// Spectrum of one method, shared by scan/compare/net-current paths.
fn method_spectrum(
    method: Method,
    cfg: &RunConfig,
    junction: &JunctionConfig,
    waveform: &Waveform,
) -> Result<Spectrum, CoreError> {
    let energies = cfg.spectrum.energies();
    let e0 = -junction.work_tip;
    match method {
        Method::Tdse => direct_spectrum(junction, &cfg.grid, waveform, e0, &energies),
        Method::Flux => flux_spectrum(
            junction,
            &cfg.grid,
            waveform,
            e0,
            &energies,
            &FluxOptions::default(),
        ),
        Method::Sfa => {
            let state = solve_initial_state(junction, e0)?;
            sfa_spectrum(&energies, &state, junction, waveform, &cfg.sfa)
        }
    }
}

// ---------------------------------------------------------------------------
// Single-run subcommands
// ---------------------------------------------------------------------------

pub fn cmd_tdse(config: &Path, out: &Path) -> Result<(), CmdError> {
    let (raw, cfg) = load(config)?;
    let mut dir = RunDir::create(out)?;
    dir.write_config_snapshot(&raw)?;
    let wf = Waveform::gaussian(&cfg.pulse);
    let n_steps = ((wf.t_max - wf.t_min) / cfg.grid.dt).round() as usize;
    let grid = attostm_core::SpatialGrid::for_junction(&cfg.grid, &cfg.junction)?;
    let opts = PropagateOptions {
        record_boundary: true,
        map_strides: Some(((n_steps / 240).max(1), (grid.n_points / 240).max(1))),
    };
    let t0 = Instant::now();
    let run = direct_run(&cfg.junction, &cfg.grid, &wf, -cfg.junction.work_tip, &opts)?;
    let phase = tdse::cn_phase(run.init.energy, cfg.grid.dt, run.n_steps);
    let spectrum = tdse::project_spectrum(
        &run.out.state,
        &run.init.field,
        phase,
        &cfg.junction,
        &cfg.spectrum.energies(),
    )?;
    let wall = t0.elapsed().as_secs_f64();

    dir.write_spectrum_csv("spectrum.csv", &spectrum)?;
    dir.write("spectrum.svg", &spectrum_svg(&[&spectrum], "direct TDSE tunneling spectrum"))?;

    let trace = run.out.boundary.as_ref().expect("boundary recording was requested");
    dir.write(
        "boundary_current.csv",
        &csv(
            "t_fs,j_tip_atomic,j_sample_atomic",
            trace.times.iter().zip(trace.j_tip.iter().zip(&trace.j_sample)).map(
                |(t, (jt, js))| format!("{:.6},{:.9e},{:.9e}", units::au_to_fs(*t), jt, js),
            ),
        ),
    )?;
    if let Some(map) = run.out.map.as_ref() {
        let mut rows = Vec::with_capacity(map.times.len() * map.xs.len());
        for (it, t) in map.times.iter().enumerate() {
            for (ix, x) in map.xs.iter().enumerate() {
                rows.push(format!(
                    "{:.6},{:.5},{:.6e}",
                    units::au_to_fs(*t),
                    units::au_to_nm(*x),
                    map.values[it * map.xs.len() + ix]
                ));
            }
        }
        dir.write("current_map.csv", &csv("t_fs,x_nm,j_atomic", rows))?;
        dir.write(
            "current_map.svg",
            &heatmap(
                &map.times.iter().map(|&t| units::au_to_fs(t)).collect::<Vec<_>>(),
                &map.xs.iter().map(|&x| units::au_to_nm(x)).collect::<Vec<_>>(),
                &map.values,
                &PlotOptions {
                    title: "probability current j(x, t)".into(),
                    x_label: "t (fs)".into(),
                    y_label: "x (nm)".into(),
                    ..Default::default()
                },
            ),
        )?;
    }
    let mut start = run.init.field.clone();
    start.time = wf.t_min;
    let balance = flux_balance(&start, &run.out.state, trace);
    let norm0 = start.norm_sqr();
    dir.write_json(
        "run.json",
        &json!({
            "method": "tdse",
            "initial_energy_eV": units::au_to_ev(run.init.energy),
            "norm_drift": (run.out.state.norm_sqr() - norm0).abs() / norm0,
            "edge_ratio": run.out.state.edge_ratio(),
            "flux_balance": balance,
            "transmitted_probability": spectrum.integral(),
            "wall_time_s": wall,
            "content_hash": dir.content_hash(),
        }),
    )?;
    Ok(())
}

pub fn cmd_flux(config: &Path, out: &Path) -> Result<(), CmdError> {
    let (raw, cfg) = load(config)?;
    let mut dir = RunDir::create(out)?;
    dir.write_config_snapshot(&raw)?;
    let wf = Waveform::gaussian(&cfg.pulse);
    let t0 = Instant::now();
    let spectrum = method_spectrum(Method::Flux, &cfg, &cfg.junction, &wf)?;
    dir.write_spectrum_csv("spectrum.csv", &spectrum)?;
    dir.write("spectrum.svg", &spectrum_svg(&[&spectrum], "flux-form tunneling spectrum"))?;
    dir.write_json(
        "run.json",
        &json!({
            "method": "flux",
            "transmitted_probability": spectrum.integral(),
            "wall_time_s": t0.elapsed().as_secs_f64(),
            "content_hash": dir.content_hash(),
        }),
    )?;
    Ok(())
}

pub fn cmd_sfa(config: &Path, out: &Path) -> Result<(), CmdError> {
    let (raw, cfg) = load(config)?;
    let mut dir = RunDir::create(out)?;
    dir.write_config_snapshot(&raw)?;
    let wf = Waveform::gaussian(&cfg.pulse);
    let t0 = Instant::now();
    let spectrum = method_spectrum(Method::Sfa, &cfg, &cfg.junction, &wf)?;
    dir.write_spectrum_csv("spectrum.csv", &spectrum)?;
    dir.write("spectrum.svg", &spectrum_svg(&[&spectrum], "SFA tunneling spectrum"))?;
    dir.write_json(
        "run.json",
        &json!({
            "method": "sfa",
            "quad": cfg.sfa,
            "transmitted_probability": spectrum.integral(),
            "wall_time_s": t0.elapsed().as_secs_f64(),
            "content_hash": dir.content_hash(),
        }),
    )?;
    Ok(())
}

pub fn cmd_saddle(config: &Path, out: &Path) -> Result<(), CmdError> {
    let (raw, cfg) = load(config)?;
    let mut dir = RunDir::create(out)?;
    dir.write_config_snapshot(&raw)?;
    // saddle analysis uses the CW-plus-static continuation of the pulse
    let wf = Waveform::cw(&cfg.pulse);
    let e0 = -cfg.junction.work_tip;
    let energies: Vec<f64> =
        cfg.spectrum.energies().into_iter().filter(|&e| e > 0.0).collect();
    if energies.len() < 2 {
        return Err(CmdError::Config("saddle analysis needs a positive energy grid".into()));
    }

    let mut saddle_rows = Vec::new();
    let mut tt_rows = Vec::new();
    let mut e_axis = Vec::new();
    let mut im_exact = Vec::new();
    let mut im_low = Vec::new();
    let mut im_high = Vec::new();
    for &e in &energies {
        let sols = solve_saddles(e, e0, &cfg.junction, &wf)?;
        for s in &sols {
            saddle_rows.push(format!(
                "{:.6},{:.4},{:.4},{:.4},{:.4},{:.8},{:.8},{},{}",
                units::au_to_ev(e),
                units::au_to_as(s.t1s.re),
                units::au_to_as(s.t1s.im),
                units::au_to_as(s.t2s.re),
                units::au_to_as(s.t2s.im),
                s.p_s.re,
                s.p_s.im,
                s.branch,
                match s.damping {
                    saddle::Damping::Decaying => "decaying",
                    saddle::Damping::Growing => "growing",
                },
            ));
        }
        if let Some(s) = sols.first() {
            let asym = travel_time_asymptotics(e, e0, &cfg.junction, &wf)?;
            let tau = s.travel_time();
            e_axis.push(units::au_to_ev(e));
            im_exact.push(units::au_to_as(tau.im));
            im_low.push(units::au_to_as(asym.low_e.im));
            im_high.push(units::au_to_as(asym.high_e.im));
            tt_rows.push(format!(
                "{:.6},{:.4},{:.4},{:.4},{:.4}",
                units::au_to_ev(e),
                units::au_to_as(tau.re),
                units::au_to_as(tau.im),
                units::au_to_as(asym.low_e.im),
                units::au_to_as(asym.high_e.im),
            ));
        }
    }
    dir.write(
        "saddles.csv",
        &csv(
            "energy_eV,re_t1_as,im_t1_as,re_t2_as,im_t2_as,re_p,im_p,branch,damping",
            saddle_rows,
        ),
    )?;
    dir.write(
        "travel_time.csv",
        &csv("energy_eV,re_tau_as,im_tau_as,im_tau_low_as,im_tau_high_as", tt_rows),
    )?;
    dir.write(
        "travel_time.svg",
        &line_plot(
            &[
                Series { label: "exact".into(), xs: e_axis.clone(), ys: im_exact },
                Series { label: "low-E".into(), xs: e_axis.clone(), ys: im_low },
                Series { label: "high-E".into(), xs: e_axis, ys: im_high },
            ],
            &PlotOptions {
                title: "imaginary travel time vs final energy".into(),
                x_label: "energy (eV)".into(),
                y_label: "Im tau (as)".into(),
                ..Default::default()
            },
        ),
    )?;

    // one trajectory at the middle of the energy grid
    let e_mid = energies[energies.len() / 2];
    let sols = solve_saddles(e_mid, e0, &cfg.junction, &wf)?;
    if let Some(s) = sols.first() {
        let tr = saddle::trajectory(s, &wf, 120)?;
        let rows = tr.times.iter().zip(tr.x.iter().zip(&tr.legs)).map(|(t, (x, leg))| {
            format!(
                "{:.4},{:.6},{:.6},{}",
                units::au_to_as(t.re),
                units::au_to_nm(x.re),
                units::au_to_nm(x.im),
                match leg {
                    saddle::Leg::Tunneling => "tunneling",
                    saddle::Leg::Classical => "classical",
                    saddle::Leg::Attenuation => "attenuation",
                },
            )
        });
        dir.write("trajectory.csv", &csv("t_as,re_x_nm,im_x_nm,leg", rows.collect::<Vec<_>>()))?;
    }
    let cutoff = saddle::cutoff_energy(&cfg.junction, &wf, e0).ok();
    dir.write_json(
        "run.json",
        &json!({
            "method": "saddle",
            "cutoff_eV": cutoff.map(units::au_to_ev),
            "trajectory_energy_eV": units::au_to_ev(e_mid),
            "content_hash": dir.content_hash(),
        }),
    )?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Scans and comparisons
// ---------------------------------------------------------------------------

pub struct ScanArgs {
    pub axis: ScanAxis,
    pub from: f64,
    pub to: f64,
    pub steps: usize,
    pub method: Method,
}

pub fn cmd_scan(config: &Path, out: &Path, args: &ScanArgs) -> Result<(), CmdError> {
    if args.steps < 2 || !args.from.is_finite() || !args.to.is_finite() {
        return Err(CmdError::Config("scan needs steps >= 2 and a finite range".into()));
    }
    let (raw, base_cfg) = load(config)?;
    let mut dir = RunDir::create(out)?;
    dir.write_config_snapshot(&raw)?;

    if args.axis == ScanAxis::Energy {
        // an energy scan is a spectrum on the requested grid
        let mut cfg = base_cfg;
        cfg.spectrum = SpectrumConfig {
            e_min: units::ev_to_au(args.from),
            e_max: units::ev_to_au(args.to),
            n_points: args.steps,
        };
        let wf = Waveform::gaussian(&cfg.pulse);
        let spectrum = method_spectrum(args.method, &cfg, &cfg.junction, &wf)?;
        dir.write_spectrum_csv("spectrum.csv", &spectrum)?;
        dir.write("spectrum.svg", &spectrum_svg(&[&spectrum], "energy scan"))?;
        dir.write_json(
            "scan.json",
            &json!({ "axis": "energy", "points": args.steps, "failures": [],
                     "content_hash": dir.content_hash() }),
        )?;
        return Ok(());
    }

    let (column, apply): (&str, fn(&mut RawConfig, f64)) = match args.axis {
        ScanAxis::Field => ("field_Vnm", |r, v| r.pulse.field_Vnm = v),
        ScanAxis::Width => ("d_nm", |r, v| r.junction.d_nm = v),
        ScanAxis::Cep => ("cep_rad", |r, v| r.pulse.cep_rad = v),
        ScanAxis::Duration => ("fwhm_fs", |r, v| {
            r.pulse.fwhm_fs = v;
            // let the window re-derive from the new duration
            r.grid.t_span_fs = None;
        }),
        ScanAxis::Energy => unreachable!(),
    };

    let points = dir.subdir("points")?;
    let mut rows = Vec::new();
    let mut xs = Vec::new();
    let mut nets = Vec::new();
    let mut failures = Vec::new();
    for i in 0..args.steps {
        let value = args.from + (args.to - args.from) * i as f64 / (args.steps - 1) as f64;
        let mut raw_pt = raw.clone();
        apply(&mut raw_pt, value);
        let mut pt_dir = points.subdir(&format!("point_{i:03}"))?;
        pt_dir.write_config_snapshot(&raw_pt)?;
        let result = RunConfig::from_raw(&raw_pt).and_then(|cfg| {
            let wf = Waveform::gaussian(&cfg.pulse);
            net_current(&cfg.junction, &wf, |j, w| method_spectrum(args.method, &cfg, j, w))
        });
        match result {
            Ok(r) => {
                rows.push(format!("{value:.6},{:.9e},{:.9e},{:.9e}", r.p_ts, r.p_st, r.net));
                xs.push(value);
                nets.push(r.net);
            }
            Err(e) => failures.push(json!({ "index": i, "value": value, "error": e.to_string() })),
        }
    }
    dir.write("scan.csv", &csv(&format!("{column},p_ts,p_st,net"), rows))?;
    if xs.len() >= 2 {
        dir.write(
            "scan.svg",
            &line_plot(
                &[Series { label: "net".into(), xs, ys: nets }],
                &PlotOptions {
                    title: format!("net current vs {column}"),
                    x_label: column.into(),
                    y_label: "net charge per pulse".into(),
                    ..Default::default()
                },
            ),
        )?;
    }
    let n_fail = failures.len();
    dir.write_json(
        "scan.json",
        &json!({ "axis": column, "points": args.steps, "failures": failures,
                 "content_hash": dir.content_hash() }),
    )?;
    if n_fail == args.steps {
        return Err(CmdError::Solver("every scan point failed".into()));
    }
    Ok(())
}

/// Restrict a spectrum to [e_min, e_max] (atomic units).
fn window(s: &Spectrum, e_min: f64, e_max: f64) -> Result<Spectrum, CoreError> {
    let mut es = Vec::new();
    let mut vs = Vec::new();
    for (&e, &v) in s.energies.iter().zip(&s.values) {
        if e >= e_min && e <= e_max {
            es.push(e);
            vs.push(v);
        }
    }
    Spectrum::new(es, vs, &s.method)
}

pub struct CompareResult {
    pub tdse: Spectrum,
    pub sfa: Spectrum,
    pub knee_tdse: f64,
    pub knee_sfa: f64,
    pub log_corr: f64,
}

fn run_compare(cfg: &RunConfig, corr_window: (f64, f64)) -> Result<CompareResult, CoreError> {
    let wf = Waveform::gaussian(&cfg.pulse);
    let tdse = method_spectrum(Method::Tdse, cfg, &cfg.junction, &wf)?;
    let sfa = method_spectrum(Method::Sfa, cfg, &cfg.junction, &wf)?;
    let knee_tdse = tdse.cutoff_knee()?;
    let knee_sfa = sfa.cutoff_knee()?;
    let log_corr = window(&tdse, corr_window.0, corr_window.1)?
        .log_correlation(&window(&sfa, corr_window.0, corr_window.1)?, 1e-12)?;
    Ok(CompareResult { tdse, sfa, knee_tdse, knee_sfa, log_corr })
}

fn write_compare(dir: &mut RunDir, r: &CompareResult) -> Result<(), CmdError> {
    let rows = r.tdse.energies.iter().zip(r.tdse.values.iter().zip(&r.sfa.values)).map(
        |(e, (a, b))| format!("{:.6},{:.9e},{:.9e}", units::au_to_ev(*e), a, b),
    );
    dir.write("compare.csv", &csv("energy_eV,tdse,sfa", rows.collect::<Vec<_>>()))?;
    // overlay after unit-integral normalization; absolute scales differ by a
    // method-dependent constant
    let tn = r.tdse.normalized()?;
    let sn = r.sfa.normalized()?;
    dir.write("compare.svg", &spectrum_svg(&[&tn, &sn], "TDSE vs SFA tunneling spectra"))?;
    dir.write_json(
        "metrics.json",
        &json!({
            "cutoff_tdse_eV": units::au_to_ev(r.knee_tdse),
            "cutoff_sfa_eV": units::au_to_ev(r.knee_sfa),
            "cutoff_rel_diff": (r.knee_sfa - r.knee_tdse).abs() / r.knee_tdse,
            "log_correlation": r.log_corr,
        }),
    )?;
    Ok(())
}

pub fn cmd_compare(config: &Path, out: &Path) -> Result<(), CmdError> {
    let (raw, cfg) = load(config)?;
    let mut dir = RunDir::create(out)?;
    dir.write_config_snapshot(&raw)?;
    let r = run_compare(&cfg, (units::ev_to_au(5.0), units::ev_to_au(25.0)))?;
    write_compare(&mut dir, &r)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Figure reproduction
// ---------------------------------------------------------------------------

pub fn cmd_reproduce(figure: &str, out: &Path, recipes_dir: &Path) -> Result<(), CmdError> {
    let path = recipes_dir.join(format!("{figure}.toml"));
    if !path.is_file() {
        return Err(CmdError::Config(format!(
            "unknown figure id {figure:?}: no recipe at {}",
            path.display()
        )));
    }
    let rf = RecipeFile::load(&path).map_err(CmdError::Config)?;
    if rf.recipe.id != figure {
        return Err(CmdError::Config(format!(
            "recipe id {:?} does not match requested figure {figure:?}",
            rf.recipe.id
        )));
    }
    let raw = rf.raw_config();
    let cfg = RunConfig::from_raw(&raw)?;
    let mut dir = RunDir::create(out)?;
    dir.write_config_snapshot(&raw)?;
    if !rf.recipe.title.is_empty() {
        println!("{}: {}", rf.recipe.id, rf.recipe.title);
    }

    let mut gate = GateReport::default();
    match rf.recipe.kind.as_str() {
        "compare" => reproduce_compare(&rf, &cfg, &mut dir, &mut gate)?,
        "flux_identity" => reproduce_flux_identity(&rf, &cfg, &mut dir, &mut gate)?,
        "cutoff_vs_width" => reproduce_cutoff_vs_width(&rf, &raw, &mut dir, &mut gate)?,
        "burst_duration" => reproduce_burst_duration(&rf, &raw, &mut dir, &mut gate)?,
        "cep_map" => reproduce_cep_map(&rf, &raw, &mut dir, &mut gate)?,
        "travel_time" => reproduce_travel_time(&rf, &cfg, &mut dir, &mut gate)?,
        "regime_map" => reproduce_regime_map(&rf, &raw, &mut dir, &mut gate)?,
        "cep_rectification" => reproduce_cep_rectification(&rf, &raw, &mut dir, &mut gate)?,
        other => return Err(CmdError::Config(format!("unknown recipe kind {other:?}"))),
    }
    let pass = gate.finish();
    dir.write_json("gate.json", &gate)?;
    for c in &gate.checks {
        println!(
            "{} {}: {} (value {:.6e}, threshold {:.3e})",
            rf.recipe.id,
            c.name,
            if c.pass { "PASS" } else { "FAIL" },
            c.value,
            c.threshold
        );
    }
    if pass {
        Ok(())
    } else {
        Err(CmdError::Gate(format!("figure {figure} failed its acceptance gate")))
    }
}

fn reproduce_compare(
    rf: &RecipeFile,
    cfg: &RunConfig,
    dir: &mut RunDir,
    gate: &mut GateReport,
) -> Result<(), CmdError> {
    let lo = units::ev_to_au(rf.recipe.gate_or("corr_e_min_eV", 5.0));
    let hi = units::ev_to_au(rf.recipe.gate_or("corr_e_max_eV", 25.0));
    let r = run_compare(cfg, (lo, hi))?;
    write_compare(dir, &r)?;
    gate.le(
        "cutoff_rel_diff",
        (r.knee_sfa - r.knee_tdse).abs() / r.knee_tdse,
        rf.recipe.gate_or("cutoff_rel_tol", 0.10),
    );
    gate.ge("log_correlation", r.log_corr, rf.recipe.gate_or("log_corr_min", 0.9));
    Ok(())
}

fn reproduce_flux_identity(
    rf: &RecipeFile,
    cfg: &RunConfig,
    dir: &mut RunDir,
    gate: &mut GateReport,
) -> Result<(), CmdError> {
    let wf = Waveform::gaussian(&cfg.pulse);
    let direct = method_spectrum(Method::Tdse, cfg, &cfg.junction, &wf)?;
    let fluxs = method_spectrum(Method::Flux, cfg, &cfg.junction, &wf)?;
    let a = direct.normalized()?;
    let b = fluxs.normalized()?;
    let num: f64 = a.values.iter().zip(&b.values).map(|(x, y)| (x - y) * (x - y)).sum();
    let den: f64 = a.values.iter().map(|x| x * x).sum();
    let l2 = (num / den).sqrt();
    let rows = a.energies.iter().zip(direct.values.iter().zip(&fluxs.values)).map(
        |(e, (x, y))| format!("{:.6},{:.9e},{:.9e}", units::au_to_ev(*e), x, y),
    );
    dir.write("compare.csv", &csv("energy_eV,tdse,flux", rows.collect::<Vec<_>>()))?;
    dir.write("compare.svg", &spectrum_svg(&[&a, &b], "direct TDSE vs flux-form spectra"))?;
    dir.write_json("metrics.json", &json!({ "l2_mismatch": l2 }))?;
    gate.le("l2_mismatch", l2, rf.recipe.gate_or("l2_max", 1e-3));
    Ok(())
}

fn reproduce_cutoff_vs_width(
    rf: &RecipeFile,
    raw: &RawConfig,
    dir: &mut RunDir,
    gate: &mut GateReport,
) -> Result<(), CmdError> {
    let ds = &rf.recipe.d_list_nm;
    if ds.len() < 2 {
        return Err(CmdError::Config("cutoff_vs_width needs d_list_nm with >= 2 widths".into()));
    }
    let field = raw.pulse.field_Vnm;
    let e0_ev = raw.junction.work_tip_eV;
    let mut knees = Vec::new();
    let mut edges = Vec::new();
    let mut rows = Vec::new();
    for &d in ds {
        let mut raw_d = raw.clone();
        raw_d.junction.d_nm = d;
        let cfg = RunConfig::from_raw(&raw_d)?;
        let wf = Waveform::gaussian(&cfg.pulse);
        let s = method_spectrum(Method::Tdse, &cfg, &cfg.junction, &wf)?;
        let knee = units::au_to_ev(s.cutoff_knee()?);
        let edge = units::au_to_ev(s.attenuation_edge(2.0)?);
        let law = field * d - e0_ev;
        rows.push(format!("{d:.4},{knee:.4},{edge:.4},{law:.4}"));
        knees.push(knee);
        edges.push(edge);
    }
    dir.write("cutoff_vs_d.csv", &csv("d_nm,knee_eV,edge_eV,law_eV", rows))?;
    dir.write(
        "cutoff_vs_d.svg",
        &line_plot(
            &[
                Series { label: "TDSE knee".into(), xs: ds.clone(), ys: knees.clone() },
                Series {
                    label: "cutoff law".into(),
                    xs: ds.clone(),
                    ys: ds.iter().map(|d| field * d - e0_ev).collect(),
                },
            ],
            &PlotOptions {
                title: "spectral cutoff vs junction width".into(),
                x_label: "d (nm)".into(),
                y_label: "cutoff (eV)".into(),
                ..Default::default()
            },
        ),
    )?;
    let (slope, _) = attostm_core::math::linear_fit(ds, &knees);
    dir.write_json(
        "metrics.json",
        &json!({ "slope_eV_per_nm": slope, "law_slope_eV_per_nm": field }),
    )?;
    gate.le(
        "slope_rel_error",
        (slope - field).abs() / field,
        rf.recipe.gate_or("slope_tol", 0.05),
    );
    Ok(())
}

fn reproduce_burst_duration(
    rf: &RecipeFile,
    raw: &RawConfig,
    dir: &mut RunDir,
    gate: &mut GateReport,
) -> Result<(), CmdError> {
    let fields = &rf.recipe.field_list_Vnm;
    if fields.len() < 2 {
        return Err(CmdError::Config("burst_duration needs field_list_Vnm with >= 2 fields".into()));
    }
    let sat_field = rf.recipe.gate_or("saturation_field_Vnm", 17.0);
    let target = rf.recipe.gate_or("duration_as", 560.0);
    let mut rows = Vec::new();
    let mut durations = Vec::new();
    for &f in fields {
        let mut raw_f = raw.clone();
        raw_f.pulse.field_Vnm = f;
        let cfg = RunConfig::from_raw(&raw_f)?;
        let wf = Waveform::gaussian(&cfg.pulse);
        let opts = PropagateOptions { record_boundary: true, map_strides: None };
        let run = direct_run(&cfg.junction, &cfg.grid, &wf, -cfg.junction.work_tip, &opts)?;
        let trace = run.out.boundary.as_ref().expect("boundary recording was requested");
        let dur = units::au_to_as(tdse::burst_duration(&trace.times, &trace.j_sample)?);
        rows.push(format!("{f:.3},{dur:.2}"));
        durations.push(dur);
    }
    dir.write("burst_duration.csv", &csv("field_Vnm,duration_as", rows))?;
    dir.write(
        "burst_duration.svg",
        &line_plot(
            &[Series { label: "FWHM".into(), xs: fields.clone(), ys: durations.clone() }],
            &PlotOptions {
                title: "current-burst duration vs peak field".into(),
                x_label: "F (V/nm)".into(),
                y_label: "duration (as)".into(),
                ..Default::default()
            },
        ),
    )?;
    let mut worst_sat = 0.0f64;
    for (f, d) in fields.iter().zip(&durations) {
        if *f >= sat_field {
            worst_sat = worst_sat.max((d - target).abs() / target);
        }
    }
    gate.le("saturation_rel_error", worst_sat, rf.recipe.gate_or("duration_rel_tol", 0.15));
    // monotone decrease toward saturation, with 5% slack per step
    let monotone = durations.windows(2).all(|w| w[1] <= w[0] * 1.05);
    gate.ge("monotone_decrease", if monotone { 1.0 } else { 0.0 }, 1.0);
    Ok(())
}

/// Net current per CEP for each junction width. Shared by cep_map and
/// cep_rectification.
fn cep_sweep(
    raw: &RawConfig,
    d_nm: f64,
    n_cep: usize,
) -> Result<Vec<(f64, flux::NetCurrentResult)>, CmdError> {
    let mut out = Vec::new();
    for i in 0..n_cep {
        let cep = 2.0 * std::f64::consts::PI * i as f64 / n_cep as f64;
        let mut raw_pt = raw.clone();
        raw_pt.junction.d_nm = d_nm;
        raw_pt.pulse.cep_rad = cep;
        let cfg = RunConfig::from_raw(&raw_pt)?;
        let wf = Waveform::gaussian(&cfg.pulse);
        let r = net_current(&cfg.junction, &wf, |j, w| method_spectrum(Method::Tdse, &cfg, j, w))?;
        out.push((cep, r));
    }
    Ok(out)
}

fn reproduce_cep_map(
    rf: &RecipeFile,
    raw: &RawConfig,
    dir: &mut RunDir,
    gate: &mut GateReport,
) -> Result<(), CmdError> {
    let n_cep = if rf.recipe.cep_steps >= 2 { rf.recipe.cep_steps } else { 16 };
    let ds = if rf.recipe.d_list_nm.is_empty() {
        vec![raw.junction.d_nm]
    } else {
        rf.recipe.d_list_nm.clone()
    };
    let mut rows = Vec::new();
    let mut series = Vec::new();
    for &d in &ds {
        let sweep = cep_sweep(raw, d, n_cep)?;
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (cep, r) in &sweep {
            rows.push(format!("{cep:.6},{d:.4},{:.9e},{:.9e},{:.9e}", r.p_ts, r.p_st, r.net));
            xs.push(*cep);
            ys.push(r.net);
        }
        let lo = ys.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        gate.ge(&format!("sign_reversal_d_{d}"), if lo < 0.0 && hi > 0.0 { 1.0 } else { 0.0 }, 1.0);
        series.push(Series { label: format!("d = {d} nm"), xs, ys });
    }
    dir.write("cep_map.csv", &csv("cep_rad,d_nm,p_ts,p_st,net", rows))?;
    dir.write(
        "cep_map.svg",
        &line_plot(
            &series,
            &PlotOptions {
                title: "net current vs CEP".into(),
                x_label: "CEP (rad)".into(),
                y_label: "net charge per pulse".into(),
                ..Default::default()
            },
        ),
    )?;
    Ok(())
}

fn reproduce_travel_time(
    rf: &RecipeFile,
    cfg: &RunConfig,
    dir: &mut RunDir,
    gate: &mut GateReport,
) -> Result<(), CmdError> {
    let wf = Waveform::cw(&cfg.pulse);
    let e0 = -cfg.junction.work_tip;
    let e_c = saddle::cutoff_energy(&cfg.junction, &wf, e0)?;
    let energies: Vec<f64> =
        cfg.spectrum.energies().into_iter().filter(|&e| e > 0.0).collect();
    let mut rows = Vec::new();
    let mut e_axis = Vec::new();
    let mut exact = Vec::new();
    let mut low = Vec::new();
    let mut high = Vec::new();
    for &e in &energies {
        let asym = travel_time_asymptotics(e, e0, &cfg.junction, &wf)?;
        let sols = solve_saddles(e, e0, &cfg.junction, &wf)?;
        if let Some(s) = sols.first() {
            let tau = s.travel_time();
            rows.push(format!(
                "{:.6},{:.4},{:.4},{:.4}",
                units::au_to_ev(e),
                units::au_to_as(tau.im),
                units::au_to_as(asym.low_e.im),
                units::au_to_as(asym.high_e.im),
            ));
            e_axis.push(units::au_to_ev(e));
            exact.push(units::au_to_as(tau.im));
            low.push(units::au_to_as(asym.low_e.im));
            high.push(units::au_to_as(asym.high_e.im));
        }
    }
    dir.write(
        "travel_time.csv",
        &csv("energy_eV,im_tau_as,im_tau_low_as,im_tau_high_as", rows),
    )?;
    dir.write(
        "travel_time.svg",
        &line_plot(
            &[
                Series { label: "exact".into(), xs: e_axis.clone(), ys: exact },
                Series { label: "low-E".into(), xs: e_axis.clone(), ys: low },
                Series { label: "high-E".into(), xs: e_axis, ys: high },
            ],
            &PlotOptions {
                title: "imaginary travel time: exact vs asymptotics".into(),
                x_label: "energy (eV)".into(),
                y_label: "Im tau (as)".into(),
                ..Default::default()
            },
        ),
    )?;
    // crossover of the two asymptotics by bisection
    let g = |e: f64| -> Result<f64, CoreError> {
        let a = travel_time_asymptotics(e, e0, &cfg.junction, &wf)?;
        Ok(a.low_e.im - a.high_e.im)
    };
    let (mut a, mut b) = (0.05 * e_c, 5.0 * e_c);
    let (ga, gb) = (g(a)?, g(b)?);
    if ga * gb > 0.0 {
        return Err(CmdError::Solver("asymptotics do not cross in the search window".into()));
    }
    let mut sign_a = ga.signum();
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        let gm = g(m)?;
        if gm.signum() == sign_a {
            a = m;
            sign_a = gm.signum();
        } else {
            b = m;
        }
    }
    let e_int = 0.5 * (a + b);
    dir.write_json(
        "metrics.json",
        &json!({
            "intersection_eV": units::au_to_ev(e_int),
            "cutoff_law_eV": units::au_to_ev(e_c),
        }),
    )?;
    gate.le(
        "intersection_rel_error",
        (e_int - e_c).abs() / e_c,
        rf.recipe.gate_or("intersection_rel_tol", 0.02),
    );
    Ok(())
}

fn reproduce_regime_map(
    rf: &RecipeFile,
    raw: &RawConfig,
    dir: &mut RunDir,
    gate: &mut GateReport,
) -> Result<(), CmdError> {
    let fields = &rf.recipe.field_list_Vnm;
    let ds = &rf.recipe.d_list_nm;
    if fields.len() < 2 || ds.is_empty() {
        return Err(CmdError::Config(
            "regime_map needs field_list_Vnm (>= 2) and d_list_nm".into(),
        ));
    }
    let slope_tol = rf.recipe.gate_or("slope_tol", 0.1);
    let merge_factor = rf.recipe.gate_or("merge_factor", 2.0);
    let mut rows = Vec::new();
    let mut series = Vec::new();
    for method in [Method::Tdse, Method::Sfa] {
        let name = if method == Method::Tdse { "tdse" } else { "sfa" };
        let mut top_yields = Vec::new();
        for &d in ds {
            let mut yields = Vec::new();
            for &f in fields {
                let mut raw_pt = raw.clone();
                raw_pt.junction.d_nm = d;
                raw_pt.pulse.field_Vnm = f;
                let cfg = RunConfig::from_raw(&raw_pt)?;
                let wf = Waveform::gaussian(&cfg.pulse);
                let y = method_spectrum(method, &cfg, &cfg.junction, &wf)?.integral();
                rows.push(format!("{name},{d:.4},{f:.4},{y:.9e}"));
                yields.push(y);
            }
            // weak-field slope of log yield vs log intensity from the two
            // smallest fields
            if d <= 1.0 + 1e-9 {
                let slope = (yields[1] / yields[0]).ln() / (fields[1] / fields[0]).powi(2).ln();
                gate.le(
                    &format!("{name}_weak_slope_err_d_{d}"),
                    slope - 1.0,
                    slope_tol,
                );
            }
            top_yields.push(*yields.last().unwrap());
            series.push(Series {
                label: format!("{name} d = {d}"),
                xs: fields.iter().map(|f| f * f).collect(),
                ys: yields,
            });
        }
        let lo = top_yields.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = top_yields.iter().cloned().fold(0.0f64, f64::max);
        gate.le(&format!("{name}_merge_ratio"), hi / lo, merge_factor);
    }
    dir.write("regime_map.csv", &csv("method,d_nm,field_Vnm,yield", rows))?;
    dir.write(
        "regime_map.svg",
        &line_plot(
            &series,
            &PlotOptions {
                title: "tunneling yield vs intensity".into(),
                x_label: "intensity (V/nm)^2".into(),
                y_label: "log10 yield".into(),
                log_y: true,
                ..Default::default()
            },
        ),
    )?;
    Ok(())
}

fn reproduce_cep_rectification(
    rf: &RecipeFile,
    raw: &RawConfig,
    dir: &mut RunDir,
    gate: &mut GateReport,
) -> Result<(), CmdError> {
    let n_cep = if rf.recipe.cep_steps >= 2 { rf.recipe.cep_steps } else { 8 };
    if n_cep % 2 != 0 {
        return Err(CmdError::Config("cep_rectification needs an even cep_steps".into()));
    }
    let sweep = cep_sweep(raw, raw.junction.d_nm, n_cep)?;
    let rows = sweep.iter().map(|(cep, r)| {
        format!("{cep:.6},{:.9e},{:.9e},{:.9e}", r.p_ts, r.p_st, r.net)
    });
    dir.write("cep_net.csv", &csv("cep_rad,p_ts,p_st,net", rows.collect::<Vec<_>>()))?;
    let nets: Vec<f64> = sweep.iter().map(|(_, r)| r.net).collect();
    let max_net = nets.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1e-300);
    let mut antisym = 0.0f64;
    for i in 0..n_cep / 2 {
        antisym = antisym.max((nets[i] + nets[i + n_cep / 2]).abs() / max_net);
    }
    gate.le("antisymmetry", antisym, rf.recipe.gate_or("antisym_tol", 1e-6));
    let lo = nets.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = nets.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    gate.ge("sign_reversal", if lo < 0.0 && hi > 0.0 { 1.0 } else { 0.0 }, 1.0);
    dir.write(
        "cep_net.svg",
        &line_plot(
            &[Series {
                label: "net".into(),
                xs: sweep.iter().map(|(c, _)| *c).collect(),
                ys: nets,
            }],
            &PlotOptions {
                title: "CEP rectification of the net current".into(),
                x_label: "CEP (rad)".into(),
                y_label: "net charge per pulse".into(),
                ..Default::default()
            },
        ),
    )?;
    Ok(())
}
