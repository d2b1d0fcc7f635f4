//! Implementations of the run subcommands.

use crate::out::{num, Formats, Sink};
use crate::par::par_map;
use crate::svg::{Plot, Series};
use cavqed_core::dynamics::{
    integrate_absorption, integrate_retrieval, retrieval_metrics, DriveSpec, Trajectory,
};
use cavqed_core::error_models::{
    dg_grid_validity, doppler_grid_validity, doppler_merit, drift_merit,
    polyfit_through_origin, symmetric_grid, SweepJob,
};
use cavqed_core::gates::{
    gate_sequence_measured, gate_sequence_unmeasured, gate_w, ideal_z_ap, GateMatrix,
};
use cavqed_core::mode::ModeShape;
use cavqed_core::multiplex;
use cavqed_core::ode::Tolerances;
use cavqed_core::params::Detunings;
use cavqed_core::presets::{self, Preset};
use cavqed_core::protocol::{
    build_cluster_1d, build_cluster_ring, build_ghz_single_rail, derive_truth_table,
    path_edges, photon_photon_cz, qnd_detect, ring_edges, stabilizer_defect,
    ClusterEncoding, PhiSum, QkdBasis, QkdEncoding,
};
use cavqed_core::pulse::{time_reverse, ControlPulse};
use cavqed_core::scatter::{transmission, transmission_spectrum};
use cavqed_core::synth::{
    case2_optimize_x, case2_point, eta_finite_power, synthesize_adiabatic,
    synthesize_exact, SynthesisResult,
};
use serde::Serialize;
use std::f64::consts::TAU;
use std::path::{Path, PathBuf};

/// Usage errors exit 2; computation/IO failures exit 1.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Failed(String),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Failed(format!("i/o error: {e}"))
    }
}

impl From<cavqed_core::Error> for CliError {
    fn from(e: cavqed_core::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

pub type CliResult<T = ()> = Result<T, CliError>;

/// Global run context shared by all subcommands.
pub struct Ctx {
    pub out_dir: PathBuf,
    pub formats: Formats,
    pub grid: usize,
    pub jobs: usize,
    pub reproducible: bool,
    pub presets: Vec<Preset>,
}

impl Ctx {
    pub fn load(presets_file: Option<&Path>) -> CliResult<Vec<Preset>> {
        match presets_file {
            None => Ok(presets::builtin_all()),
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    CliError::usage(format!("cannot read {}: {e}", path.display()))
                })?;
                Ok(presets::parse(&text)?)
            }
        }
    }

    pub fn preset(&self, name: &str) -> CliResult<Preset> {
        self.presets.iter().find(|p| p.name == name).cloned().ok_or_else(|| {
            let known: Vec<&str> = self.presets.iter().map(|p| p.name.as_str()).collect();
            CliError::usage(format!("unknown preset {name}; known: {}", known.join(", ")))
        })
    }

    pub fn sink(&self, operation: &str, preset: Option<&str>) -> CliResult<Sink> {
        Ok(Sink::new(&self.out_dir, self.formats, self.reproducible, operation, preset, self.grid)?)
    }

    /// Sink rooted in a subdirectory of --out (one manifest per target).
    pub fn sink_in(&self, subdir: &str, operation: &str, preset: Option<&str>) -> CliResult<Sink> {
        Ok(Sink::new(
            &self.out_dir.join(subdir),
            self.formats,
            self.reproducible,
            operation,
            preset,
            self.grid,
        )?)
    }

    fn tol(&self) -> Tolerances {
        Tolerances::default()
    }
}

/// Mode choice exposed on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeArg {
    Sine2,
    Gauss,
}

pub struct SynthArgs {
    pub preset: String,
    pub eta_r: Option<f64>,
    pub t_ns: Option<f64>,
    pub mode: ModeArg,
    pub case: Option<u8>,
    pub adiabatic: bool,
}

struct Prepared {
    preset: Preset,
    mode: ModeShape,
    det: Detunings,
    eta_r: f64,
}

fn prepare(ctx: &Ctx, args: &SynthArgs) -> CliResult<Prepared> {
    let mut preset = ctx.preset(&args.preset)?;
    if let Some(case) = args.case {
        preset.case = case;
    }
    let duration = args.t_ns.unwrap_or(preset.t_ns);
    let mode = match args.mode {
        ModeArg::Sine2 => ModeShape::sine_squared(duration)?,
        ModeArg::Gauss => ModeShape::gaussian(duration)?,
    };
    let det = preset.detunings()?;
    let eta_r = match args.eta_r.or_else(|| preset.target_eta_r()) {
        Some(v) => v,
        None => return Err(CliError::usage("preset has no efficiency target; pass --eta-r")),
    };
    Ok(Prepared { preset, mode, det, eta_r })
}

fn record_synth_overrides(sink: &mut Sink, args: &SynthArgs, p: &Prepared) {
    if let Some(v) = args.eta_r {
        sink.record_override("eta_r", v);
    }
    if let Some(v) = args.t_ns {
        sink.record_override("t_ns", v);
    }
    if let Some(v) = args.case {
        sink.record_override("case", v);
    }
    sink.record_override("mode", if args.mode == ModeArg::Sine2 { "sine2" } else { "gauss" });
    sink.record_override("method", if args.adiabatic { "adiabatic" } else { "exact" });
    sink.assume(&format!(
        "photon at offset delta_p = {} rad/ns from cavity resonance; eta_r target {}",
        p.det.delta_p, p.eta_r
    ));
}

#[derive(Serialize)]
struct SynthReport {
    eta_r: f64,
    eta_max: f64,
    rho_ss_final: f64,
    xi_x: f64,
    xi_y: f64,
    kappa_ex_t: f64,
    f0t: f64,
    peak_omega0_ghz: f64,
    truncated: bool,
    delta_p_rad_per_ns: f64,
}

fn synth_report(s: &SynthesisResult) -> SynthReport {
    SynthReport {
        eta_r: s.eta_r,
        eta_max: s.eta_max,
        rho_ss_final: s.rho_ss_final,
        xi_x: s.xi_x,
        xi_y: s.xi_y,
        kappa_ex_t: s.kappa_ex_t,
        f0t: s.pulse.f0t(),
        peak_omega0_ghz: s.pulse.peak() / TAU,
        truncated: s.pulse.meta().truncated,
        delta_p_rad_per_ns: s.pulse.meta().delta_p,
    }
}

fn run_synthesis(ctx: &Ctx, p: &Prepared, adiabatic: bool) -> CliResult<SynthesisResult> {
    let params = p.preset.params();
    let result = if adiabatic {
        synthesize_adiabatic(&params, &p.mode, &p.det, p.eta_r, ctx.grid)?
    } else {
        synthesize_exact(&params, &p.mode, &p.det, p.eta_r, ctx.grid)?
    };
    if result.kappa_ex_t < 50.0 {
        eprintln!(
            "note: κ_ex·T = {:.1} < 50; adiabatic expressions degrade in this regime",
            result.kappa_ex_t
        );
    }
    Ok(result)
}

fn pulse_rows(pulse: &ControlPulse) -> Vec<Vec<String>> {
    pulse
        .grid()
        .times()
        .enumerate()
        .map(|(k, t)| {
            vec![num(t), num(pulse.omega0()[k] / TAU), num(pulse.phi0()[k])]
        })
        .collect()
}

fn write_pulse(sink: &mut Sink, pulse: &ControlPulse, name: &str) -> CliResult {
    sink.csv(name, &["t_ns", "omega0_ghz", "phi0_rad"], &pulse_rows(pulse))?;
    let series = Series {
        label: "omega0 (GHz)".into(),
        points: pulse
            .grid()
            .times()
            .enumerate()
            .map(|(k, t)| (t, pulse.omega0()[k] / TAU))
            .collect(),
        dashed: false,
    };
    let plot = Plot {
        title: "control pulse".into(),
        x_label: "t (ns)".into(),
        y_label: "omega0 / 2pi (GHz)".into(),
        series: vec![series],
        comment: sink.svg_comment(),
    };
    sink.svg(&name.replace(".csv", ".svg"), &plot)?;
    Ok(())
}

pub fn synthesize(ctx: &Ctx, args: &SynthArgs) -> CliResult {
    let p = prepare(ctx, args)?;
    let mut sink = ctx.sink("synthesize", Some(&p.preset.name))?;
    record_synth_overrides(&mut sink, args, &p);
    let result = run_synthesis(ctx, &p, args.adiabatic)?;
    write_pulse(&mut sink, &result.pulse, "pulse.csv")?;
    sink.json("synthesis.json", &synth_report(&result))?;
    sink.finish()?;
    println!(
        "synthesized {} pulse: peak {:.4} (2π)GHz, f(0,T) = {:.4} rad²/ns, η_max = {:.5}",
        p.preset.name,
        result.pulse.peak() / TAU,
        result.pulse.f0t(),
        result.eta_max
    );
    Ok(())
}

fn trajectory_rows(traj: &Trajectory) -> Vec<Vec<String>> {
    traj.grid
        .times()
        .enumerate()
        .map(|(k, t)| {
            vec![
                num(t),
                num(traj.c_s[k].re),
                num(traj.c_s[k].im),
                num(traj.c_e[k].re),
                num(traj.c_e[k].im),
                num(traj.c_g[k].re),
                num(traj.c_g[k].im),
                num(traj.a_in[k].re),
                num(traj.a_in[k].im),
                num(traj.a_out[k].re),
                num(traj.a_out[k].im),
            ]
        })
        .collect()
}

const TRAJ_HEADER: [&str; 11] = [
    "t_ns", "cs_re", "cs_im", "ce_re", "ce_im", "cg_re", "cg_im", "ain_re", "ain_im",
    "aout_re", "aout_im",
];

#[derive(Serialize)]
struct MetricsReport {
    eta_r: f64,
    eta_abs: f64,
    fidelity_f: f64,
    overlap_re: f64,
    overlap_im: f64,
    norm_balance_defect: f64,
}

pub fn retrieve(ctx: &Ctx, args: &SynthArgs) -> CliResult {
    let p = prepare(ctx, args)?;
    let mut sink = ctx.sink("retrieve", Some(&p.preset.name))?;
    record_synth_overrides(&mut sink, args, &p);
    let result = run_synthesis(ctx, &p, args.adiabatic)?;
    let params = p.preset.params();
    let drive = DriveSpec::retrieval(result.pulse.clone(), p.det);
    let traj = integrate_retrieval(&params, &drive, ctx.tol())
        .map_err(|e| CliError::Failed(e.to_string()))?;
    let metrics = retrieval_metrics(&traj, &p.mode, p.det.delta_p)?;
    write_pulse(&mut sink, &result.pulse, "pulse.csv")?;
    sink.csv("trajectory.csv", &TRAJ_HEADER, &trajectory_rows(&traj))?;
    sink.json("synthesis.json", &synth_report(&result))?;
    sink.json(
        "metrics.json",
        &MetricsReport {
            eta_r: metrics.eta_r,
            eta_abs: metrics.eta_abs,
            fidelity_f: metrics.fidelity_f,
            overlap_re: metrics.overlap.re,
            overlap_im: metrics.overlap.im,
            norm_balance_defect: cavqed_core::dynamics::norm_balance_defect(&params, &traj),
        },
    )?;
    sink.finish()?;
    println!(
        "retrieval on {}: η_r = {:.5} (requested {:.5}), F = {:.5}",
        p.preset.name, metrics.eta_r, p.eta_r, metrics.fidelity_f
    );
    Ok(())
}

pub fn absorb(ctx: &Ctx, args: &SynthArgs) -> CliResult {
    let p = prepare(ctx, args)?;
    let mut sink = ctx.sink("absorb", Some(&p.preset.name))?;
    record_synth_overrides(&mut sink, args, &p);
    sink.assume("input photon a_in = h(t)·exp(−iΔp t); control pulse time-reversed");
    let result = run_synthesis(ctx, &p, args.adiabatic)?;
    let params = p.preset.params();
    let reversed = time_reverse(&result.pulse);
    let drive = DriveSpec::absorb_photon(reversed.clone(), p.det, &p.mode)?;
    let traj = integrate_absorption(&params, &drive, ctx.tol())
        .map_err(|e| CliError::Failed(e.to_string()))?;
    let metrics = retrieval_metrics(&traj, &p.mode, p.det.delta_p)?;
    write_pulse(&mut sink, &reversed, "pulse.csv")?;
    sink.csv("trajectory.csv", &TRAJ_HEADER, &trajectory_rows(&traj))?;
    sink.json(
        "metrics.json",
        &MetricsReport {
            eta_r: metrics.eta_r,
            eta_abs: metrics.eta_abs,
            fidelity_f: metrics.fidelity_f,
            overlap_re: metrics.overlap.re,
            overlap_im: metrics.overlap.im,
            norm_balance_defect: cavqed_core::dynamics::norm_balance_defect(&params, &traj),
        },
    )?;
    sink.finish()?;
    println!(
        "absorption on {}: η_abs = {:.5} (1−η_abs = {:.5})",
        p.preset.name,
        metrics.eta_abs,
        1.0 - metrics.eta_abs
    );
    Ok(())
}

pub struct TransmissionArgs {
    pub preset: String,
    pub coupled: bool,
    pub delta_ap_ghz: f64,
    pub delta_cp_ghz: f64,
    pub spectrum: bool,
    pub span_ghz: Option<f64>,
    pub points: usize,
}

#[derive(Serialize)]
struct TransmissionReport {
    t_re: f64,
    t_im: f64,
    magnitude: f64,
    phase_rad: f64,
    atom_coupled: bool,
    delta_ap_ghz: f64,
    delta_cp_ghz: f64,
}

pub fn transmission_cmd(ctx: &Ctx, args: &TransmissionArgs) -> CliResult {
    let preset = ctx.preset(&args.preset)?;
    let params = preset.params();
    let mut sink = ctx.sink("transmission", Some(&preset.name))?;
    sink.record_override("coupled", args.coupled);
    sink.record_override("delta_ap_ghz", args.delta_ap_ghz);
    sink.record_override("delta_cp_ghz", args.delta_cp_ghz);
    let t = transmission(
        &params,
        TAU * args.delta_ap_ghz,
        TAU * args.delta_cp_ghz,
        args.coupled,
    );
    sink.json(
        "transmission.json",
        &TransmissionReport {
            t_re: t.re,
            t_im: t.im,
            magnitude: t.norm(),
            phase_rad: t.arg(),
            atom_coupled: args.coupled,
            delta_ap_ghz: args.delta_ap_ghz,
            delta_cp_ghz: args.delta_cp_ghz,
        },
    )?;
    if args.spectrum {
        let span = TAU * args.span_ghz.unwrap_or(3.0 * (params.g + params.kappa()) / TAU);
        let n = args.points.max(16);
        let omegas: Vec<f64> =
            (0..n).map(|k| -span + 2.0 * span * k as f64 / (n - 1) as f64).collect();
        let spec = transmission_spectrum(&params, &omegas, args.coupled);
        let rows: Vec<Vec<String>> = spec
            .omega
            .iter()
            .zip(&spec.t)
            .map(|(w, t)| vec![num(w / TAU), num(t.re), num(t.im)])
            .collect();
        sink.csv("spectrum.csv", &["omega_ghz", "t_re", "t_im"], &rows)?;
        let plot = Plot {
            title: format!("transmission magnitude, {}", preset.name),
            x_label: "probe offset (GHz)".into(),
            y_label: "|t|".into(),
            series: vec![Series {
                label: if args.coupled { "atom coupled".into() } else { "empty cavity".into() },
                points: spec
                    .omega
                    .iter()
                    .zip(&spec.t)
                    .map(|(w, t)| (w / TAU, t.norm()))
                    .collect(),
                dashed: false,
            }],
            comment: sink.svg_comment(),
        };
        sink.svg("spectrum.svg", &plot)?;
    }
    sink.finish()?;
    println!("t = {:.6} {:+.6}i (|t| = {:.6})", t.re, t.im, t.norm());
    Ok(())
}

pub struct GateArgs {
    pub which: String,
    pub phi: f64,
    pub preset: Option<String>,
}

#[derive(Serialize)]
struct GateReport {
    basis: Vec<String>,
    /// Row-major entries as [re, im] pairs.
    entries: Vec<[f64; 2]>,
    phi: Option<f64>,
    unitarity_defect: f64,
}

fn gate_report(m: &GateMatrix, phi: Option<f64>) -> GateReport {
    GateReport {
        basis: m.basis().iter().map(|s| s.to_string()).collect(),
        entries: m.entries().iter().map(|c| [c.re, c.im]).collect(),
        phi,
        unitarity_defect: m.unitarity_defect(),
    }
}

pub fn gate(ctx: &Ctx, args: &GateArgs) -> CliResult {
    let mut sink = ctx.sink("gate", args.preset.as_deref())?;
    sink.record_override("which", &args.which);
    sink.record_override("phi", args.phi);
    let (matrix, phi) = match args.which.as_str() {
        "ideal" => (ideal_z_ap(), None),
        "measured" => (gate_sequence_measured(args.phi), Some(args.phi)),
        "unmeasured" => (gate_sequence_unmeasured(args.phi), Some(args.phi)),
        "w" => {
            let name = args.preset.as_deref().ok_or_else(|| {
                CliError::usage("gate w needs --preset to fix g/κ_ex")
            })?;
            let params = ctx.preset(name)?.params();
            let (m, phi_w) = gate_w(&params);
            (m, Some(phi_w))
        }
        other => {
            return Err(CliError::usage(format!(
                "unknown gate {other}; expected ideal|measured|unmeasured|w"
            )))
        }
    };
    sink.json("gate.json", &gate_report(&matrix, phi))?;
    sink.finish()?;
    println!(
        "gate {} over basis {:?}: unitarity defect {:.1e}",
        args.which,
        matrix.basis(),
        matrix.unitarity_defect()
    );
    Ok(())
}

pub struct SweepArgs {
    pub preset: String,
    pub half_width: Option<f64>,
    pub points: usize,
    pub absorption: bool,
}

#[derive(Serialize)]
struct FitReport {
    linear: f64,
    quadratic: f64,
    residual: f64,
    validity_warning: bool,
    baseline: f64,
    points: usize,
}

pub enum SweepKind {
    CouplingDrift,
    Doppler,
}

pub fn sweep(ctx: &Ctx, kind: SweepKind, args: &SweepArgs) -> CliResult {
    let preset = ctx.preset(&args.preset)?;
    let job = if args.absorption { SweepJob::Absorption } else { SweepJob::Retrieval };
    let (op, default_width) = match kind {
        SweepKind::CouplingDrift => ("sweep-dg", 0.1),
        SweepKind::Doppler => ("sweep-doppler", 0.25),
    };
    let half_width = args.half_width.unwrap_or(default_width);
    let grid = symmetric_grid(half_width, args.points);
    let mut sink = ctx.sink(op, Some(&preset.name))?;
    sink.record_override("half_width", half_width);
    sink.record_override("points", grid.len());
    sink.record_override("job", if args.absorption { "absorption" } else { "retrieval" });
    sink.assume("ideal pulse designed at the unperturbed parameters; only the dynamics are perturbed");

    let warning = match kind {
        SweepKind::CouplingDrift => dg_grid_validity(&preset, &grid)?,
        SweepKind::Doppler => doppler_grid_validity(&grid),
    };
    let tol = ctx.tol();
    let n = ctx.grid;
    let baseline = match kind {
        SweepKind::CouplingDrift => drift_merit(&preset, job, 0.0, n, tol)?,
        SweepKind::Doppler => doppler_merit(&preset, job, 0.0, n, tol)?,
    };
    let merits: Vec<Result<f64, cavqed_core::Error>> = par_map(ctx.jobs, grid.clone(), |&x| {
        match kind {
            SweepKind::CouplingDrift => drift_merit(&preset, job, x, n, tol),
            SweepKind::Doppler => doppler_merit(&preset, job, x, n, tol),
        }
    });
    let mut infidelity = Vec::with_capacity(grid.len());
    for m in merits {
        infidelity.push(baseline - m.map_err(|e| CliError::Failed(e.to_string()))?);
    }
    let coeffs = polyfit_through_origin(&grid, &infidelity, 2)?;
    let residual = grid
        .iter()
        .zip(&infidelity)
        .map(|(x, y)| (coeffs[0] * x + coeffs[1] * x * x - y).abs())
        .fold(0.0, f64::max);

    let rows: Vec<Vec<String>> =
        grid.iter().zip(&infidelity).map(|(x, y)| vec![num(*x), num(*y)]).collect();
    sink.csv("sweep.csv", &["x", "infidelity"], &rows)?;
    sink.json(
        "fit.json",
        &FitReport {
            linear: coeffs[0],
            quadratic: coeffs[1],
            residual,
            validity_warning: warning,
            baseline,
            points: grid.len(),
        },
    )?;
    let fit_curve: Vec<(f64, f64)> = (0..201)
        .map(|k| {
            let x = -half_width + 2.0 * half_width * k as f64 / 200.0;
            (x, coeffs[0] * x + coeffs[1] * x * x)
        })
        .collect();
    let plot = Plot {
        title: format!("{op} on {}", preset.name),
        x_label: match kind {
            SweepKind::CouplingDrift => "Δg/g".into(),
            SweepKind::Doppler => "Δd/g".into(),
        },
        y_label: "F0 − F".into(),
        series: vec![
            Series {
                label: "data".into(),
                points: grid.iter().cloned().zip(infidelity.iter().cloned()).collect(),
                dashed: false,
            },
            Series { label: "fit".into(), points: fit_curve, dashed: true },
        ],
        comment: sink.svg_comment(),
    };
    sink.svg("sweep.svg", &plot)?;
    sink.finish()?;
    println!(
        "{op} {}: fit = {:.5}·x {:+.5}·x² (residual {:.1e}{})",
        preset.name,
        coeffs[0],
        coeffs[1],
        residual,
        if warning { ", outside validity window" } else { "" }
    );
    Ok(())
}

pub struct MultiplexArgs {
    pub p: f64,
    pub chain_n: Option<u32>,
    pub preset: Option<String>,
    pub sweep_points: Option<usize>,
    pub p_min: f64,
    pub p_max: f64,
}

#[derive(Serialize)]
struct MultiplexReport {
    p: f64,
    n_real: f64,
    n_opt: u32,
    p_tilde: f64,
    passive_chain: Option<PassiveChain>,
}

#[derive(Serialize)]
struct PassiveChain {
    preset: String,
    n: u32,
    loss_approx: f64,
    loss_exact: f64,
}

pub fn multiplex_cmd(ctx: &Ctx, args: &MultiplexArgs) -> CliResult {
    let plan = multiplex::plan(args.p)?;
    let passive = match (&args.preset, args.chain_n) {
        (Some(name), n) => {
            let preset = ctx.preset(name)?;
            let n = n.unwrap_or(plan.n_opt);
            let (approx, exact) = multiplex::passive_chain_loss(n, &preset.params());
            Some(PassiveChain { preset: preset.name.clone(), n, loss_approx: approx, loss_exact: exact })
        }
        (None, Some(_)) => {
            return Err(CliError::usage("--chain-n needs --preset for the loss model"))
        }
        (None, None) => None,
    };
    let mut sink = ctx.sink("multiplex", args.preset.as_deref())?;
    sink.record_override("p", args.p);
    sink.json(
        "multiplex.json",
        &MultiplexReport {
            p: plan.p,
            n_real: plan.n_real,
            n_opt: plan.n_opt,
            p_tilde: plan.p_tilde,
            passive_chain: passive,
        },
    )?;
    if let Some(points) = args.sweep_points {
        if points < 2 || !(args.p_min > 0.0 && args.p_max < 1.0 && args.p_min < args.p_max) {
            return Err(CliError::usage("p sweep needs 0 < p_min < p_max < 1 and ≥ 2 points"));
        }
        let rows: Vec<Vec<String>> = (0..points)
            .map(|k| {
                let p = args.p_min + (args.p_max - args.p_min) * k as f64 / (points - 1) as f64;
                let plan = multiplex::plan(p).expect("p in range");
                vec![num(p), num(plan.n_real), plan.n_opt.to_string(), num(plan.p_tilde)]
            })
            .collect();
        sink.csv("p_sweep.csv", &["p", "n_real", "n_opt", "p_tilde"], &rows)?;
    }
    sink.finish()?;
    println!(
        "p = {}: Ñ = {:.4}, integer optimum {} with p̃ = {:.5}",
        plan.p, plan.n_real, plan.n_opt, plan.p_tilde
    );
    Ok(())
}

pub enum ProtocolArgs {
    Qkd { encoding: String, basis: String },
    Ghz { n: usize },
    Cluster { n: usize, encoding: String },
    Ring { n: usize },
    Ppcz,
    Qnd,
}

#[derive(Serialize)]
struct TruthTableReport {
    encoding: String,
    basis: String,
    rows: Vec<TruthRowReport>,
}

#[derive(Serialize)]
struct TruthRowReport {
    outcomes: Vec<i8>,
    phi_sum: String,
}

#[derive(Serialize)]
struct StabilizerReport {
    n: usize,
    encoding: String,
    edges: Vec<(usize, usize)>,
    max_stabilizer_defect: f64,
    pass: bool,
}

fn stabilizer_text(title: &str, edges: &[(usize, usize)], defect: f64) -> String {
    let edge_list = if edges.is_empty() {
        "X..X and nearest-neighbor ZZ".to_string()
    } else {
        edges
            .iter()
            .map(|(a, b)| format!("({},{})", a + 1, b + 1))
            .collect::<Vec<_>>()
            .join(" ")
    };
    format!(
        "{title}
generators     {edge_list}
max defect     {defect:.3e}
verdict        {}
",
        if defect <= 1e-10 { "pass" } else { "FAIL" }
    )
}

pub fn protocol(ctx: &Ctx, args: &ProtocolArgs) -> CliResult {
    match args {
        ProtocolArgs::Qkd { encoding, basis } => {
            let enc = match encoding.as_str() {
                "fock" => QkdEncoding::Fock,
                "polarization" => QkdEncoding::Polarization,
                other => return Err(CliError::usage(format!("unknown encoding {other}"))),
            };
            let bas = match basis.as_str() {
                "x" => QkdBasis::X,
                "y" => QkdBasis::Y,
                other => return Err(CliError::usage(format!("unknown basis {other}"))),
            };
            let mut rows =
                derive_truth_table(enc, bas).map_err(|e| CliError::Failed(e.to_string()))?;
            // The published two-outcome tables order rows by outcomes; the
            // three-outcome ones group by φ-sum first. Match that layout.
            if enc == QkdEncoding::Fock {
                rows.sort_by_key(|(o, _)| {
                    o.iter().fold(0usize, |w, &m| (w << 1) | ((m == -1) as usize))
                });
            }
            let mut sink = ctx.sink("protocol-qkd", None)?;
            sink.record_override("encoding", encoding);
            sink.record_override("basis", basis);
            let mut text = String::new();
            let heads = if rows[0].0.len() == 2 { "m1  m2" } else { "m1  m2  m3" };
            text.push_str(&format!("{heads} | phi1+phi2\n"));
            for (outcomes, class) in &rows {
                let cells: Vec<String> =
                    outcomes.iter().map(|m| format!("{:+2}", m)).collect();
                let sum = if *class == PhiSum::Zero { "0" } else { "pi" };
                text.push_str(&format!("{} | {sum}\n", cells.join("  ")));
            }
            print!("{text}");
            sink.text("truth_table.txt", &text)?;
            sink.json(
                "truth_table.json",
                &TruthTableReport {
                    encoding: encoding.clone(),
                    basis: basis.clone(),
                    rows: rows
                        .iter()
                        .map(|(o, c)| TruthRowReport {
                            outcomes: o.clone(),
                            phi_sum: if *c == PhiSum::Zero { "0".into() } else { "pi".into() },
                        })
                        .collect(),
                },
            )?;
            sink.finish()?;
        }
        ProtocolArgs::Ghz { n } => {
            let state = build_ghz_single_rail(*n).map_err(|e| CliError::Failed(e.to_string()))?;
            // GHZ stabilizers: X…X and nearest-neighbor ZZ.
            use cavqed_core::protocol::ghz_stabilizer_defect;
            let defect = ghz_stabilizer_defect(&state).map_err(|e| CliError::Failed(e.to_string()))?;
            let mut sink = ctx.sink("protocol-ghz", None)?;
            sink.record_override("n", *n);
            sink.json(
                "stabilizers.json",
                &StabilizerReport {
                    n: *n,
                    encoding: "single_rail".into(),
                    edges: Vec::new(),
                    max_stabilizer_defect: defect,
                    pass: defect <= 1e-10,
                },
            )?;
            sink.text(
                "stabilizers.txt",
                &stabilizer_text(&format!("GHZ state, {n} photons (single rail)"), &[], defect),
            )?;
            sink.finish()?;
            println!("GHZ n={n}: stabilizer defect {defect:.2e}");
        }
        ProtocolArgs::Cluster { n, encoding } => {
            let enc = match encoding.as_str() {
                "single-rail" => ClusterEncoding::SingleRail,
                "dual-rail" => ClusterEncoding::DualRail,
                other => return Err(CliError::usage(format!("unknown encoding {other}"))),
            };
            let state = build_cluster_1d(*n, enc).map_err(|e| CliError::Failed(e.to_string()))?;
            let edges = path_edges(*n);
            let defect =
                stabilizer_defect(&state, &edges).map_err(|e| CliError::Failed(e.to_string()))?;
            let mut sink = ctx.sink("protocol-cluster", None)?;
            sink.record_override("n", *n);
            sink.record_override("encoding", encoding);
            sink.text(
                "stabilizers.txt",
                &stabilizer_text(&format!("1D cluster, {n} photons ({encoding})"), &edges, defect),
            )?;
            sink.json(
                "stabilizers.json",
                &StabilizerReport {
                    n: *n,
                    encoding: encoding.clone(),
                    edges,
                    max_stabilizer_defect: defect,
                    pass: defect <= 1e-10,
                },
            )?;
            sink.finish()?;
            println!("1D cluster n={n} ({encoding}): stabilizer defect {defect:.2e}");
        }
        ProtocolArgs::Ring { n } => {
            let state = build_cluster_ring(*n).map_err(|e| CliError::Failed(e.to_string()))?;
            let edges = ring_edges(*n);
            let defect =
                stabilizer_defect(&state, &edges).map_err(|e| CliError::Failed(e.to_string()))?;
            let mut sink = ctx.sink("protocol-ring", None)?;
            sink.record_override("n", *n);
            sink.text(
                "stabilizers.txt",
                &stabilizer_text(&format!("ring cluster, {n} photons (single rail)"), &edges, defect),
            )?;
            sink.json(
                "stabilizers.json",
                &StabilizerReport {
                    n: *n,
                    encoding: "single_rail".into(),
                    edges,
                    max_stabilizer_defect: defect,
                    pass: defect <= 1e-10,
                },
            )?;
            sink.finish()?;
            println!("ring cluster n={n}: stabilizer defect {defect:.2e}");
        }
        ProtocolArgs::Ppcz => {
            let report = photon_photon_cz().map_err(|e| CliError::Failed(e.to_string()))?;
            let mut sink = ctx.sink("protocol-ppcz", None)?;
            #[derive(Serialize)]
            struct PpczReport {
                max_deviation: f64,
                cases: Vec<(String, usize)>,
            }
            sink.json(
                "ppcz.json",
                &PpczReport {
                    max_deviation: report.max_deviation,
                    cases: report
                        .cases
                        .iter()
                        .map(|(label, branches)| (label.clone(), branches.len()))
                        .collect(),
                },
            )?;
            sink.finish()?;
            println!(
                "photon-photon CZ over 8 inputs: max branch deviation {:.2e}",
                report.max_deviation
            );
        }
        ProtocolArgs::Qnd => {
            let report = qnd_detect().map_err(|e| CliError::Failed(e.to_string()))?;
            let mut sink = ctx.sink("protocol-qnd", None)?;
            #[derive(Serialize)]
            struct QndReport {
                max_deviation: f64,
            }
            sink.json("qnd.json", &QndReport { max_deviation: report.max_deviation })?;
            sink.finish()?;
            println!("QND detection: max branch deviation {:.2e}", report.max_deviation);
        }
    }
    Ok(())
}

/// Case-2 comparison curves at a fixed pulse-energy budget (used by the
/// figure reproduction): (x*, η at x*, η at x₀).
pub fn fig6_operating_points(preset: &Preset, f_over_g: f64) -> CliResult<(f64, f64, f64)> {
    let params = preset.params();
    let f0t = f_over_g * params.g;
    let x_star = case2_optimize_x(&params, f0t);
    let eta_star = eta_finite_power(&params, f0t, -x_star * params.g, 0.0);
    let x0 = case2_point(&params)?.x0;
    let eta_x0 = eta_finite_power(&params, f0t, -x0 * params.g, 0.0);
    Ok((x_star, eta_star, eta_x0))
}
