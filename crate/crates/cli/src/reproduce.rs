//! Reproduction of the published tables and figures, with per-cell
//! comparison against the acceptance tolerances. Hard cells gate the exit
//! status; diagnostic cells are reported only.

use crate::commands::{fig6_operating_points, CliError, CliResult, Ctx};
use crate::out::{num, Sink};
use crate::par::par_map;
use crate::svg::{Plot, Series};
use cavqed_core::dynamics::{
    integrate_absorption, integrate_retrieval, retrieval_metrics, DriveSpec,
};
use cavqed_core::error_models::{
    doppler_merit, drift_merit, polyfit_through_origin, symmetric_grid, SweepJob,
};
use cavqed_core::mode::ModeShape;
use cavqed_core::ode::Tolerances;
use cavqed_core::params::Detunings;
use cavqed_core::presets::Preset;
use cavqed_core::pulse::time_reverse;
use cavqed_core::scatter::{detection_efficiency, entangling_fidelity};
use cavqed_core::synth::{case2_point, synthesize_adiabatic, synthesize_exact};
use serde::Serialize;
use std::f64::consts::TAU;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CellStatus {
    Pass,
    Fail,
    Diag,
}

#[derive(Debug, Clone, Serialize)]
pub struct Cell {
    pub row: String,
    pub quantity: String,
    pub computed: f64,
    pub reference: f64,
    pub band: String,
    pub status: CellStatus,
}

impl Cell {
    fn absolute(row: &str, quantity: &str, computed: f64, reference: f64, tol: f64, hard: bool) -> Cell {
        let ok = (computed - reference).abs() <= tol;
        Cell {
            row: row.into(),
            quantity: quantity.into(),
            computed,
            reference,
            band: format!("±{tol}"),
            status: status(ok, hard),
        }
    }

    fn relative(row: &str, quantity: &str, computed: f64, reference: f64, rel: f64, hard: bool) -> Cell {
        let ok = (computed - reference).abs() <= rel * reference.abs();
        Cell {
            row: row.into(),
            quantity: quantity.into(),
            computed,
            reference,
            band: format!("±{:.0}%", rel * 100.0),
            status: status(ok, hard),
        }
    }
}

fn status(ok: bool, hard: bool) -> CellStatus {
    if ok {
        CellStatus::Pass
    } else if hard {
        CellStatus::Fail
    } else {
        CellStatus::Diag
    }
}

#[derive(Serialize)]
struct Report<'a> {
    target: &'a str,
    cells: &'a [Cell],
    hard_failures: usize,
}

fn render_text(target: &str, cells: &[Cell]) -> String {
    let mut text = format!("{target}\n");
    text.push_str(&format!(
        "{:<12} {:<14} {:>12} {:>12} {:>8}  status\n",
        "row", "quantity", "computed", "reference", "band"
    ));
    for c in cells {
        text.push_str(&format!(
            "{:<12} {:<14} {:>12.5} {:>12.5} {:>8}  {}\n",
            c.row,
            c.quantity,
            c.computed,
            c.reference,
            c.band,
            match c.status {
                CellStatus::Pass => "pass",
                CellStatus::Fail => "FAIL",
                CellStatus::Diag => "diag",
            }
        ));
    }
    text
}

fn emit(mut sink: Sink, target: &str, cells: Vec<Cell>) -> CliResult<usize> {
    let failures = cells.iter().filter(|c| c.status == CellStatus::Fail).count();
    let rows: Vec<Vec<String>> = cells
        .iter()
        .map(|c| {
            vec![
                c.row.clone(),
                c.quantity.clone(),
                num(c.computed),
                num(c.reference),
                c.band.clone(),
                match c.status {
                    CellStatus::Pass => "pass".into(),
                    CellStatus::Fail => "fail".into(),
                    CellStatus::Diag => "diag".into(),
                },
            ]
        })
        .collect();
    sink.csv(
        &format!("{target}.csv"),
        &["row", "quantity", "computed", "reference", "band", "status"],
        &rows,
    )?;
    sink.json(
        &format!("{target}.json"),
        &Report { target, cells: &cells, hard_failures: failures },
    )?;
    let text = render_text(target, &cells);
    sink.text(&format!("{target}.txt"), &text)?;
    sink.finish()?;
    print!("{text}");
    if failures > 0 {
        let failing: Vec<String> = cells
            .iter()
            .filter(|c| c.status == CellStatus::Fail)
            .map(|c| format!("{}/{}", c.row, c.quantity))
            .collect();
        eprintln!("{target}: {} hard cell(s) failed: {}", failures, failing.join(", "));
    }
    Ok(failures)
}

struct RowMetrics {
    one_minus_f: f64,
    one_minus_eta_abs: f64,
    peak_ghz: f64,
}

fn row_metrics(ctx: &Ctx, preset: &Preset) -> CliResult<RowMetrics> {
    let params = preset.params();
    let det = preset.detunings()?;
    let mode = ModeShape::sine_squared(preset.t_ns)?;
    let eta_r = preset
        .target_eta_r()
        .ok_or_else(|| CliError::usage(format!("{} lacks a fidelity target", preset.name)))?;
    let synth = synthesize_exact(&params, &mode, &det, eta_r, ctx.grid)?;
    let tol = Tolerances::default();
    let drive = DriveSpec::retrieval(synth.pulse.clone(), det);
    let traj =
        integrate_retrieval(&params, &drive, tol).map_err(|e| CliError::Failed(e.to_string()))?;
    let f = retrieval_metrics(&traj, &mode, det.delta_p)?.fidelity_f;
    let adrive = DriveSpec::absorb_photon(time_reverse(&synth.pulse), det, &mode)?;
    let atraj =
        integrate_absorption(&params, &adrive, tol).map_err(|e| CliError::Failed(e.to_string()))?;
    let eta_abs = retrieval_metrics(&atraj, &mode, det.delta_p)?.eta_abs;
    Ok(RowMetrics {
        one_minus_f: 1.0 - f,
        one_minus_eta_abs: 1.0 - eta_abs,
        peak_ghz: synth.pulse.peak() / TAU,
    })
}

pub fn table1(ctx: &Ctx) -> CliResult<usize> {
    let mut cells = Vec::new();
    for name in
        ["cavity1a", "cavity1b", "cavity1c", "cavity2a", "cavity2b", "cavity3", "cavity4"]
    {
        let preset = ctx.preset(name)?;
        let params = preset.params();
        let refs = preset.refs;
        cells.push(Cell::relative(name, "C", params.cooperativity(), refs.c.unwrap(), 0.02, false));
        let m = row_metrics(ctx, &preset)?;
        cells.push(Cell::relative(name, "1-F", m.one_minus_f, refs.one_minus_f.unwrap(), 0.30, true));
        cells.push(Cell::relative(
            name,
            "1-eta_abs",
            m.one_minus_eta_abs,
            refs.one_minus_eta_abs.unwrap(),
            0.30,
            false,
        ));
        cells.push(Cell::relative(name, "omega0", m.peak_ghz, refs.omega0_ghz.unwrap(), 0.25, false));
        let mode = ModeShape::sine_squared(preset.t_ns)?;
        let fen = 1.0 - entangling_fidelity(&params, &mode);
        cells.push(Cell::relative(name, "1-F_en", fen, refs.one_minus_fen.unwrap(), 0.50, false));
        let d = 1.0 - detection_efficiency(&params, &mode);
        cells.push(Cell::relative(name, "1-eta_d", d, refs.one_minus_eta_d.unwrap(), 0.50, false));
    }
    let mut sink = ctx.sink_in("table1", "reproduce-table1", None)?;
    sink.assume("sine-squared mode of each row's published duration");
    sink.assume("retrieval efficiency target set to 1 - published infidelity");
    sink.assume("case-1 rows at cavity resonance; case-2 rows at delta_p = -x0*g");
    sink.assume("entangling/detection diagnostics use the photonic filter only");
    emit(sink, "table1", cells)
}

pub fn table2(ctx: &Ctx) -> CliResult<usize> {
    let mut cells = Vec::new();
    for (name, tol_abs) in [("cavity5", 0.005), ("cavity6", 0.01), ("cavity7", 0.01)] {
        let preset = ctx.preset(name)?;
        let refs = preset.refs;
        cells.push(Cell::relative(
            name,
            "C",
            preset.params().cooperativity(),
            refs.c.unwrap(),
            0.02,
            false,
        ));
        let m = row_metrics(ctx, &preset)?;
        cells.push(Cell::absolute(name, "1-F", m.one_minus_f, refs.one_minus_f.unwrap(), tol_abs, false));
        cells.push(Cell::absolute(
            name,
            "1-eta_abs",
            m.one_minus_eta_abs,
            refs.one_minus_eta_abs.unwrap(),
            tol_abs,
            true,
        ));
        cells.push(Cell::relative(name, "omega0", m.peak_ghz, refs.omega0_ghz.unwrap(), 0.25, false));
    }
    let mut sink = ctx.sink_in("table2", "reproduce-table2", None)?;
    sink.assume("sine-squared mode of each row's published duration");
    sink.assume("retrieval efficiency target set to 1 - published infidelity");
    sink.assume("case-1 rows at cavity resonance; case-2 rows at delta_p = -x0*g");
    sink.assume("entangling/detection diagnostics use the photonic filter only");
    emit(sink, "table2", cells)
}

pub fn table3(ctx: &Ctx) -> CliResult<usize> {
    let mut cells = Vec::new();
    for name in ["zeeman", "mot", "dipole_trap"] {
        let preset = ctx.preset(name)?;
        let refs = preset.refs;
        let tau_over_t = preset.tau_ns / preset.t_ns;
        cells.push(Cell::relative(name, "tau/T", tau_over_t, refs.tau_over_t.unwrap(), 0.10, true));
        cells.push(Cell::relative(
            name,
            "C",
            preset.params().cooperativity(),
            refs.c.unwrap(),
            0.02,
            false,
        ));
        let m = row_metrics(ctx, &preset)?;
        cells.push(Cell::relative(name, "1-F", m.one_minus_f, refs.one_minus_f.unwrap(), 0.30, false));
    }
    let mut sink = ctx.sink_in("table3", "reproduce-table3", None)?;
    sink.assume("sine-squared mode of each row's published duration");
    sink.assume("retrieval efficiency target set to 1 - published infidelity");
    sink.assume("case-1 rows at cavity resonance; case-2 rows at delta_p = -x0*g");
    sink.assume("entangling/detection diagnostics use the photonic filter only");
    emit(sink, "table3", cells)
}

pub fn fig6(ctx: &Ctx) -> CliResult<usize> {
    let preset = ctx.preset("cavity5")?;
    let params = preset.params();
    let mode = ModeShape::sine_squared(preset.t_ns)?;
    let f_over_g = 1.34;
    let (x_star, eta_star, eta_x0) = fig6_operating_points(&preset, f_over_g)?;
    let x0 = case2_point(&params)?.x0;

    // Blue: resonant retrieval at η_r = 0.979 (unlimited power); red and
    // dashed: the shifted operating points at the fixed energy budget. The
    // closed forms describe the adiabatic pulses, so those are plotted.
    let blue_det = Detunings::for_photon(0.0, 0.0);
    let blue = synthesize_adiabatic(&params, &mode, &blue_det, 0.979, ctx.grid)?;
    let red_det = Detunings::for_photon(-x_star * params.g, 0.0);
    let red = synthesize_adiabatic(&params, &mode, &red_det, eta_star, ctx.grid)?;
    let dash_det = Detunings::for_photon(-x0 * params.g, 0.0);
    let dashed = synthesize_adiabatic(&params, &mode, &dash_det, eta_x0, ctx.grid)?;

    let mut cells = Vec::new();
    cells.push(Cell::absolute("fig6", "x0", x0, 0.916, 0.001, true));
    // The numerically optimized offset: expected RED (see the ledger); the
    // stated objective peaks at 0.907, not the published 0.894.
    cells.push(Cell::absolute("fig6", "x_star", x_star, 0.894, 0.01, true));
    let saturation = f_over_g * params.g / (params.g * params.g / (2.0 * params.kappa()));
    cells.push(Cell::absolute("fig6", "f/(g2/2k)", saturation, 1.53, 0.01, true));
    let peak_order = blue.pulse.peak() > red.pulse.peak();
    cells.push(Cell {
        row: "fig6".into(),
        quantity: "blue>red".into(),
        computed: if peak_order { 1.0 } else { 0.0 },
        reference: 1.0,
        band: "exact".into(),
        status: status(peak_order, true),
    });
    let rel = (red.pulse.peak() - dashed.pulse.peak()).abs() / red.pulse.peak();
    cells.push(Cell {
        row: "fig6".into(),
        quantity: "red~dashed".into(),
        computed: rel,
        reference: 0.0,
        band: "±0.2".into(),
        status: status(rel <= 0.2, true),
    });

    let mut sink = ctx.sink_in("fig6", "reproduce-fig6", Some("cavity5"))?;
    sink.assume("curves from the adiabatic closed forms; blue at eta_r = 0.979, red/dashed at the f(0,T) = 1.34g budget");
    let curves = [("blue_case1", &blue), ("red_xstar", &red), ("dashed_x0", &dashed)];
    let mut rows = Vec::new();
    for (k, t) in blue.pulse.grid().times().enumerate() {
        rows.push(vec![
            num(t),
            num(blue.pulse.omega0()[k] / TAU),
            num(red.pulse.omega0()[k] / TAU),
            num(dashed.pulse.omega0()[k] / TAU),
        ]);
    }
    sink.csv(
        "fig6.csv",
        &["t_ns", "omega0_case1_ghz", "omega0_xstar_ghz", "omega0_x0_ghz"],
        &rows,
    )?;
    let plot = Plot {
        title: "control pulse comparison at fixed energy budget".into(),
        x_label: "t (ns)".into(),
        y_label: "omega0 / 2pi (GHz)".into(),
        series: curves
            .iter()
            .map(|(label, s)| Series {
                label: label.to_string(),
                points: s
                    .pulse
                    .grid()
                    .times()
                    .enumerate()
                    .map(|(k, t)| (t, s.pulse.omega0()[k] / TAU))
                    .collect(),
                dashed: label.starts_with("dashed"),
            })
            .collect(),
        comment: sink.svg_comment(),
    };
    sink.svg("fig6.svg", &plot)?;

    emit(sink, "fig6", cells)
}

pub fn fig7(ctx: &Ctx) -> CliResult<usize> {
    let preset = ctx.preset("cavity5")?;
    let params = preset.params();
    let det = preset.detunings()?;
    let mode = ModeShape::sine_squared(preset.t_ns)?;
    let synth = synthesize_exact(&params, &mode, &det, 0.979, ctx.grid)?;
    let drive = DriveSpec::retrieval(synth.pulse.clone(), det);
    let traj = integrate_retrieval(&params, &drive, Tolerances::default())
        .map_err(|e| CliError::Failed(e.to_string()))?;
    let metrics = retrieval_metrics(&traj, &mode, det.delta_p)?;

    let mut cells = Vec::new();
    cells.push(Cell::absolute("fig7", "1-eta_r", 1.0 - metrics.eta_r, 0.021, 0.005, true));
    let overlap = (metrics.fidelity_f / metrics.eta_r).sqrt();
    cells.push(Cell {
        row: "fig7".into(),
        quantity: "mode_overlap".into(),
        computed: overlap,
        reference: 1.0,
        band: "≥0.999".into(),
        status: status(overlap >= 0.999, true),
    });

    let mut sink = ctx.sink_in("fig7", "reproduce-fig7", Some("cavity5"))?;
    sink.assume("exact synthesis at eta_r = 0.979, sine-squared mode, Δp = −x₀·g");
    let mut rows = Vec::new();
    let mut out_series = Vec::new();
    let mut target_series = Vec::new();
    let mut pulse_series = Vec::new();
    for (k, t) in traj.grid.times().enumerate() {
        let rotated = traj.a_out[k] * cavqed_core::C64::from_polar(1.0, det.delta_p * t);
        let target = metrics.eta_r.sqrt() * mode.h(t);
        rows.push(vec![
            num(t),
            num(synth.pulse.omega0()[k] / TAU),
            num(rotated.re),
            num(target),
        ]);
        pulse_series.push((t, synth.pulse.omega0()[k] / TAU));
        out_series.push((t, rotated.re));
        target_series.push((t, target));
    }
    sink.csv(
        "fig7.csv",
        &["t_ns", "omega0_ghz", "re_aout_rotated", "target_mode"],
        &rows,
    )?;
    sink.svg(
        "fig7a.svg",
        &Plot {
            title: "case-2 retrieval pulse".into(),
            x_label: "t (ns)".into(),
            y_label: "omega0 / 2pi (GHz)".into(),
            series: vec![Series { label: "omega0".into(), points: pulse_series, dashed: false }],
            comment: sink.svg_comment(),
        },
    )?;
    sink.svg(
        "fig7b.svg",
        &Plot {
            title: "retrieved field vs target mode".into(),
            x_label: "t (ns)".into(),
            y_label: "amplitude (ns^-1/2)".into(),
            series: vec![
                Series { label: "Re a_out·e^{iΔp t}".into(), points: out_series, dashed: false },
                Series { label: "√η·h(t)".into(), points: target_series, dashed: true },
            ],
            comment: sink.svg_comment(),
        },
    )?;

    emit(sink, "fig7", cells)
}

struct SweepSpec {
    preset: &'static str,
    half_width: f64,
    kind: FitKind,
    linear_ref: f64,
    linear_tol: f64,
    quad_ref: f64,
    quad_tol: f64,
    gate_linear: bool,
}

enum FitKind {
    Drift,
    Doppler,
}

/// One finished fit sweep: label, (x, infidelity) samples, (c1, c2).
type FitRun = (String, Vec<(f64, f64)>, (f64, f64));

fn run_fit_sweep(ctx: &Ctx, spec: &SweepSpec) -> CliResult<(Vec<Cell>, FitRun)> {
    let preset = ctx.preset(spec.preset)?;
    let grid = symmetric_grid(spec.half_width, 21);
    let tol = Tolerances::default();
    let n = ctx.grid;
    let job = SweepJob::Retrieval;
    let baseline = match spec.kind {
        FitKind::Drift => drift_merit(&preset, job, 0.0, n, tol)?,
        FitKind::Doppler => doppler_merit(&preset, job, 0.0, n, tol)?,
    };
    let merits: Vec<Result<f64, cavqed_core::Error>> =
        par_map(ctx.jobs, grid.clone(), |&x| match spec.kind {
            FitKind::Drift => drift_merit(&preset, job, x, n, tol),
            FitKind::Doppler => doppler_merit(&preset, job, x, n, tol),
        });
    let mut infidelity = Vec::with_capacity(grid.len());
    for m in merits {
        infidelity.push(baseline - m.map_err(|e| CliError::Failed(e.to_string()))?);
    }
    let coeffs = polyfit_through_origin(&grid, &infidelity, 2)?;
    let quantity = match spec.kind {
        FitKind::Drift => "dg",
        FitKind::Doppler => "doppler",
    };
    let cells = vec![
        Cell::absolute(
            spec.preset,
            &format!("{quantity}_linear"),
            coeffs[0],
            spec.linear_ref,
            spec.linear_tol,
            spec.gate_linear,
        ),
        Cell::absolute(
            spec.preset,
            &format!("{quantity}_quadratic"),
            coeffs[1],
            spec.quad_ref,
            spec.quad_tol,
            true,
        ),
    ];
    let data: Vec<(f64, f64)> = grid.into_iter().zip(infidelity).collect();
    Ok((cells, (spec.preset.to_string(), data, (coeffs[0], coeffs[1]))))
}

fn emit_fit_figure(
    sink: &mut Sink,
    target: &str,
    runs: Vec<FitRun>,
    x_label: &str,
) -> CliResult {
    for (label, data, fit) in &runs {
        let rows: Vec<Vec<String>> =
            data.iter().map(|(x, y)| vec![num(*x), num(*y)]).collect();
        sink.csv(&format!("{target}_{label}.csv"), &["x", "infidelity"], &rows)?;
        let half = data.iter().map(|(x, _)| x.abs()).fold(0.0, f64::max);
        let fit_curve: Vec<(f64, f64)> = (0..201)
            .map(|k| {
                let x = -half + 2.0 * half * k as f64 / 200.0;
                (x, fit.0 * x + fit.1 * x * x)
            })
            .collect();
        let plot = Plot {
            title: format!("{target}: {label}"),
            x_label: x_label.into(),
            y_label: "F0 − F".into(),
            series: vec![
                Series { label: "data".into(), points: data.clone(), dashed: false },
                Series { label: "fit".into(), points: fit_curve, dashed: true },
            ],
            comment: sink.svg_comment(),
        };
        sink.svg(&format!("{target}_{label}.svg"), &plot)?;
    }
    Ok(())
}

pub fn fig9(ctx: &Ctx) -> CliResult<usize> {
    let specs = [
        SweepSpec {
            preset: "cavity1a",
            half_width: 0.1,
            kind: FitKind::Drift,
            linear_ref: 0.014,
            linear_tol: 0.01,
            quad_ref: 0.024,
            quad_tol: 0.01,
            gate_linear: true,
        },
        SweepSpec {
            preset: "cavity5",
            half_width: 0.1,
            kind: FitKind::Drift,
            linear_ref: -0.0024,
            linear_tol: 0.01,
            quad_ref: 0.22,
            quad_tol: 0.05,
            gate_linear: true,
        },
    ];
    let mut cells = Vec::new();
    let mut runs = Vec::new();
    for spec in &specs {
        let (mut c, run) = run_fit_sweep(ctx, spec)?;
        cells.append(&mut c);
        runs.push(run);
    }
    let mut sink = ctx.sink_in("fig9", "reproduce-fig9", None)?;
    emit_fit_figure(&mut sink, "fig9", runs, "Δg/g")?;
    emit(sink, "fig9", cells)
}

pub fn fig10(ctx: &Ctx) -> CliResult<usize> {
    let specs = [
        SweepSpec {
            preset: "cavity1a",
            half_width: 0.25,
            kind: FitKind::Doppler,
            linear_ref: 0.0,
            linear_tol: 0.1,
            quad_ref: 2.5,
            quad_tol: 0.5,
            gate_linear: true,
        },
        SweepSpec {
            preset: "cavity5",
            half_width: 0.25,
            kind: FitKind::Doppler,
            linear_ref: 0.055,
            linear_tol: 0.05,
            quad_ref: 1.16,
            quad_tol: 0.3,
            gate_linear: true,
        },
    ];
    let mut cells = Vec::new();
    let mut runs = Vec::new();
    for spec in &specs {
        let (mut c, run) = run_fit_sweep(ctx, spec)?;
        cells.append(&mut c);
        runs.push(run);
    }
    let mut sink = ctx.sink_in("fig10", "reproduce-fig10", None)?;
    emit_fit_figure(&mut sink, "fig10", runs, "Δd/g")?;
    emit(sink, "fig10", cells)
}

pub fn reproduce(ctx: &Ctx, target: &str) -> CliResult<usize> {
    match target {
        "table1" => table1(ctx),
        "table2" => table2(ctx),
        "table3" => table3(ctx),
        "fig6" => fig6(ctx),
        "fig7" => fig7(ctx),
        "fig9" => fig9(ctx),
        "fig10" => fig10(ctx),
        "all" => {
            let mut failures = 0;
            for t in ["table1", "table2", "table3", "fig6", "fig7", "fig9", "fig10"] {
                failures += reproduce(ctx, t)?;
            }
            Ok(failures)
        }
        other => Err(CliError::usage(format!(
            "unknown target {other}; expected table1|table2|table3|fig6|fig7|fig9|fig10|all"
        ))),
    }
}
