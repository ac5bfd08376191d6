//! Experiment runners behind the command-line interface.
//!
//! Each runner turns a config into CSV artifacts plus a JSON summary. Output
//! depends only on the config: sweeps are computed in parallel but written in
//! grid order.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde_json::{json, Value};

use crate::analytics::{
    asymptotic_distribution, closed_form_theta_half, empirical_density, hadamard_density, reflecting_bound_state,
};
use crate::config::{
    AsymptoticConfig, BoundStateConfig, Edge2dConfig, Experiment, ExperimentConfig, Family2d, Phase1dConfig,
    Phase2dConfig, SpectrumConfig, Walk1dConfig,
};
use crate::error::{Result, WalkError};
use crate::lattice::{Geometry, SpinorState};
use crate::linalg::{phase_distance, C64};
use crate::protocol::{build_protocol, ProtocolFamily};
use crate::spectral::{diagonalize, strip_spectrum, StripOptions};
use crate::topology::{
    bound_state_charges, gapless_lines_sixop, phase_cell_1d, phase_cell_2d, verify_chiral_symmetry,
    winding_closed_form, ChiralFrame, WindingClass, CRITICAL_GAP,
};

pub const CSV_VERSION: &str = "# qwalk-topo v1";

/// One output file.
#[derive(Clone, Debug, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

#[derive(Clone, Debug)]
pub struct RunReport {
    pub artifacts: Vec<Artifact>,
    pub summary: Value,
    pub warnings: Vec<String>,
}

impl RunReport {
    pub fn artifact(&self, name: &str) -> Option<&Artifact> {
        self.artifacts.iter().find(|a| a.name == name)
    }

    /// Writes every artifact and `summary.json` into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        for a in &self.artifacts {
            std::fs::write(dir.join(&a.name), &a.contents)?;
        }
        let mut summary = serde_json::to_string_pretty(&self.summary)?;
        summary.push('\n');
        std::fs::write(dir.join("summary.json"), summary)?;
        Ok(())
    }
}

/// Float with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Minimal CSV builder with the versioned header line.
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(columns: &[&str]) -> Self {
        let mut text = String::from(CSV_VERSION);
        text.push('\n');
        text.push_str(&columns.join(","));
        text.push('\n');
        Csv { text }
    }

    pub fn row(&mut self, cells: &[String]) {
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
    }

    pub fn finish(self, name: &str) -> Artifact {
        Artifact { name: name.into(), contents: self.text }
    }
}

fn opt_int(v: Option<i64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Inclusive grid of `n` points from `range[0]` to `range[1]`.
pub fn inclusive_grid(range: [f64; 2], n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![range[0]],
        _ => (0..n).map(|i| range[0] + (range[1] - range[0]) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// Half-open grid of `n` points on `[range[0], range[1])`.
pub fn half_open_grid(range: [f64; 2], n: usize) -> Vec<f64> {
    (0..n).map(|i| range[0] + (range[1] - range[0]) * i as f64 / n as f64).collect()
}

/// Runs an experiment on a pool of `workers` threads (all cores when `None`).
pub fn run_with_workers(cfg: &ExperimentConfig, workers: Option<usize>) -> Result<RunReport> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        if w == 0 {
            return Err(WalkError::InvalidConfig("--workers must be positive".into()));
        }
        builder = builder.num_threads(w);
    }
    let pool = builder.build().map_err(|e| WalkError::InvalidConfig(e.to_string()))?;
    pool.install(|| run(cfg))
}

pub fn run(cfg: &ExperimentConfig) -> Result<RunReport> {
    let mut report = match &cfg.experiment {
        Experiment::Walk1d(c) => walk1d(c)?,
        Experiment::Phase1d(c) => phase1d(c)?,
        Experiment::Phase2d(c) => phase2d(c)?,
        Experiment::Edge2d(c) => edge2d(c)?,
        Experiment::Boundstate(c) => boundstate(c)?,
        Experiment::Asymptotic(c) => asymptotic(c)?,
        Experiment::Spectrum(c) => spectrum(c)?,
    };
    let results = std::mem::take(&mut report.summary);
    report.summary = json!({
        "label": cfg.label,
        "experiment": cfg.experiment.name(),
        "paper_figure": cfg.paper_figure,
        "warnings": report.warnings,
        "results": results,
    });
    Ok(report)
}

fn walk1d(c: &Walk1dConfig) -> Result<RunReport> {
    if c.family.is_2d() {
        return Err(WalkError::InvalidConfig("walk1d needs a one-dimensional family".into()));
    }
    let geometry = c.geometry.unwrap_or_else(|| Geometry::line_for_steps(c.steps));
    let protocol = build_protocol(&c.family, geometry)?;
    let psi0 = SpinorState::localized(geometry, (c.start, 0), c.spinor)?;
    let mut dist = Csv::new(&["step", "x", "probability"]);
    let mut window = Csv::new(&["step", "p_window"]);
    let mut series = Vec::with_capacity(c.steps + 1);
    protocol.evolve_with(&psi0, c.steps, |t, s| {
        for (site, p) in s.position_distribution().into_iter().enumerate() {
            dist.row(&[t.to_string(), geometry.coords(site).0.to_string(), fmt_f64(p)]);
        }
        let pw = s.probability_in_window((c.start, 0), c.window_radius);
        window.row(&[t.to_string(), fmt_f64(pw)]);
        series.push(pw);
    })?;
    let last = *series.last().unwrap();
    if let Some(lo) = c.expect_window_above {
        if last <= lo {
            return Err(WalkError::ToleranceBreach(format!("p_window({}) = {last} is not above {lo}", c.steps)));
        }
    }
    if let Some(hi) = c.expect_window_below {
        if last >= hi {
            return Err(WalkError::ToleranceBreach(format!("p_window({}) = {last} is not below {hi}", c.steps)));
        }
    }
    Ok(RunReport {
        artifacts: vec![dist.finish("distribution.csv"), window.finish("window.csv")],
        summary: json!({
            "geometry": geometry,
            "steps": c.steps,
            "window_radius": c.window_radius,
            "p_window_final": last,
            "p_window_step10": series.get(10),
        }),
        warnings: Vec::new(),
    })
}

fn phase1d(c: &Phase1dConfig) -> Result<RunReport> {
    let t1 = inclusive_grid(c.theta1, c.n1);
    let t2 = inclusive_grid(c.theta2, c.n2);
    let points: Vec<(f64, f64)> = t1.iter().flat_map(|&a| t2.iter().map(move |&b| (a, b))).collect();
    let cells = points.par_iter().map(|&(a, b)| phase_cell_1d(a, b, c.nk)).collect::<Result<Vec<_>>>()?;
    let mut csv = Csv::new(&["theta1", "theta2", "winding", "closed_form", "critical", "min_gap_0", "min_gap_pi"]);
    let (mut critical, mut mismatches) = (0, 0);
    for cell in &cells {
        let closed = winding_closed_form(cell.theta1, cell.theta2);
        let crit = match (cell.min_gap_0 < CRITICAL_GAP, cell.min_gap_pi < CRITICAL_GAP) {
            (true, true) => "both",
            (true, false) => "zero",
            (false, true) => "pi",
            (false, false) => "",
        };
        if !crit.is_empty() {
            critical += 1;
        }
        let closed_s = match closed {
            WindingClass::Value(w) => {
                if cell.invariant.is_some_and(|v| v != w) {
                    mismatches += 1;
                }
                w.to_string()
            }
            WindingClass::OnCriticalLine => String::new(),
        };
        csv.row(&[
            fmt_f64(cell.theta1),
            fmt_f64(cell.theta2),
            opt_int(cell.invariant),
            closed_s,
            crit.to_string(),
            fmt_f64(cell.min_gap_0),
            fmt_f64(cell.min_gap_pi),
        ]);
    }
    Ok(RunReport {
        artifacts: vec![csv.finish("phase1d.csv")],
        summary: json!({ "cells": cells.len(), "critical": critical, "closed_form_mismatches": mismatches }),
        warnings: Vec::new(),
    })
}

fn phase2d(c: &Phase2dConfig) -> Result<RunReport> {
    let t1 = inclusive_grid(c.theta1, c.n1);
    let t2 = inclusive_grid(c.theta2, c.n2);
    let points: Vec<(f64, f64)> = t1.iter().flat_map(|&a| t2.iter().map(move |&b| (a, b))).collect();
    let cells = points
        .par_iter()
        .map(|&(a, b)| phase_cell_2d(&c.family.build(a, b), a, b, c.nk))
        .collect::<Result<Vec<_>>>()?;
    let mut csv =
        Csv::new(&["theta1", "theta2", "chern", "min_gap_0", "min_gap_pi", "line_zero", "line_pi"]);
    let mut values = std::collections::BTreeMap::<i64, usize>::new();
    for cell in &cells {
        let (lz, lp) = match c.family {
            Family2d::SixOp => {
                let class = gapless_lines_sixop(cell.theta1, cell.theta2, 1e-9);
                (class.gapless_at_zero() as u8, class.gapless_at_pi() as u8)
            }
            Family2d::Simple => (0, 0),
        };
        if let Some(v) = cell.invariant {
            *values.entry(v).or_default() += 1;
        }
        csv.row(&[
            fmt_f64(cell.theta1),
            fmt_f64(cell.theta2),
            opt_int(cell.invariant),
            fmt_f64(cell.min_gap_0),
            fmt_f64(cell.min_gap_pi),
            lz.to_string(),
            lp.to_string(),
        ]);
    }
    Ok(RunReport {
        artifacts: vec![csv.finish("phase2d.csv")],
        summary: json!({ "cells": cells.len(), "chern_counts": values }),
        warnings: Vec::new(),
    })
}

fn edge2d(c: &Edge2dConfig) -> Result<RunReport> {
    if !c.family.is_2d() {
        return Err(WalkError::InvalidConfig("edge2d needs a two-dimensional family".into()));
    }
    let kx = half_open_grid(c.kx_range, c.nkx);
    let mut opts = StripOptions::new(c.ly, kx).with_sector(c.sector);
    opts.interfaces = c.interfaces.clone();
    let strip = strip_spectrum(&c.family, &opts)?;
    let mut csv = Csv::new(&["kx", "eigenphase", "edge_tag", "interface", "mean_y", "participation"]);
    for (k, states) in strip.kx.iter().zip(&strip.states) {
        for s in states {
            csv.row(&[
                fmt_f64(*k),
                fmt_f64(s.energy),
                (s.edge as u8).to_string(),
                s.interface.map(|i| i.to_string()).unwrap_or_default(),
                fmt_f64(s.mean_y),
                fmt_f64(s.participation),
            ]);
        }
    }
    let full_zone = ((c.kx_range[1] - c.kx_range[0]) - 2.0 * PI).abs() < 1e-12;
    let crossings: Vec<Value> = (0..strip.interfaces.len())
        .map(|i| {
            json!({
                "interface_y": strip.interfaces[i],
                "edge_states": strip.states.iter().flatten().filter(|s| s.interface == Some(i)).count(),
                "crossings_zero": strip.signed_crossings(i, 0.0, 0.5, full_zone),
                "crossings_pi": strip.signed_crossings(i, PI, 0.5, full_zone),
            })
        })
        .collect();
    Ok(RunReport {
        artifacts: vec![csv.finish("edge2d.csv")],
        summary: json!({ "ly": c.ly, "nkx": c.nkx, "edge_states": strip.edge_count(), "interfaces": crossings }),
        warnings: Vec::new(),
    })
}

fn snapshot_csv(state: &SpinorState, name: &str) -> Artifact {
    let mut csv = Csv::new(&["x", "re_up", "im_up", "re_down", "im_down"]);
    for r in state.snapshot_rows() {
        csv.row(&[r.site.to_string(), fmt_f64(r.re_up), fmt_f64(r.im_up), fmt_f64(r.re_down), fmt_f64(r.im_down)]);
    }
    csv.finish(name)
}

/// Squared norm of the projection of `psi` onto the given eigenvectors.
fn subspace_fidelity(spec: &crate::spectral::QuasiEnergySpectrum, idx: &[usize], psi: &SpinorState) -> f64 {
    idx.iter()
        .map(|&i| {
            let v = spec.vectors.column(i);
            v.iter().zip(psi.amplitudes()).map(|(a, b)| a.conj() * b).sum::<C64>().norm_sqr()
        })
        .sum()
}

fn boundstate(c: &BoundStateConfig) -> Result<RunReport> {
    let geometry = Geometry::HalfLine { len: c.len };
    let family = ProtocolFamily::Reflecting1D { theta: c.theta, phi: c.phi };
    let protocol = build_protocol(&family, geometry)?;
    let spec = diagonalize(&protocol.one_step_unitary()?, Some(geometry))?;
    let mut warnings = Vec::new();
    let mut artifacts = Vec::new();
    let mut eig = Csv::new(&["eigenphase", "mean_x", "participation"]);
    let info = spec.info();
    for s in &info {
        eig.row(&[fmt_f64(s.eigenphase), fmt_f64(s.mean_x), fmt_f64(s.participation)]);
    }
    artifacts.push(eig.finish("eigenphases.csv"));

    let summary = match reflecting_bound_state(c.theta, c.phi) {
        Ok(b) => {
            let psi = b.embed(c.len)?;
            let idx = spec.indices_near(b.energy, c.window);
            let fidelity = subspace_fidelity(&spec, &idx, &psi);
            artifacts.push(snapshot_csv(&psi, "analytic_state.csv"));
            if let Some(&best) = idx.first() {
                if let Some(state) = spec.state(best) {
                    artifacts.push(snapshot_csv(&state, "numerical_state.csv"));
                }
            }
            json!({
                "energy": b.energy,
                "decay_length": b.decay_length,
                "decay_ratio": b.decay_ratio,
                "lambda_plus": b.lambda_plus,
                "lambda_minus": b.lambda_minus,
                "edge_spinor": b.edge_spinor,
                "numerical_states_at_energy": idx.iter().map(|&i| spec.eigenphases[i]).collect::<Vec<_>>(),
                "fidelity": fidelity,
                "tail_mass": b.tail_mass(c.len),
            })
        }
        Err(WalkError::InvalidConfig(msg)) => {
            warnings.push(format!("chiral symmetry broken: {msg}"));
            // localized states near the reflecting edge, whatever their energy
            let localized: Vec<Value> = info
                .iter()
                .filter(|s| s.participation < 0.2 * c.len as f64 && s.mean_x > -(c.len as f64) / 4.0)
                .map(|s| json!({ "eigenphase": s.eigenphase, "mean_x": s.mean_x, "participation": s.participation }))
                .collect();
            json!({ "edge_localized_states": localized })
        }
        Err(e) => return Err(e),
    };
    Ok(RunReport { artifacts, summary, warnings })
}

/// Whether the config is the conventional `theta = pi/2` walk.
fn is_theta_half(family: &ProtocolFamily) -> bool {
    match family {
        ProtocolFamily::Conventional1D { theta } => {
            theta.uniform_value().is_some_and(|t| (t - PI / 2.0).abs() < 1e-12)
        }
        _ => false,
    }
}

fn asymptotic(c: &AsymptoticConfig) -> Result<RunReport> {
    let d = asymptotic_distribution(&c.family, c.spinor, c.bins, c.k_samples)?;
    let empirical = match c.empirical_steps {
        Some(n) => {
            let geometry = Geometry::line_for_steps(n);
            let protocol = build_protocol(&c.family, geometry)?;
            let psi = protocol.evolve(&SpinorState::localized(geometry, (0, 0), c.spinor)?, n)?;
            Some(empirical_density(&psi, n, c.bins))
        }
        None => None,
    };
    let up = c.spinor[1].norm() < 1e-15;
    let reference = is_theta_half(&c.family) && up;
    let mut csv = Csv::new(&["x", "density", "closed_form_printed", "closed_form_corrected", "empirical"]);
    let (mut dev_printed, mut dev_corrected) = (0.0_f64, 0.0_f64);
    for (i, (x, p)) in d.rows().into_iter().enumerate() {
        let (printed, corrected) = if reference {
            let (a, b) = (closed_form_theta_half(x), hadamard_density(x));
            if x.abs() <= 0.65 {
                dev_printed = dev_printed.max((p - a).abs());
                dev_corrected = dev_corrected.max((p - b).abs());
            }
            (fmt_f64(a), fmt_f64(b))
        } else {
            (String::new(), String::new())
        };
        let emp = empirical.as_ref().map(|e| fmt_f64(e[i])).unwrap_or_default();
        csv.row(&[fmt_f64(x), fmt_f64(p), printed, corrected, emp]);
    }
    let mut warnings = Vec::new();
    if d.gapless {
        warnings.push("band closes on the momentum grid; velocities are discontinuous there".into());
    }
    let mut summary = json!({
        "mass": d.mass(),
        "mean": d.mean(),
        "max_speed": d.max_speed,
        "gapless": d.gapless,
    });
    if reference {
        summary["max_deviation_printed"] = json!(dev_printed);
        summary["max_deviation_corrected"] = json!(dev_corrected);
        summary["support_edge"] = json!(FRAC_1_SQRT_2);
    }
    Ok(RunReport { artifacts: vec![csv.finish("asymptotic.csv")], summary, warnings })
}

fn spectrum(c: &SpectrumConfig) -> Result<RunReport> {
    let protocol = build_protocol(&c.family, c.geometry)?;
    let u = protocol.one_step_unitary()?;
    let spec = diagonalize(&u, Some(c.geometry))?;
    let mut csv = Csv::new(&["index", "eigenphase", "mean_x", "mean_y", "participation"]);
    for (i, s) in spec.info().iter().enumerate() {
        csv.row(&[i.to_string(), fmt_f64(s.eigenphase), fmt_f64(s.mean_x), fmt_f64(s.mean_y), fmt_f64(s.participation)]);
    }
    let mut summary = json!({
        "dimension": spec.len(),
        "pairing_defect": spec.pairing_defect(),
        "states_at_zero": spec.indices_near(0.0, c.window).len(),
        "states_at_pi": spec.indices_near(PI, c.window).len(),
    });
    let mut warnings = Vec::new();
    match ChiralFrame::for_family(&c.family) {
        Ok(frame) => {
            summary["chiral_residual"] = json!(verify_chiral_symmetry(&u, &frame));
            match bound_state_charges(&spec, &frame, c.window, c.region) {
                Ok(q) => summary["charges"] = json!(q),
                Err(e) => warnings.push(format!("charges unavailable: {e}")),
            }
        }
        Err(_) => warnings.push("no chiral frame for this family".into()),
    }
    Ok(RunReport { artifacts: vec![csv.finish("spectrum.csv")], summary, warnings })
}

/// Result of one self-test check.
#[derive(Clone, Debug)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &str, passed: bool, detail: String) -> Check {
    Check { name: name.into(), passed, detail }
}

/// Quick invariant suite for one subcommand.
pub fn selftest(command: &str) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    match command {
        "walk1d" => {
            let geometry = Geometry::line_for_steps(30);
            let family = ProtocolFamily::split_step(0.7, 2.1);
            let protocol = build_protocol(&family, geometry)?;
            let psi = SpinorState::localized(geometry, (0, 0), [C64::from(1.0), C64::from(0.0)])?;
            let out_state = protocol.evolve(&psi, 30)?;
            let norm = out_state.norm_sqr();
            out.push(check("norm conserved", (norm - 1.0).abs() < 1e-12, format!("norm = {norm}")));
            let echo = protocol.evolve(&psi, 0)?;
            out.push(check("zero steps echo the input", echo == psi, String::new()));
        }
        "phase1d" => {
            for (a, b) in [(0.4, 2.0), (-PI / 2.0, PI / 4.0), (2.5, 0.3)] {
                let cell = phase_cell_1d(a, b, 256)?;
                let closed = winding_closed_form(a, b);
                out.push(check(
                    &format!("winding ({a:.3}, {b:.3})"),
                    matches!(closed, WindingClass::Value(w) if cell.invariant == Some(w)),
                    format!("{:?} vs {closed:?}", cell.invariant),
                ));
            }
            let cell = phase_cell_1d(0.9, -0.9, 256)?;
            out.push(check("critical at theta2 = -theta1", cell.invariant.is_none(), format!("{:?}", cell.invariant)));
        }
        "phase2d" => {
            for (a, b, want) in [(7.0 * PI / 6.0, 7.0 * PI / 6.0, 0), (1.5 * PI, 1.5 * PI, 1)] {
                let cell = phase_cell_2d(&ProtocolFamily::six_op(a, b), a, b, 32)?;
                out.push(check("six-op Chern", cell.invariant == Some(want), format!("{:?}", cell.invariant)));
            }
            let cell = phase_cell_2d(&ProtocolFamily::simple_2d(0.4, 1.3), 0.4, 1.3, 32)?;
            out.push(check("simple walk Chern zero", cell.invariant == Some(0), format!("{:?}", cell.invariant)));
        }
        "edge2d" => {
            let family = ProtocolFamily::simple_2d(0.4, 1.3);
            let strip = strip_spectrum(&family, &StripOptions::new(12, half_open_grid([-PI, PI], 8)))?;
            out.push(check("uniform strip has no edge states", strip.edge_count() == 0, strip.edge_count().to_string()));
        }
        "boundstate" => {
            let r = boundstate(&BoundStateConfig { theta: PI / 2.0, phi: 0.0, len: 30, window: 1e-6 })?;
            let f = r.summary["fidelity"].as_f64().unwrap_or(0.0);
            out.push(check("analytic state matches diagonalization", f > 1.0 - 1e-8, format!("fidelity {f}")));
        }
        "asymptotic" => {
            let d = asymptotic_distribution(&ProtocolFamily::conventional(PI / 2.0), [C64::from(1.0), C64::from(0.0)], 200, 1 << 12)?;
            out.push(check("normalized", (d.mass() - 1.0).abs() < 1e-9, format!("mass {}", d.mass())));
            out.push(check("support", (d.max_speed - FRAC_1_SQRT_2).abs() < 1e-3, format!("{}", d.max_speed)));
        }
        "spectrum" => {
            let geometry = Geometry::Line { len: 20 };
            let family = crate::analytics::zero_pi_family();
            let u = build_protocol(&family, geometry)?.one_step_unitary()?;
            let spec = diagonalize(&u, Some(geometry))?;
            let off = spec
                .eigenphases
                .iter()
                .map(|&e| [0.0, PI, PI / 2.0, -PI / 2.0].iter().map(|&t| phase_distance(e, t)).fold(f64::INFINITY, f64::min))
                .fold(0.0, f64::max);
            out.push(check("exact spectrum", off < 1e-10, format!("max offset {off:e}")));
            out.push(check("E <-> -E pairing", spec.pairing_defect() < 1e-8, format!("{:e}", spec.pairing_defect())));
        }
        other => return Err(WalkError::InvalidConfig(format!("unknown command {other}"))),
    }
    Ok(out)
}

/// Process exit code for an error: 1 for bad input, 2 for numerical failures.
pub fn exit_code(err: &WalkError) -> i32 {
    match err {
        WalkError::InvalidConfig(_)
        | WalkError::Json(_)
        | WalkError::Io(_)
        | WalkError::SiteOutOfRange { .. }
        | WalkError::ZeroNormSpinor
        | WalkError::RuleBoundaryMismatch { .. }
        | WalkError::GeometryMismatch { .. }
        | WalkError::FamilyGeometryMismatch { .. }
        | WalkError::ProfileLength { .. }
        | WalkError::NonFiniteAngle
        | WalkError::TooLarge { .. }
        | WalkError::NonUniformProfile => 1,
        _ => 2,
    }
}

/// Renders a short text report.
pub fn describe(report: &RunReport) -> String {
    let mut s = String::new();
    for a in &report.artifacts {
        let _ = writeln!(s, "wrote {} ({} lines)", a.name, a.contents.lines().count());
    }
    for w in &report.warnings {
        let _ = writeln!(s, "warning: {w}");
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ExperimentConfig;

    #[test]
    fn csv_format() {
        let mut c = Csv::new(&["a", "b"]);
        c.row(&[fmt_f64(0.1), fmt_f64(-2.0)]);
        let a = c.finish("t.csv");
        assert_eq!(a.contents, "# qwalk-topo v1\na,b\n1.0000000000000001e-1,-2.0000000000000000e0\n");
    }

    #[test]
    fn grids() {
        assert_eq!(inclusive_grid([0.0, 1.0], 3), vec![0.0, 0.5, 1.0]);
        assert_eq!(half_open_grid([0.0, 1.0], 4), vec![0.0, 0.25, 0.5, 0.75]);
    }

    #[test]
    fn walk_zero_steps_echoes_initial_state() {
        let cfg = ExperimentConfig::from_json(
            r#"{"experiment": "walk1d", "family": {"family": "conventional_1d", "theta": {"kind": "uniform", "theta": 1.0}}, "steps": 0}"#,
        )
        .unwrap();
        let r = run(&cfg).unwrap();
        let dist = r.artifact("distribution.csv").unwrap();
        assert_eq!(dist.contents.lines().count(), 3);
        assert!(dist.contents.contains("0,0,1.0000000000000000e0"));
    }

    #[test]
    fn runs_are_deterministic() {
        let cfg = ExperimentConfig::from_json(
            r#"{"experiment": "phase1d", "n1": 5, "n2": 4, "nk": 128}"#,
        )
        .unwrap();
        let a = run_with_workers(&cfg, Some(1)).unwrap();
        let b = run_with_workers(&cfg, Some(3)).unwrap();
        assert_eq!(a.artifacts, b.artifacts);
    }

    #[test]
    fn selftests_pass() {
        for cmd in ["walk1d", "phase1d", "phase2d", "edge2d", "boundstate", "asymptotic", "spectrum"] {
            for c in selftest(cmd).unwrap() {
                assert!(c.passed, "{cmd}: {} {}", c.name, c.detail);
            }
        }
    }

    #[test]
    fn broken_symmetry_boundstate_warns() {
        let r = boundstate(&BoundStateConfig { theta: PI / 2.0, phi: PI / 3.0, len: 30, window: 1e-6 }).unwrap();
        assert_eq!(r.warnings.len(), 1);
    }
}
