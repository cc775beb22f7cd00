//! One function per subcommand. Each returns the table to emit and whether
//! the run should report non-convergence.

use std::f64::consts::PI;
use std::path::Path;

use anyhow::{bail, Context, Result};
use magnonics::dispersive;
use magnonics::fit::{
    self, AnticrossingGuess, FitOptions, FitResult, S21FitOptions,
};
use magnonics::hybrid::{self, te10p_frequency};
use magnonics::io;
use magnonics::magnetostatics::linewidth_vs_temperature;
use magnonics::response::{
    self, linear_grid, CavityMagnonParams, QubitSpectroscopy, Spectrum, ValueKind,
};
use magnonics::spinwave::{self, WaveVector};
use magnonics::synth;
use magnonics::units::C;

use crate::config::RunConfig;
use crate::table::{Cell, Table};

const MHZ: f64 = 1e6;
const GHZ: f64 = 1e9;

pub struct Outcome {
    pub table: Table,
    /// False only for a fit that hit its iteration cap.
    pub converged: bool,
}

impl From<Table> for Outcome {
    fn from(table: Table) -> Self {
        Outcome { table, converged: true }
    }
}

/// Rejects configurations with violations; returns warnings as comment lines.
pub fn check_system(cfg: &RunConfig) -> Result<Vec<String>> {
    let report = hybrid::validate_system(&cfg.system);
    let violations: Vec<String> = report.violations().map(|f| f.to_string()).collect();
    if !violations.is_empty() {
        bail!("invalid system:\n  {}", violations.join("\n  "));
    }
    Ok(report.warnings().map(|f| f.to_string()).collect())
}

fn grid(cfg: &RunConfig) -> Result<Vec<f64>> {
    Ok(linear_grid(cfg.sweep.f_start, cfg.sweep.f_stop, cfg.sweep.points)?)
}

fn currents(cfg: &RunConfig) -> Result<Vec<f64>> {
    let s = &cfg.sweep;
    if s.current_points == 1 {
        return Ok(vec![s.current_start]);
    }
    Ok(linear_grid(s.current_start, s.current_stop, s.current_points)?)
}

fn transmission_params(cfg: &RunConfig) -> Result<CavityMagnonParams> {
    let p = CavityMagnonParams::from_system(&cfg.system, cfg.sweep.mode)?;
    p.validate()?;
    Ok(p)
}

pub fn dispersion(cfg: &RunConfig) -> Result<Outcome> {
    let lat = &cfg.lattice;
    let n = lat.extent[0];
    let dims = lat.extent.len();
    let mut t = Table::new(&["k_per_m", "frequency_Hz", "energy_J", "long_wavelength_Hz"]);
    t.note(format!(
        "spin {} lattice {:?}, J = {:e} J, a0 = {:e} m, B_z = {} T; k along the first axis",
        lat.spin.value(),
        lat.extent,
        lat.exchange,
        lat.lattice_constant,
        lat.b_z
    ));
    for m in 0..=n / 2 {
        let mut k = vec![0.0; dims];
        k[0] = 2.0 * PI * m as f64 / (n as f64 * lat.lattice_constant);
        let k = WaveVector(k);
        let f = spinwave::dispersion(&k, lat)?;
        let long = spinwave::dispersion_long_wavelength(&k, lat)?;
        t.push(vec![k.0[0].into(), f.hz().into(), (f.hz() * C.h).into(), long.hz().into()]);
    }
    Ok(t.into())
}

pub fn modes(cfg: &RunConfig) -> Result<Outcome> {
    let geom = cfg
        .system
        .geometry
        .clone()
        .context("modes needs [cavity] width_mm and length_mm")?;
    let mut t = Table::new(&["p", "geometric_GHz", "configured_GHz", "deviation_percent"]);
    t.note(format!(
        "ideal TE10p box W = {} mm, L = {} mm",
        geom.width * 1e3,
        geom.length * 1e3
    ));
    let highest = geom.mode_indices.iter().copied().max().unwrap_or(1).max(3);
    for p in 1..=highest {
        let f = te10p_frequency(&geom, p)?;
        let (configured, dev) = match cfg.system.mode(p) {
            Some(m) => {
                let d = 100.0 * (f.hz() - m.f_c.hz()) / m.f_c.hz();
                (Cell::Num(m.f_c.ghz()), Cell::Num(d))
            }
            None => ("-".into(), "-".into()),
        };
        t.push(vec![(p as f64).into(), f.ghz().into(), configured, dev]);
    }
    Ok(t.into())
}

fn spectrum_table(s: &Spectrum, comments: Vec<String>) -> Table {
    let mut header = Vec::new();
    if s.meta.current.is_some() {
        header.push(io::CURRENT);
    }
    header.extend([io::FREQUENCY, io::RE]);
    if s.kind == ValueKind::Complex {
        header.push(io::IM);
    }
    let mut t = Table::new(&header);
    t.comments = comments;
    append_rows(&mut t, s);
    t
}

fn append_rows(t: &mut Table, s: &Spectrum) {
    for (&f, v) in s.frequencies().iter().zip(s.values()) {
        let mut row = Vec::with_capacity(4);
        if let Some(i) = s.meta.current {
            row.push(i.into());
        }
        row.extend([f.into(), v.re.into()]);
        if s.kind == ValueKind::Complex {
            row.push(v.im.into());
        }
        t.push(row);
    }
}

fn sweep_table(sweep: &[Spectrum], comments: Vec<String>) -> Table {
    let mut t = match sweep.first() {
        Some(s) => spectrum_table(&s.clone(), comments),
        None => return Table::new(&[io::CURRENT, io::FREQUENCY, io::RE, io::IM]),
    };
    for s in &sweep[1..] {
        append_rows(&mut t, s);
    }
    t
}

fn describe(p: &CavityMagnonParams) -> String {
    format!(
        "f_c = {} Hz, f_m = {} Hz, g_m = {} Hz, kappa_in = {} Hz, kappa_out = {} Hz, kappa_int = {} Hz, gamma_m = {} Hz",
        p.f_c, p.f_m, p.g_m, p.kappa_in, p.kappa_out, p.kappa_int, p.gamma_m
    )
}

pub fn s21(cfg: &RunConfig) -> Result<Outcome> {
    let mut notes = check_system(cfg)?;
    let p = transmission_params(cfg)?;
    notes.insert(0, describe(&p));
    let s = response::s21_spectrum(&grid(cfg)?, &p)?;
    Ok(spectrum_table(&s, notes).into())
}

pub fn anticross(cfg: &RunConfig) -> Result<Outcome> {
    let mut notes = check_system(cfg)?;
    let p = transmission_params(cfg)?;
    notes.insert(0, format!("coil: f_m0 = {} Hz, slope = {} Hz/A", cfg.coil.f_m0, cfg.coil.slope));
    notes.insert(0, describe(&p));
    let sweep = response::anticrossing_sweep(&grid(cfg)?, &currents(cfg)?, &p, &cfg.coil)?;
    Ok(sweep_table(&sweep, notes).into())
}

pub fn qubit_spec(cfg: &RunConfig) -> Result<Outcome> {
    let mut notes = check_system(cfg)?;
    let spec = QubitSpectroscopy::from_system(&cfg.system, cfg.g_qm_override)?;
    notes.insert(
        0,
        format!(
            "dressed f_q = {} Hz, g_qm = {} Hz{}, gamma_q = {} Hz, gamma_m = {} Hz",
            spec.f_q,
            spec.g_qm,
            if cfg.g_qm_override.is_some() { " (configured)" } else { "" },
            spec.gamma_q,
            spec.gamma_m
        ),
    );
    let sweep = response::qubit_spectrum_sweep(&grid(cfg)?, &currents(cfg)?, &spec, &cfg.coil)?;
    Ok(sweep_table(&sweep, notes).into())
}

pub fn report(cfg: &RunConfig) -> Result<Outcome> {
    let warnings = check_system(cfg)?;
    let sys = &cfg.system;
    let r = dispersive::dispersive_report(sys)?;
    let validation = hybrid::validate_system(sys);
    let mut t = Table::new(&["quantity", "value", "unit"]);
    t.comments = warnings;
    let mut row = |name: String, v: f64, unit: &str| t.push(vec![name.into(), v.into(), unit.into()]);
    row("f_q bare".into(), r.f_q_bare / GHZ, "GHz");
    row("f_q dressed".into(), r.f_q_dressed / GHZ, "GHz");
    for m in &r.modes {
        let p = m.p;
        row(format!("detuning_q p={p}"), m.detuning_q / MHZ, "MHz");
        row(format!("chi p={p}"), m.chi / MHZ, "MHz");
        row(format!("chi p={p} (dressed detuning)"), m.chi_dressed_detuning / MHZ, "MHz");
        for &(l, v) in &m.lamb_shifts {
            row(format!("lamb shift level {l} p={p}"), v / MHZ, "MHz");
        }
        for &(l, v) in &m.chi_levels {
            row(format!("chi level {l} p={p}"), v / MHZ, "MHz");
        }
        if m.cross_kerr != 0.0 || m.kittel_shift != 0.0 {
            row(format!("kittel shift p={p}"), m.kittel_shift / MHZ, "MHz");
            row(format!("cavity pull p={p}"), m.cavity_pull / MHZ, "MHz");
            row(format!("cross-Kerr p={p}"), m.cross_kerr, "Hz");
        }
    }
    if let Some(v) = r.readout_shift {
        row("readout shift chi1-chi".into(), v / MHZ, "MHz");
    }
    row("g_qm".into(), r.g_qm / MHZ, "MHz");
    if r.purcell.is_unbounded() {
        row("purcell T1".into(), f64::INFINITY, "ns");
    } else {
        row("purcell T1".into(), r.purcell.t1 * 1e9, "ns");
    }
    let n_net = hybrid::net_spin_count(&sys.sample)?;
    row("net spins".into(), n_net, "1");
    for m in &sys.modes {
        if let Some(b0) = m.b0_at_sample {
            let g0 = hybrid::single_spin_coupling(b0, sys.sample.material.g_factor)?;
            row(format!("g0 p={}", m.p), g0 * 1e3, "mHz");
        }
    }
    for reg in &validation.regimes {
        if let Some(x) = reg.qubit_dispersive_ratio {
            row(format!("|g_q/detuning| p={}", reg.p), x, "1");
        }
        row(format!("|g_m/detuning| p={}", reg.p), reg.magnon_dispersive_ratio, "1");
    }
    match dispersive::qubit_state_dependent_kittel_shift(sys) {
        Ok(v) => row("qubit-state Kittel shift".into(), v / MHZ, "MHz"),
        Err(e) => t.note(format!("qubit-state Kittel shift: {e}")),
    }
    Ok(t.into())
}

pub fn linewidth(cfg: &RunConfig) -> Result<Outcome> {
    let s = &cfg.sweep;
    let temps = linear_grid(s.t_start, s.t_stop, s.t_points)?;
    let f_m = cfg.system.magnon.f_m;
    let mut t = Table::new(&[io::TEMPERATURE, io::GAMMA]);
    t.note(format!(
        "gamma_tls = {} Hz, gamma_0 = {} Hz, f_m = {} Hz",
        cfg.linewidth.gamma_tls.hz(),
        cfg.linewidth.gamma_0.hz(),
        f_m.hz()
    ));
    for temp in temps {
        let g = linewidth_vs_temperature(temp, f_m, &cfg.linewidth)?;
        t.push(vec![temp.into(), g.hz().into()]);
    }
    Ok(t.into())
}

struct Unit(&'static str, f64);

fn fit_table(result: &FitResult, units: &[Unit], extra: Vec<String>) -> Outcome {
    let mut t = Table::new(&["name", "value", "uncertainty", "unit"]);
    t.note(format!(
        "converged = {}, iterations = {}, residual_norm = {}, jacobian_condition_proxy = {}",
        result.converged, result.iterations, result.residual_norm, result.jacobian_condition_proxy
    ));
    t.note("uncertainty is a curvature proxy, not a covariance estimate");
    for (k, v) in &result.metadata {
        t.note(format!("{k} = {v}"));
    }
    for w in result.warnings.iter().chain(&extra) {
        t.note(format!("warning: {w}"));
    }
    for (i, name) in result.names.iter().enumerate() {
        let Unit(unit, per) = units.get(i).map(|u| Unit(u.0, u.1)).unwrap_or(Unit("", 1.0));
        t.push(vec![
            name.clone().into(),
            (result.parameters[i] / per).into(),
            (result.uncertainty_proxy[i] / per).into(),
            unit.into(),
        ]);
    }
    Outcome {
        table: t,
        converged: result.converged,
    }
}

fn fit_options(cfg: &RunConfig) -> FitOptions {
    FitOptions {
        max_iterations: cfg.max_iterations,
        ..Default::default()
    }
}

fn input<'a>(cfg: &'a RunConfig, flag: Option<&'a Path>) -> Result<&'a Path> {
    let path = flag
        .or(cfg.fit_input.as_deref())
        .context("fit needs --input PATH or [fit] input")?;
    io::ensure_exists(path)?;
    Ok(path)
}

pub fn fit_s21(cfg: &RunConfig, path: Option<&Path>) -> Result<Outcome> {
    let path = input(cfg, path)?;
    let data = io::load_spectrum_csv(path)?;
    let guess = CavityMagnonParams::from_system(&cfg.system, cfg.sweep.mode)?;
    let opts = S21FitOptions {
        symmetric_ports: cfg.symmetric_ports,
        optimizer: fit_options(cfg),
    };
    let fit = fit::fit_s21(&data, &guess, &opts)?;
    let hz = Unit("Hz", 1.0);
    let units: Vec<Unit> = fit.result.names.iter().map(|_| Unit(hz.0, hz.1)).collect();
    let mut out = fit_table(&fit.result, &units, Vec::new());
    out.table.push(vec![
        "kappa_total".into(),
        fit.params.kappa_total().into(),
        "-".into(),
        "Hz".into(),
    ]);
    Ok(out)
}

pub fn fit_linewidth(cfg: &RunConfig, path: Option<&Path>) -> Result<Outcome> {
    let path = input(cfg, path)?;
    let data = io::load_linewidth_csv(path)?;
    for w in &data.warnings {
        eprintln!("warning: {w}");
    }
    let f_m = cfg.system.magnon.f_m.hz();
    let fit = fit::fit_linewidth_temperature(&data.points, f_m, &fit_options(cfg))?;
    let mut out = fit_table(&fit.result, &[Unit("Hz", 1.0), Unit("Hz", 1.0)], Vec::new());
    let zero = fit.params.gamma_tls.hz() + fit.params.gamma_0.hz();
    out.table.push(vec!["gamma_at_zero_temperature".into(), zero.into(), "-".into(), "Hz".into()]);
    Ok(out)
}

pub fn fit_anticross(cfg: &RunConfig, path: Option<&Path>) -> Result<Outcome> {
    let path = input(cfg, path)?;
    let peaks = io::load_peaks_csv(path)?;
    let p = CavityMagnonParams::from_system(&cfg.system, cfg.sweep.mode)?;
    let guess = AnticrossingGuess {
        f_c: p.f_c,
        f_m0: cfg.coil.f_m0,
        slope: cfg.coil.slope,
        g_m: p.g_m,
        kappa_total: p.kappa_total(),
        gamma_m: p.gamma_m,
    };
    let fit = fit::fit_anticrossing(&peaks, &guess, &fit_options(cfg))?;
    Ok(fit_table(
        &fit.result,
        &[Unit("Hz", 1.0), Unit("Hz", 1.0), Unit("Hz/A", 1.0), Unit("Hz", 1.0)],
        Vec::new(),
    ))
}

pub fn synth_s21(cfg: &RunConfig) -> Result<Outcome> {
    let mut notes = check_system(cfg)?;
    let p = transmission_params(cfg)?;
    let level = cfg.noise.unwrap_or(0.01);
    notes.insert(0, format!("seed = {}, complex noise = {level} of max |S21|", cfg.seed));
    notes.insert(0, describe(&p));
    let s = synth::noisy_s21(&grid(cfg)?, &p, level, cfg.seed)?;
    Ok(spectrum_table(&s, notes).into())
}

pub fn synth_linewidth(cfg: &RunConfig, points: usize) -> Result<Outcome> {
    let s = &cfg.sweep;
    let temps = linear_grid(s.t_start, s.t_stop, points)?;
    let level = cfg.noise.unwrap_or(0.05);
    let f_m = cfg.system.magnon.f_m.hz();
    let data = synth::noisy_linewidths(&temps, f_m, &cfg.linewidth, level, cfg.seed)?;
    let mut t = Table::new(&[io::TEMPERATURE, io::GAMMA]);
    t.note(format!(
        "gamma_tls = {} Hz, gamma_0 = {} Hz, f_m = {} Hz, seed = {}, relative noise = {level}",
        cfg.linewidth.gamma_tls.hz(),
        cfg.linewidth.gamma_0.hz(),
        f_m,
        cfg.seed
    ));
    for (temp, g) in data {
        t.push(vec![temp.into(), g.into()]);
    }
    Ok(t.into())
}

pub fn synth_anticross(cfg: &RunConfig) -> Result<Outcome> {
    let mut notes = check_system(cfg)?;
    let p = transmission_params(cfg)?;
    let level = cfg.noise.unwrap_or(0.0);
    notes.insert(0, format!("seed = {}, complex noise = {level} of max |S21|", cfg.seed));
    notes.insert(0, format!("coil: f_m0 = {} Hz, slope = {} Hz/A", cfg.coil.f_m0, cfg.coil.slope));
    notes.insert(0, describe(&p));
    let peaks = synth::anticrossing_peaks(&grid(cfg)?, &currents(cfg)?, &p, &cfg.coil, level, cfg.seed)?;
    let mut t = Table::new(&[io::CURRENT, io::PEAK]);
    t.comments = notes;
    for (i, ps) in peaks {
        for f in ps {
            t.push(vec![i.into(), f.into()]);
        }
    }
    Ok(t.into())
}
