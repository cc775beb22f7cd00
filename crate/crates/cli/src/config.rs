//! INI run configuration.
//!
//! Values start from a built-in device preset and are overridden by the
//! config file, then by `--set section.key=value` flags. Units are part of
//! each key name. Unknown sections or keys are rejected so typos surface.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use ini::Ini;
use magnonics::dispersive::{self, ModeCoupling};
use magnonics::fit::FitOptions;
use magnonics::hybrid::{CavityGeometry, CavityMode, HybridSystem, QubitParams};
use magnonics::magnetostatics::LinewidthModelParams;
use magnonics::presets;
use magnonics::response::CoilCalibration;
use magnonics::spinwave::{Spin, SpinLattice};
use magnonics::units::{Frequency, Rate, C};

const GHZ: f64 = 1e9;
const MHZ: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Transmission,
    QubitMagnon,
}

impl Preset {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "transmission" => Ok(Preset::Transmission),
            "qubit-magnon" => Ok(Preset::QubitMagnon),
            other => bail!("unknown preset {other:?} (expected transmission or qubit-magnon)"),
        }
    }
}

/// Frequency grid and coil-current range used by sweeps.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub f_start: f64,
    pub f_stop: f64,
    pub points: usize,
    pub current_start: f64,
    pub current_stop: f64,
    pub current_points: usize,
    /// Cavity mode used by `s21` and `anticross`.
    pub mode: u32,
    pub t_start: f64,
    pub t_stop: f64,
    pub t_points: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub system: HybridSystem,
    pub lattice: SpinLattice,
    pub coil: CoilCalibration,
    pub sweep: SweepConfig,
    pub linewidth: LinewidthModelParams,
    /// Replaces the computed qubit–magnon coupling in `qubit-spec`.
    pub g_qm_override: Option<f64>,
    pub symmetric_ports: bool,
    pub fit_input: Option<PathBuf>,
    pub max_iterations: usize,
    pub noise: Option<f64>,
    pub seed: u64,
}

/// Key/value store that remembers which keys were read.
struct Sections {
    values: BTreeMap<String, BTreeMap<String, String>>,
    used: BTreeSet<(String, String)>,
}

impl Sections {
    fn from_ini(ini: &Ini) -> Result<Self> {
        let mut values: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
        for (section, props) in ini.iter() {
            let name = section.unwrap_or("").to_string();
            for (k, v) in props.iter() {
                if name.is_empty() {
                    bail!("key {k:?} appears outside any section");
                }
                values.entry(name.clone()).or_default().insert(k.to_string(), v.to_string());
            }
        }
        Ok(Sections { values, used: BTreeSet::new() })
    }

    fn set(&mut self, assignment: &str) -> Result<()> {
        let (path, value) = assignment
            .split_once('=')
            .ok_or_else(|| anyhow!("override {assignment:?} is not section.key=value"))?;
        let (section, key) = path
            .trim()
            .rsplit_once('.')
            .ok_or_else(|| anyhow!("override {assignment:?} is not section.key=value"))?;
        self.values
            .entry(section.to_string())
            .or_default()
            .insert(key.to_string(), value.trim().to_string());
        Ok(())
    }

    fn raw(&mut self, section: &str, key: &str) -> Option<String> {
        let v = self.values.get(section)?.get(key)?.clone();
        self.used.insert((section.to_string(), key.to_string()));
        Some(v)
    }

    fn f64(&mut self, section: &str, key: &str) -> Result<Option<f64>> {
        match self.raw(section, key) {
            None => Ok(None),
            Some(s) => {
                let v: f64 = s
                    .parse()
                    .with_context(|| format!("[{section}] {key} = {s:?} is not a number"))?;
                if !v.is_finite() {
                    bail!("[{section}] {key} must be finite");
                }
                Ok(Some(v))
            }
        }
    }

    fn scaled(&mut self, section: &str, key: &str, unit: f64, into: &mut f64) -> Result<()> {
        if let Some(v) = self.f64(section, key)? {
            *into = v * unit;
        }
        Ok(())
    }

    fn usize(&mut self, section: &str, key: &str) -> Result<Option<usize>> {
        self.raw(section, key)
            .map(|s| s.parse().with_context(|| format!("[{section}] {key} = {s:?} is not a count")))
            .transpose()
    }

    fn bool(&mut self, section: &str, key: &str) -> Result<Option<bool>> {
        self.raw(section, key)
            .map(|s| match s.as_str() {
                "true" | "yes" | "1" => Ok(true),
                "false" | "no" | "0" => Ok(false),
                _ => Err(anyhow!("[{section}] {key} = {s:?} is not a boolean")),
            })
            .transpose()
    }

    fn mode_sections(&self) -> Vec<(u32, String)> {
        self.values
            .keys()
            .filter_map(|s| s.strip_prefix("cavity.").and_then(|p| p.parse().ok()).map(|p| (p, s.clone())))
            .collect()
    }

    fn unused(&self) -> Vec<String> {
        self.values
            .iter()
            .flat_map(|(s, kv)| kv.keys().map(move |k| (s.clone(), k.clone())))
            .filter(|sk| !self.used.contains(sk))
            .map(|(s, k)| format!("[{s}] {k}"))
            .collect()
    }
}

fn preset_system(preset: Preset) -> HybridSystem {
    match preset {
        Preset::Transmission => presets::transmission_cavity(),
        Preset::QubitMagnon => presets::qubit_magnon_cavity(),
    }
}

fn apply_mode(s: &mut Sections, section: &str, mode: &mut CavityMode, sys_sample: &magnonics::hybrid::SphereSample) -> Result<()> {
    let mut f = mode.f_c.hz();
    s.scaled(section, "f_GHz", GHZ, &mut f)?;
    mode.f_c = Frequency::from_hz(f);
    for (key, rate) in [
        ("kappa_in_MHz", &mut mode.kappa_in),
        ("kappa_out_MHz", &mut mode.kappa_out),
        ("kappa_int_MHz", &mut mode.kappa_int),
    ] {
        if let Some(v) = s.f64(section, key)? {
            *rate = Rate::from_mhz(v);
        }
    }
    s.scaled(section, "g_q_MHz", MHZ, &mut mode.g_q)?;
    s.scaled(section, "g_m_MHz", MHZ, &mut mode.g_m)?;
    if let Some(b0) = s.f64(section, "b0_pT")? {
        if s.values.get(section).is_some_and(|m| m.contains_key("g_m_MHz")) {
            bail!("[{section}] sets both g_m_MHz and b0_pT");
        }
        *mode = mode.clone().with_field_at_sample(b0 * 1e-12, sys_sample)?;
    }
    Ok(())
}

impl RunConfig {
    pub fn load(path: Option<&Path>, overrides: &[String], preset: Option<&str>, seed: Option<u64>) -> Result<Self> {
        let ini = match path {
            Some(p) => Ini::load_from_file_noescape(p).with_context(|| format!("reading config {}", p.display()))?,
            None => Ini::new(),
        };
        let mut s = Sections::from_ini(&ini)?;
        for o in overrides {
            s.set(o)?;
        }
        let from_file = s.raw("run", "preset");
        let preset = match preset.map(str::to_string).or(from_file) {
            Some(name) => Preset::parse(&name)?,
            None => Preset::Transmission,
        };
        let mut sys = preset_system(preset);

        // sample first: cavity couplings given as b0 depend on it
        s.scaled("sample", "diameter_mm", 1e-3, &mut sys.sample.diameter)?;
        s.scaled("sample", "spin_density_m3", 1.0, &mut sys.sample.material.spin_density)?;
        s.scaled("sample", "g_factor", 1.0, &mut sys.sample.material.g_factor)?;
        if s.values.get("sample").is_some_and(|m| m.contains_key("spin_density_m3")) {
            sys.sample.material.saturation_magnetization = sys.sample.material.spin_density * C.mu_b;
        }
        s.scaled("sample", "ms_A_per_m", 1.0, &mut sys.sample.material.saturation_magnetization)?;

        let mut geom = sys.geometry.clone().unwrap_or(CavityGeometry {
            width: 0.0,
            length: 0.0,
            height: 0.0,
            mode_indices: Vec::new(),
        });
        s.scaled("cavity", "width_mm", 1e-3, &mut geom.width)?;
        s.scaled("cavity", "length_mm", 1e-3, &mut geom.length)?;
        s.scaled("cavity", "height_mm", 1e-3, &mut geom.height)?;
        if let Some(p) = s.usize("cavity", "readout_mode")? {
            sys.readout_mode = if p == 0 { None } else { Some(p as u32) };
        }

        let sections = s.mode_sections();
        if !sections.is_empty() && s.bool("cavity", "replace_modes")?.unwrap_or(false) {
            sys.modes.clear();
        }
        for (p, name) in sections {
            let sample = sys.sample.clone();
            let pos = match sys.modes.iter().position(|m| m.p == p) {
                Some(i) => i,
                None => {
                    sys.modes.push(CavityMode::new(p, Frequency::ZERO));
                    sys.modes.len() - 1
                }
            };
            apply_mode(&mut s, &name, &mut sys.modes[pos], &sample)?;
        }
        sys.modes.sort_by_key(|m| m.p);
        geom.mode_indices.extend(sys.modes.iter().map(|m| m.p));
        geom.mode_indices.sort_unstable();
        geom.mode_indices.dedup();
        if geom.width > 0.0 && geom.length > 0.0 {
            sys.geometry = Some(geom);
        }

        let has_qubit_keys = s.values.contains_key("qubit");
        if has_qubit_keys || sys.qubit.is_some() {
            let mut q = sys.qubit.unwrap_or(QubitParams {
                f_q: Frequency::ZERO,
                alpha: -200e6,
                gamma_q: Rate::from_mhz(1.0),
                levels: 3,
            });
            let mut f = q.f_q.hz();
            s.scaled("qubit", "f_GHz", GHZ, &mut f)?;
            if let Some(dressed) = s.f64("qubit", "f_dressed_GHz")? {
                if s.values.get("qubit").is_some_and(|m| m.contains_key("f_GHz")) {
                    bail!("[qubit] sets both f_GHz and f_dressed_GHz");
                }
                let modes: Vec<ModeCoupling> = sys.modes.iter().map(Into::into).collect();
                f = dispersive::bare_qubit_frequency(dressed * GHZ, &modes)?;
            }
            q.f_q = Frequency::from_hz(f);
            s.scaled("qubit", "alpha_MHz", MHZ, &mut q.alpha)?;
            if let Some(v) = s.f64("qubit", "gamma_MHz")? {
                q.gamma_q = Rate::from_mhz(v);
            }
            if let Some(l) = s.usize("qubit", "levels")? {
                q.levels = l;
            }
            sys.qubit = Some(q);
        }
        let g_qm_override = s.f64("qubit", "g_qm_MHz")?.map(|v| v * MHZ);

        let mut f_m = sys.magnon.f_m.hz();
        s.scaled("magnon", "f_GHz", GHZ, &mut f_m)?;
        sys.magnon.f_m = Frequency::from_hz(f_m);
        if let Some(v) = s.f64("magnon", "gamma_MHz")? {
            sys.magnon.gamma_m = Rate::from_mhz(v);
        }
        let mut linewidth = LinewidthModelParams {
            gamma_tls: Rate::from_mhz(0.63),
            gamma_0: Rate::from_mhz(0.39),
        };
        if let Some(v) = s.f64("magnon", "gamma_tls_MHz")? {
            linewidth.gamma_tls = Rate::from_mhz(v);
        }
        if let Some(v) = s.f64("magnon", "gamma_0_MHz")? {
            linewidth.gamma_0 = Rate::from_mhz(v);
        }

        let lattice = lattice_config(&mut s)?;

        // coil: zero current sits at the anticrossing by default
        let degeneracy = match (preset, sys.qubit) {
            (Preset::QubitMagnon, Some(q)) => {
                let modes: Vec<ModeCoupling> = sys.modes.iter().map(Into::into).collect();
                dispersive::dressed_qubit_frequency(q.f_q.hz(), &modes)?
            }
            _ => sys.modes.first().map(|m| m.f_c.hz()).unwrap_or(sys.magnon.f_m.hz()),
        };
        let mut f_m0 = degeneracy;
        let mut slope = match preset {
            Preset::Transmission => 25.0 * MHZ / 1e-3,
            Preset::QubitMagnon => 10.0 * MHZ / 1e-3,
        };
        s.scaled("coil", "f_m0_GHz", GHZ, &mut f_m0)?;
        s.scaled("coil", "slope_MHz_per_mA", MHZ / 1e-3, &mut slope)?;
        let coil = CoilCalibration::new(f_m0, slope)?;

        let mode = match s.usize("sweep", "mode")? {
            Some(p) => p as u32,
            None => sys.modes.iter().find(|m| m.g_m != 0.0).or(sys.modes.first()).map(|m| m.p).unwrap_or(1),
        };
        let centre = match preset {
            Preset::QubitMagnon => degeneracy,
            Preset::Transmission => sys.mode(mode).map(|m| m.f_c.hz()).unwrap_or(degeneracy),
        };
        let half = match preset {
            Preset::Transmission => 150.0 * MHZ,
            Preset::QubitMagnon => 60.0 * MHZ,
        };
        let mut sweep = SweepConfig {
            f_start: centre - half,
            f_stop: centre + half,
            points: 3001,
            current_start: -4e-3,
            current_stop: 4e-3,
            current_points: 81,
            mode,
            t_start: 0.01,
            t_stop: 1.0,
            t_points: 100,
        };
        s.scaled("sweep", "f_start_GHz", GHZ, &mut sweep.f_start)?;
        s.scaled("sweep", "f_stop_GHz", GHZ, &mut sweep.f_stop)?;
        s.scaled("sweep", "current_start_mA", 1e-3, &mut sweep.current_start)?;
        s.scaled("sweep", "current_stop_mA", 1e-3, &mut sweep.current_stop)?;
        s.scaled("sweep", "t_start_K", 1.0, &mut sweep.t_start)?;
        s.scaled("sweep", "t_stop_K", 1.0, &mut sweep.t_stop)?;
        if let Some(n) = s.usize("sweep", "points")? {
            sweep.points = n;
        }
        if let Some(n) = s.usize("sweep", "current_points")? {
            sweep.current_points = n;
        }
        if let Some(n) = s.usize("sweep", "t_points")? {
            sweep.t_points = n;
        }

        let symmetric_ports = s.bool("fit", "symmetric_ports")?.unwrap_or(true);
        let fit_input = s.raw("fit", "input").map(PathBuf::from);
        let max_iterations = s.usize("fit", "max_iterations")?.unwrap_or(FitOptions::default().max_iterations);
        if max_iterations == 0 {
            bail!("fit.max_iterations must be positive");
        }
        let noise = s.f64("synth", "noise")?;
        let seed = match seed {
            Some(v) => v,
            None => s
                .raw("run", "seed")
                .map(|v| v.parse::<u64>().with_context(|| format!("[run] seed = {v:?} is not an integer")))
                .transpose()?
                .unwrap_or(0),
        };

        let unused = s.unused();
        if !unused.is_empty() {
            bail!("unknown config keys: {}", unused.join(", "));
        }
        Ok(RunConfig {
            system: sys,
            lattice,
            coil,
            sweep,
            linewidth,
            g_qm_override,
            symmetric_ports,
            fit_input,
            max_iterations,
            noise,
            seed,
        })
    }
}

const MEV: f64 = 1.602_176_634e-22;

fn lattice_config(s: &mut Sections) -> Result<SpinLattice> {
    let extent: Vec<usize> = match s.raw("lattice", "extent") {
        Some(text) => text
            .split(',')
            .map(|v| v.trim().parse().with_context(|| format!("[lattice] extent {text:?}")))
            .collect::<Result<_>>()?,
        None => vec![64],
    };
    let spin = match s.f64("lattice", "spin")? {
        Some(v) => Spin::new(v)?,
        None => Spin::HALF,
    };
    let mut exchange = MEV;
    s.scaled("lattice", "exchange_meV", MEV, &mut exchange)?;
    let mut lat = SpinLattice::periodic(&extent, spin, exchange)?;
    s.scaled("lattice", "a0_nm", 1e-9, &mut lat.lattice_constant)?;
    s.scaled("lattice", "g_factor", 1.0, &mut lat.g_factor)?;
    s.scaled("lattice", "b_z_T", 1.0, &mut lat.b_z)?;
    lat.validate()?;
    Ok(lat)
}
