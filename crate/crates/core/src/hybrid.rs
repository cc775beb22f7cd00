//! Parameter model of the cavity–qubit–magnon system.

use std::f64::consts::PI;
use std::fmt;

use crate::error::{invalid, Result};
use crate::magnetostatics::MagnetMaterial;
use crate::units::{gyromagnetic_ratio, Frequency, Rate, C};

/// |g/Δ| above which second-order perturbation theory is flagged.
pub const PERTURBATIVE_LIMIT: f64 = 0.3;

/// Relative geometry-vs-measurement deviation above which a warning is raised.
pub const GEOMETRY_TOLERANCE: f64 = 0.02;

/// Relative tolerance of the stored-vs-recomputed g_m consistency check.
pub const COUPLING_CONSISTENCY: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct CavityGeometry {
    /// Broad-wall width W, metres.
    pub width: f64,
    /// Length L along the propagation axis, metres.
    pub length: f64,
    /// Narrow-wall height, metres. Does not enter TE10p frequencies.
    pub height: f64,
    pub mode_indices: Vec<u32>,
}

/// Ideal rectangular-cavity TE10p frequency f = (c0/2) sqrt((1/W)² + (p/L)²).
///
/// The prefactor is c0/2 for an ordinary frequency. Real cavities with ports
/// and chip trenches sit a few percent off this; measured frequencies take
/// precedence wherever both exist.
pub fn te10p_frequency(geom: &CavityGeometry, p: u32) -> Result<Frequency> {
    if !(geom.width > 0.0) || !(geom.length > 0.0) {
        return Err(invalid("cavity width and length must be positive"));
    }
    if p < 1 {
        return Err(invalid("TE10p mode index must be at least 1"));
    }
    let kw = 1.0 / geom.width;
    let kl = p as f64 / geom.length;
    Ok(Frequency::from_hz(0.5 * C.c_0 * (kw * kw + kl * kl).sqrt()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereSample {
    /// Sphere diameter, metres.
    pub diameter: f64,
    pub material: MagnetMaterial,
}

impl SphereSample {
    /// 0.5 mm YIG sphere.
    pub fn yig_half_mm() -> Self {
        SphereSample {
            diameter: 0.5e-3,
            material: MagnetMaterial::yig(),
        }
    }

    pub fn volume(&self) -> f64 {
        PI / 6.0 * self.diameter.powi(3)
    }

    /// N_net = 2sN, derived from the density on every call.
    pub fn net_spins(&self) -> f64 {
        self.material.spin_density * self.volume()
    }
}

pub fn net_spin_count(sample: &SphereSample) -> Result<f64> {
    if !(sample.diameter >= 0.0) || !sample.diameter.is_finite() {
        return Err(invalid(format!("diameter must be non-negative, got {}", sample.diameter)));
    }
    Ok(sample.net_spins())
}

/// Single-spin coupling g0/2π = (γ/2π) B0 / 4 for a linearly polarized
/// single-photon field amplitude `b0` (tesla) at the sample.
pub fn single_spin_coupling(b0: f64, g_factor: f64) -> Result<f64> {
    if !(b0 >= 0.0) || !b0.is_finite() {
        return Err(invalid(format!("field amplitude must be non-negative, got {b0} T")));
    }
    Ok(gyromagnetic_ratio(g_factor)? * b0 / 4.0)
}

/// Collective coupling g0 sqrt(N_net).
pub fn ensemble_coupling(g0: f64, n_net: f64) -> Result<f64> {
    if !(n_net >= 0.0) || !n_net.is_finite() {
        return Err(invalid(format!("spin count must be non-negative, got {n_net}")));
    }
    Ok(g0 * n_net.sqrt())
}

/// One TE10p cavity mode with its losses and couplings.
#[derive(Debug, Clone, PartialEq)]
pub struct CavityMode {
    pub p: u32,
    pub f_c: Frequency,
    pub kappa_in: Rate,
    pub kappa_out: Rate,
    pub kappa_int: Rate,
    /// Single-photon field amplitude at the sample, tesla.
    pub b0_at_sample: Option<f64>,
    /// Qubit–mode coupling, Hz.
    pub g_q: f64,
    /// Kittel–mode coupling, Hz.
    pub g_m: f64,
}

impl CavityMode {
    pub fn new(p: u32, f_c: Frequency) -> Self {
        CavityMode {
            p,
            f_c,
            kappa_in: Rate::ZERO,
            kappa_out: Rate::ZERO,
            kappa_int: Rate::ZERO,
            b0_at_sample: None,
            g_q: 0.0,
            g_m: 0.0,
        }
    }

    /// Sets the field amplitude and the Kittel coupling implied by it.
    pub fn with_field_at_sample(mut self, b0: f64, sample: &SphereSample) -> Result<Self> {
        let g0 = single_spin_coupling(b0, sample.material.g_factor)?;
        self.g_m = ensemble_coupling(g0, sample.net_spins())?;
        self.b0_at_sample = Some(b0);
        Ok(self)
    }

    /// External coupling through the ports, κ_in + κ_out.
    pub fn kappa_ext(&self) -> Rate {
        self.kappa_in + self.kappa_out
    }

    pub fn kappa_total(&self) -> Rate {
        self.kappa_in + self.kappa_out + self.kappa_int
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitParams {
    /// Bare qubit frequency.
    pub f_q: Frequency,
    /// Anharmonicity, Hz (negative for a transmon).
    pub alpha: f64,
    pub gamma_q: Rate,
    pub levels: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MagnonMode {
    /// Kittel-mode frequency.
    pub f_m: Frequency,
    pub gamma_m: Rate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HybridSystem {
    pub modes: Vec<CavityMode>,
    pub qubit: Option<QubitParams>,
    pub magnon: MagnonMode,
    pub sample: SphereSample,
    /// Mode index p used for dispersive qubit readout.
    pub readout_mode: Option<u32>,
    /// Nominal geometry, used only as a cross-check on `f_c`.
    pub geometry: Option<CavityGeometry>,
}

impl HybridSystem {
    pub fn mode(&self, p: u32) -> Option<&CavityMode> {
        self.modes.iter().find(|m| m.p == p)
    }

    pub fn readout(&self) -> Option<&CavityMode> {
        self.readout_mode.and_then(|p| self.mode(p))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Warning,
    Violation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Finding {
    pub severity: Severity,
    pub subject: String,
    pub message: String,
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.severity {
            Severity::Warning => "warning",
            Severity::Violation => "violation",
        };
        write!(f, "{tag}: {}: {}", self.subject, self.message)
    }
}

/// Coupling-regime figures for one cavity mode.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeRegime {
    pub p: u32,
    /// |g_q / (f_c − f_q)|, if a qubit is present.
    pub qubit_dispersive_ratio: Option<f64>,
    /// |g_m / (f_c − f_m)|.
    pub magnon_dispersive_ratio: f64,
    /// g_m exceeds both the cavity and the Kittel-mode linewidth.
    pub magnon_strong_coupling: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
    pub regimes: Vec<ModeRegime>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations().next().is_none()
    }

    pub fn violations(&self) -> impl Iterator<Item = &Finding> {
        self.findings.iter().filter(|f| f.severity == Severity::Violation)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Finding> {
        self.findings.iter().filter(|f| f.severity == Severity::Warning)
    }

    fn push(&mut self, severity: Severity, subject: impl Into<String>, message: impl Into<String>) {
        self.findings.push(Finding {
            severity,
            subject: subject.into(),
            message: message.into(),
        });
    }
}

fn finite_positive(v: f64) -> bool {
    v.is_finite() && v > 0.0
}

pub fn validate_system(sys: &HybridSystem) -> ValidationReport {
    use Severity::*;
    let mut report = ValidationReport::default();

    if sys.modes.is_empty() {
        report.push(Violation, "cavity", "no cavity modes");
    }
    for m in &sys.modes {
        let subject = format!("mode p={}", m.p);
        if m.p < 1 {
            report.push(Violation, &subject, "mode index must be at least 1");
        }
        if !finite_positive(m.f_c.hz()) {
            report.push(Violation, &subject, format!("frequency must be positive, got {}", m.f_c));
        }
        for (name, rate) in [
            ("kappa_in", m.kappa_in),
            ("kappa_out", m.kappa_out),
            ("kappa_int", m.kappa_int),
        ] {
            if !rate.is_valid() {
                report.push(Violation, &subject, format!("{name} must be non-negative, got {} Hz", rate.hz()));
            }
        }
        if !m.g_q.is_finite() || !m.g_m.is_finite() {
            report.push(Violation, &subject, "couplings must be finite");
        }
        if let Some(b0) = m.b0_at_sample {
            let expected = single_spin_coupling(b0, sys.sample.material.g_factor)
                .and_then(|g0| ensemble_coupling(g0, sys.sample.net_spins()));
            match expected {
                Ok(g) if (g - m.g_m).abs() <= COUPLING_CONSISTENCY * g.abs().max(f64::MIN_POSITIVE) => {}
                Ok(g) => report.push(
                    Violation,
                    &subject,
                    format!("g_m = {} Hz inconsistent with B0 = {b0} T (expects {g} Hz)", m.g_m),
                ),
                Err(e) => report.push(Violation, &subject, e.to_string()),
            }
        }
        if let Some(geom) = &sys.geometry {
            if let Ok(f_geo) = te10p_frequency(geom, m.p) {
                let dev = (f_geo.hz() - m.f_c.hz()) / m.f_c.hz();
                if dev.abs() > GEOMETRY_TOLERANCE {
                    report.push(
                        Warning,
                        &subject,
                        format!(
                            "geometric TE10{} estimate {:.4} GHz deviates {:+.1}% from measured {:.4} GHz",
                            m.p,
                            f_geo.ghz(),
                            100.0 * dev,
                            m.f_c.ghz()
                        ),
                    );
                }
            }
        }
    }
    for pair in sys.modes.windows(2) {
        if pair[1].p <= pair[0].p || pair[1].f_c <= pair[0].f_c {
            report.push(
                Violation,
                "cavity",
                format!(
                    "modes must be strictly increasing in p and frequency (p={} then p={})",
                    pair[0].p, pair[1].p
                ),
            );
        }
    }

    if let Some(q) = &sys.qubit {
        if !finite_positive(q.f_q.hz()) {
            report.push(Violation, "qubit", "frequency must be positive");
        }
        if !(q.alpha < 0.0) || !q.alpha.is_finite() {
            report.push(Violation, "qubit", format!("anharmonicity must be negative, got {} Hz", q.alpha));
        }
        if !(2..=5).contains(&q.levels) {
            report.push(Violation, "qubit", format!("levels must be in 2..=5, got {}", q.levels));
        }
        if !q.gamma_q.is_valid() {
            report.push(Violation, "qubit", "linewidth must be non-negative");
        }
    }
    if !finite_positive(sys.magnon.f_m.hz()) {
        report.push(Violation, "magnon", "Kittel frequency must be positive");
    }
    if !sys.magnon.gamma_m.is_valid() {
        report.push(Violation, "magnon", "linewidth must be non-negative");
    }
    if !finite_positive(sys.sample.diameter) {
        report.push(Violation, "sample", "diameter must be positive");
    }
    if let Err(e) = sys.sample.material.validate() {
        report.push(Violation, "sample", e.to_string());
    }
    if let Some(p) = sys.readout_mode {
        if sys.mode(p).is_none() {
            report.push(Violation, "readout", format!("readout mode p={p} not defined"));
        }
    }

    for m in &sys.modes {
        let subject = format!("mode p={}", m.p);
        let qubit_ratio = sys.qubit.map(|q| (m.g_q / (m.f_c.hz() - q.f_q.hz())).abs());
        if let Some(r) = qubit_ratio {
            if m.g_q != 0.0 && r > PERTURBATIVE_LIMIT {
                report.push(
                    Warning,
                    &subject,
                    format!("|g_q/Δ_q| = {r:.2} exceeds {PERTURBATIVE_LIMIT}; dispersive shifts are first-order estimates"),
                );
            }
        }
        let magnon_ratio = (m.g_m / (m.f_c.hz() - sys.magnon.f_m.hz())).abs();
        if m.g_m != 0.0 && magnon_ratio > PERTURBATIVE_LIMIT {
            report.push(
                Warning,
                &subject,
                format!("|g_m/Δ_m| = {magnon_ratio:.2} exceeds {PERTURBATIVE_LIMIT}; magnon pulls are not perturbative"),
            );
        }
        report.regimes.push(ModeRegime {
            p: m.p,
            qubit_dispersive_ratio: qubit_ratio,
            magnon_dispersive_ratio: magnon_ratio,
            magnon_strong_coupling: m.g_m.abs() > m.kappa_total().hz().max(sys.magnon.gamma_m.hz()),
        });
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    fn geom(w_mm: f64, l_mm: f64) -> CavityGeometry {
        CavityGeometry {
            width: w_mm * 1e-3,
            length: l_mm * 1e-3,
            height: 3e-3,
            mode_indices: vec![1, 2, 3],
        }
    }

    #[test]
    fn te103_of_elongated_cavity() {
        let f = te10p_frequency(&geom(25.0, 53.0), 3).unwrap();
        // (c0/2) sqrt(1600 + 3204.0) m^-1
        assert!((f.ghz() - 10.389).abs() < 0.001, "{f}");
        assert!((f.ghz() / 10.461 - 1.0).abs() < 0.01);
    }

    #[test]
    fn te101_of_short_cavity() {
        let f = te10p_frequency(&geom(22.0, 18.0), 1).unwrap();
        assert!((f.ghz() - 10.76).abs() < 0.005, "{f}");
        assert!((f.ghz() / 10.565 - 1.0).abs() < 0.02);
    }

    #[test]
    fn waveguide_cutoff_limit() {
        let g = CavityGeometry {
            length: 1e9,
            ..geom(25.0, 1.0)
        };
        let f = te10p_frequency(&g, 1).unwrap();
        let cutoff = C.c_0 / (2.0 * 0.025);
        assert!((f.hz() - cutoff).abs() <= 1e-9 * cutoff);
        assert!(te10p_frequency(&geom(25.0, 53.0), 0).is_err());
    }

    #[test]
    fn te10p_monotonicity() {
        let g = geom(25.0, 53.0);
        let mut last = 0.0;
        for p in 1..10 {
            let f = te10p_frequency(&g, p).unwrap().hz();
            assert!(f > last);
            last = f;
        }
        let mut last = f64::INFINITY;
        for l in [20.0, 30.0, 53.0, 80.0, 120.0] {
            let f = te10p_frequency(&geom(25.0, l), 2).unwrap().hz();
            assert!(f < last);
            last = f;
        }
    }

    #[test]
    fn yig_sphere_spin_count() {
        let s = SphereSample::yig_half_mm();
        let n = net_spin_count(&s).unwrap();
        assert!((n / 1.4e18 - 1.0).abs() < 0.03, "{n}");
        let big = SphereSample { diameter: 1e-3, ..s };
        assert!((net_spin_count(&big).unwrap() / n - 8.0).abs() < 1e-12);
        let none = SphereSample { diameter: 0.0, ..s };
        assert_eq!(net_spin_count(&none).unwrap(), 0.0);
    }

    #[test]
    fn coupling_chain() {
        let g0 = single_spin_coupling(5.5e-12, 2.0).unwrap();
        assert!((g0 - 0.0385).abs() < 0.0005, "{g0}");
        assert_eq!(single_spin_coupling(0.0, 2.0).unwrap(), 0.0);
        assert_eq!(single_spin_coupling(11e-12, 2.0).unwrap(), 2.0 * g0);
        let n = SphereSample::yig_half_mm().net_spins();
        let g = ensemble_coupling(g0, n).unwrap();
        assert!((g / 47e6 - 1.0).abs() < 0.05, "{g}");
        assert_eq!(ensemble_coupling(g0, 1.0).unwrap(), g0);
        assert_eq!(ensemble_coupling(g0, 0.0).unwrap(), 0.0);
        let g4 = ensemble_coupling(g0, 4.0 * n).unwrap();
        assert!((g4 - 2.0 * g).abs() <= 1e-12 * g4);
    }

    #[test]
    fn field_derived_coupling_round_trips() {
        let sample = SphereSample::yig_half_mm();
        let mode = CavityMode::new(1, Frequency::from_ghz(10.565))
            .with_field_at_sample(5.5e-12, &sample)
            .unwrap();
        let mut sys = presets::transmission_cavity();
        sys.modes = vec![mode];
        assert!(validate_system(&sys).is_valid());
        sys.modes[0].g_m *= 1.001;
        assert!(!validate_system(&sys).is_valid());
    }

    #[test]
    fn qubit_magnon_preset_valid_with_perturbation_warning() {
        let sys = presets::qubit_magnon_cavity();
        let report = validate_system(&sys);
        assert!(report.is_valid(), "{:?}", report.findings);
        let r = report.regimes.iter().find(|r| r.p == 2).unwrap();
        let ratio = r.qubit_dispersive_ratio.unwrap();
        assert!((ratio - 0.6).abs() < 0.1, "{ratio}");
        assert!(report
            .warnings()
            .any(|w| w.subject == "mode p=2" && w.message.contains("g_q")));
    }

    #[test]
    fn negative_loss_is_a_violation() {
        let mut sys = presets::qubit_magnon_cavity();
        sys.modes[0].kappa_int = Rate::from_mhz(-0.1);
        let report = validate_system(&sys);
        assert!(!report.is_valid());
        assert!(report.violations().any(|v| v.message.contains("kappa_int")));
    }

    #[test]
    fn mode_order_is_a_violation() {
        let mut sys = presets::qubit_magnon_cavity();
        sys.modes.reverse();
        assert!(!validate_system(&sys).is_valid());
    }

    #[test]
    fn qubit_invariants() {
        let mut sys = presets::qubit_magnon_cavity();
        if let Some(q) = sys.qubit.as_mut() {
            q.alpha = 10e6;
            q.levels = 7;
        }
        let report = validate_system(&sys);
        assert_eq!(report.violations().count(), 2);
        sys.readout_mode = Some(9);
        assert_eq!(validate_system(&sys).violations().count(), 3);
    }

    #[test]
    fn transmission_cavity_is_strongly_coupled() {
        let report = validate_system(&presets::transmission_cavity());
        assert!(report.is_valid());
        assert!(report.regimes[0].magnon_strong_coupling);
    }
}
