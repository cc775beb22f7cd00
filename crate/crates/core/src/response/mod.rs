//! Frequency-domain observables: transmission and reflection, the complex
//! normal modes of the cavity–magnon pair, and sweeps over coil current.
//!
//! All frequencies and rates are ordinary Hz. The transmission denominator is
//! homogeneous in frequency, so evaluating it in Hz instead of rad/s leaves
//! S21 unchanged. Damping follows the input–output convention with the
//! cavity loss halved and the Kittel linewidth γ_m entering unhalved.

pub mod peaks;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::dispersive::{self, ModeCoupling};
use crate::error::{invalid, Error, Result};
use crate::hybrid::{CavityMode, HybridSystem};

pub use peaks::{find_peaks, two_highest, Peak, PEAK_THRESHOLD};

/// Linear map from coil current to Kittel frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoilCalibration {
    /// Kittel frequency at zero current, Hz.
    pub f_m0: f64,
    /// Hz per ampere.
    pub slope: f64,
}

impl CoilCalibration {
    pub fn new(f_m0: f64, slope: f64) -> Result<Self> {
        let cal = CoilCalibration { f_m0, slope };
        cal.validate()?;
        Ok(cal)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.f_m0.is_finite() || !self.slope.is_finite() || self.slope == 0.0 {
            return Err(invalid("coil calibration needs a finite f_m0 and a finite nonzero slope"));
        }
        Ok(())
    }

    pub fn kittel_frequency(&self, current: f64) -> f64 {
        self.f_m0 + self.slope * current
    }

    /// Current at which the Kittel mode sits at `f`.
    pub fn current_for(&self, f: f64) -> f64 {
        (f - self.f_m0) / self.slope
    }
}

/// Which parts of the complex response carry data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueKind {
    Complex,
    /// Only the real part was recorded; imaginary parts are zero placeholders.
    RealOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SpectrumMeta {
    /// Coil current, A.
    pub current: Option<f64>,
    /// Temperature, K.
    pub temperature: Option<f64>,
    /// Probe power, dBm.
    pub power: Option<f64>,
}

/// Complex response sampled on a strictly increasing frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    frequencies: Vec<f64>,
    values: Vec<Complex64>,
    pub kind: ValueKind,
    pub meta: SpectrumMeta,
}

impl Spectrum {
    pub fn new(frequencies: Vec<f64>, values: Vec<Complex64>, kind: ValueKind) -> Result<Self> {
        if frequencies.len() != values.len() {
            return Err(invalid(format!(
                "{} frequencies but {} values",
                frequencies.len(),
                values.len()
            )));
        }
        if frequencies.iter().any(|f| !f.is_finite()) || values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("spectrum contains non-finite entries"));
        }
        if let Some(w) = frequencies.windows(2).find(|w| !(w[1] > w[0])) {
            return Err(invalid(format!(
                "frequency grid not strictly increasing at {} Hz",
                w[1]
            )));
        }
        Ok(Spectrum {
            frequencies,
            values,
            kind,
            meta: SpectrumMeta::default(),
        })
    }

    pub fn with_meta(mut self, meta: SpectrumMeta) -> Self {
        self.meta = meta;
        self
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    pub fn magnitudes(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm()).collect()
    }

    pub fn real_parts(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }

    /// Peaks of |value|, or of the real part for real-only data.
    pub fn peaks(&self) -> Vec<Peak> {
        let y = match self.kind {
            ValueKind::Complex => self.magnitudes(),
            ValueKind::RealOnly => self.real_parts(),
        };
        find_peaks(&self.frequencies, &y)
    }
}

/// Evenly spaced grid of `points` frequencies from `start` to `stop` inclusive.
pub fn linear_grid(start: f64, stop: f64, points: usize) -> Result<Vec<f64>> {
    if points < 2 || !(stop > start) || !start.is_finite() || !stop.is_finite() {
        return Err(invalid("grid needs at least two points and start < stop"));
    }
    let step = (stop - start) / (points - 1) as f64;
    Ok((0..points).map(|i| start + step * i as f64).collect())
}

/// One cavity mode and the Kittel mode as seen by a transmission measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityMagnonParams {
    pub f_c: f64,
    pub kappa_in: f64,
    pub kappa_out: f64,
    pub kappa_int: f64,
    pub f_m: f64,
    pub gamma_m: f64,
    pub g_m: f64,
}

impl CavityMagnonParams {
    pub fn from_mode(mode: &CavityMode, sys: &HybridSystem) -> Self {
        CavityMagnonParams {
            f_c: mode.f_c.hz(),
            kappa_in: mode.kappa_in.hz(),
            kappa_out: mode.kappa_out.hz(),
            kappa_int: mode.kappa_int.hz(),
            f_m: sys.magnon.f_m.hz(),
            gamma_m: sys.magnon.gamma_m.hz(),
            g_m: mode.g_m,
        }
    }

    /// Parameters of mode `p` of `sys`.
    pub fn from_system(sys: &HybridSystem, p: u32) -> Result<Self> {
        let mode = sys
            .mode(p)
            .ok_or_else(|| Error::Configuration(format!("cavity mode p={p} not defined")))?;
        Ok(Self::from_mode(mode, sys))
    }

    pub fn kappa_total(&self) -> f64 {
        self.kappa_in + self.kappa_out + self.kappa_int
    }

    /// Checks the preconditions of a transmission measurement.
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.f_c,
            self.kappa_in,
            self.kappa_out,
            self.kappa_int,
            self.f_m,
            self.gamma_m,
            self.g_m,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(invalid("cavity-magnon parameters must be finite"));
        }
        if !(self.kappa_in > 0.0 && self.kappa_out > 0.0) {
            return Err(invalid("transmission needs positive coupling at both ports"));
        }
        if self.kappa_int < 0.0 || self.gamma_m < 0.0 {
            return Err(invalid("loss rates must be non-negative"));
        }
        Ok(())
    }
}

/// Transmission √(κ_in κ_out) / [i(f−f_c) − κ_tot/2 + g_m²/(i(f−f_m) − γ_m)].
pub fn s21(f: f64, p: &CavityMagnonParams) -> Complex64 {
    let cavity = Complex64::new(-p.kappa_total() / 2.0, f - p.f_c);
    let magnon = Complex64::new(-p.gamma_m, f - p.f_m);
    let denominator = if p.g_m == 0.0 {
        cavity
    } else {
        cavity + p.g_m * p.g_m / magnon
    };
    (p.kappa_in * p.kappa_out).sqrt() / denominator
}

/// S21 on a grid.
pub fn s21_spectrum(frequencies: &[f64], p: &CavityMagnonParams) -> Result<Spectrum> {
    let values = frequencies.iter().map(|&f| s21(f, p)).collect();
    Spectrum::new(frequencies.to_vec(), values, ValueKind::Complex)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QubitState {
    Ground,
    Excited,
}

/// Resonance of the readout mode with the qubit in `state`, including the
/// pull from the Kittel mode.
pub fn readout_resonance(sys: &HybridSystem, state: QubitState) -> Result<f64> {
    let mode = sys
        .readout()
        .ok_or_else(|| Error::Configuration("no readout mode designated".into()))?;
    let qubit = sys
        .qubit
        .ok_or_else(|| Error::Configuration("readout needs a qubit".into()))?;
    let f_c = mode.f_c.hz();
    let delta = f_c - qubit.f_q.hz();
    let qubit_shift = if mode.g_q == 0.0 {
        0.0
    } else {
        match state {
            QubitState::Ground => dispersive::chi(mode.g_q, delta)?,
            QubitState::Excited => dispersive::chi_level(mode.g_q, delta, qubit.alpha, 1)?,
        }
    };
    let magnon_shift = if mode.g_m == 0.0 {
        0.0
    } else {
        dispersive::magnon_pull(mode.g_m, f_c - sys.magnon.f_m.hz())?.cavity_shift
    };
    Ok(f_c + qubit_shift + magnon_shift)
}

/// One-port reflection 1 + κ_ext/(i(f−f_r) − κ_tot/2) off the readout mode.
pub fn s11_qubit_readout(f: f64, sys: &HybridSystem, state: QubitState) -> Result<Complex64> {
    let mode = sys
        .readout()
        .ok_or_else(|| Error::Configuration("no readout mode designated".into()))?;
    let f_r = readout_resonance(sys, state)?;
    let kappa_ext = mode.kappa_ext().hz();
    let kappa_tot = mode.kappa_total().hz();
    if !(kappa_tot > 0.0) {
        return Err(Error::Configuration("readout mode has no loss".into()));
    }
    Ok(Complex64::new(1.0, 0.0) + kappa_ext / Complex64::new(-kappa_tot / 2.0, f - f_r))
}

/// Complex eigenfrequencies of [[f_c − iκ/2, g], [g, f_m − iγ_m]], sorted by
/// real part.
pub fn normal_modes(f_c: f64, kappa_total: f64, f_m: f64, gamma_m: f64, g_m: f64) -> [Complex64; 2] {
    let a = Complex64::new(f_c, -kappa_total / 2.0);
    let d = Complex64::new(f_m, -gamma_m);
    let mean = (a + d) / 2.0;
    let half = (a - d) / 2.0;
    let root = (half * half + g_m * g_m).sqrt();
    let (x, y) = (mean - root, mean + root);
    if x.re <= y.re {
        [x, y]
    } else {
        [y, x]
    }
}

/// S21 spectra at each coil current, in current order.
pub fn anticrossing_sweep(
    frequencies: &[f64],
    currents: &[f64],
    params: &CavityMagnonParams,
    cal: &CoilCalibration,
) -> Result<Vec<Spectrum>> {
    cal.validate()?;
    currents
        .par_iter()
        .map(|&current| {
            let p = CavityMagnonParams {
                f_m: cal.kittel_frequency(current),
                ..*params
            };
            Ok(s21_spectrum(frequencies, &p)?.with_meta(SpectrumMeta {
                current: Some(current),
                ..Default::default()
            }))
        })
        .collect()
}

/// Hybridized qubit–magnon frequencies (upper, lower).
pub fn qubit_magnon_branches(f_q: f64, f_m: f64, g_qm: f64) -> (f64, f64) {
    let mean = (f_q + f_m) / 2.0;
    let half = (f_q - f_m) / 2.0;
    let r = g_qm.hypot(half);
    (mean + r, mean - r)
}

/// Qubit fraction of the upper branch; the lower branch carries the rest.
pub fn upper_branch_qubit_fraction(f_q: f64, f_m: f64, g_qm: f64) -> f64 {
    let d = f_q - f_m;
    let r = d.hypot(2.0 * g_qm);
    if r == 0.0 {
        return 0.5;
    }
    (1.0 + d / r) / 2.0
}

/// Inputs to the qubit spectroscopy synthesis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitSpectroscopy {
    /// Observed (dressed) qubit frequency, Hz.
    pub f_q: f64,
    /// Qubit linewidth, Hz.
    pub gamma_q: f64,
    /// Kittel linewidth, Hz.
    pub gamma_m: f64,
    pub g_qm: f64,
}

impl QubitSpectroscopy {
    /// Dressed qubit frequency and cavity-mediated coupling from `sys`.
    /// `g_qm` replaces the computed coupling when given.
    pub fn from_system(sys: &HybridSystem, g_qm: Option<f64>) -> Result<Self> {
        if sys.readout().is_none() {
            return Err(Error::Configuration("no readout mode designated".into()));
        }
        let qubit = sys
            .qubit
            .ok_or_else(|| Error::Configuration("qubit spectroscopy needs a qubit".into()))?;
        let modes: Vec<ModeCoupling> = sys.modes.iter().map(Into::into).collect();
        let f_bare = qubit.f_q.hz();
        let g_qm = match g_qm {
            Some(g) => g,
            None => dispersive::effective_qubit_magnon_coupling(&modes, f_bare)?,
        };
        Ok(QubitSpectroscopy {
            f_q: dispersive::dressed_qubit_frequency(f_bare, &modes)?,
            gamma_q: qubit.gamma_q.hz(),
            gamma_m: sys.magnon.gamma_m.hz(),
            g_qm: g_qm.abs(),
        })
    }

    /// Response at excitation frequency `f` with the Kittel mode at `f_m`:
    /// Σ_b w_b γ_b / (γ_b + i(f − f_b)), where w_b is the qubit fraction of
    /// branch b and γ_b interpolates the two linewidths by that fraction.
    /// Each real-part peak has height w_b and half width γ_b.
    pub fn response(&self, f: f64, f_m: f64) -> Complex64 {
        let (upper, lower) = qubit_magnon_branches(self.f_q, f_m, self.g_qm);
        let w = upper_branch_qubit_fraction(self.f_q, f_m, self.g_qm);
        [(upper, w), (lower, 1.0 - w)]
            .iter()
            .map(|&(f_b, w_b)| {
                let gamma = w_b * self.gamma_q + (1.0 - w_b) * self.gamma_m;
                w_b * gamma / Complex64::new(gamma, f - f_b)
            })
            .sum()
    }
}

/// Qubit spectroscopy traces at each coil current. Only the real part of the
/// response is kept, as that is what the readout measures.
pub fn qubit_spectrum_sweep(
    frequencies: &[f64],
    currents: &[f64],
    spec: &QubitSpectroscopy,
    cal: &CoilCalibration,
) -> Result<Vec<Spectrum>> {
    cal.validate()?;
    if !(spec.gamma_q > 0.0 && spec.gamma_m > 0.0) {
        return Err(invalid("qubit and Kittel linewidths must be positive"));
    }
    currents
        .par_iter()
        .map(|&current| {
            let f_m = cal.kittel_frequency(current);
            let values = frequencies
                .iter()
                .map(|&f| Complex64::new(spec.response(f, f_m).re, 0.0))
                .collect();
            Ok(Spectrum::new(frequencies.to_vec(), values, ValueKind::RealOnly)?.with_meta(
                SpectrumMeta {
                    current: Some(current),
                    ..Default::default()
                },
            ))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;
    use proptest::prelude::*;

    const MHZ: f64 = 1e6;

    fn paper_cavity() -> CavityMagnonParams {
        CavityMagnonParams::from_system(&presets::transmission_cavity(), 1).unwrap()
    }

    fn peak_separation(p: &CavityMagnonParams, half_span: f64, step: f64) -> f64 {
        let n = (2.0 * half_span / step) as usize + 1;
        let grid = linear_grid(p.f_c - half_span, p.f_c + half_span, n).unwrap();
        let s = s21_spectrum(&grid, p).unwrap();
        let (a, b) = two_highest(&s.peaks()).unwrap();
        b.frequency - a.frequency
    }

    #[test]
    fn ideal_cavity_transmits_fully_on_resonance() {
        let p = CavityMagnonParams {
            f_c: 10e9,
            kappa_in: 1e6,
            kappa_out: 1e6,
            kappa_int: 0.0,
            f_m: 9e9,
            gamma_m: 1e6,
            g_m: 0.0,
        };
        assert!((s21(10e9, &p).norm() - 1.0).abs() < 1e-15);
        assert!(s21(10e9 + 1e12, &p).norm() < 1e-5);
        assert!(s21(10e9 - 1e12, &p).norm() < 1e-5);
    }

    #[test]
    fn degenerate_splitting_is_twice_the_coupling() {
        let p = paper_cavity();
        assert!((p.kappa_total() / MHZ - 2.7).abs() < 1e-12);
        let sep = peak_separation(&p, 150.0 * MHZ, 0.1 * MHZ) / MHZ;
        assert!((sep - 94.0).abs() < 1.0, "{sep}");
        let modes = normal_modes(p.f_c, p.kappa_total(), p.f_m, p.gamma_m, p.g_m);
        let re_sep = modes[1].re - modes[0].re;
        assert!((re_sep / (2.0 * p.g_m) - 1.0).abs() < 0.005);
    }

    #[test]
    fn normal_modes_limits() {
        let m = normal_modes(10e9, 2e6, 9e9, 1e6, 0.0);
        assert_eq!(m[0], Complex64::new(9e9, -1e6));
        assert_eq!(m[1], Complex64::new(10e9, -1e6));
        let (g, d) = (20.0 * MHZ, 2e9);
        let m = normal_modes(10e9 + d, 0.0, 10e9, 0.0, g);
        let pull = m[1].re - (10e9 + d);
        let chi = dispersive::chi(g, d).unwrap();
        assert!((pull / chi - 1.0).abs() < 1e-3, "{pull} {chi}");
    }

    #[test]
    fn reflection_readout() {
        let mut sys = presets::qubit_magnon_cavity();
        // matched coupling
        let ro = sys.modes.iter_mut().find(|m| m.p == 3).unwrap();
        ro.kappa_int = ro.kappa_ext();
        let f0 = readout_resonance(&sys, QubitState::Ground).unwrap();
        assert!(s11_qubit_readout(f0, &sys, QubitState::Ground).unwrap().norm() < 1e-12);
        let far = s11_qubit_readout(f0 + 10e9, &sys, QubitState::Ground).unwrap();
        assert!((far.norm() - 1.0).abs() < 1e-3);

        let sys = presets::qubit_magnon_cavity();
        let f1 = readout_resonance(&sys, QubitState::Excited).unwrap();
        let f0 = readout_resonance(&sys, QubitState::Ground).unwrap();
        let shift = (f1 - f0).abs() / MHZ;
        assert!((shift / 1.2 - 1.0).abs() < 0.15, "{shift}");

        let grid = linear_grid(f0 - 5.0 * MHZ, f0 + 5.0 * MHZ, 10001).unwrap();
        let dip = |state| {
            let mags: Vec<f64> = grid
                .iter()
                .map(|&f| -s11_qubit_readout(f, &sys, state).unwrap().norm())
                .collect();
            let mut peaks = find_peaks(&grid, &mags.iter().map(|m| m + 1.0).collect::<Vec<_>>());
            peaks.sort_by(|a, b| b.height.total_cmp(&a.height));
            peaks[0].frequency
        };
        let moved = (dip(QubitState::Excited) - dip(QubitState::Ground)).abs() / MHZ;
        assert!((moved - shift).abs() < 1e-3);

        let mut no_readout = presets::qubit_magnon_cavity();
        no_readout.readout_mode = None;
        assert!(matches!(
            s11_qubit_readout(f0, &no_readout, QubitState::Ground),
            Err(Error::Configuration(_))
        ));
    }

    #[test]
    fn anticrossing_limits() {
        let p = paper_cavity();
        let cal = CoilCalibration::new(p.f_c, 100.0 * MHZ / 1e-3).unwrap();
        let grid = linear_grid(p.f_c - 150.0 * MHZ, p.f_c + 150.0 * MHZ, 3001).unwrap();
        let sweep = anticrossing_sweep(&grid, &[0.0, 40e-3], &p, &cal).unwrap();
        assert_eq!(sweep[0].meta.current, Some(0.0));
        let (a, b) = two_highest(&sweep[0].peaks()).unwrap();
        assert!((a.height / b.height - 1.0).abs() < 1e-3);
        // 4 GHz away: one cavity line within the grid
        let far = sweep[1].peaks();
        assert_eq!(far.len(), 1);
        assert!((far[0].frequency - p.f_c).abs() < 1.0 * MHZ);
        assert!(CoilCalibration::new(1e9, 0.0).is_err());
        assert!(CoilCalibration::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn sweep_is_deterministic_and_ordered() {
        let p = paper_cavity();
        let cal = CoilCalibration::new(p.f_c, 25e9).unwrap();
        let grid = linear_grid(p.f_c - 100.0 * MHZ, p.f_c + 100.0 * MHZ, 201).unwrap();
        let currents: Vec<f64> = (-20..=20).map(|i| i as f64 * 1e-4).collect();
        let a = anticrossing_sweep(&grid, &currents, &p, &cal).unwrap();
        let b = anticrossing_sweep(&grid, &currents, &p, &cal).unwrap();
        assert_eq!(a, b);
        for (s, &i) in a.iter().zip(&currents) {
            assert_eq!(s.meta.current, Some(i));
        }
    }

    #[test]
    fn branch_examples() {
        let (u, l) = qubit_magnon_branches(8e9, 8e9, 11.4 * MHZ);
        assert!(((u - l) / MHZ - 22.8).abs() < 1e-9);
        assert_eq!(qubit_magnon_branches(8e9, 7e9, 0.0), (8e9, 7e9));
        let (g, d) = (11.4 * MHZ, 500.0 * MHZ);
        let (u, _) = qubit_magnon_branches(8e9 + d, 8e9, g);
        assert!(((u - 8e9 - d) / (g * g / d) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn qubit_spectroscopy_lines() {
        let sys = presets::qubit_magnon_cavity();
        let spec = QubitSpectroscopy::from_system(&sys, Some(11.4 * MHZ)).unwrap();
        let cal = CoilCalibration::new(spec.f_q, 10e9).unwrap();
        let grid = linear_grid(spec.f_q - 60.0 * MHZ, spec.f_q + 60.0 * MHZ, 2401).unwrap();
        let sweep = qubit_spectrum_sweep(&grid, &[0.0, 0.05], &spec, &cal).unwrap();

        let split = sweep[0].peaks();
        assert_eq!(split.len(), 2);
        assert!(((split[1].frequency - split[0].frequency) / MHZ - 22.8).abs() < 0.5);
        assert!((split[0].height / split[1].height - 1.0).abs() < 0.01);

        let single = sweep[1].peaks();
        assert_eq!(single.len(), 1);
        // pulled by g²/Δ away from the bare line
        let (_, lower) = qubit_magnon_branches(spec.f_q, cal.kittel_frequency(0.05), spec.g_qm);
        assert!((single[0].frequency - lower).abs() < 0.01 * MHZ);
        assert!((single[0].frequency - spec.f_q).abs() < 0.3 * MHZ);
        let total = split[0].height + split[1].height;
        assert!((total / single[0].height - 1.0).abs() < 0.01, "{total}");
        // half width at half maximum of the isolated line
        let half = single[0].height / 2.0;
        let re = sweep[1].real_parts();
        let above = re.iter().filter(|&&v| v >= half).count() as f64;
        let hwhm = above * (grid[1] - grid[0]) / 2.0;
        assert!((hwhm / MHZ - 2.0).abs() < 0.1, "{hwhm}");

        let computed = QubitSpectroscopy::from_system(&sys, None).unwrap();
        assert!((computed.g_qm / MHZ - 13.4).abs() < 0.1);
    }

    proptest! {
        #[test]
        fn passivity(
            f in 9e9f64..11e9,
            kin in 1e3f64..1e7, kout in 1e3f64..1e7, kint in 0.0f64..1e7,
            fm in 9e9f64..11e9, gm in 0.0f64..1e7, g in 0.0f64..2e8,
        ) {
            let p = CavityMagnonParams { f_c: 1e10, kappa_in: kin, kappa_out: kout, kappa_int: kint, f_m: fm, gamma_m: gm, g_m: g };
            prop_assert!(s21(f, &p).norm() <= 1.0 + 1e-12);
        }

        #[test]
        fn symmetric_about_degeneracy(delta in 0.0f64..3e8, g in 0.0f64..1e8, k in 1e5f64..1e7, gm in 1e4f64..1e7) {
            let p = CavityMagnonParams { f_c: 1e10, kappa_in: k, kappa_out: k, kappa_int: k, f_m: 1e10, gamma_m: gm, g_m: g };
            let (a, b) = (s21(1e10 + delta, &p).norm(), s21(1e10 - delta, &p).norm());
            prop_assert!((a - b).abs() <= 1e-12 * a.max(b).max(1e-300));
        }

        #[test]
        fn trace_is_preserved(fc in 5e9f64..15e9, k in 0.0f64..1e7, fm in 5e9f64..15e9, gm in 0.0f64..1e7, g in 0.0f64..3e8) {
            let m = normal_modes(fc, k, fm, gm, g);
            let trace = Complex64::new(fc + fm, -k / 2.0 - gm);
            let sum = m[0] + m[1];
            prop_assert!((sum - trace).norm() <= 1e-12 * trace.norm());
            prop_assert!(m[0].re <= m[1].re);
        }

        #[test]
        fn separation_law(g in 10e6f64..100e6, ratio in 5.0f64..40.0, share in 0.2f64..0.8, gm_ratio in 0.1f64..0.5) {
            let kt = g / ratio;
            let p = CavityMagnonParams {
                f_c: 1e10, kappa_in: kt * share / 2.0, kappa_out: kt * share / 2.0,
                kappa_int: kt * (1.0 - share), f_m: 1e10, gamma_m: kt * gm_ratio, g_m: g,
            };
            let sep = peak_separation(&p, 2.0 * g, kt / 20.0);
            prop_assert!((sep / (2.0 * g) - 1.0).abs() < 0.01, "{} {}", sep, 2.0 * g);
        }

        #[test]
        fn mirror_detuning(d in -3e8f64..3e8, g in 1e6f64..1e8) {
            // exchanging the roles of the two modes mirrors the pair about f_c
            let a = normal_modes(1e10, 0.0, 1e10 + d, 0.0, g);
            let b = normal_modes(1e10, 0.0, 1e10 - d, 0.0, g);
            prop_assert!(((a[0].re + a[1].re) / 2.0 - 1e10 - d / 2.0).abs() < 1e-3);
            prop_assert!(((a[1].re - a[0].re) - (b[1].re - b[0].re)).abs() < 1e-3);
            prop_assert!(((a[1].re - 1e10) + (b[0].re - 1e10)).abs() < 1e-3);
        }

        #[test]
        fn branch_ordering(fq in 7e9f64..9e9, fm in 7e9f64..9e9, g in 0.0f64..1e8) {
            let (u, l) = qubit_magnon_branches(fq, fm, g);
            prop_assert!(u >= fq.max(fm) && fq.min(fm) >= l);
            let w = upper_branch_qubit_fraction(fq, fm, g);
            prop_assert!((0.0..=1.0).contains(&w));
        }
    }

    #[test]
    fn minimum_gap_is_twice_coupling() {
        let g = 11.4 * MHZ;
        let gaps = (-100..=100).map(|i| {
            let (u, l) = qubit_magnon_branches(8e9, 8e9 + i as f64 * 1e5, g);
            u - l
        });
        let min = gaps.fold(f64::INFINITY, f64::min);
        assert_eq!(min, 2.0 * g);
    }
}
