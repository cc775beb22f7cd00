//! First-order dispersive shifts of the multimode transmon–cavity–Kittel
//! Hamiltonian and the couplings derived from them.
//!
//! Every detuning is `f_cavity − f_qubit` (or `f_cavity − f_magnon`) built
//! from bare frequencies, so χ is positive when the cavity sits above the
//! qubit. All inputs and outputs are ordinary frequencies in Hz.

pub mod exact;

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::hybrid::{CavityMode, HybridSystem};

fn nonzero(denominator: f64, what: &'static str, pole_hz: f64) -> Result<f64> {
    if denominator == 0.0 || !denominator.is_finite() {
        return Err(Error::Singularity { what, pole_hz });
    }
    Ok(denominator)
}

/// χ = g²/Δ.
pub fn chi(g: f64, detuning: f64) -> Result<f64> {
    let d = nonzero(detuning, "dispersive shift chi", 0.0)?;
    Ok(g * g / d)
}

/// Lamb shift of qubit level l: λ^(l) = l g² / (Δ − (l−1)α).
pub fn lamb_shift(g: f64, detuning: f64, alpha: f64, level: u32) -> Result<f64> {
    let l = level as f64;
    let d = nonzero(detuning - (l - 1.0) * alpha, "Lamb shift", (l - 1.0) * alpha)?;
    Ok(l * g * g / d)
}

/// Level-dependent cavity shift χ^(l) = g²[(l+1)/(Δ − lα) − l/(Δ − (l−1)α)].
/// χ^(0) reduces to χ.
pub fn chi_level(g: f64, detuning: f64, alpha: f64, level: u32) -> Result<f64> {
    let l = level as f64;
    let upper = nonzero(detuning - l * alpha, "level-dependent shift", l * alpha)?;
    if level == 0 {
        return Ok(g * g / upper);
    }
    let lower = nonzero(detuning - (l - 1.0) * alpha, "level-dependent shift", (l - 1.0) * alpha)?;
    Ok(g * g * ((l + 1.0) / upper - l / lower))
}

/// Mutual frequency pull of a cavity mode and the Kittel mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MagnonPull {
    /// Shift of the Kittel mode, −g_m²/Δ_m.
    pub kittel_shift: f64,
    /// Shift of the cavity mode, +g_m²/Δ_m.
    pub cavity_shift: f64,
}

pub fn magnon_pull(g_m: f64, detuning_m: f64) -> Result<MagnonPull> {
    let d = nonzero(detuning_m, "magnon pull", 0.0)?;
    let shift = g_m * g_m / d;
    Ok(MagnonPull {
        kittel_shift: -shift,
        cavity_shift: shift,
    })
}

/// Photon–magnon cross-Kerr −(1/N) 2g_m²/Δ_m from the finite spin number.
pub fn cross_kerr(g_m: f64, detuning_m: f64, n_net: f64) -> Result<f64> {
    if !(n_net > 0.0) || !n_net.is_finite() {
        return Err(Error::InvalidArgument(format!("spin count must be positive, got {n_net}")));
    }
    let d = nonzero(detuning_m, "cross-Kerr", 0.0)?;
    Ok(-2.0 * g_m * g_m / (n_net * d))
}

/// Couplings of one cavity mode to the qubit and the Kittel mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeCoupling {
    pub p: u32,
    pub f_c: f64,
    pub g_q: f64,
    pub g_m: f64,
}

impl From<&CavityMode> for ModeCoupling {
    fn from(m: &CavityMode) -> Self {
        ModeCoupling {
            p: m.p,
            f_c: m.f_c.hz(),
            g_q: m.g_q,
            g_m: m.g_m,
        }
    }
}

/// Cavity-mediated exchange coupling g_q-m = Σ_p g_m,p g_q,p / (f_p − f_q).
pub fn effective_qubit_magnon_coupling(modes: &[ModeCoupling], f_q: f64) -> Result<f64> {
    modes.iter().try_fold(0.0, |acc, m| {
        let d = m.f_c - f_q;
        if d == 0.0 {
            return Err(Error::Singularity {
                what: "qubit-magnon coupling (mode resonant with qubit)",
                pole_hz: m.f_c,
            });
        }
        Ok(acc + m.g_m * m.g_q / d)
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PurcellTerm {
    pub chi: f64,
    pub kappa_total: f64,
    pub detuning: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PurcellLimit {
    /// 1/T1 in s⁻¹.
    pub decay_rate: f64,
    /// T1 in seconds; infinite when no mode leaks.
    pub t1: f64,
}

impl PurcellLimit {
    pub fn is_unbounded(&self) -> bool {
        self.decay_rate == 0.0
    }
}

/// Purcell-limited T1 with 1/T1 = 2π Σ_p χ_p κ_p / Δ_p (ordinary-frequency inputs).
pub fn purcell_t1(terms: &[PurcellTerm]) -> Result<PurcellLimit> {
    let mut sum = 0.0;
    for t in terms {
        if !(t.kappa_total >= 0.0) || !t.kappa_total.is_finite() {
            return Err(Error::Configuration(format!(
                "mode loss rate must be non-negative, got {} Hz",
                t.kappa_total
            )));
        }
        let d = nonzero(t.detuning, "Purcell rate", 0.0)?;
        sum += t.chi * t.kappa_total / d;
    }
    let decay_rate = 2.0 * PI * sum;
    if decay_rate < 0.0 || !decay_rate.is_finite() {
        return Err(Error::Configuration(format!(
            "Purcell decay rate is not a non-negative number ({decay_rate} 1/s)"
        )));
    }
    let t1 = if decay_rate == 0.0 { f64::INFINITY } else { 1.0 / decay_rate };
    Ok(PurcellLimit { decay_rate, t1 })
}

fn total_lamb_shift(f_q: f64, modes: &[ModeCoupling]) -> Result<f64> {
    modes.iter().try_fold(0.0, |acc, m| {
        if m.g_q == 0.0 {
            return Ok(acc);
        }
        // λ^(1) does not depend on α
        Ok(acc + lamb_shift(m.g_q, m.f_c - f_q, 0.0, 1)?)
    })
}

/// Observed qubit frequency f_q − Σ_p λ^(1)_p.
pub fn dressed_qubit_frequency(f_q_bare: f64, modes: &[ModeCoupling]) -> Result<f64> {
    Ok(f_q_bare - total_lamb_shift(f_q_bare, modes)?)
}

/// Maximum fixed-point iterations used by [`bare_qubit_frequency`].
pub const BARE_FROM_DRESSED_MAX_ITER: usize = 100;

/// Inverts [`dressed_qubit_frequency`] by fixed-point iteration to 1 Hz.
pub fn bare_qubit_frequency(f_q_dressed: f64, modes: &[ModeCoupling]) -> Result<f64> {
    let mut bare = f_q_dressed;
    for _ in 0..BARE_FROM_DRESSED_MAX_ITER {
        let next = f_q_dressed + total_lamb_shift(bare, modes)?;
        if (next - bare).abs() < 1e-3 {
            let resid = dressed_qubit_frequency(next, modes)? - f_q_dressed;
            if resid.abs() <= 1.0 {
                return Ok(next);
            }
        }
        bare = next;
    }
    Err(Error::Convergence(format!(
        "bare qubit frequency did not converge in {BARE_FROM_DRESSED_MAX_ITER} iterations"
    )))
}

/// The qubit-state-dependent Kittel shift only appears at third order and has
/// no closed form here.
pub fn qubit_state_dependent_kittel_shift(_sys: &HybridSystem) -> Result<f64> {
    Err(Error::NotModeled(
        "qubit-state-dependent Kittel-mode shift (third-order term)",
    ))
}

/// Shifts attributed to a single cavity mode.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeShifts {
    pub p: u32,
    /// f_c − f_q with the bare qubit frequency.
    pub detuning_q: f64,
    /// f_c − f̃_q with the dressed qubit frequency.
    pub detuning_q_dressed: f64,
    pub chi: f64,
    /// g_q² / (f_c − f̃_q): the same shift evaluated with the dressed detuning.
    pub chi_dressed_detuning: f64,
    /// (l, λ^(l)) for l = 1 .. levels−1.
    pub lamb_shifts: Vec<(u32, f64)>,
    /// (l, χ^(l)) for l = 0 .. levels−2.
    pub chi_levels: Vec<(u32, f64)>,
    pub detuning_m: f64,
    pub kittel_shift: f64,
    pub cavity_pull: f64,
    pub cross_kerr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DispersiveReport {
    pub modes: Vec<ModeShifts>,
    pub f_q_bare: f64,
    pub f_q_dressed: f64,
    /// χ^(1) − χ of the readout mode, if one is designated.
    pub readout_shift: Option<f64>,
    pub g_qm: f64,
    pub purcell: PurcellLimit,
}

fn shift_or_zero(g: f64, f: impl FnOnce() -> Result<f64>) -> Result<f64> {
    if g == 0.0 {
        Ok(0.0)
    } else {
        f()
    }
}

pub fn dispersive_report(sys: &HybridSystem) -> Result<DispersiveReport> {
    let qubit = sys
        .qubit
        .ok_or_else(|| Error::Configuration("dispersive report needs a qubit".into()))?;
    let f_q = qubit.f_q.hz();
    let alpha = qubit.alpha;
    let couplings: Vec<ModeCoupling> = sys.modes.iter().map(ModeCoupling::from).collect();
    let f_q_dressed = dressed_qubit_frequency(f_q, &couplings)?;
    let n_net = sys.sample.net_spins();
    let f_m = sys.magnon.f_m.hz();

    let mut modes = Vec::with_capacity(sys.modes.len());
    let mut purcell_terms = Vec::new();
    for m in &sys.modes {
        let g = m.g_q;
        let delta = m.f_c.hz() - f_q;
        let delta_dressed = m.f_c.hz() - f_q_dressed;
        let chi_p = shift_or_zero(g, || chi(g, delta))?;
        let lamb_shifts = (1..qubit.levels as u32)
            .map(|l| Ok((l, shift_or_zero(g, || lamb_shift(g, delta, alpha, l))?)))
            .collect::<Result<Vec<_>>>()?;
        let chi_levels = (0..qubit.levels as u32 - 1)
            .map(|l| Ok((l, shift_or_zero(g, || chi_level(g, delta, alpha, l))?)))
            .collect::<Result<Vec<_>>>()?;
        let delta_m = m.f_c.hz() - f_m;
        let pull = if m.g_m == 0.0 {
            MagnonPull { kittel_shift: 0.0, cavity_shift: 0.0 }
        } else {
            magnon_pull(m.g_m, delta_m)?
        };
        let kerr = shift_or_zero(m.g_m, || cross_kerr(m.g_m, delta_m, n_net))?;
        if g != 0.0 {
            purcell_terms.push(PurcellTerm {
                chi: chi_p,
                kappa_total: m.kappa_total().hz(),
                detuning: delta,
            });
        }
        modes.push(ModeShifts {
            p: m.p,
            detuning_q: delta,
            detuning_q_dressed: delta_dressed,
            chi: chi_p,
            chi_dressed_detuning: shift_or_zero(g, || chi(g, delta_dressed))?,
            lamb_shifts,
            chi_levels,
            detuning_m: delta_m,
            kittel_shift: pull.kittel_shift,
            cavity_pull: pull.cavity_shift,
            cross_kerr: kerr,
        });
    }

    let readout_shift = match sys.readout_mode {
        None => None,
        Some(p) => {
            let m = sys
                .mode(p)
                .ok_or_else(|| Error::Configuration(format!("readout mode p={p} not defined")))?;
            Some(readout_state_shift(m.g_q, m.f_c.hz() - f_q, alpha)?)
        }
    };

    Ok(DispersiveReport {
        modes,
        f_q_bare: f_q,
        f_q_dressed,
        readout_shift,
        g_qm: effective_qubit_magnon_coupling(&couplings, f_q)?,
        purcell: purcell_t1(&purcell_terms)?,
    })
}

/// χ^(1) − χ: cavity frequency change when the qubit flips from |0⟩ to |1⟩.
pub fn readout_state_shift(g_q: f64, detuning: f64, alpha: f64) -> Result<f64> {
    shift_or_zero(g_q, || Ok(chi_level(g_q, detuning, alpha, 1)? - chi(g_q, detuning)?))
}
