//! Linearized Landau–Lifshitz response of a uniformly magnetized sphere, the
//! Kittel-mode frequency and the low-temperature magnon linewidth model.

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::units::{gyromagnetic_ratio, Frequency, Rate, C};

/// Relative distance from the resonance pole inside which evaluation is refused.
pub const POLE_GUARD: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MagnetMaterial {
    /// Saturation magnetization M_s, A/m.
    pub saturation_magnetization: f64,
    pub g_factor: f64,
    /// Net spin density 2sN/V in Bohr magnetons per cubic metre.
    pub spin_density: f64,
}

impl MagnetMaterial {
    /// Yttrium iron garnet: 2.1e22 μ_B/cm³. M_s is the corresponding
    /// low-temperature value spin_density × μ_B.
    pub fn yig() -> Self {
        let spin_density = 2.1e22 * 1e6;
        MagnetMaterial {
            saturation_magnetization: spin_density * C.mu_b,
            g_factor: 2.0,
            spin_density,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("saturation magnetization", self.saturation_magnetization),
            ("g-factor", self.g_factor),
            ("spin density", self.spin_density),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(invalid(format!("{name} must be positive and finite, got {v}")));
            }
        }
        Ok(())
    }
}

/// Diagonal (κ) and off-diagonal (ν) Polder susceptibility components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Susceptibility {
    pub kappa: f64,
    pub nu: f64,
}

/// Returns (μ0 M_s / (B_z² − (ω/γ)²), ω/γ) after checking the pole guard.
fn polder_prefactor(f: Frequency, b_z: f64, mat: &MagnetMaterial) -> Result<(f64, f64)> {
    mat.validate()?;
    if !(b_z > 0.0) || !b_z.is_finite() {
        return Err(invalid(format!("static field must be positive, got {b_z} T")));
    }
    if !(f.hz() >= 0.0) || !f.hz().is_finite() {
        return Err(invalid(format!("frequency must be non-negative, got {f}")));
    }
    let gamma = gyromagnetic_ratio(mat.g_factor)?;
    let pole = gamma * b_z;
    if (f.hz() - pole).abs() <= POLE_GUARD * pole {
        return Err(Error::Singularity {
            what: "Landau-Lifshitz susceptibility",
            pole_hz: pole,
        });
    }
    // ω/γ with both in angular units equals f/(γ/2π)
    let w = f.hz() / gamma;
    Ok((C.mu_0 * mat.saturation_magnetization / (b_z * b_z - w * w), w))
}

pub fn susceptibility(f: Frequency, b_z: f64, mat: &MagnetMaterial) -> Result<Susceptibility> {
    let (pref, w) = polder_prefactor(f, b_z, mat)?;
    Ok(Susceptibility {
        kappa: pref * b_z,
        nu: pref * w,
    })
}

/// Transverse magnetization response m = (κ h_x − iν h_y, iν h_x + κ h_y) to a
/// drive h e^{iωt}. The result carries the units of `h`. Assumes |h| ≪ B_z/μ0.
pub fn transverse_magnetization(
    h: [Complex64; 2],
    f: Frequency,
    b_z: f64,
    mat: &MagnetMaterial,
) -> Result<[Complex64; 2]> {
    let chi = susceptibility(f, b_z, mat)?;
    let i = Complex64::i();
    Ok([
        chi.kappa * h[0] - i * chi.nu * h[1],
        i * chi.nu * h[0] + chi.kappa * h[1],
    ])
}

/// Uniform-precession frequency γ B_eff / 2π. Demagnetizing and anisotropy
/// offsets are expected to be folded into `b_eff`.
pub fn kittel_frequency(b_eff: f64, g_factor: f64) -> Result<Frequency> {
    if !(b_eff > 0.0) || !b_eff.is_finite() {
        return Err(invalid(format!("effective field must be positive, got {b_eff} T")));
    }
    Ok(Frequency::from_hz(gyromagnetic_ratio(g_factor)? * b_eff))
}

/// Two-level-system limited linewidth with a temperature-independent floor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinewidthModelParams {
    /// Zero-temperature TLS contribution.
    pub gamma_tls: Rate,
    /// Temperature-independent part (surface scattering).
    pub gamma_0: Rate,
}

impl LinewidthModelParams {
    pub fn validate(&self) -> Result<()> {
        if !self.gamma_tls.is_valid() || !self.gamma_0.is_valid() {
            return Err(invalid("linewidth parameters must be non-negative"));
        }
        Ok(())
    }
}

/// tanh(h f / 2 k_B T), equal to 1 at T = 0.
pub(crate) fn tls_saturation(t_kelvin: f64, f_m_hz: f64) -> f64 {
    if t_kelvin == 0.0 {
        1.0
    } else {
        (C.h * f_m_hz / (2.0 * C.k_b * t_kelvin)).tanh()
    }
}

/// γ_m(T) = γ_TLS tanh(h f_m / 2 k_B T) + γ_0.
pub fn linewidth_vs_temperature(
    t_kelvin: f64,
    f_m: Frequency,
    params: &LinewidthModelParams,
) -> Result<Rate> {
    params.validate()?;
    if !(t_kelvin >= 0.0) {
        return Err(invalid(format!("temperature must be non-negative, got {t_kelvin} K")));
    }
    if !(f_m.hz() > 0.0) || !f_m.hz().is_finite() {
        return Err(invalid(format!("Kittel frequency must be positive, got {f_m}")));
    }
    let tls = params.gamma_tls.hz() * tls_saturation(t_kelvin, f_m.hz());
    Ok(Rate::from_hz(tls + params.gamma_0.hz()))
}
