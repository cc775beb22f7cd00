//! Physical constants and the frequency/rate conventions shared by every module.
//!
//! Frequencies and decay rates are ordinary frequencies in hertz. Angular
//! frequencies only appear inside individual formulas. A decay rate is the
//! coefficient that multiplies the damping term of the corresponding amplitude
//! equation, quoted divided by 2π; for a bare cavity the total rate
//! `kappa_in + kappa_out + kappa_int` is the full width at half maximum of
//! `|S21|^2`.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Div, Mul, Sub};

use crate::error::{invalid, Result};

/// CODATA-2018 values in SI units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    /// Bohr magneton, J/T.
    pub mu_b: f64,
    /// Reduced Planck constant, J s.
    pub hbar: f64,
    /// Planck constant, J s.
    pub h: f64,
    /// Boltzmann constant, J/K.
    pub k_b: f64,
    /// Vacuum permeability, T m/A.
    pub mu_0: f64,
    /// Speed of light, m/s.
    pub c_0: f64,
}

pub const CODATA_2018: PhysicalConstants = PhysicalConstants {
    mu_b: 9.274_010_078_3e-24,
    hbar: 6.626_070_15e-34 / (2.0 * PI),
    h: 6.626_070_15e-34,
    k_b: 1.380_649e-23,
    mu_0: 1.256_637_062_12e-6,
    c_0: 299_792_458.0,
};

/// Shorthand for the constants every formula uses.
pub const C: PhysicalConstants = CODATA_2018;

/// Ordinary frequency in hertz.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct Frequency(f64);

impl Frequency {
    pub const ZERO: Frequency = Frequency(0.0);

    pub const fn from_hz(hz: f64) -> Self {
        Frequency(hz)
    }

    pub fn from_mhz(mhz: f64) -> Self {
        Frequency(mhz * 1e6)
    }

    pub fn from_ghz(ghz: f64) -> Self {
        Frequency(ghz * 1e9)
    }

    pub const fn hz(self) -> f64 {
        self.0
    }

    pub fn mhz(self) -> f64 {
        self.0 * 1e-6
    }

    pub fn ghz(self) -> f64 {
        self.0 * 1e-9
    }

    /// Angular frequency in rad/s.
    pub fn angular(self) -> f64 {
        2.0 * PI * self.0
    }
}

impl fmt::Display for Frequency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} Hz", self.0)
    }
}

impl Add for Frequency {
    type Output = Frequency;
    fn add(self, rhs: Frequency) -> Frequency {
        Frequency(self.0 + rhs.0)
    }
}

impl Sub for Frequency {
    type Output = Frequency;
    fn sub(self, rhs: Frequency) -> Frequency {
        Frequency(self.0 - rhs.0)
    }
}

impl Mul<f64> for Frequency {
    type Output = Frequency;
    fn mul(self, rhs: f64) -> Frequency {
        Frequency(self.0 * rhs)
    }
}

impl Div<f64> for Frequency {
    type Output = Frequency;
    fn div(self, rhs: f64) -> Frequency {
        Frequency(self.0 / rhs)
    }
}

/// Decay rate expressed as an ordinary frequency (Hz).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct Rate(f64);

impl Rate {
    pub const ZERO: Rate = Rate(0.0);

    pub const fn from_hz(hz: f64) -> Self {
        Rate(hz)
    }

    pub fn from_mhz(mhz: f64) -> Self {
        Rate(mhz * 1e6)
    }

    pub const fn hz(self) -> f64 {
        self.0
    }

    pub fn mhz(self) -> f64 {
        self.0 * 1e-6
    }

    pub fn is_valid(self) -> bool {
        self.0.is_finite() && self.0 >= 0.0
    }
}

impl Add for Rate {
    type Output = Rate;
    fn add(self, rhs: Rate) -> Rate {
        Rate(self.0 + rhs.0)
    }
}

impl Mul<f64> for Rate {
    type Output = Rate;
    fn mul(self, rhs: f64) -> Rate {
        Rate(self.0 * rhs)
    }
}

/// Electron gyromagnetic ratio γ/2π = g μ_B / h, in Hz per tesla.
pub fn gyromagnetic_ratio(g_factor: f64) -> Result<f64> {
    if !g_factor.is_finite() || g_factor <= 0.0 {
        return Err(invalid(format!("g-factor must be positive and finite, got {g_factor}")));
    }
    Ok(g_factor * C.mu_b / C.h)
}

/// Bose–Einstein occupancy of a mode at frequency `f` and temperature `t_kelvin`.
pub fn thermal_occupancy(f: Frequency, t_kelvin: f64) -> Result<f64> {
    if !(f.hz() > 0.0) || !f.hz().is_finite() {
        return Err(invalid(format!("frequency must be positive, got {f}")));
    }
    if !(t_kelvin >= 0.0) {
        return Err(invalid(format!("temperature must be non-negative, got {t_kelvin} K")));
    }
    if t_kelvin == 0.0 {
        return Ok(0.0);
    }
    let x = C.h * f.hz() / (C.k_b * t_kelvin);
    Ok(1.0 / x.exp_m1())
}
