//! Parameter sets of the two reference devices: a single-mode transmission
//! cavity with a YIG sphere, and a multimode cavity holding a transmon and a
//! YIG sphere.

use crate::hybrid::{CavityGeometry, CavityMode, HybridSystem, MagnonMode, QubitParams, SphereSample};
use crate::units::{Frequency, Rate};

/// 22 × 18 × 3 mm copper cavity, TE101 at 10.565 GHz, Kittel mode tuned to
/// degeneracy. Couplings and linewidths are the fitted transmission values.
pub fn transmission_cavity() -> HybridSystem {
    let f_c = Frequency::from_ghz(10.565);
    let mode = CavityMode {
        kappa_in: Rate::from_mhz(0.5),
        kappa_out: Rate::from_mhz(0.5),
        kappa_int: Rate::from_mhz(1.7),
        g_m: 47e6,
        ..CavityMode::new(1, f_c)
    };
    HybridSystem {
        modes: vec![mode],
        qubit: None,
        magnon: MagnonMode {
            f_m: f_c,
            gamma_m: Rate::from_mhz(1.1),
        },
        sample: SphereSample::yig_half_mm(),
        readout_mode: None,
        geometry: Some(CavityGeometry {
            width: 22e-3,
            length: 18e-3,
            height: 3e-3,
            mode_indices: vec![1],
        }),
    }
}

/// Bare qubit detuning below TE102 implied by χ_102 = 75 MHz at g_q = 117 MHz.
pub const QUBIT_DETUNING_102: f64 = 117e6 * 117e6 / 75e6;

/// 25 × 3 × 53 mm cavity with TE102 as the qubit–magnon coupler and TE103 as
/// the qubit readout mode. The Kittel mode is tuned to the bare qubit.
pub fn qubit_magnon_cavity() -> HybridSystem {
    let f_102 = Frequency::from_ghz(8.488);
    let f_q = f_102 - Frequency::from_hz(QUBIT_DETUNING_102);
    let coupler = CavityMode {
        kappa_in: Rate::from_mhz(0.55),
        kappa_int: Rate::from_mhz(1.73),
        g_q: 117e6,
        g_m: 21e6,
        ..CavityMode::new(2, f_102)
    };
    let readout = CavityMode {
        kappa_in: Rate::from_mhz(2.75),
        kappa_int: Rate::from_mhz(1.26),
        g_q: 141e6,
        ..CavityMode::new(3, Frequency::from_ghz(10.461))
    };
    HybridSystem {
        modes: vec![coupler, readout],
        qubit: Some(QubitParams {
            f_q,
            alpha: -158e6,
            gamma_q: Rate::from_mhz(2.0),
            levels: 3,
        }),
        magnon: MagnonMode {
            f_m: f_q,
            gamma_m: Rate::from_mhz(1.8),
        },
        sample: SphereSample::yig_half_mm(),
        readout_mode: Some(3),
        geometry: Some(CavityGeometry {
            width: 25e-3,
            length: 53e-3,
            height: 3e-3,
            mode_indices: vec![1, 2, 3],
        }),
    }
}
