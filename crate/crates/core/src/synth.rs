//! Seeded synthetic data.
//!
//! Every noise source draws from its own ChaCha8 stream selected by a fixed
//! stream number, keyed by the single user seed. Two sources never share
//! random numbers, and adding a new source does not perturb existing ones.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{invalid, Result};
use crate::fit::PeakList;
use crate::magnetostatics::{linewidth_vs_temperature, LinewidthModelParams};
use crate::response::{anticrossing_sweep, s21_spectrum, CavityMagnonParams, CoilCalibration, Spectrum};
use crate::units::Frequency;

/// Stream numbers of the named noise sources.
pub mod stream {
    pub const S21: u64 = 1;
    pub const LINEWIDTH: u64 = 2;
    pub const PEAKS: u64 = 3;
}

pub fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn normal(sigma: f64) -> Result<Normal<f64>> {
    Normal::new(0.0, sigma).map_err(|e| invalid(format!("noise level: {e}")))
}

fn check_level(level: f64) -> Result<()> {
    if !(level >= 0.0) || !level.is_finite() {
        return Err(invalid(format!("noise level must be non-negative, got {level}")));
    }
    Ok(())
}

/// Adds circular complex Gaussian noise with rms magnitude `level · max|v|`.
pub fn add_complex_noise(values: &mut [Complex64], level: f64, rng: &mut ChaCha8Rng) -> Result<()> {
    check_level(level)?;
    let peak = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let dist = normal(level * peak / std::f64::consts::SQRT_2)?;
    for v in values.iter_mut() {
        let (re, im) = (dist.sample(rng), dist.sample(rng));
        *v += Complex64::new(re, im);
    }
    Ok(())
}

/// Multiplies each value by 1 + ε with ε ~ N(0, level²).
pub fn add_relative_noise(values: &mut [f64], level: f64, rng: &mut ChaCha8Rng) -> Result<()> {
    check_level(level)?;
    let dist = normal(level)?;
    for v in values.iter_mut() {
        *v *= 1.0 + dist.sample(rng);
    }
    Ok(())
}

/// Transmission spectrum with complex noise.
pub fn noisy_s21(grid: &[f64], params: &CavityMagnonParams, level: f64, seed: u64) -> Result<Spectrum> {
    let clean = s21_spectrum(grid, params)?;
    let mut values = clean.values().to_vec();
    add_complex_noise(&mut values, level, &mut rng(seed, stream::S21))?;
    Spectrum::new(grid.to_vec(), values, clean.kind)
}

/// Kittel linewidths at `temperatures` with relative noise.
pub fn noisy_linewidths(
    temperatures: &[f64],
    f_m: f64,
    params: &LinewidthModelParams,
    level: f64,
    seed: u64,
) -> Result<Vec<(f64, f64)>> {
    let mut gammas = temperatures
        .iter()
        .map(|&t| Ok(linewidth_vs_temperature(t, Frequency::from_hz(f_m), params)?.hz()))
        .collect::<Result<Vec<f64>>>()?;
    add_relative_noise(&mut gammas, level, &mut rng(seed, stream::LINEWIDTH))?;
    Ok(temperatures.iter().copied().zip(gammas).collect())
}

/// Peak positions of an anticrossing sweep whose spectra carry complex noise
/// at `level`. Each current keeps its own sub-stream so results do not depend
/// on sweep order.
pub fn anticrossing_peaks(
    grid: &[f64],
    currents: &[f64],
    params: &CavityMagnonParams,
    cal: &CoilCalibration,
    level: f64,
    seed: u64,
) -> Result<PeakList> {
    let sweep = anticrossing_sweep(grid, currents, params, cal)?;
    let mut out = Vec::with_capacity(sweep.len());
    for (k, spectrum) in sweep.into_iter().enumerate() {
        let mut values = spectrum.values().to_vec();
        if level > 0.0 {
            let mut r = rng(seed.wrapping_add(k as u64), stream::PEAKS);
            add_complex_noise(&mut values, level, &mut r)?;
        }
        let noisy = Spectrum::new(grid.to_vec(), values, spectrum.kind)?;
        let peaks = noisy.peaks().iter().map(|p| p.frequency).collect();
        out.push((spectrum.meta.current.unwrap_or_default(), peaks));
    }
    Ok(out)
}
