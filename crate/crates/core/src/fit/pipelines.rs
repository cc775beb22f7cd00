//! Fitting pipelines built on [`minimize`](super::minimize).

use num_complex::Complex64;

use super::{minimize, FitOptions, FitProblem, FitResult};
use crate::error::{invalid, Error, Result};
use crate::magnetostatics::{tls_saturation, LinewidthModelParams};
use crate::response::{normal_modes, s21, CavityMagnonParams, CoilCalibration, Spectrum, ValueKind};
use crate::units::Rate;

/// Starting point of a transmission fit.
pub type S21Guess = CavityMagnonParams;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct S21FitOptions {
    /// Tie κ_in = κ_out.
    pub symmetric_ports: bool,
    pub optimizer: FitOptions,
}

impl Default for S21FitOptions {
    fn default() -> Self {
        S21FitOptions {
            symmetric_ports: true,
            optimizer: FitOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct S21Fit {
    pub params: CavityMagnonParams,
    pub result: FitResult,
}

fn s21_params(x: &[f64], symmetric: bool) -> CavityMagnonParams {
    let (kappa_in, kappa_out, rest) = if symmetric {
        (x[3], x[3], &x[4..])
    } else {
        (x[3], x[4], &x[5..])
    };
    CavityMagnonParams {
        f_c: x[0],
        f_m: x[1],
        g_m: x[2],
        kappa_in,
        kappa_out,
        kappa_int: rest[0],
        gamma_m: rest[1],
    }
}

/// Least-squares fit of the cavity–magnon transmission to `data`.
///
/// Complex data are fitted on both quadratures; real-only data on the real
/// part. The choice is recorded under the `projection` metadata key.
pub fn fit_s21(data: &Spectrum, guess: &S21Guess, options: &S21FitOptions) -> Result<S21Fit> {
    let symmetric = options.symmetric_ports;
    let n_params = if symmetric { 6 } else { 7 };
    let points = match data.kind {
        ValueKind::Complex => 2 * data.len(),
        ValueKind::RealOnly => data.len(),
    };
    if points <= n_params {
        return Err(Error::InsufficientData {
            needed: n_params + 1,
            got: points,
        });
    }
    let freqs = data.frequencies();
    let values = data.values();
    if freqs.iter().all(|&f| s21(f, guess) == Complex64::new(0.0, 0.0)) {
        return Err(Error::DegenerateFit("model is identically zero at the guess".into()));
    }

    let kind = data.kind;
    let residual = |x: &[f64]| -> Vec<f64> {
        let p = s21_params(x, symmetric);
        let mut r = Vec::with_capacity(points);
        match kind {
            ValueKind::Complex => {
                for (&f, v) in freqs.iter().zip(values) {
                    let d = s21(f, &p) - v;
                    r.push(d.re);
                    r.push(d.im);
                }
            }
            ValueKind::RealOnly => {
                for (&f, v) in freqs.iter().zip(values) {
                    r.push(s21(f, &p).re - v.re);
                }
            }
        }
        r
    };

    let linewidth = guess.kappa_total().max(guess.gamma_m).max(1.0);
    let rate_scale = |v: f64| if v > 0.0 { v } else { linewidth };
    let mut names = vec!["f_c", "f_m", "g_m"];
    let mut initial = vec![guess.f_c, guess.f_m, guess.g_m];
    let mut scale = vec![linewidth, linewidth, guess.g_m.max(linewidth)];
    if symmetric {
        names.push("kappa_port");
        let port = (guess.kappa_in + guess.kappa_out) / 2.0;
        initial.push(port);
        scale.push(rate_scale(port));
    } else {
        names.extend(["kappa_in", "kappa_out"]);
        initial.extend([guess.kappa_in, guess.kappa_out]);
        scale.extend([rate_scale(guess.kappa_in), rate_scale(guess.kappa_out)]);
    }
    names.extend(["kappa_int", "gamma_m"]);
    initial.extend([guess.kappa_int, guess.gamma_m]);
    scale.extend([rate_scale(guess.kappa_int), rate_scale(guess.gamma_m)]);

    let inf = f64::INFINITY;
    let mut bounds = vec![(-inf, inf), (-inf, inf), (0.0, inf)];
    bounds.extend(std::iter::repeat((0.0, inf)).take(n_params - 3));

    let problem = FitProblem::new(&names, residual, initial, scale).with_bounds(bounds);
    let mut result = minimize(&problem, &options.optimizer)?;
    result.metadata.push((
        "projection".into(),
        match kind {
            ValueKind::Complex => "complex",
            ValueKind::RealOnly => "real",
        }
        .into(),
    ));
    result.metadata.push((
        "ports".into(),
        if symmetric { "symmetric" } else { "independent" }.into(),
    ));
    let params = s21_params(&result.parameters, symmetric);
    Ok(S21Fit { params, result })
}

/// Highest temperature covered by the TLS linewidth model, K.
pub const LINEWIDTH_MAX_TEMPERATURE: f64 = 1.0;

#[derive(Debug, Clone, PartialEq)]
pub struct LinewidthFit {
    pub params: LinewidthModelParams,
    pub result: FitResult,
}

/// Fits γ(T) = γ_TLS tanh(h f_m / 2 k_B T) + γ_0 with f_m held fixed.
/// Points above 1 K are left out with a warning.
pub fn fit_linewidth_temperature(data: &[(f64, f64)], f_m: f64, options: &FitOptions) -> Result<LinewidthFit> {
    if !(f_m > 0.0) || !f_m.is_finite() {
        return Err(invalid(format!("Kittel frequency must be positive, got {f_m}")));
    }
    if let Some(&(t, g)) = data.iter().find(|(t, g)| !(t.is_finite() && *t >= 0.0 && g.is_finite())) {
        return Err(invalid(format!("bad linewidth point (T = {t}, gamma = {g})")));
    }
    let used: Vec<(f64, f64)> = data
        .iter()
        .copied()
        .filter(|&(t, _)| t <= LINEWIDTH_MAX_TEMPERATURE)
        .collect();
    let dropped = data.len() - used.len();
    if used.len() < 3 {
        return Err(Error::InsufficientData {
            needed: 3,
            got: used.len(),
        });
    }
    let saturation: Vec<f64> = used.iter().map(|&(t, _)| tls_saturation(t, f_m)).collect();
    let residual = |x: &[f64]| -> Vec<f64> {
        used.iter()
            .zip(&saturation)
            .map(|(&(_, g), s)| x[0] * s + x[1] - g)
            .collect()
    };
    let (lo, hi) = used
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &(_, g)| (a.min(g), b.max(g)));
    let level = used.iter().map(|&(_, g)| g.abs()).sum::<f64>() / used.len() as f64;
    let scale = level.max(1.0);
    let problem = FitProblem::new(
        &["gamma_tls", "gamma_0"],
        residual,
        vec![(hi - lo).max(0.0), lo.max(0.0)],
        vec![scale, scale],
    )
    .with_bounds(vec![(0.0, f64::INFINITY); 2]);
    let mut result = minimize(&problem, options)?;
    if dropped > 0 {
        result.warnings.push(format!(
            "{dropped} point(s) above {LINEWIDTH_MAX_TEMPERATURE} K excluded: the TLS model covers lower temperatures only"
        ));
    }
    result.metadata.push(("f_m_Hz".into(), f_m.to_string()));
    let params = LinewidthModelParams {
        gamma_tls: Rate::from_hz(result.parameters[0]),
        gamma_0: Rate::from_hz(result.parameters[1]),
    };
    Ok(LinewidthFit { params, result })
}

/// Observed peak frequencies at each coil current.
pub type PeakList = Vec<(f64, Vec<f64>)>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnticrossingGuess {
    pub f_c: f64,
    pub f_m0: f64,
    pub slope: f64,
    pub g_m: f64,
    /// Held fixed during the fit.
    pub kappa_total: f64,
    /// Held fixed during the fit.
    pub gamma_m: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnticrossingFit {
    pub f_c: f64,
    pub calibration: CoilCalibration,
    pub g_m: f64,
    pub result: FitResult,
}

/// Fits peak positions to the real parts of the coupled normal modes with
/// the Kittel frequency f_m0 + slope·I. Two observed peaks are matched to the
/// two branches in order; a lone peak to the nearer branch. Both slope signs
/// are tried and the better fit kept.
pub fn fit_anticrossing(peaks: &PeakList, guess: &AnticrossingGuess, options: &FitOptions) -> Result<AnticrossingFit> {
    let observed: Vec<(f64, Vec<f64>)> = peaks
        .iter()
        .filter(|(_, p)| !p.is_empty())
        .map(|(i, p)| {
            let mut p = p.clone();
            p.sort_by(f64::total_cmp);
            (*i, p)
        })
        .collect();
    let count: usize = observed.iter().map(|(_, p)| p.len().min(2)).sum();
    if count <= 4 {
        return Err(Error::InsufficientData { needed: 5, got: count });
    }
    if guess.slope == 0.0 || !guess.slope.is_finite() {
        return Err(invalid("coil slope guess must be finite and nonzero"));
    }
    let (kappa, gamma) = (guess.kappa_total, guess.gamma_m);
    let residual = |x: &[f64]| -> Vec<f64> {
        let mut r = Vec::with_capacity(count);
        for (current, p) in &observed {
            let m = normal_modes(x[0], kappa, x[1] + x[2] * current, gamma, x[3]);
            let (lo, hi) = (m[0].re, m[1].re);
            if p.len() >= 2 {
                r.push(p[0] - lo);
                r.push(p[p.len() - 1] - hi);
            } else {
                let (a, b) = (p[0] - lo, p[0] - hi);
                r.push(if a.abs() <= b.abs() { a } else { b });
            }
        }
        r
    };
    let currents = observed.iter().map(|(i, _)| *i);
    let (i_min, i_max) = currents.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), i| (a.min(i), b.max(i)));
    let f_scale = guess.g_m.max(kappa).max(1e3);
    let slope_scale = guess.slope.abs();

    let attempt = |slope: f64| -> Result<FitResult> {
        let problem = FitProblem::new(
            &["f_c", "f_m0", "slope", "g_m"],
            &residual,
            vec![guess.f_c, guess.f_m0, slope, guess.g_m.max(0.0)],
            vec![f_scale, f_scale, slope_scale, f_scale],
        )
        .with_bounds(vec![
            (f64::NEG_INFINITY, f64::INFINITY),
            (f64::NEG_INFINITY, f64::INFINITY),
            (f64::NEG_INFINITY, f64::INFINITY),
            (0.0, f64::INFINITY),
        ]);
        minimize(&problem, options)
    };
    let a = attempt(guess.slope)?;
    let b = attempt(-guess.slope)?;
    let mut result = if b.residual_norm < a.residual_norm { b } else { a };

    let x = &result.parameters;
    let (d_lo, d_hi) = (x[1] + x[2] * i_min - x[0], x[1] + x[2] * i_max - x[0]);
    if d_lo.signum() == d_hi.signum() {
        result.warnings.push(
            "ill-conditioned: peaks lie on one side of the crossing only".into(),
        );
    }
    result.metadata.push(("kappa_total_Hz".into(), kappa.to_string()));
    result.metadata.push(("gamma_m_Hz".into(), gamma.to_string()));
    let calibration = CoilCalibration::new(x[1], x[2])?;
    Ok(AnticrossingFit {
        f_c: x[0],
        calibration,
        g_m: x[3],
        result,
    })
}
