//! Numerical diagonalization of the truncated transmon–cavity–Kittel
//! Hamiltonian, used to check the closed-form dispersive shifts.
//!
//! The couplings are exchange terms g(x†a + a†x), so the total excitation
//! number is conserved and each number sector is diagonalized on its own.
//! Energies are kept in a frame rotating at the bare qubit frequency, which
//! keeps matrix entries in the MHz range and eigenvalues accurate to well
//! below a hertz.

use nalgebra::{DMatrix, SymmetricEigen};

use super::ModeCoupling;
use crate::error::{invalid, Error, Result};

/// Hilbert-space cap for the full truncated space.
pub const MAX_DIM: usize = 1 << 16;

#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedModel {
    pub f_q: f64,
    pub alpha: f64,
    pub f_m: f64,
    pub modes: Vec<ModeCoupling>,
    /// Number of transmon levels kept.
    pub qubit_levels: usize,
    /// Fock states kept per cavity mode.
    pub cavity_states: usize,
    /// Fock states kept for the Kittel mode.
    pub magnon_states: usize,
}

/// One eigenstate of a number sector with the weight carried by each subsystem.
#[derive(Debug, Clone, PartialEq)]
pub struct Level {
    /// Absolute energy in Hz.
    pub energy: f64,
    pub qubit_weight: f64,
    pub cavity_weights: Vec<f64>,
    pub magnon_weight: f64,
}

impl Level {
    pub fn cavity_weight(&self) -> f64 {
        self.cavity_weights.iter().sum()
    }
}

impl TruncatedModel {
    pub fn new(f_q: f64, alpha: f64, f_m: f64, modes: Vec<ModeCoupling>) -> Self {
        TruncatedModel {
            f_q,
            alpha,
            f_m,
            modes,
            qubit_levels: 3,
            cavity_states: 3,
            magnon_states: 3,
        }
    }

    pub fn with_truncation(mut self, qubit: usize, cavity: usize, magnon: usize) -> Self {
        self.qubit_levels = qubit;
        self.cavity_states = cavity;
        self.magnon_states = magnon;
        self
    }

    /// Radices of the product basis: qubit, cavity modes in order, magnon.
    fn radices(&self) -> Vec<usize> {
        let mut r = Vec::with_capacity(self.modes.len() + 2);
        r.push(self.qubit_levels);
        r.extend(std::iter::repeat(self.cavity_states).take(self.modes.len()));
        r.push(self.magnon_states);
        r
    }

    pub fn dimension(&self) -> Result<usize> {
        self.radices()
            .iter()
            .try_fold(1usize, |acc, &r| acc.checked_mul(r))
            .filter(|&d| d <= MAX_DIM)
            .ok_or_else(|| Error::ResourceLimit(format!("truncated space exceeds {MAX_DIM} states")))
    }

    fn validate(&self) -> Result<()> {
        if self.qubit_levels < 2 || self.cavity_states < 2 || self.magnon_states < 2 {
            return Err(invalid("every subsystem needs at least two retained states"));
        }
        let all = [self.f_q, self.alpha, self.f_m];
        let finite = all.iter().all(|v| v.is_finite())
            && self.modes.iter().all(|m| m.f_c.is_finite() && m.g_q.is_finite() && m.g_m.is_finite());
        if !finite {
            return Err(invalid("model parameters must be finite"));
        }
        self.dimension().map(|_| ())
    }

    fn digits(&self, mut index: usize, radices: &[usize]) -> Vec<usize> {
        radices
            .iter()
            .rev()
            .map(|&r| {
                let d = index % r;
                index /= r;
                d
            })
            .collect::<Vec<_>>()
            .into_iter()
            .rev()
            .collect()
    }

    fn index(digits: &[usize], radices: &[usize]) -> usize {
        digits.iter().zip(radices).fold(0, |acc, (&d, &r)| acc * r + d)
    }

    /// Full Hamiltonian in the rotating frame, with the excitation number of
    /// each basis state.
    pub fn hamiltonian(&self) -> Result<(DMatrix<f64>, Vec<usize>)> {
        self.validate()?;
        let radices = self.radices();
        let dim = self.dimension()?;
        let n_modes = self.modes.len();
        let magnon_slot = n_modes + 1;
        let mut h = DMatrix::<f64>::zeros(dim, dim);
        let mut numbers = Vec::with_capacity(dim);

        for i in 0..dim {
            let d = self.digits(i, &radices);
            numbers.push(d.iter().sum());
            let l = d[0] as f64;
            let mut diag = self.alpha * l * (l - 1.0) / 2.0;
            for (k, m) in self.modes.iter().enumerate() {
                diag += (m.f_c - self.f_q) * d[k + 1] as f64;
            }
            diag += (self.f_m - self.f_q) * d[magnon_slot] as f64;
            h[(i, i)] = diag;

            // raise the qubit or magnon, lower cavity mode k
            for (k, m) in self.modes.iter().enumerate() {
                let n_c = d[k + 1];
                if n_c == 0 {
                    continue;
                }
                for (slot, g) in [(0, m.g_q), (magnon_slot, m.g_m)] {
                    if g == 0.0 || d[slot] + 1 >= radices[slot] {
                        continue;
                    }
                    let mut e = d.clone();
                    e[k + 1] -= 1;
                    e[slot] += 1;
                    let j = Self::index(&e, &radices);
                    let amp = g * ((n_c as f64) * (e[slot] as f64)).sqrt();
                    h[(j, i)] += amp;
                    h[(i, j)] += amp;
                }
            }
        }
        Ok((h, numbers))
    }

    /// Eigenstates of the sector with `excitations` quanta, sorted by energy.
    pub fn sector_levels(&self, excitations: usize) -> Result<Vec<Level>> {
        let (h, numbers) = self.hamiltonian()?;
        let radices = self.radices();
        let members: Vec<usize> = (0..numbers.len()).filter(|&i| numbers[i] == excitations).collect();
        if members.is_empty() {
            return Ok(Vec::new());
        }
        let block = DMatrix::from_fn(members.len(), members.len(), |r, c| h[(members[r], members[c])]);
        let eig = SymmetricEigen::new(block);
        let n_modes = self.modes.len();
        let mut levels: Vec<Level> = (0..members.len())
            .map(|col| {
                let v = eig.eigenvectors.column(col);
                let mut level = Level {
                    energy: eig.eigenvalues[col] + self.f_q * excitations as f64,
                    qubit_weight: 0.0,
                    cavity_weights: vec![0.0; n_modes],
                    magnon_weight: 0.0,
                };
                for (row, &state) in members.iter().enumerate() {
                    let w = v[row] * v[row];
                    let d = self.digits(state, &radices);
                    let total = excitations.max(1) as f64;
                    level.qubit_weight += w * d[0] as f64 / total;
                    for k in 0..n_modes {
                        level.cavity_weights[k] += w * d[k + 1] as f64 / total;
                    }
                    level.magnon_weight += w * d[n_modes + 1] as f64 / total;
                }
                level
            })
            .collect();
        levels.sort_by(|a, b| a.energy.total_cmp(&b.energy));
        Ok(levels)
    }

    /// Largest movement of the sector-0..=2 eigenvalues when every
    /// truncation is raised by one.
    pub fn truncation_shift(&self) -> Result<f64> {
        let bigger = self.clone().with_truncation(
            self.qubit_levels + 1,
            self.cavity_states + 1,
            self.magnon_states + 1,
        );
        let mut worst: f64 = 0.0;
        for n in 0..=2 {
            let a = self.sector_levels(n)?;
            let b = bigger.sector_levels(n)?;
            for (x, y) in a.iter().zip(&b) {
                worst = worst.max((x.energy - y.energy).abs());
            }
            if a.len() != b.len() {
                worst = f64::INFINITY;
            }
        }
        Ok(worst)
    }
}

/// Shift of the cavity-like single-excitation level of `mode` away from its
/// bare frequency. With no magnon coupling this is the numerical χ.
pub fn numerical_cavity_shift(model: &TruncatedModel, mode: usize) -> Result<f64> {
    let f_c = model
        .modes
        .get(mode)
        .ok_or_else(|| invalid(format!("no cavity mode at position {mode}")))?
        .f_c;
    let levels = model.sector_levels(1)?;
    let level = levels
        .iter()
        .max_by(|a, b| a.cavity_weights[mode].total_cmp(&b.cavity_weights[mode]))
        .ok_or_else(|| invalid("empty single-excitation sector"))?;
    Ok(level.energy - f_c)
}

/// The two single-excitation levels carrying most of the qubit and magnon
/// weight, as (lower, upper).
pub fn qubit_magnon_pair(model: &TruncatedModel) -> Result<(Level, Level)> {
    let mut levels = model.sector_levels(1)?;
    if levels.len() < 2 {
        return Err(invalid("single-excitation sector has fewer than two levels"));
    }
    levels.sort_by(|a, b| {
        (b.qubit_weight + b.magnon_weight).total_cmp(&(a.qubit_weight + a.magnon_weight))
    });
    let (mut lo, mut hi) = (levels[0].clone(), levels[1].clone());
    if lo.energy > hi.energy {
        std::mem::swap(&mut lo, &mut hi);
    }
    Ok((lo, hi))
}

/// Qubit–magnon coupling read off the anticrossing: half the minimum gap
/// between the qubit-like and magnon-like levels as the Kittel frequency is
/// scanned through the qubit.
pub fn numerical_qubit_magnon_coupling(model: &TruncatedModel) -> Result<f64> {
    let gap = |f_m: f64| -> Result<f64> {
        let m = TruncatedModel { f_m, ..model.clone() };
        let (lo, hi) = qubit_magnon_pair(&m)?;
        Ok(hi.energy - lo.energy)
    };
    // The minimum lies near the qubit plus the difference of the two
    // cavity-induced shifts; bracket generously around it.
    let spread: f64 = model
        .modes
        .iter()
        .map(|m| {
            let d = (m.f_c - model.f_q).abs().max(1.0);
            (m.g_q * m.g_q + m.g_m * m.g_m + m.g_q * m.g_m) / d
        })
        .sum();
    let half_width = 4.0 * spread.max(1e3);
    let (mut a, mut b) = (model.f_q - half_width, model.f_q + half_width);
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut gc, mut gd) = (gap(c)?, gap(d)?);
    for _ in 0..200 {
        if b - a < 1e-3 {
            break;
        }
        if gc < gd {
            b = d;
            d = c;
            gd = gc;
            c = b - ratio * (b - a);
            gc = gap(c)?;
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + ratio * (b - a);
            gd = gap(d)?;
        }
    }
    Ok(gap((a + b) / 2.0)? / 2.0)
}
