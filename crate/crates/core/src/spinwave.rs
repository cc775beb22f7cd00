//! Spin-wave dispersion of a nearest-neighbour Heisenberg ferromagnet on a
//! simple (hyper)cubic lattice, plus a brute-force exact diagonalization of the
//! spin Hamiltonian in the one-magnon sector used to validate it.

use std::collections::HashMap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{invalid, Error, Result};
use crate::units::{Frequency, C};

/// Largest full Hilbert-space dimension the exact-diagonalization oracle accepts.
pub const MAX_HILBERT_DIM: u64 = 1 << 20;

/// Site spin, stored as `2s` so half-integers are exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Spin(u8);

impl Spin {
    pub const HALF: Spin = Spin(1);
    pub const ONE: Spin = Spin(2);
    pub const THREE_HALVES: Spin = Spin(3);
    pub const TWO: Spin = Spin(4);

    pub fn new(s: f64) -> Result<Self> {
        let twice = 2.0 * s;
        if twice.fract() != 0.0 || !(1.0..=4.0).contains(&twice) {
            return Err(invalid(format!("spin must be one of 1/2, 1, 3/2, 2; got {s}")));
        }
        Ok(Spin(twice as u8))
    }

    pub fn value(self) -> f64 {
        self.0 as f64 / 2.0
    }

    pub fn twice(self) -> u8 {
        self.0
    }

    /// Local Hilbert-space dimension 2s+1.
    pub fn multiplicity(self) -> usize {
        self.0 as usize + 1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpinLattice {
    /// Sites per axis; the length is the dimensionality (1, 2 or 3).
    pub extent: Vec<usize>,
    /// Lattice constant a0, metres.
    pub lattice_constant: f64,
    pub spin: Spin,
    /// Exchange integral J in joules (ferromagnetic, J > 0).
    pub exchange: f64,
    pub g_factor: f64,
    /// Static field along z, tesla.
    pub b_z: f64,
    pub periodic: Vec<bool>,
}

impl SpinLattice {
    /// Periodic lattice with a0 = 1 nm, g = 2 and no field.
    pub fn periodic(extent: &[usize], spin: Spin, exchange: f64) -> Result<Self> {
        let lat = SpinLattice {
            extent: extent.to_vec(),
            lattice_constant: 1e-9,
            spin,
            exchange,
            g_factor: 2.0,
            b_z: 0.0,
            periodic: vec![true; extent.len()],
        };
        lat.validate()?;
        Ok(lat)
    }

    pub fn with_field(mut self, b_z: f64) -> Self {
        self.b_z = b_z;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let dim = self.extent.len();
        if !(1..=3).contains(&dim) {
            return Err(invalid(format!("dimensionality must be 1, 2 or 3, got {dim}")));
        }
        if self.periodic.len() != dim {
            return Err(invalid("one periodicity flag per axis required"));
        }
        if self.extent.iter().any(|&n| n < 2) {
            return Err(invalid("every axis needs at least 2 sites"));
        }
        if !(self.exchange > 0.0) || !self.exchange.is_finite() {
            return Err(invalid(format!(
                "exchange must be positive (ferromagnet), got {}",
                self.exchange
            )));
        }
        if !(self.lattice_constant > 0.0) || !self.lattice_constant.is_finite() {
            return Err(invalid("lattice constant must be positive"));
        }
        if !(self.g_factor > 0.0) || !self.g_factor.is_finite() {
            return Err(invalid("g-factor must be positive"));
        }
        if !self.b_z.is_finite() {
            return Err(invalid("field must be finite"));
        }
        Ok(())
    }

    pub fn dimensionality(&self) -> usize {
        self.extent.len()
    }

    /// Coordination number Z = 2 × dimensionality.
    pub fn coordination(&self) -> usize {
        2 * self.dimensionality()
    }

    pub fn sites(&self) -> usize {
        self.extent.iter().product()
    }

    fn zeeman_energy(&self) -> f64 {
        self.g_factor * C.mu_b * self.b_z
    }

    /// Wave vectors 2πn/(N a0) of every Bloch state, n centred on zero.
    pub fn brillouin_zone(&self) -> Result<Vec<WaveVector>> {
        if self.periodic.iter().any(|p| !p) {
            return Err(invalid("Brillouin-zone grid requires periodic axes"));
        }
        let a0 = self.lattice_constant;
        let mut grid = vec![Vec::new()];
        for &n in &self.extent {
            let lo = -((n as i64 - 1) / 2);
            let mut next = Vec::with_capacity(grid.len() * n);
            for partial in &grid {
                for m in lo..lo + n as i64 {
                    let mut k: Vec<f64> = partial.clone();
                    k.push(2.0 * PI * m as f64 / (n as f64 * a0));
                    next.push(k);
                }
            }
            grid = next;
        }
        Ok(grid.into_iter().map(WaveVector).collect())
    }
}

/// Wave vector in rad/m, one component per lattice axis.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveVector(pub Vec<f64>);

impl WaveVector {
    pub fn norm(&self) -> f64 {
        self.0.iter().map(|k| k * k).sum::<f64>().sqrt()
    }
}

fn check_wave_vector(k: &WaveVector, lat: &SpinLattice) -> Result<()> {
    lat.validate()?;
    if k.0.len() != lat.dimensionality() {
        return Err(invalid(format!(
            "wave vector has {} components for a {}-dimensional lattice",
            k.0.len(),
            lat.dimensionality()
        )));
    }
    for (axis, (&ki, (&n, &periodic))) in k
        .0
        .iter()
        .zip(lat.extent.iter().zip(&lat.periodic))
        .enumerate()
    {
        if !ki.is_finite() {
            return Err(invalid("wave vector must be finite"));
        }
        if periodic {
            let index = ki * n as f64 * lat.lattice_constant / (2.0 * PI);
            if (index - index.round()).abs() > 1e-9 * index.abs().max(1.0) {
                return Err(invalid(format!(
                    "k component {ki} on axis {axis} is not commensurate with {n} periodic sites"
                )));
            }
        }
    }
    Ok(())
}

/// γ_k: mean of cos(k_i a0) over the lattice axes.
pub fn structure_factor(k: &WaveVector, lat: &SpinLattice) -> Result<f64> {
    check_wave_vector(k, lat)?;
    let a0 = lat.lattice_constant;
    Ok(k.0.iter().map(|ki| (ki * a0).cos()).sum::<f64>() / k.0.len() as f64)
}

/// ħω_k = 2sZJ(1 − γ_k) + gμ_B B_z, returned as ω_k/2π.
pub fn dispersion(k: &WaveVector, lat: &SpinLattice) -> Result<Frequency> {
    let gamma = structure_factor(k, lat)?;
    let exchange =
        2.0 * lat.spin.value() * lat.coordination() as f64 * lat.exchange * (1.0 - gamma);
    Ok(Frequency::from_hz((exchange + lat.zeeman_energy()) / C.h))
}

/// Quadratic small-|k| form ħω = 2sJa0²|k|² + gμ_B B_z. No commensurability check.
pub fn dispersion_long_wavelength(k: &WaveVector, lat: &SpinLattice) -> Result<Frequency> {
    lat.validate()?;
    let a0 = lat.lattice_constant;
    let k2 = k.norm().powi(2);
    let e = 2.0 * lat.spin.value() * lat.exchange * a0 * a0 * k2 + lat.zeeman_energy();
    Ok(Frequency::from_hz(e / C.h))
}

/// Total S_z left after `n_magnons` spin flips from the fully polarized state.
pub fn magnon_number_to_spin_deficit(n_magnons: u64, lat: &SpinLattice) -> Result<f64> {
    lat.validate()?;
    let max = lat.spin.twice() as u64 * lat.sites() as u64;
    if n_magnons > max {
        return Err(invalid(format!("magnon number {n_magnons} exceeds 2sN = {max}")));
    }
    Ok(lat.sites() as f64 * lat.spin.value() - n_magnons as f64)
}

/// Excitation energies (J, ascending) of every one-magnon eigenstate of
/// H = −gμ_B B_z Σ S_i^z − 2J Σ_<ij> S_i·S_j, measured from the fully polarized
/// ground state. Builds the spin Hamiltonian directly on the product basis.
pub fn exact_single_magnon_energies(lat: &SpinLattice) -> Result<Vec<f64>> {
    lat.validate()?;
    if lat.periodic.iter().any(|p| !p) {
        return Err(invalid("exact diagonalization oracle requires periodic boundaries"));
    }
    let d = lat.spin.multiplicity() as u64;
    let n = lat.sites();
    let dim = u32::try_from(n)
        .ok()
        .and_then(|n| d.checked_pow(n))
        .filter(|&dim| dim <= MAX_HILBERT_DIM)
        .ok_or_else(|| {
            Error::ResourceLimit(format!(
                "Hilbert dimension {d}^{n} exceeds {MAX_HILBERT_DIM}"
            ))
        })?;

    let ground = sector_eigenvalues(lat, dim, 0)?;
    let e0 = ground[0];
    let mut excited: Vec<f64> = sector_eigenvalues(lat, dim, 1)?
        .into_iter()
        .map(|e| e - e0)
        .collect();
    excited.sort_by(f64::total_cmp);
    Ok(excited)
}

fn bonds(lat: &SpinLattice) -> Vec<(usize, usize)> {
    let mut strides = Vec::with_capacity(lat.extent.len());
    let mut stride = 1;
    for &n in &lat.extent {
        strides.push(stride);
        stride *= n;
    }
    let mut out = Vec::new();
    for site in 0..lat.sites() {
        for (axis, &n) in lat.extent.iter().enumerate() {
            let coord = (site / strides[axis]) % n;
            let neighbour = site - coord * strides[axis] + ((coord + 1) % n) * strides[axis];
            out.push((site, neighbour));
        }
    }
    out
}

/// Eigenvalues of the block with total S_z = Ns − `deficit`, selected from
/// the full product basis by masking on the digit sum.
fn sector_eigenvalues(lat: &SpinLattice, dim: u64, deficit: usize) -> Result<Vec<f64>> {
    let d = lat.spin.multiplicity();
    let n = lat.sites();
    let s = lat.spin.value();

    // Local digit q counts lowering steps: m = s − q.
    let digits = |mut idx: u64| -> Vec<usize> {
        let mut q = vec![0; n];
        for slot in q.iter_mut() {
            *slot = (idx % d as u64) as usize;
            idx /= d as u64;
        }
        q
    };
    let encode = |q: &[usize]| -> u64 { q.iter().rev().fold(0, |acc, &x| acc * d as u64 + x as u64) };

    let states: Vec<Vec<usize>> = (0..dim)
        .map(digits)
        .filter(|q| q.iter().sum::<usize>() == deficit)
        .collect();
    let index: HashMap<u64, usize> = states
        .iter()
        .enumerate()
        .map(|(i, q)| (encode(q), i))
        .collect();

    let m = |q: usize| s - q as f64;
    // <m+1|S+|m> and <m-1|S-|m>
    let raise = |mz: f64| (s * (s + 1.0) - mz * (mz + 1.0)).max(0.0).sqrt();
    let lower = |mz: f64| (s * (s + 1.0) - mz * (mz - 1.0)).max(0.0).sqrt();

    let j = lat.exchange;
    let zeeman = lat.zeeman_energy();
    let bonds = bonds(lat);
    let size = states.len();
    let mut h = DMatrix::<f64>::zeros(size, size);
    for (col, q) in states.iter().enumerate() {
        let total_sz: f64 = q.iter().map(|&x| m(x)).sum();
        h[(col, col)] -= zeeman * total_sz;
        for &(a, b) in &bonds {
            let (ma, mb) = (m(q[a]), m(q[b]));
            h[(col, col)] -= 2.0 * j * ma * mb;
            // S+_a S-_b and S-_a S+_b, each with weight 1/2
            for (up, down) in [(a, b), (b, a)] {
                if q[up] == 0 || q[down] + 1 >= d {
                    continue;
                }
                let amp = raise(m(q[up])) * lower(m(q[down]));
                let mut target = q.clone();
                target[up] -= 1;
                target[down] += 1;
                let row = index[&encode(&target)];
                h[(row, col)] -= j * amp;
            }
        }
    }
    Ok(SymmetricEigen::new(h).eigenvalues.iter().copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(n: usize, j: f64) -> SpinLattice {
        SpinLattice::periodic(&[n], Spin::HALF, j).unwrap()
    }

    #[test]
    fn structure_factor_examples() {
        let lat = SpinLattice::periodic(&[4, 4, 4], Spin::HALF, 1.0).unwrap();
        let a = lat.lattice_constant;
        let g0 = structure_factor(&WaveVector(vec![0.0; 3]), &lat).unwrap();
        assert_eq!(g0, 1.0);
        let gpi = structure_factor(&WaveVector(vec![PI / a; 3]), &lat).unwrap();
        assert!((gpi + 1.0).abs() < 1e-15);
        let g = structure_factor(&WaveVector(vec![PI / (2.0 * a), 0.0, 0.0]), &lat).unwrap();
        assert!((g - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn incommensurate_wave_vector_rejected() {
        let lat = chain(4, 1.0);
        let k = WaveVector(vec![1.0 / lat.lattice_constant]);
        assert!(structure_factor(&k, &lat).is_err());
        assert!(structure_factor(&WaveVector(vec![0.0, 0.0]), &lat).is_err());
    }

    #[test]
    fn dispersion_zone_boundary_of_chain() {
        let j = 1e-23;
        let lat = chain(4, j);
        let k = WaveVector(vec![PI / lat.lattice_constant]);
        let f = dispersion(&k, &lat).unwrap();
        assert!((f.hz() - 4.0 * j / C.h).abs() <= 1e-12 * f.hz());
    }

    #[test]
    fn dispersion_at_zero_k_is_zeeman() {
        let lat = SpinLattice::periodic(&[3, 3], Spin::ONE, 1e-22).unwrap().with_field(0.3);
        let f = dispersion(&WaveVector(vec![0.0, 0.0]), &lat).unwrap();
        let zeeman = 2.0 * C.mu_b * 0.3 / C.h;
        assert!((f.hz() - zeeman).abs() <= 1e-12 * zeeman);
    }

    #[test]
    fn long_wavelength_limit() {
        let mut lat = SpinLattice::periodic(&[8, 8, 8], Spin::TWO, 1e-22).unwrap();
        lat.periodic = vec![false; 3];
        let a = lat.lattice_constant;
        for ka in [1e-4, 1e-3, 5e-3, 1e-2] {
            let k = WaveVector(vec![ka / a / 3f64.sqrt(); 3]);
            let exact = dispersion(&k, &lat).unwrap().hz();
            let approx = dispersion_long_wavelength(&k, &lat).unwrap().hz();
            assert!((exact - approx).abs() <= 1e-3 * exact, "ka={ka}");
        }
    }

    #[test]
    fn spin_values() {
        assert!(Spin::new(0.0).is_err());
        assert!(Spin::new(0.75).is_err());
        assert!(Spin::new(2.5).is_err());
        assert_eq!(Spin::new(1.5).unwrap(), Spin::THREE_HALVES);
    }

    #[test]
    fn antiferromagnet_rejected() {
        assert!(SpinLattice::periodic(&[4], Spin::HALF, -1.0).is_err());
        assert!(SpinLattice::periodic(&[1], Spin::HALF, 1.0).is_err());
    }

    #[test]
    fn spin_deficit() {
        let lat = chain(10, 1.0);
        assert_eq!(magnon_number_to_spin_deficit(0, &lat).unwrap(), 5.0);
        assert_eq!(magnon_number_to_spin_deficit(1, &lat).unwrap(), 4.0);
        assert_eq!(magnon_number_to_spin_deficit(10, &lat).unwrap(), -5.0);
        assert!(magnon_number_to_spin_deficit(11, &lat).is_err());
    }

    #[test]
    fn four_site_ring_energies() {
        let energies = exact_single_magnon_energies(&chain(4, 1.0)).unwrap();
        let expected = [0.0, 2.0, 2.0, 4.0];
        assert_eq!(energies.len(), 4);
        for (e, x) in energies.iter().zip(expected) {
            assert!((e - x).abs() < 1e-12, "{energies:?}");
        }
    }

    #[test]
    fn field_shifts_every_energy_by_zeeman() {
        let base = exact_single_magnon_energies(&chain(5, 1e-23)).unwrap();
        let b = 0.7;
        let shifted = exact_single_magnon_energies(&chain(5, 1e-23).with_field(b)).unwrap();
        let zeeman = 2.0 * C.mu_b * b;
        for (x, y) in base.iter().zip(&shifted) {
            assert!((y - x - zeeman).abs() <= 1e-12 * (y.abs() + zeeman));
        }
    }

    #[test]
    fn six_site_ring_matches_dispersion() {
        let lat = chain(6, 3e-23).with_field(0.1);
        let exact = exact_single_magnon_energies(&lat).unwrap();
        let mut analytic: Vec<f64> = lat
            .brillouin_zone()
            .unwrap()
            .iter()
            .map(|k| dispersion(k, &lat).unwrap().hz() * C.h)
            .collect();
        analytic.sort_by(f64::total_cmp);
        let scale = analytic.last().copied().unwrap();
        for (e, a) in exact.iter().zip(&analytic) {
            assert!((e - a).abs() <= 1e-10 * scale, "{exact:?} vs {analytic:?}");
        }
    }

    #[test]
    fn higher_spin_and_square_lattice_match_dispersion() {
        for lat in [
            SpinLattice::periodic(&[5], Spin::ONE, 2e-23).unwrap(),
            SpinLattice::periodic(&[3], Spin::TWO, 2e-23).unwrap().with_field(0.2),
            SpinLattice::periodic(&[3, 3], Spin::HALF, 2e-23).unwrap(),
            SpinLattice::periodic(&[2, 2, 2], Spin::HALF, 2e-23).unwrap(),
        ] {
            let exact = exact_single_magnon_energies(&lat).unwrap();
            let mut analytic: Vec<f64> = lat
                .brillouin_zone()
                .unwrap()
                .iter()
                .map(|k| dispersion(k, &lat).unwrap().hz() * C.h)
                .collect();
            analytic.sort_by(f64::total_cmp);
            assert_eq!(exact.len(), analytic.len());
            let scale = analytic.last().copied().unwrap();
            for (e, a) in exact.iter().zip(&analytic) {
                assert!((e - a).abs() <= 1e-10 * scale, "{lat:?}");
            }
        }
    }

    #[test]
    fn oracle_dimension_cap() {
        let lat = chain(21, 1.0);
        assert!(matches!(
            exact_single_magnon_energies(&lat),
            Err(Error::ResourceLimit(_))
        ));
    }
}
