//! Spectral time evolution and time-dependent observables.
//!
//! `c_n(t) = c_n e^{−iE_n t}`. Observables are integrated on a radial grid
//! from the eigenfunctions tabulated once per grid, including the analytic
//! `(∂_r + 1/r) R_{n1}` used for the radial momentum.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::grid::RadialGrid;
use crate::spectral::EigenExpansion;
use crate::{Error, Result};

pub const DEFAULT_GRID_POINTS: usize = 8000;
pub const DEFAULT_R_MAX_FACTOR: f64 = 4.0;
/// Largest allowed mismatch between the grid norm and `Σ|c_n|²`.
pub const NORM_CHECK_TOL: f64 = 1e-6;

/// `c_n → c_n e^{−iE_n t}`.
pub fn evolve(exp: &EigenExpansion, t: f64) -> EigenExpansion {
    let coeffs = exp.iter().map(|(n, c)| c * phase(n, t)).collect();
    EigenExpansion {
        coeffs,
        ..exp.clone()
    }
}

fn phase(n: u32, t: f64) -> Complex64 {
    let e = crate::specfun::hydrogen_energy(n).expect("n >= 2");
    Complex64::from_polar(1.0, -e * t)
}

/// Normalized overlap `|⟨ψ(0)|ψ(t)⟩|² / (Σ|c_n|²)²`.
pub fn autocorrelation(exp: &EigenExpansion, t: f64) -> f64 {
    let w = exp.weight();
    if w == 0.0 {
        return 0.0;
    }
    let overlap: Complex64 = exp.iter().map(|(n, c)| c.norm_sqr() * phase(n, t)).sum();
    overlap.norm_sqr() / (w * w)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UncertaintyRecord {
    pub t: f64,
    pub dr: f64,
    pub dpr: f64,
    pub product: f64,
    pub ratio: f64,
    #[serde(rename = "dR")]
    pub d_r_big: f64,
    #[serde(rename = "dP")]
    pub d_p_big: f64,
    pub bound_half_rm2: f64,
}

/// Eigenfunctions `R_{n1}` and `(∂_r + 1/r) R_{n1}` tabulated on a grid.
pub struct BasisTable<'a> {
    exp: &'a EigenExpansion,
    grid: &'a RadialGrid,
    energies: Vec<f64>,
    /// Row-major `[level][point]`.
    radial: Vec<f64>,
    momentum: Vec<f64>,
}

impl<'a> BasisTable<'a> {
    pub fn new(exp: &'a EigenExpansion, grid: &'a RadialGrid) -> Self {
        let levels = exp.levels();
        let np = grid.len();
        let rows: Vec<(Vec<f64>, Vec<f64>)> = levels
            .par_iter()
            .map(|lvl| grid.points().iter().map(|&r| lvl.radial_and_momentum(r)).unzip())
            .collect();
        let mut radial = Vec::with_capacity(levels.len() * np);
        let mut momentum = Vec::with_capacity(levels.len() * np);
        for (r, m) in rows {
            radial.extend(r);
            momentum.extend(m);
        }
        Self {
            exp,
            grid,
            energies: levels.iter().map(|l| l.energy).collect(),
            radial,
            momentum,
        }
    }

    pub fn grid(&self) -> &RadialGrid {
        self.grid
    }

    fn coefficients_at(&self, t: f64) -> Vec<Complex64> {
        self.exp
            .coeffs
            .iter()
            .zip(&self.energies)
            .map(|(c, e)| c * Complex64::from_polar(1.0, -e * t))
            .collect()
    }

    /// `ψ_t` and `(∂_r + 1/r)ψ_t` at every grid point.
    fn fields(&self, t: f64) -> (Vec<Complex64>, Vec<Complex64>) {
        let np = self.grid.len();
        let cs = self.coefficients_at(t);
        let mut psi = vec![Complex64::new(0.0, 0.0); np];
        let mut dpsi = vec![Complex64::new(0.0, 0.0); np];
        for (k, c) in cs.iter().enumerate() {
            let row = &self.radial[k * np..(k + 1) * np];
            let mrow = &self.momentum[k * np..(k + 1) * np];
            for i in 0..np {
                psi[i] += c * row[i];
                dpsi[i] += c * mrow[i];
            }
        }
        (psi, dpsi)
    }

    /// `(r, r²|ψ_t(r)|²)` at every grid point.
    pub fn density(&self, t: f64) -> Vec<(f64, f64)> {
        let np = self.grid.len();
        let cs = self.coefficients_at(t);
        let mut psi = vec![Complex64::new(0.0, 0.0); np];
        for (k, c) in cs.iter().enumerate() {
            for (p, &v) in psi.iter_mut().zip(&self.radial[k * np..(k + 1) * np]) {
                *p += c * v;
            }
        }
        self.grid
            .points()
            .iter()
            .zip(psi)
            .map(|(&r, p)| (r, r * r * p.norm_sqr()))
            .collect()
    }

    pub fn observables(&self, t: f64) -> Result<UncertaintyRecord> {
        let (psi, dpsi) = self.fields(t);
        let (mut m0, mut m1, mut m2, mut mi1, mut mi2, mut p1, mut p2) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        for (i, (&r, &w)) in self.grid.points().iter().zip(self.grid.weights()).enumerate() {
            let d = psi[i].norm_sqr() * w;
            m0 += d * r * r;
            m1 += d * r * r * r;
            m2 += d * r * r * r * r;
            mi1 += d * r;
            mi2 += d;
            // Re[ψ* (−i) Dψ] = Im[ψ* Dψ]
            p1 += w * r * r * (psi[i].conj() * dpsi[i]).im;
            p2 += w * r * r * dpsi[i].norm_sqr();
        }
        let weight = self.exp.weight();
        if !((m0 - weight).abs() <= NORM_CHECK_TOL) {
            return Err(Error::Numerical(format!(
                "grid norm {m0:.9} differs from expansion weight {weight:.9} at t={t}; grid too coarse or too short"
            )));
        }
        let [m1, m2, mi1, mi2, p1, p2] = [m1, m2, mi1, mi2, p1, p2].map(|v| v / m0);
        let dr = (m2 - m1 * m1).max(0.0).sqrt();
        let dpr = (p2 - p1 * p1).max(0.0).sqrt();
        let d_r_big = (mi2 - mi1 * mi1).max(0.0).sqrt();
        Ok(UncertaintyRecord {
            t,
            dr,
            dpr,
            product: dr * dpr,
            ratio: dr / dpr,
            d_r_big,
            d_p_big: dpr,
            bound_half_rm2: 0.5 * mi2,
        })
    }

    /// Observables at each time, in the order given; evaluated in parallel.
    pub fn scan(&self, times: &[f64]) -> Result<Vec<UncertaintyRecord>> {
        times.par_iter().map(|&t| self.observables(t)).collect()
    }
}

/// `(r, r²|ψ_t(r)|²)` on `grid`.
pub fn density(exp: &EigenExpansion, grid: &RadialGrid, t: f64) -> Vec<(f64, f64)> {
    BasisTable::new(exp, grid).density(t)
}

pub fn observables(exp: &EigenExpansion, t: f64, grid: &RadialGrid) -> Result<UncertaintyRecord> {
    BasisTable::new(exp, grid).observables(t)
}
