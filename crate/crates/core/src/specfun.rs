//! Special functions and hydrogen bound-state radial eigenfunctions.
//!
//! Radial functions are assembled as `exp(log-prefactor − ρ/2 + l·ln ρ) × L(ρ)`
//! with `ρ = 2r/n`. The Laguerre factor stays in linear space but carries a
//! running log-scale, so nothing overflows for `n` in the hundreds and `r` a
//! few times `n²`.

use crate::{Error, Result};

/// `ln Γ(x)` for `x > 0`.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(format!("log_gamma needs a finite x > 0, got {x}")));
    }
    Ok(libm::lgamma(x))
}

/// Generalized Laguerre polynomial `L_n^a(x)` by upward recurrence in degree.
pub fn laguerre(n: u32, a: f64, x: f64) -> f64 {
    let p = LaguerrePair::new(n, a, x);
    p.value * p.log_scale.exp()
}

/// `L_k^a(x)` and `L_{k-1}^a(x)`, both multiplied by `exp(-log_scale)`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LaguerrePair {
    pub value: f64,
    pub prev: f64,
    pub log_scale: f64,
}

const RESCALE_AT: f64 = 1e100;

impl LaguerrePair {
    pub(crate) fn new(k: u32, a: f64, x: f64) -> Self {
        let mut prev = 0.0;
        let mut cur = 1.0;
        let mut log_scale = 0.0;
        for j in 0..k {
            let j = j as f64;
            let next = ((2.0 * j + 1.0 + a - x) * cur - (j + a) * prev) / (j + 1.0);
            prev = cur;
            cur = next;
            if cur.abs() > RESCALE_AT {
                cur /= RESCALE_AT;
                prev /= RESCALE_AT;
                log_scale += RESCALE_AT.ln();
            }
        }
        Self {
            value: cur,
            prev,
            log_scale,
        }
    }
}

/// Hydrogen bound-state energy `−1/(2n²)` in hartree.
pub fn hydrogen_energy(n: u32) -> Result<f64> {
    if n < 1 {
        return Err(Error::domain("principal quantum number must be >= 1"));
    }
    let n = n as f64;
    Ok(-0.5 / (n * n))
}

/// A hydrogen bound state `(n, l)` with its log-normalization precomputed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HydrogenLevel {
    pub n: u32,
    pub l: u32,
    pub energy: f64,
    log_prefactor: f64,
}

impl HydrogenLevel {
    pub fn new(n: u32, l: u32) -> Result<Self> {
        if n < 1 || l >= n {
            return Err(Error::domain(format!("invalid hydrogen state (n={n}, l={l})")));
        }
        let nf = n as f64;
        // ∫ R² r² dr = 1 with R = C ρ^l e^{-ρ/2} L_{n-l-1}^{2l+1}(ρ), ρ = 2r/n,
        // C² = (2/n)³ (n−l−1)! / (2n (n+l)!)
        let log_factorial_ratio = if l <= 16 {
            -((n - l)..=(n + l)).map(|j| (j as f64).ln()).sum::<f64>()
        } else {
            log_gamma((n - l) as f64)? - log_gamma((n + l + 1) as f64)?
        };
        let log_prefactor = 0.5 * (3.0 * (2.0 / nf).ln() - (2.0 * nf).ln() + log_factorial_ratio);
        Ok(Self {
            n,
            l,
            energy: hydrogen_energy(n)?,
            log_prefactor,
        })
    }

    fn degree(&self) -> u32 {
        self.n - self.l - 1
    }

    fn alpha(&self) -> f64 {
        (2 * self.l + 1) as f64
    }

    fn rho(&self, r: f64) -> f64 {
        2.0 * r / self.n as f64
    }

    /// Exponent of the envelope `C ρ^p e^{-ρ/2}`; `None` when the envelope is
    /// exactly zero (ρ = 0 with p > 0).
    fn log_envelope(&self, rho: f64, power: i32, log_scale: f64) -> Option<f64> {
        let base = self.log_prefactor - 0.5 * rho + log_scale;
        match power {
            0 => Some(base),
            _ if rho == 0.0 => (power < 0).then_some(f64::INFINITY),
            p => Some(base + p as f64 * rho.ln()),
        }
    }

    /// `R_{nl}(r)`.
    pub fn radial(&self, r: f64) -> f64 {
        let rho = self.rho(r);
        let lag = LaguerrePair::new(self.degree(), self.alpha(), rho);
        match self.log_envelope(rho, self.l as i32, lag.log_scale) {
            Some(e) => lag.value * e.exp(),
            None => 0.0,
        }
    }

    /// `(R_{nl}(r), (∂_r + 1/r) R_{nl}(r))`.
    ///
    /// The second component is the radial momentum operator up to a factor
    /// `−i`, evaluated from the Laguerre derivative identity
    /// `x L_k'(x) = k L_k − (k + a) L_{k−1}` rather than by differencing.
    pub fn radial_and_momentum(&self, r: f64) -> (f64, f64) {
        let rho = self.rho(r);
        let k = self.degree();
        let a = self.alpha();
        let lag = LaguerrePair::new(k, a, rho);
        let l = self.l as f64;
        let value = match self.log_envelope(rho, self.l as i32, lag.log_scale) {
            Some(e) => lag.value * e.exp(),
            None => 0.0,
        };
        let bracket = (l + 1.0 - 0.5 * rho) * lag.value + k as f64 * lag.value - (k as f64 + a) * lag.prev;
        let deriv = match self.log_envelope(rho, self.l as i32 - 1, lag.log_scale) {
            Some(e) if e.is_infinite() => f64::INFINITY * bracket.signum(),
            Some(e) => 2.0 / self.n as f64 * bracket * e.exp(),
            None => 0.0,
        };
        (value, deriv)
    }

    /// `ln|R_{nl}(r)|` and the sign of `R_{nl}(r)`.
    pub fn log_abs(&self, r: f64) -> (f64, f64) {
        let rho = self.rho(r);
        let lag = LaguerrePair::new(self.degree(), self.alpha(), rho);
        match self.log_envelope(rho, self.l as i32, lag.log_scale) {
            Some(e) if lag.value != 0.0 => (e + lag.value.abs().ln(), lag.value.signum()),
            _ => (f64::NEG_INFINITY, 0.0),
        }
    }
}

/// `R_{nl}(r)`, normalized so that `∫ R² r² dr = 1`.
pub fn hydrogen_radial(n: u32, l: u32, r: f64) -> Result<f64> {
    if r < 0.0 {
        return Err(Error::domain(format!("radius must be non-negative, got {r}")));
    }
    Ok(HydrogenLevel::new(n, l)?.radial(r))
}
