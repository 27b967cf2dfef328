//! Radial squeezed states `ψ(r) = N r^α e^{−γ₀ r} e^{−iγ₁ r}`.
//!
//! Every expectation value needed here reduces to moments of the gamma
//! distribution `r^{2α+2} e^{−2γ₀ r}`, so the whole module is closed form.
//! These states saturate `ΔR ΔP ≥ ½⟨r⁻²⟩` for `R = 1/r − ½`, `P = p_r`.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::specfun::{hydrogen_energy, log_gamma};
use crate::spectral::RadialWavefunction;
use crate::{Error, Result};

/// Central principal quantum number, angular momentum (always 1) and the
/// spread `δn` that enters the self-interference time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantumNumbers {
    pub nbar: u32,
    pub l: u32,
    pub deltan: f64,
}

impl QuantumNumbers {
    pub fn new(nbar: u32) -> Result<Self> {
        Self::with_spread(nbar, 1.0)
    }

    pub fn with_spread(nbar: u32, deltan: f64) -> Result<Self> {
        if nbar < 2 {
            return Err(Error::domain(format!("nbar must be >= 2, got {nbar}")));
        }
        if !(deltan > 0.0) {
            return Err(Error::domain(format!("deltan must be positive, got {deltan}")));
        }
        Ok(Self { nbar, l: 1, deltan })
    }

    pub fn energy(&self) -> f64 {
        hydrogen_energy(self.nbar).expect("nbar >= 2")
    }
}

/// Which centrifugal term the energy functional uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum PotentialMode {
    /// `V_eff = (1 − 2r)/(2r²)` taken literally, i.e. a `1/(2r²)` barrier.
    #[serde(alias = "paper")]
    #[value(alias = "paper")]
    Literal,
    /// `l(l+1)/(2r²) − 1/r` with `l = 1`. This is the barrier consistent
    /// with the `l = 1` eigenbasis, and the one whose fit at `n̄ = 85` gives
    /// α = 168.225, γ₀ = 0.0117465.
    #[default]
    Centrifugal,
}

impl PotentialMode {
    fn barrier(self) -> f64 {
        match self {
            PotentialMode::Literal => 0.5,
            PotentialMode::Centrifugal => 1.0,
        }
    }
}

impl fmt::Display for PotentialMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PotentialMode::Literal => "literal",
            PotentialMode::Centrifugal => "centrifugal",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialSqueezedState {
    pub alpha: f64,
    pub gamma0: f64,
    pub gamma1: f64,
    /// `ln N`.
    pub log_norm: f64,
}

/// `(ΔR, ΔP, ½⟨r⁻²⟩)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RpUncertainty {
    pub d_r: f64,
    pub d_p: f64,
    pub bound: f64,
}

impl RadialSqueezedState {
    pub fn new(alpha: f64, gamma0: f64, gamma1: f64) -> Result<Self> {
        if !(2.0 * alpha + 3.0 > 0.0) || !(gamma0 > 0.0) || !gamma1.is_finite() {
            return Err(Error::domain(format!(
                "unnormalizable state (alpha={alpha}, gamma0={gamma0}, gamma1={gamma1})"
            )));
        }
        let a = 2.0 * alpha + 3.0;
        let log_norm = 0.5 * (a * (2.0 * gamma0).ln() - log_gamma(a)?);
        Ok(Self {
            alpha,
            gamma0,
            gamma1,
            log_norm,
        })
    }

    /// `ψ(r)`.
    pub fn value(&self, r: f64) -> Complex64 {
        if r == 0.0 {
            return if self.alpha > 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(f64::INFINITY, 0.0)
            };
        }
        let m = (self.log_norm + self.alpha * r.ln() - self.gamma0 * r).exp();
        Complex64::from_polar(m, -self.gamma1 * r)
    }

    /// `⟨r^k⟩ = Γ(a+k+1) / (b^k Γ(a+1))`, `a = 2α+2`, `b = 2γ₀`.
    pub fn moment_r(&self, k: f64) -> Result<f64> {
        let a = 2.0 * self.alpha + 2.0;
        if !(k > -(a + 1.0)) {
            return Err(Error::domain(format!(
                "<r^{k}> diverges for alpha={} (needs k > {})",
                self.alpha,
                -(a + 1.0)
            )));
        }
        let b = 2.0 * self.gamma0;
        if k == k.trunc() && k.abs() <= 64.0 {
            // rising/falling factorial: exact up to rounding
            let k = k as i32;
            let mut ratio = 1.0;
            if k > 0 {
                for j in 1..=k {
                    ratio *= (a + j as f64) / b;
                }
            } else {
                for j in 0..-k {
                    ratio *= b / (a - j as f64);
                }
            }
            return Ok(ratio);
        }
        Ok((log_gamma(a + k + 1.0)? - log_gamma(a + 1.0)? - k * b.ln()).exp())
    }

    /// `⟨p_r⟩ = −γ₁`.
    pub fn expectation_pr(&self) -> f64 {
        -self.gamma1
    }

    /// `⟨p_r²⟩ = γ₁² + γ₀²/(2α+1)`.
    pub fn expectation_pr2(&self) -> f64 {
        self.gamma1 * self.gamma1 + self.gamma0 * self.gamma0 / (2.0 * self.alpha + 1.0)
    }

    /// `⟨H⟩ = ½⟨p_r²⟩ + c⟨r⁻²⟩ − ⟨r⁻¹⟩` with `c` set by the potential mode.
    pub fn expectation_h(&self, mode: PotentialMode) -> Result<f64> {
        Ok(0.5 * self.expectation_pr2() + mode.barrier() * self.moment_r(-2.0)? - self.moment_r(-1.0)?)
    }

    /// `(Δr, Δp_r)`; both independent of `γ₁`.
    pub fn uncertainties_rp(&self) -> (f64, f64) {
        let dr = (2.0 * self.alpha + 3.0).sqrt() / (2.0 * self.gamma0);
        let dp = self.gamma0 / (2.0 * self.alpha + 1.0).sqrt();
        (dr, dp)
    }

    /// Uncertainties in `R = 1/r − ½` and `P = p_r`, and the lower bound
    /// `½⟨r⁻²⟩` they saturate.
    pub fn uncertainties_big_rp(&self) -> Result<RpUncertainty> {
        let d_r = self.gamma0 / ((self.alpha + 1.0) * (2.0 * self.alpha + 1.0).sqrt());
        let (_, d_p) = self.uncertainties_rp();
        Ok(RpUncertainty {
            d_r,
            d_p,
            bound: 0.5 * self.moment_r(-2.0)?,
        })
    }
}

impl RadialWavefunction for RadialSqueezedState {
    fn log_polar(&self, r: f64) -> (f64, Complex64) {
        if r == 0.0 {
            return (f64::NEG_INFINITY, Complex64::new(1.0, 0.0));
        }
        (
            self.log_norm + self.alpha * r.ln() - self.gamma0 * r,
            Complex64::from_polar(1.0, -self.gamma1 * r),
        )
    }

    fn support_max(&self) -> f64 {
        let (dr, _) = self.uncertainties_rp();
        let mean = (2.0 * self.alpha + 3.0) / (2.0 * self.gamma0);
        mean + 60.0 * dr
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitGeometry {
    pub r_out: f64,
    pub eccentricity: f64,
    pub r1: f64,
}

impl OrbitGeometry {
    pub fn new(nbar: u32) -> Result<Self> {
        if nbar < 2 {
            return Err(Error::domain(format!("nbar must be >= 2, got {nbar}")));
        }
        let n = nbar as f64;
        let eccentricity = (1.0 - 1.0 / (n * n)).sqrt();
        Ok(Self {
            r_out: n * n + n * (n * n - 2.0).sqrt(),
            eccentricity,
            r1: n * n * (1.0 + eccentricity),
        })
    }
}

pub fn orbit_geometry(q: &QuantumNumbers) -> Result<OrbitGeometry> {
    OrbitGeometry::new(q.nbar)
}

/// Result of matching a squeezed state to `⟨p_r⟩ = 0`, `⟨r⟩ = r_out`,
/// `⟨H⟩ = E_n̄`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitReport {
    pub state: RadialSqueezedState,
    pub mode: PotentialMode,
    pub r_out: f64,
    pub target_energy: f64,
    pub r_residual: f64,
    pub energy_residual: f64,
    pub bracket: (f64, f64),
    pub iterations: u32,
}

const ALPHA_SCAN_POINTS: usize = 400;
const ALPHA_TOL: f64 = 1e-12;

/// Solves for `(α, γ₀)` with `γ₁ = 0`.
///
/// `⟨r⟩ = (2α+3)/(2γ₀)` eliminates `γ₀`; the energy residual is then a
/// scalar function of `α`, bracketed by a geometric sign scan and bisected.
pub fn fit_parameters(q: &QuantumNumbers, mode: PotentialMode) -> Result<FitReport> {
    if q.nbar < 2 {
        return Err(Error::domain(format!("nbar must be >= 2, got {}", q.nbar)));
    }
    if q.l != 1 {
        return Err(Error::domain(format!("only l = 1 is supported, got {}", q.l)));
    }
    let r_out = OrbitGeometry::new(q.nbar)?.r_out;
    let target = q.energy();
    let gamma0_of = |alpha: f64| (2.0 * alpha + 3.0) / (2.0 * r_out);
    let residual = |alpha: f64| -> Result<f64> {
        let s = RadialSqueezedState::new(alpha, gamma0_of(alpha), 0.0)?;
        Ok(s.expectation_h(mode)? - target)
    };

    let lo = q.l as f64 + 0.5;
    let nb = q.nbar as f64;
    let hi = 10.0 * nb * nb;
    let ratio = (hi / lo).powf(1.0 / ALPHA_SCAN_POINTS as f64);
    let mut bracket = None;
    let mut a0 = lo;
    let mut f0 = residual(a0)?;
    for _ in 0..ALPHA_SCAN_POINTS {
        let a1 = (a0 * ratio).min(hi);
        let f1 = residual(a1)?;
        if f0 == 0.0 {
            bracket = Some((a0, a0, f0));
            break;
        }
        if f0.signum() != f1.signum() {
            bracket = Some((a0, a1, f0));
            break;
        }
        a0 = a1;
        f0 = f1;
    }
    let Some((mut a, mut b, mut fa)) = bracket else {
        return Err(Error::Fit {
            reason: "energy residual does not change sign".into(),
            lo,
            hi,
        });
    };
    let found = (a, b);
    let mut iterations = 0;
    while (b - a) > ALPHA_TOL * b.abs().max(1.0) && iterations < 200 {
        let m = 0.5 * (a + b);
        let fm = residual(m)?;
        if fm == 0.0 {
            a = m;
            b = m;
            break;
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
        iterations += 1;
    }
    let alpha = 0.5 * (a + b);
    let state = RadialSqueezedState::new(alpha, gamma0_of(alpha), 0.0)?;
    let r_mean = state.moment_r(1.0)?;
    let energy = state.expectation_h(mode)?;
    Ok(FitReport {
        state,
        mode,
        r_out,
        target_energy: target,
        r_residual: (r_mean - r_out) / r_out,
        energy_residual: (energy - target) / target.abs(),
        bracket: found,
        iterations,
    })
}
