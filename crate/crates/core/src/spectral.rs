//! Projection of radial wavefunctions onto hydrogen `l = 1` bound states.
//!
//! The continuum is not represented. Whatever the bound-state window misses
//! (continuum plus out-of-window levels) is reported as the completeness
//! deficit `1 − Σ|c_n|²`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Read, Write};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::grid::RadialGrid;
use crate::specfun::HydrogenLevel;
use crate::{Error, Result};

pub const ANGULAR_MOMENTUM: u32 = 1;
pub const DEFAULT_DEFICIT_TOL: f64 = 1e-4;
pub const N_CAP: u32 = 400;
/// Nodes of the reference projection quadrature.
pub const REFERENCE_NODES: usize = 4000;
/// Largest tolerated difference between the reference quadrature and a rule
/// with half as many nodes.
pub const PROJECTION_TOL: f64 = 1e-9;

/// A radial function that can be evaluated in log-polar form, so that
/// products with eigenfunctions can be formed without overflow.
pub trait RadialWavefunction: Sync {
    /// `(ln|ψ(r)|, ψ(r)/|ψ(r)|)`.
    fn log_polar(&self, r: f64) -> (f64, Complex64);

    /// Radius beyond which `ψ` is negligible.
    fn support_max(&self) -> f64;
}

impl RadialWavefunction for HydrogenLevel {
    fn log_polar(&self, r: f64) -> (f64, Complex64) {
        let (la, sign) = self.log_abs(r);
        (la, Complex64::new(if sign == 0.0 { 1.0 } else { sign }, 0.0))
    }

    fn support_max(&self) -> f64 {
        let n = self.n as f64;
        4.0 * n * n + 100.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenExpansion {
    pub l: u32,
    pub n_min: u32,
    pub n_max: u32,
    /// `c_n` for `n = n_min..=n_max`.
    pub coeffs: Vec<Complex64>,
    pub deficit: f64,
}

impl EigenExpansion {
    /// Builds an expansion, computing the deficit from the coefficients.
    pub fn new(n_min: u32, coeffs: Vec<Complex64>) -> Result<Self> {
        if n_min < ANGULAR_MOMENTUM + 1 {
            return Err(Error::domain(format!("n_min must be >= 2, got {n_min}")));
        }
        let weight: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
        if !(weight < 1.0 + 1e-9) {
            return Err(Error::Numerical(format!("expansion weight {weight} exceeds 1")));
        }
        let n_max = n_min + coeffs.len() as u32 - 1;
        Ok(Self {
            l: ANGULAR_MOMENTUM,
            n_min,
            n_max,
            coeffs,
            deficit: (1.0 - weight).max(0.0),
        })
    }

    /// The stationary state `R_{n1}` as a one-term expansion.
    pub fn eigenstate(n: u32) -> Result<Self> {
        Self::new(n, vec![Complex64::new(1.0, 0.0)])
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `(n, c_n)` pairs.
    pub fn iter(&self) -> impl Iterator<Item = (u32, Complex64)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| (self.n_min + i as u32, c))
    }

    pub fn levels(&self) -> Vec<HydrogenLevel> {
        self.iter()
            .map(|(n, _)| HydrogenLevel::new(n, self.l).expect("window starts above l"))
            .collect()
    }

    /// `Σ|c_n|²`.
    pub fn weight(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// `Σ|c_n|² E_n` (not divided by the weight).
    pub fn energy_sum(&self) -> f64 {
        self.iter()
            .map(|(n, c)| c.norm_sqr() * crate::specfun::hydrogen_energy(n).unwrap())
            .sum()
    }

    /// Weighted mean of `n` and the RMS width of the `|c_n|²` distribution.
    pub fn n_spread(&self) -> (f64, f64) {
        let w = self.weight();
        if w == 0.0 {
            return (0.0, 0.0);
        }
        let mean = self.iter().map(|(n, c)| n as f64 * c.norm_sqr()).sum::<f64>() / w;
        let var = self
            .iter()
            .map(|(n, c)| (n as f64 - mean).powi(2) * c.norm_sqr())
            .sum::<f64>()
            / w;
        (mean, var.sqrt())
    }

    /// `n` carrying the largest `|c_n|²`.
    pub fn dominant_n(&self) -> Option<u32> {
        self.iter()
            .max_by(|a, b| a.1.norm_sqr().total_cmp(&b.1.norm_sqr()))
            .map(|(n, _)| n)
    }

    /// `Σ c_n R_{n1}(r)`.
    pub fn reconstruct(&self, r: f64) -> Complex64 {
        self.iter()
            .zip(self.levels())
            .map(|((_, c), lvl)| c * lvl.radial(r))
            .sum()
    }

    /// Writes the expansion as `#`-prefixed header lines followed by
    /// `n,re,im` records.
    pub fn write_to<W: Write>(&self, mut w: W, extra: &[(&str, String)]) -> std::io::Result<()> {
        let mut head = String::new();
        let _ = writeln!(head, "# l={}", self.l);
        let _ = writeln!(head, "# n_min={}", self.n_min);
        let _ = writeln!(head, "# n_max={}", self.n_max);
        let _ = writeln!(head, "# deficit={:.16e}", self.deficit);
        for (k, v) in extra {
            let _ = writeln!(head, "# {k}={v}");
        }
        w.write_all(head.as_bytes())?;
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["n", "re", "im"])?;
        for (n, c) in self.iter() {
            out.write_record([n.to_string(), format!("{:.16e}", c.re), format!("{:.16e}", c.im)])?;
        }
        out.flush()
    }

    /// Inverse of [`EigenExpansion::write_to`]; also returns unrecognised
    /// header keys.
    pub fn read_from<R: Read>(r: R) -> Result<(Self, BTreeMap<String, String>)> {
        let mut header = BTreeMap::new();
        let mut body = String::new();
        for line in BufReader::new(r).lines() {
            let line = line.map_err(|e| Error::Parse(e.to_string()))?;
            if let Some(kv) = line.strip_prefix('#') {
                if let Some((k, v)) = kv.trim().split_once('=') {
                    header.insert(k.trim().to_string(), v.trim().to_string());
                }
            } else {
                body.push_str(&line);
                body.push('\n');
            }
        }
        let get = |k: &str| -> Result<String> {
            header
                .get(k)
                .cloned()
                .ok_or_else(|| Error::Parse(format!("missing header `{k}`")))
        };
        let parse_err = |k: &str, e: &dyn std::fmt::Display| Error::Parse(format!("{k}: {e}"));
        let l: u32 = get("l")?.parse().map_err(|e| parse_err("l", &e))?;
        let n_min: u32 = get("n_min")?.parse().map_err(|e| parse_err("n_min", &e))?;
        let n_max: u32 = get("n_max")?.parse().map_err(|e| parse_err("n_max", &e))?;
        let deficit: f64 = get("deficit")?.parse().map_err(|e| parse_err("deficit", &e))?;
        if l != ANGULAR_MOMENTUM {
            return Err(Error::Parse(format!("unsupported l={l}")));
        }
        let mut coeffs = Vec::new();
        let mut rdr = csv::Reader::from_reader(body.as_bytes());
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
            let field = |j: usize| rec.get(j).ok_or_else(|| Error::Parse("short record".into()));
            let n: u32 = field(0)?.trim().parse().map_err(|e| parse_err("n", &e))?;
            if n != n_min + i as u32 {
                return Err(Error::Parse(format!(
                    "record {i}: expected n={}, found {n}",
                    n_min + i as u32
                )));
            }
            let re: f64 = field(1)?.trim().parse().map_err(|e| parse_err("re", &e))?;
            let im: f64 = field(2)?.trim().parse().map_err(|e| parse_err("im", &e))?;
            coeffs.push(Complex64::new(re, im));
        }
        if (coeffs.len() as u32) != (n_max + 1).saturating_sub(n_min) {
            return Err(Error::Parse(
                "record count does not match the header window".into(),
            ));
        }
        for k in ["l", "n_min", "n_max", "deficit"] {
            header.remove(k);
        }
        Ok((
            Self {
                l,
                n_min,
                n_max,
                coeffs,
                deficit,
            },
            header,
        ))
    }
}

/// Log-space overlap `∫ R_{n1}(r) ψ(r) r² dr` on a given grid.
fn overlap(psi: &dyn RadialWavefunction, level: &HydrogenLevel, grid: &RadialGrid) -> Complex64 {
    grid.points()
        .iter()
        .zip(grid.weights())
        .filter(|(&r, _)| r > 0.0)
        .map(|(&r, &w)| {
            let (lp, phase) = psi.log_polar(r);
            let (lr, sign) = level.log_abs(r);
            let e = lp + lr + 2.0 * r.ln();
            if e < -745.0 {
                return Complex64::new(0.0, 0.0);
            }
            phase * (sign * w * e.exp())
        })
        .sum()
}

/// Quadrature pair used for projections.
pub struct ProjectionQuadrature {
    fine: RadialGrid,
    coarse: RadialGrid,
}

impl ProjectionQuadrature {
    pub fn new(r_max: f64) -> Result<Self> {
        Ok(Self {
            fine: RadialGrid::gauss_panels(REFERENCE_NODES, r_max)?,
            coarse: RadialGrid::gauss_panels(REFERENCE_NODES / 2, r_max)?,
        })
    }

    pub fn for_state(psi: &dyn RadialWavefunction) -> Result<Self> {
        Self::new(psi.support_max())
    }

    pub fn project(&self, psi: &dyn RadialWavefunction, n: u32) -> Result<Complex64> {
        let level = HydrogenLevel::new(n, ANGULAR_MOMENTUM)?;
        let fine = overlap(psi, &level, &self.fine);
        let coarse = overlap(psi, &level, &self.coarse);
        let err = (fine - coarse).norm();
        if !(err <= PROJECTION_TOL) {
            return Err(Error::Numerical(format!(
                "projection onto n={n} did not converge (estimated error {err:.3e})"
            )));
        }
        Ok(fine)
    }
}

/// `c_n = ∫ R_{n1}(r) ψ(r) r² dr`.
pub fn project_coefficient(psi: &dyn RadialWavefunction, n: u32) -> Result<Complex64> {
    if n < ANGULAR_MOMENTUM + 1 {
        return Err(Error::domain(format!("n must be >= 2, got {n}")));
    }
    ProjectionQuadrature::for_state(psi)?.project(psi, n)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Window {
    Fixed {
        n_min: u32,
        n_max: u32,
    },
    /// Grow symmetrically about `center` until the deficit drops below `tol`
    /// or the window reaches `[2, N_CAP]`.
    Auto {
        center: u32,
        tol: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub expansion: EigenExpansion,
    /// False when an automatic window hit the cap before reaching the
    /// requested deficit tolerance.
    pub converged: bool,
}

fn project_range(
    psi: &dyn RadialWavefunction,
    quad: &ProjectionQuadrature,
    ns: impl IntoParallelIterator<Item = u32>,
) -> Result<Vec<(u32, Complex64)>> {
    ns.into_par_iter()
        .map(|n| Ok((n, quad.project(psi, n)?)))
        .collect()
}

pub fn decompose(psi: &dyn RadialWavefunction, window: Window) -> Result<Decomposition> {
    let quad = ProjectionQuadrature::for_state(psi)?;
    match window {
        Window::Fixed { n_min, n_max } => {
            if n_min < ANGULAR_MOMENTUM + 1 || n_max > N_CAP {
                return Err(Error::domain(format!(
                    "window [{n_min}, {n_max}] outside [2, {N_CAP}]"
                )));
            }
            let coeffs = if n_max < n_min {
                Vec::new()
            } else {
                project_range(psi, &quad, n_min..=n_max)?
                    .into_iter()
                    .map(|(_, c)| c)
                    .collect()
            };
            let expansion = if coeffs.is_empty() {
                EigenExpansion {
                    l: ANGULAR_MOMENTUM,
                    n_min,
                    n_max,
                    coeffs,
                    deficit: 1.0,
                }
            } else {
                EigenExpansion::new(n_min, coeffs)?
            };
            Ok(Decomposition {
                expansion,
                converged: true,
            })
        }
        Window::Auto { center, tol } => {
            if !(tol > 0.0) {
                return Err(Error::domain(format!(
                    "deficit tolerance must be positive, got {tol}"
                )));
            }
            let center = center.clamp(ANGULAR_MOMENTUM + 1, N_CAP);
            const STEP: u32 = 4;
            let mut lo = center.saturating_sub(STEP).max(ANGULAR_MOMENTUM + 1);
            let mut hi = (center + STEP).min(N_CAP);
            let mut known: BTreeMap<u32, Complex64> =
                project_range(psi, &quad, lo..=hi)?.into_iter().collect();
            loop {
                let weight: f64 = known.values().map(|c| c.norm_sqr()).sum();
                let deficit = 1.0 - weight;
                let at_cap = lo == ANGULAR_MOMENTUM + 1 && hi == N_CAP;
                if deficit < tol || at_cap {
                    let coeffs = known.values().copied().collect();
                    return Ok(Decomposition {
                        expansion: EigenExpansion::new(lo, coeffs)?,
                        converged: deficit < tol,
                    });
                }
                let new_lo = lo.saturating_sub(STEP).max(ANGULAR_MOMENTUM + 1);
                let new_hi = (hi + STEP).min(N_CAP);
                let fresh: Vec<u32> = (new_lo..lo).chain(hi + 1..=new_hi).collect();
                known.extend(project_range(psi, &quad, fresh)?);
                lo = new_lo;
                hi = new_hi;
            }
        }
    }
}
