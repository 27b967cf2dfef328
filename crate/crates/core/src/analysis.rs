//! Timescales, packet counting and revival detection.

use serde::Serialize;

use crate::squeezed::QuantumNumbers;
use crate::{Error, Result, AU_TIME_SECONDS};

pub const DEFAULT_PROMINENCE: f64 = 0.05;
/// Positional tolerance of the half-period check, as a fraction of `r_out`.
pub const PERIOD_MATCH_FRACTION: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FractionalRevival {
    pub r: u32,
    /// `t_r = t_rev / r`.
    pub t_r: f64,
    /// `T_r = T_cl / r`.
    pub period: f64,
}

/// All times in atomic units; use [`to_seconds`] for SI.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Timescales {
    pub t_cl: f64,
    pub t_rev: f64,
    pub t_int: f64,
    pub fractional: Vec<FractionalRevival>,
}

pub fn to_seconds(t_au: f64) -> f64 {
    t_au * AU_TIME_SECONDS
}

pub fn to_nanoseconds(t_au: f64) -> f64 {
    t_au * AU_TIME_SECONDS * 1e9
}

impl Timescales {
    pub fn new(q: &QuantumNumbers) -> Self {
        let n = q.nbar as f64;
        let t_cl = 2.0 * std::f64::consts::PI * n * n * n;
        let t_rev = n * t_cl / 3.0;
        let fractional = (2..=6)
            .map(|r| FractionalRevival {
                r,
                t_r: t_rev / r as f64,
                period: t_cl / r as f64,
            })
            .collect();
        Self {
            t_cl,
            t_rev,
            t_int: n * t_cl / (3.0 * q.deltan),
            fractional,
        }
    }
}

pub fn timescales(q: &QuantumNumbers) -> Timescales {
    Timescales::new(q)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PacketReport {
    pub t: f64,
    pub peak_positions: Vec<f64>,
    pub peak_count: usize,
    pub prominence_threshold: f64,
}

/// Local maxima whose topographic prominence exceeds `threshold` times the
/// global maximum.
///
/// The prominence of a peak is its height above the higher of the two minima
/// found walking left and right until a higher sample (or the edge) is met.
pub fn count_packets(samples: &[(f64, f64)], threshold: f64, t: f64) -> Result<PacketReport> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::domain(format!(
            "prominence threshold must lie in (0, 1), got {threshold}"
        )));
    }
    let f: Vec<f64> = samples.iter().map(|s| s.1).collect();
    let global = f.iter().copied().fold(0.0, f64::max);
    let mut peaks = Vec::new();
    if global > 0.0 {
        let cut = threshold * global;
        let n = f.len();
        let mut i = 1;
        while i + 1 < n {
            // a run of equal samples counts as one candidate
            let mut j = i;
            while j + 1 < n && f[j + 1] == f[i] {
                j += 1;
            }
            let h = f[i];
            if j + 1 < n && f[i - 1] < h && f[j + 1] < h {
                let left_min = f[..i]
                    .iter()
                    .rev()
                    .take_while(|&&v| v <= h)
                    .fold(h, |m, &v| m.min(v));
                let right_min = f[j + 1..]
                    .iter()
                    .take_while(|&&v| v <= h)
                    .fold(h, |m, &v| m.min(v));
                if h - left_min.max(right_min) > cut {
                    peaks.push(samples[(i + j) / 2].0);
                }
            }
            i = j + 1;
        }
    }
    Ok(PacketReport {
        t,
        peak_count: peaks.len(),
        peak_positions: peaks,
        prominence_threshold: threshold,
    })
}

/// Maximum of `(t, value)` samples inside `[start, end]`; ties go to the
/// earliest time.
pub fn detect_revival(series: &[(f64, f64)], window: (f64, f64)) -> Result<(f64, f64)> {
    let (start, end) = window;
    series
        .iter()
        .filter(|(t, _)| *t >= start && *t <= end)
        .fold(None, |best: Option<(f64, f64)>, &(t, v)| match best {
            Some((_, bv)) if bv >= v => best,
            _ => Some((t, v)),
        })
        .ok_or_else(|| Error::domain(format!("no samples in window [{start}, {end}]")))
}

/// Whether two density snapshots on the same grid show the same packet
/// configuration: equal peak counts and greedy nearest-position pairing
/// within `PERIOD_MATCH_FRACTION · r_out`.
pub fn fractional_period_check(
    first: &[(f64, f64)],
    second: &[(f64, f64)],
    r_out: f64,
    prominence: f64,
) -> Result<bool> {
    if first.len() != second.len() || first.iter().zip(second).any(|(a, b)| a.0 != b.0) {
        return Err(Error::domain("density snapshots are on different grids"));
    }
    let a = count_packets(first, prominence, 0.0)?.peak_positions;
    let mut b = count_packets(second, prominence, 0.0)?.peak_positions;
    if a.len() != b.len() {
        return Ok(false);
    }
    let tol = PERIOD_MATCH_FRACTION * r_out;
    for p in a {
        let (idx, dist) = b
            .iter()
            .enumerate()
            .map(|(i, q)| (i, (q - p).abs()))
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .expect("equal non-zero lengths");
        if dist > tol {
            return Ok(false);
        }
        b.swap_remove(idx);
    }
    Ok(true)
}

/// Airy length `(r_out² / 2)^(1/3)` of the Coulomb potential at the outer
/// turning point, the width of a single packet's turning-point structure.
pub fn airy_length(r_out: f64) -> f64 {
    (0.5 * r_out * r_out).cbrt()
}

/// Gaussian smoothing of `(r, value)` samples with standard deviation `sigma`.
///
/// Works on non-uniform abscissae (trapezoid weights) and renormalises the
/// kernel near the edges. `sigma == 0` returns the input unchanged.
pub fn coarse_grain(samples: &[(f64, f64)], sigma: f64) -> Result<Vec<(f64, f64)>> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::domain(format!(
            "smoothing width must be finite and >= 0, got {sigma}"
        )));
    }
    if sigma == 0.0 || samples.len() < 2 {
        return Ok(samples.to_vec());
    }
    if samples.windows(2).any(|w| !(w[1].0 > w[0].0)) {
        return Err(Error::domain("sample abscissae must be strictly increasing"));
    }
    let n = samples.len();
    let w: Vec<f64> = (0..n)
        .map(|i| {
            let lo = samples[i.saturating_sub(1)].0;
            let hi = samples[(i + 1).min(n - 1)].0;
            0.5 * (hi - lo)
        })
        .collect();
    let reach = 5.0 * sigma;
    let out = samples
        .iter()
        .map(|&(r, _)| {
            let start = samples.partition_point(|s| s.0 < r - reach);
            let (mut num, mut den) = (0.0, 0.0);
            for (s, wj) in samples[start..].iter().zip(&w[start..]) {
                if s.0 > r + reach {
                    break;
                }
                let k = wj * (-0.5 * ((s.0 - r) / sigma).powi(2)).exp();
                num += k * s.1;
                den += k;
            }
            (r, num / den)
        })
        .collect();
    Ok(out)
}

/// Instant of maximal `|A(t)|` in `[centre - half_width, centre + half_width]`,
/// sampled at `samples` evenly spaced times.
pub fn locate_revival(
    exp: &crate::EigenExpansion,
    centre: f64,
    half_width: f64,
    samples: usize,
) -> Result<(f64, f64)> {
    if samples < 2 || !(half_width > 0.0) {
        return Err(Error::domain(
            "revival search needs >= 2 samples and a positive width",
        ));
    }
    let (a, b) = (centre - half_width, centre + half_width);
    let series: Vec<(f64, f64)> = (0..samples)
        .map(|k| {
            let t = a + (b - a) * k as f64 / (samples - 1) as f64;
            (t, crate::evolution::autocorrelation(exp, t))
        })
        .collect();
    detect_revival(&series, (a, b))
}
