//! Radial grids carrying quadrature weights.
//!
//! Two families are provided. Uniform grids (trapezoid weights) are what the
//! density files are written on. Gauss–Legendre panel grids are laid out
//! uniformly in `s = √r` and mapped back to `r`, which packs nodes near the
//! nucleus where Coulomb eigenfunctions oscillate fastest; in `s` the local
//! wavelength of a bound state is roughly constant.

use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Nodes per Gauss–Legendre panel.
pub const PANEL_ORDER: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridKind {
    Uniform,
    Gauss,
    Custom,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    points: Vec<f64>,
    weights: Vec<f64>,
    kind: GridKind,
}

impl RadialGrid {
    /// `n` equally spaced points on `[0, r_max]` with trapezoid weights.
    pub fn uniform(n: usize, r_max: f64) -> Result<Self> {
        if n < 2 || !(r_max > 0.0) {
            return Err(Error::domain(format!(
                "uniform grid needs n >= 2 and r_max > 0 (got n={n}, r_max={r_max})"
            )));
        }
        let h = r_max / (n - 1) as f64;
        let points: Vec<f64> = (0..n).map(|i| i as f64 * h).collect();
        let mut weights = vec![h; n];
        weights[0] = 0.5 * h;
        weights[n - 1] = 0.5 * h;
        Ok(Self {
            points,
            weights,
            kind: GridKind::Uniform,
        })
    }

    /// At least `min_nodes` Gauss–Legendre nodes on `[0, r_max]`, in panels
    /// of equal width in `√r`.
    pub fn gauss_panels(min_nodes: usize, r_max: f64) -> Result<Self> {
        if min_nodes == 0 || !(r_max > 0.0) {
            return Err(Error::domain(format!(
                "gauss grid needs nodes > 0 and r_max > 0 (got {min_nodes}, {r_max})"
            )));
        }
        let panels = min_nodes.div_ceil(PANEL_ORDER);
        let rule = GaussLegendre::new(NonZeroUsize::new(PANEL_ORDER).unwrap());
        let mut pairs: Vec<(f64, f64)> = rule.as_node_weight_pairs().to_vec();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));

        let s_max = r_max.sqrt();
        let ds = s_max / panels as f64;
        let mut points = Vec::with_capacity(panels * PANEL_ORDER);
        let mut weights = Vec::with_capacity(panels * PANEL_ORDER);
        for p in 0..panels {
            let mid = (p as f64 + 0.5) * ds;
            for &(x, w) in &pairs {
                let s = mid + 0.5 * ds * x;
                points.push(s * s);
                // dr = 2 s ds
                weights.push(0.5 * ds * w * 2.0 * s);
            }
        }
        Ok(Self {
            points,
            weights,
            kind: GridKind::Gauss,
        })
    }

    /// Arbitrary strictly increasing points with trapezoid weights.
    pub fn from_points(points: Vec<f64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::domain("custom grid needs at least two points"));
        }
        if points[0] < 0.0 || points.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::domain(
                "grid points must be non-negative and strictly increasing",
            ));
        }
        let n = points.len();
        let mut weights = vec![0.0; n];
        for i in 0..n - 1 {
            let h = points[i + 1] - points[i];
            weights[i] += 0.5 * h;
            weights[i + 1] += 0.5 * h;
        }
        Ok(Self {
            points,
            weights,
            kind: GridKind::Custom,
        })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn r_max(&self) -> f64 {
        *self.points.last().unwrap()
    }

    /// Weighted sum of samples taken at the grid points.
    pub fn integrate(&self, samples: &[f64]) -> f64 {
        debug_assert_eq!(samples.len(), self.points.len());
        self.weights.iter().zip(samples).map(|(w, f)| w * f).sum()
    }

    /// Integrates a function evaluated at each grid point.
    pub fn integrate_fn(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(&r, &w)| w * f(r))
            .sum()
    }
}
