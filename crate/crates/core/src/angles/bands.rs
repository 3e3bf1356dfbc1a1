//! Band decomposition with chapeau (triangular hat) functions.
//!
//! The low band is spanned by hats with knot spacing three wave periods.
//! The wave band is spanned by a cosine and sine carrier at the wave period,
//! each modulated by hats one period apart. Both bands are fitted jointly by
//! least squares and the high band is the remainder, so the three pieces
//! always sum back to the input.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandSplit {
    pub low: Vec<f64>,
    pub wave: Vec<f64>,
    pub high: Vec<f64>,
    /// The record was too short for a wave band; only low and high were formed.
    pub degraded: bool,
}

/// Hat functions with knots evenly spread over [t0, t_end] no further apart
/// than `spacing`.
pub fn hat_basis(t: &[f64], spacing: f64) -> DMatrix<f64> {
    let (t0, t1) = (t[0], t[t.len() - 1]);
    let n = (((t1 - t0) / spacing).ceil() as usize + 1).max(2);
    let h = (t1 - t0) / (n - 1) as f64;
    DMatrix::from_fn(t.len(), n, |i, j| {
        let knot = t0 + j as f64 * h;
        (1.0 - (t[i] - knot).abs() / h).max(0.0)
    })
}

/// Precomputed least-squares projector for one time grid and period.
#[derive(Debug, Clone)]
pub struct BandProjector {
    basis: DMatrix<f64>,
    pinv: DMatrix<f64>,
    n_low: usize,
    degraded: bool,
}

impl BandProjector {
    /// `envelope` is the knot spacing of the carrier envelope in periods.
    pub fn new(t: &[f64], period: f64, envelope: f64) -> Self {
        let duration = t[t.len() - 1] - t[0];
        let low = hat_basis(t, 3.0 * period);
        let n_low = low.ncols();
        let degraded = duration < 3.0 * period;
        let basis = if degraded {
            low
        } else {
            let env = hat_basis(t, envelope * period);
            let w = 2.0 * std::f64::consts::PI / period;
            let ne = env.ncols();
            DMatrix::from_fn(t.len(), n_low + 2 * ne, |i, j| {
                if j < n_low {
                    low[(i, j)]
                } else if j < n_low + ne {
                    env[(i, j - n_low)] * (w * t[i]).cos()
                } else {
                    env[(i, j - n_low - ne)] * (w * t[i]).sin()
                }
            })
        };
        let pinv = basis.clone().pseudo_inverse(1e-12).expect("pseudo-inverse");
        Self { basis, pinv, n_low, degraded }
    }

    pub fn split(&self, x: &[f64]) -> BandSplit {
        let c = &self.pinv * DVector::from_column_slice(x);
        let nl = self.n_low;
        let low = self.basis.columns(0, nl) * c.rows(0, nl);
        let wave: Vec<f64> = if self.degraded {
            vec![0.0; x.len()]
        } else {
            let nw = self.basis.ncols() - nl;
            (self.basis.columns(nl, nw) * c.rows(nl, nw)).iter().copied().collect()
        };
        let low: Vec<f64> = low.iter().copied().collect();
        let high = x.iter().zip(&low).zip(&wave).map(|((x, l), w)| x - l - w).collect();
        BandSplit { low, wave, high, degraded: self.degraded }
    }

    /// Wave band alone.
    pub fn wave(&self, x: &[f64]) -> Vec<f64> {
        self.split(x).wave
    }

    pub fn is_degraded(&self) -> bool {
        self.degraded
    }
}

/// Split a uniformly sampled series into low, wave and high bands.
pub fn chapeau_band_split(t: &[f64], series: &[f64], period: f64) -> BandSplit {
    BandProjector::new(t, period, 1.0).split(series)
}
