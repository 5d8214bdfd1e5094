//! Wehrl moments `W^(q) = (1/4pi) ∫ Q^q dΩ` by three independent routes,
//! the ratio sequence `S(q) = W^(q)/W^(q-1)`, and estimators built on them.

use std::ops::RangeInclusive;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gme::{gme_reference, GmeEstimate, Method};
use crate::numeric::{binomial, binomial_row, factorial, CompensatedComplexSum, CompensatedSum};
use crate::permanent::{permanent, permanent_block_tiled};
use crate::quadrature::SphereGrid;
use crate::states::{coherent_qubit, husimi_at_vector, MajoranaConstellation, SymmetricState};

/// Default budget on elementary multiply-adds for [`moments_dicke`].
pub const DEFAULT_TERM_BUDGET: u128 = 1_000_000_000;

/// Largest `N q` accepted by [`moments_permanent`].
pub const MAX_PERMANENT_SIZE: usize = 24;

/// Moments `W^(1..=q_max)` and ratios `S(2..=q_max)` of one state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentSequence {
    pub n_qubits: usize,
    /// `moments[q-1] = W^(q)`
    pub moments: Vec<f64>,
    /// `ratios[q-2] = S(q)`
    pub ratios: Vec<f64>,
}

impl MomentSequence {
    pub fn from_moments(n_qubits: usize, moments: Vec<f64>) -> Result<Self> {
        if moments.len() < 2 {
            return Err(Error::InvalidInput("a moment sequence needs q_max >= 2".into()));
        }
        let ratios = moments.windows(2).map(|w| w[1] / w[0]).collect();
        Ok(Self {
            n_qubits,
            moments,
            ratios,
        })
    }

    pub fn q_max(&self) -> usize {
        self.moments.len()
    }

    /// `W^(q)`, `q >= 1`.
    pub fn moment(&self, q: usize) -> f64 {
        self.moments[q - 1]
    }

    /// `S(q)`, `q >= 2`.
    pub fn ratio(&self, q: usize) -> f64 {
        self.ratios[q - 2]
    }

    /// `S(2..=q_max)`, the input features of the regressor.
    pub fn ratios_up_to(&self, q_max: usize) -> &[f64] {
        &self.ratios[..q_max - 1]
    }

    /// Keeps only `W^(1..=q_max)`.
    pub fn truncated(&self, q_max: usize) -> Result<Self> {
        if q_max < 2 || q_max > self.q_max() {
            return Err(Error::InvalidInput(format!(
                "cannot truncate a q_max={} sequence to {q_max}",
                self.q_max()
            )));
        }
        Self::from_moments(self.n_qubits, self.moments[..q_max].to_vec())
    }

    /// Checks normalization, the `1/(Nq+1)` bound, ratio consistency and the
    /// monotone ratio chain. With a reference GME, also `1 - S(q) >= E_G`.
    pub fn check_invariants(&self, reference_gme: Option<f64>) -> Result<()> {
        let n = self.n_qubits as f64;
        let fail = |msg: String| Err(Error::InvalidInput(msg));
        if self.ratios.len() + 1 != self.moments.len() {
            return fail("ratio count does not match moment count".into());
        }
        if (self.moments[0] - 1.0 / (n + 1.0)).abs() > 1e-12 {
            return fail(format!("W^(1) = {} differs from 1/(N+1)", self.moments[0]));
        }
        for (i, &w) in self.moments.iter().enumerate().skip(1) {
            let q = (i + 1) as f64;
            if !(w > 0.0 && w <= 1.0 / (n * q + 1.0) + 1e-12) {
                return fail(format!("W^({}) = {w} violates the moment bound", i + 1));
            }
        }
        for (i, &s) in self.ratios.iter().enumerate() {
            let expected = self.moments[i + 1] / self.moments[i];
            if (s - expected).abs() > 1e-14 {
                return fail(format!("S({}) inconsistent with stored moments", i + 2));
            }
        }
        for (i, w) in self.ratios.windows(2).enumerate() {
            if w[1] < w[0] - 1e-10 {
                return fail(format!("S({}) < S({})", i + 3, i + 2));
            }
        }
        if let Some(gme) = reference_gme {
            for (i, &s) in self.ratios.iter().enumerate() {
                if 1.0 - s < gme - 1e-9 {
                    return fail(format!("1 - S({}) = {} below E_G = {gme}", i + 2, 1.0 - s));
                }
            }
        }
        Ok(())
    }
}

fn check_q_max(q_max: usize) -> Result<()> {
    if q_max < 2 {
        return Err(Error::InvalidInput(format!("q_max must be >= 2, got {q_max}")));
    }
    Ok(())
}

/// Multiply-adds spent by [`moments_dicke`] for the given size.
pub fn dicke_route_cost(n_qubits: usize, q_max: usize) -> u128 {
    let n = n_qubits as u128;
    (2..=q_max as u128).map(|q| ((q - 1) * n + 1) * (n + 1)).sum()
}

/// Wehrl moments from the Dicke amplitudes.
///
/// `W^(q) = 1/(qN+1) sum_m C(qN,m)^{-1} |c^{*q}_m|^2`, where `c_i =
/// sqrt(C(N,i)) d_i` and `c^{*q}` is its `q`-fold self-convolution: the
/// constrained multi-index sum over `i_1 + ... + i_q = m` is exactly the
/// convolution coefficient at `m`.
pub fn moments_dicke(state: &SymmetricState, q_max: usize) -> Result<MomentSequence> {
    moments_dicke_with_budget(state, q_max, DEFAULT_TERM_BUDGET)
}

pub fn moments_dicke_with_budget(
    state: &SymmetricState,
    q_max: usize,
    budget: u128,
) -> Result<MomentSequence> {
    check_q_max(q_max)?;
    let n = state.n_qubits();
    let required = dicke_route_cost(n, q_max);
    if required > budget {
        return Err(Error::ComplexityLimit { required, budget });
    }
    let base: Vec<Complex64> = state
        .dicke()
        .iter()
        .enumerate()
        .map(|(i, d)| d * binomial(n, i).sqrt())
        .collect();

    let mut moments = Vec::with_capacity(q_max);
    let mut conv = base.clone();
    for q in 1..=q_max {
        if q > 1 {
            conv = convolve(&conv, &base);
        }
        let degree = q * n;
        let row = binomial_row(degree);
        let sum: CompensatedSum = conv
            .iter()
            .zip(&row)
            .map(|(c, b)| c.norm_sqr() / b)
            .collect();
        moments.push(sum.value() / (degree + 1) as f64);
    }
    MomentSequence::from_moments(n, moments)
}

fn convolve(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    (0..a.len() + b.len() - 1)
        .map(|m| {
            let lo = m.saturating_sub(b.len() - 1);
            let hi = m.min(a.len() - 1);
            let mut acc = CompensatedComplexSum::new();
            for i in lo..=hi {
                acc.add(a[i] * b[m - i]);
            }
            acc.value()
        })
        .collect()
}

/// Gram matrix `G_ij = <eps_i|eps_j>` of the constituent qubits.
pub fn gram_matrix(constellation: &MajoranaConstellation) -> DMatrix<Complex64> {
    let spinors: Vec<[Complex64; 2]> = constellation
        .points
        .iter()
        .map(|p| coherent_qubit(*p))
        .collect();
    let n = spinors.len();
    DMatrix::from_fn(n, n, |i, j| {
        spinors[i][0].conj() * spinors[j][0] + spinors[i][1].conj() * spinors[j][1]
    })
}

/// Wehrl moments from the constituent qubits via Gram-matrix permanents:
/// `W^(q) = per(G_q) / per(G)^q * (N!)^q / (Nq+1)!`, with `G_q` the `q x q`
/// block tiling of `G`.
pub fn moments_permanent(constellation: &MajoranaConstellation, q_max: usize) -> Result<MomentSequence> {
    check_q_max(q_max)?;
    let n = constellation.n_qubits();
    if n * q_max > MAX_PERMANENT_SIZE {
        return Err(Error::ComplexityLimit {
            required: (n * q_max) as u128,
            budget: MAX_PERMANENT_SIZE as u128,
        });
    }
    let g = gram_matrix(constellation);
    let norm = permanent(&g).re;
    let n_fact = factorial(n);
    let moments = (1..=q_max)
        .map(|q| {
            let tiled = permanent_block_tiled(&g, q).re;
            tiled / norm.powi(q as i32) * n_fact.powi(q as i32) / factorial(n * q + 1)
        })
        .collect();
    MomentSequence::from_moments(n, moments)
}

/// Wehrl moments by direct spherical quadrature of `Q^q` on a product grid
/// that is exact for polynomial integrands of degree `N q_max`.
pub fn moments_quadrature(state: &SymmetricState, q_max: usize) -> Result<MomentSequence> {
    check_q_max(q_max)?;
    let n = state.n_qubits();
    let grid = SphereGrid::exact_for_degree(n * q_max);
    let mut sums = vec![CompensatedSum::new(); q_max];
    for (node, w) in grid.iter() {
        let q_val = husimi_at_vector(state, *node);
        let mut pow = 1.0;
        for s in sums.iter_mut() {
            pow *= q_val;
            s.add(w * pow);
        }
    }
    MomentSequence::from_moments(n, sums.iter().map(|s| s.value()).collect())
}

/// `1 - S(q_max)`: an upper bound on the GME that converges to it as
/// `q_max` grows.
pub fn ratio_estimate(seq: &MomentSequence) -> GmeEstimate {
    let q_max = seq.q_max();
    GmeEstimate::new(1.0 - seq.ratio(q_max), Method::Ratio, Some(q_max))
}

/// Result of fitting `W^(q) ≈ c ||Q||_inf^q / q`.
#[derive(Clone, Debug, PartialEq)]
pub struct AsymptoticFit {
    /// Least-squares constant `c` over the whole range.
    pub constant: f64,
    /// `(max - min)/mean` of `q W^(q)/||Q||^q` over the range.
    pub spread: f64,
    /// False when the scaled sequence fails to flatten (spread >= 10%), as
    /// happens when the Husimi maximum is degenerate along a curve.
    pub generic: bool,
    pub husimi_max: f64,
    /// `q W^(q) / ||Q||^q` for each `q` in the range.
    pub scaled: Vec<f64>,
}

/// Fits the large-`q` constant of the Wehrl moments, taking `||Q||_inf` from
/// the reference GME solver.
pub fn asymptotic_constant(state: &SymmetricState, q_range: RangeInclusive<usize>) -> Result<AsymptoticFit> {
    let husimi_max = 1.0 - gme_reference(state).value;
    asymptotic_constant_with_max(state, q_range, husimi_max)
}

pub fn asymptotic_constant_with_max(
    state: &SymmetricState,
    q_range: RangeInclusive<usize>,
    husimi_max: f64,
) -> Result<AsymptoticFit> {
    let (lo, hi) = (*q_range.start(), *q_range.end());
    if lo < 1 || hi < lo + 1 {
        return Err(Error::InvalidInput(format!("bad q range {lo}..={hi}")));
    }
    let seq = moments_dicke(state, hi.max(2))?;
    let scaled: Vec<f64> = (lo..=hi)
        .map(|q| q as f64 * seq.moment(q) / husimi_max.powi(q as i32))
        .collect();
    let constant = scaled.iter().sum::<f64>() / scaled.len() as f64;
    let max = scaled.iter().copied().fold(f64::MIN, f64::max);
    let min = scaled.iter().copied().fold(f64::MAX, f64::min);
    let spread = (max - min) / constant;
    Ok(AsymptoticFit {
        constant,
        spread,
        generic: spread < 0.1,
        husimi_max,
        scaled,
    })
}
