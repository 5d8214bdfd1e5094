//! The recursive E-algorithm for sequence-limit extrapolation, and the GME
//! estimator obtained by accelerating the ratio sequence `S(q)` under the
//! power-law ansatz `g_i(q) = q^{-i}`.

use crate::error::{Error, Result};
use crate::gme::{GmeEstimate, Method};
use crate::moments::{ratio_estimate, MomentSequence};

/// Denominators below this (relative to the operands) stop the recursion.
pub const DEGENERACY_THRESHOLD: f64 = 1e-300;

/// Triangular E-algorithm table for `f(q_start), ..., f(q_start + n - 1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct AccelTable {
    pub q_start: usize,
    pub base: Vec<f64>,
    /// `e_values[k][j] = E_k^{(q_start + j)}`
    pub e_values: Vec<Vec<f64>>,
    /// `g_table[k][i - 1][j] = g_{k,i}^{(q_start + j)}` for `i > k`; entries
    /// with `i <= k` are left empty.
    pub g_table: Vec<Vec<Vec<f64>>>,
    /// Set when a degenerate denominator cut the recursion short; the
    /// deepest level available is then `e_values.len() - 1`.
    pub degenerate_at: Option<usize>,
}

impl AccelTable {
    /// Builds levels `0..=k` of the table.
    ///
    /// `g(i, q)` evaluates the `i`-th scaling function (1-based).
    pub fn build<G: Fn(usize, f64) -> f64>(f: &[f64], q_start: usize, g: G, k: usize) -> Result<Self> {
        if f.len() < k + 1 {
            return Err(Error::InvalidInput(format!(
                "order {k} needs at least {} sequence terms, got {}",
                k + 1,
                f.len()
            )));
        }
        let n = f.len();
        let q_at = |j: usize| (q_start + j) as f64;
        let mut e_values = vec![f.to_vec()];
        let mut g_table = vec![(1..=k)
            .map(|i| (0..n).map(|j| g(i, q_at(j))).collect::<Vec<f64>>())
            .collect::<Vec<_>>()];
        let mut degenerate_at = None;

        'levels: for level in 1..=k {
            let prev_e = &e_values[level - 1];
            let prev_g = &g_table[level - 1];
            let pivot = &prev_g[level - 1];
            let width = n - level;

            let mut denominators = Vec::with_capacity(width);
            for j in 0..width {
                let d = pivot[j + 1] - pivot[j];
                let scale = pivot[j + 1].abs().max(pivot[j].abs());
                if d == 0.0 || d.abs() < DEGENERACY_THRESHOLD * scale {
                    degenerate_at = Some(level);
                    break 'levels;
                }
                denominators.push(d);
            }

            let eliminate = |row: &[f64], j: usize| {
                (row[j] * pivot[j + 1] - row[j + 1] * pivot[j]) / denominators[j]
            };
            let next_e: Vec<f64> = (0..width).map(|j| eliminate(prev_e, j)).collect();
            let next_g: Vec<Vec<f64>> = (1..=k)
                .map(|i| {
                    if i <= level {
                        Vec::new()
                    } else {
                        (0..width).map(|j| eliminate(&prev_g[i - 1], j)).collect()
                    }
                })
                .collect();
            e_values.push(next_e);
            g_table.push(next_g);
        }

        Ok(Self {
            q_start,
            base: f.to_vec(),
            e_values,
            g_table,
            degenerate_at,
        })
    }

    /// `E_k^{(q_start)}` at the deepest level reached.
    pub fn limit(&self) -> f64 {
        self.e_values.last().unwrap()[0]
    }
}

/// Outcome of [`e_algorithm`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Extrapolation {
    pub value: f64,
    /// Level actually reached; smaller than requested after a degenerate
    /// denominator.
    pub level: usize,
    pub degenerate: bool,
}

/// `E_k^{(q_start)}`: the limit of `f` assuming
/// `f(q) = f(inf) [1 + sum_i lambda_i g_i(q)]`.
///
/// On a degenerate denominator, returns `E_{k-1}^{(q_start)}` (or the
/// deepest level reached) with `degenerate` set.
pub fn e_algorithm<G: Fn(usize, f64) -> f64>(f: &[f64], q_start: usize, g: G, k: usize) -> Result<Extrapolation> {
    let table = AccelTable::build(f, q_start, g, k)?;
    Ok(Extrapolation {
        value: table.limit(),
        level: table.e_values.len() - 1,
        degenerate: table.degenerate_at.is_some(),
    })
}

/// `g_i(q) = q^{-i}`.
pub fn inverse_power(i: usize, q: f64) -> f64 {
    q.powi(-(i as i32))
}

/// GME estimate `1 - E_{q_max-2}^{(2)}` from `S(2..=q_max)`, clamped to
/// `[0, 1 - 1/(N+1)]`. At `q_max = 2` there is nothing to accelerate and the
/// ratio estimate is returned with `fallback` set.
pub fn accel_estimate(seq: &MomentSequence) -> Result<GmeEstimate> {
    let q_max = seq.q_max();
    if q_max < 3 {
        let mut est = ratio_estimate(seq);
        est.method = Method::Accel;
        est.fallback = true;
        return Ok(est);
    }
    let ex = e_algorithm(seq.ratios_up_to(q_max), 2, inverse_power, q_max - 2)?;
    let mut est = GmeEstimate::clamped_to_bound(1.0 - ex.value, seq.n_qubits, Method::Accel, Some(q_max));
    est.fallback = ex.degenerate;
    Ok(est)
}
