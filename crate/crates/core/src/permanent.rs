//! Matrix permanents.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::numeric::{binomial, CompensatedComplexSum};

/// Permanent by Ryser's inclusion-exclusion formula, visiting column subsets
/// in Gray-code order so each step updates the row sums by one column.
/// Cost is `O(2^n n)`.
pub fn permanent(m: &DMatrix<Complex64>) -> Complex64 {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "permanent of a non-square matrix");
    if n == 0 {
        return Complex64::new(1.0, 0.0);
    }
    assert!(n < 64, "Ryser enumeration limited to n < 64");

    let mut row_sums = vec![Complex64::new(0.0, 0.0); n];
    let mut total = CompensatedComplexSum::new();
    let mut gray: u64 = 0;
    for step in 1u64..(1u64 << n) {
        let col = step.trailing_zeros() as usize;
        let bit = 1u64 << col;
        gray ^= bit;
        if gray & bit != 0 {
            for (i, s) in row_sums.iter_mut().enumerate() {
                *s += m[(i, col)];
            }
        } else {
            for (i, s) in row_sums.iter_mut().enumerate() {
                *s -= m[(i, col)];
            }
        }
        let prod: Complex64 = row_sums.iter().product();
        // sign (-1)^{n - |S|}
        if (n - gray.count_ones() as usize) % 2 == 0 {
            total.add(prod);
        } else {
            total.add(-prod);
        }
    }
    total.value()
}

/// Permanent of the `q x q` block tiling of `g` (an `nq x nq` matrix whose
/// blocks all equal `g`).
///
/// Evaluates Glynn's formula with the sign vectors grouped by row block:
/// a row of `g` repeated `q` times contributes `q - 2t` with weight
/// `C(q,t) (-1)^t`, and each of the `q` equal columns contributes the same
/// factor, so only `(q+1)^n` terms remain. The grouped terms are also far
/// better conditioned than a plain Ryser sum over the tiled matrix.
pub fn permanent_block_tiled(g: &DMatrix<Complex64>, q: usize) -> Complex64 {
    let n = g.nrows();
    assert_eq!(n, g.ncols(), "permanent of a non-square matrix");
    if n == 0 || q == 0 {
        return Complex64::new(1.0, 0.0);
    }
    let weights: Vec<f64> = (0..=q)
        .map(|t| if t % 2 == 0 { binomial(q, t) } else { -binomial(q, t) })
        .collect();

    // t = (0, ..., 0): every row enters with coefficient q.
    let mut t = vec![0usize; n];
    let mut col_sums: Vec<Complex64> = (0..n)
        .map(|j| (0..n).map(|i| g[(i, j)]).sum::<Complex64>() * q as f64)
        .collect();
    let mut total = CompensatedComplexSum::new();
    loop {
        let weight: f64 = t.iter().map(|&ti| weights[ti]).product();
        let prod: Complex64 = col_sums.iter().map(|v| v.powu(q as u32)).product();
        total.add(prod * weight);

        // odometer over t in {0..q}^n
        let mut i = 0;
        loop {
            if i == n {
                let scale = 0.5f64.powi((n * q) as i32);
                return total.value() * scale;
            }
            if t[i] < q {
                t[i] += 1;
                for (j, v) in col_sums.iter_mut().enumerate() {
                    *v -= 2.0 * g[(i, j)];
                }
                break;
            }
            for (j, v) in col_sums.iter_mut().enumerate() {
                *v += 2.0 * q as f64 * g[(i, j)];
            }
            t[i] = 0;
            i += 1;
        }
    }
}

/// The `q x q` block tiling of `g`.
pub fn tile_blocks(g: &DMatrix<Complex64>, q: usize) -> DMatrix<Complex64> {
    let n = g.nrows();
    DMatrix::from_fn(n * q, n * q, |i, j| g[(i % n, j % n)])
}
