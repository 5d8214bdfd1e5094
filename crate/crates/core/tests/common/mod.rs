//! Independent oracles shared by the integration tests. Nothing here calls
//! the library's own evaluation routines.
#![allow(dead_code)]

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use wehrl_core::{BlochDirection, SymmetricState};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Haar-random vector in the Dicke subspace (complex Gaussian amplitudes).
pub fn random_state<R: Rng>(n: usize, rng: &mut R) -> SymmetricState {
    let amps: Vec<Complex64> = (0..=n)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    SymmetricState::normalized(amps).unwrap()
}

pub fn random_direction<R: Rng>(rng: &mut R) -> BlochDirection {
    let z: f64 = rng.random_range(-1.0..1.0);
    let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    BlochDirection::new(z.acos(), phi).unwrap()
}

/// n choose k by the product formula.
pub fn choose(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `W^(q)` of the Dicke state `|D_N^k>`: `C(N,k)^q / ((qN+1) C(qN,qk))`.
pub fn dicke_moment(n: usize, k: usize, q: usize) -> f64 {
    choose(n, k).powi(q as i32) / ((q * n + 1) as f64 * choose(q * n, q * k))
}

/// `W^(q)` of a coherent state: `1/(Nq+1)`.
pub fn coherent_moment(n: usize, q: usize) -> f64 {
    1.0 / (n * q + 1) as f64
}

/// GME of `|D_N^k>`: `1 - C(N,k) (k/N)^k ((N-k)/N)^(N-k)`.
pub fn dicke_gme(n: usize, k: usize) -> f64 {
    let p = k as f64 / n as f64;
    1.0 - choose(n, k) * p.powi(k as i32) * (1.0 - p).powi((n - k) as i32)
}

/// Husimi function from the explicit coherent-state expansion.
pub fn husimi_direct(state: &SymmetricState, theta: f64, phi: f64) -> f64 {
    let n = state.n_qubits();
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let mut acc = Complex64::new(0.0, 0.0);
    for (k, d) in state.dicke().iter().enumerate() {
        let amp = choose(n, k).sqrt() * c.powi((n - k) as i32) * s.powi(k as i32);
        acc += Complex64::from_polar(amp, -(k as f64) * phi) * d;
    }
    acc.norm_sqr()
}

/// Brute-force maximum of the Husimi function on a `res x 2res` grid.
pub fn husimi_grid_max(state: &SymmetricState, res: usize) -> f64 {
    let mut best: f64 = 0.0;
    for i in 0..=res {
        let theta = std::f64::consts::PI * i as f64 / res as f64;
        for j in 0..2 * res {
            let phi = std::f64::consts::PI * j as f64 / res as f64;
            best = best.max(husimi_direct(state, theta, phi));
        }
    }
    best
}

/// Value at 0 of the polynomial through `(xs[i], ys[i])` (Neville).
pub fn neville_at_zero(xs: &[f64], ys: &[f64]) -> f64 {
    let mut p = ys.to_vec();
    let n = xs.len();
    for m in 1..n {
        for i in 0..n - m {
            p[i] = (xs[i + m] * p[i] - xs[i] * p[i + 1]) / (xs[i + m] - xs[i]);
        }
    }
    p[0]
}

/// Rotation matrix about a unit axis.
pub fn rotation(axis: [f64; 3], angle: f64) -> [[f64; 3]; 3] {
    let n = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
    let [x, y, z] = [axis[0] / n, axis[1] / n, axis[2] / n];
    let (s, c) = angle.sin_cos();
    let t = 1.0 - c;
    [
        [t * x * x + c, t * x * y - s * z, t * x * z + s * y],
        [t * x * y + s * z, t * y * y + c, t * y * z - s * x],
        [t * x * z - s * y, t * y * z + s * x, t * z * z + c],
    ]
}

pub fn rotate(r: &[[f64; 3]; 3], v: [f64; 3]) -> [f64; 3] {
    [
        r[0][0] * v[0] + r[0][1] * v[1] + r[0][2] * v[2],
        r[1][0] * v[0] + r[1][1] * v[1] + r[1][2] * v[2],
        r[2][0] * v[0] + r[2][1] * v[1] + r[2][2] * v[2],
    ]
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}
