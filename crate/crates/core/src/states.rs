//! Symmetric N-qubit pure states in the Dicke and Majorana representations.
//!
//! Conventions: the single-qubit coherent state at `(theta, phi)` is
//! `cos(theta/2)|0> + e^{i phi} sin(theta/2)|1>`, so `|0>` sits at the north
//! pole, and `|D_N^(k)>` is the symmetrized state with `k` qubits in `|1>`.

use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::binomial;

const NORM_TOL: f64 = 1e-12;

/// A point on the Bloch sphere, `theta` in `[0, pi]`, `phi` in `[0, 2pi)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlochDirection {
    pub theta: f64,
    pub phi: f64,
}

impl BlochDirection {
    pub const NORTH: BlochDirection = BlochDirection { theta: 0.0, phi: 0.0 };
    pub const SOUTH: BlochDirection = BlochDirection { theta: PI, phi: 0.0 };

    /// Builds a direction, wrapping `phi` into `[0, 2pi)`.
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&theta) || !phi.is_finite() {
            return Err(Error::InvalidInput(format!(
                "direction out of range: theta={theta}, phi={phi}"
            )));
        }
        Ok(Self {
            theta,
            phi: wrap_phi(phi),
        })
    }

    /// Direction of a (not necessarily normalized) nonzero 3-vector.
    pub fn from_vector(v: [f64; 3]) -> Self {
        let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        let z = (v[2] / r).clamp(-1.0, 1.0);
        let theta = z.acos();
        let phi = if v[0] == 0.0 && v[1] == 0.0 {
            0.0
        } else {
            wrap_phi(v[1].atan2(v[0]))
        };
        Self { theta, phi }
    }

    pub fn to_vector(self) -> [f64; 3] {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [st * cp, st * sp, ct]
    }

    pub fn antipode(self) -> Self {
        Self {
            theta: PI - self.theta,
            phi: wrap_phi(self.phi + PI),
        }
    }

    /// Euclidean distance between the two points on the unit sphere.
    pub fn chordal_distance(self, other: Self) -> f64 {
        let a = self.to_vector();
        let b = other.to_vector();
        ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
    }
}

fn wrap_phi(phi: f64) -> f64 {
    let w = phi.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Spinor components `(cos(theta/2), e^{i phi} sin(theta/2))`.
pub fn coherent_qubit(dir: BlochDirection) -> [Complex64; 2] {
    let (s, c) = (0.5 * dir.theta).sin_cos();
    [Complex64::new(c, 0.0), Complex64::from_polar(s, dir.phi)]
}

/// An N-qubit symmetric pure state as its N+1 Dicke amplitudes.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricState {
    dicke: Vec<Complex64>,
}

impl SymmetricState {
    /// Wraps amplitudes that are already unit-normalized.
    pub fn new(dicke: Vec<Complex64>) -> Result<Self> {
        if dicke.len() < 2 {
            return Err(Error::InvalidInput(
                "a symmetric state needs at least one qubit".into(),
            ));
        }
        let norm2: f64 = dicke.iter().map(|d| d.norm_sqr()).sum();
        if (norm2 - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidInput(format!(
                "Dicke amplitudes are not normalized (norm^2 = {norm2})"
            )));
        }
        Ok(Self { dicke })
    }

    /// Normalizes the amplitudes and fixes the global phase so that the first
    /// nonzero amplitude is real and positive.
    pub fn normalized(mut dicke: Vec<Complex64>) -> Result<Self> {
        if dicke.len() < 2 {
            return Err(Error::InvalidInput(
                "a symmetric state needs at least one qubit".into(),
            ));
        }
        let norm = dicke.iter().map(|d| d.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidInput("zero or non-finite state vector".into()));
        }
        let scale = 1.0 / norm;
        let phase = dicke
            .iter()
            .find(|d| d.norm() * scale > NORM_TOL)
            .map(|d| d.conj() / d.norm())
            .unwrap_or(Complex64::new(1.0, 0.0));
        for d in dicke.iter_mut() {
            *d *= phase * scale;
        }
        Ok(Self { dicke })
    }

    /// Dicke state `|D_N^(k)>`.
    pub fn dicke_basis(n_qubits: usize, k: usize) -> Result<Self> {
        if n_qubits == 0 || k > n_qubits {
            return Err(Error::InvalidInput(format!(
                "no Dicke state with N={n_qubits}, k={k}"
            )));
        }
        let mut d = vec![Complex64::new(0.0, 0.0); n_qubits + 1];
        d[k] = Complex64::new(1.0, 0.0);
        Ok(Self { dicke: d })
    }

    /// `(|D_N^(0)> + |D_N^(N)>)/sqrt(2)`.
    pub fn ghz(n_qubits: usize) -> Result<Self> {
        if n_qubits < 2 {
            return Err(Error::InvalidInput("GHZ needs N >= 2".into()));
        }
        let mut d = vec![Complex64::new(0.0, 0.0); n_qubits + 1];
        d[0] = Complex64::new(0.5f64.sqrt(), 0.0);
        d[n_qubits] = Complex64::new(0.5f64.sqrt(), 0.0);
        Ok(Self { dicke: d })
    }

    /// Spin coherent state `|theta, phi>^{(x) N}`.
    pub fn coherent(n_qubits: usize, dir: BlochDirection) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::InvalidInput("N must be positive".into()));
        }
        Self::normalized(coherent_amplitudes(n_qubits, dir))
    }

    pub fn n_qubits(&self) -> usize {
        self.dicke.len() - 1
    }

    pub fn dicke(&self) -> &[Complex64] {
        &self.dicke
    }

    pub fn into_dicke(self) -> Vec<Complex64> {
        self.dicke
    }

    /// `|<psi|phi>|^2`, insensitive to global phase.
    pub fn fidelity(&self, other: &SymmetricState) -> f64 {
        self.dicke
            .iter()
            .zip(&other.dicke)
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            .norm_sqr()
    }
}

/// Dicke amplitudes of `|theta, phi>^{(x) N}`:
/// `sqrt(C(N,k)) cos(theta/2)^{N-k} (e^{i phi} sin(theta/2))^k`.
pub fn coherent_amplitudes(n_qubits: usize, dir: BlochDirection) -> Vec<Complex64> {
    let [a, b] = coherent_qubit(dir);
    coherent_amplitudes_from_spinor(n_qubits, a, b)
}

pub(crate) fn coherent_amplitudes_from_spinor(
    n_qubits: usize,
    a: Complex64,
    b: Complex64,
) -> Vec<Complex64> {
    let mut a_pow = vec![Complex64::new(1.0, 0.0); n_qubits + 1];
    let mut b_pow = vec![Complex64::new(1.0, 0.0); n_qubits + 1];
    for k in 1..=n_qubits {
        a_pow[k] = a_pow[k - 1] * a;
        b_pow[k] = b_pow[k - 1] * b;
    }
    (0..=n_qubits)
        .map(|k| binomial(n_qubits, k).sqrt() * a_pow[n_qubits - k] * b_pow[k])
        .collect()
}

/// The N Bloch points of the constituent qubits of a symmetric state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MajoranaConstellation {
    pub points: Vec<BlochDirection>,
}

impl MajoranaConstellation {
    pub fn new(points: Vec<BlochDirection>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidInput("empty constellation".into()));
        }
        Ok(Self { points })
    }

    pub fn n_qubits(&self) -> usize {
        self.points.len()
    }

    /// Largest chordal distance between any two points.
    pub fn diameter(&self) -> f64 {
        let mut max = 0.0f64;
        for (i, p) in self.points.iter().enumerate() {
            for q in &self.points[i + 1..] {
                max = max.max(p.chordal_distance(*q));
            }
        }
        max
    }
}

/// Symmetrizes the product of the constituent qubits.
///
/// The amplitudes satisfy `sqrt(C(N,k)) d_k ∝ E_k`, where `E_k` is the
/// coefficient of `z^k` in `prod_i (a_i + b_i z)`.
pub fn from_majorana(constellation: &MajoranaConstellation) -> Result<SymmetricState> {
    let n = constellation.n_qubits();
    if n == 0 {
        return Err(Error::InvalidInput("empty constellation".into()));
    }
    let mut poly = vec![Complex64::new(0.0, 0.0); n + 1];
    poly[0] = Complex64::new(1.0, 0.0);
    for (deg, point) in constellation.points.iter().enumerate() {
        let [a, b] = coherent_qubit(*point);
        for k in (0..=deg + 1).rev() {
            let lower = if k > 0 { poly[k - 1] * b } else { Complex64::new(0.0, 0.0) };
            poly[k] = poly[k] * a + lower;
        }
    }
    if poly.iter().all(|e| e.norm() < 1e-14) {
        return Err(Error::DegenerateState);
    }
    let dicke = poly
        .iter()
        .enumerate()
        .map(|(k, e)| e / binomial(n, k).sqrt())
        .collect();
    SymmetricState::normalized(dicke)
}

/// `<theta,phi|^{(x) N} |psi>`.
pub fn coherent_overlap(state: &SymmetricState, dir: BlochDirection) -> Complex64 {
    let [a, b] = coherent_qubit(dir);
    overlap_with_spinor(state, a, b)
}

pub(crate) fn overlap_with_spinor(state: &SymmetricState, a: Complex64, b: Complex64) -> Complex64 {
    let n = state.n_qubits();
    let (a, b) = (a.conj(), b.conj());
    // Horner in b/a is unstable near the south pole, so build both power tables.
    let mut acc = Complex64::new(0.0, 0.0);
    let mut b_pow = Complex64::new(1.0, 0.0);
    let mut a_pows = vec![Complex64::new(1.0, 0.0); n + 1];
    for k in 1..=n {
        a_pows[k] = a_pows[k - 1] * a;
    }
    for (k, d) in state.dicke().iter().enumerate() {
        acc += binomial(n, k).sqrt() * a_pows[n - k] * b_pow * d;
        b_pow *= b;
    }
    acc
}

/// Husimi function `Q(theta, phi) = |<theta,phi|^{(x) N}|psi>|^2`.
pub fn husimi(state: &SymmetricState, dir: BlochDirection) -> f64 {
    coherent_overlap(state, dir).norm_sqr()
}

/// Husimi function at a unit 3-vector, avoiding the angle round trip.
pub fn husimi_at_vector(state: &SymmetricState, v: [f64; 3]) -> f64 {
    let z = v[2].clamp(-1.0, 1.0);
    let c = (0.5 * (1.0 + z)).sqrt();
    let s = (0.5 * (1.0 - z)).sqrt();
    let rho = (v[0] * v[0] + v[1] * v[1]).sqrt();
    let phase = if rho > 0.0 {
        Complex64::new(v[0] / rho, v[1] / rho)
    } else {
        Complex64::new(1.0, 0.0)
    };
    overlap_with_spinor(state, Complex64::new(c, 0.0), phase * s).norm_sqr()
}

/// Majorana points from the roots of `sum_k sqrt(C(N,k)) d_k z^k`.
///
/// A root `z` corresponds to the qubit with `a/b = -z`; each unit of degree
/// deficiency is a root at infinity, i.e. a point at the north pole.
pub fn to_majorana(state: &SymmetricState) -> MajoranaConstellation {
    let n = state.n_qubits();
    let coeffs: Vec<Complex64> = state
        .dicke()
        .iter()
        .enumerate()
        .map(|(k, d)| d * binomial(n, k).sqrt())
        .collect();
    let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let significant = |c: &Complex64| c.norm() > 1e-12 * scale;

    let degree = coeffs.iter().rposition(significant).unwrap_or(0);
    let low_zeros = coeffs.iter().position(significant).unwrap_or(0);

    let mut points = Vec::with_capacity(n);
    points.extend(std::iter::repeat_n(BlochDirection::NORTH, n - degree));
    points.extend(std::iter::repeat_n(BlochDirection::SOUTH, low_zeros));

    let reduced = &coeffs[low_zeros..=degree];
    for z in polynomial_roots(reduced) {
        points.push(root_to_direction(z));
    }
    MajoranaConstellation { points }
}

fn root_to_direction(z: Complex64) -> BlochDirection {
    let r = z.norm();
    if r == 0.0 {
        return BlochDirection::SOUTH;
    }
    if !r.is_finite() {
        return BlochDirection::NORTH;
    }
    let theta = 2.0 * 1.0f64.atan2(r);
    let phase = -z.conj();
    BlochDirection {
        theta,
        phi: wrap_phi(phase.im.atan2(phase.re)),
    }
}

/// Roots of `sum_k coeffs[k] z^k` with nonzero leading and constant terms,
/// from companion-matrix eigenvalues followed by Newton polishing.
fn polynomial_roots(coeffs: &[Complex64]) -> Vec<Complex64> {
    let deg = coeffs.len() - 1;
    if deg == 0 {
        return Vec::new();
    }
    if deg == 1 {
        return vec![-coeffs[0] / coeffs[1]];
    }
    let lead = coeffs[deg];
    let mut companion = DMatrix::<Complex64>::zeros(deg, deg);
    for i in 1..deg {
        companion[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    for i in 0..deg {
        companion[(i, deg - 1)] = -coeffs[i] / lead;
    }
    // Cyclic companion matrices (e.g. z^N + 1) can stall the QR sweep.
    let roots: Vec<Complex64> = match Schur::try_new(companion, f64::EPSILON, 2000) {
        Some(schur) => schur
            .eigenvalues()
            .expect("complex Schur form is triangular")
            .iter()
            .copied()
            .collect(),
        None => durand_kerner(coeffs),
    };
    roots.into_iter().map(|z| polish_root(coeffs, z)).collect()
}

/// Simultaneous Weierstrass iteration for all roots.
fn durand_kerner(coeffs: &[Complex64]) -> Vec<Complex64> {
    let deg = coeffs.len() - 1;
    let lead = coeffs[deg];
    let monic: Vec<Complex64> = coeffs.iter().map(|c| c / lead).collect();
    // Cauchy bound on the root moduli
    let radius = 1.0 + monic[..deg].iter().map(|c| c.norm()).fold(0.0, f64::max);
    let seed = Complex64::from_polar(1.0, 0.4);
    let mut z: Vec<Complex64> = (0..deg)
        .map(|k| seed.powu(k as u32) * (0.5 * radius))
        .collect();
    let eval = |x: Complex64| monic.iter().rev().fold(Complex64::new(0.0, 0.0), |p, c| p * x + c);
    for _ in 0..1000 {
        let mut change: f64 = 0.0;
        for i in 0..deg {
            let denom = (0..deg)
                .filter(|&j| j != i)
                .fold(Complex64::new(1.0, 0.0), |acc, j| acc * (z[i] - z[j]));
            let step = eval(z[i]) / denom;
            if step.is_finite() {
                z[i] -= step;
                change = change.max(step.norm());
            }
        }
        if change <= 1e-15 * radius {
            break;
        }
    }
    z
}

fn polish_root(coeffs: &[Complex64], z0: Complex64) -> Complex64 {
    // Polish in w = 1/z for large roots so Horner stays well scaled.
    if z0.norm() > 1.0 {
        let reversed: Vec<Complex64> = coeffs.iter().rev().copied().collect();
        return 1.0 / newton(&reversed, 1.0 / z0);
    }
    newton(coeffs, z0)
}

fn newton(coeffs: &[Complex64], mut z: Complex64) -> Complex64 {
    let eval = |z: Complex64| {
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for c in coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    };
    let (mut p, _) = eval(z);
    for _ in 0..8 {
        let (_, dp) = eval(z);
        if dp.norm() == 0.0 {
            break;
        }
        let candidate = z - p / dp;
        let (pc, _) = eval(candidate);
        if !(pc.norm() < p.norm()) {
            break;
        }
        z = candidate;
        p = pc;
    }
    z
}
