//! Product quadrature on the sphere: Gauss-Legendre in `cos(theta)` times the
//! trapezoid rule in `phi`.

use std::f64::consts::TAU;
use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;

/// Nodes (unit vectors) and weights normalized so that `sum w_i f(x_i)`
/// approximates `(1/4pi) ∫ f dΩ`.
#[derive(Clone, Debug)]
pub struct SphereGrid {
    nodes: Vec<[f64; 3]>,
    weights: Vec<f64>,
}

impl SphereGrid {
    /// `n_theta` Legendre nodes and `n_phi` equispaced azimuths.
    pub fn new(n_theta: usize, n_phi: usize) -> Self {
        let n_theta = NonZeroUsize::new(n_theta.max(1)).unwrap();
        let n_phi = n_phi.max(1);
        let rule = GaussLegendre::new(n_theta);
        let mut nodes = Vec::with_capacity(n_theta.get() * n_phi);
        let mut weights = Vec::with_capacity(n_theta.get() * n_phi);
        for &(x, w) in rule.iter() {
            let s = (1.0 - x * x).max(0.0).sqrt();
            for j in 0..n_phi {
                let (sp, cp) = (TAU * j as f64 / n_phi as f64).sin_cos();
                nodes.push([s * cp, s * sp, x]);
                weights.push(0.5 * w / n_phi as f64);
            }
        }
        Self { nodes, weights }
    }

    /// A grid integrating `Q^q` exactly for an N-qubit state when
    /// `degree = N q`: Legendre order `degree + 1`, `2 degree + 1` azimuths.
    pub fn exact_for_degree(degree: usize) -> Self {
        Self::new(degree + 1, 2 * degree + 1)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64; 3], f64)> {
        self.nodes.iter().zip(self.weights.iter().copied())
    }

    /// Spherical average of `f`.
    pub fn average<F: FnMut([f64; 3]) -> f64>(&self, mut f: F) -> f64 {
        self.iter().map(|(x, w)| w * f(*x)).sum()
    }
}
