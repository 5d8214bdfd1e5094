//! Geometric measure of entanglement of symmetric states, `E_G = 1 - max Q`.

use std::cmp::Ordering;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::states::{husimi_at_vector, to_majorana, BlochDirection, SymmetricState};

/// Which procedure produced a GME value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Reference,
    Ratio,
    Accel,
    Ann,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Reference => "reference",
            Method::Ratio => "ratio",
            Method::Accel => "accel",
            Method::Ann => "ann",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "reference" => Ok(Method::Reference),
            "ratio" => Ok(Method::Ratio),
            "accel" => Ok(Method::Accel),
            "ann" => Ok(Method::Ann),
            other => Err(format!("unknown method '{other}'")),
        }
    }
}

/// A GME value tagged with its provenance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GmeEstimate {
    pub value: f64,
    pub method: Method,
    pub q_max_used: Option<usize>,
    pub maximizer: Option<BlochDirection>,
    /// The raw estimate fell outside the physical range and was clamped.
    #[serde(default)]
    pub clamped: bool,
    /// The estimator fell back to a simpler one (see [`crate::accel`]).
    #[serde(default)]
    pub fallback: bool,
}

impl GmeEstimate {
    pub fn new(value: f64, method: Method, q_max_used: Option<usize>) -> Self {
        Self {
            value,
            method,
            q_max_used,
            maximizer: None,
            clamped: false,
            fallback: false,
        }
    }

    /// Clamps `raw` to `[0, 1 - 1/(N+1)]`.
    pub fn clamped_to_bound(raw: f64, n_qubits: usize, method: Method, q_max_used: Option<usize>) -> Self {
        let upper = max_gme_bound(n_qubits);
        let value = raw.clamp(0.0, upper);
        Self {
            clamped: value != raw,
            ..Self::new(value, method, q_max_used)
        }
    }
}

/// `1 - 1/(N+1)`, an upper bound on the GME of N-qubit symmetric states.
pub fn max_gme_bound(n_qubits: usize) -> f64 {
    1.0 - 1.0 / (n_qubits as f64 + 1.0)
}

pub fn max_gme_check(n_qubits: usize, value: f64) -> bool {
    value <= max_gme_bound(n_qubits) + 1e-9
}

/// Settings for the multi-start Husimi maximization.
#[derive(Clone, Debug, PartialEq)]
pub struct GmeConfig {
    /// Fibonacci-grid starts; `None` means `max(32, 4N)`.
    pub grid_starts: Option<usize>,
    pub max_iter: usize,
    pub f_tol: f64,
    pub initial_step: f64,
}

impl Default for GmeConfig {
    fn default() -> Self {
        Self {
            grid_starts: None,
            max_iter: 200,
            f_tol: 1e-14,
            initial_step: 0.15,
        }
    }
}

/// Reference GME from the global maximum of the Husimi function.
pub fn gme_reference(state: &SymmetricState) -> GmeEstimate {
    gme_reference_with(state, &GmeConfig::default())
}

pub fn gme_reference_with(state: &SymmetricState, cfg: &GmeConfig) -> GmeEstimate {
    let maxima = local_maxima(state, cfg);
    let best = maxima[0];
    let q_max = best.value.min(1.0);
    GmeEstimate {
        maximizer: Some(BlochDirection::from_vector(best.point)),
        ..GmeEstimate::new((1.0 - q_max).max(0.0), Method::Reference, None)
    }
}

/// A converged local maximum of the Husimi function.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HusimiMaximum {
    pub point: [f64; 3],
    pub value: f64,
}

impl HusimiMaximum {
    pub fn direction(&self) -> BlochDirection {
        BlochDirection::from_vector(self.point)
    }
}

/// Distinct local maxima reached from all starts, best first.
pub fn husimi_local_maxima(state: &SymmetricState) -> Vec<HusimiMaximum> {
    let mut all = local_maxima(state, &GmeConfig::default());
    let mut distinct: Vec<HusimiMaximum> = Vec::new();
    all.sort_by(compare_maxima);
    for m in all {
        if distinct.iter().all(|d| chord(d.point, m.point) > 1e-3) {
            distinct.push(m);
        }
    }
    distinct
}

/// Best value first; values equal to 1e-13 are ordered by smaller theta,
/// then phi.
fn compare_maxima(a: &HusimiMaximum, b: &HusimiMaximum) -> Ordering {
    let key = |m: &HusimiMaximum| (m.value * 1e13).round();
    let da = BlochDirection::from_vector(a.point);
    let db = BlochDirection::from_vector(b.point);
    key(b)
        .total_cmp(&key(a))
        .then(da.theta.total_cmp(&db.theta))
        .then(da.phi.total_cmp(&db.phi))
}

/// All refined maxima (one per start plus a final polish), best first.
fn local_maxima(state: &SymmetricState, cfg: &GmeConfig) -> Vec<HusimiMaximum> {
    let n = state.n_qubits();
    let f = |v: [f64; 3]| husimi_at_vector(state, v);

    let mut starts: Vec<[f64; 3]> = to_majorana(state)
        .points
        .iter()
        .map(|p| p.antipode().to_vector())
        .collect();
    starts.extend(fibonacci_sphere(cfg.grid_starts.unwrap_or((4 * n).max(32))));

    let mut found: Vec<HusimiMaximum> = starts
        .iter()
        .map(|&s| maximize_from(&f, s, cfg.initial_step, cfg))
        .collect();
    found.sort_by(compare_maxima);

    // Polish the winner in a chart centred on it with a small simplex.
    let polished = maximize_from(&f, found[0].point, 1e-3, cfg);
    if polished.value > found[0].value {
        found.insert(0, polished);
    }
    found
}

/// Nearly uniform points on the sphere (golden-angle spiral).
pub fn fibonacci_sphere(count: usize) -> Vec<[f64; 3]> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / count as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let (s, c) = (golden * i as f64).sin_cos();
            [r * c, r * s, z]
        })
        .collect()
}

fn chord(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

fn normalize(v: [f64; 3]) -> [f64; 3] {
    let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [v[0] / r, v[1] / r, v[2] / r]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Gnomonic chart around `center`: `(u, v) -> normalize(center + u e1 + v e2)`.
/// Regular everywhere near the centre, so the pole singularity of `(theta,
/// phi)` never enters the optimization.
struct Chart {
    center: [f64; 3],
    e1: [f64; 3],
    e2: [f64; 3],
}

impl Chart {
    fn new(center: [f64; 3]) -> Self {
        let center = normalize(center);
        let helper = if center[0].abs() < 0.9 {
            [1.0, 0.0, 0.0]
        } else {
            [0.0, 1.0, 0.0]
        };
        let e1 = normalize(cross(center, helper));
        let e2 = cross(center, e1);
        Self { center, e1, e2 }
    }

    fn point(&self, x: [f64; 2]) -> [f64; 3] {
        normalize([
            self.center[0] + x[0] * self.e1[0] + x[1] * self.e2[0],
            self.center[1] + x[0] * self.e1[1] + x[1] * self.e2[1],
            self.center[2] + x[0] * self.e1[2] + x[1] * self.e2[2],
        ])
    }
}

fn maximize_from<F: Fn([f64; 3]) -> f64>(f: &F, start: [f64; 3], step: f64, cfg: &GmeConfig) -> HusimiMaximum {
    let chart = Chart::new(start);
    let objective = |x: [f64; 2]| -f(chart.point(x));
    let (x, fx) = nelder_mead(objective, [0.0, 0.0], step, cfg.max_iter, cfg.f_tol);
    HusimiMaximum {
        point: chart.point(x),
        value: -fx,
    }
}

/// Derivative-free Nelder-Mead minimization in two dimensions.
fn nelder_mead<F: Fn([f64; 2]) -> f64>(
    f: F,
    x0: [f64; 2],
    step: f64,
    max_iter: usize,
    f_tol: f64,
) -> ([f64; 2], f64) {
    let mut simplex = [
        x0,
        [x0[0] + step, x0[1]],
        [x0[0], x0[1] + step],
    ];
    let mut values = simplex.map(&f);
    let lerp = |a: [f64; 2], b: [f64; 2], t: f64| [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];

    for _ in 0..max_iter {
        let mut order = [0usize, 1, 2];
        order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
        simplex = order.map(|i| simplex[i]);
        values = order.map(|i| values[i]);
        if (values[2] - values[0]).abs() <= f_tol {
            break;
        }
        let centroid = lerp(simplex[0], simplex[1], 0.5);
        let reflected = lerp(centroid, simplex[2], -1.0);
        let fr = f(reflected);
        if fr < values[0] {
            let expanded = lerp(centroid, simplex[2], -2.0);
            let fe = f(expanded);
            if fe < fr {
                simplex[2] = expanded;
                values[2] = fe;
            } else {
                simplex[2] = reflected;
                values[2] = fr;
            }
        } else if fr < values[1] {
            simplex[2] = reflected;
            values[2] = fr;
        } else {
            let (contracted, fc) = if fr < values[2] {
                let c = lerp(centroid, simplex[2], -0.5);
                (c, f(c))
            } else {
                let c = lerp(centroid, simplex[2], 0.5);
                (c, f(c))
            };
            if fc < values[2].min(fr) {
                simplex[2] = contracted;
                values[2] = fc;
            } else {
                for i in 1..3 {
                    simplex[i] = lerp(simplex[0], simplex[i], 0.5);
                    values[i] = f(simplex[i]);
                }
            }
        }
    }
    let best = (0..3).min_by(|&i, &j| values[i].total_cmp(&values[j])).unwrap();
    (simplex[best], values[best])
}
