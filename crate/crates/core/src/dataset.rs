//! Random symmetric-state datasets with their Wehrl moments and reference
//! GMEs, plus the JSON Lines file format they are stored in.
//!
//! Every record draws from its own ChaCha stream keyed by `(seed, subset,
//! id)`, so generation order and thread count never change the output.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gme::gme_reference;
use crate::moments::{moments_dicke, MomentSequence};
use crate::states::{from_majorana, BlochDirection, MajoranaConstellation, SymmetricState};

/// Version of the dataset line format and manifest.
pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_Q_MAX: usize = 8;
pub const DEFAULT_SQUEEZE_STEPS: usize = 500;
pub const DEFAULT_SQUEEZE_DT: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Subset {
    /// Independent uniformly distributed Majorana points.
    Uniform,
    /// Uniform points repeated according to a random partition of N.
    Degenerate,
    /// Normalized `alpha |GHZ> + (1 - alpha) |D_N^(k)>`.
    GhzDicke,
    /// Snapshots of `|D_N^(0)>` evolving under a random squeezing Hamiltonian.
    Squeezed,
}

impl Subset {
    pub fn as_str(self) -> &'static str {
        match self {
            Subset::Uniform => "uniform",
            Subset::Degenerate => "degenerate",
            Subset::GhzDicke => "ghz_dicke",
            Subset::Squeezed => "squeezed",
        }
    }
}

/// Subset-specific provenance; absent fields are omitted from the file.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecordParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partition: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chi_x: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chi_y: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chi_z: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectory: Option<u64>,
}

/// One state of a dataset with its moments and reference GME.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "RecordLine", try_from = "RecordLine")]
pub struct DatasetRecord {
    pub id: u64,
    pub subset: Subset,
    pub params: RecordParams,
    pub dicke: Vec<Complex64>,
    pub moments: MomentSequence,
    pub gme: f64,
}

impl DatasetRecord {
    pub fn n_qubits(&self) -> usize {
        self.moments.n_qubits
    }

    pub fn state(&self) -> Result<SymmetricState> {
        SymmetricState::new(self.dicke.clone())
    }

    /// Recomputes moments and GME from the amplitudes and compares.
    pub fn verify(&self, tol: f64) -> Result<()> {
        let state = self.state()?;
        let fresh = moments_dicke(&state, self.moments.q_max())?;
        for (q, (a, b)) in fresh.moments.iter().zip(&self.moments.moments).enumerate() {
            if (a - b).abs() > tol * a.abs().max(1e-300) {
                return Err(Error::Schema(format!(
                    "record {}: stored W^({}) = {b} but recomputed {a}",
                    self.id,
                    q + 1
                )));
            }
        }
        let gme = gme_reference(&state).value;
        if (gme - self.gme).abs() > tol {
            return Err(Error::Schema(format!(
                "record {}: stored gme {} but recomputed {gme}",
                self.id, self.gme
            )));
        }
        Ok(())
    }
}

/// On-disk shape of a record: one JSON object per line.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RecordLine {
    id: u64,
    n_qubits: usize,
    subset: Subset,
    params: RecordParams,
    dicke_re: Vec<f64>,
    dicke_im: Vec<f64>,
    moments: Vec<f64>,
    ratios: Vec<f64>,
    gme: f64,
}

impl From<DatasetRecord> for RecordLine {
    fn from(r: DatasetRecord) -> Self {
        RecordLine {
            id: r.id,
            n_qubits: r.moments.n_qubits,
            subset: r.subset,
            params: r.params,
            dicke_re: r.dicke.iter().map(|d| d.re).collect(),
            dicke_im: r.dicke.iter().map(|d| d.im).collect(),
            moments: r.moments.moments,
            ratios: r.moments.ratios,
            gme: r.gme,
        }
    }
}

impl TryFrom<RecordLine> for DatasetRecord {
    type Error = String;

    fn try_from(l: RecordLine) -> std::result::Result<Self, String> {
        if l.dicke_re.len() != l.n_qubits + 1 || l.dicke_im.len() != l.n_qubits + 1 {
            return Err(format!("record {}: amplitude count does not match n_qubits", l.id));
        }
        if l.moments.len() < 2 || l.ratios.len() + 1 != l.moments.len() {
            return Err(format!("record {}: inconsistent moment/ratio lengths", l.id));
        }
        Ok(DatasetRecord {
            id: l.id,
            subset: l.subset,
            params: l.params,
            dicke: l
                .dicke_re
                .iter()
                .zip(&l.dicke_im)
                .map(|(&re, &im)| Complex64::new(re, im))
                .collect(),
            moments: MomentSequence {
                n_qubits: l.n_qubits,
                moments: l.moments,
                ratios: l.ratios,
            },
            gme: l.gme,
        })
    }
}

/// Seed of the named substream `name` of `root`.
pub fn substream_seed(root: u64, name: &str) -> u64 {
    // FNV-1a over the name, then a splitmix64 finalizer.
    let mut h: u64 = 0xcbf29ce484222325;
    for b in name.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    let mut z = root ^ h;
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Generator for stream `stream` of substream `name`.
pub fn substream_rng(root: u64, name: &str, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(substream_seed(root, name));
    rng.set_stream(stream);
    rng
}

/// Area-uniform point: `cos(theta) ~ U[-1,1]`, `phi ~ U[0,2pi)`.
pub fn uniform_direction<R: Rng>(rng: &mut R) -> BlochDirection {
    let z: f64 = rng.random_range(-1.0..=1.0);
    let phi: f64 = rng.random_range(0.0..TAU);
    BlochDirection {
        theta: z.clamp(-1.0, 1.0).acos(),
        phi,
    }
}

/// A state with `n` independent uniform Majorana points.
pub fn random_uniform_state<R: Rng>(n_qubits: usize, rng: &mut R) -> Result<SymmetricState> {
    let points = (0..n_qubits).map(|_| uniform_direction(rng)).collect();
    from_majorana(&MajoranaConstellation::new(points)?)
}

/// All partitions of `n` as non-increasing part lists, in lexicographic order.
pub fn partitions(n: usize) -> Vec<Vec<usize>> {
    fn rec(remaining: usize, max_part: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if remaining == 0 {
            out.push(prefix.clone());
            return;
        }
        for part in 1..=remaining.min(max_part) {
            prefix.push(part);
            rec(remaining - part, part, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, n, &mut Vec::new(), &mut out);
    out
}

/// Collective spin matrices for `j = N/2` in the Dicke ordering `k = 0..N`
/// (`m = N/2 - k`).
#[derive(Clone, Debug)]
pub struct SpinOperators {
    pub jx: DMatrix<Complex64>,
    pub jy: DMatrix<Complex64>,
    pub jz: DMatrix<Complex64>,
}

pub fn spin_operators(n_qubits: usize) -> Result<SpinOperators> {
    if n_qubits == 0 {
        return Err(Error::InvalidInput("N must be positive".into()));
    }
    let dim = n_qubits + 1;
    let j = n_qubits as f64 / 2.0;
    let m = |k: usize| j - k as f64;
    // J+ |m> = sqrt(j(j+1) - m(m+1)) |m+1>, and m+1 sits at index k-1.
    let mut jp = DMatrix::<Complex64>::zeros(dim, dim);
    for k in 1..dim {
        jp[(k - 1, k)] = Complex64::new((j * (j + 1.0) - m(k) * (m(k) + 1.0)).sqrt(), 0.0);
    }
    let jm = jp.adjoint();
    let half = Complex64::new(0.5, 0.0);
    let minus_half_i = Complex64::new(0.0, -0.5);
    Ok(SpinOperators {
        jx: (&jp + &jm) * half,
        jy: (&jp - &jm) * minus_half_i,
        jz: DMatrix::from_fn(dim, dim, |r, c| {
            if r == c {
                Complex64::new(m(r), 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        }),
    })
}

/// Unnormalized-check trajectory of `|D_N^(0)>` under
/// `H = chi_x Jx^2 + chi_y Jy^2 + chi_z Jz^2`, sampled at `t = dt, 2dt, ...,
/// steps dt`. Uses one eigendecomposition of `H`, so the evolution is exact
/// up to rounding.
pub fn squeezing_trajectory(
    n_qubits: usize,
    chi: [f64; 3],
    steps: usize,
    dt: f64,
) -> Result<Vec<Vec<Complex64>>> {
    let ops = spin_operators(n_qubits)?;
    let h = &ops.jx * &ops.jx * Complex64::new(chi[0], 0.0)
        + &ops.jy * &ops.jy * Complex64::new(chi[1], 0.0)
        + &ops.jz * &ops.jz * Complex64::new(chi[2], 0.0);
    let eig = SymmetricEigen::new(h);
    let dim = n_qubits + 1;
    let mut psi0 = DVector::<Complex64>::zeros(dim);
    psi0[0] = Complex64::new(1.0, 0.0);
    let coeffs = eig.eigenvectors.adjoint() * psi0;
    Ok((1..=steps)
        .map(|s| {
            let t = s as f64 * dt;
            let phased = DVector::from_fn(dim, |i, _| {
                coeffs[i] * Complex64::from_polar(1.0, -eig.eigenvalues[i] * t)
            });
            (&eig.eigenvectors * phased).iter().copied().collect()
        })
        .collect())
}

/// Uniform draw from a partition list.
pub fn sample_partition<'a, R: Rng>(parts: &'a [Vec<usize>], rng: &mut R) -> &'a [usize] {
    &parts[rng.random_range(0..parts.len())]
}

/// Generates dataset records for one qubit number.
#[derive(Clone, Debug, PartialEq)]
pub struct DatasetBuilder {
    pub n_qubits: usize,
    pub q_max: usize,
    pub seed: u64,
}

impl DatasetBuilder {
    pub fn new(n_qubits: usize, q_max: usize, seed: u64) -> Self {
        Self { n_qubits, q_max, seed }
    }

    fn record(&self, id: u64, subset: Subset, params: RecordParams, state: SymmetricState) -> Result<DatasetRecord> {
        let moments = moments_dicke(&state, self.q_max)?;
        let gme = gme_reference(&state).value;
        Ok(DatasetRecord {
            id,
            subset,
            params,
            dicke: state.into_dicke(),
            moments,
            gme,
        })
    }

    fn build_each<F>(&self, count: usize, first_id: u64, make: F) -> Result<Vec<DatasetRecord>>
    where
        F: Fn(u64) -> Result<DatasetRecord> + Sync,
    {
        (0..count as u64)
            .into_par_iter()
            .map(|i| make(first_id + i))
            .collect()
    }

    pub fn uniform(&self, count: usize, first_id: u64) -> Result<Vec<DatasetRecord>> {
        self.build_each(count, first_id, |id| {
            let mut rng = substream_rng(self.seed, "dataset/uniform", id);
            let state = random_uniform_state(self.n_qubits, &mut rng)?;
            self.record(id, Subset::Uniform, RecordParams::default(), state)
        })
    }

    pub fn degenerate(&self, count: usize, first_id: u64) -> Result<Vec<DatasetRecord>> {
        if self.n_qubits > 24 {
            return Err(Error::InvalidInput("partition enumeration limited to N <= 24".into()));
        }
        let parts = partitions(self.n_qubits);
        self.build_each(count, first_id, |id| {
            let mut rng = substream_rng(self.seed, "dataset/degenerate", id);
            let partition = sample_partition(&parts, &mut rng).to_vec();
            let mut points = Vec::with_capacity(self.n_qubits);
            for &multiplicity in &partition {
                let p = uniform_direction(&mut rng);
                points.extend(std::iter::repeat_n(p, multiplicity));
            }
            let state = from_majorana(&MajoranaConstellation::new(points)?)?;
            let params = RecordParams {
                partition: Some(partition),
                ..Default::default()
            };
            self.record(id, Subset::Degenerate, params, state)
        })
    }

    pub fn ghz_dicke(&self, count: usize, first_id: u64) -> Result<Vec<DatasetRecord>> {
        if self.n_qubits < 2 {
            return Err(Error::InvalidInput("GHZ-Dicke superpositions need N >= 2".into()));
        }
        self.build_each(count, first_id, |id| {
            let mut rng = substream_rng(self.seed, "dataset/ghz_dicke", id);
            let alpha: f64 = rng.random_range(0.0..=1.0);
            let k = rng.random_range(0..=self.n_qubits);
            let state = ghz_dicke_state(self.n_qubits, alpha, k)?;
            let params = RecordParams {
                alpha: Some(alpha),
                k: Some(k),
                ..Default::default()
            };
            self.record(id, Subset::GhzDicke, params, state)
        })
    }

    /// The three main subsets, `per_subset` records each, with consecutive
    /// ids: uniform first, then degenerate, then GHZ-Dicke.
    pub fn main_subsets(&self, per_subset: usize) -> Result<Vec<DatasetRecord>> {
        let n = per_subset as u64;
        let mut records = self.uniform(per_subset, 0)?;
        records.extend(self.degenerate(per_subset, n)?);
        records.extend(self.ghz_dicke(per_subset, 2 * n)?);
        Ok(records)
    }

    /// `ceil(count / steps)` trajectories of `steps` snapshots each,
    /// truncated to `count` records.
    pub fn squeezed(&self, count: usize, steps: usize, dt: f64, first_id: u64) -> Result<Vec<DatasetRecord>> {
        if self.n_qubits < 2 {
            return Err(Error::InvalidInput("squeezing needs N >= 2".into()));
        }
        if steps == 0 {
            return Err(Error::InvalidInput("steps must be positive".into()));
        }
        let trajectories = count.div_ceil(steps);
        let mut records = Vec::with_capacity(trajectories * steps);
        for tr in 0..trajectories as u64 {
            let mut rng = substream_rng(self.seed, "dataset/squeezed", tr);
            let chi = [
                rng.random_range(0.0..=1.0),
                rng.random_range(0.0..=1.0),
                rng.random_range(0.0..=1.0),
            ];
            let snapshots = squeezing_trajectory(self.n_qubits, chi, steps, dt)?;
            let base = first_id + tr * steps as u64;
            let batch: Result<Vec<DatasetRecord>> = snapshots
                .into_par_iter()
                .enumerate()
                .map(|(s, amps)| {
                    let params = RecordParams {
                        chi_x: Some(chi[0]),
                        chi_y: Some(chi[1]),
                        chi_z: Some(chi[2]),
                        t: Some((s + 1) as f64 * dt),
                        trajectory: Some(tr),
                        ..Default::default()
                    };
                    let state = SymmetricState::normalized(amps)?;
                    self.record(base + s as u64, Subset::Squeezed, params, state)
                })
                .collect();
            records.extend(batch?);
        }
        records.truncate(count);
        Ok(records)
    }
}

/// Normalized `alpha |GHZ> + (1 - alpha) |D_N^(k)>`.
pub fn ghz_dicke_state(n_qubits: usize, alpha: f64, k: usize) -> Result<SymmetricState> {
    let ghz = SymmetricState::ghz(n_qubits)?;
    let dicke = SymmetricState::dicke_basis(n_qubits, k)?;
    let amps = ghz
        .dicke()
        .iter()
        .zip(dicke.dicke())
        .map(|(g, d)| g * alpha + d * (1.0 - alpha))
        .collect();
    SymmetricState::normalized(amps)
}

pub fn gen_uniform(n_states: usize, n_qubits: usize, seed: u64) -> Result<Vec<DatasetRecord>> {
    DatasetBuilder::new(n_qubits, DEFAULT_Q_MAX, seed).uniform(n_states, 0)
}

pub fn gen_degenerate(n_states: usize, n_qubits: usize, seed: u64) -> Result<Vec<DatasetRecord>> {
    DatasetBuilder::new(n_qubits, DEFAULT_Q_MAX, seed).degenerate(n_states, 0)
}

pub fn gen_ghz_dicke(n_states: usize, n_qubits: usize, seed: u64) -> Result<Vec<DatasetRecord>> {
    DatasetBuilder::new(n_qubits, DEFAULT_Q_MAX, seed).ghz_dicke(n_states, 0)
}

pub fn gen_squeezed(
    n_trajectories: usize,
    n_qubits: usize,
    seed: u64,
    steps: usize,
    dt: f64,
) -> Result<Vec<DatasetRecord>> {
    DatasetBuilder::new(n_qubits, DEFAULT_Q_MAX, seed).squeezed(n_trajectories * steps, steps, dt, 0)
}

/// Random half/half split within each subset; both halves sorted by id.
pub fn split_dataset(records: &[DatasetRecord], seed: u64) -> Result<(Vec<DatasetRecord>, Vec<DatasetRecord>)> {
    let mut by_subset: BTreeMap<Subset, Vec<&DatasetRecord>> = BTreeMap::new();
    for r in records {
        by_subset.entry(r.subset).or_default().push(r);
    }
    let mut train = Vec::with_capacity(records.len() / 2);
    let mut test = Vec::with_capacity(records.len() / 2);
    for (subset, mut group) in by_subset {
        if group.len() % 2 != 0 {
            return Err(Error::InvalidInput(format!(
                "subset {} has an odd number of records ({})",
                subset.as_str(),
                group.len()
            )));
        }
        group.sort_by_key(|r| r.id);
        let mut rng = substream_rng(seed, &format!("split/{}", subset.as_str()), 0);
        group.shuffle(&mut rng);
        let half = group.len() / 2;
        train.extend(group[..half].iter().map(|r| (*r).clone()));
        test.extend(group[half..].iter().map(|r| (*r).clone()));
    }
    train.sort_by_key(|r| r.id);
    test.sort_by_key(|r| r.id);
    Ok((train, test))
}

pub fn write_jsonl(path: &Path, records: &[DatasetRecord]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_jsonl(path: &Path) -> Result<Vec<DatasetRecord>> {
    let reader = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: DatasetRecord = serde_json::from_str(&line)
            .map_err(|e| Error::Schema(format!("{}:{}: {e}", path.display(), lineno + 1)))?;
        out.push(rec);
    }
    Ok(out)
}

/// Sidecar describing how a dataset directory was produced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub schema_version: u32,
    pub generator_version: String,
    pub seed: u64,
    pub n_qubits: usize,
    pub q_max: usize,
    /// Records generated per subset, before splitting.
    pub sizes: BTreeMap<String, usize>,
    /// Logical name (train, test, squeezed) to file name.
    pub files: BTreeMap<String, String>,
}

impl Manifest {
    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        serde_json::to_writer_pretty(&mut w, self)?;
        w.write_all(b"\n")?;
        w.flush()?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let m: Manifest = serde_json::from_reader(BufReader::new(File::open(path)?))
            .map_err(|e| Error::Schema(format!("{}: {e}", path.display())))?;
        if m.schema_version != SCHEMA_VERSION {
            return Err(Error::Schema(format!(
                "{}: schema version {} (expected {SCHEMA_VERSION})",
                path.display(),
                m.schema_version
            )));
        }
        Ok(m)
    }
}
