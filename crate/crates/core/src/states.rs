//! Named and random quantum states, purification, and the JSON state format.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qmat::{self, CMatrix, DensityMatrix, QmatError, Tolerances, C64, ZERO};

/// Norm tolerance for pure states.
pub const PURE_NORM_TOL: f64 = 1e-12;

/// Largest total dimension accepted from external input.
pub const MAX_DIM: usize = 1 << 10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StateError {
    #[error("need at least 2 qubits, got {0}")]
    TooFewQubits(usize),
    #[error("invalid subsystem dimensions {0:?}")]
    BadDims(Vec<usize>),
    #[error("rank {rank} must lie in 1..={dim}")]
    BadRank { rank: usize, dim: usize },
    #[error("mixing weight {0} outside [0, 1]")]
    BadWeight(f64),
    #[error("amplitudes have squared norm {norm_sq}, deviating from 1 by {deviation:e}")]
    NotNormalized { norm_sq: f64, deviation: f64 },
    #[error("amplitude count {got} does not match dimension {expected}")]
    AmplitudeCount { expected: usize, got: usize },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("schema error: {0}")]
    Schema(String),
    #[error(transparent)]
    Matrix(#[from] QmatError),
}

/// Normalized state vector on a tensor product of subsystems.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: Vec<C64>,
    dims: Vec<usize>,
}

fn checked_product(dims: &[usize]) -> Option<usize> {
    dims.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d))
}

impl PureState {
    pub fn new(dims: Vec<usize>, amplitudes: Vec<C64>) -> Result<Self, StateError> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(StateError::BadDims(dims));
        }
        let expected = checked_product(&dims).ok_or_else(|| StateError::BadDims(dims.clone()))?;
        if amplitudes.len() != expected {
            return Err(StateError::AmplitudeCount {
                expected,
                got: amplitudes.len(),
            });
        }
        let norm_sq: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        let deviation = (norm_sq - 1.0).abs();
        if !(deviation <= PURE_NORM_TOL) {
            return Err(StateError::NotNormalized { norm_sq, deviation });
        }
        Ok(Self { amplitudes, dims })
    }

    /// Normalizes `amplitudes` before construction.
    pub fn normalized(dims: Vec<usize>, mut amplitudes: Vec<C64>) -> Result<Self, StateError> {
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(StateError::NotNormalized {
                norm_sq: norm * norm,
                deviation: (norm * norm - 1.0).abs(),
            });
        }
        amplitudes.iter_mut().for_each(|z| *z /= norm);
        Self::new(dims, amplitudes)
    }

    /// Computational basis state with the given digit per subsystem.
    pub fn basis(dims: &[usize], digits: &[usize]) -> Result<Self, StateError> {
        if digits.len() != dims.len() || digits.iter().zip(dims).any(|(&x, &d)| x >= d) {
            return Err(StateError::BadDims(dims.to_vec()));
        }
        let dim = checked_product(dims).ok_or_else(|| StateError::BadDims(dims.to_vec()))?;
        let index = digits.iter().zip(dims).fold(0, |acc, (&x, &d)| acc * d + x);
        let mut amps = vec![ZERO; dim];
        amps[index] = C64::new(1.0, 0.0);
        Self::new(dims.to_vec(), amps)
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn n_subsystems(&self) -> usize {
        self.dims.len()
    }

    pub fn is_qubits(&self) -> bool {
        self.dims.iter().all(|&d| d == 2)
    }

    /// |psi> (x) |phi>.
    pub fn tensor(&self, other: &PureState) -> PureState {
        let mut amps = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amplitudes {
            for b in &other.amplitudes {
                amps.push(a * b);
            }
        }
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        PureState {
            amplitudes: amps,
            dims,
        }
    }

    pub fn projector(&self) -> DensityMatrix {
        let m = CMatrix::outer(&self.dims, &self.amplitudes).expect("length matches dims");
        DensityMatrix::from_trusted(m)
    }

    /// Reduced density matrix over `keep` (original subsystem order).
    pub fn reduce(&self, keep: &[usize]) -> Result<DensityMatrix, QmatError> {
        qmat::reduce_vector(&self.amplitudes, &self.dims, keep).map(DensityMatrix::from_trusted)
    }

    /// Applies a single-subsystem operator `u` to subsystem `site`.
    pub fn apply_local(&self, site: usize, u: &CMatrix) -> Result<PureState, StateError> {
        if site >= self.dims.len() || u.dim() != self.dims[site] {
            return Err(StateError::BadDims(self.dims.clone()));
        }
        let d = self.dims[site];
        let inner: usize = self.dims[site + 1..].iter().product();
        let outer: usize = self.dims[..site].iter().product();
        let mut out = vec![ZERO; self.dim()];
        for o in 0..outer {
            for i in 0..d {
                for j in 0..d {
                    let uij = u[(i, j)];
                    for r in 0..inner {
                        out[(o * d + i) * inner + r] += uij * self.amplitudes[(o * d + j) * inner + r];
                    }
                }
            }
        }
        PureState::normalized(self.dims.clone(), out)
    }

    /// Reorders subsystems: new subsystem `k` is old subsystem `perm[k]`.
    pub fn permute(&self, perm: &[usize]) -> Result<PureState, StateError> {
        let n = self.dims.len();
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
            return Err(StateError::BadDims(self.dims.clone()));
        }
        let new_dims: Vec<usize> = perm.iter().map(|&p| self.dims[p]).collect();
        let mut old_strides = vec![1usize; n];
        for s in (0..n.saturating_sub(1)).rev() {
            old_strides[s] = old_strides[s + 1] * self.dims[s + 1];
        }
        let mut out = vec![ZERO; self.dim()];
        let mut digits = vec![0usize; n];
        for (idx, slot) in out.iter_mut().enumerate() {
            let mut rem = idx;
            for k in (0..n).rev() {
                digits[k] = rem % new_dims[k];
                rem /= new_dims[k];
            }
            let old: usize = (0..n).map(|k| digits[k] * old_strides[perm[k]]).sum();
            *slot = self.amplitudes[old];
        }
        Ok(PureState {
            amplitudes: out,
            dims: new_dims,
        })
    }
}

/// Split of the subsystems into a first group and the rest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bipartition {
    first: Vec<usize>,
}

impl Bipartition {
    pub fn new(first: impl Into<Vec<usize>>) -> Self {
        Self { first: first.into() }
    }

    /// Sorted first group, checked against `count` subsystems: nonempty,
    /// proper, in range, no repeats.
    pub fn first_group(&self, count: usize) -> Result<Vec<usize>, String> {
        if self.first.is_empty() {
            return Err("first group is empty".into());
        }
        let mut g = self.first.clone();
        g.sort_unstable();
        if g.windows(2).any(|w| w[0] == w[1]) {
            return Err(format!("repeated subsystem in {:?}", self.first));
        }
        if let Some(&bad) = g.iter().find(|&&i| i >= count) {
            return Err(format!("subsystem {bad} out of range for {count} subsystems"));
        }
        if g.len() == count {
            return Err("second group is empty".into());
        }
        Ok(g)
    }

    /// Both groups, each sorted.
    pub fn groups(&self, count: usize) -> Result<(Vec<usize>, Vec<usize>), String> {
        let first = self.first_group(count)?;
        let rest = (0..count).filter(|i| !first.contains(i)).collect();
        Ok((first, rest))
    }
}

/// Per-sample random stream: a ChaCha20 generator keyed by `master` and
/// positioned on stream `stream_index`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Seed {
    pub master: u64,
    pub stream_index: u64,
}

impl Seed {
    pub fn new(master: u64, stream_index: u64) -> Self {
        Self {
            master,
            stream_index,
        }
    }

    pub fn rng(&self) -> ChaCha20Rng {
        let mut rng = ChaCha20Rng::seed_from_u64(self.master);
        rng.set_stream(self.stream_index);
        rng
    }

    /// Seed for a sub-task; keeps the stream layout of the parent disjoint
    /// from the child's by re-keying the master.
    pub fn child(&self, index: u64) -> Seed {
        let mix = self
            .master
            .wrapping_mul(0x9E37_79B9_7F4A_7C15)
            .rotate_left(17)
            ^ self.stream_index.wrapping_mul(0xD1B5_4A32_D192_ED03);
        Seed::new(mix, index)
    }
}

pub fn ghz(n: usize) -> Result<PureState, StateError> {
    if n < 2 {
        return Err(StateError::TooFewQubits(n));
    }
    let dim = 1usize << n;
    let mut amps = vec![ZERO; dim];
    let s = std::f64::consts::FRAC_1_SQRT_2;
    amps[0] = C64::new(s, 0.0);
    amps[dim - 1] = C64::new(s, 0.0);
    PureState::new(vec![2; n], amps)
}

/// Uniform superposition of single-excitation basis states, real positive amplitudes.
pub fn w_state(n: usize) -> Result<PureState, StateError> {
    if n < 2 {
        return Err(StateError::TooFewQubits(n));
    }
    let dim = 1usize << n;
    let a = C64::new(1.0 / (n as f64).sqrt(), 0.0);
    let mut amps = vec![ZERO; dim];
    for k in 0..n {
        amps[1 << k] = a;
    }
    PureState::new(vec![2; n], amps)
}

fn gaussian_vector(len: usize, rng: &mut ChaCha20Rng) -> Vec<C64> {
    (0..len)
        .map(|_| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            C64::new(re, im)
        })
        .collect()
}

/// Haar-random pure state: i.i.d. standard complex Gaussians, normalized.
pub fn haar_random_pure(dims: &[usize], seed: Seed) -> Result<PureState, StateError> {
    if dims.is_empty() || dims.iter().any(|&d| d < 2) {
        return Err(StateError::BadDims(dims.to_vec()));
    }
    let dim = checked_product(dims)
        .filter(|&d| d <= MAX_DIM * MAX_DIM)
        .ok_or_else(|| StateError::BadDims(dims.to_vec()))?;
    let amps = gaussian_vector(dim, &mut seed.rng());
    PureState::normalized(dims.to_vec(), amps)
}

/// Random density matrix of rank at most `rank`, induced by tracing a
/// Haar-random state on `dim x rank`.
pub fn random_mixed(dim: usize, rank: usize, seed: Seed) -> Result<DensityMatrix, StateError> {
    random_mixed_on(&[dim], rank, seed)
}

/// As [`random_mixed`] with explicit subsystem dimensions.
pub fn random_mixed_on(dims: &[usize], rank: usize, seed: Seed) -> Result<DensityMatrix, StateError> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(StateError::BadDims(dims.to_vec()));
    }
    let dim = checked_product(dims)
        .filter(|&d| d <= MAX_DIM)
        .ok_or_else(|| StateError::BadDims(dims.to_vec()))?;
    if rank == 0 || rank > dim {
        return Err(StateError::BadRank { rank, dim });
    }
    let amps = gaussian_vector(dim * rank, &mut seed.rng());
    let mut full_dims = dims.to_vec();
    full_dims.push(rank);
    let psi = PureState::normalized(full_dims, amps)?;
    let keep: Vec<usize> = (0..dims.len()).collect();
    if rank == 1 {
        // Ancilla of dimension 1: nothing to trace.
        let m = CMatrix::outer(dims, psi.amplitudes())?;
        return Ok(DensityMatrix::from_trusted(m));
    }
    Ok(psi.reduce(&keep)?)
}

/// Eigenvalues at or below this are dropped when purifying.
const PURIFY_RANK_TOL: f64 = 1e-12;

/// Purification on `dims(m) x rank(m)`; reducing onto the original
/// subsystems recovers `m`.
pub fn purify(m: &DensityMatrix) -> Result<PureState, StateError> {
    let eig = qmat::hermitian_eigen(m.as_matrix())?;
    let support: Vec<usize> = (0..eig.values.len())
        .filter(|&j| eig.values[j] > PURIFY_RANK_TOL)
        .collect();
    let r = support.len().max(1);
    let dim = m.dim();
    let mut amps = vec![ZERO; dim * r];
    for (slot, &j) in support.iter().enumerate() {
        let w = eig.values[j].sqrt();
        for i in 0..dim {
            amps[i * r + slot] = eig.vectors[(i, j)] * w;
        }
    }
    let mut dims = m.subsystem_dims().to_vec();
    dims.push(r);
    PureState::normalized(dims, amps)
}

/// p |Phi+><Phi+| + (1 - p) I/4.
pub fn werner(p: f64) -> Result<DensityMatrix, StateError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(StateError::BadWeight(p));
    }
    let bell = ghz(2)?.projector().into_matrix();
    let m = bell
        .scale(p)
        .add(&CMatrix::identity(&[2, 2]).scale((1.0 - p) / 4.0))?;
    Ok(qmat::validate_density(m, &Tolerances::default())?)
}

/// Parsed contents of a state file.
#[derive(Debug, Clone, PartialEq)]
pub enum StateInput {
    Pure(PureState),
    Mixed(DensityMatrix),
}

impl StateInput {
    pub fn dims(&self) -> &[usize] {
        match self {
            StateInput::Pure(p) => p.dims(),
            StateInput::Mixed(m) => m.subsystem_dims(),
        }
    }

    pub fn to_density(&self) -> DensityMatrix {
        match self {
            StateInput::Pure(p) => p.projector(),
            StateInput::Mixed(m) => m.clone(),
        }
    }
}

/// On-disk layout: `dims` plus either `re`/`im` amplitudes or row-major
/// `matrix_re`/`matrix_im` entries.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateJson {
    pub dims: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub re: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix_re: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix_im: Option<Vec<f64>>,
}

fn complex_entries(re: &[f64], im: Option<&[f64]>, what: &str) -> Result<Vec<C64>, StateError> {
    if let Some(im) = im {
        if im.len() != re.len() {
            return Err(StateError::Schema(format!(
                "{what}: real part has {} entries, imaginary part {}",
                re.len(),
                im.len()
            )));
        }
    }
    let out: Vec<C64> = re
        .iter()
        .enumerate()
        .map(|(i, &r)| C64::new(r, im.map_or(0.0, |im| im[i])))
        .collect();
    if out.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(StateError::Schema(format!("{what}: non-finite entry")));
    }
    Ok(out)
}

impl StateJson {
    pub fn into_state(self) -> Result<StateInput, StateError> {
        if self.dims.is_empty() || self.dims.contains(&0) {
            return Err(StateError::Schema(format!("bad dims {:?}", self.dims)));
        }
        let dim = checked_product(&self.dims)
            .filter(|&d| d <= MAX_DIM)
            .ok_or_else(|| StateError::Schema(format!("dims {:?} exceed {MAX_DIM}", self.dims)))?;
        match (self.re, self.matrix_re) {
            (Some(re), None) => {
                if self.matrix_im.is_some() {
                    return Err(StateError::Schema("matrix_im given without matrix_re".into()));
                }
                if re.len() != dim {
                    return Err(StateError::Schema(format!(
                        "expected {dim} amplitudes, got {}",
                        re.len()
                    )));
                }
                let amps = complex_entries(&re, self.im.as_deref(), "amplitudes")?;
                PureState::new(self.dims, amps).map(StateInput::Pure).map_err(|e| match e {
                    StateError::NotNormalized { norm_sq, deviation } => StateError::Schema(format!(
                        "amplitudes not normalized: squared norm {norm_sq} deviates from 1 by {deviation:e}"
                    )),
                    other => other,
                })
            }
            (None, Some(mre)) => {
                if self.im.is_some() {
                    return Err(StateError::Schema("im given without re".into()));
                }
                if mre.len() != dim * dim {
                    return Err(StateError::Schema(format!(
                        "expected {} matrix entries, got {}",
                        dim * dim,
                        mre.len()
                    )));
                }
                let entries = complex_entries(&mre, self.matrix_im.as_deref(), "matrix")?;
                let m = CMatrix::new(self.dims, entries)?;
                qmat::validate_density(m, &Tolerances::default())
                    .map(StateInput::Mixed)
                    .map_err(|e| StateError::Schema(format!("not a density matrix: {e}")))
            }
            (Some(_), Some(_)) => Err(StateError::Schema(
                "give either re/im or matrix_re/matrix_im, not both".into(),
            )),
            (None, None) => Err(StateError::Schema("missing re or matrix_re".into())),
        }
    }

    pub fn from_pure(s: &PureState) -> Self {
        Self {
            dims: s.dims().to_vec(),
            re: Some(s.amplitudes().iter().map(|z| z.re).collect()),
            im: Some(s.amplitudes().iter().map(|z| z.im).collect()),
            ..Default::default()
        }
    }

    pub fn from_density(m: &DensityMatrix) -> Self {
        Self {
            dims: m.subsystem_dims().to_vec(),
            matrix_re: Some(m.entries().iter().map(|z| z.re).collect()),
            matrix_im: Some(m.entries().iter().map(|z| z.im).collect()),
            ..Default::default()
        }
    }
}

/// Parses a state file. Never panics on malformed input.
pub fn parse_state_json(text: &str) -> Result<StateInput, StateError> {
    let raw: StateJson = serde_json::from_str(text).map_err(|e| StateError::Parse(e.to_string()))?;
    raw.into_state()
}

pub fn parse_state_bytes(bytes: &[u8]) -> Result<StateInput, StateError> {
    let text = std::str::from_utf8(bytes).map_err(|e| StateError::Parse(e.to_string()))?;
    parse_state_json(text)
}
