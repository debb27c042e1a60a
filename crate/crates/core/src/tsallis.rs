//! Tsallis-q entanglement: the bridge function f_q, closed forms on two
//! qubits, and a convex-roof search over pure-state decompositions.
//!
//! Every size-k decomposition of a rank-r state is obtained from a k x r
//! isometry applied to the subnormalized eigenvectors sqrt(lambda_j)|e_j>.
//! The search starts from a random isometry and improves it with complex
//! Givens rotations acting on pairs of ensemble members. Only the two
//! rotated members change, so each trial costs two reduced-state entropies.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::concurrence::{self, ConcurrenceError, WoottersSpectrum};
use crate::entropy::{self, QParam};
use crate::qmat::{self, CMatrix, DensityMatrix, QmatError, C64, ZERO};
use crate::states::{Bipartition, PureState, Seed};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TsallisError {
    #[error("argument {0} outside [0, 1]")]
    XOutOfRange(f64),
    #[error("q = {0} outside [1, 4]")]
    QOutOfFqRange(f64),
    #[error("arguments ({x}, {y}) need x, y >= 0 and x^2 + y^2 <= 1")]
    ArgOutOfRange { x: f64, y: f64 },
    #[error("dimension {0} exceeds the convex-roof limit of {MAX_ROOF_DIM}")]
    TooLarge(usize),
    #[error("ensemble size {size} must lie in {rank}..={max}")]
    BadEnsembleSize { size: usize, rank: usize, max: usize },
    #[error("bad partition: {0}")]
    BadPartition(String),
    #[error(transparent)]
    Concurrence(#[from] ConcurrenceError),
    #[error(transparent)]
    Matrix(#[from] QmatError),
}

/// Slack allowed on arguments of f_q that come out of floating-point
/// pipelines (e.g. a concurrence of 1 + 2e-16).
const ARG_SLACK: f64 = 1e-9;

fn require_fq_range(q: QParam) -> Result<(), TsallisError> {
    if !q.in_fq_range() {
        return Err(TsallisError::QOutOfFqRange(q.value()));
    }
    Ok(())
}

/// Probabilities ((1 + s)/2, (1 - s)/2) with s = sqrt(1 - x^2), the smaller
/// one evaluated without cancellation.
fn binary_split(x: f64) -> (f64, f64) {
    let s = ((1.0 - x) * (1.0 + x)).max(0.0).sqrt();
    let small = x * x / (2.0 * (1.0 + s));
    ((1.0 + s) / 2.0, small)
}

/// f_q(x) = [1 - ((1 + s)/2)^q - ((1 - s)/2)^q] / (q - 1), s = sqrt(1 - x^2).
/// Near q = 1 returns the binary entropy (nats) of the same split.
pub fn f_q(x: f64, q: QParam) -> Result<f64, TsallisError> {
    require_fq_range(q)?;
    if !(-ARG_SLACK..=1.0 + ARG_SLACK).contains(&x) {
        return Err(TsallisError::XOutOfRange(x));
    }
    let (a, b) = binary_split(x.clamp(0.0, 1.0));
    Ok(entropy::tsallis_from_spectrum(&[a, b], q))
}

/// Sign f_q(sqrt(x^2 + y^2)) - f_q(x) - f_q(y) must have for a given q.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GapRegime {
    /// q = 2 or 3: gap vanishes.
    Zero,
    /// 2 < q < 3: gap >= 0.
    NonNegative,
    /// 1 <= q < 2 or 3 < q <= 4: gap <= 0.
    NonPositive,
}

impl GapRegime {
    pub fn for_q(q: QParam) -> Option<Self> {
        if !q.in_fq_range() {
            None
        } else if q.in_monogamy_set() {
            Some(GapRegime::Zero)
        } else if q.value() > 2.0 && q.value() < 3.0 {
            Some(GapRegime::NonNegative)
        } else {
            Some(GapRegime::NonPositive)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FqGap {
    pub gap: f64,
    pub regime: GapRegime,
}

impl FqGap {
    /// Whether the gap has the sign its regime requires, within `tol`.
    pub fn certified(&self, tol: f64) -> bool {
        match self.regime {
            GapRegime::Zero => self.gap.abs() <= tol,
            GapRegime::NonNegative => self.gap >= -tol,
            GapRegime::NonPositive => self.gap <= tol,
        }
    }
}

pub fn fq_additivity_gap(x: f64, y: f64, q: QParam) -> Result<FqGap, TsallisError> {
    require_fq_range(q)?;
    let r2 = x * x + y * y;
    if !(x >= 0.0 && y >= 0.0 && r2 <= 1.0 + 1e-12) {
        return Err(TsallisError::ArgOutOfRange { x, y });
    }
    let gap = f_q(r2.sqrt(), q)? - f_q(x, q)? - f_q(y, q)?;
    let regime = GapRegime::for_q(q).expect("q checked above");
    Ok(FqGap { gap, regime })
}

/// T_q of a pure state across `part`: S_q of either reduction.
pub fn tsallis_ent_pure(s: &PureState, part: &Bipartition, q: QParam) -> Result<f64, TsallisError> {
    let rho = concurrence::smaller_side_reduction(s, part).map_err(|e| match e {
        ConcurrenceError::BadPartition(msg) => TsallisError::BadPartition(msg),
        other => other.into(),
    })?;
    Ok(entropy::tsallis_entropy(&rho, q))
}

/// T_q(rho_{A|B}) = f_q(C(rho_{A|B})) for 1 <= q <= 4.
pub fn tsallis_ent_2q(m: &DensityMatrix, q: QParam) -> Result<f64, TsallisError> {
    require_fq_range(q)?;
    f_q(concurrence::concurrence_2q(m)?, q)
}

/// f_q(C^a) together with whether it is known to equal the TEoA.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TeoaBound {
    pub value: f64,
    pub exact: bool,
}

/// C^a within this of 0 or 1 pins the TEoA to f_q(C^a).
const TEOA_EDGE_TOL: f64 = 1e-12;

/// f_q(C^a), a lower bound on the TEoA for 1 <= q <= 4.
///
/// The bound is flagged exact only where it provably is: pure input, C^a = 0
/// (every member is separable) and C^a = 1 (f_q(1) is the largest T_q of any
/// two-qubit pure state). For generic mixed states it is strict, including
/// at q = 2 and q = 3: there T^a_2 = max sum_i p_i C_i^2 / 2, which
/// generally exceeds (C^a)^2 / 2.
pub fn teoa_2q_bound(m: &DensityMatrix, q: QParam) -> Result<TeoaBound, TsallisError> {
    require_fq_range(q)?;
    let spec = concurrence::wootters_spectrum(m)?;
    teoa_from_spectrum(&spec, m.rank(ROOF_RANK_TOL) == 1, q)
}

/// [`teoa_2q_bound`] from a precomputed Wootters spectrum; `pure` says the
/// two-qubit state has rank one.
pub fn teoa_from_spectrum(spec: &WoottersSpectrum, pure: bool, q: QParam) -> Result<TeoaBound, TsallisError> {
    require_fq_range(q)?;
    let ca = spec.assistance();
    Ok(TeoaBound {
        value: f_q(ca, q)?,
        exact: pure || ca <= TEOA_EDGE_TOL || ca >= 1.0 - TEOA_EDGE_TOL,
    })
}

/// Wootters entanglement of formation in nats.
pub fn eof_limit(m: &DensityMatrix) -> Result<f64, TsallisError> {
    f_q(concurrence::concurrence_2q(m)?, QParam::new(1.0).expect("1 is valid"))
}

pub const MAX_ROOF_DIM: usize = 16;

/// Eigenvalues at or below this are outside the support when building the
/// eigen-ensemble.
pub(crate) const ROOF_RANK_TOL: f64 = 1e-12;

/// Pair moves must improve the objective by more than this, so round-off
/// noise cannot keep a line search alive.
const GAIN_FLOOR: f64 = 1e-15;

/// Line-search rounds per pair per sweep.
const MAX_PAIR_TRIALS: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RoofMode {
    Min,
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundDirection {
    UpperBoundOnMin,
    LowerBoundOnMax,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoofOptions {
    /// Ensemble size; `None` means rank + 2.
    pub ensemble_size: Option<usize>,
    pub max_ensemble: usize,
    pub restarts: usize,
    /// Maximum number of sweeps over member pairs.
    pub max_iters: usize,
    /// A sweep that improves the objective by less than this ends a restart.
    pub conv_tol: f64,
    /// Smallest rotation angle tried in the pair line search.
    pub min_step: f64,
    pub seed: Seed,
}

impl Default for RoofOptions {
    fn default() -> Self {
        Self {
            ensemble_size: None,
            max_ensemble: 32,
            restarts: 32,
            max_iters: 500,
            conv_tol: 1e-8,
            min_step: 1e-6,
            seed: Seed::new(0x5eed, 0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoofResult {
    pub value: f64,
    pub mode: RoofMode,
    pub ensemble_size: usize,
    pub iterations_used: usize,
    pub converged: bool,
    pub bound_direction: BoundDirection,
    /// Subnormalized members |psi_i> (with p_i = <psi_i|psi_i>) of the best
    /// ensemble found. Their outer products sum to the input state.
    #[serde(skip)]
    pub ensemble: Vec<Vec<C64>>,
}

/// Evaluates p * T_q(psi / sqrt(p)) for subnormalized vectors psi.
struct TermEvaluator {
    kept: Vec<usize>,
    traced: Vec<usize>,
    q: QParam,
}

impl TermEvaluator {
    fn new(dims: &[usize], part: &Bipartition, q: QParam) -> Result<Self, TsallisError> {
        let (first, rest) = part.groups(dims.len()).map_err(TsallisError::BadPartition)?;
        let size = |g: &[usize]| g.iter().map(|&i| dims[i]).product::<usize>();
        let keep = if size(&first) <= size(&rest) { first } else { rest };
        let sp = qmat::split(dims, &keep);
        Ok(Self {
            kept: sp.kept,
            traced: sp.traced,
            q,
        })
    }

    fn term(&self, v: &[C64]) -> f64 {
        let p: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if p <= 1e-300 {
            return 0.0;
        }
        let dk = self.kept.len();
        if dk == 2 {
            let (k0, k1) = (self.kept[0], self.kept[1]);
            let (mut s00, mut s11, mut s01) = (0.0, 0.0, ZERO);
            for &t in &self.traced {
                let (a, b) = (v[k0 + t], v[k1 + t]);
                s00 += a.norm_sqr();
                s11 += b.norm_sqr();
                s01 += a * b.conj();
            }
            let det = (s00 * s11 - s01.norm_sqr()).max(0.0);
            let half = p / 2.0;
            let big = half + (half * half - det).max(0.0).sqrt();
            let small = if big > 0.0 { det / big } else { 0.0 };
            return p * entropy::tsallis_from_spectrum(&[big / p, small / p], self.q);
        }
        let mut sigma = CMatrix::zeros(&[dk]);
        for (a, &ka) in self.kept.iter().enumerate() {
            for (b, &kb) in self.kept.iter().enumerate().skip(a) {
                let mut acc = ZERO;
                for &t in &self.traced {
                    acc += v[ka + t] * v[kb + t].conj();
                }
                sigma[(a, b)] = acc;
                sigma[(b, a)] = acc.conj();
            }
        }
        let spec: Vec<f64> = qmat::hermitian_eigenvalues(&sigma)
            .into_iter()
            .map(|x| (x / p).max(0.0))
            .collect();
        p * entropy::tsallis_from_spectrum(&spec, self.q)
    }
}

struct RestartOutcome {
    value: f64,
    members: Vec<Vec<C64>>,
    sweeps: usize,
    converged: bool,
}

/// Random k x r matrix with orthonormal columns.
fn random_isometry(k: usize, r: usize, seed: Seed) -> Vec<Vec<C64>> {
    let mut rng = seed.rng();
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(r);
    while cols.len() < r {
        let mut v: Vec<C64> = (0..k)
            .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        for c in &cols {
            let overlap: C64 = c.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            v.iter_mut().zip(c).for_each(|(x, a)| *x -= overlap * a);
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-8 {
            v.iter_mut().for_each(|x| *x /= norm);
            cols.push(v);
        }
    }
    cols
}

fn run_restart(
    eval: &TermEvaluator,
    basis: &[Vec<C64>],
    k: usize,
    sign: f64,
    opts: &RoofOptions,
    seed: Seed,
) -> RestartOutcome {
    let r = basis.len();
    let dim = basis[0].len();
    let iso = random_isometry(k, r, seed);
    let mut members: Vec<Vec<C64>> = (0..k)
        .map(|i| {
            let mut v = vec![ZERO; dim];
            for (j, e) in basis.iter().enumerate() {
                let u = iso[j][i];
                v.iter_mut().zip(e).for_each(|(x, y)| *x += u * y);
            }
            v
        })
        .collect();
    // Objective is sign * value, minimized.
    let mut terms: Vec<f64> = members.iter().map(|v| sign * eval.term(v)).collect();
    let mut total: f64 = terms.iter().sum();

    let r2 = std::f64::consts::FRAC_1_SQRT_2;
    let phases = [C64::new(1.0, 0.0), C64::new(0.0, 1.0), C64::new(r2, r2), C64::new(r2, -r2)];
    let mut trial_a = vec![ZERO; dim];
    let mut trial_b = vec![ZERO; dim];
    // Pattern search per pair: the step doubles after a success and halves
    // after a failure. Each pair resumes from its last accepted step.
    let mut steps = vec![std::f64::consts::FRAC_PI_4; k * k];
    let mut sweeps = 0;
    let mut converged = false;
    while sweeps < opts.max_iters {
        sweeps += 1;
        let before = total;
        for a in 0..k {
            for b in a + 1..k {
                let mut h = steps[a * k + b];
                let mut last_ok = opts.min_step;
                let mut trials = 0;
                while h >= opts.min_step && trials < MAX_PAIR_TRIALS {
                    trials += 1;
                    let current = terms[a] + terms[b];
                    let mut best: Option<(f64, f64, C64, f64, f64)> = None;
                    for angle in [h, -h] {
                        let (s, c) = angle.sin_cos();
                        for &ph in &phases {
                            #[allow(clippy::needless_range_loop)]
                            for i in 0..dim {
                                let (x, y) = (members[a][i], members[b][i]);
                                trial_a[i] = x * c - ph * y * s;
                                trial_b[i] = ph.conj() * x * s + y * c;
                            }
                            let ta = sign * eval.term(&trial_a);
                            let tb = sign * eval.term(&trial_b);
                            if ta + tb < current - GAIN_FLOOR && best.is_none_or(|bst| ta + tb < bst.0) {
                                best = Some((ta + tb, angle, ph, ta, tb));
                            }
                        }
                    }
                    match best {
                        Some((_, angle, ph, ta, tb)) => {
                            let (s, c) = angle.sin_cos();
                            let mut ua = std::mem::take(&mut members[a]);
                            for (x, y) in ua.iter_mut().zip(members[b].iter_mut()).take(dim) {
                                (*x, *y) = (*x * c - ph * *y * s, ph.conj() * *x * s + *y * c);
                            }
                            members[a] = ua;
                            for idx in [a, b] {
                                let v = &mut members[idx];
                                // Keep vanishing members out of subnormal range.
                                if v.iter().map(|z| z.norm_sqr()).sum::<f64>() < 1e-200 {
                                    v.iter_mut().for_each(|z| *z = ZERO);
                                }
                            }
                            terms[a] = ta;
                            terms[b] = tb;
                            last_ok = h;
                            h = (2.0 * h).min(std::f64::consts::FRAC_PI_4);
                        }
                        None => h *= 0.5,
                    }
                }
                steps[a * k + b] = last_ok;
            }
        }
        total = terms.iter().sum();
        if before - total < opts.conv_tol {
            converged = true;
            break;
        }
    }
    RestartOutcome {
        value: sign * total,
        members,
        sweeps,
        converged,
    }
}

/// Subnormalized eigenvectors sqrt(lambda_j)|e_j> spanning the support.
fn eigen_ensemble(m: &DensityMatrix) -> Result<Vec<Vec<C64>>, TsallisError> {
    let eig = qmat::hermitian_eigen(m.as_matrix())?;
    Ok((0..m.dim())
        .filter(|&j| eig.values[j] > ROOF_RANK_TOL)
        .map(|j| {
            let w = eig.values[j].sqrt();
            eig.vector(j).into_iter().map(|z| z * w).collect()
        })
        .collect())
}

/// Average T_q across `part` over the eigen-ensemble of `m`. Any single
/// decomposition bounds the convex roof from above and the TEoA from below.
pub fn eigen_ensemble_value(m: &DensityMatrix, part: &Bipartition, q: QParam) -> Result<f64, TsallisError> {
    if m.dim() > MAX_ROOF_DIM {
        return Err(TsallisError::TooLarge(m.dim()));
    }
    let eval = TermEvaluator::new(m.subsystem_dims(), part, q)?;
    Ok(eigen_ensemble(m)?.iter().map(|v| eval.term(v)).sum())
}

/// Best ensemble average of T_q across `part` found by randomized local
/// search. In `Min` mode the result bounds the convex roof from above; in
/// `Max` mode it bounds the TEoA from below.
pub fn convex_roof(
    m: &DensityMatrix,
    part: &Bipartition,
    q: QParam,
    mode: RoofMode,
    opts: &RoofOptions,
) -> Result<RoofResult, TsallisError> {
    let dim = m.dim();
    if dim > MAX_ROOF_DIM {
        return Err(TsallisError::TooLarge(dim));
    }
    let eval = TermEvaluator::new(m.subsystem_dims(), part, q)?;
    let bound_direction = match mode {
        RoofMode::Min => BoundDirection::UpperBoundOnMin,
        RoofMode::Max => BoundDirection::LowerBoundOnMax,
    };

    let basis = eigen_ensemble(m)?;
    let rank = basis.len();
    let k = opts.ensemble_size.unwrap_or(rank + 2);
    if k < rank || k > opts.max_ensemble || k == 0 {
        return Err(TsallisError::BadEnsembleSize {
            size: k,
            rank,
            max: opts.max_ensemble,
        });
    }

    if rank == 1 {
        return Ok(RoofResult {
            value: eval.term(&basis[0]),
            mode,
            ensemble_size: 1,
            iterations_used: 0,
            converged: true,
            bound_direction,
            ensemble: basis,
        });
    }

    let sign = match mode {
        RoofMode::Min => 1.0,
        RoofMode::Max => -1.0,
    };
    let outcomes: Vec<RestartOutcome> = (0..opts.restarts.max(1))
        .into_par_iter()
        .map(|i| run_restart(&eval, &basis, k, sign, opts, opts.seed.child(i as u64)))
        .collect();

    // Fold in restart order so ties resolve the same way every run.
    let mut best = &outcomes[0];
    for o in &outcomes[1..] {
        if sign * o.value < sign * best.value {
            best = o;
        }
    }
    Ok(RoofResult {
        value: best.value,
        mode,
        ensemble_size: k,
        iterations_used: outcomes.iter().map(|o| o.sweeps).sum(),
        converged: best.converged,
        bound_direction,
        ensemble: best.members.clone(),
    })
}

/// Lower bound on the TEoA of a two-qubit state: f_q(C^a), or when it is
/// not exact and `refine` is given, the larger of f_q(C^a) and a
/// convex-roof maximum.
pub fn teoa_lower_bound(
    m: &DensityMatrix,
    q: QParam,
    refine: Option<&RoofOptions>,
) -> Result<TeoaBound, TsallisError> {
    let bound = teoa_2q_bound(m, q)?;
    if bound.exact {
        return Ok(bound);
    }
    match refine {
        Some(opts) => {
            let roof = convex_roof(m, &Bipartition::new([0]), q, RoofMode::Max, opts)?;
            Ok(TeoaBound {
                value: bound.value.max(roof.value),
                exact: false,
            })
        }
        None => Ok(bound),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmat::{validate_density, Tolerances};
    use crate::states::{ghz, random_mixed_on, w_state, werner};
    use approx::assert_abs_diff_eq;

    fn q(v: f64) -> QParam {
        QParam::new(v).unwrap()
    }

    #[test]
    fn f_q_values() {
        for v in [1.0, 1.5, 2.0, 3.0, 4.0] {
            assert_eq!(f_q(0.0, q(v)).unwrap(), 0.0);
        }
        assert_abs_diff_eq!(f_q(1.0, q(2.0)).unwrap(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(f_q(1.0, q(3.0)).unwrap(), 3.0 / 8.0, epsilon = 1e-15);
        // sqrt(1 - 4/9) = sqrt(5)/3; f_2 = 1 - ((3 + sqrt5)/6)^2 - ((3 - sqrt5)/6)^2.
        let s5 = 5f64.sqrt();
        let oracle = 1.0 - ((3.0 + s5) / 6.0).powi(2) - ((3.0 - s5) / 6.0).powi(2);
        assert_abs_diff_eq!(oracle, 2.0 / 9.0, epsilon = 1e-15);
        assert_abs_diff_eq!(f_q(2.0 / 3.0, q(2.0)).unwrap(), 2.0 / 9.0, epsilon = 1e-15);
        assert_abs_diff_eq!(f_q(1.0, q(1.0)).unwrap(), std::f64::consts::LN_2, epsilon = 1e-15);

        assert_eq!(f_q(1.2, q(2.0)), Err(TsallisError::XOutOfRange(1.2)));
        assert_eq!(f_q(0.5, q(4.5)), Err(TsallisError::QOutOfFqRange(4.5)));
        assert_eq!(f_q(0.5, q(0.5)), Err(TsallisError::QOutOfFqRange(0.5)));
    }

    #[test]
    fn f_q_monotone_convex() {
        let h = 1e-6;
        for qi in 0..=12 {
            let qq = q(1.0 + 0.25 * qi as f64);
            let grid: Vec<f64> = (0..=1000).map(|i| i as f64 / 1000.0).collect();
            let vals: Vec<f64> = grid.iter().map(|&x| f_q(x, qq).unwrap()).collect();
            for &x in &grid[..1000] {
                let slope = (f_q(x + h, qq).unwrap() - f_q(x, qq).unwrap()) / h;
                assert!(slope > 0.0, "q={} x={x}", qq.value());
            }
            for w in vals.windows(3) {
                assert!(w[0] - 2.0 * w[1] + w[2] >= -1e-9);
            }
        }
    }

    #[test]
    fn additivity_gap_regimes() {
        assert_eq!(fq_additivity_gap(0.4, 0.0, q(2.5)).unwrap().gap, 0.0);
        let n = 50;
        for i in 0..=n {
            for j in 0..=n {
                let (x, y) = (i as f64 / n as f64, j as f64 / n as f64);
                if x * x + y * y > 1.0 {
                    continue;
                }
                let g2 = fq_additivity_gap(x, y, q(2.0)).unwrap();
                assert!(g2.gap.abs() <= 1e-12 && g2.certified(1e-12));
                let g = fq_additivity_gap(x, y, q(2.5)).unwrap();
                assert_eq!(g.regime, GapRegime::NonNegative);
                assert!(g.gap >= -1e-12);
                let g = fq_additivity_gap(x, y, q(1.5)).unwrap();
                assert_eq!(g.regime, GapRegime::NonPositive);
                assert!(g.certified(1e-12));
            }
        }
        assert!(matches!(
            fq_additivity_gap(0.9, 0.9, q(2.0)),
            Err(TsallisError::ArgOutOfRange { .. })
        ));
        assert!(matches!(
            fq_additivity_gap(-0.1, 0.2, q(2.0)),
            Err(TsallisError::ArgOutOfRange { .. })
        ));
    }

    #[test]
    fn pure_and_two_qubit_values() {
        let prod = PureState::basis(&[2, 2, 2], &[0, 1, 0]).unwrap();
        assert_abs_diff_eq!(tsallis_ent_pure(&prod, &Bipartition::new([0]), q(2.0)).unwrap(), 0.0, epsilon = 1e-12);
        let g = ghz(3).unwrap();
        assert_abs_diff_eq!(tsallis_ent_pure(&g, &Bipartition::new([0]), q(2.0)).unwrap(), 0.5, epsilon = 1e-12);
        let w = w_state(3).unwrap();
        assert_abs_diff_eq!(
            tsallis_ent_pure(&w, &Bipartition::new([0, 1]), q(2.0)).unwrap(),
            4.0 / 9.0,
            epsilon = 1e-12
        );

        let bell = ghz(2).unwrap().projector();
        assert_abs_diff_eq!(tsallis_ent_2q(&bell, q(2.0)).unwrap(), 0.5, epsilon = 1e-10);
        assert_abs_diff_eq!(tsallis_ent_2q(&werner(1.0 / 3.0).unwrap(), q(2.0)).unwrap(), 0.0, epsilon = 1e-12);
        let w_ab = w.reduce(&[0, 1]).unwrap();
        assert_abs_diff_eq!(tsallis_ent_2q(&w_ab, q(2.0)).unwrap(), 2.0 / 9.0, epsilon = 1e-10);
        assert_eq!(tsallis_ent_2q(&bell, q(5.0)), Err(TsallisError::QOutOfFqRange(5.0)));
    }

    #[test]
    fn teoa_bounds() {
        let ghz_ab = ghz(3).unwrap().reduce(&[0, 1]).unwrap();
        let b = teoa_2q_bound(&ghz_ab, q(2.0)).unwrap();
        assert_abs_diff_eq!(b.value, 0.5, epsilon = 1e-10);
        assert!(b.exact);
        let p00 = PureState::basis(&[2, 2], &[0, 0]).unwrap().projector();
        for v in [1.5, 2.0, 3.0, 3.5] {
            assert_abs_diff_eq!(teoa_2q_bound(&p00, q(v)).unwrap().value, 0.0, epsilon = 1e-12);
        }
        assert!(teoa_2q_bound(&p00, q(2.5)).unwrap().exact);
        let generic = random_mixed_on(&[2, 2], 2, Seed::new(2, 3)).unwrap();
        assert!(!teoa_2q_bound(&generic, q(2.0)).unwrap().exact);
    }

    #[test]
    fn eof_values() {
        let bell = ghz(2).unwrap().projector();
        assert_abs_diff_eq!(eof_limit(&bell).unwrap(), std::f64::consts::LN_2, epsilon = 1e-10);
        assert_abs_diff_eq!(eof_limit(&werner(0.2).unwrap()).unwrap(), 0.0, epsilon = 1e-12);
        for i in 0..50u64 {
            let m = random_mixed_on(&[2, 2], 2, Seed::new(31, i)).unwrap();
            let e = eof_limit(&m).unwrap();
            for v in [1.0 + 1e-4, 1.0 - 1e-4] {
                // Below q = 1 f_q is outside its validated range; use the formula directly.
                let c = concurrence::concurrence_2q(&m).unwrap();
                let (a, b) = binary_split(c);
                let t = entropy::tsallis_from_spectrum(&[a, b], q(v));
                assert!((t - e).abs() <= 1e-3);
            }
            assert!((tsallis_ent_2q(&m, q(1.0 + 1e-4)).unwrap() - e).abs() <= 1e-3);
        }
    }

    fn quick() -> RoofOptions {
        RoofOptions {
            restarts: 8,
            ..RoofOptions::default()
        }
    }

    #[test]
    fn roof_pure_input() {
        let psi = crate::states::haar_random_pure(&[2, 2], Seed::new(1, 2)).unwrap();
        let want = tsallis_ent_pure(&psi, &Bipartition::new([0]), q(2.0)).unwrap();
        for mode in [RoofMode::Min, RoofMode::Max] {
            let r = convex_roof(&psi.projector(), &Bipartition::new([0]), q(2.0), mode, &quick()).unwrap();
            assert_abs_diff_eq!(r.value, want, epsilon = 1e-12);
            assert_eq!(r.ensemble_size, 1);
            assert!(r.converged);
        }
    }

    #[test]
    fn roof_werner_min() {
        let r = convex_roof(&werner(0.8).unwrap(), &Bipartition::new([0]), q(2.0), RoofMode::Min, &quick()).unwrap();
        let want = f_q(0.7, q(2.0)).unwrap();
        assert!(r.value >= want - 1e-9 && r.value <= want + 1e-3, "{r:?} vs {want}");
        assert_eq!(r.bound_direction, BoundDirection::UpperBoundOnMin);
    }

    #[test]
    fn roof_separable_min_is_zero() {
        let m = validate_density(
            CMatrix::from_diag(&[2, 2], &[0.5, 0.0, 0.0, 0.5]).unwrap(),
            &Tolerances::default(),
        )
        .unwrap();
        let r = convex_roof(&m, &Bipartition::new([0]), q(2.0), RoofMode::Min, &quick()).unwrap();
        assert!(r.value.abs() <= 1e-9, "{r:?}");
        let r = convex_roof(&m, &Bipartition::new([0]), q(2.0), RoofMode::Max, &quick()).unwrap();
        assert!((r.value - 0.5).abs() <= 1e-3, "{r:?}");
    }

    #[test]
    fn roof_errors_and_ordering() {
        let big = random_mixed_on(&[2, 2, 2, 2, 2], 2, Seed::new(0, 0)).unwrap();
        assert_eq!(
            convex_roof(&big, &Bipartition::new([0]), q(2.0), RoofMode::Min, &quick()).unwrap_err(),
            TsallisError::TooLarge(32)
        );
        let m = random_mixed_on(&[2, 2], 3, Seed::new(2, 0)).unwrap();
        let opts = RoofOptions {
            ensemble_size: Some(2),
            ..quick()
        };
        assert!(matches!(
            convex_roof(&m, &Bipartition::new([0]), q(2.0), RoofMode::Min, &opts),
            Err(TsallisError::BadEnsembleSize { .. })
        ));
        let lo = convex_roof(&m, &Bipartition::new([0]), q(2.0), RoofMode::Min, &quick()).unwrap();
        let hi = convex_roof(&m, &Bipartition::new([0]), q(2.0), RoofMode::Max, &quick()).unwrap();
        assert!(lo.value <= hi.value);
        assert!(lo.value >= tsallis_ent_2q(&m, q(2.0)).unwrap() - 1e-9);
        // At q = 2 each pure member contributes p C^2 / 2 <= p C / 2, so the
        // assisted average can never pass C^a / 2.
        let coa = concurrence::coa_2q(&m).unwrap();
        assert!(hi.value <= coa / 2.0 + 1e-9);
        assert!(hi.value >= teoa_2q_bound(&m, q(2.0)).unwrap().value - 1e-3);
    }

    #[test]
    fn roof_ensemble_is_a_decomposition() {
        let m = random_mixed_on(&[2, 2], 3, Seed::new(4, 1)).unwrap();
        for mode in [RoofMode::Min, RoofMode::Max] {
            let r = convex_roof(&m, &Bipartition::new([0]), q(2.0), mode, &quick()).unwrap();
            assert_eq!(r.ensemble.len(), r.ensemble_size);
            let mut rebuilt = CMatrix::zeros(&[2, 2]);
            let mut avg = 0.0;
            for v in &r.ensemble {
                let p: f64 = v.iter().map(|z| z.norm_sqr()).sum();
                rebuilt = rebuilt.add(&CMatrix::outer(&[2, 2], v).unwrap()).unwrap();
                if p > 1e-14 {
                    let psi = crate::states::PureState::new(vec![2, 2], v.iter().map(|z| z / p.sqrt()).collect()).unwrap();
                    let c = concurrence::pure_concurrence(&psi, &Bipartition::new([0])).unwrap();
                    avg += p * c * c / 2.0;
                }
            }
            assert!(rebuilt.max_abs_diff(m.as_matrix()) < 1e-12);
            assert_abs_diff_eq!(avg, r.value, epsilon = 1e-12);
        }
    }

    #[test]
    fn more_restarts_never_worse() {
        let m = random_mixed_on(&[2, 2], 2, Seed::new(3, 0)).unwrap();
        let part = Bipartition::new([0]);
        let mut prev_min = f64::INFINITY;
        let mut prev_max = f64::NEG_INFINITY;
        for restarts in [1, 2, 4, 8] {
            let opts = RoofOptions { restarts, ..RoofOptions::default() };
            let lo = convex_roof(&m, &part, q(3.0), RoofMode::Min, &opts).unwrap().value;
            let hi = convex_roof(&m, &part, q(3.0), RoofMode::Max, &opts).unwrap().value;
            assert!(lo <= prev_min && hi >= prev_max);
            prev_min = lo;
            prev_max = hi;
        }
    }
}
