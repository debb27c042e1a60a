//! Pure-state concurrence, the two-qubit Wootters formulas for concurrence
//! and concurrence of assistance, and the 2x2xd identity
//! C(psi_{A|BC})^2 = C^a(rho_{A|B})^2 + C(rho_{A|C})^2.
//!
//! The Wootters values lambda_i are the singular values of the symmetric
//! matrix tau = M^T (Y (x) Y) M for any factor M with rho = M M^dag. When
//! rho comes from a pure state, M is read directly off the amplitudes, so no
//! square root of a round-off eigenvalue enters the result.

use nalgebra::DMatrix;
use thiserror::Error;

use crate::qmat::{self, CMatrix, DensityMatrix, QmatError, C64, ZERO};
use crate::report::{Bound, InequalityReport, Relation};
use crate::states::{Bipartition, PureState};

/// Eigenvalues of rho at or below this are treated as zero when factoring.
pub const FACTOR_RANK_TOL: f64 = 1e-13;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConcurrenceError {
    #[error("expected a two-qubit operator, got subsystem dims {0:?}")]
    NotTwoQubit(Vec<usize>),
    #[error("bad partition: {0}")]
    BadPartition(String),
    #[error("expected dims (2, 2, d), got {0:?}")]
    BadDims(Vec<usize>),
    #[error("third subsystem of dimension {0} > 2 has no closed-form mixed-state concurrence")]
    UnsupportedDimension(usize),
    #[error(transparent)]
    Matrix(#[from] QmatError),
}

/// The four Wootters values, descending and nonnegative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WoottersSpectrum {
    pub lambdas: [f64; 4],
}

impl WoottersSpectrum {
    fn from_values(mut vals: Vec<f64>) -> Self {
        vals.iter_mut().for_each(|v| *v = v.max(0.0));
        vals.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
        let mut lambdas = [0.0; 4];
        for (slot, v) in lambdas.iter_mut().zip(vals) {
            *slot = v;
        }
        Self { lambdas }
    }

    /// max(0, l1 - l2 - l3 - l4), capped at 1.
    pub fn concurrence(&self) -> f64 {
        let [a, b, c, d] = self.lambdas;
        (a - b - c - d).clamp(0.0, 1.0)
    }

    /// l1 + l2 + l3 + l4.
    pub fn assistance(&self) -> f64 {
        self.lambdas.iter().sum()
    }
}

fn require_two_qubit(dims: &[usize]) -> Result<(), ConcurrenceError> {
    if dims != [2, 2] {
        return Err(ConcurrenceError::NotTwoQubit(dims.to_vec()));
    }
    Ok(())
}

/// Signs of the permutation sigma_y (x) sigma_y = sum_i s_i |3-i><i|.
const YY_SIGN: [f64; 4] = [-1.0, 1.0, 1.0, -1.0];

/// (sigma_y (x) sigma_y) rho^* (sigma_y (x) sigma_y).
pub fn spin_flip(m: &DensityMatrix) -> Result<CMatrix, ConcurrenceError> {
    require_two_qubit(m.subsystem_dims())?;
    let mut out = CMatrix::zeros(&[2, 2]);
    for i in 0..4 {
        for j in 0..4 {
            out[(i, j)] = m[(3 - i, 3 - j)].conj() * (YY_SIGN[i] * YY_SIGN[j]);
        }
    }
    Ok(out)
}

/// 4 x k factor M of a two-qubit operator, rho = M M^dag.
struct Factor {
    cols: usize,
    /// Row-major 4 x cols.
    data: Vec<C64>,
}

impl Factor {
    fn of_density(m: &DensityMatrix) -> Self {
        let eig = qmat::hermitian_eigen(m.as_matrix()).expect("density matrices are Hermitian");
        let support: Vec<usize> = (0..4).filter(|&j| eig.values[j] > FACTOR_RANK_TOL).collect();
        let cols = support.len();
        let mut data = vec![ZERO; 4 * cols];
        for (c, &j) in support.iter().enumerate() {
            let w = eig.values[j].sqrt();
            for i in 0..4 {
                data[i * cols + c] = eig.vectors[(i, j)] * w;
            }
        }
        Self { cols, data }
    }

    /// Reads M off the amplitudes: rows are the kept pair, columns the rest.
    fn of_pure_pair(s: &PureState, pair: [usize; 2]) -> Result<Self, ConcurrenceError> {
        let keep = qmat::validate_keep(&pair, s.n_subsystems())?;
        let sp = qmat::split(s.dims(), &keep);
        if sp.kept_dims != [2, 2] {
            return Err(ConcurrenceError::NotTwoQubit(sp.kept_dims));
        }
        let cols = sp.traced.len();
        let amps = s.amplitudes();
        let mut data = Vec::with_capacity(4 * cols);
        for &k in &sp.kept {
            for &t in &sp.traced {
                data.push(amps[k + t]);
            }
        }
        Ok(Self { cols, data })
    }

    fn spectrum(&self) -> WoottersSpectrum {
        let k = self.cols;
        if k == 0 {
            return WoottersSpectrum { lambdas: [0.0; 4] };
        }
        let m = |i: usize, c: usize| self.data[i * k + c];
        let mut tau = DMatrix::<C64>::zeros(k, k);
        for a in 0..k {
            for b in a..k {
                let mut acc = ZERO;
                for i in 0..4 {
                    acc += m(i, a) * m(3 - i, b) * YY_SIGN[3 - i];
                }
                tau[(a, b)] = acc;
                tau[(b, a)] = acc;
            }
        }
        let sv = tau.singular_values();
        WoottersSpectrum::from_values(sv.iter().copied().collect())
    }
}

/// Descending lambda_i, the square roots of the eigenvalues of
/// sqrt(rho) rho~ sqrt(rho).
pub fn wootters_spectrum(m: &DensityMatrix) -> Result<WoottersSpectrum, ConcurrenceError> {
    require_two_qubit(m.subsystem_dims())?;
    Ok(Factor::of_density(m).spectrum())
}

/// The same spectrum evaluated literally: Hermitian eigenvalues of
/// sqrt(rho) rho~ sqrt(rho), clamped at zero, then square-rooted. Loses
/// about half the significant digits on rank-deficient states.
pub fn wootters_spectrum_hermitian(m: &DensityMatrix) -> Result<WoottersSpectrum, ConcurrenceError> {
    let flipped = spin_flip(m)?;
    let root = qmat::psd_power(m.as_matrix(), 0.5);
    let product = root.matmul(&flipped)?.matmul(&root)?;
    let mu = qmat::hermitian_eigenvalues(&product);
    Ok(WoottersSpectrum::from_values(mu.into_iter().map(|v| v.max(0.0).sqrt()).collect()))
}

/// Wootters spectrum of the two-qubit reduction of `s` onto `pair`.
pub fn pair_spectrum(s: &PureState, pair: [usize; 2]) -> Result<WoottersSpectrum, ConcurrenceError> {
    Ok(Factor::of_pure_pair(s, pair)?.spectrum())
}

pub fn concurrence_2q(m: &DensityMatrix) -> Result<f64, ConcurrenceError> {
    Ok(wootters_spectrum(m)?.concurrence())
}

pub fn coa_2q(m: &DensityMatrix) -> Result<f64, ConcurrenceError> {
    Ok(wootters_spectrum(m)?.assistance())
}

/// tr(rho^2) of a Hermitian matrix as the squared Frobenius norm.
pub(crate) fn purity(m: &CMatrix) -> f64 {
    m.entries().iter().map(|z| z.norm_sqr()).sum()
}

/// Reduction of `s` onto the smaller side of the bipartition. Both sides
/// share the nonzero spectrum.
pub(crate) fn smaller_side_reduction(
    s: &PureState,
    part: &Bipartition,
) -> Result<DensityMatrix, ConcurrenceError> {
    let (first, rest) = part
        .groups(s.n_subsystems())
        .map_err(ConcurrenceError::BadPartition)?;
    let size = |g: &[usize]| g.iter().map(|&i| s.dims()[i]).product::<usize>();
    let keep = if size(&first) <= size(&rest) { first } else { rest };
    Ok(s.reduce(&keep)?)
}

/// sqrt(2 (1 - tr rho_A^2)).
pub fn pure_concurrence(s: &PureState, part: &Bipartition) -> Result<f64, ConcurrenceError> {
    let rho = smaller_side_reduction(s, part)?;
    Ok((2.0 * (1.0 - purity(&rho))).max(0.0).sqrt())
}

/// Checks C(psi_{A|BC})^2 = C^a(rho_{A|B})^2 + C(rho_{A|C})^2 for a pure
/// state on 2 x 2 x 2.
pub fn check_identity_22d(s: &PureState, tol: f64) -> Result<InequalityReport, ConcurrenceError> {
    let dims = s.dims();
    if dims.len() != 3 || dims[0] != 2 || dims[1] != 2 || dims[2] < 2 {
        return Err(ConcurrenceError::BadDims(dims.to_vec()));
    }
    if dims[2] > 2 {
        return Err(ConcurrenceError::UnsupportedDimension(dims[2]));
    }
    let lhs = pure_concurrence(s, &Bipartition::new([0]))?.powi(2);
    let coa_ab = pair_spectrum(s, [0, 1])?.assistance();
    let c_ac = pair_spectrum(s, [0, 2])?.concurrence();
    let rhs = coa_ab * coa_ab + c_ac * c_ac;
    Ok(InequalityReport::assess(
        "identity-22d",
        f64::NAN,
        Relation::Equal,
        (lhs, Bound::Exact),
        (rhs, Bound::Exact),
        tol,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmat::{tensor, validate_density, Tolerances};
    use crate::report::{Verdict, EXACT_TOL};
    use crate::states::{ghz, haar_random_pure, random_mixed_on, w_state, werner, Seed};
    use approx::assert_abs_diff_eq;

    fn dm(m: CMatrix) -> DensityMatrix {
        validate_density(m, &Tolerances::default()).unwrap()
    }

    fn assert_lambdas(got: WoottersSpectrum, want: [f64; 4], eps: f64) {
        for (g, w) in got.lambdas.iter().zip(want) {
            assert_abs_diff_eq!(*g, w, epsilon = eps);
        }
    }

    fn local_unitary(seed: u64) -> CMatrix {
        let h = crate::states::random_mixed(2, 2, Seed::new(99, seed)).unwrap();
        qmat::hermitian_eigen(&h).unwrap().vectors
    }

    #[test]
    fn spin_flip_examples() {
        let bell = ghz(2).unwrap().projector();
        assert!(spin_flip(&bell).unwrap().max_abs_diff(&bell) < 1e-15);

        let p00 = dm(CMatrix::from_diag(&[2, 2], &[1.0, 0.0, 0.0, 0.0]).unwrap());
        let p11 = CMatrix::from_diag(&[2, 2], &[0.0, 0.0, 0.0, 1.0]).unwrap();
        assert!(spin_flip(&p00).unwrap().max_abs_diff(&p11) < 1e-15);

        let m = random_mixed_on(&[2, 2], 3, Seed::new(1, 1)).unwrap();
        let once = dm(spin_flip(&m).unwrap());
        assert!(spin_flip(&once).unwrap().max_abs_diff(&m) < 1e-12);

        // Agrees with the literal Y (x) Y conjugation.
        let yy = tensor(&CMatrix::pauli_y(), &CMatrix::pauli_y());
        let literal = yy.matmul(&m.conj()).unwrap().matmul(&yy).unwrap();
        assert!(spin_flip(&m).unwrap().max_abs_diff(&literal) < 1e-15);

        let three = ghz(3).unwrap().projector();
        assert!(matches!(spin_flip(&three), Err(ConcurrenceError::NotTwoQubit(_))));
    }

    #[test]
    fn spectra() {
        let bell = ghz(2).unwrap().projector();
        assert_lambdas(wootters_spectrum(&bell).unwrap(), [1.0, 0.0, 0.0, 0.0], 1e-12);
        let mixed = dm(CMatrix::identity(&[2, 2]).scale(0.25));
        assert_lambdas(wootters_spectrum(&mixed).unwrap(), [0.25; 4], 1e-12);
        let ghz_ab = ghz(3).unwrap().reduce(&[0, 1]).unwrap();
        assert_lambdas(wootters_spectrum(&ghz_ab).unwrap(), [0.5, 0.5, 0.0, 0.0], 1e-12);
    }

    #[test]
    fn two_qubit_values() {
        let bell = ghz(2).unwrap().projector();
        assert_abs_diff_eq!(concurrence_2q(&bell).unwrap(), 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(coa_2q(&bell).unwrap(), 1.0, epsilon = 1e-10);

        let w_ab = w_state(3).unwrap().reduce(&[0, 1]).unwrap();
        assert_abs_diff_eq!(concurrence_2q(&w_ab).unwrap(), 2.0 / 3.0, epsilon = 1e-10);
        assert_abs_diff_eq!(pair_spectrum(&w_state(3).unwrap(), [0, 1]).unwrap().concurrence(), 2.0 / 3.0, epsilon = 1e-10);

        assert_eq!(concurrence_2q(&werner(0.2).unwrap()).unwrap(), 0.0);

        let ghz_ab = ghz(3).unwrap().reduce(&[0, 1]).unwrap();
        assert_abs_diff_eq!(coa_2q(&ghz_ab).unwrap(), 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(concurrence_2q(&ghz_ab).unwrap(), 0.0, epsilon = 1e-10);

        let p00 = dm(CMatrix::from_diag(&[2, 2], &[1.0, 0.0, 0.0, 0.0]).unwrap());
        assert_abs_diff_eq!(coa_2q(&p00).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn werner_grid() {
        for k in 0..=100 {
            let p = k as f64 / 100.0;
            let c = concurrence_2q(&werner(p).unwrap()).unwrap();
            let want = ((3.0 * p - 1.0) / 2.0).max(0.0);
            assert!((c - want).abs() <= 1e-10, "p={p}: {c} vs {want}");
        }
        assert_abs_diff_eq!(concurrence_2q(&werner(0.8).unwrap()).unwrap(), 0.7, epsilon = 1e-10);
    }

    #[test]
    fn factor_route_matches_hermitian_route() {
        for i in 0..200u64 {
            let rank = 1 + (i % 4) as usize;
            let m = random_mixed_on(&[2, 2], rank, Seed::new(8, i)).unwrap();
            let a = wootters_spectrum(&m).unwrap();
            let b = wootters_spectrum_hermitian(&m).unwrap();
            for (x, y) in a.lambdas.iter().zip(b.lambdas) {
                assert!((x - y).abs() < 1e-6, "sample {i}: {a:?} vs {b:?}");
            }
        }
    }

    #[test]
    fn pure_concurrence_values() {
        let prod = PureState::basis(&[2, 2], &[0, 1]).unwrap();
        assert_abs_diff_eq!(pure_concurrence(&prod, &Bipartition::new([0])).unwrap(), 0.0, epsilon = 1e-12);
        let bell = ghz(2).unwrap();
        assert_abs_diff_eq!(pure_concurrence(&bell, &Bipartition::new([0])).unwrap(), 1.0, epsilon = 1e-12);
        let w = w_state(3).unwrap();
        let c = pure_concurrence(&w, &Bipartition::new([0])).unwrap();
        assert_abs_diff_eq!(c, 2.0 * 2f64.sqrt() / 3.0, epsilon = 1e-12);
        assert!(matches!(
            pure_concurrence(&w, &Bipartition::new([0, 1, 2])),
            Err(ConcurrenceError::BadPartition(_))
        ));
    }

    #[test]
    fn mixed_and_pure_formulas_agree() {
        for i in 0..200u64 {
            let psi = haar_random_pure(&[2, 2], Seed::new(10, i)).unwrap();
            let via_mixed = concurrence_2q(&psi.projector()).unwrap();
            let via_pure = pure_concurrence(&psi, &Bipartition::new([0])).unwrap();
            assert!((via_mixed - via_pure).abs() <= 1e-10);
        }
    }

    #[test]
    fn coa_dominates_and_local_invariance() {
        for i in 0..200u64 {
            let m = random_mixed_on(&[2, 2], 1 + (i % 4) as usize, Seed::new(12, i)).unwrap();
            let c = concurrence_2q(&m).unwrap();
            let ca = coa_2q(&m).unwrap();
            assert!(ca >= c - 1e-12);
            let u = tensor(&local_unitary(2 * i), &local_unitary(2 * i + 1));
            let rotated = dm(m.conjugate_by(&u).unwrap().with_dims(vec![2, 2]).unwrap());
            assert!((concurrence_2q(&rotated).unwrap() - c).abs() <= 1e-9);
            assert!((coa_2q(&rotated).unwrap() - ca).abs() <= 1e-9);
        }
    }

    #[test]
    fn identity_22d_examples() {
        let g = check_identity_22d(&ghz(3).unwrap(), 1e-10).unwrap();
        assert_abs_diff_eq!(g.lhs, 1.0, epsilon = 1e-12);
        assert!((g.lhs - g.rhs).abs() <= 1e-10);
        let w = check_identity_22d(&w_state(3).unwrap(), 1e-10).unwrap();
        assert_abs_diff_eq!(w.lhs, 8.0 / 9.0, epsilon = 1e-12);
        assert!((w.lhs - w.rhs).abs() <= 1e-10);
        assert_eq!(w.verdict, Verdict::Holds);
        let p = check_identity_22d(&PureState::basis(&[2, 2, 2], &[0, 0, 0]).unwrap(), 1e-10).unwrap();
        assert_eq!((p.lhs, p.rhs), (0.0, 0.0));

        let big = haar_random_pure(&[2, 2, 3], Seed::new(0, 0)).unwrap();
        assert_eq!(check_identity_22d(&big, EXACT_TOL).unwrap_err(), ConcurrenceError::UnsupportedDimension(3));
        let bad = haar_random_pure(&[3, 2, 2], Seed::new(0, 0)).unwrap();
        assert!(matches!(check_identity_22d(&bad, EXACT_TOL), Err(ConcurrenceError::BadDims(_))));
    }
}
