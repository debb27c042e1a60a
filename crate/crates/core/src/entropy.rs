//! q-logarithm, Tsallis-q and von Neumann entropies, and the entropy-level
//! inequalities (subadditivity and the triangle inequality).
//!
//! Entropies are evaluated from eigenvalues only. When `|q - 1|` is below
//! [`LIMIT_EPS`] the natural-log branch is used.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qmat::{DensityMatrix, QmatError};
use crate::report::{Bound, InequalityReport, Relation};

pub const LIMIT_EPS: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EntropyError {
    #[error("entropic index must be a positive finite number, got {0}")]
    BadQ(f64),
    #[error("q-logarithm needs a positive argument, got {0}")]
    NonPositiveArgument(f64),
    #[error("bad partition: {0}")]
    BadPartition(String),
    #[error("q = {q} outside the range {range} where this relation is asserted")]
    QOutOfRange { q: f64, range: &'static str },
    #[error(transparent)]
    Matrix(#[from] QmatError),
}

/// Validated entropic index.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct QParam(f64);

impl QParam {
    pub fn new(q: f64) -> Result<Self, EntropyError> {
        if q > 0.0 && q.is_finite() {
            Ok(Self(q))
        } else {
            Err(EntropyError::BadQ(q))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_limit(self) -> bool {
        (self.0 - 1.0).abs() < LIMIT_EPS
    }

    /// 1 <= q <= 4, where T_q = f_q(C) on two qubits.
    pub fn in_fq_range(self) -> bool {
        (1.0..=4.0).contains(&self.0)
    }

    /// q = 2 or q = 3 exactly.
    pub fn in_monogamy_set(self) -> bool {
        self.0 == 2.0 || self.0 == 3.0
    }

    /// 1 <= q <= 2 or 3 <= q <= 4.
    pub fn in_polygamy_range(self) -> bool {
        (1.0..=2.0).contains(&self.0) || (3.0..=4.0).contains(&self.0)
    }
}

impl TryFrom<f64> for QParam {
    type Error = EntropyError;
    fn try_from(q: f64) -> Result<Self, EntropyError> {
        QParam::new(q)
    }
}

impl From<QParam> for f64 {
    fn from(q: QParam) -> f64 {
        q.0
    }
}

/// ln_q x = (x^(1-q) - 1) / (1 - q).
pub fn q_log(x: f64, q: QParam) -> Result<f64, EntropyError> {
    if !(x > 0.0) {
        return Err(EntropyError::NonPositiveArgument(x));
    }
    if q.is_limit() {
        return Ok(x.ln());
    }
    let one_minus_q = 1.0 - q.value();
    Ok((x.powf(one_minus_q) - 1.0) / one_minus_q)
}

/// -sum p ln p over a probability vector (0 ln 0 = 0).
pub fn shannon(probs: &[f64]) -> f64 {
    probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.ln())
        .sum()
}

/// Tsallis entropy of a probability vector; entries <= 0 are ignored.
pub fn tsallis_from_spectrum(probs: &[f64], q: QParam) -> f64 {
    if q.is_limit() {
        return shannon(probs);
    }
    let q = q.value();
    let power_sum: f64 = probs.iter().filter(|&&p| p > 0.0).map(|&p| p.powf(q)).sum();
    (1.0 - power_sum) / (q - 1.0)
}

pub fn tsallis_entropy(m: &DensityMatrix, q: QParam) -> f64 {
    tsallis_from_spectrum(&m.spectrum(), q)
}

/// Entropy in nats.
pub fn von_neumann(m: &DensityMatrix) -> f64 {
    shannon(&m.spectrum())
}

fn bipartite_marginals(m: &DensityMatrix) -> Result<(DensityMatrix, DensityMatrix), EntropyError> {
    let n = m.subsystem_dims().len();
    if n != 2 {
        return Err(EntropyError::BadPartition(format!(
            "expected exactly two subsystems, got {n}"
        )));
    }
    Ok((crate::qmat::partial_trace(m, &[0])?, crate::qmat::partial_trace(m, &[1])?))
}

fn require_q_at_least_one(q: QParam) -> Result<(), EntropyError> {
    if q.value() < 1.0 {
        return Err(EntropyError::QOutOfRange { q: q.value(), range: "q >= 1" });
    }
    Ok(())
}

/// S_q(rho_AB) <= S_q(rho_A) + S_q(rho_B), asserted for q >= 1.
pub fn check_subadditivity(m: &DensityMatrix, q: QParam, tol: f64) -> Result<InequalityReport, EntropyError> {
    require_q_at_least_one(q)?;
    let (ra, rb) = bipartite_marginals(m)?;
    let lhs = tsallis_entropy(m, q);
    let rhs = tsallis_entropy(&ra, q) + tsallis_entropy(&rb, q);
    Ok(InequalityReport::assess(
        "subadditivity",
        q.value(),
        Relation::AtMost,
        (lhs, Bound::Exact),
        (rhs, Bound::Exact),
        tol,
    ))
}

/// |S_q(rho_A) - S_q(rho_B)| <= S_q(rho_AB), asserted for q >= 1.
pub fn check_triangle(m: &DensityMatrix, q: QParam, tol: f64) -> Result<InequalityReport, EntropyError> {
    require_q_at_least_one(q)?;
    let (ra, rb) = bipartite_marginals(m)?;
    let lhs = (tsallis_entropy(&ra, q) - tsallis_entropy(&rb, q)).abs();
    let rhs = tsallis_entropy(m, q);
    Ok(InequalityReport::assess(
        "triangle",
        q.value(),
        Relation::AtMost,
        (lhs, Bound::Exact),
        (rhs, Bound::Exact),
        tol,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmat::{tensor, validate_density, CMatrix, Tolerances};
    use crate::report::{Verdict, EXACT_TOL};
    use crate::states::{ghz, haar_random_pure, random_mixed, random_mixed_on, Seed};
    use approx::assert_abs_diff_eq;

    fn q(v: f64) -> QParam {
        QParam::new(v).unwrap()
    }

    fn dm(m: CMatrix) -> DensityMatrix {
        validate_density(m, &Tolerances::default()).unwrap()
    }

    #[test]
    fn qparam_flags() {
        assert!(QParam::new(0.0).is_err());
        assert!(QParam::new(f64::NAN).is_err());
        assert!(q(1.0 + 1e-7).is_limit());
        assert!(!q(1.0 + 1e-4).is_limit());
        assert!(q(2.0).in_monogamy_set() && q(3.0).in_monogamy_set());
        assert!(!q(2.5).in_monogamy_set());
        assert!(q(2.5).in_fq_range() && !q(4.5).in_fq_range() && !q(0.5).in_fq_range());
        assert!(q(1.5).in_polygamy_range() && q(3.5).in_polygamy_range());
        assert!(!q(2.5).in_polygamy_range());
    }

    #[test]
    fn q_log_values() {
        for v in [0.5, 1.0, 2.0, 3.7] {
            assert_eq!(q_log(1.0, q(v)).unwrap(), 0.0);
        }
        assert_abs_diff_eq!(q_log(2.0, q(2.0)).unwrap(), 0.5, epsilon = 1e-15);
        let e = std::f64::consts::E;
        for v in [1.0 + 1e-7, 1.0 - 1e-7] {
            assert!((q_log(e, q(v)).unwrap() - 1.0).abs() < 1e-6);
        }
        // Outside the limit window the formula must still approach ln.
        assert!((q_log(e, q(1.0 + 1e-5)).unwrap() - 1.0).abs() < 1e-4);
        assert_eq!(q_log(0.0, q(2.0)), Err(EntropyError::NonPositiveArgument(0.0)));
    }

    #[test]
    fn entropy_values() {
        let pure = ghz(2).unwrap().projector();
        for v in [0.5, 1.0, 2.0, 3.0] {
            assert_abs_diff_eq!(tsallis_entropy(&pure, q(v)), 0.0, epsilon = 1e-12);
        }
        let half = dm(CMatrix::identity(&[2]).scale(0.5));
        assert_abs_diff_eq!(tsallis_entropy(&half, q(2.0)), 0.5, epsilon = 1e-15);
        let quarter = dm(CMatrix::identity(&[4]).scale(0.25));
        assert_abs_diff_eq!(tsallis_entropy(&quarter, q(3.0)), 15.0 / 32.0, epsilon = 1e-15);

        assert_abs_diff_eq!(von_neumann(&half), std::f64::consts::LN_2, epsilon = 1e-15);
        assert_abs_diff_eq!(von_neumann(&pure), 0.0, epsilon = 1e-12);
        let m = dm(CMatrix::from_diag(&[2], &[0.9, 0.1]).unwrap());
        let want = -0.9 * 0.9f64.ln() - 0.1 * 0.1f64.ln();
        assert_abs_diff_eq!(von_neumann(&m), want, epsilon = 1e-15);
    }

    #[test]
    fn subadditivity_cases() {
        let half = CMatrix::identity(&[2]).scale(0.5);
        let prod = dm(tensor(&half, &half));
        let r = check_subadditivity(&prod, q(2.0), EXACT_TOL).unwrap();
        assert_abs_diff_eq!(r.lhs, 0.75, epsilon = 1e-14);
        assert_abs_diff_eq!(r.rhs, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(r.slack, 0.25, epsilon = 1e-14);
        assert_eq!(r.verdict, Verdict::Holds);

        let bell = ghz(2).unwrap().projector();
        let r = check_subadditivity(&bell, q(2.0), EXACT_TOL).unwrap();
        assert_abs_diff_eq!(r.lhs, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.rhs, 1.0, epsilon = 1e-12);

        assert!(matches!(
            check_subadditivity(&bell, q(0.5), EXACT_TOL),
            Err(EntropyError::QOutOfRange { .. })
        ));
        let three = ghz(3).unwrap().projector();
        assert!(matches!(
            check_subadditivity(&three, q(2.0), EXACT_TOL),
            Err(EntropyError::BadPartition(_))
        ));
    }

    #[test]
    fn subadditivity_monte_carlo() {
        for i in 0..10_000u64 {
            let rank = 1 + (i % 4) as usize;
            let m = random_mixed_on(&[2, 2], rank, Seed::new(21, i)).unwrap();
            for v in [1.5, 2.0, 3.0] {
                let r = check_subadditivity(&m, q(v), EXACT_TOL).unwrap();
                assert!(r.slack >= -1e-9, "sample {i} q {v}: {r:?}");
            }
        }
    }

    #[test]
    fn triangle_cases() {
        let psi = haar_random_pure(&[2, 2], Seed::new(3, 0)).unwrap().projector();
        let r = check_triangle(&psi, q(2.0), EXACT_TOL).unwrap();
        assert_abs_diff_eq!(r.lhs, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.rhs, 0.0, epsilon = 1e-12);

        let ra = random_mixed(2, 2, Seed::new(3, 1)).unwrap();
        let zero = CMatrix::from_diag(&[2], &[1.0, 0.0]).unwrap();
        let m = dm(tensor(ra.as_matrix(), &zero));
        let r = check_triangle(&m, q(2.5), EXACT_TOL).unwrap();
        assert_abs_diff_eq!(r.lhs, tsallis_entropy(&ra, q(2.5)), epsilon = 1e-12);
        assert_abs_diff_eq!(r.slack, 0.0, epsilon = 1e-12);

        for i in 0..10_000u64 {
            let m = random_mixed_on(&[2, 2], 2, Seed::new(22, i)).unwrap();
            let r = check_triangle(&m, q(2.0), EXACT_TOL).unwrap();
            assert!(r.slack >= -1e-9, "sample {i}: {r:?}");
        }
    }

    #[test]
    fn continuity_concavity_invariance() {
        for i in 0..50u64 {
            let dim = 2 + (i % 7) as usize;
            let m = random_mixed(dim, dim, Seed::new(4, i)).unwrap();
            let s = von_neumann(&m);
            for v in [1.0 + 1e-4, 1.0 - 1e-4] {
                assert!((tsallis_entropy(&m, q(v)) - s).abs() <= 1e-3);
            }

            let sigma = random_mixed(dim, 1 + (i as usize % dim), Seed::new(5, i)).unwrap();
            let lam = 0.3;
            let mix = dm(m.scale(lam).add(&sigma.scale(1.0 - lam)).unwrap());
            for v in [0.5, 2.0, 3.0] {
                let lhs = tsallis_entropy(&mix, q(v));
                let rhs = lam * tsallis_entropy(&m, q(v)) + (1.0 - lam) * tsallis_entropy(&sigma, q(v));
                assert!(lhs >= rhs - 1e-9);
            }

            let u = haar_unitary(dim, i);
            let rotated = dm(m.conjugate_by(&u).unwrap());
            assert!((tsallis_entropy(&rotated, q(2.5)) - tsallis_entropy(&m, q(2.5))).abs() <= 1e-10);
        }
    }

    /// Unitary from the eigenvectors of a random Hermitian matrix.
    fn haar_unitary(dim: usize, i: u64) -> CMatrix {
        let h = random_mixed(dim, dim, Seed::new(6, i)).unwrap();
        crate::qmat::hermitian_eigen(&h).unwrap().vectors
    }
}
