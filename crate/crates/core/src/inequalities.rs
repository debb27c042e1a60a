//! Monogamy and polygamy checkers for multi-qubit states.
//!
//! Multi-party relations take a global pure state, so every one-vs-rest
//! quantity is a marginal entropy or a pure-state concurrence. Two-qubit
//! terms use the Wootters closed forms on pair reductions. TEoA terms are
//! f_q(C^a), which is a lower bound in general; when it is not known to be
//! exact and the check does not certify with it, a convex-roof search is run
//! on the offending pair reductions to tighten it.

use thiserror::Error;

use crate::concurrence::{self, ConcurrenceError};
use crate::entropy::{self, QParam};
use crate::qmat::QmatError;
use crate::report::{Bound, InequalityReport, Relation, Verdict};
use crate::states::{Bipartition, PureState, StateInput};
use crate::tsallis::{self, RoofMode, RoofOptions, TsallisError, ROOF_RANK_TOL};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InequalityError {
    #[error("every subsystem must be a qubit, got dims {0:?}")]
    NotQubits(Vec<usize>),
    #[error("need at least {min} parties, got {n}")]
    TooFewParties { n: usize, min: usize },
    #[error("q = {q} outside the range {range} where this relation is asserted")]
    QOutOfRange { q: f64, range: &'static str },
    #[error("q = {0} must be exactly 2 or 3")]
    QNotInMonogamySet(f64),
    #[error("bad partition: {0}")]
    BadPartition(String),
    #[error(transparent)]
    Tsallis(#[from] TsallisError),
    #[error(transparent)]
    Concurrence(#[from] ConcurrenceError),
    #[error(transparent)]
    Matrix(#[from] QmatError),
}

type Result<T> = std::result::Result<T, InequalityError>;

fn require_qubits(s: &PureState, min: usize) -> Result<()> {
    if !s.is_qubits() {
        return Err(InequalityError::NotQubits(s.dims().to_vec()));
    }
    let n = s.n_subsystems();
    if n < min {
        return Err(InequalityError::TooFewParties { n, min });
    }
    Ok(())
}

fn require_index(i: usize, n: usize) -> Result<()> {
    if i >= n {
        return Err(InequalityError::BadPartition(format!("subsystem {i} out of range for {n} subsystems")));
    }
    Ok(())
}

fn require_q_at_least_one(q: QParam) -> Result<()> {
    if q.value() < 1.0 {
        return Err(InequalityError::QOutOfRange { q: q.value(), range: "q >= 1" });
    }
    Ok(())
}

fn require_polygamy_range(q: QParam) -> Result<()> {
    if !q.in_polygamy_range() {
        return Err(InequalityError::QOutOfRange {
            q: q.value(),
            range: "1 <= q <= 2 or 3 <= q <= 4",
        });
    }
    Ok(())
}

fn others(n: usize, exclude: &[usize]) -> impl Iterator<Item = usize> + '_ {
    (0..n).filter(move |i| !exclude.contains(i))
}

fn marginal_entropy(s: &PureState, group: &[usize], q: QParam) -> Result<f64> {
    Ok(entropy::tsallis_entropy(&s.reduce(group)?, q))
}

/// T_q(rho_{a|b}) of a two-qubit pair reduction.
fn pair_entanglement(s: &PureState, a: usize, b: usize, q: QParam) -> Result<f64> {
    let c = concurrence::pair_spectrum(s, [a, b])?.concurrence();
    Ok(tsallis::f_q(c, q)?)
}

/// A TEoA term of a pair reduction, possibly only a lower bound.
#[derive(Debug, Clone, Copy)]
struct TeoaTerm {
    pair: [usize; 2],
    value: f64,
    exact: bool,
}

impl TeoaTerm {
    fn new(s: &PureState, a: usize, b: usize, q: QParam) -> Result<Self> {
        let spec = concurrence::pair_spectrum(s, [a, b])?;
        let pure = s.reduce(&[a, b])?.rank(ROOF_RANK_TOL) == 1;
        let bound = tsallis::teoa_from_spectrum(&spec, pure, q)?;
        Ok(Self {
            pair: [a, b],
            value: bound.value,
            exact: bound.exact,
        })
    }

    fn refine(&mut self, s: &PureState, q: QParam, roof: &RoofOptions) -> Result<()> {
        if self.exact {
            return Ok(());
        }
        let m = s.reduce(&self.pair)?;
        let found = tsallis::convex_roof(&m, &Bipartition::new([0]), q, RoofMode::Max, roof)?;
        self.value = self.value.max(found.value);
        Ok(())
    }
}

fn all_exact(terms: &[TeoaTerm]) -> bool {
    terms.iter().all(|t| t.exact)
}

/// Assesses, and if the verdict is not certified and some TEoA term is a
/// bound, refines those terms by convex-roof search and assesses again.
/// `assemble` maps the terms to the `(rhs, bound)` pair.
#[allow(clippy::too_many_arguments)]
fn assess_with_refinement(
    name: &str,
    q: QParam,
    relation: Relation,
    lhs: f64,
    s: &PureState,
    mut terms: Vec<TeoaTerm>,
    assemble: impl Fn(&[TeoaTerm]) -> (f64, Bound),
    tol: f64,
    roof: &RoofOptions,
) -> Result<InequalityReport> {
    let report = InequalityReport::assess(name, q.value(), relation, (lhs, Bound::Exact), assemble(&terms), tol);
    if report.verdict == Verdict::Holds || all_exact(&terms) {
        return Ok(report);
    }
    for t in terms.iter_mut() {
        t.refine(s, q, roof)?;
    }
    Ok(InequalityReport::assess(name, q.value(), relation, (lhs, Bound::Exact), assemble(&terms), tol))
}

/// C(rho_{f|rest})^2 >= sum_i C(rho_{f,i})^2 on a pure multi-qubit state.
pub fn ckw_monogamy(s: &PureState, focus: usize, tol: f64) -> Result<InequalityReport> {
    require_qubits(s, 3)?;
    let n = s.n_subsystems();
    require_index(focus, n)?;
    let lhs = concurrence::pure_concurrence(s, &Bipartition::new([focus]))?.powi(2);
    let mut rhs = 0.0;
    for i in others(n, &[focus]) {
        rhs += concurrence::pair_spectrum(s, [focus, i])?.concurrence().powi(2);
    }
    Ok(InequalityReport::assess(
        "ckw",
        f64::NAN,
        Relation::AtLeast,
        (lhs, Bound::Exact),
        (rhs, Bound::Exact),
        tol,
    ))
}

/// C^a(rho_{f|rest})^2 <= sum_i C^a(rho_{f,i})^2 on a pure multi-qubit state.
pub fn dual_polygamy(s: &PureState, focus: usize, tol: f64) -> Result<InequalityReport> {
    require_qubits(s, 3)?;
    let n = s.n_subsystems();
    require_index(focus, n)?;
    let lhs = concurrence::pure_concurrence(s, &Bipartition::new([focus]))?.powi(2);
    let mut rhs = 0.0;
    for i in others(n, &[focus]) {
        rhs += concurrence::pair_spectrum(s, [focus, i])?.assistance().powi(2);
    }
    Ok(InequalityReport::assess(
        "dual-polygamy",
        f64::NAN,
        Relation::AtMost,
        (lhs, Bound::Exact),
        (rhs, Bound::Exact),
        tol,
    ))
}

/// T_q(rho_{f|rest}) >= sum_i T_q(rho_{f|i}) for 2 <= q <= 3.
pub fn tsallis_monogamy(s: &PureState, focus: usize, q: QParam, tol: f64) -> Result<InequalityReport> {
    if !(2.0..=3.0).contains(&q.value()) {
        return Err(InequalityError::QOutOfRange { q: q.value(), range: "2 <= q <= 3" });
    }
    require_qubits(s, 3)?;
    let n = s.n_subsystems();
    require_index(focus, n)?;
    let lhs = marginal_entropy(s, &[focus], q)?;
    let mut rhs = 0.0;
    for i in others(n, &[focus]) {
        rhs += pair_entanglement(s, focus, i, q)?;
    }
    Ok(InequalityReport::assess(
        "tsallis-monogamy",
        q.value(),
        Relation::AtLeast,
        (lhs, Bound::Exact),
        (rhs, Bound::Exact),
        tol,
    ))
}

/// T^a_q(rho_{f|rest}) <= sum_i T^a_q(rho_{f|i}) for 1 <= q <= 2 or 3 <= q <= 4.
pub fn tsallis_polygamy(
    s: &PureState,
    focus: usize,
    q: QParam,
    tol: f64,
    roof: &RoofOptions,
) -> Result<InequalityReport> {
    require_polygamy_range(q)?;
    require_qubits(s, 3)?;
    let n = s.n_subsystems();
    require_index(focus, n)?;
    let lhs = marginal_entropy(s, &[focus], q)?;
    let terms = others(n, &[focus])
        .map(|i| TeoaTerm::new(s, focus, i, q))
        .collect::<Result<Vec<_>>>()?;
    let assemble = |terms: &[TeoaTerm]| {
        let bound = if all_exact(terms) { Bound::Exact } else { Bound::Lower };
        (terms.iter().map(|t| t.value).sum(), bound)
    };
    assess_with_refinement("tsallis-polygamy", q, Relation::AtMost, lhs, s, terms, assemble, tol, roof)
}

/// T_q(rho_{AB|rest}) >= sum_i [T_q(rho_{A|C_i}) - T^a_q(rho_{B|C_i})] with
/// A = qubit 0 and B = qubit 1, for q = 2, 3.
pub fn generalized_monogamy(s: &PureState, q: QParam, tol: f64, roof: &RoofOptions) -> Result<InequalityReport> {
    generalized_monogamy_on(s, 0, 1, q, tol, roof)
}

/// [`generalized_monogamy`] with A and B chosen explicitly.
pub fn generalized_monogamy_on(
    s: &PureState,
    a: usize,
    b: usize,
    q: QParam,
    tol: f64,
    roof: &RoofOptions,
) -> Result<InequalityReport> {
    if !q.in_monogamy_set() {
        return Err(InequalityError::QNotInMonogamySet(q.value()));
    }
    require_qubits(s, 3)?;
    let n = s.n_subsystems();
    require_index(a, n)?;
    require_index(b, n)?;
    if a == b {
        return Err(InequalityError::BadPartition("A and B must differ".into()));
    }
    let lhs = marginal_entropy(s, &[a, b], q)?;
    let mut plain = 0.0;
    let mut terms = Vec::new();
    for i in others(n, &[a, b]) {
        plain += pair_entanglement(s, a, i, q)?;
        terms.push(TeoaTerm::new(s, b, i, q)?);
    }
    // Lower bounds on the subtracted TEoA terms bound the RHS from above.
    let assemble = |terms: &[TeoaTerm]| {
        let bound = if all_exact(terms) { Bound::Exact } else { Bound::Upper };
        (plain - terms.iter().map(|t| t.value).sum::<f64>(), bound)
    };
    assess_with_refinement("gen-monogamy", q, Relation::AtLeast, lhs, s, terms, assemble, tol, roof)
}

/// T^a_q(rho_{AB|rest}) <= 2 T^a_q(rho_{A|B}) + sum_i [T^a_q(rho_{A|C_i}) +
/// T^a_q(rho_{B|C_i})] with A = qubit 0 and B = qubit 1, for 1 <= q <= 2 or
/// 3 <= q <= 4.
pub fn generalized_polygamy(s: &PureState, q: QParam, tol: f64, roof: &RoofOptions) -> Result<InequalityReport> {
    generalized_polygamy_on(s, 0, 1, q, tol, roof)
}

/// [`generalized_polygamy`] with A and B chosen explicitly.
pub fn generalized_polygamy_on(
    s: &PureState,
    a: usize,
    b: usize,
    q: QParam,
    tol: f64,
    roof: &RoofOptions,
) -> Result<InequalityReport> {
    require_polygamy_range(q)?;
    require_qubits(s, 3)?;
    let n = s.n_subsystems();
    require_index(a, n)?;
    require_index(b, n)?;
    if a == b {
        return Err(InequalityError::BadPartition("A and B must differ".into()));
    }
    let lhs = marginal_entropy(s, &[a, b], q)?;
    let mut terms = vec![TeoaTerm::new(s, a, b, q)?];
    for i in others(n, &[a, b]) {
        terms.push(TeoaTerm::new(s, a, i, q)?);
        terms.push(TeoaTerm::new(s, b, i, q)?);
    }
    let assemble = |terms: &[TeoaTerm]| {
        let bound = if all_exact(terms) { Bound::Exact } else { Bound::Lower };
        // terms[0] is the A|B term, counted twice.
        (terms[0].value + terms.iter().map(|t| t.value).sum::<f64>(), bound)
    };
    assess_with_refinement("gen-polygamy", q, Relation::AtMost, lhs, s, terms, assemble, tol, roof)
}

/// T^a_q(rho_{f|rest}) <= sum_{i != f} T^a_q(rho_{i|rest}) on a pure state,
/// where each term is a marginal entropy. Any local dimensions, q >= 1.
pub fn teoa_multiparty(s: &PureState, focus: usize, q: QParam, tol: f64) -> Result<InequalityReport> {
    require_q_at_least_one(q)?;
    let n = s.n_subsystems();
    if n < 2 {
        return Err(InequalityError::TooFewParties { n, min: 2 });
    }
    require_index(focus, n)?;
    let lhs = marginal_entropy(s, &[focus], q)?;
    let mut rhs = 0.0;
    for i in others(n, &[focus]) {
        rhs += marginal_entropy(s, &[i], q)?;
    }
    Ok(InequalityReport::assess(
        "multiparty-polygamy",
        q.value(),
        Relation::AtMost,
        (lhs, Bound::Exact),
        (rhs, Bound::Exact),
        tol,
    ))
}

fn validate_groups(groups: &[Vec<usize>; 3], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    for g in groups {
        if g.is_empty() {
            return Err(InequalityError::BadPartition("empty group".into()));
        }
        for &i in g {
            require_index(i, n)?;
            if std::mem::replace(&mut seen[i], true) {
                return Err(InequalityError::BadPartition(format!("subsystem {i} appears twice")));
            }
        }
    }
    if let Some(missing) = seen.iter().position(|&x| !x) {
        return Err(InequalityError::BadPartition(format!("subsystem {missing} is in no group")));
    }
    Ok(())
}

/// One group per subsystem, for three-party inputs.
pub fn singleton_groups() -> [Vec<usize>; 3] {
    [vec![0], vec![1], vec![2]]
}

/// T^a_q(rho_{A|BC}) <= T^a_q(rho_{B|AC}) + T^a_q(rho_{C|AB}) for q >= 1.
///
/// Pure input: each TEoA is the entropy of a marginal, so the check is exact.
/// Mixed input: the LHS is bounded above by S_q(rho_A) (concavity of S_q)
/// and each RHS term below by ensemble search, which can certify HOLDS.
/// Failing that, the LHS is bounded below by search and each RHS term above
/// by its marginal entropy, which can certify VIOLATED. Otherwise the
/// report is INDETERMINATE.
pub fn teoa_reciprocity(
    input: &StateInput,
    groups: &[Vec<usize>; 3],
    q: QParam,
    tol: f64,
    roof: &RoofOptions,
) -> Result<InequalityReport> {
    const NAME: &str = "reciprocity";
    require_q_at_least_one(q)?;
    validate_groups(groups, input.dims().len())?;
    let [ga, gb, gc] = groups;
    let assess = |lhs, rhs| InequalityReport::assess(NAME, q.value(), Relation::AtMost, lhs, rhs, tol);

    let m = match input {
        StateInput::Pure(s) => {
            let lhs = marginal_entropy(s, ga, q)?;
            let rhs = marginal_entropy(s, gb, q)? + marginal_entropy(s, gc, q)?;
            return Ok(assess((lhs, Bound::Exact), (rhs, Bound::Exact)));
        }
        StateInput::Mixed(m) => m,
    };
    let marginal = |g: &[usize]| -> Result<f64> { Ok(entropy::tsallis_entropy(&crate::qmat::partial_trace(m, g)?, q)) };
    let lhs_upper = marginal(ga)?;
    let (part_b, part_c) = (Bipartition::new(gb.clone()), Bipartition::new(gc.clone()));

    let cheap = tsallis::eigen_ensemble_value(m, &part_b, q)? + tsallis::eigen_ensemble_value(m, &part_c, q)?;
    let report = assess((lhs_upper, Bound::Upper), (cheap, Bound::Lower));
    if report.verdict == Verdict::Holds {
        return Ok(report);
    }
    let roof_max = |part: &Bipartition| -> Result<f64> {
        Ok(tsallis::convex_roof(m, part, q, RoofMode::Max, roof)?.value)
    };
    let searched = roof_max(&part_b)? + roof_max(&part_c)?;
    let report = assess((lhs_upper, Bound::Upper), (cheap.max(searched), Bound::Lower));
    if report.verdict == Verdict::Holds {
        return Ok(report);
    }
    let lhs_lower = roof_max(&Bipartition::new(ga.clone()))?;
    let rhs_upper = marginal(gb)? + marginal(gc)?;
    let refuting = assess((lhs_lower, Bound::Lower), (rhs_upper, Bound::Upper));
    if refuting.verdict == Verdict::Violated {
        return Ok(refuting);
    }
    Ok(report)
}
