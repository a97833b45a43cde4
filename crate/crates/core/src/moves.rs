//! The two elementary contractions: log-flopping type divisorial
//! contractions and log blow-downs, plus the nef and minimality predicates
//! that drive the minimization loop.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::crepant::{
    analyze, crepancy_defect, log_degree_with, pullback_multiplicities, pushforward_self_intersection, Analysis,
    BaseDesignation, LcCenter, SurfaceState,
};
use crate::error::{Error, Result};
use crate::ratlin::Rat;
use crate::surface::{CurveId, LocalBlowdownModel, NotSmoothPoint, PointId};

/// The perturbation `D + εC` witnessing that a flopping curve spans an
/// extremal ray. Any `0 < ε < supremum` works; `chosen` is half the supremum.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EpsilonChoice {
    pub supremum: Rat,
    pub chosen: Rat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MoveKind {
    FlopContraction,
    LogBlowDown,
}

impl fmt::Display for MoveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MoveKind::FlopContraction => "Flop",
            MoveKind::LogBlowDown => "LogBlowDown",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MoveCertificate {
    pub discrepancies_before: BTreeMap<CurveId, Rat>,
    pub discrepancies_after: BTreeMap<CurveId, Rat>,
    pub epsilon: Option<EpsilonChoice>,
    pub blowdown_order: Option<Vec<CurveId>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MoveRecord {
    pub kind: MoveKind,
    pub curve: CurveId,
    pub certificate: MoveCertificate,
}

/// A performed contraction: the new state and its record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Move {
    pub state: SurfaceState,
    pub record: MoveRecord,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FlopRejection {
    NotExceptional,
    NonzeroDegree(Rat),
    NotNegative(Rat),
    CoefficientOne,
    OnNode(PointId),
    MeetsLcComponent(Vec<CurveId>),
}

impl fmt::Display for FlopRejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FlopRejection::NotExceptional => write!(f, "not exceptional over the base"),
            FlopRejection::NonzeroDegree(d) => write!(f, "(K+D)-degree {d} is not zero"),
            FlopRejection::NotNegative(s) => {
                write!(f, "self-intersection {s} on the contracted surface is not negative")
            }
            FlopRejection::CoefficientOne => write!(f, "boundary coefficient 1 makes it an lc centre"),
            FlopRejection::OnNode(p) => write!(f, "passes through the lc centre at point {p}"),
            FlopRejection::MeetsLcComponent(c) => write!(f, "meets the lc centre at the image of {c:?}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FlopCheck {
    Flopping,
    Rejected(FlopRejection),
}

impl FlopCheck {
    pub fn is_flopping(&self) -> bool {
        matches!(self, FlopCheck::Flopping)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlowdownCertificate {
    /// Contraction order inside the local model, ending with the curve itself.
    pub order: Vec<CurveId>,
    /// The two coefficient-1 branches crossing at the image point.
    pub branches: (CurveId, CurveId),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BlowdownRejection {
    NotExceptional,
    CoefficientNotOne(Rat),
    PositiveGenus(u32),
    NotSmooth(NotSmoothPoint),
    NotMinusOne(i64),
    WrongBranches(Vec<(CurveId, i64, Rat)>),
    BranchesNotTransverse(i64),
}

impl fmt::Display for BlowdownRejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BlowdownRejection::NotExceptional => write!(f, "not exceptional over the base"),
            BlowdownRejection::CoefficientNotOne(d) => write!(f, "boundary coefficient {d} is not 1"),
            BlowdownRejection::PositiveGenus(g) => write!(f, "genus {g} is not 0"),
            BlowdownRejection::NotSmooth(r) => {
                write!(f, "adjacent contracted curves do not give a smooth point: {r:?}")
            }
            BlowdownRejection::NotMinusOne(s) => write!(f, "self-intersection {s} on the contracted surface is not -1"),
            BlowdownRejection::WrongBranches(b) => {
                write!(f, "boundary branches (curve, multiplicity, coefficient) are {b:?}, need two of coefficient 1")
            }
            BlowdownRejection::BranchesNotTransverse(n) => {
                write!(f, "branches would cross {n} times at the image point")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BlowdownCheck {
    BlowDown(BlowdownCertificate),
    Rejected(BlowdownRejection),
}

impl BlowdownCheck {
    pub fn is_blowdown(&self) -> bool {
        matches!(self, BlowdownCheck::BlowDown(_))
    }
}

fn require_log_terminal(analysis: &Analysis) -> Result<()> {
    if analysis.classification.is_log_terminal() {
        Ok(())
    } else {
        Err(Error::NotLogTerminal(analysis.classification))
    }
}

fn ensure_surviving(state: &SurfaceState, i: CurveId) -> Result<()> {
    state.config().curve(i)?;
    if state.is_contracted(i) {
        return Err(Error::AlreadyContracted(i));
    }
    Ok(())
}

pub fn is_log_flopping(state: &SurfaceState, i: CurveId) -> Result<FlopCheck> {
    let analysis = analyze(state)?;
    flop_check_with(state, &analysis, i)
}

pub(crate) fn flop_check_with(state: &SurfaceState, analysis: &Analysis, i: CurveId) -> Result<FlopCheck> {
    ensure_surviving(state, i)?;
    require_log_terminal(analysis)?;
    let reject = |r| Ok(FlopCheck::Rejected(r));
    if !state.is_exceptional_over_base(i) {
        return reject(FlopRejection::NotExceptional);
    }
    let degree = log_degree_with(state, &analysis.crepant, i)?;
    if !degree.is_zero() {
        return reject(FlopRejection::NonzeroDegree(degree));
    }
    let square = pushforward_self_intersection(state, i)?;
    if !square.is_negative() {
        return reject(FlopRejection::NotNegative(square));
    }
    let config = state.config();
    if config.curve(i)?.boundary_coeff.is_one() {
        return reject(FlopRejection::CoefficientOne);
    }
    for center in &analysis.centers {
        match center {
            LcCenter::Divisorial(_) => {}
            LcCenter::Node(p) => {
                if config.point(*p)?.contains(i) {
                    return reject(FlopRejection::OnNode(*p));
                }
            }
            LcCenter::ComponentImage(component) => {
                for &j in component {
                    if config.pairing(i, j)? > 0 {
                        return reject(FlopRejection::MeetsLcComponent(component.clone()));
                    }
                }
            }
        }
    }
    Ok(FlopCheck::Flopping)
}

/// Upper bound on ε keeping `D + εC_i` log terminal.
///
/// Adding `εC_i` raises each contracted `e_j` by `ε μ_j`, so the bound is
/// the least of `1 - d_i` and `(1 - e_j) / μ_j` over `μ_j > 0`.
pub fn epsilon_bound(state: &SurfaceState, i: CurveId) -> Result<EpsilonChoice> {
    let analysis = analyze(state)?;
    epsilon_with(state, &analysis, i)
}

fn epsilon_with(state: &SurfaceState, analysis: &Analysis, i: CurveId) -> Result<EpsilonChoice> {
    if let FlopCheck::Rejected(r) = flop_check_with(state, analysis, i)? {
        return Err(Error::NotFlopping { curve: i, reason: r.to_string() });
    }
    let mut sup = Rat::one() - &state.config().curve(i)?.boundary_coeff;
    for (j, mu) in pullback_multiplicities(state, i)? {
        if mu.is_positive() {
            let bound = (Rat::one() - analysis.crepant.e(j)) / &mu;
            sup = sup.min(bound);
        }
    }
    let chosen = &sup / 2;
    Ok(EpsilonChoice { supremum: sup, chosen })
}

/// Relative Picard number, or the drop from the master model when no
/// absolute rank is known.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PicardRank {
    /// `|S_T ∖ S|` over a target state.
    Relative(i64),
    /// `ρ(master) - |S|` over a point.
    Absolute(i64),
    /// `|S|`, the deficit relative to the master model.
    DeficitFromMaster(i64),
}

impl PicardRank {
    /// How far the Picard number fell going from `before` to `self`, when
    /// the two are in the same mode.
    pub fn drop_since(self, before: PicardRank) -> Option<i64> {
        match (before, self) {
            (PicardRank::Relative(a), PicardRank::Relative(b)) => Some(a - b),
            (PicardRank::Absolute(a), PicardRank::Absolute(b)) => Some(a - b),
            (PicardRank::DeficitFromMaster(a), PicardRank::DeficitFromMaster(b)) => Some(b - a),
            _ => None,
        }
    }
}

pub fn relative_picard_rank(state: &SurfaceState) -> PicardRank {
    let s = state.contracted().len() as i64;
    match state.base() {
        BaseDesignation::TargetState(t) => PicardRank::Relative(t.len() as i64 - s),
        BaseDesignation::Point => match state.config().picard_rank_of_model() {
            Some(rho) => PicardRank::Absolute(i64::from(rho) - s),
            None => PicardRank::DeficitFromMaster(s),
        },
    }
}

fn check_step_postconditions(before: &SurfaceState, after: &SurfaceState, what: &str) -> Result<Analysis> {
    let violation = |msg: String| Error::TheoremViolation(format!("{what}: {msg}"));
    let analysis = analyze(after)?;
    if !analysis.classification.is_log_terminal() {
        return Err(violation(format!("result classified {:?}", analysis.classification)));
    }
    if let Some((c, e, d)) = crepancy_defect(after.config(), before.contracted(), after.contracted())? {
        return Err(violation(format!("curve {c} has e = {e} but d = {d}")));
    }
    let drop = relative_picard_rank(after).drop_since(relative_picard_rank(before));
    if drop != Some(1) {
        return Err(violation(format!("Picard number dropped by {drop:?}")));
    }
    Ok(analysis)
}

fn contracted_with(state: &SurfaceState, i: CurveId) -> Result<SurfaceState> {
    let mut s = state.contracted().clone();
    s.insert(i);
    state
        .with_contracted(s)
        .map_err(|e| Error::TheoremViolation(format!("contracting {i} leaves an invalid state: {e}")))
}

pub fn contract_flop(state: &SurfaceState, i: CurveId) -> Result<Move> {
    let before = analyze(state)?;
    let epsilon = epsilon_with(state, &before, i)?;
    let next = contracted_with(state, i)?;
    let after = check_step_postconditions(state, &next, "log-flopping contraction")?;
    if after.crepant.coefficients() != before.crepant.coefficients() {
        return Err(Error::TheoremViolation(format!("contracting {i} changed the crepant pullback")));
    }
    Ok(Move {
        state: next,
        record: MoveRecord {
            kind: MoveKind::FlopContraction,
            curve: i,
            certificate: MoveCertificate {
                discrepancies_before: before.crepant.discrepancies(),
                discrepancies_after: after.crepant.discrepancies(),
                epsilon: Some(epsilon),
                blowdown_order: None,
            },
        },
    })
}

pub fn is_log_blowdown(state: &SurfaceState, j: CurveId) -> Result<BlowdownCheck> {
    ensure_surviving(state, j)?;
    let reject = |r| Ok(BlowdownCheck::Rejected(r));
    if !state.is_exceptional_over_base(j) {
        return reject(BlowdownRejection::NotExceptional);
    }
    let config = state.config();
    let curve = config.curve(j)?;
    if !curve.boundary_coeff.is_one() {
        return reject(BlowdownRejection::CoefficientNotOne(curve.boundary_coeff.clone()));
    }
    if curve.genus != 0 {
        return reject(BlowdownRejection::PositiveGenus(curve.genus));
    }
    let mut gamma = BTreeSet::new();
    for component in state.components() {
        let mut touches = false;
        for &c in &component {
            touches |= config.pairing(j, c)? > 0;
        }
        if touches {
            gamma.extend(component);
        }
    }
    let mut local = LocalBlowdownModel::around(config, &gamma, &BTreeSet::from([j]))?;
    let mut order = match local.contract_pending(|eligible| eligible[0]) {
        Ok(order) => order,
        Err(reason) => return reject(BlowdownRejection::NotSmooth(reason)),
    };
    let square = local.meets(j, j);
    if square != -1 {
        return reject(BlowdownRejection::NotMinusOne(square));
    }
    let branches: Vec<(CurveId, i64, Rat)> = local
        .partners(j)
        .into_iter()
        .filter_map(|(c, m)| {
            let coeff = local.curve(c)?.coeff.clone();
            coeff.is_positive().then_some((c, m, coeff))
        })
        .collect();
    let (a, b) = match branches.as_slice() {
        [(a, 1, ca), (b, 1, cb)] if ca.is_one() && cb.is_one() => (*a, *b),
        _ => return reject(BlowdownRejection::WrongBranches(branches)),
    };
    let crossed_before = local.created(a, b);
    if let Err(reason) = local.contract(j) {
        return reject(BlowdownRejection::NotSmooth(reason));
    }
    let crossings = local.created(a, b) - crossed_before;
    if crossings != 1 {
        return reject(BlowdownRejection::BranchesNotTransverse(crossings));
    }
    order.push(j);
    Ok(BlowdownCheck::BlowDown(BlowdownCertificate { order, branches: (a, b) }))
}

pub fn contract_blowdown(state: &SurfaceState, j: CurveId) -> Result<Move> {
    let certificate = match is_log_blowdown(state, j)? {
        BlowdownCheck::BlowDown(c) => c,
        BlowdownCheck::Rejected(r) => return Err(Error::NotABlowdown { curve: j, reason: r.to_string() }),
    };
    let before = analyze(state)?;
    let next = contracted_with(state, j)?;
    let after = check_step_postconditions(state, &next, "log blow-down")?;
    Ok(Move {
        state: next,
        record: MoveRecord {
            kind: MoveKind::LogBlowDown,
            curve: j,
            certificate: MoveCertificate {
                discrepancies_before: before.crepant.discrepancies(),
                discrepancies_after: after.crepant.discrepancies(),
                epsilon: None,
                blowdown_order: Some(certificate.order),
            },
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NefScope {
    /// Every curve contracted by the structure morphism was tested.
    Complete,
    /// Only the marked curves of the model were tested.
    MarkedCurvesOnly,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NefCheck {
    pub nef: bool,
    pub scope: NefScope,
    /// First curve of negative degree.
    pub witness: Option<(CurveId, Rat)>,
}

pub fn is_nef_on_marked(state: &SurfaceState) -> Result<NefCheck> {
    let analysis = analyze(state)?;
    nef_with(state, &analysis)
}

fn nef_with(state: &SurfaceState, analysis: &Analysis) -> Result<NefCheck> {
    let scope = match state.base() {
        BaseDesignation::Point => NefScope::MarkedCurvesOnly,
        BaseDesignation::TargetState(_) => NefScope::Complete,
    };
    for i in state.surviving() {
        if !state.is_exceptional_over_base(i) {
            continue;
        }
        let d = log_degree_with(state, &analysis.crepant, i)?;
        if d.is_negative() {
            return Ok(NefCheck { nef: false, scope, witness: Some((i, d)) });
        }
    }
    Ok(NefCheck { nef: true, scope, witness: None })
}

/// Surviving curves that are log-flopping divisors, in id order.
pub fn flopping_candidates(state: &SurfaceState) -> Result<Vec<CurveId>> {
    let analysis = analyze(state)?;
    flopping_with(state, &analysis)
}

pub(crate) fn flopping_with(state: &SurfaceState, analysis: &Analysis) -> Result<Vec<CurveId>> {
    let mut out = Vec::new();
    for i in state.surviving() {
        if flop_check_with(state, analysis, i)?.is_flopping() {
            out.push(i);
        }
    }
    Ok(out)
}

/// Surviving curves admitting a log blow-down, in id order.
pub fn blowdown_candidates(state: &SurfaceState) -> Result<Vec<CurveId>> {
    let mut out = Vec::new();
    for j in state.surviving() {
        if is_log_blowdown(state, j)?.is_blowdown() {
            out.push(j);
        }
    }
    Ok(out)
}

pub fn is_flop_minimal(state: &SurfaceState) -> Result<bool> {
    let analysis = analyze(state)?;
    require_log_terminal(&analysis)?;
    let nef = nef_with(state, &analysis)?;
    if let Some((curve, degree)) = nef.witness {
        return Err(Error::NotNef { curve, degree });
    }
    Ok(flopping_with(state, &analysis)?.is_empty())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crepant::{classify, log_degree, Classification};
    use crate::fixtures::{self, ids::*};
    use crate::surface::{BlowUpTarget, CrossingPoint, Curve, CurveConfig};

    const ONE: CurveId = CurveId(1);
    const TWO: CurveId = CurveId(2);

    fn set(ids: &[CurveId]) -> BTreeSet<CurveId> {
        ids.iter().copied().collect()
    }

    fn point(c: CurveConfig, s: &[CurveId]) -> SurfaceState {
        SurfaceState::over_point(c, set(s)).unwrap()
    }

    fn over(c: CurveConfig, s: &[CurveId], t: &[CurveId]) -> SurfaceState {
        SurfaceState::new(c, set(s), BaseDesignation::TargetState(set(t))).unwrap()
    }

    #[test]
    fn flopping_examples() {
        let st = over(fixtures::e2(), &[], &[E1, E2]);
        assert_eq!(is_log_flopping(&st, E2).unwrap(), FlopCheck::Flopping);
        assert_eq!(is_log_flopping(&st, E1).unwrap(), FlopCheck::Rejected(FlopRejection::CoefficientOne));
        assert_eq!(is_log_flopping(&st, D1).unwrap(), FlopCheck::Rejected(FlopRejection::NotExceptional));
        assert!(is_log_flopping(&point(fixtures::a1(), &[]), ONE).unwrap().is_flopping());
        assert!(matches!(
            is_log_flopping(&point(fixtures::elliptic(), &[]), ONE).unwrap(),
            FlopCheck::Rejected(FlopRejection::NonzeroDegree(_))
        ));
        assert_eq!(
            is_log_flopping(&st, CurveId(99)),
            Err(Error::Surface(crate::surface::SurfaceError::UnknownCurve(CurveId(99))))
        );
    }

    #[test]
    fn flopping_requires_log_terminal() {
        let st = point(fixtures::e2(), &[E1]);
        assert_eq!(is_log_flopping(&st, E2), Err(Error::NotLogTerminal(Classification::LogCanonical)));
    }

    #[test]
    fn epsilon_examples() {
        let e = epsilon_bound(&point(fixtures::a1(), &[]), ONE).unwrap();
        assert_eq!(e, EpsilonChoice { supremum: Rat::one(), chosen: Rat::new(1, 2) });
        let e = epsilon_bound(&over(fixtures::e2(), &[], &[E1, E2]), E2).unwrap();
        assert_eq!(e, EpsilonChoice { supremum: Rat::one(), chosen: Rat::new(1, 2) });
        let e = epsilon_bound(&point(fixtures::chain(), &[ONE]), TWO).unwrap();
        assert_eq!(e, EpsilonChoice { supremum: Rat::one(), chosen: Rat::new(1, 2) });
        assert!(matches!(epsilon_bound(&over(fixtures::e2(), &[], &[E1, E2]), E1), Err(Error::NotFlopping { .. })));
    }

    /// A (-1)-curve A of coefficient 0 meeting a contracted (-2)-curve B
    /// with e = 3/4 and a boundary curve of coefficient 1/4.
    fn tight_epsilon() -> CurveConfig {
        CurveConfig::new(
            vec![
                Curve::new(1, 0, -1, Rat::zero()),
                Curve::new(2, 0, -2, Rat::zero()),
                Curve::new(3, 0, 0, Rat::one()),
                Curve::new(4, 0, 0, Rat::new(1, 2)),
                Curve::new(5, 0, 0, Rat::new(1, 4)),
            ],
            vec![
                CrossingPoint::crossing(1, 1, 2),
                CrossingPoint::crossing(2, 2, 3),
                CrossingPoint::crossing(3, 2, 4),
                CrossingPoint::crossing(4, 1, 5),
            ],
        )
    }

    #[test]
    fn epsilon_bound_from_contracted_curves() {
        let st = point(tight_epsilon(), &[TWO]);
        assert_eq!(analyze(&st).unwrap().crepant.e(TWO), &Rat::new(3, 4));
        assert_eq!(pushforward_self_intersection(&st, ONE).unwrap(), Rat::new(-1, 2));
        assert!(is_log_flopping(&st, ONE).unwrap().is_flopping());
        let e = epsilon_bound(&st, ONE).unwrap();
        assert_eq!(e, EpsilonChoice { supremum: Rat::new(1, 2), chosen: Rat::new(1, 4) });
    }

    #[test]
    fn contract_flop_examples() {
        let m = contract_flop(&point(fixtures::a1(), &[]), ONE).unwrap();
        assert_eq!(m.state.contracted(), &set(&[ONE]));
        assert_eq!(m.record.certificate.discrepancies_after, BTreeMap::from([(ONE, Rat::zero())]));

        let m = contract_flop(&over(fixtures::e2(), &[], &[E1, E2]), E2).unwrap();
        assert_eq!(m.state.contracted(), &set(&[E2]));
        assert_eq!(analyze(&m.state).unwrap().crepant.e(E2), &Rat::zero());

        let m = contract_flop(&point(fixtures::chain(), &[ONE]), TWO).unwrap();
        assert_eq!(m.state.contracted(), &set(&[ONE, TWO]));
        assert_eq!(m.record.certificate.discrepancies_after, BTreeMap::from([(ONE, Rat::zero()), (TWO, Rat::zero())]));
        assert!(matches!(contract_flop(&point(fixtures::elliptic(), &[]), ONE), Err(Error::NotFlopping { .. })));
    }

    #[test]
    fn blowdown_examples() {
        let st = point(fixtures::e2(), &[E2]);
        match is_log_blowdown(&st, E1).unwrap() {
            BlowdownCheck::BlowDown(c) => {
                assert_eq!(c.order, vec![E2, E1]);
                assert_eq!(c.branches, (D1, D2));
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            is_log_blowdown(&point(fixtures::e2(), &[]), E1).unwrap(),
            BlowdownCheck::Rejected(BlowdownRejection::NotMinusOne(-2))
        ));
        assert!(matches!(
            is_log_blowdown(&point(fixtures::a1(), &[]), ONE).unwrap(),
            BlowdownCheck::Rejected(BlowdownRejection::CoefficientNotOne(_))
        ));
    }

    #[test]
    fn blowdown_rejects_a_single_branch_met_twice() {
        let c = CurveConfig::new(
            vec![Curve::new(1, 0, -1, Rat::one()), Curve::new(2, 0, 0, Rat::one())],
            vec![CrossingPoint::crossing(1, 1, 2), CrossingPoint::crossing(2, 1, 2)],
        );
        assert!(matches!(
            is_log_blowdown(&point(c, &[]), ONE).unwrap(),
            BlowdownCheck::Rejected(BlowdownRejection::WrongBranches(_))
        ));
    }

    #[test]
    fn contract_blowdown_examples() {
        let m = contract_blowdown(&point(fixtures::e2(), &[E2]), E1).unwrap();
        assert_eq!(m.state.contracted(), &set(&[E1, E2]));
        assert_eq!(m.record.certificate.blowdown_order, Some(vec![E2, E1]));

        let m = contract_blowdown(&point(fixtures::e1(), &[]), E1).unwrap();
        assert_eq!(m.state.contracted(), &set(&[E1]));
        assert_eq!(classify(&m.state).unwrap(), Classification::LogTerminal);

        assert!(matches!(contract_blowdown(&point(fixtures::a1(), &[]), ONE), Err(Error::NotABlowdown { .. })));
    }

    #[test]
    fn picard_examples() {
        let st = over(fixtures::e2(), &[], &[E1, E2]);
        assert_eq!(relative_picard_rank(&st), PicardRank::Relative(2));
        let next = contract_flop(&st, E2).unwrap().state;
        assert_eq!(relative_picard_rank(&next), PicardRank::Relative(1));
        let st = point(fixtures::e2().with_picard_rank(Some(4)), &[E2]);
        assert_eq!(relative_picard_rank(&st), PicardRank::Absolute(3));
        let st = point(fixtures::e2(), &[E2]);
        assert_eq!(relative_picard_rank(&st), PicardRank::DeficitFromMaster(1));
        assert_eq!(PicardRank::DeficitFromMaster(2).drop_since(PicardRank::DeficitFromMaster(1)), Some(1));
        assert_eq!(PicardRank::Relative(2).drop_since(PicardRank::Absolute(3)), None);
    }

    #[test]
    fn nef_examples() {
        let n = is_nef_on_marked(&point(fixtures::elliptic(), &[])).unwrap();
        assert!(n.nef);
        assert_eq!(n.scope, NefScope::MarkedCurvesOnly);
        let n = is_nef_on_marked(&point(fixtures::corner(), &[])).unwrap();
        assert!(!n.nef);
        assert_eq!(n.witness, Some((D1, Rat::integer(-1))));
        let n = is_nef_on_marked(&over(fixtures::e2(), &[], &[E1, E2])).unwrap();
        assert!(n.nef);
        assert_eq!(n.scope, NefScope::Complete);
    }

    #[test]
    fn flop_minimal_examples() {
        assert!(!is_flop_minimal(&over(fixtures::e2(), &[], &[E1, E2])).unwrap());
        assert!(is_flop_minimal(&over(fixtures::e2(), &[E2], &[E1, E2])).unwrap());
        assert!(is_flop_minimal(&point(fixtures::elliptic(), &[])).unwrap());
        assert!(matches!(is_flop_minimal(&point(fixtures::corner(), &[])), Err(Error::NotNef { .. })));
    }

    #[test]
    fn epsilon_perturbation_stays_log_terminal() {
        for (c, s, i) in [
            (fixtures::a1(), vec![], ONE),
            (fixtures::chain(), vec![ONE], TWO),
            (fixtures::e2(), vec![], E2),
            (tight_epsilon(), vec![TWO], ONE),
        ] {
            let st = point(c.clone(), &s);
            let eps = epsilon_bound(&st, i).unwrap();
            assert!(eps.supremum.is_positive());
            let mut curves = c.curves().to_vec();
            for cv in &mut curves {
                if cv.id == i {
                    cv.boundary_coeff = &cv.boundary_coeff + &eps.chosen;
                }
            }
            let perturbed = point(CurveConfig::new(curves, c.points().to_vec()), &s);
            assert!(classify(&perturbed).unwrap().is_log_terminal());
            let square = pushforward_self_intersection(&st, i).unwrap();
            assert_eq!(log_degree(&perturbed, i).unwrap(), &eps.chosen * &square);
        }
    }

    #[test]
    fn blowdown_round_trip() {
        // Local model before the final contraction, against a fresh blow-up
        // of the two branches after it.
        let st = point(fixtures::e2(), &[E2]);
        let BlowdownCheck::BlowDown(cert) = is_log_blowdown(&st, E1).unwrap() else { panic!() };
        let (a, b) = cert.branches;
        let mut local = LocalBlowdownModel::around(st.config(), &set(&[E2]), &set(&[E1])).unwrap();
        local.contract_pending(|e| e[0]).unwrap();
        let before = (
            local.meets(a, a),
            local.meets(b, b),
            local.meets(a, b),
            local.meets(a, E1),
            local.meets(b, E1),
            local.meets(E1, E1),
        );
        local.contract(E1).unwrap();
        let image = CurveConfig::new(
            vec![Curve::new(1, 0, local.meets(a, a), Rat::one()), Curve::new(2, 0, local.meets(b, b), Rat::one())],
            vec![CrossingPoint::crossing(1, 1, 2)],
        );
        let (up, e) = image.blow_up(&BlowUpTarget::Point(crate::surface::PointId(1)), Rat::one()).unwrap();
        let after = (
            up.pairing(ONE, ONE).unwrap(),
            up.pairing(TWO, TWO).unwrap(),
            up.pairing(ONE, TWO).unwrap(),
            up.pairing(ONE, e).unwrap(),
            up.pairing(TWO, e).unwrap(),
            up.pairing(e, e).unwrap(),
        );
        assert_eq!(before, after);
    }
}
