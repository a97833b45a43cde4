//! Crepant pullbacks, discrepancies and the klt / log terminal / lc
//! classification of a contracted surface.
//!
//! A [`SurfaceState`] is the surface obtained from the master model by
//! contracting a negative definite curve set `S`. Its log canonical divisor
//! pulls back to `K + Σ e_k C_k` on the master model, where `e_k` is the
//! boundary coefficient for surviving curves and is determined for `k ∈ S`
//! by requiring the pullback to be trivial on every contracted curve.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::ratlin::{is_negative_definite, solve_symmetric, Rat};
use crate::surface::{CurveConfig, CurveId, NotSmoothPoint, PointId, SmoothPointOutcome};

/// What the surface lives over.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BaseDesignation {
    /// Over a point: every curve counts as exceptional.
    Point,
    /// Over the surface obtained by contracting this set.
    TargetState(BTreeSet<CurveId>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SurfaceState {
    config: CurveConfig,
    contracted: BTreeSet<CurveId>,
    base: BaseDesignation,
}

fn ensure_contractible(config: &CurveConfig, set: &BTreeSet<CurveId>, what: &str) -> Result<()> {
    let ids: Vec<CurveId> = set.iter().copied().collect();
    if !is_negative_definite(&config.gram(&ids)?) {
        return Err(Error::InvalidState(format!("{what} {ids:?} is not negative definite")));
    }
    Ok(())
}

impl SurfaceState {
    pub fn new(config: CurveConfig, contracted: BTreeSet<CurveId>, base: BaseDesignation) -> Result<Self> {
        config.validate().map_err(Error::InvalidConfig)?;
        ensure_contractible(&config, &contracted, "contracted set")?;
        if let BaseDesignation::TargetState(target) = &base {
            if !contracted.is_subset(target) {
                return Err(Error::InvalidState("contracted set is not contained in the base's set".into()));
            }
            ensure_contractible(&config, target, "base set")?;
        }
        Ok(SurfaceState { config, contracted, base })
    }

    pub fn over_point(config: CurveConfig, contracted: BTreeSet<CurveId>) -> Result<Self> {
        Self::new(config, contracted, BaseDesignation::Point)
    }

    /// The same surface tower with a different contracted set.
    pub fn with_contracted(&self, contracted: BTreeSet<CurveId>) -> Result<Self> {
        Self::new(self.config.clone(), contracted, self.base.clone())
    }

    pub fn config(&self) -> &CurveConfig {
        &self.config
    }

    pub fn contracted(&self) -> &BTreeSet<CurveId> {
        &self.contracted
    }

    pub fn base(&self) -> &BaseDesignation {
        &self.base
    }

    pub fn is_contracted(&self, id: CurveId) -> bool {
        self.contracted.contains(&id)
    }

    /// Connected components of the contracted set; each maps to one point.
    pub fn components(&self) -> Vec<Vec<CurveId>> {
        self.config.connected_components(&self.contracted).expect("state ids are valid")
    }

    /// Uncontracted curves, in id order.
    pub fn surviving(&self) -> Vec<CurveId> {
        self.config.curves().iter().map(|c| c.id).filter(|c| !self.contracted.contains(c)).collect()
    }

    /// Whether `id` is exceptional over the base.
    pub fn is_exceptional_over_base(&self, id: CurveId) -> bool {
        match &self.base {
            BaseDesignation::Point => true,
            BaseDesignation::TargetState(t) => t.contains(&id),
        }
    }

    fn ensure_surviving(&self, id: CurveId) -> Result<()> {
        self.config.curve(id)?;
        if self.is_contracted(id) {
            return Err(Error::AlreadyContracted(id));
        }
        Ok(())
    }
}

/// Coefficients of the crepant pullback of `K + D` from a contracted surface.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrepantData {
    e: BTreeMap<CurveId, Rat>,
    contracted: BTreeSet<CurveId>,
}

impl CrepantData {
    pub fn e(&self, id: CurveId) -> &Rat {
        &self.e[&id]
    }

    pub fn coefficients(&self) -> &BTreeMap<CurveId, Rat> {
        &self.e
    }

    /// `a_j = -e_j`, defined for contracted curves only.
    pub fn discrepancy(&self, id: CurveId) -> Option<Rat> {
        self.contracted.contains(&id).then(|| -&self.e[&id])
    }

    pub fn discrepancies(&self) -> BTreeMap<CurveId, Rat> {
        self.contracted.iter().map(|&j| (j, -&self.e[&j])).collect()
    }
}

pub fn crepant_pullback(state: &SurfaceState) -> Result<CrepantData> {
    let config = &state.config;
    let s: Vec<CurveId> = state.contracted.iter().copied().collect();
    let mut e: BTreeMap<CurveId, Rat> = config
        .curves()
        .iter()
        .filter(|c| !state.contracted.contains(&c.id))
        .map(|c| (c.id, c.boundary_coeff.clone()))
        .collect();
    if !s.is_empty() {
        let mut rhs = Vec::with_capacity(s.len());
        for &i in &s {
            let mut v = Rat::integer(config.canonical_degree(i)?);
            for (k, m) in config.neighbours(i) {
                if !state.contracted.contains(&k) {
                    v += &e[&k] * m;
                }
            }
            rhs.push(v);
        }
        let a = solve_symmetric(&config.gram(&s)?, &rhs)?;
        for (j, aj) in s.iter().zip(a) {
            e.insert(*j, -aj);
        }
    }
    Ok(CrepantData { e, contracted: state.contracted.clone() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Classification {
    NotLC,
    LogCanonical,
    LogTerminal,
    KLT,
}

impl Classification {
    pub fn is_lc(self) -> bool {
        self >= Classification::LogCanonical
    }

    pub fn is_log_terminal(self) -> bool {
        self >= Classification::LogTerminal
    }

    pub fn is_klt(self) -> bool {
        self == Classification::KLT
    }
}

/// Witness that a component contracts to a smooth point at which the
/// boundary is two coefficient-1 branches crossing once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SncCorner {
    pub order: Vec<CurveId>,
    pub branches: (CurveId, CurveId),
}

/// Why a component failed the corner test.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CornerFailure {
    NotSmooth(NotSmoothPoint),
    /// Boundary branches through the image point, with their coefficients.
    WrongBoundary(Vec<(CurveId, Rat)>),
    /// The two branches meet the image point more than once.
    NotTransverse {
        branches: (CurveId, CurveId),
        crossings: i64,
    },
}

pub fn snc_corner(config: &CurveConfig, component: &BTreeSet<CurveId>) -> Result<Result<SncCorner, CornerFailure>> {
    let (order, local) = match config.smooth_point_blowdown(component)? {
        SmoothPointOutcome::SmoothPoint { order, local } => (order, local),
        SmoothPointOutcome::NotSmoothPoint(reason) => return Ok(Err(CornerFailure::NotSmooth(reason))),
    };
    let boundary: Vec<(CurveId, Rat)> = local
        .through_image()
        .into_iter()
        .filter_map(|c| {
            let coeff = &local.curve(c)?.coeff;
            coeff.is_positive().then(|| (c, coeff.clone()))
        })
        .collect();
    match boundary.as_slice() {
        [(a, ca), (b, cb)] if ca.is_one() && cb.is_one() => {
            let crossings = local.created(*a, *b);
            if crossings == 1 {
                Ok(Ok(SncCorner { order, branches: (*a, *b) }))
            } else {
                Ok(Err(CornerFailure::NotTransverse { branches: (*a, *b), crossings }))
            }
        }
        _ => Ok(Err(CornerFailure::WrongBoundary(boundary))),
    }
}

/// Crepant data, classification and (for lc pairs) lc centers of a state,
/// computed once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Analysis {
    pub crepant: CrepantData,
    pub classification: Classification,
    pub centers: Vec<LcCenter>,
}

pub fn analyze(state: &SurfaceState) -> Result<Analysis> {
    let crepant = crepant_pullback(state)?;
    let classification = classify_with(state, &crepant)?;
    let centers = if classification.is_lc() { centers_with(state, &crepant) } else { Vec::new() };
    Ok(Analysis { crepant, classification, centers })
}

pub fn classify(state: &SurfaceState) -> Result<Classification> {
    let crepant = crepant_pullback(state)?;
    classify_with(state, &crepant)
}

fn classify_with(state: &SurfaceState, crepant: &CrepantData) -> Result<Classification> {
    let one = Rat::one();
    if state.contracted.iter().any(|&j| crepant.e(j) > &one) {
        return Ok(Classification::NotLC);
    }
    for component in state.components() {
        if component.iter().any(|&j| crepant.e(j).is_one()) {
            let set: BTreeSet<CurveId> = component.into_iter().collect();
            if snc_corner(&state.config, &set)?.is_err() {
                return Ok(Classification::LogCanonical);
            }
        }
    }
    let klt = state.contracted.iter().all(|&j| crepant.e(j) < &one)
        && state.config.curves().iter().filter(|c| !state.contracted.contains(&c.id)).all(|c| c.boundary_coeff < one);
    Ok(if klt { Classification::KLT } else { Classification::LogTerminal })
}

/// Center on the contracted surface of a valuation with discrepancy -1.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum LcCenter {
    /// A surviving boundary curve of coefficient 1.
    Divisorial(CurveId),
    /// A crossing of two surviving coefficient-1 curves.
    Node(PointId),
    /// The image point of a contracted component carrying a curve with `e = 1`.
    ComponentImage(Vec<CurveId>),
}

pub fn lc_centers(state: &SurfaceState) -> Result<Vec<LcCenter>> {
    let a = analyze(state)?;
    if !a.classification.is_lc() {
        return Err(Error::InvalidState("lc centers requested for a pair that is not log canonical".into()));
    }
    Ok(a.centers)
}

fn centers_with(state: &SurfaceState, crepant: &CrepantData) -> Vec<LcCenter> {
    let mut out: Vec<LcCenter> = state
        .config
        .curves()
        .iter()
        .filter(|c| !state.contracted.contains(&c.id) && c.boundary_coeff.is_one())
        .map(|c| LcCenter::Divisorial(c.id))
        .collect();
    out.extend(
        state
            .config
            .points()
            .iter()
            .filter(|p| {
                p.is_crossing() && p.incident.iter().all(|&c| !state.contracted.contains(&c) && crepant.e(c).is_one())
            })
            .map(|p| LcCenter::Node(p.id)),
    );
    out.extend(
        state
            .components()
            .into_iter()
            .filter(|comp| comp.iter().any(|&j| crepant.e(j).is_one()))
            .map(LcCenter::ComponentImage),
    );
    out
}

/// Coefficients `μ_j` of the contracted curves in the pullback of the image
/// of `C_i`: `gram(S) μ = -(C_i · C_j)_j`.
pub fn pullback_multiplicities(state: &SurfaceState, i: CurveId) -> Result<BTreeMap<CurveId, Rat>> {
    state.ensure_surviving(i)?;
    let s: Vec<CurveId> = state.contracted.iter().copied().collect();
    if s.is_empty() {
        return Ok(BTreeMap::new());
    }
    let rhs = s.iter().map(|&j| state.config.pairing(i, j).map(|v| Rat::integer(-v))).collect::<Result<Vec<_>, _>>()?;
    let mu = solve_symmetric(&state.config.gram(&s)?, &rhs)?;
    Ok(s.into_iter().zip(mu).collect())
}

/// Self-intersection of the image of `C_i` on the contracted surface.
pub fn pushforward_self_intersection(state: &SurfaceState, i: CurveId) -> Result<Rat> {
    let mu = pullback_multiplicities(state, i)?;
    let mut v = Rat::integer(state.config.pairing(i, i)?);
    for (j, m) in mu {
        let p = state.config.pairing(i, j)?;
        if p != 0 {
            v += m * p;
        }
    }
    Ok(v)
}

/// `(K + D) · C̄_i` on the contracted surface, via the projection formula.
pub fn log_degree(state: &SurfaceState, i: CurveId) -> Result<Rat> {
    let crepant = crepant_pullback(state)?;
    log_degree_with(state, &crepant, i)
}

pub(crate) fn log_degree_with(state: &SurfaceState, crepant: &CrepantData, i: CurveId) -> Result<Rat> {
    state.ensure_surviving(i)?;
    let config = &state.config;
    let mut v = Rat::integer(config.canonical_degree(i)?) + crepant.e(i) * config.pairing(i, i)?;
    for (k, m) in config.neighbours(i) {
        v += crepant.e(k) * m;
    }
    Ok(v)
}

/// Whether contracting `to ∖ from` on top of `from` is log crepant.
pub fn is_log_crepant(config: &CurveConfig, from: &BTreeSet<CurveId>, to: &BTreeSet<CurveId>) -> Result<bool> {
    Ok(crepancy_defect(config, from, to)?.is_none())
}

/// The first exceptional curve whose crepant coefficient differs from its
/// boundary coefficient, as `(curve, e, d)`.
pub fn crepancy_defect(
    config: &CurveConfig,
    from: &BTreeSet<CurveId>,
    to: &BTreeSet<CurveId>,
) -> Result<Option<(CurveId, Rat, Rat)>> {
    if !from.is_subset(to) {
        return Err(Error::NotNested);
    }
    SurfaceState::over_point(config.clone(), from.clone())?;
    let target = SurfaceState::over_point(config.clone(), to.clone())?;
    let crepant = crepant_pullback(&target)?;
    for &j in to.difference(from) {
        let d = &config.curve(j)?.boundary_coeff;
        if crepant.e(j) != d {
            return Ok(Some((j, crepant.e(j).clone(), d.clone())));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{self, ids::*};

    fn set(ids: &[CurveId]) -> BTreeSet<CurveId> {
        ids.iter().copied().collect()
    }

    fn state(c: CurveConfig, s: &[CurveId]) -> SurfaceState {
        SurfaceState::over_point(c, set(s)).unwrap()
    }

    const ONE: CurveId = CurveId(1);

    #[test]
    fn invalid_states() {
        assert!(matches!(SurfaceState::over_point(fixtures::corner(), set(&[D1])), Err(Error::InvalidState(_))));
        assert!(matches!(
            SurfaceState::new(fixtures::e2(), set(&[E2]), BaseDesignation::TargetState(set(&[E1]))),
            Err(Error::InvalidState(_))
        ));
        assert!(matches!(
            SurfaceState::new(fixtures::e2(), set(&[]), BaseDesignation::TargetState(set(&[D1, E1, E2, D2]))),
            Err(Error::InvalidState(_))
        ));
        let mut bad = fixtures::a1().curves().to_vec();
        bad[0].boundary_coeff = Rat::integer(2);
        assert!(matches!(
            SurfaceState::over_point(CurveConfig::new(bad, vec![]), set(&[])),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn pullback_examples() {
        let cd = crepant_pullback(&state(fixtures::a1(), &[ONE])).unwrap();
        assert_eq!(cd.discrepancy(ONE), Some(Rat::zero()));

        let cd = crepant_pullback(&state(fixtures::e2(), &[E1, E2])).unwrap();
        assert_eq!(cd.discrepancies().into_values().collect::<Vec<_>>(), vec![Rat::integer(-1), Rat::zero()]);
        assert_eq!(cd.e(E1), &Rat::one());
        assert_eq!(cd.e(E2), &Rat::zero());
        assert_eq!(cd.e(D1), &Rat::one());

        let cd = crepant_pullback(&state(fixtures::e2(), &[])).unwrap();
        assert!(cd.discrepancies().is_empty());
        assert_eq!(cd.e(E2), &Rat::zero());
        assert_eq!(cd.discrepancy(E1), None);
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify(&state(fixtures::e2(), &[E2])).unwrap(), Classification::LogTerminal);
        assert_eq!(classify(&state(fixtures::e2(), &[E1, E2])).unwrap(), Classification::LogTerminal);
        let ell = state(fixtures::elliptic(), &[ONE]);
        assert_eq!(crepant_pullback(&ell).unwrap().discrepancy(ONE), Some(Rat::integer(-1)));
        assert_eq!(classify(&ell).unwrap(), Classification::LogCanonical);
        assert_eq!(classify(&state(fixtures::a1(), &[ONE])).unwrap(), Classification::KLT);
        assert_eq!(classify(&state(fixtures::chain(), &[ONE, CurveId(2)])).unwrap(), Classification::KLT);
        // A (-2)-curve through two boundary branches is a log canonical centre
        // at a singular point.
        assert_eq!(classify(&state(fixtures::e2(), &[E1])).unwrap(), Classification::LogCanonical);
    }

    #[test]
    fn not_lc_when_discrepancy_below_minus_one() {
        // Elliptic (-1)-curve with boundary curve through it: a < -1.
        let c = CurveConfig::new(
            vec![crate::surface::Curve::new(1, 1, -1, Rat::zero()), crate::surface::Curve::new(2, 0, 0, Rat::one())],
            vec![crate::surface::CrossingPoint::crossing(1, 1, 2)],
        );
        let s = state(c, &[ONE]);
        assert_eq!(crepant_pullback(&s).unwrap().e(ONE), &Rat::integer(2));
        assert_eq!(classify(&s).unwrap(), Classification::NotLC);
        assert!(lc_centers(&s).is_err());
    }

    #[test]
    fn lc_center_examples() {
        let centers = lc_centers(&state(fixtures::corner(), &[])).unwrap();
        assert_eq!(centers, vec![LcCenter::Divisorial(D1), LcCenter::Divisorial(D2), LcCenter::Node(PointId(1))]);
        assert!(lc_centers(&state(fixtures::a1(), &[ONE])).unwrap().is_empty());
        let centers = lc_centers(&state(fixtures::e2(), &[])).unwrap();
        assert_eq!(
            centers,
            vec![
                LcCenter::Divisorial(D1),
                LcCenter::Divisorial(D2),
                LcCenter::Divisorial(E1),
                LcCenter::Node(PointId(2)),
                LcCenter::Node(PointId(3)),
            ]
        );
        let centers = lc_centers(&state(fixtures::e2(), &[E1, E2])).unwrap();
        assert_eq!(
            centers,
            vec![LcCenter::Divisorial(D1), LcCenter::Divisorial(D2), LcCenter::ComponentImage(vec![E1, E2])]
        );
    }

    #[test]
    fn pushforward_examples() {
        assert_eq!(pushforward_self_intersection(&state(fixtures::e2(), &[E2]), E1).unwrap(), Rat::integer(-1));
        assert_eq!(pushforward_self_intersection(&state(fixtures::e2(), &[]), E1).unwrap(), Rat::integer(-2));
        assert_eq!(pushforward_self_intersection(&state(fixtures::e2(), &[E1]), E2).unwrap(), Rat::new(-1, 2));
        assert_eq!(pushforward_self_intersection(&state(fixtures::e2(), &[E1]), E1), Err(Error::AlreadyContracted(E1)));
    }

    #[test]
    fn log_degree_examples() {
        assert_eq!(log_degree(&state(fixtures::e2(), &[]), E2).unwrap(), Rat::zero());
        assert_eq!(log_degree(&state(fixtures::a1(), &[]), ONE).unwrap(), Rat::zero());
        assert_eq!(log_degree(&state(fixtures::corner(), &[]), D1).unwrap(), Rat::integer(-1));
        assert_eq!(log_degree(&state(fixtures::elliptic(), &[]), ONE).unwrap(), Rat::one());
    }

    #[test]
    fn log_crepant_examples() {
        let e2 = fixtures::e2();
        assert!(is_log_crepant(&e2, &set(&[]), &set(&[E1, E2])).unwrap());
        assert!(is_log_crepant(&e2, &set(&[]), &set(&[E2])).unwrap());
        assert!(!is_log_crepant(&fixtures::a1_half(), &set(&[]), &set(&[ONE])).unwrap());
        assert_eq!(is_log_crepant(&e2, &set(&[E1]), &set(&[E2])), Err(Error::NotNested));
    }

    #[test]
    fn corner_witness() {
        let w = snc_corner(&fixtures::e2(), &set(&[E1, E2])).unwrap().unwrap();
        assert_eq!(w.order, vec![E2, E1]);
        assert_eq!(w.branches, (D1, D2));
        let fail = snc_corner(&fixtures::e2(), &set(&[E2])).unwrap().unwrap_err();
        assert!(matches!(fail, CornerFailure::WrongBoundary(_)));
    }
}
