//! Drivers: two-phase factorization of a log crepant morphism, the
//! minimization loop, trace replay and the random crepant-pair generator.

use std::collections::BTreeSet;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::crepant::{analyze, crepancy_defect, BaseDesignation, SurfaceState};
use crate::error::{Error, Result};
use crate::moves::{
    blowdown_candidates, contract_blowdown, contract_flop, flop_check_with, flopping_candidates, is_flop_minimal,
    is_log_blowdown, is_nef_on_marked, FlopCheck, Move, MoveKind, MoveRecord,
};
use crate::ratlin::Rat;
use crate::surface::{BlowUpTarget, CurveConfig, CurveId};

/// Nested contracted sets `from ⊆ to` on one master model, describing the
/// morphism `X(from) → X(to)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MorphismSpec {
    config: CurveConfig,
    from: BTreeSet<CurveId>,
    to: BTreeSet<CurveId>,
}

impl MorphismSpec {
    pub fn new(config: CurveConfig, from: BTreeSet<CurveId>, to: BTreeSet<CurveId>) -> Result<Self> {
        if !from.is_subset(&to) {
            return Err(Error::NotNested);
        }
        for s in [&from, &to] {
            let state = SurfaceState::over_point(config.clone(), s.clone())?;
            let class = analyze(&state)?.classification;
            if !class.is_log_terminal() {
                return Err(Error::NotLogTerminal(class));
            }
        }
        if let Some((curve, e, d)) = crepancy_defect(&config, &from, &to)? {
            return Err(Error::NotCrepant { curve, e, d });
        }
        Ok(MorphismSpec { config, from, to })
    }

    pub fn config(&self) -> &CurveConfig {
        &self.config
    }

    pub fn from(&self) -> &BTreeSet<CurveId> {
        &self.from
    }

    pub fn to(&self) -> &BTreeSet<CurveId> {
        &self.to
    }

    /// Curves contracted by the morphism.
    pub fn exceptional(&self) -> BTreeSet<CurveId> {
        self.to.difference(&self.from).copied().collect()
    }

    pub fn source_state(&self) -> SurfaceState {
        SurfaceState::new(self.config.clone(), self.from.clone(), BaseDesignation::TargetState(self.to.clone()))
            .expect("validated in MorphismSpec::new")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceKind {
    Decomposition,
    Minimization,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecompositionTrace {
    pub kind: TraceKind,
    pub base: BaseDesignation,
    pub start: BTreeSet<CurveId>,
    pub end: BTreeSet<CurveId>,
    pub steps: Vec<MoveRecord>,
    /// Number of flop steps; the state after them is flop-minimal.
    pub fm_index: usize,
}

impl DecompositionTrace {
    pub fn kinds(&self) -> Vec<MoveKind> {
        self.steps.iter().map(|s| s.kind).collect()
    }
}

impl fmt::Display for DecompositionTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (k, step) in self.steps.iter().enumerate() {
            if k == self.fm_index {
                parts.push("fm".to_string());
            }
            parts.push(format!("{}({})", step.kind, step.curve));
        }
        if self.fm_index == self.steps.len() {
            parts.push("fm".to_string());
        }
        f.write_str(&parts.join(" "))
    }
}

fn violation(msg: impl Into<String>) -> Error {
    Error::TheoremViolation(msg.into())
}

/// Lowest-id choice, the default everywhere.
pub fn lowest(_: MoveKind, _: &[CurveId]) -> usize {
    0
}

pub fn decompose_morphism(m: &MorphismSpec) -> Result<DecompositionTrace> {
    decompose_morphism_by(m, lowest)
}

/// [`decompose_morphism`] with the candidate picked by `pick`, which gets
/// the candidates in id order and returns an index into them.
pub fn decompose_morphism_by(
    m: &MorphismSpec,
    mut pick: impl FnMut(MoveKind, &[CurveId]) -> usize,
) -> Result<DecompositionTrace> {
    let target = m.to.clone();
    let mut state = m.source_state();
    let mut steps = Vec::new();

    loop {
        let analysis = analyze(&state)?;
        let mut candidates = Vec::new();
        for i in target.difference(state.contracted()) {
            if m.config.curve(*i)?.boundary_coeff < Rat::one() {
                if let FlopCheck::Rejected(r) = flop_check_with(&state, &analysis, *i)? {
                    return Err(violation(format!(
                        "phase 1: exceptional curve {i} with coefficient < 1 is not flopping: {r}"
                    )));
                }
                candidates.push(*i);
            }
        }
        if candidates.is_empty() {
            break;
        }
        let i = candidates[pick(MoveKind::FlopContraction, &candidates)];
        let Move { state: next, record } = contract_flop(&state, i)?;
        state = next;
        steps.push(record);
    }
    let fm_index = steps.len();
    match is_flop_minimal(&state) {
        Ok(true) => {}
        Ok(false) => return Err(violation("phase 1 ended at a state that is not flop-minimal")),
        Err(e) => return Err(violation(format!("phase 1 ended at an invalid state: {e}"))),
    }

    while state.contracted() != &target {
        let mut candidates = Vec::new();
        for j in target.difference(state.contracted()) {
            if is_log_blowdown(&state, *j)?.is_blowdown() {
                candidates.push(*j);
            }
        }
        if candidates.is_empty() {
            return Err(Error::StuckInPhase2 { remaining: target.difference(state.contracted()).copied().collect() });
        }
        let j = candidates[pick(MoveKind::LogBlowDown, &candidates)];
        let Move { state: next, record } = contract_blowdown(&state, j)?;
        state = next;
        steps.push(record);
    }

    Ok(DecompositionTrace {
        kind: TraceKind::Decomposition,
        base: state.base().clone(),
        start: m.from.clone(),
        end: state.contracted().clone(),
        steps,
        fm_index,
    })
}

pub fn minimize(state: &SurfaceState) -> Result<DecompositionTrace> {
    if state.base() != &BaseDesignation::Point {
        return Err(Error::InvalidState("minimization runs over a point base".into()));
    }
    let class = analyze(state)?.classification;
    if !class.is_log_terminal() {
        return Err(Error::NotLogTerminal(class));
    }
    if let Some((curve, degree)) = is_nef_on_marked(state)?.witness {
        return Err(Error::NotNef { curve, degree });
    }
    let budget = state.surviving().len();
    let mut current = state.clone();
    let mut steps: Vec<MoveRecord> = Vec::new();
    let mut fm_index = None;
    loop {
        let flops = flopping_candidates(&current)?;
        let step = if let Some(&i) = flops.first() {
            if fm_index.is_some() {
                return Err(violation(format!("curve {i} became flopping after a log blow-down")));
            }
            contract_flop(&current, i)?
        } else {
            fm_index.get_or_insert(steps.len());
            match blowdown_candidates(&current)?.first() {
                Some(&j) => contract_blowdown(&current, j)?,
                None => break,
            }
        };
        current = step.state;
        steps.push(step.record);
        if let Some((curve, degree)) = is_nef_on_marked(&current)?.witness {
            return Err(violation(format!("nefness lost: curve {curve} has degree {degree}")));
        }
        if steps.len() > budget {
            return Err(violation("minimization exceeded the number of marked curves"));
        }
    }
    Ok(DecompositionTrace {
        kind: TraceKind::Minimization,
        base: BaseDesignation::Point,
        start: state.contracted().clone(),
        end: current.contracted().clone(),
        fm_index: fm_index.unwrap_or(steps.len()),
        steps,
    })
}

/// Outcome of [`verify_trace`]: `failure` names the first failed check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceVerdict {
    pub failure: Option<String>,
}

impl TraceVerdict {
    pub fn accepted(&self) -> bool {
        self.failure.is_none()
    }
}

pub fn verify_trace(config: &CurveConfig, start: &BTreeSet<CurveId>, trace: &DecompositionTrace) -> TraceVerdict {
    TraceVerdict { failure: replay(config, start, trace).err() }
}

fn replay(config: &CurveConfig, start: &BTreeSet<CurveId>, trace: &DecompositionTrace) -> Result<(), String> {
    if &trace.start != start {
        return Err(format!("trace starts at {:?}, expected {start:?}", trace.start));
    }
    if trace.fm_index > trace.steps.len() {
        return Err(format!("fm index {} is past the last step", trace.fm_index));
    }
    match (&trace.kind, &trace.base) {
        (TraceKind::Decomposition, BaseDesignation::TargetState(t)) => {
            MorphismSpec::new(config.clone(), start.clone(), t.clone())
                .map_err(|e| format!("invalid morphism: {e}"))?;
            if &trace.end != t {
                return Err(format!("decomposition ends at {:?}, not at the target {t:?}", trace.end));
            }
        }
        (TraceKind::Decomposition, BaseDesignation::Point) => return Err("decomposition trace without a target".into()),
        (TraceKind::Minimization, BaseDesignation::Point) => {}
        (TraceKind::Minimization, BaseDesignation::TargetState(_)) => {
            return Err("minimization trace must be over a point".into())
        }
    }
    let mut state = SurfaceState::new(config.clone(), start.clone(), trace.base.clone())
        .map_err(|e| format!("invalid start state: {e}"))?;
    if trace.kind == TraceKind::Minimization {
        let nef = is_nef_on_marked(&state).map_err(|e| e.to_string())?;
        if let Some((c, d)) = nef.witness {
            return Err(format!("start is not nef: curve {c} has degree {d}"));
        }
    }
    for (k, step) in trace.steps.iter().enumerate() {
        if k == trace.fm_index {
            check_flop_minimal(&state, k)?;
        }
        let expected = if k < trace.fm_index { MoveKind::FlopContraction } else { MoveKind::LogBlowDown };
        if step.kind != expected {
            return Err(format!("step {k}: {} where the phase requires {expected}", step.kind));
        }
        let Move { state: next, record } = match step.kind {
            MoveKind::FlopContraction => contract_flop(&state, step.curve),
            MoveKind::LogBlowDown => contract_blowdown(&state, step.curve),
        }
        .map_err(|e| format!("step {k}: {e}"))?;
        if &record != step {
            return Err(format!("step {k}: recorded certificate for curve {} does not match the replay", step.curve));
        }
        state = next;
    }
    if trace.fm_index == trace.steps.len() {
        check_flop_minimal(&state, trace.steps.len())?;
    }
    if state.contracted() != &trace.end {
        return Err(format!("replay ends at {:?}, trace claims {:?}", state.contracted(), trace.end));
    }
    if trace.kind == TraceKind::Minimization {
        let left = blowdown_candidates(&state).map_err(|e| e.to_string())?;
        if let Some(j) = left.first() {
            return Err(format!("final state still admits the log blow-down of {j}"));
        }
    }
    Ok(())
}

fn check_flop_minimal(state: &SurfaceState, k: usize) -> Result<(), String> {
    match is_flop_minimal(state) {
        Ok(true) => Ok(()),
        Ok(false) => Err(format!("state before step {k} is marked flop-minimal but is not")),
        Err(e) => Err(format!("state before step {k}: {e}")),
    }
}

/// Blow-up targets that keep the morphism log crepant, with the coefficient
/// the new curve must get: crossings of coefficient sum `≥ 1`, then free
/// points on coefficient-1 curves.
pub fn admissible_targets(config: &CurveConfig) -> Vec<(BlowUpTarget, Rat)> {
    let mut out = Vec::new();
    for p in config.points() {
        if !p.is_crossing() {
            continue;
        }
        let sum: Rat = p
            .incident
            .iter()
            .map(|c| config.curve(*c).map(|c| c.boundary_coeff.clone()).unwrap_or_else(|_| Rat::zero()))
            .sum();
        if sum >= Rat::one() {
            out.push((BlowUpTarget::Point(p.id), sum - 1));
        }
    }
    for c in config.curves() {
        if c.boundary_coeff.is_one() {
            out.push((BlowUpTarget::FreePointOn(c.id), Rat::zero()));
        }
    }
    out
}

pub fn generate_crepant_pair(template: &CurveConfig, depth: usize, seed: u64) -> Result<MorphismSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    generate_crepant_pair_by(template, depth, |targets| rng.gen_range(0..targets.len()))
}

/// [`generate_crepant_pair`] with the target at each step picked by `pick`
/// from [`admissible_targets`].
pub fn generate_crepant_pair_by(
    template: &CurveConfig,
    depth: usize,
    mut pick: impl FnMut(&[(BlowUpTarget, Rat)]) -> usize,
) -> Result<MorphismSpec> {
    template.validate().map_err(Error::InvalidConfig)?;
    let mut config = template.clone();
    let mut created = BTreeSet::new();
    for _ in 0..depth {
        let targets = admissible_targets(&config);
        if targets.is_empty() {
            return Err(Error::NoAdmissibleTarget);
        }
        let (target, coeff) = &targets[pick(&targets)];
        let (next, id) = config.blow_up(target, coeff.clone())?;
        config = next;
        created.insert(id);
    }
    MorphismSpec::new(config, BTreeSet::new(), created)
        .map_err(|e| violation(format!("generated pair is not a valid morphism: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crepant::{lc_centers, LcCenter};
    use crate::fixtures::{self, ids::*};
    use crate::moves::{is_log_flopping, relative_picard_rank, FlopRejection};
    use crate::surface::PointId;
    use proptest::prelude::*;

    fn set(ids: &[CurveId]) -> BTreeSet<CurveId> {
        ids.iter().copied().collect()
    }

    fn fix_e2_spec() -> MorphismSpec {
        MorphismSpec::new(fixtures::e2(), set(&[]), set(&[E1, E2])).unwrap()
    }

    #[test]
    fn decompose_fix_e2() {
        let t = decompose_morphism(&fix_e2_spec()).unwrap();
        assert_eq!(t.kinds(), vec![MoveKind::FlopContraction, MoveKind::LogBlowDown]);
        assert_eq!(t.steps.iter().map(|s| s.curve).collect::<Vec<_>>(), vec![E2, E1]);
        assert_eq!(t.fm_index, 1);
        assert_eq!(t.to_string(), "Flop(4) fm LogBlowDown(3)");
        let last = &t.steps[1].certificate.discrepancies_after;
        assert_eq!(last[&E1], Rat::integer(-1));
        assert_eq!(last[&E2], Rat::zero());
        assert!(verify_trace(&fixtures::e2(), &set(&[]), &t).accepted());
    }

    #[test]
    fn identity_morphism() {
        let m = MorphismSpec::new(fixtures::e2(), set(&[E2]), set(&[E2])).unwrap();
        let t = decompose_morphism(&m).unwrap();
        assert!(t.steps.is_empty());
        assert_eq!(t.fm_index, 0);
        assert!(verify_trace(&fixtures::e2(), &set(&[E2]), &t).accepted());
    }

    #[test]
    fn morphism_errors() {
        let one = CurveId(1);
        assert!(matches!(MorphismSpec::new(fixtures::a1_half(), set(&[]), set(&[one])), Err(Error::NotCrepant { .. })));
        assert_eq!(MorphismSpec::new(fixtures::e2(), set(&[E1]), set(&[E2])), Err(Error::NotNested));
        assert!(matches!(
            MorphismSpec::new(fixtures::elliptic(), set(&[]), set(&[one])),
            Err(Error::NotLogTerminal(_))
        ));
    }

    #[test]
    fn swapped_trace_is_rejected() {
        let mut t = decompose_morphism(&fix_e2_spec()).unwrap();
        t.steps.swap(0, 1);
        let v = verify_trace(&fixtures::e2(), &set(&[]), &t);
        assert!(!v.accepted());
        assert!(v.failure.unwrap().contains("phase"));
    }

    #[test]
    fn tampered_traces_are_rejected() {
        let t = decompose_morphism(&fix_e2_spec()).unwrap();
        let mut bad = t.clone();
        bad.steps[0].certificate.epsilon = None;
        assert!(!verify_trace(&fixtures::e2(), &set(&[]), &bad).accepted());
        let mut bad = t.clone();
        bad.fm_index = 0;
        assert!(!verify_trace(&fixtures::e2(), &set(&[]), &bad).accepted());
        let mut bad = t.clone();
        bad.steps.pop();
        bad.end = set(&[E2]);
        assert!(!verify_trace(&fixtures::e2(), &set(&[]), &bad).accepted());
        assert!(!verify_trace(&fixtures::e2(), &set(&[E2]), &t).accepted());
    }

    #[test]
    fn minimize_fixtures() {
        let one = CurveId(1);
        let t = minimize(&SurfaceState::over_point(fixtures::a1(), set(&[])).unwrap()).unwrap();
        assert_eq!(t.kinds(), vec![MoveKind::FlopContraction]);
        assert_eq!(t.end, set(&[one]));
        assert_eq!(t.fm_index, 1);
        assert!(verify_trace(&fixtures::a1(), &set(&[]), &t).accepted());

        let t = minimize(&SurfaceState::over_point(fixtures::elliptic(), set(&[])).unwrap()).unwrap();
        assert!(t.steps.is_empty());

        assert!(matches!(
            minimize(&SurfaceState::over_point(fixtures::corner(), set(&[])).unwrap()),
            Err(Error::NotNef { curve: D1, .. })
        ));
        assert!(matches!(
            minimize(&SurfaceState::new(fixtures::e2(), set(&[]), BaseDesignation::TargetState(set(&[E2]))).unwrap()),
            Err(Error::InvalidState(_))
        ));
    }

    #[test]
    fn minimize_is_idempotent_on_fixtures() {
        for c in [fixtures::a1(), fixtures::chain(), fixtures::elliptic()] {
            let st = SurfaceState::over_point(c.clone(), set(&[])).unwrap();
            let t = minimize(&st).unwrap();
            let again = minimize(&SurfaceState::over_point(c, t.end).unwrap()).unwrap();
            assert!(again.steps.is_empty());
        }
    }

    #[test]
    fn generator_reproduces_fix_e2() {
        let m = generate_crepant_pair_by(&fixtures::corner(), 2, |targets| {
            targets
                .iter()
                .position(|(t, _)| matches!(t, BlowUpTarget::Point(PointId(1)) | BlowUpTarget::FreePointOn(CurveId(3))))
                .unwrap()
        })
        .unwrap();
        let strip = |c: &CurveConfig| {
            let curves = c.curves().iter().map(|c| crate::surface::Curve { name: None, ..c.clone() }).collect();
            CurveConfig::new(curves, c.points().to_vec())
        };
        assert_eq!(strip(m.config()), strip(&fixtures::e2()));
        assert_eq!(m.to(), &set(&[E1, E2]));
    }

    #[test]
    fn generator_edge_cases() {
        let m = generate_crepant_pair(&fixtures::chain(), 0, 7).unwrap();
        assert_eq!(m.config(), &fixtures::chain());
        assert!(m.to().is_empty());
        assert_eq!(generate_crepant_pair(&fixtures::chain(), 1, 7), Err(Error::NoAdmissibleTarget));
        assert_eq!(
            generate_crepant_pair(&fixtures::corner(), 5, 42),
            generate_crepant_pair(&fixtures::corner(), 5, 42)
        );
    }

    #[test]
    fn admissible_coefficients() {
        let targets = admissible_targets(&fixtures::mixed_chain());
        assert_eq!(
            targets,
            vec![
                (BlowUpTarget::Point(PointId(1)), Rat::new(1, 2)),
                (BlowUpTarget::Point(PointId(2)), Rat::new(1, 6)),
                (BlowUpTarget::FreePointOn(CurveId(1)), Rat::zero()),
            ]
        );
    }

    fn pair_strategy(max_depth: usize) -> impl Strategy<Value = MorphismSpec> {
        (0..fixtures::crepant_templates().len(), 0..=max_depth, any::<u64>())
            .prop_map(|(t, depth, seed)| generate_crepant_pair(&fixtures::crepant_templates()[t], depth, seed).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn decomposition_end_to_end(m in pair_strategy(8)) {
            let t = decompose_morphism(&m).unwrap();
            prop_assert_eq!(t.steps.len(), m.exceptional().len());
            prop_assert!(verify_trace(m.config(), m.from(), &t).accepted());
            let mut state = m.source_state();
            for step in &t.steps {
                let next = state.with_contracted(state.contracted().iter().copied().chain([step.curve]).collect()).unwrap();
                prop_assert_eq!(relative_picard_rank(&next).drop_since(relative_picard_rank(&state)), Some(1));
                state = next;
            }
        }

        #[test]
        fn exceptional_curves_avoid_lc_centres(m in pair_strategy(8)) {
            let state = m.source_state();
            let centers = lc_centers(&state).unwrap();
            for i in m.exceptional() {
                if m.config().curve(i).unwrap().boundary_coeff < Rat::one() {
                    let check = is_log_flopping(&state, i).unwrap();
                    let avoids = !matches!(
                        check,
                        FlopCheck::Rejected(FlopRejection::OnNode(_) | FlopRejection::MeetsLcComponent(_))
                    );
                    prop_assert!(avoids, "curve {} rejected: {:?} with centres {:?}", i, check, centers);
                    for c in &centers {
                        if let LcCenter::Node(p) = c {
                            prop_assert!(!m.config().point(*p).unwrap().contains(i));
                        }
                    }
                }
            }
        }

        #[test]
        fn mid_trace_redecomposition(m in pair_strategy(8), cut in 0usize..16) {
            let t = decompose_morphism(&m).unwrap();
            let cut = cut % (t.steps.len() + 1);
            let mid: BTreeSet<CurveId> = m.from().iter().copied().chain(t.steps[..cut].iter().map(|s| s.curve)).collect();
            let rest = MorphismSpec::new(m.config().clone(), mid.clone(), m.to().clone()).unwrap();
            let t2 = decompose_morphism(&rest).unwrap();
            prop_assert_eq!(t2.steps.len(), m.exceptional().len() - cut);
            prop_assert!(verify_trace(m.config(), &mid, &t2).accepted());
        }

        #[test]
        fn minimize_is_idempotent(m in pair_strategy(6)) {
            let st = SurfaceState::over_point(m.config().clone(), m.to().clone()).unwrap();
            match minimize(&st) {
                Ok(t) => {
                    prop_assert!(verify_trace(m.config(), m.to(), &t).accepted());
                    let again = minimize(&SurfaceState::over_point(m.config().clone(), t.end).unwrap()).unwrap();
                    prop_assert!(again.steps.is_empty());
                }
                Err(Error::NotNef { .. }) => {}
                Err(e) => prop_assert!(false, "{}", e),
            }
        }
    }
}
