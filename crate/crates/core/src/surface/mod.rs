//! The master model: a simple normal crossing configuration of curves on a
//! smooth surface.
//!
//! Intersection numbers are structural. Two distinct curves meet exactly at
//! the crossing points they share, each crossing transverse, so tangencies
//! and triple points cannot be expressed at all. Free points on a curve are
//! not stored; only crossings and explicitly marked smooth points are.

mod blowdown;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::ratlin::{is_negative_definite, Rat, SymMatrix};

pub use blowdown::{LocalBlowdownModel, LocalCurve, NotSmoothPoint, SmoothPointOutcome};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CurveId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PointId(pub u32);

impl fmt::Display for CurveId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for PointId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Curve {
    pub id: CurveId,
    /// Optional human-readable label, e.g. `E1`.
    pub name: Option<String>,
    pub genus: u32,
    pub self_intersection: i64,
    pub boundary_coeff: Rat,
}

impl Curve {
    pub fn new(id: u32, genus: u32, self_intersection: i64, boundary_coeff: Rat) -> Self {
        Curve { id: CurveId(id), name: None, genus, self_intersection, boundary_coeff }
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn label(&self) -> String {
        self.name.clone().unwrap_or_else(|| self.id.to_string())
    }
}

/// A transverse crossing of two curves, or a marked smooth point on one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrossingPoint {
    pub id: PointId,
    pub incident: Vec<CurveId>,
}

impl CrossingPoint {
    pub fn crossing(id: u32, a: u32, b: u32) -> Self {
        let mut incident = vec![CurveId(a), CurveId(b)];
        incident.sort();
        CrossingPoint { id: PointId(id), incident }
    }

    pub fn marked(id: u32, on: u32) -> Self {
        CrossingPoint { id: PointId(id), incident: vec![CurveId(on)] }
    }

    pub fn is_crossing(&self) -> bool {
        self.incident.len() == 2
    }

    pub fn contains(&self, c: CurveId) -> bool {
        self.incident.contains(&c)
    }

    fn joins(&self, a: CurveId, b: CurveId) -> bool {
        self.is_crossing() && self.contains(a) && self.contains(b)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BlowUpTarget {
    Point(PointId),
    FreePointOn(CurveId),
    Generic,
}

impl fmt::Display for BlowUpTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BlowUpTarget::Point(p) => write!(f, "point:{p}"),
            BlowUpTarget::FreePointOn(c) => write!(f, "free:{c}"),
            BlowUpTarget::Generic => write!(f, "generic"),
        }
    }
}

/// A broken configuration invariant, as reported by [`CurveConfig::validate`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("point {point} has {} incident curves (at most two allowed)", incident.len())]
    TriplePoint { point: PointId, incident: Vec<CurveId> },
    #[error("point {point} has no incident curve")]
    EmptyPoint { point: PointId },
    #[error("point {point} lists curve {curve} twice")]
    RepeatedIncidence { point: PointId, curve: CurveId },
    #[error("curve {curve} has boundary coefficient {coeff} outside [0, 1]")]
    BadCoefficient { curve: CurveId, coeff: Rat },
    #[error("point {point} references unknown curve {curve}")]
    DanglingId { point: PointId, curve: CurveId },
    #[error("curve id {0} is used more than once")]
    DuplicateCurveId(CurveId),
    #[error("point id {0} is used more than once")]
    DuplicatePointId(PointId),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SurfaceError {
    #[error("unknown curve {0}")]
    UnknownCurve(CurveId),
    #[error("unknown point {0}")]
    UnknownPoint(PointId),
    #[error("coefficient {0} outside [0, 1]")]
    BadCoefficient(Rat),
    #[error("the set of curves to contract is empty")]
    EmptyContractionSet,
    #[error("intersection matrix of {0:?} is not negative definite")]
    NotNegativeDefinite(Vec<CurveId>),
}

pub(crate) fn coeff_in_range(c: &Rat) -> bool {
    !c.is_negative() && c <= &Rat::one()
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CurveConfig {
    curves: Vec<Curve>,
    points: Vec<CrossingPoint>,
    picard_rank_of_model: Option<u32>,
}

impl CurveConfig {
    /// Stores the data as given. Call [`validate`](Self::validate) to check it.
    pub fn new(curves: Vec<Curve>, points: Vec<CrossingPoint>) -> Self {
        CurveConfig { curves, points, picard_rank_of_model: None }
    }

    pub fn with_picard_rank(mut self, rank: Option<u32>) -> Self {
        self.picard_rank_of_model = rank;
        self
    }

    pub fn curves(&self) -> &[Curve] {
        &self.curves
    }

    pub fn points(&self) -> &[CrossingPoint] {
        &self.points
    }

    pub fn picard_rank_of_model(&self) -> Option<u32> {
        self.picard_rank_of_model
    }

    pub fn curve_ids(&self) -> BTreeSet<CurveId> {
        self.curves.iter().map(|c| c.id).collect()
    }

    pub fn curve(&self, id: CurveId) -> Result<&Curve, SurfaceError> {
        self.curves.iter().find(|c| c.id == id).ok_or(SurfaceError::UnknownCurve(id))
    }

    pub fn point(&self, id: PointId) -> Result<&CrossingPoint, SurfaceError> {
        self.points.iter().find(|p| p.id == id).ok_or(SurfaceError::UnknownPoint(id))
    }

    /// Looks a curve up by name, falling back to its numeric id.
    pub fn find_curve(&self, label: &str) -> Option<CurveId> {
        self.curves
            .iter()
            .find(|c| c.name.as_deref() == Some(label))
            .or_else(|| {
                let n: u32 = label.parse().ok()?;
                self.curves.iter().find(|c| c.id.0 == n)
            })
            .map(|c| c.id)
    }

    pub fn label(&self, id: CurveId) -> String {
        self.curve(id).map(Curve::label).unwrap_or_else(|_| id.to_string())
    }

    pub fn next_curve_id(&self) -> CurveId {
        CurveId(self.curves.iter().map(|c| c.id.0).max().map_or(1, |m| m + 1))
    }

    fn next_point_id(&self) -> u32 {
        self.points.iter().map(|p| p.id.0).max().map_or(1, |m| m + 1)
    }

    pub fn validate(&self) -> Result<(), Vec<Violation>> {
        let mut out = Vec::new();
        let mut seen = BTreeSet::new();
        for c in &self.curves {
            if !seen.insert(c.id) {
                out.push(Violation::DuplicateCurveId(c.id));
            }
            if !coeff_in_range(&c.boundary_coeff) {
                out.push(Violation::BadCoefficient { curve: c.id, coeff: c.boundary_coeff.clone() });
            }
        }
        let mut seen_points = BTreeSet::new();
        for p in &self.points {
            if !seen_points.insert(p.id) {
                out.push(Violation::DuplicatePointId(p.id));
            }
            match p.incident.len() {
                0 => out.push(Violation::EmptyPoint { point: p.id }),
                1 | 2 => {}
                _ => out.push(Violation::TriplePoint { point: p.id, incident: p.incident.clone() }),
            }
            let mut local = BTreeSet::new();
            for &c in &p.incident {
                if !seen.contains(&c) {
                    out.push(Violation::DanglingId { point: p.id, curve: c });
                }
                if !local.insert(c) {
                    out.push(Violation::RepeatedIncidence { point: p.id, curve: c });
                }
            }
        }
        if out.is_empty() {
            Ok(())
        } else {
            Err(out)
        }
    }

    /// Intersection number `C_i · C_j`.
    pub fn pairing(&self, i: CurveId, j: CurveId) -> Result<i64, SurfaceError> {
        let ci = self.curve(i)?;
        self.curve(j)?;
        if i == j {
            return Ok(ci.self_intersection);
        }
        Ok(self.points.iter().filter(|p| p.joins(i, j)).count() as i64)
    }

    /// `K · C_i = 2g - 2 - C_i²` by adjunction.
    pub fn canonical_degree(&self, i: CurveId) -> Result<i64, SurfaceError> {
        let c = self.curve(i)?;
        Ok(2 * i64::from(c.genus) - 2 - c.self_intersection)
    }

    /// Curves sharing at least one point with `i`, with multiplicity.
    pub fn neighbours(&self, i: CurveId) -> BTreeMap<CurveId, i64> {
        let mut out = BTreeMap::new();
        for p in self.points.iter().filter(|p| p.is_crossing() && p.contains(i)) {
            for &c in p.incident.iter().filter(|&&c| c != i) {
                *out.entry(c).or_insert(0) += 1;
            }
        }
        out
    }

    pub fn gram(&self, set: &[CurveId]) -> Result<SymMatrix, SurfaceError> {
        for &c in set {
            self.curve(c)?;
        }
        let mut err = None;
        let m = SymMatrix::from_fn(set.len(), |i, j| match self.pairing(set[i], set[j]) {
            Ok(v) => Rat::integer(v),
            Err(e) => {
                err = Some(e);
                Rat::zero()
            }
        });
        match err {
            Some(e) => Err(e),
            None => Ok(m),
        }
    }

    /// Partition of `set` under the relation "shares a point", each part
    /// sorted, parts ordered by their smallest id.
    pub fn connected_components(&self, set: &BTreeSet<CurveId>) -> Result<Vec<Vec<CurveId>>, SurfaceError> {
        for &c in set {
            self.curve(c)?;
        }
        let mut unvisited = set.clone();
        let mut parts = Vec::new();
        while let Some(&start) = unvisited.iter().next() {
            unvisited.remove(&start);
            let mut part = vec![start];
            let mut stack = vec![start];
            while let Some(c) = stack.pop() {
                for n in self.neighbours(c).into_keys() {
                    if unvisited.remove(&n) {
                        part.push(n);
                        stack.push(n);
                    }
                }
            }
            part.sort();
            parts.push(part);
        }
        Ok(parts)
    }

    /// Blows up a point and returns the new configuration together with
    /// the id of the exceptional curve.
    pub fn blow_up(&self, target: &BlowUpTarget, new_coeff: Rat) -> Result<(CurveConfig, CurveId), SurfaceError> {
        if !coeff_in_range(&new_coeff) {
            return Err(SurfaceError::BadCoefficient(new_coeff));
        }
        let e = self.next_curve_id();
        let next_point = self.next_point_id();
        let mut out = self.clone();
        let mut touched = Vec::new();
        match target {
            BlowUpTarget::Point(p) => {
                let point = self.point(*p)?;
                touched.extend(point.incident.iter().copied());
                out.points.retain(|q| q.id != *p);
            }
            BlowUpTarget::FreePointOn(k) => {
                self.curve(*k)?;
                touched.push(*k);
            }
            BlowUpTarget::Generic => {}
        }
        for (point_id, k) in (next_point..).zip(touched) {
            if let Some(c) = out.curves.iter_mut().find(|c| c.id == k) {
                c.self_intersection -= 1;
            }
            out.points.push(CrossingPoint::crossing(point_id, k.0, e.0));
        }
        out.curves.push(Curve { id: e, name: None, genus: 0, self_intersection: -1, boundary_coeff: new_coeff });
        Ok((out, e))
    }

    /// Simulates contracting `set` to a point by successive (-1)-curve
    /// contractions, choosing the lowest eligible id each time.
    ///
    /// Succeeds iff the curves contract to a smooth point with the
    /// boundary support staying simple normal crossing throughout.
    pub fn smooth_point_blowdown(&self, set: &BTreeSet<CurveId>) -> Result<SmoothPointOutcome, SurfaceError> {
        if set.is_empty() {
            return Err(SurfaceError::EmptyContractionSet);
        }
        let ids: Vec<CurveId> = set.iter().copied().collect();
        if !is_negative_definite(&self.gram(&ids)?) {
            return Err(SurfaceError::NotNegativeDefinite(ids));
        }
        let mut local = LocalBlowdownModel::around(self, set, &BTreeSet::new())?;
        match local.contract_pending(|eligible| eligible[0]) {
            Ok(order) => {
                debug_assert!(crate::ratlin::determinant(&self.gram(&ids)?).abs().is_one());
                Ok(SmoothPointOutcome::SmoothPoint { order, local })
            }
            Err(reason) => Ok(SmoothPointOutcome::NotSmoothPoint(reason)),
        }
    }
}
