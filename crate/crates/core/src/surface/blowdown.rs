use std::collections::{BTreeMap, BTreeSet};

use crate::ratlin::Rat;

use super::{CurveConfig, CurveId, SurfaceError};

/// Working copy of one curve inside a [`LocalBlowdownModel`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalCurve {
    pub id: CurveId,
    pub genus: u32,
    pub self_intersection: i64,
    pub coeff: Rat,
    /// Scheduled for contraction.
    pub pending: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NotSmoothPoint {
    /// No remaining curve is a smooth rational (-1)-curve.
    NoMinusOne { remaining: Vec<CurveId> },
    /// The only (-1)-curves left would break normal crossings on contraction:
    /// they meet three or more curves, or one curve twice.
    NonSncContraction { curve: CurveId, partners: Vec<(CurveId, i64)> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SmoothPointOutcome {
    SmoothPoint { order: Vec<CurveId>, local: LocalBlowdownModel },
    NotSmoothPoint(NotSmoothPoint),
}

/// A neighbourhood of a curve set with live intersection numbers, updated
/// as (-1)-curves are contracted one at a time.
///
/// Contracting a (-1)-curve `e` changes every pair of survivors by
/// `A·B += (A·e)(B·e)` and every survivor by `A² += (A·e)²`.
///
/// Only pending curves and survivors with positive coefficient count toward
/// the normal-crossing test; a coefficient-zero curve is not part of the
/// boundary, so a singular image of it is harmless.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalBlowdownModel {
    curves: BTreeMap<CurveId, LocalCurve>,
    meets: BTreeMap<(CurveId, CurveId), i64>,
    created: BTreeMap<(CurveId, CurveId), i64>,
    contracted: Vec<CurveId>,
    touched: BTreeSet<CurveId>,
}

fn key(a: CurveId, b: CurveId) -> (CurveId, CurveId) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl LocalBlowdownModel {
    /// Builds the model on `contract ∪ keep` and every curve meeting them.
    /// Curves in `contract` are marked pending.
    pub fn around(
        config: &CurveConfig,
        contract: &BTreeSet<CurveId>,
        keep: &BTreeSet<CurveId>,
    ) -> Result<Self, SurfaceError> {
        let mut ids: BTreeSet<CurveId> = contract.union(keep).copied().collect();
        for &c in contract.iter().chain(keep) {
            config.curve(c)?;
            ids.extend(config.neighbours(c).into_keys());
        }
        let mut curves = BTreeMap::new();
        for &id in &ids {
            let c = config.curve(id)?;
            curves.insert(
                id,
                LocalCurve {
                    id,
                    genus: c.genus,
                    self_intersection: c.self_intersection,
                    coeff: c.boundary_coeff.clone(),
                    pending: contract.contains(&id),
                },
            );
        }
        let mut meets = BTreeMap::new();
        for p in config.points().iter().filter(|p| p.is_crossing()) {
            let (a, b) = (p.incident[0], p.incident[1]);
            if a != b && ids.contains(&a) && ids.contains(&b) {
                *meets.entry(key(a, b)).or_insert(0) += 1;
            }
        }
        Ok(LocalBlowdownModel {
            curves,
            meets,
            created: BTreeMap::new(),
            contracted: Vec::new(),
            touched: BTreeSet::new(),
        })
    }

    pub fn curve(&self, id: CurveId) -> Option<&LocalCurve> {
        self.curves.get(&id)
    }

    pub fn live_ids(&self) -> Vec<CurveId> {
        self.curves.keys().copied().collect()
    }

    pub fn pending(&self) -> Vec<CurveId> {
        self.curves.values().filter(|c| c.pending).map(|c| c.id).collect()
    }

    pub fn contracted(&self) -> &[CurveId] {
        &self.contracted
    }

    /// Current intersection number of two live curves.
    pub fn meets(&self, a: CurveId, b: CurveId) -> i64 {
        if a == b {
            return self.curves.get(&a).map_or(0, |c| c.self_intersection);
        }
        self.meets.get(&key(a, b)).copied().unwrap_or(0)
    }

    /// Crossings between `a` and `b` that were created by contractions.
    pub fn created(&self, a: CurveId, b: CurveId) -> i64 {
        self.created.get(&key(a, b)).copied().unwrap_or(0)
    }

    /// Survivors that passed through some contracted curve.
    pub fn through_image(&self) -> Vec<CurveId> {
        self.touched.iter().filter(|c| self.curves.contains_key(c)).copied().collect()
    }

    pub fn partners(&self, e: CurveId) -> Vec<(CurveId, i64)> {
        self.curves.keys().filter(|&&c| c != e).map(|&c| (c, self.meets(c, e))).filter(|&(_, m)| m > 0).collect()
    }

    fn counts_for_snc(&self, c: CurveId) -> bool {
        self.curves.get(&c).is_some_and(|c| c.pending || c.coeff.is_positive())
    }

    /// Partners relevant to the normal-crossing test.
    pub fn snc_partners(&self, e: CurveId) -> Vec<(CurveId, i64)> {
        self.partners(e).into_iter().filter(|&(c, _)| self.counts_for_snc(c)).collect()
    }

    fn is_minus_one(&self, e: CurveId) -> bool {
        self.curves.get(&e).is_some_and(|c| c.genus == 0 && c.self_intersection == -1)
    }

    fn snc_ok(&self, e: CurveId) -> bool {
        let p = self.snc_partners(e);
        p.len() <= 2 && p.iter().all(|&(_, m)| m == 1)
    }

    /// Pending smooth rational (-1)-curves that can be contracted now.
    pub fn eligible(&self) -> Vec<CurveId> {
        self.pending().into_iter().filter(|&e| self.is_minus_one(e) && self.snc_ok(e)).collect()
    }

    /// Contracts one live curve, pending or not.
    pub fn contract(&mut self, e: CurveId) -> Result<(), NotSmoothPoint> {
        if !self.is_minus_one(e) {
            return Err(NotSmoothPoint::NoMinusOne { remaining: self.pending() });
        }
        if !self.snc_ok(e) {
            return Err(NotSmoothPoint::NonSncContraction { curve: e, partners: self.snc_partners(e) });
        }
        let partners = self.partners(e);
        for (i, &(a, ma)) in partners.iter().enumerate() {
            if let Some(c) = self.curves.get_mut(&a) {
                c.self_intersection += ma * ma;
            }
            for &(b, mb) in &partners[i + 1..] {
                *self.meets.entry(key(a, b)).or_insert(0) += ma * mb;
                *self.created.entry(key(a, b)).or_insert(0) += ma * mb;
            }
            self.touched.insert(a);
        }
        self.curves.remove(&e);
        self.meets.retain(|&(a, b), _| a != e && b != e);
        self.created.retain(|&(a, b), _| a != e && b != e);
        self.contracted.push(e);
        Ok(())
    }

    /// Contracts every pending curve, letting `pick` choose among the
    /// eligible ones (always non-empty when called). Returns the order.
    pub fn contract_pending(
        &mut self,
        mut pick: impl FnMut(&[CurveId]) -> CurveId,
    ) -> Result<Vec<CurveId>, NotSmoothPoint> {
        let start = self.contracted.len();
        loop {
            let pending = self.pending();
            if pending.is_empty() {
                return Ok(self.contracted[start..].to_vec());
            }
            let eligible = self.eligible();
            if eligible.is_empty() {
                let blocked = pending.iter().copied().find(|&e| self.is_minus_one(e));
                return Err(match blocked {
                    Some(curve) => NotSmoothPoint::NonSncContraction { curve, partners: self.snc_partners(curve) },
                    None => NotSmoothPoint::NoMinusOne { remaining: pending },
                });
            }
            let e = pick(&eligible);
            self.contract(e).expect("eligible curve contracts");
        }
    }
}
