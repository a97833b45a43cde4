//! Trace documents written by `decompose` and `minimize`, read by `verify`.

use std::collections::{BTreeMap, BTreeSet};

use logsurf_core::decompose::{DecompositionTrace, TraceKind};
use logsurf_core::moves::{EpsilonChoice, MoveCertificate, MoveKind, MoveRecord};
use logsurf_core::ratlin::Rat;
use logsurf_core::surface::{CurveConfig, CurveId};
use serde::{Deserialize, Serialize};

use crate::scenario::{format_base, parse_base};
use crate::Failure;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpsilonDoc {
    pub supremum: String,
    pub chosen: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateDoc {
    pub discrepancies_before: BTreeMap<u32, String>,
    pub discrepancies_after: BTreeMap<u32, String>,
    pub epsilon: Option<EpsilonDoc>,
    pub blowdown_order: Option<Vec<u32>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepDoc {
    /// `flop` or `blowdown`.
    pub kind: String,
    pub curve: u32,
    pub certificate: CertificateDoc,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceFile {
    pub scenario_digest: String,
    /// `decomposition` or `minimization`.
    pub kind: String,
    pub base: String,
    pub start: Vec<u32>,
    pub steps: Vec<StepDoc>,
    pub fm_index: usize,
    pub end: Vec<u32>,
}

fn ids(set: &BTreeSet<CurveId>) -> Vec<u32> {
    set.iter().map(|c| c.0).collect()
}

fn rat_map(m: &BTreeMap<CurveId, Rat>) -> BTreeMap<u32, String> {
    m.iter().map(|(k, v)| (k.0, v.to_string())).collect()
}

fn parse_rat(text: &str) -> Result<Rat, Failure> {
    text.parse().map_err(|e| Failure::input(format!("bad fraction {text:?} in trace: {e}")))
}

fn parse_rat_map(m: &BTreeMap<u32, String>) -> Result<BTreeMap<CurveId, Rat>, Failure> {
    m.iter().map(|(k, v)| Ok((CurveId(*k), parse_rat(v)?))).collect()
}

impl TraceFile {
    pub fn from_trace(digest: String, trace: &DecompositionTrace) -> Self {
        TraceFile {
            scenario_digest: digest,
            kind: match trace.kind {
                TraceKind::Decomposition => "decomposition",
                TraceKind::Minimization => "minimization",
            }
            .into(),
            base: format_base(&trace.base),
            start: ids(&trace.start),
            steps: trace
                .steps
                .iter()
                .map(|s| StepDoc {
                    kind: match s.kind {
                        MoveKind::FlopContraction => "flop",
                        MoveKind::LogBlowDown => "blowdown",
                    }
                    .into(),
                    curve: s.curve.0,
                    certificate: CertificateDoc {
                        discrepancies_before: rat_map(&s.certificate.discrepancies_before),
                        discrepancies_after: rat_map(&s.certificate.discrepancies_after),
                        epsilon: s
                            .certificate
                            .epsilon
                            .as_ref()
                            .map(|e| EpsilonDoc { supremum: e.supremum.to_string(), chosen: e.chosen.to_string() }),
                        blowdown_order: s.certificate.blowdown_order.as_ref().map(|o| o.iter().map(|c| c.0).collect()),
                    },
                })
                .collect(),
            fm_index: trace.fm_index,
            end: ids(&trace.end),
        }
    }

    pub fn to_trace(&self, config: &CurveConfig) -> Result<DecompositionTrace, Failure> {
        let kind = match self.kind.as_str() {
            "decomposition" => TraceKind::Decomposition,
            "minimization" => TraceKind::Minimization,
            other => return Err(Failure::input(format!("unknown trace kind {other:?}"))),
        };
        let mut steps = Vec::with_capacity(self.steps.len());
        for s in &self.steps {
            let kind = match s.kind.as_str() {
                "flop" => MoveKind::FlopContraction,
                "blowdown" => MoveKind::LogBlowDown,
                other => return Err(Failure::input(format!("unknown step kind {other:?}"))),
            };
            let c = &s.certificate;
            let epsilon = match &c.epsilon {
                Some(e) => Some(EpsilonChoice { supremum: parse_rat(&e.supremum)?, chosen: parse_rat(&e.chosen)? }),
                None => None,
            };
            steps.push(MoveRecord {
                kind,
                curve: CurveId(s.curve),
                certificate: MoveCertificate {
                    discrepancies_before: parse_rat_map(&c.discrepancies_before)?,
                    discrepancies_after: parse_rat_map(&c.discrepancies_after)?,
                    epsilon,
                    blowdown_order: c.blowdown_order.as_ref().map(|o| o.iter().map(|&c| CurveId(c)).collect()),
                },
            });
        }
        let set = |v: &[u32]| v.iter().map(|&c| CurveId(c)).collect();
        Ok(DecompositionTrace {
            kind,
            base: parse_base(config, &self.base)?,
            start: set(&self.start),
            end: set(&self.end),
            steps,
            fm_index: self.fm_index,
        })
    }
}
