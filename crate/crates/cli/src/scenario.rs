//! Scenario documents: a curve configuration plus optional defaults for the
//! contracted set and base.

use std::collections::BTreeSet;
use std::path::Path;

use logsurf_core::crepant::BaseDesignation;
use logsurf_core::fixtures;
use logsurf_core::ratlin::Rat;
use logsurf_core::surface::{CrossingPoint, Curve, CurveConfig, CurveId, PointId};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::Failure;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveDoc {
    pub id: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub genus: u32,
    pub self_intersection: i64,
    pub coeff: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointDoc {
    pub id: u32,
    pub incident: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub curves: Vec<CurveDoc>,
    #[serde(default)]
    pub points: Vec<PointDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub picard_rank_of_model: Option<u32>,
    /// Default contracted set, same syntax as `--contract`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contract: Option<String>,
    /// Default base, same syntax as `--base`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<String>,
}

impl ScenarioFile {
    pub fn from_config(config: &CurveConfig) -> Self {
        ScenarioFile {
            curves: config
                .curves()
                .iter()
                .map(|c| CurveDoc {
                    id: c.id.0,
                    name: c.name.clone(),
                    genus: c.genus,
                    self_intersection: c.self_intersection,
                    coeff: c.boundary_coeff.to_string(),
                })
                .collect(),
            points: config
                .points()
                .iter()
                .map(|p| PointDoc { id: p.id.0, incident: p.incident.iter().map(|c| c.0).collect() })
                .collect(),
            picard_rank_of_model: config.picard_rank_of_model(),
            contract: None,
            base: None,
        }
    }

    /// The configuration, unvalidated.
    pub fn to_config(&self) -> Result<CurveConfig, Failure> {
        let mut curves = Vec::with_capacity(self.curves.len());
        for c in &self.curves {
            let coeff: Rat = c
                .coeff
                .parse()
                .map_err(|e| Failure::input(format!("curve {}: coefficient {:?}: {e}", c.id, c.coeff)))?;
            curves.push(Curve {
                id: CurveId(c.id),
                name: c.name.clone(),
                genus: c.genus,
                self_intersection: c.self_intersection,
                boundary_coeff: coeff,
            });
        }
        let points = self
            .points
            .iter()
            .map(|p| CrossingPoint { id: PointId(p.id), incident: p.incident.iter().map(|&c| CurveId(c)).collect() })
            .collect();
        Ok(CurveConfig::new(curves, points).with_picard_rank(self.picard_rank_of_model))
    }

    /// Hex SHA-256 of the canonical JSON of the geometry (curves, points and
    /// Picard rank; the defaults are left out).
    pub fn digest(&self) -> String {
        let geometry = ScenarioFile { contract: None, base: None, ..self.clone() };
        let bytes = serde_json::to_vec(&geometry).expect("scenario serializes");
        hex::encode(Sha256::digest(bytes))
    }
}

/// Built-in scenarios, addressable by name wherever a file is expected.
pub fn builtin(name: &str) -> Option<CurveConfig> {
    Some(match name {
        "fix-a1" => fixtures::a1(),
        "fix-a1h" => fixtures::a1_half(),
        "fix-ell" => fixtures::elliptic(),
        "fix-chain" => fixtures::chain(),
        "fix-corner" => fixtures::corner(),
        "fix-e1" => fixtures::e1(),
        "fix-e2" => fixtures::e2(),
        "fix-boundary-chain" => fixtures::boundary_chain(),
        "fix-mixed-chain" => fixtures::mixed_chain(),
        "fix-corner-triple" => {
            let corner = fixtures::corner();
            let mut curves = corner.curves().to_vec();
            curves.push(Curve::new(3, 0, 0, Rat::zero()).named("D3"));
            let points = vec![CrossingPoint { id: PointId(1), incident: vec![CurveId(1), CurveId(2), CurveId(3)] }];
            CurveConfig::new(curves, points)
        }
        _ => return None,
    })
}

pub const BUILTIN_NAMES: &[&str] = &[
    "fix-a1",
    "fix-a1h",
    "fix-ell",
    "fix-chain",
    "fix-corner",
    "fix-e1",
    "fix-e2",
    "fix-boundary-chain",
    "fix-mixed-chain",
    "fix-corner-triple",
];

/// Reads a scenario from `source`: an existing file, else a built-in name.
pub fn load(source: &str) -> Result<ScenarioFile, Failure> {
    let path = Path::new(source);
    if path.exists() {
        let text = std::fs::read_to_string(path).map_err(|e| Failure::input(format!("{source}: {e}")))?;
        return serde_json::from_str(&text).map_err(|e| Failure::input(format!("{source}: {e}")));
    }
    match builtin(source) {
        Some(c) => Ok(ScenarioFile::from_config(&c)),
        None => Err(Failure::input(format!(
            "{source}: no such file or built-in scenario (built-ins: {})",
            BUILTIN_NAMES.join(", ")
        ))),
    }
}

/// The configuration of `scenario`, validated.
pub fn checked_config(scenario: &ScenarioFile) -> Result<CurveConfig, Failure> {
    let config = scenario.to_config()?;
    config.validate().map_err(|v| Failure::input(logsurf_core::Error::InvalidConfig(v).to_string()))?;
    Ok(config)
}

/// Parses a comma-separated list of curve names or ids; the empty string is
/// the empty set.
pub fn parse_ids(config: &CurveConfig, text: &str) -> Result<BTreeSet<CurveId>, Failure> {
    let mut out = BTreeSet::new();
    for label in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let id = config.find_curve(label).ok_or_else(|| Failure::input(format!("unknown curve {label:?}")))?;
        out.insert(id);
    }
    Ok(out)
}

/// `point` or `target:IDS`.
pub fn parse_base(config: &CurveConfig, text: &str) -> Result<BaseDesignation, Failure> {
    match text.trim() {
        "point" => Ok(BaseDesignation::Point),
        other => match other.strip_prefix("target:") {
            Some(ids) => Ok(BaseDesignation::TargetState(parse_ids(config, ids)?)),
            None => Err(Failure::input(format!("bad base {text:?}: expected `point` or `target:IDS`"))),
        },
    }
}

pub fn format_base(base: &BaseDesignation) -> String {
    match base {
        BaseDesignation::Point => "point".into(),
        BaseDesignation::TargetState(t) => format!("target:{}", join_ids(t)),
    }
}

pub fn join_ids<'a>(ids: impl IntoIterator<Item = &'a CurveId>) -> String {
    ids.into_iter().map(|c| c.0.to_string()).collect::<Vec<_>>().join(",")
}
