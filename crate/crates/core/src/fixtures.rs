//! Small hand-built configurations used by the tests, the examples in the
//! README and the CLI's sample scenarios.

use crate::ratlin::Rat;
use crate::surface::{CrossingPoint, Curve, CurveConfig};

/// Curve ids shared by [`corner`], [`e1`] and [`e2`].
pub mod ids {
    use crate::surface::CurveId;

    pub const D1: CurveId = CurveId(1);
    pub const D2: CurveId = CurveId(2);
    pub const E1: CurveId = CurveId(3);
    pub const E2: CurveId = CurveId(4);
}

fn half() -> Rat {
    Rat::new(1, 2)
}

/// A single (-2)-curve outside the boundary.
pub fn a1() -> CurveConfig {
    CurveConfig::new(vec![Curve::new(1, 0, -2, Rat::zero())], vec![])
}

/// A single (-2)-curve with boundary coefficient 1/2.
pub fn a1_half() -> CurveConfig {
    CurveConfig::new(vec![Curve::new(1, 0, -2, half())], vec![])
}

/// A single elliptic (-1)-curve.
pub fn elliptic() -> CurveConfig {
    CurveConfig::new(vec![Curve::new(1, 1, -1, Rat::zero())], vec![])
}

/// Two (-2)-curves meeting once.
pub fn chain() -> CurveConfig {
    CurveConfig::new(
        vec![Curve::new(1, 0, -2, Rat::zero()).named("C1"), Curve::new(2, 0, -2, Rat::zero()).named("C2")],
        vec![CrossingPoint::crossing(1, 1, 2)],
    )
}

/// Two boundary curves of coefficient 1 crossing at point 1.
pub fn corner() -> CurveConfig {
    CurveConfig::new(
        vec![Curve::new(1, 0, 0, Rat::one()).named("D1"), Curve::new(2, 0, 0, Rat::one()).named("D2")],
        vec![CrossingPoint::crossing(1, 1, 2)],
    )
}

/// [`corner`] blown up at its crossing, exceptional coefficient 1.
pub fn e1() -> CurveConfig {
    CurveConfig::new(
        vec![
            Curve::new(1, 0, -1, Rat::one()).named("D1"),
            Curve::new(2, 0, -1, Rat::one()).named("D2"),
            Curve::new(3, 0, -1, Rat::one()).named("E1"),
        ],
        vec![CrossingPoint::crossing(2, 1, 3), CrossingPoint::crossing(3, 2, 3)],
    )
}

/// [`e1`] blown up at a free point of E1, exceptional coefficient 0.
pub fn e2() -> CurveConfig {
    CurveConfig::new(
        vec![
            Curve::new(1, 0, -1, Rat::one()).named("D1"),
            Curve::new(2, 0, -1, Rat::one()).named("D2"),
            Curve::new(3, 0, -2, Rat::one()).named("E1"),
            Curve::new(4, 0, -1, Rat::zero()).named("E2"),
        ],
        vec![CrossingPoint::crossing(2, 1, 3), CrossingPoint::crossing(3, 2, 3), CrossingPoint::crossing(4, 3, 4)],
    )
}

/// A chain of three boundary curves of coefficient 1.
pub fn boundary_chain() -> CurveConfig {
    CurveConfig::new(
        vec![
            Curve::new(1, 0, 0, Rat::one()).named("L1"),
            Curve::new(2, 0, -1, Rat::one()).named("L2"),
            Curve::new(3, 0, 0, Rat::one()).named("L3"),
        ],
        vec![CrossingPoint::crossing(1, 1, 2), CrossingPoint::crossing(2, 2, 3)],
    )
}

/// A chain with coefficients 1, 1/2, 2/3, 0 and a positive-genus tail.
pub fn mixed_chain() -> CurveConfig {
    CurveConfig::new(
        vec![
            Curve::new(1, 0, 0, Rat::one()).named("A"),
            Curve::new(2, 0, -1, half()).named("B"),
            Curve::new(3, 0, 0, Rat::new(2, 3)).named("C"),
            Curve::new(4, 1, 1, Rat::zero()).named("T"),
        ],
        vec![CrossingPoint::crossing(1, 1, 2), CrossingPoint::crossing(2, 2, 3), CrossingPoint::crossing(3, 3, 4)],
    )
}

/// Templates for random blow-up towers.
pub fn templates() -> Vec<CurveConfig> {
    vec![corner(), boundary_chain(), mixed_chain(), chain()]
}

/// Templates offering at least one crepant blow-up target.
pub fn crepant_templates() -> Vec<CurveConfig> {
    vec![corner(), boundary_chain(), mixed_chain()]
}

pub fn all() -> Vec<CurveConfig> {
    vec![a1(), a1_half(), elliptic(), chain(), corner(), e1(), e2(), boundary_chain(), mixed_chain()]
}
