use std::collections::BTreeSet;
use std::fmt::Write;

use logsurf_core::surface::{CurveConfig, CurveId};

/// Dual graph: one node per curve labelled `id: g,s,d`, one edge per
/// crossing, marked points as small dots. Contracted curves are filled.
pub fn render(config: &CurveConfig, contracted: &BTreeSet<CurveId>) -> String {
    let mut s = String::from("graph dual {\n  node [shape=ellipse];\n");
    for c in config.curves() {
        let _ = write!(s, "  c{} [label=\"{}: {},{},{}\"", c.id, c.id, c.genus, c.self_intersection, c.boundary_coeff);
        if let Some(name) = &c.name {
            let _ = write!(s, ", xlabel=\"{}\"", name.replace('"', "\\\""));
        }
        if contracted.contains(&c.id) {
            s.push_str(", style=filled, fillcolor=lightgrey");
        }
        s.push_str("];\n");
    }
    for p in config.points() {
        match p.incident.as_slice() {
            [a, b] => {
                let _ = writeln!(s, "  c{a} -- c{b} [label=\"p{}\"];", p.id);
            }
            incident => {
                let _ = writeln!(s, "  p{} [shape=point];", p.id);
                for c in incident {
                    let _ = writeln!(s, "  p{} -- c{c};", p.id);
                }
            }
        }
    }
    s.push_str("}\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use logsurf_core::fixtures;

    #[test]
    fn fix_e2_graph() {
        let text = render(&fixtures::e2(), &BTreeSet::from([CurveId(4)]));
        assert!(text.contains("c3 [label=\"3: 0,-2,1\", xlabel=\"E1\"];"));
        assert!(text.contains("c4 [label=\"4: 0,-1,0\", xlabel=\"E2\", style=filled, fillcolor=lightgrey];"));
        assert_eq!(text.matches(" -- ").count(), 3);
    }
}
