use std::fmt::Write as _;

use super::{PbFunc, Store};

impl Store {
    /// Graphviz rendering of `f`. Solid edges are the `1` branch, dashed
    /// edges the `0` branch.
    pub fn to_dot(&self, f: PbFunc) -> String {
        let mut out = String::from("digraph pbf {\n");
        for (id, inner, value) in self.node_parts(f) {
            match inner {
                None => {
                    writeln!(out, "  n{id} [shape=box, label=\"{value}\"];").unwrap();
                }
                Some((var, lo, hi)) => {
                    writeln!(out, "  n{id} [shape=oval, label=\"{var}\"];").unwrap();
                    writeln!(out, "  n{id} -> n{hi};").unwrap();
                    writeln!(out, "  n{id} -> n{lo} [style=dashed];").unwrap();
                }
            }
        }
        out.push_str("}\n");
        out
    }
}
