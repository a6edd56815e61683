//! Tree files.
//!
//! ```text
//! pjt <num_nodes> <num_clauses> <num_vars>
//! l <id> <clause_index>
//! i <id> <x|y> <child ids...> | <projected vars...>
//! r <root id>
//! ```
//!
//! Children are listed before their parents; clause indices are 0-based
//! positions in the problem file.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use super::{Grade, NodeId, PjNode, PjTree, PlanError};
use crate::formula::{Problem, Variable};

pub fn write_tree(t: &PjTree, p: &Problem) -> String {
    let mut out = String::new();
    writeln!(out, "pjt {} {} {}", t.len(), p.clauses.len(), p.num_vars).unwrap();
    for id in t.post_order() {
        match &t.nodes[id] {
            PjNode::Leaf { clause } => writeln!(out, "l {id} {clause}").unwrap(),
            PjNode::Internal {
                children,
                projected,
                grade,
            } => {
                write!(out, "i {id} {grade}").unwrap();
                for c in children {
                    write!(out, " {c}").unwrap();
                }
                out.push_str(" |");
                for v in projected {
                    write!(out, " {v}").unwrap();
                }
                out.push('\n');
            }
        }
    }
    writeln!(out, "r {}", t.root).unwrap();
    out
}

fn malformed(line: usize, msg: impl Into<String>) -> PlanError {
    PlanError::Malformed {
        line,
        msg: msg.into(),
    }
}

fn num<T: std::str::FromStr>(line: usize, tok: &str) -> Result<T, PlanError> {
    tok.parse()
        .map_err(|_| malformed(line, format!("expected a number, found `{tok}`")))
}

/// Parses a tree file and validates it against `p` (tree criteria and
/// gradedness).
pub fn read_tree(text: &str, p: &Problem) -> Result<PjTree, PlanError> {
    let mut nodes: Vec<Option<PjNode>> = Vec::new();
    let mut header = false;
    let mut root = None;

    for (i, line) in text.lines().enumerate() {
        let ln = i + 1;
        let toks: Vec<&str> = line.split_whitespace().collect();
        let Some(&kind) = toks.first() else { continue };
        if kind == "c" {
            continue;
        }
        if root.is_some() {
            return Err(malformed(ln, "content after the root line"));
        }
        if !header {
            if kind != "pjt" || toks.len() != 4 {
                return Err(malformed(ln, "expected `pjt <nodes> <clauses> <vars>`"));
            }
            let n: usize = num(ln, toks[1])?;
            let clauses: usize = num(ln, toks[2])?;
            let vars: u32 = num(ln, toks[3])?;
            if clauses != p.clauses.len() || vars != p.num_vars {
                return Err(malformed(
                    ln,
                    format!(
                        "tree is for {clauses} clauses / {vars} variables, problem has {} / {}",
                        p.clauses.len(),
                        p.num_vars
                    ),
                ));
            }
            nodes = vec![None; n];
            header = true;
            continue;
        }
        let id = |tok: Option<&&str>| -> Result<NodeId, PlanError> {
            let tok = tok.ok_or_else(|| malformed(ln, "missing node id"))?;
            let id: NodeId = num(ln, tok)?;
            if id >= nodes.len() {
                return Err(malformed(ln, format!("node id {id} out of range")));
            }
            Ok(id)
        };
        match kind {
            "l" => {
                let nid = id(toks.get(1))?;
                let clause: usize = num(ln, toks.get(2).ok_or_else(|| malformed(ln, "missing clause"))?)?;
                if clause >= p.clauses.len() {
                    return Err(malformed(ln, format!("clause index {clause} out of range")));
                }
                if toks.len() != 3 {
                    return Err(malformed(ln, "trailing tokens"));
                }
                if nodes[nid].replace(PjNode::Leaf { clause }).is_some() {
                    return Err(malformed(ln, format!("node {nid} defined twice")));
                }
            }
            "i" => {
                let nid = id(toks.get(1))?;
                let grade = match toks.get(2) {
                    Some(&"x") => Grade::Exist,
                    Some(&"y") => Grade::Random,
                    _ => return Err(malformed(ln, "grade must be `x` or `y`")),
                };
                let bar = toks
                    .iter()
                    .position(|&t| t == "|")
                    .ok_or_else(|| malformed(ln, "missing `|` separator"))?;
                let mut children = Vec::new();
                for tok in &toks[3..bar] {
                    let c = id(Some(tok))?;
                    if nodes[c].is_none() {
                        return Err(malformed(ln, format!("child {c} is not defined before its parent")));
                    }
                    children.push(c);
                }
                let mut projected = BTreeSet::new();
                for tok in &toks[bar + 1..] {
                    let v: u32 = num(ln, tok)?;
                    let var = Variable::try_new(v)
                        .filter(|var| var.id() <= p.num_vars)
                        .ok_or_else(|| malformed(ln, format!("variable {v} out of range")))?;
                    projected.insert(var);
                }
                let node = PjNode::Internal {
                    children,
                    projected,
                    grade,
                };
                if nodes[nid].replace(node).is_some() {
                    return Err(malformed(ln, format!("node {nid} defined twice")));
                }
            }
            "r" => root = Some(id(toks.get(1))?),
            other => return Err(malformed(ln, format!("unknown line kind `{other}`"))),
        }
    }

    if !header {
        return Err(malformed(0, "missing `pjt` header"));
    }
    let root = root.ok_or_else(|| malformed(0, "missing root line"))?;
    let nodes = nodes
        .into_iter()
        .enumerate()
        .map(|(i, n)| n.ok_or_else(|| malformed(0, format!("node {i} is never defined"))))
        .collect::<Result<Vec<_>, _>>()?;
    let tree = PjTree { nodes, root };
    tree.validate(p)?;
    Ok(tree)
}
