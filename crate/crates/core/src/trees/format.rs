//! The `LTREE v1` text format.
//!
//! ```text
//! LTREE 1 <depth>
//! <node> <instance> <y0> <y1>
//! ```
//!
//! One line per node in breadth-first order. `<node>` is the node's bit
//! string, `-` for the root; `y0` and `y1` label its left and right edges.

use super::{level_of, LittlestoneTree};
use crate::error::{Error, Result};
use std::fmt::Write as _;

fn node_name(node: usize) -> String {
    let level = level_of(node);
    if level == 0 {
        return "-".to_string();
    }
    let bits = node + 1 - (1usize << level);
    format!("{bits:0width$b}", width = level as usize)
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

pub fn parse_ltree(text: &str) -> Result<LittlestoneTree> {
    let lines: Vec<&str> = text.lines().collect();
    let header = lines.first().ok_or_else(|| parse_err(1, "empty input"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 3 || fields[0] != "LTREE" || fields[1] != "1" {
        return Err(parse_err(1, "expected header `LTREE 1 <depth>`"));
    }
    let depth: u32 = fields[2]
        .parse()
        .map_err(|_| parse_err(1, format!("bad depth `{}`", fields[2])))?;
    if depth > super::MAX_TREE_DEPTH {
        return Err(parse_err(1, format!("depth {depth} too large")));
    }
    let n = super::node_count(depth);
    let body: Vec<(usize, &str)> = lines
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| (i + 1, *l))
        .collect();
    if body.len() != n {
        return Err(parse_err(lines.len(), format!("expected {n} node lines, found {}", body.len())));
    }
    let mut instances = Vec::with_capacity(n);
    let mut edges = Vec::with_capacity(n);
    for (node, (no, line)) in body.into_iter().enumerate() {
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 4 {
            return Err(parse_err(no, "expected `<node> <instance> <y0> <y1>`"));
        }
        if f[0] != node_name(node) {
            return Err(parse_err(no, format!("expected node `{}`, found `{}`", node_name(node), f[0])));
        }
        let num = |s: &str| s.parse::<u64>().map_err(|_| parse_err(no, format!("bad number `{s}`")));
        instances.push(num(f[1])? as usize);
        let (a, b) = (num(f[2])? as u32, num(f[3])? as u32);
        if a == b {
            return Err(parse_err(no, "edge labels must differ"));
        }
        edges.push((a, b));
    }
    LittlestoneTree::new(depth, instances, edges)
}

pub fn write_ltree(tree: &LittlestoneTree) -> String {
    let mut out = format!("LTREE 1 {}\n", tree.depth());
    for node in 0..tree.node_count() {
        let (a, b) = tree.edge_labels(node);
        writeln!(out, "{} {} {} {}", node_name(node), tree.instance(node), a, b).unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let t = LittlestoneTree::new(1, vec![2, 0, 1], vec![(0, 1), (3, 2), (0, 5)]).unwrap();
        let text = write_ltree(&t);
        assert_eq!(text, "LTREE 1 1\n- 2 0 1\n0 0 3 2\n1 1 0 5\n");
        assert_eq!(parse_ltree(&text).unwrap(), t);
    }

    #[test]
    fn rejects_misordered_nodes() {
        assert!(parse_ltree("LTREE 1 1\n- 2 0 1\n1 0 0 1\n0 1 0 1\n").is_err());
        assert!(parse_ltree("LTREE 1 1\n- 2 0 1\n").is_err());
        assert!(parse_ltree("LTREE 1 0\n- 2 1 1\n").is_err());
    }
}
