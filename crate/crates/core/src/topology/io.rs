//! Edge-list exchange format.
//!
//! ```text
//! # nodes=4
//! 0 1
//! 1 2
//! 2 3
//! ```
//!
//! Node ids are 0-based. The `# nodes=N` header is required (isolated nodes
//! would otherwise be lost); other lines starting with `#` and blank lines
//! are ignored.

use super::Graph;
use crate::{Error, Result};
use std::io::{BufRead, Write};

pub fn write_edge_list<W: Write>(g: &Graph, mut out: W) -> Result<()> {
    writeln!(out, "# nodes={}", g.node_count())?;
    for &(u, v) in g.edges() {
        writeln!(out, "{u} {v}")?;
    }
    Ok(())
}

pub fn read_edge_list<R: BufRead>(input: R) -> Result<Graph> {
    let mut nodes: Option<usize> = None;
    let mut edges = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let parse_err = |message: String| Error::Parse {
            line: lineno,
            message,
        };
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(comment) = trimmed.strip_prefix('#') {
            if let Some(value) = comment.trim().strip_prefix("nodes=") {
                if nodes.is_some() {
                    return Err(parse_err("duplicate `# nodes=` header".into()));
                }
                let n = value
                    .trim()
                    .parse()
                    .map_err(|_| parse_err(format!("bad node count `{}`", value.trim())))?;
                nodes = Some(n);
            }
            continue;
        }
        let n = nodes.ok_or_else(|| parse_err("edge before `# nodes=N` header".into()))?;
        let mut fields = trimmed.split_whitespace();
        let mut next = |what: &str| -> Result<usize> {
            let tok = fields
                .next()
                .ok_or_else(|| parse_err(format!("missing {what} endpoint")))?;
            tok.parse()
                .map_err(|_| parse_err(format!("bad node id `{tok}`")))
        };
        let u = next("first")?;
        let v = next("second")?;
        if fields.next().is_some() {
            return Err(parse_err("expected exactly two node ids".into()));
        }
        if u >= n || v >= n {
            return Err(parse_err(format!("node id out of range for {n} nodes")));
        }
        edges.push((u, v, lineno));
    }
    let n = nodes.ok_or(Error::Parse {
        line: 1,
        message: "missing `# nodes=N` header".into(),
    })?;
    let mut g = Graph::empty(n);
    for (u, v, line) in edges {
        if u == v || g.has_edge(u, v) {
            return Err(Error::Parse {
                line,
                message: format!("self-loop or duplicate edge ({u}, {v})"),
            });
        }
        g.push_edge(u, v);
    }
    Ok(g)
}
