//! Text formats: graphs and profiles.
//!
//! Graph files start with `n m directed|undirected` followed by `m` lines
//! `tail head`. Blank lines and `#` comments are ignored. Edge order is
//! preserved, so a parse/write round trip is byte-exact on canonical files.
//!
//! Profile files hold one `key=value` pair per line for every
//! [`RouterProfile`] field; oracle fields carry an `oracle.` prefix and
//! thresholds are written as `num/den`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use exroute_core::oracle::{ConstantsProfile, Threshold};
use exroute_core::{Digraph, RouterProfile, UndirectedGraph, VertexId};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum FormatError {
    #[error("line {line}: {reason}")]
    Syntax { line: usize, reason: String },
    #[error("missing profile key `{0}`")]
    MissingKey(&'static str),
    #[error("unknown profile key `{0}`")]
    UnknownKey(String),
    #[error("bad value for `{key}`: {value}")]
    BadValue { key: String, value: String },
    #[error("expected a {expected} graph")]
    WrongKind { expected: &'static str },
}

fn syntax(line: usize, reason: impl Into<String>) -> FormatError {
    FormatError::Syntax { line, reason: reason.into() }
}

#[derive(Clone, Debug, PartialEq)]
pub enum GraphFile {
    Directed(Digraph),
    Undirected(UndirectedGraph),
}

impl GraphFile {
    pub fn into_undirected(self) -> Result<UndirectedGraph, FormatError> {
        match self {
            GraphFile::Undirected(g) => Ok(g),
            GraphFile::Directed(_) => Err(FormatError::WrongKind { expected: "undirected" }),
        }
    }

    pub fn into_directed(self) -> Result<Digraph, FormatError> {
        match self {
            GraphFile::Directed(g) => Ok(g),
            GraphFile::Undirected(_) => Err(FormatError::WrongKind { expected: "directed" }),
        }
    }
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let line = raw.split('#').next().unwrap_or("").trim();
        (!line.is_empty()).then_some((i + 1, line))
    })
}

pub fn parse_graph(text: &str) -> Result<GraphFile, FormatError> {
    let mut lines = content_lines(text);
    let (hl, header) = lines.next().ok_or_else(|| syntax(1, "empty graph file"))?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    let [n, m, kind] = parts[..] else {
        return Err(syntax(hl, "header must be `n m directed|undirected`"));
    };
    let n: usize = n.parse().map_err(|_| syntax(hl, "bad vertex count"))?;
    let m: usize = m.parse().map_err(|_| syntax(hl, "bad edge count"))?;
    let directed = match kind {
        "directed" => true,
        "undirected" => false,
        _ => return Err(syntax(hl, "kind must be `directed` or `undirected`")),
    };
    let mut edges = Vec::with_capacity(m);
    for (ln, line) in lines {
        let mut it = line.split_whitespace();
        let (Some(a), Some(b), None) = (it.next(), it.next(), it.next()) else {
            return Err(syntax(ln, "edge line must be `tail head`"));
        };
        let a: usize = a.parse().map_err(|_| syntax(ln, "bad tail"))?;
        let b: usize = b.parse().map_err(|_| syntax(ln, "bad head"))?;
        if a >= n || b >= n {
            return Err(syntax(ln, format!("endpoint out of range for n={n}")));
        }
        edges.push((VertexId(a), VertexId(b)));
    }
    if edges.len() != m {
        return Err(syntax(hl, format!("header declares {m} edges, found {}", edges.len())));
    }
    Ok(if directed {
        GraphFile::Directed(Digraph::new(n, edges).expect("endpoints checked"))
    } else {
        GraphFile::Undirected(UndirectedGraph::new(n, edges).expect("endpoints checked"))
    })
}

fn write_edges(n: usize, kind: &str, edges: &[(VertexId, VertexId)]) -> String {
    let mut s = String::with_capacity(16 + edges.len() * 10);
    let _ = writeln!(s, "{n} {} {kind}", edges.len());
    for (a, b) in edges {
        let _ = writeln!(s, "{a} {b}");
    }
    s
}

pub fn write_digraph(g: &Digraph) -> String {
    write_edges(g.vertex_count(), "directed", g.edges())
}

pub fn write_undirected(g: &UndirectedGraph) -> String {
    write_edges(g.vertex_count(), "undirected", g.edges())
}

const PROFILE_KEYS: &[&str] = &[
    "n",
    "d",
    "k",
    "beta",
    "gamma",
    "relaxed",
    "min_degree",
    "d_prime",
    "c",
    "depth_cap",
    "bfs_vertex_cap",
    "bfs_edge_cap",
    "fanout",
    "endpoint_cap",
    "r",
    "g3_path_cap",
    "path_len_cap",
    "oracle.beta",
    "oracle.gamma",
    "oracle.d",
    "oracle.out_cap",
    "oracle.in_cap",
    "oracle.sat_threshold",
    "oracle.low_threshold",
    "oracle.capacity",
    "oracle.relaxed",
];

pub fn write_profile(p: &RouterProfile) -> String {
    let o = &p.oracle;
    let vals: [String; 26] = [
        p.n.to_string(),
        p.d.to_string(),
        p.k.to_string(),
        p.beta.to_string(),
        p.gamma.to_string(),
        p.relaxed.to_string(),
        p.min_degree.to_string(),
        p.d_prime.to_string(),
        p.c.to_string(),
        p.depth_cap.to_string(),
        p.bfs_vertex_cap.to_string(),
        p.bfs_edge_cap.to_string(),
        p.fanout.to_string(),
        p.endpoint_cap.to_string(),
        p.r.to_string(),
        p.g3_path_cap.to_string(),
        p.path_len_cap.to_string(),
        o.beta.to_string(),
        o.gamma.to_string(),
        o.d.to_string(),
        o.out_cap.to_string(),
        o.in_cap.to_string(),
        o.sat_threshold.to_string(),
        o.low_threshold.to_string(),
        o.capacity.to_string(),
        o.relaxed.to_string(),
    ];
    let mut s = String::new();
    for (k, v) in PROFILE_KEYS.iter().zip(vals) {
        let _ = writeln!(s, "{k}={v}");
    }
    s
}

fn bad(key: &str, value: &str) -> FormatError {
    FormatError::BadValue { key: key.to_string(), value: value.to_string() }
}

fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, FormatError> {
    value.trim().parse().map_err(|_| bad(key, value))
}

fn threshold(key: &str, value: &str) -> Result<Threshold, FormatError> {
    let v = value.trim();
    let (a, b) = v.split_once('/').unwrap_or((v, "1"));
    let t = Threshold::new(num(key, a)?, num(key, b)?);
    if t.den == 0 {
        return Err(bad(key, value));
    }
    Ok(t)
}

/// Sets one field by its profile-file key.
pub fn set_profile_field(p: &mut RouterProfile, key: &str, value: &str) -> Result<(), FormatError> {
    let o = &mut p.oracle;
    match key {
        "n" => p.n = num(key, value)?,
        "d" => p.d = num(key, value)?,
        "k" => p.k = num(key, value)?,
        "beta" => p.beta = num(key, value)?,
        "gamma" => p.gamma = num(key, value)?,
        "relaxed" => p.relaxed = num(key, value)?,
        "min_degree" => p.min_degree = num(key, value)?,
        "d_prime" => p.d_prime = num(key, value)?,
        "c" => p.c = num(key, value)?,
        "depth_cap" => p.depth_cap = num(key, value)?,
        "bfs_vertex_cap" => p.bfs_vertex_cap = num(key, value)?,
        "bfs_edge_cap" => p.bfs_edge_cap = num(key, value)?,
        "fanout" => p.fanout = num(key, value)?,
        "endpoint_cap" => p.endpoint_cap = num(key, value)?,
        "r" => p.r = num(key, value)?,
        "g3_path_cap" => p.g3_path_cap = num(key, value)?,
        "path_len_cap" => p.path_len_cap = num(key, value)?,
        "oracle.beta" => o.beta = num(key, value)?,
        "oracle.gamma" => o.gamma = num(key, value)?,
        "oracle.d" => o.d = num(key, value)?,
        "oracle.out_cap" => o.out_cap = num(key, value)?,
        "oracle.in_cap" => o.in_cap = num(key, value)?,
        "oracle.sat_threshold" => o.sat_threshold = threshold(key, value)?,
        "oracle.low_threshold" => o.low_threshold = threshold(key, value)?,
        "oracle.capacity" => o.capacity = num(key, value)?,
        "oracle.relaxed" => o.relaxed = num(key, value)?,
        other => return Err(FormatError::UnknownKey(other.to_string())),
    }
    Ok(())
}

/// Splits `key=value`, trimming both sides.
pub fn split_assignment(line: &str) -> Option<(&str, &str)> {
    let (k, v) = line.split_once('=')?;
    Some((k.trim(), v.trim()))
}

pub fn parse_profile(text: &str) -> Result<RouterProfile, FormatError> {
    let mut seen = BTreeMap::new();
    for (ln, line) in content_lines(text) {
        let (k, v) = split_assignment(line).ok_or_else(|| syntax(ln, "expected key=value"))?;
        if !PROFILE_KEYS.contains(&k) {
            return Err(FormatError::UnknownKey(k.to_string()));
        }
        if seen.insert(k.to_string(), v.to_string()).is_some() {
            return Err(syntax(ln, format!("duplicate key `{k}`")));
        }
    }
    let mut p = blank_profile();
    for key in PROFILE_KEYS {
        let v = seen.get(*key).ok_or(FormatError::MissingKey(key))?;
        set_profile_field(&mut p, key, v)?;
    }
    Ok(p)
}

fn blank_profile() -> RouterProfile {
    RouterProfile {
        n: 0,
        d: 0,
        k: 0,
        beta: 0.0,
        gamma: 0.0,
        relaxed: false,
        min_degree: 0,
        d_prime: 0,
        c: 0.0,
        depth_cap: 0,
        bfs_vertex_cap: 0,
        bfs_edge_cap: 0,
        fanout: 0,
        endpoint_cap: 0,
        r: 0,
        g3_path_cap: 0,
        path_len_cap: 0,
        oracle: ConstantsProfile {
            beta: 0.0,
            gamma: 0.0,
            d: 0,
            out_cap: 0,
            in_cap: 0,
            sat_threshold: Threshold::new(1, 1),
            low_threshold: Threshold::new(1, 1),
            capacity: 0,
            relaxed: false,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use exroute_core::expander::{derive_profile, desk_profile};

    #[test]
    fn graph_round_trip() {
        let text = "3 3 undirected\n0 1\n1 2\n2 0\n";
        let g = parse_graph(text).unwrap().into_undirected().unwrap();
        assert_eq!(write_undirected(&g), text);
        let text = "2 2 directed\n0 1\n1 0\n";
        let g = parse_graph(text).unwrap().into_directed().unwrap();
        assert_eq!(write_digraph(&g), text);
    }

    #[test]
    fn graph_errors_carry_lines() {
        let err = parse_graph("3 2 undirected\n0 1\n# c\n1 9\n").unwrap_err();
        assert_eq!(err, FormatError::Syntax { line: 4, reason: "endpoint out of range for n=3".into() });
        assert!(parse_graph("3 2 undirected\n0 1\n").is_err());
        assert!(parse_graph("3 1 sideways\n0 1\n").is_err());
    }

    #[test]
    fn profile_round_trip() {
        for p in [desk_profile(600, 30), derive_profile(1024, 400, 0.01, 0.0005, false).unwrap()] {
            let text = write_profile(&p);
            let q = parse_profile(&text).unwrap();
            assert_eq!(p, q);
            assert_eq!(write_profile(&q), text);
        }
    }

    #[test]
    fn profile_missing_key() {
        let text = write_profile(&desk_profile(600, 30)).replace("fanout=2\n", "");
        assert_eq!(parse_profile(&text).unwrap_err(), FormatError::MissingKey("fanout"));
    }
}
