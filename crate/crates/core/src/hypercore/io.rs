use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use flate2::read::MultiGzDecoder;
use log::warn;
use serde::{Deserialize, Serialize};

use super::{CommunityLabels, Hypergraph};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadOptions {
    /// Collapse repeated identical hyperedges to one.
    pub dedupe: bool,
    /// Collapse a node repeated inside one line instead of rejecting the line.
    pub dedupe_within_line: bool,
}

/// What the loader discarded.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LoadReport {
    pub dropped_small_edges: usize,
    pub dropped_duplicate_edges: usize,
    /// Identifiers that only appeared in dropped lines.
    pub dropped_isolated_nodes: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraphStats {
    pub node_count: usize,
    pub hyperedge_count: usize,
    pub mean_degree: f64,
    pub mean_order: f64,
}

impl std::fmt::Display for GraphStats {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "N={} M={} <d>={:.2} <k>={:.2}",
            self.node_count, self.hyperedge_count, self.mean_degree, self.mean_order
        )
    }
}

/// Opens a text file, transparently decompressing gzip input.
pub fn open_text(path: &Path) -> Result<Box<dyn BufRead>> {
    let mut file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut magic = [0u8; 2];
    let read = file.read(&mut magic).map_err(|e| Error::io(path, e))?;
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    if read == 2 && magic == [0x1f, 0x8b] {
        Ok(Box::new(BufReader::new(MultiGzDecoder::new(file))))
    } else {
        Ok(Box::new(BufReader::new(file)))
    }
}

fn read_lines(path: &Path) -> Result<Vec<String>> {
    let reader = open_text(path)?;
    let mut lines = Vec::new();
    for (k, line) in reader.split(b'\n').enumerate() {
        let bytes = line.map_err(|e| Error::io(path, e))?;
        let text = String::from_utf8(bytes).map_err(|_| Error::Parse {
            line: k + 1,
            message: "invalid UTF-8".into(),
        })?;
        lines.push(text);
    }
    Ok(lines)
}

fn tokens(line: &str) -> impl Iterator<Item = &str> {
    line.split(|c: char| c.is_whitespace() || c == ',').filter(|t| !t.is_empty())
}

fn check_token(token: &str, line: usize) -> Result<()> {
    if token.chars().any(char::is_control) {
        return Err(Error::Parse {
            line,
            message: format!("unparseable token {token:?}"),
        });
    }
    Ok(())
}

fn is_skippable(line: &str) -> bool {
    let t = line.trim();
    t.is_empty() || t.starts_with('#')
}

/// Loads a hyperedge-list file (one hyperedge per line, ids separated by
/// whitespace or commas; gzip accepted).
pub fn load_hyperedge_list(path: &Path, opts: LoadOptions) -> Result<(Hypergraph, LoadReport)> {
    let lines = read_lines(path)?;
    parse_lines(&lines, opts).map_err(|e| match e {
        Error::InvalidGraph(msg) if msg == "no hyperedges" => Error::EmptyFile { path: path.into() },
        other => other,
    })
}

/// Parses hyperedge-list text already in memory.
pub fn parse_hyperedge_list(text: &str, opts: LoadOptions) -> Result<(Hypergraph, LoadReport)> {
    let lines: Vec<String> = text.lines().map(str::to_string).collect();
    parse_lines(&lines, opts)
}

fn parse_lines(lines: &[String], opts: LoadOptions) -> Result<(Hypergraph, LoadReport)> {
    let mut ids: Vec<String> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut edges: Vec<Vec<usize>> = Vec::new();
    let mut seen_edges: HashSet<Vec<usize>> = HashSet::new();
    let mut dropped_ids: HashSet<String> = HashSet::new();
    let mut report = LoadReport::default();

    for (k, line) in lines.iter().enumerate() {
        let lineno = k + 1;
        if is_skippable(line) {
            continue;
        }
        let mut members: Vec<&str> = Vec::new();
        let mut local: HashSet<&str> = HashSet::new();
        for tok in tokens(line) {
            check_token(tok, lineno)?;
            if !local.insert(tok) {
                if opts.dedupe_within_line {
                    continue;
                }
                return Err(Error::DuplicateNode {
                    line: lineno,
                    node: tok.to_string(),
                });
            }
            members.push(tok);
        }
        if members.len() < 2 {
            report.dropped_small_edges += 1;
            dropped_ids.extend(members.iter().map(|s| s.to_string()));
            continue;
        }
        let mut edge: Vec<usize> = members
            .iter()
            .map(|&tok| {
                *index.entry(tok.to_string()).or_insert_with(|| {
                    ids.push(tok.to_string());
                    ids.len() - 1
                })
            })
            .collect();
        edge.sort_unstable();
        if opts.dedupe && !seen_edges.insert(edge.clone()) {
            report.dropped_duplicate_edges += 1;
            continue;
        }
        edges.push(edge);
    }

    report.dropped_isolated_nodes = dropped_ids.iter().filter(|id| !index.contains_key(*id)).count();
    if report.dropped_isolated_nodes > 0 {
        warn!(
            "dropped {} node(s) that only appear in hyperedges of order < 2",
            report.dropped_isolated_nodes
        );
    }
    let graph = Hypergraph::new(ids.len(), edges)?.with_node_ids(ids)?;
    Ok((graph, report))
}

/// Canonical text form: one hyperedge per line, original ids space-separated.
pub fn to_hyperedge_list_string(graph: &Hypergraph) -> String {
    let ids = graph.node_ids();
    let mut out = String::new();
    for edge in graph.hyperedges() {
        let line: Vec<&str> = edge.iter().map(|&i| ids[i].as_str()).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

pub fn write_hyperedge_list(graph: &Hypergraph, path: &Path) -> Result<()> {
    let mut f = File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(to_hyperedge_list_string(graph).as_bytes())
        .map_err(|e| Error::io(path, e))
}

/// Loads `id label` pairs covering every node of `graph`.
pub fn load_labels(path: &Path, graph: &Hypergraph) -> Result<CommunityLabels> {
    let lines = read_lines(path)?;
    parse_label_lines(&lines, graph)
}

pub fn parse_labels(text: &str, graph: &Hypergraph) -> Result<CommunityLabels> {
    let lines: Vec<String> = text.lines().map(str::to_string).collect();
    parse_label_lines(&lines, graph)
}

fn parse_label_lines(lines: &[String], graph: &Hypergraph) -> Result<CommunityLabels> {
    let mut raw: Vec<Option<String>> = vec![None; graph.node_count()];
    for (k, line) in lines.iter().enumerate() {
        if is_skippable(line) {
            continue;
        }
        let toks: Vec<&str> = tokens(line).collect();
        if toks.len() != 2 {
            return Err(Error::Parse {
                line: k + 1,
                message: format!("expected `id label`, found {} field(s)", toks.len()),
            });
        }
        for t in &toks {
            check_token(t, k + 1)?;
        }
        let node = graph
            .node_index(toks[0])
            .ok_or_else(|| Error::UnknownNode(toks[0].to_string()))?;
        if raw[node].replace(toks[1].to_string()).is_some() {
            return Err(Error::Parse {
                line: k + 1,
                message: format!("node {:?} labelled twice", toks[0]),
            });
        }
    }
    let mut labels = Vec::with_capacity(raw.len());
    for (i, r) in raw.into_iter().enumerate() {
        labels.push(r.ok_or_else(|| Error::MissingNode(graph.node_ids()[i].clone()))?);
    }
    Ok(CommunityLabels::from_raw(&labels))
}

fn read_integers(path: &Path) -> Result<Vec<String>> {
    let mut out = Vec::new();
    for (k, line) in read_lines(path)?.iter().enumerate() {
        if is_skippable(line) {
            continue;
        }
        for tok in tokens(line) {
            if tok.parse::<i64>().is_err() {
                return Err(Error::Parse {
                    line: k + 1,
                    message: format!("{}: expected an integer, found {tok:?}", path.display()),
                });
            }
            out.push(tok.to_string());
        }
    }
    Ok(out)
}

/// Reads the simplicial triple layout: `nverts` holds the size of each
/// simplex, `simplices` the concatenated vertex ids, `times` (optional) one
/// timestamp per simplex, validated for count and otherwise ignored.
pub fn read_simplicial(nverts: &Path, simplices: &Path, times: Option<&Path>) -> Result<Vec<Vec<String>>> {
    let sizes = read_integers(nverts)?;
    let verts = read_integers(simplices)?;
    let mut out = Vec::with_capacity(sizes.len());
    let mut cursor = 0;
    for (k, s) in sizes.iter().enumerate() {
        let size: usize = s.parse().map_err(|_| Error::Parse {
            line: k + 1,
            message: format!("negative simplex size {s}"),
        })?;
        if cursor + size > verts.len() {
            return Err(Error::Parse {
                line: k + 1,
                message: format!(
                    "simplex sizes sum past the {} vertices in {}",
                    verts.len(),
                    simplices.display()
                ),
            });
        }
        out.push(verts[cursor..cursor + size].to_vec());
        cursor += size;
    }
    if cursor != verts.len() {
        return Err(Error::Parse {
            line: sizes.len(),
            message: format!("{} trailing vertices not covered by nverts", verts.len() - cursor),
        });
    }
    if let Some(t) = times {
        let stamps = read_integers(t)?;
        if stamps.len() != sizes.len() {
            return Err(Error::Parse {
                line: stamps.len(),
                message: format!("{} timestamps for {} simplices", stamps.len(), sizes.len()),
            });
        }
    }
    Ok(out)
}

/// Converts simplicial triple files into canonical hyperedge-list text.
/// Repeated vertices inside a simplex are collapsed; simplices of size < 2
/// are dropped by the subsequent load.
pub fn convert_simplicial(nverts: &Path, simplices: &Path, times: Option<&Path>) -> Result<String> {
    let mut out = String::new();
    for simplex in read_simplicial(nverts, simplices, times)? {
        let mut seen = HashSet::new();
        let members: Vec<&str> = simplex
            .iter()
            .map(String::as_str)
            .filter(|v| seen.insert(*v))
            .collect();
        out.push_str(&members.join(" "));
        out.push('\n');
    }
    Ok(out)
}
