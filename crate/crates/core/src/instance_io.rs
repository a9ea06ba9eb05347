//! Graph file formats and the instance catalog.
//!
//! Both supported formats number vertices from 1; internally vertex `k` of a
//! file becomes vertex `k - 1`.
//!
//! * G-set: a header `n m` followed by `m` lines `u v w`. Only unit weights
//!   are accepted.
//! * DIMACS ascii: `c` comment lines, one `p edge n m` line and `e u v` lines.
//!
//! Instances are looked up by name in an instance directory. Maximum coverage
//! names carry their cardinality threshold as a suffix (`frb30-15-1-10` is
//! graph `frb30-15-1` with `B = 10`). A sidecar `<name>.meta` (or
//! `<graph>.meta`) of `key=value` lines may supply `opt` (or a per-problem
//! `opt.<problem>`), `B` and `complement`.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use log::warn;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::problems::{ProblemInstance, ProblemKind};

/// Environment variable naming the default instance directory.
pub const INSTANCE_DIR_ENV: &str = "EDO_INSTANCE_DIR";

const GRAPH_EXTENSIONS: &[&str] = &["", "clq", "col", "dimacs", "mis", "txt", "gset"];

/// A parsed graph together with what the file header declared.
#[derive(Clone, Debug)]
pub struct ParsedGraph {
    pub graph: Graph,
    pub declared_edges: usize,
    /// Repeated edge lines that were collapsed (DIMACS only).
    pub duplicate_edges: usize,
}

fn parse_index(tok: Option<&str>, line: usize, what: &str) -> Result<usize> {
    let tok = tok.ok_or_else(|| Error::parse(line, format!("missing {what}")))?;
    tok.parse::<usize>()
        .map_err(|_| Error::parse(line, format!("bad {what} `{tok}`")))
}

fn vertex(tok: Option<&str>, n: usize, line: usize) -> Result<usize> {
    let v = parse_index(tok, line, "vertex")?;
    if v == 0 || v > n {
        return Err(Error::parse(line, format!("vertex {v} outside 1..={n}")));
    }
    Ok(v - 1)
}

/// Parses the G-set text format. Weighted instances are refused.
pub fn parse_gset(text: &str) -> Result<ParsedGraph> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let (hline, header) = lines.next().ok_or_else(|| Error::parse(1, "empty file"))?;
    let mut toks = header.split_whitespace();
    let n = parse_index(toks.next(), hline, "vertex count")?;
    let m = parse_index(toks.next(), hline, "edge count")?;
    let mut edges = Vec::with_capacity(m);
    for (lineno, l) in lines {
        let mut toks = l.split_whitespace();
        let u = vertex(toks.next(), n, lineno)?;
        let v = vertex(toks.next(), n, lineno)?;
        let w = toks
            .next()
            .ok_or_else(|| Error::parse(lineno, "missing weight"))?;
        let w: f64 = w
            .parse()
            .map_err(|_| Error::parse(lineno, format!("bad weight `{w}`")))?;
        if w != 1.0 {
            return Err(Error::UnsupportedInstance(format!(
                "line {lineno}: edge weight {w}; only unweighted instances are supported"
            )));
        }
        if u == v {
            return Err(Error::parse(lineno, format!("self-loop at vertex {}", u + 1)));
        }
        edges.push((u.min(v), u.max(v), lineno));
    }
    if edges.len() != m {
        return Err(Error::parse(
            hline,
            format!("header declares {m} edges, file lists {}", edges.len()),
        ));
    }
    let mut sorted: Vec<_> = edges.clone();
    sorted.sort_unstable();
    if let Some(w) = sorted.windows(2).find(|w| (w[0].0, w[0].1) == (w[1].0, w[1].1)) {
        return Err(Error::parse(
            w[1].2.max(w[0].2),
            format!("duplicate edge {} {}", w[0].0 + 1, w[0].1 + 1),
        ));
    }
    let graph = Graph::from_edges(n, edges.iter().map(|&(u, v, _)| (u, v)))?;
    Ok(ParsedGraph {
        graph,
        declared_edges: m,
        duplicate_edges: 0,
    })
}

/// Parses the DIMACS ascii edge format. Repeated edges are collapsed and
/// counted; a mismatch with the header's edge count is logged.
pub fn parse_dimacs(text: &str) -> Result<ParsedGraph> {
    let mut header: Option<(usize, usize)> = None;
    let mut edges = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let l = raw.trim();
        let mut toks = l.split_whitespace();
        match toks.next() {
            None | Some("c") => continue,
            Some("p") => {
                if header.is_some() {
                    return Err(Error::parse(lineno, "second `p` line"));
                }
                match toks.next() {
                    Some("edge") | Some("col") => {}
                    other => {
                        return Err(Error::parse(
                            lineno,
                            format!("unsupported problem line format {other:?}"),
                        ))
                    }
                }
                let n = parse_index(toks.next(), lineno, "vertex count")?;
                let m = parse_index(toks.next(), lineno, "edge count")?;
                header = Some((n, m));
            }
            Some("e") => {
                let (n, _) = header.ok_or_else(|| Error::parse(lineno, "edge before `p` line"))?;
                let u = vertex(toks.next(), n, lineno)?;
                let v = vertex(toks.next(), n, lineno)?;
                if u == v {
                    return Err(Error::parse(lineno, format!("self-loop at vertex {}", u + 1)));
                }
                edges.push((u.min(v), u.max(v)));
            }
            Some(tok) => return Err(Error::parse(lineno, format!("unexpected token `{tok}`"))),
        }
    }
    let (n, m) = header.ok_or_else(|| Error::parse(1, "missing `p edge n m` line"))?;
    let listed = edges.len();
    edges.sort_unstable();
    edges.dedup();
    let duplicates = listed - edges.len();
    if duplicates > 0 {
        warn!("collapsed {duplicates} repeated edge lines");
    }
    if edges.len() != m {
        warn!(
            "header declares {m} edges, {} distinct edges parsed ({listed} edge lines)",
            edges.len()
        );
    }
    Ok(ParsedGraph {
        graph: Graph::from_edges(n, edges)?,
        declared_edges: m,
        duplicate_edges: duplicates,
    })
}

/// Picks the parser from the content: DIMACS files have a `p` line, G-set
/// files start with a bare `n m` header.
pub fn parse_graph_auto(text: &str) -> Result<ParsedGraph> {
    let first = text
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('c'));
    match first {
        Some(l) if l.starts_with('p') || l.starts_with('e') => parse_dimacs(text),
        Some(_) => parse_gset(text),
        None => parse_dimacs(text),
    }
}

pub fn load_graph(path: &Path) -> Result<ParsedGraph> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_graph_auto(&text)
}

pub fn complement(g: &Graph) -> Graph {
    g.complement()
}

/// Contents of an instance sidecar file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct InstanceMeta {
    /// Optimum for any problem on this graph (`opt=`).
    pub opt: Option<f64>,
    /// Problem-specific optima (`opt.maxcut=` and so on), preferred over `opt`.
    pub opt_by_problem: Vec<(ProblemKind, f64)>,
    pub threshold: Option<usize>,
    pub complement: Option<bool>,
}

impl InstanceMeta {
    pub fn parse(text: &str) -> Result<Self> {
        let mut meta = InstanceMeta::default();
        for (i, raw) in text.lines().enumerate() {
            let l = raw.split('#').next().unwrap_or("").trim();
            if l.is_empty() {
                continue;
            }
            let (key, value) = l
                .split_once('=')
                .ok_or_else(|| Error::parse(i + 1, format!("expected key=value, got `{l}`")))?;
            let (key, value) = (key.trim(), value.trim());
            let bad = || Error::parse(i + 1, format!("bad value `{value}` for `{key}`"));
            match key {
                "opt" => meta.opt = Some(value.parse().map_err(|_| bad())?),
                k if k.starts_with("opt.") => {
                    let kind: ProblemKind = k[4..].parse()?;
                    let v = value.parse().map_err(|_| bad())?;
                    meta.opt_by_problem.retain(|(p, _)| *p != kind);
                    meta.opt_by_problem.push((kind, v));
                }
                "B" => meta.threshold = Some(value.parse().map_err(|_| bad())?),
                "complement" => meta.complement = Some(value.parse().map_err(|_| bad())?),
                other => warn!("ignoring unknown metadata key `{other}`"),
            }
        }
        Ok(meta)
    }

    pub fn opt_for(&self, kind: ProblemKind) -> Option<f64> {
        self.opt_by_problem
            .iter()
            .find(|(p, _)| *p == kind)
            .map(|(_, v)| *v)
            .or(self.opt)
    }

    /// Fields set in `other` take precedence.
    fn merged(self, other: InstanceMeta) -> InstanceMeta {
        let mut opt_by_problem = other.opt_by_problem;
        for (k, v) in self.opt_by_problem {
            if !opt_by_problem.iter().any(|(p, _)| *p == k) {
                opt_by_problem.push((k, v));
            }
        }
        InstanceMeta {
            opt: other.opt.or(self.opt),
            opt_by_problem,
            threshold: other.threshold.or(self.threshold),
            complement: other.complement.or(self.complement),
        }
    }

    fn read_if_exists(path: &Path) -> Result<Option<InstanceMeta>> {
        match fs::read_to_string(path) {
            Ok(text) => InstanceMeta::parse(&text).map(Some),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(Error::io(path, e)),
        }
    }
}

/// Splits `graph-threshold` names used for maximum coverage.
pub fn split_threshold(name: &str) -> Option<(&str, usize)> {
    let (graph, suffix) = name.rsplit_once('-')?;
    let b = suffix.parse().ok()?;
    (!graph.is_empty()).then_some((graph, b))
}

fn find_graph_file(dir: &Path, graph: &str) -> Option<PathBuf> {
    GRAPH_EXTENSIONS.iter().find_map(|ext| {
        let p = if ext.is_empty() {
            dir.join(graph)
        } else {
            dir.join(format!("{graph}.{ext}"))
        };
        p.is_file().then_some(p)
    })
}

/// Default complementation rule: coverage instances are always complemented,
/// vertex cover complements the DIMACS hamming graphs, max cut never.
fn default_complement(kind: ProblemKind, graph: &str) -> bool {
    match kind {
        ProblemKind::MaxCoverage => true,
        ProblemKind::MinVertexCover => graph.starts_with("hamming"),
        ProblemKind::MaxCut => false,
    }
}

/// Loads instance `name` for problem `kind`.
///
/// `name` is either a catalog name looked up in `dir`, or a path to a graph
/// file (whose stem is then used as the name and whose sidecar sits next to
/// it).
pub fn resolve_instance(name: &str, kind: ProblemKind, dir: &Path) -> Result<ProblemInstance> {
    let as_path = Path::new(name);
    let (dir, name) = if as_path.is_file() {
        let stem = as_path
            .file_stem()
            .and_then(|s| s.to_str())
            .ok_or_else(|| Error::UnknownInstance(name.to_string()))?;
        (as_path.parent().unwrap_or(Path::new(".")).to_path_buf(), stem.to_string())
    } else {
        (dir.to_path_buf(), name.to_string())
    };

    let mut graph_name = name.as_str();
    let mut suffix_threshold = None;
    let mut path = find_graph_file(&dir, graph_name);
    if kind == ProblemKind::MaxCoverage {
        if let Some((g, b)) = split_threshold(&name) {
            if let Some(p) = find_graph_file(&dir, g) {
                graph_name = g;
                suffix_threshold = Some(b);
                path = Some(p);
            }
        }
    }
    let path = path.ok_or_else(|| {
        Error::UnknownInstance(format!(
            "{name} (no graph file for `{graph_name}` in {})",
            dir.display()
        ))
    })?;

    let graph_meta = InstanceMeta::read_if_exists(&dir.join(format!("{graph_name}.meta")))?;
    let inst_meta = if graph_name != name {
        InstanceMeta::read_if_exists(&dir.join(format!("{name}.meta")))?
    } else {
        None
    };
    let mut graph_meta = graph_meta.unwrap_or_default();
    if graph_name != name {
        // A bare optimum on the graph does not carry over to a thresholded
        // instance of it.
        graph_meta.opt = None;
    }
    let meta = graph_meta.merged(inst_meta.unwrap_or_default());

    let threshold = match (kind, suffix_threshold, meta.threshold) {
        (ProblemKind::MaxCoverage, Some(b), Some(m)) if b != m => {
            warn!("{name}: name threshold {b} overrides metadata B={m}");
            Some(b)
        }
        (ProblemKind::MaxCoverage, Some(b), _) => Some(b),
        (ProblemKind::MaxCoverage, None, Some(m)) => Some(m),
        (ProblemKind::MaxCoverage, None, None) => {
            return Err(Error::MissingMetadata {
                instance: name.clone(),
                key: "B (threshold suffix or sidecar)".into(),
            })
        }
        _ => None,
    };

    let parsed = load_graph(&path)?;
    let complemented = meta
        .complement
        .unwrap_or_else(|| default_complement(kind, graph_name));
    let graph = if complemented {
        parsed.graph.complement()
    } else {
        parsed.graph
    };

    let inst = ProblemInstance {
        name: name.clone(),
        graph: Arc::new(graph),
        kind,
        threshold,
        known_opt: meta.opt_for(kind),
        complemented,
    };
    Ok(inst)
}

/// Instance directory from the environment, falling back to `.`.
pub fn default_instance_dir() -> PathBuf {
    std::env::var_os(INSTANCE_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("."))
}
