//! Line-oriented network files.
//!
//! ```text
//! edge <id> L=<f> vmax=<f> umax=<f> h=<f> d=<f> init=<profile>
//! node in=<id,...> out=<id,...> A=<rows separated by ';'> [c=<f,...>]
//! boundary edge=<id> end=<left|right> <u=<f>|absorbing>
//! ```
//!
//! Profiles: `constant(a)`, `linear(a,b)`, `cosine(a,b,k)`, `samples(u0,u1,...)`.
//! Text after `#` is ignored.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::{BoundaryKind, BoundarySpec, EdgeSpec, Network, Profile};
use crate::edge_field::Side;
use crate::error::{Result, ValidationError};
use crate::flux::FluxFunction;
use crate::node_riemann::NodeSpec;

#[derive(Debug, Clone)]
struct Token<'a> {
    text: &'a str,
    column: usize,
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> ValidationError {
    ValidationError::Syntax {
        line,
        column,
        message: message.into(),
    }
}

/// Split on whitespace outside parentheses.
fn tokenize(line: &str) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut start = None;
    let mut depth = 0i32;
    for (col, (i, ch)) in line.char_indices().enumerate() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            _ => {}
        }
        if ch.is_whitespace() && depth <= 0 {
            if let Some((s, c)) = start.take() {
                out.push(Token {
                    text: &line[s..i],
                    column: c,
                });
            }
        } else if start.is_none() {
            start = Some((i, col + 1));
        }
    }
    if let Some((s, c)) = start {
        out.push(Token {
            text: &line[s..],
            column: c,
        });
    }
    out
}

fn number(text: &str, line: usize, column: usize) -> Result<f64, ValidationError> {
    let t = text.trim();
    match t.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => Err(syntax(line, column, format!("expected a number, found `{t}`"))),
    }
}

fn numbers(text: &str, line: usize, column: usize) -> Result<Vec<f64>, ValidationError> {
    text.split(',').map(|s| number(s, line, column)).collect()
}

fn profile(text: &str, line: usize, column: usize) -> Result<Profile, ValidationError> {
    let open = text.find('(').ok_or_else(|| {
        syntax(
            line,
            column,
            format!("expected a profile like constant(a), found `{text}`"),
        )
    })?;
    if !text.ends_with(')') {
        return Err(syntax(line, column + text.len() - 1, "missing `)`"));
    }
    let name = &text[..open];
    let args = numbers(&text[open + 1..text.len() - 1], line, column + open + 1)?;
    let want = |n: usize| {
        if args.len() == n {
            Ok(())
        } else {
            Err(syntax(
                line,
                column,
                format!("{name} takes {n} arguments, got {}", args.len()),
            ))
        }
    };
    match name {
        "constant" => want(1).map(|_| Profile::Constant(args[0])),
        "linear" => want(2).map(|_| Profile::Linear(args[0], args[1])),
        "cosine" => want(3).map(|_| Profile::Cosine(args[0], args[1], args[2])),
        "samples" if !args.is_empty() => Ok(Profile::Samples(args)),
        "samples" => Err(syntax(line, column, "samples needs at least one value")),
        _ => Err(syntax(line, column, format!("unknown profile `{name}`"))),
    }
}

/// `key=value` pairs of a directive, keyed by name, remembering columns.
struct Fields<'a> {
    line: usize,
    directive_column: usize,
    map: HashMap<&'a str, (&'a str, usize)>,
    flags: Vec<(&'a str, usize)>,
}

impl<'a> Fields<'a> {
    fn new(line: usize, directive_column: usize, tokens: &[Token<'a>]) -> Result<Self, ValidationError> {
        let mut map = HashMap::new();
        let mut flags = Vec::new();
        for t in tokens {
            match t.text.split_once('=') {
                Some((k, v)) => {
                    if map.insert(k, (v, t.column + k.len() + 1)).is_some() {
                        return Err(syntax(line, t.column, format!("`{k}` given twice")));
                    }
                }
                None => flags.push((t.text, t.column)),
            }
        }
        Ok(Self {
            line,
            directive_column,
            map,
            flags,
        })
    }

    fn get(&mut self, key: &str) -> Result<(&'a str, usize), ValidationError> {
        self.map
            .remove(key)
            .ok_or_else(|| syntax(self.line, self.directive_column, format!("missing `{key}=`")))
    }

    fn opt(&mut self, key: &str) -> Option<(&'a str, usize)> {
        self.map.remove(key)
    }

    fn num(&mut self, key: &str) -> Result<f64, ValidationError> {
        let (v, c) = self.get(key)?;
        number(v, self.line, c)
    }

    fn finish(self) -> Result<(), ValidationError> {
        if let Some((k, (_, c))) = self.map.iter().min_by_key(|(_, (_, c))| *c) {
            return Err(syntax(self.line, c - k.len() - 1, format!("unexpected `{k}=`")));
        }
        if let Some((f, c)) = self.flags.first() {
            return Err(syntax(self.line, *c, format!("unexpected `{f}`")));
        }
        Ok(())
    }
}

struct PendingNode<'a> {
    ins: Vec<(&'a str, usize)>,
    outs: Vec<(&'a str, usize)>,
    a: Option<Vec<Vec<f64>>>,
    c: Option<Vec<f64>>,
}

struct PendingBoundary<'a> {
    edge: (&'a str, usize),
    side: Side,
    kind: BoundaryKind,
}

fn id_list(text: &str, line: usize, column: usize) -> Result<Vec<(&str, usize)>, ValidationError> {
    let mut out = Vec::new();
    let mut col = column;
    for part in text.split(',') {
        if part.is_empty() {
            return Err(syntax(line, col, "empty edge id"));
        }
        out.push((part, col));
        col += part.len() + 1;
    }
    Ok(out)
}

pub fn parse_network(text: &str) -> Result<Network> {
    let mut edges: Vec<EdgeSpec> = Vec::new();
    let mut nodes = Vec::new();
    let mut boundaries = Vec::new();

    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        let body = raw.split('#').next().unwrap_or("");
        let tokens = tokenize(body);
        let Some((head, rest)) = tokens.split_first() else {
            continue;
        };
        match head.text {
            "edge" => {
                let (id, rest) = rest
                    .split_first()
                    .ok_or_else(|| syntax(line, head.column, "edge needs an id"))?;
                if id.text.contains('=') {
                    return Err(syntax(line, id.column, "edge needs an id before its parameters").into());
                }
                let mut f = Fields::new(line, head.column, rest)?;
                let length = f.num("L")?;
                let vmax = f.num("vmax")?;
                let umax = f.num("umax")?;
                let h = f.num("h")?;
                let d = f.num("d")?;
                let (init, col) = f.get("init")?;
                let init = profile(init, line, col)?;
                f.finish()?;
                let flux = FluxFunction::new(vmax, umax).map_err(|e| ValidationError::BadEdge {
                    edge: id.text.to_string(),
                    message: e.to_string(),
                })?;
                edges.push(EdgeSpec {
                    id: id.text.to_string(),
                    length,
                    flux,
                    init,
                    h,
                    d,
                });
            }
            "node" => {
                let mut f = Fields::new(line, head.column, rest)?;
                let (ins, ci) = f.get("in")?;
                let (outs, co) = f.get("out")?;
                let a = match f.opt("A") {
                    Some((v, c)) => Some(
                        v.split(';')
                            .map(|row| numbers(row, line, c))
                            .collect::<Result<Vec<_>, _>>()?,
                    ),
                    None => None,
                };
                let c = match f.opt("c") {
                    Some((v, col)) => Some(numbers(v, line, col)?),
                    None => None,
                };
                f.finish()?;
                nodes.push(PendingNode {
                    ins: id_list(ins, line, ci)?,
                    outs: id_list(outs, line, co)?,
                    a,
                    c,
                });
            }
            "boundary" => {
                let mut f = Fields::new(line, head.column, rest)?;
                let edge = f.get("edge")?;
                let (end, ce) = f.get("end")?;
                let side = match end {
                    "left" => Side::Left,
                    "right" => Side::Right,
                    _ => return Err(syntax(line, ce, format!("end must be left or right, found `{end}`")).into()),
                };
                let kind = match f.opt("u") {
                    Some((v, c)) => BoundaryKind::Prescribed(number(v, line, c)?),
                    None => match f.flags.iter().position(|(t, _)| *t == "absorbing") {
                        Some(i) => {
                            f.flags.remove(i);
                            BoundaryKind::Absorbing
                        }
                        None => return Err(syntax(line, head.column, "boundary needs `u=` or `absorbing`").into()),
                    },
                };
                f.finish()?;
                boundaries.push(PendingBoundary { edge, side, kind });
            }
            other => {
                return Err(syntax(line, head.column, format!("unknown directive `{other}`")).into());
            }
        }
    }

    let index: HashMap<&str, usize> = edges.iter().enumerate().map(|(i, e)| (e.id.as_str(), i)).collect();
    if index.len() != edges.len() {
        let mut seen = std::collections::HashSet::new();
        let dup = edges.iter().find(|e| !seen.insert(e.id.as_str())).unwrap();
        return Err(ValidationError::DuplicateEdge(dup.id.clone()).into());
    }
    let resolve = |ids: &[(&str, usize)]| -> Result<Vec<usize>, ValidationError> {
        ids.iter()
            .map(|(id, _)| {
                index
                    .get(id)
                    .copied()
                    .ok_or_else(|| ValidationError::UnknownEdge(id.to_string()))
            })
            .collect()
    };

    let mut node_specs = Vec::with_capacity(nodes.len());
    for (k, n) in nodes.into_iter().enumerate() {
        node_specs.push(NodeSpec::new(k + 1, resolve(&n.ins)?, resolve(&n.outs)?, n.a, n.c)?);
    }
    let mut bspecs = Vec::with_capacity(boundaries.len());
    for b in boundaries {
        let edge = resolve(&[b.edge])?[0];
        bspecs.push(BoundarySpec {
            edge,
            side: b.side,
            kind: b.kind,
        });
    }

    Ok(Network {
        edges,
        nodes: node_specs,
        boundaries: bspecs,
    }
    .validate()?)
}

fn join(xs: &[f64], sep: &str) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(sep)
}

/// Canonical text form; parsing it gives back an equal network.
pub fn serialize_network(net: &Network) -> String {
    let mut s = String::new();
    for e in &net.edges {
        let init = match &e.init {
            Profile::Constant(a) => format!("constant({a})"),
            Profile::Linear(a, b) => format!("linear({a},{b})"),
            Profile::Cosine(a, b, k) => format!("cosine({a},{b},{k})"),
            Profile::Samples(v) => format!("samples({})", join(v, ",")),
        };
        let _ = writeln!(
            s,
            "edge {} L={} vmax={} umax={} h={} d={} init={}",
            e.id,
            e.length,
            e.flux.v_max(),
            e.flux.u_max(),
            e.h,
            e.d,
            init
        );
    }
    let ids = |idx: &[usize]| {
        idx.iter()
            .map(|&i| net.edges[i].id.as_str())
            .collect::<Vec<_>>()
            .join(",")
    };
    for n in &net.nodes {
        let a = n.a.iter().map(|row| join(row, ",")).collect::<Vec<_>>().join(";");
        let _ = write!(s, "node in={} out={} A={}", ids(&n.in_edges), ids(&n.out_edges), a);
        if n.in_edges.len() > 1 {
            let _ = write!(s, " c={}", join(&n.c, ","));
        }
        s.push('\n');
    }
    for b in &net.boundaries {
        let end = match b.side {
            Side::Left => "left",
            Side::Right => "right",
        };
        let kind = match b.kind {
            BoundaryKind::Prescribed(u) => format!("u={u}"),
            BoundaryKind::Absorbing => "absorbing".to_string(),
        };
        let _ = writeln!(s, "boundary edge={} end={} {}", net.edges[b.edge].id, end, kind);
    }
    s
}
