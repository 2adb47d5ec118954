//! Line-oriented text format.
//!
//! ```text
//! # comment
//! vtype <name> <count> <feature-dim>
//! etype <name> <src-type> <dst-type>
//! target <type>
//! edge <etype> <src-id> <dst-id>        # ids may be written as <type>:<id>
//! feat <vtype> <id> <f0> <f1> ...
//! ```
//!
//! Declarations must precede their use. Vertices without a `feat` line get
//! the deterministic default stream of [`FeatureStore::pseudo_random`].

use std::fmt::Write as _;

use super::{EdgeTypeId, FeatureStore, HetGraph, HetGraphBuilder, VertexTypeId};
use crate::error::{Error, Result};

pub fn parse_text(text: &str) -> Result<(HetGraph, FeatureStore)> {
    let mut b = HetGraphBuilder::new();
    let mut feats: Vec<(usize, VertexTypeId, u32, Vec<f32>)> = Vec::new();

    for (idx, raw_line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw_line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut tok = line.split_whitespace();
        let kind = tok.next().unwrap();
        let fields: Vec<&str> = tok.collect();
        match kind {
            "vtype" => {
                let [name, count, dim] = expect_fields::<3>(lineno, kind, &fields)?;
                let count = parse_num::<u32>(lineno, count, "vertex count")?;
                let dim = parse_num::<usize>(lineno, dim, "feature dimension")?;
                b.add_vertex_type(name, count, dim)
                    .map_err(|e| at_line(lineno, e))?;
            }
            "etype" => {
                let [name, src, dst] = expect_fields::<3>(lineno, kind, &fields)?;
                let src = lookup_type(&b, lineno, src)?;
                let dst = lookup_type(&b, lineno, dst)?;
                b.add_relation(name, src, dst).map_err(|e| at_line(lineno, e))?;
            }
            "target" => {
                let [name] = expect_fields::<1>(lineno, kind, &fields)?;
                let t = lookup_type(&b, lineno, name)?;
                b.set_target(t).map_err(|e| at_line(lineno, e))?;
            }
            "edge" => {
                let [rel, src, dst] = expect_fields::<3>(lineno, kind, &fields)?;
                let r = b
                    .relation_by_name(rel)
                    .ok_or_else(|| Error::parse(lineno, format!("undeclared relation `{rel}`")))?;
                let (src_ty, dst_ty) = {
                    let rel = b.relation(r);
                    (rel.src, rel.dst)
                };
                let s = parse_endpoint(&b, lineno, src, src_ty, r)?;
                let d = parse_endpoint(&b, lineno, dst, dst_ty, r)?;
                b.add_edge(r, s, d).map_err(|e| at_line(lineno, e))?;
            }
            "feat" => {
                if fields.len() < 2 {
                    return Err(Error::parse(lineno, "feat needs <vtype> <id> <values...>"));
                }
                let t = lookup_type(&b, lineno, fields[0])?;
                let id = parse_num::<u32>(lineno, fields[1], "vertex id")?;
                let vt = &b.vertex_types()[t.0 as usize];
                if id >= vt.count {
                    return Err(Error::Validation(format!(
                        "line {lineno}: feat id {id} >= {} vertex count {}",
                        vt.name, vt.count
                    )));
                }
                if fields.len() - 2 != vt.feature_dim {
                    return Err(Error::parse(
                        lineno,
                        format!("expected {} feature values, found {}", vt.feature_dim, fields.len() - 2),
                    ));
                }
                let values = fields[2..]
                    .iter()
                    .map(|s| parse_num::<f32>(lineno, s, "feature value"))
                    .collect::<Result<Vec<_>>>()?;
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::parse(lineno, "non-finite feature value"));
                }
                feats.push((lineno, t, id, values));
            }
            other => return Err(Error::parse(lineno, format!("unknown record `{other}`"))),
        }
    }

    let graph = b.build()?;
    let mut features = FeatureStore::pseudo_random(&graph);
    for (_, t, id, values) in feats {
        features.raw_mut(t).row_mut(id as usize).copy_from_slice(&values);
    }
    Ok((graph, features))
}

fn expect_fields<'a, const N: usize>(line: usize, kind: &str, fields: &[&'a str]) -> Result<[&'a str; N]> {
    <[&str; N]>::try_from(fields)
        .map_err(|_| Error::parse(line, format!("`{kind}` expects {N} fields, found {}", fields.len())))
}

fn parse_num<T: std::str::FromStr>(line: usize, s: &str, what: &str) -> Result<T> {
    s.parse()
        .map_err(|_| Error::parse(line, format!("invalid {what} `{s}`")))
}

fn lookup_type(b: &HetGraphBuilder, line: usize, name: &str) -> Result<VertexTypeId> {
    b.vertex_type_by_name(name)
        .ok_or_else(|| Error::Validation(format!("line {line}: undeclared vertex type `{name}`")))
}

fn at_line(line: usize, e: Error) -> Error {
    match e {
        Error::Validation(m) => Error::Validation(format!("line {line}: {m}")),
        other => other,
    }
}

/// Accepts `id` or `type:id`; a qualified type must match the relation's endpoint.
fn parse_endpoint(b: &HetGraphBuilder, line: usize, field: &str, expected: VertexTypeId, r: EdgeTypeId) -> Result<u32> {
    let id_str = match field.split_once(':') {
        Some((ty, id)) => {
            let t = lookup_type(b, line, ty)?;
            if t != expected {
                return Err(Error::Validation(format!(
                    "line {line}: relation {} expects endpoint type {}, edge uses {}",
                    b.relation(r).name,
                    b.vertex_types()[expected.0 as usize].name,
                    ty
                )));
            }
            id
        }
        None => field,
    };
    parse_num::<u32>(line, id_str, "vertex id")
}

/// Writes the text format. With `with_features` every row gets a `feat` line;
/// otherwise features are omitted and reload as the default stream.
pub fn write_text(graph: &HetGraph, features: Option<&FeatureStore>) -> String {
    let mut out = String::new();
    for t in graph.vertex_types() {
        let _ = writeln!(out, "vtype {} {} {}", t.name, t.count, t.feature_dim);
    }
    for r in graph.relations() {
        let _ = writeln!(
            out,
            "etype {} {} {}",
            r.name,
            graph.vertex_type(r.src).name,
            graph.vertex_type(r.dst).name
        );
    }
    let _ = writeln!(out, "target {}", graph.vertex_type(graph.target_type()).name);
    for r in graph.relation_ids() {
        let name = &graph.relation(r).name;
        for (s, d) in graph.adjacency(r).edges() {
            let _ = writeln!(out, "edge {name} {s} {d}");
        }
    }
    if let Some(f) = features {
        for t in graph.type_ids() {
            let vt = graph.vertex_type(t);
            let m = f.raw(t);
            for i in 0..vt.count as usize {
                let _ = write!(out, "feat {} {i}", vt.name);
                for v in m.row(i) {
                    let _ = write!(out, " {v}");
                }
                out.push('\n');
            }
        }
    }
    out
}
