//! Versioned little-endian binary encoding.
//!
//! Layout: magic `HGNNGRPH`, `u32` version, `u16` target type, vertex types
//! (name, count, feature dim), relations (name, src, dst, offsets, sources),
//! then every feature matrix row-major.

use std::io::{Read, Write};

use super::{Adjacency, FeatureStore, HetGraph, HetGraphBuilder, Relation, VertexType, VertexTypeId};
use crate::error::{Error, Result};
use crate::matrix::Matrix;

const MAGIC: &[u8; 8] = b"HGNNGRPH";
const VERSION: u32 = 1;

pub fn write_binary<W: Write>(graph: &HetGraph, features: &FeatureStore, mut w: W) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&graph.target_type().0.to_le_bytes())?;
    put_u32(&mut w, graph.vertex_types().len() as u32)?;
    for t in graph.vertex_types() {
        put_str(&mut w, &t.name)?;
        put_u32(&mut w, t.count)?;
        put_u32(&mut w, t.feature_dim as u32)?;
    }
    put_u32(&mut w, graph.relations().len() as u32)?;
    for r in graph.relation_ids() {
        let rel = graph.relation(r);
        put_str(&mut w, &rel.name)?;
        w.write_all(&rel.src.0.to_le_bytes())?;
        w.write_all(&rel.dst.0.to_le_bytes())?;
        let adj = graph.adjacency(r);
        put_u32s(&mut w, adj.offsets())?;
        put_u32s(&mut w, adj.sources())?;
    }
    for t in graph.type_ids() {
        for v in features.raw(t).as_slice() {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_binary<R: Read>(mut r: R) -> Result<(HetGraph, FeatureStore)> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("bad magic header".into()));
    }
    let version = get_u32(&mut r)?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let target = VertexTypeId(get_u16(&mut r)?);
    let ntypes = get_u32(&mut r)? as usize;
    let mut vertex_types = Vec::with_capacity(ntypes);
    for _ in 0..ntypes {
        let name = get_str(&mut r)?;
        let count = get_u32(&mut r)?;
        let feature_dim = get_u32(&mut r)? as usize;
        vertex_types.push(VertexType {
            name,
            count,
            feature_dim,
        });
    }
    let nrel = get_u32(&mut r)? as usize;
    let mut relations = Vec::with_capacity(nrel);
    let mut adjacency = Vec::with_capacity(nrel);
    for _ in 0..nrel {
        let name = get_str(&mut r)?;
        let src = VertexTypeId(get_u16(&mut r)?);
        let dst = VertexTypeId(get_u16(&mut r)?);
        let offsets = get_u32s(&mut r)?;
        let sources = get_u32s(&mut r)?;
        relations.push(Relation { name, src, dst });
        adjacency.push(Adjacency::from_parts(offsets, sources)?);
    }
    let graph = HetGraphBuilder::build_from_adjacency(vertex_types, relations, adjacency, target)?;
    let mut raw = Vec::with_capacity(ntypes);
    for t in graph.vertex_types() {
        let n = t.count as usize * t.feature_dim;
        let mut data = Vec::with_capacity(n);
        let mut b4 = [0u8; 4];
        for _ in 0..n {
            r.read_exact(&mut b4)?;
            data.push(f32::from_le_bytes(b4));
        }
        raw.push(Matrix::from_vec(t.count as usize, t.feature_dim, data)?);
    }
    let features = FeatureStore::new(&graph, raw)?;
    Ok((graph, features))
}

fn put_u32<W: Write>(w: &mut W, v: u32) -> Result<()> {
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

fn put_str<W: Write>(w: &mut W, s: &str) -> Result<()> {
    put_u32(w, s.len() as u32)?;
    w.write_all(s.as_bytes())?;
    Ok(())
}

fn put_u32s<W: Write>(w: &mut W, vs: &[u32]) -> Result<()> {
    put_u32(w, vs.len() as u32)?;
    for v in vs {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

fn get_u16<R: Read>(r: &mut R) -> Result<u16> {
    let mut b = [0u8; 2];
    r.read_exact(&mut b)?;
    Ok(u16::from_le_bytes(b))
}

fn get_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn get_str<R: Read>(r: &mut R) -> Result<String> {
    let n = get_u32(r)? as usize;
    let mut buf = vec![0u8; n];
    r.read_exact(&mut buf)?;
    String::from_utf8(buf).map_err(|_| Error::Format("name is not utf-8".into()))
}

fn get_u32s<R: Read>(r: &mut R) -> Result<Vec<u32>> {
    let n = get_u32(r)? as usize;
    (0..n).map(|_| get_u32(r)).collect()
}
