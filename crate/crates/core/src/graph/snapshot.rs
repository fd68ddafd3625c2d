//! Binary graph cache.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! "LMG1"  n: u64  m: u64
//! forward offsets  (n+1) x u64    forward targets  m x u32
//! backward offsets (n+1) x u64    backward targets m x u32
//! n x { id: str, year: i32 (i32::MIN = none), title: str, kw_count: u32, kw_count x str }
//! ```
//!
//! `str` is a u32 byte length followed by UTF-8 bytes.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{Adjacency, CitationGraph, Corpus, PaperId, PaperMeta};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"LMG1";
const NO_YEAR: i32 = i32::MIN;

pub(crate) fn put_str(w: &mut impl Write, s: &str) -> std::io::Result<()> {
    w.write_all(&(s.len() as u32).to_le_bytes())?;
    w.write_all(s.as_bytes())
}

pub(crate) fn get_u32(r: &mut impl Read) -> std::io::Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

pub(crate) fn get_u64(r: &mut impl Read) -> std::io::Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

pub(crate) fn get_str(r: &mut impl Read) -> std::io::Result<String> {
    let len = get_u32(r)? as usize;
    let mut buf = vec![0u8; len];
    r.read_exact(&mut buf)?;
    String::from_utf8(buf).map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))
}

fn write_inner(w: &mut impl Write, c: &Corpus) -> std::io::Result<()> {
    let g = &c.graph;
    w.write_all(MAGIC)?;
    w.write_all(&(g.node_count() as u64).to_le_bytes())?;
    w.write_all(&(g.edge_count() as u64).to_le_bytes())?;
    for adj in [&g.fwd, &g.bwd] {
        for &o in &adj.offsets {
            w.write_all(&o.to_le_bytes())?;
        }
        for &t in &adj.targets {
            w.write_all(&t.to_le_bytes())?;
        }
    }
    for (id, m) in g.ids.iter().zip(&c.meta) {
        put_str(w, id.as_str())?;
        w.write_all(&m.year.unwrap_or(NO_YEAR).to_le_bytes())?;
        put_str(w, &m.title)?;
        w.write_all(&(m.keywords.len() as u32).to_le_bytes())?;
        for k in &m.keywords {
            put_str(w, k)?;
        }
    }
    w.flush()
}

pub fn write_snapshot(path: &Path, corpus: &Corpus) -> Result<()> {
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    write_inner(&mut BufWriter::new(f), corpus).map_err(|e| Error::io(path, e))
}

fn read_adjacency(r: &mut impl Read, n: usize, m: usize) -> std::io::Result<Adjacency> {
    let mut offsets = Vec::with_capacity(n + 1);
    for _ in 0..=n {
        offsets.push(get_u64(r)?);
    }
    let mut targets = Vec::with_capacity(m);
    for _ in 0..m {
        targets.push(get_u32(r)?);
    }
    Ok(Adjacency { offsets, targets })
}

pub fn read_snapshot(path: &Path) -> Result<Corpus> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = BufReader::new(f);
    let bad = |reason: &str| Error::Snapshot {
        path: path.to_path_buf(),
        reason: reason.to_owned(),
    };
    let io = |e: std::io::Error| Error::Snapshot {
        path: path.to_path_buf(),
        reason: e.to_string(),
    };
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(io)?;
    if &magic != MAGIC {
        return Err(bad("bad magic bytes"));
    }
    let n = get_u64(&mut r).map_err(io)? as usize;
    let m = get_u64(&mut r).map_err(io)? as usize;
    let fwd = read_adjacency(&mut r, n, m).map_err(io)?;
    let bwd = read_adjacency(&mut r, n, m).map_err(io)?;
    for adj in [&fwd, &bwd] {
        let sane = adj.offsets.first() == Some(&0)
            && adj.offsets.last() == Some(&(m as u64))
            && adj.offsets.windows(2).all(|w| w[0] <= w[1])
            && adj.targets.iter().all(|&t| (t as usize) < n);
        if !sane {
            return Err(bad("inconsistent adjacency"));
        }
    }
    let mut ids = Vec::with_capacity(n);
    let mut meta = Vec::with_capacity(n);
    for _ in 0..n {
        ids.push(PaperId(get_str(&mut r).map_err(io)?));
        let mut yb = [0u8; 4];
        r.read_exact(&mut yb).map_err(io)?;
        let year = i32::from_le_bytes(yb);
        let title = get_str(&mut r).map_err(io)?;
        let k = get_u32(&mut r).map_err(io)?;
        let mut keywords = Vec::with_capacity(k as usize);
        for _ in 0..k {
            keywords.push(get_str(&mut r).map_err(io)?);
        }
        meta.push(PaperMeta {
            year: (year != NO_YEAR).then_some(year),
            title,
            keywords,
        });
    }
    let graph = CitationGraph::from_parts(ids, fwd, bwd)?;
    Ok(Corpus { graph, meta })
}
