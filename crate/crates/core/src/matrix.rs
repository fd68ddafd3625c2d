//! Dense symmetric matrices over a paper sample, with their on-disk forms.
//!
//! * text triples: `id_i<TAB>id_j<TAB>value` for the strict upper triangle,
//!   values printed as shortest round-trip decimals;
//! * binary: `"LMS1"`, `n: u64`, `n` length-prefixed ids, then `n*n`
//!   row-major `f64`, all little-endian.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::snapshot::{get_str, get_u64, put_str};
use crate::graph::PaperId;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatrixKind {
    Similarity,
    Distance,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PairwiseMatrix {
    ids: Vec<PaperId>,
    values: Vec<f64>,
    kind: MatrixKind,
}

const MAGIC: &[u8; 4] = b"LMS1";

impl PairwiseMatrix {
    /// Wrap row-major values, checking shape, symmetry and the value range
    /// implied by `kind`.
    pub fn new(ids: Vec<PaperId>, values: Vec<f64>, kind: MatrixKind) -> Result<Self> {
        let m = PairwiseMatrix { ids, values, kind };
        m.validate()?;
        Ok(m)
    }

    pub(crate) fn new_unchecked(ids: Vec<PaperId>, values: Vec<f64>, kind: MatrixKind) -> Self {
        debug_assert_eq!(values.len(), ids.len() * ids.len());
        PairwiseMatrix { ids, values, kind }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.ids.len();
        if self.values.len() != n * n {
            return Err(Error::InvalidData(format!(
                "{} values for a {n}x{n} matrix",
                self.values.len()
            )));
        }
        for i in 0..n {
            let d = self.get(i, i);
            let want = match self.kind {
                MatrixKind::Similarity => 1.0,
                MatrixKind::Distance => 0.0,
            };
            if d != want {
                return Err(Error::InvalidData(format!("diagonal entry {i} is {d}")));
            }
            for j in i + 1..n {
                let v = self.get(i, j);
                if v != self.get(j, i) {
                    return Err(Error::InvalidData(format!("asymmetric at ({i}, {j})")));
                }
                let ok = match self.kind {
                    MatrixKind::Similarity => (0.0..=1.0).contains(&v),
                    MatrixKind::Distance => v >= 0.0 && v.is_finite(),
                };
                if !ok {
                    return Err(Error::InvalidData(format!("value {v} out of range at ({i}, {j})")));
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[PaperId] {
        &self.ids
    }

    pub fn kind(&self) -> MatrixKind {
        self.kind
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.ids.len() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.ids.len();
        &self.values[i * n..(i + 1) * n]
    }

    /// Same ids and kind with each value mapped.
    pub fn map_values(&self, kind: MatrixKind, f: impl Fn(f64) -> f64) -> PairwiseMatrix {
        PairwiseMatrix {
            ids: self.ids.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
            kind,
        }
    }

    pub(crate) fn set_diagonal_zero(&mut self, i: usize) {
        let n = self.ids.len();
        self.values[i * n + i] = 0.0;
    }

    /// Upper-triangle triples, after any caller-supplied header lines.
    pub fn write_triples(&self, w: &mut impl Write) -> std::io::Result<()> {
        let n = self.ids.len();
        for i in 0..n {
            for j in i + 1..n {
                writeln!(w, "{}\t{}\t{}", self.ids[i], self.ids[j], self.get(i, j))?;
            }
        }
        Ok(())
    }

    pub fn write_binary(&self, w: &mut impl Write) -> std::io::Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&(self.ids.len() as u64).to_le_bytes())?;
        for id in &self.ids {
            put_str(w, id.as_str())?;
        }
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        w.flush()
    }

    pub fn save_binary(&self, path: &Path) -> Result<()> {
        let f = File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_binary(&mut BufWriter::new(f))
            .map_err(|e| Error::io(path, e))
    }

    pub fn load_binary(path: &Path, kind: MatrixKind) -> Result<Self> {
        let f = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut r = BufReader::new(f);
        let corrupt = |reason: String| Error::Snapshot {
            path: path.to_path_buf(),
            reason,
        };
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic).map_err(|e| corrupt(e.to_string()))?;
        if &magic != MAGIC {
            return Err(corrupt("bad magic bytes".into()));
        }
        let n = get_u64(&mut r).map_err(|e| corrupt(e.to_string()))? as usize;
        let mut ids = Vec::with_capacity(n);
        for _ in 0..n {
            ids.push(PaperId(get_str(&mut r).map_err(|e| corrupt(e.to_string()))?));
        }
        let mut values = Vec::with_capacity(n * n);
        let mut b = [0u8; 8];
        for _ in 0..n * n {
            r.read_exact(&mut b).map_err(|e| corrupt(e.to_string()))?;
            values.push(f64::from_le_bytes(b));
        }
        PairwiseMatrix::new(ids, values, kind)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(n: usize) -> Vec<PaperId> {
        (0..n).map(|i| PaperId(format!("p{i}"))).collect()
    }

    #[test]
    fn validation() {
        assert!(PairwiseMatrix::new(ids(2), vec![1.0, 0.3, 0.3, 1.0], MatrixKind::Similarity).is_ok());
        assert!(PairwiseMatrix::new(ids(2), vec![1.0, 0.3, 0.2, 1.0], MatrixKind::Similarity).is_err());
        assert!(PairwiseMatrix::new(ids(2), vec![1.0, 1.3, 1.3, 1.0], MatrixKind::Similarity).is_err());
        assert!(PairwiseMatrix::new(ids(2), vec![0.0, 7.0, 7.0, 0.0], MatrixKind::Distance).is_ok());
        assert!(PairwiseMatrix::new(ids(2), vec![0.0; 3], MatrixKind::Distance).is_err());
    }

    #[test]
    fn text_and_binary_forms() {
        let m = PairwiseMatrix::new(
            ids(3),
            vec![1.0, 0.5, 0.0, 0.5, 1.0, 0.1, 0.0, 0.1, 1.0],
            MatrixKind::Similarity,
        )
        .unwrap();
        let mut text = Vec::new();
        m.write_triples(&mut text).unwrap();
        assert_eq!(
            String::from_utf8(text).unwrap(),
            "p0\tp1\t0.5\np0\tp2\t0\np1\tp2\t0.1\n"
        );
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.lms");
        m.save_binary(&p).unwrap();
        let raw = std::fs::read(&p).unwrap();
        assert_eq!(&raw[..4], b"LMS1");
        assert_eq!(raw.len(), 4 + 8 + 3 * (4 + 2) + 9 * 8);
        assert_eq!(PairwiseMatrix::load_binary(&p, MatrixKind::Similarity).unwrap(), m);
    }
}
