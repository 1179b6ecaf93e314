use std::collections::HashMap;
use std::io::{Read, Write};
use std::sync::Arc;

use crate::error::{DkitError, Result};
use crate::scalar::Scalar;

use super::ExtReal;

/// The distance function restricted to a finite sample: entry `(i, j)` is
/// `d(p_i, p_j)`. No symmetry or zero diagonal is assumed.
///
/// Points flagged as *probes* are test points only: they take part in every
/// row/column comparison but predicates never quantify over them.
#[derive(Clone, Debug)]
pub struct DistanceMatrix<T> {
    labels: Arc<[String]>,
    index: HashMap<String, usize>,
    entries: Vec<ExtReal<T>>,
    probe: Vec<bool>,
    tol: T,
}

impl<T: Scalar> DistanceMatrix<T> {
    pub fn new(labels: Vec<String>, entries: Vec<ExtReal<T>>) -> Result<Self> {
        let n = labels.len();
        if entries.len() != n * n {
            return Err(DkitError::Input(format!(
                "distance matrix over {n} labels needs {} entries, got {}",
                n * n,
                entries.len()
            )));
        }
        for e in &entries {
            if let ExtReal::Finite(v) = e {
                if !(*v >= T::zero()) || v.is_infinite() {
                    return Err(DkitError::Input(format!("invalid distance entry {v}")));
                }
            }
        }
        let mut index = HashMap::with_capacity(n);
        for (i, l) in labels.iter().enumerate() {
            if index.insert(l.clone(), i).is_some() {
                return Err(DkitError::Input(format!("duplicate label `{l}`")));
            }
        }
        Ok(Self {
            labels: labels.into(),
            index,
            entries,
            probe: vec![false; n],
            tol: T::default_tol(),
        })
    }

    /// Builds the matrix from an entry function.
    pub fn from_fn(labels: Vec<String>, mut f: impl FnMut(usize, usize) -> ExtReal<T>) -> Result<Self> {
        let n = labels.len();
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                entries.push(f(i, j));
            }
        }
        Self::new(labels, entries)
    }

    /// Convenience constructor from plain numbers (`f64::INFINITY` allowed).
    pub fn from_rows(labels: &[&str], rows: &[&[f64]]) -> Result<Self> {
        let n = labels.len();
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(DkitError::Input("matrix must be square".into()));
        }
        let entries = rows
            .iter()
            .flat_map(|r| r.iter())
            .map(|&v| ExtReal::new(T::lit(v)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(labels.iter().map(|s| s.to_string()).collect(), entries)
    }

    pub fn with_tol(mut self, tol: T) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_probes(mut self, probe: Vec<bool>) -> Result<Self> {
        if probe.len() != self.len() {
            return Err(DkitError::Input("probe mask length mismatch".into()));
        }
        self.probe = probe;
        Ok(self)
    }

    pub fn tol(&self) -> T {
        self.tol
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &Arc<[String]> {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.index
            .get(label)
            .copied()
            .ok_or_else(|| DkitError::UnknownLabel(label.to_string()))
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> ExtReal<T> {
        self.entries[i * self.len() + j]
    }

    /// `d_p = d(p, .)`
    pub fn row(&self, i: usize) -> &[ExtReal<T>] {
        let n = self.len();
        &self.entries[i * n..(i + 1) * n]
    }

    /// `d^p = d(., p)`
    pub fn column(&self, j: usize) -> impl Iterator<Item = ExtReal<T>> + '_ {
        (0..self.len()).map(move |i| self.get(i, j))
    }

    pub fn is_probe(&self, i: usize) -> bool {
        self.probe[i]
    }

    pub fn probe_mask(&self) -> &[bool] {
        &self.probe
    }

    /// Indices predicates quantify over: every non-probe point.
    pub fn subjects(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| !self.probe[i]).collect()
    }

    pub fn entries(&self) -> &[ExtReal<T>] {
        &self.entries
    }

    pub fn has_infinite(&self) -> bool {
        self.entries.iter().any(|e| e.is_infinite())
    }

    /// Matrix whose entry `(i, j)` is `d(p_j, p_i)`: the time-reversed space.
    pub fn transposed(&self) -> Self {
        let n = self.len();
        let mut out = self.clone();
        for i in 0..n {
            for j in 0..n {
                out.entries[i * n + j] = self.get(j, i);
            }
        }
        out
    }

    /// Applies `f` to every finite entry.
    pub fn map_finite(&self, f: impl Fn(T) -> T) -> Self {
        let mut out = self.clone();
        for e in &mut out.entries {
            *e = e.map_finite(&f);
        }
        out
    }

    /// Reads the CSV format: a header row of labels followed by one row of
    /// cells per label, each cell a decimal or the literal `inf`.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let labels: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        let n = labels.len();
        let mut entries = Vec::with_capacity(n * n);
        let mut rows = 0;
        for rec in rdr.records() {
            let rec = rec?;
            if rec.len() != n {
                return Err(DkitError::Input(format!(
                    "row {} has {} cells, expected {n}",
                    rows + 1,
                    rec.len()
                )));
            }
            for cell in rec.iter() {
                entries.push(cell.parse()?);
            }
            rows += 1;
        }
        if rows != n {
            return Err(DkitError::Input(format!("expected {n} rows, found {rows}")));
        }
        Self::new(labels, entries)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(self.labels.iter())?;
        for i in 0..self.len() {
            w.write_record(self.row(i).iter().map(|e| e.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_keeps_infinity() {
        let m = DistanceMatrix::<f64>::from_rows(&["a", "b"], &[&[f64::INFINITY, 1.5], &[0.0, f64::INFINITY]]).unwrap();
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("a,b\ninf,1.5\n"));
        let back = DistanceMatrix::<f64>::read_csv(&buf[..]).unwrap();
        assert_eq!(back.entries(), m.entries());
        assert_eq!(back.labels(), m.labels());
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(DistanceMatrix::<f64>::read_csv("a,b\n0,1\n".as_bytes()).is_err());
        assert!(DistanceMatrix::<f64>::read_csv("a,b\n0,-1\n0,0\n".as_bytes()).is_err());
        assert!(DistanceMatrix::<f64>::from_rows(&["a", "a"], &[&[0.0, 0.0], &[0.0, 0.0]]).is_err());
    }

    #[test]
    fn unknown_label() {
        let m = DistanceMatrix::<f64>::from_rows(&["a"], &[&[0.0]]).unwrap();
        assert!(matches!(m.index_of("z"), Err(DkitError::UnknownLabel(_))));
    }
}
