use std::io::{BufRead, Write};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::operator::InfoOperator;
use crate::csvio::{read_table, write_row};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// JSON record of a dense operator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DenseOperatorRecord {
    pub n: usize,
    /// Row-major entries.
    pub data: Vec<f64>,
    pub labels: Vec<String>,
}

impl<T: Scalar> InfoOperator<T> {
    /// Row-major CSV with header `# info_operator n=<n>`.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        let m = self.to_dense();
        writeln!(w, "# info_operator n={}", m.nrows())?;
        for i in 0..m.nrows() {
            write_row(w, m.row(i).iter().map(|x| x.as_f64()))?;
        }
        Ok(())
    }

    /// Reads a square matrix from CSV. Accepts the `info_operator` header as
    /// well as the `kernel` grid header; checks symmetry and PSD.
    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let table = read_table(r)?;
        let n = table.rows.len();
        if let Some(declared) = table.header_value("n") {
            let declared: usize = declared
                .parse()
                .map_err(|_| Error::Parse(format!("bad header n={declared}")))?;
            if declared != n {
                return Err(Error::Parse(format!("header declares n={declared}, found {n} rows")));
            }
        }
        if let Some(i) = table.rows.iter().position(|row| row.len() != n) {
            return Err(Error::Parse(format!("row {i} has {} entries, expected {n}", table.rows[i].len())));
        }
        let m = DMatrix::from_fn(n, n, |i, j| T::lit(table.rows[i][j]));
        Self::from_matrix(m, Vec::new())
    }

    pub fn to_record(&self) -> DenseOperatorRecord {
        let m = self.to_dense();
        let n = m.nrows();
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            data.extend(m.row(i).iter().map(|x| x.as_f64()));
        }
        DenseOperatorRecord {
            n,
            data,
            labels: self.labels().to_vec(),
        }
    }

    pub fn from_record(rec: &DenseOperatorRecord) -> Result<Self> {
        if rec.data.len() != rec.n * rec.n {
            return Err(Error::Parse(format!(
                "operator record has {} entries for n={}",
                rec.data.len(),
                rec.n
            )));
        }
        let m = DMatrix::from_row_iterator(rec.n, rec.n, rec.data.iter().map(|&x| T::lit(x)));
        Self::from_matrix(m, rec.labels.clone())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.to_record())?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::from_record(&serde_json::from_str(s)?)
    }
}
