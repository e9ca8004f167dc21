//! JSON matrix files: `{"dims":[...],"re":[[...]],"im":[[...]]}`, row-major.

use serde::{Deserialize, Serialize};

use super::linalg::{c, CMat};
use super::DensityOperator;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixFile {
    pub dims: Vec<usize>,
    pub re: Vec<Vec<f64>>,
    #[serde(default)]
    pub im: Option<Vec<Vec<f64>>>,
}

impl MatrixFile {
    pub fn from_matrix(m: &CMat, dims: &[usize]) -> Self {
        let rows = |f: fn(&num_complex::Complex64) -> f64| {
            (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| f(&m[(i, j)])).collect())
                .collect()
        };
        Self { dims: dims.to_vec(), re: rows(|z| z.re), im: Some(rows(|z| z.im)) }
    }

    pub fn to_matrix(&self) -> Result<CMat> {
        let n = self.re.len();
        if self.re.iter().any(|r| r.len() != n) {
            return Err(Error::Parse("\"re\" must be a square array".into()));
        }
        if let Some(im) = &self.im {
            if im.len() != n || im.iter().any(|r| r.len() != n) {
                return Err(Error::Parse("\"im\" must match the shape of \"re\"".into()));
            }
        }
        Ok(CMat::from_fn(n, n, |i, j| {
            c(self.re[i][j], self.im.as_ref().map_or(0.0, |im| im[i][j]))
        }))
    }
}

pub fn state_to_json(s: &DensityOperator) -> String {
    serde_json::to_string(&MatrixFile::from_matrix(s.matrix(), s.dims())).expect("serializable")
}

/// Parse a matrix file as a state; trace one unless `psd` is set.
pub fn state_from_json(text: &str, psd: bool) -> Result<DensityOperator> {
    let f: MatrixFile = serde_json::from_str(text).map_err(|e| Error::Parse(format!("matrix file: {e}")))?;
    let m = f.to_matrix()?;
    if psd {
        DensityOperator::positive(m, f.dims)
    } else {
        DensityOperator::new(m, f.dims)
    }
}
