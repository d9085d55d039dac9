//! JSON documents for Gaussians.
//!
//! A single Gaussian is `{"mean": [..], "cov": [[..], ..]}` with the
//! covariance given row-major. A pair (as written for extremal
//! constructions) is a two-element array of such documents.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{make_gaussian, Gaussian};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianDoc {
    pub mean: Vec<f64>,
    pub cov: Vec<Vec<f64>>,
}

impl GaussianDoc {
    pub fn from_gaussian(g: &Gaussian) -> Self {
        let cov = g.cov();
        Self {
            mean: g.mean().iter().copied().collect(),
            cov: (0..cov.nrows())
                .map(|i| cov.row(i).iter().copied().collect())
                .collect(),
        }
    }

    /// Validates the document and builds the Gaussian it describes.
    pub fn to_gaussian(&self) -> Result<Gaussian> {
        let n = self.mean.len();
        if n == 0 {
            return Err(Error::Parse("mean: must have at least one entry".into()));
        }
        if self.cov.len() != n {
            return Err(Error::Parse(format!(
                "cov: has {} rows, expected {n} to match mean",
                self.cov.len()
            )));
        }
        for (i, row) in self.cov.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Parse(format!(
                    "cov: row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
        }
        let cov = DMatrix::from_fn(n, n, |i, j| self.cov[i][j]);
        make_gaussian(DVector::from_column_slice(&self.mean), cov).map_err(|e| match e {
            Error::NonFinite => Error::Parse("mean/cov: non-finite entry".into()),
            other => Error::Parse(format!("cov: {other}")),
        })
    }
}

pub fn parse_gaussian(json: &str) -> Result<Gaussian> {
    let doc: GaussianDoc =
        serde_json::from_str(json).map_err(|e| Error::Parse(e.to_string()))?;
    doc.to_gaussian()
}

pub fn gaussian_to_json(g: &Gaussian) -> String {
    serde_json::to_string_pretty(&GaussianDoc::from_gaussian(g)).expect("plain data serializes")
}

pub fn parse_pair(json: &str) -> Result<(Gaussian, Gaussian)> {
    let docs: Vec<GaussianDoc> =
        serde_json::from_str(json).map_err(|e| Error::Parse(e.to_string()))?;
    match docs.as_slice() {
        [a, b] => Ok((a.to_gaussian()?, b.to_gaussian()?)),
        _ => Err(Error::Parse(format!(
            "expected an array of 2 Gaussian documents, found {}",
            docs.len()
        ))),
    }
}

pub fn pair_to_json(g1: &Gaussian, g2: &Gaussian) -> String {
    let docs = [GaussianDoc::from_gaussian(g1), GaussianDoc::from_gaussian(g2)];
    serde_json::to_string_pretty(&docs).expect("plain data serializes")
}
