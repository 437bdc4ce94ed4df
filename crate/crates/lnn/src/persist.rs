//! Model persistence: a fitted model round-trips through a versioned JSON
//! document built on the architecture document plus a coefficient block.
//! Floats survive serde_json exactly, so reloaded models predict
//! bit-identically.

use crate::architecture::{Architecture, ArchitectureDoc};
use crate::binary::{CubeConvergence, FittedBinary, LinkSpec};
use crate::data::Normalization;
use crate::error::{Error, Result};
use crate::regress::{CubeStatus, FittedRegression};
use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const MODEL_DOC_VERSION: u32 = 1;

/// Column bookkeeping carried along so the CLI can address raw CSV files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnsDoc {
    pub y: String,
    pub x: Vec<String>,
    pub normalization: Option<Normalization>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "model")]
pub enum ModelPayload {
    Regression {
        statuses: Vec<CubeStatus>,
        sigma_eps2: f64,
    },
    Binary {
        convergence: Vec<CubeConvergence>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDoc {
    pub version: u32,
    pub arch: ArchitectureDoc,
    pub columns: ColumnsDoc,
    pub counts: Vec<usize>,
    pub thetas: Vec<Option<Vec<f64>>>,
    #[serde(flatten)]
    pub payload: ModelPayload,
}

fn theta_block(thetas: &[Option<DVector<f64>>]) -> Vec<Option<Vec<f64>>> {
    thetas
        .iter()
        .map(|t| t.as_ref().map(|v| v.as_slice().to_vec()))
        .collect()
}

fn theta_vectors(block: &[Option<Vec<f64>>], dq: usize) -> Result<Vec<Option<DVector<f64>>>> {
    block
        .iter()
        .map(|t| match t {
            None => Ok(None),
            Some(v) if v.len() == dq => Ok(Some(DVector::from_vec(v.clone()))),
            Some(v) => Err(Error::Data(format!(
                "coefficient block of length {} does not match d_q = {dq}",
                v.len()
            ))),
        })
        .collect()
}

pub fn regression_doc(model: &FittedRegression, columns: ColumnsDoc) -> ModelDoc {
    ModelDoc {
        version: MODEL_DOC_VERSION,
        arch: model.arch().to_doc(),
        columns,
        counts: model.counts().to_vec(),
        thetas: theta_block(model.thetas()),
        payload: ModelPayload::Regression {
            statuses: model.statuses().to_vec(),
            sigma_eps2: model.sigma_eps2(),
        },
    }
}

pub fn binary_doc(model: &FittedBinary, columns: ColumnsDoc) -> ModelDoc {
    ModelDoc {
        version: MODEL_DOC_VERSION,
        arch: model.arch().to_doc(),
        columns,
        counts: model.counts().to_vec(),
        thetas: theta_block(model.thetas()),
        payload: ModelPayload::Binary { convergence: model.records().to_vec() },
    }
}

pub enum LoadedModel {
    Regression(FittedRegression),
    Binary(FittedBinary),
}

impl LoadedModel {
    pub fn arch(&self) -> &Architecture {
        match self {
            LoadedModel::Regression(m) => m.arch(),
            LoadedModel::Binary(m) => m.arch(),
        }
    }
}

pub fn restore(doc: &ModelDoc) -> Result<(LoadedModel, ColumnsDoc)> {
    if doc.version != MODEL_DOC_VERSION {
        return Err(Error::Data(format!("unsupported model document version {}", doc.version)));
    }
    let arch = Architecture::from_doc(&doc.arch)?;
    let n_cubes = arch.partition().n_cubes();
    if doc.thetas.len() != n_cubes || doc.counts.len() != n_cubes {
        return Err(Error::Data("coefficient block does not match the partition".into()));
    }
    let thetas = theta_vectors(&doc.thetas, arch.dq())?;
    let model = match &doc.payload {
        ModelPayload::Regression { statuses, sigma_eps2 } => {
            if statuses.len() != n_cubes {
                return Err(Error::Data("status block does not match the partition".into()));
            }
            LoadedModel::Regression(FittedRegression::from_parts(
                arch,
                thetas,
                statuses.clone(),
                doc.counts.clone(),
                *sigma_eps2,
            ))
        }
        ModelPayload::Binary { convergence } => {
            if convergence.len() != n_cubes {
                return Err(Error::Data("convergence block does not match the partition".into()));
            }
            let link = LinkSpec::new(arch.config().link)?;
            LoadedModel::Binary(FittedBinary::from_parts(
                arch,
                link,
                thetas,
                convergence.clone(),
                doc.counts.clone(),
            ))
        }
    };
    Ok((model, doc.columns.clone()))
}

pub fn save_doc(doc: &ModelDoc, path: &Path) -> Result<()> {
    let json = serde_json::to_string_pretty(doc)?;
    std::fs::write(path, json)?;
    Ok(())
}

pub fn load_doc(path: &Path) -> Result<ModelDoc> {
    let json = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&json)?)
}
