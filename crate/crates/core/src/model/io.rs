//! Replayable TOML form of a [`QuadraticMop`].
//!
//! Matrices are stored row by row (`factors[j][i]` is row `i` of `W_j`).
//! Floats are written in shortest round-trip form, so a load after a save
//! reproduces the instance bit for bit.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::QuadraticMop;

const FORMAT: &str = "aocfgd-quadratic-mop";
const VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct InstanceFile {
    format: String,
    version: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    n: usize,
    objectives: usize,
    terminal: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    truth: Option<Vec<f64>>,
    factors: Vec<Vec<Vec<f64>>>,
    targets: Vec<Vec<f64>>,
}

pub fn instance_to_toml(mop: &QuadraticMop) -> Result<String> {
    let file = InstanceFile {
        format: FORMAT.into(),
        version: VERSION,
        seed: mop.seed(),
        n: mop.dim(),
        objectives: mop.num_objectives(),
        terminal: mop.terminal().iter().copied().collect(),
        truth: mop.truth().map(|t| t.iter().copied().collect()),
        factors: mop
            .factors()
            .iter()
            .map(|w| {
                (0..w.nrows())
                    .map(|i| w.row(i).iter().copied().collect())
                    .collect()
            })
            .collect(),
        targets: mop
            .targets()
            .iter()
            .map(|y| y.iter().copied().collect())
            .collect(),
    };
    toml::to_string(&file).map_err(|e| Error::Format(e.to_string()))
}

pub fn instance_from_toml(text: &str) -> Result<QuadraticMop> {
    let file: InstanceFile = toml::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
    if file.format != FORMAT {
        return Err(Error::Format(format!(
            "unknown format tag {:?}",
            file.format
        )));
    }
    if file.version != VERSION {
        return Err(Error::Format(format!(
            "unsupported version {}",
            file.version
        )));
    }
    if file.terminal.len() != file.n {
        return Err(Error::Format("terminal length differs from n".into()));
    }
    if file.factors.len() != file.objectives || file.targets.len() != file.objectives {
        return Err(Error::Format(
            "objective count differs from the stored data".into(),
        ));
    }
    let mut factors = Vec::with_capacity(file.objectives);
    for (j, rows) in file.factors.iter().enumerate() {
        if rows.len() != file.n {
            return Err(Error::Format(format!("factor {j} has {} rows", rows.len())));
        }
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Format(format!("factor {j} is ragged")));
        }
        factors.push(DMatrix::from_fn(file.n, cols, |i, k| rows[i][k]));
    }
    let targets = file
        .targets
        .iter()
        .map(|y| DVector::from_column_slice(y))
        .collect();
    let truth = match file.truth {
        Some(t) if t.len() != file.n => {
            return Err(Error::Format("truth length differs from n".into()))
        }
        t => t.map(DVector::from_vec),
    };
    Ok(
        QuadraticMop::new(factors, targets, DVector::from_vec(file.terminal))?
            .with_provenance(file.seed, truth),
    )
}
