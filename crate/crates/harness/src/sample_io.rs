//! JSON encoding of sampled instances. Alignments use the compact one-line
//! form (`[1 2 3];[2 3 1]`), edges are one-based pairs.

use std::path::Path;

use malign_core::{
    Alignment, EdgeIndex, EdgeSet, ErObservation, ErParams, ErSample, GaussianObservation, GaussianParams,
    GaussianSample,
};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum SampleFile {
    Gaussian {
        params: GaussianParams,
        seed: u64,
        truth: String,
        /// `observed[i][e]`, edges in lexicographic pair order.
        observed: Vec<Vec<f64>>,
    },
    Er {
        params: ErParams,
        seed: u64,
        truth: String,
        observed: Vec<Vec<(usize, usize)>>,
    },
}

/// An observation plus the hidden truth, as read back from a sample file.
#[derive(Debug, Clone, PartialEq)]
pub enum LoadedSample {
    Gaussian { obs: GaussianObservation, truth: Alignment },
    Er { obs: ErObservation, truth: Alignment },
}

impl LoadedSample {
    pub fn truth(&self) -> &Alignment {
        match self {
            LoadedSample::Gaussian { truth, .. } | LoadedSample::Er { truth, .. } => truth,
        }
    }
}

impl SampleFile {
    pub fn from_gaussian(sample: &GaussianSample, seed: u64) -> Self {
        SampleFile::Gaussian {
            params: sample.params,
            seed,
            truth: sample.truth.to_compact_string(),
            observed: sample.observed.clone(),
        }
    }

    pub fn from_er(sample: &ErSample, seed: u64) -> Self {
        let index = EdgeIndex::new(sample.params.n);
        SampleFile::Er {
            params: sample.params,
            seed,
            truth: sample.truth.to_compact_string(),
            observed: sample
                .observed
                .iter()
                .map(|g| g.to_pairs(&index))
                .collect(),
        }
    }

    pub fn load(self) -> Result<LoadedSample> {
        Ok(match self {
            SampleFile::Gaussian {
                params, truth, observed, ..
            } => LoadedSample::Gaussian {
                obs: GaussianObservation::new(params, observed)?,
                truth: Alignment::parse_compact(&truth)?,
            },
            SampleFile::Er {
                params, truth, observed, ..
            } => {
                let index = EdgeIndex::new(params.n);
                let sets = observed
                    .iter()
                    .map(|pairs| EdgeSet::from_pairs(&index, pairs))
                    .collect::<malign_core::Result<Vec<_>>>()?;
                LoadedSample::Er {
                    obs: ErObservation::new(params, sets)?,
                    truth: Alignment::parse_compact(&truth)?,
                }
            }
        })
    }

    pub fn read(path: &Path) -> Result<LoadedSample> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        let file: SampleFile = serde_json::from_str(&text)?;
        file.load()
    }
}
