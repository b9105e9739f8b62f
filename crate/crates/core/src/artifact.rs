//! JSON persistence of reduced models.
//!
//! ```text
//! {
//!   "format": "wrom-reduced-model",
//!   "version": 1,
//!   "metadata": { "builder": "pod" | "greedy", "variant", "seed", "mesh_n", "k", ... },
//!   "n_dofs": usize,
//!   "n_max": usize,
//!   "basis": [[f64; n_dofs]; N],        // X-orthonormal fields, interior dofs
//!   "eigenvalues": [f64],               // POD spectrum, empty for greedy
//!   "blocks": [[[f64; N]; N]; K],       // row-major A_k^N
//!   "load": [f64; N],
//!   "termination": null | "max-size" | ...
//! }
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::basis::ReducedBasis;
use crate::error::{Error, Result};
use crate::fem::Field;
use crate::greedy::Termination;
use crate::online::{ModelMetadata, ReducedModel};

pub const FORMAT: &str = "wrom-reduced-model";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Artifact {
    pub format: String,
    pub version: u32,
    pub metadata: ModelMetadata,
    pub n_dofs: usize,
    pub n_max: usize,
    pub basis: Vec<Vec<f64>>,
    pub eigenvalues: Vec<f64>,
    pub blocks: Vec<Vec<Vec<f64>>>,
    pub load: Vec<f64>,
    #[serde(default)]
    pub termination: Option<Termination>,
}

impl Artifact {
    pub fn from_model(rm: &ReducedModel, termination: Option<Termination>) -> Self {
        let n = rm.len();
        Self {
            format: FORMAT.into(),
            version: VERSION,
            metadata: rm.metadata.clone(),
            n_dofs: rm.basis.fields.first().map_or(0, |f| f.len()),
            n_max: rm.basis.n_max,
            basis: rm.basis.fields.iter().map(|f| f.iter().copied().collect()).collect(),
            eigenvalues: rm.basis.eigenvalues.clone(),
            blocks: rm.blocks.iter().map(|b| (0..n).map(|i| b.row(i).iter().copied().collect()).collect()).collect(),
            load: rm.load.iter().copied().collect(),
            termination,
        }
    }

    pub fn into_model(self) -> Result<ReducedModel> {
        if self.format != FORMAT {
            return Err(Error::Format(format!("expected format '{FORMAT}', found '{}'", self.format)));
        }
        if self.version != VERSION {
            return Err(Error::Format(format!("unsupported artifact version {}", self.version)));
        }
        let n = self.basis.len();
        if self.blocks.len() != self.metadata.k {
            return Err(Error::Format(format!("{} blocks for K = {}", self.blocks.len(), self.metadata.k)));
        }
        if self.load.len() != n
            || self.basis.iter().any(|f| f.len() != self.n_dofs)
            || self.blocks.iter().any(|b| b.len() != n || b.iter().any(|r| r.len() != n))
        {
            return Err(Error::Format("inconsistent reduced-model dimensions".into()));
        }
        let blocks = self.blocks.iter().map(|b| DMatrix::from_fn(n, n, |i, j| b[i][j])).collect();
        Ok(ReducedModel {
            basis: ReducedBasis {
                fields: self.basis.into_iter().map(Field::from_vec).collect(),
                eigenvalues: self.eigenvalues,
                n_max: self.n_max,
            },
            blocks,
            load: DVector::from_vec(self.load),
            metadata: self.metadata,
        })
    }

    pub fn write<W: Write>(&self, out: W) -> Result<()> {
        serde_json::to_writer(out, self)?;
        Ok(())
    }

    pub fn read<R: Read>(input: R) -> Result<Self> {
        Ok(serde_json::from_reader(input)?)
    }
}

pub fn save_model(rm: &ReducedModel, termination: Option<Termination>, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    Artifact::from_model(rm, termination).write(&mut w)?;
    w.flush()?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<ReducedModel> {
    Artifact::read(BufReader::new(File::open(path)?))?.into_model()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::Mesh;
    use crate::greedy::{run_greedy_with_weights, Termination};
    use crate::thermal_block::{AffineModel, ParameterPoint};

    #[test]
    fn roundtrip_is_exact() {
        let m = AffineModel::new(Mesh::new(8).unwrap(), 4).unwrap();
        let pool: Vec<ParameterPoint> = (0..6).map(|i| ParameterPoint::new(vec![1.0 + 0.3 * i as f64, 2.9 - 0.3 * i as f64, 1.7, 2.2])).collect();
        let s = run_greedy_with_weights(&m, &pool, &[1.0; 6], 4, None).unwrap();
        let term = s.termination;
        let rm = s.into_reduced_model();
        let mut buf = Vec::new();
        Artifact::from_model(&rm, term).write(&mut buf).unwrap();
        let back = Artifact::read(buf.as_slice()).unwrap();
        assert_eq!(back.termination, Some(Termination::MaxSize));
        assert_eq!(back.into_model().unwrap(), rm);
    }

    #[test]
    fn rejects_foreign_format() {
        let m = AffineModel::new(Mesh::new(4).unwrap(), 4).unwrap();
        let mut a = Artifact::from_model(&ReducedModel::empty(&m, crate::online::Builder::Pod, 3), None);
        a.version = 7;
        assert!(matches!(a.clone().into_model(), Err(Error::Format(_))));
        a.version = VERSION;
        a.format = "other".into();
        assert!(matches!(a.into_model(), Err(Error::Format(_))));
    }
}
