//! Model files: a JSON header (target, method, viscosity, network shapes) followed by
//! the flattened parameters in network declaration order.
//!
//! ```json
//! {"format":"slpinn-model","version":1,"target":"u2","method":"singular_layer",
//!  "eps":0.001,"inputs":[2,2,2],"widths":[20,20,20],"params":[...]}
//! ```
//!
//! `method` may also be `"exact"`, in which case the file carries no parameters and
//! stands for the closed-form solution.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::ansatz::Ansatz;
use crate::error::{Error, Result};
use crate::field::{Field, Method, Target};
use crate::net::{Jet, ParamVector, Point};
use crate::problem::{ExactField, Manufactured, Viscosity};

pub const MODEL_FORMAT: &str = "slpinn-model";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Plain,
    SingularLayer,
    Exact,
}

impl From<Method> for ModelKind {
    fn from(m: Method) -> Self {
        match m {
            Method::Plain => ModelKind::Plain,
            Method::SingularLayer => ModelKind::SingularLayer,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format: String,
    pub version: u32,
    pub target: Target,
    pub method: ModelKind,
    pub eps: f64,
    pub inputs: Vec<usize>,
    pub widths: Vec<usize>,
    pub params: Vec<f64>,
}

impl ModelFile {
    pub fn from_ansatz(ansatz: &Ansatz) -> Self {
        let shapes = ansatz.shapes();
        Self {
            format: MODEL_FORMAT.into(),
            version: MODEL_VERSION,
            target: ansatz.target(),
            method: ansatz.method().into(),
            eps: ansatz.viscosity().eps(),
            inputs: shapes.iter().map(|s| s.0).collect(),
            widths: shapes.iter().map(|s| s.1).collect(),
            params: ansatz.params().0,
        }
    }

    pub fn exact(target: Target, viscosity: Viscosity) -> Self {
        Self {
            format: MODEL_FORMAT.into(),
            version: MODEL_VERSION,
            target,
            method: ModelKind::Exact,
            eps: viscosity.eps(),
            inputs: Vec::new(),
            widths: Vec::new(),
            params: Vec::new(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: Self = serde_json::from_str(text).map_err(|e| Error::Model(e.to_string()))?;
        if file.format != MODEL_FORMAT || file.version != MODEL_VERSION {
            return Err(Error::Model(format!(
                "unsupported model format {} v{}",
                file.format, file.version
            )));
        }
        Ok(file)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Model(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Rebuilds the prediction this file describes.
    pub fn into_model(self) -> Result<Model> {
        let viscosity = Viscosity::new(self.eps).map_err(|e| Error::Model(e.to_string()))?;
        let method = match self.method {
            ModelKind::Exact => {
                return Ok(Model::Exact(Manufactured::new(viscosity).field(self.target)));
            }
            ModelKind::Plain => Method::Plain,
            ModelKind::SingularLayer => Method::SingularLayer,
        };
        if self.inputs.len() != self.widths.len() {
            return Err(Error::Model("inputs and widths differ in length".into()));
        }
        let shapes: Vec<(usize, usize)> = self.inputs.iter().copied().zip(self.widths.iter().copied()).collect();
        let nets = ParamVector(self.params)
            .unflatten(&shapes)
            .map_err(|e| Error::Model(e.to_string()))?;
        Ansatz::from_nets(self.target, method, viscosity, nets)
            .map(Model::Trained)
            .map_err(|e| Error::Model(e.to_string()))
    }
}

/// A loaded prediction: trained networks or the closed-form solution.
#[derive(Debug, Clone)]
pub enum Model {
    Trained(Ansatz),
    Exact(ExactField),
}

impl Model {
    pub fn target(&self) -> Target {
        match self {
            Model::Trained(a) => a.target(),
            Model::Exact(e) => e.target,
        }
    }

    pub fn viscosity(&self) -> Viscosity {
        match self {
            Model::Trained(a) => a.viscosity(),
            Model::Exact(e) => e.data.viscosity,
        }
    }
}

impl Field for Model {
    fn dims(&self) -> usize {
        self.target().dims()
    }

    fn jet(&self, p: Point, order: usize) -> Jet {
        match self {
            Model::Trained(a) => a.jet(p, order),
            Model::Exact(e) => e.jet(p, order),
        }
    }
}
