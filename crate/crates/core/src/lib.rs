//! Physics-informed networks for plane-parallel Navier–Stokes flow at small viscosity.
//!
//! Two families of predictors are provided for each velocity and vorticity component:
//! plain networks trained with boundary penalties, and singular-layer networks whose
//! prediction embeds exponential boundary-layer profiles so that wall conditions hold
//! by construction and the training loss stays bounded as the viscosity vanishes.

pub mod ansatz;
pub mod checks;
pub mod error;
pub mod field;
pub mod loss;
pub mod metrics;
pub mod model;
pub mod net;
pub mod optim;
pub mod problem;
pub mod rng;
pub mod train;

pub use ansatz::{Ansatz, Envelope, Side};
pub use error::{Error, Result};
pub use field::{Field, Method, Target, Upstream};
pub use loss::{loss_gradient, loss_value, CompiledLoss, LossSpec, TrainingSets};
pub use metrics::{error_row, ErrorRow, LayeredGrid};
pub use model::{Model, ModelFile, ModelKind};
pub use net::{fd_gradient, init_net, Jet, ParamVector, Point, ShallowNet};
pub use optim::{minimize, LbfgsConfig, LossTrace, Termination};
pub use problem::{Manufactured, Viscosity};
pub use train::{run_experiment, train_target, ExperimentConfig, TargetSet, TrainReport};
