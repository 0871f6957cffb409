use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error};
use crate::net::{Jet, Point};

/// Velocity or vorticity component being predicted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    U1,
    U2,
    W1,
    W2,
    W3,
}

impl Target {
    pub const ALL: [Target; 5] = [Target::U1, Target::U2, Target::W2, Target::W3, Target::W1];
    pub const VELOCITY: [Target; 2] = [Target::U1, Target::U2];
    /// Vorticity components in training order.
    pub const VORTICITY: [Target; 3] = [Target::W2, Target::W3, Target::W1];

    /// Number of independent variables: `z` alone, or `(x, z)`.
    pub fn dims(self) -> usize {
        match self {
            Target::U1 | Target::W2 => 1,
            Target::U2 | Target::W1 | Target::W3 => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Target::U1 => "u1",
            Target::U2 => "u2",
            Target::W1 => "w1",
            Target::W2 => "w2",
            Target::W3 => "w3",
        }
    }

    /// Frozen predictions the residual of this target depends on.
    pub fn upstream(self) -> &'static [Target] {
        match self {
            Target::U1 | Target::W2 => &[],
            Target::U2 | Target::W3 => &[Target::U1],
            Target::W1 => &[Target::U1, Target::W2, Target::W3],
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Target {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "u1" => Ok(Target::U1),
            "u2" => Ok(Target::U2),
            "w1" | "omega1" => Ok(Target::W1),
            "w2" | "omega2" => Ok(Target::W2),
            "w3" | "omega3" => Ok(Target::W3),
            other => Err(invalid(format!("unknown target `{other}`"))),
        }
    }
}

/// Plain PINN or singular-layer enriched PINN.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Plain,
    #[serde(alias = "sl")]
    SingularLayer,
}

impl Method {
    pub const BOTH: [Method; 2] = [Method::Plain, Method::SingularLayer];

    pub fn name(self) -> &'static str {
        match self {
            Method::Plain => "plain",
            Method::SingularLayer => "sl",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "plain" | "pinn" => Ok(Method::Plain),
            "sl" | "singular_layer" | "sl-pinn" => Ok(Method::SingularLayer),
            other => Err(invalid(format!("unknown method `{other}`"))),
        }
    }
}

/// Anything that can be evaluated as a scalar field with derivatives up to order 2.
pub trait Field: Sync {
    fn dims(&self) -> usize;

    /// Value and partials up to `order` (at most 2) at `p`.
    fn jet(&self, p: Point, order: usize) -> Jet;

    fn value(&self, p: Point) -> f64 {
        self.jet(p, 0).value()
    }
}

/// Frozen upstream predictions used by downstream residuals.
#[derive(Clone, Copy, Default)]
pub struct Upstream<'a> {
    pub u1: Option<&'a dyn Field>,
    pub w2: Option<&'a dyn Field>,
    pub w3: Option<&'a dyn Field>,
}

impl<'a> Upstream<'a> {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn get(&self, target: Target) -> Option<&'a dyn Field> {
        match target {
            Target::U1 => self.u1,
            Target::W2 => self.w2,
            Target::W3 => self.w3,
            _ => None,
        }
    }

    /// Fails unless every upstream field `target` needs is present.
    pub fn require(&self, target: Target) -> Result<(), Error> {
        for &dep in target.upstream() {
            if self.get(dep).is_none() {
                return Err(Error::Config(format!(
                    "target {target} needs a frozen {dep} model"
                )));
            }
        }
        Ok(())
    }
}
