use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::device::GateParams;
use crate::Error;

pub type Matrix2 = [[Complex64; 2]; 2];
/// Two-qubit matrix on the basis `|ab⟩` ordered 00, 01, 10, 11, where `a` is
/// the gate's first qubit.
pub type Matrix4 = [[Complex64; 4]; 4];

const fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Single-qubit gates `√G = (I − iG)/√2` for `G ∈ {X, Y, W}`, `W = (X+Y)/√2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Gate1Q {
    SX,
    SY,
    SW,
}

impl Gate1Q {
    pub const ALL: [Gate1Q; 3] = [Gate1Q::SX, Gate1Q::SY, Gate1Q::SW];

    pub fn matrix(self) -> Matrix2 {
        let h = FRAC_1_SQRT_2;
        match self {
            Gate1Q::SX => [[c(h, 0.0), c(0.0, -h)], [c(0.0, -h), c(h, 0.0)]],
            Gate1Q::SY => [[c(h, 0.0), c(-h, 0.0)], [c(h, 0.0), c(h, 0.0)]],
            Gate1Q::SW => [[c(h, 0.0), c(-0.5, -0.5)], [c(0.5, -0.5), c(h, 0.0)]],
        }
    }

    /// The Pauli-like generator `G` itself.
    pub fn generator(self) -> Matrix2 {
        let h = FRAC_1_SQRT_2;
        match self {
            Gate1Q::SX => [[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]],
            Gate1Q::SY => [[c(0.0, 0.0), c(0.0, -1.0)], [c(0.0, 1.0), c(0.0, 0.0)]],
            Gate1Q::SW => [[c(0.0, 0.0), c(h, -h)], [c(h, h), c(0.0, 0.0)]],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Gate1Q::SX => "SX",
            Gate1Q::SY => "SY",
            Gate1Q::SW => "SW",
        }
    }
}

impl fmt::Display for Gate1Q {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Gate1Q {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "SX" => Ok(Gate1Q::SX),
            "SY" => Ok(Gate1Q::SY),
            "SW" => Ok(Gate1Q::SW),
            other => Err(Error::parse("kind", format!("unknown gate kind `{other}`"))),
        }
    }
}

/// iSWAP-like two-qubit gate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Gate2Q {
    pub params: GateParams,
}

impl Gate2Q {
    pub fn new(params: GateParams) -> Self {
        Gate2Q { params }
    }

    pub fn matrix(&self) -> Matrix4 {
        let GateParams {
            theta,
            phi,
            delta_plus: dp,
            delta_minus: dm,
            delta_minus_off: dmo,
        } = self.params;
        let (sin, cos) = theta.sin_cos();
        let phase = |x: f64| Complex64::from_polar(1.0, x);
        let minus_i = c(0.0, -1.0);
        let zero = c(0.0, 0.0);
        [
            [c(1.0, 0.0), zero, zero, zero],
            [zero, phase(dp + dm) * cos, minus_i * phase(dp - dmo) * sin, zero],
            [zero, minus_i * phase(dp + dmo) * sin, phase(dp - dm) * cos, zero],
            [zero, zero, zero, phase(2.0 * dp - phi)],
        ]
    }
}
