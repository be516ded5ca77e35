use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::SQRT_3;

/// Unfolding parameter of the standard form: `mu = -(3√3 - 2 k1 √3 - 9 B0) / 9`.
pub fn mu_of(k1: f64, b0: f64) -> f64 {
    -(3.0 * SQRT_3 - 2.0 * k1 * SQRT_3 - 9.0 * b0) / 9.0
}

/// Inverse of [`mu_of`] in the bias `B0`.
pub fn b0_of_mu(mu: f64, k1: f64) -> f64 {
    (9.0 * mu + 3.0 * SQRT_3 - 2.0 * k1 * SQRT_3) / 9.0
}

/// Physical parameters of the forced oscillator together with the derived
/// unfolding parameter `mu`.
///
/// Fields are private so that `mu` can never go stale; use the `with_*`
/// builders to change a value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParameterSet")]
pub struct ParameterSet {
    epsilon: f64,
    omega: f64,
    k1: f64,
    b0: f64,
    b1: f64,
    mu: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParameterSet {
    epsilon: f64,
    omega: f64,
    k1: f64,
    b0: f64,
    b1: f64,
    // accepted for round trips, always recomputed
    #[serde(default)]
    #[allow(dead_code)]
    mu: Option<f64>,
}

impl TryFrom<RawParameterSet> for ParameterSet {
    type Error = Error;

    fn try_from(raw: RawParameterSet) -> Result<Self> {
        ParameterSet::new(raw.epsilon, raw.omega, raw.k1, raw.b0, raw.b1)
    }
}

fn finite(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: format!("{v} is not finite"),
        })
    }
}

impl ParameterSet {
    pub fn new(epsilon: f64, omega: f64, k1: f64, b0: f64, b1: f64) -> Result<Self> {
        for (name, v) in [
            ("epsilon", epsilon),
            ("omega", omega),
            ("k1", k1),
            ("b0", b0),
            ("b1", b1),
        ] {
            finite(name, v)?;
        }
        if epsilon <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "epsilon",
                reason: format!("must be positive, got {epsilon}"),
            });
        }
        if omega <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "omega",
                reason: format!("must be positive, got {omega}"),
            });
        }
        if b1 < 0.0 {
            return Err(Error::InvalidParameter {
                name: "b1",
                reason: format!("must be nonnegative, got {b1}"),
            });
        }
        Ok(Self {
            epsilon,
            omega,
            k1,
            b0,
            b1,
            mu: mu_of(k1, b0),
        })
    }

    /// Builds a parameter set from `mu` instead of `B0`.
    pub fn from_mu(epsilon: f64, omega: f64, k1: f64, mu: f64, b1: f64) -> Result<Self> {
        finite("mu", mu)?;
        Self::new(epsilon, omega, k1, b0_of_mu(mu, k1), b1)
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
    pub fn omega(&self) -> f64 {
        self.omega
    }
    pub fn k1(&self) -> f64 {
        self.k1
    }
    pub fn b0(&self) -> f64 {
        self.b0
    }
    pub fn b1(&self) -> f64 {
        self.b1
    }
    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// Forcing period `2π/ω`.
    pub fn forcing_period(&self) -> f64 {
        std::f64::consts::TAU / self.omega
    }

    pub fn with_epsilon(self, epsilon: f64) -> Result<Self> {
        Self::new(epsilon, self.omega, self.k1, self.b0, self.b1)
    }
    pub fn with_omega(self, omega: f64) -> Result<Self> {
        Self::new(self.epsilon, omega, self.k1, self.b0, self.b1)
    }
    pub fn with_k1(self, k1: f64) -> Result<Self> {
        Self::new(self.epsilon, self.omega, k1, self.b0, self.b1)
    }
    pub fn with_b0(self, b0: f64) -> Result<Self> {
        Self::new(self.epsilon, self.omega, self.k1, b0, self.b1)
    }
    pub fn with_b1(self, b1: f64) -> Result<Self> {
        Self::new(self.epsilon, self.omega, self.k1, self.b0, b1)
    }
    /// Moves `B0` so that the unfolding parameter takes the given value.
    pub fn with_mu(self, mu: f64) -> Result<Self> {
        Self::from_mu(self.epsilon, self.omega, self.k1, mu, self.b1)
    }

    /// Sets a parameter by name (`epsilon`, `omega`, `k1`, `b0`, `b1` or `mu`).
    pub fn with_named(self, name: &str, value: f64) -> Result<Self> {
        match name {
            "epsilon" | "eps" => self.with_epsilon(value),
            "omega" => self.with_omega(value),
            "k1" => self.with_k1(value),
            "b0" | "B0" => self.with_b0(value),
            "b1" | "B1" => self.with_b1(value),
            "mu" => self.with_mu(value),
            _ => Err(Error::InvalidParameter {
                name: "name",
                reason: format!("unknown parameter `{name}`"),
            }),
        }
    }
}

/// Parameters of the rescaled (family chart) system.
///
/// `mu_bar` is stored on its own so that the fold-region analysis can hold it
/// fixed while `epsilon` varies. It is the circle centre in rescaled
/// coordinates, `mu / √epsilon`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RescaledParams {
    pub epsilon: f64,
    pub omega: f64,
    pub k1: f64,
    pub mu_bar: f64,
}

impl RescaledParams {
    pub fn from_parameters(p: &ParameterSet) -> Self {
        Self {
            epsilon: p.epsilon(),
            omega: p.omega(),
            k1: p.k1(),
            mu_bar: p.mu() / p.epsilon().sqrt(),
        }
    }
}

/// Parameters of the three-scale prototype and of the generalized oscillator.
///
/// `k1`, `b0` and `k3` are only read by the generalized system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrototypeParams {
    pub f2: f64,
    pub f3: f64,
    pub g1: f64,
    pub mu_p: f64,
    pub epsilon_p: f64,
    #[serde(default)]
    pub k1: f64,
    #[serde(default)]
    pub b0: f64,
    #[serde(default)]
    pub k3: f64,
}

impl PrototypeParams {
    pub fn validate(&self) -> Result<()> {
        if self.epsilon_p > 0.0 && self.epsilon_p.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidParameter {
                name: "epsilon_p",
                reason: format!("must be positive, got {}", self.epsilon_p),
            })
        }
    }
}
