//! Simulated approximate-counting oracles for `Z_T` and `Z_F`.
//!
//! An FPRAS called with tolerance `δ` returns a value within a factor `e^{±δ}` of the truth.
//! The simulators here compute the exact value by enumeration and then perturb it by a
//! rational factor that provably lies in `[e^{-δ}, e^{δ}]`.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use num_traits::{Signed, Zero};

use crate::caps::EnumCaps;
use crate::dpp::{z_forest, z_tree};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::linalg::WeightedPSD;
use crate::rational::{exp_lower, exp_upper, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    SpanningTree,
    Forest,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Up,
    Down,
}

/// How a simulated oracle answers.
///
/// `noise` is the error magnitude. `None` means the tolerance requested by the caller, which
/// is what a conforming FPRAS would deliver; a fixed value lets tests model an oracle that
/// ignores the requested tolerance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleSpec {
    Exact,
    /// Exact value times `e^u`, `u` uniform on `[-noise, noise]`.
    Noisy { noise: Option<Rational>, seed: u64 },
    /// Exact value times (a rational inner bound of) `e^{±noise}`.
    Adversarial { noise: Option<Rational>, direction: Direction },
}

/// Something that answers normalizing-constant queries.
pub trait NormalizerOracle {
    fn family(&self) -> Family;
    fn is_exact(&self) -> bool;
    /// Estimate of the normalizer of `(a, g)` within `e^{±tolerance}`.
    fn query(&mut self, a: &WeightedPSD, g: &Graph, tolerance: &Rational) -> Result<Rational>;
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleCall {
    pub tolerance: Rational,
    pub exact: Rational,
    pub returned: Rational,
}

/// Exact enumeration plus a controlled multiplicative perturbation. Records every call.
#[derive(Clone, Debug)]
pub struct SimulatedOracle {
    spec: OracleSpec,
    family: Family,
    caps: EnumCaps,
    rng: ChaCha8Rng,
    calls: Vec<OracleCall>,
}

impl SimulatedOracle {
    pub fn new(family: Family, spec: OracleSpec, caps: EnumCaps) -> Self {
        let seed = match &spec {
            OracleSpec::Noisy { seed, .. } => *seed,
            _ => 0,
        };
        SimulatedOracle {
            spec,
            family,
            caps,
            rng: ChaCha8Rng::seed_from_u64(seed),
            calls: Vec::new(),
        }
    }

    pub fn exact(family: Family, caps: EnumCaps) -> Self {
        Self::new(family, OracleSpec::Exact, caps)
    }

    pub fn spec(&self) -> &OracleSpec {
        &self.spec
    }

    pub fn calls(&self) -> &[OracleCall] {
        &self.calls
    }

    /// A rational factor in `[e^{-noise}, e^{noise}]`.
    fn factor(&mut self, tolerance: &Rational) -> Result<Rational> {
        let pick = |noise: &Option<Rational>| noise.clone().unwrap_or_else(|| tolerance.clone());
        match &self.spec {
            OracleSpec::Exact => Ok(Rational::from_integer(1.into())),
            OracleSpec::Noisy { noise, .. } => {
                let noise = pick(noise);
                check_noise(&noise)?;
                // u = noise * (2k / 2^64 - 1)
                let k = Rational::from_integer(self.rng.next_u64().into());
                let two_64 = Rational::from_integer(num_bigint::BigInt::from(1u8) << 64);
                let u = &noise * (k * Rational::from_integer(2.into()) / two_64 - Rational::from_integer(1.into()));
                Ok(inner_exp(&u))
            }
            OracleSpec::Adversarial { noise, direction } => {
                let noise = pick(noise);
                check_noise(&noise)?;
                Ok(match direction {
                    Direction::Up => inner_exp(&noise),
                    Direction::Down => inner_exp(&-noise),
                })
            }
        }
    }
}

fn check_noise(noise: &Rational) -> Result<()> {
    if noise.is_negative() {
        Err(Error::EpsilonOutOfRange(noise.to_string()))
    } else {
        Ok(())
    }
}

/// Rational between 1 and `e^t` (inclusive), on the side of 1 that `t` points to.
fn inner_exp(t: &Rational) -> Rational {
    if t.is_negative() {
        exp_upper(t)
    } else {
        exp_lower(t)
    }
}

impl NormalizerOracle for SimulatedOracle {
    fn family(&self) -> Family {
        self.family
    }

    fn is_exact(&self) -> bool {
        self.spec == OracleSpec::Exact
    }

    fn query(&mut self, a: &WeightedPSD, g: &Graph, tolerance: &Rational) -> Result<Rational> {
        let exact = match self.family {
            Family::SpanningTree => z_tree(a, g, &self.caps)?,
            Family::Forest => z_forest(a, g, &self.caps)?,
        };
        let returned = if exact.is_zero() {
            exact.clone()
        } else {
            &exact * self.factor(tolerance)?
        };
        self.calls.push(OracleCall {
            tolerance: tolerance.clone(),
            exact,
            returned: returned.clone(),
        });
        Ok(returned)
    }
}
