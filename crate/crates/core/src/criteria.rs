//! Quadrature statistics and the Duan inseparability test.

use std::f64::consts::{FRAC_PI_2, TAU};

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::GaussianState;

/// Value of `Var[X1 + X2] + Var[P1 - P2]` for any separable state.
pub const SEPARABLE_BOUND: f64 = 4.0;

/// Homodyne observable `X cos(phase) + P sin(phase)` on one mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureObservable {
    pub mode: usize,
    phase: f64,
}

impl QuadratureObservable {
    pub fn new(mode: usize, phase: f64) -> Self {
        let mut phase = phase.rem_euclid(TAU);
        if phase >= TAU {
            phase = 0.0;
        }
        Self { mode, phase }
    }

    pub fn x(mode: usize) -> Self {
        Self::new(mode, 0.0)
    }

    pub fn p(mode: usize) -> Self {
        Self::new(mode, FRAC_PI_2)
    }

    /// Phase reduced to `[0, 2pi)`.
    pub fn phase(&self) -> f64 {
        self.phase
    }
}

/// Linear combination of quadrature observables, e.g. `X1 + X2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointCombination {
    terms: Vec<(QuadratureObservable, f64)>,
}

impl JointCombination {
    pub fn new(terms: Vec<(QuadratureObservable, f64)>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::EmptyCombination);
        }
        if let Some((_, c)) = terms.iter().find(|(_, c)| !c.is_finite()) {
            return Err(Error::OutOfRange {
                name: "combination coefficient",
                value: *c,
                range: "finite reals",
            });
        }
        Ok(Self { terms })
    }

    /// `X_a + X_b`.
    pub fn x_sum(mode_a: usize, mode_b: usize) -> Self {
        Self {
            terms: vec![
                (QuadratureObservable::x(mode_a), 1.0),
                (QuadratureObservable::x(mode_b), 1.0),
            ],
        }
    }

    /// `P_a - P_b`.
    pub fn p_diff(mode_a: usize, mode_b: usize) -> Self {
        Self {
            terms: vec![
                (QuadratureObservable::p(mode_a), 1.0),
                (QuadratureObservable::p(mode_b), -1.0),
            ],
        }
    }

    pub fn terms(&self) -> &[(QuadratureObservable, f64)] {
        &self.terms
    }

    /// Variance of the combination in the vacuum: the sum of squared
    /// coefficients.
    pub fn reference_variance(&self) -> f64 {
        self.terms.iter().map(|(_, c)| c * c).sum()
    }

    /// The combination as a vector `c` over the state's quadratures, so that
    /// its variance is `c^T cov c`.
    pub fn coefficient_vector(&self, n_modes: usize) -> Result<DVector<f64>> {
        let mut v = DVector::zeros(2 * n_modes);
        for (obs, c) in &self.terms {
            if obs.mode >= n_modes {
                return Err(Error::ModeOutOfRange {
                    index: obs.mode,
                    n_modes,
                });
            }
            let (s, co) = obs.phase.sin_cos();
            v[2 * obs.mode] += c * co;
            v[2 * obs.mode + 1] += c * s;
        }
        Ok(v)
    }
}

/// Variance of a combination relative to its vacuum value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseLevel {
    pub variance: f64,
    pub reference_variance: f64,
    /// `10 log10(variance / reference_variance)`; `-inf` when the variance is
    /// exactly zero.
    #[serde(with = "db_serde")]
    pub rel_db: f64,
}

impl NoiseLevel {
    pub fn new(variance: f64, reference_variance: f64) -> Result<Self> {
        if !(reference_variance > 0.0 && reference_variance.is_finite()) {
            return Err(Error::OutOfRange {
                name: "reference variance",
                value: reference_variance,
                range: "(0, inf)",
            });
        }
        if !(variance >= 0.0 && variance.is_finite()) {
            return Err(Error::OutOfRange {
                name: "variance",
                value: variance,
                range: "[0, inf)",
            });
        }
        let rel_db = if variance == 0.0 {
            f64::NEG_INFINITY
        } else {
            to_db(variance, reference_variance)?
        };
        Ok(Self {
            variance,
            reference_variance,
            rel_db,
        })
    }

    pub fn is_below_floor(&self) -> bool {
        self.rel_db == f64::NEG_INFINITY
    }
}

/// Outcome of the Duan test on a pair of modes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DuanResult {
    pub var_x_sum: f64,
    pub var_p_diff: f64,
    pub i_value: f64,
    pub entangled: bool,
}

impl DuanResult {
    pub fn from_variances(var_x_sum: f64, var_p_diff: f64) -> Self {
        let i_value = var_x_sum + var_p_diff;
        Self {
            var_x_sum,
            var_p_diff,
            i_value,
            entangled: i_value < SEPARABLE_BOUND,
        }
    }
}

pub fn quadrature_variance(state: &GaussianState, obs: QuadratureObservable) -> Result<f64> {
    state.check_mode(obs.mode)?;
    let (s, c) = obs.phase.sin_cos();
    let i = 2 * obs.mode;
    let cov = state.cov();
    let v = c * c * cov[(i, i)] + 2.0 * c * s * cov[(i, i + 1)] + s * s * cov[(i + 1, i + 1)];
    Ok(v.max(0.0))
}

pub fn joint_variance(state: &GaussianState, combo: &JointCombination) -> Result<NoiseLevel> {
    let c = combo.coefficient_vector(state.n_modes())?;
    let variance = (c.transpose() * state.cov() * &c)[(0, 0)].max(0.0);
    NoiseLevel::new(variance, combo.reference_variance())
}

/// `I = Var[X_a + X_b] + Var[P_a - P_b]`; entangled when `I < 4`.
pub fn duan(state: &GaussianState, mode_a: usize, mode_b: usize) -> Result<DuanResult> {
    state.check_mode(mode_a)?;
    state.check_mode(mode_b)?;
    if mode_a == mode_b {
        return Err(Error::DuplicateMode(mode_a));
    }
    let x = joint_variance(state, &JointCombination::x_sum(mode_a, mode_b))?;
    let p = joint_variance(state, &JointCombination::p_diff(mode_a, mode_b))?;
    Ok(DuanResult::from_variances(x.variance, p.variance))
}

pub fn to_db(variance: f64, reference: f64) -> Result<f64> {
    if reference.is_nan() || reference <= 0.0 {
        return Err(Error::OutOfRange {
            name: "reference variance",
            value: reference,
            range: "(0, inf)",
        });
    }
    if variance.is_nan() || variance <= 0.0 {
        return Err(Error::OutOfRange {
            name: "variance",
            value: variance,
            range: "(0, inf)",
        });
    }
    Ok(10.0 * (variance / reference).log10())
}

pub fn from_db(rel_db: f64, reference: f64) -> Result<f64> {
    if reference.is_nan() || reference <= 0.0 {
        return Err(Error::OutOfRange {
            name: "reference variance",
            value: reference,
            range: "(0, inf)",
        });
    }
    if !rel_db.is_finite() {
        return Err(Error::OutOfRange {
            name: "relative noise level (dB)",
            value: rel_db,
            range: "finite reals",
        });
    }
    Ok(reference * 10f64.powf(rel_db / 10.0))
}

/// Token written in place of `-inf` dB.
pub const BELOW_FLOOR: &str = "below-floor";

/// Serde adapter writing `-inf` dB values as [`BELOW_FLOOR`].
pub mod db_serde {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use super::BELOW_FLOOR;

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Tag(String),
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if *v == f64::NEG_INFINITY {
            s.serialize_str(BELOW_FLOOR)
        } else {
            s.serialize_f64(*v)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Tag(t) if t == BELOW_FLOOR => Ok(f64::NEG_INFINITY),
            Repr::Tag(t) => Err(serde::de::Error::custom(format!(
                "expected a number or \"{BELOW_FLOOR}\", got \"{t}\""
            ))),
        }
    }
}
