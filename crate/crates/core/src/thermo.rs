//! Van der Waals (and ideal) gas in the energy representation.
//!
//! The fundamental equation is
//!
//! ```text
//! U(S, V) = U0 (V0 / (V - b))^(2/3) exp(2S / (3 N kB)) - a / V
//! ```
//!
//! with conjugate momenta `T = dU/dS` and `-p = dU/dV`. Setting `a = b = 0`
//! gives the ideal gas. `N` is a free parameter (one mole is `N` = Avogadro's
//! number, but the defaults keep everything of order one).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest `|exponent|` accepted before an exponential is reported as a
/// range error instead of silently overflowing.
pub const EXPONENT_LIMIT: f64 = 700.0;

/// `exp(x)` with the exponent guard applied.
pub(crate) fn guarded_exp(x: f64) -> Result<f64> {
    if !x.is_finite() || x.abs() > EXPONENT_LIMIT {
        return Err(Error::Range {
            exponent: x,
            limit: EXPONENT_LIMIT,
        });
    }
    Ok(x.exp())
}

/// Gas constants: attraction `a`, excluded volume `b`, particle count `n`,
/// Boltzmann constant `kb`, and the fiducial energy/volume `u0`, `v0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GasParameters {
    pub a: f64,
    pub b: f64,
    pub n: f64,
    pub kb: f64,
    pub u0: f64,
    pub v0: f64,
}

impl Default for GasParameters {
    fn default() -> Self {
        GasParameters {
            a: 0.0,
            b: 0.0,
            n: 1.0,
            kb: 1.0,
            u0: 1.0,
            v0: 1.0,
        }
    }
}

impl GasParameters {
    pub fn new(a: f64, b: f64, n: f64, kb: f64, u0: f64, v0: f64) -> Result<Self> {
        let params = GasParameters {
            a,
            b,
            n,
            kb,
            u0,
            v0,
        };
        params.validate()?;
        Ok(params)
    }

    /// Ideal gas with unit `N`, `kB`, `U0`, `V0`.
    pub fn ideal() -> Self {
        GasParameters::default()
    }

    /// Van der Waals gas with unit `N`, `kB`, `U0`, `V0`.
    pub fn van_der_waals(a: f64, b: f64) -> Result<Self> {
        GasParameters::new(a, b, 1.0, 1.0, 1.0, 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("n", self.n),
            ("kb", self.kb),
            ("u0", self.u0),
            ("v0", self.v0),
        ];
        for (field, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidParameter {
                    field,
                    value,
                    reason: "must be finite and > 0",
                });
            }
        }
        for (field, value) in [("a", self.a), ("b", self.b)] {
            if !(value.is_finite() && value >= 0.0) {
                return Err(Error::InvalidParameter {
                    field,
                    value,
                    reason: "must be finite and >= 0",
                });
            }
        }
        Ok(())
    }

    pub fn is_ideal(&self) -> bool {
        self.a == 0.0 && self.b == 0.0
    }

    /// `N kB`.
    pub fn nkb(&self) -> f64 {
        self.n * self.kb
    }

    /// Same constants with `a = b = 0`.
    pub fn ideal_limit(&self) -> GasParameters {
        GasParameters {
            a: 0.0,
            b: 0.0,
            ..*self
        }
    }

    /// Rejects volumes at or below the excluded volume.
    pub(crate) fn check_volume(&self, v: f64) -> Result<()> {
        if !(v.is_finite() && v > self.b) {
            return Err(Error::Domain {
                what: "V",
                value: v,
                requirement: "V > b",
            });
        }
        Ok(())
    }
}

/// A point `(S, V)` of configuration space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtensiveState {
    pub s: f64,
    pub v: f64,
}

impl ExtensiveState {
    pub fn new(s: f64, v: f64) -> Self {
        ExtensiveState { s, v }
    }
}

/// A point `(U, S, V, T, p)` of the five-dimensional contact manifold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContactPoint {
    pub u: f64,
    pub s: f64,
    pub v: f64,
    pub t: f64,
    pub p: f64,
}

/// The two factors shared by `U`, `T` and `p`: the entropic exponential
/// term `U0 (V0/(V-b))^(2/3) exp(2S/(3NkB))` and `V - b`.
fn thermal_term(params: &GasParameters, state: ExtensiveState) -> Result<(f64, f64)> {
    params.validate()?;
    params.check_volume(state.v)?;
    if !state.s.is_finite() {
        return Err(Error::Domain {
            what: "S",
            value: state.s,
            requirement: "finite",
        });
    }
    let free = state.v - params.b;
    let boltz = guarded_exp(2.0 * state.s / (3.0 * params.nkb()))?;
    let term = params.u0 * (params.v0 / free).powf(2.0 / 3.0) * boltz;
    if !term.is_finite() {
        return Err(Error::NonFinite { what: "U" });
    }
    Ok((term, free))
}

/// Fundamental equation `U(S, V)`.
pub fn energy(params: &GasParameters, state: ExtensiveState) -> Result<f64> {
    let (term, _) = thermal_term(params, state)?;
    Ok(term - params.a / state.v)
}

/// `T = dU/dS`, strictly positive.
pub fn temperature(params: &GasParameters, state: ExtensiveState) -> Result<f64> {
    let (term, _) = thermal_term(params, state)?;
    Ok(term * 2.0 / (3.0 * params.nkb()))
}

/// `p = -dU/dV = (2/3) U0 exp(2S/(3NkB)) V0^(2/3) / (V-b)^(5/3) - a/V^2`.
pub fn pressure(params: &GasParameters, state: ExtensiveState) -> Result<f64> {
    let (term, free) = thermal_term(params, state)?;
    Ok(2.0 / 3.0 * term / free - params.a / (state.v * state.v))
}

/// Lifts `(S, V)` to the contact manifold, filling `U`, `T`, `p` consistently.
pub fn contact_lift(params: &GasParameters, state: ExtensiveState) -> Result<ContactPoint> {
    let (term, free) = thermal_term(params, state)?;
    let v = state.v;
    Ok(ContactPoint {
        u: term - params.a / v,
        s: state.s,
        v,
        t: term * 2.0 / (3.0 * params.nkb()),
        p: 2.0 / 3.0 * term / free - params.a / (v * v),
    })
}

/// Van der Waals equation of state written as a residual:
/// `(p + a/V^2)(V - b) - N kB T`.
pub fn eos_residual(point: &ContactPoint, params: &GasParameters) -> Result<f64> {
    params.check_volume(point.v)?;
    let v = point.v;
    Ok((point.p + params.a / (v * v)) * (v - params.b) - params.nkb() * point.t)
}

/// Equipartition with the attraction correction as a residual:
/// `U - (3/2) N kB T + a/V`.
pub fn equipartition_residual(point: &ContactPoint, params: &GasParameters) -> Result<f64> {
    if !(point.v.is_finite() && point.v > 0.0) {
        return Err(Error::Domain {
            what: "V",
            value: point.v,
            requirement: "V > 0",
        });
    }
    Ok(point.u - 1.5 * params.nkb() * point.t + params.a / point.v)
}

/// Natural magnitude of the terms entering [`eos_residual`]; residuals are
/// judged relative to this.
pub fn eos_scale(point: &ContactPoint, params: &GasParameters) -> f64 {
    params.nkb() * point.t.abs()
}

/// Natural magnitude of the terms entering [`equipartition_residual`].
pub fn equipartition_scale(point: &ContactPoint, params: &GasParameters) -> f64 {
    point.u.abs().max(1.5 * params.nkb() * point.t.abs()) + params.a / point.v.abs()
}
