//! Change of variables from `(S, V)` to Toda coordinates.
//!
//! The chain is
//!
//! 1. shift: `(S', V') = (S, V - b)`
//! 2. scale: `(s, v) = (S' / (N kB), ln(V' / V0))`
//! 3. Toda chart (needs `a > 0`): `x = s - v`, `U0 exp(2y/3) = a / (V0 e^v + b)`
//!
//! after which `U(x, y) = W(x) - W(y)` with `W(z) = U0 exp(2z/3)`. For the
//! ideal gas the Toda chart is singular and `(x', y') = (s - v, s + v)` is
//! used instead; there `U = W(x')`.

use serde::{Deserialize, Serialize};

use crate::error::{ChartDomainError, Error, Result};
use crate::thermo::{guarded_exp, ExtensiveState, GasParameters};

/// A point in Toda coordinates together with its momenta and energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransformedPoint {
    pub x: f64,
    pub y: f64,
    pub p_x: f64,
    pub p_y: f64,
    pub u: f64,
}

fn require_toda_chart(params: &GasParameters) -> Result<()> {
    params.validate()?;
    if !(params.a > 0.0) {
        return Err(ChartDomainError::ANonpositive { a: params.a }.into());
    }
    Ok(())
}

pub fn shift(params: &GasParameters, s: f64, v: f64) -> Result<(f64, f64)> {
    if !(v > params.b) {
        return Err(ChartDomainError::VolumeLeqB { v, b: params.b }.into());
    }
    Ok((s, v - params.b))
}

pub fn unshift(params: &GasParameters, s_shifted: f64, v_shifted: f64) -> (f64, f64) {
    (s_shifted, v_shifted + params.b)
}

/// `(S'/(N kB), ln(V'/V0))`.
pub fn nondimensionalize(params: &GasParameters, s_shifted: f64, v_shifted: f64) -> Result<(f64, f64)> {
    params.validate()?;
    if !(v_shifted > 0.0) {
        return Err(Error::Domain {
            what: "V'",
            value: v_shifted,
            requirement: "V' > 0",
        });
    }
    Ok((s_shifted / params.nkb(), (v_shifted / params.v0).ln()))
}

pub fn dimensionalize(params: &GasParameters, s: f64, v: f64) -> (f64, f64) {
    (s * params.nkb(), params.v0 * v.exp())
}

/// Fundamental equation in `(s, v)`: `U0 exp(2(s - v)/3) - a / (V0 e^v + b)`.
pub fn energy_sv(params: &GasParameters, s: f64, v: f64) -> Result<f64> {
    params.validate()?;
    let thermal = params.u0 * guarded_exp(2.0 * (s - v) / 3.0)?;
    let volume = params.v0 * guarded_exp(v)? + params.b;
    Ok(thermal - params.a / volume)
}

/// Toda chart `(s, v) -> (x, y)`; singular at `a = 0`.
pub fn toda_coords(params: &GasParameters, s: f64, v: f64) -> Result<(f64, f64)> {
    require_toda_chart(params)?;
    let volume = params.v0 * guarded_exp(v)? + params.b;
    let y = 1.5 * (params.a / (params.u0 * volume)).ln();
    Ok((s - v, y))
}

/// Inverse Toda chart. Defined while `a exp(-2y/3) / U0 > b`.
pub fn toda_coords_inverse(params: &GasParameters, x: f64, y: f64) -> Result<(f64, f64)> {
    require_toda_chart(params)?;
    let arg = (params.a * guarded_exp(-2.0 * y / 3.0)? / params.u0 - params.b) / params.v0;
    if !(arg > 0.0) {
        return Err(ChartDomainError::VOutOfRange { arg }.into());
    }
    let v = arg.ln();
    Ok((x + v, v))
}

/// Toda potential `W(z) = U0 exp(2z/3)`.
pub fn toda_potential(params: &GasParameters, z: f64) -> Result<f64> {
    Ok(params.u0 * guarded_exp(2.0 * z / 3.0)?)
}

/// `U(x, y) = W(x) - W(y)`.
pub fn energy_xy(params: &GasParameters, x: f64, y: f64) -> Result<f64> {
    Ok(toda_potential(params, x)? - toda_potential(params, y)?)
}

/// `(p_x, p_y) = (2/3 W(x), -2/3 W(y))`.
pub fn momenta_xy(params: &GasParameters, x: f64, y: f64) -> Result<(f64, f64)> {
    Ok((
        2.0 / 3.0 * toda_potential(params, x)?,
        -2.0 / 3.0 * toda_potential(params, y)?,
    ))
}

/// Nonsingular ideal-gas chart `(s, v) -> (s - v, s + v)`.
pub fn ideal_coords(s: f64, v: f64) -> (f64, f64) {
    (s - v, s + v)
}

pub fn ideal_coords_inverse(x_prime: f64, y_prime: f64) -> (f64, f64) {
    ((x_prime + y_prime) / 2.0, (y_prime - x_prime) / 2.0)
}

/// Ideal-gas energy `W(x')`; only meaningful for `a = b = 0`.
pub fn ideal_energy(params: &GasParameters, x_prime: f64) -> Result<f64> {
    params.validate()?;
    if !params.is_ideal() {
        return Err(Error::InvalidParameter {
            field: if params.a != 0.0 { "a" } else { "b" },
            value: if params.a != 0.0 { params.a } else { params.b },
            reason: "ideal-gas chart requires a = 0 and b = 0",
        });
    }
    toda_potential(params, x_prime)
}

/// `(S, V) -> (s, v)`, the first two links of the chain.
pub fn to_scaled(params: &GasParameters, state: ExtensiveState) -> Result<(f64, f64)> {
    let (s_shifted, v_shifted) = shift(params, state.s, state.v)?;
    nondimensionalize(params, s_shifted, v_shifted)
}

pub fn from_scaled(params: &GasParameters, s: f64, v: f64) -> ExtensiveState {
    let (s_shifted, v_shifted) = dimensionalize(params, s, v);
    let (s, v) = unshift(params, s_shifted, v_shifted);
    ExtensiveState::new(s, v)
}

/// Full chain `(S, V) -> (x, y, p_x, p_y, U)`.
pub fn full_chain(params: &GasParameters, state: ExtensiveState) -> Result<TransformedPoint> {
    require_toda_chart(params)?;
    let (s, v) = to_scaled(params, state)?;
    let (x, y) = toda_coords(params, s, v)?;
    let (p_x, p_y) = momenta_xy(params, x, y)?;
    Ok(TransformedPoint {
        x,
        y,
        p_x,
        p_y,
        u: energy_xy(params, x, y)?,
    })
}

/// `(x, y) -> (S, V)`.
pub fn full_chain_inverse(params: &GasParameters, x: f64, y: f64) -> Result<ExtensiveState> {
    let (s, v) = toda_coords_inverse(params, x, y)?;
    Ok(from_scaled(params, s, v))
}

/// `(S, V)` chart map into `(x', y')` for the ideal chart.
pub fn ideal_chain(params: &GasParameters, state: ExtensiveState) -> Result<(f64, f64)> {
    let (s, v) = to_scaled(params, state)?;
    Ok(ideal_coords(s, v))
}

pub fn ideal_chain_inverse(params: &GasParameters, x_prime: f64, y_prime: f64) -> ExtensiveState {
    let (s, v) = ideal_coords_inverse(x_prime, y_prime);
    from_scaled(params, s, v)
}
