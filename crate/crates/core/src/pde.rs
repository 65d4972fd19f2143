//! PDEs of state as residual functionals, the finite-difference gradient
//! oracle, and line-integral reconstruction of `U`.
//!
//! In `(S, V)` the two PDEs are
//!
//! ```text
//! (dU/dV - a/V^2)(V - b) + N kB dU/dS = 0
//! U - (3/2) N kB dU/dS + a/V = 0
//! ```
//!
//! and in Toda coordinates they decouple into
//! `dU/dx - (2U0/3) e^(2x/3) = 0`, `dU/dy + (2U0/3) e^(2y/3) = 0`.

use crate::error::{Error, Result};
use crate::thermo::{self, ExtensiveState, GasParameters};
use crate::transforms;

/// Central-difference step that balances truncation against round-off:
/// `eps^(1/3) * max(1, |coordinate|)`.
pub fn default_step(coordinate: f64) -> f64 {
    f64::EPSILON.cbrt() * coordinate.abs().max(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Step {
    /// [`default_step`] per coordinate.
    #[default]
    Auto,
    Fixed(f64),
}

impl Step {
    fn resolve(self, coordinate: f64) -> Result<f64> {
        match self {
            Step::Auto => Ok(default_step(coordinate)),
            Step::Fixed(h) if h.is_finite() && h > 0.0 => Ok(h),
            Step::Fixed(h) => Err(Error::InvalidParameter {
                field: "h",
                value: h,
                reason: "finite-difference step must be > 0",
            }),
        }
    }
}

/// Where `dU/dS` and `dU/dV` come from.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum GradientSource {
    /// Closed-form momenta `T` and `-p`.
    #[default]
    Analytic,
    FiniteDifference(Step),
}

impl GradientSource {
    pub fn fd(h: f64) -> Self {
        GradientSource::FiniteDifference(Step::Fixed(h))
    }

    /// Finite differences with [`default_step`].
    pub fn default_fd() -> Self {
        GradientSource::FiniteDifference(Step::Auto)
    }
}

/// Central differences of `f` in `S` and `V` at `at` with step `h`.
pub fn fd_gradient<F>(f: F, at: ExtensiveState, h: f64) -> Result<(f64, f64)>
where
    F: Fn(ExtensiveState) -> Result<f64>,
{
    let h = Step::Fixed(h).resolve(0.0)?;
    let ds = (f(ExtensiveState::new(at.s + h, at.v))? - f(ExtensiveState::new(at.s - h, at.v))?)
        / (2.0 * h);
    let dv = (f(ExtensiveState::new(at.s, at.v + h))? - f(ExtensiveState::new(at.s, at.v - h))?)
        / (2.0 * h);
    Ok((ds, dv))
}

/// Central differences of a function of two plain coordinates, with
/// independent steps per axis.
pub(crate) fn fd_gradient_xy<F>(f: F, x: f64, y: f64, hx: f64, hy: f64) -> Result<(f64, f64)>
where
    F: Fn(f64, f64) -> Result<f64>,
{
    let dx = (f(x + hx, y)? - f(x - hx, y)?) / (2.0 * hx);
    let dy = (f(x, y + hy)? - f(x, y - hy)?) / (2.0 * hy);
    Ok((dx, dy))
}

/// `(dU/dS, dU/dV)` of the fundamental equation.
pub fn energy_gradient(
    params: &GasParameters,
    state: ExtensiveState,
    grad: GradientSource,
) -> Result<(f64, f64)> {
    match grad {
        GradientSource::Analytic => {
            let pt = thermo::contact_lift(params, state)?;
            Ok((pt.t, -pt.p))
        }
        GradientSource::FiniteDifference(step) => {
            params.check_volume(state.v)?;
            let hs = step.resolve(state.s)?;
            let hv = step.resolve(state.v)?;
            fd_gradient_xy(
                |s, v| thermo::energy(params, ExtensiveState::new(s, v)),
                state.s,
                state.v,
                hs,
                hv,
            )
        }
    }
}

/// `(dU/dV - a/V^2)(V - b) + N kB dU/dS`, implemented as printed.
pub fn pde1_residual(params: &GasParameters, state: ExtensiveState, grad: GradientSource) -> Result<f64> {
    let (du_ds, du_dv) = energy_gradient(params, state, grad)?;
    let v = state.v;
    Ok((du_dv - params.a / (v * v)) * (v - params.b) + params.nkb() * du_ds)
}

/// `U - (3/2) N kB dU/dS + a/V`.
pub fn pde2_residual(params: &GasParameters, state: ExtensiveState, grad: GradientSource) -> Result<f64> {
    let (du_ds, _) = energy_gradient(params, state, grad)?;
    let u = thermo::energy(params, state)?;
    Ok(u - 1.5 * params.nkb() * du_ds + params.a / state.v)
}

/// Magnitude of the individual terms of both PDE residuals at `state`,
/// used to make residuals relative.
pub fn pde_scale(params: &GasParameters, state: ExtensiveState) -> Result<f64> {
    let pt = thermo::contact_lift(params, state)?;
    let nkbt = params.nkb() * pt.t;
    Ok(nkbt.max(pt.u.abs()).max(params.a / state.v))
}

/// Residuals of the decoupled PDEs in Toda coordinates. Requires `a > 0`.
pub fn decoupled_residuals(
    params: &GasParameters,
    x: f64,
    y: f64,
    grad: GradientSource,
) -> Result<(f64, f64)> {
    // the (x, y) chart only exists for a > 0
    if !(params.a > 0.0) {
        return Err(crate::error::ChartDomainError::ANonpositive { a: params.a }.into());
    }
    params.validate()?;
    let (du_dx, du_dy) = match grad {
        GradientSource::Analytic => transforms::momenta_xy(params, x, y)?,
        GradientSource::FiniteDifference(step) => fd_gradient_xy(
            |x, y| transforms::energy_xy(params, x, y),
            x,
            y,
            step.resolve(x)?,
            step.resolve(y)?,
        )?,
    };
    let c = 2.0 * params.u0 / 3.0;
    Ok((
        du_dx - c * thermo::guarded_exp(2.0 * x / 3.0)?,
        du_dy + c * thermo::guarded_exp(2.0 * y / 3.0)?,
    ))
}

/// Piecewise-linear path through `(S, V)` waypoints.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSpec {
    waypoints: Vec<ExtensiveState>,
    steps_per_segment: usize,
}

impl PathSpec {
    pub fn new(waypoints: Vec<ExtensiveState>, steps_per_segment: usize) -> Result<Self> {
        if waypoints.len() < 2 {
            return Err(Error::InvalidParameter {
                field: "waypoints",
                value: waypoints.len() as f64,
                reason: "a path needs at least two waypoints",
            });
        }
        if steps_per_segment == 0 {
            return Err(Error::InvalidParameter {
                field: "steps_per_segment",
                value: 0.0,
                reason: "must be a positive integer",
            });
        }
        Ok(PathSpec {
            waypoints,
            steps_per_segment,
        })
    }

    pub fn waypoints(&self) -> &[ExtensiveState] {
        &self.waypoints
    }

    pub fn steps_per_segment(&self) -> usize {
        self.steps_per_segment
    }

    pub fn start(&self) -> ExtensiveState {
        self.waypoints[0]
    }

    pub fn end(&self) -> ExtensiveState {
        self.waypoints[self.waypoints.len() - 1]
    }
}

/// `U(start) + integral of (T dS - p dV)` along `path`, composite trapezoid
/// per segment. Second order in the step size.
pub fn reconstruct_energy(params: &GasParameters, path: &PathSpec) -> Result<f64> {
    for w in path.waypoints() {
        params.check_volume(w.v)?;
    }
    let mut total = thermo::energy(params, path.start())?;
    let n = path.steps_per_segment();
    for pair in path.waypoints().windows(2) {
        let (from, to) = (pair[0], pair[1]);
        let (ds, dv) = (to.s - from.s, to.v - from.v);
        if ds == 0.0 && dv == 0.0 {
            continue;
        }
        // integrand of the one-form along the segment, per unit parameter
        let integrand = |k: usize| -> Result<f64> {
            let tau = k as f64 / n as f64;
            let at = ExtensiveState::new(from.s + tau * ds, from.v + tau * dv);
            let pt = thermo::contact_lift(params, at)?;
            Ok(pt.t * ds - pt.p * dv)
        };
        let mut sum = 0.5 * (integrand(0)? + integrand(n)?);
        for k in 1..n {
            sum += integrand(k)?;
        }
        total += sum / n as f64;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p1() -> GasParameters {
        GasParameters::van_der_waals(2.0, 1.0).unwrap()
    }

    #[test]
    fn fd_gradient_trivial_fields() {
        let (ds, dv) = fd_gradient(|st| Ok(st.s * st.v), ExtensiveState::new(2.0, 3.0), 1e-4).unwrap();
        assert!((ds - 3.0).abs() < 1e-8 && (dv - 2.0).abs() < 1e-8);
        let (ds, dv) = fd_gradient(|_| Ok(4.2), ExtensiveState::new(-1.0, 9.0), 1e-3).unwrap();
        assert_eq!((ds, dv), (0.0, 0.0));
        assert!(fd_gradient(|_| Ok(0.0), ExtensiveState::new(0.0, 1.0), 0.0).is_err());
    }

    #[test]
    fn fd_gradient_of_energy_recovers_momenta() {
        let p = p1();
        let (ds, dv) =
            fd_gradient(|st| thermo::energy(&p, st), ExtensiveState::new(0.0, 2.0), 1e-5).unwrap();
        assert!((ds - 2.0 / 3.0).abs() < 1e-7);
        assert!((dv + 1.0 / 6.0).abs() < 1e-7);
    }

    #[test]
    fn fd_stencil_crossing_b_propagates_domain_error() {
        let p = p1();
        let err = fd_gradient(|st| thermo::energy(&p, st), ExtensiveState::new(0.0, 1.05), 0.1)
            .unwrap_err();
        assert!(matches!(err, Error::Domain { what: "V", .. }));
    }

    #[test]
    fn pde_residuals_at_reference_points() {
        let ideal = GasParameters::ideal();
        for (p, st) in [(p1(), ExtensiveState::new(0.0, 2.0)), (ideal, ExtensiveState::new(0.0, 1.0))] {
            assert!(pde1_residual(&p, st, GradientSource::Analytic).unwrap().abs() < 1e-15);
            assert!(pde2_residual(&p, st, GradientSource::Analytic).unwrap().abs() < 1e-15);
            assert!(pde1_residual(&p, st, GradientSource::fd(1e-5)).unwrap().abs() < 1e-8);
            assert!(pde2_residual(&p, st, GradientSource::fd(1e-5)).unwrap().abs() < 1e-8);
        }
    }

    #[test]
    fn pde1_detects_wrong_gradient() {
        // Off-shell check: the residual functional is not identically zero.
        let p = p1();
        let st = ExtensiveState::new(0.0, 2.0);
        let wrong = |st: ExtensiveState| thermo::energy(&p, st).map(|u| 1.1 * u + st.v);
        let (ds, dv) = fd_gradient(wrong, st, 1e-5).unwrap();
        let r = (dv - p.a / 4.0) * (2.0 - p.b) + p.nkb() * ds;
        assert!(r.abs() > 0.5);
    }

    #[test]
    fn decoupled_residuals_vanish() {
        for (x, y) in [(0.0, 0.0), (1.5, 0.0), (-0.4, 2.2)] {
            let (r1, r2) = decoupled_residuals(&p1(), x, y, GradientSource::Analytic).unwrap();
            assert_eq!((r1, r2), (0.0, 0.0));
            let (r1, r2) = decoupled_residuals(&p1(), x, y, GradientSource::default_fd()).unwrap();
            assert!(r1.abs() < 1e-8 && r2.abs() < 1e-8, "{r1} {r2}");
        }
        assert!(decoupled_residuals(&GasParameters::ideal(), 0.0, 0.0, GradientSource::Analytic).is_err());
    }

    #[test]
    fn reconstruction_ideal_closed_form() {
        let ideal = GasParameters::ideal();
        let path = PathSpec::new(
            vec![ExtensiveState::new(0.0, 1.0), ExtensiveState::new(0.0, 2.0)],
            10_000,
        )
        .unwrap();
        let u = reconstruct_energy(&ideal, &path).unwrap();
        assert!((u - 2f64.powf(-2.0 / 3.0)).abs() < 1e-7, "{u}");
    }

    #[test]
    fn zero_length_path_returns_start_energy() {
        let st = ExtensiveState::new(0.3, 2.5);
        let path = PathSpec::new(vec![st, st], 7).unwrap();
        assert_eq!(reconstruct_energy(&p1(), &path).unwrap(), thermo::energy(&p1(), st).unwrap());
    }

    #[test]
    fn path_spec_validation() {
        assert!(PathSpec::new(vec![ExtensiveState::new(0.0, 2.0)], 3).is_err());
        assert!(PathSpec::new(vec![ExtensiveState::new(0.0, 2.0); 2], 0).is_err());
        let path = PathSpec::new(vec![ExtensiveState::new(0.0, 2.0), ExtensiveState::new(0.0, 0.5)], 4)
            .unwrap();
        assert!(reconstruct_energy(&p1(), &path).is_err());
    }
}
