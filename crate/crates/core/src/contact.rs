//! Contact 1-forms in both charts, canonical Poisson brackets on the
//! `(S, T, V, -p)` submanifold, and the numerical contactomorphism check.
//!
//! Both 1-forms are evaluated exactly as written (`dU + T dS - p dV` and
//! `dU + p_x dx + p_y dy`). The chart-independent statement that is actually
//! verified is the chain rule `T dS - p dV = p_x dx + p_y dy`, which holds
//! whatever global sign convention one attaches to the contact form.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pde::default_step;
use crate::thermo::{self, ContactPoint, ExtensiveState, GasParameters};
use crate::transforms::{self, TransformedPoint};

/// Displacement `(dU, dS, dV, dT, dp)` on the contact manifold.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TangentVector {
    pub du: f64,
    pub ds: f64,
    pub dv: f64,
    pub dt: f64,
    pub dp: f64,
}

/// Coordinates of the Poisson submanifold: `S`, `T`, `V`, `p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoissonPoint {
    pub s: f64,
    pub t: f64,
    pub v: f64,
    pub p: f64,
}

impl From<ContactPoint> for PoissonPoint {
    fn from(pt: ContactPoint) -> Self {
        PoissonPoint {
            s: pt.s,
            t: pt.t,
            v: pt.v,
            p: pt.p,
        }
    }
}

/// A scalar function on the Poisson submanifold. Must be pure.
pub trait Observable: Fn(&PoissonPoint) -> f64 + Sync {}
impl<F: Fn(&PoissonPoint) -> f64 + Sync> Observable for F {}

/// `dU + T dS - p dV` evaluated on `tv`.
pub fn contact_form_energy(point: &ContactPoint, tv: &TangentVector) -> f64 {
    tv.du + point.t * tv.ds - point.p * tv.dv
}

/// `dU + p_x dx + p_y dy`.
pub fn contact_form_transformed(tp: &TransformedPoint, dx: f64, dy: f64, du: f64) -> f64 {
    du + tp.p_x * dx + tp.p_y * dy
}

fn check_step(h: f64) -> Result<()> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::InvalidParameter {
            field: "h",
            value: h,
            reason: "finite-difference step must be > 0",
        });
    }
    Ok(())
}

fn eval<F: Fn(&PoissonPoint) -> f64 + ?Sized>(f: &F, pt: PoissonPoint) -> Result<f64> {
    let value = f(&pt);
    if !value.is_finite() {
        return Err(Error::NonFinite { what: "observable" });
    }
    Ok(value)
}

/// Central-difference partials `(d/dS, d/dT, d/dV, d/dp)`.
fn partials<F: Fn(&PoissonPoint) -> f64 + ?Sized>(f: &F, at: PoissonPoint, h: f64) -> Result<[f64; 4]> {
    let mut out = [0.0; 4];
    for (i, slot) in out.iter_mut().enumerate() {
        let (mut up, mut down) = (at, at);
        let (u, d) = match i {
            0 => (&mut up.s, &mut down.s),
            1 => (&mut up.t, &mut down.t),
            2 => (&mut up.v, &mut down.v),
            _ => (&mut up.p, &mut down.p),
        };
        *u += h;
        *d -= h;
        *slot = (eval(f, up)? - eval(f, down)?) / (2.0 * h);
    }
    Ok(out)
}

/// Canonical bracket with `{S, T} = 1` and `{V, -p} = 1`:
///
/// `{f, g} = f_S g_T - f_T g_S + f_V g_(-p) - f_(-p) g_V`,
/// with `d/d(-p) = -d/dp`; all partials by central differences of step `h`.
pub fn poisson_bracket<F, G>(f: &F, g: &G, at: &PoissonPoint, h: f64) -> Result<f64>
where
    F: Fn(&PoissonPoint) -> f64 + ?Sized,
    G: Fn(&PoissonPoint) -> f64 + ?Sized,
{
    check_step(h)?;
    let [fs, ft, fv, fp] = partials(f, *at, h)?;
    let [gs, gt, gv, gp] = partials(g, *at, h)?;
    Ok(fs * gt - ft * gs - fv * gp + fp * gv)
}

/// `{f,{g,k}} + {g,{k,f}} + {k,{f,g}}` with nested finite differences.
pub fn jacobi_defect<F, G, K>(f: &F, g: &G, k: &K, at: &PoissonPoint, h: f64) -> Result<f64>
where
    F: Fn(&PoissonPoint) -> f64,
    G: Fn(&PoissonPoint) -> f64,
    K: Fn(&PoissonPoint) -> f64,
{
    check_step(h)?;
    // inner brackets become observables; failures surface as NaN and are
    // rejected by the outer evaluation
    let gk = |pt: &PoissonPoint| poisson_bracket(g, k, pt, h).unwrap_or(f64::NAN);
    let kf = |pt: &PoissonPoint| poisson_bracket(k, f, pt, h).unwrap_or(f64::NAN);
    let fg = |pt: &PoissonPoint| poisson_bracket(f, g, pt, h).unwrap_or(f64::NAN);
    Ok(poisson_bracket(f, &gk, at, h)?
        + poisson_bracket(g, &kf, at, h)?
        + poisson_bracket(k, &fg, at, h)?)
}

/// Central-difference Jacobian of `(S, V) -> (x, y)`:
/// `[[dx/dS, dx/dV], [dy/dS, dy/dV]]`.
pub fn chain_jacobian(params: &GasParameters, state: ExtensiveState) -> Result<[[f64; 2]; 2]> {
    let map = |s: f64, v: f64| -> Result<(f64, f64)> {
        let tp = transforms::full_chain(params, ExtensiveState::new(s, v))?;
        Ok((tp.x, tp.y))
    };
    let hs = default_step(state.s);
    let hv = default_step(state.v);
    let (xs_p, ys_p) = map(state.s + hs, state.v)?;
    let (xs_m, ys_m) = map(state.s - hs, state.v)?;
    let (xv_p, yv_p) = map(state.s, state.v + hv)?;
    let (xv_m, yv_m) = map(state.s, state.v - hv)?;
    Ok([
        [(xs_p - xs_m) / (2.0 * hs), (xv_p - xv_m) / (2.0 * hv)],
        [(ys_p - ys_m) / (2.0 * hs), (yv_p - yv_m) / (2.0 * hv)],
    ])
}

/// `|(T dS - p dV) - (p_x dx + p_y dy)|` where `(dx, dy)` is the push-forward
/// of `(dS, dV)` through a finite-difference Jacobian of the chart chain.
pub fn pullback_defect(params: &GasParameters, state: ExtensiveState, ds: f64, dv: f64) -> Result<f64> {
    let tp = transforms::full_chain(params, state)?;
    let pt = thermo::contact_lift(params, state)?;
    let du = contact_form_energy(
        &pt,
        &TangentVector {
            ds,
            dv,
            ..TangentVector::default()
        },
    );
    let jac = chain_jacobian(params, state)?;
    let dx = jac[0][0] * ds + jac[0][1] * dv;
    let dy = jac[1][0] * ds + jac[1][1] * dv;
    Ok((du - contact_form_transformed(&tp, dx, dy, 0.0)).abs())
}

/// `|dU/dy'|` of the energy pulled back to the ideal chart `(x', y')`,
/// evaluated at the image of `state`. Valid for any parameters; for
/// `a = b = 0` it vanishes.
pub fn ideal_chart_y_sensitivity(params: &GasParameters, state: ExtensiveState) -> Result<f64> {
    let (xp, yp) = transforms::ideal_chain(params, state)?;
    let h = default_step(yp);
    let u = |y: f64| thermo::energy(params, transforms::ideal_chain_inverse(params, xp, y));
    Ok(((u(yp + h)? - u(yp - h)?) / (2.0 * h)).abs())
}

/// Certifies that `p_y` vanishes in the ideal limit: rejects non-ideal
/// parameters, then returns [`ideal_chart_y_sensitivity`].
pub fn ideal_submanifold_check(params: &GasParameters, state: ExtensiveState) -> Result<f64> {
    params.validate()?;
    if !params.is_ideal() {
        return Err(Error::InvalidParameter {
            field: if params.a != 0.0 { "a" } else { "b" },
            value: if params.a != 0.0 { params.a } else { params.b },
            reason: "ideal submanifold check requires a = 0 and b = 0",
        });
    }
    ideal_chart_y_sensitivity(params, state)
}
