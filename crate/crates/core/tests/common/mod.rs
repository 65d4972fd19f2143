//! Independent oracles and samplers shared by the integration tests.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vdw_contact::{ExtensiveState, GasParameters};

pub const P1: GasParameters = GasParameters {
    a: 2.0,
    b: 1.0,
    n: 1.0,
    kb: 1.0,
    u0: 1.0,
    v0: 1.0,
};

/// Five parameter sets with `a > 0`, P1 first.
pub fn parameter_sets() -> Vec<GasParameters> {
    vec![
        P1,
        GasParameters { a: 0.5, b: 0.1, n: 1.0, kb: 1.0, u0: 1.0, v0: 1.0 },
        GasParameters { a: 5.0, b: 0.9, n: 2.0, kb: 0.5, u0: 1.5, v0: 2.0 },
        GasParameters { a: 0.05, b: 0.0, n: 1.0, kb: 1.0, u0: 0.7, v0: 0.5 },
        GasParameters { a: 3.0, b: 0.4, n: 0.5, kb: 3.0, u0: 2.0, v0: 1.0 },
    ]
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random constants with `a` in [0, 5], `b` in [0, 1], the rest in [0.5, 2].
pub fn random_params(rng: &mut ChaCha8Rng) -> GasParameters {
    GasParameters {
        a: rng.gen_range(0.0..=5.0),
        b: rng.gen_range(0.0..=1.0),
        n: rng.gen_range(0.5..=2.0),
        kb: rng.gen_range(0.5..=2.0),
        u0: rng.gen_range(0.5..=2.0),
        v0: rng.gen_range(0.5..=2.0),
    }
}

/// `S` in [-3, 3], `V - b` in [min_gap, 10].
pub fn random_state(rng: &mut ChaCha8Rng, params: &GasParameters, min_gap: f64) -> ExtensiveState {
    let s = rng.gen_range(-3.0..=3.0);
    // V in (b, b + 10]
    let gap = 10.0 - rng.gen_range(0.0..(10.0 - min_gap));
    ExtensiveState::new(s, params.b + gap)
}

/// `(U, T, p)` written out directly from the fundamental equation and its
/// hand-differentiated partials.
pub fn oracle_utp(g: &GasParameters, s: f64, v: f64) -> (f64, f64, f64) {
    let nk = g.n * g.kb;
    let e = (2.0 * s / (3.0 * nk)).exp();
    let w = (g.v0 / (v - g.b)).powf(2.0 / 3.0);
    let u = g.u0 * w * e - g.a / v;
    let t = 2.0 * g.u0 * w * e / (3.0 * nk);
    let p = 2.0 * g.u0 * w * e / (3.0 * (v - g.b)) - g.a / (v * v);
    (u, t, p)
}

pub fn rel(x: f64, y: f64, scale: f64) -> f64 {
    (x - y).abs() / scale.abs().max(f64::MIN_POSITIVE)
}
