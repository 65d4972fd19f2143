//! Periodic Toda chain: forces, velocity-Verlet integration, thermal
//! initial conditions, and ensemble time averages.
//!
//! Bond extensions are `r_n = q_{n+1} - q_n` (indices mod `n_sites`), and
//! each bond carries
//!
//! ```text
//! phi(r) = (a_T / b_T) (exp(-b_T r) - 1) + a_T r
//! ```
//!
//! which has its minimum `phi(0) = 0` at zero extension. The exponential is
//! the same form as `W(z) = U0 exp(2z/3)` with `b_T = -2/3`.
//!
//! The measured quantity is the time average of `p_n^2 / m`, which for a
//! thermal ensemble at small amplitude equals `kB T` per momentum degree of
//! freedom. With the centre-of-mass momentum pinned to zero there are
//! `n_sites - 1` such degrees of freedom, and [`EnsembleReport`] reports the
//! pooled value per degree of freedom alongside the raw per-site averages.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::stats::{self, LinearFit};
use crate::thermo::EXPONENT_LIMIT;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    #[default]
    Periodic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TodaParams {
    pub n_sites: usize,
    pub mass: f64,
    /// Force scale `a_T`.
    pub a_t: f64,
    /// Inverse length `b_T`.
    pub b_t: f64,
    pub dt: f64,
    pub boundary: Boundary,
}

impl Default for TodaParams {
    fn default() -> Self {
        TodaParams {
            n_sites: 32,
            mass: 1.0,
            a_t: 1.0,
            b_t: 1.0,
            dt: 0.01,
            boundary: Boundary::Periodic,
        }
    }
}

impl TodaParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_sites < 2 {
            return Err(Error::InvalidParameter {
                field: "n_sites",
                value: self.n_sites as f64,
                reason: "a chain needs at least two sites",
            });
        }
        for (field, value) in [
            ("mass", self.mass),
            ("a_t", self.a_t),
            ("b_t", self.b_t),
            ("dt", self.dt),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidParameter {
                    field,
                    value,
                    reason: "must be finite and > 0",
                });
            }
        }
        Ok(())
    }

    /// Energy scale `a_T / b_T`; "small amplitude" means `kB T` well below it.
    pub fn energy_scale(&self) -> f64 {
        self.a_t / self.b_t
    }

    /// Momentum degrees of freedom left once total momentum is fixed.
    pub fn degrees_of_freedom(&self) -> usize {
        self.n_sites - 1
    }
}

/// Positions, momenta and elapsed time of one chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TodaState {
    pub q: Vec<f64>,
    pub p: Vec<f64>,
    pub t: f64,
}

impl TodaState {
    /// Chain at rest with every bond at zero extension.
    pub fn equilibrium(params: &TodaParams) -> Self {
        TodaState {
            q: vec![0.0; params.n_sites],
            p: vec![0.0; params.n_sites],
            t: 0.0,
        }
    }

    pub fn validate(&self, params: &TodaParams) -> Result<()> {
        params.validate()?;
        if self.q.len() != params.n_sites || self.p.len() != params.n_sites {
            return Err(Error::InvalidParameter {
                field: "state",
                value: self.q.len().max(self.p.len()) as f64,
                reason: "q and p must both have n_sites entries",
            });
        }
        if self.q.iter().chain(&self.p).any(|x| !x.is_finite()) {
            return Err(Error::NonFinite { what: "state" });
        }
        Ok(())
    }

    pub fn total_momentum(&self) -> f64 {
        self.p.iter().sum()
    }
}

fn bond_exponent(b_t: f64, r: f64) -> Result<f64> {
    let x = -b_t * r;
    if !(x.abs() <= EXPONENT_LIMIT) {
        return Err(Error::Range {
            exponent: x,
            limit: EXPONENT_LIMIT,
        });
    }
    Ok(x)
}

/// Pair potential of one bond.
pub fn pair_potential(params: &TodaParams, r: f64) -> Result<f64> {
    let x = bond_exponent(params.b_t, r)?;
    Ok(params.energy_scale() * (x.exp_m1() - x))
}

/// Forces into `out`; returns the potential energy of the configuration.
fn forces_into(params: &TodaParams, q: &[f64], out: &mut [f64]) -> Result<f64> {
    let n = q.len();
    let (a, scale) = (params.a_t, params.energy_scale());
    // bond n-1 closes the ring
    let x_last = bond_exponent(params.b_t, q[0] - q[n - 1])?;
    let e_last = x_last.exp_m1();
    let mut potential = scale * (e_last - x_last);
    let mut prev = e_last;
    for i in 0..n - 1 {
        let x = bond_exponent(params.b_t, q[i + 1] - q[i])?;
        let e = x.exp_m1();
        potential += scale * (e - x);
        out[i] = a * (prev - e);
        prev = e;
    }
    out[n - 1] = a * (prev - e_last);
    Ok(potential)
}

/// `F_n = a_T [exp(-b_T r_{n-1}) - exp(-b_T r_n)]`.
pub fn toda_force(params: &TodaParams, q: &[f64]) -> Result<Vec<f64>> {
    params.validate()?;
    if q.len() != params.n_sites {
        return Err(Error::InvalidParameter {
            field: "q",
            value: q.len() as f64,
            reason: "must have n_sites entries",
        });
    }
    let mut out = vec![0.0; q.len()];
    forces_into(params, q, &mut out)?;
    Ok(out)
}

pub fn potential_energy(params: &TodaParams, q: &[f64]) -> Result<f64> {
    let n = q.len();
    (0..n).try_fold(0.0, |acc, i| Ok(acc + pair_potential(params, q[(i + 1) % n] - q[i])?))
}

pub fn kinetic_energy(params: &TodaParams, p: &[f64]) -> f64 {
    p.iter().map(|p| p * p).sum::<f64>() / (2.0 * params.mass)
}

pub fn total_energy(params: &TodaParams, state: &TodaState) -> Result<f64> {
    Ok(potential_energy(params, &state.q)? + kinetic_energy(params, &state.p))
}

/// Velocity-Verlet integrator that caches the forces between steps.
#[derive(Debug, Clone)]
pub struct Verlet {
    params: TodaParams,
    state: TodaState,
    forces: Vec<f64>,
    potential: f64,
}

impl Verlet {
    pub fn new(params: TodaParams, state: TodaState) -> Result<Self> {
        state.validate(&params)?;
        let mut forces = vec![0.0; params.n_sites];
        let potential = forces_into(&params, &state.q, &mut forces)?;
        Ok(Verlet {
            params,
            state,
            forces,
            potential,
        })
    }

    pub fn step(&mut self) -> Result<()> {
        let half = 0.5 * self.params.dt;
        let drift = self.params.dt / self.params.mass;
        let TodaState { q, p, t } = &mut self.state;
        for ((q, p), f) in q.iter_mut().zip(p.iter_mut()).zip(&self.forces) {
            *p += half * f;
            *q += drift * *p;
        }
        self.potential = forces_into(&self.params, q, &mut self.forces)?;
        for (p, f) in p.iter_mut().zip(&self.forces) {
            *p += half * f;
        }
        *t += self.params.dt;
        Ok(())
    }

    pub fn state(&self) -> &TodaState {
        &self.state
    }

    pub fn into_state(self) -> TodaState {
        self.state
    }

    pub fn potential_energy(&self) -> f64 {
        self.potential
    }

    pub fn energy(&self) -> f64 {
        self.potential + kinetic_energy(&self.params, &self.state.p)
    }
}

/// One velocity-Verlet step of size `params.dt`.
pub fn step_verlet(state: &TodaState, params: &TodaParams) -> Result<TodaState> {
    let mut v = Verlet::new(*params, state.clone())?;
    v.step()?;
    Ok(v.into_state())
}

/// How thermal initial conditions are prepared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThermalInit {
    /// Maxwell momenta, every bond at zero extension. The potential energy
    /// starts empty, so the chain equilibrates to roughly half the target
    /// temperature.
    Lattice,
    /// Maxwell momenta and Boltzmann-distributed bonds.
    Canonical,
    /// As `Canonical`, then momenta rescaled to kinetic temperature `T` and
    /// bonds rescaled to the canonical mean potential energy. Removes the
    /// trajectory-to-trajectory spread of the conserved energy.
    #[default]
    PinnedEnergy,
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn check_temperature(temperature: f64, kb: f64) -> Result<()> {
    if !(temperature.is_finite() && temperature > 0.0) {
        return Err(Error::InvalidParameter {
            field: "temperature",
            value: temperature,
            reason: "must be finite and > 0",
        });
    }
    if !(kb.is_finite() && kb > 0.0) {
        return Err(Error::InvalidParameter {
            field: "kb",
            value: kb,
            reason: "must be finite and > 0",
        });
    }
    Ok(())
}

fn remove_mean(xs: &mut [f64]) {
    let m = stats::mean(xs);
    xs.iter_mut().for_each(|x| *x -= m);
}

fn maxwell_momenta(params: &TodaParams, kbt: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let normal = Normal::new(0.0, (params.mass * kbt).sqrt()).expect("positive variance");
    let mut p: Vec<f64> = (0..params.n_sites).map(|_| normal.sample(rng)).collect();
    remove_mean(&mut p);
    p
}

/// Bond extensions drawn from `exp(-phi(r) / kB T)`.
///
/// With `u = exp(-b_T r)` the Boltzmann weight becomes a Gamma density with
/// shape and rate `a_T / (b_T kB T)`, so the draw is exact. The mean is then
/// removed so that the ring closes.
fn boltzmann_bonds(params: &TodaParams, kbt: f64, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
    let k = params.a_t / (params.b_t * kbt);
    let gamma = Gamma::new(k, 1.0 / k).map_err(|_| Error::InvalidParameter {
        field: "temperature",
        value: kbt,
        reason: "bond distribution is undefined at this temperature",
    })?;
    let mut r: Vec<f64> = (0..params.n_sites)
        .map(|_| -gamma.sample(rng).ln() / params.b_t)
        .collect();
    if r.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite { what: "bond extension" });
    }
    remove_mean(&mut r);
    Ok(r)
}

fn positions_from_bonds(bonds: &[f64]) -> Vec<f64> {
    let mut q = Vec::with_capacity(bonds.len());
    let mut acc = 0.0;
    for r in &bonds[..bonds.len() - 1] {
        q.push(acc);
        acc += r;
    }
    q.push(acc);
    remove_mean(&mut q);
    q
}

#[cfg(test)]
fn bonds_of(q: &[f64]) -> Vec<f64> {
    let n = q.len();
    (0..n).map(|i| q[(i + 1) % n] - q[i]).collect()
}

/// Canonical mean of `phi` for one free bond:
/// `(a_T/b_T) (ln k - psi(k))` with `k = a_T / (b_T kB T)`.
pub fn mean_bond_energy(params: &TodaParams, kbt: f64) -> f64 {
    let k = params.a_t / (params.b_t * kbt);
    let gap = if k >= 10.0 {
        // ln k - psi(k) asymptotic series; avoids cancellation for large k
        let w = 1.0 / (k * k);
        let tail = w * (1.0 / 12.0
            - w * (1.0 / 120.0
                - w * (1.0 / 252.0
                    - w * (1.0 / 240.0 - w * (1.0 / 132.0 - w * (691.0 / 32760.0 - w / 12.0))))));
        0.5 / k + tail
    } else {
        k.ln() - statrs::function::gamma::digamma(k)
    };
    params.energy_scale() * gap
}

/// Scales all bonds by one factor so that their total energy hits `target`.
fn rescale_bonds(params: &TodaParams, bonds: &mut [f64], target: f64) -> Result<()> {
    let energy = |lambda: f64| -> Result<f64> {
        bonds
            .iter()
            .try_fold(0.0, |acc, r| Ok(acc + pair_potential(params, lambda * r)?))
    };
    if bonds.iter().all(|r| *r == 0.0) {
        return Err(Error::NonFinite { what: "bond rescaling (all bonds at rest)" });
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while energy(hi)? < target {
        lo = hi;
        hi *= 2.0;
    }
    // energy is increasing in lambda > 0 because phi is convex with phi(0) = 0
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if energy(mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let lambda = 0.5 * (lo + hi);
    bonds.iter_mut().for_each(|r| *r *= lambda);
    Ok(())
}

/// Thermal state on `stream` of the generator seeded with `seed`.
pub fn sample_initial(
    params: &TodaParams,
    temperature: f64,
    kb: f64,
    seed: u64,
    stream: u64,
    init: ThermalInit,
) -> Result<TodaState> {
    params.validate()?;
    check_temperature(temperature, kb)?;
    let kbt = kb * temperature;
    let mut rng = rng_for(seed, stream);
    let mut p = maxwell_momenta(params, kbt, &mut rng);
    let q = match init {
        ThermalInit::Lattice => vec![0.0; params.n_sites],
        ThermalInit::Canonical => positions_from_bonds(&boltzmann_bonds(params, kbt, &mut rng)?),
        ThermalInit::PinnedEnergy => {
            let mut bonds = boltzmann_bonds(params, kbt, &mut rng)?;
            let dof = params.degrees_of_freedom() as f64;
            rescale_bonds(params, &mut bonds, dof * mean_bond_energy(params, kbt))?;
            let p2: f64 = p.iter().map(|x| x * x).sum();
            let factor = (dof * params.mass * kbt / p2).sqrt();
            p.iter_mut().for_each(|x| *x *= factor);
            positions_from_bonds(&bonds)
        }
    };
    Ok(TodaState { q, p, t: 0.0 })
}

/// Canonical thermal sample: Maxwell momenta with the total momentum
/// removed, Boltzmann-distributed bond extensions. Bit-identical for a
/// fixed seed.
pub fn sample_thermal(params: &TodaParams, temperature: f64, kb: f64, seed: u64) -> Result<TodaState> {
    sample_initial(params, temperature, kb, seed, 0, ThermalInit::Canonical)
}

/// Time averages from one microcanonical trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryAverages {
    /// Per-site time average of `p_n^2`.
    pub p2: Vec<f64>,
    /// Per-site time average of `p_n / m`.
    pub velocity: Vec<f64>,
    pub mean_energy: f64,
    pub initial_energy: f64,
    pub final_energy: f64,
    /// `|E(end) - E(0)| / |E(0)|` (absolute when `E(0) = 0`).
    pub relative_energy_drift: f64,
    /// Largest `|E(t) - E(0)| / |E(0)|` seen along the run.
    pub max_relative_energy_error: f64,
    pub final_total_momentum: f64,
    pub samples: usize,
}

fn relative_to(delta: f64, reference: f64) -> f64 {
    if reference == 0.0 {
        delta.abs()
    } else {
        (delta / reference).abs()
    }
}

/// Integrates `n_steps` steps and averages over the steps after `burn_in`.
pub fn measure_time_averages(
    state: &TodaState,
    params: &TodaParams,
    n_steps: usize,
    burn_in: usize,
) -> Result<TrajectoryAverages> {
    if n_steps <= burn_in {
        return Err(Error::InvalidParameter {
            field: "n_steps",
            value: n_steps as f64,
            reason: "must exceed burn_in",
        });
    }
    let mut verlet = Verlet::new(*params, state.clone())?;
    let n = params.n_sites;
    let initial_energy = verlet.energy();
    let mut p2 = vec![0.0; n];
    let mut velocity = vec![0.0; n];
    let mut energy_sum = 0.0;
    let mut max_err: f64 = 0.0;
    let mut energy = initial_energy;
    for step in 1..=n_steps {
        verlet.step()?;
        energy = verlet.energy();
        max_err = max_err.max(relative_to(energy - initial_energy, initial_energy));
        if step > burn_in {
            for ((acc2, acc1), p) in p2.iter_mut().zip(velocity.iter_mut()).zip(&verlet.state().p) {
                *acc2 += p * p;
                *acc1 += p;
            }
            energy_sum += energy;
        }
    }
    if !energy.is_finite() {
        return Err(Error::NonFinite { what: "trajectory energy" });
    }
    let samples = n_steps - burn_in;
    let inv = 1.0 / samples as f64;
    p2.iter_mut().for_each(|x| *x *= inv);
    velocity.iter_mut().for_each(|x| *x *= inv / params.mass);
    Ok(TrajectoryAverages {
        p2,
        velocity,
        mean_energy: energy_sum * inv,
        initial_energy,
        final_energy: energy,
        relative_energy_drift: relative_to(energy - initial_energy, initial_energy),
        max_relative_energy_error: max_err,
        final_total_momentum: verlet.state().total_momentum(),
        samples,
    })
}

/// One temperature, several independent trajectories.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnsembleConfig {
    pub toda: TodaParams,
    pub temperature: f64,
    pub kb: f64,
    pub n_steps: usize,
    /// Defaults to 10% of `n_steps`.
    pub burn_in: Option<usize>,
    pub ensemble_size: usize,
    pub seed: u64,
    /// Trajectory `j` draws from stream `stream_base + j`.
    pub stream_base: u64,
    pub init: ThermalInit,
}

pub const DEFAULT_SEED: u64 = 20_181_114;

impl Default for EnsembleConfig {
    fn default() -> Self {
        EnsembleConfig {
            toda: TodaParams::default(),
            temperature: 0.01,
            kb: 1.0,
            n_steps: 1_000_000,
            burn_in: None,
            ensemble_size: 16,
            seed: DEFAULT_SEED,
            stream_base: 0,
            init: ThermalInit::default(),
        }
    }
}

impl EnsembleConfig {
    pub fn burn_in(&self) -> usize {
        self.burn_in.unwrap_or(self.n_steps / 10)
    }

    pub fn validate(&self) -> Result<()> {
        self.toda.validate()?;
        check_temperature(self.temperature, self.kb)?;
        if self.ensemble_size == 0 {
            return Err(Error::InvalidParameter {
                field: "ensemble_size",
                value: 0.0,
                reason: "must be positive",
            });
        }
        if self.n_steps <= self.burn_in() {
            return Err(Error::InvalidParameter {
                field: "n_steps",
                value: self.n_steps as f64,
                reason: "must exceed burn_in",
            });
        }
        Ok(())
    }

    fn trajectory(&self, j: usize) -> Result<TrajectoryAverages> {
        let state = sample_initial(
            &self.toda,
            self.temperature,
            self.kb,
            self.seed,
            self.stream_base + j as u64,
            self.init,
        )?;
        measure_time_averages(&state, &self.toda, self.n_steps, self.burn_in())
    }
}

/// Pooled statistics over an ensemble of trajectories.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleReport {
    pub temperature: f64,
    pub kb: f64,
    pub seed: u64,
    pub n_sites: usize,
    pub ensemble_size: usize,
    /// Ensemble mean of the time-averaged `p_n^2`, per site.
    pub per_site_p2: Vec<f64>,
    /// Mean of `per_site_p2 / m` over sites.
    pub pooled_p2_over_mass: f64,
    /// `sum_n <p_n^2> / ((n_sites - 1) m)`: `<p^2>/m` per momentum degree of
    /// freedom. Equals `kB T` under equipartition.
    pub p2_per_dof_over_mass: f64,
    /// Standard error of `p2_per_dof_over_mass` across trajectories.
    pub p2_per_dof_sem: f64,
    /// Ensemble mean of the time-averaged velocity, per site.
    pub velocity_mean: Vec<f64>,
    /// Standard error of `velocity_mean` across trajectories, per site.
    pub velocity_sem: Vec<f64>,
    pub mean_energy: f64,
    /// Per-trajectory relative energy drift.
    pub relative_energy_drift: Vec<f64>,
    pub max_relative_energy_drift: f64,
}

impl EnsembleReport {
    /// Largest `|velocity_mean| / velocity_sem` over sites.
    pub fn max_velocity_z(&self) -> f64 {
        self.velocity_mean
            .iter()
            .zip(&self.velocity_sem)
            .map(|(m, s)| {
                if *s > 0.0 {
                    (m / s).abs()
                } else if *m == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            })
            .fold(0.0, f64::max)
    }

    fn pool(cfg: &EnsembleConfig, runs: &[TrajectoryAverages]) -> EnsembleReport {
        let n = cfg.toda.n_sites;
        let m = cfg.toda.mass;
        let dof = cfg.toda.degrees_of_freedom() as f64;
        // fixed reduction order: trajectories in index order
        let column = |f: &dyn Fn(&TrajectoryAverages) -> f64| -> Vec<f64> { runs.iter().map(f).collect() };
        let per_site_p2: Vec<f64> = (0..n).map(|i| stats::mean(&column(&|r| r.p2[i]))).collect();
        let per_traj_dof: Vec<f64> = column(&|r| r.p2.iter().sum::<f64>() / (dof * m));
        let velocity_mean = (0..n).map(|i| stats::mean(&column(&|r| r.velocity[i]))).collect();
        let velocity_sem = (0..n).map(|i| stats::standard_error(&column(&|r| r.velocity[i]))).collect();
        let drift = column(&|r| r.relative_energy_drift);
        EnsembleReport {
            temperature: cfg.temperature,
            kb: cfg.kb,
            seed: cfg.seed,
            n_sites: n,
            ensemble_size: runs.len(),
            pooled_p2_over_mass: stats::mean(&per_site_p2) / m,
            p2_per_dof_over_mass: per_site_p2.iter().sum::<f64>() / (dof * m),
            p2_per_dof_sem: stats::standard_error(&per_traj_dof),
            per_site_p2,
            velocity_mean,
            velocity_sem,
            mean_energy: stats::mean(&column(&|r| r.mean_energy)),
            max_relative_energy_drift: drift.iter().copied().fold(0.0, f64::max),
            relative_energy_drift: drift,
        }
    }
}

pub fn run_ensemble(cfg: &EnsembleConfig, exec: Execution) -> Result<EnsembleReport> {
    cfg.validate()?;
    let runs = exec.try_map_indices(cfg.ensemble_size, |j| cfg.trajectory(j))?;
    Ok(EnsembleReport::pool(cfg, &runs))
}

/// Largest `kB T / (a_T / b_T)` accepted as small amplitude by a sweep.
pub const SMALL_AMPLITUDE_LIMIT: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub toda: TodaParams,
    pub temperatures: Vec<f64>,
    pub kb: f64,
    pub n_steps: usize,
    pub burn_in: Option<usize>,
    pub ensemble_size: usize,
    pub seed: u64,
    pub init: ThermalInit,
}

impl Default for SweepConfig {
    fn default() -> Self {
        let base = EnsembleConfig::default();
        SweepConfig {
            toda: base.toda,
            temperatures: vec![0.005, 0.01, 0.02],
            kb: base.kb,
            n_steps: base.n_steps,
            burn_in: None,
            ensemble_size: base.ensemble_size,
            seed: base.seed,
            init: base.init,
        }
    }
}

impl SweepConfig {
    fn ensemble(&self, index: usize) -> EnsembleConfig {
        EnsembleConfig {
            toda: self.toda,
            temperature: self.temperatures[index],
            kb: self.kb,
            n_steps: self.n_steps,
            burn_in: self.burn_in,
            ensemble_size: self.ensemble_size,
            seed: self.seed,
            stream_base: (index as u64) << 32,
            init: self.init,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.temperatures.len() < 3 {
            return Err(Error::InvalidParameter {
                field: "temperatures",
                value: self.temperatures.len() as f64,
                reason: "a sweep needs at least three temperatures",
            });
        }
        for i in 0..self.temperatures.len() {
            let cfg = self.ensemble(i);
            cfg.validate()?;
            let ratio = self.kb * cfg.temperature / self.toda.energy_scale();
            if ratio > SMALL_AMPLITUDE_LIMIT {
                return Err(Error::InvalidParameter {
                    field: "temperatures",
                    value: cfg.temperature,
                    reason: "kB T must stay below 0.1 a_T/b_T (small-amplitude regime)",
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub reports: Vec<EnsembleReport>,
    /// Fit of `p2_per_dof_over_mass` against `kB T`.
    pub fit: LinearFit,
}

/// Runs one ensemble per temperature and fits `<p^2>/m` against `kB T`.
/// All `(temperature, trajectory)` pairs are scheduled as one batch.
pub fn temperature_sweep(cfg: &SweepConfig, exec: Execution) -> Result<SweepReport> {
    cfg.validate()?;
    let kbts: Vec<f64> = cfg.temperatures.iter().map(|t| cfg.kb * t).collect();
    if kbts.iter().all(|x| *x == kbts[0]) {
        return Err(Error::DegenerateFit("all sweep temperatures are equal"));
    }
    let per = cfg.ensemble_size;
    let ensembles: Vec<EnsembleConfig> = (0..kbts.len()).map(|i| cfg.ensemble(i)).collect();
    let runs = exec.try_map_indices(kbts.len() * per, |job| ensembles[job / per].trajectory(job % per))?;
    let reports: Vec<EnsembleReport> = ensembles
        .iter()
        .zip(runs.chunks(per))
        .map(|(e, chunk)| EnsembleReport::pool(e, chunk))
        .collect();
    let ys: Vec<f64> = reports.iter().map(|r| r.p2_per_dof_over_mass).collect();
    let fit = stats::fit_line(&kbts, &ys)?;
    Ok(SweepReport { reports, fit })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(n: usize) -> TodaParams {
        TodaParams {
            n_sites: n,
            ..TodaParams::default()
        }
    }

    #[test]
    fn equilibrium_has_no_force() {
        let p = small(8);
        assert!(toda_force(&p, &[0.0; 8]).unwrap().iter().all(|f| *f == 0.0));
        // uniform translation is also force-free
        assert!(toda_force(&p, &[3.5; 8]).unwrap().iter().all(|f| *f == 0.0));
    }

    #[test]
    fn two_site_forces_are_antisymmetric() {
        let p = small(2);
        let delta = 1e-3;
        let f = toda_force(&p, &[0.0, delta]).unwrap();
        assert_eq!(f[0], -f[1]);
        assert!((f[0] + f[1]).abs() == 0.0);
        // bonds r0 = delta, r1 = -delta: F0 = a (e^{b delta} - e^{-b delta})
        let expected = (delta).exp() - (-delta).exp();
        assert!((f[0] - expected).abs() < 1e-15);
        // linearised: spring constant a_T b_T on each of the two bonds
        assert!((f[0] - 2.0 * delta).abs() < 1e-8);
    }

    #[test]
    fn force_is_negative_gradient_of_potential() {
        let p = TodaParams {
            n_sites: 6,
            a_t: 1.3,
            b_t: 0.7,
            ..TodaParams::default()
        };
        let q = [0.1, -0.3, 0.25, 0.9, -0.5, 0.05];
        let f = toda_force(&p, &q).unwrap();
        let h = 1e-5;
        for i in 0..6 {
            let (mut up, mut down) = (q, q);
            up[i] += h;
            down[i] -= h;
            let grad = (potential_energy(&p, &up).unwrap() - potential_energy(&p, &down).unwrap()) / (2.0 * h);
            assert!((f[i] + grad).abs() < 1e-7, "site {i}");
        }
    }

    #[test]
    fn overflowing_bond_is_a_range_error() {
        let p = small(2);
        assert!(matches!(toda_force(&p, &[0.0, -800.0]), Err(Error::Range { .. })));
    }

    #[test]
    fn rest_state_is_a_fixed_point() {
        let p = small(8);
        let s0 = TodaState::equilibrium(&p);
        let s1 = step_verlet(&s0, &p).unwrap();
        assert_eq!(s1.q, s0.q);
        assert_eq!(s1.p, s0.p);
        assert!((s1.t - p.dt).abs() < 1e-18);
    }

    #[test]
    fn verlet_is_time_reversible() {
        let p = small(8);
        let s0 = sample_thermal(&p, 0.05, 1.0, 3).unwrap();
        let mut s1 = step_verlet(&s0, &p).unwrap();
        s1.p.iter_mut().for_each(|x| *x = -*x);
        let mut s2 = step_verlet(&s1, &p).unwrap();
        s2.p.iter_mut().for_each(|x| *x = -*x);
        for i in 0..8 {
            assert!((s2.q[i] - s0.q[i]).abs() < 1e-12);
            assert!((s2.p[i] - s0.p[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn sampler_is_deterministic_and_momentum_free() {
        let p = small(16);
        let a = sample_thermal(&p, 0.02, 1.0, 99).unwrap();
        let b = sample_thermal(&p, 0.02, 1.0, 99).unwrap();
        assert_eq!(a, b);
        assert!(a.total_momentum().abs() < 1e-15);
        let c = sample_thermal(&p, 0.02, 1.0, 100).unwrap();
        assert_ne!(a, c);
        // ring closes: bonds sum to zero
        assert!(bonds_of(&a.q).iter().sum::<f64>().abs() < 1e-14);
    }

    #[test]
    fn sampler_cold_limit() {
        let p = small(16);
        let s = sample_thermal(&p, 1e-14, 1.0, 5).unwrap();
        assert!(s.p.iter().all(|x| x.abs() < 1e-6));
        assert!(s.q.iter().all(|x| x.abs() < 1e-5));
        assert!(sample_thermal(&p, 0.0, 1.0, 5).is_err());
    }

    #[test]
    fn pinned_energy_hits_targets() {
        let p = small(32);
        let kbt = 0.01;
        let s = sample_initial(&p, kbt, 1.0, 7, 3, ThermalInit::PinnedEnergy).unwrap();
        let ke = kinetic_energy(&p, &s.p);
        assert!((2.0 * ke - 31.0 * kbt).abs() < 1e-14);
        let pe = potential_energy(&p, &s.q).unwrap();
        let target = 31.0 * mean_bond_energy(&p, kbt);
        assert!((pe - target).abs() < 1e-12 * target, "{pe} vs {target}");
        assert!(s.total_momentum().abs() < 1e-15);
    }

    #[test]
    fn mean_bond_energy_branches_agree() {
        // the series and the digamma route meet at k = 10
        let p = TodaParams::default();
        let kbt = 0.1; // k = 10
        let series = mean_bond_energy(&p, kbt);
        let direct = 10f64.ln() - statrs::function::gamma::digamma(10.0);
        assert!((series - direct).abs() < 1e-12, "{series} vs {direct}");
        // harmonic limit: kT/2
        assert!((mean_bond_energy(&p, 1e-6) - 0.5e-6).abs() < 1e-12);
    }

    #[test]
    fn zero_temperature_averages_vanish() {
        let p = small(8);
        let avg = measure_time_averages(&TodaState::equilibrium(&p), &p, 200, 20).unwrap();
        assert!(avg.p2.iter().all(|x| *x == 0.0));
        assert!(avg.velocity.iter().all(|x| *x == 0.0));
        assert_eq!(avg.relative_energy_drift, 0.0);
        assert_eq!(avg.samples, 180);
        assert!(measure_time_averages(&TodaState::equilibrium(&p), &p, 20, 20).is_err());
    }

    #[test]
    fn ensemble_is_independent_of_execution_strategy() {
        let cfg = EnsembleConfig {
            toda: small(8),
            n_steps: 2_000,
            ensemble_size: 5,
            ..EnsembleConfig::default()
        };
        let a = run_ensemble(&cfg, Execution::Sequential).unwrap();
        let b = run_ensemble(&cfg, Execution::Parallel).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.velocity_mean.len(), 8);
    }

    #[test]
    fn sweep_validation() {
        let mut cfg = SweepConfig {
            temperatures: vec![0.01, 0.01, 0.01],
            n_steps: 100,
            ensemble_size: 1,
            ..SweepConfig::default()
        };
        assert!(matches!(temperature_sweep(&cfg, Execution::Sequential), Err(Error::DegenerateFit(_))));
        cfg.temperatures = vec![0.01, 0.02];
        assert!(temperature_sweep(&cfg, Execution::Sequential).is_err());
        cfg.temperatures = vec![0.01, 0.02, 0.5];
        assert!(temperature_sweep(&cfg, Execution::Sequential).is_err());
    }
}
