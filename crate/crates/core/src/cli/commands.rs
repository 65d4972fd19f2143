//! One function per command, each turning a validated config into a report.

use super::config::{Command, RunConfig};
use super::report::{col, Bound, Cell, Check, Column, Report, Table};
use super::CliError;
use crate::contact::{self, PoissonPoint, TangentVector};
use crate::exec::Execution;
use crate::pde::{self, GradientSource};
use crate::thermo::{self, ContactPoint, ExtensiveState, GasParameters};
use crate::toda::{self, EnsembleConfig, SweepConfig};
use crate::transforms;
use crate::Result;

/// Tolerance names each command accepts, with defaults.
pub fn tolerances(command: Command) -> &'static [(&'static str, f64)] {
    match command {
        Command::Eval => &[],
        Command::Residuals => &[
            ("eos", 1e-12),
            ("equipartition", 1e-12),
            ("pde", 1e-12),
            ("pde_fd", 1e-7),
        ],
        Command::Transform => &[("roundtrip", 1e-10), ("energy", 1e-12)],
        Command::ContactCheck => &[("pullback", 1e-6), ("bracket", 1e-10), ("ideal_py", 1e-8)],
        Command::Toda => &[("equipartition", 0.05), ("velocity_z", 3.0)],
        Command::Sweep => &[
            ("slope", 0.05),
            ("r_squared", 0.99),
            ("intercept", 0.1),
            ("velocity_z", 3.0),
        ],
    }
}

fn tol(cfg: &RunConfig, command: Command, name: &str) -> f64 {
    let default = tolerances(command)
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, v)| *v)
        .expect("tolerance is declared for this command");
    cfg.tol(name, default)
}

const S: Column = col("S", "energy/temperature");
const V: Column = col("V", "volume");

fn exec(cfg: &RunConfig) -> Execution {
    if cfg.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    }
}

/// Evaluates `f` at every point, in order; the first failing point becomes a
/// validation error naming it.
fn per_point<R, F>(cfg: &RunConfig, points: &[ExtensiveState], f: F) -> std::result::Result<Vec<R>, CliError>
where
    R: Send,
    F: Fn(ExtensiveState) -> Result<R> + Sync + Send,
{
    exec(cfg)
        .map(points, |pt| f(*pt))
        .into_iter()
        .enumerate()
        .map(|(i, r)| r.map_err(|e| CliError::from_core(e, "points").at_point(i, points[i])))
        .collect()
}

fn lift(cfg: &RunConfig, state: ExtensiveState) -> Result<ContactPoint> {
    let mut pt = thermo::contact_lift(&cfg.gas, state)?;
    pt.p *= 1.0 + cfg.perturb.pressure;
    Ok(pt)
}

fn real(x: f64) -> Cell {
    Cell::Real(x)
}

pub fn eval(cfg: &RunConfig) -> std::result::Result<Report, CliError> {
    let points = cfg.points()?;
    let lifted = per_point(cfg, &points, |st| lift(cfg, st))?;
    let mut table = Table::new(vec![
        S,
        V,
        col("U", "energy"),
        col("T", "temperature"),
        col("p", "pressure"),
    ]);
    for pt in lifted {
        table.push(vec![real(pt.s), real(pt.v), real(pt.u), real(pt.t), real(pt.p)]);
    }
    Ok(Report::new(Command::Eval, table))
}

pub fn residuals(cfg: &RunConfig) -> std::result::Result<Report, CliError> {
    let points = cfg.points()?;
    let gas = &cfg.gas;
    let rows = per_point(cfg, &points, |st| {
        let pt = lift(cfg, st)?;
        let eos = thermo::eos_residual(&pt, gas)?;
        let eq = thermo::equipartition_residual(&pt, gas)?;
        let scale = pde::pde_scale(gas, st)?;
        let fd = GradientSource::fd(1e-5);
        Ok([
            eos,
            eos.abs() / thermo::eos_scale(&pt, gas),
            eq,
            eq.abs() / thermo::equipartition_scale(&pt, gas),
            pde::pde1_residual(gas, st, GradientSource::Analytic)?.abs() / scale,
            pde::pde2_residual(gas, st, GradientSource::Analytic)?.abs() / scale,
            pde::pde1_residual(gas, st, fd)?.abs() / scale,
            pde::pde2_residual(gas, st, fd)?.abs() / scale,
        ])
    })?;
    let mut table = Table::new(vec![
        S,
        V,
        col("eos_residual", "energy"),
        col("eos_rel", "1"),
        col("equipartition_residual", "energy"),
        col("equipartition_rel", "1"),
        col("pde1_rel", "1"),
        col("pde2_rel", "1"),
        col("pde1_fd_rel", "1"),
        col("pde2_fd_rel", "1"),
        col("max_rel", "1"),
    ]);
    for (st, r) in points.iter().zip(&rows) {
        let worst = r[1].max(r[3]).max(r[4]).max(r[5]);
        let mut row = vec![real(st.s), real(st.v)];
        row.extend(r.iter().map(|x| real(*x)));
        row.push(real(worst));
        table.push(row);
    }
    let c = Command::Residuals;
    let mut report = Report::new(c, table);
    report.checks = vec![
        Check::rows_max("eos", tol(cfg, c, "eos"), rows.iter().map(|r| r[1])),
        Check::rows_max("equipartition", tol(cfg, c, "equipartition"), rows.iter().map(|r| r[3])),
        Check::rows_max("pde", tol(cfg, c, "pde"), rows.iter().map(|r| r[4].max(r[5]))),
        Check::rows_max("pde_fd", tol(cfg, c, "pde_fd"), rows.iter().map(|r| r[6].max(r[7]))),
    ];
    Ok(report)
}

fn require_toda_chart(gas: &GasParameters) -> std::result::Result<(), CliError> {
    if gas.a > 0.0 {
        Ok(())
    } else {
        Err(CliError::from_core(
            crate::ChartDomainError::ANonpositive { a: gas.a }.into(),
            "gas.a",
        ))
    }
}

pub fn transform(cfg: &RunConfig) -> std::result::Result<Report, CliError> {
    let gas = &cfg.gas;
    require_toda_chart(gas)?;
    let points = cfg.points()?;
    let rows = per_point(cfg, &points, |st| {
        let tp = transforms::full_chain(gas, st)?;
        let back = transforms::full_chain_inverse(gas, tp.x, tp.y)?;
        let roundtrip = ((back.s - st.s).abs() + (back.v - st.v).abs()) / (st.s.abs() + st.v.abs()).max(1.0);
        let u = thermo::energy(gas, st)?;
        let scale = transforms::toda_potential(gas, tp.x)?.max(transforms::toda_potential(gas, tp.y)?);
        Ok((tp, roundtrip, (tp.u - u).abs() / scale))
    })?;
    let mut table = Table::new(vec![
        S,
        V,
        col("x", "1"),
        col("y", "1"),
        col("p_x", "energy"),
        col("p_y", "energy"),
        col("U", "energy"),
        col("roundtrip_rel", "1"),
        col("energy_rel", "1"),
    ]);
    for (st, (tp, rt, er)) in points.iter().zip(&rows) {
        table.push(vec![
            real(st.s),
            real(st.v),
            real(tp.x),
            real(tp.y),
            real(tp.p_x),
            real(tp.p_y),
            real(tp.u),
            real(*rt),
            real(*er),
        ]);
    }
    let c = Command::Transform;
    let mut report = Report::new(c, table);
    report.checks = vec![
        Check::rows_max("roundtrip", tol(cfg, c, "roundtrip"), rows.iter().map(|r| r.1)),
        Check::rows_max("energy", tol(cfg, c, "energy"), rows.iter().map(|r| r.2)),
    ];
    Ok(report)
}

fn canonical_bracket_errors(pt: &ContactPoint) -> Result<(f64, f64)> {
    let at = PoissonPoint::from(*pt);
    let h = pde::default_step(at.s.abs().max(at.t.abs()).max(at.v.abs()).max(at.p.abs()));
    let st = contact::poisson_bracket(&|q: &PoissonPoint| q.s, &|q: &PoissonPoint| q.t, &at, h)?;
    let vp = contact::poisson_bracket(&|q: &PoissonPoint| q.v, &|q: &PoissonPoint| -q.p, &at, h)?;
    Ok(((st - 1.0).abs(), (vp - 1.0).abs()))
}

/// `|T dS - p dV - (p_x dx + p_y dy)| / U0` for the unit tangents along `S`
/// and `V`, using the (possibly perturbed) lifted pressure.
fn pullback(cfg: &RunConfig, st: ExtensiveState, pt: &ContactPoint) -> Result<(f64, f64)> {
    let gas = &cfg.gas;
    let tp = transforms::full_chain(gas, st)?;
    let jac = contact::chain_jacobian(gas, st)?;
    let defect = |ds: f64, dv: f64| {
        let lhs = contact::contact_form_energy(
            pt,
            &TangentVector {
                ds,
                dv,
                ..TangentVector::default()
            },
        );
        let dx = jac[0][0] * ds + jac[0][1] * dv;
        let dy = jac[1][0] * ds + jac[1][1] * dv;
        (lhs - contact::contact_form_transformed(&tp, dx, dy, 0.0)).abs() / gas.u0
    };
    Ok((defect(1.0, 0.0), defect(0.0, 1.0)))
}

pub fn contact_check(cfg: &RunConfig) -> std::result::Result<Report, CliError> {
    let gas = &cfg.gas;
    let ideal = gas.is_ideal();
    if !ideal {
        require_toda_chart(gas)?;
    }
    let points = cfg.points()?;
    let rows = per_point(cfg, &points, |st| {
        let pt = lift(cfg, st)?;
        let (e_st, e_vp) = canonical_bracket_errors(&pt)?;
        let (d_s, d_v) = if ideal {
            (contact::ideal_submanifold_check(gas, st)? / gas.u0, 0.0)
        } else {
            pullback(cfg, st, &pt)?
        };
        Ok([d_s, d_v, e_st, e_vp])
    })?;
    let (first, second, check) = if ideal {
        (col("ideal_dU_dy", "1"), col("unused", "1"), "ideal_py")
    } else {
        (col("pullback_dS", "1"), col("pullback_dV", "1"), "pullback")
    };
    let mut table = Table::new(vec![
        S,
        V,
        first,
        second,
        col("bracket_S_T_err", "1"),
        col("bracket_V_negp_err", "1"),
    ]);
    for (st, r) in points.iter().zip(&rows) {
        let mut row = vec![real(st.s), real(st.v)];
        row.extend(r.iter().map(|x| real(*x)));
        table.push(row);
    }
    let c = Command::ContactCheck;
    let mut report = Report::new(c, table);
    report.checks = vec![
        Check::rows_max(check, tol(cfg, c, check), rows.iter().map(|r| r[0].max(r[1]))),
        Check::rows_max("bracket", tol(cfg, c, "bracket"), rows.iter().map(|r| r[2].max(r[3]))),
    ];
    Ok(report)
}

fn ensemble_config(cfg: &RunConfig) -> EnsembleConfig {
    let t = &cfg.toda;
    EnsembleConfig {
        toda: t.params,
        temperature: t.temperature,
        kb: t.kb,
        n_steps: t.n_steps,
        burn_in: t.burn_in,
        ensemble_size: t.ensemble_size,
        seed: cfg.seed,
        stream_base: 0,
        init: t.init,
    }
}

fn sweep_config(cfg: &RunConfig) -> SweepConfig {
    let t = &cfg.toda;
    SweepConfig {
        toda: t.params,
        temperatures: t.temperatures.clone(),
        kb: t.kb,
        n_steps: t.n_steps,
        burn_in: t.burn_in,
        ensemble_size: t.ensemble_size,
        seed: cfg.seed,
        init: t.init,
    }
}

pub fn toda(cfg: &RunConfig) -> std::result::Result<Report, CliError> {
    let ens = ensemble_config(cfg);
    let rep = toda::run_ensemble(&ens, exec(cfg)).map_err(|e| CliError::from_core(e, "toda"))?;
    let m = ens.toda.mass;
    let mut table = Table::new(vec![
        col("site", "1"),
        col("p2_over_mass", "energy"),
        col("velocity_mean", "length/time"),
        col("velocity_sem", "length/time"),
        col("velocity_z", "1"),
    ]);
    let mut zs = Vec::with_capacity(rep.n_sites);
    for i in 0..rep.n_sites {
        let (mean, sem) = (rep.velocity_mean[i], rep.velocity_sem[i]);
        let z = if sem > 0.0 { (mean / sem).abs() } else { 0.0 };
        zs.push(z);
        table.push(vec![
            Cell::Int(i as u64),
            real(rep.per_site_p2[i] / m),
            real(mean),
            real(sem),
            real(z),
        ]);
    }
    let kbt = ens.kb * ens.temperature;
    let c = Command::Toda;
    let mut report = Report::new(c, table);
    report.summary = vec![
        ("kbt", "energy", kbt),
        ("p2_per_dof_over_mass", "energy", rep.p2_per_dof_over_mass),
        ("p2_per_dof_sem", "energy", rep.p2_per_dof_sem),
        ("pooled_p2_over_mass", "energy", rep.pooled_p2_over_mass),
        ("mean_energy", "energy", rep.mean_energy),
        ("max_relative_energy_drift", "1", rep.max_relative_energy_drift),
    ];
    report.checks = vec![
        Check::scalar(
            "equipartition",
            Bound::Max,
            tol(cfg, c, "equipartition"),
            (rep.p2_per_dof_over_mass / kbt - 1.0).abs(),
        ),
        Check::rows_max("velocity_z", tol(cfg, c, "velocity_z"), zs),
    ];
    Ok(report)
}

pub fn sweep(cfg: &RunConfig) -> std::result::Result<Report, CliError> {
    let sc = sweep_config(cfg);
    let out = toda::temperature_sweep(&sc, exec(cfg)).map_err(|e| CliError::from_core(e, "toda"))?;
    let mut table = Table::new(vec![
        col("temperature", "temperature"),
        col("kbt", "energy"),
        col("p2_per_dof_over_mass", "energy"),
        col("p2_per_dof_sem", "energy"),
        col("pooled_p2_over_mass", "energy"),
        col("max_velocity_z", "1"),
        col("max_relative_energy_drift", "1"),
    ]);
    for r in &out.reports {
        table.push(vec![
            real(r.temperature),
            real(r.kb * r.temperature),
            real(r.p2_per_dof_over_mass),
            real(r.p2_per_dof_sem),
            real(r.pooled_p2_over_mass),
            real(r.max_velocity_z()),
            real(r.max_relative_energy_drift),
        ]);
    }
    let min_kbt = sc.temperatures.iter().fold(f64::INFINITY, |m, t| m.min(sc.kb * t));
    let fit = out.fit;
    let c = Command::Sweep;
    let mut report = Report::new(c, table);
    report.summary = vec![
        ("slope", "1", fit.slope),
        ("intercept", "energy", fit.intercept),
        ("r_squared", "1", fit.r_squared),
    ];
    report.checks = vec![
        Check::scalar("slope", Bound::Max, tol(cfg, c, "slope"), (fit.slope - 1.0).abs()),
        Check::scalar("r_squared", Bound::Min, tol(cfg, c, "r_squared"), fit.r_squared),
        Check::scalar(
            "intercept",
            Bound::Max,
            tol(cfg, c, "intercept"),
            fit.intercept.abs() / min_kbt,
        ),
        Check::rows_max(
            "velocity_z",
            tol(cfg, c, "velocity_z"),
            out.reports.iter().map(|r| r.max_velocity_z()),
        ),
    ];
    Ok(report)
}

pub fn run(command: Command, cfg: &RunConfig) -> std::result::Result<Report, CliError> {
    match command {
        Command::Eval => eval(cfg),
        Command::Residuals => residuals(cfg),
        Command::Transform => transform(cfg),
        Command::ContactCheck => contact_check(cfg),
        Command::Toda => toda(cfg),
        Command::Sweep => sweep(cfg),
    }
}
