//! Subcommand implementations. Each returns the list of failed assertions;
//! computation errors propagate as `Et6Error`.

use std::fs;
use std::path::{Path, PathBuf};

use et6_core::eigen::{analytic_speeds, WAVE_LABELS};
use et6_core::oracle::{oracle_constraint_reports, oracle_entropy_report, oracle_flux_reports};
use et6_core::*;

use crate::config::RunConfig;

const NX: [f64; 3] = [1.0, 0.0, 0.0];

#[derive(Debug, Default)]
pub struct Outcome {
    pub failures: Vec<String>,
    pub files: Vec<PathBuf>,
}

impl Outcome {
    fn require(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.failures.push(what());
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CommandError {
    #[error(transparent)]
    Core(#[from] Et6Error),
    #[error("{0}")]
    Config(#[from] crate::config::ConfigError),
    #[error("writing {path}: {message}")]
    Output { path: PathBuf, message: String },
}

type CmdResult = std::result::Result<Outcome, CommandError>;

fn num(x: f64) -> String {
    format!("{x:e}")
}

fn write_csv(dir: &Path, name: &str, header: &[&str], rows: &[Vec<String>], out: &mut Outcome) -> std::result::Result<(), CommandError> {
    let path = dir.join(name);
    let err = |message: String| CommandError::Output {
        path: path.clone(),
        message,
    };
    fs::create_dir_all(dir).map_err(|e| err(e.to_string()))?;
    let mut w = csv::Writer::from_path(&path).map_err(|e| err(e.to_string()))?;
    w.write_record(header).map_err(|e| err(e.to_string()))?;
    for r in rows {
        w.write_record(r).map_err(|e| err(e.to_string()))?;
    }
    w.flush().map_err(|e| err(e.to_string()))?;
    out.files.push(path);
    Ok(())
}

fn quadrature(cfg: &RunConfig) -> Result<QuadratureSpec> {
    QuadratureSpec::new(cfg.check.velocity_order, cfg.check.internal_order, cfg.check.adaptive_tol)
}

/// Constraint, flux and entropy reports with the configured tolerances.
fn oracle_reports(s: &State6, gas: &GasSpec, cfg: &RunConfig, quad: &QuadratureSpec) -> Result<Vec<OracleReport>> {
    let c = &cfg.check;
    let mut reports = Vec::new();
    for (mut batch, tol) in [
        (oracle_constraint_reports(s, gas, quad)?, c.moment_tol),
        (oracle_flux_reports(s, gas, quad)?, c.flux_tol),
        (vec![oracle_entropy_report(s, gas, quad)?], c.entropy_tol),
    ] {
        batch.iter_mut().for_each(|r| r.tolerance = tol);
        reports.append(&mut batch);
    }
    Ok(reports)
}

pub fn check(cfg: &RunConfig, dir: &Path) -> CmdResult {
    let gas = cfg.gas_spec()?;
    let quad = quadrature(cfg)?;
    let c = &cfg.check;
    let mut out = Outcome::default();
    let mut rows = Vec::new();
    for &z in &c.z {
        let p = gas.gas_constant() * c.rho * c.temp;
        let s = State6::new(c.rho, c.v, c.temp, z * p)?;
        for r in oracle_reports(&s, &gas, cfg, &quad)? {
            println!("Z={z:<8} {r}");
            out.require(r.passed(), || format!("{} at Z = {z}: rel err {:.2e} > {:.0e}", r.quantity, r.rel_err, r.tolerance));
            rows.push(vec![
                num(z),
                r.quantity.clone(),
                num(r.closed_form),
                num(r.quadrature),
                num(r.rel_err),
                r.rule.clone(),
                r.passed().to_string(),
            ]);
        }
    }
    write_csv(dir, "check.csv", &["Z", "quantity", "closed_form", "quadrature", "rel_err", "rule", "pass"], &rows, &mut out)?;
    Ok(out)
}

pub struct EigenArgs {
    pub rho: f64,
    pub p: f64,
    pub pi_over_p: f64,
    pub vx: f64,
}

pub fn eigen(cfg: &RunConfig, args: &EigenArgs, dir: &Path) -> CmdResult {
    let gas = cfg.gas_spec()?;
    let c = &cfg.check;
    let s = State6::from_pressure(args.rho, [args.vx, 0.0, 0.0], args.p, args.pi_over_p * args.p, &gas)?;
    let u = conserved_from_primitive(&s, &gas);
    let fan = wave_fan(&u, NX, &gas)?;
    let exact = analytic_speeds(&s, NX, &gas);
    let scale = exact.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let speed_err = fan.speeds.iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / scale;
    let mut out = Outcome::default();

    println!("D = {}, rho = {}, p = {}, Pi/p = {}, vx = {}", gas.dof(), args.rho, args.p, args.pi_over_p, args.vx);
    println!("{:<18} {:>14}", "wave", "speed");
    for k in 0..6 {
        println!("{:<18} {:>+14.7}", WAVE_LABELS[k], fan.speeds[k]);
    }
    out.require(fan.max_imag <= c.hyperbolicity_tol, || format!("complex speeds: |Im| = {:.2e}", fan.max_imag));
    out.require(speed_err <= c.speed_tol, || format!("speeds differ from v_n, v_n +- c by {speed_err:.2e}"));

    let conv = convexity_check(&u, &gas)?;
    let concave = conv.gradient_mismatch <= c.gradient_tol && conv.max_hessian_eigenvalue < 0.0;
    println!(
        "main field gradient mismatch {:.2e}, Hessian eigenvalues in [{:.3e}, {:.3e}]{}",
        conv.gradient_mismatch,
        conv.min_hessian_eigenvalue,
        conv.max_hessian_eigenvalue,
        if conv.reduced_confidence { " (reduced confidence)" } else { "" }
    );
    out.require(concave || conv.reduced_confidence, || format!("entropy not concave: {conv:?}"));

    let mut k_flags = vec![String::from("n/a"); 6];
    if args.pi_over_p == 0.0 {
        let k = k_condition(&u, NX, &gas)?;
        let pscale = s.pressure(&gas);
        for v in &k.vectors {
            let pass = v.delta_pi.abs() > c.k_tol * pscale;
            let idx = WAVE_LABELS.iter().position(|l| *l == v.label).unwrap_or(0);
            k_flags[idx] = pass.to_string();
            println!("K-condition {:<18} dPi = {:+.6e} {}", v.label, v.delta_pi, if pass { "pass" } else { "fail" });
        }
        let failing: Vec<_> = k
            .vectors
            .iter()
            .filter(|v| v.delta_pi.abs() <= c.k_tol * pscale)
            .map(|v| v.label)
            .collect();
        let sound_ok = !failing.iter().any(|l| l.starts_with("sound"));
        println!(
            "K-condition: {} (null space dimension {}){}",
            if failing.is_empty() { "satisfied" } else { "violated" },
            k.null_dim,
            if k.marginal { ", marginal" } else { "" }
        );
        if c.strict_k {
            out.require(failing.is_empty(), || format!("K-condition fails for {failing:?}"));
        } else {
            out.require(sound_ok, || format!("K-condition fails on sound branches {failing:?}"));
        }
    }

    let mut header = vec!["D", "rho", "p", "Pi", "vx"];
    let speed_cols: Vec<String> = WAVE_LABELS.iter().map(|l| format!("speed_{l}")).collect();
    let k_cols: Vec<String> = WAVE_LABELS.iter().map(|l| format!("K_{l}")).collect();
    header.extend(speed_cols.iter().map(String::as_str));
    header.extend(k_cols.iter().map(String::as_str));
    header.extend(["gradient_mismatch", "max_hessian_eigenvalue", "convexity_reduced_confidence"]);
    let mut row = vec![num(gas.dof()), num(args.rho), num(args.p), num(s.pi), num(args.vx)];
    row.extend(fan.speeds.iter().map(|&x| num(x)));
    row.extend(k_flags);
    row.extend([num(conv.gradient_mismatch), num(conv.max_hessian_eigenvalue), conv.reduced_confidence.to_string()]);
    write_csv(dir, "eigen.csv", &header, &[row], &mut out)?;
    Ok(out)
}

const SNAPSHOT_HEADER: [&str; 9] = ["x", "rho", "vx", "T", "p", "Pi", "Pi_over_p", "h", "k"];

fn write_series(ts: &TimeSeries, dir: &Path, out: &mut Outcome) -> std::result::Result<(), CommandError> {
    for (i, snap) in ts.snapshots.iter().enumerate() {
        let rows: Vec<Vec<String>> = snap.rows(&ts.x, &ts.gas)?.iter().map(|r| r.iter().map(|&x| num(x)).collect()).collect();
        write_csv(dir, &format!("snapshot_{i:04}.csv"), &SNAPSHOT_HEADER, &rows, out)?;
    }
    let rows: Vec<Vec<String>> = ts
        .diagnostics
        .iter()
        .map(|d| {
            vec![
                num(d.t),
                num(d.totals[0]),
                num(d.totals[1]),
                num(d.totals[5]),
                num(d.total_entropy),
                num(d.max_abs_z),
                d.projections.to_string(),
            ]
        })
        .collect();
    write_csv(
        dir,
        "diagnostics.csv",
        &["t", "total_F", "total_Fx", "total_Gll", "total_entropy", "max_abs_Z", "projections"],
        &rows,
        out,
    )
}

pub fn run(cfg: &RunConfig, dir: &Path) -> CmdResult {
    let sc = cfg.scenario()?;
    let ts = run_scenario(&sc)?;
    let c = &cfg.check;
    let mut out = Outcome::default();
    write_series(&ts, dir, &mut out)?;

    let first = ts.diagnostics.first().expect("initial diagnostics");
    let last = ts.diagnostics.last().expect("initial diagnostics");
    println!(
        "{} steps to t = {}, {} projections, {} first-order faces",
        last.step, last.t, ts.total_projections, ts.fallback_faces
    );
    if sc.boundary == Boundary::Periodic {
        let states = sc.initial_grid()?.states(&sc.gas)?;
        let scale = states.iter().map(|s| s.rho * (1.0 + s.speed_squared()).sqrt()).fold(0.0, f64::max) * (sc.x_right - sc.x_left);
        for (k, name) in [(0, "F"), (1, "F_x"), (2, "F_y"), (3, "F_z"), (5, "G_ll")] {
            let drift = (last.totals[k] - first.totals[k]).abs() / first.totals[k].abs().max(scale);
            println!("drift of total {name}: {drift:.2e}");
            out.require(drift <= c.conservation_tol, || format!("total {name} drifts by {drift:.2e}"));
        }
    }
    let worst = ts
        .diagnostics
        .windows(2)
        .map(|w| (w[1].total_entropy - w[0].total_entropy) / w[0].total_entropy.abs().max(f64::MIN_POSITIVE))
        .fold(f64::INFINITY, f64::min);
    if worst.is_finite() {
        println!("smallest relative entropy change per step: {worst:.2e}");
        out.require(worst >= -c.entropy_step_tol, || format!("total entropy decreased by {:.2e} in one step", -worst));
    }
    Ok(out)
}

pub struct RelaxArgs {
    pub pi0_over_p: f64,
    pub tau: f64,
    pub t_end: f64,
}

pub fn relax(cfg: &RunConfig, args: &RelaxArgs, dir: &Path) -> CmdResult {
    let mut gas_cfg = cfg.clone();
    gas_cfg.gas.tau = args.tau;
    let gas = gas_cfg.gas_spec()?;
    let bg = &cfg.scenario.background;
    let state = State6::from_pressure(bg.rho, [bg.vx, 0.0, 0.0], bg.p, args.pi0_over_p * bg.p, &gas)?;
    let mut sc = Scenario::new(gas, InitialCondition::Uniform { state }, 4);
    sc.t_end = args.t_end;
    sc.output_interval = Some(cfg.output.cadence.unwrap_or(args.t_end / 20.0));
    let ts = run_scenario(&sc)?;

    let p = state.pressure(&gas);
    let mut out = Outcome::default();
    let mut worst = 0.0f64;
    let rows: Vec<Vec<String>> = ts
        .snapshots
        .iter()
        .map(|snap| {
            let pi = snap.states[0].pi;
            let exact = state.pi * (-snap.t / args.tau).exp();
            let err = (pi - exact).abs() / p;
            worst = worst.max(err);
            vec![num(snap.t), num(pi), num(exact), num(p), num(err)]
        })
        .collect();
    write_csv(dir, "relax.csv", &["t", "Pi", "Pi_exact", "p", "abs_err_over_p"], &rows, &mut out)?;
    println!("{} output times, max |Pi - Pi0 exp(-t/tau)| / p = {worst:.2e}", rows.len());
    out.require(worst <= cfg.check.relax_tol, || format!("relaxation error {worst:.2e}"));
    Ok(out)
}

pub fn nslimit(cfg: &RunConfig, dir: &Path) -> CmdResult {
    let n = &cfg.nslimit;
    let mut with_tau = cfg.clone();
    with_tau.gas.tau = n.tau;
    let gas = with_tau.gas_spec()?;
    let bg = &cfg.scenario.background;
    let background = State6::from_pressure(bg.rho, [bg.vx, 0.0, 0.0], bg.p, 0.0, &gas)?;
    let mut sc = Scenario::new(
        gas,
        InitialCondition::AcousticWave {
            background,
            amplitude: n.amplitude,
            modes: 1,
        },
        n.cells,
    );
    sc.x_right = n.length;
    sc.t_end = n.t_end;
    sc.cfl = n.cfl;
    let ts = run_scenario(&sc)?;
    let rep = ns_limit_diagnostic(&ts, n.margin)?;

    let snap = ts.last();
    let nu_rows: Vec<Vec<String>> = (1..snap.states.len() - 1)
        .map(|i| {
            let s = &snap.states[i];
            let dvdx = (snap.states[i + 1].v[0] - snap.states[i - 1].v[0]) / (2.0 * ts.dx);
            let pi_ns = -et6_core::solver::bulk_viscosity(s.pressure(&gas), &gas) * dvdx;
            vec![num(ts.x[i]), num(s.pi), num(pi_ns), num(s.pi - pi_ns)]
        })
        .collect();
    let mut out = Outcome::default();
    write_csv(dir, "nslimit.csv", &["x", "Pi", "Pi_NS", "difference"], &nu_rows, &mut out)?;
    println!(
        "nu = {:.6e}, max deviation {:.3e}, L2 deviation {:.3e} over {} cells{}",
        rep.nu_mean,
        rep.max_deviation,
        rep.l2_deviation,
        rep.cells_compared,
        if rep.reduced_confidence { " (reduced confidence)" } else { "" }
    );
    let limit = n.factor * n.tau;
    out.require(rep.max_deviation <= limit, || format!("deviation {:.3e} exceeds {limit:.1e}", rep.max_deviation));
    out.require(!rep.reduced_confidence, || "data not smooth enough for the comparison".into());
    Ok(out)
}

pub fn sweep(cfg: &RunConfig, dir: &Path) -> CmdResult {
    let c = &cfg.check;
    let quad = quadrature(cfg)?;
    let mut out = Outcome::default();
    let mut rows = Vec::new();
    for &d in &c.sweep_dof {
        let mut gcfg = cfg.clone();
        gcfg.gas.dof = d;
        let gas = gcfg.gas_spec()?;
        let lo = -c.sweep_window;
        let hi = c.sweep_window * gas.z_max();
        for j in 0..c.sweep_z_points {
            let z = if c.sweep_z_points == 1 {
                0.0
            } else {
                lo + (hi - lo) * j as f64 / (c.sweep_z_points - 1) as f64
            };
            let s = State6::from_pressure(1.0, [0.3, -0.2, 0.1], 1.0, z, &gas)?;
            let u = conserved_from_primitive(&s, &gas);
            let fan = wave_fan(&u, NX, &gas)?;
            let reports = oracle_reports(&s, &gas, cfg, &quad)?;
            let worst_oracle = reports.iter().map(|r| r.rel_err / r.tolerance).fold(0.0, f64::max);
            let conv = convexity_check(&u, &gas)?;
            let k = entropy_parts(&s, &gas)?.k;
            let real = fan.max_imag <= c.hyperbolicity_tol;
            let oracle_ok = reports.iter().all(|r| r.passed());
            let concave = (conv.gradient_mismatch <= c.gradient_tol && conv.max_hessian_eigenvalue < 0.0) || conv.reduced_confidence;
            let k_ok = if z.abs() < 1e-12 { k.abs() <= 1e-12 } else { k < 0.0 };
            let pass = real && oracle_ok && concave && k_ok;
            out.require(pass, || {
                format!("D = {d}, Z = {z}: real {real}, oracle {oracle_ok}, concave {concave}, k {k_ok}")
            });
            rows.push(vec![
                num(d),
                num(z),
                num(fan.max_imag),
                num(worst_oracle),
                num(conv.gradient_mismatch),
                num(conv.max_hessian_eigenvalue),
                num(k),
                pass.to_string(),
            ]);
        }
    }
    println!("{} grid points, {} failing", rows.len(), out.failures.len());
    write_csv(
        dir,
        "sweep.csv",
        &["D", "Z", "max_imag", "oracle_err_over_tol", "gradient_mismatch", "max_hessian_eigenvalue", "k", "pass"],
        &rows,
        &mut out,
    )?;
    Ok(out)
}
