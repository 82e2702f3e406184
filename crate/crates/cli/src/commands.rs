//! Subcommand implementations. Each writes its CSV files and returns the
//! summary lines printed on standard output.

use std::path::Path;

use fpshock::evolve::{
    evolve_viscous, measure_wave_speed, perturb_and_evolve, Boundary, EvolveConfig, Grid1D, GridSpec, Perturbation,
    Reconstruction, Trajectory,
};
use fpshock::hugoniot::{burgers_branch, burgers_shock, euler_branch, BranchSign, HugoniotBranch};
use fpshock::profiles::{
    g_kappa, n_bar, n_cross, profile_burgers, profile_euler, tau_sharp, ProfileOptions, ProfileSolution,
};
use fpshock::spectral::{eigenstructure, stability_report};
use fpshock::{BurgersState, EulerState, ModelDescriptor};
use nalgebra::DVector;

use crate::config::{BranchChoice, CliError, ConfigError, EvolveMode, ModelChoice, ReconstructionChoice, RunConfig};
use crate::csv::{num, Cell, Table};

type Summary = Vec<String>;

fn invalid(msg: impl Into<String>) -> CliError {
    ConfigError::Invalid(msg.into()).into()
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
}

fn model(cfg: &RunConfig) -> Result<ModelDescriptor, CliError> {
    Ok(match cfg.model.kind {
        ModelChoice::Burgers => ModelDescriptor::burgers(cfg.model.theta)?,
        ModelChoice::Euler => ModelDescriptor::euler(cfg.law()?, cfg.model.theta)?,
    })
}

fn conservative(model: &ModelDescriptor, prim: &[f64]) -> Result<DVector<f64>, CliError> {
    if prim.len() != model.dim() {
        return Err(invalid(format!("expected {} primitive components, got {}", model.dim(), prim.len())));
    }
    let w = model.from_primitive(&DVector::from_column_slice(prim))?;
    model.validate(&w)?;
    Ok(w)
}

fn base(cfg: &RunConfig) -> Result<(ModelDescriptor, DVector<f64>), CliError> {
    let m = model(cfg)?;
    let w = conservative(&m, &cfg.base_state()?)?;
    Ok((m, w))
}

pub fn analyze(cfg: &RunConfig, dir: &Path) -> Result<Summary, CliError> {
    let (m, w) = base(cfg)?;
    let spec = eigenstructure(&m, &w)?;
    let stab = stability_report(&m, &w, cfg.sweep.xi_max, cfg.sweep.n_xi)?;
    let d = cfg.output.precision;
    let mut t = Table::new(&["quantity", "value"], d);
    let mut put = |q: String, v: Cell| t.row(vec![Cell::Text(q), v]);
    for (k, l) in spec.eigenvalues.iter().enumerate() {
        put(format!("lambda_{k}"), (*l).into());
    }
    put("strictly_hyperbolic".into(), spec.strictly_hyperbolic.into());
    for g in &spec.gn_indicators {
        put(format!("gn_{}", g.index), g.value.into());
    }
    if let Some(s) = &stab.symmetrizer {
        put("xa_defect".into(), s.xa_defect.into());
        put("xd_defect".into(), s.xd_defect.into());
        put("xd_min_eig".into(), s.xd_min_eig.into());
        put("xd_rank".into(), s.xd_rank.into());
    }
    for (k, v) in stab.kawashima_shizuta.norms.iter().enumerate() {
        put(format!("ks_norm_{k}"), (*v).into());
    }
    put("ks_passes".into(), stab.kawashima_shizuta.passes().into());
    put("majda_pego_delta".into(), stab.majda_pego_delta.into());
    if let Some(iv) = &stab.dsym_interval {
        put("dsym_theta1".into(), iv.theta1.into());
        put("dsym_theta2".into(), iv.theta2.unwrap_or(f64::INFINITY).into());
        put("dsym_confirmed".into(), iv.confirmed.into());
    }
    if let Some(p) = &stab.pego {
        put("pego_ldr".into(), p.l_d_r.into());
        if let Some(v) = p.re_det_m_max {
            put("pego_redetm_max".into(), v.into());
        }
    }
    let path = t.write(dir, &format!("{}.csv", cfg.output.stem("analyze")))?;
    let ev: Vec<String> = spec.eigenvalues.iter().map(|v| format!("{v:.7}")).collect();
    Ok(vec![
        format!("eigenvalues: {}", ev.join(", ")),
        format!("majda_pego_delta: {}", num(stab.majda_pego_delta, 6)),
        format!("wrote {}", path.display()),
    ])
}

fn branches(cfg: &RunConfig) -> Vec<(BranchSign, &'static str)> {
    match cfg.state.branch {
        BranchChoice::Plus => vec![(BranchSign::Plus, "plus")],
        BranchChoice::Minus => vec![(BranchSign::Minus, "minus")],
        BranchChoice::Both => vec![(BranchSign::Plus, "plus"), (BranchSign::Minus, "minus")],
    }
}

fn branch(cfg: &RunConfig, sign: BranchSign) -> Result<HugoniotBranch, CliError> {
    let b = cfg.base_state()?;
    let th = cfg.model.theta;
    // ρ for Burgers, n for Euler: the first primitive component either way
    let star = b[0];
    let range = (cfg.sweep.param_min.unwrap_or(0.2 * star), cfg.sweep.param_max.unwrap_or(5.0 * star));
    let n = cfg.sweep.n_samples;
    Ok(match cfg.model.kind {
        ModelChoice::Burgers => burgers_branch(&BurgersState::from_primitive(b[0], b[1]), th, sign, range, n)?,
        ModelChoice::Euler => euler_branch(&EulerState::from_primitive(b[0], b[1], b[2]), &cfg.law()?, th, sign, range, n)?,
    })
}

pub fn hugoniot(cfg: &RunConfig, dir: &Path) -> Result<Summary, CliError> {
    let m = model(cfg)?;
    let mut header = vec!["param"];
    header.extend(m.state_columns());
    header.extend(["c", "liu_ok"]);
    let mut out = Vec::new();
    for (sign, tag) in branches(cfg) {
        let b = branch(cfg, sign)?;
        let mut t = Table::new(&header, cfg.output.precision);
        for s in &b.samples {
            let mut row: Vec<Cell> = vec![s.param.into()];
            row.extend(s.state.iter().map(|v| Cell::Num(*v)));
            row.extend([s.c.into(), s.liu_ok.into()]);
            t.row(row);
        }
        let path = t.write(dir, &format!("{}_{tag}.csv", cfg.output.stem("hugoniot")))?;
        let ok = b.samples.iter().filter(|s| s.liu_ok).count();
        out.push(format!(
            "{tag} branch: {} samples, {ok} Liu-admissible, limit speed {}; wrote {}",
            b.samples.len(),
            num(b.limit_speed, 10),
            path.display()
        ));
    }
    Ok(out)
}

/// Solves the profile selected by the configuration.
fn solve_profile(cfg: &RunConfig) -> Result<(ModelDescriptor, ProfileSolution), CliError> {
    match cfg.model.kind {
        ModelChoice::Euler => {
            let p = cfg.reduced_params()?;
            let base = if p.theta == 0.0 { ProfileOptions::scalar() } else { ProfileOptions::stiff() };
            let prof = profile_euler(&p, Some(&cfg.profile_options(base)))?;
            Ok((p.model()?, prof))
        }
        ModelChoice::Burgers => {
            let b = cfg.base_state()?;
            let ws = BurgersState::from_primitive(b[0], b[1]);
            let sign = match cfg.state.branch {
                BranchChoice::Plus => BranchSign::Plus,
                BranchChoice::Minus => BranchSign::Minus,
                BranchChoice::Both => return Err(invalid("Burgers profiles need state.branch = plus or minus")),
            };
            let rho = cfg.state.param.ok_or_else(|| invalid("Burgers profiles need state.param"))?;
            let th = cfg.model.theta;
            let (wc, c) = burgers_shock(&ws, th, sign, rho)?;
            let prof = profile_burgers(&ws, &wc, c, th, &cfg.profile_options(ProfileOptions::stiff()))?;
            Ok((ModelDescriptor::burgers(th)?, prof))
        }
    }
}

/// (r, ρ, w, n, u) of a conservative state of either model.
fn expand(kind: ModelChoice, w: &DVector<f64>) -> [f64; 5] {
    match kind {
        ModelChoice::Burgers => {
            let r = 1.0 + w[0];
            [r, w[0], w[1], 1.0, w[1] / r]
        }
        ModelChoice::Euler => [w[0], w[1], w[2], w[0] - w[1], w[2] / w[0]],
    }
}

pub fn profile(cfg: &RunConfig, dir: &Path) -> Result<Summary, CliError> {
    let (_, prof) = solve_profile(cfg)?;
    let mut t = Table::new(&["y", "r", "rho", "w", "n", "u", "residual"], cfg.output.precision);
    for ((y, w), res) in prof.grid.iter().zip(&prof.states).zip(&prof.local_residual) {
        let mut row: Vec<Cell> = vec![(*y).into()];
        row.extend(expand(cfg.model.kind, w).map(Cell::Num));
        row.push((*res).into());
        t.row(row);
    }
    let path = t.write(dir, &format!("{}.csv", cfg.output.stem("profile")))?;
    Ok(vec![
        format!("speed: {}", num(prof.c, 10)),
        format!("residual_sup: {}", num(prof.residual_sup, 3)),
        format!("monotone: {}", prof.monotone),
        format!("orientation: {:?}", prof.orientation),
        format!("wrote {} ({} points)", path.display(), t.rows()),
    ])
}

fn evolve_config(cfg: &RunConfig) -> EvolveConfig {
    let e = &cfg.evolve;
    EvolveConfig {
        eps: e.eps,
        cfl_hyp: e.cfl_hyp,
        cfl_visc: e.cfl_visc,
        t_end: e.t_end,
        snapshot_every: e.snapshot_every,
        reconstruction: match e.reconstruction {
            ReconstructionChoice::FirstOrder => Reconstruction::FirstOrder,
            ReconstructionChoice::Muscl => Reconstruction::Muscl,
            ReconstructionChoice::VanLeer => Reconstruction::VanLeer,
            ReconstructionChoice::Central => Reconstruction::Central,
        },
        max_steps: e.max_steps,
    }
}

fn write_trajectory(cfg: &RunConfig, m: &ModelDescriptor, tr: &Trajectory, dir: &Path) -> Result<(), CliError> {
    let stem = cfg.output.stem("evolve");
    let d = cfg.output.precision;
    let mut header = vec!["x"];
    header.extend(m.state_columns());
    for (k, snap) in tr.snapshots.iter().enumerate() {
        let mut t = Table::new(&header, d);
        for (x, w) in tr.x.iter().zip(snap) {
            let mut row: Vec<Cell> = vec![(*x).into()];
            row.extend(w.iter().map(|v| Cell::Num(*v)));
            t.row(row);
        }
        t.write(dir, &format!("{stem}_snap_{k:04}.csv"))?;
    }
    let mut header = vec!["t".to_string()];
    header.extend(m.state_columns().iter().map(|c| format!("total_{c}")));
    header.extend(["entropy".to_string(), "front".to_string()]);
    let mut t = Table::new(&header, d);
    for g in &tr.diagnostics {
        let mut row: Vec<Cell> = vec![g.t.into()];
        row.extend(g.totals.iter().map(|v| Cell::Num(*v)));
        row.push(g.entropy.unwrap_or(f64::NAN).into());
        row.push(g.front.unwrap_or(f64::NAN).into());
        t.row(row);
    }
    t.write(dir, &format!("{stem}_diagnostics.csv"))?;
    Ok(())
}

pub fn evolve(cfg: &RunConfig, dir: &Path) -> Result<Summary, CliError> {
    let e = &cfg.evolve;
    let ec = evolve_config(cfg);
    let stem = cfg.output.stem("evolve");
    let d = cfg.output.precision;
    let mut out = Vec::new();
    let (m, tr, level) = match e.mode {
        EvolveMode::Riemann => {
            let m = model(cfg)?;
            let (left, right) = match (&e.left, &e.right, cfg.model.kind) {
                (Some(l), Some(r), _) => (l.clone(), r.clone()),
                (None, None, ModelChoice::Burgers) => (vec![3.0, 1.0], vec![1.0, 0.0]),
                _ => return Err(invalid("evolve.left and evolve.right are required")),
            };
            let (wl, wr) = (conservative(&m, &left)?, conservative(&m, &right)?);
            let (xl, xr) = (e.x_left.unwrap_or(0.0), e.x_right.unwrap_or(4.0));
            let grid = Grid1D::new(xl, xr, e.n_cells, Boundary::Dirichlet { left: wl.clone(), right: wr.clone() }, |x| {
                if x < e.x_split {
                    wl.clone()
                } else {
                    wr.clone()
                }
            })?;
            let tr = evolve_viscous(&m, &grid, &ec)?;
            (m, tr, e.level.unwrap_or(0.5 * (wl[0] + wr[0])))
        }
        EvolveMode::Profile => {
            let (m, prof) = solve_profile(cfg)?;
            let spec = GridSpec {
                x_left: e.x_left.unwrap_or(prof.grid[0] * e.eps),
                x_right: e.x_right.unwrap_or(prof.grid[prof.grid.len() - 1] * e.eps),
                n_cells: e.n_cells,
                x_front: 0.0,
            };
            let pert = Perturbation { amplitude: e.amplitude, width: e.width, component: e.component, offset: e.offset };
            let diag = perturb_and_evolve(&m, &prof, &pert, &spec, &ec)?;
            let mut t = Table::new(&["t", "d", "d_rel", "shift"], d);
            for k in 0..diag.times.len() {
                t.row(vec![diag.times[k].into(), diag.d[k].into(), diag.d_rel[k].into(), diag.shifts[k].into()]);
            }
            t.write(dir, &format!("{stem}_stability.csv"))?;
            out.push(format!(
                "final d_rel: {}; decays: {}",
                num(diag.d_rel.last().copied().unwrap_or(f64::NAN), 3),
                diag.decays
            ));
            out.push(format!("profile speed: {}", num(prof.c, 10)));
            let level = e.level.unwrap_or(0.5 * (prof.w_minus[0] + prof.w_plus[0]));
            (m, diag.trajectory, level)
        }
    };
    write_trajectory(cfg, &m, &tr, dir)?;
    let ws = measure_wave_speed(&tr.since(0.2 * e.t_end), 0, level)?;
    let mut t = Table::new(&["quantity", "value"], d);
    t.row(vec!["speed".into(), ws.speed.into()]);
    t.row(vec!["uncertainty".into(), ws.uncertainty.into()]);
    t.row(vec!["steps".into(), tr.steps.into()]);
    t.write(dir, &format!("{stem}_speed.csv"))?;
    out.insert(0, format!("measured speed: {} ± {}", num(ws.speed, 8), num(ws.uncertainty, 2)));
    out.push(format!("{} snapshots, {} steps; wrote {}/{stem}_*.csv", tr.snapshots.len(), tr.steps, dir.display()));
    Ok(out)
}

pub fn sweep_tau(cfg: &RunConfig, dir: &Path) -> Result<Summary, CliError> {
    let bar = cfg.law()?.rescaled(cfg.reduced.n_star)?;
    let s = &cfg.sweep;
    let mut t = Table::new(&["kappa", "n_hash", "tau_hash", "n_cross"], cfg.output.precision);
    let mut top = (0.0, f64::NEG_INFINITY);
    for k in linspace(s.kappa_min, s.kappa_max, s.n_kappa) {
        let ts = tau_sharp(k, &bar)?;
        let nc = n_cross(k, &bar)?;
        if ts.tau_hash > top.1 {
            top = (k, ts.tau_hash);
        }
        t.row(vec![k.into(), ts.n_hash.into(), ts.tau_hash.into(), nc.n.into()]);
    }
    let path = t.write(dir, &format!("{}.csv", cfg.output.stem("sweep-tau")))?;
    Ok(vec![
        format!("max tau_hash {} at kappa {}", num(top.1, 10), num(top.0, 6)),
        format!("wrote {} ({} rows)", path.display(), t.rows()),
    ])
}

pub fn sweep_g(cfg: &RunConfig, dir: &Path) -> Result<Summary, CliError> {
    let bar = cfg.law()?.rescaled(cfg.reduced.n_star)?;
    let s = &cfg.sweep;
    let mut out = Vec::new();
    for &k in &s.kappas {
        // g_κ is only defined below n̄(κ)
        let hi = s.n_max.min((1.0 - 1e-3) * n_bar(k, &bar)?);
        if !(hi > s.n_min) {
            return Err(invalid(format!("sweep.n_min lies above n_bar for kappa = {k}")));
        }
        let mut t = Table::new(&["n", "g", "dg"], cfg.output.precision);
        for n in linspace(s.n_min, hi, s.n_points) {
            let (g, dg) = g_kappa(n, k, &bar)?;
            t.row(vec![n.into(), g.into(), dg.into()]);
        }
        let path = t.write(dir, &format!("{}_kappa_{k}.csv", cfg.output.stem("sweep-g")))?;
        out.push(format!("kappa {k}: wrote {}", path.display()));
    }
    Ok(out)
}
