//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

use std::process::ExitCode;
use std::time::Instant;

use fpshock::evolve::{
    evolve_viscous, measure_wave_speed, perturb_and_evolve, Boundary, EvolveConfig, Grid1D, GridSpec, Perturbation,
    Reconstruction,
};
use fpshock::hugoniot::{burgers_branch, burgers_shock, euler_branch, BranchSign};
use fpshock::profiles::{
    distance_to_theta0_orbit, g_kappa, n_cross, n_cross_eps, profile_burgers, profile_theta, profile_theta0,
    tau_sharp, ProfileOptions, ReducedParams,
};
use fpshock::spectral::{
    dsym_interval_bisection, generic_eigenvalues, kawashima_shizuta, majda_pego_scan, pego_quantities_euler,
    symmetrizer_report,
};
use fpshock::{BurgersState, Error, EulerState, ModelDescriptor, PressureLaw, ViscousSystem};
use nalgebra::{DMatrix, DVector};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

type Outcome = Result<String, String>;

fn gamma2() -> PressureLaw {
    PressureLaw::gamma_law(1.0, 2.0).unwrap()
}

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn e2s(e: Error) -> String {
    e.to_string()
}

fn laws() -> [PressureLaw; 2] {
    [gamma2(), PressureLaw::gamma_law(0.7, 1.4).unwrap()]
}

fn random_prim(rng: &mut StdRng) -> (f64, f64, f64) {
    (rng.gen_range(0.1..10.0), rng.gen_range(0.1..10.0), rng.gen_range(-5.0..5.0))
}

fn eigenvalue_closed_forms() -> Outcome {
    let mut rng = StdRng::seed_from_u64(1);
    let thetas = [0.0, 0.1, 1.0, 10.0];
    let mut worst: f64 = 0.0;
    for kind in 0..2 {
        for i in 0..1000 {
            let th = thetas[i % 4];
            let (n, rho, u) = random_prim(&mut rng);
            let (m, w) = if kind == 0 {
                let m = ModelDescriptor::burgers(th).map_err(e2s)?;
                (m, BurgersState::from_primitive(rho, u).to_vector())
            } else {
                let m = ModelDescriptor::euler(laws()[i % 2].clone(), th).map_err(e2s)?;
                (m, EulerState::from_primitive(n, rho, u).to_vector())
            };
            let closed = m.eigenvalues(&w).map_err(e2s)?;
            let generic = generic_eigenvalues(&m, &w).map_err(e2s)?;
            let scale = closed.iter().fold(1.0f64, |a, v| a.max(v.abs()));
            for (c, g) in closed.iter().zip(&generic) {
                let err = ((c - g.re).abs() + g.im.abs()) / scale;
                worst = worst.max(err);
            }
        }
    }
    check(worst <= 1e-10, format!("closed vs generic relative error {worst:e}"))?;
    let mut worst0: f64 = 0.0;
    for _ in 0..200 {
        let rho = rng.gen_range(0.1..10.0);
        let th = thetas[1 + rng.gen_range(0..3)];
        let m = ModelDescriptor::burgers(th).map_err(e2s)?;
        let ev = m.eigenvalues(&BurgersState::from_primitive(rho, 0.0).to_vector()).map_err(e2s)?;
        let s = (th * rho / (1.0 + rho)).sqrt();
        worst0 = worst0.max((ev[0] + s).abs()).max((ev[1] - s).abs());
    }
    check(worst0 <= 1e-12, format!("u = 0 case off by {worst0:e}"))?;
    Ok(format!("max rel err {worst:.1e}; u = 0 err {worst0:.1e}"))
}

fn symmetrizer_suite() -> Outcome {
    let mut rng = StdRng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for i in 0..200 {
        let (n, rho, u) = random_prim(&mut rng);
        let th = [0.1, 1.0, 10.0][i % 3];
        let m = ModelDescriptor::burgers(th).map_err(e2s)?;
        let r = symmetrizer_report(&m, &BurgersState::from_primitive(rho, u).to_vector()).map_err(e2s)?;
        worst = worst.max(r.xa_defect).max(r.xd_defect);
        check(r.xd_min_eig > 0.0 && r.xd_rank == 2, format!("Burgers XD not PD at rho={rho}, u={u}, theta={th}"))?;
        for (th, rank) in [(th, 2usize), (0.0, 1usize)] {
            let m = ModelDescriptor::euler(laws()[i % 2].clone(), th).map_err(e2s)?;
            let r = symmetrizer_report(&m, &EulerState::from_primitive(n, rho, u).to_vector()).map_err(e2s)?;
            worst = worst.max(r.xa_defect).max(r.xd_defect);
            let top = r.xd.norm();
            check(
                r.xd_min_eig >= -1e-10 * top && r.xd_rank == rank,
                format!("Euler theta={th}: XD min eig {:e}, rank {} (want {rank})", r.xd_min_eig, r.xd_rank),
            )?;
        }
    }
    check(worst <= 1e-10, format!("symmetry defect {worst:e}"))?;
    Ok(format!("max defect {worst:.1e}"))
}

fn dsym_interval() -> Outcome {
    let mut rng = StdRng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let w = BurgersState::from_primitive(rng.gen_range(0.1..10.0), rng.gen_range(-5.0..5.0));
        let (r, u) = (w.r(), w.u());
        let lam = (w.rho * r * u * u).sqrt();
        let (t1, t2) = dsym_interval_bisection(&w).map_err(e2s)?;
        worst = worst.max((t1 - lam / (r * r * (lam + 2.0))).abs());
        match (t2, lam > 2.0) {
            (Some(t2), true) => worst = worst.max((t2 - lam / (r * r * (lam - 2.0))).abs()),
            (None, false) => {}
            _ => return Err(format!("upper endpoint presence wrong at rho={}, u={u}", w.rho)),
        }
    }
    check(worst <= 1e-8, format!("endpoint mismatch {worst:e}"))?;
    let (t1, t2) = dsym_interval_bisection(&BurgersState::from_primitive(1.0, 2.0)).map_err(e2s)?;
    let t2 = t2.ok_or("witness has no upper endpoint")?;
    check(
        (t1 - 0.1464466).abs() < 5e-8 && (t2 - 0.8535534).abs() < 5e-8,
        format!("witness gives ({t1}, {t2})"),
    )?;
    Ok(format!("max endpoint err {worst:.1e}; witness ({t1:.7}, {t2:.7})"))
}

fn kawashima_shizuta_check() -> Outcome {
    let mut rng = StdRng::seed_from_u64(4);
    let (mut min_pos, mut max_zero) = (f64::INFINITY, 0.0f64);
    for i in 0..200 {
        let (n, rho, u) = random_prim(&mut rng);
        let w = EulerState::from_primitive(n, rho, u).to_vector();
        let th = [0.1, 1.0, 10.0][i % 3];
        let rep = kawashima_shizuta(&ModelDescriptor::euler(laws()[i % 2].clone(), th).map_err(e2s)?, &w).map_err(e2s)?;
        min_pos = min_pos.min(rep.norms.iter().cloned().fold(f64::INFINITY, f64::min));
        let rep0 = kawashima_shizuta(&ModelDescriptor::euler(laws()[i % 2].clone(), 0.0).map_err(e2s)?, &w).map_err(e2s)?;
        // ascending eigenvalues: the contact field u sits in the middle
        max_zero = max_zero.max(rep0.norms[1]);
        min_pos = min_pos.min(rep0.norms[0]).min(rep0.norms[2]);
    }
    check(min_pos > 0.0, format!("some |D r_k| vanished for a dissipated field ({min_pos:e})"))?;
    check(max_zero <= 1e-12, format!("theta = 0 contact |D r_0| = {max_zero:e}"))?;
    Ok(format!("min |Dr| {min_pos:.2e}; theta=0 |Dr_0| <= {max_zero:.1e}"))
}

struct Inviscid(ModelDescriptor);

impl ViscousSystem for Inviscid {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn flux(&self, w: &DVector<f64>) -> fpshock::Result<DVector<f64>> {
        self.0.flux(w)
    }
    fn jacobian(&self, w: &DVector<f64>) -> fpshock::Result<DMatrix<f64>> {
        self.0.jacobian(w)
    }
    fn diffusion(&self, _w: &DVector<f64>) -> fpshock::Result<DMatrix<f64>> {
        Ok(DMatrix::zeros(self.dim(), self.dim()))
    }
}

fn majda_pego() -> Outcome {
    let mut rng = StdRng::seed_from_u64(5);
    let m = ModelDescriptor::burgers(1.0).map_err(e2s)?;
    let mut min_delta = f64::INFINITY;
    for _ in 0..20 {
        let w = BurgersState::from_primitive(rng.gen_range(0.1..10.0), rng.gen_range(-5.0..5.0)).to_vector();
        min_delta = min_delta.min(majda_pego_scan(&m, &w, 50.0, 400).map_err(e2s)?.delta);
    }
    check(min_delta > 0.0, format!("delta = {min_delta:e}"))?;
    let w = BurgersState::from_primitive(1.0, 0.5).to_vector();
    let d0 = majda_pego_scan(&Inviscid(m), &w, 50.0, 400).map_err(e2s)?.delta;
    check(d0 <= 1e-12, format!("D = 0 gives delta = {d0:e}"))?;
    Ok(format!("min delta {min_delta:.3e}; D = 0 delta {d0:.1e}"))
}

fn strictly(v: &[f64], increasing: bool) -> bool {
    v.windows(2).all(|p| if increasing { p[1] > p[0] } else { p[1] < p[0] })
}

fn hugoniot_liu() -> Outcome {
    let mut worst_res: f64 = 0.0;
    let mut worst_lim: f64 = 0.0;
    let mut rng = StdRng::seed_from_u64(6);
    for k in 0..10 {
        let rho_s = rng.gen_range(0.2..5.0);
        let u_s = rng.gen_range(-2.0..2.0);
        let th = [0.1, 1.0, 10.0][k % 3];
        let ws = BurgersState::from_primitive(rho_s, u_s);
        let m = ModelDescriptor::burgers(th).map_err(e2s)?;
        let lam = m.eigenvalues(&ws.to_vector()).map_err(e2s)?;
        for (sign, inc, lam_k) in [(BranchSign::Plus, true, lam[1]), (BranchSign::Minus, false, lam[0])] {
            let b = burgers_branch(&ws, th, sign, (0.01 * rho_s, 5.0 * rho_s), 60).map_err(e2s)?;
            for s in &b.samples {
                let scale = 1.0 + m.flux(&b.w_star).map_err(e2s)?.norm();
                worst_res = worst_res.max(s.residual / scale);
            }
            let cs: Vec<f64> = b.samples.iter().map(|s| s.c).collect();
            check(strictly(&cs, inc), format!("Burgers {sign:?} branch speeds not strictly monotone"))?;
            worst_lim = worst_lim.max((b.limit_speed - lam_k).abs());
            let (_, c0) = burgers_shock(&ws, th, sign, 0.0).map_err(e2s)?;
            worst_lim = worst_lim.max((c0 - u_s).abs());
        }
        let law = &laws()[k % 2];
        let we = EulerState::from_primitive(rng.gen_range(0.5..3.0), rng.gen_range(0.2..3.0), rng.gen_range(-1.0..1.0));
        let me = ModelDescriptor::euler(law.clone(), th).map_err(e2s)?;
        for sign in [BranchSign::Plus, BranchSign::Minus] {
            let b = euler_branch(&we, law, th, sign, (0.2 * we.n(), 5.0 * we.n()), 60).map_err(e2s)?;
            let scale = 1.0 + me.flux(&b.w_star).map_err(e2s)?.norm();
            for s in &b.samples {
                worst_res = worst_res.max(s.residual / scale);
            }
        }
    }
    check(worst_res <= 1e-10, format!("RH residual {worst_res:e}"))?;
    check(worst_lim <= 1e-8, format!("branch limits off by {worst_lim:e}"))?;
    let ws = BurgersState::from_primitive(1.0, 0.0);
    let mut ref_err: f64 = 0.0;
    for (sign, s) in [(BranchSign::Plus, 1.0), (BranchSign::Minus, -1.0)] {
        let (w, c) = burgers_shock(&ws, 1.0, sign, 3.0).map_err(e2s)?;
        ref_err = ref_err.max((w.u() - s).abs()).max((c - 1.5 * s).abs());
    }
    check(ref_err <= 1e-12, format!("reference jump off by {ref_err:e}"))?;
    Ok(format!("RH {worst_res:.1e}; limits {worst_lim:.1e}; reference jump {ref_err:.1e}"))
}

fn gamma2_closed_forms() -> Outcome {
    let bar = gamma2();
    let mut e1: f64 = 0.0;
    for k in [0.5, 1.0, 3.0, 5.0, 10.0] {
        let nc = n_cross(k, &bar).map_err(e2s)?.n;
        e1 = e1.max((nc - ((1.0 + 4.0 * k).sqrt() - 1.0) / 2.0).abs());
    }
    check(e1 <= 1e-12, format!("n_cross off by {e1:e}"))?;
    let g: f64 = 2.0;
    let mut e2: f64 = 0.0;
    for i in 0..=40 {
        let k = 10f64.powf(-2.0 + 4.0 * i as f64 / 40.0);
        let t = tau_sharp(k, &bar).map_err(e2s)?.tau_hash;
        let exact = (1.0 + g).powf(1.0 + 1.0 / g) / g * k / (1.0 + k).powf(1.0 + 1.0 / g);
        e2 = e2.max((t - exact).abs());
    }
    check(e2 <= 1e-10, format!("tau_hash off by {e2:e}"))?;
    let t_star = tau_sharp(2.0, &bar).map_err(e2s)?.tau_hash;
    check((t_star - 1.0).abs() <= 1e-12, format!("tau_hash(kappa_star) = {t_star}"))?;
    let (lo, hi) = (tau_sharp(1e-3, &bar).map_err(e2s)?.tau_hash, tau_sharp(1e3, &bar).map_err(e2s)?.tau_hash);
    let closed_hi = 3f64.powf(1.5) / 2.0 * 1e3 / 1001f64.powf(1.5);
    check(
        lo < 0.05 && hi < 0.05,
        format!("tau_hash(1e-3) = {lo:.4}, tau_hash(1e3) = {hi:.4} (closed form gives {closed_hi:.4}, above 0.05)"),
    )?;
    Ok(format!("n_cross {e1:.1e}; tau_hash {e2:.1e}; tails {lo:.3}, {hi:.3}"))
}

fn theta0_profile() -> Outcome {
    let p = ReducedParams::from_tau_ratio(0.3, 3.0, 1.0, 1.0, &gamma2(), 0.0).map_err(e2s)?;
    let prof = profile_theta0(&p, &ProfileOptions::scalar()).map_err(e2s)?;
    check(prof.monotone, "profile not monotone")?;
    let nx = n_cross(3.0, &p.law_rescaled).map_err(e2s)?.n * p.n_star;
    let mut ends: Vec<f64> = [&prof.states[0], &prof.states[prof.states.len() - 1]]
        .iter()
        .map(|w| EulerState::from_vector(w).n())
        .collect();
    ends.sort_by(f64::total_cmp);
    let (lo, hi) = (nx.min(p.n_star), nx.max(p.n_star));
    check(
        (ends[0] - lo).abs() <= 1e-6 && (ends[1] - hi).abs() <= 1e-6,
        format!("endpoints {ends:?} vs {{{lo}, {hi}}}"),
    )?;
    check(prof.residual_sup <= 1e-8, format!("residual {:e}", prof.residual_sup))?;
    let min_rho = prof.states.iter().map(|w| w[1]).fold(f64::INFINITY, f64::min);
    check(min_rho > 0.0, format!("min(r - n) = {min_rho}"))?;
    let rejected = ReducedParams::from_tau_ratio(1.05, 3.0, 1.0, 1.0, &gamma2(), 0.0)
        .and_then(|q| profile_theta0(&q, &ProfileOptions::scalar()));
    match rejected {
        Err(e) if e.exit_code() == 2 => {}
        other => return Err(format!("tau = 1.05 tau_hash not rejected as inadmissible: {other:?}")),
    }
    Ok(format!("residual {:.1e}; min(r-n) {min_rho:.3}; 1.05 tau_hash -> exit 2", prof.residual_sup))
}

fn eps_expansion() -> Outcome {
    let bar = gamma2();
    let (kappa, tau) = (3.0, 0.3);
    let base = n_cross_eps(kappa, tau, 0.0, &bar).map_err(e2s)?;
    let n1 = base.first_order_coeff;
    check(n1 < 0.0, format!("n_cross_1 = {n1}"))?;
    let errs: Vec<f64> = [1e-2, 1e-3, 1e-4]
        .iter()
        .map(|&e| {
            let ne = n_cross_eps(kappa, tau, e, &bar).map(|q| q.n_cross).unwrap_or(f64::NAN);
            ((ne - base.n_cross) / e - n1).abs()
        })
        .collect();
    let ratios = [errs[0] / errs[1], errs[1] / errs[2]];
    check(
        ratios.iter().all(|r| (5.0..=20.0).contains(r)),
        format!("successive ratios {ratios:?} (errors {errs:?})"),
    )?;
    // independent oracle: implicit differentiation by central differences of the root
    let h = 1e-5;
    let root = |e: f64| -> Result<f64, String> {
        let f = |n: f64| g_kappa(n, kappa, &bar).map(|v| v.0).unwrap_or(f64::NAN) - e * (1.0 - tau) / kappa * (n - 1.0);
        let (mut a, mut b) = (base.n_cross - 0.05, base.n_cross + 0.05);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if f(a) * f(m) <= 0.0 {
                b = m;
            } else {
                a = m;
            }
        }
        Ok(0.5 * (a + b))
    };
    let oracle = (root(h)? - root(-h)?) / (2.0 * h);
    check((oracle - n1).abs() <= 1e-6, format!("oracle {oracle} vs {n1}"))?;
    check((n1 - -0.2529).abs() <= 1e-3, format!("n_cross_1 = {n1}, reference -0.2529"))?;
    Ok(format!("n_cross_1 {n1:.6} (oracle {oracle:.6}); ratios {:.2}, {:.2}", ratios[0], ratios[1]))
}

fn positive_temperature_profiles() -> Outcome {
    let law = gamma2();
    let p0 = ReducedParams::from_tau_ratio(0.3, 3.0, 1.0, 1.0, &law, 0.0).map_err(e2s)?;
    let n_cross0 = n_cross(3.0, &p0.law_rescaled).map_err(e2s)?.n;
    let mut dists = Vec::new();
    let mut worst_res: f64 = 0.0;
    for eps in [1e-1, 1e-2, 1e-3] {
        let theta = eps * p0.p_star / p0.r_star;
        let p = ReducedParams::from_tau_ratio(0.3, 3.0, 1.0, 1.0, &law, theta).map_err(e2s)?;
        let prof = profile_theta(&p, &ProfileOptions::stiff()).map_err(|e| format!("eps = {eps}: {e}"))?;
        worst_res = worst_res.max(prof.residual_sup);
        check(prof.residual_sup <= 1e-6, format!("eps = {eps}: residual {:e}", prof.residual_sup))?;
        let mut d: f64 = 0.0;
        for (n, r) in prof.rescaled_orbit(&p) {
            d = d.max(distance_to_theta0_orbit(n, r, p.kappa, n_cross0, &p.law_rescaled).map_err(e2s)?);
        }
        dists.push(d);
    }
    check(strictly(&dists, false), format!("orbit distances {dists:?} not decreasing"))?;
    Ok(format!("residual <= {worst_res:.1e}; distances {:.2e}, {:.2e}, {:.2e}", dists[0], dists[1], dists[2]))
}

fn burgers_four_way() -> Outcome {
    let ws = BurgersState::from_primitive(1.0, 0.0);
    let mut found = 0;
    let mut lines = Vec::new();
    for sign in [BranchSign::Plus, BranchSign::Minus] {
        let b = burgers_branch(&ws, 1.0, sign, (0.9, 1.1), 3).map_err(e2s)?;
        for rho in [0.9, 1.1] {
            let s = b.samples.iter().find(|s| (s.param - rho).abs() < 1e-12).ok_or("sample missing")?;
            let (wc, c) = burgers_shock(&ws, 1.0, sign, rho).map_err(e2s)?;
            let res = profile_burgers(&ws, &wc, c, 1.0, &ProfileOptions::stiff());
            let ok = match res {
                Ok(p) if p.residual_sup <= 1e-6 => true,
                Err(Error::ConnectionNotFound(_)) => false,
                other => return Err(format!("{sign:?} rho={rho}: unexpected {other:?}")),
            };
            check(ok == s.liu_ok, format!("{sign:?} rho={rho}: connection {ok} but Liu {}", s.liu_ok))?;
            found += ok as usize;
            lines.push(format!("{}{rho}:{}", if sign == BranchSign::Plus { "+" } else { "-" }, if ok { "found" } else { "none" }));
        }
    }
    check(found == 2, format!("{found} connections found"))?;
    Ok(lines.join(" "))
}

fn traveling_waves() -> Outcome {
    let m = ModelDescriptor::burgers(1.0).map_err(e2s)?;
    let (l, r) = (BurgersState::from_primitive(3.0, 1.0).to_vector(), BurgersState::from_primitive(1.0, 0.0).to_vector());
    let g = Grid1D::new(0.0, 4.0, 1024, Boundary::Dirichlet { left: l.clone(), right: r.clone() }, |x| {
        if x < 1.0 {
            l.clone()
        } else {
            r.clone()
        }
    })
    .map_err(e2s)?;
    let cfg = EvolveConfig { eps: 0.01, t_end: 1.5, snapshot_every: 50, ..Default::default() };
    let tr = evolve_viscous(&m, &g, &cfg).map_err(e2s)?;
    let s = measure_wave_speed(&tr.since(0.3), 0, 2.0).map_err(e2s)?;
    let rel = (s.speed - 1.5).abs() / 1.5;
    check(rel <= 0.015, format!("Burgers front speed {} ({:.2}% off)", s.speed, 100.0 * rel))?;

    let p = ReducedParams::from_tau_ratio(0.3, 3.0, 1.0, 1.0, &gamma2(), 0.0).map_err(e2s)?;
    let prof = profile_theta0(&p, &ProfileOptions::scalar()).map_err(e2s)?;
    let eps = 0.01;
    let spec = GridSpec {
        x_left: prof.grid[0] * eps,
        x_right: prof.grid[prof.grid.len() - 1] * eps,
        n_cells: 400,
        x_front: 0.0,
    };
    let run = EvolveConfig { eps, t_end: 0.3, snapshot_every: 20, reconstruction: Reconstruction::Central, ..Default::default() };
    let zero = Perturbation { amplitude: 0.0, width: 0.1, component: 0, offset: 0.0 };
    let out = perturb_and_evolve(&p.model().map_err(e2s)?, &prof, &zero, &spec, &run).map_err(e2s)?;
    let level = 0.5 * (prof.w_minus[0] + prof.w_plus[0]);
    let se = measure_wave_speed(&out.trajectory, 0, level).map_err(e2s)?;
    check(se.speed.abs() <= 1e-3 * p.u_star.abs(), format!("comoving speed {:e}", se.speed))?;
    let drift = out.d_rel[out.d_rel.len() - 1];
    check(drift <= 1e-3, format!("shape drift {drift:e}"))?;
    Ok(format!("Burgers c {:.5}; comoving speed {:.1e}; drift {drift:.1e}", s.speed, se.speed))
}

fn pego_transversality() -> Outcome {
    let mut rng = StdRng::seed_from_u64(13);
    let mut min_ldr = f64::INFINITY;
    let mut worst_closed: f64 = 0.0;
    let mut worst_det = f64::NEG_INFINITY;
    for i in 0..100 {
        let law = &laws()[i % 2];
        let w = EulerState::from_primitive(rng.gen_range(0.1..10.0), rng.gen_range(0.1..10.0), 0.0);
        for th in [0.0, 0.5, 1.0] {
            let q = pego_quantities_euler(law, th, &w, 50.0, 401).map_err(e2s)?;
            min_ldr = min_ldr.min(q.l_d_r);
            if th == 0.0 {
                let nu = w.n() / w.r;
                let dp = law.dp(w.n()).map_err(e2s)?;
                let exact = nu * nu * (1.0 - nu) * dp * dp;
                worst_closed = worst_closed.max((q.l_d_r - exact).abs() / exact.abs().max(1.0));
            } else {
                worst_det = worst_det.max(q.re_det_m_max.ok_or("missing det M")?);
            }
        }
    }
    check(min_ldr > 0.0, format!("min l D r = {min_ldr:e}"))?;
    check(worst_closed <= 1e-10, format!("theta = 0 closed form off by {worst_closed:e}"))?;
    check(worst_det < 0.0, format!("max Re det M = {worst_det:e}"))?;
    Ok(format!("min lDr {min_ldr:.2e}; closed form {worst_closed:.1e}; max Re det M {worst_det:.2e}"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 13] = [
        ("eigenvalue closed forms", eigenvalue_closed_forms),
        ("symmetrizer suite", symmetrizer_suite),
        ("D_sym interval", dsym_interval),
        ("Kawashima-Shizuta", kawashima_shizuta_check),
        ("Majda-Pego scan", majda_pego),
        ("Hugoniot and Liu", hugoniot_liu),
        ("gamma = 2 closed forms", gamma2_closed_forms),
        ("theta = 0 profile", theta0_profile),
        ("eps expansion of n_cross", eps_expansion),
        ("theta > 0 profiles", positive_temperature_profiles),
        ("Burgers profiles on the Liu side", burgers_four_way),
        ("traveling-wave verification", traveling_waves),
        ("Pego transversality", pego_transversality),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let out = f();
        let secs = t0.elapsed().as_secs_f64();
        match out {
            Ok(detail) => println!("PASS [{:>2}] {name}: {detail} ({secs:.1}s)", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL [{:>2}] {name}: {why} ({secs:.1}s)", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
