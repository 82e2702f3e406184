use fpshock::evolve::{perturb_and_evolve, EvolveConfig, GridSpec, Perturbation, Reconstruction};
use fpshock::hugoniot::{burgers_branch, rh_residual, BranchSign};
use fpshock::profiles::{profile_burgers, profile_euler, ProfileOptions, ReducedParams};
use fpshock::{BurgersState, ModelDescriptor, PressureLaw};

#[test]
fn euler_profile_endpoints_are_rh_related() {
    let law = PressureLaw::gamma_law(1.0, 2.0).unwrap();
    for theta in [0.0, 0.05] {
        let p = ReducedParams::from_tau_ratio(0.5, 3.0, 1.0, 1.0, &law, theta).unwrap();
        let prof = profile_euler(&p, None).unwrap();
        let m = p.model().unwrap();
        let res = rh_residual(&m, &prof.w_minus, &prof.w_plus, prof.c).unwrap().norm();
        assert!(res < 1e-6, "theta = {theta}: {res}");
        assert!(prof.monotone);
    }
}

#[test]
fn liu_admissible_burgers_shock_has_a_stable_profile() {
    let ws = BurgersState::from_primitive(1.0, 0.0);
    let branch = burgers_branch(&ws, 1.0, BranchSign::Plus, (0.8, 0.95), 4).unwrap();
    let s = branch.samples.iter().find(|s| s.liu_ok).expect("an admissible sample");
    let wc = BurgersState::from_vector(&s.state);
    let prof = profile_burgers(&ws, &wc, s.c, 1.0, &ProfileOptions::stiff()).unwrap();
    assert!(prof.residual_sup < 1e-6);

    let eps = 0.02;
    let spec = GridSpec { x_left: prof.grid[0] * eps, x_right: prof.grid[prof.grid.len() - 1] * eps, n_cells: 300, x_front: 0.0 };
    let cfg = EvolveConfig { eps, t_end: 0.5, snapshot_every: 20, reconstruction: Reconstruction::Central, ..Default::default() };
    let pert = Perturbation { amplitude: 0.01, width: 0.05, component: 0, offset: 0.0 };
    let m = ModelDescriptor::burgers(1.0).unwrap();
    let out = perturb_and_evolve(&m, &prof, &pert, &spec, &cfg).unwrap();
    let (first, last) = (out.d[0], out.d[out.d.len() - 1]);
    assert!(last < 0.5 * first, "d went from {first} to {last}");
}
