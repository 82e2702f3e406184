//! Finite-volume evolution of W_t + F(W)_x = ε (D(W) W_x)_x on a line.

//! Rusanov fluxes on minmod-limited MUSCL face states, centered viscous
//! fluxes with face-averaged D, two-stage SSP Runge–Kutta in time.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::models::ViscousSystem;
use crate::numerics::{linalg, roots};
use crate::profiles::ProfileSolution;

#[derive(Debug, Clone, PartialEq)]
pub enum Boundary {
    /// Ghost cells pinned to far-field states.
    Dirichlet { left: DVector<f64>, right: DVector<f64> },
    Periodic,
}

#[derive(Debug, Clone)]
pub struct Grid1D {
    pub x_left: f64,
    pub x_right: f64,
    pub states: Vec<DVector<f64>>,
    pub boundary: Boundary,
}

impl Grid1D {
    pub fn new<F>(x_left: f64, x_right: f64, n_cells: usize, boundary: Boundary, init: F) -> Result<Self>
    where
        F: Fn(f64) -> DVector<f64>,
    {
        if n_cells < 16 {
            return Err(Error::domain(format!("need at least 16 cells, got {n_cells}")));
        }
        if !(x_right > x_left) {
            return Err(Error::domain("x_right must exceed x_left"));
        }
        let dx = (x_right - x_left) / n_cells as f64;
        let states = (0..n_cells).map(|i| init(x_left + (i as f64 + 0.5) * dx)).collect();
        Ok(Self { x_left, x_right, states, boundary })
    }

    pub fn n_cells(&self) -> usize {
        self.states.len()
    }

    pub fn dx(&self) -> f64 {
        (self.x_right - self.x_left) / self.n_cells() as f64
    }

    pub fn centers(&self) -> Vec<f64> {
        let dx = self.dx();
        (0..self.n_cells()).map(|i| self.x_left + (i as f64 + 0.5) * dx).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reconstruction {
    FirstOrder,
    /// MUSCL with the minmod limiter.
    Muscl,
    /// MUSCL with the van Leer limiter.
    VanLeer,
    /// Unlimited centered slopes, for resolved smooth data.
    Central,
}

#[derive(Debug, Clone, Copy)]
pub struct EvolveConfig {
    pub eps: f64,
    pub cfl_hyp: f64,
    pub cfl_visc: f64,
    pub t_end: f64,
    /// Steps between snapshots; the initial and final states are always kept.
    pub snapshot_every: usize,
    pub reconstruction: Reconstruction,
    pub max_steps: usize,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        Self {
            eps: 0.01,
            cfl_hyp: 0.5,
            cfl_visc: 0.4,
            t_end: 1.0,
            snapshot_every: 50,
            reconstruction: Reconstruction::Muscl,
            max_steps: 10_000_000,
        }
    }
}

impl EvolveConfig {
    fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0) {
            return Err(Error::domain("eps must be positive"));
        }
        if !(self.cfl_hyp > 0.0 && self.cfl_hyp <= 1.0) {
            return Err(Error::domain("cfl_hyp must lie in (0,1]"));
        }
        if !(self.cfl_visc > 0.0 && self.cfl_visc <= 0.5) {
            return Err(Error::domain("cfl_visc must lie in (0,0.5]"));
        }
        if !(self.t_end > 0.0) {
            return Err(Error::domain("t_end must be positive"));
        }
        if self.snapshot_every == 0 {
            return Err(Error::domain("snapshot_every must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    pub t: f64,
    /// Σ W_k Δx per conserved component.
    pub totals: Vec<f64>,
    pub entropy: Option<f64>,
    /// Midpoint crossing of the first component between the end values.
    pub front: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub x: Vec<f64>,
    pub dx: f64,
    pub times: Vec<f64>,
    pub snapshots: Vec<Vec<DVector<f64>>>,
    pub diagnostics: Vec<Diagnostics>,
    pub steps: usize,
}

impl Trajectory {
    /// Snapshots with t ≥ t_min.
    pub fn since(&self, t_min: f64) -> Trajectory {
        let keep: Vec<usize> = (0..self.times.len()).filter(|&i| self.times[i] >= t_min).collect();
        Trajectory {
            x: self.x.clone(),
            dx: self.dx,
            times: keep.iter().map(|&i| self.times[i]).collect(),
            snapshots: keep.iter().map(|&i| self.snapshots[i].clone()).collect(),
            diagnostics: keep.iter().filter_map(|&i| self.diagnostics.get(i).cloned()).collect(),
            steps: self.steps,
        }
    }

    pub fn last(&self) -> &[DVector<f64>] {
        self.snapshots.last().expect("trajectory has at least the initial snapshot")
    }
}

fn minmod(a: f64, b: f64) -> f64 {
    if a * b <= 0.0 {
        0.0
    } else if a.abs() < b.abs() {
        a
    } else {
        b
    }
}

fn van_leer(a: f64, b: f64) -> f64 {
    if a * b <= 0.0 {
        0.0
    } else {
        2.0 * a * b / (a + b)
    }
}

struct Stepper<'a, S: ViscousSystem + ?Sized> {
    sys: &'a S,
    boundary: &'a Boundary,
    dx: f64,
    eps: f64,
    recon: Reconstruction,
}

impl<S: ViscousSystem + ?Sized> Stepper<'_, S> {
    /// States padded with two ghost cells on each side.
    fn padded(&self, u: &[DVector<f64>]) -> Vec<DVector<f64>> {
        let n = u.len();
        let mut out = Vec::with_capacity(n + 4);
        match self.boundary {
            Boundary::Dirichlet { left, right } => {
                out.push(left.clone());
                out.push(left.clone());
                out.extend(u.iter().cloned());
                out.push(right.clone());
                out.push(right.clone());
            }
            Boundary::Periodic => {
                out.push(u[n - 2].clone());
                out.push(u[n - 1].clone());
                out.extend(u.iter().cloned());
                out.push(u[0].clone());
                out.push(u[1].clone());
            }
        }
        out
    }

    fn check(&self, u: &[DVector<f64>], t: f64) -> Result<()> {
        for (i, w) in u.iter().enumerate() {
            if let Err(reason) = self.sys.check_state(w) {
                return Err(Error::StateInvalidated { cell: i, time: t, reason });
            }
        }
        Ok(())
    }

    fn rusanov(&self, wl: &DVector<f64>, wr: &DVector<f64>) -> Result<DVector<f64>> {
        let a = self.sys.max_wave_speed(wl)?.max(self.sys.max_wave_speed(wr)?);
        Ok((self.sys.flux(wl)? + self.sys.flux(wr)?) * 0.5 - (wr - wl) * (0.5 * a))
    }

    /// Semi-discrete right-hand side.
    fn rhs(&self, u: &[DVector<f64>], t: f64) -> Result<Vec<DVector<f64>>> {
        self.check(u, t)?;
        let n = u.len();
        let m = u[0].len();
        let p = self.padded(u);
        // slopes on padded cells 1..=n+2
        let mut slopes = vec![DVector::zeros(m); n + 4];
        let limiter: Option<fn(f64, f64) -> f64> = match self.recon {
            Reconstruction::FirstOrder => None,
            Reconstruction::Muscl => Some(minmod),
            Reconstruction::VanLeer => Some(van_leer),
            Reconstruction::Central => Some(|a, b| 0.5 * (a + b)),
        };
        if let Some(lim) = limiter {
            for j in 1..n + 3 {
                slopes[j] = DVector::from_fn(m, |k, _| lim(p[j][k] - p[j - 1][k], p[j + 1][k] - p[j][k]));
            }
        }
        let mut dmat = Vec::with_capacity(n + 2);
        for w in &p[1..n + 3] {
            dmat.push(self.sys.diffusion(w)?);
        }
        // face f sits between padded cells f+1 and f+2, f = 0..=n
        let mut faces = Vec::with_capacity(n + 1);
        for f in 0..=n {
            let (jl, jr) = (f + 1, f + 2);
            let wl = &p[jl] + &slopes[jl] * 0.5;
            let wr = &p[jr] - &slopes[jr] * 0.5;
            let hyp = if self.sys.check_state(&wl).is_ok() && self.sys.check_state(&wr).is_ok() {
                self.rusanov(&wl, &wr)?
            } else {
                self.rusanov(&p[jl], &p[jr])?
            };
            let dface = (&dmat[jl - 1] + &dmat[jr - 1]) * 0.5;
            let visc = dface * (&p[jr] - &p[jl]) * (self.eps / self.dx);
            faces.push(hyp - visc);
        }
        Ok((0..n).map(|i| (&faces[i + 1] - &faces[i]) * (-1.0 / self.dx)).collect())
    }

    fn dt(&self, u: &[DVector<f64>], cfg: &EvolveConfig) -> Result<f64> {
        let mut a: f64 = 0.0;
        let mut dmax: f64 = 0.0;
        for w in u {
            a = a.max(self.sys.max_wave_speed(w)?);
            let d = self.sys.diffusion(w)?;
            dmax = dmax.max(linalg::sym_max_eigenvalue(&linalg::sym_part(&d)));
        }
        if let Boundary::Dirichlet { left, right } = self.boundary {
            a = a.max(self.sys.max_wave_speed(left)?).max(self.sys.max_wave_speed(right)?);
        }
        let dmax = dmax.max(1e-14);
        // harmonic combination: the two limits taken separately are not
        // jointly stable for explicit advection-diffusion
        let inv_hyp = a / (cfg.cfl_hyp * self.dx);
        let inv_visc = self.eps * dmax / (cfg.cfl_visc * self.dx * self.dx);
        Ok(1.0 / (inv_hyp + inv_visc))
    }
}

fn diagnostics<S: ViscousSystem + ?Sized>(sys: &S, u: &[DVector<f64>], x: &[f64], dx: f64, t: f64) -> Diagnostics {
    let m = u[0].len();
    let totals = (0..m).map(|k| u.iter().map(|w| w[k]).sum::<f64>() * dx).collect();
    let entropy = u
        .iter()
        .map(|w| sys.entropy(w))
        .try_fold(0.0, |acc, z| z.map(|z| acc + z * dx));
    let (a, b) = (u[0][0], u[u.len() - 1][0]);
    let front = if (a - b).abs() > 1e-12 * (1.0 + a.abs()) {
        crossing(x, &u.iter().map(|w| w[0]).collect::<Vec<_>>(), 0.5 * (a + b))
    } else {
        None
    };
    Diagnostics { t, totals, entropy, front }
}

/// First abscissa where `v` crosses `level`, by linear interpolation.
fn crossing(x: &[f64], v: &[f64], level: f64) -> Option<f64> {
    for i in 0..v.len() - 1 {
        let (a, b) = (v[i] - level, v[i + 1] - level);
        if a == 0.0 {
            return Some(x[i]);
        }
        if a * b < 0.0 {
            return Some(x[i] + (x[i + 1] - x[i]) * a / (a - b));
        }
    }
    None
}

pub fn evolve_viscous<S: ViscousSystem + ?Sized>(sys: &S, grid: &Grid1D, cfg: &EvolveConfig) -> Result<Trajectory> {
    cfg.validate()?;
    if grid.n_cells() < 16 {
        return Err(Error::domain("need at least 16 cells"));
    }
    let stepper = Stepper { sys, boundary: &grid.boundary, dx: grid.dx(), eps: cfg.eps, recon: cfg.reconstruction };
    let x = grid.centers();
    let dx = grid.dx();
    let mut u = grid.states.clone();
    stepper.check(&u, 0.0)?;
    let mut t = 0.0;
    let mut traj = Trajectory {
        x: x.clone(),
        dx,
        times: vec![0.0],
        snapshots: vec![u.clone()],
        diagnostics: vec![diagnostics(sys, &u, &x, dx, 0.0)],
        steps: 0,
    };
    let mut steps = 0usize;
    while t < cfg.t_end {
        if steps >= cfg.max_steps {
            return Err(Error::numeric(format!("step budget {} exhausted at t = {t}", cfg.max_steps)));
        }
        let mut dt = stepper.dt(&u, cfg)?;
        if !(dt > 1e-14 * cfg.t_end) {
            return Err(Error::numeric(format!("time step underflow (dt = {dt:e}) at t = {t}")));
        }
        if t + dt > cfg.t_end {
            dt = cfg.t_end - t;
        }
        let k1 = stepper.rhs(&u, t)?;
        let u1: Vec<DVector<f64>> = u.iter().zip(&k1).map(|(w, k)| w + k * dt).collect();
        let k2 = stepper.rhs(&u1, t + dt)?;
        u = u
            .iter()
            .zip(u1.iter().zip(&k2))
            .map(|(w, (w1, k))| (w + w1 + k * dt) * 0.5)
            .collect();
        t = if t + dt >= cfg.t_end { cfg.t_end } else { t + dt };
        steps += 1;
        stepper.check(&u, t)?;
        if steps % cfg.snapshot_every == 0 || t >= cfg.t_end {
            traj.times.push(t);
            traj.snapshots.push(u.clone());
            traj.diagnostics.push(diagnostics(sys, &u, &x, dx, t));
        }
    }
    traj.steps = steps;
    Ok(traj)
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaveSpeed {
    pub speed: f64,
    /// Standard error of the fitted slope.
    pub uncertainty: f64,
    pub locations: Vec<f64>,
}

/// Least-squares speed of the `level` crossing of component `component`.
pub fn measure_wave_speed(traj: &Trajectory, component: usize, level: f64) -> Result<WaveSpeed> {
    let m = traj.times.len();
    if m < 3 {
        return Err(Error::Measurement(format!("need at least 3 snapshots, got {m}")));
    }
    let mut locations = Vec::with_capacity(m);
    for (k, snap) in traj.snapshots.iter().enumerate() {
        if component >= snap[0].len() {
            return Err(Error::Measurement(format!("component {component} out of range")));
        }
        let v: Vec<f64> = snap.iter().map(|w| w[component]).collect();
        match crossing(&traj.x, &v, level) {
            Some(x) => locations.push(x),
            None => {
                return Err(Error::Measurement(format!(
                    "no crossing of level {level} at t = {}",
                    traj.times[k]
                )))
            }
        }
    }
    let t = &traj.times;
    let tm = t.iter().sum::<f64>() / m as f64;
    let xm = locations.iter().sum::<f64>() / m as f64;
    let sxx: f64 = t.iter().map(|ti| (ti - tm).powi(2)).sum();
    let sxy: f64 = t.iter().zip(&locations).map(|(ti, xi)| (ti - tm) * (xi - xm)).sum();
    let speed = sxy / sxx;
    let ssr: f64 = t
        .iter()
        .zip(&locations)
        .map(|(ti, xi)| (xi - xm - speed * (ti - tm)).powi(2))
        .sum();
    let uncertainty = (ssr / (m as f64 - 2.0).max(1.0) / sxx).sqrt();
    Ok(WaveSpeed { speed, uncertainty, locations })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Perturbation {
    pub amplitude: f64,
    /// Half-width of the cos² bump in x.
    pub width: f64,
    pub component: usize,
    /// Bump center relative to the front position.
    pub offset: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub x_left: f64,
    pub x_right: f64,
    pub n_cells: usize,
    /// Initial position of the profile's y = 0 point.
    pub x_front: f64,
}

#[derive(Debug, Clone)]
pub struct StabilityDiagnostic {
    pub times: Vec<f64>,
    /// Shift-minimized L² distance to the translated profile.
    pub d: Vec<f64>,
    /// d divided by the shape scale |jump|·√(ε ℓ), ℓ the profile thickness in y.
    pub d_rel: Vec<f64>,
    pub shifts: Vec<f64>,
    pub decays: bool,
    pub trajectory: Trajectory,
}

/// Profile thickness |jump| / sup|W′| in y units.
fn thickness(profile: &ProfileSolution) -> f64 {
    let jump = profile.jump();
    let mut slope: f64 = 0.0;
    for i in 0..profile.grid.len() - 1 {
        let dy = profile.grid[i + 1] - profile.grid[i];
        if dy > 0.0 {
            slope = slope.max((&profile.states[i + 1] - &profile.states[i]).norm() / dy);
        }
    }
    if slope > 0.0 {
        jump / slope
    } else {
        1.0
    }
}

fn l2_distance(u: &[DVector<f64>], x: &[f64], dx: f64, reference: impl Fn(f64) -> DVector<f64>) -> f64 {
    u.iter()
        .zip(x)
        .map(|(w, &xi)| (w - reference(xi)).norm_squared())
        .sum::<f64>()
        .mul_add(dx, 0.0)
        .sqrt()
}

/// Shift-minimized distance: integer-cell scan over ±5 cells, then
/// golden-section refinement within one cell of the best shift.
fn min_shift_distance(u: &[DVector<f64>], x: &[f64], dx: f64, reference: &dyn Fn(f64) -> DVector<f64>) -> (f64, f64) {
    let dist = |s: f64| l2_distance(u, x, dx, |xi| reference(xi - s));
    let mut best = (0.0, dist(0.0));
    for k in -5..=5 {
        let s = k as f64 * dx;
        let v = dist(s);
        if v < best.1 {
            best = (s, v);
        }
    }
    let (s, v) = roots::golden_section_min(dist, best.0 - dx, best.0 + dx, 1e-6 * dx);
    if v < best.1 {
        (v, s)
    } else {
        (best.1, best.0)
    }
}

/// Evolves a perturbed profile and tracks its distance to the translated
/// profile family.
pub fn perturb_and_evolve<S: ViscousSystem + ?Sized>(
    sys: &S,
    profile: &ProfileSolution,
    perturbation: &Perturbation,
    spec: &GridSpec,
    cfg: &EvolveConfig,
) -> Result<StabilityDiagnostic> {
    cfg.validate()?;
    let jump = profile.jump();
    if perturbation.amplitude.abs() > 0.1 * jump.max(1.0) {
        return Err(Error::domain("perturbation amplitude exceeds 0.1 of the jump amplitude"));
    }
    if perturbation.component >= profile.w_minus.len() {
        return Err(Error::domain("perturbation component out of range"));
    }
    let eps = cfg.eps;
    let (x0, c) = (spec.x_front, profile.c);
    let base = |x: f64| profile.sample((x - x0) / eps);
    let bump = |x: f64| {
        let z = (x - x0 - perturbation.offset) / perturbation.width;
        if z.abs() < 1.0 {
            perturbation.amplitude * (0.5 * std::f64::consts::PI * z).cos().powi(2)
        } else {
            0.0
        }
    };
    let grid = Grid1D::new(
        spec.x_left,
        spec.x_right,
        spec.n_cells,
        Boundary::Dirichlet { left: profile.w_minus.clone(), right: profile.w_plus.clone() },
        |x| {
            let mut w = base(x);
            w[perturbation.component] += bump(x);
            w
        },
    )?;
    let traj = evolve_viscous(sys, &grid, cfg)?;
    let scale = if jump > 0.0 {
        jump * (eps * thickness(profile)).sqrt()
    } else {
        profile.w_minus.norm().max(1.0) * (spec.x_right - spec.x_left).sqrt()
    };
    let mut d = Vec::with_capacity(traj.times.len());
    let mut shifts = Vec::with_capacity(traj.times.len());
    for (t, snap) in traj.times.iter().zip(&traj.snapshots) {
        let moved = |x: f64| profile.sample((x - x0 - c * t) / eps);
        let (v, s) = min_shift_distance(snap, &traj.x, traj.dx, &moved);
        d.push(v);
        shifts.push(s);
    }
    let d_rel = d.iter().map(|v| v / scale).collect();
    let decays = d[d.len() - 1] < 0.5 * d[0];
    Ok(StabilityDiagnostic { times: traj.times.clone(), d, d_rel, shifts, decays, trajectory: traj })
}
