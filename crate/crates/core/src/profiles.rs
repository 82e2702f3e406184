//! Viscous shock profiles.
//!
//! Reduced parameters follow the rescaling n = n*·n̄, r = r*·r̄, p = p*·p̄ with
//! τ = n*/r*, κ = r*u*²/p*, κ* = n*p′(n*)/p*, ε = r*θ/p*. The abscissa y is
//! the comoving coordinate with the viscosity scale absorbed.

use std::cell::Cell;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::hugoniot::rh_residual;
use crate::models::{BurgersState, EulerState, ModelDescriptor, ModelKind, PressureLaw};
use crate::numerics::{linalg, ode, roots};
use crate::DENSITY_MIN;

#[derive(Debug, Clone)]
pub struct ReducedParams {
    pub tau: f64,
    pub kappa: f64,
    pub kappa_star: f64,
    pub eps: f64,
    pub u_sign: f64,
    pub n_star: f64,
    pub r_star: f64,
    pub u_star: f64,
    pub p_star: f64,
    pub theta: f64,
    pub law: PressureLaw,
    /// p̄(n) = p(n*·n)/p*
    pub law_rescaled: PressureLaw,
}

impl ReducedParams {
    /// Reduced parameters of the base state (n*, r*, u*).
    pub fn new(n_star: f64, r_star: f64, u_star: f64, law: &PressureLaw, theta: f64) -> Result<Self> {
        if !(n_star > 0.0 && n_star < r_star) {
            return Err(Error::domain(format!(
                "need 0 < n_star < r_star (tau in (0,1)), got n_star = {n_star}, r_star = {r_star}"
            )));
        }
        if !(u_star != 0.0 && u_star.is_finite()) {
            return Err(Error::domain("u_star must be nonzero"));
        }
        if !(theta >= 0.0) {
            return Err(Error::domain("theta must be nonnegative"));
        }
        let (p_star, dp_star, _) = law.eval(n_star)?;
        Ok(Self {
            tau: n_star / r_star,
            kappa: r_star * u_star * u_star / p_star,
            kappa_star: n_star * dp_star / p_star,
            eps: r_star * theta / p_star,
            u_sign: u_star.signum(),
            n_star,
            r_star,
            u_star,
            p_star,
            theta,
            law: law.clone(),
            law_rescaled: law.rescaled(n_star)?,
        })
    }

    /// Base state from (τ, κ, n*) and the sign of u*; |u*| = √(p*τκ/n*).
    pub fn from_reduced(tau: f64, kappa: f64, n_star: f64, u_sign: f64, law: &PressureLaw, theta: f64) -> Result<Self> {
        if !(tau > 0.0 && tau < 1.0) {
            return Err(Error::domain(format!("tau must lie in (0,1), got {tau}")));
        }
        if !(kappa > 0.0) {
            return Err(Error::domain(format!("kappa must be positive, got {kappa}")));
        }
        if !(n_star > 0.0) {
            return Err(Error::domain("n_star must be positive"));
        }
        let p_star = law.p(n_star)?;
        let u = (p_star * tau * kappa / n_star).sqrt();
        let u_star = if u_sign < 0.0 { -u } else { u };
        Self::new(n_star, n_star / tau, u_star, law, theta)
    }

    /// Base state with τ = ratio·τ_#(κ). Ratios at or above one are rejected
    /// as inadmissible before any range check on τ itself.
    pub fn from_tau_ratio(ratio: f64, kappa: f64, n_star: f64, u_sign: f64, law: &PressureLaw, theta: f64) -> Result<Self> {
        if !(ratio > 0.0) {
            return Err(Error::domain(format!("tau ratio must be positive, got {ratio}")));
        }
        let bar = law.rescaled(n_star)?;
        let ts = tau_sharp(kappa, &bar)?;
        let tau = ratio * ts.tau_hash;
        if ratio >= 1.0 {
            return Err(Error::Admissibility(format!(
                "tau = {tau} is not below tau_hash = {}: the particle density would vanish along the connection",
                ts.tau_hash
            )));
        }
        Self::from_reduced(tau, kappa, n_star, u_sign, law, theta)
    }

    pub fn rho_star(&self) -> f64 {
        self.r_star - self.n_star
    }

    pub fn w_star(&self) -> f64 {
        self.r_star * self.u_star
    }

    pub fn state_star(&self) -> EulerState {
        EulerState::new(self.r_star, self.rho_star(), self.w_star())
    }

    pub fn model(&self) -> Result<ModelDescriptor> {
        ModelDescriptor::euler(self.law.clone(), self.theta)
    }
}

/// n̄(κ) = p̄⁻¹(1 + κ).
pub fn n_bar(kappa: f64, law_rescaled: &PressureLaw) -> Result<f64> {
    law_rescaled.inverse(1.0 + kappa)
}

/// r_κ(n) = κ/(1 + κ − p̄(n)), defined for 0 < n < n̄(κ).
pub fn r_kappa(n: f64, kappa: f64, law_rescaled: &PressureLaw) -> Result<f64> {
    let den = 1.0 + kappa - law_rescaled.p(n)?;
    if !(n > 0.0 && den > 0.0) {
        return Err(Error::domain(format!("r_kappa undefined at n = {n} (kappa = {kappa})")));
    }
    Ok(kappa / den)
}

/// g_κ(n) = (1 + κ − p̄(n))/κ − 1/n and its derivative 1/n² − p̄′(n)/κ.
pub fn g_kappa(n: f64, kappa: f64, law_rescaled: &PressureLaw) -> Result<(f64, f64)> {
    let (p, dp, _) = law_rescaled.eval(n.max(0.0))?;
    if !(n > 0.0 && p < 1.0 + kappa) {
        return Err(Error::domain(format!("g_kappa needs 0 < n < n_bar, got n = {n}")));
    }
    Ok(((1.0 + kappa - p) / kappa - 1.0 / n, 1.0 / (n * n) - dp / kappa))
}

pub fn kappa_star(law_rescaled: &PressureLaw) -> Result<f64> {
    law_rescaled.dp(1.0)
}

/// κ(n) = n(p̄(n) − 1)/(n − 1), the inverse of n_cross.
pub fn kappa_of_n(n: f64, law_rescaled: &PressureLaw) -> Result<f64> {
    if (n - 1.0).abs() < 1e-8 {
        return kappa_star(law_rescaled);
    }
    Ok(n * (law_rescaled.p(n)? - 1.0) / (n - 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NCross {
    pub n: f64,
    /// κ = κ*: zero-amplitude case with n_× = 1.
    pub degenerate: bool,
}

/// Bracket for the nontrivial root of a function vanishing at n = 1 with
/// slope sign `slope` there.
fn nontrivial_bracket<F: FnMut(f64) -> Result<f64>>(mut f: F, slope: f64, n_top: f64) -> Result<(f64, f64)> {
    let (edge_lo, edge_hi) = if slope > 0.0 { (1.0, n_top) } else { (0.0, 1.0) };
    let width = edge_hi - edge_lo;
    let mut delta = 1e-6 * width;
    for _ in 0..10 {
        let (a, b) = (edge_lo + delta, edge_hi - delta);
        let (fa, fb) = (f(a)?, f(b)?);
        if fa.signum() != fb.signum() {
            return Ok((a, b));
        }
        delta /= 10.0;
    }
    Err(Error::numeric("no sign change when bracketing the equilibrium"))
}

pub fn n_cross(kappa: f64, law_rescaled: &PressureLaw) -> Result<NCross> {
    if !(kappa > 0.0) {
        return Err(Error::domain(format!("kappa must be positive, got {kappa}")));
    }
    let ks = kappa_star(law_rescaled)?;
    if (kappa - ks).abs() <= 1e-14 * ks {
        return Ok(NCross { n: 1.0, degenerate: true });
    }
    let top = n_bar(kappa, law_rescaled)?;
    let g = |n: f64| Ok(g_kappa(n, kappa, law_rescaled)?.0);
    let (a, b) = nontrivial_bracket(g, kappa - ks, top)?;
    let n = roots::brent(|n| g_kappa(n, kappa, law_rescaled).map(|v| v.0).unwrap_or(f64::NAN), a, b, 1e-15, 500)?;
    Ok(NCross { n, degenerate: false })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TauSharp {
    pub n_hash: f64,
    pub tau_hash: f64,
}

/// n_# solves p̄(n) + n p̄′(n) = 1 + κ; τ_# = κ/(n_#² p̄′(n_#)). The line
/// r = τ_# n is tangent to the graph of r_κ at n_#.
pub fn tau_sharp(kappa: f64, law_rescaled: &PressureLaw) -> Result<TauSharp> {
    if !(kappa > 0.0) {
        return Err(Error::domain(format!("kappa must be positive, got {kappa}")));
    }
    let h = |n: f64| -> f64 {
        match law_rescaled.eval(n) {
            Ok((p, dp, _)) => p + n * dp - (1.0 + kappa),
            Err(_) => f64::NAN,
        }
    };
    let mut hi = 1.0;
    while h(hi) < 0.0 {
        hi *= 2.0;
        if hi > 1e300 {
            return Err(Error::numeric("no bracket for n_hash"));
        }
    }
    let n_hash = roots::brent(h, 0.0, hi, 1e-16 * hi, 500)?;
    let (p, dp, d2p) = law_rescaled.eval(n_hash)?;
    let tau_hash = kappa / (n_hash * n_hash * dp);
    let rk = kappa / (1.0 + kappa - p);
    let drk = kappa * dp / (1.0 + kappa - p).powi(2);
    let _ = d2p;
    if (rk - tau_hash * n_hash).abs() > 1e-10 * rk || (drk - tau_hash).abs() > 1e-10 * tau_hash.max(1e-300) {
        return Err(Error::numeric("tangency check failed for tau_hash"));
    }
    Ok(TauSharp { n_hash, tau_hash })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriumPair {
    /// Rescaled n_×^ε (and r_×^ε, equal to it).
    pub n_cross: f64,
    pub r_cross: f64,
    /// n_×^0
    pub n_cross0: f64,
    /// n_{×,1} = (1−τ)/κ · (n_× − 1)/g_κ′(n_×)
    pub first_order_coeff: f64,
}

/// Nontrivial root of g_κ(n) = ε(1−τ)/κ · (n − 1).
pub fn n_cross_eps(kappa: f64, tau: f64, eps: f64, law_rescaled: &PressureLaw) -> Result<EquilibriumPair> {
    if !(eps >= 0.0) {
        return Err(Error::domain("eps must be nonnegative"));
    }
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::domain(format!("tau must lie in (0,1), got {tau}")));
    }
    let nc = n_cross(kappa, law_rescaled)?;
    if nc.degenerate {
        return Err(Error::ZeroAmplitude(format!("kappa = kappa_star = {kappa}")));
    }
    let (_, g1) = g_kappa(nc.n, kappa, law_rescaled)?;
    let first_order_coeff = (1.0 - tau) / kappa * (nc.n - 1.0) / g1;
    let slope_eps = eps * (1.0 - tau) / kappa;
    let phi = |n: f64| -> Result<(f64, f64)> {
        let (g, dg) = g_kappa(n, kappa, law_rescaled)?;
        Ok((g - slope_eps * (n - 1.0), dg - slope_eps))
    };
    let n = if eps == 0.0 {
        nc.n
    } else {
        let ks = kappa_star(law_rescaled)?;
        let slope_at_one = 1.0 - ks / kappa - slope_eps;
        let top = n_bar(kappa, law_rescaled)?;
        let (a, b) = nontrivial_bracket(|n| Ok(phi(n)?.0), slope_at_one, top)?;
        let seed = if nc.n > a && nc.n < b { nc.n } else { 0.5 * (a + b) };
        roots::safeguarded_newton(|n| phi(n).unwrap_or((f64::NAN, f64::NAN)), a, b, seed, 1e-15, 500)
            .or_else(|_| roots::brent(|n| phi(n).map(|v| v.0).unwrap_or(f64::NAN), a, b, 1e-15, 500))?
    };
    Ok(EquilibriumPair { n_cross: n, r_cross: n, n_cross0: nc.n, first_order_coeff })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    /// W* is the limit as y → −∞.
    StarAtMinusInfinity,
    StarAtPlusInfinity,
}

#[derive(Debug, Clone)]
pub struct ProfileSolution {
    pub model: ModelDescriptor,
    /// Strictly increasing abscissae.
    pub grid: Vec<f64>,
    /// Conservative states.
    pub states: Vec<DVector<f64>>,
    pub w_minus: DVector<f64>,
    pub w_plus: DVector<f64>,
    /// Reference state of the profile equation.
    pub w_star: DVector<f64>,
    pub orientation: Orientation,
    pub c: f64,
    /// Sup of the defect of the equation that was integrated.
    pub residual_sup: f64,
    /// Pointwise defect of D W′ = F(W) − F(W*) − c(W − W*), scaled.
    pub local_residual: Vec<f64>,
    pub monotone: bool,
}

impl ProfileSolution {
    /// State at abscissa y: linear interpolation inside the grid, asymptotic
    /// states outside.
    pub fn sample(&self, y: f64) -> DVector<f64> {
        let g = &self.grid;
        if y <= g[0] {
            return self.w_minus.clone();
        }
        if y >= g[g.len() - 1] {
            return self.w_plus.clone();
        }
        let i = g.partition_point(|x| *x <= y) - 1;
        let t = (y - g[i]) / (g[i + 1] - g[i]);
        &self.states[i] * (1.0 - t) + &self.states[i + 1] * t
    }

    pub fn jump(&self) -> f64 {
        (&self.w_plus - &self.w_minus).norm()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ProfileOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Manifold offset relative to the jump amplitude.
    pub offset_rel: f64,
    /// Endpoint tolerance relative to the jump amplitude.
    pub endpoint_rel: f64,
    /// Step cap in units of the slowest linear time scale at the equilibria.
    pub step_frac: f64,
    /// Integration budget in y, in units of the longest linear time scale.
    pub budget: f64,
    pub max_steps: usize,
}

impl ProfileOptions {
    /// Defaults for the scalar θ = 0 integration.
    pub fn scalar() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-14,
            offset_rel: 1e-6,
            endpoint_rel: 1e-8,
            step_frac: 0.01,
            budget: 400.0,
            max_steps: 2_000_000,
        }
    }

    /// Defaults for the stiff two-dimensional integrations.
    pub fn stiff() -> Self {
        Self {
            rtol: 1e-8,
            atol: 1e-10,
            offset_rel: 1e-6,
            endpoint_rel: 1e-8,
            step_frac: 0.02,
            budget: 400.0,
            max_steps: 2_000_000,
        }
    }
}

impl Default for ProfileOptions {
    fn default() -> Self {
        Self::stiff()
    }
}

/// Pointwise defect ‖D(W)W′ − (F(W) − F(W*) − c(W − W*))‖ / (1 + ‖F(W*)‖)
/// with W′ from five-point finite differences on the profile grid.
pub fn profile_residuals(model: &ModelDescriptor, grid: &[f64], states: &[DVector<f64>], w_star: &DVector<f64>, c: f64) -> Result<Vec<f64>> {
    let n = grid.len();
    if n < 3 {
        return Err(Error::domain("profile residual needs at least three points"));
    }
    let scale = 1.0 + model.flux(w_star)?.norm();
    let width = n.min(5);
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let start = i.saturating_sub(width / 2).min(n - width);
        let wts = linalg::fd_weights(grid[i], &grid[start..start + width]);
        let mut d = DVector::zeros(states[i].len());
        for (k, wk) in wts.iter().enumerate() {
            d += &states[start + k] * *wk;
        }
        let lhs = model.diffusion(&states[i])? * d;
        let rhs = rh_residual(model, w_star, &states[i], c)?;
        out.push((lhs - rhs).norm() / scale);
    }
    Ok(out)
}

/// Sup over interior points of the profile-equation defect.
pub fn profile_residual(model: &ModelDescriptor, profile: &ProfileSolution, c: f64) -> Result<f64> {
    let r = profile_residuals(model, &profile.grid, &profile.states, &profile.w_star, c)?;
    Ok(r[1..r.len() - 1].iter().copied().fold(0.0, f64::max))
}

fn strictly_monotone(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] > w[0]) || v.windows(2).all(|w| w[1] < w[0])
}

/// Shift so that `values` crosses `level` at y = 0.
fn shift_to_level(grid: &mut [f64], values: &[f64], level: f64) {
    for i in 0..values.len() - 1 {
        let (a, b) = (values[i] - level, values[i + 1] - level);
        if a == 0.0 {
            let s = grid[i];
            grid.iter_mut().for_each(|y| *y -= s);
            return;
        }
        if a * b < 0.0 {
            let s = grid[i] + (grid[i + 1] - grid[i]) * a / (a - b);
            grid.iter_mut().for_each(|y| *y -= s);
            return;
        }
    }
}

fn require_sharp_regime(p: &ReducedParams) -> Result<NCross> {
    let nc = n_cross(p.kappa, &p.law_rescaled)?;
    if nc.degenerate {
        return Err(Error::ZeroAmplitude(format!("kappa = kappa_star = {}", p.kappa)));
    }
    let ts = tau_sharp(p.kappa, &p.law_rescaled)?;
    if p.tau >= ts.tau_hash {
        return Err(Error::Admissibility(format!(
            "tau = {} is not below tau_hash = {}: the particle density would vanish along the connection",
            p.tau, ts.tau_hash
        )));
    }
    Ok(nc)
}

/// Temperature-less profile: scalar ODE for n̄ with r̄ = r_κ(n̄).
pub fn profile_theta0(params: &ReducedParams, opts: &ProfileOptions) -> Result<ProfileSolution> {
    if params.theta != 0.0 {
        return Err(Error::domain("profile_theta0 requires theta = 0"));
    }
    let nc = require_sharp_regime(params)?.n;
    let (kappa, tau, us) = (params.kappa, params.tau, params.u_star);
    let bar = params.law_rescaled.clone();
    let f = |nb: f64| -> Result<f64> {
        let rb = r_kappa(nb, kappa, &bar)?;
        let dens = rb - tau * nb;
        if dens <= 0.0 {
            return Err(Error::Admissibility("particle density vanished".into()));
        }
        let t = 1.0 / rb - 1.0 / nb;
        Ok(kappa * rb * rb * t / (us * dens * bar.dp(nb)?))
    };
    let amp = (1.0 - nc).abs();
    let sigma = (1.0 - nc).signum();
    let n0 = nc + sigma * opts.offset_rel * amp;
    let f0 = f(n0)?;
    let dir = (f0 * sigma).signum();
    let rate = |n: f64| -> Result<f64> {
        let h = 1e-6 * amp;
        Ok(((f(n + h)? - f(n - h)?) / (2.0 * h)).abs())
    };
    let (mu_cross, mu_one) = (rate(nc)?, rate(1.0)?);
    let mu_fast = mu_cross.max(mu_one);
    let mu_slow = mu_cross.min(mu_one);
    let ode_opts = ode::OdeOptions {
        rtol: opts.rtol,
        atol: opts.atol,
        h_init: Some(0.1 * opts.step_frac / mu_fast),
        h_max: opts.step_frac / mu_fast,
        h_min: 1e-14 / mu_fast,
        max_steps: opts.max_steps,
    };
    let tol = opts.endpoint_rel * amp;
    let sol = ode::dopri5(
        |y: &DVector<f64>| Ok(DVector::from_element(1, f(y[0])?)),
        0.0,
        DVector::from_element(1, n0),
        dir * opts.budget / mu_slow,
        &ode_opts,
        |_, y| (y[0] - 1.0).abs() < tol,
    )?;
    if sol.termination != ode::Termination::Stopped {
        return Err(Error::ConnectionNotFound(format!(
            "n did not reach 1 within the integration budget ({:?})",
            sol.termination
        )));
    }
    let mut grid = sol.t.clone();
    let mut nbar: Vec<f64> = sol.y.iter().map(|v| v[0]).collect();
    if dir < 0.0 {
        grid.reverse();
        nbar.reverse();
    }
    shift_to_level(&mut grid, &nbar, 0.5 * (1.0 + nc));

    let (ns, rs) = (params.n_star, params.r_star);
    let ws = params.w_star();
    let mut states = Vec::with_capacity(nbar.len());
    for &nb in &nbar {
        let r = rs * r_kappa(nb, kappa, &bar)?;
        states.push(EulerState::new(r, r - ns * nb, ws).to_vector());
    }
    let w_star = params.state_star().to_vector();
    let r_cross = rs * r_kappa(nc, kappa, &bar)?;
    let w_cross = EulerState::new(r_cross, r_cross - ns * nc, ws).to_vector();
    let orientation = if dir > 0.0 { Orientation::StarAtPlusInfinity } else { Orientation::StarAtMinusInfinity };
    let (w_minus, w_plus) = match orientation {
        Orientation::StarAtMinusInfinity => (w_star.clone(), w_cross),
        Orientation::StarAtPlusInfinity => (w_cross, w_star.clone()),
    };

    // defect of (r − n)p′(n)/r² n′ = u*(r*/r − n*/n), n′ by finite differences
    let nphys: Vec<f64> = nbar.iter().map(|x| ns * x).collect();
    let law = &params.law;
    let mut residual_sup = 0.0f64;
    let m = grid.len();
    for i in 0..m {
        let start = i.saturating_sub(2).min(m.saturating_sub(5));
        let end = (start + 5).min(m);
        let wts = linalg::fd_weights(grid[i], &grid[start..end]);
        let dn: f64 = wts.iter().zip(&nphys[start..end]).map(|(w, v)| w * v).sum();
        let (n, r) = (nphys[i], states[i][0]);
        let lhs = (r - n) * law.dp(n)? / (r * r) * dn;
        let rhs = params.u_star * (rs / r - ns / n);
        residual_sup = residual_sup.max((lhs - rhs).abs());
    }
    let model = params.model()?;
    let local_residual = profile_residuals(&model, &grid, &states, &w_star, 0.0)?;
    Ok(ProfileSolution {
        model,
        grid,
        states,
        w_minus,
        w_plus,
        w_star,
        orientation,
        c: 0.0,
        residual_sup,
        local_residual,
        monotone: strictly_monotone(&nphys),
    })
}

#[derive(Debug)]
enum Failure {
    Density,
    Escaped,
    Budget,
    Solver(Error),
}

struct Connection {
    grid: Vec<f64>,
    path: Vec<DVector<f64>>,
    /// index of the equilibrium reached as y → −∞
    minus: usize,
}

/// Heteroclinic connection between `eqs[0]` and `eqs[1]` of an autonomous
/// planar field by shooting along eigendirections. Saddle equilibria are
/// tried first, `eqs[0]` before `eqs[1]`. `allowed_minus` restricts which
/// equilibrium may be the y → −∞ limit.
fn connect<F, V>(
    field: F,
    eqs: [&DVector<f64>; 2],
    allowed_minus: Option<usize>,
    density_ok: V,
    opts: &ProfileOptions,
) -> Result<Connection>
where
    F: Fn(&DVector<f64>) -> Result<DVector<f64>>,
    V: Fn(&DVector<f64>) -> bool,
{
    let jump = (eqs[1] - eqs[0]).norm();
    if jump < 1e-14 {
        return Err(Error::ZeroAmplitude("endpoints coincide".into()));
    }
    // linearizations
    let mut lin = Vec::new();
    for e in eqs {
        let j = ode::fd_jacobian(&mut |v: &DVector<f64>| field(v), e, &field(e)?)?;
        let ev = linalg::eigenvalues(&j);
        lin.push((j, ev));
    }
    let slow = |ev: &[num_complex::Complex64]| ev.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
    let mu_ref = lin.iter().map(|(_, ev)| slow(ev)).fold(0.0, f64::max);
    let mu_min = lin.iter().map(|(_, ev)| slow(ev)).fold(f64::INFINITY, f64::min);
    if !(mu_ref > 0.0 && mu_min > 0.0) {
        return Err(Error::numeric("degenerate linearization at an equilibrium"));
    }

    struct Cand {
        from: usize,
        dir: DVector<f64>,
        time_sign: f64,
        saddle: bool,
        toward: f64,
    }
    let mut cands = Vec::new();
    for (i, (j, ev)) in lin.iter().enumerate() {
        let saddle = j.determinant() < 0.0;
        let to_other = (eqs[1 - i] - eqs[i]) / jump;
        for z in ev {
            if z.im.abs() > 1e-12 * z.norm() || z.re == 0.0 {
                continue;
            }
            let time_sign = z.re.signum();
            let minus = if time_sign > 0.0 { i } else { 1 - i };
            if allowed_minus.is_some_and(|a| a != minus) {
                continue;
            }
            let mut v = linalg::null_vector(&(j - DMatrix::identity(2, 2) * z.re))?;
            v.normalize_mut();
            for s in [1.0, -1.0] {
                let d = &v * s;
                let toward = d.dot(&to_other);
                cands.push(Cand { from: i, dir: d, time_sign, saddle, toward });
            }
        }
    }
    cands.sort_by(|a, b| {
        b.saddle
            .cmp(&a.saddle)
            .then(a.from.cmp(&b.from))
            .then(b.toward.total_cmp(&a.toward))
    });
    if cands.is_empty() {
        return Err(Error::ConnectionNotFound("no admissible manifold direction at either equilibrium".into()));
    }

    let tol = opts.endpoint_rel * jump;
    let ode_opts = ode::OdeOptions {
        rtol: opts.rtol,
        atol: opts.atol,
        h_init: Some(0.1 * opts.step_frac / mu_ref),
        h_max: opts.step_frac / mu_ref,
        h_min: 1e-16 / mu_ref,
        max_steps: opts.max_steps,
    };
    let mut failures = Vec::new();
    for c in &cands {
        let start = eqs[c.from] + &c.dir * (opts.offset_rel * jump);
        let target = eqs[1 - c.from];
        let origin = eqs[c.from];
        let reason: Cell<Option<&'static str>> = Cell::new(None);
        let sol = ode::rosenbrock4(
            |v: &DVector<f64>| field(v),
            0.0,
            start,
            c.time_sign * opts.budget / mu_min,
            &ode_opts,
            |_, v| {
                if (v - target).norm() < tol {
                    return true;
                }
                if !density_ok(v) {
                    reason.set(Some("density"));
                    return true;
                }
                if (v - target).norm() > 10.0 * jump && (v - origin).norm() > 10.0 * jump {
                    reason.set(Some("escaped"));
                    return true;
                }
                false
            },
        );
        let outcome = match sol {
            Err(e) => Err(Failure::Solver(e)),
            Ok(s) => match (s.termination, reason.get()) {
                (ode::Termination::Stopped, None) => Ok(s),
                (_, Some("density")) => Err(Failure::Density),
                (_, Some(_)) => Err(Failure::Escaped),
                _ => Err(Failure::Budget),
            },
        };
        match outcome {
            Ok(s) => {
                let mut grid = s.t;
                let mut path = s.y;
                if c.time_sign < 0.0 {
                    grid.reverse();
                    path.reverse();
                }
                let minus = if c.time_sign > 0.0 { c.from } else { 1 - c.from };
                return Ok(Connection { grid, path, minus });
            }
            Err(f) => failures.push(f),
        }
    }
    match &failures[0] {
        Failure::Density => Err(Error::Admissibility(
            "particle density vanished along the manifold leaving the saddle".into(),
        )),
        other => {
            let what = match other {
                Failure::Solver(e) => e.to_string(),
                Failure::Escaped => "orbit left the neighbourhood of both equilibria".into(),
                _ => "integration budget exhausted".into(),
            };
            Err(Error::ConnectionNotFound(format!(
                "{} candidate directions failed; first: {what}",
                failures.len()
            )))
        }
    }
}

/// Positive-temperature Euler profile from the (n, r) system.
pub fn profile_theta(params: &ReducedParams, opts: &ProfileOptions) -> Result<ProfileSolution> {
    if !(params.theta > 0.0) {
        return Err(Error::domain("profile_theta requires eps > 0"));
    }
    require_sharp_regime(params)?;
    let eq = n_cross_eps(params.kappa, params.tau, params.eps, &params.law_rescaled)?;
    let (ns, rs, th) = (params.n_star, params.r_star, params.theta);
    let ws = params.w_star();
    let law = params.law.clone();
    let p_star = params.p_star;
    let rho_s = rs - ns;
    let field = |v: &DVector<f64>| -> Result<DVector<f64>> {
        let (n, r) = (v[0], v[1]);
        let rho = r - n;
        if !(n > 0.0 && rho > 0.0) {
            return Err(Error::domain("state left the physical region"));
        }
        let (p, dp, _) = law.eval(n)?;
        let q = 1.0 / r - 1.0 / rs + (p - p_star + th * (rho - rho_s)) / (ws * ws);
        let dr = -ws * r * r * q / (th * rho);
        let dn = (ws * (n / r - ns / rs) + th * n * n / (r * r) * dr) * r * r / (n * (rho * dp + th * n));
        Ok(DVector::from_vec(vec![dn, dr]))
    };
    let e_cross = DVector::from_vec(vec![ns * eq.n_cross, rs * eq.r_cross]);
    let e_star = DVector::from_vec(vec![ns, rs]);
    let conn = connect(
        field,
        [&e_cross, &e_star],
        None,
        |v| v[1] - v[0] > DENSITY_MIN && v[0] > DENSITY_MIN,
        opts,
    )?;
    let mut grid = conn.grid;
    let nvals: Vec<f64> = conn.path.iter().map(|v| v[0]).collect();
    shift_to_level(&mut grid, &nvals, 0.5 * ns * (1.0 + eq.n_cross));
    let states: Vec<DVector<f64>> = conn
        .path
        .iter()
        .map(|v| EulerState::new(v[1], v[1] - v[0], ws).to_vector())
        .collect();
    let w_star = params.state_star().to_vector();
    let w_cross = EulerState::new(e_cross[1], e_cross[1] - e_cross[0], ws).to_vector();
    let orientation = if conn.minus == 1 { Orientation::StarAtMinusInfinity } else { Orientation::StarAtPlusInfinity };
    let (w_minus, w_plus) = match orientation {
        Orientation::StarAtMinusInfinity => (w_star.clone(), w_cross),
        Orientation::StarAtPlusInfinity => (w_cross, w_star.clone()),
    };
    let model = params.model()?;
    let local_residual = profile_residuals(&model, &grid, &states, &w_star, 0.0)?;
    let residual_sup = local_residual[1..local_residual.len() - 1].iter().copied().fold(0.0, f64::max);
    Ok(ProfileSolution {
        model,
        grid,
        states,
        w_minus,
        w_plus,
        w_star,
        orientation,
        c: 0.0,
        residual_sup,
        local_residual,
        monotone: strictly_monotone(&nvals),
    })
}

/// Dispatches on θ: scalar path for θ = 0, stiff path otherwise.
pub fn profile_euler(params: &ReducedParams, opts: Option<&ProfileOptions>) -> Result<ProfileSolution> {
    if params.theta == 0.0 {
        profile_theta0(params, opts.unwrap_or(&ProfileOptions::scalar()))
    } else {
        profile_theta(params, opts.unwrap_or(&ProfileOptions::stiff()))
    }
}

/// Burgers profile W′ = D(W)⁻¹(F(W) − F(W*) − c(W − W*)) with W* at y → −∞.
pub fn profile_burgers(
    w_star: &BurgersState,
    w_cross: &BurgersState,
    c: f64,
    theta: f64,
    opts: &ProfileOptions,
) -> Result<ProfileSolution> {
    if !(theta > 0.0) {
        return Err(Error::domain("profile_burgers requires theta > 0"));
    }
    let model = ModelDescriptor::burgers(theta)?;
    let (ws, wc) = (w_star.to_vector(), w_cross.to_vector());
    if (&wc - &ws).norm() < 1e-14 * (1.0 + ws.norm()) {
        return Err(Error::ZeroAmplitude("W_cross equals W_star".into()));
    }
    let scale = 1.0 + model.flux(&ws)?.norm();
    let rh = rh_residual(&model, &ws, &wc, c)?.norm();
    if rh > 1e-10 * scale {
        return Err(Error::domain(format!("(W_star, W_cross, c) violates Rankine–Hugoniot by {rh:e}")));
    }
    for w in [&ws, &wc] {
        let det = model.diffusion(w)?.determinant();
        if det < 1e-14 {
            return Err(Error::SingularDiffusion { det });
        }
    }
    let field = |v: &DVector<f64>| -> Result<DVector<f64>> {
        if !(v[0] > 0.0) {
            return Err(Error::domain("particle density left the physical region"));
        }
        let d = model.diffusion(v)?;
        let det = d.determinant();
        if det < 1e-14 {
            return Err(Error::SingularDiffusion { det });
        }
        let rhs = rh_residual(&model, &ws, v, c)?;
        d.lu().solve(&rhs).ok_or(Error::SingularDiffusion { det })
    };
    let conn = connect(field, [&wc, &ws], Some(1), |v| v[0] > DENSITY_MIN, opts).map_err(|e| match e {
        Error::Admissibility(m) => Error::ConnectionNotFound(m),
        other => other,
    })?;
    let mut grid = conn.grid;
    let rho: Vec<f64> = conn.path.iter().map(|v| v[0]).collect();
    shift_to_level(&mut grid, &rho, 0.5 * (w_star.rho + w_cross.rho));
    let local_residual = profile_residuals(&model, &grid, &conn.path, &ws, c)?;
    let residual_sup = local_residual[1..local_residual.len() - 1].iter().copied().fold(0.0, f64::max);
    Ok(ProfileSolution {
        model,
        grid,
        states: conn.path,
        w_minus: ws.clone(),
        w_plus: wc,
        w_star: ws,
        orientation: Orientation::StarAtMinusInfinity,
        c,
        residual_sup,
        local_residual,
        monotone: strictly_monotone(&rho),
    })
}

/// Distance from (n, r) to the graph of r_κ over [min(1, n_×), max(1, n_×)],
/// all in rescaled variables.
pub fn distance_to_theta0_orbit(n: f64, r: f64, kappa: f64, n_cross0: f64, law_rescaled: &PressureLaw) -> Result<f64> {
    let (a, b) = (n_cross0.min(1.0), n_cross0.max(1.0));
    let d2 = |s: f64| match r_kappa(s, kappa, law_rescaled) {
        Ok(rk) => (s - n).powi(2) + (rk - r).powi(2),
        Err(_) => f64::INFINITY,
    };
    // coarse scan, then golden-section refinement around the best node
    let k = 200;
    let (mut best, mut best_v) = (a, d2(a));
    for i in 1..=k {
        let s = a + (b - a) * i as f64 / k as f64;
        let v = d2(s);
        if v < best_v {
            best = s;
            best_v = v;
        }
    }
    let h = (b - a) / k as f64;
    let (_, v) = roots::golden_section_min(d2, (best - h).max(a), (best + h).min(b), 1e-14);
    Ok(v.min(best_v).sqrt())
}

impl ProfileSolution {
    /// Rescaled (n̄, r̄) orbit of an Euler profile.
    pub fn rescaled_orbit(&self, params: &ReducedParams) -> Vec<(f64, f64)> {
        debug_assert_eq!(self.model.kind(), ModelKind::EulerFP);
        self.states
            .iter()
            .map(|w| {
                let s = EulerState::from_vector(w);
                (s.n() / params.n_star, s.r / params.r_star)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gamma2() -> PressureLaw {
        PressureLaw::gamma_law(1.0, 2.0).unwrap()
    }

    #[test]
    fn reduced_params_examples() {
        let p = ReducedParams::new(1.0, 2.0, 1.5f64.sqrt(), &gamma2(), 0.7).unwrap();
        assert!((p.tau - 0.5).abs() < 1e-15);
        assert!((p.kappa - 3.0).abs() < 1e-14);
        assert!((p.kappa_star - 2.0).abs() < 1e-15);
        assert!((p.eps - 1.4).abs() < 1e-15);
        let p = ReducedParams::new(1.0, 4.0, 1.0, &gamma2(), 0.0).unwrap();
        assert_eq!((p.tau, p.kappa, p.eps), (0.25, 4.0, 0.0));
        assert!(matches!(ReducedParams::new(2.0, 2.0, 1.0, &gamma2(), 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn g_kappa_examples() {
        let bar = gamma2();
        assert_eq!(g_kappa(1.0, 3.0, &bar).unwrap().0, 0.0);
        let nx = (13f64.sqrt() - 1.0) / 2.0;
        assert!(g_kappa(nx, 3.0, &bar).unwrap().0.abs() < 1e-14);
        let nb = n_bar(3.0, &bar).unwrap();
        let v = g_kappa(nb * (1.0 - 1e-12), 3.0, &bar).unwrap().0;
        assert!((v + 1.0 / nb).abs() < 1e-10);
        assert!(matches!(g_kappa(nb * 1.01, 3.0, &bar), Err(Error::Domain(_))));
    }

    #[test]
    fn n_cross_examples() {
        let bar = gamma2();
        let nc = n_cross(3.0, &bar).unwrap();
        assert!((nc.n - (13f64.sqrt() - 1.0) / 2.0).abs() < 1e-13);
        assert_eq!(n_cross(2.0, &bar).unwrap(), NCross { n: 1.0, degenerate: true });
        assert_eq!(kappa_of_n(2.0, &bar).unwrap(), 6.0);
        assert!((n_cross(6.0, &bar).unwrap().n - 2.0).abs() < 1e-13);
        let nc = n_cross(0.7, &bar).unwrap();
        assert!(nc.n < 1.0);
    }

    #[test]
    fn tau_sharp_examples() {
        let bar = gamma2();
        let t = tau_sharp(2.0, &bar).unwrap();
        assert!((t.tau_hash - 1.0).abs() < 1e-12 && (t.n_hash - 1.0).abs() < 1e-12);
        let t = tau_sharp(3.0, &bar).unwrap();
        assert!((t.n_hash - (4.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert!((t.tau_hash - 0.974_278_579_257_493_6).abs() < 1e-10, "{}", t.tau_hash);
        assert!(tau_sharp(1e-3, &bar).unwrap().tau_hash < 0.05);
    }

    #[test]
    fn n_cross_eps_examples() {
        let bar = gamma2();
        let e = n_cross_eps(3.0, 0.3, 0.0, &bar).unwrap();
        assert_eq!(e.n_cross, e.n_cross0);
        assert!((e.first_order_coeff + 0.2529).abs() < 1e-3);
        let e = n_cross_eps(3.0, 0.3, 1e-2, &bar).unwrap();
        assert!(e.n_cross < e.n_cross0);
        let (g, _) = g_kappa(e.n_cross, 3.0, &bar).unwrap();
        assert!((g - 1e-2 * 0.7 / 3.0 * (e.n_cross - 1.0)).abs() < 1e-12);
        assert!(matches!(n_cross_eps(2.0, 0.3, 0.1, &bar), Err(Error::ZeroAmplitude(_))));
    }

    fn fig_params(theta: f64, factor: f64) -> ReducedParams {
        let bar = gamma2();
        let tau = factor * tau_sharp(3.0, &bar).unwrap().tau_hash;
        let p0 = ReducedParams::from_reduced(tau, 3.0, 1.0, 1.0, &gamma2(), 0.0).unwrap();
        // θ from ε: ε = r*θ/p*
        ReducedParams::from_reduced(tau, 3.0, 1.0, 1.0, &gamma2(), theta * p0.p_star / p0.r_star).unwrap()
    }

    #[test]
    fn theta0_profile() {
        let p = fig_params(0.0, 0.3);
        let prof = profile_theta0(&p, &ProfileOptions::scalar()).unwrap();
        assert!(prof.monotone);
        assert!(prof.residual_sup <= 1e-8, "{}", prof.residual_sup);
        let nx = (13f64.sqrt() - 1.0) / 2.0;
        let ends: Vec<f64> = [&prof.states[0], prof.states.last().unwrap()]
            .iter()
            .map(|w| EulerState::from_vector(w).n())
            .collect();
        let mut e = ends.clone();
        e.sort_by(f64::total_cmp);
        assert!((e[0] - 1.0).abs() < 1e-6 && (e[1] - nx).abs() < 1e-6);
        assert!(prof.states.iter().all(|w| w[1] > 0.0));
        // κ > κ* and u* > 0: n increases from 1 to n_×
        assert_eq!(prof.orientation, Orientation::StarAtMinusInfinity);
        assert!(profile_residual(&prof.model, &prof, 0.0).unwrap() < 1e-6);
        let p = fig_params(0.0, 1.01);
        assert!(matches!(profile_theta0(&p, &ProfileOptions::scalar()), Err(Error::Admissibility(_))));
        assert!(matches!(
            ReducedParams::from_tau_ratio(1.05, 3.0, 1.0, 1.0, &gamma2(), 0.0),
            Err(Error::Admissibility(_))
        ));
    }

    #[test]
    fn theta0_profile_constraint_holds() {
        let p = fig_params(0.0, 0.3);
        let prof = profile_theta0(&p, &ProfileOptions::scalar()).unwrap();
        for w in &prof.states {
            let s = EulerState::from_vector(w);
            let q = 1.0 / s.r - 1.0 / p.r_star + (p.law.p(s.n()).unwrap() - p.p_star) / (p.w_star() * p.w_star());
            assert!(q.abs() < 1e-12);
        }
    }

    #[test]
    fn residual_detects_corruption() {
        let p = fig_params(0.0, 0.3);
        let mut prof = profile_theta0(&p, &ProfileOptions::scalar()).unwrap();
        let constant = ProfileSolution {
            grid: vec![0.0, 1.0, 2.0, 3.0],
            states: vec![prof.w_star.clone(); 4],
            ..prof.clone()
        };
        assert!(profile_residual(&constant.model, &constant, 0.0).unwrap() < 1e-14);
        let mid = prof.states.len() / 2;
        prof.states[mid][1] += 1e-2;
        assert!(profile_residual(&prof.model, &prof, 0.0).unwrap() > 1e-4);
    }

    #[test]
    fn positive_temperature_profile() {
        let p = fig_params(1e-2, 0.3);
        let prof = profile_theta(&p, &ProfileOptions::stiff()).unwrap();
        assert!(prof.residual_sup <= 1e-6, "{}", prof.residual_sup);
        assert!(prof.monotone);
        let eq = n_cross_eps(p.kappa, p.tau, p.eps, &p.law_rescaled).unwrap();
        let first = EulerState::from_vector(&prof.states[0]);
        let last = EulerState::from_vector(prof.states.last().unwrap());
        let (a, b) = match prof.orientation {
            Orientation::StarAtMinusInfinity => (first, last),
            Orientation::StarAtPlusInfinity => (last, first),
        };
        assert!((a.n() - 1.0).abs() < 1e-6 && (b.n() - eq.n_cross).abs() < 1e-6);
    }

    #[test]
    fn burgers_profile_liu_side() {
        let ws = BurgersState::from_primitive(1.0, 0.0);
        let (wc, c) = crate::hugoniot::burgers_shock(&ws, 1.0, crate::hugoniot::BranchSign::Plus, 0.9).unwrap();
        let prof = profile_burgers(&ws, &wc, c, 1.0, &ProfileOptions::stiff()).unwrap();
        assert!(prof.residual_sup <= 1e-6, "{}", prof.residual_sup);
        assert!((&prof.states[0] - &prof.w_minus).norm() < 1e-6);
        assert!((prof.states.last().unwrap() - &prof.w_plus).norm() < 1e-6);
        assert!(matches!(profile_burgers(&ws, &ws, c, 1.0, &ProfileOptions::stiff()), Err(Error::ZeroAmplitude(_))));
        let (wc, c) = crate::hugoniot::burgers_shock(&ws, 1.0, crate::hugoniot::BranchSign::Plus, 1.1).unwrap();
        assert!(matches!(
            profile_burgers(&ws, &wc, c, 1.0, &ProfileOptions::stiff()),
            Err(Error::ConnectionNotFound(_))
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn n_cross_round_trip(kappa in 0.05f64..12.0, gamma in 1.2f64..4.0) {
            let bar = PressureLaw::gamma_law(1.0, gamma).unwrap();
            prop_assume!((kappa - gamma).abs() > 1e-3);
            let nc = n_cross(kappa, &bar).unwrap();
            prop_assert!((nc.n - 1.0) * (kappa - gamma) > 0.0);
            prop_assert!((kappa_of_n(nc.n, &bar).unwrap() - kappa).abs() <= 1e-10 * kappa.max(1.0));
        }

        #[test]
        fn reduced_round_trip(ns in 0.1f64..5.0, tau in 0.05f64..0.95, u in -3.0f64..3.0) {
            prop_assume!(u.abs() > 1e-3);
            let law = PressureLaw::gamma_law(1.7, 1.4).unwrap();
            let p = ReducedParams::new(ns, ns / tau, u, &law, 0.0).unwrap();
            let q = ReducedParams::from_reduced(p.tau, p.kappa, ns, u.signum(), &law, 0.0).unwrap();
            prop_assert!((q.u_star - u).abs() <= 1e-14 * (1.0 + u.abs()) * 4.0);
        }

        #[test]
        fn tau_sharp_below_one(kappa in 0.01f64..50.0, gamma in 1.2f64..4.0) {
            let bar = PressureLaw::gamma_law(1.0, gamma).unwrap();
            let t = tau_sharp(kappa, &bar).unwrap();
            prop_assert!(t.tau_hash <= 1.0 + 1e-12);
        }
    }
}
