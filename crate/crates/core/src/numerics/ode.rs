//! Adaptive one-step integrators for autonomous systems y' = f(y).
//!
//! `dopri5` is the explicit Dormand–Prince 5(4) pair. `rosenbrock4` is the
//! Shampine 4(3) Rosenbrock pair (γ = 1/2, A-stable) with a
//! finite-difference Jacobian, meant for the stiff profile systems.
//! Both integrate towards `t_end`, which may lie below `t0`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Initial step magnitude; chosen automatically when `None`.
    pub h_init: Option<f64>,
    pub h_max: f64,
    pub h_min: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-8,
            atol: 1e-10,
            h_init: None,
            h_max: f64::INFINITY,
            h_min: 1e-14,
            max_steps: 200_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// The stop predicate fired.
    Stopped,
    ReachedEnd,
    StepBudget,
}

#[derive(Debug, Clone)]
pub struct OdeSolution {
    pub t: Vec<f64>,
    pub y: Vec<DVector<f64>>,
    pub termination: Termination,
    pub rejected: usize,
}

impl OdeSolution {
    pub fn last(&self) -> (f64, &DVector<f64>) {
        (*self.t.last().unwrap(), self.y.last().unwrap())
    }
}

fn err_norm(err: &DVector<f64>, y0: &DVector<f64>, y1: &DVector<f64>, o: &OdeOptions) -> f64 {
    let mut m = 0.0f64;
    for i in 0..err.len() {
        let sc = o.atol + o.rtol * y0[i].abs().max(y1[i].abs());
        m = m.max((err[i] / sc).abs());
    }
    m
}

fn initial_step(y: &DVector<f64>, f0: &DVector<f64>, span: f64, o: &OdeOptions) -> f64 {
    if let Some(h) = o.h_init {
        return h.min(o.h_max).min(span);
    }
    let d0 = y.amax().max(o.atol);
    let d1 = f0.amax().max(1e-300);
    (0.01 * d0 / d1).clamp(o.h_min * 10.0, o.h_max).min(span)
}

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Dormand–Prince 5(4) with first-same-as-last reuse.
pub fn dopri5<F, S>(
    mut f: F,
    t0: f64,
    y0: DVector<f64>,
    t_end: f64,
    opts: &OdeOptions,
    mut stop: S,
) -> Result<OdeSolution>
where
    F: FnMut(&DVector<f64>) -> Result<DVector<f64>>,
    S: FnMut(f64, &DVector<f64>) -> bool,
{
    let dir = if t_end >= t0 { 1.0 } else { -1.0 };
    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(&y)?;
    let mut h = initial_step(&y, &k1, (t_end - t0).abs(), opts);
    let mut sol = OdeSolution {
        t: vec![t],
        y: vec![y.clone()],
        termination: Termination::ReachedEnd,
        rejected: 0,
    };
    if stop(t, &y) {
        sol.termination = Termination::Stopped;
        return Ok(sol);
    }
    for _ in 0..opts.max_steps {
        let remaining = (t_end - t).abs();
        if remaining <= 0.0 {
            return Ok(sol);
        }
        h = h.min(remaining).min(opts.h_max);
        let hs = dir * h;
        let trial = (|| -> Result<(DVector<f64>, DVector<f64>, f64)> {
            let k2 = f(&(&y + &k1 * (hs * A21)))?;
            let k3 = f(&(&y + (&k1 * A31 + &k2 * A32) * hs))?;
            let k4 = f(&(&y + (&k1 * A41 + &k2 * A42 + &k3 * A43) * hs))?;
            let k5 = f(&(&y + (&k1 * A51 + &k2 * A52 + &k3 * A53 + &k4 * A54) * hs))?;
            let k6 = f(&(&y + (&k1 * A61 + &k2 * A62 + &k3 * A63 + &k4 * A64 + &k5 * A65) * hs))?;
            let y1 = &y + (&k1 * B1 + &k3 * B3 + &k4 * B4 + &k5 * B5 + &k6 * B6) * hs;
            let k7 = f(&y1)?;
            let e = (&k1 * E1 + &k3 * E3 + &k4 * E4 + &k5 * E5 + &k6 * E6 + &k7 * E7) * hs;
            let en = err_norm(&e, &y, &y1, opts);
            Ok((y1, k7, en))
        })();
        match trial {
            Ok((y1, k7, en)) if en.is_finite() && en <= 1.0 => {
                t += hs;
                y = y1;
                k1 = k7;
                sol.t.push(t);
                sol.y.push(y.clone());
                let fac = if en == 0.0 { 5.0 } else { (0.9 * en.powf(-0.2)).clamp(0.2, 5.0) };
                h *= fac;
                if stop(t, &y) {
                    sol.termination = Termination::Stopped;
                    return Ok(sol);
                }
                if (t_end - t).abs() <= 0.0 {
                    return Ok(sol);
                }
            }
            Ok((_, _, en)) => {
                sol.rejected += 1;
                let fac = if en.is_finite() { (0.9 * en.powf(-0.2)).clamp(0.1, 0.9) } else { 0.25 };
                h *= fac;
            }
            Err(e) => {
                sol.rejected += 1;
                h *= 0.25;
                if h < opts.h_min {
                    return Err(e);
                }
            }
        }
        if h < opts.h_min {
            return Err(Error::numeric(format!("step size underflow at t = {t}")));
        }
    }
    sol.termination = Termination::StepBudget;
    Ok(sol)
}

/// Finite-difference Jacobian of an autonomous vector field.
pub fn fd_jacobian<F>(f: &mut F, y: &DVector<f64>, fy: &DVector<f64>) -> Result<DMatrix<f64>>
where
    F: FnMut(&DVector<f64>) -> Result<DVector<f64>>,
{
    let m = y.len();
    let mut jac = DMatrix::zeros(fy.len(), m);
    let mut yp = y.clone();
    for j in 0..m {
        let h = f64::EPSILON.sqrt() * y[j].abs().max(1e-8);
        yp[j] = y[j] + h;
        let h = yp[j] - y[j];
        let fp = f(&yp)?;
        jac.set_column(j, &((fp - fy) / h));
        yp[j] = y[j];
    }
    Ok(jac)
}

const RGAM: f64 = 0.5;
const RA21: f64 = 2.0;
const RA31: f64 = 48.0 / 25.0;
const RA32: f64 = 6.0 / 25.0;
const RC21: f64 = -8.0;
const RC31: f64 = 372.0 / 25.0;
const RC32: f64 = 12.0 / 5.0;
const RC41: f64 = -112.0 / 125.0;
const RC42: f64 = -54.0 / 125.0;
const RC43: f64 = -2.0 / 5.0;
const RB1: f64 = 19.0 / 9.0;
const RB2: f64 = 1.0 / 2.0;
const RB3: f64 = 25.0 / 108.0;
const RB4: f64 = 125.0 / 108.0;
const RE1: f64 = 17.0 / 54.0;
const RE2: f64 = 7.0 / 36.0;
const RE4: f64 = 125.0 / 108.0;

/// Shampine's 4(3) Rosenbrock pair; Jacobian refreshed by finite differences
/// every step.
pub fn rosenbrock4<F, S>(
    mut f: F,
    t0: f64,
    y0: DVector<f64>,
    t_end: f64,
    opts: &OdeOptions,
    mut stop: S,
) -> Result<OdeSolution>
where
    F: FnMut(&DVector<f64>) -> Result<DVector<f64>>,
    S: FnMut(f64, &DVector<f64>) -> bool,
{
    let dir = if t_end >= t0 { 1.0 } else { -1.0 };
    let m = y0.len();
    let mut t = t0;
    let mut y = y0;
    let mut fy = f(&y)?;
    let mut h = initial_step(&y, &fy, (t_end - t0).abs(), opts);
    let mut sol = OdeSolution {
        t: vec![t],
        y: vec![y.clone()],
        termination: Termination::ReachedEnd,
        rejected: 0,
    };
    if stop(t, &y) {
        sol.termination = Termination::Stopped;
        return Ok(sol);
    }
    let mut jac = fd_jacobian(&mut f, &y, &fy)?;
    let mut fresh = true;
    for _ in 0..opts.max_steps {
        let remaining = (t_end - t).abs();
        if remaining <= 0.0 {
            return Ok(sol);
        }
        if !fresh {
            jac = fd_jacobian(&mut f, &y, &fy)?;
            fresh = true;
        }
        h = h.min(remaining).min(opts.h_max);
        let hs = dir * h;
        let trial = (|| -> Result<(DVector<f64>, DVector<f64>, f64)> {
            let a = DMatrix::<f64>::identity(m, m) / (RGAM * hs) - &jac;
            let lu = a.lu();
            let solve = |rhs: DVector<f64>| {
                lu.solve(&rhs)
                    .ok_or_else(|| Error::numeric("singular Rosenbrock stage matrix"))
            };
            let g1 = solve(fy.clone())?;
            let f2 = f(&(&y + &g1 * RA21))?;
            let g2 = solve(&f2 + &g1 * (RC21 / hs))?;
            let f3 = f(&(&y + &g1 * RA31 + &g2 * RA32))?;
            let g3 = solve(&f3 + (&g1 * RC31 + &g2 * RC32) / hs)?;
            let g4 = solve(&f3 + (&g1 * RC41 + &g2 * RC42 + &g3 * RC43) / hs)?;
            let y1 = &y + &g1 * RB1 + &g2 * RB2 + &g3 * RB3 + &g4 * RB4;
            let e = &g1 * RE1 + &g2 * RE2 + &g4 * RE4;
            let en = err_norm(&e, &y, &y1, opts);
            let f1 = f(&y1)?;
            Ok((y1, f1, en))
        })();
        match trial {
            Ok((y1, f1, en)) if en.is_finite() && en <= 1.0 => {
                t += hs;
                y = y1;
                fy = f1;
                fresh = false;
                sol.t.push(t);
                sol.y.push(y.clone());
                let fac = if en == 0.0 { 4.0 } else { (0.9 * en.powf(-0.25)).clamp(0.2, 4.0) };
                h *= fac;
                if stop(t, &y) {
                    sol.termination = Termination::Stopped;
                    return Ok(sol);
                }
            }
            Ok((_, _, en)) => {
                sol.rejected += 1;
                let fac = if en.is_finite() { (0.9 * en.powf(-1.0 / 3.0)).clamp(0.1, 0.9) } else { 0.25 };
                h *= fac;
            }
            Err(e) => {
                sol.rejected += 1;
                h *= 0.25;
                if h < opts.h_min {
                    return Err(e);
                }
            }
        }
        if h < opts.h_min {
            return Err(Error::numeric(format!("step size underflow at t = {t}")));
        }
    }
    sol.termination = Termination::StepBudget;
    Ok(sol)
}

/// One fixed step of each method, exposed for order verification.
#[doc(hidden)]
pub fn fixed_steps<F>(method: Method, mut f: F, y0: DVector<f64>, h: f64, n: usize) -> Result<DVector<f64>>
where
    F: FnMut(&DVector<f64>) -> Result<DVector<f64>>,
{
    let opts = OdeOptions {
        rtol: 1e300,
        atol: 1e300,
        h_init: Some(h.abs()),
        h_max: h.abs(),
        h_min: 0.0,
        max_steps: n + 1,
    };
    let t_end = h * n as f64;
    let sol = match method {
        Method::Dopri5 => dopri5(&mut f, 0.0, y0, t_end, &opts, |_, _| false)?,
        Method::Rosenbrock4 => rosenbrock4(&mut f, 0.0, y0, t_end, &opts, |_, _| false)?,
    };
    Ok(sol.y.last().unwrap().clone())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Dopri5,
    Rosenbrock4,
}
