//! Rankine–Hugoniot residuals, shock branches through a reference state and
//! the Liu admissibility check.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::models::{BurgersState, EulerState, ModelDescriptor, ModelKind, PressureLaw};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchSign {
    Plus,
    Minus,
}

impl BranchSign {
    pub fn value(self) -> f64 {
        match self {
            BranchSign::Plus => 1.0,
            BranchSign::Minus => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchParam {
    Rho,
    N,
}

#[derive(Debug, Clone)]
pub struct BranchSample {
    pub param: f64,
    pub state: DVector<f64>,
    pub c: f64,
    pub liu_ok: bool,
    /// ‖F(W) − F(W*) − c(W − W*)‖
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub struct HugoniotBranch {
    pub model: ModelDescriptor,
    pub sign: BranchSign,
    pub param_name: BranchParam,
    pub param_star: f64,
    pub w_star: DVector<f64>,
    /// Ascending in `param`.
    pub samples: Vec<BranchSample>,
    /// Characteristic speed at W*, the limit of c as param → param_star.
    pub limit_speed: f64,
}

/// F(W) − F(W*) − c(W − W*).
pub fn rh_residual(model: &ModelDescriptor, w_star: &DVector<f64>, w: &DVector<f64>, c: f64) -> Result<DVector<f64>> {
    Ok(model.flux(w)? - model.flux(w_star)? - (w - w_star) * c)
}

/// Far state and speed on the Burgers branch through `w_star` at density ρ ≥ 0.
pub fn burgers_shock(w_star: &BurgersState, theta: f64, sign: BranchSign, rho: f64) -> Result<(BurgersState, f64)> {
    let rs = w_star.rho;
    if !(rs > 0.0) {
        return Err(Error::domain(format!("reference density must be positive, got {rs}")));
    }
    if rho < 0.0 || !rho.is_finite() {
        return Err(Error::domain(format!("branch density must be nonnegative, got {rho}")));
    }
    let us = w_star.u();
    let r = 1.0 + rho;
    let big_delta2 = 4.0 * rs * r;
    let s = (us * us + theta * big_delta2).sqrt();
    let jump_u = (rho - rs) * (us + sign.value() * s) / (2.0 * rs * r);
    let c = us + sign.value() * (rho / rs) * (s + sign.value() * us) / (2.0 * r);
    Ok((BurgersState::from_primitive(rho, us + jump_u), c))
}

/// Far state and speed on the Euler branch through `w_star` at fluid density n.
pub fn euler_shock(
    w_star: &EulerState,
    law: &PressureLaw,
    theta: f64,
    sign: BranchSign,
    n: f64,
) -> Result<(EulerState, f64)> {
    let (ns, rs, us, rhos) = (w_star.n(), w_star.r, w_star.u(), w_star.rho);
    if !(ns > 0.0 && rhos > 0.0) {
        return Err(Error::domain("reference state needs n > 0 and rho > 0"));
    }
    if !(n > 0.0) {
        return Err(Error::domain(format!("branch fluid density must be positive, got {n}")));
    }
    let rho = n * rhos / ns;
    let quotient = if (n - ns).abs() < 1e-8 * ns {
        law.dp(ns)?
    } else {
        (law.p(n)? - law.p(ns)?) / (n - ns)
    };
    let radicand = (n / rs) * (theta * rhos / ns + quotient);
    if radicand < 0.0 {
        return Err(Error::numeric(format!("negative radicand {radicand} on Euler branch")));
    }
    let c = us + sign.value() * radicand.sqrt();
    let u = us + (c - us) * (n - ns) / n;
    Ok((EulerState::from_primitive(n, rho, u), c))
}

/// Contact jump of the linearly degenerate field: same velocity, same total
/// pressure p(n) + θρ, speed u*.
pub fn euler_contact(w_star: &EulerState, law: &PressureLaw, theta: f64, rho: f64) -> Result<(EulerState, f64)> {
    let target = law.p(w_star.n())? + theta * (w_star.rho - rho);
    if target < 0.0 || rho < 0.0 {
        return Err(Error::domain("no contact state with nonnegative pressure"));
    }
    let n = law.inverse(target)?;
    Ok((EulerState::from_primitive(n, rho, w_star.u()), w_star.u()))
}

/// Parameters on `[lo, hi]`, geometrically clustered towards `star`.
pub fn sample_params(star: f64, lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let side = |a: f64, b: f64, k: usize| -> Vec<f64> {
        // offsets from star in [a, b], a ≥ 0
        if k == 0 {
            return vec![];
        }
        let a = if a > 0.0 { a } else { 1e-4 * b };
        if k == 1 {
            return vec![b];
        }
        (0..k).map(|i| a * (b / a).powf(i as f64 / (k - 1) as f64)).collect()
    };
    let mut out: Vec<f64> = if lo < star && star < hi {
        let k_lo = n / 2;
        let mut v: Vec<f64> = side(0.0, star - lo, k_lo).into_iter().map(|d| star - d).collect();
        v.extend(side(0.0, hi - star, n - k_lo).into_iter().map(|d| star + d));
        v
    } else if star <= lo {
        side(lo - star, hi - star, n).into_iter().map(|d| star + d).collect()
    } else {
        side(star - hi, star - lo, n).into_iter().map(|d| star - d).collect()
    };
    out.sort_by(f64::total_cmp);
    out
}

fn finish_branch(mut branch: HugoniotBranch) -> Result<HugoniotBranch> {
    let scale = 1.0 + branch.model.flux(&branch.w_star)?.norm();
    for s in &branch.samples {
        if !(s.residual <= 1e-10 * scale) {
            return Err(Error::numeric(format!(
                "Rankine–Hugoniot residual {:e} at param {}",
                s.residual, s.param
            )));
        }
    }
    if branch.samples.len() >= 3 {
        let rep = liu_check(&branch)?;
        for (s, ok) in branch.samples.iter_mut().zip(rep.admissible) {
            s.liu_ok = ok;
        }
    }
    Ok(branch)
}

pub fn burgers_branch(
    w_star: &BurgersState,
    theta: f64,
    sign: BranchSign,
    rho_range: (f64, f64),
    n_samples: usize,
) -> Result<HugoniotBranch> {
    let (lo, hi) = (rho_range.0.min(rho_range.1), rho_range.0.max(rho_range.1));
    if !(lo > 0.0) {
        return Err(Error::domain(format!("Burgers branch range must lie in (0, inf), got [{lo}, {hi}]")));
    }
    let model = ModelDescriptor::burgers(theta)?;
    let ws = w_star.to_vector();
    let mut samples = Vec::with_capacity(n_samples);
    for rho in sample_params(w_star.rho, lo, hi, n_samples) {
        let (st, c) = burgers_shock(w_star, theta, sign, rho)?;
        let state = st.to_vector();
        let residual = rh_residual(&model, &ws, &state, c)?.norm();
        samples.push(BranchSample { param: rho, state, c, liu_ok: false, residual });
    }
    let limit_speed = burgers_shock(w_star, theta, sign, w_star.rho)?.1;
    finish_branch(HugoniotBranch {
        model,
        sign,
        param_name: BranchParam::Rho,
        param_star: w_star.rho,
        w_star: ws,
        samples,
        limit_speed,
    })
}

pub fn euler_branch(
    w_star: &EulerState,
    law: &PressureLaw,
    theta: f64,
    sign: BranchSign,
    n_range: (f64, f64),
    n_samples: usize,
) -> Result<HugoniotBranch> {
    let (lo, hi) = (n_range.0.min(n_range.1), n_range.0.max(n_range.1));
    if !(lo > 0.0) {
        return Err(Error::domain(format!("Euler branch range must lie in (0, inf), got [{lo}, {hi}]")));
    }
    let model = ModelDescriptor::euler(law.clone(), theta)?;
    let ws = w_star.to_vector();
    let mut samples = Vec::with_capacity(n_samples);
    for n in sample_params(w_star.n(), lo, hi, n_samples) {
        let (st, c) = euler_shock(w_star, law, theta, sign, n)?;
        let state = st.to_vector();
        let residual = rh_residual(&model, &ws, &state, c)?.norm();
        samples.push(BranchSample { param: n, state, c, liu_ok: false, residual });
    }
    let limit_speed = euler_shock(w_star, law, theta, sign, w_star.n())?.1;
    finish_branch(HugoniotBranch {
        model,
        sign,
        param_name: BranchParam::N,
        param_star: w_star.n(),
        w_star: ws,
        samples,
        limit_speed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Monotonicity {
    Increasing,
    Decreasing,
    Neither,
}

#[derive(Debug, Clone)]
pub struct LiuReport {
    /// Per sample: c(s) < c(σ) for every sampled σ strictly between the
    /// reference parameter and s, and for the limit c(param_star) = λ.
    pub admissible: Vec<bool>,
    pub monotonicity: Monotonicity,
    /// The speed fails the monotonicity proven for this branch sign
    /// (c₊ increasing, c₋ decreasing in the parameter).
    pub model_violation: bool,
}

pub fn liu_check(branch: &HugoniotBranch) -> Result<LiuReport> {
    let s = &branch.samples;
    if s.len() < 3 {
        return Err(Error::domain("liu_check needs at least three samples"));
    }
    let star = branch.param_star;
    let admissible = s
        .iter()
        .map(|a| {
            a.c < branch.limit_speed
                && s.iter()
                    .filter(|b| (b.param - star) * (a.param - star) > 0.0 && (b.param - star).abs() < (a.param - star).abs())
                    .all(|b| a.c < b.c)
        })
        .collect();
    // include the reference point in the difference sequence
    let mut pts: Vec<(f64, f64)> = s.iter().map(|x| (x.param, x.c)).collect();
    pts.push((star, branch.limit_speed));
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let inc = pts.windows(2).all(|w| w[1].1 > w[0].1);
    let dec = pts.windows(2).all(|w| w[1].1 < w[0].1);
    let monotonicity = if inc {
        Monotonicity::Increasing
    } else if dec {
        Monotonicity::Decreasing
    } else {
        Monotonicity::Neither
    };
    let expected = match branch.sign {
        BranchSign::Plus => Monotonicity::Increasing,
        BranchSign::Minus => Monotonicity::Decreasing,
    };
    let model_violation = match branch.model.kind() {
        ModelKind::BurgersFP | ModelKind::EulerFP => monotonicity != expected,
    };
    Ok(LiuReport { admissible, monotonicity, model_violation })
}

/// Whether [[p]]/[[n]] = (p(n) − p(n*))/(n − n*) increases along `ns`.
pub fn pressure_quotient_increasing(law: &PressureLaw, n_star: f64, ns: &[f64]) -> Result<bool> {
    let mut q = Vec::with_capacity(ns.len());
    let mut sorted = ns.to_vec();
    sorted.sort_by(f64::total_cmp);
    for &n in &sorted {
        q.push(if (n - n_star).abs() < 1e-8 * n_star {
            law.dp(n_star)?
        } else {
            (law.p(n)? - law.p(n_star)?) / (n - n_star)
        });
    }
    Ok(q.windows(2).all(|w| w[1] > w[0]))
}
