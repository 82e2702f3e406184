//! Eigenstructure, genuine nonlinearity, symmetrizer and parabolicity checks,
//! Majda–Pego symbol scan, Kawashima–Shizuta and Pego transversality
//! quantities.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::models::{BurgersState, EulerState, ModelDescriptor, ModelKind, PressureLaw, ViscousSystem};
use crate::numerics::linalg;

const SIGN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldClass {
    GenuinelyNonlinear,
    LinearlyDegenerate,
    NearDegenerate,
}

#[derive(Debug, Clone)]
pub struct GnField {
    pub index: usize,
    /// ∇λ·r with r scaled so that its sign-fixing component equals one.
    pub value: f64,
    /// ∇λ·r with the unit right eigenvector.
    pub unit_value: f64,
    pub class: FieldClass,
}

#[derive(Debug, Clone)]
pub struct SpectralReport {
    pub eigenvalues: Vec<f64>,
    /// Unit right eigenvectors as columns.
    pub right_vectors: DMatrix<f64>,
    /// Left eigenvectors as rows, scaled so that ℓ_i·r_i = 1.
    pub left_vectors: DMatrix<f64>,
    /// Empty when the state is not strictly hyperbolic.
    pub gn_indicators: Vec<GnField>,
    pub strictly_hyperbolic: bool,
    pub degenerate_fields: Vec<usize>,
    /// Largest relative gap between closed-form and generic eigenvalues.
    pub solver_mismatch: f64,
}

impl SpectralReport {
    pub fn right(&self, k: usize) -> DVector<f64> {
        self.right_vectors.column(k).into_owned()
    }

    pub fn left(&self, k: usize) -> DVector<f64> {
        self.left_vectors.row(k).transpose()
    }
}

fn spectral_scale(ev: &[f64]) -> f64 {
    1.0 + ev.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn min_gap(ev: &[f64]) -> f64 {
    ev.windows(2).map(|p| p[1] - p[0]).fold(f64::INFINITY, f64::min)
}

pub fn is_strictly_hyperbolic(ev: &[f64]) -> bool {
    min_gap(ev) > 1e-10 * spectral_scale(ev)
}

/// Eigenvalues of dF from the generic dense solver, ascending real parts.
pub fn generic_eigenvalues(model: &ModelDescriptor, w: &DVector<f64>) -> Result<Vec<Complex64>> {
    Ok(linalg::eigenvalues(&model.jacobian(w)?))
}

pub fn eigenstructure(model: &ModelDescriptor, w: &DVector<f64>) -> Result<SpectralReport> {
    let a = model.jacobian(w)?;
    let ev = model.eigenvalues(w)?;
    let m = ev.len();
    let generic = linalg::eigenvalues(&a);
    let scale = spectral_scale(&ev);
    let solver_mismatch = ev
        .iter()
        .zip(&generic)
        .map(|(x, z)| (Complex64::new(*x, 0.0) - z).norm() / scale)
        .fold(0.0, f64::max);

    let mut right = DMatrix::zeros(m, m);
    let mut left = DMatrix::zeros(m, m);
    for (k, &lam) in ev.iter().enumerate() {
        let shifted = &a - DMatrix::identity(m, m) * lam;
        let mut r = linalg::null_vector(&shifted)?;
        r.normalize_mut();
        linalg::fix_sign(&mut r, SIGN_TOL);
        let mut l = linalg::null_vector(&shifted.transpose())?;
        let lr = l.dot(&r);
        if lr.abs() > 1e-300 {
            l /= lr;
        }
        right.set_column(k, &r);
        left.set_row(k, &l.transpose());
    }
    let strictly_hyperbolic = is_strictly_hyperbolic(&ev);
    let gn_indicators = if strictly_hyperbolic {
        genuine_nonlinearity_with(model, w, &ev, &right)?
    } else {
        Vec::new()
    };
    let degenerate_fields = gn_indicators
        .iter()
        .filter(|g| g.class != FieldClass::GenuinelyNonlinear)
        .map(|g| g.index)
        .collect();
    Ok(SpectralReport {
        eigenvalues: ev,
        right_vectors: right,
        left_vectors: left,
        gn_indicators,
        strictly_hyperbolic,
        degenerate_fields,
        solver_mismatch,
    })
}

/// Central-difference gradients of the ordered eigenvalues.
fn eigenvalue_gradients(model: &ModelDescriptor, w: &DVector<f64>, ev: &[f64]) -> Result<DMatrix<f64>> {
    let m = ev.len();
    let gap = min_gap(ev);
    let mut grad = DMatrix::zeros(m, m);
    for j in 0..m {
        let mut h = 1e-6 * (1.0 + w[j].abs());
        let mut attempt = 0;
        loop {
            let mut wp = w.clone();
            let mut wm = w.clone();
            wp[j] += h;
            wm[j] -= h;
            let lp = model.eigenvalues(&wp)?;
            let lm = model.eigenvalues(&wm)?;
            // sorted matching is valid while no eigenvalue moves by half a gap
            let drift = ev
                .iter()
                .zip(lp.iter().zip(&lm))
                .map(|(e, (p, q))| (p - e).abs().max((q - e).abs()))
                .fold(0.0, f64::max);
            if drift < 0.5 * gap && is_strictly_hyperbolic(&lp) && is_strictly_hyperbolic(&lm) {
                for k in 0..m {
                    grad[(k, j)] = (lp[k] - lm[k]) / (2.0 * h);
                }
                break;
            }
            attempt += 1;
            if attempt >= 3 {
                return Err(Error::numeric(format!(
                    "eigenvalue crossing within the difference stencil in component {j}"
                )));
            }
            h /= 10.0;
        }
    }
    Ok(grad)
}

fn genuine_nonlinearity_with(
    model: &ModelDescriptor,
    w: &DVector<f64>,
    ev: &[f64],
    right: &DMatrix<f64>,
) -> Result<Vec<GnField>> {
    let grad = eigenvalue_gradients(model, w, ev)?;
    let scale = spectral_scale(ev);
    let mut out = Vec::with_capacity(ev.len());
    for k in 0..ev.len() {
        let r = right.column(k);
        let g = grad.row(k);
        let unit_value = (g * r)[(0, 0)];
        let pivot = r.iter().copied().find(|x| x.abs() > SIGN_TOL).unwrap_or(1.0);
        let value = unit_value / pivot;
        let class = if unit_value.abs() <= 1e-8 * scale {
            FieldClass::LinearlyDegenerate
        } else if unit_value.abs() <= 1e-6 * scale {
            FieldClass::NearDegenerate
        } else {
            FieldClass::GenuinelyNonlinear
        };
        out.push(GnField { index: k, value, unit_value, class });
    }
    Ok(out)
}

/// Per-field ∇λ·r by finite differences; needs strict hyperbolicity.
pub fn genuine_nonlinearity(model: &ModelDescriptor, w: &DVector<f64>) -> Result<Vec<GnField>> {
    let rep = eigenstructure(model, w)?;
    if !rep.strictly_hyperbolic {
        return Err(Error::domain("genuine nonlinearity needs a strictly hyperbolic state"));
    }
    Ok(rep.gn_indicators)
}

#[derive(Debug, Clone)]
pub struct SymmetrizerReport {
    /// ‖XA − (XA)ᵀ‖
    pub xa_defect: f64,
    /// ‖XD − (XD)ᵀ‖
    pub xd_defect: f64,
    /// Smallest eigenvalue of (XD + XDᵀ)/2.
    pub xd_min_eig: f64,
    /// Numerical rank of (XD + XDᵀ)/2.
    pub xd_rank: usize,
    pub xd: DMatrix<f64>,
}

pub fn symmetrizer_report(model: &ModelDescriptor, w: &DVector<f64>) -> Result<SymmetrizerReport> {
    let x = model.entropy_pack(w)?.hessian;
    let xa = &x * model.jacobian(w)?;
    let xd = &x * model.diffusion(w)?;
    let ev = linalg::sym_eigenvalues(&linalg::sym_part(&xd));
    let top = ev.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let xd_rank = ev.iter().filter(|v| **v > 1e-10 * top.max(1e-300)).count();
    Ok(SymmetrizerReport {
        xa_defect: linalg::antisym_norm(&xa),
        xd_defect: linalg::antisym_norm(&xd),
        xd_min_eig: ev[0],
        xd_rank,
        xd,
    })
}

#[derive(Debug, Clone)]
pub struct KsReport {
    /// |D r_k| for unit right eigenvectors.
    pub norms: Vec<f64>,
    pub failing_fields: Vec<usize>,
}

impl KsReport {
    pub fn passes(&self) -> bool {
        self.failing_fields.is_empty()
    }
}

pub fn kawashima_shizuta(model: &ModelDescriptor, w: &DVector<f64>) -> Result<KsReport> {
    let rep = eigenstructure(model, w)?;
    let d = model.diffusion(w)?;
    let dn = d.norm();
    let norms: Vec<f64> = (0..rep.eigenvalues.len()).map(|k| (&d * rep.right(k)).norm()).collect();
    let failing_fields = norms
        .iter()
        .enumerate()
        .filter(|(_, v)| **v <= 1e-12 * dn)
        .map(|(k, _)| k)
        .collect();
    Ok(KsReport { norms, failing_fields })
}

#[derive(Debug, Clone)]
pub struct MajdaPegoScan {
    /// min over the grid of −max_j Re λ_j(−P(ξ)) / ξ²
    pub delta: f64,
    pub xi: Vec<f64>,
    pub max_re: Vec<f64>,
}

/// Scans the eigenvalues of −(iξ dF + ξ² D) on a log grid ξ ∈ [1e-3, ξ_max].
pub fn majda_pego_scan<S: ViscousSystem + ?Sized>(
    sys: &S,
    w: &DVector<f64>,
    xi_max: f64,
    n_xi: usize,
) -> Result<MajdaPegoScan> {
    if !(xi_max > 1e-3) || n_xi < 2 {
        return Err(Error::domain("majda_pego_scan needs xi_max > 1e-3 and at least 2 points"));
    }
    let a = sys.jacobian(w)?;
    let d = sys.diffusion(w)?;
    let (lo, hi) = (1e-3f64.ln(), xi_max.ln());
    let mut xi = Vec::with_capacity(n_xi);
    let mut max_re = Vec::with_capacity(n_xi);
    let mut delta = f64::INFINITY;
    for k in 0..n_xi {
        let x = (lo + (hi - lo) * k as f64 / (n_xi - 1) as f64).exp();
        let p = a.map(|v| Complex64::new(0.0, -x * v)) + d.map(|v| Complex64::new(-x * x * v, 0.0));
        let ev = linalg::complex_eigenvalues(&p)?;
        let mr = ev.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
        delta = delta.min(-mr / (x * x));
        xi.push(x);
        max_re.push(mr);
    }
    Ok(MajdaPegoScan { delta, xi, max_re })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DsymInterval {
    pub theta1: f64,
    /// `None` stands for +∞.
    pub theta2: Option<f64>,
    /// Positive-definiteness of D_sym just inside and outside each endpoint
    /// agrees with the closed form.
    pub confirmed: bool,
}

/// Whether the symmetric part of the Burgers D is positive definite at θ.
pub fn burgers_dsym_pd(w: &BurgersState, theta: f64) -> Result<bool> {
    let d = ModelDescriptor::burgers(theta)?.diffusion(&w.to_vector())?;
    let s = linalg::sym_part(&d);
    Ok(s[(0, 0)] > 0.0 && s.determinant() > 0.0)
}

/// θ-interval on which the symmetric part of the Burgers diffusion matrix is
/// positive definite: θ₁ = r⁻²Λ/(Λ+2), θ₂ = r⁻²Λ/(Λ−2) when Λ > 2, Λ = √(ρru²).
pub fn dsym_interval_burgers(w: &BurgersState) -> Result<DsymInterval> {
    if !(w.rho > 0.0) {
        return Err(Error::domain("dsym interval needs rho > 0"));
    }
    let (r, u) = (w.r(), w.u());
    let lam = (w.rho * r * u * u).sqrt();
    let theta1 = lam / (r * r * (lam + 2.0));
    let theta2 = if lam > 2.0 { Some(lam / (r * r * (lam - 2.0))) } else { None };
    let mut confirmed = true;
    if theta1 > 0.0 {
        confirmed &= !burgers_dsym_pd(w, theta1 * (1.0 - 1e-3))?;
        confirmed &= burgers_dsym_pd(w, theta1 * (1.0 + 1e-3))?;
    } else {
        confirmed &= burgers_dsym_pd(w, 1e-3)?;
    }
    match theta2 {
        Some(t2) => {
            confirmed &= burgers_dsym_pd(w, t2 * (1.0 - 1e-3))?;
            confirmed &= !burgers_dsym_pd(w, t2 * (1.0 + 1e-3))?;
        }
        None => confirmed &= burgers_dsym_pd(w, 1e3 * (1.0 + theta1))?,
    }
    Ok(DsymInterval { theta1, theta2, confirmed })
}

/// PD interval of the Burgers D_sym located by bisection on the
/// positive-definiteness test alone, over θ ∈ [1e-10, 1e10].
pub fn dsym_interval_bisection(w: &BurgersState) -> Result<(f64, Option<f64>)> {
    let pd = |t: f64| burgers_dsym_pd(w, t);
    // relative width of the interval is about 4/Λ, so the scan must be fine
    let grid: Vec<f64> = (0..=40_000).map(|k| 10f64.powf(-10.0 + 20.0 * k as f64 / 40_000.0)).collect();
    let mut inside = None;
    for (k, t) in grid.iter().enumerate() {
        if pd(*t)? {
            inside = Some(k);
            break;
        }
    }
    let k0 = inside.ok_or_else(|| Error::numeric("D_sym is nowhere positive definite on the scan"))?;
    let bisect = |mut out: f64, mut inn: f64| -> Result<f64> {
        for _ in 0..200 {
            let mid = 0.5 * (out + inn);
            if mid == out || mid == inn {
                break;
            }
            if pd(mid)? {
                inn = mid;
            } else {
                out = mid;
            }
        }
        Ok(0.5 * (out + inn))
    };
    let lower = if k0 == 0 { 0.0 } else { bisect(grid[k0 - 1], grid[k0])? };
    let mut upper = None;
    for k in k0 + 1..grid.len() {
        if !pd(grid[k])? {
            upper = Some(bisect(grid[k], grid[k - 1])?);
            break;
        }
    }
    Ok((lower, upper))
}

#[derive(Debug, Clone)]
pub struct PegoQuantities {
    /// ℓ₊ D r₊ with r₊ = (1, 1−ν, λ₊) and ℓ₊ = (p′, θ−p′, λ₊) at u = 0.
    pub l_d_r: f64,
    /// max over the ξ grid of Re det M(ξ); `None` when θ = 0.
    pub re_det_m_max: Option<f64>,
    pub xi: Vec<f64>,
    pub re_det_m: Vec<f64>,
}

/// Transversality quantities for the fast Euler field, in the comoving frame.
/// M(ξ) is the 2×2 block of iξ(dF − λ₊) + D acting on span{(1,0,λ₊), (0,1,0)},
/// rows two and three. The ξ grid is uniform on [−ξ_max, ξ_max].
pub fn pego_quantities_euler(
    law: &PressureLaw,
    theta: f64,
    w: &EulerState,
    xi_max: f64,
    n_xi: usize,
) -> Result<PegoQuantities> {
    let (n, rho) = (w.n(), w.rho);
    if !(n > 0.0 && rho > 0.0) {
        return Err(Error::domain("pego quantities need n > 0 and rho > 0"));
    }
    let model = ModelDescriptor::euler(law.clone(), theta)?;
    let w0 = EulerState::from_primitive(n, rho, 0.0).to_vector();
    let rep = eigenstructure(&model, &w0)?;
    let k = rep.eigenvalues.len() - 1;
    let lam = rep.eigenvalues[k];
    let dp = law.dp(n)?;
    let mut r = rep.right(k);
    r /= r[0];
    let mut l = rep.left(k);
    l *= dp / l[0];
    let d = model.diffusion(&w0)?;
    let l_d_r = l.dot(&(&d * &r));

    let mut xi = Vec::new();
    let mut re_det_m = Vec::new();
    let re_det_m_max = if theta > 0.0 {
        let a = model.jacobian(&w0)?;
        let shifted = &a - DMatrix::identity(3, 3) * lam;
        let vx = DVector::from_vec(vec![1.0, 0.0, lam]);
        let vy = DVector::from_vec(vec![0.0, 1.0, 0.0]);
        let (ax, ay) = (&shifted * &vx, &shifted * &vy);
        let (dx, dy) = (&d * &vx, &d * &vy);
        let mut worst = f64::NEG_INFINITY;
        let steps = n_xi.max(2);
        for i in 0..steps {
            let x = -xi_max + 2.0 * xi_max * i as f64 / (steps - 1) as f64;
            let entry = |av: &DVector<f64>, dv: &DVector<f64>, row: usize| Complex64::new(dv[row], x * av[row]);
            let m11 = entry(&ax, &dx, 1);
            let m12 = entry(&ay, &dy, 1);
            let m21 = entry(&ax, &dx, 2);
            let m22 = entry(&ay, &dy, 2);
            let re = (m11 * m22 - m12 * m21).re;
            worst = worst.max(re);
            xi.push(x);
            re_det_m.push(re);
        }
        Some(worst)
    } else {
        None
    };
    Ok(PegoQuantities { l_d_r, re_det_m_max, xi, re_det_m })
}

#[derive(Debug, Clone)]
pub struct StabilityReport {
    pub symmetrizer: Option<SymmetrizerReport>,
    pub kawashima_shizuta: KsReport,
    pub majda_pego_delta: f64,
    pub dsym_interval: Option<DsymInterval>,
    pub pego: Option<PegoQuantities>,
}

/// All stability diagnostics available at a state. The symmetrizer block is
/// absent where the entropy is not defined.
pub fn stability_report(model: &ModelDescriptor, w: &DVector<f64>, xi_max: f64, n_xi: usize) -> Result<StabilityReport> {
    let symmetrizer = symmetrizer_report(model, w).ok();
    let kawashima_shizuta = kawashima_shizuta(model, w)?;
    let majda_pego_delta = majda_pego_scan(model, w, xi_max, n_xi)?.delta;
    let (dsym_interval, pego) = match model.kind() {
        ModelKind::BurgersFP => {
            let s = BurgersState::from_vector(w);
            (if s.rho > 0.0 { Some(dsym_interval_burgers(&s)?) } else { None }, None)
        }
        ModelKind::EulerFP => {
            let s = EulerState::from_vector(w);
            let pego = if s.n() > 0.0 && s.rho > 0.0 {
                Some(pego_quantities_euler(model.law().unwrap(), model.theta(), &s, xi_max, n_xi)?)
            } else {
                None
            };
            (None, pego)
        }
    };
    Ok(StabilityReport { symmetrizer, kawashima_shizuta, majda_pego_delta, dsym_interval, pego })
}
