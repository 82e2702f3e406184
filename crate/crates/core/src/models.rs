//! The Burgers and Euler fluid–particle systems as evaluable descriptors.
//!
//! Burgers state W = (ρ, w) with r = 1 + ρ, u = w/r.
//! Euler state W = (r, ρ, w) with n = r − ρ, u = w/r, ν = n/r.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::numerics::{linalg, quad, roots};
use crate::DENSITY_MIN;

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// User-supplied pressure law with its first two derivatives.
#[derive(Clone)]
pub struct TabulatedLaw {
    p: ScalarFn,
    dp: ScalarFn,
    d2p: ScalarFn,
}

#[derive(Clone)]
pub enum PressureLaw {
    /// p(n) = C n^γ
    GammaLaw { c: f64, gamma: f64 },
    Tabulated(TabulatedLaw),
}

impl fmt::Debug for PressureLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PressureLaw::GammaLaw { c, gamma } => write!(f, "GammaLaw {{ c: {c}, gamma: {gamma} }}"),
            PressureLaw::Tabulated(_) => write!(f, "Tabulated(..)"),
        }
    }
}

impl PressureLaw {
    pub fn gamma_law(c: f64, gamma: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidLaw(format!("C must be positive, got {c}")));
        }
        if !(gamma > 1.0 && gamma.is_finite()) {
            return Err(Error::InvalidLaw(format!("gamma must exceed 1, got {gamma}")));
        }
        Ok(PressureLaw::GammaLaw { c, gamma })
    }

    /// Builds a law from callbacks, checking p(0) = 0 and positivity of p′, p″
    /// (and monotonicity of p) on 64 log-spaced samples in (1e-6, 1e3).
    pub fn tabulated<P, D1, D2>(p: P, dp: D1, d2p: D2) -> Result<Self>
    where
        P: Fn(f64) -> f64 + Send + Sync + 'static,
        D1: Fn(f64) -> f64 + Send + Sync + 'static,
        D2: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let law = TabulatedLaw {
            p: Arc::new(p),
            dp: Arc::new(dp),
            d2p: Arc::new(d2p),
        };
        let p0 = (law.p)(0.0);
        if p0.abs() > 1e-14 * (1.0 + (law.p)(1.0).abs()) {
            return Err(Error::InvalidLaw(format!("p(0) = {p0} is not zero")));
        }
        let mut prev = p0;
        for k in 0..64 {
            let n = 10f64.powf(-6.0 + 9.0 * k as f64 / 63.0);
            let (pv, d1, d2) = ((law.p)(n), (law.dp)(n), (law.d2p)(n));
            if !(pv.is_finite() && d1 > 0.0 && d2 > 0.0) {
                return Err(Error::InvalidLaw(format!(
                    "at n = {n:e}: p = {pv:e}, p' = {d1:e}, p'' = {d2:e}"
                )));
            }
            if pv <= prev {
                return Err(Error::InvalidLaw(format!("p not increasing at n = {n:e}")));
            }
            prev = pv;
        }
        Ok(PressureLaw::Tabulated(law))
    }

    fn check(n: f64) -> Result<()> {
        if n < 0.0 || n.is_nan() {
            return Err(Error::domain(format!("pressure evaluated at n = {n}")));
        }
        Ok(())
    }

    /// (p, p′, p″) at n ≥ 0.
    pub fn eval(&self, n: f64) -> Result<(f64, f64, f64)> {
        Self::check(n)?;
        Ok(match self {
            PressureLaw::GammaLaw { c, gamma } => (
                c * n.powf(*gamma),
                c * gamma * n.powf(gamma - 1.0),
                c * gamma * (gamma - 1.0) * n.powf(gamma - 2.0),
            ),
            PressureLaw::Tabulated(t) => ((t.p)(n), (t.dp)(n), (t.d2p)(n)),
        })
    }

    pub fn p(&self, n: f64) -> Result<f64> {
        Self::check(n)?;
        Ok(match self {
            PressureLaw::GammaLaw { c, gamma } => c * n.powf(*gamma),
            PressureLaw::Tabulated(t) => (t.p)(n),
        })
    }

    pub fn dp(&self, n: f64) -> Result<f64> {
        Self::check(n)?;
        Ok(match self {
            PressureLaw::GammaLaw { c, gamma } => c * gamma * n.powf(gamma - 1.0),
            PressureLaw::Tabulated(t) => (t.dp)(n),
        })
    }

    /// n ≥ 0 with p(n) = y.
    pub fn inverse(&self, y: f64) -> Result<f64> {
        if y < 0.0 || y.is_nan() {
            return Err(Error::domain(format!("pressure inverse of {y}")));
        }
        if y == 0.0 {
            return Ok(0.0);
        }
        match self {
            PressureLaw::GammaLaw { c, gamma } => Ok((y / c).powf(1.0 / gamma)),
            PressureLaw::Tabulated(t) => {
                let mut hi = 1.0;
                let mut k = 0;
                while (t.p)(hi) < y {
                    hi *= 2.0;
                    k += 1;
                    if k > 200 {
                        return Err(Error::numeric("no bracket for pressure inverse"));
                    }
                }
                let n = roots::brent(|n| (t.p)(n) - y, 0.0, hi, 0.0, 200)?;
                Ok(n)
            }
        }
    }

    /// Π′(n) = ∫₀ⁿ p′(ς)/ς dς.
    pub fn pi_prime(&self, n: f64) -> Result<f64> {
        Self::check(n)?;
        match self {
            PressureLaw::GammaLaw { c, gamma } => Ok(c * gamma * n.powf(gamma - 1.0) / (gamma - 1.0)),
            PressureLaw::Tabulated(t) => {
                quad::integrate(|s| (t.dp)(s) / s, 0.0, n, 1e-12, 1e-300)
            }
        }
    }

    /// Π(n) normalized by Π(0) = 0.
    pub fn pi(&self, n: f64) -> Result<f64> {
        Self::check(n)?;
        match self {
            PressureLaw::GammaLaw { c, gamma } => Ok(c * n.powf(*gamma) / (gamma - 1.0)),
            PressureLaw::Tabulated(_) => {
                let mut failure = None;
                let v = quad::integrate(
                    |s| match self.pi_prime(s) {
                        Ok(v) => v,
                        Err(e) => {
                            failure = Some(e);
                            f64::NAN
                        }
                    },
                    0.0,
                    n,
                    1e-10,
                    1e-300,
                );
                match failure {
                    Some(e) => Err(e),
                    None => v,
                }
            }
        }
    }

    /// p̄(n) = p(n_star·n)/p(n_star), so that p̄(1) = 1.
    pub fn rescaled(&self, n_star: f64) -> Result<PressureLaw> {
        if !(n_star > 0.0) {
            return Err(Error::domain(format!("rescaling at n_star = {n_star}")));
        }
        match self {
            PressureLaw::GammaLaw { gamma, .. } => Ok(PressureLaw::GammaLaw { c: 1.0, gamma: *gamma }),
            PressureLaw::Tabulated(t) => {
                let p_star = (t.p)(n_star);
                let (p, dp, d2p) = (t.p.clone(), t.dp.clone(), t.d2p.clone());
                Ok(PressureLaw::Tabulated(TabulatedLaw {
                    p: Arc::new(move |n| p(n_star * n) / p_star),
                    dp: Arc::new(move |n| n_star * dp(n_star * n) / p_star),
                    d2p: Arc::new(move |n| n_star * n_star * d2p(n_star * n) / p_star),
                }))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BurgersState {
    pub rho: f64,
    pub w: f64,
}

impl BurgersState {
    pub fn new(rho: f64, w: f64) -> Self {
        Self { rho, w }
    }

    pub fn from_primitive(rho: f64, u: f64) -> Self {
        Self { rho, w: (1.0 + rho) * u }
    }

    pub fn r(&self) -> f64 {
        1.0 + self.rho
    }

    pub fn u(&self) -> f64 {
        self.w / self.r()
    }

    pub fn to_vector(&self) -> DVector<f64> {
        DVector::from_vec(vec![self.rho, self.w])
    }

    pub fn from_vector(v: &DVector<f64>) -> Self {
        Self { rho: v[0], w: v[1] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerState {
    pub r: f64,
    pub rho: f64,
    pub w: f64,
}

impl EulerState {
    pub fn new(r: f64, rho: f64, w: f64) -> Self {
        Self { r, rho, w }
    }

    pub fn from_primitive(n: f64, rho: f64, u: f64) -> Self {
        let r = n + rho;
        Self { r, rho, w: r * u }
    }

    pub fn n(&self) -> f64 {
        self.r - self.rho
    }

    pub fn u(&self) -> f64 {
        self.w / self.r
    }

    pub fn nu(&self) -> f64 {
        self.n() / self.r
    }

    pub fn to_vector(&self) -> DVector<f64> {
        DVector::from_vec(vec![self.r, self.rho, self.w])
    }

    pub fn from_vector(v: &DVector<f64>) -> Self {
        Self { r: v[0], rho: v[1], w: v[2] }
    }
}

/// Entropy ζ with gradient and Hessian.
#[derive(Debug, Clone)]
pub struct EntropyPack {
    pub value: f64,
    pub gradient: DVector<f64>,
    pub hessian: DMatrix<f64>,
}

/// A 1D viscous system W_t + F(W)_x = (D(W) W_x)_x.
///
/// Implemented by [`ModelDescriptor`]; tests and experiments may supply their
/// own systems to the stability scan and the evolution harness.
pub trait ViscousSystem {
    fn dim(&self) -> usize;
    fn flux(&self, w: &DVector<f64>) -> Result<DVector<f64>>;
    fn jacobian(&self, w: &DVector<f64>) -> Result<DMatrix<f64>>;
    fn diffusion(&self, w: &DVector<f64>) -> Result<DMatrix<f64>>;

    /// Bound on |λ| for the Rusanov flux.
    fn max_wave_speed(&self, w: &DVector<f64>) -> Result<f64> {
        let a = self.jacobian(w)?;
        Ok(linalg::eigenvalues(&a).iter().map(|z| z.norm()).fold(0.0, f64::max))
    }

    /// Physical admissibility of a state; `Err` carries the reason.
    fn check_state(&self, _w: &DVector<f64>) -> std::result::Result<(), String> {
        Ok(())
    }

    fn entropy(&self, _w: &DVector<f64>) -> Option<f64> {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    BurgersFP,
    EulerFP,
}

#[derive(Debug, Clone)]
pub struct ModelDescriptor {
    kind: ModelKind,
    theta: f64,
    law: Option<PressureLaw>,
}

fn check_len(w: &DVector<f64>, m: usize) -> Result<()> {
    if w.len() != m {
        return Err(Error::domain(format!("state has {} components, expected {m}", w.len())));
    }
    Ok(())
}

impl ModelDescriptor {
    pub fn burgers(theta: f64) -> Result<Self> {
        if !(theta >= 0.0 && theta.is_finite()) {
            return Err(Error::domain(format!("theta must be nonnegative, got {theta}")));
        }
        Ok(Self { kind: ModelKind::BurgersFP, theta, law: None })
    }

    pub fn euler(law: PressureLaw, theta: f64) -> Result<Self> {
        if !(theta >= 0.0 && theta.is_finite()) {
            return Err(Error::domain(format!("theta must be nonnegative, got {theta}")));
        }
        Ok(Self { kind: ModelKind::EulerFP, theta, law: Some(law) })
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn law(&self) -> Option<&PressureLaw> {
        self.law.as_ref()
    }

    pub fn with_theta(&self, theta: f64) -> Result<Self> {
        match self.kind {
            ModelKind::BurgersFP => Self::burgers(theta),
            ModelKind::EulerFP => Self::euler(self.law.clone().unwrap(), theta),
        }
    }

    fn law_ref(&self) -> &PressureLaw {
        self.law.as_ref().expect("Euler descriptor carries a pressure law")
    }

    pub fn dim(&self) -> usize {
        match self.kind {
            ModelKind::BurgersFP => 2,
            ModelKind::EulerFP => 3,
        }
    }

    /// CSV column names of the conservative state.
    pub fn state_columns(&self) -> &'static [&'static str] {
        match self.kind {
            ModelKind::BurgersFP => &["rho", "w"],
            ModelKind::EulerFP => &["r", "rho", "w"],
        }
    }

    /// (r, n, u) for any state; n = 1 by convention for Burgers.
    fn parts(&self, w: &DVector<f64>) -> Result<(f64, f64, f64, f64)> {
        check_len(w, self.dim())?;
        let (r, rho, mom) = match self.kind {
            ModelKind::BurgersFP => (1.0 + w[0], w[0], w[1]),
            ModelKind::EulerFP => (w[0], w[1], w[2]),
        };
        if !(r > 0.0) {
            return Err(Error::SingularState(format!("hybrid density r = {r}")));
        }
        Ok((r, rho, r - rho, mom / r))
    }

    pub fn flux(&self, w: &DVector<f64>) -> Result<DVector<f64>> {
        let (r, rho, n, u) = self.parts(w)?;
        let th = self.theta;
        Ok(match self.kind {
            ModelKind::BurgersFP => DVector::from_vec(vec![rho * u, r * u * u + th * rho]),
            ModelKind::EulerFP => {
                let p = self.law_ref().p(n)?;
                DVector::from_vec(vec![r * u, rho * u, r * u * u + p + th * rho])
            }
        })
    }

    pub fn jacobian(&self, w: &DVector<f64>) -> Result<DMatrix<f64>> {
        let (r, rho, n, u) = self.parts(w)?;
        let th = self.theta;
        Ok(match self.kind {
            ModelKind::BurgersFP => DMatrix::from_row_slice(2, 2, &[u / r, rho / r, -u * u + th, 2.0 * u]),
            ModelKind::EulerFP => {
                let dp = self.law_ref().dp(n)?;
                DMatrix::from_row_slice(
                    3,
                    3,
                    &[0.0, 0.0, 1.0, -rho * u / r, u, rho / r, -u * u + dp, -dp + th, 2.0 * u],
                )
            }
        })
    }

    /// (D₀, D₁) with D = D₀ + θ D₁.
    pub fn diffusion_split(&self, w: &DVector<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
        let (r, rho, n, u) = self.parts(w)?;
        Ok(match self.kind {
            ModelKind::BurgersFP => {
                let a = rho * u / (r * r * r);
                let d0 = DMatrix::from_row_slice(2, 2, &[a * u, -a, 0.0, 0.0]);
                let d1 = DMatrix::from_row_slice(2, 2, &[1.0 / (r * r), 0.0, -rho * u / r, rho / r]);
                (d0, d1)
            }
            ModelKind::EulerFP => {
                let dp = self.law_ref().dp(n)?;
                let nu = n / r;
                let a = nu * (1.0 - nu) * dp;
                let d0 = DMatrix::from_row_slice(3, 3, &[0.0, 0.0, 0.0, -a, a, 0.0, 0.0, 0.0, 0.0]);
                let d1 = DMatrix::from_row_slice(
                    3,
                    3,
                    &[0.0, 0.0, 0.0, 0.0, nu * nu, 0.0, -(1.0 - nu) * u, 0.0, 1.0 - nu],
                );
                (d0, d1)
            }
        })
    }

    pub fn diffusion(&self, w: &DVector<f64>) -> Result<DMatrix<f64>> {
        let (d0, d1) = self.diffusion_split(w)?;
        if self.theta == 0.0 {
            Ok(d0)
        } else {
            Ok(d0 + d1 * self.theta)
        }
    }

    pub fn entropy_pack(&self, w: &DVector<f64>) -> Result<EntropyPack> {
        let (r, rho, n, u) = self.parts(w)?;
        let th = self.theta;
        if th > 0.0 && rho < DENSITY_MIN {
            return Err(Error::domain(format!(
                "entropy needs rho > 0 when theta > 0 (rho = {rho})"
            )));
        }
        let (log_term, dlog, d2log) = if th > 0.0 {
            (th * rho * rho.ln(), th * (1.0 + rho.ln()), th / rho)
        } else {
            (0.0, 0.0, 0.0)
        };
        match self.kind {
            ModelKind::BurgersFP => Ok(EntropyPack {
                value: 0.5 * r * u * u + log_term,
                gradient: DVector::from_vec(vec![-0.5 * u * u + dlog, u]),
                hessian: DMatrix::from_row_slice(2, 2, &[u * u / r + d2log, -u / r, -u / r, 1.0 / r]),
            }),
            ModelKind::EulerFP => {
                if n < DENSITY_MIN {
                    return Err(Error::domain(format!("entropy needs n > 0 (n = {n})")));
                }
                let law = self.law_ref();
                let pi = law.pi(n)?;
                let pi1 = law.pi_prime(n)?;
                let pi2 = law.dp(n)? / n;
                Ok(EntropyPack {
                    value: 0.5 * r * u * u + pi + log_term,
                    gradient: DVector::from_vec(vec![-0.5 * u * u + pi1, -pi1 + dlog, u]),
                    hessian: DMatrix::from_row_slice(
                        3,
                        3,
                        &[
                            u * u / r + pi2,
                            -pi2,
                            -u / r,
                            -pi2,
                            pi2 + d2log,
                            0.0,
                            -u / r,
                            0.0,
                            1.0 / r,
                        ],
                    ),
                })
            }
        }
    }

    /// Burgers (ρ, u); Euler (n, ρ, u).
    pub fn to_primitive(&self, w: &DVector<f64>) -> Result<DVector<f64>> {
        let (_, rho, n, u) = self.parts(w)?;
        Ok(match self.kind {
            ModelKind::BurgersFP => DVector::from_vec(vec![rho, u]),
            ModelKind::EulerFP => DVector::from_vec(vec![n, rho, u]),
        })
    }

    pub fn from_primitive(&self, p: &DVector<f64>) -> Result<DVector<f64>> {
        check_len(p, self.dim())?;
        let w = match self.kind {
            ModelKind::BurgersFP => BurgersState::from_primitive(p[0], p[1]).to_vector(),
            ModelKind::EulerFP => EulerState::from_primitive(p[0], p[1], p[2]).to_vector(),
        };
        self.parts(&w)?;
        Ok(w)
    }

    /// Closed-form characteristic speeds, ascending.
    pub fn eigenvalues(&self, w: &DVector<f64>) -> Result<Vec<f64>> {
        let (r, rho, n, u) = self.parts(w)?;
        let th = self.theta;
        match self.kind {
            ModelKind::BurgersFP => {
                let s = (u * u + th * 4.0 * rho * r).sqrt();
                Ok(vec![u - (s - u) / (2.0 * r), u + (s + u) / (2.0 * r)])
            }
            ModelKind::EulerFP => {
                let dp = self.law_ref().dp(n)?;
                let d2 = (n * dp + th * rho) / r;
                if d2 < 0.0 {
                    return Err(Error::domain(format!("negative sound speed squared {d2}")));
                }
                let d = d2.sqrt();
                Ok(vec![u - d, u, u + d])
            }
        }
    }

    /// Copy of `w` with velocity shifted by `u0` at fixed densities.
    pub fn galilean_shift(&self, w: &DVector<f64>, u0: f64) -> Result<DVector<f64>> {
        let mut p = self.to_primitive(w)?;
        let last = p.len() - 1;
        p[last] += u0;
        self.from_primitive(&p)
    }

    /// Physical validity: ρ ≥ 0, plus n ≥ 0 for Euler.
    pub fn validate(&self, w: &DVector<f64>) -> Result<()> {
        let (_, rho, n, _) = self.parts(w)?;
        if !w.iter().all(|x| x.is_finite()) {
            return Err(Error::domain("non-finite state"));
        }
        if rho < 0.0 {
            return Err(Error::domain(format!("negative particle density rho = {rho}")));
        }
        if self.kind == ModelKind::EulerFP && n < 0.0 {
            return Err(Error::domain(format!("negative fluid density n = {n}")));
        }
        Ok(())
    }
}

impl ViscousSystem for ModelDescriptor {
    fn dim(&self) -> usize {
        ModelDescriptor::dim(self)
    }

    fn flux(&self, w: &DVector<f64>) -> Result<DVector<f64>> {
        ModelDescriptor::flux(self, w)
    }

    fn jacobian(&self, w: &DVector<f64>) -> Result<DMatrix<f64>> {
        ModelDescriptor::jacobian(self, w)
    }

    fn diffusion(&self, w: &DVector<f64>) -> Result<DMatrix<f64>> {
        ModelDescriptor::diffusion(self, w)
    }

    fn max_wave_speed(&self, w: &DVector<f64>) -> Result<f64> {
        let ev = self.eigenvalues(w)?;
        Ok(ev.iter().map(|x| x.abs()).fold(0.0, f64::max))
    }

    fn check_state(&self, w: &DVector<f64>) -> std::result::Result<(), String> {
        self.validate(w).map_err(|e| e.to_string())
    }

    fn entropy(&self, w: &DVector<f64>) -> Option<f64> {
        self.entropy_pack(w).ok().map(|e| e.value)
    }
}

/// Central-difference Jacobian of a vector map with step 1e-6·(1+|W_j|).
pub fn fd_jacobian<F>(f: F, w: &DVector<f64>) -> Result<DMatrix<f64>>
where
    F: Fn(&DVector<f64>) -> Result<DVector<f64>>,
{
    let m = w.len();
    let f0 = f(w)?;
    let mut jac = DMatrix::zeros(f0.len(), m);
    for j in 0..m {
        let h = 1e-6 * (1.0 + w[j].abs());
        let mut wp = w.clone();
        let mut wm = w.clone();
        wp[j] += h;
        wm[j] -= h;
        jac.set_column(j, &((f(&wp)? - f(&wm)?) / (2.0 * h)));
    }
    Ok(jac)
}
