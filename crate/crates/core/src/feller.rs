//! The Feller diffusion `dX = σ√X dW`, the scaling limit of slice
//! populations.
//!
//! Exact transitions use the compound Poisson–exponential form of the
//! branching mechanism `ψ(u) = σ²u²/2`: given `X_0 = x`, the number of
//! ancestors of `X_s` is Poisson with mean `2x/(σ²s)`, each contributing an
//! exponential mass of mean `σ²s/2`.

use crate::error::{Error, Result};
use rand::Rng;
use rand_distr::{Distribution, Gamma, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FellerParams {
    pub sigma_sq: f64,
    pub x0: f64,
}

impl FellerParams {
    pub fn new(sigma_sq: f64, x0: f64) -> Result<Self> {
        if !(sigma_sq > 0.0 && sigma_sq.is_finite()) {
            return Err(Error::InvalidArgument(format!("sigma_sq must be positive, got {sigma_sq}")));
        }
        if !(x0 >= 0.0 && x0.is_finite()) {
            return Err(Error::InvalidArgument(format!("x0 must be nonnegative, got {x0}")));
        }
        Ok(FellerParams { sigma_sq, x0 })
    }

    /// Same diffusion, different starting mass.
    pub fn with_mass(&self, x0: f64) -> Result<Self> {
        FellerParams::new(self.sigma_sq, x0)
    }
}

/// `P(θ₀ ≤ t) = exp(−2x₀/(σ²t))`.
pub fn extinction_cdf(params: &FellerParams, t: f64) -> f64 {
    if params.x0 == 0.0 {
        return 1.0;
    }
    if t <= 0.0 {
        return 0.0;
    }
    (-2.0 * params.x0 / (params.sigma_sq * t)).exp()
}

/// Inverse of [`extinction_cdf`] in `t`.
pub fn extinction_quantile(params: &FellerParams, p: f64) -> f64 {
    if p <= 0.0 {
        0.0
    } else if p >= 1.0 {
        f64::INFINITY
    } else {
        -2.0 * params.x0 / (params.sigma_sq * p.ln())
    }
}

/// One draw of `X_s` given `X_0 = x0`.
pub fn exact_transition<R: Rng + ?Sized>(params: &FellerParams, s: f64, rng: &mut R) -> f64 {
    assert!(s > 0.0, "transition time must be positive");
    if params.x0 == 0.0 {
        return 0.0;
    }
    let scale = params.sigma_sq * s / 2.0;
    let n = Poisson::new(params.x0 / scale).expect("finite Poisson mean").sample(rng);
    if n == 0.0 {
        return 0.0;
    }
    Gamma::new(n, scale).expect("valid gamma").sample(rng)
}

/// Full-truncation Euler scheme; returns `X` at `0, step, 2·step, …` up to
/// `horizon` (the last step may be shorter). Absorbed at 0.
pub fn euler_path<R: Rng + ?Sized>(params: &FellerParams, step: f64, horizon: f64, rng: &mut R) -> Vec<f64> {
    let mut path = vec![params.x0];
    euler_run(params, step, horizon, rng, |x| path.push(x));
    path
}

/// `X_horizon` under the Euler scheme, without storing the path.
pub fn euler_terminal<R: Rng + ?Sized>(params: &FellerParams, step: f64, horizon: f64, rng: &mut R) -> f64 {
    let mut last = params.x0;
    euler_run(params, step, horizon, rng, |x| last = x);
    last
}

fn euler_run<R: Rng + ?Sized>(params: &FellerParams, step: f64, horizon: f64, rng: &mut R, mut emit: impl FnMut(f64)) {
    assert!(step > 0.0 && step <= horizon, "need 0 < step <= horizon");
    let steps = (horizon / step - 1e-9).ceil() as u64;
    let sigma = params.sigma_sq.sqrt();
    let mut x = params.x0;
    let mut t = 0.0;
    for _ in 0..steps {
        let dt = step.min(horizon - t);
        t += dt;
        if x > 0.0 {
            let z: f64 = StandardNormal.sample(rng);
            x = (x + sigma * x.sqrt() * dt.sqrt() * z).max(0.0);
        }
        emit(x);
    }
}

/// The Feller flow at time `t`: independent transitions of each mass,
/// returned as cumulative sums starting at 0 (length `masses.len() + 1`).
pub fn flow_sample<R: Rng + ?Sized>(masses: &[FellerParams], t: f64, rng: &mut R) -> Vec<f64> {
    let mut out = Vec::with_capacity(masses.len() + 1);
    let mut acc = 0.0;
    out.push(acc);
    for p in masses {
        acc += exact_transition(p, t, rng);
        out.push(acc);
    }
    out
}
