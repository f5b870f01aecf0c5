//! Gaussian-process regression with a constant mean and an anisotropic
//! squared exponential kernel: marginal-likelihood training, posterior
//! prediction, and spectral posterior draws for Thompson sampling.

mod rff;

pub use rff::{sample_posterior, SampledFunction};

use ndarray::prelude::*;
use ndarray_linalg::cholesky::*;
use ndarray_linalg::triangular::*;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cost::CostMeter;
use crate::BoxBounds;

#[derive(Debug, Error)]
pub enum GprError {
    #[error("need at least one training point")]
    EmptyTrainingSet,
    #[error("training inputs and targets disagree in length")]
    DimensionMismatch,
    #[error("non-finite training target")]
    NonFiniteTarget,
    #[error("kernel matrix not positive definite even with jitter {0:.1e}")]
    IllConditioned(f64),
}

/// Kernel and likelihood parameters in standardized target space and
/// unit-cube input space. All positive entries are optimized in log space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GPHyperparameters {
    pub constant_mean: f64,
    pub signal_variance: f64,
    pub lengthscales: Vec<f64>,
    pub noise_variance: f64,
}

impl GPHyperparameters {
    pub fn validate(&self) -> Result<(), GprError> {
        let ok = self.signal_variance > 0.0
            && self.noise_variance > 0.0
            && self.constant_mean.is_finite()
            && self.lengthscales.iter().all(|&l| l > 0.0 && l.is_finite());
        if ok {
            Ok(())
        } else {
            Err(GprError::NonFiniteTarget)
        }
    }

    fn pack(&self) -> Vec<f64> {
        let mut p = vec![self.constant_mean, self.signal_variance.ln()];
        p.extend(self.lengthscales.iter().map(|l| l.ln()));
        p.push(self.noise_variance.ln());
        p
    }

    fn unpack(p: &[f64], n_dims: usize) -> Self {
        Self {
            constant_mean: p[0],
            signal_variance: p[1].exp(),
            lengthscales: p[2..2 + n_dims].iter().map(|v| v.exp()).collect(),
            noise_variance: p[2 + n_dims].exp(),
        }
    }
}

/// Optimization box for the log-space hyperparameters, in normalized units.
const LOG_SF2_BOUNDS: (f64, f64) = (-9.210340371976182, 4.605170185988092); // 1e-4 .. 1e2
const LOG_LS_BOUNDS: (f64, f64) = (-4.605170185988091, 4.605170185988092); // 1e-2 .. 1e2
const LOG_SN2_BOUNDS: (f64, f64) = (-13.815510557964274, 4.605170185988092); // 1e-6 .. 1e2
const JITTER_MAX: f64 = 1e-2;

/// Trained surrogate for one objective.
#[derive(Debug, Clone)]
pub struct GPModel {
    hyper: GPHyperparameters,
    bounds: BoxBounds,
    x_norm: Array2<f64>,
    y_std: Array1<f64>,
    l_factor: Array2<f64>,
    alpha: Array1<f64>,
    y_mean: f64,
    y_scale: f64,
    effective_noise: f64,
    log_marginal_likelihood: f64,
}

/// Controls for the marginal-likelihood ascent.
#[derive(Debug, Clone)]
pub struct FitOptions {
    /// Number of random multi-starts.
    pub restarts: usize,
    /// Gradient-ascent iterations per start.
    pub max_iters: usize,
    /// Extra start from a previous fit.
    pub warm_start: Option<GPHyperparameters>,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            restarts: 10,
            max_iters: 80,
            warm_start: None,
        }
    }
}

/// Fits hyperparameters by multi-start gradient ascent of the log marginal
/// likelihood.
pub fn fit<R: Rng>(
    bounds: &BoxBounds,
    x: &[Vec<f64>],
    y: &[f64],
    restarts: usize,
    rng: &mut R,
) -> Result<GPModel, GprError> {
    let mut meter = CostMeter::new();
    fit_with_options(
        bounds,
        x,
        y,
        &FitOptions {
            restarts,
            ..FitOptions::default()
        },
        rng,
        &mut meter,
    )
}

pub fn fit_with_options<R: Rng>(
    bounds: &BoxBounds,
    x: &[Vec<f64>],
    y: &[f64],
    opts: &FitOptions,
    rng: &mut R,
    meter: &mut CostMeter,
) -> Result<GPModel, GprError> {
    let (x_norm, y_std, y_mean, y_scale) = prepare(bounds, x, y)?;
    let n = x_norm.nrows();
    let n_dims = bounds.len();
    if n == 1 {
        // a single standardized observation carries no likelihood signal;
        // pin the prior scales with the noise at the jitter floor
        let hyper = GPHyperparameters {
            constant_mean: 0.0,
            signal_variance: 1.0,
            lengthscales: vec![0.3; n_dims],
            noise_variance: 1e-6,
        };
        return build_model(bounds.clone(), x_norm, y_std, y_mean, y_scale, hyper, meter);
    }
    let sqdists = per_dim_sqdists(&x_norm);

    let mut starts: Vec<Vec<f64>> = Vec::new();
    if let Some(warm) = &opts.warm_start {
        starts.push(clamp_params(warm.pack(), n_dims));
    }
    starts.push(
        GPHyperparameters {
            constant_mean: 0.0,
            signal_variance: 1.0,
            lengthscales: vec![0.3; n_dims],
            noise_variance: 1e-4,
        }
        .pack(),
    );
    for _ in 1..opts.restarts.max(1) {
        let mut p = vec![rng.random_range(-0.5..0.5), rng.random_range(-1.6..1.6)];
        for _ in 0..n_dims {
            p.push(rng.random_range(0.05f64.ln()..2.0f64.ln()));
        }
        p.push(rng.random_range(1e-6f64.ln()..1e-2f64.ln()));
        starts.push(p);
    }

    let mut best: Option<(f64, Vec<f64>)> = None;
    for start in starts {
        let (value, params) =
            adam_ascent(&sqdists, &y_std, start, opts.max_iters, n, n_dims, meter);
        if value.is_finite() && best.as_ref().map_or(true, |(b, _)| value > *b) {
            best = Some((value, params));
        }
    }
    let (_, params) = best.ok_or(GprError::IllConditioned(JITTER_MAX))?;
    let hyper = GPHyperparameters::unpack(&params, n_dims);
    build_model(bounds.clone(), x_norm, y_std, y_mean, y_scale, hyper, meter)
}

impl GPModel {
    /// Builds the factored model for fixed hyperparameters.
    pub fn with_hyperparameters(
        bounds: &BoxBounds,
        x: &[Vec<f64>],
        y: &[f64],
        hyper: GPHyperparameters,
    ) -> Result<Self, GprError> {
        hyper.validate()?;
        let (x_norm, y_std, y_mean, y_scale) = prepare(bounds, x, y)?;
        let mut meter = CostMeter::new();
        build_model(
            bounds.clone(),
            x_norm,
            y_std,
            y_mean,
            y_scale,
            hyper,
            &mut meter,
        )
    }

    pub fn hyperparameters(&self) -> &GPHyperparameters {
        &self.hyper
    }

    pub fn n_training(&self) -> usize {
        self.x_norm.nrows()
    }

    /// Normalized training inputs (unit cube).
    pub fn normalized_inputs(&self) -> &Array2<f64> {
        &self.x_norm
    }

    /// Standardized training targets.
    pub fn standardized_targets(&self) -> &Array1<f64> {
        &self.y_std
    }

    pub fn output_standardization(&self) -> (f64, f64) {
        (self.y_mean, self.y_scale)
    }

    /// Noise variance actually used in the factorization, jitter included.
    pub fn effective_noise(&self) -> f64 {
        self.effective_noise
    }

    pub fn log_marginal_likelihood(&self) -> f64 {
        self.log_marginal_likelihood
    }

    pub fn bounds(&self) -> &BoxBounds {
        &self.bounds
    }

    /// Posterior mean and standard deviation at a raw-space point, in
    /// original target units.
    pub fn predict(&self, theta: &[f64]) -> (f64, f64) {
        let (mu, sigma) = self.predict_batch(std::slice::from_ref(&theta.to_vec()));
        (mu[0], sigma[0])
    }

    /// Batched posterior predictions.
    pub fn predict_batch(&self, thetas: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
        let m = thetas.len();
        let n = self.x_norm.nrows();
        let n_dims = self.x_norm.ncols();
        let mut k_star = Array2::<f64>::zeros((n, m));
        for (j, theta) in thetas.iter().enumerate() {
            let z = self.bounds.to_unit(theta);
            for i in 0..n {
                let mut d2 = 0.0;
                for d in 0..n_dims {
                    let diff = (self.x_norm[[i, d]] - z[d]) / self.hyper.lengthscales[d];
                    d2 += diff * diff;
                }
                k_star[[i, j]] = self.hyper.signal_variance * (-0.5 * d2).exp();
            }
        }
        let mu_std = k_star.t().dot(&self.alpha);
        let v = self
            .l_factor
            .solve_triangular(UPLO::Lower, Diag::NonUnit, &k_star)
            .expect("triangular solve");
        let mut mus = Vec::with_capacity(m);
        let mut sigmas = Vec::with_capacity(m);
        for j in 0..m {
            let mu = self.hyper.constant_mean + mu_std[j];
            let vj = v.column(j);
            let var = (self.hyper.signal_variance - vj.dot(&vj)).max(0.0);
            mus.push(mu * self.y_scale + self.y_mean);
            sigmas.push(var.sqrt() * self.y_scale);
        }
        (mus, sigmas)
    }
}

/// Log marginal likelihood and its gradient with respect to
/// `[constant_mean, log signal_variance, log lengthscales.., log
/// noise_variance]`, for raw inputs under the given bounds.
pub fn log_marginal_likelihood(
    bounds: &BoxBounds,
    x: &[Vec<f64>],
    y: &[f64],
    hyper: &GPHyperparameters,
) -> Result<(f64, Vec<f64>), GprError> {
    hyper.validate()?;
    let (x_norm, y_std, _, _) = prepare(bounds, x, y)?;
    let sqdists = per_dim_sqdists(&x_norm);
    let mut meter = CostMeter::new();
    lml_and_grad(&sqdists, &y_std, &hyper.pack(), bounds.len(), &mut meter)
        .ok_or(GprError::IllConditioned(JITTER_MAX))
}

fn prepare(
    bounds: &BoxBounds,
    x: &[Vec<f64>],
    y: &[f64],
) -> Result<(Array2<f64>, Array1<f64>, f64, f64), GprError> {
    if x.is_empty() {
        return Err(GprError::EmptyTrainingSet);
    }
    if x.len() != y.len() || x.iter().any(|row| row.len() != bounds.len()) {
        return Err(GprError::DimensionMismatch);
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(GprError::NonFiniteTarget);
    }
    let n = x.len();
    let mut x_norm = Array2::zeros((n, bounds.len()));
    for (i, row) in x.iter().enumerate() {
        let z = bounds.to_unit(row);
        for (d, &v) in z.iter().enumerate() {
            x_norm[[i, d]] = v;
        }
    }
    let y_mean = y.iter().sum::<f64>() / n as f64;
    let var = y.iter().map(|v| (v - y_mean) * (v - y_mean)).sum::<f64>() / n as f64;
    let y_scale = if var.sqrt() > 1e-12 { var.sqrt() } else { 1.0 };
    let y_std = Array1::from_iter(y.iter().map(|v| (v - y_mean) / y_scale));
    Ok((x_norm, y_std, y_mean, y_scale))
}

fn per_dim_sqdists(x_norm: &Array2<f64>) -> Vec<Array2<f64>> {
    let n = x_norm.nrows();
    let n_dims = x_norm.ncols();
    let mut out = Vec::with_capacity(n_dims);
    for d in 0..n_dims {
        let mut m = Array2::zeros((n, n));
        for i in 0..n {
            for j in (i + 1)..n {
                let diff = x_norm[[i, d]] - x_norm[[j, d]];
                m[[i, j]] = diff * diff;
                m[[j, i]] = m[[i, j]];
            }
        }
        out.push(m);
    }
    out
}

fn kernel_matrix(sqdists: &[Array2<f64>], hyper: &GPHyperparameters) -> Array2<f64> {
    let n = sqdists[0].nrows();
    let mut expo = Array2::<f64>::zeros((n, n));
    for (d, m) in sqdists.iter().enumerate() {
        let inv2 = 1.0 / (hyper.lengthscales[d] * hyper.lengthscales[d]);
        expo.scaled_add(-0.5 * inv2, m);
    }
    expo.mapv_inplace(f64::exp);
    expo *= hyper.signal_variance;
    expo
}

fn cholesky_with_escalation(
    k: &Array2<f64>,
    noise: f64,
    meter: &mut CostMeter,
) -> Result<(Array2<f64>, f64), f64> {
    let n = k.nrows();
    let mut extra = 0.0f64;
    loop {
        let mut a = k.clone();
        for i in 0..n {
            a[[i, i]] += noise + extra;
        }
        meter.add_cholesky(n);
        match a.cholesky(UPLO::Lower) {
            Ok(l) => return Ok((l, extra)),
            Err(_) => {
                extra = if extra == 0.0 { 1e-8 } else { extra * 10.0 };
                if extra > JITTER_MAX {
                    return Err(extra);
                }
                log::debug!("kernel factorization failed, escalating jitter to {extra:.1e}");
            }
        }
    }
}

/// Log marginal likelihood and gradient at packed parameters; `None` when
/// the kernel cannot be factored even with the jitter ladder.
fn lml_and_grad(
    sqdists: &[Array2<f64>],
    y_std: &Array1<f64>,
    params: &[f64],
    n_dims: usize,
    meter: &mut CostMeter,
) -> Option<(f64, Vec<f64>)> {
    let hyper = GPHyperparameters::unpack(params, n_dims);
    let n = y_std.len();
    let k = kernel_matrix(sqdists, &hyper);
    meter.add_gemm(n, n, n_dims);
    meter.add_transcendental(n * n);
    let (l, _extra) = cholesky_with_escalation(&k, hyper.noise_variance, meter).ok()?;

    let resid = y_std.mapv(|v| v - hyper.constant_mean);
    // alpha = A^-1 resid via two triangular solves
    let resid_col = resid.clone().insert_axis(Axis(1));
    let tmp = l
        .solve_triangular(UPLO::Lower, Diag::NonUnit, &resid_col)
        .ok()?;
    let alpha = l
        .t()
        .solve_triangular(UPLO::Upper, Diag::NonUnit, &tmp)
        .ok()?
        .remove_axis(Axis(1));

    let log_det: f64 = (0..n).map(|i| l[[i, i]].ln()).sum();
    let lml = -0.5 * resid.dot(&alpha)
        - log_det
        - 0.5 * n as f64 * (2.0 * std::f64::consts::PI).ln();

    // A^-1 for the trace terms
    let mut a = k.clone();
    for i in 0..n {
        a[[i, i]] += hyper.noise_variance + _extra;
    }
    meter.add_cholesky(n);
    meter.add_inverse(n);
    let a_inv = a.invc().ok()?;

    // G = alpha alpha^T - A^-1; dL/dtheta = 0.5 sum(G o dA/dtheta)
    let mut grad = Vec::with_capacity(params.len());
    // d/d mean
    grad.push(alpha.sum());
    // d/d log sf2: dA = K
    let mut g_dot_k = 0.0;
    for i in 0..n {
        for j in 0..n {
            g_dot_k += (alpha[i] * alpha[j] - a_inv[[i, j]]) * k[[i, j]];
        }
    }
    grad.push(0.5 * g_dot_k);
    // d/d log ls_d: dA = K o D_d / ls_d^2
    for d in 0..n_dims {
        let inv2 = 1.0 / (hyper.lengthscales[d] * hyper.lengthscales[d]);
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += (alpha[i] * alpha[j] - a_inv[[i, j]]) * k[[i, j]] * sqdists[d][[i, j]];
            }
        }
        grad.push(0.5 * acc * inv2);
    }
    meter.add_flops((n * n * (n_dims + 1)) as f64 * 3.0);
    // d/d log sn2: dA = sn2 I
    let mut trace_term = 0.0;
    for i in 0..n {
        trace_term += alpha[i] * alpha[i] - a_inv[[i, i]];
    }
    grad.push(0.5 * hyper.noise_variance * trace_term);

    if lml.is_finite() && grad.iter().all(|g| g.is_finite()) {
        Some((lml, grad))
    } else {
        None
    }
}

fn clamp_params(mut p: Vec<f64>, n_dims: usize) -> Vec<f64> {
    p[1] = p[1].clamp(LOG_SF2_BOUNDS.0, LOG_SF2_BOUNDS.1);
    for d in 0..n_dims {
        p[2 + d] = p[2 + d].clamp(LOG_LS_BOUNDS.0, LOG_LS_BOUNDS.1);
    }
    p[2 + n_dims] = p[2 + n_dims].clamp(LOG_SN2_BOUNDS.0, LOG_SN2_BOUNDS.1);
    p
}

fn adam_ascent(
    sqdists: &[Array2<f64>],
    y_std: &Array1<f64>,
    start: Vec<f64>,
    max_iters: usize,
    n: usize,
    n_dims: usize,
    meter: &mut CostMeter,
) -> (f64, Vec<f64>) {
    let _ = n;
    const LR: f64 = 0.08;
    const BETA1: f64 = 0.9;
    const BETA2: f64 = 0.999;
    const EPS: f64 = 1e-8;
    let mut p = clamp_params(start, n_dims);
    let mut m = vec![0.0; p.len()];
    let mut v = vec![0.0; p.len()];
    let mut best_value = f64::NEG_INFINITY;
    let mut best_p = p.clone();
    for t in 1..=max_iters {
        let Some((value, grad)) = lml_and_grad(sqdists, y_std, &p, n_dims, meter) else {
            break;
        };
        if value > best_value {
            best_value = value;
            best_p = p.clone();
        }
        let grad_norm = grad.iter().fold(0.0f64, |acc, g| acc.max(g.abs()));
        if grad_norm < 1e-5 {
            break;
        }
        let bias1 = 1.0 - BETA1.powi(t as i32);
        let bias2 = 1.0 - BETA2.powi(t as i32);
        for i in 0..p.len() {
            m[i] = BETA1 * m[i] + (1.0 - BETA1) * grad[i];
            v[i] = BETA2 * v[i] + (1.0 - BETA2) * grad[i] * grad[i];
            p[i] += LR * (m[i] / bias1) / ((v[i] / bias2).sqrt() + EPS);
        }
        p = clamp_params(p, n_dims);
    }
    (best_value, best_p)
}

fn build_model(
    bounds: BoxBounds,
    x_norm: Array2<f64>,
    y_std: Array1<f64>,
    y_mean: f64,
    y_scale: f64,
    hyper: GPHyperparameters,
    meter: &mut CostMeter,
) -> Result<GPModel, GprError> {
    let sqdists = per_dim_sqdists(&x_norm);
    let k = kernel_matrix(&sqdists, &hyper);
    let (l, extra) = cholesky_with_escalation(&k, hyper.noise_variance, meter)
        .map_err(GprError::IllConditioned)?;
    let resid = y_std.mapv(|v| v - hyper.constant_mean);
    let resid_col = resid.clone().insert_axis(Axis(1));
    let tmp = l
        .solve_triangular(UPLO::Lower, Diag::NonUnit, &resid_col)
        .map_err(|_| GprError::IllConditioned(extra))?;
    let alpha = l
        .t()
        .solve_triangular(UPLO::Upper, Diag::NonUnit, &tmp)
        .map_err(|_| GprError::IllConditioned(extra))?
        .remove_axis(Axis(1));
    let n = y_std.len();
    let log_det: f64 = (0..n).map(|i| l[[i, i]].ln()).sum();
    let lml = -0.5 * resid.dot(&alpha)
        - log_det
        - 0.5 * n as f64 * (2.0 * std::f64::consts::PI).ln();
    Ok(GPModel {
        effective_noise: hyper.noise_variance + extra,
        hyper,
        bounds,
        x_norm,
        y_std,
        l_factor: l,
        alpha,
        y_mean,
        y_scale,
        log_marginal_likelihood: lml,
    })
}
