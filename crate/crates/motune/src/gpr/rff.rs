use ndarray::prelude::*;
use ndarray_linalg::cholesky::*;
use ndarray_linalg::triangular::*;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::GPModel;
use crate::cost::CostMeter;
use crate::BoxBounds;

/// One deterministic approximate posterior draw, represented by random
/// Fourier features of the squared exponential kernel with weights
/// conditioned on the training data.
#[derive(Debug, Clone)]
pub struct SampledFunction {
    /// Spectral frequencies, already scaled by the inverse lengthscales
    /// (F x N).
    frequencies: Array2<f64>,
    phases: Array1<f64>,
    weights: Array1<f64>,
    amplitude: f64,
    constant_mean: f64,
    y_mean: f64,
    y_scale: f64,
    bounds: BoxBounds,
}

impl SampledFunction {
    /// Value of the draw at a raw-space point, in original target units.
    pub fn eval(&self, theta: &[f64]) -> f64 {
        self.eval_batch(std::slice::from_ref(&theta.to_vec()))[0]
    }

    pub fn eval_batch(&self, thetas: &[Vec<f64>]) -> Vec<f64> {
        let m = thetas.len();
        let n_dims = self.frequencies.ncols();
        let mut z = Array2::<f64>::zeros((m, n_dims));
        for (i, theta) in thetas.iter().enumerate() {
            let u = self.bounds.to_unit(theta);
            for (d, &v) in u.iter().enumerate() {
                z[[i, d]] = v;
            }
        }
        // phi = amp * cos(Z W^T + b)
        let mut proj = z.dot(&self.frequencies.t());
        for (i, mut row) in proj.outer_iter_mut().enumerate() {
            let _ = i;
            row += &self.phases;
        }
        proj.mapv_inplace(f64::cos);
        let f_std = proj.dot(&self.weights) * self.amplitude;
        f_std
            .iter()
            .map(|v| (self.constant_mean + v) * self.y_scale + self.y_mean)
            .collect()
    }

    pub fn n_features(&self) -> usize {
        self.frequencies.nrows()
    }
}

/// Draws one approximate posterior sample from a fitted model: spectral
/// frequencies of the anisotropic squared exponential kernel, phases uniform
/// on [0, 2 pi), and feature weights from their Gaussian posterior under the
/// training data.
pub fn sample_posterior<R: Rng>(
    model: &GPModel,
    n_features: usize,
    rng: &mut R,
    meter: &mut CostMeter,
) -> SampledFunction {
    assert!(n_features >= 1);
    let hyper = model.hyperparameters();
    let x = model.normalized_inputs();
    let y = model.standardized_targets();
    let n = x.nrows();
    let n_dims = x.ncols();
    let amplitude = (2.0 * hyper.signal_variance / n_features as f64).sqrt();

    let mut frequencies = Array2::<f64>::zeros((n_features, n_dims));
    for f in 0..n_features {
        for d in 0..n_dims {
            let g: f64 = StandardNormal.sample(rng);
            frequencies[[f, d]] = g / hyper.lengthscales[d];
        }
    }
    let phases =
        Array1::from_iter((0..n_features).map(|_| rng.random_range(0.0..std::f64::consts::TAU)));
    let xi = Array1::from_iter((0..n_features).map(|_| {
        let g: f64 = StandardNormal.sample(rng);
        g
    }));

    // features of the training inputs
    let mut phi = x.dot(&frequencies.t());
    for mut row in phi.outer_iter_mut() {
        row += &phases;
    }
    phi.mapv_inplace(f64::cos);
    phi *= amplitude;
    meter.add_gemm(n, n_features, n_dims);
    meter.add_transcendental(n * n_features);

    // Bayesian linear model: w ~ N(0, I), y = phi w + mean + noise
    let noise = model.effective_noise();
    let mut a = phi.t().dot(&phi);
    meter.add_gemm(n_features, n_features, n);
    for i in 0..n_features {
        a[[i, i]] += noise;
    }
    meter.add_cholesky(n_features);
    let (w_mean, l) = match a.cholesky(UPLO::Lower) {
        Ok(l) => {
            let resid = y.mapv(|v| v - hyper.constant_mean);
            let rhs = phi.t().dot(&resid).insert_axis(Axis(1));
            let tmp = l
                .solve_triangular(UPLO::Lower, Diag::NonUnit, &rhs)
                .expect("triangular solve");
            let mean = l
                .t()
                .solve_triangular(UPLO::Upper, Diag::NonUnit, &tmp)
                .expect("triangular solve")
                .remove_axis(Axis(1));
            (mean, l)
        }
        Err(_) => {
            // extremely ill-conditioned feature matrix: fall back to the
            // prior draw
            log::warn!("feature conditioning failed, sampling from the prior");
            (Array1::zeros(n_features), Array2::eye(n_features))
        }
    };
    // w = mean + sqrt(noise) * L^-T xi
    let xi_col = xi.insert_axis(Axis(1));
    let fluct = l
        .t()
        .solve_triangular(UPLO::Upper, Diag::NonUnit, &xi_col)
        .expect("triangular solve")
        .remove_axis(Axis(1));
    let weights = &w_mean + &(fluct * noise.sqrt());

    let (y_mean, y_scale) = model.output_standardization();
    SampledFunction {
        frequencies,
        phases,
        weights,
        amplitude,
        constant_mean: hyper.constant_mean,
        y_mean,
        y_scale,
        bounds: model.bounds().clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gpr::{fit, GPHyperparameters};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn trained_model(rng: &mut ChaCha8Rng) -> GPModel {
        let bounds = BoxBounds::uniform(2, 0.0, 1.0).unwrap();
        let x: Vec<Vec<f64>> = (0..12)
            .map(|_| vec![rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)])
            .collect();
        let y: Vec<f64> = x.iter().map(|r| (4.0 * r[0]).sin() + r[1]).collect();
        fit(&bounds, &x, &y, 3, rng).unwrap()
    }

    #[test]
    fn draw_is_deterministic_at_a_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let model = trained_model(&mut rng);
        let mut meter = CostMeter::new();
        let draw = sample_posterior(&model, 200, &mut rng, &mut meter);
        let a = draw.eval(&[0.25, 0.75]);
        let b = draw.eval(&[0.25, 0.75]);
        assert_eq!(a, b);
    }

    #[test]
    fn draws_agree_with_posterior_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let model = trained_model(&mut rng);
        let query = vec![0.4, 0.4];
        let (mu, sigma) = model.predict(&query);
        let mut meter = CostMeter::new();
        let n_draws = 200;
        let values: Vec<f64> = (0..n_draws)
            .map(|_| sample_posterior(&model, 500, &mut rng, &mut meter).eval(&query))
            .collect();
        let mean = values.iter().sum::<f64>() / n_draws as f64;
        // standard error of the mean over draws: sigma / sqrt(n) plus finite
        // feature bias; allow three standard errors with margin
        let se = sigma / (n_draws as f64).sqrt();
        assert!(
            (mean - mu).abs() < 3.0 * se + 0.05 * sigma.max(1e-3),
            "draw mean {mean} vs posterior mean {mu} (sigma {sigma})"
        );
    }

    #[test]
    fn draws_concentrate_at_training_points() {
        let bounds = BoxBounds::uniform(1, 0.0, 1.0).unwrap();
        let x = vec![vec![0.2], vec![0.5], vec![0.8]];
        let y = vec![1.0, -1.0, 0.5];
        let hyper = GPHyperparameters {
            constant_mean: 0.0,
            signal_variance: 1.0,
            lengthscales: vec![0.2],
            noise_variance: 1e-6,
        };
        let model = GPModel::with_hyperparameters(&bounds, &x, &y, hyper).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut meter = CostMeter::new();
        for _ in 0..30 {
            let draw = sample_posterior(&model, 800, &mut rng, &mut meter);
            for (xi, yi) in x.iter().zip(&y) {
                let v = draw.eval(xi);
                let (_, sigma) = model.predict(xi);
                // five posterior deviations plus feature truncation slack
                let tol = 5.0 * sigma.max(1e-3) + 0.15;
                assert!((v - yi).abs() < tol, "draw {v} target {yi} tol {tol}");
            }
        }
    }
}
