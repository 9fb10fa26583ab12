mod common;

use common::{graph, molecules_sized, random_permutation, rng, sample};
use molgp::gpr::{GpError, Posterior};
use molgp::{GpHyperparameters, KernelHyperparameters, MeanMode, TrainedModel};
use nalgebra::{DMatrix, DVector};
use rand::Rng;

/// Squared-exponential kernel on scalar inputs.
fn rbf(a: &[f64], b: &[f64], ell: f64) -> DMatrix<f64> {
    DMatrix::from_fn(a.len(), b.len(), |i, j| (-(a[i] - b[j]).powi(2) / (2.0 * ell * ell)).exp())
}

fn dense_lml(k: &DMatrix<f64>, y: &[f64], gp: &GpHyperparameters, mean: f64) -> f64 {
    let n = y.len();
    let c = k * gp.sigma2 + DMatrix::identity(n, n) * gp.alpha;
    let r = DVector::from_column_slice(y).add_scalar(-mean);
    let inv = c.clone().try_inverse().unwrap();
    -0.5 * (r.transpose() * inv * &r)[0] - 0.5 * c.determinant().ln() - 0.5 * n as f64 * (2.0 * std::f64::consts::PI).ln()
}

#[test]
fn interpolates_with_vanishing_noise() {
    let x = [0.0, 0.7, 1.5, 2.2, 3.1, 4.0];
    let y: Vec<f64> = x.iter().map(|v: &f64| v.sin() * 3.0 + 1.0).collect();
    let gp = GpHyperparameters::new(2.0, 1e-10, MeanMode::Centered);
    let post = Posterior::fit(&rbf(&x, &x, 0.8), &y, &gp).unwrap();
    let cross = rbf(&x, &x, 0.8);
    let pred = post.predict_mean(&cross).unwrap();
    let var = post.predict_variance(&cross, &[1.0; 6]).unwrap();
    for i in 0..6 {
        assert!((pred[i] - y[i]).abs() < 1e-6);
        assert!(var[i] < 1e-6);
    }
}

#[test]
fn far_points_revert_to_prior() {
    let x = [0.0, 1.0, 2.0];
    let y = [1.0, 4.0, -2.0];
    let gp = GpHyperparameters::new(3.0, 1e-2, MeanMode::Centered);
    let post = Posterior::fit(&rbf(&x, &x, 0.5), &y, &gp).unwrap();
    let far = rbf(&[100.0], &x, 0.5);
    assert!((post.predict_mean(&far).unwrap()[0] - 1.0).abs() < 1e-12);
    assert!((post.predict_variance(&far, &[1.0]).unwrap()[0] - 3.0).abs() < 1e-12);
}

#[test]
fn duplicate_points_variance() {
    let k = DMatrix::from_element(2, 2, 1.0);
    for (s, a) in [(1.0, 0.1), (10.0, 0.01), (2.5, 1.0)] {
        let post = Posterior::fit(&k, &[0.3, 0.5], &GpHyperparameters::new(s, a, MeanMode::Zero)).unwrap();
        let v = post.predict_variance(&DMatrix::from_element(1, 2, 1.0), &[1.0]).unwrap()[0];
        let expected = s * a / (2.0 * s + a);
        assert!((v - expected).abs() <= 1e-12 * s, "{v} vs {expected}");
        assert!(v <= a / 2.0);
        let m = post.predict_mean(&DMatrix::from_element(1, 2, 1.0)).unwrap()[0];
        assert!((m - 2.0 * s * 0.4 / (2.0 * s + a)).abs() < 1e-12);
    }
}

#[test]
fn log_marginal_likelihood_matches_dense_formula() {
    let mut r = rng(21);
    let x: Vec<f64> = (0..15).map(|_| r.random_range(0.0..5.0)).collect();
    let y: Vec<f64> = x.iter().map(|v| v.cos() + 0.1 * r.random_range(-1.0..1.0)).collect();
    let k = rbf(&x, &x, 1.0);
    for mean in [MeanMode::Zero, MeanMode::Centered] {
        let gp = GpHyperparameters::new(1.7, 0.05, mean);
        let post = Posterior::fit(&k, &y, &gp).unwrap();
        let expected = dense_lml(&k, &y, &gp, post.mean);
        assert!((post.log_marginal_likelihood() - expected).abs() < 1e-9 * expected.abs().max(1.0));
    }
}

#[test]
fn constant_mean_is_generalized_least_squares() {
    let x = [0.0, 0.5, 1.3, 2.0, 2.9];
    let y = [2.0, 2.5, 1.0, 3.0, 2.2];
    let k = rbf(&x, &x, 0.7);
    let gp = GpHyperparameters::new(4.0, 0.2, MeanMode::Constant);
    let post = Posterior::fit(&k, &y, &gp).unwrap();
    let psi = &k + DMatrix::identity(5, 5) * (0.2 / 4.0);
    let inv = psi.try_inverse().unwrap();
    let ones = DVector::from_element(5, 1.0);
    let yv = DVector::from_column_slice(&y);
    let mu = (ones.transpose() * &inv * &yv)[0] / (ones.transpose() * &inv * &ones)[0];
    let res = yv.add_scalar(-mu);
    let s2 = (res.transpose() * &inv * &res)[0] / 5.0;
    assert!((post.mean - mu).abs() < 1e-12);
    assert!((post.signal - s2).abs() < 1e-12 * s2);
    assert!((post.noise - s2 * 0.05).abs() < 1e-12 * s2);
}

#[test]
fn more_noise_smooths_more() {
    let mut r = rng(22);
    let x: Vec<f64> = (0..20).map(|i| i as f64 * 0.3).collect();
    let y: Vec<f64> = x.iter().map(|v| v.sin() + 0.3 * r.random_range(-1.0..1.0)).collect();
    let k = rbf(&x, &x, 0.6);
    let mut last = -1.0;
    for alpha in [1e-6, 1e-3, 1e-2, 1e-1, 1.0, 10.0] {
        let post = Posterior::fit(&k, &y, &GpHyperparameters::new(1.0, alpha, MeanMode::Centered)).unwrap();
        let pred = post.predict_mean(&k).unwrap();
        let resid = (pred - DVector::from_column_slice(&y)).norm();
        assert!(resid >= last - 1e-12, "alpha = {alpha}");
        last = resid;
    }
}

#[test]
fn rejects_bad_input() {
    let k = DMatrix::from_element(2, 2, 1.0);
    assert!(matches!(
        Posterior::fit(&k, &[1.0, 2.0], &GpHyperparameters::new(1.0, 0.0, MeanMode::Centered)),
        Err(GpError::NotPositiveDefinite { .. })
    ));
    assert!(matches!(
        Posterior::fit(&k, &[1.0], &GpHyperparameters::default()),
        Err(GpError::ShapeMismatch { .. })
    ));
    assert!(matches!(
        Posterior::fit(&k, &[1.0, f64::NAN], &GpHyperparameters::default()),
        Err(GpError::NonFiniteTarget { index: 1 })
    ));
    assert!(GpHyperparameters::new(-1.0, 0.1, MeanMode::Zero).validate().is_err());
    assert!(TrainedModel::fit(vec![graph("C")], &[1.0, 2.0], &KernelHyperparameters::default(), &GpHyperparameters::default()).is_err());
}

#[test]
fn molecular_model_properties() {
    let pool = molecules_sized(2, 14);
    let mut r = rng(23);
    let train = sample(&pool, 25, &mut r);
    let test = sample(&pool, 8, &mut r);
    let y: Vec<f64> = (0..25).map(|_| r.random_range(-10.0..2.0)).collect();
    let kernel = KernelHyperparameters::default();
    let gp = GpHyperparameters::new(10.0, 1e-2, MeanMode::Centered);
    let model = TrainedModel::fit(train.clone(), &y, &kernel, &gp).unwrap();
    let p = model.predict(&test).unwrap();
    for v in p.variance.iter() {
        assert!((0.0..=10.0 + 1e-9).contains(v));
    }

    let cov = model.predict_covariance(&test).unwrap();
    for i in 0..8 {
        assert!((cov[(i, i)] - p.variance[i]).abs() < 1e-8);
    }

    let perm = random_permutation(25, &mut r);
    let shuffled: Vec<_> = perm.iter().map(|&i| train[i].clone()).collect();
    let ys: Vec<f64> = perm.iter().map(|&i| y[i]).collect();
    let other = TrainedModel::fit(shuffled, &ys, &kernel, &gp).unwrap();
    let q = other.predict(&test).unwrap();
    assert!((&p.mean - &q.mean).amax() < 1e-9);
    assert!((&p.variance - &q.variance).amax() < 1e-9);
    assert!((model.log_marginal_likelihood() - other.log_marginal_likelihood()).abs() < 1e-8);

    // shifting the targets shifts centered predictions
    let shifted: Vec<f64> = y.iter().map(|v| v + 5.0).collect();
    let moved = TrainedModel::fit(train, &shifted, &kernel, &gp).unwrap();
    assert!((moved.predict_mean(&test).unwrap().add_scalar(-5.0) - &p.mean).amax() < 1e-9);
}
