use lf_core::ConditionSignal;
use ndarray::{Array, Array3, Dimension};

use crate::denoiser::Denoiser;
use crate::error::DiffusionError;
use crate::schedule::NoiseSchedule;
use crate::Result;

/// Corrupt `x0` to timestep `t` in closed form:
/// `x_t = sqrt(alpha_bar(t)) * x0 + sqrt(1 - alpha_bar(t)) * eps`.
pub fn forward_sample<D: Dimension>(
    x0: &Array<f64, D>,
    t: usize,
    eps: &Array<f64, D>,
    sched: &NoiseSchedule,
) -> Result<Array<f64, D>> {
    if x0.shape() != eps.shape() {
        return Err(DiffusionError::ShapeMismatch(format!(
            "x0 {:?} vs eps {:?}",
            x0.shape(),
            eps.shape()
        )));
    }
    if t < 1 || t > sched.t_max() {
        return Err(DiffusionError::InvalidTimestep { t, lo: 1, t_max: sched.t_max() });
    }
    let ab = sched.alpha_bar(t)?;
    let (ca, cb) = (ab.sqrt(), (1.0 - ab).sqrt());
    Ok(x0 * ca + eps * cb)
}

/// Conditional denoising objective: corrupt `x0` with `eps` at timestep `t`,
/// run the denoiser, and return the mean squared error between `eps` and the
/// estimate. Inputs are SAI-layout `[U*H, V*W, C]` arrays.
pub fn training_loss(
    denoiser: &dyn Denoiser,
    x0: &Array3<f64>,
    c: &ConditionSignal,
    t: usize,
    eps: &Array3<f64>,
    sched: &NoiseSchedule,
) -> Result<f64> {
    let x_t = forward_sample(x0, t, eps, sched)?;
    let est = denoiser.predict_noise(&x_t, t, c)?;
    if est.shape() != eps.shape() {
        return Err(DiffusionError::ShapeMismatch(format!(
            "denoiser output {:?} vs eps {:?}",
            est.shape(),
            eps.shape()
        )));
    }
    let n = eps.len() as f64;
    Ok(eps.iter().zip(est.iter()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{Array1, Array3};

    #[test]
    fn zero_noise_is_a_pure_rescale() {
        let s = NoiseSchedule::default();
        let x0 = Array1::from_vec(vec![0.2, 0.5, 0.9]);
        let eps = Array1::zeros(3);
        for t in [1usize, 500, 1000] {
            let out = forward_sample(&x0, t, &eps, &s).unwrap();
            let ca = s.alpha_bar(t).unwrap().sqrt();
            for i in 0..3 {
                assert_eq!(out[i], x0[i] * ca);
            }
        }
    }

    #[test]
    fn first_step_barely_moves_the_input() {
        let s = NoiseSchedule::default();
        let x0 = Array1::from_vec(vec![0.3, 0.7]);
        let eps = Array1::from_vec(vec![1.0, -2.0]);
        let out = forward_sample(&x0, 1, &eps, &s).unwrap();
        let bound = (1.0 - s.alpha_bar(1).unwrap()).sqrt() * 2.0 + 1e-4;
        for i in 0..2 {
            assert!((out[i] - x0[i]).abs() <= bound);
        }
    }

    #[test]
    fn shape_and_timestep_validation() {
        let s = NoiseSchedule::default();
        let x0 = Array1::zeros(3);
        assert!(matches!(
            forward_sample(&x0, 1, &Array1::zeros(4), &s),
            Err(DiffusionError::ShapeMismatch(_))
        ));
        assert!(forward_sample(&x0, 0, &Array1::zeros(3), &s).is_err());
        assert!(forward_sample(&x0, 1001, &Array1::zeros(3), &s).is_err());
    }

    struct EchoNoise(Array3<f64>);
    impl Denoiser for EchoNoise {
        fn predict_noise(
            &self,
            _x: &Array3<f64>,
            _t: usize,
            _c: &lf_core::ConditionSignal,
        ) -> crate::Result<Array3<f64>> {
            Ok(self.0.clone())
        }
    }

    fn tiny_condition() -> lf_core::ConditionSignal {
        let r = Array3::from_elem((2, 2, 1), 0.5);
        let d = lf_core::DisparityMap::new(ndarray::Array2::zeros((2, 2))).unwrap();
        lf_core::build_condition(&r, &d, 3, 3, 2, lf_core::Interp::Bilinear).unwrap()
    }

    #[test]
    fn loss_vanishes_for_an_oracle_denoiser() {
        let s = NoiseSchedule::default();
        let c = tiny_condition();
        let x0 = Array3::from_elem((6, 6, 1), 0.4);
        let eps = Array3::from_shape_fn((6, 6, 1), |(i, j, _)| ((i * 6 + j) as f64).sin());
        let loss = training_loss(&EchoNoise(eps.clone()), &x0, &c, 500, &eps, &s).unwrap();
        assert_eq!(loss, 0.0);
    }

    #[test]
    fn loss_against_zeros_is_the_mean_square_of_eps() {
        let s = NoiseSchedule::default();
        let c = tiny_condition();
        let x0 = Array3::from_elem((6, 6, 1), 0.4);
        let eps = Array3::from_shape_fn((6, 6, 1), |(i, j, _)| 0.1 * (i as f64) - 0.2 * (j as f64));
        let want = eps.iter().map(|e| e * e).sum::<f64>() / 36.0;
        let loss = training_loss(&EchoNoise(Array3::zeros((6, 6, 1))), &x0, &c, 1, &eps, &s).unwrap();
        assert!((loss - want).abs() < 1e-15);
    }

    #[test]
    fn loss_is_layout_independent() {
        // MSE commutes with any fixed permutation applied to both operands;
        // check with the SAI <-> macro-pixel reshuffle.
        let eps = Array3::from_shape_fn((6, 6, 1), |(i, j, _)| ((3 * i + j) as f64).cos());
        let est = Array3::from_shape_fn((6, 6, 1), |(i, j, _)| ((i + 2 * j) as f64).sin());
        let mse = |a: &Array3<f64>, b: &Array3<f64>| {
            a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / a.len() as f64
        };
        let direct = mse(&eps, &est);
        let eps_mp = lf_core::layout::sai_to_macropixel_array(&eps, 3, 3).unwrap();
        let est_mp = lf_core::layout::sai_to_macropixel_array(&est, 3, 3).unwrap();
        // Equality up to summation order.
        assert!((direct - mse(&eps_mp, &est_mp)).abs() < 1e-14 * direct);
    }
}
