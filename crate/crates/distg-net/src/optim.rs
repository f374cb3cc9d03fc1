//! AdamW with decoupled weight decay, plus the cosine learning-rate
//! schedule used by the trainer.

use std::collections::BTreeMap;

use ndarray::ArrayD;

use crate::element::Element;

/// Cosine annealing from `base` at `step = 0` to zero at `step = total`.
pub fn cosine_lr(base: f64, step: usize, total: usize) -> f64 {
    assert!(total > 0, "schedule length must be positive");
    let frac = (step.min(total)) as f64 / total as f64;
    base * 0.5 * (1.0 + (std::f64::consts::PI * frac).cos())
}

/// AdamW optimizer. Moment buffers are keyed by parameter name, so the
/// same optimizer instance follows the network through visitor passes.
///
/// Weight decay is decoupled (applied directly to the parameter, scaled by
/// the learning rate) and only touches tensors named `*.weight`;
/// biases and normalization parameters are exempt.
#[derive(Debug)]
pub struct AdamW<E: Element> {
    beta1: f64,
    beta2: f64,
    eps: f64,
    weight_decay: f64,
    steps: usize,
    m: BTreeMap<String, ArrayD<E>>,
    v: BTreeMap<String, ArrayD<E>>,
}

impl<E: Element> AdamW<E> {
    pub fn new(weight_decay: f64) -> Self {
        Self {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            weight_decay,
            steps: 0,
            m: BTreeMap::new(),
            v: BTreeMap::new(),
        }
    }

    /// Number of completed optimizer steps.
    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Applies one update at learning rate `lr`. The closure must feed
    /// every `(name, value, grad)` triple to the visitor it receives, e.g.
    /// `|f| net.visit_pairs_mut("", f)`.
    pub fn step<F>(&mut self, lr: f64, visit_pairs: F)
    where
        F: FnOnce(&mut crate::param::PairVisitorMut<'_, E>),
    {
        self.steps += 1;
        let t = self.steps as i32;
        let bc1 = 1.0 - self.beta1.powi(t);
        let bc2 = 1.0 - self.beta2.powi(t);
        let b1 = E::from_f64(self.beta1);
        let b2 = E::from_f64(self.beta2);
        let one_m_b1 = E::from_f64(1.0 - self.beta1);
        let one_m_b2 = E::from_f64(1.0 - self.beta2);
        let eps = E::from_f64(self.eps);
        let lr_e = E::from_f64(lr);
        let inv_bc1 = E::from_f64(1.0 / bc1);
        let inv_bc2 = E::from_f64(1.0 / bc2);
        let m_map = &mut self.m;
        let v_map = &mut self.v;
        let decay = self.weight_decay;
        visit_pairs(&mut |name, mut value, grad| {
            let m = m_map
                .entry(name.to_string())
                .or_insert_with(|| ArrayD::zeros(grad.raw_dim()));
            let v = v_map
                .entry(name.to_string())
                .or_insert_with(|| ArrayD::zeros(grad.raw_dim()));
            let shrink = if name.ends_with(".weight") {
                E::from_f64(1.0 - lr * decay)
            } else {
                E::one()
            };
            for ((p, g), (mi, vi)) in value
                .iter_mut()
                .zip(grad.iter())
                .zip(m.iter_mut().zip(v.iter_mut()))
            {
                *mi = b1 * *mi + one_m_b1 * *g;
                *vi = b2 * *vi + one_m_b2 * *g * *g;
                let mhat = *mi * inv_bc1;
                let vhat = *vi * inv_bc2;
                *p = *p * shrink - lr_e * mhat / (vhat.sqrt() + eps);
            }
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::param::Param;
    use ndarray::Array1;

    #[test]
    fn cosine_schedule_endpoints_and_midpoint() {
        assert_eq!(cosine_lr(2.0, 0, 100), 2.0);
        assert!((cosine_lr(2.0, 50, 100) - 1.0).abs() < 1e-12);
        assert!(cosine_lr(2.0, 100, 100).abs() < 1e-12);
        // Clamped past the end rather than turning back up.
        assert!(cosine_lr(2.0, 150, 100).abs() < 1e-12);
    }

    #[test]
    fn cosine_schedule_is_monotonically_decreasing() {
        let mut prev = f64::INFINITY;
        for s in 0..=200 {
            let lr = cosine_lr(1e-3, s, 200);
            assert!(lr <= prev);
            prev = lr;
        }
    }

    #[test]
    fn first_step_magnitude_is_the_learning_rate() {
        let mut p: Param<f64, ndarray::Ix1> = Param::new(Array1::zeros(3));
        p.grad = Array1::from_vec(vec![10.0, -0.5, 2.0]);
        let mut opt: AdamW<f64> = AdamW::new(0.0);
        opt.step(0.01, |f| {
            let Param { value, grad } = &mut p;
            f("x.bias", value.view_mut().into_dyn(), grad.view().into_dyn());
        });
        // m-hat / (sqrt(v-hat) + eps) = sign(g) up to eps, regardless of |g|.
        for (i, sign) in [(0, 1.0), (1, -1.0), (2, 1.0)] {
            assert!((p.value[i] + sign * 0.01).abs() < 1e-6, "{:?}", p.value);
        }
    }

    #[test]
    fn quadratic_is_minimized() {
        let target = Array1::from_vec(vec![1.5, -2.0, 0.25, 4.0]);
        let mut p: Param<f64, ndarray::Ix1> = Param::new(Array1::zeros(4));
        let mut opt: AdamW<f64> = AdamW::new(0.0);
        for _ in 0..2000 {
            p.grad = (&p.value - &target) * 2.0;
            opt.step(0.05, |f| {
                let Param { value, grad } = &mut p;
                f("x.bias", value.view_mut().into_dyn(), grad.view().into_dyn());
            });
        }
        for i in 0..4 {
            assert!((p.value[i] - target[i]).abs() < 1e-3, "{:?}", p.value);
        }
    }

    #[test]
    fn decay_applies_to_weights_only() {
        let mut w: Param<f64, ndarray::Ix1> = Param::new(Array1::from_vec(vec![1.0]));
        let mut b: Param<f64, ndarray::Ix1> = Param::new(Array1::from_vec(vec![1.0]));
        let mut opt: AdamW<f64> = AdamW::new(0.1);
        // Zero gradients: only the decay term can move anything.
        opt.step(0.5, |f| {
            let Param { value, grad } = &mut w;
            f("layer.weight", value.view_mut().into_dyn(), grad.view().into_dyn());
            let Param { value, grad } = &mut b;
            f("layer.bias", value.view_mut().into_dyn(), grad.view().into_dyn());
        });
        assert!((w.value[0] - (1.0 - 0.5 * 0.1)).abs() < 1e-12);
        assert_eq!(b.value[0], 1.0);
    }

    #[test]
    fn moments_track_parameters_by_name() {
        let mut p: Param<f64, ndarray::Ix1> = Param::new(Array1::zeros(1));
        let mut opt: AdamW<f64> = AdamW::new(0.0);
        p.grad[0] = 1.0;
        opt.step(0.1, |f| {
            let Param { value, grad } = &mut p;
            f("a.bias", value.view_mut().into_dyn(), grad.view().into_dyn());
        });
        assert_eq!(opt.steps(), 1);
        assert!(opt.m.contains_key("a.bias"));
        assert!(opt.v.contains_key("a.bias"));
        assert_eq!(opt.m.len(), 1);
    }
}
