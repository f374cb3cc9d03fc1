use ndarray::{Array1, Array3};

use crate::element::Element;
use crate::error::NetError;
use crate::param::{visit_one, visit_one_mut, visit_one_pair, Param};
use crate::Result;

const EPS: f64 = 1e-5;

/// Per-channel group normalization over the spatial lattice.
///
/// Channels are split into `groups` contiguous groups; mean and variance
/// are taken over all spatial sites and channels of a group, then a learned
/// per-channel scale and shift is applied.
#[derive(Debug, Clone)]
pub struct GroupNorm<E: Element> {
    groups: usize,
    channels: usize,
    gamma: Param<E, ndarray::Ix1>,
    beta: Param<E, ndarray::Ix1>,
}

/// Forward state for the backward pass.
#[derive(Debug)]
pub struct GroupNormCache<E> {
    xhat: Array3<E>,
    inv_std: Vec<E>,
}

impl<E: Element> GroupNorm<E> {
    pub fn new(channels: usize, groups: usize) -> Result<Self> {
        if groups == 0 || channels % groups != 0 {
            return Err(NetError::InvalidConfig(format!(
                "channels ({channels}) must be a multiple of groups ({groups})"
            )));
        }
        Ok(Self {
            groups,
            channels,
            gamma: Param::new(Array1::from_elem(channels, E::one())),
            beta: Param::new(Array1::zeros(channels)),
        })
    }

    pub fn forward(&self, x: &Array3<E>) -> Result<(Array3<E>, GroupNormCache<E>)> {
        let (rows, cols, ch) = x.dim();
        if ch != self.channels {
            return Err(NetError::ShapeMismatch(format!(
                "group norm expects {} channels, got {ch}",
                self.channels
            )));
        }
        let cg = self.channels / self.groups;
        let m = E::from_f64((rows * cols * cg) as f64);
        let mut xhat = Array3::zeros((rows, cols, ch));
        let mut inv_std = Vec::with_capacity(self.groups);
        for g in 0..self.groups {
            let c0 = g * cg;
            let mut mean = E::zero();
            for r in 0..rows {
                for c in 0..cols {
                    for k in 0..cg {
                        mean = mean + x[[r, c, c0 + k]];
                    }
                }
            }
            mean = mean / m;
            let mut var = E::zero();
            for r in 0..rows {
                for c in 0..cols {
                    for k in 0..cg {
                        let d = x[[r, c, c0 + k]] - mean;
                        var = var + d * d;
                    }
                }
            }
            var = var / m;
            let istd = (var + E::from_f64(EPS)).sqrt().recip();
            inv_std.push(istd);
            for r in 0..rows {
                for c in 0..cols {
                    for k in 0..cg {
                        xhat[[r, c, c0 + k]] = (x[[r, c, c0 + k]] - mean) * istd;
                    }
                }
            }
        }
        let mut y = Array3::zeros((rows, cols, ch));
        for r in 0..rows {
            for c in 0..cols {
                for k in 0..ch {
                    y[[r, c, k]] = self.gamma.value[k] * xhat[[r, c, k]] + self.beta.value[k];
                }
            }
        }
        Ok((y, GroupNormCache { xhat, inv_std }))
    }

    pub fn backward(&mut self, cache: &GroupNormCache<E>, dy: &Array3<E>) -> Array3<E> {
        let (rows, cols, ch) = dy.dim();
        let cg = self.channels / self.groups;
        let m = E::from_f64((rows * cols * cg) as f64);
        // Per-channel parameter gradients.
        for r in 0..rows {
            for c in 0..cols {
                for k in 0..ch {
                    self.gamma.grad[k] = self.gamma.grad[k] + dy[[r, c, k]] * cache.xhat[[r, c, k]];
                    self.beta.grad[k] = self.beta.grad[k] + dy[[r, c, k]];
                }
            }
        }
        let mut dx = Array3::zeros((rows, cols, ch));
        for g in 0..self.groups {
            let c0 = g * cg;
            let istd = cache.inv_std[g];
            let mut sum_dxhat = E::zero();
            let mut sum_dxhat_xhat = E::zero();
            for r in 0..rows {
                for c in 0..cols {
                    for k in 0..cg {
                        let dxh = dy[[r, c, c0 + k]] * self.gamma.value[c0 + k];
                        sum_dxhat = sum_dxhat + dxh;
                        sum_dxhat_xhat = sum_dxhat_xhat + dxh * cache.xhat[[r, c, c0 + k]];
                    }
                }
            }
            for r in 0..rows {
                for c in 0..cols {
                    for k in 0..cg {
                        let dxh = dy[[r, c, c0 + k]] * self.gamma.value[c0 + k];
                        dx[[r, c, c0 + k]] = istd / m
                            * (m * dxh
                                - sum_dxhat
                                - cache.xhat[[r, c, c0 + k]] * sum_dxhat_xhat);
                    }
                }
            }
        }
        dx
    }

    pub fn zero_grads(&mut self) {
        self.gamma.zero_grad();
        self.beta.zero_grad();
    }

    pub fn param_count(&self) -> usize {
        2 * self.channels
    }

    pub fn visit(&self, prefix: &str, f: &mut crate::param::ParamVisitor<'_, E>) {
        visit_one!(&self.gamma, prefix, "gamma", f);
        visit_one!(&self.beta, prefix, "beta", f);
    }

    pub fn visit_mut(&mut self, prefix: &str, f: &mut crate::param::ParamVisitorMut<'_, E>) {
        visit_one_mut!(&mut self.gamma, prefix, "gamma", f);
        visit_one_mut!(&mut self.beta, prefix, "beta", f);
    }

    pub fn visit_pairs_mut(&mut self, prefix: &str, f: &mut crate::param::PairVisitorMut<'_, E>) {
        visit_one_pair!(&mut self.gamma, prefix, "gamma", f);
        visit_one_pair!(&mut self.beta, prefix, "beta", f);
    }
}
