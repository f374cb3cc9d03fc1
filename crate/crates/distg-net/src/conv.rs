use ndarray::linalg::general_mat_mul;
use ndarray::{Array1, Array2, Array3, Array4};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::element::Element;
use crate::error::NetError;
use crate::param::{visit_one, visit_one_mut, visit_one_pair, Param};
use crate::Result;

/// Geometry of a 2D convolution over `[rows, cols, channels]` inputs with
/// zero padding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConvSpec {
    pub in_ch: usize,
    pub out_ch: usize,
    pub kernel: (usize, usize),
    pub stride: (usize, usize),
    pub pad: (usize, usize),
    pub dilation: (usize, usize),
}

impl ConvSpec {
    /// A stride-1, pad-0, dilation-1 pointwise (1x1) projection.
    pub fn pointwise(in_ch: usize, out_ch: usize) -> Self {
        Self { in_ch, out_ch, kernel: (1, 1), stride: (1, 1), pad: (0, 0), dilation: (1, 1) }
    }

    fn effective_kernel(&self) -> (usize, usize) {
        (
            self.dilation.0 * (self.kernel.0 - 1) + 1,
            self.dilation.1 * (self.kernel.1 - 1) + 1,
        )
    }

    /// Output extent for an input of `rows x cols`.
    pub fn out_shape(&self, rows: usize, cols: usize) -> Result<(usize, usize)> {
        let (ekr, ekc) = self.effective_kernel();
        let padded = (rows + 2 * self.pad.0, cols + 2 * self.pad.1);
        if padded.0 < ekr || padded.1 < ekc {
            return Err(NetError::ShapeMismatch(format!(
                "input {rows}x{cols} too small for kernel {:?} dilation {:?} pad {:?}",
                self.kernel, self.dilation, self.pad
            )));
        }
        Ok((
            (padded.0 - ekr) / self.stride.0 + 1,
            (padded.1 - ekc) / self.stride.1 + 1,
        ))
    }

    fn k(&self) -> usize {
        self.in_ch * self.kernel.0 * self.kernel.1
    }
}

/// Weight initialization scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Init {
    /// Zero-mean normal with variance `2 / fan_in`.
    He,
    /// All zeros (used for fusion projections and output heads so the
    /// network starts as an identity-plus-zero map).
    Zero,
}

/// Unroll the input into the `[in_ch * kh * kw, out_h * out_w]` column
/// matrix; out-of-range taps contribute zero.
fn im2col<E: Element>(x: &Array3<E>, spec: &ConvSpec, out: (usize, usize)) -> Array2<E> {
    let (rows, cols, _) = x.dim();
    let (oh, ow) = out;
    let mut col = Array2::zeros((spec.k(), oh * ow));
    let mut k = 0;
    for ci in 0..spec.in_ch {
        for kr in 0..spec.kernel.0 {
            for kc in 0..spec.kernel.1 {
                let mut n = 0;
                for or_ in 0..oh {
                    let r = (or_ * spec.stride.0 + kr * spec.dilation.0) as isize
                        - spec.pad.0 as isize;
                    for oc_ in 0..ow {
                        let c = (oc_ * spec.stride.1 + kc * spec.dilation.1) as isize
                            - spec.pad.1 as isize;
                        if r >= 0 && (r as usize) < rows && c >= 0 && (c as usize) < cols {
                            col[[k, n]] = x[[r as usize, c as usize, ci]];
                        }
                        n += 1;
                    }
                }
                k += 1;
            }
        }
    }
    col
}

/// Scatter-add the column-matrix gradient back onto the input lattice; the
/// exact adjoint of [`im2col`].
fn col2im<E: Element>(
    dcol: &Array2<E>,
    spec: &ConvSpec,
    in_shape: (usize, usize, usize),
    out: (usize, usize),
) -> Array3<E> {
    let (rows, cols, _) = in_shape;
    let (oh, ow) = out;
    let mut dx = Array3::zeros(in_shape);
    let mut k = 0;
    for ci in 0..spec.in_ch {
        for kr in 0..spec.kernel.0 {
            for kc in 0..spec.kernel.1 {
                let mut n = 0;
                for or_ in 0..oh {
                    let r = (or_ * spec.stride.0 + kr * spec.dilation.0) as isize
                        - spec.pad.0 as isize;
                    for oc_ in 0..ow {
                        let c = (oc_ * spec.stride.1 + kc * spec.dilation.1) as isize
                            - spec.pad.1 as isize;
                        if r >= 0 && (r as usize) < rows && c >= 0 && (c as usize) < cols {
                            dx[[r as usize, c as usize, ci]] =
                                dx[[r as usize, c as usize, ci]] + dcol[[k, n]];
                        }
                        n += 1;
                    }
                }
                k += 1;
            }
        }
    }
    dx
}

/// Saved forward state needed by the backward pass.
#[derive(Debug)]
pub struct ConvCache<E> {
    col: Array2<E>,
    in_shape: (usize, usize, usize),
    out: (usize, usize),
}

/// A 2D convolution layer; weights are `[out_ch, in_ch, kh, kw]`.
#[derive(Debug, Clone)]
pub struct Conv2d<E: Element> {
    spec: ConvSpec,
    w: Param<E, ndarray::Ix4>,
    b: Param<E, ndarray::Ix1>,
}

impl<E: Element> Conv2d<E> {
    pub fn new<R: Rng>(spec: ConvSpec, init: Init, rng: &mut R) -> Self {
        let shape = (spec.out_ch, spec.in_ch, spec.kernel.0, spec.kernel.1);
        let w = match init {
            Init::Zero => Array4::zeros(shape),
            Init::He => {
                let std = (2.0 / spec.k() as f64).sqrt();
                Array4::from_shape_fn(shape, |_| {
                    E::from_f64(rng.sample::<f64, _>(StandardNormal) * std)
                })
            }
        };
        Self { spec, w: Param::new(w), b: Param::new(Array1::zeros(spec.out_ch)) }
    }

    pub fn spec(&self) -> &ConvSpec {
        &self.spec
    }

    pub fn forward(&self, x: &Array3<E>) -> Result<(Array3<E>, ConvCache<E>)> {
        let (rows, cols, ch) = x.dim();
        if ch != self.spec.in_ch {
            return Err(NetError::ShapeMismatch(format!(
                "conv expects {} input channels, got {ch}",
                self.spec.in_ch
            )));
        }
        let out = self.spec.out_shape(rows, cols)?;
        let col = im2col(x, &self.spec, out);
        let k = self.spec.k();
        let w2 = self
            .w
            .value
            .view()
            .into_shape_with_order((self.spec.out_ch, k))
            .expect("contiguous weights");
        let mut y_mat = Array2::zeros((self.spec.out_ch, out.0 * out.1));
        general_mat_mul(E::one(), &w2, &col, E::zero(), &mut y_mat);
        let mut y = Array3::zeros((out.0, out.1, self.spec.out_ch));
        for o in 0..self.spec.out_ch {
            let bias = self.b.value[o];
            let mut n = 0;
            for r in 0..out.0 {
                for c in 0..out.1 {
                    y[[r, c, o]] = y_mat[[o, n]] + bias;
                    n += 1;
                }
            }
        }
        Ok((y, ConvCache { col, in_shape: (rows, cols, ch), out }))
    }

    /// Accumulate weight/bias gradients from `dy` and return the input
    /// gradient.
    pub fn backward(&mut self, cache: &ConvCache<E>, dy: &Array3<E>) -> Array3<E> {
        let (oh, ow) = cache.out;
        let oc = self.spec.out_ch;
        debug_assert_eq!(dy.dim(), (oh, ow, oc));
        let mut dy_mat = Array2::zeros((oc, oh * ow));
        for o in 0..oc {
            let mut n = 0;
            for r in 0..oh {
                for c in 0..ow {
                    dy_mat[[o, n]] = dy[[r, c, o]];
                    n += 1;
                }
            }
        }
        let k = self.spec.k();
        {
            let mut dw2 = self
                .w
                .grad
                .view_mut()
                .into_shape_with_order((oc, k))
                .expect("contiguous weight grad");
            general_mat_mul(E::one(), &dy_mat, &cache.col.t(), E::one(), &mut dw2);
        }
        for o in 0..oc {
            let mut s = E::zero();
            for n in 0..oh * ow {
                s = s + dy_mat[[o, n]];
            }
            self.b.grad[o] = self.b.grad[o] + s;
        }
        let w2 = self
            .w
            .value
            .view()
            .into_shape_with_order((oc, k))
            .expect("contiguous weights");
        let mut dcol = Array2::zeros((k, oh * ow));
        general_mat_mul(E::one(), &w2.t(), &dy_mat, E::zero(), &mut dcol);
        col2im(&dcol, &self.spec, cache.in_shape, cache.out)
    }

    pub fn zero_grads(&mut self) {
        self.w.zero_grad();
        self.b.zero_grad();
    }

    pub fn param_count(&self) -> usize {
        self.w.value.len() + self.b.value.len()
    }

    pub fn visit(&self, prefix: &str, f: &mut crate::param::ParamVisitor<'_, E>) {
        visit_one!(&self.w, prefix, "weight", f);
        visit_one!(&self.b, prefix, "bias", f);
    }

    pub fn visit_mut(&mut self, prefix: &str, f: &mut crate::param::ParamVisitorMut<'_, E>) {
        visit_one_mut!(&mut self.w, prefix, "weight", f);
        visit_one_mut!(&mut self.b, prefix, "bias", f);
    }

    pub fn visit_pairs_mut(&mut self, prefix: &str, f: &mut crate::param::PairVisitorMut<'_, E>) {
        visit_one_pair!(&mut self.w, prefix, "weight", f);
        visit_one_pair!(&mut self.b, prefix, "bias", f);
    }
}
