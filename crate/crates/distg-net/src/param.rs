use ndarray::{Array, ArrayViewD, ArrayViewMutD, Dimension};

use crate::element::Element;

/// A learnable tensor paired with its gradient accumulator.
#[derive(Debug, Clone)]
pub struct Param<E, D: Dimension> {
    pub value: Array<E, D>,
    pub grad: Array<E, D>,
}

impl<E: Element, D: Dimension> Param<E, D> {
    pub fn new(value: Array<E, D>) -> Self {
        let grad = Array::zeros(value.raw_dim());
        Self { value, grad }
    }

    pub fn zero_grad(&mut self) {
        self.grad.fill(E::zero());
    }
}

/// Read-only visitor over named parameter values.
pub type ParamVisitor<'v, E> = dyn FnMut(&str, ArrayViewD<'_, E>) + 'v;
/// Mutable visitor over named parameter values (checkpoint load, probing).
pub type ParamVisitorMut<'v, E> = dyn FnMut(&str, ArrayViewMutD<'_, E>) + 'v;
/// Visitor over `(value, gradient)` pairs, for optimizers.
pub type PairVisitorMut<'v, E> = dyn FnMut(&str, ArrayViewMutD<'_, E>, ArrayViewD<'_, E>) + 'v;

/// Join a module path with a local parameter name.
pub fn join(prefix: &str, local: &str) -> String {
    if prefix.is_empty() {
        local.to_string()
    } else {
        format!("{prefix}.{local}")
    }
}

/// Visit one `Param` under `prefix.local`.
macro_rules! visit_one {
    ($param:expr, $prefix:expr, $local:expr, $f:expr) => {
        $f(&crate::param::join($prefix, $local), $param.value.view().into_dyn())
    };
}
macro_rules! visit_one_mut {
    ($param:expr, $prefix:expr, $local:expr, $f:expr) => {
        $f(&crate::param::join($prefix, $local), $param.value.view_mut().into_dyn())
    };
}
macro_rules! visit_one_pair {
    ($param:expr, $prefix:expr, $local:expr, $f:expr) => {{
        let crate::param::Param { value, grad } = $param;
        $f(
            &crate::param::join($prefix, $local),
            value.view_mut().into_dyn(),
            grad.view().into_dyn(),
        )
    }};
}

pub(crate) use {visit_one, visit_one_mut, visit_one_pair};
