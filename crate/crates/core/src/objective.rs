//! The evaluation contract optimizers and the gradient checker work against.

use crate::error::{Error, Result};
use crate::layout::Layout;
use crate::real::Real;

/// A functional to maximise over layouts, optionally with its gradient.
pub trait Objective<T: Real>: Send + Sync {
    /// Must be deterministic for a fixed layout.
    fn value(&self, layout: &Layout<T>) -> Result<T>;

    fn has_gradient(&self) -> bool {
        false
    }

    /// `dJ/dm`, ordered like the layout vector.
    fn gradient(&self, _layout: &Layout<T>) -> Result<Vec<T>> {
        Err(Error::NoGradient)
    }

    fn value_and_gradient(&self, layout: &Layout<T>) -> Result<(T, Vec<T>)> {
        Ok((self.value(layout)?, self.gradient(layout)?))
    }
}

impl<T: Real, O: Objective<T> + ?Sized> Objective<T> for std::sync::Arc<O> {
    fn value(&self, layout: &Layout<T>) -> Result<T> {
        (**self).value(layout)
    }
    fn has_gradient(&self) -> bool {
        (**self).has_gradient()
    }
    fn gradient(&self, layout: &Layout<T>) -> Result<Vec<T>> {
        (**self).gradient(layout)
    }
    fn value_and_gradient(&self, layout: &Layout<T>) -> Result<(T, Vec<T>)> {
        (**self).value_and_gradient(layout)
    }
}

impl<T: Real, O: Objective<T> + ?Sized> Objective<T> for &O {
    fn value(&self, layout: &Layout<T>) -> Result<T> {
        (**self).value(layout)
    }
    fn has_gradient(&self) -> bool {
        (**self).has_gradient()
    }
    fn gradient(&self, layout: &Layout<T>) -> Result<Vec<T>> {
        (**self).gradient(layout)
    }
    fn value_and_gradient(&self, layout: &Layout<T>) -> Result<(T, Vec<T>)> {
        (**self).value_and_gradient(layout)
    }
}

/// Reference objectives with known optima, used by tests, the CLI gradient
/// check and the acceptance suite.
pub mod oracles {
    use super::*;

    /// `J(m) = scale * ||m - centre||^2`; `scale < 0` gives a concave bowl.
    #[derive(Debug, Clone, PartialEq)]
    pub struct Quadratic<T> {
        pub centre: Vec<T>,
        pub scale: T,
    }

    impl<T: Real> Quadratic<T> {
        /// `||m||^2`.
        pub fn norm_squared(dim: usize) -> Self {
            Quadratic { centre: vec![T::zero(); dim], scale: T::one() }
        }

        /// `-||m - peak||^2`.
        pub fn concave(peak: Vec<T>) -> Self {
            Quadratic { centre: peak, scale: -T::one() }
        }
    }

    impl<T: Real> Objective<T> for Quadratic<T> {
        fn value(&self, layout: &Layout<T>) -> Result<T> {
            check_len(layout, self.centre.len())?;
            let s: T = layout.coords().iter().zip(&self.centre).map(|(&m, &c)| (m - c) * (m - c)).sum();
            Ok(self.scale * s)
        }

        fn has_gradient(&self) -> bool {
            true
        }

        fn gradient(&self, layout: &Layout<T>) -> Result<Vec<T>> {
            check_len(layout, self.centre.len())?;
            let two = T::lit(2.0);
            Ok(layout.coords().iter().zip(&self.centre).map(|(&m, &c)| two * self.scale * (m - c)).collect())
        }
    }

    /// Two isotropic Gaussian peaks in layout space,
    /// `sum_k h_k exp(-||m - c_k||^2 / (2 w_k^2))`.
    #[derive(Debug, Clone, PartialEq)]
    pub struct TwoGaussians<T> {
        pub peaks: [(Vec<T>, T, T); 2],
    }

    impl<T: Real> TwoGaussians<T> {
        pub fn new(c0: Vec<T>, h0: T, w0: T, c1: Vec<T>, h1: T, w1: T) -> Self {
            TwoGaussians { peaks: [(c0, h0, w0), (c1, h1, w1)] }
        }
    }

    impl<T: Real> Objective<T> for TwoGaussians<T> {
        fn value(&self, layout: &Layout<T>) -> Result<T> {
            Ok(self.value_and_gradient(layout)?.0)
        }

        fn has_gradient(&self) -> bool {
            true
        }

        fn gradient(&self, layout: &Layout<T>) -> Result<Vec<T>> {
            Ok(self.value_and_gradient(layout)?.1)
        }

        fn value_and_gradient(&self, layout: &Layout<T>) -> Result<(T, Vec<T>)> {
            let m = layout.coords();
            let mut value = T::zero();
            let mut grad = vec![T::zero(); m.len()];
            for (c, h, w) in &self.peaks {
                check_len(layout, c.len())?;
                let r2: T = m.iter().zip(c).map(|(&a, &b)| (a - b) * (a - b)).sum();
                let two_w2 = T::lit(2.0) * *w * *w;
                let g = *h * (-r2 / two_w2).exp();
                value = value + g;
                for (k, gk) in grad.iter_mut().enumerate() {
                    *gk = *gk - g * T::lit(2.0) * (m[k] - c[k]) / two_w2;
                }
            }
            Ok((value, grad))
        }
    }

    fn check_len<T: Real>(layout: &Layout<T>, n: usize) -> Result<()> {
        if layout.len() != n {
            return Err(Error::LengthMismatch { left: layout.len(), right: n });
        }
        Ok(())
    }
}
