use crate::algebra::So3Vector;

/// A curve in so(3) that can report its own t-derivatives.
///
/// `eval(t, k)` returns the k-th derivative at `t`; implementors document which
/// orders they support. Closures `Fn(f64, usize) -> So3Vector` implement this
/// trait directly.
pub trait So3Curve {
    fn eval(&self, t: f64, order: usize) -> So3Vector;

    fn value(&self, t: f64) -> So3Vector {
        self.eval(t, 0)
    }

    /// Interval on which the curve is defined, if it is not all of ℝ.
    fn domain(&self) -> Option<(f64, f64)> {
        None
    }
}

impl<F> So3Curve for F
where
    F: Fn(f64, usize) -> So3Vector,
{
    fn eval(&self, t: f64, order: usize) -> So3Vector {
        self(t, order)
    }
}
