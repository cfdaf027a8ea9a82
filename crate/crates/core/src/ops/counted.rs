use std::sync::atomic::{AtomicU64, Ordering};

use crate::Scalar;

use super::{LipschitzOp, ProxOracle};

/// Wrapper counting `eval`/`prox` invocations of the inner operator.
///
/// The counter is atomic, so a wrapped operator may be shared by concurrent
/// runs; the count is then the total over all of them.
#[derive(Debug, Default)]
pub struct Counted<O> {
    inner: O,
    calls: AtomicU64,
}

impl<O> Counted<O> {
    pub fn new(inner: O) -> Self {
        Self { inner, calls: AtomicU64::new(0) }
    }

    pub fn count(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }

    pub fn reset(&self) {
        self.calls.store(0, Ordering::Relaxed);
    }

    pub fn inner(&self) -> &O {
        &self.inner
    }

    fn tick(&self) {
        self.calls.fetch_add(1, Ordering::Relaxed);
    }
}

impl<T: Scalar, O: LipschitzOp<T>> LipschitzOp<T> for Counted<O> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn eval_to(&self, x: &[T], out: &mut [T]) {
        self.tick();
        self.inner.eval_to(x, out)
    }

    fn lipschitz(&self) -> T {
        self.inner.lipschitz()
    }
}

impl<T: Scalar, O: ProxOracle<T>> ProxOracle<T> for Counted<O> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn prox_to(&self, gamma: T, x: &[T], out: &mut [T]) {
        self.tick();
        self.inner.prox_to(gamma, x, out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ops::{ScaledIdentityResolvent, ZeroOp};

    #[test]
    fn counts_evaluations() {
        let b = Counted::new(ZeroOp(2));
        assert_eq!(b.count(), 0);
        for _ in 0..3 {
            let _: Vec<f64> = b.eval(&[1.0, 2.0]);
        }
        assert_eq!(b.count(), 3);
    }

    #[test]
    fn reset_restarts_count() {
        let a = Counted::new(ScaledIdentityResolvent { dim: 1, a: 1.0 });
        for _ in 0..5 {
            a.prox(0.5, &[1.0]);
        }
        a.reset();
        a.prox(0.5, &[1.0]);
        a.prox(0.5, &[1.0]);
        assert_eq!(a.count(), 2);
    }

    #[test]
    fn wrapping_preserves_behaviour() {
        let raw = ScaledIdentityResolvent { dim: 2, a: 2.0 };
        let wrapped = Counted::new(raw);
        assert_eq!(wrapped.prox(0.25, &[3.0, -1.5]), raw.prox(0.25, &[3.0, -1.5]));
    }
}
