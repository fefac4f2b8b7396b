use crate::scalar::Scalar;

use super::Objective;

/// Largest coordinate-wise decrease rate
/// `max_{i, s = +-1} (f(x) - f(x + s h e_i)) / h`.
///
/// For a convex function a value `<= eps` certifies approximate stationarity
/// along every coordinate; a negative value means every probe increases `f`.
pub fn stationarity_gap<T: Scalar, O: Objective<T> + ?Sized>(objective: &O, x: &[T], h_probe: T) -> T {
    assert!(h_probe > T::zero(), "probe step must be positive");
    let f0 = objective.value(x);
    objective
        .coordinate_probes(x, h_probe)
        .into_iter()
        .flatten()
        .map(|f| (f0 - f) / h_probe)
        .fold(T::neg_infinity(), T::max)
}
