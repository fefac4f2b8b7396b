//! Derivative-free minimization of nonsmooth functionals.
//!
//! [`powell_minimize`] runs Powell's conjugate direction method on anything
//! implementing [`Objective`]. Plain closures `Fn(&[T]) -> T` work directly;
//! structured objectives can override [`Objective::restrict`] and
//! [`Objective::coordinate_probes`] to make line restrictions and coordinate probes cheap.

mod line_search;
mod powell;
mod stationarity;

pub use line_search::{golden_line_search, golden_section, LineSearchConfig, LineSearchOutcome};
pub use powell::{powell_minimize, MinimizeReport, PowellConfig};
pub use stationarity::stationarity_gap;

use crate::scalar::Scalar;

/// Scalar objective on `R^n`.
pub trait Objective<T: Scalar> {
    fn value(&self, x: &[T]) -> T;

    /// The restriction `t -> value(x + t d)`.
    fn restrict<'a>(&'a self, x: &'a [T], d: &'a [T]) -> Box<dyn FnMut(T) -> T + 'a> {
        let mut buf = x.to_vec();
        Box::new(move |t| {
            for ((b, &xi), &di) in buf.iter_mut().zip(x).zip(d) {
                *b = xi + t * di;
            }
            self.value(&buf)
        })
    }

    /// `[value(x + h e_i), value(x - h e_i)]` for every coordinate `i`.
    fn coordinate_probes(&self, x: &[T], h: T) -> Vec<[T; 2]> {
        let mut y = x.to_vec();
        (0..x.len())
            .map(|i| {
                let out = [h, -h].map(|s| {
                    y[i] = x[i] + s;
                    self.value(&y)
                });
                y[i] = x[i];
                out
            })
            .collect()
    }
}

impl<T: Scalar, F: Fn(&[T]) -> T> Objective<T> for F {
    fn value(&self, x: &[T]) -> T {
        self(x)
    }
}
