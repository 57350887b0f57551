use crate::error::{Error, Result};
use crate::scalar::{lit, Scalar};

/// Uniform sampling grid: points `start + n * step` for `n in 0..count`.
///
/// Grids are half-open: a centered grid covers `[-span/2, span/2)` and always
/// contains the origin exactly (at index `count / 2`), which keeps symmetry
/// checks and kink-aware quadrature exact.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid<T> {
    pub start: T,
    pub step: T,
    pub count: usize,
}

/// Default number of grid points for rendered signals.
///
/// The binding constraint is the 1e-8 grid-halving budget on second-order
/// quadrature of integrands with an origin kink. Squared both-side
/// exponentials are the worst case: their relative rectangle-rule error is
/// (2 * 40 / N)^2 / 6 regardless of rate, which is 1.6e-8 at 2^18 points but
/// 3.9e-9 at 2^19 over the default +/-40/rate span.
pub const DEFAULT_GRID_POINTS: usize = 1 << 19;

impl<T: Scalar> Grid<T> {
    pub fn new(start: T, step: T, count: usize) -> Result<Self> {
        if !(step > T::zero()) || !step.is_finite() || !start.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "grid needs finite start and positive step (start {:?}, step {:?})",
                start, step
            )));
        }
        if count < 2 {
            return Err(Error::InvalidParameter(format!("grid needs >= 2 points, got {count}")));
        }
        Ok(Self { start, step, count })
    }

    /// Centered grid with `count` points and the origin at index `count / 2`.
    pub fn centered(step: T, count: usize) -> Result<Self> {
        let half = lit::<T>((count / 2) as f64);
        Self::new(-half * step, step, count)
    }

    /// Centered grid covering `[-half_span, half_span)` with `count` points.
    pub fn symmetric(half_span: T, count: usize) -> Result<Self> {
        if !(half_span > T::zero()) {
            return Err(Error::InvalidParameter("grid half-span must be positive".into()));
        }
        let step = (half_span + half_span) / lit::<T>(count as f64);
        Self::centered(step, count)
    }

    #[inline]
    pub fn point(&self, n: usize) -> T {
        self.start + lit::<T>(n as f64) * self.step
    }

    pub fn points(&self) -> impl Iterator<Item = T> + '_ {
        (0..self.count).map(move |n| self.point(n))
    }

    pub fn end(&self) -> T {
        self.point(self.count - 1)
    }

    pub fn span(&self) -> T {
        self.step * lit::<T>(self.count as f64)
    }

    /// Index of the grid point closest to the origin.
    pub fn origin_index(&self) -> usize {
        self.count / 2
    }

    pub fn approx_eq(&self, other: &Self) -> bool {
        let tol = self.step * lit::<T>(1e-9);
        self.count == other.count
            && (self.start - other.start).abs() <= tol
            && (self.step - other.step).abs() <= tol
    }

    /// Grid the unitary Fourier transform maps this grid onto.
    ///
    /// Point counts match and `step_t * step_w = 2*pi / count`, which makes the
    /// discrete transform an exact unitary pairing between the two grids.
    pub fn fourier_partner(&self) -> Self {
        let dw = lit::<T>(2.0) * T::PI() / (self.step * lit::<T>(self.count as f64));
        let half = lit::<T>((self.count / 2) as f64);
        Self { start: -half * dw, step: dw, count: self.count }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn centered_grid_contains_exact_origin() {
        let g = Grid::<f64>::symmetric(40.0, 1 << 12).unwrap();
        assert_eq!(g.point(g.origin_index()), 0.0);
        assert_eq!(g.count, 1 << 12);
        assert_eq!(g.start, -40.0);
    }

    #[test]
    fn fourier_partner_is_involutive_on_grid_geometry() {
        let g = Grid::<f64>::symmetric(20.0, 4096).unwrap();
        let w = g.fourier_partner();
        let back = w.fourier_partner();
        assert!(g.approx_eq(&back));
        assert_eq!(w.point(w.origin_index()), 0.0);
    }

    #[test]
    fn rejects_degenerate_grids() {
        assert!(Grid::<f64>::new(0.0, 0.0, 16).is_err());
        assert!(Grid::<f64>::new(0.0, 1.0, 1).is_err());
        assert!(Grid::<f64>::symmetric(-1.0, 16).is_err());
    }
}
