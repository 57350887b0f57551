//! Longitudinal mode functions and their algebra.
//!
//! A [`Signal`] is a complex-valued function of time or angular frequency,
//! held either as a closed-form descriptor or as uniform samples on a
//! [`Grid`]. Closed forms keep every operation exact where a rule exists
//! (exponential-family inner products, convolutions, normalization, pointwise
//! transforms); the sampled route provides the independent numeric twin for
//! cross-checking, scaled to the symmetric `1/sqrt(2 pi)` transform
//! convention throughout.

pub mod exp_poly;
pub mod fft;
pub mod quad;

use crate::error::{Error, Result};
use crate::grid::{Grid, DEFAULT_GRID_POINTS};
use crate::scalar::{lit, Scalar};
use exp_poly::ExpPoly;
use num_complex::Complex;

/// Which axis the signal is a function of.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Time,
    Frequency,
}

/// Half-span times slowest decay rate for automatically chosen grids:
/// `exp(-40)` is about `4e-18`, far below every tolerance budget here.
pub const AUTO_SPAN_DECAY: f64 = 40.0;

/// Relative edge magnitude above which the spectral route refuses to run.
pub const ALIAS_TOL: f64 = 1e-6;

/// Closed-form descriptors. Rates are strictly positive; the simple shapes
/// have unit amplitude and convert exactly into the piecewise family.
#[derive(Debug, Clone, PartialEq)]
pub enum ClosedForm<T> {
    /// `exp(-rate * |x|)`
    BothSideExp { rate: T },
    /// `exp(-rate * x)` for `x >= 0`, zero before
    CausalExp { rate: T },
    /// `exp(rate * x)` for `x <= 0`, zero after
    AntiCausalExp { rate: T },
    /// `amp * sqrt(2/pi) * rate / (rate^2 + x^2)`, the transform of BothSideExp
    Lorentzian { rate: T, amp: T },
    /// `weight * delta(x)`; convolution identity, not square integrable
    DeltaLike { weight: T },
    /// General piecewise polynomial-times-exponential
    Pieces(ExpPoly<T>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Form<T> {
    Closed(ClosedForm<T>),
    Sampled { grid: Grid<T>, values: Vec<Complex<T>> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Signal<T> {
    pub domain: Domain,
    pub form: Form<T>,
}

/// Inner product together with the normalized squared overlap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InnerProductResult<T> {
    pub value: Complex<T>,
    /// `|<N(f), N(g)>|^2`, clamped into `[0, 1]` against rounding.
    pub overlap: T,
}

/// Result of projecting `v` onto a normalized `g` and re-normalizing the rest.
#[derive(Debug, Clone)]
pub struct GramSchmidtStep<T> {
    pub parallel_coeff: Complex<T>,
    pub residual_norm: T,
    /// `None` flags `v` parallel to `g` (no direction left to normalize).
    pub orthogonal: Option<Signal<T>>,
}

fn positive_rate<T: Scalar>(rate: T) -> Result<T> {
    if rate > T::zero() && rate.is_finite() {
        Ok(rate)
    } else {
        Err(Error::NonPositiveRate(rate.to_f64().unwrap_or(f64::NAN)))
    }
}

impl<T: Scalar> Signal<T> {
    pub fn both_side_exp(rate: T) -> Result<Self> {
        Ok(Self { domain: Domain::Time, form: Form::Closed(ClosedForm::BothSideExp { rate: positive_rate(rate)? }) })
    }

    pub fn causal_exp(rate: T) -> Result<Self> {
        Ok(Self { domain: Domain::Time, form: Form::Closed(ClosedForm::CausalExp { rate: positive_rate(rate)? }) })
    }

    pub fn anti_causal_exp(rate: T) -> Result<Self> {
        Ok(Self { domain: Domain::Time, form: Form::Closed(ClosedForm::AntiCausalExp { rate: positive_rate(rate)? }) })
    }

    pub fn lorentzian(rate: T) -> Result<Self> {
        Ok(Self {
            domain: Domain::Frequency,
            form: Form::Closed(ClosedForm::Lorentzian { rate: positive_rate(rate)?, amp: T::one() }),
        })
    }

    pub fn delta_like() -> Self {
        Self { domain: Domain::Time, form: Form::Closed(ClosedForm::DeltaLike { weight: T::one() }) }
    }

    pub fn pieces(domain: Domain, pieces: ExpPoly<T>) -> Self {
        Self { domain, form: Form::Closed(ClosedForm::Pieces(pieces)) }
    }

    pub fn sampled(domain: Domain, grid: Grid<T>, values: Vec<Complex<T>>) -> Result<Self> {
        if values.len() != grid.count {
            return Err(Error::GridMismatch(format!(
                "{} samples on a {}-point grid",
                values.len(),
                grid.count
            )));
        }
        Ok(Self { domain, form: Form::Sampled { grid, values } })
    }

    pub fn from_real_fn(domain: Domain, grid: Grid<T>, f: impl Fn(T) -> T) -> Self {
        let values = grid.points().map(|x| Complex::new(f(x), T::zero())).collect();
        Self { domain, form: Form::Sampled { grid, values } }
    }

    pub fn is_closed(&self) -> bool {
        matches!(self.form, Form::Closed(_))
    }

    /// The exact piecewise representation, when this closed form has one.
    pub fn as_exp_poly(&self) -> Option<ExpPoly<T>> {
        match &self.form {
            Form::Closed(ClosedForm::BothSideExp { rate }) => {
                Some(ExpPoly::both_side_exp(*rate, T::one()))
            }
            Form::Closed(ClosedForm::CausalExp { rate }) => {
                Some(ExpPoly::causal_exp(*rate, T::one()))
            }
            Form::Closed(ClosedForm::AntiCausalExp { rate }) => {
                Some(ExpPoly::anti_causal_exp(*rate, T::one()))
            }
            Form::Closed(ClosedForm::Pieces(p)) => Some(p.clone()),
            _ => None,
        }
    }

    /// Pointwise value of a closed form (all closed descriptors here are real).
    /// Jump discontinuities evaluate to the midpoint of the one-sided limits.
    pub fn eval_real(&self, x: T) -> Result<T> {
        match &self.form {
            Form::Closed(ClosedForm::Lorentzian { rate, amp }) => {
                let two_over_pi = lit::<T>(2.0) / T::PI();
                Ok(*amp * two_over_pi.sqrt() * *rate / (*rate * *rate + x * x))
            }
            Form::Closed(ClosedForm::DeltaLike { .. }) => Err(Error::NoClosedFormRule),
            Form::Closed(_) => Ok(self.as_exp_poly().unwrap().eval(x)),
            Form::Sampled { .. } => Err(Error::NoClosedFormRule),
        }
    }

    pub fn sample_grid(&self) -> Option<&Grid<T>> {
        match &self.form {
            Form::Sampled { grid, .. } => Some(grid),
            Form::Closed(_) => None,
        }
    }

    pub fn sample_values(&self) -> Option<&[Complex<T>]> {
        match &self.form {
            Form::Sampled { values, .. } => Some(values.as_slice()),
            Form::Closed(_) => None,
        }
    }

    /// Render onto a grid. Closed forms are evaluated exactly; sampled
    /// signals must already live on the requested grid.
    pub fn render(&self, grid: &Grid<T>) -> Result<Vec<Complex<T>>> {
        match &self.form {
            Form::Closed(ClosedForm::DeltaLike { .. }) => Err(Error::NoClosedFormRule),
            Form::Closed(_) => Ok(grid
                .points()
                .map(|x| Complex::new(self.eval_real(x).unwrap(), T::zero()))
                .collect()),
            Form::Sampled { grid: own, values } => {
                if own.approx_eq(grid) {
                    Ok(values.clone())
                } else {
                    Err(Error::GridMismatch(
                        "sampled signal lives on a different grid".into(),
                    ))
                }
            }
        }
    }

    /// Grid sized so the slowest tail has decayed to `exp(-40)` at the edges.
    pub fn auto_grid(&self) -> Result<Grid<T>> {
        match &self.form {
            Form::Sampled { grid, .. } => Ok(*grid),
            Form::Closed(ClosedForm::Lorentzian { rate, .. }) => {
                // Power-law tails: reach far enough that the missed norm
                // fraction sits below 1e-9.
                Grid::symmetric(lit::<T>(1000.0) * *rate, DEFAULT_GRID_POINTS)
            }
            Form::Closed(ClosedForm::DeltaLike { .. }) => Err(Error::NoClosedFormRule),
            Form::Closed(_) => {
                let p = self.as_exp_poly().unwrap();
                let half = match p.decay_rates()? {
                    Some((l, r)) => lit::<T>(AUTO_SPAN_DECAY) / l.min(r),
                    None => T::one(),
                } + p.max_breakpoint();
                Grid::symmetric(half, DEFAULT_GRID_POINTS)
            }
        }
    }

    pub(crate) fn binary_grid(&self, other: &Self) -> Result<Grid<T>> {
        match (&self.form, &other.form) {
            (Form::Sampled { grid: a, .. }, Form::Sampled { grid: b, .. }) => {
                if a.approx_eq(b) {
                    Ok(*a)
                } else {
                    Err(Error::GridMismatch(
                        "binary operation on signals from different grids".into(),
                    ))
                }
            }
            (Form::Sampled { grid, .. }, _) | (_, Form::Sampled { grid, .. }) => Ok(*grid),
            _ => {
                let a = self.auto_grid()?;
                let b = other.auto_grid()?;
                let half = (a.span() / lit::<T>(2.0)).max(b.span() / lit::<T>(2.0));
                Grid::symmetric(half, a.count.max(b.count))
            }
        }
    }

    pub fn scale(&self, s: Complex<T>) -> Result<Self> {
        let real_s = s.im.abs() <= lit::<T>(1e-15) * (T::one() + s.re.abs());
        let form = match (&self.form, real_s) {
            (Form::Closed(ClosedForm::Lorentzian { rate, amp }), true) => {
                Form::Closed(ClosedForm::Lorentzian { rate: *rate, amp: *amp * s.re })
            }
            (Form::Closed(ClosedForm::DeltaLike { weight }), true) => {
                Form::Closed(ClosedForm::DeltaLike { weight: *weight * s.re })
            }
            (Form::Closed(_), true) => {
                Form::Closed(ClosedForm::Pieces(self.as_exp_poly().unwrap().scale(s.re)))
            }
            (Form::Sampled { grid, values }, _) => Form::Sampled {
                grid: *grid,
                values: values.iter().map(|v| *v * s).collect(),
            },
            (Form::Closed(_), false) => {
                // Complex scaling leaves the real closed-form family.
                let grid = self.auto_grid()?;
                let values = self.render(&grid)?.into_iter().map(|v| v * s).collect();
                Form::Sampled { grid, values }
            }
        };
        Ok(Self { domain: self.domain, form })
    }

    /// `integral conj(self) * other` over the shared axis.
    pub fn inner_product(&self, other: &Self) -> Result<Complex<T>> {
        if self.domain != other.domain {
            return Err(Error::DomainMismatch);
        }
        if matches!(self.form, Form::Closed(ClosedForm::DeltaLike { .. }))
            || matches!(other.form, Form::Closed(ClosedForm::DeltaLike { .. }))
        {
            return Err(Error::DeltaNotSquareIntegrable);
        }
        if let (Some(a), Some(b)) = (self.as_exp_poly(), other.as_exp_poly()) {
            return Ok(Complex::new(a.inner(&b)?, T::zero()));
        }
        if let (
            Form::Closed(ClosedForm::Lorentzian { rate: ra, amp: aa }),
            Form::Closed(ClosedForm::Lorentzian { rate: rb, amp: ab }),
        ) = (&self.form, &other.form)
        {
            // <L_a, L_b> = 2 amp_a amp_b / (a + b)
            let v = lit::<T>(2.0) * *aa * *ab / (*ra + *rb);
            return Ok(Complex::new(v, T::zero()));
        }
        let grid = self.binary_grid(other)?;
        let f = self.render(&grid)?;
        let g = other.render(&grid)?;
        let mut acc = Complex::new(T::zero(), T::zero());
        for (a, b) in f.iter().zip(&g) {
            acc += a.conj() * *b;
        }
        Ok(acc.scale(grid.step))
    }

    pub fn norm(&self) -> Result<T> {
        if let Form::Closed(ClosedForm::Lorentzian { rate, amp }) = &self.form {
            return Ok(amp.abs() / rate.sqrt());
        }
        let n2 = self.inner_product(self)?;
        Ok(n2.re.max(T::zero()).sqrt())
    }

    pub fn normalize(&self) -> Result<Self> {
        let n = self.norm()?;
        if !(n > T::zero()) || !n.is_finite() {
            return Err(Error::ZeroNorm);
        }
        self.scale(Complex::new(T::one() / n, T::zero()))
    }

    pub fn conjugate(&self) -> Self {
        match &self.form {
            Form::Closed(_) => self.clone(),
            Form::Sampled { grid, values } => Self {
                domain: self.domain,
                form: Form::Sampled {
                    grid: *grid,
                    values: values.iter().map(|v| v.conj()).collect(),
                },
            },
        }
    }

    /// `f(t) -> f(-t)`; requires the time domain.
    pub fn time_reverse(&self) -> Result<Self> {
        if self.domain != Domain::Time {
            return Err(Error::WrongDomain { expected: Domain::Time, found: self.domain });
        }
        let form = match &self.form {
            Form::Closed(ClosedForm::CausalExp { rate }) => {
                Form::Closed(ClosedForm::AntiCausalExp { rate: *rate })
            }
            Form::Closed(ClosedForm::AntiCausalExp { rate }) => {
                Form::Closed(ClosedForm::CausalExp { rate: *rate })
            }
            Form::Closed(ClosedForm::Pieces(p)) => Form::Closed(ClosedForm::Pieces(p.time_reverse())),
            Form::Closed(even) => Form::Closed(even.clone()),
            Form::Sampled { grid, values } => {
                let centered = Grid::centered(grid.step, grid.count)?;
                if !grid.approx_eq(&centered) {
                    return Err(Error::InvalidParameter(
                        "time reversal needs an origin-centered grid".into(),
                    ));
                }
                let n = grid.count;
                // Index 0 has no mirror on a half-open grid; it is its own
                // image, which keeps the involution exact and costs one
                // already-decayed edge sample.
                let values = (0..n).map(|i| values[if i == 0 { 0 } else { n - i }]).collect();
                Form::Sampled { grid: *grid, values }
            }
        };
        Ok(Self { domain: Domain::Time, form })
    }

    /// `F(w) = (1/sqrt(2 pi)) integral f(t) exp(i w t) dt`.
    ///
    /// Closed exponential-family input yields exact spectrum samples on the
    /// partner grid (or the exact Lorentzian descriptor); sampled input goes
    /// through the scaled FFT after an aliasing check.
    pub fn fourier(&self) -> Result<Self> {
        if self.domain != Domain::Time {
            return Err(Error::WrongDomain { expected: Domain::Time, found: self.domain });
        }
        match &self.form {
            Form::Closed(ClosedForm::BothSideExp { rate }) => Ok(Self {
                domain: Domain::Frequency,
                form: Form::Closed(ClosedForm::Lorentzian { rate: *rate, amp: T::one() }),
            }),
            Form::Closed(ClosedForm::DeltaLike { .. }) => Err(Error::NoClosedFormRule),
            Form::Closed(ClosedForm::Lorentzian { .. }) => {
                let grid = self.auto_grid()?;
                let samples = self.render(&grid)?;
                let (fgrid, spec) = fft::forward(&grid, &samples)?;
                Signal::sampled(Domain::Frequency, fgrid, spec)
            }
            Form::Closed(_) => {
                let p = self.as_exp_poly().unwrap();
                let fgrid = self.auto_grid()?.fourier_partner();
                let values: Result<Vec<_>> = fgrid.points().map(|w| p.fourier_at(w)).collect();
                Signal::sampled(Domain::Frequency, fgrid, values?)
            }
            Form::Sampled { grid, values } => {
                let leak = fft::relative_edge_leak(values);
                if leak > lit::<T>(ALIAS_TOL) {
                    return Err(Error::AliasingDetected {
                        leak: leak.to_f64().unwrap_or(f64::NAN),
                        tol: ALIAS_TOL,
                    });
                }
                let (fgrid, spec) = fft::forward(grid, values)?;
                Signal::sampled(Domain::Frequency, fgrid, spec)
            }
        }
    }

    /// Inverse transform `f(t) = (1/sqrt(2 pi)) integral F(w) exp(-i w t) dw`.
    pub fn inverse_fourier(&self) -> Result<Self> {
        if self.domain != Domain::Frequency {
            return Err(Error::WrongDomain { expected: Domain::Frequency, found: self.domain });
        }
        match &self.form {
            Form::Closed(ClosedForm::Lorentzian { rate, amp }) => Ok(Self {
                domain: Domain::Time,
                form: Form::Closed(ClosedForm::Pieces(ExpPoly::both_side_exp(*rate, *amp))),
            }),
            Form::Closed(ClosedForm::DeltaLike { .. }) => Err(Error::NoClosedFormRule),
            Form::Closed(_) => {
                // Exact pointwise inverse: conjugate kernel at -t.
                let p = self.as_exp_poly().unwrap();
                let tgrid = self.auto_grid()?.fourier_partner();
                let values: Result<Vec<_>> = tgrid.points().map(|t| p.fourier_at(-t)).collect();
                Signal::sampled(Domain::Time, tgrid, values?)
            }
            Form::Sampled { grid, values } => {
                let leak = fft::relative_edge_leak(values);
                if leak > lit::<T>(ALIAS_TOL) {
                    return Err(Error::AliasingDetected {
                        leak: leak.to_f64().unwrap_or(f64::NAN),
                        tol: ALIAS_TOL,
                    });
                }
                let (tgrid, samples) = fft::inverse(grid, values)?;
                Signal::sampled(Domain::Time, tgrid, samples)
            }
        }
    }

    /// Convolution `(f * g)(t)`. Exponential-family pairs stay exact; any
    /// other pair runs through the product of spectra with the `sqrt(2 pi)`
    /// convention factor.
    pub fn convolve(&self, other: &Self) -> Result<Self> {
        if self.domain != Domain::Time || other.domain != Domain::Time {
            return Err(Error::WrongDomain {
                expected: Domain::Time,
                found: if self.domain != Domain::Time { self.domain } else { other.domain },
            });
        }
        if let Form::Closed(ClosedForm::DeltaLike { weight }) = &self.form {
            return other.scale(Complex::new(*weight, T::zero()));
        }
        if let Form::Closed(ClosedForm::DeltaLike { weight }) = &other.form {
            return self.scale(Complex::new(*weight, T::zero()));
        }
        if let (Some(a), Some(b)) = (self.as_exp_poly(), other.as_exp_poly()) {
            return Ok(Signal::pieces(Domain::Time, a.convolve(&b)?));
        }
        // Sampled route: the result support is the sum of the input supports,
        // so closed inputs get a widened automatic grid.
        let grid = match (self.sample_grid(), other.sample_grid()) {
            (None, None) => {
                let a = self.auto_grid()?;
                let b = other.auto_grid()?;
                Grid::symmetric(
                    (a.span() + b.span()) / lit::<T>(2.0),
                    a.count.max(b.count),
                )?
            }
            _ => self.binary_grid(other)?,
        };
        let f = self.render(&grid)?;
        let g = other.render(&grid)?;
        for v in [&f, &g] {
            let leak = fft::relative_edge_leak(v);
            if leak > lit::<T>(ALIAS_TOL) {
                return Err(Error::AliasingDetected {
                    leak: leak.to_f64().unwrap_or(f64::NAN),
                    tol: ALIAS_TOL,
                });
            }
        }
        let (fgrid, mut ff) = fft::forward(&grid, &f)?;
        let (_, gg) = fft::forward(&grid, &g)?;
        let root_two_pi = (lit::<T>(2.0) * T::PI()).sqrt();
        for (a, b) in ff.iter_mut().zip(&gg) {
            *a = *a * *b * Complex::new(root_two_pi, T::zero());
        }
        let (tgrid, conv) = fft::inverse(&fgrid, &ff)?;
        let leak = fft::relative_edge_leak(&conv);
        if leak > lit::<T>(ALIAS_TOL) {
            return Err(Error::GridTooShort {
                required_span: 2.0 * grid.span().to_f64().unwrap_or(f64::NAN),
            });
        }
        Signal::sampled(Domain::Time, tgrid, conv)
    }

    /// Inner product packaged with the normalized squared overlap.
    pub fn overlap_report(&self, other: &Self) -> Result<InnerProductResult<T>> {
        let value = self.inner_product(other)?;
        let nf = self.norm()?;
        let ng = other.norm()?;
        if !(nf > T::zero()) || !(ng > T::zero()) {
            return Err(Error::ZeroNorm);
        }
        let raw = value.norm_sqr() / (nf * nf * ng * ng);
        Ok(InnerProductResult { value, overlap: raw.min(T::one()).max(T::zero()) })
    }
}

/// Split `v` into its component along a normalized `g` and a normalized
/// remainder orthogonal to `g`.
pub fn gram_schmidt_step<T: Scalar>(g: &Signal<T>, v: &Signal<T>) -> Result<GramSchmidtStep<T>> {
    let g_norm = g.norm()?;
    let deviation = (g_norm - T::one()).abs();
    if deviation > lit::<T>(1e-6) {
        return Err(Error::NotNormalized { deviation: deviation.to_f64().unwrap_or(f64::NAN) });
    }
    let v_norm = v.norm()?;
    if !(v_norm > T::zero()) {
        return Err(Error::ZeroNorm);
    }
    let c = g.inner_product(v)?;

    let real_coeff = c.im.abs() <= lit::<T>(1e-12) * (T::one() + c.norm());
    let (residual_norm, residual): (T, Signal<T>) = match (g.as_exp_poly(), v.as_exp_poly()) {
        (Some(ge), Some(ve)) if real_coeff => {
            let w = ve.sub(&ge.scale(c.re));
            let n2 = w.norm_sq()?.max(T::zero());
            (n2.sqrt(), Signal::pieces(Domain::Time, w))
        }
        _ => {
            let grid = g.binary_grid(v)?;
            let gs = g.render(&grid)?;
            let vs = v.render(&grid)?;
            let w: Vec<Complex<T>> =
                gs.iter().zip(&vs).map(|(a, b)| *b - *a * c).collect();
            let n2: T = w.iter().map(|x| x.norm_sqr()).sum::<T>() * grid.step;
            (n2.max(T::zero()).sqrt(), Signal::sampled(v.domain, grid, w)?)
        }
    };

    if residual_norm <= lit::<T>(1e-8) * v_norm {
        return Ok(GramSchmidtStep { parallel_coeff: c, residual_norm, orthogonal: None });
    }
    Ok(GramSchmidtStep {
        parallel_coeff: c,
        residual_norm,
        orthogonal: Some(residual.normalize()?),
    })
}
