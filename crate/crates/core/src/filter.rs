//! Narrowband filtering of the herald path, and what it buys.
//!
//! Subtracting a photon from a squeezed beam through a filter cavity changes
//! the heralded wavepacket from N(h^R conv r) toward the filter's own rising
//! exponential, and in doing so pulls the mode-matching rate
//! M = |<N(h^R conv r), N(h^R conv r conv r)>|^2 from its bare value of 9/10
//! up toward one. This module carries the single-pole cavity response
//! h(t) = Gamma exp(-Gamma t) u(t), the heralded-mode construction in both
//! the weak-pump and exact spectral forms, the piecewise closed forms of the
//! two convolution-chain modes for exponential inputs, and the closed
//! mode-matching rate
//!
//! M(G) = (8 + 9 G + 3 G^2)^2 / (2 (2 + G) (16 + 29 G + 20 G^2 + 5 G^3)),
//!
//! with G = Gamma/gamma the filter bandwidth relative to the squeezing
//! source. M decreases strictly in G between the limits M -> 1 (narrow
//! filter) and M -> 9/10 (transparent filter).

use crate::error::{Error, Result};
use crate::grid::{Grid, DEFAULT_GRID_POINTS};
use crate::opo::OpoParams;
use crate::scalar::{lit, Scalar};
use crate::signal::exp_poly::{ExpPoly, Piece, Term};
use crate::signal::{Domain, Signal, AUTO_SPAN_DECAY};
use crate::wavepacket;
use num_complex::Complex;

/// Herald-path filter: single-pole cavity of decay rate `big_gamma`,
/// optionally cascaded `order` times.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterParams<T> {
    big_gamma: T,
    order: usize,
}

impl<T: Scalar> FilterParams<T> {
    pub fn new(big_gamma: T, order: usize) -> Result<Self> {
        if !(big_gamma > T::zero()) || !big_gamma.is_finite() {
            return Err(Error::NonPositiveRate(big_gamma.to_f64().unwrap_or(f64::NAN)));
        }
        if order == 0 {
            return Err(Error::InvalidParameter("filter order must be at least 1".into()));
        }
        Ok(Self { big_gamma, order })
    }

    pub fn big_gamma(&self) -> T {
        self.big_gamma
    }

    pub fn order(&self) -> usize {
        self.order
    }
}

/// One point of a filter-bandwidth scan, on the `1/(Gamma/gamma)` axis:
/// the closed-form rate next to the convolution-route value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeMatchReport<T> {
    pub gamma_rel_inv: T,
    pub m_closed: T,
    pub m_numeric: T,
    pub discrepancy: T,
}

/// Rate pairs closer than this are sent to the numeric route; the closed
/// forms divide by gamma - big_gamma.
const DEGENERATE_REL_TOL: f64 = 1e-6;

fn positive<T: Scalar>(value: T) -> Result<T> {
    if !(value > T::zero()) || !value.is_finite() {
        return Err(Error::NonPositiveRate(value.to_f64().unwrap_or(f64::NAN)));
    }
    Ok(value)
}

/// Impulse response of the herald-path filter: `Gamma exp(-Gamma t) u(t)`,
/// self-convolved for higher orders. Unit area at every order, so the
/// response acts as a frequency-dependent beamsplitter with full
/// transmission at the carrier.
pub fn filter_response<T: Scalar>(f: &FilterParams<T>) -> Result<Signal<T>> {
    let g = f.big_gamma;
    let single = ExpPoly::causal_exp(g, g);
    let mut acc = single.clone();
    for _ in 1..f.order {
        acc = acc.convolve(&single)?;
    }
    Ok(Signal::pieces(Domain::Time, acc))
}

/// Wavepacket of the single photon heralded by a filtered subtraction at
/// t = 0 from the squeezed beam.
///
/// `weak_pump` selects the first-order form N(h^R conv r) built from the
/// weak-pump pair correlation (exact in the piecewise-exponential family);
/// otherwise the mode is built in the frequency domain as
/// N(h_tilde(omega) sinh r_tilde(omega)) and transformed back, which keeps
/// every order of the pump strength. `None` for the filter gives the
/// unfiltered mode. Zero pump heralds nothing and surfaces as `ZeroNorm`.
pub fn heralded_mode<T: Scalar>(
    p: &OpoParams<T>,
    f: Option<&FilterParams<T>>,
    weak_pump: bool,
) -> Result<Signal<T>> {
    if weak_pump {
        let r = p.correlation_weak_pump();
        let shaped = match f {
            None => r,
            Some(fp) => filter_response(fp)?.time_reverse()?.convolve(&r)?,
        };
        return shaped.normalize();
    }
    let gap = p.gamma() - p.epsilon();
    let slow = match f {
        Some(fp) => fp.big_gamma.min(gap).min(p.gamma()),
        None => gap.min(p.gamma()),
    };
    let grid = Grid::symmetric(lit::<T>(AUTO_SPAN_DECAY) / slow, DEFAULT_GRID_POINTS)?;
    let partner = grid.fourier_partner();
    // the spectral weight is the transform of the reversed response; for a
    // real h that is the conjugate of the forward transform
    let h_poly = match f {
        Some(fp) => Some(
            filter_response(fp)?
                .as_exp_poly()
                .expect("cascaded response stays closed form")
                .clone(),
        ),
        None => None,
    };
    let values = partner
        .points()
        .map(|w| {
            let pair_amp = Complex::new(p.sinh_r_tilde(w), T::zero());
            Ok(match &h_poly {
                Some(hp) => hp.fourier_at(w)?.conj() * pair_amp,
                None => pair_amp,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Signal::sampled(Domain::Frequency, partner, values)?.inverse_fourier()?.normalize()
}

fn degenerate_guard<T: Scalar>(gamma: T, big_gamma: T) -> Result<()> {
    let rel_gap = ((gamma - big_gamma).abs() / gamma).to_f64().unwrap_or(f64::NAN);
    if !(rel_gap > DEGENERATE_REL_TOL) {
        return Err(Error::DegenerateRates { rel_gap });
    }
    Ok(())
}

/// Normalized heralded mode N(h^R conv r) for the single-pole filter and the
/// symmetric-exponential correlation, as an exact piecewise closed form:
///
/// sqrt(gamma Gamma / (2 gamma + Gamma)) exp(-gamma t) for t >= 0, and
/// the same head scale times [2 gamma exp(Gamma t)
/// - (gamma + Gamma) exp(gamma t)] / (gamma - Gamma) for t < 0.
///
/// Valid only away from gamma = Gamma; the degenerate pair is rejected in
/// favor of the numeric convolution route.
pub fn closed_hr_r<T: Scalar>(gamma: T, big_gamma: T) -> Result<Signal<T>> {
    let gamma = positive(gamma)?;
    let big_gamma = positive(big_gamma)?;
    degenerate_guard(gamma, big_gamma)?;
    let two = lit::<T>(2.0);
    let head = (gamma * big_gamma / (two * gamma + big_gamma)).sqrt();
    let a = head / (gamma - big_gamma);
    let poly = ExpPoly::from_pieces(vec![
        Piece {
            lo: None,
            hi: Some(T::zero()),
            terms: vec![
                Term::new(big_gamma, vec![two * gamma * a]),
                Term::new(gamma, vec![-(gamma + big_gamma) * a]),
            ],
        },
        Piece {
            lo: Some(T::zero()),
            hi: None,
            terms: vec![Term::new(-gamma, vec![head])],
        },
    ]);
    Ok(Signal::pieces(Domain::Time, poly))
}

/// Normalized twice-convolved mode N(h^R conv r conv r) in closed form,
/// the partner whose overlap with `closed_hr_r` is the mode-matching rate.
///
/// Up to the overall normalization it reads
/// [2 + Gamma/gamma + (gamma + Gamma) t] exp(-gamma t) for t >= 0 and
/// 4 gamma^2 exp(Gamma t) / (gamma - Gamma)^2 minus a linear-in-t
/// exponential for t < 0; both branches meet at 2 + Gamma/gamma. Same
/// degenerate-rate restriction as `closed_hr_r`.
pub fn closed_hr_rr<T: Scalar>(gamma: T, big_gamma: T) -> Result<Signal<T>> {
    let gamma = positive(gamma)?;
    let big_gamma = positive(big_gamma)?;
    degenerate_guard(gamma, big_gamma)?;
    let g = gamma;
    let gg = big_gamma;
    let two = lit::<T>(2.0);
    let diff = g - gg;
    let sum = g + gg;
    let p_norm = lit::<T>(16.0) * g.powi(3)
        + lit::<T>(29.0) * g.powi(2) * gg
        + lit::<T>(20.0) * g * gg.powi(2)
        + lit::<T>(5.0) * gg.powi(3);
    let inv_q = (two * g.powi(3) * gg / p_norm).sqrt();
    let poly = ExpPoly::from_pieces(vec![
        Piece {
            lo: None,
            hi: Some(T::zero()),
            terms: vec![
                Term::new(gg, vec![lit::<T>(4.0) * g * g / (diff * diff) * inv_q]),
                Term::new(
                    g,
                    vec![
                        -(two * g - gg) * sum * sum / (g * diff * diff) * inv_q,
                        sum * sum / diff * inv_q,
                    ],
                ),
            ],
        },
        Piece {
            lo: Some(T::zero()),
            hi: None,
            terms: vec![Term::new(-g, vec![(two + gg / g) * inv_q, sum * inv_q])],
        },
    ]);
    Ok(Signal::pieces(Domain::Time, poly))
}

/// Mode-matching rate of the filtered heralded photon against its own
/// squeezing as a closed function of the relative filter bandwidth
/// `gamma_rel = Gamma/gamma`.
pub fn mode_match_filtered_closed<T: Scalar>(gamma_rel: T) -> Result<T> {
    let x = positive(gamma_rel)?;
    let two = lit::<T>(2.0);
    let num = lit::<T>(8.0) + lit::<T>(9.0) * x + lit::<T>(3.0) * x * x;
    let den = two
        * (two + x)
        * (lit::<T>(16.0) + lit::<T>(29.0) * x + (lit::<T>(20.0) + lit::<T>(5.0) * x) * x * x);
    Ok(num * num / den)
}

/// Sweep the mode-matching rate over inverse relative bandwidths, pairing
/// the closed form with an independent convolution-route evaluation at each
/// point. The numeric route builds N(h^R conv r) from the response and
/// correlation primitives and scores it with `wavepacket::mode_match`,
/// touching none of the closed-form coefficients.
pub fn filter_scan<T: Scalar>(
    p: &OpoParams<T>,
    inv_gamma_rel_list: &[T],
) -> Result<Vec<ModeMatchReport<T>>> {
    let r_shape = Signal::both_side_exp(p.gamma())?;
    inv_gamma_rel_list
        .iter()
        .map(|&inv| {
            let inv = positive(inv)?;
            let rel = T::one() / inv;
            let m_closed = mode_match_filtered_closed(rel)?;
            let fp = FilterParams::new(rel * p.gamma(), 1)?;
            let hr_r = filter_response(&fp)?.time_reverse()?.convolve(&r_shape)?;
            let m_numeric = wavepacket::mode_match(&hr_r, &r_shape)?;
            Ok(ModeMatchReport {
                gamma_rel_inv: inv,
                m_closed,
                m_numeric,
                discrepancy: (m_closed - m_numeric).abs(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn probe_times() -> Vec<f64> {
        (-20..=20).map(|k| k as f64 * 0.25).collect()
    }

    #[test]
    fn params_are_guarded() {
        assert!(matches!(FilterParams::new(0.0f64, 1), Err(Error::NonPositiveRate(_))));
        assert!(matches!(FilterParams::new(f64::NAN, 1), Err(Error::NonPositiveRate(_))));
        assert!(matches!(FilterParams::new(0.4f64, 0), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn response_is_causal_with_unit_area() {
        for order in 1..=3 {
            let f = FilterParams::new(0.4f64, order).unwrap();
            let h = filter_response(&f).unwrap();
            assert_eq!(h.eval_real(-0.5).unwrap(), 0.0);
            let area = h.as_exp_poly().unwrap().integral().unwrap();
            assert_abs_diff_eq!(area, 1.0, epsilon = 1e-12);
        }
        let head = filter_response(&FilterParams::new(0.4f64, 1).unwrap()).unwrap();
        assert_relative_eq!(head.eval_real(1e-9).unwrap(), 0.4, max_relative = 1e-6);
    }

    #[test]
    fn transfer_rolls_off_at_the_cavity_pole() {
        let root_two_pi = (2.0 * std::f64::consts::PI).sqrt();
        for order in 1..=3 {
            let f = FilterParams::new(0.7f64, order).unwrap();
            let poly = filter_response(&f).unwrap().as_exp_poly().unwrap().clone();
            let at = |w: f64| poly.fourier_at(w).unwrap() * root_two_pi;
            assert_abs_diff_eq!(at(0.0).re, 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(at(0.0).im, 0.0, epsilon = 1e-12);
            let expect = 0.5f64.powf(order as f64 / 2.0);
            assert_relative_eq!(at(0.7).norm(), expect, max_relative = 1e-12);
        }
    }

    #[test]
    fn heralded_weak_unfiltered_is_the_symmetric_exponential() {
        let p = OpoParams::new(1.0f64, 0.3).unwrap();
        let mode = heralded_mode(&p, None, true).unwrap();
        let target = Signal::both_side_exp(1.0f64).unwrap().normalize().unwrap();
        assert_abs_diff_eq!(mode.overlap_report(&target).unwrap().overlap, 1.0, epsilon = 1e-12);
        let ratio = mode.eval_real(1.5).unwrap() / mode.eval_real(0.0).unwrap();
        assert_relative_eq!(ratio, (-1.5f64).exp(), max_relative = 1e-12);
    }

    #[test]
    fn heralded_weak_filtered_matches_the_closed_form() {
        let p = OpoParams::new(1.0f64, 0.3).unwrap();
        let f = FilterParams::new(0.4f64, 1).unwrap();
        let mode = heralded_mode(&p, Some(&f), true).unwrap();
        let head = (1.0f64 * 0.4 / 2.4).sqrt();
        assert_abs_diff_eq!(mode.eval_real(0.0).unwrap(), head, epsilon = 1e-12);
        let closed = closed_hr_r(1.0f64, 0.4).unwrap();
        for t in probe_times() {
            let diff = (mode.eval_real(t).unwrap() - closed.eval_real(t).unwrap()).abs();
            assert!(diff <= 1e-12, "branches differ by {diff} at t = {t}");
        }
    }

    #[test]
    fn closed_forms_join_continuously_at_the_detection_time() {
        for (g, gg) in [(1.0f64, 0.4f64), (1.0, 3.0), (2.3, 0.9)] {
            for signal in [closed_hr_r(g, gg).unwrap(), closed_hr_rr(g, gg).unwrap()] {
                let h = 1e-12;
                let jump = (signal.eval_real(-h).unwrap() - signal.eval_real(h).unwrap()).abs();
                assert!(jump <= 1e-9, "jump {jump} for rates ({g}, {gg})");
            }
            let head = (g * gg / (2.0 * g + gg)).sqrt();
            let hr_r = closed_hr_r(g, gg).unwrap();
            assert_abs_diff_eq!(hr_r.eval_real(0.0).unwrap(), head, epsilon = 1e-12);
        }
    }

    #[test]
    fn closed_forms_are_normalized() {
        for (g, gg) in [(1.0f64, 0.4f64), (1.0, 3.0), (0.8, 2.1)] {
            assert_abs_diff_eq!(closed_hr_r(g, gg).unwrap().norm().unwrap(), 1.0, epsilon = 1e-9);
            assert_abs_diff_eq!(closed_hr_rr(g, gg).unwrap().norm().unwrap(), 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn closed_forms_match_the_convolution_oracle() {
        for (g, gg) in [(1.0f64, 0.4f64), (1.0, 3.0)] {
            let h_rev = filter_response(&FilterParams::new(gg, 1).unwrap())
                .unwrap()
                .time_reverse()
                .unwrap();
            let r = Signal::both_side_exp(g).unwrap();
            let hr_r = h_rev.convolve(&r).unwrap().normalize().unwrap();
            let hr_rr = h_rev.convolve(&r).unwrap().convolve(&r).unwrap().normalize().unwrap();
            let closed_r = closed_hr_r(g, gg).unwrap();
            let closed_rr = closed_hr_rr(g, gg).unwrap();
            for t in probe_times() {
                let d1 = (hr_r.eval_real(t).unwrap() - closed_r.eval_real(t).unwrap()).abs();
                let d2 = (hr_rr.eval_real(t).unwrap() - closed_rr.eval_real(t).unwrap()).abs();
                assert!(d1 <= 1e-7, "single-pass diff {d1} at t = {t}, rates ({g}, {gg})");
                assert!(d2 <= 1e-7, "double-pass diff {d2} at t = {t}, rates ({g}, {gg})");
            }
        }
    }

    #[test]
    fn twice_convolved_head_value_and_overlap() {
        let (g, gg) = (1.0f64, 0.4f64);
        let p_norm = 16.0 + 29.0 * gg + 20.0 * gg * gg + 5.0 * gg.powi(3);
        let inv_q = (2.0 * gg / p_norm).sqrt();
        let hr_rr = closed_hr_rr(g, gg).unwrap();
        assert_abs_diff_eq!(hr_rr.eval_real(0.0).unwrap(), (2.0 + gg) * inv_q, epsilon = 1e-12);
        let hr_r = closed_hr_r(g, gg).unwrap();
        let overlap = hr_r.overlap_report(&hr_rr).unwrap().overlap;
        assert_relative_eq!(
            overlap,
            mode_match_filtered_closed(gg).unwrap(),
            max_relative = 1e-12
        );
        assert_abs_diff_eq!(overlap, 0.976908, epsilon = 2e-6);
    }

    #[test]
    fn degenerate_rates_are_rejected() {
        assert!(matches!(closed_hr_r(1.0f64, 1.0), Err(Error::DegenerateRates { .. })));
        assert!(matches!(
            closed_hr_r(1.0f64, 1.0 + 1e-9),
            Err(Error::DegenerateRates { .. })
        ));
        assert!(matches!(closed_hr_rr(1.0f64, 1.0 - 1e-8), Err(Error::DegenerateRates { .. })));
        assert!(closed_hr_r(1.0f64, 1.01).is_ok());
    }

    #[test]
    fn match_rate_hits_known_points_and_limits() {
        assert_relative_eq!(
            mode_match_filtered_closed(1.0f64).unwrap(),
            20.0 / 21.0,
            max_relative = 1e-15
        );
        assert!((mode_match_filtered_closed(1e-9f64).unwrap() - 1.0).abs() < 1e-6);
        assert!((mode_match_filtered_closed(1e9f64).unwrap() - 0.9).abs() < 1e-6);
        assert!(matches!(mode_match_filtered_closed(0.0f64), Err(Error::NonPositiveRate(_))));
        assert!(matches!(mode_match_filtered_closed(-1.0f64), Err(Error::NonPositiveRate(_))));
    }

    #[test]
    fn match_rate_decreases_strictly_with_bandwidth() {
        let mut last = f64::INFINITY;
        for i in 0..40 {
            let x = 10f64.powf(-3.0 + 6.0 * i as f64 / 39.0);
            let m = mode_match_filtered_closed(x).unwrap();
            assert!(m < last, "not strictly decreasing at x = {x}");
            assert!(m > 0.9 && m < 1.0);
            last = m;
        }
    }

    #[test]
    fn scan_routes_agree_and_improve_with_narrowing() {
        let p = OpoParams::new(1.0f64, 0.3).unwrap();
        let invs = [0.05f64, 0.1, 0.3, 1.0, 3.0, 10.0, 20.0];
        let reports = filter_scan(&p, &invs).unwrap();
        let mut last = 0.0;
        for rep in &reports {
            assert!(rep.discrepancy <= 1e-6, "routes split by {}", rep.discrepancy);
            assert_abs_diff_eq!(
                rep.discrepancy,
                (rep.m_closed - rep.m_numeric).abs(),
                epsilon = 1e-15
            );
            assert!(rep.m_closed > 0.9 && rep.m_closed < 1.0);
            assert!(rep.m_closed > last, "not improving at 1/G = {}", rep.gamma_rel_inv);
            last = rep.m_closed;
        }
        assert!(matches!(filter_scan(&p, &[-0.5f64]), Err(Error::NonPositiveRate(_))));
    }

    #[test]
    fn tight_filter_becomes_transparent() {
        let p = OpoParams::new(1.0f64, 0.3).unwrap();
        let bare_weak = heralded_mode(&p, None, true).unwrap();
        let wide = FilterParams::new(1e4f64, 1).unwrap();
        let filtered_weak = heralded_mode(&p, Some(&wide), true).unwrap();
        assert!(filtered_weak.overlap_report(&bare_weak).unwrap().overlap >= 1.0 - 1e-6);

        let bare_exact = heralded_mode(&p, None, false).unwrap();
        let mut last = 0.0;
        for gg in [5.0f64, 50.0, 500.0] {
            let f = FilterParams::new(gg, 1).unwrap();
            let filtered = heralded_mode(&p, Some(&f), false).unwrap();
            let overlap = filtered.overlap_report(&bare_exact).unwrap().overlap;
            assert!(overlap > last, "no improvement at Gamma = {gg}");
            last = overlap;
        }
        assert!(last >= 1.0 - 1e-4, "widest filter overlap {last}");
    }

    #[test]
    fn exact_route_meets_weak_route_at_small_pump() {
        let p = OpoParams::new(1.0f64, 0.01).unwrap();
        let f = FilterParams::new(0.4f64, 1).unwrap();
        let exact = heralded_mode(&p, Some(&f), false).unwrap();
        let weak = heralded_mode(&p, Some(&f), true).unwrap();
        assert!(exact.overlap_report(&weak).unwrap().overlap >= 1.0 - 1e-6);
    }

    #[test]
    fn weak_route_error_scales_as_fourth_power_of_pump() {
        let f = FilterParams::new(0.4f64, 1).unwrap();
        let deficits: Vec<f64> = [0.01f64, 0.03, 0.1]
            .iter()
            .map(|&eps| {
                let p = OpoParams::new(1.0, eps).unwrap();
                let exact = heralded_mode(&p, Some(&f), false).unwrap();
                let weak = heralded_mode(&p, Some(&f), true).unwrap();
                1.0 - exact.overlap_report(&weak).unwrap().overlap
            })
            .collect();
        let e1 = (deficits[1] / deficits[0]).ln() / 3.0f64.ln();
        let e2 = (deficits[2] / deficits[1]).ln() / (10.0f64 / 3.0).ln();
        assert!((3.2..4.8).contains(&e1), "exponent {e1} from {deficits:?}");
        assert!((3.2..4.8).contains(&e2), "exponent {e2} from {deficits:?}");
    }

    #[test]
    fn zero_pump_heralds_nothing() {
        let p = OpoParams::new(1.0f64, 0.0).unwrap();
        let f = FilterParams::new(0.4f64, 1).unwrap();
        for (filt, weak) in
            [(None, true), (None, false), (Some(&f), true), (Some(&f), false)]
        {
            assert!(matches!(heralded_mode(&p, filt, weak), Err(Error::ZeroNorm)));
        }
    }
}
