//! Exact algebra for piecewise polynomial-times-exponential functions.
//!
//! Every closed-form time signal in this crate lives in the family
//! `sum_k p_k(t) * exp(s_k * t)` on a finite list of disjoint intervals.
//! The family is closed under addition, scaling, pointwise products,
//! time reversal, and convolution, so inner products, norms, and the
//! convolution chains behind the mode-matching results are evaluated
//! without quadrature error.
//!
//! Representation invariants:
//! - pieces are sorted by interval and pairwise disjoint; gaps are zero,
//! - `None` bounds stand for -inf / +inf,
//! - within a piece, terms are consolidated by rate (one term per rate),
//! - improper integrals are only evaluated when the exponent decays toward
//!   the infinite end; anything else is reported as divergent.

use crate::error::{Error, Result};
use crate::scalar::{lit, Scalar};
use num_complex::Complex;

/// Rates closer than this (relative to their magnitude) are treated as equal,
/// switching integration onto the confluent polynomial branch before the
/// `1/(s - s')^k` coefficients lose precision.
const CONFLUENT_REL_TOL: f64 = 1e-9;

/// `poly(t) * exp(rate * t)` with ascending real coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct Term<T> {
    pub rate: T,
    pub coeffs: Vec<T>,
}

impl<T: Scalar> Term<T> {
    pub fn new(rate: T, coeffs: Vec<T>) -> Self {
        Self { rate, coeffs }
    }

    fn eval(&self, t: T) -> T {
        poly_eval(&self.coeffs, t) * (self.rate * t).exp()
    }

    fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == T::zero())
    }
}

/// One interval `[lo, hi]` (None = unbounded) carrying a sum of terms.
#[derive(Debug, Clone, PartialEq)]
pub struct Piece<T> {
    pub lo: Option<T>,
    pub hi: Option<T>,
    pub terms: Vec<Term<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpPoly<T> {
    pieces: Vec<Piece<T>>,
}

fn poly_eval<T: Scalar>(coeffs: &[T], t: T) -> T {
    let mut acc = T::zero();
    for c in coeffs.iter().rev() {
        acc = acc * t + *c;
    }
    acc
}

fn poly_add<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| {
            let x = a.get(i).copied().unwrap_or_else(T::zero);
            let y = b.get(i).copied().unwrap_or_else(T::zero);
            x + y
        })
        .collect()
}

fn poly_scale<T: Scalar>(a: &[T], s: T) -> Vec<T> {
    a.iter().map(|c| *c * s).collect()
}

fn poly_mul<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![T::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += *x * *y;
        }
    }
    out
}

fn trim_trailing_zeros<T: Scalar>(mut v: Vec<T>) -> Vec<T> {
    while v.len() > 1 && *v.last().unwrap() == T::zero() {
        v.pop();
    }
    v
}

/// Binomial expansion of `(t - c)^j` as coefficients in `t`.
fn binomial_shift<T: Scalar>(j: usize, c: T) -> Vec<T> {
    let mut out = vec![T::zero(); j + 1];
    let mut binom = T::one();
    for i in 0..=j {
        // binom = C(j, i); sign from (-c)^(j - i)
        let p = j - i;
        out[i] = binom * (-c).powi(p as i32);
        binom = binom * lit::<T>((j - i) as f64) / lit::<T>((i + 1) as f64);
    }
    out
}

fn rates_confluent<T: Scalar>(a: T, b: T) -> bool {
    (a - b).abs() <= lit::<T>(CONFLUENT_REL_TOL) * (a.abs() + b.abs() + T::one())
}

/// Antiderivative of `poly(x) * exp(rate * x)` evaluated from `lo` to `hi`.
fn integral_exp_poly<T: Scalar>(coeffs: &[T], rate: T, lo: Option<T>, hi: Option<T>) -> Result<T> {
    if coeffs.iter().all(|c| *c == T::zero()) {
        return Ok(T::zero());
    }
    let confluent = rates_confluent(rate, T::zero());
    let eval_at = |x: Option<T>, sign_inf: i32| -> Result<T> {
        match x {
            Some(v) => {
                if confluent {
                    let mut acc = T::zero();
                    for (j, c) in coeffs.iter().enumerate() {
                        acc += *c * v.powi(j as i32 + 1) / lit::<T>((j + 1) as f64);
                    }
                    Ok(acc)
                } else {
                    let anti = exp_antiderivative(coeffs, rate);
                    Ok(poly_eval(&anti, v) * (rate * v).exp())
                }
            }
            None => {
                // sign_inf: -1 for the lower bound (-inf), +1 for +inf.
                let decays = !confluent
                    && ((sign_inf < 0 && rate > T::zero()) || (sign_inf > 0 && rate < T::zero()));
                if decays {
                    Ok(T::zero())
                } else {
                    Err(Error::DivergentIntegral(format!(
                        "exp rate {:?} does not decay toward the unbounded end",
                        rate
                    )))
                }
            }
        }
    };
    Ok(eval_at(hi, 1)? - eval_at(lo, -1)?)
}

/// Coefficients of `P` with `d/dx [P(x) e^(s x)] = poly(x) e^(s x)`, s != 0.
fn exp_antiderivative<T: Scalar>(coeffs: &[T], s: T) -> Vec<T> {
    let m = coeffs.len() - 1;
    let mut d = vec![T::zero(); m + 1];
    d[m] = coeffs[m] / s;
    for j in (0..m).rev() {
        d[j] = (coeffs[j] - lit::<T>((j + 1) as f64) * d[j + 1]) / s;
    }
    d
}

/// Complex variant for pointwise Fourier transforms.
fn exp_antiderivative_c<T: Scalar>(coeffs: &[Complex<T>], s: Complex<T>) -> Vec<Complex<T>> {
    let m = coeffs.len() - 1;
    let zero = Complex::new(T::zero(), T::zero());
    let mut d = vec![zero; m + 1];
    d[m] = coeffs[m] / s;
    for j in (0..m).rev() {
        d[j] = (coeffs[j] - d[j + 1].scale(lit::<T>((j + 1) as f64))) / s;
    }
    d
}

fn consolidate_terms<T: Scalar>(terms: Vec<Term<T>>) -> Vec<Term<T>> {
    let mut out: Vec<Term<T>> = Vec::new();
    for term in terms {
        if term.is_zero() {
            continue;
        }
        if let Some(existing) = out.iter_mut().find(|e| rates_confluent(e.rate, term.rate)) {
            existing.coeffs = poly_add(&existing.coeffs, &term.coeffs);
        } else {
            out.push(term);
        }
    }
    out.retain(|t| !t.is_zero());
    for t in &mut out {
        t.coeffs = trim_trailing_zeros(std::mem::take(&mut t.coeffs));
    }
    out.sort_by(|a, b| a.rate.partial_cmp(&b.rate).unwrap());
    out
}

#[derive(Debug, Clone)]
struct Contribution<T> {
    lo: Option<T>,
    hi: Option<T>,
    terms: Vec<Term<T>>,
}

/// Assemble contributions on possibly overlapping intervals into disjoint pieces.
fn assemble<T: Scalar>(contribs: Vec<Contribution<T>>) -> ExpPoly<T> {
    let mut bounds: Vec<T> = Vec::new();
    for c in &contribs {
        if let Some(v) = c.lo {
            bounds.push(v);
        }
        if let Some(v) = c.hi {
            bounds.push(v);
        }
    }
    bounds.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let tol = lit::<T>(1e-12);
    bounds.dedup_by(|a, b| (*a - *b).abs() <= tol * (T::one() + a.abs().max(b.abs())));

    let mut intervals: Vec<(Option<T>, Option<T>)> = Vec::new();
    if bounds.is_empty() {
        intervals.push((None, None));
    } else {
        intervals.push((None, Some(bounds[0])));
        for w in bounds.windows(2) {
            intervals.push((Some(w[0]), Some(w[1])));
        }
        intervals.push((Some(*bounds.last().unwrap()), None));
    }

    let covers = |c: &Contribution<T>, lo: Option<T>, hi: Option<T>| -> bool {
        // Compare midpoint-ish representative: interval is inside c's range?
        let lo_ok = match (c.lo, lo) {
            (None, _) => true,
            (Some(_), None) => false,
            (Some(cl), Some(il)) => cl <= il + tol * (T::one() + cl.abs()),
        };
        let hi_ok = match (c.hi, hi) {
            (None, _) => true,
            (Some(_), None) => false,
            (Some(ch), Some(ih)) => ih <= ch + tol * (T::one() + ch.abs()),
        };
        lo_ok && hi_ok
    };

    let mut pieces = Vec::new();
    for (lo, hi) in intervals {
        if let (Some(a), Some(b)) = (lo, hi) {
            if b <= a {
                continue;
            }
        }
        let mut terms = Vec::new();
        for c in &contribs {
            if covers(c, lo, hi) {
                terms.extend(c.terms.iter().cloned());
            }
        }
        let terms = consolidate_terms(terms);
        if !terms.is_empty() {
            pieces.push(Piece { lo, hi, terms });
        }
    }
    ExpPoly { pieces }
}

impl<T: Scalar> ExpPoly<T> {
    pub fn zero() -> Self {
        Self { pieces: vec![] }
    }

    /// Build from raw pieces; consolidates terms and drops empty pieces.
    /// Caller guarantees the intervals are disjoint.
    pub fn from_pieces(pieces: Vec<Piece<T>>) -> Self {
        let mut clean: Vec<Piece<T>> = pieces
            .into_iter()
            .map(|p| Piece { lo: p.lo, hi: p.hi, terms: consolidate_terms(p.terms) })
            .filter(|p| !p.terms.is_empty())
            .collect();
        clean.sort_by(|a, b| {
            let ka = a.lo.map(|v| (1, v)).unwrap_or((0, T::zero()));
            let kb = b.lo.map(|v| (1, v)).unwrap_or((0, T::zero()));
            ka.partial_cmp(&kb).unwrap()
        });
        Self { pieces: clean }
    }

    /// `amp * exp(-rate * |t|)`
    pub fn both_side_exp(rate: T, amp: T) -> Self {
        Self::from_pieces(vec![
            Piece { lo: None, hi: Some(T::zero()), terms: vec![Term::new(rate, vec![amp])] },
            Piece { lo: Some(T::zero()), hi: None, terms: vec![Term::new(-rate, vec![amp])] },
        ])
    }

    /// `amp * exp(-rate * t)` for `t >= 0`
    pub fn causal_exp(rate: T, amp: T) -> Self {
        Self::from_pieces(vec![Piece {
            lo: Some(T::zero()),
            hi: None,
            terms: vec![Term::new(-rate, vec![amp])],
        }])
    }

    /// `amp * exp(rate * t)` for `t <= 0`
    pub fn anti_causal_exp(rate: T, amp: T) -> Self {
        Self::from_pieces(vec![Piece {
            lo: None,
            hi: Some(T::zero()),
            terms: vec![Term::new(rate, vec![amp])],
        }])
    }

    pub fn pieces(&self) -> &[Piece<T>] {
        &self.pieces
    }

    pub fn is_zero(&self) -> bool {
        self.pieces.is_empty()
    }

    /// Pointwise value; at an interior breakpoint the two one-sided values are
    /// averaged, matching the value a Fourier series converges to at a jump.
    /// Sampling with this convention keeps the discrete transform of a
    /// discontinuous signal second-order accurate.
    pub fn eval(&self, t: T) -> T {
        let mut sum = T::zero();
        let mut hits = 0usize;
        let mut boundary = false;
        for p in &self.pieces {
            let lo_ok = p.lo.map_or(true, |lo| t >= lo);
            let hi_ok = p.hi.map_or(true, |hi| t <= hi);
            if lo_ok && hi_ok {
                let on_edge = p.lo.map_or(false, |lo| t == lo) || p.hi.map_or(false, |hi| t == hi);
                boundary = boundary || on_edge;
                sum += p.terms.iter().map(|term| term.eval(t)).fold(T::zero(), |a, b| a + b);
                hits += 1;
            }
        }
        if hits > 1 {
            sum / lit::<T>(hits as f64)
        } else if hits == 1 && boundary {
            // Jump against an implicit-zero neighbor: average with zero.
            sum / lit::<T>(2.0)
        } else {
            sum
        }
    }

    /// One-sided value, bypassing the jump-midpoint convention.
    pub fn eval_one_sided(&self, t: T, from_right: bool) -> T {
        for p in &self.pieces {
            let lo_ok = p.lo.map_or(true, |lo| if from_right { t >= lo } else { t > lo });
            let hi_ok = p.hi.map_or(true, |hi| if from_right { t < hi } else { t <= hi });
            if lo_ok && hi_ok {
                return p.terms.iter().map(|term| term.eval(t)).fold(T::zero(), |a, b| a + b);
            }
        }
        T::zero()
    }

    pub fn scale(&self, s: T) -> Self {
        let pieces = self
            .pieces
            .iter()
            .map(|p| Piece {
                lo: p.lo,
                hi: p.hi,
                terms: p
                    .terms
                    .iter()
                    .map(|t| Term::new(t.rate, poly_scale(&t.coeffs, s)))
                    .collect(),
            })
            .collect();
        Self::from_pieces(pieces)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut contribs: Vec<Contribution<T>> = Vec::new();
        for p in self.pieces.iter().chain(other.pieces.iter()) {
            contribs.push(Contribution { lo: p.lo, hi: p.hi, terms: p.terms.clone() });
        }
        assemble(contribs)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-T::one()))
    }

    pub fn time_reverse(&self) -> Self {
        let pieces = self
            .pieces
            .iter()
            .map(|p| Piece {
                lo: p.hi.map(|v| -v),
                hi: p.lo.map(|v| -v),
                terms: p
                    .terms
                    .iter()
                    .map(|t| {
                        let coeffs = t
                            .coeffs
                            .iter()
                            .enumerate()
                            .map(|(j, c)| if j % 2 == 1 { -*c } else { *c })
                            .collect();
                        Term::new(-t.rate, coeffs)
                    })
                    .collect(),
            })
            .collect();
        Self::from_pieces(pieces)
    }

    /// Pointwise product, exact within the family.
    pub fn mul(&self, other: &Self) -> Self {
        let mut contribs = Vec::new();
        for a in &self.pieces {
            for b in &other.pieces {
                let lo = match (a.lo, b.lo) {
                    (None, x) => x,
                    (x, None) => x,
                    (Some(x), Some(y)) => Some(x.max(y)),
                };
                let hi = match (a.hi, b.hi) {
                    (None, x) => x,
                    (x, None) => x,
                    (Some(x), Some(y)) => Some(x.min(y)),
                };
                if let (Some(l), Some(h)) = (lo, hi) {
                    if h <= l {
                        continue;
                    }
                }
                let mut terms = Vec::new();
                for ta in &a.terms {
                    for tb in &b.terms {
                        terms.push(Term::new(ta.rate + tb.rate, poly_mul(&ta.coeffs, &tb.coeffs)));
                    }
                }
                contribs.push(Contribution { lo, hi, terms });
            }
        }
        assemble(contribs)
    }

    /// Definite integral over the real line.
    pub fn integral(&self) -> Result<T> {
        let mut acc = T::zero();
        for p in &self.pieces {
            for term in &p.terms {
                acc += integral_exp_poly(&term.coeffs, term.rate, p.lo, p.hi)?;
            }
        }
        Ok(acc)
    }

    /// `integral(self * other)`; both functions are real.
    pub fn inner(&self, other: &Self) -> Result<T> {
        self.mul(other).integral()
    }

    pub fn norm_sq(&self) -> Result<T> {
        self.inner(self)
    }

    /// Exact convolution `(self * conv * other)(t)`.
    pub fn convolve(&self, other: &Self) -> Result<Self> {
        let mut contribs: Vec<Contribution<T>> = Vec::new();
        for fp in &self.pieces {
            for gp in &other.pieces {
                convolve_piece_pair(fp, gp, &mut contribs)?;
            }
        }
        Ok(assemble(contribs))
    }

    /// Continuous Fourier transform at a single frequency:
    /// `(1/sqrt(2 pi)) * integral f(t) exp(i w t) dt`.
    pub fn fourier_at(&self, omega: T) -> Result<Complex<T>> {
        let zero = Complex::new(T::zero(), T::zero());
        let mut acc = zero;
        for p in &self.pieces {
            for term in &p.terms {
                let z = Complex::new(term.rate, omega);
                let coeffs: Vec<Complex<T>> =
                    term.coeffs.iter().map(|c| Complex::new(*c, T::zero())).collect();
                if z.norm_sqr() <= lit::<T>(1e-30) {
                    // Pure polynomial: only finite intervals integrate.
                    match (p.lo, p.hi) {
                        (Some(a), Some(b)) => {
                            for (j, c) in coeffs.iter().enumerate() {
                                let k = lit::<T>((j + 1) as f64);
                                acc += c.scale((b.powi(j as i32 + 1) - a.powi(j as i32 + 1)) / k);
                            }
                        }
                        _ => {
                            return Err(Error::DivergentIntegral(
                                "zero total exponent on an unbounded piece".into(),
                            ))
                        }
                    }
                    continue;
                }
                let anti = exp_antiderivative_c(&coeffs, z);
                let eval = |x: Option<T>, sign_inf: i32| -> Result<Complex<T>> {
                    match x {
                        Some(v) => {
                            let mut s = zero;
                            for (j, d) in anti.iter().enumerate() {
                                s += d.scale(v.powi(j as i32));
                            }
                            Ok(s * (z.scale(v)).exp())
                        }
                        None => {
                            let decays = (sign_inf < 0 && term.rate > T::zero())
                                || (sign_inf > 0 && term.rate < T::zero());
                            if decays {
                                Ok(zero)
                            } else {
                                Err(Error::DivergentIntegral(
                                    "transform of a non-decaying piece".into(),
                                ))
                            }
                        }
                    }
                };
                acc += eval(p.hi, 1)? - eval(p.lo, -1)?;
            }
        }
        let norm = (lit::<T>(2.0) * T::PI()).sqrt();
        Ok(acc.unscale(norm))
    }

    /// Decay rates toward -inf and +inf; `None` for compactly supported input.
    /// Errors if an unbounded piece fails to decay.
    pub fn decay_rates(&self) -> Result<Option<(T, T)>> {
        let mut left: Option<T> = None;
        let mut right: Option<T> = None;
        for p in &self.pieces {
            if p.lo.is_none() {
                for t in &p.terms {
                    if t.rate <= T::zero() {
                        return Err(Error::DivergentIntegral(
                            "left-unbounded piece does not decay".into(),
                        ));
                    }
                    left = Some(left.map_or(t.rate, |v: T| v.min(t.rate)));
                }
            }
            if p.hi.is_none() {
                for t in &p.terms {
                    if t.rate >= T::zero() {
                        return Err(Error::DivergentIntegral(
                            "right-unbounded piece does not decay".into(),
                        ));
                    }
                    right = Some(right.map_or(-t.rate, |v: T| v.min(-t.rate)));
                }
            }
        }
        match (left, right) {
            (Some(l), Some(r)) => Ok(Some((l, r))),
            (None, None) => Ok(None),
            (l, r) => Ok(Some((
                l.unwrap_or_else(|| lit::<T>(f64::INFINITY)),
                r.unwrap_or_else(|| lit::<T>(f64::INFINITY)),
            ))),
        }
    }

    /// Largest breakpoint magnitude, for support heuristics.
    pub fn max_breakpoint(&self) -> T {
        let mut m = T::zero();
        for p in &self.pieces {
            if let Some(v) = p.lo {
                m = m.max(v.abs());
            }
            if let Some(v) = p.hi {
                m = m.max(v.abs());
            }
        }
        m
    }
}

/// Convolve one pair of pieces, appending exp-poly contributions in `t`.
///
/// For `t` between consecutive critical points the tau-integration limits are
/// either constants or `t - c`, so each antiderivative evaluation stays inside
/// the exp-poly family.
fn convolve_piece_pair<T: Scalar>(
    fp: &Piece<T>,
    gp: &Piece<T>,
    out: &mut Vec<Contribution<T>>,
) -> Result<()> {
    let add_opt = |a: Option<T>, b: Option<T>| -> Option<T> {
        match (a, b) {
            (Some(x), Some(y)) => Some(x + y),
            _ => None,
        }
    };
    // Result support: [aI + aJ, bI + bJ].
    let t_lo = add_opt(fp.lo, gp.lo);
    let t_hi = add_opt(fp.hi, gp.hi);
    // Branch switches of the limits max(aI, t - bJ) and min(bI, t - aJ).
    let mut crit: Vec<T> = Vec::new();
    for v in [t_lo, t_hi, add_opt(fp.lo, gp.hi), add_opt(fp.hi, gp.lo)].into_iter().flatten() {
        crit.push(v);
    }
    crit.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let tol = lit::<T>(1e-12);
    crit.dedup_by(|a, b| (*a - *b).abs() <= tol * (T::one() + a.abs().max(b.abs())));

    // Sub-intervals of t covering the support.
    let mut sub: Vec<(Option<T>, Option<T>)> = Vec::new();
    if crit.is_empty() {
        sub.push((None, None));
    } else {
        if t_lo.is_none() {
            sub.push((None, Some(crit[0])));
        }
        for w in crit.windows(2) {
            sub.push((Some(w[0]), Some(w[1])));
        }
        if t_hi.is_none() {
            sub.push((Some(*crit.last().unwrap()), None));
        }
    }

    for (lo, hi) in sub {
        if let (Some(a), Some(b)) = (lo, hi) {
            if b <= a {
                continue;
            }
        }
        // Representative t inside the open sub-interval decides the branches.
        let rep = match (lo, hi) {
            (Some(a), Some(b)) => (a + b) / lit::<T>(2.0),
            (Some(a), None) => a + T::one(),
            (None, Some(b)) => b - T::one(),
            (None, None) => T::zero(),
        };
        // Lower tau limit: max(aI, t - bJ).
        #[derive(Clone, Copy)]
        enum Limit<T> {
            Const(T),
            Shifted(T), // tau = t - c
            NegInf,
            PosInf,
        }
        let lower = match (fp.lo, gp.hi) {
            (None, None) => Limit::NegInf,
            (Some(a), None) => Limit::Const(a),
            (None, Some(bj)) => Limit::Shifted(bj),
            (Some(a), Some(bj)) => {
                if a >= rep - bj {
                    Limit::Const(a)
                } else {
                    Limit::Shifted(bj)
                }
            }
        };
        let upper = match (fp.hi, gp.lo) {
            (None, None) => Limit::PosInf,
            (Some(b), None) => Limit::Const(b),
            (None, Some(aj)) => Limit::Shifted(aj),
            (Some(b), Some(aj)) => {
                if b <= rep - aj {
                    Limit::Const(b)
                } else {
                    Limit::Shifted(aj)
                }
            }
        };

        let mut terms: Vec<Term<T>> = Vec::new();
        for tf in &fp.terms {
            for tg in &gp.terms {
                let delta = tf.rate - tg.rate;
                let confluent = rates_confluent(tf.rate, tg.rate);
                // R(tau; t) = p(tau) * q(t - tau): coefficients in tau are
                // polynomials in t.
                let deg_q = tg.coeffs.len() - 1;
                // q(t - tau) = sum_k q_k (t - tau)^k
                //            = sum_j tau^j * [sum_k q_k C(k,j) (-1)^j t^(k-j)]
                let mut q_tau: Vec<Vec<T>> = vec![Vec::new(); deg_q + 1];
                for (k, qk) in tg.coeffs.iter().enumerate() {
                    if *qk == T::zero() {
                        continue;
                    }
                    let mut binom = T::one();
                    for j in 0..=k {
                        // C(k, j) built incrementally.
                        let sign = if j % 2 == 1 { -T::one() } else { T::one() };
                        let mut tp = vec![T::zero(); k - j + 1];
                        tp[k - j] = *qk * binom * sign;
                        q_tau[j] = poly_add(&q_tau[j], &tp);
                        binom = binom * lit::<T>((k - j) as f64) / lit::<T>((j + 1) as f64);
                    }
                }
                // Multiply by p(tau): rho_j(t) = sum over tau-degree split.
                let deg_p = tf.coeffs.len() - 1;
                let mut rho: Vec<Vec<T>> = vec![Vec::new(); deg_p + deg_q + 1];
                for (a, pa) in tf.coeffs.iter().enumerate() {
                    if *pa == T::zero() {
                        continue;
                    }
                    for (b, qb) in q_tau.iter().enumerate() {
                        if qb.is_empty() {
                            continue;
                        }
                        rho[a + b] = poly_add(&rho[a + b], &poly_scale(qb, *pa));
                    }
                }
                for r in &mut rho {
                    if r.is_empty() {
                        r.push(T::zero());
                    }
                }

                // Antiderivative in tau of sum_j rho_j(t) tau^j e^(delta tau).
                let sigma: Vec<Vec<T>> = if confluent {
                    // integral tau^j -> tau^(j+1)/(j+1): shift up.
                    let mut s = vec![vec![T::zero()]; rho.len() + 1];
                    for (j, r) in rho.iter().enumerate() {
                        s[j + 1] = poly_scale(r, T::one() / lit::<T>((j + 1) as f64));
                    }
                    s
                } else {
                    // Vector-valued version of exp_antiderivative.
                    let m = rho.len() - 1;
                    let mut d: Vec<Vec<T>> = vec![Vec::new(); m + 1];
                    d[m] = poly_scale(&rho[m], T::one() / delta);
                    for j in (0..m).rev() {
                        let scaled = poly_scale(&d[j + 1], lit::<T>((j + 1) as f64));
                        let diff = poly_add(&rho[j], &poly_scale(&scaled, -T::one()));
                        d[j] = poly_scale(&diff, T::one() / delta);
                    }
                    d
                };

                // Evaluate H at a limit; returns (rate, poly-in-t) pairs.
                let eval_limit = |limit: Limit<T>| -> Result<Vec<(T, Vec<T>)>> {
                    match limit {
                        Limit::Const(c) => {
                            let weight =
                                if confluent { T::one() } else { (delta * c).exp() };
                            let mut poly = Vec::new();
                            for (j, sj) in sigma.iter().enumerate() {
                                let w = weight * c.powi(j as i32);
                                poly = poly_add(&poly, &poly_scale(sj, w));
                            }
                            Ok(vec![(tg.rate, poly)])
                        }
                        Limit::Shifted(c) => {
                            // tau = t - c: exp(delta tau) = e^(-delta c) e^(delta t)
                            let mut poly = Vec::new();
                            for (j, sj) in sigma.iter().enumerate() {
                                let shift = binomial_shift::<T>(j, c);
                                poly = poly_add(&poly, &poly_mul(sj, &shift));
                            }
                            if confluent {
                                Ok(vec![(tg.rate, poly)])
                            } else {
                                let w = (-delta * c).exp();
                                Ok(vec![(tf.rate, poly_scale(&poly, w))])
                            }
                        }
                        Limit::NegInf => {
                            if !confluent && delta > T::zero() {
                                Ok(vec![])
                            } else {
                                Err(Error::DivergentIntegral(
                                    "convolution tail does not decay at -inf".into(),
                                ))
                            }
                        }
                        Limit::PosInf => {
                            if !confluent && delta < T::zero() {
                                Ok(vec![])
                            } else {
                                Err(Error::DivergentIntegral(
                                    "convolution tail does not decay at +inf".into(),
                                ))
                            }
                        }
                    }
                };

                for (rate, poly) in eval_limit(upper)? {
                    terms.push(Term::new(rate, poly));
                }
                for (rate, poly) in eval_limit(lower)? {
                    terms.push(Term::new(rate, poly_scale(&poly, -T::one())));
                }
            }
        }
        let terms = consolidate_terms(terms);
        if !terms.is_empty() {
            out.push(Contribution { lo, hi, terms });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn bse(rate: f64) -> ExpPoly<f64> {
        ExpPoly::both_side_exp(rate, 1.0)
    }

    #[test]
    fn norm_of_both_side_exp() {
        // integral exp(-2|t|) dt = 1
        assert_abs_diff_eq!(bse(1.0).norm_sq().unwrap(), 1.0, epsilon = 1e-14);
        // integral exp(-2 g |t|) = 1/g
        assert_abs_diff_eq!(bse(2.5).norm_sq().unwrap(), 0.4, epsilon = 1e-14);
    }

    #[test]
    fn causal_times_anti_causal_overlap_is_zero() {
        let c = ExpPoly::causal_exp(1.0, 1.0);
        let a = ExpPoly::anti_causal_exp(1.0, 1.0);
        assert_abs_diff_eq!(c.inner(&a).unwrap(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn convolution_of_same_rate_causal_exponentials_is_confluent() {
        // exp(-g t)u(t) conv exp(-g t)u(t) = t exp(-g t) u(t)
        let c = ExpPoly::causal_exp(0.7f64, 1.0);
        let r = c.convolve(&c).unwrap();
        for t in [0.1, 0.5, 1.0, 3.0, 8.0] {
            assert_abs_diff_eq!(r.eval(t), t * (-0.7 * t).exp(), epsilon = 1e-13);
        }
        assert_abs_diff_eq!(r.eval(-0.5), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn convolution_of_distinct_rate_causal_exponentials() {
        // (exp(-a t) - exp(-b t)) / (b - a) on t >= 0
        let (a, b) = (0.5f64, 1.3f64);
        let r = ExpPoly::causal_exp(a, 1.0).convolve(&ExpPoly::causal_exp(b, 1.0)).unwrap();
        for t in [0.2, 1.0, 2.7] {
            let expect = ((-a * t).exp() - (-b * t).exp()) / (b - a);
            assert_abs_diff_eq!(r.eval(t), expect, epsilon = 1e-13);
        }
    }

    #[test]
    fn causal_conv_anti_causal_gives_two_sided_exponential() {
        // exp(-g t)u(t) conv exp(g t)u(-t) = exp(-g |t|) / (2 g)
        let g = 1.0f64;
        let r = ExpPoly::causal_exp(g, 1.0)
            .convolve(&ExpPoly::anti_causal_exp(g, 1.0))
            .unwrap();
        for t in [-3.0, -1.0, -0.2, 0.4, 2.0] {
            assert_abs_diff_eq!(r.eval(t), (-g * t.abs()).exp() / (2.0 * g), epsilon = 1e-13);
        }
    }

    #[test]
    fn both_side_self_convolution_matches_flat_plus_linear_form() {
        // exp(-|t|) conv exp(-|t|) = (1 + |t|) exp(-|t|)
        let r = bse(1.0).convolve(&bse(1.0)).unwrap();
        for t in [-4.0, -1.2, 0.0, 0.3, 2.5] {
            assert_abs_diff_eq!(r.eval(t), (1.0 + t.abs()) * (-t.abs()).exp(), epsilon = 1e-13);
        }
    }

    #[test]
    fn overlap_of_normalized_exponential_and_self_convolution() {
        // <N(e^-|t|), N((1+|t|)e^-|t|)> = 3/sqrt(10)
        let g = bse(1.0);
        let v = g.convolve(&g).unwrap();
        let ip = g.inner(&v).unwrap() / (g.norm_sq().unwrap() * v.norm_sq().unwrap()).sqrt();
        assert_abs_diff_eq!(ip, 3.0 / 10f64.sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn time_reverse_is_involutive_and_flips_causality() {
        let c = ExpPoly::causal_exp(0.4, 2.0);
        let r = c.time_reverse();
        assert_abs_diff_eq!(r.eval(-1.0), 2.0 * (-0.4f64).exp(), epsilon = 1e-14);
        assert_abs_diff_eq!(r.eval(1.0), 0.0);
        assert_eq!(c, r.time_reverse());
    }

    #[test]
    fn jump_midpoint_convention_at_breakpoints() {
        let c = ExpPoly::causal_exp(1.0, 1.0);
        assert_abs_diff_eq!(c.eval(0.0), 0.5, epsilon = 1e-15);
        let b = bse(1.0);
        assert_abs_diff_eq!(b.eval(0.0), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn fourier_at_matches_lorentzian_transform() {
        // F[exp(-g|t|)](w) = sqrt(2/pi) g / (g^2 + w^2)
        let g = 1.7;
        let f = bse(g);
        for w in [0.0, 0.3, 2.0, 11.0] {
            let expect = (2.0 / std::f64::consts::PI).sqrt() * g / (g * g + w * w);
            let got = f.fourier_at(w).unwrap();
            assert_abs_diff_eq!(got.re, expect, epsilon = 1e-14);
            assert_abs_diff_eq!(got.im, 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn fourier_at_matches_causal_transform() {
        // F[G exp(-G t)u(t)](w) = (1/sqrt(2 pi)) G/(G - i w)
        let big_g = 0.4;
        let f = ExpPoly::causal_exp(big_g, big_g);
        for w in [0.0, 0.4, -1.3, 5.0] {
            let expect = Complex::new(big_g, 0.0) / Complex::new(big_g, -w)
                / (2.0 * std::f64::consts::PI).sqrt();
            let got = f.fourier_at(w).unwrap();
            assert_abs_diff_eq!(got.re, expect.re, epsilon = 1e-14);
            assert_abs_diff_eq!(got.im, expect.im, epsilon = 1e-14);
        }
    }

    #[test]
    fn add_and_mul_respect_piecewise_structure() {
        let c = ExpPoly::causal_exp(1.0f64, 1.0);
        let a = ExpPoly::anti_causal_exp(1.0, 1.0);
        let sum = c.add(&a); // equals exp(-|t|) pointwise
        for t in [-2.0, -0.5, 0.7, 3.0] {
            assert_abs_diff_eq!(sum.eval(t), (-t.abs()).exp(), epsilon = 1e-14);
        }
        let sq = sum.mul(&sum);
        assert_abs_diff_eq!(sq.eval(1.0), (-2.0f64).exp(), epsilon = 1e-14);
        assert_abs_diff_eq!(sum.norm_sq().unwrap(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn divergent_integrals_are_reported() {
        // Growing exponential on an unbounded piece.
        let grow = ExpPoly::from_pieces(vec![Piece {
            lo: Some(0.0),
            hi: None,
            terms: vec![Term::new(1.0, vec![1.0])],
        }]);
        assert!(grow.integral().is_err());
        assert!(grow.decay_rates().is_err());
    }

    #[test]
    fn decay_rates_report_slowest_tail() {
        let f = ExpPoly::causal_exp(0.4, 1.0).convolve(&bse(1.0)).unwrap();
        let (l, r) = f.decay_rates().unwrap().unwrap();
        assert_abs_diff_eq!(l, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r, 0.4, epsilon = 1e-12);
    }
}
