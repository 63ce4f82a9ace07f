//! Exact algebra on exponential-polynomials.
//!
//! An [`ExpPoly`] is a finite sum `Σ c·s^p·e^{-a·s}` with rational exponent
//! `p > -1` and rational rate `a > 0`. The class is closed under every
//! integral the population balance operators need:
//!
//! ```text
//! ∫_0^s (s-ξ)^p ξ^q e^{-a s} dξ = B(p+1, q+1) s^{p+q+1} e^{-a s}
//! ∫_0^∞ s^p e^{-a s} ds        = Γ(p+1) / a^{p+1}
//! ∫_s^∞ ξ^m e^{-a ξ} dξ        = e^{-a s} Σ_{i=0}^{m} m!/i! · s^i / a^{m-i+1}
//! ```
//!
//! A [`TimeField`] is a polynomial in time whose coefficients are
//! exponential-polynomials in size; iterates and partial sums of the series
//! solutions live there.

use std::cmp::Ordering;
use std::ops::{Add, Mul, Neg, Sub};

use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{beta, gamma};

/// Exact rational exponent used for size powers and decay rates.
pub type Exponent = Rational64;

/// Relative tolerance below which merged coefficients are treated as zero.
pub const CANCEL_TOL: f64 = 1e-14;

pub fn ratio(num: i64, den: i64) -> Exponent {
    Exponent::new(num, den)
}

pub fn int(n: i64) -> Exponent {
    Exponent::from_integer(n)
}

pub(crate) fn to_f64(r: Exponent) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// `s^p`, using integer powers where possible so that exact inputs stay exact.
pub(crate) fn pow(s: f64, p: Exponent) -> f64 {
    if p.is_integer() {
        s.powi(*p.numer() as i32)
    } else {
        s.powf(to_f64(p))
    }
}

/// One term `coeff · s^power · e^{-rate·s}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpPolyTerm {
    pub coeff: f64,
    pub power: Exponent,
    pub rate: Exponent,
}

impl ExpPolyTerm {
    pub fn new(coeff: f64, power: Exponent, rate: Exponent) -> Self {
        ExpPolyTerm { coeff, power, rate }
    }

    fn key(&self) -> (Exponent, Exponent) {
        (self.rate, self.power)
    }

    fn check(&self) -> Result<()> {
        if !self.coeff.is_finite() {
            return Err(Error::Domain(format!("non-finite coefficient {}", self.coeff)));
        }
        if self.power <= int(-1) {
            return Err(Error::Domain(format!(
                "power {} is not integrable at the origin",
                self.power
            )));
        }
        if self.rate <= int(0) {
            return Err(Error::Domain(format!(
                "rate {} is not integrable at infinity",
                self.rate
            )));
        }
        Ok(())
    }

    #[inline]
    fn eval(&self, s: f64) -> f64 {
        self.coeff * pow(s, self.power) * (-to_f64(self.rate) * s).exp()
    }

    /// ∫_0^∞ s^j · term ds.
    fn moment(&self, j: u32) -> f64 {
        let p = to_f64(self.power) + j as f64;
        self.coeff * gamma(p + 1.0) / to_f64(self.rate).powf(p + 1.0)
    }
}

/// Neumaier-compensated running sum.
#[derive(Default)]
struct Compensated {
    sum: f64,
    carry: f64,
}

impl Compensated {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Sort, merge equal (power, rate) pairs and drop cancelled terms.
///
/// A merged coefficient is dropped when it is exactly zero or below
/// [`CANCEL_TOL`] times the largest contribution to it.
fn canonicalize(mut raw: Vec<ExpPolyTerm>) -> Vec<ExpPolyTerm> {
    raw.sort_by_key(|t| t.key());
    let mut out: Vec<ExpPolyTerm> = Vec::with_capacity(raw.len());
    let mut i = 0;
    while i < raw.len() {
        let key = raw[i].key();
        let mut acc = Compensated::default();
        let mut scale = 0.0_f64;
        while i < raw.len() && raw[i].key() == key {
            acc.add(raw[i].coeff);
            scale = scale.max(raw[i].coeff.abs());
            i += 1;
        }
        let c = acc.value();
        if c != 0.0 && c.abs() > CANCEL_TOL * scale {
            out.push(ExpPolyTerm::new(c, key.1, key.0));
        }
    }
    out
}

/// Finite sum of exponential-polynomial terms in canonical form.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<ExpPolyTerm>", into = "Vec<ExpPolyTerm>")]
pub struct ExpPoly {
    terms: Vec<ExpPolyTerm>,
}

impl TryFrom<Vec<ExpPolyTerm>> for ExpPoly {
    type Error = Error;

    fn try_from(terms: Vec<ExpPolyTerm>) -> Result<Self> {
        ExpPoly::new(terms)
    }
}

impl From<ExpPoly> for Vec<ExpPolyTerm> {
    fn from(p: ExpPoly) -> Self {
        p.terms
    }
}

impl ExpPoly {
    /// Builds a canonical exponential-polynomial, validating every term.
    pub fn new(terms: Vec<ExpPolyTerm>) -> Result<Self> {
        for t in &terms {
            t.check()?;
        }
        Ok(ExpPoly {
            terms: canonicalize(terms),
        })
    }

    pub fn zero() -> Self {
        ExpPoly { terms: Vec::new() }
    }

    pub fn monomial(coeff: f64, power: Exponent, rate: Exponent) -> Result<Self> {
        Self::new(vec![ExpPolyTerm::new(coeff, power, rate)])
    }

    /// Shorthand for `Σ coeffs[i] · s^i · e^{-rate·s}`.
    pub fn from_polynomial(coeffs: &[f64], rate: Exponent) -> Result<Self> {
        Self::new(
            coeffs
                .iter()
                .enumerate()
                .map(|(i, &c)| ExpPolyTerm::new(c, int(i as i64), rate))
                .collect(),
        )
    }

    pub fn terms(&self) -> &[ExpPolyTerm] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Smallest power present, if any.
    pub fn min_power(&self) -> Option<Exponent> {
        self.terms.iter().map(|t| t.power).min()
    }

    /// Coefficient of `s^power e^{-rate s}`, zero when absent.
    pub fn coeff_of(&self, power: Exponent, rate: Exponent) -> f64 {
        self.terms
            .binary_search_by(|t| t.key().cmp(&(rate, power)))
            .map(|i| self.terms[i].coeff)
            .unwrap_or(0.0)
    }

    pub fn evaluate(&self, s: f64) -> Result<f64> {
        if !(s >= 0.0) {
            return Err(Error::Domain(format!("size {s} is negative")));
        }
        if s == 0.0 && self.terms.iter().any(|t| t.power < int(0)) {
            return Err(Error::Domain(
                "negative power evaluated at the origin".into(),
            ));
        }
        Ok(self.eval_unchecked(s))
    }

    #[inline]
    pub(crate) fn eval_unchecked(&self, s: f64) -> f64 {
        self.terms.iter().map(|t| t.eval(s)).sum()
    }

    /// `∫_0^s f(s-ξ) g(ξ) dξ` in closed form; every term pair must share its rate.
    pub fn convolve(&self, other: &ExpPoly) -> Result<ExpPoly> {
        let mut raw = Vec::with_capacity(self.len() * other.len());
        convolve_into(&self.terms, &other.terms, 1.0, &mut raw)?;
        Ok(ExpPoly {
            terms: canonicalize(raw),
        })
    }

    /// `∫_0^∞ f(s) ds`.
    pub fn total_integral(&self) -> f64 {
        self.moment(0)
    }

    /// `∫_0^∞ s^j f(s) ds`.
    pub fn moment(&self, j: u32) -> f64 {
        self.terms.iter().map(|t| t.moment(j)).sum()
    }

    /// `∫_s^∞ f(ξ) dξ` as an exponential-polynomial in `s`.
    ///
    /// Only non-negative integer powers have a finite closed form here.
    pub fn tail_integral(&self) -> Result<ExpPoly> {
        let mut raw = Vec::new();
        for t in &self.terms {
            if !t.power.is_integer() || t.power < int(0) {
                return Err(Error::Unsupported(format!(
                    "tail integral of s^{} has no finite incomplete-gamma expansion",
                    t.power
                )));
            }
            let m = *t.power.numer();
            let a = to_f64(t.rate);
            // m!/i! · s^i / a^{m-i+1}, built from i = m downwards
            let mut factor = 1.0 / a;
            for i in (0..=m).rev() {
                raw.push(ExpPolyTerm::new(t.coeff * factor, int(i), t.rate));
                factor *= i as f64 / a;
            }
        }
        Ok(ExpPoly {
            terms: canonicalize(raw),
        })
    }

    pub fn scale(&self, factor: f64) -> ExpPoly {
        if factor == 0.0 {
            return ExpPoly::zero();
        }
        ExpPoly {
            terms: self
                .terms
                .iter()
                .map(|t| ExpPolyTerm::new(t.coeff * factor, t.power, t.rate))
                .collect(),
        }
    }

    /// Pointwise product: powers add and rates add.
    pub fn multiply(&self, other: &ExpPoly) -> Result<ExpPoly> {
        let mut raw = Vec::with_capacity(self.len() * other.len());
        for a in &self.terms {
            for b in &other.terms {
                let t = ExpPolyTerm::new(a.coeff * b.coeff, a.power + b.power, a.rate + b.rate);
                t.check()?;
                raw.push(t);
            }
        }
        Ok(ExpPoly {
            terms: canonicalize(raw),
        })
    }

    /// Multiplication by the monomial `s^q`.
    pub fn mul_power(&self, q: Exponent) -> Result<ExpPoly> {
        let terms = shifted(&self.terms, q, 1.0)?;
        // shifting every power by the same amount preserves the ordering
        Ok(ExpPoly { terms })
    }

    /// Merges two canonical polynomials.
    pub fn add(&self, other: &ExpPoly) -> ExpPoly {
        let mut raw = Vec::with_capacity(self.len() + other.len());
        raw.extend_from_slice(&self.terms);
        raw.extend_from_slice(&other.terms);
        ExpPoly {
            terms: canonicalize(raw),
        }
    }

    pub(crate) fn from_canonical_raw(raw: Vec<ExpPolyTerm>) -> ExpPoly {
        ExpPoly {
            terms: canonicalize(raw),
        }
    }
}

/// Copies `terms` with every power shifted by `q` and coefficients scaled by `factor`.
pub(crate) fn shifted(terms: &[ExpPolyTerm], q: Exponent, factor: f64) -> Result<Vec<ExpPolyTerm>> {
    terms
        .iter()
        .map(|t| {
            let out = ExpPolyTerm::new(t.coeff * factor, t.power + q, t.rate);
            out.check().map(|_| out)
        })
        .collect()
}

/// Appends the closed-form convolution of two term lists, scaled by `factor`.
pub(crate) fn convolve_into(
    f: &[ExpPolyTerm],
    g: &[ExpPolyTerm],
    factor: f64,
    out: &mut Vec<ExpPolyTerm>,
) -> Result<()> {
    for a in f {
        for b in g {
            if a.rate != b.rate {
                return Err(Error::Unsupported(format!(
                    "convolution of rates {} and {} has no closed form",
                    a.rate, b.rate
                )));
            }
            let pa = to_f64(a.power) + 1.0;
            let pb = to_f64(b.power) + 1.0;
            out.push(ExpPolyTerm::new(
                factor * a.coeff * b.coeff * beta(pa, pb),
                a.power + b.power + int(1),
                a.rate,
            ));
        }
    }
    Ok(())
}

/// Gain convolutions of every degree pair of two τ-fields at once.
///
/// With `f̃(p) = c Γ(p+1)`, the convolution of single-rate terms becomes a
/// product of polynomials in the index `(p+1)·D` (`D` the common power
/// denominator), so all pairs are accumulated on dense arrays. Returns `None`
/// when the fields mix rates or the Gamma weights could overflow; callers then
/// fall back to [`convolve_into`].
pub(crate) fn convolve_fields_dense(
    f: &[(usize, Vec<ExpPolyTerm>)],
    g: &[(usize, Vec<ExpPolyTerm>)],
    factor: f64,
) -> Option<Vec<(usize, Vec<ExpPolyTerm>)>> {
    let all = || f.iter().chain(g).flat_map(|(_, ts)| ts.iter());
    let rate = all().next()?.rate;
    if all().any(|t| t.rate != rate) {
        return None;
    }
    let den = all().fold(1i64, |d, t| num_integer_lcm(d, *t.power.denom()));
    let index = |p: Exponent| -> usize {
        let x = (p + int(1)) * den;
        *x.numer() as usize
    };
    let dense = |field: &[(usize, Vec<ExpPolyTerm>)]| -> (Vec<(usize, Vec<f64>)>, usize) {
        let width = field
            .iter()
            .flat_map(|(_, ts)| ts.iter().map(|t| index(t.power)))
            .max()
            .unwrap_or(0);
        let rows = field
            .iter()
            .filter(|(_, ts)| !ts.is_empty())
            .map(|(k, ts)| {
                let mut row = vec![0.0; width + 1];
                for t in ts {
                    row[index(t.power)] += t.coeff * gamma(to_f64(t.power) + 1.0);
                }
                (*k, row)
            })
            .collect();
        (rows, width)
    };
    let (fr, fw) = dense(f);
    let (gr, gw) = dense(g);
    let width = fw + gw;
    if (width as f64) / (den as f64) > 160.0 {
        return None;
    }
    let max_deg = fr.iter().map(|r| r.0).max()? + gr.iter().map(|r| r.0).max()?;
    let mut sum = vec![vec![0.0; width + 1]; max_deg + 1];
    let mut carry = vec![vec![0.0; width + 1]; max_deg + 1];
    let mut peak = vec![vec![0.0_f64; width + 1]; max_deg + 1];
    for (ka, ra) in &fr {
        for (kb, rb) in &gr {
            let d = ka + kb;
            let (s_row, c_row, m_row) = (&mut sum[d], &mut carry[d], &mut peak[d]);
            for (i, &x) in ra.iter().enumerate() {
                if x == 0.0 {
                    continue;
                }
                for (j, &y) in rb.iter().enumerate() {
                    if y == 0.0 {
                        continue;
                    }
                    let v = x * y;
                    let o = i + j;
                    let acc = s_row[o];
                    let t = acc + v;
                    c_row[o] += if acc.abs() >= v.abs() { (acc - t) + v } else { (v - t) + acc };
                    s_row[o] = t;
                    m_row[o] = m_row[o].max(v.abs());
                }
            }
        }
    }
    let mut out = Vec::new();
    for d in 0..=max_deg {
        let mut terms = Vec::new();
        for o in 0..=width {
            let v = sum[d][o] + carry[d][o];
            if v == 0.0 || v.abs() <= CANCEL_TOL * peak[d][o] {
                continue;
            }
            let shifted = Rational64::new(o as i64, den);
            terms.push(ExpPolyTerm::new(factor * v / gamma(to_f64(shifted)), shifted - int(1), rate));
        }
        if !terms.is_empty() {
            out.push((d, terms));
        }
    }
    Some(out)
}

fn num_integer_lcm(a: i64, b: i64) -> i64 {
    let (mut x, mut y) = (a, b);
    while y != 0 {
        (x, y) = (y, x % y);
    }
    a / x * b
}

impl Add for &ExpPoly {
    type Output = ExpPoly;

    fn add(self, rhs: &ExpPoly) -> ExpPoly {
        ExpPoly::add(self, rhs)
    }
}

impl Sub for &ExpPoly {
    type Output = ExpPoly;

    fn sub(self, rhs: &ExpPoly) -> ExpPoly {
        ExpPoly::add(self, &rhs.scale(-1.0))
    }
}

impl Neg for &ExpPoly {
    type Output = ExpPoly;

    fn neg(self) -> ExpPoly {
        self.scale(-1.0)
    }
}

impl Mul<f64> for &ExpPoly {
    type Output = ExpPoly;

    fn mul(self, rhs: f64) -> ExpPoly {
        self.scale(rhs)
    }
}

/// Polynomial in time with exponential-polynomial coefficients: `Σ_k τ^k f_k(s)`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TimeField {
    coeffs: Vec<(usize, ExpPoly)>,
}

impl TimeField {
    pub fn zero() -> Self {
        TimeField { coeffs: Vec::new() }
    }

    /// Lifts a size profile to a field constant in time.
    pub fn constant(f: ExpPoly) -> Self {
        Self::from_coeffs(vec![(0, f)])
    }

    /// Builds a field from (degree, coefficient) pairs, merging repeated degrees.
    pub fn from_coeffs(pairs: Vec<(usize, ExpPoly)>) -> Self {
        let mut pairs = pairs;
        pairs.sort_by_key(|(k, _)| *k);
        let mut coeffs: Vec<(usize, ExpPoly)> = Vec::with_capacity(pairs.len());
        for (k, f) in pairs {
            match coeffs.last_mut() {
                Some((last, acc)) if *last == k => *acc = acc.add(&f),
                _ => coeffs.push((k, f)),
            }
        }
        coeffs.retain(|(_, f)| !f.is_empty());
        TimeField { coeffs }
    }

    /// Builds a field from raw term lists per degree, canonicalizing each once.
    pub(crate) fn from_raw(mut raw: Vec<(usize, Vec<ExpPolyTerm>)>) -> Self {
        raw.sort_by_key(|(k, _)| *k);
        let mut coeffs: Vec<(usize, ExpPoly)> = Vec::new();
        let mut iter = raw.into_iter().peekable();
        while let Some((k, mut terms)) = iter.next() {
            while let Some((k2, _)) = iter.peek() {
                if *k2 != k {
                    break;
                }
                terms.extend(iter.next().unwrap().1);
            }
            let f = ExpPoly::from_canonical_raw(terms);
            if !f.is_empty() {
                coeffs.push((k, f));
            }
        }
        TimeField { coeffs }
    }

    pub fn coeffs(&self) -> &[(usize, ExpPoly)] {
        &self.coeffs
    }

    pub fn coeff(&self, degree: usize) -> Option<&ExpPoly> {
        self.coeffs
            .binary_search_by_key(&degree, |(k, _)| *k)
            .ok()
            .map(|i| &self.coeffs[i].1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Highest τ-degree present.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.last().map(|(k, _)| *k)
    }

    /// Largest term count over all coefficients.
    pub fn max_terms(&self) -> usize {
        self.coeffs.iter().map(|(_, f)| f.len()).max().unwrap_or(0)
    }

    pub fn min_power(&self) -> Option<Exponent> {
        self.coeffs.iter().filter_map(|(_, f)| f.min_power()).min()
    }

    pub fn evaluate(&self, s: f64, tau: f64) -> Result<f64> {
        let mut total = 0.0;
        for (k, f) in &self.coeffs {
            total += f.evaluate(s)? * tau.powi(*k as i32);
        }
        Ok(total)
    }

    #[inline]
    pub(crate) fn eval_unchecked(&self, s: f64, tau: f64) -> f64 {
        self.coeffs
            .iter()
            .map(|(k, f)| f.eval_unchecked(s) * tau.powi(*k as i32))
            .sum()
    }

    /// Collapses the field at a fixed time into a size profile.
    pub fn at_time(&self, tau: f64) -> ExpPoly {
        let raw = self
            .coeffs
            .iter()
            .flat_map(|(k, f)| f.scale(tau.powi(*k as i32)).terms)
            .collect();
        ExpPoly::from_canonical_raw(raw)
    }

    /// `∫_0^τ F dρ`: degree k maps to k+1 with factor 1/(k+1).
    pub fn integrate(&self) -> TimeField {
        TimeField {
            coeffs: self
                .coeffs
                .iter()
                .map(|(k, f)| (k + 1, f.scale(1.0 / (k + 1) as f64)))
                .collect(),
        }
    }

    /// `∂F/∂τ`: degree k maps to k-1 with factor k; the constant part vanishes.
    pub fn differentiate(&self) -> TimeField {
        TimeField {
            coeffs: self
                .coeffs
                .iter()
                .filter(|(k, _)| *k > 0)
                .map(|(k, f)| (k - 1, f.scale(*k as f64)))
                .collect(),
        }
    }

    pub fn scale(&self, factor: f64) -> TimeField {
        if factor == 0.0 {
            return TimeField::zero();
        }
        TimeField {
            coeffs: self
                .coeffs
                .iter()
                .map(|(k, f)| (*k, f.scale(factor)))
                .collect(),
        }
    }

    pub fn add(&self, other: &TimeField) -> TimeField {
        let mut raw: Vec<(usize, Vec<ExpPolyTerm>)> = self
            .coeffs
            .iter()
            .map(|(k, f)| (*k, f.terms.clone()))
            .collect();
        raw.extend(other.coeffs.iter().map(|(k, f)| (*k, f.terms.clone())));
        TimeField::from_raw(raw)
    }

    /// Applies a size-space map to every coefficient.
    pub fn try_map<F>(&self, mut op: F) -> Result<TimeField>
    where
        F: FnMut(&ExpPoly) -> Result<ExpPoly>,
    {
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        for (k, f) in &self.coeffs {
            coeffs.push((*k, op(f)?));
        }
        Ok(TimeField::from_coeffs(coeffs))
    }

    /// Moment of order `j` of every τ-coefficient, as (degree, value) pairs.
    pub fn coefficient_moments(&self, j: u32) -> Vec<(usize, f64)> {
        self.coeffs.iter().map(|(k, f)| (*k, f.moment(j))).collect()
    }

    /// `∫ s^j F(s, τ) ds` at a fixed time.
    pub fn moment_at(&self, j: u32, tau: f64) -> f64 {
        self.coeffs
            .iter()
            .map(|(k, f)| f.moment(j) * tau.powi(*k as i32))
            .sum()
    }
}

impl Add for &TimeField {
    type Output = TimeField;

    fn add(self, rhs: &TimeField) -> TimeField {
        TimeField::add(self, rhs)
    }
}

impl Sub for &TimeField {
    type Output = TimeField;

    fn sub(self, rhs: &TimeField) -> TimeField {
        TimeField::add(self, &rhs.scale(-1.0))
    }
}

impl Mul<f64> for &TimeField {
    type Output = TimeField;

    fn mul(self, rhs: f64) -> TimeField {
        self.scale(rhs)
    }
}

/// Relative comparison of two polynomials term by term.
///
/// Returns the largest relative coefficient mismatch, or `None` when the
/// (power, rate) supports differ.
pub fn max_relative_mismatch(a: &ExpPoly, b: &ExpPoly) -> Option<f64> {
    if a.len() != b.len() {
        return None;
    }
    let mut worst = 0.0_f64;
    for (x, y) in a.terms().iter().zip(b.terms()) {
        if x.key().cmp(&y.key()) != Ordering::Equal {
            return None;
        }
        let scale = x.coeff.abs().max(y.coeff.abs());
        worst = worst.max((x.coeff - y.coeff).abs() / scale);
    }
    Some(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn term(c: f64, p: Exponent, a: i64) -> ExpPolyTerm {
        ExpPolyTerm::new(c, p, int(a))
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1e-300)
    }

    #[test]
    fn evaluate_examples() {
        let e = ExpPoly::monomial(1.0, int(0), int(1)).unwrap();
        assert_eq!(e.evaluate(0.0).unwrap(), 1.0);
        let f = ExpPoly::monomial(4.0, int(1), int(2)).unwrap();
        assert!(close(f.evaluate(1.0).unwrap(), 4.0 * (-2.0f64).exp(), 1e-15));
        assert!((f.evaluate(1.0).unwrap() - 0.5413411).abs() < 1e-7);
        assert_eq!(ExpPoly::zero().evaluate(3.7).unwrap(), 0.0);
    }

    #[test]
    fn evaluate_rejects_negative_power_at_origin() {
        let f = ExpPoly::monomial(1.0, ratio(-1, 2), int(2)).unwrap();
        assert!(matches!(f.evaluate(0.0), Err(Error::Domain(_))));
        assert!(f.evaluate(1e-3).is_ok());
        assert!(matches!(f.evaluate(-1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn construction_guards() {
        assert!(ExpPoly::monomial(1.0, int(-1), int(1)).is_err());
        assert!(ExpPoly::monomial(1.0, int(0), int(0)).is_err());
        assert!(ExpPoly::monomial(f64::NAN, int(0), int(1)).is_err());
    }

    #[test]
    fn convolution_examples() {
        let e = ExpPoly::monomial(1.0, int(0), int(1)).unwrap();
        assert_eq!(e.convolve(&e).unwrap(), ExpPoly::monomial(1.0, int(1), int(1)).unwrap());

        let f = ExpPoly::monomial(4.0, int(1), int(2)).unwrap();
        let c = f.convolve(&f).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c.terms()[0].power, int(3));
        assert!(close(c.terms()[0].coeff, 8.0 / 3.0, 1e-14));

        let h = ExpPoly::monomial(1.0, ratio(1, 2), int(1)).unwrap();
        let c = h.convolve(&h).unwrap();
        assert_eq!(c.terms()[0].power, int(2));
        assert!(close(c.terms()[0].coeff, PI / 8.0, 1e-14));
    }

    #[test]
    fn convolution_rejects_mixed_rates() {
        let a = ExpPoly::monomial(1.0, int(0), int(1)).unwrap();
        let b = ExpPoly::monomial(1.0, int(0), int(2)).unwrap();
        assert!(matches!(a.convolve(&b), Err(Error::Unsupported(_))));
    }

    #[test]
    fn integral_examples() {
        let e = ExpPoly::monomial(1.0, int(0), int(1)).unwrap();
        assert!(close(e.total_integral(), 1.0, 1e-15));
        let f = ExpPoly::monomial(4.0, int(1), int(2)).unwrap();
        assert!(close(f.total_integral(), 1.0, 1e-15));
        let g = ExpPoly::monomial(1.0, ratio(-1, 2), int(2)).unwrap();
        assert!((g.total_integral() - 1.2533141).abs() < 1e-7);
        assert!(close(f.moment(0), 1.0, 1e-15));
        assert!(close(f.moment(1), 1.0, 1e-15));
        let k = ExpPoly::monomial(32.0, int(1), int(4)).unwrap();
        assert!(close(k.moment(0), 2.0, 1e-15));
    }

    #[test]
    fn tail_examples() {
        let e = ExpPoly::monomial(1.0, int(0), int(1)).unwrap();
        assert_eq!(e.tail_integral().unwrap(), e);
        let f = ExpPoly::monomial(4.0, int(1), int(2)).unwrap();
        let expect = ExpPoly::from_polynomial(&[1.0, 2.0], int(2)).unwrap();
        assert_eq!(max_relative_mismatch(&f.tail_integral().unwrap(), &expect), Some(0.0));
        let k = ExpPoly::monomial(32.0, int(1), int(4)).unwrap();
        let expect = ExpPoly::from_polynomial(&[2.0, 8.0], int(4)).unwrap();
        assert_eq!(max_relative_mismatch(&k.tail_integral().unwrap(), &expect), Some(0.0));
        let frac = ExpPoly::monomial(1.0, ratio(1, 2), int(1)).unwrap();
        assert!(matches!(frac.tail_integral(), Err(Error::Unsupported(_))));
    }

    #[test]
    fn combine_examples() {
        let e = ExpPoly::monomial(1.0, int(0), int(1)).unwrap();
        assert!((&e + &e.scale(-1.0)).is_empty());
        let f = ExpPoly::monomial(4.0, int(1), int(2)).unwrap();
        let g = f.mul_power(ratio(1, 6)).unwrap();
        assert_eq!(g, ExpPoly::monomial(4.0, ratio(7, 6), int(2)).unwrap());
        assert_eq!(e.multiply(&e).unwrap(), ExpPoly::monomial(1.0, int(0), int(2)).unwrap());
        assert!(matches!(e.mul_power(int(-1)), Err(Error::Domain(_))));
    }

    #[test]
    fn canonical_form_merges_and_drops() {
        let p = ExpPoly::new(vec![
            term(1.0, int(2), 1),
            term(2.0, int(0), 1),
            term(-1.0, int(2), 1),
            term(3.0, int(0), 1),
            term(1.0, int(0), 2),
        ])
        .unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!(p.coeff_of(int(0), int(1)), 5.0);
        assert_eq!(p.coeff_of(int(2), int(1)), 0.0);
        // cancellation residue at round-off level disappears
        let q = ExpPoly::new(vec![term(0.1 + 0.2, int(1), 1), term(-0.3, int(1), 1)]).unwrap();
        assert!(q.is_empty());
    }

    #[test]
    fn time_integrate_and_differentiate() {
        let f = ExpPoly::monomial(2.0, int(1), int(1)).unwrap();
        let c = TimeField::constant(f.clone());
        let i = c.integrate();
        assert_eq!(i.coeffs(), &[(1, f.clone())]);
        let sq = TimeField::from_coeffs(vec![(2, f.clone())]);
        assert_eq!(sq.differentiate().coeffs(), &[(1, f.scale(2.0))]);
        let mixed = TimeField::from_coeffs(vec![(0, f.clone()), (3, f.scale(0.5))]);
        assert_eq!(mixed.integrate().differentiate(), mixed);
        assert_eq!(mixed.evaluate(1.3, 0.0).unwrap(), f.evaluate(1.3).unwrap());
    }

    fn integer_expoly() -> impl Strategy<Value = ExpPoly> {
        prop::collection::vec((-3.0f64..3.0, 0i64..5, 1i64..4), 1..5).prop_map(|ts| {
            ExpPoly::new(ts.into_iter().map(|(c, p, a)| term(c, int(p), a)).collect()).unwrap()
        })
    }

    fn same_rate_expoly(rate: i64) -> impl Strategy<Value = ExpPoly> {
        prop::collection::vec((-3.0f64..3.0, 0i64..12, 1i64..4), 1..5).prop_map(move |ts| {
            ExpPoly::new(
                ts.into_iter()
                    .map(|(c, p, d)| ExpPolyTerm::new(c, ratio(p, d), int(rate)))
                    .collect(),
            )
            .unwrap()
        })
    }

    proptest! {
        #[test]
        fn convolution_commutes(f in same_rate_expoly(1), g in same_rate_expoly(1)) {
            prop_assert_eq!(f.convolve(&g).unwrap(), g.convolve(&f).unwrap());
        }

        #[test]
        fn moment_of_convolution(f in same_rate_expoly(2), g in same_rate_expoly(2)) {
            let lhs = f.convolve(&g).unwrap().moment(1);
            let rhs = f.moment(1) * g.moment(0) + f.moment(0) * g.moment(1);
            let scale: f64 = f.terms().iter().chain(g.terms()).map(|t| t.coeff.abs()).sum::<f64>().powi(2).max(1.0);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * scale.max(lhs.abs()));
        }

        #[test]
        fn tail_at_origin_is_total(f in integer_expoly()) {
            let t = f.tail_integral().unwrap().evaluate(0.0).unwrap();
            let total = f.total_integral();
            let scale: f64 = f.terms().iter().map(|t| t.moment(0).abs()).sum();
            prop_assert!((t - total).abs() <= 1e-12 * scale);
        }

        #[test]
        fn total_integral_matches_quadrature(f in integer_expoly()) {
            let q = crate::quad::integrate(|s| f.eval_unchecked(s), 0.0, 200.0, 1e-14);
            let scale: f64 = f.terms().iter().map(|t| t.moment(0).abs()).sum();
            prop_assert!((q - f.total_integral()).abs() <= 1e-8 * scale);
        }

        #[test]
        fn time_integral_matches_quadrature(
            f in integer_expoly(), g in integer_expoly(), s in 0.0f64..6.0, tau in 0.0f64..2.0
        ) {
            let field = TimeField::from_coeffs(vec![(0, f), (2, g)]);
            let exact = field.integrate().evaluate(s, tau).unwrap();
            let numeric = quadrature::integrate(|r| field.eval_unchecked(s, r), 0.0, tau, 1e-14).integral;
            prop_assert!((exact - numeric).abs() <= 1e-10);
        }
    }
}
