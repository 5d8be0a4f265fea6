//! Exponent arithmetic: critical regularity, the local theory's Strichartz
//! triples, energy-regime indices and Strichartz scaling checks in d = 2.
//!
//! Everything is generic over [`Exact`], implemented for `f64` and for exact
//! rationals, so identities can be property-tested with zero residual.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_rational::Ratio;
use serde::Serialize;

use crate::error::{invalid, Result};

pub type Rational = Ratio<i128>;

pub trait Exact:
    Clone
    + Debug
    + PartialOrd
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn int(v: i64) -> Self;
    fn ceil_int(&self) -> i64;
    /// Zero for rationals; within 1e-12 for floats.
    fn negligible(&self) -> bool;
    fn to_f64(&self) -> f64;

    fn ratio(n: i64, d: i64) -> Self {
        Self::int(n) / Self::int(d)
    }
}

impl Exact for f64 {
    fn int(v: i64) -> Self {
        v as f64
    }
    fn ceil_int(&self) -> i64 {
        self.ceil() as i64
    }
    fn negligible(&self) -> bool {
        self.abs() <= 1e-12
    }
    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Exact for Rational {
    fn int(v: i64) -> Self {
        Ratio::from_integer(v as i128)
    }
    fn ceil_int(&self) -> i64 {
        self.ceil().to_integer() as i64
    }
    fn negligible(&self) -> bool {
        *self.numer() == 0
    }
    fn to_f64(&self) -> f64 {
        *self.numer() as f64 / *self.denom() as f64
    }
}

fn max<T: Exact>(a: T, b: T) -> T {
    if a >= b {
        a
    } else {
        b
    }
}

fn min<T: Exact>(a: T, b: T) -> T {
    if a <= b {
        a
    } else {
        b
    }
}

/// Lebesgue exponent, possibly infinite.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Exponent<T> {
    Finite(T),
    Infinite,
}

impl<T: Exact> Exponent<T> {
    pub fn recip(&self) -> T {
        match self {
            Exponent::Finite(x) => T::int(1) / x.clone(),
            Exponent::Infinite => T::int(0),
        }
    }

    /// `lo < x ≤ hi` (open below) or `lo ≤ x ≤ hi`; `hi = None` means ∞ allowed.
    fn within(&self, lo: T, open_lo: bool, hi: Option<T>) -> bool {
        match self {
            Exponent::Infinite => hi.is_none(),
            Exponent::Finite(x) => {
                let above = if open_lo { *x > lo } else { *x >= lo };
                above && hi.map(|h| *x <= h).unwrap_or(true)
            }
        }
    }
}

impl Exponent<f64> {
    pub fn from_f64(x: f64) -> Self {
        if x.is_infinite() {
            Exponent::Infinite
        } else {
            Exponent::Finite(x)
        }
    }
}

/// `max(1 − 2/(p−1), 0)`.
pub fn s_crit<T: Exact>(p: T) -> T {
    max(T::int(1) - T::int(2) / (p - T::int(1)), T::int(0))
}

/// `(q, r, σ)` of the pathwise local theory: `(2+δ, (4+2δ)/(1+δ), 0)` for `p < 2`,
/// `(p+δ, 2p, 1 − 1/(p+δ) − 1/p)` for `p ≥ 2`.
pub fn lwp_triple<T: Exact>(p: T, delta: T) -> (T, T, T) {
    let one = T::int(1);
    let two = T::int(2);
    if p < two {
        let q = two.clone() + delta.clone();
        let r = (T::int(4) + two * delta.clone()) / (one + delta);
        (q, r, T::int(0))
    } else {
        let q = p.clone() + delta;
        let sigma = one.clone() - one.clone() / q.clone() - one / p.clone();
        (q, two * p, sigma)
    }
}

/// `⌈(p−3)/2⌉`.
pub fn beta_p<T: Exact>(p: T) -> i64 {
    ((p - T::int(3)) / T::int(2)).ceil_int()
}

/// `(p−3)/(p−1)`.
pub fn s_p<T: Exact>(p: T) -> T {
    (p.clone() - T::int(3)) / (p - T::int(1))
}

/// `2/(p+δ) + 2s`.
pub fn gamma<T: Exact>(p: T, delta: T, s: T) -> T {
    T::int(2) / (p + delta) + T::int(2) * s
}

/// `min(1/2, 2/(p−1) − 1/2)`.
pub fn alpha_bound<T: Exact>(p: T) -> T {
    let half = T::ratio(1, 2);
    min(half.clone(), T::int(2) / (p - T::int(1)) - half)
}

/// Pairs `(q, r)` and dual `(q̃, r̃)` for `s_crit < s < 1` with `δ' = 1 + δ`:
/// `q = (3−s)/(1−s)·δ'`, `r = 2/(1−s−(1−s)/((3−s)δ'))`, `q̃ = δ'`, `r̃ = 2/(3−s−1/δ')`.
pub fn subcritical_pairs<T: Exact>(s: T, delta: T) -> ((T, T), (T, T)) {
    let one = T::int(1);
    let two = T::int(2);
    let three = T::int(3);
    let dp = one.clone() + delta;
    let a = three.clone() - s.clone();
    let b = one.clone() - s.clone();
    let q = a.clone() / b.clone() * dp.clone();
    let r = two.clone() / (b.clone() - b / (a * dp.clone()));
    let qt = dp.clone();
    let rt = two / (three - s - one / dp);
    ((q, r), (qt, rt))
}

#[derive(Debug, Clone, Serialize)]
pub struct CriticalExponents<T> {
    pub p: T,
    pub delta: T,
    pub s: T,
    pub s_crit: T,
    pub sigma: T,
    pub q: T,
    pub r: T,
    pub beta_p: i64,
    pub s_p: T,
    pub gamma: T,
    /// `s ∈ (−1/p, 1]`, the range where `γ` is used.
    pub gamma_in_range: bool,
    pub alpha_bound: T,
    /// Present when `s_crit < s < 1`.
    pub subcritical: Option<((T, T), (T, T))>,
}

pub fn critical_exponents<T: Exact>(p: T, delta: T, s: T) -> Result<CriticalExponents<T>> {
    if !(p > T::int(1)) {
        return invalid(format!("p must exceed 1, got {:?}", p));
    }
    if !(delta > T::int(0)) {
        return invalid(format!("δ must be positive, got {:?}", delta));
    }
    let (q, r, sigma) = lwp_triple(p.clone(), delta.clone());
    let sc = s_crit(p.clone());
    let gamma_in_range = s > -(T::int(1) / p.clone()) && s <= T::int(1);
    let subcritical = if s > sc && s < T::int(1) {
        Some(subcritical_pairs(s.clone(), delta.clone()))
    } else {
        None
    };
    Ok(CriticalExponents {
        s_crit: sc,
        sigma,
        q,
        r,
        beta_p: beta_p(p.clone()),
        s_p: s_p(p.clone()),
        gamma: gamma(p.clone(), delta.clone(), s.clone()),
        gamma_in_range,
        alpha_bound: alpha_bound(p.clone()),
        subcritical,
        p,
        delta,
        s,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairKind {
    /// `1/q + 2/r = 1 − s`, `2 < q ≤ ∞`, `2 ≤ r ≤ ∞`.
    Homogeneous,
    /// `1/q̃ + 2/r̃ − 2 = 1 − s`, `1 < q̃ ≤ 2`, `1 ≤ r̃ ≤ 2`.
    InhomogeneousDual,
}

#[derive(Debug, Clone, Serialize)]
pub struct PairCheck<T> {
    pub pass: bool,
    pub residual: T,
    pub scaling_ok: bool,
    pub range_ok: bool,
}

pub fn admissible_pair_check<T: Exact>(q: Exponent<T>, r: Exponent<T>, s: T, kind: PairKind) -> PairCheck<T> {
    let one = T::int(1);
    let two = T::int(2);
    let target = one.clone() - s;
    let (lhs, range_ok) = match kind {
        PairKind::Homogeneous => (
            q.recip() + two.clone() * r.recip(),
            q.within(two.clone(), true, None) && r.within(two, false, None),
        ),
        PairKind::InhomogeneousDual => (
            q.recip() + two.clone() * r.recip() - two.clone(),
            q.within(one.clone(), true, Some(two.clone())) && r.within(one, false, Some(two)),
        ),
    };
    let residual = lhs - target;
    let scaling_ok = residual.negligible();
    PairCheck { pass: scaling_ok && range_ok, residual, scaling_ok, range_ok }
}

/// Convenience wrapper over floats, with `f64::INFINITY` for ∞.
pub fn check_pair_f64(q: f64, r: f64, s: f64, kind: PairKind) -> PairCheck<f64> {
    admissible_pair_check(Exponent::from_f64(q), Exponent::from_f64(r), s, kind)
}
