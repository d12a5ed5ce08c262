//! Closed floating-point intervals with outward rounding.
//!
//! Every bound that comes out of an arithmetic operation is rounded away from
//! the exact result. Rounding is done after the fact: the nearest-rounded
//! result is computed first, an error-free transformation (TwoSum or an FMA
//! residual) tells which side of the exact value it landed on, and the bound is
//! moved to the adjacent float only when that side is wrong. Exact results
//! therefore stay exact (`[1,2] + [3,4]` is exactly `[4,6]`) and inexact ones
//! lose at most one ulp. Library transcendental functions are not correctly
//! rounded, so their bounds are widened by two ulps unconditionally.

use std::fmt;
use std::ops::{Add, Div, Index, IndexMut, Mul, Neg, Sub};

/// Finite stand-in for infinite bounds whenever a finite value is required
/// (midpoints, LP variable bounds).
pub const CLAMP: f64 = 1e8;

/// Results below this magnitude may have lost their rounding residual to
/// underflow, so they are always widened.
const TINY: f64 = 1e-290;

pub(crate) mod round {
    use super::TINY;

    #[inline]
    fn two_sum_err(a: f64, b: f64, s: f64) -> f64 {
        let bb = s - a;
        (a - (s - bb)) + (b - bb)
    }

    #[inline]
    pub fn add_down(a: f64, b: f64) -> f64 {
        let s = a + b;
        if !s.is_finite() {
            return if a.is_finite() && b.is_finite() { s.next_down() } else { s };
        }
        if two_sum_err(a, b, s) < 0.0 {
            s.next_down()
        } else {
            s
        }
    }

    #[inline]
    pub fn add_up(a: f64, b: f64) -> f64 {
        let s = a + b;
        if !s.is_finite() {
            return if a.is_finite() && b.is_finite() { s.next_up() } else { s };
        }
        if two_sum_err(a, b, s) > 0.0 {
            s.next_up()
        } else {
            s
        }
    }

    #[inline]
    pub fn sub_down(a: f64, b: f64) -> f64 {
        add_down(a, -b)
    }

    #[inline]
    pub fn sub_up(a: f64, b: f64) -> f64 {
        add_up(a, -b)
    }

    /// Sign of (exact a*b) - p, or None when the residual cannot be trusted.
    #[inline]
    fn mul_residual(a: f64, b: f64, p: f64) -> Option<f64> {
        if p.abs() < TINY {
            None
        } else {
            Some(a.mul_add(b, -p))
        }
    }

    #[inline]
    pub fn mul_down(a: f64, b: f64) -> f64 {
        if a == 0.0 || b == 0.0 {
            return 0.0;
        }
        let p = a * b;
        if !p.is_finite() {
            return if a.is_finite() && b.is_finite() { p.next_down() } else { p };
        }
        match mul_residual(a, b, p) {
            Some(e) if e >= 0.0 => p,
            _ => p.next_down(),
        }
    }

    #[inline]
    pub fn mul_up(a: f64, b: f64) -> f64 {
        if a == 0.0 || b == 0.0 {
            return 0.0;
        }
        let p = a * b;
        if !p.is_finite() {
            return if a.is_finite() && b.is_finite() { p.next_up() } else { p };
        }
        match mul_residual(a, b, p) {
            Some(e) if e <= 0.0 => p,
            _ => p.next_up(),
        }
    }

    /// Sign of (exact a/b) - q: +1, -1, 0, or None when unknown.
    #[inline]
    fn div_side(a: f64, b: f64, q: f64) -> Option<i8> {
        if !a.is_finite() || !b.is_finite() || a == 0.0 {
            return Some(0);
        }
        if !q.is_finite() || q.abs() < TINY {
            return None;
        }
        let r = (-q).mul_add(b, a);
        if r == 0.0 {
            Some(0)
        } else if (r > 0.0) == (b > 0.0) {
            Some(1)
        } else {
            Some(-1)
        }
    }

    #[inline]
    pub fn div_down(a: f64, b: f64) -> f64 {
        let q = a / b;
        match div_side(a, b, q) {
            Some(s) if s >= 0 => q,
            _ => q.next_down(),
        }
    }

    #[inline]
    pub fn div_up(a: f64, b: f64) -> f64 {
        let q = a / b;
        match div_side(a, b, q) {
            Some(s) if s <= 0 => q,
            _ => q.next_up(),
        }
    }

    #[inline]
    pub fn sqrt_down(x: f64) -> f64 {
        let s = x.sqrt();
        if !s.is_finite() || s == 0.0 {
            return s;
        }
        if x < TINY {
            return s.next_down().max(0.0);
        }
        let r = (-s).mul_add(s, x);
        if r < 0.0 {
            s.next_down()
        } else {
            s
        }
    }

    #[inline]
    pub fn sqrt_up(x: f64) -> f64 {
        let s = x.sqrt();
        if !s.is_finite() {
            return s;
        }
        if x < TINY {
            return s.next_up();
        }
        let r = (-s).mul_add(s, x);
        if r > 0.0 {
            s.next_up()
        } else {
            s
        }
    }

    /// Two-ulp widening for libm results.
    #[inline]
    pub fn lib_down(x: f64) -> f64 {
        if x.is_infinite() {
            x
        } else {
            x.next_down().next_down()
        }
    }

    #[inline]
    pub fn lib_up(x: f64) -> f64 {
        if x.is_infinite() {
            x
        } else {
            x.next_up().next_up()
        }
    }

    /// x^n for x >= 0 by repeated squaring, rounded down.
    pub fn pow_pos_down(x: f64, n: u32) -> f64 {
        let mut base = x;
        let mut acc = 1.0;
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                acc = mul_down(acc, base);
            }
            e >>= 1;
            if e > 0 {
                base = mul_down(base, base);
            }
        }
        acc
    }

    pub fn pow_pos_up(x: f64, n: u32) -> f64 {
        let mut base = x;
        let mut acc = 1.0;
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                acc = mul_up(acc, base);
            }
            e >>= 1;
            if e > 0 {
                base = mul_up(base, base);
            }
        }
        acc
    }
}

use round::*;

/// A closed interval `[lo, hi]` of extended reals, or the empty set.
#[derive(Clone, Copy, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    pub const EMPTY: Interval = Interval { lo: f64::INFINITY, hi: f64::NEG_INFINITY };
    pub const ENTIRE: Interval = Interval { lo: f64::NEG_INFINITY, hi: f64::INFINITY };
    pub const ZERO: Interval = Interval { lo: 0.0, hi: 0.0 };
    pub const ONE: Interval = Interval { lo: 1.0, hi: 1.0 };

    /// Panics if a bound is NaN, `lo > hi`, or the interval would be `[+inf, +inf]`
    /// or `[-inf, -inf]`.
    pub fn new(lo: f64, hi: f64) -> Self {
        Self::try_new(lo, hi).unwrap_or_else(|| panic!("invalid interval [{lo}, {hi}]"))
    }

    pub fn try_new(lo: f64, hi: f64) -> Option<Self> {
        if lo.is_nan() || hi.is_nan() || lo > hi || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
            None
        } else {
            Some(Interval { lo, hi })
        }
    }

    pub fn point(x: f64) -> Self {
        Self::new(x, x)
    }

    /// Builds `[lo, hi]`, or EMPTY when the bounds cross.
    fn checked(lo: f64, hi: f64) -> Self {
        if lo <= hi && lo < f64::INFINITY && hi > f64::NEG_INFINITY {
            Interval { lo, hi }
        } else {
            Self::EMPTY
        }
    }

    #[inline]
    pub fn lo(&self) -> f64 {
        self.lo
    }

    #[inline]
    pub fn hi(&self) -> f64 {
        self.hi
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.lo > self.hi
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn is_bounded(&self) -> bool {
        !self.is_empty() && self.lo.is_finite() && self.hi.is_finite()
    }

    /// Upper bound on `hi - lo`; 0 for EMPTY.
    pub fn width(&self) -> f64 {
        if self.is_empty() {
            0.0
        } else {
            sub_up(self.hi, self.lo)
        }
    }

    pub fn radius(&self) -> f64 {
        self.width() / 2.0
    }

    /// A finite point inside the interval. Unbounded sides are clamped to
    /// `±CLAMP` first.
    pub fn mid(&self) -> f64 {
        debug_assert!(!self.is_empty());
        let (lo, hi) = (self.lo, self.hi);
        let m = match (lo.is_finite(), hi.is_finite()) {
            (true, true) => 0.5 * lo + 0.5 * hi,
            (false, false) => 0.0,
            (true, false) => {
                if lo < CLAMP {
                    0.5 * lo + 0.5 * CLAMP
                } else {
                    lo
                }
            }
            (false, true) => {
                if hi > -CLAMP {
                    0.5 * hi - 0.5 * CLAMP
                } else {
                    hi
                }
            }
        };
        m.clamp(lo, hi)
    }

    /// Largest absolute value in the interval.
    pub fn mag(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_zero(&self) -> bool {
        self.contains(0.0)
    }

    pub fn is_subset(&self, other: &Interval) -> bool {
        self.is_empty() || (other.lo <= self.lo && self.hi <= other.hi)
    }

    /// `self` lies strictly inside `other`.
    pub fn is_interior_subset(&self, other: &Interval) -> bool {
        if self.is_empty() {
            return true;
        }
        let lo_ok = other.lo == f64::NEG_INFINITY || other.lo < self.lo;
        let hi_ok = other.hi == f64::INFINITY || self.hi < other.hi;
        lo_ok && hi_ok
    }

    pub fn intersect(&self, other: &Interval) -> Interval {
        Self::checked(self.lo.max(other.lo), self.hi.min(other.hi))
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        if self.is_empty() {
            return *other;
        }
        if other.is_empty() {
            return *self;
        }
        Interval { lo: self.lo.min(other.lo), hi: self.hi.max(other.hi) }
    }

    pub fn sqr(&self) -> Interval {
        if self.is_empty() {
            return Self::EMPTY;
        }
        if self.lo >= 0.0 {
            Interval { lo: mul_down(self.lo, self.lo), hi: mul_up(self.hi, self.hi) }
        } else if self.hi <= 0.0 {
            Interval { lo: mul_down(self.hi, self.hi), hi: mul_up(self.lo, self.lo) }
        } else {
            let m = self.mag();
            Interval { lo: 0.0, hi: mul_up(m, m) }
        }
    }

    /// Integer power. Negative exponents go through extended division.
    pub fn powi(&self, n: i32) -> Interval {
        if self.is_empty() {
            return Self::EMPTY;
        }
        if n == 0 {
            return Self::ONE;
        }
        if n < 0 {
            return Self::ONE / self.powi(-n);
        }
        let e = n as u32;
        if e % 2 == 0 {
            let (a, b) = (self.lo.abs(), self.hi.abs());
            if self.contains_zero() {
                Interval { lo: 0.0, hi: pow_pos_up(a.max(b), e) }
            } else {
                let (small, big) = if a < b { (a, b) } else { (b, a) };
                Interval { lo: pow_pos_down(small, e), hi: pow_pos_up(big, e) }
            }
        } else {
            let down = |x: f64| if x >= 0.0 { pow_pos_down(x, e) } else { -pow_pos_up(-x, e) };
            let up = |x: f64| if x >= 0.0 { pow_pos_up(x, e) } else { -pow_pos_down(-x, e) };
            Interval { lo: down(self.lo), hi: up(self.hi) }
        }
    }

    /// Real n-th root preimage of `[0, +inf)` values, n >= 1: returns the
    /// nonnegative interval `{ r >= 0 : r^n ∈ self }` (hull).
    pub fn nth_root_pos(&self, n: u32) -> Interval {
        let y = self.intersect(&Interval { lo: 0.0, hi: f64::INFINITY });
        if y.is_empty() {
            return Self::EMPTY;
        }
        if n == 1 {
            return y;
        }
        if n == 2 {
            return Interval { lo: sqrt_down(y.lo), hi: sqrt_up(y.hi) };
        }
        // powf is off by a few ulps at most; when the rounded power check
        // cannot settle (underflow near zero), fall back to 0 and max(1, y.hi),
        // which bound the root for any n >= 1
        const STEPS: usize = 8;
        let inv = 1.0 / n as f64;
        let mut lo = 0.0;
        if y.lo > 0.0 {
            let mut r = y.lo.powf(inv);
            for _ in 0..STEPS {
                if r <= 0.0 || pow_pos_up(r, n) <= y.lo {
                    lo = r.max(0.0);
                    break;
                }
                r = r.next_down();
            }
        }
        let mut hi = y.hi.powf(inv);
        if hi.is_finite() {
            let mut settled = false;
            for _ in 0..STEPS {
                if pow_pos_down(hi, n) >= y.hi {
                    settled = true;
                    break;
                }
                hi = hi.next_up();
            }
            if !settled {
                hi = y.hi.max(1.0);
            }
        }
        Interval { lo, hi }
    }

    pub fn sqrt(&self) -> Interval {
        let d = self.intersect(&Interval { lo: 0.0, hi: f64::INFINITY });
        if d.is_empty() {
            return Self::EMPTY;
        }
        Interval { lo: sqrt_down(d.lo), hi: sqrt_up(d.hi) }
    }

    pub fn exp(&self) -> Interval {
        if self.is_empty() {
            return Self::EMPTY;
        }
        let lo = if self.lo == f64::NEG_INFINITY { 0.0 } else { lib_down(self.lo.exp()).max(0.0) };
        let hi = lib_up(self.hi.exp());
        Self::checked(lo, hi)
    }

    pub fn log(&self) -> Interval {
        if self.is_empty() || self.hi <= 0.0 {
            return Self::EMPTY;
        }
        let lo = if self.lo <= 0.0 { f64::NEG_INFINITY } else { lib_down(self.lo.ln()) };
        let hi = lib_up(self.hi.ln());
        Self::checked(lo, hi)
    }

    pub fn sin(&self) -> Interval {
        self.periodic(f64::sin, std::f64::consts::FRAC_PI_2)
    }

    pub fn cos(&self) -> Interval {
        self.periodic(f64::cos, 0.0)
    }

    /// Range of a unit-amplitude 2π-periodic function whose maxima sit at
    /// `peak + 2kπ` and minima at `peak + π + 2kπ`.
    fn periodic(&self, f: fn(f64) -> f64, peak: f64) -> Interval {
        use std::f64::consts::PI;
        if self.is_empty() {
            return Self::EMPTY;
        }
        let full = Interval { lo: -1.0, hi: 1.0 };
        if !self.is_bounded() || self.width() >= 2.0 * PI || self.mag() > 1e15 {
            return full;
        }
        let tau = 2.0 * PI;
        // Conservative test for an extremum `p + 2kπ` inside [lo, hi]: widening
        // the search window can only make the result wider.
        let slack = 1e-12 * (1.0 + self.mag());
        let hits = |p: f64| {
            let k = ((self.lo - slack - p) / tau).ceil();
            p + k * tau <= self.hi + slack
        };
        let (fa, fb) = (f(self.lo), f(self.hi));
        let mut lo = lib_down(fa.min(fb));
        let mut hi = lib_up(fa.max(fb));
        if hits(peak) {
            hi = 1.0;
        }
        if hits(peak + PI) {
            lo = -1.0;
        }
        Interval { lo: lo.max(-1.0), hi: hi.min(1.0) }
    }

    /// `self / other` with extended division: a divisor straddling zero
    /// yields the hull of the extended quotient, and `[0,0]` yields EMPTY.
    pub fn div_extended(&self, other: &Interval) -> Interval {
        let (a, b) = (self, other);
        if a.is_empty() || b.is_empty() {
            return Self::EMPTY;
        }
        if b.lo == 0.0 && b.hi == 0.0 {
            return Self::EMPTY;
        }
        if a.lo == 0.0 && a.hi == 0.0 {
            return Self::ZERO;
        }
        if b.lo > 0.0 || b.hi < 0.0 {
            let cands = [(a.lo, b.lo), (a.lo, b.hi), (a.hi, b.lo), (a.hi, b.hi)];
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for (x, y) in cands {
                let (d, u) = quot_bounds(x, y);
                lo = lo.min(d);
                hi = hi.max(u);
            }
            return Self::checked(lo, hi);
        }
        if b.lo < 0.0 && b.hi > 0.0 {
            return Self::ENTIRE;
        }
        // Divisor touches zero at exactly one end.
        if b.lo == 0.0 {
            // b = [0, bh], bh > 0
            if a.lo >= 0.0 {
                Interval { lo: if b.hi.is_infinite() { 0.0 } else { div_down(a.lo, b.hi) }, hi: f64::INFINITY }
            } else if a.hi <= 0.0 {
                Interval { lo: f64::NEG_INFINITY, hi: if b.hi.is_infinite() { 0.0 } else { div_up(a.hi, b.hi) } }
            } else {
                Self::ENTIRE
            }
        } else {
            // b = [bl, 0], bl < 0
            if a.lo >= 0.0 {
                Interval { lo: f64::NEG_INFINITY, hi: if b.lo.is_infinite() { 0.0 } else { div_up(a.lo, b.lo) } }
            } else if a.hi <= 0.0 {
                Interval { lo: if b.lo.is_infinite() { 0.0 } else { div_down(a.hi, b.lo) }, hi: f64::INFINITY }
            } else {
                Self::ENTIRE
            }
        }
    }
}

/// Outward bounds of x / y for finite-or-infinite nonzero y.
fn quot_bounds(x: f64, y: f64) -> (f64, f64) {
    if x.is_infinite() && y.is_infinite() {
        // inf/inf only arises at unbounded corners; the quotient is unbounded in sign of x*y
        return if (x > 0.0) == (y > 0.0) { (0.0, f64::INFINITY) } else { (f64::NEG_INFINITY, 0.0) };
    }
    (div_down(x, y), div_up(x, y))
}

fn mul_bounds(x: f64, y: f64) -> (f64, f64) {
    (mul_down(x, y), mul_up(x, y))
}

impl Add for Interval {
    type Output = Interval;
    fn add(self, rhs: Interval) -> Interval {
        if self.is_empty() || rhs.is_empty() {
            return Interval::EMPTY;
        }
        Interval::checked(add_down(self.lo, rhs.lo), add_up(self.hi, rhs.hi))
    }
}

impl Sub for Interval {
    type Output = Interval;
    fn sub(self, rhs: Interval) -> Interval {
        if self.is_empty() || rhs.is_empty() {
            return Interval::EMPTY;
        }
        Interval::checked(sub_down(self.lo, rhs.hi), sub_up(self.hi, rhs.lo))
    }
}

impl Mul for Interval {
    type Output = Interval;
    fn mul(self, rhs: Interval) -> Interval {
        if self.is_empty() || rhs.is_empty() {
            return Interval::EMPTY;
        }
        let cands = [(self.lo, rhs.lo), (self.lo, rhs.hi), (self.hi, rhs.lo), (self.hi, rhs.hi)];
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (x, y) in cands {
            let (d, u) = mul_bounds(x, y);
            lo = lo.min(d);
            hi = hi.max(u);
        }
        Interval::checked(lo, hi)
    }
}

impl Div for Interval {
    type Output = Interval;
    fn div(self, rhs: Interval) -> Interval {
        self.div_extended(&rhs)
    }
}

impl Neg for Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        if self.is_empty() {
            return self;
        }
        Interval { lo: -self.hi, hi: -self.lo }
    }
}

impl From<f64> for Interval {
    fn from(x: f64) -> Self {
        Interval::point(x)
    }
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            write!(f, "[empty]")
        } else {
            write!(f, "[{:?}, {:?}]", self.lo, self.hi)
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// One interval per problem variable.
#[derive(Clone, PartialEq, Debug)]
pub struct IntervalBox {
    comps: Vec<Interval>,
}

impl IntervalBox {
    pub fn new(comps: Vec<Interval>) -> Self {
        let mut b = IntervalBox { comps };
        b.normalize();
        b
    }

    pub fn from_bounds(bounds: &[(f64, f64)]) -> Self {
        Self::new(bounds.iter().map(|&(l, h)| Interval::new(l, h)).collect())
    }

    pub fn from_point(x: &[f64]) -> Self {
        IntervalBox { comps: x.iter().map(|&v| Interval::point(v)).collect() }
    }

    pub fn empty(n: usize) -> Self {
        IntervalBox { comps: vec![Interval::EMPTY; n] }
    }

    // Canonical EMPTY: every component empty as soon as one is.
    fn normalize(&mut self) {
        if self.comps.iter().any(Interval::is_empty) {
            self.comps.iter_mut().for_each(|c| *c = Interval::EMPTY);
        }
    }

    pub fn len(&self) -> usize {
        self.comps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.comps.iter().any(Interval::is_empty)
    }

    pub fn components(&self) -> &[Interval] {
        &self.comps
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Interval> {
        self.comps.iter()
    }

    /// Replaces one component, emptying the whole box if it is EMPTY.
    pub fn set(&mut self, i: usize, v: Interval) {
        self.comps[i] = v;
        self.normalize();
    }

    pub fn width(&self) -> f64 {
        self.comps.iter().map(Interval::width).fold(0.0, f64::max)
    }

    pub fn midpoint(&self) -> Vec<f64> {
        self.comps.iter().map(Interval::mid).collect()
    }

    pub fn lower_corner(&self) -> Vec<f64> {
        self.comps.iter().map(Interval::lo).collect()
    }

    pub fn upper_corner(&self) -> Vec<f64> {
        self.comps.iter().map(Interval::hi).collect()
    }

    pub fn intersect(&self, other: &IntervalBox) -> IntervalBox {
        assert_eq!(self.len(), other.len(), "box dimension mismatch");
        IntervalBox::new(self.comps.iter().zip(&other.comps).map(|(a, b)| a.intersect(b)).collect())
    }

    pub fn hull(&self, other: &IntervalBox) -> IntervalBox {
        assert_eq!(self.len(), other.len(), "box dimension mismatch");
        if self.is_empty() {
            return other.clone();
        }
        if other.is_empty() {
            return self.clone();
        }
        IntervalBox::new(self.comps.iter().zip(&other.comps).map(|(a, b)| a.hull(b)).collect())
    }

    pub fn contains_point(&self, x: &[f64]) -> bool {
        x.len() == self.len() && self.comps.iter().zip(x).all(|(c, &v)| c.contains(v))
    }

    pub fn is_subset(&self, other: &IntervalBox) -> bool {
        self.is_empty() || self.comps.iter().zip(&other.comps).all(|(a, b)| a.is_subset(b))
    }

    /// Index of the component maximizing `width / (1 + |mid|)`; ties go to the
    /// lowest index. `None` when every component is degenerate.
    pub fn max_relative_width_index(&self) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (i, c) in self.comps.iter().enumerate() {
            let w = c.width();
            if w <= 0.0 || c.is_empty() {
                continue;
            }
            let rel = w / (1.0 + c.mid().abs());
            if best.map_or(true, |(_, b)| rel > b) {
                best = Some((i, rel));
            }
        }
        best.map(|(i, _)| i)
    }

    /// Product of component widths (0 for EMPTY).
    pub fn volume(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        self.comps.iter().map(|c| c.hi - c.lo).product()
    }

    /// Projects a point onto the box (componentwise clamp; unbounded sides
    /// are left alone).
    pub fn clamp_point(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.comps).map(|(&v, c)| v.clamp(c.lo, c.hi)).collect()
    }
}

impl Index<usize> for IntervalBox {
    type Output = Interval;
    fn index(&self, i: usize) -> &Interval {
        &self.comps[i]
    }
}

impl IndexMut<usize> for IntervalBox {
    fn index_mut(&mut self, i: usize) -> &mut Interval {
        &mut self.comps[i]
    }
}

impl From<Vec<Interval>> for IntervalBox {
    fn from(v: Vec<Interval>) -> Self {
        IntervalBox::new(v)
    }
}
