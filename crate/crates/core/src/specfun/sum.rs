use std::cmp::Ordering;
use std::ops::{Div, Mul, Neg};

use crate::{Result, ScnError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Neg,
    Zero,
    Pos,
}

impl Sign {
    pub fn of(x: f64) -> Sign {
        if x > 0.0 {
            Sign::Pos
        } else if x < 0.0 {
            Sign::Neg
        } else {
            Sign::Zero
        }
    }

    pub fn as_f64(self) -> f64 {
        match self {
            Sign::Neg => -1.0,
            Sign::Zero => 0.0,
            Sign::Pos => 1.0,
        }
    }
}

impl Mul for Sign {
    type Output = Sign;
    fn mul(self, rhs: Sign) -> Sign {
        match (self, rhs) {
            (Sign::Zero, _) | (_, Sign::Zero) => Sign::Zero,
            (a, b) if a == b => Sign::Pos,
            _ => Sign::Neg,
        }
    }
}

/// A real number stored as `sign · exp(ln_abs)`.
///
/// An exact zero has `sign == Sign::Zero`; its `ln_abs` is `-inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedLog {
    pub sign: Sign,
    pub ln_abs: f64,
}

impl SignedLog {
    pub const ONE: SignedLog = SignedLog {
        sign: Sign::Pos,
        ln_abs: 0.0,
    };
    pub const ZERO: SignedLog = SignedLog {
        sign: Sign::Zero,
        ln_abs: f64::NEG_INFINITY,
    };

    pub fn new(sign: Sign, ln_abs: f64) -> Self {
        if sign == Sign::Zero {
            SignedLog::ZERO
        } else {
            SignedLog { sign, ln_abs }
        }
    }

    pub fn from_f64(x: f64) -> Self {
        SignedLog::new(Sign::of(x), x.abs().ln())
    }

    /// `exp(ln_abs)` with its sign.
    pub fn positive_ln(ln_abs: f64) -> Self {
        SignedLog {
            sign: Sign::Pos,
            ln_abs,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.sign == Sign::Zero
    }

    pub fn to_f64(self) -> f64 {
        match self.sign {
            Sign::Zero => 0.0,
            s => s.as_f64() * self.ln_abs.exp(),
        }
    }

    /// Like [`to_f64`](Self::to_f64) but refuses to overflow.
    pub fn to_f64_checked(self) -> Result<f64> {
        if self.sign != Sign::Zero && self.ln_abs > f64::MAX.ln() {
            return Err(ScnError::Overflow(format!(
                "log-magnitude {} exceeds f64 range",
                self.ln_abs
            )));
        }
        Ok(self.to_f64())
    }

    pub fn powi(self, k: i64) -> Self {
        if k == 0 {
            return SignedLog::ONE;
        }
        let sign = match self.sign {
            Sign::Neg if k % 2 != 0 => Sign::Neg,
            Sign::Zero => Sign::Zero,
            _ => Sign::Pos,
        };
        SignedLog::new(sign, self.ln_abs * k as f64)
    }
}

impl Mul for SignedLog {
    type Output = SignedLog;
    fn mul(self, rhs: SignedLog) -> SignedLog {
        SignedLog::new(self.sign * rhs.sign, self.ln_abs + rhs.ln_abs)
    }
}

impl Div for SignedLog {
    type Output = SignedLog;
    fn div(self, rhs: SignedLog) -> SignedLog {
        assert!(!rhs.is_zero(), "SignedLog division by zero");
        SignedLog::new(self.sign * rhs.sign, self.ln_abs - rhs.ln_abs)
    }
}

impl Neg for SignedLog {
    type Output = SignedLog;
    fn neg(self) -> SignedLog {
        let sign = match self.sign {
            Sign::Pos => Sign::Neg,
            Sign::Neg => Sign::Pos,
            Sign::Zero => Sign::Zero,
        };
        SignedLog::new(sign, self.ln_abs)
    }
}

/// Neumaier's improved Kahan summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
    abs_sum: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
        self.abs_sum += x.abs();
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }

    /// Sum of absolute values of everything added; bounds the rounding
    /// error of the total.
    pub fn abs_total(&self) -> f64 {
        self.abs_sum
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// Accumulates [`SignedLog`] terms and sums them by descending magnitude.
#[derive(Debug, Clone, Default)]
pub struct SignedLogSum {
    terms: Vec<SignedLog>,
}

impl SignedLogSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, term: SignedLog) {
        if !term.is_zero() {
            self.terms.push(term);
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest `ln|term|`, or `-inf` when empty.
    pub fn max_ln(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| t.ln_abs)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Returns the total and the log of the sum of absolute values, which
    /// measures how much cancellation took place.
    pub fn total(&self) -> (SignedLog, f64) {
        if self.terms.is_empty() {
            return (SignedLog::ZERO, f64::NEG_INFINITY);
        }
        let mut sorted = self.terms.clone();
        sorted.sort_by(|a, b| b.ln_abs.partial_cmp(&a.ln_abs).unwrap_or(Ordering::Equal));
        let scale = sorted[0].ln_abs;
        let acc: CompensatedSum = sorted
            .iter()
            .map(|t| t.sign.as_f64() * (t.ln_abs - scale).exp())
            .collect();
        let ln_abs_total = scale + acc.abs_total().ln();
        (SignedLog::from_f64(acc.value()) * SignedLog::positive_ln(scale), ln_abs_total)
    }
}
