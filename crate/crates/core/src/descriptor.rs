//! Closed-form function descriptors.
//!
//! The problem data (`c1`, `c2`, the envelope `L`, the spatial profile of
//! `c3`, and the convolution kernel `f`) are carried as term lists rather
//! than sampled grids, so every quadrature in the solver can be refined
//! without re-ingesting data. A 1-D descriptor is a sum of elementary terms;
//! a 2-D descriptor is a sum of separable products of two elementary factors.

use crate::math;
use alloc::vec::Vec;

/// Elementary term shape. `parameter` is the power, frequency, or rate,
/// depending on the kind; it is ignored for `Constant`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TermKind {
    Constant,
    /// `x^parameter` with a nonnegative integer power.
    Monomial,
    /// `sin(parameter * x)`.
    Sine,
    /// `cos(parameter * x)`.
    Cosine,
    /// `exp(parameter * x)`.
    Exponential,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    pub kind: TermKind,
    pub amplitude: f64,
    pub parameter: f64,
}

impl Term {
    pub fn new(kind: TermKind, amplitude: f64, parameter: f64) -> Self {
        Self {
            kind,
            amplitude,
            parameter,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.amplitude * self.factor(x)
    }

    /// The term shape without the amplitude.
    fn factor(&self, x: f64) -> f64 {
        match self.kind {
            TermKind::Constant => 1.0,
            TermKind::Monomial => math::powi(x, self.parameter as u32),
            TermKind::Sine => math::sin(self.parameter * x),
            TermKind::Cosine => math::cos(self.parameter * x),
            TermKind::Exponential => math::exp(self.parameter * x),
        }
    }
}

/// A function of one variable: the sum of its terms. The empty list is the
/// zero function.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Function1 {
    pub terms: Vec<Term>,
}

impl Function1 {
    pub fn zero() -> Self {
        Self { terms: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        if c == 0.0 {
            return Self::zero();
        }
        Self {
            terms: alloc::vec![Term::new(TermKind::Constant, c, 0.0)],
        }
    }

    pub fn single(kind: TermKind, amplitude: f64, parameter: f64) -> Self {
        Self {
            terms: alloc::vec![Term::new(kind, amplitude, parameter)],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty() || self.terms.iter().all(|t| t.amplitude == 0.0)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.terms.iter().map(|t| t.eval(x)).sum()
    }
}

/// One separable product term `amplitude * gx(x) * gy(y)` of a 2-D function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProductTerm {
    pub amplitude: f64,
    pub x_kind: TermKind,
    pub x_parameter: f64,
    pub y_kind: TermKind,
    pub y_parameter: f64,
}

impl ProductTerm {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let fx = Term::new(self.x_kind, 1.0, self.x_parameter).eval(x);
        let fy = Term::new(self.y_kind, 1.0, self.y_parameter).eval(y);
        self.amplitude * fx * fy
    }
}

/// A function of two variables: a sum of separable products.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Function2 {
    pub terms: Vec<ProductTerm>,
}

impl Function2 {
    pub fn zero() -> Self {
        Self { terms: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        if c == 0.0 {
            return Self::zero();
        }
        Self {
            terms: alloc::vec![ProductTerm {
                amplitude: c,
                x_kind: TermKind::Constant,
                x_parameter: 0.0,
                y_kind: TermKind::Constant,
                y_parameter: 0.0,
            }],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty() || self.terms.iter().all(|t| t.amplitude == 0.0)
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.terms.iter().map(|t| t.eval(x, y)).sum()
    }
}
