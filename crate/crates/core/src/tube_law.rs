//! Power-law tube law `phi(a) = a^m - a^n` and its antiderivatives.

use crate::error::{Error, Result};

/// Tube law exponents with `m > 0` and `-2 < n <= 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TubeLaw {
    m: f64,
    n: f64,
    pm: Power,
    pn: Power,
}

/// `a^e` specialised on the exponent: integer and half-integer exponents avoid `powf`.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Power {
    Int(i32),
    HalfInt(i32),
    General(f64),
}

/// Binary exponentiation; `powi` lowers to an out-of-line libcall.
#[inline]
fn ipow(a: f64, k: i32) -> f64 {
    let mut e = k.unsigned_abs();
    let (mut base, mut acc) = (a, 1.0);
    while e > 0 {
        if e & 1 == 1 {
            acc *= base;
        }
        base *= base;
        e >>= 1;
    }
    if k < 0 {
        1.0 / acc
    } else {
        acc
    }
}

impl Power {
    fn new(e: f64) -> Self {
        if e.fract() == 0.0 && e.abs() < 64.0 {
            Power::Int(e as i32)
        } else if (e - 0.5).fract() == 0.0 && e.abs() < 64.0 {
            Power::HalfInt((e - 0.5) as i32)
        } else {
            Power::General(e)
        }
    }

    #[inline]
    fn eval(self, a: f64) -> f64 {
        match self {
            Power::Int(0) => 1.0,
            Power::Int(k) => ipow(a, k),
            Power::HalfInt(k) => ipow(a, k) * a.sqrt(),
            Power::General(e) => a.powf(e),
        }
    }
}

/// Everything the scheme needs from the tube law at one dimensionless area.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TubeLawValues {
    pub phi: f64,
    pub dphi: f64,
    pub d2phi: f64,
    /// `Phi(a) = a^(m+1)/(m+1) - a^(n+1)/(n+1)`.
    pub big_phi: f64,
    /// `Phi~(a) = m a^(m+1)/(m+1) - n a^(n+1)/(n+1)`.
    pub big_phi_tilde: f64,
}

impl TubeLaw {
    pub fn new(m: f64, n: f64) -> Result<Self> {
        if !(m.is_finite() && n.is_finite()) || m <= 0.0 || n <= -2.0 || n > 0.0 {
            return Err(Error::InvalidTubeLaw { m, n });
        }
        Ok(Self { m, n, pm: Power::new(m), pn: Power::new(n) })
    }

    /// Arterial law `m = 1/2, n = 0`.
    pub fn arterial() -> Self {
        Self { m: 0.5, n: 0.0, pm: Power::HalfInt(0), pn: Power::Int(0) }
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn n(&self) -> f64 {
        self.n
    }

    /// Returns `(a^m, a^n)`, using cheap paths for the common exponents.
    #[inline]
    pub fn powers(&self, a: f64) -> (f64, f64) {
        (self.pm.eval(a), self.pn.eval(a))
    }

    #[inline]
    pub fn phi(&self, a: f64) -> f64 {
        let (am, an) = self.powers(a);
        am - an
    }

    #[inline]
    pub fn dphi(&self, a: f64) -> f64 {
        let (am, an) = self.powers(a);
        (self.m * am - self.n * an) / a
    }

    /// `a * phi'(a)`, which stays finite and positive for every `a > 0`.
    #[inline]
    pub fn a_dphi(&self, a: f64) -> f64 {
        let (am, an) = self.powers(a);
        self.m * am - self.n * an
    }

    pub fn eval(&self, a: f64) -> TubeLawValues {
        let (m, n) = (self.m, self.n);
        let (am, an) = self.powers(a);
        let inv = 1.0 / a;
        TubeLawValues {
            phi: am - an,
            dphi: (m * am - n * an) * inv,
            d2phi: (m * (m - 1.0) * am - n * (n - 1.0) * an) * inv * inv,
            big_phi: a * (am / (m + 1.0) - an / (n + 1.0)),
            big_phi_tilde: a * (m * am / (m + 1.0) - n * an / (n + 1.0)),
        }
    }

    /// `Phi(a)`, the antiderivative of `phi` vanishing at zero.
    pub fn big_phi(&self, a: f64) -> f64 {
        self.eval(a).big_phi
    }

    /// `Phi~(a)`, the antiderivative of `a phi'(a)` vanishing at zero.
    pub fn big_phi_tilde(&self, a: f64) -> f64 {
        self.eval(a).big_phi_tilde
    }
}
