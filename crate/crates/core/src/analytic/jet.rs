//! Scaled derivative jets.
//!
//! A jet of `F` at `s` stores `c_k = (-s)^k / k! * F^(k)(s)` for
//! `k < order`, i.e. the Taylor coefficients of `e -> F(s (1 - e))`.
//! Products of functions become truncated Cauchy products of jets, and
//! the coverage term `sum_{k<m} (-s)^k/k! L^(k)(s)` is just the jet sum.
//! For every factor that appears here (`(1 + s a)^-m` with `a >= 0`,
//! `e^{-s N0}`) all coefficients are non-negative, so no cancellation
//! occurs.

/// Highest supported derivative count (Nakagami `m`).
pub const MAX_ORDER: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    coeffs: [f64; MAX_ORDER],
    order: usize,
}

impl Jet {
    pub fn constant(value: f64, order: usize) -> Self {
        assert!((1..=MAX_ORDER).contains(&order));
        let mut coeffs = [0.0; MAX_ORDER];
        coeffs[0] = value;
        Jet { coeffs, order }
    }

    pub fn one(order: usize) -> Self {
        Jet::constant(1.0, order)
    }

    pub fn from_coeffs(c: &[f64]) -> Self {
        assert!((1..=MAX_ORDER).contains(&c.len()));
        let mut coeffs = [0.0; MAX_ORDER];
        coeffs[..c.len()].copy_from_slice(c);
        Jet {
            coeffs,
            order: c.len(),
        }
    }

    /// Jet of `e^{-s n0}`: `e^{-s n0} (s n0)^k / k!`.
    pub fn noise(s: f64, n0: f64, order: usize) -> Self {
        let x = s * n0;
        let mut coeffs = [0.0; MAX_ORDER];
        let mut term = (-x).exp();
        for (k, c) in coeffs.iter_mut().enumerate().take(order) {
            if k > 0 {
                term *= x / k as f64;
            }
            *c = term;
        }
        Jet { coeffs, order }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs[..self.order]
    }

    /// `sum_k c_k`.
    pub fn sum(&self) -> f64 {
        self.coeffs().iter().sum()
    }

    pub fn mul(&self, other: &Jet) -> Jet {
        debug_assert_eq!(self.order, other.order);
        let mut coeffs = [0.0; MAX_ORDER];
        for k in 0..self.order {
            let mut acc = 0.0;
            for i in 0..=k {
                acc += self.coeffs[i] * other.coeffs[k - i];
            }
            coeffs[k] = acc;
        }
        Jet {
            coeffs,
            order: self.order,
        }
    }

    pub fn powu(&self, mut n: u32) -> Jet {
        let mut base = *self;
        let mut acc = Jet::one(self.order);
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }
}

/// `C(m + k - 1, k)`, the jet coefficient weights of `(1 + s a)^-m`.
pub(crate) fn rising_binomial(m: u32, k: usize) -> f64 {
    let mut c = 1.0;
    for i in 0..k {
        c *= (m as f64 + i as f64) / (i as f64 + 1.0);
    }
    c
}
