//! Second-order truncated Taylor arithmetic.
//!
//! A [`Jet2`] carries a value together with its exact gradient and Hessian
//! with respect to a fixed, ordered list of independent variables. Every
//! operation propagates all three through the chain rule. Hessians are built
//! by filling the upper triangle and mirroring, so they are symmetric
//! bit-for-bit.

#![allow(clippy::suspicious_arithmetic_impl)]

use std::ops::{Add, Mul, Neg, Sub};

#[derive(Debug, Clone, PartialEq)]
pub struct Jet2 {
    pub value: f64,
    pub gradient: Vec<f64>,
    /// Row-major `n x n`.
    hessian: Vec<f64>,
}

impl Jet2 {
    pub fn constant(value: f64, n: usize) -> Jet2 {
        Jet2 {
            value,
            gradient: vec![0.0; n],
            hessian: vec![0.0; n * n],
        }
    }

    /// The independent variable with index `index` out of `n`.
    pub fn variable(value: f64, index: usize, n: usize) -> Jet2 {
        let mut j = Jet2::constant(value, n);
        j.gradient[index] = 1.0;
        j
    }

    pub fn dim(&self) -> usize {
        self.gradient.len()
    }

    pub fn hessian(&self, i: usize, j: usize) -> f64 {
        self.hessian[i * self.dim() + j]
    }

    pub fn hessian_rows(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        (0..n).map(|i| self.hessian[i * n..(i + 1) * n].to_vec()).collect()
    }

    pub fn is_constant(&self) -> bool {
        self.gradient.iter().all(|g| *g == 0.0) && self.hessian.iter().all(|h| *h == 0.0)
    }

    fn build(value: f64, gradient: Vec<f64>, mut upper: impl FnMut(usize, usize) -> f64) -> Jet2 {
        let n = gradient.len();
        let mut hessian = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let h = upper(i, j);
                hessian[i * n + j] = h;
                hessian[j * n + i] = h;
            }
        }
        Jet2 {
            value,
            gradient,
            hessian,
        }
    }

    /// Composes with a scalar function given its value and first two
    /// derivatives at `self.value`.
    pub fn compose(&self, value: f64, d1: f64, d2: f64) -> Jet2 {
        let g = &self.gradient;
        let n = self.dim();
        Jet2::build(value, g.iter().map(|gi| d1 * gi).collect(), |i, j| {
            d1 * self.hessian[i * n + j] + d2 * g[i] * g[j]
        })
    }

    pub fn scale(&self, k: f64) -> Jet2 {
        self.compose(k * self.value, k, 0.0)
    }

    pub fn recip(&self) -> Jet2 {
        let v = self.value;
        self.compose(1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v))
    }

    pub fn sin(&self) -> Jet2 {
        let (s, c) = (self.value.sin(), self.value.cos());
        self.compose(s, c, -s)
    }

    pub fn cos(&self) -> Jet2 {
        let (s, c) = (self.value.sin(), self.value.cos());
        self.compose(c, -s, -c)
    }

    pub fn exp(&self) -> Jet2 {
        let e = self.value.exp();
        self.compose(e, e, e)
    }

    /// Natural log; caller guarantees a positive value.
    pub fn ln(&self) -> Jet2 {
        let v = self.value;
        self.compose(v.ln(), 1.0 / v, -1.0 / (v * v))
    }

    /// Square root; caller guarantees a positive value.
    pub fn sqrt(&self) -> Jet2 {
        let s = self.value.sqrt();
        self.compose(s, 0.5 / s, -0.25 / (s * self.value))
    }

    /// `self^c` for a constant exponent. Integer exponents use `powi` so that
    /// negative bases are allowed.
    pub fn powf_const(&self, c: f64) -> Jet2 {
        let x = self.value;
        if c == 0.0 {
            return Jet2::constant(1.0, self.dim());
        }
        if c == 1.0 {
            return self.clone();
        }
        if let Some(k) = integer_exponent(c) {
            return self.compose(x.powi(k), c * x.powi(k - 1), c * (c - 1.0) * x.powi(k - 2));
        }
        self.compose(x.powf(c), c * x.powf(c - 1.0), c * (c - 1.0) * x.powf(c - 2.0))
    }
}

pub(crate) fn integer_exponent(c: f64) -> Option<i32> {
    (c.fract() == 0.0 && c.abs() < 1024.0).then_some(c as i32)
}

impl Add for &Jet2 {
    type Output = Jet2;
    fn add(self, rhs: &Jet2) -> Jet2 {
        let n = self.dim();
        Jet2::build(
            self.value + rhs.value,
            self.gradient
                .iter()
                .zip(&rhs.gradient)
                .map(|(a, b)| a + b)
                .collect(),
            |i, j| self.hessian[i * n + j] + rhs.hessian[i * n + j],
        )
    }
}

impl Sub for &Jet2 {
    type Output = Jet2;
    fn sub(self, rhs: &Jet2) -> Jet2 {
        let n = self.dim();
        Jet2::build(
            self.value - rhs.value,
            self.gradient
                .iter()
                .zip(&rhs.gradient)
                .map(|(a, b)| a - b)
                .collect(),
            |i, j| self.hessian[i * n + j] - rhs.hessian[i * n + j],
        )
    }
}

impl Mul for &Jet2 {
    type Output = Jet2;
    fn mul(self, rhs: &Jet2) -> Jet2 {
        let n = self.dim();
        let (a, b) = (self.value, rhs.value);
        let (ga, gb) = (&self.gradient, &rhs.gradient);
        Jet2::build(
            a * b,
            ga.iter().zip(gb).map(|(x, y)| a * y + b * x).collect(),
            |i, j| {
                a * rhs.hessian[i * n + j]
                    + b * self.hessian[i * n + j]
                    + (ga[i] * gb[j] + ga[j] * gb[i])
            },
        )
    }
}

impl Neg for &Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        Jet2 {
            value: -self.value,
            gradient: self.gradient.iter().map(|g| -g).collect(),
            hessian: self.hessian.iter().map(|h| -h).collect(),
        }
    }
}
