//! First-order jets `(value, d/dt)` for exact total time derivatives of
//! quantities evaluated along the front `x = phi(t)`.

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub v: f64,
    pub d: f64,
}

impl Jet {
    pub const fn new(v: f64, d: f64) -> Self {
        Jet { v, d }
    }

    pub const fn constant(v: f64) -> Self {
        Jet { v, d: 0.0 }
    }

    pub fn scale(self, c: f64) -> Self {
        Jet::new(self.v * c, self.d * c)
    }

    pub fn powi(self, n: i32) -> Self {
        Jet::new(self.v.powi(n), n as f64 * self.v.powi(n - 1) * self.d)
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        Jet::new(self.v + o.v, self.d + o.d)
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        Jet::new(self.v - o.v, self.d - o.d)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        Jet::new(self.v * o.v, self.d * o.v + self.v * o.d)
    }
}

impl Div for Jet {
    type Output = Jet;
    fn div(self, o: Jet) -> Jet {
        Jet::new(self.v / o.v, (self.d * o.v - self.v * o.d) / (o.v * o.v))
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet::new(-self.v, -self.d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quotient_rule() {
        // f = t^2 / (1 + t) at t = 2: f' = (2t(1+t) - t^2) / (1+t)^2 = 8/9
        let t = Jet::new(2.0, 1.0);
        let f = t.powi(2) / (Jet::constant(1.0) + t);
        assert!((f.v - 4.0 / 3.0).abs() < 1e-15);
        assert!((f.d - 8.0 / 9.0).abs() < 1e-15);
    }
}
