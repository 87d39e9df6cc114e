//! Truncated multivariate Taylor polynomials ("jets").
//!
//! A jet stores the Taylor coefficients of a function of `k` perturbation
//! variables `ε_i`, keeping monomials with exponent at most `orders[i]` in
//! each variable. Arithmetic is exact in the quotient ring, so mixed partial
//! derivatives of compositions of smooth functions come out analytically:
//! `∂^β f = β! · coefficient(β)`.

#[derive(Clone, Debug)]
pub struct Jet {
    orders: Vec<usize>,
    strides: Vec<usize>,
    coef: Vec<f64>,
}

impl Jet {
    pub fn constant(orders: &[usize], c: f64) -> Self {
        let mut strides = vec![1; orders.len()];
        let mut size = 1;
        for i in (0..orders.len()).rev() {
            strides[i] = size;
            size *= orders[i] + 1;
        }
        let mut coef = vec![0.0; size];
        coef[0] = c;
        Jet { orders: orders.to_vec(), strides, coef }
    }

    /// `value + ε_i`.
    pub fn variable(orders: &[usize], i: usize, value: f64) -> Self {
        let mut j = Self::constant(orders, value);
        if orders[i] > 0 {
            j.coef[j.strides[i]] = 1.0;
        }
        j
    }

    pub fn value(&self) -> f64 {
        self.coef[0]
    }

    fn exponents(&self, mut idx: usize) -> Vec<usize> {
        let mut e = vec![0; self.orders.len()];
        for (i, s) in self.strides.iter().enumerate() {
            e[i] = idx / s;
            idx %= s;
        }
        e
    }

    pub fn coefficient(&self, exps: &[usize]) -> f64 {
        if exps.iter().zip(&self.orders).any(|(e, o)| e > o) {
            return 0.0;
        }
        let idx: usize = exps.iter().zip(&self.strides).map(|(e, s)| e * s).sum();
        self.coef[idx]
    }

    /// Mixed partial derivative `∂^β` at the expansion point.
    pub fn derivative(&self, exps: &[usize]) -> f64 {
        let fact: f64 = exps.iter().map(|&e| (1..=e).product::<usize>() as f64).product();
        fact * self.coefficient(exps)
    }

    fn total_order(&self) -> usize {
        self.orders.iter().sum()
    }

    pub fn add(&self, o: &Jet) -> Jet {
        let mut r = self.clone();
        r.coef.iter_mut().zip(&o.coef).for_each(|(a, b)| *a += b);
        r
    }

    pub fn sub(&self, o: &Jet) -> Jet {
        let mut r = self.clone();
        r.coef.iter_mut().zip(&o.coef).for_each(|(a, b)| *a -= b);
        r
    }

    pub fn scale(&self, s: f64) -> Jet {
        let mut r = self.clone();
        r.coef.iter_mut().for_each(|a| *a *= s);
        r
    }

    pub fn add_const(&self, c: f64) -> Jet {
        let mut r = self.clone();
        r.coef[0] += c;
        r
    }

    pub fn mul(&self, o: &Jet) -> Jet {
        let n = self.coef.len();
        let exps: Vec<Vec<usize>> = (0..n).map(|i| self.exponents(i)).collect();
        let mut r = Jet::constant(&self.orders, 0.0);
        for (i, ei) in exps.iter().enumerate() {
            let a = self.coef[i];
            if a == 0.0 {
                continue;
            }
            'outer: for (j, ej) in exps.iter().enumerate() {
                let b = o.coef[j];
                if b == 0.0 {
                    continue;
                }
                let mut idx = 0;
                for d in 0..self.orders.len() {
                    let e = ei[d] + ej[d];
                    if e > self.orders[d] {
                        continue 'outer;
                    }
                    idx += e * self.strides[d];
                }
                r.coef[idx] += a * b;
            }
        }
        r
    }

    /// `φ(self)` given `derivs[k] = φ^{(k)}(self.value())` for `k = 0..=total order`.
    pub fn compose(&self, derivs: &[f64]) -> Jet {
        let d = self.total_order();
        let mut delta = self.clone();
        delta.coef[0] = 0.0;
        let mut fact = vec![1.0; d + 1];
        for k in 1..=d {
            fact[k] = fact[k - 1] * k as f64;
        }
        let deriv = |k: usize| derivs.get(k).copied().unwrap_or(0.0) / fact[k];
        let mut r = Jet::constant(&self.orders, deriv(d));
        for k in (0..d).rev() {
            r = r.mul(&delta).add_const(deriv(k));
        }
        r
    }

    pub fn sin(&self) -> Jet {
        let (s, c) = self.value().sin_cos();
        let d: Vec<f64> = (0..=self.total_order()).map(|k| [s, c, -s, -c][k % 4]).collect();
        self.compose(&d)
    }

    pub fn cos(&self) -> Jet {
        let (s, c) = self.value().sin_cos();
        let d: Vec<f64> = (0..=self.total_order()).map(|k| [c, -s, -c, s][k % 4]).collect();
        self.compose(&d)
    }

    pub fn exp(&self) -> Jet {
        let e = self.value().exp();
        self.compose(&vec![e; self.total_order() + 1])
    }

    /// `self^p` for real `p`; requires a positive value unless `p` is a
    /// non-negative integer.
    pub fn powf(&self, p: f64) -> Jet {
        let x = self.value();
        let mut d = Vec::with_capacity(self.total_order() + 1);
        let mut c = 1.0;
        for k in 0..=self.total_order() {
            d.push(if c == 0.0 { 0.0 } else { c * x.powf(p - k as f64) });
            c *= p - k as f64;
        }
        self.compose(&d)
    }

    pub fn sqrt(&self) -> Jet {
        self.powf(0.5)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mixed_partial_of_product() {
        // f(x, y) = sin(x) * exp(x y) at (0.3, 0.7); ∂x∂y f by hand.
        let o = [2, 1];
        let x = Jet::variable(&o, 0, 0.3);
        let y = Jet::variable(&o, 1, 0.7);
        let f = x.sin().mul(&x.mul(&y).exp());
        let (x0, y0): (f64, f64) = (0.3, 0.7);
        let e = (x0 * y0).exp();
        let fxy = x0.cos() * x0 * e + x0.sin() * (e + x0 * y0 * e);
        assert!((f.derivative(&[1, 1]) - fxy).abs() < 1e-13);
        let fxx = -x0.sin() * e + 2.0 * x0.cos() * y0 * e + x0.sin() * y0 * y0 * e;
        assert!((f.derivative(&[2, 0]) - fxx).abs() < 1e-13);
    }

    #[test]
    fn power_and_sqrt() {
        let o = [3];
        let x = Jet::variable(&o, 0, 2.0);
        let f = x.sqrt().powf(6.0); // x^3
        assert!((f.derivative(&[1]) - 12.0).abs() < 1e-12);
        assert!((f.derivative(&[2]) - 12.0).abs() < 1e-12);
        assert!((f.derivative(&[3]) - 6.0).abs() < 1e-11);
    }
}
