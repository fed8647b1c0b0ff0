//! Univariate rational polynomials, just enough for root bounds.

use alloc::vec::Vec;

use num_traits::{One, Signed, Zero};

use crate::linalg::{rat, Rational};

/// Coefficients in increasing degree, trailing zeros trimmed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly {
    coeffs: Vec<Rational>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn leading(&self) -> Option<&Rational> {
        self.coeffs.last()
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        self.coeffs.iter().rev().fold(Rational::zero(), |acc, c| acc * x + c)
    }

    /// Newton interpolation through `(x_k, y_k)`; the `x_k` must be distinct.
    pub fn interpolate(points: &[(Rational, Rational)]) -> Self {
        let n = points.len();
        let mut dd: Vec<Rational> = points.iter().map(|p| p.1.clone()).collect();
        for j in 1..n {
            for i in (j..n).rev() {
                dd[i] = (&dd[i] - &dd[i - 1]) / (&points[i].0 - &points[i - j].0);
            }
        }
        // Horner on the Newton form.
        let mut acc: Vec<Rational> = Vec::new();
        for i in (0..n).rev() {
            // acc = acc * (x - x_i) + dd[i]
            let mut next = alloc::vec![Rational::zero(); acc.len() + 1];
            for (k, a) in acc.iter().enumerate() {
                next[k + 1] += a;
                next[k] -= a * &points[i].0;
            }
            next[0] += &dd[i];
            acc = next;
        }
        Poly::new(acc)
    }

    /// Interpolates a polynomial of degree at most `degree` from its values
    /// at `0, 1, ..., degree`.
    pub fn from_samples(degree: usize, mut f: impl FnMut(&Rational) -> Rational) -> Self {
        let pts: Vec<(Rational, Rational)> = (0..=degree as i64)
            .map(|k| {
                let x = rat(k);
                let y = f(&x);
                (x, y)
            })
            .collect();
        Poly::interpolate(&pts)
    }

    /// Cauchy bound: every real root has absolute value below it.
    /// Constants (including zero) get bound `0`.
    pub fn root_bound(&self) -> Rational {
        match self.degree() {
            None | Some(0) => Rational::zero(),
            Some(_) => {
                let lead = self.leading().expect("nonzero").abs();
                let m = self.coeffs[..self.coeffs.len() - 1]
                    .iter()
                    .map(|c| c.abs() / &lead)
                    .fold(Rational::zero(), |a, b| if b > a { b } else { a });
                Rational::one() + m
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::frac;

    #[test]
    fn interpolation_recovers_cubic() {
        let p = Poly::new(alloc::vec![rat(1), frac(-1, 2), rat(0), rat(3)]);
        let q = Poly::from_samples(5, |x| p.eval(x));
        assert_eq!(p, q);
        assert_eq!(q.degree(), Some(3));
    }

    #[test]
    fn root_bound_dominates_roots() {
        // (x - 4)(x + 7) = x^2 + 3x - 28
        let p = Poly::new(alloc::vec![rat(-28), rat(3), rat(1)]);
        assert_eq!(p.root_bound(), rat(29));
        assert!(Poly::zero().is_zero());
        assert_eq!(Poly::new(alloc::vec![rat(0), rat(0)]).degree(), None);
    }
}
