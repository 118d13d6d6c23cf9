//! The multilinear extension `F(x) = E_{S ~ x}[f(S)]`, evaluated exactly.

use crate::dist::{Distribution, Marginals};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::setfn::SetFunction;

pub fn multilinear<T: Scalar>(f: &SetFunction<T>, x: &Marginals<T>) -> Result<T> {
    if x.n() != f.n() {
        return Err(Error::DimensionMismatch { expected: f.n(), got: x.n() });
    }
    Distribution::product(x).expect(f)
}

/// `∂F/∂x_i = F(x | x_i = 1) - F(x | x_i = 0)`.
pub fn partial_derivative<T: Scalar>(f: &SetFunction<T>, x: &Marginals<T>, i: usize) -> Result<T> {
    if x.n() != f.n() {
        return Err(Error::DimensionMismatch { expected: f.n(), got: x.n() });
    }
    f.ground().check_element(i)?;
    let hi = multilinear(f, &x.with(i, T::one()))?;
    let lo = multilinear(f, &x.with(i, T::zero()))?;
    Ok(hi - lo)
}

/// All partial derivatives, `2n` multilinear evaluations.
pub fn gradient<T: Scalar>(f: &SetFunction<T>, x: &Marginals<T>) -> Result<Vec<T>> {
    (0..f.n()).map(|i| partial_derivative(f, x, i)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{q, Rational};
    use crate::set;

    #[test]
    fn ncd_counterexample_value() {
        let f = SetFunction::<Rational>::capped_count(4, 0b1111, 2).unwrap();
        let x = Marginals::uniform(4, q(1, 2)).unwrap();
        assert_eq!(multilinear(&f, &x).unwrap(), q(13, 8));
    }

    #[test]
    fn relaxation_matches_at_indicators() {
        let f = SetFunction::<Rational>::from_fn(3, |s| q((s * s % 7) as i64, 3)).unwrap();
        for s in 0..8 {
            assert_eq!(multilinear(&f, &Marginals::indicator(3, s)).unwrap(), *f.value(s));
        }
    }

    #[test]
    fn linear_function_is_sum_of_marginals() {
        let f = SetFunction::<Rational>::cardinality(3).unwrap();
        let x = Marginals::new(vec![q(1, 7), q(2, 3), q(1, 2)]).unwrap();
        assert_eq!(multilinear(&f, &x).unwrap(), q(1, 7) + q(2, 3) + q(1, 2));
        for i in 0..3 {
            assert_eq!(partial_derivative(&f, &x, i).unwrap(), q(1, 1));
        }
    }

    #[test]
    fn derivative_examples() {
        let f = SetFunction::<Rational>::capped_count(2, 0b11, 1).unwrap();
        let x = Marginals::uniform(2, q(1, 2)).unwrap();
        assert_eq!(partial_derivative(&f, &x, 0).unwrap(), q(1, 2));
        let c = SetFunction::constant(2, q(5, 1)).unwrap();
        assert_eq!(partial_derivative(&c, &x, 1).unwrap(), q(0, 1));
        assert!(partial_derivative(&c, &x, 2).is_err());
        assert!(multilinear(&c, &Marginals::uniform(3, q(1, 2)).unwrap()).is_err());
    }

    #[test]
    fn derivative_matches_marginal_gain_formula() {
        // ∂_i F = Σ_{S ∌ i} Pr_{x_{-i}}[S] (f(S+i) - f(S))
        let f = SetFunction::<Rational>::coverage(&[0b011, 0b110, 0b101], &[q(1, 1), q(2, 1), q(5, 1)]).unwrap();
        let x = Marginals::new(vec![q(1, 3), q(1, 4), q(3, 5)]).unwrap();
        for i in 0..3 {
            let others = Distribution::product(&x.with(i, q(0, 1)));
            let direct: Rational = (0..8u32)
                .filter(|&s| !set::contains(s, i))
                .map(|s| others.prob(s).clone() * (f.value(s | 1 << i).clone() - f.value(s).clone()))
                .sum();
            assert_eq!(partial_derivative(&f, &x, i).unwrap(), direct);
        }
    }
}
