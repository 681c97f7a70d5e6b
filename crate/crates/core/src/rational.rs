//! Rational spatio-temporal transfer functions `N(z, lambda) / D(z, lambda)`.

use num_complex::Complex;

use crate::bivariate::{BiSeries, SupportBox};
use crate::error::{Error, Result};
use crate::roots::poly_roots;
use crate::scalar::Scalar;

/// Default number of points on the spatial unit circle used by the
/// root probes.
pub const DEFAULT_GRID: usize = 512;
/// Default margin by which root magnitudes must exceed one.
pub const DEFAULT_MARGIN: f64 = 1e-6;

/// `num / den` with both parts finite, temporally causal, and the `lambda^0`
/// slice of `den` equal to the scalar `1`.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalTransfer<T> {
    num: BiSeries<T>,
    den: BiSeries<T>,
}

impl<T: Scalar> RationalTransfer<T> {
    /// Normalizes so that the denominator's `lambda^0` term is `1`.
    pub fn new(num: BiSeries<T>, den: BiSeries<T>) -> Result<Self> {
        if let Some((i, t, _)) = num.iter().find(|&(_, t, v)| t < 0 && v != T::zero()) {
            return Err(Error::NotTemporallyCausal { i, t });
        }
        let d0 = den.scalar_lead(T::small())?;
        let inv = T::one() / d0;
        let mut den = den.scale(inv);
        // exact, so that normalizing twice is the identity
        den.set(0, 0, T::one())?;
        Ok(Self { num: num.scale(inv).trimmed(), den: den.trimmed() })
    }

    /// A finite series over the unit denominator.
    pub fn polynomial(p: BiSeries<T>) -> Result<Self> {
        Self::new(p, BiSeries::delta())
    }

    pub fn constant(c: T) -> Self {
        Self { num: BiSeries::constant(c).trimmed(), den: BiSeries::delta() }
    }

    pub fn zero() -> Self {
        Self::constant(T::zero())
    }

    pub fn num(&self) -> &BiSeries<T> {
        &self.num
    }

    pub fn den(&self) -> &BiSeries<T> {
        &self.den
    }

    /// True when the denominator is the constant one.
    pub fn is_polynomial(&self) -> bool {
        self.den.triples() == vec![(0, 0, T::one())]
    }

    /// Largest temporal degree of numerator and denominator.
    pub fn lambda_order(&self) -> i64 {
        self.num.lambda_degree().unwrap_or(0).max(self.den.lambda_degree().unwrap_or(0))
    }

    /// Causal expansion on `[-s, s] x [0, t_max]`, exact at every index of
    /// that box.
    pub fn expand(&self, s: i64, t_max: i64) -> Result<BiSeries<T>> {
        let out = SupportBox::symmetric(s, 0, t_max);
        if self.is_polynomial() {
            return Ok(self.num.reshape(out));
        }
        let reach = self.num.bbox().spatial_min.abs().max(self.num.bbox().spatial_max.abs());
        let inv = self.den.invert_causal(t_max, s + reach)?;
        Ok(self.num.mul(&inv, out))
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self::from_parts(&self.num * &other.num, &self.den * &other.den)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.combine(other, T::one())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.combine(other, -T::one())
    }

    pub fn neg(&self) -> Self {
        Self { num: self.num.scale(-T::one()), den: self.den.clone() }
    }

    pub fn scale(&self, c: T) -> Self {
        Self { num: self.num.scale(c).trimmed(), den: self.den.clone() }
    }

    fn combine(&self, other: &Self, sign: T) -> Self {
        if self.den == other.den {
            return Self::from_parts(self.num.add(&other.num.scale(sign)), self.den.clone());
        }
        let num = (&self.num * &other.den).add(&(&other.num * &self.den).scale(sign));
        Self::from_parts(num, &self.den * &other.den)
    }

    /// Cross-multiplied parts of two valid rationals always satisfy the
    /// invariants (leading denominator terms multiply to one).
    fn from_parts(num: BiSeries<T>, den: BiSeries<T>) -> Self {
        Self::new(num, den).expect("product of normalized denominators is normalized")
    }

    /// Cast to a different scalar type.
    pub fn cast<U: Scalar>(&self) -> RationalTransfer<U> {
        RationalTransfer { num: self.num.cast(), den: self.den.cast() }
    }
}

/// Root magnitudes of `d(e^{i theta}, lambda)` at one grid angle.
#[derive(Debug, Clone, PartialEq)]
pub struct CircleRoots<T> {
    pub theta: T,
    pub magnitudes: Vec<T>,
    /// The leading lambda-coefficient vanished at this angle, so some roots
    /// went to infinity and were dropped.
    pub degenerate: bool,
}

/// The lambda-polynomial coefficients of `d` evaluated at `z = e^{i theta}`.
pub fn lambda_coeffs_at<T: Scalar>(d: &BiSeries<T>, theta: T) -> Vec<Complex<T>> {
    let b = d.bbox();
    let hi = b.temporal_max.max(0);
    let zero = Complex::new(T::zero(), T::zero());
    let mut out = vec![zero; hi as usize + 1];
    for (i, t, v) in d.iter() {
        if v != T::zero() && t >= 0 {
            out[t as usize] += Complex::from_polar(v, T::lit(i as f64) * theta);
        }
    }
    out
}

/// For each of `grid_n` equispaced angles, the magnitudes of all
/// lambda-roots of `d(e^{i theta}, lambda)`.
pub fn lambda_roots_on_circle<T: Scalar>(d: &BiSeries<T>, grid_n: usize) -> Vec<CircleRoots<T>> {
    (0..grid_n)
        .map(|k| {
            let theta = T::lit(2.0) * T::PI() * T::lit(k as f64) / T::lit(grid_n as f64);
            let coeffs = lambda_coeffs_at(d, theta);
            let (roots, degenerate) = poly_roots(&coeffs, T::lit(1e-12));
            CircleRoots { theta, magnitudes: roots.iter().map(|r| r.norm()).collect(), degenerate }
        })
        .collect()
}

/// Smallest lambda-root magnitude of `d` over the grid (`None` when `d` has
/// no finite roots anywhere).
pub fn min_root_magnitude<T: Scalar>(d: &BiSeries<T>, grid_n: usize) -> Option<(T, T)> {
    lambda_roots_on_circle(d, grid_n)
        .into_iter()
        .flat_map(|c| c.magnitudes.into_iter().map(move |m| (c.theta, m)))
        .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal))
        .map(|(theta, m)| (m, theta))
}

/// Whether every lambda-root of `d` on the grid lies outside `|lambda| <= 1 + margin`.
pub fn roots_outside_disc<T: Scalar>(d: &BiSeries<T>, grid_n: usize, margin: T) -> bool {
    min_root_magnitude(d, grid_n).is_none_or(|(m, _)| m > T::one() + margin)
}

/// Numerical outer test: numerator has a nonzero scalar `lambda^0` term and
/// all roots of numerator and denominator lie outside the closed disc
/// enlarged by `margin`.
pub fn is_outer<T: Scalar>(r: &RationalTransfer<T>, grid_n: usize, margin: T) -> bool {
    r.num().scalar_lead(T::small()).is_ok()
        && roots_outside_disc(r.num(), grid_n, margin)
        && roots_outside_disc(r.den(), grid_n, margin)
}

/// Open-loop stability: all denominator roots outside the disc.
pub fn is_stable<T: Scalar>(r: &RationalTransfer<T>, grid_n: usize, margin: T) -> bool {
    roots_outside_disc(r.den(), grid_n, margin)
}
