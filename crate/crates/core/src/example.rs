//! The heat-equation style benchmark: plant `G = tau lambda / (1 - (gamma/2)(z^-1 + 2 alpha + z) lambda)`
//! and weight `W = lambda / (1 - (c/2)(z^-1 + 2a + z) lambda)`.

use crate::bivariate::BiSeries;
use crate::rational::RationalTransfer;
use crate::scalar::Scalar;
use crate::synthesis::Problem;

/// Parameters of the benchmark plant and weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RingExample<T> {
    pub tau: T,
    pub gamma: T,
    pub alpha: T,
    pub c: T,
    pub a: T,
}

impl<T: Scalar> Default for RingExample<T> {
    /// `tau = 1, gamma = 1/3, alpha = 1, c = 1/4, a = 1`.
    fn default() -> Self {
        Self { tau: T::one(), gamma: T::lit(1.0 / 3.0), alpha: T::one(), c: T::lit(0.25), a: T::one() }
    }
}

fn three_tap<T: Scalar>(half: T, centre: T) -> BiSeries<T> {
    // (half)(z^-1 + 2 centre + z)
    BiSeries::from_triples([(-1, 0, half), (0, 0, half * T::lit(2.0) * centre), (1, 0, half)])
}

fn first_order<T: Scalar>(gain: T, pole: &BiSeries<T>) -> RationalTransfer<T> {
    let den = &BiSeries::delta() - &pole.shift_temporal(1);
    RationalTransfer::new(BiSeries::monomial(0, 1, gain), den).expect("unit lead")
}

impl<T: Scalar> RingExample<T> {
    /// `rho(z) = (gamma/2)(z^-1 + 2 alpha + z)`.
    pub fn rho(&self) -> BiSeries<T> {
        three_tap(self.gamma / T::lit(2.0), self.alpha)
    }

    /// `r(z) = (c/2)(z^-1 + 2a + z)`.
    pub fn r(&self) -> BiSeries<T> {
        three_tap(self.c / T::lit(2.0), self.a)
    }

    pub fn g(&self) -> RationalTransfer<T> {
        first_order(self.tau, &self.rho())
    }

    pub fn w(&self) -> RationalTransfer<T> {
        first_order(T::one(), &self.r())
    }

    /// `T1 = W`.
    pub fn t1(&self) -> RationalTransfer<T> {
        self.w()
    }

    /// `T2 = G W`.
    pub fn t2(&self) -> RationalTransfer<T> {
        self.g().mul(&self.w())
    }

    pub fn problem(&self) -> Problem<T> {
        Problem::disturbance_attenuation(self.g(), self.w())
    }
}
