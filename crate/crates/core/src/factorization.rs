//! Inner–outer factorization for transfer functions whose inner factor is a
//! pure temporal delay `lambda^d`.

use crate::bivariate::{BiSeries, SupportBox};
use crate::error::{Error, Result};
use crate::rational::{self, RationalTransfer, DEFAULT_GRID, DEFAULT_MARGIN};
use crate::scalar::Scalar;

/// `T2 = lambda^delay * outer` with `outer` causally invertible.
#[derive(Debug, Clone, PartialEq)]
pub struct InnerOuter<T> {
    pub delay: usize,
    pub outer: RationalTransfer<T>,
}

impl<T: Scalar> InnerOuter<T> {
    /// The inner factor `lambda^delay` as a series.
    pub fn inner(&self) -> BiSeries<T> {
        BiSeries::monomial(0, self.delay as i64, T::one())
    }

    /// `lambda^delay * outer`.
    pub fn reconstruct(&self) -> RationalTransfer<T> {
        RationalTransfer::new(self.outer.num().shift_temporal(self.delay as i64), self.outer.den().clone())
            .expect("outer is normalized")
    }

    /// `1 / outer` as a rational (denominator and numerator swapped).
    pub fn outer_inverse(&self) -> RationalTransfer<T> {
        RationalTransfer::new(self.outer.den().clone(), self.outer.num().clone()).expect("outer lead is scalar")
    }
}

/// Factors `t2` with the default probe grid and margin.
pub fn inner_outer<T: Scalar>(t2: &RationalTransfer<T>) -> Result<InnerOuter<T>> {
    inner_outer_with(t2, DEFAULT_GRID, T::lit(DEFAULT_MARGIN))
}

/// Extracts the largest `lambda^d` dividing the numerator and checks that
/// what remains is an outer, cone-causal function.
pub fn inner_outer_with<T: Scalar>(t2: &RationalTransfer<T>, grid_n: usize, margin: T) -> Result<InnerOuter<T>> {
    let Some(d) = t2.num().lambda_valuation() else {
        return Err(Error::UnsupportedInnerStructure("T2 is identically zero".into()));
    };
    let deflated = t2.num().shift_temporal(-d);
    match deflated.scalar_lead(T::small()) {
        Ok(_) => {}
        Err(Error::NonScalarLeadingTerm { i }) => {
            return Err(Error::UnsupportedInnerStructure(format!(
                "after removing lambda^{d} the leading slice depends on z (nonzero z^{i} term)"
            )))
        }
        Err(e) => return Err(e),
    }
    let outer = RationalTransfer::new(deflated, t2.den().clone())?;
    let tol = T::lit(1e-12) * outer.num().max_abs().max(T::one());
    for part in [outer.num(), outer.den()] {
        if let Some((i, t, v)) = part.cone_violation(tol) {
            return Err(Error::UnsupportedInnerStructure(format!(
                "outer factor is not cone causal: coefficient {:e} at (i={i}, t={t})",
                v.to_f64().unwrap_or(f64::NAN)
            )));
        }
    }
    for (name, part) in [("numerator", outer.num()), ("denominator", outer.den())] {
        if let Some((m, theta)) = rational::min_root_magnitude(part, grid_n) {
            if m <= T::one() + margin {
                return Err(Error::UnsupportedInnerStructure(format!(
                    "outer {name} has a lambda-root of magnitude {:.6} at theta = {:.6}",
                    m.to_f64().unwrap_or(f64::NAN),
                    theta.to_f64().unwrap_or(f64::NAN)
                )));
            }
        }
    }
    Ok(InnerOuter { delay: d as usize, outer })
}

/// `lambda^{-d} T1` expanded on `[-s, s] x [-t_neg, t_pos]`; on the unit
/// circle this is the adjoint of the inner factor applied to `T1`.
pub fn apply_inner_adjoint<T: Scalar>(
    t1: &RationalTransfer<T>,
    d: usize,
    s: i64,
    t_neg: i64,
    t_pos: i64,
) -> Result<BiSeries<T>> {
    let d = d as i64;
    let expanded = t1.expand(s, t_pos + d)?;
    Ok(expanded.shift_temporal(-d).reshape(SupportBox::symmetric(s, -t_neg.max(0), t_pos)))
}
