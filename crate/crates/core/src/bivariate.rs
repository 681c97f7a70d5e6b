//! Truncated bivariate series in a two-sided spatial variable `z` and a
//! temporal variable `lambda`.
//!
//! A [`BiSeries`] stores the coefficients `c(i, t)` of `sum c(i,t) z^i lambda^t`
//! on a dense rectangular [`SupportBox`]. Everything outside the box is zero.
//! Products and inverses of potentially infinite series take an explicit
//! output box; the doc comment of each operation states where the result is
//! exact.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Rectangular index window `[spatial_min, spatial_max] x [temporal_min, temporal_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SupportBox {
    pub spatial_min: i64,
    pub spatial_max: i64,
    pub temporal_min: i64,
    pub temporal_max: i64,
}

impl SupportBox {
    pub fn new(spatial_min: i64, spatial_max: i64, temporal_min: i64, temporal_max: i64) -> Result<Self> {
        if spatial_min > spatial_max || temporal_min > temporal_max {
            return Err(Error::InvalidBox(format!(
                "[{spatial_min}, {spatial_max}] x [{temporal_min}, {temporal_max}]"
            )));
        }
        Ok(Self { spatial_min, spatial_max, temporal_min, temporal_max })
    }

    /// `[-s, s] x [t_min, t_max]`; negative `s` is clamped to zero and an
    /// inverted temporal range collapses to `t_min`.
    pub fn symmetric(s: i64, t_min: i64, t_max: i64) -> Self {
        let s = s.max(0);
        Self { spatial_min: -s, spatial_max: s, temporal_min: t_min, temporal_max: t_max.max(t_min) }
    }

    /// The single point `(0, 0)`.
    pub fn origin() -> Self {
        Self { spatial_min: 0, spatial_max: 0, temporal_min: 0, temporal_max: 0 }
    }

    pub fn width(&self) -> usize {
        (self.spatial_max - self.spatial_min + 1) as usize
    }

    pub fn height(&self) -> usize {
        (self.temporal_max - self.temporal_min + 1) as usize
    }

    pub fn len(&self) -> usize {
        self.width() * self.height()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, i: i64, t: i64) -> bool {
        (self.spatial_min..=self.spatial_max).contains(&i) && (self.temporal_min..=self.temporal_max).contains(&t)
    }

    /// Smallest box containing both.
    pub fn hull(&self, other: &SupportBox) -> SupportBox {
        SupportBox {
            spatial_min: self.spatial_min.min(other.spatial_min),
            spatial_max: self.spatial_max.max(other.spatial_max),
            temporal_min: self.temporal_min.min(other.temporal_min),
            temporal_max: self.temporal_max.max(other.temporal_max),
        }
    }

    /// Minkowski sum: the support of a product.
    pub fn sum(&self, other: &SupportBox) -> SupportBox {
        SupportBox {
            spatial_min: self.spatial_min + other.spatial_min,
            spatial_max: self.spatial_max + other.spatial_max,
            temporal_min: self.temporal_min + other.temporal_min,
            temporal_max: self.temporal_max + other.temporal_max,
        }
    }

    pub fn shifted(&self, di: i64, dt: i64) -> SupportBox {
        SupportBox {
            spatial_min: self.spatial_min + di,
            spatial_max: self.spatial_max + di,
            temporal_min: self.temporal_min + dt,
            temporal_max: self.temporal_max + dt,
        }
    }
}

impl fmt::Display for SupportBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}] x [{}, {}]", self.spatial_min, self.spatial_max, self.temporal_min, self.temporal_max)
    }
}

/// Shape of a finite truncation of a cone-causal series.
///
/// `Rectangular` keeps `|i| <= S, t <= T`. `Triangular` keeps every term of
/// total temporal order `t <= T` (the `sum g_k(z) lambda^k` form) and, for
/// cone series, coincides with `|i| <= t <= T`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TruncationShape {
    Rectangular,
    Triangular,
}

/// Dense bivariate coefficient grid, row-major in `t`.
#[derive(Clone, PartialEq)]
pub struct BiSeries<T> {
    bbox: SupportBox,
    coeffs: Vec<T>,
}

impl<T: fmt::Debug> fmt::Debug for BiSeries<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<_> = self.coeffs.chunks(self.bbox.width().max(1)).collect();
        f.debug_struct("BiSeries").field("box", &self.bbox).field("rows", &rows).finish()
    }
}

impl<T: Scalar> BiSeries<T> {
    pub fn zeros(bbox: SupportBox) -> Self {
        Self { bbox, coeffs: vec![T::zero(); bbox.len()] }
    }

    /// The zero series on the origin box.
    pub fn zero() -> Self {
        Self::zeros(SupportBox::origin())
    }

    /// Unit impulse at `(0, 0)`.
    pub fn delta() -> Self {
        Self::constant(T::one())
    }

    pub fn constant(c: T) -> Self {
        Self::monomial(0, 0, c)
    }

    /// `c z^i lambda^t`.
    pub fn monomial(i: i64, t: i64, c: T) -> Self {
        Self { bbox: SupportBox { spatial_min: i, spatial_max: i, temporal_min: t, temporal_max: t }, coeffs: vec![c] }
    }

    pub fn from_fn(bbox: SupportBox, mut f: impl FnMut(i64, i64) -> T) -> Self {
        let mut coeffs = Vec::with_capacity(bbox.len());
        for t in bbox.temporal_min..=bbox.temporal_max {
            for i in bbox.spatial_min..=bbox.spatial_max {
                coeffs.push(f(i, t));
            }
        }
        Self { bbox, coeffs }
    }

    /// Builds a series from `(i, t, value)` triples; repeated indices add up.
    /// The box is the hull of the given indices (the origin box when empty).
    pub fn from_triples<I: IntoIterator<Item = (i64, i64, T)>>(terms: I) -> Self {
        let terms: Vec<_> = terms.into_iter().collect();
        let Some(&(i0, t0, _)) = terms.first() else {
            return Self::zero();
        };
        let bbox = terms.iter().fold(
            SupportBox { spatial_min: i0, spatial_max: i0, temporal_min: t0, temporal_max: t0 },
            |b, &(i, t, _)| b.hull(&SupportBox { spatial_min: i, spatial_max: i, temporal_min: t, temporal_max: t }),
        );
        let mut out = Self::zeros(bbox);
        for (i, t, v) in terms {
            let k = out.index(i, t);
            out.coeffs[k] += v;
        }
        out
    }

    /// Laurent polynomial in `z` placed at temporal power `t`; `coeffs[k]`
    /// multiplies `z^(i_min + k)`.
    pub fn z_laurent(i_min: i64, coeffs: &[T], t: i64) -> Self {
        if coeffs.is_empty() {
            return Self::zero();
        }
        let bbox = SupportBox { spatial_min: i_min, spatial_max: i_min + coeffs.len() as i64 - 1, temporal_min: t, temporal_max: t };
        Self { bbox, coeffs: coeffs.to_vec() }
    }

    pub fn bbox(&self) -> SupportBox {
        self.bbox
    }

    fn index(&self, i: i64, t: i64) -> usize {
        ((t - self.bbox.temporal_min) as usize) * self.bbox.width() + (i - self.bbox.spatial_min) as usize
    }

    /// Coefficient of `z^i lambda^t`; zero outside the box.
    pub fn coeff(&self, i: i64, t: i64) -> T {
        if self.bbox.contains(i, t) {
            self.coeffs[self.index(i, t)]
        } else {
            T::zero()
        }
    }

    pub fn set(&mut self, i: i64, t: i64, v: T) -> Result<()> {
        if !self.bbox.contains(i, t) {
            return Err(Error::IndexOutOfBox { index: i, min: self.bbox.spatial_min, max: self.bbox.spatial_max });
        }
        let k = self.index(i, t);
        self.coeffs[k] = v;
        Ok(())
    }

    /// Row of spatial coefficients at temporal power `t`, starting at
    /// `z^spatial_min`.
    pub fn lambda_slice(&self, t: i64) -> Option<&[T]> {
        if t < self.bbox.temporal_min || t > self.bbox.temporal_max {
            return None;
        }
        let w = self.bbox.width();
        let start = (t - self.bbox.temporal_min) as usize * w;
        Some(&self.coeffs[start..start + w])
    }

    fn row_mut(&mut self, t: i64) -> &mut [T] {
        let w = self.bbox.width();
        let start = (t - self.bbox.temporal_min) as usize * w;
        &mut self.coeffs[start..start + w]
    }

    /// Nonzero terms as `(i, t, value)`, ordered by `t` then `i`.
    pub fn triples(&self) -> Vec<(i64, i64, T)> {
        self.iter().filter(|&(_, _, v)| v != T::zero()).collect()
    }

    /// Every grid entry as `(i, t, value)`, ordered by `t` then `i`.
    pub fn iter(&self) -> impl Iterator<Item = (i64, i64, T)> + '_ {
        let b = self.bbox;
        let w = b.width();
        self.coeffs
            .iter()
            .enumerate()
            .map(move |(k, &v)| (b.spatial_min + (k % w) as i64, b.temporal_min + (k / w) as i64, v))
    }

    /// Copies the coefficients into `bbox`, dropping whatever falls outside.
    pub fn reshape(&self, bbox: SupportBox) -> Self {
        let mut out = Self::zeros(bbox);
        let t_lo = bbox.temporal_min.max(self.bbox.temporal_min);
        let t_hi = bbox.temporal_max.min(self.bbox.temporal_max);
        let i_lo = bbox.spatial_min.max(self.bbox.spatial_min);
        let i_hi = bbox.spatial_max.min(self.bbox.spatial_max);
        if i_lo > i_hi {
            return out;
        }
        for t in t_lo..=t_hi {
            let src = self.lambda_slice(t).expect("in range");
            let src = &src[(i_lo - self.bbox.spatial_min) as usize..=(i_hi - self.bbox.spatial_min) as usize];
            let dst_off = (i_lo - bbox.spatial_min) as usize;
            out.row_mut(t)[dst_off..dst_off + src.len()].copy_from_slice(src);
        }
        out
    }

    /// Shrinks the box to the support of the nonzero coefficients.
    pub fn trimmed(&self) -> Self {
        let mut nz = self.iter().filter(|&(_, _, v)| v != T::zero());
        let Some((i0, t0, _)) = nz.next() else {
            return Self::zero();
        };
        let b = nz.fold(
            SupportBox { spatial_min: i0, spatial_max: i0, temporal_min: t0, temporal_max: t0 },
            |b, (i, t, _)| b.hull(&SupportBox { spatial_min: i, spatial_max: i, temporal_min: t, temporal_max: t }),
        );
        self.reshape(b)
    }

    /// Applies a truncation of the given shape: `|i| <= s` and `t <= t_max`
    /// for rectangles, `t <= t_max` with the box clipped to `|i| <= t_max`
    /// for triangles (cone series have no mass outside `|i| <= t`).
    pub fn truncate(&self, s: i64, t_max: i64, shape: TruncationShape) -> Self {
        let t_min = self.bbox.temporal_min.min(t_max);
        match shape {
            TruncationShape::Rectangular => self.reshape(SupportBox::symmetric(s, t_min, t_max)),
            TruncationShape::Triangular => {
                let reach = t_max.max(0);
                let b = SupportBox::symmetric(reach, t_min, t_max);
                let mut out = self.reshape(b);
                for t in b.temporal_min..=b.temporal_max {
                    let row = out.row_mut(t);
                    for (k, v) in row.iter_mut().enumerate() {
                        let i = b.spatial_min + k as i64;
                        if i.abs() > t.max(0) && t >= 0 {
                            *v = T::zero();
                        }
                    }
                }
                out
            }
        }
    }

    pub fn scale(&self, c: T) -> Self {
        Self { bbox: self.bbox, coeffs: self.coeffs.iter().map(|&v| v * c).collect() }
    }

    /// Coefficient-wise sum over the hull of both boxes.
    pub fn add(&self, other: &Self) -> Self {
        self.combine(other, T::one())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.combine(other, -T::one())
    }

    fn combine(&self, other: &Self, sign: T) -> Self {
        let mut out = self.reshape(self.bbox.hull(&other.bbox));
        for t in other.bbox.temporal_min..=other.bbox.temporal_max {
            let src = other.lambda_slice(t).expect("in range");
            let off = (other.bbox.spatial_min - out.bbox.spatial_min) as usize;
            for (d, &s) in out.row_mut(t)[off..off + src.len()].iter_mut().zip(src) {
                *d += sign * s;
            }
        }
        out
    }

    /// Two-dimensional convolution restricted to `out_box`.
    ///
    /// Exact at every index of `out_box`: all contributing pairs come from
    /// the finite stored boxes of the operands.
    pub fn mul(&self, other: &Self, out_box: SupportBox) -> Self {
        let mut out = Self::zeros(out_box);
        for ta in self.bbox.temporal_min..=self.bbox.temporal_max {
            let row_a = self.lambda_slice(ta).expect("in range");
            if row_a.iter().all(|&v| v == T::zero()) {
                continue;
            }
            for tb in other.bbox.temporal_min..=other.bbox.temporal_max {
                let t = ta + tb;
                if t < out_box.temporal_min || t > out_box.temporal_max {
                    continue;
                }
                let row_b = other.lambda_slice(tb).expect("in range");
                conv_accumulate(
                    out.row_mut(t),
                    out_box.spatial_min,
                    row_a,
                    self.bbox.spatial_min,
                    row_b,
                    other.bbox.spatial_min,
                    T::one(),
                );
            }
        }
        out
    }

    /// Full product of two finite series (no truncation).
    pub fn mul_full(&self, other: &Self) -> Self {
        self.mul(other, self.bbox.sum(&other.bbox))
    }

    /// True when no nonzero coefficient sits at negative temporal power.
    pub fn is_temporally_causal(&self) -> bool {
        self.iter().all(|(_, t, v)| t >= 0 || v == T::zero())
    }

    /// Largest spatial distance `|i|` carrying a nonzero coefficient.
    pub fn spatial_reach(&self) -> i64 {
        self.iter().filter(|&(_, _, v)| v != T::zero()).map(|(i, _, _)| i.abs()).max().unwrap_or(0)
    }

    /// Highest temporal power with a nonzero coefficient, if any.
    pub fn lambda_degree(&self) -> Option<i64> {
        self.iter().filter(|&(_, _, v)| v != T::zero()).map(|(_, t, _)| t).max()
    }

    /// Lowest temporal power with a nonzero coefficient, if any.
    pub fn lambda_valuation(&self) -> Option<i64> {
        self.iter().filter(|&(_, _, v)| v != T::zero()).map(|(_, t, _)| t).min()
    }

    /// Checks the causal-inversion preconditions and returns the scalar
    /// `lambda^0` coefficient.
    pub fn scalar_lead(&self, tol: T) -> Result<T> {
        if let Some((i, t, _)) = self.iter().find(|&(_, t, v)| t < 0 && v != T::zero()) {
            return Err(Error::NotTemporallyCausal { i, t });
        }
        if let Some((i, _, _)) = self.iter().find(|&(i, t, v)| t == 0 && i != 0 && v.abs() > tol) {
            return Err(Error::NonScalarLeadingTerm { i });
        }
        let d0 = self.coeff(0, 0);
        if d0.abs() <= tol {
            return Err(Error::SingularLeadingTerm { value: d0.to_f64().unwrap_or(f64::NAN) });
        }
        Ok(d0)
    }

    /// Causal inverse on `[-s, s] x [0, t_max]` via
    /// `c_k = -d0^{-1} sum_{j=1..k} d_j c_{k-j}`.
    ///
    /// The recursion runs on a spatial window wide enough to hold every
    /// `c_k`, so the returned box is exact everywhere (not only near the
    /// centre).
    pub fn invert_causal(&self, t_max: i64, s: i64) -> Result<Self> {
        let d0 = self.scalar_lead(T::small())?;
        let t_max = t_max.max(0);
        // spatial speed per temporal step
        let mut speed = 0i64;
        for t in 1..=self.bbox.temporal_max {
            if let Some(row) = self.lambda_slice(t) {
                for (k, &v) in row.iter().enumerate() {
                    if v != T::zero() {
                        let i = self.bbox.spatial_min + k as i64;
                        speed = speed.max((i.abs() + t - 1) / t);
                    }
                }
            }
        }
        let half = (speed * t_max).max(s.max(0));
        let work = SupportBox::symmetric(half, 0, t_max);
        let mut c = Self::zeros(work);
        c.row_mut(0)[half as usize] = T::one() / d0;
        let inv_d0 = T::one() / d0;
        for k in 1..=t_max {
            let mut acc = vec![T::zero(); work.width()];
            for j in 1..=k.min(self.bbox.temporal_max) {
                let Some(dj) = self.lambda_slice(j) else { continue };
                let prev = c.lambda_slice(k - j).expect("in range");
                conv_accumulate(&mut acc, -half, dj, self.bbox.spatial_min, prev, -half, -inv_d0);
            }
            c.row_mut(k).copy_from_slice(&acc);
        }
        Ok(c.reshape(SupportBox::symmetric(s, 0, t_max)))
    }

    /// Sum of squared coefficients (the squared H2 / l2 norm).
    pub fn h2_norm_sq(&self) -> T {
        self.coeffs.iter().map(|&v| v * v).sum()
    }

    /// Terms with `t >= 0` (the orthogonal projection onto H2).
    pub fn causal_part(&self) -> Self {
        self.filter_temporal(|t| t >= 0)
    }

    /// Terms with `t < 0` (the H2-perp component).
    pub fn anticausal_part(&self) -> Self {
        self.filter_temporal(|t| t < 0)
    }

    fn filter_temporal(&self, keep: impl Fn(i64) -> bool) -> Self {
        let mut out = self.clone();
        for t in self.bbox.temporal_min..=self.bbox.temporal_max {
            if !keep(t) {
                out.row_mut(t).fill(T::zero());
            }
        }
        out
    }

    /// Multiplication by `lambda^d` (`d` may be negative).
    pub fn shift_temporal(&self, d: i64) -> Self {
        Self { bbox: self.bbox.shifted(0, d), coeffs: self.coeffs.clone() }
    }

    /// Multiplication by `z^d`.
    pub fn shift_spatial(&self, d: i64) -> Self {
        Self { bbox: self.bbox.shifted(d, 0), coeffs: self.coeffs.clone() }
    }

    /// First coefficient violating `t >= |i|` by more than `tol`.
    pub fn cone_violation(&self, tol: T) -> Option<(i64, i64, T)> {
        self.iter().find(|&(i, t, v)| t < i.abs() && v.abs() > tol)
    }

    /// True iff `|c(i,t)| <= tol` whenever `t < |i|`.
    pub fn is_cone_causal(&self, tol: T) -> bool {
        self.cone_violation(tol).is_none()
    }

    /// The lambda-series of coefficients at spatial index `i`.
    pub fn spatial_slice(&self, i: i64) -> Result<LambdaSeries<T>> {
        if i < self.bbox.spatial_min || i > self.bbox.spatial_max {
            return Err(Error::IndexOutOfBox { index: i, min: self.bbox.spatial_min, max: self.bbox.spatial_max });
        }
        let coeffs = (self.bbox.temporal_min..=self.bbox.temporal_max).map(|t| self.coeff(i, t)).collect();
        Ok(LambdaSeries::new(self.bbox.temporal_min, coeffs))
    }

    /// `G(e^{i theta}, e^{i w})`.
    pub fn torus_eval(&self, theta: T, w: T) -> Complex<T> {
        self.iter()
            .filter(|&(_, _, v)| v != T::zero())
            .map(|(i, t, v)| Complex::from_polar(v, T::lit(i as f64) * theta + T::lit(t as f64) * w))
            .fold(Complex::new(T::zero(), T::zero()), |acc, x| acc + x)
    }

    /// Largest coefficient magnitude.
    pub fn max_abs(&self) -> T {
        self.coeffs.iter().fold(T::zero(), |m, &v| m.max(v.abs()))
    }

    /// Largest coefficient difference over the union of both boxes.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.sub(other).max_abs()
    }

    /// Largest coefficient difference restricted to `region`.
    pub fn max_abs_diff_in(&self, other: &Self, region: SupportBox) -> T {
        self.reshape(region).sub(&other.reshape(region)).max_abs()
    }

    /// Converts the coefficient type.
    pub fn cast<U: Scalar>(&self) -> BiSeries<U> {
        BiSeries { bbox: self.bbox, coeffs: self.coeffs.iter().map(|&v| U::from(v).expect("finite")).collect() }
    }
}

/// `dst[i] += scale * sum_{ia + ib = i} a[ia] b[ib]`, clipped to the extent
/// of `dst`. Indices are absolute spatial powers offset by the `*_min`
/// arguments.
pub(crate) fn conv_accumulate<T: Scalar>(
    dst: &mut [T],
    dst_min: i64,
    a: &[T],
    a_min: i64,
    b: &[T],
    b_min: i64,
    scale: T,
) {
    let dst_max = dst_min + dst.len() as i64 - 1;
    let b_max = b_min + b.len() as i64 - 1;
    for (ka, &va) in a.iter().enumerate() {
        if va == T::zero() {
            continue;
        }
        let ia = a_min + ka as i64;
        let lo = b_min.max(dst_min - ia);
        let hi = b_max.min(dst_max - ia);
        if lo > hi {
            continue;
        }
        let sa = va * scale;
        let b_off = (lo - b_min) as usize;
        let d_off = (ia + lo - dst_min) as usize;
        let n = (hi - lo + 1) as usize;
        for (d, &vb) in dst[d_off..d_off + n].iter_mut().zip(&b[b_off..b_off + n]) {
            *d += sa * vb;
        }
    }
}

impl<T: Scalar> Add for &BiSeries<T> {
    type Output = BiSeries<T>;
    fn add(self, rhs: Self) -> BiSeries<T> {
        BiSeries::add(self, rhs)
    }
}

impl<T: Scalar> Sub for &BiSeries<T> {
    type Output = BiSeries<T>;
    fn sub(self, rhs: Self) -> BiSeries<T> {
        BiSeries::sub(self, rhs)
    }
}

impl<T: Scalar> Neg for &BiSeries<T> {
    type Output = BiSeries<T>;
    fn neg(self) -> BiSeries<T> {
        self.scale(-T::one())
    }
}

/// Untruncated product of two finite series.
impl<T: Scalar> Mul for &BiSeries<T> {
    type Output = BiSeries<T>;
    fn mul(self, rhs: Self) -> BiSeries<T> {
        self.mul_full(rhs)
    }
}

/// One-variable Laurent series in `lambda`: `sum c[t] lambda^t` for
/// `t` in `[temporal_min, temporal_min + len)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaSeries<T> {
    temporal_min: i64,
    coeffs: Vec<T>,
}

impl<T: Scalar> LambdaSeries<T> {
    pub fn new(temporal_min: i64, coeffs: Vec<T>) -> Self {
        Self { temporal_min, coeffs }
    }

    pub fn zero() -> Self {
        Self { temporal_min: 0, coeffs: Vec::new() }
    }

    pub fn temporal_min(&self) -> i64 {
        self.temporal_min
    }

    /// Last stored power; `temporal_min - 1` when empty.
    pub fn temporal_max(&self) -> i64 {
        self.temporal_min + self.coeffs.len() as i64 - 1
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn coeff(&self, t: i64) -> T {
        if t < self.temporal_min {
            return T::zero();
        }
        self.coeffs.get((t - self.temporal_min) as usize).copied().unwrap_or_else(T::zero)
    }

    /// Multiplication by `lambda^d`.
    pub fn shift(&self, d: i64) -> Self {
        Self { temporal_min: self.temporal_min + d, coeffs: self.coeffs.clone() }
    }

    /// Terms with `t >= 0`.
    pub fn causal_part(&self) -> Self {
        let lo = self.temporal_min.max(0);
        Self { temporal_min: lo, coeffs: (lo..=self.temporal_max()).map(|t| self.coeff(t)).collect() }
    }

    /// Terms with `t < 0`.
    pub fn anticausal_part(&self) -> Self {
        let hi = self.temporal_max().min(-1);
        Self {
            temporal_min: self.temporal_min,
            coeffs: (self.temporal_min..=hi).map(|t| self.coeff(t)).collect(),
        }
    }

    /// Keeps powers `t <= order`.
    pub fn truncate(&self, order: i64) -> Self {
        let hi = self.temporal_max().min(order);
        Self {
            temporal_min: self.temporal_min,
            coeffs: (self.temporal_min..=hi).map(|t| self.coeff(t)).collect(),
        }
    }

    pub fn norm_sq(&self) -> T {
        self.coeffs.iter().map(|&v| v * v).sum()
    }

    /// `(t, c[t])` pairs.
    pub fn iter(&self) -> impl Iterator<Item = (i64, T)> + '_ {
        self.coeffs.iter().enumerate().map(move |(k, &v)| (self.temporal_min + k as i64, v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn r() -> BiSeries<f64> {
        BiSeries::from_triples([(1, 0, 0.125), (0, 0, 0.25), (-1, 0, 0.125)])
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12
    }

    #[test]
    fn box_invariant() {
        assert!(SupportBox::new(1, 0, 0, 0).is_err());
        assert!(SupportBox::new(0, 0, 2, 1).is_err());
        assert_eq!(SupportBox::new(-1, 1, 0, 2).unwrap().len(), 9);
    }

    #[test]
    fn add_examples() {
        let a = r();
        assert_eq!(&a + &BiSeries::zero(), a);
        let s = &BiSeries::monomial(1, 1, 1.0) + &BiSeries::monomial(-1, 1, 1.0);
        assert_eq!(s.coeff(1, 1), 1.0);
        assert_eq!(s.coeff(-1, 1), 1.0);
        assert_eq!(s.coeff(0, 1), 0.0);
        let twice = &a + &a;
        assert_eq!(twice.triples(), vec![(-1, 0, 0.25), (0, 0, 0.5), (1, 0, 0.25)]);
    }

    #[test]
    fn mul_examples() {
        let rr = &r() * &r();
        let want = [(-2, 1.0 / 64.0), (-1, 1.0 / 16.0), (0, 3.0 / 32.0), (1, 1.0 / 16.0), (2, 1.0 / 64.0)];
        for (i, v) in want {
            assert!(close(rr.coeff(i, 0), v));
        }
        assert_eq!(&r() * &BiSeries::delta(), r());
        let p = &BiSeries::monomial(0, 2, 1.0) * &BiSeries::monomial(0, -1, 1.0);
        assert_eq!(p.triples(), vec![(0, 1, 1.0)]);
    }

    #[test]
    fn mul_respects_out_box() {
        let a = BiSeries::from_triples([(0, 0, 1.0), (1, 1, 2.0)]);
        let p = a.mul(&a, SupportBox::symmetric(1, 0, 1));
        assert_eq!(p.coeff(0, 0), 1.0);
        assert_eq!(p.coeff(1, 1), 4.0);
        assert_eq!(p.coeff(2, 2), 0.0);
    }

    #[test]
    fn invert_geometric() {
        // 1 - r lambda  ->  sum r^k lambda^k
        let d = &BiSeries::delta() - &r().shift_temporal(1);
        let inv = d.invert_causal(6, 8).unwrap();
        let mut rk = BiSeries::delta();
        for k in 0..=6 {
            for i in -8..=8 {
                assert!(close(inv.coeff(i, k), rk.coeff(i, 0)), "k={k} i={i}");
            }
            rk = &rk * &r();
        }
        let back = d.mul(&inv, SupportBox::symmetric(8, 0, 6));
        assert!(back.max_abs_diff(&BiSeries::delta()) <= 1e-15);
    }

    #[test]
    fn invert_delta_and_product() {
        assert_eq!(BiSeries::<f64>::delta().invert_causal(3, 2).unwrap().trimmed(), BiSeries::delta());
        let rho = BiSeries::from_triples([(1, 0, 1.0 / 6.0), (0, 0, 1.0 / 3.0), (-1, 0, 1.0 / 6.0)]);
        let f1 = &BiSeries::delta() - &rho.shift_temporal(1);
        let f2 = &BiSeries::delta() - &r().shift_temporal(1);
        // reciprocal of 1/((1-rho l)(1-r l)) is the product itself
        let prod = &f1 * &f2;
        let inv_of_inv = prod.invert_causal(4, 4).unwrap().invert_causal(4, 4).unwrap();
        assert!(inv_of_inv.max_abs_diff(&prod.reshape(SupportBox::symmetric(4, 0, 4))) <= 1e-14);
        let lead = (&rho + &r()).scale(-1.0);
        for i in -1..=1 {
            assert!(close(prod.coeff(i, 1), lead.coeff(i, 0)));
        }
    }

    #[test]
    fn invert_errors() {
        let bad = BiSeries::from_triples([(0, 0, 1.0), (1, 0, 0.5)]);
        assert_eq!(bad.invert_causal(2, 2), Err(Error::NonScalarLeadingTerm { i: 1 }));
        let sing = BiSeries::from_triples([(0, 0, 0.0), (0, 1, 1.0)]);
        assert!(matches!(sing.invert_causal(2, 2), Err(Error::SingularLeadingTerm { .. })));
        let anti = BiSeries::from_triples([(0, -1, 1.0), (0, 0, 1.0)]);
        assert!(matches!(anti.invert_causal(2, 2), Err(Error::NotTemporallyCausal { .. })));
    }

    #[test]
    fn norms() {
        assert_eq!(BiSeries::<f64>::delta().h2_norm_sq(), 1.0);
        assert!(close(r().h2_norm_sq(), 3.0 / 32.0));
        assert_eq!(BiSeries::monomial(0, -1, 1.0).h2_norm_sq(), 1.0);
    }

    #[test]
    fn split_examples() {
        let s = BiSeries::from_triples([(0, -1, 1.0), (0, 0, 0.25), (0, 1, 3.0 / 32.0)]);
        assert_eq!(s.anticausal_part().triples(), vec![(0, -1, 1.0)]);
        assert_eq!(s.causal_part().triples(), vec![(0, 0, 0.25), (0, 1, 3.0 / 32.0)]);
        assert_eq!(&s.causal_part() + &s.anticausal_part(), s);
        let causal = r().shift_temporal(2);
        assert_eq!(causal.anticausal_part().h2_norm_sq(), 0.0);
        assert_eq!(causal.causal_part(), causal);
    }

    #[test]
    fn shift_examples() {
        assert_eq!(BiSeries::<f64>::delta().shift_temporal(2).triples(), vec![(0, 2, 1.0)]);
        let a = r().shift_temporal(1);
        assert_eq!(a.shift_temporal(-3).shift_temporal(3), a);
    }

    #[test]
    fn cone_predicate() {
        assert!(BiSeries::<f64>::delta().is_cone_causal(0.0));
        assert!(!BiSeries::monomial(1, 0, 1.0).is_cone_causal(0.0));
        assert!(r().shift_temporal(1).is_cone_causal(0.0));
        assert_eq!(BiSeries::monomial(2, 1, 0.5).cone_violation(0.0), Some((2, 1, 0.5)));
    }

    #[test]
    fn slices() {
        let a = r().shift_temporal(1);
        let s0 = a.spatial_slice(0).unwrap();
        assert_eq!(s0.coeff(1), 0.25);
        assert!(matches!(a.spatial_slice(3), Err(Error::IndexOutOfBox { .. })));
        assert_eq!(BiSeries::<f64>::delta().spatial_slice(0).unwrap().coeff(0), 1.0);
    }

    #[test]
    fn torus() {
        let one = BiSeries::<f64>::delta().torus_eval(0.3, 1.1);
        assert!((one.re - 1.0).abs() < 1e-15 && one.im.abs() < 1e-15);
        assert!((r().torus_eval(0.0, 0.7).re - 0.5).abs() < 1e-15);
        let l2 = BiSeries::<f64>::monomial(0, 2, 1.0);
        for k in 0..10 {
            let v = l2.torus_eval(0.1 * k as f64, PI * k as f64 / 7.0);
            assert!((v.norm() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn triangular_truncation() {
        let a = BiSeries::from_fn(SupportBox::symmetric(3, 0, 3), |i, t| if t >= i.abs() { 1.0 } else { 0.0 });
        let tri = a.truncate(3, 2, TruncationShape::Triangular);
        assert_eq!(tri.triples().len(), 1 + 3 + 5);
        let rect = a.truncate(1, 3, TruncationShape::Rectangular);
        assert_eq!(rect.triples().len(), 1 + 3 + 3 + 3);
    }

    #[test]
    fn lambda_series_parts() {
        let s = LambdaSeries::new(-1, vec![1.0, 0.25, 3.0 / 32.0]);
        assert_eq!(s.anticausal_part().norm_sq(), 1.0);
        assert_eq!(s.causal_part().coeffs(), &[0.25, 3.0 / 32.0]);
        assert_eq!(s.truncate(0).coeffs(), &[1.0, 0.25]);
        assert_eq!(s.shift(1).temporal_min(), 0);
    }

    #[test]
    fn generic_over_f32() {
        let a = BiSeries::<f32>::from_triples([(1, 0, 0.125), (0, 0, 0.25), (-1, 0, 0.125)]);
        assert!(((&a * &a).coeff(0, 0) - 3.0 / 32.0).abs() < 1e-7);
        assert_eq!(r().cast::<f32>(), a);
    }
}
