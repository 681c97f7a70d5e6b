//! l-causal state-space realizations `D + lambda C(z) (I - lambda A(z))^{-1} B`
//! with `A(z)`, `C(z)` of z-degree at most one and constant `B`, `D`.
//!
//! Block operations (inverse, sum, product, positive-feedback
//! interconnection) keep every `A`, `C` entry inside `{z^-1, 1, z}` because
//! they only ever multiply a [`ZMatrix`] by constant matrices.

use num_complex::Complex;

use crate::bivariate::{BiSeries, SupportBox};
use crate::error::{Error, Result};
use crate::matrix::Mat;
use crate::rational::RationalTransfer;
use crate::roots::spectral_radius;
use crate::scalar::Scalar;

/// Condition number above which a D-matrix inverse is rejected.
const MAX_COND: f64 = 1e13;

/// `M(z) = minus z^-1 + zero + plus z`.
#[derive(Debug, Clone, PartialEq)]
pub struct ZMatrix<T> {
    pub minus: Mat<T>,
    pub zero: Mat<T>,
    pub plus: Mat<T>,
}

impl<T: Scalar> ZMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { minus: Mat::zeros(rows, cols), zero: Mat::zeros(rows, cols), plus: Mat::zeros(rows, cols) }
    }

    pub fn constant(m: Mat<T>) -> Self {
        let (r, c) = m.shape();
        Self { minus: Mat::zeros(r, c), zero: m, plus: Mat::zeros(r, c) }
    }

    /// Panics when the three shapes disagree.
    pub fn new(minus: Mat<T>, zero: Mat<T>, plus: Mat<T>) -> Self {
        assert!(minus.shape() == zero.shape() && zero.shape() == plus.shape(), "ZMatrix shapes disagree");
        Self { minus, zero, plus }
    }

    pub fn shape(&self) -> (usize, usize) {
        self.zero.shape()
    }

    pub fn terms(&self) -> [(i64, &Mat<T>); 3] {
        [(-1, &self.minus), (0, &self.zero), (1, &self.plus)]
    }

    fn map(&self, f: impl Fn(&Mat<T>) -> Mat<T>) -> Self {
        Self { minus: f(&self.minus), zero: f(&self.zero), plus: f(&self.plus) }
    }

    /// `m * self`.
    pub fn left_mul(&self, m: &Mat<T>) -> Self {
        self.map(|x| m.matmul(x))
    }

    /// `self * m`.
    pub fn right_mul(&self, m: &Mat<T>) -> Self {
        self.map(|x| x.matmul(m))
    }

    pub fn add(&self, rhs: &Self) -> Self {
        Self { minus: self.minus.add(&rhs.minus), zero: self.zero.add(&rhs.zero), plus: self.plus.add(&rhs.plus) }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.scale(-T::one()))
    }

    pub fn scale(&self, c: T) -> Self {
        self.map(|x| x.scale(c))
    }

    pub fn hcat(&self, rhs: &Self) -> Self {
        Self { minus: self.minus.hcat(&rhs.minus), zero: self.zero.hcat(&rhs.zero), plus: self.plus.hcat(&rhs.plus) }
    }

    pub fn block(a: &Self, b: &Self, c: &Self, d: &Self) -> Self {
        Self {
            minus: Mat::block(&a.minus, &b.minus, &c.minus, &d.minus),
            zero: Mat::block(&a.zero, &b.zero, &c.zero, &d.zero),
            plus: Mat::block(&a.plus, &b.plus, &c.plus, &d.plus),
        }
    }

    /// The Laurent coefficients `[z^-1, z^0, z^1]` of entry `(r, c)`.
    pub fn entry(&self, r: usize, c: usize) -> [T; 3] {
        [self.minus[(r, c)], self.zero[(r, c)], self.plus[(r, c)]]
    }

    pub fn set_entry(&mut self, r: usize, c: usize, coeffs: [T; 3]) {
        self.minus[(r, c)] = coeffs[0];
        self.zero[(r, c)] = coeffs[1];
        self.plus[(r, c)] = coeffs[2];
    }

    /// `M(e^{i theta})` row-major.
    pub fn eval(&self, theta: T) -> Vec<Complex<T>> {
        let (r, c) = self.shape();
        let zm = Complex::from_polar(T::one(), -theta);
        let zp = Complex::from_polar(T::one(), theta);
        let mut out = Vec::with_capacity(r * c);
        for i in 0..r {
            for j in 0..c {
                out.push(zm * self.minus[(i, j)] + Complex::new(self.zero[(i, j)], T::zero()) + zp * self.plus[(i, j)]);
            }
        }
        out
    }

    /// Nonzero entries as `(row, col, z-power, value)`.
    pub fn nonzeros(&self) -> Vec<(usize, usize, i64, T)> {
        self.terms().iter().flat_map(|&(p, m)| m.nonzeros().into_iter().map(move |(r, c, v)| (r, c, p, v))).collect()
    }

    pub fn cast<U: Scalar>(&self) -> ZMatrix<U> {
        ZMatrix { minus: self.minus.cast(), zero: self.zero.cast(), plus: self.plus.cast() }
    }
}

/// `(A(z), B, C(z), D)`; `B` and `D` are constant by type.
#[derive(Debug, Clone, PartialEq)]
pub struct LRealization<T> {
    pub a: ZMatrix<T>,
    pub b: Mat<T>,
    pub c: ZMatrix<T>,
    pub d: Mat<T>,
}

impl<T: Scalar> LRealization<T> {
    pub fn new(a: ZMatrix<T>, b: Mat<T>, c: ZMatrix<T>, d: Mat<T>) -> Result<Self> {
        let (n, n2) = a.shape();
        let (bn, p) = b.shape();
        let (q, cn) = c.shape();
        let (dq, dp) = d.shape();
        if n != n2 || bn != n || cn != n || dq != q || dp != p {
            return Err(Error::DimensionMismatch(format!(
                "A {n}x{n2}, B {bn}x{p}, C {q}x{cn}, D {dq}x{dp}"
            )));
        }
        Ok(Self { a, b, c, d })
    }

    /// Memoryless gain `D`.
    pub fn static_gain(d: Mat<T>) -> Self {
        let (q, p) = d.shape();
        Self { a: ZMatrix::zeros(0, 0), b: Mat::zeros(0, p), c: ZMatrix::zeros(q, 0), d }
    }

    /// Number of states (the temporal order).
    pub fn states(&self) -> usize {
        self.a.shape().0
    }

    pub fn inputs(&self) -> usize {
        self.b.cols()
    }

    pub fn outputs(&self) -> usize {
        self.c.shape().0
    }

    pub fn cast<U: Scalar>(&self) -> LRealization<U> {
        LRealization { a: self.a.cast(), b: self.b.cast(), c: self.c.cast(), d: self.d.cast() }
    }
}

fn invert_checked<T: Scalar>(m: &Mat<T>) -> Option<Mat<T>> {
    m.inverse().filter(|(_, cond)| *cond <= T::lit(MAX_COND)).map(|(inv, _)| inv)
}

/// Inverse system: `A - B D^-1 C(z)`, `-B D^-1`, `D^-1 C(z)`, `D^-1`.
pub fn ss_inverse<T: Scalar>(g: &LRealization<T>) -> Result<LRealization<T>> {
    let (q, p) = g.d.shape();
    if q != p {
        return Err(Error::DimensionMismatch(format!("D is {q}x{p}, not square")));
    }
    let dinv = match g.d.inverse() {
        Some((inv, cond)) if cond <= T::lit(MAX_COND) => inv,
        Some((_, cond)) => return Err(Error::SingularD { cond: cond.to_f64().unwrap_or(f64::INFINITY) }),
        None => return Err(Error::SingularD { cond: f64::INFINITY }),
    };
    let b_dinv = g.b.matmul(&dinv);
    LRealization::new(g.a.sub(&g.c.left_mul(&b_dinv)), b_dinv.scale(-T::one()), g.c.left_mul(&dinv), dinv)
}

/// Parallel connection `g1 + g2`.
pub fn ss_add<T: Scalar>(g1: &LRealization<T>, g2: &LRealization<T>) -> Result<LRealization<T>> {
    if g1.d.shape() != g2.d.shape() {
        return Err(Error::DimensionMismatch(format!("D shapes {:?} vs {:?}", g1.d.shape(), g2.d.shape())));
    }
    let (n1, n2) = (g1.states(), g2.states());
    let a = ZMatrix::block(&g1.a, &ZMatrix::zeros(n1, n2), &ZMatrix::zeros(n2, n1), &g2.a);
    LRealization::new(a, g1.b.vcat(&g2.b), g1.c.hcat(&g2.c), g1.d.add(&g2.d))
}

/// Series connection `g1 * g2` (`g2` acts first).
pub fn ss_mul<T: Scalar>(g1: &LRealization<T>, g2: &LRealization<T>) -> Result<LRealization<T>> {
    if g1.inputs() != g2.outputs() {
        return Err(Error::DimensionMismatch(format!(
            "g1 takes {} inputs, g2 gives {} outputs",
            g1.inputs(),
            g2.outputs()
        )));
    }
    let (n1, n2) = (g1.states(), g2.states());
    let a = ZMatrix::block(&g1.a, &g2.c.left_mul(&g1.b), &ZMatrix::zeros(n2, n1), &g2.a);
    let b = g1.b.matmul(&g2.d).vcat(&g2.b);
    let c = g1.c.hcat(&g2.c.left_mul(&g1.d));
    LRealization::new(a, b, c, g1.d.matmul(&g2.d))
}

/// Realization of a finite cone-causal polynomial.
///
/// One plain delay chain carries the `z^-1, 1, z` part of every lambda-slice
/// through `C(z)`; each spatial power `|j| >= 2` gets its own chain whose
/// first `|j| - 1` transitions shift by `z^{sign j}`. `expand_realization`
/// of the result reproduces `p` exactly.
pub fn realize_cone_polynomial<T: Scalar>(p: &BiSeries<T>) -> Result<LRealization<T>> {
    if let Some((i, t, v)) = p.cone_violation(T::zero()) {
        return Err(Error::NotCone { i, t, value: v.to_f64().unwrap_or(f64::NAN) });
    }
    let terms = p.triples();
    let d = Mat::scalar(p.coeff(0, 0));

    let centre_len = terms.iter().filter(|&&(i, t, _)| i.abs() <= 1 && t >= 1).map(|&(_, t, _)| t).max().unwrap_or(0);
    let mut far: Vec<i64> = terms.iter().filter(|&&(i, _, _)| i.abs() >= 2).map(|&(i, _, _)| i).collect();
    far.sort_unstable();
    far.dedup();
    let chain_len = |j: i64| terms.iter().filter(|&&(i, _, _)| i == j).map(|&(_, t, _)| t).max().unwrap_or(0);
    let n = centre_len as usize + far.iter().map(|&j| chain_len(j) as usize).sum::<usize>();

    let mut a = ZMatrix::zeros(n, n);
    let mut b = Mat::zeros(n, 1);
    let mut c = ZMatrix::zeros(1, n);

    // centre chain: state k holds lambda^(k+1) u
    for k in 0..centre_len as usize {
        if k > 0 {
            a.zero[(k, k - 1)] = T::one();
        }
        let t = k as i64 + 1;
        c.set_entry(0, k, [p.coeff(-1, t), p.coeff(0, t), p.coeff(1, t)]);
    }
    if centre_len > 0 {
        b[(0, 0)] = T::one();
    }

    let mut base = centre_len as usize;
    for &j in &far {
        let len = chain_len(j) as usize;
        let reach = j.unsigned_abs() as usize;
        b[(base, 0)] = T::one();
        for s in 1..len {
            // transition into state s: z-shift for the first |j| - 1 steps
            let shift = if s < reach { if j > 0 { &mut a.plus } else { &mut a.minus } } else { &mut a.zero };
            shift[(base + s, base + s - 1)] = T::one();
        }
        // state s holds lambda^(s+1) z^{sign(j) min(s, |j|-1)} u
        for s in (reach - 1)..len {
            let v = p.coeff(j, s as i64 + 1);
            if j > 0 {
                c.plus[(0, base + s)] = v;
            } else {
                c.minus[(0, base + s)] = v;
            }
        }
        base += len;
    }
    LRealization::new(a, b, c, d)
}

fn slice_fits_degree_one<T: Scalar>(s: &BiSeries<T>) -> bool {
    s.spatial_reach() <= 1
}

/// Realization of a rational whose numerator and denominator are cone
/// causal. Uses a controllable companion form when all its entries stay of
/// z-degree one, and `realize(num) * realize(den)^-1` otherwise.
pub fn realize_rational<T: Scalar>(r: &RationalTransfer<T>) -> Result<LRealization<T>> {
    for (name, part) in [("numerator", r.num()), ("denominator", r.den())] {
        if let Some((i, t, v)) = part.cone_violation(T::zero()) {
            return Err(Error::NotRealizableAsLCausal(format!(
                "{name} term {:e} z^{i} lambda^{t} violates t >= |i|",
                v.to_f64().unwrap_or(f64::NAN)
            )));
        }
    }
    if r.is_polynomial() {
        return realize_cone_polynomial(r.num());
    }
    let n = r.lambda_order() as usize;
    let n0 = r.num().coeff(0, 0);
    let slice = |s: &BiSeries<T>, k: i64| s.reshape(SupportBox::new(-1, 1, k, k).expect("valid")).trimmed();
    let mut companion_ok = true;
    let mut den_slices = Vec::with_capacity(n);
    let mut out_slices = Vec::with_capacity(n);
    for k in 1..=n as i64 {
        let dk = r.den().reshape(SupportBox::symmetric(r.den().spatial_reach(), k, k));
        let ck = r.num().reshape(SupportBox::symmetric(r.num().spatial_reach(), k, k)).sub(&dk.scale(n0));
        if !slice_fits_degree_one(&dk) || !slice_fits_degree_one(&ck) {
            companion_ok = false;
            break;
        }
        den_slices.push(slice(&dk, k));
        out_slices.push(slice(&ck, k));
    }
    if !companion_ok {
        let num = realize_cone_polynomial(r.num())?;
        let den = realize_cone_polynomial(r.den())?;
        return ss_mul(&num, &ss_inverse(&den)?);
    }
    let mut a = ZMatrix::zeros(n, n);
    let mut b = Mat::zeros(n, 1);
    let mut c = ZMatrix::zeros(1, n);
    if n > 0 {
        b[(0, 0)] = T::one();
    }
    for k in 0..n {
        let t = k as i64 + 1;
        let dk = &den_slices[k];
        a.set_entry(0, k, [-dk.coeff(-1, t), -dk.coeff(0, t), -dk.coeff(1, t)]);
        if k > 0 {
            a.zero[(k, k - 1)] = T::one();
        }
        let ck = &out_slices[k];
        c.set_entry(0, k, [ck.coeff(-1, t), ck.coeff(0, t), ck.coeff(1, t)]);
    }
    LRealization::new(a, b, c, Mat::scalar(n0))
}

/// Controller `K = -G3 (I - Gyu G3)^{-1}` as the positive-feedback
/// interconnection of `g3` and `gyu`.
///
/// With `E = (I - D3 D)^-1`, `F = (I - D D3)^-1`:
/// `A_k = [A3 + B3 D E C3, B3 F C; B E C3, A + B D3 F C]`,
/// `B_k = [-B3 F; -B D3 F]`, `C_k = [E C3, E D3 C]`, `D_k = -E D3`.
/// For scalar signals `E = F` and `E D3 = D3 E`.
pub fn feedback_realize_k<T: Scalar>(g3: &LRealization<T>, gyu: &LRealization<T>) -> Result<LRealization<T>> {
    let (p3, m3) = g3.d.shape();
    if gyu.d.shape() != (m3, p3) {
        return Err(Error::DimensionMismatch(format!(
            "G3 is {p3}x{m3} but Gyu is {:?}",
            gyu.d.shape()
        )));
    }
    let (a3, b3, c3, d3) = (&g3.a, &g3.b, &g3.c, &g3.d);
    let (a, b, c, d) = (&gyu.a, &gyu.b, &gyu.c, &gyu.d);
    let e = invert_checked(&Mat::identity(p3).sub(&d3.matmul(d))).ok_or(Error::AlgebraicLoop)?;
    let f = invert_checked(&Mat::identity(m3).sub(&d.matmul(d3))).ok_or(Error::AlgebraicLoop)?;

    let a11 = a3.add(&c3.left_mul(&b3.matmul(d).matmul(&e)));
    let a12 = c.left_mul(&b3.matmul(&f));
    let a21 = c3.left_mul(&b.matmul(&e));
    let a22 = a.add(&c.left_mul(&b.matmul(d3).matmul(&f)));
    let ak = ZMatrix::block(&a11, &a12, &a21, &a22);
    let bk = b3.matmul(&f).scale(-T::one()).vcat(&b.matmul(d3).matmul(&f).scale(-T::one()));
    let ck = c3.left_mul(&e).hcat(&c.left_mul(&e.matmul(d3)));
    let dk = e.matmul(d3).scale(-T::one());
    LRealization::new(ak, bk, ck, dk)
}

/// Laurent vector in z on a fixed window `[-half, half]`.
struct ZVec<T> {
    half: i64,
    rows: Vec<Vec<T>>,
}

impl<T: Scalar> ZVec<T> {
    fn apply(&self, m: &[(usize, usize, i64, T)], out_rows: usize) -> Self {
        let w = self.rows.first().map_or(0, |r| r.len());
        let mut rows = vec![vec![T::zero(); w]; out_rows];
        for &(r, c, p, v) in m {
            let src = &self.rows[c];
            let dst = &mut rows[r];
            // multiplying by z^p moves index i to i + p
            let (lo, hi) = if p >= 0 { (0, w - p as usize) } else { ((-p) as usize, w) };
            for k in lo..hi {
                let s = src[k];
                if s != T::zero() {
                    dst[(k as i64 + p) as usize] += v * s;
                }
            }
        }
        Self { half: self.half, rows }
    }
}

/// Impulse response of a single-input single-output realization on
/// `[-s, s] x [0, t_max]`: slice 0 is `D`, slice `k` is `C(z) A(z)^{k-1} B`.
/// Exact; the output is cone causal by construction.
pub fn expand_realization<T: Scalar>(g: &LRealization<T>, s: i64, t_max: i64) -> Result<BiSeries<T>> {
    if g.inputs() != 1 || g.outputs() != 1 {
        return Err(Error::DimensionMismatch(format!(
            "expand_realization needs a 1x1 system, got {}x{}",
            g.outputs(),
            g.inputs()
        )));
    }
    let out_box = SupportBox::symmetric(s, 0, t_max.max(0));
    let mut out = BiSeries::zeros(out_box);
    out.set(0, 0, g.d[(0, 0)]).expect("origin in box");
    let half = t_max.max(1);
    let w = (2 * half + 1) as usize;
    let n = g.states();
    let mut x = ZVec { half, rows: vec![vec![T::zero(); w]; n] };
    for r in 0..n {
        x.rows[r][half as usize] = g.b[(r, 0)];
    }
    let a_nz = g.a.nonzeros();
    let c_nz = g.c.nonzeros();
    for k in 1..=t_max {
        let y = x.apply(&c_nz, 1);
        for (idx, &v) in y.rows[0].iter().enumerate() {
            let i = idx as i64 - y.half;
            if v != T::zero() && i.abs() <= s {
                out.set(i, k, v).expect("inside box");
            }
        }
        if k < t_max {
            x = x.apply(&a_nz, n);
        }
    }
    Ok(out)
}

/// `max_theta` spectral radius of `A(e^{i theta})` over `grid_n` angles.
pub fn stability_probe<T: Scalar>(g: &LRealization<T>, grid_n: usize) -> T {
    let n = g.states();
    (0..grid_n.max(1))
        .map(|k| {
            let theta = T::lit(2.0) * T::PI() * T::lit(k as f64) / T::lit(grid_n.max(1) as f64);
            spectral_radius(&g.a.eval(theta), n)
        })
        .fold(T::zero(), |m, v| m.max(v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::example::RingExample;

    fn poly(terms: &[(i64, i64, f64)]) -> BiSeries<f64> {
        BiSeries::from_triples(terms.iter().copied())
    }

    fn assert_series_eq(a: &BiSeries<f64>, b: &BiSeries<f64>, tol: f64) {
        let d = a.max_abs_diff(b);
        assert!(d <= tol, "series differ by {d:e}\n{a:?}\n{b:?}");
    }

    #[test]
    fn identity_inverse() {
        let g = LRealization::static_gain(Mat::scalar(1.0));
        assert_eq!(ss_inverse(&g).unwrap(), g);
        let sing = LRealization::static_gain(Mat::scalar(0.0));
        assert!(matches!(ss_inverse(&sing), Err(Error::SingularD { .. })));
    }

    #[test]
    fn inverse_is_involution_on_series() {
        let p = poly(&[(0, 0, 2.0), (1, 1, 0.5), (0, 1, -0.25), (-2, 2, 0.1)]);
        let g = realize_cone_polynomial(&p).unwrap();
        let gi = ss_inverse(&ss_inverse(&g).unwrap()).unwrap();
        assert_series_eq(&expand_realization(&gi, 6, 6).unwrap(), &expand_realization(&g, 6, 6).unwrap(), 1e-14);
        let inv = expand_realization(&ss_inverse(&g).unwrap(), 8, 8).unwrap();
        let want = p.invert_causal(8, 8).unwrap();
        assert_series_eq(&inv, &want, 1e-13);
    }

    #[test]
    fn add_zero_system() {
        let g = realize_cone_polynomial(&poly(&[(0, 0, 1.0), (1, 1, 0.5)])).unwrap();
        let z = LRealization::static_gain(Mat::scalar(0.0));
        let s = ss_add(&g, &z).unwrap();
        assert_series_eq(&expand_realization(&s, 3, 3).unwrap(), &expand_realization(&g, 3, 3).unwrap(), 0.0);
        let bad = LRealization::static_gain(Mat::zeros(2, 1));
        assert!(matches!(ss_add(&g, &bad), Err(Error::DimensionMismatch(_))));
        assert!(matches!(ss_mul(&g, &bad), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn polynomial_realizations() {
        let g1 = poly(&[(0, 0, 0.25), (1, 1, 0.0625), (0, 1, 0.09375), (-1, 1, 0.0625)]);
        let r = realize_cone_polynomial(&g1).unwrap();
        assert_eq!(r.states(), 1);
        assert_eq!(r.d[(0, 0)], 0.25);
        assert_eq!(r.c.entry(0, 0), [0.0625, 0.09375, 0.0625]);
        assert_series_eq(&expand_realization(&r, 3, 3).unwrap(), &g1.reshape(SupportBox::symmetric(3, 0, 3)), 0.0);

        let delta = realize_cone_polynomial(&BiSeries::<f64>::delta()).unwrap();
        assert_eq!(delta.states(), 0);
        assert_eq!(delta.d[(0, 0)], 1.0);

        let z2 = realize_cone_polynomial(&poly(&[(2, 2, 1.0)])).unwrap();
        assert_eq!(z2.states(), 2);
        assert_eq!(expand_realization(&z2, 3, 3).unwrap().triples(), vec![(2, 2, 1.0)]);

        assert!(matches!(realize_cone_polynomial(&poly(&[(1, 0, 1.0)])), Err(Error::NotCone { .. })));
    }

    #[test]
    fn g_realization_matches_printed_form() {
        let p = RingExample::<f64>::default();
        let g = realize_rational(&p.g()).unwrap();
        assert_eq!(g.states(), 1);
        let rho = p.rho();
        assert_eq!(g.a.entry(0, 0), [rho.coeff(-1, 0), rho.coeff(0, 0), rho.coeff(1, 0)]);
        assert_eq!(g.b[(0, 0)], 1.0);
        assert_eq!(g.c.entry(0, 0), [0.0, 1.0, 0.0]);
        assert_eq!(g.d[(0, 0)], 0.0);
        // slices lambda^k = rho^(k-1)
        let e = expand_realization(&g, 6, 6).unwrap();
        let mut rk = BiSeries::delta();
        for k in 1..=6 {
            assert!(e.max_abs_diff_in(&rk.shift_temporal(k), SupportBox::symmetric(6, k, k)) < 1e-15);
            rk = &rk * &rho;
        }
        assert!((stability_probe(&g, 64) - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn outer_inverse_two_states() {
        let p = RingExample::<f64>::default();
        let inv_g = realize_rational(&RationalTransfer::polynomial(&BiSeries::delta() - &p.rho().shift_temporal(1)).unwrap()).unwrap();
        let inv_w = realize_rational(&RationalTransfer::polynomial(&BiSeries::delta() - &p.r().shift_temporal(1)).unwrap()).unwrap();
        let prod = ss_mul(&inv_g, &inv_w).unwrap();
        assert_eq!(prod.states(), 2);
        let want = p.t2().den().reshape(SupportBox::symmetric(5, 0, 5));
        assert_series_eq(&expand_realization(&prod, 5, 5).unwrap(), &want, 1e-15);
    }

    #[test]
    fn realize_rational_fallback() {
        // denominator slice of z-degree 2 forces the num * den^-1 route
        let den = poly(&[(0, 0, 1.0), (2, 2, 0.3), (0, 1, -0.2)]);
        let num = poly(&[(0, 1, 1.0), (1, 1, 0.5)]);
        let r = RationalTransfer::new(num, den).unwrap();
        let g = realize_rational(&r).unwrap();
        assert_series_eq(&expand_realization(&g, 6, 6).unwrap(), &r.expand(6, 6).unwrap(), 1e-14);
        let bad = RationalTransfer::new(poly(&[(3, 1, 1.0)]), BiSeries::delta()).unwrap();
        assert!(matches!(realize_rational(&bad), Err(Error::NotRealizableAsLCausal(_))));
    }

    #[test]
    fn feedback_trivial_loop() {
        let g3 = realize_cone_polynomial(&poly(&[(0, 0, 0.5), (1, 1, 0.25), (0, 2, 0.125)])).unwrap();
        let gyu = LRealization::static_gain(Mat::scalar(0.0));
        let k = feedback_realize_k(&g3, &gyu).unwrap();
        let neg = expand_realization(&g3, 4, 4).unwrap().scale(-1.0);
        assert_series_eq(&expand_realization(&k, 4, 4).unwrap(), &neg, 1e-15);
    }

    #[test]
    fn feedback_scalar_d() {
        let g3 = LRealization::static_gain(Mat::scalar(0.25));
        let gyu = LRealization::static_gain(Mat::scalar(0.0));
        assert_eq!(feedback_realize_k(&g3, &gyu).unwrap().d[(0, 0)], -0.25);
        let loop_ = LRealization::static_gain(Mat::scalar(4.0));
        assert_eq!(feedback_realize_k(&g3, &loop_), Err(Error::AlgebraicLoop));
    }

    #[test]
    fn probe_zero() {
        let g = LRealization::static_gain(Mat::scalar(1.0));
        assert_eq!(stability_probe(&g, 8), 0.0);
        let nil = realize_cone_polynomial(&poly(&[(0, 3, 1.0)])).unwrap();
        assert!(stability_probe(&nil, 8) < 1e-4);
    }
}
