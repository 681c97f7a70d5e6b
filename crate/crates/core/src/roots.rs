//! Roots of small complex polynomials and spectral radii of small complex
//! matrices.

use num_complex::Complex;

use crate::scalar::Scalar;

/// Roots of `sum coeffs[k] x^k`, found by Aberth–Ehrlich iteration.
///
/// Trailing coefficients with magnitude `<= tol * max|c|` are dropped (the
/// polynomial degree drops, i.e. roots escape to infinity); the returned flag
/// is `true` when that happened. Exact zero roots are deflated first.
pub fn poly_roots<T: Scalar>(coeffs: &[Complex<T>], tol: T) -> (Vec<Complex<T>>, bool) {
    let scale = coeffs.iter().fold(T::zero(), |m, c| m.max(c.norm()));
    if scale == T::zero() {
        return (Vec::new(), false);
    }
    let mut hi = coeffs.len();
    while hi > 0 && coeffs[hi - 1].norm() <= tol * scale {
        hi -= 1;
    }
    let degenerate = hi < coeffs.len();
    let mut lo = 0;
    while lo < hi && coeffs[lo].norm() == T::zero() {
        lo += 1;
    }
    let zero = Complex::new(T::zero(), T::zero());
    let mut roots = vec![zero; lo];
    let p = &coeffs[lo..hi];
    let n = p.len().saturating_sub(1);
    if n == 0 {
        return (roots, degenerate);
    }
    // monic normalisation
    let lead = p[n];
    let p: Vec<Complex<T>> = p.iter().map(|&c| c / lead).collect();
    let dp: Vec<Complex<T>> = (1..=n).map(|k| p[k] * T::lit(k as f64)).collect();

    // initial guesses on a circle of the Cauchy bound radius
    let radius = T::one() + p[..n].iter().fold(T::zero(), |m, c| m.max(c.norm()));
    let mut z: Vec<Complex<T>> = (0..n)
        .map(|k| {
            let ang = T::lit(2.0) * T::PI() * T::lit(k as f64) / T::lit(n as f64) + T::lit(0.4);
            Complex::from_polar(radius * T::lit(0.5), ang)
        })
        .collect();

    let eval = |c: &[Complex<T>], x: Complex<T>| c.iter().rev().fold(zero, |acc, &a| acc * x + a);
    for _ in 0..500 {
        let mut moved = T::zero();
        for k in 0..n {
            let pv = eval(&p, z[k]);
            if pv.norm() == T::zero() {
                continue;
            }
            let ratio = pv / eval(&dp, z[k]);
            let repulsion = (0..n)
                .filter(|&j| j != k)
                .fold(zero, |acc, j| acc + Complex::new(T::one(), T::zero()) / (z[k] - z[j]));
            let step = ratio / (Complex::new(T::one(), T::zero()) - ratio * repulsion);
            if step.re.is_finite() && step.im.is_finite() {
                z[k] = z[k] - step;
                moved = moved.max(step.norm() / (T::one() + z[k].norm()));
            }
        }
        if moved <= T::epsilon() * T::lit(4.0) {
            break;
        }
    }
    roots.extend(z);
    (roots, degenerate)
}

/// Spectral radius of a square complex matrix given row-major, via the
/// Faddeev–LeVerrier characteristic polynomial. Intended for the tiny state
/// matrices of realizations.
pub fn spectral_radius<T: Scalar>(a: &[Complex<T>], n: usize) -> T {
    if n == 0 {
        return T::zero();
    }
    let zero = Complex::new(T::zero(), T::zero());
    let one = Complex::new(T::one(), T::zero());
    let matmul = |x: &[Complex<T>], y: &[Complex<T>]| {
        let mut out = vec![zero; n * n];
        for i in 0..n {
            for k in 0..n {
                let xik = x[i * n + k];
                if xik == zero {
                    continue;
                }
                for j in 0..n {
                    out[i * n + j] += xik * y[k * n + j];
                }
            }
        }
        out
    };
    // char poly c_n x^n + ... + c_0 with c_n = 1
    let mut c = vec![zero; n + 1];
    c[n] = one;
    let mut m = vec![zero; n * n];
    for k in 1..=n {
        let mut am = matmul(a, &m);
        for i in 0..n {
            am[i * n + i] += c[n - k + 1];
        }
        m = am;
        let amk = matmul(a, &m);
        let trace = (0..n).fold(zero, |acc, i| acc + amk[i * n + i]);
        c[n - k] = -trace / T::lit(k as f64);
    }
    let (roots, _) = poly_roots(&c, T::zero());
    roots.iter().fold(T::zero(), |m, r| m.max(r.norm()))
}
