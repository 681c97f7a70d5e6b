//! Simulation on a finite ring of identical sites.
//!
//! The spatial shift acts as `(z x)(s) = x(s - 1)`, so a kernel coefficient
//! at `(i, t)` carries an input at site `j` to site `j + i`, `t` steps later.

use std::fmt::Write as _;

use crate::bivariate::BiSeries;
use crate::error::{Error, Result};
use crate::matrix::Mat;
use crate::scalar::Scalar;
use crate::statespace::LRealization;

/// Signal `u[site][t]` for `t = 0..=horizon` on a ring of `sites` sites.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeSignal<T> {
    sites: usize,
    horizon: usize,
    values: Vec<Vec<T>>,
}

impl<T: Scalar> LatticeSignal<T> {
    pub fn zeros(sites: usize, horizon: usize) -> Self {
        Self { sites, horizon, values: vec![vec![T::zero(); horizon + 1]; sites] }
    }

    /// Unit pulse at `(site, 0)`.
    pub fn impulse(sites: usize, horizon: usize, site: i64) -> Self {
        let mut s = Self::zeros(sites, horizon);
        s.set(site, 0, T::one());
        s
    }

    /// Rejects ragged grids.
    pub fn from_values(values: Vec<Vec<T>>) -> Result<Self> {
        let sites = values.len();
        let len = values.first().map_or(0, |r| r.len());
        if sites == 0 || len == 0 || values.iter().any(|r| r.len() != len) {
            return Err(Error::DimensionMismatch("lattice grid must be non-empty and rectangular".into()));
        }
        Ok(Self { sites, horizon: len - 1, values })
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn values(&self) -> &[Vec<T>] {
        &self.values
    }

    fn wrap(&self, site: i64) -> usize {
        site.rem_euclid(self.sites as i64) as usize
    }

    /// Value at a site taken modulo the ring size.
    pub fn get(&self, site: i64, t: usize) -> T {
        self.values[self.wrap(site)][t]
    }

    pub fn set(&mut self, site: i64, t: usize, v: T) {
        let s = self.wrap(site);
        self.values[s][t] = v;
    }

    /// `sum u(s, t)^2`.
    pub fn energy(&self) -> T {
        self.values.iter().flatten().map(|&v| v * v).sum()
    }

    /// Distance from `site` to 0 around the ring.
    pub fn ring_distance(&self, site: usize) -> usize {
        let s = site % self.sites;
        s.min(self.sites - s)
    }

    /// CSV: header `t,0,1,...`, one row per time step.
    pub fn to_csv_with(&self, fmt: impl Fn(T) -> String) -> String {
        let mut out = String::from("t");
        for s in 0..self.sites {
            write!(out, ",{s}").unwrap();
        }
        out.push('\n');
        for t in 0..=self.horizon {
            write!(out, "{t}").unwrap();
            for s in 0..self.sites {
                out.push(',');
                out.push_str(&fmt(self.values[s][t]));
            }
            out.push('\n');
        }
        out
    }

    pub fn to_csv(&self) -> String {
        self.to_csv_with(|v| v.to_string())
    }
}

/// A spatially invariant operator on the ring.
#[derive(Debug, Clone, PartialEq)]
pub enum LatticeSystem<T> {
    /// Impulse response coefficients.
    Kernel(BiSeries<T>),
    /// SISO l-causal state-space model marched site by site.
    Realization(LRealization<T>),
}

impl<T: Scalar> LatticeSystem<T> {
    /// Largest spatial distance an impulse can travel within `horizon` steps.
    pub fn reach(&self, horizon: usize) -> usize {
        match self {
            Self::Kernel(k) => k
                .iter()
                .filter(|&(_, t, v)| v != T::zero() && t <= horizon as i64)
                .map(|(i, _, _)| i.unsigned_abs() as usize)
                .max()
                .unwrap_or(0),
            Self::Realization(_) => horizon,
        }
    }

    fn check_wrap(&self, sites: usize, horizon: usize) -> Result<()> {
        check_ring(sites, self.reach(horizon))
    }
}

fn check_ring(sites: usize, reach: usize) -> Result<()> {
    if 2 * reach >= sites {
        return Err(Error::WraparoundRisk(format!(
            "responses reach {reach} sites each way but the ring has only {sites} sites (need more than {})",
            2 * reach
        )));
    }
    Ok(())
}

/// Applies `sys` to `input` over the input's horizon.
pub fn simulate<T: Scalar>(sys: &LatticeSystem<T>, input: &LatticeSignal<T>) -> Result<LatticeSignal<T>> {
    sys.check_wrap(input.sites, input.horizon)?;
    match sys {
        LatticeSystem::Kernel(k) => Ok(convolve(k, input)),
        LatticeSystem::Realization(g) => {
            siso(g)?;
            let mut m = Marcher::new(g, input.sites);
            let mut out = LatticeSignal::zeros(input.sites, input.horizon);
            let mut u = vec![T::zero(); input.sites];
            let mut y = vec![T::zero(); input.sites];
            for t in 0..=input.horizon {
                for (s, slot) in u.iter_mut().enumerate() {
                    *slot = input.values[s][t];
                }
                m.output(&u, &mut y);
                m.step(&u);
                for (s, &v) in y.iter().enumerate() {
                    out.values[s][t] = v;
                }
            }
            Ok(out)
        }
    }
}

fn convolve<T: Scalar>(k: &BiSeries<T>, input: &LatticeSignal<T>) -> LatticeSignal<T> {
    let taps: Vec<(i64, usize, T)> = k
        .iter()
        .filter(|&(_, t, v)| v != T::zero() && t >= 0 && t <= input.horizon as i64)
        .map(|(i, t, v)| (i, t as usize, v))
        .collect();
    let mut out = LatticeSignal::zeros(input.sites, input.horizon);
    for (j, row) in input.values.iter().enumerate() {
        for (tau, &u) in row.iter().enumerate() {
            if u == T::zero() {
                continue;
            }
            for &(i, t, g) in &taps {
                if tau + t <= input.horizon {
                    let s = out.wrap(j as i64 + i);
                    out.values[s][tau + t] += g * u;
                }
            }
        }
    }
    out
}

fn siso<T: Scalar>(g: &LRealization<T>) -> Result<()> {
    if g.inputs() != 1 || g.outputs() != 1 {
        return Err(Error::DimensionMismatch(format!(
            "lattice simulation needs a SISO model, got {} inputs and {} outputs",
            g.inputs(),
            g.outputs()
        )));
    }
    Ok(())
}

/// Per-site state of one realization, with sparse coefficient lists.
struct Marcher<T> {
    sites: usize,
    n: usize,
    /// `(row, col, shift, value)` for `A` and `C`.
    a: Vec<(usize, usize, i64, T)>,
    c: Vec<(usize, i64, T)>,
    b: Vec<(usize, T)>,
    d: T,
    /// `x[s * n + k]`.
    x: Vec<T>,
    next: Vec<T>,
}

impl<T: Scalar> Marcher<T> {
    fn new(g: &LRealization<T>, sites: usize) -> Self {
        let n = g.states();
        let b = g.b.nonzeros().into_iter().map(|(r, _, v)| (r, v)).collect();
        let c = g.c.nonzeros().into_iter().map(|(_, k, p, v)| (k, p, v)).collect();
        Self {
            sites,
            n,
            a: g.a.nonzeros(),
            c,
            b,
            d: if g.d.rows() == 1 && g.d.cols() == 1 { g.d[(0, 0)] } else { T::zero() },
            x: vec![T::zero(); sites * n],
            next: vec![T::zero(); sites * n],
        }
    }

    /// Site `s - p` on the ring.
    fn src(&self, s: usize, p: i64) -> usize {
        (s as i64 - p).rem_euclid(self.sites as i64) as usize
    }

    /// `y = C x + D u`.
    fn output(&self, u: &[T], y: &mut [T]) {
        for s in 0..self.sites {
            let mut acc = self.d * u[s];
            for &(k, p, v) in &self.c {
                acc += v * self.x[self.src(s, p) * self.n + k];
            }
            y[s] = acc;
        }
    }

    /// `x <- A x + B u`.
    fn step(&mut self, u: &[T]) {
        self.next.fill(T::zero());
        for s in 0..self.sites {
            let base = s * self.n;
            for &(r, k, p, v) in &self.a {
                let src = self.src(s, p) * self.n + k;
                self.next[base + r] += v * self.x[src];
            }
            if u[s] != T::zero() {
                for &(r, v) in &self.b {
                    self.next[base + r] += v * u[s];
                }
            }
        }
        std::mem::swap(&mut self.x, &mut self.next);
    }
}

/// Energy of the response to a unit impulse at `(0, 0)` up to `horizon`,
/// on the smallest ring free of wraparound.
pub fn impulse_energy<T: Scalar>(sys: &LatticeSystem<T>, horizon: usize) -> Result<T> {
    impulse_energy_on(sys, 2 * sys.reach(horizon) + 1, horizon)
}

pub fn impulse_energy_on<T: Scalar>(sys: &LatticeSystem<T>, sites: usize, horizon: usize) -> Result<T> {
    Ok(simulate(sys, &LatticeSignal::impulse(sites, horizon, 0))?.energy())
}

/// True iff `|y(s, t)| <= tol` whenever `t` is smaller than the ring
/// distance from `s` to site 0.
pub fn verify_cone_support<T: Scalar>(response: &LatticeSignal<T>, tol: T) -> bool {
    response.values.iter().enumerate().all(|(s, row)| {
        let d = response.ring_distance(s);
        row.iter().take(d.min(response.horizon + 1)).all(|v| v.abs() <= tol)
    })
}

/// The disturbance-attenuation loop `y = W w + G u`, `u = K y`.
#[derive(Debug, Clone)]
pub struct FeedbackLoop<T> {
    pub w: LRealization<T>,
    pub g: LRealization<T>,
    pub k: LRealization<T>,
}

/// Signals produced by [`simulate_feedback`].
#[derive(Debug, Clone)]
pub struct LoopResponse<T> {
    /// Measured and regulated output.
    pub y: LatticeSignal<T>,
    /// Control input.
    pub u: LatticeSignal<T>,
}

/// Marches the three realizations together; a direct `G`–`K` feedthrough
/// loop is solved site by site.
pub fn simulate_feedback<T: Scalar>(lp: &FeedbackLoop<T>, w: &LatticeSignal<T>) -> Result<LoopResponse<T>> {
    for g in [&lp.w, &lp.g, &lp.k] {
        siso(g)?;
    }
    let (n, h) = (w.sites, w.horizon);
    check_ring(n, h)?;
    let dg = lp.g.d[(0, 0)];
    let dk = lp.k.d[(0, 0)];
    let gain = T::one() - dg * dk;
    if gain.abs() <= T::small() {
        return Err(Error::AlgebraicLoop);
    }
    let mut mw = Marcher::new(&lp.w, n);
    let mut mg = Marcher::new(&lp.g, n);
    let mut mk = Marcher::new(&lp.k, n);
    // feedthrough is applied explicitly below
    mg.d = T::zero();
    mk.d = T::zero();
    let zero = vec![T::zero(); n];
    let (mut yw, mut yg, mut yk) = (vec![T::zero(); n], vec![T::zero(); n], vec![T::zero(); n]);
    let mut wt = vec![T::zero(); n];
    let mut y = LatticeSignal::zeros(n, h);
    let mut u = LatticeSignal::zeros(n, h);
    let (mut ut, mut ytt) = (vec![T::zero(); n], vec![T::zero(); n]);
    for t in 0..=h {
        for (s, slot) in wt.iter_mut().enumerate() {
            *slot = w.values[s][t];
        }
        mw.output(&wt, &mut yw);
        mg.output(&zero, &mut yg);
        mk.output(&zero, &mut yk);
        for s in 0..n {
            // y = a + dg (b + dk y)
            let a = yw[s] + yg[s];
            let yv = (a + dg * yk[s]) / gain;
            ytt[s] = yv;
            ut[s] = yk[s] + dk * yv;
            y.values[s][t] = yv;
            u.values[s][t] = ut[s];
        }
        mw.step(&wt);
        mg.step(&ut);
        mk.step(&ytt);
    }
    Ok(LoopResponse { y, u })
}

/// A memoryless `1 x 1` realization.
pub fn gain<T: Scalar>(v: T) -> LRealization<T> {
    LRealization::static_gain(Mat::scalar(v))
}
