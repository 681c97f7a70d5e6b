//! Optimal H2 decentralized synthesis.
//!
//! Pipeline: inner–outer factorization of `T2`, application of the inner
//! adjoint to `T1`, spatial decomposition into one model-matching problem per
//! site index, causal projection of each, assembly of the optimal
//! `T2out Q`, the Youla parameter `Q`, the controller `K = -Q (1 - Gyu Q)^-1`,
//! its l-causal realization, and the achieved closed-loop norm.

use std::ops::RangeInclusive;

use rayon::prelude::*;

use crate::bivariate::{BiSeries, LambdaSeries, SupportBox};
use crate::error::{Error, Result};
use crate::factorization::{apply_inner_adjoint, inner_outer_with, InnerOuter};
use crate::rational::{self, RationalTransfer, DEFAULT_GRID, DEFAULT_MARGIN};
use crate::scalar::Scalar;
use crate::statespace::{feedback_realize_k, realize_cone_polynomial, realize_rational, ss_mul, LRealization};

/// Default spatial and temporal expansion order for norm evaluation.
pub const DEFAULT_ORDER: i64 = 200;

#[derive(Debug, Clone, PartialEq)]
pub enum ProblemMode<T> {
    General,
    /// `T1 = W`, `T2 = G W`, `Gyu = G`; the plant and weight are kept so the
    /// outer factor can be realized factor by factor.
    DisturbanceAttenuation { g: RationalTransfer<T>, w: RationalTransfer<T> },
}

/// Model-matching data `min || T1 - T2 Q ||` with the loop plant `Gyu`.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem<T> {
    pub t1: RationalTransfer<T>,
    pub t2: RationalTransfer<T>,
    pub gyu: RationalTransfer<T>,
    pub mode: ProblemMode<T>,
}

impl<T: Scalar> Problem<T> {
    pub fn general(t1: RationalTransfer<T>, t2: RationalTransfer<T>, gyu: RationalTransfer<T>) -> Self {
        Self { t1, t2, gyu, mode: ProblemMode::General }
    }

    /// `T_zw = (1 - G Q) W`.
    pub fn disturbance_attenuation(g: RationalTransfer<T>, w: RationalTransfer<T>) -> Self {
        Self { t1: w.clone(), t2: g.mul(&w), gyu: g.clone(), mode: ProblemMode::DisturbanceAttenuation { g, w } }
    }

    /// Checks that `Gyu` is cone causal and open-loop stable.
    pub fn validate(&self) -> Result<()> {
        let probe = self.gyu.expand(16, 16)?;
        let tol = T::lit(1e-12) * probe.max_abs().max(T::one());
        if let Some((i, t, v)) = probe.cone_violation(tol) {
            return Err(Error::NotCone { i, t, value: v.to_f64().unwrap_or(f64::NAN) });
        }
        if let Some((m, theta)) = rational::min_root_magnitude(self.gyu.den(), DEFAULT_GRID) {
            if m <= T::one() + T::lit(DEFAULT_MARGIN) {
                return Err(Error::Unstable(format!(
                    "Gyu denominator has a lambda-root of magnitude {:.6} at theta = {:.6}",
                    m.to_f64().unwrap_or(f64::NAN),
                    theta.to_f64().unwrap_or(f64::NAN)
                )));
            }
        }
        Ok(())
    }
}

/// The slices `T~_i(lambda)` of `T2in^* T1 = sum T~_i z^i` for `|i| <= S`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelMatchingFamily<T> {
    pub slices: Vec<(i64, LambdaSeries<T>)>,
    pub spatial_order: i64,
    pub temporal_order: i64,
    pub delay: i64,
}

impl<T: Scalar> ModelMatchingFamily<T> {
    pub fn get(&self, i: i64) -> Option<&LambdaSeries<T>> {
        self.slices.iter().find(|(k, _)| *k == i).map(|(_, s)| s)
    }
}

/// Splits `r` into its spatial slices for `|i| <= s`.
pub fn decompose<T: Scalar>(r: &BiSeries<T>, s: i64) -> ModelMatchingFamily<T> {
    let b = r.bbox();
    let slices = (-s..=s)
        .map(|i| {
            let slice = r.spatial_slice(i).unwrap_or_else(|_| {
                LambdaSeries::new(b.temporal_min, vec![T::zero(); b.height()])
            });
            (i, slice)
        })
        .collect();
    ModelMatchingFamily { slices, spatial_order: s, temporal_order: b.temporal_max, delay: (-b.temporal_min).max(0) }
}

/// `eta~_i = Pi[T~_i / lambda^|i|]`, truncated at temporal order `m`.
pub fn solve_model_matching<T: Scalar>(tilde: &LambdaSeries<T>, i: i64, m: i64) -> LambdaSeries<T> {
    tilde.shift(-i.abs()).causal_part().truncate(m)
}

/// `J_opt = sqrt(sum_i || T~_i / lambda^|i| ||^2_{H2-perp})`.
pub fn optimal_cost<T: Scalar>(family: &ModelMatchingFamily<T>) -> T {
    family.slices.iter().map(|(i, s)| s.shift(-i.abs()).anticausal_part().norm_sq()).sum::<T>().sqrt()
}

/// Cost without the spatial delay constraint: the H2-perp energy of
/// `T2in^* T1` itself.
pub fn centralized_cost<T: Scalar>(r: &BiSeries<T>) -> T {
    r.anticausal_part().h2_norm_sq().sqrt()
}

/// `G1 = sum_i lambda^|i| eta~_i(lambda) z^i`, keeping terms of total
/// temporal order `|i| + j <= m`.
pub fn assemble_g1<T: Scalar>(eta: &[(i64, LambdaSeries<T>)], m: i64) -> BiSeries<T> {
    let terms = eta.iter().flat_map(|(i, s)| {
        let i = *i;
        s.iter().filter(move |&(j, v)| j >= 0 && i.abs() + j <= m && v != T::zero()).map(move |(j, v)| (i, i.abs() + j, v))
    });
    BiSeries::from_triples(terms)
}

/// `Q = G1 / T2out`.
pub fn youla_q<T: Scalar>(g1: &BiSeries<T>, fact: &InnerOuter<T>) -> Result<RationalTransfer<T>> {
    RationalTransfer::new(g1 * fact.outer.den(), fact.outer.num().clone())
}

/// `K = -Q / (1 - Gyu Q)` with the common `Q` denominator cancelled:
/// `K = -Qn Gd / (Gd Qd - Gn Qn)`.
pub fn controller_k<T: Scalar>(q: &RationalTransfer<T>, gyu: &RationalTransfer<T>) -> Result<RationalTransfer<T>> {
    let loop_den = (gyu.den() * q.den()).sub(&(gyu.num() * q.num())).trimmed();
    let lead = loop_den.coeff(0, 0);
    match loop_den.scalar_lead(T::small()) {
        Ok(_) => {}
        Err(Error::SingularLeadingTerm { .. }) => {
            return Err(Error::IllPosedFeedback { value: lead.to_f64().unwrap_or(f64::NAN) })
        }
        Err(e) => return Err(e),
    }
    RationalTransfer::new((q.num() * gyu.den()).scale(-T::one()), loop_den)
}

/// An H2 norm obtained by finite expansion, with a geometric estimate of
/// the discarded tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormReport<T> {
    pub value: T,
    /// Estimated bound on the squared norm beyond the expansion order.
    pub tail_bound_sq: T,
    pub spatial_order: i64,
    pub temporal_order: i64,
}

impl<T: Scalar> NormReport<T> {
    /// False when the tail estimate exceeds `tol` on the squared norm
    /// (the expansion order should be raised).
    pub fn tail_within(&self, tol: T) -> bool {
        self.tail_bound_sq <= tol
    }
}

/// Expansion norm of a rational plus its tail estimate
/// `C^2 rho^2 / (1 - rho^2)`, `C` the last slice norm and `rho` the largest
/// reciprocal root magnitude of the denominator over the circle grid.
pub fn rational_norm<T: Scalar>(r: &RationalTransfer<T>, s: i64, t: i64) -> Result<NormReport<T>> {
    let e = r.expand(s, t)?;
    let value = e.h2_norm_sq().sqrt();
    let tail_bound_sq = if r.is_polynomial() {
        if r.num().lambda_degree().unwrap_or(0) <= t && r.num().spatial_reach() <= s {
            T::zero()
        } else {
            T::infinity()
        }
    } else {
        match rational::min_root_magnitude(r.den(), DEFAULT_GRID) {
            None => T::zero(),
            Some((m, _)) => {
                let rho = T::one() / m;
                if rho >= T::one() {
                    T::infinity()
                } else {
                    let last: T = e.lambda_slice(t).map_or(T::zero(), |row| row.iter().map(|&v| v * v).sum());
                    last * rho * rho / (T::one() - rho * rho)
                }
            }
        }
    };
    Ok(NormReport { value, tail_bound_sq, spatial_order: s, temporal_order: t })
}

/// `|| T1 - T2 Q ||_H2` by expansion on `[-s, s] x [0, t]`.
pub fn closed_loop_norm<T: Scalar>(prob: &Problem<T>, q: &RationalTransfer<T>, s: i64, t: i64) -> Result<NormReport<T>> {
    rational_norm(&closed_loop(prob, q), s, t)
}

/// `T_zw = T1 - T2 Q`.
pub fn closed_loop<T: Scalar>(prob: &Problem<T>, q: &RationalTransfer<T>) -> RationalTransfer<T> {
    prob.t1.sub(&prob.t2.mul(q))
}

/// Orders used by one synthesis run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SynthesisOptions {
    /// Total temporal order of `G1` (`|i| + j <= m`).
    pub eta_order: i64,
    /// Spatial expansion order for norms and the model-matching family.
    pub spatial_order: i64,
    /// Temporal expansion order for norms and the model-matching family.
    pub temporal_order: i64,
}

impl Default for SynthesisOptions {
    fn default() -> Self {
        Self { eta_order: 1, spatial_order: DEFAULT_ORDER, temporal_order: DEFAULT_ORDER }
    }
}

impl SynthesisOptions {
    pub fn with_eta_order(m: i64) -> Self {
        Self { eta_order: m, ..Self::default() }
    }
}

#[derive(Debug, Clone)]
pub struct SynthesisResult<T> {
    pub options: SynthesisOptions,
    pub factorization: InnerOuter<T>,
    /// `eta~_i` for `|i| <= m`, each truncated at order `m - |i|`.
    pub eta: Vec<(i64, LambdaSeries<T>)>,
    pub g1: BiSeries<T>,
    pub q: RationalTransfer<T>,
    pub k: RationalTransfer<T>,
    pub k_realization: LRealization<T>,
    /// Achieved closed-loop norm.
    pub j: NormReport<T>,
    /// Optimal decentralized cost (infinite-order lower bound).
    pub j_opt: T,
    /// Centralized benchmark.
    pub centralized: T,
    /// `sum_i ||eta~_i beyond the kept orders||^2` from the family; equals
    /// `J^2 - J_opt^2` up to expansion truncation.
    pub eta_tail_sq: T,
}

impl<T: Scalar> SynthesisResult<T> {
    /// Temporal order of the Youla parameter.
    pub fn q_order(&self) -> i64 {
        self.q.lambda_order()
    }
}

/// Realizes `K` from `G1`, the outer factor and `Gyu` by positive feedback.
pub fn realize_controller<T: Scalar>(
    prob: &Problem<T>,
    fact: &InnerOuter<T>,
    g1: &BiSeries<T>,
) -> Result<LRealization<T>> {
    let g1_real = realize_cone_polynomial(g1)?;
    let outer_inv = realize_outer_inverse(prob, fact)?;
    let g3 = ss_mul(&g1_real, &outer_inv)?;
    let gyu = realize_rational(&prob.gyu)?;
    feedback_realize_k(&g3, &gyu)
}

fn deflated_inverse<T: Scalar>(f: &RationalTransfer<T>) -> Option<(i64, RationalTransfer<T>)> {
    let d = f.num().lambda_valuation()?;
    RationalTransfer::new(f.den().clone(), f.num().shift_temporal(-d)).ok().map(|r| (d, r))
}

/// `T2out^-1`; factor by factor when the problem came as `G` and `W`.
pub fn realize_outer_inverse<T: Scalar>(prob: &Problem<T>, fact: &InnerOuter<T>) -> Result<LRealization<T>> {
    if let ProblemMode::DisturbanceAttenuation { g, w } = &prob.mode {
        if let (Some((dg, gi)), Some((dw, wi))) = (deflated_inverse(g), deflated_inverse(w)) {
            if (dg + dw) as usize == fact.delay {
                return ss_mul(&realize_rational(&gi)?, &realize_rational(&wi)?);
            }
        }
    }
    realize_rational(&fact.outer_inverse())
}

/// Runs the whole pipeline for one eta order.
pub fn synthesize<T: Scalar>(prob: &Problem<T>, opts: SynthesisOptions) -> Result<SynthesisResult<T>> {
    if opts.eta_order < 0 || opts.spatial_order < 0 || opts.temporal_order < 0 {
        return Err(Error::InvalidArgument(format!("orders must be nonnegative: {opts:?}")));
    }
    prob.validate()?;
    let s = opts.spatial_order;
    let t = opts.temporal_order;
    let m = opts.eta_order;
    let fact = inner_outer_with(&prob.t2, DEFAULT_GRID, T::lit(DEFAULT_MARGIN))?;
    let d = fact.delay as i64;
    let r = apply_inner_adjoint(&prob.t1, fact.delay, s, d, t)?;
    let family = decompose(&r, s);
    let j_opt = optimal_cost(&family);
    let centralized = centralized_cost(&r);

    let reach = m.min(s);
    let eta: Vec<(i64, LambdaSeries<T>)> = (-reach..=reach)
        .into_par_iter()
        .map(|i| {
            let tilde = family.get(i).expect("|i| <= S");
            (i, solve_model_matching(tilde, i, m - i.abs()))
        })
        .collect();
    let full_causal: T = family.slices.iter().map(|(i, sl)| sl.shift(-i.abs()).causal_part().norm_sq()).sum();
    let kept: T = eta.iter().map(|(_, e)| e.norm_sq()).sum();
    let eta_tail_sq = (full_causal - kept).max(T::zero());

    let g1 = assemble_g1(&eta, m);
    let q = youla_q(&g1, &fact)?;
    let k = controller_k(&q, &prob.gyu)?;
    let k_realization = realize_controller(prob, &fact, &g1)?;
    let j = closed_loop_norm(prob, &q, s, t)?;
    Ok(SynthesisResult { options: opts, factorization: fact, eta, g1, q, k, k_realization, j, j_opt, centralized, eta_tail_sq })
}

/// One synthesis per eta order in `m_range`, evaluated in parallel.
pub fn sweep<T: Scalar>(prob: &Problem<T>, m_range: RangeInclusive<i64>, s: i64, t: i64) -> Result<Vec<SynthesisResult<T>>> {
    m_range
        .into_par_iter()
        .map(|m| synthesize(prob, SynthesisOptions { eta_order: m, spatial_order: s, temporal_order: t }))
        .collect()
}

/// Box of the rectangular expansion used for the norms of a run.
pub fn norm_box(opts: &SynthesisOptions) -> SupportBox {
    SupportBox::symmetric(opts.spatial_order, 0, opts.temporal_order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::example::RingExample;
    use crate::factorization::inner_outer;

    fn family(s: i64, t: i64) -> ModelMatchingFamily<f64> {
        let p = RingExample::default();
        let r = apply_inner_adjoint(&p.t1(), 2, s, 2, t).unwrap();
        decompose(&r, s)
    }

    #[test]
    fn decompose_slices() {
        let f = family(6, 6);
        let t0 = f.get(0).unwrap();
        for (t, v) in [(-1, 1.0), (0, 0.25), (1, 3.0 / 32.0), (2, 5.0 / 128.0)] {
            assert!((t0.coeff(t) - v).abs() <= 1e-12);
        }
        for i in [-1, 1] {
            let s = f.get(i).unwrap();
            for (t, v) in [(0, 0.125), (1, 1.0 / 16.0), (2, 15.0 / 512.0), (3, 7.0 / 512.0)] {
                assert!((s.coeff(t) - v).abs() <= 1e-12);
            }
        }
        let s2 = f.get(2).unwrap();
        assert_eq!(s2.coeff(0), 0.0);
        assert!((s2.coeff(1) - 1.0 / 64.0).abs() <= 1e-12);
    }

    #[test]
    fn model_matching_projection() {
        let f = family(6, 6);
        let e0 = solve_model_matching(f.get(0).unwrap(), 0, 2);
        assert_eq!(e0.temporal_min(), 0);
        for (t, v) in [(0, 0.25), (1, 3.0 / 32.0), (2, 5.0 / 128.0)] {
            assert!((e0.coeff(t) - v).abs() <= 1e-12);
        }
        let e1 = solve_model_matching(f.get(-1).unwrap(), -1, 2);
        for (t, v) in [(0, 1.0 / 16.0), (1, 15.0 / 512.0), (2, 7.0 / 512.0)] {
            assert!((e1.coeff(t) - v).abs() <= 1e-12);
        }
        let causal = LambdaSeries::new(0, vec![1.0, 2.0, 3.0]);
        assert_eq!(solve_model_matching(&causal, 0, 1).coeffs(), &[1.0, 2.0]);
    }

    #[test]
    fn cost_trivial_cases() {
        let causal = ModelMatchingFamily {
            slices: vec![(0, LambdaSeries::new(0, vec![1.0, 0.5]))],
            spatial_order: 0,
            temporal_order: 1,
            delay: 0,
        };
        assert_eq!(optimal_cost(&causal), 0.0);
        let p = RingExample::<f64>::default();
        let r = apply_inner_adjoint(&p.t1(), 2, 30, 2, 60).unwrap();
        assert!((centralized_cost(&r) - 1.0).abs() < 1e-12);
        assert!((optimal_cost(&decompose(&r, 30)) - (1.0f64 + 2.0 / 63.0).sqrt()).abs() < 1e-9);
    }

    #[test]
    fn g1_assembly() {
        let f = family(6, 6);
        let eta: Vec<_> = (-1..=1).map(|i| (i, solve_model_matching(f.get(i).unwrap(), i, 1 - i64::abs(i)))).collect();
        let g1 = assemble_g1(&eta, 1);
        assert_eq!(g1.triples(), vec![(0, 0, 0.25), (-1, 1, 0.0625), (0, 1, 0.09375), (1, 1, 0.0625)]);
        assert!(g1.is_cone_causal(0.0));
        assert_eq!(assemble_g1::<f64>(&[], 3).h2_norm_sq(), 0.0);
    }

    #[test]
    fn youla_and_controller() {
        let p = RingExample::<f64>::default();
        let fact = inner_outer(&p.t2()).unwrap();
        let g1 = BiSeries::from_triples([(0, 0, 0.25), (-1, 1, 0.0625), (0, 1, 0.09375), (1, 1, 0.0625)]);
        let q = youla_q(&g1, &fact).unwrap();
        assert!(q.is_polynomial());
        assert_eq!(q.lambda_order(), 3);
        assert!((q.num().coeff(0, 0) - 0.25).abs() < 1e-15);
        for (i, v) in [(-1, -1.0 / 96.0), (0, -5.0 / 96.0), (1, -1.0 / 96.0)] {
            assert!((q.num().coeff(i, 1) - v).abs() < 1e-15);
        }
        let k = controller_k(&q, &p.g()).unwrap();
        assert!((k.expand(0, 0).unwrap().coeff(0, 0) + 0.25).abs() < 1e-15);
        let zero = controller_k(&RationalTransfer::zero(), &p.g()).unwrap();
        assert_eq!(zero.expand(3, 3).unwrap().max_abs(), 0.0);
        let id = InnerOuter { delay: 0, outer: RationalTransfer::constant(1.0) };
        assert_eq!(youla_q(&g1, &id).unwrap().num(), &g1.trimmed());
    }

    #[test]
    fn ill_posed_feedback() {
        let q = RationalTransfer::constant(1.0);
        let gyu = RationalTransfer::constant(1.0);
        assert!(matches!(controller_k(&q, &gyu), Err(Error::IllPosedFeedback { .. })));
    }

    #[test]
    fn no_control_norm_is_w_norm() {
        let p = RingExample::<f64>::default();
        let prob = p.problem();
        let n = closed_loop_norm(&prob, &RationalTransfer::zero(), 60, 60).unwrap();
        let w = p.w().expand(60, 60).unwrap().h2_norm_sq().sqrt();
        assert!((n.value - w).abs() < 1e-15);
        assert!(n.tail_within(1e-12));
    }

    #[test]
    fn table_rows_small_orders() {
        let prob = RingExample::<f64>::default().problem();
        let res = sweep(&prob, 0..=3, 60, 60).unwrap();
        let want = [1.0261, 1.0180, 1.0162, 1.0159];
        for (r, w) in res.iter().zip(want) {
            assert!((r.j.value - w).abs() < 1e-3, "m={} J={}", r.options.eta_order, r.j.value);
            assert_eq!(r.q_order(), r.options.eta_order + 2);
            assert!(r.j.value >= r.j_opt - 1e-9);
            let gap = r.j.value * r.j.value - r.j_opt * r.j_opt;
            assert!((gap - r.eta_tail_sq).abs() < 1e-9);
        }
    }

    #[test]
    fn unstable_plant_rejected() {
        let g = RationalTransfer::new(
            BiSeries::monomial(0, 1, 1.0),
            BiSeries::from_triples([(0, 0, 1.0), (0, 1, -2.0)]),
        )
        .unwrap();
        let prob = Problem::disturbance_attenuation(g, RingExample::default().w());
        assert!(matches!(prob.validate(), Err(Error::Unstable(_))));
    }
}
