//! Reference values for the built-in ring example and the checks run by
//! `paper-example`.

use cone_h2::statespace::expand_realization;
use cone_h2::factorization::apply_inner_adjoint;
use cone_h2::synthesis::{decompose, solve_model_matching, SynthesisResult};
use cone_h2::{Example, Rational, Series};

use crate::format::num;
use crate::io::{Orders, ProblemFile, TransferSpec};

/// Closed-loop norm for eta orders `0..=6`.
pub const TABLE_J: [f64; 7] = [1.0261, 1.0180, 1.0162, 1.0159, 1.0158, 1.0158, 1.0157];
pub const TABLE_TOL: f64 = 1e-3;
pub const J_OPT: f64 = 1.0157;
pub const J_OPT_TOL: f64 = 5e-4;
pub const CENTRALIZED: f64 = 1.0;
pub const CENTRALIZED_TOL: f64 = 1e-6;
pub const COEFF_TOL: f64 = 1e-12;

/// `T~_0` and `T~_{+-1}` as `(t, value)`.
pub const T_TILDE_0: [(i64, f64); 4] = [(-1, 1.0), (0, 0.25), (1, 3.0 / 32.0), (2, 5.0 / 128.0)];
pub const T_TILDE_1: [(i64, f64); 4] = [(0, 0.125), (1, 1.0 / 16.0), (2, 15.0 / 512.0), (3, 7.0 / 512.0)];
pub const ETA_0: [(i64, f64); 3] = [(0, 0.25), (1, 3.0 / 32.0), (2, 5.0 / 128.0)];
pub const ETA_1: [(i64, f64); 3] = [(0, 1.0 / 16.0), (1, 15.0 / 512.0), (2, 7.0 / 512.0)];

/// Printed `Q` at `m = 1` through `lambda^1`, as `(i, t, value)`.
pub const Q_LOW: [(i64, i64, f64); 4] =
    [(0, 0, 0.25), (-1, 1, -1.0 / 96.0), (0, 1, -5.0 / 96.0), (1, 1, -1.0 / 96.0)];
/// Printed `lambda^2` coefficient of `Q`.
pub const Q_LAMBDA2_PRINTED: [(i64, f64); 5] =
    [(-2, -2.0 / 1536.0), (-1, -21.0 / 1536.0), (0, -32.0 / 1536.0), (1, -21.0 / 1536.0), (2, -2.0 / 1536.0)];

fn laurent(c: &[f64], t: i64) -> impl Iterator<Item = (i64, i64, f64)> + '_ {
    let h = (c.len() as i64 - 1) / 2;
    c.iter().enumerate().map(move |(k, &v)| (k as i64 - h, t, v))
}

/// The printed third-order controller rational.
pub fn k_reference() -> Rational {
    let num = laurent(&[-2.0, -11.0, -26.0, -34.0, -26.0, -11.0, -2.0], 3)
        .chain(laurent(&[20.0, 66.0, 92.0, 66.0, 20.0], 2))
        .chain(laurent(&[16.0, 80.0, 16.0], 1))
        .chain([(0, 0, -384.0)]);
    let den = laurent(&[12.0, 42.0, 60.0, 42.0, 12.0], 3)
        .chain(laurent(&[-48.0, -48.0, -48.0], 2))
        .chain([(0, 1, -384.0), (0, 0, 1536.0)]);
    Rational::new(Series::from_triples(num), Series::from_triples(den)).expect("constant lead")
}

/// Printed state count and feedthrough of the controller realization.
pub const K_STATES: usize = 4;
pub const K_D_PRINTED: f64 = 0.25;

/// The ring example as a problem file.
pub fn example_problem_file(orders: Option<Orders>) -> ProblemFile {
    let ex = Example::default();
    ProblemFile::DisturbanceAttenuation {
        g: TransferSpec::exact(&ex.g()),
        w: TransferSpec::exact(&ex.w()),
        orders,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Checkpoint {
    fn close(name: impl Into<String>, got: f64, want: f64, tol: f64) -> Self {
        let pass = (got - want).abs() <= tol;
        Self { name: name.into(), pass, detail: format!("got {} want {} tol {}", num(got), num(want), num(tol)) }
    }

    fn max_err(name: impl Into<String>, err: f64, tol: f64) -> Self {
        Self { name: name.into(), pass: err <= tol, detail: format!("max error {} tol {}", num(err), num(tol)) }
    }
}

/// Table rows for every result in `sweep`.
pub fn table_checks(sweep: &[SynthesisResult<f64>]) -> Vec<Checkpoint> {
    sweep
        .iter()
        .filter_map(|r| {
            let m = r.options.eta_order;
            let want = *TABLE_J.get(usize::try_from(m).ok()?)?;
            let mut c = Checkpoint::close(format!("J(m={m})"), r.j.value, want, TABLE_TOL);
            let q_ok = r.q_order() == m + 2;
            c.pass &= q_ok;
            c.detail.push_str(&format!(", Q order {} want {}", r.q_order(), m + 2));
            Some(c)
        })
        .collect()
}

/// Coefficient, controller and realization checks at `m = 1`, plus the two
/// bounds. `r1` must be a synthesis at eta order 1.
pub fn structure_checks(r1: &SynthesisResult<f64>) -> Vec<Checkpoint> {
    let mut out = Vec::new();
    let inner = format!("λ^{}", r1.factorization.delay);
    out.push(Checkpoint { name: "T2in".into(), pass: inner == "λ^2", detail: format!("got {inner} want λ^2") });
    out.push(Checkpoint::close("J_opt", r1.j_opt, J_OPT, J_OPT_TOL));
    out.push(Checkpoint::close("J_opt closed form", r1.j_opt, (1.0f64 + 2.0 / 63.0).sqrt(), 1e-6));
    out.push(Checkpoint::close("centralized", r1.centralized, CENTRALIZED, CENTRALIZED_TOL));

    let ex = Example::default();
    let s = r1.options.spatial_order.min(8);
    let t = r1.options.temporal_order.min(8);
    let family = apply_inner_adjoint(&ex.t1(), 2, s, 2, t).map(|r| decompose(&r, s));
    if let Ok(f) = family {
        let slice_err = |i: i64, want: &[(i64, f64)]| {
            f.get(i).map_or(f64::INFINITY, |sl| want.iter().map(|&(t, v)| (sl.coeff(t) - v).abs()).fold(0.0, f64::max))
        };
        out.push(Checkpoint::max_err("T~_0", slice_err(0, &T_TILDE_0), COEFF_TOL));
        out.push(Checkpoint::max_err("T~_±1", slice_err(1, &T_TILDE_1).max(slice_err(-1, &T_TILDE_1)), COEFF_TOL));
        let eta_err = |i: i64, want: &[(i64, f64)]| {
            f.get(i).map_or(f64::INFINITY, |sl| {
                let e = solve_model_matching(sl, i, 2);
                want.iter().map(|&(t, v)| (e.coeff(t) - v).abs()).fold(0.0, f64::max)
            })
        };
        out.push(Checkpoint::max_err("eta~_0", eta_err(0, &ETA_0), COEFF_TOL));
        out.push(Checkpoint::max_err("eta~_±1", eta_err(1, &ETA_1).max(eta_err(-1, &ETA_1)), COEFF_TOL));
    }

    let q_err = Q_LOW.iter().map(|&(i, t, v)| (r1.q.num().coeff(i, t) - v).abs()).fold(0.0, f64::max);
    out.push(Checkpoint::max_err("Q through λ^1 (m=1)", q_err, COEFF_TOL));

    let k_err = match (r1.k.expand(5, 8), k_reference().expand(5, 8)) {
        (Ok(a), Ok(b)) => a.max_abs_diff(&b),
        _ => f64::INFINITY,
    };
    out.push(Checkpoint::max_err("K rational (S=5, T=8)", k_err, 1e-9));

    let kr = &r1.k_realization;
    out.push(Checkpoint {
        name: "K realization states".into(),
        pass: kr.states() == K_STATES,
        detail: format!("got {} want {K_STATES}", kr.states()),
    });
    let real_err = match (expand_realization(kr, 5, 8), r1.k.expand(5, 8)) {
        (Ok(a), Ok(b)) => a.max_abs_diff(&b),
        _ => f64::INFINITY,
    };
    out.push(Checkpoint::max_err("K realization vs K (S=5, T=8)", real_err, 1e-9));
    let d_want = k_reference().expand(0, 0).map_or(f64::NAN, |e| e.coeff(0, 0));
    out.push(Checkpoint::close("K realization D = K(λ=0)", kr.d[(0, 0)], d_want, 1e-12));
    out
}
