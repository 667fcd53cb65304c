//! Classical solvers: the worst-case deterministic algorithm (bisection on
//! `M_q` with `n ~ eps^-1/2`) and the randomized algorithm (spline plus
//! Monte Carlo correction), together with the eigenvalue reference and the
//! quadrature oracle used to check them.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::approx::{
    approximate_eigenvector, shift_nonnegative, PiecewiseLinearFn, SplinePotential,
};
use crate::error::{Error, Result};
use crate::potential::{Counted, Evaluate, Potential};
use crate::rng::{Purpose, Stream};
use crate::tridiag::{discretize, eigenvalue, smallest_eigenvalue, EigenEstimate};

/// Tunable multipliers of the asymptotic parameter choices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    /// Worst-case grid: `n = 2^k - 1 >= C_w eps^-1/2`.
    pub c_w: f64,
    /// Randomized spline knots and Monte Carlo samples: `m = k = C_m eps^-2/5`.
    pub c_m: f64,
    /// Eigenvector grid: `n_z = C_z eps^-1/10` (randomized), `C_z eps^-1/6` (bit query).
    pub c_z: f64,
    /// Bit-query spline knots: `m = C_b eps^-1/3`.
    pub c_b: f64,
    /// Bit-query points per spline interval: `k = C_k eps^-1/6`.
    pub c_k: f64,
    /// Bound on the bit-query integrand: `|f| <= C_M m^-2`.
    pub c_bound: f64,
}

impl Default for Constants {
    fn default() -> Self {
        Self {
            c_w: 4.5,
            c_m: 2.0,
            c_z: 4.0,
            c_b: 2.0,
            c_k: 1.0,
            c_bound: 4.0,
        }
    }
}

impl Constants {
    pub const NAMES: [&'static str; 6] = ["C_w", "C_m", "C_z", "C_b", "C_k", "C_M"];

    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        if !(value.is_finite() && value > 0.0) {
            return Err(Error::Config(format!(
                "constant {name} must be positive, got {value}"
            )));
        }
        let slot = match name {
            "C_w" => &mut self.c_w,
            "C_m" => &mut self.c_m,
            "C_z" => &mut self.c_z,
            "C_b" => &mut self.c_b,
            "C_k" => &mut self.c_k,
            "C_M" => &mut self.c_bound,
            _ => return Err(Error::Config(format!("unknown constant {name:?}"))),
        };
        *slot = value;
        Ok(())
    }

    pub fn to_map(&self) -> BTreeMap<String, f64> {
        let vals = [
            self.c_w,
            self.c_m,
            self.c_z,
            self.c_b,
            self.c_k,
            self.c_bound,
        ];
        Self::NAMES
            .iter()
            .zip(vals)
            .map(|(k, v)| (k.to_string(), v))
            .collect()
    }
}

/// Exact tallies of what a solve consumed. `classical_ops` is an
/// instrumented approximation (one unit per arithmetic operation in the
/// dominant loops).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceReport {
    pub function_values: u64,
    pub classical_ops: u64,
    pub bit_queries: u64,
    pub power_queries: u64,
    pub qubits: u64,
    pub repetitions: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub estimate: f64,
    pub error_budget: f64,
    pub resources: ResourceReport,
    pub seed: Option<u64>,
}

/// Smallest `2^k - 1` that is at least `x`.
pub fn next_power_of_two_minus_one(x: usize) -> usize {
    (x + 1).next_power_of_two() - 1
}

/// Grid dimension of the worst-case algorithm.
pub fn worst_case_dimension(eps: f64, c: &Constants) -> usize {
    next_power_of_two_minus_one((c.c_w * eps.powf(-0.5)).ceil() as usize)
}

fn bisection_ops(n: usize, est: &EigenEstimate) -> u64 {
    // n divisions/subtractions per Sturm sweep, ~4 flops each.
    (n as u64) * (1 + 4 * est.iterations as u64)
}

/// `lambda_1(M_p)` for a grid of dimension `n`, bisected to `tol`.
fn discrete_eigenvalue<E: Evaluate + ?Sized>(p: &E, n: usize, tol: f64) -> (EigenEstimate, u64) {
    let t = discretize(p, n);
    let est = smallest_eigenvalue(&t, tol);
    let ops = bisection_ops(n, &est);
    (est, ops)
}

pub fn solve_worst_case(q: &Potential, eps: f64, c: &Constants) -> Result<SolveResult> {
    if !(eps > 1e-12 && eps < 1.0) {
        return Err(Error::Config(format!("eps {eps} outside (1e-12, 1)")));
    }
    let n = worst_case_dimension(eps, c);
    let counted = Counted::new(q);
    let (est, ops) = discrete_eigenvalue(&counted, n, eps / 2.0);
    Ok(SolveResult {
        estimate: est.value,
        error_budget: eps,
        resources: ResourceReport {
            function_values: counted.calls(),
            classical_ops: ops,
            ..Default::default()
        },
        seed: None,
    })
}

/// Sample mean of `(q(x) - q_bar(x)) z(x)^2` at `k` uniform points.
pub fn monte_carlo_correction<Q, B, Z>(q: &Q, qbar: &B, z: &Z, k: usize, rng: &mut Stream) -> f64
where
    Q: Evaluate + ?Sized,
    B: Evaluate + ?Sized,
    Z: Evaluate + ?Sized,
{
    assert!(k >= 1, "need at least one sample");
    let sum: f64 = (0..k)
        .map(|_| {
            let x = rng.uniform();
            let zx = z.value(x);
            (q.value(x) - qbar.value(x)) * zx * zx
        })
        .sum();
    sum / k as f64
}

/// Parameters the randomized solver derived from `eps`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RandomizedPlan {
    /// Spline intervals; also the number of Monte Carlo samples.
    pub m: usize,
    /// Grid used for `lambda(q_bar)`: the worst-case grid for `eps/4`.
    pub n_lambda: usize,
    /// Grid used for the eigenvector approximation.
    pub n_z: usize,
}

impl RandomizedPlan {
    pub fn new(eps: f64, c: &Constants) -> Self {
        Self {
            m: ((c.c_m * eps.powf(-0.4)).ceil() as usize).max(3),
            n_lambda: worst_case_dimension(eps / 4.0, c),
            n_z: ((c.c_z * eps.powf(-0.1)).ceil() as usize).max(2),
        }
    }
}

/// Spline surrogate, its eigenvalue, and the eigenfunction approximation:
/// the deterministic part shared by the randomized and bit-query solvers.
pub(crate) struct Surrogate {
    pub qbar: SplinePotential,
    pub lambda_qbar: f64,
    pub z: PiecewiseLinearFn,
    pub ops: u64,
}

pub(crate) fn build_surrogate<E: Evaluate + ?Sized>(
    q: &E,
    m: usize,
    n_lambda: usize,
    lambda_tol: f64,
    n_z: usize,
) -> Result<Surrogate> {
    let qbar = shift_nonnegative(SplinePotential::sample(q, m)?);
    let (lam, ops_lam) = discrete_eigenvalue(&qbar, n_lambda, lambda_tol);
    let delta = (n_z as f64).powf(-2.5);
    let tz = discretize(&qbar, n_z);
    let lam_bar = smallest_eigenvalue(&tz, delta);
    let z = approximate_eigenvector(&tz, lam_bar.value)?;
    let nz = n_z as u64;
    let ops = 8 * m as u64 + ops_lam + bisection_ops(n_z, &lam_bar) + 5 * nz * nz;
    Ok(Surrogate {
        qbar,
        lambda_qbar: lam.value,
        z: z.function,
        ops,
    })
}

pub fn solve_randomized(q: &Potential, eps: f64, seed: u64, c: &Constants) -> Result<SolveResult> {
    if !(eps > 1e-10 && eps < 1.0) {
        return Err(Error::Config(format!("eps {eps} outside (1e-10, 1)")));
    }
    let plan = RandomizedPlan::new(eps, c);
    let counted = Counted::new(q);
    let s = build_surrogate(&counted, plan.m, plan.n_lambda, eps / 8.0, plan.n_z)?;
    let mut rng = Stream::derive(seed, Purpose::MonteCarlo, 0);
    let corr = monte_carlo_correction(&counted, &s.qbar, &s.z, plan.m, &mut rng);
    Ok(SolveResult {
        estimate: s.lambda_qbar + corr,
        error_budget: eps,
        resources: ResourceReport {
            function_values: counted.calls(),
            classical_ops: s.ops + 12 * plan.m as u64,
            ..Default::default()
        },
        seed: Some(seed),
    })
}

const GL5_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683_1,
    0.0,
    0.538_469_310_105_683_1,
    0.906_179_845_938_664,
];
const GL5_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

/// Composite 5-point Gauss-Legendre rule for `int_0^1 f(x) w(x) dx`.
pub fn weighted_integral_oracle(
    f: impl Fn(f64) -> f64,
    weight: impl Fn(f64) -> f64,
    panels: usize,
) -> Result<f64> {
    if panels < 16 {
        return Err(Error::Config(format!(
            "quadrature needs >= 16 panels, got {panels}"
        )));
    }
    let h = 1.0 / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = (p as f64 + 0.5) * h;
        let panel: f64 = GL5_NODES
            .iter()
            .zip(GL5_WEIGHTS)
            .map(|(&t, w)| {
                let x = mid + 0.5 * h * t;
                w * f(x) * weight(x)
            })
            .sum();
        total += 0.5 * h * panel;
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReferenceMethod {
    ClosedForm,
    Richardson,
}

/// Ground-truth `lambda(q)` used to score the solvers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceValue {
    pub potential: String,
    pub lambda_ref: f64,
    pub method: ReferenceMethod,
    pub n_used: usize,
}

/// Grid sizes of the default Richardson reference.
pub const RICHARDSON_GRIDS: (usize, usize) = (1 << 13, 1 << 14);

/// Exponent-2 Richardson extrapolation of `lambda_1(M_q^(n))` in the mesh
/// width `h = 1/(n+1)`. For `(n_f + 1) = 2 (n_c + 1)` this is
/// `(4 lambda_f - lambda_c)/3`.
pub fn richardson<E: Evaluate + ?Sized>(q: &E, n_coarse: usize, n_fine: usize) -> f64 {
    let lc = eigenvalue(&discretize(q, n_coarse), 0);
    let lf = eigenvalue(&discretize(q, n_fine), 0);
    let rho2 = ((n_fine + 1) as f64 / (n_coarse + 1) as f64).powi(2);
    (rho2 * lf - lc) / (rho2 - 1.0)
}

/// `pi^2 + c` for constants, Richardson at `2^13`/`2^14` otherwise.
pub fn reference_eigenvalue(q: &Potential) -> ReferenceValue {
    match q.as_constant() {
        Some(c) => ReferenceValue {
            potential: q.label().to_string(),
            lambda_ref: std::f64::consts::PI.powi(2) + c,
            method: ReferenceMethod::ClosedForm,
            n_used: 0,
        },
        None => {
            let (nc, nf) = RICHARDSON_GRIDS;
            ReferenceValue {
                potential: q.label().to_string(),
                lambda_ref: richardson(q, nc, nf),
                method: ReferenceMethod::Richardson,
                n_used: nf,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn quadrature_examples() {
        assert_eq!(weighted_integral_oracle(|_| 0.0, |_| 1.0, 16).unwrap(), 0.0);
        let v = weighted_integral_oracle(|x| x, |x| 2.0 * (PI * x).sin().powi(2), 256).unwrap();
        assert!((v - 0.5).abs() < 1e-12);
        let v = weighted_integral_oracle(|x| (PI * x).sin().powi(2), |_| 1.0, 256).unwrap();
        assert!((v - 0.5).abs() < 1e-12);
        assert!(weighted_integral_oracle(|x| x, |_| 1.0, 8).is_err());
    }

    #[test]
    fn bump_integral_identity() {
        let q = Potential::parse("bump:4:1011:0.5").unwrap();
        let spec = q.bump_spec().unwrap().clone();
        let v = weighted_integral_oracle(|x| spec.f_b(x).0, |_| 1.0, 256).unwrap();
        assert!((v - spec.integral_f_b()).abs() < 1e-10);
    }

    #[test]
    fn worst_case_dimension_rounds_to_power_of_two_minus_one() {
        assert_eq!(next_power_of_two_minus_one(1), 1);
        assert_eq!(next_power_of_two_minus_one(63), 63);
        assert_eq!(next_power_of_two_minus_one(64), 127);
        let c = Constants {
            c_w: 1.0,
            ..Default::default()
        };
        assert_eq!(worst_case_dimension(1e-2, &c), 15);
    }

    #[test]
    fn worst_case_constants() {
        let c = Constants::default();
        for &(k, want) in &[(0.5, PI * PI + 0.5), (0.0, PI * PI)] {
            let r = solve_worst_case(&Potential::constant(k), 1e-4, &c).unwrap();
            assert!((r.estimate - want).abs() < 1e-3);
            assert_eq!(
                r.resources.function_values,
                worst_case_dimension(1e-4, &c) as u64
            );
            assert_eq!(
                r.resources.bit_queries + r.resources.power_queries + r.resources.qubits,
                0
            );
        }
        assert!(solve_worst_case(&Potential::constant(0.0), 1.5, &c).is_err());
    }

    #[test]
    fn randomized_is_exact_for_linear_potentials() {
        let q = Potential::polynomial(vec![0.2, 0.5]);
        let c = Constants::default();
        let base = solve_randomized(&q, 1e-3, 0, &c).unwrap();
        for seed in 1..10 {
            let r = solve_randomized(&q, 1e-3, seed, &c).unwrap();
            assert!((r.estimate - base.estimate).abs() < 1e-14);
        }
        let plan = RandomizedPlan::new(1e-3, &c);
        assert_eq!(base.resources.function_values, (2 * plan.m + 1) as u64);
    }

    #[test]
    fn monte_carlo_trivial_integrands() {
        let q = Potential::constant(0.3);
        let mut rng = Stream::new(3);
        assert_eq!(
            monte_carlo_correction(&q, &q, &|_: f64| 1.0, 50, &mut rng),
            0.0
        );
        let q1 = |_: f64| 0.75;
        let q2 = |_: f64| 0.5;
        for k in [1, 7, 64, 1000] {
            let v = monte_carlo_correction(&q1, &q2, &|_: f64| 1.0, k, &mut rng);
            assert_eq!(v, 0.25);
        }
    }

    #[test]
    fn constants_overrides() {
        let mut c = Constants::default();
        c.set("C_w", 2.0).unwrap();
        assert_eq!(c.c_w, 2.0);
        assert!(c.set("C_x", 1.0).is_err());
        assert!(c.set("C_m", -1.0).is_err());
        assert_eq!(c.to_map().len(), 6);
    }

    #[test]
    fn reference_closed_form_and_richardson_agree_for_constants() {
        let q = Potential::constant(0.5);
        let closed = reference_eigenvalue(&q);
        assert_eq!(closed.method, ReferenceMethod::ClosedForm);
        let r = richardson(&q, 1 << 12, 1 << 13);
        assert!(
            (r - closed.lambda_ref).abs() < 1e-10,
            "{}",
            r - closed.lambda_ref
        );
    }
}
