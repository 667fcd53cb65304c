//! Quantum-setting solvers: phase estimation with power queries on a
//! Jaksch-Papageorgiou initial state, and the bit-query hybrid that replaces
//! the Monte Carlo correction by a simulated quantum summation.

use std::f64::consts::PI;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::classical::{
    build_surrogate, worst_case_dimension, Constants, ResourceReport, SolveResult,
};
use crate::error::{Error, Result};
use crate::jpstate::{
    calibrate_n0, coarse_state, replicate_state, Calibration, TARGET_PROBABILITY,
};
use crate::potential::{catalog, Counted, Evaluate, Potential};
use crate::qkernel::{
    check_budget, fractional_distance, pe_distribution, sample_outcome, OutcomeDistribution,
    PhaseSpectrum, DEFAULT_GAMMA,
};
use crate::rng::{Purpose, Stream};
use crate::tridiag::{discretize, dot, eigendecompose};

/// Calibration over the built-in catalog, computed once per process.
pub fn default_calibration() -> Result<Calibration> {
    static CELL: OnceLock<std::result::Result<Calibration, String>> = OnceLock::new();
    CELL.get_or_init(|| calibrate_n0(&catalog(), TARGET_PROBABILITY).map_err(|e| e.to_string()))
        .clone()
        .map_err(Error::Infeasible)
}

/// Register sizes of the power-query algorithm for a target accuracy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PowerQueryPlan {
    /// Output bits, `ceil(log2 1/eps)` rounded up to even.
    pub m: u32,
    /// Fine dimension `2^(m/2)`.
    pub n: usize,
    pub n0: usize,
    pub k0: u32,
    /// Replication qubits `m/2 - k0`.
    pub s: u32,
    pub qubits: u32,
}

impl PowerQueryPlan {
    pub fn bits_for(eps: f64) -> u32 {
        let m = (-eps.log2()).ceil().max(2.0) as u32;
        m + m % 2
    }

    pub fn new(eps: f64, n0: usize) -> Result<Self> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::Config(format!("eps {eps} outside (0, 1)")));
        }
        Self::with_bits(Self::bits_for(eps), n0)
    }

    pub fn with_bits(m: u32, n0: usize) -> Result<Self> {
        if !m.is_multiple_of(2) || !(2..=24).contains(&m) {
            return Err(Error::Config(format!(
                "output bits {m} must be even and in [2, 24]"
            )));
        }
        if !n0.is_power_of_two() || n0 < 2 {
            return Err(Error::Config(format!(
                "coarse dimension {n0} is not a power of two >= 2"
            )));
        }
        let k0 = n0.trailing_zeros();
        if k0 > m / 2 {
            return Err(Error::Infeasible(format!(
                "coarse dimension {n0} exceeds the fine dimension 2^{} for m = {m}",
                m / 2
            )));
        }
        Ok(Self {
            m,
            n: 1 << (m / 2),
            n0,
            k0,
            s: m / 2 - k0,
            qubits: m + m / 2,
        })
    }

    pub fn effective_eps(&self) -> f64 {
        (-(self.m as f64)).exp2()
    }
}

/// Everything the power-query solver knows before measuring.
#[derive(Debug, Clone)]
pub struct PowerQueryAnalysis {
    pub plan: PowerQueryPlan,
    pub distribution: OutcomeDistribution,
    /// `lambda_1(M_q^(n))`.
    pub lambda_discrete: f64,
    pub phase: f64,
    /// Overlap of the initial state with the smallest eigenvector.
    pub d: f64,
    pub function_values: u64,
}

impl PowerQueryAnalysis {
    /// Exact probability of `Delta(j/2^m, phi_1) <= 2^-m`.
    pub fn success_probability(&self) -> f64 {
        self.distribution.mass_near(self.phase, 1)
    }

    /// Exact probability that the median of `repetitions` independent
    /// outcomes lands in the success set.
    pub fn median_success_probability(&self, repetitions: u32) -> f64 {
        let big = (1u64 << self.plan.m) as f64;
        let radius = 1.0 / big * (1.0 + 1e-12);
        let (mut below, mut inside, mut above) = (0.0, 0.0, 0.0);
        for (j, &p) in self.distribution.probs().iter().enumerate() {
            let x = j as f64 / big;
            if fractional_distance(x, self.phase) <= radius {
                inside += p;
            } else if x < self.phase {
                below += p;
            } else {
                above += p;
            }
        }
        median_in_interval(below, inside, above, repetitions)
    }

    pub fn estimate_for(&self, outcome: usize) -> f64 {
        2.0 * PI * outcome as f64 / (1u64 << self.plan.m) as f64 / DEFAULT_GAMMA
    }
}

/// `P(median in S)` for `r` iid draws that fall below, inside or above the
/// interval `S` with the given probabilities.
pub fn median_in_interval(below: f64, inside: f64, above: f64, r: u32) -> f64 {
    assert!(r % 2 == 1, "median needs an odd number of repetitions");
    let h = (r - 1) / 2;
    let ln_fact = |k: u32| (1..=k).map(|i| (i as f64).ln()).sum::<f64>();
    let mut total = 0.0;
    for a in 0..=h {
        for b in 0..=h {
            let c = r - a - b;
            let coef = (ln_fact(r) - ln_fact(a) - ln_fact(b) - ln_fact(c)).exp();
            total += coef * below.powi(a as i32) * above.powi(b as i32) * inside.powi(c as i32);
        }
    }
    total
}

/// Builds the JP state, the phase spectrum of `M_q^(n)` and the exact
/// outcome distribution.
pub fn analyze_power_query(q: &Potential, plan: &PowerQueryPlan) -> Result<PowerQueryAnalysis> {
    check_budget(plan.n as u128 * (1u128 << plan.m))?;
    let counted = Counted::new(q);
    let coarse = coarse_state(&counted, plan.n0)?;
    let state = replicate_state(&coarse, plan.s);
    let t = discretize(&counted, plan.n);
    let sd = eigendecompose(&t)?;
    let mut overlaps: Vec<f64> = sd.vectors.iter().map(|v| dot(v, &state.vector)).collect();
    // Inverse-iteration vectors are orthonormal to ~1e-14; renormalize so the
    // overlap weights sum to one exactly.
    let total = overlaps.iter().map(|d| d * d).sum::<f64>().sqrt();
    overlaps.iter_mut().for_each(|d| *d /= total);
    let spectrum = PhaseSpectrum::from_eigenvalues(&sd.values, &overlaps, DEFAULT_GAMMA)?;
    let distribution = pe_distribution(&spectrum, plan.m)?;
    Ok(PowerQueryAnalysis {
        plan: *plan,
        distribution,
        lambda_discrete: sd.values[0],
        phase: spectrum.phases()[0],
        d: overlaps[0],
        function_values: counted.calls(),
    })
}

/// Exact success probability with the default calibration.
pub fn power_query_success_probability(q: &Potential, eps: f64) -> Result<f64> {
    let plan = PowerQueryPlan::new(eps, default_calibration()?.n0)?;
    Ok(analyze_power_query(q, &plan)?.success_probability())
}

#[derive(Debug, Clone)]
pub struct PowerQueryRun {
    pub result: SolveResult,
    pub analysis: PowerQueryAnalysis,
    pub outcomes: Vec<usize>,
}

pub fn run_power_query(
    q: &Potential,
    plan: &PowerQueryPlan,
    seed: u64,
    repetitions: u32,
) -> Result<PowerQueryRun> {
    if repetitions.is_multiple_of(2) {
        return Err(Error::Config(format!(
            "repetitions must be odd, got {repetitions}"
        )));
    }
    let analysis = analyze_power_query(q, plan)?;
    let outcomes: Vec<usize> = (0..repetitions)
        .map(|r| {
            sample_outcome(
                &analysis.distribution,
                &mut Stream::derive(seed, Purpose::Measurement, r),
            )
        })
        .collect();
    let mut estimates: Vec<f64> = outcomes.iter().map(|&j| analysis.estimate_for(j)).collect();
    estimates.sort_by(f64::total_cmp);
    let n = plan.n as u64;
    let result = SolveResult {
        estimate: estimates[estimates.len() / 2],
        error_budget: plan.effective_eps(),
        resources: ResourceReport {
            function_values: analysis.function_values,
            classical_ops: 10 * n * n + n * (1u64 << plan.m),
            power_queries: plan.m as u64 * repetitions as u64,
            qubits: plan.qubits as u64,
            repetitions: repetitions as u64,
            ..Default::default()
        },
        seed: Some(seed),
    };
    Ok(PowerQueryRun {
        result,
        analysis,
        outcomes,
    })
}

pub fn solve_power_query(
    q: &Potential,
    eps: f64,
    seed: u64,
    repetitions: u32,
) -> Result<SolveResult> {
    let plan = PowerQueryPlan::new(eps, default_calibration()?.n0)?;
    Ok(run_power_query(q, &plan, seed, repetitions)?.result)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SumPath {
    Classical,
    AmplitudeEstimation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantumSum {
    /// Approximation of the mean `S_N = (1/N) sum f_i`.
    pub value: f64,
    pub bit_queries: u64,
    /// Bits of the amplitude-estimation register.
    pub t: u32,
    pub path: SumPath,
}

/// Register bits for target accuracy `eps` on values bounded by `bound`.
pub fn amplitude_bits(bound: f64, eps: f64) -> u32 {
    (2.0 * PI * bound / eps).log2().ceil().max(0.0) as u32 + 2
}

/// `sin^2(pi y / 2^t)` with the quarter-turn values exact.
fn decode_amplitude(y: usize, t: u32) -> f64 {
    let big = 1usize << t;
    match (4 * y).checked_rem(big) {
        Some(0) if t >= 2 => [0.0, 0.5, 1.0, 0.5][4 * y / big],
        _ => (PI * y as f64 / big as f64).sin().powi(2),
    }
}

/// Amplitude-estimation simulation of the mean, regardless of cost.
pub fn quantum_sum_amplitude_estimation(
    samples: &[f64],
    bound: f64,
    eps: f64,
    rng: &mut Stream,
) -> Result<QuantumSum> {
    if samples.is_empty() || !(bound > 0.0) || !(eps > 0.0) {
        return Err(Error::Config(
            "quantum sum needs samples, bound > 0 and eps > 0".into(),
        ));
    }
    let t = amplitude_bits(bound, eps);
    let a = (samples
        .iter()
        .map(|v| (v.clamp(-bound, bound) + bound) / (2.0 * bound))
        .sum::<f64>()
        / samples.len() as f64)
        .clamp(0.0, 1.0);
    let omega = match a {
        0.0 => 0.0,
        0.5 => 0.25,
        1.0 => 0.5,
        _ => a.sqrt().asin() / PI,
    };
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let mirrored = (1.0 - omega).rem_euclid(1.0);
    let spectrum = PhaseSpectrum::new(
        vec![omega, if mirrored >= 1.0 { 0.0 } else { mirrored }],
        vec![r.into(), r.into()],
    )?;
    let dist = pe_distribution(&spectrum, t)?;
    let y = sample_outcome(&dist, rng);
    Ok(QuantumSum {
        value: 2.0 * bound * decode_amplitude(y, t) - bound,
        bit_queries: 1 << t,
        t,
        path: SumPath::AmplitudeEstimation,
    })
}

/// Mean of `samples` (each `|f_i| <= bound`) to within `eps` with probability
/// at least 3/4, using `min(N, O(bound/eps))` bit queries: exact summation
/// when the amplitude-estimation register would need `2^t >= 2N` queries.
pub fn quantum_sum(samples: &[f64], bound: f64, eps: f64, rng: &mut Stream) -> QuantumSum {
    let n = samples.len().max(1) as u64;
    let t = amplitude_bits(bound, eps);
    if t >= 25 || (1u64 << t) >= 2 * n {
        return QuantumSum {
            value: samples.iter().sum::<f64>() / n as f64,
            bit_queries: samples.len() as u64,
            t,
            path: SumPath::Classical,
        };
    }
    quantum_sum_amplitude_estimation(samples, bound, eps, rng).expect("validated register size")
}

/// Extra ancilla qubits of the bit-query circuit beyond the index and
/// amplitude registers (oracle output, comparison bit, Grover flag).
pub const BIT_QUERY_WORKSPACE_QUBITS: u64 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BitQueryPlan {
    /// Spline intervals.
    pub m: usize,
    /// Points per spline interval.
    pub k: usize,
    /// Quantum-summation nodes `(m+1) k`.
    pub points: usize,
    pub n_lambda: usize,
    pub n_z: usize,
}

impl BitQueryPlan {
    pub fn new(eps: f64, c: &Constants) -> Self {
        let m = ((c.c_b * eps.powf(-1.0 / 3.0)).ceil() as usize).max(3);
        let k = ((c.c_k * eps.powf(-1.0 / 6.0)).ceil() as usize).max(1);
        Self {
            m,
            k,
            points: (m + 1) * k,
            n_lambda: worst_case_dimension(eps / 4.0, c),
            n_z: ((c.c_z * eps.powf(-1.0 / 6.0)).ceil() as usize).max(2),
        }
    }

    pub fn bound(&self, c: &Constants) -> f64 {
        c.c_bound / (self.m * self.m) as f64
    }
}

#[derive(Debug, Clone)]
pub struct BitQueryRun {
    pub result: SolveResult,
    pub plan: BitQueryPlan,
    pub lambda_surrogate: f64,
    pub sum: QuantumSum,
    /// Exact mean of the summation samples.
    pub exact_mean: f64,
}

pub fn run_bit_query(q: &Potential, eps: f64, seed: u64, c: &Constants) -> Result<BitQueryRun> {
    if !(eps > 1e-8 && eps < 1.0) {
        return Err(Error::Config(format!("eps {eps} outside (1e-8, 1)")));
    }
    let plan = BitQueryPlan::new(eps, c);
    let counted = Counted::new(q);
    let s = build_surrogate(&counted, plan.m, plan.n_lambda, eps / 8.0, plan.n_z)?;
    let bound = plan.bound(c);
    let n = plan.points;
    let samples: Vec<f64> = (0..n)
        .map(|j| {
            let x = (j + 1) as f64 / n as f64;
            let z = s.z.value(x);
            ((counted.value(x) - s.qbar.value(x)) * z * z).clamp(-bound, bound)
        })
        .collect();
    let exact_mean = samples.iter().sum::<f64>() / n as f64;
    let mut rng = Stream::derive(seed, Purpose::AmplitudeEstimation, 0);
    let sum = quantum_sum(&samples, bound, eps / 4.0, &mut rng);
    let index_qubits = (n as f64).log2().ceil() as u64;
    let result = SolveResult {
        estimate: s.lambda_qbar + sum.value,
        error_budget: eps,
        resources: ResourceReport {
            function_values: counted.calls(),
            classical_ops: s.ops + 6 * n as u64,
            bit_queries: 2 * sum.bit_queries,
            qubits: index_qubits + sum.t as u64 + BIT_QUERY_WORKSPACE_QUBITS,
            ..Default::default()
        },
        seed: Some(seed),
    };
    Ok(BitQueryRun {
        result,
        plan,
        lambda_surrogate: s.lambda_qbar,
        sum,
        exact_mean,
    })
}

pub fn solve_bit_query(q: &Potential, eps: f64, seed: u64, c: &Constants) -> Result<SolveResult> {
    Ok(run_bit_query(q, eps, seed, c)?.result)
}
