//! Phase-estimation mathematics for `W = exp(i gamma M_q)`: the kernel `g`,
//! the fractional phase distance, exact outcome distributions, a gate-level
//! statevector validator, and measurement sampling.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::Stream;
use crate::tridiag::{eigendecompose, TridiagonalSymmetric};

pub const DEFAULT_GAMMA: f64 = 0.5;

/// Default ceiling on `spectrum size * 2^m` kernel evaluations.
pub const DEFAULT_KERNEL_BUDGET: u64 = 1 << 26;

/// Environment variable overriding [`DEFAULT_KERNEL_BUDGET`].
pub const BUDGET_ENV: &str = "SLEIG_KERNEL_BUDGET";

const EXACT_MATCH: f64 = 1.0 / 4_503_599_627_370_496.0; // 2^-52

pub const MAX_STATEVECTOR_BITS: u32 = 8;
pub const MAX_STATEVECTOR_DIM: usize = 16;

/// The active kernel budget: `SLEIG_KERNEL_BUDGET` if set and valid.
pub fn kernel_budget() -> u64 {
    std::env::var(BUDGET_ENV)
        .ok()
        .and_then(|s| s.trim().parse::<u64>().ok())
        .filter(|&b| b > 0)
        .unwrap_or(DEFAULT_KERNEL_BUDGET)
}

/// Fails with [`Error::Budget`] when `evaluations` exceeds the active budget.
pub fn check_budget(evaluations: u128) -> Result<()> {
    let limit = kernel_budget() as u128;
    if evaluations > limit {
        return Err(Error::Budget {
            requested: evaluations,
            limit,
        });
    }
    Ok(())
}

fn check_bits(m: u32) -> Result<()> {
    if !(1..=24).contains(&m) {
        return Err(Error::Config(format!(
            "output register bits {m} outside [1, 24]"
        )));
    }
    Ok(())
}

/// `min_{x in Z} |x + phi1 - phi0|`.
pub fn fractional_distance(phi0: f64, phi1: f64) -> f64 {
    let d = (phi1 - phi0).rem_euclid(1.0);
    d.min(1.0 - d)
}

/// Amplitude `2^-m sum_k exp(2 pi i k (phi - ell/2^m))` that phase estimation
/// with `m` output bits assigns to outcome `ell` for eigenphase `phi`.
pub fn kernel_g(phi: f64, ell: u64, m: u32) -> Complex64 {
    let big = (1u64 << m) as f64;
    let x = phi - ell as f64 / big;
    if fractional_distance(0.0, x) < EXACT_MATCH {
        return Complex64::new(1.0, 0.0);
    }
    let ratio = (PI * big * x).sin() / (big * (PI * x).sin());
    Complex64::from_polar(ratio, PI * (big - 1.0) * x)
}

/// Eigenphases `phi_j` in `[0,1)` with the initial-state overlaps `d_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSpectrum {
    phases: Vec<f64>,
    overlaps: Vec<Complex64>,
}

fn wrap_phase(phi: f64) -> f64 {
    let r = phi.rem_euclid(1.0);
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

impl PhaseSpectrum {
    pub fn new(phases: Vec<f64>, overlaps: Vec<Complex64>) -> Result<Self> {
        if phases.len() != overlaps.len() || phases.is_empty() {
            return Err(Error::Config(
                "phases and overlaps must be nonempty and of equal length".into(),
            ));
        }
        if let Some(p) = phases.iter().find(|p| !(0.0..1.0).contains(*p)) {
            return Err(Error::Config(format!("phase {p} outside [0, 1)")));
        }
        let total: f64 = overlaps.iter().map(|d| d.norm_sqr()).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Config(format!(
                "overlaps have squared norm {total}, expected 1"
            )));
        }
        Ok(Self { phases, overlaps })
    }

    /// `phi_j = gamma lambda_j / (2 pi) mod 1` with real overlaps.
    pub fn from_eigenvalues(eigenvalues: &[f64], overlaps: &[f64], gamma: f64) -> Result<Self> {
        let phases = eigenvalues
            .iter()
            .map(|l| wrap_phase(gamma * l / (2.0 * PI)))
            .collect();
        Self::new(
            phases,
            overlaps.iter().map(|&d| Complex64::new(d, 0.0)).collect(),
        )
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn overlaps(&self) -> &[Complex64] {
        &self.overlaps
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }
}

/// Measurement distribution of an `m`-bit output register.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeDistribution {
    m: u32,
    probs: Vec<f64>,
}

impl OutcomeDistribution {
    pub fn new(m: u32, probs: Vec<f64>) -> Result<Self> {
        if probs.len() as u64 != 1u64 << m {
            return Err(Error::Config(format!(
                "{} probabilities for {m} bits",
                probs.len()
            )));
        }
        if probs.iter().any(|p| !(*p >= 0.0)) {
            return Err(Error::Config("negative or NaN probability".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::Config(format!("probabilities sum to {total}")));
        }
        Ok(Self { m, probs })
    }

    pub fn point_mass(m: u32, at: usize) -> Self {
        let mut probs = vec![0.0; 1 << m];
        probs[at] = 1.0;
        Self { m, probs }
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Probability mass of the outcomes selected by `pred`.
    pub fn mass_where(&self, pred: impl Fn(usize) -> bool) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .filter(|(j, _)| pred(*j))
            .map(|(_, p)| p)
            .sum()
    }

    /// Mass of `{j : Delta(j/2^m, phi) <= k/2^m}`.
    pub fn mass_near(&self, phi: f64, k: u32) -> f64 {
        let big = (1u64 << self.m) as f64;
        let radius = k as f64 / big;
        // Outcomes sitting exactly on the boundary must count; allow rounding.
        self.mass_where(|j| fractional_distance(j as f64 / big, phi) <= radius * (1.0 + 1e-12))
    }

    pub fn total_variation(&self, other: &Self) -> f64 {
        assert_eq!(self.m, other.m, "distributions over different registers");
        0.5 * self
            .probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
    }
}

/// Exact `p_j = sum_l |d_l|^2 |g(phi_l, j)|^2`.
pub fn pe_distribution(spec: &PhaseSpectrum, m: u32) -> Result<OutcomeDistribution> {
    check_bits(m)?;
    check_budget(spec.len() as u128 * (1u128 << m))?;
    let weights: Vec<f64> = spec.overlaps.iter().map(|d| d.norm_sqr()).collect();
    let probs: Vec<f64> = (0..1u64 << m)
        .into_par_iter()
        .map(|j| {
            spec.phases
                .iter()
                .zip(&weights)
                .filter(|(_, w)| **w > 0.0)
                .map(|(&phi, w)| w * kernel_g(phi, j, m).norm_sqr())
                .sum()
        })
        .collect();
    OutcomeDistribution::new(m, probs)
}

/// Dense state of `nu` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub nu: u32,
    pub amplitudes: Vec<Complex64>,
}

impl StateVector {
    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|a| a.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

fn apply_hadamard(state: &mut [Complex64], bit: u32) {
    let mask = 1usize << bit;
    let r = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..state.len() {
        if i & mask == 0 {
            let (a, b) = (state[i], state[i | mask]);
            state[i] = (a + b) * r;
            state[i | mask] = (a - b) * r;
        }
    }
}

fn apply_controlled_phase(state: &mut [Complex64], a: u32, b: u32, angle: f64) {
    let mask = (1usize << a) | (1usize << b);
    let phase = Complex64::from_polar(1.0, angle);
    for (i, amp) in state.iter_mut().enumerate() {
        if i & mask == mask {
            *amp *= phase;
        }
    }
}

fn apply_swap(state: &mut [Complex64], a: u32, b: u32) {
    let (ma, mb) = (1usize << a, 1usize << b);
    for i in 0..state.len() {
        if i & ma != 0 && i & mb == 0 {
            state.swap(i, (i & !ma) | mb);
        }
    }
}

/// Inverse QFT on qubits `offset..offset+m` of `state` (qubit `offset + j`
/// carries bit `j` of the register value), built from Hadamards, controlled
/// phases and swaps. Maps `|t>` to `2^-m/2 sum_l exp(-2 pi i t l / 2^m) |l>`.
pub(crate) fn inverse_qft(state: &mut [Complex64], offset: u32, m: u32) {
    for j in 0..m / 2 {
        apply_swap(state, offset + j, offset + m - 1 - j);
    }
    for j in 0..m {
        for k in (0..j).rev() {
            let angle = -2.0 * PI / (1u64 << (j - k + 1)) as f64;
            apply_controlled_phase(state, offset + k, offset + j, angle);
        }
        apply_hadamard(state, offset + j);
    }
}

/// Brute-force phase estimation: returns the final `(m + log2 n)`-qubit state
/// and the marginal distribution of the top register. Uses exactly `m`
/// controlled powers `W^(2^j)`.
pub fn pe_statevector(
    t: &TridiagonalSymmetric,
    initial: &[f64],
    m: u32,
    gamma: f64,
) -> Result<(StateVector, OutcomeDistribution)> {
    let n = t.n();
    if m == 0 || m > MAX_STATEVECTOR_BITS || n > MAX_STATEVECTOR_DIM || !n.is_power_of_two() {
        return Err(Error::Guard(format!(
            "statevector needs 1 <= m <= {MAX_STATEVECTOR_BITS} and n a power of two <= {MAX_STATEVECTOR_DIM}; got m = {m}, n = {n}"
        )));
    }
    if initial.len() != n {
        return Err(Error::Config(format!(
            "initial state has length {}, expected {n}",
            initial.len()
        )));
    }
    let norm: f64 = initial.iter().map(|x| x * x).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::Config(format!("initial state has norm {norm}")));
    }
    let low = n.trailing_zeros();
    let dim = n << m;
    let mut state = vec![Complex64::new(0.0, 0.0); dim];
    for (b, &v) in initial.iter().enumerate() {
        state[b] = Complex64::new(v, 0.0);
    }
    for j in 0..m {
        apply_hadamard(&mut state, low + j);
    }

    let spectral = eigendecompose(t)?;
    for j in 0..m {
        let power = (1u64 << j) as f64;
        // W^p = V diag(exp(i gamma p lambda)) V^T
        let mut w = vec![Complex64::new(0.0, 0.0); n * n];
        for (lam, v) in spectral.values.iter().zip(&spectral.vectors) {
            let e = Complex64::from_polar(1.0, gamma * power * lam);
            for r in 0..n {
                for c in 0..n {
                    w[r * n + c] += e * (v[r] * v[c]);
                }
            }
        }
        for top in 0..1usize << m {
            if top >> j & 1 == 0 {
                continue;
            }
            let block = &mut state[top * n..(top + 1) * n];
            let old = block.to_vec();
            for r in 0..n {
                block[r] = (0..n).map(|c| w[r * n + c] * old[c]).sum();
            }
        }
    }

    inverse_qft(&mut state, low, m);

    let probs: Vec<f64> = state
        .chunks(n)
        .map(|block| block.iter().map(|a| a.norm_sqr()).sum())
        .collect();
    let dist = OutcomeDistribution::new(m, probs)?;
    Ok((
        StateVector {
            nu: m + low,
            amplitudes: state,
        },
        dist,
    ))
}

/// Inverse-CDF draw from `dist`.
pub fn sample_outcome(dist: &OutcomeDistribution, rng: &mut Stream) -> usize {
    let u = rng.uniform();
    let mut acc = 0.0;
    let mut last = 0;
    for (j, &p) in dist.probs.iter().enumerate() {
        if p > 0.0 {
            acc += p;
            last = j;
            if u < acc {
                return j;
            }
        }
    }
    last
}
