//! Jaksch-Papageorgiou initial states: a coarse eigenvector computed
//! classically, replicated to the fine grid by `s` uniform-superposition
//! qubits, and its overlap with the true fine-grid eigenvector.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::approx::approximate_eigenvector;
use crate::error::{Error, Result};
use crate::potential::{Evaluate, Potential};
use crate::tridiag::{align_sign, discretize, dot, eigenpair, norm2, smallest_eigenvalue};

pub const MAX_COARSE_DIM: usize = 1024;
pub const MAX_FINE_DIM: usize = 1024;

/// Default target success probability for the phase-estimation stage.
pub const TARGET_PROBABILITY: f64 = 0.75;

/// Multiplier applied to the empirical constant before choosing `n0`.
pub const SAFETY_FACTOR: f64 = 2.0;

fn check_coarse_dim(n0: usize) -> Result<()> {
    if !(n0.is_power_of_two() && (2..=MAX_COARSE_DIM).contains(&n0)) {
        return Err(Error::Config(format!(
            "coarse dimension {n0} must be a power of two in [2, {MAX_COARSE_DIM}]"
        )));
    }
    Ok(())
}

/// Euclidean-unit approximation of the smallest eigenvector of `M_q^(n0)`.
pub fn coarse_state<E: Evaluate + ?Sized>(q: &E, n0: usize) -> Result<Vec<f64>> {
    check_coarse_dim(n0)?;
    let t = discretize(q, n0);
    let lam = smallest_eigenvalue(&t, (n0 as f64).powf(-2.5));
    let approx = approximate_eigenvector(&t, lam.value)?;
    let mut v = approx.function.interior().to_vec();
    let nrm = norm2(&v);
    v.iter_mut().for_each(|x| *x /= nrm);
    align_sign(&mut v);
    Ok(v)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicatedState {
    pub n0: usize,
    pub s: u32,
    pub vector: Vec<f64>,
}

impl ReplicatedState {
    pub fn n(&self) -> usize {
        self.vector.len()
    }
}

/// `2^(-s/2)`, exact for even `s`.
fn replication_scale(s: u32) -> f64 {
    let half = 0.5f64.powi((s / 2) as i32);
    if s % 2 == 1 {
        half * std::f64::consts::FRAC_1_SQRT_2
    } else {
        half
    }
}

/// `vector[j] = coarse[j >> s] / sqrt(2^s)`.
pub fn replicate_state(coarse: &[f64], s: u32) -> ReplicatedState {
    let scale = replication_scale(s);
    let copies = 1usize << s;
    let vector = coarse
        .iter()
        .flat_map(|&a| std::iter::repeat_n(a * scale, copies))
        .collect();
    ReplicatedState {
        n0: coarse.len(),
        s,
        vector,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OverlapReport {
    pub d: f64,
    pub one_minus_d_squared: f64,
    pub n0: usize,
    pub n: usize,
}

/// Inner product of `state` with the sign-aligned smallest eigenvector of
/// `M_q^(n)`.
pub fn overlap<E: Evaluate + ?Sized>(state: &ReplicatedState, q: &E) -> Result<OverlapReport> {
    let n = state.n();
    if n > MAX_FINE_DIM {
        return Err(Error::Guard(format!(
            "overlap dimension {n} exceeds {MAX_FINE_DIM}"
        )));
    }
    let (_, y) = eigenpair(&discretize(q, n), 0)?;
    Ok(overlap_with(&state.vector, &y, state.n0))
}

pub(crate) fn overlap_with(z: &[f64], y: &[f64], n0: usize) -> OverlapReport {
    let mut z = z.to_vec();
    align_sign(&mut z);
    let d = dot(&z, y);
    // 1 - d = |y - z|^2 / 2 for unit vectors; avoids cancellation near d = 1.
    let dist2: f64 = z.iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum();
    OverlapReport {
        d,
        one_minus_d_squared: (0.5 * dist2 * (1.0 + d)).max(0.0),
        n0,
        n: y.len(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub n0: usize,
    pub c_hat: f64,
}

/// Coarse dimensions and fine dimensions swept by [`estimate_c_hat`].
pub const CALIBRATION_COARSE: [usize; 6] = [2, 4, 8, 16, 32, 64];
pub const CALIBRATION_FINE: [usize; 5] = [64, 128, 256, 512, 1024];

/// One sweep point of the calibration grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationPoint {
    pub potential: usize,
    pub report: OverlapReport,
}

impl CalibrationPoint {
    pub fn scaled(&self) -> f64 {
        (self.report.n0 as f64 + 1.0) * self.report.one_minus_d_squared.sqrt()
    }
}

/// Overlaps for every corpus potential and every grid pair `(n0, n)`.
pub fn calibration_sweep(corpus: &[Potential]) -> Result<Vec<CalibrationPoint>> {
    let jobs: Vec<(usize, usize, usize)> = (0..corpus.len())
        .flat_map(|p| {
            CALIBRATION_FINE.iter().flat_map(move |&n| {
                CALIBRATION_COARSE
                    .iter()
                    .filter(move |&&n0| n0 <= n)
                    .map(move |&n0| (p, n0, n))
            })
        })
        .collect();
    jobs.into_par_iter()
        .map(|(p, n0, n)| {
            let coarse = coarse_state(&corpus[p], n0)?;
            let s = (n / n0).trailing_zeros();
            Ok(CalibrationPoint {
                potential: p,
                report: overlap(&replicate_state(&coarse, s), &corpus[p])?,
            })
        })
        .collect()
}

/// `max (n0+1) sqrt(1 - d^2)` over the calibration sweep.
pub fn estimate_c_hat(corpus: &[Potential]) -> Result<f64> {
    if corpus.is_empty() {
        return Err(Error::Config("calibration corpus is empty".into()));
    }
    Ok(calibration_sweep(corpus)?
        .iter()
        .map(CalibrationPoint::scaled)
        .fold(0.0, f64::max))
}

/// Smallest power of two `n0 >= 2` with
/// `(8/pi^2)(1 - (2 c_hat)^2/(n0+1)^2) >= target`.
pub fn n0_for_constant(c_hat: f64, target: f64) -> Result<usize> {
    let pi2 = std::f64::consts::PI.powi(2);
    let c = SAFETY_FACTOR * c_hat;
    let mut n0 = 2;
    while n0 <= MAX_COARSE_DIM {
        let np1 = n0 as f64 + 1.0;
        if 8.0 / pi2 * (1.0 - c * c / (np1 * np1)) >= target {
            return Ok(n0);
        }
        n0 *= 2;
    }
    Err(Error::Infeasible(format!(
        "no n0 <= {MAX_COARSE_DIM} reaches success probability {target} with c_hat = {c_hat}"
    )))
}

pub fn calibrate_n0(corpus: &[Potential], target: f64) -> Result<Calibration> {
    let c_hat = estimate_c_hat(corpus)?;
    Ok(Calibration {
        n0: n0_for_constant(c_hat, target)?,
        c_hat,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tridiag::eigendecompose;
    use std::f64::consts::PI;

    #[test]
    fn coarse_state_for_free_operator() {
        let v = coarse_state(&Potential::constant(0.0), 8).unwrap();
        assert!((norm2(&v) - 1.0).abs() < 1e-12);
        let s: Vec<f64> = (1..=8).map(|j| (PI * j as f64 / 9.0).sin()).collect();
        let ns = norm2(&s);
        let dist: f64 = v
            .iter()
            .zip(&s)
            .map(|(a, b)| (a - b / ns).powi(2))
            .sum::<f64>()
            .sqrt();
        assert!(dist < 5e-2, "{dist}");
        assert!(coarse_state(&Potential::constant(0.0), 6).is_err());
    }

    #[test]
    fn coarse_state_converges_to_discrete_eigenvector() {
        let q = Potential::parse("poly:0.5,0.25,-0.25").unwrap();
        let err = |n0: usize| {
            let v = coarse_state(&q, n0).unwrap();
            let y = eigendecompose(&discretize(&q, n0)).unwrap().vectors[0].clone();
            v.iter()
                .zip(&y)
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                .sqrt()
        };
        let dims = [4usize, 8, 16, 32, 64, 128, 256];
        let errs: Vec<f64> = dims.iter().map(|&n| err(n)).collect();
        for (&n0, &e) in dims.iter().zip(&errs) {
            assert!(e <= (n0 as f64).powi(-2), "n0 {n0}: {e}");
        }
        // Individual ratios follow where bisection stops inside its
        // tolerance, so the rate is checked by a least-squares fit.
        let xs: Vec<f64> = dims.iter().map(|&n| (n as f64).ln()).collect();
        let ys: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
        let (mx, my) = (xs.iter().sum::<f64>() / 7.0, ys.iter().sum::<f64>() / 7.0);
        let slope = xs
            .iter()
            .zip(&ys)
            .map(|(x, y)| (x - mx) * (y - my))
            .sum::<f64>()
            / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
        assert!(slope <= -2.0, "slope {slope}, errors {errs:?}");
    }

    #[test]
    fn replication_examples() {
        let c = [0.6, 0.8];
        assert_eq!(replicate_state(&c, 0).vector, c.to_vec());
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert_eq!(
            replicate_state(&c, 1).vector,
            vec![0.6 * r, 0.6 * r, 0.8 * r, 0.8 * r]
        );
        let v = replicate_state(&c, 5).vector;
        assert!((norm2(&v) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn overlap_extremes() {
        let q = Potential::constant(0.5);
        let y = eigendecompose(&discretize(&q, 8)).unwrap();
        let exact = overlap(&replicate_state(&y.vectors[0], 0), &q).unwrap();
        assert!((exact.d - 1.0).abs() < 1e-10);
        assert!(exact.one_minus_d_squared < 1e-10);
        let orth = overlap(&replicate_state(&y.vectors[1], 0), &q).unwrap();
        assert!(orth.d.abs() < 1e-10);
    }

    #[test]
    fn n0_from_constant() {
        assert_eq!(n0_for_constant(0.0, 0.75).unwrap(), 2);
        assert_eq!(n0_for_constant(0.5, 0.75).unwrap(), 4);
        let mut last = 2;
        for i in 0..40 {
            let n0 = n0_for_constant(i as f64 * 0.25, 0.75).unwrap();
            assert!(n0 >= last);
            last = n0;
        }
        assert!(matches!(
            n0_for_constant(1e4, 0.75),
            Err(Error::Infeasible(_))
        ));
    }
}
