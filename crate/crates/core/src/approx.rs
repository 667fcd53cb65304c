//! Approximation machinery of the randomized and bit-query solvers: the
//! natural cubic spline `q_bar`, its nonnegativity shift, and the eigenvector
//! approximation built from the columns of `(M - lambda_bar I)^-1`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::potential::Evaluate;
use crate::tridiag::{align_sign, norm2, solve_shifted_system, TridiagonalSymmetric};

/// C^2 piecewise cubic with zero second derivative at both ends.
#[derive(Debug, Clone, PartialEq)]
pub struct NaturalSpline {
    knots: Vec<f64>,
    values: Vec<f64>,
    /// Per interval `[a, b, c, d]`: `a + b t + c t^2 + d t^3`, `t = x - x_i`.
    coeffs: Vec<[f64; 4]>,
    equidistant: bool,
}

impl NaturalSpline {
    /// Fits through `(xs[i], ys[i])`; knots must be strictly increasing.
    ///
    /// The interior second derivatives solve a symmetric tridiagonal system,
    /// so the cost is linear in the number of knots.
    pub fn fit(xs: &[f64], ys: &[f64]) -> Result<Self> {
        if xs.len() != ys.len() || xs.len() < 2 {
            return Err(Error::Spec(format!(
                "spline needs >= 2 matching samples, got {} x and {} y",
                xs.len(),
                ys.len()
            )));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Spec(
                "spline knots must be strictly increasing".into(),
            ));
        }
        let m = xs.len() - 1;
        let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
        let mut moments = vec![0.0; m + 1];
        if m >= 2 {
            let diag = (1..m).map(|i| 2.0 * (h[i - 1] + h[i])).collect();
            let off = (1..m - 1).map(|i| h[i]).collect();
            let rhs: Vec<f64> = (1..m)
                .map(|i| 6.0 * ((ys[i + 1] - ys[i]) / h[i] - (ys[i] - ys[i - 1]) / h[i - 1]))
                .collect();
            let system = TridiagonalSymmetric::new(diag, off)?;
            let sol = solve_shifted_system(&system, 0.0, &rhs)?;
            moments[1..m].copy_from_slice(&sol.x);
        }
        let coeffs = (0..m)
            .map(|i| {
                let (mi, mj) = (moments[i], moments[i + 1]);
                [
                    ys[i],
                    (ys[i + 1] - ys[i]) / h[i] - h[i] * (2.0 * mi + mj) / 6.0,
                    mi / 2.0,
                    (mj - mi) / (6.0 * h[i]),
                ]
            })
            .collect();
        let width = xs[m] - xs[0];
        let equidistant =
            (0..=m).all(|i| (xs[i] - (xs[0] + width * i as f64 / m as f64)).abs() <= 1e-14);
        Ok(Self {
            knots: xs.to_vec(),
            values: ys.to_vec(),
            coeffs,
            equidistant,
        })
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn coefficients(&self) -> &[[f64; 4]] {
        &self.coeffs
    }

    fn interval(&self, x: f64) -> usize {
        let m = self.coeffs.len();
        if self.equidistant {
            let (a, b) = (self.knots[0], self.knots[m]);
            let i = ((x - a) / (b - a) * m as f64).floor();
            (i.max(0.0) as usize).min(m - 1)
        } else {
            self.knots
                .partition_point(|&k| k <= x)
                .saturating_sub(1)
                .min(m - 1)
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        let i = self.interval(x);
        let t = x - self.knots[i];
        let [a, b, c, d] = self.coeffs[i];
        a + t * (b + t * (c + t * d))
    }

    pub fn eval_with_derivatives(&self, x: f64) -> (f64, f64, f64) {
        let i = self.interval(x);
        let t = x - self.knots[i];
        let [a, b, c, d] = self.coeffs[i];
        (
            a + t * (b + t * (c + t * d)),
            b + t * (2.0 * c + 3.0 * t * d),
            2.0 * c + 6.0 * t * d,
        )
    }
}

/// `q_bar = q_cub + c` on the equidistant knots `j/m`.
#[derive(Debug, Clone, PartialEq)]
pub struct SplinePotential {
    spline: NaturalSpline,
    shift: f64,
}

impl SplinePotential {
    /// Samples `q` at `j/m`, `j = 0..=m` (exactly `m+1` evaluations) and fits.
    pub fn sample<E: Evaluate + ?Sized>(q: &E, m: usize) -> Result<Self> {
        let samples: Vec<f64> = (0..=m).map(|j| q.value(j as f64 / m as f64)).collect();
        fit_natural_spline(&samples)
    }

    pub fn m(&self) -> usize {
        self.spline.coeffs.len()
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn spline(&self) -> &NaturalSpline {
        &self.spline
    }

    /// Unshifted spline value `q_cub(x)`.
    pub fn cubic_value(&self, x: f64) -> f64 {
        self.spline.value(x)
    }

    pub fn eval_with_derivatives(&self, x: f64) -> (f64, f64, f64) {
        let (v, d1, d2) = self.spline.eval_with_derivatives(x);
        (v + self.shift, d1, d2)
    }
}

impl Evaluate for SplinePotential {
    fn value(&self, x: f64) -> f64 {
        self.spline.value(x) + self.shift
    }
}

/// Natural cubic spline through `samples[j]` at `j/m`, `m = samples.len()-1`.
pub fn fit_natural_spline(samples: &[f64]) -> Result<SplinePotential> {
    let m = samples.len().saturating_sub(1);
    if m < 3 {
        return Err(Error::Config(format!("spline needs m >= 3, got {m}")));
    }
    let xs: Vec<f64> = (0..=m).map(|j| j as f64 / m as f64).collect();
    Ok(SplinePotential {
        spline: NaturalSpline::fit(&xs, samples)?,
        shift: 0.0,
    })
}

/// Adds `c = max(0, -min q_cub)` with the minimum over `64 m + 1` grid points.
pub fn shift_nonnegative(s: SplinePotential) -> SplinePotential {
    let grid = 64 * s.m();
    let min = (0..=grid)
        .map(|i| s.spline.value(i as f64 / grid as f64))
        .fold(f64::INFINITY, f64::min);
    SplinePotential {
        shift: (-min).max(0.0),
        spline: s.spline,
    }
}

/// Continuous piecewise-linear function on the nodes `t_j = j/(n+1)`,
/// `j = 0..=n+1`, vanishing at both ends.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinearFn {
    values: Vec<f64>,
}

impl PiecewiseLinearFn {
    /// From the `n` interior node values; the zero endpoints are added.
    pub fn from_interior(interior: &[f64]) -> Self {
        let mut values = Vec::with_capacity(interior.len() + 2);
        values.push(0.0);
        values.extend_from_slice(interior);
        values.push(0.0);
        Self { values }
    }

    /// Node values including the two zero endpoints.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn interior(&self) -> &[f64] {
        &self.values[1..self.values.len() - 1]
    }

    /// Number of interior nodes.
    pub fn n(&self) -> usize {
        self.values.len() - 2
    }
}

impl Evaluate for PiecewiseLinearFn {
    fn value(&self, t: f64) -> f64 {
        let np1 = (self.values.len() - 1) as f64;
        let u = (t * np1).clamp(0.0, np1);
        let j = (u.floor() as usize).min(self.values.len() - 2);
        let w = u - j as f64;
        self.values[j] * (1.0 - w) + self.values[j + 1] * w
    }
}

/// Output of [`approximate_eigenvector`].
#[derive(Debug, Clone)]
pub struct EigenvectorApprox {
    pub function: PiecewiseLinearFn,
    /// Column of the resolvent that was selected (0-based).
    pub column: usize,
    pub near_singular: bool,
}

/// Approximates the eigenfunction for `lambda_1(T)` from `lambda_bar`.
///
/// Solves `(T - lambda_bar I) x_j = e_j` for every `j` with one shared
/// factorization, keeps the column of largest Euclidean norm (smallest index
/// on ties), normalizes it, scales the nodal values by `sqrt(n+1)` so the
/// interpolant has unit `L2` norm under the trapezoidal rule, fixes the sign
/// so the component sum is nonnegative, and interpolates linearly.
pub fn approximate_eigenvector(
    t: &TridiagonalSymmetric,
    lambda_bar: f64,
) -> Result<EigenvectorApprox> {
    let n = t.n();
    let factor = t.factor_shifted(lambda_bar);
    let norms: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|j| norm2(&factor.solve_unit(j)))
        .collect();
    let mut column = 0;
    for (j, &v) in norms.iter().enumerate() {
        if v > norms[column] {
            column = j;
        }
    }
    let mut z = factor.solve_unit(column);
    let scale = ((n + 1) as f64).sqrt() / norms[column];
    z.iter_mut().for_each(|v| *v *= scale);
    align_sign(&mut z);
    Ok(EigenvectorApprox {
        function: PiecewiseLinearFn::from_interior(&z),
        column,
        near_singular: factor.near_singular(),
    })
}
