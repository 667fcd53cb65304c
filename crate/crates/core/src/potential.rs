//! Potentials `q: [0,1] -> [0,1]` and the class-Q membership check.
//!
//! The catalog covers constants, polynomials, the shifted bump family
//! `q = 1/2 + delta * f_B`, spline-backed potentials read from sample files,
//! and arbitrary closures (whose derivatives fall back to finite
//! differences).

use std::fmt;
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use crate::approx::NaturalSpline;
use crate::error::{Error, Result};

/// Normalization of the bump `h(x) = alpha x^3 (1-x)^3`.
///
/// Over `[0,1]`, `max|h| = alpha/64`, `max|h'| = alpha * 0.0537`, and
/// `max|h''| = 3 alpha / 8`, attained at `x = 1/2` (a 2^16-point grid search
/// agrees). Scaling the largest of the three to one gives `alpha = 8/3`.
pub const BUMP_ALPHA: f64 = 8.0 / 3.0;

/// Tolerance for class-Q verification.
pub const CLASS_Q_TOL: f64 = 1.0 / 1_048_576.0;

/// Finite-difference step for potentials without analytic derivatives.
pub const FD_STEP: f64 = 1.0 / 1_048_576.0;

/// Anything that can be sampled on `[0,1]`.
pub trait Evaluate: Sync {
    fn value(&self, x: f64) -> f64;
}

impl<F: Fn(f64) -> f64 + Sync> Evaluate for F {
    fn value(&self, x: f64) -> f64 {
        self(x)
    }
}

/// Wraps an evaluator and tallies every call.
pub struct Counted<'a, E: ?Sized> {
    inner: &'a E,
    calls: AtomicU64,
}

impl<'a, E: Evaluate + ?Sized> Counted<'a, E> {
    pub fn new(inner: &'a E) -> Self {
        Self {
            inner,
            calls: AtomicU64::new(0),
        }
    }

    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }
}

impl<E: Evaluate + ?Sized> Evaluate for Counted<'_, E> {
    fn value(&self, x: f64) -> f64 {
        self.calls.fetch_add(1, Ordering::Relaxed);
        self.inner.value(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PotentialKind {
    Constant,
    Polynomial,
    ShiftedBumpFamily,
    SplineBacked,
    Custom,
}

/// Parameters of the bump family: `f_B(x) = sum_j B(j) h_j(x)` with
/// `h_j(x) = N^-2 h(N(x - j/N))`, and the potential `q = 1/2 + delta f_B`.
#[derive(Debug, Clone, PartialEq)]
pub struct BumpSpec {
    pub bits: Vec<bool>,
    pub alpha: f64,
    pub delta: f64,
}

impl BumpSpec {
    pub fn new(bits: Vec<bool>, delta: f64) -> Self {
        Self {
            bits,
            alpha: BUMP_ALPHA,
            delta,
        }
    }

    /// Number of sub-bumps.
    pub fn count(&self) -> usize {
        self.bits.len()
    }

    /// `f_B` and its first two derivatives at `x`.
    pub fn f_b(&self, x: f64) -> (f64, f64, f64) {
        let n = self.bits.len();
        let nf = n as f64;
        let j = ((x * nf).floor() as usize).min(n - 1);
        if !self.bits[j] {
            return (0.0, 0.0, 0.0);
        }
        let t = (nf * x - j as f64).clamp(0.0, 1.0);
        let (h0, h1, h2) = bump_h(self.alpha, t);
        (h0 / (nf * nf), h1 / nf, h2)
    }

    /// Closed form of `int_0^1 f_B`: `(sum B) / N^3 * alpha / 140`.
    pub fn integral_f_b(&self) -> f64 {
        let ones = self.bits.iter().filter(|&&b| b).count() as f64;
        let n = self.bits.len() as f64;
        ones / (n * n * n) * self.alpha / 140.0
    }
}

/// `h(t) = alpha t^3 (1-t)^3` and its first two derivatives.
pub fn bump_h(alpha: f64, t: f64) -> (f64, f64, f64) {
    let u = 1.0 - t;
    let h = alpha * t.powi(3) * u.powi(3);
    let h1 = 3.0 * alpha * t * t * u * u * (1.0 - 2.0 * t);
    let h2 = 6.0 * alpha * t * u * (1.0 - 5.0 * t + 5.0 * t * t);
    (h, h1, h2)
}

#[derive(Clone)]
enum Repr {
    Constant(f64),
    Polynomial(Vec<f64>),
    Bump(BumpSpec),
    Spline(Arc<NaturalSpline>),
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

/// A member (or claimed member) of the potential class.
///
/// Potentials are immutable value objects and cheap to clone.
#[derive(Clone)]
pub struct Potential {
    repr: Repr,
    label: String,
}

impl fmt::Debug for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Potential")
            .field("kind", &self.kind())
            .field("label", &self.label)
            .finish()
    }
}

impl Potential {
    pub fn constant(c: f64) -> Self {
        Self {
            repr: Repr::Constant(c),
            label: format!("constant:{c}"),
        }
    }

    /// `q(x) = c0 + c1 x + c2 x^2 + ...`
    pub fn polynomial(coeffs: Vec<f64>) -> Self {
        let label = format!(
            "poly:{}",
            coeffs
                .iter()
                .map(|c| c.to_string())
                .collect::<Vec<_>>()
                .join(",")
        );
        Self {
            repr: Repr::Polynomial(coeffs),
            label,
        }
    }

    pub fn bump(spec: BumpSpec) -> Result<Self> {
        if spec.bits.is_empty() {
            return Err(Error::Spec("bump family needs N >= 1".into()));
        }
        if !(0.0..=0.5).contains(&spec.delta) {
            return Err(Error::Spec(format!(
                "bump delta {} outside [0, 1/2]",
                spec.delta
            )));
        }
        let bits: String = spec
            .bits
            .iter()
            .map(|&b| if b { '1' } else { '0' })
            .collect();
        let label = format!("bump:{}:{}:{}", spec.bits.len(), bits, spec.delta);
        Ok(Self {
            repr: Repr::Bump(spec),
            label,
        })
    }

    /// Spline-backed potential through sorted samples `(x_i, q_i)`.
    pub fn from_samples(xs: &[f64], qs: &[f64], label: impl Into<String>) -> Result<Self> {
        let spline = NaturalSpline::fit(xs, qs)?;
        Ok(Self {
            repr: Repr::Spline(Arc::new(spline)),
            label: label.into(),
        })
    }

    /// Arbitrary closure; derivatives are taken by finite differences.
    pub fn custom(
        label: impl Into<String>,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            repr: Repr::Custom(Arc::new(f)),
            label: label.into(),
        }
    }

    /// Parses `constant:<c>`, `poly:<c0,c1,...>`, `bump:<N>:<bits>:<delta>`
    /// or `file:<path>`.
    pub fn parse(spec: &str) -> Result<Self> {
        let bad = |why: &str| Error::Spec(format!("{spec:?}: {why}"));
        let (kind, rest) = spec.split_once(':').ok_or_else(|| bad("missing ':'"))?;
        let num = |s: &str| -> Result<f64> {
            s.trim()
                .parse::<f64>()
                .map_err(|_| bad(&format!("not a number: {s:?}")))
        };
        let mut p = match kind {
            "constant" => Self::constant(num(rest)?),
            "poly" => {
                let coeffs = rest.split(',').map(num).collect::<Result<Vec<_>>>()?;
                Self::polynomial(coeffs)
            }
            "bump" => {
                let parts: Vec<&str> = rest.split(':').collect();
                let [n, bits, delta] = parts[..] else {
                    return Err(bad("expected bump:<N>:<bits>:<delta>"));
                };
                let n: usize = n.parse().map_err(|_| bad("N is not an integer"))?;
                let bits = bits
                    .chars()
                    .map(|c| match c {
                        '0' => Ok(false),
                        '1' => Ok(true),
                        _ => Err(bad("bitstring must be 0/1")),
                    })
                    .collect::<Result<Vec<_>>>()?;
                if bits.len() != n {
                    return Err(bad(&format!("bitstring has {} bits, N = {n}", bits.len())));
                }
                Self::bump(BumpSpec::new(bits, num(delta)?))?
            }
            "file" => Self::read_samples(Path::new(rest))?,
            _ => return Err(bad("unknown kind")),
        };
        p.label = spec.to_string();
        Ok(p)
    }

    fn read_samples(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut xs = Vec::new();
        let mut qs = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut cols = line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty());
            let mut next = || -> Result<f64> {
                cols.next().and_then(|s| s.parse().ok()).ok_or_else(|| {
                    Error::Spec(format!(
                        "{}:{}: expected two numbers",
                        path.display(),
                        lineno + 1
                    ))
                })
            };
            xs.push(next()?);
            qs.push(next()?);
        }
        Self::from_samples(&xs, &qs, format!("file:{}", path.display()))
    }

    pub fn kind(&self) -> PotentialKind {
        match self.repr {
            Repr::Constant(_) => PotentialKind::Constant,
            Repr::Polynomial(_) => PotentialKind::Polynomial,
            Repr::Bump(_) => PotentialKind::ShiftedBumpFamily,
            Repr::Spline(_) => PotentialKind::SplineBacked,
            Repr::Custom(_) => PotentialKind::Custom,
        }
    }

    /// The spec string this potential was built from.
    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn params(&self) -> Vec<f64> {
        match &self.repr {
            Repr::Constant(c) => vec![*c],
            Repr::Polynomial(c) => c.clone(),
            Repr::Bump(b) => {
                let mut v = vec![b.bits.len() as f64, b.alpha, b.delta];
                v.extend(b.bits.iter().map(|&x| if x { 1.0 } else { 0.0 }));
                v
            }
            Repr::Spline(s) => s.values().to_vec(),
            Repr::Custom(_) => Vec::new(),
        }
    }

    pub fn as_constant(&self) -> Option<f64> {
        match self.repr {
            Repr::Constant(c) => Some(c),
            _ => None,
        }
    }

    pub fn bump_spec(&self) -> Option<&BumpSpec> {
        match &self.repr {
            Repr::Bump(b) => Some(b),
            _ => None,
        }
    }

    /// `(q(x), q'(x), q''(x))`.
    pub fn eval_with_derivatives(&self, x: f64) -> Result<(f64, f64, f64)> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::Domain { x });
        }
        Ok(match &self.repr {
            Repr::Constant(c) => (*c, 0.0, 0.0),
            Repr::Polynomial(c) => poly_eval(c, x),
            Repr::Bump(b) => {
                let (f, f1, f2) = b.f_b(x);
                (0.5 + b.delta * f, b.delta * f1, b.delta * f2)
            }
            Repr::Spline(s) => s.eval_with_derivatives(x),
            Repr::Custom(f) => finite_differences(f.as_ref(), x),
        })
    }

    /// Grid-based class-Q check on `grid + 1` equidistant points.
    pub fn verify_class_q(&self, grid: usize) -> Result<ClassQReport> {
        if grid < 64 {
            return Err(Error::Config(format!("verification grid {grid} < 64")));
        }
        let mut r = ClassQReport {
            max_abs_value: 0.0,
            max_abs_first: 0.0,
            max_abs_second: 0.0,
            min_value: f64::INFINITY,
            max_value: f64::NEG_INFINITY,
            pass: false,
        };
        for i in 0..=grid {
            let x = i as f64 / grid as f64;
            let (v, d1, d2) = self.eval_with_derivatives(x)?;
            r.max_abs_value = r.max_abs_value.max(v.abs());
            r.max_abs_first = r.max_abs_first.max(d1.abs());
            r.max_abs_second = r.max_abs_second.max(d2.abs());
            r.min_value = r.min_value.min(v);
            r.max_value = r.max_value.max(v);
        }
        let lim = 1.0 + CLASS_Q_TOL;
        r.pass = r.max_abs_value <= lim
            && r.max_abs_first <= lim
            && r.max_abs_second <= lim
            && r.min_value >= -CLASS_Q_TOL
            && r.max_value <= lim;
        Ok(r)
    }

    /// Sup norm over a 4096-point grid.
    pub fn sup_norm(&self) -> f64 {
        (0..=4096)
            .map(|i| self.value(i as f64 / 4096.0).abs())
            .fold(0.0, f64::max)
    }
}

impl Evaluate for Potential {
    fn value(&self, x: f64) -> f64 {
        match &self.repr {
            Repr::Constant(c) => *c,
            Repr::Polynomial(c) => c.iter().rev().fold(0.0, |acc, &a| acc * x + a),
            Repr::Bump(b) => 0.5 + b.delta * b.f_b(x).0,
            Repr::Spline(s) => s.value(x),
            Repr::Custom(f) => f(x),
        }
    }
}

/// Result of [`Potential::verify_class_q`].
#[derive(Debug, Clone, PartialEq)]
pub struct ClassQReport {
    pub max_abs_value: f64,
    pub max_abs_first: f64,
    pub max_abs_second: f64,
    pub min_value: f64,
    pub max_value: f64,
    pub pass: bool,
}

fn poly_eval(c: &[f64], x: f64) -> (f64, f64, f64) {
    let (mut p, mut d1, mut d2) = (0.0, 0.0, 0.0);
    for &a in c.iter().rev() {
        d2 = d2 * x + 2.0 * d1;
        d1 = d1 * x + p;
        p = p * x + a;
    }
    (p, d1, d2)
}

fn finite_differences(f: &(dyn Fn(f64) -> f64 + Send + Sync), x: f64) -> (f64, f64, f64) {
    let h = FD_STEP;
    let v = f(x);
    if x - h < 0.0 {
        let (f1, f2, f3) = (f(x + h), f(x + 2.0 * h), f(x + 3.0 * h));
        let d1 = (-3.0 * v + 4.0 * f1 - f2) / (2.0 * h);
        let d2 = (2.0 * v - 5.0 * f1 + 4.0 * f2 - f3) / (h * h);
        (v, d1, d2)
    } else if x + h > 1.0 {
        let (f1, f2, f3) = (f(x - h), f(x - 2.0 * h), f(x - 3.0 * h));
        let d1 = (3.0 * v - 4.0 * f1 + f2) / (2.0 * h);
        let d2 = (2.0 * v - 5.0 * f1 + 4.0 * f2 - f3) / (h * h);
        (v, d1, d2)
    } else {
        let (fp, fm) = (f(x + h), f(x - h));
        (v, (fp - fm) / (2.0 * h), (fp - 2.0 * v + fm) / (h * h))
    }
}

/// Potentials used throughout the test and benchmark corpus.
pub fn catalog() -> Vec<Potential> {
    [
        "constant:0",
        "constant:0.5",
        "constant:1",
        "poly:0,1",
        "poly:0.5,0.25,-0.25",
        "bump:4:1011:0.1",
    ]
    .iter()
    .map(|s| Potential::parse(s).expect("catalog entries parse"))
    .collect()
}
