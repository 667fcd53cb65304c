//! Test-side oracles, independent of the library's numerics.
#![allow(dead_code)]

use std::f64::consts::PI;

/// Composite Simpson rule on `[a, b]` with an even number of panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    assert!(panels.is_multiple_of(2));
    let h = (b - a) / panels as f64;
    let mut s = f(a) + f(b);
    for i in 1..panels {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let k = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / k;
    let my = ly.iter().sum::<f64>() / k;
    let num: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    num / den
}

/// `c + 4 (n+1)^2 sin^2(pi / (2(n+1)))`.
pub fn closed_form_lambda1(c: f64, n: usize) -> f64 {
    let np1 = (n + 1) as f64;
    c + 4.0 * np1 * np1 * (PI / (2.0 * np1)).sin().powi(2)
}

/// `lambda(c) = pi^2 + c` for a constant potential.
pub fn continuum_lambda(c: f64) -> f64 {
    PI * PI + c
}

/// Phase-estimation kernel by direct summation of the geometric series.
pub fn kernel_direct(phi: f64, ell: u64, m: u32) -> (f64, f64) {
    let big = (1u64 << m) as f64;
    let (mut re, mut im) = (0.0, 0.0);
    for k in 0..1u64 << m {
        let a = 2.0 * PI * k as f64 * (phi - ell as f64 / big);
        re += a.cos();
        im += a.sin();
    }
    (re / big, im / big)
}
