//! Gauss–Legendre rules on the unit interval and the collapsed-square rule on
//! the standard triangle, with adaptive order doubling.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::Result;
use crate::linalg::CMatrix;

pub const DEFAULT_ORDER: usize = 64;
pub const DEFAULT_TRIANGLE_ORDER: usize = 32;
pub const ADAPTIVE_TOLERANCE: f64 = 1e-11;
const MAX_ORDER: usize = 1024;

/// Nodes and weights of the `n`-point Gauss–Legendre rule mapped to `[0, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "quadrature order must be positive");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = 0.5 * (1.0 - x);
        nodes[n - 1 - i] = 0.5 * (1.0 + x);
        weights[i] = 0.5 * w;
        weights[n - 1 - i] = 0.5 * w;
    }
    (nodes, weights)
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { p0 } else { p1 };
    let d = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}

/// Nodes `(t1, t2)` and weights of the collapsed-square rule on
/// `{t1, t2 >= 0, t1 + t2 <= 1}`; weights sum to 1/2.
pub fn triangle_rule(order: usize) -> Vec<([f64; 2], f64)> {
    let (x, w) = gauss_legendre(order);
    let mut out = Vec::with_capacity(order * order);
    for (u, wu) in x.iter().zip(&w) {
        for (v, wv) in x.iter().zip(&w) {
            out.push(([*u, (1.0 - u) * v], wu * wv * (1.0 - u)));
        }
    }
    out
}

/// Values that can be accumulated by a quadrature rule.
pub trait Integrand: Sized {
    fn scaled(&self, w: f64) -> Self;
    fn accumulate(&mut self, w: f64, other: &Self);
    fn distance(&self, other: &Self) -> f64;
    fn magnitude(&self) -> f64;
}

impl Integrand for Complex64 {
    fn scaled(&self, w: f64) -> Self {
        self * w
    }
    fn accumulate(&mut self, w: f64, other: &Self) {
        *self += other * w;
    }
    fn distance(&self, other: &Self) -> f64 {
        (self - other).norm()
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

impl Integrand for CMatrix {
    fn scaled(&self, w: f64) -> Self {
        self.mapv(|z| z * w)
    }
    fn accumulate(&mut self, w: f64, other: &Self) {
        self.scaled_add(Complex64::new(w, 0.0), other);
    }
    fn distance(&self, other: &Self) -> f64 {
        crate::linalg::max_abs(&(self - other).view())
    }
    fn magnitude(&self) -> f64 {
        crate::linalg::max_abs(&self.view())
    }
}

impl Integrand for Vec<Complex64> {
    fn scaled(&self, w: f64) -> Self {
        self.iter().map(|z| z * w).collect()
    }
    fn accumulate(&mut self, w: f64, other: &Self) {
        for (a, b) in self.iter_mut().zip(other) {
            *a += b * w;
        }
    }
    fn distance(&self, other: &Self) -> f64 {
        self.iter().zip(other).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
    fn magnitude(&self) -> f64 {
        self.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Result of an adaptive integration: the value at the final order and the
/// change from the previous order.
#[derive(Debug, Clone)]
pub struct Quadrature<T> {
    pub value: T,
    pub delta: f64,
    pub order: usize,
}

pub fn integrate_fixed<T, F>(order: usize, mut f: F) -> Result<T>
where
    T: Integrand,
    F: FnMut(f64) -> Result<T>,
{
    let (x, w) = gauss_legendre(order);
    let mut acc = f(x[0])?.scaled(w[0]);
    for (t, wt) in x.iter().zip(&w).skip(1) {
        acc.accumulate(*wt, &f(*t)?);
    }
    Ok(acc)
}

/// Integrates over `[0, 1]`, doubling the order until successive values
/// differ by less than `tol` (relative to the value's magnitude when it
/// exceeds one).
pub fn integrate_adaptive<T, F>(order: usize, tol: f64, mut f: F) -> Result<Quadrature<T>>
where
    T: Integrand,
    F: FnMut(f64) -> Result<T>,
{
    let mut n = order.max(1);
    let mut prev = integrate_fixed(n, &mut f)?;
    loop {
        let next_n = 2 * n;
        let next = integrate_fixed(next_n, &mut f)?;
        let delta = next.distance(&prev);
        if delta < tol * next.magnitude().max(1.0) || next_n >= MAX_ORDER {
            return Ok(Quadrature { value: next, delta, order: next_n });
        }
        prev = next;
        n = next_n;
    }
}

pub fn integrate_triangle_fixed<T, F>(order: usize, mut f: F) -> Result<T>
where
    T: Integrand,
    F: FnMut([f64; 2]) -> Result<T>,
{
    let rule = triangle_rule(order);
    let mut acc = f(rule[0].0)?.scaled(rule[0].1);
    for (t, w) in rule.iter().skip(1) {
        acc.accumulate(*w, &f(*t)?);
    }
    Ok(acc)
}

pub fn integrate_triangle_adaptive<T, F>(order: usize, tol: f64, mut f: F) -> Result<Quadrature<T>>
where
    T: Integrand,
    F: FnMut([f64; 2]) -> Result<T>,
{
    let mut n = order.max(1);
    let mut prev = integrate_triangle_fixed(n, &mut f)?;
    loop {
        let next_n = 2 * n;
        let next = integrate_triangle_fixed(next_n, &mut f)?;
        let delta = next.distance(&prev);
        if delta < tol * next.magnitude().max(1.0) || next_n >= 256 {
            return Ok(Quadrature { value: next, delta, order: next_n });
        }
        prev = next;
        n = next_n;
    }
}
