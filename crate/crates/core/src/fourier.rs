//! Smooth loops on the circle stored by their Fourier coefficients.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Grid used for winding numbers and logarithms.
pub const GRID: usize = 4096;
/// Number of dyadic grid refinements attempted before giving up.
pub const GRID_REFINEMENTS: u32 = 2;
/// Values below this modulus count as zeros of a loop.
pub const VANISHING_THRESHOLD: f64 = 1e-12;
/// Coefficients below this magnitude are dropped from exp/inv results.
pub const TRUNCATION_THRESHOLD: f64 = 1e-16;
/// FFT outputs below this many ulps of the largest sample are roundoff.
const ROUNDOFF_ULPS: f64 = 16.0;
const DEFAULT_MAX_BAND: usize = 2048;

/// Cap on band growth of exp/inv, overridable through `FREDK2_MAX_BAND`.
pub fn max_band() -> usize {
    static MAX: OnceLock<usize> = OnceLock::new();
    *MAX.get_or_init(|| {
        std::env::var("FREDK2_MAX_BAND")
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .filter(|&b: &usize| b > 0)
            .unwrap_or(DEFAULT_MAX_BAND)
    })
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn fft(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    })
}

/// Coefficients `c_k` of samples at angles `2πj/n`, indexed by `k mod n`.
fn analyze(samples: &[Complex64]) -> Vec<Complex64> {
    let n = samples.len();
    let mut buf = samples.to_vec();
    fft(n, false).process(&mut buf);
    let scale = 1.0 / n as f64;
    buf.iter_mut().for_each(|z| *z *= scale);
    buf
}

fn roundoff_floor(scale: f64) -> f64 {
    ROUNDOFF_ULPS * f64::EPSILON * scale
}

/// A loop `θ ↦ Σ_k c_k e^{ikθ}` with finitely many nonzero coefficients.
///
/// Coefficients are stored densely over `-band..=band`; the outermost ones are
/// nonzero unless the loop is zero. `tail` bounds the ℓ¹ mass of coefficients
/// discarded while producing this loop.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierLoop {
    band: usize,
    coeffs: Vec<Complex64>,
    tail: f64,
}

impl Default for FourierLoop {
    fn default() -> Self {
        Self::zero()
    }
}

impl FourierLoop {
    pub fn zero() -> Self {
        Self { band: 0, coeffs: vec![Complex64::new(0.0, 0.0)], tail: 0.0 }
    }

    pub fn constant(c: Complex64) -> Self {
        Self { band: 0, coeffs: vec![c], tail: 0.0 }
    }

    pub fn one() -> Self {
        Self::constant(Complex64::new(1.0, 0.0))
    }

    pub fn monomial(k: i64, c: Complex64) -> Self {
        Self::from_pairs([(k, c)])
    }

    /// The coordinate function `z = e^{iθ}`.
    pub fn z() -> Self {
        Self::monomial(1, Complex64::new(1.0, 0.0))
    }

    /// Builds a loop from `(k, c_k)` pairs; repeated frequencies are summed.
    pub fn from_pairs<I: IntoIterator<Item = (i64, Complex64)>>(pairs: I) -> Self {
        let map: BTreeMap<i64, Complex64> = pairs.into_iter().fold(BTreeMap::new(), |mut m, (k, c)| {
            *m.entry(k).or_insert(Complex64::new(0.0, 0.0)) += c;
            m
        });
        let band = map.iter().filter(|(_, c)| c.norm() != 0.0).map(|(k, _)| k.unsigned_abs() as usize).max().unwrap_or(0);
        let mut coeffs = vec![Complex64::new(0.0, 0.0); 2 * band + 1];
        for (k, c) in map {
            if k.unsigned_abs() as usize <= band {
                coeffs[(k + band as i64) as usize] = c;
            }
        }
        Self { band, coeffs, tail: 0.0 }
    }

    /// Coefficients over `-band..=band` (index `k + band`), trimmed.
    fn from_dense(coeffs: Vec<Complex64>, tail: f64) -> Self {
        debug_assert!(coeffs.len() % 2 == 1);
        let half = coeffs.len() / 2;
        let band = (0..=half)
            .rev()
            .find(|&k| coeffs[half + k].norm() != 0.0 || coeffs[half - k].norm() != 0.0)
            .unwrap_or(0);
        let coeffs = coeffs[half - band..=half + band].to_vec();
        Self { band, coeffs, tail }
    }

    pub fn with_tail(mut self, tail: f64) -> Self {
        self.tail = tail;
        self
    }

    pub fn band(&self) -> usize {
        self.band
    }

    pub fn tail_bound(&self) -> f64 {
        self.tail
    }

    pub fn coeff(&self, k: i64) -> Complex64 {
        if k.unsigned_abs() as usize > self.band {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[(k + self.band as i64) as usize]
        }
    }

    /// Nonzero coefficients in increasing frequency order.
    pub fn terms(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        let b = self.band as i64;
        self.coeffs.iter().enumerate().filter(|(_, c)| c.norm() != 0.0).map(move |(i, c)| (i as i64 - b, *c))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.norm() == 0.0)
    }

    pub fn l1_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).sum()
    }

    /// ℓ¹ distance between coefficient sequences.
    pub fn l1_distance(&self, other: &Self) -> f64 {
        let b = self.band.max(other.band) as i64;
        (-b..=b).map(|k| (self.coeff(k) - other.coeff(k)).norm()).sum()
    }

    pub fn eval(&self, theta: f64) -> Complex64 {
        self.terms().map(|(k, c)| c * Complex64::from_polar(1.0, k as f64 * theta)).sum()
    }

    /// Values at the angles `2πj/n`, exact up to rounding for any band
    /// (frequencies are folded modulo `n`).
    pub fn grid_values(&self, n: usize) -> Vec<Complex64> {
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        for (k, c) in self.terms() {
            buf[k.rem_euclid(n as i64) as usize] += c;
        }
        fft(n, true).process(&mut buf);
        buf
    }

    /// Derivative with respect to the angle.
    pub fn derivative(&self) -> Self {
        Self::from_pairs(self.terms().map(|(k, c)| (k, c * Complex64::new(0.0, k as f64))))
    }

    /// The loop `z ↦ f(1/z)`.
    pub fn reflect(&self) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.reverse();
        Self { band: self.band, coeffs, tail: self.tail }
    }

    /// Loop from equispaced samples, truncated to `band`.
    pub fn from_samples(samples: &[Complex64], band: usize) -> Result<Self> {
        if samples.len() < 2 * band + 1 {
            return Err(Error::InsufficientResolution { samples: samples.len(), band });
        }
        let n = samples.len();
        let spectrum = analyze(samples);
        let floor = roundoff_floor(samples.iter().map(|z| z.norm()).fold(0.0, f64::max));
        let pairs = (-(band as i64)..=band as i64).map(|k| {
            let c = spectrum[k.rem_euclid(n as i64) as usize];
            (k, if c.norm() <= floor { Complex64::new(0.0, 0.0) } else { c })
        });
        Ok(Self::from_pairs(pairs))
    }

    pub fn add(&self, other: &Self) -> Self {
        let b = self.band.max(other.band) as i64;
        let dense = (-b..=b).map(|k| self.coeff(k) + other.coeff(k)).collect();
        Self::from_dense(dense, self.tail + other.tail)
    }

    pub fn sub(&self, other: &Self) -> Self {
        let b = self.band.max(other.band) as i64;
        let dense = (-b..=b).map(|k| self.coeff(k) - other.coeff(k)).collect();
        Self::from_dense(dense, self.tail + other.tail)
    }

    pub fn neg(&self) -> Self {
        Self { band: self.band, coeffs: self.coeffs.iter().map(|c| -c).collect(), tail: self.tail }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::from_dense(self.coeffs.iter().map(|c| c * s).collect(), self.tail * s.norm())
    }

    /// Pointwise product (exact convolution). The operand order is
    /// canonicalized so that `a.mul(b)` and `b.mul(a)` agree bit for bit.
    pub fn mul(&self, other: &Self) -> Self {
        let (x, y) = if self.canonical_key() <= other.canonical_key() { (self, other) } else { (other, self) };
        let band = x.band + y.band;
        let mut out = vec![Complex64::new(0.0, 0.0); 2 * band + 1];
        for (i, a) in x.coeffs.iter().enumerate() {
            if a.norm() == 0.0 {
                continue;
            }
            for (j, b) in y.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        let tail = x.l1_norm() * y.tail + y.l1_norm() * x.tail + x.tail * y.tail;
        Self::from_dense(out, tail)
    }

    fn canonical_key(&self) -> (usize, Vec<(u64, u64)>) {
        (self.band, self.coeffs.iter().map(|c| (c.re.to_bits(), c.im.to_bits())).collect())
    }

    /// Applies `op` pointwise on a grid and returns the band-limited result,
    /// refining the grid until the spectrum is resolved.
    fn pointwise<F: Fn(Complex64) -> Complex64>(&self, op: F) -> Result<(Self, f64)> {
        let limit = max_band();
        let mut n = (8 * (self.band + 1)).max(64).next_power_of_two();
        loop {
            let values: Vec<Complex64> = self.grid_values(n).into_iter().map(&op).collect();
            let scale = values.iter().map(|z| z.norm()).fold(0.0, f64::max);
            let spectrum = analyze(&values);
            let cutoff = TRUNCATION_THRESHOLD.max(roundoff_floor(scale));
            let half = n as i64 / 2;
            let effective = (-half + 1..half)
                .filter(|k| spectrum[k.rem_euclid(n as i64) as usize].norm() >= cutoff)
                .map(|k| k.unsigned_abs() as usize)
                .max()
                .unwrap_or(0);
            if effective > limit {
                return Err(Error::BandOverflow { band: effective, max: limit });
            }
            if 4 * effective <= n {
                let mut discarded = 0.0;
                let dense: Vec<Complex64> = (-(effective as i64)..=effective as i64)
                    .map(|k| {
                        let c = spectrum[k.rem_euclid(n as i64) as usize];
                        if c.norm() < cutoff {
                            discarded += c.norm();
                            Complex64::new(0.0, 0.0)
                        } else {
                            c
                        }
                    })
                    .collect();
                // the aliasing-free outer spectrum is dropped as well
                for k in effective as i64 + 1..half {
                    discarded += spectrum[k as usize].norm() + spectrum[(n as i64 - k) as usize].norm();
                }
                return Ok((Self::from_dense(dense, 0.0), discarded));
            }
            n *= 2;
        }
    }

    pub fn exp(&self) -> Result<Self> {
        let (out, discarded) = self.pointwise(|z| z.exp())?;
        let propagated = (self.l1_norm()).exp() * self.tail.exp_m1();
        Ok(out.with_tail(discarded + propagated))
    }

    /// Pointwise reciprocal; requires a nonvanishing loop of winding zero.
    pub fn inv(&self) -> Result<Self> {
        let w = self.winding_number()?;
        if w != 0 {
            return Err(Error::NonzeroWinding { winding: w });
        }
        let (out, discarded) = self.pointwise(|z| z.inv())?;
        let norm_inv = out.l1_norm();
        let propagated = if self.tail == 0.0 {
            0.0
        } else {
            let r = norm_inv * self.tail;
            if r < 1.0 {
                norm_inv * r / (1.0 - r)
            } else {
                f64::INFINITY
            }
        };
        Ok(out.with_tail(discarded + propagated))
    }

    /// Number of turns around the origin, by phase unwrapping.
    pub fn winding_number(&self) -> Result<i64> {
        let deriv = self.derivative();
        let mut n = GRID;
        for level in 0..=GRID_REFINEMENTS {
            let values = self.grid_values(n);
            let dvalues = deriv.grid_values(n);
            let h = 2.0 * PI / n as f64;
            let mut total = 0.0;
            let mut max_step: f64 = 0.0;
            for j in 0..n {
                let v = values[j];
                if v.norm() < VANISHING_THRESHOLD {
                    return Err(Error::LoopNotInvertible { theta: j as f64 * h, modulus: v.norm() });
                }
                let next = values[(j + 1) % n];
                let step = (next / v).arg();
                let rate = (dvalues[j] / v).im.abs().max((dvalues[(j + 1) % n] / next).im.abs());
                max_step = max_step.max(step.abs()).max(rate * h);
                total += step;
            }
            if max_step < PI / 2.0 || (level == GRID_REFINEMENTS && max_step < PI) {
                return Ok((total / (2.0 * PI)).round() as i64);
            }
            if level == GRID_REFINEMENTS {
                return Err(Error::GridTooCoarse { grid: n, step: max_step });
            }
            n *= 2;
        }
        unreachable!()
    }

    /// Factors the loop as `z^n e^{a(z)}`.
    pub fn log_split(&self) -> Result<LoopLog> {
        let winding = self.winding_number()?;
        let mut n = GRID.max((8 * (self.band + 1)).next_power_of_two());
        let limit = (64 * GRID).max(n);
        loop {
            let values = self.grid_values(n);
            let mut logs = Vec::with_capacity(n);
            let mut phase = 0.0;
            let mut prev = Complex64::new(0.0, 0.0);
            for (j, v) in values.iter().enumerate() {
                let theta = 2.0 * PI * j as f64 / n as f64;
                let g = v * Complex64::from_polar(1.0, -(winding as f64) * theta);
                if g.norm() < VANISHING_THRESHOLD {
                    return Err(Error::LoopNotInvertible { theta, modulus: g.norm() });
                }
                phase = if j == 0 { g.arg() } else { phase + (g / prev).arg() };
                prev = g;
                logs.push(Complex64::new(g.norm().ln(), phase));
            }
            let scale = logs.iter().map(|z| z.norm()).fold(1.0, f64::max);
            let spectrum = analyze(&logs);
            let cutoff = TRUNCATION_THRESHOLD.max(roundoff_floor(scale));
            let half = n as i64 / 2;
            let effective = (-half + 1..half)
                .filter(|k| spectrum[k.rem_euclid(n as i64) as usize].norm() >= cutoff)
                .map(|k| k.unsigned_abs() as usize)
                .max()
                .unwrap_or(0);
            if 4 * effective <= n {
                let mut discarded = 0.0;
                let mut dense: Vec<Complex64> = (-(effective as i64)..=effective as i64)
                    .map(|k| {
                        let c = spectrum[k.rem_euclid(n as i64) as usize];
                        if c.norm() < cutoff {
                            discarded += c.norm();
                            Complex64::new(0.0, 0.0)
                        } else {
                            c
                        }
                    })
                    .collect();
                let at_zero: Complex64 = dense.iter().sum();
                let turns = branch_turns(at_zero.im);
                dense[effective] -= Complex64::new(0.0, 2.0 * PI * turns as f64);
                let log = Self::from_dense(dense, discarded);
                return Ok(LoopLog { winding, log });
            }
            if n >= limit {
                return Err(Error::InsufficientResolution { samples: n, band: effective });
            }
            n *= 2;
        }
    }

    /// `(1/2π)∫ f dθ`, read off as the constant coefficient.
    pub fn circle_integral(&self) -> Complex64 {
        self.coeff(0)
    }

    /// `(1/2π)∫ f dθ` by the trapezoidal rule on `n` points.
    pub fn circle_integral_quadrature(&self, n: usize) -> Complex64 {
        compensated_sum(self.grid_values(n)) / n as f64
    }
}

/// Number of `2π` turns to subtract so that `im` lands in `(-π, π]`.
fn branch_turns(im: f64) -> i64 {
    let mut turns = (im / (2.0 * PI)).round() as i64;
    let r = im - 2.0 * PI * turns as f64;
    if r <= -PI {
        turns -= 1;
    } else if r > PI {
        turns += 1;
    }
    turns
}

/// `Σ_k k a_{-k} b_k`, which equals `(1/2πi)∫ a b′ dθ`.
pub fn pairing_integral(a: &FourierLoop, b: &FourierLoop) -> Complex64 {
    b.terms().filter(|(k, _)| *k != 0).map(|(k, bk)| a.coeff(-k) * bk * k as f64).sum()
}

/// `(1/2πi)∫ a b′ dθ` by the trapezoidal rule on `n` points.
pub fn pairing_integral_quadrature(a: &FourierLoop, b: &FourierLoop, n: usize) -> Complex64 {
    let av = a.grid_values(n);
    let dbv = b.derivative().grid_values(n);
    let mean = compensated_sum(av.iter().zip(&dbv).map(|(x, y)| x * y)) / n as f64;
    mean / Complex64::new(0.0, 1.0)
}

/// Neumaier-compensated sum.
fn compensated_sum<I: IntoIterator<Item = Complex64>>(terms: I) -> Complex64 {
    fn add(sum: &mut f64, comp: &mut f64, x: f64) {
        let t = *sum + x;
        if sum.abs() >= x.abs() {
            *comp += (*sum - t) + x;
        } else {
            *comp += (x - t) + *sum;
        }
        *sum = t;
    }
    let (mut re, mut cre, mut im, mut cim) = (0.0, 0.0, 0.0, 0.0);
    for z in terms {
        add(&mut re, &mut cre, z.re);
        add(&mut im, &mut cim, z.im);
    }
    Complex64::new(re + cre, im + cim)
}

/// A nonvanishing loop written as `z^winding · e^{log(z)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct LoopLog {
    pub winding: i64,
    pub log: FourierLoop,
}

impl LoopLog {
    pub fn new(winding: i64, log: FourierLoop) -> Self {
        Self { winding, log }
    }

    pub fn eval(&self, theta: f64) -> Complex64 {
        Complex64::from_polar(1.0, self.winding as f64 * theta) * self.log.eval(theta).exp()
    }

    /// The loop itself, with the exponential expanded into coefficients.
    pub fn to_loop(&self) -> Result<FourierLoop> {
        let e = self.log.exp()?;
        let tail = e.tail_bound();
        Ok(FourierLoop::from_pairs(e.terms().map(|(k, c)| (k + self.winding, c))).with_tail(tail))
    }

    /// Pointwise product: windings add, logarithms add.
    pub fn mul(&self, other: &Self) -> Self {
        Self { winding: self.winding + other.winding, log: self.log.add(&other.log) }
    }

    /// Largest deviation between the factored form and `target` on a grid.
    pub fn reconstruction_error(&self, target: &FourierLoop, n: usize) -> f64 {
        let logs = self.log.grid_values(n);
        let vals = target.grid_values(n);
        (0..n)
            .map(|j| {
                let theta = 2.0 * PI * j as f64 / n as f64;
                let r = Complex64::from_polar(1.0, self.winding as f64 * theta) * logs[j].exp();
                (r - vals[j]).norm()
            })
            .fold(0.0, f64::max)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LoopWire {
    coeffs: Vec<(i64, f64, f64)>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LoopLogWire {
    winding: i64,
    log_coeffs: Vec<(i64, f64, f64)>,
}

fn to_triples(f: &FourierLoop) -> Vec<(i64, f64, f64)> {
    f.terms().map(|(k, c)| (k, c.re, c.im)).collect()
}

fn from_triples(t: &[(i64, f64, f64)]) -> std::result::Result<FourierLoop, String> {
    let mut seen = std::collections::BTreeSet::new();
    for (k, re, im) in t {
        if !seen.insert(*k) {
            return Err(format!("frequency {k} listed twice"));
        }
        if !re.is_finite() || !im.is_finite() {
            return Err(format!("non-finite coefficient at frequency {k}"));
        }
    }
    Ok(FourierLoop::from_pairs(t.iter().map(|(k, re, im)| (*k, Complex64::new(*re, *im)))))
}

impl Serialize for FourierLoop {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        LoopWire { coeffs: to_triples(self) }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for FourierLoop {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let w = LoopWire::deserialize(d)?;
        from_triples(&w.coeffs).map_err(serde::de::Error::custom)
    }
}

impl Serialize for LoopLog {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        LoopLogWire { winding: self.winding, log_coeffs: to_triples(&self.log) }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for LoopLog {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let w = LoopLogWire::deserialize(d)?;
        Ok(LoopLog { winding: w.winding, log: from_triples(&w.log_coeffs).map_err(serde::de::Error::custom)? })
    }
}
