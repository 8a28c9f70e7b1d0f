//! The four subcommands. Each returns a report; exit codes are decided in `main`.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use fredk2::corpus::symbol_corpus;
use fredk2::fourier::{FourierLoop, LoopLog};
use fredk2::group::catalog::{self, CatalogSurjection};
use fredk2::group::finite::KernelQuotient;
use fredk2::group::homology::{homology, random_two_cycle, HomologyGroup, MAX_ORDER_DEGREE_TWO};
use fredk2::group::{f_phi_section, psi_of_boundary, ConnectingSign, Group, Surjection};
use fredk2::invariants::{
    det_invariant_closed, det_invariant_integral_with, det_invariant_operator, mult_character, shift_representative,
    SteinbergSymbol,
};
use fredk2::{Error, Result};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::RunConfig;
use crate::report::{fmt_complex, relative_delta, Report, Table};

type Timings = BTreeMap<String, f64>;

fn timed<T>(timings: &mut Timings, key: &str, f: impl FnOnce() -> Result<T>) -> Result<T> {
    let start = Instant::now();
    let out = f();
    *timings.entry(key.to_string()).or_default() += start.elapsed().as_secs_f64() * 1e3;
    out
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
}

/// A loop file holds either `{"coeffs": ...}` or `{"winding": n, "log_coeffs": ...}`.
pub fn read_loop(path: &Path) -> Result<LoopLog> {
    let text = read_file(path)?;
    let bad = |e: serde_json::Error| Error::InvalidInput(format!("{}: {e}", path.display()));
    let value: serde_json::Value = serde_json::from_str(&text).map_err(bad)?;
    if value.get("winding").is_some() {
        serde_json::from_value(value).map_err(bad)
    } else {
        let f: FourierLoop = serde_json::from_value(value).map_err(bad)?;
        f.log_split()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Discrepancy {
    pub between: [&'static str; 2],
    pub relative: f64,
    pub tolerance: f64,
    pub within: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SymbolResult {
    pub windings: [i64; 2],
    pub bands: [usize; 2],
    pub values: BTreeMap<&'static str, Complex64>,
    /// Character modulo `2πi`, imaginary part in `(-π, π]`.
    pub character: Complex64,
    pub discrepancies: Vec<Discrepancy>,
    pub operator_tail_bound: Option<f64>,
    pub doubling_delta: Option<f64>,
}

impl Table for SymbolResult {
    fn header(&self) -> Vec<&'static str> {
        vec!["quantity", "re", "im", "relative_delta", "tolerance", "within"]
    }

    fn rows(&self) -> Vec<Vec<String>> {
        let mut rows: Vec<Vec<String>> = self
            .values
            .iter()
            .chain([(&"character", &self.character)])
            .map(|(k, z)| vec![k.to_string(), format!("{:e}", z.re), format!("{:e}", z.im), String::new(), String::new(), String::new()])
            .collect();
        for d in &self.discrepancies {
            rows.push(vec![
                format!("{}/{}", d.between[0], d.between[1]),
                String::new(),
                String::new(),
                format!("{:e}", d.relative),
                format!("{:e}", d.tolerance),
                d.within.to_string(),
            ]);
        }
        for (k, v) in [("operator_tail_bound", self.operator_tail_bound), ("doubling_delta", self.doubling_delta)] {
            if let Some(v) = v {
                rows.push(vec![k.into(), format!("{v:e}"), String::new(), String::new(), String::new(), String::new()]);
            }
        }
        rows
    }
}

pub struct SymbolArgs<'a> {
    pub alpha: &'a Path,
    pub beta: &'a Path,
    pub dump_operator: Option<&'a Path>,
}

pub fn symbol(args: SymbolArgs<'_>, config: &RunConfig) -> Result<Report<SymbolResult>> {
    config.validate()?;
    let mut timings = Timings::new();
    let sym = timed(&mut timings, "load", || Ok(SteinbergSymbol::new(read_loop(args.alpha)?, read_loop(args.beta)?)))?;
    let method = config.method;
    let mut values = BTreeMap::new();
    let (mut tail, mut doubling) = (None, None);
    if method.closed() {
        values.insert("closed", timed(&mut timings, "closed", || Ok(det_invariant_closed(&sym)))?);
    }
    if method.integral() {
        let v = timed(&mut timings, "integral", || Ok(det_invariant_integral_with(&sym, config.quadrature_order)))?;
        values.insert("integral", v);
    }
    if method.operator() {
        config.check_window(config.window, sym.max_band())?;
        let op = timed(&mut timings, "operator", || det_invariant_operator(&sym, config.window, config.is_strict()))?;
        values.insert("operator", op.value);
        tail = Some(op.error);
        doubling = op.doubling_delta();
    }
    if let Some(path) = args.dump_operator {
        let rep = shift_representative(&sym, config.window)?;
        let text = serde_json::to_string(&rep).map_err(|e| Error::InvariantViolation(e.to_string()))?;
        std::fs::write(path, text).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
    }
    let character = timed(&mut timings, "character", || Ok(mult_character(&sym)))?;
    let tolerance = |a: &str, b: &str| {
        if a == "operator" || b == "operator" {
            config.operator_tolerance
        } else {
            config.exact_tolerance
        }
    };
    let mut discrepancies = Vec::new();
    let names: Vec<&'static str> = values.keys().copied().collect();
    for (i, &a) in names.iter().enumerate() {
        for &b in &names[i + 1..] {
            let relative = relative_delta(values[a], values[b]);
            let t = tolerance(a, b);
            discrepancies.push(Discrepancy { between: [a, b], relative, tolerance: t, within: relative <= t });
        }
        let relative = relative_delta(character.exp(), values[a]);
        let t = tolerance(a, "exp_character");
        discrepancies.push(Discrepancy { between: ["exp_character", a], relative, tolerance: t, within: relative <= t });
    }
    let ok = discrepancies.iter().all(|d| d.within);
    let result = SymbolResult {
        windings: [sym.u.winding, sym.v.winding],
        bands: [sym.u.log.band(), sym.v.log.band()],
        values,
        character,
        discrepancies,
        operator_tail_bound: tail,
        doubling_delta: doubling,
    };
    Ok(Report::new("symbol", config, ok, result, timings))
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergeRow {
    pub window: usize,
    pub value: Complex64,
    pub delta: f64,
    pub relative_delta: f64,
    pub tail_bound: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergeResult {
    pub closed: Complex64,
    pub rows: Vec<ConvergeRow>,
    pub final_relative_delta: f64,
    pub tolerance: f64,
    pub flagged: bool,
}

impl Table for ConvergeResult {
    fn header(&self) -> Vec<&'static str> {
        vec!["window", "re", "im", "delta", "relative_delta", "tail_bound"]
    }

    fn rows(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|r| {
                vec![
                    r.window.to_string(),
                    format!("{:e}", r.value.re),
                    format!("{:e}", r.value.im),
                    format!("{:e}", r.delta),
                    format!("{:e}", r.relative_delta),
                    format!("{:e}", r.tail_bound),
                ]
            })
            .collect()
    }
}

/// Operator values over increasing windows, each against the closed form.
pub fn converge(alpha: &Path, beta: &Path, windows: &[usize], config: &RunConfig) -> Result<Report<ConvergeResult>> {
    config.validate()?;
    if windows.is_empty() || windows.windows(2).any(|w| w[0] >= w[1]) || windows[0] == 0 {
        return Err(Error::InvalidInput(format!("windows must be positive and strictly increasing, got {windows:?}")));
    }
    let mut timings = Timings::new();
    let sym = timed(&mut timings, "load", || Ok(SteinbergSymbol::new(read_loop(alpha)?, read_loop(beta)?)))?;
    for &w in windows {
        config.check_window(w, sym.max_band())?;
    }
    let closed = det_invariant_closed(&sym);
    let mut rows = Vec::new();
    for &w in windows {
        let op = timed(&mut timings, &format!("window_{w}"), || det_invariant_operator(&sym, w, false))?;
        rows.push(ConvergeRow {
            window: w,
            value: op.value,
            delta: (op.value - closed).norm(),
            relative_delta: relative_delta(op.value, closed),
            tail_bound: op.error,
        });
    }
    let final_relative_delta = rows.last().map_or(0.0, |r| r.relative_delta);
    let flagged = final_relative_delta > config.operator_tolerance;
    let result = ConvergeResult { closed, rows, final_relative_delta, tolerance: config.operator_tolerance, flagged };
    Ok(Report::new("converge", config, !flagged, result, timings))
}

#[derive(Debug, Clone, Serialize)]
pub struct SurjectionRow {
    pub name: String,
    pub source_order: usize,
    pub target_order: usize,
    /// `None` when the source is too large for degree 2.
    pub h2_source: Option<String>,
    pub h2_target: String,
    /// Order of `ker φ / [G, ker φ]`, where both sides take values.
    pub quotient_order: usize,
    pub samples: usize,
    pub agreements: usize,
    pub section_agreements: usize,
    pub nontrivial: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct HomologyResult {
    pub samples: usize,
    pub surjections: Vec<SurjectionRow>,
}

impl Table for HomologyResult {
    fn header(&self) -> Vec<&'static str> {
        vec![
            "surjection",
            "source_order",
            "target_order",
            "h2_source",
            "h2_target",
            "quotient_order",
            "samples",
            "agreements",
            "section_agreements",
            "nontrivial",
        ]
    }

    fn rows(&self) -> Vec<Vec<String>> {
        self.surjections
            .iter()
            .map(|s| {
                vec![
                    s.name.clone(),
                    s.source_order.to_string(),
                    s.target_order.to_string(),
                    s.h2_source.clone().unwrap_or_else(|| "-".into()),
                    s.h2_target.clone(),
                    s.quotient_order.to_string(),
                    s.samples.to_string(),
                    s.agreements.to_string(),
                    s.section_agreements.to_string(),
                    s.nontrivial.to_string(),
                ]
            })
            .collect()
    }
}

fn check_surjection(s: &CatalogSurjection, samples: usize, rng: &mut ChaCha8Rng) -> Result<SurjectionRow> {
    let (phi, alt) = (&s.hom, &s.alternate);
    let (g, h) = (phi.source(), phi.target());
    let h2_target: HomologyGroup = homology(h, 2)?;
    let h2_source = if g.order() <= MAX_ORDER_DEGREE_TWO { Some(homology(g, 2)?.to_string()) } else { None };
    let (q, qa) = (KernelQuotient::new(phi), KernelQuotient::new(alt));
    let unit = q.class_of(g.identity())?;
    let (mut agreements, mut section_agreements, mut nontrivial) = (0, 0, 0);
    for _ in 0..samples {
        let x = random_two_cycle(h, &h2_target, rng);
        let f = q.evaluate(g, &f_phi_section(phi, &x)?)?;
        let p = q.evaluate(g, &psi_of_boundary(phi, &x, ConnectingSign::Section)?)?;
        let fa = qa.evaluate(g, &f_phi_section(alt, &x)?)?;
        agreements += usize::from(f == p);
        section_agreements += usize::from(f == fa);
        nontrivial += usize::from(f != unit);
    }
    Ok(SurjectionRow {
        name: s.name.clone(),
        source_order: g.order(),
        target_order: h.order(),
        h2_source,
        h2_target: h2_target.to_string(),
        quotient_order: q.order(),
        samples,
        agreements,
        section_agreements,
        nontrivial,
    })
}

/// Compares `f_φ` with `ψ∘(i∘ε)⁻¹∘∂` on sampled 2-cycles of every surjection
/// in the catalog (the built-in one when no file is given).
pub fn homology_run(catalog_file: Option<&Path>, samples: usize, config: &RunConfig) -> Result<Report<HomologyResult>> {
    let mut timings = Timings::new();
    let surjections = timed(&mut timings, "load", || match catalog_file {
        Some(p) => catalog::from_json(&read_file(p)?),
        None => Ok(catalog::standard_surjections()),
    })?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let rows = surjections
        .iter()
        .map(|s| timed(&mut timings, &s.name, || check_surjection(s, samples, &mut rng)))
        .collect::<Result<Vec<_>>>()?;
    let ok = rows.iter().all(|r| r.agreements == r.samples && r.section_agreements == r.samples);
    Ok(Report::new("homology", config, ok, HomologyResult { samples, surjections: rows }, timings))
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SelftestResult {
    pub checks: Vec<Check>,
}

impl Table for SelftestResult {
    fn header(&self) -> Vec<&'static str> {
        vec!["check", "passed", "detail"]
    }

    fn rows(&self) -> Vec<Vec<String>> {
        self.checks.iter().map(|c| vec![c.name.to_string(), c.passed.to_string(), c.detail.clone()]).collect()
    }
}

fn all_methods(sym: &SteinbergSymbol, config: &RunConfig) -> Result<[Complex64; 3]> {
    let op = det_invariant_operator(sym, config.window.max(4 * sym.max_band() + 16), config.is_strict())?;
    Ok([det_invariant_closed(sym), det_invariant_integral_with(sym, config.quadrature_order), op.value])
}

fn value_check(name: &'static str, sym: &SteinbergSymbol, expected: Complex64, config: &RunConfig) -> Result<Check> {
    let [closed, integral, operator] = all_methods(sym, config)?;
    let exact = relative_delta(closed, expected).max(relative_delta(integral, expected));
    let op = relative_delta(operator, expected);
    Ok(Check {
        name,
        passed: exact <= config.exact_tolerance && op <= config.operator_tolerance,
        detail: format!("expected {}, closed/integral {exact:.2e}, operator {op:.2e}", fmt_complex(expected)),
    })
}

fn loop_pair(u: FourierLoop, v: FourierLoop) -> Result<SteinbergSymbol> {
    SteinbergSymbol::from_loops(&u, &v)
}

/// Known values, a seeded corpus and the group equality, at reduced size.
pub fn selftest(config: &RunConfig) -> Result<Report<SelftestResult>> {
    config.validate()?;
    let mut timings = Timings::new();
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let z = FourierLoop::z();
    let mut checks = Vec::new();
    timed(&mut timings, "values", || {
        checks.push(value_check("z_z", &loop_pair(z.clone(), z.clone())?, c(-1.0, 0.0), config)?);
        checks.push(value_check("constant", &loop_pair(FourierLoop::one(), z.clone())?, c(1.0, 0.0), config)?);
        let u = z.mul(&FourierLoop::monomial(1, c(0.3, 0.0)).exp()?);
        let v = z.mul(&FourierLoop::monomial(-1, c(0.2, 0.0)).exp()?);
        checks.push(value_check("exponential_pair", &loop_pair(u, v)?, c(-(-0.06f64).exp(), 0.0), config)?);
        Ok(())
    })?;
    timed(&mut timings, "corpus", || {
        let mut worst = 0.0f64;
        for sym in symbol_corpus(config.seed, 5) {
            let [closed, integral, operator] = all_methods(&sym, config)?;
            let character = mult_character(&sym).exp();
            worst = worst.max(relative_delta(operator, closed) / config.operator_tolerance);
            for v in [integral, character] {
                worst = worst.max(relative_delta(v, closed) / config.exact_tolerance);
            }
        }
        checks.push(Check {
            name: "corpus",
            passed: worst <= 1.0,
            detail: format!("5 seeded symbols, worst delta {worst:.2e} of tolerance"),
        });
        Ok(())
    })?;
    timed(&mut timings, "groups", || {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let (mut samples, mut misses) = (0, 0);
        for s in catalog::standard_surjections() {
            let row = check_surjection(&s, 20, &mut rng)?;
            samples += row.samples;
            misses += 2 * row.samples - row.agreements - row.section_agreements;
        }
        checks.push(Check {
            name: "group_equality",
            passed: misses == 0,
            detail: format!("{samples} cycles, {misses} disagreements"),
        });
        let z2 = catalog::cyclic(2);
        let (a, b) = (homology(&z2, 2)?, homology(&catalog::direct_product(&z2, &z2), 2)?);
        checks.push(Check {
            name: "second_homology",
            passed: a.is_trivial() && b.rank == 0 && b.torsion == [2],
            detail: format!("H2(Z2) = {a}, H2(Z2xZ2) = {b}"),
        });
        Ok(())
    })?;
    let ok = checks.iter().all(|c| c.passed);
    Ok(Report::new("selftest", config, ok, SelftestResult { checks }, timings))
}
