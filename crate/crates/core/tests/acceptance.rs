//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use std::process::ExitCode;
use std::time::Instant;

use fredk2::corpus::{random_loop, symbol_corpus};
use fredk2::cyclic::{boundary_trace_check, gamma_log, gamma_log_chain, normalized_boundary, tilde_gamma, CyclicChain, SimplexPath};
use fredk2::fourier::{pairing_integral, FourierLoop, LoopLog};
use fredk2::fredholm::{check_det_exp_pair, mult_commutator_det, path_log_det, OperatorPath};
use fredk2::group::homology::{homology, random_chain, random_two_cycle};
use fredk2::group::{
    bar_boundary, catalog, coker_boundary, coker_pair, cone_boundary, f_phi_section, psi_of_boundary, ConeChain,
    ConnectingSign, Group, KernelQuotient, Surjection,
};
use fredk2::invariants::{
    det_invariant_closed, det_invariant_integral, det_invariant_operator, mult_character, rho,
    OperatorValue, SteinbergSymbol, DEFAULT_WINDOW,
};
use fredk2::linalg::{self, expm, identity, CMatrix};
use fredk2::toeplitz::{shift_conjugation_trace, ToeplitzOp};
use fredk2::Result;
use ndarray::Array2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CORPUS_SEED: u64 = 20_241;
const CORPUS_SIZE: usize = 50;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

fn random_matrix(rng: &mut ChaCha8Rng, n: usize, r: f64) -> CMatrix {
    Array2::from_shape_fn((n, n), |_| c(rng.gen_range(-r..r), rng.gen_range(-r..r)))
}

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn check(pass: bool, detail: String) -> Self {
        Self { pass, detail }
    }
}

struct Corpus {
    symbols: Vec<SteinbergSymbol>,
    operator: Vec<OperatorValue>,
    seconds: f64,
}

fn corpus() -> Result<Corpus> {
    let start = Instant::now();
    let symbols = symbol_corpus(CORPUS_SEED, CORPUS_SIZE);
    let operator = symbols.iter().map(|s| det_invariant_operator(s, DEFAULT_WINDOW, true)).collect::<Result<_>>()?;
    Ok(Corpus { symbols, operator, seconds: start.elapsed().as_secs_f64() })
}

fn three_paths(k: &Corpus) -> Result<Outcome> {
    let (mut ci, mut co) = (0.0f64, 0.0f64);
    for (s, op) in k.symbols.iter().zip(&k.operator) {
        let closed = det_invariant_closed(s);
        ci = ci.max(rel(det_invariant_integral(s), closed));
        co = co.max(rel(op.value, closed));
    }
    Ok(Outcome::check(
        ci <= 1e-10 && co <= 1e-8,
        format!("{} symbols, closed/integral {ci:.2e} (<= 1e-10), closed/operator {co:.2e} (<= 1e-8), {:.1} s", k.symbols.len(), k.seconds),
    ))
}

fn character_exponential(k: &Corpus) -> Result<Outcome> {
    let worst = k.symbols.iter().zip(&k.operator).map(|(s, op)| rel(mult_character(s).exp(), op.value)).fold(0.0, f64::max);
    Ok(Outcome::check(worst <= 1e-8, format!("exp(character) vs operator determinant {worst:.2e} (<= 1e-8)")))
}

fn fixed_values() -> Result<Outcome> {
    let zz = SteinbergSymbol::new(LoopLog::new(1, FourierLoop::zero()), LoopLog::new(1, FourierLoop::zero()));
    let minus_one = c(-1.0, 0.0);
    let exact = det_invariant_closed(&zz) == minus_one && det_invariant_integral(&zz) == minus_one;
    let op = (det_invariant_operator(&zz, DEFAULT_WINDOW, true)?.value - minus_one).norm();
    let w = 64;
    let (s, sa) = (ToeplitzOp::shift(w), ToeplitzOp::shift_adjoint(w));
    let comm = s.commutator(&sa).op_trace()?;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut closed_exact, mut window_err) = (true, 0.0f64);
    for _ in 0..20 {
        let b = random_loop(&mut rng, 6, 0.3);
        closed_exact &= shift_conjugation_trace(&b) == -b.coeff(0);
        let tb = ToeplitzOp::toeplitz(&b, w)?;
        let t = s.mul(&tb).mul(&sa).sub(&tb).op_trace()?;
        window_err = window_err.max((t + b.coeff(0)).norm());
    }
    let pass = exact && op <= 1e-8 && comm == minus_one && closed_exact && window_err <= 1e-10;
    Ok(Outcome::check(
        pass,
        format!(
            "{{z,z}} closed/integral exact: {exact}, operator {op:.2e}; Tr[S,S*] = {comm}; shift trace closed exact: {closed_exact}, window {window_err:.2e}"
        ),
    ))
}

fn helton_howe() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let (a, b) = (random_loop(&mut rng, 6, 0.3), random_loop(&mut rng, 6, 0.3));
        let ea = ToeplitzOp::toeplitz(&a, DEFAULT_WINDOW)?.exp_op()?;
        let eb = ToeplitzOp::toeplitz(&b, DEFAULT_WINDOW)?.exp_op()?;
        worst = worst.max(rel(mult_commutator_det(&ea, &eb)?.value, pairing_integral(&a, &b).exp()));
    }
    Ok(Outcome::check(worst <= 1e-8, format!("20 pairs, det(e^A e^B e^-A e^-B) vs exp(Σ k a_-k b_k) {worst:.2e} (<= 1e-8)")))
}

fn exponential_determinants() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut pair = 0.0f64;
    for _ in 0..100 {
        let (x, y) = (random_matrix(&mut rng, 30, 0.3), random_matrix(&mut rng, 30, 0.3));
        pair = pair.max(check_det_exp_pair(&x, &y)?.relative_error);
    }
    let mut path = 0.0f64;
    for _ in 0..20 {
        // F(t) = e^{tX} (1 + t^2 B)
        let (x, b) = (random_matrix(&mut rng, 8, 0.4), random_matrix(&mut rng, 8, 0.05));
        let (x1, b1, x2, b2) = (x.clone(), b.clone(), x.clone(), b.clone());
        let p = OperatorPath::new(
            move |t| Ok(expm(&(&x1 * c(t, 0.0)).view())?.dot(&(identity(8) + &b1 * c(t * t, 0.0)))),
            move |t| {
                let e = expm(&(&x2 * c(t, 0.0)).view())?;
                Ok(x2.dot(&e).dot(&(identity(8) + &b2 * c(t * t, 0.0))) + e.dot(&b2) * c(2.0 * t, 0.0))
            },
        );
        let end = linalg::det(&p.value(1.0)?.view())?;
        path = path.max(rel(path_log_det(&p)?.value.exp(), end));
    }
    Ok(Outcome::check(
        pair <= 1e-10 && path <= 1e-9,
        format!("100 pairs det(e^x e^-y) {pair:.2e} (<= 1e-10); 20 paths exp(∫Tr F^-1 F') {path:.2e} (<= 1e-9)"),
    ))
}

/// σ(s, t) = e^{sX} e^{tY} e^{stZ}
fn two_parameter_path(x: CMatrix, y: CMatrix, z: CMatrix) -> SimplexPath<CMatrix> {
    let parts = move |s: f64, t: f64| -> Result<[CMatrix; 6]> {
        let e = |m: &CMatrix, u: f64| expm(&(m * c(u, 0.0)).view());
        Ok([e(&x, s)?, e(&y, t)?, e(&z, s * t)?, x.clone(), y.clone(), z.clone()])
    };
    let (p1, p2) = (parts.clone(), parts.clone());
    SimplexPath::triangle(
        move |s, t| {
            let [ex, ey, ez, ..] = parts(s, t)?;
            Ok(ex.dot(&ey).dot(&ez))
        },
        move |s, t| {
            let [ex, ey, ez, x, _, z] = p1(s, t)?;
            Ok(x.dot(&ex).dot(&ey).dot(&ez) + ex.dot(&ey).dot(&z).dot(&ez) * c(t, 0.0))
        },
        move |s, t| {
            let [ex, ey, ez, _, y, z] = p2(s, t)?;
            Ok(ex.dot(&y).dot(&ey).dot(&ez) + ex.dot(&ey).dot(&z).dot(&ez) * c(s, 0.0))
        },
    )
}

fn exp_path<A: fredk2::cyclic::Algebra>(x: A, exp: fn(&A) -> Result<A>) -> SimplexPath<A> {
    let xd = x.clone();
    SimplexPath::interval(
        move |t| exp(&x.times(c(t, 0.0))),
        move |t| xd.product(&exp(&xd.times(c(t, 0.0)))?),
    )
}

fn chain_identities() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut gamma = 0.0f64;
    for _ in 0..10 {
        let (x, y, z) = (random_matrix(&mut rng, 4, 0.5), random_matrix(&mut rng, 4, 0.5), random_matrix(&mut rng, 4, 0.5));
        let s = two_parameter_path(x, y, z);
        let lhs = gamma_log(&s)?.b()?.collapse()?;
        let rhs = gamma_log_chain(&normalized_boundary(&s)?)?.collapse()?;
        gamma = gamma.max(linalg::max_abs(&(&lhs - &rhs).view()) / linalg::max_abs(&lhs.view()).max(1.0));
    }
    let w = 64;
    let (mut cocycle, mut defect, mut largest) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..10 {
        let mut ch = CyclicChain::zero(1);
        for _ in 0..rng.gen_range(1..=3) {
            let (f, g) = (random_loop(&mut rng, 4, 0.5), random_loop(&mut rng, 4, 0.5));
            ch.push(c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)), vec![rho(&f, w)?, rho(&g, w)?])?;
        }
        let check = boundary_trace_check(&ch)?;
        cocycle = cocycle.max((check.tau - check.boundary_trace).norm() / check.tau.norm().max(1.0));
        defect = defect.max(check.cycle_defect);
        largest = largest.max(check.tau.norm());
    }
    let (mut forms, mut det_dense, mut det_op) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..10 {
        let (x, y) = (random_matrix(&mut rng, 5, 0.4), random_matrix(&mut rng, 5, 0.4));
        let g = tilde_gamma(&exp_path(x.clone(), |m| expm(&m.view())), &exp_path(y.clone(), |m| expm(&m.view())))?;
        forms = forms.max(g.delta / g.value.norm().max(1.0));
        let end = linalg::det(&expm(&x.mapv(|v| -v).view())?.dot(&expm(&y.view())?).view())?;
        det_dense = det_dense.max(rel(g.value.exp(), end));
    }
    for _ in 0..3 {
        let a = random_loop(&mut rng, 3, 0.3);
        let x = ToeplitzOp::toeplitz(&a, w)?;
        let y = x.add(&ToeplitzOp::finite(&random_matrix(&mut rng, 4, 0.2).view(), w));
        let g = tilde_gamma(&exp_path(x.clone(), ToeplitzOp::exp_op), &exp_path(y.clone(), ToeplitzOp::exp_op))?;
        forms = forms.max(g.delta / g.value.norm().max(1.0));
        let end = x.neg().exp_op()?.mul(&y.exp_op()?).det1p_with_tolerance(1e-10)?.value;
        det_op = det_op.max(rel(g.value.exp(), end));
    }
    Ok(Outcome::check(
        gamma <= 1e-7 && cocycle <= 1e-9 && defect <= 1e-10 && forms <= 1e-9 && det_dense <= 1e-9 && det_op <= 1e-9,
        format!(
            "b∘γ vs γ∘d {gamma:.2e} (<= 1e-7); cocycle vs boundary trace {cocycle:.2e} (<= 1e-9, |τ| up to {largest:.2e}, cycle defect {defect:.1e}); relative log forms {forms:.2e}, exp vs det dense {det_dense:.2e} operator {det_op:.2e} (<= 1e-9)"
        ),
    ))
}

fn group_equality() -> Result<Outcome> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut cycles, mut failures, mut independence) = (0usize, 0usize, 0usize);
    let mut squares = true;
    for s in catalog::standard_surjections() {
        let (phi, alt) = (&s.hom, &s.alternate);
        let (g, h) = (phi.source(), phi.target());
        let h2 = homology(h, 2)?;
        let (q, qa) = (KernelQuotient::new(phi), KernelQuotient::new(alt));
        for _ in 0..100 {
            let x = random_two_cycle(h, &h2, &mut rng);
            let f = q.evaluate(g, &f_phi_section(phi, &x)?)?;
            let p = q.evaluate(g, &psi_of_boundary(phi, &x, ConnectingSign::Section)?)?;
            let fa = qa.evaluate(g, &f_phi_section(alt, &x)?)?;
            let pa = qa.evaluate(g, &psi_of_boundary(alt, &x, ConnectingSign::Section)?)?;
            cycles += 1;
            failures += usize::from(f != p) + usize::from(fa != pa);
            independence += usize::from(f != fa);
        }
        for degree in 1..=3 {
            let cone = ConeChain { y: random_chain(h, degree + 1, 6, &mut rng), x: random_chain(g, degree, 6, &mut rng) };
            let dd = cone_boundary(phi, &cone_boundary(phi, &cone)?)?;
            squares &= dd.x.is_zero() && dd.y.is_zero();
            let t: Vec<usize> = (0..degree).map(|_| rng.gen_range(0..g.order())).collect();
            let kernel: Vec<usize> = phi.kernel().into_iter().collect();
            let t2: Vec<usize> = t.iter().map(|x| g.mul(x, &kernel[rng.gen_range(0..kernel.len())])).collect();
            let pair = coker_pair(phi, &t, &t2, 2)?;
            squares &= coker_boundary(phi, &coker_boundary(phi, &pair)?)?.is_zero();
        }
    }
    for (_, g) in catalog::standard_groups() {
        for degree in 2..=4 {
            let ch = random_chain(&g, degree, 8, &mut rng);
            squares &= bar_boundary(&g, &bar_boundary(&g, &ch)).is_zero();
        }
    }
    let z2 = catalog::cyclic(2);
    let h2_z2 = homology(&z2, 2)?;
    let h2_v4 = homology(&catalog::direct_product(&z2, &z2), 2)?;
    let values = h2_z2.is_trivial() && h2_v4.rank == 0 && h2_v4.torsion == vec![2];
    let secs = start.elapsed().as_secs_f64();
    Ok(Outcome::check(
        failures == 0 && independence == 0 && squares && values && secs < 120.0,
        format!(
            "{cycles} cycles over 5 surjections, {failures} equality failures, {independence} section disagreements; d^2 = 0: {squares}; H2(Z2) = {h2_z2}, H2(Z2xZ2) = {h2_v4}; {secs:.1} s"
        ),
    ))
}

fn structural(k: &Corpus) -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let w = 96;
    let mut symbol_exact = true;
    for _ in 0..20 {
        let (a, b) = (random_loop(&mut rng, 6, 0.3), random_loop(&mut rng, 6, 0.3));
        let mut ka = Array2::zeros((6, 6));
        ka[[rng.gen_range(0..6), rng.gen_range(0..6)]] = c(rng.gen_range(-1.0..1.0), 0.0);
        let x = ToeplitzOp::toeplitz(&a, w)?.add(&ToeplitzOp::finite(&ka.view(), w));
        let y = ToeplitzOp::toeplitz(&b, w)?.exp_op()?;
        symbol_exact &= x.mul(&y).symbol() == &a.mul(y.symbol());
        let (ra, rb) = (rho(&a, w)?, rho(&b, w)?);
        let prod = ra.mul(&rb)?;
        let target = a.mul(&b);
        symbol_exact &= prod.block(0, 0).symbol() == &target && prod.block(1, 1).symbol() == &a.reflect().mul(&b.reflect());
    }
    for k1 in -3..=3i64 {
        for k2 in -3..=3i64 {
            let zk = |k: i64| rho(&FourierLoop::monomial(k, c(1.0, 0.0)), 16);
            symbol_exact &= zk(k1)?.mul(&zk(k2)?)? == zk(k1 + k2)?;
        }
    }
    let (mut conj, mut mult) = (0.0f64, 0.0f64);
    for _ in 0..10 {
        let a = random_loop(&mut rng, 4, 0.3);
        let b = random_loop(&mut rng, 4, 0.3);
        let kx = random_matrix(&mut rng, 8, 0.2);
        let x = ToeplitzOp::identity(w).add(&ToeplitzOp::finite(&kx.view(), w));
        let (ea, eb) = (ToeplitzOp::toeplitz(&a, w)?.exp_op()?, ToeplitzOp::toeplitz(&b, w)?.exp_op()?);
        let g = ea.mul(&eb);
        let conjugated = g.mul(&x).mul(&g.inv()?);
        let dx = x.det1p()?.value;
        conj = conj.max(rel(conjugated.det1p_with_tolerance(1e-10)?.value, dx));
        let y = ea.mul(&eb).mul(&ToeplitzOp::toeplitz(&a.add(&b), w)?.neg().exp_op()?);
        let dy = y.det1p_with_tolerance(1e-10)?.value;
        mult = mult.max(rel(x.mul(&y).det1p_with_tolerance(1e-10)?.value, dx * dy));
    }
    let mut doubling_ok = true;
    let mut worst_ratio = 0.0f64;
    for op in &k.operator {
        let delta = op.doubling_delta().unwrap_or(f64::INFINITY);
        doubling_ok &= delta <= op.error;
        if op.error > 0.0 {
            worst_ratio = worst_ratio.max(delta / op.error);
        }
    }
    Ok(Outcome::check(
        symbol_exact && conj <= 1e-9 && mult <= 1e-9 && doubling_ok,
        format!(
            "symbol multiplicativity exact: {symbol_exact}; det conjugation {conj:.2e}, multiplicativity {mult:.2e} (<= 1e-9); doubling delta <= tail bound on {} symbols: {doubling_ok} (worst ratio {worst_ratio:.2e})",
            k.operator.len()
        ),
    ))
}

fn main() -> ExitCode {
    let corpus = corpus();
    let run = |f: &dyn Fn() -> Result<Outcome>| f().unwrap_or_else(|e| Outcome::check(false, format!("error: {e}")));
    let with_corpus = |f: fn(&Corpus) -> Result<Outcome>| match &corpus {
        Ok(k) => run(&|| f(k)),
        Err(e) => Outcome::check(false, format!("corpus failed: {e}")),
    };
    let results = [
        ("three-path agreement", with_corpus(three_paths)),
        ("character exponential", with_corpus(character_exponential)),
        ("fixed values", run(&fixed_values)),
        ("Helton-Howe", run(&helton_howe)),
        ("exponential determinants", run(&exponential_determinants)),
        ("chain identities", run(&chain_identities)),
        ("group homology equality", run(&group_equality)),
        ("structural invariants", with_corpus(structural)),
    ];
    let mut all = true;
    for (i, (name, o)) in results.iter().enumerate() {
        println!("[{}] criterion {} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail);
        all &= o.pass;
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
