//! Dense complex linear algebra: LU with partial pivoting, determinants,
//! solves and the scaling-and-squaring matrix exponential.
//!
//! Everything here is sequential with a fixed reduction order, so results are
//! bit-reproducible on a given platform.

use ndarray::{s, Array2, ArrayView2, Axis, Zip};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = Array2<Complex64>;

pub const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
pub const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

pub fn identity(n: usize) -> CMatrix {
    Array2::from_diag_elem(n, ONE)
}

pub fn trace(a: &ArrayView2<'_, Complex64>) -> Complex64 {
    a.diag().iter().fold(ZERO, |acc, z| acc + z)
}

/// Maximum absolute column sum.
pub fn norm_1(a: &ArrayView2<'_, Complex64>) -> f64 {
    a.axis_iter(Axis(1))
        .map(|col| col.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn norm_inf(a: &ArrayView2<'_, Complex64>) -> f64 {
    a.axis_iter(Axis(0))
        .map(|row| row.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `sqrt(‖A‖₁‖A‖∞)`, an upper bound for the spectral norm.
pub fn norm_2_bound(a: &ArrayView2<'_, Complex64>) -> f64 {
    (norm_1(a) * norm_inf(a)).sqrt()
}

/// Zeroes entries with modulus at most `threshold` and returns their total mass.
pub fn drop_below(a: &mut CMatrix, threshold: f64) -> f64 {
    let mut mass = 0.0;
    for z in a.iter_mut() {
        if *z != ZERO && z.norm() <= threshold {
            mass += z.norm();
            *z = ZERO;
        }
    }
    mass
}

pub fn norm_fro(a: &ArrayView2<'_, Complex64>) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Sum of absolute values of all entries; an upper bound for the trace norm.
pub fn entry_l1(a: &ArrayView2<'_, Complex64>) -> f64 {
    a.iter().map(|z| z.norm()).sum()
}

pub fn max_abs(a: &ArrayView2<'_, Complex64>) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Packed LU factorization `P A = L U` with unit lower-triangular `L`.
#[derive(Debug, Clone)]
pub struct Lu {
    factors: CMatrix,
    perm: Vec<usize>,
    swaps: usize,
}

impl Lu {
    pub fn new(a: &ArrayView2<'_, Complex64>) -> Result<Self> {
        let n = a.nrows();
        if n != a.ncols() {
            return Err(Error::InvalidInput(format!("LU of non-square {}x{} matrix", n, a.ncols())));
        }
        let mut f = a.as_standard_layout().into_owned();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut swaps = 0;
        let scale = max_abs(a).max(f64::MIN_POSITIVE);
        let data = f.as_slice_mut().expect("standard layout");
        for k in 0..n {
            let mut piv = k;
            let mut pmax = -1.0;
            for i in k..n {
                let v = data[i * n + k].norm();
                if v > pmax {
                    pmax = v;
                    piv = i;
                }
            }
            if pmax <= scale * f64::EPSILON * 1e-3 {
                return Err(Error::NumericallySingular(format!("zero pivot in column {k} of {n}")));
            }
            if piv != k {
                for j in 0..n {
                    data.swap(k * n + j, piv * n + j);
                }
                perm.swap(k, piv);
                swaps += 1;
            }
            let pivot = data[k * n + k];
            let (upper, lower) = data.split_at_mut((k + 1) * n);
            let row_k = &upper[k * n + k + 1..k * n + n];
            for i in 0..n - k - 1 {
                let row_i = &mut lower[i * n..(i + 1) * n];
                let l = row_i[k] / pivot;
                row_i[k] = l;
                if l != ZERO {
                    for (x, u) in row_i[k + 1..].iter_mut().zip(row_k) {
                        *x -= l * u;
                    }
                }
            }
        }
        Ok(Self { factors: f, perm, swaps })
    }

    pub fn det(&self) -> Complex64 {
        let prod = self.factors.diag().iter().fold(ONE, |acc, z| acc * z);
        if self.swaps % 2 == 1 {
            -prod
        } else {
            prod
        }
    }

    /// Sum of logarithms of the pivots plus the permutation sign; the
    /// imaginary part is not reduced.
    pub fn log_det(&self) -> Complex64 {
        let mut acc = self.factors.diag().iter().fold(ZERO, |acc, z| acc + z.ln());
        if self.swaps % 2 == 1 {
            acc += Complex64::new(0.0, std::f64::consts::PI);
        }
        acc
    }

    /// Solves `A X = B` for a matrix right-hand side.
    pub fn solve(&self, b: &ArrayView2<'_, Complex64>) -> CMatrix {
        let n = self.factors.nrows();
        let m = b.ncols();
        let mut x: CMatrix = Array2::zeros((n, m));
        for (i, &p) in self.perm.iter().enumerate() {
            x.row_mut(i).assign(&b.row(p));
        }
        let f = self.factors.as_slice().expect("standard layout");
        let xs = x.as_slice_mut().expect("standard layout");
        for i in 0..n {
            let (done, rest) = xs.split_at_mut(i * m);
            let row_i = &mut rest[..m];
            for k in 0..i {
                let l = f[i * n + k];
                if l != ZERO {
                    for (xi, xk) in row_i.iter_mut().zip(&done[k * m..(k + 1) * m]) {
                        *xi -= l * xk;
                    }
                }
            }
        }
        for i in (0..n).rev() {
            let (head, tail) = xs.split_at_mut((i + 1) * m);
            let row_i = &mut head[i * m..];
            for k in i + 1..n {
                let u = f[i * n + k];
                if u != ZERO {
                    let row_k = &tail[(k - i - 1) * m..(k - i) * m];
                    for (xi, xk) in row_i.iter_mut().zip(row_k) {
                        *xi -= u * xk;
                    }
                }
            }
            let d = f[i * n + i].inv();
            row_i.iter_mut().for_each(|z| *z *= d);
        }
        x
    }

    pub fn inverse(&self) -> CMatrix {
        let n = self.factors.nrows();
        self.solve(&identity(n).view())
    }
}

pub fn det(a: &ArrayView2<'_, Complex64>) -> Result<Complex64> {
    if a.nrows() == 0 {
        return Ok(ONE);
    }
    Ok(Lu::new(a)?.det())
}

pub fn inverse(a: &ArrayView2<'_, Complex64>) -> Result<CMatrix> {
    Ok(Lu::new(a)?.inverse())
}

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371920351148152;

fn axpy_into(out: &mut CMatrix, coeffs: &[(f64, &CMatrix)]) {
    for (c, m) in coeffs {
        Zip::from(&mut *out).and(*m).for_each(|o, &v| *o += v * *c);
    }
}

/// Matrix exponential by scaling and squaring with a degree-13 Padé
/// approximant (Higham 2005).
pub fn expm(a: &ArrayView2<'_, Complex64>) -> Result<CMatrix> {
    let n = a.nrows();
    if n == 0 {
        return Ok(Array2::zeros((0, 0)));
    }
    let norm = norm_1(a);
    let squarings = if norm > THETA13 { (norm / THETA13).log2().ceil() as i32 } else { 0 };
    let scale = 0.5f64.powi(squarings);
    let a = a.mapv(|z| z * scale);
    let id = identity(n);
    let a2 = a.dot(&a);
    let a4 = a2.dot(&a2);
    let a6 = a4.dot(&a2);
    let b = &PADE13;

    let mut inner_u: CMatrix = Array2::zeros((n, n));
    axpy_into(&mut inner_u, &[(b[13], &a6), (b[11], &a4), (b[9], &a2)]);
    let mut u = a6.dot(&inner_u);
    axpy_into(&mut u, &[(b[7], &a6), (b[5], &a4), (b[3], &a2), (b[1], &id)]);
    let u = a.dot(&u);

    let mut inner_v: CMatrix = Array2::zeros((n, n));
    axpy_into(&mut inner_v, &[(b[12], &a6), (b[10], &a4), (b[8], &a2)]);
    let mut v = a6.dot(&inner_v);
    axpy_into(&mut v, &[(b[6], &a6), (b[4], &a4), (b[2], &a2), (b[0], &id)]);

    let p = &v + &u;
    let q = &v - &u;
    let mut r = Lu::new(&q.view())?.solve(&p.view());
    for _ in 0..squarings {
        r = r.dot(&r);
    }
    Ok(r)
}

/// Top-left `rows x cols` block, zero-padded if the source is smaller.
pub fn resized(a: &ArrayView2<'_, Complex64>, rows: usize, cols: usize) -> CMatrix {
    let mut out = Array2::zeros((rows, cols));
    let r = rows.min(a.nrows());
    let c = cols.min(a.ncols());
    out.slice_mut(s![..r, ..c]).assign(&a.slice(s![..r, ..c]));
    out
}

/// Smallest `k` such that all entries outside the leading `k x k` block vanish.
pub fn support(a: &ArrayView2<'_, Complex64>) -> usize {
    let mut k = 0;
    for ((i, j), z) in a.indexed_iter() {
        if *z != ZERO {
            k = k.max(i + 1).max(j + 1);
        }
    }
    k
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn det_of_triangular_and_permuted() {
        let a = array![[c(0.0, 0.0), c(2.0, 0.0)], [c(3.0, 0.0), c(1.0, 1.0)]];
        let d = det(&a.view()).unwrap();
        assert!((d - c(-6.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn singular_matrix_is_reported() {
        let a = array![[c(1.0, 0.0), c(2.0, 0.0)], [c(2.0, 0.0), c(4.0, 0.0)]];
        assert!(matches!(Lu::new(&a.view()), Err(Error::NumericallySingular(_))));
    }

    #[test]
    fn solve_recovers_rhs() {
        let a = array![[c(4.0, 1.0), c(1.0, 0.0)], [c(0.5, -1.0), c(3.0, 0.0)]];
        let b = array![[c(1.0, 0.0)], [c(0.0, 2.0)]];
        let x = Lu::new(&a.view()).unwrap().solve(&b.view());
        let r = a.dot(&x) - &b;
        assert!(max_abs(&r.view()) < 1e-14);
    }

    #[test]
    fn expm_of_diagonal_and_nilpotent() {
        let d = array![[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(-2.0, 0.5)]];
        let e = expm(&d.view()).unwrap();
        assert!((e[[0, 0]] - c(1.0, 0.0).exp()).norm() < 1e-14);
        assert!((e[[1, 1]] - c(-2.0, 0.5).exp()).norm() < 1e-14);
        let n = array![[c(0.0, 0.0), c(7.0, 0.0)], [c(0.0, 0.0), c(0.0, 0.0)]];
        let e = expm(&n.view()).unwrap();
        assert!((e[[0, 1]] - c(7.0, 0.0)).norm() < 1e-13);
        assert!((e[[0, 0]] - ONE).norm() < 1e-14);
    }

    #[test]
    fn expm_large_norm_uses_squaring() {
        // rotation generator: exp(t J) = [[cos, -sin], [sin, cos]]
        let t = 40.0;
        let j = array![[c(0.0, 0.0), c(-t, 0.0)], [c(t, 0.0), c(0.0, 0.0)]];
        let e = expm(&j.view()).unwrap();
        assert!((e[[0, 0]].re - t.cos()).abs() < 1e-11);
        assert!((e[[1, 0]].re - t.sin()).abs() < 1e-11);
    }

    #[test]
    fn support_of_corner_matrix() {
        let mut a: CMatrix = Array2::zeros((5, 5));
        assert_eq!(support(&a.view()), 0);
        a[[1, 3]] = ONE;
        assert_eq!(support(&a.view()), 4);
    }
}
