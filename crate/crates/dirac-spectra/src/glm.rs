//! Discretized reconstruction operator: the kernel built from node/weight
//! data, its Nystrom matrices `I + K_x` on `[0, x]`, smallest singular
//! values (solvability of the reconstruction), and a Parseval check for the
//! underlying free basis.

use nalgebra::{DMatrix, DVector, RealField};
use num_complex::Complex;
use num_traits::Float;
use rayon::prelude::*;

use crate::construction::ConstructionData;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::types::Mat2;

/// Free basis column at frequency `lambda`: `(-sin(lambda x), cos(lambda x))`.
fn basis<T: Real>(lambda: T, x: T) -> [T; 2] {
    [-(lambda * x).sin(), (lambda * x).cos()]
}

/// Node/weight rows feeding the kernel: real nodes indexed `-N..=N` and the
/// weights `z_n`, all strictly above the line `Im z = -Re z`.
#[derive(Clone, Debug)]
pub struct KernelData<T> {
    nodes: Vec<T>,
    weights: Vec<Complex<T>>,
}

impl<T: Real> KernelData<T> {
    pub fn new(nodes: Vec<T>, weights: Vec<Complex<T>>) -> Result<Self> {
        if nodes.len() != weights.len() || nodes.len() % 2 == 0 || nodes.is_empty() {
            return Err(Error::Validation(format!(
                "kernel data needs matching odd-length rows, got {} nodes and {} weights",
                nodes.len(),
                weights.len()
            )));
        }
        if !nodes.iter().all(|v| v.is_finite()) {
            return Err(Error::Validation("kernel nodes must be finite".into()));
        }
        for (i, z) in weights.iter().enumerate() {
            if !(z.re + z.im > T::zero()) {
                return Err(Error::Validation(format!(
                    "kernel weight at row {i} is {z}, not above the line Im z = -Re z"
                )));
            }
        }
        Ok(KernelData { nodes, weights })
    }

    /// Rows `|n| <= truncation` of a construction.
    pub fn from_construction(
        data: &ConstructionData<T>,
        truncation: usize,
    ) -> Result<Self> {
        let r = data.range();
        if (truncation as i64) > r {
            return Err(Error::Validation(format!(
                "truncation {truncation} exceeds the construction range {r}"
            )));
        }
        let t = truncation as i64;
        let nodes = (-t..=t).map(|n| data.node(n)).collect();
        let weights = (-t..=t).map(|n| data.weight(n)).collect();
        KernelData::new(nodes, weights)
    }

    /// Integer nodes with flat weights `1/pi`: the kernel vanishes
    /// identically.
    pub fn free(range: usize) -> Self {
        let r = range as i64;
        let inv_pi = Complex::new(T::PI().recip(), T::zero());
        KernelData {
            nodes: (-r..=r).map(|n| T::of(n as f64)).collect(),
            weights: vec![inv_pi; 2 * range + 1],
        }
    }

    pub fn range(&self) -> i64 {
        (self.nodes.len() as i64 - 1) / 2
    }

    /// Kernel value
    /// `F(x, t) = sum_n z_n Y(x, node_n) Y(t, node_n)^T - (1/pi) Y(x, n) Y(t, n)^T`.
    /// Symmetric under swapping `x` and `t` in the sense `F(x,t)^T = F(t,x)`.
    pub fn kernel(&self, x: T, t: T) -> Mat2<T> {
        let r = self.range();
        let inv_pi = T::PI().recip();
        let zero = Complex::new(T::zero(), T::zero());
        let mut e = [[zero; 2]; 2];
        for n in -r..=r {
            let idx = (n + r) as usize;
            let z = self.weights[idx];
            let ux = basis(self.nodes[idx], x);
            let ut = basis(self.nodes[idx], t);
            let vx = basis(T::of(n as f64), x);
            let vt = basis(T::of(n as f64), t);
            for a in 0..2 {
                for b in 0..2 {
                    let node_part = z.scale(ux[a] * ut[b]);
                    let free_part = Complex::new(inv_pi * vx[a] * vt[b], T::zero());
                    e[a][b] = e[a][b] + node_part - free_part;
                }
            }
        }
        Mat2 { a: e[0][0], b: e[0][1], c: e[1][0], d: e[1][1] }
    }

    /// Trapezoid Nystrom matrix of `I + K_x` on `grid` points over `[0, x]`,
    /// interleaved layout: row `2i + a` is component `a` at grid point `i`.
    pub fn nystrom(&self, x: T, grid: usize) -> Result<DMatrix<Complex<T>>> {
        if !(x > T::zero() && x <= T::PI() * T::of(1.0 + 1e-12)) {
            return Err(Error::Validation(format!(
                "endpoint must lie in (0, pi], got {x}"
            )));
        }
        if grid < 8 {
            return Err(Error::Validation(format!(
                "nystrom grid needs at least 8 points, got {grid}"
            )));
        }
        let g = grid;
        let dim = 2 * g;
        let h = x / T::of((g - 1) as f64);
        let zero = Complex::new(T::zero(), T::zero());
        let mut data = vec![zero; dim * dim];
        let r = self.range();
        let inv_pi = T::PI().recip();

        let mut u = vec![[T::zero(); 2]; g];
        let mut v = vec![[T::zero(); 2]; g];
        for n in -r..=r {
            let idx = (n + r) as usize;
            let z = self.weights[idx];
            let lam = self.nodes[idx];
            let li = T::of(n as f64);
            for j in 0..g {
                let s = h * T::of(j as f64);
                u[j] = basis(lam, s);
                v[j] = basis(li, s);
            }
            for j in 0..g {
                let wj = if j == 0 || j == g - 1 { h * T::of(0.5) } else { h };
                for b in 0..2 {
                    let uw = u[j][b] * wj;
                    let vw = v[j][b] * wj * inv_pi;
                    let base = (2 * j + b) * dim;
                    for i in 0..g {
                        let slot0 = base + 2 * i;
                        data[slot0] = data[slot0] + z.scale(u[i][0] * uw)
                            - Complex::new(v[i][0] * vw, T::zero());
                        data[slot0 + 1] = data[slot0 + 1] + z.scale(u[i][1] * uw)
                            - Complex::new(v[i][1] * vw, T::zero());
                    }
                }
            }
        }
        for k in 0..dim {
            data[k * dim + k] = data[k * dim + k] + Complex::new(T::one(), T::zero());
        }
        Ok(DMatrix::from_vec(dim, dim, data))
    }
}

/// Smallest singular value by inverse power iteration on `(A^H A)^{-1}`
/// through two LU factorizations. Deterministic start vector; converges to
/// the inverse square root of the top eigenvalue, which is `sigma_min`.
/// Returns 0 for a singular factorization.
pub fn min_singular_value<T>(m: &DMatrix<Complex<T>>) -> T
where
    T: Real + RealField,
{
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "matrix must be square");
    let lu = m.clone().lu();
    let luh = m.adjoint().lu();

    let mut v = DVector::from_fn(n, |i, _| {
        Complex::new(
            T::of(0.5 + ((i * 37) % 101) as f64 / 101.0),
            T::of(((i * 53) % 97) as f64 / 97.0 - 0.5),
        )
    });
    let nv = v.norm();
    v /= Complex::new(nv, T::zero());

    let mut rho_prev = T::zero();
    let mut rho = T::zero();
    for it in 0..120 {
        let y = match luh.solve(&v) {
            Some(y) => y,
            None => return T::zero(),
        };
        let w = match lu.solve(&y) {
            Some(w) => w,
            None => return T::zero(),
        };
        // v is unit, so the Rayleigh quotient of (A^H A)^{-1} is v^H w.
        rho = v.dotc(&w).re;
        if rho <= T::zero() {
            return T::zero();
        }
        let wn = w.norm();
        if wn == T::zero() {
            return T::zero();
        }
        v = w / Complex::new(wn, T::zero());
        if it > 3 && Float::abs(rho - rho_prev) <= T::of(1e-13) * rho {
            break;
        }
        rho_prev = rho;
    }
    Float::sqrt(Float::recip(rho))
}

/// One endpoint of the solvability scan.
#[derive(Clone, Copy, Debug)]
pub struct SolvabilityRow<T> {
    pub x: T,
    pub sigma_min: T,
}

/// Smallest singular value of `I + K_x` for each requested endpoint,
/// computed in parallel.
pub fn solvability_scan<T>(
    data: &KernelData<T>,
    xs: &[T],
    grid: usize,
) -> Result<Vec<SolvabilityRow<T>>>
where
    T: Real + RealField,
{
    xs.par_iter()
        .map(|&x| {
            let m = data.nystrom(x, grid)?;
            Ok(SolvabilityRow { x, sigma_min: min_singular_value(&m) })
        })
        .collect()
}

/// Parseval defect of two-component samples on a uniform grid over
/// `[0, pi]`: `| ||f||^2 - (1/pi) sum_{|n| <= n_max} |<f, Y_n>|^2 |`, all
/// integrals by the trapezoid rule. Near zero when `f` is a combination of
/// basis columns with frequencies inside the window.
pub fn parseval_defect<T: Real>(samples: &[[Complex<T>; 2]], n_max: usize) -> T {
    assert!(samples.len() >= 2, "need at least 2 samples");
    let g = samples.len();
    let h = T::PI() / T::of((g - 1) as f64);
    let weight = |j: usize| {
        if j == 0 || j == g - 1 {
            h * T::of(0.5)
        } else {
            h
        }
    };

    let mut norm_sq = T::zero();
    for (j, f) in samples.iter().enumerate() {
        norm_sq = norm_sq + weight(j) * (f[0].norm_sqr() + f[1].norm_sqr());
    }

    let r = n_max as i64;
    let mut series = T::zero();
    for n in -r..=r {
        let lam = T::of(n as f64);
        let mut coeff = Complex::new(T::zero(), T::zero());
        for (j, f) in samples.iter().enumerate() {
            let t = h * T::of(j as f64);
            let y = basis(lam, t);
            coeff = coeff + (f[0].scale(y[0]) + f[1].scale(y[1])).scale(weight(j));
        }
        series = series + coeff.norm_sqr();
    }
    Float::abs(norm_sq - series / T::PI())
}
