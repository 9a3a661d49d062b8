//! Core data model: boundary conditions, tolerances, 2x2 complex matrices,
//! sampled potentials, monodromy matrices, and double-indexed spectra.

use std::ops::Mul;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Boundary condition on `[0, pi]`: periodic (`theta = 0`) or antiperiodic
/// (`theta = 1`). Eigenvalues attach to the lattice `2n + theta`, `n` in `Z`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BoundaryKind {
    Periodic,
    Antiperiodic,
}

impl BoundaryKind {
    pub fn theta(self) -> i64 {
        match self {
            BoundaryKind::Periodic => 0,
            BoundaryKind::Antiperiodic => 1,
        }
    }

    pub fn from_theta(theta: i64) -> Result<Self> {
        match theta {
            0 => Ok(BoundaryKind::Periodic),
            1 => Ok(BoundaryKind::Antiperiodic),
            other => Err(Error::Validation(format!(
                "theta must be 0 (periodic) or 1 (antiperiodic), got {other}"
            ))),
        }
    }

    /// Lattice point `2n + theta` the n-th eigenvalue pair clusters around.
    pub fn center<T: Real>(self, n: i64) -> T {
        T::of((2 * n + self.theta()) as f64)
    }

    /// Constant term of the unperturbed characteristic determinant:
    /// `-1` for periodic, `+1` for antiperiodic.
    pub fn det_shift<T: Real>(self) -> T {
        match self {
            BoundaryKind::Periodic => -T::one(),
            BoundaryKind::Antiperiodic => T::one(),
        }
    }
}

/// Numerical knobs shared across the library. `Default` gives the documented
/// baseline; every routine that needs one takes these explicitly.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances<T> {
    /// Cells for the piecewise-frozen monodromy integrator.
    pub integrator_steps: usize,
    /// Index cutoff for product/series evaluation from stored spectra.
    pub truncation: usize,
    /// Radius of the counting disks around lattice points. Must stay below 1
    /// so neighboring disks cannot touch.
    pub disk_radius: T,
    /// Points per disk boundary (winding counts) and per axis in quadrature
    /// grids.
    pub quadrature_points: usize,
    /// Target residual for root refinement; also the floor below which a
    /// boundary sample counts as "zero on the contour".
    pub root_tol: T,
    /// Acceptable deviation of the monodromy determinant from 1.
    pub wronskian_tol: T,
    /// Cutoff for analytically summed tails.
    pub tail_tol: T,
}

impl<T: Real> Default for Tolerances<T> {
    fn default() -> Self {
        Tolerances {
            integrator_steps: 4096,
            truncation: 64,
            disk_radius: T::of(0.45),
            quadrature_points: 256,
            root_tol: T::of(1e-10),
            wronskian_tol: T::of(1e-8),
            tail_tol: T::of(1e-12),
        }
    }
}

impl<T: Real> Tolerances<T> {
    pub fn validate(&self) -> Result<()> {
        if self.integrator_steps < 2 {
            return Err(Error::Validation(format!(
                "integrator_steps must be at least 2, got {}",
                self.integrator_steps
            )));
        }
        if self.quadrature_points < 8 {
            return Err(Error::Validation(format!(
                "quadrature_points must be at least 8, got {}",
                self.quadrature_points
            )));
        }
        if !(self.disk_radius > T::zero() && self.disk_radius < T::one()) {
            return Err(Error::Validation(format!(
                "disk_radius must lie in (0, 1), got {}",
                self.disk_radius
            )));
        }
        for (name, v) in [
            ("root_tol", self.root_tol),
            ("wronskian_tol", self.wronskian_tol),
            ("tail_tol", self.tail_tol),
        ] {
            if !(v > T::zero() && v.is_finite()) {
                return Err(Error::Validation(format!(
                    "{name} must be a positive finite number, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Dense 2x2 complex matrix `[[a, b], [c, d]]`; the working type for
/// transfer matrices. Kept deliberately minimal.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2<T> {
    pub a: Complex<T>,
    pub b: Complex<T>,
    pub c: Complex<T>,
    pub d: Complex<T>,
}

impl<T: Real> Mat2<T> {
    pub fn identity() -> Self {
        let one = Complex::new(T::one(), T::zero());
        let zero = Complex::new(T::zero(), T::zero());
        Mat2 { a: one, b: zero, c: zero, d: one }
    }

    pub fn det(&self) -> Complex<T> {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> Complex<T> {
        self.a + self.d
    }

    pub fn is_finite(&self) -> bool {
        [self.a, self.b, self.c, self.d]
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Largest entrywise absolute difference; the metric used by grid
    /// refinement checks.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        let pairs = [
            (self.a, other.a),
            (self.b, other.b),
            (self.c, other.c),
            (self.d, other.d),
        ];
        pairs
            .iter()
            .map(|(x, y)| (*x - *y).norm())
            .fold(T::zero(), T::max)
    }

    pub fn apply(&self, v: [Complex<T>; 2]) -> [Complex<T>; 2] {
        [self.a * v[0] + self.b * v[1], self.c * v[0] + self.d * v[1]]
    }
}

impl<T: Real> Mul for Mat2<T> {
    type Output = Mat2<T>;

    fn mul(self, rhs: Mat2<T>) -> Mat2<T> {
        Mat2 {
            a: self.a * rhs.a + self.b * rhs.c,
            b: self.a * rhs.b + self.b * rhs.d,
            c: self.c * rhs.a + self.d * rhs.c,
            d: self.c * rhs.b + self.d * rhs.d,
        }
    }
}

/// Transfer matrix of the zero-potential system over `[0, x]`, together with
/// the solution column `(-sin(lambda x), cos(lambda x))` that seeds the
/// reconstruction kernel.
pub fn free_solution<T: Real>(x: T, lambda: Complex<T>) -> (Mat2<T>, [Complex<T>; 2]) {
    let z = lambda.scale(x);
    let (s, c) = (z.sin(), z.cos());
    let e = Mat2 { a: c, b: -s, c: s, d: c };
    (e, [-s, c])
}

/// Uniform piecewise-constant samples of the potential entries on `[0, pi]`:
/// cell `i` of `M` carries the values `(p_i, q_i)` on
/// `[i pi / M, (i+1) pi / M)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PotentialGrid<T> {
    p: Vec<Complex<T>>,
    q: Vec<Complex<T>>,
}

impl<T: Real> PotentialGrid<T> {
    pub fn new(p: Vec<Complex<T>>, q: Vec<Complex<T>>) -> Result<Self> {
        if p.len() != q.len() {
            return Err(Error::Validation(format!(
                "p and q must have equal length, got {} and {}",
                p.len(),
                q.len()
            )));
        }
        if p.len() < 2 {
            return Err(Error::Validation(format!(
                "potential grid needs at least 2 cells, got {}",
                p.len()
            )));
        }
        if !p
            .iter()
            .chain(q.iter())
            .all(|z| z.re.is_finite() && z.im.is_finite())
        {
            return Err(Error::Validation(
                "potential samples must be finite".into(),
            ));
        }
        Ok(PotentialGrid { p, q })
    }

    pub fn zero(cells: usize) -> Self {
        let z = Complex::new(T::zero(), T::zero());
        PotentialGrid { p: vec![z; cells.max(2)], q: vec![z; cells.max(2)] }
    }

    pub fn constant(p: Complex<T>, q: Complex<T>, cells: usize) -> Self {
        PotentialGrid { p: vec![p; cells.max(2)], q: vec![q; cells.max(2)] }
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn samples(&self) -> (&[Complex<T>], &[Complex<T>]) {
        (&self.p, &self.q)
    }

    /// Cell values at position `x`; `x` outside `[0, pi]` clamps to the
    /// nearest cell.
    pub fn value_at(&self, x: T) -> (Complex<T>, Complex<T>) {
        let m = self.p.len();
        let idx = (x / T::PI() * T::of(m as f64)).floor();
        let idx = idx.to_f64().unwrap_or(0.0).max(0.0) as usize;
        let idx = idx.min(m - 1);
        (self.p[idx], self.q[idx])
    }

    /// L2 norm of the matrix potential over the period, computed cellwise:
    /// `sqrt(pi/M * sum(|p_i|^2 + |q_i|^2))`.
    pub fn l2_norm(&self) -> T {
        let sum = self
            .p
            .iter()
            .zip(&self.q)
            .map(|(p, q)| p.norm_sqr() + q.norm_sqr())
            .fold(T::zero(), |acc, v| acc + v);
        (sum * T::PI() / T::of(self.p.len() as f64)).sqrt()
    }
}

/// Transfer matrix over the full period at a fixed spectral parameter,
/// stored entrywise as `[[c1, -s2], [s1, c2]]`.
#[derive(Clone, Copy, Debug)]
pub struct Monodromy<T> {
    pub lambda: Complex<T>,
    pub c1: Complex<T>,
    pub s1: Complex<T>,
    pub s2: Complex<T>,
    pub c2: Complex<T>,
}

impl<T: Real> Monodromy<T> {
    pub fn from_matrix(lambda: Complex<T>, e: Mat2<T>) -> Self {
        Monodromy { lambda, c1: e.a, s1: e.c, s2: -e.b, c2: e.d }
    }

    pub fn matrix(&self) -> Mat2<T> {
        Mat2 { a: self.c1, b: -self.s2, c: self.s1, d: self.c2 }
    }

    pub fn half_trace(&self) -> Complex<T> {
        (self.c1 + self.c2).scale(T::of(0.5))
    }

    /// Characteristic determinant value carried by this monodromy for the
    /// given boundary condition.
    pub fn char_det(&self, kind: BoundaryKind) -> Complex<T> {
        Complex::new(kind.det_shift::<T>(), T::zero()) + self.half_trace()
    }
}

/// Eigenvalue pair table, double-indexed: entry `n` holds
/// `(lambda_{n,1}, lambda_{n,2})` attached to the lattice point `2n + theta`,
/// for `n` in `[-range, range]`. Pairs are normalized to lexicographic order
/// by `(re, im)` at construction so tables compare deterministically.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumTable<T> {
    kind: BoundaryKind,
    pairs: Vec<(Complex<T>, Complex<T>)>,
}

impl<T: Real> SpectrumTable<T> {
    pub fn from_pairs(
        kind: BoundaryKind,
        pairs: Vec<(Complex<T>, Complex<T>)>,
    ) -> Result<Self> {
        if pairs.len() % 2 == 0 || pairs.is_empty() {
            return Err(Error::Validation(format!(
                "spectrum table needs an odd number of rows (indices -N..=N), got {}",
                pairs.len()
            )));
        }
        if !pairs.iter().all(|(a, b)| {
            a.re.is_finite() && a.im.is_finite() && b.re.is_finite() && b.im.is_finite()
        }) {
            return Err(Error::Validation("eigenvalues must be finite".into()));
        }
        let pairs = pairs.into_iter().map(|(a, b)| order_pair(a, b)).collect();
        Ok(SpectrumTable { kind, pairs })
    }

    /// Builds a table by evaluating `f(n) -> (lambda_{n,1}, lambda_{n,2})`
    /// over `n` in `[-range, range]`.
    pub fn tabulate<F>(kind: BoundaryKind, range: usize, mut f: F) -> Self
    where
        F: FnMut(i64) -> (Complex<T>, Complex<T>),
    {
        let r = range as i64;
        let pairs = (-r..=r).map(|n| { let (a, b) = f(n); order_pair(a, b) }).collect();
        SpectrumTable { kind, pairs }
    }

    /// Unperturbed table: both eigenvalues sit exactly on `2n + theta`.
    pub fn free(kind: BoundaryKind, range: usize) -> Self {
        Self::tabulate(kind, range, |n| {
            let c = Complex::new(kind.center::<T>(n), T::zero());
            (c, c)
        })
    }

    pub fn kind(&self) -> BoundaryKind {
        self.kind
    }

    pub fn range(&self) -> i64 {
        (self.pairs.len() as i64 - 1) / 2
    }

    pub fn pair(&self, n: i64) -> (Complex<T>, Complex<T>) {
        let r = self.range();
        assert!(n.abs() <= r, "index {n} outside table range {r}");
        self.pairs[(n + r) as usize]
    }

    /// Offsets `lambda_{n,j} - (2n + theta)` of both pair members.
    pub fn offsets(&self, n: i64) -> (Complex<T>, Complex<T>) {
        let (a, b) = self.pair(n);
        let c = Complex::new(self.kind.center::<T>(n), T::zero());
        (a - c, b - c)
    }

    /// Sum of the two offsets at index `n`; the quantity the averaging
    /// diagnostics consume.
    pub fn offset_sum(&self, n: i64) -> Complex<T> {
        let (d1, d2) = self.offsets(n);
        d1 + d2
    }

    /// Copy restricted to `[-new_range, new_range]`.
    pub fn truncated(&self, new_range: usize) -> Result<Self> {
        let r = self.range();
        if (new_range as i64) > r {
            return Err(Error::Validation(format!(
                "cannot truncate a table of range {r} to larger range {new_range}"
            )));
        }
        let lo = (r - new_range as i64) as usize;
        let hi = (r + new_range as i64) as usize;
        Ok(SpectrumTable { kind: self.kind, pairs: self.pairs[lo..=hi].to_vec() })
    }

    /// Largest offset modulus in the table.
    pub fn sup_offset(&self) -> T {
        let r = self.range();
        (-r..=r)
            .map(|n| {
                let (d1, d2) = self.offsets(n);
                d1.norm().max(d2.norm())
            })
            .fold(T::zero(), T::max)
    }
}

/// Normalizes an eigenvalue pair to lexicographic order by `(re, im)`.
pub(crate) fn order_pair<T: Real>(
    a: Complex<T>,
    b: Complex<T>,
) -> (Complex<T>, Complex<T>) {
    let swap = match a.re.partial_cmp(&b.re) {
        Some(std::cmp::Ordering::Greater) => true,
        Some(std::cmp::Ordering::Equal) => a.im > b.im,
        _ => false,
    };
    if swap {
        (b, a)
    } else {
        (a, b)
    }
}
