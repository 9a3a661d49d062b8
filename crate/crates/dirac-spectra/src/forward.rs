//! Forward problem: monodromy of the first-order system over one period and
//! eigenvalue localization by winding counts on lattice disks.
//!
//! The integrator freezes the coefficient matrix on each cell at its
//! midpoint sample and multiplies exact cell exponentials. The frozen matrix
//! `A = [[q, -(lambda+p)], [lambda-p, -q]]` is traceless, so every cell
//! factor has determinant one and the product preserves the Wronskian
//! structurally; discretization error shows up only in the entries
//! (second order in the step for smooth potentials), never in `det E`.

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::types::{BoundaryKind, Mat2, Monodromy, PotentialGrid, SpectrumTable, Tolerances};

/// `sinh(z)/z`, series near zero to avoid the 0/0.
fn sinhc<T: Real>(z: Complex<T>) -> Complex<T> {
    if z.norm() < T::of(1e-3) {
        let z2 = z * z;
        let one = Complex::new(T::one(), T::zero());
        one + z2.unscale(T::of(6.0)) + z2 * z2.unscale(T::of(120.0))
    } else {
        z.sinh() / z
    }
}

/// Exact exponential of `h * A` for the traceless cell matrix: since
/// `A^2 = (p^2 + q^2 - lambda^2) I`, we get
/// `exp(hA) = cosh(mu) I + h sinhc(mu) A` with `mu^2 = h^2 (p^2+q^2-lambda^2)`.
fn cell_step<T: Real>(
    p: Complex<T>,
    q: Complex<T>,
    lambda: Complex<T>,
    h: T,
) -> Mat2<T> {
    let a12 = -(lambda + p);
    let a21 = lambda - p;
    let mu = ((q * q + p * p - lambda * lambda) * Complex::new(h * h, T::zero())).sqrt();
    let ch = mu.cosh();
    let sh = sinhc(mu).scale(h);
    Mat2 {
        a: ch + sh * q,
        b: sh * a12,
        c: sh * a21,
        d: ch - sh * q,
    }
}

fn mat_pow<T: Real>(m: Mat2<T>, mut e: usize) -> Mat2<T> {
    let mut base = m;
    let mut acc = Mat2::identity();
    while e > 0 {
        if e & 1 == 1 {
            acc = base * acc;
        }
        base = base * base;
        e >>= 1;
    }
    acc
}

/// Monodromy over `[0, pi]` at spectral parameter `lambda`, using `steps`
/// frozen cells. A uniform potential collapses to one cell exponential
/// raised to the `steps`-th power; the cells commute, so the product is the
/// same. Fails on non-finite intermediates.
pub fn propagate<T: Real>(
    potential: &PotentialGrid<T>,
    lambda: Complex<T>,
    steps: usize,
) -> Result<Monodromy<T>> {
    assert!(steps >= 2, "integrator needs at least 2 steps, got {steps}");
    let h = T::PI() / T::of(steps as f64);

    let (ps, qs) = potential.samples();
    let uniform = ps.iter().all(|v| *v == ps[0]) && qs.iter().all(|v| *v == qs[0]);

    let e = if uniform {
        mat_pow(cell_step(ps[0], qs[0], lambda, h), steps)
    } else {
        let mut e = Mat2::identity();
        let half = T::of(0.5);
        for i in 0..steps {
            let x = (T::of(i as f64) + half) * h;
            let (p, q) = potential.value_at(x);
            e = cell_step(p, q, lambda, h) * e;
        }
        e
    };
    if !e.is_finite() {
        return Err(Error::Computation(format!(
            "monodromy overflowed at lambda = {lambda}"
        )));
    }
    Ok(Monodromy::from_matrix(lambda, e))
}

/// `|c1 c2 + s1 s2 - 1|`: how far the monodromy entries drift from the
/// Wronskian identity. Rounding-level for this integrator at any step count.
pub fn wronskian_defect<T: Real>(m: &Monodromy<T>) -> T {
    (m.c1 * m.c2 + m.s1 * m.s2 - Complex::new(T::one(), T::zero())).norm()
}

/// Entrywise distance between the monodromies at `steps` and `2 * steps`
/// cells. Shrinks by a factor of about 4 per doubling for smooth potentials
/// (the integrator is second order).
pub fn refinement_defect<T: Real>(
    potential: &PotentialGrid<T>,
    lambda: Complex<T>,
    steps: usize,
) -> Result<T> {
    let coarse = propagate(potential, lambda, steps)?;
    let fine = propagate(potential, lambda, 2 * steps)?;
    Ok(coarse.matrix().max_abs_diff(&fine.matrix()))
}

/// Characteristic determinant of the boundary problem at `lambda`:
/// `(-1)^(theta+1) + (c1 + c2)/2` from the monodromy at `steps` cells.
pub fn char_det<T: Real>(
    potential: &PotentialGrid<T>,
    kind: BoundaryKind,
    lambda: Complex<T>,
    steps: usize,
) -> Result<Complex<T>> {
    Ok(propagate(potential, lambda, steps)?.char_det(kind))
}

/// Result of scanning one disk boundary with the argument principle.
struct BoundaryScan<T> {
    winding: i64,
    /// Sum of the enclosed zeros, relative to the disk center.
    first_moment: Complex<T>,
    /// Sum of squares of the enclosed zeros, relative to the disk center.
    second_moment: Complex<T>,
}

fn scan_boundary<T, F>(
    mut eval: F,
    center: Complex<T>,
    radius: T,
    points: usize,
    min_modulus: T,
) -> Result<BoundaryScan<T>>
where
    T: Real,
    F: FnMut(Complex<T>) -> Result<Complex<T>>,
{
    assert!(points >= 8, "need at least 8 boundary points, got {points}");
    let two_pi = T::of(2.0) * T::PI();
    let values: Vec<Complex<T>> = (0..points)
        .map(|j| {
            let angle = two_pi * T::of(j as f64) / T::of(points as f64);
            let z = center + Complex::from_polar(radius, angle);
            eval(z)
        })
        .collect::<Result<_>>()?;

    let mut arg_sum = T::zero();
    let mut m1 = Complex::new(T::zero(), T::zero());
    let mut m2 = Complex::new(T::zero(), T::zero());
    for j in 0..points {
        let v0 = values[j];
        let v1 = values[(j + 1) % points];
        if v0.norm() < min_modulus || !v0.re.is_finite() || !v0.im.is_finite() {
            return Err(Error::Localization(format!(
                "boundary sample at index {j} of disk around {center} has modulus {} \
                 below {min_modulus}; a zero sits on or near the contour \
                 (adjust disk_radius)",
                v0.norm()
            )));
        }
        let inc = (v1 / v0).ln();
        if inc.im.abs() > T::of(2.8) {
            return Err(Error::Localization(format!(
                "phase jump {} between boundary samples {j} and {} of disk around \
                 {center}; increase quadrature_points",
                inc.im,
                (j + 1) % points
            )));
        }
        arg_sum = arg_sum + inc.im;
        // Midpoint rule for the contour moments; exact to rounding once the
        // boundary is resolved, because the integrand is periodic analytic.
        let mid_angle = two_pi * (T::of(j as f64) + T::of(0.5)) / T::of(points as f64);
        let w = Complex::from_polar(radius, mid_angle);
        m1 = m1 + w * inc;
        m2 = m2 + w * w * inc;
    }

    let winding_float = arg_sum / two_pi;
    let winding = winding_float.round();
    if (winding_float - winding).abs() > T::of(0.25) {
        return Err(Error::Localization(format!(
            "winding number around {center} is {winding_float}, not close to an \
             integer; increase quadrature_points or shrink disk_radius"
        )));
    }
    let scale = (Complex::new(T::zero(), two_pi)).finv();
    Ok(BoundaryScan {
        winding: winding.to_f64().unwrap_or(0.0) as i64,
        first_moment: m1 * scale,
        second_moment: m2 * scale,
    })
}

/// Number of zeros of `eval` (counted with multiplicity) inside the disk,
/// by the argument principle on `boundary_points` samples. Errors if a zero
/// sits within `min_modulus` of the contour or the winding does not come out
/// near an integer.
pub fn count_zeros_in_disk<T, F>(
    eval: F,
    center: Complex<T>,
    radius: T,
    boundary_points: usize,
    min_modulus: T,
) -> Result<i64>
where
    T: Real,
    F: FnMut(Complex<T>) -> Result<Complex<T>>,
{
    Ok(scan_boundary(eval, center, radius, boundary_points, min_modulus)?.winding)
}

/// Newton iteration with a central-difference derivative. Returns the
/// refined point and `|f|` there. Stops against `root_tol`, stagnation, or
/// escape from twice the disk radius (then the input wins).
fn newton_refine<T, F>(
    mut eval: F,
    start: Complex<T>,
    center: Complex<T>,
    radius: T,
    root_tol: T,
) -> Result<(Complex<T>, T)>
where
    T: Real,
    F: FnMut(Complex<T>) -> Result<Complex<T>>,
{
    let mut z = start;
    let mut best = start;
    let mut best_res = eval(start)?.norm();
    for _ in 0..64 {
        let f = eval(z)?;
        let fn_norm = f.norm();
        if fn_norm < best_res {
            best = z;
            best_res = fn_norm;
        }
        if fn_norm <= root_tol {
            break;
        }
        let h = T::of(1e-6) * (T::one() + z.norm());
        let hc = Complex::new(h, T::zero());
        let df = (eval(z + hc)? - eval(z - hc)?) / (hc + hc);
        if df.norm() == T::zero() {
            break;
        }
        let dz = f / df;
        let next = z - dz;
        if !(next.re.is_finite() && next.im.is_finite())
            || (next - center).norm() > radius * T::of(2.0)
        {
            break;
        }
        if dz.norm() <= T::epsilon() * (T::one() + z.norm()) {
            z = next;
            break;
        }
        z = next;
    }
    let res = eval(z)?.norm();
    if res < best_res {
        Ok((z, res))
    } else {
        Ok((best, best_res))
    }
}

/// Refines a double zero as the simple zero of `f'` (Newton with central
/// second differences). Values of `f` alone cannot place a double zero
/// better than the square root of their evaluation noise, roughly 1e-8 at
/// double precision; the derivative's zero is simple and does not suffer
/// that floor. Also the right answer for a barely-split pair reported as
/// coincident: it converges to the saddle between the two zeros.
fn saddle_refine<T, F>(
    mut eval: F,
    start: Complex<T>,
    center: Complex<T>,
    radius: T,
) -> Result<(Complex<T>, T)>
where
    T: Real,
    F: FnMut(Complex<T>) -> Result<Complex<T>>,
{
    let mut z = start;
    let mut best = start;
    let mut best_d1 = T::infinity();
    for _ in 0..48 {
        // Wider step than plain Newton, with a five-point stencil for f':
        // the noise floor of the derivative is eval-noise / h, and the h^2
        // truncation bias that a wide central difference would add is
        // cancelled to fourth order.
        let h = T::of(1e-4) * (T::one() + z.norm());
        let hc = Complex::new(h, T::zero());
        let fp = eval(z + hc)?;
        let fm = eval(z - hc)?;
        let fp2 = eval(z + hc.scale(T::of(2.0)))?;
        let fm2 = eval(z - hc.scale(T::of(2.0)))?;
        let f0 = eval(z)?;
        let d1 = ((fp - fm).scale(T::of(8.0)) - (fp2 - fm2))
            / (hc.scale(T::of(12.0)));
        let d2 = (fp - f0.scale(T::of(2.0)) + fm) / (hc * hc);
        // Once d1 reaches its noise floor the steps are a random walk; keep
        // the sharpest point seen instead of the last.
        if d1.norm() < best_d1 {
            best = z;
            best_d1 = d1.norm();
        }
        if d2.norm() == T::zero() {
            break;
        }
        let dz = d1 / d2;
        let next = z - dz;
        if !(next.re.is_finite() && next.im.is_finite())
            || (next - center).norm() > radius * T::of(2.0)
        {
            break;
        }
        z = next;
        if dz.norm() <= T::of(1e-13) * (T::one() + z.norm()) {
            break;
        }
    }
    let res = eval(best)?.norm();
    Ok((best, res))
}

/// Diagnostics for one lattice disk: what the scan counted and where the
/// pair ended up.
#[derive(Clone, Debug)]
pub struct Localization<T> {
    pub n: i64,
    pub center: T,
    pub winding: i64,
    pub pair: (Complex<T>, Complex<T>),
    /// `|det|` at the two refined points.
    pub residuals: (T, T),
    /// True when the two roots were merged into one double point.
    pub coincident: bool,
}

/// Finds the eigenvalue pair in one disk: winding count (must be 2), contour
/// moments for initial guesses, Newton refinement, and a coincidence merge
/// when the refined roots fall within `sqrt(root_tol)` of each other.
fn locate_pair<T, F>(
    mut eval: F,
    n: i64,
    center: T,
    tol: &Tolerances<T>,
) -> Result<Localization<T>>
where
    T: Real,
    F: FnMut(Complex<T>) -> Result<Complex<T>>,
{
    let c = Complex::new(center, T::zero());
    let scan = scan_boundary(
        &mut eval,
        c,
        tol.disk_radius,
        tol.quadrature_points,
        tol.root_tol,
    )?;
    if scan.winding != 2 {
        return Err(Error::Localization(format!(
            "disk at index {n} (center {center}) contains {} zeros, expected 2; \
             adjust disk_radius or check the potential",
            scan.winding
        )));
    }

    // Two zeros w1, w2 (center-relative) from their power sums.
    let m1 = scan.first_moment;
    let m2 = scan.second_moment;
    let half = T::of(0.5);
    let disc = (m2.scale(T::of(2.0)) - m1 * m1).sqrt();
    let cand_a = (m1 + disc).scale(half);
    let cand_b = (m1 - disc).scale(half);
    let w1 = if cand_a.norm() >= cand_b.norm() { cand_a } else { cand_b };
    let prod = (m1 * m1 - m2).scale(half);
    let w2 = if w1.norm() > T::zero() { prod / w1 } else { w1 };

    let cluster = tol.root_tol.sqrt();
    let (pair, residuals, coincident) = if (w1 - w2).norm() < cluster {
        // Double (or unresolvably close) zero: polish the contour mean
        // through the derivative.
        let (z, r) = saddle_refine(&mut eval, c + m1.scale(half), c, tol.disk_radius)?;
        ((z, z), (r, r), true)
    } else {
        let (z1, r1) = newton_refine(&mut eval, c + w1, c, tol.disk_radius, tol.root_tol)?;
        let (z2, r2) = newton_refine(&mut eval, c + w2, c, tol.disk_radius, tol.root_tol)?;
        if (z1 - z2).norm() < cluster {
            // Newton pulled both starts to the same point; treat it as a
            // genuine double zero seeded at the contour mean.
            let (z, r) = saddle_refine(&mut eval, c + m1.scale(half), c, tol.disk_radius)?;
            ((z, z), (r, r), true)
        } else {
            ((z1, z2), (r1, r2), false)
        }
    };

    Ok(Localization {
        n,
        center,
        winding: scan.winding,
        pair,
        residuals,
        coincident,
    })
}

/// Locates the full eigenvalue table for `|n| <= n_max`: one disk of radius
/// `tol.disk_radius` around every lattice point `2n + theta`, each expected
/// to carry exactly two zeros of the characteristic determinant. Disks are
/// processed in parallel; results are deterministic.
pub fn locate_spectrum<T: Real>(
    potential: &PotentialGrid<T>,
    kind: BoundaryKind,
    n_max: usize,
    tol: &Tolerances<T>,
) -> Result<(SpectrumTable<T>, Vec<Localization<T>>)> {
    tol.validate()?;
    let r = n_max as i64;

    // One guard evaluation: the integrator must hold the Wronskian identity
    // at this step count before any counting is trusted.
    let probe = propagate(potential, Complex::new(kind.center::<T>(0), T::zero()), tol.integrator_steps)?;
    let defect = wronskian_defect(&probe);
    if defect > tol.wronskian_tol {
        return Err(Error::Computation(format!(
            "wronskian defect {defect} exceeds {} at {} steps; raise integrator_steps",
            tol.wronskian_tol, tol.integrator_steps
        )));
    }

    let locs: Vec<Localization<T>> = (-r..=r)
        .into_par_iter()
        .map(|n| {
            let eval = |lambda: Complex<T>| {
                char_det(potential, kind, lambda, tol.integrator_steps)
            };
            locate_pair(eval, n, kind.center::<T>(n), tol)
        })
        .collect::<Result<_>>()?;

    let table = SpectrumTable::from_pairs(kind, locs.iter().map(|l| l.pair).collect())?;
    Ok((table, locs))
}

#[cfg(test)]
mod tests {
    use super::*;

    type C = Complex<f64>;

    fn c(re: f64, im: f64) -> C {
        Complex::new(re, im)
    }

    /// Closed-form monodromy for a constant potential: one frozen cell over
    /// the whole period is exact because all cells commute.
    fn constant_monodromy(p: C, q: C, lambda: C) -> Mat2<f64> {
        cell_step(p, q, lambda, std::f64::consts::PI)
    }

    #[test]
    fn free_monodromy_is_the_rotation() {
        let v = PotentialGrid::<f64>::zero(64);
        for &lambda in &[c(0.0, 0.0), c(1.5, 0.0), c(2.0, -0.7), c(-3.25, 1.1)] {
            let m = propagate(&v, lambda, 128).unwrap().matrix();
            let (want, _) = crate::types::free_solution(std::f64::consts::PI, lambda);
            assert!(
                m.max_abs_diff(&want) < 1e-12,
                "free monodromy off by {} at {lambda}",
                m.max_abs_diff(&want)
            );
        }
    }

    #[test]
    fn constant_potential_is_integrated_exactly() {
        let p = c(0.1, -0.2);
        let q = c(0.3, 0.35);
        let v = PotentialGrid::constant(p, q, 32);
        for &lambda in &[c(0.4, 0.0), c(-2.0, 0.9), c(5.5, -1.5)] {
            let want = constant_monodromy(p, q, lambda);
            for steps in [2usize, 16, 4096] {
                let got = propagate(&v, lambda, steps).unwrap().matrix();
                assert!(
                    got.max_abs_diff(&want) < 1e-12 * (1.0 + want.max_abs_diff(&Mat2::identity())),
                    "steps {steps}, lambda {lambda}: diff {}",
                    got.max_abs_diff(&want)
                );
            }
        }
    }

    fn smooth_test_potential(cells: usize) -> PotentialGrid<f64> {
        let h = std::f64::consts::PI / cells as f64;
        let mut p = Vec::with_capacity(cells);
        let mut q = Vec::with_capacity(cells);
        for i in 0..cells {
            let x = (i as f64 + 0.5) * h;
            p.push(c(0.25 * (2.0 * x).cos(), 0.1 * x.sin()));
            q.push(c(0.3 * x.sin(), -0.15 * (3.0 * x).cos()));
        }
        PotentialGrid::new(p, q).unwrap()
    }

    #[test]
    fn wronskian_holds_at_any_step_count() {
        let v = smooth_test_potential(512);
        for steps in [32usize, 512] {
            let m = propagate(&v, c(3.3, -1.0), steps).unwrap();
            let d = wronskian_defect(&m);
            assert!(d < 1e-12, "defect {d} at {steps} steps");
        }
    }

    #[test]
    fn refinement_defect_shrinks_second_order() {
        // Sample the potential on its own cell grid per step count so the
        // frozen midpoints track the continuous profile.
        let lambda = c(1.7, 0.4);
        let d1 = {
            let v = smooth_test_potential(4096);
            refinement_defect(&v, lambda, 128).unwrap()
        };
        let d2 = {
            let v = smooth_test_potential(4096);
            refinement_defect(&v, lambda, 256).unwrap()
        };
        let ratio = d1 / d2;
        assert!(
            (2.8..5.8).contains(&ratio),
            "expected roughly fourfold decay, got {d1:e}/{d2:e} = {ratio}"
        );
    }

    #[test]
    fn counts_zeros_of_a_polynomial() {
        let z1 = c(4.1, 0.05);
        let z2 = c(3.8, -0.1);
        let f = |z: C| -> crate::error::Result<C> { Ok((z - z1) * (z - z2)) };
        let n = count_zeros_in_disk(f, c(4.0, 0.0), 0.45, 128, 1e-12).unwrap();
        assert_eq!(n, 2);
        let far = count_zeros_in_disk(f, c(8.0, 0.0), 0.45, 128, 1e-12).unwrap();
        assert_eq!(far, 0);
    }

    #[test]
    fn zero_on_the_contour_is_reported() {
        let root = c(4.45, 0.0); // exactly on the radius-0.45 boundary
        let f = |z: C| -> crate::error::Result<C> { Ok(z - root) };
        let err = count_zeros_in_disk(f, c(4.0, 0.0), 0.45, 128, 1e-10).unwrap_err();
        assert!(matches!(err, Error::Localization(_)), "got {err:?}");
    }

    #[test]
    fn branch_cut_makes_winding_non_integer() {
        let f = |z: C| -> crate::error::Result<C> { Ok((z - c(1.0, 0.0)).sqrt()) };
        let err = count_zeros_in_disk(f, c(1.0, 0.0), 0.3, 128, 1e-14).unwrap_err();
        assert!(matches!(err, Error::Localization(_)), "got {err:?}");
    }

    #[test]
    fn locates_free_spectrum_as_exact_doubles() {
        let v = PotentialGrid::<f64>::zero(8);
        let tol = Tolerances { integrator_steps: 64, ..Tolerances::default() };
        for kind in [BoundaryKind::Periodic, BoundaryKind::Antiperiodic] {
            let (table, locs) = locate_spectrum(&v, kind, 2, &tol).unwrap();
            for n in -2i64..=2 {
                let (l1, l2) = table.pair(n);
                let center = kind.center::<f64>(n);
                assert!(
                    (l1 - c(center, 0.0)).norm() < 1e-10,
                    "kind {kind:?} n {n}: {l1}"
                );
                assert!((l2 - l1).norm() < 1e-10);
            }
            assert!(locs.iter().all(|l| l.winding == 2));
            assert!(locs.iter().all(|l| l.coincident), "free pairs are double");
        }
    }

    #[test]
    fn locates_constant_q_spectrum_against_closed_form() {
        let a = 0.3;
        let v = PotentialGrid::constant(c(0.0, 0.0), c(a, 0.0), 8);
        let tol = Tolerances { integrator_steps: 32, ..Tolerances::default() };
        let (table, locs) = locate_spectrum(&v, BoundaryKind::Periodic, 2, &tol).unwrap();
        // Index 0 carries the split pair -a, +a; the others are double
        // points at sign(n) sqrt(4n^2 + a^2).
        let (l1, l2) = table.pair(0);
        assert!((l1 - c(-a, 0.0)).norm() < 1e-9, "{l1}");
        assert!((l2 - c(a, 0.0)).norm() < 1e-9, "{l2}");
        for n in [-2i64, -1, 1, 2] {
            let want = (n as f64).signum() * ((4 * n * n) as f64 + a * a).sqrt();
            let (l1, l2) = table.pair(n);
            assert!((l1 - c(want, 0.0)).norm() < 1e-9, "n {n}: {l1} vs {want}");
            assert!((l2 - c(want, 0.0)).norm() < 1e-9);
        }
        assert!(locs.iter().find(|l| l.n == 1).unwrap().coincident);
        assert!(!locs.iter().find(|l| l.n == 0).unwrap().coincident);
    }

    #[test]
    fn imaginary_amplitude_needs_the_wider_disk() {
        // q = 0.5i puts the n = 0 pair at +-0.5i, outside the default 0.45
        // disk; radius 0.6 picks it up.
        let v = PotentialGrid::constant(c(0.0, 0.0), c(0.0, 0.5), 8);
        let narrow = Tolerances { integrator_steps: 32, ..Tolerances::default() };
        assert!(locate_spectrum(&v, BoundaryKind::Periodic, 0, &narrow).is_err());
        let wide = Tolerances { disk_radius: 0.6, ..narrow };
        let (table, _) = locate_spectrum(&v, BoundaryKind::Periodic, 0, &wide).unwrap();
        let (l1, l2) = table.pair(0);
        assert!((l1 - c(0.0, -0.5)).norm() < 1e-9, "{l1}");
        assert!((l2 - c(0.0, 0.5)).norm() < 1e-9, "{l2}");
    }

    #[test]
    fn antiperiodic_constant_q_doubles() {
        let a = 0.3;
        let v = PotentialGrid::constant(c(0.0, 0.0), c(a, 0.0), 8);
        let tol = Tolerances { integrator_steps: 32, ..Tolerances::default() };
        let (table, _) = locate_spectrum(&v, BoundaryKind::Antiperiodic, 1, &tol).unwrap();
        for n in -1i64..=1 {
            let m = (2 * n + 1) as f64;
            let want = m.signum() * (m * m + a * a).sqrt();
            let (l1, l2) = table.pair(n);
            assert!((l1 - c(want, 0.0)).norm() < 1e-9, "n {n}: {l1} vs {want}");
            assert!((l2 - l1).norm() < 1e-9, "antiperiodic pairs stay double");
        }
    }
}
