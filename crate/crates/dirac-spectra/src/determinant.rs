//! Characteristic determinants rebuilt from eigenvalue tables.
//!
//! A table of pair locations determines the determinant as a canonical
//! product over lattice-normalized factors. Away from the lattice the
//! product is rearranged into the unperturbed determinant times a ratio
//! that converges fast; near lattice points (where the unperturbed factor
//! vanishes) the product is evaluated directly with an analytically summed
//! tail. Offsets outside the stored range are taken as exactly zero, so the
//! far factors are exactly one.

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::series::log_tail;
use crate::types::{BoundaryKind, SpectrumTable};

/// Unperturbed determinant in closed form: `(-1)^(theta+1) + cos(pi lambda)`.
pub fn free_determinant<T: Real>(kind: BoundaryKind, lambda: Complex<T>) -> Complex<T> {
    Complex::new(kind.det_shift::<T>(), T::zero()) + lambda.scale(T::PI()).cos()
}

/// Unperturbed determinant as a finite lattice product with the tail summed
/// analytically; an independent evaluation path used to cross-check the
/// closed form and the model plumbing. `cutoff` is the largest pair index
/// kept verbatim.
pub fn free_determinant_product<T: Real>(
    kind: BoundaryKind,
    lambda: Complex<T>,
    cutoff: usize,
) -> Result<Complex<T>> {
    let r = cutoff as i64;
    let one = Complex::new(T::one(), T::zero());
    match kind {
        BoundaryKind::Periodic => {
            // -(pi^2/2) lambda^2 prod_{1<=n<=R} (1 - (lambda/2)^2/n^2)^2 * tail^2
            let mut acc = -(lambda * lambda).scale(T::PI() * T::PI() * T::of(0.5));
            let quarter = lambda * lambda.unscale(T::of(4.0));
            for n in 1..=r {
                let f = one - quarter.unscale(T::of((n * n) as f64));
                acc = acc * f * f;
            }
            let tail = log_tail(quarter, r, T::zero())?;
            Ok(acc * (tail + tail).exp())
        }
        BoundaryKind::Antiperiodic => {
            // 2 prod_{|n|<=R} (1 - lambda/(2n+1))^2 * (1 + lambda/(2R+1))^2 * tail^2
            let mut acc = Complex::new(T::of(2.0), T::zero());
            for n in -r..=r {
                let m = T::of((2 * n + 1) as f64);
                let f = one - lambda.unscale(m);
                acc = acc * f * f;
            }
            let edge = one + lambda.unscale(T::of((2 * r + 1) as f64));
            let quarter = lambda * lambda.unscale(T::of(4.0));
            let tail = log_tail(quarter, r, T::of(0.5))?;
            Ok(acc * edge * edge * (tail + tail).exp())
        }
    }
}

/// Determinant model over a stored eigenvalue table.
///
/// `truncation` is the configured index ceiling; it must cover the stored
/// range (shrink the table itself to study coarser truncations). Factors
/// beyond the stored range are exactly one under the zero-offset convention,
/// so the products below run over the table.
#[derive(Clone, Debug)]
pub struct DeterminantModel<T> {
    spectrum: SpectrumTable<T>,
    truncation: usize,
}

impl<T: Real> DeterminantModel<T> {
    pub fn new(spectrum: SpectrumTable<T>, truncation: usize) -> Result<Self> {
        if (truncation as i64) < spectrum.range() {
            return Err(Error::Validation(format!(
                "truncation {truncation} is smaller than the stored spectrum range {}; \
                 truncate the table instead of the model",
                spectrum.range()
            )));
        }
        Ok(DeterminantModel { spectrum, truncation })
    }

    pub fn spectrum(&self) -> &SpectrumTable<T> {
        &self.spectrum
    }

    pub fn kind(&self) -> BoundaryKind {
        self.spectrum.kind()
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    /// Index of the stored lattice point nearest to `lambda` and the
    /// distance to it.
    fn nearest_center(&self, lambda: Complex<T>) -> (i64, T) {
        let r = self.spectrum.range();
        let theta = self.spectrum.kind().theta();
        let raw = ((lambda.re.to_f64().unwrap_or(0.0) - theta as f64) / 2.0).round() as i64;
        let n = raw.clamp(-r, r);
        let c = self.spectrum.kind().center::<T>(n);
        (n, (lambda - Complex::new(c, T::zero())).norm())
    }

    /// Ratio of the model determinant to the unperturbed one, evaluated as a
    /// sum of principal logarithms of the factor ratios (each tends to 1, so
    /// every logarithm starts at 0). Defined away from the lattice; points
    /// within 1/4 of `2Z + theta` are a domain error.
    pub fn perturbation_ratio(&self, lambda: Complex<T>) -> Result<Complex<T>> {
        let theta = self.kind().theta();
        let half = (lambda.re - T::of(theta as f64)).to_f64().unwrap_or(0.0) / 2.0;
        let nearest = T::of(theta as f64 + 2.0 * half.round());
        let dist = (lambda - Complex::new(nearest, T::zero())).norm();
        if dist < T::of(0.25) {
            return Err(Error::Domain(format!(
                "perturbation ratio is evaluated off the lattice: lambda = {lambda} \
                 is within 1/4 of {nearest}"
            )));
        }
        let r = self.spectrum.range();
        let mut log_sum = Complex::new(T::zero(), T::zero());
        let one = Complex::new(T::one(), T::zero());
        for n in -r..=r {
            let (d1, d2) = self.spectrum.offsets(n);
            let alphas = if self.kind() == BoundaryKind::Periodic && n == 0 {
                // Zero is its own lattice point: the factor ratio is
                // (lambda_{0,j} - lambda) / (0 - lambda) = 1 - lambda_{0,j}/lambda.
                let (l1, l2) = self.spectrum.pair(0);
                [-(l1 / lambda), -(l2 / lambda)]
            } else {
                let den = Complex::new(self.kind().center::<T>(n), T::zero()) - lambda;
                [d1 / den, d2 / den]
            };
            for alpha in alphas {
                let f = one + alpha;
                if f.norm() == T::zero() {
                    return Err(Error::Domain(format!(
                        "model determinant vanishes at lambda = {lambda} (factor {n})"
                    )));
                }
                log_sum = log_sum + f.ln();
            }
        }
        Ok(log_sum.exp())
    }

    /// Direct canonical product with lattice normalizers and the analytic
    /// tail; the path used near stored lattice points where the unperturbed
    /// determinant vanishes.
    fn eval_direct(&self, lambda: Complex<T>) -> Result<Complex<T>> {
        let r = self.spectrum.range();
        let quarter = lambda * lambda.unscale(T::of(4.0));
        let mut acc;
        let mut scale_log = T::zero();
        match self.kind() {
            BoundaryKind::Periodic => {
                let (l1, l2) = self.spectrum.pair(0);
                acc = (l1 - lambda) * (l2 - lambda) * Complex::new(-T::PI() * T::PI() * T::of(0.5), T::zero());
                for n in (1..=r).flat_map(|k| [k, -k]) {
                    let (l1, l2) = self.spectrum.pair(n);
                    let den = T::of((4 * n * n) as f64);
                    acc = acc * ((l1 - lambda) * (l2 - lambda)).unscale(den);
                    rescale(&mut acc, &mut scale_log);
                }
                let tail = log_tail(quarter, r, T::zero())?;
                Ok((acc * (tail + tail).exp()) * Complex::new(scale_log.exp(), T::zero()))
            }
            BoundaryKind::Antiperiodic => {
                acc = Complex::new(T::of(2.0), T::zero());
                for n in -r..=r {
                    let (l1, l2) = self.spectrum.pair(n);
                    let m = (2 * n + 1) as f64;
                    acc = acc * ((l1 - lambda) * (l2 - lambda)).unscale(T::of(m * m));
                    rescale(&mut acc, &mut scale_log);
                }
                let edge = Complex::new(T::one(), T::zero())
                    + lambda.unscale(T::of((2 * r + 1) as f64));
                let tail = log_tail(quarter, r, T::of(0.5))?;
                Ok((acc * edge * edge * (tail + tail).exp())
                    * Complex::new(scale_log.exp(), T::zero()))
            }
        }
    }

    /// Model determinant at `lambda`. Within 1/4 of a stored lattice point
    /// the direct product is used; elsewhere the unperturbed determinant
    /// times the perturbation ratio.
    pub fn eval(&self, lambda: Complex<T>) -> Result<Complex<T>> {
        let (_, dist) = self.nearest_center(lambda);
        if dist < T::of(0.25) {
            self.eval_direct(lambda)
        } else {
            Ok(free_determinant(self.kind(), lambda) * self.perturbation_ratio(lambda)?)
        }
    }

    /// Difference between the model determinant and the unperturbed one.
    pub fn residual(&self, lambda: Complex<T>) -> Result<Complex<T>> {
        Ok(self.eval(lambda)? - free_determinant(self.kind(), lambda))
    }

    /// Residual values at all integers `|k| <= k_max` plus the symmetric
    /// partial sums of their moduli.
    pub fn residuals_at_lattice(&self, k_max: usize) -> Result<LatticeResiduals<T>> {
        let k = k_max as i64;
        let values: Vec<(i64, Complex<T>)> = (-k..=k)
            .into_par_iter()
            .map(|j| {
                let lambda = Complex::new(T::of(j as f64), T::zero());
                Ok((j, self.residual(lambda)?))
            })
            .collect::<Result<_>>()?;
        let mut partial_sums = Vec::with_capacity(k_max + 1);
        let center = values[k_max].1.norm();
        partial_sums.push(center);
        let mut acc = center;
        for s in 1..=k_max {
            acc = acc + values[k_max + s].1.norm() + values[k_max - s].1.norm();
            partial_sums.push(acc);
        }
        Ok(LatticeResiduals { values, partial_sums })
    }

    /// Trapezoid estimate of the squared L2 mass of the residual along
    /// `[-half_width, half_width]` on the real line.
    pub fn l2_mass(&self, half_width: T, step: T) -> Result<T> {
        if !(half_width > T::zero() && step > T::zero() && step < half_width) {
            return Err(Error::Validation(format!(
                "need 0 < step < half_width, got step {step}, half_width {half_width}"
            )));
        }
        let n = (half_width * T::of(2.0) / step)
            .round()
            .to_f64()
            .unwrap_or(2.0) as usize;
        let n = n.max(2);
        let h = half_width * T::of(2.0) / T::of(n as f64);
        let sq: Vec<T> = (0..=n)
            .into_par_iter()
            .map(|i| {
                let x = -half_width + h * T::of(i as f64);
                Ok(self.residual(Complex::new(x, T::zero()))?.norm_sqr())
            })
            .collect::<Result<Vec<T>>>()?;
        let mut acc = (sq[0] + sq[n]) * T::of(0.5);
        for v in &sq[1..n] {
            acc = acc + *v;
        }
        Ok(acc * h)
    }
}

/// Residuals at lattice integers together with running symmetric sums:
/// `partial_sums[s] = sum_{|k| <= s} |value(k)|`.
#[derive(Clone, Debug)]
pub struct LatticeResiduals<T> {
    pub values: Vec<(i64, Complex<T>)>,
    pub partial_sums: Vec<T>,
}

/// Keeps long products inside floating range by siphoning the magnitude
/// into a separate log accumulator.
fn rescale<T: Real>(acc: &mut Complex<T>, scale_log: &mut T) {
    let n = acc.norm();
    if n > T::of(1e100) || (n < T::of(1e-100) && n > T::zero()) {
        *scale_log = *scale_log + n.ln();
        *acc = acc.unscale(n);
    }
}
