//! Building candidate determinant data from a prescribed half-trace.
//!
//! Given a target half-trace function `chi` that stays within 1/100 of
//! `cos(pi lambda)` beyond some threshold index, this module places a real
//! node system (a cluster packed right of the threshold plus the integer
//! lattice), forms the sine-type product `s` vanishing exactly at the nodes,
//! selects a Floquet multiplier branch at every node, and interpolates the
//! multiplier offsets into a cosine-type function `c = cos(pi lambda) + g`.
//! The derived node weights `z_n = c_n / s'(lambda_n)` must land strictly
//! above the line `Im z = -Re z`; that half-plane constraint and the sign
//! alternation of `s'` are the hard invariants here.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::series::log_tail;
use crate::types::BoundaryKind;

/// Half width of the window right of `n0 + 1/2` that receives the cluster.
const WINDOW: f64 = 0.01;
/// Largest deviation `|chi - cos|` tolerated at and beyond the threshold.
const DEVIATION_CAP: f64 = 0.01;
/// Real-axis sampling step for the threshold scan.
const SCAN_STEP: f64 = 0.25;

/// Smallest admissible threshold index: the scan checks
/// `|chi(x) - cos(pi x)| < 1/100` on quarter-integer samples with
/// `n0 <= |x| <= range + 2`. With `requested` set, only that value is
/// checked. Construction error when nothing admissible exists.
pub fn admissible_threshold<T, F>(
    mut chi: F,
    range: usize,
    requested: Option<usize>,
) -> Result<usize>
where
    T: Real,
    F: FnMut(Complex<T>) -> Result<Complex<T>>,
{
    let samples_per_unit = (1.0 / SCAN_STEP) as usize;
    let top = (range + 2) * samples_per_unit;
    // deviation[j] = max over both signs of |f| at |x| = j * SCAN_STEP.
    let mut deviation = Vec::with_capacity(top + 1);
    for j in 0..=top {
        let x = T::of(j as f64 * SCAN_STEP);
        let mut worst = T::zero();
        for sign in [T::one(), -T::one()] {
            let lambda = Complex::new(x * sign, T::zero());
            let f = chi(lambda)? - lambda.scale(T::PI()).cos();
            worst = worst.max(f.norm());
            if j == 0 {
                break;
            }
        }
        deviation.push(worst);
    }
    let cap = T::of(DEVIATION_CAP);
    let admissible = |n0: usize| deviation[n0 * samples_per_unit..].iter().all(|d| *d < cap);

    match requested {
        Some(n0) => {
            if n0 > range {
                return Err(Error::Validation(format!(
                    "threshold {n0} exceeds the node range {range}"
                )));
            }
            if admissible(n0) {
                Ok(n0)
            } else {
                let worst = deviation[n0 * samples_per_unit..]
                    .iter()
                    .fold(T::zero(), |a, b| a.max(*b));
                Err(Error::Construction(format!(
                    "half-trace deviates from cos(pi lambda) by up to {worst} past \
                     index {n0}; the construction needs less than {DEVIATION_CAP}"
                )))
            }
        }
        None => (0..=range).find(|&n0| admissible(n0)).ok_or_else(|| {
            Error::Construction(format!(
                "no admissible threshold up to {range}: the half-trace never settles \
                 within {DEVIATION_CAP} of cos(pi lambda)"
            ))
        }),
    }
}

/// Real node system indexed over `[-range, range]`: indices `0..=n0` hold a
/// cluster packed strictly inside `(n0 + 1/2 - 1/100, n0 + 1/2 + 1/100)`,
/// indices `n > n0` sit exactly on the integers, and negative indices mirror
/// (`node(-n) = -node(n)`).
#[derive(Clone, Debug, PartialEq)]
pub struct NodeSystem<T> {
    n0: usize,
    nodes: Vec<T>,
}

impl<T: Real> NodeSystem<T> {
    pub fn place(n0: usize, range: usize) -> Result<Self> {
        if range < n0 {
            return Err(Error::Validation(format!(
                "node range {range} must reach the threshold {n0}"
            )));
        }
        if range > 1 << 20 {
            return Err(Error::Validation(format!("node range {range} too large")));
        }
        let r = range as i64;
        let m = n0 + 1;
        let center = T::of(n0 as f64 + 0.5);
        let cluster = |k: usize| -> T {
            let frac = T::of((k + 1) as f64) / T::of((m + 1) as f64);
            center - T::of(WINDOW) + T::of(2.0 * WINDOW) * frac
        };
        let positive = |n: i64| -> T {
            if n as usize <= n0 {
                cluster(n as usize)
            } else {
                T::of(n as f64)
            }
        };
        let nodes = (-r..=r)
            .map(|n| {
                if n >= 0 {
                    positive(n)
                } else {
                    -positive(-n)
                }
            })
            .collect();
        Ok(NodeSystem { n0, nodes })
    }

    pub fn n0(&self) -> usize {
        self.n0
    }

    pub fn range(&self) -> i64 {
        (self.nodes.len() as i64 - 1) / 2
    }

    pub fn node(&self, n: i64) -> T {
        let r = self.range();
        assert!(n.abs() <= r, "node index {n} outside range {r}");
        self.nodes[(n + r) as usize]
    }

    pub fn values(&self) -> &[T] {
        &self.nodes
    }

    /// Sine-type product vanishing exactly at the nodes. Two evaluation
    /// paths: away from every integer in `[-range, range]` the product is
    /// folded against `sin(pi lambda)` (only cluster indices contribute,
    /// everything else cancels); within 1/4 of such an integer the finite
    /// product is taken directly with the tail summed analytically.
    pub fn sine(&self, lambda: Complex<T>) -> Result<Complex<T>> {
        let r = self.range();
        let nearest = lambda.re.to_f64().unwrap_or(0.0).round();
        let near_lattice = nearest.abs() <= r as f64
            && (lambda - Complex::new(T::of(nearest), T::zero())).norm() < T::of(0.25);

        // Quadratic factors are kept in the split form
        // (v - lambda)(v + lambda): the difference of squares loses half the
        // digits when lambda sits within ~1e-8 of a node, and interpolation
        // probes get much closer than that.
        if near_lattice {
            // s = -pi (node_0 - lambda) prod_{n=1..R} (node_n^2 - lambda^2)/n^2 * tail
            let l2 = lambda * lambda;
            let mut acc = (Complex::new(self.node(0), T::zero()) - lambda).scale(-T::PI());
            for n in 1..=r {
                let v = Complex::new(self.node(n), T::zero());
                let f = ((v - lambda) * (v + lambda)).unscale(T::of((n * n) as f64));
                acc = acc * f;
            }
            Ok(acc * log_tail(l2, r, T::zero())?.exp())
        } else {
            // s = sin(pi lambda) * (node_0 - lambda)/(0 - lambda)
            //     * prod_{1<=n<=n0} (node_n^2 - lambda^2)/(n^2 - lambda^2)
            let mut acc = (Complex::new(self.node(0), T::zero()) - lambda) / -lambda;
            for n in 1..=self.n0 as i64 {
                let v = Complex::new(self.node(n), T::zero());
                let m = Complex::new(T::of(n as f64), T::zero());
                let num = (v - lambda) * (v + lambda);
                let den = (m - lambda) * (m + lambda);
                acc = acc * num / den;
            }
            Ok(lambda.scale(T::PI()).sin() * acc)
        }
    }

    /// `s(lambda) / (lambda - node_m)` with the `m` factor divided out
    /// analytically, so the quotient is regular (and exact) at `node_m`
    /// itself. At the node it equals `s'(node_m)` up to rounding, through an
    /// expression independent of `derivatives`, which makes it usable as a
    /// cross-check of the stored derivatives.
    pub fn quotient(&self, lambda: Complex<T>, m: i64) -> Result<Complex<T>> {
        let r = self.range();
        assert!(m.abs() <= r, "node index {m} outside range {r}");
        let nearest = lambda.re.to_f64().unwrap_or(0.0).round();
        let near_lattice = nearest.abs() <= r as f64
            && (lambda - Complex::new(T::of(nearest), T::zero())).norm() < T::of(0.25);
        let k = m.abs();
        let vk = Complex::new(self.node(k), T::zero());

        if near_lattice {
            // s = -pi (node_0 - lambda) prod_{n=1..R} (node_n^2 - lambda^2)/n^2 * tail;
            // drop the linear factor vanishing at node_m, keep its partner.
            let l2 = lambda * lambda;
            let mut acc = if m == 0 {
                Complex::new(T::PI(), T::zero())
            } else {
                let partner = if m > 0 { vk + lambda } else { vk - lambda };
                (Complex::new(self.node(0), T::zero()) - lambda)
                    .scale(if m > 0 { T::PI() } else { -T::PI() })
                    * partner.unscale(T::of((k * k) as f64))
            };
            for n in 1..=r {
                if n == k {
                    continue;
                }
                let v = Complex::new(self.node(n), T::zero());
                let f = ((v - lambda) * (v + lambda)).unscale(T::of((n * n) as f64));
                acc = acc * f;
            }
            Ok(acc * log_tail(l2, r, T::zero())?.exp())
        } else if k <= self.n0 as i64 {
            // Folded form with the m factor removed from the cluster product.
            let mut acc = if m == 0 {
                lambda.scale(T::PI()).sin() / lambda
            } else {
                let partner = if m > 0 { vk + lambda } else { vk - lambda };
                let mk = Complex::new(T::of(k as f64), T::zero());
                let scale = if m > 0 { -T::one() } else { T::one() };
                lambda.scale(T::PI()).sin()
                    * (Complex::new(self.node(0), T::zero()) - lambda).scale(scale)
                    / -lambda
                    * partner
                    / ((mk - lambda) * (mk + lambda))
            };
            for n in 1..=self.n0 as i64 {
                if n == k {
                    continue;
                }
                let v = Complex::new(self.node(n), T::zero());
                let mn = Complex::new(T::of(n as f64), T::zero());
                acc = acc * ((v - lambda) * (v + lambda)) / ((mn - lambda) * (mn + lambda));
            }
            Ok(acc)
        } else {
            // node_m is the integer m inside sin: sin(pi lambda)/(lambda - m)
            // = (-1)^m pi sinc(pi (lambda - m)).
            let x = (lambda - Complex::new(T::of(m as f64), T::zero())).scale(T::PI());
            let sinc = if x.norm() < T::of(1e-2) {
                let x2 = x * x;
                Complex::new(T::one(), T::zero()) - x2.unscale(T::of(6.0))
                    + x2 * x2.unscale(T::of(120.0))
            } else {
                x.sin() / x
            };
            let mut acc = sinc.scale(T::alt(m) * T::PI())
                * (Complex::new(self.node(0), T::zero()) - lambda)
                / -lambda;
            for n in 1..=self.n0 as i64 {
                let v = Complex::new(self.node(n), T::zero());
                let mn = Complex::new(T::of(n as f64), T::zero());
                acc = acc * ((v - lambda) * (v + lambda)) / ((mn - lambda) * (mn + lambda));
            }
            Ok(acc)
        }
    }

    /// `s'` at every node, sign-checked: the values must alternate as
    /// `(-1)^n s'(node_n) > 0`. All arithmetic is real; the tail factors are
    /// positive because every node stays below the first tail index.
    pub fn derivatives(&self) -> Result<Vec<T>> {
        let r = self.range();
        let tail_at = |v: T| -> Result<T> {
            Ok(log_tail(Complex::new(v * v, T::zero()), r, T::zero())?.re.exp())
        };
        let mut out = Vec::with_capacity(self.nodes.len());
        for idx in -r..=r {
            let m = idx.abs();
            let v_m = self.node(m);
            // Common finite product over n != |idx|.
            let mut prod = T::one();
            for n in 1..=r {
                if n == m {
                    continue;
                }
                let v = self.node(n);
                prod = prod * (v * v - v_m * v_m) / T::of((n * n) as f64);
            }
            let tail = tail_at(v_m)?;
            let ds = if idx == 0 {
                T::PI() * prod * tail
            } else {
                let lead = T::of(2.0) * v_m / T::of((m * m) as f64);
                let anchor = if idx > 0 {
                    self.node(0) - v_m
                } else {
                    -(self.node(0) + v_m)
                };
                T::PI() * anchor * lead * prod * tail
            };
            out.push(ds);
        }
        for (i, ds) in out.iter().enumerate() {
            let idx = i as i64 - r;
            if T::alt(idx) * *ds <= T::zero() {
                return Err(Error::Construction(format!(
                    "sign alternation fails at node {idx}: s' = {ds}"
                )));
            }
        }
        Ok(out)
    }
}

/// Both Floquet multipliers for a half-trace value: the roots of
/// `w^2 - 2 chi w + 1`, returned as (plus branch, minus branch). The square
/// root is normalized into the closed upper half plane (positive real axis
/// on ties), so the plus branch is the root near `+i` on cluster nodes no
/// matter which side of the branch cut a signed zero lands on. The smaller
/// root is computed as the reciprocal of the larger, so the product is 1 to
/// rounding even when the roots are far apart.
pub fn floquet_multipliers<T: Real>(chi: Complex<T>) -> (Complex<T>, Complex<T>) {
    let one = Complex::new(T::one(), T::zero());
    let mut d = (chi * chi - one).sqrt();
    if d.im < T::zero() || (d.im == T::zero() && d.re < T::zero()) {
        d = -d;
    }
    // Add d on the side where it does not cancel chi, take the reciprocal
    // for the other root.
    if chi.re * d.re + chi.im * d.im >= T::zero() {
        let plus = chi + d;
        (plus, plus.finv())
    } else {
        let minus = chi - d;
        (minus.finv(), minus)
    }
}

/// A multiplier that strayed from its expected disk (radius 1/10 around
/// `+-i` for cluster nodes, around `(-1)^n` for integer nodes). Advisory:
/// the construction proceeds.
#[derive(Clone, Copy, Debug)]
pub struct DiskWarning<T> {
    pub index: i64,
    pub multiplier: Complex<T>,
    pub expected: Complex<T>,
    pub distance: T,
}

/// Fully assembled construction data: nodes, sine derivatives, selected
/// multipliers `c_n`, weights `z_n = c_n / s'_n`, and cosine offsets
/// `beta_n = c_n - cos(pi node_n)`.
#[derive(Clone, Debug)]
pub struct ConstructionData<T> {
    kind: BoundaryKind,
    nodes: NodeSystem<T>,
    s_dot: Vec<T>,
    multipliers: Vec<Complex<T>>,
    weights: Vec<Complex<T>>,
    offsets: Vec<Complex<T>>,
}

impl<T: Real> ConstructionData<T> {
    /// Selects multipliers at every node (plus branch at even indices,
    /// minus at odd), derives weights and offsets, and enforces the open
    /// half-plane constraint `Re z + Im z > 0`. Disk deviations come back
    /// as warnings.
    pub fn assemble<F>(
        kind: BoundaryKind,
        nodes: NodeSystem<T>,
        mut chi: F,
    ) -> Result<(Self, Vec<DiskWarning<T>>)>
    where
        F: FnMut(Complex<T>) -> Result<Complex<T>>,
    {
        let r = nodes.range();
        let s_dot = nodes.derivatives()?;
        let mut multipliers = Vec::with_capacity(s_dot.len());
        let mut weights = Vec::with_capacity(s_dot.len());
        let mut offsets = Vec::with_capacity(s_dot.len());
        let mut warnings = Vec::new();

        for idx in -r..=r {
            let v = nodes.node(idx);
            let x = chi(Complex::new(v, T::zero()))?;
            let (plus, minus) = floquet_multipliers(x);
            let c = if idx & 1 == 0 { plus } else { minus };

            let expected = if idx.abs() <= nodes.n0() as i64 {
                Complex::new(T::zero(), T::alt(idx))
            } else {
                Complex::new(T::alt(idx), T::zero())
            };
            let dist = (c - expected).norm();
            if dist > T::of(0.1) {
                warnings.push(DiskWarning { index: idx, multiplier: c, expected, distance: dist });
            }

            let ds = s_dot[(idx + r) as usize];
            let z = c.unscale(ds);
            if !(z.re + z.im > T::zero()) {
                return Err(Error::Construction(format!(
                    "weight at node {idx} is {z}, not strictly above the line \
                     Im z = -Re z; the multiplier data is not realizable"
                )));
            }
            let beta = c - Complex::new(v, T::zero()).scale(T::PI()).cos();
            multipliers.push(c);
            weights.push(z);
            offsets.push(beta);
        }
        Ok((
            ConstructionData { kind, nodes, s_dot, multipliers, weights, offsets },
            warnings,
        ))
    }

    pub fn kind(&self) -> BoundaryKind {
        self.kind
    }

    pub fn nodes(&self) -> &NodeSystem<T> {
        &self.nodes
    }

    pub fn range(&self) -> i64 {
        self.nodes.range()
    }

    pub fn n0(&self) -> usize {
        self.nodes.n0()
    }

    pub fn node(&self, n: i64) -> T {
        self.nodes.node(n)
    }

    pub fn s_dot(&self, n: i64) -> T {
        self.s_dot[(n + self.range()) as usize]
    }

    pub fn multiplier(&self, n: i64) -> Complex<T> {
        self.multipliers[(n + self.range()) as usize]
    }

    pub fn weight(&self, n: i64) -> Complex<T> {
        self.weights[(n + self.range()) as usize]
    }

    pub fn cosine_offset(&self, n: i64) -> Complex<T> {
        self.offsets[(n + self.range()) as usize]
    }

    /// Rebuilds data from stored rows (used by deserialization). Runs the
    /// same half-plane validation as `assemble`.
    pub fn from_rows(
        kind: BoundaryKind,
        n0: usize,
        nodes: Vec<T>,
        s_dot: Vec<T>,
        multipliers: Vec<Complex<T>>,
        weights: Vec<Complex<T>>,
        offsets: Vec<Complex<T>>,
    ) -> Result<Self> {
        let len = nodes.len();
        if len % 2 == 0
            || s_dot.len() != len
            || multipliers.len() != len
            || weights.len() != len
            || offsets.len() != len
        {
            return Err(Error::Validation(format!(
                "construction rows must share one odd length, got {len}, {}, {}, {}, {}",
                s_dot.len(),
                multipliers.len(),
                weights.len(),
                offsets.len()
            )));
        }
        if n0 > (len - 1) / 2 {
            return Err(Error::Validation(format!(
                "threshold {n0} exceeds the stored range {}",
                (len - 1) / 2
            )));
        }
        for (i, z) in weights.iter().enumerate() {
            if !(z.re + z.im > T::zero()) {
                return Err(Error::Validation(format!(
                    "stored weight at row {i} is {z}, not above the line Im z = -Re z"
                )));
            }
        }
        Ok(ConstructionData {
            kind,
            nodes: NodeSystem { n0, nodes },
            s_dot,
            multipliers,
            weights,
            offsets,
        })
    }

    pub fn sine(&self, lambda: Complex<T>) -> Result<Complex<T>> {
        self.nodes.sine(lambda)
    }

    /// Interpolant carrying the multiplier offsets:
    /// `g(lambda) = s(lambda) sum_n beta_n / (s'_n (lambda - node_n))`.
    ///
    /// The singularities at the nodes are removable. Within a small relative
    /// distance of the nearest node the sum is evaluated in limit form,
    /// `beta_m ratio / s'_m + (lambda - node_m) ratio R` with
    /// `ratio = s(lambda)/(lambda - node_m)` taken from `quotient` (the
    /// vanishing factor divided out analytically) and `R` the sum over the
    /// other nodes, which stays conditioned all the way down to an exact hit.
    pub fn interpolant(&self, lambda: Complex<T>) -> Result<Complex<T>> {
        let r = self.range();
        let mut nearest = 0i64;
        let mut nearest_dist = T::infinity();
        for n in -r..=r {
            let d = (lambda - Complex::new(self.node(n), T::zero())).norm();
            if d < nearest_dist {
                nearest_dist = d;
                nearest = n;
            }
        }
        if nearest_dist < T::of(1e-4) * (T::one() + lambda.norm()) {
            let m = nearest;
            let dm = lambda - Complex::new(self.node(m), T::zero());
            let ratio = self.nodes.quotient(lambda, m)?;
            let mut rest = Complex::new(T::zero(), T::zero());
            for n in -r..=r {
                if n == m {
                    continue;
                }
                let den = (lambda - Complex::new(self.node(n), T::zero()))
                    .scale(self.s_dot(n));
                rest = rest + self.cosine_offset(n) / den;
            }
            return Ok(self.cosine_offset(m) * ratio.unscale(self.s_dot(m)) + dm * ratio * rest);
        }
        let s = self.sine(lambda)?;
        let mut sum = Complex::new(T::zero(), T::zero());
        for n in -r..=r {
            let den = (lambda - Complex::new(self.node(n), T::zero()))
                .scale(self.s_dot(n));
            sum = sum + self.cosine_offset(n) / den;
        }
        Ok(s * sum)
    }

    /// Cosine-type candidate: `cos(pi lambda) + g(lambda)`. Hits the
    /// selected multipliers at the nodes by construction.
    pub fn half_trace(&self, lambda: Complex<T>) -> Result<Complex<T>> {
        Ok(lambda.scale(T::PI()).cos() + self.interpolant(lambda)?)
    }

    /// Re-derived invariants, each measured rather than assumed.
    pub fn verify(&self) -> Result<VerificationReport<T>> {
        let r = self.range();
        let mut half_plane_margin = T::infinity();
        let mut min_multiplier = T::infinity();
        let mut interp_dev = T::zero();
        let mut trace_dev = T::zero();
        for n in -r..=r {
            let z = self.weight(n);
            half_plane_margin = half_plane_margin.min(z.re + z.im);
            min_multiplier = min_multiplier.min(self.multiplier(n).norm());
            // Probe at the node itself. The limit evaluation recomputes the
            // ratio s(lambda)/(lambda - node_n) from the product with the
            // vanishing factor removed, so this cross-checks the stored
            // derivative instead of echoing stored rows. Probing off the
            // node would instead measure h * g', which near a tight cluster
            // is dominated by the interpolant's genuinely large slope.
            let v = self.node(n);
            let probe = Complex::new(v, T::zero());
            let g = self.interpolant(probe)?;
            interp_dev = interp_dev.max((g - self.cosine_offset(n)).norm());
            let c = self.half_trace(probe)?;
            trace_dev = trace_dev.max((c - self.multiplier(n)).norm());
        }
        let signs_ok = (-r..=r).all(|n| T::alt(n) * self.s_dot(n) > T::zero());
        Ok(VerificationReport {
            signs_ok,
            half_plane_margin,
            min_multiplier_modulus: min_multiplier,
            interpolation_deviation: interp_dev,
            half_trace_deviation: trace_dev,
        })
    }
}

/// Measured invariants of a `ConstructionData`.
#[derive(Clone, Copy, Debug)]
pub struct VerificationReport<T> {
    pub signs_ok: bool,
    /// `min_n (Re z_n + Im z_n)`; positive when the half-plane constraint
    /// holds with margin.
    pub half_plane_margin: T,
    pub min_multiplier_modulus: T,
    /// `sup_n |g(node_n) - beta_n|` with `g` evaluated through the
    /// removable-singularity limit, whose node ratio is recomputed from the
    /// product rather than read from the stored derivatives.
    pub interpolation_deviation: T,
    /// `sup_n |c(node_n) - c_n|` for the same evaluation.
    pub half_trace_deviation: T,
}

/// One-call pipeline: threshold scan (or check), node placement, assembly.
pub fn build<T, F>(
    kind: BoundaryKind,
    mut chi: F,
    requested_n0: Option<usize>,
    range: usize,
) -> Result<(ConstructionData<T>, Vec<DiskWarning<T>>)>
where
    T: Real,
    F: FnMut(Complex<T>) -> Result<Complex<T>>,
{
    let n0 = admissible_threshold(&mut chi, range, requested_n0)?;
    let nodes = NodeSystem::place(n0, range)?;
    ConstructionData::assemble(kind, nodes, chi)
}
