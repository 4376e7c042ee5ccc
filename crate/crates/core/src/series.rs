//! Truncated power series with tail bookkeeping, over `f64` or `Complex64`.
//!
//! A [`PowerSeries`] stores coefficients of `Σ c_m (t − t0)^m` up to a
//! truncation order, plus a `tail` field: an upper bound on the supremum of
//! everything that has been discarded, taken over `|t − t0| ≤ radius`. All
//! arithmetic keeps the tail a valid over-approximation, so any quantity
//! reported as "value + tail" is an honest upper bound. Tails are only ever
//! created by truncating at an order `≥ K_MAX_DEFAULT`, so the discarded
//! part always vanishes at the expansion point to an order far above any
//! weighted-metric level used by the solvers.

use num_complex::Complex64;
use std::fmt::Debug;

/// Default truncation order for series backends.
pub const K_MAX_DEFAULT: usize = 64;

/// Coefficient scalar: real or complex double precision.
pub trait Scalar:
    Copy
    + PartialEq
    + Debug
    + std::ops::Add<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Mul<Output = Self>
    + std::ops::Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_real(x: f64) -> Self;
    /// Absolute value (modulus in the complex case).
    fn modulus(self) -> f64;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_real(x: f64) -> Self {
        x
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn from_real(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
}

/// A scalar truncated power series in `(t − t0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSeries<T: Scalar> {
    /// `coeffs[m]` multiplies `(t − t0)^m`.
    pub coeffs: Vec<T>,
    /// Sup bound on the discarded part over `|t − t0| ≤ radius`.
    pub tail: f64,
}

impl<T: Scalar> PowerSeries<T> {
    pub fn zero() -> Self {
        PowerSeries {
            coeffs: vec![],
            tail: 0.0,
        }
    }

    pub fn constant(c: T) -> Self {
        PowerSeries {
            coeffs: vec![c],
            tail: 0.0,
        }
    }

    pub fn from_coeffs(coeffs: Vec<T>) -> Self {
        PowerSeries { coeffs, tail: 0.0 }
    }

    /// Degree of the stored polynomial part (0 for an empty series).
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn coeff(&self, m: usize) -> T {
        self.coeffs.get(m).copied().unwrap_or_else(T::zero)
    }

    /// `Σ |c_m| radius^m`, a sup bound for the stored part on the disc.
    pub fn majorant(&self, radius: f64) -> f64 {
        let mut pow = 1.0;
        let mut sum = 0.0;
        for c in &self.coeffs {
            sum += c.modulus() * pow;
            pow *= radius;
        }
        sum
    }

    /// Sup bound for the series including its tail.
    pub fn sup_bound(&self, radius: f64) -> f64 {
        self.majorant(radius) + self.tail
    }

    /// Horner evaluation at `dt = t − t0` (tail not included).
    pub fn eval(&self, dt: T) -> T {
        let mut acc = T::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * dt + *c;
        }
        acc
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n).map(|m| self.coeff(m) + other.coeff(m)).collect();
        PowerSeries {
            coeffs,
            tail: self.tail + other.tail,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n).map(|m| self.coeff(m) - other.coeff(m)).collect();
        PowerSeries {
            coeffs,
            tail: self.tail + other.tail,
        }
    }

    pub fn scale(&self, factor: T) -> Self {
        PowerSeries {
            coeffs: self.coeffs.iter().map(|&c| c * factor).collect(),
            tail: self.tail * factor.modulus(),
        }
    }

    /// Cauchy product, truncated at order `k_max`.
    ///
    /// The full convolution is formed first; mass discarded by the
    /// truncation moves into the tail, together with the cross terms
    /// involving the operand tails.
    pub fn mul(&self, other: &Self, radius: f64, k_max: usize) -> Self {
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return PowerSeries {
                coeffs: vec![],
                tail: self.tail * other.sup_bound(radius) + other.tail * self.majorant(radius),
            };
        }
        let full_deg = self.degree() + other.degree();
        let mut full = vec![T::zero(); full_deg + 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == T::zero() {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                full[i + j] = full[i + j] + a * b;
            }
        }
        let mut tail = self.tail * other.sup_bound(radius) + other.tail * self.majorant(radius);
        let coeffs = if full_deg > k_max {
            let mut pow = radius.powi(k_max as i32 + 1);
            for c in &full[k_max + 1..] {
                tail += c.modulus() * pow;
                pow *= radius;
            }
            full.truncate(k_max + 1);
            full
        } else {
            full
        };
        PowerSeries { coeffs, tail }
    }

    /// Integer power by repeated multiplication (`q = 0` gives `1`).
    pub fn powi(&self, q: u32, radius: f64, k_max: usize) -> Self {
        let mut acc = PowerSeries::constant(T::one());
        for _ in 0..q {
            acc = acc.mul(self, radius, k_max);
        }
        acc
    }

    /// Termwise antiderivative vanishing at the expansion point:
    /// `c_m ↦ c_m/(m+1)` at order `m+1`.
    ///
    /// The tail is multiplied by `radius`: a part bounded by `tail` in sup
    /// norm integrates, along any path of length at most `radius` staying
    /// in the disc, to something bounded by `tail·radius`.
    pub fn integrate(&self, radius: f64, k_max: usize) -> Self {
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(T::zero());
        let mut tail = self.tail * radius;
        for (m, &c) in self.coeffs.iter().enumerate() {
            let integrated = c * T::from_real(1.0 / (m as f64 + 1.0));
            if m + 1 > k_max {
                tail += integrated.modulus() * radius.powi(m as i32 + 1);
            } else {
                coeffs.push(integrated);
            }
        }
        PowerSeries { coeffs, tail }
    }

    /// Drop leading coefficients below `order`, if they are all negligible.
    ///
    /// Returns the quotient series by `(t − t0)^order`, or `None` if some
    /// coefficient below `order` exceeds `abs_tol` (the quotient would blow
    /// up at the expansion point). The caller chooses `abs_tol` relative to
    /// the overall scale of the data it is comparing.
    pub fn shift_down(&self, order: usize, abs_tol: f64) -> Option<Self> {
        for m in 0..order.min(self.coeffs.len()) {
            if self.coeffs[m].modulus() > abs_tol {
                return None;
            }
        }
        let coeffs = if order >= self.coeffs.len() {
            vec![]
        } else {
            self.coeffs[order..].to_vec()
        };
        Some(PowerSeries {
            coeffs,
            tail: self.tail,
        })
    }

    /// Largest coefficient modulus.
    pub fn coeff_scale(&self) -> f64 {
        self.coeffs
            .iter()
            .fold(0.0f64, |acc, c| acc.max(c.modulus()))
    }
}

/// A `d`-component vector of scalar series sharing one expansion point.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorSeries<T: Scalar> {
    pub components: Vec<PowerSeries<T>>,
}

impl<T: Scalar> VectorSeries<T> {
    pub fn constant(values: &[T]) -> Self {
        VectorSeries {
            components: values.iter().map(|&v| PowerSeries::constant(v)).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn sub(&self, other: &Self) -> Self {
        debug_assert_eq!(self.dim(), other.dim());
        VectorSeries {
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a.sub(b))
                .collect(),
        }
    }

    /// Vector of values at `dt`; tails are not included.
    pub fn eval(&self, dt: T) -> Vec<T> {
        self.components.iter().map(|c| c.eval(dt)).collect()
    }

    /// Largest stored coefficient order across components.
    pub fn degree(&self) -> usize {
        self.components
            .iter()
            .map(|c| c.degree())
            .max()
            .unwrap_or(0)
    }

    /// Total tail across components (max is enough for a max-norm bound;
    /// the sum is sound for any norm).
    pub fn tail_sum(&self) -> f64 {
        self.components.iter().map(|c| c.tail).sum()
    }
}

/// A vector-valued truncated power series viewed as a curve
/// `t ↦ Σ c_m (t − center)^m` on `|t − center| ≤ radius`.
///
/// This is the exact backend representation shared by the real solver
/// (real center on an interval) and the complex solver (disc).
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesFunction<T: Scalar> {
    pub center: T,
    pub radius: f64,
    pub series: VectorSeries<T>,
}

impl<T: Scalar> SeriesFunction<T> {
    /// The constant curve `t ↦ values`.
    pub fn constant(center: T, radius: f64, values: &[T]) -> Self {
        SeriesFunction {
            center,
            radius,
            series: VectorSeries::constant(values),
        }
    }

    pub fn from_components(center: T, radius: f64, components: Vec<PowerSeries<T>>) -> Self {
        SeriesFunction {
            center,
            radius,
            series: VectorSeries { components },
        }
    }

    pub fn dim(&self) -> usize {
        self.series.dim()
    }

    /// Value at absolute time/point `t` (tails not included).
    pub fn eval(&self, t: T) -> Vec<T> {
        self.series.eval(t - self.center)
    }

    /// Value of the curve at the expansion point.
    pub fn center_value(&self) -> Vec<T> {
        self.series.components.iter().map(|c| c.coeff(0)).collect()
    }

    /// Curve-level Picard image `t ↦ y0 + ∫_{t0}^{t} F(s, y(s)) ds` with a
    /// polynomial field `F`, computed by termwise composition and
    /// integration — no quadrature is involved, truncation is the only
    /// error source and it is tracked in the tails.
    pub fn picard_image(&self, field: &PolyMap<T>, y0: &[T], k_max: usize) -> Self {
        let t_series = PowerSeries::from_coeffs(vec![self.center, T::one()]);
        let integrand = field.eval_series(&t_series, &self.series, self.radius, k_max);
        let components = integrand
            .components
            .iter()
            .zip(y0)
            .map(|(c, &y0_i)| {
                let mut integrated = c.integrate(self.radius, k_max);
                integrated.coeffs[0] = integrated.coeffs[0] + y0_i;
                integrated
            })
            .collect();
        SeriesFunction {
            center: self.center,
            radius: self.radius,
            series: VectorSeries { components },
        }
    }

    /// Sum of component tails.
    pub fn tail_sum(&self) -> f64 {
        self.series.tail_sum()
    }
}

/// One monomial `coeff · t^{t_pow} · Π y_i^{y_pows[i]}` of a polynomial map.
#[derive(Debug, Clone)]
pub struct Monomial<T: Scalar> {
    pub coeff: T,
    pub t_pow: u32,
    pub y_pows: Vec<u32>,
}

/// A polynomial map `(t, y) ↦ F(t, y) ∈ K^d`, one monomial list per output
/// component. This is the right-hand-side representation the exact series
/// backends can evaluate without quadrature.
#[derive(Debug, Clone)]
pub struct PolyMap<T: Scalar> {
    pub dim: usize,
    pub components: Vec<Vec<Monomial<T>>>,
}

impl<T: Scalar> PolyMap<T> {
    pub fn new(dim: usize, components: Vec<Vec<Monomial<T>>>) -> Self {
        assert_eq!(
            components.len(),
            dim,
            "one monomial list per output component"
        );
        for comp in &components {
            for mono in comp {
                assert_eq!(
                    mono.y_pows.len(),
                    dim,
                    "monomial y_pows must match dimension"
                );
            }
        }
        PolyMap { dim, components }
    }

    /// The scalar linear field `y ↦ scale·y` in one dimension.
    pub fn linear_1d(scale: T) -> Self {
        PolyMap::new(
            1,
            vec![vec![Monomial {
                coeff: scale,
                t_pow: 0,
                y_pows: vec![1],
            }]],
        )
    }

    /// Pointwise evaluation.
    pub fn eval(&self, t: T, y: &[T]) -> Vec<T> {
        debug_assert_eq!(y.len(), self.dim);
        self.components
            .iter()
            .map(|monos| {
                let mut acc = T::zero();
                for mono in monos {
                    let mut term = mono.coeff;
                    for _ in 0..mono.t_pow {
                        term = term * t;
                    }
                    for (yi, &q) in y.iter().zip(&mono.y_pows) {
                        for _ in 0..q {
                            term = term * *yi;
                        }
                    }
                    acc = acc + term;
                }
                acc
            })
            .collect()
    }

    /// Composition with a vector series: returns the series of
    /// `t ↦ F(t, y(t))` truncated at `k_max`.
    ///
    /// `t_series` must be the series of `t` itself around the expansion
    /// point, i.e. `[t0, 1]`.
    pub fn eval_series(
        &self,
        t_series: &PowerSeries<T>,
        y: &VectorSeries<T>,
        radius: f64,
        k_max: usize,
    ) -> VectorSeries<T> {
        debug_assert_eq!(y.dim(), self.dim);
        let components = self
            .components
            .iter()
            .map(|monos| {
                let mut acc = PowerSeries::zero();
                for mono in monos {
                    let mut term = PowerSeries::constant(mono.coeff);
                    if mono.t_pow > 0 {
                        term = term.mul(&t_series.powi(mono.t_pow, radius, k_max), radius, k_max);
                    }
                    for (comp, &q) in y.components.iter().zip(&mono.y_pows) {
                        if q > 0 {
                            term = term.mul(&comp.powi(q, radius, k_max), radius, k_max);
                        }
                    }
                    acc = acc.add(&term);
                }
                acc
            })
            .collect();
        VectorSeries { components }
    }

    /// Max total degree in `(t, y)` across monomials.
    pub fn total_degree(&self) -> u32 {
        self.components
            .iter()
            .flatten()
            .map(|m| m.t_pow + m.y_pows.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }
}
