//! q-calculus on a q-geometric lattice.
//!
//! Functions are represented by their samples on the grid `x_k = a q^k`,
//! `k = -1, 0, ..., K`. The point `x_{-1} = a/q` lies outside `[0, a]`; it
//! is only needed where an operator evaluates its argument at `x q^{-1}`.
//! Every infinite sum over the lattice is truncated at index `K`, and the
//! value at `x_K` stands in for the limit at zero.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::sum::ComplexSum;

/// Smallest `q^K` accepted by the automatic depth policy.
pub const AUTO_DEPTH_TOLERANCE: f64 = 1e-14;

/// Upper bound on the lattice depth.
pub const MAX_DEPTH: usize = 4000;

/// The base `q`, restricted to the open interval (0, 1).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct QParam(f64);

impl QParam {
    pub fn new(q: f64) -> Result<Self> {
        if q.is_finite() && q > 0.0 && q < 1.0 {
            Ok(Self(q))
        } else {
            Err(Error::InvalidParameter(format!(
                "q must lie in (0, 1), got {q}"
            )))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }
}

/// How deep the lattice reaches towards zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Depth {
    /// Smallest `K` with `q^K <= 1e-14`, capped at [`MAX_DEPTH`].
    Auto,
    Fixed(usize),
}

impl Depth {
    /// Smallest `K >= 2` with `q^K <= tol`, capped at [`MAX_DEPTH`].
    pub fn for_tolerance(q: QParam, tol: f64) -> Self {
        let mut k = 2;
        while k < MAX_DEPTH && q.value().powi(k as i32) > tol {
            k += 1;
        }
        Depth::Fixed(k)
    }
}

/// The geometric grid `{a q^k : k = -1, ..., K}`.
#[derive(Debug, Clone, PartialEq)]
pub struct QLattice {
    a: f64,
    q: QParam,
    depth: usize,
    points: Vec<f64>,
}

/// Builds the lattice with right endpoint `a`.
pub fn make_lattice(a: f64, q: QParam, depth: Depth) -> Result<QLattice> {
    if !(a.is_finite() && a > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "right endpoint a must be positive, got {a}"
        )));
    }
    let depth = match depth {
        Depth::Auto => match Depth::for_tolerance(q, AUTO_DEPTH_TOLERANCE) {
            Depth::Fixed(k) => k,
            Depth::Auto => unreachable!(),
        },
        Depth::Fixed(k) if k < 2 => {
            return Err(Error::InvalidParameter(format!(
                "lattice depth must be at least 2, got {k}"
            )))
        }
        Depth::Fixed(k) if k > MAX_DEPTH => {
            return Err(Error::InvalidParameter(format!(
                "lattice depth must not exceed {MAX_DEPTH}, got {k}"
            )))
        }
        Depth::Fixed(k) => k,
    };
    let qv = q.value();
    let mut points = Vec::with_capacity(depth + 2);
    points.push(a / qv);
    let mut x = a;
    for _ in 0..=depth {
        points.push(x);
        x *= qv;
    }
    Ok(QLattice {
        a,
        q,
        depth,
        points,
    })
}

impl QLattice {
    #[inline]
    pub fn a(&self) -> f64 {
        self.a
    }

    #[inline]
    pub fn q(&self) -> QParam {
        self.q
    }

    /// The deepest index `K`.
    #[inline]
    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Number of stored points, `K + 2`.
    #[inline]
    pub fn len(&self) -> usize {
        self.points.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// The point `x_k`; panics outside `[-1, K]`.
    #[inline]
    pub fn x(&self, k: isize) -> f64 {
        self.points[(k + 1) as usize]
    }

    /// All points, starting with `x_{-1}`.
    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Checks `lo <= k <= hi`.
    pub fn check_index(&self, k: isize, lo: isize, hi: isize) -> Result<()> {
        if k < lo || k > hi {
            Err(Error::IndexOutOfRange { k, lo, hi })
        } else {
            Ok(())
        }
    }
}

/// Complex samples of a function on a lattice.
///
/// The exterior sample at `x_{-1}` may be absent; interior samples
/// `0..=K` are always present.
#[derive(Debug, Clone)]
pub struct LatticeFn {
    lattice: Arc<QLattice>,
    values: Vec<Complex64>,
    exterior: bool,
}

impl LatticeFn {
    /// Samples `f` at every lattice point, including `x_{-1}`.
    pub fn from_fn(lattice: &Arc<QLattice>, f: impl Fn(f64) -> Complex64) -> Self {
        Self {
            lattice: Arc::clone(lattice),
            values: lattice.points().iter().map(|&x| f(x)).collect(),
            exterior: true,
        }
    }

    /// Takes `K + 2` values ordered from `k = -1`.
    pub fn from_values(lattice: &Arc<QLattice>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != lattice.len() {
            return Err(Error::InvalidParameter(format!(
                "expected {} lattice values, got {}",
                lattice.len(),
                values.len()
            )));
        }
        Ok(Self {
            lattice: Arc::clone(lattice),
            values,
            exterior: true,
        })
    }

    /// Takes `K + 1` values for `k = 0..=K`; the exterior sample is absent.
    pub fn from_interior(lattice: &Arc<QLattice>, interior: Vec<Complex64>) -> Result<Self> {
        if interior.len() + 1 != lattice.len() {
            return Err(Error::InvalidParameter(format!(
                "expected {} interior values, got {}",
                lattice.len() - 1,
                interior.len()
            )));
        }
        let mut values = Vec::with_capacity(lattice.len());
        values.push(Complex64::new(f64::NAN, f64::NAN));
        values.extend(interior);
        Ok(Self {
            lattice: Arc::clone(lattice),
            values,
            exterior: false,
        })
    }

    pub(crate) fn from_raw(
        lattice: &Arc<QLattice>,
        values: Vec<Complex64>,
        exterior: bool,
    ) -> Self {
        debug_assert_eq!(values.len(), lattice.len());
        Self {
            lattice: Arc::clone(lattice),
            values,
            exterior,
        }
    }

    pub fn zeros(lattice: &Arc<QLattice>) -> Self {
        Self::from_fn(lattice, |_| Complex64::new(0.0, 0.0))
    }

    pub fn lattice(&self) -> &Arc<QLattice> {
        &self.lattice
    }

    pub fn has_exterior(&self) -> bool {
        self.exterior
    }

    /// The sample at `x_k`.
    pub fn get(&self, k: isize) -> Result<Complex64> {
        self.lattice
            .check_index(k, -1, self.lattice.depth() as isize)?;
        if k == -1 && !self.exterior {
            return Err(Error::MissingSample(-1));
        }
        Ok(self.values[(k + 1) as usize])
    }

    /// Unchecked access for internal loops; the exterior slot of a
    /// function without one holds NaN.
    #[inline]
    pub(crate) fn at(&self, k: isize) -> Complex64 {
        self.values[(k + 1) as usize]
    }

    /// Samples at `k = 0..=K`.
    pub fn interior(&self) -> &[Complex64] {
        &self.values[1..]
    }

    pub fn same_lattice(&self, other: &LatticeFn) -> bool {
        Arc::ptr_eq(&self.lattice, &other.lattice) || *self.lattice == *other.lattice
    }

    /// Pointwise `f(self, other)`; the exterior survives only if both have it.
    pub fn zip_with(
        &self,
        other: &LatticeFn,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<LatticeFn> {
        if !self.same_lattice(other) {
            return Err(Error::LatticeMismatch);
        }
        let exterior = self.exterior && other.exterior;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .enumerate()
            .map(|(i, (&u, &v))| {
                if i == 0 && !exterior {
                    Complex64::new(f64::NAN, f64::NAN)
                } else {
                    f(u, v)
                }
            })
            .collect();
        Ok(LatticeFn::from_raw(&self.lattice, values, exterior))
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> LatticeFn {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(i, &v)| if i == 0 && !self.exterior { v } else { f(v) })
            .collect();
        LatticeFn::from_raw(&self.lattice, values, self.exterior)
    }

    pub fn scale(&self, c: Complex64) -> LatticeFn {
        self.map(|v| c * v)
    }

    /// `alpha * self + beta * other`.
    pub fn combine(
        &self,
        alpha: Complex64,
        other: &LatticeFn,
        beta: Complex64,
    ) -> Result<LatticeFn> {
        self.zip_with(other, |u, v| alpha * u + beta * v)
    }
}

/// A column pair `(y1, y2)` of lattice functions sharing one lattice.
#[derive(Debug, Clone)]
pub struct SpinorLatticeFn {
    pub y1: LatticeFn,
    pub y2: LatticeFn,
}

impl SpinorLatticeFn {
    pub fn new(y1: LatticeFn, y2: LatticeFn) -> Result<Self> {
        if !y1.same_lattice(&y2) {
            return Err(Error::LatticeMismatch);
        }
        Ok(Self { y1, y2 })
    }

    pub fn lattice(&self) -> &Arc<QLattice> {
        self.y1.lattice()
    }

    pub fn same_lattice(&self, other: &SpinorLatticeFn) -> bool {
        self.y1.same_lattice(&other.y1)
    }

    pub fn scale(&self, c: Complex64) -> SpinorLatticeFn {
        SpinorLatticeFn {
            y1: self.y1.scale(c),
            y2: self.y2.scale(c),
        }
    }

    pub fn combine(
        &self,
        alpha: Complex64,
        other: &SpinorLatticeFn,
        beta: Complex64,
    ) -> Result<SpinorLatticeFn> {
        SpinorLatticeFn::new(
            self.y1.combine(alpha, &other.y1, beta)?,
            self.y2.combine(alpha, &other.y2, beta)?,
        )
    }
}

/// Jackson integral over `[0, a]`, truncated at `x_K`:
/// `a (1 - q) sum_{n=0}^{K} q^n f(a q^n)`.
pub fn jackson_integral(f: &LatticeFn) -> Complex64 {
    let lat = f.lattice();
    let one_minus_q = 1.0 - lat.q().value();
    (0..=lat.depth() as isize)
        .map(|k| f.at(k) * (lat.x(k) * one_minus_q))
        .collect::<ComplexSum>()
        .value()
}

/// Jackson integral from 0 to every lattice point `x_k`.
///
/// The result has an exterior sample whenever `f` does.
pub fn jackson_cumulative(f: &LatticeFn) -> LatticeFn {
    let lat = f.lattice();
    let one_minus_q = 1.0 - lat.q().value();
    let depth = lat.depth() as isize;
    let lowest = if f.has_exterior() { -1 } else { 0 };
    let mut values = vec![Complex64::new(f64::NAN, f64::NAN); lat.len()];
    let mut acc = ComplexSum::new();
    for k in (lowest..=depth).rev() {
        acc.add(f.at(k) * (lat.x(k) * one_minus_q));
        values[(k + 1) as usize] = acc.value();
    }
    LatticeFn::from_raw(lat, values, f.has_exterior())
}

/// `D_q f(x_k) = (f(x_k) - f(x_{k+1})) / (x_k (1 - q))` for `0 <= k < K`.
pub fn dq_at(f: &LatticeFn, k: isize) -> Result<Complex64> {
    let lat = f.lattice();
    lat.check_index(k, 0, lat.depth() as isize - 1)?;
    let q = lat.q().value();
    Ok((f.at(k) - f.at(k + 1)) / (lat.x(k) * (1.0 - q)))
}

/// `D_{q^{-1}} f(x_k) = (f(x_k) - f(x_{k-1})) / (x_k (1 - 1/q))` for `0 <= k <= K`.
pub fn dq_inv_at(f: &LatticeFn, k: isize) -> Result<Complex64> {
    let lat = f.lattice();
    lat.check_index(k, 0, lat.depth() as isize)?;
    let prev = f.get(k - 1)?;
    let q = lat.q().value();
    Ok((f.at(k) - prev) / (lat.x(k) * (1.0 - 1.0 / q)))
}

/// Bilinear pairing `int_0^a (y1 z1 + y2 z2) d_q x` of the spinor space.
pub fn inner_product_hq(y: &SpinorLatticeFn, z: &SpinorLatticeFn) -> Result<Complex64> {
    if !y.same_lattice(z) {
        return Err(Error::LatticeMismatch);
    }
    let lat = y.lattice();
    let one_minus_q = 1.0 - lat.q().value();
    Ok((0..=lat.depth() as isize)
        .map(|k| (y.y1.at(k) * z.y1.at(k) + y.y2.at(k) * z.y2.at(k)) * (lat.x(k) * one_minus_q))
        .collect::<ComplexSum>()
        .value())
}

/// Hermitian inner product `int_0^a f conj(g) d_q x`.
pub fn inner_product_l2q(f: &LatticeFn, g: &LatticeFn) -> Result<Complex64> {
    Ok(jackson_integral(&f.zip_with(g, |u, v| u * v.conj())?))
}

/// `(int_0^a |f|^2 d_q x)^{1/2}`.
pub fn norm_l2q(f: &LatticeFn) -> f64 {
    jackson_integral(&f.map(|v| Complex64::new(v.norm_sqr(), 0.0)))
        .re
        .sqrt()
}

/// `(q; q)_n = prod_{j=1}^{n} (1 - q^j)`.
pub fn q_pochhammer(n: usize, q: QParam) -> f64 {
    let q = q.value();
    let mut qj = 1.0;
    let mut prod = 1.0;
    for _ in 0..n {
        qj *= q;
        prod *= 1.0 - qj;
    }
    prod
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn lattice(a: f64, q: f64, depth: Depth) -> Arc<QLattice> {
        Arc::new(make_lattice(a, QParam::new(q).unwrap(), depth).unwrap())
    }

    #[test]
    fn rejects_bad_q() {
        for q in [0.0, 1.0, 1.2, -0.5, f64::NAN] {
            assert!(QParam::new(q).is_err(), "q = {q}");
        }
    }

    #[test]
    fn explicit_depth_points() {
        let lat = lattice(1.0, 0.5, Depth::Fixed(4));
        assert_eq!(lat.points(), &[2.0, 1.0, 0.5, 0.25, 0.125, 0.0625]);
        assert_eq!(lat.x(-1), 2.0);
        assert_eq!(lat.x(4), 0.0625);
    }

    #[test]
    fn auto_depth_for_half() {
        let lat = lattice(std::f64::consts::PI, 0.5, Depth::Auto);
        assert_eq!(lat.depth(), 47);
        assert!(0.5f64.powi(47) <= 1e-14 && 0.5f64.powi(46) > 1e-14);
    }

    #[test]
    fn auto_depth_is_capped() {
        let lat = lattice(1.0, 0.9999, Depth::Auto);
        assert_eq!(lat.depth(), MAX_DEPTH);
    }

    #[test]
    fn lattice_errors() {
        let q = QParam::new(0.5).unwrap();
        assert!(make_lattice(0.0, q, Depth::Auto).is_err());
        assert!(make_lattice(-1.0, q, Depth::Auto).is_err());
        assert!(make_lattice(1.0, q, Depth::Fixed(1)).is_err());
    }

    #[test]
    fn jackson_of_constant() {
        let lat = lattice(1.0, 0.5, Depth::Auto);
        let one = LatticeFn::from_fn(&lat, |_| c(1.0));
        let v = jackson_integral(&one);
        assert!((v.re - 1.0).abs() <= 0.5f64.powi(lat.depth() as i32 + 1));
        assert_eq!(v.im, 0.0);
    }

    #[test]
    fn jackson_of_monomials() {
        let lat = lattice(1.0, 0.5, Depth::Auto);
        let v = jackson_integral(&LatticeFn::from_fn(&lat, c));
        assert!((v.re - 2.0 / 3.0).abs() < 1e-15);

        let lat = lattice(2.0, 0.5, Depth::Auto);
        let v = jackson_integral(&LatticeFn::from_fn(&lat, |x| c(x * x)));
        assert!((v.re - 32.0 / 7.0).abs() < 1e-14);
    }

    #[test]
    fn dq_basic() {
        let lat = lattice(1.0, 0.5, Depth::Fixed(10));
        let konst = LatticeFn::from_fn(&lat, |_| c(3.5));
        for k in 0..10 {
            assert_eq!(dq_at(&konst, k).unwrap(), c(0.0));
        }
        let sq = LatticeFn::from_fn(&lat, |x| c(x * x));
        // x_0 = 1
        assert!((dq_at(&sq, 0).unwrap().re - 1.5).abs() < 1e-15);
        assert!(matches!(
            dq_at(&sq, 10),
            Err(Error::IndexOutOfRange { k: 10, .. })
        ));
        assert!(dq_at(&sq, -1).is_err());
    }

    #[test]
    fn dq_linear() {
        let lat = lattice(1.3, 0.6, Depth::Fixed(20));
        let f = LatticeFn::from_fn(&lat, |x| c(x.powi(3) - 2.0 * x));
        let g = LatticeFn::from_fn(&lat, |x| c(x.sin()));
        let h = f.combine(c(2.0), &g, c(3.0)).unwrap();
        for k in 0..20 {
            let lhs = dq_at(&h, k).unwrap();
            let rhs = dq_at(&f, k).unwrap() * 2.0 + dq_at(&g, k).unwrap() * 3.0;
            assert!((lhs - rhs).norm() <= 1e-12 * rhs.norm().max(1.0));
        }
    }

    #[test]
    fn dq_inv_matches_shifted_dq() {
        let lat = lattice(1.0, 0.5, Depth::Fixed(10));
        let sq = LatticeFn::from_fn(&lat, |x| c(x * x));
        // x_0 = 1, and (D_q x^2)(2) = 1.5 * 2
        assert!((dq_inv_at(&sq, 0).unwrap().re - 3.0).abs() < 1e-15);
        for k in 1..=10 {
            assert_eq!(dq_inv_at(&sq, k).unwrap(), dq_at(&sq, k - 1).unwrap());
        }
        let id = LatticeFn::from_fn(&lat, c);
        for k in 0..=10 {
            assert!((dq_inv_at(&id, k).unwrap().re - 1.0).abs() < 1e-14);
        }
        let konst = LatticeFn::from_fn(&lat, |_| c(-2.0));
        assert_eq!(dq_inv_at(&konst, 3).unwrap(), c(0.0));
    }

    #[test]
    fn dq_inv_needs_exterior() {
        let lat = lattice(1.0, 0.5, Depth::Fixed(3));
        let f = LatticeFn::from_interior(&lat, vec![c(1.0); 4]).unwrap();
        assert_eq!(dq_inv_at(&f, 0), Err(Error::MissingSample(-1)));
        assert!(dq_inv_at(&f, 1).is_ok());
    }

    #[test]
    fn hq_pairing() {
        let lat = lattice(1.0, 0.5, Depth::Auto);
        let one = LatticeFn::from_fn(&lat, |_| c(1.0));
        let zero = LatticeFn::zeros(&lat);
        let y = SpinorLatticeFn::new(one.clone(), zero.clone()).unwrap();
        let z = SpinorLatticeFn::new(zero.clone(), zero).unwrap();
        assert_eq!(inner_product_hq(&y, &z).unwrap(), c(0.0));
        assert!((inner_product_hq(&y, &y).unwrap().re - 1.0).abs() < 1e-14);

        let u = SpinorLatticeFn::new(
            LatticeFn::from_fn(&lat, |x| c(x.cos())),
            LatticeFn::from_fn(&lat, |x| c(x * x - 0.3)),
        )
        .unwrap();
        let v = SpinorLatticeFn::new(
            LatticeFn::from_fn(&lat, |x| c(1.0 / (1.0 + x))),
            LatticeFn::from_fn(&lat, |x| c(x.exp())),
        )
        .unwrap();
        assert_eq!(
            inner_product_hq(&u, &v).unwrap(),
            inner_product_hq(&v, &u).unwrap()
        );
    }

    #[test]
    fn hq_pairing_rejects_other_lattice() {
        let l1 = lattice(1.0, 0.5, Depth::Fixed(5));
        let l2 = lattice(1.0, 0.5, Depth::Fixed(6));
        let y = SpinorLatticeFn::new(LatticeFn::zeros(&l1), LatticeFn::zeros(&l1)).unwrap();
        let z = SpinorLatticeFn::new(LatticeFn::zeros(&l2), LatticeFn::zeros(&l2)).unwrap();
        assert_eq!(inner_product_hq(&y, &z), Err(Error::LatticeMismatch));
        assert!(SpinorLatticeFn::new(LatticeFn::zeros(&l1), LatticeFn::zeros(&l2)).is_err());
    }

    #[test]
    fn l2q_norm_of_constant() {
        let lat = lattice(4.0, 0.3, Depth::Auto);
        let f = LatticeFn::from_fn(&lat, |_| Complex64::new(0.0, 2.0));
        assert!((norm_l2q(&f) - 4.0).abs() < 1e-13);
        let ip = inner_product_l2q(&f, &f).unwrap();
        assert!((ip.re - 16.0).abs() < 1e-12 && ip.im.abs() < 1e-15);
    }

    #[test]
    fn pochhammer_values() {
        let q = QParam::new(0.5).unwrap();
        assert_eq!(q_pochhammer(0, q), 1.0);
        assert_eq!(q_pochhammer(1, q), 0.5);
        assert_eq!(q_pochhammer(2, q), 0.375);
    }

    #[test]
    fn cumulative_endpoint_is_full_integral() {
        let lat = lattice(1.5, 0.7, Depth::Auto);
        let f = LatticeFn::from_fn(&lat, |x| c(1.0 + x * x));
        let cum = jackson_cumulative(&f);
        assert_eq!(cum.get(0).unwrap(), jackson_integral(&f));
    }
}
