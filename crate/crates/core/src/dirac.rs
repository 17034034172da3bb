//! The q-Dirac initial value problem on the lattice.
//!
//! ```text
//! -(1/q) D_{q^-1} y2 + p(x) y1 = lambda y1
//!         D_q   y1 + r(x) y2 = lambda y2
//! ```
//!
//! Written out on the grid this is the outward recurrence
//!
//! ```text
//! y2(x_k) = y2(x_{k+1}) - x_{k+1}(1-q) (lambda - p(x_{k+1})) y1(x_{k+1})
//! y1(x_k) = y1(x_{k+1}) + x_k(1-q)     (lambda - r(x_k))     y2(x_k)
//! ```
//!
//! started from `y1(x_K) = k12`, `y2(x_K) = -k11` and closed by
//! `y2(x_{-1}) = y2(x_0) - a(1-q)(lambda - p(a)) y1(x_0)`. The recurrence is
//! run in dual arithmetic so the lambda-derivative of every sample comes
//! out exactly alongside the value.

use std::sync::Arc;

use num_complex::{Complex, Complex64};
use twofloat::TwoFloat;

use crate::dual::{Dual, DualScalar};
use crate::error::{Error, Result};
use crate::funcspec::{eval_expr, FunctionSpec};
use crate::qcore::{make_lattice, Depth, LatticeFn, QLattice, SpinorLatticeFn};

/// Largest `bound / |sample|` ratio accepted from the lattice recurrence.
///
/// The recurrence carries about 106 bits, so samples certified under this
/// limit keep roughly eleven significant digits.
pub const TRACE_CONDITION_LIMIT: f64 = 1e21;

/// Real boundary coefficients: `k11 y1(0) + k12 y2(0) = 0` and
/// `k21 y1(a) + k22 y2(a/q) = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryConditions {
    pub k11: f64,
    pub k12: f64,
    pub k21: f64,
    pub k22: f64,
}

impl BoundaryConditions {
    pub fn new(k11: f64, k12: f64, k21: f64, k22: f64) -> Result<Self> {
        if [k11, k12, k21, k22].iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "boundary coefficients must be finite".into(),
            ));
        }
        if k11 == 0.0 && k12 == 0.0 {
            return Err(Error::InvalidParameter(
                "left boundary condition is empty: k11 = k12 = 0".into(),
            ));
        }
        if k21 == 0.0 && k22 == 0.0 {
            return Err(Error::InvalidParameter(
                "right boundary condition is empty: k21 = k22 = 0".into(),
            ));
        }
        Ok(Self { k11, k12, k21, k22 })
    }
}

/// The potentials `p` and `r`.
#[derive(Debug, Clone, PartialEq)]
pub struct Coefficients {
    pub p: FunctionSpec,
    pub r: FunctionSpec,
}

impl Coefficients {
    pub fn zero() -> Self {
        Self {
            p: FunctionSpec::constant(0.0),
            r: FunctionSpec::constant(0.0),
        }
    }
}

/// Lattice, potentials and boundary conditions, with `p` and `r` cached
/// at `x_0 ..= x_K`.
#[derive(Debug, Clone)]
pub struct DiracProblem {
    lattice: Arc<QLattice>,
    coeffs: Coefficients,
    bc: BoundaryConditions,
    p_vals: Vec<f64>,
    r_vals: Vec<f64>,
}

fn sample_coefficient(name: &str, fs: &FunctionSpec, lat: &QLattice) -> Result<Vec<f64>> {
    let depth = lat.depth() as isize;
    let values = match fs {
        FunctionSpec::Expr(e) => {
            let at_zero = eval_expr(e, 0.0, lat.q())
                .map_err(|err| Error::InvalidParameter(format!("{name}(0): {err}")))?;
            debug_assert!(at_zero.is_finite());
            (0..=depth)
                .map(|k| {
                    eval_expr(e, lat.x(k), lat.q())
                        .map_err(|err| Error::InvalidParameter(format!("{name}(x_{k}): {err}")))
                })
                .collect::<Result<Vec<_>>>()?
        }
        FunctionSpec::Samples(table) => (0..=depth)
            .map(|k| {
                let v = table.get(k).ok_or(Error::MissingSample(k))?;
                if v.im != 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "{name} must be real-valued; sample {k} is {v}"
                    )));
                }
                Ok(v.re)
            })
            .collect::<Result<Vec<_>>>()?,
    };
    if let Some(k) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("{name}(x_{k})")));
    }
    Ok(values)
}

impl DiracProblem {
    pub fn new(
        lattice: Arc<QLattice>,
        coeffs: Coefficients,
        bc: BoundaryConditions,
    ) -> Result<Self> {
        let p_vals = sample_coefficient("p", &coeffs.p, &lattice)?;
        let r_vals = sample_coefficient("r", &coeffs.r, &lattice)?;
        Ok(Self {
            lattice,
            coeffs,
            bc,
            p_vals,
            r_vals,
        })
    }

    pub fn lattice(&self) -> &Arc<QLattice> {
        &self.lattice
    }

    pub fn coefficients(&self) -> &Coefficients {
        &self.coeffs
    }

    pub fn bc(&self) -> BoundaryConditions {
        self.bc
    }

    /// Same problem on a lattice of a different depth.
    pub fn with_depth(&self, depth: Depth) -> Result<Self> {
        let lat = make_lattice(self.lattice.a(), self.lattice.q(), depth)?;
        Self::new(Arc::new(lat), self.coeffs.clone(), self.bc)
    }

    /// Same problem with other boundary conditions.
    pub fn with_bc(&self, bc: BoundaryConditions) -> Self {
        Self { bc, ..self.clone() }
    }

    #[inline]
    pub fn p_at(&self, k: isize) -> f64 {
        self.p_vals[k as usize]
    }

    #[inline]
    pub fn r_at(&self, k: isize) -> f64 {
        self.r_vals[k as usize]
    }
}

/// Lattice samples of the solution `phi(x, lambda)` and of its
/// lambda-derivative.
///
/// `phi1` has no exterior sample; `phi2` does. `bound1` and `bound2` hold
/// the same recurrence run with every term replaced by its modulus; their
/// ratio to the actual samples measures the cancellation suffered.
#[derive(Debug, Clone)]
pub struct SolutionTrace {
    pub lambda: Complex64,
    /// Low-order part of the spectral parameter; usually zero.
    pub lambda_tail: Complex64,
    pub phi1: LatticeFn,
    pub phi2: LatticeFn,
    pub dphi1: LatticeFn,
    pub dphi2: LatticeFn,
    bound1: Vec<f64>,
    bound2: Vec<f64>,
    // low halves of the double-double samples
    lo1: Vec<Complex64>,
    lo2: Vec<Complex64>,
}

impl SolutionTrace {
    pub fn lattice(&self) -> &Arc<QLattice> {
        self.phi1.lattice()
    }

    /// `(phi1, phi2)` as a spinor.
    pub fn spinor(&self) -> SpinorLatticeFn {
        SpinorLatticeFn {
            y1: self.phi1.clone(),
            y2: self.phi2.clone(),
        }
    }

    /// `(d phi1/d lambda, d phi2/d lambda)` as a spinor.
    pub fn derivative_spinor(&self) -> SpinorLatticeFn {
        SpinorLatticeFn {
            y1: self.dphi1.clone(),
            y2: self.dphi2.clone(),
        }
    }

    /// Modulus bound of `phi1(x_k)`.
    pub fn bound1(&self, k: isize) -> f64 {
        self.bound1[(k + 1) as usize]
    }

    /// Modulus bound of `phi2(x_k)`.
    pub fn bound2(&self, k: isize) -> f64 {
        self.bound2[(k + 1) as usize]
    }

    /// Largest modulus bound over the lattice divided by the largest
    /// sample modulus.
    pub fn condition(&self) -> f64 {
        let depth = self.lattice().depth() as isize;
        let mut bound = self.bound2(-1);
        let mut actual = self.phi2.at(-1).norm();
        for k in 0..=depth {
            bound = bound.max(self.bound1(k)).max(self.bound2(k));
            actual = actual
                .max(self.phi1.at(k).norm())
                .max(self.phi2.at(k).norm());
        }
        if bound == 0.0 {
            1.0
        } else {
            (bound / actual.max(f64::MIN_POSITIVE)).max(1.0)
        }
    }
}

struct Recorder {
    phi1: Vec<Complex64>,
    phi2: Vec<Complex64>,
    dphi1: Vec<Complex64>,
    dphi2: Vec<Complex64>,
    bound1: Vec<f64>,
    bound2: Vec<f64>,
    lo1: Vec<Complex64>,
    lo2: Vec<Complex64>,
}

type Wide = Complex<TwoFloat>;
type WideDual = Dual<Wide>;

fn widen(v: f64) -> Wide {
    Complex::new(TwoFloat::from(v), TwoFloat::from(0.0))
}

fn narrow(v: Wide) -> Complex64 {
    Complex64::new(f64::from(v.re), f64::from(v.im))
}

fn low_part(v: Wide) -> Complex64 {
    Complex64::new(v.re.lo(), v.im.lo())
}

fn rejoin(hi: Complex64, lo: Complex64) -> Wide {
    Complex::new(
        TwoFloat::new_add(hi.re, lo.re),
        TwoFloat::new_add(hi.im, lo.im),
    )
}

/// Final state of the recurrence: `y1(x_0)` and `y2(x_{-1})` with bounds.
struct Boundary {
    y1: WideDual,
    y2_ext: WideDual,
    b1: f64,
    b2_ext: f64,
}

/// Runs the recurrence in double-double arithmetic. The step weights
/// `x_k (1 - q)` are the same doubles the Jackson sums use, so the discrete
/// Lagrange identity holds for the computed samples to well below double
/// precision even where the samples are tiny next to their bounds.
fn propagate(
    prob: &DiracProblem,
    lambda: Complex64,
    tail: Complex64,
    mut rec: Option<&mut Recorder>,
) -> Boundary {
    let lat = &prob.lattice;
    let depth = lat.depth() as isize;
    let one_minus_q = 1.0 - lat.q().value();
    let lam = WideDual::variable(Complex::new(
        TwoFloat::new_add(lambda.re, tail.re),
        TwoFloat::new_add(lambda.im, tail.im),
    ));
    let bc = prob.bc;

    let mut y1 = WideDual::constant(widen(bc.k12));
    let mut y2 = WideDual::constant(widen(-bc.k11));
    let mut b1 = bc.k12.abs();
    let mut b2 = bc.k11.abs();
    let store = |rec: &mut Option<&mut Recorder>,
                 k: isize,
                 y1: WideDual,
                 y2: WideDual,
                 b1: f64,
                 b2: f64| {
        if let Some(r) = rec.as_deref_mut() {
            let i = (k + 1) as usize;
            r.phi1[i] = narrow(y1.v);
            r.dphi1[i] = narrow(y1.d);
            r.phi2[i] = narrow(y2.v);
            r.dphi2[i] = narrow(y2.d);
            r.lo1[i] = low_part(y1.v);
            r.lo2[i] = low_part(y2.v);
            r.bound1[i] = b1;
            r.bound2[i] = b2;
        }
    };
    store(&mut rec, depth, y1, y2, b1, b2);

    for k in (0..depth).rev() {
        let h_outer = lat.x(k + 1) * one_minus_q;
        let p = prob.p_at(k + 1);
        let y2_next = y2 - (lam - widen(p)) * y1 * TwoFloat::from(h_outer);
        let b2_next = b2 + h_outer * (lambda - p).norm() * b1;

        let h = lat.x(k) * one_minus_q;
        let r = prob.r_at(k);
        let y1_next = y1 + (lam - widen(r)) * y2_next * TwoFloat::from(h);
        let b1_next = b1 + h * (lambda - r).norm() * b2_next;

        y1 = y1_next;
        y2 = y2_next;
        b1 = b1_next;
        b2 = b2_next;
        store(&mut rec, k, y1, y2, b1, b2);
    }

    let h0 = lat.a() * one_minus_q;
    let p = prob.p_at(0);
    let y2_ext = y2 - (lam - widen(p)) * y1 * TwoFloat::from(h0);
    let b2_ext = b2 + h0 * (lambda - p).norm() * b1;
    if let Some(r) = rec {
        r.phi2[0] = narrow(y2_ext.v);
        r.dphi2[0] = narrow(y2_ext.d);
        r.lo2[0] = low_part(y2_ext.v);
        r.bound2[0] = b2_ext;
        r.phi1[0] = Complex64::new(f64::NAN, f64::NAN);
        r.dphi1[0] = Complex64::new(f64::NAN, f64::NAN);
        r.bound1[0] = f64::NAN;
    }
    Boundary {
        y1,
        y2_ext,
        b1,
        b2_ext,
    }
}

fn check_finite(values: &[Complex64], what: &str, lambda: Complex64) -> Result<()> {
    if values
        .iter()
        .skip(1)
        .any(|v| !v.re.is_finite() || !v.im.is_finite())
    {
        return Err(Error::NonFinite(format!("{what} at lambda = {lambda}")));
    }
    Ok(())
}

/// Solves the initial value problem at `lambda`.
pub fn solve_ivp(prob: &DiracProblem, lambda: Complex64) -> Result<SolutionTrace> {
    solve_ivp_split(prob, lambda, Complex64::new(0.0, 0.0))
}

/// Solves the initial value problem at `lambda + tail`, where `tail` is a
/// correction below the precision of `lambda`.
pub fn solve_ivp_split(
    prob: &DiracProblem,
    lambda: Complex64,
    tail: Complex64,
) -> Result<SolutionTrace> {
    let n = prob.lattice.len();
    let zero = Complex64::new(0.0, 0.0);
    let mut rec = Recorder {
        phi1: vec![zero; n],
        phi2: vec![zero; n],
        dphi1: vec![zero; n],
        dphi2: vec![zero; n],
        bound1: vec![0.0; n],
        bound2: vec![0.0; n],
        lo1: vec![zero; n],
        lo2: vec![zero; n],
    };
    propagate(prob, lambda, tail, Some(&mut rec));
    check_finite(&rec.phi1, "phi1", lambda)?;
    check_finite(&rec.dphi1, "d phi1", lambda)?;
    let ext_ok = |v: Complex64| v.re.is_finite() && v.im.is_finite();
    if !ext_ok(rec.phi2[0]) || !ext_ok(rec.dphi2[0]) {
        return Err(Error::NonFinite(format!("phi2(a/q) at lambda = {lambda}")));
    }
    check_finite(&rec.phi2, "phi2", lambda)?;
    check_finite(&rec.dphi2, "d phi2", lambda)?;

    let lat = &prob.lattice;
    Ok(SolutionTrace {
        lambda,
        lambda_tail: tail,
        phi1: LatticeFn::from_raw(lat, rec.phi1, false),
        phi2: LatticeFn::from_raw(lat, rec.phi2, true),
        dphi1: LatticeFn::from_raw(lat, rec.dphi1, false),
        dphi2: LatticeFn::from_raw(lat, rec.dphi2, true),
        bound1: rec.bound1,
        bound2: rec.bound2,
        lo1: rec.lo1,
        lo2: rec.lo2,
    })
}

/// `omega(lambda)`, its derivative, and the modulus bound of the terms
/// that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharValue {
    pub omega: Complex64,
    pub omega_prime: Complex64,
    /// `|k21| B1(a) + |k22| B2(a/q)` from the modulus recurrence.
    pub scale: f64,
}

impl CharValue {
    /// `scale / |omega|`, at least 1.
    pub fn condition(&self) -> f64 {
        if self.scale == 0.0 {
            1.0
        } else {
            (self.scale / self.omega.norm().max(f64::MIN_POSITIVE)).max(1.0)
        }
    }
}

/// Characteristic function `omega(lambda) = k21 phi1(a) + k22 phi2(a/q)`.
pub fn char_fn(prob: &DiracProblem, lambda: Complex64) -> Result<CharValue> {
    char_fn_split(prob, lambda, Complex64::new(0.0, 0.0))
}

/// [`char_fn`] at `lambda + tail`.
pub fn char_fn_split(prob: &DiracProblem, lambda: Complex64, tail: Complex64) -> Result<CharValue> {
    let end = propagate(prob, lambda, tail, None);
    let bc = prob.bc;
    let omega = end.y1 * TwoFloat::from(bc.k21) + end.y2_ext * TwoFloat::from(bc.k22);
    let omega = DualScalar::new(narrow(omega.v), narrow(omega.d));
    let scale = bc.k21.abs() * end.b1 + bc.k22.abs() * end.b2_ext;
    let finite = |v: Complex64| v.re.is_finite() && v.im.is_finite();
    if !finite(omega.v) || !finite(omega.d) || !scale.is_finite() {
        return Err(Error::NonFinite(format!("omega at lambda = {lambda}")));
    }
    Ok(CharValue {
        omega: omega.v,
        omega_prime: omega.d,
        scale,
    })
}

/// `omega` read off an existing trace, combined in double precision.
pub fn char_from_trace(prob: &DiracProblem, trace: &SolutionTrace) -> CharValue {
    let bc = prob.bc;
    CharValue {
        omega: trace.phi1.at(0) * bc.k21 + trace.phi2.at(-1) * bc.k22,
        omega_prime: trace.dphi1.at(0) * bc.k21 + trace.dphi2.at(-1) * bc.k22,
        scale: bc.k21.abs() * trace.bound1(0) + bc.k22.abs() * trace.bound2(-1),
    }
}

/// `W(y, z)(x_k) = y1(x_k) z2(x_{k-1}) - z1(x_k) y2(x_{k-1})` for `0 <= k <= K`.
pub fn wronskian(y: &SpinorLatticeFn, z: &SpinorLatticeFn, k: isize) -> Result<Complex64> {
    if !y.same_lattice(z) {
        return Err(Error::LatticeMismatch);
    }
    let lat = y.lattice();
    lat.check_index(k, 0, lat.depth() as isize)?;
    Ok(y.y1.get(k)? * z.y2.get(k - 1)? - z.y1.get(k)? * y.y2.get(k - 1)?)
}

/// [`wronskian`] of two traces, formed from their double-double samples.
pub fn trace_wronskian(y: &SolutionTrace, z: &SolutionTrace, k: isize) -> Result<Complex64> {
    if !y.phi1.same_lattice(&z.phi1) {
        return Err(Error::LatticeMismatch);
    }
    let lat = y.lattice();
    lat.check_index(k, 0, lat.depth() as isize)?;
    let (i, j) = ((k + 1) as usize, k as usize);
    let wide1 = |t: &SolutionTrace| rejoin(t.phi1.at(k), t.lo1[i]);
    let wide2 = |t: &SolutionTrace| rejoin(t.phi2.at(k - 1), t.lo2[j]);
    Ok(narrow(wide1(y) * wide2(z) - wide1(z) * wide2(y)))
}

/// Largest scaled defect of the discrete Lagrange identity
///
/// ```text
/// D_q { u1(x) v2(x/q) - u2(x/q) v1(x) } = (l1 - l2) { u1 v1 + u2 v2 }(x)
/// ```
///
/// over `k = 0 .. K-1`, where `u` and `v` are the traces at `l1` and `l2`.
/// At each point the defect is divided by the modulus of the terms on
/// both sides, so the result is a relative residual.
pub fn lagrange_residual(t1: &SolutionTrace, t2: &SolutionTrace) -> Result<f64> {
    if !t1.phi1.same_lattice(&t2.phi1) {
        return Err(Error::LatticeMismatch);
    }
    let lat = t1.lattice();
    let one_minus_q = 1.0 - lat.q().value();
    let dl = (t1.lambda - t2.lambda) + (t1.lambda_tail - t2.lambda_tail);
    let (u1, u2, v1, v2) = (&t1.phi1, &t1.phi2, &t2.phi1, &t2.phi2);
    let w_terms = |k: isize| (u1.at(k) * v2.at(k - 1), u2.at(k - 1) * v1.at(k));

    let mut worst: f64 = 0.0;
    for k in 0..lat.depth() as isize {
        let h = lat.x(k) * one_minus_q;
        let (a0, b0) = w_terms(k);
        let (a1, b1) = w_terms(k + 1);
        let lhs = ((a0 - b0) - (a1 - b1)) / h;
        let p1 = u1.at(k) * v1.at(k);
        let p2 = u2.at(k) * v2.at(k);
        let rhs = dl * (p1 + p2);
        let scale = (a0.norm() + b0.norm() + a1.norm() + b1.norm()) / h
            + dl.norm() * (p1.norm() + p2.norm());
        if scale > 0.0 {
            worst = worst.max((lhs - rhs).norm() / scale);
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{make_lattice, QParam};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn free_problem(a: f64, bc: BoundaryConditions, depth: Depth) -> DiracProblem {
        let lat = make_lattice(a, QParam::new(0.5).unwrap(), depth).unwrap();
        DiracProblem::new(Arc::new(lat), Coefficients::zero(), bc).unwrap()
    }

    #[test]
    fn boundary_conditions_validated() {
        assert!(BoundaryConditions::new(0.0, 0.0, 1.0, 0.0).is_err());
        assert!(BoundaryConditions::new(1.0, 0.0, 0.0, 0.0).is_err());
        assert!(BoundaryConditions::new(1.0, f64::NAN, 1.0, 0.0).is_err());
        assert!(BoundaryConditions::new(1.0, 2.0, 0.0, -1.0).is_ok());
    }

    #[test]
    fn free_problem_at_zero_is_constant() {
        let bc = BoundaryConditions::new(0.7, -1.3, 1.0, 2.0).unwrap();
        let prob = free_problem(2.0, bc, Depth::Auto);
        let t = solve_ivp(&prob, c(0.0)).unwrap();
        let depth = prob.lattice().depth() as isize;
        for k in 0..=depth {
            assert_eq!(t.phi1.get(k).unwrap(), c(-1.3));
            assert_eq!(t.phi2.get(k).unwrap(), c(-0.7));
        }
        assert_eq!(t.phi2.get(-1).unwrap(), c(-0.7));
        assert_eq!(t.phi1.get(-1), Err(Error::MissingSample(-1)));
        let w = char_fn(&prob, c(0.0)).unwrap();
        assert_eq!(w.omega, c(1.0 * -1.3 - 2.0 * 0.7));
    }

    #[test]
    fn initial_values_and_derivatives() {
        let bc = BoundaryConditions::new(2.0, 3.0, 1.0, 1.0).unwrap();
        let prob = free_problem(1.0, bc, Depth::Fixed(30));
        let t = solve_ivp(&prob, Complex64::new(1.7, 0.3)).unwrap();
        assert_eq!(t.phi1.get(30).unwrap(), c(3.0));
        assert_eq!(t.phi2.get(30).unwrap(), c(-2.0));
        assert_eq!(t.dphi1.get(30).unwrap(), c(0.0));
        assert_eq!(t.dphi2.get(30).unwrap(), c(0.0));
        // left boundary condition at the deepest point
        let lhs = t.phi1.get(30).unwrap() * bc.k11 + t.phi2.get(30).unwrap() * bc.k12;
        assert_eq!(lhs, c(0.0));
    }

    #[test]
    fn doubling_initial_data_doubles_trace() {
        let bc = BoundaryConditions::new(-1.0, 0.5, 0.0, 1.0).unwrap();
        let prob = free_problem(3.0, bc, Depth::Auto);
        let prob2 = prob.with_bc(BoundaryConditions::new(-2.0, 1.0, 0.0, 1.0).unwrap());
        let lam = c(4.2);
        let t1 = solve_ivp(&prob, lam).unwrap();
        let t2 = solve_ivp(&prob2, lam).unwrap();
        for k in -1..=prob.lattice().depth() as isize {
            assert_eq!(t2.phi2.at(k), t1.phi2.at(k) * 2.0);
            if k >= 0 {
                assert_eq!(t2.phi1.at(k), t1.phi1.at(k) * 2.0);
            }
        }
    }

    #[test]
    fn char_fn_matches_trace() {
        let bc = BoundaryConditions::new(1.0, 1.0, 0.3, 1.0).unwrap();
        let prob = free_problem(std::f64::consts::PI, bc, Depth::Auto);
        let lam = Complex64::new(2.5, -0.4);
        let w = char_fn(&prob, lam).unwrap();
        let t = solve_ivp(&prob, lam).unwrap();
        let from_trace = char_from_trace(&prob, &t);
        assert_eq!(from_trace.scale, w.scale);
        assert!((from_trace.omega - w.omega).norm() <= 1e-15 * w.scale);
        assert!((from_trace.omega_prime - w.omega_prime).norm() <= 1e-15 * w.omega_prime.norm());
    }

    #[test]
    fn wronskian_properties() {
        let bc = BoundaryConditions::new(-1.0, 0.0, 0.0, 1.0).unwrap();
        let prob = free_problem(std::f64::consts::PI, bc, Depth::Auto);
        let y = solve_ivp(&prob, c(1.3)).unwrap().spinor();
        let z = solve_ivp(&prob, c(-0.4)).unwrap().spinor();
        for k in 0..=10 {
            assert_eq!(wronskian(&y, &y, k).unwrap(), c(0.0));
            let w = wronskian(&y, &z, k).unwrap();
            let w3 = wronskian(&y.scale(c(3.0)), &z, k).unwrap();
            assert!((w3 - w * 3.0).norm() <= 1e-14 * w.norm().max(1.0));
        }
        assert!(wronskian(&y, &z, -1).is_err());
    }

    #[test]
    fn wronskian_constant_at_equal_lambda() {
        let lat = Arc::new(make_lattice(2.0, QParam::new(0.5).unwrap(), Depth::Auto).unwrap());
        let coeffs = Coefficients {
            p: FunctionSpec::parse("1 + x").unwrap(),
            r: FunctionSpec::parse("x^2 - 0.5").unwrap(),
        };
        let first = DiracProblem::new(
            Arc::clone(&lat),
            coeffs.clone(),
            BoundaryConditions::new(0.0, 1.0, 1.0, 0.0).unwrap(),
        )
        .unwrap();
        let second = first.with_bc(BoundaryConditions::new(-1.0, 0.0, 1.0, 0.0).unwrap());
        let lam = c(1.7);
        let y = solve_ivp(&first, lam).unwrap().spinor();
        let z = solve_ivp(&second, lam).unwrap().spinor();
        let w0 = wronskian(&y, &z, 0).unwrap();
        for k in 0..lat.depth() as isize {
            let w = wronskian(&y, &z, k).unwrap();
            assert!((w - w0).norm() <= 1e-10 * w0.norm(), "k = {k}: {w} vs {w0}");
        }
    }

    #[test]
    fn trace_wronskian_holds_where_samples_are_large() {
        let bc = BoundaryConditions::new(1.0, 1.0, 0.0, 1.0).unwrap();
        let prob = free_problem(std::f64::consts::PI, bc, Depth::Auto);
        let other = prob.with_bc(BoundaryConditions::new(-1.0, 1.0, 0.0, 1.0).unwrap());
        let lam = Complex64::new(14.0, 0.5);
        let (y, z) = (
            solve_ivp(&prob, lam).unwrap(),
            solve_ivp(&other, lam).unwrap(),
        );
        let depth = prob.lattice().depth() as isize;
        // initial data (1, -1) and (1, 1)
        let exact = c(2.0);
        for k in 0..=depth {
            let w = trace_wronskian(&y, &z, k).unwrap();
            assert!((w - exact).norm() <= 1e-14, "k = {k}: {w}");
        }
        let plain = wronskian(&y.spinor(), &z.spinor(), depth).unwrap();
        assert_eq!(plain, trace_wronskian(&y, &z, depth).unwrap());
    }

    #[test]
    fn lagrange_identity_equal_lambda() {
        let bc = BoundaryConditions::new(-1.0, 0.0, 0.0, 1.0).unwrap();
        let prob = free_problem(std::f64::consts::PI, bc, Depth::Auto);
        let t = solve_ivp(&prob, c(2.0)).unwrap();
        assert!(lagrange_residual(&t, &t).unwrap() <= 1e-12);
    }

    #[test]
    fn lagrange_identity_distinct_lambda() {
        let bc = BoundaryConditions::new(-1.0, 0.0, 0.0, 1.0).unwrap();
        let prob = free_problem(std::f64::consts::PI, bc, Depth::Auto);
        let t1 = solve_ivp(&prob, c(1.0)).unwrap();
        let t2 = solve_ivp(&prob, c(2.0)).unwrap();
        assert!(lagrange_residual(&t1, &t2).unwrap() <= 1e-10);
    }

    #[test]
    fn coefficient_errors() {
        let lat = Arc::new(make_lattice(1.0, QParam::new(0.5).unwrap(), Depth::Fixed(8)).unwrap());
        let bc = BoundaryConditions::new(1.0, 0.0, 1.0, 0.0).unwrap();
        let bad = Coefficients {
            p: FunctionSpec::parse("1/x").unwrap(),
            r: FunctionSpec::constant(0.0),
        };
        assert!(DiracProblem::new(Arc::clone(&lat), bad, bc).is_err());
        let bad = Coefficients {
            p: FunctionSpec::constant(0.0),
            r: FunctionSpec::parse("sqrt(x - 0.1)").unwrap(),
        };
        assert!(DiracProblem::new(lat, bad, bc).is_err());
    }

    #[test]
    fn overflow_is_reported() {
        let bc = BoundaryConditions::new(-1.0, 0.0, 0.0, 1.0).unwrap();
        let prob = free_problem(std::f64::consts::PI, bc, Depth::Auto);
        assert!(matches!(
            solve_ivp(&prob, c(1e80)),
            Err(Error::NonFinite(_))
        ));
        assert!(matches!(char_fn(&prob, c(1e80)), Err(Error::NonFinite(_))));
    }
}
