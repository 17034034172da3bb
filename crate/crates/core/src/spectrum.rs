//! Eigenvalues, norming constants and orthogonality diagnostics.
//!
//! The real zeros of `omega` are bracketed on a grid that is linear on
//! `[0, q^{1/2}/((1-q)a)]` and geometric beyond with ratio `q^{-1/8}`,
//! on both signs, then polished by safeguarded Newton steps driven by the
//! dual derivative.

use num_complex::Complex64;
use rayon::prelude::*;

use twofloat::TwoFloat;

use crate::dirac::{
    char_fn, char_fn_split, char_from_trace, solve_ivp_split, DiracProblem, SolutionTrace,
    TRACE_CONDITION_LIMIT,
};
use crate::error::{Error, Result};
use crate::qcore::inner_product_hq;
use crate::qtrig::CONDITION_LIMIT;

/// Points on the linear part of the scan.
pub const LINEAR_POINTS: usize = 64;
/// Relative tolerance of the polished eigenvalues.
pub const ROOT_TOLERANCE: f64 = 1e-12;
/// Smallest admissible `|omega'| / scale` at a polished zero.
pub const SIMPLICITY_TOLERANCE: f64 = 1e-13;
/// Largest admissible `|omega| / local scale` at a polished zero.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;

const MAX_SCAN_POINTS: usize = 20_000;
const MAX_POLISH_STEPS: usize = 200;

#[derive(Debug, Clone)]
pub struct Eigenvalue {
    /// Signed index: `1, 2, ...` upward from zero, `-1, -2, ...` downward.
    pub n: i32,
    pub lambda: f64,
    /// Correction below the precision of `lambda`; the trace is computed at
    /// `lambda + lambda_tail`.
    pub lambda_tail: f64,
    pub omega_prime: f64,
    /// Direct Jackson sum of `phi1^2 + phi2^2`.
    pub norm_sq: f64,
    /// Sensitivity of the zero to rounding in `omega`, relative to `|lambda|`.
    pub root_condition: f64,
    /// Cancellation suffered by the eigenfunction samples.
    pub trace_condition: f64,
    /// Modulus bound of the terms that form `omega` at the zero.
    pub scale: f64,
    pub trace: SolutionTrace,
}

impl Eigenvalue {
    /// The larger of the two condition numbers.
    pub fn condition(&self) -> f64 {
        self.root_condition.max(self.trace_condition)
    }
}

/// Why the scan on one side stopped before the requested count.
#[derive(Debug, Clone, PartialEq)]
pub struct Shortfall {
    /// `+1` or `-1`.
    pub sign: i32,
    /// Eigenvalues certified on that side.
    pub certified: usize,
    pub reason: Error,
}

#[derive(Debug, Clone)]
pub struct Spectrum {
    /// Ascending in `lambda`.
    pub eigenvalues: Vec<Eigenvalue>,
    /// Largest `|lambda|` reached by the scan.
    pub search_bound: f64,
    pub requested: usize,
    pub shortfalls: Vec<Shortfall>,
}

impl Spectrum {
    pub fn get(&self, n: i32) -> Option<&Eigenvalue> {
        self.eigenvalues.iter().find(|e| e.n == n)
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn is_complete(&self) -> bool {
        self.shortfalls.is_empty()
    }

    /// Number of certified eigenvalues with positive index.
    pub fn positive_count(&self) -> usize {
        self.eigenvalues.iter().filter(|e| e.n > 0).count()
    }

    /// Number of certified eigenvalues with negative index.
    pub fn negative_count(&self) -> usize {
        self.eigenvalues.iter().filter(|e| e.n < 0).count()
    }

    /// Largest `N` such that every index `|n| <= N` is present (zero
    /// excepted when there is no zero eigenvalue).
    pub fn symmetric_order(&self) -> usize {
        self.positive_count().min(self.negative_count())
    }
}

/// Sign-change bracket on one side of the origin, in `|lambda|`.
#[derive(Debug, Clone, Copy)]
struct Bracket {
    lo: f64,
    hi: f64,
    omega_lo: f64,
    omega_hi: f64,
}

fn omega_real(prob: &DiracProblem, lambda: f64) -> Result<f64> {
    Ok(char_fn(prob, Complex64::new(lambda, 0.0))?.omega.re)
}

/// Right end of the linear part of the scan.
pub fn linear_scan_end(prob: &DiracProblem) -> f64 {
    let lat = prob.lattice();
    let q = lat.q().value();
    q.sqrt() / ((1.0 - q) * lat.a())
}

/// Scans `t -> omega(sign * t)` upward from `start` until `count` sign
/// changes are bracketed. Returns the brackets, the reach of the scan and
/// the error that stopped it early, if any.
fn scan_side(
    prob: &DiracProblem,
    sign: f64,
    count: usize,
    start: f64,
) -> (Vec<Bracket>, f64, Option<Error>) {
    let end = linear_scan_end(prob);
    let q = prob.lattice().q().value();
    let ratio = q.powf(-0.125);
    let step = end / (LINEAR_POINTS - 1) as f64;

    let mut brackets = Vec::with_capacity(count);
    let mut lo = start;
    let mut omega_lo = match omega_real(prob, sign * lo) {
        Ok(w) => w,
        Err(e) => return (brackets, lo, Some(e)),
    };
    let mut i = (start / step).floor() as usize;
    let mut geometric = end;
    for _ in 0..MAX_SCAN_POINTS {
        let hi = if i + 1 < LINEAR_POINTS {
            i += 1;
            step * i as f64
        } else {
            geometric *= ratio;
            geometric
        };
        if hi <= lo {
            continue;
        }
        let omega_hi = match omega_real(prob, sign * hi) {
            Ok(w) => w,
            Err(e) => return (brackets, lo, Some(e)),
        };
        if omega_hi == 0.0 || omega_hi.signum() != omega_lo.signum() {
            brackets.push(Bracket {
                lo,
                hi,
                omega_lo,
                omega_hi,
            });
            if brackets.len() == count {
                return (brackets, hi, None);
            }
        }
        if omega_hi == 0.0 {
            // move the reference sign just past an exact grid zero
            let nudge = hi * (1.0 + 1e-6);
            match omega_real(prob, sign * nudge) {
                Ok(w) => {
                    lo = nudge;
                    omega_lo = w;
                }
                Err(e) => return (brackets, hi, Some(e)),
            }
            continue;
        }
        lo = hi;
        omega_lo = omega_hi;
    }
    (
        brackets,
        lo,
        Some(Error::NonFinite("scan exhausted its point budget".into())),
    )
}

/// Bisection and safeguarded Newton steps on `omega(sign * t)` in double
/// precision, then Newton steps on a double-double `t`.
fn polish(prob: &DiracProblem, sign: f64, b: Bracket) -> Result<(f64, f64)> {
    let t = polish_double(prob, sign, b)?;
    let mut best = (TwoFloat::from(t), f64::INFINITY);
    let mut t = best.0;
    for _ in 0..8 {
        let (hi, lo) = (t.hi(), t.lo());
        let cv = char_fn_split(
            prob,
            Complex64::new(sign * hi, 0.0),
            Complex64::new(sign * lo, 0.0),
        )?;
        let w = cv.omega.re;
        if w.abs() >= best.1 {
            break;
        }
        best = (t, w.abs());
        if w == 0.0 {
            break;
        }
        let step = -w / (sign * cv.omega_prime.re);
        if !step.is_finite() {
            break;
        }
        t += step;
    }
    Ok((best.0.hi(), best.0.lo()))
}

fn polish_double(prob: &DiracProblem, sign: f64, b: Bracket) -> Result<f64> {
    if b.omega_hi == 0.0 {
        return Ok(b.hi);
    }
    let (mut lo, mut hi) = (b.lo, b.hi);
    let lo_sign = b.omega_lo.signum();
    // coarse bisection to a short bracket
    for _ in 0..30 {
        if hi - lo <= 1e-4 * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let w = omega_real(prob, sign * mid)?;
        if w == 0.0 {
            return Ok(mid);
        }
        if w.signum() == lo_sign {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut t = 0.5 * (lo + hi);
    let mut best = (t, f64::INFINITY);
    let mut stalled = 0;
    for _ in 0..MAX_POLISH_STEPS {
        let cv = char_fn(prob, Complex64::new(sign * t, 0.0))?;
        let w = cv.omega.re;
        if w == 0.0 {
            return Ok(t);
        }
        if w.abs() < best.1 {
            best = (t, w.abs());
            stalled = 0;
        } else {
            // rounding noise floor reached
            stalled += 1;
            if stalled >= 2 {
                break;
            }
        }
        if w.signum() == lo_sign {
            lo = t;
        } else {
            hi = t;
        }
        // omega as a function of t has derivative sign * omega'
        let slope = sign * cv.omega_prime.re;
        let mut next = t - w / slope;
        if !next.is_finite() || next <= lo || next >= hi {
            next = 0.5 * (lo + hi);
        }
        let moved = (next - t).abs();
        t = next;
        if moved <= 2.0 * f64::EPSILON * t.abs() || hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
    }
    Ok(best.0)
}

/// Builds and validates the eigenvalue at a polished zero.
fn certify_zero(
    prob: &DiracProblem,
    n: i32,
    (lambda, lambda_tail): (f64, f64),
    local_scale: f64,
) -> Result<Eigenvalue> {
    let trace = solve_ivp_split(
        prob,
        Complex64::new(lambda, 0.0),
        Complex64::new(lambda_tail, 0.0),
    )?;
    let cv = char_from_trace(prob, &trace);
    let omega_prime = cv.omega_prime.re;
    if omega_prime.abs() < SIMPLICITY_TOLERANCE * cv.scale {
        return Err(Error::MissedZero {
            lambda,
            omega_prime,
        });
    }
    let reference = lambda.abs().max(linear_scan_end(prob));
    let root_condition = (cv.scale / (reference * omega_prime.abs())).max(1.0);
    let trace_condition = trace.condition();
    if root_condition.is_nan() || root_condition > CONDITION_LIMIT {
        return Err(Error::Cancellation {
            condition: root_condition,
            limit: CONDITION_LIMIT,
        });
    }
    if trace_condition.is_nan() || trace_condition > TRACE_CONDITION_LIMIT {
        return Err(Error::Cancellation {
            condition: trace_condition,
            limit: TRACE_CONDITION_LIMIT,
        });
    }
    if cv.omega.re.abs() > RESIDUAL_TOLERANCE * local_scale.max(f64::MIN_POSITIVE) {
        return Err(Error::Cancellation {
            condition: cv.omega.re.abs() / local_scale,
            limit: RESIDUAL_TOLERANCE,
        });
    }
    let norm_sq = norm_sq_direct(&trace);
    if norm_sq.is_nan() || norm_sq <= 0.0 {
        return Err(Error::NegativeNorm { n, value: norm_sq });
    }
    Ok(Eigenvalue {
        n,
        lambda,
        lambda_tail,
        omega_prime,
        norm_sq,
        root_condition,
        trace_condition,
        scale: cv.scale,
        trace,
    })
}

/// Refines the brackets of one side in parallel and keeps the leading run
/// of certified eigenvalues.
fn refine_side(
    prob: &DiracProblem,
    sign: f64,
    brackets: &[Bracket],
) -> (Vec<Eigenvalue>, Option<Error>) {
    let results: Vec<Result<Eigenvalue>> = brackets
        .par_iter()
        .enumerate()
        .map(|(i, b)| {
            let (hi, lo) = polish(prob, sign, *b)?;
            let n = (i as i32 + 1) * sign as i32;
            let local = b.omega_lo.abs().max(b.omega_hi.abs());
            certify_zero(prob, n, (sign * hi, sign * lo), local)
        })
        .collect();
    let mut out = Vec::with_capacity(results.len());
    for r in results {
        match r {
            Ok(ev) => out.push(ev),
            Err(e) => return (out, Some(e)),
        }
    }
    (out, None)
}

/// Locates up to `count_per_sign` eigenvalues on each side of the origin.
///
/// Eigenvalues that cannot be certified end the search on their side; the
/// spectrum then records a [`Shortfall`] instead of failing.
pub fn scan_eigenvalues(prob: &DiracProblem, count_per_sign: usize) -> Result<Spectrum> {
    if count_per_sign == 0 {
        return Err(Error::InvalidParameter(
            "count_per_sign must be at least 1".into(),
        ));
    }
    let at_zero = char_fn(prob, Complex64::new(0.0, 0.0))?;
    let mut eigenvalues = Vec::new();
    let mut shortfalls = Vec::new();
    let mut start = 0.0;
    if at_zero.omega.norm() <= RESIDUAL_TOLERANCE * 1e-4 * at_zero.scale {
        eigenvalues.push(certify_zero(prob, 0, (0.0, 0.0), at_zero.scale)?);
        start = linear_scan_end(prob) / (LINEAR_POINTS - 1) as f64;
    }

    let mut search_bound: f64 = 0.0;
    for sign in [1.0, -1.0] {
        let (brackets, reach, scan_err) = scan_side(prob, sign, count_per_sign, start);
        search_bound = search_bound.max(reach);
        let (found, refine_err) = refine_side(prob, sign, &brackets);
        let certified = found.len();
        eigenvalues.extend(found);
        if let Some(reason) = refine_err.or(scan_err) {
            shortfalls.push(Shortfall {
                sign: sign as i32,
                certified,
                reason,
            });
        }
    }
    eigenvalues.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
    Ok(Spectrum {
        eigenvalues,
        search_bound,
        requested: count_per_sign,
        shortfalls,
    })
}

/// Like [`scan_eigenvalues`] but fails unless every requested eigenvalue
/// was certified.
pub fn find_eigenvalues(prob: &DiracProblem, count_per_sign: usize) -> Result<Spectrum> {
    let spec = scan_eigenvalues(prob, count_per_sign)?;
    match spec.shortfalls.first() {
        None => Ok(spec),
        Some(s) => Err(s.reason.clone()),
    }
}

/// `||phi||^2` as the Jackson sum of `phi1^2 + phi2^2` over `x_0 ..= x_K`.
pub fn norm_sq_direct(trace: &SolutionTrace) -> f64 {
    inner_product_hq(&trace.spinor(), &trace.spinor())
        .map(|v| v.re)
        .unwrap_or(f64::NAN)
}

/// `||phi_n||^2` from boundary data: `-omega' phi1(a) / k22` when
/// `|k22| >= |k21|`, else `omega' phi2(a/q) / k21`.
///
/// Fails with `Cancellation` when the boundary sample used lost more than
/// the accepted share of its digits.
pub fn norm_sq_boundary(prob: &DiracProblem, ev: &Eigenvalue) -> Result<f64> {
    let bc = prob.bc();
    let t = &ev.trace;
    let (sample, bound, denom) = if bc.k22.abs() >= bc.k21.abs() {
        (t.phi1.get(0)?.re, t.bound1(0), -bc.k22)
    } else {
        (t.phi2.get(-1)?.re, t.bound2(-1), bc.k21)
    };
    let condition = (bound / sample.abs().max(f64::MIN_POSITIVE)).max(1.0);
    if condition > NORM_CONDITION_LIMIT {
        return Err(Error::Cancellation {
            condition,
            limit: NORM_CONDITION_LIMIT,
        });
    }
    let value = ev.omega_prime * sample / denom;
    if value.is_nan() || value <= 0.0 {
        return Err(Error::NegativeNorm { n: ev.n, value });
    }
    Ok(value)
}

/// Largest cancellation accepted in the boundary sample of
/// [`norm_sq_boundary`].
pub const NORM_CONDITION_LIMIT: f64 = TRACE_CONDITION_LIMIT;

/// Normalised Gram matrix `<phi_n, phi_m> / (||phi_n|| ||phi_m||)` in the
/// order of `spec.eigenvalues`.
pub fn gram_matrix(spec: &Spectrum) -> Result<Vec<Vec<f64>>> {
    let evs = &spec.eigenvalues;
    let spinors: Vec<_> = evs.iter().map(|e| e.trace.spinor()).collect();
    let mut g = vec![vec![0.0; evs.len()]; evs.len()];
    for i in 0..evs.len() {
        g[i][i] = 1.0;
        for j in 0..i {
            let ip = inner_product_hq(&spinors[i], &spinors[j])?.re;
            let v = ip / (evs[i].norm_sq * evs[j].norm_sq).sqrt();
            g[i][j] = v;
            g[j][i] = v;
        }
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dirac::{BoundaryConditions, Coefficients};
    use crate::qcore::{make_lattice, Depth, QParam};
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn problem(bc: (f64, f64, f64, f64)) -> DiracProblem {
        let q = QParam::new(0.5).unwrap();
        let lat = make_lattice(PI, q, Depth::for_tolerance(q, 1e-30)).unwrap();
        let bc = BoundaryConditions::new(bc.0, bc.1, bc.2, bc.3).unwrap();
        DiracProblem::new(Arc::new(lat), Coefficients::zero(), bc).unwrap()
    }

    #[test]
    fn example_one_low_eigenvalues() {
        let spec = find_eigenvalues(&problem((-1.0, 0.0, 0.0, 1.0)), 4).unwrap();
        assert_eq!(spec.len(), 8);
        let expected = [
            0.417312463591465,
            1.25796222205519,
            2.54640357334872,
            5.09295815932203,
        ];
        for (i, &lam) in expected.iter().enumerate() {
            let n = i as i32 + 1;
            let ev = spec.get(n).unwrap();
            assert!((ev.lambda - lam).abs() <= 1e-12 * lam, "{n}: {}", ev.lambda);
            let mirror = spec.get(-n).unwrap();
            assert!((mirror.lambda + ev.lambda).abs() <= 1e-10 * lam);
        }
        assert!(spec
            .eigenvalues
            .windows(2)
            .all(|w| w[0].lambda < w[1].lambda));
    }

    #[test]
    fn zero_eigenvalue_gets_index_zero() {
        // y2(0) = 0 and y2(a/q) = 0: constants (1, 0) solve at lambda = 0
        let spec = find_eigenvalues(&problem((0.0, 1.0, 0.0, 1.0)), 2).unwrap();
        let ev0 = spec.get(0).unwrap();
        assert_eq!(ev0.lambda, 0.0);
        assert!(spec.get(1).unwrap().lambda > 0.0);
        assert!(spec.get(-1).unwrap().lambda < 0.0);
        assert_eq!(spec.len(), 5);
    }

    #[test]
    fn boundary_norm_matches_direct() {
        let prob = problem((-1.0, 0.0, 0.0, 1.0));
        let spec = find_eigenvalues(&prob, 3).unwrap();
        for ev in &spec.eigenvalues {
            let b = norm_sq_boundary(&prob, ev).unwrap();
            assert!(
                (b - ev.norm_sq).abs() <= 1e-8 * ev.norm_sq,
                "{} {b} {}",
                ev.n,
                ev.norm_sq
            );
        }
    }

    #[test]
    fn gram_is_symmetric_with_unit_diagonal() {
        let spec = find_eigenvalues(&problem((0.0, 1.0, 1.0, 0.0)), 3).unwrap();
        let g = gram_matrix(&spec).unwrap();
        for (i, row) in g.iter().enumerate() {
            assert_eq!(row[i], 1.0);
            for (j, v) in row.iter().enumerate() {
                assert_eq!(*v, g[j][i]);
                if i != j {
                    assert!(v.abs() <= 1e-9);
                }
            }
        }
    }

    #[test]
    fn zero_count_rejected() {
        assert!(scan_eigenvalues(&problem((-1.0, 0.0, 0.0, 1.0)), 0).is_err());
    }
}
