//! The transform `F(lambda) = int_0^a f^T phi(., lambda) d_q x` and its
//! reconstruction from the samples `F(lambda_n)`:
//!
//! ```text
//! F(lambda) = sum_n F(lambda_n) omega(lambda) / ((lambda - lambda_n) omega'(lambda_n))
//! ```

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::dirac::{
    char_fn, char_fn_split, solve_ivp, solve_ivp_split, DiracProblem, SolutionTrace,
};
use crate::error::{Error, Result};
use crate::funcspec::{sample_interior, FunctionSpec};
use crate::qcore::{inner_product_hq, QLattice, SpinorLatticeFn};
use crate::spectrum::{Eigenvalue, Spectrum};
use crate::sum::{CompensatedSum, ComplexSum};

/// Relative distance to a node below which the kernel takes its limit value.
pub const NODE_THRESHOLD: f64 = 1e-9;

/// The two components of a signal, as expressions or sample tables.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalSpec {
    pub f1: FunctionSpec,
    pub f2: FunctionSpec,
}

impl SignalSpec {
    pub fn new(f1: FunctionSpec, f2: FunctionSpec) -> Self {
        Self { f1, f2 }
    }

    pub fn zero() -> Self {
        Self::new(FunctionSpec::constant(0.0), FunctionSpec::constant(0.0))
    }
}

/// A signal sampled on `x_0 ..= x_K`.
#[derive(Debug, Clone)]
pub struct Signal {
    samples: SpinorLatticeFn,
}

impl Signal {
    pub fn from_spec(spec: &SignalSpec, lattice: &Arc<QLattice>) -> Result<Self> {
        let f1 = sample_interior(&spec.f1, lattice)?;
        let f2 = sample_interior(&spec.f2, lattice)?;
        for (name, f) in [("f1", &f1), ("f2", &f2)] {
            if let Some(k) = f
                .interior()
                .iter()
                .position(|v| !v.re.is_finite() || !v.im.is_finite())
            {
                return Err(Error::NonFinite(format!("{name}(x_{k})")));
            }
        }
        Self::from_spinor(SpinorLatticeFn::new(f1, f2)?)
    }

    pub fn from_spinor(samples: SpinorLatticeFn) -> Result<Self> {
        Ok(Self { samples })
    }

    pub fn samples(&self) -> &SpinorLatticeFn {
        &self.samples
    }

    /// `alpha * self + beta * other`.
    pub fn combine(&self, alpha: Complex64, other: &Signal, beta: Complex64) -> Result<Signal> {
        Ok(Signal {
            samples: self.samples.combine(alpha, &other.samples, beta)?,
        })
    }
}

/// `F` from an already computed trace.
pub fn transform_with_trace(sig: &Signal, trace: &SolutionTrace) -> Result<Complex64> {
    inner_product_hq(&sig.samples, &trace.spinor())
}

/// `F(lambda)` by direct Jackson quadrature.
pub fn forward_transform(
    prob: &DiracProblem,
    sig: &Signal,
    lambda: Complex64,
) -> Result<Complex64> {
    let trace = solve_ivp(prob, lambda)?;
    transform_with_trace(sig, &trace)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformSample {
    pub n: i32,
    pub lambda: f64,
    pub value: Complex64,
}

/// `F(lambda_n)` for every eigenvalue of a spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformSamples {
    pub entries: Vec<TransformSample>,
}

impl TransformSamples {
    pub fn get(&self, n: i32) -> Option<&TransformSample> {
        self.entries.iter().find(|s| s.n == n)
    }
}

/// Samples at the eigenvalues, reusing the stored eigenfunction traces.
pub fn transform_samples(sig: &Signal, spec: &Spectrum) -> Result<TransformSamples> {
    let entries = spec
        .eigenvalues
        .iter()
        .map(|ev| {
            Ok(TransformSample {
                n: ev.n,
                lambda: ev.lambda,
                value: transform_with_trace(sig, &ev.trace)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TransformSamples { entries })
}

fn offset(ev: &Eigenvalue, lambda: Complex64) -> Complex64 {
    (lambda - ev.lambda) - ev.lambda_tail
}

fn is_node(ev: &Eigenvalue, lambda: Complex64) -> bool {
    offset(ev, lambda).norm() <= NODE_THRESHOLD * ev.lambda.abs().max(1.0)
}

/// `omega(lambda) / ((lambda - lambda_n) omega'(lambda_n))`, or 1 within
/// the node threshold of `lambda_n`.
pub fn kernel_weight(ev: &Eigenvalue, lambda: Complex64, omega: Complex64) -> Complex64 {
    if is_node(ev, lambda) {
        return Complex64::new(1.0, 0.0);
    }
    omega / (offset(ev, lambda) * ev.omega_prime)
}

/// Eigenvalues with `|n| <= order`, by increasing `|lambda_n|`, each paired
/// with its sample.
fn truncated<'a>(
    samples: &'a TransformSamples,
    spec: &'a Spectrum,
    order: usize,
) -> Result<Vec<(&'a Eigenvalue, Complex64)>> {
    let order_i = i32::try_from(order)
        .map_err(|_| Error::InvalidParameter("truncation order too large".into()))?;
    let mut terms = Vec::new();
    for n in -order_i..=order_i {
        let ev = spec.get(n);
        if n == 0 && ev.is_none() {
            continue;
        }
        let missing = || Error::InsufficientSamples {
            requested: order,
            missing: n,
        };
        let ev = ev.ok_or_else(missing)?;
        let sample = samples.get(n).ok_or_else(missing)?;
        terms.push((ev, sample.value));
    }
    terms.sort_by(|a, b| a.0.lambda.abs().total_cmp(&b.0.lambda.abs()));
    Ok(terms)
}

/// Truncated sampling series `sum_{|n| <= order} F(lambda_n) w_n(lambda)`.
pub fn reconstruct(
    samples: &TransformSamples,
    spec: &Spectrum,
    prob: &DiracProblem,
    lambda: Complex64,
    order: usize,
) -> Result<Complex64> {
    let terms = truncated(samples, spec, order)?;
    if let Some((_, value)) = terms.iter().find(|(ev, _)| is_node(ev, lambda)) {
        return Ok(*value);
    }
    let omega = char_fn(prob, lambda)?.omega;
    Ok(terms
        .iter()
        .map(|(ev, value)| *value * kernel_weight(ev, lambda, omega))
        .collect::<ComplexSum>()
        .value())
}

/// The full truncated series at the eigenvalue `ev`, each kernel taken
/// at `lambda_n + tail` rather than short-circuited, next to the transform
/// computed directly there.
pub fn series_at_eigenvalue(
    samples: &TransformSamples,
    spec: &Spectrum,
    prob: &DiracProblem,
    sig: &Signal,
    ev: &Eigenvalue,
    order: usize,
) -> Result<(Complex64, Complex64)> {
    let terms = truncated(samples, spec, order)?;
    let lambda = Complex64::new(ev.lambda, 0.0);
    let tail = Complex64::new(ev.lambda_tail, 0.0);
    let omega = char_fn_split(prob, lambda, tail)?.omega;
    let series = terms
        .iter()
        .map(|(other, value)| *value * kernel_weight(other, lambda, omega))
        .collect::<ComplexSum>()
        .value();
    let direct = transform_with_trace(sig, &solve_ivp_split(prob, lambda, tail)?)?;
    Ok((series, direct))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionReport {
    pub grid: Vec<Complex64>,
    pub f_true: Vec<Complex64>,
    pub f_rec: Vec<Complex64>,
    pub abs_err: Vec<f64>,
    pub order: usize,
    pub sup_err: f64,
}

/// Direct transform and truncated reconstruction on every grid point.
pub fn reconstruction_report(
    prob: &DiracProblem,
    sig: &Signal,
    spec: &Spectrum,
    grid: &[Complex64],
    order: usize,
) -> Result<ReconstructionReport> {
    let samples = transform_samples(sig, spec)?;
    truncated(&samples, spec, order)?;
    let rows = grid
        .par_iter()
        .map(|&lambda| {
            let f_true = forward_transform(prob, sig, lambda)?;
            let f_rec = reconstruct(&samples, spec, prob, lambda, order)?;
            Ok((f_true, f_rec))
        })
        .collect::<Result<Vec<_>>>()?;
    let f_true: Vec<_> = rows.iter().map(|r| r.0).collect();
    let f_rec: Vec<_> = rows.iter().map(|r| r.1).collect();
    let abs_err: Vec<f64> = rows.iter().map(|(t, r)| (t - r).norm()).collect();
    let sup_err = abs_err.iter().copied().fold(0.0, f64::max);
    Ok(ReconstructionReport {
        grid: grid.to_vec(),
        f_true,
        f_rec,
        abs_err,
        order,
        sup_err,
    })
}

/// `phi_hat_n(lambda) = int_0^a phi_n^T phi(., lambda) d_q x`.
pub fn fourier_coefficient(ev: &Eigenvalue, trace: &SolutionTrace) -> Result<Complex64> {
    inner_product_hq(&ev.trace.spinor(), &trace.spinor())
}

/// Partial sums of `sum |F_n w_n(lambda)|` next to the Cauchy-Schwarz bound
/// `(sum |F_n|^2 / ||phi_n||^2)^{1/2} (sum |phi_hat_n|^2 / ||phi_n||^2)^{1/2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceWitness {
    pub partial_sums: Vec<f64>,
    pub bound: f64,
}

pub fn convergence_witness(
    samples: &TransformSamples,
    spec: &Spectrum,
    prob: &DiracProblem,
    lambda: Complex64,
    order: usize,
) -> Result<ConvergenceWitness> {
    let terms = truncated(samples, spec, order)?;
    let trace = solve_ivp(prob, lambda)?;
    let omega = char_fn(prob, lambda)?.omega;
    let mut running = CompensatedSum::new();
    let mut partial_sums = Vec::with_capacity(terms.len());
    let mut energy_f = CompensatedSum::new();
    let mut energy_phi = CompensatedSum::new();
    for (ev, value) in &terms {
        running.add((*value * kernel_weight(ev, lambda, omega)).norm());
        partial_sums.push(running.value());
        energy_f.add(value.norm_sqr() / ev.norm_sq);
        energy_phi.add(fourier_coefficient(ev, &trace)?.norm_sqr() / ev.norm_sq);
    }
    Ok(ConvergenceWitness {
        partial_sums,
        bound: energy_f.value().sqrt() * energy_phi.value().sqrt(),
    })
}
