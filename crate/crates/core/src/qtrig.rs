//! Basic q-trigonometric functions `cos(z; q)` and `sin(z; q)`.
//!
//! ```text
//! cos(z; q) = sum_n (-1)^n q^{n^2}     (z(1-q))^{2n}   / (q;q)_{2n}
//! sin(z; q) = sum_n (-1)^n q^{n(n+1)} (z(1-q))^{2n+1} / (q;q)_{2n+1}
//! ```
//!
//! Both are entire in `z`. For large `|z|` the partial terms grow far
//! beyond the value of the sum, so every evaluation reports the largest
//! term it met and the resulting condition number.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qcore::QParam;
use crate::sum::ComplexSum;

/// Largest `max_term / |value|` accepted as a certified evaluation.
pub const CONDITION_LIMIT: f64 = 1e12;

const MIN_TERMS: usize = 5;
const MAX_TERMS: usize = 100_000;
const TERM_TOLERANCE: f64 = 1e-18;

/// Relative width at which zero bisection stops.
pub const ZERO_TOLERANCE: f64 = 1e-13;

/// Number of geometric bracket expansions tried by [`trig_zero`].
pub const MAX_EXPANSIONS: usize = 4;

/// A summed series together with its cancellation diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesEval {
    pub value: Complex64,
    pub terms_used: usize,
    /// Largest modulus among the partial terms.
    pub max_term: f64,
    /// `max_term / max(|value|, tiny)`, never below 1.
    pub condition: f64,
}

impl SeriesEval {
    /// Fails with `Cancellation` when the condition exceeds [`CONDITION_LIMIT`].
    pub fn certify(self) -> Result<Self> {
        if !self.value.re.is_finite() || !self.value.im.is_finite() || !self.max_term.is_finite() {
            return Err(Error::NonFinite("q-trigonometric series overflowed".into()));
        }
        if self.condition > CONDITION_LIMIT {
            return Err(Error::Cancellation {
                condition: self.condition,
                limit: CONDITION_LIMIT,
            });
        }
        Ok(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TrigKind {
    Cos,
    Sin,
}

/// Sums the series without the cancellation guard.
pub fn q_trig_series(kind: TrigKind, z: Complex64, q: QParam) -> SeriesEval {
    let qv = q.value();
    let w = z * (1.0 - qv);
    let w2 = w * w;
    let mut term = match kind {
        TrigKind::Cos => Complex64::new(1.0, 0.0),
        TrigKind::Sin => w / (1.0 - qv),
    };
    // q^{2n-1} for cos, q^{2n} for sin, updated by q^2 per step.
    let mut qpow = match kind {
        TrigKind::Cos => qv,
        TrigKind::Sin => qv * qv,
    };
    let mut acc = ComplexSum::new();
    acc.add(term);
    let mut max_term = term.norm();
    let mut terms_used = 1;
    while terms_used < MAX_TERMS {
        let (lo, hi) = (1.0 - qpow, 1.0 - qpow * qv);
        term = -term * w2 * qpow / (lo * hi);
        qpow *= qv * qv;
        acc.add(term);
        terms_used += 1;
        let modulus = term.norm();
        if modulus > max_term {
            max_term = modulus;
        }
        if !modulus.is_finite() {
            break;
        }
        if terms_used >= MIN_TERMS && modulus <= TERM_TOLERANCE * acc.value().norm().max(1.0) {
            break;
        }
    }
    let value = acc.value();
    let condition = if max_term == 0.0 {
        1.0
    } else {
        (max_term / value.norm().max(f64::MIN_POSITIVE)).max(1.0)
    };
    SeriesEval {
        value,
        terms_used,
        max_term,
        condition,
    }
}

/// `cos(z; q)` with the cancellation guard.
pub fn q_cos(z: Complex64, q: QParam) -> Result<SeriesEval> {
    q_trig_series(TrigKind::Cos, z, q).certify()
}

/// `sin(z; q)` with the cancellation guard.
pub fn q_sin(z: Complex64, q: QParam) -> Result<SeriesEval> {
    q_trig_series(TrigKind::Sin, z, q).certify()
}

/// Real-argument convenience returning the real part of the guarded value.
pub fn q_cos_real(x: f64, q: QParam) -> Result<f64> {
    Ok(q_cos(Complex64::new(x, 0.0), q)?.value.re)
}

/// Real-argument convenience returning the real part of the guarded value.
pub fn q_sin_real(x: f64, q: QParam) -> Result<f64> {
    Ok(q_sin(Complex64::new(x, 0.0), q)?.value.re)
}

/// Which closed-form zero asymptotics are known to hold for every `m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ZeroAsymptotics {
    /// `q^3 < (1 - q^2)^2`: cosine zeros follow the asymptotic form.
    pub cos_uniform: bool,
    /// `q < (1 - q^2)^2`: sine zeros follow the asymptotic form.
    pub sin_uniform: bool,
}

pub fn zero_asymptotics(q: QParam) -> ZeroAsymptotics {
    let q = q.value();
    let bound = (1.0 - q * q).powi(2);
    ZeroAsymptotics {
        cos_uniform: q.powi(3) < bound,
        sin_uniform: q < bound,
    }
}

/// Asymptotic location of the m-th positive zero with the correction
/// exponent set to zero.
pub fn asymptotic_zero(m: usize, kind: TrigKind, q: QParam) -> f64 {
    let qv = q.value();
    let exponent = match kind {
        TrigKind::Cos => -(m as f64) + 0.5,
        TrigKind::Sin => -(m as f64),
    };
    qv.powf(exponent) / (1.0 - qv)
}

fn real_value(kind: TrigKind, x: f64, q: QParam) -> SeriesEval {
    q_trig_series(kind, Complex64::new(x, 0.0), q)
}

/// The m-th positive zero of `cos(.; q)` or `sin(.; q)` (the zero of the
/// sine at the origin is not counted).
///
/// Sign changes are counted upward from the origin on a grid that is
/// linear near zero and geometric beyond, so the index is exact whatever
/// the correction exponent of the asymptotic form. The asymptotic value
/// only bounds the search: the scan stops at `seed * q^{-1/2}` and is
/// widened by `q^{-1/2}` up to [`MAX_EXPANSIONS`] times.
pub fn trig_zero(m: usize, kind: TrigKind, q: QParam) -> Result<f64> {
    if m == 0 {
        return Err(Error::InvalidParameter("zero index m starts at 1".into()));
    }
    let qv = q.value();
    let seed = asymptotic_zero(m, kind, q);
    let linear_end = asymptotic_zero(1, TrigKind::Cos, q) * qv.sqrt();
    let ratio = qv.powf(-1.0 / 16.0);
    let linear_points = 64;

    let mut grid = (1..linear_points).map(|i| linear_end * i as f64 / (linear_points - 1) as f64);
    let mut geometric = linear_end;
    let mut next_point = move || {
        grid.next().unwrap_or_else(|| {
            geometric *= ratio;
            geometric
        })
    };

    // Only the sign matters here, and the value is tiny next to the
    // largest term whenever a grid point lands close to a zero.
    let sample = |x: f64| -> Result<f64> {
        let eval = real_value(kind, x, q);
        if !eval.value.re.is_finite() || !eval.max_term.is_finite() {
            return Err(Error::NonFinite(format!("q-trigonometric series at {x}")));
        }
        Ok(eval.value.re)
    };

    let mut found = 0usize;
    let mut lo = 0.0;
    let mut f_lo = match kind {
        TrigKind::Cos => 1.0,
        // sin(x; q) > 0 just right of the origin
        TrigKind::Sin => 1.0,
    };
    for expansion in 0..=MAX_EXPANSIONS {
        let limit = seed * qv.powf(-0.5 * (expansion + 1) as f64);
        while lo < limit {
            let hi = next_point();
            let f_hi = sample(hi)?;
            if f_hi == 0.0 {
                found += 1;
                if found == m {
                    return Ok(hi);
                }
                // step past the exact zero and keep the sign of the next sample
                let after = next_point();
                let f_after = sample(after)?;
                lo = after;
                f_lo = f_after;
                continue;
            }
            if f_hi.signum() != f_lo.signum() {
                found += 1;
                if found == m {
                    return Ok(bisect_zero(kind, q, lo, hi, f_lo));
                }
            }
            lo = hi;
            f_lo = f_hi;
        }
    }
    Err(Error::NoBracket {
        m,
        expansions: MAX_EXPANSIONS,
    })
}

fn bisect_zero(kind: TrigKind, q: QParam, mut lo: f64, mut hi: f64, f_lo: f64) -> f64 {
    let lo_sign = f_lo.signum();
    let mut best = (lo, f_lo.abs());
    while hi - lo > ZERO_TOLERANCE * 0.5 * (lo + hi) {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = real_value(kind, mid, q).value.re;
        if f_mid.abs() < best.1 {
            best = (mid, f_mid.abs());
        }
        if f_mid == 0.0 {
            return mid;
        }
        if f_mid.signum() == lo_sign {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let f_hi = real_value(kind, hi, q).value.re.abs();
    if f_hi < best.1 {
        best = (hi, f_hi);
    }
    best.0
}
