//! Independent reference implementations for the integration tests.
#![allow(dead_code)]

use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use qdirac::presets::Preset;
use qdirac::qtrig::TrigKind;

/// Fractional bits of the fixed-point oracle.
pub const FRAC_BITS: u32 = 512;

/// Signed fixed-point number `raw / 2^FRAC_BITS`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fixed(pub BigInt);

impl Fixed {
    pub fn zero() -> Self {
        Fixed(BigInt::zero())
    }

    pub fn one() -> Self {
        Fixed(BigInt::from(1) << FRAC_BITS)
    }

    /// Exact for every finite `v` not below `2^-FRAC_BITS` in magnitude.
    pub fn from_f64(v: f64) -> Self {
        assert!(v.is_finite());
        if v == 0.0 {
            return Self::zero();
        }
        let bits = v.to_bits();
        let negative = bits >> 63 == 1;
        let exp_bits = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (mantissa, exp) = if exp_bits == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), exp_bits - 1075)
        };
        let shift = exp + FRAC_BITS as i64;
        let m = BigInt::from(mantissa);
        let raw = if shift >= 0 {
            m << shift as usize
        } else {
            m >> (-shift) as usize
        };
        Fixed(if negative { -raw } else { raw })
    }

    pub fn to_f64(&self) -> f64 {
        // keep 64 leading bits so the conversion rounds once
        let bits = self.0.bits() as i64;
        let drop = (bits - 64).max(0);
        let top = (&self.0 >> drop as usize).to_f64().unwrap();
        top * 2f64.powi((drop - FRAC_BITS as i64) as i32)
    }

    pub fn div(&self, other: &Fixed) -> Fixed {
        Fixed((&self.0 << FRAC_BITS) / &other.0)
    }

    pub fn sqrt(&self) -> Fixed {
        assert!(self.0 >= BigInt::zero());
        Fixed((&self.0 << FRAC_BITS).sqrt())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
}

impl Add for &Fixed {
    type Output = Fixed;
    fn add(self, o: &Fixed) -> Fixed {
        Fixed(&self.0 + &o.0)
    }
}

impl Sub for &Fixed {
    type Output = Fixed;
    fn sub(self, o: &Fixed) -> Fixed {
        Fixed(&self.0 - &o.0)
    }
}

impl Mul for &Fixed {
    type Output = Fixed;
    fn mul(self, o: &Fixed) -> Fixed {
        Fixed((&self.0 * &o.0) >> FRAC_BITS)
    }
}

impl Neg for &Fixed {
    type Output = Fixed;
    fn neg(self) -> Fixed {
        Fixed(-&self.0)
    }
}

/// `cos(z; q)` or `sin(z; q)` summed in fixed point.
///
/// Consecutive terms differ by `-q^m w^2 / ((1 - q^m)(1 - q^{m+1}))` with
/// `m = 2n - 1` for cos and `m = 2n` for sin.
pub fn q_trig_fixed(kind: TrigKind, z: &Fixed, q: &Fixed) -> Fixed {
    let one = Fixed::one();
    let w = z * &(&one - q);
    let w2 = &w * &w;
    let (mut term, mut qm) = match kind {
        TrigKind::Cos => (one.clone(), q.clone()),
        TrigKind::Sin => (w.div(&(&one - q)), q * q),
    };
    let mut sum = term.clone();
    let mut n = 0u32;
    loop {
        n += 1;
        let qm1 = &qm * q;
        let denom = &(&one - &qm) * &(&one - &qm1);
        term = -&(&(&term * &qm) * &w2).div(&denom);
        sum = &sum + &term;
        qm = &qm1 * q;
        if term.is_zero() && n > 4 {
            break;
        }
    }
    sum
}

pub fn q_trig_oracle(kind: TrigKind, z: f64, q: f64) -> f64 {
    q_trig_fixed(kind, &Fixed::from_f64(z), &Fixed::from_f64(q)).to_f64()
}

/// `(phi1, phi2)` of a preset at the exact point `x` and the exact `lambda`.
pub fn phi_oracle(preset: Preset, lambda: f64, x: f64, q: f64) -> (f64, f64) {
    let qf = Fixed::from_f64(q);
    let sq = qf.sqrt();
    let inner = &Fixed::from_f64(lambda) * &Fixed::from_f64(x);
    let outer = &inner * &sq;
    let cos = |z: &Fixed| q_trig_fixed(TrigKind::Cos, z, &qf);
    let sin = |z: &Fixed| q_trig_fixed(TrigKind::Sin, z, &qf);
    let (a, b) = match preset {
        Preset::One => (sin(&inner), cos(&outer)),
        Preset::Two => (cos(&inner), -&(&sq * &sin(&outer))),
        Preset::Three => (
            &cos(&inner) - &sin(&inner),
            &(-&(&sq * &sin(&outer))) - &cos(&outer),
        ),
    };
    (a.to_f64(), b.to_f64())
}

/// `omega(lambda)` of a preset with `a` given as the f64 endpoint.
pub fn omega_oracle(preset: Preset, lambda: f64, a: f64, q: f64) -> f64 {
    let qf = Fixed::from_f64(q);
    let sq = qf.sqrt();
    let la = &Fixed::from_f64(lambda) * &Fixed::from_f64(a);
    let outer = la.div(&sq);
    let cos = |z: &Fixed| q_trig_fixed(TrigKind::Cos, z, &qf);
    let sin = |z: &Fixed| q_trig_fixed(TrigKind::Sin, z, &qf);
    match preset {
        Preset::One => cos(&outer).to_f64(),
        Preset::Two => cos(&la).to_f64(),
        Preset::Three => (&(-&(&sq * &sin(&outer))) - &cos(&outer)).to_f64(),
    }
}

/// Polynomials in `lambda` of `phi1(x_k)` and `phi2(x_k)` for `p = r = 0`,
/// built from the recurrence on coefficient vectors (lowest degree first).
/// Entry `k + 1` holds lattice index `k`; `phi1` has no exterior entry.
pub fn trace_polynomials(xs: &[f64], q: f64, k11: f64, k12: f64) -> Vec<(Vec<f64>, Vec<f64>)> {
    let depth = xs.len() - 2;
    let shift = |c: &[f64], s: f64| -> Vec<f64> {
        let mut out = vec![0.0; c.len() + 1];
        for (i, v) in c.iter().enumerate() {
            out[i + 1] = v * s;
        }
        out
    };
    let add = |a: &[f64], b: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; a.len().max(b.len())];
        for (i, v) in a.iter().enumerate() {
            out[i] += v;
        }
        for (i, v) in b.iter().enumerate() {
            out[i] += v;
        }
        out
    };
    let mut polys = vec![(Vec::new(), Vec::new()); depth + 2];
    polys[depth + 1] = (vec![k12], vec![-k11]);
    for k in (0..depth).rev() {
        let (y1_next, y2_next) = polys[k + 2].clone();
        let y2 = add(&y2_next, &shift(&y1_next, -xs[k + 2] * (1.0 - q)));
        let y1 = add(&y1_next, &shift(&y2, xs[k + 1] * (1.0 - q)));
        polys[k + 1] = (y1, y2);
    }
    let (y1_0, y2_0) = polys[1].clone();
    let y2_ext = add(&y2_0, &shift(&y1_0, -xs[1] * (1.0 - q)));
    polys[0] = (Vec::new(), y2_ext);
    polys
}

/// Horner value and the sum of absolute term sizes.
pub fn eval_poly(c: &[f64], x: f64) -> (f64, f64) {
    let v = c.iter().rev().fold(0.0, |acc, ci| acc * x + ci);
    let m = c.iter().rev().fold(0.0, |acc, ci| acc * x.abs() + ci.abs());
    (v, m)
}

pub fn degree(c: &[f64]) -> Option<usize> {
    c.iter().rposition(|v| *v != 0.0)
}
