//! The three worked examples with `p = r = 0` and `a = pi`, and their
//! closed-form solutions in terms of `cos(.; q)` and `sin(.; q)`.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::dirac::{BoundaryConditions, Coefficients, DiracProblem};
use crate::error::{Error, Result};
use crate::qcore::{make_lattice, Depth, QParam};
use num_complex::Complex64;

use crate::qtrig::{q_cos_real, q_sin_real, q_trig_series, TrigKind};

/// Default `q` of the presets.
pub const DEFAULT_Q: f64 = 0.5;

/// `q^K` bound used to pick the preset lattice depth.
pub const PRESET_DEPTH_TOLERANCE: f64 = 1e-30;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// `y1(0) = 0`, `y2(pi/q) = 0`.
    One,
    /// `y2(0) = 0`, `y1(pi) = 0`.
    Two,
    /// `y1(0) + y2(0) = 0`, `y2(pi/q) = 0`.
    Three,
}

impl Preset {
    pub fn from_index(which: u32) -> Result<Self> {
        match which {
            1 => Ok(Preset::One),
            2 => Ok(Preset::Two),
            3 => Ok(Preset::Three),
            _ => Err(Error::InvalidParameter(format!(
                "no example {which}; choose 1, 2 or 3"
            ))),
        }
    }

    pub fn index(self) -> u32 {
        match self {
            Preset::One => 1,
            Preset::Two => 2,
            Preset::Three => 3,
        }
    }

    /// `(k11, k12, k21, k22)`.
    ///
    /// The left row fixes the initial data `(k12, -k11)` at the origin, so
    /// its sign is chosen to make the trace equal the closed forms below.
    pub fn bc(self) -> BoundaryConditions {
        let (k11, k12, k21, k22) = match self {
            Preset::One => (-1.0, 0.0, 0.0, 1.0),
            Preset::Two => (0.0, 1.0, 1.0, 0.0),
            Preset::Three => (1.0, 1.0, 0.0, 1.0),
        };
        BoundaryConditions { k11, k12, k21, k22 }
    }

    pub fn a(self) -> f64 {
        PI
    }

    pub fn depth(self, q: QParam) -> Depth {
        Depth::for_tolerance(q, PRESET_DEPTH_TOLERANCE)
    }

    pub fn problem(self, q: QParam) -> Result<DiracProblem> {
        let lattice = make_lattice(self.a(), q, self.depth(q))?;
        DiracProblem::new(Arc::new(lattice), Coefficients::zero(), self.bc())
    }

    /// `(phi1(x, lambda), phi2(x, lambda))` in closed form.
    pub fn phi_closed_form(self, lambda: f64, x: f64, q: QParam) -> Result<(f64, f64)> {
        let sq = q.value().sqrt();
        let cos = |z: f64| q_cos_real(z, q);
        let sin = |z: f64| q_sin_real(z, q);
        Ok(match self {
            Preset::One => (sin(lambda * x)?, cos(lambda * sq * x)?),
            Preset::Two => (cos(lambda * x)?, -sq * sin(lambda * sq * x)?),
            Preset::Three => (
                cos(lambda * x)? - sin(lambda * x)?,
                -sq * sin(lambda * sq * x)? - cos(lambda * sq * x)?,
            ),
        })
    }

    /// `omega(lambda)` in closed form.
    pub fn omega_closed_form(self, lambda: f64, q: QParam) -> Result<f64> {
        let sq = q.value().sqrt();
        let outer = lambda * self.a() / sq;
        Ok(match self {
            Preset::One => q_cos_real(outer, q)?,
            Preset::Two => q_cos_real(lambda * self.a(), q)?,
            Preset::Three => -sq * q_sin_real(outer, q)? - q_cos_real(outer, q)?,
        })
    }
}

impl Preset {
    /// `omega(lambda)` summed without the cancellation guard, with the
    /// largest series term met; usable at and near the zeros.
    pub fn omega_closed_form_unguarded(self, lambda: f64, q: QParam) -> (f64, f64) {
        let sq = q.value().sqrt();
        let series = |kind, x: f64| q_trig_series(kind, Complex64::new(x, 0.0), q);
        let outer = lambda * self.a() / sq;
        match self {
            Preset::One => {
                let c = series(TrigKind::Cos, outer);
                (c.value.re, c.max_term)
            }
            Preset::Two => {
                let c = series(TrigKind::Cos, lambda * self.a());
                (c.value.re, c.max_term)
            }
            Preset::Three => {
                let (s, c) = (series(TrigKind::Sin, outer), series(TrigKind::Cos, outer));
                (-sq * s.value.re - c.value.re, sq * s.max_term + c.max_term)
            }
        }
    }
}
