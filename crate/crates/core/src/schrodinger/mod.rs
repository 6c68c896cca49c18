//! Shooting eigensolvers for the sextic and hyperbolic Schrödinger problems.
//!
//! Hermitian problems use a Prüfer phase so that levels are labelled by their
//! node count. The PT-symmetric sextic problem is solved on a complex contour
//! by locating the real zeros of a normalized Wronskian.

mod hyperbolic;
mod pt;
mod radial;
mod real;
mod series;

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use num_complex::Complex64;

use crate::error::{QesError, Result};
use crate::model::{HyperbolicSpec, SexticSpec};

pub use hyperbolic::{
    hyperbolic_contour_mismatch, hyperbolic_eigenvalue_near, hyperbolic_eigenvalues, hyperbolic_full_line_eigenvalues,
};
pub use pt::{pt_eigenvalue_near, pt_eigenvalues, pt_mismatch};
pub use radial::{radial_eigenvalue_near, radial_eigenvalues, radial_phase_residual, radial_wavefunction};
pub use series::{frobenius, hyperbolic_taylor};

/// Radii and tolerances for the shooting solvers. `None` means "choose from
/// the energy".
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootingConfig {
    /// Largest radius at which the small-x series is evaluated.
    pub x_inner: f64,
    /// Matching point. Defaults to the outer classical turning point.
    pub x_match: Option<f64>,
    /// Start of the inward asymptotic solution.
    pub x_outer: Option<f64>,
    /// Local relative error target of the integrator.
    pub step_tolerance: f64,
    /// Absolute tolerance on each eigenvalue.
    pub energy_tolerance: f64,
    /// Search window. The lower end is a lower bound for the first level.
    pub energy_bracket: Option<(f64, f64)>,
    pub max_levels: usize,
}

impl Default for ShootingConfig {
    fn default() -> Self {
        Self {
            x_inner: 0.5,
            x_match: None,
            x_outer: None,
            step_tolerance: 1e-12,
            energy_tolerance: 1e-10,
            energy_bracket: None,
            max_levels: 5,
        }
    }
}

impl ShootingConfig {
    pub fn with_levels(max_levels: usize) -> Self {
        Self {
            max_levels,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.x_inner > 0.0) || !(self.step_tolerance > 0.0) || !(self.energy_tolerance > 0.0) {
            return Err(QesError::InvalidParameters(
                "x_inner, step_tolerance and energy_tolerance must be positive".into(),
            ));
        }
        if let Some(xm) = self.x_match {
            if xm <= self.x_inner {
                return Err(QesError::InvalidParameters(format!(
                    "x_match {xm} must exceed x_inner {}",
                    self.x_inner
                )));
            }
            if let Some(xo) = self.x_outer {
                if xo <= xm {
                    return Err(QesError::InvalidParameters(format!(
                        "x_outer {xo} must exceed x_match {xm}"
                    )));
                }
            }
        }
        if let Some((lo, hi)) = self.energy_bracket {
            if !(lo < hi) {
                return Err(QesError::InvalidParameters(format!(
                    "empty energy bracket ({lo}, {hi})"
                )));
            }
        }
        Ok(())
    }

    pub(crate) fn tolerances(&self) -> crate::ode::Tolerances {
        crate::ode::Tolerances::with_rtol(self.step_tolerance)
    }
}

/// The PT contour: two rays joined by an arc of radius `arc_radius` that
/// crosses the bisector of the rays. The bisector must be a real or
/// imaginary axis direction so that the two rays are exchanged by a
/// symmetry of the even potential.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourSpec {
    pub ray_angles: (f64, f64),
    /// Where the asymptotic start sits on each ray. `None` picks it from the
    /// energy.
    pub ray_radius: Option<f64>,
    pub arc_radius: f64,
}

impl Default for ContourSpec {
    /// Wedges centred on `arg x = -3π/4` and `-π/4`, joined below the origin.
    fn default() -> Self {
        Self {
            ray_angles: (-3.0 * FRAC_PI_4, -FRAC_PI_4),
            ray_radius: None,
            arc_radius: 2.0,
        }
    }
}

impl ContourSpec {
    /// Rays at `±π/4` joined through the positive real axis.
    pub fn right_half() -> Self {
        Self {
            ray_angles: (-FRAC_PI_4, FRAC_PI_4),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (a, b) = self.ray_angles;
        if a == b || !a.is_finite() || !b.is_finite() {
            return Err(QesError::ContourError(format!("bad ray angles ({a}, {b})")));
        }
        let axis = self.axis() / FRAC_PI_2;
        if (axis - axis.round()).abs() > 1e-12 {
            return Err(QesError::ContourError(format!(
                "rays ({a}, {b}) are not mirror images about a coordinate axis"
            )));
        }
        if !(self.arc_radius > 0.0) {
            return Err(QesError::ContourError(format!(
                "arc radius {} must be positive",
                self.arc_radius
            )));
        }
        if let Some(r) = self.ray_radius {
            if r <= self.arc_radius {
                return Err(QesError::ContourError(format!(
                    "ray radius {r} must exceed arc radius {}",
                    self.arc_radius
                )));
            }
        }
        Ok(())
    }

    /// Direction of the bisector, where the two halves are matched.
    pub(crate) fn axis(&self) -> f64 {
        0.5 * (self.ray_angles.0 + self.ray_angles.1)
    }

    /// The ray that is integrated; the other follows by reflection.
    pub(crate) fn start_angle(&self) -> f64 {
        self.ray_angles.0.max(self.ray_angles.1)
    }
}

/// Either kind of potential, for [`evaluate_potential`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PotentialRef<'a> {
    Sextic(&'a SexticSpec),
    /// The hyperbolic potential together with its number of Bethe roots M.
    Hyperbolic(&'a HyperbolicSpec, f64),
}

/// Exact value of the potential, constant shifts included.
pub fn evaluate_potential(p: PotentialRef<'_>, x: Complex64) -> Result<Complex64> {
    match p {
        PotentialRef::Sextic(s) => {
            if x == Complex64::new(0.0, 0.0) && s.centrifugal() != 0.0 {
                return Err(QesError::SingularPoint(format!("{x}")));
            }
            Ok(sextic_potential(s, x))
        }
        PotentialRef::Hyperbolic(h, m) => {
            let c = x.cosh();
            if (c - 1.0).norm() < 1e-300 && h.b_pole_strength() != 0.0
                || (c + 1.0).norm() < 1e-300 && h.c_pole_strength() != 0.0
            {
                return Err(QesError::SingularPoint(format!("{x}")));
            }
            Ok(hyperbolic_potential(h, m, x))
        }
    }
}

pub(crate) fn sextic_potential(s: &SexticSpec, x: Complex64) -> Complex64 {
    let z = x * x;
    let mut v = ((z + 2.0 * s.delta) * z + s.quadratic()) * z + s.c_shift;
    let cf = s.centrifugal();
    if cf != 0.0 {
        v += cf / z;
    }
    v
}

pub(crate) fn sextic_potential_derivative(s: &SexticSpec, x: Complex64) -> Complex64 {
    let z = x * x;
    let mut dv = ((6.0 * z + 8.0 * s.delta) * z + 2.0 * s.quadratic()) * x;
    let cf = s.centrifugal();
    if cf != 0.0 {
        dv -= 2.0 * cf / (z * x);
    }
    dv
}

pub(crate) fn hyperbolic_potential(h: &HyperbolicSpec, m: f64, x: Complex64) -> Complex64 {
    let (a, b, c, g) = (h.a_lin, h.b_pole, h.c_pole, h.gamma);
    let ag = a * g;
    let ch = x.cosh();
    let sh = x.sinh();
    let mut v = m * (m - b - c - 1.0 + ag / 2.0 * ch)
        + 0.25 * (b + c + 1.0).powi(2)
        + ag * ag / 16.0 * sh * sh
        + ag * (c - b) / 4.0
        - ag * (b + c) / 4.0 * ch
        + h.shift;
    let pb = h.b_pole_strength();
    if pb != 0.0 {
        v += pb / (ch - 1.0);
    }
    let pc = h.c_pole_strength();
    if pc != 0.0 {
        v -= pc / (ch + 1.0);
    }
    v
}

pub(crate) fn hyperbolic_potential_derivative(h: &HyperbolicSpec, m: f64, x: Complex64) -> Complex64 {
    let (a, b, c, g) = (h.a_lin, h.b_pole, h.c_pole, h.gamma);
    let ag = a * g;
    let ch = x.cosh();
    let sh = x.sinh();
    let mut dv = m * ag / 2.0 * sh + ag * ag / 8.0 * sh * ch - ag * (b + c) / 4.0 * sh;
    let pb = h.b_pole_strength();
    if pb != 0.0 {
        dv -= pb * sh / ((ch - 1.0) * (ch - 1.0));
    }
    let pc = h.c_pole_strength();
    if pc != 0.0 {
        dv += pc * sh / ((ch + 1.0) * (ch + 1.0));
    }
    dv
}

/// Brent's method on a bracket known to change sign. Returns the end of the
/// final bracket with the smaller residual.
pub(crate) fn brent<F: FnMut(f64) -> Result<f64>>(a: f64, b: f64, tol: f64, mut f: F) -> Result<f64> {
    let (mut a, mut b) = (a, b);
    let mut fa = f(a)?;
    let mut fb = f(b)?;
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(QesError::BracketFailure(format!(
            "f({a}) = {fa} and f({b}) = {fb} share a sign"
        )));
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..200 {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            if 2.0 * p < (3.0 * xm * q - (tol1 * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b)?;
    }
    Err(QesError::BracketFailure(format!("no convergence in [{a}, {c}]")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{herm_pt_swap, HyperbolicBc, SexticBc};

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn sextic_value_at_one() {
        let s = SexticSpec::new(0.0, 0.0, 0.0, 0.0, SexticBc::HermitianRadial);
        let v = evaluate_potential(PotentialRef::Sextic(&s), c(1.0)).unwrap();
        assert_eq!(v, c(1.0));
    }

    #[test]
    fn sextic_origin_is_singular_with_centrifugal_term() {
        let s = SexticSpec::new(0.0, 0.0, 1.0, 0.0, SexticBc::HermitianRadial);
        assert!(matches!(
            evaluate_potential(PotentialRef::Sextic(&s), c(0.0)),
            Err(QesError::SingularPoint(_))
        ));
    }

    #[test]
    fn sextic_derivative_matches_finite_difference() {
        let s = SexticSpec::new(0.3, -1.2, 0.54, 0.7, SexticBc::PTContour);
        let x = Complex64::new(0.8, 0.4);
        let h = 1e-6;
        let fd = (sextic_potential(&s, x + h) - sextic_potential(&s, x - h)) / (2.0 * h);
        assert!((fd - sextic_potential_derivative(&s, x)).norm() < 1e-7);
    }

    #[test]
    fn hyperbolic_derivative_matches_finite_difference() {
        let s = HyperbolicSpec::new(2.0, 0.7, -0.2, -1.0, 0.3, HyperbolicBc::HalfLine);
        let x = Complex64::new(0.9, 0.2);
        let h = 1e-6;
        let fd = (hyperbolic_potential(&s, 1.5, x + h) - hyperbolic_potential(&s, 1.5, x - h)) / (2.0 * h);
        assert!((fd - hyperbolic_potential_derivative(&s, 1.5, x)).norm() < 1e-6);
    }

    #[test]
    fn nonsingular_b_pole_has_zero_strength() {
        let s = HyperbolicSpec::new(2.0, -0.5, 0.3, -1.0, 0.0, HyperbolicBc::RealLineEven);
        assert_eq!(s.b_pole_strength(), 0.0);
        let s = HyperbolicSpec::new(2.0, -1.5, 0.3, -1.0, 0.0, HyperbolicBc::RealLineOdd);
        assert_eq!(s.b_pole_strength(), 0.0);
        assert!(evaluate_potential(PotentialRef::Hyperbolic(&s, 2.0), c(0.0)).is_ok());
    }

    #[test]
    fn swap_identity_on_grid() {
        let s = HyperbolicSpec::new(2.0, 0.7, -0.2, -1.0, 0.0, HyperbolicBc::HalfLine);
        let t = herm_pt_swap(&s);
        for m in [0.0, 1.0, 2.5] {
            for k in 1..=6 {
                let x = 0.5 * k as f64;
                let lhs = hyperbolic_potential(&s, m, c(x));
                let rhs = hyperbolic_potential(&t, m, Complex64::new(x, std::f64::consts::PI));
                assert!((lhs - rhs).norm() < 1e-12 * lhs.norm().max(1.0), "{x}: {lhs} {rhs}");
            }
        }
    }

    #[test]
    fn brent_finds_cosine_root() {
        let r = brent(0.0, 3.0, 1e-14, |x| Ok(x.cos())).unwrap();
        assert!((r - std::f64::consts::FRAC_PI_2).abs() < 1e-13);
        assert!(brent(0.0, 1.0, 1e-14, |x| Ok(x.cos())).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(ShootingConfig::default().validate().is_ok());
        let bad = ShootingConfig {
            x_match: Some(0.3),
            ..ShootingConfig::default()
        };
        assert!(bad.validate().is_err());
        assert!(ContourSpec::default().validate().is_ok());
        let bad = ContourSpec {
            arc_radius: 0.0,
            ..ContourSpec::default()
        };
        assert!(bad.validate().is_err());
    }
}
