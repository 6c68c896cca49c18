//! Bound states of `V(x; A, B, C, γ)`.
//!
//! * `RealLineEven` / `RealLineOdd`: one parity of the full-line problem,
//!   shot from `x = 0` with `ψ'(0) = 0` or `ψ(0) = 0`.
//! * `HalfLine`: `x > 0` with `ψ ~ x^{−B−1/2}` at the origin. When `B` is a
//!   nonnegative integer that exponent is the smaller of a resonant pair and
//!   the series generally picks up a logarithm at order `B+1`. The levels are
//!   then the `E` at which the logarithm is absent: every solution, the
//!   decaying one included, behaves as `x^{−B−1/2}`. They are the real zeros
//!   of a polynomial of degree `B+1` and contain the QES levels.
//!   [`hyperbolic_contour_mismatch`] gives an independent check: it changes
//!   sign at those energies.
//! * `PTShifted`: the line `Im x = π`, on which the potential is real, even
//!   and nonsingular. Both parities are returned.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rayon::join;

use super::real::{RealProblem, Shooter, Work};
use super::series::{frobenius, hyperbolic_taylor, resonance_polynomial};
use super::{hyperbolic_potential, hyperbolic_potential_derivative, ShootingConfig};
use crate::error::{QesError, Result};
use crate::model::{HyperbolicBc, HyperbolicSpec, Level, Method, Spectrum};
use crate::ode::{propagate, Segment};
use crate::poly::companion_roots;

const TAYLOR_TERMS: usize = 40;
const ARC_RADIUS: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Start {
    Even,
    Odd,
    Frobenius(f64),
}

struct Line<'a> {
    spec: &'a HyperbolicSpec,
    m: f64,
    shifted: bool,
    start: Start,
}

impl Line<'_> {
    fn z(&self, x: f64) -> Complex64 {
        Complex64::new(x, if self.shifted { PI } else { 0.0 })
    }

    /// `V` without the `1/(cosh x − 1)` pole, which is bounded below by
    /// `−1/(4x²)` and so cannot pull a level below the rest.
    fn regular(&self, x: f64) -> f64 {
        let pb = self.spec.b_pole_strength();
        if self.shifted || pb == 0.0 {
            return self.v(x);
        }
        let x = x.max(1e-3);
        self.v(x) - pb / (x.cosh() - 1.0)
    }
}

impl RealProblem for Line<'_> {
    fn v(&self, x: f64) -> f64 {
        hyperbolic_potential(self.spec, self.m, self.z(x)).re
    }

    fn dv(&self, x: f64) -> f64 {
        hyperbolic_potential_derivative(self.spec, self.m, self.z(x)).re
    }

    fn left_start(&self, e: f64, cfg: &ShootingConfig) -> Result<(f64, f64, f64)> {
        match self.start {
            Start::Even => Ok((0.0, 1.0, 0.0)),
            Start::Odd => Ok((0.0, 0.0, 1.0)),
            Start::Frobenius(rho) => {
                let x0 = cfg.x_inner.min(1.0 / e.abs().max(1.0).sqrt());
                let (_, u) = hyperbolic_taylor(self.spec, self.m, e, TAYLOR_TERMS);
                let (p, dp) = frobenius(rho, &u, x0)?;
                Ok((x0, p, dp))
            }
        }
    }

    fn lower_bound(&self) -> f64 {
        let lo = (1..=3000)
            .map(|i| self.regular(10.0 * i as f64 / 3000.0))
            .fold(f64::INFINITY, f64::min);
        lo - 1.0 - 1e-3 * lo.abs()
    }

    fn outer_ok(&self, x: f64) -> bool {
        (self.spec.a_lin * self.spec.gamma).abs() * x.cosh() / 4.0 >= 30.0
    }
}

fn is_resonant(b: f64) -> bool {
    b >= 0.0 && b.fract() == 0.0
}

fn to_spectrum(levels: Vec<(usize, f64)>, work: Work) -> Spectrum {
    let mut out = Spectrum::from_energies(Vec::new(), Method::Ode);
    out.levels = levels
        .into_iter()
        .map(|(index, energy)| Level { index, energy })
        .collect();
    out.with_diagnostic("evaluations", work.evaluations as f64)
        .with_diagnostic("steps", work.steps as f64)
}

fn line<'a>(spec: &'a HyperbolicSpec, m: f64, start: Start) -> Line<'a> {
    Line {
        spec,
        m,
        shifted: spec.bc == HyperbolicBc::PTShifted,
        start,
    }
}

/// Both parities of a potential that is regular at the origin of its line,
/// merged and re-indexed by energy.
fn both_parities(spec: &HyperbolicSpec, m: f64, cfg: &ShootingConfig) -> Result<Spectrum> {
    let even = line(spec, m, Start::Even);
    let odd = line(spec, m, Start::Odd);
    let n = cfg.max_levels;
    let (a, b) = join(
        || Shooter::new(&even, cfg).levels(0, n),
        || Shooter::new(&odd, cfg).levels(0, n),
    );
    let ((ea, wa), (eb, wb)) = (a?, b?);
    let mut all: Vec<f64> = ea.iter().chain(eb.iter()).map(|l| l.1).collect();
    all.sort_by(|x, y| x.total_cmp(y));
    all.truncate(n);
    let work = Work {
        evaluations: wa.evaluations + wb.evaluations,
        steps: wa.steps + wb.steps,
    };
    Ok(to_spectrum(all.into_iter().enumerate().collect(), work))
}

fn outer_radius(spec: &HyperbolicSpec, m: f64, e: f64) -> f64 {
    let ag = (spec.a_lin * spec.gamma).abs();
    let target = 1e3 * e.abs().max(1.0);
    let mut x = 1.0;
    while (hyperbolic_potential(spec, m, Complex64::new(x, 0.0)).re - e < target || ag * x.cosh() / 4.0 < 30.0)
        && x < 50.0
    {
        x *= 1.05;
    }
    x
}

/// Real energies at which the `x^{−B−1/2}` series for integer `B ≥ 0` closes
/// without a logarithm.
fn log_free_levels(spec: &HyperbolicSpec, m: f64) -> Vec<f64> {
    let k = spec.b_pole as usize + 1;
    let (_, u) = hyperbolic_taylor(spec, m, 0.0, k + 1);
    let poly = resonance_polynomial(-spec.b_pole - 0.5, &u, k);
    let mut out: Vec<f64> = companion_roots(&poly)
        .into_iter()
        .filter(|z| z.im.abs() <= 1e-7 * z.re.abs().max(1.0))
        .map(|z| z.re)
        .collect();
    out.sort_by(|a, b| a.total_cmp(b));
    out
}

/// Matching function for resonant `B`: the solution decaying at `+∞` is
/// carried around the origin by a quarter circle into the lower half plane
/// and compared on the negative imaginary axis with its image under
/// `x → −conj(x)`, giving `Re(y ȳ') / (|y|² + |y'|²)` at `x = −i r`. It
/// changes sign at the log-free levels and touches zero at the regular
/// half-line levels.
pub fn hyperbolic_contour_mismatch(spec: &HyperbolicSpec, m: f64, cfg: &ShootingConfig, e: f64) -> Result<f64> {
    let x_far = cfg.x_outer.unwrap_or_else(|| outer_radius(spec, m, e));
    let x0 = Complex64::new(x_far, 0.0);
    let v0 = hyperbolic_potential(spec, m, x0) - e;
    let mut s = v0.sqrt();
    if s.re < 0.0 {
        s = -s;
    }
    let dy0 = -s - hyperbolic_potential_derivative(spec, m, x0) / (4.0 * v0);
    let segs = [
        Segment::line(x0, Complex64::new(ARC_RADIUS, 0.0)),
        Segment::arc(ARC_RADIUS, 0.0, -FRAC_PI_2),
    ];
    let q = |x: Complex64| hyperbolic_potential(spec, m, x) - e;
    let out = propagate(&segs, [Complex64::new(1.0, 0.0), dy0], &q, &cfg.tolerances(), |_, _| {})?;
    let [y, dy] = out.state;
    Ok((y * dy.conj()).re / (y.norm_sqr() + dy.norm_sqr()))
}

fn check(spec: &HyperbolicSpec, m: f64, cfg: &ShootingConfig) -> Result<()> {
    spec.validate()?;
    cfg.validate()?;
    if !m.is_finite() {
        return Err(QesError::InvalidParameters(format!("M = {m}")));
    }
    Ok(())
}

/// The first `cfg.max_levels` eigenvalues of `−ψ'' + Vψ = ℰψ` under the
/// boundary condition of `spec`. `m` is the M entering the potential.
pub fn hyperbolic_eigenvalues(spec: &HyperbolicSpec, m: f64, cfg: &ShootingConfig) -> Result<Spectrum> {
    check(spec, m, cfg)?;
    match spec.bc {
        HyperbolicBc::RealLineEven | HyperbolicBc::RealLineOdd => {
            let start = if spec.bc == HyperbolicBc::RealLineEven {
                Start::Even
            } else {
                Start::Odd
            };
            let problem = line(spec, m, start);
            let (levels, work) = Shooter::new(&problem, cfg).levels(0, cfg.max_levels)?;
            Ok(to_spectrum(levels, work))
        }
        HyperbolicBc::PTShifted => both_parities(spec, m, cfg),
        HyperbolicBc::HalfLine if is_resonant(spec.b_pole) => {
            let mut levels = log_free_levels(spec, m);
            levels.truncate(cfg.max_levels);
            Ok(Spectrum::from_energies(levels, Method::Ode).with_diagnostic("resonant_order", spec.b_pole + 1.0))
        }
        HyperbolicBc::HalfLine => {
            let problem = line(spec, m, Start::Frobenius(-spec.b_pole - 0.5));
            let (levels, work) = Shooter::new(&problem, cfg).levels(0, cfg.max_levels)?;
            Ok(to_spectrum(levels, work))
        }
    }
}

/// Even and odd levels together for a potential regular at the origin
/// (`B = −1/2` or `−3/2`, or any `PTShifted` spec).
pub fn hyperbolic_full_line_eigenvalues(spec: &HyperbolicSpec, m: f64, cfg: &ShootingConfig) -> Result<Spectrum> {
    check(spec, m, cfg)?;
    if spec.bc != HyperbolicBc::PTShifted && !spec.is_nonsingular_at_origin() {
        return Err(QesError::InvalidParameters(format!(
            "full-line problem needs B = -1/2 or -3/2, got {}",
            spec.b_pole
        )));
    }
    both_parities(spec, m, cfg)
}

/// The eigenvalue closest to `guess`.
pub fn hyperbolic_eigenvalue_near(spec: &HyperbolicSpec, m: f64, guess: f64, cfg: &ShootingConfig) -> Result<f64> {
    check(spec, m, cfg)?;
    let start = match spec.bc {
        HyperbolicBc::RealLineOdd => Start::Odd,
        HyperbolicBc::RealLineEven => Start::Even,
        HyperbolicBc::PTShifted => {
            let even = line(spec, m, Start::Even);
            let odd = line(spec, m, Start::Odd);
            let a = Shooter::new(&even, cfg).level_near(guess).map(|r| r.0 .1);
            let b = Shooter::new(&odd, cfg).level_near(guess).map(|r| r.0 .1);
            return match (a, b) {
                (Ok(a), Ok(b)) => Ok(if (a - guess).abs() <= (b - guess).abs() { a } else { b }),
                (Ok(a), Err(_)) => Ok(a),
                (Err(_), Ok(b)) => Ok(b),
                (Err(e), Err(_)) => Err(e),
            };
        }
        HyperbolicBc::HalfLine if is_resonant(spec.b_pole) => {
            return log_free_levels(spec, m)
                .into_iter()
                .min_by(|a, b| (a - guess).abs().total_cmp(&(b - guess).abs()))
                .ok_or_else(|| QesError::BracketFailure(format!("no level near {guess}")));
        }
        HyperbolicBc::HalfLine => Start::Frobenius(-spec.b_pole - 0.5),
    };
    let problem = line(spec, m, start);
    let ((_, e), _) = Shooter::new(&problem, cfg).level_near(guess)?;
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::herm_pt_swap;

    fn cfg(n: usize) -> ShootingConfig {
        ShootingConfig::with_levels(n)
    }

    #[test]
    fn susy_zero_mode_is_ground_state() {
        // Q₊Q₋ with M = 1, γ = −1 has the E = 0 state (cosh x + 1) e^{−cosh x/2}
        let (m, g) = (1.0, -1.0);
        let spec = HyperbolicSpec::new(2.0, -1.5, m - 0.5, g, -g * (m + 1.0), HyperbolicBc::RealLineEven);
        let s = hyperbolic_eigenvalues(&spec, m, &cfg(2)).unwrap();
        assert!(s.levels[0].energy.abs() < 1e-8, "{:?}", s.levels);
    }

    #[test]
    fn shifted_line_matches_hermitian() {
        let spec = HyperbolicSpec::new(2.0, -0.5, 0.7, -1.0, 0.3, HyperbolicBc::RealLineEven);
        let full = hyperbolic_full_line_eigenvalues(&spec, 0.0, &cfg(4)).unwrap();
        let swapped = herm_pt_swap(&spec);
        let pt = hyperbolic_eigenvalues(&swapped, 0.0, &cfg(4)).unwrap();
        for (a, b) in full.energies().iter().zip(pt.energies()) {
            assert!((a - b).abs() < 1e-9, "{a} {b}");
        }
    }

    #[test]
    fn wrong_sign_is_a_domain_error() {
        let spec = HyperbolicSpec::new(2.0, -0.5, 0.0, 1.0, 0.0, HyperbolicBc::RealLineEven);
        assert!(matches!(
            hyperbolic_eigenvalues(&spec, 0.0, &cfg(1)),
            Err(QesError::DomainError(_))
        ));
    }

    #[test]
    fn singular_full_line_rejected() {
        let spec = HyperbolicSpec::new(2.0, 0.3, 0.0, -1.0, 0.0, HyperbolicBc::HalfLine);
        assert!(hyperbolic_full_line_eigenvalues(&spec, 0.0, &cfg(1)).is_err());
    }
}
