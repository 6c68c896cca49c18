//! Radial Hermitian sextic problem, `ψ ~ x^{l+1}` at the origin.

use num_complex::Complex64;

use super::real::{RealProblem, Shooter, Work};
use super::{frobenius, sextic_potential, sextic_potential_derivative, ShootingConfig};
use crate::error::{QesError, Result};
use crate::model::{Method, SexticBc, SexticSpec, Spectrum};
use crate::ode::{propagate, Segment};

struct Radial<'a> {
    spec: &'a SexticSpec,
}

impl RealProblem for Radial<'_> {
    fn v(&self, x: f64) -> f64 {
        sextic_potential(self.spec, Complex64::new(x, 0.0)).re
    }

    fn dv(&self, x: f64) -> f64 {
        sextic_potential_derivative(self.spec, Complex64::new(x, 0.0)).re
    }

    fn left_start(&self, e: f64, cfg: &ShootingConfig) -> Result<(f64, f64, f64)> {
        let x0 = cfg.x_inner.min(1.0 / e.abs().max(1.0).sqrt());
        let s = self.spec;
        let u = [s.c_shift - e, s.quadratic(), 2.0 * s.delta, 1.0];
        let (p, dp) = frobenius(s.l + 1.0, &u, x0)?;
        Ok((x0, p, dp))
    }

    fn lower_bound(&self) -> f64 {
        // −d²/dx² + l(l+1)/x² ≥ 0 for l ≥ −1/2, so the regular part bounds E
        let s = self.spec;
        let mut lo = f64::INFINITY;
        for i in 0..=2000 {
            let z = (3.0 * i as f64 / 2000.0).powi(2);
            lo = lo.min(((z + 2.0 * s.delta) * z + s.quadratic()) * z + s.c_shift);
        }
        lo - 1.0 - 1e-3 * lo.abs()
    }
}

fn check(spec: &SexticSpec, cfg: &ShootingConfig) -> Result<()> {
    spec.validate()?;
    cfg.validate()?;
    if spec.bc != SexticBc::HermitianRadial {
        return Err(QesError::InvalidParameters(
            "radial solver needs a HermitianRadial spec".into(),
        ));
    }
    Ok(())
}

fn diagnostics(spec: Spectrum, work: Work) -> Spectrum {
    spec.with_diagnostic("evaluations", work.evaluations as f64)
        .with_diagnostic("steps", work.steps as f64)
}

/// The first `cfg.max_levels` levels, indexed by node count.
pub fn radial_eigenvalues(spec: &SexticSpec, cfg: &ShootingConfig) -> Result<Spectrum> {
    check(spec, cfg)?;
    let problem = Radial { spec };
    let shooter = Shooter::new(&problem, cfg);
    let (levels, work) = shooter.levels(0, cfg.max_levels)?;
    let mut out = Spectrum::from_energies(Vec::new(), Method::Ode);
    out.levels = levels
        .into_iter()
        .map(|(index, energy)| crate::model::Level { index, energy })
        .collect();
    Ok(diagnostics(out, work))
}

/// The level nearest `guess` as `(node count, energy)`.
pub fn radial_eigenvalue_near(spec: &SexticSpec, guess: f64, cfg: &ShootingConfig) -> Result<(usize, f64)> {
    check(spec, cfg)?;
    let problem = Radial { spec };
    let (lv, _) = Shooter::new(&problem, cfg).level_near(guess)?;
    Ok(lv)
}

/// Distance of the Prüfer mismatch `Θ(E)` from the nearest multiple of `π`;
/// zero at an eigenvalue.
pub fn radial_phase_residual(spec: &SexticSpec, e: f64, cfg: &ShootingConfig) -> Result<f64> {
    check(spec, cfg)?;
    let problem = Radial { spec };
    let t = Shooter::new(&problem, cfg).mismatch_at(e, None, &mut Work::default())?;
    Ok((t - std::f64::consts::PI * (t / std::f64::consts::PI).round()).abs())
}

/// Samples `(x, ψ(x))` of the left-started solution at energy `e`, up to a
/// positive overall factor.
pub fn radial_wavefunction(spec: &SexticSpec, e: f64, xs: &[f64], cfg: &ShootingConfig) -> Result<Vec<(f64, f64)>> {
    check(spec, cfg)?;
    let problem = Radial { spec };
    let (x0, p0, dp0) = problem.left_start(e, cfg)?;
    let q = |x: Complex64| Complex64::new(problem.v(x.re) - e, 0.0);
    let tol = cfg.tolerances();
    let mut out = Vec::with_capacity(xs.len());
    let mut y = [Complex64::new(p0, 0.0), Complex64::new(dp0, 0.0)];
    let mut x_prev = x0;
    let mut log_scale = 0.0;
    for &x in xs {
        if x < x0 {
            let (p, _) = frobenius(spec.l + 1.0, &[spec.c_shift - e, spec.quadratic(), 2.0 * spec.delta, 1.0], x)?;
            out.push((x, p));
            continue;
        }
        if x > x_prev {
            let r = propagate(&[Segment::line(x_prev, x)], y, &q, &tol, |_, _| {})?;
            y = r.state;
            log_scale += r.log_scale;
            x_prev = x;
        }
        out.push((x, y[0].re * log_scale.exp()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qes_ground_state_at_zero() {
        // δ = 0, l = 0, α = −5: ψ = x e^{−x⁴/4} at E = 0
        let spec = SexticSpec::new(0.0, -5.0, 0.0, 0.0, SexticBc::HermitianRadial);
        let s = radial_eigenvalues(&spec, &ShootingConfig::with_levels(2)).unwrap();
        assert!(s.levels[0].energy.abs() < 1e-8, "{:?}", s.levels);
        assert!(s.is_strictly_increasing());
    }

    #[test]
    fn node_count_indexing() {
        let spec = SexticSpec::new(0.2, 0.31, 0.54, 0.0, SexticBc::HermitianRadial);
        let s = radial_eigenvalues(&spec, &ShootingConfig::with_levels(4)).unwrap();
        let xs: Vec<f64> = (1..400).map(|i| i as f64 * 0.01).collect();
        for lv in &s.levels {
            let psi = radial_wavefunction(&spec, lv.energy, &xs, &ShootingConfig::default()).unwrap();
            // stop before the growing tail takes over
            let cut = psi.iter().position(|p| p.0 > 2.2).unwrap();
            let nodes = psi[..cut].windows(2).filter(|w| w[0].1 * w[1].1 < 0.0).count();
            assert_eq!(nodes, lv.index);
        }
    }

    #[test]
    fn radial_rejects_pt_spec() {
        let spec = SexticSpec::new(0.0, 0.0, 0.0, 0.0, SexticBc::PTContour);
        assert!(radial_eigenvalues(&spec, &ShootingConfig::default()).is_err());
    }
}
