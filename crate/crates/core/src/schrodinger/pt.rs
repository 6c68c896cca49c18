//! PT-symmetric sextic problem on a complex contour.
//!
//! With the bisector of the two rays at angle `φ`, the reflection
//! `σ(x) = e^{2iφ} conj(x)` exchanges the rays and leaves the potential
//! invariant. For real `E` the solution decaying on one ray is therefore
//! `conj(y(σ x))` when `y` decays on the other, and the Wronskian at the
//! matching point `r e^{iφ}` is `2i e^{iφ} Im(e^{-iφ} y ȳ')`. Only one ray
//! is integrated.

use num_complex::Complex64;

use super::{brent, sextic_potential, sextic_potential_derivative, ContourSpec, ShootingConfig};
use crate::error::{QesError, Result};
use crate::model::{Method, SexticBc, SexticSpec, Spectrum};
use crate::ode::{propagate, Segment};

fn check(spec: &SexticSpec, contour: &ContourSpec, cfg: &ShootingConfig) -> Result<()> {
    spec.validate()?;
    contour.validate()?;
    cfg.validate()?;
    if spec.bc != SexticBc::PTContour {
        return Err(QesError::InvalidParameters(
            "contour solver needs a PTContour spec".into(),
        ));
    }
    Ok(())
}

fn ray_radius(spec: &SexticSpec, contour: &ContourSpec, e: f64) -> f64 {
    if let Some(r) = contour.ray_radius {
        return r;
    }
    let dir = Complex64::from_polar(1.0, contour.start_angle());
    let target = 1e3 * e.abs().max(1.0);
    let mut r = 2.0 * contour.arc_radius;
    while (sextic_potential(spec, dir * r) - e).norm() < target && r < 1e3 {
        r *= 1.05;
    }
    r
}

/// Normalized Wronskian `Im(e^{-iφ} y ȳ') / (|y|² + |y'|²)` at the end of
/// the arc; its zeros are the eigenvalues.
pub fn pt_mismatch(spec: &SexticSpec, contour: &ContourSpec, cfg: &ShootingConfig, e: f64) -> Result<f64> {
    let angle = contour.start_angle();
    let axis = contour.axis();
    let r_far = ray_radius(spec, contour, e);
    let r = contour.arc_radius;
    let dir = Complex64::from_polar(1.0, angle);
    let x0 = dir * r_far;
    let v0 = sextic_potential(spec, x0) - e;
    let mut s = v0.sqrt();
    // decay outward along the ray
    if (dir * s).re < 0.0 {
        s = -s;
    }
    let dy0 = -s - sextic_potential_derivative(spec, x0) / (4.0 * v0);
    let segs = [Segment::line(x0, dir * r), Segment::arc(r, angle, axis)];
    let q = |x: Complex64| sextic_potential(spec, x) - e;
    let out = propagate(
        &segs,
        [Complex64::new(1.0, 0.0), dy0],
        &q,
        &cfg.tolerances(),
        |_, _| {},
    )?;
    let [y, dy] = out.state;
    let w = Complex64::from_polar(1.0, -axis) * y * dy.conj();
    Ok(w.im / (y.norm_sqr() + dy.norm_sqr()))
}

fn default_floor(spec: &SexticSpec) -> f64 {
    spec.c_shift - 5.0 - spec.quadratic().abs().powf(1.5) - 2.0 * spec.delta.abs().powi(3)
}

/// Scan `E` upward and collect the first `cfg.max_levels` real zeros of the
/// normalized Wronskian.
pub fn pt_eigenvalues(spec: &SexticSpec, contour: &ContourSpec, cfg: &ShootingConfig) -> Result<Spectrum> {
    check(spec, contour, cfg)?;
    let floor = default_floor(spec);
    let f = |e: f64| pt_mismatch(spec, contour, cfg, e);
    let scan = scan_zeros(&f, floor, cfg)?;
    Ok(Spectrum::from_energies(scan.roots, Method::Ode)
        .with_diagnostic("evaluations", scan.evaluations as f64)
        .with_diagnostic("complex_pair_signals", scan.suspects.len() as f64))
}

pub(crate) struct Scan {
    pub roots: Vec<f64>,
    pub evaluations: usize,
    pub suspects: Vec<f64>,
}

/// Zeros of a real mismatch function, scanned upward from `floor` (or across
/// `cfg.energy_bracket`). The step follows the spacing of the zeros found so
/// far, and dips of `|f|` are subdivided in case they hide a close pair.
pub(crate) fn scan_zeros<F: Fn(f64) -> Result<f64>>(f: &F, floor: f64, cfg: &ShootingConfig) -> Result<Scan> {
    let (lo, hi) = cfg
        .energy_bracket
        .unwrap_or((floor, floor + 100.0 + 60.0 * (cfg.max_levels as f64 + 2.0).powf(1.5)));
    let mut roots: Vec<f64> = Vec::new();
    let mut suspects: Vec<f64> = Vec::new();
    let mut evals = 0usize;
    let mut step = 0.5;
    let mut prev: Option<(f64, f64)> = None;
    let mut before: Option<(f64, f64)> = None;
    let mut e = lo;
    while roots.len() < cfg.max_levels && e <= hi {
        let fe = f(e)?;
        evals += 1;
        if let Some((ep, fp)) = prev {
            if fp == 0.0 {
                roots.push(ep);
            } else if fp.signum() != fe.signum() {
                roots.push(brent(ep, e, cfg.energy_tolerance, f)?);
            } else if let Some((eb, fb)) = before {
                // |f| dipping without a sign change may hide a pair of zeros
                if fb.signum() == fp.signum() && fp.abs() < fb.abs() && fp.abs() < fe.abs() {
                    let mut found = split_dip(f, eb, ep, e, cfg.energy_tolerance, &mut evals)?;
                    if found.is_empty() && fp.abs() < 0.1 * fb.abs().min(fe.abs()) {
                        suspects.push(ep);
                    }
                    roots.append(&mut found);
                    roots.sort_by(|a, b| a.total_cmp(b));
                }
            }
            roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-6 * a.abs().max(1.0));
        }
        if roots.len() >= 2 {
            let gap = roots[roots.len() - 1] - roots[roots.len() - 2];
            step = (0.2 * gap).clamp(0.05, 2.0);
        }
        before = prev;
        prev = Some((e, fe));
        e += step;
    }
    if roots.len() < cfg.max_levels {
        if let Some(&s) = suspects.first() {
            return Err(QesError::ComplexEigenvalue(s));
        }
        if cfg.energy_bracket.is_none() {
            return Err(QesError::BracketFailure(format!(
                "found {} of {} levels below E = {hi}",
                roots.len(),
                cfg.max_levels
            )));
        }
    }
    roots.truncate(cfg.max_levels);
    Ok(Scan {
        roots,
        evaluations: evals,
        suspects,
    })
}

fn split_dip<F: Fn(f64) -> Result<f64>>(
    f: &F,
    a: f64,
    m: f64,
    b: f64,
    tol: f64,
    evals: &mut usize,
) -> Result<Vec<f64>> {
    let mut pts = vec![(a, f(a)?), (m, f(m)?), (b, f(b)?)];
    *evals += 3;
    for _ in 0..8 {
        let mut refined = Vec::with_capacity(2 * pts.len());
        for w in pts.windows(2) {
            refined.push(w[0]);
            let mid = 0.5 * (w[0].0 + w[1].0);
            refined.push((mid, f(mid)?));
            *evals += 1;
        }
        refined.push(*pts.last().unwrap());
        pts = refined;
        let changes: Vec<usize> = (0..pts.len() - 1)
            .filter(|&i| pts[i].1.signum() != pts[i + 1].1.signum())
            .collect();
        if !changes.is_empty() {
            return changes
                .into_iter()
                .map(|i| brent(pts[i].0, pts[i + 1].0, tol, f))
                .collect();
        }
    }
    Ok(Vec::new())
}

/// The eigenvalue closest to `guess`, by expanding a bracket around it.
pub fn pt_eigenvalue_near(spec: &SexticSpec, contour: &ContourSpec, cfg: &ShootingConfig, guess: f64) -> Result<f64> {
    check(spec, contour, cfg)?;
    zero_near(&|e: f64| pt_mismatch(spec, contour, cfg, e), guess, cfg.energy_tolerance)
}

impl ContourSpec {
    /// The same rays with the arc moved to the radius in `[0.5, 3]` where the
    /// mismatch near `guess` is most sensitive to `E`. Far inside a Stokes
    /// wedge both solutions are swamped by the growing mode and the
    /// Wronskian drowns in rounding.
    pub fn matched(self, spec: &SexticSpec, cfg: &ShootingConfig, guess: f64) -> Result<Self> {
        check(spec, &self, cfg)?;
        let h = 1e-3 * guess.abs().max(1.0);
        let mut best = (f64::NEG_INFINITY, self.arc_radius);
        for i in 0..=10 {
            let c = ContourSpec {
                arc_radius: 0.5 + 0.25 * i as f64,
                ..self
            };
            let score = pt_mismatch(spec, &c, cfg, guess - h)?.abs() + pt_mismatch(spec, &c, cfg, guess + h)?.abs();
            if score > best.0 {
                best = (score, c.arc_radius);
            }
        }
        Ok(ContourSpec {
            arc_radius: best.1,
            ..self
        })
    }
}

/// The zero of `f` found by widening a bracket around `guess`.
pub(crate) fn zero_near<F: Fn(f64) -> Result<f64>>(f: &F, guess: f64, tol: f64) -> Result<f64> {
    let f0 = f(guess)?;
    if f0 == 0.0 {
        return Ok(guess);
    }
    let mut w = 1e-4 * guess.abs().max(1.0);
    for _ in 0..30 {
        let (fa, fb) = (f(guess - w)?, f(guess + w)?);
        if fa.signum() != f0.signum() {
            return brent(guess - w, guess, tol, f);
        }
        if fb.signum() != f0.signum() {
            return brent(guess, guess + w, tol, f);
        }
        w *= 2.0;
    }
    Err(QesError::BracketFailure(format!("no zero near {guess}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qes_ground_state_on_contour() {
        // x^6 + x^2 + 2/x^2 has the exact level E = 0
        let spec = SexticSpec::new(0.0, 1.0, 1.0, 0.0, SexticBc::PTContour);
        let e = pt_eigenvalue_near(&spec, &ContourSpec::default(), &ShootingConfig::default(), 0.3).unwrap();
        assert!(e.abs() < 1e-8, "{e}");
    }

    #[test]
    fn rejects_hermitian_spec() {
        let spec = SexticSpec::new(0.0, 1.0, 1.0, 0.0, SexticBc::HermitianRadial);
        assert!(pt_eigenvalues(&spec, &ContourSpec::default(), &ShootingConfig::default()).is_err());
    }

    #[test]
    fn contour_must_be_symmetric() {
        let bad = ContourSpec {
            ray_angles: (-0.3, 0.5),
            ..ContourSpec::default()
        };
        assert!(matches!(bad.validate(), Err(QesError::ContourError(_))));
        assert!(ContourSpec::right_half().validate().is_ok());
    }
}
