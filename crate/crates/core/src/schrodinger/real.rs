//! Prüfer-phase shooting for self-adjoint problems on a half line.
//!
//! `θ = atan2(ψ, ψ')` is unwrapped along the integration. With `θ_L` from the
//! left start and `θ_R` from the decaying asymptotic solution, the mismatch
//! `Θ(E) = θ_L(x_m) − θ_R(x_m)` lies in `((n−1)π, nπ)` between the levels
//! `n−1` and `n` and equals `nπ` at level `n`, for every matching point.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use super::{brent, ShootingConfig};
use crate::error::{QesError, Result};
use crate::ode::{propagate, Segment, Tolerances};

pub(crate) trait RealProblem: Sync {
    fn v(&self, x: f64) -> f64;
    fn dv(&self, x: f64) -> f64;
    /// Start point and `(ψ, ψ')` with `ψ > 0`, or `ψ = 0` and `ψ' > 0`.
    fn left_start(&self, e: f64, cfg: &ShootingConfig) -> Result<(f64, f64, f64)>;
    /// A value below the lowest level.
    fn lower_bound(&self) -> f64;
    /// Additional requirement on the asymptotic start point.
    fn outer_ok(&self, _x: f64) -> bool {
        true
    }
}

/// Counters reported as diagnostics.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct Work {
    pub evaluations: usize,
    pub steps: usize,
}

pub(crate) struct Shooter<'a, P: RealProblem> {
    pub problem: &'a P,
    pub cfg: ShootingConfig,
    tol: Tolerances,
}

impl<'a, P: RealProblem> Shooter<'a, P> {
    pub fn new(problem: &'a P, cfg: &ShootingConfig) -> Self {
        Self {
            problem,
            cfg: *cfg,
            tol: cfg.tolerances(),
        }
    }

    /// Start radius of the decaying asymptotic solution.
    pub fn outer(&self, e: f64) -> f64 {
        if let Some(x) = self.cfg.x_outer {
            return x;
        }
        let target = 1e3 * e.abs().max(1.0);
        let mut x = 1.0;
        while !(self.problem.v(x) - e >= target && self.problem.outer_ok(x)) && x < 1e3 {
            x *= 1.05;
        }
        x
    }

    /// Outermost classical turning point, or the minimum of `V` when `E` is
    /// below it everywhere.
    pub fn turning_point(&self, e: f64, x0: f64, x_out: f64) -> f64 {
        let n = 800;
        let h = (x_out - x0) / n as f64;
        let mut last_below = None;
        let mut argmin = (x0, f64::INFINITY);
        for i in 1..n {
            let x = x0 + h * i as f64;
            let v = self.problem.v(x);
            if v < argmin.1 {
                argmin = (x, v);
            }
            if v < e {
                last_below = Some(x);
            }
        }
        match last_below {
            Some(xb) => {
                let (mut a, mut b) = (xb, (xb + h).min(x_out));
                for _ in 0..60 {
                    let mid = 0.5 * (a + b);
                    if self.problem.v(mid) < e {
                        a = mid;
                    } else {
                        b = mid;
                    }
                }
                0.5 * (a + b)
            }
            None => argmin.0,
        }
    }

    fn unwrapped_phase(&self, seg: Segment, y0: [f64; 2], e: f64, work: &mut Work) -> Result<f64> {
        let q = |x: Complex64| Complex64::new(self.problem.v(x.re) - e, 0.0);
        let mut theta = y0[0].atan2(y0[1]);
        let y = [Complex64::new(y0[0], 0.0), Complex64::new(y0[1], 0.0)];
        let out = propagate(&[seg], y, &q, &self.tol, |_, s| {
            let raw = s[0].re.atan2(s[1].re);
            theta = raw + 2.0 * PI * ((theta - raw) / (2.0 * PI)).round();
        })?;
        work.steps += out.steps;
        work.evaluations += 1;
        Ok(theta)
    }

    /// `Θ(E)` at a given matching point (or the automatic one).
    pub fn mismatch_at(&self, e: f64, x_match: Option<f64>, work: &mut Work) -> Result<f64> {
        let (x0, p0, dp0) = self.problem.left_start(e, &self.cfg)?;
        let x_out = self.outer(e);
        let xm = x_match
            .or(self.cfg.x_match)
            .unwrap_or_else(|| self.turning_point(e, x0, x_out))
            .clamp(x0 + 1e-3 * (x_out - x0), x_out - 1e-3 * (x_out - x0));
        let theta_l = self.unwrapped_phase(Segment::line(x0, xm), [p0, dp0], e, work)?;
        let s = (self.problem.v(x_out) - e).sqrt();
        let ratio = -s - self.problem.dv(x_out) / (4.0 * (self.problem.v(x_out) - e));
        let theta_r = self.unwrapped_phase(Segment::line(x_out, xm), [1.0, ratio], e, work)?;
        Ok(theta_l - theta_r)
    }

    /// Number of levels strictly below `e`.
    pub fn count_below(&self, e: f64, work: &mut Work) -> Result<usize> {
        let t = self.mismatch_at(e, None, work)?;
        Ok((t / PI).ceil().max(0.0) as usize)
    }

    /// Level `n`, given a bracket that contains it.
    pub fn solve_level(&self, n: usize, lo: f64, hi: f64, work: &mut Work) -> Result<f64> {
        let target = n as f64 * PI;
        // coarse pass with a matching point tied to the midpoint
        let e0 = brent(lo, hi, (hi - lo) * 1e-6 + self.cfg.energy_tolerance, |e| {
            Ok(self.mismatch_at(e, None, work)? - target)
        })?;
        // fine pass at the turning point of the estimate
        let (x0, _, _) = self.problem.left_start(e0, &self.cfg)?;
        let xm = self
            .cfg
            .x_match
            .unwrap_or_else(|| self.turning_point(e0, x0, self.outer(e0)));
        let mut w = 1e-4 * e0.abs().max(1.0);
        let f = |e: f64, work: &mut Work| -> Result<f64> { Ok(self.mismatch_at(e, Some(xm), work)? - target) };
        for _ in 0..40 {
            let (a, b) = ((e0 - w).max(lo), (e0 + w).min(hi));
            let (fa, fb) = (f(a, work)?, f(b, work)?);
            if fa.signum() != fb.signum() {
                return brent(a, b, self.cfg.energy_tolerance, |e| f(e, work));
            }
            w *= 4.0;
        }
        Err(QesError::BracketFailure(format!("level {n} near {e0}")))
    }

    /// Levels `first .. first + count`, in parallel.
    pub fn levels(&self, first: usize, count: usize) -> Result<(Vec<(usize, f64)>, Work)> {
        let mut work = Work::default();
        let (lo, hi) = match self.cfg.energy_bracket {
            Some(b) => b,
            None => {
                let lo = self.problem.lower_bound();
                let mut span = 10.0f64.max(lo.abs());
                loop {
                    let hi = lo + span;
                    if self.count_below(hi, &mut work)? >= first + count {
                        break (lo, hi);
                    }
                    span *= 2.0;
                    if span > 1e8 {
                        return Err(QesError::BracketFailure(format!(
                            "fewer than {} levels below {hi}",
                            first + count
                        )));
                    }
                }
            }
        };
        let below_lo = self.count_below(lo, &mut work)?;
        let below_hi = self.count_below(hi, &mut work)?;
        let first = first.max(below_lo);
        let last = (first + count).min(below_hi);
        let found: Vec<Result<((usize, f64), Work)>> = (first..last)
            .into_par_iter()
            .map(|n| {
                let mut w = Work::default();
                let e = self.solve_level(n, lo, hi, &mut w)?;
                Ok(((n, e), w))
            })
            .collect();
        let mut out = Vec::with_capacity(found.len());
        for r in found {
            let (lv, w) = r?;
            work.evaluations += w.evaluations;
            work.steps += w.steps;
            out.push(lv);
        }
        for pair in out.windows(2) {
            if pair[1].1 - pair[0].1 <= self.cfg.energy_tolerance {
                return Err(QesError::ResolutionFailure(format!(
                    "levels {} and {} at {} and {}",
                    pair[0].0, pair[1].0, pair[0].1, pair[1].1
                )));
            }
        }
        Ok((out, work))
    }

    /// The level closest to `guess`, with its node index.
    pub fn level_near(&self, guess: f64) -> Result<((usize, f64), Work)> {
        let mut work = Work::default();
        let t = self.mismatch_at(guess, None, &mut work)?;
        let n = (t / PI).round().max(0.0) as usize;
        let mut w = 1e-3 * guess.abs().max(1.0);
        let target = n as f64 * PI;
        for _ in 0..40 {
            let (a, b) = (guess - w, guess + w);
            let fa = self.mismatch_at(a, None, &mut work)? - target;
            let fb = self.mismatch_at(b, None, &mut work)? - target;
            if fa.signum() != fb.signum() {
                let e = self.solve_level(n, a, b, &mut work)?;
                return Ok(((n, e), work));
            }
            w *= 2.0;
        }
        Err(QesError::BracketFailure(format!("no level near {guess}")))
    }
}
