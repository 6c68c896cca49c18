//! Gaudin-type Bethe ansatz equations.
//!
//! Every system handled here has the canonical form
//!
//! ```text
//! f(v_j) + Σ_{k≠j} 2/(v_j − v_k) = 0,   f(v) = Σ_i c_i/(v − z_i) + a₁v + a₀,
//! ```
//!
//! and is solved by deforming `a₀` from a large value, where the roots sit in
//! clusters given by Laguerre zeros (around each pole) and Hermite zeros (far
//! out along the line `a₁v + a₀ = 0`). Each distribution of the M roots over
//! the clusters is one solution class.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{QesError, Result};
use crate::model::{HyperbolicBranch, HyperbolicModelSpec, SexticBranch, SexticModelSpec};
use crate::poly::{from_roots, hermite_zeros, laguerre_zeros};

/// Default certification threshold on the BAE residual.
pub const CERTIFICATION_TOLERANCE: f64 = 1e-10;
/// Below this separation two roots count as coincident.
pub const DEGENERACY_THRESHOLD: f64 = 1e-8;

/// `A + B/(v + γ/2) + C/(v − γ/2) = Σ_{k≠j} 2/(v_j − v_k)` with `ℰ = AΣv`,
/// the QES eigenvalue of `V(x; A, B, C, γ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenericBaeSpec {
    pub a_lin: f64,
    pub b_res: f64,
    pub c_res: f64,
    pub gamma: f64,
    pub m_roots: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BaeModel {
    Sextic(SexticModelSpec),
    Hyperbolic(HyperbolicModelSpec),
    Generic(GenericBaeSpec),
}

fn roots_as_pairs<S: Serializer>(roots: &[Complex64], s: S) -> std::result::Result<S::Ok, S::Error> {
    let pairs: Vec<[f64; 2]> = roots.iter().map(|r| [r.re, r.im]).collect();
    pairs.serialize(s)
}

fn roots_from_pairs<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Vec<Complex64>, D::Error> {
    let pairs: Vec<[f64; 2]> = Vec::deserialize(d)?;
    Ok(pairs.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
}

/// A certified solution of one Bethe ansatz system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetheSolution {
    pub model: BaeModel,
    #[serde(serialize_with = "roots_as_pairs", deserialize_with = "roots_from_pairs")]
    pub roots: Vec<Complex64>,
    /// Model energy (shifted as appropriate for the model).
    pub energy: f64,
    pub residual: f64,
}

/// The canonical system for a model.
#[derive(Debug, Clone, PartialEq)]
pub struct Gaudin {
    pub poles: Vec<(f64, f64)>,
    pub a1: f64,
    pub a0: f64,
    pub m: usize,
}

impl Gaudin {
    pub fn sextic(model: &SexticModelSpec) -> Self {
        let c = model.coefficients();
        Self {
            poles: vec![(0.0, 2.0 * c.kappa)],
            a1: c.xi,
            a0: c.a / c.b,
            m: model.m_roots as usize,
        }
    }

    pub fn hyperbolic(model: &HyperbolicModelSpec) -> Self {
        let (p, q, e, g) = (model.p as f64, model.q as f64, model.epsilon, model.g);
        let poles = match model.branch {
            HyperbolicBranch::Alpha => vec![(-e, p + 1.0), (e, q + 1.0)],
            HyperbolicBranch::Beta => vec![(-e, -q), (e, -p)],
        };
        Self {
            poles,
            a1: 0.0,
            a0: -2.0 / g,
            m: model.m_roots as usize,
        }
    }

    pub fn generic(spec: &GenericBaeSpec) -> Self {
        Self {
            poles: vec![(-spec.gamma / 2.0, -spec.b_res), (spec.gamma / 2.0, -spec.c_res)],
            a1: 0.0,
            a0: -spec.a_lin,
            m: spec.m_roots as usize,
        }
    }

    fn f(&self, v: Complex64, a0: Complex64) -> Complex64 {
        let mut s = a0 + self.a1 * v;
        for &(z, c) in &self.poles {
            if c != 0.0 {
                s += c / (v - z);
            }
        }
        s
    }

    fn df(&self, v: Complex64) -> Complex64 {
        let mut s = Complex64::new(self.a1, 0.0);
        for &(z, c) in &self.poles {
            if c != 0.0 {
                s -= c / ((v - z) * (v - z));
            }
        }
        s
    }

    /// `F_j(v)` at a given constant term.
    pub fn defects(&self, v: &[Complex64], a0: Complex64) -> Vec<Complex64> {
        (0..v.len())
            .map(|j| {
                let mut s = self.f(v[j], a0);
                for k in 0..v.len() {
                    if k != j {
                        s += 2.0 / (v[j] - v[k]);
                    }
                }
                s
            })
            .collect()
    }

    fn jacobian(&self, v: &[Complex64]) -> DMatrix<Complex64> {
        let m = v.len();
        let mut jac = DMatrix::<Complex64>::zeros(m, m);
        for j in 0..m {
            jac[(j, j)] = self.df(v[j]);
            for k in 0..m {
                if k != j {
                    let t = 2.0 / ((v[j] - v[k]) * (v[j] - v[k]));
                    jac[(j, k)] = t;
                    jac[(j, j)] -= t;
                }
            }
        }
        jac
    }

    fn newton_step(&self, v: &[Complex64], a0: Complex64) -> Option<Vec<Complex64>> {
        let rhs = DVector::from_vec(self.defects(v, a0));
        let dx = self.jacobian(v).lu().solve(&rhs)?;
        Some(v.iter().zip(dx.iter()).map(|(x, d)| x - d).collect())
    }

    /// Max defect at the target constant term.
    pub fn residual(&self, v: &[Complex64]) -> f64 {
        self.defects(v, Complex64::new(self.a0, 0.0))
            .iter()
            .map(|d| d.norm())
            .fold(0.0, f64::max)
    }

    /// Starting configurations at constant term `a0`: one per way of placing
    /// the roots into clusters.
    fn starts(&self, a0: f64) -> Vec<Vec<Complex64>> {
        let active: Vec<(f64, f64)> = self.poles.iter().copied().filter(|p| p.1 != 0.0).collect();
        let far = self.a1 != 0.0;
        let slots = active.len() + usize::from(far);
        let mut out = Vec::new();
        for counts in compositions(self.m, slots) {
            let mut v = Vec::with_capacity(self.m);
            for (i, &(z, c)) in active.iter().enumerate() {
                for w in laguerre_zeros(counts[i], c - 1.0) {
                    v.push(z - w / a0);
                }
            }
            if far {
                let k = counts[slots - 1];
                let centre = -a0 / self.a1;
                let tau = Complex64::new(-2.0 / self.a1, 0.0).sqrt();
                for x in hermite_zeros(k) {
                    v.push(centre + tau * x);
                }
            }
            out.push(v);
        }
        out
    }

    /// Track one start from `a0_start` to the target constant term.
    fn track(&self, start: Vec<Complex64>, a0_start: f64, max_ds: f64) -> Result<Vec<Complex64>> {
        let scale = self.a0.abs().max(1.0);
        let a0_of = |s: f64| {
            Complex64::new(self.a0 + (a0_start - self.a0) * (1.0 - s), 0.37 * scale * s * (1.0 - s) * 4.0)
        };
        let mut v = start;
        // pull the asymptotic start onto the exact path
        for _ in 0..50 {
            match self.newton_step(&v, a0_of(0.0)) {
                Some(n) => v = n,
                None => break,
            }
        }
        let mut s = 0.0;
        let mut ds = 1e-3f64.min(max_ds);
        let mut prev: Option<(f64, Vec<Complex64>)> = None;
        while s < 1.0 {

            let s_next = (s + ds).min(1.0);
            // secant predictor, Euler-free first step
            let guess: Vec<Complex64> = match &prev {
                Some((sp, vp)) => v
                    .iter()
                    .zip(vp)
                    .map(|(a, b)| a + (a - b) * ((s_next - s) / (s - sp)))
                    .collect(),
                None => v.clone(),
            };
            let a0 = a0_of(s_next);
            let mut w = guess;
            let mut ok = false;
            let mut last = f64::INFINITY;
            for _ in 0..8 {
                let Some(n) = self.newton_step(&w, a0) else { break };
                let step: f64 = n.iter().zip(&w).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
                let size: f64 = n.iter().map(|x| x.norm()).fold(1e-300, f64::max);
                w = n;
                if step > 0.5 * last {
                    break;
                }
                last = step;
                if step <= 1e-11 * size.max(1.0) {
                    ok = true;
                    break;
                }
            }
            // a corrector that moves a root by a large fraction of the
            // distance to its nearest neighbour signals a jump to another path
            if ok && ds > 1e-9 {
                let jumped = w.iter().zip(&v).enumerate().any(|(i, (a, b))| {
                    let near = v
                        .iter()
                        .enumerate()
                        .filter(|&(k, _)| k != i)
                        .map(|(_, c)| (b - c).norm())
                        .fold(f64::INFINITY, f64::min);
                    (a - b).norm() > 0.3 * near.max(1e-6 * scale)
                });
                ok = !jumped;
            }
            if ok {
                prev = Some((s, std::mem::replace(&mut v, w)));
                s = s_next;
                ds = (ds * 1.5).min(max_ds);
            } else {
                ds *= 0.25;
                if ds < 1e-12 {
                    return Err(QesError::ContinuationFailure(format!("step underflow at s = {s}")));
                }
            }
        }
        Ok(v)
    }

    /// All solution classes, certified.
    pub fn solve(&self, tol: f64) -> Result<Vec<Vec<Complex64>>> {
        if self.m == 0 {
            return Ok(vec![Vec::new()]);
        }
        let spread = self.poles.iter().map(|p| p.0.abs()).fold(0.0, f64::max);
        let a0_start = self.a0 + 1e3 * (1.0 + self.a0.abs() + spread) * (self.m as f64).max(1.0);
        let starts = self.starts(a0_start);
        let mut max_ds = 0.05;
        for _attempt in 0..4 {
            let mut sols = Vec::with_capacity(starts.len());
            for st in &starts {
                let v = self.track(st.clone(), a0_start, max_ds)?;
                sols.push(self.polish(v, tol)?);
            }
            if all_distinct(&sols) {
                return Ok(sols);
            }
            max_ds *= 0.2;
        }
        Err(QesError::ContinuationFailure(
            "paths keep converging onto the same solution".into(),
        ))
    }

    fn polish(&self, mut v: Vec<Complex64>, tol: f64) -> Result<Vec<Complex64>> {
        let a0 = Complex64::new(self.a0, 0.0);
        let mut best = self.residual(&v);
        for _ in 0..20 {
            let Some(n) = self.newton_step(&v, a0) else { break };
            let r = self.residual(&n);
            if r >= best {
                break;
            }
            v = n;
            best = r;
        }
        let sep = min_separation(&v);
        if sep < DEGENERACY_THRESHOLD {
            return Err(QesError::DegenerateConfiguration(sep));
        }
        if best > tol {
            return Err(QesError::CertificationFailure {
                residual: best,
                tolerance: tol,
            });
        }
        v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        Ok(v)
    }
}

fn compositions(m: usize, slots: usize) -> Vec<Vec<usize>> {
    if slots == 0 {
        return if m == 0 { vec![vec![]] } else { vec![] };
    }
    if slots == 1 {
        return vec![vec![m]];
    }
    let mut out = Vec::new();
    for k in 0..=m {
        for mut rest in compositions(m - k, slots - 1) {
            rest.insert(0, k);
            out.push(rest);
        }
    }
    out
}

fn min_separation(v: &[Complex64]) -> f64 {
    let mut sep = f64::INFINITY;
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            sep = sep.min((v[i] - v[j]).norm());
        }
    }
    sep
}

fn all_distinct(sols: &[Vec<Complex64>]) -> bool {
    for i in 0..sols.len() {
        for j in i + 1..sols.len() {
            let d: f64 = sols[i]
                .iter()
                .zip(&sols[j])
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            if d < 1e-6 {
                return false;
            }
        }
    }
    true
}

fn sum_re(v: &[Complex64]) -> f64 {
    v.iter().map(|x| x.re).sum()
}

/// All solution classes of the three-boson model's Bethe equations, with
/// model energies.
pub fn solve_sextic_bae(model: &SexticModelSpec) -> Result<Vec<BetheSolution>> {
    let g = Gaudin::sextic(model);
    let sols = g.solve(CERTIFICATION_TOLERANCE)?;
    let expected = model.sector_dimension();
    if sols.len() != expected {
        return Err(QesError::Incomplete {
            found: sols.len(),
            expected,
        });
    }
    let c = model.coefficients();
    let mut out: Vec<BetheSolution> = sols
        .into_iter()
        .map(|roots| {
            let gaudin = c.a * (model.m() + c.kappa) + c.xi * c.b * sum_re(&roots);
            BetheSolution {
                model: BaeModel::Sextic(*model),
                residual: g.residual(&roots),
                energy: model.model_energy(gaudin),
                roots,
            }
        })
        .collect();
    out.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    Ok(out)
}

/// All solution classes of one of the four-boson model's Bethe equations,
/// with model energies.
pub fn solve_hyperbolic_bae(model: &HyperbolicModelSpec) -> Result<Vec<BetheSolution>> {
    model.check_sector()?;
    let g = Gaudin::hyperbolic(model);
    let sols = g.solve(CERTIFICATION_TOLERANCE)?;
    let expected = model.sector_dimension();
    if sols.len() != expected {
        return Err(QesError::Incomplete {
            found: sols.len(),
            expected,
        });
    }
    let (p, q, m, e, gg) = (model.p as f64, model.q as f64, model.m_roots as f64, model.epsilon, model.g);
    let constant = match model.branch {
        HyperbolicBranch::Alpha => gg * (p + m) * (q + m),
        HyperbolicBranch::Beta => gg * (m - p) * (m - q) - gg * m,
    } + (p - q) * e;
    let mut out: Vec<BetheSolution> = sols
        .into_iter()
        .map(|roots| BetheSolution {
            model: BaeModel::Hyperbolic(*model),
            residual: g.residual(&roots),
            energy: constant - 2.0 * sum_re(&roots),
            roots,
        })
        .collect();
    out.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    Ok(out)
}

/// All solution classes of the generic two-pole system, with `ℰ = AΣv`.
pub fn solve_generic_bae(spec: &GenericBaeSpec) -> Result<Vec<BetheSolution>> {
    let g = Gaudin::generic(spec);
    let sols = g.solve(CERTIFICATION_TOLERANCE)?;
    let mut out: Vec<BetheSolution> = sols
        .into_iter()
        .map(|roots| BetheSolution {
            model: BaeModel::Generic(*spec),
            residual: g.residual(&roots),
            energy: spec.a_lin * sum_re(&roots),
            roots,
        })
        .collect();
    out.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    Ok(out)
}

fn gaudin_of(model: &BaeModel) -> Gaudin {
    match model {
        BaeModel::Sextic(m) => Gaudin::sextic(m),
        BaeModel::Hyperbolic(m) => Gaudin::hyperbolic(m),
        BaeModel::Generic(m) => Gaudin::generic(m),
    }
}

/// Max over `j` of the defect of the governing equations.
pub fn bae_residual(sol: &BetheSolution) -> f64 {
    gaudin_of(&sol.model).residual(&sol.roots)
}

/// Real coefficients (ascending) of `Π (y − v_j)` with `y = x²` for the
/// sextic model, or of `Π (u + v_j)` with `u = (γ/2)cosh x` otherwise.
/// Imaginary parts left over from conjugate pairs are dropped.
pub fn roots_to_polynomial(sol: &BetheSolution) -> Vec<f64> {
    let shifted: Vec<Complex64> = match sol.model {
        BaeModel::Sextic(_) => sol.roots.clone(),
        _ => sol.roots.iter().map(|v| -v).collect(),
    };
    from_roots(&shifted).iter().map(|c| c.re).collect()
}

/// Largest imaginary part among the coefficients of [`roots_to_polynomial`].
pub fn polynomial_imaginary_defect(sol: &BetheSolution) -> f64 {
    let shifted: Vec<Complex64> = match sol.model {
        BaeModel::Sextic(_) => sol.roots.clone(),
        _ => sol.roots.iter().map(|v| -v).collect(),
    };
    from_roots(&shifted).iter().map(|c| c.im.abs()).fold(0.0, f64::max)
}

/// Whether the root multiset is closed under complex conjugation.
pub fn is_conjugation_closed(roots: &[Complex64], tol: f64) -> bool {
    let mut used = vec![false; roots.len()];
    for r in roots {
        let c = r.conj();
        match (0..roots.len()).find(|&i| !used[i] && (roots[i] - c).norm() <= tol) {
            Some(i) => used[i] = true,
            None => return false,
        }
    }
    true
}

/// Branch-tag helper for sextic models.
pub fn sextic_branch(model: &SexticModelSpec) -> SexticBranch {
    model.branch
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_solution_energy() {
        let m = SexticModelSpec::new(1.0, 2, 0, SexticBranch::P2);
        let s = solve_sextic_bae(&m).unwrap();
        assert_eq!(s.len(), 1);
        assert!(s[0].roots.is_empty());
        assert!((s[0].energy + 2.0).abs() < 1e-15);
    }

    #[test]
    fn one_root_matches_quadratic() {
        for &(eps, q) in &[(0.3, 1u32), (-1.0, 0), (0.0, 3)] {
            let m = SexticModelSpec::new(eps, q, 1, SexticBranch::P2);
            let s = solve_sextic_bae(&m).unwrap();
            assert_eq!(s.len(), 2);
            let disc = (9.0 * eps * eps + 4.0 * (q as f64 + 1.0)).sqrt();
            let mut exact = [(-3.0 * eps - disc) / 2.0, (-3.0 * eps + disc) / 2.0];
            let mut got: Vec<f64> = s.iter().map(|x| x.roots[0].re).collect();
            got.sort_by(|a, b| a.total_cmp(b));
            exact.sort_by(|a, b| a.total_cmp(b));
            for (g, e) in got.iter().zip(exact) {
                assert!((g - e).abs() < 1e-12);
            }
            for sol in &s {
                assert!(bae_residual(sol) < 1e-14);
            }
        }
    }

    #[test]
    fn perturbed_root_has_residual() {
        let m = SexticModelSpec::new(0.3, 1, 1, SexticBranch::P2);
        let mut s = solve_sextic_bae(&m).unwrap().remove(0);
        s.roots[0] += 1e-6;
        assert!(bae_residual(&s) > 0.0);
    }

    #[test]
    fn alpha_reference_energy() {
        let m = HyperbolicModelSpec::alpha(0.4, 1, 0, 0);
        let s = solve_hyperbolic_bae(&m).unwrap();
        assert!((s[0].energy - 0.4).abs() < 1e-15);
        let m = HyperbolicModelSpec::beta(0.4, 2, 1, 0);
        let s = solve_hyperbolic_bae(&m).unwrap();
        assert!((s[0].energy - 2.4).abs() < 1e-15);
    }

    #[test]
    fn beta_constraint() {
        let m = HyperbolicModelSpec::beta(0.4, 1, 3, 2);
        assert!(matches!(solve_hyperbolic_bae(&m), Err(QesError::InvalidSector(_))));
    }

    #[test]
    fn polynomial_of_single_root() {
        let m = SexticModelSpec::new(0.3, 1, 1, SexticBranch::P2);
        let s = solve_sextic_bae(&m).unwrap();
        let v = s[0].roots[0].re;
        let c = roots_to_polynomial(&s[0]);
        assert!((c[0] + v).abs() < 1e-15 && (c[1] - 1.0).abs() < 1e-15);
        let empty = solve_sextic_bae(&SexticModelSpec::new(0.3, 1, 0, SexticBranch::P2)).unwrap();
        assert_eq!(roots_to_polynomial(&empty[0]), vec![1.0]);
    }

    #[test]
    fn serialized_roots_are_pairs() {
        let m = SexticModelSpec::new(0.3, 1, 2, SexticBranch::P2);
        let s = solve_sextic_bae(&m).unwrap();
        let j = serde_json::to_value(&s[0]).unwrap();
        assert_eq!(j["roots"].as_array().unwrap().len(), 2);
        assert_eq!(j["roots"][0].as_array().unwrap().len(), 2);
        let back: BetheSolution = serde_json::from_value(j).unwrap();
        assert_eq!(back.roots, s[0].roots);
    }

    #[test]
    fn compositions_count() {
        assert_eq!(compositions(3, 2).len(), 4);
        assert_eq!(compositions(0, 2), vec![vec![0, 0]]);
    }
}
