//! Bender-Dunne polynomials of the sextic potential.
//!
//! `P₀ = 1`, `P_{−1} = 0` and
//!
//! ```text
//! P_n = (E − C − δ(4n+2l−1)) P_{n−1} + 16(n−1)(n + (α+2l−3)/4)(n+l−1/2) P_{n−2}.
//! ```
//!
//! At `α = α_J = −(4J+2l+1)` the coefficient of `P_{J−1}` in `P_{J+1}`
//! vanishes, so `P_J` divides every later `P_n` and its zeros are the QES
//! levels.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{QesError, Result};
use crate::model::{qes_alpha, SexticSpec};
use crate::poly::companion_roots;

/// Coefficient tables of `P_0 … P_{n_max}`, ascending powers of `E`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BDPolySequence {
    pub spec: SexticSpec,
    pub coeffs: Vec<Vec<f64>>,
}

/// Zeros of `P_J` at the QES point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QESLevels {
    pub j: usize,
    pub roots: Vec<f64>,
    /// Zeros with a nonzero imaginary part. Reported, not fatal.
    pub non_real: Vec<(f64, f64)>,
}

impl QESLevels {
    pub fn all_real(&self) -> bool {
        self.non_real.is_empty()
    }
}

fn check_l(l: f64) -> Result<()> {
    let t = -l - 1.5;
    if t >= 0.0 && t.fract() == 0.0 {
        return Err(QesError::SingularL(l));
    }
    Ok(())
}

/// `(a_n, b_n)` with `P_n = (E − a_n) P_{n−1} + b_n P_{n−2}`.
fn step(spec: &SexticSpec, n: usize) -> (f64, f64) {
    let nf = n as f64;
    let a = spec.c_shift + spec.delta * (4.0 * nf + 2.0 * spec.l - 1.0);
    let b = 16.0 * (nf - 1.0) * (nf + (spec.alpha + 2.0 * spec.l - 3.0) / 4.0) * (nf + spec.l - 0.5);
    (a, b)
}

pub fn bd_sequence(spec: &SexticSpec, n_max: usize) -> Result<BDPolySequence> {
    check_l(spec.l)?;
    let mut coeffs: Vec<Vec<f64>> = vec![vec![1.0]];
    for n in 1..=n_max {
        let (a, b) = step(spec, n);
        let prev = &coeffs[n - 1];
        let mut next = vec![0.0; n + 1];
        for (k, c) in prev.iter().enumerate() {
            next[k + 1] += c;
            next[k] -= a * c;
        }
        if n >= 2 {
            for (k, c) in coeffs[n - 2].iter().enumerate() {
                next[k] += b * c;
            }
        }
        coeffs.push(next);
    }
    Ok(BDPolySequence { spec: *spec, coeffs })
}

impl BDPolySequence {
    pub fn n_max(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Degree-major CSV: one row `n,k,coefficient` per coefficient.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| QesError::InvalidParameters(e.to_string());
        w.write_record(["n", "k", "coefficient"]).map_err(io)?;
        for (n, row) in self.coeffs.iter().enumerate() {
            for (k, c) in row.iter().enumerate() {
                w.write_record(&[n.to_string(), k.to_string(), format!("{c:.17e}")])
                    .map_err(io)?;
            }
        }
        let bytes = w.into_inner().map_err(|e| QesError::InvalidParameters(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    /// Largest coefficient difference against another table of the same size.
    pub fn max_difference(&self, other: &BDPolySequence) -> f64 {
        if self.coeffs.len() != other.coeffs.len() {
            return f64::INFINITY;
        }
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max)
    }
}

/// `(P_n(E), P_n'(E))` by running the recursion at a complex point.
pub fn bd_eval(spec: &SexticSpec, n: usize, e: Complex64) -> (Complex64, Complex64) {
    let (mut p0, mut p1) = (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
    let (mut d0, mut d1) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
    for k in 1..=n {
        let (a, b) = step(spec, k);
        let p2 = (e - a) * p1 + b * p0;
        let d2 = p1 + (e - a) * d1 + b * d0;
        p0 = p1;
        p1 = p2;
        d0 = d1;
        d1 = d2;
    }
    (p1, d1)
}

/// The `J` zeros of `P_J` with `α` set to `α_J`.
pub fn qes_roots(spec: &SexticSpec, j: usize) -> Result<QESLevels> {
    if j == 0 {
        return Err(QesError::InvalidParameters("J must be at least 1".into()));
    }
    let s = SexticSpec {
        alpha: qes_alpha(j, spec.l),
        ..*spec
    };
    let seq = bd_sequence(&s, j)?;
    let mut roots = Vec::new();
    let mut non_real = Vec::new();
    for mut z in companion_roots(&seq.coeffs[j]) {
        for _ in 0..8 {
            let (p, dp) = bd_eval(&s, j, z);
            if dp.norm() == 0.0 {
                break;
            }
            let dz = p / dp;
            z -= dz;
            if dz.norm() <= 1e-16 * z.norm().max(1.0) {
                break;
            }
        }
        // conjugate pairs only arise with a genuinely complex part
        if z.im.abs() <= 1e-9 * z.re.abs().max(1.0) {
            roots.push(z.re);
        } else {
            non_real.push((z.re, z.im));
        }
    }
    roots.sort_by(|a, b| a.total_cmp(b));
    Ok(QESLevels { j, roots, non_real })
}

/// `(α, l, C) → ((6l+3−α)/2, (α+2l−1)/4, C + δ(1+2l−α)/2)`, which leaves
/// every `P_n` unchanged.
pub fn recursion_symmetry_transform(spec: &SexticSpec) -> SexticSpec {
    let (a, l) = (spec.alpha, spec.l);
    SexticSpec {
        alpha: (6.0 * l + 3.0 - a) / 2.0,
        l: (a + 2.0 * l - 1.0) / 4.0,
        c_shift: spec.c_shift + spec.delta * (1.0 + 2.0 * l - a) / 2.0,
        ..*spec
    }
}

/// `ψ(x) = e^{−x⁴/4 − δx²/2} x^{l+1} Σ_n (−1/4)ⁿ P_n(E) x^{2n} / (n! Γ(n+l+3/2))`.
///
/// The terms `t_n` are generated by the scaled recursion
/// `2n(2n+2l+1) t_n = (δ(4n+2l−1) + C − E) t_{n−1} + (4n+2l+α−3) t_{n−2}`
/// (without powers of `x`), so no factorials are formed.
pub fn bd_wavefunction(spec: &SexticSpec, e: f64, x: f64, n_terms: usize) -> Result<f64> {
    check_l(spec.l)?;
    if x < 0.0 {
        return Err(QesError::InvalidParameters(format!("x = {x} is negative")));
    }
    if x == 0.0 {
        return Ok(if spec.l > -1.0 { 0.0 } else { f64::INFINITY });
    }
    let (d, l, a, c) = (spec.delta, spec.l, spec.alpha, spec.c_shift);
    let z = x * x;
    let mut t_prev = 0.0;
    let mut t = 1.0 / gamma(l + 1.5);
    let mut zn = 1.0;
    let mut sum = t;
    let mut quiet = 0;
    for n in 1..=n_terms {
        let nf = n as f64;
        let next = ((d * (4.0 * nf + 2.0 * l - 1.0) + c - e) * t + (4.0 * nf + 2.0 * l + a - 3.0) * t_prev)
            / (2.0 * nf * (2.0 * nf + 2.0 * l + 1.0));
        t_prev = t;
        t = next;
        zn *= z;
        let term = t * zn;
        sum += term;
        if term.abs() <= 1e-16 * sum.abs() || (t == 0.0 && t_prev == 0.0) {
            quiet += 1;
            if quiet >= 3 {
                return Ok((-z * z / 4.0 - d * z / 2.0).exp() * x.powf(l + 1.0) * sum);
            }
        } else {
            quiet = 0;
        }
        if !sum.is_finite() {
            break;
        }
    }
    Err(QesError::ConvergenceFailure(format!(
        "Bender-Dunne series at x = {x} not converged after {n_terms} terms"
    )))
}

/// `qes_roots(δ, C) = −qes_roots(−δ, −C)` as multisets, to `1e−10`.
pub fn anti_isospectral_check(spec: &SexticSpec, j: usize) -> Result<bool> {
    let a = qes_roots(spec, j)?;
    let dual = SexticSpec {
        delta: -spec.delta,
        c_shift: -spec.c_shift,
        ..*spec
    };
    let b = qes_roots(&dual, j)?;
    if !a.all_real() || !b.all_real() || a.roots.len() != b.roots.len() {
        return Ok(false);
    }
    let mut neg: Vec<f64> = b.roots.iter().map(|r| -r).collect();
    neg.sort_by(|x, y| x.total_cmp(y));
    Ok(a.roots
        .iter()
        .zip(&neg)
        .all(|(x, y)| (x - y).abs() <= 1e-10 * x.abs().max(1.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SexticBc;
    use crate::poly::eval_with_derivative;
    use proptest::prelude::*;

    fn spec(delta: f64, alpha: f64, l: f64, c: f64) -> SexticSpec {
        SexticSpec::new(delta, alpha, l, c, SexticBc::HermitianRadial)
    }

    #[test]
    fn first_polynomial() {
        let s = bd_sequence(&spec(0.0, -5.0, 0.0, 0.0), 1).unwrap();
        assert_eq!(s.coeffs[1], vec![0.0, 1.0]);
        let r = qes_roots(&spec(0.0, 0.0, 0.0, 0.0), 1).unwrap();
        assert_eq!(r.roots, vec![0.0]);
    }

    #[test]
    fn linear_root() {
        // E = C + δ(2l+3)
        let r = qes_roots(&spec(0.2, 0.0, 0.54, -0.4), 1).unwrap();
        assert!((r.roots[0] - 0.416).abs() < 1e-14);
    }

    #[test]
    fn quadratic_closed_form() {
        // δ = C = 0, J = 2: P₂ = E² + 16(2 + (α+2l−3)/4)(l+3/2), α = −(9+2l)
        let l = 0.3;
        let b = 16.0 * (2.0 + (qes_alpha(2, l) + 2.0 * l - 3.0) / 4.0) * (1.5 + l);
        let r = qes_roots(&spec(0.0, 0.0, l, 0.0), 2).unwrap();
        let w = (-b).sqrt();
        assert!((r.roots[0] + w).abs() < 1e-12 && (r.roots[1] - w).abs() < 1e-12);
    }

    #[test]
    fn forbidden_l() {
        assert_eq!(bd_sequence(&spec(0.0, 0.0, -1.5, 0.0), 3).unwrap_err(), QesError::SingularL(-1.5));
        assert!(bd_sequence(&spec(0.0, 0.0, -0.5, 0.0), 3).is_ok());
    }

    #[test]
    fn truncated_series_is_exact() {
        // J = 1, δ = l = 0: ψ = x e^{−x⁴/4}/Γ(3/2) at E = 0
        let s = spec(0.0, -5.0, 0.0, 0.0);
        for x in [0.3, 1.0, 2.0] {
            let psi = bd_wavefunction(&s, 0.0, x, 50).unwrap();
            let exact = x * (-x.powi(4) / 4.0).exp() / gamma(1.5);
            assert!((psi - exact).abs() < 1e-14, "{psi} {exact}");
        }
        assert_eq!(bd_wavefunction(&s, 0.0, 0.0, 10).unwrap(), 0.0);
    }

    #[test]
    fn series_solves_the_ode() {
        // finite-difference residual of −ψ'' + Vψ − Eψ at a generic energy
        let s = spec(0.2, 0.31, 0.54, 0.1);
        let e = 3.7;
        let h = 2e-4;
        for x in [0.5, 1.0, 1.5] {
            let f = |y: f64| bd_wavefunction(&s, e, y, 400).unwrap();
            let d2 = (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
            let v = x.powi(6) + 2.0 * s.delta * x.powi(4) + s.quadratic() * x * x + s.centrifugal() / (x * x) + s.c_shift;
            let r = -d2 + (v - e) * f(x);
            assert!(r.abs() < 1e-6 * d2.abs().max(((v - e) * f(x)).abs()), "{x}: {r}");
        }
    }

    #[test]
    fn csv_export() {
        let csv = bd_sequence(&spec(0.0, -5.0, 0.0, 0.0), 2).unwrap().to_csv().unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("n,k,coefficient"));
        assert_eq!(csv.lines().count(), 1 + 1 + 2 + 3);
    }

    #[test]
    fn anti_isospectral_examples() {
        assert!(anti_isospectral_check(&spec(0.2, 0.0, 0.54, -1.2), 3).unwrap());
        assert!(anti_isospectral_check(&spec(1.5, 0.0, 0.0, -6.0), 2).unwrap());
    }

    proptest! {
        #[test]
        fn monic_of_full_degree(d in -2.0..2.0f64, a in -10.0..10.0f64, l in -0.4..3.0f64, c in -3.0..3.0f64) {
            let seq = bd_sequence(&spec(d, a, l, c), 12).unwrap();
            for (n, row) in seq.coeffs.iter().enumerate() {
                prop_assert_eq!(row.len(), n + 1);
                prop_assert_eq!(row[n], 1.0);
            }
        }

        #[test]
        fn transform_preserves_tables(d in -2.0..2.0f64, a in -10.0..10.0f64, l in 0.0..3.0f64, c in -3.0..3.0f64) {
            let s = spec(d, a, l, c);
            let t = recursion_symmetry_transform(&s);
            prop_assume!(check_l(t.l).is_ok());
            let x = bd_sequence(&s, 10).unwrap();
            let y = bd_sequence(&t, 10).unwrap();
            let scale = x.coeffs.iter().flatten().fold(1.0f64, |m, c| m.max(c.abs()));
            prop_assert!(x.max_difference(&y) <= 1e-12 * scale);
            // involution on (α, l)
            let back = recursion_symmetry_transform(&t);
            prop_assert!((back.alpha - a).abs() < 1e-12 && (back.l - l).abs() < 1e-12);
        }

        #[test]
        fn qes_recursion_evaluation_matches_table(d in -1.0..1.0f64, l in 0.0..2.0f64, j in 1usize..7, e in -20.0..20.0f64) {
            let s = spec(d, qes_alpha(j, l), l, -2.0 * d * j as f64);
            let seq = bd_sequence(&s, j).unwrap();
            let (p, _) = bd_eval(&s, j, Complex64::new(e, 0.0));
            let (q, _) = eval_with_derivative(&seq.coeffs[j], Complex64::new(e, 0.0));
            prop_assert!((p - q).norm() <= 1e-9 * q.norm().max(1.0));
        }
    }
}
