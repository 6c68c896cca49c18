//! Frobenius expansions at a regular singular point at the origin.

use crate::error::{QesError, Result};
use crate::model::HyperbolicSpec;

/// Solution `x^ρ Σ a_k x^{2k}` (`a₀ = 1`) of `ψ'' = q ψ` with
/// `q = ρ(ρ−1)/x² + Σ_j u_j x^{2j}`, evaluated at `x > 0`.
///
/// Returns `(ψ, ψ')`.
pub fn frobenius(rho: f64, u: &[f64], x: f64) -> Result<(f64, f64)> {
    let z = x * x;
    let mut a: Vec<f64> = vec![1.0];
    let mut zk = 1.0;
    let mut sum = 1.0;
    let mut dsum = rho;
    let mut quiet = 0;
    for k in 1..4000usize {
        let denom = 2.0 * k as f64 * (2.0 * rho + 2.0 * k as f64 - 1.0);
        if denom == 0.0 {
            return Err(QesError::ConvergenceFailure(format!(
                "Frobenius exponent {rho} resonates at order {k}"
            )));
        }
        let mut rhs = 0.0;
        for (j, uj) in u.iter().enumerate().take(k) {
            rhs += uj * a[k - 1 - j];
        }
        let ak = rhs / denom;
        a.push(ak);
        zk *= z;
        let term = ak * zk;
        sum += term;
        dsum += (rho + 2.0 * k as f64) * term;
        let scale = sum.abs().max(dsum.abs()).max(f64::MIN_POSITIVE);
        if term.abs() <= 1e-17 * scale && k >= u.len() {
            quiet += 1;
            if quiet >= 3 {
                let xr = x.powf(rho);
                return Ok((xr * sum, xr * dsum / x));
            }
        } else {
            quiet = 0;
        }
        if !term.is_finite() {
            break;
        }
    }
    Err(QesError::ConvergenceFailure(format!(
        "series at x = {x} did not converge"
    )))
}

/// Obstruction to the series `x^ρ Σ a_k x^{2k}` at a resonant order `k`
/// (`2ρ + 2k − 1 = 0`), as a polynomial in `E` (ascending coefficients).
///
/// `u` holds the Taylor data of `V` alone, so that `q = ρ(ρ−1)/x² + (u₀ − E) +
/// Σ_{j≥1} u_j x^{2j}`. The series exists without logarithms exactly at the
/// zeros of this polynomial, which has degree `k`.
pub fn resonance_polynomial(rho: f64, u: &[f64], k: usize) -> Vec<f64> {
    // u_j as polynomials in E
    let uj = |j: usize| -> Vec<f64> {
        let c = u.get(j).copied().unwrap_or(0.0);
        if j == 0 {
            vec![c, -1.0]
        } else {
            vec![c]
        }
    };
    let mul = |a: &[f64], b: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        out
    };
    let rhs = |a: &[Vec<f64>], k: usize| -> Vec<f64> {
        let mut acc = vec![0.0; k + 1];
        for j in 0..k {
            for (i, c) in mul(&uj(j), &a[k - 1 - j]).into_iter().enumerate() {
                acc[i] += c;
            }
        }
        acc
    };
    let mut a: Vec<Vec<f64>> = vec![vec![1.0]];
    for n in 1..k {
        let denom = 2.0 * n as f64 * (2.0 * rho + 2.0 * n as f64 - 1.0);
        a.push(rhs(&a, n).into_iter().map(|c| c / denom).collect());
    }
    rhs(&a, k)
}

/// Taylor data of `V(x) − E` for the hyperbolic potential in powers of `x²`:
/// returns `(c, u)` with `V − E = c/x² + Σ_j u_j x^{2j}` (first `n` terms).
pub fn hyperbolic_taylor(spec: &HyperbolicSpec, m: f64, e: f64, n: usize) -> (f64, Vec<f64>) {
    let n = n.max(2);
    // inverse factorials 1/(2k)! and 1/(2k+2)!
    let mut inv_fact = vec![1.0f64; 2 * n + 4];
    for k in 1..inv_fact.len() {
        inv_fact[k] = inv_fact[k - 1] / k as f64;
    }
    let cosh: Vec<f64> = (0..n).map(|k| inv_fact[2 * k]).collect();
    let sinh2: Vec<f64> = (0..n)
        .map(|k| if k == 0 { 0.0 } else { 2f64.powi(2 * k as i32 - 1) * inv_fact[2 * k] })
        .collect();
    // (cosh x − 1)/x² and cosh x + 1
    let s: Vec<f64> = (0..n + 1).map(|k| inv_fact[2 * k + 2]).collect();
    let t = invert_series(&s, n + 1);
    let d: Vec<f64> = (0..n).map(|k| if k == 0 { 2.0 } else { inv_fact[2 * k] }).collect();
    let dinv = invert_series(&d, n);

    let (b, c, g) = (spec.b_pole, spec.c_pole, spec.gamma);
    let ag = spec.a_lin * g;
    let pb = spec.b_pole_strength();
    let pc = spec.c_pole_strength();
    let mut u = vec![0.0; n];
    u[0] = m * (m - b - c - 1.0) + 0.25 * (b + c + 1.0).powi(2) + ag * (c - b) / 4.0 + spec.shift - e;
    for k in 0..n {
        u[k] += (m * ag / 2.0 - ag * (b + c) / 4.0) * cosh[k] + ag * ag / 16.0 * sinh2[k]
            + pb * t[k + 1]
            - pc * dinv[k];
    }
    (pb * t[0], u)
}

fn invert_series(s: &[f64], n: usize) -> Vec<f64> {
    let mut t = vec![0.0; n];
    t[0] = 1.0 / s[0];
    for k in 1..n {
        let mut acc = 0.0;
        for j in 1..=k.min(s.len() - 1) {
            acc += s[j] * t[k - j];
        }
        t[k] = -acc / s[0];
    }
    t
}
