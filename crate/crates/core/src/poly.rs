//! Small polynomial toolbox: companion-matrix roots with balancing, classical
//! orthogonal polynomial zeros, expansion of products of linear factors.
//!
//! Coefficient vectors are in ascending powers.

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Horner evaluation of a real polynomial and its derivative at a complex
/// point.
pub fn eval_with_derivative(coeffs: &[f64], x: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        dp = dp * x + p;
        p = p * x + c;
    }
    (p, dp)
}

/// Coefficients of `Π (x − r_j)`.
pub fn from_roots(roots: &[Complex64]) -> Vec<Complex64> {
    let mut c = vec![Complex64::new(1.0, 0.0)];
    for &r in roots {
        let mut next = vec![Complex64::new(0.0, 0.0); c.len() + 1];
        for (i, &ci) in c.iter().enumerate() {
            next[i + 1] += ci;
            next[i] -= r * ci;
        }
        c = next;
    }
    c
}

/// Parlett-Reinsch balancing by powers of two.
fn balance(a: &mut DMatrix<f64>) {
    let n = a.nrows();
    let radix = 2.0f64;
    let sqrdx = radix * radix;
    loop {
        let mut done = true;
        for i in 0..n {
            let mut r = 0.0;
            let mut c = 0.0;
            for j in 0..n {
                if j != i {
                    c += a[(j, i)].abs();
                    r += a[(i, j)].abs();
                }
            }
            if c != 0.0 && r != 0.0 {
                let mut g = r / radix;
                let mut f = 1.0;
                let s = c + r;
                while c < g {
                    f *= radix;
                    c *= sqrdx;
                }
                g = r * radix;
                while c > g {
                    f /= radix;
                    c /= sqrdx;
                }
                if (c + r) / f < 0.95 * s {
                    done = false;
                    let g = 1.0 / f;
                    for j in 0..n {
                        a[(i, j)] *= g;
                    }
                    for j in 0..n {
                        a[(j, i)] *= f;
                    }
                }
            }
        }
        if done {
            break;
        }
    }
}

/// All roots of a real polynomial of degree ≥ 1, from the eigenvalues of its
/// balanced companion matrix, each polished by a few Newton steps.
pub fn companion_roots(coeffs: &[f64]) -> Vec<Complex64> {
    let mut c = coeffs.to_vec();
    while c.len() > 1 && *c.last().unwrap() == 0.0 {
        c.pop();
    }
    let n = c.len() - 1;
    if n == 0 {
        return Vec::new();
    }
    let lead = c[n];
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        m[(0, i)] = -c[n - 1 - i] / lead;
    }
    for i in 1..n {
        m[(i, i - 1)] = 1.0;
    }
    balance(&mut m);
    let mut roots: Vec<Complex64> = m.complex_eigenvalues().iter().copied().collect();
    for r in roots.iter_mut() {
        *r = newton_polish(&c, *r, 8);
    }
    roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    roots
}

fn newton_polish(c: &[f64], mut x: Complex64, iters: usize) -> Complex64 {
    for _ in 0..iters {
        let (p, dp) = eval_with_derivative(c, x);
        if dp.norm() == 0.0 {
            break;
        }
        let step = p / dp;
        let next = x - step;
        let (pn, _) = eval_with_derivative(c, next);
        if pn.norm() > p.norm() {
            break;
        }
        x = next;
        if step.norm() <= 1e-16 * x.norm() {
            break;
        }
    }
    x
}

/// Coefficients of the generalized Laguerre polynomial `L_k^{(a)}`, valid for
/// any real `a`.
pub fn laguerre_coeffs(k: usize, a: f64) -> Vec<f64> {
    // L_k^{(a)}(x) = Σ_i (−1)^i binom(k + a, k − i) x^i / i!
    (0..=k)
        .map(|i| {
            let mut binom = 1.0;
            for j in 0..(k - i) {
                binom *= (k as f64 + a - j as f64) / (j + 1) as f64;
            }
            let mut fact = 1.0;
            for j in 1..=i {
                fact *= j as f64;
            }
            if i % 2 == 0 {
                binom / fact
            } else {
                -binom / fact
            }
        })
        .collect()
}

/// Zeros of `L_k^{(a)}` (complex when `a < −1`).
pub fn laguerre_zeros(k: usize, a: f64) -> Vec<Complex64> {
    companion_roots(&laguerre_coeffs(k, a))
}

/// Zeros of the physicists' Hermite polynomial `H_k`, from the Jacobi matrix.
pub fn hermite_zeros(k: usize) -> Vec<f64> {
    if k == 0 {
        return Vec::new();
    }
    let mut j = DMatrix::<f64>::zeros(k, k);
    for i in 1..k {
        let b = (i as f64 / 2.0).sqrt();
        j[(i, i - 1)] = b;
        j[(i - 1, i)] = b;
    }
    let mut z: Vec<f64> = j.symmetric_eigenvalues().iter().copied().collect();
    z.sort_by(|a, b| a.total_cmp(b));
    z
}
