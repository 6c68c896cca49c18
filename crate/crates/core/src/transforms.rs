//! Spectral-equivalence constructions: the supersymmetric pair of
//! nonsingular hyperbolic potentials, closed-form QES wavefunctions, and the
//! Darboux-Crum transformation that deletes all QES levels of a radial
//! sextic potential.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::bethe::{roots_to_polynomial, BaeModel, BetheSolution, GenericBaeSpec};
use crate::error::{QesError, Result};
use crate::model::{
    qes_alpha, sextic_energy_map, sextic_potentials, HyperbolicBc, HyperbolicModelSpec, HyperbolicSpec, SexticBc,
    SexticBranch, SexticModelSpec, SexticSpec,
};
use crate::schrodinger::{hyperbolic_full_line_eigenvalues, hyperbolic_potential, sextic_potential, ShootingConfig};

/// Pointwise bound on `Q₋ψ₀`, relative to the largest `|ψ₀|` on the grid.
pub const ZERO_MODE_TOLERANCE: f64 = 1e-10;
/// Pointwise bound on the partner-potential identities.
pub const PARTNER_TOLERANCE: f64 = 1e-9;
/// Level-wise bound in the isospectrality check.
pub const ISOSPECTRAL_TOLERANCE: f64 = 1e-7;
/// Max-norm bound between the Crum potential and its closed form.
pub const CRUM_TOLERANCE: f64 = 1e-6;

/// Largest deviation on a grid and where it occurs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MismatchReport {
    pub max_deviation: f64,
    pub at: f64,
}

impl MismatchReport {
    fn from_pairs<I: IntoIterator<Item = (f64, f64)>>(pairs: I) -> Self {
        let mut out = Self {
            max_deviation: 0.0,
            at: f64::NAN,
        };
        for (x, d) in pairs {
            if !(d.abs() <= out.max_deviation) {
                out = Self {
                    max_deviation: d.abs(),
                    at: x,
                };
            }
        }
        out
    }

    fn over<F: Fn(f64) -> f64>(grid: &[f64], f: F) -> Self {
        Self::from_pairs(grid.iter().map(|&x| (x, f(x))))
    }

    fn require(self, tol: f64, what: &str) -> Result<Self> {
        if self.max_deviation <= tol {
            Ok(self)
        } else {
            Err(QesError::Mismatch(format!(
                "{what}: deviation {:e} at x = {} exceeds {tol:e}",
                self.max_deviation, self.at
            )))
        }
    }
}

/// `W = ψ₀'/ψ₀` for `ψ₀ = (cosh x + 1)^{(M+1)/2} e^{(γ/2) cosh x}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuperPotential {
    pub m_param: f64,
    pub gamma: f64,
}

impl SuperPotential {
    pub fn new(m_param: f64, gamma: f64) -> Self {
        Self { m_param, gamma }
    }

    fn a(&self) -> f64 {
        (self.m_param + 1.0) / 2.0
    }

    pub fn w(&self, x: f64) -> f64 {
        let (ch, sh) = (x.cosh(), x.sinh());
        self.a() * sh / (ch + 1.0) + self.gamma / 2.0 * sh
    }

    pub fn dw(&self, x: f64) -> f64 {
        let ch = x.cosh();
        self.a() / (ch + 1.0) + self.gamma / 2.0 * ch
    }

    pub fn zero_mode(&self, x: f64) -> f64 {
        let ch = x.cosh();
        (ch + 1.0).powf(self.a()) * (self.gamma / 2.0 * ch).exp()
    }

    /// `ψ₀'` by the product rule on the two factors.
    pub fn zero_mode_derivative(&self, x: f64) -> f64 {
        let (ch, sh) = (x.cosh(), x.sinh());
        let a = self.a();
        let e = (self.gamma / 2.0 * ch).exp();
        a * (ch + 1.0).powf(a - 1.0) * sh * e + (ch + 1.0).powf(a) * self.gamma / 2.0 * sh * e
    }

    /// `−d² + W² + W'`, which annihilates `ψ₀`:
    /// `V(x; 2, −3/2, M − 1/2, γ) − γ(M+1)`.
    pub fn lower_partner(&self) -> HyperbolicSpec {
        let m = self.m_param;
        HyperbolicSpec::new(
            2.0,
            -1.5,
            m - 0.5,
            self.gamma,
            -self.gamma * (m + 1.0),
            HyperbolicBc::RealLineEven,
        )
    }

    /// `−d² + W² − W'`: `V(x; 2, −1/2, M + 1/2, γ) + M − γ(M+1)`.
    pub fn upper_partner(&self) -> HyperbolicSpec {
        let m = self.m_param;
        HyperbolicSpec::new(
            2.0,
            -0.5,
            m + 0.5,
            self.gamma,
            m - self.gamma * (m + 1.0),
            HyperbolicBc::RealLineEven,
        )
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma < 0.0 {
        Ok(())
    } else {
        Err(QesError::InvalidParameters(format!(
            "the zero mode needs gamma < 0, got {gamma}"
        )))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SusyPartnerReport {
    pub superpotential: SuperPotential,
    /// `|ψ₀' − Wψ₀| / max|ψ₀|`.
    pub zero_mode: MismatchReport,
    /// `W² + W'` against the lower partner.
    pub lower_identity: MismatchReport,
    /// `W² − W'` against the upper partner.
    pub upper_identity: MismatchReport,
}

/// Checks `Q₋ψ₀ = 0` and that `W² ± W'` reproduce the two partner
/// potentials on `grid`.
pub fn susy_partner_check(m_param: f64, gamma: f64, grid: &[f64]) -> Result<SusyPartnerReport> {
    check_gamma(gamma)?;
    if grid.is_empty() {
        return Err(QesError::InvalidParameters("empty grid".into()));
    }
    let sp = SuperPotential::new(m_param, gamma);
    let scale = grid.iter().map(|&x| sp.zero_mode(x)).fold(0.0, f64::max);
    let zero_mode = MismatchReport::over(grid, |x| {
        (sp.zero_mode_derivative(x) - sp.w(x) * sp.zero_mode(x)) / scale
    })
    .require(ZERO_MODE_TOLERANCE, "zero mode")?;
    let (lo, up) = (sp.lower_partner(), sp.upper_partner());
    let lower_identity = MismatchReport::over(grid, |x| {
        sp.w(x).powi(2) + sp.dw(x) - hyperbolic_potential(&lo, m_param, x.into()).re
    })
    .require(PARTNER_TOLERANCE, "W^2 + W'")?;
    let upper_identity = MismatchReport::over(grid, |x| {
        sp.w(x).powi(2) - sp.dw(x) - hyperbolic_potential(&up, m_param, x.into()).re
    })
    .require(PARTNER_TOLERANCE, "W^2 - W'")?;
    Ok(SusyPartnerReport {
        superpotential: sp,
        zero_mode,
        lower_identity,
        upper_identity,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SusyIsospectralityReport {
    pub superpotential: SuperPotential,
    pub zero_mode_energy: f64,
    /// Lower partner, zero mode first.
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub max_deviation: f64,
}

/// Solves both partners on the full line and matches the lower spectrum,
/// minus its zero mode, against the upper one level by level.
pub fn susy_isospectrality_check(m_param: f64, gamma: f64, n_levels: usize) -> Result<SusyIsospectralityReport> {
    check_gamma(gamma)?;
    let sp = SuperPotential::new(m_param, gamma);
    let (lo, up) = (sp.lower_partner(), sp.upper_partner());
    let (a, b) = rayon::join(
        || hyperbolic_full_line_eigenvalues(&lo, m_param, &ShootingConfig::with_levels(n_levels + 1)),
        || hyperbolic_full_line_eigenvalues(&up, m_param, &ShootingConfig::with_levels(n_levels)),
    );
    let (lower, upper) = (a?.energies(), b?.energies());
    let zero = *lower.first().ok_or(QesError::MissingZeroMode(f64::NAN))?;
    if zero.abs() > ISOSPECTRAL_TOLERANCE {
        return Err(QesError::MissingZeroMode(zero));
    }
    let mut max_deviation = 0.0f64;
    for (index, (&l, &r)) in lower[1..].iter().zip(&upper).enumerate() {
        let d = (l - r).abs();
        if d > ISOSPECTRAL_TOLERANCE {
            return Err(QesError::LevelMismatch { index, left: l, right: r });
        }
        max_deviation = max_deviation.max(d);
    }
    Ok(SusyIsospectralityReport {
        superpotential: sp,
        zero_mode_energy: zero,
        lower,
        upper,
        max_deviation,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    Sextic,
    Hyperbolic,
}

/// The non-polynomial factor `F` of a QES wavefunction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family")]
pub enum Prefactor {
    /// `x^power exp(quadratic x² + quartic x⁴)`, polynomial in `x²`.
    Sextic { power: f64, quadratic: f64, quartic: f64 },
    /// `(cosh x − 1)^minus (cosh x + 1)^plus exp(exponent cosh x)`,
    /// polynomial in `(γ/2) cosh x`.
    Hyperbolic {
        minus: f64,
        plus: f64,
        exponent: f64,
        gamma: f64,
    },
}

impl Prefactor {
    /// `L = F'/F` and `L'`.
    fn log_derivatives(&self, x: f64) -> (f64, f64) {
        match *self {
            Prefactor::Sextic {
                power,
                quadratic,
                quartic,
            } => (
                power / x + 2.0 * quadratic * x + 4.0 * quartic * x.powi(3),
                -power / (x * x) + 2.0 * quadratic + 12.0 * quartic * x * x,
            ),
            Prefactor::Hyperbolic {
                minus, plus, exponent, ..
            } => {
                let (ch, sh) = (x.cosh(), x.sinh());
                (
                    minus * sh / (ch - 1.0) + plus * sh / (ch + 1.0) + exponent * sh,
                    -minus / (ch - 1.0) + plus / (ch + 1.0) + exponent * ch,
                )
            }
        }
    }

    fn value(&self, x: f64) -> f64 {
        match *self {
            Prefactor::Sextic {
                power,
                quadratic,
                quartic,
            } => x.powf(power) * (quadratic * x * x + quartic * x.powi(4)).exp(),
            Prefactor::Hyperbolic {
                minus, plus, exponent, ..
            } => {
                let ch = x.cosh();
                (ch - 1.0).powf(minus) * (ch + 1.0).powf(plus) * (exponent * ch).exp()
            }
        }
    }

    fn close_to(&self, other: &Prefactor) -> bool {
        let near = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0);
        match (*self, *other) {
            (
                Prefactor::Sextic {
                    power: a,
                    quadratic: b,
                    quartic: c,
                },
                Prefactor::Sextic {
                    power: d,
                    quadratic: e,
                    quartic: f,
                },
            ) => near(a, d) && near(b, e) && near(c, f),
            _ => false,
        }
    }
}

/// The Schrödinger problem a wavefunction belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum QesProblem {
    Sextic(SexticSpec),
    Hyperbolic { spec: HyperbolicSpec, m: f64 },
}

impl QesProblem {
    pub fn potential(&self, x: f64) -> f64 {
        match self {
            QesProblem::Sextic(s) => sextic_potential(s, x.into()).re,
            QesProblem::Hyperbolic { spec, m } => hyperbolic_potential(spec, *m, x.into()).re,
        }
    }
}

/// `ψ = F · P` with `F` a [`Prefactor`] and `P` a polynomial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QESWavefunction {
    pub prefactor: Prefactor,
    /// Ascending coefficients of `P` in `x²` or in `(γ/2) cosh x`.
    pub poly: Vec<f64>,
    pub problem: QesProblem,
    /// Eigenvalue of `problem` carried by this function.
    pub energy: f64,
}

/// `p, p', p''` at `t`.
fn poly_derivs(c: &[f64], t: f64) -> [f64; 3] {
    let (mut p, mut dp, mut ddp) = (0.0, 0.0, 0.0);
    for &a in c.iter().rev() {
        ddp = ddp * t + 2.0 * dp;
        dp = dp * t + p;
        p = p * t + a;
    }
    [p, dp, ddp]
}

impl QESWavefunction {
    pub fn family(&self) -> Family {
        match self.prefactor {
            Prefactor::Sextic { .. } => Family::Sextic,
            Prefactor::Hyperbolic { .. } => Family::Hyperbolic,
        }
    }

    /// `(ψ, ψ', ψ'') / F`, free of the exponential factor.
    pub fn reduced(&self, x: f64) -> [f64; 3] {
        let (l, dl) = self.prefactor.log_derivatives(x);
        let (p, px, pxx) = match self.prefactor {
            Prefactor::Sextic { .. } => {
                let [p, py, pyy] = poly_derivs(&self.poly, x * x);
                (p, 2.0 * x * py, 2.0 * py + 4.0 * x * x * pyy)
            }
            Prefactor::Hyperbolic { gamma, .. } => {
                let (ch, sh) = (x.cosh(), x.sinh());
                let g = gamma / 2.0;
                let [p, pu, puu] = poly_derivs(&self.poly, g * ch);
                (p, pu * g * sh, puu * g * g * sh * sh + pu * g * ch)
            }
        };
        [p, l * p + px, (dl + l * l) * p + 2.0 * l * px + pxx]
    }

    /// `(ψ, ψ', ψ'')`. Overflows where `F` does.
    pub fn eval(&self, x: f64) -> [f64; 3] {
        let f = self.prefactor.value(x);
        self.reduced(x).map(|r| r * f)
    }

    /// `|−ψ'' + (V − E)ψ| / (|ψ''| + |(V − E)ψ|)` at `x`.
    pub fn residual(&self, x: f64) -> f64 {
        let [p, _, pxx] = self.reduced(x);
        let vp = (self.problem.potential(x) - self.energy) * p;
        let den = pxx.abs() + vp.abs();
        if den == 0.0 {
            0.0
        } else {
            (vp - pxx).abs() / den
        }
    }

    /// Largest [`residual`](Self::residual) on a grid.
    pub fn max_residual(&self, grid: &[f64]) -> MismatchReport {
        MismatchReport::over(grid, |x| self.residual(x))
    }
}

fn wrong_model(what: &str) -> QesError {
    QesError::InvalidParameters(format!("solution does not belong to a {what} model"))
}

/// `ψ_p = x^{2κ_p − 1/2} exp[(x²/2)(A_p + ξ_p x²/2)] Π (x² − v_j)`, an
/// eigenfunction of V₁ (branch P1) or V₂ (branch P2) at the mapped energy
/// `Ê`.
pub fn qes_wavefunctions_sextic(model: &SexticModelSpec, sol: &BetheSolution) -> Result<QESWavefunction> {
    match sol.model {
        BaeModel::Sextic(m) if m == *model => {}
        _ => return Err(wrong_model("matching sextic")),
    }
    let c = model.coefficients();
    let (v1, v2) = sextic_potentials(model);
    let spec = match model.branch {
        SexticBranch::P1 => v1,
        SexticBranch::P2 => v2,
    };
    Ok(QESWavefunction {
        prefactor: Prefactor::Sextic {
            power: 2.0 * c.kappa - 0.5,
            quadratic: c.a / 2.0,
            quartic: c.xi / 4.0,
        },
        poly: roots_to_polynomial(sol),
        problem: QesProblem::Sextic(spec),
        energy: sextic_energy_map(model, sol.energy),
    })
}

fn hyperbolic_wavefunction(spec: HyperbolicSpec, m: f64, sol: &BetheSolution, energy: f64) -> QESWavefunction {
    QESWavefunction {
        prefactor: Prefactor::Hyperbolic {
            minus: -(spec.b_pole / 2.0 + 0.25),
            plus: -(spec.c_pole / 2.0 + 0.25),
            exponent: spec.a_lin * spec.gamma / 4.0,
            gamma: spec.gamma,
        },
        poly: roots_to_polynomial(sol),
        problem: QesProblem::Hyperbolic { spec, m },
        energy,
    }
}

/// The QES eigenfunction of [`HyperbolicModelSpec::potential`] belonging to
/// one Bethe solution. Its eigenvalue is `−E`.
pub fn qes_wavefunction_hyperbolic(model: &HyperbolicModelSpec, sol: &BetheSolution) -> Result<QESWavefunction> {
    match sol.model {
        BaeModel::Hyperbolic(m) if m == *model => {}
        _ => return Err(wrong_model("matching hyperbolic")),
    }
    let spec = model.potential()?;
    Ok(hyperbolic_wavefunction(spec, model.m_roots as f64, sol, -sol.energy))
}

/// The QES eigenfunction of `V(x; A, B, C, γ)` on the half line, with
/// eigenvalue `ℰ = AΣv`.
pub fn qes_wavefunction_generic(sol: &BetheSolution) -> Result<QESWavefunction> {
    let BaeModel::Generic(g) = sol.model else {
        return Err(wrong_model("generic"));
    };
    let GenericBaeSpec {
        a_lin,
        b_res,
        c_res,
        gamma,
        m_roots,
    } = g;
    let spec = HyperbolicSpec::new(a_lin, b_res, c_res, gamma, 0.0, HyperbolicBc::HalfLine);
    Ok(hyperbolic_wavefunction(spec, m_roots as f64, sol, sol.energy))
}

/// The `J` QES eigenfunctions `x^{l+1} e^{−δx²/2 − x⁴/4} P(x²)` of a radial
/// sextic potential at `α = α_J`, sorted by energy.
///
/// The coefficients of `P` are eigenvectors of a `J × J` tridiagonal matrix
/// that is similar to a symmetric one for `l > −3/2`.
pub fn radial_qes_wavefunctions(spec: &SexticSpec, j: usize) -> Result<Vec<QESWavefunction>> {
    spec.validate()?;
    if spec.bc != SexticBc::HermitianRadial {
        return Err(QesError::InvalidParameters("QES wavefunctions need a radial spec".into()));
    }
    if j == 0 || (spec.alpha - qes_alpha(j, spec.l)).abs() > 1e-12 * spec.alpha.abs().max(1.0) {
        return Err(QesError::InvalidParameters(format!(
            "alpha = {} is not the QES value for J = {j}",
            spec.alpha
        )));
    }
    let (d, l, c) = (spec.delta, spec.l, spec.c_shift);
    let jf = j as f64;
    // E a_k = (δ(4k+2l+3) + C) a_k + 4(k−J) a_{k−1} − (k+1)(4k+4l+6) a_{k+1}
    let mut s = DMatrix::<f64>::zeros(j, j);
    let mut scale = vec![1.0f64; j];
    for k in 0..j {
        let kf = k as f64;
        s[(k, k)] = d * (4.0 * kf + 2.0 * l + 3.0) + c;
        if k > 0 {
            let lower = 4.0 * (kf - jf);
            let upper = -kf * (4.0 * kf + 4.0 * l + 2.0);
            let off = (lower * upper).sqrt();
            s[(k, k - 1)] = off;
            s[(k - 1, k)] = off;
            scale[k] = scale[k - 1] * lower / off;
        }
    }
    let eig = SymmetricEigen::new(s);
    let mut out: Vec<QESWavefunction> = (0..j)
        .map(|i| {
            let v = eig.eigenvectors.column(i);
            let a0 = v[0] * scale[0];
            QESWavefunction {
                prefactor: Prefactor::Sextic {
                    power: l + 1.0,
                    quadratic: -d / 2.0,
                    quartic: -0.25,
                },
                poly: (0..j).map(|k| v[k] * scale[k] / a0).collect(),
                problem: QesProblem::Sextic(*spec),
                energy: eig.eigenvalues[i],
            }
        })
        .collect();
    out.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    Ok(out)
}

/// Outcome of deleting the QES levels of a radial sextic potential.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrumResult {
    pub base: SexticSpec,
    pub removed_energies: Vec<f64>,
    pub grid: Vec<f64>,
    pub potential: Vec<f64>,
    /// `x⁶ + 2δx⁴ + (δ² + 2J − 2l − 1)x² + (l+J)(l+J+1)/x² + C + 2δJ`.
    pub target: SexticSpec,
    pub deviation: MismatchReport,
}

/// Coefficients in `x` of the derivatives `0..=order` of `P(x²)`.
fn x_derivatives(poly_in_y: &[f64], order: usize) -> Vec<Vec<f64>> {
    let mut c = vec![0.0; 2 * poly_in_y.len()];
    for (k, &a) in poly_in_y.iter().enumerate() {
        c[2 * k] = a;
    }
    let mut out = vec![c];
    for _ in 0..order {
        let prev = out.last().unwrap();
        let next: Vec<f64> = prev.iter().enumerate().skip(1).map(|(i, &a)| i as f64 * a).collect();
        out.push(next);
    }
    out
}

fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * x + a)
}

/// `V − 2 (log W(ψ₁, …, ψ_J))''` on `grid`.
///
/// All `ψ_i` share the prefactor `F`, so `W = F^J W(P₁, …, P_J)` and only
/// polynomial Wronskians are evaluated. `W'` and `W''` come from replacing
/// the last rows of the determinant by higher derivatives.
pub fn crum_transform(spec: &SexticSpec, wavefunctions: &[QESWavefunction], grid: &[f64]) -> Result<CrumResult> {
    let j = wavefunctions.len();
    let first = wavefunctions
        .first()
        .ok_or_else(|| QesError::InvalidParameters("no wavefunctions to remove".into()))?;
    if !wavefunctions.iter().all(|w| w.prefactor.close_to(&first.prefactor)) {
        return Err(QesError::InvalidParameters(
            "wavefunctions must be sextic with a common prefactor".into(),
        ));
    }
    if spec.bc != SexticBc::HermitianRadial || (spec.alpha - qes_alpha(j, spec.l)).abs() > 1e-12 * spec.alpha.abs().max(1.0) {
        return Err(QesError::InvalidParameters(format!(
            "spec is not the radial QES potential with J = {j}"
        )));
    }
    let mut removed: Vec<f64> = wavefunctions.iter().map(|w| w.energy).collect();
    removed.sort_by(|a, b| a.total_cmp(b));
    if removed.windows(2).any(|w| w[1] - w[0] <= 1e-12 * w[1].abs().max(1.0)) {
        return Err(QesError::InvalidParameters("QES energies must be distinct".into()));
    }
    if let Some(&x) = grid.iter().find(|&&x| !(x > 0.0)) {
        return Err(QesError::SingularPoint(format!("{x}")));
    }
    let derivs: Vec<Vec<Vec<f64>>> = wavefunctions.iter().map(|w| x_derivatives(&w.poly, j + 1)).collect();
    let det_with_rows = |rows: &[usize], x: f64| -> (f64, f64) {
        let m = DMatrix::from_fn(j, j, |r, i| horner(&derivs[i][rows[r]], x));
        let hadamard: f64 = m.row_iter().map(|r| r.norm()).product();
        (m.determinant(), hadamard)
    };
    let base_rows: Vec<usize> = (0..j).collect();
    let mut potential = Vec::with_capacity(grid.len());
    for &x in grid {
        let (w, bound) = det_with_rows(&base_rows, x);
        if !(w.abs() > 1e-13 * bound) {
            return Err(QesError::WronskianZero(x));
        }
        let mut rows = base_rows.clone();
        rows[j - 1] = j;
        let (dw, _) = det_with_rows(&rows, x);
        rows[j - 1] = j + 1;
        let (mut ddw, _) = det_with_rows(&rows, x);
        if j >= 2 {
            rows[j - 2] = j - 1;
            rows[j - 1] = j;
            ddw += det_with_rows(&rows, x).0;
        }
        let (_, dl) = first.prefactor.log_derivatives(x);
        let log_w2 = ddw / w - (dw / w).powi(2);
        let v = sextic_potential(spec, x.into()).re;
        potential.push(v - 2.0 * j as f64 * dl - 2.0 * log_w2);
    }
    let jf = j as f64;
    let target = SexticSpec::new(
        spec.delta,
        2.0 * jf - 2.0 * spec.l - 1.0,
        spec.l + jf,
        spec.c_shift + 2.0 * spec.delta * jf,
        SexticBc::HermitianRadial,
    );
    let deviation = MismatchReport::from_pairs(
        grid.iter()
            .zip(&potential)
            .map(|(&x, &v)| (x, v - sextic_potential(&target, x.into()).re)),
    )
    .require(CRUM_TOLERANCE, "Crum potential")?;
    Ok(CrumResult {
        base: *spec,
        removed_energies: removed,
        grid: grid.to_vec(),
        potential,
        target,
        deviation,
    })
}

/// [`radial_qes_wavefunctions`] followed by [`crum_transform`].
pub fn crum_remove_qes_levels(spec: &SexticSpec, j: usize, grid: &[f64]) -> Result<CrumResult> {
    let wfs = radial_qes_wavefunctions(spec, j)?;
    crum_transform(spec, &wfs, grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bender_dunne::qes_roots;
    use crate::bethe::{solve_generic_bae, solve_hyperbolic_bae, solve_sextic_bae};
    use proptest::prelude::*;

    fn grid(a: f64, b: f64, n: usize) -> Vec<f64> {
        (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect()
    }

    #[test]
    fn superpotential_is_odd() {
        let sp = SuperPotential::new(1.37, -1.0);
        assert_eq!(sp.w(0.0), 0.0);
        for x in [0.3, 1.1, 4.0] {
            assert!((sp.w(x) + sp.w(-x)).abs() < 1e-14);
        }
    }

    #[test]
    fn m_zero_superpotential() {
        let sp = SuperPotential::new(0.0, -2.0);
        let x = 0.7f64;
        let w = 0.5 * x.sinh() / (x.cosh() + 1.0) - x.sinh();
        assert!((sp.w(x) - w).abs() < 1e-15);
        let r = susy_partner_check(0.0, -2.0, &grid(-5.0, 5.0, 200)).unwrap();
        assert!(r.lower_identity.max_deviation < 1e-9);
    }

    #[test]
    fn partner_identities_for_non_integer_m() {
        let r = susy_partner_check(1.37, -1.0, &grid(-5.0, 5.0, 400)).unwrap();
        assert!(r.zero_mode.max_deviation < 1e-10);
        assert!(r.upper_identity.max_deviation < 1e-9, "{r:?}");
    }

    #[test]
    fn partner_check_needs_negative_gamma() {
        assert!(susy_partner_check(1.0, 0.5, &[0.0]).is_err());
    }

    #[test]
    fn isospectral_partners() {
        let r = susy_isospectrality_check(2.0, -1.0, 5).unwrap();
        assert!(r.zero_mode_energy.abs() < 1e-8);
        assert_eq!(r.upper.len(), 5);
        assert!(r.max_deviation < 1e-7);
    }

    #[test]
    fn sextic_wavefunctions_solve_their_potentials() {
        let xs = grid(0.1, 2.5, 60);
        for branch in [SexticBranch::P1, SexticBranch::P2] {
            for m in 0..3 {
                let model = SexticModelSpec::new(0.2, 1, m, branch);
                for sol in solve_sextic_bae(&model).unwrap() {
                    let wf = qes_wavefunctions_sextic(&model, &sol).unwrap();
                    let r = wf.max_residual(&xs);
                    assert!(r.max_deviation < 1e-8, "{branch:?} M={m}: {r:?}");
                }
            }
        }
    }

    #[test]
    fn p1_wavefunction_grows_on_the_real_axis() {
        let model = SexticModelSpec::new(0.0, 0, 0, SexticBranch::P1);
        let sol = &solve_sextic_bae(&model).unwrap()[0];
        let wf = qes_wavefunctions_sextic(&model, sol).unwrap();
        assert!(wf.eval(4.0)[0] > 1e10 * wf.eval(1.0)[0]);
    }

    #[test]
    fn hyperbolic_wavefunctions_solve_their_potentials() {
        let xs = grid(0.2, 3.0, 40);
        for model in [
            HyperbolicModelSpec::alpha(-0.25, 1, 2, 2),
            HyperbolicModelSpec::beta(-1.0, 3, 2, 2),
        ] {
            for sol in solve_hyperbolic_bae(&model).unwrap() {
                let wf = qes_wavefunction_hyperbolic(&model, &sol).unwrap();
                let r = wf.max_residual(&xs);
                assert!(r.max_deviation < 1e-8, "{model:?}: {r:?}");
            }
        }
        let spec = GenericBaeSpec {
            a_lin: 2.0,
            b_res: -0.5,
            c_res: 0.7,
            gamma: -1.0,
            m_roots: 2,
        };
        for sol in solve_generic_bae(&spec).unwrap() {
            let wf = qes_wavefunction_generic(&sol).unwrap();
            assert!(wf.max_residual(&xs).max_deviation < 1e-8);
        }
    }

    #[test]
    fn radial_wavefunctions_match_bender_dunne_roots() {
        let spec = SexticSpec::at_qes_point(0.2, 3, 0.54, 0.0, SexticBc::HermitianRadial);
        let wfs = radial_qes_wavefunctions(&spec, 3).unwrap();
        let bd = qes_roots(&spec, 3).unwrap();
        for (w, r) in wfs.iter().zip(&bd.roots) {
            assert!((w.energy - r).abs() < 1e-9, "{} {r}", w.energy);
            assert!(w.max_residual(&grid(0.1, 3.0, 50)).max_deviation < 1e-8);
        }
    }

    #[test]
    fn crum_single_level() {
        // ψ = x e^{−x⁴/4}, V = x⁶ − 5x²: V − 2(log ψ)'' = x⁶ + x² + 2/x²
        let spec = SexticSpec::at_qes_point(0.0, 1, 0.0, 0.0, SexticBc::HermitianRadial);
        let xs = grid(0.2, 3.0, 100);
        let r = crum_remove_qes_levels(&spec, 1, &xs).unwrap();
        for (&x, &v) in xs.iter().zip(&r.potential) {
            let want = x.powi(6) + x * x + 2.0 / (x * x);
            assert!((v - want).abs() < 1e-9 * want, "{x}: {v} {want}");
        }
    }

    #[test]
    fn crum_rejects_mismatched_count() {
        let spec = SexticSpec::at_qes_point(0.0, 2, 0.54, 0.0, SexticBc::HermitianRadial);
        let wfs = radial_qes_wavefunctions(&spec, 2).unwrap();
        assert!(crum_transform(&spec, &wfs[..1], &[1.0]).is_err());
        assert!(matches!(crum_transform(&spec, &wfs, &[0.0]), Err(QesError::SingularPoint(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn crum_matches_closed_form(delta in -1.0f64..1.0, l in -0.4f64..2.0, j in 1usize..5) {
            let spec = SexticSpec::at_qes_point(delta, j, l, 0.0, SexticBc::HermitianRadial);
            let r = crum_remove_qes_levels(&spec, j, &grid(0.2, 3.0, 40)).unwrap();
            prop_assert!(r.deviation.max_deviation < 1e-6);
        }

        #[test]
        fn zero_mode_is_annihilated(m in -3.0f64..3.0, g in -3.0f64..-0.1) {
            let r = susy_partner_check(m, g, &grid(-5.0, 5.0, 50)).unwrap();
            prop_assert!(r.zero_mode.max_deviation < 1e-10);
        }
    }
}
