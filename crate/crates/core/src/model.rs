//! Parameter types shared by every solver, and the dictionaries that map
//! the bosonic models onto Schrödinger potentials.
//!
//! Ω and g are fixed to 1 in every map here; the Fock builders take them as
//! explicit arguments.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{QesError, Result};

/// Boundary condition attached to a sextic potential.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SexticBc {
    /// Square integrable on the positive axis, `ψ ~ x^{l+1}` at the origin.
    HermitianRadial,
    /// Square integrable on a contour in the Stokes wedges around arg x = ±π/4.
    PTContour,
}

/// `V(x) = x⁶ + 2δx⁴ + (δ²+α)x² + l(l+1)/x² + C`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SexticSpec {
    pub delta: f64,
    pub alpha: f64,
    pub l: f64,
    pub c_shift: f64,
    pub bc: SexticBc,
}

impl SexticSpec {
    pub fn new(delta: f64, alpha: f64, l: f64, c_shift: f64, bc: SexticBc) -> Self {
        Self {
            delta,
            alpha,
            l,
            c_shift,
            bc,
        }
    }

    /// The potential with α = α_J = −(4J+2l+1), where P_J truncates the
    /// Bender-Dunne series.
    pub fn at_qes_point(delta: f64, j: usize, l: f64, c_shift: f64, bc: SexticBc) -> Self {
        Self::new(delta, qes_alpha(j, l), l, c_shift, bc)
    }

    /// Coefficient of x² (δ²+α).
    pub fn quadratic(&self) -> f64 {
        self.delta * self.delta + self.alpha
    }

    /// Coefficient of 1/x².
    pub fn centrifugal(&self) -> f64 {
        self.l * (self.l + 1.0)
    }

    /// Checks the boundary-condition requirements.
    ///
    /// The radial problem accepts `l = −1/2` as well: the two Frobenius
    /// exponents coincide there and `x^{l+1}` still singles out one solution.
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("delta", self.delta),
            ("alpha", self.alpha),
            ("l", self.l),
            ("c_shift", self.c_shift),
        ] {
            if !v.is_finite() {
                return Err(QesError::InvalidParameters(format!("{name} = {v}")));
            }
        }
        if self.bc == SexticBc::HermitianRadial && self.l < -0.5 {
            return Err(QesError::InvalidParameters(format!(
                "radial problem needs l >= -1/2, got {}",
                self.l
            )));
        }
        Ok(())
    }
}

/// α_J = −(4J + 2l + 1).
pub fn qes_alpha(j: usize, l: f64) -> f64 {
    -(4.0 * j as f64 + 2.0 * l + 1.0)
}

/// The Hermitian radial potential `V(x; δ, α, l)` and its conjectured PT
/// partner with `α' = −(α+6l+3)/2`, `l' = (α−2l−3)/4` and
/// `C' = −δ(α+1+2l)/2`.
pub fn hermitian_pt_pair(delta: f64, alpha: f64, l: f64) -> (SexticSpec, SexticSpec) {
    (
        SexticSpec::new(delta, alpha, l, 0.0, SexticBc::HermitianRadial),
        SexticSpec::new(
            delta,
            -(alpha + 6.0 * l + 3.0) / 2.0,
            (alpha - 2.0 * l - 3.0) / 4.0,
            -delta * (alpha + 1.0 + 2.0 * l) / 2.0,
            SexticBc::PTContour,
        ),
    )
}

/// The potential at `α = α_J` with the radial and with the PT boundary
/// condition. The PT levels are the radial ones with the `J` QES levels
/// removed.
pub fn qes_radial_pt_pair(delta: f64, j: usize, l: f64) -> (SexticSpec, SexticSpec) {
    (
        SexticSpec::at_qes_point(delta, j, l, 0.0, SexticBc::HermitianRadial),
        SexticSpec::at_qes_point(delta, j, l, 0.0, SexticBc::PTContour),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HyperbolicBc {
    /// Full real line, even states. Needs a nonsingular potential.
    RealLineEven,
    /// Full real line, odd states. Needs a nonsingular potential.
    RealLineOdd,
    /// `x > 0` with `ψ ~ x^{−B−1/2}` at the origin.
    HalfLine,
    /// The line Im x = π (the PT-symmetric image under the B↔C, γ→−γ swap).
    PTShifted,
}

/// `V(x; A, B, C, γ)` plus an additive constant. The number of Bethe roots M
/// enters the potential too and is passed separately wherever it is needed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperbolicSpec {
    pub a_lin: f64,
    pub b_pole: f64,
    pub c_pole: f64,
    pub gamma: f64,
    pub shift: f64,
    pub bc: HyperbolicBc,
}

impl HyperbolicSpec {
    pub fn new(a_lin: f64, b_pole: f64, c_pole: f64, gamma: f64, shift: f64, bc: HyperbolicBc) -> Self {
        Self {
            a_lin,
            b_pole,
            c_pole,
            gamma,
            shift,
            bc,
        }
    }

    /// `(2B+1)(2B+3)/8`, the strength of the `1/(cosh x − 1)` pole.
    pub fn b_pole_strength(&self) -> f64 {
        (2.0 * self.b_pole + 1.0) * (2.0 * self.b_pole + 3.0) / 8.0
    }

    /// `(2C+1)(2C+3)/8`, the strength of the `1/(cosh x + 1)` pole.
    pub fn c_pole_strength(&self) -> f64 {
        (2.0 * self.c_pole + 1.0) * (2.0 * self.c_pole + 3.0) / 8.0
    }

    pub fn is_nonsingular_at_origin(&self) -> bool {
        self.b_pole_strength() == 0.0
    }

    pub fn validate(&self) -> Result<()> {
        // cosh flips sign on the shifted line
        let prod = match self.bc {
            HyperbolicBc::PTShifted => -self.a_lin * self.gamma,
            _ => self.a_lin * self.gamma,
        };
        if !(prod < 0.0) {
            return Err(QesError::DomainError(prod));
        }
        match self.bc {
            HyperbolicBc::RealLineEven | HyperbolicBc::RealLineOdd => {
                if !self.is_nonsingular_at_origin() {
                    return Err(QesError::InvalidParameters(format!(
                        "real-line problem needs B = -1/2 or -3/2, got {}",
                        self.b_pole
                    )));
                }
            }
            HyperbolicBc::PTShifted => {
                if self.c_pole_strength() != 0.0 {
                    return Err(QesError::InvalidParameters(format!(
                        "shifted-line problem needs C = -1/2 or -3/2, got {}",
                        self.c_pole
                    )));
                }
            }
            HyperbolicBc::HalfLine => {}
        }
        Ok(())
    }
}

/// Which of the two Bethe ansatz solutions of the three-boson model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SexticBranch {
    P1,
    P2,
}

/// Sector of the three-boson model labelled by the reference-state charge q
/// (= q₂) and the number of Bethe roots M.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SexticModelSpec {
    pub epsilon: f64,
    pub q: u32,
    pub m_roots: u32,
    pub branch: SexticBranch,
}

/// Coefficients of the generic Gaudin Hamiltonian for one branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchCoefficients {
    /// A_p
    pub a: f64,
    /// B_p (= Ω)
    pub b: f64,
    /// ξ_p
    pub xi: f64,
    /// κ_p
    pub kappa: f64,
}

impl SexticModelSpec {
    pub fn new(epsilon: f64, q: u32, m_roots: u32, branch: SexticBranch) -> Self {
        Self {
            epsilon,
            q,
            m_roots,
            branch,
        }
    }

    pub fn m(&self) -> f64 {
        self.m_roots as f64
    }

    /// q₁ = M + q.
    pub fn q1(&self) -> u32 {
        self.m_roots + self.q
    }

    pub fn coefficients(&self) -> BranchCoefficients {
        let eps = self.epsilon;
        match self.branch {
            SexticBranch::P1 => BranchCoefficients {
                a: 3.0 * eps,
                b: 1.0,
                xi: 1.0,
                kappa: -(self.q1() as f64) / 2.0,
            },
            SexticBranch::P2 => BranchCoefficients {
                a: -3.0 * eps,
                b: 1.0,
                xi: -1.0,
                kappa: (self.q as f64 + 1.0) / 2.0,
            },
        }
    }

    /// Conserved charges (N, K) of the Fock sector carrying this solution.
    pub fn sector_charges(&self) -> (u32, i64) {
        (2 * self.m_roots + self.q, -(self.q as i64))
    }

    /// Dimension of that sector.
    pub fn sector_dimension(&self) -> usize {
        self.m_roots as usize + 1
    }

    /// Model energy from the Gaudin energy E_p of this branch.
    pub fn model_energy(&self, gaudin_energy: f64) -> f64 {
        let eps = self.epsilon;
        let m = self.m();
        let q = self.q as f64;
        match self.branch {
            SexticBranch::P1 => gaudin_energy - eps / 2.0 * (m - q),
            SexticBranch::P2 => gaudin_energy + eps / 2.0 * (2.0 * m + q + 3.0),
        }
    }
}

/// Ê = −4(E + (ε/2)(M − q)).
pub fn sextic_energy_map(model: &SexticModelSpec, e_fock: f64) -> f64 {
    -4.0 * (e_fock + model.epsilon / 2.0 * (model.m() - model.q as f64))
}

/// Inverse of [`sextic_energy_map`].
pub fn sextic_energy_unmap(model: &SexticModelSpec, e_hat: f64) -> f64 {
    -e_hat / 4.0 - model.epsilon / 2.0 * (model.m() - model.q as f64)
}

/// V₁ (PT contour) and V₂ (radial) whose QES levels are the mapped sector
/// energies.
pub fn sextic_potentials(model: &SexticModelSpec) -> (SexticSpec, SexticSpec) {
    let eps = model.epsilon;
    let m = model.m();
    let q = model.q as f64;
    let delta = 3.0 * eps;
    let v1 = SexticSpec::new(
        delta,
        2.0 * (m - q + 1.0),
        m + q + 0.5,
        0.0,
        SexticBc::PTContour,
    );
    let v2 = SexticSpec::new(
        delta,
        -4.0 * m - 2.0 * (q + 2.0),
        q - 0.5,
        -6.0 * eps * (m + 1.0),
        SexticBc::HermitianRadial,
    );
    (v1, v2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HyperbolicBranch {
    Alpha,
    Beta,
}

/// Sector of the four-boson model seen from one of its two Bethe ansatz
/// solutions. For the Beta branch `p`/`q` hold p_β/q_β; on the wire they keep
/// the names `p_alpha`/`q_alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperbolicModelSpec {
    pub epsilon: f64,
    pub g: f64,
    #[serde(rename = "p_alpha")]
    pub p: u32,
    #[serde(rename = "q_alpha")]
    pub q: u32,
    pub m_roots: u32,
    pub branch: HyperbolicBranch,
}

impl HyperbolicModelSpec {
    pub fn alpha(epsilon: f64, p: u32, q: u32, m_roots: u32) -> Self {
        Self {
            epsilon,
            g: 1.0,
            p,
            q,
            m_roots,
            branch: HyperbolicBranch::Alpha,
        }
    }

    pub fn beta(epsilon: f64, p: u32, q: u32, m_roots: u32) -> Self {
        Self {
            branch: HyperbolicBranch::Beta,
            ..Self::alpha(epsilon, p, q, m_roots)
        }
    }

    /// The Beta branch needs M ≤ min(p_β, q_β); otherwise the Bethe state
    /// vanishes identically.
    pub fn check_sector(&self) -> Result<()> {
        if self.branch == HyperbolicBranch::Beta && self.m_roots > self.p.min(self.q) {
            return Err(QesError::InvalidSector(format!(
                "M = {} exceeds min(p, q) = {}",
                self.m_roots,
                self.p.min(self.q)
            )));
        }
        Ok(())
    }

    /// Charges (n₁−n₂, n₁+n₃, n₂+n₄) of the Fock sector carrying this
    /// solution.
    pub fn sector_charges(&self) -> (i64, i64, i64) {
        let (p, q, m) = (self.p as i64, self.q as i64, self.m_roots as i64);
        match self.branch {
            HyperbolicBranch::Alpha => (-p, m, p + q + m),
            HyperbolicBranch::Beta => (m - p, m, p + q - m),
        }
    }

    pub fn sector_dimension(&self) -> usize {
        self.m_roots as usize + 1
    }

    /// The half-line potential `V(x; 2, B, C, 2ε) − S` whose QES levels are
    /// the negated energies `−E` of this sector. `S` is the root-independent
    /// part of the energy, so `E = S − 2Σv` while the QES levels of
    /// `V(x; 2, B, C, 2ε)` are `ℰ = +2Σv`. The number of roots to pass
    /// alongside it is `m_roots`. Needs `g = 1` and `ε < 0`.
    pub fn potential(&self) -> Result<HyperbolicSpec> {
        if self.g != 1.0 {
            return Err(QesError::InvalidParameters(format!(
                "the potential map needs g = 1, got {}",
                self.g
            )));
        }
        let (p, q, m, e) = (self.p as f64, self.q as f64, self.m_roots as f64, self.epsilon);
        let (b, c, shift) = match self.branch {
            HyperbolicBranch::Alpha => (-(p + 1.0), -(q + 1.0), (p + m) * (q + m) + (p - q) * e),
            HyperbolicBranch::Beta => (q, p, (m - p) * (m - q) - m + (p - q) * e),
        };
        let spec = HyperbolicSpec::new(2.0, b, c, 2.0 * e, -shift, HyperbolicBc::HalfLine);
        spec.validate()?;
        Ok(spec)
    }
}

/// (p_α, q_α, M) → (p_α+M, q_α+M, M) on the Beta side.
pub fn hyperbolic_parameter_map(alpha_side: &HyperbolicModelSpec) -> Result<HyperbolicModelSpec> {
    if alpha_side.branch != HyperbolicBranch::Alpha {
        return Err(QesError::InvalidParameters(
            "parameter map starts from the Alpha branch".into(),
        ));
    }
    let m = alpha_side.m_roots;
    Ok(HyperbolicModelSpec {
        p: alpha_side.p + m,
        q: alpha_side.q + m,
        branch: HyperbolicBranch::Beta,
        ..*alpha_side
    })
}

/// Swap B↔C and negate γ: `V(x; A,B,C,γ) = V(x+iπ; A,C,B,−γ)`.
///
/// The swap is an involution. The boundary tag moves to the shifted line and
/// back again.
pub fn herm_pt_swap(spec: &HyperbolicSpec) -> HyperbolicSpec {
    let bc = match spec.bc {
        HyperbolicBc::PTShifted => HyperbolicBc::RealLineEven,
        _ => HyperbolicBc::PTShifted,
    };
    HyperbolicSpec {
        b_pole: spec.c_pole,
        c_pole: spec.b_pole,
        gamma: -spec.gamma,
        bc,
        ..*spec
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "BAE")]
    Bae,
    Fock,
    BenderDunne,
    #[serde(rename = "ODE")]
    Ode,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Level {
    pub index: usize,
    pub energy: f64,
}

/// Sorted eigenvalues with their level indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub levels: Vec<Level>,
    pub method: Method,
    pub diagnostics: BTreeMap<String, f64>,
}

impl Spectrum {
    /// Builds a spectrum from unsorted energies, indexing them in ascending
    /// order.
    pub fn from_energies(mut energies: Vec<f64>, method: Method) -> Self {
        energies.sort_by(|a, b| a.total_cmp(b));
        Self {
            levels: energies
                .into_iter()
                .enumerate()
                .map(|(index, energy)| Level { index, energy })
                .collect(),
            method,
            diagnostics: BTreeMap::new(),
        }
    }

    pub fn energies(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.energy).collect()
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn with_diagnostic(mut self, key: &str, value: f64) -> Self {
        self.diagnostics.insert(key.to_string(), value);
        self
    }

    pub fn is_strictly_increasing(&self) -> bool {
        self.levels.windows(2).all(|w| w[0].energy < w[1].energy)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn energy_map_examples() {
        let m = SexticModelSpec::new(0.0, 0, 0, SexticBranch::P2);
        assert_eq!(sextic_energy_map(&m, 0.0), 0.0);
        let m = SexticModelSpec::new(1.0, 2, 0, SexticBranch::P2);
        assert_eq!(sextic_energy_map(&m, -2.0), 12.0);
    }

    #[test]
    fn potentials_at_origin_of_parameter_space() {
        let m = SexticModelSpec::new(0.0, 0, 0, SexticBranch::P2);
        let (v1, v2) = sextic_potentials(&m);
        assert_eq!(v1.quadratic(), 2.0);
        assert_eq!(v1.centrifugal(), 0.75);
        assert_eq!(v1.c_shift, 0.0);
        assert_eq!(v2.quadratic(), -4.0);
        assert_eq!(v2.centrifugal(), -0.25);
        assert_eq!(v2.c_shift, 0.0);
        assert_eq!(v1.bc, SexticBc::PTContour);
        assert_eq!(v2.bc, SexticBc::HermitianRadial);
    }

    #[test]
    fn quartic_coefficient_is_six_epsilon() {
        let m = SexticModelSpec::new(0.2, 0, 2, SexticBranch::P2);
        let (v1, v2) = sextic_potentials(&m);
        assert!((2.0 * v1.delta - 1.2).abs() < 1e-15);
        assert!((2.0 * v2.delta - 1.2).abs() < 1e-15);
    }

    #[test]
    fn v2_fits_qes_point_dictionary() {
        // δ = 3ε, l = q − 1/2, J = M + 1, α = α_J, C = −2δJ
        let m = SexticModelSpec::new(0.3, 2, 3, SexticBranch::P2);
        let (_, v2) = sextic_potentials(&m);
        let j = 4;
        assert!((v2.l - 1.5).abs() < 1e-15);
        assert!((v2.alpha - qes_alpha(j, v2.l)).abs() < 1e-12);
        assert!((v2.c_shift + 2.0 * v2.delta * j as f64).abs() < 1e-12);
    }

    #[test]
    fn parameter_map_examples() {
        let a = HyperbolicModelSpec::alpha(0.3, 0, 0, 0);
        let b = hyperbolic_parameter_map(&a).unwrap();
        assert_eq!((b.p, b.q, b.m_roots), (0, 0, 0));
        let a = HyperbolicModelSpec::alpha(0.3, 1, 2, 3);
        let b = hyperbolic_parameter_map(&a).unwrap();
        assert_eq!((b.p, b.q, b.m_roots), (4, 5, 3));
        assert_eq!(b.branch, HyperbolicBranch::Beta);
        assert!(hyperbolic_parameter_map(&b).is_err());
    }

    #[test]
    fn mapped_sectors_coincide() {
        let a = HyperbolicModelSpec::alpha(0.3, 1, 2, 3);
        let b = hyperbolic_parameter_map(&a).unwrap();
        assert_eq!(a.sector_charges(), b.sector_charges());
    }

    #[test]
    fn json_field_names() {
        let s = SexticSpec::new(0.2, 0.31, 0.54, 0.0, SexticBc::HermitianRadial);
        let v: serde_json::Value = serde_json::to_value(s).unwrap();
        for key in ["delta", "alpha", "l", "c_shift", "bc"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        let h = HyperbolicModelSpec::beta(0.25, 2, 3, 1);
        let v: serde_json::Value = serde_json::to_value(h).unwrap();
        for key in ["epsilon", "g", "p_alpha", "q_alpha", "m_roots", "branch"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        let back: HyperbolicModelSpec = serde_json::from_value(v).unwrap();
        assert_eq!(back, h);
    }

    proptest! {
        #[test]
        fn energy_map_is_affine_with_slope_minus_four(
            eps in -2.0f64..2.0, q in 0u32..6, m in 0u32..6, e in -50.0f64..50.0, de in 0.1f64..10.0
        ) {
            let model = SexticModelSpec::new(eps, q, m, SexticBranch::P2);
            let slope = (sextic_energy_map(&model, e + de) - sextic_energy_map(&model, e)) / de;
            prop_assert!((slope + 4.0).abs() < 1e-9);
            let back = sextic_energy_unmap(&model, sextic_energy_map(&model, e));
            prop_assert!((back - e).abs() < 1e-10);
        }

        #[test]
        fn mapped_beta_side_never_violates_constraint(p in 0u32..20, q in 0u32..20, m in 0u32..20) {
            let b = hyperbolic_parameter_map(&HyperbolicModelSpec::alpha(0.5, p, q, m)).unwrap();
            prop_assert!(b.m_roots <= b.p.min(b.q));
            prop_assert!(b.check_sector().is_ok());
        }

        #[test]
        fn swap_is_an_involution(a in -3.0f64..3.0, b in -3.0f64..3.0, c in -3.0f64..3.0, g in -3.0f64..3.0) {
            let s = HyperbolicSpec::new(a, b, c, g, 0.7, HyperbolicBc::RealLineEven);
            prop_assert_eq!(herm_pt_swap(&herm_pt_swap(&s)), s);
        }

        #[test]
        fn v1_v2_share_leading_coefficients(eps in -2.0f64..2.0, q in 0u32..6, m in 0u32..6) {
            let (v1, v2) = sextic_potentials(&SexticModelSpec::new(eps, q, m, SexticBranch::P1));
            prop_assert_eq!(v1.delta, v2.delta);
        }
    }
}
