//! Command-line front end: table reproduction, single spectra and the
//! cross-method agreement suites, emitted as JSON, CSV or an aligned table.
//!
//! Exit codes: 0 success, 2 a check exceeded its tolerance, 3 a solver
//! failed, 4 invalid parameters.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::bender_dunne::qes_roots;
use crate::bethe::{solve_hyperbolic_bae, solve_sextic_bae};
use crate::error::{QesError, Result};
use crate::fock::{build_sector3, build_sector4, diagonalize};
use crate::model::{
    hermitian_pt_pair, hyperbolic_parameter_map, qes_radial_pt_pair, sextic_energy_map, sextic_potentials,
    HyperbolicBc, HyperbolicModelSpec, HyperbolicSpec, SexticBc, SexticBranch, SexticModelSpec, SexticSpec,
};
use crate::schrodinger::{
    hyperbolic_eigenvalues, hyperbolic_full_line_eigenvalues, pt_eigenvalue_near, pt_eigenvalues, pt_mismatch,
    radial_eigenvalue_near, radial_eigenvalues, radial_phase_residual, ContourSpec, ShootingConfig,
};
use crate::transforms::{crum_remove_qes_levels, susy_isospectrality_check, susy_partner_check};

/// Caps the rayon worker pool.
pub const THREADS_ENV: &str = "QES_THREADS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_TOLERANCE: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;
pub const EXIT_INVALID: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "qes", version, about = "Spectra of quasi-exactly solvable sextic and hyperbolic potentials")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[arg(long, value_enum, default_value_t = Format::Pretty, global = true)]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Pass/fail tolerance of the command (algebraic tolerance for suites).
    #[arg(long, global = true)]
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Pretty,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Radial spectrum of x⁶+2δx⁴+(δ²+α)x²+l(l+1)/x² beside its PT partner.
    Table1(Table1Args),
    /// Radial and PT spectra at the QES point α = −(4J+2l+1).
    Table2(Table2Args),
    /// Eigenvalues of one potential.
    #[command(subcommand)]
    Spectrum(SpectrumCmd),
    /// Cross-method agreement suites.
    #[command(subcommand)]
    Crosscheck(Suite),
}

#[derive(Debug, Args)]
pub struct Table1Args {
    #[arg(long, default_value_t = 0.2, allow_negative_numbers = true)]
    pub delta: f64,
    #[arg(long, default_value_t = 0.31, allow_negative_numbers = true)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.54, allow_negative_numbers = true)]
    pub l: f64,
    #[arg(long, default_value_t = 5)]
    pub levels: usize,
}

#[derive(Debug, Args)]
pub struct Table2Args {
    #[arg(long, default_value_t = 0.2, allow_negative_numbers = true)]
    pub delta: f64,
    #[arg(long = "J", default_value_t = 3)]
    pub j: usize,
    #[arg(long, default_value_t = 0.54, allow_negative_numbers = true)]
    pub l: f64,
    #[arg(long, default_value_t = 5)]
    pub levels: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SexticBcArg {
    /// ψ ~ x^{l+1} at the origin.
    Radial,
    /// Wedges centred on arg x = −3π/4, −π/4.
    Pt,
    /// Rays at ±π/4.
    PtRight,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum HyperbolicBcArg {
    Half,
    Even,
    Odd,
    /// Even and odd levels together.
    Full,
    /// The line Im x = π.
    Pt,
}

#[derive(Debug, Subcommand)]
pub enum SpectrumCmd {
    /// x⁶ + 2δx⁴ + (δ²+α)x² + l(l+1)/x² + C.
    Sextic {
        #[arg(long, allow_negative_numbers = true)]
        delta: f64,
        #[arg(long, allow_negative_numbers = true)]
        alpha: f64,
        #[arg(long, allow_negative_numbers = true)]
        l: f64,
        #[arg(long = "C", default_value_t = 0.0, allow_negative_numbers = true)]
        c: f64,
        #[arg(long, value_enum, default_value_t = SexticBcArg::Radial)]
        bc: SexticBcArg,
        #[arg(long, default_value_t = 5)]
        levels: usize,
    },
    /// V(x; A, B, C, γ) with M in the potential, plus a constant shift.
    Hyperbolic {
        #[arg(long = "A", default_value_t = 2.0, allow_negative_numbers = true)]
        a: f64,
        #[arg(long = "B", allow_negative_numbers = true)]
        b: f64,
        #[arg(long = "C", allow_negative_numbers = true)]
        c: f64,
        #[arg(long, allow_negative_numbers = true)]
        gamma: f64,
        #[arg(long = "M", default_value_t = 0.0, allow_negative_numbers = true)]
        m: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        shift: f64,
        #[arg(long, value_enum, default_value_t = HyperbolicBcArg::Half)]
        bc: HyperbolicBcArg,
        #[arg(long, default_value_t = 5)]
        levels: usize,
    },
}

#[derive(Debug, Subcommand)]
pub enum Suite {
    /// Fock, BAE (both branches), Bender-Dunne and ODE QES levels of V₁, V₂.
    Sextic {
        #[arg(long, value_delimiter = ',', num_args = 0.., default_values_t = [0.0, 0.2, -0.2], allow_negative_numbers = true)]
        epsilon: Vec<f64>,
        #[arg(long, value_delimiter = ',', num_args = 0.., default_values_t = [0, 1, 2])]
        q: Vec<u32>,
        #[arg(long = "M", value_delimiter = ',', num_args = 0.., default_values_t = [0, 1, 2, 3])]
        m: Vec<u32>,
        /// Tolerance of the ODE comparisons.
        #[arg(long, default_value_t = 1e-6)]
        ode_tol: f64,
    },
    /// Alpha and Beta BAE energies against the four-boson sector.
    Hyperbolic {
        #[arg(long, value_delimiter = ',', num_args = 0.., default_values_t = [-0.25, 0.25], allow_negative_numbers = true)]
        epsilon: Vec<f64>,
        #[arg(long, value_delimiter = ',', num_args = 0.., default_values_t = [0, 1])]
        p: Vec<u32>,
        #[arg(long, value_delimiter = ',', num_args = 0.., default_values_t = [0, 1])]
        q: Vec<u32>,
        #[arg(long = "M", value_delimiter = ',', num_args = 0.., default_values_t = [0, 1, 2])]
        m: Vec<u32>,
    },
    /// Supersymmetric partners with B = −3/2 and B = −1/2.
    Susy {
        #[arg(long = "M", value_delimiter = ',', num_args = 0.., default_values_t = [0.0, 1.0, 2.0, 1.37], allow_negative_numbers = true)]
        m: Vec<f64>,
        #[arg(long, value_delimiter = ',', num_args = 0.., default_values_t = [-1.0, -2.0], allow_negative_numbers = true)]
        gamma: Vec<f64>,
        #[arg(long, default_value_t = 5)]
        levels: usize,
    },
    /// Darboux-Crum removal of all QES levels.
    Crum {
        #[arg(long, value_delimiter = ',', num_args = 0.., default_values_t = [0.0, 0.2], allow_negative_numbers = true)]
        delta: Vec<f64>,
        #[arg(long = "J", value_delimiter = ',', num_args = 0.., default_values_t = [1, 2, 3])]
        j: Vec<usize>,
        #[arg(long, value_delimiter = ',', num_args = 0.., default_values_t = [0.0, 0.54], allow_negative_numbers = true)]
        l: Vec<f64>,
    },
}

/// Parameters, tolerances and versions behind a report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub parameters: BTreeMap<String, Value>,
    pub tolerances: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub provenance: Provenance,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
    pub passed: bool,
    /// Exit status the report maps to.
    pub status: i32,
}

impl Report {
    fn new(command: &str, parameters: BTreeMap<String, Value>, tolerances: BTreeMap<String, f64>, columns: &[&str]) -> Self {
        Self {
            provenance: Provenance {
                tool: "qes".into(),
                version: env!("CARGO_PKG_VERSION").into(),
                command: command.into(),
                parameters,
                tolerances,
            },
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            passed: true,
            status: EXIT_OK,
        }
    }

    fn fail(&mut self, status: i32) {
        self.passed = false;
        self.status = self.status.max(status);
    }
}

/// Exit code for an error that aborted a command.
pub fn exit_code(err: &QesError) -> i32 {
    match err {
        QesError::InvalidParameters(_)
        | QesError::InvalidSector(_)
        | QesError::EmptySector(_)
        | QesError::SingularL(_)
        | QesError::DomainError(_)
        | QesError::ContourError(_)
        | QesError::SingularPoint(_) => EXIT_INVALID,
        QesError::Mismatch(_) | QesError::MissingZeroMode(_) | QesError::LevelMismatch { .. } => EXIT_TOLERANCE,
        _ => EXIT_SOLVER,
    }
}

fn params<const N: usize>(pairs: [(&str, Value); N]) -> BTreeMap<String, Value> {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

fn tols<const N: usize>(pairs: [(&str, f64); N]) -> BTreeMap<String, f64> {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

fn check_tol(t: f64) -> Result<f64> {
    if t > 0.0 && t.is_finite() {
        Ok(t)
    } else {
        Err(QesError::InvalidParameters(format!("tolerance {t}")))
    }
}

fn table1(a: &Table1Args, tol: f64) -> Result<Report> {
    if !(a.l > -0.5) {
        return Err(QesError::InvalidParameters(format!("l = {} must exceed -1/2", a.l)));
    }
    let (h, p) = hermitian_pt_pair(a.delta, a.alpha, a.l);
    let cfg = ShootingConfig::with_levels(a.levels);
    let contour = ContourSpec::default();
    let (hs, ps) = rayon::join(|| radial_eigenvalues(&h, &cfg), || pt_eigenvalues(&p, &contour, &cfg));
    let (hs, ps) = (hs?.energies(), ps?.energies());
    let mut r = Report::new(
        "table1",
        params([
            ("delta", json!(a.delta)),
            ("alpha", json!(a.alpha)),
            ("l", json!(a.l)),
            ("levels", json!(a.levels)),
        ]),
        tols([("difference", tol), ("energy", cfg.energy_tolerance)]),
        &["n", "hermitian", "pt", "difference", "hermitian_residual", "pt_residual"],
    );
    for n in 0..hs.len().max(ps.len()) {
        let eh = hs.get(n).copied();
        let ep = ps.get(n).copied();
        let diff = eh.zip(ep).map(|(a, b)| b - a);
        if diff.is_none_or(|d| d.abs() > tol) {
            r.fail(EXIT_TOLERANCE);
        }
        let rh = eh.map(|e| radial_phase_residual(&h, e, &cfg)).transpose()?;
        let rp = ep.map(|e| pt_mismatch(&p, &contour, &cfg, e).map(f64::abs)).transpose()?;
        r.rows.push(vec![json!(n), json!(eh), json!(ep), json!(diff), json!(rh), json!(rp)]);
    }
    Ok(r)
}

fn table2(a: &Table2Args, tol: f64) -> Result<Report> {
    if a.j == 0 || !(a.l > -0.5) {
        return Err(QesError::InvalidParameters(format!("need J >= 1 and l > -1/2, got J = {}, l = {}", a.j, a.l)));
    }
    let (h, p) = qes_radial_pt_pair(a.delta, a.j, a.l);
    let hcfg = ShootingConfig::with_levels(a.levels + a.j);
    let pcfg = ShootingConfig::with_levels(a.levels);
    let contour = ContourSpec::default();
    let (hs, ps) = rayon::join(|| radial_eigenvalues(&h, &hcfg), || pt_eigenvalues(&p, &contour, &pcfg));
    let (hs, ps) = (hs?.energies(), ps?.energies());
    let mut r = Report::new(
        "table2",
        params([
            ("delta", json!(a.delta)),
            ("J", json!(a.j)),
            ("l", json!(a.l)),
            ("levels", json!(a.levels)),
        ]),
        tols([("offset", tol), ("energy", pcfg.energy_tolerance)]),
        &["n", "hermitian", "pt", "hermitian_n_plus_J", "offset_difference", "hermitian_residual", "pt_residual"],
    );
    for n in 0..a.levels {
        let eh = hs.get(n).copied();
        let ep = ps.get(n).copied();
        let shifted = hs.get(n + a.j).copied();
        let diff = ep.zip(shifted).map(|(a, b)| a - b);
        if diff.is_none_or(|d| d.abs() > tol) {
            r.fail(EXIT_TOLERANCE);
        }
        let rh = eh.map(|e| radial_phase_residual(&h, e, &hcfg)).transpose()?;
        let rp = ep.map(|e| pt_mismatch(&p, &contour, &pcfg, e).map(f64::abs)).transpose()?;
        r.rows.push(vec![
            json!(n),
            json!(eh),
            json!(ep),
            json!(shifted),
            json!(diff),
            json!(rh),
            json!(rp),
        ]);
    }
    Ok(r)
}

fn spectrum(cmd: &SpectrumCmd) -> Result<Report> {
    match *cmd {
        SpectrumCmd::Sextic {
            delta,
            alpha,
            l,
            c,
            bc,
            levels,
        } => {
            let cfg = ShootingConfig::with_levels(levels);
            let (spec, s) = match bc {
                SexticBcArg::Radial => {
                    let spec = SexticSpec::new(delta, alpha, l, c, SexticBc::HermitianRadial);
                    (spec, radial_eigenvalues(&spec, &cfg)?)
                }
                SexticBcArg::Pt | SexticBcArg::PtRight => {
                    let spec = SexticSpec::new(delta, alpha, l, c, SexticBc::PTContour);
                    let contour = if bc == SexticBcArg::Pt {
                        ContourSpec::default()
                    } else {
                        ContourSpec::right_half()
                    };
                    (spec, pt_eigenvalues(&spec, &contour, &cfg)?)
                }
            };
            let mut r = Report::new(
                "spectrum sextic",
                params([
                    ("delta", json!(spec.delta)),
                    ("alpha", json!(spec.alpha)),
                    ("l", json!(spec.l)),
                    ("C", json!(spec.c_shift)),
                    ("bc", json!(format!("{bc:?}").to_lowercase())),
                    ("levels", json!(levels)),
                ]),
                tols([("energy", cfg.energy_tolerance)]),
                &["n", "energy"],
            );
            r.rows = s.levels.iter().map(|lv| vec![json!(lv.index), json!(lv.energy)]).collect();
            Ok(r)
        }
        SpectrumCmd::Hyperbolic {
            a,
            b,
            c,
            gamma,
            m,
            shift,
            bc,
            levels,
        } => {
            let cfg = ShootingConfig::with_levels(levels);
            let tag = match bc {
                HyperbolicBcArg::Half => HyperbolicBc::HalfLine,
                HyperbolicBcArg::Even | HyperbolicBcArg::Full => HyperbolicBc::RealLineEven,
                HyperbolicBcArg::Odd => HyperbolicBc::RealLineOdd,
                HyperbolicBcArg::Pt => HyperbolicBc::PTShifted,
            };
            let spec = HyperbolicSpec::new(a, b, c, gamma, shift, tag);
            let s = if bc == HyperbolicBcArg::Full {
                hyperbolic_full_line_eigenvalues(&spec, m, &cfg)?
            } else {
                hyperbolic_eigenvalues(&spec, m, &cfg)?
            };
            let mut r = Report::new(
                "spectrum hyperbolic",
                params([
                    ("A", json!(a)),
                    ("B", json!(b)),
                    ("C", json!(c)),
                    ("gamma", json!(gamma)),
                    ("M", json!(m)),
                    ("shift", json!(shift)),
                    ("bc", json!(format!("{bc:?}").to_lowercase())),
                    ("levels", json!(levels)),
                ]),
                tols([("energy", cfg.energy_tolerance)]),
                &["n", "energy"],
            );
            r.rows = s.levels.iter().map(|lv| vec![json!(lv.index), json!(lv.energy)]).collect();
            Ok(r)
        }
    }
}

fn max_pairwise(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| a.total_cmp(b));
    v
}

/// One cell of the sextic suite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SexticCell {
    pub epsilon: f64,
    pub q: u32,
    pub m: u32,
    /// Smallest solution count over Fock, both BAE branches and BD.
    pub count: usize,
    /// Largest disagreement among Fock, BAE and BD, in mapped energy.
    pub algebraic: f64,
    /// Largest distance of a V₁ or V₂ shooting level from the BAE value.
    pub ode: f64,
    pub bae_residual: f64,
}

/// Fock vs BAE (P1 and P2) vs Bender-Dunne vs shooting on V₁ and V₂.
pub fn sextic_cell(epsilon: f64, q: u32, m: u32) -> Result<SexticCell> {
    let p2 = SexticModelSpec::new(epsilon, q, m, SexticBranch::P2);
    let p1 = SexticModelSpec::new(epsilon, q, m, SexticBranch::P1);
    let (s2, s1) = (solve_sextic_bae(&p2)?, solve_sextic_bae(&p1)?);
    let map = |e: f64| sextic_energy_map(&p2, e);
    let e2 = sorted(s2.iter().map(|s| map(s.energy)).collect());
    let e1 = sorted(s1.iter().map(|s| map(s.energy)).collect());
    let (n, k) = p2.sector_charges();
    let fock = sorted(diagonalize(&build_sector3(epsilon, 1.0, n as i64, k)?).energies().into_iter().map(map).collect());
    let (v1, v2) = sextic_potentials(&p2);
    let bd = qes_roots(&v2, m as usize + 1)?;
    let bd = sorted(bd.roots.clone());
    let algebraic = max_pairwise(&e2, &e1)
        .max(max_pairwise(&e2, &fock))
        .max(max_pairwise(&e2, &bd));
    let cfg = ShootingConfig::default();
    let right = ContourSpec::right_half();
    let mut ode = 0.0f64;
    for &e in &e2 {
        let (_, r) = radial_eigenvalue_near(&v2, e, &cfg)?;
        let p = pt_eigenvalue_near(&v1, &right.matched(&v1, &cfg, e)?, &cfg, e)?;
        ode = ode.max((r - e).abs()).max((p - e).abs());
    }
    let bae_residual = s1.iter().chain(&s2).map(|s| s.residual).fold(0.0, f64::max);
    Ok(SexticCell {
        epsilon,
        q,
        m,
        count: [e1.len(), e2.len(), fock.len(), bd.len()].into_iter().min().unwrap_or(0),
        algebraic,
        ode,
        bae_residual,
    })
}

/// One cell of the hyperbolic suite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HyperbolicCell {
    pub epsilon: f64,
    pub p: u32,
    pub q: u32,
    pub m: u32,
    pub count: usize,
    /// Alpha vs Beta under the parameter map.
    pub alpha_beta: f64,
    /// Alpha vs the four-boson sector.
    pub fock: f64,
    pub bae_residual: f64,
}

pub fn hyperbolic_cell(epsilon: f64, p: u32, q: u32, m: u32) -> Result<HyperbolicCell> {
    let alpha = HyperbolicModelSpec::alpha(epsilon, p, q, m);
    let beta = hyperbolic_parameter_map(&alpha)?;
    let (sa, sb) = (solve_hyperbolic_bae(&alpha)?, solve_hyperbolic_bae(&beta)?);
    let ea = sorted(sa.iter().map(|s| s.energy).collect());
    let eb = sorted(sb.iter().map(|s| s.energy).collect());
    let fock = sorted(diagonalize(&build_sector4(epsilon, alpha.g, alpha.sector_charges())?).energies());
    Ok(HyperbolicCell {
        epsilon,
        p,
        q,
        m,
        count: ea.len().min(eb.len()).min(fock.len()),
        alpha_beta: max_pairwise(&ea, &eb),
        fock: max_pairwise(&ea, &fock),
        bae_residual: sa.iter().chain(&sb).map(|s| s.residual).fold(0.0, f64::max),
    })
}

fn record_error(r: &mut Report, row: Vec<Value>, err: &QesError) {
    let mut row = row;
    row.push(json!(format!("error: {err}")));
    r.rows.push(row);
    r.fail(exit_code(err).max(EXIT_TOLERANCE));
}

fn grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect()
}

fn crosscheck(suite: &Suite, tol: Option<f64>) -> Result<Report> {
    match suite {
        Suite::Sextic { epsilon, q, m, ode_tol } => {
            let alg = tol.unwrap_or(1e-8);
            check_tol(*ode_tol)?;
            let cells: Vec<(f64, u32, u32)> = epsilon
                .iter()
                .flat_map(|&e| q.iter().flat_map(move |&qq| m.iter().map(move |&mm| (e, qq, mm))))
                .collect();
            let results: Vec<Result<SexticCell>> = cells.par_iter().map(|&(e, qq, mm)| sextic_cell(e, qq, mm)).collect();
            let mut r = Report::new(
                "crosscheck sextic",
                params([("epsilon", json!(epsilon)), ("q", json!(q)), ("M", json!(m))]),
                tols([("algebraic", alg), ("ode", *ode_tol)]),
                &["epsilon", "q", "M", "count", "algebraic", "ode", "bae_residual", "status"],
            );
            for (&(e, qq, mm), res) in cells.iter().zip(results) {
                let head = vec![json!(e), json!(qq), json!(mm)];
                match res {
                    Ok(c) => {
                        let ok = c.count == mm as usize + 1 && c.algebraic <= alg && c.ode <= *ode_tol;
                        if !ok {
                            r.fail(EXIT_TOLERANCE);
                        }
                        let mut row = head;
                        row.extend([json!(c.count), json!(c.algebraic), json!(c.ode), json!(c.bae_residual)]);
                        row.push(json!(if ok { "pass" } else { "fail" }));
                        r.rows.push(row);
                    }
                    Err(err) => record_error(&mut r, [head, vec![Value::Null; 4]].concat(), &err),
                }
            }
            Ok(r)
        }
        Suite::Hyperbolic { epsilon, p, q, m } => {
            let alg = tol.unwrap_or(1e-8);
            let mut cells = Vec::new();
            for &e in epsilon {
                for &pp in p {
                    for &qq in q {
                        for &mm in m {
                            cells.push((e, pp, qq, mm));
                        }
                    }
                }
            }
            let results: Vec<Result<HyperbolicCell>> =
                cells.par_iter().map(|&(e, pp, qq, mm)| hyperbolic_cell(e, pp, qq, mm)).collect();
            let mut r = Report::new(
                "crosscheck hyperbolic",
                params([("epsilon", json!(epsilon)), ("p", json!(p)), ("q", json!(q)), ("M", json!(m))]),
                tols([("algebraic", alg)]),
                &["epsilon", "p", "q", "M", "count", "alpha_beta", "fock", "bae_residual", "status"],
            );
            for (&(e, pp, qq, mm), res) in cells.iter().zip(results) {
                let head = vec![json!(e), json!(pp), json!(qq), json!(mm)];
                match res {
                    Ok(c) => {
                        let ok = c.count == mm as usize + 1 && c.alpha_beta <= alg && c.fock <= alg;
                        if !ok {
                            r.fail(EXIT_TOLERANCE);
                        }
                        let mut row = head;
                        row.extend([json!(c.count), json!(c.alpha_beta), json!(c.fock), json!(c.bae_residual)]);
                        row.push(json!(if ok { "pass" } else { "fail" }));
                        r.rows.push(row);
                    }
                    Err(err) => record_error(&mut r, [head, vec![Value::Null; 4]].concat(), &err),
                }
            }
            Ok(r)
        }
        Suite::Susy { m, gamma, levels } => {
            let iso = tol.unwrap_or(crate::transforms::ISOSPECTRAL_TOLERANCE);
            let cells: Vec<(f64, f64)> = m.iter().flat_map(|&mm| gamma.iter().map(move |&g| (mm, g))).collect();
            let xs = grid(-5.0, 5.0, 200);
            let results: Vec<_> = cells
                .par_iter()
                .map(|&(mm, g)| {
                    let partner = susy_partner_check(mm, g, &xs)?;
                    let spectra = susy_isospectrality_check(mm, g, *levels)?;
                    Ok((partner, spectra))
                })
                .collect::<Vec<Result<_>>>();
            let mut r = Report::new(
                "crosscheck susy",
                params([("M", json!(m)), ("gamma", json!(gamma)), ("levels", json!(levels))]),
                tols([
                    ("zero_mode", crate::transforms::ZERO_MODE_TOLERANCE),
                    ("identity", crate::transforms::PARTNER_TOLERANCE),
                    ("isospectral", iso),
                ]),
                &[
                    "M",
                    "gamma",
                    "zero_mode_residual",
                    "lower_identity",
                    "upper_identity",
                    "zero_mode_energy",
                    "level_deviation",
                    "status",
                ],
            );
            for (&(mm, g), res) in cells.iter().zip(results) {
                let head = vec![json!(mm), json!(g)];
                match res {
                    Ok((pa, sp)) => {
                        let ok = sp.max_deviation <= iso && sp.upper.len() == *levels;
                        if !ok {
                            r.fail(EXIT_TOLERANCE);
                        }
                        let mut row = head;
                        row.extend([
                            json!(pa.zero_mode.max_deviation),
                            json!(pa.lower_identity.max_deviation),
                            json!(pa.upper_identity.max_deviation),
                            json!(sp.zero_mode_energy),
                            json!(sp.max_deviation),
                        ]);
                        row.push(json!(if ok { "pass" } else { "fail" }));
                        r.rows.push(row);
                    }
                    Err(err) => record_error(&mut r, [head, vec![Value::Null; 5]].concat(), &err),
                }
            }
            Ok(r)
        }
        Suite::Crum { delta, j, l } => {
            let roots_tol = tol.unwrap_or(1e-8);
            let mut cells = Vec::new();
            for &d in delta {
                for &jj in j {
                    for &ll in l {
                        cells.push((d, jj, ll));
                    }
                }
            }
            let xs = grid(0.2, 3.0, 280);
            let results: Vec<Result<(f64, f64)>> = cells
                .par_iter()
                .map(|&(d, jj, ll)| {
                    let spec = SexticSpec::at_qes_point(d, jj, ll, 0.0, SexticBc::HermitianRadial);
                    let c = crum_remove_qes_levels(&spec, jj, &xs)?;
                    let bd = sorted(qes_roots(&spec, jj)?.roots);
                    Ok((c.deviation.max_deviation, max_pairwise(&c.removed_energies, &bd)))
                })
                .collect();
            let mut r = Report::new(
                "crosscheck crum",
                params([("delta", json!(delta)), ("J", json!(j)), ("l", json!(l))]),
                tols([("potential", crate::transforms::CRUM_TOLERANCE), ("energies", roots_tol)]),
                &["delta", "J", "l", "potential_deviation", "energy_deviation", "status"],
            );
            for (&(d, jj, ll), res) in cells.iter().zip(results) {
                let head = vec![json!(d), json!(jj), json!(ll)];
                match res {
                    Ok((pd, ed)) => {
                        let ok = ed <= roots_tol;
                        if !ok {
                            r.fail(EXIT_TOLERANCE);
                        }
                        let mut row = head;
                        row.extend([json!(pd), json!(ed), json!(if ok { "pass" } else { "fail" })]);
                        r.rows.push(row);
                    }
                    Err(err) => record_error(&mut r, [head, vec![Value::Null; 2]].concat(), &err),
                }
            }
            Ok(r)
        }
    }
}

/// Runs a parsed command.
pub fn run(cli: &Cli) -> Result<Report> {
    let tol = cli.tol.map(check_tol).transpose()?;
    match &cli.command {
        Command::Table1(a) => table1(a, tol.unwrap_or(2e-6)),
        Command::Table2(a) => table2(a, tol.unwrap_or(2e-6)),
        Command::Spectrum(s) => spectrum(s),
        Command::Crosscheck(s) => crosscheck(s, tol),
    }
}

/// `x` with 12 significant digits.
pub fn format_number(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".into();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..15).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        format!("{x:.11e}")
    }
}

fn cell_text(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::Number(n) => match n.as_f64() {
            Some(x) if n.is_f64() => format_number(x),
            _ => n.to_string(),
        },
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Renders a report. CSV starts with a `#`-prefixed JSON provenance line.
pub fn render(report: &Report, format: Format) -> Result<String> {
    let io = |e: &dyn std::fmt::Display| QesError::InvalidParameters(format!("output: {e}"));
    match format {
        Format::Json => serde_json::to_string_pretty(report).map(|s| s + "\n").map_err(|e| io(&e)),
        Format::Csv => {
            let mut out = format!(
                "# {}\n",
                serde_json::to_string(&report.provenance).map_err(|e| io(&e))?
            );
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(&report.columns).map_err(|e| io(&e))?;
            for row in &report.rows {
                w.write_record(row.iter().map(cell_text)).map_err(|e| io(&e))?;
            }
            let bytes = w.into_inner().map_err(|e| io(&e))?;
            out.push_str(&String::from_utf8_lossy(&bytes));
            Ok(out)
        }
        Format::Pretty => {
            let p = &report.provenance;
            let mut out = format!("{} {} · {}\n", p.tool, p.version, p.command);
            for (k, v) in &p.parameters {
                out.push_str(&format!("  {k} = {v}\n"));
            }
            for (k, v) in &p.tolerances {
                out.push_str(&format!("  tol.{k} = {v:e}\n"));
            }
            let cells: Vec<Vec<String>> = report.rows.iter().map(|r| r.iter().map(cell_text).collect()).collect();
            let mut widths: Vec<usize> = report.columns.iter().map(|c| c.chars().count()).collect();
            for row in &cells {
                for (i, c) in row.iter().enumerate() {
                    if i < widths.len() {
                        widths[i] = widths[i].max(c.chars().count());
                    } else {
                        widths.push(c.chars().count());
                    }
                }
            }
            let line = |items: &[String]| -> String {
                items
                    .iter()
                    .enumerate()
                    .map(|(i, s)| format!("{s:>w$}", w = widths[i]))
                    .collect::<Vec<_>>()
                    .join("  ")
                    .trim_end()
                    .to_string()
                    + "\n"
            };
            out.push_str(&line(&report.columns));
            for row in &cells {
                out.push_str(&line(row));
            }
            out.push_str(if report.passed { "PASS\n" } else { "FAIL\n" });
            Ok(out)
        }
    }
}

fn configure_threads() -> std::result::Result<(), String> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("{THREADS_ENV} must be a positive integer, got {v:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

/// Parses `args`, runs, writes the report and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_INVALID,
            };
        }
    };
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return EXIT_INVALID;
    }
    let report = match run(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    let text = match render(&report, cli.format) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_SOLVER;
        }
    };
    match &cli.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, text) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return EXIT_INVALID;
            }
        }
        None => print!("{text}"),
    }
    report.status
}
