//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use num_complex::Complex64;
use qes_core::bender_dunne::{anti_isospectral_check, bd_eval, bd_sequence, qes_roots, recursion_symmetry_transform};
use qes_core::bethe::{solve_hyperbolic_bae, solve_sextic_bae};
use qes_core::fock::{build_sector3, build_sector4, diagonalize};
use qes_core::model::{
    herm_pt_swap, hermitian_pt_pair, hyperbolic_parameter_map, qes_radial_pt_pair, sextic_energy_map,
    sextic_potentials, HyperbolicBc, HyperbolicModelSpec, HyperbolicSpec, SexticBc, SexticBranch, SexticModelSpec,
    SexticSpec,
};
use qes_core::schrodinger::{
    evaluate_potential, pt_eigenvalue_near, pt_eigenvalues, radial_eigenvalue_near, radial_eigenvalues, ContourSpec,
    PotentialRef, ShootingConfig,
};
use qes_core::transforms::{crum_remove_qes_levels, susy_isospectrality_check, susy_partner_check};
use qes_core::Result;

struct Outcome {
    passed: bool,
    detail: String,
}

impl Outcome {
    fn new(passed: bool, detail: String) -> Self {
        Self { passed, detail }
    }
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| a.total_cmp(b));
    v
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect()
}

const TABLE1_H: [f64; 5] = [7.17030615, 19.5220637, 35.2744653, 53.7929337, 74.7062464];
const TABLE1_PT: [f64; 5] = [7.17030616, 19.5220637, 35.2744653, 53.7929337, 74.7062466];
const TABLE2_H: [f64; 5] = [-11.0798088, 1.45911359, 14.4686962, 30.1033293, 48.4085576];
const TABLE2_PT: [f64; 5] = [30.1033297, 48.4085577, 69.0856538, 91.8988711, 116.668373];

fn criterion1() -> Result<Outcome> {
    let start = Instant::now();
    let (h, p) = hermitian_pt_pair(0.2, 0.31, 0.54);
    let cfg = ShootingConfig::with_levels(5);
    let hs = radial_eigenvalues(&h, &cfg)?.energies();
    let ps = pt_eigenvalues(&p, &ContourSpec::default(), &cfg)?.energies();
    let elapsed = start.elapsed().as_secs_f64();
    let dh = max_diff(&hs, &TABLE1_H);
    let dp = max_diff(&ps, &TABLE1_PT);
    let dhp = max_diff(&hs, &ps);
    Ok(Outcome::new(
        dh <= 5e-6 && dp <= 5e-6 && dhp <= 2e-6 && elapsed <= 120.0,
        format!("hermitian {dh:.1e}, pt {dp:.1e}, hermitian-pt {dhp:.1e}, {elapsed:.1}s"),
    ))
}

fn criterion2() -> Result<Outcome> {
    let (h, p) = qes_radial_pt_pair(0.2, 3, 0.54);
    let hs = radial_eigenvalues(&h, &ShootingConfig::with_levels(5))?.energies();
    let ps = pt_eigenvalues(&p, &ContourSpec::default(), &ShootingConfig::with_levels(5))?.energies();
    let dh = max_diff(&hs, &TABLE2_H);
    let dp = max_diff(&ps, &TABLE2_PT);
    let shift = (0..2).map(|n| (ps[n] - hs[n + 3]).abs()).fold(0.0, f64::max);
    Ok(Outcome::new(
        dh <= 5e-6 && dp <= 5e-6 && shift <= 2e-6,
        format!("hermitian {dh:.1e}, pt {dp:.1e}, E_n(PT) - E_n+3(H) {shift:.1e}"),
    ))
}

fn criterion3() -> Result<Outcome> {
    let mut algebraic = 0.0f64;
    let mut ode = 0.0f64;
    let mut bad_counts = Vec::new();
    let cfg = ShootingConfig::default();
    let right = ContourSpec::right_half();
    let mut cells = 0;
    for eps in [0.0, 0.2, -0.2, 1.0, -1.0] {
        for q in 0..=3u32 {
            for m in 0..=4u32 {
                cells += 1;
                let p2 = SexticModelSpec::new(eps, q, m, SexticBranch::P2);
                let p1 = SexticModelSpec::new(eps, q, m, SexticBranch::P1);
                let map = |e: f64| sextic_energy_map(&p2, e);
                let b2 = sorted(solve_sextic_bae(&p2)?.iter().map(|s| map(s.energy)).collect());
                let b1 = sorted(solve_sextic_bae(&p1)?.iter().map(|s| map(s.energy)).collect());
                let (n, k) = p2.sector_charges();
                let fock = diagonalize(&build_sector3(eps, 1.0, n as i64, k)?).energies();
                let fock = sorted(fock.into_iter().map(map).collect());
                let (v1, v2) = sextic_potentials(&p2);
                let bd = sorted(qes_roots(&v2, m as usize + 1)?.roots);
                let want = m as usize + 1;
                if [b1.len(), b2.len(), fock.len(), bd.len()].iter().any(|&c| c != want) {
                    bad_counts.push((eps, q, m));
                }
                algebraic = algebraic
                    .max(max_diff(&fock, &b2))
                    .max(max_diff(&fock, &b1))
                    .max(max_diff(&fock, &bd));
                for &e in &fock {
                    let (_, r) = radial_eigenvalue_near(&v2, e, &cfg)?;
                    let p = pt_eigenvalue_near(&v1, &right.matched(&v1, &cfg, e)?, &cfg, e)?;
                    ode = ode.max((r - e).abs()).max((p - e).abs());
                }
            }
        }
    }
    Ok(Outcome::new(
        algebraic <= 1e-8 && ode <= 1e-6 && bad_counts.is_empty(),
        format!("{cells} cells, algebraic {algebraic:.1e}, ode {ode:.1e}, wrong counts {bad_counts:?}"),
    ))
}

fn criterion4() -> Result<Outcome> {
    let mut worst_ab = 0.0f64;
    let mut worst_fock = 0.0f64;
    let mut bad_counts = Vec::new();
    let mut cells = 0;
    for eps in [0.25, -0.25, 1.0, -1.0] {
        for p in 0..=3u32 {
            for q in 0..=3u32 {
                for m in 0..=4u32 {
                    cells += 1;
                    let alpha = HyperbolicModelSpec::alpha(eps, p, q, m);
                    let beta = hyperbolic_parameter_map(&alpha)?;
                    let ea = sorted(solve_hyperbolic_bae(&alpha)?.iter().map(|s| s.energy).collect());
                    let eb = sorted(solve_hyperbolic_bae(&beta)?.iter().map(|s| s.energy).collect());
                    let fock = diagonalize(&build_sector4(eps, alpha.g, alpha.sector_charges())?).energies();
                    if ea.len() != m as usize + 1 || eb.len() != ea.len() || fock.len() != ea.len() {
                        bad_counts.push((eps, p, q, m));
                    }
                    worst_ab = worst_ab.max(max_diff(&ea, &eb));
                    worst_fock = worst_fock.max(max_diff(&ea, &fock));
                }
            }
        }
    }
    Ok(Outcome::new(
        worst_ab <= 1e-8 && worst_fock <= 1e-8 && bad_counts.is_empty(),
        format!("{cells} cells, alpha-beta {worst_ab:.1e}, alpha-fock {worst_fock:.1e}, wrong counts {bad_counts:?}"),
    ))
}

fn criterion5() -> Result<Outcome> {
    let grid = linspace(-5.0, 5.0, 400);
    let (mut zero, mut ident, mut levels) = (0.0f64, 0.0f64, 0.0f64);
    for m in [0.0, 1.0, 2.0, 1.37] {
        for gamma in [-1.0, -2.0] {
            let pc = susy_partner_check(m, gamma, &grid)?;
            zero = zero.max(pc.zero_mode.max_deviation);
            ident = ident
                .max(pc.lower_identity.max_deviation)
                .max(pc.upper_identity.max_deviation);
            let iso = susy_isospectrality_check(m, gamma, 5)?;
            if iso.upper.len() != 5 || iso.lower.len() != 6 {
                levels = f64::INFINITY;
            }
            levels = levels.max(max_diff(&iso.lower[1..], &iso.upper));
        }
    }
    Ok(Outcome::new(
        zero <= 1e-8 && ident <= 1e-9 && levels <= 1e-7,
        format!("zero mode {zero:.1e}, identities {ident:.1e}, levels {levels:.1e}"),
    ))
}

fn criterion6() -> Result<Outcome> {
    let grid = linspace(0.2, 3.0, 280);
    let (mut pot, mut en) = (0.0f64, 0.0f64);
    for (delta, j, l) in [(0.0, 1, 0.0), (0.0, 2, 0.54), (0.2, 3, 0.54)] {
        let spec = SexticSpec::at_qes_point(delta, j, l, 0.0, SexticBc::HermitianRadial);
        let c = crum_remove_qes_levels(&spec, j, &grid)?;
        pot = pot.max(c.deviation.max_deviation);
        let bd = sorted(qes_roots(&spec, j)?.roots);
        en = en.max(max_diff(&sorted(c.removed_energies.clone()), &bd));
    }
    Ok(Outcome::new(
        pot <= 1e-6 && en <= 1e-8,
        format!("potential {pot:.1e}, removed energies {en:.1e}"),
    ))
}

fn criterion7() -> Result<Outcome> {
    // (a) negating δ and C negates the QES levels
    let mut anti = true;
    for i in 0..10 {
        let delta = -1.0 + 2.0 * i as f64 / 9.0;
        for j in 1..=4 {
            for (l, c) in [(0.0, 0.0), (0.54, 0.3), (1.5, -1.2)] {
                let spec = SexticSpec::at_qes_point(delta, j, l, c, SexticBc::HermitianRadial);
                anti &= anti_isospectral_check(&spec, j)?;
            }
        }
    }

    // (b) the recursion symmetry leaves every P_n unchanged
    let mut rec = 0.0f64;
    for (delta, alpha, l, c) in [(0.2, 0.31, 0.54, 0.0), (-0.7, 2.5, 1.1, 0.4), (1.3, -3.0, 0.0, -2.0)] {
        let s = SexticSpec::new(delta, alpha, l, c, SexticBc::HermitianRadial);
        let a = bd_sequence(&s, 10)?;
        let b = bd_sequence(&recursion_symmetry_transform(&s), 10)?;
        let scale = a.coeffs.iter().flatten().fold(1.0f64, |m, x| m.max(x.abs()));
        rec = rec.max(a.max_difference(&b) / scale);
    }

    // (c) zeros of P_J stay zeros of P_{J+1}, P_{J+2}
    let mut factor = 0.0f64;
    for (delta, l) in [(0.0, 0.0), (0.2, 0.54), (-0.5, 1.5)] {
        for j in 1..=5 {
            let spec = SexticSpec::at_qes_point(delta, j, l, 0.0, SexticBc::HermitianRadial);
            let roots = qes_roots(&spec, j)?;
            for &r in &roots.roots {
                for n in [j + 1, j + 2] {
                    let (p, dp) = bd_eval(&spec, n, Complex64::new(r, 0.0));
                    let rel = if dp.norm() > 0.0 { (p / dp).norm() } else { p.norm() };
                    factor = factor.max(rel / r.abs().max(1.0));
                }
            }
        }
    }

    // (d) B↔C, γ→−γ is an involution and shifts the potential by iπ
    let mut swap = 0.0f64;
    let mut involution = true;
    for (a, b, c, g, m) in [(2.0, -1.5, 0.5, -1.0, 1.0), (1.0, 0.3, -2.2, 0.7, 0.0), (2.0, 2.0, 1.0, -2.0, 2.0)] {
        let h = HyperbolicSpec::new(a, b, c, g, 0.1, HyperbolicBc::RealLineEven);
        let s = herm_pt_swap(&h);
        let back = herm_pt_swap(&s);
        involution &= back.b_pole == h.b_pole && back.c_pole == h.c_pole && back.gamma == h.gamma;
        for x in linspace(0.3, 3.0, 27) {
            let lhs = evaluate_potential(PotentialRef::Hyperbolic(&h, m), x.into())?;
            let rhs = evaluate_potential(PotentialRef::Hyperbolic(&s, m), Complex64::new(x, std::f64::consts::PI))?;
            swap = swap.max((lhs - rhs).norm() / lhs.norm().max(1.0));
        }
    }

    // (e) moving the matching and outer radii changes nothing
    let spec = SexticSpec::new(0.2, 0.31, 0.54, 0.0, SexticBc::HermitianRadial);
    let near = ShootingConfig {
        x_match: Some(1.0),
        x_outer: Some(4.0),
        ..ShootingConfig::with_levels(5)
    };
    let far = ShootingConfig {
        x_match: Some(2.0),
        x_outer: Some(8.0),
        ..near
    };
    let stable = max_diff(&radial_eigenvalues(&spec, &near)?.energies(), &radial_eigenvalues(&spec, &far)?.energies());

    Ok(Outcome::new(
        anti && rec <= 1e-12 && factor <= 1e-9 && involution && swap <= 1e-12 && stable <= 1e-9,
        format!(
            "anti-isospectral {anti}, recursion {rec:.1e}, factorization {factor:.1e}, involution {involution}, \
             shift {swap:.1e}, radii {stable:.1e}"
        ),
    ))
}

fn main() -> ExitCode {
    let criteria: [(usize, fn() -> Result<Outcome>); 7] = [
        (1, criterion1),
        (2, criterion2),
        (3, criterion3),
        (4, criterion4),
        (5, criterion5),
        (6, criterion6),
        (7, criterion7),
    ];
    let mut all = true;
    for (n, run) in criteria {
        let t = Instant::now();
        let (passed, detail) = match run() {
            Ok(o) => (o.passed, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        all &= passed;
        let mark = if passed { "PASS" } else { "FAIL" };
        println!("criterion {n}: {mark} ({detail}) [{:.1}s]", t.elapsed().as_secs_f64());
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
