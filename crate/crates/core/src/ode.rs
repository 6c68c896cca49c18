//! Adaptive Dormand-Prince 8(5,3) integration of `ψ'' = q(x) ψ` along
//! straight segments and circular arcs of the complex plane.
//!
//! The independent variable of every segment is a real parameter
//! `t ∈ [0, 1]`; the state is `(ψ, dψ/dx)`. The equation is linear, so the
//! state is rescaled whenever it grows (or shrinks) too far and the
//! accumulated logarithmic scale is returned alongside the final state.

use num_complex::Complex64;

use crate::error::{QesError, Result};

/// `(ψ, dψ/dx)`.
pub type State = [Complex64; 2];

/// A piece of an integration contour.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Segment {
    Line { from: Complex64, to: Complex64 },
    /// Arc of the circle `|x - center| = radius`, swept from `from_angle` to
    /// `to_angle` (radians, either orientation).
    Arc {
        center: Complex64,
        radius: f64,
        from_angle: f64,
        to_angle: f64,
    },
}

impl Segment {
    pub fn line(from: impl Into<Complex64>, to: impl Into<Complex64>) -> Self {
        Segment::Line {
            from: from.into(),
            to: to.into(),
        }
    }

    pub fn arc(radius: f64, from_angle: f64, to_angle: f64) -> Self {
        Segment::Arc {
            center: Complex64::new(0.0, 0.0),
            radius,
            from_angle,
            to_angle,
        }
    }

    pub fn point(&self, t: f64) -> Complex64 {
        match *self {
            Segment::Line { from, to } => from + (to - from) * t,
            Segment::Arc {
                center,
                radius,
                from_angle,
                to_angle,
            } => center + Complex64::from_polar(radius, from_angle + (to_angle - from_angle) * t),
        }
    }

    /// `dx/dt`.
    pub fn tangent(&self, t: f64) -> Complex64 {
        match *self {
            Segment::Line { from, to } => to - from,
            Segment::Arc {
                radius,
                from_angle,
                to_angle,
                ..
            } => {
                let sweep = to_angle - from_angle;
                Complex64::i()
                    * sweep
                    * Complex64::from_polar(radius, from_angle + sweep * t)
            }
        }
    }

    pub fn length(&self) -> f64 {
        match *self {
            Segment::Line { from, to } => (to - from).norm(),
            Segment::Arc {
                radius,
                from_angle,
                to_angle,
                ..
            } => radius * (to_angle - from_angle).abs(),
        }
    }

    pub fn start(&self) -> Complex64 {
        self.point(0.0)
    }

    pub fn end(&self) -> Complex64 {
        self.point(1.0)
    }
}

/// Step-size control settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    /// Upper bound on `|h| * sqrt(|q(x)|)` per step, which keeps the local
    /// phase advance of oscillatory solutions below one radian.
    pub max_phase_step: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rtol: 1e-12,
            atol: 1e-300,
            max_steps: 200_000,
            max_phase_step: 1.0,
        }
    }
}

impl Tolerances {
    pub fn with_rtol(rtol: f64) -> Self {
        Self {
            rtol,
            ..Self::default()
        }
    }
}

/// Result of integrating over one or more segments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Propagated {
    pub state: State,
    /// `ln` of the factor divided out of the state while integrating.
    pub log_scale: f64,
    pub steps: usize,
}

const RESCALE_HIGH: f64 = 1e100;
const RESCALE_LOW: f64 = 1e-100;

/// Integrate `ψ'' = q(x) ψ` along `segments` in order, starting from `y0`.
///
/// `observer` is called with `(x, &state)` at the start and after every
/// accepted step; the state it sees may have been rescaled.
pub fn propagate<Q, O>(
    segments: &[Segment],
    y0: State,
    q: &Q,
    tol: &Tolerances,
    mut observer: O,
) -> Result<Propagated>
where
    Q: Fn(Complex64) -> Complex64,
    O: FnMut(Complex64, &State),
{
    let mut y = y0;
    let mut log_scale = 0.0;
    let mut steps = 0;
    if let Some(first) = segments.first() {
        observer(first.start(), &y);
    }
    for seg in segments {
        let out = integrate_segment(seg, y, q, tol, &mut observer)?;
        y = out.state;
        log_scale += out.log_scale;
        steps += out.steps;
    }
    Ok(Propagated {
        state: y,
        log_scale,
        steps,
    })
}

fn rhs<Q: Fn(Complex64) -> Complex64>(seg: &Segment, q: &Q, t: f64, y: &State) -> State {
    let dx = seg.tangent(t);
    let x = seg.point(t);
    [y[1] * dx, q(x) * y[0] * dx]
}

#[inline]
fn axpy(y: &State, terms: &[(f64, &State)], h: f64) -> State {
    let mut out = *y;
    for (c, k) in terms {
        let s = c * h;
        out[0] += k[0] * s;
        out[1] += k[1] * s;
    }
    out
}

fn max_norm(y: &State) -> f64 {
    y[0].norm().max(y[1].norm())
}

fn integrate_segment<Q, O>(
    seg: &Segment,
    y0: State,
    q: &Q,
    tol: &Tolerances,
    observer: &mut O,
) -> Result<Propagated>
where
    Q: Fn(Complex64) -> Complex64,
    O: FnMut(Complex64, &State),
{
    let len = seg.length();
    if len == 0.0 {
        return Ok(Propagated {
            state: y0,
            log_scale: 0.0,
            steps: 0,
        });
    }
    let mut y = y0;
    let mut log_scale = 0.0;
    let mut t = 0.0_f64;

    let phase_cap = |t: f64| -> f64 {
        let qa = q(seg.point(t)).norm().max(1.0);
        tol.max_phase_step / (qa.sqrt() * len)
    };
    let mut h = phase_cap(0.0).min(0.05);
    let mut k1 = rhs(seg, q, 0.0, &y);
    let mut steps = 0usize;
    let mut rejected_in_row = 0usize;

    while t < 1.0 {
        if steps >= tol.max_steps {
            return Err(QesError::IntegrationFailure(format!(
                "step limit {} reached at t = {t}",
                tol.max_steps
            )));
        }
        h = h.min(phase_cap(t));
        let last = t + h >= 1.0;
        if last {
            h = 1.0 - t;
        }
        if h < 1e-15 {
            return Err(QesError::IntegrationFailure(format!(
                "step size underflow at x = {}",
                seg.point(t)
            )));
        }

        let k2 = rhs(seg, q, t + C2 * h, &axpy(&y, &[(A21, &k1)], h));
        let k3 = rhs(seg, q, t + C3 * h, &axpy(&y, &[(A31, &k1), (A32, &k2)], h));
        let k4 = rhs(seg, q, t + C4 * h, &axpy(&y, &[(A41, &k1), (A43, &k3)], h));
        let k5 = rhs(
            seg,
            q,
            t + C5 * h,
            &axpy(&y, &[(A51, &k1), (A53, &k3), (A54, &k4)], h),
        );
        let k6 = rhs(
            seg,
            q,
            t + C6 * h,
            &axpy(&y, &[(A61, &k1), (A64, &k4), (A65, &k5)], h),
        );
        let k7 = rhs(
            seg,
            q,
            t + C7 * h,
            &axpy(&y, &[(A71, &k1), (A74, &k4), (A75, &k5), (A76, &k6)], h),
        );
        let k8 = rhs(
            seg,
            q,
            t + C8 * h,
            &axpy(
                &y,
                &[(A81, &k1), (A84, &k4), (A85, &k5), (A86, &k6), (A87, &k7)],
                h,
            ),
        );
        let k9 = rhs(
            seg,
            q,
            t + C9 * h,
            &axpy(
                &y,
                &[
                    (A91, &k1),
                    (A94, &k4),
                    (A95, &k5),
                    (A96, &k6),
                    (A97, &k7),
                    (A98, &k8),
                ],
                h,
            ),
        );
        let k10 = rhs(
            seg,
            q,
            t + C10 * h,
            &axpy(
                &y,
                &[
                    (A101, &k1),
                    (A104, &k4),
                    (A105, &k5),
                    (A106, &k6),
                    (A107, &k7),
                    (A108, &k8),
                    (A109, &k9),
                ],
                h,
            ),
        );
        let k11 = rhs(
            seg,
            q,
            t + C11 * h,
            &axpy(
                &y,
                &[
                    (A111, &k1),
                    (A114, &k4),
                    (A115, &k5),
                    (A116, &k6),
                    (A117, &k7),
                    (A118, &k8),
                    (A119, &k9),
                    (A1110, &k10),
                ],
                h,
            ),
        );
        let y12 = axpy(
            &y,
            &[
                (A121, &k1),
                (A124, &k4),
                (A125, &k5),
                (A126, &k6),
                (A127, &k7),
                (A128, &k8),
                (A129, &k9),
                (A1210, &k10),
                (A1211, &k11),
            ],
            h,
        );
        let k12 = rhs(seg, q, t + h, &y12);

        let y_new = axpy(
            &y,
            &[
                (B1, &k1),
                (B6, &k6),
                (B7, &k7),
                (B8, &k8),
                (B9, &k9),
                (B10, &k10),
                (B11, &k11),
                (B12, &k12),
            ],
            h,
        );

        // Hairer's combined 5th/3rd order error estimate.
        let mut err = 0.0;
        let mut err2 = 0.0;
        // a component passing through zero is measured against the other
        let floor = 1e-6 * max_norm(&y);
        for i in 0..2 {
            let sk = tol.atol + tol.rtol * y[i].norm().max(y_new[i].norm()).max(floor);
            let bsum = k1[i] * B1
                + k6[i] * B6
                + k7[i] * B7
                + k8[i] * B8
                + k9[i] * B9
                + k10[i] * B10
                + k11[i] * B11
                + k12[i] * B12;
            let e3 = bsum - k1[i] * BHH1 - k9[i] * BHH2 - k12[i] * BHH3;
            let e5 = k1[i] * ER1
                + k6[i] * ER6
                + k7[i] * ER7
                + k8[i] * ER8
                + k9[i] * ER9
                + k10[i] * ER10
                + k11[i] * ER11
                + k12[i] * ER12;
            err2 += (e3.norm() / sk).powi(2);
            err += (e5.norm() / sk).powi(2);
        }
        let mut deno = err + 0.01 * err2;
        if deno <= 0.0 {
            deno = 1.0;
        }
        let err = h * err * (1.0 / (deno * 2.0)).sqrt();

        let fac11 = err.powf(0.125);
        let h_new = h / (fac11 / 0.9).clamp(1.0 / 6.0, 3.0);

        if err <= 1.0 && err.is_finite() {
            t = if last { 1.0 } else { t + h };
            y = y_new;
            steps += 1;
            rejected_in_row = 0;
            let m = max_norm(&y);
            if !m.is_finite() {
                return Err(QesError::IntegrationFailure(format!(
                    "non-finite state at x = {}",
                    seg.point(t)
                )));
            }
            if !(RESCALE_LOW..=RESCALE_HIGH).contains(&m) && m > 0.0 {
                y[0] /= m;
                y[1] /= m;
                log_scale += m.ln();
            }
            k1 = rhs(seg, q, t, &y);
            observer(seg.point(t), &y);
            h = h_new;
        } else {
            rejected_in_row += 1;
            h = if err.is_finite() {
                h / (fac11 / 0.9).clamp(1.0, 3.0)
            } else {
                h * 0.1
            };
            if rejected_in_row > 60 {
                return Err(QesError::IntegrationFailure(format!(
                    "repeated step rejection at x = {}",
                    seg.point(t)
                )));
            }
        }
    }
    Ok(Propagated {
        state: y,
        log_scale,
        steps,
    })
}

// Dormand-Prince 8(5,3) tableau.
const C2: f64 = 0.526001519587677318785587544488E-01;
const C3: f64 = 0.789002279381515978178381316732E-01;
const C4: f64 = 0.118350341907227396726757197510E+00;
const C5: f64 = 0.281649658092772603273242802490E+00;
const C6: f64 = 0.333333333333333333333333333333E+00;
const C7: f64 = 0.25E+00;
const C8: f64 = 0.307692307692307692307692307692E+00;
const C9: f64 = 0.651282051282051282051282051282E+00;
const C10: f64 = 0.6E+00;
const C11: f64 = 0.857142857142857142857142857142E+00;

const A21: f64 = 5.26001519587677318785587544488E-2;
const A31: f64 = 1.97250569845378994544595329183E-2;
const A32: f64 = 5.91751709536136983633785987549E-2;
const A41: f64 = 2.95875854768068491816892993775E-2;
const A43: f64 = 8.87627564304205475450678981324E-2;
const A51: f64 = 2.41365134159266685502369798665E-1;
const A53: f64 = -8.84549479328286085344864962717E-1;
const A54: f64 = 9.24834003261792003115737966543E-1;
const A61: f64 = 3.7037037037037037037037037037E-2;
const A64: f64 = 1.70828608729473871279604482173E-1;
const A65: f64 = 1.25467687566822425016691814123E-1;
const A71: f64 = 3.7109375E-2;
const A74: f64 = 1.70252211019544039314978060272E-1;
const A75: f64 = 6.02165389804559606850219397283E-2;
const A76: f64 = -1.7578125E-2;
const A81: f64 = 3.70920001185047927108779319836E-2;
const A84: f64 = 1.70383925712239993810214054705E-1;
const A85: f64 = 1.07262030446373284651809199168E-1;
const A86: f64 = -1.53194377486244017527936158236E-2;
const A87: f64 = 8.27378916381402288758473766002E-3;
const A91: f64 = 6.24110958716075717114429577812E-1;
const A94: f64 = -3.36089262944694129406857109825E0;
const A95: f64 = -8.68219346841726006818189891453E-1;
const A96: f64 = 2.75920996994467083049415600797E1;
const A97: f64 = 2.01540675504778934086186788979E1;
const A98: f64 = -4.34898841810699588477366255144E1;
const A101: f64 = 4.77662536438264365890433908527E-1;
const A104: f64 = -2.48811461997166764192642586468E0;
const A105: f64 = -5.90290826836842996371446475743E-1;
const A106: f64 = 2.12300514481811942347288949897E1;
const A107: f64 = 1.52792336328824235832596922938E1;
const A108: f64 = -3.32882109689848629194453265587E1;
const A109: f64 = -2.03312017085086261358222928593E-2;
const A111: f64 = -9.3714243008598732571704021658E-1;
const A114: f64 = 5.18637242884406370830023853209E0;
const A115: f64 = 1.09143734899672957818500254654E0;
const A116: f64 = -8.14978701074692612513997267357E0;
const A117: f64 = -1.85200656599969598641566180701E1;
const A118: f64 = 2.27394870993505042818970056734E1;
const A119: f64 = 2.49360555267965238987089396762E0;
const A1110: f64 = -3.0467644718982195003823669022E0;
const A121: f64 = 2.27331014751653820792359768449E0;
const A124: f64 = -1.05344954667372501984066689879E1;
const A125: f64 = -2.00087205822486249909675718444E0;
const A126: f64 = -1.79589318631187989172765950534E1;
const A127: f64 = 2.79488845294199600508499808837E1;
const A128: f64 = -2.85899827713502369474065508674E0;
const A129: f64 = -8.87285693353062954433549289258E0;
const A1210: f64 = 1.23605671757943030647266201528E1;
const A1211: f64 = 6.43392746015763530355970484046E-1;

const B1: f64 = 5.42937341165687622380535766363E-2;
const B6: f64 = 4.45031289275240888144113950566E0;
const B7: f64 = 1.89151789931450038304281599044E0;
const B8: f64 = -5.8012039600105847814672114227E0;
const B9: f64 = 3.1116436695781989440891606237E-1;
const B10: f64 = -1.52160949662516078556178806805E-1;
const B11: f64 = 2.01365400804030348374776537501E-1;
const B12: f64 = 4.47106157277725905176885569043E-2;

const BHH1: f64 = 0.244094488188976377952755905512E+00;
const BHH2: f64 = 0.733846688281611857341361741547E+00;
const BHH3: f64 = 0.220588235294117647058823529412E-01;

const ER1: f64 = 0.1312004499419488073250102996E-01;
const ER6: f64 = -0.1225156446376204440720569753E+01;
const ER7: f64 = -0.4957589496572501915214079952E+00;
const ER8: f64 = 0.1664377182454986536961530415E+01;
const ER9: f64 = -0.3503288487499736816886487290E+00;
const ER10: f64 = 0.3341791187130174790297318841E+00;
const ER11: f64 = 0.8192320648511571246570742613E-01;
const ER12: f64 = -0.2235530786388629525884427845E-01;

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn harmonic_oscillation_on_real_line() {
        // ψ'' = -ψ, ψ(0)=0, ψ'(0)=1 → ψ = sin x
        let seg = [Segment::line(0.0, 10.0)];
        let out = propagate(
            &seg,
            [c(0.0, 0.0), c(1.0, 0.0)],
            &|_| c(-1.0, 0.0),
            &Tolerances::default(),
            |_, _| {},
        )
        .unwrap();
        assert!((out.state[0].re - 10f64.sin()).abs() < 1e-10);
        assert!((out.state[1].re - 10f64.cos()).abs() < 1e-10);
    }

    #[test]
    fn exponential_growth_rescales() {
        // ψ'' = 400 ψ grows like e^{20x}; over x ∈ [0, 20] that is e^{400}.
        let seg = [Segment::line(0.0, 20.0)];
        let out = propagate(
            &seg,
            [c(1.0, 0.0), c(20.0, 0.0)],
            &|_| c(400.0, 0.0),
            &Tolerances::default(),
            |_, _| {},
        )
        .unwrap();
        let log_psi = out.state[0].norm().ln() + out.log_scale;
        assert!((log_psi - 400.0).abs() < 1e-8, "{log_psi}");
        assert!((out.state[1] / out.state[0] - 20.0).norm() < 1e-9);
    }

    #[test]
    fn arc_is_path_independent_for_entire_solutions() {
        // ψ'' = ψ has solution e^x; integrate from 1 to i along an arc and
        // compare with the closed form.
        let seg = [Segment::arc(1.0, 0.0, std::f64::consts::FRAC_PI_2)];
        let e1 = 1f64.exp();
        let out = propagate(
            &seg,
            [c(e1, 0.0), c(e1, 0.0)],
            &|_| c(1.0, 0.0),
            &Tolerances::default(),
            |_, _| {},
        )
        .unwrap();
        let expect = c(0.0, 1.0).exp();
        assert!((out.state[0] - expect).norm() < 1e-11);
    }
}
