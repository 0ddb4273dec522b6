//! Natural-parameter continuation of periodic orbits.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::classify::{classify_attractor, ClassifyOptions, IcPolicy, Label};
use super::floquet::{monodromy, nontrivial};
use super::integrate::IntegratorConfig;
use super::orbit::{find_periodic_orbit, OrbitOptions, OrbitRecord, Symmetry};
use super::sweep::EventKind;
use super::{System, VectorField};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BranchOptions {
    pub initial_step: f64,
    pub min_step: f64,
    pub max_step: f64,
    /// Width of the bracket left around each event.
    pub bisect_tol: f64,
    pub max_points: usize,
    /// Peak-to-peak amplitude below which the branch is taken to end at a
    /// Hopf point.
    pub hb_amplitude: f64,
    /// Largest relative period change accepted in one step.
    pub max_period_jump: f64,
    pub orbit: OrbitOptions,
}

impl Default for BranchOptions {
    fn default() -> Self {
        Self {
            initial_step: 0.005,
            min_step: 1e-4,
            max_step: 0.02,
            bisect_tol: 1e-3,
            max_points: 2000,
            hb_amplitude: 1e-3,
            max_period_jump: 0.1,
            orbit: OrbitOptions::default(),
        }
    }
}

impl BranchOptions {
    pub fn validate(&self) -> Result<()> {
        crate::error::ensure_finite(
            "branch options",
            &[self.initial_step, self.min_step, self.max_step, self.bisect_tol, self.hb_amplitude],
        )?;
        if !(self.min_step > 0.0 && self.min_step <= self.initial_step && self.initial_step <= self.max_step) {
            return Err(Error::Config("need 0 < min_step <= initial_step <= max_step".into()));
        }
        if self.bisect_tol <= 0.0 {
            return Err(Error::Config("bisect_tol must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchPoint {
    pub param: f64,
    pub period: f64,
    pub amplitude: f64,
    pub dphi: f64,
    pub symmetry: Symmetry,
    pub stable: bool,
    pub unstable_count: usize,
    pub floquet: Vec<Complex64>,
    pub x0: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchEvent {
    pub kind: EventKind,
    pub param: f64,
    /// Critical multiplier at the bracket end nearest the unit circle.
    pub multiplier: Complex64,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitBranch {
    pub points: Vec<BranchPoint>,
    pub events: Vec<BranchEvent>,
    pub stop_reason: String,
}

fn point(param: f64, o: &OrbitRecord, auto: bool) -> BranchPoint {
    BranchPoint {
        param,
        period: o.period,
        amplitude: o.amplitude,
        dphi: o.dphi,
        symmetry: o.symmetry,
        stable: o.stable,
        unstable_count: o.unstable_count(auto),
        floquet: o.floquet.clone(),
        x0: o.x0.clone(),
    }
}

/// Linear action of the oscillator swap.
fn swap_matrix(sys: &System) -> DMatrix<f64> {
    let n = super::VectorField::dim(sys);
    DMatrix::from_fn(n, n, |i, j| {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        sys.swap(&e)[i]
    })
}

/// Distinguish a symmetry-breaking pitchfork from a fold at a +1 crossing.
///
/// Pointwise-symmetric orbits: the critical eigenvector of the monodromy is
/// either swap-odd (pitchfork) or swap-even (fold). Anti-phase orbits: the
/// half-period map `H = P Φ(T/2)` squares to the monodromy; a critical
/// eigenvalue of `H` near −1 breaks the spatio-temporal symmetry.
fn plus_one_kind(sys: &System, o: &OrbitRecord, m: Complex64, cfg: &IntegratorConfig) -> Result<(EventKind, String)> {
    let p = swap_matrix(sys);
    match o.symmetry {
        Symmetry::IP | Symmetry::SymmetricFixedPattern => {
            let (mm, _) = monodromy(sys, &o.x0, o.t0, o.period, cfg)?;
            let n = mm.nrows();
            let a = mm - DMatrix::identity(n, n) * m.re;
            let svd = a.svd(false, true);
            let vt = svd.v_t.expect("requested");
            let k = svd
                .singular_values
                .iter()
                .enumerate()
                .min_by(|x, y| x.1.total_cmp(y.1))
                .map(|(i, _)| i)
                .unwrap_or(0);
            let v = vt.row(k).transpose();
            let pv = &p * &v;
            let (odd, even) = ((&pv + &v).norm(), (&pv - &v).norm());
            Ok(if odd < even {
                (EventKind::PF, "swap-odd critical mode".into())
            } else {
                (EventKind::FOLD, "swap-even critical mode".into())
            })
        }
        Symmetry::AP => {
            let (half, _) = monodromy(sys, &o.x0, o.t0, 0.5 * o.period, cfg)?;
            let h = &p * half;
            let ev = h.complex_eigenvalues();
            let near_minus = ev.iter().map(|z| (z + 1.0).norm()).fold(f64::INFINITY, f64::min);
            Ok(if near_minus < 0.1 {
                (EventKind::PF, "half-period map eigenvalue near -1".into())
            } else {
                (EventKind::FOLD, "half-period map eigenvalue near +1".into())
            })
        }
        Symmetry::Asym => Ok((EventKind::FOLD, "asymmetric orbit".into())),
    }
}

/// Empirical criticality of a torus event: perturb the orbit on its unstable
/// side and see whether a stable modulated state is nearby.
fn tr_character(sys: &System, o: &OrbitRecord, cfg: &IntegratorConfig) -> String {
    if !sys.is_autonomous() {
        return "criticality not assessed for forced orbits".into();
    }
    let d = 1e-3 * o.amplitude.max(1e-6);
    let x: Vec<f64> = o.x0.iter().enumerate().map(|(i, v)| v + d / (i + 1) as f64).collect();
    let policy = IcPolicy {
        ics: vec![("perturbed orbit".into(), x)],
        half_period_seed: false,
    };
    match classify_attractor(sys, &policy, &ClassifyOptions::default(), cfg) {
        Ok(c) => match c.outcomes[0].label {
            Label::OTHER => "stable modulated state nearby (supercritical)".into(),
            Label::UNRESOLVED => "criticality undetermined".into(),
            // instability too weak to grow within the window
            Label::IP if o.symmetry == Symmetry::IP => "criticality undetermined (instability too weak)".into(),
            Label::AP if o.symmetry == Symmetry::AP => "criticality undetermined (instability too weak)".into(),
            l => format!("no nearby modulated state, settles on {} (subcritical)", l.as_str()),
        },
        Err(e) => format!("criticality undetermined ({e})"),
    }
}

/// Non-trivial multiplier nearest the unit circle.
fn critical(o: &OrbitRecord, auto: bool) -> Complex64 {
    nontrivial(&o.floquet, auto)
        .into_iter()
        .min_by(|a, b| (a.norm() - 1.0).abs().total_cmp(&(b.norm() - 1.0).abs()))
        .unwrap_or(Complex64::new(0.0, 0.0))
}

struct Ctx<'a, B> {
    build: &'a B,
    cfg: &'a IntegratorConfig,
    opts: &'a BranchOptions,
    t0: f64,
}

impl<B: Fn(f64) -> Result<System>> Ctx<'_, B> {
    fn solve(&self, param: f64, x: &[f64], period: f64) -> Result<(System, OrbitRecord)> {
        let sys = (self.build)(param)?;
        let o = find_periodic_orbit(&sys, x, period, self.t0, self.cfg, &self.opts.orbit)?;
        Ok((sys, o))
    }

    /// Shrink `[a, b]` around the change in unstable count.
    fn bisect(
        &self,
        auto: bool,
        mut a: (f64, OrbitRecord),
        mut b: (f64, OrbitRecord),
    ) -> Result<BranchEvent> {
        let target = a.1.unstable_count(auto);
        while (b.0 - a.0).abs() > self.opts.bisect_tol {
            let m = 0.5 * (a.0 + b.0);
            let (_, o) = self.solve(m, &a.1.x0, a.1.period)?;
            if o.unstable_count(auto) == target {
                a = (m, o);
            } else {
                b = (m, o);
            }
        }
        // classify on the side whose critical multiplier is nearer 1
        let (ca, cb) = (critical(&a.1, auto), critical(&b.1, auto));
        let (c, side) = if (ca.norm() - 1.0).abs() <= (cb.norm() - 1.0).abs() {
            (ca, &a)
        } else {
            (cb, &b)
        };
        let sys = (self.build)(side.0)?;
        let (kind, note) = if c.im.abs() > 1e-3 * c.norm().max(1e-300) {
            let unstable = if a.1.unstable_count(auto) > b.1.unstable_count(auto) { &a } else { &b };
            let side = tr_character(&(self.build)(unstable.0)?, &unstable.1, self.cfg);
            (EventKind::TR, format!("complex pair, arg = {:.4}; {side}", c.arg().abs()))
        } else if c.re < 0.0 {
            (EventKind::PD, "real multiplier near -1".into())
        } else {
            plus_one_kind(&sys, &side.1, c, self.cfg)?
        };
        Ok(BranchEvent {
            kind,
            param: 0.5 * (a.0 + b.0),
            multiplier: c,
            note,
        })
    }
}

/// Parameter where the last two points' amplitude² reaches zero, when the
/// amplitude is decreasing.
fn hb_extrapolation(points: &[BranchPoint]) -> Option<f64> {
    let n = points.len();
    if n < 2 {
        return None;
    }
    let (a, b) = (&points[n - 2], &points[n - 1]);
    let (ya, yb) = (a.amplitude.powi(2), b.amplitude.powi(2));
    if yb >= ya {
        return None;
    }
    Some(b.param - yb * (b.param - a.param) / (yb - ya))
}

/// Follow the orbit `orbit0` (converged at `start`) towards `end`.
///
/// Stops at `end`, when the amplitude falls below `hb_amplitude` (Hopf
/// point, located by extrapolating amplitude² to zero), or when the step
/// falls below `min_step` (fold of cycles).
pub fn follow_branch<B>(
    build: B,
    orbit0: &OrbitRecord,
    start: f64,
    end: f64,
    opts: &BranchOptions,
    cfg: &IntegratorConfig,
) -> Result<OrbitBranch>
where
    B: Fn(f64) -> Result<System>,
{
    opts.validate()?;
    if orbit0.residual > opts.orbit.tol * 10.0 {
        return Err(Error::Domain(format!(
            "initial orbit residual {:.3e} is not converged",
            orbit0.residual
        )));
    }
    let sys0 = build(start)?;
    let auto = super::VectorField::is_autonomous(&sys0);
    let ctx = Ctx {
        build: &build,
        cfg,
        opts,
        t0: orbit0.t0,
    };
    let dir = if end >= start { 1.0 } else { -1.0 };
    let mut points = vec![point(start, orbit0, auto)];
    let mut events = Vec::new();
    let mut last = (start, orbit0.clone());
    let mut before: Option<(f64, Vec<f64>, f64)> = None;
    let mut h = opts.initial_step;
    let mut stop_reason = String::from("range exhausted");

    while (end - last.0) * dir > 1e-12 && points.len() < opts.max_points {
        let step = h.min((end - last.0).abs());
        let param = last.0 + dir * step;
        // secant predictor
        let (xp, tp) = match &before {
            Some((pp, xpp, tpp)) => {
                let r = (param - last.0) / (last.0 - pp);
                let x: Vec<f64> = last.1.x0.iter().zip(xpp).map(|(a, b)| a + r * (a - b)).collect();
                (x, if auto { last.1.period + r * (last.1.period - tpp) } else { last.1.period })
            }
            None => (last.1.x0.clone(), last.1.period),
        };
        let attempt = ctx.solve(param, &xp, tp).and_then(|(s, o)| {
            let jump = ((o.period - last.1.period) / last.1.period).abs();
            if jump > opts.max_period_jump || o.symmetry != last.1.symmetry && o.amplitude > opts.hb_amplitude {
                Err(Error::NoConvergence {
                    iterations: 0,
                    residual: jump,
                })
            } else {
                Ok((s, o))
            }
        });
        match attempt {
            Err(_) => {
                h *= 0.5;
                if h < opts.min_step {
                    // A shrinking orbit whose amplitude² extrapolates to zero
                    // just ahead ends at a Hopf point, not a fold.
                    let ev = match hb_extrapolation(&points) {
                        Some(at)
                            if auto
                                && (at - last.0) * dir >= 0.0
                                && (at - last.0).abs() <= 2.0 * opts.max_step =>
                        {
                            BranchEvent {
                                kind: EventKind::HB,
                                param: at,
                                multiplier: Complex64::new(1.0, 0.0),
                                note: "amplitude squared extrapolated to zero".into(),
                            }
                        }
                        _ => {
                            let c = critical(&last.1, auto);
                            let (kind, note) = if c.im.abs() < 1e-3 && c.re > 0.0 {
                                (build)(last.0)
                                    .and_then(|s| plus_one_kind(&s, &last.1, c, cfg))
                                    .unwrap_or((EventKind::FOLD, String::new()))
                            } else {
                                (EventKind::FOLD, String::new())
                            };
                            BranchEvent {
                                kind,
                                param: last.0,
                                multiplier: c,
                                note: format!("continuation cannot proceed; {note}"),
                            }
                        }
                    };
                    stop_reason = format!("step below min_step ({})", ev.kind.as_str());
                    events.push(ev);
                    break;
                }
            }
            Ok((_, o)) => {
                if o.unstable_count(auto) != last.1.unstable_count(auto) {
                    match ctx.bisect(auto, last.clone(), (param, o.clone())) {
                        Ok(ev) => events.push(ev),
                        Err(e) => events.push(BranchEvent {
                            kind: EventKind::FOLD,
                            param,
                            multiplier: critical(&o, auto),
                            note: format!("bisection failed: {e}"),
                        }),
                    }
                }
                points.push(point(param, &o, auto));
                before = Some((last.0, last.1.x0.clone(), last.1.period));
                let small = o.amplitude < opts.hb_amplitude;
                last = (param, o);
                if small {
                    let at = hb_extrapolation(&points).unwrap_or(param);
                    events.push(BranchEvent {
                        kind: EventKind::HB,
                        param: at,
                        multiplier: Complex64::new(1.0, 0.0),
                        note: "amplitude squared extrapolated to zero".into(),
                    });
                    stop_reason = "amplitude below hb_amplitude".into();
                    break;
                }
                h = (h * 1.5).min(opts.max_step);
            }
        }
    }
    Ok(OrbitBranch {
        points,
        events,
        stop_reason,
    })
}
