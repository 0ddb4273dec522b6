//! Attractor classification from a fixed set of initial conditions.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::integrate::{integrate, integrate_to, IntegratorConfig, Trajectory};
use super::phase::{angle_dist, circular_mean, complex_phase_difference, folded, phase_series};
use super::{max_diff, System, VectorField};
use crate::error::{Error, Result};

/// Attractor labels; variant order is alphabetical so sorted sets print as
/// `AP+IP`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Label {
    AP,
    /// Locked at a phase difference away from 0 and π, or an asymmetric
    /// entrained response.
    ASYM,
    FP,
    HA,
    IP,
    LA,
    /// Modulated or otherwise non-closing state.
    OTHER,
    UNRESOLVED,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::AP => "AP",
            Label::ASYM => "ASYM",
            Label::FP => "FP",
            Label::HA => "HA",
            Label::IP => "IP",
            Label::LA => "LA",
            Label::OTHER => "OTHER",
            Label::UNRESOLVED => "UNRESOLVED",
        }
    }

    pub fn parse(s: &str) -> Option<Label> {
        Some(match s {
            "AP" => Label::AP,
            "ASYM" => Label::ASYM,
            "FP" => Label::FP,
            "HA" => Label::HA,
            "IP" => Label::IP,
            "LA" => Label::LA,
            "OTHER" => Label::OTHER,
            "UNRESOLVED" => Label::UNRESOLVED,
            _ => return None,
        })
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

pub type LabelSet = BTreeSet<Label>;

/// `+`-joined sorted labels.
pub fn join_labels(set: &LabelSet) -> String {
    set.iter().map(|l| l.as_str()).collect::<Vec<_>>().join("+")
}

/// Named initial conditions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IcPolicy {
    pub ics: Vec<(String, Vec<f64>)>,
    /// Also start from the symmetric IC's final oscillation with the second
    /// oscillator advanced by half a period (autonomous systems only).
    pub half_period_seed: bool,
}

impl IcPolicy {
    /// Symmetric `(0.1, 0.05)` pair, the same with oscillator 2 negated,
    /// near-origin `1e-3`, and a large `0.8` probe.
    pub fn default_for(sys: &System) -> Self {
        let v = |a: &[f64]| a.to_vec();
        let ics = match sys {
            System::NfReduced { .. } => vec![
                ("symmetric".into(), v(&[0.1, 0.01, 0.3])),
                ("anti-phase".into(), v(&[0.1, 0.01, PI - 0.3])),
                ("near-origin".into(), v(&[1e-3, 1e-4, 1.0])),
                ("large".into(), v(&[0.8, 0.1, 2.0])),
            ],
            System::NfCartesian { .. } => vec![
                ("symmetric".into(), v(&[0.1, 0.05, 0.1, 0.05])),
                ("anti-phase".into(), v(&[0.1, 0.05, -0.1, -0.05])),
                ("near-origin".into(), v(&[1e-3; 4])),
                ("large".into(), v(&[0.8; 4])),
            ],
            System::Wc { .. } | System::WcForced { .. } => vec![
                ("symmetric".into(), v(&[0.1, 0.05, 0.1, 0.05])),
                ("anti-phase".into(), v(&[0.1, 0.05, -0.1, 0.05])),
                ("near-origin".into(), v(&[1e-3; 4])),
                ("large".into(), v(&[0.8; 4])),
            ],
        };
        Self {
            ics,
            half_period_seed: sys.is_autonomous() && !matches!(sys, System::NfReduced { .. }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClassifyOptions {
    /// Transient length in time-scale units (intrinsic or forcing periods).
    pub transient_periods: f64,
    pub window_periods: f64,
    /// How many further windows to try before giving up.
    pub max_extensions: usize,
    pub amp_floor: f64,
    /// `Δφ` within this of 0 or π counts as IP or AP.
    pub phase_tol: f64,
    /// Largest per-cycle `Δφ` deviation of a locked state.
    pub lock_tol: f64,
    /// Relative amplitude change across a window allowed for a locked state.
    pub amp_drift_tol: f64,
    /// Closure and symmetry tolerance for forced responses.
    pub closure_tol: f64,
    /// Peak-to-peak amplitude separating LA from HA.
    pub la_ha_threshold: f64,
    pub samples_per_period: usize,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self {
            transient_periods: 200.0,
            window_periods: 50.0,
            max_extensions: 3,
            amp_floor: 1e-4,
            phase_tol: 0.05,
            lock_tol: 1e-2,
            amp_drift_tol: 1e-3,
            closure_tol: 1e-6,
            la_ha_threshold: 0.3,
            samples_per_period: 64,
        }
    }
}

impl ClassifyOptions {
    pub fn validate(&self) -> Result<()> {
        crate::error::ensure_finite(
            "classification options",
            &[
                self.transient_periods,
                self.window_periods,
                self.amp_floor,
                self.phase_tol,
                self.lock_tol,
                self.amp_drift_tol,
                self.closure_tol,
                self.la_ha_threshold,
            ],
        )?;
        if self.transient_periods < 0.0 || self.window_periods <= 0.0 {
            return Err(Error::Config("window_periods must be positive".into()));
        }
        if self.samples_per_period < 8 {
            return Err(Error::Config("samples_per_period must be at least 8".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IcOutcome {
    pub ic: String,
    pub label: Label,
    pub dphi: Option<f64>,
    pub amplitude: f64,
    /// Response period when one was identified.
    pub period: Option<f64>,
    pub final_state: Vec<f64>,
    pub final_time: f64,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub labels: LabelSet,
    pub outcomes: Vec<IcOutcome>,
}

impl Classification {
    pub fn joined(&self) -> String {
        join_labels(&self.labels)
    }
}

enum Verdict {
    Done {
        label: Label,
        dphi: Option<f64>,
        amplitude: f64,
        period: Option<f64>,
        note: String,
    },
    /// Still settling; the metric should shrink in later windows.
    Settling { metric: f64, amplitude: f64 },
    /// Not settling and not closing.
    Wandering { amplitude: f64, note: String },
    /// Amplitude shrinking at a steady exponential rate (log decrement per
    /// third of a window).
    Decaying { amplitude: f64, rate: f64 },
    /// Amplitude still growing; too early to say.
    Growing,
}

fn range(v: impl Iterator<Item = f64>) -> f64 {
    let (lo, hi) = v.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    hi - lo
}

/// Oscillation size of one window: peak-to-peak of the observables, or
/// the largest modulus for complex charts.
fn window_amplitude(sys: &System, xs: &[Vec<f64>]) -> f64 {
    match sys {
        System::NfCartesian { .. } => xs
            .iter()
            .map(|x| {
                let (z1, z2) = sys.complex_amplitudes(x).unwrap();
                z1.norm().max(z2.norm())
            })
            .fold(0.0, f64::max),
        System::NfReduced { .. } => xs.iter().map(|x| x[0].abs()).fold(0.0, f64::max),
        _ => {
            let a = range(xs.iter().map(|x| sys.signals(x).0));
            let b = range(xs.iter().map(|x| sys.signals(x).1));
            a.max(b)
        }
    }
}

fn phase_label(dphi: f64, tol: f64) -> Label {
    let f = folded(dphi);
    if f <= tol {
        Label::IP
    } else if (f - PI).abs() <= tol {
        Label::AP
    } else {
        Label::ASYM
    }
}

fn judge_autonomous(sys: &System, tr: &Trajectory, opts: &ClassifyOptions) -> Verdict {
    let scale = sys.time_scale();
    let (a, b) = (tr.t_start(), tr.t_end());
    let n = ((b - a) / scale * opts.samples_per_period as f64).ceil() as usize + 1;
    let (ts, xs) = tr.resample(a, b, n);
    let half = xs.len() / 2;
    let amp = window_amplitude(sys, &xs);
    let (amp1, amp2) = (window_amplitude(sys, &xs[..half]), window_amplitude(sys, &xs[half..]));
    if amp < opts.amp_floor {
        return Verdict::Done {
            label: Label::FP,
            dphi: None,
            amplitude: amp,
            period: None,
            note: String::new(),
        };
    }
    let drift = (amp2 - amp1).abs() / amp.max(f64::MIN_POSITIVE);
    if !matches!(sys, System::NfReduced { .. }) {
        let k = xs.len() / 3;
        let a = [
            window_amplitude(sys, &xs[..k]),
            window_amplitude(sys, &xs[k..2 * k]),
            window_amplitude(sys, &xs[2 * k..]),
        ];
        let (d1, d2) = ((a[1] / a[0]).ln(), (a[2] / a[1]).ln());
        let slow = opts.amp_drift_tol / 3.0;
        if d1 < -slow && d2 < -slow && d2 / d1 >= 0.7 {
            return Verdict::Decaying { amplitude: amp, rate: d2 };
        }
        if d1 > slow && d2 > slow {
            return Verdict::Growing;
        }
    }

    if let System::NfReduced { .. } = sys {
        let last = &xs[xs.len() - 1];
        let motion = xs[half..]
            .iter()
            .map(|x| max_diff(x, last))
            .fold(0.0, f64::max);
        if motion <= opts.closure_tol.max(1e-8) * last[0].abs().max(1.0) * 1e3 {
            let label = if last[1].abs() > opts.lock_tol * last[0].abs() {
                Label::ASYM
            } else {
                phase_label(last[2], opts.phase_tol)
            };
            return Verdict::Done {
                label,
                dphi: Some(super::phase::wrap_2pi(last[2])),
                amplitude: amp,
                period: None,
                note: "equilibrium of the reduced chart".into(),
            };
        }
        return Verdict::Settling {
            metric: motion,
            amplitude: amp,
        };
    }

    let (dphis, period) = match sys {
        System::NfCartesian { .. } => {
            let v: Option<Vec<f64>> = xs[half..]
                .iter()
                .map(|x| {
                    let (z1, z2) = sys.complex_amplitudes(x).unwrap();
                    complex_phase_difference(z1, z2).ok()
                })
                .collect();
            match v {
                Some(v) => (v, None),
                // one oscillator quiet while the other is not
                None => {
                    return Verdict::Done {
                        label: Label::ASYM,
                        dphi: None,
                        amplitude: amp,
                        period: None,
                        note: "one oscillator at rest".into(),
                    }
                }
            }
        }
        _ => {
            let y1: Vec<f64> = xs.iter().map(|x| sys.signals(x).0).collect();
            let y2: Vec<f64> = xs.iter().map(|x| sys.signals(x).1).collect();
            match phase_series(&ts, &y1, &y2) {
                Ok(s) => (s.dphi, Some(s.period)),
                Err(_) => {
                    return Verdict::Settling {
                        metric: f64::INFINITY,
                        amplitude: amp,
                    }
                }
            }
        }
    };
    let mean = circular_mean(&dphis);
    let spread = dphis.iter().map(|&d| angle_dist(d, mean)).fold(0.0, f64::max);
    if spread <= opts.lock_tol && drift <= opts.amp_drift_tol {
        return Verdict::Done {
            label: phase_label(mean, opts.phase_tol),
            dphi: Some(mean),
            amplitude: amp,
            period,
            note: String::new(),
        };
    }
    if spread > 10.0 * opts.lock_tol.max(0.05) {
        return Verdict::Wandering {
            amplitude: amp,
            note: format!("phase difference not locked (spread {spread:.3})"),
        };
    }
    Verdict::Settling {
        metric: spread.max(drift),
        amplitude: amp,
    }
}

fn judge_forced(sys: &System, tr: &Trajectory, opts: &ClassifyOptions) -> Verdict {
    let base = sys.forcing_base_period().expect("forced system");
    let p = 0.5 * base;
    let end = tr.t_end();
    let probe: Vec<f64> = (0..=8).map(|j| end - j as f64 * p / 8.0).collect();
    let closure = |k: f64| {
        probe
            .iter()
            .map(|&s| max_diff(&tr.interpolate(s), &tr.interpolate(s - k * p)))
            .fold(0.0, f64::max)
    };
    let errs = [(1.0, closure(1.0)), (2.0, closure(2.0)), (4.0, closure(4.0))];
    let (k, err) = errs
        .iter()
        .copied()
        .find(|(_, e)| *e <= opts.closure_tol)
        .unwrap_or((0.0, errs.iter().map(|e| e.1).fold(f64::INFINITY, f64::min)));
    let (ts, xs) = tr.resample(end - 4.0 * p, end, 4 * opts.samples_per_period + 1);
    let _ = ts;
    let amp = window_amplitude(sys, &xs);
    if k == 0.0 {
        return Verdict::Settling {
            metric: err,
            amplitude: amp,
        };
    }
    let sym = xs.iter().map(|x| max_diff(&sys.swap(x), x)).fold(0.0, f64::max);
    let period = Some(k * p);
    let tol = 10.0 * opts.closure_tol;
    let (label, note) = if sym <= tol {
        if k == 1.0 {
            let l = if amp < opts.la_ha_threshold { Label::LA } else { Label::HA };
            (l, String::new())
        } else {
            (Label::IP, String::new())
        }
    } else {
        let ap = (0..=8)
            .map(|j| {
                let s = end - k * p - j as f64 * p / 8.0;
                max_diff(&sys.swap(&tr.interpolate(s)), &tr.interpolate(s + 0.5 * k * p))
            })
            .fold(0.0, f64::max);
        if ap <= tol {
            (Label::AP, String::new())
        } else {
            (Label::ASYM, "asymmetric entrained response".into())
        }
    };
    Verdict::Done {
        label,
        dphi: None,
        amplitude: amp,
        period,
        note,
    }
}

fn classify_one(
    sys: &System,
    name: &str,
    x0: &[f64],
    opts: &ClassifyOptions,
    cfg: &IntegratorConfig,
) -> (IcOutcome, Option<Trajectory>) {
    let scale = sys.time_scale();
    let fail = |label: Label, note: String, x: Vec<f64>, t: f64| IcOutcome {
        ic: name.to_string(),
        label,
        dphi: None,
        amplitude: f64::NAN,
        period: None,
        final_state: x,
        final_time: t,
        note,
    };
    let t_trans = opts.transient_periods * scale;
    let mut x = match integrate_to(sys, x0, 0.0, t_trans, cfg) {
        Ok(x) => x,
        Err(e) => return (fail(Label::UNRESOLVED, e.to_string(), x0.to_vec(), 0.0), None),
    };
    let mut t = t_trans;
    let win = opts.window_periods * scale;
    let mut last_metric = f64::INFINITY;
    let mut last_rate: Option<f64> = None;
    let mut note = String::new();
    for ext in 0..=opts.max_extensions {
        if t + win > cfg.max_time {
            note = format!("max_time {} reached", cfg.max_time);
            break;
        }
        let tr = match integrate(sys, &x, t, t + win, cfg) {
            Ok(tr) => tr,
            Err(e) => return (fail(Label::UNRESOLVED, e.to_string(), x, t), None),
        };
        let verdict = if sys.is_autonomous() {
            judge_autonomous(sys, &tr, opts)
        } else {
            judge_forced(sys, &tr, opts)
        };
        x = tr.last_state().to_vec();
        t = tr.t_end();
        match verdict {
            Verdict::Done {
                label,
                dphi,
                amplitude,
                period,
                note,
            } => {
                return (
                    IcOutcome {
                        ic: name.to_string(),
                        label,
                        dphi,
                        amplitude,
                        period,
                        final_state: x,
                        final_time: t,
                        note,
                    },
                    Some(tr),
                )
            }
            Verdict::Wandering { amplitude, note } => {
                if ext >= 1 {
                    let mut o = fail(Label::OTHER, note, x, t);
                    o.amplitude = amplitude;
                    return (o, Some(tr));
                }
            }
            Verdict::Settling { metric, amplitude } => {
                // Not shrinking: a persistent modulated state.
                if ext >= 1 && metric.is_finite() && metric > 0.5 * last_metric {
                    let mut o = fail(Label::OTHER, format!("no locking (metric {metric:.3e})"), x, t);
                    o.amplitude = amplitude;
                    return (o, Some(tr));
                }
                last_metric = metric;
            }
            Verdict::Decaying { amplitude, rate } => {
                // Two windows at the same exponential rate: the origin wins.
                if let Some(r) = last_rate {
                    let q = rate / r;
                    if (0.8..=1.25).contains(&q) {
                        return (
                            IcOutcome {
                                ic: name.to_string(),
                                label: Label::FP,
                                dphi: None,
                                amplitude,
                                period: None,
                                final_state: x,
                                final_time: t,
                                note: format!("steady exponential decay ({rate:.3e} per third window)"),
                            },
                            Some(tr),
                        );
                    }
                }
                last_rate = Some(rate);
                continue;
            }
            Verdict::Growing => {
                note = "amplitude still growing".into();
            }
        }
        last_rate = None;
    }
    if note.is_empty() {
        note = "still settling after all windows".into();
    }
    (fail(Label::UNRESOLVED, note, x, t), None)
}

/// Seed from an in-phase trajectory: oscillator 2 takes the state it will
/// have half a period later.
fn half_period_seed(sys: &System, tr: &Trajectory, period: f64) -> Vec<f64> {
    let t = tr.t_end() - period;
    let a = tr.interpolate(t);
    let b = tr.interpolate(t + 0.5 * period);
    match sys {
        System::NfCartesian { .. } => vec![a[0], a[1], -a[0], -a[1]],
        _ => vec![a[0], a[1], b[2], b[3]],
    }
}

/// Anti-phase starting state: the symmetric IC relaxed on the uncoupled
/// pair, with oscillator 2 moved half a period ahead. Forced systems and the
/// normal form fall back to the policy's anti-phase IC.
pub fn anti_phase_ic(sys: &System, cfg: &IntegratorConfig) -> Result<Vec<f64>> {
    let fallback = || {
        IcPolicy::default_for(sys)
            .ics
            .into_iter()
            .find(|(n, _)| n == "anti-phase")
            .map(|(_, x)| x)
            .expect("default policy has an anti-phase IC")
    };
    let System::Wc { p, .. } = sys else {
        return Ok(fallback());
    };
    let free = System::wc(p.with_eps(0.0))?;
    let ts = free.time_scale();
    let tr = integrate(&free, &[0.1, 0.05, 0.1, 0.05], 0.0, 200.0 * ts, cfg)?;
    let (t, x) = tr.resample(180.0 * ts, 200.0 * ts, 4000);
    let y: Vec<f64> = x.iter().map(|v| v[0]).collect();
    let peaks = super::phase::peak_times(&t, &y);
    if peaks.len() < 3 {
        // no oscillation at this slope
        return Ok(fallback());
    }
    let period = (peaks[peaks.len() - 1] - peaks[0]) / (peaks.len() - 1) as f64;
    Ok(half_period_seed(sys, &tr, period))
}

/// Integrate from each IC past the transient and label what it settles on.
pub fn classify_attractor(
    sys: &System,
    policy: &IcPolicy,
    opts: &ClassifyOptions,
    cfg: &IntegratorConfig,
) -> Result<Classification> {
    opts.validate()?;
    cfg.validate()?;
    if policy.ics.is_empty() {
        return Err(Error::Config("IC policy is empty".into()));
    }
    for (name, x) in &policy.ics {
        if x.len() != sys.dim() {
            return Err(Error::Config(format!(
                "IC '{name}' has {} components, expected {}",
                x.len(),
                sys.dim()
            )));
        }
    }
    let mut outcomes = Vec::new();
    let mut seed = None;
    for (name, x0) in &policy.ics {
        let (o, tr) = classify_one(sys, name, x0, opts, cfg);
        if seed.is_none() && policy.half_period_seed && o.label == Label::IP {
            if let Some(tr) = tr {
                let period = o.period.unwrap_or(sys.time_scale());
                seed = Some(half_period_seed(sys, &tr, period));
            }
        }
        outcomes.push(o);
    }
    if let Some(s) = seed {
        outcomes.push(classify_one(sys, "half-period-shift", &s, opts, cfg).0);
    }
    let labels = outcomes.iter().map(|o| o.label).collect();
    Ok(Classification { labels, outcomes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nf::{NormalFormCoefficients, TabulatedSet, UnfoldingParams};
    use crate::wc::WilsonCowanParams;

    #[test]
    fn labels_sort_alphabetically() {
        let s: LabelSet = [Label::IP, Label::AP].into_iter().collect();
        assert_eq!(join_labels(&s), "AP+IP");
        assert_eq!(Label::parse("HA"), Some(Label::HA));
    }

    #[test]
    fn below_threshold_is_fixed_point() {
        let sys = System::wc(WilsonCowanParams::paper_p(2.9, 0.02, 0.0)).unwrap();
        let cfg = IntegratorConfig::default().with_tolerances(1e-8, 1e-10);
        let r = classify_attractor(&sys, &IcPolicy::default_for(&sys), &ClassifyOptions::default(), &cfg).unwrap();
        assert_eq!(r.joined(), "FP");
    }

    #[test]
    fn normal_form_weak_coupling_finds_locked_states() {
        let c = NormalFormCoefficients::tabulated(TabulatedSet::ZeroBsp);
        let sys = System::nf_cartesian(UnfoldingParams { lambda: 0.02, eps: 0.01 }, c).unwrap();
        let cfg = IntegratorConfig::default().with_tolerances(1e-9, 1e-12);
        let r = classify_attractor(&sys, &IcPolicy::default_for(&sys), &ClassifyOptions::default(), &cfg).unwrap();
        assert!(r.labels.contains(&Label::IP), "{:?}", r.outcomes);
    }
}
