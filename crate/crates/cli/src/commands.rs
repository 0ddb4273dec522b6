//! One function per subcommand. Each validates everything it needs before
//! doing work, and only stages output; `main` commits it.

use std::path::PathBuf;

use hopfduet_core::analysis::{
    bautin_estimate, c_det, classify_case, is_bistable, is_bistable_exact, k_stb, region_boundaries, Branch,
};
use hopfduet_core::dynamics::classify::join_labels;
use hopfduet_core::dynamics::{
    anti_phase_ic, classify_attractor, find_periodic_orbit, follow_branch, integrate, phase_series, sweep, BifurcationDiagram,
    IcPolicy, IntegratorConfig, Label, System, VectorField,
};
use hopfduet_core::extract::extract_coefficients;
use hopfduet_core::nf::{reduced_to_polar, CoefficientsRecord, NormalFormCoefficients, ReducedState, COEFFICIENT_KEYS};
use hopfduet_core::wc::{ForcingParams, WilsonCowanParams};
use serde_json::json;

use crate::config::{ForcingBlock, Format, RunConfig, SweepBlock};
use crate::output::{g12, Output};
use crate::svg;
use crate::CliError;

pub struct Ctx {
    pub cfg: RunConfig,
    /// Directory of the config file, for relative references.
    pub base: Option<PathBuf>,
    pub out: Output,
}

fn rt(e: hopfduet_core::Error) -> CliError {
    CliError::Runtime(e.to_string())
}

fn cfg_err(field: &str, e: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{field}: {e}"))
}

impl Ctx {
    fn want(&self, f: Format) -> bool {
        self.cfg.formats().contains(&f)
    }

    fn csv(&mut self, suffix: &str, cols: &[&str], rows: &[Vec<String>]) {
        if self.want(Format::Csv) {
            self.out.csv(suffix, cols, rows);
        }
    }

    fn json(&mut self, suffix: &str, v: serde_json::Value) {
        if self.want(Format::Json) {
            self.out.json(suffix, v);
        }
    }

    fn svg(&mut self, suffix: &str, body: impl FnOnce() -> String) {
        if self.want(Format::Svg) {
            self.out.svg(suffix, body());
        }
    }
}

fn coefficient_rows(c: &NormalFormCoefficients) -> Vec<Vec<String>> {
    COEFFICIENT_KEYS
        .iter()
        .zip(c.to_flat())
        .map(|(k, v)| vec![k.to_string(), g12(v)])
        .collect()
}

// ---------------------------------------------------------------- nf

pub fn nf_curves(ctx: &mut Ctx) -> Result<(), CliError> {
    let nf = ctx.cfg.nf_block()?;
    let c = nf.coefficients(ctx.base.as_deref())?;
    let grid = ctx.cfg.curves.clone().unwrap_or_default();
    grid.validate()?;
    let eps = grid.eps_samples();
    let lambdas = grid.lambda_samples();

    let mut rows = Vec::new();
    let mut series = Vec::new();
    for branch in Branch::BOTH {
        for curve in region_boundaries(&eps, branch, &c).map_err(rt)? {
            // split multi-root curves into lower/upper sheets for plotting
            let mut sheets: Vec<Vec<(f64, f64)>> = Vec::new();
            let mut k = 0;
            let mut last = f64::NAN;
            for &(e, l) in &curve.points {
                rows.push(vec![branch.name().into(), curve.curve.as_str().into(), g12(e), g12(l)]);
                k = if e == last { k + 1 } else { 0 };
                last = e;
                if sheets.len() <= k {
                    sheets.push(Vec::new());
                }
                sheets[k].push((l, e));
            }
            for (k, s) in sheets.into_iter().enumerate() {
                let tag = if k == 0 { String::new() } else { format!(" ({})", k + 1) };
                series.push((format!("{} {}{tag}", curve.curve.as_str(), branch.name()), s));
            }
        }
    }
    ctx.csv(".csv", &["branch", "curve", "eps", "lambda"], &rows);

    let intervals = |pred: &dyn Fn(f64, f64) -> bool| -> Vec<serde_json::Value> {
        let mut out = Vec::new();
        for &e in &eps {
            let mut run: Option<(f64, f64)> = None;
            for &l in &lambdas {
                if pred(l, e) {
                    run = Some(run.map_or((l, l), |(a, _)| (a, l)));
                } else if let Some((a, b)) = run.take() {
                    out.push(json!({"eps": e, "lambda_min": a, "lambda_max": b}));
                }
            }
            if let Some((a, b)) = run {
                out.push(json!({"eps": e, "lambda_min": a, "lambda_max": b}));
            }
        }
        out
    };
    let up = |l, e| hopfduet_core::UnfoldingParams { lambda: l, eps: e };
    let bistable = intervals(&|l, e| is_bistable(&up(l, e), &c));
    let bistable_exact = intervals(&|l, e| is_bistable_exact(&up(l, e), &c));
    let cls = classify_case(&c);
    let summary = format!(
        "{} ({}) cdet={} eps_bt={} bistable_rows={}",
        cls.case_label.as_str(),
        serde_json::to_value(cls.hopf_subcase).map_err(|e| CliError::Runtime(e.to_string()))?.as_str().unwrap_or(""),
        g12(c_det(&c)),
        bautin_estimate(&c).map(g12).unwrap_or_else(|_| "none".into()),
        bistable.len()
    );
    ctx.json(
        ".regions.json",
        json!({
            "coefficients": CoefficientsRecord::from(c),
            "classification": cls,
            "cdet": c_det(&c),
            "k_stb_plus": k_stb(Branch::Plus, &c),
            "k_stb_minus": k_stb(Branch::Minus, &c),
            "eps_bt": bautin_estimate(&c).ok(),
            "grid": grid,
            "regions": {
                "bistable": bistable,
                "bistable_exact": bistable_exact,
            },
        }),
    );
    ctx.svg(".svg", || svg::lines("lambda", "eps", &series));
    println!("{summary}");
    Ok(())
}

fn nf_system(ctx: &Ctx) -> Result<System, CliError> {
    let nf = ctx.cfg.nf_block()?;
    let c = nf.coefficients(ctx.base.as_deref())?;
    let p = nf.params()?;
    let sys = if nf.reduced()? {
        System::nf_reduced(p, c)
    } else {
        System::nf_cartesian(p, c)
    };
    sys.map_err(|e| cfg_err("nf", e))
}

fn default_sim_ics(
    sys: &System,
    given: &Option<Vec<Vec<f64>>>,
    cfg: &IntegratorConfig,
) -> Result<Vec<(String, Vec<f64>)>, CliError> {
    Ok(match given {
        Some(v) => v.iter().enumerate().map(|(k, x)| (format!("ic{k}"), x.clone())).collect(),
        None => {
            let sym = IcPolicy::default_for(sys).ics.swap_remove(0);
            vec![sym, ("anti-phase".into(), anti_phase_ic(sys, cfg).map_err(rt)?)]
        }
    })
}

/// Integrate each IC and stage one trajectory file per IC plus a summary.
fn simulate(ctx: &mut Ctx, sys: &System, columns: &[&str]) -> Result<(), CliError> {
    let sim = ctx.cfg.sim.clone().ok_or_else(|| cfg_err("sim", "block is required"))?;
    sim.validate(sys.dim())?;
    let icfg = ctx.cfg.integrator()?;
    let ics = default_sim_ics(sys, &sim.ics, &icfg)?;
    let mut summary = Vec::new();
    let mut series = Vec::new();
    for (k, (name, x0)) in ics.iter().enumerate() {
        let tr = integrate(sys, x0, 0.0, sim.t_end, &icfg).map_err(rt)?;
        let (ts, xs) = tr.resample(0.0, sim.t_end, sim.samples);
        let mut rows = Vec::with_capacity(ts.len());
        let mut amp = Vec::with_capacity(ts.len());
        for (t, x) in ts.iter().zip(&xs) {
            let mut r = vec![g12(*t)];
            r.extend(x.iter().map(|v| g12(*v)));
            if let Some((z1, z2)) = sys.complex_amplitudes(x) {
                r.push(g12(z1.norm()));
                r.push(g12(z2.norm()));
                amp.push((*t, z1.norm()));
            } else {
                amp.push((*t, x[0]));
            }
            rows.push(r);
        }
        ctx.csv(&format!("_ic{k}.csv"), columns, &rows);
        series.push((name.clone(), amp));
        summary.push(summarize(sys, name, &tr, sim.t_end));
    }
    ctx.csv(".csv", &["ic", "dphi", "amplitude1", "amplitude2", "note"], &summary);
    let ylabel = if matches!(sys, System::NfCartesian { .. }) { "|z1|" } else { columns[1] };
    ctx.svg(".svg", || svg::lines("t", ylabel, &series));
    for r in &summary {
        println!("{}: dphi={} amplitudes={},{} {}", r[0], r[1], r[2], r[3], r[4]);
    }
    Ok(())
}

/// Phase difference and amplitudes over the last fifth of the run.
fn summarize(sys: &System, name: &str, tr: &hopfduet_core::dynamics::Trajectory, t_end: f64) -> Vec<String> {
    let last = tr.last_state();
    match sys {
        System::NfCartesian { .. } => {
            let (z1, z2) = sys.complex_amplitudes(last).expect("cartesian chart");
            let dphi = if z1.norm() > 1e-9 && z2.norm() > 1e-9 {
                g12((z2.arg() - z1.arg()).rem_euclid(std::f64::consts::TAU))
            } else {
                String::new()
            };
            vec![name.into(), dphi, g12(z1.norm()), g12(z2.norm()), String::new()]
        }
        System::NfReduced { .. } => {
            let r = ReducedState { s: last[0], d: last[1], dphi: last[2] };
            match reduced_to_polar(&r) {
                Ok((r1, r2, d)) => vec![name.into(), g12(d), g12(r1), g12(r2), String::new()],
                Err(e) => vec![name.into(), String::new(), String::new(), String::new(), e.to_string()],
            }
        }
        _ => {
            let (ts, xs) = tr.resample(0.8 * t_end, t_end, 4000);
            let (y1, y2): (Vec<f64>, Vec<f64>) = xs.iter().map(|x| sys.signals(x)).unzip();
            match phase_series(&ts, &y1, &y2) {
                Ok(ps) => vec![name.into(), g12(ps.mean()), g12(ps.amplitude1), g12(ps.amplitude2), String::new()],
                Err(e) => vec![name.into(), String::new(), String::new(), String::new(), e.to_string()],
            }
        }
    }
}

pub fn nf_sim(ctx: &mut Ctx) -> Result<(), CliError> {
    let sys = nf_system(ctx)?;
    let cols: &[&str] = match sys {
        System::NfReduced { .. } => &["t", "s", "d", "dphi"],
        _ => &["t", "x1", "y1", "x2", "y2", "r1", "r2"],
    };
    simulate(ctx, &sys, cols)
}

/// Single-point classification, or a `(lambda, eps)` sweep when a sweep
/// block is present.
pub fn nf_classify(ctx: &mut Ctx) -> Result<(), CliError> {
    let base = nf_system(ctx)?;
    let opts = ctx.cfg.classify_options()?;
    let icfg = ctx.cfg.integrator()?;
    if let Some(sw) = ctx.cfg.sweep.clone() {
        let axes = sw.axes(&["lambda", "eps"])?;
        let nf = ctx.cfg.nf_block()?.clone();
        let c = nf.coefficients(ctx.base.as_deref())?;
        let p0 = nf.params()?;
        let reduced = nf.reduced()?;
        let names = [axes[0].name.clone(), axes[1].name.clone()];
        let build = move |a: f64, b: f64| {
            let mut p = p0;
            for (n, v) in names.iter().zip([a, b]) {
                match n.as_str() {
                    "lambda" => p.lambda = v,
                    _ => p.eps = v,
                }
            }
            if reduced {
                System::nf_reduced(p, c)
            } else {
                System::nf_cartesian(p, c)
            }
        };
        check_corners(&build, &sw)?;
        let d = sweep(build, axes, &opts, &icfg, &sw.options).map_err(rt)?;
        write_diagram(ctx, &d);
        return Ok(());
    }
    let cls = classify_attractor(&base, &IcPolicy::default_for(&base), &opts, &icfg).map_err(rt)?;
    let rows: Vec<Vec<String>> = cls
        .outcomes
        .iter()
        .map(|o| {
            vec![
                o.ic.clone(),
                o.label.as_str().into(),
                o.dphi.map(g12).unwrap_or_default(),
                g12(o.amplitude),
                o.period.map(g12).unwrap_or_default(),
                o.note.replace(',', ";"),
            ]
        })
        .collect();
    ctx.csv(".csv", &["ic", "label", "dphi", "amplitude", "period", "note"], &rows);
    ctx.json(".json", json!({"system": base.id(), "labels": cls.joined(), "outcomes": cls.outcomes}));
    println!("{}", cls.joined());
    Ok(())
}

// ---------------------------------------------------------------- wc

pub fn wc_extract(ctx: &mut Ctx) -> Result<(), CliError> {
    let p = ctx.cfg.wc_block()?.params()?;
    let opts = ctx.cfg.extract.unwrap_or_default();
    let rep = extract_coefficients(&p, &opts).map_err(rt)?;
    let c = rep.coefficients;
    let subcase = serde_json::to_value(rep.classification.hopf_subcase)
        .ok()
        .and_then(|v| v.as_str().map(String::from))
        .unwrap_or_default();
    let mut rows = coefficient_rows(&c);
    let mut kv = |k: &str, v: String| rows.push(vec![k.into(), v]);
    kv("eps_probe", g12(rep.eps_probe));
    kv("normalization", rep.normalization.clone());
    kv("lambda_wc", g12(rep.lambda_wc));
    kv("lambda_unfolding", g12(rep.lambda_unfolding));
    kv("residuals", g12(rep.residuals));
    kv("smallest_divisor", g12(rep.smallest_divisor));
    kv("diagonal_residual", g12(rep.diagonal_residual));
    kv("nonresonant_max", g12(rep.nonresonant_max));
    kv("richardson_delta", g12(rep.richardson_delta));
    kv("warning", (rep.warning as u8).to_string());
    kv("cdet", g12(rep.cdet));
    kv("eps_bt", rep.eps_bt.map(g12).unwrap_or_else(|| "nan".into()));
    kv("case", rep.classification.case_label.as_str().into());
    kv("hopf_subcase", subcase.clone());
    ctx.csv(".csv", &["name", "value"], &rows);
    ctx.json(
        ".json",
        json!({"coefficients": CoefficientsRecord::from(c), "report": rep}),
    );
    println!(
        "{} ({subcase}) cdet={} eps_bt={} beta_eps0={}{}{}i{}",
        rep.classification.case_label.as_str(),
        g12(rep.cdet),
        rep.eps_bt.map(g12).unwrap_or_else(|| "none".into()),
        g12(c.beta_eps[0].re),
        if c.beta_eps[0].im < 0.0 { "" } else { "+" },
        g12(c.beta_eps[0].im),
        if rep.warning { " WARNING: see report" } else { "" }
    );
    Ok(())
}

fn set_param(p: &mut WilsonCowanParams, f: &mut Option<ForcingParams>, name: &str, v: f64) {
    match (name, f) {
        ("lambda", _) => p.lambda = v,
        ("eps", _) => p.eps = v,
        ("b_sp", _) => p.b_sp = v,
        ("A", Some(f)) => f.amplitude = v,
        ("f", Some(f)) => f.f = v,
        ("h", Some(f)) => f.h = v,
        _ => unreachable!("parameter names are validated"),
    }
}

fn wc_build(
    p: WilsonCowanParams,
    forcing: Option<(ForcingBlock, ForcingParams)>,
) -> impl Fn(&[(String, f64)]) -> hopfduet_core::Result<System> + Sync {
    move |set| {
        let mut p = p;
        let mut fp = forcing.as_ref().map(|x| x.1);
        for (n, v) in set {
            set_param(&mut p, &mut fp, n, *v);
        }
        match (&forcing, fp) {
            (Some((blk, _)), Some(fp)) => System::wc_forced(blk.adjust(p, fp.f)?, fp),
            _ => System::wc(p),
        }
    }
}

fn wc_inputs(ctx: &Ctx, need_forcing: bool) -> Result<(WilsonCowanParams, Option<(ForcingBlock, ForcingParams)>), CliError> {
    let p = ctx.cfg.wc_block()?.params()?;
    let forcing = match &ctx.cfg.forcing {
        Some(b) => Some((b.clone(), b.params()?)),
        None if need_forcing => return Err(cfg_err("forcing", "block is required")),
        None => None,
    };
    Ok((p, forcing))
}

fn check_corners<B: Fn(f64, f64) -> hopfduet_core::Result<System>>(build: &B, sw: &SweepBlock) -> Result<(), CliError> {
    for a in [sw.p1.min, sw.p1.max] {
        for b in [sw.p2.min, sw.p2.max] {
            build(a, b).map_err(|e| cfg_err("sweep", e))?;
        }
    }
    Ok(())
}

fn write_diagram(ctx: &mut Ctx, d: &BifurcationDiagram) {
    let rows: Vec<Vec<String>> = d
        .cells
        .iter()
        .map(|c| {
            let ev: Vec<String> = d
                .events
                .iter()
                .filter(|e| e.cell == [c.i, c.j])
                .map(|e| format!("{}:{}", e.kind.as_str(), e.branch))
                .collect();
            vec![g12(c.p1), g12(c.p2), join_labels(&c.labels), ev.join("+")]
        })
        .collect();
    ctx.csv(".csv", &["p1", "p2", "classes", "events"], &rows);
    let ev: Vec<Vec<String>> = d
        .events
        .iter()
        .map(|e| vec![e.kind.as_str().into(), g12(e.p1), g12(e.p2), e.branch.clone()])
        .collect();
    ctx.csv(".events.csv", &["type", "p1", "p2", "branch"], &ev);
    let unresolved = d.cells.iter().filter(|c| c.labels.contains(&Label::UNRESOLVED)).count();
    let xs: Vec<f64> = (0..d.axes[0].n).map(|i| d.axes[0].value(i)).collect();
    let ys: Vec<f64> = (0..d.axes[1].n).map(|j| d.axes[1].value(j)).collect();
    let marks: Vec<(f64, f64, String)> = d
        .events
        .iter()
        .map(|e| (e.p1, e.p2, format!("{} {}", e.kind.as_str(), e.branch)))
        .collect();
    let (xl, yl) = (d.axes[0].name.clone(), d.axes[1].name.clone());
    ctx.svg(".svg", || {
        svg::region_map(&xl, &yl, &xs, &ys, |i, j| join_labels(&d.cell(i, j).labels), &marks)
    });
    let mut distinct: Vec<String> = d.cells.iter().map(|c| join_labels(&c.labels)).collect();
    distinct.sort();
    distinct.dedup();
    println!(
        "{} cells ({} unresolved), {} events, regions: {}",
        d.cells.len(),
        unresolved,
        d.events.len(),
        distinct.join(" ")
    );
}

fn run_wc_sweep(ctx: &mut Ctx, forced: bool) -> Result<(), CliError> {
    let (p, forcing) = wc_inputs(ctx, forced)?;
    let sw = ctx.cfg.sweep.clone().ok_or_else(|| cfg_err("sweep", "block is required"))?;
    let allowed: &[&str] = if forced {
        &["A", "f", "h", "lambda", "eps"]
    } else {
        &["lambda", "eps", "b_sp"]
    };
    let axes = sw.axes(allowed)?;
    let opts = ctx.cfg.classify_options()?;
    let icfg = ctx.cfg.integrator()?;
    let inner = wc_build(p, if forced { forcing } else { None });
    let names = [axes[0].name.clone(), axes[1].name.clone()];
    let build = move |a: f64, b: f64| inner(&[(names[0].clone(), a), (names[1].clone(), b)]);
    check_corners(&build, &sw)?;
    let d = sweep(build, axes, &opts, &icfg, &sw.options).map_err(rt)?;
    write_diagram(ctx, &d);
    Ok(())
}

pub fn wc_sweep(ctx: &mut Ctx) -> Result<(), CliError> {
    run_wc_sweep(ctx, false)
}

pub fn wc_forced_sweep(ctx: &mut Ctx) -> Result<(), CliError> {
    run_wc_sweep(ctx, true)
}

pub fn wc_sim(ctx: &mut Ctx) -> Result<(), CliError> {
    let (p, forcing) = wc_inputs(ctx, false)?;
    let sys = wc_build(p, forcing)(&[]).map_err(|e| cfg_err("wc", e))?;
    simulate(ctx, &sys, &["t", "E1", "I1", "E2", "I2"])
}

pub fn wc_branch(ctx: &mut Ctx) -> Result<(), CliError> {
    let (p, forcing) = wc_inputs(ctx, false)?;
    let br = ctx.cfg.branch.clone().ok_or_else(|| cfg_err("branch", "block is required"))?;
    let allowed: &[&str] = if forcing.is_some() {
        &["A", "f", "h", "lambda", "eps"]
    } else {
        &["lambda", "eps", "b_sp"]
    };
    br.validate(allowed)?;
    let seed = Label::parse(&br.seed).ok_or_else(|| cfg_err("branch.seed", format!("unknown label '{}'", br.seed)))?;
    let opts = ctx.cfg.classify_options()?;
    let icfg: IntegratorConfig = ctx.cfg.integrator()?;
    let inner = wc_build(p, forcing);
    let name = br.param.clone();
    let build = move |v: f64| inner(&[(name.clone(), v)]);
    let sys0 = build(br.start).map_err(|e| cfg_err("branch.start", e))?;
    build(br.end).map_err(|e| cfg_err("branch.end", e))?;

    let cls = classify_attractor(&sys0, &IcPolicy::default_for(&sys0), &opts, &icfg).map_err(rt)?;
    let seed_out = cls
        .outcomes
        .iter()
        .find(|o| o.label == seed && o.period.is_some())
        .ok_or_else(|| {
            CliError::Runtime(format!(
                "no {} attractor at {}={} (found {})",
                seed.as_str(),
                br.param,
                br.start,
                cls.joined()
            ))
        })?;
    let orbit0 = find_periodic_orbit(
        &sys0,
        &seed_out.final_state,
        seed_out.period.expect("filtered"),
        seed_out.final_time,
        &icfg,
        &br.options.orbit,
    )
    .map_err(rt)?;
    let branch = follow_branch(build, &orbit0, br.start, br.end, &br.options, &icfg).map_err(rt)?;

    let rows: Vec<Vec<String>> = branch
        .points
        .iter()
        .map(|pt| {
            let m = pt.floquet.iter().map(|z| z.norm()).fold(0.0, f64::max);
            vec![
                g12(pt.param),
                g12(pt.period),
                g12(pt.amplitude),
                g12(pt.dphi),
                serde_json::to_value(pt.symmetry).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default(),
                (pt.stable as u8).to_string(),
                pt.unstable_count.to_string(),
                g12(m),
            ]
        })
        .collect();
    ctx.csv(
        ".csv",
        &["param", "period", "amplitude", "dphi", "symmetry", "stable", "unstable_count", "max_multiplier"],
        &rows,
    );
    let other = if br.param == "eps" { p.lambda } else { p.eps };
    let ev: Vec<Vec<String>> = branch
        .events
        .iter()
        .map(|e| vec![e.kind.as_str().into(), g12(e.param), g12(other), seed.as_str().into()])
        .collect();
    ctx.csv(".events.csv", &["type", "p1", "p2", "branch"], &ev);
    ctx.json(".json", json!({"param": br.param, "seed": seed.as_str(), "branch": branch}));
    let split = |want: bool| -> Vec<(f64, f64)> {
        branch
            .points
            .iter()
            .map(|pt| (pt.param, if pt.stable == want { pt.amplitude } else { f64::NAN }))
            .collect()
    };
    let series = vec![("stable".to_string(), split(true)), ("unstable".to_string(), split(false))];
    let xl = br.param.clone();
    ctx.svg(".svg", || svg::lines(&xl, "amplitude", &series));
    let evs: Vec<String> = branch
        .events
        .iter()
        .map(|e| format!("{}@{}", e.kind.as_str(), g12(e.param)))
        .collect();
    println!("{} points, events: {} ({})", branch.points.len(), evs.join(" "), branch.stop_reason);
    Ok(())
}
