//! Two-parameter classification grids with boundary bisection.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::classify::{classify_attractor, ClassifyOptions, IcPolicy, Label, LabelSet};
use super::integrate::IntegratorConfig;
use super::System;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EventKind {
    HB,
    PF,
    PD,
    TR,
    FOLD,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::HB => "HB",
            EventKind::PF => "PF",
            EventKind::PD => "PD",
            EventKind::TR => "TR",
            EventKind::FOLD => "FOLD",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    pub name: String,
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

impl SweepAxis {
    pub fn new(name: &str, min: f64, max: f64, n: usize) -> Self {
        Self {
            name: name.into(),
            min,
            max,
            n,
        }
    }

    pub fn validate(&self) -> Result<()> {
        crate::error::ensure_finite("sweep axis", &[self.min, self.max])?;
        if self.n == 0 || self.n > 1000 {
            return Err(Error::Config(format!(
                "axis '{}' needs between 1 and 1000 points",
                self.name
            )));
        }
        if self.n > 1 && self.max <= self.min {
            return Err(Error::Config(format!("axis '{}' needs max > min", self.name)));
        }
        Ok(())
    }

    pub fn value(&self, i: usize) -> f64 {
        if self.n == 1 {
            self.min
        } else {
            self.min + (self.max - self.min) * i as f64 / (self.n - 1) as f64
        }
    }

    pub fn step(&self) -> f64 {
        if self.n > 1 {
            (self.max - self.min) / (self.n - 1) as f64
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub i: usize,
    pub j: usize,
    pub p1: f64,
    pub p2: f64,
    pub labels: LabelSet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepEvent {
    pub kind: EventKind,
    pub p1: f64,
    pub p2: f64,
    /// Label whose presence changes across the boundary.
    pub branch: String,
    /// Lower-index cell of the bisected edge.
    pub cell: [usize; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BifurcationDiagram {
    pub axes: [SweepAxis; 2],
    /// Row-major in `(i, j)`: `i` indexes the first axis.
    pub cells: Vec<Cell>,
    pub events: Vec<SweepEvent>,
}

impl BifurcationDiagram {
    pub fn cell(&self, i: usize, j: usize) -> &Cell {
        &self.cells[i * self.axes[1].n + j]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepOptions {
    /// Bisection steps along each edge whose cells differ (0 disables).
    pub bisection_steps: usize,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self { bisection_steps: 4 }
    }
}

/// Event type suggested by a label appearing on one side of an edge only.
pub fn infer_event(label: Label, without: &LabelSet) -> Option<EventKind> {
    match label {
        Label::FP => Some(EventKind::HB),
        Label::LA | Label::HA => Some(EventKind::FOLD),
        Label::IP | Label::AP => Some(if without.contains(&Label::ASYM) {
            EventKind::PF
        } else if without.contains(&Label::OTHER) {
            EventKind::TR
        } else {
            EventKind::FOLD
        }),
        Label::ASYM | Label::OTHER | Label::UNRESOLVED => None,
    }
}

fn classify_at<B>(build: &B, p1: f64, p2: f64, opts: &ClassifyOptions, cfg: &IntegratorConfig) -> LabelSet
where
    B: Fn(f64, f64) -> Result<System>,
{
    match build(p1, p2).and_then(|s| classify_attractor(&s, &IcPolicy::default_for(&s), opts, cfg)) {
        Ok(c) => c.labels,
        Err(_) => [Label::UNRESOLVED].into_iter().collect(),
    }
}

/// Classify every grid point, then bisect along each edge whose label sets
/// differ. Cells run in parallel on the current rayon pool; results are
/// assembled by index so the output does not depend on scheduling.
pub fn sweep<B>(
    build: B,
    axes: [SweepAxis; 2],
    opts: &ClassifyOptions,
    cfg: &IntegratorConfig,
    sweep_opts: &SweepOptions,
) -> Result<BifurcationDiagram>
where
    B: Fn(f64, f64) -> Result<System> + Sync,
{
    axes[0].validate()?;
    axes[1].validate()?;
    opts.validate()?;
    cfg.validate()?;
    // Surface configuration errors once rather than per cell.
    build(axes[0].value(0), axes[1].value(0))?;
    let (n1, n2) = (axes[0].n, axes[1].n);
    let cells: Vec<Cell> = (0..n1 * n2)
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k / n2, k % n2);
            let (p1, p2) = (axes[0].value(i), axes[1].value(j));
            Cell {
                i,
                j,
                p1,
                p2,
                labels: classify_at(&build, p1, p2, opts, cfg),
            }
        })
        .collect();

    let mut edges = Vec::new();
    for i in 0..n1 {
        for j in 0..n2 {
            let a = &cells[i * n2 + j];
            for (di, dj) in [(1, 0), (0, 1)] {
                if i + di < n1 && j + dj < n2 {
                    let b = &cells[(i + di) * n2 + j + dj];
                    let bad = a.labels.contains(&Label::UNRESOLVED) || b.labels.contains(&Label::UNRESOLVED);
                    if a.labels != b.labels && !bad {
                        edges.push((a.clone(), b.clone()));
                    }
                }
            }
        }
    }
    let per_edge: Vec<Vec<SweepEvent>> = edges
        .par_iter()
        .map(|(a, b)| {
            let (mut pa, mut pb) = ((a.p1, a.p2), (b.p1, b.p2));
            let (sa, mut sb) = (a.labels.clone(), b.labels.clone());
            for _ in 0..sweep_opts.bisection_steps {
                let m = (0.5 * (pa.0 + pb.0), 0.5 * (pa.1 + pb.1));
                let sm = classify_at(&build, m.0, m.1, opts, cfg);
                if sm == sa {
                    pa = m;
                } else {
                    pb = m;
                    sb = sm;
                }
            }
            let at = (0.5 * (pa.0 + pb.0), 0.5 * (pa.1 + pb.1));
            let mut out = Vec::new();
            for l in sa.symmetric_difference(&sb) {
                let without = if sa.contains(l) { &sb } else { &sa };
                if let Some(kind) = infer_event(*l, without) {
                    out.push(SweepEvent {
                        kind,
                        p1: at.0,
                        p2: at.1,
                        branch: l.as_str().to_string(),
                        cell: [a.i, a.j],
                    });
                }
            }
            out
        })
        .collect();
    Ok(BifurcationDiagram {
        axes,
        cells,
        events: per_edge.into_iter().flatten().collect(),
    })
}
