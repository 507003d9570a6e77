//! Simulation tables over an `(n, p)` grid.

use esd_indep::calibrate::{panel_diagnostic, Exec};
use esd_indep::genmodels::{Innovation, ModelKind, ModelSpec, NullModel, SpatialWeights, USpec};
use esd_indep::lrt::lrt_size_power;

use crate::args::Preset;
use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::output::{num, Table};

pub const TABLE_IDS: &[&str] = &[
    "t1", "t2", "t3", "t4", "t_ar", "t_sma", "t_panel", "t_nma", "t_arch", "t_vdm",
];

#[derive(Debug, Clone, PartialEq)]
enum Job {
    Size(NullModel),
    Power(ModelKind, Innovation),
    LrtSize,
    LrtPower(ModelKind),
}

struct Section {
    label: &'static str,
    job: Job,
}

fn sections(id: &str) -> Result<Vec<Section>> {
    let s = |label, job| Section { label, job };
    let normal = Innovation::Normal;
    Ok(match id {
        "t1" => vec![
            s("size", Job::Size(NullModel::Iid(normal))),
            s("power", Job::Power(ModelKind::CompoundSymmetric, normal)),
        ],
        "t2" => vec![
            s("size", Job::LrtSize),
            s("power", Job::LrtPower(ModelKind::CompoundSymmetric)),
        ],
        "t3" => vec![
            s("size", Job::Size(NullModel::Iid(Innovation::StdGamma42))),
            s(
                "power",
                Job::Power(ModelKind::CompoundSymmetric, Innovation::StdGamma42),
            ),
        ],
        "t4" => vec![s("power", Job::Power(ModelKind::Ma1 { psi: 0.5 }, normal))],
        "t_ar" => vec![s("power", Job::Power(ModelKind::Ar1 { phi: 0.5 }, normal))],
        "t_sma" => vec![s(
            "power",
            Job::Power(
                ModelKind::Sma {
                    weights: SpatialWeights::UniformScaled,
                },
                Innovation::NormalMu1,
            ),
        )],
        "t_panel" => vec![
            s("size", Job::Size(NullModel::Panel)),
            s(
                "power",
                Job::Power(
                    ModelKind::Panel {
                        u: USpec::AltFactor,
                    },
                    normal,
                ),
            ),
        ],
        "t_nma" => vec![s("power", Job::Power(ModelKind::NonlinearMa, normal))],
        "t_arch" => vec![s(
            "power",
            Job::Power(
                ModelKind::Arch1 {
                    alpha0: 0.9,
                    alpha1: 0.1,
                    squared: true,
                },
                normal,
            ),
        )],
        "t_vdm" => vec![s("power", Job::Power(ModelKind::Vandermonde, normal))],
        other => return Err(CliError::UnknownTable(other.to_string())),
    })
}

/// `(n, p)` cells of a table for a preset.
pub fn grid(id: &str, preset: Preset) -> Vec<(usize, usize)> {
    let cross = |ns: &[usize], ps: &[usize]| -> Vec<(usize, usize)> {
        ns.iter()
            .flat_map(|&n| ps.iter().map(move |&p| (n, p)))
            .collect()
    };
    let axis: Vec<usize> = std::iter::once(5).chain((1..=10).map(|k| 10 * k)).collect();
    match (id, preset) {
        ("t_vdm", Preset::Full) => {
            let v: Vec<usize> = (1..=10)
                .map(|k| 10 * k)
                .chain(std::iter::once(120))
                .collect();
            cross(&v, &v)
        }
        ("t_vdm", Preset::Desk) => cross(&[20, 50, 100], &[20, 50, 100]),
        (_, Preset::Full) => cross(&axis, &axis),
        (_, Preset::Desk) => {
            let mut g = cross(&[20, 50, 100], &[10, 20, 50, 100]);
            let extra: &[(usize, usize)] = match id {
                "t1" | "t3" => &[(90, 100)],
                "t_arch" => &[(100, 60)],
                _ => &[],
            };
            g.extend_from_slice(extra);
            g.sort_unstable();
            g
        }
    }
}

pub fn cmd_table(cfg: &RunConfig) -> Result<Table> {
    let id = cfg
        .table
        .as_deref()
        .ok_or_else(|| CliError::Usage("--cmd table needs --table".into()))?;
    let secs = sections(id)?;
    let h = cfg.harness();
    let mut t = Table::for_run(
        cfg,
        &[
            "section",
            "n",
            "p",
            "estimate",
            "rejections",
            "reps",
            "degenerate",
            "diagnostic",
        ],
    );
    t.meta("table", id);
    t.meta("preset", format!("{:?}", cfg.preset).to_lowercase());
    t.meta("k_cal", cfg.k_cal);
    t.meta("k_eval", cfg.k_eval);
    t.meta("alpha", num(cfg.alpha));
    for sec in &secs {
        for (n, p) in grid(id, cfg.preset) {
            let (rejections, reps, degenerate, diagnostic) = match &sec.job {
                Job::Size(null) => {
                    let e = h.empirical_size(n, p, null, cfg.k_cal, cfg.k_eval, cfg.seed)?;
                    let diag = match null {
                        NullModel::Panel => {
                            Some(panel_diagnostic(Exec::Parallel, p, cfg.k_eval, cfg.seed)?)
                        }
                        _ => None,
                    };
                    (e.rejections, e.reps, None, diag)
                }
                Job::Power(kind, innovation) => {
                    let spec = ModelSpec::new(kind.clone(), *innovation, n, p)?;
                    let e = h.empirical_power(&spec, cfg.k_cal, cfg.k_eval, cfg.seed)?;
                    (e.rejections, e.reps, None, None)
                }
                Job::LrtSize | Job::LrtPower(_) => {
                    let kind = match &sec.job {
                        Job::LrtPower(k) => k.clone(),
                        _ => ModelKind::Iid,
                    };
                    let spec = ModelSpec::new(kind, Innovation::Normal, n, p)?;
                    let s = lrt_size_power(&spec, cfg.k_eval, cfg.alpha, cfg.seed, Exec::Parallel)?;
                    let c = s.collapse();
                    (c.rejections, c.reps, Some(s.degenerate), None)
                }
            };
            let est = rejections as f64 / reps as f64;
            eprintln!("{id} {} n={n} p={p}: {est:.3}", sec.label);
            t.push(vec![
                sec.label.to_string(),
                n.to_string(),
                p.to_string(),
                num(est),
                rejections.to_string(),
                reps.to_string(),
                degenerate.map_or(String::new(), |d| d.to_string()),
                diagnostic.map_or(String::new(), num),
            ]);
        }
    }
    t.emit(cfg.out.as_deref())?;
    Ok(t)
}
