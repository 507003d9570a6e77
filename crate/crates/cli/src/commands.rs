use esd_indep::calibrate::{map_indexed, Exec, Harness, NullCalibration};
use esd_indep::cf_test::{decide, monte_carlo_p_value};
use esd_indep::eigcore::{Covariance, DataMatrix};
use esd_indep::genmodels::NullModel;
use esd_indep::lrt::{lrt_size_power, lrt_statistic};
use esd_indep::seeds::{self, STREAM_EVALUATION};

use crate::args::Cmd;
use crate::cache::CalibrationCache;
use crate::config::RunConfig;
use crate::error::{exit, CliError, Result};
use crate::matrix::read_matrix_csv;
use crate::output::{num, say, Table};
use crate::prices::{load_price_panel, required_length, subsample_series, usable_tickers};
use crate::tables::cmd_table;

pub fn dispatch(cfg: &RunConfig) -> Result<i32> {
    match cfg.cmd {
        Cmd::Test => cmd_test(cfg),
        Cmd::Table => cmd_table(cfg).map(|_| exit::OK),
        Cmd::Calibrate => cmd_calibrate(cfg).map(|_| exit::OK),
        Cmd::Size => cmd_size(cfg).map(|_| exit::OK),
        Cmd::Power => cmd_power(cfg).map(|_| exit::OK),
        Cmd::Stocks => cmd_stocks(cfg).map(|_| exit::OK),
        Cmd::Lrt => cmd_lrt(cfg),
    }
}

/// Everything that determines a null sample.
pub fn calibration_fingerprint(
    cfg: &RunConfig,
    h: &Harness,
    n: usize,
    p: usize,
    null: &NullModel,
) -> String {
    format!(
        "n={n};p={p};null={};weights={};quad={};k={};alpha={:?};seed={};standardize={}",
        null.name(),
        h.weights.fingerprint(),
        h.quad_cf.len(),
        cfg.k_cal,
        h.alpha,
        cfg.seed,
        h.standardize
    )
}

/// Null calibration, read from or written to the cache when one is configured.
pub fn calibration(
    cfg: &RunConfig,
    h: &Harness,
    n: usize,
    p: usize,
    null: &NullModel,
) -> Result<NullCalibration> {
    let cache = cfg
        .cache_dir
        .as_ref()
        .map(CalibrationCache::new)
        .transpose()?;
    let fp = calibration_fingerprint(cfg, h, n, p, null);
    if let Some(c) = &cache {
        if let Some(hit) = c.load(&fp)? {
            return Ok(hit);
        }
    }
    let calib = h.simulate_null(n, p, null, cfg.k_cal, cfg.seed)?;
    if let Some(c) = &cache {
        c.store(&fp, &calib)?;
    }
    Ok(calib)
}

/// Data, its null law, and how its spectrum is formed.
struct Subject {
    x: DataMatrix,
    null: NullModel,
    covariance: Covariance,
    standardize: bool,
}

fn subject(cfg: &RunConfig) -> Result<Subject> {
    if let Some(path) = &cfg.input {
        let x = read_matrix_csv(path)?;
        if cfg.n.is_some_and(|n| n != x.n()) || cfg.p.is_some_and(|p| p != x.p()) {
            return Err(CliError::Usage(format!(
                "{} is {}x{}, which contradicts --n/--p",
                path.display(),
                x.n(),
                x.p()
            )));
        }
        Ok(Subject {
            x,
            null: NullModel::Iid(cfg.innovation),
            covariance: Covariance::Sample,
            standardize: cfg.standardize,
        })
    } else if cfg.model.is_some() {
        let (n, p) = cfg.require_dims()?;
        let spec = cfg.model_spec(n, p)?;
        let x = spec.generate(seeds::derive(cfg.seed, STREAM_EVALUATION, 0))?;
        Ok(Subject {
            x,
            null: spec.null_model(),
            covariance: spec.covariance(),
            standardize: false,
        })
    } else {
        Err(CliError::Usage(
            "--cmd test needs --input or --model".into(),
        ))
    }
}

pub fn cmd_test(cfg: &RunConfig) -> Result<i32> {
    let s = subject(cfg)?;
    let (n, p) = (s.x.n(), s.x.p());
    let h = Harness {
        standardize: s.standardize,
        ..cfg.harness()
    };
    let calib = calibration(cfg, &h, n, p, &s.null)?;
    let stat = h.statistic(&s.x, s.covariance, &h.reference(n, p)?)?;
    let d = decide(&stat, &calib, &h.weights)?;
    let pv = d.p_value.map_or_else(|| "NA".to_string(), num);
    say(&format!(
        "p^2 M_n = {:.6} with critical values [{:.6}, {:.6}] from {} null draws; p-value {}; {}",
        stat.scaled,
        d.lower_crit,
        d.upper_crit,
        calib.k(),
        pv,
        if d.reject {
            "independence rejected"
        } else {
            "independence not rejected"
        }
    ))?;
    let pairs = [
        ("n", n.to_string()),
        ("p", p.to_string()),
        ("m_n", num(stat.m_n)),
        ("statistic", num(stat.scaled)),
        ("lower_crit", num(d.lower_crit)),
        ("upper_crit", num(d.upper_crit)),
        ("p_value", pv.clone()),
        ("alpha", num(cfg.alpha)),
        ("k_cal", calib.k().to_string()),
        ("null", s.null.name()),
        ("standardized", s.standardize.to_string()),
        ("reject", d.reject.to_string()),
    ];
    for (k, v) in &pairs {
        say(&format!("{k}={v}"))?;
    }
    if let Some(out) = &cfg.out {
        let mut t = Table::for_run(cfg, &["key", "value"]);
        pairs
            .iter()
            .for_each(|(k, v)| t.push(vec![k.to_string(), v.clone()]));
        t.emit(Some(out))?;
    }
    Ok(if d.reject { exit::REJECTED } else { exit::OK })
}

pub fn cmd_calibrate(cfg: &RunConfig) -> Result<NullCalibration> {
    let (n, p) = cfg.require_dims()?;
    let (null, standardize) = match &cfg.model {
        Some(_) => (cfg.model_spec(n, p)?.null_model(), false),
        None => (NullModel::Iid(cfg.innovation), cfg.standardize),
    };
    let h = Harness {
        standardize,
        ..cfg.harness()
    };
    let calib = calibration(cfg, &h, n, p, &null)?;
    eprintln!(
        "null {}: lower {} upper {} from {} draws",
        null.name(),
        num(calib.lower_q),
        num(calib.upper_q),
        calib.k()
    );
    let mut t = Table::for_run(cfg, &["rank", "statistic"]);
    t.meta("null", null.name());
    t.meta("n", n);
    t.meta("p", p);
    t.meta("lower_crit", num(calib.lower_q));
    t.meta("upper_crit", num(calib.upper_q));
    t.meta("standardized", standardize);
    for (i, v) in calib.sorted_stats.iter().enumerate() {
        t.push(vec![(i + 1).to_string(), num(*v)]);
    }
    t.emit(cfg.out.as_deref())?;
    Ok(calib)
}

fn estimate_table(
    cfg: &RunConfig,
    what: &str,
    n: usize,
    p: usize,
    label: String,
    rejections: usize,
    reps: usize,
) -> Table {
    let value = rejections as f64 / reps as f64;
    eprintln!("{what} at n={n} p={p} ({label}): {value:.3}");
    let mut t = Table::for_run(cfg, &["n", "p", "model", what, "rejections", "reps"]);
    t.meta("k_cal", cfg.k_cal);
    t.meta("k_eval", cfg.k_eval);
    t.meta("alpha", num(cfg.alpha));
    t.push(vec![
        n.to_string(),
        p.to_string(),
        label,
        num(value),
        rejections.to_string(),
        reps.to_string(),
    ]);
    t
}

pub fn cmd_size(cfg: &RunConfig) -> Result<Table> {
    let (n, p) = cfg.require_dims()?;
    let null = match &cfg.model {
        Some(_) => cfg.model_spec(n, p)?.null_model(),
        None => NullModel::Iid(cfg.innovation),
    };
    let e = cfg
        .harness()
        .empirical_size(n, p, &null, cfg.k_cal, cfg.k_eval, cfg.seed)?;
    let t = estimate_table(cfg, "size", n, p, null.name(), e.rejections, e.reps);
    t.emit(cfg.out.as_deref())?;
    Ok(t)
}

pub fn cmd_power(cfg: &RunConfig) -> Result<Table> {
    let (n, p) = cfg.require_dims()?;
    if cfg.model.is_none() {
        return Err(CliError::Usage("--cmd power needs --model".into()));
    }
    let spec = cfg.model_spec(n, p)?;
    let e = cfg
        .harness()
        .empirical_power(&spec, cfg.k_cal, cfg.k_eval, cfg.seed)?;
    let t = estimate_table(
        cfg,
        "power",
        n,
        p,
        spec.kind.name().to_string(),
        e.rejections,
        e.reps,
    );
    t.emit(cfg.out.as_deref())?;
    Ok(t)
}

pub fn cmd_lrt(cfg: &RunConfig) -> Result<i32> {
    if let Some(path) = &cfg.input {
        let x = read_matrix_csv(path)?;
        let r = lrt_statistic(&x)?;
        let pv = r.p_value.map_or_else(|| "NA".to_string(), num);
        say(&format!(
            "statistic={}\ndof={}\np_value={pv}\ndegenerate={}",
            num(r.statistic),
            r.dof,
            r.degenerate
        ))?;
        if let Some(out) = &cfg.out {
            let mut t = Table::for_run(cfg, &["statistic", "dof", "p_value", "degenerate"]);
            t.push(vec![
                num(r.statistic),
                r.dof.to_string(),
                pv,
                r.degenerate.to_string(),
            ]);
            t.emit(Some(out))?;
        }
        return Ok(match r.p_value {
            None => exit::NUMERIC,
            Some(v) if v <= cfg.alpha => exit::REJECTED,
            Some(_) => exit::OK,
        });
    }
    let (n, p) = cfg.require_dims()?;
    let spec = cfg.model_spec(n, p)?;
    let s = lrt_size_power(&spec, cfg.k_eval, cfg.alpha, cfg.seed, Exec::Parallel)?;
    let mut t = Table::for_run(
        cfg,
        &[
            "n",
            "p",
            "model",
            "collapse",
            "separate",
            "degenerate",
            "reps",
        ],
    );
    t.push(vec![
        n.to_string(),
        p.to_string(),
        spec.kind.name().to_string(),
        num(s.collapse().value()),
        num(s.separate().value()),
        s.degenerate.to_string(),
        s.reps.to_string(),
    ]);
    eprintln!(
        "LRT rejection rate at n={n} p={p}: {:.3} ({} degenerate)",
        s.collapse().value(),
        s.degenerate
    );
    t.emit(cfg.out.as_deref())?;
    Ok(exit::OK)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Repetition {
    pub tickers: Vec<String>,
    pub statistic: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyResult {
    pub repetitions: Vec<Repetition>,
    pub rejection_fraction: f64,
}

pub fn cmd_stocks(cfg: &RunConfig) -> Result<StudyResult> {
    let path = cfg
        .input
        .as_ref()
        .ok_or_else(|| CliError::Usage("--cmd stocks needs --input".into()))?;
    let (n, p) = cfg.require_dims()?;
    let panel = load_price_panel(path)?;
    let needed = required_length(n, cfg.stride, cfg.start);
    if panel.dates.len() < needed {
        return Err(CliError::SeriesTooShort {
            ticker: "every ticker".into(),
            needed,
            got: panel.dates.len(),
        });
    }
    let usable = usable_tickers(&panel, n, cfg.stride, cfg.start);
    if usable.len() < p {
        return Err(CliError::NotEnoughTickers {
            needed: p,
            usable: usable.len(),
        });
    }
    let series: Vec<Vec<f64>> = usable
        .iter()
        .map(|&i| subsample_series(&panel, &panel.tickers[i], n, cfg.stride, cfg.start))
        .collect::<Result<_>>()?;

    let h = Harness {
        standardize: cfg.standardize,
        ..cfg.harness()
    };
    let calib = calibration(
        cfg,
        &h,
        n,
        p,
        &NullModel::Iid(esd_indep::genmodels::Innovation::Normal),
    )?;
    let reference = h.reference(n, p)?;
    let reps: Vec<Result<Repetition>> = map_indexed(Exec::Parallel, cfg.reps, |r| {
        let mut rng = seeds::rng_from(seeds::derive(cfg.seed, STREAM_EVALUATION, r as u64));
        let mut pick = rand::seq::index::sample(&mut rng, usable.len(), p).into_vec();
        pick.sort_unstable();
        let data: Vec<f64> = pick
            .iter()
            .flat_map(|&j| series[j].iter().copied())
            .collect();
        let x = DataMatrix::real(n, p, data)?;
        let name = |j: usize| panel.tickers[usable[j]].clone();
        let stat = h
            .statistic(&x, Covariance::Sample, &reference)
            .map_err(|e| match e {
                esd_indep::Error::DegenerateSeries { col } => {
                    CliError::DegenerateSeries(name(pick[col]))
                }
                other => other.into(),
            })?;
        Ok(Repetition {
            tickers: pick.iter().map(|&j| name(j)).collect(),
            statistic: stat.scaled,
            p_value: monte_carlo_p_value(&calib.sorted_stats, stat.scaled),
        })
    });
    let repetitions = reps.into_iter().collect::<Result<Vec<_>>>()?;
    let rejected = repetitions
        .iter()
        .filter(|r| r.p_value <= cfg.alpha)
        .count();
    let rejection_fraction = rejected as f64 / repetitions.len() as f64;

    let mut t = Table::for_run(cfg, &["repetition", "p_value", "statistic", "tickers"]);
    t.meta("n", n);
    t.meta("p", p);
    t.meta("stride", cfg.stride);
    t.meta("start", cfg.start);
    t.meta("standardized", cfg.standardize);
    t.meta("k_cal", cfg.k_cal);
    t.meta("usable_tickers", usable.len());
    t.meta("rejection_fraction", num(rejection_fraction));
    for (i, r) in repetitions.iter().enumerate() {
        t.push(vec![
            (i + 1).to_string(),
            num(r.p_value),
            num(r.statistic),
            r.tickers.join(";"),
        ]);
    }
    t.emit(cfg.out.as_deref())?;
    eprintln!(
        "{rejected} of {} repetitions have p-value <= {}",
        repetitions.len(),
        cfg.alpha
    );
    Ok(StudyResult {
        repetitions,
        rejection_fraction,
    })
}
