//! Sweep execution and CSV emission.

use std::fs::{File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;

use crate::corrstats::GroupGeometry;
use crate::metrics::{run_schemes, ChiSource, McScheme, McSummary};
use crate::modeswitch::{tau_from_bits, FeedbackBudget};
use crate::rmt::{approx_bd_chi, approx_bds_chi, asym_bd, asym_bds};
use crate::scenario::{ChiModel, CsitModel, GroupScenario, ScenarioSpec, Scheme};
use crate::scene3d::{run_3d_schemes, Scenario3D, Scene3dSpec};

use super::config::{AxisValue, CsitMode, Layout, ScenarioConfig, SchemeId};
use super::CliError;

pub const CSV_HEADER: [&str; 11] = [
    "scenario_id",
    "scheme",
    "snr_db",
    "chi",
    "tau_sq",
    "n_bits",
    "sum_rate",
    "stderr",
    "n_trials",
    "seed",
    "flags",
];

#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub scenario_id: String,
    pub scheme: SchemeId,
    pub snr_db: f64,
    pub chi: AxisValue,
    pub tau_sq: AxisValue,
    pub n_bits: Option<u32>,
    pub sum_rate: f64,
    /// None for deterministic (asymptotic) rows.
    pub stderr: Option<f64>,
    pub n_trials: usize,
    pub seed: u64,
    pub flags: Vec<&'static str>,
}

impl CsvRow {
    pub fn record(&self) -> [String; 11] {
        [
            self.scenario_id.clone(),
            self.scheme.name().to_string(),
            self.snr_db.to_string(),
            self.chi.to_string(),
            self.tau_sq.to_string(),
            self.n_bits.map(|n| n.to_string()).unwrap_or_default(),
            self.sum_rate.to_string(),
            self.stderr.map(|s| s.to_string()).unwrap_or_default(),
            self.n_trials.to_string(),
            self.seed.to_string(),
            self.flags.join(";"),
        ]
    }
}

/// Either a linear-array scenario or a set of elevation regions.
enum Built {
    Flat(GroupScenario),
    Regions(Scenario3D),
}

fn scenario_spec(cfg: &ScenarioConfig, layout: Layout) -> Result<ScenarioSpec, CliError> {
    let mut spec = ScenarioSpec::clustered(cfg.antennas, cfg.groups, cfg.users_per_group, cfg.spread)?;
    if let Some(az) = &cfg.azimuths {
        spec.geometries = az.iter().map(|&a| GroupGeometry::new(a, cfg.spread)).collect::<crate::Result<_>>()?;
    }
    spec.array = layout.array;
    spec.spacing = layout.spacing;
    spec.b_bar = cfg.b_bar;
    spec.r = cfg.r;
    spec.bds_regularizer = cfg.bds_regularizer;
    Ok(spec)
}

fn build(cfg: &ScenarioConfig, layout: Layout) -> Result<Built, CliError> {
    let spec = scenario_spec(cfg, layout)?;
    Ok(match &cfg.elevation {
        None => Built::Flat(GroupScenario::build(spec)?),
        Some(e) => Built::Regions(Scenario3D::build(Scene3dSpec {
            height: e.height,
            distances: e.distances.clone(),
            spread: cfg.spread,
            elevation_elements: e.elevation_elements,
            azimuth: spec,
            path_loss_reference: e.path_loss_reference,
            prefilter_modes: e.prefilter_modes,
        })?),
    })
}

/// Region scenarios at one sweep point; a flat scenario is a single region.
fn at_point(built: &Built, snr_db: f64, chi: ChiModel, csit: CsitModel, theta: f64) -> Result<Vec<GroupScenario>, CliError> {
    Ok(match built {
        Built::Flat(s) => vec![s.with_params(snr_db, chi, csit)?.with_theta_max(theta)?],
        Built::Regions(s3) => {
            let region_snr = snr_db - 10.0 * (s3.scenarios.len() as f64).log10();
            s3.scenarios
                .iter()
                .map(|s| s.with_params(region_snr, chi, csit)?.with_theta_max(theta))
                .collect::<crate::Result<_>>()?
        }
    })
}

fn mc_scheme(s: SchemeId) -> Option<McScheme> {
    match s {
        SchemeId::Bd => Some(McScheme::Bd),
        SchemeId::Bds => Some(McScheme::Bds),
        SchemeId::Switch => Some(McScheme::Switch(ChiSource::Effective)),
        SchemeId::SwitchRaw => Some(McScheme::Switch(ChiSource::Raw)),
        _ => None,
    }
}

/// Deterministic sum rate of one region.
fn deterministic(sc: &GroupScenario, scheme: SchemeId) -> crate::Result<f64> {
    let at_zero = || sc.with_params(sc.spec.snr_db, ChiModel::Fixed(0.0), sc.spec.csit);
    Ok(match scheme {
        SchemeId::AsymBd => asym_bd(sc)?.sum_rate,
        SchemeId::AsymBds => asym_bds(sc)?.sum_rate,
        SchemeId::ApproxBd => approx_bd_chi(&asym_bd(&at_zero()?)?, sc.fixed_chi()?).sum_rate,
        SchemeId::ApproxBds => approx_bds_chi(&asym_bds(&at_zero()?)?, sc.fixed_chi()?).sum_rate,
        _ => unreachable!("monte carlo scheme"),
    })
}

/// Runs every sweep point and hands rows to `emit` in a fixed order:
/// layout, θ_max, χ, τ² (or N_B), SNR, then schemes as listed.
pub fn run(cfg: &ScenarioConfig, mut emit: impl FnMut(&CsvRow) -> Result<(), CliError>) -> Result<(), CliError> {
    cfg.validate()?;
    if cfg.schemes.is_empty() {
        return Ok(());
    }
    let mc: Vec<McScheme> = cfg.schemes.iter().filter_map(|&s| mc_scheme(s)).collect();
    let tagged = cfg.layouts.len() > 1 || cfg.theta_max.len() > 1;
    for &layout in &cfg.layouts {
        let built = build(cfg, layout)?;
        let r = match &built {
            Built::Flat(s) => s.r(),
            Built::Regions(s3) => s3.scenarios[0].r(),
        };
        // τ-axis points as (τ² column, n_bits column, csit model)
        let mut tau_points: Vec<(AxisValue, Option<u32>, CsitModel)> = Vec::new();
        match cfg.csit {
            CsitMode::Bits => {
                for &n in &cfg.n_bits {
                    let t = tau_from_bits(&FeedbackBudget { n_bits: n, r }, Scheme::Bd)?;
                    tau_points.push((AxisValue::Fixed(t), Some(n), CsitModel::Bits { n_bits: n }));
                }
            }
            mode => {
                for t in cfg.tau_sq.points() {
                    let model = match (mode, t) {
                        (CsitMode::Equal, AxisValue::Fixed(x)) => CsitModel::Equal { tau_sq: x },
                        (CsitMode::Paired, AxisValue::Fixed(x)) => CsitModel::Paired { tau_sq: x },
                        (CsitMode::Paired, AxisValue::Uniform(lo, hi)) => CsitModel::UniformPaired { lo, hi },
                        _ => return Err(CliError::Config("tau_sq: a uniform tau_sq needs csit = paired".into())),
                    };
                    tau_points.push((t, None, model));
                }
            }
        }
        for &theta in &cfg.theta_max {
            let id = if tagged { format!("{}/{layout}/theta_max={theta}", cfg.scenario_id) } else { cfg.scenario_id.clone() };
            for chi in cfg.chi.points() {
                let chi_model = match chi {
                    AxisValue::Fixed(x) => ChiModel::Fixed(x),
                    AxisValue::Uniform(a, b) => ChiModel::Uniform(a, b),
                };
                for &(tau, n_bits, csit) in &tau_points {
                    for &snr in &cfg.snr_db {
                        let regions = at_point(&built, snr, chi_model, csit, theta)?;
                        let clamped = regions.iter().any(|s| s.tau_clamped());
                        let summaries: Vec<McSummary> = if mc.is_empty() {
                            vec![]
                        } else {
                            match &built {
                                Built::Flat(_) => run_schemes(&regions[0], &mc, cfg.n_trials, cfg.seed)?,
                                Built::Regions(s3) => {
                                    let mut s = s3.clone();
                                    s.scenarios = regions.clone();
                                    run_3d_schemes(&s, &mc, cfg.n_trials, cfg.seed)?
                                }
                            }
                        };
                        for &scheme in &cfg.schemes {
                            let (sum_rate, stderr, n_trials, flag) = match mc_scheme(scheme) {
                                Some(m) => {
                                    let s = summaries.iter().find(|s| s.scheme == m).expect("summary for every scheme");
                                    (s.mean, Some(s.stderr), s.n_trials, s.tau_clamped)
                                }
                                None => {
                                    let total = regions.iter().map(|s| deterministic(s, scheme)).sum::<crate::Result<f64>>()?;
                                    (total, None, 0, clamped)
                                }
                            };
                            emit(&CsvRow {
                                scenario_id: id.clone(),
                                scheme,
                                snr_db: snr,
                                chi,
                                tau_sq: tau,
                                n_bits,
                                sum_rate,
                                stderr,
                                n_trials,
                                seed: cfg.seed,
                                flags: if flag { vec!["tau_clamped"] } else { vec![] },
                            })?;
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

/// Runs `cfg` and collects all rows.
pub fn run_collect(cfg: &ScenarioConfig) -> Result<Vec<CsvRow>, CliError> {
    let mut rows = Vec::new();
    run(cfg, |r| {
        rows.push(r.clone());
        Ok(())
    })?;
    Ok(rows)
}

pub type CsvSink = csv::Writer<Box<dyn Write>>;

/// Writer on stdout with the header already written.
pub fn stdout_sink() -> Result<CsvSink, CliError> {
    let mut w = csv::Writer::from_writer(Box::new(io::stdout()) as Box<dyn Write>);
    w.write_record(CSV_HEADER)?;
    Ok(w)
}

/// Opens `path` for appending. A new or empty file gets the header; an
/// existing file must already start with the same header.
pub fn file_sink(path: &Path) -> Result<CsvSink, CliError> {
    let header = CSV_HEADER.join(",");
    let existing = match File::open(path) {
        Ok(f) => {
            let mut first = String::new();
            BufReader::new(f).read_line(&mut first)?;
            Some(first.trim_end().to_string())
        }
        Err(e) if e.kind() == io::ErrorKind::NotFound => None,
        Err(e) => return Err(e.into()),
    };
    let needs_header = match existing.as_deref() {
        None | Some("") => true,
        Some(h) if h == header => false,
        Some(_) => {
            return Err(CliError::Config(format!("out: {} has a different header", path.display())));
        }
    };
    let file = OpenOptions::new().create(true).append(true).open(path)?;
    let mut w = csv::Writer::from_writer(Box::new(file) as Box<dyn Write>);
    if needs_header {
        w.write_record(CSV_HEADER)?;
    }
    Ok(w)
}

/// Runs `cfg`, writing each row as soon as its sweep point finishes.
pub fn run_to_sink(cfg: &ScenarioConfig, sink: &mut CsvSink) -> Result<(), CliError> {
    sink.flush()?;
    run(cfg, |row| {
        sink.write_record(row.record())?;
        sink.flush()?;
        Ok(())
    })
}
