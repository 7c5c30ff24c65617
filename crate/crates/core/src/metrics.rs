//! Instantaneous SINR / sum rate and the Monte Carlo harness.

use rayon::prelude::*;

use crate::channel::{draw_group, draw_single_group, ArrayPolarization, ChannelSet, PolarizationModel, RngStream};
use crate::corrstats::mismatch_effective_stats;
use crate::error::{Error, Result};
use crate::modeswitch::SwitchRule;
use crate::precode::{build_all, PrecoderSet};
use crate::scenario::{GroupScenario, Scheme, TrialParams};

/// Per-user SINR with its power decomposition (noise power is 1).
#[derive(Debug, Clone, Default)]
pub struct SinrReport {
    pub sinr: Vec<f64>,
    pub rate: Vec<f64>,
    pub sum_rate: f64,
    pub signal: Vec<f64>,
    /// Same BD group, or same BDS subgroup.
    pub intra: Vec<f64>,
    /// Opposite-polarization subgroup of the same group (BDS only).
    pub cross_pol: Vec<f64>,
    pub inter: Vec<f64>,
    pub noise: Vec<f64>,
}

impl SinrReport {
    pub fn mean_sinr(&self) -> f64 {
        self.sinr.iter().sum::<f64>() / self.sinr.len() as f64
    }
}

fn sinr_report(channels: &ChannelSet, pre: &PrecoderSet) -> SinrReport {
    let h = channels.stacked();
    let v = pre.beamformers();
    let gains = h.adjoint() * v;
    let n = gains.nrows();
    let nbar = pre.users_per_group;
    // block id of each user: group for BD, (group, subgroup) for BDS
    let mut block = vec![0usize; n];
    for (b, blk) in pre.blocks.iter().enumerate() {
        for k in blk.users.clone() {
            block[blk.group * nbar + k] = b;
        }
    }
    let rho = pre.per_user_power;
    let mut rep = SinrReport::default();
    for i in 0..n {
        let (mut intra, mut cross, mut inter) = (0.0, 0.0, 0.0);
        for j in 0..n {
            if j == i {
                continue;
            }
            let p = rho * gains[(i, j)].norm_sqr();
            if block[j] == block[i] {
                intra += p;
            } else if j / nbar == i / nbar {
                cross += p;
            } else {
                inter += p;
            }
        }
        let signal = rho * gains[(i, i)].norm_sqr();
        let s = signal / (intra + cross + inter + 1.0);
        rep.signal.push(signal);
        rep.intra.push(intra);
        rep.cross_pol.push(cross);
        rep.inter.push(inter);
        rep.noise.push(1.0);
        rep.sinr.push(s);
        rep.rate.push((1.0 + s).log2());
    }
    rep.sum_rate = rep.rate.iter().sum();
    rep
}

pub fn sinr_bd(channels: &ChannelSet, precoders: &PrecoderSet) -> Result<SinrReport> {
    if precoders.scheme != Scheme::Bd {
        return Err(Error::invalid("expected BD precoders"));
    }
    Ok(sinr_report(channels, precoders))
}

pub fn sinr_bds(channels: &ChannelSet, precoders: &PrecoderSet) -> Result<SinrReport> {
    if precoders.scheme != Scheme::Bds {
        return Err(Error::invalid("expected BDS precoders"));
    }
    Ok(sinr_report(channels, precoders))
}

pub fn sinr(channels: &ChannelSet, precoders: &PrecoderSet) -> SinrReport {
    sinr_report(channels, precoders)
}

/// Which χ the switching rule compares against under orientation mismatch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChiSource {
    Effective,
    Raw,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum McScheme {
    Bd,
    Bds,
    Switch(ChiSource),
}

impl McScheme {
    pub fn name(self) -> &'static str {
        match self {
            McScheme::Bd => "BD",
            McScheme::Bds => "BDS",
            McScheme::Switch(ChiSource::Effective) => "SWITCH",
            McScheme::Switch(ChiSource::Raw) => "SWITCH_RAW",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialMetrics {
    pub sum_rate: f64,
    pub mean_sinr: f64,
}

/// Everything one trial produced, for all schemes that were requested.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub params: TrialParams,
    pub bd: Option<TrialMetrics>,
    pub bds: Option<TrialMetrics>,
}

/// Draws one coherence block: trial parameters, orientations, then per-group
/// fading. The order is fixed so every scheme sees the same randomness.
pub fn draw_trial(scenario: &GroupScenario, stream: &RngStream) -> Result<(TrialParams, ChannelSet)> {
    let mut rng = stream.rng();
    let params = scenario.draw_trial_params(&mut rng)?;
    let nbar = scenario.users_per_group();
    let pol = PolarizationModel::new(params.chi)?;
    let mut groups = Vec::with_capacity(scenario.n_groups());
    for g in 0..scenario.n_groups() {
        let factor = scenario.channel_factor(g);
        let ch = match scenario.spec.array {
            ArrayPolarization::Dual => {
                let theta = crate::channel::draw_thetas(scenario.spec.theta_max, nbar, &mut rng)?;
                draw_group(&factor, pol, nbar, Some(&theta), &mut rng)?
            }
            ArrayPolarization::Single => draw_single_group(&factor, nbar, &mut rng)?,
        };
        groups.push(ch);
    }
    Ok((params, ChannelSet { groups }))
}

fn evaluate(scenario: &GroupScenario, channels: &ChannelSet, params: &TrialParams, scheme: Scheme) -> Result<TrialMetrics> {
    let csit = channels.estimate(params.tau(scheme))?;
    let pre = build_all(scenario, channels, &csit, scheme)?;
    let rep = sinr_report(channels, &pre);
    Ok(TrialMetrics { sum_rate: rep.sum_rate, mean_sinr: rep.mean_sinr() })
}

/// Runs one trial for the requested schemes on stream (seed, stream_id).
pub fn run_trial(scenario: &GroupScenario, stream: &RngStream, bd: bool, bds: bool) -> Result<TrialOutcome> {
    let (params, channels) = draw_trial(scenario, stream)?;
    let bd = if bd { Some(evaluate(scenario, &channels, &params, Scheme::Bd)?) } else { None };
    let bds = if bds && scenario.is_dual() {
        Some(evaluate(scenario, &channels, &params, Scheme::Bds)?)
    } else if bds {
        return Err(Error::config("BDS needs a dual-polarized array"));
    } else {
        None
    };
    Ok(TrialOutcome { params, bd, bds })
}

/// All trials of a scenario, in trial order. Trial t uses stream
/// `stream_offset + t`; results do not depend on the thread count.
pub fn trial_outcomes(
    scenario: &GroupScenario,
    n_trials: usize,
    seed: u64,
    stream_offset: u64,
    bd: bool,
    bds: bool,
) -> Result<Vec<TrialOutcome>> {
    (0..n_trials)
        .into_par_iter()
        .map(|t| run_trial(scenario, &RngStream::new(seed, stream_offset + t as u64), bd, bds))
        .collect()
}

/// Mean and standard error over trials.
#[derive(Debug, Clone, PartialEq)]
pub struct McSummary {
    pub scheme: McScheme,
    pub n_trials: usize,
    pub mean: f64,
    pub std_dev: f64,
    pub stderr: f64,
    pub mean_sinr: f64,
    /// Fraction of trials in which the switch chose BDS.
    pub bds_share: Option<f64>,
    pub tau_clamped: bool,
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Per-trial pick of a scheme; returns the metrics and whether BDS was used.
pub fn pick(
    scheme: McScheme,
    o: &TrialOutcome,
    rule: Option<&SwitchRule>,
    theta_max: f64,
) -> Result<(TrialMetrics, bool)> {
    let missing = || Error::invalid("trial outcome lacks a required scheme");
    match scheme {
        McScheme::Bd => Ok((o.bd.ok_or_else(missing)?, false)),
        McScheme::Bds => Ok((o.bds.ok_or_else(missing)?, true)),
        McScheme::Switch(src) => {
            let rule = rule.ok_or_else(|| Error::invalid("switching needs a rule"))?;
            let chi = match src {
                ChiSource::Raw => o.params.chi,
                ChiSource::Effective => mismatch_effective_stats(o.params.chi, theta_max)?.chi_eff,
            };
            let use_bds = rule.prefers_bds(chi, o.params.tau_bd * o.params.tau_bd);
            let m = if use_bds { o.bds } else { o.bd };
            Ok((m.ok_or_else(missing)?, use_bds))
        }
    }
}

/// Summaries of a scheme from per-trial values.
pub fn summarize(
    scheme: McScheme,
    outcomes: &[TrialOutcome],
    rule: Option<&SwitchRule>,
    theta_max: f64,
) -> Result<McSummary> {
    let picks = outcomes.iter().map(|o| pick(scheme, o, rule, theta_max)).collect::<Result<Vec<_>>>()?;
    let rates: Vec<f64> = picks.iter().map(|(m, _)| m.sum_rate).collect();
    let (mean, std_dev) = mean_std(&rates);
    let n = outcomes.len();
    let mean_sinr = picks.iter().map(|(m, _)| m.mean_sinr).sum::<f64>() / n as f64;
    let bds_share = matches!(scheme, McScheme::Switch(_))
        .then(|| picks.iter().filter(|(_, b)| *b).count() as f64 / n as f64);
    Ok(McSummary {
        scheme,
        n_trials: n,
        mean,
        std_dev,
        stderr: std_dev / (n as f64).sqrt(),
        mean_sinr,
        bds_share,
        tau_clamped: outcomes.iter().any(|o| o.params.tau_clamped),
    })
}

/// Paired Monte Carlo over several schemes sharing every random draw.
pub fn run_schemes(scenario: &GroupScenario, schemes: &[McScheme], n_trials: usize, seed: u64) -> Result<Vec<McSummary>> {
    if n_trials == 0 {
        return Err(Error::invalid("n_trials must be at least 1"));
    }
    if schemes.is_empty() {
        return Ok(vec![]);
    }
    let switching = schemes.iter().any(|s| matches!(s, McScheme::Switch(_)));
    let need_bd = switching || schemes.contains(&McScheme::Bd);
    let need_bds = switching || schemes.contains(&McScheme::Bds);
    let rule = if switching { Some(SwitchRule::for_scenario(scenario)?) } else { None };
    let outcomes = trial_outcomes(scenario, n_trials, seed, 0, need_bd, need_bds)?;
    schemes
        .iter()
        .map(|&s| summarize(s, &outcomes, rule.as_ref(), scenario.spec.theta_max))
        .collect()
}

pub fn run_monte_carlo(scenario: &GroupScenario, mode: McScheme, n_trials: usize, seed: u64) -> Result<McSummary> {
    Ok(run_schemes(scenario, &[mode], n_trials, seed)?.remove(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::RngStream;
    use crate::scenario::{ChiModel, CsitModel, ScenarioSpec};
    use std::f64::consts::PI;

    fn small(snr: f64) -> GroupScenario {
        let mut spec = ScenarioSpec::clustered(40, 2, 4, PI / 10.0).unwrap();
        spec.snr_db = snr;
        GroupScenario::build(spec).unwrap()
    }

    #[test]
    fn decomposition_is_consistent() {
        let s = small(10.0).with_params(10.0, ChiModel::Fixed(0.3), CsitModel::Equal { tau_sq: 0.2 }).unwrap();
        let (p, ch) = draw_trial(&s, &RngStream::new(1, 0)).unwrap();
        for scheme in [Scheme::Bd, Scheme::Bds] {
            let csit = ch.estimate(p.tau(scheme)).unwrap();
            let pre = build_all(&s, &ch, &csit, scheme).unwrap();
            let r = sinr(&ch, &pre);
            for i in 0..r.sinr.len() {
                let q = r.signal[i] / (r.intra[i] + r.cross_pol[i] + r.inter[i] + r.noise[i]);
                assert!((q - r.sinr[i]).abs() <= 1e-10 * q.max(1.0));
            }
            assert!((r.sum_rate - r.rate.iter().sum::<f64>()).abs() < 1e-12);
            if scheme == Scheme::Bd {
                assert!(r.cross_pol.iter().all(|&x| x == 0.0));
                assert!(sinr_bds(&ch, &pre).is_err());
            }
        }
    }

    #[test]
    fn bds_cross_pol_vanishes_at_zero_chi() {
        let s = small(10.0);
        let (p, ch) = draw_trial(&s, &RngStream::new(2, 0)).unwrap();
        let csit = ch.estimate(p.tau(Scheme::Bds)).unwrap();
        let pre = build_all(&s, &ch, &csit, Scheme::Bds).unwrap();
        let r = sinr_bds(&ch, &pre).unwrap();
        assert!(r.cross_pol.iter().all(|&x| x < 1e-20));
    }

    #[test]
    fn single_trial_matches_report() {
        let s = small(5.0);
        let sum = run_monte_carlo(&s, McScheme::Bd, 1, 9).unwrap();
        let (p, ch) = draw_trial(&s, &RngStream::new(9, 0)).unwrap();
        let pre = build_all(&s, &ch, &ch.estimate(p.tau_bd).unwrap(), Scheme::Bd).unwrap();
        assert_eq!(sum.mean, sinr(&ch, &pre).sum_rate);
        assert_eq!(sum.stderr, 0.0);
    }

    #[test]
    fn deterministic_for_seed() {
        let s = small(5.0);
        let a = run_schemes(&s, &[McScheme::Bd, McScheme::Bds], 6, 4).unwrap();
        let b = run_schemes(&s, &[McScheme::Bd, McScheme::Bds], 6, 4).unwrap();
        assert_eq!(a, b);
        assert!(run_schemes(&s, &[McScheme::Bd], 0, 4).is_err());
        assert!(run_schemes(&s, &[], 3, 4).unwrap().is_empty());
    }
}
