//! Elevation-region prefiltering and the reduction of a planar array to
//! per-region 2D problems.

use std::f64::consts::PI;

use crate::corrstats::{elevation_covariance, ArrayLayout, SpatialCovariance};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::metrics::{pick, trial_outcomes, McScheme, McSummary, TrialOutcome};
use crate::modeswitch::SwitchRule;
use crate::scenario::{GroupScenario, ScenarioSpec};

#[derive(Debug, Clone)]
pub struct ElevationRegion {
    pub cov: SpatialCovariance,
    /// Unit-norm elevation prefilter (M_E × 1).
    pub q: CMat,
    pub lambda_tilde: f64,
    pub distance: f64,
    pub path_loss: f64,
}

/// 1/(1 + (d/d_ref)³).
pub fn path_loss(distance: f64, reference: f64) -> f64 {
    1.0 / (1.0 + (distance / reference).powi(3))
}

/// Prefilter of region `l`: the dominant direction of R_lE inside the null
/// space of the other regions' top eigenvectors (one per region).
pub fn elevation_prefilter(regions: &[SpatialCovariance], l: usize) -> Result<(CMat, f64)> {
    elevation_prefilter_with(regions, l, 1)
}

/// As [`elevation_prefilter`], nulling `n_dominant` eigenvectors per region.
pub fn elevation_prefilter_with(regions: &[SpatialCovariance], l: usize, n_dominant: usize) -> Result<(CMat, f64)> {
    if l >= regions.len() {
        return Err(Error::invalid(format!("region index {l} out of range")));
    }
    let n = regions[l].dim();
    let others: Vec<CMat> = (0..regions.len()).filter(|&k| k != l).map(|k| regions[k].dominant(n_dominant)).collect();
    let cols: usize = others.iter().map(|u| u.ncols()).sum();
    let mut u = CMat::zeros(n, cols);
    let mut off = 0;
    for o in &others {
        u.view_mut((0, off), (n, o.ncols())).copy_from(o);
        off += o.ncols();
    }
    let e = linalg::orthogonal_complement(&u, n);
    if e.ncols() == 0 {
        return Err(Error::Infeasible(format!("region {l}: other regions span the whole elevation space")));
    }
    let reduced = e.adjoint() * &regions[l].matrix * &e;
    let f = linalg::leading_columns(&linalg::eigh(&reduced).vectors, 1);
    let q = e * f;
    let lambda = (q.adjoint() * &regions[l].matrix * &q)[(0, 0)].re;
    Ok((q, lambda))
}

/// Planar-array deployment with several elevation regions.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene3dSpec {
    pub height: f64,
    pub distances: Vec<f64>,
    /// Azimuth spread Δ; the scatter radius of each region is d·tan Δ.
    pub spread: f64,
    pub elevation_elements: usize,
    /// Per-region azimuth scenario; its `antennas` is 2·M_A and its SNR the
    /// total transmit SNR.
    pub azimuth: ScenarioSpec,
    pub path_loss_reference: f64,
    /// Eigenvectors nulled per interfering region.
    pub prefilter_modes: usize,
}

impl Scene3dSpec {
    /// 10 × 50 planar array at height 60 m, regions at 30/60/100 m, 4 groups of 8.
    pub fn standard() -> Result<Self> {
        let mut az = ScenarioSpec::clustered(100, 4, 8, PI / 12.0)?;
        az.snr_db = 25.0;
        Ok(Self {
            height: 60.0,
            distances: vec![30.0, 60.0, 100.0],
            spread: PI / 12.0,
            elevation_elements: 10,
            azimuth: az,
            path_loss_reference: 60.0,
            prefilter_modes: 1,
        })
    }
}

#[derive(Debug, Clone)]
pub struct Scenario3D {
    pub spec: Scene3dSpec,
    pub regions: Vec<ElevationRegion>,
    /// Effective 2D scenario of each region.
    pub scenarios: Vec<GroupScenario>,
    pub total_power: f64,
}

impl Scenario3D {
    pub fn build(spec: Scene3dSpec) -> Result<Self> {
        if spec.distances.is_empty() {
            return Err(Error::config("at least one elevation region is required"));
        }
        let vertical = ArrayLayout::ula(spec.elevation_elements, spec.azimuth.spacing)
            .map_err(|e| Error::config(e.to_string()))?;
        let covs = spec
            .distances
            .iter()
            .map(|&d| elevation_covariance(spec.height, d, d * spec.spread.tan(), &vertical))
            .collect::<Result<Vec<_>>>()?;
        let az = GroupScenario::build(spec.azimuth.clone())?;
        let total_power = az.power();
        let n_regions = covs.len();
        let region_snr = spec.azimuth.snr_db - 10.0 * (n_regions as f64).log10();
        let mut regions = Vec::with_capacity(n_regions);
        let mut scenarios = Vec::with_capacity(n_regions);
        for (l, &d) in spec.distances.iter().enumerate() {
            let (q, lambda_tilde) = elevation_prefilter_with(&covs, l, spec.prefilter_modes)?;
            let pl = path_loss(d, spec.path_loss_reference);
            scenarios.push(az.with_gain_and_power(spec.azimuth.channel_gain * lambda_tilde * pl, region_snr)?);
            regions.push(ElevationRegion { cov: covs[l].clone(), q, lambda_tilde, distance: d, path_loss: pl });
        }
        Ok(Self { spec, regions, scenarios, total_power })
    }

    /// Same deployment with another χ / CSIT model / mismatch in every region.
    pub fn map_scenarios(&self, f: impl Fn(&GroupScenario) -> Result<GroupScenario>) -> Result<Self> {
        let mut s = self.clone();
        s.scenarios = self.scenarios.iter().map(f).collect::<Result<Vec<_>>>()?;
        Ok(s)
    }

    pub fn radiated_power(&self) -> f64 {
        self.scenarios.iter().map(|s| s.power()).sum()
    }
}

pub fn reduce_to_2d(scenario3d: &Scenario3D, l: usize) -> Result<GroupScenario> {
    scenario3d
        .scenarios
        .get(l)
        .cloned()
        .ok_or_else(|| Error::invalid(format!("region index {l} out of range")))
}

/// Paired Monte Carlo over all regions; the per-trial sum rate is the sum
/// over regions. Region l, trial t uses stream (l << 32) + t.
pub fn run_3d_schemes(scenario3d: &Scenario3D, schemes: &[McScheme], n_trials: usize, seed: u64) -> Result<Vec<McSummary>> {
    if n_trials == 0 {
        return Err(Error::invalid("n_trials must be at least 1"));
    }
    let switching = schemes.iter().any(|s| matches!(s, McScheme::Switch(_)));
    let need_bd = switching || schemes.contains(&McScheme::Bd);
    let need_bds = switching || schemes.contains(&McScheme::Bds);
    let mut per_region: Vec<(Vec<TrialOutcome>, Option<SwitchRule>, f64)> = Vec::new();
    for (l, sc) in scenario3d.scenarios.iter().enumerate() {
        let rule = if switching { Some(SwitchRule::for_scenario(sc)?) } else { None };
        let out = trial_outcomes(sc, n_trials, seed, (l as u64) << 32, need_bd, need_bds)?;
        per_region.push((out, rule, sc.spec.theta_max));
    }
    let n_regions = per_region.len() as f64;
    schemes
        .iter()
        .map(|&scheme| {
            let mut totals = vec![0.0; n_trials];
            let mut sinr = 0.0;
            let mut bds = 0usize;
            for (out, rule, tm) in &per_region {
                for (t, o) in out.iter().enumerate() {
                    let (m, used_bds) = pick(scheme, o, rule.as_ref(), *tm)?;
                    totals[t] += m.sum_rate;
                    sinr += m.mean_sinr;
                    bds += used_bds as usize;
                }
            }
            let n = n_trials as f64;
            let mean = totals.iter().sum::<f64>() / n;
            let var = if n_trials > 1 {
                totals.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
            } else {
                0.0
            };
            Ok(McSummary {
                scheme,
                n_trials,
                mean,
                std_dev: var.sqrt(),
                stderr: (var / n).sqrt(),
                mean_sinr: sinr / (n * n_regions),
                bds_share: matches!(scheme, McScheme::Switch(_)).then(|| bds as f64 / (n * n_regions)),
                tau_clamped: per_region.iter().any(|(o, _, _)| o.iter().any(|x| x.params.tau_clamped)),
            })
        })
        .collect()
}

pub fn run_3d(scenario3d: &Scenario3D, mode: McScheme, n_trials: usize, seed: u64) -> Result<McSummary> {
    Ok(run_3d_schemes(scenario3d, &[mode], n_trials, seed)?.remove(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corrstats::DEFAULT_RANK_TOL;
    use crate::linalg::c;

    #[test]
    fn single_region_is_plain_eigenvector() {
        let arr = ArrayLayout::ula(10, 0.5).unwrap();
        let r = elevation_covariance(60.0, 60.0, 60.0 * (PI / 12.0).tan(), &arr).unwrap();
        let (q, lam) = elevation_prefilter(std::slice::from_ref(&r), 0).unwrap();
        assert!((lam - r.eigvals[0]).abs() < 1e-9);
        assert!((q.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn orthogonal_regions_keep_full_gain() {
        let mut a = CMat::zeros(4, 4);
        a[(0, 0)] = c(2.0, 0.0);
        let mut b = CMat::zeros(4, 4);
        b[(1, 1)] = c(3.0, 0.0);
        let regs = vec![
            SpatialCovariance::from_matrix(a, DEFAULT_RANK_TOL).unwrap(),
            SpatialCovariance::from_matrix(b, DEFAULT_RANK_TOL).unwrap(),
        ];
        let (q, lam) = elevation_prefilter(&regs, 0).unwrap();
        assert!((lam - 2.0).abs() < 1e-9);
        assert!((regs[1].dominant(1).adjoint() * q).norm() < 1e-10);
    }

    #[test]
    fn full_null_space_is_infeasible() {
        let regs: Vec<_> = (0..3)
            .map(|k| {
                let mut m = CMat::zeros(2, 2);
                m[(k % 2, k % 2)] = c(1.0, 0.0);
                SpatialCovariance::from_matrix(m, DEFAULT_RANK_TOL).unwrap()
            })
            .collect();
        assert!(matches!(elevation_prefilter(&regs, 2), Err(Error::Infeasible(_))));
    }

    #[test]
    fn path_loss_at_reference() {
        assert_eq!(path_loss(60.0, 60.0), 0.5);
    }
}
