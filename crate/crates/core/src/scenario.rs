//! Long-term description of a cell: geometry, covariances, dimensions,
//! power and CSIT model.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::Rng;

use crate::channel::{ArrayPolarization, Polarization};
use crate::corrstats::{
    mismatch_effective_stats, one_ring_covariance_with, ArrayLayout, GroupGeometry,
    SpatialCovariance, DEFAULT_RANK_TOL,
};
use crate::error::{Error, Result};
use crate::linalg::{c, CMat};
use crate::precode::{self, Preprocessor};

/// Which precoding structure is in use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    Bd,
    Bds,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Bd => "BD",
            Scheme::Bds => "BDS",
        }
    }
}

/// Regularizer used inside each BDS subgroup's RZF inverse.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BdsRegularizer {
    /// B̄α per subgroup, i.e. the MMSE loading N̄/P of the full group.
    /// With this choice BDS and BD coincide at χ = 0.
    Matched,
    /// (B̄/2)α per subgroup.
    HalfDimension,
}

/// Inverse XPD per trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChiModel {
    Fixed(f64),
    /// Drawn uniformly per trial.
    Uniform(f64, f64),
}

/// How CSIT accuracy is assigned to the two schemes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CsitModel {
    /// Both schemes see the same τ².
    Equal { tau_sq: f64 },
    /// BD sees τ², BDS (half the feedback dimension, same bits) sees τ⁴.
    Paired { tau_sq: f64 },
    /// τ² from the random-vector-quantization bound for `n_bits` per user.
    Bits { n_bits: u32 },
    /// τ² drawn uniformly per trial, paired as above.
    UniformPaired { lo: f64, hi: f64 },
}

/// Per-trial long-term parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialParams {
    pub chi: f64,
    pub tau_bd: f64,
    pub tau_bds: f64,
    /// True if a requested τ² above 1 was clamped.
    pub tau_clamped: bool,
}

impl TrialParams {
    pub fn tau(&self, scheme: Scheme) -> f64 {
        match scheme {
            Scheme::Bd => self.tau_bd,
            Scheme::Bds => self.tau_bds,
        }
    }
}

/// User-facing scenario description.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    /// Total number of antenna ports M (two per site when dual-polarized).
    pub antennas: usize,
    /// Element spacing in wavelengths.
    pub spacing: f64,
    pub array: ArrayPolarization,
    pub geometries: Vec<GroupGeometry>,
    pub users_per_group: usize,
    pub b_bar: Option<usize>,
    pub r: Option<usize>,
    pub snr_db: f64,
    pub chi: ChiModel,
    pub csit: CsitModel,
    pub theta_max: f64,
    pub channel_gain: f64,
    pub rank_tol: f64,
    pub bds_regularizer: BdsRegularizer,
}

impl ScenarioSpec {
    /// Groups at θ_g = −π/4 + π/6·g with spread `spread`, ULA at half wavelength.
    pub fn clustered(antennas: usize, n_groups: usize, users_per_group: usize, spread: f64) -> Result<Self> {
        let geometries = (0..n_groups)
            .map(|g| GroupGeometry::new(-PI / 4.0 + PI / 6.0 * g as f64, spread))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            antennas,
            spacing: 0.5,
            array: ArrayPolarization::Dual,
            geometries,
            users_per_group,
            b_bar: None,
            r: None,
            snr_db: 10.0,
            chi: ChiModel::Fixed(0.0),
            csit: CsitModel::Equal { tau_sq: 0.0 },
            theta_max: 0.0,
            channel_gain: 1.0,
            rank_tol: DEFAULT_RANK_TOL,
            bds_regularizer: BdsRegularizer::Matched,
        })
    }
}

/// Validated scenario with covariances and preprocessors precomputed.
#[derive(Debug, Clone)]
pub struct GroupScenario {
    pub spec: ScenarioSpec,
    covs: Arc<Vec<SpatialCovariance>>,
    /// BD preprocessors B_g^s (or B_g for single polarization).
    pre: Arc<Vec<Preprocessor>>,
    r: usize,
    b_bar: usize,
}

fn check_unit(name: &str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::config(format!("{name} = {v} outside [0, 1]")));
    }
    Ok(())
}

impl GroupScenario {
    pub fn build(spec: ScenarioSpec) -> Result<Self> {
        let sites = match spec.array {
            ArrayPolarization::Dual => {
                if !spec.antennas.is_multiple_of(2) {
                    return Err(Error::config("antennas must be even for a dual-polarized array"));
                }
                spec.antennas / 2
            }
            ArrayPolarization::Single => spec.antennas,
        };
        if sites == 0 {
            return Err(Error::config("antennas must be positive"));
        }
        if spec.geometries.is_empty() {
            return Err(Error::config("at least one group is required"));
        }
        let layout = ArrayLayout::ula(sites, spec.spacing).map_err(|e| Error::config(e.to_string()))?;
        let covs = spec
            .geometries
            .iter()
            .map(|g| one_ring_covariance_with(g, &layout, spec.rank_tol))
            .collect::<Result<Vec<_>>>()?;
        Self::from_covariances(spec, covs)
    }

    /// Builds from externally supplied covariances (one per group).
    pub fn from_covariances(spec: ScenarioSpec, covs: Vec<SpatialCovariance>) -> Result<Self> {
        Self::validate_params(&spec)?;
        let n_groups = covs.len();
        if n_groups == 0 {
            return Err(Error::config("at least one group is required"));
        }
        let sites = covs[0].dim();
        if covs.iter().any(|c| c.dim() != sites) {
            return Err(Error::config("group covariances have different dimensions"));
        }
        let nbar = spec.users_per_group;
        let dual = spec.array == ArrayPolarization::Dual;
        if nbar == 0 || (dual && !nbar.is_multiple_of(2)) {
            return Err(Error::config(format!("users_per_group = {nbar} must be even and positive")));
        }
        let min_rank = covs.iter().map(|c| c.effective_rank).min().unwrap_or(0);
        if min_rank == 0 {
            return Err(Error::config("a group covariance has zero effective rank"));
        }
        let b_bar = spec.b_bar.unwrap_or(if dual { (2 * nbar).min(2 * min_rank) } else { (2 * nbar).min(min_rank) });
        // Largest preprocessor width supported by r: dual 2(M/2 − (G−1)r), single M − (G−1)r.
        let width = |r: usize| -> isize {
            let free = sites as isize - (n_groups as isize - 1) * r as isize;
            if dual { 2 * free } else { free }
        };
        let r = match spec.r {
            Some(r) => r,
            None => {
                let mut r = min_rank;
                while r > 1 && width(r) < b_bar as isize {
                    r -= 1;
                }
                r
            }
        };
        if r == 0 || r > min_rank {
            return Err(Error::config(format!("r = {r} must lie in [1, min effective rank = {min_rank}]")));
        }
        if b_bar < nbar {
            return Err(Error::config(format!("b_bar = {b_bar} violates N̄ <= B̄ (N̄ = {nbar})")));
        }
        if (b_bar as isize) > width(r) {
            return Err(Error::config(format!(
                "b_bar = {b_bar} violates B̄ <= {} (null-space dimension with r = {r})",
                width(r)
            )));
        }
        if dual {
            if !b_bar.is_multiple_of(2) {
                return Err(Error::config(format!("b_bar = {b_bar} must be even")));
            }
            if b_bar > 2 * min_rank {
                return Err(Error::config(format!("b_bar = {b_bar} violates B̄ <= 2 r_g (r_g = {min_rank})")));
            }
        }
        let half = if dual { b_bar / 2 } else { b_bar };
        let pre = (0..n_groups)
            .map(|g| {
                precode::bd_preprocessor_cols(&covs, g, r, half).map(|mut p| {
                    p.dual = dual;
                    p
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { spec, covs: Arc::new(covs), pre: Arc::new(pre), r, b_bar })
    }

    fn validate_params(spec: &ScenarioSpec) -> Result<()> {
        if !spec.snr_db.is_finite() {
            return Err(Error::config("snr_db must be finite"));
        }
        match spec.chi {
            ChiModel::Fixed(x) => check_unit("chi", x)?,
            ChiModel::Uniform(a, b) => {
                check_unit("chi", a)?;
                check_unit("chi", b)?;
                if a > b {
                    return Err(Error::config("chi range is reversed"));
                }
            }
        }
        match spec.csit {
            CsitModel::Equal { tau_sq } | CsitModel::Paired { tau_sq } => {
                if !(tau_sq >= 0.0 && tau_sq.is_finite()) {
                    return Err(Error::config(format!("tau_sq = {tau_sq} must be nonnegative")));
                }
            }
            CsitModel::Bits { n_bits } => {
                if n_bits == 0 {
                    return Err(Error::config("n_bits must be positive"));
                }
            }
            CsitModel::UniformPaired { lo, hi } => {
                check_unit("tau_sq", lo)?;
                check_unit("tau_sq", hi)?;
                if lo > hi {
                    return Err(Error::config("tau_sq range is reversed"));
                }
            }
        }
        if !(0.0..=PI / 2.0 + 1e-12).contains(&spec.theta_max) {
            return Err(Error::config(format!("theta_max = {} outside [0, pi/2]", spec.theta_max)));
        }
        if !(spec.channel_gain > 0.0 && spec.channel_gain.is_finite()) {
            return Err(Error::config("channel_gain must be positive"));
        }
        Ok(())
    }

    /// Same long-term statistics with different short-term parameters.
    pub fn with_params(&self, snr_db: f64, chi: ChiModel, csit: CsitModel) -> Result<Self> {
        let mut s = self.clone();
        s.spec.snr_db = snr_db;
        s.spec.chi = chi;
        s.spec.csit = csit;
        Self::validate_params(&s.spec)?;
        Ok(s)
    }

    pub fn with_theta_max(&self, theta_max: f64) -> Result<Self> {
        let mut s = self.clone();
        s.spec.theta_max = theta_max;
        Self::validate_params(&s.spec)?;
        Ok(s)
    }

    pub fn with_gain_and_power(&self, channel_gain: f64, snr_db: f64) -> Result<Self> {
        let mut s = self.clone();
        s.spec.channel_gain = channel_gain;
        s.spec.snr_db = snr_db;
        Self::validate_params(&s.spec)?;
        Ok(s)
    }

    pub fn covariances(&self) -> &[SpatialCovariance] {
        &self.covs
    }

    pub fn preprocessors(&self) -> &[Preprocessor] {
        &self.pre
    }

    pub fn is_dual(&self) -> bool {
        self.spec.array == ArrayPolarization::Dual
    }

    pub fn n_groups(&self) -> usize {
        self.covs.len()
    }

    pub fn users_per_group(&self) -> usize {
        self.spec.users_per_group
    }

    pub fn n_users(&self) -> usize {
        self.n_groups() * self.users_per_group()
    }

    /// Antenna ports M.
    pub fn antennas(&self) -> usize {
        if self.is_dual() { 2 * self.covs[0].dim() } else { self.covs[0].dim() }
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn b_bar(&self) -> usize {
        self.b_bar
    }

    pub fn power(&self) -> f64 {
        10f64.powf(self.spec.snr_db / 10.0)
    }

    /// α = N̄/(B̄P).
    pub fn alpha(&self) -> f64 {
        self.users_per_group() as f64 / (self.b_bar as f64 * self.power())
    }

    /// Loading α′ inside a BDS subgroup's K̂ (multiplied by its B̄/2 rows).
    pub fn bds_alpha(&self) -> f64 {
        match self.spec.bds_regularizer {
            BdsRegularizer::Matched => 2.0 * self.alpha(),
            BdsRegularizer::HalfDimension => self.alpha(),
        }
    }

    /// √gain · U_{r_g} Λ_{r_g}^{1/2} for each group.
    pub fn channel_factor(&self, g: usize) -> CMat {
        let cov = &self.covs[g];
        cov.sqrt_factor(cov.effective_rank) * c(self.spec.channel_gain.sqrt(), 0.0)
    }

    /// Covariance realized by the per-polarization channel of group g.
    pub fn channel_covariance(&self, g: usize) -> CMat {
        let cov = &self.covs[g];
        cov.truncated(cov.effective_rank) * c(self.spec.channel_gain, 0.0)
    }

    pub fn fixed_chi(&self) -> Result<f64> {
        match self.spec.chi {
            ChiModel::Fixed(x) => Ok(x),
            ChiModel::Uniform(..) => Err(Error::config("asymptotic evaluation needs a fixed chi")),
        }
    }

    /// (χ, gain multiplier) seen by second-order statistics, folding in the
    /// orientation mismatch.
    pub fn effective_chi(&self, chi: f64) -> Result<(f64, f64)> {
        let m = mismatch_effective_stats(chi, self.spec.theta_max)?;
        Ok((m.chi_eff, m.c_eff))
    }

    /// τ² for each scheme from a nominal BD value.
    fn paired(tau_sq: f64) -> (f64, f64, bool) {
        let clamped = tau_sq > 1.0;
        let t = tau_sq.min(1.0);
        (t, t * t, clamped)
    }

    /// Fixed τ² per scheme, if the CSIT model is deterministic.
    pub fn fixed_tau_sq(&self, scheme: Scheme) -> Result<f64> {
        let (bd, bds, _) = match self.spec.csit {
            CsitModel::Equal { tau_sq } => (tau_sq.min(1.0), tau_sq.min(1.0), tau_sq > 1.0),
            CsitModel::Paired { tau_sq } => Self::paired(tau_sq),
            CsitModel::Bits { n_bits } => (self.tau_sq_from_bits(n_bits, Scheme::Bd)?, self.tau_sq_from_bits(n_bits, Scheme::Bds)?, false),
            CsitModel::UniformPaired { .. } => {
                return Err(Error::config("asymptotic evaluation needs a fixed tau_sq"))
            }
        };
        Ok(match scheme {
            Scheme::Bd => bd,
            Scheme::Bds => bds,
        })
    }

    fn tau_sq_from_bits(&self, n_bits: u32, scheme: Scheme) -> Result<f64> {
        crate::modeswitch::tau_from_bits(
            &crate::modeswitch::FeedbackBudget { n_bits, r: self.r },
            scheme,
        )
    }

    /// Draws per-trial χ and τ (in that order) from `rng`.
    pub fn draw_trial_params<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<TrialParams> {
        let chi = match self.spec.chi {
            ChiModel::Fixed(x) => x,
            ChiModel::Uniform(a, b) => a + (b - a) * rng.random::<f64>(),
        };
        let (bd, bds, clamped) = match self.spec.csit {
            CsitModel::UniformPaired { lo, hi } => Self::paired(lo + (hi - lo) * rng.random::<f64>()),
            CsitModel::Equal { tau_sq } => (tau_sq.min(1.0), tau_sq.min(1.0), tau_sq > 1.0),
            CsitModel::Paired { tau_sq } => Self::paired(tau_sq),
            CsitModel::Bits { .. } => (self.fixed_tau_sq(Scheme::Bd)?, self.fixed_tau_sq(Scheme::Bds)?, false),
        };
        Ok(TrialParams { chi, tau_bd: bd.sqrt(), tau_bds: bds.sqrt(), tau_clamped: clamped })
    }

    /// True if the CSIT model asks for τ² > 1 anywhere.
    pub fn tau_clamped(&self) -> bool {
        match self.spec.csit {
            CsitModel::Equal { tau_sq } | CsitModel::Paired { tau_sq } => tau_sq > 1.0,
            _ => false,
        }
    }

    /// Users of group g with polarization p, as column indices within the group.
    pub fn subgroup_users(&self, p: Polarization) -> std::ops::Range<usize> {
        let h = self.users_per_group() / 2;
        match p {
            Polarization::Vertical => 0..h,
            Polarization::Horizontal => h..2 * h,
        }
    }
}
