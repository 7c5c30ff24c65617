//! Dual-polarized channel draws, CSIT corruption and orientation mismatch.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corrstats::SpatialCovariance;
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat};

/// Inverse XPD. Cross-polar correlation is fixed at zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarizationModel {
    chi: f64,
}

impl PolarizationModel {
    pub fn new(chi: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&chi) {
            return Err(Error::invalid(format!("chi {chi} outside [0, 1]")));
        }
        Ok(Self { chi })
    }

    pub fn chi(&self) -> f64 {
        self.chi
    }

    pub fn r_xp(&self) -> f64 {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Polarization {
    Vertical,
    Horizontal,
}

impl Polarization {
    pub fn index(self) -> usize {
        match self {
            Polarization::Vertical => 0,
            Polarization::Horizontal => 1,
        }
    }

    pub fn other(self) -> Self {
        match self {
            Polarization::Vertical => Polarization::Horizontal,
            Polarization::Horizontal => Polarization::Vertical,
        }
    }

    pub const BOTH: [Polarization; 2] = [Polarization::Vertical, Polarization::Horizontal];
}

/// Whether the base station array carries one or two polarizations per site.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArrayPolarization {
    Dual,
    Single,
}

/// A reproducible random stream: ChaCha8 keyed by `seed`, stream `stream_id`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(self.seed);
        r.set_stream(self.stream_id);
        r
    }
}

/// One group's channel for a coherence block.
#[derive(Debug, Clone)]
pub struct GroupChannel {
    /// √gain · U_r Λ_r^{1/2}.
    pub factor: CMat,
    /// White inner factor; 2r × N̄ (dual) or r × N̄ (single).
    pub g: CMat,
    /// CSIT error draw, same shape as `g`.
    pub z: CMat,
    /// Per-user multipliers on the (top, bottom) blocks.
    pub scales: Vec<[f64; 2]>,
    pub labels: Vec<Polarization>,
    pub h: CMat,
    pub array: ArrayPolarization,
}

/// Transmitter-side view of one group's channel.
#[derive(Debug, Clone)]
pub struct Csit {
    pub tau: f64,
    pub g_hat: CMat,
    pub h_hat: CMat,
}

impl GroupChannel {
    pub fn n_users(&self) -> usize {
        self.g.ncols()
    }

    pub fn rank(&self) -> usize {
        self.factor.ncols()
    }

    /// Rebuilds a channel matrix from an inner factor using this group's
    /// statistics and per-user scales.
    pub fn assemble(&self, g: &CMat) -> CMat {
        assemble(&self.factor, g, &self.scales, self.array)
    }

    /// Corrupted CSIT with accuracy `tau`, reusing the stored error draw.
    pub fn estimate(&self, tau: f64) -> Result<Csit> {
        let g_hat = corrupt_with(&self.g, &self.z, tau)?;
        let h_hat = self.assemble(&g_hat);
        Ok(Csit { tau, g_hat, h_hat })
    }

    /// Max deviation between stored `h` and its reconstruction from `g`.
    pub fn reconstruction_defect(&self) -> f64 {
        linalg::max_abs(&(self.assemble(&self.g) - &self.h))
    }

    /// Channel of user `k` restricted to its co-polarized block (dual only).
    pub fn co_pol_block(&self, h: &CMat, k: usize) -> CMat {
        let half = self.factor.nrows();
        let off = self.labels[k].index() * half;
        h.view((off, k), (half, 1)).into_owned()
    }
}

fn assemble(factor: &CMat, g: &CMat, scales: &[[f64; 2]], array: ArrayPolarization) -> CMat {
    let r = factor.ncols();
    match array {
        ArrayPolarization::Single => factor * g,
        ArrayPolarization::Dual => {
            let half = factor.nrows();
            let top = factor * g.rows(0, r);
            let bot = factor * g.rows(r, r);
            let mut h = CMat::zeros(2 * half, g.ncols());
            for (k, s) in scales.iter().enumerate() {
                h.view_mut((0, k), (half, 1)).copy_from(&(top.column(k) * c(s[0], 0.0)));
                h.view_mut((half, k), (half, 1)).copy_from(&(bot.column(k) * c(s[1], 0.0)));
            }
            h
        }
    }
}

fn labels_for(n_users: usize) -> Vec<Polarization> {
    (0..n_users)
        .map(|k| if k < n_users / 2 { Polarization::Vertical } else { Polarization::Horizontal })
        .collect()
}

fn check_users(n_users: usize) -> Result<()> {
    if n_users == 0 || !n_users.is_multiple_of(2) {
        return Err(Error::invalid(format!("users per group must be even and positive, got {n_users}")));
    }
    Ok(())
}

fn check_tau(tau: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&tau) {
        return Err(Error::invalid(format!("tau {tau} outside [0, 1]")));
    }
    Ok(())
}

/// Dual-polarized channel of one group. `factor` is √gain·U_rΛ_r^{1/2};
/// `rng` draws G then Z.
pub fn draw_group<R: Rng + ?Sized>(
    factor: &CMat,
    pol: PolarizationModel,
    n_users: usize,
    theta: Option<&[f64]>,
    rng: &mut R,
) -> Result<GroupChannel> {
    check_users(n_users)?;
    let labels = labels_for(n_users);
    let sc = pol.chi().sqrt();
    let scales: Vec<[f64; 2]> = labels
        .iter()
        .enumerate()
        .map(|(k, p)| {
            let t = theta.map_or(0.0, |t| t[k]);
            let (s, co) = t.sin_cos();
            match p {
                Polarization::Vertical => [co - sc * s, s + sc * co],
                Polarization::Horizontal => [sc * co - s, sc * s + co],
            }
        })
        .collect();
    let r = factor.ncols();
    let g = linalg::complex_normal_matrix(rng, 2 * r, n_users);
    let z = linalg::complex_normal_matrix(rng, 2 * r, n_users);
    let h = assemble(factor, &g, &scales, ArrayPolarization::Dual);
    Ok(GroupChannel { factor: factor.clone(), g, z, scales, labels, h, array: ArrayPolarization::Dual })
}

/// Single-polarized baseline channel H = UΛ^{1/2}G.
pub fn draw_single_group<R: Rng + ?Sized>(factor: &CMat, n_users: usize, rng: &mut R) -> Result<GroupChannel> {
    if n_users == 0 {
        return Err(Error::invalid("at least one user required"));
    }
    let r = factor.ncols();
    let g = linalg::complex_normal_matrix(rng, r, n_users);
    let z = linalg::complex_normal_matrix(rng, r, n_users);
    let scales = vec![[1.0, 0.0]; n_users];
    let h = factor * &g;
    Ok(GroupChannel {
        factor: factor.clone(),
        g,
        z,
        scales,
        labels: vec![Polarization::Vertical; n_users],
        h,
        array: ArrayPolarization::Single,
    })
}

/// Draws one group's channel from its covariance at its effective rank.
pub fn draw_channel(
    stats: &SpatialCovariance,
    pol: PolarizationModel,
    n_users: usize,
    rng: &RngStream,
) -> Result<GroupChannel> {
    check_rank(stats)?;
    draw_group(&stats.sqrt_factor(stats.effective_rank), pol, n_users, None, &mut rng.rng())
}

/// As [`draw_channel`], with a per-user orientation θ ~ U[−θmax, θmax]
/// drawn before the fading.
pub fn draw_mismatched_channel(
    stats: &SpatialCovariance,
    pol: PolarizationModel,
    theta_max: f64,
    n_users: usize,
    rng: &RngStream,
) -> Result<GroupChannel> {
    check_rank(stats)?;
    let mut r = rng.rng();
    let theta = draw_thetas(theta_max, n_users, &mut r)?;
    draw_group(&stats.sqrt_factor(stats.effective_rank), pol, n_users, Some(&theta), &mut r)
}

pub fn draw_thetas<R: Rng + ?Sized>(theta_max: f64, n: usize, rng: &mut R) -> Result<Vec<f64>> {
    if !(0.0..=std::f64::consts::FRAC_PI_2 + 1e-12).contains(&theta_max) {
        return Err(Error::invalid(format!("theta_max {theta_max} outside [0, pi/2]")));
    }
    Ok((0..n).map(|_| theta_max * (2.0 * rng.random::<f64>() - 1.0)).collect())
}

fn check_rank(stats: &SpatialCovariance) -> Result<()> {
    if stats.effective_rank == 0 {
        return Err(Error::invalid("covariance has zero effective rank"));
    }
    Ok(())
}

fn corrupt_with(g: &CMat, z: &CMat, tau: f64) -> Result<CMat> {
    check_tau(tau)?;
    if tau == 0.0 {
        return Ok(g.clone());
    }
    Ok(g * c((1.0 - tau * tau).sqrt(), 0.0) + z * c(tau, 0.0))
}

/// Ĝ = √(1−τ²)G + τZ with fresh Z.
pub fn corrupt_csit(g: &CMat, tau: f64, rng: &RngStream) -> Result<CMat> {
    check_tau(tau)?;
    let z = linalg::complex_normal_matrix(&mut rng.rng(), g.nrows(), g.ncols());
    corrupt_with(g, &z, tau)
}

/// Per-group channels of one coherence block.
#[derive(Debug, Clone)]
pub struct ChannelSet {
    pub groups: Vec<GroupChannel>,
}

impl ChannelSet {
    /// Stacked true channels [H_1 … H_G] (M × N).
    pub fn stacked(&self) -> CMat {
        let m = self.groups[0].h.nrows();
        let n: usize = self.groups.iter().map(|g| g.n_users()).sum();
        let mut h = CMat::zeros(m, n);
        let mut off = 0;
        for g in &self.groups {
            h.view_mut((0, off), (m, g.n_users())).copy_from(&g.h);
            off += g.n_users();
        }
        h
    }

    pub fn estimate(&self, tau: f64) -> Result<Vec<Csit>> {
        self.groups.iter().map(|g| g.estimate(tau)).collect()
    }
}
