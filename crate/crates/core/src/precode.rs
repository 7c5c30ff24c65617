//! BD / BDS preprocessing from long-term statistics and RZF inner precoders.

use std::ops::Range;

use crate::channel::{ChannelSet, Csit, Polarization};
use crate::corrstats::SpatialCovariance;
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat};
use crate::scenario::{GroupScenario, Scheme};

/// Outer (long-term) precoder of one group.
#[derive(Debug, Clone)]
pub struct Preprocessor {
    /// B_g^s: sites × columns, orthonormal columns.
    pub bs: CMat,
    /// Number of dominant eigenvectors nulled per interfering group.
    pub r_trunc: usize,
    /// Whether the full preprocessor is I₂ ⊗ B^s (dual) or B^s itself.
    pub dual: bool,
}

impl Preprocessor {
    pub fn b_bar(&self) -> usize {
        if self.dual { 2 * self.bs.ncols() } else { self.bs.ncols() }
    }

    /// B_g over all antenna ports.
    pub fn full(&self) -> CMat {
        if self.dual { linalg::kron_eye2(&self.bs) } else { self.bs.clone() }
    }
}

/// BDS pair: B_gv = [B^s; 0], B_gh = [0; B^s].
#[derive(Debug, Clone)]
pub struct BdsPreprocessor {
    pub b_v: CMat,
    pub b_h: CMat,
    pub bs: CMat,
}

impl BdsPreprocessor {
    pub fn for_pol(&self, p: Polarization) -> &CMat {
        match p {
            Polarization::Vertical => &self.b_v,
            Polarization::Horizontal => &self.b_h,
        }
    }
}

/// Preprocessor of group `g` with `cols` columns per polarization.
pub(crate) fn bd_preprocessor_cols(
    covs: &[SpatialCovariance],
    g: usize,
    r: usize,
    cols: usize,
) -> Result<Preprocessor> {
    let n = covs[g].dim();
    let others: Vec<CMat> = (0..covs.len()).filter(|&l| l != g).map(|l| covs[l].dominant(r)).collect();
    let total: usize = others.iter().map(|u| u.ncols()).sum();
    let mut u_minus = CMat::zeros(n, total);
    let mut off = 0;
    for u in &others {
        u_minus.view_mut((0, off), (n, u.ncols())).copy_from(u);
        off += u.ncols();
    }
    let e = linalg::orthogonal_complement(&u_minus, n);
    if cols > e.ncols() {
        return Err(Error::config(format!(
            "preprocessor needs {cols} columns but the null space has dimension {}",
            e.ncols()
        )));
    }
    let reduced = e.adjoint() * &covs[g].matrix * &e;
    let f = linalg::leading_columns(&linalg::eigh(&reduced).vectors, cols);
    Ok(Preprocessor { bs: e * f, r_trunc: r, dual: true })
}

/// BD preprocessor of group `g` for a dual-polarized array.
pub fn bd_preprocessor(all_stats: &[SpatialCovariance], g: usize, r: usize, b_bar: usize) -> Result<Preprocessor> {
    if g >= all_stats.len() {
        return Err(Error::invalid(format!("group index {g} out of range")));
    }
    let half = all_stats[g].dim();
    let n_groups = all_stats.len();
    let min_rank = all_stats.iter().map(|s| s.effective_rank).min().unwrap_or(0);
    if r == 0 || r > min_rank {
        return Err(Error::config(format!("r = {r} violates 1 <= r <= min r_g = {min_rank}")));
    }
    if !b_bar.is_multiple_of(2) || b_bar == 0 {
        return Err(Error::config(format!("b_bar = {b_bar} must be even and positive")));
    }
    let free = half as isize - (n_groups as isize - 1) * r as isize;
    if b_bar as isize > 2 * free {
        return Err(Error::config(format!("b_bar = {b_bar} violates B̄ <= 2(M/2 - (G-1)r) = {}", 2 * free)));
    }
    if b_bar > 2 * all_stats[g].effective_rank {
        return Err(Error::config(format!(
            "b_bar = {b_bar} violates B̄ <= 2 r_g = {}",
            2 * all_stats[g].effective_rank
        )));
    }
    bd_preprocessor_cols(all_stats, g, r, b_bar / 2)
}

pub fn bds_preprocessor(bd: &Preprocessor) -> Result<BdsPreprocessor> {
    if !bd.dual {
        return Err(Error::invalid("subgrouping requires a dual-polarized preprocessor"));
    }
    let z = CMat::zeros(bd.bs.nrows(), bd.bs.ncols());
    let stack = |a: &CMat, b: &CMat| {
        let mut m = CMat::zeros(a.nrows() + b.nrows(), a.ncols());
        m.view_mut((0, 0), (a.nrows(), a.ncols())).copy_from(a);
        m.view_mut((a.nrows(), 0), (b.nrows(), b.ncols())).copy_from(b);
        m
    };
    Ok(BdsPreprocessor { b_v: stack(&bd.bs, &z), b_h: stack(&z, &bd.bs), bs: bd.bs.clone() })
}

/// Regularized zero-forcing inner precoder.
#[derive(Debug, Clone)]
pub struct InnerPrecoder {
    pub p: CMat,
    pub xi_sq: f64,
    pub alpha: f64,
    pub k_hat: CMat,
    pub per_user_power: f64,
}

/// P = ξ K̂ Ĥ with K̂ = (ĤĤᴴ + dim·α·I)⁻¹ and ξ² = n_streams / ‖K̂Ĥ‖²_F.
pub fn rzf_precoder(h_eff_hat: &CMat, alpha: f64, n_streams: usize, per_user_power: f64) -> Result<InnerPrecoder> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::invalid(format!("alpha = {alpha} must be positive")));
    }
    let dim = h_eff_hat.nrows();
    let gram = h_eff_hat * h_eff_hat.adjoint() + CMat::identity(dim, dim) * c(dim as f64 * alpha, 0.0);
    let k_hat = linalg::hpd_inverse(&gram)?;
    let kh = &k_hat * h_eff_hat;
    let tr = kh.norm_squared();
    if !tr.is_finite() || tr <= 1e-300 {
        return Err(Error::Degenerate("precoder normalization trace vanishes".into()));
    }
    let xi_sq = n_streams as f64 / tr;
    Ok(InnerPrecoder { p: kh * c(xi_sq.sqrt(), 0.0), xi_sq, alpha, k_hat, per_user_power })
}

/// One independently precoded set of users: a BD group or a BDS subgroup.
#[derive(Debug, Clone)]
pub struct PrecodedBlock {
    pub group: usize,
    pub pol: Option<Polarization>,
    /// User columns within the group.
    pub users: Range<usize>,
    pub outer: CMat,
    pub inner: InnerPrecoder,
}

impl PrecodedBlock {
    /// V = B P for this block.
    pub fn beams(&self) -> CMat {
        &self.outer * &self.inner.p
    }
}

#[derive(Debug, Clone)]
pub struct PrecoderSet {
    pub scheme: Scheme,
    pub blocks: Vec<PrecodedBlock>,
    pub per_user_power: f64,
    pub users_per_group: usize,
}

impl PrecoderSet {
    /// Unit-power-per-stream beams V (M × N), users ordered group-major.
    pub fn beamformers(&self) -> CMat {
        let m = self.blocks[0].outer.nrows();
        let n_groups = self.blocks.iter().map(|b| b.group).max().unwrap_or(0) + 1;
        let mut v = CMat::zeros(m, n_groups * self.users_per_group);
        for b in &self.blocks {
            let start = b.group * self.users_per_group + b.users.start;
            v.view_mut((0, start), (m, b.users.len())).copy_from(&b.beams());
        }
        v
    }

    pub fn transmit_power(&self) -> f64 {
        self.per_user_power * self.beamformers().norm_squared()
    }
}

/// Assembles all inner precoders of one coherence block. In BDS mode only
/// the co-polarized rows of each Ĝ_g are read.
pub fn build_all(scenario: &GroupScenario, channels: &ChannelSet, csit: &[Csit], scheme: Scheme) -> Result<PrecoderSet> {
    if channels.groups.len() != scenario.n_groups() || csit.len() != scenario.n_groups() {
        return Err(Error::invalid("channel set does not match the scenario"));
    }
    let nbar = scenario.users_per_group();
    let per_user_power = scenario.power() / scenario.n_users() as f64;
    let mut blocks = Vec::new();
    for (g, pre) in scenario.preprocessors().iter().enumerate() {
        let ch = &channels.groups[g];
        match scheme {
            Scheme::Bd => {
                let b = pre.full();
                let h_eff = b.adjoint() * &csit[g].h_hat;
                let inner = rzf_precoder(&h_eff, scenario.alpha(), nbar, per_user_power)?;
                blocks.push(PrecodedBlock { group: g, pol: None, users: 0..nbar, outer: b, inner });
            }
            Scheme::Bds => {
                let bds = bds_preprocessor(pre)?;
                let r = ch.rank();
                for p in Polarization::BOTH {
                    let users = scenario.subgroup_users(p);
                    let row = p.index() * r;
                    // ĥ^{pp} = UΛ^{1/2} ĝ^{pp} · scale, touching only co-pol rows of Ĝ
                    let mut g_co = csit[g].g_hat.view((row, users.start), (r, users.len())).into_owned();
                    for (j, k) in users.clone().enumerate() {
                        g_co.column_mut(j).scale_mut(ch.scales[k][p.index()]);
                    }
                    let h_eff = bds.bs.adjoint() * (&ch.factor * g_co);
                    let inner = rzf_precoder(&h_eff, scenario.bds_alpha(), users.len(), per_user_power)?;
                    blocks.push(PrecodedBlock { group: g, pol: Some(p), users, outer: bds.for_pol(p).clone(), inner });
                }
            }
        }
    }
    Ok(PrecoderSet { scheme, blocks, per_user_power, users_per_group: nbar })
}
