//! Deterministic equivalents of the RZF SINR for BD and BDS.

use crate::channel::Polarization;
use crate::error::{Error, Result};
use crate::linalg::{self, blockdiag2, c, rtrace_prod, CMat};
use crate::scenario::{GroupScenario, Scheme};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 1000;

/// e_i = (1/M) tr(R_i T),  T = ((1/M) Σ_j n_j R_j/(1+e_j) + S − zI)⁻¹.
#[derive(Debug, Clone)]
pub struct FixedPointProblem {
    pub covariances: Vec<CMat>,
    /// Users per class (may be fractional in scaling studies).
    pub multiplicities: Vec<f64>,
    pub shift: CMat,
    pub z: f64,
    /// Dimension normalizer M.
    pub normalizer: f64,
}

#[derive(Debug, Clone)]
pub struct FixedPointSolution {
    pub e: Vec<f64>,
    pub t: CMat,
    pub iterations: usize,
    pub residual: f64,
}

impl FixedPointProblem {
    /// Shift-free problem with z = −α.
    pub fn regularized(covariances: Vec<CMat>, multiplicities: Vec<f64>, alpha: f64, normalizer: f64) -> Self {
        let n = covariances.first().map_or(0, |r| r.nrows());
        Self { covariances, multiplicities, shift: CMat::zeros(n, n), z: -alpha, normalizer }
    }

    fn resolvent(&self, e: &[f64]) -> Result<CMat> {
        let n = self.shift.nrows();
        let mut a = self.shift.clone() - CMat::identity(n, n) * c(self.z, 0.0);
        for ((r, &nj), &ej) in self.covariances.iter().zip(&self.multiplicities).zip(e) {
            a += r * c(nj / (self.normalizer * (1.0 + ej)), 0.0);
        }
        linalg::hpd_inverse(&a)
    }

    fn update(&self, t: &CMat) -> Vec<f64> {
        self.covariances.iter().map(|r| rtrace_prod(r, t) / self.normalizer).collect()
    }
}

pub fn solve_fixed_point(problem: &FixedPointProblem, tol: f64, max_iter: usize) -> Result<FixedPointSolution> {
    let p = problem;
    if !(p.z < 0.0 && p.z.is_finite()) {
        return Err(Error::invalid("fixed point needs z < 0"));
    }
    if p.covariances.len() != p.multiplicities.len() {
        return Err(Error::invalid("one multiplicity per class is required"));
    }
    if p.normalizer.is_nan() || p.normalizer <= 0.0 {
        return Err(Error::invalid("normalizer must be positive"));
    }
    let n = p.shift.nrows();
    if p.shift.ncols() != n || p.covariances.iter().any(|r| r.nrows() != n || r.ncols() != n) {
        return Err(Error::invalid("fixed point dimensions disagree"));
    }
    let mut e = vec![-1.0 / p.z; p.covariances.len()];
    let mut step = 1.0;
    let mut prev = f64::INFINITY;
    for it in 1..=max_iter {
        let t = p.resolvent(&e)?;
        let next = p.update(&t);
        let residual = next
            .iter()
            .zip(&e)
            .map(|(a, b)| (a - b).abs() / a.abs().max(1e-300))
            .fold(0.0, f64::max);
        if residual < tol {
            let t = p.resolvent(&next)?;
            return Ok(FixedPointSolution { e: next, t, iterations: it, residual });
        }
        if residual > prev {
            step = 0.5;
        }
        prev = residual;
        for (ei, ni) in e.iter_mut().zip(&next) {
            *ei += step * (ni - *ei);
        }
    }
    Err(Error::NonConvergence { iterations: max_iter, residual: prev })
}

/// Deterministic-equivalent quantities of one (group, polarization) class.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassAsymptotics {
    pub group: usize,
    pub pol: Polarization,
    pub m: f64,
    /// Derivative entering Ψ.
    pub m_prime: f64,
    pub psi: f64,
    pub xi_sq: f64,
    /// Intra-group (BD) or intra-subgroup (BDS) Υ.
    pub upsilon_intra: f64,
    /// Σ ξ²Υ over the opposite-polarization subgroup (BDS only).
    pub cross: f64,
    /// Σ_l ξ_l²Υ_gl over other groups.
    pub inter: f64,
    pub sinr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticSolution {
    pub scheme: Scheme,
    pub chi: f64,
    pub tau_sq: f64,
    pub power: f64,
    /// Users per (group, polarization) class.
    pub users_per_class: usize,
    pub classes: Vec<ClassAsymptotics>,
    pub sum_rate: f64,
    pub iterations: usize,
    pub residual: f64,
}

impl AsymptoticSolution {
    pub fn class(&self, g: usize, p: Polarization) -> Option<&ClassAsymptotics> {
        self.classes.iter().find(|c| c.group == g && c.pol == p)
    }

    pub fn mean_sinr(&self) -> f64 {
        self.classes.iter().map(|c| c.sinr).sum::<f64>() / self.classes.len() as f64
    }

    fn finish(mut self) -> Self {
        self.sum_rate = self.classes.iter().map(|c| self.users_per_class as f64 * (1.0 + c.sinr).log2()).sum();
        self
    }
}

/// γ° given the class quantities and τ².
fn sinr_of(power: f64, n_users: f64, xi_sq: f64, m: f64, ups: f64, other: f64, tau_sq: f64) -> f64 {
    let om = (1.0 + m) * (1.0 + m);
    let num = power / n_users * xi_sq * (1.0 - tau_sq) * m * m;
    let den = xi_sq * ups * (1.0 - tau_sq * (1.0 - om)) + (1.0 + other) * om;
    num / den
}

/// Inputs shared by the solvers: per-group covariances (already scaled by
/// gain and mismatch), the effective χ, τ², powers and dimensions.
struct Setup {
    r: Vec<CMat>,
    bs: Vec<CMat>,
    chi: f64,
    nbar: f64,
    bbar: f64,
    power: f64,
    n_users: f64,
    n_groups: usize,
}

fn setup(scenario: &GroupScenario) -> Result<Setup> {
    if !scenario.is_dual() {
        return Err(Error::config("asymptotic analysis needs a dual-polarized array"));
    }
    let (chi, c_eff) = scenario.effective_chi(scenario.fixed_chi()?)?;
    let n_groups = scenario.n_groups();
    Ok(Setup {
        r: (0..n_groups).map(|g| scenario.channel_covariance(g) * c(c_eff, 0.0)).collect(),
        bs: scenario.preprocessors().iter().map(|p| p.bs.clone()).collect(),
        chi,
        nbar: scenario.users_per_group() as f64,
        bbar: scenario.b_bar() as f64,
        power: scenario.power(),
        n_users: scenario.n_users() as f64,
        n_groups,
    })
}

impl Setup {
    /// B_lˢᴴ R_g B_lˢ.
    fn project(&self, l: usize, g: usize) -> CMat {
        self.bs[l].adjoint() * &self.r[g] * &self.bs[l]
    }

    /// R̄ for polarization p given the per-polarization block C.
    fn polarized(&self, s: &CMat, p: Polarization) -> CMat {
        let x = s * c(self.chi, 0.0);
        match p {
            Polarization::Vertical => blockdiag2(s, &x),
            Polarization::Horizontal => blockdiag2(&x, s),
        }
    }
}

struct BdGroup {
    t: CMat,
    m: [f64; 2],
    rbar: [CMat; 2],
    /// (I − J)⁻¹ entries.
    inv: [[f64; 2]; 2],
    iterations: usize,
    residual: f64,
}

impl BdGroup {
    /// m′ = (I − J)⁻¹ v with v_q = (1/B̄) tr(R̄_q T Q T).
    fn deriv(&self, q: &CMat, bbar: f64) -> [f64; 2] {
        let x = &self.t * q * &self.t;
        let v = [rtrace_prod(&self.rbar[0], &x) / bbar, rtrace_prod(&self.rbar[1], &x) / bbar];
        [
            self.inv[0][0] * v[0] + self.inv[0][1] * v[1],
            self.inv[1][0] * v[0] + self.inv[1][1] * v[1],
        ]
    }
}

fn bd_group(st: &Setup, g: usize, alpha: f64) -> Result<BdGroup> {
    let s = st.project(g, g);
    let rbar = [st.polarized(&s, Polarization::Vertical), st.polarized(&s, Polarization::Horizontal)];
    let fp = FixedPointProblem::regularized(rbar.to_vec(), vec![st.nbar / 2.0; 2], alpha, st.bbar);
    let sol = solve_fixed_point(&fp, DEFAULT_TOL, DEFAULT_MAX_ITER)?;
    let m = [sol.e[0], sol.e[1]];
    let mut j = [[0.0; 2]; 2];
    for q in 0..2 {
        for p in 0..2 {
            let tr = rtrace_prod(&(&rbar[q] * &sol.t), &(&rbar[p] * &sol.t));
            j[q][p] = st.nbar / (2.0 * st.bbar) * tr / (st.bbar * (1.0 + m[p]).powi(2));
        }
    }
    let a = [[1.0 - j[0][0], -j[0][1]], [-j[1][0], 1.0 - j[1][1]]];
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    if det.abs() < 1e-14 {
        return Err(Error::Numerical { message: "I - J is singular".into(), residual: det.abs() });
    }
    let inv = [[a[1][1] / det, -a[0][1] / det], [-a[1][0] / det, a[0][0] / det]];
    Ok(BdGroup { t: sol.t, m, rbar, inv, iterations: sol.iterations, residual: sol.residual })
}

/// Full BD deterministic equivalent.
pub fn asym_bd(scenario: &GroupScenario) -> Result<AsymptoticSolution> {
    let st = setup(scenario)?;
    let tau_sq = scenario.fixed_tau_sq(Scheme::Bd)?;
    let alpha = scenario.alpha();
    let groups = (0..st.n_groups).map(|g| bd_group(&st, g, alpha)).collect::<Result<Vec<_>>>()?;
    let dim = st.bbar as usize;
    let eye = CMat::identity(dim, dim);
    let gsz = st.n_groups as f64;
    let mprime: Vec<[f64; 2]> = groups.iter().map(|gr| gr.deriv(&eye, st.bbar)).collect();
    let psi: Vec<f64> = groups
        .iter()
        .zip(&mprime)
        .map(|(gr, mp)| {
            st.power / (2.0 * gsz * st.bbar) * (mp[0] / (1.0 + gr.m[0]).powi(2) + mp[1] / (1.0 + gr.m[1]).powi(2))
        })
        .collect();
    let xi_sq: Vec<f64> = psi.iter().map(|p| st.power / (gsz * p)).collect();
    let pn = st.power / st.n_users;
    let mut classes = Vec::new();
    for (g, gr) in groups.iter().enumerate() {
        let mp = mprime[g];
        for p in Polarization::BOTH {
            let (pi, qi) = (p.index(), p.other().index());
            let m = gr.m[pi];
            let d = gr.deriv(&gr.rbar[pi], st.bbar);
            let ups = (st.nbar / 2.0 - 1.0) / st.bbar * pn * d[pi] / (1.0 + m).powi(2)
                + st.nbar / (2.0 * st.bbar) * pn * d[qi] / (1.0 + gr.m[qi]).powi(2);
            let mut inter = 0.0;
            for (l, gl) in groups.iter().enumerate() {
                if l == g {
                    continue;
                }
                let cross = st.polarized(&st.project(l, g), p);
                let dl = gl.deriv(&cross, st.bbar);
                let u = pn / 2.0 * st.nbar / st.bbar
                    * (dl[0] / (1.0 + gl.m[0]).powi(2) + dl[1] / (1.0 + gl.m[1]).powi(2));
                inter += xi_sq[l] * u;
            }
            let sinr = sinr_of(st.power, st.n_users, xi_sq[g], m, ups, inter, tau_sq);
            classes.push(ClassAsymptotics {
                group: g,
                pol: p,
                m,
                m_prime: mp[pi],
                psi: psi[g],
                xi_sq: xi_sq[g],
                upsilon_intra: ups,
                cross: 0.0,
                inter,
                sinr,
            });
        }
    }
    Ok(AsymptoticSolution {
        scheme: Scheme::Bd,
        chi: st.chi,
        tau_sq,
        power: st.power,
        users_per_class: scenario.users_per_group() / 2,
        classes,
        sum_rate: 0.0,
        iterations: groups.iter().map(|g| g.iterations).max().unwrap_or(0),
        residual: groups.iter().map(|g| g.residual).fold(0.0, f64::max),
    }
    .finish())
}

/// Scalar-class BD form built on R̄′ = R̄/2 (both polarizations pooled).
pub fn asym_bd_simplified(scenario: &GroupScenario) -> Result<AsymptoticSolution> {
    let st = setup(scenario)?;
    let tau_sq = scenario.fixed_tau_sq(Scheme::Bd)?;
    let alpha = scenario.alpha();
    let pooled = |s: &CMat| linalg::kron_eye2(s) * c((1.0 + st.chi) / 2.0, 0.0);
    struct Grp {
        t: CMat,
        m: f64,
        r: CMat,
        den: f64,
        iterations: usize,
        residual: f64,
    }
    let groups = (0..st.n_groups)
        .map(|g| {
            let r = pooled(&st.project(g, g));
            let fp = FixedPointProblem::regularized(vec![r.clone()], vec![st.nbar], alpha, st.bbar);
            let sol = solve_fixed_point(&fp, DEFAULT_TOL, DEFAULT_MAX_ITER)?;
            let m = sol.e[0];
            let rt = &r * &sol.t;
            let den = 1.0 - st.nbar / st.bbar * rtrace_prod(&rt, &rt) / (st.bbar * (1.0 + m).powi(2));
            Ok(Grp { t: sol.t, m, r, den, iterations: sol.iterations, residual: sol.residual })
        })
        .collect::<Result<Vec<_>>>()?;
    let deriv = |gr: &Grp, q: &CMat| rtrace_prod(&gr.r, &(&gr.t * q * &gr.t)) / st.bbar / gr.den;
    let dim = st.bbar as usize;
    let eye = CMat::identity(dim, dim);
    let gsz = st.n_groups as f64;
    let psi: Vec<f64> = groups
        .iter()
        .map(|gr| st.power / (gsz * st.bbar) * deriv(gr, &eye) / (1.0 + gr.m).powi(2))
        .collect();
    let xi_sq: Vec<f64> = psi.iter().map(|p| st.power / (gsz * p)).collect();
    let pn = st.power / st.n_users;
    let mut classes = Vec::new();
    for (g, gr) in groups.iter().enumerate() {
        let ups = (st.nbar - 1.0) / st.bbar * pn * deriv(gr, &gr.r) / (1.0 + gr.m).powi(2);
        let mut inter = 0.0;
        for (l, gl) in groups.iter().enumerate() {
            if l != g {
                let q = pooled(&st.project(l, g));
                inter += xi_sq[l] * pn * st.nbar / st.bbar * deriv(gl, &q) / (1.0 + gl.m).powi(2);
            }
        }
        let sinr = sinr_of(st.power, st.n_users, xi_sq[g], gr.m, ups, inter, tau_sq);
        for p in Polarization::BOTH {
            classes.push(ClassAsymptotics {
                group: g,
                pol: p,
                m: gr.m,
                m_prime: deriv(gr, &eye),
                psi: psi[g],
                xi_sq: xi_sq[g],
                upsilon_intra: ups,
                cross: 0.0,
                inter,
                sinr,
            });
        }
    }
    Ok(AsymptoticSolution {
        scheme: Scheme::Bd,
        chi: st.chi,
        tau_sq,
        power: st.power,
        users_per_class: scenario.users_per_group() / 2,
        classes,
        sum_rate: 0.0,
        iterations: groups.iter().map(|g| g.iterations).max().unwrap_or(0),
        residual: groups.iter().map(|g| g.residual).fold(0.0, f64::max),
    }
    .finish())
}

/// Full BDS deterministic equivalent.
pub fn asym_bds(scenario: &GroupScenario) -> Result<AsymptoticSolution> {
    let st = setup(scenario)?;
    let tau_sq = scenario.fixed_tau_sq(Scheme::Bds)?;
    let alpha = scenario.bds_alpha();
    let half = st.bbar / 2.0;
    struct Sub {
        s: CMat,
        t: CMat,
        m: f64,
        den: f64,
        iterations: usize,
        residual: f64,
    }
    // The co-polarized block B^sᴴ R B^s is the same for both subgroups.
    let subs = (0..st.n_groups)
        .map(|g| {
            let s = st.project(g, g);
            let fp = FixedPointProblem::regularized(vec![s.clone()], vec![st.nbar / 2.0], alpha, half);
            let sol = solve_fixed_point(&fp, DEFAULT_TOL, DEFAULT_MAX_ITER)?;
            let m = sol.e[0];
            let st_ = &s * &sol.t;
            let den = 1.0 - st.nbar / st.bbar * rtrace_prod(&st_, &st_) / (half * (1.0 + m).powi(2));
            if den.abs() < 1e-14 {
                return Err(Error::Numerical { message: "derivative denominator vanishes".into(), residual: den.abs() });
            }
            Ok(Sub { s, t: sol.t, m, den, iterations: sol.iterations, residual: sol.residual })
        })
        .collect::<Result<Vec<_>>>()?;
    let deriv = |sb: &Sub, q: &CMat| rtrace_prod(&sb.s, &(&sb.t * q * &sb.t)) / half / sb.den;
    let dim = half as usize;
    let eye = CMat::identity(dim, dim);
    let gsz = st.n_groups as f64;
    let mprime: Vec<f64> = subs.iter().map(|sb| deriv(sb, &eye)).collect();
    let psi: Vec<f64> = subs
        .iter()
        .zip(&mprime)
        .map(|(sb, mp)| st.power / (gsz * st.bbar) * mp / (1.0 + sb.m).powi(2))
        .collect();
    // ξ² = (N̄/2)/tr(·) per subgroup, i.e. P/(2GΨ).
    let xi_sq: Vec<f64> = psi.iter().map(|p| st.power / (2.0 * gsz * p)).collect();
    let pn = st.power / st.n_users;
    let mut classes = Vec::new();
    for (g, sb) in subs.iter().enumerate() {
        let m = sb.m;
        let intra = deriv(sb, &sb.s);
        let ups = (st.nbar / 2.0 - 1.0) / half * pn * intra / (1.0 + m).powi(2);
        // opposite subgroup of the same group sees B_gqᴴ R_gp B_gq = χ S
        let cross = xi_sq[g] * pn * st.nbar / st.bbar * st.chi * intra / (1.0 + m).powi(2);
        let mut inter = 0.0;
        for (l, sl) in subs.iter().enumerate() {
            if l == g {
                continue;
            }
            let base = deriv(sl, &st.project(l, g));
            // co-polarized target subgroup, then the cross-polarized one
            for w in [1.0, st.chi] {
                inter += xi_sq[l] * pn * st.nbar / st.bbar * w * base / (1.0 + sl.m).powi(2);
            }
        }
        let sinr = sinr_of(st.power, st.n_users, xi_sq[g], m, ups, cross + inter, tau_sq);
        for p in Polarization::BOTH {
            classes.push(ClassAsymptotics {
                group: g,
                pol: p,
                m,
                m_prime: mprime[g],
                psi: psi[g],
                xi_sq: xi_sq[g],
                upsilon_intra: ups,
                cross,
                inter,
                sinr,
            });
        }
    }
    Ok(AsymptoticSolution {
        scheme: Scheme::Bds,
        chi: st.chi,
        tau_sq,
        power: st.power,
        users_per_class: scenario.users_per_group() / 2,
        classes,
        sum_rate: 0.0,
        iterations: subs.iter().map(|s| s.iterations).max().unwrap_or(0),
        residual: subs.iter().map(|s| s.residual).fold(0.0, f64::max),
    }
    .finish())
}

/// BD SINR treated as χ-independent.
pub fn approx_bd_chi(solution_at_zero: &AsymptoticSolution, chi: f64) -> AsymptoticSolution {
    let mut s = solution_at_zero.clone();
    s.chi = chi;
    s
}

/// c₀ = E_{g,p}[ξ²Υ / (ξ²Υ(τ²((1+m)²−1)+1)/(1+m)² + 1)] from χ = 0 quantities.
pub fn c0(base: &AsymptoticSolution) -> f64 {
    let t = base.tau_sq;
    let sum: f64 = base
        .classes
        .iter()
        .map(|k| {
            let b = k.xi_sq * k.upsilon_intra;
            let om = (1.0 + k.m).powi(2);
            b / (b * (t * (om - 1.0) + 1.0) / om + 1.0)
        })
        .sum();
    sum / base.classes.len() as f64
}

/// γ°(χ) ≈ γ°(0)/(1 + c₀χ).
pub fn approx_bds_chi(solution_at_zero: &AsymptoticSolution, chi: f64) -> AsymptoticSolution {
    let c = c0(solution_at_zero);
    let mut s = solution_at_zero.clone();
    s.chi = chi;
    for k in &mut s.classes {
        k.sinr /= 1.0 + c * chi;
    }
    s.finish()
}

/// Dispatch on scheme.
pub fn asymptotic(scenario: &GroupScenario, scheme: Scheme) -> Result<AsymptoticSolution> {
    match scheme {
        Scheme::Bd => asym_bd(scenario),
        Scheme::Bds => asym_bds(scenario),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{ChiModel, CsitModel, ScenarioSpec};
    use std::f64::consts::PI;

    fn scen(chi: f64, tau_sq: f64, snr: f64) -> GroupScenario {
        let base = GroupScenario::build(ScenarioSpec::clustered(40, 2, 4, PI / 10.0).unwrap()).unwrap();
        base.with_params(snr, ChiModel::Fixed(chi), CsitModel::Equal { tau_sq }).unwrap()
    }

    #[test]
    fn isotropic_quadratic_root() {
        let (m, n, alpha) = (50usize, 30.0, 0.2);
        let fp = FixedPointProblem::regularized(vec![CMat::identity(m, m)], vec![n], alpha, m as f64);
        let sol = solve_fixed_point(&fp, 1e-12, 1000).unwrap();
        let cl = n / m as f64;
        let b = cl + alpha - 1.0;
        let root = (-b + (b * b + 4.0 * alpha).sqrt()) / (2.0 * alpha);
        assert!((sol.e[0] - root).abs() < 1e-10);
    }

    #[test]
    fn no_users_gives_plain_resolvent() {
        let s = CMat::identity(3, 3) * c(2.0, 0.0);
        let fp = FixedPointProblem {
            covariances: vec![CMat::identity(3, 3)],
            multiplicities: vec![0.0],
            shift: s,
            z: -1.0,
            normalizer: 3.0,
        };
        let sol = solve_fixed_point(&fp, 1e-12, 100).unwrap();
        assert!((sol.t[(0, 0)].re - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn non_convergence_is_reported() {
        let fp = FixedPointProblem::regularized(vec![CMat::identity(4, 4)], vec![40.0], 1e-6, 4.0);
        assert!(matches!(solve_fixed_point(&fp, 1e-14, 2), Err(Error::NonConvergence { .. })));
        let bad = FixedPointProblem::regularized(vec![CMat::identity(2, 2)], vec![1.0], -1.0, 2.0);
        assert!(solve_fixed_point(&bad, 1e-10, 10).is_err());
    }

    #[test]
    fn bd_equals_bds_at_zero_chi() {
        let s = scen(0.0, 0.1, 10.0);
        let a = asym_bd(&s).unwrap();
        let b = asym_bds(&s).unwrap();
        for (x, y) in a.classes.iter().zip(&b.classes) {
            assert!((x.sinr - y.sinr).abs() <= 1e-6 * x.sinr);
        }
    }

    #[test]
    fn simplified_agrees_where_it_should() {
        let s = scen(0.4, 0.0, 10.0);
        let full = asym_bd(&s).unwrap();
        let simp = asym_bd_simplified(&s).unwrap();
        for (x, y) in full.classes.iter().zip(&simp.classes) {
            assert!((x.m - y.m).abs() < 1e-8 * x.m);
            assert!((x.xi_sq - y.xi_sq).abs() < 1e-8 * x.xi_sq);
            assert!((x.inter - y.inter).abs() < 1e-8 * x.inter.max(1e-12));
        }
        let s = scen(1.0, 0.2, 10.0);
        let full = asym_bd(&s).unwrap();
        let simp = asym_bd_simplified(&s).unwrap();
        for (x, y) in full.classes.iter().zip(&simp.classes) {
            assert!((x.sinr - y.sinr).abs() < 1e-8 * x.sinr);
        }
    }

    #[test]
    fn polarization_symmetry_and_positivity() {
        for snr in [-20.0, 0.0, 20.0, 40.0] {
            let s = scen(0.3, 0.1, snr);
            for sol in [asym_bd(&s).unwrap(), asym_bds(&s).unwrap()] {
                for g in 0..2 {
                    let v = sol.class(g, Polarization::Vertical).unwrap().sinr;
                    let h = sol.class(g, Polarization::Horizontal).unwrap().sinr;
                    assert!(v > 0.0 && v.is_finite());
                    assert!((v - h).abs() < 1e-9 * v);
                }
            }
        }
    }

    #[test]
    fn approximations() {
        let s = scen(0.0, 0.0, 15.0);
        let base = asym_bds(&s).unwrap();
        assert_eq!(approx_bds_chi(&base, 0.0).classes, base.classes);
        let a = approx_bds_chi(&base, 0.2).mean_sinr();
        let b = approx_bds_chi(&base, 0.4).mean_sinr();
        assert!(c0(&base) > 0.0 && b < a && a < base.mean_sinr());
        assert_eq!(approx_bd_chi(&base, 0.7).classes, base.classes);
    }
}
