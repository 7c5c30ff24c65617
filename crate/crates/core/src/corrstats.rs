//! Long-term channel statistics: one-ring covariances, effective rank and
//! polarization-mismatch effective parameters.

use std::collections::HashMap;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat, C64};

/// Relative eigenvalue threshold used to decide the effective rank.
pub const DEFAULT_RANK_TOL: f64 = 1e-6;

const QUAD_TOL: f64 = 1e-10;
const QUAD_MAX_DEPTH: u32 = 48;

/// Antenna positions in carrier wavelengths. Dual-polarized pairs share a
/// position, so an `M`-element dual-polarized array has `M/2` entries.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayLayout {
    positions: Vec<[f64; 2]>,
    /// Carrier wavelength in meters; informational only.
    pub wavelength: f64,
}

impl ArrayLayout {
    pub fn new(positions: Vec<[f64; 2]>, wavelength: f64) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::invalid("array has no elements"));
        }
        if positions.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::invalid("array positions must be finite"));
        }
        if !(wavelength > 0.0 && wavelength.is_finite()) {
            return Err(Error::invalid("wavelength must be positive"));
        }
        Ok(Self { positions, wavelength })
    }

    /// Uniform linear array along the y-axis with `spacing` in wavelengths.
    pub fn ula(n: usize, spacing: f64) -> Result<Self> {
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::invalid("element spacing must be positive"));
        }
        Self::new((0..n).map(|m| [0.0, m as f64 * spacing]).collect(), 1.0)
    }

    /// Axis-aligned planar grid, `rows × cols`, same spacing on both axes.
    pub fn planar(rows: usize, cols: usize, spacing: f64) -> Result<Self> {
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::invalid("element spacing must be positive"));
        }
        let mut pos = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for k in 0..cols {
                pos.push([r as f64 * spacing, k as f64 * spacing]);
            }
        }
        Self::new(pos, 1.0)
    }

    pub fn positions(&self) -> &[[f64; 2]] {
        &self.positions
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

/// Angular description of one user group seen from the base station.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupGeometry {
    pub azimuth_center: f64,
    pub angular_spread: f64,
    pub scatter_radius: Option<f64>,
    pub distance: Option<f64>,
}

impl GroupGeometry {
    pub fn new(azimuth_center: f64, angular_spread: f64) -> Result<Self> {
        if !azimuth_center.is_finite() || !angular_spread.is_finite() {
            return Err(Error::invalid("geometry angles must be finite"));
        }
        if !(angular_spread > 0.0 && angular_spread < PI / 2.0) {
            return Err(Error::invalid(format!(
                "angular spread {angular_spread} outside (0, pi/2)"
            )));
        }
        Ok(Self { azimuth_center, angular_spread, scatter_radius: None, distance: None })
    }

    /// Spread derived from a scatterer ring of radius `s` at distance `d`.
    pub fn from_ring(azimuth_center: f64, scatter_radius: f64, distance: f64) -> Result<Self> {
        if !(scatter_radius > 0.0 && distance > 0.0) {
            return Err(Error::invalid("ring radius and distance must be positive"));
        }
        let mut g = Self::new(azimuth_center, (scatter_radius / distance).atan())?;
        g.scatter_radius = Some(scatter_radius);
        g.distance = Some(distance);
        Ok(g)
    }
}

/// Hermitian PSD covariance with its cached eigendecomposition.
#[derive(Debug, Clone)]
pub struct SpatialCovariance {
    pub matrix: CMat,
    pub eigvecs: CMat,
    pub eigvals: Vec<f64>,
    pub effective_rank: usize,
    pub rank_tol: f64,
}

impl SpatialCovariance {
    pub fn from_matrix(matrix: CMat, rank_tol: f64) -> Result<Self> {
        let (eigvecs, eigvals, effective_rank) = eigendecompose(&matrix, rank_tol)?;
        if let Some(&min) = eigvals.last() {
            let scale = eigvals[0].abs().max(1.0);
            if min < -1e-10 * scale {
                return Err(Error::invalid(format!("matrix is not PSD (eigenvalue {min:.3e})")));
            }
        }
        Ok(Self { matrix, eigvecs, eigvals, effective_rank, rank_tol })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Top-`r` eigenvectors U^a (dim × r).
    pub fn dominant(&self, r: usize) -> CMat {
        linalg::leading_columns(&self.eigvecs, r.min(self.dim()))
    }

    /// U_r Λ_r^{1/2}, the Karhunen-Loeve factor truncated to `r` modes.
    pub fn sqrt_factor(&self, r: usize) -> CMat {
        let mut f = self.dominant(r);
        for k in 0..f.ncols() {
            let s = self.eigvals[k].max(0.0).sqrt();
            f.column_mut(k).scale_mut(s);
        }
        f
    }

    /// U_r Λ_r U_rᴴ: the covariance actually realized by a rank-`r` channel.
    pub fn truncated(&self, r: usize) -> CMat {
        let f = self.sqrt_factor(r);
        &f * f.adjoint()
    }
}

/// Sorted Hermitian eigendecomposition plus effective rank.
pub fn eigendecompose(r: &CMat, rank_tol: f64) -> Result<(CMat, Vec<f64>, usize)> {
    if r.nrows() != r.ncols() {
        return Err(Error::invalid("covariance must be square"));
    }
    if r.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::invalid("covariance has non-finite entries"));
    }
    if !(rank_tol > 0.0 && rank_tol < 1.0) {
        return Err(Error::invalid("rank_tol must lie in (0, 1)"));
    }
    let scale = linalg::max_abs(r).max(f64::MIN_POSITIVE);
    let defect = linalg::hermitian_defect(r);
    if defect > 1e-9 * scale {
        return Err(Error::invalid(format!("matrix is not Hermitian (defect {defect:.3e})")));
    }
    let e = linalg::eigh(r);
    let top = e.values.first().copied().unwrap_or(0.0);
    let rank = if top > 0.0 {
        e.values.iter().filter(|&&v| v > rank_tol * top).count()
    } else {
        0
    };
    Ok((e.vectors, e.values, rank))
}

fn simpson(a: f64, b: f64, fa: C64, fm: C64, fb: C64) -> C64 {
    (fa + fm * 4.0 + fb) * ((b - a) / 6.0)
}

#[allow(clippy::too_many_arguments)]
fn adapt<F: Fn(f64) -> C64>(
    f: &F,
    a: f64,
    b: f64,
    fa: C64,
    fm: C64,
    fb: C64,
    whole: C64,
    tol: f64,
    depth: u32,
    worst: &mut f64,
) -> C64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let err = (left + right - whole).norm() / 15.0;
    if err <= tol || depth == 0 {
        if depth == 0 {
            *worst = worst.max(err);
        }
        return left + right + (left + right - whole) / 15.0;
    }
    adapt(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, worst)
        + adapt(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, worst)
}

/// Adaptive Simpson quadrature of a complex integrand on [a, b].
pub fn integrate<F: Fn(f64) -> C64>(f: F, a: f64, b: f64, tol: f64) -> Result<C64> {
    // A few initial panels so oscillatory integrands cannot fool the first test.
    const PANELS: usize = 8;
    let h = (b - a) / PANELS as f64;
    let mut total = c(0.0, 0.0);
    let mut worst = 0.0;
    for p in 0..PANELS {
        let lo = a + p as f64 * h;
        let hi = lo + h;
        let (fa, fm, fb) = (f(lo), f(0.5 * (lo + hi)), f(hi));
        let whole = simpson(lo, hi, fa, fm, fb);
        total += adapt(&f, lo, hi, fa, fm, fb, whole, tol / PANELS as f64, QUAD_MAX_DEPTH, &mut worst);
    }
    if worst > tol {
        return Err(Error::Numerical { message: "quadrature did not converge".into(), residual: worst });
    }
    Ok(total)
}

/// Average of exp(−jπ Ω(α+θ)·d) over α ∈ [−Δ, Δ]; Δ = 0 gives the plane wave.
pub fn one_ring_kernel(center: f64, half_width: f64, d: [f64; 2]) -> Result<C64> {
    let phase = |a: f64| -PI * ((a + center).cos() * d[0] + (a + center).sin() * d[1]);
    if d == [0.0, 0.0] {
        return Ok(c(1.0, 0.0));
    }
    if half_width == 0.0 {
        return Ok(C64::from_polar(1.0, phase(0.0)));
    }
    let tol = QUAD_TOL * 2.0 * half_width;
    let v = integrate(|a| C64::from_polar(1.0, phase(a)), -half_width, half_width, tol)?;
    Ok(v / (2.0 * half_width))
}

fn covariance_from_kernel(center: f64, half_width: f64, array: &ArrayLayout) -> Result<CMat> {
    let pos = array.positions();
    let n = pos.len();
    let key = |d: [f64; 2]| ((d[0] * 1e9).round() as i64, (d[1] * 1e9).round() as i64);
    let mut cache: HashMap<(i64, i64), C64> = HashMap::new();
    let mut r = CMat::zeros(n, n);
    for m in 0..n {
        r[(m, m)] = c(1.0, 0.0);
        for k in (m + 1)..n {
            let d = [pos[m][0] - pos[k][0], pos[m][1] - pos[k][1]];
            let v = match cache.get(&key(d)) {
                Some(&v) => v,
                None => {
                    let v = one_ring_kernel(center, half_width, d)?;
                    cache.insert(key(d), v);
                    v
                }
            };
            r[(m, k)] = v;
            r[(k, m)] = v.conj();
        }
    }
    Ok(r)
}

/// One-ring azimuth covariance of a group over the given array.
pub fn one_ring_covariance(geometry: &GroupGeometry, array: &ArrayLayout) -> Result<SpatialCovariance> {
    one_ring_covariance_with(geometry, array, DEFAULT_RANK_TOL)
}

pub fn one_ring_covariance_with(
    geometry: &GroupGeometry,
    array: &ArrayLayout,
    rank_tol: f64,
) -> Result<SpatialCovariance> {
    if !geometry.azimuth_center.is_finite() || !geometry.angular_spread.is_finite() {
        return Err(Error::invalid("geometry angles must be finite"));
    }
    if geometry.angular_spread <= 0.0 {
        return Err(Error::invalid("angular spread must be positive"));
    }
    let r = covariance_from_kernel(geometry.azimuth_center, geometry.angular_spread, array)?;
    SpatialCovariance::from_matrix(r, rank_tol)
}

/// Elevation interval [atan(h/d), atan(h/(d−s))] as (center, half-width).
pub fn elevation_interval(height: f64, distance: f64, scatter_radius: f64) -> Result<(f64, f64)> {
    if ![height, distance, scatter_radius].iter().all(|v| v.is_finite()) {
        return Err(Error::invalid("elevation geometry must be finite"));
    }
    if height <= 0.0 {
        return Err(Error::invalid("height must be positive"));
    }
    if scatter_radius < 0.0 {
        return Err(Error::invalid("scatter radius must be nonnegative"));
    }
    if distance <= scatter_radius {
        return Err(Error::invalid(format!(
            "distance {distance} must exceed scatter radius {scatter_radius}"
        )));
    }
    let lo = (height / distance).atan();
    let hi = (height / (distance - scatter_radius)).atan();
    Ok((0.5 * (lo + hi), 0.5 * (hi - lo)))
}

/// Elevation angle spread atan(h/(d−s)) − atan(h/d).
pub fn elevation_spread(height: f64, distance: f64, scatter_radius: f64) -> Result<f64> {
    elevation_interval(height, distance, scatter_radius).map(|(_, hw)| 2.0 * hw)
}

/// One-ring covariance over the elevation interval, on a vertical array.
pub fn elevation_covariance(
    height: f64,
    distance: f64,
    scatter_radius: f64,
    vertical_array: &ArrayLayout,
) -> Result<SpatialCovariance> {
    let (center, hw) = elevation_interval(height, distance, scatter_radius)?;
    let r = covariance_from_kernel(center, hw, vertical_array)?;
    SpatialCovariance::from_matrix(r, DEFAULT_RANK_TOL)
}

/// Effective polarization statistics under a uniform orientation mismatch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MismatchStats {
    pub c_eff: f64,
    pub chi_eff: f64,
    pub theta_max: f64,
}

pub fn mismatch_effective_stats(chi: f64, theta_max: f64) -> Result<MismatchStats> {
    if !(0.0..=1.0).contains(&chi) {
        return Err(Error::invalid(format!("chi {chi} outside [0, 1]")));
    }
    if !(0.0..=PI / 2.0 + 1e-12).contains(&theta_max) {
        return Err(Error::invalid(format!("theta_max {theta_max} outside [0, pi/2]")));
    }
    // E[cos²θ] − 1/2 for θ ~ U[−θmax, θmax]
    let s = if theta_max == 0.0 { 0.5 } else { (2.0 * theta_max).sin() / (4.0 * theta_max) };
    let c_eff = 0.5 + s + chi * (0.5 - s);
    let chi_eff = (0.5 - s + chi * (0.5 + s)) / c_eff;
    Ok(MismatchStats { c_eff, chi_eff: chi_eff.clamp(0.0, 1.0), theta_max })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fig4_cov() -> SpatialCovariance {
        let g = GroupGeometry::new(-PI / 4.0, PI / 12.0).unwrap();
        one_ring_covariance(&g, &ArrayLayout::ula(60, 0.5).unwrap()).unwrap()
    }

    #[test]
    fn unit_diagonal_and_hermitian() {
        let r = fig4_cov();
        for m in 0..60 {
            assert_eq!(r.matrix[(m, m)], c(1.0, 0.0));
        }
        assert!(linalg::hermitian_defect(&r.matrix) < 1e-12);
        assert!(*r.eigvals.last().unwrap() > -1e-10);
    }

    #[test]
    fn quadrature_entries() {
        let r = fig4_cov();
        let close = |a: C64, b: C64| (a - b).norm() < 1e-9;
        assert!(close(r.matrix[(0, 1)], c(0.4488547245090459, -0.8780156618826939)));
        assert!(close(r.matrix[(0, 30)], c(0.043641445577148996, -0.08060177902826388)));
    }

    #[test]
    fn narrow_spread_is_rank_one() {
        let g = GroupGeometry::new(0.3, 1e-9).unwrap();
        let r = one_ring_covariance(&g, &ArrayLayout::ula(16, 0.5).unwrap()).unwrap();
        assert!(r.eigvals[1] / r.eigvals[0] < 1e-6);
        assert_eq!(r.effective_rank, 1);
    }

    #[test]
    fn identity_and_ones() {
        let (_, v, k) = eigendecompose(&CMat::identity(60, 60), DEFAULT_RANK_TOL).unwrap();
        assert_eq!(k, 60);
        assert!(v.iter().all(|&x| (x - 1.0).abs() < 1e-12));
        let ones = CMat::from_element(7, 7, c(1.0, 0.0));
        let (_, v, k) = eigendecompose(&ones, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(k, 1);
        assert!((v[0] - 7.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut a = CMat::identity(3, 3);
        a[(0, 1)] = c(0.5, 0.0);
        assert!(matches!(eigendecompose(&a, 1e-6), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn geometry_validation() {
        assert!(GroupGeometry::new(0.0, 0.0).is_err());
        assert!(GroupGeometry::new(0.0, PI / 2.0).is_err());
        assert!(GroupGeometry::new(f64::NAN, 0.1).is_err());
        let g = GroupGeometry::from_ring(0.1, 20.0, 100.0).unwrap();
        assert!((g.angular_spread - 0.2f64.atan()).abs() < 1e-12);
    }

    #[test]
    fn elevation_zero_radius_is_rank_one() {
        let arr = ArrayLayout::ula(10, 0.5).unwrap();
        let r = elevation_covariance(60.0, 100.0, 0.0, &arr).unwrap();
        assert_eq!(r.effective_rank, 1);
        assert!(elevation_covariance(60.0, 10.0, 10.0, &arr).is_err());
    }

    #[test]
    fn mismatch_limits() {
        let s = mismatch_effective_stats(0.3, 0.0).unwrap();
        assert_eq!((s.c_eff, s.chi_eff), (1.0, 0.3));
        let s = mismatch_effective_stats(0.3, PI / 2.0).unwrap();
        assert!((s.c_eff - 0.65).abs() < 1e-12 && (s.chi_eff - 1.0).abs() < 1e-12);
        assert!(mismatch_effective_stats(1.2, 0.1).is_err());
    }

    proptest! {
        #[test]
        fn chi_eff_monotone_in_theta(chi in 0.0f64..=1.0, a in 0.0f64..1.5, b in 0.0f64..1.5) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let s1 = mismatch_effective_stats(chi, lo).unwrap();
            let s2 = mismatch_effective_stats(chi, hi).unwrap();
            prop_assert!(s2.chi_eff >= s1.chi_eff - 1e-12);
            prop_assert!(s1.c_eff <= 1.0 + 1e-12 && s1.chi_eff >= chi - 1e-12);
        }

        #[test]
        fn one_ring_is_valid_covariance(theta in -1.5f64..1.5, spread in 0.01f64..1.2) {
            let g = GroupGeometry::new(theta, spread).unwrap();
            let r = one_ring_covariance(&g, &ArrayLayout::ula(12, 0.5).unwrap()).unwrap();
            prop_assert!(linalg::hermitian_defect(&r.matrix) < 1e-12);
            prop_assert!(*r.eigvals.last().unwrap() > -1e-10);
            prop_assert!(r.effective_rank >= 1);
        }
    }

    #[test]
    fn rank_monotone_in_spread() {
        let arr = ArrayLayout::ula(30, 0.5).unwrap();
        let mut last = 0;
        for k in 1..10 {
            let g = GroupGeometry::new(-0.4, 0.03 * k as f64).unwrap();
            let r = one_ring_covariance(&g, &arr).unwrap().effective_rank;
            assert!(r >= last);
            last = r;
        }
    }
}
