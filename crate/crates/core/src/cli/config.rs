//! Scenario config files.
//!
//! Grammar (one canonical parser):
//!
//! ```text
//! file    := line*
//! line    := ws ( key ws '=' ws value )? ws ( '#' any* )? '\n'
//! key     := [a-z_][a-z0-9_]*
//! value   := item ( ',' item )* | 'U(' num ',' num ')' | ''
//! item    := num | num ':' num ':' num        # inclusive range start:step:stop
//!          | word                              # schemes, layouts, flags
//! num     := float | float? 'pi' ( '/' float )?
//! layout  := ( 'dual' | 'single' ) '@' num     # array type at spacing (wavelengths)
//! ```
//!
//! Keys may appear at most once. Unknown keys are rejected.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use crate::channel::ArrayPolarization;
use crate::scenario::BdsRegularizer;

use super::CliError;

/// A sweep axis that is either a list of values or drawn per trial.
#[derive(Debug, Clone, PartialEq)]
pub enum Axis {
    Values(Vec<f64>),
    Uniform(f64, f64),
}

impl Axis {
    /// Number of sweep points it contributes.
    pub fn len(&self) -> usize {
        match self {
            Axis::Values(v) => v.len(),
            Axis::Uniform(..) => 1,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AxisValue {
    Fixed(f64),
    Uniform(f64, f64),
}

impl fmt::Display for AxisValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AxisValue::Fixed(x) => write!(f, "{x}"),
            AxisValue::Uniform(a, b) => write!(f, "U({a},{b})"),
        }
    }
}

impl Axis {
    pub fn points(&self) -> Vec<AxisValue> {
        match self {
            Axis::Values(v) => v.iter().map(|&x| AxisValue::Fixed(x)).collect(),
            Axis::Uniform(a, b) => vec![AxisValue::Uniform(*a, *b)],
        }
    }
}

/// How τ² is shared between BD and BDS.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsitMode {
    Equal,
    /// BDS sees τ⁴ (same bits over half the dimension).
    Paired,
    /// τ² from the `n_bits` axis.
    Bits,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchemeId {
    Bd,
    Bds,
    Switch,
    SwitchRaw,
    AsymBd,
    AsymBds,
    ApproxBd,
    ApproxBds,
}

impl SchemeId {
    pub const ALL: [SchemeId; 8] = [
        SchemeId::Bd,
        SchemeId::Bds,
        SchemeId::Switch,
        SchemeId::SwitchRaw,
        SchemeId::AsymBd,
        SchemeId::AsymBds,
        SchemeId::ApproxBd,
        SchemeId::ApproxBds,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SchemeId::Bd => "BD",
            SchemeId::Bds => "BDS",
            SchemeId::Switch => "SWITCH",
            SchemeId::SwitchRaw => "SWITCH_RAW",
            SchemeId::AsymBd => "ASYM_BD",
            SchemeId::AsymBds => "ASYM_BDS",
            SchemeId::ApproxBd => "APPROX_BD",
            SchemeId::ApproxBds => "APPROX_BDS",
        }
    }

    pub fn is_monte_carlo(self) -> bool {
        matches!(self, SchemeId::Bd | SchemeId::Bds | SchemeId::Switch | SchemeId::SwitchRaw)
    }

    fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name().eq_ignore_ascii_case(s))
    }
}

/// Array type and element spacing of one compared layout.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Layout {
    pub array: ArrayPolarization,
    pub spacing: f64,
}

impl fmt::Display for Layout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let a = match self.array {
            ArrayPolarization::Dual => "dual",
            ArrayPolarization::Single => "single",
        };
        write!(f, "{a}@{}", self.spacing)
    }
}

/// Elevation-region deployment on a planar array.
#[derive(Debug, Clone, PartialEq)]
pub struct Elevation {
    pub height: f64,
    pub distances: Vec<f64>,
    pub elevation_elements: usize,
    pub path_loss_reference: f64,
    pub prefilter_modes: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub scenario_id: String,
    /// Antenna ports per elevation row (all ports for a linear array).
    pub antennas: usize,
    pub groups: usize,
    pub users_per_group: usize,
    pub spread: f64,
    /// Group centers; defaults to −π/4 + π/6·g.
    pub azimuths: Option<Vec<f64>>,
    pub layouts: Vec<Layout>,
    pub b_bar: Option<usize>,
    pub r: Option<usize>,
    pub bds_regularizer: BdsRegularizer,
    pub elevation: Option<Elevation>,
    pub snr_db: Vec<f64>,
    pub chi: Axis,
    pub tau_sq: Axis,
    pub n_bits: Vec<u32>,
    pub theta_max: Vec<f64>,
    pub csit: CsitMode,
    pub schemes: Vec<SchemeId>,
    pub n_trials: usize,
    pub seed: u64,
    pub grid: bool,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            scenario_id: "scenario".into(),
            antennas: 120,
            groups: 4,
            users_per_group: 8,
            spread: PI / 12.0,
            azimuths: None,
            layouts: vec![Layout { array: ArrayPolarization::Dual, spacing: 0.5 }],
            b_bar: None,
            r: None,
            bds_regularizer: BdsRegularizer::Matched,
            elevation: None,
            snr_db: vec![10.0],
            chi: Axis::Values(vec![0.0]),
            tau_sq: Axis::Values(vec![0.0]),
            n_bits: vec![],
            theta_max: vec![0.0],
            csit: CsitMode::Equal,
            schemes: vec![SchemeId::Bd, SchemeId::Bds],
            n_trials: 100,
            seed: 1,
            grid: false,
        }
    }
}

fn elev(e: &mut Option<Elevation>) -> &mut Elevation {
    e.get_or_insert_with(|| Elevation {
        height: 60.0,
        distances: vec![],
        elevation_elements: 10,
        path_loss_reference: 60.0,
        prefilter_modes: 1,
    })
}

fn bad(key: &str, msg: impl fmt::Display) -> CliError {
    CliError::Config(format!("{key}: {msg}"))
}

/// Parses `1.5`, `pi`, `2pi`, `pi/12`, `8pi/180`, `0.22pi`.
pub fn parse_number(s: &str) -> Option<f64> {
    let s = s.trim();
    if let Some(i) = s.find("pi") {
        let (coef, rest) = (s[..i].trim(), s[i + 2..].trim());
        let coef = if coef.is_empty() { 1.0 } else { coef.trim_end_matches('*').trim().parse::<f64>().ok()? };
        let div = match rest.strip_prefix('/') {
            Some(d) => d.trim().parse::<f64>().ok()?,
            None if rest.is_empty() => 1.0,
            None => return None,
        };
        return Some(coef * PI / div).filter(|x| x.is_finite());
    }
    s.parse::<f64>().ok().filter(|x| x.is_finite())
}

fn parse_range(s: &str) -> Option<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return None;
    }
    let (a, step, b) = (parse_number(parts[0])?, parse_number(parts[1])?, parse_number(parts[2])?);
    if step.is_nan() || step <= 0.0 || b < a {
        return None;
    }
    let n = ((b - a) / step + 1e-9).floor() as usize;
    // round to 12 significant digits so 0:0.1:1 prints as 0.3, not 0.30000000000000004
    Some((0..=n).map(|k| format!("{:.12e}", a + step * k as f64).parse().unwrap()).collect())
}

fn number_list(key: &str, v: &str) -> Result<Vec<f64>, CliError> {
    let mut out = Vec::new();
    for item in v.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if item.contains(':') {
            out.extend(parse_range(item).ok_or_else(|| bad(key, format!("bad range '{item}'")))?);
        } else {
            out.push(parse_number(item).ok_or_else(|| bad(key, format!("'{item}' is not a number")))?);
        }
    }
    Ok(out)
}

fn axis(key: &str, v: &str) -> Result<Axis, CliError> {
    let t = v.trim();
    if let Some(inner) = t.strip_prefix("U(").and_then(|r| r.strip_suffix(')')) {
        let p: Vec<&str> = inner.split(',').collect();
        let nums = (p.len() == 2).then(|| (parse_number(p[0]), parse_number(p[1])));
        return match nums {
            Some((Some(a), Some(b))) if a <= b => Ok(Axis::Uniform(a, b)),
            _ => Err(bad(key, format!("bad uniform range '{t}'"))),
        };
    }
    Ok(Axis::Values(number_list(key, t)?))
}

fn scalar<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, CliError> {
    v.trim().parse::<T>().map_err(|_| bad(key, format!("cannot parse '{}'", v.trim())))
}

fn number(key: &str, v: &str) -> Result<f64, CliError> {
    parse_number(v).ok_or_else(|| bad(key, format!("'{}' is not a number", v.trim())))
}

fn boolean(key: &str, v: &str) -> Result<bool, CliError> {
    match v.trim() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        o => Err(bad(key, format!("expected true/false, got '{o}'"))),
    }
}

fn layout(key: &str, item: &str) -> Result<Layout, CliError> {
    let (a, s) = item.split_once('@').ok_or_else(|| bad(key, format!("expected array@spacing, got '{item}'")))?;
    let array = match a.trim() {
        "dual" => ArrayPolarization::Dual,
        "single" => ArrayPolarization::Single,
        o => return Err(bad(key, format!("unknown array type '{o}'"))),
    };
    let spacing = number(key, s)?;
    if spacing.is_nan() || spacing <= 0.0 {
        return Err(bad(key, "spacing must be positive"));
    }
    Ok(Layout { array, spacing })
}

/// Splits a file into key/value pairs, rejecting duplicates.
fn entries(text: &str) -> Result<BTreeMap<String, (usize, String)>, CliError> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("line {}: expected 'key = value'", i + 1)))?;
        let k = k.trim().to_string();
        if k.is_empty() || !k.chars().all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_') {
            return Err(CliError::Config(format!("line {}: bad key '{k}'", i + 1)));
        }
        if map.insert(k.clone(), (i + 1, v.trim().to_string())).is_some() {
            return Err(CliError::Config(format!("line {}: duplicate key '{k}'", i + 1)));
        }
    }
    Ok(map)
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut c = ScenarioConfig::default();
        let mut elevation: Option<Elevation> = None;
        for (k, (_, v)) in entries(text)? {
            let k = k.as_str();
            let v = v.as_str();
            match k {
                "scenario_id" => {
                    if v.is_empty() || v.contains(['"', '\n']) {
                        return Err(bad(k, "must be a non-empty single-line name"));
                    }
                    c.scenario_id = v.to_string();
                }
                "antennas" => c.antennas = scalar(k, v)?,
                "groups" => c.groups = scalar(k, v)?,
                "users_per_group" => c.users_per_group = scalar(k, v)?,
                "spread" => c.spread = number(k, v)?,
                "azimuths" => c.azimuths = Some(number_list(k, v)?),
                "layouts" => {
                    c.layouts = v.split(',').map(str::trim).filter(|s| !s.is_empty()).map(|s| layout(k, s)).collect::<Result<_, _>>()?
                }
                "b_bar" => c.b_bar = Some(scalar(k, v)?),
                "r" => c.r = Some(scalar(k, v)?),
                "bds_regularizer" => {
                    c.bds_regularizer = match v {
                        "matched" => BdsRegularizer::Matched,
                        "half_dimension" => BdsRegularizer::HalfDimension,
                        o => return Err(bad(k, format!("expected matched or half_dimension, got '{o}'"))),
                    }
                }
                "height" => elev(&mut elevation).height = number(k, v)?,
                "distances" => elev(&mut elevation).distances = number_list(k, v)?,
                "elevation_elements" => elev(&mut elevation).elevation_elements = scalar(k, v)?,
                "path_loss_reference" => elev(&mut elevation).path_loss_reference = number(k, v)?,
                "prefilter_modes" => elev(&mut elevation).prefilter_modes = scalar(k, v)?,
                "snr_db" => c.snr_db = number_list(k, v)?,
                "chi" => c.chi = axis(k, v)?,
                "tau_sq" => c.tau_sq = axis(k, v)?,
                "n_bits" => {
                    c.n_bits = number_list(k, v)?
                        .into_iter()
                        .map(|x| {
                            (x.fract() == 0.0 && (0.0..=u32::MAX as f64).contains(&x))
                                .then_some(x as u32)
                                .ok_or_else(|| bad(k, format!("{x} is not a whole number of bits")))
                        })
                        .collect::<Result<_, _>>()?
                }
                "theta_max" => c.theta_max = number_list(k, v)?,
                "csit" => {
                    c.csit = match v {
                        "equal" => CsitMode::Equal,
                        "paired" => CsitMode::Paired,
                        "bits" => CsitMode::Bits,
                        o => return Err(bad(k, format!("expected equal, paired or bits, got '{o}'"))),
                    }
                }
                "schemes" => {
                    c.schemes = v
                        .split(',')
                        .map(str::trim)
                        .filter(|s| !s.is_empty())
                        .map(|s| SchemeId::parse(s).ok_or_else(|| bad(k, format!("unknown scheme '{s}'"))))
                        .collect::<Result<_, _>>()?
                }
                "n_trials" => c.n_trials = scalar(k, v)?,
                "seed" => c.seed = scalar(k, v)?,
                "grid" => c.grid = boolean(k, v)?,
                _ => return Err(CliError::Config(format!("unknown key '{k}'"))),
            }
        }
        c.elevation = elevation;
        c.validate()?;
        Ok(c)
    }

    /// Checks that do not need covariances; dimensional constraints are
    /// checked when the scenario is built.
    pub fn validate(&self) -> Result<(), CliError> {
        let nonempty = |k: &str, n: usize| if n == 0 { Err(bad(k, "list is empty")) } else { Ok(()) };
        nonempty("snr_db", self.snr_db.len())?;
        nonempty("chi", self.chi.len())?;
        nonempty("theta_max", self.theta_max.len())?;
        nonempty("layouts", self.layouts.len())?;
        if self.n_trials == 0 {
            return Err(bad("n_trials", "must be at least 1"));
        }
        if self.groups == 0 {
            return Err(bad("groups", "must be at least 1"));
        }
        if let Some(a) = &self.azimuths {
            if a.len() != self.groups {
                return Err(bad("azimuths", format!("has {} entries but groups = {}", a.len(), self.groups)));
            }
        }
        if !(self.spread > 0.0 && self.spread < PI) {
            return Err(bad("spread", "must lie in (0, pi)"));
        }
        let in_unit = |k: &str, x: f64| if (0.0..=1.0).contains(&x) { Ok(()) } else { Err(bad(k, format!("{x} outside [0, 1]"))) };
        match &self.chi {
            Axis::Values(v) => v.iter().try_for_each(|&x| in_unit("chi", x))?,
            Axis::Uniform(a, b) => {
                in_unit("chi", *a)?;
                in_unit("chi", *b)?
            }
        }
        for &t in &self.theta_max {
            if !(0.0..=PI / 2.0).contains(&t) {
                return Err(bad("theta_max", format!("{t} outside [0, pi/2]")));
            }
        }
        match self.csit {
            CsitMode::Bits => {
                nonempty("n_bits", self.n_bits.len())?;
                if self.tau_sq != Axis::Values(vec![0.0]) && self.tau_sq != Axis::Values(vec![]) {
                    return Err(bad("tau_sq", "must be omitted when csit = bits"));
                }
                if self.n_bits.contains(&0) {
                    return Err(bad("n_bits", "must be positive"));
                }
            }
            mode => {
                if !self.n_bits.is_empty() {
                    return Err(bad("n_bits", "requires csit = bits"));
                }
                nonempty("tau_sq", self.tau_sq.len())?;
                match &self.tau_sq {
                    Axis::Values(v) => {
                        if let Some(x) = v.iter().find(|x| **x < 0.0) {
                            return Err(bad("tau_sq", format!("{x} is negative")));
                        }
                    }
                    Axis::Uniform(a, b) => {
                        if mode != CsitMode::Paired {
                            return Err(bad("tau_sq", "a uniform tau_sq needs csit = paired"));
                        }
                        in_unit("tau_sq", *a)?;
                        in_unit("tau_sq", *b)?;
                    }
                }
            }
        }
        if let Some(e) = &self.elevation {
            nonempty("distances", e.distances.len())?;
            if self.layouts.iter().any(|l| l.array != crate::channel::ArrayPolarization::Dual) {
                return Err(bad("layouts", "elevation regions need a dual-polarized array"));
            }
        }
        let random = matches!(self.chi, Axis::Uniform(..)) || matches!(self.tau_sq, Axis::Uniform(..));
        for s in &self.schemes {
            if !s.is_monte_carlo() && random {
                return Err(bad("schemes", format!("{} needs fixed chi and tau_sq", s.name())));
            }
        }
        if self.layouts.iter().any(|l| l.array == ArrayPolarization::Single)
            && self.schemes.iter().any(|s| !matches!(s, SchemeId::Bd | SchemeId::AsymBd | SchemeId::ApproxBd))
        {
            return Err(bad("schemes", "single-polarized layouts support BD, ASYM_BD and APPROX_BD only"));
        }
        let varying = self.varying_axes();
        if varying.len() > 1 && !self.grid {
            return Err(bad("grid", format!("axes {} all vary; set grid = true", varying.join(", "))));
        }
        Ok(())
    }

    /// Names of axes with more than one point.
    pub fn varying_axes(&self) -> Vec<&'static str> {
        let tau_or_bits = if self.csit == CsitMode::Bits { ("n_bits", self.n_bits.len()) } else { ("tau_sq", self.tau_sq.len()) };
        [
            ("layouts", self.layouts.len()),
            ("theta_max", self.theta_max.len()),
            ("chi", self.chi.len()),
            tau_or_bits,
            ("snr_db", self.snr_db.len()),
        ]
        .into_iter()
        .filter(|(_, n)| *n > 1)
        .map(|(k, _)| k)
        .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_with_pi() {
        assert_eq!(parse_number("pi/12"), Some(PI / 12.0));
        assert_eq!(parse_number("8pi/180"), Some(8.0 * PI / 180.0));
        assert_eq!(parse_number("0.22pi"), Some(0.22 * PI));
        assert_eq!(parse_number("2.5"), Some(2.5));
        assert_eq!(parse_number("x"), None);
        assert_eq!(parse_number("pi/"), None);
    }

    #[test]
    fn ranges_are_inclusive() {
        assert_eq!(parse_range("0:0.1:0.5").unwrap(), vec![0.0, 0.1, 0.2, 0.3, 0.4, 0.5]);
        assert_eq!(parse_range("0:5:30").unwrap().len(), 7);
        assert!(parse_range("1:0:2").is_none());
    }

    #[test]
    fn parses_full_file() {
        let c = ScenarioConfig::parse(
            "# demo\nscenario_id = t\nsnr_db = 0:10:20  # three points\nchi = U(0, 0.5)\ncsit = paired\ntau_sq = 0.1\nschemes = BD, bds, SWITCH\n",
        )
        .unwrap();
        assert_eq!(c.snr_db, vec![0.0, 10.0, 20.0]);
        assert_eq!(c.chi, Axis::Uniform(0.0, 0.5));
        assert_eq!(c.schemes, vec![SchemeId::Bd, SchemeId::Bds, SchemeId::Switch]);
    }

    #[test]
    fn errors_name_the_field() {
        let e = |t: &str| ScenarioConfig::parse(t).unwrap_err().to_string();
        assert!(e("antennas = many").contains("antennas"));
        assert!(e("snr_db = 0,10\nchi = 0,0.1").contains("grid"));
        assert!(e("bogus = 1").contains("bogus"));
        assert!(e("chi = 1.5").contains("chi"));
        assert!(e("chi = U(0,0.5)\nschemes = ASYM_BD").contains("schemes"));
        assert!(e("seed = 1\nseed = 2").contains("duplicate"));
    }

    #[test]
    fn empty_scheme_list_is_allowed() {
        assert!(ScenarioConfig::parse("schemes =").unwrap().schemes.is_empty());
    }
}
