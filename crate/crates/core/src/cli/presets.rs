//! Built-in experiment configurations, stored as config text so they go
//! through the same parser as user files.

use super::config::ScenarioConfig;
use super::CliError;

pub const PRESETS: [(&str, &str, &str); 7] = [
    ("fig3", "BD sum rate: dual-pol vs single-pol linear arrays", FIG3),
    ("fig4", "BD/BDS vs SNR, perfect CSIT, chi in {0, 0.1}", FIG4),
    ("fig5", "BD/BDS vs SNR, chi = 0, tau^2 = 0.1", FIG5),
    ("fig6", "BD/BDS vs chi at 15 dB for tau^2 in {0, 0.5, 1, 1.5}", FIG6),
    ("fig8", "BD/BDS vs feedback bits, chi in {0.1, 0.2}, 25 dB", FIG8),
    ("fig9", "BD/BDS/switching vs SNR, N_B in {50, 65}, random chi", FIG9),
    ("fig11", "3D planar array, three elevation regions, orientation mismatch", FIG11),
];

const FIG3: &str = "\
scenario_id = fig3
antennas = 120
groups = 4
users_per_group = 8
spread = 8pi/180
layouts = dual@0.5, single@0.5, single@0.25
b_bar = 14
snr_db = 0:5:30
chi = 0.1
tau_sq = 0
schemes = BD
n_trials = 200
grid = true
";

const FIG4: &str = "\
scenario_id = fig4
antennas = 120
groups = 4
users_per_group = 8
spread = pi/12
snr_db = 0:5:30
chi = 0, 0.1
tau_sq = 0
schemes = BD, BDS, ASYM_BD, ASYM_BDS
n_trials = 200
grid = true
";

const FIG5: &str = "\
scenario_id = fig5
antennas = 120
groups = 4
users_per_group = 8
spread = pi/12
snr_db = 0:5:30
chi = 0
csit = paired
tau_sq = 0.1
schemes = BD, BDS, ASYM_BD, ASYM_BDS
n_trials = 200
";

const FIG6: &str = "\
scenario_id = fig6
antennas = 120
groups = 4
users_per_group = 8
spread = pi/12
snr_db = 15
chi = 0:0.1:1
csit = paired
# values above 1 are clamped in the channel model and flagged
tau_sq = 0, 0.5, 1.0, 1.5
schemes = BD, BDS, ASYM_BD, ASYM_BDS, APPROX_BD, APPROX_BDS
n_trials = 200
grid = true
";

const FIG8: &str = "\
scenario_id = fig8
antennas = 120
groups = 4
users_per_group = 8
spread = pi/12
snr_db = 25
chi = 0.1, 0.2
csit = bits
n_bits = 10:10:120
schemes = BD, BDS
n_trials = 200
grid = true
";

const FIG9: &str = "\
scenario_id = fig9
antennas = 120
groups = 4
users_per_group = 8
spread = pi/12
snr_db = 0:5:30
chi = U(0, 0.5)
csit = bits
n_bits = 50, 65
schemes = BD, BDS, SWITCH
n_trials = 200
grid = true
";

const FIG11: &str = "\
scenario_id = fig11
# 10 x 50 planar array: 100 ports per row, 10 rows
antennas = 100
elevation_elements = 10
height = 60
distances = 30, 60, 100
path_loss_reference = 60
groups = 4
users_per_group = 8
spread = pi/12
snr_db = 25
chi = 0:0.1:1
csit = paired
tau_sq = U(0, 1)
theta_max = 0, 0.22pi
schemes = BD, BDS, SWITCH, SWITCH_RAW
n_trials = 200
grid = true
";

pub fn preset_text(name: &str) -> Result<&'static str, CliError> {
    PRESETS
        .iter()
        .find(|(n, _, _)| *n == name)
        .map(|(_, _, t)| *t)
        .ok_or_else(|| {
            let names: Vec<&str> = PRESETS.iter().map(|(n, _, _)| *n).collect();
            CliError::Config(format!("preset: unknown name '{name}' (known: {})", names.join(", ")))
        })
}

pub fn preset(name: &str) -> Result<ScenarioConfig, CliError> {
    ScenarioConfig::parse(preset_text(name)?)
}
