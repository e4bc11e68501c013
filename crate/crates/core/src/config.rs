//! Scenario configuration: the deployment, radio, antenna, mobility and
//! scheduler parameters of one simulation point.
//!
//! Scenarios are stored as flat `key = value` text, one key per line, with
//! `#` starting a comment. Keys are exactly the field names of
//! [`ScenarioConfig`]; unknown keys are rejected. Every key is optional and
//! falls back to the defaults of [`ScenarioConfig::default`], which describe
//! the 28 GHz, 19-site, 30 UE-per-sector reference deployment.
//!
//! ```text
//! # fast-moving users, cross-polarized receivers
//! ue_velocity = 120
//! ue_polarization = XPOL
//! scheduler = PF
//! ```

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Result, SimError};

/// Receiver antenna polarization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Polarization {
    /// Linear, aligned with the intended plane (0° slant).
    Lpol,
    /// Cross, perpendicular to the intended plane (90° slant).
    Xpol,
}

impl Polarization {
    /// Receiver slant angle implied by the polarization, in degrees.
    pub fn slant_deg(self) -> f64 {
        match self {
            Polarization::Lpol => 0.0,
            Polarization::Xpol => 90.0,
        }
    }
}

impl fmt::Display for Polarization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Polarization::Lpol => "LPOL",
            Polarization::Xpol => "XPOL",
        })
    }
}

impl FromStr for Polarization {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_uppercase().as_str() {
            "LPOL" => Ok(Polarization::Lpol),
            "XPOL" => Ok(Polarization::Xpol),
            _ => Err(format!("expected LPOL or XPOL, got `{s}`")),
        }
    }
}

/// MAC scheduler discipline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SchedulerKind {
    /// Round robin, channel independent.
    Rr,
    /// Proportional fair.
    Pf,
}

impl fmt::Display for SchedulerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SchedulerKind::Rr => "RR",
            SchedulerKind::Pf => "PF",
        })
    }
}

impl FromStr for SchedulerKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_uppercase().as_str() {
            "RR" => Ok(SchedulerKind::Rr),
            "PF" => Ok(SchedulerKind::Pf),
            _ => Err(format!("expected RR or PF, got `{s}`")),
        }
    }
}

/// Downlink transmission mode. Only closed-loop spatial multiplexing exists.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum TransmissionMode {
    #[default]
    Clsm,
}

impl fmt::Display for TransmissionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("CLSM")
    }
}

impl FromStr for TransmissionMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_uppercase().as_str() {
            "CLSM" => Ok(TransmissionMode::Clsm),
            _ => Err(format!("only CLSM is supported, got `{s}`")),
        }
    }
}

/// Named starting points for a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// 19 sites, 30 UEs per sector, 50 TTIs.
    Paper,
    /// 7 sites, 5 UEs per sector, 50 TTIs.
    Small,
}

impl FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "paper" => Ok(Preset::Paper),
            "small" => Ok(Preset::Small),
            _ => Err(format!("expected `small` or `paper`, got `{s}`")),
        }
    }
}

/// Value types that can appear on the right-hand side of a scenario line.
trait ConfigValue: Sized {
    fn parse_value(s: &str) -> std::result::Result<Self, String>;
    fn format_value(&self) -> String;
}

impl ConfigValue for f64 {
    fn parse_value(s: &str) -> std::result::Result<Self, String> {
        let v: f64 = s
            .parse()
            .map_err(|_| format!("expected a number, got `{s}`"))?;
        if v.is_nan() {
            return Err("NaN is not allowed".into());
        }
        Ok(v)
    }

    fn format_value(&self) -> String {
        // Debug formatting is the shortest string that parses back exactly.
        format!("{self:?}")
    }
}

impl ConfigValue for usize {
    fn parse_value(s: &str) -> std::result::Result<Self, String> {
        s.parse()
            .map_err(|_| format!("expected a non-negative integer, got `{s}`"))
    }

    fn format_value(&self) -> String {
        self.to_string()
    }
}

impl ConfigValue for u64 {
    fn parse_value(s: &str) -> std::result::Result<Self, String> {
        s.parse()
            .map_err(|_| format!("expected an unsigned integer, got `{s}`"))
    }

    fn format_value(&self) -> String {
        self.to_string()
    }
}

impl ConfigValue for bool {
    fn parse_value(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "true" | "yes" | "on" | "1" => Ok(true),
            "false" | "no" | "off" | "0" => Ok(false),
            _ => Err(format!("expected true or false, got `{s}`")),
        }
    }

    fn format_value(&self) -> String {
        self.to_string()
    }
}

impl ConfigValue for Option<f64> {
    fn parse_value(s: &str) -> std::result::Result<Self, String> {
        if s.eq_ignore_ascii_case("auto") {
            Ok(None)
        } else {
            f64::parse_value(s).map(Some)
        }
    }

    fn format_value(&self) -> String {
        match self {
            None => "auto".into(),
            Some(v) => v.format_value(),
        }
    }
}

macro_rules! impl_enum_value {
    ($($t:ty),*) => {$(
        impl ConfigValue for $t {
            fn parse_value(s: &str) -> std::result::Result<Self, String> {
                s.parse()
            }

            fn format_value(&self) -> String {
                self.to_string()
            }
        }
    )*};
}

impl_enum_value!(Polarization, SchedulerKind, TransmissionMode);

macro_rules! scenario_fields {
    ($( $(#[$doc:meta])* $field:ident : $ty:ty = $default:expr ),* $(,)?) => {
        /// One fully resolved simulation scenario.
        ///
        /// Units: frequencies in Hz, distances in m, powers in W, angles in
        /// degrees, velocity in km/h, times in s, scheduler windows in TTIs.
        #[derive(Debug, Clone, PartialEq)]
        pub struct ScenarioConfig {
            $( $(#[$doc])* pub $field: $ty, )*
        }

        impl Default for ScenarioConfig {
            fn default() -> Self {
                ScenarioConfig { $( $field: $default, )* }
            }
        }

        impl ScenarioConfig {
            /// Every recognised key, in file order.
            pub const KEYS: &'static [&'static str] = &[$( stringify!($field), )*];

            fn set_key(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
                match key {
                    $( stringify!($field) => {
                        self.$field = <$ty as ConfigValue>::parse_value(value)?;
                        Ok(())
                    } )*
                    _ => Err("unknown key".into()),
                }
            }

            fn key_values(&self) -> Vec<(&'static str, String)> {
                vec![$( (stringify!($field), self.$field.format_value()), )*]
            }
        }
    };
}

scenario_fields! {
    carrier_frequency: f64 = 28e9,
    /// System bandwidth.
    bandwidth: f64 = 10e6,
    /// Rings of sites around the centre site; 2 gives 19 sites.
    n_site_rings: usize = 2,
    inter_site_distance: f64 = 500.0,
    bs_height: f64 = 25.0,
    ue_height: f64 = 1.5,
    /// UEs dropped in each sector (cell).
    ues_per_sector: usize = 30,
    /// Total transmit power per sector.
    bs_tx_power: f64 = 40.0,
    /// Transmit ports, alternating +slant / -slant.
    n_tx: usize = 4,
    n_rx: usize = 4,
    transmission_mode: TransmissionMode = TransmissionMode::Clsm,
    /// Dual-polarized BS ports sit at +slant and -slant.
    bs_pol_slant_deg: f64 = 45.0,
    ue_polarization: Polarization = Polarization::Lpol,
    /// Must agree with `ue_polarization` (0 for LPOL, 90 for XPOL).
    ue_pol_slant_deg: f64 = 0.0,
    /// Zenith-referenced electrical tilt; 90 points the beam at the horizon.
    electrical_downtilt_deg: f64 = 90.0,
    mechanical_downtilt_deg: f64 = 0.0,
    mechanical_slant_deg: f64 = 0.0,
    /// Global rotation applied to all sector boresights.
    azimuth_offset_deg: f64 = 60.0,
    vertical_panels: usize = 2,
    horizontal_panels: usize = 1,
    elements_per_panel: usize = 2,
    /// UE speed in km/h, identical for all UEs of a run.
    ue_velocity: f64 = 0.0,
    n_tti: usize = 50,
    tti_duration: f64 = 1e-3,
    scheduler: SchedulerKind = SchedulerKind::Rr,
    /// PF throughput averaging window.
    pf_time_constant_tc: f64 = 20.0,
    /// UE receiver noise figure, dB.
    noise_figure: f64 = 9.0,
    /// Cross-polar discrimination, dB; `inf` disables leakage.
    xpd_mean: f64 = 8.0,
    seed: u64 = 1,
    rb_bandwidth: f64 = 180e3,
    subcarrier_spacing: f64 = 15e3,
    /// Fading anchor spacing across the RB grid.
    coherence_bandwidth_rbs: usize = 5,
    /// Rician K-factor of LOS links, dB.
    rician_k_db: f64 = 9.0,
    shadowing_std_los_db: f64 = 4.0,
    shadowing_std_nlos_db: f64 = 6.0,
    max_element_gain_dbi: f64 = 8.0,
    azimuth_beamwidth_deg: f64 = 65.0,
    elevation_beamwidth_deg: f64 = 65.0,
    front_back_ratio_db: f64 = 30.0,
    sla_v_db: f64 = 30.0,
    /// Attenuation factor of the truncated Shannon mapping.
    rate_efficiency: f64 = 0.6,
    /// Spectral efficiency ceiling, bit/s/Hz.
    se_cap: f64 = 7.4,
    /// Age, in TTIs, of the channel state behind precoder and rate reports.
    feedback_delay_tti: usize = 1,
    /// Initial PF average throughput in bits/TTI; `auto` is one RB at the cap rate.
    pf_initial_throughput: Option<f64> = None,
    /// Links weaker than the strongest by more than this are folded into noise.
    interferer_cutoff_db: f64 = 30.0,
    min_ue_distance: f64 = 10.0,
    /// Move UEs along their heading each TTI instead of Doppler-only mobility.
    position_update: bool = false,
    /// Count every UE in the KPIs, not only those of the centre site.
    kpi_all_cells: bool = false,
}

impl ScenarioConfig {
    /// Defaults for a named preset.
    pub fn preset(preset: Preset) -> Self {
        let mut cfg = ScenarioConfig::default();
        if preset == Preset::Small {
            cfg.n_site_rings = 1;
            cfg.ues_per_sector = 5;
            cfg.n_tti = 50;
        }
        cfg
    }

    /// Parse scenario text on top of the all-defaults config.
    pub fn parse(text: &str) -> Result<Self> {
        Self::parse_with_base(text, ScenarioConfig::default())
    }

    /// Parse scenario text, starting from `base` for every key the text
    /// leaves out. A config that names a polarization but no slant gets the
    /// slant that polarization implies.
    pub fn parse_with_base(text: &str, base: ScenarioConfig) -> Result<Self> {
        let mut cfg = base;
        let mut slant_given = false;
        let mut pol_given = false;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| SimError::Parse {
                line: line_no,
                key: line.to_string(),
                msg: "expected `key = value`".into(),
            })?;
            let (key, value) = (key.trim(), value.trim());
            cfg.set_key(key, value).map_err(|msg| SimError::Parse {
                line: line_no,
                key: key.to_string(),
                msg,
            })?;
            slant_given |= key == "ue_pol_slant_deg";
            pol_given |= key == "ue_polarization";
        }
        if pol_given && !slant_given {
            cfg.ue_pol_slant_deg = cfg.ue_polarization.slant_deg();
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Serialize every key, one per line.
    pub fn to_scenario_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.key_values() {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        }
        out
    }

    /// Schedulable resource blocks: 90% of the bandwidth in whole RBs
    /// (50 RBs of 180 kHz for 10 MHz).
    pub fn n_rb(&self) -> usize {
        (0.9 * self.bandwidth / self.rb_bandwidth + 1e-9).floor() as usize
    }

    /// Number of sites the ring count produces.
    pub fn n_sites(&self) -> usize {
        1 + 3 * self.n_site_rings * (self.n_site_rings + 1)
    }

    /// Initial PF average throughput, bits/TTI.
    pub fn pf_initial_throughput_bits(&self) -> f64 {
        self.pf_initial_throughput
            .unwrap_or(self.tti_duration * self.rb_bandwidth * self.se_cap)
    }

    /// Check every invariant; the error names the first violation.
    pub fn validate(&self) -> Result<()> {
        fn check(ok: bool, what: &str) -> Result<()> {
            if ok {
                Ok(())
            } else {
                Err(SimError::Validation(what.to_string()))
            }
        }
        let finite_pos = |v: f64| v.is_finite() && v > 0.0;
        check(
            finite_pos(self.carrier_frequency),
            "carrier_frequency must be > 0",
        )?;
        check(finite_pos(self.bandwidth), "bandwidth must be > 0")?;
        check(
            finite_pos(self.inter_site_distance),
            "inter_site_distance must be > 0",
        )?;
        check(self.ues_per_sector >= 1, "ues_per_sector must be >= 1")?;
        check(self.n_tti >= 1, "n_tti must be >= 1")?;
        check(finite_pos(self.bs_height), "bs_height must be > 0")?;
        check(finite_pos(self.ue_height), "ue_height must be > 0")?;
        check(finite_pos(self.bs_tx_power), "bs_tx_power must be > 0")?;
        check(matches!(self.n_tx, 1 | 2 | 4), "n_tx must be 1, 2 or 4")?;
        check(self.n_rx >= 1, "n_rx must be >= 1")?;
        check(
            self.ue_velocity.is_finite() && self.ue_velocity >= 0.0,
            "ue_velocity must be a non-negative number",
        )?;
        check(
            self.ue_pol_slant_deg == self.ue_polarization.slant_deg(),
            "ue_pol_slant_deg must be 0 for LPOL and 90 for XPOL",
        )?;
        check(
            self.tti_duration == 1e-3,
            "tti_duration is fixed at 0.001 s",
        )?;
        check(
            self.pf_time_constant_tc.is_finite() && self.pf_time_constant_tc >= 1.0,
            "pf_time_constant_tc must be >= 1",
        )?;
        check(self.noise_figure.is_finite(), "noise_figure must be finite")?;
        check(self.xpd_mean >= 0.0, "xpd_mean must be >= 0 dB")?;
        check(finite_pos(self.rb_bandwidth), "rb_bandwidth must be > 0")?;
        check(
            self.n_rb() >= 1,
            "bandwidth must hold at least one resource block",
        )?;
        check(
            finite_pos(self.subcarrier_spacing),
            "subcarrier_spacing must be > 0",
        )?;
        check(
            self.coherence_bandwidth_rbs >= 1,
            "coherence_bandwidth_rbs must be >= 1",
        )?;
        check(self.rician_k_db.is_finite(), "rician_k_db must be finite")?;
        check(
            self.shadowing_std_los_db >= 0.0 && self.shadowing_std_nlos_db >= 0.0,
            "shadowing deviations must be >= 0",
        )?;
        check(
            self.max_element_gain_dbi.is_finite(),
            "max_element_gain_dbi must be finite",
        )?;
        for (bw, name) in [
            (self.azimuth_beamwidth_deg, "azimuth_beamwidth_deg"),
            (self.elevation_beamwidth_deg, "elevation_beamwidth_deg"),
        ] {
            check(
                bw > 0.0 && bw < 180.0,
                &format!("{name} must lie in (0, 180)"),
            )?;
        }
        check(
            self.front_back_ratio_db >= 0.0 && self.sla_v_db >= 0.0,
            "front_back_ratio_db and sla_v_db must be >= 0",
        )?;
        check(
            self.vertical_panels >= 1
                && self.horizontal_panels >= 1
                && self.elements_per_panel >= 1,
            "panel and element counts must be >= 1",
        )?;
        check(
            self.rate_efficiency > 0.0 && self.rate_efficiency <= 1.0,
            "rate_efficiency must lie in (0, 1]",
        )?;
        check(finite_pos(self.se_cap), "se_cap must be > 0")?;
        if let Some(t0) = self.pf_initial_throughput {
            check(finite_pos(t0), "pf_initial_throughput must be > 0")?;
        }
        check(
            self.interferer_cutoff_db >= 0.0,
            "interferer_cutoff_db must be >= 0",
        )?;
        check(
            self.min_ue_distance.is_finite() && self.min_ue_distance >= 10.0,
            "min_ue_distance must be >= 10 m",
        )?;
        check(
            self.min_ue_distance < self.inter_site_distance / 3f64.sqrt() * 0.8,
            "min_ue_distance leaves no room to drop UEs",
        )?;
        Ok(())
    }

    /// Switch the receiver polarization, keeping the slant consistent.
    pub fn with_polarization(mut self, pol: Polarization) -> Self {
        self.ue_polarization = pol;
        self.ue_pol_slant_deg = pol.slant_deg();
        self
    }
}

/// Read and validate a scenario file.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<ScenarioConfig> {
    load_scenario_with_base(path, ScenarioConfig::default())
}

/// Read a scenario file on top of `base` (e.g. a preset).
pub fn load_scenario_with_base(
    path: impl AsRef<Path>,
    base: ScenarioConfig,
) -> Result<ScenarioConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| SimError::io(path, e))?;
    ScenarioConfig::parse_with_base(&text, base)
}

/// Cartesian product of the four sweep axes over `base`, ordered by
/// scheduler, polarization, velocity, seed.
pub fn expand_sweep(
    base: &ScenarioConfig,
    velocities: &[f64],
    polarizations: &[Polarization],
    schedulers: &[SchedulerKind],
    seeds: &[u64],
) -> Result<Vec<ScenarioConfig>> {
    if velocities.is_empty() {
        return Err(SimError::EmptyAxis("velocities"));
    }
    if polarizations.is_empty() {
        return Err(SimError::EmptyAxis("polarizations"));
    }
    if schedulers.is_empty() {
        return Err(SimError::EmptyAxis("schedulers"));
    }
    if seeds.is_empty() {
        return Err(SimError::EmptyAxis("seeds"));
    }
    let mut out =
        Vec::with_capacity(velocities.len() * polarizations.len() * schedulers.len() * seeds.len());
    for &scheduler in schedulers {
        for &pol in polarizations {
            for &velocity in velocities {
                for &seed in seeds {
                    let mut cfg = base.clone().with_polarization(pol);
                    cfg.scheduler = scheduler;
                    cfg.ue_velocity = velocity;
                    cfg.seed = seed;
                    cfg.validate()?;
                    out.push(cfg);
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_is_all_defaults() {
        assert_eq!(
            ScenarioConfig::parse("").unwrap(),
            ScenarioConfig::default()
        );
        assert_eq!(
            ScenarioConfig::parse("# only a comment\n\n").unwrap(),
            ScenarioConfig::default()
        );
    }

    #[test]
    fn velocity_scheduler_polarization_file() {
        let cfg =
            ScenarioConfig::parse("ue_velocity = 120\nscheduler = RR\nue_polarization = LPOL\n")
                .unwrap();
        let expect = ScenarioConfig {
            ue_velocity: 120.0,
            ..Default::default()
        };
        assert_eq!(cfg, expect);
        assert_eq!(cfg.n_sites(), 19);
        assert_eq!(cfg.n_rb(), 50);
    }

    #[test]
    fn xpol_gets_its_slant() {
        let cfg = ScenarioConfig::parse("ue_polarization = xpol  # cross\n").unwrap();
        assert_eq!(cfg.ue_polarization, Polarization::Xpol);
        assert_eq!(cfg.ue_pol_slant_deg, 90.0);
    }

    #[test]
    fn inconsistent_slant_rejected() {
        let err =
            ScenarioConfig::parse("ue_polarization = XPOL\nue_pol_slant_deg = 0\n").unwrap_err();
        assert!(
            matches!(err, SimError::Validation(ref m) if m.contains("ue_pol_slant_deg")),
            "{err}"
        );
    }

    #[test]
    fn zero_ues_per_sector_rejected() {
        let err = ScenarioConfig::parse("ues_per_sector = 0").unwrap_err();
        assert!(matches!(err, SimError::Validation(ref m) if m.contains("ues_per_sector")));
    }

    #[test]
    fn unknown_key_reports_line() {
        let err = ScenarioConfig::parse("n_tti = 5\nue_velocty = 3\n").unwrap_err();
        match err {
            SimError::Parse { line, key, .. } => {
                assert_eq!(line, 2);
                assert_eq!(key, "ue_velocty");
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn malformed_line_and_value() {
        assert!(matches!(
            ScenarioConfig::parse("n_tti 5"),
            Err(SimError::Parse { line: 1, .. })
        ));
        assert!(matches!(
            ScenarioConfig::parse("n_tti = -5"),
            Err(SimError::Parse { .. })
        ));
        assert!(matches!(
            ScenarioConfig::parse("bandwidth = nan"),
            Err(SimError::Parse { .. })
        ));
        assert!(matches!(
            ScenarioConfig::parse("scheduler = EDF"),
            Err(SimError::Parse { .. })
        ));
    }

    #[test]
    fn infinite_xpd_and_auto_round_trip() {
        let cfg = ScenarioConfig::parse("xpd_mean = inf\npf_initial_throughput = auto\n").unwrap();
        assert!(cfg.xpd_mean.is_infinite());
        let again = ScenarioConfig::parse(&cfg.to_scenario_text()).unwrap();
        assert_eq!(cfg, again);
    }

    #[test]
    fn tti_duration_is_fixed() {
        assert!(ScenarioConfig::parse("tti_duration = 0.0005").is_err());
    }

    #[test]
    fn pf_initial_default_is_one_rb_at_cap() {
        let cfg = ScenarioConfig::default();
        assert!((cfg.pf_initial_throughput_bits() - 1332.0).abs() < 1e-9);
    }

    #[test]
    fn sweep_counts_and_identity() {
        let base = ScenarioConfig::preset(Preset::Small);
        let v = [0.0, 20.0, 40.0, 60.0, 80.0, 100.0, 120.0];
        let all = expand_sweep(
            &base,
            &v,
            &[Polarization::Lpol, Polarization::Xpol],
            &[SchedulerKind::Rr, SchedulerKind::Pf],
            &[1, 2, 3, 4, 5],
        )
        .unwrap();
        assert_eq!(all.len(), 140);

        let one = expand_sweep(
            &base,
            &[base.ue_velocity],
            &[base.ue_polarization],
            &[base.scheduler],
            &[base.seed],
        )
        .unwrap();
        assert_eq!(one, vec![base.clone()]);

        assert!(matches!(
            expand_sweep(
                &base,
                &[],
                &[Polarization::Lpol],
                &[SchedulerKind::Rr],
                &[1]
            ),
            Err(SimError::EmptyAxis("velocities"))
        ));
        assert!(matches!(
            expand_sweep(
                &base,
                &[0.0],
                &[Polarization::Lpol],
                &[SchedulerKind::Rr],
                &[]
            ),
            Err(SimError::EmptyAxis("seeds"))
        ));
    }

    #[test]
    fn keys_cover_every_serialized_line() {
        let text = ScenarioConfig::default().to_scenario_text();
        assert_eq!(text.lines().count(), ScenarioConfig::KEYS.len());
    }
}
