//! BS antenna gains and the polarization coupling between the dual-polarized
//! BS ports and a single-polarized UE antenna.
//!
//! Elevation angles are measured from the horizon, positive upwards. The
//! electrical tilt is configured zenith-referenced: a value of 90° steers the
//! vertical array at the horizon, 100° steers it 10° below.

use num_complex::Complex;
use rand::Rng;

use crate::config::ScenarioConfig;
use crate::error::{Result, SimError};
use crate::num::{db_to_lin, lin_to_db, Real};

/// Floor for the array factor at exact nulls, dB.
const ARRAY_FACTOR_FLOOR_DB: f64 = -100.0;

/// Polarization plane the network launches its signal in. Receivers aligned
/// with it see phase-stable depolarization; perpendicular receivers see the
/// depolarized field rotate at the full Doppler rate.
pub const INTENDED_PLANE_DEG: f64 = 0.0;

/// BS panel description.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AntennaConfig<T> {
    pub max_element_gain_dbi: T,
    pub azimuth_beamwidth_deg: T,
    pub elevation_beamwidth_deg: T,
    pub front_back_ratio_db: T,
    pub sla_v_db: T,
    /// Zenith-referenced electrical tilt.
    pub electrical_downtilt_deg: T,
    /// Downward mechanical tilt.
    pub mechanical_downtilt_deg: T,
    pub mechanical_slant_deg: T,
    pub vertical_panels: usize,
    pub horizontal_panels: usize,
    pub elements_per_panel: usize,
}

impl AntennaConfig<f64> {
    pub fn from_scenario(cfg: &ScenarioConfig) -> Self {
        AntennaConfig {
            max_element_gain_dbi: cfg.max_element_gain_dbi,
            azimuth_beamwidth_deg: cfg.azimuth_beamwidth_deg,
            elevation_beamwidth_deg: cfg.elevation_beamwidth_deg,
            front_back_ratio_db: cfg.front_back_ratio_db,
            sla_v_db: cfg.sla_v_db,
            electrical_downtilt_deg: cfg.electrical_downtilt_deg,
            mechanical_downtilt_deg: cfg.mechanical_downtilt_deg,
            mechanical_slant_deg: cfg.mechanical_slant_deg,
            vertical_panels: cfg.vertical_panels,
            horizontal_panels: cfg.horizontal_panels,
            elements_per_panel: cfg.elements_per_panel,
        }
    }
}

impl<T: Real> AntennaConfig<T> {
    /// Elevation the vertical array is steered to (from the horizon, up positive).
    pub fn beam_elevation_deg(&self) -> T {
        T::lit(90.0) - self.electrical_downtilt_deg
    }

    /// Elements stacked in the vertical array.
    pub fn vertical_elements(&self) -> usize {
        self.vertical_panels * self.elements_per_panel
    }

    /// Gain of the whole panel toward a direction given relative to the sector
    /// boresight (azimuth) and the horizon (elevation), in dBi.
    pub fn gain_toward(&self, azimuth_deg: T, elevation_deg: T) -> T {
        // Mechanical tilt rotates the panel down, so directions below the
        // horizon move toward its boresight.
        let el_panel = elevation_deg + self.mechanical_downtilt_deg;
        element_gain(self, azimuth_deg, el_panel) + array_factor(self, el_panel)
    }
}

/// Parabolic sector element pattern, dBi.
///
/// `azimuth_deg` and `elevation_deg` are offsets from the element boresight.
pub fn element_gain<T: Real>(cfg: &AntennaConfig<T>, azimuth_deg: T, elevation_deg: T) -> T {
    let twelve = T::lit(12.0);
    let az = wrap_half_turn(azimuth_deg);
    let a_az = (twelve * (az / cfg.azimuth_beamwidth_deg).powi(2)).min(cfg.front_back_ratio_db);
    let a_el = (twelve * (elevation_deg / cfg.elevation_beamwidth_deg).powi(2)).min(cfg.sla_v_db);
    cfg.max_element_gain_dbi - (a_az + a_el).min(cfg.front_back_ratio_db)
}

fn wrap_half_turn<T: Real>(a: T) -> T {
    let full = T::lit(360.0);
    let half = T::lit(180.0);
    let w = (a + half) % full;
    let w = if w < T::zero() { w + full } else { w };
    w - half
}

/// Gain of the uniform vertical stack of half-wavelength spaced elements,
/// steered to the electrical tilt, dB relative to one element.
pub fn array_factor<T: Real>(cfg: &AntennaConfig<T>, elevation_deg: T) -> T {
    let n = cfg.vertical_elements();
    if n <= 1 {
        return T::zero();
    }
    let psi =
        T::PI() * (elevation_deg.to_radians().sin() - cfg.beam_elevation_deg().to_radians().sin());
    let sum = (0..n).fold(Complex::new(T::zero(), T::zero()), |acc, k| {
        acc + Complex::from_polar(T::one(), psi * T::from_count(k))
    });
    let power = sum.norm_sqr() / T::from_count(n);
    let db = lin_to_db(power);
    db.max(T::lit(ARRAY_FACTOR_FLOOR_DB))
}

/// Polarization geometry of one BS-to-UE link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarizationSpec<T> {
    /// Slants of the two BS port groups (+45°, −45° by default).
    pub tx_slants_deg: [T; 2],
    /// UE antenna slant, 0° or 90°.
    pub rx_slant_deg: T,
    /// Cross-polar discrimination, dB; infinity disables leakage.
    pub xpd_db: T,
}

impl PolarizationSpec<f64> {
    pub fn from_scenario(cfg: &ScenarioConfig) -> Self {
        let s = cfg.bs_pol_slant_deg;
        let m = cfg.mechanical_slant_deg;
        PolarizationSpec {
            tx_slants_deg: [s + m, -s + m],
            rx_slant_deg: cfg.ue_pol_slant_deg,
            xpd_db: cfg.xpd_mean,
        }
    }
}

impl<T: Real> PolarizationSpec<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.xpd_db >= T::zero()) {
            return Err(SimError::InvalidArgument(format!(
                "xpd must be >= 0 dB, got {}",
                self.xpd_db
            )));
        }
        if self.rx_slant_deg != T::zero() && self.rx_slant_deg != T::lit(90.0) {
            return Err(SimError::InvalidArgument(format!(
                "rx slant must be 0 or 90, got {}",
                self.rx_slant_deg
            )));
        }
        Ok(())
    }

    /// Fraction of each port's power that leaks into the cross-polar field:
    /// 1 / (1 + XPD).
    pub fn leakage_fraction(&self) -> T {
        if self.xpd_db.is_infinite() {
            return T::zero();
        }
        T::one() / (T::one() + db_to_lin(self.xpd_db))
    }

    /// Rate of the depolarization phase relative to the Doppler frequency:
    /// 0 for a receiver in the intended plane, 1 for one perpendicular to it.
    pub fn depolarization_rate(&self) -> T {
        (self.rx_slant_deg - T::lit(INTENDED_PLANE_DEG))
            .to_radians()
            .sin()
            .abs()
    }
}

/// 2×2 coupling between the BS port groups (columns) and two receive planes
/// (rows): row 0 is the UE antenna's plane, row 1 the plane orthogonal to it.
///
/// Entry `(r, p)` is `sqrt(1-λ)·cos(s_p − θ_r) − sqrt(λ)·sin(s_p − θ_r)·e^{jφ_p}`
/// with `λ` the leakage fraction. Each column has unit norm for any phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingMatrix<T> {
    pub m: [[Complex<T>; 2]; 2],
    co: [[T; 2]; 2],
    cross: [[T; 2]; 2],
}

impl<T: Real> CouplingMatrix<T> {
    /// Coupling for given leakage phases (radians), one per port group.
    pub fn with_phases(spec: &PolarizationSpec<T>, phases: [T; 2]) -> Self {
        let lambda = spec.leakage_fraction();
        let (co_amp, x_amp) = ((T::one() - lambda).sqrt(), lambda.sqrt());
        let zero = Complex::new(T::zero(), T::zero());
        let mut m = [[zero; 2]; 2];
        let mut co = [[T::zero(); 2]; 2];
        let mut cross = [[T::zero(); 2]; 2];
        for r in 0..2 {
            let theta = spec.rx_slant_deg + T::lit(90.0) * T::from_count(r);
            for p in 0..2 {
                let delta = (spec.tx_slants_deg[p] - theta).to_radians();
                let g_co = co_amp * delta.cos();
                let g_x = x_amp * delta.sin();
                m[r][p] = Complex::new(g_co, T::zero()) - Complex::from_polar(g_x, phases[p]);
                co[r][p] = g_co * g_co;
                cross[r][p] = g_x * g_x;
            }
        }
        CouplingMatrix { m, co, cross }
    }

    /// Row seen by the single-polarized UE antenna.
    pub fn rx_row(&self) -> [Complex<T>; 2] {
        self.m[0]
    }

    /// Co-polar part of entry `(r, p)`, as power.
    pub fn co_polar_power(&self, r: usize, p: usize) -> T {
        self.co[r][p]
    }

    /// Cross-polar (leakage) part of entry `(r, p)`, as power.
    pub fn cross_polar_power(&self, r: usize, p: usize) -> T {
        self.cross[r][p]
    }

    /// Power port group `p` delivers into both receive planes.
    pub fn column_power(&self, p: usize) -> T {
        self.m[0][p].norm_sqr() + self.m[1][p].norm_sqr()
    }
}

/// Draw uniform leakage phases and build the coupling matrix.
pub fn polarization_coupling<T: Real, R: Rng + ?Sized>(
    spec: &PolarizationSpec<T>,
    rng: &mut R,
) -> Result<CouplingMatrix<T>> {
    spec.validate()?;
    let two_pi = T::TAU();
    let phases = [
        T::lit(rng.gen::<f64>()) * two_pi,
        T::lit(rng.gen::<f64>()) * two_pi,
    ];
    Ok(CouplingMatrix::with_phases(spec, phases))
}
