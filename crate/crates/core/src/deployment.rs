//! Hexagonal tri-sector deployment, UE drops, cell attachment and mobility.
//!
//! Sites sit on a hexagonal lattice whose nearest neighbours lie at azimuths
//! 30° + k·60°, so each site's coverage hexagon has its corners at k·60°.
//! Angles are mathematical: degrees counter-clockwise from the +x axis.

use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;

use crate::config::Polarization;
use crate::error::{Result, SimError};

/// Sector boresights of a site, relative to the global azimuth offset.
pub const SECTOR_OFFSETS_DEG: [f64; 3] = [0.0, 120.0, 240.0];

/// Azimuth half-width of one sector.
const SECTOR_HALF_WIDTH_DEG: f64 = 60.0;

/// Axial lattice steps to the six neighbours, in walk order.
const AXIAL_DIRS: [(i64, i64); 6] = [(1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1)];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Site {
    pub site_id: usize,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sector {
    pub cell_id: usize,
    pub site_id: usize,
    /// Boresight azimuth in [0, 360).
    pub boresight_deg: f64,
}

/// Site and sector geometry of the whole network.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteLayout {
    pub sites: Vec<Site>,
    pub sectors: Vec<Sector>,
    pub inter_site_distance: f64,
}

/// Wrap an angle to [-180, 180).
pub fn wrap_deg(a: f64) -> f64 {
    (a + 180.0).rem_euclid(360.0) - 180.0
}

fn lattice_point(q: i64, r: i64, isd: f64) -> (f64, f64) {
    let (s30, c30) = 30f64.to_radians().sin_cos();
    // a1 = isd·(cos 30°, sin 30°), a2 = isd·(0, 1)
    let x = isd * (q as f64 * c30);
    let y = isd * (q as f64 * s30 + r as f64);
    (x, y)
}

/// Sites of `n_rings` hexagonal rings around a centre site, sectors rotated
/// by `azimuth_offset_deg`. Site ids grow ring by ring.
pub fn build_hex_layout(n_rings: usize, isd: f64, azimuth_offset_deg: f64) -> Result<SiteLayout> {
    if !(isd.is_finite() && isd > 0.0) {
        return Err(SimError::InvalidArgument(format!(
            "inter-site distance must be > 0, got {isd}"
        )));
    }
    let mut axial = vec![(0i64, 0i64)];
    for ring in 1..=n_rings as i64 {
        let (dq, dr) = AXIAL_DIRS[4];
        let (mut q, mut r) = (dq * ring, dr * ring);
        for &(sq, sr) in &AXIAL_DIRS {
            for _ in 0..ring {
                axial.push((q, r));
                q += sq;
                r += sr;
            }
        }
    }
    let sites: Vec<Site> = axial
        .iter()
        .enumerate()
        .map(|(site_id, &(q, r))| {
            let (x, y) = lattice_point(q, r, isd);
            Site { site_id, x, y }
        })
        .collect();
    let sectors = sites
        .iter()
        .flat_map(|site| {
            SECTOR_OFFSETS_DEG
                .iter()
                .enumerate()
                .map(move |(s, off)| Sector {
                    cell_id: site.site_id * 3 + s,
                    site_id: site.site_id,
                    boresight_deg: (azimuth_offset_deg + off).rem_euclid(360.0),
                })
        })
        .collect();
    Ok(SiteLayout {
        sites,
        sectors,
        inter_site_distance: isd,
    })
}

impl SiteLayout {
    pub fn n_cells(&self) -> usize {
        self.sectors.len()
    }

    /// Circumradius of a site's coverage hexagon.
    pub fn hex_radius(&self) -> f64 {
        self.inter_site_distance / 3f64.sqrt()
    }

    /// Whether a point offset `(dx, dy)` from a site lies in that site's hexagon.
    pub fn in_site_hexagon(&self, dx: f64, dy: f64) -> bool {
        let apothem = self.inter_site_distance / 2.0;
        (0..6).all(|k| {
            let (s, c) = (30.0 + 60.0 * k as f64).to_radians().sin_cos();
            dx * c + dy * s <= apothem * (1.0 + 1e-12)
        })
    }

    /// Whether `(x, y)` lies in the given sector's third of its site hexagon.
    pub fn sector_contains(&self, cell_id: usize, x: f64, y: f64) -> bool {
        let sector = &self.sectors[cell_id];
        let site = &self.sites[sector.site_id];
        let (dx, dy) = (x - site.x, y - site.y);
        if !self.in_site_hexagon(dx, dy) {
            return false;
        }
        let az = dy.atan2(dx).to_degrees();
        wrap_deg(az - sector.boresight_deg).abs() <= SECTOR_HALF_WIDTH_DEG
    }

    /// Radius of a disc around the origin containing every site hexagon.
    pub fn bounding_radius(&self) -> f64 {
        let far = self
            .sites
            .iter()
            .map(|s| s.x.hypot(s.y))
            .fold(0.0, f64::max);
        far + self.hex_radius()
    }

    /// CSV of `site_id,x,y`.
    pub fn sites_csv(&self) -> String {
        let mut out = String::from("site_id,x,y\n");
        for s in &self.sites {
            let _ = writeln!(out, "{},{:.3},{:.3}", s.site_id, s.x, s.y);
        }
        out
    }

    /// CSV of `cell_id,site_id,boresight_deg`.
    pub fn sectors_csv(&self) -> String {
        let mut out = String::from("cell_id,site_id,boresight_deg\n");
        for s in &self.sectors {
            let _ = writeln!(out, "{},{},{:.3}", s.cell_id, s.site_id, s.boresight_deg);
        }
        out
    }

    /// Write `sites.csv` and `sectors.csv` into `dir`.
    pub fn write_csv(&self, dir: &Path) -> Result<()> {
        for (name, body) in [
            ("sites.csv", self.sites_csv()),
            ("sectors.csv", self.sectors_csv()),
        ] {
            let path = dir.join(name);
            std::fs::write(&path, body).map_err(|e| SimError::io(path, e))?;
        }
        Ok(())
    }
}

/// Per-UE state. Position in metres, velocity in km/h, heading in degrees.
#[derive(Debug, Clone, PartialEq)]
pub struct UeState {
    pub ue_id: usize,
    pub x: f64,
    pub y: f64,
    pub height: f64,
    pub velocity_kmph: f64,
    pub heading_deg: f64,
    /// Sector the UE was dropped into.
    pub drop_cell: usize,
    /// Serving cell; equals `drop_cell` until attachment runs.
    pub serving_cell: usize,
    pub rx_polarization: Polarization,
}

/// Attributes shared by every dropped UE.
#[derive(Debug, Clone, Copy)]
pub struct UeTemplate {
    pub height: f64,
    pub velocity_kmph: f64,
    pub rx_polarization: Polarization,
    /// No UE is dropped closer than this to its site.
    pub min_distance: f64,
}

/// Drop `ues_per_sector` UEs uniformly into every sector region, away from
/// the site by at least `template.min_distance`. UE ids follow cell order.
pub fn drop_ues<R: Rng + ?Sized>(
    layout: &SiteLayout,
    ues_per_sector: usize,
    template: &UeTemplate,
    rng: &mut R,
) -> Result<Vec<UeState>> {
    if ues_per_sector == 0 {
        return Err(SimError::InvalidArgument(
            "ues_per_sector must be >= 1".into(),
        ));
    }
    let radius = layout.hex_radius();
    let mut ues = Vec::with_capacity(layout.n_cells() * ues_per_sector);
    for sector in &layout.sectors {
        let site = layout.sites[sector.site_id];
        let mut placed = 0;
        while placed < ues_per_sector {
            let dx = rng.gen_range(-radius..radius);
            let dy = rng.gen_range(-radius..radius);
            if dx.hypot(dy) < template.min_distance {
                continue;
            }
            let (x, y) = (site.x + dx, site.y + dy);
            if !layout.sector_contains(sector.cell_id, x, y) {
                continue;
            }
            let heading_deg = rng.gen_range(0.0..360.0);
            ues.push(UeState {
                ue_id: ues.len(),
                x,
                y,
                height: template.height,
                velocity_kmph: template.velocity_kmph,
                heading_deg,
                drop_cell: sector.cell_id,
                serving_cell: sector.cell_id,
                rx_polarization: template.rx_polarization,
            });
            placed += 1;
        }
    }
    Ok(ues)
}

/// Strongest cell by wideband received power; ties go to the lowest id.
pub fn assign_serving_cell(wideband_rx_power_dbm: &[f64]) -> Result<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (cell, &p) in wideband_rx_power_dbm.iter().enumerate() {
        if p.is_nan() {
            continue;
        }
        match best {
            Some((_, bp)) if p <= bp => {}
            _ => best = Some((cell, p)),
        }
    }
    best.map(|(c, _)| c)
        .ok_or(SimError::InvalidArgument("no candidate cells".into()))
}

/// Advance a UE by `dt` seconds. Position moves along the heading only when
/// `position_update` is set; otherwise the state is returned unchanged.
pub fn step_mobility(ue: &UeState, dt: f64, position_update: bool) -> Result<UeState> {
    if !(dt > 0.0) {
        return Err(SimError::InvalidArgument(format!(
            "dt must be > 0, got {dt}"
        )));
    }
    let mut next = ue.clone();
    if position_update && ue.velocity_kmph > 0.0 {
        let dist = ue.velocity_kmph / 3.6 * dt;
        let (s, c) = ue.heading_deg.to_radians().sin_cos();
        next.x += dist * c;
        next.y += dist * s;
    }
    Ok(next)
}
