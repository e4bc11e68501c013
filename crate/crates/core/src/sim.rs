//! The simulation engine: one run per scenario, sweeps across scenarios, and
//! CSV output.
//!
//! A run builds the layout, drops and attaches UEs, then steps TTIs in a
//! fixed order: channel update, link adaptation (reports from channel state
//! `feedback_delay_tti` old), scheduling on the reports, transmission over the
//! current channel against the precoders every interfering cell actually
//! uses, average-throughput update, and ledger accrual.
//!
//! Every random quantity is drawn from a stream keyed by (seed, purpose,
//! index, index) and the number of draws never depends on velocity or
//! polarization, so runs that differ only in those share their randomness.

use std::collections::VecDeque;
use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write as _};
use std::path::{Path, PathBuf};

use log::{debug, info, warn};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::antenna::{AntennaConfig, PolarizationSpec};
use crate::channel::{
    depolarization_coherence, doppler_frequency, draw_large_scale, ici_fraction, pathloss_uma,
    FadingDims, LargeScaleState, LinkChannel, LinkSnapshot,
};
use crate::config::{Polarization, ScenarioConfig, SchedulerKind};
use crate::deployment::{
    assign_serving_cell, build_hex_layout, drop_ues, step_mobility, SiteLayout, UeState, UeTemplate,
};
use crate::error::{Result, SimError};
use crate::kpi::{KpiRecord, ThroughputLedger};
use crate::linalg::CMat;
use crate::link::{
    build_codebook, compute_sinr, noise_power_dbm, select_precoder_wideband,
    sinr_diagonal_interference, sinr_to_rate, Codebook, Interferer, PrecoderChoice, RateMapping,
};
use crate::num::{db_to_lin, dbm_to_watt};
use crate::scheduler::{schedule, update_average_throughput, Allocation, RbGrid, SchedulerState};

const STREAM_DROP: u64 = 1;
const STREAM_LARGE_SCALE: u64 = 2;
const STREAM_FADING: u64 = 3;

/// Independent generator for one purpose and index pair of a run.
pub fn stream_rng(seed: u64, purpose: u64, a: u64, b: u64) -> ChaCha8Rng {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
    let key = mix(mix(mix(mix(seed) ^ purpose) ^ a) ^ b);
    ChaCha8Rng::seed_from_u64(key)
}

/// A link the receiver resolves as a MIMO channel.
#[derive(Debug, Clone)]
struct TrackedLink {
    cell: usize,
    channel: LinkChannel<f64>,
    /// Snapshots from oldest (the reported one) to current.
    history: VecDeque<LinkSnapshot<f64>>,
}

#[derive(Debug, Clone)]
struct UeLinks {
    /// `tracked[0]` is the serving link.
    tracked: Vec<TrackedLink>,
    /// Per-RB, per-antenna power of all links folded into noise, W.
    folded_power: f64,
}

/// What a UE reported for the current TTI.
#[derive(Debug, Clone)]
struct Report {
    choice: PrecoderChoice,
    rates: Vec<f64>,
}

/// One simulation in progress.
#[derive(Debug)]
pub struct SimulationRun {
    config: ScenarioConfig,
    layout: SiteLayout,
    antenna: AntennaConfig<f64>,
    ues: Vec<UeState>,
    links: Vec<UeLinks>,
    /// UE ids attached to each cell, ascending.
    attached: Vec<Vec<usize>>,
    states: Vec<Option<SchedulerState<f64>>>,
    grid: RbGrid<f64>,
    codebook: Codebook<f64>,
    mapping: RateMapping<f64>,
    /// Counted UE ids and their ledger slot.
    counted: Vec<usize>,
    ledger_slot: Vec<Option<usize>>,
    ledger: ThroughputLedger<f64>,
    noise_per_rb: f64,
    power_per_rb: f64,
    ici: f64,
    tti_clock: usize,
    granted_total: f64,
}

/// Trace sinks of one run.
#[derive(Debug)]
pub struct TraceWriter {
    allocation: BufWriter<File>,
    channel: BufWriter<File>,
    paths: (PathBuf, PathBuf),
}

impl TraceWriter {
    /// Open `<prefix>_allocation.csv` and `<prefix>_channel.csv` in `dir`.
    pub fn create(dir: &Path, prefix: &str) -> Result<Self> {
        std::fs::create_dir_all(dir).map_err(|e| SimError::io(dir, e))?;
        let a = dir.join(format!("{prefix}_allocation.csv"));
        let c = dir.join(format!("{prefix}_channel.csv"));
        let open = |p: &PathBuf| {
            File::create(p)
                .map(BufWriter::new)
                .map_err(|e| SimError::io(p.clone(), e))
        };
        let mut w = TraceWriter {
            allocation: open(&a)?,
            channel: open(&c)?,
            paths: (a, c),
        };
        w.allocation
            .write_all(b"tti,cell_id,rb,ue_id,bits\n")
            .map_err(|e| SimError::io(w.paths.0.clone(), e))?;
        w.channel
            .write_all(b"tti,ue_id,rb,frobenius_norm\n")
            .map_err(|e| SimError::io(w.paths.1.clone(), e))?;
        Ok(w)
    }

    fn finish(mut self) -> Result<()> {
        self.allocation
            .flush()
            .map_err(|e| SimError::io(self.paths.0.clone(), e))?;
        self.channel
            .flush()
            .map_err(|e| SimError::io(self.paths.1.clone(), e))
    }
}

fn geometry(
    layout: &SiteLayout,
    cfg: &ScenarioConfig,
    cell: usize,
    ue: &UeState,
) -> (f64, f64, f64) {
    let sector = &layout.sectors[cell];
    let site = &layout.sites[sector.site_id];
    let (dx, dy) = (ue.x - site.x, ue.y - site.y);
    let d2d = dx.hypot(dy);
    let az = dy.atan2(dx).to_degrees() - sector.boresight_deg;
    let el = -(cfg.bs_height - ue.height).atan2(d2d).to_degrees();
    (d2d, az, el)
}

impl SimulationRun {
    /// Build the network and attach UEs. No TTI has run yet.
    pub fn new(config: ScenarioConfig) -> Result<Self> {
        config.validate()?;
        let cfg = &config;
        let layout = build_hex_layout(
            cfg.n_site_rings,
            cfg.inter_site_distance,
            cfg.azimuth_offset_deg,
        )?;
        let antenna = AntennaConfig::from_scenario(cfg);
        let template = UeTemplate {
            height: cfg.ue_height,
            velocity_kmph: cfg.ue_velocity,
            rx_polarization: cfg.ue_polarization,
            min_distance: cfg.min_ue_distance,
        };
        let mut ues = drop_ues(
            &layout,
            cfg.ues_per_sector,
            &template,
            &mut stream_rng(cfg.seed, STREAM_DROP, 0, 0),
        )?;

        let grid = RbGrid::from_scenario(cfg)?;
        let n_cells = layout.n_cells();
        let tx_dbm = 10.0 * (cfg.bs_tx_power * 1e3).log10();
        let power_per_rb = cfg.bs_tx_power / grid.n_rb as f64;
        let noise_per_rb = dbm_to_watt(noise_power_dbm(cfg.rb_bandwidth, cfg.noise_figure));
        let f_d = doppler_frequency(cfg.ue_velocity, cfg.carrier_frequency);
        let pol = PolarizationSpec::from_scenario(cfg);
        pol.validate()?;
        let coherence = depolarization_coherence(f_d, cfg.tti_duration, &pol);
        let dims = FadingDims {
            n_rx: cfg.n_rx,
            n_tx: cfg.n_tx,
            n_rb: grid.n_rb,
            coherence_rbs: cfg.coherence_bandwidth_rbs,
        };
        // Mean of |coupling|² over port groups, for links folded into noise.
        let mean_coupling = 0.5;

        let mut links = Vec::with_capacity(ues.len());
        for ue in ues.iter_mut() {
            let mut states: Vec<LargeScaleState<f64>> = Vec::with_capacity(n_cells);
            let mut site_draw: Vec<Option<(bool, f64)>> = vec![None; layout.sites.len()];
            for cell in 0..n_cells {
                let site = layout.sectors[cell].site_id;
                let (d2d, az, el) = geometry(&layout, cfg, cell, ue);
                let gain = antenna.gain_toward(az, el);
                // LOS state and shadowing belong to the (site, UE) pair.
                let (los, shadow) = match site_draw[site] {
                    Some(v) => v,
                    None => {
                        let mut rng =
                            stream_rng(cfg.seed, STREAM_LARGE_SCALE, site as u64, ue.ue_id as u64);
                        let ls = draw_large_scale(
                            d2d.max(10.0),
                            cfg.carrier_frequency,
                            cfg.bs_height,
                            cfg.ue_height,
                            gain,
                            cfg.shadowing_std_los_db,
                            cfg.shadowing_std_nlos_db,
                            &mut rng,
                        )?;
                        site_draw[site] = Some((ls.los, ls.shadowing_db));
                        (ls.los, ls.shadowing_db)
                    }
                };
                let pathloss_db = pathloss_uma(
                    d2d.max(10.0),
                    cfg.carrier_frequency,
                    cfg.bs_height,
                    cfg.ue_height,
                    los,
                )?;
                states.push(LargeScaleState {
                    pathloss_db,
                    los,
                    shadowing_db: shadow,
                    antenna_gain_db: gain,
                });
            }
            let rx_dbm: Vec<f64> = states.iter().map(|s| tx_dbm + s.gain_db()).collect();
            ue.serving_cell = assign_serving_cell(&rx_dbm)?;
            let strongest = rx_dbm.iter().cloned().fold(f64::NEG_INFINITY, f64::max);

            let mut order: Vec<usize> = vec![ue.serving_cell];
            order.extend((0..n_cells).filter(|&c| c != ue.serving_cell));
            let mut tracked = Vec::new();
            let mut folded_power = 0.0;
            for cell in order {
                let ls = states[cell];
                if cell == ue.serving_cell || rx_dbm[cell] >= strongest - cfg.interferer_cutoff_db {
                    let mut rng = stream_rng(cfg.seed, STREAM_FADING, cell as u64, ue.ue_id as u64);
                    let channel = LinkChannel::with_coherence(
                        ls,
                        dims,
                        f_d,
                        cfg.tti_duration,
                        cfg.rician_k_db,
                        &pol,
                        coherence,
                        &mut rng,
                    );
                    tracked.push(TrackedLink {
                        cell,
                        channel,
                        history: VecDeque::new(),
                    });
                } else {
                    folded_power += power_per_rb * db_to_lin(ls.gain_db()) * mean_coupling;
                }
            }
            links.push(UeLinks {
                tracked,
                folded_power,
            });
        }

        let mut attached = vec![Vec::new(); n_cells];
        for ue in &ues {
            attached[ue.serving_cell].push(ue.ue_id);
        }
        let initial = cfg.pf_initial_throughput_bits();
        let states = attached
            .iter()
            .map(|ids| {
                if ids.is_empty() {
                    Ok(None)
                } else {
                    SchedulerState::new(
                        ids.clone(),
                        initial,
                        cfg.scheduler,
                        cfg.pf_time_constant_tc,
                    )
                    .map(Some)
                }
            })
            .collect::<Result<Vec<_>>>()?;

        let counted: Vec<usize> = ues
            .iter()
            .filter(|u| cfg.kpi_all_cells || layout.sectors[u.serving_cell].site_id == 0)
            .map(|u| u.ue_id)
            .collect();
        if counted.is_empty() {
            return Err(SimError::NoUsers("no UE is served by the centre site"));
        }
        let mut ledger_slot = vec![None; ues.len()];
        for (slot, &id) in counted.iter().enumerate() {
            ledger_slot[id] = Some(slot);
        }
        let ledger = ThroughputLedger::new(
            counted.len(),
            cfg.n_tti as f64 * cfg.tti_duration,
            cfg.bandwidth,
        )?;
        let n_links: usize = links.iter().map(|l| l.tracked.len()).sum();
        debug!(
            "{} cells, {} UEs, {} tracked links, {} counted UEs, f_d {:.1} Hz",
            n_cells,
            ues.len(),
            n_links,
            counted.len(),
            f_d
        );

        Ok(SimulationRun {
            codebook: build_codebook(cfg.n_tx)?,
            mapping: RateMapping {
                efficiency: cfg.rate_efficiency,
                se_cap: cfg.se_cap,
            },
            ici: ici_fraction(f_d, cfg.subcarrier_spacing),
            config,
            layout,
            antenna,
            ues,
            links,
            attached,
            states,
            grid,
            counted,
            ledger_slot,
            ledger,
            noise_per_rb,
            power_per_rb,
            tti_clock: 0,
            granted_total: 0.0,
        })
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.config
    }

    pub fn layout(&self) -> &SiteLayout {
        &self.layout
    }

    pub fn ues(&self) -> &[UeState] {
        &self.ues
    }

    pub fn ledger(&self) -> &ThroughputLedger<f64> {
        &self.ledger
    }

    /// UE ids whose throughput enters the KPIs.
    pub fn counted_ues(&self) -> &[usize] {
        &self.counted
    }

    /// UE ids attached to `cell`.
    pub fn attached(&self, cell: usize) -> &[usize] {
        &self.attached[cell]
    }

    pub fn tti_clock(&self) -> usize {
        self.tti_clock
    }

    pub fn is_finished(&self) -> bool {
        self.tti_clock >= self.config.n_tti
    }

    /// Bits granted to counted UEs so far, summed over every allocation.
    pub fn granted_bits(&self) -> f64 {
        self.granted_total
    }

    /// Mean number of MIMO-resolved links per UE.
    pub fn tracked_links_per_ue(&self) -> f64 {
        self.links.iter().map(|l| l.tracked.len()).sum::<usize>() as f64 / self.links.len() as f64
    }

    fn update_channels(&mut self) -> Result<()> {
        let cfg = &self.config;
        let t = self.tti_clock;
        let keep = cfg.feedback_delay_tti + 1;
        for ue in self.ues.iter_mut() {
            if t > 0 {
                *ue = step_mobility(ue, cfg.tti_duration, cfg.position_update)
                    .map_err(|e| e.at(t, None, Some(ue.ue_id)))?;
            }
        }
        for (ue, links) in self.ues.iter().zip(self.links.iter_mut()) {
            for link in links.tracked.iter_mut() {
                if t > 0 {
                    link.channel.advance();
                    if cfg.position_update {
                        let (d2d, az, el) = geometry(&self.layout, cfg, link.cell, ue);
                        let ls = &mut link.channel.large_scale;
                        ls.pathloss_db = pathloss_uma(
                            d2d.max(10.0),
                            cfg.carrier_frequency,
                            cfg.bs_height,
                            cfg.ue_height,
                            ls.los,
                        )
                        .map_err(|e| e.at(t, Some(link.cell), Some(ue.ue_id)))?;
                        ls.antenna_gain_db = self.antenna.gain_toward(az, el);
                    }
                }
                let snap = if link.history.len() >= keep {
                    let mut old = link.history.pop_front().expect("history is non-empty");
                    link.channel.snapshot_into(&mut old);
                    old
                } else {
                    link.channel.snapshot()
                };
                link.history.push_back(snap);
            }
        }
        Ok(())
    }

    /// Noise plus interference per receive antenna, flattened RB-major:
    /// thermal noise, folded links, tracked interferers at full power, and
    /// the serving link's own Doppler spread across subcarriers plus its
    /// depolarized power that does not stay coherent over the TTI.
    fn noise_plus_interference(&self, links: &UeLinks, serving: &LinkSnapshot<f64>) -> Vec<f64> {
        let n_rx = self.config.n_rx;
        let p = self.power_per_rb / self.config.n_tx as f64;
        let mut npi = vec![self.noise_per_rb + links.folded_power; self.grid.n_rb * n_rx];
        let mut add = |h: &[CMat<f64>], scale: f64| {
            for (rb, m) in h.iter().enumerate() {
                for rx in 0..n_rx {
                    let pw: f64 = (0..m.cols()).map(|c| m[(rx, c)].norm_sqr()).sum();
                    npi[rb * n_rx + rx] += scale * pw;
                }
            }
        };
        add(&serving.h, self.ici * p);
        if let Some(inc) = &serving.h_incoherent {
            add(inc, p);
        }
        for link in &links.tracked[1..] {
            add(
                &link
                    .history
                    .front()
                    .expect("history filled by update_channels")
                    .h,
                p,
            );
        }
        npi
    }

    /// Serving-link self-interference on one RB, summed over receive antennas.
    fn self_interference_total(&self, serving: &LinkSnapshot<f64>, rb: usize) -> f64 {
        let p = self.power_per_rb / self.config.n_tx as f64;
        let inc = serving
            .h_incoherent
            .as_ref()
            .map_or(0.0, |inc| inc[rb].frobenius_sqr());
        p * (self.ici * serving.h[rb].frobenius_sqr() + inc)
    }

    fn report(&self, ue: usize) -> Result<Report> {
        let cfg = &self.config;
        let links = &self.links[ue];
        let n_rx = cfg.n_rx;
        let serving = links.tracked[0]
            .history
            .front()
            .expect("history filled by update_channels");
        let npi = self.noise_plus_interference(links, serving);
        let at = |rb: usize| &npi[rb * n_rx..(rb + 1) * n_rx];
        let step = cfg.coherence_bandwidth_rbs.max(1);
        let sub: Vec<usize> = (0..self.grid.n_rb).step_by(step).collect();
        let hs: Vec<&CMat<f64>> = sub.iter().map(|&rb| &serving.h[rb]).collect();
        let ns: Vec<&[f64]> = sub.iter().map(|&rb| at(rb)).collect();
        let choice = select_precoder_wideband(&hs, &self.codebook, &ns, self.power_per_rb)?;
        let p = self.codebook.precoder(choice.rank, choice.index);
        let rates = (0..self.grid.n_rb)
            .map(|rb| {
                let s = sinr_diagonal_interference(&serving.h[rb], p, self.power_per_rb, at(rb))?;
                Ok(self.layer_bits(&s))
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(Report { choice, rates })
    }

    fn layer_bits(&self, sinrs: &[f64]) -> f64 {
        sinrs
            .iter()
            .map(|s| {
                sinr_to_rate(
                    *s,
                    self.grid.rb_bandwidth,
                    self.config.tti_duration,
                    &self.mapping,
                )
            })
            .sum()
    }

    /// Run one TTI; returns every cell's allocation (`None` for idle cells).
    pub fn step(
        &mut self,
        mut trace: Option<&mut TraceWriter>,
    ) -> Result<Vec<Option<Allocation<f64>>>> {
        if self.is_finished() {
            return Err(SimError::InvalidArgument(
                "simulation already finished".into(),
            ));
        }
        let t = self.tti_clock;
        self.update_channels()?;

        let reports = (0..self.ues.len())
            .map(|k| {
                self.report(k)
                    .map_err(|e| e.at(t, Some(self.ues[k].serving_cell), Some(k)))
            })
            .collect::<Result<Vec<Report>>>()?;

        let kind = self.config.scheduler;
        let mut allocs: Vec<Option<Allocation<f64>>> = Vec::with_capacity(self.attached.len());
        for (cell, ids) in self.attached.iter().enumerate() {
            match self.states[cell].as_mut() {
                Some(state) => {
                    let rates: Vec<Vec<f64>> =
                        ids.iter().map(|&k| reports[k].rates.clone()).collect();
                    let alloc = schedule(kind, ids, &self.grid, &rates, state)
                        .map_err(|e| e.at(t, Some(cell), None))?;
                    allocs.push(Some(alloc));
                }
                None => allocs.push(None),
            }
        }

        // Transmission over the current channel.
        let n_rx = self.config.n_rx as f64;
        let mut delivered: Vec<Vec<f64>> = Vec::with_capacity(allocs.len());
        for (cell, alloc) in allocs.iter().enumerate() {
            let Some(alloc) = alloc else {
                delivered.push(Vec::new());
                continue;
            };
            let mut bits = Vec::with_capacity(self.grid.n_rb);
            for (rb, g) in alloc.grants.iter().enumerate() {
                let k = g.ue_id;
                let links = &self.links[k];
                let serving = links.tracked[0].history.back().expect("history filled");
                let choice = reports[k].choice;
                let p = self.codebook.precoder(choice.rank, choice.index);
                let mut interferers = Vec::with_capacity(links.tracked.len() - 1);
                for link in &links.tracked[1..] {
                    if let Some(other) = &allocs[link.cell] {
                        let owner = other.grants[rb].ue_id;
                        let oc = reports[owner].choice;
                        let snap = link.history.back().expect("history filled");
                        interferers.push(Interferer {
                            h: &snap.h[rb],
                            precoder: self.codebook.precoder(oc.rank, oc.index),
                            power: self.power_per_rb,
                        });
                    }
                }
                let selfi = self.self_interference_total(serving, rb) / n_rx;
                let noise = self.noise_per_rb + links.folded_power + selfi;
                let s = compute_sinr(&serving.h[rb], p, self.power_per_rb, &interferers, noise)
                    .map_err(|e| e.at(t, Some(cell), Some(k)))?;
                // The transport block is sized from the report and cannot carry
                // more than the channel supports.
                bits.push(self.layer_bits(&s).min(reports[k].rates[rb]));
            }
            delivered.push(bits);
        }

        for (cell, alloc) in allocs.iter_mut().enumerate() {
            let Some(alloc) = alloc else { continue };
            let bits = &delivered[cell];
            alloc.regrant(|rb, _| bits[rb]);
            let state = self.states[cell]
                .as_mut()
                .expect("allocated cells have state");
            let granted = alloc.bits_per_ue(state.ue_ids());
            let t_c = state.t_c;
            update_average_throughput(state, &granted, t_c)
                .map_err(|e| e.at(t, Some(cell), None))?;
            for (rb, g) in alloc.grants.iter().enumerate() {
                if let Some(slot) = self.ledger_slot[g.ue_id] {
                    self.ledger
                        .credit(slot, g.bits)
                        .map_err(|e| e.at(t, Some(cell), Some(g.ue_id)))?;
                    self.granted_total += g.bits;
                }
                if let Some(tr) = trace.as_deref_mut() {
                    writeln!(tr.allocation, "{t},{cell},{rb},{},{}", g.ue_id, g.bits)
                        .map_err(|e| SimError::io(tr.paths.0.clone(), e))?;
                }
            }
        }
        if let Some(tr) = trace {
            for (k, links) in self.links.iter().enumerate() {
                let snap = links.tracked[0].history.back().expect("history filled");
                for (rb, h) in snap.h.iter().enumerate() {
                    writeln!(tr.channel, "{t},{k},{rb},{:e}", h.frobenius_sqr().sqrt())
                        .map_err(|e| SimError::io(tr.paths.1.clone(), e))?;
                }
            }
        }
        self.tti_clock += 1;
        Ok(allocs)
    }

    /// KPIs of the finished run.
    pub fn finish(&self) -> Result<KpiRecord<f64>> {
        if !self.is_finished() {
            return Err(SimError::InvalidArgument(format!(
                "run stopped at tti {} of {}",
                self.tti_clock, self.config.n_tti
            )));
        }
        let cfg = &self.config;
        KpiRecord::from_ledger(
            &self.ledger,
            cfg.scheduler,
            cfg.ue_polarization,
            cfg.ue_velocity,
            cfg.seed,
        )
    }
}

/// Run one scenario to completion.
pub fn run_simulation(config: &ScenarioConfig) -> Result<KpiRecord<f64>> {
    run_simulation_traced(config, None)
}

/// File prefix identifying a sweep point in trace output.
pub fn point_label(cfg: &ScenarioConfig) -> String {
    format!(
        "{}_{}_v{}_s{}",
        cfg.scheduler,
        cfg.ue_polarization,
        format_sig6(cfg.ue_velocity),
        cfg.seed
    )
}

/// Run one scenario, writing allocation, channel and layout traces into
/// `trace_dir` when given.
pub fn run_simulation_traced(
    config: &ScenarioConfig,
    trace_dir: Option<&Path>,
) -> Result<KpiRecord<f64>> {
    run_point(config, trace_dir, true)
}

fn run_point(
    config: &ScenarioConfig,
    trace_dir: Option<&Path>,
    write_layout: bool,
) -> Result<KpiRecord<f64>> {
    let mut run = SimulationRun::new(config.clone())?;
    let mut trace = match trace_dir {
        Some(dir) => {
            let w = TraceWriter::create(dir, &point_label(config))?;
            if write_layout {
                run.layout().write_csv(dir)?;
            }
            Some(w)
        }
        None => None,
    };
    while !run.is_finished() {
        run.step(trace.as_mut())?;
    }
    if let Some(w) = trace {
        w.finish()?;
    }
    let record = run.finish()?;
    info!("{record}");
    Ok(record)
}

/// The axes of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepAxes {
    pub velocities: Vec<f64>,
    pub polarizations: Vec<Polarization>,
    pub schedulers: Vec<SchedulerKind>,
    pub seeds: Vec<u64>,
}

impl Default for SweepAxes {
    fn default() -> Self {
        SweepAxes {
            velocities: (0..=6).map(|i| 20.0 * i as f64).collect(),
            polarizations: vec![Polarization::Lpol, Polarization::Xpol],
            schedulers: vec![SchedulerKind::Rr, SchedulerKind::Pf],
            seeds: (1..=5).collect(),
        }
    }
}

/// A sweep point that failed.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepFailure {
    pub scheduler: SchedulerKind,
    pub rx_polarization: Polarization,
    pub velocity_kmph: f64,
    pub seed: u64,
    pub error: String,
}

/// Provenance of a results table.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultsMetadata {
    pub tool: String,
    pub version: String,
    /// SHA-256 of the base scenario in canonical text form.
    pub config_sha256: String,
    pub aggregation: String,
}

impl ResultsMetadata {
    pub fn for_config(base: &ScenarioConfig) -> Self {
        let digest = Sha256::digest(base.to_scenario_text().as_bytes());
        ResultsMetadata {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config_sha256: digest.iter().fold(String::with_capacity(64), |mut s, b| {
                let _ = write!(s, "{b:02x}");
                s
            }),
            aggregation:
                "one row per (sweep point, seed); trend statements use the mean over seeds, \
                          the number of drops behind the reference figures being unknown"
                    .to_string(),
        }
    }
}

/// KPI records of a sweep, sorted by scheduler, polarization, velocity, seed.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultsTable {
    pub records: Vec<KpiRecord<f64>>,
    pub failures: Vec<SweepFailure>,
    pub metadata: ResultsMetadata,
}

impl ResultsTable {
    pub fn new(base: &ScenarioConfig) -> Self {
        ResultsTable {
            records: Vec::new(),
            failures: Vec::new(),
            metadata: ResultsMetadata::for_config(base),
        }
    }

    pub fn is_complete(&self) -> bool {
        self.failures.is_empty()
    }

    /// Records of one (scheduler, polarization, velocity) point, any seed.
    pub fn point(
        &self,
        scheduler: SchedulerKind,
        pol: Polarization,
        velocity: f64,
    ) -> Vec<&KpiRecord<f64>> {
        self.records
            .iter()
            .filter(|r| {
                r.scheduler == scheduler && r.rx_polarization == pol && r.velocity_kmph == velocity
            })
            .collect()
    }

    /// Seed means of (avg throughput, spectral efficiency, fairness) at one point.
    pub fn seed_mean(
        &self,
        scheduler: SchedulerKind,
        pol: Polarization,
        velocity: f64,
    ) -> Option<(f64, f64, f64)> {
        let rows = self.point(scheduler, pol, velocity);
        if rows.is_empty() {
            return None;
        }
        let n = rows.len() as f64;
        let sum = rows.iter().fold((0.0, 0.0, 0.0), |a, r| {
            (
                a.0 + r.avg_ue_throughput,
                a.1 + r.spectral_efficiency,
                a.2 + r.fairness_index,
            )
        });
        Some((sum.0 / n, sum.1 / n, sum.2 / n))
    }

    fn sort(&mut self) {
        self.records.sort_by(|a, b| {
            (a.scheduler, a.rx_polarization)
                .cmp(&(b.scheduler, b.rx_polarization))
                .then(a.velocity_kmph.total_cmp(&b.velocity_kmph))
                .then(a.seed.cmp(&b.seed))
        });
        self.failures.sort_by(|a, b| {
            (a.scheduler, a.rx_polarization)
                .cmp(&(b.scheduler, b.rx_polarization))
                .then(a.velocity_kmph.total_cmp(&b.velocity_kmph))
                .then(a.seed.cmp(&b.seed))
        });
    }
}

/// Run every point of `axes` over `base` on `parallelism` worker threads.
/// Failed points are listed in the table rather than aborting the sweep;
/// only an invalid sweep definition is an error.
pub fn run_sweep(
    base: &ScenarioConfig,
    axes: &SweepAxes,
    parallelism: usize,
) -> Result<ResultsTable> {
    run_sweep_traced(base, axes, parallelism, None)
}

/// [`run_sweep`] with optional per-point traces.
pub fn run_sweep_traced(
    base: &ScenarioConfig,
    axes: &SweepAxes,
    parallelism: usize,
    trace_dir: Option<&Path>,
) -> Result<ResultsTable> {
    if parallelism == 0 {
        return Err(SimError::InvalidArgument("parallelism must be >= 1".into()));
    }
    let points = crate::config::expand_sweep(
        base,
        &axes.velocities,
        &axes.polarizations,
        &axes.schedulers,
        &axes.seeds,
    )?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism)
        .build()
        .map_err(|e| SimError::InvalidArgument(format!("thread pool: {e}")))?;
    info!(
        "sweep of {} points on {} workers",
        points.len(),
        parallelism
    );
    // Every point shares the site layout, so it is written once up front.
    if let Some(dir) = trace_dir {
        std::fs::create_dir_all(dir).map_err(|e| SimError::io(dir, e))?;
        build_hex_layout(
            base.n_site_rings,
            base.inter_site_distance,
            base.azimuth_offset_deg,
        )?
        .write_csv(dir)?;
    }
    let outcomes: Vec<(ScenarioConfig, Result<KpiRecord<f64>>)> = pool.install(|| {
        points
            .into_par_iter()
            .map(|cfg| {
                let r = run_point(&cfg, trace_dir, false);
                (cfg, r)
            })
            .collect()
    });
    let mut table = ResultsTable::new(base);
    for (cfg, outcome) in outcomes {
        match outcome {
            Ok(rec) => table.records.push(rec),
            Err(e) => {
                warn!("{} failed: {e}", point_label(&cfg));
                table.failures.push(SweepFailure {
                    scheduler: cfg.scheduler,
                    rx_polarization: cfg.ue_polarization,
                    velocity_kmph: cfg.ue_velocity,
                    seed: cfg.seed,
                    error: e.to_string(),
                });
            }
        }
    }
    table.sort();
    Ok(table)
}

/// Format with six significant digits, without exponent and trailing zeros.
pub fn format_sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x.is_finite() {
            "0".into()
        } else {
            format!("{x}")
        };
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (5 - magnitude).max(0) as usize;
    let scale = 10f64.powi(magnitude - 5);
    let rounded = if magnitude > 5 {
        (x / scale).round() * scale
    } else {
        x
    };
    let mut s = format!("{rounded:.decimals$}");
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    if s == "-0" {
        s = "0".into();
    }
    s
}

/// Header of the results CSV.
pub const CSV_HEADER: &str = "scheduler,rx_polarization,velocity_kmph,seed,avg_ue_throughput_mbps,spectral_efficiency_bps_hz,fairness_index";

/// The results CSV as a string.
pub fn csv_string(table: &ResultsTable) -> String {
    let mut out = String::with_capacity(64 * (table.records.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in &table.records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.scheduler,
            r.rx_polarization,
            format_sig6(r.velocity_kmph),
            r.seed,
            format_sig6(r.avg_ue_throughput / 1e6),
            format_sig6(r.spectral_efficiency),
            format_sig6(r.fairness_index)
        );
    }
    out
}

/// Write the results CSV.
pub fn emit_csv(table: &ResultsTable, path: &Path) -> Result<()> {
    std::fs::write(path, csv_string(table)).map_err(|e| SimError::io(path, e))
}

/// Metadata and failures as pretty-printed JSON.
pub fn metadata_json(table: &ResultsTable) -> String {
    let failures: Vec<serde_json::Value> = table
        .failures
        .iter()
        .map(|f| {
            serde_json::json!({
                "scheduler": f.scheduler.to_string(),
                "rx_polarization": f.rx_polarization.to_string(),
                "velocity_kmph": f.velocity_kmph,
                "seed": f.seed,
                "error": f.error,
            })
        })
        .collect();
    let m = &table.metadata;
    let v = serde_json::json!({
        "tool": m.tool,
        "version": m.version,
        "config_sha256": m.config_sha256,
        "aggregation": m.aggregation,
        "records": table.records.len(),
        "failures": failures,
    });
    let mut s = serde_json::to_string_pretty(&v).expect("JSON values serialize");
    s.push('\n');
    s
}

/// Write the metadata sidecar next to a results file: `<path>.meta.json`.
pub fn emit_metadata(table: &ResultsTable, results_path: &Path) -> Result<PathBuf> {
    let mut name = results_path.as_os_str().to_owned();
    name.push(".meta.json");
    let path = PathBuf::from(name);
    std::fs::write(&path, metadata_json(table)).map_err(|e| SimError::io(&path, e))?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Preset;

    fn tiny() -> ScenarioConfig {
        let mut cfg = ScenarioConfig::preset(Preset::Small);
        cfg.n_site_rings = 0;
        cfg.ues_per_sector = 1;
        cfg.n_tti = 1;
        cfg
    }

    #[test]
    fn sig6_formatting() {
        assert_eq!(format_sig6(0.0), "0");
        assert_eq!(format_sig6(120.0), "120");
        assert_eq!(format_sig6(23.456789), "23.4568");
        assert_eq!(format_sig6(0.857142857), "0.857143");
        assert_eq!(format_sig6(1234567.0), "1234570");
        assert_eq!(format_sig6(-0.000012345678), "-0.0000123457");
        assert_eq!(format_sig6(1.0), "1");
    }

    #[test]
    fn streams_are_distinct_and_reproducible() {
        use rand::Rng;
        let a: u64 = stream_rng(1, 2, 3, 4).gen();
        let b: u64 = stream_rng(1, 2, 3, 4).gen();
        let c: u64 = stream_rng(1, 2, 4, 3).gen();
        let d: u64 = stream_rng(2, 2, 3, 4).gen();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, d);
    }

    #[test]
    fn smoke_single_tti() {
        let rec = run_simulation(&tiny()).unwrap();
        assert!(rec.avg_ue_throughput > 0.0);
        assert!(rec.fairness_index > 0.0 && rec.fairness_index <= 1.0);
        assert_eq!(rec.n_ues, 3);
    }

    #[test]
    fn deterministic_record() {
        let mut cfg = tiny();
        cfg.n_tti = 5;
        cfg.ue_velocity = 60.0;
        assert_eq!(run_simulation(&cfg).unwrap(), run_simulation(&cfg).unwrap());
    }

    #[test]
    fn ledger_matches_grants() {
        let mut cfg = tiny();
        cfg.n_tti = 4;
        cfg.ues_per_sector = 3;
        let mut run = SimulationRun::new(cfg).unwrap();
        let mut sum = 0.0;
        while !run.is_finished() {
            let allocs = run.step(None).unwrap();
            for a in allocs.iter().flatten() {
                assert_eq!(a.n_rb(), 50);
                sum += a
                    .grants
                    .iter()
                    .filter(|g| run.counted_ues().contains(&g.ue_id))
                    .map(|g| g.bits)
                    .sum::<f64>();
            }
        }
        assert!((run.ledger().total_bits() - sum).abs() <= 1e-9 * sum);
        assert!((run.granted_bits() - sum).abs() <= 1e-9 * sum);
        assert!(run.step(None).is_err());
    }

    #[test]
    fn unfinished_run_has_no_kpis() {
        let run = SimulationRun::new(tiny()).unwrap();
        assert!(run.finish().is_err());
    }

    #[test]
    fn csv_shapes() {
        let mut table = ResultsTable::new(&tiny());
        assert_eq!(csv_string(&table), format!("{CSV_HEADER}\n"));
        table.records.push(run_simulation(&tiny()).unwrap());
        let s = csv_string(&table);
        assert_eq!(s.lines().count(), 2);
        assert!(s.ends_with('\n') && !s.contains('\r'));
        assert!(s.lines().nth(1).unwrap().starts_with("RR,LPOL,0,1,"));
    }

    #[test]
    fn metadata_hash_tracks_config() {
        let a = ResultsMetadata::for_config(&tiny());
        let mut other = tiny();
        other.seed = 9;
        let b = ResultsMetadata::for_config(&other);
        assert_eq!(a.config_sha256.len(), 64);
        assert_ne!(a.config_sha256, b.config_sha256);
        assert_eq!(a, ResultsMetadata::for_config(&tiny()));
    }

    #[test]
    fn sweep_rejects_zero_workers_and_empty_axes() {
        assert!(run_sweep(&tiny(), &SweepAxes::default(), 0).is_err());
        let axes = SweepAxes {
            seeds: vec![],
            ..SweepAxes::default()
        };
        assert!(matches!(
            run_sweep(&tiny(), &axes, 1),
            Err(SimError::EmptyAxis("seeds"))
        ));
    }
}
