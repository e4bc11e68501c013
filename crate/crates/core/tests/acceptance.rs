//! Acceptance criteria 1–11, one PASS/FAIL line each.
//!
//! Runs as a plain binary (`harness = false`) so the summary is always
//! printed; the process exits non-zero when any criterion fails. Trend
//! criteria share one sweep on the small preset.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mmwave_sls::channel::{pathloss_uma, FadingDims, FadingGenerator, JakesProcess};
use mmwave_sls::kpi::jain_index;
use mmwave_sls::scheduler::{schedule_rr, update_average_throughput, RbGrid, SchedulerState};
use mmwave_sls::sim::csv_string;
use mmwave_sls::{
    emit_csv, run_sweep, Polarization, Preset, ResultsTable, ScenarioConfig, SchedulerKind,
    SimulationRun, SweepAxes,
};

const SEEDS: [u64; 5] = [1, 2, 3, 4, 5];
const SCHEDULERS: [SchedulerKind; 2] = [SchedulerKind::Rr, SchedulerKind::Pf];
const POLS: [Polarization; 2] = [Polarization::Lpol, Polarization::Xpol];

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// J0 from its power series; independent of the simulator's quadrature.
fn j0_series(x: f64) -> f64 {
    let q = -(x * x) / 4.0;
    let (mut term, mut sum) = (1.0, 1.0);
    for k in 1..300 {
        term *= q / (k * k) as f64;
        sum += term;
        if term.abs() < 1e-17 {
            break;
        }
    }
    sum
}

fn small() -> ScenarioConfig {
    ScenarioConfig::preset(Preset::Small)
}

fn criterion_1() -> Outcome {
    let a = jain_index::<f64>(&[1.0, 2.0, 3.0]).map_err(|e| e.to_string())?;
    let expected = 36.0 / 42.0;
    if (a - 0.857142857).abs() > 1e-9 || (a - expected).abs() > 1e-12 {
        return Err(format!("J([1,2,3]) = {a}"));
    }
    for n in 1..=32 {
        for v in [1e-9, 0.3, 1.0, 7.0, 4.2e8] {
            let eq = jain_index::<f64>(&vec![v; n]).map_err(|e| e.to_string())?;
            if eq != 1.0 {
                return Err(format!("equal vector n={n} v={v} gives {eq}"));
            }
            for winner in [0, n / 2, n - 1] {
                let mut x = vec![0.0; n];
                x[winner] = v;
                let one = jain_index::<f64>(&x).map_err(|e| e.to_string())?;
                if one != 1.0 / n as f64 {
                    return Err(format!("single winner n={n} gives {one}"));
                }
            }
        }
    }
    Ok(format!(
        "J([1,2,3]) = {a:.12}; equal = 1 and single winner = 1/n exactly for n ≤ 32"
    ))
}

fn criterion_2() -> Outcome {
    let mut s =
        SchedulerState::new(vec![0], 4.0, SchedulerKind::Pf, 2.0).map_err(|e| e.to_string())?;
    update_average_throughput(&mut s, &[8.0], 2.0).map_err(|e| e.to_string())?;
    let two = s.avg_throughput()[0];
    let mut s =
        SchedulerState::new(vec![0], 4.0, SchedulerKind::Pf, 1.0).map_err(|e| e.to_string())?;
    update_average_throughput(&mut s, &[8.0], 1.0).map_err(|e| e.to_string())?;
    let one = s.avg_throughput()[0];
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n = rng.gen_range(1..8);
        let t_c = rng.gen_range(1.0..500.0);
        let avg: Vec<f64> = (0..n).map(|_| rng.gen_range(1e-3..1e7)).collect();
        let mut s = SchedulerState::new((0..n).collect(), 1.0, SchedulerKind::Pf, t_c)
            .map_err(|e| e.to_string())?;
        // Bring every UE to its target average, then feed that average back.
        update_average_throughput(&mut s, &avg, 1.0).map_err(|e| e.to_string())?;
        update_average_throughput(&mut s, &avg, t_c).map_err(|e| e.to_string())?;
        for (got, want) in s.avg_throughput().iter().zip(&avg) {
            worst = worst.max((got - want).abs() / want);
        }
    }
    check(
        two == 6.0 && one == 8.0 && worst <= 1e-12,
        format!(
            "t_c=2 → {two}, t_c=1 → {one}, fixed point worst rel. error {worst:.1e} over 100 cases"
        ),
    )
}

fn criterion_3() -> Outcome {
    let grid = RbGrid::new(50, 180e3, 9e6).map_err(|e| e.to_string())?;
    let ues = [10, 11, 12];
    let mut state = SchedulerState::new(ues.to_vec(), 1.0, SchedulerKind::Rr, 1.0)
        .map_err(|e| e.to_string())?;
    let mut counts = [0usize; 3];
    for _ in 0..3 {
        let alloc = schedule_rr(&ues, &grid, &mut state).map_err(|e| e.to_string())?;
        for (c, n) in counts.iter_mut().zip(alloc.rb_counts(&ues)) {
            *c += n;
        }
    }
    if counts != [50, 50, 50] {
        return Err(format!("RR over 3 TTIs gave {counts:?}"));
    }
    let mut ttis = 0;
    for kind in SCHEDULERS {
        for pol in POLS {
            let mut cfg = small().with_polarization(pol);
            cfg.scheduler = kind;
            cfg.ue_velocity = 60.0;
            cfg.n_tti = 10;
            let n_rb = cfg.n_rb();
            let mut run = SimulationRun::new(cfg).map_err(|e| e.to_string())?;
            while !run.is_finished() {
                let allocs = run.step(None).map_err(|e| e.to_string())?;
                for (cell, alloc) in allocs.iter().enumerate() {
                    let Some(alloc) = alloc else { continue };
                    let granted: usize = alloc.rb_counts(run.attached(cell)).iter().sum();
                    if alloc.n_rb() != n_rb || granted != n_rb {
                        return Err(format!(
                            "{kind} {pol} cell {cell}: {granted} of {n_rb} RBs granted"
                        ));
                    }
                }
                ttis += 1;
            }
        }
    }
    Ok(format!(
        "RR 3 UEs × 3 TTIs → {counts:?} RBs; every cell granted all RBs in {ttis} engine TTIs"
    ))
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let tti = 1e-3;
    let n_proc = 20_000;
    let lags = 4;
    let dims = FadingDims {
        n_rx: 1,
        n_tx: 1,
        n_rb: 1,
        coherence_rbs: 1,
    };
    let mut lines = Vec::new();
    let mut ok = true;
    for (i, f_d) in [0.0, 100.0, 1000.0, 3113.0].into_iter().enumerate() {
        let want = j0_series(2.0 * PI * f_d * tti);
        let mut rng = ChaCha8Rng::seed_from_u64(40 + i as u64);
        // Ensemble of independent link fading processes and of standalone
        // Jakes processes.
        let (mut num_f, mut den_f, mut num_j, mut den_j) = (0.0, 0.0, 0.0, 0.0);
        let (mut p_f, mut p_j) = (0.0, 0.0);
        for k in 0..n_proc {
            let mut gen = FadingGenerator::<f64>::new(dims, f_d, tti, None, &mut rng);
            let mut jp = JakesProcess::<f64>::new(f_d, tti, &mut rng);
            let mut prev_f = gen.snapshot()[0][(0, 0)];
            let mut prev_j = jp.value();
            if k < 10_000 {
                p_f += prev_f.norm_sqr();
                p_j += prev_j.norm_sqr();
            }
            for _ in 0..lags {
                gen.advance();
                jp.advance();
                let cur_f = gen.snapshot()[0][(0, 0)];
                let cur_j = jp.value();
                num_f += (cur_f * prev_f.conj()).re;
                den_f += prev_f.norm_sqr();
                num_j += (cur_j * prev_j.conj()).re;
                den_j += prev_j.norm_sqr();
                prev_f = cur_f;
                prev_j = cur_j;
            }
        }
        let (rho_f, rho_j) = (num_f / den_f, num_j / den_j);
        let (p_f, p_j) = (p_f / 10_000.0, p_j / 10_000.0);
        ok &= (rho_f - want).abs() <= 0.03 && (rho_j - want).abs() <= 0.03;
        ok &= (p_f - 1.0).abs() <= 0.05 && (p_j - 1.0).abs() <= 0.05;
        lines.push(format!(
            "f_d={f_d}: J0={want:.3} link {rho_f:.3} jakes {rho_j:.3}, power {p_f:.3}/{p_j:.3}"
        ));
    }
    let secs = start.elapsed().as_secs_f64();
    ok &= secs < 10.0;
    check(ok, format!("{}; {secs:.1} s", lines.join("; ")))
}

fn criterion_5() -> Outcome {
    let cfg = ScenarioConfig::default();
    let (h_bs, h_ut) = (cfg.bs_height, cfg.ue_height);
    let d2d = (100.0f64.powi(2) - (h_bs - h_ut).powi(2)).sqrt();
    let pl = pathloss_uma(d2d, 28e9, h_bs, h_ut, true).map_err(|e| e.to_string())?;
    let oracle = 28.0 + 22.0 * 100.0f64.log10() + 20.0 * 28.0f64.log10();
    if (pl - 100.94).abs() > 0.01 || (pl - oracle).abs() > 1e-9 {
        return Err(format!(
            "LOS at 100 m: {pl:.4} dB, closed form {oracle:.4} dB"
        ));
    }
    let grid: Vec<f64> = (0..=990).map(|i| 10.0 + i as f64).collect();
    for los in [true, false] {
        let mut prev = f64::NEG_INFINITY;
        for &d in &grid {
            let v = pathloss_uma(d, 28e9, h_bs, h_ut, los).map_err(|e| e.to_string())?;
            if v <= prev {
                return Err(format!(
                    "{} pathloss not increasing at {d} m",
                    if los { "LOS" } else { "NLOS" }
                ));
            }
            prev = v;
        }
    }
    Ok(format!(
        "LOS 100 m = {pl:.4} dB (closed form {oracle:.4}); LOS and NLOS increasing on 10–1000 m"
    ))
}

/// The shared trend sweep: every (scheduler, polarization) at 0 and 120 km/h.
fn trend_sweep() -> (Result<ResultsTable, String>, f64) {
    let start = Instant::now();
    let axes = SweepAxes {
        velocities: vec![0.0, 120.0],
        polarizations: POLS.to_vec(),
        schedulers: SCHEDULERS.to_vec(),
        seeds: SEEDS.to_vec(),
    };
    let table = run_sweep(&small(), &axes, 8)
        .map_err(|e| e.to_string())
        .and_then(|t| {
            if t.is_complete() {
                Ok(t)
            } else {
                Err(format!(
                    "{} sweep points failed: {}",
                    t.failures.len(),
                    t.failures[0].error
                ))
            }
        });
    (table, start.elapsed().as_secs_f64())
}

fn mean(
    t: &ResultsTable,
    s: SchedulerKind,
    p: Polarization,
    v: f64,
) -> Result<(f64, f64, f64), String> {
    let n = t.point(s, p, v).len();
    if n < SEEDS.len() {
        return Err(format!("{s} {p} {v} km/h has {n} seeds"));
    }
    t.seed_mean(s, p, v)
        .ok_or_else(|| format!("{s} {p} {v} km/h missing"))
}

fn criterion_6(t: &ResultsTable, secs: f64) -> Outcome {
    let mut parts = Vec::new();
    let mut ok = secs < 120.0;
    for s in SCHEDULERS {
        for p in POLS {
            let slow = mean(t, s, p, 0.0)?.0;
            let fast = mean(t, s, p, 120.0)?.0;
            ok &= fast < slow;
            parts.push(format!("{s}/{p} {:.2}→{:.2}", slow / 1e6, fast / 1e6));
        }
    }
    check(
        ok,
        format!("Mbit/s 0→120 km/h: {}; sweep {secs:.0} s", parts.join(", ")),
    )
}

fn criterion_7(t: &ResultsTable) -> Outcome {
    let l120 = mean(t, SchedulerKind::Rr, Polarization::Lpol, 120.0)?.0;
    let x120 = mean(t, SchedulerKind::Rr, Polarization::Xpol, 120.0)?.0;
    let l0 = mean(t, SchedulerKind::Rr, Polarization::Lpol, 0.0)?.0;
    let x0 = mean(t, SchedulerKind::Rr, Polarization::Xpol, 0.0)?.0;
    let gap0 = (l0 - x0).abs() / l0.max(x0);
    check(
        l120 > x120 && gap0 < 0.10,
        format!(
            "RR 120 km/h LPOL {:.2} > XPOL {:.2} Mbit/s; 0 km/h differ by {:.1}%",
            l120 / 1e6,
            x120 / 1e6,
            gap0 * 100.0
        ),
    )
}

fn criterion_8(t: &ResultsTable) -> Outcome {
    let mut ok = t
        .records
        .iter()
        .all(|r| r.fairness_index > 0.0 && r.fairness_index <= 1.0);
    let mut parts = Vec::new();
    for p in POLS {
        let rr = mean(t, SchedulerKind::Rr, p, 120.0)?.2;
        let pf = mean(t, SchedulerKind::Pf, p, 120.0)?.2;
        ok &= rr > pf;
        parts.push(format!("{p} RR {rr:.4} vs PF {pf:.4}"));
    }
    check(
        ok,
        format!(
            "FI at 120 km/h: {}; all {} FI in (0, 1]",
            parts.join(", "),
            t.records.len()
        ),
    )
}

fn criterion_9() -> Outcome {
    let mut base = small();
    base.n_tti = 10;
    let axes = SweepAxes {
        velocities: vec![0.0, 120.0],
        polarizations: vec![Polarization::Xpol],
        schedulers: SCHEDULERS.to_vec(),
        seeds: vec![3, 4],
    };
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut files = Vec::new();
    for (i, par) in [1, 1, 8].into_iter().enumerate() {
        let table = run_sweep(&base, &axes, par).map_err(|e| e.to_string())?;
        let path = dir.path().join(format!("run{i}.csv"));
        emit_csv(&table, &path).map_err(|e| e.to_string())?;
        let bytes = std::fs::read(&path).map_err(|e| e.to_string())?;
        if bytes != csv_string(&table).into_bytes() {
            return Err("written CSV differs from its in-memory rendering".into());
        }
        files.push(bytes);
    }
    check(
        files[0] == files[1] && files[0] == files[2],
        format!(
            "{} rows; repeat run and parallelism 1 vs 8 byte-identical",
            axes.len_points()
        ),
    )
}

fn criterion_10(t: &ResultsTable) -> Outcome {
    let worst = t
        .records
        .iter()
        .map(|r| r.consistency_error())
        .fold(0.0, f64::max);
    check(
        worst <= 1e-9,
        format!(
            "worst relative SE·B vs n·avg mismatch {worst:.1e} over {} records",
            t.records.len()
        ),
    )
}

fn criterion_11() -> Outcome {
    let mut base = small();
    base.xpd_mean = f64::INFINITY;
    let axes = SweepAxes {
        velocities: vec![0.0],
        polarizations: POLS.to_vec(),
        schedulers: SCHEDULERS.to_vec(),
        seeds: SEEDS.to_vec(),
    };
    let t = run_sweep(&base, &axes, 8).map_err(|e| e.to_string())?;
    if !t.is_complete() {
        return Err(format!("{} points failed", t.failures.len()));
    }
    let mut worst = 0.0f64;
    for s in SCHEDULERS {
        let l = mean(&t, s, Polarization::Lpol, 0.0)?;
        let x = mean(&t, s, Polarization::Xpol, 0.0)?;
        for (a, b) in [(l.0, x.0), (l.1, x.1), (l.2, x.2)] {
            worst = worst.max((a - b).abs() / a.abs().max(b.abs()));
        }
    }
    check(
        worst < 0.02,
        format!(
            "static, xpd = ∞: worst LPOL/XPOL KPI difference {:.3}%",
            worst * 100.0
        ),
    )
}

trait PointCount {
    fn len_points(&self) -> usize;
}

impl PointCount for SweepAxes {
    fn len_points(&self) -> usize {
        self.velocities.len() * self.polarizations.len() * self.schedulers.len() * self.seeds.len()
    }
}

fn main() -> ExitCode {
    let mut results: Vec<(u32, &str, Outcome)> = vec![
        (1, "KPI exactness", criterion_1()),
        (2, "throughput averaging", criterion_2()),
        (3, "RR uniformity", criterion_3()),
        (4, "fading statistics", criterion_4()),
        (5, "pathloss oracle", criterion_5()),
    ];
    let (sweep, secs) = trend_sweep();
    match &sweep {
        Ok(t) => {
            results.push((6, "velocity decay", criterion_6(t, secs)));
            results.push((7, "polarization gap", criterion_7(t)));
            results.push((8, "scheduler fairness", criterion_8(t)));
        }
        Err(e) => {
            for (n, name) in [
                (6, "velocity decay"),
                (7, "polarization gap"),
                (8, "scheduler fairness"),
            ] {
                results.push((n, name, Err(e.clone())));
            }
        }
    }
    results.push((9, "determinism", criterion_9()));
    results.push((
        10,
        "KPI cross-consistency",
        sweep.as_ref().map_err(Clone::clone).and_then(criterion_10),
    ));
    results.push((11, "polarization symmetry", criterion_11()));

    let mut failed = 0;
    for (n, name, outcome) in &results {
        match outcome {
            Ok(detail) => println!("criterion {n:>2} PASS  {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {n:>2} FAIL  {name}: {detail}");
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        results.len() - failed,
        results.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
