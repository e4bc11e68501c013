//! Whole-run invariants of the engine and the scalar-generic kernels.

use proptest::prelude::*;

use mmwave_sls::channel::{doppler_frequency, pathloss_uma, FadingDims, FadingGenerator};
use mmwave_sls::kpi::jain_index;
use mmwave_sls::link::{build_codebook, compute_sinr, sinr_to_rate, RateMapping};
use mmwave_sls::{Polarization, Preset, ScenarioConfig, SchedulerKind, SimulationRun};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn short(kind: SchedulerKind, pol: Polarization, velocity: f64, seed: u64) -> ScenarioConfig {
    let mut cfg = ScenarioConfig::preset(Preset::Small).with_polarization(pol);
    cfg.scheduler = kind;
    cfg.ue_velocity = velocity;
    cfg.seed = seed;
    cfg.n_tti = 6;
    cfg
}

#[test]
fn ledger_matches_grants_of_counted_ues() {
    for kind in [SchedulerKind::Rr, SchedulerKind::Pf] {
        let mut run = SimulationRun::new(short(kind, Polarization::Xpol, 90.0, 11)).unwrap();
        let mut counted_sum = 0.0;
        while !run.is_finished() {
            let allocs = run.step(None).unwrap();
            for alloc in allocs.iter().flatten() {
                counted_sum += alloc
                    .grants
                    .iter()
                    .filter(|g| run.counted_ues().contains(&g.ue_id))
                    .map(|g| g.bits)
                    .sum::<f64>();
            }
        }
        let ledger = run.ledger().total_bits();
        assert!(ledger > 0.0);
        assert!(
            (ledger - counted_sum).abs() <= 1e-9 * ledger,
            "{kind}: {ledger} vs {counted_sum}"
        );
        assert!((ledger - run.granted_bits()).abs() <= 1e-9 * ledger);
        let rec = run.finish().unwrap();
        assert_eq!(rec.n_ues, run.counted_ues().len());
    }
}

#[test]
fn counted_ues_are_served_by_the_centre_site() {
    let run = SimulationRun::new(short(SchedulerKind::Rr, Polarization::Lpol, 0.0, 3)).unwrap();
    assert!(!run.counted_ues().is_empty());
    for &k in run.counted_ues() {
        assert!(
            run.ues()[k].serving_cell < 3,
            "UE {k} served by cell {}",
            run.ues()[k].serving_cell
        );
    }
    let mut all = short(SchedulerKind::Rr, Polarization::Lpol, 0.0, 3);
    all.kpi_all_cells = true;
    let run_all = SimulationRun::new(all).unwrap();
    assert_eq!(run_all.counted_ues().len(), run_all.ues().len());
}

#[test]
fn seeds_are_common_random_numbers_across_velocity_and_polarization() {
    let a = SimulationRun::new(short(SchedulerKind::Pf, Polarization::Lpol, 0.0, 5)).unwrap();
    let b = SimulationRun::new(short(SchedulerKind::Rr, Polarization::Xpol, 120.0, 5)).unwrap();
    let c = SimulationRun::new(short(SchedulerKind::Pf, Polarization::Lpol, 0.0, 6)).unwrap();
    let pos = |r: &SimulationRun| {
        r.ues()
            .iter()
            .map(|u| (u.x, u.y, u.serving_cell))
            .collect::<Vec<_>>()
    };
    assert_eq!(pos(&a), pos(&b));
    assert_ne!(pos(&a), pos(&c));
}

#[test]
fn finishing_early_is_an_error() {
    let mut run = SimulationRun::new(short(SchedulerKind::Rr, Polarization::Lpol, 0.0, 1)).unwrap();
    run.step(None).unwrap();
    assert!(run.finish().is_err());
    while !run.is_finished() {
        run.step(None).unwrap();
    }
    assert!(run.step(None).is_err());
    assert!(run.finish().is_ok());
}

#[test]
fn kernels_run_in_single_precision() {
    let pl32 = pathloss_uma(99.0f32, 28e9, 25.0, 1.5, true).unwrap();
    let pl64 = pathloss_uma(99.0f64, 28e9, 25.0, 1.5, true).unwrap();
    assert!((f64::from(pl32) - pl64).abs() < 1e-3);
    assert!((doppler_frequency(120.0f32, 28e9) - 3113.0).abs() < 1.0);
    assert_eq!(jain_index(&[2.0f32, 2.0, 2.0]).unwrap(), 1.0);

    let cb = build_codebook::<f32>(4).unwrap();
    let dims = FadingDims {
        n_rx: 4,
        n_tx: 4,
        n_rb: 1,
        coherence_rbs: 1,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let h = &FadingGenerator::<f32>::new(dims, 100.0, 1e-3, None, &mut rng).snapshot()[0];
    let s = compute_sinr(h, cb.precoder(2, 0), 10.0, &[], 1.0).unwrap();
    assert_eq!(s.len(), 2);
    let mapping = RateMapping {
        efficiency: 0.6f32,
        se_cap: 7.4,
    };
    let bits: f32 = s
        .iter()
        .map(|x| sinr_to_rate(*x, 180e3, 1e-3, &mapping))
        .sum();
    assert!(bits > 0.0 && bits <= 2.0 * 180.0 * 7.4 + 1e-3);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn scenario_text_round_trips(
        velocity in 0.0f64..300.0,
        seed in any::<u64>(),
        xpd in prop_oneof![Just(f64::INFINITY), 0.0f64..40.0],
        xpol in any::<bool>(),
        pf in any::<bool>(),
        delay in 0usize..4,
    ) {
        let pol = if xpol { Polarization::Xpol } else { Polarization::Lpol };
        let mut cfg = ScenarioConfig::preset(Preset::Small).with_polarization(pol);
        cfg.ue_velocity = velocity;
        cfg.seed = seed;
        cfg.xpd_mean = xpd;
        cfg.feedback_delay_tti = delay;
        cfg.scheduler = if pf { SchedulerKind::Pf } else { SchedulerKind::Rr };
        let back = ScenarioConfig::parse(&cfg.to_scenario_text()).unwrap();
        prop_assert_eq!(back, cfg);
    }
}
