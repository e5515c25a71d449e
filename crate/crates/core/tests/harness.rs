use dqpe_core::estimation::theoretical_limits;
use dqpe_core::harness::output::{render, write_artifacts, RenderOptions};
use dqpe_core::harness::{preset_config, run, run_preset, HarnessError, ScenarioConfig};
use dqpe_core::probes::StrategyId;

fn fringe_peaks(name: &str) -> Vec<f64> {
    run_preset(name, None)
        .unwrap()
        .sweep
        .unwrap()
        .fringes
        .iter()
        .map(|f| f.fi_peak_fit)
        .collect()
}

#[test]
fn mepe_preset_peaks_near_model() {
    let s = run_preset("fig4_mepe", None).unwrap().sweep.unwrap();
    assert!((s.fi_peak_model - 20.82).abs() < 0.05, "{}", s.fi_peak_model);
    assert!((s.fi_peak_fit - s.fi_peak_model).abs() < 1.0, "{}", s.fi_peak_fit);
    let f = &s.fringes[0];
    assert!(f.fi_peak_lo90 <= f.fi_peak_fit && f.fi_peak_fit <= f.fi_peak_hi90);
    assert_eq!(s.snl_fi, 6.0);
}

#[test]
fn individual_fringes_are_near_four() {
    let peaks = fringe_peaks("fig3_individual");
    assert_eq!(peaks.len(), 3);
    for (got, want) in peaks.iter().zip([3.88, 3.85, 3.86]) {
        assert!((got - want).abs() < 0.15, "{got} vs {want}");
    }
}

#[test]
fn per_mode_fringes_match_single_mode_visibilities() {
    for (name, want) in [("ext1_mode2", 3.832), ("ext1_mode3", 3.877)] {
        let peaks = fringe_peaks(name);
        let best = peaks.iter().cloned().fold(f64::NAN, f64::max);
        assert!((best - want).abs() < 0.15, "{name}: {peaks:?}");
    }
}

#[test]
fn mepc_preset_reaches_about_180() {
    let r = run_preset("fig5_mepc", None).unwrap();
    let s = r.sweep.as_ref().unwrap();
    assert!((s.fi_peak_model - 180.1).abs() < 0.5, "{}", s.fi_peak_model);
    assert!((s.fi_peak_fit - 180.1).abs() < 10.0, "{}", s.fi_peak_fit);
    let e = r.estimation.as_ref().unwrap();
    assert_eq!(e.points.len(), 3);
    for p in &e.points {
        assert!(p.result.std_dev > 0.0 && p.result.std_dev.is_finite());
    }
}

#[test]
fn overlay_matches_theoretical_limits() {
    for name in ["fig4_mepe", "fig4_meps", "fig4_mspe", "fig5_mepc"] {
        let r = run_preset(name, None).unwrap();
        let scenario = r.config.validate().unwrap();
        let limits = r.sweep.unwrap().limits;
        assert!(limits.iter().any(|l| l.strategy == r.config.strategy), "{name}");
        for l in &limits {
            assert_eq!(*l, theoretical_limits(l.strategy, &scenario.layout).unwrap(), "{name}");
        }
    }
}

#[test]
fn json_echo_reruns_to_the_same_report() {
    let dir = tempfile::tempdir().unwrap();
    let first = run_preset("fig4_meps", None).unwrap();
    let opts = RenderOptions::default();
    let written = write_artifacts(dir.path(), &render(&first, opts).unwrap()).unwrap();
    let json = written.iter().find(|p| p.extension().is_some_and(|e| e == "json")).unwrap();
    let cfg = ScenarioConfig::load(json).unwrap();
    assert_eq!(cfg, first.config);
    let again = run(&cfg.validate().unwrap()).unwrap();
    let a: Vec<_> = render(&first, opts).unwrap().into_iter().map(|a| a.bytes).collect();
    let b: Vec<_> = render(&again, opts).unwrap().into_iter().map(|a| a.bytes).collect();
    assert_eq!(a, b);
}

#[test]
fn same_seed_same_samples_other_seed_differs() {
    let a = run_preset("fig4_mspe", None).unwrap().sweep.unwrap();
    let b = run_preset("fig4_mspe", None).unwrap().sweep.unwrap();
    let c = run_preset("fig4_mspe", Some(1)).unwrap().sweep.unwrap();
    let samples = |s: &dqpe_core::harness::SweepReport| -> Vec<f64> {
        s.fringes.iter().flat_map(|f| f.points.iter().map(|p| p.p_plus_sampled)).collect()
    };
    assert_eq!(samples(&a), samples(&b));
    assert_ne!(samples(&a), samples(&c));
}

#[test]
fn zero_steps_is_a_config_error() {
    let mut cfg = preset_config("fig4_mepe", None).unwrap();
    cfg.sweep.as_mut().unwrap().steps = 0;
    assert!(matches!(cfg.validate(), Err(HarnessError::Config(_))));
}

#[test]
fn single_group_estimation_is_rejected() {
    let mut cfg = preset_config("fig5_mepc", None).unwrap();
    cfg.sweep = None;
    cfg.estimation.as_mut().unwrap().groups = 1;
    let err = cfg.validate().and_then(|s| run(&s)).unwrap_err();
    assert!(matches!(err, HarnessError::Config(_) | HarnessError::Numerical(_)), "{err}");
}

#[test]
fn postselected_preset_matches_ideal_fringe() {
    let r = run_preset("postselected_mepe", None).unwrap();
    assert_eq!(r.config.strategy, StrategyId::MePe);
    let s = r.sweep.unwrap();
    assert!(s.total_shots > 0);
    assert!((s.fi_peak_fit - 20.82).abs() < 1.5, "{}", s.fi_peak_fit);
}
