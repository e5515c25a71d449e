use std::f64::consts::PI;

use proptest::prelude::*;

use dqpe_core::acquisition::SourceModel;
use dqpe_core::estimation::{
    effective_fi, effective_fi_crb, fi_curve, fisher_matrix, fit_fringe, repeat_estimation,
    FisherMatrix, FringeSample, ParityModel, Z_90,
};
use dqpe_core::evolution::{apply_phases, apply_phases_dense, PhaseVector};
use dqpe_core::measurement::{outcome_distribution, sample_counts, OutcomeDistribution, ParityPair};
use dqpe_core::probes::{reference_probe, weights, Coherence, StrategyId};
use dqpe_core::qstate::{assert_equiv, to_dense};
use dqpe_core::stats::chi_square_gof;

const SIX: [StrategyId; 6] = [
    StrategyId::MePe,
    StrategyId::MePs,
    StrategyId::MsPe,
    StrategyId::MsPs,
    StrategyId::MePc,
    StrategyId::MsPc,
];

fn strategy() -> impl Strategy<Value = StrategyId> {
    prop::sample::select(SIX.to_vec())
}

fn phases(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0 * PI..2.0 * PI, n)
}

proptest! {
    #[test]
    fn distributions_are_normalized(s in strategy(), v in 0.0..=1.0f64, seed in phases(6)) {
        let (layout, probe) = reference_probe(s, &Coherence::Uniform(v)).unwrap();
        let theta = PhaseVector::new(seed[..layout.num_modes()].to_vec()).unwrap();
        let dist = outcome_distribution(&apply_phases(&probe, &theta).unwrap()).unwrap();
        let total: f64 = dist.probabilities().iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        prop_assert!(dist.probabilities().iter().all(|&p| p >= 0.0));
    }

    #[test]
    fn engines_agree(s in strategy(), seed in phases(6)) {
        let (layout, probe) = reference_probe(s, &Coherence::Uniform(1.0)).unwrap();
        let theta = PhaseVector::new(seed[..layout.num_modes()].to_vec()).unwrap();
        let analytic = apply_phases(&probe, &theta).unwrap();
        let dense = apply_phases_dense(&to_dense(&probe).unwrap(), &layout, &theta).unwrap();
        prop_assert!(assert_equiv(&analytic, &dense, 1e-12).unwrap());
    }

    #[test]
    fn evolution_is_additive(s in strategy(), a in phases(6), b in phases(6)) {
        let (layout, probe) = reference_probe(s, &Coherence::Uniform(0.7)).unwrap();
        let m = layout.num_modes();
        let a = PhaseVector::new(a[..m].to_vec()).unwrap();
        let b = PhaseVector::new(b[..m].to_vec()).unwrap();
        let twice = apply_phases(&apply_phases(&probe, &a).unwrap(), &b).unwrap();
        let once = apply_phases(&probe, &(&a + &b)).unwrap();
        for (x, y) in twice.groups().iter().zip(once.groups()) {
            prop_assert!((x.phase() - y.phase()).abs() < 1e-12);
        }
    }

    #[test]
    fn fisher_matches_finite_differences(s in strategy(), v in 0.3..=0.95f64, seed in phases(6)) {
        let (layout, probe) = reference_probe(s, &Coherence::Uniform(v)).unwrap();
        let m = layout.num_modes();
        let theta = seed[..m].to_vec();
        let f = fisher_matrix(&probe, &layout, &PhaseVector::new(theta.clone()).unwrap()).unwrap();
        let h = 1e-5;
        let dist = |t: &[f64]| {
            outcome_distribution(&apply_phases(&probe, &PhaseVector::new(t.to_vec()).unwrap()).unwrap()).unwrap()
        };
        let p0 = dist(&theta);
        let grads: Vec<Vec<f64>> = (0..m).map(|k| {
            let mut up = theta.clone();
            let mut down = theta.clone();
            up[k] += h;
            down[k] -= h;
            dist(&up).probabilities().iter().zip(dist(&down).probabilities())
                .map(|(a, b)| (a - b) / (2.0 * h)).collect()
        }).collect();
        let scale = f.elements().iter().fold(0.0f64, |a, b| a.max(b.abs()));
        for k in 0..m {
            for l in 0..m {
                let fd: f64 = p0.probabilities().iter().enumerate()
                    .map(|(x, &p)| grads[k][x] * grads[l][x] / p).sum();
                prop_assert!((fd - f.get(k, l)).abs() <= 1e-6 * scale, "{} vs {}", fd, f.get(k, l));
            }
        }
    }

    #[test]
    fn mepe_effective_fi_is_the_six_fold_fringe(v in 0.0..=0.99f64, t in -PI..PI) {
        let (layout, probe) = reference_probe(StrategyId::MePe, &Coherence::Uniform(v)).unwrap();
        let theta = PhaseVector::new(vec![t; 3]).unwrap();
        let f = fisher_matrix(&probe, &layout, &theta).unwrap();
        let fi = effective_fi(&f, &weights(&layout));
        prop_assert!((fi - fi_curve(StrategyId::MePe, v, t).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn equal_diagonal_forms_agree(d in 0.1..100.0f64, m in 1usize..8) {
        let f = FisherMatrix::diagonal(&vec![d; m]);
        let alpha = vec![1.0 / m as f64; m];
        let a = effective_fi(&f, &alpha);
        let b = effective_fi_crb(&f, &alpha).unwrap();
        prop_assert!((a - b).abs() < 1e-10 * a.max(1.0));
    }

    #[test]
    fn fi_curve_decreases_with_fringe_contrast(v in 0.0..=1.0f64, a in 0.0..PI, b in 0.0..PI) {
        let (ca, cb) = ((6.0 * a).cos().abs(), (6.0 * b).cos().abs());
        prop_assume!(ca < 1.0 - 1e-9 && cb < 1.0 - 1e-9);
        let (fa, fb) = (
            fi_curve(StrategyId::MePe, v, a).unwrap(),
            fi_curve(StrategyId::MePe, v, b).unwrap(),
        );
        if ca <= cb {
            prop_assert!(fa >= fb - 1e-9);
        } else {
            prop_assert!(fb >= fa - 1e-9);
        }
    }

    #[test]
    fn coincidence_rate_is_monotone(p in 0.0..=1.0f64, eta in 0.0..=1.0f64, dp in 0.0..=1.0f64, de in 0.0..=1.0f64, ch in 0usize..6) {
        let base = SourceModel::uniform(p, eta, 1);
        let mut more_eta = base.clone();
        more_eta.channel_efficiency[ch] = (eta + de).min(1.0);
        let more_p = SourceModel::uniform((p + dp).min(1.0), eta, 1);
        prop_assert!(base.coincidence_probability() <= more_eta.coincidence_probability());
        prop_assert!(base.coincidence_probability() <= more_p.coincidence_probability());
    }
}

#[test]
fn sampled_counts_pass_chi_square() {
    let (_, probe) = reference_probe(StrategyId::MePs, &Coherence::Uniform(0.85)).unwrap();
    let theta = PhaseVector::new(vec![0.3, 1.1, -0.4]).unwrap();
    let dist = outcome_distribution(&apply_phases(&probe, &theta).unwrap()).unwrap();
    for seed in 0..10 {
        let rec = sample_counts(&dist, 100_000, seed);
        let t = chi_square_gof(&rec.counts, dist.probabilities());
        assert!(t.passes(1e-3), "seed {seed}: p = {}", t.p_value);
    }
}

#[test]
fn mle_is_efficient_at_large_shot_counts() {
    let model = ParityModel::new(6.0, 0.9);
    let theta = PI / 12.0;
    let s = 10_000;
    let r = repeat_estimation(&model, theta, 100, s, 17).unwrap();
    let ratio = r.std_dev * (s as f64 * model.fisher(theta)).sqrt();
    assert!((0.9..=1.1).contains(&ratio), "ratio {ratio}");
}

#[test]
fn ideal_mepc_estimation_approaches_heisenberg() {
    let model = ParityModel::new(21.0, 1.0);
    let s = 10_000;
    let r = repeat_estimation(&model, PI / 42.0, 100, s, 23).unwrap();
    let heisenberg = 1.0 / (21.0 * (s as f64).sqrt());
    assert!((r.std_dev / heisenberg - 1.0).abs() < 0.2, "{} vs {heisenberg}", r.std_dev);
}

#[test]
fn sampled_fringe_fit_recovers_visibility() {
    let (c, v, shots) = (6.0, 0.76, 7000);
    let samples: Vec<FringeSample> = (0..61)
        .map(|i| {
            let t = PI / 3.0 * i as f64 / 60.0;
            let plus = (1.0 + v * (c * t).cos()) / 2.0;
            let dist = OutcomeDistribution::parity(ParityPair { plus, minus: 1.0 - plus }).unwrap();
            let rec = sample_counts(&dist, shots, 1000 + i);
            let p = rec.counts[0] as f64 / shots as f64;
            FringeSample { theta_hat: t, p_plus: p, p_minus: 1.0 - p, weight: 1.0 }
        })
        .collect();
    let fit = fit_fringe(&samples, c).unwrap();
    let sigma = fit.v_plus_ci90 / Z_90;
    assert!((fit.v_plus - v).abs() < 3.0 * sigma, "{} ± {sigma}", fit.v_plus);
    assert!((fit.v_minus - v).abs() < 3.0 * sigma);
}
