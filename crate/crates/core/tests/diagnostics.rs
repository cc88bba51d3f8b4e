//! Monte Carlo diagnostics that tie several modules together: the
//! linearized-representation residual, the growth rate of scaled
//! deviations, and the fitted bias decay rate.

use stable_entropy::estimator::{centered_representation, estimate_qf, EstimatorConfig};
use stable_entropy::linproc::{partial_alpha_norm_sum, CoefficientSpec, PathSimulator};
use stable_entropy::montecarlo::{bias_rate_report, run_experiment, scaled_deviations, ExperimentSpec};
use stable_entropy::rng::{stream, stream_id};
use stable_entropy::stable::{InnovationSpec, StableParams};
use stable_entropy::truth::{classify_limit, true_qf_closed};

fn hazen_iqr(xs: &mut [f64]) -> f64 {
    xs.sort_by(f64::total_cmp);
    let q = |p: f64| {
        let h = p * xs.len() as f64 - 0.5;
        let k = (h.floor() as usize).min(xs.len() - 2);
        let g = (h - k as f64).clamp(0.0, 1.0);
        xs[k] + g * (xs[k + 1] - xs[k])
    };
    q(0.75) - q(0.25)
}

/// The mean absolute residual of the linearized representation shrinks
/// with n: at alpha = 1.5, beta = 1.3 the residual of
/// `(T_n - mean) - (1/n) sum 2 (f(X_i) - qf)` is an order smaller at
/// n = 2000 than at n = 500.
#[test]
fn centered_representation_residual_shrinks_with_n() {
    let alpha = 1.5;
    let coeffs = CoefficientSpec::new(1.0, 1.3, 1 << 14).unwrap();
    let innovation = InnovationSpec::sas(alpha).unwrap();
    let config = EstimatorConfig::default_gaussian();
    let s_m = partial_alpha_norm_sum(&coeffs, alpha).unwrap();
    let marginal = StableParams::new(alpha, s_m.powf(1.0 / alpha), 0.0, 0.0).unwrap();
    let truth = true_qf_closed(alpha, s_m).unwrap();
    let reps = 200usize;

    let mean_abs_residual = |n: usize| -> f64 {
        let sim = PathSimulator::new(&coeffs, n);
        let sampler = innovation.sampler();
        let paths: Vec<Vec<f64>> = (0..reps)
            .map(|rep| {
                let mut rng = stream(900, stream_id(&[n as u64, rep as u64]));
                sim.simulate(&innovation, &mut rng)
            })
            .collect();
        let _ = sampler;
        let estimates: Vec<f64> =
            paths.iter().map(|p| estimate_qf(p, &config).unwrap()).collect();
        let mean_tn = estimates.iter().sum::<f64>() / reps as f64;
        let total: f64 = paths
            .iter()
            .map(|p| {
                centered_representation(p, &config, &marginal, truth, mean_tn)
                    .unwrap()
                    .residual
                    .abs()
            })
            .sum();
        total / reps as f64
    };

    let small_n = mean_abs_residual(500);
    let large_n = mean_abs_residual(2000);
    assert!(
        large_n < small_n,
        "mean |residual| should shrink: n=500 gives {small_n}, n=2000 gives {large_n}"
    );
}

/// Scaled deviations `n^{1 - 1/(alpha beta)} (T - mean)` are scale-stable
/// across n: their interquartile range at n = 4000 matches the one at
/// n = 500 within a factor well below the raw n^{1/3} growth that the
/// scaling compensates.
#[test]
fn scaled_deviation_spread_is_stable_across_n() {
    let spec = ExperimentSpec {
        innovation: InnovationSpec::sas(0.5).unwrap(),
        coeffs: CoefficientSpec::new(1.0, 3.0, 1 << 14).unwrap(),
        n_list: vec![500, 4000],
        replications: 500,
        base_seed: 901,
        estimator: EstimatorConfig::default_gaussian(),
    };
    let case = classify_limit(0.5, 3.0).unwrap();
    assert!((case.rate_exponent - 1.0 / 3.0).abs() < 1e-12);
    let summaries = run_experiment(&spec).unwrap();

    let mut scaled_small = scaled_deviations(&summaries[0], &case);
    let mut scaled_large = scaled_deviations(&summaries[1], &case);
    let ratio_scaled = hazen_iqr(&mut scaled_large) / hazen_iqr(&mut scaled_small);
    assert!(
        ratio_scaled > 0.5 && ratio_scaled < 2.0,
        "scaled IQR ratio {ratio_scaled} should be ~1"
    );

    // Without the n^{1/3} factor the spread shrinks by ~(8)^{-1/3} = 0.5.
    let raw_ratio = ratio_scaled * (500.0f64 / 4000.0).powf(case.rate_exponent);
    assert!(raw_ratio < 0.8, "raw deviations should shrink with n, ratio {raw_ratio}");
}

/// Fitted slope of log |bias| against log n lands in the wide Monte Carlo
/// band around the theoretical decay for alpha = 0.5, beta = 2.5.
#[test]
fn bias_rate_slope_in_band() {
    let spec = ExperimentSpec {
        innovation: InnovationSpec::sas(0.5).unwrap(),
        coeffs: CoefficientSpec::new(1.0, 2.5, 1 << 16).unwrap(),
        n_list: vec![500, 1000, 2000, 4000],
        replications: 600,
        base_seed: 902,
        estimator: EstimatorConfig::default_gaussian(),
    };
    let summaries = run_experiment(&spec).unwrap();
    let report = bias_rate_report(&summaries, 0.5, 2.5);
    assert!((report.theoretical_exponent + 0.25).abs() < 1e-15);
    let slope = report.slope.expect("bias should be resolvable at N=600");
    assert!(
        (-0.45..=-0.05).contains(&slope),
        "slope {slope} outside [-0.45, -0.05]; points {:?}",
        report.points
    );
}
