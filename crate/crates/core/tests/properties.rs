use num_complex::Complex64;
use proptest::prelude::*;

use tsallis_dia::closures::{laplace_dia, ClosureProblem, Method};
use tsallis_dia::gamma_compound::{marginal_autocorr, marginal_autocorr_qexp, q_from_shape, GammaParams};
use tsallis_dia::kernels::{eval_kernel, iq, iq_closed_form, iq_quadrature, NoiseKernel, SINGULAR_Q_WINDOW};
use tsallis_dia::noise::{realization_rng, PathGenerator, Sampler, TimeGrid};
use tsallis_dia::oscillator::{Model, OscillatorConfig};
use tsallis_dia::qcore::{escort_probabilities, q_exp, q_log, tsallis_entropy, DiscreteDistribution, QIndex};

fn qi(q: f64) -> QIndex {
    QIndex::new(q).unwrap()
}

fn distribution(max: usize) -> impl Strategy<Value = DiscreteDistribution> {
    prop::collection::vec(0.01f64..1.0, 1..=max).prop_map(|w| DiscreteDistribution::from_weights(&w).unwrap())
}

fn away_from_singular(q: f64) -> bool {
    [1.5, 2.0].iter().all(|s| (q - s).abs() > 2.0 * SINGULAR_Q_WINDOW)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn q_log_inverts_q_exp(q in -1.0f64..3.0, x in -0.45f64..0.45) {
        let e = q_exp(x, qi(q));
        prop_assume!(e > 0.0);
        prop_assert!((q_log(e, qi(q)).unwrap() - x).abs() <= 1e-12 * (1.0 + x.abs()));
    }

    #[test]
    fn q_exp_inverts_q_log(q in -1.0f64..3.0, y in 0.05f64..20.0) {
        let back = q_exp(q_log(y, qi(q)).unwrap(), qi(q));
        prop_assert!((back - y).abs() <= 1e-11 * y);
    }

    #[test]
    fn pseudo_additivity(a in distribution(6), b in distribution(6), q in 0.1f64..3.0) {
        let (sa, sb) = (tsallis_entropy(&a, qi(q)), tsallis_entropy(&b, qi(q)));
        let joint = tsallis_entropy(&a.product(&b), qi(q));
        prop_assert!((joint - (sa + sb + (1.0 - q) * sa * sb)).abs() <= 1e-10);
    }

    #[test]
    fn entropy_is_continuous_at_one(d in distribution(8), delta in 1e-9f64..1e-6) {
        let bg = tsallis_entropy(&d, QIndex::one());
        for q in [1.0 - delta, 1.0 + delta] {
            let scale = bg * bg + d.probabilities().iter().map(|p| p * p.ln().powi(2)).sum::<f64>();
            prop_assert!((tsallis_entropy(&d, qi(q)) - bg).abs() <= delta * scale + 1e-12);
        }
    }

    #[test]
    fn q_exp_is_continuous_at_one(x in -3.0f64..3.0, delta in 1e-10f64..1e-5) {
        for q in [1.0 - delta, 1.0 + delta] {
            let e = q_exp(x, qi(q));
            prop_assert!((e - x.exp()).abs() <= (delta * x * x + 1e-8) * x.exp());
        }
    }

    #[test]
    fn uniform_maximizes_entropy(d in distribution(8), q in 0.05f64..4.0) {
        let u = DiscreteDistribution::uniform(d.len()).unwrap();
        prop_assert!(tsallis_entropy(&d, qi(q)) <= tsallis_entropy(&u, qi(q)) + 1e-12);
    }

    #[test]
    fn escort_preserves_order_and_sharpens(d in distribution(8), q in 1.0f64..4.0) {
        let e = escort_probabilities(&d, qi(q)).unwrap();
        let p = d.probabilities();
        let pe = e.probabilities();
        for i in 0..p.len() {
            for j in 0..p.len() {
                if p[i] > p[j] {
                    prop_assert!(pe[i] >= pe[j]);
                }
            }
        }
        let max = |v: &[f64]| v.iter().cloned().fold(0.0, f64::max);
        prop_assert!(max(pe) >= max(p) - 1e-15);
    }

    #[test]
    fn tsallis_kernel_degenerates_to_ou(lambda0 in 0.1f64..5.0, tau in 0.0f64..20.0, delta in 1e-12f64..1e-9) {
        let ou = eval_kernel(&NoiseKernel::ou(1.0, lambda0).unwrap(), tau).unwrap();
        let near = eval_kernel(&NoiseKernel::tsallis(1.0, lambda0, qi(1.0 + delta)).unwrap(), tau).unwrap();
        prop_assert!((near - ou).abs() <= 1e-6);
    }

    #[test]
    fn small_lambda_taylor_bound(q in -1.0f64..3.0, x in 0.0f64..0.1) {
        prop_assert!((q_exp(-x, qi(q)) - (1.0 - x)).abs() <= x * x * f64::max(1.0, q.abs()));
    }

    #[test]
    fn iq_closed_form_matches_quadrature(q in 0.2f64..3.0, lambda0 in 0.1f64..4.0, t in 0.01f64..10.0) {
        prop_assume!(away_from_singular(q));
        let k = NoiseKernel::tsallis(1.0, lambda0, qi(q)).unwrap();
        let closed = iq_closed_form(t, qi(q), lambda0).unwrap();
        let quad = iq_quadrature(t, &k).unwrap().value;
        prop_assert!((closed - quad).abs() <= 1e-8, "{closed} vs {quad}");
    }

    #[test]
    fn iq_is_bounded_by_free_growth(q in 0.2f64..3.0, lambda0 in 0.0f64..4.0, t in 0.0f64..10.0) {
        let k = NoiseKernel::tsallis(1.0, lambda0, qi(q)).unwrap();
        let v = iq(t, &k).unwrap();
        prop_assert!(v >= 0.0 && v <= 0.5 * t * t * (1.0 + 1e-12));
    }

    #[test]
    fn compound_autocorr_is_q_exponential(a in 0.01f64..5.0, c in 0.1f64..50.0, tau in 0.0f64..20.0) {
        let g = GammaParams::new(a, c).unwrap();
        let x = marginal_autocorr(tau, 1.0, g);
        prop_assert!((x - marginal_autocorr_qexp(tau, 1.0, g)).abs() <= 1e-12);
        prop_assert!((q_from_shape(c).unwrap().q() - (1.0 + 1.0 / c)).abs() <= 1e-15);
    }

    #[test]
    fn realizations_are_reproducible(seed in any::<u64>(), index in 0u64..1000) {
        let grid = TimeGrid::new(0.05, 40).unwrap();
        let g = PathGenerator::new(&Sampler::Ou { lambda: 1.0, sigma_b2: 1.0 }, &grid).unwrap();
        let (a, b) = (g.realization(seed, index), g.realization(seed, index));
        prop_assert_eq!(a.values(), b.values());
        let mut r1 = realization_rng(seed, index);
        let mut r2 = realization_rng(seed, index.wrapping_add(1));
        prop_assert_ne!(rand::Rng::random::<u64>(&mut r1), rand::Rng::random::<u64>(&mut r2));
    }

    #[test]
    fn dia_shift_identity(re in 0.0f64..3.0, im in -5.0f64..5.0, lambda in 0.2f64..2.0, markov in any::<bool>()) {
        let (model, nu) = if markov { (Model::Markov, 0.3) } else { (Model::NonMarkov, 1.0) };
        let cfg = OscillatorConfig::new(model, nu, None).unwrap();
        let prob = ClosureProblem::new(Method::Dia, NoiseKernel::ou(1.0, lambda).unwrap(), cfg).unwrap();
        let p = Complex64::new(re, im);
        prop_assume!(p.norm() > 0.05);
        let here = laplace_dia(&prob, p, None).unwrap();
        let next = laplace_dia(&prob, p + lambda, Some(here.depth - 1)).unwrap().value;
        let free = if markov { p } else { p + nu / p };
        prop_assert!((here.value * (free + next) - 1.0).norm() <= 1e-9);
    }
}
