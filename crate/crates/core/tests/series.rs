//! Series recursion checked against independent quadrature oracles and its
//! conservation and decay properties.

use aham_core::pbe_ops::apply_m;
use aham_core::quad;
use aham_core::{all_examples, example, iterate, iterate_aham, iterate_classic, optimize_h, Mode};
use proptest::prelude::*;

type Profile = fn(f64) -> f64;
type Kernel = fn(f64, f64) -> f64;

/// Adomian second iterate `τ²/2 · [c₀ ∫w g + g ∫w c₀ − ∫₀^s w c₀(s−ξ) g(ξ) dξ]`
/// with `g = M[c₀]` taken from the printed first iterate.
fn adomian_mu2(c0: Profile, g: Profile, w: Kernel, s: f64, tau: f64) -> f64 {
    let tol = 1e-13;
    let wg = quad::integrate(|x| w(s, x) * g(x), 0.0, 80.0, tol);
    let wc = quad::integrate(|x| w(s, x) * c0(x), 0.0, 80.0, tol);
    let gain = quad::integrate(|x| w(s - x, x) * c0(s - x) * g(x), 0.0, s, tol);
    0.5 * tau * tau * (c0(s) * wg + g(s) * wc - gain)
}

fn check_adomian(id: &str, c0: Profile, g: Profile, w: Kernel) {
    let ex = example(id).unwrap();
    let sol = iterate_classic(&ex.problem, -1.0, 2).unwrap();
    for s in [0.2, 0.9, 2.0, 3.7, 6.0] {
        for tau in [0.25, 1.0] {
            let got = sol.iterates()[2].evaluate(s, tau).unwrap();
            let want = adomian_mu2(c0, g, w, s, tau);
            assert!((got - want).abs() <= 1e-9 * (1.0 + want.abs()), "{id} s={s} τ={tau}: {got} vs {want}");
        }
    }
}

#[test]
fn classic_mode_reproduces_adomian_constant() {
    check_adomian("4.1", |s| (-s).exp(), |s| (-s).exp() * (1.0 - s / 2.0), |_, _| 1.0);
}

#[test]
fn classic_mode_reproduces_adomian_sum() {
    check_adomian("4.2", |s| (-s).exp(), |s| (-s).exp() * (s + 1.0 - s * s / 2.0), |a, b| a + b);
}

#[test]
fn classic_mode_reproduces_adomian_sum_gamma_ic() {
    check_adomian(
        "4.4",
        |s| 4.0 * s * (-2.0 * s).exp(),
        |s| 4.0 * (-2.0 * s).exp() * s * (s + 1.0 - s.powi(3) / 3.0),
        |a, b| a + b,
    );
}

#[test]
fn modes_differ_by_the_self_interaction_of_mu1() {
    // classic μ₂ − accelerated μ₂ = −∫₀^τ h M[μ₁] dρ
    for id in ["4.1", "4.2", "4.6"] {
        let ex = example(id).unwrap();
        for h in [-1.0, -0.6, -1.4] {
            let classic = iterate_classic(&ex.problem, h, 2).unwrap();
            let aham = iterate_aham(&ex.problem, h, 2).unwrap();
            let predicted = apply_m(&ex.problem.split, &aham.iterates()[1]).unwrap().integrate().scale(-h);
            for s in [0.3, 1.1, 2.5, 5.0] {
                for tau in [0.4, 1.0] {
                    let diff = classic.iterates()[2].evaluate(s, tau).unwrap() - aham.iterates()[2].evaluate(s, tau).unwrap();
                    let want = predicted.evaluate(s, tau).unwrap();
                    assert!((diff - want).abs() <= 1e-12 * (1.0 + want.abs()), "{id} h={h}: {diff} vs {want}");
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn iterates_conserve_mass_and_count(h in -2.0f64..-0.01) {
        for ex in all_examples() {
            for mode in [Mode::Aham, Mode::Classic] {
                let sol = iterate(&ex.problem, h, ex.default_terms, mode, 512).unwrap();
                for (k, mu) in sol.iterates().iter().enumerate().skip(1) {
                    for (d, mass) in mu.coefficient_moments(1) {
                        prop_assert!(mass.abs() <= 1e-10, "{} {mode} μ_{k} τ^{d}: mass {mass:e}", ex.id);
                    }
                    if !ex.is_aggregation_only() {
                        for (d, count) in mu.coefficient_moments(0) {
                            prop_assert!(count.abs() <= 1e-10, "{} {mode} μ_{k} τ^{d}: count {count:e}", ex.id);
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn successive_iterates_shrink_for_slow_breakage() {
    let ex = example("4.6").unwrap();
    let report = optimize_h(&ex.problem, &ex.residual_grid(), ex.default_terms).unwrap();
    let sol = iterate_aham(&ex.problem, report.h_star, 4).unwrap();
    for tau in [0.1, 0.2, 0.3, 0.4, 0.5] {
        let norms: Vec<f64> = sol
            .iterates()
            .iter()
            .map(|mu| quad::integrate(|s| mu.evaluate(s, tau).unwrap().abs(), 0.0, 40.0, 1e-12))
            .collect();
        for k in 1..=3 {
            assert!(norms[k + 1] < norms[k], "τ={tau}: ‖μ_{}‖ = {:e} ≥ ‖μ_{k}‖ = {:e}", k + 1, norms[k + 1], norms[k]);
        }
    }
}
