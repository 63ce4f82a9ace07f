//! Iterates checked against their printed closed forms.

use aham_core::expoly::{int, max_relative_mismatch, ratio};
use aham_core::{example, iterate_aham, ExpPoly, SeriesSolution};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn first_iterate(id: &str) -> ExpPoly {
    let ex = example(id).unwrap();
    let sol = iterate_aham(&ex.problem, 1.0, 1).unwrap();
    let mu1 = &sol.iterates()[1];
    assert_eq!(mu1.degree(), Some(1), "{id}: μ_1 must be linear in τ");
    assert!(mu1.coeff(0).is_none_or(|c| c.is_empty()));
    mu1.coeff(1).unwrap().clone()
}

fn assert_matches_polynomial(id: &str, coeffs: &[f64], rate: i64) {
    let got = first_iterate(id);
    let want = ExpPoly::from_polynomial(coeffs, int(rate)).unwrap();
    let mismatch = max_relative_mismatch(&got, &want)
        .unwrap_or_else(|| panic!("{id}: term support differs\n got {got:?}\nwant {want:?}"));
    assert!(mismatch <= 1e-12, "{id}: relative mismatch {mismatch:e}");
}

#[test]
fn mu1_constant_kernel() {
    // e^{-s}(1 - s/2)
    assert_matches_polynomial("4.1", &[1.0, -0.5], 1);
}

#[test]
fn mu1_sum_kernel() {
    // e^{-s}(s + 1 - s²/2)
    assert_matches_polynomial("4.2", &[1.0, 1.0, -0.5], 1);
}

#[test]
fn mu1_product_kernel() {
    // Printed as e^{-s} s (1 - s³/12). The loss minus gain of e^{-s} under
    // s·ξ is e^{-s}(s - s³/12), and the printed μ_2 below contains exactly
    // (1 + h) hτ e^{-s} s (1 - s²/12), so the printed s³ is read as s².
    assert_matches_polynomial("4.3", &[0.0, 1.0, 0.0, -1.0 / 12.0], 1);
}

#[test]
fn mu1_sum_kernel_gamma_ic() {
    // 4 e^{-2s} s (s + 1 - s³/3)
    assert_matches_polynomial("4.4", &[0.0, 4.0, 4.0, 0.0, -4.0 / 3.0], 2);
}

#[test]
fn mu1_breakage_slow() {
    // e^{-2s}(s²(2 - 4s/3) + 2s - 1)
    assert_matches_polynomial("4.6", &[-1.0, 2.0, 2.0, -4.0 / 3.0], 2);
}

#[test]
fn mu1_breakage_fast() {
    // e^{-4s}(32 s (1 + 2s - 8s²/3) - 8)
    assert_matches_polynomial("4.7", &[-8.0, 32.0, 64.0, -256.0 / 3.0], 4);
}

#[test]
fn mu1_brownian() {
    let got = first_iterate("4.5");
    let printed = [
        (ratio(1, 2), 2.68082),
        (ratio(5, 6), 5.34574),
        (int(1), 2.7273),
        (ratio(7, 6), 2.8284),
        (ratio(4, 3), 5.97274),
        (ratio(5, 3), 3.54487),
        (ratio(19, 6), -7.09296),
    ];
    let mut powers: Vec<_> = got.terms().iter().map(|t| t.power).collect();
    powers.sort();
    let mut want: Vec<_> = printed.iter().map(|p| p.0).collect();
    want.sort();
    assert_eq!(powers, want);
    for (p, c) in printed {
        assert!(got.terms().iter().all(|t| t.rate == int(2)));
        let value = got.coeff_of(p, int(2));
        assert!((value - c).abs() <= 1e-3, "s^{p}: {value} vs {c}");
    }
}

fn mu2_at(sol: &SeriesSolution, s: f64, t: f64) -> f64 {
    sol.iterates()[2].evaluate(s, t).unwrap()
}

fn check_mu2<F: Fn(f64, f64, f64) -> f64>(id: &str, printed: F, seed: u64) {
    let ex = example(id).unwrap();
    let mut rng = StdRng::seed_from_u64(seed);
    for _ in 0..20 {
        let s = rng.gen_range(0.05..8.0);
        let t = rng.gen_range(0.05..ex.problem.t_max);
        let h = rng.gen_range(-1.8..-0.1);
        let sol = iterate_aham(&ex.problem, h, 2).unwrap();
        let got = mu2_at(&sol, s, t);
        let want = printed(s, t, h);
        let scale = want.abs().max(1e-300);
        assert!(
            (got - want).abs() <= 1e-10 * scale,
            "{id} at s={s}, τ={t}, h={h}: {got:e} vs printed {want:e}"
        );
    }
}

#[test]
fn mu2_constant_kernel() {
    check_mu2(
        "4.1",
        |s, t, h| {
            h * t
                * (-s).exp()
                * (1.0 - s / 2.0 + h - h * s / 2.0
                    + h * t * (-3.0 * s / 4.0 + 0.75 + s * s / 8.0)
                    + h * h * t * t * (1.0 / 6.0 - s / 4.0 + s * s / 12.0 - s.powi(3) / 144.0))
        },
        41,
    );
}

#[test]
fn mu2_sum_kernel() {
    check_mu2(
        "4.2",
        |s, t, h| {
            let inner = h * h * t * t * s * (s * (120.0 - s * (s * ((s - 10.0) * s - 20.0) + 240.0)) + 240.0)
                + 60.0 * h * (t * ((s - 6.0) * s * (s * s - 3.0) + 6.0) - 6.0 * (s - 2.0) * s + 12.0)
                - 360.0 * ((s - 2.0) * s - 2.0);
            h * t * (-s).exp() * inner / 720.0
        },
        42,
    );
}

#[test]
fn mu2_product_kernel() {
    check_mu2(
        "4.3",
        |s, t, h| {
            let inner = h * h * t * t * (s.powi(4) - 144.0 * s * s + 3024.0) * s.powi(4)
                - 756.0 * h * (s * (t * (s.powi(4) - 60.0 * s * s + 360.0) - 60.0 * s) + 720.0)
                + 45360.0 * (s * s - 12.0);
            -h * t * (-s).exp() * s * inner / 544320.0
        },
        43,
    );
}

#[test]
fn mu2_sum_kernel_gamma_ic() {
    check_mu2(
        "4.4",
        |s, t, h| {
            let a = s * (s * (s * (s * (s * (s * (s.powi(3) - 36.0 * s - 126.0) + 189.0) + 1890.0) + 945.0) - 2835.0)
                - 2835.0);
            let b = s * (s * (s * (2.0 * s.powi(3) - 30.0 * s - 45.0) + 45.0) + 135.0) + 45.0;
            let inner = -2.0 * h * h * t * t * a + 189.0 * h * t * b
                - 5670.0 * (h + 1.0) * (s.powi(3) - 3.0 * s - 3.0);
            2.0 * h * t * (-2.0 * s).exp() * s * inner / 8505.0
        },
        44,
    );
}

#[test]
fn mu2_breakage_slow() {
    check_mu2(
        "4.6",
        |s, t, h| {
            let a = s * (2.0
                * s
                * (s * (s * (s * (21.0 - 2.0 * (s - 7.0) * s) - 210.0) + 105.0) + 315.0)
                - 315.0);
            let b = t * s * (2.0 * (s - 5.0) * s * (4.0 * s * s - 15.0) + 15.0) - 30.0 * t
                + 40.0 * s * (s * (3.0 - 2.0 * s) + 3.0)
                - 60.0;
            let c = 2.0 * s * (s * (2.0 * s - 3.0) - 3.0) + 3.0;
            let inner = 2.0 * h * h * t * t * a + 63.0 * h * b - 1260.0 * c;
            h * t * (-2.0 * s).exp() * inner / 3780.0
        },
        46,
    );
}

#[test]
fn mu2_breakage_fast() {
    check_mu2(
        "4.7",
        |s, t, h| {
            let a = s * (4.0
                * s
                * (2.0 * s * (4.0 * s * (s * (4.0 * s * (2.0 * s - 7.0) - 21.0) + 105.0) - 105.0) - 315.0)
                + 315.0);
            let b = t * s * (4.0 * s * (2.0 * s - 5.0) * (16.0 * s * s - 15.0) + 15.0) - 15.0 * t
                + 20.0 * s * (-8.0 * s * s + 6.0 * s + 3.0)
                - 15.0;
            let c = 4.0 * s * (8.0 * s * s - 6.0 * s - 3.0) + 3.0;
            let inner = -4.0 * h * h * t * t * a + 63.0 * h * b - 315.0 * c;
            8.0 / 945.0 * h * t * (-4.0 * s).exp() * inner
        },
        47,
    );
}
