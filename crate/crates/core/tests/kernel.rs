use ladder_core::kernel::{
    ck_oracle, delta_step_sample, k1, kn_mass, lifted_step_sample, lyapunov, pi_cdf, pi_density,
    pi_sample, psi, psi_closed, stationarity_oracle, KernelFamily, Lifted,
};
use ladder_core::quadrature::Quadrature;
use ladder_core::rng::stream_rng;
use ladder_core::stats::{ks_critical, ks_statistic};
use proptest::prelude::*;

/// CDF of `K(r', ·)` for `r' > 0`, integrated by hand piece by piece.
fn k1_cdf_pos(rp: f64, r: f64) -> f64 {
    if r < 0.0 {
        0.5 * (2.0 * r - rp).exp()
    } else if r <= rp {
        0.5 * (-rp).exp() + 1.0 - (-r).exp()
    } else {
        1.0 - 0.5 * (rp - 2.0 * r).exp()
    }
}

fn offgrid(lo: f64, hi: f64, k: usize) -> Vec<f64> {
    (0..k)
        .map(|i| lo + (hi - lo) * i as f64 / (k - 1) as f64 + 0.0173)
        .collect()
}

#[test]
fn normalization_through_six_steps() {
    let fam = KernelFamily::upto(6).unwrap();
    let q = Quadrature::default();
    for n in 1..=6 {
        let k = fam.density(n).unwrap();
        for rp in [-3.0, -1.0, 0.0, 1.0, 3.0] {
            let m = kn_mass(k, rp, &q);
            assert!((m - 1.0).abs() <= 1e-8, "n={n} r'={rp}: {m}");
        }
    }
    let m = kn_mass(fam.density(4).unwrap(), 1.3, &q);
    assert!((m - 1.0).abs() <= 1e-8);
}

#[test]
fn chapman_kolmogorov_grids() {
    let fam = KernelFamily::upto(5).unwrap();
    let q = Quadrature::default();
    let v = ck_oracle(2, 0.5, 0.25, &q, &fam).unwrap();
    assert!((v - fam.density(2).unwrap().eval(0.5, 0.25)).abs() <= 1e-6);
    let grid = offgrid(-3.0, 3.0, 9);
    for n in 2..=5 {
        let k = fam.density(n).unwrap();
        let mut worst: f64 = 0.0;
        for &rp in &grid {
            for &r in &grid {
                worst = worst.max((ck_oracle(n, rp, r, &q, &fam).unwrap() - k.eval(rp, r)).abs());
            }
        }
        assert!(worst <= 1e-6, "n={n}: {worst}");
    }
}

#[test]
fn pi_is_stationary() {
    let fam = KernelFamily::upto(3).unwrap();
    let q = Quadrature::default();
    for n in 1..=3 {
        let k = fam.density(n).unwrap();
        for r in offgrid(-4.0, 4.0, 11) {
            let v = stationarity_oracle(k, r, &q);
            assert!((v - pi_density(r)).abs() <= 1e-7, "n={n} r={r}");
        }
    }
}

#[test]
fn kernels_are_mirror_symmetric() {
    let fam = KernelFamily::upto(6).unwrap();
    for n in 1..=6 {
        let k = fam.density(n).unwrap();
        for rp in offgrid(-3.0, 3.0, 7) {
            for r in offgrid(-3.0, 3.0, 7) {
                assert!((k.eval(rp, r) - k.eval(-rp, -r)).abs() <= 1e-12);
            }
        }
    }
}

#[test]
fn kernels_are_nonnegative() {
    let fam = KernelFamily::upto(8).unwrap();
    let grid = offgrid(-6.0, 6.0, 41);
    for n in 1..=8 {
        for (_, _, v) in fam.density(n).unwrap().grid(&grid, &grid) {
            assert!(v >= -1e-12);
        }
    }
}

#[test]
fn drift_bounds() {
    let q = Quadrature::default();
    let mut sup: f64 = 0.0;
    for i in -400..=400 {
        let r = 0.05 * i as f64;
        let p = psi(r, &q);
        assert!((p - psi_closed(r)).abs() <= 1e-10);
        sup = sup.max(p);
        if r.abs() >= 1.0 {
            assert!(p <= lyapunov(r) - 0.1, "r={r}");
        }
    }
    // ψ increases to its limit 1/2
    assert!((psi_closed(40.0) - 0.5).abs() <= 1e-6);
    assert!(sup <= 0.5 && 0.5 - sup <= 1e-6);
}

#[test]
fn step_sampler_matches_density() {
    let mut rng = stream_rng(11, 0);
    let draws: Vec<f64> = (0..1_000_000).map(|_| delta_step_sample(1.0, &mut rng)).collect();
    let d = ks_statistic(&draws, |r| k1_cdf_pos(1.0, r));
    assert!(d < ks_critical(draws.len(), 0.01), "{d}");
}

#[test]
fn step_sampler_at_origin_is_laplace() {
    let mut rng = stream_rng(12, 0);
    let draws: Vec<f64> = (0..100_000).map(|_| delta_step_sample(0.0, &mut rng)).collect();
    let laplace = |r: f64| if r < 0.0 { 0.5 * (2.0 * r).exp() } else { 1.0 - 0.5 * (-2.0 * r).exp() };
    assert!(ks_statistic(&draws, laplace) < ks_critical(draws.len(), 0.01));
}

#[test]
fn pi_sampler_matches_cdf() {
    let mut rng = stream_rng(13, 0);
    let draws: Vec<f64> = (0..200_000).map(|_| pi_sample(&mut rng)).collect();
    assert!(ks_statistic(&draws, pi_cdf) < ks_critical(draws.len(), 0.01));
}

#[test]
fn chain_forgets_its_start() {
    let mut rng = stream_rng(14, 0);
    let mut r = 0.0;
    for _ in 0..1000 {
        r = delta_step_sample(r, &mut rng);
    }
    let path: Vec<f64> = (0..100_000)
        .map(|_| {
            r = delta_step_sample(r, &mut rng);
            r
        })
        .collect();
    assert!(ks_statistic(&path, pi_cdf) <= 0.01);
}

#[test]
fn lifted_step_preserves_stationary_law() {
    let mut rng = stream_rng(15, 0);
    let draws: Vec<f64> = (0..100_000)
        .map(|_| {
            let m = Lifted::stationary(&mut rng);
            lifted_step_sample(&m, &mut rng).r
        })
        .collect();
    assert!(ks_statistic(&draws, pi_cdf) <= 0.02);
}

#[test]
fn lifted_marginal_recovers_kernel() {
    let fam = KernelFamily::upto(3).unwrap();
    let q = Quadrature::default();
    let mp = Lifted { r: 0.4, x: 0.7, y: 1.2, z: 0.3 };
    let r = -0.35;
    // ∫∫∫ over x, y, z on [0, 30]^3, separable in the weights
    let one_d = q.integrate_on(|t: f64| (-t).exp(), 0.0, 30.0, &[]);
    let m = Lifted { r, x: 0.0, y: 0.0, z: 0.0 };
    let base = ladder_core::kernel::kn_lifted(3, &mp, &m, &fam).unwrap();
    let marg = base * one_d.powi(3);
    let direct = fam.density(2).unwrap().eval(mp.next_delta(), r);
    assert!((marg - direct).abs() <= 1e-10);
}

proptest! {
    #[test]
    fn k1_is_mirror_symmetric(rp in -5.0f64..5.0, r in -5.0f64..5.0) {
        prop_assert_eq!(k1(rp, r), k1(-rp, -r));
    }

    #[test]
    fn step_sample_sign_follows_start(rp in 0.01f64..5.0, seed in 0u64..1000) {
        let a = delta_step_sample(rp, &mut stream_rng(seed, 0));
        let b = delta_step_sample(-rp, &mut stream_rng(seed, 0));
        prop_assert_eq!(a, -b);
    }

    #[test]
    fn next_delta_within_rung(r in -5.0f64..5.0, x in 0.0f64..5.0, y in 0.0f64..5.0, z in 0.0f64..5.0) {
        let m = Lifted { r, x, y, z };
        prop_assert!(m.next_delta().abs() <= z);
    }
}
