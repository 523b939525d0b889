use rmt_charpoly::egf::{extract_f, sigma_alpha, ContourJob, EgfParams};
use rmt_charpoly::mc::{
    char_poly_value, estimate_f, estimate_sigma, sample_matrix, EntryDist, EntryKind, MCConfig,
    WignerMatrix,
};
use rmt_charpoly::oracle::{oracle_f, EnsembleKind};

const ENSEMBLES: [EnsembleKind; 2] = [EnsembleKind::Hermitian, EnsembleKind::RealSymmetric];

fn config(
    ensemble: EnsembleKind,
    kind: EntryKind,
    n: usize,
    samples: usize,
    points: &[(f64, f64)],
) -> MCConfig {
    MCConfig {
        ensemble,
        dist: EntryDist::for_ensemble(kind, ensemble).unwrap(),
        n,
        samples,
        seed: 20240917,
        points: points.to_vec(),
    }
}

fn real(x: rmt_charpoly::numeric::ScaledReal) -> f64 {
    x.to_real_checked().unwrap()
}

#[test]
fn monte_carlo_oracle_and_contour_agree() {
    let points = [(0.5, -0.5), (0.1, 0.9), (-0.8, 0.1)];
    for ensemble in ENSEMBLES {
        for kind in [EntryKind::Gaussian, EntryKind::Rademacher] {
            for n in 1..=5 {
                let cfg = config(ensemble, kind, n, 20_000, &points);
                let moments = cfg.dist.moments();
                let estimates = estimate_f(&cfg).unwrap();
                for (est, &(mu, nu)) in estimates.iter().zip(&points) {
                    let exact = oracle_f(ensemble, &moments, n, mu, nu).unwrap();
                    let params =
                        EgfParams::new(ensemble.alpha(), moments.bstar(ensemble), mu, nu).unwrap();
                    let egf = real(extract_f(&ContourJob::new(params, n as u64)).unwrap().0);
                    assert!(
                        (egf - exact).abs() <= 1e-10 * exact.abs(),
                        "{ensemble:?} {kind:?} n={n}"
                    );
                    let (mean, se) = (real(est.mean), real(est.stderr));
                    assert!(
                        (mean - exact).abs() <= 4.0 * se + 1e-12 * exact.abs(),
                        "{ensemble:?} {kind:?} n={n}: {mean} ± {se} vs {exact}"
                    );
                    assert_eq!(est.samples_used, cfg.samples);
                }
            }
        }
    }
}

#[test]
fn matched_fourth_moments_give_overlapping_estimates() {
    // Two-point law with the Gaussian fourth moment and a nonzero third moment.
    let p = (3.0 - 3f64.sqrt()) / 6.0;
    let points = [(0.5, -0.5), (1.0, 0.3), (0.0, 0.0)];
    for ensemble in ENSEMBLES {
        let gaussian = config(ensemble, EntryKind::Gaussian, 4, 100_000, &points);
        let mut skewed = config(ensemble, EntryKind::TwoPoint { p }, 4, 100_000, &points);
        skewed.seed += 1;
        let (mg, ms) = (gaussian.dist.moments(), skewed.dist.moments());
        assert!((mg.m4 - ms.m4).abs() < 1e-12 && ms.m3.abs() > 0.5 * ms.m2.powf(1.5));
        let a = estimate_f(&gaussian).unwrap();
        let b = estimate_f(&skewed).unwrap();
        for (x, y) in a.iter().zip(&b) {
            let gap = (real(x.mean) - real(y.mean)).abs();
            let combined = real(x.stderr).hypot(real(y.stderr));
            assert!(
                gap <= 4.0 * combined,
                "{ensemble:?}: gap {gap} vs {combined}"
            );
        }
    }
}

#[test]
fn sigma_estimates_match_the_contour_value() {
    for ensemble in ENSEMBLES {
        let points = [(0.0, 1.0), (0.7, 0.7)];
        let cfg = config(ensemble, EntryKind::Gaussian, 4, 100_000, &points);
        let sigmas = estimate_sigma(&cfg).unwrap();
        let exact = sigma_alpha(ensemble.alpha(), 0.0, 0.0, 1.0, 4).unwrap();
        assert!(
            (sigmas[0].value - exact).abs() <= 4.0 * sigmas[0].stderr,
            "{ensemble:?}"
        );
        assert!((sigmas[1].value - 1.0).abs() <= 0.02);
    }
}

#[test]
fn one_by_one_gaussian_mean() {
    let cfg = config(
        EnsembleKind::Hermitian,
        EntryKind::Gaussian,
        1,
        100_000,
        &[(0.0, 0.0)],
    );
    let est = &estimate_f(&cfg).unwrap()[0];
    assert!((real(est.mean) - 1.0).abs() <= 4.0 * real(est.stderr));
}

#[test]
fn diagonal_entry_is_centered() {
    let cfg = config(EnsembleKind::Hermitian, EntryKind::Uniform, 3, 100_000, &[]);
    let mut sum = 0.0;
    for i in 0..cfg.samples as u64 {
        sum += sample_matrix(&cfg, &mut cfg.rng_for(i)).entry(0, 0).re;
    }
    let bound = 4.0 * (2.0 * cfg.dist.variance / cfg.samples as f64).sqrt();
    assert!((sum / cfg.samples as f64).abs() <= bound);
}

#[test]
fn hermitian_determinants_stay_real_at_n_64() {
    let cfg = config(
        EnsembleKind::Hermitian,
        EntryKind::Gaussian,
        64,
        100_000,
        &[],
    );
    for i in 0..cfg.samples as u64 {
        let m = sample_matrix(&cfg, &mut cfg.rng_for(i));
        if let WignerMatrix::Hermitian { n, entries } = &m {
            for r in 0..*n {
                assert_eq!(entries[r * n + r].im, 0.0);
                for c in 0..r {
                    assert_eq!(entries[r * n + c], entries[c * n + r].conj());
                }
            }
        }
        // char_poly_value refuses any imaginary residue above 1e-7 relative
        char_poly_value(&m, 3.5).unwrap_or_else(|e| panic!("sample {i}: {e}"));
    }
}
