use fbl_rmt::mc::*;
use fbl_rmt::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn snr5() -> f64 {
    10f64.powf(-0.5)
}

#[test]
fn summary_is_independent_of_thread_count() {
    let dims = ChannelDims::new(4, 6, 5, 8).unwrap();
    let mut cfg = McConfig::new(dims, ChannelKind::RayleighProduct, 0.5, 300, 42);
    cfg.retain_samples = true;
    cfg.threads = Some(1);
    let a = run_monte_carlo(&cfg).unwrap();
    cfg.threads = Some(4);
    let b = run_monte_carlo(&cfg).unwrap();
    cfg.threads = None;
    let c = run_monte_carlo(&cfg).unwrap();
    assert_eq!(a, b);
    assert_eq!(a, c);
    cfg.seed = 43;
    assert_ne!(run_monte_carlo(&cfg).unwrap().mid_mean, a.mid_mean);
}

#[test]
fn channel_draws_are_reproducible() {
    let dims = ChannelDims::new(3, 4, 2, 1).unwrap();
    let s = TrialStreams::new(9, 17);
    let a = sample_channel(&dims, ChannelKind::RayleighProduct, &s);
    let b = sample_channel(&dims, ChannelKind::RayleighProduct, &s);
    assert_eq!(a.h, b.h);
}

fn frobenius_moment(kind: ChannelKind) {
    let dims = ChannelDims::new(4, 6, 5, 1).unwrap();
    let t = 4000;
    let xs: Vec<f64> = (0..t)
        .map(|i| {
            sample_channel(&dims, kind, &TrialStreams::new(1, i))
                .h
                .norm_squared()
        })
        .collect();
    let mean = xs.iter().sum::<f64>() / t as f64;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (t - 1) as f64;
    let se = (var / t as f64).sqrt();
    assert!((mean - 6.0).abs() < 3.0 * se, "{kind}: {mean} +- {se}");
}

#[test]
fn channel_energy_matches_receive_dimension() {
    frobenius_moment(ChannelKind::RayleighProduct);
    frobenius_moment(ChannelKind::Rayleigh);
}

#[test]
fn noise_entries_have_unit_variance() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let w = complex_gaussian(100, 200, 1.0, &mut rng);
    let xs: Vec<f64> = w.iter().map(|v| v.norm_sqr()).collect();
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    assert!((mean - 1.0).abs() < 3.0 * (var / n).sqrt());
    let re_var = w.iter().map(|v| v.re * v.re).sum::<f64>() / n;
    assert!((re_var - 0.5).abs() < 0.02);
}

#[test]
fn codebook_gram_concentrates_near_inverse_rho() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let t = 200;
    let mean = (0..t)
        .map(|_| {
            let x = sphere_codebook(32, 128, &mut rng);
            assert!((x.norm_squared() / (32.0 * 128.0) - 1.0).abs() < 1e-12);
            trace_a_sq(&x, 128)
        })
        .sum::<f64>()
        / t as f64;
    assert!((mean - 0.25).abs() < 0.05 * 0.25, "{mean}");
}

#[test]
fn fixed_codebook_mode_shares_x() {
    let dims = ChannelDims::new(4, 6, 5, 8).unwrap();
    let mut cfg = McConfig::new(dims, ChannelKind::RayleighProduct, 0.5, 50, 2);
    cfg.codebook = CodebookMode::Fixed;
    let s = run_monte_carlo(&cfg).unwrap();
    assert_eq!(s.tr_a2_var, 0.0);
    assert_eq!(s.trials, 50);
    assert_eq!(s.failures, 0);
}

#[test]
fn mi_mean_matches_ergodic_closed_form() {
    let dims = ChannelDims::new(16, 32, 64, 64).unwrap();
    let cfg = McConfig::new(dims, ChannelKind::RayleighProduct, snr5(), 10_000, 7);
    let s = run_monte_carlo(&cfg).unwrap();
    let se = (s.mi_var / s.trials as f64).sqrt();
    let fp = fixed_point(2.0, 0.25, snr5()).unwrap();
    let c = ergodic_mi(&fp).unwrap();
    assert_eq!(c, s.c_bar);
    assert!(
        (s.mi_mean - c).abs() < 3.0 * se,
        "{} vs {c} (se {se})",
        s.mi_mean
    );
}

#[test]
fn rayleigh_mi_mean_matches_closed_form() {
    let dims = ChannelDims::new(16, 16, 1, 16).unwrap();
    let cfg = McConfig::new(dims, ChannelKind::Rayleigh, snr5(), 10_000, 8);
    let s = run_monte_carlo(&cfg).unwrap();
    let se = (s.mi_var / s.trials as f64).sqrt();
    let r = rayleigh_moments(1.0, snr5(), 1.0, 0.0).unwrap();
    assert!(
        (s.mi_mean - r.c_bar_ray).abs() < 3.0 * se,
        "{} vs {}",
        s.mi_mean,
        r.c_bar_ray
    );
}

#[test]
fn resolvent_traces_small_system() {
    let dims = ChannelDims::new(16, 32, 16, 1).unwrap();
    let rep = resolvent_checks(&dims, ChannelKind::RayleighProduct, 0.5, 400, 5, None).unwrap();
    for (est, target, se) in rep.pairs() {
        // O(1/M^2) bias is ~4e-3 here
        assert!(
            (est - target).abs() <= 3.0 * se + 1e-2,
            "{est} {target} {se}"
        );
    }
}

#[test]
fn sample_dump_roundtrip() {
    let dims = ChannelDims::new(2, 3, 2, 4).unwrap();
    let mut cfg = McConfig::new(dims, ChannelKind::RayleighProduct, 1.0, 20, 0);
    cfg.retain_samples = true;
    let s = run_monte_carlo(&cfg).unwrap();
    let samples = s.samples.as_ref().unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("x.bin");
    write_samples(&path, samples, DumpFormat::Binary).unwrap();
    assert_eq!(std::fs::read(&path).unwrap().len(), 8 * samples.len());
}
