//! Independent oracles for the receiver metrics: closed-form Gray BER,
//! quadrature BMD rates, and the mismatched-prior penalty.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal};
use rustfft::num_complex::Complex64;

use pasim_core::alphabet::AmplitudeAlphabet;
use pasim_core::channel::{awgn, AwgnConfig};
use pasim_core::metrics::{
    effective_snr_db, pam_bit_vector_entropy, BmdAccumulator, Demapper,
};
use pasim_core::pas::PamConstellation;
use pasim_core::sim::{build_scheme, run_awgn_point, AwgnPointSpec, SchemeConfig, SchemeKind};

/// Complementary error function (Numerical-Recipes-style rational fit,
/// fractional error below 1.2e-7 everywhere).
fn erfc(x: f64) -> f64 {
    let z = x.abs();
    let t = 1.0 / (1.0 + 0.5 * z);
    let ans = t
        * (-z * z - 1.26551223
            + t * (1.00002368
                + t * (0.37409196
                    + t * (0.09678418
                        + t * (-0.18628806
                            + t * (0.27886807
                                + t * (-1.13520398
                                    + t * (1.48851587
                                        + t * (-0.82215223 + t * 0.17087277)))))))))
        .exp();
    if x >= 0.0 {
        ans
    } else {
        2.0 - ans
    }
}

fn q_func(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// Exact hard-decision BER of Gray-labeled uniform PAM with midpoint
/// thresholds: enumerate transmit points and integrate the Gaussian over
/// every opposite-bit decision interval.
fn gray_pam_ber(constellation: &PamConstellation, sigma_1d: f64) -> f64 {
    let points = constellation.points();
    let m = constellation.bits_per_symbol() as usize;
    let mut total = 0.0;
    for j in 0..m {
        let bit_of = |p: i32| constellation.label_bits(p).unwrap()[j];
        for &x in points {
            let mut err = 0.0;
            for (i, &p) in points.iter().enumerate() {
                if bit_of(p) == bit_of(x) {
                    continue;
                }
                let lo = if i == 0 {
                    f64::NEG_INFINITY
                } else {
                    (points[i - 1] + p) as f64 / 2.0
                };
                let hi = if i + 1 == points.len() {
                    f64::INFINITY
                } else {
                    (p + points[i + 1]) as f64 / 2.0
                };
                let upper = if hi.is_infinite() {
                    0.0
                } else {
                    q_func((hi - x as f64) / sigma_1d)
                };
                let lower = if lo.is_infinite() {
                    1.0
                } else {
                    q_func((lo - x as f64) / sigma_1d)
                };
                err += lower - upper;
            }
            total += err / points.len() as f64;
        }
    }
    total / m as f64
}

#[test]
fn uniform_qam_ber_matches_q_function_oracle() {
    let inst = build_scheme(&SchemeConfig::uniform(3), None).unwrap();
    let snr_db = 16.0;
    let report = run_awgn_point(
        &inst,
        &AwgnPointSpec {
            snr_db,
            min_qam_symbols: 200_000,
            seed: 31,
        },
    )
    .unwrap();
    // unit-energy QAM: per-PAM noise sigma^2 = sigma2_2d / 2, points scaled
    // by sqrt(2 E[a^2]) = sqrt(42)
    let sigma2_2d = 10f64.powf(-snr_db / 10.0);
    let sigma_1d = (sigma2_2d / 2.0).sqrt() * 42f64.sqrt();
    let oracle = gray_pam_ber(&inst.constellation, sigma_1d);
    let rel = (report.pre_fec_ber - oracle).abs() / oracle;
    assert!(
        rel < 0.05,
        "simulated {} vs oracle {oracle} ({rel:.3} relative)",
        report.pre_fec_ber
    );
}

#[test]
fn effective_snr_monte_carlo_matches_configuration() {
    let mut rng = ChaCha12Rng::seed_from_u64(5);
    let sigma2 = 0.04;
    let tx: Vec<Complex64> = (0..1_000_000)
        .map(|_| {
            Complex64::new(
                if rng.random::<bool>() { 0.5 } else { -0.5 },
                if rng.random::<bool>() { 0.5 } else { -0.5 },
            )
        })
        .collect();
    let cfg = AwgnConfig::from_noise_variance(sigma2 * 0.5).unwrap(); // E|X|^2 = 0.5
    let rx = awgn(&tx, &cfg, &mut rng);
    let expect = 10.0 * (0.5 / (sigma2 * 0.5)).log10();
    let got = effective_snr_db(&tx, &rx);
    assert!((got - expect).abs() < 0.05, "snr {got} vs {expect}");
}

/// Quadrature evaluation of the bitwise conditional entropy
/// `H(C_j|Y) = E_y[ H(C_j | Y = y) ]` for uniform PAM over AWGN.
fn quadrature_bmd_rate_per_pam(points: &[f64], labels: &[Vec<bool>], sigma_1d: f64) -> f64 {
    let m = labels[0].len();
    let span = 8.0 * sigma_1d;
    let lo = points.first().unwrap() - span;
    let hi = points.last().unwrap() + span;
    let steps = 40_000;
    let dy = (hi - lo) / steps as f64;
    let gauss = |y: f64, x: f64| {
        let d = (y - x) / sigma_1d;
        (-0.5 * d * d).exp() / (sigma_1d * (2.0 * std::f64::consts::PI).sqrt())
    };
    let prior = 1.0 / points.len() as f64;
    let mut cond = vec![0.0f64; m];
    for s in 0..steps {
        let y = lo + (s as f64 + 0.5) * dy;
        let like: Vec<f64> = points.iter().map(|&x| prior * gauss(y, x)).collect();
        let p_y: f64 = like.iter().sum();
        for (j, c) in cond.iter_mut().enumerate() {
            let p0: f64 = like
                .iter()
                .zip(labels)
                .filter(|(_, l)| !l[j])
                .map(|(v, _)| v)
                .sum();
            let q = p0 / p_y;
            if q > 0.0 && q < 1.0 {
                *c += p_y * dy * (-q * q.log2() - (1.0 - q) * (1.0 - q).log2());
            }
        }
    }
    m as f64 - cond.iter().sum::<f64>()
}

#[test]
fn bmd_estimator_reduces_to_classic_rate_on_a_toy_constellation() {
    // Uniform 4-PAM (one dimension of 16-QAM), R_L = 0: the Monte-Carlo
    // estimator must agree with direct numerical integration.
    let alphabet = AmplitudeAlphabet::for_bits(2).unwrap();
    let constellation = PamConstellation::brgc(2).unwrap();
    let dist = alphabet.uniform();
    let scale = (2.0 * dist.mean_energy()).sqrt(); // sqrt(10)
    let snr_db = 8.0;
    let sigma2_2d = 10f64.powf(-snr_db / 10.0);
    let sigma_1d = (sigma2_2d / 2.0).sqrt();

    let points: Vec<f64> = constellation.points().iter().map(|&p| p as f64 / scale).collect();
    let labels: Vec<Vec<bool>> = constellation
        .points()
        .iter()
        .map(|&p| constellation.label_bits(p).unwrap())
        .collect();
    let oracle_2d = 2.0 * quadrature_bmd_rate_per_pam(&points, &labels, sigma_1d);

    let demapper = Demapper::unit_energy(&constellation, &dist).unwrap();
    let mut rng = ChaCha12Rng::seed_from_u64(41);
    let normal = Normal::new(0.0, sigma_1d).unwrap();
    let mut acc = BmdAccumulator::new(2);
    let mut llrs = [0.0f64; 2];
    for _ in 0..400_000 {
        let idx = rng.random_range(0..4);
        let y = points[idx] + normal.sample(&mut rng);
        demapper.llrs(y, sigma2_2d, &mut llrs);
        acc.push(&labels[idx], &llrs);
    }
    let got = acc.air_n_2d(pam_bit_vector_entropy(&dist), 0.0);
    assert!(
        (got - oracle_2d).abs() < 0.01,
        "estimator {got} vs quadrature {oracle_2d}"
    );
}

#[test]
fn mismatched_uniform_priors_reduce_shaped_air() {
    // Same received record, two demappers: matched shaped priors beat
    // uniform priors for a shaped source.
    let alphabet = AmplitudeAlphabet::for_bits(3).unwrap();
    let constellation = PamConstellation::brgc(3).unwrap();
    let shaped = pasim_core::alphabet::mb_distribution(
        &alphabet,
        pasim_core::alphabet::fit_mb_for_entropy(&alphabet, 1.85).unwrap(),
    )
    .unwrap();
    let scale = (2.0 * shaped.mean_energy()).sqrt();
    let snr_db = 14.0;
    let sigma2_2d = 10f64.powf(-snr_db / 10.0);
    let sigma_1d = (sigma2_2d / 2.0).sqrt();

    let matched = Demapper::unit_energy(&constellation, &shaped).unwrap();
    // mismatched decoder: uniform priors, same scaling as the true source
    let uniform_priors = Demapper::new(&constellation, &alphabet.uniform(), scale).unwrap();

    let mut rng = ChaCha12Rng::seed_from_u64(57);
    let normal = Normal::new(0.0, sigma_1d).unwrap();
    let mut acc_matched = BmdAccumulator::new(3);
    let mut acc_uniform = BmdAccumulator::new(3);
    let cum: Vec<f64> = shaped
        .probabilities()
        .iter()
        .scan(0.0, |s, &p| {
            *s += p;
            Some(*s)
        })
        .collect();
    let mut llrs = [0.0f64; 3];
    for _ in 0..200_000 {
        let u: f64 = rng.random();
        let ai = cum.iter().position(|&c| u <= c).unwrap_or(3);
        let amp = alphabet.amplitudes()[ai];
        let sign: bool = rng.random();
        let x = constellation.point_for_sign_amplitude(sign, amp);
        let bits = constellation.label_bits(x).unwrap();
        let y = x as f64 / scale + normal.sample(&mut rng);
        matched.llrs(y, sigma2_2d, &mut llrs);
        acc_matched.push(&bits, &llrs);
        uniform_priors.llrs(y, sigma2_2d, &mut llrs);
        acc_uniform.push(&bits, &llrs);
    }
    let h_c = pam_bit_vector_entropy(&shaped);
    let air_matched = acc_matched.air_n_2d(h_c, 0.0);
    let air_uniform = acc_uniform.air_n_2d(h_c, 0.0);
    assert!(
        air_matched > air_uniform + 0.005,
        "matched {air_matched} vs uniform-prior {air_uniform}"
    );
}

#[test]
fn uniform_overtakes_shaped_at_high_snr() {
    // The shaped scheme saturates at 2 (1 + R_s); uniform keeps climbing.
    // (In this exact reproduction the crossover sits between 18 and
    // 20 dB.)
    let uniform = build_scheme(&SchemeConfig::uniform(3), None).unwrap();
    let shaped = build_scheme(
        &SchemeConfig::shaped(SchemeKind::Ess, 3, 200, 1.85, 0.4).unwrap(),
        None,
    )
    .unwrap();
    for snr_db in [20.0, 22.0] {
        let ru = run_awgn_point(
            &uniform,
            &AwgnPointSpec {
                snr_db,
                min_qam_symbols: 150_000,
                seed: 71,
            },
        )
        .unwrap();
        let rs = run_awgn_point(
            &shaped,
            &AwgnPointSpec {
                snr_db,
                min_qam_symbols: 150_000,
                seed: 72,
            },
        )
        .unwrap();
        assert!(
            ru.air_n_bits_per_2d > rs.air_n_bits_per_2d,
            "snr {snr_db}: uniform {} vs shaped {}",
            ru.air_n_bits_per_2d,
            rs.air_n_bits_per_2d
        );
    }
}
