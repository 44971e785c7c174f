//! Acceptance suite: one test per shipped guarantee, each printing a PASS
//! line with the measured value against its pinned threshold.
//!
//! Thresholds are fixed here, not tuned at runtime. The slow four-point
//! quadrature oracle lives in `oracles.rs` behind `--ignored`.

mod common;

use common::{c, config_path, random_function, random_packet, random_theta};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use star_gns::experiment::{deterministic_blocks, run, ExperimentConfig};
use star_gns::gns::{
    apply_field_operator, commutative_limit_sweep, gram, isotropic_quotient, krein_decompose,
    word_vector, GramMatrix, GramOptions, SequenceVector,
};
use star_gns::grid::BoxSpec;
use star_gns::linalg::hermitian_eigen;
use star_gns::packet::TestFunction;
use star_gns::profile::{DampingProfile, StarVariant};
use star_gns::star::{
    sample, star_chain_fourier, star_fft, star_fft_grids, star_gaussian_closed, star_series,
    tilde_star_2pt, SeriesOrder, StarChain,
};
use star_gns::theta::ThetaMatrix;
use star_gns::wightman::ModeField;
use std::f64::consts::PI;

// pinned tolerances
const COMMUTATOR_EXACT: f64 = 0.0; // machine-exact, asserted by equality
const FFT_VS_CLOSED: f64 = 1e-8;
const SERIES_VS_CLOSED: f64 = 1e-6;
const FFT_DEGENERATION: f64 = 1e-10;
const CONJ_REVERSAL: f64 = 1e-10;
const ASSOCIATIVITY: f64 = 1e-7;
const TRACE_IDENTITY: f64 = 1e-8;
const HERMITICITY_NPOINT: f64 = 1e-11;
const GRAM_HERMITICITY: f64 = 1e-10;
const GRAM_HAND_FORMULA: f64 = 1e-10;
const KREIN_RECONSTRUCTION: f64 = 1e-10;
const SWEEP_SLOPE_MIN: f64 = 0.9;

fn grid_rel(diff: f64, reference: f64) -> f64 {
    if reference == 0.0 {
        if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        diff / reference
    }
}

fn test_box() -> BoxSpec {
    BoxSpec::cube(2, 10.0, 128).unwrap()
}

#[test]
fn criterion_01_coordinate_commutator_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let order = SeriesOrder::new(2).unwrap();
    for trial in 0..10 {
        let dim = if trial % 2 == 0 { 2 } else { 4 };
        let theta = random_theta(&mut rng, dim, 0.5);
        for mu in 0..dim {
            for nu in (mu + 1)..dim {
                let xa = TestFunction::coordinate(dim, mu).unwrap();
                let xb = TestFunction::coordinate(dim, nu).unwrap();
                let fwd = star_series(&xa, &xb, &theta, order).unwrap();
                let rev = star_series(&xb, &xa, &theta, order).unwrap();
                let comm = fwd.add(&rev.scale(c(-1.0, 0.0))).unwrap();
                for _ in 0..5 {
                    let x: Vec<f64> = (0..dim).map(|_| rng.random_range(-3.0..3.0)).collect();
                    assert_eq!(
                        comm.eval(&x),
                        c(0.0, theta.entry(mu, nu)),
                        "commutator not exact at theta[{mu}][{nu}]"
                    );
                }
            }
        }
    }
    println!(
        "criterion 01 PASS: coordinate commutator exact to machine precision (tolerance {COMMUTATOR_EXACT})"
    );
}

#[test]
fn criterion_02_engine_cross_validation() {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let spec = test_box();
    let order = SeriesOrder::new(8).unwrap();
    let mut worst_fft = 0.0f64;
    let mut worst_series = 0.0f64;
    for _ in 0..50 {
        let theta = ThetaMatrix::new(2, &[(0, 1, rng.random_range(0.005..0.1))]).unwrap();
        let f = TestFunction::gaussian(random_packet(&mut rng, 2));
        let g = TestFunction::gaussian(random_packet(&mut rng, 2));
        let closed = star_gaussian_closed(&f, &g, &theta).unwrap();
        let reference = sample(&closed, &spec);
        let scale = reference.max_abs();

        let fft = star_fft(&f, &g, &theta, &spec).unwrap();
        worst_fft = worst_fft.max(grid_rel(fft.max_abs_diff(&reference), scale));

        let series = sample(&star_series(&f, &g, &theta, order).unwrap(), &spec);
        worst_series = worst_series.max(grid_rel(series.max_abs_diff(&reference), scale));
    }
    assert!(worst_fft < FFT_VS_CLOSED, "fft vs closed {worst_fft:.3e}");
    assert!(
        worst_series < SERIES_VS_CLOSED,
        "series vs closed {worst_series:.3e}"
    );
    println!(
        "criterion 02 PASS: engines agree on 50 random pairs \
         (fft vs closed {worst_fft:.3e} < {FFT_VS_CLOSED:.0e}, \
         series vs closed {worst_series:.3e} < {SERIES_VS_CLOSED:.0e})"
    );
}

#[test]
fn criterion_03_commutative_degeneration() {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let theta = ThetaMatrix::zero(2);
    let spec = test_box();
    let order = SeriesOrder::new(6).unwrap();
    let mut worst_fft = 0.0f64;
    for _ in 0..10 {
        let f = TestFunction::gaussian(random_packet(&mut rng, 2));
        let g = TestFunction::gaussian(random_packet(&mut rng, 2));
        let product = f.pointwise_mul(&g).unwrap();

        // series path: exactly the pointwise product
        let series = star_series(&f, &g, &theta, order).unwrap();
        for _ in 0..10 {
            let x = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
            assert_eq!(series.eval(&x), product.eval(&x), "series not exact at theta=0");
        }

        let reference = sample(&product, &spec);
        let fft = star_fft(&f, &g, &theta, &spec).unwrap();
        worst_fft = worst_fft.max(grid_rel(fft.max_abs_diff(&reference), reference.max_abs()));
    }
    assert!(worst_fft < FFT_DEGENERATION, "fft at theta=0: {worst_fft:.3e}");
    println!(
        "criterion 03 PASS: theta=0 degenerates to the pointwise product \
         (series exact, fft {worst_fft:.3e} < {FFT_DEGENERATION:.0e})"
    );
}

#[test]
fn criterion_04_conjugation_reversal() {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut worst = 0.0f64;
    for n in 2..=5usize {
        let theta = random_theta(&mut rng, 2, 0.3);
        let funcs: Vec<TestFunction> = (0..n).map(|_| random_function(&mut rng, 2, 2)).collect();
        let chain = StarChain::plain(funcs.clone(), theta.clone()).unwrap();
        let rev_conj: Vec<TestFunction> = funcs.iter().rev().map(|f| f.conj()).collect();
        let rev_chain = StarChain::plain(rev_conj, theta).unwrap();
        for _ in 0..100 {
            let ks: Vec<Vec<f64>> = (0..n)
                .map(|_| vec![rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)])
                .collect();
            let fwd = star_chain_fourier(&chain, &ks).unwrap();
            let rev_ks: Vec<Vec<f64>> = ks.iter().rev().map(|k| vec![-k[0], -k[1]]).collect();
            let rev = star_chain_fourier(&rev_chain, &rev_ks).unwrap();
            worst = worst.max((rev - fwd.conj()).norm() / fwd.norm().max(1e-30));
        }
    }
    assert!(worst < CONJ_REVERSAL, "reversal defect {worst:.3e}");
    println!(
        "criterion 04 PASS: conjugation-reversal identity, n = 2..5 \
         ({worst:.3e} < {CONJ_REVERSAL:.0e})"
    );
}

#[test]
fn criterion_05_associativity_and_trace() {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let spec = test_box();
    let mut worst_assoc = 0.0f64;
    let mut worst_trace = 0.0f64;
    for trial in 0..20 {
        let theta = ThetaMatrix::new(2, &[(0, 1, rng.random_range(0.02..0.15))]).unwrap();
        let f = TestFunction::gaussian(random_packet(&mut rng, 2));
        let g = TestFunction::gaussian(random_packet(&mut rng, 2));

        // trace property on every pair
        let starred = star_fft(&f, &g, &theta, &spec).unwrap().integral();
        let plain = sample(&f.pointwise_mul(&g).unwrap(), &spec).integral();
        worst_trace = worst_trace.max((starred - plain).norm() / plain.norm());

        // associativity on every other trial (two extra products each)
        if trial % 2 == 0 {
            let h = TestFunction::gaussian(random_packet(&mut rng, 2));
            let fg = star_fft(&f, &g, &theta, &spec).unwrap();
            let left = star_fft_grids(&fg, &sample(&h, &spec), &theta).unwrap();
            let gh = star_fft(&g, &h, &theta, &spec).unwrap();
            let right = star_fft_grids(&sample(&f, &spec), &gh, &theta).unwrap();
            worst_assoc =
                worst_assoc.max(grid_rel(left.max_abs_diff(&right), left.max_abs()));
        }
    }
    assert!(worst_assoc < ASSOCIATIVITY, "associativity {worst_assoc:.3e}");
    assert!(worst_trace < TRACE_IDENTITY, "trace {worst_trace:.3e}");
    println!(
        "criterion 05 PASS: associativity {worst_assoc:.3e} < {ASSOCIATIVITY:.0e}, \
         trace {worst_trace:.3e} < {TRACE_IDENTITY:.0e}"
    );
}

#[test]
fn criterion_06_hermiticity_field_and_gram() {
    let field = ModeField::new(1.0, 2.0 * PI, 3).unwrap();
    let mut worst_dev = 0.0f64;
    for (n, samples) in [(2usize, 200usize), (4, 100), (6, 30)] {
        let dev = field.hermiticity_check(n, samples, 600 + n as u64).unwrap();
        worst_dev = worst_dev.max(dev);
        assert!(dev < HERMITICITY_NPOINT, "n={n} deviation {dev:.3e}");
    }

    // every shipped basis-bearing config yields a Hermitian Gram
    let mut worst_gram = 0.0f64;
    for name in ["gram.json", "limit_sweep.json", "cyclicity.json"] {
        let cfg = ExperimentConfig::from_json(
            &std::fs::read_to_string(config_path(name)).unwrap(),
        )
        .unwrap();
        let functions = cfg.build_functions().unwrap();
        let field = cfg.require_field().unwrap();
        let theta = cfg.require_theta().unwrap();
        let basis = match cfg.vectors {
            Some(_) => cfg.require_vectors(&functions).unwrap(),
            None => {
                // generator-style config: all words up to the level cap
                let mut vs = vec![SequenceVector::vacuum()];
                for f in &functions {
                    vs.push(apply_field_operator(f, &SequenceVector::vacuum()).unwrap());
                }
                vs
            }
        };
        let g = gram(&basis, &field, &theta, &GramOptions::default()).unwrap();
        worst_gram = worst_gram.max(g.hermiticity_residual());
    }
    assert!(worst_gram < GRAM_HERMITICITY, "gram residual {worst_gram:.3e}");
    println!(
        "criterion 06 PASS: n-point deviation {worst_dev:.3e} < {HERMITICITY_NPOINT:.0e}, \
         shipped-basis Gram residual {worst_gram:.3e} < {GRAM_HERMITICITY:.0e}"
    );
}

/// Independent single-mode evaluator: explicit pairing enumeration, packet
/// transforms, and twist phases assembled by hand.
fn hand_gram_entry_k0(
    field: &ModeField,
    theta: &ThetaMatrix,
    bra_word: &[&TestFunction],
    ket_word: &[&TestFunction],
) -> Complex64 {
    // slots: conjugated bra functions in reverse order, then the ket functions
    let slots: Vec<TestFunction> = bra_word
        .iter()
        .rev()
        .map(|f| f.conj())
        .chain(ket_word.iter().map(|f| (*f).clone()))
        .collect();
    let n = slots.len();
    if n == 0 {
        return Complex64::ONE;
    }
    if n % 2 == 1 {
        return Complex64::ZERO;
    }
    let p0 = [field.omega(0), 0.0];
    let w = 1.0 / (2.0 * field.omega(0) * field.box_length());
    let hats: Vec<TestFunction> = slots.iter().map(|f| f.fourier().unwrap()).collect();

    // enumerate matchings of 0..n recursively
    fn matchings(free: Vec<usize>) -> Vec<Vec<(usize, usize)>> {
        if free.is_empty() {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        let first = free[0];
        for i in 1..free.len() {
            let partner = free[i];
            let rest: Vec<usize> = free[1..]
                .iter()
                .copied()
                .filter(|&x| x != partner)
                .collect();
            for mut tail in matchings(rest) {
                tail.insert(0, (first, partner));
                out.push(tail);
            }
        }
        out
    }

    let mut total = Complex64::ZERO;
    for pairing in matchings((0..n).collect()) {
        // K = 0: one mode, earlier slot +p0, later slot -p0
        let mut momenta = vec![[0.0f64; 2]; n];
        for &(a, b) in &pairing {
            momenta[a] = p0;
            momenta[b] = [-p0[0], -p0[1]];
        }
        let mut term = Complex64::new(w.powi((n / 2) as i32), 0.0);
        for (slot, hat) in hats.iter().enumerate() {
            term *= hat.eval(&momenta[slot]);
        }
        let mut arg = 0.0;
        for u in 0..n {
            for v in (u + 1)..n {
                arg += theta.bilinear(&momenta[u], &momenta[v]);
            }
        }
        total += term * c(0.0, -0.5 * arg).exp();
    }
    total
}

#[test]
fn criterion_07_gram_matches_hand_formula() {
    let field = ModeField::new(1.0, 2.0 * PI, 0).unwrap();
    let theta = ThetaMatrix::new(2, &[(0, 1, 0.1)]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let f = TestFunction::gaussian(random_packet(&mut rng, 2));
    let g = TestFunction::gaussian(random_packet(&mut rng, 2));
    let functions = [f.clone(), g.clone()];
    let words: Vec<Vec<usize>> = vec![vec![], vec![0], vec![1], vec![0, 1]];
    let basis: Vec<SequenceVector> = words
        .iter()
        .map(|w| word_vector(&functions, w).unwrap())
        .collect();
    let gm = gram(&basis, &field, &theta, &GramOptions::default()).unwrap();

    let scale = gm.max_abs();
    let mut worst = 0.0f64;
    for (i, wa) in words.iter().enumerate() {
        for (j, wb) in words.iter().enumerate() {
            let bra: Vec<&TestFunction> = wa.iter().map(|&k| &functions[k]).collect();
            let ket: Vec<&TestFunction> = wb.iter().map(|&k| &functions[k]).collect();
            let hand = hand_gram_entry_k0(&field, &theta, &bra, &ket);
            worst = worst.max((gm.entries()[(i, j)] - hand).norm() / scale);
        }
    }
    assert!(worst < GRAM_HAND_FORMULA, "hand formula defect {worst:.3e}");
    println!(
        "criterion 07 PASS: single-mode Gram matches the hand pairing formula \
         ({worst:.3e} < {GRAM_HAND_FORMULA:.0e}); run the ignored quadrature \
         oracle for the slow n=4 check"
    );
}

#[test]
fn criterion_08_quotient_counts_duplicates() {
    let field = ModeField::new(1.0, 2.0 * PI, 0).unwrap();
    let theta = ThetaMatrix::new(2, &[(0, 1, 0.1)]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let f = TestFunction::gaussian(random_packet(&mut rng, 2));
    let g = TestFunction::gaussian(random_packet(&mut rng, 2));
    let functions = [f, g];

    let unique_words: Vec<Vec<usize>> = vec![vec![], vec![0], vec![0, 1]];
    let duplicated: Vec<usize> = vec![1, 2]; // inject copies of words 1 and 2
    let mut words = unique_words.clone();
    for &d in &duplicated {
        words.push(unique_words[d].clone());
    }
    let basis: Vec<SequenceVector> = words
        .iter()
        .map(|w| word_vector(&functions, w).unwrap())
        .collect();
    let gm = gram(&basis, &field, &theta, &GramOptions::default()).unwrap();
    let q = isotropic_quotient(&gm).unwrap();
    assert_eq!(q.null_dim, duplicated.len(), "null dimension");
    // the reduced spectrum is cleanly separated from zero
    let min_eig = (0..q.reduced.n())
        .map(|i| q.reduced.entries()[(i, i)].norm())
        .fold(f64::INFINITY, f64::min);
    let max_eig = (0..q.reduced.n())
        .map(|i| q.reduced.entries()[(i, i)].norm())
        .fold(0.0f64, f64::max);
    assert!(min_eig > gm.tolerance() * max_eig);
    println!(
        "criterion 08 PASS: {} injected duplicates produce null_dim {}, reduced spectrum clear of zero",
        duplicated.len(),
        q.null_dim
    );
}

#[test]
fn criterion_09_krein_signatures_on_scrambled_matrices() {
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let mut worst_rec = 0.0f64;
    for _ in 0..10 {
        let n = rng.random_range(2..=6);
        let signs: Vec<f64> = (0..n).map(|_| if rng.random_bool(0.5) { 1.0 } else { -1.0 }).collect();
        let expected = (
            signs.iter().filter(|&&s| s > 0.0).count(),
            signs.iter().filter(|&&s| s < 0.0).count(),
        );
        let d = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                c(signs[i], 0.0)
            } else {
                Complex64::ZERO
            }
        });
        let s = DMatrix::from_fn(n, n, |i, j| {
            let base = if i == j { 1.0 } else { 0.0 };
            c(
                base + 0.15 * rng.random_range(-1.0..1.0),
                0.15 * rng.random_range(-1.0..1.0),
            )
        });
        let m = &s * d * s.adjoint();
        let gm = GramMatrix::from_entries(vec![], m, 1e-10).unwrap();
        let k = krein_decompose(&gm, 0).unwrap();
        assert_eq!(k.signature, expected, "Sylvester signature");
        worst_rec = worst_rec.max(k.reconstruction_residual() / gm.max_abs());
        // the definite product is positive definite
        let eig = hermitian_eigen(&k.definite_product_matrix()).unwrap();
        assert!(eig.values[0] > 0.0, "definite product min eigenvalue {}", eig.values[0]);
        // cross-block orthogonality
        assert!(k.cross_block_defect() < 1e-10 * gm.max_abs());
    }
    assert!(worst_rec < KREIN_RECONSTRUCTION, "reconstruction {worst_rec:.3e}");
    println!(
        "criterion 09 PASS: 10 scrambled signatures recovered exactly, \
         reconstruction {worst_rec:.3e} < {KREIN_RECONSTRUCTION:.0e}"
    );
}

#[test]
fn criterion_10_commutative_limit() {
    let cfg = ExperimentConfig::from_json(
        &std::fs::read_to_string(config_path("limit_sweep.json")).unwrap(),
    )
    .unwrap();
    let functions = cfg.build_functions().unwrap();
    let basis = cfg.require_vectors(&functions).unwrap();
    assert!(
        basis.iter().any(|v| v.max_level() >= 2),
        "sweep basis must contain a level-2 chain"
    );
    let field = cfg.require_field().unwrap();
    let pattern = cfg.require_theta().unwrap();
    let sup0 = pattern.sup_norm();
    let thetas: Vec<ThetaMatrix> = [0.1, 0.03, 0.01, 0.003, 0.0]
        .iter()
        .map(|&s| pattern.scaled(s / sup0))
        .collect();
    let sweep = commutative_limit_sweep(&basis, &field, &thetas, &GramOptions::default()).unwrap();
    assert!(sweep.monotone, "rows {:?}", sweep.rows);
    assert!(sweep.final_exact_zero);
    let slope = sweep.slope.expect("slope fit");
    assert!(slope >= SWEEP_SLOPE_MIN, "slope {slope}");
    println!(
        "criterion 10 PASS: deviation monotone over theta sweep, log-log slope \
         {slope:.3} >= {SWEEP_SLOPE_MIN}"
    );
}

#[test]
fn criterion_11_damped_variant_consistency() {
    let theta = ThetaMatrix::new(2, &[(0, 1, 0.05)]).unwrap();
    let theta_sup = theta.sup_norm();
    let alpha = 0.5;
    let epsilon = 0.05;
    assert!(alpha / theta_sup >= 10.0);
    let xi_profile = DampingProfile::gaussian_xi(1.0, theta_sup).unwrap();
    let eta_profile = DampingProfile::plateau_eta(alpha, epsilon).unwrap();
    let xi = StarVariant::xi_damped(xi_profile.clone()).unwrap();
    let eta = StarVariant::eta_regularized(eta_profile).unwrap();

    let f = TestFunction::unit_gaussian(2);
    let g = TestFunction::gaussian(
        star_gns::packet::GaussianPacket::isotropic(c(0.8, 0.2), vec![0.3, -0.2], vec![0.4, 0.1], 1.2)
            .unwrap(),
    );
    let base = BoxSpec::cube(2, 8.0, 16).unwrap();
    let plain = tilde_star_2pt(&StarVariant::plain(), &f, &g, &theta, &base).unwrap();
    let damped_xi = tilde_star_2pt(&xi, &f, &g, &theta, &base).unwrap();
    let damped_eta = tilde_star_2pt(&eta, &f, &g, &theta, &base).unwrap();

    // coinciding points: both variants reduce to the plain product
    let pd = plain.diagonal(&base).unwrap();
    let xd = damped_xi.diagonal(&base).unwrap();
    let ed = damped_eta.diagonal(&base).unwrap();
    assert!(xd.max_abs_diff(&pd) < 1e-12 * pd.max_abs());
    assert!(ed.max_abs_diff(&pd) < 1e-12 * pd.max_abs());

    // beyond the eta cutoff the xi-eta discrepancy obeys the Gaussian envelope
    let bound = xi_profile.c * (-(alpha - epsilon) / theta_sup).exp();
    let sq = base.squared().unwrap();
    let shape = sq.counts().to_vec();
    let mut checked = 0usize;
    star_gns::grid::for_each_index(&shape, |idx| {
        let p = sq.point(idx);
        let diff = [p[0] - p[2], p[1] - p[3]];
        let sep_sq = DampingProfile::max_norm_sq(&diff);
        if sep_sq >= alpha {
            let dxi = damped_xi.value(idx);
            let deta = damped_eta.value(idx);
            let plain_v = plain.value(idx);
            assert!(
                (dxi - deta).norm() <= bound * plain_v.norm() * (1.0 + 1e-12),
                "bound violated at separation^2 {sep_sq}"
            );
            checked += 1;
        }
    });
    assert!(checked > 1000, "too few off-diagonal samples: {checked}");
    println!(
        "criterion 11 PASS: damped variants coincide on the diagonal; xi-eta \
         discrepancy bounded by {bound:.3e} outside the plateau ({checked} samples)"
    );
}

#[test]
fn criterion_12_determinism_of_shipped_configs() {
    for name in [
        "star_eval.json",
        "gram.json",
        "quotient_krein.json",
        "limit_sweep.json",
        "hermiticity.json",
        "cyclicity.json",
    ] {
        let cfg =
            ExperimentConfig::from_json(&std::fs::read_to_string(config_path(name)).unwrap())
                .unwrap();
        let a = run(&cfg).unwrap();
        let b = run(&cfg).unwrap();
        let block_a = serde_json::to_vec(&deterministic_blocks(&a.report)).unwrap();
        let block_b = serde_json::to_vec(&deterministic_blocks(&b.report)).unwrap();
        assert_eq!(block_a, block_b, "{name} is not deterministic");
        assert!(a.all_pass, "{name} checks failed: {}", a.report["verdicts"]);
    }
    println!("criterion 12 PASS: all six shipped configs are byte-deterministic and green");
}

#[test]
fn krein_pipeline_on_free_field_gram_is_positive() {
    // companion to criteria 8/9: the physical Gram decomposes with empty
    // negative part after the quotient
    let field = ModeField::new(1.0, 2.0 * PI, 1).unwrap();
    let theta = ThetaMatrix::new(2, &[(0, 1, 0.1)]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(111);
    let f = TestFunction::gaussian(random_packet(&mut rng, 2));
    let vac = SequenceVector::vacuum();
    let one = apply_field_operator(&f, &vac).unwrap();
    let two = apply_field_operator(&f, &one).unwrap();
    let gm = gram(&[vac, one, two], &field, &theta, &GramOptions::default()).unwrap();
    let q = isotropic_quotient(&gm).unwrap();
    let k = krein_decompose(&q.reduced, q.null_dim).unwrap();
    assert_eq!(k.signature.1, 0);
    assert_eq!(k.signature.0, 3 - q.null_dim);
    let x = DVector::from_fn(q.reduced.n(), |i, _| c(1.0 / (i as f64 + 1.0), 0.2));
    let norm_sq = k.definite_product(&x, &x).re;
    assert!(norm_sq > 0.0);
}
