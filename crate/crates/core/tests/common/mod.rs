#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use star_gns::packet::{GaussianPacket, PacketTerm, TestFunction};
use star_gns::theta::ThetaMatrix;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Random antisymmetric matrix with sup norm at most `sup_max`.
pub fn random_theta(rng: &mut ChaCha8Rng, dim: usize, sup_max: f64) -> ThetaMatrix {
    let mut upper = Vec::new();
    for mu in 0..dim {
        for nu in (mu + 1)..dim {
            upper.push((mu, nu, rng.random_range(-sup_max..sup_max)));
        }
    }
    ThetaMatrix::new(dim, &upper).expect("valid theta")
}

/// Well-conditioned random packet: unit-scale widths, bounded centers and
/// momenta, so every engine stays in its accurate regime.
pub fn random_packet(rng: &mut ChaCha8Rng, dim: usize) -> GaussianPacket {
    let mut width = DMatrix::<f64>::zeros(dim, dim);
    for i in 0..dim {
        width[(i, i)] = rng.random_range(0.7..1.5);
    }
    if dim > 1 {
        let off = rng.random_range(-0.15..0.15);
        width[(0, 1)] = off;
        width[(1, 0)] = off;
    }
    GaussianPacket::new(
        c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
        (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect(),
        (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect(),
        width,
    )
    .expect("valid packet")
}

pub fn random_function(rng: &mut ChaCha8Rng, dim: usize, terms: usize) -> TestFunction {
    let packets: Vec<GaussianPacket> = (0..terms).map(|_| random_packet(rng, dim)).collect();
    TestFunction::from_packets(&packets).expect("valid function")
}

/// Midpoint-rule quadrature of a constant-prefactor packet term over the
/// symmetric cube [-half, half]^dim, with an incremental chirp recurrence on
/// the innermost axis so no exp() is evaluated per sample.
pub fn quad_packet_term(term: &PacketTerm, half: f64, n: usize) -> Complex64 {
    let d = term.dim();
    assert!(term.poly.is_constant(), "quadrature helper needs constant prefactors");
    let scale = term.quad.scale * term.poly.constant_term();
    let dx = 2.0 * half / n as f64;
    let a = &term.quad.a;
    let b = &term.quad.b;
    let a_ll = a[(d - 1, d - 1)];
    let step = (-dx * dx * a_ll).exp();

    let outer_total: u64 = (n as u64).pow((d - 1) as u32);
    const CHUNK: u64 = 512;
    let chunks = outer_total.div_ceil(CHUNK);
    let partials: Vec<Complex64> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut acc = Complex64::ZERO;
            let mut u = vec![0.0f64; d];
            let lo = chunk * CHUNK;
            let hi = ((chunk + 1) * CHUNK).min(outer_total);
            for flat in lo..hi {
                let mut rest = flat;
                for axis in (0..d - 1).rev() {
                    let j = (rest % n as u64) as usize;
                    rest /= n as u64;
                    u[axis] = -half + (j as f64 + 0.5) * dx;
                }
                u[d - 1] = -half + 0.5 * dx;
                let q0 = term.quad.exponent(&u);
                let mut grad = b[d - 1];
                for k in 0..d {
                    grad -= a[(d - 1, k)] * u[k];
                }
                let mut v = q0.exp();
                let mut r = (dx * grad - 0.5 * dx * dx * a_ll).exp();
                for _ in 0..n {
                    acc += v;
                    v *= r;
                    r *= step;
                }
            }
            acc
        })
        .collect();
    partials.into_iter().sum::<Complex64>() * scale * Complex64::new(dx.powi(d as i32), 0.0)
}

/// Path to a shipped config at the workspace root.
pub fn config_path(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
}
