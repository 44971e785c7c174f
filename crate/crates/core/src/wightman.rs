//! An exactly computable correlation family: the free scalar field on a
//! spatial circle with a momentum cutoff, in 1+1 dimensions.
//!
//! The two-point function is a finite mode sum, higher correlators follow by
//! pairing expansion, and smearing a star chain against them collapses into a
//! finite sum of chain transforms evaluated at the mode momenta: the earlier
//! slot of each pair carries +p_j = (omega_j, k_j), the later slot -p_j.

use crate::error::{Error, Result};
use crate::packet::TestFunction;
use crate::star::chain::StarChain;
use crate::theta::ThetaMatrix;
use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Spacetime dimension of the mode field: one time plus one space.
pub const SPACETIME_DIM: usize = 2;

/// Free scalar field with mass `m`, circle length `L`, and modes
/// `k_j = 2 pi j / L` for `j = -cutoff ..= cutoff`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeField {
    mass: f64,
    box_length: f64,
    cutoff: i64,
}

/// All perfect matchings of {0, .., n-1}, each pair ordered (a < b) and the
/// list in a deterministic order.
#[derive(Debug, Clone)]
pub struct PairingTable {
    n: usize,
    pairings: Vec<Vec<(usize, usize)>>,
}

impl PairingTable {
    pub fn new(n: usize) -> Result<Self> {
        if n % 2 != 0 {
            return Err(Error::invalid(format!("pairings need an even count, got {n}")));
        }
        let mut pairings = Vec::new();
        let mut free: Vec<usize> = (0..n).collect();
        let mut current = Vec::new();
        build(&mut free, &mut current, &mut pairings);
        Ok(Self { n, pairings })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn pairings(&self) -> &[Vec<(usize, usize)>] {
        &self.pairings
    }

    pub fn count(&self) -> usize {
        self.pairings.len()
    }

    /// (n - 1)!! for even n.
    pub fn expected_count(n: usize) -> u128 {
        let mut acc: u128 = 1;
        let mut k = n as u128;
        while k > 1 {
            acc *= k - 1;
            k -= 2;
        }
        acc
    }
}

fn build(free: &mut Vec<usize>, current: &mut Vec<(usize, usize)>, out: &mut Vec<Vec<(usize, usize)>>) {
    if free.is_empty() {
        out.push(current.clone());
        return;
    }
    let first = free[0];
    for i in 1..free.len() {
        let partner = free[i];
        let mut rest: Vec<usize> = free
            .iter()
            .copied()
            .filter(|&x| x != first && x != partner)
            .collect();
        current.push((first, partner));
        build(&mut rest, current, out);
        current.pop();
    }
}

impl ModeField {
    pub fn new(mass: f64, box_length: f64, cutoff: i64) -> Result<Self> {
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::invalid(format!("mass must be positive, got {mass}")));
        }
        if !(box_length > 0.0 && box_length.is_finite()) {
            return Err(Error::invalid(format!(
                "box length must be positive, got {box_length}"
            )));
        }
        if cutoff < 0 {
            return Err(Error::invalid(format!("cutoff must be >= 0, got {cutoff}")));
        }
        Ok(Self {
            mass,
            box_length,
            cutoff,
        })
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn box_length(&self) -> f64 {
        self.box_length
    }

    pub fn cutoff(&self) -> i64 {
        self.cutoff
    }

    pub fn momentum(&self, j: i64) -> f64 {
        2.0 * std::f64::consts::PI * j as f64 / self.box_length
    }

    pub fn omega(&self, j: i64) -> f64 {
        let k = self.momentum(j);
        (k * k + self.mass * self.mass).sqrt()
    }

    fn weight(&self, j: i64) -> f64 {
        1.0 / (2.0 * self.omega(j) * self.box_length)
    }

    /// The spacetime mode momentum p_j = (omega_j, k_j).
    pub fn mode_vector(&self, j: i64) -> [f64; 2] {
        [self.omega(j), self.momentum(j)]
    }

    /// Two-point value
    /// `sum_j weight(j) exp(-i omega_j (t_x - t_y) + i k_j (s_x - s_y))`.
    pub fn two_point(&self, x: [f64; 2], y: [f64; 2]) -> Complex64 {
        let dt = x[0] - y[0];
        let ds = x[1] - y[1];
        let mut acc = Complex64::ZERO;
        for j in -self.cutoff..=self.cutoff {
            let phase = -self.omega(j) * dt + self.momentum(j) * ds;
            acc += self.weight(j) * Complex64::new(0.0, phase).exp();
        }
        acc
    }

    /// Pairing expansion of the unsmeared n-point function at explicit points.
    pub fn npoint(&self, points: &[[f64; 2]]) -> Result<Complex64> {
        let n = points.len();
        if n == 0 {
            return Ok(Complex64::ONE);
        }
        if n % 2 == 1 {
            return Ok(Complex64::ZERO);
        }
        let table = PairingTable::new(n)?;
        let mut acc = Complex64::ZERO;
        for pairing in table.pairings() {
            let mut term = Complex64::ONE;
            for &(a, b) in pairing {
                term *= self.two_point(points[a], points[b]);
            }
            acc += term;
        }
        Ok(acc)
    }

    /// Number of (pairing, mode tuple) terms of the smeared n-point sum.
    pub fn wick_term_count(&self, n: usize) -> u128 {
        if n == 0 || n % 2 == 1 {
            return 0;
        }
        let modes = (2 * self.cutoff + 1) as u128;
        modes.pow((n / 2) as u32) * PairingTable::expected_count(n)
    }

    /// Smeared n-point functional of an ordered slot list: the integral of
    /// W_n against the star chain, as an exact finite sum over pairings and
    /// mode assignments. Odd length gives exactly zero; the empty list is 1.
    pub(crate) fn wick_smeared_slots(
        &self,
        slots: &[&TestFunction],
        theta: &ThetaMatrix,
        budget: u64,
    ) -> Result<Complex64> {
        let n = slots.len();
        if n == 0 {
            return Ok(Complex64::ONE);
        }
        if n % 2 == 1 {
            return Ok(Complex64::ZERO);
        }
        if theta.dim() != SPACETIME_DIM {
            return Err(Error::DimensionMismatch {
                expected: SPACETIME_DIM,
                got: theta.dim(),
            });
        }
        for f in slots {
            if f.dim() != SPACETIME_DIM {
                return Err(Error::DimensionMismatch {
                    expected: SPACETIME_DIM,
                    got: f.dim(),
                });
            }
        }
        if slots.iter().any(|f| f.is_zero()) {
            return Ok(Complex64::ZERO);
        }
        if n > 16 {
            return Err(Error::invalid(format!("smeared functional supports n <= 16, got {n}")));
        }
        let required = self.wick_term_count(n);
        if required > budget as u128 {
            return Err(Error::BudgetExceeded {
                required,
                budget: budget as u128,
                context: String::new(),
            });
        }

        let n_modes = (2 * self.cutoff + 1) as usize;
        let half = n / 2;

        // slot transforms at +/- every mode momentum
        let mut hat_vals: Vec<Vec<[Complex64; 2]>> = Vec::with_capacity(n);
        for f in slots {
            let hat = f.fourier()?;
            let mut per = Vec::with_capacity(n_modes);
            for j in -self.cutoff..=self.cutoff {
                let p = self.mode_vector(j);
                per.push([hat.eval(&p), hat.eval(&[-p[0], -p[1]])]);
            }
            hat_vals.push(per);
        }
        // pairwise twist table p_j^T theta p_j'
        let mut twist_tab = vec![0.0f64; n_modes * n_modes];
        for (ja, a) in (-self.cutoff..=self.cutoff).enumerate() {
            for (jb, b) in (-self.cutoff..=self.cutoff).enumerate() {
                let pa = self.mode_vector(a);
                let pb = self.mode_vector(b);
                twist_tab[ja * n_modes + jb] = theta.bilinear(&pa, &pb);
            }
        }
        let weights: Vec<f64> = (-self.cutoff..=self.cutoff).map(|j| self.weight(j)).collect();
        let pairings = PairingTable::new(n)?;
        let tuples: u64 = (n_modes as u64).pow(half as u32);
        let total_terms: u64 = tuples * pairings.count() as u64;

        let twist_active = !theta.is_zero();
        let eval_term = |term_idx: u64| -> Complex64 {
            let pairing = &pairings.pairings()[(term_idx / tuples) as usize];
            let mut tuple = term_idx % tuples;
            let mut slot_mode = [0usize; 16];
            let mut slot_sign = [0usize; 16]; // 0 -> +p, 1 -> -p
            let mut weight = 1.0f64;
            for &(a, b) in pairing {
                let j = (tuple % n_modes as u64) as usize;
                tuple /= n_modes as u64;
                slot_mode[a] = j;
                slot_mode[b] = j;
                slot_sign[a] = 0;
                slot_sign[b] = 1;
                weight *= weights[j];
            }
            let mut value = Complex64::new(weight, 0.0);
            for slot in 0..n {
                value *= hat_vals[slot][slot_mode[slot]][slot_sign[slot]];
            }
            if twist_active {
                let mut arg = 0.0;
                for u in 0..n {
                    let su = if slot_sign[u] == 0 { 1.0 } else { -1.0 };
                    for v in (u + 1)..n {
                        let sv = if slot_sign[v] == 0 { 1.0 } else { -1.0 };
                        arg += su * sv * twist_tab[slot_mode[u] * n_modes + slot_mode[v]];
                    }
                }
                value *= Complex64::new(0.0, -0.5 * arg).exp();
            }
            value
        };

        // fixed-size chunks summed in order: bit-stable for any thread count
        const CHUNK: u64 = 4096;
        let chunk_count = total_terms.div_ceil(CHUNK);
        let partials: Vec<Complex64> = (0..chunk_count)
            .into_par_iter()
            .map(|c| {
                let lo = c * CHUNK;
                let hi = ((c + 1) * CHUNK).min(total_terms);
                let mut acc = Complex64::ZERO;
                for t in lo..hi {
                    acc += eval_term(t);
                }
                acc
            })
            .collect();
        Ok(partials.into_iter().sum())
    }

    /// Smeared n-point functional of a plain star chain.
    pub fn wick_npoint_smeared(&self, chain: &StarChain, budget: u64) -> Result<Complex64> {
        if !chain.variant().is_plain() {
            return Err(Error::VariantMismatch(
                "smearing integrals use the plain star variant".into(),
            ));
        }
        let slots: Vec<&TestFunction> = chain.functions().iter().collect();
        self.wick_smeared_slots(&slots, chain.theta(), budget)
    }

    /// Max deviation of `W_n(x_1..x_n) - conj(W_n(x_n..x_1))` over random
    /// point tuples with coordinates in [-3, 3].
    pub fn hermiticity_check(&self, n: usize, samples: usize, seed: u64) -> Result<f64> {
        if n > 6 {
            return Err(Error::invalid(format!(
                "hermiticity check supports n <= 6, got {n}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst = 0.0f64;
        for _ in 0..samples {
            let points: Vec<[f64; 2]> = (0..n)
                .map(|_| [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)])
                .collect();
            let fwd = self.npoint(&points)?;
            let rev_points: Vec<[f64; 2]> = points.iter().rev().copied().collect();
            let rev = self.npoint(&rev_points)?;
            worst = worst.max((fwd - rev.conj()).norm());
        }
        Ok(worst)
    }
}
