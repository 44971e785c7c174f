//! Analytic star engine: the twisted-convolution integral over Gaussian
//! packets is itself a Gaussian integral, so multi-point chains evaluate to
//! closed-form packets over the stacked point variables.

use crate::error::{Error, Result};
use crate::grid::{BoxSpec, GridFunction};
use crate::linalg::gaussian_integral;
use crate::packet::{PacketTerm, QuadExp, TestFunction};
use crate::poly::Poly;
use crate::profile::StarVariant;
use crate::theta::ThetaMatrix;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Position-space representation of the ordered n-point chain
/// `f_1(x_1) * ... * f_n(x_n)` with all pairwise twists applied, as a test
/// function over the stacked variables (x_1, ..., x_n) in R^{n d}.
///
/// Requires pure Gaussian packets (constant polynomial prefactors).
pub fn chain_packet(functions: &[&TestFunction], theta: &ThetaMatrix) -> Result<TestFunction> {
    let n = functions.len();
    let d = theta.dim();
    if n == 0 {
        return Err(Error::invalid("chain_packet needs at least one function"));
    }
    for f in functions {
        if f.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: f.dim(),
            });
        }
    }
    if functions.iter().any(|f| f.is_zero()) {
        return Ok(TestFunction::zero(n * d));
    }

    // transformed parameters per input term: f_hat(q) = c_hat exp(-1/2 q A_hat q + b_hat q)
    let mut hats: Vec<Vec<(Complex64, DMatrix<Complex64>, DVector<Complex64>)>> =
        Vec::with_capacity(n);
    for f in functions {
        let mut per = Vec::with_capacity(f.terms().len());
        for term in f.terms() {
            if !term.poly.is_constant() {
                return Err(Error::invalid(
                    "the analytic engine requires pure Gaussian packets",
                ));
            }
            let hat = term.fourier()?;
            let c_hat = hat.quad.scale * hat.poly.constant_term();
            per.push((c_hat, hat.quad.a, hat.quad.b));
        }
        hats.push(per);
    }

    let nd = n * d;
    let norm = (2.0 * std::f64::consts::PI).powi(-(nd as i32));
    let mut out_terms = Vec::new();

    // one output term per combination of input terms
    let mut combo = vec![0usize; n];
    loop {
        let mut m = DMatrix::<Complex64>::zeros(nd, nd);
        let mut w0 = DVector::<Complex64>::zeros(nd);
        let mut c_all = Complex64::ONE;
        for (a, f_hats) in hats.iter().enumerate() {
            let (c_hat, a_hat, b_hat) = &f_hats[combo[a]];
            c_all *= c_hat;
            for i in 0..d {
                w0[a * d + i] = b_hat[i];
                for j in 0..d {
                    m[(a * d + i, a * d + j)] = a_hat[(i, j)];
                }
            }
        }
        // pairwise twist: -(i/2) sum_{a<b} q_a^T theta q_b enters the quadratic form
        for a in 0..n {
            for b in 0..n {
                if a == b {
                    continue;
                }
                for i in 0..d {
                    for j in 0..d {
                        let v = if a < b {
                            theta.entry(i, j)
                        } else {
                            theta.entry(j, i)
                        };
                        if v != 0.0 {
                            m[(a * d + i, b * d + j)] += Complex64::new(0.0, 0.5 * v);
                        }
                    }
                }
            }
        }

        let gi = gaussian_integral(&m, &w0)?;
        out_terms.push(PacketTerm {
            poly: Poly::one(nd),
            quad: QuadExp {
                scale: c_all * gi.value * norm,
                a: gi.m_inv.clone(),
                b: gi.m_inv_w.map(|z| z * Complex64::new(0.0, 1.0)),
            },
        });

        // next combination
        let mut axis = n;
        loop {
            if axis == 0 {
                return TestFunction::from_terms(nd, out_terms);
            }
            axis -= 1;
            combo[axis] += 1;
            if combo[axis] < hats[axis].len() {
                break;
            }
            combo[axis] = 0;
        }
    }
}

/// Closed-form star product of two packet sums, evaluated analytically and
/// restricted to coinciding points.
///
/// Fails if any resulting complex width matrix loses its positive-definite
/// real part, which flags theta as too large for the packet pair.
pub fn star_gaussian_closed(
    f: &TestFunction,
    g: &TestFunction,
    theta: &ThetaMatrix,
) -> Result<TestFunction> {
    let d = theta.dim();
    let two_var = chain_packet(&[f, g], theta)?;
    if two_var.is_zero() {
        return Ok(TestFunction::zero(d));
    }
    let mut terms = Vec::with_capacity(two_var.terms().len());
    for t in two_var.terms() {
        let diag = t.restrict_diagonal(2, d)?;
        let re = diag.quad.a.map(|z| z.re);
        if nalgebra::Cholesky::new(re).is_none() {
            return Err(Error::invalid(
                "star product left the packet class: real part of the width matrix \
                 is no longer positive definite (theta too large for this packet pair)",
            ));
        }
        terms.push(diag);
    }
    TestFunction::from_terms(d, terms)
}

/// Sampled two-variable product `multiplier(x - y) * (f star g)(x, y)` on the
/// square of `base`: plain star leaves the product undamped, the xi and eta
/// variants multiply by their profile of the separation.
pub fn tilde_star_2pt(
    variant: &StarVariant,
    f: &TestFunction,
    g: &TestFunction,
    theta: &ThetaMatrix,
    base: &BoxSpec,
) -> Result<GridFunction> {
    let d = theta.dim();
    if base.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: base.dim(),
        });
    }
    for (name, func) in [("f", f), ("g", g)] {
        if func.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: func.dim(),
            });
        }
        if !func.is_zero() {
            check_support(name, func, base)?;
        }
    }
    let spec = base.squared()?;
    let two_var = chain_packet(&[f, g], theta)?;
    let mut grid = GridFunction::sample_fn(&spec, |p| two_var.eval(p));
    let mut diff = vec![0.0; d];
    let shape = spec.counts().to_vec();
    let mut err = None;
    crate::grid::for_each_index(&shape, |idx| {
        if err.is_some() {
            return;
        }
        let p = spec.point(idx);
        for i in 0..d {
            diff[i] = p[i] - p[d + i];
        }
        match variant.multiplier(&diff) {
            Ok(mult) => {
                if mult != 1.0 {
                    let v = grid.samples_mut()[ndarray::IxDyn(idx)];
                    grid.samples_mut()[ndarray::IxDyn(idx)] = v * mult;
                }
            }
            Err(e) => err = Some(e),
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(grid),
    }
}

/// Boundary-decay check: the function must be negligible on the outermost
/// sample layer relative to its peak over the grid.
pub(crate) fn check_support(name: &str, f: &TestFunction, spec: &BoxSpec) -> Result<()> {
    let g = GridFunction::sample_fn(spec, |x| f.eval(x));
    let peak = g.max_abs();
    let edge = g.boundary_max_abs();
    if peak == 0.0 {
        return Ok(());
    }
    if edge > spec.decay_threshold * peak {
        return Err(Error::BoxTooSmall(format!(
            "{name} does not decay at the box boundary: edge/peak = {:.3e}, threshold {:.3e}",
            edge / peak,
            spec.decay_threshold
        )));
    }
    Ok(())
}
