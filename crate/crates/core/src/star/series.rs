//! Derivative-series star engine.
//!
//! The bidifferential exponential is applied order by order to a pair of
//! packet terms. Because differentiation only updates the polynomial
//! prefactor (the exponentials are fixed), the whole truncated series for one
//! term pair collapses into a single packet term whose prefactor is a
//! polynomial in the original variables. On polynomial inputs (coordinate
//! functions) the series terminates and the engine is exact.

use crate::error::{Error, Result};
use crate::packet::{PacketTerm, QuadExp, TestFunction};
use crate::poly::Poly;
use crate::star::chain::SeriesOrder;
use crate::theta::ThetaMatrix;
use num_complex::Complex64;

/// Embeds a d-variable polynomial into `vars` variables at `offset`.
fn embed(p: &Poly, vars: usize, offset: usize) -> Poly {
    let mut out = Poly::zero(vars);
    for (exps, coeff) in p.terms() {
        let mut mono = Poly::constant(vars, coeff);
        for (axis, &e) in exps.iter().enumerate() {
            for _ in 0..e {
                mono = mono.mul(&Poly::linear(vars, offset + axis, Complex64::ONE));
            }
        }
        out.add_assign(&mono);
    }
    out
}

fn star_series_terms(
    s: &PacketTerm,
    t: &PacketTerm,
    theta: &ThetaMatrix,
    order: usize,
) -> PacketTerm {
    let d = theta.dim();
    let vars = 2 * d;

    // d/dx_mu and d/dy_nu acting on the shared exponentials
    let lin_x: Vec<Poly> = (0..d).map(|mu| embed(&s.exponent_gradient(mu), vars, 0)).collect();
    let lin_y: Vec<Poly> = (0..d).map(|nu| embed(&t.exponent_gradient(nu), vars, d)).collect();

    let nonzero: Vec<(usize, usize, f64)> = (0..d)
        .flat_map(|mu| (0..d).map(move |nu| (mu, nu)))
        .filter_map(|(mu, nu)| {
            let v = theta.entry(mu, nu);
            (v != 0.0).then_some((mu, nu, v))
        })
        .collect();

    let mut state = embed(&s.poly, vars, 0).mul(&embed(&t.poly, vars, d));
    let mut out_poly = state.contract_pairs(d);
    let mut coeff = Complex64::ONE;

    for m in 1..=order {
        if state.is_zero() || nonzero.is_empty() {
            break;
        }
        let mut next = Poly::zero(vars);
        for &(mu, nu, v) in &nonzero {
            // theta^{mu nu} d/dx_mu d/dy_nu on state * exp(Q_s(x)) exp(Q_t(y))
            let mut dy = state.diff(d + nu);
            dy.add_assign(&state.mul(&lin_y[nu]));
            let mut dxy = dy.diff(mu);
            dxy.add_assign(&dy.mul(&lin_x[mu]));
            next.add_scaled(&dxy, Complex64::new(v, 0.0));
        }
        state = next;
        coeff *= Complex64::new(0.0, 0.5) / m as f64;
        out_poly.add_scaled(&state.contract_pairs(d), coeff);
    }

    PacketTerm {
        poly: out_poly,
        quad: QuadExp {
            scale: s.quad.scale * t.quad.scale,
            a: &s.quad.a + &t.quad.a,
            b: &s.quad.b + &t.quad.b,
        },
    }
}

/// Truncated star product
/// `sum_m (1/m!) ((i/2) theta^{mu nu} d_x^mu d_y^nu)^m f(x) g(y) |_{y=x}`.
pub fn star_series(
    f: &TestFunction,
    g: &TestFunction,
    theta: &ThetaMatrix,
    order: SeriesOrder,
) -> Result<TestFunction> {
    let d = theta.dim();
    if f.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, got: f.dim() });
    }
    if g.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, got: g.dim() });
    }
    if f.is_zero() || g.is_zero() {
        return Ok(TestFunction::zero(d));
    }
    let mut terms = Vec::with_capacity(f.terms().len() * g.terms().len());
    for s in f.terms() {
        for t in g.terms() {
            terms.push(star_series_terms(s, t, theta, order.get()));
        }
    }
    TestFunction::from_terms(d, terms)
}
