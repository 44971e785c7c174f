//! The concrete test-function class: finite sums of Gaussian wave packets.
//!
//! Internally every term is `poly(x) * scale * exp(-1/2 x^T A x + b^T x)`
//! with complex symmetric `A`. This family is closed under differentiation,
//! complex conjugation, pointwise products, Fourier transforms, and the
//! analytic star-product integrals, which is what makes every smearing
//! integral in the toolkit exactly evaluable.

use crate::error::{Error, Result};
use crate::linalg::gaussian_integral;
use crate::poly::Poly;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Exponential of a complex quadratic form: `scale * exp(-1/2 x^T a x + b^T x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadExp {
    pub scale: Complex64,
    pub a: DMatrix<Complex64>,
    pub b: DVector<Complex64>,
}

impl QuadExp {
    pub fn dim(&self) -> usize {
        self.b.len()
    }

    pub fn exponent(&self, x: &[f64]) -> Complex64 {
        let d = self.dim();
        let mut e = Complex64::ZERO;
        for i in 0..d {
            e += self.b[i] * x[i];
            let mut row = Complex64::ZERO;
            for j in 0..d {
                row += self.a[(i, j)] * x[j];
            }
            e -= 0.5 * x[i] * row;
        }
        e
    }

    pub fn eval(&self, x: &[f64]) -> Complex64 {
        self.scale * self.exponent(x).exp()
    }
}

/// One packet term: polynomial prefactor times a Gaussian exponential.
#[derive(Debug, Clone, PartialEq)]
pub struct PacketTerm {
    pub poly: Poly,
    pub quad: QuadExp,
}

impl PacketTerm {
    pub fn dim(&self) -> usize {
        self.quad.dim()
    }

    pub fn eval(&self, x: &[f64]) -> Complex64 {
        if self.poly.is_zero() {
            return Complex64::ZERO;
        }
        self.poly.eval(x) * self.quad.eval(x)
    }

    pub fn conj(&self) -> PacketTerm {
        PacketTerm {
            poly: self.poly.conj(),
            quad: QuadExp {
                scale: self.quad.scale.conj(),
                a: self.quad.a.map(|z| z.conj()),
                b: self.quad.b.map(|z| z.conj()),
            },
        }
    }

    /// Substitution x -> -x.
    pub fn reflect(&self) -> PacketTerm {
        PacketTerm {
            poly: self.poly.reflect(),
            quad: QuadExp {
                scale: self.quad.scale,
                a: self.quad.a.clone(),
                b: -&self.quad.b,
            },
        }
    }

    /// The linear polynomial d/dx_axis applied to the exponent:
    /// `(-A x + b)_axis`.
    pub fn exponent_gradient(&self, axis: usize) -> Poly {
        let d = self.dim();
        let mut lin = Poly::constant(d, self.quad.b[axis]);
        for j in 0..d {
            lin.add_assign(&Poly::linear(d, j, -self.quad.a[(axis, j)]));
        }
        lin
    }

    /// Derivative along `axis`; same exponential, updated polynomial.
    pub fn diff(&self, axis: usize) -> PacketTerm {
        let mut p = self.poly.diff(axis);
        p.add_assign(&self.poly.mul(&self.exponent_gradient(axis)));
        PacketTerm {
            poly: p,
            quad: self.quad.clone(),
        }
    }

    /// Pointwise product with another term over the same variables.
    pub fn mul(&self, other: &PacketTerm) -> PacketTerm {
        assert_eq!(self.dim(), other.dim());
        PacketTerm {
            poly: self.poly.mul(&other.poly),
            quad: QuadExp {
                scale: self.quad.scale * other.quad.scale,
                a: &self.quad.a + &other.quad.a,
                b: &self.quad.b + &other.quad.b,
            },
        }
    }

    /// Fourier transform with the convention `f_hat(k) = \int f(x) e^{-i k x} dx`.
    ///
    /// Monomial prefactors map to `(i d/dk)^alpha` acting on the transformed
    /// Gaussian, so the result is again a single term.
    pub fn fourier(&self) -> Result<PacketTerm> {
        let d = self.dim();
        let gi = gaussian_integral(&self.quad.a, &self.quad.b).map_err(|e| {
            Error::invalid(format!("term is not Fourier transformable: {e}"))
        })?;
        let hat_quad = QuadExp {
            scale: self.quad.scale * gi.value,
            a: gi.m_inv.clone(),
            b: gi.m_inv_w.map(|z| z * Complex64::new(0.0, -1.0)),
        };
        let base = PacketTerm {
            poly: Poly::one(d),
            quad: hat_quad.clone(),
        };
        let mut hat_poly = Poly::zero(d);
        for (exps, coeff) in self.poly.terms() {
            // x^alpha f  ->  (i d/dk)^alpha f_hat
            let mut cur = base.clone();
            let mut order = 0u32;
            for (axis, &e) in exps.iter().enumerate() {
                for _ in 0..e {
                    cur = cur.diff(axis);
                    order += 1;
                }
            }
            let factor = coeff * Complex64::new(0.0, 1.0).powu(order);
            hat_poly.add_scaled(&cur.poly, factor);
        }
        Ok(PacketTerm {
            poly: hat_poly,
            quad: hat_quad,
        })
    }

    /// Collapses an (n*d)-dimensional term to d dimensions by setting every
    /// point variable equal: x_1 = ... = x_n = x.
    pub fn restrict_diagonal(&self, n: usize, d: usize) -> Result<PacketTerm> {
        if self.dim() != n * d {
            return Err(Error::DimensionMismatch {
                expected: n * d,
                got: self.dim(),
            });
        }
        if !self.poly.is_constant() {
            return Err(Error::invalid(
                "diagonal restriction is only implemented for constant prefactors",
            ));
        }
        let mut a = DMatrix::<Complex64>::zeros(d, d);
        let mut b = DVector::<Complex64>::zeros(d);
        for block_i in 0..n {
            for i in 0..d {
                b[i] += self.quad.b[block_i * d + i];
                for block_j in 0..n {
                    for j in 0..d {
                        a[(i, j)] += self.quad.a[(block_i * d + i, block_j * d + j)];
                    }
                }
            }
        }
        Ok(PacketTerm {
            poly: Poly::constant(d, self.poly.constant_term()),
            quad: QuadExp {
                scale: self.quad.scale,
                a,
                b,
            },
        })
    }
}

/// A single Gaussian wave packet
/// `coeff * exp(-1/2 (x-center)^T width (x-center) + i momentum . x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianPacket {
    pub coeff: Complex64,
    pub center: Vec<f64>,
    pub momentum: Vec<f64>,
    pub width: DMatrix<f64>,
}

impl GaussianPacket {
    pub fn new(
        coeff: Complex64,
        center: Vec<f64>,
        momentum: Vec<f64>,
        width: DMatrix<f64>,
    ) -> Result<Self> {
        let d = center.len();
        if d == 0 {
            return Err(Error::invalid("packet dimension must be >= 1"));
        }
        if momentum.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: momentum.len(),
            });
        }
        if width.nrows() != d || width.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: width.nrows(),
            });
        }
        for v in center.iter().chain(momentum.iter()).chain(width.iter()) {
            if !v.is_finite() {
                return Err(Error::invalid("packet parameters must be finite"));
            }
        }
        if !coeff.re.is_finite() || !coeff.im.is_finite() {
            return Err(Error::invalid("packet coefficient must be finite"));
        }
        let sym_defect = (&width - width.transpose())
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()));
        if sym_defect > 1e-12 * width.iter().fold(1.0f64, |m, v| m.max(v.abs())) {
            return Err(Error::invalid("packet width matrix must be symmetric"));
        }
        if nalgebra::Cholesky::new(width.clone()).is_none() {
            return Err(Error::invalid(
                "packet width matrix must be positive definite (plane waves are not packets)",
            ));
        }
        Ok(Self {
            coeff,
            center,
            momentum,
            width,
        })
    }

    /// Isotropic packet with scalar width `w > 0`.
    pub fn isotropic(
        coeff: Complex64,
        center: Vec<f64>,
        momentum: Vec<f64>,
        w: f64,
    ) -> Result<Self> {
        let d = center.len();
        Self::new(coeff, center, momentum, DMatrix::identity(d, d) * w)
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn to_term(&self) -> PacketTerm {
        let d = self.dim();
        let a = self.width.map(|v| Complex64::new(v, 0.0));
        let wc = &self.width * DVector::from_column_slice(&self.center);
        let b = DVector::from_fn(d, |i, _| Complex64::new(wc[i], self.momentum[i]));
        // -1/2 (x-c)^T W (x-c) = -1/2 x^T W x + (W c)^T x - 1/2 c^T W c
        let c_w_c: f64 = self
            .center
            .iter()
            .zip(wc.iter())
            .map(|(ci, wci)| ci * wci)
            .sum();
        PacketTerm {
            poly: Poly::one(d),
            quad: QuadExp {
                scale: self.coeff * (-0.5 * c_w_c).exp(),
                a,
                b,
            },
        }
    }
}

/// Finite sum of packet terms over a fixed dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct TestFunction {
    dim: usize,
    terms: Vec<PacketTerm>,
}

impl TestFunction {
    pub fn zero(dim: usize) -> Self {
        Self { dim, terms: vec![] }
    }

    pub fn from_terms(dim: usize, terms: Vec<PacketTerm>) -> Result<Self> {
        for t in &terms {
            if t.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: t.dim(),
                });
            }
        }
        Ok(Self { dim, terms })
    }

    pub fn from_packets(packets: &[GaussianPacket]) -> Result<Self> {
        let dim = packets
            .first()
            .map(|p| p.dim())
            .ok_or_else(|| Error::invalid("at least one packet required"))?;
        let mut terms = Vec::with_capacity(packets.len());
        for p in packets {
            if p.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: p.dim(),
                });
            }
            terms.push(p.to_term());
        }
        Ok(Self { dim, terms })
    }

    pub fn gaussian(packet: GaussianPacket) -> Self {
        let dim = packet.dim();
        Self {
            dim,
            terms: vec![packet.to_term()],
        }
    }

    /// Centered unit-width packet with no phase: exp(-|x|^2 / 2).
    pub fn unit_gaussian(dim: usize) -> Self {
        Self::gaussian(
            GaussianPacket::isotropic(Complex64::ONE, vec![0.0; dim], vec![0.0; dim], 1.0)
                .expect("valid parameters"),
        )
    }

    /// The coordinate function x_axis. Not integrable; supported by the
    /// algebraic (series) engine only.
    pub fn coordinate(dim: usize, axis: usize) -> Result<Self> {
        if axis >= dim {
            return Err(Error::invalid(format!(
                "coordinate axis {axis} out of range for dimension {dim}"
            )));
        }
        Ok(Self {
            dim,
            terms: vec![PacketTerm {
                poly: Poly::linear(dim, axis, Complex64::ONE),
                quad: QuadExp {
                    scale: Complex64::ONE,
                    a: DMatrix::zeros(dim, dim),
                    b: DVector::zeros(dim),
                },
            }],
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[PacketTerm] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| t.poly.is_zero() || t.quad.scale == Complex64::ZERO)
    }

    pub fn eval(&self, x: &[f64]) -> Complex64 {
        assert_eq!(x.len(), self.dim);
        self.terms.iter().map(|t| t.eval(x)).sum()
    }

    pub fn add(&self, other: &TestFunction) -> Result<TestFunction> {
        if other.dim != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Ok(TestFunction {
            dim: self.dim,
            terms,
        })
    }

    pub fn scale(&self, s: Complex64) -> TestFunction {
        TestFunction {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .map(|t| PacketTerm {
                    poly: t.poly.clone(),
                    quad: QuadExp {
                        scale: t.quad.scale * s,
                        a: t.quad.a.clone(),
                        b: t.quad.b.clone(),
                    },
                })
                .collect(),
        }
    }

    pub fn conj(&self) -> TestFunction {
        TestFunction {
            dim: self.dim,
            terms: self.terms.iter().map(|t| t.conj()).collect(),
        }
    }

    /// Pointwise product (the theta = 0 star product).
    pub fn pointwise_mul(&self, other: &TestFunction) -> Result<TestFunction> {
        if other.dim != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for s in &self.terms {
            for t in &other.terms {
                terms.push(s.mul(t));
            }
        }
        Ok(TestFunction {
            dim: self.dim,
            terms,
        })
    }

    /// Term-by-term exact Fourier transform, `f_hat(k) = \int f(x) e^{-ikx} dx`.
    pub fn fourier(&self) -> Result<TestFunction> {
        if self.terms.is_empty() {
            return Err(Error::invalid("cannot transform a zero test function"));
        }
        let terms = self
            .terms
            .iter()
            .map(|t| t.fourier())
            .collect::<Result<Vec<_>>>()?;
        Ok(TestFunction {
            dim: self.dim,
            terms,
        })
    }

    /// Exact inverse transform: `(2 pi)^-d fourier(f)(-x)`.
    pub fn inverse_fourier(&self) -> Result<TestFunction> {
        let fwd = self.fourier()?;
        let norm = (2.0 * std::f64::consts::PI).powi(-(self.dim as i32));
        Ok(TestFunction {
            dim: self.dim,
            terms: fwd
                .terms
                .iter()
                .map(|t| {
                    let r = t.reflect();
                    PacketTerm {
                        poly: r.poly,
                        quad: QuadExp {
                            scale: r.quad.scale * norm,
                            a: r.quad.a,
                            b: r.quad.b,
                        },
                    }
                })
                .collect(),
        })
    }

    /// Total integral over R^d (the transform at k = 0).
    pub fn integral(&self) -> Result<Complex64> {
        Ok(self.fourier()?.eval(&vec![0.0; self.dim]))
    }
}
