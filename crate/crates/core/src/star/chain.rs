use crate::error::{Error, Result};
use crate::packet::TestFunction;
use crate::profile::StarVariant;
use crate::theta::ThetaMatrix;
use num_complex::Complex64;

/// Truncation order for the derivative-series engine.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeriesOrder(usize);

impl SeriesOrder {
    pub const MAX: usize = 32;

    pub fn new(order: usize) -> Result<Self> {
        if order > Self::MAX {
            return Err(Error::invalid(format!(
                "series order {order} exceeds the maximum {}",
                Self::MAX
            )));
        }
        Ok(Self(order))
    }

    pub fn get(self) -> usize {
        self.0
    }
}

/// Ordered multi-point product: function a is attached to point variable x_a.
/// Order is load-bearing; the pairwise twist phases are not symmetric.
#[derive(Debug, Clone)]
pub struct StarChain {
    functions: Vec<TestFunction>,
    variant: StarVariant,
    theta: ThetaMatrix,
}

impl StarChain {
    pub fn new(functions: Vec<TestFunction>, variant: StarVariant, theta: ThetaMatrix) -> Result<Self> {
        if functions.is_empty() {
            return Err(Error::invalid("a star chain needs at least one function"));
        }
        for f in &functions {
            if f.dim() != theta.dim() {
                return Err(Error::DimensionMismatch {
                    expected: theta.dim(),
                    got: f.dim(),
                });
            }
        }
        if !variant.is_plain() && functions.len() != 2 {
            return Err(Error::VariantMismatch(
                "damped variants are defined for two-point chains only".into(),
            ));
        }
        Ok(Self {
            functions,
            variant,
            theta,
        })
    }

    pub fn plain(functions: Vec<TestFunction>, theta: ThetaMatrix) -> Result<Self> {
        Self::new(functions, StarVariant::PlainStar, theta)
    }

    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }

    pub fn functions(&self) -> &[TestFunction] {
        &self.functions
    }

    pub fn variant(&self) -> &StarVariant {
        &self.variant
    }

    pub fn theta(&self) -> &ThetaMatrix {
        &self.theta
    }
}

/// The pairwise twist factor of an ordered momentum tuple:
/// `exp(-(i/2) sum_{a<b} k_a^T theta k_b)`.
pub fn twist_phase(theta: &ThetaMatrix, momenta: &[Vec<f64>]) -> Complex64 {
    let mut arg = 0.0;
    for a in 0..momenta.len() {
        for b in (a + 1)..momenta.len() {
            arg += theta.bilinear(&momenta[a], &momenta[b]);
        }
    }
    Complex64::new(0.0, -0.5 * arg).exp()
}

/// Fourier value of the multi-point chain at the given momentum tuple:
/// `prod_a f_hat_a(k_a) * exp(-(i/2) sum_{a<b} k_a^T theta k_b)`.
pub fn star_chain_fourier(chain: &StarChain, momenta: &[Vec<f64>]) -> Result<Complex64> {
    if !chain.variant().is_plain() {
        return Err(Error::VariantMismatch(
            "star_chain_fourier requires the plain star variant".into(),
        ));
    }
    if momenta.len() != chain.len() {
        return Err(Error::invalid(format!(
            "chain of length {} evaluated with {} momenta",
            chain.len(),
            momenta.len()
        )));
    }
    let d = chain.theta().dim();
    for k in momenta {
        if k.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: k.len(),
            });
        }
    }
    if chain.functions().iter().any(|f| f.is_zero()) {
        return Ok(Complex64::ZERO);
    }
    let mut value = Complex64::ONE;
    for (f, k) in chain.functions().iter().zip(momenta) {
        value *= f.fourier()?.eval(k);
    }
    Ok(value * twist_phase(chain.theta(), momenta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::packet::GaussianPacket;
    use num_complex::Complex64;

    fn unit(dim: usize) -> TestFunction {
        TestFunction::unit_gaussian(dim)
    }

    #[test]
    fn single_function_is_plain_transform() {
        let theta = ThetaMatrix::new(2, &[(0, 1, 0.3)]).unwrap();
        let chain = StarChain::plain(vec![unit(2)], theta).unwrap();
        let k = vec![vec![0.7, -0.4]];
        let got = star_chain_fourier(&chain, &k).unwrap();
        let expect = unit(2).fourier().unwrap().eval(&k[0]);
        assert!((got - expect).norm() < 1e-14);
    }

    #[test]
    fn two_point_zero_theta_factorizes() {
        let theta = ThetaMatrix::zero(2);
        let f = unit(2);
        let g = TestFunction::gaussian(
            GaussianPacket::isotropic(Complex64::ONE, vec![0.5, 0.0], vec![1.0, 0.0], 2.0).unwrap(),
        );
        let chain = StarChain::plain(vec![f.clone(), g.clone()], theta).unwrap();
        let ks = vec![vec![0.2, 0.3], vec![-1.0, 0.6]];
        let got = star_chain_fourier(&chain, &ks).unwrap();
        let expect = f.fourier().unwrap().eval(&ks[0]) * g.fourier().unwrap().eval(&ks[1]);
        assert!((got - expect).norm() < 1e-14 * expect.norm());
    }

    #[test]
    fn zero_function_short_circuits() {
        let theta = ThetaMatrix::new(2, &[(0, 1, 0.1)]).unwrap();
        let chain = StarChain::plain(vec![unit(2), TestFunction::zero(2)], theta).unwrap();
        let ks = vec![vec![0.0, 0.0], vec![0.0, 0.0]];
        assert_eq!(star_chain_fourier(&chain, &ks).unwrap(), Complex64::ZERO);
    }

    #[test]
    fn variant_and_length_are_enforced() {
        let theta = ThetaMatrix::new(2, &[(0, 1, 0.1)]).unwrap();
        let profile = crate::profile::DampingProfile::gaussian_xi(1.0, 0.1).unwrap();
        let variant = StarVariant::xi_damped(profile).unwrap();
        let chain = StarChain::new(vec![unit(2), unit(2)], variant, theta.clone()).unwrap();
        assert!(star_chain_fourier(&chain, &[vec![0.0, 0.0], vec![0.0, 0.0]]).is_err());

        let plain = StarChain::plain(vec![unit(2)], theta).unwrap();
        assert!(star_chain_fourier(&plain, &[vec![0.0, 0.0], vec![0.0, 0.0]]).is_err());
    }

    #[test]
    fn ordering_sensitivity_of_twist() {
        let theta = ThetaMatrix::new(2, &[(0, 1, 0.4)]).unwrap();
        let ka = vec![1.0, 0.0];
        let kb = vec![0.0, 1.0];
        let fwd = twist_phase(&theta, &[ka.clone(), kb.clone()]);
        let rev = twist_phase(&theta, &[kb, ka]);
        assert!((fwd - rev.conj()).norm() < 1e-15);
        assert!((fwd - rev).norm() > 0.1);
    }
}
