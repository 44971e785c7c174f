use crate::error::{Error, Result};

/// Damping / regularization profiles applied to the two-point star product.
///
/// Norms are component-wise max norms throughout: `|u| = max_i |u_i|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProfileKind {
    None,
    GaussianXi,
    PlateauEta,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DampingProfile {
    pub kind: ProfileKind,
    /// Certificate constant of the Gaussian bound |xi(u)| <= C exp(-|u|^2 / theta_sup).
    pub c: f64,
    pub theta_sup: f64,
    pub alpha: f64,
    pub epsilon: f64,
}

impl DampingProfile {
    pub fn none() -> Self {
        Self {
            kind: ProfileKind::None,
            c: 1.0,
            theta_sup: 1.0,
            alpha: 1.0,
            epsilon: 0.5,
        }
    }

    /// xi(u) = exp(-|u|^2 / theta_sup), the extremal function of the bound.
    /// `c` must be >= 1 so the stored bound certificate actually holds.
    pub fn gaussian_xi(c: f64, theta_sup: f64) -> Result<Self> {
        if !(c >= 1.0 && c.is_finite()) {
            return Err(Error::invalid(format!(
                "xi bound constant must be >= 1 (the profile saturates the bound), got {c}"
            )));
        }
        if !(theta_sup > 0.0 && theta_sup.is_finite()) {
            return Err(Error::invalid(format!("theta_sup must be positive, got {theta_sup}")));
        }
        Ok(Self {
            kind: ProfileKind::GaussianXi,
            c,
            theta_sup,
            alpha: 1.0,
            epsilon: 0.5,
        })
    }

    /// eta(u) = 1 for |u|^2 < alpha - epsilon, 0 for |u|^2 >= alpha, and a C^1
    /// smoothstep 3t^2 - 2t^3 in t = (alpha - |u|^2) / epsilon on the shell.
    pub fn plateau_eta(alpha: f64, epsilon: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::invalid(format!("alpha must be positive, got {alpha}")));
        }
        if !(epsilon > 0.0 && epsilon < alpha) {
            return Err(Error::invalid(format!(
                "epsilon must satisfy 0 < epsilon < alpha, got epsilon={epsilon}, alpha={alpha}"
            )));
        }
        Ok(Self {
            kind: ProfileKind::PlateauEta,
            c: 1.0,
            theta_sup: 1.0,
            alpha,
            epsilon,
        })
    }

    /// Squared max norm of `u`.
    pub fn max_norm_sq(u: &[f64]) -> f64 {
        let m = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        m * m
    }

    pub fn eval(&self, u: &[f64]) -> Result<f64> {
        if u.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("profile argument must be finite"));
        }
        let r2 = Self::max_norm_sq(u);
        match self.kind {
            ProfileKind::None => Err(Error::invalid("profile kind 'none' cannot be evaluated")),
            ProfileKind::GaussianXi => Ok((-r2 / self.theta_sup).exp()),
            ProfileKind::PlateauEta => {
                if r2 < self.alpha - self.epsilon {
                    Ok(1.0)
                } else if r2 >= self.alpha {
                    Ok(0.0)
                } else {
                    let t = (self.alpha - r2) / self.epsilon;
                    Ok(t * t * (3.0 - 2.0 * t))
                }
            }
        }
    }

    /// The Gaussian envelope C exp(-|u|^2 / theta_sup) the xi profile is bounded by.
    pub fn xi_bound(&self, u: &[f64]) -> f64 {
        self.c * (-Self::max_norm_sq(u) / self.theta_sup).exp()
    }
}

/// Which two-point product multiplier is in force.
#[derive(Debug, Clone, PartialEq)]
pub enum StarVariant {
    PlainStar,
    XiDamped(DampingProfile),
    EtaRegularized(DampingProfile),
}

impl StarVariant {
    pub fn plain() -> Self {
        StarVariant::PlainStar
    }

    pub fn xi_damped(profile: DampingProfile) -> Result<Self> {
        if profile.kind != ProfileKind::GaussianXi {
            return Err(Error::VariantMismatch(
                "xi_damped requires a gaussian_xi profile".into(),
            ));
        }
        Ok(StarVariant::XiDamped(profile))
    }

    pub fn eta_regularized(profile: DampingProfile) -> Result<Self> {
        if profile.kind != ProfileKind::PlateauEta {
            return Err(Error::VariantMismatch(
                "eta_regularized requires a plateau_eta profile".into(),
            ));
        }
        Ok(StarVariant::EtaRegularized(profile))
    }

    pub fn is_plain(&self) -> bool {
        matches!(self, StarVariant::PlainStar)
    }

    /// The position-space multiplier at point separation `diff = x - y`.
    pub fn multiplier(&self, diff: &[f64]) -> Result<f64> {
        match self {
            StarVariant::PlainStar => Ok(1.0),
            StarVariant::XiDamped(p) | StarVariant::EtaRegularized(p) => p.eval(diff),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn xi_is_one_at_origin() {
        let p = DampingProfile::gaussian_xi(1.0, 0.1).unwrap();
        assert_eq!(p.eval(&[0.0, 0.0]).unwrap(), 1.0);
    }

    #[test]
    fn eta_plateau_and_cutoff() {
        let p = DampingProfile::plateau_eta(1.0, 0.1).unwrap();
        // |u|^2 = 0.5 well inside the plateau
        let u = 0.5f64.sqrt();
        assert_eq!(p.eval(&[u, 0.3]).unwrap(), 1.0);
        // |u|^2 = 1.5 beyond alpha
        let v = 1.5f64.sqrt();
        assert_eq!(p.eval(&[v, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn xi_respects_gaussian_bound_at_random_points() {
        let p = DampingProfile::gaussian_xi(1.0, 0.07).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10_000 {
            let u = [
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
            ];
            let v = p.eval(&u).unwrap();
            assert!(v.abs() <= p.xi_bound(&u) * (1.0 + 1e-14));
        }
    }

    #[test]
    fn eta_jump_shrinks_under_refinement() {
        let p = DampingProfile::plateau_eta(1.0, 0.25).unwrap();
        let mut jumps = Vec::new();
        for n in [256usize, 1024, 4096] {
            let mut max_jump = 0.0f64;
            let mut prev = p.eval(&[-2.0]).unwrap();
            for i in 1..=n {
                let x = -2.0 + 4.0 * i as f64 / n as f64;
                let cur = p.eval(&[x]).unwrap();
                max_jump = max_jump.max((cur - prev).abs());
                prev = cur;
            }
            jumps.push(max_jump);
        }
        assert!(jumps[1] < jumps[0] / 2.0);
        assert!(jumps[2] < jumps[1] / 2.0);
    }

    #[test]
    fn variant_requires_matching_profile() {
        let xi = DampingProfile::gaussian_xi(1.0, 0.1).unwrap();
        let eta = DampingProfile::plateau_eta(1.0, 0.1).unwrap();
        assert!(StarVariant::xi_damped(xi.clone()).is_ok());
        assert!(StarVariant::xi_damped(eta.clone()).is_err());
        assert!(StarVariant::eta_regularized(eta).is_ok());
        assert!(StarVariant::eta_regularized(xi).is_err());
        assert_eq!(StarVariant::plain().multiplier(&[1.0]).unwrap(), 1.0);
    }

    #[test]
    fn rejects_non_finite_argument() {
        let p = DampingProfile::gaussian_xi(1.0, 0.1).unwrap();
        assert!(p.eval(&[f64::NAN]).is_err());
        assert!(DampingProfile::none().eval(&[0.0]).is_err());
    }
}
