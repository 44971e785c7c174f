use num_complex::Complex64;
use std::collections::BTreeMap;

/// Sparse multivariate polynomial with complex coefficients.
///
/// Keys are exponent vectors of fixed length `vars`. Exact zeros produced by
/// cancellation are pruned; small nonzero coefficients are kept untouched so
/// algebraic identities (commutators on coordinate functions) stay exact.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    vars: usize,
    terms: BTreeMap<Vec<u8>, Complex64>,
}

impl Poly {
    pub fn zero(vars: usize) -> Self {
        Self {
            vars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(vars: usize, c: Complex64) -> Self {
        let mut p = Self::zero(vars);
        if c != Complex64::ZERO {
            p.terms.insert(vec![0; vars], c);
        }
        p
    }

    pub fn one(vars: usize) -> Self {
        Self::constant(vars, Complex64::ONE)
    }

    /// The monomial `c * x_axis`.
    pub fn linear(vars: usize, axis: usize, c: Complex64) -> Self {
        assert!(axis < vars);
        let mut p = Self::zero(vars);
        if c != Complex64::ZERO {
            let mut e = vec![0u8; vars];
            e[axis] = 1;
            p.terms.insert(e, c);
        }
        p
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.len() <= 1 && self.terms.keys().all(|e| e.iter().all(|&x| x == 0))
    }

    /// Constant coefficient (zero if absent).
    pub fn constant_term(&self) -> Complex64 {
        self.terms
            .get(&vec![0u8; self.vars])
            .copied()
            .unwrap_or(Complex64::ZERO)
    }

    pub fn coeff(&self, exps: &[u8]) -> Complex64 {
        self.terms.get(exps).copied().unwrap_or(Complex64::ZERO)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u8], Complex64)> {
        self.terms.iter().map(|(e, &c)| (e.as_slice(), c))
    }

    pub fn total_degree(&self) -> usize {
        self.terms
            .keys()
            .map(|e| e.iter().map(|&x| x as usize).sum())
            .max()
            .unwrap_or(0)
    }

    fn insert(&mut self, exps: Vec<u8>, c: Complex64) {
        use std::collections::btree_map::Entry;
        match self.terms.entry(exps) {
            Entry::Vacant(v) => {
                if c != Complex64::ZERO {
                    v.insert(c);
                }
            }
            Entry::Occupied(mut o) => {
                let s = *o.get() + c;
                if s == Complex64::ZERO {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn add_assign(&mut self, other: &Poly) {
        assert_eq!(self.vars, other.vars);
        for (e, &c) in &other.terms {
            self.insert(e.clone(), c);
        }
    }

    pub fn add_scaled(&mut self, other: &Poly, s: Complex64) {
        assert_eq!(self.vars, other.vars);
        for (e, &c) in &other.terms {
            self.insert(e.clone(), c * s);
        }
    }

    pub fn scale(&self, s: Complex64) -> Poly {
        if s == Complex64::ZERO {
            return Poly::zero(self.vars);
        }
        Poly {
            vars: self.vars,
            terms: self.terms.iter().map(|(e, &c)| (e.clone(), c * s)).collect(),
        }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        assert_eq!(self.vars, other.vars);
        let mut out = Poly::zero(self.vars);
        for (ea, &ca) in &self.terms {
            for (eb, &cb) in &other.terms {
                let e: Vec<u8> = ea
                    .iter()
                    .zip(eb)
                    .map(|(&a, &b)| a.checked_add(b).expect("polynomial degree overflow"))
                    .collect();
                out.insert(e, ca * cb);
            }
        }
        out
    }

    /// Partial derivative along `axis`.
    pub fn diff(&self, axis: usize) -> Poly {
        assert!(axis < self.vars);
        let mut out = Poly::zero(self.vars);
        for (e, &c) in &self.terms {
            let k = e[axis];
            if k > 0 {
                let mut e2 = e.clone();
                e2[axis] = k - 1;
                out.insert(e2, c * (k as f64));
            }
        }
        out
    }

    pub fn eval(&self, x: &[f64]) -> Complex64 {
        assert_eq!(x.len(), self.vars);
        let mut acc = Complex64::ZERO;
        for (e, &c) in &self.terms {
            let mut m = 1.0f64;
            for (xi, &ki) in x.iter().zip(e) {
                m *= xi.powi(ki as i32);
            }
            acc += c * m;
        }
        acc
    }

    pub fn conj(&self) -> Poly {
        Poly {
            vars: self.vars,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), c.conj())).collect(),
        }
    }

    /// Substitutes x -> -x: every odd-degree monomial flips sign.
    pub fn reflect(&self) -> Poly {
        Poly {
            vars: self.vars,
            terms: self
                .terms
                .iter()
                .map(|(e, &c)| {
                    let deg: u32 = e.iter().map(|&x| x as u32).sum();
                    (e.clone(), if deg % 2 == 0 { c } else { -c })
                })
                .collect(),
        }
    }

    /// Maps a polynomial in 2d variables (x_0..x_{d-1}, y_0..y_{d-1}) to the
    /// d-variable polynomial obtained by setting y = x.
    pub fn contract_pairs(&self, d: usize) -> Poly {
        assert_eq!(self.vars, 2 * d);
        let mut out = Poly::zero(d);
        for (e, &c) in &self.terms {
            let merged: Vec<u8> = (0..d)
                .map(|i| e[i].checked_add(e[d + i]).expect("degree overflow"))
                .collect();
            out.insert(merged, c);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn mul_and_diff() {
        // (x0 + 2) * x1 = x0 x1 + 2 x1
        let mut a = Poly::linear(2, 0, Complex64::ONE);
        a.add_assign(&Poly::constant(2, c(2.0, 0.0)));
        let b = Poly::linear(2, 1, Complex64::ONE);
        let p = a.mul(&b);
        assert_eq!(p.num_terms(), 2);
        // d/dx1 -> x0 + 2
        let d = p.diff(1);
        assert_eq!(d.eval(&[3.0, 100.0]), c(5.0, 0.0));
    }

    #[test]
    fn exact_cancellation_prunes() {
        let a = Poly::linear(1, 0, c(1.5, 0.0));
        let mut s = a.clone();
        s.add_scaled(&a, c(-1.0, 0.0));
        assert!(s.is_zero());
    }

    #[test]
    fn contract_pairs_merges_exponents() {
        // x0 * y0 -> x0^2 ; y1 -> x1
        let p = Poly::linear(4, 0, Complex64::ONE).mul(&Poly::linear(4, 2, Complex64::ONE));
        let q = p.contract_pairs(2);
        assert_eq!(q.coeff(&[2, 0]), Complex64::ONE);
        let r = Poly::linear(4, 3, c(0.0, 2.0)).contract_pairs(2);
        assert_eq!(r.coeff(&[0, 1]), c(0.0, 2.0));
    }

    #[test]
    fn eval_matches_hand_value() {
        let mut p = Poly::constant(2, c(1.0, 0.0));
        p.add_assign(&Poly::linear(2, 0, c(0.0, 1.0)));
        let v = p.eval(&[2.0, 7.0]);
        assert_eq!(v, c(1.0, 2.0));
    }
}
