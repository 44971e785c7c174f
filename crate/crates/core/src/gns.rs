//! The operator-space construction at finite generating sets.
//!
//! Vectors are breaking sequences: a scalar slot plus finitely many ordered
//! chains of test functions. The smeared field operator shifts every slot up
//! by prepending its function; scalar products come from the mode field's
//! pairing expansion. Everything downstream (isotropic quotient, fundamental
//! decomposition, cyclicity ranks, deformation sweeps) is finite-dimensional
//! linear algebra over the resulting Gram matrices.

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, numerical_rank};
use crate::packet::TestFunction;
use crate::theta::ThetaMatrix;
use crate::wightman::ModeField;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

/// One chain slot: a complex weight times an ordered list of functions,
/// function a attached to point variable x_a.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedChain {
    pub coeff: Complex64,
    pub functions: Vec<TestFunction>,
}

impl WeightedChain {
    pub fn level(&self) -> usize {
        self.functions.len()
    }
}

/// Element of the span of breaking sequences: `{scalar, chains...}`.
/// Addition and scaling act slot-wise.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceVector {
    scalar: Complex64,
    chains: Vec<WeightedChain>,
}

impl SequenceVector {
    /// The vacuum sequence {1, 0, ...}.
    pub fn vacuum() -> Self {
        Self {
            scalar: Complex64::ONE,
            chains: vec![],
        }
    }

    pub fn zero() -> Self {
        Self {
            scalar: Complex64::ZERO,
            chains: vec![],
        }
    }

    pub fn scalar(&self) -> Complex64 {
        self.scalar
    }

    pub fn chains(&self) -> &[WeightedChain] {
        &self.chains
    }

    pub fn max_level(&self) -> usize {
        self.chains.iter().map(|c| c.level()).max().unwrap_or(0)
    }

    pub fn add(&self, other: &SequenceVector) -> SequenceVector {
        let mut chains = self.chains.clone();
        chains.extend(other.chains.iter().cloned());
        SequenceVector {
            scalar: self.scalar + other.scalar,
            chains,
        }
    }

    pub fn scale(&self, s: Complex64) -> SequenceVector {
        SequenceVector {
            scalar: self.scalar * s,
            chains: self
                .chains
                .iter()
                .map(|c| WeightedChain {
                    coeff: c.coeff * s,
                    functions: c.functions.clone(),
                })
                .collect(),
        }
    }

    pub fn linear_combination(vectors: &[SequenceVector], coeffs: &DVector<Complex64>) -> SequenceVector {
        assert_eq!(vectors.len(), coeffs.len());
        let mut acc = SequenceVector::zero();
        for (v, &c) in vectors.iter().zip(coeffs.iter()) {
            if c != Complex64::ZERO {
                acc = acc.add(&v.scale(c));
            }
        }
        acc
    }
}

/// Smeared operator action: `phi_f {g0, g1, ...} = {0, f g0, f x g1, ...}` —
/// the scalar slot feeds a new one-function chain and every chain gains `f`
/// prepended, raising its level by one.
pub fn apply_field_operator(f: &TestFunction, v: &SequenceVector) -> Result<SequenceVector> {
    let mut chains = Vec::with_capacity(v.chains.len() + 1);
    if v.scalar != Complex64::ZERO {
        chains.push(WeightedChain {
            coeff: v.scalar,
            functions: vec![f.clone()],
        });
    }
    for c in &v.chains {
        if let Some(first) = c.functions.first() {
            if first.dim() != f.dim() {
                return Err(Error::DimensionMismatch {
                    expected: first.dim(),
                    got: f.dim(),
                });
            }
        }
        let mut functions = Vec::with_capacity(c.functions.len() + 1);
        functions.push(f.clone());
        functions.extend(c.functions.iter().cloned());
        chains.push(WeightedChain {
            coeff: c.coeff,
            functions,
        });
    }
    Ok(SequenceVector {
        scalar: Complex64::ZERO,
        chains,
    })
}

/// Builds `phi_{word[0]} ... phi_{word[last]} vacuum` (rightmost applied first).
pub fn word_vector(generators: &[TestFunction], word: &[usize]) -> Result<SequenceVector> {
    let mut v = SequenceVector::vacuum();
    for &g in word.iter().rev() {
        let f = generators
            .get(g)
            .ok_or_else(|| Error::invalid(format!("generator index {g} out of range")))?;
        v = apply_field_operator(f, &v)?;
    }
    Ok(v)
}

#[derive(Debug, Clone, Copy)]
pub struct GramOptions {
    /// Cap on (pairing, mode tuple) terms per smearing integral.
    pub budget: u64,
    /// Relative eigenvalue threshold for isotropic detection, and the
    /// Hermiticity slack accepted before analysis.
    pub tolerance: f64,
}

impl Default for GramOptions {
    fn default() -> Self {
        Self {
            budget: 50_000_000,
            tolerance: 1e-10,
        }
    }
}

/// Pairwise scalar products of sequence vectors under a mode field and a
/// deformation matrix.
#[derive(Debug, Clone)]
pub struct GramMatrix {
    basis: Vec<SequenceVector>,
    entries: DMatrix<Complex64>,
    tolerance: f64,
}

impl GramMatrix {
    /// Wraps explicit entries (synthetic matrices carry an empty basis).
    pub fn from_entries(
        basis: Vec<SequenceVector>,
        entries: DMatrix<Complex64>,
        tolerance: f64,
    ) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::invalid("Gram matrix must be square"));
        }
        if !basis.is_empty() && basis.len() != entries.nrows() {
            return Err(Error::invalid(format!(
                "basis size {} does not match matrix size {}",
                basis.len(),
                entries.nrows()
            )));
        }
        if !(tolerance > 0.0) {
            return Err(Error::invalid("tolerance must be positive"));
        }
        Ok(Self {
            basis,
            entries,
            tolerance,
        })
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn basis(&self) -> &[SequenceVector] {
        &self.basis
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0f64, |m, z| m.max(z.norm()))
    }

    /// max |G - G^dagger| entrywise.
    pub fn hermiticity_residual(&self) -> f64 {
        let n = self.n();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((self.entries[(i, j)] - self.entries[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn max_abs_diff(&self, other: &GramMatrix) -> f64 {
        assert_eq!(self.n(), other.n());
        let mut worst = 0.0f64;
        for (a, b) in self.entries.iter().zip(other.entries.iter()) {
            worst = worst.max((a - b).norm());
        }
        worst
    }
}

struct Component {
    coeff: Complex64,
    functions: Vec<TestFunction>,
}

fn ket_components(v: &SequenceVector) -> Vec<Component> {
    let mut out = Vec::with_capacity(v.chains().len() + 1);
    if v.scalar() != Complex64::ZERO {
        out.push(Component {
            coeff: v.scalar(),
            functions: vec![],
        });
    }
    for c in v.chains() {
        out.push(Component {
            coeff: c.coeff,
            functions: c.functions.clone(),
        });
    }
    out
}

/// Bra side of the pairing: conjugated weight, functions conjugated and the
/// slot order reversed, so a chain (f_k .. f_1) smears as (conj f_1 .. conj f_k).
fn bra_components(v: &SequenceVector) -> Vec<Component> {
    ket_components(v)
        .into_iter()
        .map(|c| Component {
            coeff: c.coeff.conj(),
            functions: c.functions.iter().rev().map(|f| f.conj()).collect(),
        })
        .collect()
}

fn gram_entry(
    field: &ModeField,
    theta: &ThetaMatrix,
    bra: &[Component],
    ket: &[Component],
    budget: u64,
) -> Result<Complex64> {
    let mut acc = Complex64::ZERO;
    for cb in bra {
        for ck in ket {
            let slots: Vec<&TestFunction> = cb
                .functions
                .iter()
                .chain(ck.functions.iter())
                .collect();
            let w = field.wick_smeared_slots(&slots, theta, budget)?;
            acc += cb.coeff * ck.coeff * w;
        }
    }
    Ok(acc)
}

/// Pairwise scalar products of the basis vectors. Entry order is fixed and
/// per-entry sums are sequential, so results are thread-count independent.
pub fn gram(
    basis: &[SequenceVector],
    field: &ModeField,
    theta: &ThetaMatrix,
    opts: &GramOptions,
) -> Result<GramMatrix> {
    let n = basis.len();
    if n == 0 {
        return Err(Error::invalid("gram needs a nonempty basis"));
    }
    let bras: Vec<Vec<Component>> = basis.iter().map(bra_components).collect();
    let kets: Vec<Vec<Component>> = basis.iter().map(ket_components).collect();
    let values: Vec<Complex64> = (0..n * n)
        .into_par_iter()
        .map(|idx| {
            let (r, c) = (idx / n, idx % n);
            gram_entry(field, theta, &bras[r], &kets[c], opts.budget).map_err(|e| match e {
                Error::BudgetExceeded {
                    required, budget, ..
                } => Error::BudgetExceeded {
                    required,
                    budget,
                    context: format!(" at Gram entry ({r}, {c})"),
                },
                other => other,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let entries = DMatrix::from_fn(n, n, |r, c| values[r * n + c]);
    GramMatrix::from_entries(basis.to_vec(), entries, opts.tolerance)
}

/// Result of removing the numerical isotropic subspace.
#[derive(Debug, Clone)]
pub struct QuotientResult {
    /// Gram restricted to the complement, diagonal in the kept eigenbasis.
    pub reduced: GramMatrix,
    /// Number of isotropic directions removed.
    pub null_dim: usize,
    /// Orthogonal projector onto the kept subspace, in basis coordinates.
    pub projector: DMatrix<Complex64>,
    /// Coefficient columns of the kept (combined) basis vectors.
    pub kept_vectors: DMatrix<Complex64>,
    /// Hermiticity defect of the input, max |G - G^dagger|.
    pub asymmetry: f64,
    /// True when the whole space was isotropic (rank zero input).
    pub all_isotropic: bool,
}

/// Removes eigendirections with |eigenvalue| <= tolerance * max |eigenvalue|
/// from the Hermitian part of the Gram.
pub fn isotropic_quotient(g: &GramMatrix) -> Result<QuotientResult> {
    let n = g.n();
    let asymmetry = g.hermiticity_residual();
    let scale = g.max_abs();
    if scale > 0.0 && asymmetry > g.tolerance() * scale {
        return Err(Error::invalid(format!(
            "Gram is not Hermitian within tolerance: defect {asymmetry:.3e} at scale {scale:.3e}"
        )));
    }
    let herm = (g.entries() + g.entries().adjoint()) * Complex64::new(0.5, 0.0);
    let eig = hermitian_eigen(&herm)?;
    let lam_max = eig.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));

    if lam_max == 0.0 {
        return Ok(QuotientResult {
            reduced: GramMatrix::from_entries(vec![], DMatrix::zeros(0, 0), g.tolerance())?,
            null_dim: n,
            projector: DMatrix::zeros(n, n),
            kept_vectors: DMatrix::zeros(n, 0),
            asymmetry,
            all_isotropic: true,
        })
    }

    let kept: Vec<usize> = (0..n)
        .filter(|&i| eig.values[i].abs() > g.tolerance() * lam_max)
        .collect();
    let null_dim = n - kept.len();
    let mut kept_vectors = DMatrix::<Complex64>::zeros(n, kept.len());
    let mut reduced_entries = DMatrix::<Complex64>::zeros(kept.len(), kept.len());
    for (dst, &src) in kept.iter().enumerate() {
        kept_vectors.set_column(dst, &eig.vectors.column(src));
        reduced_entries[(dst, dst)] = Complex64::new(eig.values[src], 0.0);
    }
    let projector = &kept_vectors * kept_vectors.adjoint();
    let reduced_basis = if g.basis().is_empty() {
        vec![]
    } else {
        (0..kept.len())
            .map(|j| {
                let col = DVector::from_iterator(n, kept_vectors.column(j).iter().copied());
                SequenceVector::linear_combination(g.basis(), &col)
            })
            .collect()
    };
    Ok(QuotientResult {
        reduced: GramMatrix::from_entries(reduced_basis, reduced_entries, g.tolerance())?,
        null_dim,
        projector,
        kept_vectors,
        asymmetry,
        all_isotropic: false,
    })
}

/// Fundamental decomposition of a nondegenerate indefinite Gram.
#[derive(Debug, Clone)]
pub struct KreinDecomposition {
    /// Columns u with <u, u> = +1, spanning the positive part.
    pub positive_basis: DMatrix<Complex64>,
    /// Columns u with <u, u> = -1, spanning the negative part.
    pub negative_basis: DMatrix<Complex64>,
    /// (n_plus, n_minus).
    pub signature: (usize, usize),
    /// Isotropic dimension removed before this decomposition.
    pub null_dim: usize,
    values: Vec<f64>,
    vectors: DMatrix<Complex64>,
    entries: DMatrix<Complex64>,
}

impl KreinDecomposition {
    /// Indefinite product of coefficient vectors, `x^dagger G y`.
    pub fn indefinite_product(&self, x: &DVector<Complex64>, y: &DVector<Complex64>) -> Complex64 {
        (x.adjoint() * &self.entries * y)[(0, 0)]
    }

    /// The positive-definite product `<x+, y+> - <x-, y->` as a matrix.
    pub fn definite_product_matrix(&self) -> DMatrix<Complex64> {
        let n = self.vectors.nrows();
        let mut acc = DMatrix::<Complex64>::zeros(n, n);
        for (i, &lam) in self.values.iter().enumerate() {
            let u = self.vectors.column(i);
            acc += &u * u.adjoint() * Complex64::new(lam.abs(), 0.0);
        }
        acc
    }

    /// Positive-definite product of coefficient vectors.
    pub fn definite_product(&self, x: &DVector<Complex64>, y: &DVector<Complex64>) -> Complex64 {
        (x.adjoint() * self.definite_product_matrix() * y)[(0, 0)]
    }

    /// Norm induced by the definite product.
    pub fn norm(&self, x: &DVector<Complex64>) -> f64 {
        self.definite_product(x, x).re.max(0.0).sqrt()
    }

    /// Rebuilds the indefinite product from the two definite blocks.
    pub fn reconstructed(&self) -> DMatrix<Complex64> {
        let n = self.vectors.nrows();
        let mut acc = DMatrix::<Complex64>::zeros(n, n);
        for (i, &lam) in self.values.iter().enumerate() {
            let u = self.vectors.column(i);
            acc += &u * u.adjoint() * Complex64::new(lam, 0.0);
        }
        acc
    }

    pub fn reconstruction_residual(&self) -> f64 {
        (self.reconstructed() - &self.entries)
            .iter()
            .fold(0.0f64, |m, z| m.max(z.norm()))
    }

    /// Max |<u+, v->| over the two bases (block orthogonality defect).
    pub fn cross_block_defect(&self) -> f64 {
        if self.signature.0 == 0 || self.signature.1 == 0 {
            return 0.0;
        }
        (self.positive_basis.adjoint() * &self.entries * &self.negative_basis)
            .iter()
            .fold(0.0f64, |m, z| m.max(z.norm()))
    }
}

/// Splits a nondegenerate Gram into positive and negative definite parts by
/// eigenvalue sign. `null_dim` records the quotient that produced the input.
pub fn krein_decompose(g: &GramMatrix, null_dim: usize) -> Result<KreinDecomposition> {
    let n = g.n();
    if n == 0 {
        return Err(Error::invalid("cannot decompose an empty Gram"));
    }
    let herm = (g.entries() + g.entries().adjoint()) * Complex64::new(0.5, 0.0);
    let eig = hermitian_eigen(&herm)?;
    let lam_max = eig.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if lam_max == 0.0 {
        return Err(Error::Linalg(
            "Gram is identically zero; nothing to decompose".into(),
        ));
    }
    for &lam in &eig.values {
        if lam.abs() <= g.tolerance() * lam_max {
            return Err(Error::Linalg(format!(
                "eigenvalue {lam:.3e} lies within tolerance of zero; quotient the \
                 isotropic subspace first or retune the tolerance"
            )));
        }
    }
    let mut pos_cols = Vec::new();
    let mut neg_cols = Vec::new();
    for (i, &lam) in eig.values.iter().enumerate() {
        let u = eig.vectors.column(i) / Complex64::new(lam.abs().sqrt(), 0.0);
        if lam > 0.0 {
            pos_cols.push(u);
        } else {
            neg_cols.push(u);
        }
    }
    let stack = |cols: &[DVector<Complex64>]| -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(n, cols.len());
        for (j, col) in cols.iter().enumerate() {
            m.set_column(j, col);
        }
        m
    };
    let positive_basis = stack(&pos_cols);
    let negative_basis = stack(&neg_cols);
    Ok(KreinDecomposition {
        signature: (pos_cols.len(), neg_cols.len()),
        positive_basis,
        negative_basis,
        null_dim,
        values: eig.values,
        vectors: eig.vectors,
        entries: g.entries().clone(),
    })
}

/// Builds all chains over the generators up to `max_level` and reports the
/// numerical rank of the cumulative Gram per level: the dimension profile of
/// the span reachable from the vacuum.
pub fn cyclicity_profile(
    field: &ModeField,
    theta: &ThetaMatrix,
    generators: &[TestFunction],
    max_level: usize,
    opts: &GramOptions,
) -> Result<Vec<(usize, usize)>> {
    if max_level > 3 {
        return Err(Error::invalid(format!(
            "cyclicity profile supports max_level <= 3, got {max_level}"
        )));
    }
    if generators.len() > 6 {
        return Err(Error::invalid(format!(
            "cyclicity profile supports at most 6 generators, got {}",
            generators.len()
        )));
    }
    let mut vectors = vec![SequenceVector::vacuum()];
    let mut level_end = vec![1usize]; // cumulative count after each level
    for level in 1..=max_level {
        let words = generators.len().pow(level as u32);
        for w in 0..words {
            let mut word = Vec::with_capacity(level);
            let mut rest = w;
            for _ in 0..level {
                word.push(rest % generators.len());
                rest /= generators.len();
            }
            vectors.push(word_vector(generators, &word)?);
        }
        level_end.push(vectors.len());
    }
    if generators.is_empty() && max_level > 0 {
        // no generators: only the vacuum level exists
        return Ok(vec![(0, 1)]);
    }
    let g = gram(&vectors, field, theta, opts)?;
    let mut profile = Vec::with_capacity(level_end.len());
    for (level, &end) in level_end.iter().enumerate() {
        let sub = g.entries().view((0, 0), (end, end)).into_owned();
        let herm = (&sub + sub.adjoint()) * Complex64::new(0.5, 0.0);
        let eig = hermitian_eigen(&herm)?;
        profile.push((level, numerical_rank(&eig.values, g.tolerance())));
    }
    Ok(profile)
}

/// One sweep row: deformation strength and Gram deviation from the
/// commutative matrix.
#[derive(Debug, Clone)]
pub struct SweepResult {
    pub rows: Vec<(f64, f64)>,
    /// Deviations decrease along the list (5 percent slack allowed).
    pub monotone: bool,
    /// Log-log slope of deviation against theta_sup over the nonzero rows.
    pub slope: Option<f64>,
    /// The final (theta = 0) row is exactly zero.
    pub final_exact_zero: bool,
}

/// Recomputes the Gram of a fixed basis along a descending list of
/// deformation matrices ending at zero and reports the deviation profile.
pub fn commutative_limit_sweep(
    basis: &[SequenceVector],
    field: &ModeField,
    thetas: &[ThetaMatrix],
    opts: &GramOptions,
) -> Result<SweepResult> {
    if thetas.len() < 3 {
        return Err(Error::invalid("sweep needs at least 3 theta values"));
    }
    let last = thetas.last().expect("nonempty");
    if !last.is_zero() {
        return Err(Error::invalid("sweep must end at theta = 0"));
    }
    for w in thetas.windows(2) {
        if w[1].sup_norm() >= w[0].sup_norm() {
            return Err(Error::invalid("sweep theta values must be strictly descending"));
        }
    }
    let reference = gram(basis, field, last, opts)?;
    let mut rows = Vec::with_capacity(thetas.len());
    for t in thetas {
        let g = gram(basis, field, t, opts)?;
        rows.push((t.sup_norm(), g.max_abs_diff(&reference)));
    }
    let monotone = rows.windows(2).all(|w| w[1].1 <= w[0].1 * 1.05);
    let final_exact_zero = rows.last().map(|r| r.1 == 0.0).unwrap_or(false);
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|(t, d)| *t > 0.0 && *d > 0.0)
        .map(|&(t, d)| (t.ln(), d.ln()))
        .collect();
    let slope = if pts.len() >= 2 {
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let num: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let den: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
        (den > 0.0).then(|| num / den)
    } else {
        None
    };
    Ok(SweepResult {
        rows,
        monotone,
        slope,
        final_exact_zero,
    })
}
