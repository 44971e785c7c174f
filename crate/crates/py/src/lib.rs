//! Python bindings: thin wrappers over the core types plus flat functions
//! for the star engines, the mode field, and the Gram/Krein pipeline.

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use star_gns::gns;
use star_gns::grid::BoxSpec;
use star_gns::packet::GaussianPacket;
use star_gns::profile::DampingProfile;
use star_gns::star;
use star_gns::star::{SeriesOrder, StarChain};

fn err(e: star_gns::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

#[derive(FromPyObject)]
enum WidthArg {
    Diagonal(Vec<f64>),
    Full(Vec<Vec<f64>>),
}

fn build_width(width: WidthArg, dim: usize) -> PyResult<nalgebra::DMatrix<f64>> {
    match width {
        WidthArg::Diagonal(d) => {
            if d.len() != dim {
                return Err(PyValueError::new_err("width diagonal length mismatch"));
            }
            Ok(nalgebra::DMatrix::from_fn(dim, dim, |i, j| {
                if i == j {
                    d[i]
                } else {
                    0.0
                }
            }))
        }
        WidthArg::Full(rows) => {
            if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
                return Err(PyValueError::new_err("width matrix shape mismatch"));
            }
            Ok(nalgebra::DMatrix::from_fn(dim, dim, |i, j| rows[i][j]))
        }
    }
}

/// Antisymmetric deformation matrix.
#[pyclass(name = "Theta")]
#[derive(Clone)]
struct PyTheta {
    inner: star_gns::ThetaMatrix,
}

#[pymethods]
impl PyTheta {
    #[new]
    #[pyo3(signature = (dim, upper = vec![]))]
    fn new(dim: usize, upper: Vec<(usize, usize, f64)>) -> PyResult<Self> {
        Ok(Self {
            inner: star_gns::ThetaMatrix::new(dim, &upper).map_err(err)?,
        })
    }

    fn sup_norm(&self) -> f64 {
        self.inner.sup_norm()
    }

    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn scaled(&self, factor: f64) -> Self {
        Self {
            inner: self.inner.scaled(factor),
        }
    }

    fn entries(&self) -> Vec<Vec<f64>> {
        let d = self.inner.dim();
        (0..d)
            .map(|i| (0..d).map(|j| self.inner.entry(i, j)).collect())
            .collect()
    }
}

/// Finite sum of Gaussian packets (plus coordinate functions for the series
/// engine).
#[pyclass(name = "Function")]
#[derive(Clone)]
struct PyFunction {
    inner: star_gns::TestFunction,
}

#[pymethods]
impl PyFunction {
    #[staticmethod]
    fn gaussian(
        coeff: Complex64,
        center: Vec<f64>,
        momentum: Vec<f64>,
        width: WidthArg,
    ) -> PyResult<Self> {
        let dim = center.len();
        let width = build_width(width, dim)?;
        let packet = GaussianPacket::new(coeff, center, momentum, width).map_err(err)?;
        Ok(Self {
            inner: star_gns::TestFunction::gaussian(packet),
        })
    }

    #[staticmethod]
    fn unit_gaussian(dim: usize) -> Self {
        Self {
            inner: star_gns::TestFunction::unit_gaussian(dim),
        }
    }

    #[staticmethod]
    fn coordinate(dim: usize, axis: usize) -> PyResult<Self> {
        Ok(Self {
            inner: star_gns::TestFunction::coordinate(dim, axis).map_err(err)?,
        })
    }

    #[staticmethod]
    fn zero(dim: usize) -> Self {
        Self {
            inner: star_gns::TestFunction::zero(dim),
        }
    }

    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn add(&self, other: &PyFunction) -> PyResult<Self> {
        Ok(Self {
            inner: self.inner.add(&other.inner).map_err(err)?,
        })
    }

    fn scale(&self, s: Complex64) -> Self {
        Self {
            inner: self.inner.scale(s),
        }
    }

    fn conj(&self) -> Self {
        Self {
            inner: self.inner.conj(),
        }
    }

    fn eval(&self, x: Vec<f64>) -> Complex64 {
        self.inner.eval(&x)
    }

    fn fourier(&self) -> PyResult<Self> {
        Ok(Self {
            inner: self.inner.fourier().map_err(err)?,
        })
    }

    fn inverse_fourier(&self) -> PyResult<Self> {
        Ok(Self {
            inner: self.inner.inverse_fourier().map_err(err)?,
        })
    }

    fn integral(&self) -> PyResult<Complex64> {
        self.inner.integral().map_err(err)
    }
}

/// Damping / regularization profile for the two-point product.
#[pyclass(name = "Profile")]
#[derive(Clone)]
struct PyProfile {
    inner: DampingProfile,
}

#[pymethods]
impl PyProfile {
    #[staticmethod]
    #[pyo3(signature = (theta_sup, c = 1.0))]
    fn gaussian_xi(theta_sup: f64, c: f64) -> PyResult<Self> {
        Ok(Self {
            inner: DampingProfile::gaussian_xi(c, theta_sup).map_err(err)?,
        })
    }

    #[staticmethod]
    fn plateau_eta(alpha: f64, epsilon: f64) -> PyResult<Self> {
        Ok(Self {
            inner: DampingProfile::plateau_eta(alpha, epsilon).map_err(err)?,
        })
    }

    fn eval(&self, u: Vec<f64>) -> PyResult<f64> {
        self.inner.eval(&u).map_err(err)
    }
}

/// Two-point product variant: plain, xi-damped, or eta-regularized.
#[pyclass(name = "Variant")]
#[derive(Clone)]
struct PyVariant {
    inner: star_gns::StarVariant,
}

#[pymethods]
impl PyVariant {
    #[staticmethod]
    fn plain() -> Self {
        Self {
            inner: star_gns::StarVariant::plain(),
        }
    }

    #[staticmethod]
    fn xi_damped(profile: PyProfile) -> PyResult<Self> {
        Ok(Self {
            inner: star_gns::StarVariant::xi_damped(profile.inner).map_err(err)?,
        })
    }

    #[staticmethod]
    fn eta_regularized(profile: PyProfile) -> PyResult<Self> {
        Ok(Self {
            inner: star_gns::StarVariant::eta_regularized(profile.inner).map_err(err)?,
        })
    }
}

/// Free scalar field on a spatial circle with a momentum cutoff.
#[pyclass(name = "ModeField")]
#[derive(Clone)]
struct PyModeField {
    inner: star_gns::ModeField,
}

#[pymethods]
impl PyModeField {
    #[new]
    fn new(mass: f64, box_length: f64, cutoff: i64) -> PyResult<Self> {
        Ok(Self {
            inner: star_gns::ModeField::new(mass, box_length, cutoff).map_err(err)?,
        })
    }

    fn omega(&self, j: i64) -> f64 {
        self.inner.omega(j)
    }

    fn momentum(&self, j: i64) -> f64 {
        self.inner.momentum(j)
    }

    fn two_point(&self, x: (f64, f64), y: (f64, f64)) -> Complex64 {
        self.inner.two_point([x.0, x.1], [y.0, y.1])
    }

    /// Smeared n-point functional of an ordered plain-star chain.
    #[pyo3(signature = (functions, theta, budget = 50_000_000))]
    fn wick_npoint_smeared(
        &self,
        functions: Vec<PyFunction>,
        theta: PyTheta,
        budget: u64,
    ) -> PyResult<Complex64> {
        let chain = StarChain::plain(
            functions.into_iter().map(|f| f.inner).collect(),
            theta.inner,
        )
        .map_err(err)?;
        self.inner.wick_npoint_smeared(&chain, budget).map_err(err)
    }

    #[pyo3(signature = (n, samples, seed = 0))]
    fn hermiticity_check(&self, n: usize, samples: usize, seed: u64) -> PyResult<f64> {
        self.inner.hermiticity_check(n, samples, seed).map_err(err)
    }
}

/// Breaking sequence: scalar slot plus ordered chains.
#[pyclass(name = "SequenceVector")]
#[derive(Clone)]
struct PyVector {
    inner: gns::SequenceVector,
}

#[pymethods]
impl PyVector {
    #[staticmethod]
    fn vacuum() -> Self {
        Self {
            inner: gns::SequenceVector::vacuum(),
        }
    }

    /// The smeared operator applied to this vector.
    fn apply(&self, f: &PyFunction) -> PyResult<Self> {
        Ok(Self {
            inner: gns::apply_field_operator(&f.inner, &self.inner).map_err(err)?,
        })
    }

    fn add(&self, other: &PyVector) -> Self {
        Self {
            inner: self.inner.add(&other.inner),
        }
    }

    fn scale(&self, s: Complex64) -> Self {
        Self {
            inner: self.inner.scale(s),
        }
    }

    fn max_level(&self) -> usize {
        self.inner.max_level()
    }

    fn num_chains(&self) -> usize {
        self.inner.chains().len()
    }
}

/// Pairwise scalar products of sequence vectors.
#[pyclass(name = "Gram")]
#[derive(Clone)]
struct PyGram {
    inner: gns::GramMatrix,
}

#[pymethods]
impl PyGram {
    #[staticmethod]
    #[pyo3(signature = (entries, tolerance = 1e-10))]
    fn from_entries(entries: Vec<Vec<Complex64>>, tolerance: f64) -> PyResult<Self> {
        let n = entries.len();
        if entries.iter().any(|r| r.len() != n) {
            return Err(PyValueError::new_err("entries must be square"));
        }
        let m = nalgebra::DMatrix::from_fn(n, n, |i, j| entries[i][j]);
        Ok(Self {
            inner: gns::GramMatrix::from_entries(vec![], m, tolerance).map_err(err)?,
        })
    }

    fn entries(&self) -> Vec<Vec<Complex64>> {
        let n = self.inner.n();
        (0..n)
            .map(|i| (0..n).map(|j| self.inner.entries()[(i, j)]).collect())
            .collect()
    }

    fn size(&self) -> usize {
        self.inner.n()
    }

    fn hermiticity_residual(&self) -> f64 {
        self.inner.hermiticity_residual()
    }

    fn tolerance(&self) -> f64 {
        self.inner.tolerance()
    }
}

/// Fundamental decomposition of a nondegenerate Gram.
#[pyclass(name = "Krein")]
struct PyKrein {
    inner: gns::KreinDecomposition,
}

#[pymethods]
impl PyKrein {
    fn signature(&self) -> (usize, usize) {
        self.inner.signature
    }

    fn null_dim(&self) -> usize {
        self.inner.null_dim
    }

    fn reconstruction_residual(&self) -> f64 {
        self.inner.reconstruction_residual()
    }

    fn cross_block_defect(&self) -> f64 {
        self.inner.cross_block_defect()
    }
}

#[pyfunction]
#[pyo3(signature = (f, g, theta, order = 8))]
fn star_series(f: &PyFunction, g: &PyFunction, theta: &PyTheta, order: usize) -> PyResult<PyFunction> {
    let order = SeriesOrder::new(order).map_err(err)?;
    Ok(PyFunction {
        inner: star::star_series(&f.inner, &g.inner, &theta.inner, order).map_err(err)?,
    })
}

#[pyfunction]
fn star_gaussian_closed(f: &PyFunction, g: &PyFunction, theta: &PyTheta) -> PyResult<PyFunction> {
    Ok(PyFunction {
        inner: star::star_gaussian_closed(&f.inner, &g.inner, &theta.inner).map_err(err)?,
    })
}

#[pyfunction]
fn star_chain_fourier(
    functions: Vec<PyFunction>,
    theta: &PyTheta,
    momenta: Vec<Vec<f64>>,
) -> PyResult<Complex64> {
    let chain = StarChain::plain(
        functions.into_iter().map(|f| f.inner).collect(),
        theta.inner.clone(),
    )
    .map_err(err)?;
    star::star_chain_fourier(&chain, &momenta).map_err(err)
}

fn box_spec(lo: Vec<f64>, hi: Vec<f64>, n: Vec<usize>) -> PyResult<BoxSpec> {
    BoxSpec::new(lo, hi, n).map_err(err)
}

/// Star product sampled on a grid; returns (shape, flat row-major samples).
#[pyfunction]
fn star_fft(
    f: &PyFunction,
    g: &PyFunction,
    theta: &PyTheta,
    lo: Vec<f64>,
    hi: Vec<f64>,
    n: Vec<usize>,
) -> PyResult<(Vec<usize>, Vec<Complex64>)> {
    let spec = box_spec(lo, hi, n)?;
    let grid = star::star_fft(&f.inner, &g.inner, &theta.inner, &spec).map_err(err)?;
    let shape = grid.spec().counts().to_vec();
    let flat = grid.samples().iter().copied().collect();
    Ok((shape, flat))
}

/// Two-variable damped product over the square of the base box; returns
/// (shape, flat row-major samples) with the x axes before the y axes.
#[pyfunction]
fn tilde_star_2pt(
    variant: &PyVariant,
    f: &PyFunction,
    g: &PyFunction,
    theta: &PyTheta,
    lo: Vec<f64>,
    hi: Vec<f64>,
    n: Vec<usize>,
) -> PyResult<(Vec<usize>, Vec<Complex64>)> {
    let spec = box_spec(lo, hi, n)?;
    let grid = star::tilde_star_2pt(&variant.inner, &f.inner, &g.inner, &theta.inner, &spec)
        .map_err(err)?;
    let shape = grid.spec().counts().to_vec();
    let flat = grid.samples().iter().copied().collect();
    Ok((shape, flat))
}

#[pyfunction]
#[pyo3(signature = (basis, field, theta, budget = 50_000_000, tolerance = 1e-10))]
fn gram(
    basis: Vec<PyVector>,
    field: &PyModeField,
    theta: &PyTheta,
    budget: u64,
    tolerance: f64,
) -> PyResult<PyGram> {
    let vectors: Vec<gns::SequenceVector> = basis.into_iter().map(|v| v.inner).collect();
    let opts = gns::GramOptions { budget, tolerance };
    Ok(PyGram {
        inner: gns::gram(&vectors, &field.inner, &theta.inner, &opts).map_err(err)?,
    })
}

/// Removes the numerical isotropic subspace; returns (reduced, null_dim).
#[pyfunction]
fn isotropic_quotient(g: &PyGram) -> PyResult<(PyGram, usize)> {
    let q = gns::isotropic_quotient(&g.inner).map_err(err)?;
    Ok((PyGram { inner: q.reduced }, q.null_dim))
}

#[pyfunction]
#[pyo3(signature = (g, null_dim = 0))]
fn krein_decompose(g: &PyGram, null_dim: usize) -> PyResult<PyKrein> {
    Ok(PyKrein {
        inner: gns::krein_decompose(&g.inner, null_dim).map_err(err)?,
    })
}

#[pyfunction]
#[pyo3(signature = (field, theta, generators, max_level, budget = 50_000_000))]
fn cyclicity_profile(
    field: &PyModeField,
    theta: &PyTheta,
    generators: Vec<PyFunction>,
    max_level: usize,
    budget: u64,
) -> PyResult<Vec<(usize, usize)>> {
    let gens: Vec<star_gns::TestFunction> = generators.into_iter().map(|f| f.inner).collect();
    let opts = gns::GramOptions {
        budget,
        tolerance: 1e-10,
    };
    gns::cyclicity_profile(&field.inner, &theta.inner, &gens, max_level, &opts).map_err(err)
}

/// Gram deviation along a descending theta list ending at zero; returns
/// (rows, monotone, slope-or-None).
#[pyfunction]
#[pyo3(signature = (basis, field, thetas, budget = 50_000_000))]
fn commutative_limit_sweep(
    basis: Vec<PyVector>,
    field: &PyModeField,
    thetas: Vec<PyTheta>,
    budget: u64,
) -> PyResult<(Vec<(f64, f64)>, bool, Option<f64>)> {
    let vectors: Vec<gns::SequenceVector> = basis.into_iter().map(|v| v.inner).collect();
    let ts: Vec<star_gns::ThetaMatrix> = thetas.into_iter().map(|t| t.inner).collect();
    let opts = gns::GramOptions {
        budget,
        tolerance: 1e-10,
    };
    let sweep =
        gns::commutative_limit_sweep(&vectors, &field.inner, &ts, &opts).map_err(err)?;
    Ok((sweep.rows, sweep.monotone, sweep.slope))
}

/// Runs a JSON experiment config; returns (all_pass, report_json, sweep_csv).
#[pyfunction]
fn run_experiment(config_json: &str) -> PyResult<(bool, String, Option<String>)> {
    let cfg = star_gns::experiment::ExperimentConfig::from_json(config_json).map_err(err)?;
    let outcome = star_gns::experiment::run(&cfg).map_err(err)?;
    let report = serde_json_string(&outcome.report)?;
    Ok((outcome.all_pass, report, outcome.sweep_csv))
}

fn serde_json_string(v: &impl serde::Serialize) -> PyResult<String> {
    serde_json::to_string_pretty(v).map_err(|e| PyValueError::new_err(e.to_string()))
}

#[pymodule]
fn star_gns_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyTheta>()?;
    m.add_class::<PyFunction>()?;
    m.add_class::<PyProfile>()?;
    m.add_class::<PyVariant>()?;
    m.add_class::<PyModeField>()?;
    m.add_class::<PyVector>()?;
    m.add_class::<PyGram>()?;
    m.add_class::<PyKrein>()?;
    m.add_function(wrap_pyfunction!(star_series, m)?)?;
    m.add_function(wrap_pyfunction!(star_gaussian_closed, m)?)?;
    m.add_function(wrap_pyfunction!(star_chain_fourier, m)?)?;
    m.add_function(wrap_pyfunction!(star_fft, m)?)?;
    m.add_function(wrap_pyfunction!(tilde_star_2pt, m)?)?;
    m.add_function(wrap_pyfunction!(gram, m)?)?;
    m.add_function(wrap_pyfunction!(isotropic_quotient, m)?)?;
    m.add_function(wrap_pyfunction!(krein_decompose, m)?)?;
    m.add_function(wrap_pyfunction!(cyclicity_profile, m)?)?;
    m.add_function(wrap_pyfunction!(commutative_limit_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}
